//! Pointwise residuals of the heat equations, boundary conditions and
//! interface conditions, written in per-material local coordinates.
//!
//! Jets passed here are in physical units (°C, seconds) and track the local
//! spatial coordinate at index [`COORD_X`] and time at index [`COORD_T`].

use serde::{Deserialize, Serialize};

use super::MaterialProps;
use crate::autodiff::Jet2;
use crate::{Error, Result};

pub const COORD_X: usize = 0;
pub const COORD_T: usize = 1;

/// Initial state and per-design geometry and convection.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationConstants {
    /// Initial temperature of tool and part, °C.
    pub t_init: f64,
    /// Initial degree of cure.
    pub alpha_init: f64,
    /// Heat transfer coefficients, W/(m²·K).
    pub h_top: f64,
    pub h_bot: f64,
    /// Tool and part thickness, m.
    pub l_t: f64,
    pub l_c: f64,
}

pub const T_INIT: f64 = 20.0;
pub const ALPHA_INIT: f64 = 0.05;

impl SimulationConstants {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..1.0).contains(&self.alpha_init) {
            return Err(Error::domain("initial degree of cure must lie in [0, 1)"));
        }
        if !(self.h_top >= 0.0 && self.h_bot >= 0.0) {
            return Err(Error::domain("heat transfer coefficients must be nonnegative"));
        }
        positive_length(self.l_t)?;
        positive_length(self.l_c)
    }
}

/// Coefficients of the transformed equations for one design.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThermalCoefficients {
    /// `a_t / L_t²`, 1/s.
    pub tool_diffusion: f64,
    /// `a_c / L_c²`, 1/s.
    pub part_diffusion: f64,
    /// `b_c`, K.
    pub generation: f64,
    /// `h_top·L_c / k_c`.
    pub biot_top: f64,
    /// `h_bot·L_t / k_t`.
    pub biot_bot: f64,
    /// `k_t / L_t` and `k_c / L_c`, W/(m²·K).
    pub tool_flux: f64,
    pub part_flux: f64,
}

fn positive_length(l: f64) -> Result<()> {
    if !(l.is_finite() && l > 0.0) {
        return Err(Error::domain(format!("thickness must be positive, got {l}")));
    }
    Ok(())
}

impl ThermalCoefficients {
    pub fn new(props: &MaterialProps, consts: &SimulationConstants) -> Result<Self> {
        props.validate().map_err(|e| Error::domain(e.to_string()))?;
        consts.validate()?;
        Ok(ThermalCoefficients {
            tool_diffusion: props.tool_diffusivity() / (consts.l_t * consts.l_t),
            part_diffusion: props.part_diffusivity() / (consts.l_c * consts.l_c),
            generation: props.heat_generation(),
            biot_top: consts.h_top * consts.l_c / props.part.conductivity,
            biot_bot: consts.h_bot * consts.l_t / props.tool.conductivity,
            tool_flux: props.tool.conductivity / consts.l_t,
            part_flux: props.part.conductivity / consts.l_c,
        })
    }
}

fn require_tracked(jet: &Jet2, n: usize) -> Result<()> {
    if jet.n_tracked() < n {
        return Err(Error::Dimension {
            expected: n,
            got: jet.n_tracked(),
        });
    }
    Ok(())
}

/// `∂T_t/∂t − (a_t/L_t²)·∂²T_t/∂x1²`.
pub fn pde_residual_tool(jet: &Jet2, props: &MaterialProps, l_t: f64) -> Result<f64> {
    positive_length(l_t)?;
    require_tracked(jet, 2)?;
    let coeff = props.tool_diffusivity() / (l_t * l_t);
    Ok(jet.d1[COORD_T] - coeff * jet.d2[COORD_X])
}

/// `∂T_c/∂t − (a_c/L_c²)·∂²T_c/∂x2² − bc_scale·b_c·dα/dt`.
pub fn pde_residual_part(jet: &Jet2, alpha_rate: f64, props: &MaterialProps, l_c: f64, bc_scale: f64) -> Result<f64> {
    positive_length(l_c)?;
    require_tracked(jet, 2)?;
    if !(0.0..=1.0).contains(&bc_scale) {
        return Err(Error::domain(format!("bc_scale must lie in [0, 1], got {bc_scale}")));
    }
    let coeff = props.part_diffusivity() / (l_c * l_c);
    Ok(jet.d1[COORD_T] - coeff * jet.d2[COORD_X] - bc_scale * props.heat_generation() * alpha_rate)
}

/// Robin residuals at the part top surface (`x2 = 1`) and tool bottom (`x1 = 0`):
///
/// * top: `∂T_c/∂x2 − (h_top·L_c/k_c)·(T_a − T_c)`
/// * bottom: `∂T_t/∂x1 − (h_bot·L_t/k_t)·(T_t − T_a)`
pub fn bc_residuals(
    top: &Jet2,
    bottom: &Jet2,
    t_air: f64,
    consts: &SimulationConstants,
    props: &MaterialProps,
) -> Result<(f64, f64)> {
    require_tracked(top, 1)?;
    require_tracked(bottom, 1)?;
    positive_length(consts.l_t)?;
    positive_length(consts.l_c)?;
    if !(props.part.conductivity > 0.0 && props.tool.conductivity > 0.0) {
        return Err(Error::domain("conductivities must be positive"));
    }
    let top_res = top.d1[COORD_X] - consts.h_top * consts.l_c / props.part.conductivity * (t_air - top.value);
    let bot_res = bottom.d1[COORD_X] - consts.h_bot * consts.l_t / props.tool.conductivity * (bottom.value - t_air);
    Ok((top_res, bot_res))
}

/// Temperature and heat-flux continuity between tool (`x1 = 1`) and part (`x2 = 0`).
pub fn continuity_residuals(
    tool: &Jet2,
    part: &Jet2,
    props: &MaterialProps,
    l_t: f64,
    l_c: f64,
) -> Result<(f64, f64)> {
    require_tracked(tool, 1)?;
    require_tracked(part, 1)?;
    positive_length(l_t)?;
    positive_length(l_c)?;
    if !(props.part.conductivity > 0.0 && props.tool.conductivity > 0.0) {
        return Err(Error::domain("conductivities must be positive"));
    }
    let value = tool.value - part.value;
    let flux = props.tool.conductivity / l_t * tool.d1[COORD_X] - props.part.conductivity / l_c * part.d1[COORD_X];
    Ok((value, flux))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::process::PropertyFile;

    fn props() -> MaterialProps {
        PropertyFile::default().materials()
    }

    fn jet(value: f64, dx: f64, dt: f64, dxx: f64) -> Jet2 {
        Jet2 {
            value,
            d1: vec![dx, dt],
            d2: vec![dxx, 0.0],
        }
    }

    fn consts() -> SimulationConstants {
        SimulationConstants {
            t_init: T_INIT,
            alpha_init: ALPHA_INIT,
            h_top: 100.0,
            h_bot: 75.0,
            l_t: 0.03,
            l_c: 0.03,
        }
    }

    #[test]
    fn constant_field_has_zero_residuals() {
        let p = props();
        let c = jet(42.0, 0.0, 0.0, 0.0);
        assert_eq!(pde_residual_tool(&c, &p, 0.02).unwrap(), 0.0);
        assert_eq!(pde_residual_part(&c, 0.0, &p, 0.03, 1.0).unwrap(), 0.0);
    }

    #[test]
    fn steady_parabola_in_tool() {
        // T = x1² with a_t / L_t² = 1.
        let p = props();
        let l_t = p.tool_diffusivity().sqrt();
        let r = pde_residual_tool(&jet(0.25, 1.0, 0.0, 2.0), &p, l_t).unwrap();
        assert!((r + 2.0).abs() < 1e-12);
    }

    #[test]
    fn manufactured_decay_mode() {
        // T = sin(πx)·exp(−t) solves T_t = (1/π²)·T_xx.
        let mut p = props();
        let l_t = 0.025;
        p.tool.conductivity = l_t * l_t / std::f64::consts::PI.powi(2) * p.tool.density * p.tool.specific_heat;
        let pi = std::f64::consts::PI;
        for (x, t) in [(0.1, 0.0), (0.37, 1.3), (0.9, 4.0)] {
            let e = (-t as f64).exp();
            let j = jet((pi * x).sin() * e, pi * (pi * x).cos() * e, -(pi * x).sin() * e, -pi * pi * (pi * x).sin() * e);
            assert!(pde_residual_tool(&j, &p, l_t).unwrap().abs() < 1e-12);
        }
    }

    #[test]
    fn part_residual_without_generation_matches_tool_form() {
        let p = props();
        let j = jet(80.0, 0.3, 0.01, -4.0);
        let mut as_tool = p.clone();
        as_tool.tool.conductivity = p.part.conductivity;
        as_tool.tool.density = p.part.density;
        as_tool.tool.specific_heat = p.part.specific_heat;
        let a = pde_residual_part(&j, 1e-3, &p, 0.03, 0.0).unwrap();
        let b = pde_residual_tool(&j, &as_tool, 0.03).unwrap();
        assert!((a - b).abs() < 1e-15);
        assert!(pde_residual_part(&j, 1e-3, &p, 0.03, 1.5).is_err());
    }

    #[test]
    fn manufactured_part_field_with_prescribed_cure_rate() {
        // T = 1 + x² + 2·coeff·t + b_c·q·t solves the part PDE when dα/dt = q.
        let p = props();
        let l_c = 0.03;
        let coeff = p.part_diffusivity() / (l_c * l_c);
        let q = 2.0e-4;
        let (x, t) = (0.4, 300.0);
        let b = p.heat_generation();
        let j = jet(1.0 + x * x + (2.0 * coeff + b * q) * t, 2.0 * x, 2.0 * coeff + b * q, 2.0);
        assert!(pde_residual_part(&j, q, &p, l_c, 1.0).unwrap().abs() < 1e-12);
    }

    #[test]
    fn equilibrium_and_adiabatic_boundaries() {
        let p = props();
        let c = consts();
        let eq = jet(150.0, 0.0, 0.0, 0.0);
        assert_eq!(bc_residuals(&eq, &eq, 150.0, &c, &p).unwrap(), (0.0, 0.0));
        let insulated = SimulationConstants { h_top: 0.0, ..c };
        let top = jet(90.0, 0.7, 0.0, 0.0);
        let (rt, _) = bc_residuals(&top, &eq, 150.0, &insulated, &p).unwrap();
        assert_eq!(rt, 0.7);
    }

    #[test]
    fn boundary_formula_by_hand() {
        let p = props();
        let c = consts();
        let top = jet(120.0, -3.0, 0.0, 0.0);
        let bot = jet(100.0, 0.8, 0.0, 0.0);
        let (rt, rb) = bc_residuals(&top, &bot, 130.0, &c, &p).unwrap();
        let et = -3.0 - 100.0 * 0.03 / 0.6 * (130.0 - 120.0);
        let eb = 0.8 - 75.0 * 0.03 / 13.0 * (100.0 - 130.0);
        assert!((rt - et).abs() < 1e-12 && (rb - eb).abs() < 1e-12);
    }

    #[test]
    fn continuity_of_a_shared_linear_profile() {
        // T(z) = 30 + G·z_part in the part and matching flux in the tool.
        let p = props();
        let (l_t, l_c) = (0.02, 0.03);
        let grad_part = 5.0;
        let grad_tool = p.part.conductivity / l_c * grad_part * l_t / p.tool.conductivity;
        let tool = jet(30.0, grad_tool, 0.0, 0.0);
        let part = jet(30.0, grad_part, 0.0, 0.0);
        let (v, f) = continuity_residuals(&tool, &part, &p, l_t, l_c).unwrap();
        assert_eq!(v, 0.0);
        assert!(f.abs() < 1e-12);
        let jump = jet(31.0, grad_tool, 0.0, 0.0);
        assert_eq!(continuity_residuals(&jump, &part, &p, l_t, l_c).unwrap().0, 1.0);
        assert!(continuity_residuals(&tool, &part, &p, 0.0, l_c).is_err());
    }
}
