//! Finite-difference reference solver for the coupled tool/part conduction
//! problem with cure kinetics.
//!
//! Each step first advances the degree of cure at every part node with
//! sub-stepped RK4 at the start-of-step temperature, then solves one
//! Crank–Nicolson system for both materials. The Robin boundaries and the
//! two interface conditions enter as algebraic rows with second-order
//! one-sided differences, which keeps the system banded (3 sub-, 2
//! super-diagonals).

mod banded;
mod export;
pub mod mms;

pub use banded::{BandLu, BandMatrix};
pub use export::{read_solution_csv, write_solution_csv, RunManifest, SOLUTION_CSV_HEADER};

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::design::DesignPoint;
use crate::field::FieldSolution;
use crate::process::{CureCycle, CureKinetics, MaterialProps, SimulationConstants, ThermalCoefficients};
use crate::units::celsius_to_kelvin;
use crate::{Error, Result};

fn default_save_every() -> usize {
    10
}

fn default_substeps() -> usize {
    2
}

/// Discretization of the reference solve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Grid1D {
    pub n_tool: usize,
    pub n_part: usize,
    /// Maximum time step, s. The step actually used divides `t_end` evenly.
    pub dt: f64,
    pub t_end: f64,
    /// Store every `save_every`-th step (the final step is always stored).
    #[serde(default = "default_save_every")]
    pub save_every: usize,
    /// RK4 sub-steps of the kinetics per time step.
    #[serde(default = "default_substeps")]
    pub kinetics_substeps: usize,
}

impl Grid1D {
    pub const DEFAULT_NODES: usize = 81;
    pub const DEFAULT_DT: f64 = 1.0;

    pub fn with_defaults(t_end: f64) -> Self {
        Grid1D {
            n_tool: Self::DEFAULT_NODES,
            n_part: Self::DEFAULT_NODES,
            dt: Self::DEFAULT_DT,
            t_end,
            save_every: default_save_every(),
            kinetics_substeps: default_substeps(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_tool < 3 || self.n_part < 3 {
            return Err(Error::config("grids need at least 3 nodes per material"));
        }
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::config("time step must be positive"));
        }
        if !(self.t_end > 0.0 && self.t_end.is_finite()) {
            return Err(Error::config("end time must be positive"));
        }
        if self.save_every == 0 || self.kinetics_substeps == 0 {
            return Err(Error::config("save_every and kinetics_substeps must be at least 1"));
        }
        Ok(())
    }

    pub fn n_steps(&self) -> usize {
        ((self.t_end / self.dt) - 1e-9).ceil().max(1.0) as usize
    }

    /// Uniform step used by the integrator.
    pub fn step(&self) -> f64 {
        self.t_end / self.n_steps() as f64
    }

    /// Times stored by a solve on this grid, bit-identical to the solver's.
    pub fn saved_times(&self) -> Vec<f64> {
        let (n, dt) = (self.n_steps(), self.step());
        let mut out = vec![0.0];
        out.extend(
            (1..=n)
                .filter(|k| k % self.save_every == 0 || *k == n)
                .map(|k| k as f64 * dt),
        );
        out
    }
}

/// Autoclave air temperature seen by both convective boundaries.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AirTemperature {
    Cycle(CureCycle),
    Constant(f64),
}

impl AirTemperature {
    pub fn at(&self, t: f64) -> f64 {
        match self {
            AirTemperature::Cycle(c) => c.air_temperature(t),
            AirTemperature::Constant(v) => *v,
        }
    }
}

/// Everything the solver needs besides the grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Problem {
    pub props: MaterialProps,
    pub kinetics: CureKinetics,
    pub constants: SimulationConstants,
    pub air: AirTemperature,
}

impl Problem {
    pub fn for_design(design: &DesignPoint, props: &MaterialProps, kinetics: &CureKinetics, cool_down: bool) -> Self {
        Problem {
            props: props.clone(),
            kinetics: kinetics.clone(),
            constants: design.constants(),
            air: AirTemperature::Cycle(design.cycle(cool_down)),
        }
    }
}

/// Inhomogeneous terms added to the discrete equations, for manufactured
/// solutions. Every hook defaults to zero.
pub trait Forcing {
    /// Added to `∂T_t/∂t − D_t·∂²T_t/∂x1²`, K/s.
    fn tool_source(&self, _x: f64, _t: f64) -> f64 {
        0.0
    }
    /// Added to the part equation, K/s.
    fn part_source(&self, _x: f64, _t: f64) -> f64 {
        0.0
    }
    /// Right-hand side of `∂T_t/∂x1 − Bi_bot·(T_t − Ta) = g` at `x1 = 0`.
    fn bottom(&self, _t: f64) -> f64 {
        0.0
    }
    /// Right-hand side of `∂T_c/∂x2 − Bi_top·(Ta − T_c) = g` at `x2 = 1`.
    fn top(&self, _t: f64) -> f64 {
        0.0
    }
    /// Right-hand side of `T_t(1) − T_c(0) = g`.
    fn value_jump(&self, _t: f64) -> f64 {
        0.0
    }
    /// Right-hand side of `(k_t/L_t)·∂T_t/∂x1 − (k_c/L_c)·∂T_c/∂x2 = g`, W/m².
    fn flux_jump(&self, _t: f64) -> f64 {
        0.0
    }
    /// Initial tool temperature; `None` uses the uniform initial state.
    fn initial_tool(&self, _x: f64) -> Option<f64> {
        None
    }
    fn initial_part(&self, _x: f64) -> Option<f64> {
        None
    }
}

pub struct NoForcing;
impl Forcing for NoForcing {}

/// Per-run diagnostics, maxima over all steps.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct SolveReport {
    pub steps: usize,
    pub dt: f64,
    /// `|T_t(1) − T_c(0)|`, °C.
    pub max_value_jump: f64,
    /// Flux mismatch over `max(|q_t|, |q_c|, k_c/L_c·1 K)`.
    pub max_flux_jump: f64,
    /// `‖A·u − b‖∞ / (‖A‖∞·‖u‖∞ + ‖b‖∞)`.
    pub max_linear_residual: f64,
}

/// Solves a design with the supplied material data.
pub fn solve(design: &DesignPoint, props: &MaterialProps, kinetics: &CureKinetics, grid: &Grid1D) -> Result<FieldSolution> {
    design.validate()?;
    let problem = Problem::for_design(design, props, kinetics, false);
    let (mut sol, _) = solve_problem(&problem, grid, &NoForcing)?;
    sol.design = Some(*design);
    Ok(sol)
}

struct Layout {
    nt: usize,
    np: usize,
    h1: f64,
    h2: f64,
    /// Scale applied to the flux row, keeps its entries O(1/h).
    flux_row_scale: f64,
}

impl Layout {
    fn part(&self, i: usize) -> usize {
        self.nt + i
    }
}

fn assemble(c: &ThermalCoefficients, l: &Layout, dt: f64) -> BandMatrix {
    let n = l.nt + l.np;
    let mut a = BandMatrix::zeros(n, 3, 2);
    let (nt, np) = (l.nt, l.np);
    let rt = c.tool_diffusion * dt / (2.0 * l.h1 * l.h1);
    let rp = c.part_diffusion * dt / (2.0 * l.h2 * l.h2);

    a.set(0, 0, -3.0 / (2.0 * l.h1) - c.biot_bot);
    a.set(0, 1, 4.0 / (2.0 * l.h1));
    a.set(0, 2, -1.0 / (2.0 * l.h1));
    for i in 1..nt - 1 {
        a.set(i, i - 1, -rt);
        a.set(i, i, 1.0 + 2.0 * rt);
        a.set(i, i + 1, -rt);
    }
    // Interface value row on the last tool node.
    a.set(nt - 1, nt - 1, 1.0);
    a.set(nt - 1, nt, -1.0);
    // Interface flux row on the first part node.
    let (ft, fc) = (c.tool_flux * l.flux_row_scale / (2.0 * l.h1), c.part_flux * l.flux_row_scale / (2.0 * l.h2));
    let r = l.part(0);
    a.set(r, nt - 3, ft);
    a.set(r, nt - 2, -4.0 * ft);
    a.set(r, nt - 1, 3.0 * ft);
    a.set(r, r, 3.0 * fc);
    a.set(r, r + 1, -4.0 * fc);
    a.set(r, r + 2, fc);
    for i in 1..np - 1 {
        let r = l.part(i);
        a.set(r, r - 1, -rp);
        a.set(r, r, 1.0 + 2.0 * rp);
        a.set(r, r + 1, -rp);
    }
    let r = l.part(np - 1);
    a.set(r, r, 3.0 / (2.0 * l.h2) + c.biot_top);
    a.set(r, r - 1, -4.0 / (2.0 * l.h2));
    a.set(r, r - 2, 1.0 / (2.0 * l.h2));
    a
}

fn rk4_alpha(kin: &CureKinetics, alpha: f64, t_kelvin: f64, dt: f64, substeps: usize) -> f64 {
    let h = dt / substeps as f64;
    let f = |a: f64| kin.cure_rate_guarded(a, t_kelvin);
    let mut a = alpha;
    for _ in 0..substeps {
        let k1 = f(a);
        let k2 = f(a + 0.5 * h * k1);
        let k3 = f(a + 0.5 * h * k2);
        let k4 = f(a + h * k3);
        a += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
    // The rate is nonnegative and vanishes at full cure.
    a.clamp(alpha, 1.0)
}

/// Solves a general problem, with optional manufactured forcing.
pub fn solve_problem(problem: &Problem, grid: &Grid1D, forcing: &dyn Forcing) -> Result<(FieldSolution, SolveReport)> {
    grid.validate()?;
    problem.kinetics.validate()?;
    let c = ThermalCoefficients::new(&problem.props, &problem.constants)?;
    let (nt, np) = (grid.n_tool, grid.n_part);
    let layout = Layout {
        nt,
        np,
        h1: 1.0 / (nt - 1) as f64,
        h2: 1.0 / (np - 1) as f64,
        flux_row_scale: 1.0 / (c.tool_flux + c.part_flux),
    };
    let n_steps = grid.n_steps();
    let dt = grid.step();
    let matrix = assemble(&c, &layout, dt);
    let a_norm = matrix.norm_inf();
    let lu = matrix.clone().factor()?;

    let x_tool = FieldSolution::grid(nt);
    let x_part = FieldSolution::grid(np);
    let t0 = problem.constants.t_init;
    let mut u = vec![0.0; nt + np];
    for (i, &x) in x_tool.iter().enumerate() {
        u[i] = forcing.initial_tool(x).unwrap_or(t0);
    }
    for (i, &x) in x_part.iter().enumerate() {
        u[nt + i] = forcing.initial_part(x).unwrap_or(t0);
    }
    let mut alpha = vec![problem.constants.alpha_init; np];

    let n_saved = n_steps / grid.save_every + 2;
    let mut times = Vec::with_capacity(n_saved);
    let mut rows_tool: Vec<f64> = Vec::with_capacity(n_saved * nt);
    let mut rows_part: Vec<f64> = Vec::with_capacity(n_saved * np);
    let mut rows_alpha: Vec<f64> = Vec::with_capacity(n_saved * np);
    let mut store = |t: f64, u: &[f64], alpha: &[f64]| {
        times.push(t);
        rows_tool.extend_from_slice(&u[..nt]);
        rows_part.extend_from_slice(&u[nt..]);
        rows_alpha.extend_from_slice(alpha);
    };
    store(0.0, &u, &alpha);

    let mut report = SolveReport {
        steps: n_steps,
        dt,
        ..Default::default()
    };
    let rt = c.tool_diffusion * dt / (2.0 * layout.h1 * layout.h1);
    let rp = c.part_diffusion * dt / (2.0 * layout.h2 * layout.h2);
    let mut rhs = vec![0.0; nt + np];
    let mut check = vec![0.0; nt + np];
    let mut alpha_new = vec![0.0; np];

    for step in 0..n_steps {
        let t_old = step as f64 * dt;
        let t_new = (step + 1) as f64 * dt;

        for i in 0..np {
            let tk = celsius_to_kelvin(u[nt + i]);
            if !(tk > 0.0) {
                return Err(Error::Solver(format!("non-physical part temperature {} °C at t = {t_old} s", u[nt + i])));
            }
            alpha_new[i] = rk4_alpha(&problem.kinetics, alpha[i], tk, dt, grid.kinetics_substeps);
        }

        let ta = problem.air.at(t_new);
        rhs[0] = -c.biot_bot * ta + forcing.bottom(t_new);
        for i in 1..nt - 1 {
            let x = x_tool[i];
            let src = 0.5 * (forcing.tool_source(x, t_old) + forcing.tool_source(x, t_new));
            rhs[i] = rt * u[i - 1] + (1.0 - 2.0 * rt) * u[i] + rt * u[i + 1] + dt * src;
        }
        rhs[nt - 1] = forcing.value_jump(t_new);
        rhs[nt] = forcing.flux_jump(t_new) * layout.flux_row_scale;
        for i in 1..np - 1 {
            let x = x_part[i];
            let src = 0.5 * (forcing.part_source(x, t_old) + forcing.part_source(x, t_new));
            let generation = c.generation * (alpha_new[i] - alpha[i]);
            let r = nt + i;
            rhs[r] = rp * u[r - 1] + (1.0 - 2.0 * rp) * u[r] + rp * u[r + 1] + dt * src + generation;
        }
        rhs[nt + np - 1] = c.biot_top * ta + forcing.top(t_new);

        let b_norm = rhs.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
        u.copy_from_slice(&rhs);
        lu.solve_in_place(&mut u);
        alpha.copy_from_slice(&alpha_new);

        if let Some(i) = u.iter().position(|v| !v.is_finite()) {
            return Err(Error::Solver(format!("non-finite temperature at unknown {i}, step {step}, t = {t_new} s")));
        }

        matrix.mul_vec(&u, &mut check);
        let u_norm = u.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
        let res = check.iter().zip(&rhs).fold(0.0_f64, |m, (a, b)| m.max((a - b).abs()));
        report.max_linear_residual = report.max_linear_residual.max(res / (a_norm * u_norm + b_norm).max(f64::MIN_POSITIVE));

        let (h1, h2) = (layout.h1, layout.h2);
        let dtool = (3.0 * u[nt - 1] - 4.0 * u[nt - 2] + u[nt - 3]) / (2.0 * h1);
        let dpart = (-3.0 * u[nt] + 4.0 * u[nt + 1] - u[nt + 2]) / (2.0 * h2);
        let (qt, qc) = (c.tool_flux * dtool, c.part_flux * dpart);
        let jump = (u[nt - 1] - u[nt] - forcing.value_jump(t_new)).abs();
        let fjump = (qt - qc - forcing.flux_jump(t_new)).abs() / qt.abs().max(qc.abs()).max(c.part_flux);
        report.max_value_jump = report.max_value_jump.max(jump);
        report.max_flux_jump = report.max_flux_jump.max(fjump);

        if (step + 1) % grid.save_every == 0 || step + 1 == n_steps {
            store(t_new, &u, &alpha);
        }
    }

    let n_saved = times.len();
    let sol = FieldSolution {
        times,
        t_tool: Array2::from_shape_vec((n_saved, nt), rows_tool).expect("shape"),
        t_part: Array2::from_shape_vec((n_saved, np), rows_part).expect("shape"),
        alpha: Array2::from_shape_vec((n_saved, np), rows_alpha).expect("shape"),
        design: None,
    };
    Ok((sol, report))
}
