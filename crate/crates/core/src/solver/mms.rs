//! Manufactured solutions for verifying the discretization order.
//!
//! Each material carries `T = base + f(x)·g(t)`. The forcing hooks inject
//! whatever source and boundary terms make that field exact.

use super::{solve_problem, AirTemperature, Forcing, Grid1D, Problem};
use crate::process::{CompositeMaterial, CureKinetics, MaterialProps, SimulationConstants, ThermalCoefficients, ToolMaterial};
use crate::Result;

/// Spatial shape of the manufactured field.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Shape {
    /// Trigonometric in x: exercises the spatial truncation error.
    Smooth,
    /// Quadratic in x: every stencil is exact, only time error remains.
    Quadratic,
}

const OMEGA: f64 = 0.5;
const AIR: f64 = 30.0;

#[derive(Debug, Clone)]
pub struct Manufactured {
    pub shape: Shape,
    pub problem: Problem,
    coeff: ThermalCoefficients,
}

fn tool_profile(shape: Shape, x: f64) -> [f64; 3] {
    match shape {
        Shape::Smooth => {
            let a = 1.3 * x + 0.4;
            [10.0 * a.sin(), 13.0 * a.cos(), -16.9 * a.sin()]
        }
        Shape::Quadratic => [3.0 + 2.0 * x - x * x, 2.0 - 2.0 * x, -2.0],
    }
}

fn part_profile(shape: Shape, x: f64) -> [f64; 3] {
    match shape {
        Shape::Smooth => {
            let a = 1.7 * x;
            [8.0 * a.cos(), -13.6 * a.sin(), -23.12 * a.cos()]
        }
        Shape::Quadratic => [1.0 + x + 0.5 * x * x, 1.0 + x, 1.0],
    }
}

fn tool_time(t: f64) -> [f64; 2] {
    [1.0 + 0.5 * (OMEGA * t).sin(), 0.5 * OMEGA * (OMEGA * t).cos()]
}

fn part_time(t: f64) -> [f64; 2] {
    [1.0 + 0.3 * (OMEGA * t).cos(), -0.3 * OMEGA * (OMEGA * t).sin()]
}

impl Manufactured {
    pub fn new(shape: Shape) -> Self {
        let props = MaterialProps {
            tool: ToolMaterial {
                name: "mms tool".into(),
                conductivity: 10.0,
                density: 1000.0,
                specific_heat: 1000.0,
            },
            part: CompositeMaterial {
                name: "mms part".into(),
                conductivity: 1.0,
                density: 1000.0,
                specific_heat: 100.0,
                resin_volume_fraction: 0.4,
                resin_density: 1000.0,
                heat_of_reaction: 0.0,
            },
        };
        let constants = SimulationConstants {
            t_init: 20.0,
            alpha_init: 0.05,
            h_top: 100.0,
            h_bot: 100.0,
            l_t: 0.01,
            l_c: 0.01,
        };
        let coeff = ThermalCoefficients::new(&props, &constants).expect("valid manufactured problem");
        Manufactured {
            shape,
            problem: Problem {
                props,
                kinetics: CureKinetics::default(),
                constants,
                air: AirTemperature::Constant(AIR),
            },
            coeff,
        }
    }

    pub fn tool_exact(&self, x: f64, t: f64) -> f64 {
        20.0 + tool_profile(self.shape, x)[0] * tool_time(t)[0]
    }

    pub fn part_exact(&self, x: f64, t: f64) -> f64 {
        25.0 + part_profile(self.shape, x)[0] * part_time(t)[0]
    }

    fn tool_dx(&self, x: f64, t: f64) -> f64 {
        tool_profile(self.shape, x)[1] * tool_time(t)[0]
    }

    fn part_dx(&self, x: f64, t: f64) -> f64 {
        part_profile(self.shape, x)[1] * part_time(t)[0]
    }

    /// L∞ error over all nodes at the final time.
    pub fn final_error(&self, grid: &Grid1D) -> Result<f64> {
        let (sol, _) = solve_problem(&self.problem, grid, self)?;
        let k = sol.n_times() - 1;
        let t = sol.times[k];
        let mut err = 0.0_f64;
        for (i, x) in crate::field::FieldSolution::grid(grid.n_tool).into_iter().enumerate() {
            err = err.max((sol.t_tool[[k, i]] - self.tool_exact(x, t)).abs());
        }
        for (i, x) in crate::field::FieldSolution::grid(grid.n_part).into_iter().enumerate() {
            err = err.max((sol.t_part[[k, i]] - self.part_exact(x, t)).abs());
        }
        Ok(err)
    }
}

impl Forcing for Manufactured {
    fn tool_source(&self, x: f64, t: f64) -> f64 {
        let [f, _, f2] = tool_profile(self.shape, x);
        let [g, g1] = tool_time(t);
        f * g1 - self.coeff.tool_diffusion * f2 * g
    }

    fn part_source(&self, x: f64, t: f64) -> f64 {
        let [f, _, f2] = part_profile(self.shape, x);
        let [g, g1] = part_time(t);
        f * g1 - self.coeff.part_diffusion * f2 * g
    }

    fn bottom(&self, t: f64) -> f64 {
        self.tool_dx(0.0, t) - self.coeff.biot_bot * (self.tool_exact(0.0, t) - AIR)
    }

    fn top(&self, t: f64) -> f64 {
        self.part_dx(1.0, t) - self.coeff.biot_top * (AIR - self.part_exact(1.0, t))
    }

    fn value_jump(&self, t: f64) -> f64 {
        self.tool_exact(1.0, t) - self.part_exact(0.0, t)
    }

    fn flux_jump(&self, t: f64) -> f64 {
        self.coeff.tool_flux * self.tool_dx(1.0, t) - self.coeff.part_flux * self.part_dx(0.0, t)
    }

    fn initial_tool(&self, x: f64) -> Option<f64> {
        Some(self.tool_exact(x, 0.0))
    }

    fn initial_part(&self, x: f64) -> Option<f64> {
        Some(self.part_exact(x, 0.0))
    }
}

/// Observed orders `log2(e_k / e_{k+1})` between successive refinements.
pub fn observed_orders(errors: &[f64]) -> Vec<f64> {
    errors.windows(2).map(|w| (w[0] / w[1]).log2()).collect()
}

/// Errors on three grids that halve the spacing at a fixed small step.
pub fn spatial_study() -> Result<Vec<f64>> {
    let m = Manufactured::new(Shape::Smooth);
    [11, 21, 41]
        .into_iter()
        .map(|n| {
            m.final_error(&Grid1D {
                n_tool: n,
                n_part: n,
                dt: 1e-3,
                t_end: 4.0,
                save_every: 1000,
                kinetics_substeps: 1,
            })
        })
        .collect()
}

/// Errors for three halvings of the step on a field the stencils represent exactly.
pub fn temporal_study() -> Result<Vec<f64>> {
    let m = Manufactured::new(Shape::Quadratic);
    [0.4, 0.2, 0.1]
        .into_iter()
        .map(|dt| {
            m.final_error(&Grid1D {
                n_tool: 11,
                n_part: 11,
                dt,
                t_end: 8.0,
                save_every: 1000,
                kinetics_substeps: 1,
            })
        })
        .collect()
}
