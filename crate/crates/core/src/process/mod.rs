//! Thermochemical process model: material data, cure kinetics, the autoclave
//! cure cycle and residuals of the governing equations.

mod cycle;
mod kinetics;
mod materials;
mod residuals;

pub use cycle::CureCycle;
pub use kinetics::{CureKinetics, ALPHA_GUARD};
pub use materials::{CompositeMaterial, MaterialProps, PropertyFile, ToolMaterial, PROPERTY_SCHEMA_VERSION};
pub use residuals::{
    bc_residuals, continuity_residuals, pde_residual_part, pde_residual_tool, SimulationConstants,
    ThermalCoefficients, ALPHA_INIT, COORD_T, COORD_X, T_INIT,
};
