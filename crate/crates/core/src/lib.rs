//! Physics-informed operator learning for the thermochemical cure of a
//! composite part on a tool in an autoclave.

pub mod autodiff;
pub mod config;
pub mod design;
pub mod eval;
mod error;
pub mod field;
pub mod losses;
pub mod operator;
pub mod par;
pub mod process;
pub mod solver;
pub mod train;
pub mod units;

pub use error::{Error, Result};
