//! Solution CSV and run manifest.

use std::path::Path;

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use super::{Grid1D, SolveReport};
use crate::design::DesignPoint;
use crate::field::FieldSolution;
use crate::{Error, Result};

pub const SOLUTION_CSV_HEADER: [&str; 5] = ["time_s", "x_local", "material", "T_C", "alpha"];

/// Long-format export: one row per stored time and node. Tool rows leave
/// `alpha` empty.
pub fn write_solution_csv(path: impl AsRef<Path>, sol: &FieldSolution) -> Result<()> {
    let path = path.as_ref();
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(SOLUTION_CSV_HEADER)?;
    let (xt, xp) = (FieldSolution::grid(sol.n_tool()), FieldSolution::grid(sol.n_part()));
    for (k, t) in sol.times.iter().enumerate() {
        let ts = t.to_string();
        for (i, x) in xt.iter().enumerate() {
            w.write_record([ts.as_str(), &x.to_string(), "tool", &sol.t_tool[[k, i]].to_string(), ""])?;
        }
        for (i, x) in xp.iter().enumerate() {
            w.write_record([
                ts.as_str(),
                &x.to_string(),
                "part",
                &sol.t_part[[k, i]].to_string(),
                &sol.alpha[[k, i]].to_string(),
            ])?;
        }
    }
    w.flush().map_err(|e| Error::io(path, e))?;
    Ok(())
}

/// Reads a file written by [`write_solution_csv`].
pub fn read_solution_csv(path: impl AsRef<Path>) -> Result<FieldSolution> {
    let path = path.as_ref();
    let err = |message: String| Error::Parse {
        path: path.to_path_buf(),
        message,
    };
    let mut r = csv::Reader::from_path(path)?;
    if r.headers()?.iter().ne(SOLUTION_CSV_HEADER) {
        return Err(err("unexpected solution header".into()));
    }
    let num = |s: &str, what: &str| s.parse::<f64>().map_err(|e| err(format!("{what}: {e}")));
    let mut times: Vec<f64> = Vec::new();
    let (mut tool, mut part, mut alpha) = (Vec::new(), Vec::new(), Vec::new());
    let (mut nt, mut np) = (0usize, 0usize);
    for rec in r.records() {
        let rec = rec?;
        let t = num(&rec[0], "time_s")?;
        if times.last() != Some(&t) {
            times.push(t);
        }
        let first_block = times.len() == 1;
        match &rec[2] {
            "tool" => {
                tool.push(num(&rec[3], "T_C")?);
                nt += usize::from(first_block);
            }
            "part" => {
                part.push(num(&rec[3], "T_C")?);
                alpha.push(num(&rec[4], "alpha")?);
                np += usize::from(first_block);
            }
            other => return Err(err(format!("unknown material {other:?}"))),
        }
    }
    let n = times.len();
    let shape_err = |_| err("ragged solution table".into());
    Ok(FieldSolution {
        times,
        t_tool: Array2::from_shape_vec((n, nt), tool).map_err(shape_err)?,
        t_part: Array2::from_shape_vec((n, np), part).map_err(shape_err)?,
        alpha: Array2::from_shape_vec((n, np), alpha).map_err(shape_err)?,
        design: None,
    })
}

/// Provenance record written next to every exported solution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub design: Option<DesignPoint>,
    pub grid: Grid1D,
    pub property_hash: String,
    pub code_version: String,
    pub report: Option<SolveReport>,
}

impl RunManifest {
    pub fn new(design: Option<DesignPoint>, grid: &Grid1D, property_hash: &str, report: Option<SolveReport>) -> Self {
        RunManifest {
            design,
            grid: grid.clone(),
            property_hash: property_hash.to_string(),
            code_version: env!("CARGO_PKG_VERSION").to_string(),
            report,
        }
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let text = serde_json::to_string_pretty(self)?;
        std::fs::write(path, text + "\n").map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Ok(serde_json::from_str(&text)?)
    }
}
