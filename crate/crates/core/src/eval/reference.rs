//! Reference solutions with an on-disk cache.
//!
//! Entries are keyed by a SHA-256 of the design and grid. Each entry is a
//! solution CSV plus a run manifest holding the hash of the material data it
//! was computed with; an entry whose manifest does not match is recomputed.

use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};

use crate::config::SolverSection;
use crate::design::DesignPoint;
use crate::field::FieldSolution;
use crate::losses::Physics;
use crate::solver::{read_solution_csv, solve_problem, write_solution_csv, NoForcing, Problem, RunManifest};
use crate::{Error, Result};

#[derive(Debug, Clone)]
pub struct ReferenceSolver {
    pub physics: Physics,
    pub solver: SolverSection,
    pub cool_down: bool,
    pub cache_dir: Option<PathBuf>,
}

/// Hash of the material and kinetics data actually used by a solve.
pub fn physics_hash(p: &Physics) -> String {
    let mut h = Sha256::new();
    h.update(serde_json::to_vec(&p.props).expect("serializable"));
    h.update(serde_json::to_vec(&p.kinetics).expect("serializable"));
    hex::encode(h.finalize())
}

impl ReferenceSolver {
    fn key(&self, d: &DesignPoint) -> String {
        let grid = self.solver.grid(d.cycle(self.cool_down).duration());
        let mut h = Sha256::new();
        for v in d.to_array() {
            h.update(v.to_le_bytes());
        }
        h.update(serde_json::to_vec(&grid).expect("serializable"));
        h.update([u8::from(self.cool_down)]);
        hex::encode(h.finalize())
    }

    /// Solves without touching the cache.
    pub fn compute(&self, d: &DesignPoint) -> Result<FieldSolution> {
        let problem = Problem::for_design(d, &self.physics.props, &self.physics.kinetics, self.cool_down);
        let grid = self.solver.grid(d.cycle(self.cool_down).duration());
        let (mut sol, _) = solve_problem(&problem, &grid, &NoForcing)?;
        sol.design = Some(*d);
        Ok(sol)
    }

    fn cached(&self, dir: &Path, key: &str, hash: &str, d: &DesignPoint) -> Option<FieldSolution> {
        let manifest = dir.join(format!("{key}.json"));
        let csv = dir.join(format!("{key}.csv"));
        if !manifest.exists() {
            return None;
        }
        let m = match RunManifest::load(&manifest) {
            Ok(m) => m,
            Err(e) => {
                log::warn!("unreadable cache manifest {}: {e}; recomputing", manifest.display());
                return None;
            }
        };
        if m.property_hash != hash {
            log::warn!("property hash mismatch for cached reference {key}; recomputing");
            return None;
        }
        match read_solution_csv(&csv) {
            Ok(mut s) => {
                s.design = Some(*d);
                Some(s)
            }
            Err(e) => {
                log::warn!("unreadable cached reference {}: {e}; recomputing", csv.display());
                None
            }
        }
    }

    /// Cached solve; a missing, stale or unreadable entry is recomputed and rewritten.
    pub fn solve(&self, d: &DesignPoint) -> Result<FieldSolution> {
        let Some(dir) = &self.cache_dir else {
            return self.compute(d);
        };
        let key = self.key(d);
        let hash = physics_hash(&self.physics);
        if let Some(s) = self.cached(dir, &key, &hash, d) {
            return Ok(s);
        }
        let sol = self.compute(d)?;
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let grid = self.solver.grid(d.cycle(self.cool_down).duration());
        let tmp = dir.join(format!("{key}.csv.tmp"));
        write_solution_csv(&tmp, &sol)?;
        let csv = dir.join(format!("{key}.csv"));
        std::fs::rename(&tmp, &csv).map_err(|e| Error::io(&csv, e))?;
        RunManifest::new(Some(*d), &grid, &hash, None).save(dir.join(format!("{key}.json")))?;
        Ok(sol)
    }
}
