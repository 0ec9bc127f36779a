//! Space-time fields of the two materials on uniform local grids.

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::design::DesignPoint;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FieldKind {
    ToolTemperature,
    PartTemperature,
    DegreeOfCure,
}

/// Location and value of the maximum part temperature.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Exotherm {
    pub temperature: f64,
    pub time: f64,
    pub x: f64,
}

/// Temperatures (°C) and degree of cure on `times × nodes`, nodes uniform on `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldSolution {
    pub times: Vec<f64>,
    pub t_tool: Array2<f64>,
    pub t_part: Array2<f64>,
    pub alpha: Array2<f64>,
    pub design: Option<DesignPoint>,
}

/// Index and weight of `v` on a sorted axis; snaps to nodes within rounding.
fn locate(axis_len: usize, pos: f64) -> (usize, f64) {
    let last = axis_len - 1;
    let nearest = pos.round();
    if (pos - nearest).abs() < 1e-9 {
        return ((nearest as usize).min(last), 0.0);
    }
    let i = (pos.floor() as usize).min(last.saturating_sub(1));
    (i, pos - i as f64)
}

impl FieldSolution {
    pub fn n_times(&self) -> usize {
        self.times.len()
    }

    pub fn n_tool(&self) -> usize {
        self.t_tool.ncols()
    }

    pub fn n_part(&self) -> usize {
        self.t_part.ncols()
    }

    pub fn t_end(&self) -> f64 {
        *self.times.last().unwrap_or(&0.0)
    }

    pub fn grid(n: usize) -> Vec<f64> {
        (0..n).map(|i| i as f64 / (n - 1) as f64).collect()
    }

    pub fn field(&self, kind: FieldKind) -> &Array2<f64> {
        match kind {
            FieldKind::ToolTemperature => &self.t_tool,
            FieldKind::PartTemperature => &self.t_part,
            FieldKind::DegreeOfCure => &self.alpha,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let nt = self.times.len();
        if nt == 0 {
            return Err(Error::domain("empty field solution"));
        }
        if self.times.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::domain("field times must be strictly increasing"));
        }
        for (name, f) in [("T_tool", &self.t_tool), ("T_part", &self.t_part), ("alpha", &self.alpha)] {
            if f.nrows() != nt || f.ncols() < 2 {
                return Err(Error::Dimension {
                    expected: nt,
                    got: f.nrows(),
                });
            }
            if f.iter().any(|v| !v.is_finite()) {
                return Err(Error::domain(format!("{name} contains non-finite values")));
            }
        }
        if self.alpha.ncols() != self.t_part.ncols() {
            return Err(Error::Dimension {
                expected: self.t_part.ncols(),
                got: self.alpha.ncols(),
            });
        }
        Ok(())
    }

    /// Maximum part temperature. Ties go to the earliest time, then the smallest x.
    pub fn exotherm(&self) -> Result<Exotherm> {
        if self.times.is_empty() || self.t_part.ncols() == 0 {
            return Err(Error::domain("exotherm of an empty solution"));
        }
        let n = self.t_part.ncols();
        let mut best = (f64::NEG_INFINITY, 0, 0);
        for (k, row) in self.t_part.rows().into_iter().enumerate() {
            for (i, &v) in row.iter().enumerate() {
                if v > best.0 {
                    best = (v, k, i);
                }
            }
        }
        Ok(Exotherm {
            temperature: best.0,
            time: self.times[best.1],
            x: best.2 as f64 / (n - 1).max(1) as f64,
        })
    }

    /// Bilinear interpolation of a field at local coordinate `x` and time `t` (s).
    pub fn probe(&self, x: f64, t: f64, kind: FieldKind) -> Result<f64> {
        if !(0.0..=1.0).contains(&x) {
            return Err(Error::domain(format!("probe coordinate {x} outside [0, 1]")));
        }
        let (t0, t1) = (self.times[0], self.t_end());
        if !(t >= t0 && t <= t1) {
            return Err(Error::domain(format!("probe time {t} outside [{t0}, {t1}]")));
        }
        let f = self.field(kind);
        let (i, wx) = locate(f.ncols(), x * (f.ncols() - 1) as f64);
        let k = match self.times.binary_search_by(|v| v.total_cmp(&t)) {
            Ok(k) => k,
            Err(k) => k - 1,
        };
        let (k, wt) = if k + 1 >= self.times.len() || self.times[k] == t {
            (k, 0.0)
        } else {
            (k, (t - self.times[k]) / (self.times[k + 1] - self.times[k]))
        };
        let at = |kk: usize| {
            let a = f[[kk, i]];
            if wx == 0.0 {
                a
            } else {
                (1.0 - wx) * a + wx * f[[kk, i + 1]]
            }
        };
        let lo = at(k);
        Ok(if wt == 0.0 { lo } else { (1.0 - wt) * lo + wt * at(k + 1) })
    }

    /// Time series of a field at a local coordinate on the stored times.
    pub fn trace(&self, x: f64, kind: FieldKind) -> Result<Vec<f64>> {
        self.times.iter().map(|&t| self.probe(x, t, kind)).collect()
    }

    /// Largest per-node decrease of the degree of cure between stored times.
    pub fn max_alpha_decrease(&self) -> f64 {
        let mut worst = 0.0_f64;
        for k in 1..self.alpha.nrows() {
            for i in 0..self.alpha.ncols() {
                worst = worst.max(self.alpha[[k - 1, i]] - self.alpha[[k, i]]);
            }
        }
        worst
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn linear_field() -> FieldSolution {
        let times = vec![0.0, 10.0, 20.0];
        let n = 5;
        let t_part = Array2::from_shape_fn((3, n), |(k, i)| 20.0 + 10.0 * i as f64 / 4.0 + k as f64);
        FieldSolution {
            times,
            t_tool: t_part.clone(),
            alpha: Array2::from_elem((3, n), 0.05),
            t_part,
            design: None,
        }
    }

    #[test]
    fn probe_at_nodes_returns_stored_values() {
        let f = linear_field();
        for k in 0..3 {
            for i in 0..5 {
                let x = i as f64 / 4.0;
                assert_eq!(f.probe(x, f.times[k], FieldKind::PartTemperature).unwrap(), f.t_part[[k, i]]);
            }
        }
    }

    #[test]
    fn probe_between_nodes_is_the_mean() {
        let f = linear_field();
        let v = f.probe(0.125, 10.0, FieldKind::PartTemperature).unwrap();
        assert!((v - 0.5 * (f.t_part[[1, 0]] + f.t_part[[1, 1]])).abs() < 1e-12);
        assert!(f.probe(1.5, 0.0, FieldKind::PartTemperature).is_err());
        assert!(f.probe(0.5, 30.0, FieldKind::PartTemperature).is_err());
    }

    #[test]
    fn exotherm_finds_spike_and_breaks_ties_early() {
        let mut f = linear_field();
        f.t_part.fill(20.0);
        f.t_part[[1, 3]] = 99.0;
        f.t_part[[2, 1]] = 99.0;
        let e = f.exotherm().unwrap();
        assert_eq!((e.temperature, e.time, e.x), (99.0, 10.0, 0.75));
        f.t_part[[1, 2]] = 99.0;
        assert_eq!(f.exotherm().unwrap().x, 0.5);
    }
}
