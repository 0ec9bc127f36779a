use serde::{Deserialize, Serialize};

use crate::{Error, Result};

pub const BETA1: f64 = 0.9;
pub const BETA2: f64 = 0.999;
pub const EPSILON: f64 = 1e-8;

/// First and second moments for a list of parameter vectors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdamState {
    pub m: Vec<Vec<f64>>,
    pub v: Vec<Vec<f64>>,
    /// Number of updates applied so far.
    pub step: u64,
}

impl AdamState {
    pub fn new(lens: &[usize]) -> Self {
        AdamState {
            m: lens.iter().map(|&n| vec![0.0; n]).collect(),
            v: lens.iter().map(|&n| vec![0.0; n]).collect(),
            step: 0,
        }
    }

    pub fn lens(&self) -> Vec<usize> {
        self.m.iter().map(Vec::len).collect()
    }

    fn check(&self, lens: &[usize]) -> Result<()> {
        if self.m.len() != lens.len() || self.v.len() != lens.len() {
            return Err(Error::Dimension {
                expected: self.m.len(),
                got: lens.len(),
            });
        }
        for ((m, v), &n) in self.m.iter().zip(&self.v).zip(lens) {
            if m.len() != n || v.len() != n {
                return Err(Error::Dimension { expected: m.len(), got: n });
            }
        }
        Ok(())
    }
}

/// One bias-corrected Adam update applied in place.
///
/// Gradients are scanned for non-finite entries before anything is touched,
/// so a failed step leaves parameters and moments unchanged.
pub fn adam_step(params: &mut [&mut [f64]], grads: &[&[f64]], state: &mut AdamState, rate: f64) -> Result<()> {
    let lens: Vec<usize> = params.iter().map(|p| p.len()).collect();
    state.check(&lens)?;
    if grads.len() != lens.len() {
        return Err(Error::Dimension {
            expected: lens.len(),
            got: grads.len(),
        });
    }
    for (i, (g, &n)) in grads.iter().zip(&lens).enumerate() {
        if g.len() != n {
            return Err(Error::Dimension { expected: n, got: g.len() });
        }
        if let Some(j) = g.iter().position(|x| !x.is_finite()) {
            return Err(Error::Training(format!(
                "non-finite gradient {} in parameter vector {i} at index {j} (update {})",
                g[j],
                state.step + 1
            )));
        }
    }
    state.step += 1;
    let t = state.step as i32;
    let c1 = 1.0 - BETA1.powi(t);
    let c2 = 1.0 - BETA2.powi(t);
    for (i, p) in params.iter_mut().enumerate() {
        let (m, v, g) = (&mut state.m[i], &mut state.v[i], grads[i]);
        for j in 0..p.len() {
            m[j] = BETA1 * m[j] + (1.0 - BETA1) * g[j];
            v[j] = BETA2 * v[j] + (1.0 - BETA2) * g[j] * g[j];
            let mh = m[j] / c1;
            let vh = v[j] / c2;
            p[j] -= rate * mh / (vh.sqrt() + EPSILON);
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run(p: &mut Vec<f64>, g: &[f64], s: &mut AdamState, rate: f64) -> Result<()> {
        adam_step(&mut [p.as_mut_slice()], &[g], s, rate)
    }

    #[test]
    fn zero_gradient_leaves_parameters() {
        let mut p = vec![1.5, -2.0];
        let mut s = AdamState::new(&[2]);
        run(&mut p, &[0.0, 0.0], &mut s, 1e-3).unwrap();
        assert_eq!(p, vec![1.5, -2.0]);
        assert_eq!(s.step, 1);
    }

    #[test]
    fn first_step_moves_by_rate() {
        let mut p = vec![0.0];
        let mut s = AdamState::new(&[1]);
        run(&mut p, &[1.0], &mut s, 1e-3).unwrap();
        assert!((p[0] + 1e-3).abs() < 1e-10);
    }

    #[test]
    fn three_steps_match_hand_computation() {
        // g = 1, 2, -1 with rate 0.1, starting at 1.
        // m = .1, .29, .161 and v = .001, .004999, .005994001;
        // bias corrections divide by .1, .19, .271 and .001, .001999, .002997001.
        let mut p = vec![1.0];
        let mut s = AdamState::new(&[1]);
        let mut want = 1.0;
        let seq = [
            (1.0_f64, 1.0_f64),
            (0.29 / 0.19, 0.004999 / 0.001999),
            (0.161 / 0.271, 0.005994001 / 0.002997001),
        ];
        for (g, (mh, vh)) in [1.0, 2.0, -1.0].into_iter().zip(seq) {
            run(&mut p, &[g], &mut s, 0.1).unwrap();
            want -= 0.1 * mh / (f64::sqrt(vh) + 1e-8);
            assert!((p[0] - want).abs() < 1e-14, "{} vs {want}", p[0]);
        }
        assert!((p[0] - 0.761_472_868_968).abs() < 1e-11);
    }

    #[test]
    fn non_finite_gradient_aborts_untouched() {
        let mut p = vec![1.0, 2.0];
        let mut s = AdamState::new(&[2]);
        let before = (p.clone(), s.clone());
        let e = run(&mut p, &[0.5, f64::NAN], &mut s, 1e-3).unwrap_err();
        assert!(e.to_string().contains("index 1"));
        assert_eq!((p, s), before);
    }

    #[test]
    fn shape_mismatch_is_rejected() {
        let mut p = vec![1.0];
        let mut s = AdamState::new(&[2]);
        assert!(run(&mut p, &[0.0], &mut s, 1e-3).is_err());
    }
}
