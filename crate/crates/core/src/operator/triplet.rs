use ndarray::Array2;
use serde::{Deserialize, Serialize};

use super::{DeepONetModel, OperatorConfig, OutputScaling};
use crate::design::{DesignPoint, DesignSpace, SensorizedInput};
use crate::field::FieldSolution;
use crate::process::{ALPHA_INIT, T_INIT};
use crate::{Error, Result};

/// Headroom above the hottest hold used for temperature normalization, °C.
pub const TEMPERATURE_HEADROOM: f64 = 50.0;

/// Scales shared by all three operators.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Normalization {
    pub space: DesignSpace,
    /// Global time horizon, s.
    pub horizon: f64,
    pub cool_down: bool,
    /// Temperatures map as `(T − t0) / (t_ref − t0)`.
    pub t0: f64,
    pub t_ref: f64,
}

impl Normalization {
    pub fn new(space: &DesignSpace, cool_down: bool) -> Self {
        Normalization {
            space: space.clone(),
            horizon: space.horizon(cool_down),
            cool_down,
            t0: T_INIT,
            t_ref: space.max_hold_temperature() + TEMPERATURE_HEADROOM,
        }
    }

    pub fn delta_t(&self) -> f64 {
        self.t_ref - self.t0
    }

    pub fn temperature_scaling(&self) -> OutputScaling {
        OutputScaling {
            offset: self.t0,
            scale: self.delta_t(),
        }
    }

    pub fn encode(&self, d: &DesignPoint) -> Result<SensorizedInput> {
        self.space.encode(d, self.horizon, self.cool_down)
    }

    /// Normalized air temperature `(Ta − t0)/(t_ref − t0)` at `τ`.
    pub fn air(&self, d: &DesignPoint, tau: f64) -> f64 {
        (d.cycle(self.cool_down).air_temperature(tau * self.horizon) - self.t0) / self.delta_t()
    }
}

/// Three independent operators: tool temperature, part temperature, degree of cure.
#[derive(Debug, Clone, PartialEq)]
pub struct OperatorTriplet {
    pub tool: DeepONetModel,
    pub part: DeepONetModel,
    pub alpha: DeepONetModel,
    pub norm: Normalization,
}

/// Seed of the `k`-th member, decorrelated from the base seed.
pub(crate) fn member_seed(seed: u64, k: u64) -> u64 {
    seed.wrapping_mul(0x9E37_79B9_7F4A_7C15).wrapping_add(k.wrapping_mul(0xD1B5_4A32_D192_ED03))
}

impl OperatorTriplet {
    pub fn init(config: &OperatorConfig, norm: Normalization, seed: u64) -> Result<Self> {
        let ts = norm.temperature_scaling();
        let mut alpha = DeepONetModel::init(config, OutputScaling::IDENTITY, member_seed(seed, 2))?;
        // Start the cure operator at the initial degree of cure rather than at
        // zero, where the autocatalytic rate vanishes and α ≡ 0 satisfies the ODE.
        for d in alpha.decoders.iter_mut() {
            let last = d.n_layers() - 1;
            d.bias_mut(last).fill(ALPHA_INIT);
        }
        Ok(OperatorTriplet {
            tool: DeepONetModel::init(config, ts, member_seed(seed, 0))?,
            part: DeepONetModel::init(config, ts, member_seed(seed, 1))?,
            alpha,
            norm,
        })
    }

    pub fn validate(&self) -> Result<()> {
        for m in [&self.tool, &self.part, &self.alpha] {
            m.validate()?;
        }
        if self.tool.partition != self.part.partition || self.part.partition != self.alpha.partition {
            return Err(Error::config("the three operators must share one temporal partition"));
        }
        Ok(())
    }

    pub fn models(&self) -> [&DeepONetModel; 3] {
        [&self.tool, &self.part, &self.alpha]
    }

    /// Dense prediction on uniform local grids at the given times (s).
    ///
    /// Returns the field and the number of degree-of-cure values clamped into `[0, 1]`.
    pub fn predict_field(&self, d: &DesignPoint, times: &[f64], n_tool: usize, n_part: usize) -> Result<(FieldSolution, usize)> {
        if n_tool < 2 || n_part < 2 || times.is_empty() {
            return Err(Error::domain("prediction grid needs two nodes per material and one time"));
        }
        let u = self.norm.encode(d)?;
        let h = self.norm.horizon;
        let coords = |n: usize| {
            let xs = FieldSolution::grid(n);
            Array2::from_shape_fn((2, n * times.len()), |(r, c)| {
                if r == 0 {
                    xs[c % n]
                } else {
                    (times[c / n] / h).clamp(0.0, 1.0)
                }
            })
        };
        let run = |m: &DeepONetModel, n: usize| -> Result<Array2<f64>> {
            let b = m.branch(&u)?;
            let y = m.predict_batch(&b, coords(n).view())?;
            Ok(Array2::from_shape_vec((times.len(), n), y.into_iter().map(|v| m.scaling.to_physical(v)).collect())
                .expect("shape"))
        };
        let t_tool = run(&self.tool, n_tool)?;
        let t_part = run(&self.part, n_part)?;
        let mut alpha = run(&self.alpha, n_part)?;
        let mut clamped = 0;
        alpha.mapv_inplace(|a| {
            if (0.0..=1.0).contains(&a) {
                a
            } else {
                clamped += 1;
                a.clamp(0.0, 1.0)
            }
        });
        if clamped > 0 {
            log::debug!("clamped {clamped} degree-of-cure predictions into [0, 1]");
        }
        Ok((
            FieldSolution {
                times: times.to_vec(),
                t_tool,
                t_part,
                alpha,
                design: Some(*d),
            },
            clamped,
        ))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::FieldKind;
    use crate::operator::{uniform_boundaries, NetArch};

    fn triplet() -> OperatorTriplet {
        let cfg = OperatorConfig::uniform(
            5,
            NetArch {
                hidden_layers: 1,
                width: 6,
            },
            uniform_boundaries(2),
        );
        OperatorTriplet::init(&cfg, Normalization::new(&DesignSpace::small(), false), 12).unwrap()
    }

    #[test]
    fn members_share_no_parameters() {
        let t = triplet();
        assert_ne!(t.tool.trunk, t.part.trunk);
        assert_ne!(t.part.trunk, t.alpha.trunk);
        t.validate().unwrap();
    }

    #[test]
    fn field_matches_pointwise_predictions() {
        let t = triplet();
        let d = t.norm.space.midpoint();
        let times: Vec<f64> = (0..5).map(|i| t.norm.horizon * i as f64 / 4.0).collect();
        let (f, _) = t.predict_field(&d, &times, 4, 3).unwrap();
        let u = t.norm.encode(&d).unwrap();
        for (k, &time) in times.iter().enumerate() {
            for i in 0..3 {
                let x = i as f64 / 2.0;
                let want = t.part.scaling.to_physical(t.part.predict(&u, x, time / t.norm.horizon).unwrap());
                assert!((f.probe(x, time, FieldKind::PartTemperature).unwrap() - want).abs() < 1e-10);
                assert!((f.t_part[[k, i]] - want).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn cure_operator_starts_at_initial_degree_of_cure() {
        let t = triplet();
        for d in &t.alpha.decoders {
            assert!(d.bias(d.n_layers() - 1).iter().all(|&b| b == ALPHA_INIT));
        }
        for d in &t.tool.decoders {
            assert!(d.bias(d.n_layers() - 1).iter().all(|&b| b == 0.0));
        }
    }

    #[test]
    fn zero_decoders_give_reference_state() {
        let mut t = triplet();
        for m in [&mut t.tool, &mut t.part, &mut t.alpha] {
            for d in m.decoders.iter_mut() {
                d.data_mut().fill(0.0);
            }
        }
        let d = t.norm.space.midpoint();
        let (f, clamped) = t.predict_field(&d, &[0.0, 100.0], 3, 3).unwrap();
        assert!(f.t_tool.iter().chain(f.t_part.iter()).all(|&v| v == T_INIT));
        assert!(f.alpha.iter().all(|&a| a == 0.0));
        assert_eq!(clamped, 0);
    }
}
