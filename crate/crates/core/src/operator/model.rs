use ndarray::{Array2, ArrayView2};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{OperatorConfig, Partition};
use crate::autodiff::{Jet2, MlpParams};
use crate::design::{SensorizedInput, N_SCALARS, N_SENSORS};
use crate::process::{COORD_T, COORD_X};
use crate::{Error, Result};

/// Affine map from the normalized network output to physical units.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OutputScaling {
    pub offset: f64,
    pub scale: f64,
}

impl OutputScaling {
    pub const IDENTITY: OutputScaling = OutputScaling { offset: 0.0, scale: 1.0 };

    pub fn to_physical(&self, y: f64) -> f64 {
        self.offset + self.scale * y
    }

    pub fn to_normalized(&self, v: f64) -> f64 {
        (v - self.offset) / self.scale
    }
}

/// Elementwise product of the two branch outputs.
pub fn branch_merge(b1: &[f64], b2: &[f64]) -> Result<Vec<f64>> {
    if b1.len() != b2.len() {
        return Err(Error::Dimension {
            expected: b1.len(),
            got: b2.len(),
        });
    }
    Ok(b1.iter().zip(b2).map(|(a, b)| a * b).collect())
}

/// Two-branch operator network with one decoder per temporal subdomain.
#[derive(Debug, Clone, PartialEq)]
pub struct DeepONetModel {
    pub config: OperatorConfig,
    pub partition: Partition,
    pub bn1: MlpParams,
    pub bn2: MlpParams,
    pub trunk: MlpParams,
    pub decoders: Vec<MlpParams>,
    pub scaling: OutputScaling,
}

fn linear_decoder(q: usize) -> Result<MlpParams> {
    let mut d = MlpParams::zeros(&[q, 1])?;
    d.weight_mut(0).fill(1.0);
    Ok(d)
}

impl DeepONetModel {
    /// Glorot-uniform weights and zero biases, reproducible per seed.
    pub fn init(config: &OperatorConfig, scaling: OutputScaling, seed: u64) -> Result<Self> {
        config.validate()?;
        let partition = config.partition()?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let q = config.q;
        let bn1 = MlpParams::glorot(&config.branch_scalar.sizes(N_SCALARS, q), &mut rng)?;
        let bn2 = MlpParams::glorot(&config.branch_cycle.sizes(N_SENSORS, q), &mut rng)?;
        let trunk = MlpParams::glorot(&config.trunk.sizes(2, q), &mut rng)?;
        let decoders = (0..partition.len())
            .map(|_| {
                if config.linear_decoder {
                    linear_decoder(q)
                } else {
                    MlpParams::glorot(&config.decoder.sizes(q, 1), &mut rng)
                }
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(DeepONetModel {
            config: config.clone(),
            partition,
            bn1,
            bn2,
            trunk,
            decoders,
            scaling,
        })
    }

    /// Builds a model from decoders paired with their subdomains, in any order.
    pub fn from_pieces(
        config: &OperatorConfig,
        bn1: MlpParams,
        bn2: MlpParams,
        trunk: MlpParams,
        mut pieces: Vec<((f64, f64), MlpParams)>,
        scaling: OutputScaling,
    ) -> Result<Self> {
        pieces.sort_by(|a, b| a.0 .0.total_cmp(&b.0 .0));
        let mut boundaries = vec![pieces.first().ok_or_else(|| Error::config("no decoders"))?.0 .0];
        for w in pieces.windows(2) {
            if w[0].0 .1 != w[1].0 .0 {
                return Err(Error::config("decoder intervals must tile [0, 1]"));
            }
        }
        boundaries.extend(pieces.iter().map(|p| p.0 .1));
        let mut config = config.clone();
        config.boundaries = boundaries;
        let model = DeepONetModel {
            partition: config.partition()?,
            config,
            bn1,
            bn2,
            trunk,
            decoders: pieces.into_iter().map(|p| p.1).collect(),
            scaling,
        };
        model.validate()?;
        Ok(model)
    }

    pub fn validate(&self) -> Result<()> {
        let q = self.config.q;
        let checks = [
            (self.bn1.n_inputs(), N_SCALARS),
            (self.bn2.n_inputs(), N_SENSORS),
            (self.trunk.n_inputs(), 2),
            (self.bn1.n_outputs(), q),
            (self.bn2.n_outputs(), q),
            (self.trunk.n_outputs(), q),
            (self.decoders.len(), self.partition.len()),
        ];
        for (got, expected) in checks {
            if got != expected {
                return Err(Error::Dimension { expected, got });
            }
        }
        for d in &self.decoders {
            if d.n_inputs() != q || d.n_outputs() != 1 {
                return Err(Error::Dimension {
                    expected: q,
                    got: d.n_inputs(),
                });
            }
        }
        Ok(())
    }

    /// Networks in a fixed order: scalar branch, cycle branch, trunk, decoders.
    pub fn nets(&self) -> Vec<&MlpParams> {
        let mut v = vec![&self.bn1, &self.bn2, &self.trunk];
        v.extend(self.decoders.iter());
        v
    }

    pub fn nets_mut(&mut self) -> Vec<&mut MlpParams> {
        let mut v = vec![&mut self.bn1, &mut self.bn2, &mut self.trunk];
        v.extend(self.decoders.iter_mut());
        v
    }

    pub fn n_params(&self) -> usize {
        self.nets().iter().map(|n| n.n_params()).sum()
    }

    pub fn is_finite(&self) -> bool {
        self.nets().iter().all(|n| n.is_finite())
    }

    /// Merged branch vector; depends only on the input functions.
    pub fn branch(&self, u: &SensorizedInput) -> Result<Vec<f64>> {
        let b1 = self.bn1.forward(&u.bn1)?;
        let b2 = self.bn2.forward(&u.bn2)?;
        branch_merge(&b1, &b2)
    }

    fn check_tau(tau: f64) -> Result<()> {
        if !(0.0..=1.0).contains(&tau) {
            return Err(Error::domain(format!("normalized time {tau} outside [0, 1]")));
        }
        Ok(())
    }

    /// Output of decoder `k` at `(x, τ)`, whether or not `τ` lies in subdomain `k`.
    pub fn decoder_output(&self, branch: &[f64], x: f64, tau: f64, k: usize) -> Result<f64> {
        let t = self.trunk.forward(&[x, tau])?;
        let z = branch_merge(branch, &t)?;
        Ok(self.decoders[k].forward(&z)?[0])
    }

    /// Normalized output from a precomputed branch vector.
    pub fn predict_with_branch(&self, branch: &[f64], x: f64, tau: f64) -> Result<f64> {
        Self::check_tau(tau)?;
        self.decoder_output(branch, x, tau, self.partition.subdomain_index(tau))
    }

    /// Normalized output at local coordinate `x` and normalized time `τ`.
    pub fn predict(&self, u: &SensorizedInput, x: f64, tau: f64) -> Result<f64> {
        Self::check_tau(tau)?;
        self.predict_with_branch(&self.branch(u)?, x, tau)
    }

    /// Normalized output with derivatives along `(x, τ)`, indexed by
    /// [`COORD_X`] and [`COORD_T`].
    pub fn predict_jet(&self, branch: &[f64], x: f64, tau: f64) -> Result<Jet2> {
        Self::check_tau(tau)?;
        let mut coords = [0.0; 2];
        coords[COORD_X] = x;
        coords[COORD_T] = tau;
        let t = self.trunk.forward_jet(&coords, &[0, 1])?;
        if t.len() != branch.len() {
            return Err(Error::Dimension {
                expected: t.len(),
                got: branch.len(),
            });
        }
        let z: Vec<Jet2> = t.iter().zip(branch).map(|(j, b)| j.scale(*b)).collect();
        let k = self.partition.subdomain_index(tau);
        Ok(self.decoders[k].forward_jets(&z)?.remove(0))
    }

    /// Normalized outputs for coordinates stored column-wise as `(x, τ)`.
    pub fn predict_batch(&self, branch: &[f64], coords: ArrayView2<'_, f64>) -> Result<Vec<f64>> {
        if coords.nrows() != 2 {
            return Err(Error::Dimension {
                expected: 2,
                got: coords.nrows(),
            });
        }
        if let Some(bad) = coords.row(1).iter().find(|t| !(0.0..=1.0).contains(*t)) {
            return Err(Error::domain(format!("normalized time {bad} outside [0, 1]")));
        }
        let mut feats = self.trunk.forward_batch(coords)?;
        for (mut row, b) in feats.rows_mut().into_iter().zip(branch) {
            row.mapv_inplace(|v| v * b);
        }
        let n = coords.ncols();
        let mut out = vec![0.0; n];
        let mut groups: Vec<Vec<usize>> = vec![Vec::new(); self.partition.len()];
        for j in 0..n {
            groups[self.partition.subdomain_index(coords[[1, j]])].push(j);
        }
        for (k, cols) in groups.iter().enumerate() {
            if cols.is_empty() {
                continue;
            }
            let sub = Array2::from_shape_fn((feats.nrows(), cols.len()), |(r, c)| feats[[r, cols[c]]]);
            let y = self.decoders[k].forward_batch(sub.view())?;
            for (c, &j) in cols.iter().enumerate() {
                out[j] = y[[0, c]];
            }
        }
        Ok(out)
    }

    /// Largest disagreement of adjacent decoders at the interior boundaries,
    /// in normalized output units, over `n_x` equally spaced coordinates.
    pub fn interface_mismatch(&self, u: &SensorizedInput, n_x: usize) -> Result<f64> {
        let b = self.branch(u)?;
        let mut worst = 0.0_f64;
        for (i, &tau) in self.partition.interfaces().iter().enumerate() {
            for j in 0..n_x {
                let x = j as f64 / (n_x.max(2) - 1) as f64;
                let left = self.decoder_output(&b, x, tau, i)?;
                let right = self.decoder_output(&b, x, tau, i + 1)?;
                worst = worst.max((left - right).abs());
            }
        }
        Ok(worst)
    }
}
