use serde::{Deserialize, Serialize};

use crate::autodiff::{layer_sizes, DEFAULT_HIDDEN_LAYERS, DEFAULT_WIDTH};
use crate::{Error, Result};

/// Hidden-layer shape of one fully connected tanh network.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct NetArch {
    pub hidden_layers: usize,
    pub width: usize,
}

impl Default for NetArch {
    fn default() -> Self {
        NetArch {
            hidden_layers: DEFAULT_HIDDEN_LAYERS,
            width: DEFAULT_WIDTH,
        }
    }
}

impl NetArch {
    pub fn sizes(&self, n_in: usize, n_out: usize) -> Vec<usize> {
        layer_sizes(n_in, self.hidden_layers, self.width, n_out)
    }
}

/// Default temporal subdomain boundaries, denser where cure accelerates.
pub const DEFAULT_BOUNDARIES: [f64; 8] = [0.0, 0.25, 0.40, 0.48, 0.56, 0.64, 0.80, 1.0];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OperatorConfig {
    /// Latent width shared by branch, trunk and decoder input.
    pub q: usize,
    /// Network on the four time-invariant scalars.
    pub branch_scalar: NetArch,
    /// Network on the sampled air-temperature profile.
    pub branch_cycle: NetArch,
    pub trunk: NetArch,
    pub decoder: NetArch,
    /// Subdomain boundaries in normalized time, `0 = b_0 < … < b_N = 1`.
    pub boundaries: Vec<f64>,
    /// Replace each decoder by a trainable weighted sum of the latent features.
    #[serde(default)]
    pub linear_decoder: bool,
}

impl Default for OperatorConfig {
    fn default() -> Self {
        OperatorConfig {
            q: DEFAULT_WIDTH,
            branch_scalar: NetArch::default(),
            branch_cycle: NetArch::default(),
            trunk: NetArch::default(),
            decoder: NetArch::default(),
            boundaries: DEFAULT_BOUNDARIES.to_vec(),
            linear_decoder: false,
        }
    }
}

impl OperatorConfig {
    /// Same width and depth for every network.
    pub fn uniform(q: usize, arch: NetArch, boundaries: Vec<f64>) -> Self {
        OperatorConfig {
            q,
            branch_scalar: arch,
            branch_cycle: arch,
            trunk: arch,
            decoder: arch,
            boundaries,
            linear_decoder: false,
        }
    }

    pub fn n_subdomains(&self) -> usize {
        self.boundaries.len().saturating_sub(1)
    }

    pub fn partition(&self) -> Result<Partition> {
        Partition::new(self.boundaries.clone())
    }

    pub fn validate(&self) -> Result<()> {
        if self.q == 0 {
            return Err(Error::config("latent width q must be positive"));
        }
        for a in [self.branch_scalar, self.branch_cycle, self.trunk, self.decoder] {
            if a.hidden_layers > 0 && a.width == 0 {
                return Err(Error::config("hidden layers need a positive width"));
            }
        }
        self.partition().map(|_| ())
    }
}

/// `n` equal-width subdomains of `[0, 1]`.
pub fn uniform_boundaries(n: usize) -> Vec<f64> {
    (0..=n).map(|i| i as f64 / n as f64).collect()
}

/// Left-closed partition of normalized time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Partition {
    boundaries: Vec<f64>,
}

impl Partition {
    pub fn new(boundaries: Vec<f64>) -> Result<Self> {
        if boundaries.len() < 2 {
            return Err(Error::config("a partition needs at least two boundaries"));
        }
        if boundaries[0] != 0.0 || *boundaries.last().expect("nonempty") != 1.0 {
            return Err(Error::config("partition must start at 0 and end at 1"));
        }
        if boundaries.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::config("partition boundaries must be strictly increasing"));
        }
        Ok(Partition { boundaries })
    }

    pub fn boundaries(&self) -> &[f64] {
        &self.boundaries
    }

    pub fn len(&self) -> usize {
        self.boundaries.len() - 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn interval(&self, k: usize) -> (f64, f64) {
        (self.boundaries[k], self.boundaries[k + 1])
    }

    /// Interior boundaries shared by subdomains `k − 1` and `k`, for `k = 1..len`.
    pub fn interfaces(&self) -> &[f64] {
        &self.boundaries[1..self.boundaries.len() - 1]
    }

    /// The `k` with `b_k ≤ τ < b_{k+1}`; `τ = 1` belongs to the last subdomain.
    pub fn subdomain_index(&self, tau: f64) -> usize {
        let k = self.boundaries.partition_point(|&b| b <= tau);
        k.saturating_sub(1).min(self.len() - 1)
    }
}
