use ndarray::{Array2, ArrayView1, ArrayView2, ArrayViewMut1, ArrayViewMut2};
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::Jet2;
use crate::{Error, Result};

/// Parameters of a dense feed-forward network with `tanh` hidden layers and an
/// identity output layer.
///
/// All weights and biases live in one flat buffer. Layer `l` stores its weight
/// matrix row-major with shape `(sizes[l + 1], sizes[l])`, followed by its bias
/// vector. Gradients and optimizer moments use the same layout, which makes
/// them plain slices of equal length.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MlpParams {
    sizes: Vec<usize>,
    data: Vec<f64>,
}

/// Hidden layer count and width of the default architecture.
pub const DEFAULT_HIDDEN_LAYERS: usize = 5;
pub const DEFAULT_WIDTH: usize = 50;

pub(crate) fn layer_offsets(sizes: &[usize]) -> Vec<(usize, usize)> {
    let mut offsets = Vec::with_capacity(sizes.len().saturating_sub(1));
    let mut at = 0;
    for w in sizes.windows(2) {
        let weights = at;
        let bias = at + w[0] * w[1];
        offsets.push((weights, bias));
        at = bias + w[1];
    }
    offsets
}

pub(crate) fn param_count(sizes: &[usize]) -> usize {
    sizes.windows(2).map(|w| w[0] * w[1] + w[1]).sum()
}

fn check_sizes(sizes: &[usize]) -> Result<()> {
    if sizes.len() < 2 {
        return Err(Error::config("an MLP needs at least an input and an output layer"));
    }
    if sizes.contains(&0) {
        return Err(Error::config("layer sizes must be positive"));
    }
    Ok(())
}

/// Layer sizes for `hidden` tanh layers of `width` neurons between `n_in` and `n_out`.
pub fn layer_sizes(n_in: usize, hidden: usize, width: usize, n_out: usize) -> Vec<usize> {
    let mut sizes = vec![n_in];
    sizes.extend(std::iter::repeat_n(width, hidden));
    sizes.push(n_out);
    sizes
}

impl MlpParams {
    pub fn zeros(sizes: &[usize]) -> Result<Self> {
        check_sizes(sizes)?;
        Ok(MlpParams {
            sizes: sizes.to_vec(),
            data: vec![0.0; param_count(sizes)],
        })
    }

    /// Glorot-uniform weights, zero biases.
    pub fn glorot<R: Rng + ?Sized>(sizes: &[usize], rng: &mut R) -> Result<Self> {
        let mut params = MlpParams::zeros(sizes)?;
        for l in 0..params.n_layers() {
            let (fan_in, fan_out) = (sizes[l] as f64, sizes[l + 1] as f64);
            let limit = (6.0 / (fan_in + fan_out)).sqrt();
            for w in params.weight_mut(l).iter_mut() {
                *w = rng.random_range(-limit..=limit);
            }
        }
        Ok(params)
    }

    pub fn from_parts(sizes: Vec<usize>, data: Vec<f64>) -> Result<Self> {
        check_sizes(&sizes)?;
        let expected = param_count(&sizes);
        if data.len() != expected {
            return Err(Error::Dimension {
                expected,
                got: data.len(),
            });
        }
        Ok(MlpParams { sizes, data })
    }

    pub fn layer_sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn n_inputs(&self) -> usize {
        self.sizes[0]
    }

    pub fn n_outputs(&self) -> usize {
        *self.sizes.last().expect("validated at construction")
    }

    /// Number of affine layers.
    pub fn n_layers(&self) -> usize {
        self.sizes.len() - 1
    }

    pub fn n_params(&self) -> usize {
        self.data.len()
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    fn offsets(&self, l: usize) -> (usize, usize) {
        layer_offsets(&self.sizes)[l]
    }

    pub fn weight(&self, l: usize) -> ArrayView2<'_, f64> {
        let (w, b) = self.offsets(l);
        ArrayView2::from_shape((self.sizes[l + 1], self.sizes[l]), &self.data[w..b])
            .expect("layout is consistent with sizes")
    }

    pub fn bias(&self, l: usize) -> ArrayView1<'_, f64> {
        let (_, b) = self.offsets(l);
        ArrayView1::from(&self.data[b..b + self.sizes[l + 1]])
    }

    pub fn weight_mut(&mut self, l: usize) -> ArrayViewMut2<'_, f64> {
        let (w, b) = self.offsets(l);
        let shape = (self.sizes[l + 1], self.sizes[l]);
        ArrayViewMut2::from_shape(shape, &mut self.data[w..b]).expect("layout is consistent with sizes")
    }

    pub fn bias_mut(&mut self, l: usize) -> ArrayViewMut1<'_, f64> {
        let (_, b) = self.offsets(l);
        let n = self.sizes[l + 1];
        ArrayViewMut1::from(&mut self.data[b..b + n])
    }

    fn check_input(&self, len: usize) -> Result<()> {
        if len != self.n_inputs() {
            return Err(Error::Dimension {
                expected: self.n_inputs(),
                got: len,
            });
        }
        Ok(())
    }

    /// Network output for a single input vector.
    pub fn forward(&self, input: &[f64]) -> Result<Vec<f64>> {
        self.check_input(input.len())?;
        let mut act = input.to_vec();
        let last = self.n_layers() - 1;
        for l in 0..self.n_layers() {
            let w = self.weight(l);
            let b = self.bias(l);
            let mut next = vec![0.0; self.sizes[l + 1]];
            for (i, out) in next.iter_mut().enumerate() {
                let mut z = b[i];
                for (j, a) in act.iter().enumerate() {
                    z += w[[i, j]] * a;
                }
                *out = if l == last { z } else { z.tanh() };
            }
            act = next;
        }
        Ok(act)
    }

    /// Network outputs with first and pure second derivatives along the input
    /// coordinates listed in `tracked`.
    ///
    /// The value slot is computed with the same operation order as
    /// [`MlpParams::forward`], so the two agree bitwise.
    pub fn forward_jet(&self, input: &[f64], tracked: &[usize]) -> Result<Vec<Jet2>> {
        self.check_input(input.len())?;
        if let Some(&bad) = tracked.iter().find(|&&k| k >= input.len()) {
            return Err(Error::domain(format!(
                "tracked coordinate {bad} out of range for {} inputs",
                input.len()
            )));
        }
        let n_k = tracked.len();
        let mut val = input.to_vec();
        let mut d1: Vec<Vec<f64>> = tracked
            .iter()
            .map(|&k| (0..input.len()).map(|j| if j == k { 1.0 } else { 0.0 }).collect())
            .collect();
        let mut d2: Vec<Vec<f64>> = vec![vec![0.0; input.len()]; n_k];
        let last = self.n_layers() - 1;
        for l in 0..self.n_layers() {
            let w = self.weight(l);
            let b = self.bias(l);
            let n_out = self.sizes[l + 1];
            let mut nv = vec![0.0; n_out];
            let mut n1 = vec![vec![0.0; n_out]; n_k];
            let mut n2 = vec![vec![0.0; n_out]; n_k];
            for i in 0..n_out {
                let mut z = b[i];
                for (j, a) in val.iter().enumerate() {
                    z += w[[i, j]] * a;
                }
                let mut z1 = vec![0.0; n_k];
                let mut z2 = vec![0.0; n_k];
                for k in 0..n_k {
                    for j in 0..val.len() {
                        z1[k] += w[[i, j]] * d1[k][j];
                        z2[k] += w[[i, j]] * d2[k][j];
                    }
                }
                if l == last {
                    nv[i] = z;
                    for k in 0..n_k {
                        n1[k][i] = z1[k];
                        n2[k][i] = z2[k];
                    }
                } else {
                    let y = z.tanh();
                    let s = 1.0 - y * y;
                    let g = -2.0 * y * s;
                    nv[i] = y;
                    for k in 0..n_k {
                        n1[k][i] = s * z1[k];
                        n2[k][i] = s * z2[k] + g * z1[k] * z1[k];
                    }
                }
            }
            val = nv;
            d1 = n1;
            d2 = n2;
        }
        Ok((0..val.len())
            .map(|i| Jet2 {
                value: val[i],
                d1: (0..n_k).map(|k| d1[k][i]).collect(),
                d2: (0..n_k).map(|k| d2[k][i]).collect(),
            })
            .collect())
    }

    /// Pushes input jets through the network with scalar jet arithmetic.
    ///
    /// Slower than the batched paths; used where inputs are themselves jets
    /// of other coordinates and as an independent check of them.
    pub fn forward_jets(&self, input: &[Jet2]) -> Result<Vec<Jet2>> {
        self.check_input(input.len())?;
        let n_k = input.first().map_or(0, Jet2::n_tracked);
        let mut act = input.to_vec();
        let last = self.n_layers() - 1;
        for l in 0..self.n_layers() {
            let w = self.weight(l);
            let b = self.bias(l);
            act = (0..self.sizes[l + 1])
                .map(|i| {
                    let mut z = Jet2::constant(b[i], n_k);
                    for (j, a) in act.iter().enumerate() {
                        z = &z + &a.scale(w[[i, j]]);
                    }
                    if l == last {
                        z
                    } else {
                        z.tanh()
                    }
                })
                .collect();
        }
        Ok(act)
    }

    /// Values for a batch of inputs stored column-wise (`n_inputs × batch`).
    pub fn forward_batch(&self, inputs: ArrayView2<'_, f64>) -> Result<Array2<f64>> {
        self.check_input(inputs.nrows())?;
        let mut act = inputs.to_owned();
        let last = self.n_layers() - 1;
        for l in 0..self.n_layers() {
            let mut z = self.weight(l).dot(&act);
            let b = self.bias(l);
            for (mut row, bi) in z.rows_mut().into_iter().zip(b.iter()) {
                if l == last {
                    row.mapv_inplace(|v| v + bi);
                } else {
                    row.mapv_inplace(|v| (v + bi).tanh());
                }
            }
            act = z;
        }
        Ok(act)
    }
}
