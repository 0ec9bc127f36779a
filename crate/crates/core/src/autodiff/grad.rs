use ndarray::{ArrayView1, ArrayView2, ArrayViewMut1, ArrayViewMut2};

use super::mlp::{layer_offsets, param_count};

/// Gradient of a scalar with respect to every entry of an [`MlpParams`],
/// stored in the same flat layout.
///
/// [`MlpParams`]: super::MlpParams
#[derive(Debug, Clone, PartialEq)]
pub struct ParamGradient {
    sizes: Vec<usize>,
    data: Vec<f64>,
}

impl ParamGradient {
    pub fn zeros(sizes: &[usize]) -> Self {
        ParamGradient {
            sizes: sizes.to_vec(),
            data: vec![0.0; param_count(sizes)],
        }
    }

    pub fn layer_sizes(&self) -> &[usize] {
        &self.sizes
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

    pub fn add_assign(&mut self, other: &ParamGradient) {
        assert_eq!(self.sizes, other.sizes, "gradient shapes differ");
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += b;
        }
    }

    pub fn scale(&mut self, c: f64) {
        self.data.iter_mut().for_each(|v| *v *= c);
    }

    pub fn weight(&self, l: usize) -> ArrayView2<'_, f64> {
        let (w, b) = layer_offsets(&self.sizes)[l];
        ArrayView2::from_shape((self.sizes[l + 1], self.sizes[l]), &self.data[w..b]).expect("consistent layout")
    }

    pub fn bias(&self, l: usize) -> ArrayView1<'_, f64> {
        let (_, b) = layer_offsets(&self.sizes)[l];
        ArrayView1::from(&self.data[b..b + self.sizes[l + 1]])
    }

    pub(crate) fn weight_mut(&mut self, l: usize) -> ArrayViewMut2<'_, f64> {
        let (w, b) = layer_offsets(&self.sizes)[l];
        let shape = (self.sizes[l + 1], self.sizes[l]);
        ArrayViewMut2::from_shape(shape, &mut self.data[w..b]).expect("consistent layout")
    }

    pub(crate) fn bias_mut(&mut self, l: usize) -> ArrayViewMut1<'_, f64> {
        let (_, b) = layer_offsets(&self.sizes)[l];
        let n = self.sizes[l + 1];
        ArrayViewMut1::from(&mut self.data[b..b + n])
    }
}
