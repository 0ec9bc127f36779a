use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

/// Value of a scalar function together with its first and pure second
/// derivatives along a fixed set of tracked input coordinates.
///
/// `d1[k]` is `df/dy_k` and `d2[k]` is `d²f/dy_k²` for the k-th tracked
/// coordinate. Cross derivatives are not carried.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Jet2 {
    pub value: f64,
    pub d1: Vec<f64>,
    pub d2: Vec<f64>,
}

impl Jet2 {
    pub fn constant(value: f64, n_tracked: usize) -> Self {
        Jet2 {
            value,
            d1: vec![0.0; n_tracked],
            d2: vec![0.0; n_tracked],
        }
    }

    /// The identity function of tracked coordinate `k`, evaluated at `value`.
    pub fn variable(value: f64, k: usize, n_tracked: usize) -> Self {
        let mut jet = Jet2::constant(value, n_tracked);
        jet.d1[k] = 1.0;
        jet
    }

    pub fn n_tracked(&self) -> usize {
        self.d1.len()
    }

    pub fn is_finite(&self) -> bool {
        self.value.is_finite()
            && self.d1.iter().all(|v| v.is_finite())
            && self.d2.iter().all(|v| v.is_finite())
    }

    pub fn scale(&self, c: f64) -> Jet2 {
        Jet2 {
            value: self.value * c,
            d1: self.d1.iter().map(|v| v * c).collect(),
            d2: self.d2.iter().map(|v| v * c).collect(),
        }
    }

    pub fn add_scalar(&self, c: f64) -> Jet2 {
        Jet2 {
            value: self.value + c,
            ..self.clone()
        }
    }

    /// Chain rule for a scalar function with derivatives `f1 = f'(v)`, `f2 = f''(v)`.
    pub fn compose(&self, f0: f64, f1: f64, f2: f64) -> Jet2 {
        Jet2 {
            value: f0,
            d1: self.d1.iter().map(|d| f1 * d).collect(),
            d2: self
                .d1
                .iter()
                .zip(&self.d2)
                .map(|(a, b)| f1 * b + f2 * a * a)
                .collect(),
        }
    }

    pub fn tanh(&self) -> Jet2 {
        let y = self.value.tanh();
        let s = 1.0 - y * y;
        self.compose(y, s, -2.0 * y * s)
    }

    pub fn exp(&self) -> Jet2 {
        let e = self.value.exp();
        self.compose(e, e, e)
    }

    pub fn powf(&self, p: f64) -> Jet2 {
        let v = self.value;
        self.compose(v.powf(p), p * v.powf(p - 1.0), p * (p - 1.0) * v.powf(p - 2.0))
    }

    fn zip_with(&self, other: &Jet2, f: impl Fn(f64, f64) -> f64) -> (Vec<f64>, Vec<f64>) {
        assert_eq!(self.n_tracked(), other.n_tracked(), "jets track different coordinates");
        let d1 = self.d1.iter().zip(&other.d1).map(|(a, b)| f(*a, *b)).collect();
        let d2 = self.d2.iter().zip(&other.d2).map(|(a, b)| f(*a, *b)).collect();
        (d1, d2)
    }
}

impl Add for &Jet2 {
    type Output = Jet2;
    fn add(self, rhs: &Jet2) -> Jet2 {
        let (d1, d2) = self.zip_with(rhs, |a, b| a + b);
        Jet2 {
            value: self.value + rhs.value,
            d1,
            d2,
        }
    }
}

impl Sub for &Jet2 {
    type Output = Jet2;
    fn sub(self, rhs: &Jet2) -> Jet2 {
        let (d1, d2) = self.zip_with(rhs, |a, b| a - b);
        Jet2 {
            value: self.value - rhs.value,
            d1,
            d2,
        }
    }
}

impl Mul for &Jet2 {
    type Output = Jet2;
    fn mul(self, rhs: &Jet2) -> Jet2 {
        assert_eq!(self.n_tracked(), rhs.n_tracked(), "jets track different coordinates");
        let (f, g) = (self.value, rhs.value);
        let d1 = self.d1.iter().zip(&rhs.d1).map(|(a, b)| a * g + f * b).collect();
        let d2 = (0..self.n_tracked())
            .map(|k| self.d2[k] * g + 2.0 * self.d1[k] * rhs.d1[k] + f * rhs.d2[k])
            .collect();
        Jet2 {
            value: f * g,
            d1,
            d2,
        }
    }
}

impl Neg for &Jet2 {
    type Output = Jet2;
    fn neg(self) -> Jet2 {
        self.scale(-1.0)
    }
}
