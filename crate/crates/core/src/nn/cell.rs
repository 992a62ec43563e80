use ndarray::{Array1, Array2};
use rand::Rng;

use crate::{Error, Result};

#[inline]
pub fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

/// Parameters of one GRU direction. Gate blocks are stacked row-wise in the
/// order update (z), reset (r), candidate (n).
#[derive(Debug, Clone, PartialEq)]
pub struct CellParams {
    /// Input weights, `3H × D`.
    pub w: Array2<f64>,
    /// Recurrent weights, `3H × H`.
    pub u: Array2<f64>,
    /// `3H`.
    pub b: Array1<f64>,
}

/// Gate activations of a single step.
#[derive(Debug, Clone, PartialEq)]
pub struct GateCache {
    pub z: Vec<f64>,
    pub r: Vec<f64>,
    pub n: Vec<f64>,
    /// `U_n h_prev`, before the reset gate is applied.
    pub recurrent_candidate: Vec<f64>,
}

impl CellParams {
    pub fn zeros(input_dim: usize, hidden: usize) -> Self {
        Self {
            w: Array2::zeros((3 * hidden, input_dim)),
            u: Array2::zeros((3 * hidden, hidden)),
            b: Array1::zeros(3 * hidden),
        }
    }

    /// Weights uniform in `±1/√H`, zero biases.
    pub fn init(input_dim: usize, hidden: usize, rng: &mut impl Rng) -> Self {
        let bound = 1.0 / (hidden as f64).sqrt();
        let mut p = Self::zeros(input_dim, hidden);
        p.w.mapv_inplace(|_| rng.gen_range(-bound..bound));
        p.u.mapv_inplace(|_| rng.gen_range(-bound..bound));
        p
    }

    pub fn hidden(&self) -> usize {
        self.u.ncols()
    }

    pub fn input_dim(&self) -> usize {
        self.w.ncols()
    }

    pub fn tensors(&self) -> [&[f64]; 3] {
        [
            self.w.as_slice().expect("standard layout"),
            self.u.as_slice().expect("standard layout"),
            self.b.as_slice().expect("standard layout"),
        ]
    }

    pub fn tensors_mut(&mut self) -> [&mut [f64]; 3] {
        [
            self.w.as_slice_mut().expect("standard layout"),
            self.u.as_slice_mut().expect("standard layout"),
            self.b.as_slice_mut().expect("standard layout"),
        ]
    }

    /// One recurrent step for a single sequence:
    ///
    /// ```text
    /// z = σ(W_z x + U_z h + b_z)
    /// r = σ(W_r x + U_r h + b_r)
    /// n = tanh(W_n x + r ⊙ (U_n h) + b_n)
    /// h' = (1 − z) ⊙ h + z ⊙ n
    /// ```
    pub fn step(&self, x: &[f64], h_prev: &[f64]) -> Result<(Vec<f64>, GateCache)> {
        let (d, h) = (self.input_dim(), self.hidden());
        if x.len() != d || h_prev.len() != h {
            return Err(Error::shape(
                format!("x[{d}], h[{h}]"),
                format!("x[{}], h[{}]", x.len(), h_prev.len()),
            ));
        }
        let x = ndarray::ArrayView1::from(x);
        let hp = ndarray::ArrayView1::from(h_prev);
        let gx = self.w.dot(&x) + &self.b;
        let gh = self.u.dot(&hp);
        let mut cache = GateCache {
            z: vec![0.0; h],
            r: vec![0.0; h],
            n: vec![0.0; h],
            recurrent_candidate: gh.slice(ndarray::s![2 * h..]).to_vec(),
        };
        let mut out = vec![0.0; h];
        for j in 0..h {
            let z = sigmoid(gx[j] + gh[j]);
            let r = sigmoid(gx[h + j] + gh[h + j]);
            let n = (gx[2 * h + j] + r * gh[2 * h + j]).tanh();
            out[j] = (1.0 - z) * h_prev[j] + z * n;
            cache.z[j] = z;
            cache.r[j] = r;
            cache.n[j] = n;
        }
        Ok((out, cache))
    }
}
