use ndarray::linalg::general_mat_mul;
use ndarray::{s, Array2, Array3, ArrayView2, ArrayView3, Axis};
use rand::{Rng, RngCore};

use super::cell::{sigmoid, CellParams};
use crate::{Error, Result};

/// One bidirectional layer. The two directions are summed per timestep.
#[derive(Debug, Clone, PartialEq)]
pub struct LayerParams {
    pub forward: CellParams,
    pub backward: CellParams,
    /// Output is added to the layer input.
    pub has_residual: bool,
}

/// Cached activations of one direction, indexed by processing step.
#[derive(Debug, Clone)]
struct DirectionTrace {
    /// `(N + 1, B, H)`; entry 0 is the zero initial state.
    h: Array3<f64>,
    z: Array3<f64>,
    r: Array3<f64>,
    n: Array3<f64>,
    /// `U_n h_prev`.
    ghn: Array3<f64>,
}

/// Everything a layer needs to backpropagate.
#[derive(Debug, Clone)]
pub struct LayerTrace {
    input: Array3<f64>,
    forward: DirectionTrace,
    backward: DirectionTrace,
    /// `(N, B, H)` with entries 0 or `1/(1−p)`; `None` when dropout is off.
    mask: Option<Array3<f64>>,
}

impl LayerTrace {
    pub fn mask(&self) -> Option<&Array3<f64>> {
        self.mask.as_ref()
    }
}

fn flatten(a: ArrayView3<'_, f64>) -> ArrayView2<'_, f64> {
    let (n, b, d) = a.dim();
    a.into_shape_with_order((n * b, d)).expect("contiguous sequence")
}

#[inline]
fn time_of(step: usize, len: usize, reverse: bool) -> usize {
    if reverse {
        len - 1 - step
    } else {
        step
    }
}

impl CellParams {
    /// Run over a `(N, B, D)` sequence. The returned hidden states are
    /// indexed by time regardless of direction.
    fn run(&self, x: &Array3<f64>, reverse: bool, keep_trace: bool) -> (Array3<f64>, Option<DirectionTrace>) {
        let (len, batch, _) = x.dim();
        let hidden = self.hidden();
        let h3 = 3 * hidden;

        let mut gx = Array2::<f64>::zeros((len * batch, h3));
        general_mat_mul(1.0, &flatten(x.view()), &self.w.t(), 0.0, &mut gx);
        gx += &self.b;
        let gx = gx.into_shape_with_order((len, batch, h3)).expect("gx shape");

        let mut out = Array3::<f64>::zeros((len, batch, hidden));
        let mut trace = keep_trace.then(|| DirectionTrace {
            h: Array3::zeros((len + 1, batch, hidden)),
            z: Array3::zeros((len, batch, hidden)),
            r: Array3::zeros((len, batch, hidden)),
            n: Array3::zeros((len, batch, hidden)),
            ghn: Array3::zeros((len, batch, hidden)),
        });
        let mut h_prev = Array2::<f64>::zeros((batch, hidden));
        let mut h_next = Array2::<f64>::zeros((batch, hidden));
        let mut gh = Array2::<f64>::zeros((batch, h3));

        for step in 0..len {
            let t = time_of(step, len, reverse);
            general_mat_mul(1.0, &h_prev, &self.u.t(), 0.0, &mut gh);
            let gx_t = gx.index_axis(Axis(0), t);
            let gx_t = gx_t.as_slice().expect("contiguous");
            let gh_s = gh.as_slice().expect("contiguous");
            let hp = h_prev.as_slice().expect("contiguous");
            let hn = h_next.as_slice_mut().expect("contiguous");
            match trace.as_mut() {
                Some(tr) => {
                    let mut z_t = tr.z.index_axis_mut(Axis(0), step);
                    let mut r_t = tr.r.index_axis_mut(Axis(0), step);
                    let mut n_t = tr.n.index_axis_mut(Axis(0), step);
                    let mut c_t = tr.ghn.index_axis_mut(Axis(0), step);
                    let (zs, rs, ns, cs) = (
                        z_t.as_slice_mut().expect("contiguous"),
                        r_t.as_slice_mut().expect("contiguous"),
                        n_t.as_slice_mut().expect("contiguous"),
                        c_t.as_slice_mut().expect("contiguous"),
                    );
                    for bi in 0..batch {
                        let (gxr, ghr) = (&gx_t[bi * h3..][..h3], &gh_s[bi * h3..][..h3]);
                        for j in 0..hidden {
                            let i = bi * hidden + j;
                            let z = sigmoid(gxr[j] + ghr[j]);
                            let r = sigmoid(gxr[hidden + j] + ghr[hidden + j]);
                            let c = ghr[2 * hidden + j];
                            let n = (gxr[2 * hidden + j] + r * c).tanh();
                            hn[i] = (1.0 - z) * hp[i] + z * n;
                            zs[i] = z;
                            rs[i] = r;
                            ns[i] = n;
                            cs[i] = c;
                        }
                    }
                }
                None => {
                    for bi in 0..batch {
                        let (gxr, ghr) = (&gx_t[bi * h3..][..h3], &gh_s[bi * h3..][..h3]);
                        for j in 0..hidden {
                            let i = bi * hidden + j;
                            let z = sigmoid(gxr[j] + ghr[j]);
                            let r = sigmoid(gxr[hidden + j] + ghr[hidden + j]);
                            let n = (gxr[2 * hidden + j] + r * ghr[2 * hidden + j]).tanh();
                            hn[i] = (1.0 - z) * hp[i] + z * n;
                        }
                    }
                }
            }
            std::mem::swap(&mut h_prev, &mut h_next);
            out.index_axis_mut(Axis(0), t).assign(&h_prev);
            if let Some(tr) = trace.as_mut() {
                tr.h.index_axis_mut(Axis(0), step + 1).assign(&h_prev);
            }
        }
        (out, trace)
    }

    /// Backpropagate `d_out` (indexed by time) through one direction.
    /// Parameter gradients are accumulated into `grad`; returns `dL/dx`.
    fn run_backward(
        &self,
        x: &Array3<f64>,
        trace: &DirectionTrace,
        d_out: &Array3<f64>,
        reverse: bool,
        grad: &mut CellParams,
    ) -> Array3<f64> {
        let (len, batch, _) = x.dim();
        let hidden = self.hidden();
        let h3 = 3 * hidden;

        // Input-side pre-activation gradients by time, recurrent-side by step.
        let mut dgx = Array3::<f64>::zeros((len, batch, h3));
        let mut dgh = Array3::<f64>::zeros((len, batch, h3));
        let mut dh_carry = Array2::<f64>::zeros((batch, hidden));
        let mut dh_direct = vec![0.0; batch * hidden];

        for step in (0..len).rev() {
            let t = time_of(step, len, reverse);
            let d_out_t = d_out.index_axis(Axis(0), t);
            let d_out_t = d_out_t.as_slice().expect("contiguous");
            let hp = trace.h.index_axis(Axis(0), step);
            let hp = hp.as_slice().expect("contiguous");
            let z_t = trace.z.index_axis(Axis(0), step);
            let r_t = trace.r.index_axis(Axis(0), step);
            let n_t = trace.n.index_axis(Axis(0), step);
            let c_t = trace.ghn.index_axis(Axis(0), step);
            let (zs, rs, ns, cs) = (
                z_t.as_slice().expect("contiguous"),
                r_t.as_slice().expect("contiguous"),
                n_t.as_slice().expect("contiguous"),
                c_t.as_slice().expect("contiguous"),
            );
            let carry = dh_carry.as_slice().expect("contiguous");
            let mut dgx_t = dgx.index_axis_mut(Axis(0), t);
            let dgx_t = dgx_t.as_slice_mut().expect("contiguous");
            let mut dgh_s = dgh.index_axis_mut(Axis(0), step);
            let dgh_s = dgh_s.as_slice_mut().expect("contiguous");

            for bi in 0..batch {
                for j in 0..hidden {
                    let i = bi * hidden + j;
                    let dh = d_out_t[i] + carry[i];
                    let (z, r, n, c) = (zs[i], rs[i], ns[i], cs[i]);
                    let dn = dh * z;
                    let dz = dh * (n - hp[i]);
                    dh_direct[i] = dh * (1.0 - z);
                    let dan = dn * (1.0 - n * n);
                    let dar = dan * c * r * (1.0 - r);
                    let daz = dz * z * (1.0 - z);
                    let gxo = bi * h3;
                    dgx_t[gxo + j] = daz;
                    dgx_t[gxo + hidden + j] = dar;
                    dgx_t[gxo + 2 * hidden + j] = dan;
                    dgh_s[gxo + j] = daz;
                    dgh_s[gxo + hidden + j] = dar;
                    dgh_s[gxo + 2 * hidden + j] = dan * r;
                }
            }
            // dh_prev = (1 − z) ⊙ dh + dgh · U
            dh_carry.as_slice_mut().expect("contiguous").copy_from_slice(&dh_direct);
            general_mat_mul(1.0, &dgh.index_axis(Axis(0), step), &self.u, 1.0, &mut dh_carry);
        }

        let dgx_flat = flatten(dgx.view());
        let dgh_flat = flatten(dgh.view());
        let h_prev_flat = flatten(trace.h.slice(s![..len, .., ..]));
        general_mat_mul(1.0, &dgh_flat.t(), &h_prev_flat, 1.0, &mut grad.u);
        general_mat_mul(1.0, &dgx_flat.t(), &flatten(x.view()), 1.0, &mut grad.w);
        grad.b += &dgx_flat.sum_axis(Axis(0));

        let mut dx = Array2::<f64>::zeros((len * batch, self.input_dim()));
        general_mat_mul(1.0, &dgx_flat, &self.w, 0.0, &mut dx);
        dx.into_shape_with_order((len, batch, self.input_dim())).expect("dx shape")
    }
}

impl LayerParams {
    pub fn new(forward: CellParams, backward: CellParams, has_residual: bool) -> Result<Self> {
        if forward.w.dim() != backward.w.dim() || forward.u.dim() != backward.u.dim() {
            return Err(Error::shape(
                format!("{:?}/{:?}", forward.w.dim(), forward.u.dim()),
                format!("{:?}/{:?}", backward.w.dim(), backward.u.dim()),
            ));
        }
        if has_residual && forward.input_dim() != forward.hidden() {
            return Err(Error::invalid(
                "has_residual",
                "residual layers need input dimension equal to hidden size",
            ));
        }
        Ok(Self {
            forward,
            backward,
            has_residual,
        })
    }

    pub fn hidden(&self) -> usize {
        self.forward.hidden()
    }

    pub fn input_dim(&self) -> usize {
        self.forward.input_dim()
    }

    pub fn zeros_like(&self) -> Self {
        Self {
            forward: CellParams::zeros(self.input_dim(), self.hidden()),
            backward: CellParams::zeros(self.input_dim(), self.hidden()),
            has_residual: self.has_residual,
        }
    }

    fn check_input(&self, x: &Array3<f64>) -> Result<()> {
        let (len, batch, d) = x.dim();
        if d != self.input_dim() || len == 0 || batch == 0 {
            return Err(Error::shape(
                format!("(N>=1, B>=1, {})", self.input_dim()),
                format!("({len}, {batch}, {d})"),
            ));
        }
        Ok(())
    }

    /// Bidirectional pass over `(N, B, D)`, before any residual addition.
    /// With `dropout` set to `Some((rate, rng))` an inverted dropout mask is
    /// drawn and a trace is returned for backpropagation.
    pub fn forward(
        &self,
        x: &Array3<f64>,
        dropout: Option<(f64, &mut dyn RngCore)>,
    ) -> Result<(Array3<f64>, Option<LayerTrace>)> {
        self.check_input(x)?;
        let x = x.as_standard_layout().into_owned();
        let training = dropout.is_some();
        let (fwd, fwd_trace) = self.forward.run(&x, false, training);
        let (bwd, bwd_trace) = self.backward.run(&x, true, training);
        let mut out = fwd + bwd;
        let Some((rate, rng)) = dropout else {
            return Ok((out, None));
        };
        let mask = (rate > 0.0).then(|| {
            let keep = 1.0 / (1.0 - rate);
            out.map(|_| if rng.gen::<f64>() < rate { 0.0 } else { keep })
        });
        if let Some(m) = &mask {
            out *= m;
        }
        let trace = LayerTrace {
            input: x,
            forward: fwd_trace.expect("trace kept"),
            backward: bwd_trace.expect("trace kept"),
            mask,
        };
        Ok((out, Some(trace)))
    }

    /// Gradient of the layer (excluding its residual path) with respect to
    /// its input, accumulating parameter gradients into `grad`.
    pub fn backward(&self, trace: &LayerTrace, d_out: &Array3<f64>, grad: &mut LayerParams) -> Array3<f64> {
        let d_sum = match &trace.mask {
            Some(m) => d_out * m,
            None => d_out.clone(),
        };
        let dx_f = self
            .forward
            .run_backward(&trace.input, &trace.forward, &d_sum, false, &mut grad.forward);
        let dx_b = self
            .backward
            .run_backward(&trace.input, &trace.backward, &d_sum, true, &mut grad.backward);
        dx_f + dx_b
    }
}
