//! Reference implementations used only as test oracles. They deliberately
//! share no code with the library: plain nested loops over `Vec<f64>`.

#![allow(dead_code)]

use rimnet::nn::{CellParams, GruNetwork};

pub fn sig(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

/// One GRU step with explicit per-element sums.
pub fn oracle_step(p: &CellParams, x: &[f64], h: &[f64]) -> Vec<f64> {
    let hs = p.u.ncols();
    let d = p.w.ncols();
    let row = |block: usize, j: usize| -> (f64, f64) {
        let i = block * hs + j;
        let mut wx = p.b[i];
        for k in 0..d {
            wx += p.w[[i, k]] * x[k];
        }
        let mut uh = 0.0;
        for k in 0..hs {
            uh += p.u[[i, k]] * h[k];
        }
        (wx, uh)
    };
    (0..hs)
        .map(|j| {
            let (zx, zh) = row(0, j);
            let (rx, rh) = row(1, j);
            let (nx, nh) = row(2, j);
            let z = sig(zx + zh);
            let r = sig(rx + rh);
            let n = (nx + r * nh).tanh();
            (1.0 - z) * h[j] + z * n
        })
        .collect()
}

/// Unbatched inference: sequences as `Vec<Vec<f64>>` indexed `[t][feature]`.
pub fn oracle_forward(net: &GruNetwork, input: &[f64]) -> Vec<f64> {
    let hs = net.arch.hidden_size;
    let mut x: Vec<Vec<f64>> = input.iter().map(|&v| vec![v]).collect();
    let len = x.len();
    for layer in &net.layers {
        let mut fwd = vec![vec![0.0; hs]; len];
        let mut h = vec![0.0; hs];
        for t in 0..len {
            h = oracle_step(&layer.forward, &x[t], &h);
            fwd[t] = h.clone();
        }
        let mut bwd = vec![vec![0.0; hs]; len];
        let mut h = vec![0.0; hs];
        for t in (0..len).rev() {
            h = oracle_step(&layer.backward, &x[t], &h);
            bwd[t] = h.clone();
        }
        x = (0..len)
            .map(|t| {
                (0..hs)
                    .map(|j| {
                        let y = fwd[t][j] + bwd[t][j];
                        if layer.has_residual {
                            x[t][j] + y
                        } else {
                            y
                        }
                    })
                    .collect()
            })
            .collect();
    }
    x.iter().map(|v| v.iter().sum::<f64>() / hs as f64).collect()
}
