use crate::{Error, Result};

/// `Σ (ŷ − y)²`, summed rather than averaged.
pub fn mse_loss(output: &[f64], label: &[f64]) -> Result<f64> {
    if output.len() != label.len() {
        return Err(Error::shape(label.len(), output.len()));
    }
    Ok(output.iter().zip(label).map(|(y, t)| (t - y) * (t - y)).sum())
}

/// Gradient of [`mse_loss`] with respect to `output`, scaled by `scale`.
pub fn mse_loss_grad(output: &[f64], label: &[f64], scale: f64) -> Result<Vec<f64>> {
    if output.len() != label.len() {
        return Err(Error::shape(label.len(), output.len()));
    }
    Ok(output.iter().zip(label).map(|(y, t)| 2.0 * scale * (y - t)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn loss_basics() {
        let a = [0.1, -0.4, 2.0];
        assert_eq!(mse_loss(&a, &a).unwrap(), 0.0);
        assert_eq!(mse_loss(&[0.0, 1.0], &[0.0, 1.5]).unwrap(), 0.25);
        let b = [1.0, 0.0, -2.0];
        assert_eq!(mse_loss(&a, &b).unwrap(), mse_loss(&b, &a).unwrap());
        assert!(mse_loss(&a, &[0.0]).is_err());
    }

    #[test]
    fn grad_matches_difference_quotient() {
        let y = [0.3, -0.2];
        let t = [0.1, 0.5];
        let g = mse_loss_grad(&y, &t, 1.0).unwrap();
        let eps = 1e-6;
        for i in 0..2 {
            let mut p = y;
            let mut m = y;
            p[i] += eps;
            m[i] -= eps;
            let fd = (mse_loss(&p, &t).unwrap() - mse_loss(&m, &t).unwrap()) / (2.0 * eps);
            assert!((fd - g[i]).abs() < 1e-8);
        }
    }
}
