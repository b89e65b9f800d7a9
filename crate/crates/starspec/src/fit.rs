//! Ordinary least squares.

use nalgebra::{DMatrix, DVector};

#[derive(Clone, Debug, PartialEq)]
pub struct LeastSquares {
    pub coefficients: Vec<f64>,
    /// `NaN` when there are no residual degrees of freedom.
    pub std_errors: Vec<f64>,
    pub residual_sum_sq: f64,
}

/// Fits `y ≈ Σ c_j rows[i][j]`. Returns `None` for an underdetermined or
/// rank-deficient design.
pub fn least_squares(rows: &[Vec<f64>], y: &[f64]) -> Option<LeastSquares> {
    let m = rows.len();
    let p = rows.first()?.len();
    if m < p || y.len() != m {
        return None;
    }
    let x = DMatrix::from_fn(m, p, |i, j| rows[i][j]);
    let b = DVector::from_column_slice(y);
    let xtx = x.transpose() * &x;
    let inv = xtx.clone().try_inverse()?;
    let svd = x.clone().svd(true, true);
    let c = svd.solve(&b, 1e-14).ok()?;
    let r = &x * &c - &b;
    let rss = r.norm_squared();
    let dof = m - p;
    let sigma2 = if dof > 0 { rss / dof as f64 } else { f64::NAN };
    Some(LeastSquares {
        coefficients: c.iter().copied().collect(),
        std_errors: (0..p).map(|j| (sigma2 * inv[(j, j)]).sqrt()).collect(),
        residual_sum_sq: rss,
    })
}

/// Basis `(1/θ², 1/θ, 1)`.
pub fn inverse_square_basis(theta: f64) -> Vec<f64> {
    vec![1.0 / (theta * theta), 1.0 / theta, 1.0]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn recovers_exact_model() {
        let th = [0.1, 0.15, 0.2, 0.3, 0.45];
        let rows: Vec<_> = th.iter().map(|&t| inverse_square_basis(t)).collect();
        let y: Vec<f64> = th.iter().map(|t| -1.0 / (t * t) + 0.5 / t - 2.0).collect();
        let f = least_squares(&rows, &y).unwrap();
        for (c, e) in f.coefficients.iter().zip([-1.0, 0.5, -2.0]) {
            assert!((c - e).abs() < 1e-9);
        }
        assert!(f.residual_sum_sq < 1e-18);
    }

    #[test]
    fn straight_line_standard_error() {
        let rows = vec![vec![1.0, 0.0], vec![1.0, 1.0], vec![1.0, 2.0]];
        let f = least_squares(&rows, &[0.0, 2.0, 1.0]).unwrap();
        assert!((f.coefficients[0] - 0.5).abs() < 1e-12);
        assert!((f.coefficients[1] - 0.5).abs() < 1e-12);
        // rss = 1.5, sigma² = 1.5, (XᵀX)⁻¹₁₁ = 1/2
        assert!((f.std_errors[1] - 0.75f64.sqrt()).abs() < 1e-12);
        assert!(least_squares(&rows[..1], &[0.0]).is_none());
    }
}
