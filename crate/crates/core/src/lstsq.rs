//! Dense ordinary least squares via singular value decomposition, with an
//! explicit numerical-rank check.

use nalgebra::{DMatrix, DVector};

/// A design matrix is rank-deficient when any singular value falls below this
/// factor times the largest one.
pub(crate) const RANK_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) struct RankDeficiency;

#[derive(Debug, Clone)]
pub(crate) struct Fit {
    pub coefficients: Vec<f64>,
    pub residual_rms: f64,
}

/// Solves `min ||X c - y||_2` for a row-major design matrix `X`.
///
/// Requires `targets.len() * ncols == rows_flat.len()` and at least as many
/// rows as columns; callers enforce the sample-count precondition.
pub(crate) fn fit(ncols: usize, rows_flat: &[f64], targets: &[f64]) -> Result<Fit, RankDeficiency> {
    let nrows = targets.len();
    assert_eq!(rows_flat.len(), nrows * ncols, "design matrix shape mismatch");
    assert!(nrows >= ncols, "fewer rows than coefficients");

    let x = DMatrix::from_row_slice(nrows, ncols, rows_flat);
    let y = DVector::from_column_slice(targets);

    let svd = x.clone().svd(true, true);
    let sigma_max = svd.singular_values.max();
    if sigma_max <= 0.0 || sigma_max.is_nan() {
        return Err(RankDeficiency);
    }
    let cutoff = RANK_TOLERANCE * sigma_max;
    let rank = svd.singular_values.iter().filter(|s| **s > cutoff).count();
    if rank < ncols {
        return Err(RankDeficiency);
    }

    let coefficients = svd
        .solve(&y, cutoff)
        .expect("SVD was computed with U and V");
    let residual = &y - &x * &coefficients;
    let residual_rms = (residual.norm_squared() / nrows as f64).sqrt();

    Ok(Fit {
        coefficients: coefficients.iter().copied().collect(),
        residual_rms,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn recovers_exact_coefficients() {
        // y = 2 x1 - 3 x2 + 0.5, three columns with an intercept
        let rows: Vec<[f64; 3]> = vec![
            [1.0, 2.0, 1.0],
            [2.0, 1.0, 1.0],
            [3.0, 5.0, 1.0],
            [0.5, 0.25, 1.0],
        ];
        let y: Vec<f64> = rows.iter().map(|r| 2.0 * r[0] - 3.0 * r[1] + 0.5).collect();
        let flat: Vec<f64> = rows.iter().flatten().copied().collect();
        let fit = fit(3, &flat, &y).unwrap();
        assert!((fit.coefficients[0] - 2.0).abs() < 1e-12);
        assert!((fit.coefficients[1] + 3.0).abs() < 1e-12);
        assert!((fit.coefficients[2] - 0.5).abs() < 1e-12);
        assert!(fit.residual_rms < 1e-12);
    }

    #[test]
    fn detects_rank_deficiency() {
        // second column is twice the first
        let flat = vec![1.0, 2.0, 2.0, 4.0, 3.0, 6.0];
        let y = vec![1.0, 2.0, 3.0];
        assert_eq!(fit(2, &flat, &y).unwrap_err(), RankDeficiency);
    }

    #[test]
    fn zero_matrix_is_rank_deficient() {
        let flat = vec![0.0; 6];
        let y = vec![1.0, 2.0, 3.0];
        assert_eq!(fit(2, &flat, &y).unwrap_err(), RankDeficiency);
    }
}
