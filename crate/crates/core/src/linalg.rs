//! Minimal dense routines for the small covariance matrices used here
//! (dimension C·N, typically under 50).

/// Cholesky factorization of a symmetric positive-definite matrix, row-major.
/// Returns the lower-triangular factor, or `None` if a pivot is not strictly
/// positive.
pub(crate) fn cholesky(matrix: &[f64], dim: usize) -> Option<Vec<f64>> {
    debug_assert_eq!(matrix.len(), dim * dim);
    let mut lower = vec![0.0; dim * dim];
    for i in 0..dim {
        for j in 0..=i {
            let mut sum = matrix[i * dim + j];
            for k in 0..j {
                sum -= lower[i * dim + k] * lower[j * dim + k];
            }
            if i == j {
                if sum <= 0.0 || !sum.is_finite() {
                    return None;
                }
                lower[i * dim + i] = sum.sqrt();
            } else {
                lower[i * dim + j] = sum / lower[j * dim + j];
            }
        }
    }
    Some(lower)
}

/// y = L·x for lower-triangular L, row-major.
pub(crate) fn lower_tri_matvec(lower: &[f64], dim: usize, x: &[f64]) -> Vec<f64> {
    debug_assert_eq!(x.len(), dim);
    (0..dim)
        .map(|i| (0..=i).map(|j| lower[i * dim + j] * x[j]).sum())
        .collect()
}
