//! Small dense-matrix helpers shared across modules.

use nalgebra::{DMatrix, DVector};

/// Moore-Penrose pseudo-inverse with the usual SVD cutoff:
/// singular values below `max_dim * sigma_max * 1e-12` are treated as zero.
pub fn pinv(m: &DMatrix<f64>) -> DMatrix<f64> {
    if m.nrows() == 0 || m.ncols() == 0 {
        return DMatrix::zeros(m.ncols(), m.nrows());
    }
    let svd = m.clone().svd(true, true);
    let sigma_max = svd.singular_values.max();
    let eps = m.nrows().max(m.ncols()) as f64 * sigma_max * 1e-12;
    svd.pseudo_inverse(eps)
        .expect("SVD computed with both factors")
}

/// Largest singular value (the induced 2-norm).
pub fn spectral_norm(m: &DMatrix<f64>) -> f64 {
    if m.nrows() == 0 || m.ncols() == 0 {
        return 0.0;
    }
    m.clone().singular_values().max()
}

/// Force exact symmetry: (M + M') / 2.
pub fn symmetrize(m: &DMatrix<f64>) -> DMatrix<f64> {
    0.5 * (m + m.transpose())
}

/// Outer product v v'.
pub fn outer(v: &DVector<f64>) -> DMatrix<f64> {
    v * v.transpose()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn pinv_of_wide_full_rank_is_right_inverse() {
        let m = DMatrix::from_row_slice(2, 4, &[1.0, 2.0, 0.0, 1.0, 0.0, 1.0, 3.0, -1.0]);
        let p = pinv(&m);
        let id = &m * &p;
        assert_relative_eq!(id, DMatrix::identity(2, 2), epsilon = 1e-12);
    }

    #[test]
    fn pinv_handles_rank_deficiency() {
        // rank-1 matrix
        let m = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 4.0]);
        let p = pinv(&m);
        // Penrose conditions: M P M = M and P M P = P
        assert_relative_eq!(&m * &p * &m, m, epsilon = 1e-10);
        assert_relative_eq!(&p * &m * &p, p, epsilon = 1e-10);
    }

    #[test]
    fn spectral_norm_matches_hand_value() {
        let m = DMatrix::from_row_slice(2, 2, &[3.0, 0.0, 0.0, -4.0]);
        assert_relative_eq!(spectral_norm(&m), 4.0, epsilon = 1e-12);
    }
}
