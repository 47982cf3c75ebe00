//! Lowering of the assembled min-max / max-min problem to a standard-form
//! conic program over one dense PSD block plus nonnegative scalar blocks.
//!
//! Layout of the conic variable `x`:
//!   `[ svec(U) | t (epigraph, only when L > 1) | s_1..s_L | w_1..w_K ]`
//! where the scalars are 1x1 PSD blocks. The epigraph scalar `t` may be
//! restricted to be nonnegative because every objective piece is a PSD
//! form, so the extremal piece value is never negative.

use nalgebra::{DMatrix, DVector};

use crate::quadprog::{AssembledSdp, ConstraintSense, ProblemSense};

/// Length of the scaled-vector representation of a symmetric n x n matrix.
pub fn svec_len(n: usize) -> usize {
    n * (n + 1) / 2
}

/// Pack a symmetric matrix into svec form (column-major lower triangle,
/// off-diagonals scaled by sqrt 2, so that dot products equal traces).
pub fn svec(m: &DMatrix<f64>) -> DVector<f64> {
    let n = m.nrows();
    let mut out = DVector::zeros(svec_len(n));
    let mut idx = 0;
    for j in 0..n {
        for i in j..n {
            out[idx] = if i == j {
                m[(i, j)]
            } else {
                std::f64::consts::SQRT_2 * 0.5 * (m[(i, j)] + m[(j, i)])
            };
            idx += 1;
        }
    }
    out
}

/// Inverse of [`svec`].
pub fn smat(v: &[f64], n: usize) -> DMatrix<f64> {
    debug_assert_eq!(v.len(), svec_len(n));
    let mut out = DMatrix::zeros(n, n);
    let mut idx = 0;
    for j in 0..n {
        for i in j..n {
            if i == j {
                out[(i, j)] = v[idx];
            } else {
                let val = v[idx] / std::f64::consts::SQRT_2;
                out[(i, j)] = val;
                out[(j, i)] = val;
            }
            idx += 1;
        }
    }
    out
}

/// Conic standard form `min c'x  s.t.  A x = b, x in K` with
/// `K = PSD(psd_dim) x R+^{n_scalars}`.
#[derive(Debug, Clone)]
pub struct ConicProblem {
    pub psd_dim: usize,
    pub n_scalars: usize,
    pub a: DMatrix<f64>,
    pub b: DVector<f64>,
    pub c: DVector<f64>,
    /// True when the source problem maximizes, i.e. the conic objective is
    /// the negated original one.
    pub negated: bool,
}

impl ConicProblem {
    pub fn dim(&self) -> usize {
        svec_len(self.psd_dim) + self.n_scalars
    }

    pub fn n_constraints(&self) -> usize {
        self.a.nrows()
    }

    /// Total barrier degree of the cone.
    pub fn barrier_degree(&self) -> f64 {
        (self.psd_dim + self.n_scalars) as f64
    }
}

/// Lower an [`AssembledSdp`] to conic standard form.
pub fn lower(sdp: &AssembledSdp) -> ConicProblem {
    let n = sdp.dim;
    let sv = svec_len(n);
    let l = sdp.objective_pieces.len();
    let k = sdp.constraint_pieces.len();
    let epigraph = l > 1;

    // scalar layout: [t?] [s_1..s_L if epigraph] [w_1..w_K]
    let n_scalars = if epigraph { 1 + l + k } else { k };
    let dim = sv + n_scalars;
    let m = if epigraph { l + k + 1 } else { k + 1 };

    let mut a = DMatrix::zeros(m, dim);
    let mut b = DVector::zeros(m);
    let mut c = DVector::zeros(dim);
    let minimize = sdp.sense == ProblemSense::MinimizeMax;

    let t_col = sv;
    let slack_col = sv + 1;
    let w_col = if epigraph { sv + 1 + l } else { sv };

    let mut row = 0;
    if epigraph {
        // epigraph rows: Tr(P_l U) - t +/- s_l = 0
        for (li, piece) in sdp.objective_pieces.iter().enumerate() {
            a.view_mut((row, 0), (1, sv))
                .copy_from(&svec(&piece.m).transpose());
            a[(row, t_col)] = -1.0;
            // min-max: Tr(P U) <= t  ->  + slack; max-min: Tr(P U) >= t -> - slack
            a[(row, slack_col + li)] = if minimize { 1.0 } else { -1.0 };
            row += 1;
        }
        c[t_col] = if minimize { 1.0 } else { -1.0 };
    } else {
        let obj = svec(&sdp.objective_pieces[0].m);
        let sign = if minimize { 1.0 } else { -1.0 };
        c.rows_mut(0, sv).copy_from(&(sign * obj));
    }

    for (ki, piece) in sdp.constraint_pieces.iter().enumerate() {
        a.view_mut((row, 0), (1, sv))
            .copy_from(&svec(&piece.form.m).transpose());
        a[(row, w_col + ki)] = match piece.sense {
            ConstraintSense::Ge => -1.0,
            ConstraintSense::Le => 1.0,
        };
        b[row] = piece.bound;
        row += 1;
    }

    // homogenization: U[n-1, n-1] = 1
    let mut e = DMatrix::zeros(n, n);
    e[(n - 1, n - 1)] = 1.0;
    a.view_mut((row, 0), (1, sv)).copy_from(&svec(&e).transpose());
    b[row] = 1.0;

    ConicProblem { psd_dim: n, n_scalars, a, b, c, negated: !minimize }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn svec_round_trip_preserves_traces() {
        let a = DMatrix::from_row_slice(3, 3, &[2.0, 1.0, 0.5, 1.0, 3.0, -1.0, 0.5, -1.0, 4.0]);
        let b = DMatrix::from_row_slice(3, 3, &[1.0, 0.2, 0.0, 0.2, -2.0, 0.7, 0.0, 0.7, 5.0]);
        let sa = svec(&a);
        let sb = svec(&b);
        assert_relative_eq!(sa.dot(&sb), (&a * &b).trace(), epsilon = 1e-12);
        assert_relative_eq!(smat(sa.as_slice(), 3), a, epsilon = 1e-12);
    }
}
