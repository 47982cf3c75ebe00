//! Dense primal-dual path-following solver for the conic problems produced
//! by [`super::conic::lower`].
//!
//! The implementation is a homogeneous self-dual embedding with
//! Nesterov-Todd scaling and a Mehrotra predictor-corrector, specialized to
//! one dense PSD block plus nonnegative scalars. Infeasible and unbounded
//! problems terminate with certificates instead of an optimal point. The
//! Newton system is reduced to an m x m Schur complement (m = number of
//! linear constraints), which is small for every problem this crate builds.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

use super::conic::{smat, svec_len, ConicProblem};

#[derive(Debug, Clone, Copy)]
pub struct SolveOptions {
    /// Relative duality-gap tolerance.
    pub gap_tol: f64,
    /// Relative primal/dual feasibility tolerance.
    pub feas_tol: f64,
    /// Certificate residual tolerance for infeasibility detection.
    pub infeas_tol: f64,
    pub max_iter: usize,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self { gap_tol: 1e-7, feas_tol: 1e-8, infeas_tol: 1e-8, max_iter: 100 }
    }
}

/// Optimal primal-dual pair, already normalized by tau.
#[derive(Debug, Clone)]
pub struct ConicSolution {
    pub x: DVector<f64>,
    pub y: DVector<f64>,
    pub s: DVector<f64>,
    pub primal_obj: f64,
    pub dual_obj: f64,
    pub rel_gap: f64,
    pub iterations: usize,
}

/// Nesterov-Todd scaling for the product cone.
struct Scaling {
    /// PSD block: factor R with R' S R = R^{-1} X R^{-T} = diag(lambda).
    r: DMatrix<f64>,
    r_inv: DMatrix<f64>,
    /// W = R R'.
    w: DMatrix<f64>,
    lambda_psd: DVector<f64>,
    /// Scalar blocks: omega_i = sqrt(x_i / s_i), lambda_i = sqrt(x_i s_i).
    omega: Vec<f64>,
    lambda_sc: Vec<f64>,
}

/// A direction or point expressed in the scaled space: one symmetric matrix
/// for the PSD block and one value per scalar block.
struct Scaled {
    psd: DMatrix<f64>,
    sc: Vec<f64>,
}

fn trace_enabled() -> bool {
    static ENABLED: std::sync::OnceLock<bool> = std::sync::OnceLock::new();
    *ENABLED.get_or_init(|| std::env::var("PROBE_SDP_TRACE").ok().as_deref() == Some("1"))
}

/// Factor a symmetric PD matrix as F F'. Cholesky with an eigenvalue
/// fallback for marginally indefinite inputs.
fn pd_factor(m: &DMatrix<f64>) -> DMatrix<f64> {
    if let Some(chol) = m.clone().cholesky() {
        return chol.l();
    }
    let eig = m.clone().symmetric_eigen();
    let max_eig = eig.eigenvalues.amax();
    let floor = max_eig.max(1.0) * 1e-14;
    let sqrt_vals = eig.eigenvalues.map(|v| v.max(floor).sqrt());
    &eig.eigenvectors * DMatrix::from_diagonal(&sqrt_vals)
}

struct Solver<'a> {
    prob: &'a ConicProblem,
    opts: SolveOptions,
    sv: usize,
    n: usize,
    n_sc: usize,
    nu: f64,
}

impl<'a> Solver<'a> {
    fn new(prob: &'a ConicProblem, opts: SolveOptions) -> Self {
        let n = prob.psd_dim;
        Self {
            prob,
            opts,
            sv: svec_len(n),
            n,
            n_sc: prob.n_scalars,
            nu: prob.barrier_degree(),
        }
    }

    fn psd_of<'v>(&self, v: &'v DVector<f64>) -> DMatrix<f64> {
        smat(&v.as_slice()[..self.sv], self.n)
    }

    fn identity_point(&self) -> DVector<f64> {
        let mut v = DVector::zeros(self.prob.dim());
        let mut idx = 0;
        for j in 0..self.n {
            for i in j..self.n {
                if i == j {
                    v[idx] = 1.0;
                }
                idx += 1;
            }
        }
        for i in 0..self.n_sc {
            v[self.sv + i] = 1.0;
        }
        v
    }

    fn compute_scaling(&self, x: &DVector<f64>, s: &DVector<f64>) -> Scaling {
        let (r, r_inv, w, lambda_psd) = if self.n == 0 {
            let empty = DMatrix::zeros(0, 0);
            (empty.clone(), empty.clone(), empty, DVector::zeros(0))
        } else {
            let xm = self.psd_of(x);
            let sm = self.psd_of(s);
            let fx = pd_factor(&xm);
            let fs = pd_factor(&sm);
            let m = fs.transpose() * &fx;
            let svd = m.svd(true, true);
            let u = svd.u.as_ref().expect("svd with u");
            let vt = svd.v_t.as_ref().expect("svd with v_t");
            let sigma_inv_sqrt =
                DMatrix::from_diagonal(&svd.singular_values.map(|v| 1.0 / v.max(1e-300).sqrt()));
            let r = &fx * vt.transpose() * &sigma_inv_sqrt;
            let r_inv = &sigma_inv_sqrt * u.transpose() * fs.transpose();
            let w = &r * r.transpose();
            (r, r_inv, w, svd.singular_values.clone_owned())
        };

        let mut omega = Vec::with_capacity(self.n_sc);
        let mut lambda_sc = Vec::with_capacity(self.n_sc);
        for i in 0..self.n_sc {
            let (xi, si) = (x[self.sv + i], s[self.sv + i]);
            omega.push((xi / si).sqrt());
            lambda_sc.push((xi * si).sqrt());
        }
        Scaling { r, r_inv, w, lambda_psd, omega, lambda_sc }
    }

    /// Apply W(.) = blkdiag(W . W, omega_i^2 .), mapping dx-space to itself.
    fn w_apply(&self, sc: &Scaling, v: &DVector<f64>) -> DVector<f64> {
        let vm = self.psd_of(v);
        let wm = &sc.w * vm * &sc.w;
        let mut out = DVector::zeros(self.prob.dim());
        out.rows_mut(0, self.sv)
            .copy_from(&super::conic::svec(&wm));
        for i in 0..self.n_sc {
            out[self.sv + i] = sc.omega[i] * sc.omega[i] * v[self.sv + i];
        }
        out
    }

    /// x-space scaling: R^{-1} mat(v) R^{-T}, v_i / omega_i.
    fn scale_x(&self, sc: &Scaling, v: &DVector<f64>) -> Scaled {
        let psd = &sc.r_inv * self.psd_of(v) * sc.r_inv.transpose();
        let scv = (0..self.n_sc)
            .map(|i| v[self.sv + i] / sc.omega[i])
            .collect();
        Scaled { psd: 0.5 * (&psd + psd.transpose()), sc: scv }
    }

    /// s-space scaling: R' mat(v) R, omega_i * v_i.
    fn scale_s(&self, sc: &Scaling, v: &DVector<f64>) -> Scaled {
        let psd = sc.r.transpose() * self.psd_of(v) * &sc.r;
        let scv = (0..self.n_sc)
            .map(|i| v[self.sv + i] * sc.omega[i])
            .collect();
        Scaled { psd: 0.5 * (&psd + psd.transpose()), sc: scv }
    }

    /// Map a scaled-space dual quantity back: svec(R^{-T} M R^{-1}), m_i / omega_i.
    fn unscale_dual(&self, sc: &Scaling, v: &Scaled) -> DVector<f64> {
        let m = sc.r_inv.transpose() * &v.psd * &sc.r_inv;
        let sym = 0.5 * (&m + m.transpose());
        let mut out = DVector::zeros(self.prob.dim());
        out.rows_mut(0, self.sv)
            .copy_from(&super::conic::svec(&sym));
        for i in 0..self.n_sc {
            out[self.sv + i] = v.sc[i] / sc.omega[i];
        }
        out
    }

    /// Largest step alpha with (scaled point) + alpha * direction staying in
    /// the cone, for one scaled direction against diag(lambda).
    fn step_bound_scaled(&self, sc: &Scaling, d: &Scaled) -> f64 {
        let mut bound = f64::INFINITY;
        if self.n > 0 {
            let lam_isqrt = sc.lambda_psd.map(|l| 1.0 / l.max(1e-300).sqrt());
            let scaled = DMatrix::from_fn(self.n, self.n, |i, j| {
                d.psd[(i, j)] * lam_isqrt[i] * lam_isqrt[j]
            });
            let min_eig = scaled.symmetric_eigenvalues().min();
            if min_eig < 0.0 {
                bound = bound.min(-1.0 / min_eig);
            }
        }
        for i in 0..self.n_sc {
            if d.sc[i] < 0.0 {
                bound = bound.min(-sc.lambda_sc[i] / d.sc[i]);
            }
        }
        bound
    }

    fn solve(&self) -> Result<ConicSolution> {
        let prob = self.prob;
        let m = prob.n_constraints();
        let dim = prob.dim();
        let a = &prob.a;
        let b = &prob.b;
        let c = &prob.c;

        let mut x = self.identity_point();
        let mut s = self.identity_point();
        let mut y = DVector::zeros(m);
        let mut tau = 1.0_f64;
        let mut kappa = 1.0_f64;

        let norm_b = 1.0 + b.norm();
        let norm_c = 1.0 + c.norm();

        for iter in 0..self.opts.max_iter {
            // residuals of the homogeneous system
            let rp = a * &x - b * tau;
            let rd = -(a.transpose() * &y) + c * tau - &s;
            let rg = c.dot(&x) - b.dot(&y) + kappa;
            let mu = (x.dot(&s) + tau * kappa) / (self.nu + 1.0);

            // convergence on the de-homogenized point
            let pcost = c.dot(&x) / tau;
            let dcost = b.dot(&y) / tau;
            let x_norm = x.norm() / tau;
            let yz_norm = (y.norm() + s.norm()) / tau;
            let pres = (a * &(&x / tau) - b).norm() / (norm_b + x_norm);
            let dres =
                (-(a.transpose() * &(&y / tau)) + c - &(&s / tau)).norm() / (norm_c + yz_norm);
            let rel_gap = (pcost - dcost).abs() / (1.0 + pcost.abs() + dcost.abs());
            if trace_enabled() {
                eprintln!(
                    "iter {iter:3} pcost {pcost:+.6e} dcost {dcost:+.6e} gap {rel_gap:.2e} \
                     pres {pres:.2e} dres {dres:.2e} mu {mu:.2e} tau {tau:.2e} kappa {kappa:.2e}"
                );
            }
            if pres <= self.opts.feas_tol && dres <= self.opts.feas_tol && rel_gap <= self.opts.gap_tol
            {
                return Ok(ConicSolution {
                    x: &x / tau,
                    y: &y / tau,
                    s: &s / tau,
                    primal_obj: pcost,
                    dual_obj: dcost,
                    rel_gap,
                    iterations: iter,
                });
            }

            // certificates (meaningful once kappa dominates tau)
            if kappa > tau {
                let by = b.dot(&y);
                if by > 0.0 {
                    let res = (a.transpose() * &y + &s).norm() / by;
                    if res <= self.opts.infeas_tol {
                        let cert = (&y / by).iter().copied().collect();
                        return Err(Error::Infeasible { certificate: cert });
                    }
                }
                let cx = c.dot(&x);
                if cx < 0.0 {
                    let res = (a * &x).norm() / (-cx);
                    if res <= self.opts.infeas_tol {
                        let ray = (&x / (-cx)).iter().copied().collect();
                        return Err(Error::Unbounded { ray });
                    }
                }
            }
            if tau < 1e-12 && kappa < 1e-12 {
                return Err(Error::NumericalFailure(
                    "homogeneous embedding collapsed (tau and kappa both vanished)".into(),
                ));
            }

            let sc = self.compute_scaling(&x, &s);

            // Schur complement M = A W A' and shared solves
            let mut wa = DMatrix::zeros(dim, m);
            for j in 0..m {
                let aj = a.row(j).transpose();
                wa.set_column(j, &self.w_apply(&sc, &aj));
            }
            let schur = {
                let msch = a * &wa;
                0.5 * (&msch + msch.transpose())
            };
            let schur_fact = schur
                .clone()
                .cholesky()
                .map(SchurFactor::Chol)
                .unwrap_or_else(|| SchurFactor::Lu(schur.clone().lu()));

            let wc = self.w_apply(&sc, c);
            let awc = a * &wc;
            let cwc = c.dot(&wc);
            let u2 = schur_fact.solve(&(b + &awc));

            let solve_kkt = |r1: &DVector<f64>,
                             r2: &DVector<f64>,
                             r3: f64,
                             dc_lin: &Scaled,
                             dtk: f64|
             -> (DVector<f64>, DVector<f64>, DVector<f64>, f64, f64) {
                let d_vec = self.unscale_dual(&sc, dc_lin);
                let g2 = r2 + &d_vec;
                let wg2 = self.w_apply(&sc, &g2);
                let awg2 = a * &wg2;
                let u1 = schur_fact.solve(&(r1 - &awg2));
                let num =
                    r3 - c.dot(&wg2) - awc.dot(&u1) + b.dot(&u1) - dtk / tau;
                let den = awc.dot(&u2) - b.dot(&u2) - cwc - kappa / tau;
                let dtau = num / den;
                let dy = &u1 + &u2 * dtau;
                let dx = self.w_apply(&sc, &(&g2 + &(a.transpose() * &dy) - c * dtau));
                let ds = -(a.transpose() * &dy) + c * dtau - r2;
                let dkappa = (dtk - kappa * dtau) / tau;
                (dx, dy, ds, dtau, dkappa)
            };

            // predictor (affine) direction
            let lam_mat = DMatrix::from_diagonal(&sc.lambda_psd);
            let dc_aff = Scaled {
                psd: -lam_mat.clone(),
                sc: sc.lambda_sc.iter().map(|l| -l).collect(),
            };
            let (dx_a, _dy_a, ds_a, dtau_a, dkappa_a) =
                solve_kkt(&(-&rp), &(-&rd), -rg, &dc_aff, -tau * kappa);

            let dx_a_sc = self.scale_x(&sc, &dx_a);
            let ds_a_sc = self.scale_s(&sc, &ds_a);
            let mut alpha_aff = self
                .step_bound_scaled(&sc, &dx_a_sc)
                .min(self.step_bound_scaled(&sc, &ds_a_sc));
            if dtau_a < 0.0 {
                alpha_aff = alpha_aff.min(-tau / dtau_a);
            }
            if dkappa_a < 0.0 {
                alpha_aff = alpha_aff.min(-kappa / dkappa_a);
            }
            alpha_aff = alpha_aff.min(1.0);

            let mu_aff = ((&x + &dx_a * alpha_aff).dot(&(&s + &ds_a * alpha_aff))
                + (tau + alpha_aff * dtau_a) * (kappa + alpha_aff * dkappa_a))
                / (self.nu + 1.0);
            let sigma = (mu_aff / mu).powi(3).clamp(0.0, 1.0);

            // combined corrector direction
            let eta = 1.0 - sigma;
            let prod = &dx_a_sc.psd * &ds_a_sc.psd;
            let mut dc_psd = -(&lam_mat * &lam_mat) - 0.5 * (&prod + prod.transpose());
            for i in 0..self.n {
                dc_psd[(i, i)] += sigma * mu;
            }
            let dc_sc: Vec<f64> = (0..self.n_sc)
                .map(|i| {
                    sigma * mu - sc.lambda_sc[i] * sc.lambda_sc[i] - dx_a_sc.sc[i] * ds_a_sc.sc[i]
                })
                .collect();
            // apply L^{-1}: M_ij = 2 d_ij / (lambda_i + lambda_j)
            let dc_lin = Scaled {
                psd: DMatrix::from_fn(self.n, self.n, |i, j| {
                    2.0 * dc_psd[(i, j)] / (sc.lambda_psd[i] + sc.lambda_psd[j])
                }),
                sc: dc_sc
                    .iter()
                    .zip(&sc.lambda_sc)
                    .map(|(d, l)| d / l)
                    .collect(),
            };
            let dtk = sigma * mu - tau * kappa - dtau_a * dkappa_a;
            let (dx, dy, ds, dtau, dkappa) = solve_kkt(
                &(&rp * (-eta)),
                &(&rd * (-eta)),
                -eta * rg,
                &dc_lin,
                dtk,
            );

            let dx_sc = self.scale_x(&sc, &dx);
            let ds_sc = self.scale_s(&sc, &ds);
            let mut alpha = self
                .step_bound_scaled(&sc, &dx_sc)
                .min(self.step_bound_scaled(&sc, &ds_sc));
            if dtau < 0.0 {
                alpha = alpha.min(-tau / dtau);
            }
            if dkappa < 0.0 {
                alpha = alpha.min(-kappa / dkappa);
            }
            alpha = (0.99 * alpha).min(1.0);
            if !alpha.is_finite() || alpha <= 0.0 {
                return Err(Error::NumericalFailure(format!(
                    "step size collapsed at iteration {iter}"
                )));
            }

            x += &dx * alpha;
            s += &ds * alpha;
            y += &dy * alpha;
            tau += alpha * dtau;
            kappa += alpha * dkappa;
        }

        Err(Error::MaxIterations(self.opts.max_iter))
    }
}

enum SchurFactor {
    Chol(nalgebra::Cholesky<f64, nalgebra::Dyn>),
    Lu(nalgebra::LU<f64, nalgebra::Dyn, nalgebra::Dyn>),
}

impl SchurFactor {
    fn solve(&self, rhs: &DVector<f64>) -> DVector<f64> {
        match self {
            SchurFactor::Chol(c) => c.solve(rhs),
            SchurFactor::Lu(lu) => lu.solve(rhs).expect("Schur system solvable"),
        }
    }
}

/// Solve the conic problem; returns the tau-normalized optimal pair or an
/// infeasibility/unboundedness certificate.
pub fn solve_conic(prob: &ConicProblem, opts: &SolveOptions) -> Result<ConicSolution> {
    // equilibrate constraint rows to comparable norms
    let m = prob.n_constraints();
    let mut scales = Vec::with_capacity(m);
    let mut scaled = prob.clone();
    for i in 0..m {
        let norm = prob.a.row(i).norm().max(1e-12);
        scales.push(norm);
        let row = prob.a.row(i) / norm;
        scaled.a.row_mut(i).copy_from(&row);
        scaled.b[i] = prob.b[i] / norm;
    }
    let solver = Solver::new(&scaled, *opts);
    match solver.solve() {
        Ok(mut sol) => {
            for i in 0..m {
                sol.y[i] /= scales[i];
            }
            Ok(sol)
        }
        Err(Error::Infeasible { certificate }) => {
            let cert = certificate
                .iter()
                .zip(&scales)
                .map(|(v, s)| v / s)
                .collect();
            Err(Error::Infeasible { certificate: cert })
        }
        Err(e) => Err(e),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sdr::conic::svec;
    use approx::assert_relative_eq;

    /// min tr(C X) s.t. tr(X) = 1, X psd  -> smallest eigenvalue of C.
    #[test]
    fn smallest_eigenvalue_problem() {
        let c_mat = DMatrix::from_row_slice(3, 3, &[2.0, 1.0, 0.0, 1.0, 3.0, -1.0, 0.0, -1.0, 4.0]);
        let a = svec(&DMatrix::identity(3, 3)).transpose();
        let prob = ConicProblem {
            psd_dim: 3,
            n_scalars: 0,
            a: DMatrix::from_rows(&[a.row(0).into_owned()]),
            b: DVector::from_row_slice(&[1.0]),
            c: svec(&c_mat),
            negated: false,
        };
        let sol = solve_conic(&prob, &SolveOptions::default()).unwrap();
        let min_eig = c_mat.symmetric_eigenvalues().min();
        assert_relative_eq!(sol.primal_obj, min_eig, epsilon = 1e-6);
        assert_relative_eq!(sol.primal_obj, sol.dual_obj, epsilon = 1e-6);
    }

    /// Nonnegative scalars only: a tiny linear program.
    /// min x1 + 2 x2 s.t. x1 + x2 = 1, x >= 0 -> x = (1, 0).
    #[test]
    fn linear_program_via_scalar_blocks() {
        let prob = ConicProblem {
            psd_dim: 0,
            n_scalars: 2,
            a: DMatrix::from_row_slice(1, 2, &[1.0, 1.0]),
            b: DVector::from_row_slice(&[1.0]),
            c: DVector::from_row_slice(&[1.0, 2.0]),
            negated: false,
        };
        let sol = solve_conic(&prob, &SolveOptions::default()).unwrap();
        assert_relative_eq!(sol.primal_obj, 1.0, epsilon = 1e-7);
        assert_relative_eq!(sol.x[0], 1.0, epsilon = 1e-6);
        assert!(sol.x[1].abs() < 1e-6);
    }

    #[test]
    fn infeasible_lp_is_certified() {
        // x1 + x2 = -1, x >= 0 is infeasible
        let prob = ConicProblem {
            psd_dim: 0,
            n_scalars: 2,
            a: DMatrix::from_row_slice(1, 2, &[1.0, 1.0]),
            b: DVector::from_row_slice(&[-1.0]),
            c: DVector::from_row_slice(&[1.0, 1.0]),
            negated: false,
        };
        match solve_conic(&prob, &SolveOptions::default()) {
            Err(Error::Infeasible { certificate }) => {
                // Farkas: A'y <= 0 (so s = -A'y >= 0) and b'y = 1
                let y = certificate[0];
                assert!((-1.0 * y - 1.0).abs() < 1e-6, "b'y should be 1");
                assert!(y <= 0.0);
            }
            other => panic!("expected infeasibility, got {other:?}"),
        }
    }

    #[test]
    fn unbounded_lp_is_certified() {
        // min -x1 s.t. x2 = 1, x >= 0: x1 free to grow
        let prob = ConicProblem {
            psd_dim: 0,
            n_scalars: 2,
            a: DMatrix::from_row_slice(1, 2, &[0.0, 1.0]),
            b: DVector::from_row_slice(&[1.0]),
            c: DVector::from_row_slice(&[-1.0, 0.0]),
            negated: false,
        };
        match solve_conic(&prob, &SolveOptions::default()) {
            Err(Error::Unbounded { ray }) => {
                // improving ray: A ray = 0, c' ray = -1
                assert!(ray[0] > 0.0);
                assert!(ray[1].abs() < 1e-6);
            }
            other => panic!("expected unboundedness, got {other:?}"),
        }
    }

    /// Mixed PSD + scalar: min t s.t. X = t I - C psd via X psd block and
    /// equality rows tying entries. Simpler check: largest eigenvalue via
    /// max tr(CX), tr X = 1 <=> min -tr(CX).
    #[test]
    fn largest_eigenvalue_problem() {
        let c_mat = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 1.0]);
        let prob = ConicProblem {
            psd_dim: 2,
            n_scalars: 0,
            a: DMatrix::from_rows(&[svec(&DMatrix::identity(2, 2)).transpose().row(0).into_owned()]),
            b: DVector::from_row_slice(&[1.0]),
            c: -svec(&c_mat),
            negated: true,
        };
        let sol = solve_conic(&prob, &SolveOptions::default()).unwrap();
        assert_relative_eq!(-sol.primal_obj, 3.0, epsilon = 1e-6);
    }
}
