//! Semidefinite relaxation machinery: solve the relaxed design problems,
//! reduce solution rank constructively, extract rank-one inputs when
//! possible, otherwise recover feasible inputs by Gaussian randomization
//! with an exact line search, and compute approximation-quality bounds.

pub mod conic;
mod lines;
pub mod solver;

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::Serialize;

use crate::discrim::all_pairs;
use crate::error::{Error, Result};
use crate::lift::ModelSet;
use crate::quadprog::{
    homogenize, v_value, z_value, AssembledSdp, ConstraintSense, DesignSpec, Direction,
    ProblemSense, VKind,
};
use crate::rng::CounterRng;

pub use solver::SolveOptions;

use lines::{ge_set, le_set, IntervalSet, LineQuad};

/// Eigenvalues below `lambda_max * RANK_TOL` do not count toward the
/// numerical rank.
const RANK_TOL: f64 = 1e-7;

/// Eigenvalue clip when factoring `U11 - q q'` into `Q* Q*'`.
const FACTOR_CLIP: f64 = 1e-10;

/// A solved relaxation: the PSD matrix, its objective in the original
/// problem's sense, and the stochastic factorization
/// `U = [[Q Q' + q q', q], [q', 1]]`.
#[derive(Debug, Clone)]
pub struct SdpSolution {
    pub u: DMatrix<f64>,
    /// Relaxation optimum in the original sense (a max for traditional
    /// problems), in the SDP's squared units.
    pub objective: f64,
    /// Relative duality gap at termination.
    pub duality_gap: f64,
    /// Numerical rank of `u` at tolerance `lambda_max * 1e-7`.
    pub rank: usize,
    /// Covariance factor `Q*` (T x k); empty for rank-one solutions.
    pub q_factor: DMatrix<f64>,
    /// Mean vector `q*` (T).
    pub q_center: DVector<f64>,
    pub iterations: usize,
}

/// Eigen-pairs of a symmetric matrix sorted by descending eigenvalue.
fn sorted_eigen(m: &DMatrix<f64>) -> (Vec<f64>, DMatrix<f64>) {
    let eig = m.clone().symmetric_eigen();
    let n = m.nrows();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[j].partial_cmp(&eig.eigenvalues[i]).unwrap());
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = DMatrix::from_fn(n, n, |r, c| eig.eigenvectors[(r, order[c])]);
    (values, vectors)
}

impl SdpSolution {
    /// Build from a PSD matrix with unit homogenization entry.
    pub fn from_u(
        u_raw: &DMatrix<f64>,
        objective: f64,
        duality_gap: f64,
        iterations: usize,
    ) -> Self {
        let n = u_raw.nrows();
        let t = n - 1;
        let mut u = 0.5 * (u_raw + u_raw.transpose());
        let corner = u[(t, t)];
        if corner > 0.0 {
            u /= corner;
        }

        let (eigs, _) = sorted_eigen(&u);
        let lambda_max = eigs[0].max(0.0);
        let rank = eigs.iter().filter(|&&l| l > lambda_max * RANK_TOL).count();

        let q_center = DVector::from_fn(t, |i, _| u[(i, t)]);
        let top = u.view((0, 0), (t, t)).into_owned() - &q_center * q_center.transpose();
        let (tv, tw) = sorted_eigen(&top);
        let k = tv.iter().filter(|&&l| l > FACTOR_CLIP).count();
        let mut q_factor = DMatrix::zeros(t, k);
        for c in 0..k {
            let col = tw.column(c) * tv[c].sqrt();
            q_factor.set_column(c, &col);
        }

        Self { u, objective, duality_gap, rank, q_factor, q_center, iterations }
    }

    /// `lambda_2 / lambda_1` of `u` (0 for genuinely rank-one matrices).
    pub fn eigenvalue_ratio(&self) -> f64 {
        let (eigs, _) = sorted_eigen(&self.u);
        if eigs[0] <= 0.0 {
            return f64::INFINITY;
        }
        if eigs.len() < 2 {
            return 0.0;
        }
        eigs[1].abs() / eigs[0]
    }
}

/// Evaluate the extremal objective of `problem` at matrix `u`.
fn sdp_objective(problem: &AssembledSdp, u: &DMatrix<f64>) -> f64 {
    let traces = problem.objective_pieces.iter().map(|p| p.trace_with(u));
    match problem.sense {
        ProblemSense::MinimizeMax => traces.fold(f64::NEG_INFINITY, f64::max),
        ProblemSense::MaximizeMin => traces.fold(f64::INFINITY, f64::min),
    }
}

/// Solve the relaxation with explicit options.
pub fn solve_sdp_with(problem: &AssembledSdp, opts: &SolveOptions) -> Result<SdpSolution> {
    let prob = conic::lower(problem);
    let sol = solver::solve_conic(&prob, opts)?;
    let sv = conic::svec_len(prob.psd_dim);
    let u = conic::smat(&sol.x.as_slice()[..sv], prob.psd_dim);
    let objective = if prob.negated { -sol.primal_obj } else { sol.primal_obj };
    Ok(SdpSolution::from_u(&u, objective, sol.rel_gap, sol.iterations))
}

/// Solve the relaxation to relative duality gap `tol`.
pub fn solve_sdp(problem: &AssembledSdp, tol: f64) -> Result<SdpSolution> {
    solve_sdp_with(problem, &SolveOptions { gap_tol: tol, ..SolveOptions::default() })
}

/// One constructive rank-reduction pass, recording the rank after each
/// accepted step. Every step preserves the active objective piece, all
/// constraint traces, and the homogenization entry, and keeps `U` PSD, so
/// the output is still optimal.
pub fn rank_reduce_traced(
    sol: &SdpSolution,
    problem: &AssembledSdp,
) -> (SdpSolution, Vec<usize>) {
    let n = sol.u.nrows();
    let mut u = sol.u.clone();
    let mut trace = vec![numerical_rank(&u)];

    // matrices whose traces the step must annihilate
    let mut preserved: Vec<DMatrix<f64>> = Vec::new();
    let active = active_objective_piece(problem, &u);
    preserved.push(problem.objective_pieces[active].m.clone());
    for c in &problem.constraint_pieces {
        preserved.push(c.form.m.clone());
    }
    let mut e = DMatrix::zeros(n, n);
    e[(n - 1, n - 1)] = 1.0;
    preserved.push(e);

    let base_obj = sdp_objective(problem, &u);
    let con_base: Vec<f64> = problem
        .constraint_pieces
        .iter()
        .map(|c| c.form.trace_with(&u))
        .collect();

    let accept = |u_new: &DMatrix<f64>, rank: usize| -> bool {
        if numerical_rank(u_new) >= rank {
            return false;
        }
        let obj_new = sdp_objective(problem, u_new);
        let obj_ok = match problem.sense {
            ProblemSense::MinimizeMax => obj_new <= base_obj + 1e-7 * (1.0 + base_obj.abs()),
            ProblemSense::MaximizeMin => obj_new >= base_obj - 1e-7 * (1.0 + base_obj.abs()),
        };
        let traces_ok = problem
            .constraint_pieces
            .iter()
            .zip(&con_base)
            .all(|(c, &t0)| (c.form.trace_with(u_new) - t0).abs() <= 1e-7 * (1.0 + t0.abs()));
        obj_ok && traces_ok && (u_new[(n - 1, n - 1)] - 1.0).abs() <= 1e-7
    };

    for _ in 0..n + 1 {
        let (eigs, vecs) = sorted_eigen(&u);
        let lambda_max = eigs[0].max(0.0);
        let rank = eigs.iter().filter(|&&l| l > lambda_max * RANK_TOL).count();
        if rank <= 1 {
            break;
        }

        // solver-noise cleanup: drop trailing eigenvalues when doing so
        // provably preserves the objective and every constraint trace
        let r_trunc = eigs.iter().filter(|&&l| l > lambda_max * 1e-6).count().max(1);
        if r_trunc < rank {
            let mut u_new = DMatrix::zeros(n, n);
            for c in 0..r_trunc {
                u_new += eigs[c] * crate::linalg::outer(&vecs.column(c).into_owned());
            }
            let corner = u_new[(n - 1, n - 1)];
            if corner > 0.0 {
                u_new /= corner;
            }
            if accept(&u_new, rank) {
                u = u_new;
                trace.push(numerical_rank(&u));
                continue;
            }
        }

        // factor restricted to the positive eigenspace: F = W_r diag(sqrt l)
        let mut f = DMatrix::zeros(n, rank);
        for c in 0..rank {
            f.set_column(c, &(vecs.column(c) * eigs[c].sqrt()));
        }

        // homogeneous system: Tr(F' M_i F  X) = 0 for all preserved M_i
        let svl = conic::svec_len(rank);
        let mut rows = DMatrix::zeros(preserved.len(), svl);
        for (i, m) in preserved.iter().enumerate() {
            let restricted = f.transpose() * m * &f;
            rows.row_mut(i)
                .copy_from(&conic::svec(&restricted).transpose());
        }
        let gram = rows.transpose() * &rows;
        let (gvals, gvecs) = sorted_eigen(&gram);
        let sigma_max_sq = gvals[0].max(0.0);
        let min_idx = svl - 1;
        if preserved.len() < svl {
            // wide system: exact null space exists
        } else if gvals[min_idx] > sigma_max_sq * 1e-12 {
            break; // only the zero solution
        }
        let null_vec = gvecs.column(min_idx).into_owned();
        let u_hat = conic::smat(null_vec.as_slice(), rank);
        let (hv, _) = sorted_eigen(&u_hat);
        let lead = hv[0];
        let tail = hv[rank - 1];

        let mut candidates = Vec::new();
        if lead > 1e-12 {
            candidates.push(-1.0 / lead);
        }
        if tail < -1e-12 {
            candidates.push(-1.0 / tail);
        }

        let mut stepped = false;
        for &a in &candidates {
            let inner = DMatrix::identity(rank, rank) + a * &u_hat;
            let u_new = &f * inner * f.transpose();
            let u_new = 0.5 * (&u_new + u_new.transpose());
            if accept(&u_new, rank) {
                u = u_new;
                trace.push(numerical_rank(&u));
                stepped = true;
                break;
            }
        }
        if !stepped {
            break;
        }
    }

    let objective = sdp_objective(problem, &u);
    (
        SdpSolution::from_u(&u, objective, sol.duality_gap, sol.iterations),
        trace,
    )
}

/// See [`rank_reduce_traced`].
pub fn rank_reduce(sol: &SdpSolution, problem: &AssembledSdp) -> SdpSolution {
    rank_reduce_traced(sol, problem).0
}

fn numerical_rank(u: &DMatrix<f64>) -> usize {
    let (eigs, _) = sorted_eigen(u);
    let lambda_max = eigs[0].max(0.0);
    eigs.iter().filter(|&&l| l > lambda_max * RANK_TOL).count()
}

fn active_objective_piece(problem: &AssembledSdp, u: &DMatrix<f64>) -> usize {
    let traces: Vec<f64> = problem.objective_pieces.iter().map(|p| p.trace_with(u)).collect();
    let mut best = 0;
    for (i, &t) in traces.iter().enumerate().skip(1) {
        let better = match problem.sense {
            ProblemSense::MinimizeMax => t > traces[best],
            ProblemSense::MaximizeMin => t < traces[best],
        };
        if better {
            best = i;
        }
    }
    best
}

/// Recover the input vector from a numerically rank-one solution, or
/// refuse with the measured eigenvalue ratio.
pub fn extract_rank1(sol: &SdpSolution, tol: f64) -> Result<DVector<f64>> {
    let ratio = sol.eigenvalue_ratio();
    if !(ratio <= tol) {
        return Err(Error::NotRankOne { ratio, tol });
    }
    let (eigs, vecs) = sorted_eigen(&sol.u);
    let n = sol.u.nrows();
    let full = vecs.column(0) * eigs[0].max(0.0).sqrt();
    let last = full[n - 1];
    if last.abs() < 0.5 {
        return Err(Error::NumericalFailure(
            "rank-one factor has a degenerate homogenization entry".into(),
        ));
    }
    Ok(DVector::from_fn(n - 1, |i, _| full[i] / last))
}

/// Outcome of the Gaussian randomization search.
#[derive(Debug, Clone)]
pub struct Randomized {
    pub u: DVector<f64>,
    /// Objective in the SDP's squared units, original sense.
    pub objective: f64,
    /// Number of feasible samples evaluated.
    pub samples_used: usize,
}

/// Homogenized pieces pre-applied to a fixed line center `[q; 1]`.
struct LineContext {
    minimize: bool,
    objs: Vec<(DMatrix<f64>, DVector<f64>, f64)>,
    cons: Vec<(DMatrix<f64>, DVector<f64>, f64, ConstraintSense, f64)>,
}

impl LineContext {
    fn new(problem: &AssembledSdp, center: &DVector<f64>) -> Self {
        let z0 = center.clone().push(1.0);
        let prep = |m: &DMatrix<f64>| {
            let m_z0 = m * &z0;
            let at_q = z0.dot(&m_z0);
            (m.clone(), m_z0, at_q)
        };
        LineContext {
            minimize: problem.sense == ProblemSense::MinimizeMax,
            objs: problem.objective_pieces.iter().map(|p| prep(&p.m)).collect(),
            cons: problem
                .constraint_pieces
                .iter()
                .map(|c| {
                    let (m, m_z0, at_q) = prep(&c.form.m);
                    (m, m_z0, at_q, c.sense, c.bound)
                })
                .collect(),
        }
    }

    /// Exact solution of the 1-D restriction along `center + a * d`: the
    /// best feasible `(objective, a)`, or `None` when the whole line is
    /// infeasible.
    fn search(&self, d: &DVector<f64>) -> Option<(f64, f64)> {
        let zd = d.clone().push(0.0);
        let quad = |m: &DMatrix<f64>, m_z0: &DVector<f64>, at_q: f64| LineQuad {
            c2: zd.dot(&(m * &zd)),
            c1: 2.0 * zd.dot(m_z0),
            c0: at_q,
        };
        let mut feasible = IntervalSet::all();
        for (m, m_z0, at_q, sense, bound) in &self.cons {
            let lq = quad(m, m_z0, *at_q);
            let set = match sense {
                ConstraintSense::Ge => ge_set(&lq, *bound),
                ConstraintSense::Le => le_set(&lq, *bound),
            };
            feasible = feasible.intersect(&set);
            if feasible.is_empty() {
                return None;
            }
        }
        let objs: Vec<LineQuad> = self
            .objs
            .iter()
            .map(|(m, m_z0, at_q)| quad(m, m_z0, *at_q))
            .collect();
        let minimize = self.minimize;
        let objective_at = |a: f64| {
            let vals = objs.iter().map(|o| o.eval(a));
            if minimize {
                vals.fold(f64::NEG_INFINITY, f64::max)
            } else {
                vals.fold(f64::INFINITY, f64::min)
            }
        };

        // candidate points: span endpoints, piece vertices, pairwise
        // crossings, and zero, all clamped into the feasible set
        let mut raw = vec![0.0];
        for o in &objs {
            if let Some(v) = o.vertex() {
                raw.push(v);
            }
        }
        for i in 0..objs.len() {
            for j in (i + 1)..objs.len() {
                raw.extend(objs[i].crossings(&objs[j]));
            }
        }
        let mut best: Option<(f64, f64)> = None;
        {
            let mut consider = |a: f64| {
                if !feasible.contains(a, 1e-9 * (1.0 + a.abs())) {
                    return;
                }
                let val = objective_at(a);
                let better = match &best {
                    None => true,
                    Some((bv, _)) => {
                        if minimize {
                            val < *bv
                        } else {
                            val > *bv
                        }
                    }
                };
                if better {
                    best = Some((val, a));
                }
            };
            for &(lo, hi) in &feasible.spans {
                if lo.is_finite() {
                    consider(lo);
                }
                if hi.is_finite() {
                    consider(hi);
                }
                for &r in &raw {
                    if r.is_finite() {
                        consider(r.clamp(lo.max(-1e300), hi.min(1e300)));
                    }
                }
            }
        }
        best
    }
}

/// Draw `n_samples` feasible candidates `u(a) = a Q* xi + q*`, solving the
/// one-dimensional problem along each sampled line exactly, and keep the
/// best. `early_stop` optionally terminates once the objective passes the
/// given threshold (at most / at least, per the problem sense).
pub fn randomize(
    sol: &SdpSolution,
    problem: &AssembledSdp,
    n_samples: usize,
    seed: u64,
    early_stop: Option<f64>,
) -> Result<Randomized> {
    let minimize = problem.sense == ProblemSense::MinimizeMax;
    let q = &sol.q_center;
    let k_cols = sol.q_factor.ncols();

    // rank-one factor: the line degenerates to the single point q*
    if k_cols == 0 {
        let u = q.clone();
        if problem.feasibility_slack(&u) < -1e-8 {
            return Err(Error::NoFeasibleSample { attempts: 1 });
        }
        let objective = problem.objective_at(&u);
        return Ok(Randomized { u, objective, samples_used: 1 });
    }

    let ctx = LineContext::new(problem, q);
    let search_line = |d: &DVector<f64>| ctx.search(d);

    let max_draws = n_samples.saturating_mul(10).max(1);
    let chunk = 256_usize;
    let mut best: Option<(f64, u64, DVector<f64>)> = None;
    let mut feasible_used = 0_usize;
    let mut draws = 0_usize;

    while feasible_used < n_samples && draws < max_draws {
        let lo = draws as u64;
        let count = chunk.min(max_draws - draws);
        let results: Vec<Option<(f64, u64, f64, Vec<f64>)>> = (0..count as u64)
            .into_par_iter()
            .map(|off| {
                let idx = lo + off;
                let mut rng = CounterRng::derive_indexed(seed, "randomize", idx);
                let xi = DVector::from_vec(rng.normal_vec(k_cols));
                let d = &sol.q_factor * xi;
                search_line(&d).map(|(val, a)| (val, idx, a, d.as_slice().to_vec()))
            })
            .collect();
        draws += count;
        for r in results.into_iter().flatten() {
            if feasible_used >= n_samples {
                break;
            }
            feasible_used += 1;
            let (val, idx, a, d) = r;
            let better = match &best {
                None => true,
                Some((bv, bidx, _)) => {
                    let strictly = if minimize { val < *bv } else { val > *bv };
                    strictly || (val == *bv && idx < *bidx)
                }
            };
            if better {
                let dvec = DVector::from_vec(d);
                best = Some((val, idx, q + a * dvec));
            }
        }
        if let (Some(th), Some((bv, _, _))) = (early_stop, &best) {
            let hit = if minimize { *bv <= th } else { *bv >= th };
            if hit {
                break;
            }
        }
    }

    match best {
        Some((objective, _, u)) => Ok(Randomized { u, objective, samples_used: feasible_used }),
        None => Err(Error::NoFeasibleSample { attempts: draws }),
    }
}

/// Approximation-quality certificates for least-costly worst-case designs.
#[derive(Debug, Clone, Serialize)]
pub struct QualityBounds {
    /// Smallest sum of squared singular values of the scaled pair maps
    /// `G_bar_m Q* / gamma_m`.
    pub rho: f64,
    /// Lower bound on `rho` from the constraint values at `q*`.
    pub rho_lower: f64,
    /// `(sqrt(Z_hat), upper)` bracketing the optimal input-norm measure
    /// `sqrt(Z(u*))`; absent when `rho = 0` or no closed-form upper bound
    /// applies to the chosen measure.
    pub lemma1_interval: Option<(f64, f64)>,
    /// Tightened bracket available when every `eta_bar_m = 0`.
    pub eta_zero_interval: Option<(f64, f64)>,
}

/// Compute the Lemma-1 family of bounds. Returns `None` outside their
/// scope: the least-costly direction with the worst-case discrimination
/// measure and an input-side signal measure.
pub fn quality_bounds(
    sol: &SdpSolution,
    problem: &AssembledSdp,
    spec: &DesignSpec,
) -> Option<QualityBounds> {
    if spec.direction != Direction::LeastCostly
        || spec.v_kind != VKind::WorstCase
        || !spec.z_kind.is_input()
    {
        return None;
    }
    let t = spec.horizon;
    let m_count = problem.constraint_pieces.len();

    // rho = min_m Tr(Q*' A_m Q*) with A_m the input block of the m-th
    // discrimination piece (already scaled by 1 / gamma_m^2)
    let mut rho = f64::INFINITY;
    let mut worst_at_q = f64::NEG_INFINITY;
    let mut eta_all_zero = true;
    let z0 = sol.q_center.clone().push(1.0);
    for c in &problem.constraint_pieces {
        let a_block = c.form.m.view((0, 0), (t, t));
        let mut sum = 0.0;
        for col in 0..sol.q_factor.ncols() {
            let qc = sol.q_factor.column(col);
            sum += (a_block * qc).dot(&qc);
        }
        rho = rho.min(sum);
        let at_q = (z0.transpose() * &c.form.m * &z0)[(0, 0)];
        worst_at_q = worst_at_q.max(at_q);
        let eta_part = c.form.m.view((0, t), (t, 1)).norm();
        if eta_part > 1e-10 * (1.0 + c.form.m.norm()) {
            eta_all_zero = false;
        }
    }
    if !rho.is_finite() {
        return None;
    }
    let rho_lower = 1.0 - worst_at_q;

    let z_hat = sol.objective.max(0.0);
    let lower = z_hat.sqrt();
    let lemma1_interval = if rho > 1e-12 && spec.z_kind == crate::quadprog::ZKind::InputPower {
        let e_term = sol.q_factor.norm() / spec.u_bar; // sqrt(Tr Q Q') / u_bar
        let upper = (27.0 / (std::f64::consts::PI * rho)).sqrt() * (m_count as f64 + 1.0) * e_term
            + sol.q_center.norm() / spec.u_bar;
        Some((lower, upper))
    } else {
        None
    };
    let eta_zero_interval = if eta_all_zero && spec.z_kind == crate::quadprog::ZKind::InputPower {
        let factor = (27.0 / std::f64::consts::PI).sqrt() * m_count as f64;
        Some((lower, factor * lower))
    } else {
        None
    };

    Some(QualityBounds { rho, rho_lower, lemma1_interval, eta_zero_interval })
}

/// How the reported input was recovered from the relaxation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ExtractionMethod {
    Rank1,
    Randomized,
}

/// Final design artifact, serializable to JSON.
#[derive(Debug, Clone, Serialize)]
pub struct DesignResult {
    pub u: Vec<f64>,
    pub z_achieved: f64,
    pub v_achieved: f64,
    /// Relaxation optimum in the SDP's squared units.
    pub sdp_optimum: f64,
    pub relative_gap: f64,
    pub rank: usize,
    pub extraction: ExtractionMethod,
    pub rho: Option<f64>,
    pub rho_lower_bound: Option<f64>,
    pub lemma1_interval: Option<(f64, f64)>,
    pub eta_zero_interval: Option<(f64, f64)>,
    pub samples_used: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, Copy)]
pub struct DesignOptions {
    pub solve: SolveOptions,
    pub n_samples: usize,
    pub seed: u64,
    /// Eigenvalue-ratio tolerance for direct rank-one extraction.
    pub rank1_tol: f64,
    /// Optional early-stop threshold for the randomization search.
    pub early_stop: Option<f64>,
}

impl Default for DesignOptions {
    fn default() -> Self {
        Self {
            solve: SolveOptions::default(),
            n_samples: 1000,
            seed: 0,
            rank1_tol: 1e-6,
            early_stop: None,
        }
    }
}

/// Everything the pipeline produced, including solver diagnostics.
#[derive(Debug, Clone)]
pub struct DesignOutput {
    pub result: DesignResult,
    /// The (rank-reduced) relaxation solution behind the result.
    pub solution: SdpSolution,
    pub rank_trajectory: Vec<usize>,
    pub u: DVector<f64>,
}

/// Full design pipeline: homogenize, solve the relaxation, reduce rank,
/// then extract a rank-one input or fall back to randomization.
pub fn design(set: &ModelSet, spec: &DesignSpec, opts: &DesignOptions) -> Result<DesignOutput> {
    let pairs = all_pairs(set)?;
    let problem = homogenize(spec, set, &pairs)?;
    let sol0 = solve_sdp_with(&problem, &opts.solve)?;
    let (sol, rank_trajectory) = rank_reduce_traced(&sol0, &problem);

    let (mut u, samples_used, extraction) = match extract_rank1(&sol, opts.rank1_tol) {
        Ok(u) => (u, 0, ExtractionMethod::Rank1),
        Err(Error::NotRankOne { .. }) => {
            let r = randomize(&sol, &problem, opts.n_samples, opts.seed, opts.early_stop)?;
            (r.u, r.samples_used, ExtractionMethod::Randomized)
        }
        Err(e) => return Err(e),
    };

    // A rank-one factor can sit a duality-gap's worth outside the feasible
    // set; rescale it radially with the exact line search.
    if problem.feasibility_slack(&u) < 0.0 && u.norm() > 0.0 {
        let ctx = LineContext::new(&problem, &DVector::zeros(u.len()));
        if let Some((_, a)) = ctx.search(&u) {
            u *= a;
        }
    }

    let slack = problem.feasibility_slack(&u);
    if slack < -1e-8 {
        return Err(Error::NumericalFailure(format!(
            "recovered input violates the original constraints (slack {slack:.3e})"
        )));
    }

    let bounds = quality_bounds(&sol, &problem, spec);
    let result = DesignResult {
        u: u.iter().copied().collect(),
        z_achieved: z_value(spec, set, &u),
        v_achieved: v_value(spec, &pairs, &u),
        sdp_optimum: sol.objective,
        relative_gap: sol.duality_gap,
        rank: sol.rank,
        extraction,
        rho: bounds.as_ref().map(|b| b.rho),
        rho_lower_bound: bounds.as_ref().map(|b| b.rho_lower),
        lemma1_interval: bounds.as_ref().and_then(|b| b.lemma1_interval),
        eta_zero_interval: bounds.as_ref().and_then(|b| b.eta_zero_interval),
        samples_used,
        seed: opts.seed,
    };
    Ok(DesignOutput { result, solution: sol, rank_trajectory, u })
}
