//! Candidate model representation, zero-order-hold discretization, and the
//! finite-horizon lifted form.
//!
//! A length-T experiment turns each causal SISO model into matrices acting
//! on stacked signals: `y = G u + Psi x + H s` with `G`, `H` lower-triangular
//! Toeplitz and `Psi` the extended observability matrix. The disturbance
//! dynamics are monic, so `H` has a unit diagonal and is always invertible.

use nalgebra::{DMatrix, DVector, RowDVector};
use serde::Deserialize;

use crate::error::{Error, Result};
use crate::linalg::pinv;

/// Disturbance dynamics. Must be monic (leading impulse-response
/// coefficient exactly 1) so the lifted `H` is unit lower-triangular.
#[derive(Debug, Clone, PartialEq)]
pub enum NoiseModel {
    /// White noise enters the output directly (H = I).
    Identity,
    /// Monic impulse response `h[0] = 1, h[1], ...`; implicitly zero-padded.
    ImpulseResponse(Vec<f64>),
    /// Monic state-space filter (d must be 1), zero initial condition.
    StateSpace {
        a: DMatrix<f64>,
        b: DVector<f64>,
        c: RowDVector<f64>,
        d: f64,
    },
}

impl NoiseModel {
    fn validate(&self) -> Result<()> {
        match self {
            NoiseModel::Identity => Ok(()),
            NoiseModel::ImpulseResponse(h) => {
                if h.first().copied() != Some(1.0) {
                    return Err(Error::InvalidParameter(
                        "noise impulse response must be monic (h[0] == 1)".into(),
                    ));
                }
                Ok(())
            }
            NoiseModel::StateSpace { a, b, c, d } => {
                if *d != 1.0 {
                    return Err(Error::InvalidParameter(
                        "noise state-space model must be monic (d == 1)".into(),
                    ));
                }
                let n = a.nrows();
                if a.ncols() != n || b.len() != n || c.len() != n {
                    return Err(Error::DimensionMismatch(
                        "noise state-space dimensions inconsistent".into(),
                    ));
                }
                Ok(())
            }
        }
    }

    /// First `len` impulse-response coefficients.
    fn impulse(&self, len: usize) -> Vec<f64> {
        match self {
            NoiseModel::Identity => {
                let mut h = vec![0.0; len];
                if len > 0 {
                    h[0] = 1.0;
                }
                h
            }
            NoiseModel::ImpulseResponse(coeffs) => {
                let mut h = vec![0.0; len];
                for (hi, &ci) in h.iter_mut().zip(coeffs.iter()) {
                    *hi = ci;
                }
                h
            }
            NoiseModel::StateSpace { a, b, c, d } => {
                let mut h = Vec::with_capacity(len);
                if len > 0 {
                    h.push(*d);
                }
                let mut row = c.clone();
                for _ in 1..len {
                    h.push((&row * b)[0]);
                    row *= a;
                }
                h
            }
        }
    }
}

/// One candidate model: plant (A, B, C, D), disturbance dynamics, and the
/// initial-condition statistics (mean and covariance factor).
#[derive(Debug, Clone)]
pub struct StateSpaceModel {
    pub a: DMatrix<f64>,
    pub b: DVector<f64>,
    pub c: RowDVector<f64>,
    pub d: f64,
    pub noise: NoiseModel,
    pub x_bar: DVector<f64>,
    /// Initial-condition covariance factor (n x r); r = 0 means a
    /// deterministic initial condition.
    pub q: DMatrix<f64>,
    pub label: String,
}

impl StateSpaceModel {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        a: DMatrix<f64>,
        b: DVector<f64>,
        c: RowDVector<f64>,
        d: f64,
        noise: NoiseModel,
        x_bar: DVector<f64>,
        q: DMatrix<f64>,
        label: impl Into<String>,
    ) -> Result<Self> {
        let n = a.nrows();
        if a.ncols() != n {
            return Err(Error::DimensionMismatch("A must be square".into()));
        }
        if b.len() != n || c.len() != n || x_bar.len() != n || q.nrows() != n {
            return Err(Error::DimensionMismatch(format!(
                "B ({}), C ({}), x_bar ({}), Q rows ({}) must all match state dimension {}",
                b.len(),
                c.len(),
                x_bar.len(),
                q.nrows(),
                n
            )));
        }
        noise.validate()?;
        Ok(Self { a, b, c, d, noise, x_bar, q, label: label.into() })
    }

    /// State dimension.
    pub fn order(&self) -> usize {
        self.a.nrows()
    }

    /// Number of columns of the covariance factor Q.
    pub fn ic_dim(&self) -> usize {
        self.q.ncols()
    }
}

/// Exact zero-order-hold discretization of the second-order plant
/// `omega^2 / (s^2 + 2 zeta omega s + omega^2)` in controllable canonical
/// form, sampled every `dt` seconds. Noise defaults to identity.
pub fn zoh_discretize(zeta: f64, omega: f64, dt: f64) -> Result<StateSpaceModel> {
    if !(dt > 0.0) || !(omega > 0.0) || !(zeta >= 0.0) || !dt.is_finite() || !omega.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "require dt > 0, omega > 0, zeta >= 0 (got dt={dt}, omega={omega}, zeta={zeta})"
        )));
    }
    let a_c = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, -omega * omega, -2.0 * zeta * omega]);
    let b_c = DVector::from_row_slice(&[0.0, 1.0]);
    let c = RowDVector::from_row_slice(&[omega * omega, 0.0]);
    let (a_d, b_d) = zoh_pair(&a_c, &b_c, dt);
    StateSpaceModel::new(
        a_d,
        b_d,
        c,
        0.0,
        NoiseModel::Identity,
        DVector::zeros(2),
        DMatrix::zeros(2, 0),
        format!("zoh(zeta={zeta}, omega={omega}, dt={dt})"),
    )
}

/// ZOH discretization of an arbitrary continuous pair via the augmented
/// matrix exponential `exp([[A, B], [0, 0]] dt) = [[Ad, Bd], [0, I]]`.
pub fn zoh_pair(a_c: &DMatrix<f64>, b_c: &DVector<f64>, dt: f64) -> (DMatrix<f64>, DVector<f64>) {
    let n = a_c.nrows();
    let mut aug = DMatrix::zeros(n + 1, n + 1);
    aug.view_mut((0, 0), (n, n)).copy_from(&(a_c * dt));
    aug.view_mut((0, n), (n, 1)).copy_from(&(b_c * dt));
    let e = aug.exp();
    let a_d = e.view((0, 0), (n, n)).into_owned();
    let b_d = DVector::from_fn(n, |i, _| e[(i, n)]);
    (a_d, b_d)
}

/// Horizon-T lifted form of one model.
#[derive(Debug, Clone)]
pub struct LiftedModel {
    /// Input-to-output map, lower-triangular Toeplitz (T x T).
    pub g: DMatrix<f64>,
    /// Initial-condition-to-output map (T x n).
    pub psi: DMatrix<f64>,
    /// Noise-to-output map, unit lower-triangular Toeplitz (T x T).
    pub h: DMatrix<f64>,
    /// Psi * Q (T x r).
    pub psi_q: DMatrix<f64>,
    /// Pseudo-inverse of `[PsiQ  H]` ((r + T) x T).
    pub pinv_block: DMatrix<f64>,
    pub x_bar: DVector<f64>,
    pub horizon: usize,
    /// Dimension of the stacked fictitious vector: T + r.
    pub stacked_dim: usize,
    pub label: String,
}

impl LiftedModel {
    /// The deterministic part of the response, `Psi x_bar`.
    pub fn psi_x_bar(&self) -> DVector<f64> {
        &self.psi * &self.x_bar
    }

    /// The block `[PsiQ  H]` (T x (r + T)).
    pub fn block(&self) -> DMatrix<f64> {
        let t = self.horizon;
        let r = self.psi_q.ncols();
        let mut m = DMatrix::zeros(t, r + t);
        m.view_mut((0, 0), (t, r)).copy_from(&self.psi_q);
        m.view_mut((0, r), (t, t)).copy_from(&self.h);
        m
    }

    pub fn ic_dim(&self) -> usize {
        self.psi_q.ncols()
    }
}

fn lower_toeplitz(first_col: &[f64]) -> DMatrix<f64> {
    let t = first_col.len();
    DMatrix::from_fn(t, t, |i, j| if i >= j { first_col[i - j] } else { 0.0 })
}

/// Build the lifted matrices for a horizon of `t` steps.
///
/// The first column of `G` is the impulse response `[D, CB, CAB, ...]`; the
/// rows of `Psi` are `C A^k` for `k = 0..T-1`; `H` is built the same way
/// from the noise model.
pub fn build_lifted(model: &StateSpaceModel, t: usize) -> Result<LiftedModel> {
    if t == 0 {
        return Err(Error::InvalidParameter("horizon must be at least 1".into()));
    }
    let n = model.order();
    let mut g_col = Vec::with_capacity(t);
    g_col.push(model.d);
    let mut psi = DMatrix::zeros(t, n);
    let mut row = model.c.clone();
    for k in 0..t {
        psi.row_mut(k).copy_from(&row);
        if k + 1 < t {
            g_col.push((&row * &model.b)[0]);
            row *= &model.a;
        }
    }
    let g = lower_toeplitz(&g_col);
    let h = lower_toeplitz(&model.noise.impulse(t));
    let psi_q = &psi * &model.q;
    let r = psi_q.ncols();

    let mut block = DMatrix::zeros(t, r + t);
    block.view_mut((0, 0), (t, r)).copy_from(&psi_q);
    block.view_mut((0, r), (t, t)).copy_from(&h);
    let pinv_block = pinv(&block);

    Ok(LiftedModel {
        g,
        psi,
        h,
        psi_q,
        pinv_block,
        x_bar: model.x_bar.clone(),
        horizon: t,
        stacked_dim: t + r,
        label: model.label.clone(),
    })
}

/// Evaluate `G u + Psi x_bar + PsiQ v + H s`.
pub fn simulate(
    lifted: &LiftedModel,
    u: &DVector<f64>,
    v: &DVector<f64>,
    s: &DVector<f64>,
) -> Result<DVector<f64>> {
    let t = lifted.horizon;
    if u.len() != t || s.len() != t || v.len() != lifted.ic_dim() {
        return Err(Error::DimensionMismatch(format!(
            "simulate expects u, s of length {t} and v of length {}; got {}, {}, {}",
            lifted.ic_dim(),
            u.len(),
            s.len(),
            v.len()
        )));
    }
    Ok(&lifted.g * u + lifted.psi_x_bar() + &lifted.psi_q * v + &lifted.h * s)
}

/// A finite family of lifted models sharing one horizon, together with the
/// noise bound and significance level used by the hypothesis tests.
#[derive(Debug, Clone)]
pub struct ModelSet {
    pub models: Vec<LiftedModel>,
    pub sigma_bar: f64,
    pub alpha: f64,
}

impl ModelSet {
    pub fn new(models: Vec<LiftedModel>, sigma_bar: f64, alpha: f64) -> Result<Self> {
        if models.len() < 2 {
            return Err(Error::InvalidParameter(
                "a model set needs at least two members".into(),
            ));
        }
        let t = models[0].horizon;
        if models.iter().any(|m| m.horizon != t) {
            return Err(Error::DimensionMismatch(
                "all models in a set must share the same horizon".into(),
            ));
        }
        if !(sigma_bar >= 0.0) {
            return Err(Error::InvalidParameter("sigma_bar must be >= 0".into()));
        }
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(Error::InvalidParameter("alpha must lie in (0, 1)".into()));
        }
        Ok(Self { models, sigma_bar, alpha })
    }

    pub fn from_models(
        models: &[StateSpaceModel],
        horizon: usize,
        sigma_bar: f64,
        alpha: f64,
    ) -> Result<Self> {
        let lifted = models
            .iter()
            .map(|m| build_lifted(m, horizon))
            .collect::<Result<Vec<_>>>()?;
        Self::new(lifted, sigma_bar, alpha)
    }

    pub fn len(&self) -> usize {
        self.models.len()
    }

    pub fn is_empty(&self) -> bool {
        self.models.is_empty()
    }

    pub fn horizon(&self) -> usize {
        self.models[0].horizon
    }
}

// ---------------------------------------------------------------------------
// JSON model bank
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SecondOrderSpec {
    pub zeta: f64,
    pub omega: f64,
    pub dt: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum NoiseSpec {
    Named(String),
    Impulse { impulse_response: Vec<f64> },
}

/// One entry of the JSON model bank: either a continuous second-order plant
/// to be discretized, or explicit discrete matrices.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelBankEntry {
    #[serde(default)]
    pub continuous_second_order: Option<SecondOrderSpec>,
    #[serde(rename = "A", default)]
    pub a: Option<Vec<Vec<f64>>>,
    #[serde(rename = "B", default)]
    pub b: Option<Vec<f64>>,
    #[serde(rename = "C", default)]
    pub c: Option<Vec<f64>>,
    #[serde(rename = "D", default)]
    pub d: Option<f64>,
    pub x_bar: Vec<f64>,
    #[serde(rename = "Q")]
    pub q: Vec<Vec<f64>>,
    #[serde(default)]
    pub noise: Option<NoiseSpec>,
    pub label: String,
}

fn rows_to_matrix(rows: &[Vec<f64>], what: &str) -> Result<DMatrix<f64>> {
    let nrows = rows.len();
    let ncols = rows.first().map_or(0, Vec::len);
    if rows.iter().any(|r| r.len() != ncols) {
        return Err(Error::Config(format!("{what}: ragged row lengths")));
    }
    Ok(DMatrix::from_fn(nrows, ncols, |i, j| rows[i][j]))
}

impl ModelBankEntry {
    pub fn to_model(&self) -> Result<StateSpaceModel> {
        let noise = match &self.noise {
            None => NoiseModel::Identity,
            Some(NoiseSpec::Named(name)) if name == "identity" => NoiseModel::Identity,
            Some(NoiseSpec::Named(name)) => {
                return Err(Error::Config(format!("unknown noise model \"{name}\"")));
            }
            Some(NoiseSpec::Impulse { impulse_response }) => {
                NoiseModel::ImpulseResponse(impulse_response.clone())
            }
        };
        let x_bar = DVector::from_column_slice(&self.x_bar);
        let n = x_bar.len();
        let q = if self.q.is_empty() {
            DMatrix::zeros(n, 0)
        } else {
            rows_to_matrix(&self.q, "Q")?
        };

        match (&self.continuous_second_order, &self.a) {
            (Some(so), None) => {
                let base = zoh_discretize(so.zeta, so.omega, so.dt)?;
                StateSpaceModel::new(base.a, base.b, base.c, base.d, noise, x_bar, q, &self.label)
            }
            (None, Some(_)) => {
                let a = rows_to_matrix(self.a.as_ref().unwrap(), "A")?;
                let b = self
                    .b
                    .as_ref()
                    .ok_or_else(|| Error::Config("explicit model needs \"B\"".into()))?;
                let c = self
                    .c
                    .as_ref()
                    .ok_or_else(|| Error::Config("explicit model needs \"C\"".into()))?;
                let d = self
                    .d
                    .ok_or_else(|| Error::Config("explicit model needs \"D\"".into()))?;
                StateSpaceModel::new(
                    a,
                    DVector::from_column_slice(b),
                    RowDVector::from_row_slice(c),
                    d,
                    noise,
                    x_bar,
                    q,
                    &self.label,
                )
            }
            (Some(_), Some(_)) => Err(Error::Config(
                "model entry must not mix continuous_second_order with explicit matrices".into(),
            )),
            (None, None) => Err(Error::Config(
                "model entry needs continuous_second_order or explicit A/B/C/D".into(),
            )),
        }
    }
}

/// Parse a JSON array of model-bank entries.
pub fn load_model_bank(json: &str) -> Result<Vec<StateSpaceModel>> {
    let entries: Vec<ModelBankEntry> = serde_json::from_str(json)?;
    entries.iter().map(ModelBankEntry::to_model).collect()
}
