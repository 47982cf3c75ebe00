//! Signal measures, discrimination measures, and their homogenized
//! quadratic forms, assembled into the generic min-max / max-min
//! semidefinite shape.
//!
//! Every measure is a convex quadratic (or a max/min of convex quadratics)
//! in the input `u`. Homogenizing with the augmented vector `[u; 1]` turns
//! each one into a PSD form on `(T+1) x (T+1)` matrices, so both design
//! directions become linear semidefinite programs once the rank constraint
//! is dropped.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::discrim::PairStats;
use crate::error::{Error, Result};
use crate::lift::ModelSet;

/// Signal-size measure.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ZKind {
    /// `|u|^2 / u_bar^2`
    #[serde(rename = "i2")]
    InputPower,
    /// `max_n |G_n u + Psi_n x_bar|^2 / y_bar^2`
    #[serde(rename = "o2")]
    OutputPower,
    /// `|u|_inf / u_bar`
    #[serde(rename = "iinf")]
    InputAmplitude,
    /// `max_n |G_n u + Psi_n x_bar|_inf / y_bar`
    #[serde(rename = "oinf")]
    OutputAmplitude,
}

impl ZKind {
    pub fn is_input(self) -> bool {
        matches!(self, ZKind::InputPower | ZKind::InputAmplitude)
    }

    pub fn is_amplitude(self) -> bool {
        matches!(self, ZKind::InputAmplitude | ZKind::OutputAmplitude)
    }

    /// Map an SDP-side objective value (always in squared units) back to
    /// the scale of [`z_value`]: amplitude measures take a square root.
    pub fn from_quad_units(self, quad: f64) -> f64 {
        if self.is_amplitude() {
            quad.max(0.0).sqrt()
        } else {
            quad
        }
    }
}

/// Discrimination measure.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum VKind {
    /// Worst pair: `min_m |G_bar_m u + eta_bar_m|^2 / gamma_m^2`
    #[serde(rename = "worst")]
    WorstCase,
    /// Weighted average over pairs.
    #[serde(rename = "avg")]
    WeightedAverage,
}

/// Which problem family to solve.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    /// Minimize the signal measure subject to guaranteed discrimination
    /// (`V >= 1`).
    LeastCostly,
    /// Maximize discrimination subject to the signal budget (`Z <= 1`).
    Traditional,
}

/// Fully-resolved design problem parameters.
#[derive(Debug, Clone)]
pub struct DesignSpec {
    pub z_kind: ZKind,
    pub v_kind: VKind,
    pub direction: Direction,
    pub u_bar: f64,
    pub y_bar: f64,
    /// Per-pair weights for the weighted-average measure; `None` means all 1.
    pub weights: Option<Vec<f64>>,
    pub horizon: usize,
}

impl DesignSpec {
    pub fn weight(&self, m: usize) -> f64 {
        self.weights.as_ref().map_or(1.0, |w| w[m])
    }

    pub fn validate(&self, n_pairs: usize) -> Result<()> {
        if self.z_kind.is_input() && !(self.u_bar > 0.0) {
            return Err(Error::InvalidParameter("u_bar must be positive".into()));
        }
        if !self.z_kind.is_input() && !(self.y_bar > 0.0) {
            return Err(Error::InvalidParameter("y_bar must be positive".into()));
        }
        if let Some(w) = &self.weights {
            if w.len() != n_pairs {
                return Err(Error::DimensionMismatch(format!(
                    "expected {} pair weights, got {}",
                    n_pairs,
                    w.len()
                )));
            }
            if w.iter().any(|&x| !(x > 0.0)) {
                return Err(Error::InvalidParameter("weights must be positive".into()));
            }
        }
        if self.horizon == 0 {
            return Err(Error::InvalidParameter("horizon must be at least 1".into()));
        }
        Ok(())
    }
}

/// The signal measure `Z_a(u)`.
pub fn z_value(spec: &DesignSpec, set: &ModelSet, u: &DVector<f64>) -> f64 {
    match spec.z_kind {
        ZKind::InputPower => u.norm_squared() / (spec.u_bar * spec.u_bar),
        ZKind::InputAmplitude => u.amax() / spec.u_bar,
        ZKind::OutputPower => {
            let worst = set
                .models
                .iter()
                .map(|m| (&m.g * u + m.psi_x_bar()).norm_squared())
                .fold(f64::NEG_INFINITY, f64::max);
            worst / (spec.y_bar * spec.y_bar)
        }
        ZKind::OutputAmplitude => {
            let worst = set
                .models
                .iter()
                .map(|m| (&m.g * u + m.psi_x_bar()).amax())
                .fold(f64::NEG_INFINITY, f64::max);
            worst / spec.y_bar
        }
    }
}

/// The discrimination measure `V_b(u)` over the fixed pair enumeration.
pub fn v_value(spec: &DesignSpec, pairs: &[PairStats], u: &DVector<f64>) -> f64 {
    let terms = pairs.iter().map(|p| {
        let mu = p.g_bar() * u + p.eta_bar();
        mu.norm_squared() / (p.gamma * p.gamma)
    });
    match spec.v_kind {
        VKind::WorstCase => terms.fold(f64::INFINITY, f64::min),
        VKind::WeightedAverage => {
            let m_count = pairs.len() as f64;
            terms
                .enumerate()
                .map(|(m, t)| spec.weight(m) * t)
                .sum::<f64>()
                / m_count
        }
    }
}

/// A homogenized quadratic: symmetric PSD `(T+1) x (T+1)` matrix `M` with
/// `[u; 1]' M [u; 1]` equal to the source quadratic.
#[derive(Debug, Clone)]
pub struct QuadForm {
    pub m: DMatrix<f64>,
}

impl QuadForm {
    pub fn dim(&self) -> usize {
        self.m.nrows()
    }

    /// Evaluate at the homogenized point `[u; 1]`.
    pub fn eval(&self, u: &DVector<f64>) -> f64 {
        let t = self.dim() - 1;
        assert_eq!(u.len(), t, "input length must be T");
        let z = u.clone().push(1.0);
        (z.transpose() * &self.m * z)[(0, 0)]
    }

    /// `Tr(M U)`.
    pub fn trace_with(&self, big_u: &DMatrix<f64>) -> f64 {
        self.m.zip_fold(big_u, 0.0, |acc, a, b| acc + a * b)
    }

    /// Build `scale * [A b]' [A b]` from an affine map `x -> A x + b`.
    fn from_affine(a: &DMatrix<f64>, b: &DVector<f64>, scale: f64) -> Self {
        let t = a.ncols();
        let rows = a.nrows();
        let mut stacked = DMatrix::zeros(rows, t + 1);
        stacked.view_mut((0, 0), (rows, t)).copy_from(a);
        stacked.view_mut((0, t), (rows, 1)).copy_from(b);
        QuadForm { m: scale * stacked.transpose() * stacked }
    }

    /// `diag(e_i e_i', 0) * scale`: one input coordinate squared.
    fn input_coordinate(t: usize, i: usize, scale: f64) -> Self {
        let mut m = DMatrix::zeros(t + 1, t + 1);
        m[(i, i)] = scale;
        QuadForm { m }
    }
}

/// Inequality sense of one SDP constraint piece.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConstraintSense {
    /// `Tr(R U) >= bound`
    Ge,
    /// `Tr(R U) <= bound`
    Le,
}

#[derive(Debug, Clone)]
pub struct ConstraintPiece {
    pub form: QuadForm,
    pub bound: f64,
    pub sense: ConstraintSense,
}

/// Overall optimization sense of the assembled problem.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProblemSense {
    MinimizeMax,
    MaximizeMin,
}

/// The generic relaxed problem: optimize the extremal objective piece over
/// PSD `U` with `U[T, T] = 1` subject to the constraint pieces.
#[derive(Debug, Clone)]
pub struct AssembledSdp {
    pub sense: ProblemSense,
    pub objective_pieces: Vec<QuadForm>,
    pub constraint_pieces: Vec<ConstraintPiece>,
    /// Side length of `U`, i.e. `T + 1`.
    pub dim: usize,
}

impl AssembledSdp {
    /// Objective value of the original (rank-one) problem at input `u`,
    /// in the SDP's squared units.
    pub fn objective_at(&self, u: &DVector<f64>) -> f64 {
        let vals = self.objective_pieces.iter().map(|p| p.eval(u));
        match self.sense {
            ProblemSense::MinimizeMax => vals.fold(f64::NEG_INFINITY, f64::max),
            ProblemSense::MaximizeMin => vals.fold(f64::INFINITY, f64::min),
        }
    }

    /// Worst constraint slack at `u`; nonnegative iff feasible.
    pub fn feasibility_slack(&self, u: &DVector<f64>) -> f64 {
        self.constraint_pieces
            .iter()
            .map(|c| match c.sense {
                ConstraintSense::Ge => c.form.eval(u) - c.bound,
                ConstraintSense::Le => c.bound - c.form.eval(u),
            })
            .fold(f64::INFINITY, f64::min)
    }
}

/// Homogenized discrimination pieces, one per pair, each scaled by
/// `1 / gamma_m^2` (and the averaging weights for the weighted measure).
fn discrimination_pieces(spec: &DesignSpec, pairs: &[PairStats]) -> Vec<QuadForm> {
    match spec.v_kind {
        VKind::WorstCase => pairs
            .iter()
            .map(|p| QuadForm::from_affine(p.g_bar(), p.eta_bar(), 1.0 / (p.gamma * p.gamma)))
            .collect(),
        VKind::WeightedAverage => {
            let m_count = pairs.len() as f64;
            let t = spec.horizon;
            let mut acc = DMatrix::zeros(t + 1, t + 1);
            for (m, p) in pairs.iter().enumerate() {
                let piece = QuadForm::from_affine(
                    p.g_bar(),
                    p.eta_bar(),
                    spec.weight(m) / (m_count * p.gamma * p.gamma),
                );
                acc += piece.m;
            }
            vec![QuadForm { m: acc }]
        }
    }
}

/// Homogenized signal pieces for the chosen `Z` measure. Amplitude
/// measures contribute one piece per coordinate (`|x_i|^2 <= a^2` for every
/// i is equivalent to `|x|_inf <= a`), in squared units.
fn signal_pieces(spec: &DesignSpec, set: &ModelSet) -> Vec<QuadForm> {
    let t = spec.horizon;
    match spec.z_kind {
        ZKind::InputPower => {
            let mut m = DMatrix::identity(t + 1, t + 1) / (spec.u_bar * spec.u_bar);
            m[(t, t)] = 0.0;
            vec![QuadForm { m }]
        }
        ZKind::InputAmplitude => (0..t)
            .map(|i| QuadForm::input_coordinate(t, i, 1.0 / (spec.u_bar * spec.u_bar)))
            .collect(),
        ZKind::OutputPower => set
            .models
            .iter()
            .map(|mo| {
                QuadForm::from_affine(&mo.g, &mo.psi_x_bar(), 1.0 / (spec.y_bar * spec.y_bar))
            })
            .collect(),
        ZKind::OutputAmplitude => {
            let mut pieces = Vec::with_capacity(set.len() * t);
            for mo in &set.models {
                let resp = mo.psi_x_bar();
                for i in 0..t {
                    let row = DMatrix::from_fn(1, t, |_, j| mo.g[(i, j)]);
                    let b = DVector::from_row_slice(&[resp[i]]);
                    pieces.push(QuadForm::from_affine(&row, &b, 1.0 / (spec.y_bar * spec.y_bar)));
                }
            }
            pieces
        }
    }
}

/// Assemble the chosen direction into the generic SDP shape.
///
/// Least-costly: minimize the max signal piece subject to every
/// discrimination piece `>= 1`. Traditional: maximize the min
/// discrimination piece subject to every signal piece `<= 1`.
pub fn homogenize(spec: &DesignSpec, set: &ModelSet, pairs: &[PairStats]) -> Result<AssembledSdp> {
    spec.validate(pairs.len())?;
    if pairs.is_empty() {
        return Err(Error::InvalidParameter("no model pairs to discriminate".into()));
    }
    if set.horizon() != spec.horizon {
        return Err(Error::DimensionMismatch(format!(
            "spec horizon {} differs from model-set horizon {}",
            spec.horizon,
            set.horizon()
        )));
    }
    let v_pieces = discrimination_pieces(spec, pairs);
    let z_pieces = signal_pieces(spec, set);
    let dim = spec.horizon + 1;
    Ok(match spec.direction {
        Direction::LeastCostly => AssembledSdp {
            sense: ProblemSense::MinimizeMax,
            objective_pieces: z_pieces,
            constraint_pieces: v_pieces
                .into_iter()
                .map(|form| ConstraintPiece { form, bound: 1.0, sense: ConstraintSense::Ge })
                .collect(),
            dim,
        },
        Direction::Traditional => AssembledSdp {
            sense: ProblemSense::MaximizeMin,
            objective_pieces: v_pieces,
            constraint_pieces: z_pieces
                .into_iter()
                .map(|form| ConstraintPiece { form, bound: 1.0, sense: ConstraintSense::Le })
                .collect(),
            dim,
        },
    })
}

/// JSON schema for the design section of a run configuration.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DesignConfig {
    pub z: ZKind,
    pub v: VKind,
    pub direction: Direction,
    #[serde(default)]
    pub u_bar: Option<f64>,
    #[serde(default)]
    pub y_bar: Option<f64>,
    #[serde(default)]
    pub weights: Option<Vec<f64>>,
    #[serde(rename = "T")]
    pub horizon: usize,
    pub alpha: f64,
    pub sigma_bar: f64,
}

impl DesignConfig {
    pub fn to_spec(&self) -> Result<DesignSpec> {
        let need_u = self.z.is_input();
        let u_bar = match (need_u, self.u_bar) {
            (true, None) => {
                return Err(Error::Config("input measure selected but \"u_bar\" missing".into()))
            }
            (_, Some(v)) if !(v > 0.0) => {
                return Err(Error::Config("\"u_bar\" must be positive".into()))
            }
            (_, v) => v.unwrap_or(1.0),
        };
        let y_bar = match (need_u, self.y_bar) {
            (false, None) => {
                return Err(Error::Config("output measure selected but \"y_bar\" missing".into()))
            }
            (_, Some(v)) if !(v > 0.0) => {
                return Err(Error::Config("\"y_bar\" must be positive".into()))
            }
            (_, v) => v.unwrap_or(1.0),
        };
        Ok(DesignSpec {
            z_kind: self.z,
            v_kind: self.v,
            direction: self.direction,
            u_bar,
            y_bar,
            weights: self.weights.clone(),
            horizon: self.horizon,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::discrim::all_pairs;
    use crate::lift::{ModelSet, NoiseModel, StateSpaceModel};
    use approx::assert_relative_eq;
    use nalgebra::RowDVector;

    fn scalar_model(a: f64, c: f64, d: f64, x0: f64) -> StateSpaceModel {
        StateSpaceModel::new(
            DMatrix::from_row_slice(1, 1, &[a]),
            DVector::from_row_slice(&[1.0]),
            RowDVector::from_row_slice(&[c]),
            d,
            NoiseModel::Identity,
            DVector::from_row_slice(&[x0]),
            DMatrix::zeros(1, 0),
            "m",
        )
        .unwrap()
    }

    fn spec(z: ZKind, v: VKind, direction: Direction, t: usize) -> DesignSpec {
        DesignSpec {
            z_kind: z,
            v_kind: v,
            direction,
            u_bar: 1.5,
            y_bar: 2.0,
            weights: None,
            horizon: t,
        }
    }

    fn set_of_two(t: usize) -> (ModelSet, Vec<crate::discrim::PairStats>) {
        let m1 = scalar_model(0.5, 1.0, 0.0, 0.3);
        let m2 = scalar_model(0.8, 1.0, 0.2, -0.1);
        let set = ModelSet::from_models(&[m1, m2], t, 1.0, 0.05).unwrap();
        let pairs = all_pairs(&set).unwrap();
        (set, pairs)
    }

    #[test]
    fn z_values_at_zero_input() {
        let (set, _) = set_of_two(3);
        let mut s = spec(ZKind::InputPower, VKind::WorstCase, Direction::LeastCostly, 3);
        let u = DVector::zeros(3);
        assert_eq!(z_value(&s, &set, &u), 0.0);
        s.z_kind = ZKind::InputAmplitude;
        assert_eq!(z_value(&s, &set, &u), 0.0);
    }

    #[test]
    fn input_amplitude_normalizes_by_bound() {
        let (set, _) = set_of_two(3);
        let s = spec(ZKind::InputAmplitude, VKind::WorstCase, Direction::Traditional, 3);
        let u = DVector::from_row_slice(&[1.5, -1.5, 0.0]);
        assert_relative_eq!(z_value(&s, &set, &u), 1.0);
    }

    #[test]
    fn output_power_direct_evaluation() {
        // single pure-gain model g0 = 1: Z_o2 = |u|^2 / y_bar^2
        let m = scalar_model(0.0, 0.0, 1.0, 0.0);
        let set = ModelSet::from_models(&[m.clone(), m], 2, 1.0, 0.05).unwrap();
        let mut s = spec(ZKind::OutputPower, VKind::WorstCase, Direction::Traditional, 2);
        s.y_bar = 5.0;
        let u = DVector::from_row_slice(&[3.0, 4.0]);
        assert_relative_eq!(z_value(&s, &set, &u), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn v_values_combine_pair_terms() {
        // two synthetic pair stats with term values 4 and 9
        let (set, pairs) = set_of_two(3);
        let s = spec(ZKind::InputPower, VKind::WorstCase, Direction::LeastCostly, 3);
        let u = DVector::from_row_slice(&[1.0, 0.5, -0.2]);
        let v = v_value(&s, &pairs, &u);
        let manual = {
            let p = &pairs[0];
            (p.g_bar() * &u + p.eta_bar()).norm_squared() / (p.gamma * p.gamma)
        };
        assert_relative_eq!(v, manual, epsilon = 1e-12);
        let _ = set;
    }

    #[test]
    fn weighted_average_definition_arithmetic() {
        // V_inf = min(4, 9) = 4;  V_2 with unit weights = (4 + 9) / 2 = 6.5
        let vals = [4.0, 9.0];
        assert_eq!(vals.iter().cloned().fold(f64::INFINITY, f64::min), 4.0);
        assert_eq!(vals.iter().sum::<f64>() / 2.0, 6.5);
    }

    #[test]
    fn homogenized_pieces_reproduce_scalars() {
        let (set, pairs) = set_of_two(4);
        for &z in &[
            ZKind::InputPower,
            ZKind::OutputPower,
            ZKind::InputAmplitude,
            ZKind::OutputAmplitude,
        ] {
            let s = spec(z, VKind::WorstCase, Direction::Traditional, 4);
            let sdp = homogenize(&s, &set, &pairs).unwrap();
            let u = DVector::from_row_slice(&[0.7, -0.3, 0.2, 1.1]);
            // max over constraint pieces equals the squared-unit Z value
            let max_piece = sdp
                .constraint_pieces
                .iter()
                .map(|c| c.form.eval(&u))
                .fold(f64::NEG_INFINITY, f64::max);
            let z_val = z_value(&s, &set, &u);
            let expected = if z.is_amplitude() { z_val * z_val } else { z_val };
            assert_relative_eq!(max_piece, expected, epsilon = 1e-10, max_relative = 1e-10);
        }
    }

    #[test]
    fn discrimination_piece_matches_v_value() {
        let (set, pairs) = set_of_two(4);
        let s = spec(ZKind::InputPower, VKind::WorstCase, Direction::LeastCostly, 4);
        let sdp = homogenize(&s, &set, &pairs).unwrap();
        let u = DVector::from_row_slice(&[0.4, 0.0, -1.0, 0.3]);
        assert_eq!(sdp.constraint_pieces.len(), 1); // M = 1 for N = 2
        assert_relative_eq!(
            sdp.constraint_pieces[0].form.eval(&u),
            v_value(&s, &pairs, &u),
            epsilon = 1e-10
        );
    }

    #[test]
    fn amplitude_measure_emits_one_piece_per_coordinate() {
        let (set, pairs) = set_of_two(3);
        let s = spec(ZKind::InputAmplitude, VKind::WorstCase, Direction::Traditional, 3);
        let sdp = homogenize(&s, &set, &pairs).unwrap();
        assert_eq!(sdp.constraint_pieces.len(), 3);
        for (i, c) in sdp.constraint_pieces.iter().enumerate() {
            let u = DVector::from_fn(3, |j, _| if j == i { 1.5 } else { 0.3 });
            assert_relative_eq!(c.form.eval(&u), 1.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn average_with_single_pair_equals_worst_case() {
        let (set, pairs) = set_of_two(4);
        let s_avg = spec(ZKind::InputPower, VKind::WeightedAverage, Direction::LeastCostly, 4);
        let s_worst = spec(ZKind::InputPower, VKind::WorstCase, Direction::LeastCostly, 4);
        let u = DVector::from_row_slice(&[1.0, 2.0, -1.0, 0.5]);
        assert_relative_eq!(
            v_value(&s_avg, &pairs, &u),
            v_value(&s_worst, &pairs, &u),
            epsilon = 1e-12
        );
        let _ = set;
    }

    #[test]
    fn all_pieces_are_positive_semidefinite() {
        let (set, pairs) = set_of_two(4);
        for &dir in &[Direction::LeastCostly, Direction::Traditional] {
            for &z in &[ZKind::InputPower, ZKind::OutputAmplitude] {
                let s = spec(z, VKind::WorstCase, dir, 4);
                let sdp = homogenize(&s, &set, &pairs).unwrap();
                let forms = sdp
                    .objective_pieces
                    .iter()
                    .chain(sdp.constraint_pieces.iter().map(|c| &c.form));
                for f in forms {
                    let min_eig = f.m.clone().symmetric_eigenvalues().min();
                    assert!(min_eig >= -1e-10, "piece not PSD: min eig {min_eig}");
                }
            }
        }
    }

    #[test]
    fn design_config_validation() {
        let json = r#"{"z": "i2", "v": "worst", "direction": "traditional",
                       "u_bar": 1.5, "T": 100, "alpha": 0.05, "sigma_bar": 1.41}"#;
        let cfg: DesignConfig = serde_json::from_str(json).unwrap();
        let s = cfg.to_spec().unwrap();
        assert_eq!(s.z_kind, ZKind::InputPower);
        assert_eq!(s.direction, Direction::Traditional);

        // output measure without y_bar is rejected
        let json = r#"{"z": "o2", "v": "avg", "direction": "least_costly",
                       "T": 10, "alpha": 0.05, "sigma_bar": 1.0}"#;
        let cfg: DesignConfig = serde_json::from_str(json).unwrap();
        assert!(cfg.to_spec().is_err());

        // unknown keys are rejected
        let json = r#"{"z": "i2", "v": "worst", "direction": "traditional",
                       "u_bar": 1.0, "T": 5, "alpha": 0.05, "sigma_bar": 1.0,
                       "extra": true}"#;
        assert!(serde_json::from_str::<DesignConfig>(json).is_err());
    }
}
