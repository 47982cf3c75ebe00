use nalgebra::{DMatrix, DVector, RowDVector};
use probe_design::experiment::*;
use probe_design::lift::*;
use probe_design::quadprog::*;
use probe_design::sdr::{design, DesignOptions};
use probe_design::discrim::{all_pairs, theorem1_margin};

fn physical_model(zeta: f64, omega: f64, label: &str) -> StateSpaceModel {
    let a_c = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, -omega * omega, -2.0 * zeta * omega]);
    let b_c = DVector::from_row_slice(&[0.0, omega * omega]);
    let (a_d, b_d) = zoh_pair(&a_c, &b_c, 0.01);
    StateSpaceModel::new(a_d, b_d, RowDVector::from_row_slice(&[1.0, 0.0]), 0.0,
        NoiseModel::Identity, DVector::from_row_slice(&[0.5, 0.0]),
        DMatrix::identity(2, 2), label).unwrap()
}

fn main() {
    let t = 100usize;
    let models = vec![physical_model(0.6, 11.11, "normal"), physical_model(0.45, 5.73, "faulty")];
    let set = ModelSet::from_models(&models, t, 2.0_f64.sqrt(), 0.05).unwrap();
    // average-power budget: |u|_2 <= u_bar * sqrt(T)
    let spec = DesignSpec {
        z_kind: ZKind::InputPower, v_kind: VKind::WorstCase, direction: Direction::Traditional,
        u_bar: 1.5 * (t as f64).sqrt(), y_bar: 1.0, weights: None, horizon: t,
    };
    let out = design(&set, &spec, &DesignOptions::default()).unwrap();
    let pairs = all_pairs(&set).unwrap();
    let u_design = out.u.clone();
    let u_step = step_input(1.5, t);
    println!("extraction {:?} rank {} V_hat {:.5} V(u) {:.5} Z(u) {:.6} |u| {:.3} |u|inf {:.3}",
        out.result.extraction, out.result.rank, out.result.sdp_optimum,
        out.result.v_achieved, out.result.z_achieved, u_design.norm(), u_design.amax());
    println!("V(step) = {:.6}  margin(designed) satisfied: {:?}",
        v_value(&spec, &pairs, &u_step), theorem1_margin(&pairs[0], &u_design).satisfied);
    for (name, input) in [("designed", &u_design), ("step", &u_step)] {
        for (cond, tm) in [("normal", 0usize), ("faulty", 1usize)] {
            let s = Scenario::new(set.clone(), tm, 1.0, input.clone(), 1000, 42).unwrap();
            let rep = run_scenario(&s).unwrap();
            println!("{name:9} {cond:7} accuracy {:.3} unique_true {:.3}",
                rep.selection_accuracy(tm), rep.unique_true_candidate_rate);
        }
    }
}
