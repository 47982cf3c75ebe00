use nalgebra::{DMatrix, DVector, RowDVector};
use probe_design::experiment::*;
use probe_design::lift::*;
use probe_design::quadprog::*;
use probe_design::sdr::{design, DesignOptions};

fn physical_model(zeta: f64, omega: f64, label: &str) -> StateSpaceModel {
    // state = [pitch angle, pitch rate]
    let a_c = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, -omega * omega, -2.0 * zeta * omega]);
    let b_c = DVector::from_row_slice(&[0.0, omega * omega]);
    let (a_d, b_d) = zoh_pair(&a_c, &b_c, 0.01);
    StateSpaceModel::new(
        a_d, b_d,
        RowDVector::from_row_slice(&[1.0, 0.0]),
        0.0,
        NoiseModel::Identity,
        DVector::from_row_slice(&[0.5, 0.0]),
        DMatrix::identity(2, 2),
        label,
    ).unwrap()
}

fn main() {
    let models = vec![physical_model(0.6, 11.11, "normal"), physical_model(0.45, 5.73, "faulty")];
    let set = ModelSet::from_models(&models, 100, 2.0_f64.sqrt(), 0.05).unwrap();
    let spec = DesignSpec {
        z_kind: ZKind::InputPower, v_kind: VKind::WorstCase, direction: Direction::Traditional,
        u_bar: 1.5, y_bar: 1.0, weights: None, horizon: 100,
    };
    let out = design(&set, &spec, &DesignOptions::default()).unwrap();
    println!("extraction {:?} rank {} V_hat {:.5} V(u) {:.5} Z(u) {:.6}",
        out.result.extraction, out.result.rank, out.result.sdp_optimum,
        out.result.v_achieved, out.result.z_achieved);
    let u_design = out.u.clone();
    let u_step = step_input(1.5, 100);
    use probe_design::discrim::all_pairs;
    let pairs = all_pairs(&set).unwrap();
    println!("V(step) = {:.6}, gamma = {:.3}", v_value(&spec, &pairs, &u_step), pairs[0].gamma);
    for (name, input) in [("designed", &u_design), ("step", &u_step)] {
        for (cond, tm) in [("normal", 0usize), ("faulty", 1usize)] {
            let s = Scenario::new(set.clone(), tm, 1.0, input.clone(), 1000, 42).unwrap();
            let rep = run_scenario(&s).unwrap();
            println!("{name:9} {cond:7} accuracy {:.3}", rep.selection_accuracy(tm));
        }
    }
}
