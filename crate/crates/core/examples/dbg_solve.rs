use nalgebra::{DMatrix, DVector, RowDVector};
use probe_design::discrim::all_pairs;
use probe_design::lift::{ModelSet, NoiseModel, StateSpaceModel};
use probe_design::quadprog::*;
use probe_design::sdr::conic;

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

fn main() {
    let m1 = scalar_model(0.5, 1.0, 0.0, 0.4);
    let m2 = scalar_model(0.8, 1.0, 0.3, -0.2);
    let set = ModelSet::from_models(&[m1, m2], 6, 1.0, 0.05).unwrap();
    let pairs = all_pairs(&set).unwrap();
    println!("gamma = {}", pairs[0].gamma);
    println!("|eta| = {}", pairs[0].eta_bar().norm());
    println!("|Gbar| = {}", pairs[0].g_bar().norm());
    let spec = DesignSpec {
        z_kind: ZKind::InputPower,
        v_kind: VKind::WorstCase,
        direction: Direction::LeastCostly,
        u_bar: 1.0,
        y_bar: 1.0,
        weights: None,
        horizon: 6,
    };
    let problem = homogenize(&spec, &set, &pairs).unwrap();
    let prob = conic::lower(&problem);
    println!("m = {}, psd_dim = {}, scalars = {}", prob.a.nrows(), prob.psd_dim, prob.n_scalars);
    println!("|c| = {}, b = {:?}", prob.c.norm(), prob.b.as_slice());
    match probe_design::sdr::solve_sdp(&problem, 1e-7) {
        Ok(sol) => println!("OK obj {} gap {} iters {}", sol.objective, sol.duality_gap, sol.iterations),
        Err(e) => println!("ERR {e:?}"),
    }
}
