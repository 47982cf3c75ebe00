use probe_design::experiment::*;
use probe_design::sdr::{design, DesignOptions};
use nalgebra::DVector;
use std::time::Instant;

fn main() {
    let t0 = Instant::now();
    let (set, spec) = wind_turbine_scenario();
    let out = design(&set, &spec, &DesignOptions::default()).unwrap();
    println!("design: {:?}, V_hat = {:.4}, rank = {}, solve time {:?}",
        out.result.extraction, out.result.sdp_optimum, out.result.rank, t0.elapsed());
    println!("V(u) = {:.4}, Z(u) = {:.6}", out.result.v_achieved, out.result.z_achieved);
    let u_design = out.u.clone();
    let u_step = step_input(1.5, 100);
    for (name, input) in [("designed", &u_design), ("step", &u_step)] {
        for (cond, true_model) in [("normal", 0usize), ("faulty", 1usize)] {
            let s = Scenario::new(set.clone(), true_model, 1.0, input.clone(), 1000, 42).unwrap();
            let rep = run_scenario(&s).unwrap();
            println!("{name:9} {cond:7} accuracy {:.3}  candidate_freq {:?}  unique_true {:.3}",
                rep.selection_accuracy(true_model),
                rep.candidate_frequencies.iter().map(|f| (f*1000.0).round()/1000.0).collect::<Vec<_>>(),
                rep.unique_true_candidate_rate);
        }
    }
    let _ = DVector::<f64>::zeros(1);
    println!("total {:?}", t0.elapsed());
}
