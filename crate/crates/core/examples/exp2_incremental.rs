//! Unknown solution: incremental differences between successive meshes
//! and the estimator under adaptive refinement.

use hjb_c0ip::adapt::RefineMode;
use hjb_c0ip::experiments::{run, ExperimentConfig, ProblemKind, EXP1_CONTRAST};

fn main() -> hjb_c0ip::Result<()> {
    let mut cfg = ExperimentConfig::new(ProblemKind::Exp2 { n: 10, contrast: EXP1_CONTRAST }, 2);
    cfg.refine = RefineMode::Adaptive;
    cfg.adapt.itermax = 8;
    let out = run(&cfg)?;
    println!("{:>8} {:>12} {:>12} {:>12} {:>12}", "ndofs", "|theta|_h", "|theta|_H1", "|theta|_L2", "eta");
    for row in &out.rows {
        let f = |v: Option<f64>| v.map_or("-".to_string(), |v| format!("{v:.4e}"));
        println!("{:>8} {:>12} {:>12} {:>12} {:>12.4e}", row.ndofs, f(row.err_h), f(row.err_h1), f(row.err_l2), row.eta);
    }
    let last = out.rounds.last().expect("at least one round");
    println!("Howard iterations on the final mesh: {}", last.howard.len());
    Ok(())
}
