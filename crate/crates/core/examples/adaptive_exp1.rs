//! Uniform against adaptive refinement for the benchmark with a corner
//! singularity and a discontinuous coefficient.

use hjb_c0ip::adapt::{write_summary, RefineMode};
use hjb_c0ip::experiments::{run, ExperimentConfig, ProblemKind, EXP1_CONTRAST};

fn main() -> hjb_c0ip::Result<()> {
    for mode in [RefineMode::Uniform, RefineMode::Adaptive] {
        let mut cfg = ExperimentConfig::new(ProblemKind::Exp1 { s: 0.5, n: 10, contrast: EXP1_CONTRAST }, 3);
        cfg.refine = mode;
        cfg.adapt.itermax = if mode == RefineMode::Uniform { 4 } else { 16 };
        cfg.adapt.max_dofs = 15000;
        let out = run(&cfg)?;
        println!("{mode:?}");
        write_summary(&out.rows, std::io::stdout().lock())?;
    }
    Ok(())
}
