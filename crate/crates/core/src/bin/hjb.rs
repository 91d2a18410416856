use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};
use hjb_c0ip::adapt::{write_summary, RefineMode};
use hjb_c0ip::config::ConfigFile;
use hjb_c0ip::experiments::{run, ExperimentConfig, ProblemKind, EXP1_CONTRAST};
use hjb_c0ip::SchemeParams;

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Builtin {
    Exp1,
    Exp2,
    Exp3,
}

/// C0 interior penalty solver for HJB and Monge–Ampère problems.
#[derive(Debug, Parser)]
#[command(version)]
struct Cli {
    /// Builtin problem.
    #[arg(long, value_enum, default_value = "exp1")]
    problem: Builtin,
    /// Problem file in TOML; its values override the flags.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Regularity parameter of exp1.
    #[arg(long, default_value_t = 0.5)]
    s: f64,
    /// Resolution of the coefficient (exp1, exp2) or of the initial grid (exp3).
    #[arg(long)]
    n: Option<usize>,
    /// Kink position of exp3; omit for the case with unknown solution.
    #[arg(long)]
    a: Option<f64>,
    /// Polynomial degree.
    #[arg(long, default_value_t = 2)]
    degree: usize,
    /// Penalty parameter; defaults to 10, 50, 100 for degree 2, 3, 4.
    #[arg(long)]
    sigma: Option<f64>,
    /// Marking parameter.
    #[arg(long, default_value_t = 0.2)]
    theta: f64,
    #[arg(long, value_enum, default_value = "uniform")]
    refine: RefineArg,
    #[arg(long, default_value_t = 30000)]
    max_dofs: usize,
    /// Stop once the largest indicator is at most this.
    #[arg(long, default_value_t = 1e-8)]
    tol: f64,
    /// Number of refinement rounds.
    #[arg(long, default_value_t = 10)]
    itermax: usize,
    /// Lower determinant bound of the Monge–Ampère control set.
    #[arg(long)]
    xi: Option<f64>,
    /// Monge–Ampère control grid as LAMBDAxTHETA.
    #[arg(long, default_value = "16x16", value_parser = parse_grid)]
    grid: (usize, usize),
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Bit-reproducible sequential assembly.
    #[arg(long)]
    sequential: bool,
    /// Fail when the Cordes condition is violated.
    #[arg(long)]
    strict_cordes: bool,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum RefineArg {
    Uniform,
    Adaptive,
}

fn parse_grid(s: &str) -> Result<(usize, usize), String> {
    let (l, t) = s.split_once(['x', 'X']).ok_or_else(|| format!("expected LxT, got {s:?}"))?;
    let l = l.trim().parse().map_err(|e| format!("{e}"))?;
    let t = t.trim().parse().map_err(|e| format!("{e}"))?;
    Ok((l, t))
}

fn base_config(cli: &Cli) -> ExperimentConfig {
    let problem = match cli.problem {
        Builtin::Exp1 => ProblemKind::Exp1 { s: cli.s, n: cli.n.unwrap_or(20), contrast: EXP1_CONTRAST },
        Builtin::Exp2 => ProblemKind::Exp2 { n: cli.n.unwrap_or(10), contrast: EXP1_CONTRAST },
        Builtin::Exp3 => ProblemKind::Exp3 { a: cli.a, n: cli.n.unwrap_or(2) },
    };
    let mut scheme = SchemeParams::new(cli.degree);
    if let Some(sigma) = cli.sigma {
        scheme.sigma = sigma;
    }
    scheme.sequential = cli.sequential;
    scheme.strict_cordes = cli.strict_cordes;
    let mut cfg = ExperimentConfig::new(problem, cli.degree);
    cfg.scheme = scheme;
    cfg.refine = match cli.refine {
        RefineArg::Uniform => RefineMode::Uniform,
        RefineArg::Adaptive => RefineMode::Adaptive,
    };
    cfg.adapt.theta = cli.theta;
    cfg.adapt.tol = cli.tol;
    cfg.adapt.itermax = cli.itermax;
    cfg.adapt.max_dofs = cli.max_dofs;
    cfg.xi = cli.xi;
    cfg.grid = cli.grid;
    cfg.out = cli.out.clone();
    cfg
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let mut cfg = base_config(&cli);
    if let Some(path) = &cli.config {
        cfg = match ConfigFile::load(path).and_then(|f| f.apply(cfg)) {
            Ok(c) => c,
            Err(e) => {
                eprintln!("error: {}: {e}", path.display());
                return ExitCode::from(2);
            }
        };
    }
    let output = match run(&cfg) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    };
    if let Err(e) = write_summary(&output.rows, std::io::stdout().lock()) {
        eprintln!("error: {e}");
        return ExitCode::from(1);
    }
    if !output.converged() {
        eprintln!("error: Howard iteration did not converge on the final mesh");
        return ExitCode::from(3);
    }
    ExitCode::SUCCESS
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_flag() {
        assert_eq!(parse_grid("16x8"), Ok((16, 8)));
        assert!(parse_grid("16").is_err());
        assert!(parse_grid("ax2").is_err());
    }

    #[test]
    fn flags_map_to_config() {
        let cli = Cli::parse_from(["hjb", "--problem", "exp3", "--a", "0.4", "--degree", "3", "--grid", "8x4", "--refine", "adaptive"]);
        let cfg = base_config(&cli);
        assert!(matches!(cfg.problem, ProblemKind::Exp3 { a: Some(a), n: 2 } if a == 0.4));
        assert_eq!(cfg.scheme.sigma, 50.0);
        assert_eq!(cfg.grid, (8, 4));
        assert_eq!(cfg.refine, RefineMode::Adaptive);
    }
}
