//! Problem definitions in TOML with expression-valued coefficients.

use hjb_c0ip::adapt::write_summary;
use hjb_c0ip::config::ConfigFile;
use hjb_c0ip::experiments::{run, ExperimentConfig, ProblemKind, EXP1_CONTRAST};

const PROBLEM: &str = r#"
[problem]
kind = "custom"

[domain]
vertices = [[0, 0], [1, 0], [1, 1], [0, 1]]
refinements = 1

# u = exp(x) sin(y) solves max over both controls
[[controls]]
label = "anisotropic"
a11 = "2 + x*y"
a12 = "0.3"
a22 = "1"
f = "(2 + x*y)*exp(x)*sin(y) + 0.6*exp(x)*cos(y) - exp(x)*sin(y)"

[[controls]]
label = "dominated"
a11 = "1"
a22 = "1"
f = "1"

[boundary]
g = "exp(x)*sin(y)"

[exact]
u = "exp(x)*sin(y)"
ux = "exp(x)*sin(y)"
uy = "exp(x)*cos(y)"
uxx = "exp(x)*sin(y)"
uxy = "exp(x)*cos(y)"
uyy = "-exp(x)*sin(y)"

[scheme]
degree = 3

[refinement]
mode = "adaptive"
theta = 0.3
itermax = 5
tol = 0.0
"#;

fn main() -> hjb_c0ip::Result<()> {
    let base = ExperimentConfig::new(ProblemKind::Exp1 { s: 0.5, n: 20, contrast: EXP1_CONTRAST }, 2);
    let cfg = ConfigFile::parse(PROBLEM)?.apply(base)?;
    let out = run(&cfg)?;
    write_summary(&out.rows, std::io::stdout().lock())?;
    Ok(())
}
