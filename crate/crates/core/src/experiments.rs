//! Builtin benchmark problems and the experiment runner.

use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use crate::adapt::{refinement_loop, summary_rows, write_summary, AdaptConfig, RefineMode, Reference, Round, SummaryRow};
use crate::error::{Error, Result};
use crate::fem::DiscreteFunction;
use crate::mesh::Mesh;
use crate::monge_ampere::{build_control_grid, ma_to_hjb, xi_from_solution_bound, MaProblem};
use crate::problem::{Control, ControlProblem, ExactSolution, SchemeParams};
use crate::tensor::{Point, Sym2};

/// Default value of the indicator function off the checkerboard.
pub const EXP1_CONTRAST: f64 = 1000.0;

/// Default `xi` when the Monge–Ampère solution is unknown.
pub const DEFAULT_XI: f64 = 0.02;

fn sign(t: f64) -> f64 {
    if t < 0.0 {
        -1.0
    } else {
        1.0
    }
}

/// `1` on the cells `(2i/N, (2i+1)/N) x (2j/N, (2j+1)/N)`, `contrast` elsewhere.
pub fn checkerboard(n: usize, contrast: f64) -> impl Fn(Point) -> f64 + Send + Sync + Copy {
    move |x: Point| {
        let i = (x[0] * n as f64).floor() as i64;
        let j = (x[1] * n as f64).floor() as i64;
        if i % 2 == 0 && j % 2 == 0 {
            1.0
        } else {
            contrast
        }
    }
}

/// `chi(x) [[2, s1 s2], [s1 s2, 2]]` with `s_i = sign(x_i - 1/2)`.
pub fn exp1_coefficient(n: usize, contrast: f64) -> impl Fn(Point) -> Sym2 + Send + Sync + Copy {
    let chi = checkerboard(n, contrast);
    move |x: Point| {
        let s = sign(x[0] - 0.5) * sign(x[1] - 0.5);
        chi(x) * Sym2::new(2.0, s, 2.0)
    }
}

/// `u(x) = |x|^{1+s}` with its derivatives.
pub fn exp1_exact(s: f64) -> ExactSolution {
    let q = 1.0 + s;
    ExactSolution::new(
        move |x: Point| (x[0] * x[0] + x[1] * x[1]).powf(0.5 * q),
        move |x: Point| {
            let r2 = x[0] * x[0] + x[1] * x[1];
            if r2 == 0.0 {
                return [0.0, 0.0];
            }
            let c = q * r2.powf(0.5 * (q - 2.0));
            [c * x[0], c * x[1]]
        },
        move |x: Point| radial_power_hessian(q, x),
    )
}

/// Hessian of `|x|^q`: `q r^{q-2} (I + (q - 2) x x^T / r^2)`.
pub fn radial_power_hessian(q: f64, x: Point) -> Sym2 {
    let r2 = x[0] * x[0] + x[1] * x[1];
    let c = q * r2.powf(0.5 * (q - 2.0));
    let d = (q - 2.0) / r2;
    Sym2::new(c * (1.0 + d * x[0] * x[0]), c * d * x[0] * x[1], c * (1.0 + d * x[1] * x[1]))
}

fn check_exp12(n: usize) -> Result<()> {
    if n == 0 || n % 2 != 0 {
        return Err(Error::Config(format!("N must be even and positive, got {n}")));
    }
    Ok(())
}

/// Singleton problem with discontinuous coefficient and exact solution
/// `|x|^{1+s}` on the unit square.
pub fn builtin_exp1(s: f64, n: usize) -> Result<(ControlProblem, ExactSolution)> {
    builtin_exp1_with_contrast(s, n, EXP1_CONTRAST)
}

pub fn builtin_exp1_with_contrast(s: f64, n: usize, contrast: f64) -> Result<(ControlProblem, ExactSolution)> {
    if !(s > 0.0 && s < 1.0) {
        return Err(Error::Config(format!("s must lie in (0, 1), got {s}")));
    }
    check_exp12(n)?;
    if !(contrast > 0.0) {
        return Err(Error::Config("contrast must be positive".into()));
    }
    let a = exp1_coefficient(n, contrast);
    let exact = exp1_exact(s);
    let (u, h) = (exact.value.clone(), exact.hessian.clone());
    let h2 = h.clone();
    let problem = ControlProblem::new(vec![Control::new("exp1", a, move |x| a(x).frob(&h(x)))], move |x| u(x))?
        .with_boundary_hessian(move |x| h2(x));
    Ok((problem, exact))
}

/// Same coefficient as [`builtin_exp1`] with `f = 1` and `g = 0`.
pub fn builtin_exp2(n: usize) -> Result<ControlProblem> {
    builtin_exp2_with_contrast(n, EXP1_CONTRAST)
}

pub fn builtin_exp2_with_contrast(n: usize, contrast: f64) -> Result<ControlProblem> {
    check_exp12(n)?;
    let a = exp1_coefficient(n, contrast);
    Ok(ControlProblem::new(vec![Control::new("exp2", a, |_| 1.0)], |_| 0.0)?.with_boundary_hessian(|_| Sym2::ZERO))
}

/// `|t| sin t` and its first two derivatives. The second derivative jumps
/// from `-2` to `2` at `t = 0`.
fn abs_sin(t: f64) -> (f64, f64, f64) {
    let s = sign(t);
    (s * t * t.sin(), s * (t.sin() + t * t.cos()), s * (2.0 * t.cos() - t * t.sin()))
}

/// `u_a(x) = |x_1 - a| sin(x_1 - a) + 50 |x|^2`.
pub fn exp3_exact(a: f64) -> ExactSolution {
    ExactSolution::new(
        move |x: Point| abs_sin(x[0] - a).0 + 50.0 * (x[0] * x[0] + x[1] * x[1]),
        move |x: Point| [abs_sin(x[0] - a).1 + 100.0 * x[0], 100.0 * x[1]],
        move |x: Point| Sym2::diag(100.0 + abs_sin(x[0] - a).2, 100.0),
    )
}

/// Monge–Ampère benchmark. `Some(a)`: `f = det D^2 u_a`, `g = u_a`, with
/// `xi` from the solution bound unless given. `None`: `f = 1`, `g = 0`.
pub fn builtin_exp3(a: Option<f64>, xi: Option<f64>, grid: (usize, usize)) -> Result<(MaProblem, Option<ExactSolution>)> {
    match a {
        Some(a) => {
            if !(a > 0.0 && a < 1.0) {
                return Err(Error::Config(format!("a must lie in (0, 1), got {a}")));
            }
            let exact = exp3_exact(a);
            let h = exact.hessian.clone();
            let f = move |x: Point| h(x).det();
            let xi = match xi {
                Some(xi) => xi,
                None => exp3_xi(&exact, &f)?,
            };
            let (u, h) = (exact.value.clone(), exact.hessian.clone());
            let ma = MaProblem::new(f, move |x| u(x), xi).with_g_hessian(move |x| h(x)).with_grid(grid.0, grid.1);
            Ok((ma, Some(exact)))
        }
        None => {
            let ma = MaProblem::new(|_| 1.0, |_| 0.0, xi.unwrap_or(DEFAULT_XI))
                .with_g_hessian(|_| Sym2::ZERO)
                .with_grid(grid.0, grid.1);
            Ok((ma, None))
        }
    }
}

/// `xi` from `inf f` and `sup |D^2 u|` sampled on a 201 x 201 grid.
fn exp3_xi(exact: &ExactSolution, f: &dyn Fn(Point) -> f64) -> Result<f64> {
    let mut f_min = f64::INFINITY;
    let mut h_sup: f64 = 0.0;
    for i in 0..=200 {
        for j in 0..=200 {
            let x = [i as f64 / 200.0, j as f64 / 200.0];
            f_min = f_min.min(f(x));
            h_sup = h_sup.max((exact.hessian)(x).frob_norm());
        }
    }
    xi_from_solution_bound(f_min, h_sup)
}

/// A problem ready for the refinement loop.
#[derive(Debug, Clone)]
pub enum ProblemKind {
    Exp1 { s: f64, n: usize, contrast: f64 },
    Exp2 { n: usize, contrast: f64 },
    /// `a = None` selects the case with unknown solution.
    Exp3 { a: Option<f64>, n: usize },
    Custom { problem: ControlProblem, exact: Option<ExactSolution>, mesh: Mesh },
    MongeAmpere { problem: MaProblem, exact: Option<ExactSolution>, mesh: Mesh },
}

#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub problem: ProblemKind,
    pub scheme: SchemeParams,
    pub refine: RefineMode,
    pub adapt: AdaptConfig,
    /// Monge–Ampère `xi`; derived or defaulted when absent.
    pub xi: Option<f64>,
    /// Monge–Ampère control grid `(n_lambda, n_theta)`.
    pub grid: (usize, usize),
    pub out: Option<PathBuf>,
}

impl ExperimentConfig {
    pub fn new(problem: ProblemKind, degree: usize) -> Self {
        ExperimentConfig {
            problem,
            scheme: SchemeParams::new(degree),
            refine: RefineMode::Uniform,
            adapt: AdaptConfig::default(),
            xi: None,
            grid: (16, 16),
            out: None,
        }
    }
}

/// HJB problem, reference and initial mesh of a configuration. For
/// Monge–Ampère problems the HJB unknown is `-u` and `negated` is set.
pub struct Setup {
    pub problem: ControlProblem,
    pub exact: Option<ExactSolution>,
    pub incremental: bool,
    pub mesh: Mesh,
    pub negated: bool,
}

fn sample_grid(mesh: &Mesh) -> Vec<Point> {
    (0..mesh.num_triangles()).map(|t| mesh.centroid(t)).collect()
}

pub fn setup(config: &ExperimentConfig) -> Result<Setup> {
    let ma_setup = |ma: &MaProblem, exact: Option<ExactSolution>, mesh: Mesh| -> Result<Setup> {
        let grid = ma.control_grid()?;
        let problem = ma_to_hjb(ma, &grid, &sample_grid(&mesh.uniform_refine().uniform_refine()))?;
        Ok(Setup {
            problem,
            incremental: exact.is_none(),
            exact: exact.map(|e| e.negated()),
            mesh,
            negated: true,
        })
    };
    match &config.problem {
        ProblemKind::Exp1 { s, n, contrast } => {
            let (problem, exact) = builtin_exp1_with_contrast(*s, *n, *contrast)?;
            Ok(Setup { problem, exact: Some(exact), incremental: false, mesh: Mesh::unit_square(*n), negated: false })
        }
        ProblemKind::Exp2 { n, contrast } => Ok(Setup {
            problem: builtin_exp2_with_contrast(*n, *contrast)?,
            exact: None,
            incremental: true,
            mesh: Mesh::unit_square(*n),
            negated: false,
        }),
        ProblemKind::Exp3 { a, n } => {
            let (ma, exact) = builtin_exp3(*a, config.xi, config.grid)?;
            ma_setup(&ma, exact, Mesh::unit_square(*n))
        }
        ProblemKind::Custom { problem, exact, mesh } => Ok(Setup {
            problem: problem.clone(),
            incremental: exact.is_none(),
            exact: exact.clone(),
            mesh: mesh.clone(),
            negated: false,
        }),
        ProblemKind::MongeAmpere { problem, exact, mesh } => {
            let mut ma = problem.clone();
            if let Some(xi) = config.xi {
                ma.xi = xi;
            }
            ma.n_lambda = config.grid.0;
            ma.n_theta = config.grid.1;
            // validates xi before anything is solved
            build_control_grid(ma.xi, ma.n_lambda, ma.n_theta)?;
            ma_setup(&ma, exact.clone(), mesh.clone())
        }
    }
}

pub struct ExperimentOutput {
    pub rounds: Vec<Round>,
    pub rows: Vec<SummaryRow>,
    /// The HJB unknown is the negated Monge–Ampère solution.
    pub negated: bool,
}

impl ExperimentOutput {
    /// Solution of the original problem on the last mesh.
    pub fn final_solution(&self) -> Option<DiscreteFunction> {
        let last = self.rounds.last()?;
        Some(if self.negated { last.solution.axpby(-1.0, &last.solution, 0.0) } else { last.solution.clone() })
    }

    pub fn converged(&self) -> bool {
        self.rounds.last().map(|r| r.converged).unwrap_or(false)
    }

    pub fn write_outputs(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir)?;
        write_summary(&self.rows, BufWriter::new(File::create(dir.join("summary.csv"))?))?;
        if let Some(last) = self.rounds.last() {
            crate::solver::write_trace(&last.howard, BufWriter::new(File::create(dir.join("trace.csv"))?))?;
            last.mesh.as_ref().write_to(BufWriter::new(File::create(dir.join("mesh_final.txt"))?))?;
            if let Some(u) = self.final_solution() {
                u.write_to(BufWriter::new(File::create(dir.join("solution_final.txt"))?))?;
            }
            last.indicators.write_csv(BufWriter::new(File::create(dir.join("indicators_final.csv"))?))?;
        }
        Ok(())
    }
}

/// Runs the configured loop and writes the output files when `out` is set.
pub fn run(config: &ExperimentConfig) -> Result<ExperimentOutput> {
    let s = setup(config)?;
    let reference = match (&s.exact, s.incremental) {
        (Some(e), _) => Reference::Exact(e),
        (None, true) => Reference::Incremental,
        (None, false) => Reference::None,
    };
    let rounds = refinement_loop(s.mesh.clone(), &s.problem, reference, &config.scheme, &config.adapt, config.refine, |_| {})?;
    let rows = summary_rows(&rounds);
    let output = ExperimentOutput { rounds, rows, negated: s.negated };
    if let Some(dir) = &config.out {
        output.write_outputs(dir)?;
    }
    Ok(output)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problem::cordes_epsilon;

    #[test]
    fn exp1_values() {
        let u = exp1_exact(0.5);
        assert!(((u.value)([1.0, 1.0]) - 2f64.powf(0.75)).abs() < 1e-14);
        assert!(((u.value)([1.0, 1.0]) - 1.68179).abs() < 1e-5);
    }

    #[test]
    fn exp1_hessian_matches_finite_differences() {
        let u = exp1_exact(0.5);
        let step = 1e-4;
        for x in [[1.0, 0.0], [0.3, 0.7], [0.05, 0.02]] {
            let g = |p: Point| (u.gradient)(p);
            let gx = g([x[0] + step, x[1]]);
            let gx_ = g([x[0] - step, x[1]]);
            let gy = g([x[0], x[1] + step]);
            let gy_ = g([x[0], x[1] - step]);
            let fd = Sym2::new((gx[0] - gx_[0]) / (2.0 * step), (gx[1] - gx_[1]) / (2.0 * step), (gy[1] - gy_[1]) / (2.0 * step));
            let h = (u.hessian)(x);
            assert!((fd - h).frob_norm() <= 1e-6 * h.frob_norm().max(1.0), "{x:?}");
            let v = |p: Point| (u.value)(p);
            let fdx = (v([x[0] + step, x[1]]) - v([x[0] - step, x[1]])) / (2.0 * step);
            assert!((fdx - g(x)[0]).abs() < 1e-6);
        }
    }

    #[test]
    fn exp1_cordes_constant_is_point_six() {
        let (p, _) = builtin_exp1(0.5, 20).unwrap();
        let pts: Vec<Point> = (0..40).flat_map(|i| (0..40).map(move |j| [(i as f64 + 0.5) / 40.0, (j as f64 + 0.5) / 40.0])).collect();
        let r = cordes_epsilon(&p, &pts).unwrap();
        assert!((r.epsilon - 0.6).abs() < 1e-14);
        let r = cordes_epsilon(&builtin_exp2(10).unwrap(), &pts).unwrap();
        assert!((r.epsilon - 0.6).abs() < 1e-14);
    }

    #[test]
    fn checkerboard_values() {
        let chi = checkerboard(20, 1000.0);
        assert_eq!(chi([0.01, 0.01]), 1.0);
        assert_eq!(chi([0.06, 0.01]), 1000.0);
        assert_eq!(chi([0.11, 0.13]), 1.0);
        assert_eq!(chi([0.11, 0.07]), 1000.0);
    }

    #[test]
    fn parameter_validation() {
        assert!(builtin_exp1(0.0, 20).is_err());
        assert!(builtin_exp1(0.5, 3).is_err());
        assert!(builtin_exp2(0).is_err());
        assert!(builtin_exp3(Some(1.5), None, (4, 4)).is_err());
    }

    #[test]
    fn exp3_closed_forms_and_convexity() {
        let u = exp3_exact(0.5);
        for y in [0.0, 0.3, 1.0] {
            assert!(((u.value)([0.5, y]) - 50.0 * (0.25 + y * y)).abs() < 1e-12);
        }
        for a in [0.4, 0.5] {
            let u = exp3_exact(a);
            for i in 0..=100 {
                for j in 0..=100 {
                    let x = [i as f64 / 100.0, j as f64 / 100.0];
                    let h = (u.hessian)(x);
                    assert!(h.eigenvalues()[0] >= 97.0);
                    assert!(h.det() > 0.0);
                }
            }
        }
    }

    #[test]
    fn exp3_known_case_uses_the_solution_bound() {
        let (ma, exact) = builtin_exp3(Some(0.5), None, (16, 16)).unwrap();
        assert!(exact.is_some());
        assert!(ma.xi > 0.2 && ma.xi <= 0.25);
        let (ma, exact) = builtin_exp3(None, None, (16, 16)).unwrap();
        assert!(exact.is_none());
        assert_eq!(ma.xi, DEFAULT_XI);
    }
}
