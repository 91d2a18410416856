//! Solve, estimate, mark, refine.

use std::io::Write;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::estimator::{compute_indicators, effectivity_index, ErrorIndicators};
use crate::fem::{boundary_datum, DiscreteFunction, FeSpace};
use crate::mesh::Mesh;
use crate::problem::{ControlProblem, ExactSolution, SchemeParams};
use crate::scheme::{error_norms, ErrorNorms};
use crate::solver::{howard_solve, HowardStep};
use crate::tensor::Sym2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Deserialize, serde::Serialize)]
#[serde(rename_all = "lowercase")]
pub enum RefineMode {
    /// Bisect every triangle once per round.
    Uniform,
    /// Maximum marking on the indicators.
    Adaptive,
}

impl std::str::FromStr for RefineMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "uniform" => Ok(RefineMode::Uniform),
            "adaptive" => Ok(RefineMode::Adaptive),
            _ => Err(Error::Config(format!("unknown refinement mode '{s}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdaptConfig {
    /// Marking fraction in `(0, 1]`.
    pub theta: f64,
    /// Stop once the largest indicator is at most `tol`.
    pub tol: f64,
    /// Maximum number of rounds (solves).
    pub itermax: usize,
    /// No space with more dofs than this is solved on.
    pub max_dofs: usize,
}

impl Default for AdaptConfig {
    fn default() -> Self {
        AdaptConfig { theta: 0.2, tol: 1e-8, itermax: 10, max_dofs: 30_000 }
    }
}

impl AdaptConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.theta > 0.0 && self.theta <= 1.0) {
            return Err(Error::Config(format!("theta must lie in (0, 1], got {}", self.theta)));
        }
        if self.itermax == 0 {
            return Err(Error::Config("itermax must be at least 1".into()));
        }
        if !(self.tol >= 0.0) {
            return Err(Error::Config("tol must be nonnegative".into()));
        }
        Ok(())
    }
}

/// Triangles with `max(eta_K, eta_K_g) > theta * m` and interior edges with
/// `max(eta_e, eta_e_g) > theta * m`, where `m` is the largest indicator of
/// any family.
pub fn mark_maximum(indicators: &ErrorIndicators, theta: f64) -> (Vec<usize>, Vec<[usize; 2]>) {
    let threshold = theta * indicators.max();
    let triangles = (0..indicators.eta_k.len())
        .filter(|&k| indicators.eta_k[k].max(indicators.eta_k_g[k]) > threshold)
        .collect();
    let edges = (0..indicators.eta_e.len())
        .filter(|&k| indicators.eta_e[k].max(indicators.eta_e_g[k]) > threshold)
        .map(|k| indicators.edges[k])
        .collect();
    (triangles, edges)
}

/// What the error columns measure.
#[derive(Clone, Copy)]
pub enum Reference<'a> {
    /// Errors against a known solution.
    Exact(&'a ExactSolution),
    /// Norms of `u_k - u_{k-1}` with the previous solution interpolated on
    /// the new mesh.
    Incremental,
    None,
}

#[derive(Debug, Clone)]
pub struct Round {
    pub mesh: Arc<Mesh>,
    pub solution: DiscreteFunction,
    pub datum: DiscreteFunction,
    pub indicators: ErrorIndicators,
    pub errors: Option<ErrorNorms>,
    pub howard: Vec<HowardStep>,
    pub converged: bool,
    pub marked_triangles: usize,
    pub marked_edges: usize,
    /// Nothing exceeded the threshold and every triangle was refined.
    pub uniform_fallback: bool,
}

impl Round {
    pub fn ndofs(&self) -> usize {
        self.solution.space().n_dofs()
    }
}

/// Norms of a discrete function, reported as [`ErrorNorms`] against zero.
pub fn function_norms(v: &DiscreteFunction, sigma: f64) -> ErrorNorms {
    let zero = ExactSolution::new(|_| 0.0, |_| [0.0, 0.0], |_| Sym2::ZERO);
    error_norms(v, &zero, sigma)
}

/// Runs rounds until the largest indicator reaches `cfg.tol`, `cfg.itermax`
/// rounds are done, or the next space would exceed `cfg.max_dofs`.
/// `on_round` sees each round as it completes.
pub fn refinement_loop(
    initial: Mesh,
    problem: &ControlProblem,
    reference: Reference<'_>,
    params: &SchemeParams,
    cfg: &AdaptConfig,
    mode: RefineMode,
    mut on_round: impl FnMut(&Round),
) -> Result<Vec<Round>> {
    params.validate()?;
    cfg.validate()?;
    let mut mesh = Arc::new(initial);
    let mut rounds: Vec<Round> = Vec::new();
    loop {
        let space = FeSpace::new(mesh.clone(), params.degree)?;
        if !rounds.is_empty() && space.n_dofs() > cfg.max_dofs {
            log::info!("stopping: next space has {} dofs", space.n_dofs());
            break;
        }
        let datum = boundary_datum(&space, |x| problem.boundary(x), params.boundary_projection)?;
        let result = howard_solve(problem, &datum, None, params)?;
        let indicators =
            compute_indicators(problem, &result.solution, &datum, problem.boundary_hessian(), params.sequential);
        let errors = match reference {
            Reference::Exact(u) => Some(error_norms(&result.solution, u, params.sigma)),
            Reference::Incremental => match rounds.last() {
                Some(prev) => {
                    let coarse = prev.solution.prolongate(&space)?;
                    Some(function_norms(&result.solution.axpby(1.0, &coarse, -1.0), params.sigma))
                }
                None => None,
            },
            Reference::None => None,
        };
        let eta_max = indicators.max();
        let (triangles, edges) = match mode {
            RefineMode::Adaptive => mark_maximum(&indicators, cfg.theta),
            RefineMode::Uniform => ((0..mesh.num_triangles()).collect(), Vec::new()),
        };
        let uniform_fallback = triangles.is_empty() && edges.is_empty();
        log::info!(
            "round {}: ndofs {} eta {:e} marked {} triangles, {} edges",
            rounds.len() + 1,
            space.n_dofs(),
            indicators.total(),
            triangles.len(),
            edges.len()
        );
        let round = Round {
            mesh: mesh.clone(),
            solution: result.solution,
            datum,
            indicators,
            errors,
            howard: result.trace,
            converged: result.converged,
            marked_triangles: triangles.len(),
            marked_edges: edges.len(),
            uniform_fallback,
        };
        on_round(&round);
        rounds.push(round);
        if eta_max <= cfg.tol || rounds.len() >= cfg.itermax {
            break;
        }
        mesh = Arc::new(if uniform_fallback {
            let all: Vec<usize> = (0..mesh.num_triangles()).collect();
            mesh.bisect_marked(&all, &[])
        } else {
            mesh.bisect_marked(&triangles, &edges)
        });
    }
    Ok(rounds)
}

pub fn adaptive_loop(
    initial: Mesh,
    problem: &ControlProblem,
    reference: Reference<'_>,
    params: &SchemeParams,
    cfg: &AdaptConfig,
) -> Result<Vec<Round>> {
    refinement_loop(initial, problem, reference, params, cfg, RefineMode::Adaptive, |_| {})
}

/// `-log(e_k / e_{k-1}) / log(n_k / n_{k-1})`.
pub fn eoc(e_prev: f64, e: f64, n_prev: usize, n: usize) -> f64 {
    -(e / e_prev).ln() / (n as f64 / n_prev as f64).ln()
}

/// Least-squares slope of `log e` against `log ndofs`.
pub fn fitted_slope(ndofs: &[usize], errors: &[f64]) -> f64 {
    let x: Vec<f64> = ndofs.iter().map(|&n| (n as f64).ln()).collect();
    let y: Vec<f64> = errors.iter().map(|e| e.ln()).collect();
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(&y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    sxy / sxx
}

#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub ndofs: usize,
    pub err_h: Option<f64>,
    pub eoc_h: Option<f64>,
    pub err_h1: Option<f64>,
    pub eoc_h1: Option<f64>,
    pub err_l2: Option<f64>,
    pub eoc_l2: Option<f64>,
    pub eta: f64,
    pub eoc_eta: Option<f64>,
    pub effectivity: Option<f64>,
}

pub fn summary_rows(rounds: &[Round]) -> Vec<SummaryRow> {
    let mut rows: Vec<SummaryRow> = Vec::with_capacity(rounds.len());
    for (k, r) in rounds.iter().enumerate() {
        let prev = k.checked_sub(1).map(|j| &rounds[j]);
        let rate = |f: &dyn Fn(&Round) -> Option<f64>| -> Option<f64> {
            let p = prev?;
            Some(eoc(f(p)?, f(r)?, p.ndofs(), r.ndofs()))
        };
        let eta = r.indicators.total();
        rows.push(SummaryRow {
            ndofs: r.ndofs(),
            err_h: r.errors.map(|e| e.h),
            eoc_h: rate(&|x: &Round| x.errors.map(|e| e.h)),
            err_h1: r.errors.map(|e| e.h1),
            eoc_h1: rate(&|x: &Round| x.errors.map(|e| e.h1)),
            err_l2: r.errors.map(|e| e.l2),
            eoc_l2: rate(&|x: &Round| x.errors.map(|e| e.l2)),
            eta,
            eoc_eta: rate(&|x: &Round| Some(x.indicators.total())),
            effectivity: r.errors.map(|e| effectivity_index(eta, e.h)).filter(|v| v.is_finite()),
        });
    }
    rows
}

fn cell(v: Option<f64>) -> String {
    match v {
        Some(x) if x.is_finite() => format!("{x:.14e}"),
        _ => String::new(),
    }
}

/// Comma-separated table with 15 significant digits; missing values are
/// empty fields.
pub fn write_summary<W: Write>(rows: &[SummaryRow], mut w: W) -> std::io::Result<()> {
    writeln!(w, "ndofs,err_h,EOC_h,err_H1,EOC_H1,err_L2,EOC_L2,eta,EOC_eta,effectivity")?;
    for r in rows {
        writeln!(
            w,
            "{},{},{},{},{},{},{},{},{},{}",
            r.ndofs,
            cell(r.err_h),
            cell(r.eoc_h),
            cell(r.err_h1),
            cell(r.eoc_h1),
            cell(r.err_l2),
            cell(r.eoc_l2),
            cell(Some(r.eta)),
            cell(r.eoc_eta),
            cell(r.effectivity)
        )?;
    }
    Ok(())
}
