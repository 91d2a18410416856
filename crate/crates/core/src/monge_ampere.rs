//! Dirichlet Monge–Ampère problems `det D^2 u = f`, `u` convex, posed as
//! HJB problems over trace-one matrices `W >= 0` with `det W >= xi`.
//!
//! With `v = -u` the equation reads
//! `sup_W { W : D^2 v + 2 sqrt(det W) sqrt(f) } = 0`, which is the generic
//! form `sup_W (A^W : D^2 v - f^W) = 0` with `A^W = W` and
//! `f^W = -2 sqrt(det W f)`.

use std::f64::consts::PI;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::fem::DiscreteFunction;
use crate::problem::{Control, ControlProblem, MatrixField, ScalarField};
use crate::scheme::par_map;
use crate::tensor::{Point, Sym2};

/// Finite subset of `X_xi`.
#[derive(Debug, Clone)]
pub struct ControlGrid {
    matrices: Vec<Sym2>,
    dets: Vec<f64>,
    gammas: Vec<f64>,
    xi: f64,
}

const DUPLICATE_TOL: f64 = 1e-14;

/// `W(lambda, theta) = R(theta) diag(lambda, 1 - lambda) R(theta)^T` with
/// `lambda` uniform in `[1/2 - sqrt(1/4 - xi), 1/2 + sqrt(1/4 - xi)]` and
/// `theta = k pi / n_theta`, preceded by `I/2` and without duplicates.
pub fn build_control_grid(xi: f64, n_lambda: usize, n_theta: usize) -> Result<ControlGrid> {
    if !(xi > 0.0 && xi <= 0.25) {
        return Err(Error::Domain(format!("xi must lie in (0, 1/4], got {xi}")));
    }
    if n_lambda == 0 || n_theta == 0 {
        return Err(Error::Config("control grid resolution must be positive".into()));
    }
    let radius = (0.25 - xi).max(0.0).sqrt();
    let lambdas: Vec<f64> = if n_lambda == 1 {
        vec![0.5]
    } else {
        (0..n_lambda).map(|i| 0.5 - radius + 2.0 * radius * i as f64 / (n_lambda - 1) as f64).collect()
    };
    let mut matrices = vec![0.5 * Sym2::IDENTITY];
    for &lambda in &lambdas {
        for k in 0..n_theta {
            let w = Sym2::rotated_diag(lambda, 1.0 - lambda, k as f64 * PI / n_theta as f64);
            if matrices.iter().all(|m| (*m - w).frob_norm() > DUPLICATE_TOL) {
                matrices.push(w);
            }
        }
    }
    let dets = matrices.iter().map(|w| w.det()).collect();
    let gammas = matrices.iter().map(|w| w.trace() / w.frob_norm_sq()).collect();
    Ok(ControlGrid { matrices, dets, gammas, xi })
}

impl ControlGrid {
    pub fn matrices(&self) -> &[Sym2] {
        &self.matrices
    }

    pub fn dets(&self) -> &[f64] {
        &self.dets
    }

    pub fn gammas(&self) -> &[f64] {
        &self.gammas
    }

    pub fn xi(&self) -> f64 {
        self.xi
    }

    pub fn len(&self) -> usize {
        self.matrices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.matrices.is_empty()
    }

    /// `max_W { -W : H + 2 sqrt(det W) sqrt(f) }` and the first maximiser.
    pub fn hamiltonian(&self, hessian: &Sym2, f: f64) -> (f64, usize) {
        let sf = f.max(0.0).sqrt();
        let mut best = (f64::NEG_INFINITY, 0);
        for (k, (w, d)) in self.matrices.iter().zip(&self.dets).enumerate() {
            let v = -w.frob(hessian) + 2.0 * d.max(0.0).sqrt() * sf;
            if v > best.0 {
                best = (v, k);
            }
        }
        best
    }
}

/// Monge–Ampère data: `det D^2 u = f` in the domain, `u = g` on its boundary.
#[derive(Clone)]
pub struct MaProblem {
    pub f: ScalarField,
    pub g: ScalarField,
    /// Hessian of the extension of `g`, if known.
    pub g_hessian: Option<MatrixField>,
    pub xi: f64,
    pub n_lambda: usize,
    pub n_theta: usize,
}

impl MaProblem {
    pub fn new(
        f: impl Fn(Point) -> f64 + Send + Sync + 'static,
        g: impl Fn(Point) -> f64 + Send + Sync + 'static,
        xi: f64,
    ) -> Self {
        MaProblem { f: Arc::new(f), g: Arc::new(g), g_hessian: None, xi, n_lambda: 16, n_theta: 16 }
    }

    pub fn with_g_hessian(mut self, h: impl Fn(Point) -> Sym2 + Send + Sync + 'static) -> Self {
        self.g_hessian = Some(Arc::new(h));
        self
    }

    pub fn with_grid(mut self, n_lambda: usize, n_theta: usize) -> Self {
        self.n_lambda = n_lambda;
        self.n_theta = n_theta;
        self
    }

    pub fn control_grid(&self) -> Result<ControlGrid> {
        build_control_grid(self.xi, self.n_lambda, self.n_theta)
    }
}

impl std::fmt::Debug for MaProblem {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("MaProblem")
            .field("xi", &self.xi)
            .field("n_lambda", &self.n_lambda)
            .field("n_theta", &self.n_theta)
            .finish_non_exhaustive()
    }
}

/// The HJB problem for `v = -u`: controls `A^W = W`,
/// `f^W = -2 sqrt(det W f)` and boundary datum `-g`. `f` must be positive
/// at every sample point.
pub fn ma_to_hjb(ma: &MaProblem, grid: &ControlGrid, samples: &[Point]) -> Result<ControlProblem> {
    if grid.is_empty() {
        return Err(Error::Config("empty control grid".into()));
    }
    if let Some(x) = samples.iter().find(|&&x| !((ma.f)(x) > 0.0)) {
        return Err(Error::Domain(format!("f is not positive at ({}, {}): {}", x[0], x[1], (ma.f)(*x))));
    }
    let controls = grid
        .matrices()
        .iter()
        .zip(grid.dets())
        .enumerate()
        .map(|(k, (&w, &d))| {
            let f = ma.f.clone();
            let c = 2.0 * d.max(0.0).sqrt();
            Control::new(format!("W{k}"), move |_| w, move |x| -c * f(x).max(0.0).sqrt())
        })
        .collect();
    let g = ma.g.clone();
    let problem = ControlProblem::new(controls, move |x| -g(x))?;
    Ok(match &ma.g_hessian {
        Some(h) => {
            let h = h.clone();
            problem.with_boundary_hessian(move |x| -1.0 * h(x))
        }
        None => problem,
    })
}

/// `min(1/4, f_min / (2 sup|D^2 u|^2))`.
pub fn xi_from_solution_bound(f_min: f64, hessian_sup: f64) -> Result<f64> {
    if !(f_min > 0.0) || !(hessian_sup > 0.0) {
        return Err(Error::Domain(format!(
            "need positive f_min and Hessian bound, got {f_min} and {hessian_sup}"
        )));
    }
    Ok((f_min / (2.0 * hessian_sup * hessian_sup)).min(0.25))
}

#[derive(Debug, Clone, Copy)]
pub struct CofactorSample {
    pub point: Point,
    /// `Cof(D^2 u_h) / Lap u_h`.
    pub a_u: Sym2,
    /// `-A_u : D^2 u_h + 2 sqrt(det A_u) sqrt(f)`.
    pub residual: f64,
}

/// `A_u` and the Monge–Ampère residual at every volume quadrature point of
/// `u_h` where `|Lap u_h| >= threshold`.
pub fn cofactor_policy_diagnostic(
    u_h: &DiscreteFunction,
    f: &(dyn Fn(Point) -> f64 + Sync),
    threshold: f64,
) -> Vec<CofactorSample> {
    let space = u_h.space();
    let rule = space.volume_rule();
    par_map(space.mesh().num_triangles(), false, |t| {
        let map = space.element_map(t);
        (0..rule.len())
            .filter_map(|q| {
                let h = u_h.eval_quadrature(t, q).hessian;
                let lap = h.trace();
                if lap.abs() < threshold {
                    return None;
                }
                let x = map.to_physical(rule.reference_point(q));
                let a_u = (1.0 / lap) * h.cofactor();
                let residual = -a_u.frob(&h) + 2.0 * a_u.det().max(0.0).sqrt() * f(x).max(0.0).sqrt();
                Some(CofactorSample { point: x, a_u, residual })
            })
            .collect::<Vec<_>>()
    })
    .into_iter()
    .flatten()
    .collect()
}
