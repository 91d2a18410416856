//! Problem data for `sup_alpha (A^alpha : D^2 u - f^alpha) = 0`, the
//! gamma renormalisation and the Cordes condition.

use std::fmt;
use std::sync::Arc;

use crate::error::{CordesViolation, Error, Result};
use crate::fem::BoundaryProjection;
use crate::tensor::{Point, Sym2};

pub type ScalarField = Arc<dyn Fn(Point) -> f64 + Send + Sync>;
pub type MatrixField = Arc<dyn Fn(Point) -> Sym2 + Send + Sync>;
pub type VectorField = Arc<dyn Fn(Point) -> Point + Send + Sync>;

/// One member of the finite control set: coefficient `A` and source `f`.
#[derive(Clone)]
pub struct Control {
    pub label: String,
    pub coefficient: MatrixField,
    pub source: ScalarField,
}

impl Control {
    pub fn new(
        label: impl Into<String>,
        coefficient: impl Fn(Point) -> Sym2 + Send + Sync + 'static,
        source: impl Fn(Point) -> f64 + Send + Sync + 'static,
    ) -> Self {
        Control { label: label.into(), coefficient: Arc::new(coefficient), source: Arc::new(source) }
    }

    pub fn constant(label: impl Into<String>, a: Sym2, f: f64) -> Self {
        Control::new(label, move |_| a, move |_| f)
    }
}

impl fmt::Debug for Control {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Control").field("label", &self.label).finish_non_exhaustive()
    }
}

/// Coefficient family over a finite control set plus the boundary datum.
#[derive(Clone)]
pub struct ControlProblem {
    controls: Vec<Control>,
    boundary: ScalarField,
    boundary_hessian: Option<MatrixField>,
}

impl ControlProblem {
    pub fn new(controls: Vec<Control>, boundary: impl Fn(Point) -> f64 + Send + Sync + 'static) -> Result<Self> {
        if controls.is_empty() {
            return Err(Error::Config("the control set is empty".into()));
        }
        Ok(ControlProblem { controls, boundary: Arc::new(boundary), boundary_hessian: None })
    }

    /// Hessian of the extension of `g` into the domain, used by the
    /// data-oscillation indicators.
    pub fn with_boundary_hessian(mut self, h: impl Fn(Point) -> Sym2 + Send + Sync + 'static) -> Self {
        self.boundary_hessian = Some(Arc::new(h));
        self
    }

    pub fn controls(&self) -> &[Control] {
        &self.controls
    }

    pub fn num_controls(&self) -> usize {
        self.controls.len()
    }

    pub fn boundary(&self, x: Point) -> f64 {
        (self.boundary)(x)
    }

    pub fn boundary_fn(&self) -> &ScalarField {
        &self.boundary
    }

    pub fn boundary_hessian(&self) -> Option<&MatrixField> {
        self.boundary_hessian.as_ref()
    }

    /// Same problem with the controls reordered (`order[k]` is the old index
    /// of the new `k`-th control).
    pub fn permuted(&self, order: &[usize]) -> Self {
        assert_eq!(order.len(), self.controls.len());
        ControlProblem {
            controls: order.iter().map(|&k| self.controls[k].clone()).collect(),
            boundary: self.boundary.clone(),
            boundary_hessian: self.boundary_hessian.clone(),
        }
    }

    /// `A -> c A`, `f -> c f` for every control.
    pub fn scaled(&self, c: f64) -> Self {
        let controls = self
            .controls
            .iter()
            .map(|ctl| {
                let a = ctl.coefficient.clone();
                let f = ctl.source.clone();
                Control::new(ctl.label.clone(), move |x| c * a(x), move |x| c * f(x))
            })
            .collect();
        ControlProblem { controls, boundary: self.boundary.clone(), boundary_hessian: self.boundary_hessian.clone() }
    }

    /// `A(x)` and `f(x)` for one control.
    #[inline]
    pub fn coefficients(&self, x: Point, control: usize) -> (Sym2, f64) {
        let c = &self.controls[control];
        ((c.coefficient)(x), (c.source)(x))
    }

    /// `sup_alpha gamma^alpha (A^alpha : H - f^alpha)` and the first maximiser.
    #[inline]
    pub fn hamiltonian(&self, x: Point, hessian: &Sym2) -> (f64, usize) {
        let mut best = (f64::NEG_INFINITY, 0);
        for (k, c) in self.controls.iter().enumerate() {
            let a = (c.coefficient)(x);
            let gamma = a.trace() / a.frob_norm_sq();
            let v = gamma * (a.frob(hessian) - (c.source)(x));
            if v > best.0 {
                best = (v, k);
            }
        }
        best
    }
}

impl fmt::Debug for ControlProblem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ControlProblem")
            .field("controls", &self.controls)
            .field("has_boundary_hessian", &self.boundary_hessian.is_some())
            .finish()
    }
}

/// `gamma = (A:I) / (A:A)`.
pub fn gamma_of(a: &Sym2) -> Result<f64> {
    let norm = a.frob_norm_sq();
    if norm == 0.0 || !norm.is_finite() {
        return Err(Error::Domain("gamma is undefined for the zero matrix".into()));
    }
    Ok(a.trace() / norm)
}

/// `F_gamma` at one point for a given Hessian, with the first maximising
/// control.
pub fn f_gamma_eval(problem: &ControlProblem, hessian: &Sym2, point: Point) -> Result<(f64, usize)> {
    if problem.num_controls() == 0 {
        return Err(Error::Config("the control set is empty".into()));
    }
    for (k, c) in problem.controls().iter().enumerate() {
        gamma_of(&(c.coefficient)(point)).map_err(|_| Error::Domain(format!("control {k} has a zero coefficient")))?;
    }
    Ok(problem.hamiltonian(point, hessian))
}

#[derive(Debug, Clone)]
pub struct CordesReport {
    /// `min (Tr A)^2/|A|^2 - (d - 1)` over samples, clamped to 1.
    pub epsilon: f64,
    pub gamma_min: f64,
    pub gamma_max: f64,
    /// Smallest eigenvalue seen (the sampled ellipticity constant).
    pub min_eigenvalue: f64,
    pub worst_point: Point,
    pub worst_control: usize,
    pub clamped: bool,
}

const DIMENSION: f64 = 2.0;

/// Samples the Cordes constant of `problem` at `points`.
pub fn cordes_epsilon(problem: &ControlProblem, points: &[Point]) -> Result<CordesReport> {
    if points.is_empty() {
        return Err(Error::Config("no sample points for the Cordes check".into()));
    }
    let mut report = CordesReport {
        epsilon: f64::INFINITY,
        gamma_min: f64::INFINITY,
        gamma_max: f64::NEG_INFINITY,
        min_eigenvalue: f64::INFINITY,
        worst_point: points[0],
        worst_control: 0,
        clamped: false,
    };
    for &x in points {
        for k in 0..problem.num_controls() {
            let (a, _) = problem.coefficients(x, k);
            let eps = a.trace().powi(2) / a.frob_norm_sq() - (DIMENSION - 1.0);
            if eps < report.epsilon {
                report.epsilon = eps;
                report.worst_point = x;
                report.worst_control = k;
            }
            let lambda = a.eigenvalues()[0];
            report.min_eigenvalue = report.min_eigenvalue.min(lambda);
            if eps > 0.0 && !(lambda > 0.0) {
                return Err(Error::Domain(format!(
                    "coefficient of control {} is not elliptic at ({}, {}): smallest eigenvalue {lambda:e}",
                    problem.controls()[k].label, x[0], x[1]
                )));
            }
            if let Ok(gamma) = gamma_of(&a) {
                report.gamma_min = report.gamma_min.min(gamma);
                report.gamma_max = report.gamma_max.max(gamma);
            }
        }
    }
    if report.epsilon <= 0.0 {
        return Err(Error::Cordes(CordesViolation {
            epsilon: report.epsilon,
            point: report.worst_point,
            control: problem.controls()[report.worst_control].label.clone(),
        }));
    }
    if report.epsilon > 1.0 {
        report.epsilon = 1.0;
        report.clamped = true;
    }
    Ok(report)
}

/// Default interior penalty per polynomial degree.
pub fn default_sigma(degree: usize) -> f64 {
    match degree {
        2 => 10.0,
        3 => 50.0,
        _ => 100.0,
    }
}

/// Discretisation and iteration parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct SchemeParams {
    pub sigma: f64,
    pub degree: usize,
    pub volume_quadrature: usize,
    pub edge_quadrature: usize,
    pub linear_tol: f64,
    /// Howard increment tolerance.
    pub tol: f64,
    pub itermax: usize,
    /// Accumulate element contributions in a single thread.
    pub sequential: bool,
    pub boundary_projection: BoundaryProjection,
    /// Turn Cordes violations into hard errors instead of warnings.
    pub strict_cordes: bool,
}

impl SchemeParams {
    pub fn new(degree: usize) -> Self {
        SchemeParams {
            sigma: default_sigma(degree),
            degree,
            volume_quadrature: 2 * degree,
            edge_quadrature: 2 * degree,
            linear_tol: 1e-12,
            tol: 1e-10,
            itermax: 50,
            sequential: false,
            boundary_projection: BoundaryProjection::Interpolation,
            strict_cordes: false,
        }
    }

    pub fn with_sigma(mut self, sigma: f64) -> Self {
        self.sigma = sigma;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.sigma > 0.0) {
            return Err(Error::Config(format!("sigma must be positive, got {}", self.sigma)));
        }
        if !(self.tol > 0.0) || !(self.linear_tol > 0.0) {
            return Err(Error::Config("tolerances must be positive".into()));
        }
        if self.itermax < 1 {
            return Err(Error::Config("itermax must be at least 1".into()));
        }
        if !crate::fem::basis::SUPPORTED_DEGREES.contains(&self.degree) {
            return Err(Error::Config(format!("unsupported polynomial degree {}", self.degree)));
        }
        Ok(())
    }
}

/// Exact solution with its first and second derivatives.
#[derive(Clone)]
pub struct ExactSolution {
    pub value: ScalarField,
    pub gradient: VectorField,
    pub hessian: MatrixField,
}

impl ExactSolution {
    pub fn new(
        value: impl Fn(Point) -> f64 + Send + Sync + 'static,
        gradient: impl Fn(Point) -> Point + Send + Sync + 'static,
        hessian: impl Fn(Point) -> Sym2 + Send + Sync + 'static,
    ) -> Self {
        ExactSolution { value: Arc::new(value), gradient: Arc::new(gradient), hessian: Arc::new(hessian) }
    }

    pub fn negated(&self) -> Self {
        let (v, g, h) = (self.value.clone(), self.gradient.clone(), self.hessian.clone());
        ExactSolution::new(
            move |x| -v(x),
            move |x| {
                let d = g(x);
                [-d[0], -d[1]]
            },
            move |x| -1.0 * h(x),
        )
    }
}

impl fmt::Debug for ExactSolution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("ExactSolution")
    }
}
