use std::io::{BufRead, Write};
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::fem::space::FeSpace;
use crate::mesh::PointLocator;
use crate::solver::linear::{linear_solve, TripletList};
use crate::tensor::{Point, Sym2};

/// Value, physical gradient and physical Hessian at one point.
#[derive(Debug, Clone, Copy, Default)]
pub struct PointEval {
    pub value: f64,
    pub gradient: Point,
    pub hessian: Sym2,
}

/// Coefficient vector over a [`FeSpace`].
#[derive(Debug, Clone)]
pub struct DiscreteFunction {
    space: Arc<FeSpace>,
    coeffs: Vec<f64>,
}

impl DiscreteFunction {
    pub fn zeros(space: Arc<FeSpace>) -> Self {
        let n = space.n_dofs();
        DiscreteFunction { space, coeffs: vec![0.0; n] }
    }

    pub fn from_coeffs(space: Arc<FeSpace>, coeffs: Vec<f64>) -> Result<Self> {
        if coeffs.len() != space.n_dofs() {
            return Err(Error::Config(format!(
                "coefficient vector has length {}, space has {} dofs",
                coeffs.len(),
                space.n_dofs()
            )));
        }
        Ok(DiscreteFunction { space, coeffs })
    }

    /// Nodal interpolant.
    pub fn interpolate(space: Arc<FeSpace>, g: impl Fn(Point) -> f64) -> Self {
        let coeffs = space.nodes().iter().map(|&x| g(x)).collect();
        DiscreteFunction { space, coeffs }
    }

    pub fn space(&self) -> &Arc<FeSpace> {
        &self.space
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [f64] {
        &mut self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<f64> {
        self.coeffs
    }

    /// Linear combination `a * self + b * other` on the same space.
    pub fn axpby(&self, a: f64, other: &DiscreteFunction, b: f64) -> DiscreteFunction {
        assert!(Arc::ptr_eq(&self.space, &other.space), "functions live on different spaces");
        let coeffs = self.coeffs.iter().zip(&other.coeffs).map(|(x, y)| a * x + b * y).collect();
        DiscreteFunction { space: self.space.clone(), coeffs }
    }

    /// Evaluation at the reference point `xi` of element `t`.
    pub fn eval_reference(&self, t: usize, xi: Point) -> PointEval {
        let ev = self.space.basis().eval(xi);
        let map = self.space.element_map(t);
        let mut out = PointEval::default();
        for (i, &g) in self.space.element_dofs(t).iter().enumerate() {
            let c = self.coeffs[g];
            out.value += c * ev.values[i];
            let grad = map.gradient(ev.gradients[i]);
            out.gradient[0] += c * grad[0];
            out.gradient[1] += c * grad[1];
            out.hessian = out.hessian + c * map.hessian(&ev.hessians[i]);
        }
        out
    }

    /// Evaluation at volume quadrature point `q` of element `t`.
    pub fn eval_quadrature(&self, t: usize, q: usize) -> PointEval {
        let tab = &self.space.tabulation()[q];
        let map = self.space.element_map(t);
        let mut value = 0.0;
        let mut grad = [0.0; 2];
        let mut hess = Sym2::ZERO;
        for (i, &g) in self.space.element_dofs(t).iter().enumerate() {
            let c = self.coeffs[g];
            value += c * tab.values[i];
            grad[0] += c * tab.gradients[i][0];
            grad[1] += c * tab.gradients[i][1];
            hess = hess + c * tab.hessians[i];
        }
        PointEval { value, gradient: map.gradient(grad), hessian: map.hessian(&hess) }
    }

    pub fn eval_point(&self, locator: &PointLocator<'_>, x: Point) -> Option<f64> {
        let (t, bary) = locator.locate(x)?;
        Some(self.eval_reference(t, [bary[1], bary[2]]).value)
    }

    /// Interpolates `self` at the Lagrange nodes of `fine`, which must be
    /// a refinement of (or equal to) this function's mesh.
    pub fn prolongate(&self, fine: &Arc<FeSpace>) -> Result<DiscreteFunction> {
        let locator = PointLocator::new(self.space.mesh());
        let mut coeffs = Vec::with_capacity(fine.n_dofs());
        for &x in fine.nodes() {
            let v = self
                .eval_point(&locator, x)
                .ok_or_else(|| Error::Domain(format!("node ({}, {}) lies outside the coarse mesh", x[0], x[1])))?;
            coeffs.push(v);
        }
        DiscreteFunction::from_coeffs(fine.clone(), coeffs)
    }

    /// Text format: `"ndofs p"` header, then one coefficient per line.
    pub fn write_to<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "{} {}", self.coeffs.len(), self.space.degree())?;
        for c in &self.coeffs {
            writeln!(w, "{c:.16e}")?;
        }
        Ok(())
    }

    pub fn read_from<R: BufRead>(space: Arc<FeSpace>, r: R) -> Result<Self> {
        let mut lines = r.lines();
        let header = lines.next().ok_or_else(|| Error::Parse("empty solution file".into()))??;
        let mut parts = header.split_whitespace();
        let parse = |s: Option<&str>| -> Result<usize> {
            s.ok_or_else(|| Error::Parse("short header".into()))?
                .parse()
                .map_err(|e| Error::Parse(format!("header: {e}")))
        };
        let n = parse(parts.next())?;
        let p = parse(parts.next())?;
        if n != space.n_dofs() || p != space.degree() {
            return Err(Error::Parse(format!(
                "solution is for {n} dofs / degree {p}, space has {} / {}",
                space.n_dofs(),
                space.degree()
            )));
        }
        let mut coeffs = Vec::with_capacity(n);
        for line in lines {
            let line = line?;
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            coeffs.push(line.parse::<f64>().map_err(|e| Error::Parse(format!("{line}: {e}")))?);
        }
        if coeffs.len() != n {
            return Err(Error::Parse(format!("expected {n} coefficients, found {}", coeffs.len())));
        }
        DiscreteFunction::from_coeffs(space, coeffs)
    }
}

/// How the Dirichlet datum `g_h` is built from `g`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Deserialize, serde::Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum BoundaryProjection {
    #[default]
    Interpolation,
    L2Projection,
}

/// Global L^2 projection of `g` onto the space.
pub fn l2_project(space: &Arc<FeSpace>, g: impl Fn(Point) -> f64) -> Result<DiscreteFunction> {
    let n = space.n_dofs();
    let nloc = space.num_local();
    let rule = space.volume_rule();
    let mut mass = TripletList::new(n, n);
    let mut rhs = vec![0.0; n];
    for t in 0..space.mesh().num_triangles() {
        let map = space.element_map(t);
        let dofs = space.element_dofs(t);
        let mut local = vec![0.0; nloc * nloc];
        for q in 0..rule.len() {
            let w = rule.weights[q] * map.det;
            let phi = &space.tabulation()[q].values;
            let gx = g(map.to_physical(rule.reference_point(q)));
            for i in 0..nloc {
                rhs[dofs[i]] += w * gx * phi[i];
                for j in 0..nloc {
                    local[i * nloc + j] += w * phi[i] * phi[j];
                }
            }
        }
        for i in 0..nloc {
            for j in 0..nloc {
                mass.push(dofs[i], dofs[j], local[i * nloc + j]);
            }
        }
    }
    let coeffs = linear_solve(&mass.to_csc()?, &rhs, 1e-12)
        .map_err(|e| Error::LinearSolve(format!("mass matrix: {e}")))?;
    DiscreteFunction::from_coeffs(space.clone(), coeffs)
}

/// The L^2 projection of `g`; its boundary coefficients are the Dirichlet
/// datum.
pub fn l2_project_boundary(space: &Arc<FeSpace>, g: impl Fn(Point) -> f64) -> Result<DiscreteFunction> {
    l2_project(space, g)
}

/// `g_h` as a full member of the space.
pub fn boundary_datum(
    space: &Arc<FeSpace>,
    g: impl Fn(Point) -> f64,
    mode: BoundaryProjection,
) -> Result<DiscreteFunction> {
    match mode {
        BoundaryProjection::Interpolation => Ok(DiscreteFunction::interpolate(space.clone(), g)),
        BoundaryProjection::L2Projection => l2_project_boundary(space, g),
    }
}
