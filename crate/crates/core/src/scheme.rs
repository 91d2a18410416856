//! Assembly of the C^0 interior penalty scheme
//!
//! `a_h(u; v) = sum_K (F_gamma[u], Lap v)_K + sum_e sigma/h_e (jump(du/dn), jump(dv/dn))_e`
//!
//! and of its linearisation for a fixed policy, plus the discrete norms.

use std::sync::Arc;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::fem::{DiscreteFunction, FeSpace};
use crate::mesh::InteriorEdge;
use crate::problem::{ControlProblem, ExactSolution};
use crate::quadrature::QuadratureRule;
use crate::solver::linear::{linear_solve, SparseMatrix, TripletList};
use crate::tensor::{dot, Point, Sym2};

/// Maps `f` over `0..n`, in parallel unless `sequential`. The result is in
/// index order either way.
pub(crate) fn par_map<T: Send>(n: usize, sequential: bool, f: impl Fn(usize) -> T + Sync + Send) -> Vec<T> {
    if sequential {
        (0..n).map(f).collect()
    } else {
        (0..n).into_par_iter().map(f).collect()
    }
}

/// Normal-derivative jumps of the local basis functions of both neighbours
/// at the quadrature points of an interior edge.
pub struct EdgeData {
    /// Left element dofs followed by right element dofs.
    pub dofs: Vec<usize>,
    pub points: Vec<Point>,
    /// Quadrature weights scaled by the edge length.
    pub weights: Vec<f64>,
    /// `jumps[q * dofs.len() + k]`.
    pub jumps: Vec<f64>,
    pub length: f64,
}

impl EdgeData {
    pub fn new(space: &FeSpace, edge: &InteriorEdge) -> Self {
        let mesh = space.mesh();
        let nloc = space.num_local();
        let rule = space.edge_rule();
        let a = mesh.vertices()[edge.vertices[0]];
        let b = mesh.vertices()[edge.vertices[1]];
        let points: Vec<Point> =
            rule.points.iter().map(|&s| [a[0] + s * (b[0] - a[0]), a[1] + s * (b[1] - a[1])]).collect();
        let weights = rule.weights.iter().map(|w| w * edge.length).collect();
        let mut dofs = Vec::with_capacity(2 * nloc);
        dofs.extend_from_slice(space.element_dofs(edge.left));
        dofs.extend_from_slice(space.element_dofs(edge.right));
        let mut jumps = vec![0.0; points.len() * 2 * nloc];
        for (side, t, sign) in [(0, edge.left, 1.0), (1, edge.right, -1.0)] {
            let map = space.element_map(t);
            for (q, &x) in points.iter().enumerate() {
                let ev = space.basis().eval(map.to_reference(x));
                for k in 0..nloc {
                    jumps[q * 2 * nloc + side * nloc + k] = sign * dot(map.gradient(ev.gradients[k]), edge.normal);
                }
            }
        }
        EdgeData { dofs, points, weights, jumps, length: edge.length }
    }

    pub fn num_points(&self) -> usize {
        self.points.len()
    }

    /// `jump(du/dn)` at quadrature point `q`.
    pub fn jump_of(&self, coeffs: &[f64], q: usize) -> f64 {
        let n = self.dofs.len();
        self.dofs.iter().enumerate().map(|(k, &g)| coeffs[g] * self.jumps[q * n + k]).sum()
    }

    /// `int_e jump(du/dn)^2 ds`.
    pub fn jump_sq(&self, coeffs: &[f64]) -> f64 {
        (0..self.num_points()).map(|q| self.weights[q] * self.jump_of(coeffs, q).powi(2)).sum()
    }
}

/// Physical Hessians of the local basis at every volume quadrature point of
/// element `t`, `out[q * nloc + i]`.
fn element_hessians(space: &FeSpace, t: usize) -> Vec<Sym2> {
    let map = space.element_map(t);
    space.tabulation().iter().flat_map(|tab| tab.hessians.iter().map(move |h| map.hessian(h))).collect()
}

/// Linear system of one fixed policy before boundary conditions.
pub struct PolicySystem {
    pub matrix: TripletList,
    pub rhs: Vec<f64>,
}

/// Penalty matrix `sum_e sigma/h_e (jump(d phi_j/dn), jump(d phi_i/dn))_e`.
pub fn assemble_penalty(space: &FeSpace, sigma: f64, sequential: bool) -> TripletList {
    let interior = &space.topology().interior;
    let blocks = par_map(interior.len(), sequential, |e| {
        let data = EdgeData::new(space, &interior[e]);
        let n = data.dofs.len();
        let scale = sigma / data.length;
        let mut local = vec![0.0; n * n];
        for q in 0..data.num_points() {
            let w = scale * data.weights[q];
            let jq = &data.jumps[q * n..(q + 1) * n];
            for i in 0..n {
                for j in 0..n {
                    local[i * n + j] += w * jq[i] * jq[j];
                }
            }
        }
        (data.dofs, local)
    });
    let mut out = TripletList::new(space.n_dofs(), space.n_dofs());
    for (dofs, local) in blocks {
        let n = dofs.len();
        for i in 0..n {
            for j in 0..n {
                out.push(dofs[i], dofs[j], local[i * n + j]);
            }
        }
    }
    out
}

/// Matrix and load of `a_alpha(u, v) = (gamma A : D^2 u, Lap v) + penalty`
/// and `l_alpha(v) = (gamma f, Lap v)` for the policy given per volume
/// quadrature point (element-major).
pub fn assemble_policy_system(
    space: &FeSpace,
    problem: &ControlProblem,
    policy: &[usize],
    sigma: f64,
    sequential: bool,
) -> Result<PolicySystem> {
    let nq = space.volume_rule().len();
    let n_elem = space.mesh().num_triangles();
    if policy.len() != n_elem * nq {
        return Err(Error::Config(format!("policy has {} entries, expected {}", policy.len(), n_elem * nq)));
    }
    if let Some(&bad) = policy.iter().find(|&&c| c >= problem.num_controls()) {
        return Err(Error::Config(format!("policy refers to control {bad} of {}", problem.num_controls())));
    }
    let nloc = space.num_local();
    let rule = space.volume_rule();
    let blocks = par_map(n_elem, sequential, |t| {
        let map = space.element_map(t);
        let hess = element_hessians(space, t);
        let mut local = vec![0.0; nloc * nloc];
        let mut load = vec![0.0; nloc];
        let mut a_h = vec![0.0; nloc];
        for q in 0..nq {
            let x = map.to_physical(rule.reference_point(q));
            let (a, f) = problem.coefficients(x, policy[t * nq + q]);
            let gamma = a.trace() / a.frob_norm_sq();
            let w = rule.weights[q] * map.det;
            let hq = &hess[q * nloc..(q + 1) * nloc];
            for j in 0..nloc {
                a_h[j] = gamma * a.frob(&hq[j]);
            }
            for i in 0..nloc {
                let lap = w * hq[i].trace();
                load[i] += lap * gamma * f;
                for j in 0..nloc {
                    local[i * nloc + j] += lap * a_h[j];
                }
            }
        }
        (local, load)
    });
    let mut matrix = TripletList::new(space.n_dofs(), space.n_dofs());
    let mut rhs = vec![0.0; space.n_dofs()];
    for (t, (local, load)) in blocks.into_iter().enumerate() {
        let dofs = space.element_dofs(t);
        for i in 0..nloc {
            rhs[dofs[i]] += load[i];
            for j in 0..nloc {
                matrix.push(dofs[i], dofs[j], local[i * nloc + j]);
            }
        }
    }
    matrix.extend(&assemble_penalty(space, sigma, sequential));
    Ok(PolicySystem { matrix, rhs })
}

/// System restricted to the interior dofs with the boundary values moved
/// to the right-hand side.
pub struct ReducedSystem {
    pub matrix: SparseMatrix,
    pub rhs: Vec<f64>,
    /// Global index of each unknown.
    pub free: Vec<usize>,
}

impl ReducedSystem {
    pub fn new(system: &PolicySystem, datum: &DiscreteFunction) -> Result<Self> {
        let space = datum.space();
        let n = space.n_dofs();
        if system.rhs.len() != n {
            return Err(Error::Config("system and boundary datum live on different spaces".into()));
        }
        let free = space.interior_dofs();
        let mut index = vec![usize::MAX; n];
        for (k, &g) in free.iter().enumerate() {
            index[g] = k;
        }
        let g = datum.coeffs();
        let mut rhs: Vec<f64> = free.iter().map(|&i| system.rhs[i]).collect();
        let mut reduced = TripletList::new(free.len(), free.len());
        reduced.entries.reserve(system.matrix.entries.len());
        for &(i, j, v) in &system.matrix.entries {
            let fi = index[i];
            if fi == usize::MAX {
                continue;
            }
            let fj = index[j];
            if fj == usize::MAX {
                rhs[fi] -= v * g[j];
            } else {
                reduced.push(fi, fj, v);
            }
        }
        Ok(ReducedSystem { matrix: reduced.to_csc()?, rhs, free })
    }

    /// Solves and returns the full function with the boundary values of
    /// `datum`.
    pub fn solve(&self, datum: &DiscreteFunction, tol: f64) -> Result<DiscreteFunction> {
        let x = if self.free.is_empty() { Vec::new() } else { linear_solve(&self.matrix, &self.rhs, tol)? };
        let mut out = datum.clone();
        for (k, &g) in self.free.iter().enumerate() {
            out.coeffs_mut()[g] = x[k];
        }
        Ok(out)
    }
}

/// Solves the linear problem of one fixed policy with Dirichlet datum.
pub fn solve_policy(
    problem: &ControlProblem,
    datum: &DiscreteFunction,
    policy: &[usize],
    sigma: f64,
    linear_tol: f64,
    sequential: bool,
) -> Result<DiscreteFunction> {
    let system = assemble_policy_system(datum.space(), problem, policy, sigma, sequential)?;
    ReducedSystem::new(&system, datum)?.solve(datum, linear_tol)
}

/// `F_gamma[u]` and the maximising control at every volume quadrature point.
#[derive(Debug, Clone)]
pub struct HamiltonianField {
    pub values: Vec<f64>,
    pub policy: Vec<usize>,
}

pub fn evaluate_hamiltonian(problem: &ControlProblem, u: &DiscreteFunction, sequential: bool) -> HamiltonianField {
    let space = u.space();
    let rule = space.volume_rule();
    let nq = rule.len();
    let per_element = par_map(space.mesh().num_triangles(), sequential, |t| {
        let map = space.element_map(t);
        (0..nq)
            .map(|q| {
                let x = map.to_physical(rule.reference_point(q));
                problem.hamiltonian(x, &u.eval_quadrature(t, q).hessian)
            })
            .collect::<Vec<_>>()
    });
    let mut values = Vec::with_capacity(per_element.len() * nq);
    let mut policy = Vec::with_capacity(per_element.len() * nq);
    for (v, p) in per_element.into_iter().flatten() {
        values.push(v);
        policy.push(p);
    }
    HamiltonianField { values, policy }
}

/// `R_i = a_h(u; phi_i)` for every global basis function.
pub fn residual(problem: &ControlProblem, u: &DiscreteFunction, sigma: f64, sequential: bool) -> Vec<f64> {
    let space = u.space();
    let nloc = space.num_local();
    let rule = space.volume_rule();
    let nq = rule.len();
    let h = evaluate_hamiltonian(problem, u, sequential);
    let volume = par_map(space.mesh().num_triangles(), sequential, |t| {
        let map = space.element_map(t);
        let mut local = vec![0.0; nloc];
        for q in 0..nq {
            let w = rule.weights[q] * map.det * h.values[t * nq + q];
            let tab = &space.tabulation()[q];
            for (i, hi) in tab.hessians.iter().enumerate() {
                local[i] += w * map.hessian(hi).trace();
            }
        }
        local
    });
    let interior = &space.topology().interior;
    let edges = par_map(interior.len(), sequential, |e| {
        let data = EdgeData::new(space, &interior[e]);
        let n = data.dofs.len();
        let mut local = vec![0.0; n];
        for q in 0..data.num_points() {
            let w = sigma / data.length * data.weights[q] * data.jump_of(u.coeffs(), q);
            for k in 0..n {
                local[k] += w * data.jumps[q * n + k];
            }
        }
        (data.dofs, local)
    });
    let mut out = vec![0.0; space.n_dofs()];
    for (t, local) in volume.into_iter().enumerate() {
        for (&g, v) in space.element_dofs(t).iter().zip(local) {
            out[g] += v;
        }
    }
    for (dofs, local) in edges {
        for (g, v) in dofs.into_iter().zip(local) {
            out[g] += v;
        }
    }
    out
}

/// `a_h(u; v)`.
pub fn nonlinear_form(problem: &ControlProblem, u: &DiscreteFunction, v: &DiscreteFunction, sigma: f64) -> f64 {
    residual(problem, u, sigma, false).iter().zip(v.coeffs()).map(|(r, c)| r * c).sum()
}

/// `max_i |a_h(u; phi_i)|` over interior basis functions.
pub fn nonlinear_residual(problem: &ControlProblem, u: &DiscreteFunction, sigma: f64, sequential: bool) -> f64 {
    let r = residual(problem, u, sigma, sequential);
    let space = u.space();
    (0..space.n_dofs()).filter(|&i| !space.is_boundary_dof(i)).fold(0.0, |m, i| m.max(r[i].abs()))
}

/// [`nonlinear_residual`] with the penalty and threading of `params`.
pub fn consistency_residual(problem: &ControlProblem, u: &DiscreteFunction, params: &crate::problem::SchemeParams) -> f64 {
    nonlinear_residual(problem, u, params.sigma, params.sequential)
}

/// `int_e jump(du/dn)^2` for each interior edge, in topology order.
pub fn edge_jump_squares(u: &DiscreteFunction, sequential: bool) -> Vec<f64> {
    let space = u.space();
    let interior = &space.topology().interior;
    par_map(interior.len(), sequential, |e| EdgeData::new(space, &interior[e]).jump_sq(u.coeffs()))
}

/// `||v||_h^2 = |D^2_h v|^2 + sum_e sigma/h_e ||jump(dv/dn)||_e^2`.
pub fn mesh_norm(v: &DiscreteFunction, sigma: f64) -> f64 {
    let space = v.space();
    let rule = space.volume_rule();
    let mut total = 0.0;
    for t in 0..space.mesh().num_triangles() {
        let map = space.element_map(t);
        for q in 0..rule.len() {
            total += rule.weights[q] * map.det * v.eval_quadrature(t, q).hessian.frob_norm_sq();
        }
    }
    for (e, j) in space.topology().interior.iter().zip(edge_jump_squares(v, false)) {
        total += sigma / e.length * j;
    }
    total.sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorNorms {
    pub l2: f64,
    pub h1: f64,
    /// Mesh-dependent norm `||u - u_h||_h`.
    pub h: f64,
    /// Maximum nodal error.
    pub linf: f64,
}

/// Quadrature degree used for errors against an exact solution.
fn error_rule(degree: usize) -> QuadratureRule {
    QuadratureRule::triangle(2 * degree + 4)
}

const ERROR_MAX_DEPTH: usize = 6;

fn rule_on(rule: &QuadratureRule, tri: &[Point; 3], f: &mut dyn FnMut(Point) -> [f64; 3]) -> [f64; 3] {
    let scale = 2.0 * (0.5 * ((tri[1][0] - tri[0][0]) * (tri[2][1] - tri[0][1]) - (tri[2][0] - tri[0][0]) * (tri[1][1] - tri[0][1]))).abs();
    let mut acc = [0.0; 3];
    for (l, w) in rule.points.iter().zip(&rule.weights) {
        let xi = [
            l[0] * tri[0][0] + l[1] * tri[1][0] + l[2] * tri[2][0],
            l[0] * tri[0][1] + l[1] * tri[1][1] + l[2] * tri[2][1],
        ];
        let v = f(xi);
        for k in 0..3 {
            acc[k] += w * scale * v[k];
        }
    }
    acc
}

fn red_children(t: &[Point; 3]) -> [[Point; 3]; 4] {
    let mid = |a: Point, b: Point| [0.5 * (a[0] + b[0]), 0.5 * (a[1] + b[1])];
    let (m0, m1, m2) = (mid(t[1], t[2]), mid(t[2], t[0]), mid(t[0], t[1]));
    [[t[0], m2, m1], [m2, t[1], m0], [m1, m0, t[2]], [m0, m1, m2]]
}

/// Integrates three nonnegative quantities over a part of the reference
/// triangle, subdividing until the composite rule stabilises. Resolves
/// integrable point singularities of the exact solution.
fn integrate_adaptive(rule: &QuadratureRule, tri: &[Point; 3], coarse: [f64; 3], depth: usize, f: &mut dyn FnMut(Point) -> [f64; 3]) -> [f64; 3] {
    let children = red_children(tri);
    let parts: Vec<[f64; 3]> = children.iter().map(|c| rule_on(rule, c, f)).collect();
    let mut fine = [0.0; 3];
    for p in &parts {
        for k in 0..3 {
            fine[k] += p[k];
        }
    }
    let area = (tri[1][0] - tri[0][0]) * (tri[2][1] - tri[0][1]) - (tri[2][0] - tri[0][0]) * (tri[1][1] - tri[0][1]);
    let settled = (0..3).all(|k| (fine[k] - coarse[k]).abs() <= 1e-6 * fine[k].abs() + 1e-24 * area.abs());
    if settled || depth == 0 {
        return fine;
    }
    let mut acc = [0.0; 3];
    for (c, p) in children.iter().zip(parts) {
        let v = integrate_adaptive(rule, c, p, depth - 1, f);
        for k in 0..3 {
            acc[k] += v[k];
        }
    }
    acc
}

/// Integral over triangle `t` of `f` given in reference coordinates,
/// without the Jacobian factor.
fn integrate_element(rule: &QuadratureRule, f: &mut dyn FnMut(Point) -> [f64; 3]) -> [f64; 3] {
    let reference = [[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]];
    let coarse = rule_on(rule, &reference, f);
    integrate_adaptive(rule, &reference, coarse, ERROR_MAX_DEPTH, f)
}

/// Broken `|D^2 (u - u_h)|` squared per element, integrated with a rule
/// finer than the assembly rule and refined where the integrand is rough.
pub fn element_hessian_errors(u_h: &DiscreteFunction, exact_hessian: &(dyn Fn(Point) -> Sym2 + Sync)) -> Vec<f64> {
    let space = u_h.space();
    let rule = error_rule(space.degree());
    par_map(space.mesh().num_triangles(), false, |t| {
        let map = space.element_map(t);
        let v = integrate_element(&rule, &mut |xi| {
            let ev = u_h.eval_reference(t, xi);
            [(exact_hessian(map.to_physical(xi)) - ev.hessian).frob_norm_sq(), 0.0, 0.0]
        });
        v[0] * map.det
    })
}

pub fn error_norms(u_h: &DiscreteFunction, exact: &ExactSolution, sigma: f64) -> ErrorNorms {
    let space = u_h.space();
    let rule = error_rule(space.degree());
    let per_element = par_map(space.mesh().num_triangles(), false, |t| {
        let map = space.element_map(t);
        let v = integrate_element(&rule, &mut |xi| {
            let x = map.to_physical(xi);
            let ev = u_h.eval_reference(t, xi);
            let g = (exact.gradient)(x);
            [
                ((exact.value)(x) - ev.value).powi(2),
                (g[0] - ev.gradient[0]).powi(2) + (g[1] - ev.gradient[1]).powi(2),
                ((exact.hessian)(x) - ev.hessian).frob_norm_sq(),
            ]
        });
        v.map(|a| a * map.det)
    });
    let mut sums = [0.0; 3];
    for acc in per_element {
        for k in 0..3 {
            sums[k] += acc[k];
        }
    }
    let jumps: f64 = space
        .topology()
        .interior
        .iter()
        .zip(edge_jump_squares(u_h, false))
        .map(|(e, j)| sigma / e.length * j)
        .sum();
    let linf = space
        .nodes()
        .iter()
        .zip(u_h.coeffs())
        .fold(0.0f64, |m, (&x, c)| m.max(((exact.value)(x) - c).abs()));
    ErrorNorms { l2: sums[0].sqrt(), h1: sums[1].sqrt(), h: (sums[2] + jumps).sqrt(), linf }
}

/// Convenience wrapper to build a space and datum on a mesh.
pub fn space_and_datum(
    mesh: Arc<crate::mesh::Mesh>,
    degree: usize,
    problem: &ControlProblem,
    mode: crate::fem::BoundaryProjection,
) -> Result<(Arc<FeSpace>, DiscreteFunction)> {
    let space = FeSpace::new(mesh, degree)?;
    let datum = crate::fem::boundary_datum(&space, |x| problem.boundary(x), mode)?;
    Ok((space, datum))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::Mesh;
    use crate::problem::Control;

    fn single(a: Sym2, f: f64) -> ControlProblem {
        ControlProblem::new(vec![Control::constant("a", a, f)], |_| 0.0).unwrap()
    }

    fn space(n: usize, p: usize) -> Arc<FeSpace> {
        FeSpace::new(Arc::new(Mesh::unit_square(n)), p).unwrap()
    }

    fn dense(t: &TripletList) -> Vec<Vec<f64>> {
        let mut m = vec![vec![0.0; t.n_cols]; t.n_rows];
        for &(i, j, v) in &t.entries {
            m[i][j] += v;
        }
        m
    }

    #[test]
    fn policy_matrix_is_not_symmetric_in_general() {
        let sp = space(1, 2);
        let p = single(Sym2::diag(2.0, 1.0), 0.0);
        let policy = vec![0; sp.mesh().num_triangles() * sp.volume_rule().len()];
        let m = dense(&assemble_policy_system(&sp, &p, &policy, 10.0, true).unwrap().matrix);
        let asym = (0..m.len()).flat_map(|i| (0..m.len()).map(move |j| (i, j))).fold(0.0f64, |a, (i, j)| a.max((m[i][j] - m[j][i]).abs()));
        assert!(asym > 1e-3, "max asymmetry {asym}");
    }

    #[test]
    fn penalty_vanishes_on_global_polynomials() {
        for p in [2, 3, 4] {
            let sp = FeSpace::new(Arc::new(Mesh::unit_square(2).bisect_marked(&[0], &[])), p).unwrap();
            let pen = assemble_penalty(&sp, 10.0, false);
            let u = DiscreteFunction::interpolate(sp.clone(), |x| x[0] * x[0] - 3.0 * x[0] * x[1] + x[1]);
            let r = pen.apply(u.coeffs());
            assert!(r.iter().all(|v| v.abs() < 1e-10), "p={p}");
        }
    }

    #[test]
    fn mesh_norm_of_x_squared() {
        for p in [2, 3] {
            let u = DiscreteFunction::interpolate(space(3, p), |x| x[0] * x[0]);
            assert!((mesh_norm(&u, 10.0).powi(2) - 4.0).abs() < 1e-10);
        }
    }

    #[test]
    fn l2_error_of_x_squared_against_zero() {
        let u = DiscreteFunction::zeros(space(2, 2));
        let exact = ExactSolution::new(|x| x[0] * x[0], |x| [2.0 * x[0], 0.0], |_| Sym2::diag(2.0, 0.0));
        let e = error_norms(&u, &exact, 10.0);
        assert!((e.l2 - 1.0 / 5f64.sqrt()).abs() < 1e-12);
        assert!((e.h1 - 2.0 / 3f64.sqrt()).abs() < 1e-12);
        assert!((e.h - 2.0).abs() < 1e-12);
        assert!((e.linf - 1.0).abs() < 1e-15);
    }

    #[test]
    fn residual_is_linear_in_the_test_function_and_matches_the_system() {
        let sp = space(2, 3);
        let p = single(Sym2::new(1.5, 0.2, 1.0), 0.7);
        let nq = sp.volume_rule().len();
        let policy = vec![0; sp.mesh().num_triangles() * nq];
        let sys = assemble_policy_system(&sp, &p, &policy, 50.0, false).unwrap();
        let u = DiscreteFunction::from_coeffs(sp.clone(), (0..sp.n_dofs()).map(|i| (i as f64).cos()).collect()).unwrap();
        let au = sys.matrix.apply(u.coeffs());
        let r = residual(&p, &u, 50.0, false);
        for i in 0..sp.n_dofs() {
            assert!((r[i] - (au[i] - sys.rhs[i])).abs() < 1e-9 * (1.0 + au[i].abs()));
        }
    }

    #[test]
    fn parallel_and_sequential_assembly_agree_bitwise() {
        let sp = space(4, 2);
        let p = single(Sym2::new(2.0, 0.5, 1.0), 1.0);
        let policy = vec![0; sp.mesh().num_triangles() * sp.volume_rule().len()];
        let a = assemble_policy_system(&sp, &p, &policy, 10.0, true).unwrap();
        let b = assemble_policy_system(&sp, &p, &policy, 10.0, false).unwrap();
        assert_eq!(a.matrix.entries, b.matrix.entries);
        assert_eq!(a.rhs, b.rhs);
    }

    #[test]
    fn malformed_policy_is_rejected() {
        let sp = space(1, 2);
        let p = single(Sym2::IDENTITY, 0.0);
        assert!(assemble_policy_system(&sp, &p, &[0; 3], 10.0, true).is_err());
        let n = sp.mesh().num_triangles() * sp.volume_rule().len();
        assert!(assemble_policy_system(&sp, &p, &vec![1; n], 10.0, true).is_err());
    }

    #[test]
    fn poisson_quadratic_is_reproduced() {
        // -u = x^2 + y^2 with Lap u = 4
        let u_exact = |x: Point| x[0] * x[0] + x[1] * x[1];
        let problem = ControlProblem::new(vec![Control::constant("lap", Sym2::IDENTITY, 4.0)], u_exact).unwrap();
        let (sp, datum) =
            space_and_datum(Arc::new(Mesh::unit_square(3)), 2, &problem, crate::fem::BoundaryProjection::Interpolation)
                .unwrap();
        let policy = vec![0; sp.mesh().num_triangles() * sp.volume_rule().len()];
        let u = solve_policy(&problem, &datum, &policy, 10.0, 1e-12, false).unwrap();
        for (c, x) in u.coeffs().iter().zip(sp.nodes()) {
            assert!((c - u_exact(*x)).abs() < 1e-10);
        }
    }
}
