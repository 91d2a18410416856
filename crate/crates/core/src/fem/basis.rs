//! Lagrange shape functions of degree 2..=4 on the reference triangle,
//! with first and second derivatives, and the affine map to physical
//! triangles.

use faer::linalg::solvers::DenseSolveCore;
use faer::Mat;

use crate::error::{Error, Result};
use crate::tensor::{mat2_apply, mat2_inverse, mat2_transpose_apply, Mat2, Point, Sym2};

pub const SUPPORTED_DEGREES: [usize; 3] = [2, 3, 4];

/// Where a local Lagrange node sits on the reference triangle.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NodeKind {
    Vertex(usize),
    /// `position` counts from vertex `(edge+1)%3` towards `(edge+2)%3`,
    /// starting at 0.
    Edge { edge: usize, position: usize },
    Interior(usize),
}

#[derive(Debug, Clone, Default)]
pub struct BasisValues {
    pub values: Vec<f64>,
    pub gradients: Vec<Point>,
    pub hessians: Vec<Sym2>,
}

impl BasisValues {
    fn with_len(n: usize) -> Self {
        BasisValues { values: vec![0.0; n], gradients: vec![[0.0; 2]; n], hessians: vec![Sym2::ZERO; n] }
    }
}

#[derive(Debug, Clone)]
pub struct LagrangeBasis {
    degree: usize,
    monomials: Vec<(i32, i32)>,
    /// `coeffs[i * n + m]`: coefficient of monomial `m` in basis function `i`.
    coeffs: Vec<f64>,
    nodes: Vec<Point>,
    kinds: Vec<NodeKind>,
}

impl LagrangeBasis {
    pub fn new(degree: usize) -> Result<Self> {
        if !SUPPORTED_DEGREES.contains(&degree) {
            return Err(Error::Config(format!("unsupported polynomial degree {degree} (expected 2, 3 or 4)")));
        }
        let p = degree;
        let h = 1.0 / p as f64;
        let mut nodes = vec![[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]];
        let mut kinds = vec![NodeKind::Vertex(0), NodeKind::Vertex(1), NodeKind::Vertex(2)];
        for edge in 0..3 {
            let a = nodes[(edge + 1) % 3];
            let b = nodes[(edge + 2) % 3];
            for t in 1..p {
                let s = t as f64 * h;
                nodes.push([a[0] + s * (b[0] - a[0]), a[1] + s * (b[1] - a[1])]);
                kinds.push(NodeKind::Edge { edge, position: t - 1 });
            }
        }
        let mut interior = 0;
        for j in 1..p {
            for i in 1..p {
                if i + j < p {
                    nodes.push([i as f64 * h, j as f64 * h]);
                    kinds.push(NodeKind::Interior(interior));
                    interior += 1;
                }
            }
        }
        let monomials: Vec<(i32, i32)> =
            (0..=p as i32).flat_map(|total| (0..=total).map(move |b| (total - b, b))).collect();
        let n = monomials.len();
        debug_assert_eq!(n, nodes.len());

        let vandermonde = Mat::<f64>::from_fn(n, n, |i, m| {
            let (a, b) = monomials[m];
            nodes[i][0].powi(a) * nodes[i][1].powi(b)
        });
        let inverse = vandermonde.partial_piv_lu().inverse();
        // V c_i = e_i, so c_i is column i of V^{-1}
        let mut coeffs = vec![0.0; n * n];
        for i in 0..n {
            for m in 0..n {
                coeffs[i * n + m] = inverse[(m, i)];
            }
        }
        Ok(LagrangeBasis { degree, monomials, coeffs, nodes, kinds })
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn num_local(&self) -> usize {
        self.nodes.len()
    }

    pub fn nodes(&self) -> &[Point] {
        &self.nodes
    }

    pub fn kinds(&self) -> &[NodeKind] {
        &self.kinds
    }

    pub fn eval(&self, xi: Point) -> BasisValues {
        let mut out = BasisValues::with_len(self.num_local());
        self.eval_into(xi, &mut out);
        out
    }

    pub fn eval_into(&self, xi: Point, out: &mut BasisValues) {
        let n = self.num_local();
        out.values.resize(n, 0.0);
        out.gradients.resize(n, [0.0; 2]);
        out.hessians.resize(n, Sym2::ZERO);
        let [x, y] = xi;
        let pw = |v: f64, k: i32| if k < 0 { 0.0 } else { v.powi(k) };
        let mut mono = [(0.0, [0.0; 2], Sym2::ZERO); 15];
        for (m, &(a, b)) in self.monomials.iter().enumerate() {
            let af = a as f64;
            let bf = b as f64;
            mono[m] = (
                pw(x, a) * pw(y, b),
                [af * pw(x, a - 1) * pw(y, b), bf * pw(x, a) * pw(y, b - 1)],
                Sym2::new(
                    af * (af - 1.0) * pw(x, a - 2) * pw(y, b),
                    af * bf * pw(x, a - 1) * pw(y, b - 1),
                    bf * (bf - 1.0) * pw(x, a) * pw(y, b - 2),
                ),
            );
        }
        for i in 0..n {
            let row = &self.coeffs[i * n..(i + 1) * n];
            let mut v = 0.0;
            let mut g = [0.0; 2];
            let mut h = Sym2::ZERO;
            for (c, (mv, mg, mh)) in row.iter().zip(&mono[..n]) {
                v += c * mv;
                g[0] += c * mg[0];
                g[1] += c * mg[1];
                h.xx += c * mh.xx;
                h.xy += c * mh.xy;
                h.yy += c * mh.yy;
            }
            out.values[i] = v;
            out.gradients[i] = g;
            out.hessians[i] = h;
        }
    }
}

/// Reference-element basis evaluation at barycentric coordinates.
pub fn eval_basis(degree: usize, barycentric: [f64; 3]) -> Result<BasisValues> {
    let sum: f64 = barycentric.iter().sum();
    if barycentric.iter().any(|&l| l < -1e-12) || (sum - 1.0).abs() > 1e-12 {
        return Err(Error::Domain(format!("invalid barycentric coordinates {barycentric:?}")));
    }
    Ok(LagrangeBasis::new(degree)?.eval([barycentric[1], barycentric[2]]))
}

/// Affine map `x = origin + J xi` from the reference triangle.
#[derive(Debug, Clone, Copy)]
pub struct AffineMap {
    pub origin: Point,
    pub jacobian: Mat2,
    /// `J^{-1}`.
    pub inverse: Mat2,
    /// `det J` (twice the signed area).
    pub det: f64,
}

impl AffineMap {
    pub fn new(corners: [Point; 3]) -> Result<Self> {
        let [a, b, c] = corners;
        let jacobian = [[b[0] - a[0], c[0] - a[0]], [b[1] - a[1], c[1] - a[1]]];
        let scale = jacobian.iter().flatten().fold(0.0f64, |m, v| m.max(v.abs()));
        match mat2_inverse(&jacobian) {
            Some((inverse, det)) if det > 1e-14 * scale * scale => Ok(AffineMap { origin: a, jacobian, inverse, det }),
            _ => Err(Error::Geometry(format!("degenerate or inverted triangle {corners:?}"))),
        }
    }

    #[inline]
    pub fn to_physical(&self, xi: Point) -> Point {
        let d = mat2_apply(&self.jacobian, xi);
        [self.origin[0] + d[0], self.origin[1] + d[1]]
    }

    #[inline]
    pub fn to_reference(&self, x: Point) -> Point {
        mat2_apply(&self.inverse, [x[0] - self.origin[0], x[1] - self.origin[1]])
    }

    #[inline]
    pub fn gradient(&self, reference: Point) -> Point {
        mat2_transpose_apply(&self.inverse, reference)
    }

    #[inline]
    pub fn hessian(&self, reference: &Sym2) -> Sym2 {
        reference.congruence(&self.inverse)
    }

    pub fn area(&self) -> f64 {
        0.5 * self.det
    }
}

/// Chain rule through the affine map of `corners`.
pub fn physical_derivatives(
    corners: [Point; 3],
    gradients: &[Point],
    hessians: &[Sym2],
) -> Result<(Vec<Point>, Vec<Sym2>)> {
    let map = AffineMap::new(corners)?;
    Ok((
        gradients.iter().map(|g| map.gradient(*g)).collect(),
        hessians.iter().map(|h| map.hessian(h)).collect(),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    const REF: [Point; 3] = [[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]];

    fn sample_points() -> Vec<Point> {
        let mut pts = Vec::new();
        for i in 0..10 {
            for j in 0..10 {
                let x = (i as f64 + 0.37) / 10.3;
                let y = (j as f64 + 0.21) / 10.3;
                if x + y < 1.0 {
                    pts.push([x, y]);
                }
            }
        }
        pts
    }

    #[test]
    fn unsupported_degree() {
        assert!(matches!(LagrangeBasis::new(1), Err(Error::Config(_))));
        assert!(matches!(LagrangeBasis::new(5), Err(Error::Config(_))));
    }

    #[test]
    fn kronecker_property_at_nodes() {
        for p in SUPPORTED_DEGREES {
            let basis = LagrangeBasis::new(p).unwrap();
            assert_eq!(basis.num_local(), (p + 1) * (p + 2) / 2);
            for (j, node) in basis.nodes().iter().enumerate() {
                let ev = basis.eval(*node);
                for (i, v) in ev.values.iter().enumerate() {
                    let expect = if i == j { 1.0 } else { 0.0 };
                    assert!((v - expect).abs() < 1e-12, "p={p} phi_{i}(x_{j}) = {v}");
                }
            }
        }
    }

    #[test]
    fn partition_of_unity_and_zero_sum_derivatives() {
        for p in SUPPORTED_DEGREES {
            let basis = LagrangeBasis::new(p).unwrap();
            for xi in sample_points() {
                let ev = basis.eval(xi);
                assert!((ev.values.iter().sum::<f64>() - 1.0).abs() < 1e-12);
                let g = ev.gradients.iter().fold([0.0; 2], |a, g| [a[0] + g[0], a[1] + g[1]]);
                assert!(g[0].abs() < 1e-10 && g[1].abs() < 1e-10);
                let h = ev.hessians.iter().fold(Sym2::ZERO, |a, h| a + *h);
                assert!(h.frob_norm() < 1e-9);
            }
        }
    }

    #[test]
    fn derivatives_match_central_differences() {
        let step = 1e-5;
        for p in SUPPORTED_DEGREES {
            let basis = LagrangeBasis::new(p).unwrap();
            for xi in sample_points().into_iter().step_by(7) {
                let ev = basis.eval(xi);
                let xp = basis.eval([xi[0] + step, xi[1]]);
                let xm = basis.eval([xi[0] - step, xi[1]]);
                let yp = basis.eval([xi[0], xi[1] + step]);
                let ym = basis.eval([xi[0], xi[1] - step]);
                for i in 0..basis.num_local() {
                    let fd = [(xp.values[i] - xm.values[i]) / (2.0 * step), (yp.values[i] - ym.values[i]) / (2.0 * step)];
                    let scale = 1.0 + ev.gradients[i][0].abs().max(ev.gradients[i][1].abs());
                    assert!((fd[0] - ev.gradients[i][0]).abs() / scale < 1e-6);
                    assert!((fd[1] - ev.gradients[i][1]).abs() / scale < 1e-6);
                    let hxx = (xp.gradients[i][0] - xm.gradients[i][0]) / (2.0 * step);
                    let hxy = (yp.gradients[i][0] - ym.gradients[i][0]) / (2.0 * step);
                    let hyy = (yp.gradients[i][1] - ym.gradients[i][1]) / (2.0 * step);
                    let h = ev.hessians[i];
                    let hs = 1.0 + h.xx.abs().max(h.xy.abs()).max(h.yy.abs());
                    assert!((hxx - h.xx).abs() / hs < 1e-6);
                    assert!((hxy - h.xy).abs() / hs < 1e-6);
                    assert!((hyy - h.yy).abs() / hs < 1e-6);
                }
            }
        }
    }

    #[test]
    fn eval_basis_checks_barycentric_input() {
        assert!(eval_basis(2, [0.5, 0.6, -0.1]).is_err());
        let ev = eval_basis(3, [0.2, 0.3, 0.5]).unwrap();
        assert!((ev.values.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn identity_map_leaves_derivatives_unchanged() {
        let ev = LagrangeBasis::new(2).unwrap().eval([0.2, 0.3]);
        let (g, h) = physical_derivatives(REF, &ev.gradients, &ev.hessians).unwrap();
        assert_eq!(g, ev.gradients);
        assert_eq!(h, ev.hessians);
    }

    #[test]
    fn scaling_by_two() {
        let ev = LagrangeBasis::new(3).unwrap().eval([0.2, 0.3]);
        let big = [[0.0, 0.0], [2.0, 0.0], [0.0, 2.0]];
        let (g, h) = physical_derivatives(big, &ev.gradients, &ev.hessians).unwrap();
        for i in 0..g.len() {
            assert!((g[i][0] - 0.5 * ev.gradients[i][0]).abs() < 1e-14);
            assert!((h[i].xy - 0.25 * ev.hessians[i].xy).abs() < 1e-13);
        }
    }

    #[test]
    fn degenerate_triangle_is_a_geometry_error() {
        let flat = [[0.0, 0.0], [1.0, 1.0], [2.0, 2.0]];
        assert!(matches!(physical_derivatives(flat, &[], &[]), Err(Error::Geometry(_))));
    }

    #[test]
    fn quadratic_hessian_is_reproduced_on_a_skewed_triangle() {
        let corners = [[0.3, -0.2], [1.7, 0.4], [0.1, 1.3]];
        let map = AffineMap::new(corners).unwrap();
        for p in SUPPORTED_DEGREES {
            let basis = LagrangeBasis::new(p).unwrap();
            let nodal: Vec<f64> = basis.nodes().iter().map(|n| map.to_physical(*n)[0].powi(2)).collect();
            for xi in sample_points().into_iter().step_by(5) {
                let ev = basis.eval(xi);
                let h = ev.hessians.iter().zip(&nodal).fold(Sym2::ZERO, |a, (h, c)| a + *c * map.hessian(h));
                assert!((h.xx - 2.0).abs() < 1e-9 && h.xy.abs() < 1e-9 && h.yy.abs() < 1e-9);
            }
        }
    }
}
