//! Quadrature on the reference triangle `(0,0), (1,0), (0,1)` and on the
//! unit interval.

use gauss_quad::GaussLegendre;

/// Gauss–Legendre points and weights mapped to `[0, 1]`.
pub fn gauss_legendre_unit(n: usize) -> Vec<(f64, f64)> {
    let rule = GaussLegendre::new(n.try_into().expect("at least one point"));
    let mut out: Vec<(f64, f64)> = rule.iter().map(|(x, w)| (0.5 * (x + 1.0), 0.5 * w)).collect();
    out.sort_by(|a, b| a.0.total_cmp(&b.0));
    out
}

#[derive(Debug, Clone)]
pub struct QuadratureRule {
    /// Barycentric coordinates `(l0, l1, l2)`; reference point is `(l1, l2)`.
    pub points: Vec<[f64; 3]>,
    /// Weights summing to the reference area `1/2`.
    pub weights: Vec<f64>,
    pub exactness_degree: usize,
}

impl QuadratureRule {
    /// Collapsed Gauss–Legendre product rule exact for total degree
    /// `degree`. All weights are positive and all points interior.
    pub fn triangle(degree: usize) -> Self {
        let n = (degree + 3) / 2;
        let gl = gauss_legendre_unit(n);
        let mut points = Vec::with_capacity(n * n);
        let mut weights = Vec::with_capacity(n * n);
        for &(u, wu) in &gl {
            for &(t, wt) in &gl {
                let x = u;
                let y = (1.0 - u) * t;
                points.push([1.0 - x - y, x, y]);
                weights.push(wu * wt * (1.0 - u));
            }
        }
        QuadratureRule { points, weights, exactness_degree: 2 * n - 2 }
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn reference_point(&self, q: usize) -> [f64; 2] {
        [self.points[q][1], self.points[q][2]]
    }
}

#[derive(Debug, Clone)]
pub struct EdgeRule {
    /// Parameters in `[0, 1]` along the edge.
    pub points: Vec<f64>,
    pub weights: Vec<f64>,
    pub exactness_degree: usize,
}

impl EdgeRule {
    pub fn new(degree: usize) -> Self {
        let n = (degree + 2) / 2;
        let (points, weights) = gauss_legendre_unit(n).into_iter().unzip();
        EdgeRule { points, weights, exactness_degree: 2 * n - 1 }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn factorial(n: usize) -> f64 {
        (1..=n).map(|k| k as f64).product()
    }

    #[test]
    fn monomials_on_reference_triangle() {
        for degree in [2, 3, 4, 5, 6, 8, 10] {
            let rule = QuadratureRule::triangle(degree);
            assert!(rule.exactness_degree >= degree);
            assert!(rule.weights.iter().all(|&w| w > 0.0));
            assert!((rule.weights.iter().sum::<f64>() - 0.5).abs() < 1e-15);
            for a in 0..=degree {
                for b in 0..=(degree - a) {
                    let exact = factorial(a) * factorial(b) / factorial(a + b + 2);
                    let approx: f64 = (0..rule.len())
                        .map(|q| {
                            let [x, y] = rule.reference_point(q);
                            rule.weights[q] * x.powi(a as i32) * y.powi(b as i32)
                        })
                        .sum();
                    assert!((approx - exact).abs() < 1e-14, "x^{a} y^{b}: {approx} vs {exact}");
                }
            }
        }
    }

    #[test]
    fn edge_rule_is_exact() {
        let rule = EdgeRule::new(8);
        for k in 0..=8 {
            let approx: f64 = rule.points.iter().zip(&rule.weights).map(|(t, w)| w * t.powi(k)).sum();
            assert!((approx - 1.0 / (k as f64 + 1.0)).abs() < 1e-14);
        }
    }
}
