//! Small fixed-size linear algebra used throughout assembly.

use std::ops::{Add, Mul, Sub};

pub type Point = [f64; 2];

/// Symmetric 2x2 matrix stored by its three independent entries.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Sym2 {
    pub xx: f64,
    pub xy: f64,
    pub yy: f64,
}

impl Sym2 {
    pub const IDENTITY: Sym2 = Sym2 { xx: 1.0, xy: 0.0, yy: 1.0 };
    pub const ZERO: Sym2 = Sym2 { xx: 0.0, xy: 0.0, yy: 0.0 };

    pub const fn new(xx: f64, xy: f64, yy: f64) -> Self {
        Sym2 { xx, xy, yy }
    }

    pub const fn diag(a: f64, b: f64) -> Self {
        Sym2 { xx: a, xy: 0.0, yy: b }
    }

    /// Frobenius inner product `A:B`.
    #[inline]
    pub fn frob(&self, other: &Sym2) -> f64 {
        self.xx * other.xx + 2.0 * self.xy * other.xy + self.yy * other.yy
    }

    #[inline]
    pub fn frob_norm_sq(&self) -> f64 {
        self.frob(self)
    }

    #[inline]
    pub fn frob_norm(&self) -> f64 {
        self.frob_norm_sq().sqrt()
    }

    #[inline]
    pub fn trace(&self) -> f64 {
        self.xx + self.yy
    }

    #[inline]
    pub fn det(&self) -> f64 {
        self.xx * self.yy - self.xy * self.xy
    }

    /// Cofactor matrix; for symmetric 2x2 this is `[[yy, -xy], [-xy, xx]]`.
    pub fn cofactor(&self) -> Sym2 {
        Sym2::new(self.yy, -self.xy, self.xx)
    }

    /// Eigenvalues in ascending order.
    pub fn eigenvalues(&self) -> [f64; 2] {
        let mean = 0.5 * (self.xx + self.yy);
        let half_diff = 0.5 * (self.xx - self.yy);
        let rad = half_diff.hypot(self.xy);
        [mean - rad, mean + rad]
    }

    /// Unit eigenvector for the smallest eigenvalue.
    pub fn min_eigenvector(&self) -> Point {
        let [lo, _] = self.eigenvalues();
        // rows of (A - lo I) are orthogonal to the eigenvector
        let r0 = [self.xx - lo, self.xy];
        let r1 = [self.xy, self.yy - lo];
        let pick = if r0[0].hypot(r0[1]) >= r1[0].hypot(r1[1]) { r0 } else { r1 };
        let n = pick[0].hypot(pick[1]);
        if n == 0.0 {
            [1.0, 0.0]
        } else {
            [-pick[1] / n, pick[0] / n]
        }
    }

    /// `R(theta) diag(a, b) R(theta)^T`.
    pub fn rotated_diag(a: f64, b: f64, theta: f64) -> Sym2 {
        let (s, c) = theta.sin_cos();
        Sym2::new(a * c * c + b * s * s, (a - b) * c * s, a * s * s + b * c * c)
    }

    /// Congruence `G^T S G` for a general 2x2 matrix `G` (row-major).
    #[inline]
    pub fn congruence(&self, g: &Mat2) -> Sym2 {
        // S G
        let sg = [
            [self.xx * g[0][0] + self.xy * g[1][0], self.xx * g[0][1] + self.xy * g[1][1]],
            [self.xy * g[0][0] + self.yy * g[1][0], self.xy * g[0][1] + self.yy * g[1][1]],
        ];
        Sym2 {
            xx: g[0][0] * sg[0][0] + g[1][0] * sg[1][0],
            xy: g[0][0] * sg[0][1] + g[1][0] * sg[1][1],
            yy: g[0][1] * sg[0][1] + g[1][1] * sg[1][1],
        }
    }
}

impl Add for Sym2 {
    type Output = Sym2;
    fn add(self, o: Sym2) -> Sym2 {
        Sym2::new(self.xx + o.xx, self.xy + o.xy, self.yy + o.yy)
    }
}

impl Sub for Sym2 {
    type Output = Sym2;
    fn sub(self, o: Sym2) -> Sym2 {
        Sym2::new(self.xx - o.xx, self.xy - o.xy, self.yy - o.yy)
    }
}

impl Mul<Sym2> for f64 {
    type Output = Sym2;
    fn mul(self, m: Sym2) -> Sym2 {
        Sym2::new(self * m.xx, self * m.xy, self * m.yy)
    }
}

/// Row-major general 2x2 matrix.
pub type Mat2 = [[f64; 2]; 2];

pub fn mat2_inverse(m: &Mat2) -> Option<(Mat2, f64)> {
    let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
    if det == 0.0 || !det.is_finite() {
        return None;
    }
    let inv = [[m[1][1] / det, -m[0][1] / det], [-m[1][0] / det, m[0][0] / det]];
    Some((inv, det))
}

/// `G^T v`.
#[inline]
pub fn mat2_transpose_apply(g: &Mat2, v: Point) -> Point {
    [g[0][0] * v[0] + g[1][0] * v[1], g[0][1] * v[0] + g[1][1] * v[1]]
}

#[inline]
pub fn mat2_apply(g: &Mat2, v: Point) -> Point {
    [g[0][0] * v[0] + g[0][1] * v[1], g[1][0] * v[0] + g[1][1] * v[1]]
}

#[inline]
pub fn dot(a: Point, b: Point) -> f64 {
    a[0] * b[0] + a[1] * b[1]
}

#[inline]
pub fn distance(a: Point, b: Point) -> f64 {
    (a[0] - b[0]).hypot(a[1] - b[1])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn congruence_matches_explicit_product() {
        let s = Sym2::new(1.5, -0.3, 0.7);
        let g = [[0.4, 1.2], [-0.8, 2.0]];
        let h = s.congruence(&g);
        // explicit G^T S G
        let sm = [[s.xx, s.xy], [s.xy, s.yy]];
        let mut out = [[0.0; 2]; 2];
        for i in 0..2 {
            for j in 0..2 {
                for k in 0..2 {
                    for l in 0..2 {
                        out[i][j] += g[k][i] * sm[k][l] * g[l][j];
                    }
                }
            }
        }
        assert!((h.xx - out[0][0]).abs() < 1e-14);
        assert!((h.xy - out[0][1]).abs() < 1e-14);
        assert!((h.yy - out[1][1]).abs() < 1e-14);
    }

    #[test]
    fn eigen_pairs() {
        let s = Sym2::new(2.0, 1.0, 2.0);
        assert_eq!(s.eigenvalues(), [1.0, 3.0]);
        let v = s.min_eigenvector();
        let av = [s.xx * v[0] + s.xy * v[1], s.xy * v[0] + s.yy * v[1]];
        assert!((av[0] - v[0]).abs() < 1e-14 && (av[1] - v[1]).abs() < 1e-14);
    }

    #[test]
    fn rotated_diag_preserves_invariants() {
        let w = Sym2::rotated_diag(0.3, 0.7, 0.9);
        assert!((w.trace() - 1.0).abs() < 1e-15);
        assert!((w.det() - 0.21).abs() < 1e-15);
    }
}
