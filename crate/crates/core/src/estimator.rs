//! Residual a posteriori indicators
//!
//! `eta_h = ||F_gamma[u_h]|| + ||D^2_h (g - g_h)|| + (sum_e h_e^{-1} ||jump(dg_h/dn)||_e^2)^{1/2}
//!        + (sum_e h_e^{-1} ||jump(du_h/dn)||_e^2)^{1/2}`.

use std::io::Write;

use crate::fem::DiscreteFunction;
use crate::problem::{ControlProblem, MatrixField};
use crate::scheme::{edge_jump_squares, element_hessian_errors, evaluate_hamiltonian, par_map};

#[derive(Debug, Clone)]
pub struct ErrorIndicators {
    /// `||F_gamma[u_h]||_{L^2(K)}` per triangle.
    pub eta_k: Vec<f64>,
    /// `||D^2(g - g_h)||_{L^2(K)}` per triangle.
    pub eta_k_g: Vec<f64>,
    /// `h_e^{-1/2} ||jump(du_h/dn)||_{L^2(e)}` per interior edge.
    pub eta_e: Vec<f64>,
    /// `h_e^{-1/2} ||jump(dg_h/dn)||_{L^2(e)}` per interior edge.
    pub eta_e_g: Vec<f64>,
    /// Endpoints of each interior edge, aligned with `eta_e`.
    pub edges: Vec<[usize; 2]>,
    /// Set when `g` has no Hessian and `eta_k_g` was set to zero.
    pub missing_boundary_hessian: bool,
}

fn l2(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

impl ErrorIndicators {
    pub fn total_k(&self) -> f64 {
        l2(&self.eta_k)
    }

    pub fn total_k_g(&self) -> f64 {
        l2(&self.eta_k_g)
    }

    pub fn total_e(&self) -> f64 {
        l2(&self.eta_e)
    }

    pub fn total_e_g(&self) -> f64 {
        l2(&self.eta_e_g)
    }

    /// `eta_h`, the sum of the four totals.
    pub fn total(&self) -> f64 {
        self.total_k() + self.total_k_g() + self.total_e() + self.total_e_g()
    }

    /// Largest local indicator over all four families.
    pub fn max(&self) -> f64 {
        [&self.eta_k, &self.eta_k_g, &self.eta_e, &self.eta_e_g]
            .iter()
            .flat_map(|v| v.iter())
            .fold(0.0f64, |m, &x| m.max(x))
    }

    /// Rows `element,id,eta_K,eta_K_g` then `edge,id,eta_e,eta_e_g`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "kind,id,eta,eta_g")?;
        for (k, (a, b)) in self.eta_k.iter().zip(&self.eta_k_g).enumerate() {
            writeln!(w, "element,{k},{a:.14e},{b:.14e}")?;
        }
        for (k, (a, b)) in self.eta_e.iter().zip(&self.eta_e_g).enumerate() {
            writeln!(w, "edge,{k},{a:.14e},{b:.14e}")?;
        }
        Ok(())
    }
}

/// Evaluates all indicators of `u_h` with boundary datum `g_h` (a member of
/// the same space). `g_hessian` is the Hessian of the extension of `g`.
pub fn compute_indicators(
    problem: &ControlProblem,
    u_h: &DiscreteFunction,
    g_h: &DiscreteFunction,
    g_hessian: Option<&MatrixField>,
    sequential: bool,
) -> ErrorIndicators {
    let space = u_h.space();
    let rule = space.volume_rule();
    let nq = rule.len();
    let ham = evaluate_hamiltonian(problem, u_h, sequential);
    let eta_k = par_map(space.mesh().num_triangles(), sequential, |t| {
        let det = space.element_map(t).det;
        (0..nq).map(|q| rule.weights[q] * det * ham.values[t * nq + q].powi(2)).sum::<f64>().sqrt()
    });
    let eta_k_g = match g_hessian {
        Some(h) => element_hessian_errors(g_h, h.as_ref()).into_iter().map(f64::sqrt).collect(),
        None => {
            log::warn!("boundary datum has no Hessian; data indicators on elements set to zero");
            vec![0.0; space.mesh().num_triangles()]
        }
    };
    let interior = &space.topology().interior;
    let scaled = |jumps: Vec<f64>| -> Vec<f64> {
        jumps.into_iter().zip(interior).map(|(j, e)| (j / e.length).sqrt()).collect()
    };
    ErrorIndicators {
        eta_k,
        eta_k_g,
        eta_e: scaled(edge_jump_squares(u_h, sequential)),
        eta_e_g: scaled(edge_jump_squares(g_h, sequential)),
        edges: interior.iter().map(|e| e.vertices).collect(),
        missing_boundary_hessian: g_hessian.is_none(),
    }
}

/// `eta / error`, or NaN when the error vanishes.
pub fn effectivity_index(eta_total: f64, error_h: f64) -> f64 {
    if error_h > 0.0 {
        eta_total / error_h
    } else {
        f64::NAN
    }
}
