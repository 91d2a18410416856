//! Howard policy iteration for the discrete HJB problem.

pub mod linear;

use std::io::Write;

use crate::error::{Error, Result};
use crate::fem::DiscreteFunction;
use crate::problem::{cordes_epsilon, ControlProblem, CordesReport, SchemeParams};
use crate::scheme::{evaluate_hamiltonian, nonlinear_residual, solve_policy};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HowardStep {
    pub k: usize,
    /// `max_i |u_k - u_{k-1}|` over coefficients.
    pub increment: f64,
    /// `max_i |a_h(u_k; phi_i)|` over interior basis functions.
    pub nonlinear_residual: f64,
}

#[derive(Debug, Clone)]
pub struct HowardResult {
    pub solution: DiscreteFunction,
    /// Control index at each volume quadrature point used for the last
    /// linear solve.
    pub policy: Vec<usize>,
    pub trace: Vec<HowardStep>,
    pub converged: bool,
}

impl HowardResult {
    pub fn iterations(&self) -> usize {
        self.trace.len()
    }

    pub fn write_trace<W: Write>(&self, w: W) -> std::io::Result<()> {
        write_trace(&self.trace, w)
    }
}

pub fn write_trace<W: Write>(trace: &[HowardStep], mut w: W) -> std::io::Result<()> {
    writeln!(w, "k,r,nonlinear_residual")?;
    for s in trace {
        writeln!(w, "{},{:.14e},{:.14e}", s.k, s.increment, s.nonlinear_residual)?;
    }
    Ok(())
}

/// Samples the Cordes constant at the volume quadrature points of the
/// datum's space. Violations are errors under `strict`, warnings otherwise.
pub fn check_cordes(problem: &ControlProblem, datum: &DiscreteFunction, strict: bool) -> Result<Option<CordesReport>> {
    match cordes_epsilon(problem, &datum.space().quadrature_points()) {
        Ok(r) => Ok(Some(r)),
        Err(Error::Cordes(v)) if !strict => {
            log::warn!("{v}");
            Ok(None)
        }
        Err(e) => Err(e),
    }
}

/// Policy iteration started from `initial`, or from the boundary datum with
/// zero interior values. A policy that repeats the previous one reuses the
/// previous iterate, so the increment is exactly zero.
pub fn howard_solve(
    problem: &ControlProblem,
    datum: &DiscreteFunction,
    initial: Option<&DiscreteFunction>,
    params: &SchemeParams,
) -> Result<HowardResult> {
    params.validate()?;
    check_cordes(problem, datum, params.strict_cordes)?;
    let space = datum.space();
    let mut u = match initial {
        Some(u0) => {
            let mut u0 = u0.clone();
            if !std::sync::Arc::ptr_eq(u0.space(), space) {
                return Err(Error::Config("initial guess lives on a different space".into()));
            }
            for &i in space.boundary_dofs() {
                u0.coeffs_mut()[i] = datum.coeffs()[i];
            }
            u0
        }
        None => {
            let mut u0 = datum.clone();
            for i in space.interior_dofs() {
                u0.coeffs_mut()[i] = 0.0;
            }
            u0
        }
    };
    let mut trace = Vec::new();
    let mut previous: Option<Vec<usize>> = None;
    let mut increment = f64::INFINITY;
    let mut k = 0;
    while k < params.itermax && increment > params.tol {
        k += 1;
        let policy = evaluate_hamiltonian(problem, &u, params.sequential).policy;
        if previous.as_ref() == Some(&policy) {
            increment = 0.0;
        } else {
            let next = solve_policy(problem, datum, &policy, params.sigma, params.linear_tol, params.sequential)?;
            increment = next.coeffs().iter().zip(u.coeffs()).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
            u = next;
            previous = Some(policy);
        }
        let r = nonlinear_residual(problem, &u, params.sigma, params.sequential);
        log::debug!("howard k={k} increment={increment:e} residual={r:e}");
        trace.push(HowardStep { k, increment, nonlinear_residual: r });
    }
    let converged = increment <= params.tol;
    if !converged {
        log::warn!("policy iteration stopped after {k} iterations with increment {increment:e}");
    }
    Ok(HowardResult { solution: u, policy: previous.unwrap_or_default(), trace, converged })
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::fem::{boundary_datum, BoundaryProjection, FeSpace};
    use crate::mesh::Mesh;
    use crate::problem::Control;
    use crate::tensor::Sym2;

    #[test]
    fn singleton_terminates_at_second_iteration() {
        let p = ControlProblem::new(vec![Control::constant("a", Sym2::new(2.0, 0.3, 1.0), 1.0)], |_| 0.0).unwrap();
        let sp = FeSpace::new(Arc::new(Mesh::unit_square(3)), 2).unwrap();
        let g = boundary_datum(&sp, |_| 0.0, BoundaryProjection::Interpolation).unwrap();
        let res = howard_solve(&p, &g, None, &SchemeParams::new(2)).unwrap();
        assert!(res.converged);
        assert_eq!(res.iterations(), 2);
        assert_eq!(res.trace[1].increment, 0.0);
        assert!(res.trace[1].nonlinear_residual < 1e-10);
    }

    #[test]
    fn trace_csv_has_a_header_and_one_row_per_iteration() {
        let trace = [
            HowardStep { k: 1, increment: 0.5, nonlinear_residual: 1.0 },
            HowardStep { k: 2, increment: 0.0, nonlinear_residual: 0.0 },
        ];
        let mut buf = Vec::new();
        write_trace(&trace, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<_> = text.lines().collect();
        assert_eq!(lines[0], "k,r,nonlinear_residual");
        assert_eq!(lines.len(), 3);
        assert!(lines[1].starts_with("1,5.00000000000000e-1,"));
    }

    #[test]
    fn strict_cordes_rejects_a_violating_problem() {
        let p = ControlProblem::new(vec![Control::constant("saddle", Sym2::diag(1.0, -0.5), 0.0)], |_| 0.0).unwrap();
        let sp = FeSpace::new(Arc::new(Mesh::unit_square(1)), 2).unwrap();
        let g = boundary_datum(&sp, |_| 0.0, BoundaryProjection::Interpolation).unwrap();
        let mut params = SchemeParams::new(2);
        params.strict_cordes = true;
        assert!(matches!(howard_solve(&p, &g, None, &params), Err(Error::Cordes(_))));
    }
}
