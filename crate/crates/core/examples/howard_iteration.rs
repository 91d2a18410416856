//! Policy iteration on a problem with two competing controls.

use std::sync::Arc;

use hjb_c0ip::scheme::{error_norms, space_and_datum};
use hjb_c0ip::solver::howard_solve;
use hjb_c0ip::{BoundaryProjection, Control, ControlProblem, ExactSolution, Mesh, Point, SchemeParams, Sym2};

fn main() -> hjb_c0ip::Result<()> {
    // u = x^2 y + y^2 solves max(A1:D2u - f1, A2:D2u - f2) = 0 with
    // each control active on one side of x = 1/2
    let exact = ExactSolution::new(
        |x: Point| x[0] * x[0] * x[1] + x[1] * x[1],
        |x: Point| [2.0 * x[0] * x[1], x[0] * x[0] + 2.0 * x[1]],
        |x: Point| Sym2::new(2.0 * x[1], 2.0 * x[0], 2.0),
    );
    let a1 = Sym2::new(2.0, 0.5, 1.0);
    let a2 = Sym2::rotated_diag(1.0, 0.3, 0.7);
    let (h1, h2) = (exact.hessian.clone(), exact.hessian.clone());
    let problem = ControlProblem::new(
        vec![
            Control::new("A1", move |_| a1, move |x| a1.frob(&h1(x)) + (x[0] - 0.5).max(0.0)),
            Control::new("A2", move |_| a2, move |x| a2.frob(&h2(x)) + (0.5 - x[0]).max(0.0)),
        ],
        {
            let u = exact.value.clone();
            move |x| u(x)
        },
    )?;
    let params = SchemeParams::new(3);
    let (_, datum) = space_and_datum(Arc::new(Mesh::unit_square(6)), 3, &problem, BoundaryProjection::Interpolation)?;
    let result = howard_solve(&problem, &datum, None, &params)?;

    let mut trace = Vec::new();
    result.write_trace(&mut trace)?;
    print!("{}", String::from_utf8_lossy(&trace));
    let share = result.policy.iter().filter(|&&k| k == 0).count() as f64 / result.policy.len() as f64;
    println!("converged: {}, control A1 active at {:.1}% of quadrature points", result.converged, 100.0 * share);
    println!("||u - u_h||_h = {:.3e}", error_norms(&result.solution, &exact, params.sigma).h);
    Ok(())
}
