//! Convergence table for a smooth linear problem under red refinement.

use std::f64::consts::PI;
use std::sync::Arc;

use hjb_c0ip::scheme::{error_norms, space_and_datum};
use hjb_c0ip::solver::howard_solve;
use hjb_c0ip::{BoundaryProjection, Control, ControlProblem, ExactSolution, Mesh, Point, SchemeParams, Sym2};

fn main() -> hjb_c0ip::Result<()> {
    let exact = ExactSolution::new(
        |x: Point| (PI * x[0]).sin() * (PI * x[1]).sin(),
        |x: Point| [PI * (PI * x[0]).cos() * (PI * x[1]).sin(), PI * (PI * x[0]).sin() * (PI * x[1]).cos()],
        |x: Point| {
            let s = (PI * x[0]).sin() * (PI * x[1]).sin();
            let c = (PI * x[0]).cos() * (PI * x[1]).cos();
            Sym2::new(-PI * PI * s, PI * PI * c, -PI * PI * s)
        },
    );
    let a = |x: Point| Sym2::new(1.0 + 0.1 * x[0] * x[1], 0.05 * x[0], 1.0 + 0.1 * x[1] * x[1]);
    let h = exact.hessian.clone();
    let problem = ControlProblem::new(vec![Control::new("a", a, move |x| a(x).frob(&h(x)))], |_| 0.0)?;

    for p in [2, 3, 4] {
        println!("p = {p}");
        println!("{:>8} {:>12} {:>7} {:>12} {:>7} {:>12} {:>7}", "ndofs", "err_h", "EOC", "err_H1", "EOC", "err_L2", "EOC");
        let params = SchemeParams::new(p);
        let mut mesh = Mesh::unit_square(1);
        let mut prev: Option<(usize, [f64; 3])> = None;
        for _ in 0..5 {
            let (space, datum) = space_and_datum(Arc::new(mesh.clone()), p, &problem, BoundaryProjection::Interpolation)?;
            let u = howard_solve(&problem, &datum, None, &params)?.solution;
            let e = error_norms(&u, &exact, params.sigma);
            let errs = [e.h, e.h1, e.l2];
            let n = space.n_dofs();
            let eoc = |k: usize| prev.map_or(String::new(), |(n0, e0)| format!("{:.3}", -(errs[k] / e0[k]).ln() / (n as f64 / n0 as f64).ln()));
            println!("{n:>8} {:>12.4e} {:>7} {:>12.4e} {:>7} {:>12.4e} {:>7}", errs[0], eoc(0), errs[1], eoc(1), errs[2], eoc(2));
            prev = Some((n, errs));
            mesh = mesh.uniform_refine();
        }
    }
    Ok(())
}
