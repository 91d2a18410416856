//! Monge–Ampère problems through the HJB formulation.

use std::sync::Arc;

use hjb_c0ip::experiments::{builtin_exp3, exp3_exact};
use hjb_c0ip::monge_ampere::{cofactor_policy_diagnostic, ma_to_hjb};
use hjb_c0ip::scheme::{error_norms, space_and_datum};
use hjb_c0ip::solver::howard_solve;
use hjb_c0ip::{BoundaryProjection, Mesh, Point, SchemeParams};

fn main() -> hjb_c0ip::Result<()> {
    let params = SchemeParams::new(2);
    for a in [0.5, 0.4] {
        let (ma, exact) = builtin_exp3(Some(a), None, (16, 16))?;
        let exact = exact.expect("known solution").negated();
        let grid = ma.control_grid()?;
        let samples: Vec<Point> = (0..=10).flat_map(|i| (0..=10).map(move |j| [i as f64 / 10.0, j as f64 / 10.0])).collect();
        let problem = ma_to_hjb(&ma, &grid, &samples)?;
        println!("a = {a}: xi = {:.4}, {} controls", ma.xi, grid.len());
        let mut mesh = Mesh::unit_square(4);
        for _ in 0..3 {
            let (space, datum) = space_and_datum(Arc::new(mesh.clone()), 2, &problem, BoundaryProjection::Interpolation)?;
            let r = howard_solve(&problem, &datum, None, &params)?;
            let err = error_norms(&r.solution, &exact, params.sigma).h;
            println!("  ndofs {:>6}  ||u - u_h||_h {err:.4e}  Howard iterations {}", space.n_dofs(), r.iterations());
            mesh = mesh.uniform_refine();
        }
    }

    let (ma, _) = builtin_exp3(Some(0.5), None, (16, 16))?;
    let problem = ma_to_hjb(&ma, &ma.control_grid()?, &[[0.5, 0.5]])?;
    let (_, datum) = space_and_datum(Arc::new(Mesh::unit_square(8)), 2, &problem, BoundaryProjection::Interpolation)?;
    let v = howard_solve(&problem, &datum, None, &params)?.solution;
    let u = v.axpby(-1.0, &v, 0.0);
    let hess = exp3_exact(0.5).hessian;
    let f = move |x: Point| hess(x).det();
    let samples = cofactor_policy_diagnostic(&u, &f, 1e-8);
    let worst = samples.iter().map(|s| s.residual.abs()).fold(0.0, f64::max);
    let min_det = samples.iter().map(|s| s.a_u.det()).fold(f64::INFINITY, f64::min);
    println!("cofactor policy: {} samples, max |residual| {worst:.3e}, min det A_u {min_det:.4}", samples.len());

    let (unknown, _) = builtin_exp3(None, None, (16, 16))?;
    let problem = ma_to_hjb(&unknown, &unknown.control_grid()?, &[[0.5, 0.5]])?;
    let (_, datum) = space_and_datum(Arc::new(Mesh::unit_square(8)), 2, &problem, BoundaryProjection::Interpolation)?;
    let v = howard_solve(&problem, &datum, None, &params)?.solution;
    let min_u = v.coeffs().iter().map(|c| -c).fold(f64::INFINITY, f64::min);
    println!("f = 1, g = 0: min u_h = {min_u:.5}");
    Ok(())
}
