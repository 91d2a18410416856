//! Local error indicators, effectivity and maximum marking.

use std::sync::Arc;

use hjb_c0ip::adapt::mark_maximum;
use hjb_c0ip::estimator::{compute_indicators, effectivity_index};
use hjb_c0ip::experiments::builtin_exp1;
use hjb_c0ip::scheme::{error_norms, space_and_datum};
use hjb_c0ip::solver::howard_solve;
use hjb_c0ip::{BoundaryProjection, DiscreteFunction, Mesh, SchemeParams};

fn main() -> hjb_c0ip::Result<()> {
    let (problem, exact) = builtin_exp1(0.5, 4)?;
    let params = SchemeParams::new(2);
    let (space, datum) = space_and_datum(Arc::new(Mesh::unit_square(4)), 2, &problem, BoundaryProjection::Interpolation)?;
    let u_h = howard_solve(&problem, &datum, None, &params)?.solution;
    let g_h = DiscreteFunction::from_coeffs(space.clone(), datum.coeffs().to_vec())?;
    let ind = compute_indicators(&problem, &u_h, &g_h, problem.boundary_hessian(), false);
    let err = error_norms(&u_h, &exact, params.sigma).h;

    println!("volume residual   {:.4e}", ind.total_k());
    println!("data volume       {:.4e}", ind.total_k_g());
    println!("jumps of u_h      {:.4e}", ind.total_e());
    println!("jumps of g_h      {:.4e}", ind.total_e_g());
    println!("eta {:.4e}, ||u - u_h||_h {err:.4e}, effectivity {:.3}", ind.total(), effectivity_index(ind.total(), err));

    let (triangles, edges) = mark_maximum(&ind, 0.2);
    println!("theta = 0.2 marks {} of {} triangles and {} of {} edges", triangles.len(), space.mesh().num_triangles(), edges.len(), ind.eta_e.len());
    let worst = (0..ind.eta_k.len()).max_by(|&a, &b| ind.eta_k[a].total_cmp(&ind.eta_k[b])).unwrap_or(0);
    println!("largest element indicator on triangle {worst} with centroid {:?}", space.mesh().centroid(worst));

    let mut csv = Vec::new();
    ind.write_csv(&mut csv)?;
    println!("indicator CSV: {} lines", String::from_utf8_lossy(&csv).lines().count());
    Ok(())
}
