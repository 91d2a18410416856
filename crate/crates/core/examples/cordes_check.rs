//! Cordes constant, renormalisation and the pointwise HJB operator.

use hjb_c0ip::experiments::builtin_exp1;
use hjb_c0ip::problem::{cordes_epsilon, f_gamma_eval, gamma_of};
use hjb_c0ip::{Control, ControlProblem, Point, Sym2};

fn main() -> hjb_c0ip::Result<()> {
    let samples: Vec<Point> = (0..20).flat_map(|i| (0..20).map(move |j| [(i as f64 + 0.5) / 20.0, (j as f64 + 0.5) / 20.0])).collect();

    let (exp1, _) = builtin_exp1(0.5, 20)?;
    let r = cordes_epsilon(&exp1, &samples)?;
    println!("exp1: epsilon = {:.6}, gamma in [{:.3e}, {:.3e}]", r.epsilon, r.gamma_min, r.gamma_max);

    let a = Sym2::new(3.0, 1.0, 2.0);
    println!("gamma([[3,1],[1,2]]) = {:.6}", gamma_of(&a)?);

    let problem = ControlProblem::new(
        vec![Control::constant("isotropic", Sym2::IDENTITY, 1.0), Control::constant("anisotropic", Sym2::diag(4.0, 1.0), 0.0)],
        |_| 0.0,
    )?;
    for h in [Sym2::diag(1.0, 1.0), Sym2::diag(-1.0, 3.0), Sym2::new(0.0, 2.0, 0.0)] {
        let (value, k) = f_gamma_eval(&problem, &h, [0.5, 0.5])?;
        println!("F_gamma[{:?}] = {value:.6} attained by {}", h, problem.controls()[k].label);
    }

    let saddle = ControlProblem::new(vec![Control::constant("saddle", Sym2::diag(1.0, -1.0), 0.0)], |_| 0.0)?;
    match cordes_epsilon(&saddle, &samples) {
        Err(e) => println!("diag(1, -1): {e}"),
        Ok(r) => println!("diag(1, -1): unexpectedly epsilon = {}", r.epsilon),
    }
    Ok(())
}
