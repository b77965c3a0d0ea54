// The interior-point solver on a small rotated-cone program.

use std::error::Error;

use opfrelax::socp::{self, kkt_residuals, ConeProblem, SolveStatus, SolverOptions};

pub fn run_example() -> Result<(), Box<dyn Error>> {
    // minimize a + b  subject to  u² ≤ a·b,  u = 1: the optimum is a = b = 1
    let mut p = ConeProblem::new(3);
    p.c = vec![1.0, 1.0, 0.0];
    p.add_equality(vec![(2, 1.0)], 1.0);
    p.add_cone(vec![2], 0, 1);
    let sol = socp::solve(&p, SolverOptions::default())?;
    println!(
        "{:?} after {} iterations: x = {:?}, objective {:.9}",
        sol.status, sol.iterations, sol.x, sol.primal_objective
    );
    let r = kkt_residuals(&p, &sol);
    println!("residuals: primal {:.1e}, dual {:.1e}, gap {:.1e}", r.primal, r.dual, r.gap);
    if sol.status != SolveStatus::Optimal || (sol.primal_objective - 2.0).abs() > 1e-7 {
        return Err("solver missed the known optimum".into());
    }
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run_example().unwrap();
}
