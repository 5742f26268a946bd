//! Drive the solver one iteration at a time and print the convergence trace.

use mvksc::data::{synth_linear_subspaces, NormalizeMode, SubspaceParams};
use mvksc::solver::{Solver, SolverConfig};

fn main() -> mvksc::Result<()> {
    let ds = synth_linear_subspaces(&SubspaceParams::default())?.normalize(NormalizeMode::UnitColumn);
    let mut solver = Solver::new(&ds, SolverConfig::new(3))?;
    println!("{:>4} {:>14} {:>12} {:>12} {:>10}", "iter", "objective", "|C-A|", "|C'1-1|", "rho");
    for _ in 0..40 {
        let row = solver.step()?;
        if row.iter % 5 == 0 || row.iter == 1 {
            println!(
                "{:>4} {:>14.6e} {:>12.3e} {:>12.3e} {:>10.3}",
                row.iter, row.objective, row.residual_ca, row.residual_sum1, row.rho
            );
        }
    }
    Ok(())
}
