//! Cluster a synthetic union of subspaces seen through two views.

use mvksc::data::{synth_linear_subspaces, NormalizeMode, SubspaceParams};
use mvksc::solver::{fit, SolverConfig};

fn main() -> mvksc::Result<()> {
    let ds = synth_linear_subspaces(&SubspaceParams::default())?.normalize(NormalizeMode::UnitColumn);
    println!(
        "{} samples, {} views, {} clusters",
        ds.n_samples(),
        ds.n_views(),
        ds.n_classes().unwrap_or(0)
    );

    let result = fit(&ds, &SolverConfig::new(3))?;
    let m = result.metrics.expect("fixture has labels");
    println!(
        "iterations={} converged={} acc={:.4} nmi={:.4} ({:.2}s)",
        result.iterations, result.converged, m.acc, m.nmi, result.elapsed_secs
    );
    Ok(())
}
