//! Fit the subspace fixture and save the consensus affinity as a PGM image.
//! Usage: `cargo run --example affinity_heatmap [out.pgm]`.

use mvksc::cli::heatmap_pgm;
use mvksc::data::{synth_linear_subspaces, NormalizeMode, SubspaceParams};
use mvksc::solver::{fit, SolverConfig};
use mvksc::spectral::affinity_from;

fn main() -> mvksc::Result<()> {
    let out = std::env::args().nth(1).unwrap_or_else(|| "consensus.pgm".into());
    let ds = synth_linear_subspaces(&SubspaceParams::default())?.normalize(NormalizeMode::UnitColumn);
    let result = fit(&ds, &SolverConfig::new(3))?;
    let w = affinity_from(&result.consensus)?.w;

    let n = w.nrows();
    let within: f64 = (0..n)
        .flat_map(|i| (0..n).map(move |j| (i, j)))
        .filter(|&(i, j)| i / 30 == j / 30)
        .map(|(i, j)| w[(i, j)])
        .sum();
    println!("affinity mass inside true blocks: {:.1}%", 100.0 * within / w.sum());

    std::fs::write(&out, heatmap_pgm(&w)?).map_err(|e| mvksc::Error::Io {
        path: out.clone().into(),
        source: e,
    })?;
    println!("wrote {out}");
    Ok(())
}
