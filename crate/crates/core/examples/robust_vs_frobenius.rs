//! Replace one view with pure noise and compare the l1 and Frobenius
//! consensus couplings. Pass the number of clean views as the first argument
//! (default 1); the noise view is added on top.

use mvksc::data::{synth_linear_subspaces, NormalizeMode, SubspaceParams};
use mvksc::solver::{fit, ConsensusMode, SolverConfig};
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

fn main() -> mvksc::Result<()> {
    let clean: usize = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(1);
    let dims: Vec<usize> = (0..=clean).map(|v| 10 + 2 * v).collect();
    let (mut l1, mut fro) = (0.0, 0.0);
    for seed in 0..5 {
        let mut ds = synth_linear_subspaces(&SubspaceParams {
            seed,
            dims_per_view: dims.clone(),
            ..SubspaceParams::default()
        })?;
        let mut rng = ChaCha8Rng::seed_from_u64(1000 + seed);
        let noisy = ds.views.len() - 1;
        let (d, n) = ds.views[noisy].shape();
        ds.views[noisy] = DMatrix::from_fn(d, n, |_, _| rng.sample(StandardNormal));
        let ds = ds.normalize(NormalizeMode::UnitColumn);

        let config = SolverConfig { seed, ..SolverConfig::new(3) };
        let a = fit(&ds, &config)?.metrics.expect("labels").acc;
        let b = fit(
            &ds,
            &SolverConfig { consensus_mode: ConsensusMode::Frobenius, ..config },
        )?
        .metrics
        .expect("labels")
        .acc;
        println!("seed {seed}: l1 {a:.4}  fro {b:.4}");
        l1 += a;
        fro += b;
    }
    println!("mean: l1 {:.4}  fro {:.4}", l1 / 5.0, fro / 5.0);
    Ok(())
}
