//! Linear versus polynomial kernel on concentric rings, which no linear
//! subspace model can separate.

use mvksc::data::{synth_rings, RingParams};
use mvksc::kernels::KernelSpec;
use mvksc::solver::{fit, SolverConfig};

fn main() -> mvksc::Result<()> {
    let ds = synth_rings(&RingParams::default())?;
    for kernel in [KernelSpec::Linear, KernelSpec::polynomial(1.0, 2)?] {
        let result = fit(&ds, &SolverConfig::new(2).with_kernel(kernel))?;
        let m = result.metrics.expect("fixture has labels");
        println!("{:<10} acc={:.4} nmi={:.4}", kernel.to_string(), m.acc, m.nmi);
    }
    Ok(())
}
