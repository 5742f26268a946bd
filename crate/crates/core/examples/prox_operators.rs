//! The scalar proximal operators behind the A and consensus updates.

use mvksc::prox::{
    consensus_scalar, prox_double_l1, soft_threshold, ConsensusParams, DoubleL1Params,
};

fn main() -> mvksc::Result<()> {
    println!("soft(1.5, 1) = {}", soft_threshold(1.5, 1.0));

    // argmin_j ½(j − y)² + α|j − c*| + β|j|
    for (y, alpha, beta, c_star) in [(3.0, 0.5, 0.5, 1.0), (0.2, 1.0, 0.1, 2.0), (1.0, 1.0, 0.0, 1.0)] {
        let p = DoubleL1Params::new(y, alpha, beta, c_star)?;
        println!("prox(y={y}, α={alpha}, β={beta}, c*={c_star}) = {}", prox_double_l1(&p));
    }

    // argmin_c γq|c| + 2λ Σ_v |a_v − c|: a weighted median pulled towards 0.
    let p = ConsensusParams::new(vec![0.9, 1.0, -0.2], 0.5, 1.0, 0.01)?;
    println!("consensus of {:?} = {}", p.a_values, consensus_scalar(&p));
    let p = ConsensusParams::new(vec![0.3, 0.8], 0.5, 1.0, 0.01)?;
    println!("consensus of {:?} = {}", p.a_values, consensus_scalar(&p));
    Ok(())
}
