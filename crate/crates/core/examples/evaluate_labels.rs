//! Accuracy under optimal label matching and normalized mutual information.

use mvksc::metrics::{accuracy, contingency, evaluate, nmi};

fn main() -> mvksc::Result<()> {
    let truth = [0, 0, 0, 1, 1, 1, 2, 2, 2];
    let pred = [2, 2, 2, 0, 0, 1, 1, 1, 1];
    for row in contingency(&pred, &truth) {
        println!("{row:?}");
    }
    println!("acc = {:.4}", accuracy(&pred, &truth)?);
    println!("nmi = {:.4}", nmi(&pred, &truth)?);
    println!("{:?}", evaluate(&[0, 0, 1, 1], &[0, 1, 0, 1])?);
    Ok(())
}
