//! Write a dataset as a manifest plus CSV files and load it back.

use mvksc::data::{load_dataset, save_dataset, synth_rings, RingParams};

fn main() -> mvksc::Result<()> {
    let dir = std::env::temp_dir().join("mvksc-dataset-io");
    let ds = synth_rings(&RingParams { views: 3, ..RingParams::default() })?;
    let manifest = save_dataset(&ds, &dir)?;
    print!("{}", std::fs::read_to_string(&manifest).unwrap_or_default());

    let back = load_dataset(&manifest)?;
    println!("fingerprint {}", back.fingerprint());
    println!("identical after round trip: {}", back.views == ds.views && back.labels == ds.labels);
    Ok(())
}
