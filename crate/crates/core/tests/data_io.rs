use std::fs;

use mvksc::data::{self, NormalizeMode};
use mvksc::error::ErrorClass;
use mvksc::Error;
use nalgebra::DMatrix;

#[test]
fn transposed_views_and_names() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("a.csv"), "1,2\n3,4\n5,6\n").unwrap();
    fs::write(dir.path().join("b.csv"), "1,2,3\n").unwrap();
    fs::write(dir.path().join("y.csv"), "0\n1\n1\n").unwrap();
    let manifest = dir.path().join("m.txt");
    fs::write(
        &manifest,
        "name = toy\nview.0.path = a.csv\nview.0.transpose = true\nview.0.name = left\n\
         view.1.path = b.csv\nview.1.name = right\nlabels.path = y.csv\n",
    )
    .unwrap();
    let ds = data::load_dataset(&manifest).unwrap();
    assert_eq!(ds.views[0], DMatrix::from_row_slice(2, 3, &[1.0, 3.0, 5.0, 2.0, 4.0, 6.0]));
    assert_eq!(ds.n_samples(), 3);
    assert_eq!(ds.name.as_deref(), Some("toy"));
    assert_eq!(ds.view_names, Some(vec!["left".into(), "right".into()]));
    assert_eq!(ds.n_classes(), Some(2));
}

#[test]
fn column_mismatch_names_both_files() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("a.csv"), "1,2,3\n").unwrap();
    fs::write(dir.path().join("b.csv"), "1,2\n").unwrap();
    let manifest = dir.path().join("m.txt");
    fs::write(&manifest, "view.0.path = a.csv\nview.1.path = b.csv\n").unwrap();
    let err = data::load_dataset(&manifest).unwrap_err();
    let msg = err.to_string();
    assert!(msg.contains("a.csv") && msg.contains("b.csv"), "{msg}");
    assert_eq!(err.class(), ErrorClass::Data);
}

#[test]
fn malformed_cells_report_location() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("m.csv");
    fs::write(&path, "1,2\n3,x\n").unwrap();
    match data::read_matrix_csv(&path).unwrap_err() {
        Error::Parse { line, column, .. } => assert_eq!((line, column), (2, 2)),
        other => panic!("unexpected {other}"),
    }
    fs::write(&path, "1,2\n3\n").unwrap();
    assert!(matches!(data::read_matrix_csv(&path), Err(Error::Parse { line: 2, .. })));
}

#[test]
fn manifest_rejects_gaps_and_unknown_keys() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("a.csv"), "1,2\n").unwrap();
    let manifest = dir.path().join("m.txt");
    fs::write(&manifest, "view.1.path = a.csv\n").unwrap();
    assert!(data::load_dataset(&manifest).is_err());
    fs::write(&manifest, "view.0.path = a.csv\ncolour = blue\n").unwrap();
    assert!(matches!(data::load_dataset(&manifest), Err(Error::Parse { line: 2, .. })));
}

#[test]
fn normalized_dataset_round_trips_bit_exactly() {
    let ds = data::synth_rings(&data::RingParams::default())
        .unwrap()
        .normalize(NormalizeMode::ZScore);
    let dir = tempfile::tempdir().unwrap();
    let back = data::load_dataset(data::save_dataset(&ds, dir.path()).unwrap()).unwrap();
    assert_eq!(back.views, ds.views);
    assert_eq!(back.fingerprint(), ds.fingerprint());
}
