//! Multi-view datasets: manifest loading/saving, preprocessing and synthetic
//! fixtures.
//!
//! A manifest is a plain `key = value` file (`#` starts a comment):
//!
//! ```text
//! name = rings
//! view.0.path = view_0.csv
//! view.0.transpose = false
//! view.1.path = view_1.csv
//! labels.path = labels.csv
//! ```
//!
//! View files are header-less CSV, one feature per row and one sample per
//! column unless `view.<i>.transpose = true`. Labels are one integer per line.
//! Relative paths resolve against the manifest's directory.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct MultiViewDataset {
    /// View `v` is `d_v × n` (features × samples).
    pub views: Vec<DMatrix<f64>>,
    pub labels: Option<Vec<usize>>,
    pub view_names: Option<Vec<String>>,
    pub name: Option<String>,
}

impl MultiViewDataset {
    pub fn new(views: Vec<DMatrix<f64>>, labels: Option<Vec<usize>>) -> Result<Self> {
        let ds = Self {
            views,
            labels,
            view_names: None,
            name: None,
        };
        ds.validate()?;
        Ok(ds)
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = Some(name.into());
        self
    }

    pub fn validate(&self) -> Result<()> {
        let first = self.views.first().ok_or(Error::Empty("dataset has no views"))?;
        let n = first.ncols();
        if n < 2 {
            return Err(Error::ShapeMismatch(format!("need at least 2 samples, got {n}")));
        }
        for (v, x) in self.views.iter().enumerate() {
            if x.nrows() == 0 {
                return Err(Error::ShapeMismatch(format!("view {v} has no features")));
            }
            if x.ncols() != n {
                return Err(Error::ShapeMismatch(format!(
                    "view {v} has {} samples, view 0 has {n}",
                    x.ncols()
                )));
            }
            if !x.iter().all(|e| e.is_finite()) {
                return Err(Error::NonFinite("view data"));
            }
        }
        if let Some(labels) = &self.labels {
            if labels.len() != n {
                return Err(Error::ShapeMismatch(format!(
                    "{} labels for {n} samples",
                    labels.len()
                )));
            }
        }
        if let Some(names) = &self.view_names {
            if names.len() != self.views.len() {
                return Err(Error::ShapeMismatch("one name per view required".into()));
            }
        }
        Ok(())
    }

    pub fn n_samples(&self) -> usize {
        self.views.first().map_or(0, |x| x.ncols())
    }

    pub fn n_views(&self) -> usize {
        self.views.len()
    }

    /// Number of distinct ground-truth labels, if labels are attached.
    pub fn n_classes(&self) -> Option<usize> {
        self.labels.as_ref().map(|l| {
            let mut l = l.clone();
            l.sort_unstable();
            l.dedup();
            l.len()
        })
    }

    /// SHA-256 over shapes, raw little-endian values and labels.
    pub fn fingerprint(&self) -> String {
        let mut h = Sha256::new();
        h.update((self.views.len() as u64).to_le_bytes());
        for x in &self.views {
            h.update((x.nrows() as u64).to_le_bytes());
            h.update((x.ncols() as u64).to_le_bytes());
            for v in x.iter() {
                h.update(v.to_le_bytes());
            }
        }
        match &self.labels {
            Some(labels) => {
                h.update([1u8]);
                for &l in labels {
                    h.update((l as u64).to_le_bytes());
                }
            }
            None => h.update([0u8]),
        }
        hex::encode(h.finalize())
    }

    pub fn normalize(mut self, mode: NormalizeMode) -> Self {
        match mode {
            NormalizeMode::None => {}
            NormalizeMode::UnitColumn => {
                for x in &mut self.views {
                    for mut col in x.column_iter_mut() {
                        let norm = col.norm();
                        if norm > 0.0 {
                            col /= norm;
                        }
                    }
                }
            }
            NormalizeMode::ZScore => {
                for x in &mut self.views {
                    let n = x.ncols() as f64;
                    for mut row in x.row_iter_mut() {
                        let mean = row.sum() / n;
                        let var = row.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
                        let sd = var.sqrt();
                        if sd < 1e-12 {
                            row.fill(0.0);
                        } else {
                            row.apply(|v| *v = (*v - mean) / sd);
                        }
                    }
                }
            }
        }
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NormalizeMode {
    None,
    /// Each sample scaled to unit Euclidean norm within every view.
    #[default]
    UnitColumn,
    /// Each feature standardized to zero mean and unit variance.
    ZScore,
}

impl std::str::FromStr for NormalizeMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "none" => Ok(NormalizeMode::None),
            "unit" | "unit-column" | "unitcolumn" => Ok(NormalizeMode::UnitColumn),
            "zscore" | "z-score" => Ok(NormalizeMode::ZScore),
            other => Err(Error::InvalidParameter(format!(
                "unknown normalization {other:?}, expected none|unit-column|zscore"
            ))),
        }
    }
}

impl std::fmt::Display for NormalizeMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            NormalizeMode::None => "none",
            NormalizeMode::UnitColumn => "unit-column",
            NormalizeMode::ZScore => "zscore",
        })
    }
}

// ---------------------------------------------------------------------------
// key = value files

/// Parsed `key = value` file; keys remember their line for diagnostics.
#[derive(Debug, Clone)]
pub struct KeyValueFile {
    pub path: PathBuf,
    entries: BTreeMap<String, (String, usize)>,
}

impl KeyValueFile {
    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(path, &text)
    }

    pub fn parse(path: &Path, text: &str) -> Result<Self> {
        let mut entries = BTreeMap::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(Error::Parse {
                    path: path.to_path_buf(),
                    line: idx + 1,
                    column: 1,
                    message: format!("expected `key = value`, got {line:?}"),
                });
            };
            let key = key.trim().to_string();
            if entries
                .insert(key.clone(), (value.trim().to_string(), idx + 1))
                .is_some()
            {
                return Err(Error::Parse {
                    path: path.to_path_buf(),
                    line: idx + 1,
                    column: 1,
                    message: format!("duplicate key {key:?}"),
                });
            }
        }
        Ok(Self {
            path: path.to_path_buf(),
            entries,
        })
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(|(v, _)| v.as_str())
    }

    pub fn line_of(&self, key: &str) -> usize {
        self.entries.get(key).map_or(0, |(_, l)| *l)
    }

    pub fn keys(&self) -> impl Iterator<Item = &str> {
        self.entries.keys().map(String::as_str)
    }

    /// Parses `key` with `FromStr`, reporting the line on failure.
    pub fn parse_value<T: std::str::FromStr>(&self, key: &str) -> Result<Option<T>> {
        match self.get(key) {
            None => Ok(None),
            Some(v) => v.parse().map(Some).map_err(|_| Error::Parse {
                path: self.path.clone(),
                line: self.line_of(key),
                column: 1,
                message: format!("invalid value {v:?} for {key}"),
            }),
        }
    }
}

// ---------------------------------------------------------------------------
// CSV

/// Reads a header-less numeric CSV as a `rows × cols` matrix.
pub fn read_matrix_csv(path: impl AsRef<Path>) -> Result<DMatrix<f64>> {
    read_numeric_csv(path.as_ref(), false).map(|(_, m)| m)
}

/// Reads a numeric CSV whose first line names the columns, such as the trace
/// written by `fit`.
pub fn read_table_csv(path: impl AsRef<Path>) -> Result<(Vec<String>, DMatrix<f64>)> {
    read_numeric_csv(path.as_ref(), true)
}

fn read_numeric_csv(path: &Path, header: bool) -> Result<(Vec<String>, DMatrix<f64>)> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .from_path(path)
        .map_err(|e| csv_error(path, e))?;
    let mut names = Vec::new();
    let mut values = Vec::new();
    let mut cols = None;
    let mut rows = 0;
    for (r, record) in reader.records().enumerate() {
        let record = record.map_err(|e| csv_error(path, e))?;
        if record.len() == 1 && record[0].trim().is_empty() {
            continue;
        }
        if header && r == 0 {
            names = record.iter().map(|c| c.trim().to_string()).collect();
            cols = Some(names.len());
            continue;
        }
        match cols {
            None => cols = Some(record.len()),
            Some(c) if c != record.len() => {
                return Err(Error::Parse {
                    path: path.to_path_buf(),
                    line: r + 1,
                    column: record.len().min(c) + 1,
                    message: format!("ragged row: {} fields, expected {c}", record.len()),
                });
            }
            _ => {}
        }
        for (c, cell) in record.iter().enumerate() {
            let v: f64 = cell.trim().parse().map_err(|_| Error::Parse {
                path: path.to_path_buf(),
                line: r + 1,
                column: c + 1,
                message: format!("not a number: {cell:?}"),
            })?;
            if !v.is_finite() {
                return Err(Error::Parse {
                    path: path.to_path_buf(),
                    line: r + 1,
                    column: c + 1,
                    message: format!("non-finite value {cell:?}"),
                });
            }
            values.push(v);
        }
        rows += 1;
    }
    let cols = cols.ok_or_else(|| Error::Format {
        path: path.to_path_buf(),
        message: "empty matrix file".into(),
    })?;
    if rows == 0 {
        return Err(Error::Format {
            path: path.to_path_buf(),
            message: "no data rows".into(),
        });
    }
    Ok((names, DMatrix::from_row_slice(rows, cols, &values)))
}

fn csv_error(path: &Path, e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::io(path, io),
        other => Error::Format {
            path: path.to_path_buf(),
            message: format!("{other:?}"),
        },
    }
}

/// 17 significant digits, which round-trips every finite `f64`.
pub fn format_f64(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn write_matrix_csv(path: impl AsRef<Path>, m: &DMatrix<f64>) -> Result<()> {
    let path = path.as_ref();
    let mut out = String::with_capacity(m.nrows() * m.ncols() * 24);
    for row in m.row_iter() {
        let cells: Vec<String> = row.iter().map(|&v| format_f64(v)).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    fs::write(path, out).map_err(|e| Error::io(path, e))
}

pub fn read_labels(path: impl AsRef<Path>) -> Result<Vec<usize>> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut labels = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        labels.push(line.parse().map_err(|_| Error::Parse {
            path: path.to_path_buf(),
            line: i + 1,
            column: 1,
            message: format!("not a non-negative integer label: {line:?}"),
        })?);
    }
    if labels.is_empty() {
        return Err(Error::Format {
            path: path.to_path_buf(),
            message: "no labels".into(),
        });
    }
    Ok(labels)
}

pub fn write_labels(path: impl AsRef<Path>, labels: &[usize]) -> Result<()> {
    let path = path.as_ref();
    let mut f = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut out = String::with_capacity(labels.len() * 3);
    for l in labels {
        out.push_str(&l.to_string());
        out.push('\n');
    }
    f.write_all(out.as_bytes()).map_err(|e| Error::io(path, e))
}

// ---------------------------------------------------------------------------
// manifests

fn parse_bool(kv: &KeyValueFile, key: &str) -> Result<bool> {
    match kv.get(key).map(|s| s.to_ascii_lowercase()) {
        None => Ok(false),
        Some(s) if s == "true" || s == "1" || s == "yes" => Ok(true),
        Some(s) if s == "false" || s == "0" || s == "no" => Ok(false),
        Some(s) => Err(Error::Parse {
            path: kv.path.clone(),
            line: kv.line_of(key),
            column: 1,
            message: format!("expected true/false for {key}, got {s:?}"),
        }),
    }
}

/// Loads a dataset from a manifest file.
pub fn load_dataset(manifest_path: impl AsRef<Path>) -> Result<MultiViewDataset> {
    let manifest_path = manifest_path.as_ref();
    let kv = KeyValueFile::read(manifest_path)?;
    let base = manifest_path.parent().unwrap_or(Path::new("."));

    let mut indices: Vec<usize> = Vec::new();
    for key in kv.keys() {
        if let Some(rest) = key.strip_prefix("view.") {
            let (idx, field) = rest.split_once('.').unwrap_or((rest, ""));
            let idx: usize = idx.parse().map_err(|_| Error::Parse {
                path: kv.path.clone(),
                line: kv.line_of(key),
                column: 1,
                message: format!("bad view index in {key:?}"),
            })?;
            if !matches!(field, "path" | "transpose" | "name") {
                return Err(Error::Parse {
                    path: kv.path.clone(),
                    line: kv.line_of(key),
                    column: 1,
                    message: format!("unknown view field in {key:?}"),
                });
            }
            if !indices.contains(&idx) {
                indices.push(idx);
            }
        } else if !matches!(key, "name" | "labels.path") {
            return Err(Error::Parse {
                path: kv.path.clone(),
                line: kv.line_of(key),
                column: 1,
                message: format!("unknown manifest key {key:?}"),
            });
        }
    }
    indices.sort_unstable();
    if indices.is_empty() {
        return Err(Error::Format {
            path: kv.path.clone(),
            message: "manifest lists no views".into(),
        });
    }
    if indices.iter().enumerate().any(|(i, &idx)| i != idx) {
        return Err(Error::Format {
            path: kv.path.clone(),
            message: "view indices must be contiguous from 0".into(),
        });
    }

    let mut views = Vec::with_capacity(indices.len());
    let mut files: Vec<PathBuf> = Vec::with_capacity(indices.len());
    let mut names = Vec::new();
    for idx in indices {
        let key = format!("view.{idx}.path");
        let rel = kv.get(&key).ok_or_else(|| Error::Format {
            path: kv.path.clone(),
            message: format!("missing {key}"),
        })?;
        let file = base.join(rel);
        let mut x = read_matrix_csv(&file)?;
        if parse_bool(&kv, &format!("view.{idx}.transpose"))? {
            x = x.transpose();
        }
        if let Some(prev) = views.first().map(|v: &DMatrix<f64>| v.ncols()) {
            if x.ncols() != prev {
                return Err(Error::ShapeMismatch(format!(
                    "{} has {} samples but {} has {prev}",
                    file.display(),
                    x.ncols(),
                    files[0].display()
                )));
            }
        }
        names.push(kv.get(&format!("view.{idx}.name")).map(str::to_string));
        views.push(x);
        files.push(file);
    }

    let labels = match kv.get("labels.path") {
        Some(rel) => {
            let file = base.join(rel);
            let labels = read_labels(&file)?;
            if labels.len() != views[0].ncols() {
                return Err(Error::ShapeMismatch(format!(
                    "{} has {} labels but {} has {} samples",
                    file.display(),
                    labels.len(),
                    files[0].display(),
                    views[0].ncols()
                )));
            }
            Some(labels)
        }
        None => None,
    };

    let mut ds = MultiViewDataset::new(views, labels)?;
    ds.name = kv.get("name").map(str::to_string);
    if names.iter().all(Option::is_some) {
        ds.view_names = Some(names.into_iter().flatten().collect());
    }
    Ok(ds)
}

/// Writes `manifest.txt`, `view_<i>.csv` and (if present) `labels.csv` into
/// `dir`, returning the manifest path. [`load_dataset`] reads it back
/// bit-exactly.
pub fn save_dataset(ds: &MultiViewDataset, dir: impl AsRef<Path>) -> Result<PathBuf> {
    let dir = dir.as_ref();
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut manifest = String::new();
    if let Some(name) = &ds.name {
        manifest.push_str(&format!("name = {name}\n"));
    }
    for (i, x) in ds.views.iter().enumerate() {
        let file = format!("view_{i}.csv");
        write_matrix_csv(dir.join(&file), x)?;
        manifest.push_str(&format!("view.{i}.path = {file}\n"));
        manifest.push_str(&format!("view.{i}.transpose = false\n"));
        if let Some(names) = &ds.view_names {
            manifest.push_str(&format!("view.{i}.name = {}\n", names[i]));
        }
    }
    if let Some(labels) = &ds.labels {
        write_labels(dir.join("labels.csv"), labels)?;
        manifest.push_str("labels.path = labels.csv\n");
    }
    let path = dir.join("manifest.txt");
    fs::write(&path, manifest).map_err(|e| Error::io(&path, e))?;
    Ok(path)
}

// ---------------------------------------------------------------------------
// synthetic fixtures

/// Union of random linear subspaces, observed through several views.
#[derive(Debug, Clone, PartialEq)]
pub struct SubspaceParams {
    pub n_per_cluster: usize,
    pub k: usize,
    /// Ambient dimension of each view; one entry per view.
    pub dims_per_view: Vec<usize>,
    /// Intrinsic dimension of every subspace.
    pub subspace_dim: usize,
    /// Standard deviation of additive Gaussian noise.
    pub noise: f64,
    pub seed: u64,
}

impl Default for SubspaceParams {
    fn default() -> Self {
        Self {
            n_per_cluster: 30,
            k: 3,
            dims_per_view: vec![10, 12],
            subspace_dim: 3,
            noise: 0.01,
            seed: 7,
        }
    }
}

fn gaussian(rng: &mut ChaCha8Rng) -> f64 {
    rng.sample(StandardNormal)
}

/// Samples `n_per_cluster` points from each of `k` random `subspace_dim`-
/// dimensional subspaces in every view. A sample keeps its latent subspace
/// coordinates across views; each view has its own random bases. Labels are
/// cluster-major.
pub fn synth_linear_subspaces(p: &SubspaceParams) -> Result<MultiViewDataset> {
    if p.k < 2 {
        return Err(Error::InvalidParameter("need k >= 2 subspaces".into()));
    }
    if p.n_per_cluster == 0 || p.dims_per_view.is_empty() || p.subspace_dim == 0 {
        return Err(Error::InvalidParameter(
            "n_per_cluster, dims_per_view and subspace_dim must be non-empty/positive".into(),
        ));
    }
    if let Some(&d) = p.dims_per_view.iter().find(|&&d| d < p.subspace_dim) {
        return Err(Error::InvalidParameter(format!(
            "view dimension {d} is below subspace dimension {}",
            p.subspace_dim
        )));
    }
    if !(p.noise.is_finite() && p.noise >= 0.0) {
        return Err(Error::InvalidParameter(format!("bad noise level {}", p.noise)));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(p.seed);
    let n = p.n_per_cluster * p.k;
    let latent = DMatrix::from_fn(p.subspace_dim, n, |_, _| gaussian(&mut rng));
    let mut views = Vec::with_capacity(p.dims_per_view.len());
    for &d in &p.dims_per_view {
        let mut x = DMatrix::zeros(d, n);
        for c in 0..p.k {
            let raw = DMatrix::from_fn(d, p.subspace_dim, |_, _| gaussian(&mut rng));
            let basis = raw.qr().q();
            let cols = c * p.n_per_cluster..(c + 1) * p.n_per_cluster;
            for col in cols {
                x.set_column(col, &(&basis * latent.column(col)));
            }
        }
        if p.noise > 0.0 {
            x.apply(|v| *v += p.noise * gaussian(&mut rng));
        }
        views.push(x);
    }
    let labels = (0..n).map(|i| i / p.n_per_cluster).collect();
    Ok(MultiViewDataset::new(views, Some(labels))?.with_name("subspaces"))
}

/// Concentric rings in the plane.
#[derive(Debug, Clone, PartialEq)]
pub struct RingParams {
    pub n_per_ring: usize,
    /// Strictly increasing; one ring per radius.
    pub radii: Vec<f64>,
    pub noise: f64,
    pub views: usize,
    pub seed: u64,
}

impl Default for RingParams {
    fn default() -> Self {
        Self {
            n_per_ring: 50,
            radii: vec![1.0, 3.0],
            noise: 0.05,
            views: 2,
            seed: 7,
        }
    }
}

/// Every sample keeps its ring and angle across views; each view applies its
/// own random rotation and isotropic Gaussian noise. Labels are ring indices,
/// ring-major.
pub fn synth_rings(p: &RingParams) -> Result<MultiViewDataset> {
    if p.radii.len() < 2 {
        return Err(Error::InvalidParameter("need at least 2 rings".into()));
    }
    if p.radii.windows(2).any(|w| w[1] <= w[0]) || p.radii[0] < 0.0 {
        return Err(Error::InvalidParameter(
            "ring radii must be non-negative and strictly increasing".into(),
        ));
    }
    if p.n_per_ring == 0 || p.views == 0 {
        return Err(Error::InvalidParameter("n_per_ring and views must be positive".into()));
    }
    if !(p.noise.is_finite() && p.noise >= 0.0) {
        return Err(Error::InvalidParameter(format!("bad noise level {}", p.noise)));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(p.seed);
    let n = p.n_per_ring * p.radii.len();
    let angles: Vec<f64> = (0..n)
        .map(|_| rng.random_range(0.0..std::f64::consts::TAU))
        .collect();
    let labels: Vec<usize> = (0..n).map(|i| i / p.n_per_ring).collect();

    let mut views = Vec::with_capacity(p.views);
    for _ in 0..p.views {
        let phi = rng.random_range(0.0..std::f64::consts::TAU);
        let mut x = DMatrix::zeros(2, n);
        for i in 0..n {
            let r = p.radii[labels[i]];
            let t = angles[i] + phi;
            x[(0, i)] = r * t.cos();
            x[(1, i)] = r * t.sin();
        }
        if p.noise > 0.0 {
            x.apply(|v| *v += p.noise * gaussian(&mut rng));
        }
        views.push(x);
    }
    Ok(MultiViewDataset::new(views, Some(labels))?.with_name("rings"))
}
