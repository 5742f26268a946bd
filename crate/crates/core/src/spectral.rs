//! Affinity graph, Laplacian eigen-step and k-means labelling.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{ensure_finite, Error, Result};

/// `W = (|C*| + |C*|ᵀ)/2` with its degree vector and Laplacian `L = D − W`.
#[derive(Debug, Clone)]
pub struct Affinity {
    pub w: DMatrix<f64>,
    pub degree: DVector<f64>,
    pub laplacian: DMatrix<f64>,
}

pub fn affinity_from(c_star: &DMatrix<f64>) -> Result<Affinity> {
    let n = c_star.nrows();
    if c_star.ncols() != n {
        return Err(Error::ShapeMismatch(format!(
            "affinity source must be square, got {}x{}",
            n,
            c_star.ncols()
        )));
    }
    ensure_finite(c_star, "consensus matrix")?;

    let mut w = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in (i + 1)..n {
            let s = 0.5 * (c_star[(i, j)].abs() + c_star[(j, i)].abs());
            w[(i, j)] = s;
            w[(j, i)] = s;
        }
    }
    Ok(Affinity::from_weights(w))
}

impl Affinity {
    /// Builds degree and Laplacian from an already symmetric, loopless `w`.
    pub fn from_weights(w: DMatrix<f64>) -> Self {
        let degree = DVector::from_iterator(w.nrows(), w.row_iter().map(|r| r.sum()));
        let mut laplacian = -w.clone();
        for i in 0..w.nrows() {
            laplacian[(i, i)] = degree[i] - w[(i, i)];
        }
        Self {
            w,
            degree,
            laplacian,
        }
    }
}

/// Eigenvectors of the `k` smallest Laplacian eigenvalues.
#[derive(Debug, Clone)]
pub struct Embedding {
    /// `n × k`, orthonormal columns.
    pub f: DMatrix<f64>,
    /// Ascending.
    pub eigenvalues: Vec<f64>,
}

/// Solves `min tr(FᵀLF)` s.t. `FᵀF = I` by a full symmetric eigendecomposition.
///
/// Columns are ordered by ascending eigenvalue (stable on ties) and each one
/// is flipped so that its largest-magnitude entry is positive, first index
/// winning ties.
pub fn update_f(l: &DMatrix<f64>, k: usize) -> Result<Embedding> {
    let n = l.nrows();
    if l.ncols() != n {
        return Err(Error::ShapeMismatch("Laplacian must be square".into()));
    }
    if k == 0 || k > n {
        return Err(Error::InvalidParameter(format!(
            "cluster count k={k} must be in 1..={n}"
        )));
    }
    ensure_finite(l, "Laplacian")?;

    let eig = match symmetric_eigen(l.clone()) {
        Some(eig) => eig,
        None => {
            // The implicit QR sweep occasionally yields NaNs on very sparse
            // Laplacians with exact zero rows; a diagonal shift sidesteps it.
            let shift = 1.0 + l.row_iter().map(|r| r.abs().sum()).fold(0.0, f64::max);
            let shifted = l + DMatrix::identity(n, n) * shift;
            let mut eig = symmetric_eigen(shifted).ok_or_else(|| {
                Error::Numerical("symmetric eigensolver produced non-finite output".into())
            })?;
            eig.eigenvalues.add_scalar_mut(-shift);
            eig
        }
    };
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));

    let mut f = DMatrix::zeros(n, k);
    let mut eigenvalues = Vec::with_capacity(k);
    for (col, &idx) in order.iter().take(k).enumerate() {
        let mut v = eig.eigenvectors.column(idx).into_owned();
        let mut pivot = 0;
        for i in 1..n {
            if v[i].abs() > v[pivot].abs() {
                pivot = i;
            }
        }
        if v[pivot] < 0.0 {
            v.neg_mut();
        }
        f.set_column(col, &v);
        eigenvalues.push(eig.eigenvalues[idx]);
    }
    Ok(Embedding { f, eigenvalues })
}

fn symmetric_eigen(m: DMatrix<f64>) -> Option<SymmetricEigen<f64, nalgebra::Dyn>> {
    let n = m.nrows();
    let eig = SymmetricEigen::try_new(m, f64::EPSILON, 0)?;
    let finite = eig.eigenvalues.iter().chain(eig.eigenvectors.iter()).all(|v| v.is_finite());
    let gram = eig.eigenvectors.tr_mul(&eig.eigenvectors);
    (finite && (gram - DMatrix::identity(n, n)).amax() < 1e-10).then_some(eig)
}

/// `tr(FᵀLF)`.
pub fn trace_quadratic(f: &DMatrix<f64>, l: &DMatrix<f64>) -> f64 {
    (f.transpose() * l * f).trace()
}

/// `Q(i,j) = ‖fᵢ − fⱼ‖²` over the rows of `f`.
pub fn pairwise_sq_dists(f: &DMatrix<f64>) -> DMatrix<f64> {
    let n = f.nrows();
    let mut q = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in (i + 1)..n {
            let d = (f.row(i) - f.row(j)).norm_squared();
            q[(i, j)] = d;
            q[(j, i)] = d;
        }
    }
    q
}

/// Scales each row to unit Euclidean norm; all-zero rows stay zero.
pub fn row_normalize(f: &DMatrix<f64>) -> DMatrix<f64> {
    let mut out = f.clone();
    for mut row in out.row_iter_mut() {
        let norm = row.norm();
        if norm > 0.0 {
            row /= norm;
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KMeansOptions {
    pub restarts: usize,
    pub max_iters: usize,
}

impl Default for KMeansOptions {
    fn default() -> Self {
        Self {
            restarts: 20,
            max_iters: 300,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct KMeansFit {
    pub labels: Vec<usize>,
    pub inertia: f64,
}

/// k-means on the rows of `points` with the default restart budget.
pub fn kmeans_labels(points: &DMatrix<f64>, k: usize, seed: u64) -> Result<Vec<usize>> {
    Ok(kmeans(points, k, seed, KMeansOptions::default())?.labels)
}

/// Lloyd iterations from k-means++ seeds, best inertia over `restarts`
/// (earliest restart wins ties). Empty clusters are reseeded at the point
/// farthest from its current centroid.
pub fn kmeans(points: &DMatrix<f64>, k: usize, seed: u64, opts: KMeansOptions) -> Result<KMeansFit> {
    let n = points.nrows();
    if k == 0 || k > n {
        return Err(Error::InvalidParameter(format!(
            "k-means needs 1 <= k <= n, got k={k}, n={n}"
        )));
    }
    ensure_finite(points, "k-means input")?;

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best: Option<KMeansFit> = None;
    for _ in 0..opts.restarts.max(1) {
        let fit = lloyd(points, k, &mut rng, opts.max_iters);
        if best.as_ref().is_none_or(|b| fit.inertia < b.inertia) {
            best = Some(fit);
        }
    }
    Ok(best.expect("at least one restart"))
}

fn sq_dist(points: &DMatrix<f64>, i: usize, centroids: &DMatrix<f64>, c: usize) -> f64 {
    points
        .row(i)
        .iter()
        .zip(centroids.row(c).iter())
        .map(|(a, b)| (a - b) * (a - b))
        .sum()
}

fn plus_plus_init(points: &DMatrix<f64>, k: usize, rng: &mut ChaCha8Rng) -> DMatrix<f64> {
    let n = points.nrows();
    let mut centroids = DMatrix::zeros(k, points.ncols());
    let first = rng.random_range(0..n);
    centroids.set_row(0, &points.row(first));
    let mut nearest: Vec<f64> = (0..n).map(|i| sq_dist(points, i, &centroids, 0)).collect();
    for c in 1..k {
        let total: f64 = nearest.iter().sum();
        let pick = if total > 0.0 {
            let mut target = rng.random::<f64>() * total;
            let mut chosen = n - 1;
            for (i, &d) in nearest.iter().enumerate() {
                if d > 0.0 && target < d {
                    chosen = i;
                    break;
                }
                target -= d;
            }
            chosen
        } else {
            rng.random_range(0..n)
        };
        centroids.set_row(c, &points.row(pick));
        for (i, d) in nearest.iter_mut().enumerate() {
            *d = d.min(sq_dist(points, i, &centroids, c));
        }
    }
    centroids
}

fn lloyd(points: &DMatrix<f64>, k: usize, rng: &mut ChaCha8Rng, max_iters: usize) -> KMeansFit {
    let n = points.nrows();
    let dim = points.ncols();
    let mut centroids = plus_plus_init(points, k, rng);
    let mut labels = vec![usize::MAX; n];
    let mut dists = vec![0.0; n];

    for _ in 0..max_iters.max(1) {
        let mut changed = false;
        for i in 0..n {
            let (mut best_c, mut best_d) = (0, f64::INFINITY);
            for c in 0..k {
                let d = sq_dist(points, i, &centroids, c);
                if d < best_d {
                    best_c = c;
                    best_d = d;
                }
            }
            dists[i] = best_d;
            if labels[i] != best_c {
                labels[i] = best_c;
                changed = true;
            }
        }
        if !changed {
            break;
        }

        let mut sums = DMatrix::zeros(k, dim);
        let mut counts = vec![0usize; k];
        for i in 0..n {
            let c = labels[i];
            counts[c] += 1;
            let mut row = sums.row_mut(c);
            row += points.row(i);
        }
        for c in 0..k {
            if counts[c] > 0 {
                let mean = sums.row(c) / counts[c] as f64;
                centroids.set_row(c, &mean);
            } else {
                let far = (0..n)
                    .max_by(|&a, &b| dists[a].total_cmp(&dists[b]).then(b.cmp(&a)))
                    .unwrap_or(0);
                centroids.set_row(c, &points.row(far));
                dists[far] = 0.0;
            }
        }
    }

    let inertia = (0..n).map(|i| sq_dist(points, i, &centroids, labels[i])).sum();
    KMeansFit { labels, inertia }
}
