//! ADMM solver for the enriched robust multi-view kernel subspace objective
//!
//! ```text
//! min  Σᵥ ‖Φ(X⁽ᵛ⁾) − Φ(X⁽ᵛ⁾)C⁽ᵛ⁾‖²_F + θ‖A⁽ᵛ⁾‖₁ + λ‖A⁽ᵛ⁾ − C*‖₁ + γ tr(FᵀLF)
//! s.t. FᵀF = I, diag(A⁽ᵛ⁾) = 0, C⁽ᵛ⁾ᵀ1 = 1, A⁽ᵛ⁾ = C⁽ᵛ⁾
//! ```
//!
//! where `L` is the Laplacian of `W = (|C*| + |C*|ᵀ)/2`. Each iteration runs,
//! in order: the eigen-step for `F`, the elementwise prox for every `A⁽ᵛ⁾`,
//! the linear solve for every `C⁽ᵛ⁾`, the elementwise consensus step for
//! `C*`, dual ascent on `δ⁽ᵛ⁾` and `Σ⁽ᵛ⁾`, and finally `ρ ← min(ρ·mult, cap)`.
//!
//! Two mode switches select the simpler members of the model family:
//! [`ConsensusMode::Frobenius`] swaps the ℓ1 consensus penalty for a squared
//! one, and `enriched = false` drops the `γ` coupling so `C*` is learned from
//! the views alone.

use std::time::Instant;

use nalgebra::{Cholesky, DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::data::MultiViewDataset;
use crate::error::{ensure_finite, Error, Result};
use crate::kernels::{gram, KernelSpec};
use crate::metrics::{self, Scores};
use crate::prox;
use crate::spectral::{self, Embedding};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ConsensusMode {
    /// `λ‖A⁽ᵛ⁾ − C*‖₁`
    #[default]
    RobustL1,
    /// `λ‖A⁽ᵛ⁾ − C*‖²_F`
    Frobenius,
}

impl std::str::FromStr for ConsensusMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "l1" | "robust" | "robustl1" | "robust-l1" => Ok(ConsensusMode::RobustL1),
            "fro" | "frobenius" => Ok(ConsensusMode::Frobenius),
            other => Err(Error::InvalidParameter(format!(
                "unknown consensus mode {other:?}, expected l1|fro"
            ))),
        }
    }
}

impl std::fmt::Display for ConsensusMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            ConsensusMode::RobustL1 => "l1",
            ConsensusMode::Frobenius => "fro",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    /// Consensus weight λ.
    pub lambda: f64,
    /// Spectral coupling weight γ.
    pub gamma: f64,
    /// Sparsity weight θ.
    pub theta: f64,
    /// Number of clusters.
    pub k: usize,
    /// One kernel for all views, or one per view.
    pub kernels: Vec<KernelSpec>,
    pub rho0: f64,
    pub rho_mult: f64,
    /// `None` lets ρ grow without bound.
    pub rho_cap: Option<f64>,
    pub max_iters: usize,
    pub tol: f64,
    pub consensus_mode: ConsensusMode,
    pub enriched: bool,
    pub seed: u64,
}

impl SolverConfig {
    pub fn new(k: usize) -> Self {
        Self {
            lambda: 1.0,
            gamma: 0.01,
            theta: 0.01,
            k,
            kernels: vec![KernelSpec::Linear],
            rho0: 0.2,
            rho_mult: 1.2,
            rho_cap: Some(1e6),
            max_iters: 100,
            tol: 1e-4,
            consensus_mode: ConsensusMode::RobustL1,
            enriched: true,
            seed: 0,
        }
    }

    pub fn with_kernel(mut self, kernel: KernelSpec) -> Self {
        self.kernels = vec![kernel];
        self
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidParameter(msg));
        if !(self.lambda.is_finite() && self.lambda >= 0.0) {
            return bad(format!("lambda must be >= 0, got {}", self.lambda));
        }
        if !(self.gamma.is_finite() && self.gamma >= 0.0) {
            return bad(format!("gamma must be >= 0, got {}", self.gamma));
        }
        if !(self.theta.is_finite() && self.theta >= 0.0) {
            return bad(format!("theta must be >= 0, got {}", self.theta));
        }
        if self.k == 0 {
            return bad("k must be >= 1".into());
        }
        if self.kernels.is_empty() {
            return bad("at least one kernel is required".into());
        }
        for kernel in &self.kernels {
            kernel.validate()?;
        }
        if !(self.rho0.is_finite() && self.rho0 > 0.0) {
            return bad(format!("rho0 must be > 0, got {}", self.rho0));
        }
        if !(self.rho_mult.is_finite() && self.rho_mult >= 1.0) {
            return bad(format!("rho_mult must be >= 1, got {}", self.rho_mult));
        }
        if let Some(cap) = self.rho_cap {
            if !(cap > 0.0) {
                return bad(format!("rho_cap must be > 0, got {cap}"));
            }
        }
        if self.max_iters == 0 {
            return bad("max_iters must be >= 1".into());
        }
        if !(self.tol.is_finite() && self.tol >= 0.0) {
            return bad(format!("tol must be >= 0, got {}", self.tol));
        }
        Ok(())
    }

    pub fn kernel_for(&self, view: usize) -> KernelSpec {
        if self.kernels.len() == 1 {
            self.kernels[0]
        } else {
            self.kernels[view]
        }
    }

    /// γ as seen by the objective and the consensus step.
    pub fn effective_gamma(&self) -> f64 {
        if self.enriched {
            self.gamma
        } else {
            0.0
        }
    }
}

/// One row of the convergence trace, recorded after the multiplier update.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub iter: usize,
    pub objective: f64,
    /// `maxᵥ ‖C⁽ᵛ⁾ − A⁽ᵛ⁾‖_max`
    pub residual_ca: f64,
    /// `maxᵥ ‖C⁽ᵛ⁾ᵀ1 − 1‖_∞`
    pub residual_sum1: f64,
    /// ρ used during this iteration.
    pub rho: f64,
}

#[derive(Debug, Clone)]
pub struct SolverState {
    pub c: Vec<DMatrix<f64>>,
    pub a: Vec<DMatrix<f64>>,
    pub sigma: Vec<DMatrix<f64>>,
    pub delta: Vec<DVector<f64>>,
    pub c_star: DMatrix<f64>,
    pub f: DMatrix<f64>,
    pub rho: f64,
    pub iter: usize,
    pub trace: Vec<TraceRow>,
}

impl SolverState {
    /// All matrices and multipliers start at zero; `F` starts as the leading
    /// `k` canonical basis vectors.
    pub fn zeros(n: usize, views: usize, k: usize, rho: f64) -> Self {
        let z = DMatrix::zeros(n, n);
        Self {
            c: vec![z.clone(); views],
            a: vec![z.clone(); views],
            sigma: vec![z.clone(); views],
            delta: vec![DVector::zeros(n); views],
            c_star: z,
            f: DMatrix::identity(n, k),
            rho,
            iter: 0,
            trace: Vec::new(),
        }
    }

    pub fn n_samples(&self) -> usize {
        self.c_star.nrows()
    }

    /// `(maxᵥ ‖C − A‖_max, maxᵥ ‖Cᵀ1 − 1‖_∞)`.
    pub fn residuals(&self) -> (f64, f64) {
        let mut ca = 0.0f64;
        let mut sum1 = 0.0f64;
        for (c, a) in self.c.iter().zip(&self.a) {
            ca = ca.max((c - a).amax());
            for col in c.column_iter() {
                sum1 = sum1.max((col.sum() - 1.0).abs());
            }
        }
        (ca, sum1)
    }
}

/// `𝒦 + ρ11ᵀ − 1δᵀ + ρA − Σ`.
fn c_rhs(
    k: &DMatrix<f64>,
    a: &DMatrix<f64>,
    sigma: &DMatrix<f64>,
    delta: &DVector<f64>,
    rho: f64,
) -> DMatrix<f64> {
    let n = k.nrows();
    DMatrix::from_fn(n, n, |i, j| {
        k[(i, j)] + rho - delta[j] + rho * a[(i, j)] - sigma[(i, j)]
    })
}

fn c_system(k: &DMatrix<f64>, rho: f64) -> DMatrix<f64> {
    let n = k.nrows();
    DMatrix::from_fn(n, n, |i, j| {
        k[(i, j)] + rho + if i == j { rho } else { 0.0 }
    })
}

fn check_c_inputs(
    n: usize,
    a: &DMatrix<f64>,
    sigma: &DMatrix<f64>,
    delta: &DVector<f64>,
    rho: f64,
) -> Result<()> {
    if !(rho.is_finite() && rho > 0.0) {
        return Err(Error::InvalidParameter(format!("rho must be > 0, got {rho}")));
    }
    if a.shape() != (n, n) || sigma.shape() != (n, n) || delta.len() != n {
        return Err(Error::ShapeMismatch(format!(
            "C-update inputs must be {n}x{n} (A {:?}, Sigma {:?}, delta {})",
            a.shape(),
            sigma.shape(),
            delta.len()
        )));
    }
    ensure_finite(a, "A")?;
    ensure_finite(sigma, "Sigma")?;
    if !delta.iter().all(|v| v.is_finite()) {
        return Err(Error::NonFinite("delta"));
    }
    Ok(())
}

/// `C = (𝒦 + ρI + ρ11ᵀ)⁻¹(𝒦 + ρ11ᵀ − 1δᵀ + ρA − Σ)` by a dense Cholesky solve.
pub fn update_c(
    k: &DMatrix<f64>,
    a: &DMatrix<f64>,
    sigma: &DMatrix<f64>,
    delta: &DVector<f64>,
    rho: f64,
) -> Result<DMatrix<f64>> {
    let n = k.nrows();
    if k.ncols() != n {
        return Err(Error::ShapeMismatch("Gram matrix must be square".into()));
    }
    check_c_inputs(n, a, sigma, delta, rho)?;
    ensure_finite(k, "Gram matrix")?;
    let rhs = c_rhs(k, a, sigma, delta, rho);
    let chol = Cholesky::new(c_system(k, rho))
        .ok_or_else(|| Error::Numerical("C-update system is not positive definite".into()))?;
    Ok(chol.solve(&rhs))
}

/// Linear-kernel C update through the matrix inversion lemma.
///
/// With `Z = [X; √ρ·1ᵀ]` the system matrix is `ZᵀZ + ρIₙ`, and
/// `(ZᵀZ + ρIₙ)⁻¹ = ρ⁻¹Iₙ − ρ⁻¹Zᵀ(ρI_{d+1} + ZZᵀ)⁻¹Z`, so only a
/// `(d+1) × (d+1)` system is factored.
pub fn update_c_linear_fast(
    x: &DMatrix<f64>,
    a: &DMatrix<f64>,
    sigma: &DMatrix<f64>,
    delta: &DVector<f64>,
    rho: f64,
) -> Result<DMatrix<f64>> {
    ensure_finite(x, "view matrix")?;
    let k = x.tr_mul(x);
    woodbury_solve(x, &k, a, sigma, delta, rho)
}

fn woodbury_solve(
    x: &DMatrix<f64>,
    k: &DMatrix<f64>,
    a: &DMatrix<f64>,
    sigma: &DMatrix<f64>,
    delta: &DVector<f64>,
    rho: f64,
) -> Result<DMatrix<f64>> {
    let (d, n) = x.shape();
    check_c_inputs(n, a, sigma, delta, rho)?;
    let rhs = c_rhs(k, a, sigma, delta, rho);

    let mut z = DMatrix::zeros(d + 1, n);
    z.rows_mut(0, d).copy_from(x);
    z.row_mut(d).fill(rho.sqrt());

    let mut inner = &z * z.transpose();
    for i in 0..=d {
        inner[(i, i)] += rho;
    }
    let chol = Cholesky::new(inner)
        .ok_or_else(|| Error::Numerical("Woodbury inner system is not positive definite".into()))?;
    let zr = &z * &rhs;
    let correction = z.transpose() * chol.solve(&zr);
    Ok((rhs - correction) / rho)
}

/// Dual ascent: `δ += ρ(Cᵀ1 − 1)`, `Σ += ρ(C − A)` for every view.
pub fn update_multipliers(state: &mut SolverState, rho: f64) {
    for v in 0..state.c.len() {
        let c = &state.c[v];
        for (j, col) in c.column_iter().enumerate() {
            state.delta[v][j] += rho * (col.sum() - 1.0);
        }
        state.sigma[v] += (c - &state.a[v]) * rho;
    }
}

/// Objective value evaluated on `C` (not `A`):
/// `Σᵥ [tr 𝒦 − 2 tr(𝒦C) + tr(Cᵀ𝒦C) + θ‖C‖₁ + λ‖C − C*‖₁] + γ tr(FᵀLF)`,
/// with the squared Frobenius consensus term in Frobenius mode and `γ = 0`
/// when the run is not enriched.
pub fn objective(state: &SolverState, grams: &[DMatrix<f64>], config: &SolverConfig) -> Result<f64> {
    let mut total = 0.0;
    for (k, c) in grams.iter().zip(&state.c) {
        let kc = k * c;
        let data = k.trace() - 2.0 * kc.trace() + c.dot(&kc);
        let sparsity = config.theta * c.iter().map(|v| v.abs()).sum::<f64>();
        let diff = c - &state.c_star;
        let consensus = match config.consensus_mode {
            ConsensusMode::RobustL1 => diff.iter().map(|v| v.abs()).sum::<f64>(),
            ConsensusMode::Frobenius => diff.norm_squared(),
        };
        total += data + sparsity + config.lambda * consensus;
    }
    let gamma = config.effective_gamma();
    if gamma != 0.0 {
        let aff = spectral::affinity_from(&state.c_star)?;
        total += gamma * spectral::trace_quadratic(&state.f, &aff.laplacian);
    }
    Ok(total)
}

#[derive(Debug, Clone)]
pub struct ClusteringResult {
    pub labels: Vec<usize>,
    /// Embedding of the final consensus Laplacian (before row normalization).
    pub embedding: Embedding,
    pub consensus: DMatrix<f64>,
    pub view_c: Vec<DMatrix<f64>>,
    pub view_a: Vec<DMatrix<f64>>,
    pub trace: Vec<TraceRow>,
    pub iterations: usize,
    pub converged: bool,
    pub metrics: Option<Scores>,
    pub elapsed_secs: f64,
}

/// Owns the cached Gram matrices and the evolving state of one solve.
#[derive(Debug, Clone)]
pub struct Solver {
    config: SolverConfig,
    grams: Vec<DMatrix<f64>>,
    /// Data matrices for views that take the Woodbury path.
    fast_views: Vec<Option<DMatrix<f64>>>,
    state: SolverState,
}

impl Solver {
    pub fn new(dataset: &MultiViewDataset, config: SolverConfig) -> Result<Self> {
        config.validate()?;
        dataset.validate()?;
        let n = dataset.n_samples();
        let views = dataset.n_views();
        if config.k > n {
            return Err(Error::InvalidParameter(format!(
                "k={} exceeds the number of samples {n}",
                config.k
            )));
        }
        if config.kernels.len() != 1 && config.kernels.len() != views {
            return Err(Error::InvalidParameter(format!(
                "{} kernels given for {views} views",
                config.kernels.len()
            )));
        }

        let mut grams = Vec::with_capacity(views);
        let mut fast_views = Vec::with_capacity(views);
        for (v, x) in dataset.views.iter().enumerate() {
            let kernel = config.kernel_for(v);
            grams.push(gram(x, &kernel)?);
            fast_views.push((kernel.is_linear() && n > x.nrows()).then(|| x.clone()));
        }
        let state = SolverState::zeros(n, views, config.k, config.rho0);
        Ok(Self {
            config,
            grams,
            fast_views,
            state,
        })
    }

    pub fn config(&self) -> &SolverConfig {
        &self.config
    }

    pub fn grams(&self) -> &[DMatrix<f64>] {
        &self.grams
    }

    pub fn state(&self) -> &SolverState {
        &self.state
    }

    /// Runs one full ADMM iteration and returns its trace row.
    pub fn step(&mut self) -> Result<TraceRow> {
        let cfg = &self.config;
        let st = &mut self.state;
        let rho = st.rho;
        st.iter += 1;

        let aff = spectral::affinity_from(&st.c_star)?;
        st.f = spectral::update_f(&aff.laplacian, cfg.k)?.f;

        for v in 0..st.a.len() {
            st.a[v] = match cfg.consensus_mode {
                ConsensusMode::RobustL1 => {
                    prox::update_a(&st.c[v], &st.sigma[v], &st.c_star, rho, cfg.theta, cfg.lambda)?
                }
                ConsensusMode::Frobenius => prox::update_a_frobenius(
                    &st.c[v],
                    &st.sigma[v],
                    &st.c_star,
                    rho,
                    cfg.theta,
                    cfg.lambda,
                )?,
            };
        }

        for v in 0..st.c.len() {
            let k = &self.grams[v];
            st.c[v] = match &self.fast_views[v] {
                Some(x) => woodbury_solve(x, k, &st.a[v], &st.sigma[v], &st.delta[v], rho)?,
                None => update_c(k, &st.a[v], &st.sigma[v], &st.delta[v], rho)?,
            };
            if cfg!(debug_assertions) && st.iter % 10 == 0 {
                let rhs = c_rhs(k, &st.a[v], &st.sigma[v], &st.delta[v], rho);
                let residual = (c_system(k, rho) * &st.c[v] - &rhs).amax();
                debug_assert!(
                    residual <= 1e-8 * rhs.amax().max(1.0),
                    "C-update solve residual {residual} at iteration {}",
                    st.iter
                );
            }
            ensure_finite(&st.c[v], "C")
                .map_err(|_| Error::Numerical(format!("C diverged in view {v}")))?;
        }

        let q = spectral::pairwise_sq_dists(&st.f);
        let gamma = cfg.effective_gamma();
        st.c_star = match cfg.consensus_mode {
            ConsensusMode::RobustL1 => prox::update_c_star(&st.a, &q, cfg.lambda, gamma)?,
            ConsensusMode::Frobenius => {
                prox::update_c_star_frobenius(&st.a, &q, cfg.lambda, gamma)?
            }
        };

        update_multipliers(st, rho);

        let (residual_ca, residual_sum1) = st.residuals();
        let row = TraceRow {
            iter: st.iter,
            objective: objective(st, &self.grams, cfg)?,
            residual_ca,
            residual_sum1,
            rho,
        };
        st.trace.push(row);

        let next = rho * cfg.rho_mult;
        st.rho = cfg.rho_cap.map_or(next, |cap| next.min(cap).max(rho));
        Ok(row)
    }

    /// Iterates until `max_iters` or until both primal residuals drop below
    /// `tol`, then embeds the final consensus and labels it with k-means.
    pub fn run(mut self) -> Result<ClusteringResult> {
        let start = Instant::now();
        let mut converged = false;
        while self.state.iter < self.config.max_iters {
            let row = self.step()?;
            if row.residual_ca < self.config.tol && row.residual_sum1 < self.config.tol {
                converged = true;
                break;
            }
        }
        self.finish(converged, start)
    }

    fn finish(self, converged: bool, start: Instant) -> Result<ClusteringResult> {
        let aff = spectral::affinity_from(&self.state.c_star)?;
        let embedding = spectral::update_f(&aff.laplacian, self.config.k)?;
        let normalized = spectral::row_normalize(&embedding.f);
        let labels = spectral::kmeans_labels(&normalized, self.config.k, self.config.seed)?;
        let st = self.state;
        Ok(ClusteringResult {
            labels,
            embedding,
            consensus: st.c_star,
            view_c: st.c,
            view_a: st.a,
            trace: st.trace,
            iterations: st.iter,
            converged,
            metrics: None,
            elapsed_secs: start.elapsed().as_secs_f64(),
        })
    }
}

/// Fits the model to `dataset` and scores the labels when ground truth is
/// attached.
pub fn fit(dataset: &MultiViewDataset, config: &SolverConfig) -> Result<ClusteringResult> {
    let mut result = Solver::new(dataset, config.clone())?.run()?;
    if let Some(truth) = &dataset.labels {
        result.metrics = Some(metrics::evaluate(&result.labels, truth)?);
    }
    Ok(result)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random(rows: usize, cols: usize, rng: &mut ChaCha8Rng) -> DMatrix<f64> {
        DMatrix::from_fn(rows, cols, |_, _| rng.random_range(-1.0..1.0))
    }

    #[test]
    fn update_c_zero_inputs() {
        let n = 3;
        let z = DMatrix::zeros(n, n);
        let c = update_c(&z, &z, &z, &DVector::zeros(n), 1.0).unwrap();
        // Oracle: explicit inverse of I + 11ᵀ applied to 11ᵀ.
        let ones = DMatrix::from_element(n, n, 1.0);
        let sys = DMatrix::identity(n, n) + &ones;
        let expected = sys.clone().try_inverse().unwrap() * &ones;
        assert!((&c - expected).amax() < 1e-12);
        assert!((sys * c - ones).amax() < 1e-8);
    }

    #[test]
    fn update_c_recovers_stationary_a() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let n = 6;
        let x = random(4, n, &mut rng);
        let k = x.tr_mul(&x);
        let rho = 0.8;
        let a = random(n, n, &mut rng);
        let delta = DVector::from_fn(n, |_, _| rng.random_range(-1.0..1.0));
        // Choose Σ so that the right-hand side equals (𝒦 + ρI + ρ11ᵀ)A.
        let target = c_system(&k, rho) * &a;
        let zero_sigma = c_rhs(&k, &a, &DMatrix::zeros(n, n), &delta, rho);
        let sigma = zero_sigma - target;
        let c = update_c(&k, &a, &sigma, &delta, rho).unwrap();
        assert!((c - a).amax() < 1e-8);
    }

    #[test]
    fn update_c_residual_contract() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..10 {
            let n = 12;
            let x = random(5, n, &mut rng);
            let k = x.tr_mul(&x);
            let a = random(n, n, &mut rng);
            let sigma = random(n, n, &mut rng);
            let delta = DVector::from_fn(n, |_, _| rng.random_range(-1.0..1.0));
            let rho = rng.random_range(0.1..5.0);
            let c = update_c(&k, &a, &sigma, &delta, rho).unwrap();
            let r = c_system(&k, rho) * c - c_rhs(&k, &a, &sigma, &delta, rho);
            assert!(r.amax() < 1e-8);
        }
    }

    #[test]
    fn fast_path_matches_direct() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for (d, n, tol) in [(3, 30, 1e-8), (1, 5, 1e-10)] {
            let x = random(d, n, &mut rng);
            let a = random(n, n, &mut rng);
            let sigma = random(n, n, &mut rng);
            let delta = DVector::from_fn(n, |_, _| rng.random_range(-1.0..1.0));
            let direct = update_c(&x.tr_mul(&x), &a, &sigma, &delta, 0.7).unwrap();
            let fast = update_c_linear_fast(&x, &a, &sigma, &delta, 0.7).unwrap();
            assert!((direct - fast).amax() < tol);
        }
    }

    #[test]
    fn update_c_rejects_bad_input() {
        let z = DMatrix::zeros(3, 3);
        let d = DVector::zeros(3);
        assert!(update_c(&z, &z, &z, &d, 0.0).is_err());
        assert!(update_c(&z, &DMatrix::zeros(2, 2), &z, &d, 1.0).is_err());
        let mut k = z.clone();
        k[(0, 0)] = f64::NAN;
        assert!(update_c(&k, &z, &z, &d, 1.0).is_err());
    }

    #[test]
    fn multipliers() {
        let n = 3;
        let mut st = SolverState::zeros(n, 1, 1, 1.0);
        // Feasible: columns sum to one and C = A.
        let c = DMatrix::from_row_slice(3, 3, &[0.0, 0.5, 0.5, 0.5, 0.0, 0.5, 0.5, 0.5, 0.0]);
        st.c[0] = c.clone();
        st.a[0] = c.clone();
        update_multipliers(&mut st, 2.0);
        assert_eq!(st.delta[0], DVector::zeros(n));
        assert_eq!(st.sigma[0], DMatrix::zeros(n, n));

        let e = DMatrix::from_fn(n, n, |i, j| (i * 3 + j) as f64 * 0.1);
        st.c[0] = &c + &e;
        update_multipliers(&mut st, 2.0);
        assert!((&st.sigma[0] - &e * 2.0).amax() < 1e-15);
        let first = st.delta[0].clone();
        update_multipliers(&mut st, 2.0);
        assert!((&st.delta[0] - &first * 2.0).amax() < 1e-12);
    }

    #[test]
    fn objective_examples() {
        let (n, v) = (5, 3);
        let st = SolverState::zeros(n, v, 2, 1.0);
        let grams = vec![DMatrix::identity(n, n); v];
        let cfg = SolverConfig::new(2);
        assert_eq!(objective(&st, &grams, &cfg).unwrap(), (v * n) as f64);

        // γ = 0 makes F irrelevant.
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut st = SolverState::zeros(n, v, 2, 1.0);
        st.c_star = random(n, n, &mut rng);
        st.c_star.fill_diagonal(0.0);
        let cfg0 = SolverConfig {
            gamma: 0.0,
            ..SolverConfig::new(2)
        };
        let before = objective(&st, &grams, &cfg0).unwrap();
        st.f = random(n, 2, &mut rng);
        assert_eq!(objective(&st, &grams, &cfg0).unwrap(), before);
    }

    #[test]
    fn objective_block_fixture_has_zero_coupling() {
        // Two blocks {0,1,2} and {3,4}; C* supported inside blocks, F constant per block.
        let n = 5;
        let mut cs = DMatrix::zeros(n, n);
        for &(i, j) in &[(0, 1), (1, 2), (2, 0), (3, 4), (4, 3)] {
            cs[(i, j)] = 0.5;
        }
        let mut st = SolverState::zeros(n, 1, 2, 1.0);
        st.c[0] = cs.clone();
        st.c_star = cs;
        let mut f = DMatrix::zeros(n, 2);
        for i in 0..3 {
            f[(i, 0)] = 1.0 / 3f64.sqrt();
        }
        for i in 3..5 {
            f[(i, 1)] = 1.0 / 2f64.sqrt();
        }
        st.f = f;
        let grams = vec![DMatrix::identity(n, n)];
        let with = objective(&st, &grams, &SolverConfig::new(2)).unwrap();
        let without = objective(
            &st,
            &grams,
            &SolverConfig {
                gamma: 0.0,
                ..SolverConfig::new(2)
            },
        )
        .unwrap();
        assert!((with - without).abs() < 1e-10);
    }

    #[test]
    fn config_validation() {
        assert!(SolverConfig::new(3).validate().is_ok());
        for cfg in [
            SolverConfig {
                lambda: -1.0,
                ..SolverConfig::new(3)
            },
            SolverConfig {
                rho0: 0.0,
                ..SolverConfig::new(3)
            },
            SolverConfig {
                rho_mult: 0.5,
                ..SolverConfig::new(3)
            },
            SolverConfig {
                max_iters: 0,
                ..SolverConfig::new(3)
            },
            SolverConfig::new(0),
        ] {
            assert!(cfg.validate().is_err(), "{cfg:?}");
        }
    }
}
