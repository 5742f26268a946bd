//! Closed-form elementwise minimizers for the two nonsmooth sub-problems of
//! the ADMM loop, plus their matrix wrappers.
//!
//! * the `A⁽ᵛ⁾` step: `min_j β|j| + α|j − c*| + ½(j − y)²`
//! * the `C*` step: `min_c γq|c| + Σᵥ 2λ|a⁽ᵛ⁾ − c|`
//!
//! Both are solved independently for every matrix entry. The Frobenius
//! consensus variants (squared instead of absolute consensus penalty) live
//! here as well since they share the same elementwise structure.

use nalgebra::DMatrix;

use crate::error::{ensure_finite, Error, Result};

/// `sgn(y)·max(|y| − t, 0)`.
#[inline]
pub fn soft_threshold(y: f64, t: f64) -> f64 {
    debug_assert!(t >= 0.0);
    if y > t {
        y - t
    } else if y < -t {
        y + t
    } else {
        0.0
    }
}

/// One entry of the `A⁽ᵛ⁾` sub-problem: `β|j| + α|j − c*| + ½(j − y)²`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DoubleL1Params {
    pub y: f64,
    /// Weight of the consensus anchor term, `λ/ρ`.
    pub alpha: f64,
    /// Weight of the sparsity term, `θ/ρ`.
    pub beta: f64,
    pub c_star: f64,
}

impl DoubleL1Params {
    pub fn new(y: f64, alpha: f64, beta: f64, c_star: f64) -> Result<Self> {
        if !(y.is_finite() && alpha.is_finite() && beta.is_finite() && c_star.is_finite()) {
            return Err(Error::NonFinite("double-l1 parameters"));
        }
        if alpha < 0.0 || beta < 0.0 {
            return Err(Error::InvalidParameter(format!(
                "alpha and beta must be >= 0 (alpha={alpha}, beta={beta})"
            )));
        }
        Ok(Self {
            y,
            alpha,
            beta,
            c_star,
        })
    }

    pub fn objective(&self, j: f64) -> f64 {
        let r = j - self.y;
        self.beta * j.abs() + self.alpha * (j - self.c_star).abs() + 0.5 * r * r
    }
}

/// Unique minimizer of `β|j| + α|j − c*| + ½(j − y)²`.
///
/// The objective is strictly convex and piecewise quadratic with kinks at `0`
/// and `c*`. Outside `[min(0,c*), max(0,c*)]` both absolute values carry the
/// same sign and the minimizer is `y ∓ (α + β)`; inside, the slope of the
/// linear part is `±(β − α)` and the minimizer is the clamped stationary
/// point. The clamp covers the kink solutions `j = 0` and `j = c*`.
pub fn prox_double_l1(p: &DoubleL1Params) -> f64 {
    let DoubleL1Params {
        y,
        alpha,
        beta,
        c_star,
    } = *p;
    if c_star == 0.0 {
        return soft_threshold(y, alpha + beta);
    }
    let (lo, hi) = if c_star > 0.0 {
        (0.0, c_star)
    } else {
        (c_star, 0.0)
    };
    let t = alpha + beta;
    if y - t > hi {
        return y - t;
    }
    if y + t < lo {
        return y + t;
    }
    // Inside (lo, hi): d/dj |j| = sgn(c*) and d/dj |j - c*| = -sgn(c*).
    let slope = c_star.signum() * (beta - alpha);
    (y - slope).clamp(lo, hi)
}

/// One entry of the `C*` sub-problem: `γq|c| + Σᵥ 2λ|a⁽ᵛ⁾ − c|`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConsensusParams {
    pub a_values: Vec<f64>,
    /// Squared embedding distance `‖fᵢ − fⱼ‖²` for this entry.
    pub q: f64,
    pub lambda: f64,
    pub gamma: f64,
}

impl ConsensusParams {
    pub fn new(a_values: Vec<f64>, q: f64, lambda: f64, gamma: f64) -> Result<Self> {
        if a_values.is_empty() {
            return Err(Error::Empty("consensus a-values"));
        }
        if !(a_values.iter().all(|a| a.is_finite())
            && q.is_finite()
            && lambda.is_finite()
            && gamma.is_finite())
        {
            return Err(Error::NonFinite("consensus parameters"));
        }
        if q < 0.0 || lambda <= 0.0 || gamma < 0.0 {
            return Err(Error::InvalidParameter(format!(
                "consensus requires q >= 0, lambda > 0, gamma >= 0 (q={q}, lambda={lambda}, gamma={gamma})"
            )));
        }
        Ok(Self {
            a_values,
            q,
            lambda,
            gamma,
        })
    }

    pub fn objective(&self, c: f64) -> f64 {
        consensus_objective(&self.a_values, self.q, self.lambda, self.gamma, c)
    }
}

#[inline]
fn consensus_objective(a: &[f64], q: f64, lambda: f64, gamma: f64, c: f64) -> f64 {
    let fused: f64 = a.iter().map(|&ai| (ai - c).abs()).sum();
    gamma * q * c.abs() + 2.0 * lambda * fused
}

/// Minimizer of the consensus objective by enumeration.
///
/// The objective is piecewise linear in `c` with kinks only at `0` and the
/// `a⁽ᵛ⁾`, so one of those points is a global minimizer. Ties go to `0`, then
/// to the candidate with the smallest magnitude.
pub fn consensus_scalar(p: &ConsensusParams) -> f64 {
    let mut scratch = p.a_values.clone();
    consensus_enumerate(&mut scratch, p.q, p.lambda, p.gamma)
}

/// `a` is reordered in place (by magnitude) and used as the candidate list.
fn consensus_enumerate(a: &mut [f64], q: f64, lambda: f64, gamma: f64) -> f64 {
    a.sort_by(|x, y| x.abs().total_cmp(&y.abs()).then(x.total_cmp(y)));
    let mut best = 0.0;
    let mut best_obj = consensus_objective(a, q, lambda, gamma, 0.0);
    for i in 0..a.len() {
        let c = a[i];
        let obj = consensus_objective(a, q, lambda, gamma, c);
        if obj < best_obj {
            best = c;
            best_obj = obj;
        }
    }
    best
}

/// Sorted-index closed form for the consensus minimizer.
///
/// With `a₁ ≤ … ≤ aᵥ`, a positive solution sits at index
/// `⌈(2vλ − γq)/(4λ)⌉`, a negative one at `⌈(2vλ + γq)/(4λ)⌉`; otherwise `0`.
/// Agrees with [`consensus_scalar`] in objective value; the enumeration is
/// the reference.
pub fn consensus_scalar_closed_form(p: &ConsensusParams) -> f64 {
    let mut sorted = p.a_values.clone();
    sorted.sort_by(f64::total_cmp);
    consensus_sorted_index(&sorted, p.q, p.lambda, p.gamma)
}

fn consensus_sorted_index(sorted: &[f64], q: f64, lambda: f64, gamma: f64) -> f64 {
    let v = sorted.len();
    let two_v_lambda = 2.0 * v as f64 * lambda;
    let gq = gamma * q;
    if two_v_lambda > gq {
        let lower = ((two_v_lambda - gq) / (4.0 * lambda)).ceil() as usize;
        if (1..=v).contains(&lower) && sorted[lower - 1] > 0.0 {
            return sorted[lower - 1];
        }
        let upper = ((two_v_lambda + gq) / (4.0 * lambda)).ceil() as usize;
        if (1..=v).contains(&upper) && sorted[upper - 1] < 0.0 {
            return sorted[upper - 1];
        }
    }
    0.0
}

/// Minimizer of `β|j| + α(j − c*)² + ½(j − y)²`, the `A⁽ᵛ⁾` entry problem
/// when the consensus penalty is squared.
#[inline]
pub fn prox_l1_quadratic_anchor(y: f64, alpha: f64, beta: f64, c_star: f64) -> f64 {
    let scale = 2.0 * alpha + 1.0;
    soft_threshold((2.0 * alpha * c_star + y) / scale, beta / scale)
}

fn check_square(m: &DMatrix<f64>, n: usize, what: &'static str) -> Result<()> {
    if m.nrows() != n || m.ncols() != n {
        return Err(Error::ShapeMismatch(format!(
            "{what} is {}x{}, expected {n}x{n}",
            m.nrows(),
            m.ncols()
        )));
    }
    Ok(())
}

fn check_rho(rho: f64, theta: f64, lambda: f64) -> Result<()> {
    if !(rho.is_finite() && rho > 0.0) {
        return Err(Error::InvalidParameter(format!("rho must be > 0, got {rho}")));
    }
    if !(theta.is_finite() && theta >= 0.0 && lambda.is_finite() && lambda >= 0.0) {
        return Err(Error::InvalidParameter(format!(
            "theta and lambda must be >= 0 (theta={theta}, lambda={lambda})"
        )));
    }
    Ok(())
}

/// `A = J − diag(J)` where `J` is the entrywise [`prox_double_l1`] of
/// `Y = C + Σ/ρ` with `α = λ/ρ`, `β = θ/ρ` and anchor `C*`.
pub fn update_a(
    c: &DMatrix<f64>,
    sigma: &DMatrix<f64>,
    c_star: &DMatrix<f64>,
    rho: f64,
    theta: f64,
    lambda: f64,
) -> Result<DMatrix<f64>> {
    update_a_with(c, sigma, c_star, rho, theta, lambda, |y, alpha, beta, cs| {
        prox_double_l1(&DoubleL1Params {
            y,
            alpha,
            beta,
            c_star: cs,
        })
    })
}

/// Same as [`update_a`] with the squared consensus penalty `λ‖A − C*‖²_F`.
pub fn update_a_frobenius(
    c: &DMatrix<f64>,
    sigma: &DMatrix<f64>,
    c_star: &DMatrix<f64>,
    rho: f64,
    theta: f64,
    lambda: f64,
) -> Result<DMatrix<f64>> {
    update_a_with(c, sigma, c_star, rho, theta, lambda, prox_l1_quadratic_anchor)
}

fn update_a_with(
    c: &DMatrix<f64>,
    sigma: &DMatrix<f64>,
    c_star: &DMatrix<f64>,
    rho: f64,
    theta: f64,
    lambda: f64,
    entry: impl Fn(f64, f64, f64, f64) -> f64,
) -> Result<DMatrix<f64>> {
    check_rho(rho, theta, lambda)?;
    let n = c.nrows();
    check_square(c, n, "C")?;
    check_square(sigma, n, "Sigma")?;
    check_square(c_star, n, "C*")?;
    ensure_finite(c, "C")?;
    ensure_finite(sigma, "Sigma")?;
    ensure_finite(c_star, "C*")?;

    let alpha = lambda / rho;
    let beta = theta / rho;
    let mut a = DMatrix::from_fn(n, n, |i, j| {
        if i == j {
            0.0
        } else {
            entry(c[(i, j)] + sigma[(i, j)] / rho, alpha, beta, c_star[(i, j)])
        }
    });
    a.fill_diagonal(0.0);
    Ok(a)
}

fn check_views(a_views: &[DMatrix<f64>], q: &DMatrix<f64>) -> Result<usize> {
    if a_views.is_empty() {
        return Err(Error::Empty("view list"));
    }
    let n = q.nrows();
    check_square(q, n, "Q")?;
    for a in a_views {
        check_square(a, n, "A")?;
        ensure_finite(a, "A")?;
    }
    ensure_finite(q, "Q")?;
    Ok(n)
}

/// Entrywise consensus update.
///
/// For entry `(i,j)` this minimizes `γ·Q(i,j)·|c| + Σᵥ 2λ|A⁽ᵛ⁾(i,j) − c|`,
/// i.e. [`consensus_scalar`] with `q = Q(i,j)` and the configured `γ`, `λ`.
/// The diagonal is forced to zero.
pub fn update_c_star(
    a_views: &[DMatrix<f64>],
    q: &DMatrix<f64>,
    lambda: f64,
    gamma: f64,
) -> Result<DMatrix<f64>> {
    let n = check_views(a_views, q)?;
    if !(lambda >= 0.0 && gamma >= 0.0) {
        return Err(Error::InvalidParameter(format!(
            "consensus requires lambda >= 0 and gamma >= 0 (lambda={lambda}, gamma={gamma})"
        )));
    }
    let mut scratch = vec![0.0; a_views.len()];
    let mut out = DMatrix::zeros(n, n);
    for j in 0..n {
        for i in 0..n {
            if i == j {
                continue;
            }
            for (s, a) in scratch.iter_mut().zip(a_views) {
                *s = a[(i, j)];
            }
            let qij = q[(i, j)].max(0.0);
            let c = consensus_enumerate(&mut scratch, qij, lambda, gamma);
            #[cfg(debug_assertions)]
            {
                scratch.sort_by(f64::total_cmp);
                let fast = consensus_sorted_index(&scratch, qij, lambda, gamma);
                let f_enum = consensus_objective(&scratch, qij, lambda, gamma, c);
                let f_fast = consensus_objective(&scratch, qij, lambda, gamma, fast);
                debug_assert!(
                    (f_fast - f_enum).abs() <= 1e-9 * (1.0 + f_enum.abs()),
                    "closed-form consensus disagrees: {f_fast} vs {f_enum}"
                );
            }
            out[(i, j)] = c;
        }
    }
    Ok(out)
}

/// Consensus update for the squared penalty `λΣᵥ‖A⁽ᵛ⁾ − C*‖²_F`.
///
/// Per entry this minimizes `γq|c| + 2λΣᵥ(a⁽ᵛ⁾ − c)²`, whose solution is the
/// view mean shrunk by `γq / (4vλ)`.
pub fn update_c_star_frobenius(
    a_views: &[DMatrix<f64>],
    q: &DMatrix<f64>,
    lambda: f64,
    gamma: f64,
) -> Result<DMatrix<f64>> {
    let n = check_views(a_views, q)?;
    if !(lambda >= 0.0 && gamma >= 0.0) {
        return Err(Error::InvalidParameter(format!(
            "consensus requires lambda >= 0 and gamma >= 0 (lambda={lambda}, gamma={gamma})"
        )));
    }
    let v = a_views.len() as f64;
    if lambda == 0.0 {
        return Ok(DMatrix::zeros(n, n));
    }
    let mut out = DMatrix::from_fn(n, n, |i, j| {
        if i == j {
            return 0.0;
        }
        let mean = a_views.iter().map(|a| a[(i, j)]).sum::<f64>() / v;
        soft_threshold(mean, gamma * q[(i, j)].max(0.0) / (4.0 * v * lambda))
    });
    out.fill_diagonal(0.0);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Literal seven-case transcription of the published casework, used to
    /// check that [`prox_double_l1`] agrees whenever one of the six explicit
    /// cases fires.
    fn casework(y: f64, alpha: f64, beta: f64, c: f64) -> Option<f64> {
        if c > 0.0 {
            if y >= alpha + beta + c {
                return Some(y - alpha - beta);
            }
            if 0.0 < y + alpha - beta && y + alpha - beta < c {
                return Some(y + alpha - beta);
            }
            if 0.0 >= y + alpha + beta {
                return Some(y + alpha + beta);
            }
        } else if c < 0.0 {
            if y >= alpha + beta {
                return Some(y - alpha - beta);
            }
            if 0.0 > y - alpha + beta && y - alpha + beta > c {
                return Some(y - alpha + beta);
            }
            if c >= y + alpha + beta {
                return Some(y + alpha + beta);
            }
        }
        None
    }

    #[test]
    fn soft_threshold_examples() {
        assert_eq!(soft_threshold(2.0, 0.5), 1.5);
        assert_eq!(soft_threshold(-0.3, 0.5), 0.0);
        assert_eq!(soft_threshold(0.0, 1.0), 0.0);
        assert_eq!(soft_threshold(-2.0, 0.5), -1.5);
    }

    #[test]
    fn double_l1_examples() {
        let p = DoubleL1Params::new(3.0, 0.5, 0.5, 1.0).unwrap();
        assert_eq!(prox_double_l1(&p), 2.0);
        let p = DoubleL1Params::new(-2.0, 0.5, 0.5, 1.0).unwrap();
        assert_eq!(prox_double_l1(&p), -1.0);
        let p = DoubleL1Params::new(0.6, 0.5, 0.5, 0.0).unwrap();
        assert_eq!(prox_double_l1(&p), 0.0);
    }

    #[test]
    fn double_l1_pins_to_anchor_kink() {
        // y = c* with a dominant anchor weight: the solution is the kink c*,
        // which none of the stationary-point formulas produce.
        let p = DoubleL1Params::new(1.0, 1.0, 0.0, 1.0).unwrap();
        assert_eq!(prox_double_l1(&p), 1.0);
        assert!(p.objective(1.0) < p.objective(0.0));
    }

    #[test]
    fn double_l1_matches_casework_when_a_case_fires() {
        let mut hits = 0;
        for iy in -40..=40 {
            for ic in -8..=8 {
                for (alpha, beta) in [(0.5, 0.5), (0.2, 0.7), (1.3, 0.1), (0.0, 0.4)] {
                    let y = iy as f64 * 0.25;
                    let c = ic as f64 * 0.5;
                    if let Some(expected) = casework(y, alpha, beta, c) {
                        hits += 1;
                        let got = prox_double_l1(&DoubleL1Params::new(y, alpha, beta, c).unwrap());
                        assert!(
                            (got - expected).abs() < 1e-12,
                            "y={y} a={alpha} b={beta} c={c}: {got} vs {expected}"
                        );
                    }
                }
            }
        }
        assert!(hits > 1000);
    }

    #[test]
    fn double_l1_rejects_bad_params() {
        assert!(DoubleL1Params::new(f64::NAN, 0.1, 0.1, 0.0).is_err());
        assert!(DoubleL1Params::new(1.0, -0.1, 0.1, 0.0).is_err());
    }

    #[test]
    fn consensus_examples() {
        let p = ConsensusParams::new(vec![1.0, 3.0], 1.0, 1.0, 1.0).unwrap();
        assert_eq!(p.objective(0.0), 8.0);
        assert_eq!(p.objective(1.0), 5.0);
        assert_eq!(p.objective(3.0), 7.0);
        assert_eq!(consensus_scalar(&p), 1.0);
        assert_eq!(consensus_scalar_closed_form(&p), 1.0);

        let p = ConsensusParams::new(vec![5.0], 100.0, 0.01, 1.0).unwrap();
        assert_eq!(consensus_scalar(&p), 0.0);
        assert_eq!(consensus_scalar_closed_form(&p), 0.0);

        let p = ConsensusParams::new(vec![-2.0; 3], 0.0, 1.0, 1.0).unwrap();
        assert_eq!(consensus_scalar(&p), -2.0);
        assert_eq!(consensus_scalar_closed_form(&p), -2.0);
    }

    #[test]
    fn consensus_ties_prefer_zero_then_small_magnitude() {
        // Objective is flat on [1, 3]; the candidate nearest zero wins.
        let p = ConsensusParams::new(vec![3.0, 1.0], 0.0, 1.0, 1.0).unwrap();
        assert_eq!(consensus_scalar(&p), 1.0);
        // Flat on [-1, 1] including 0.
        let p = ConsensusParams::new(vec![-1.0, 1.0], 0.0, 1.0, 0.0).unwrap();
        assert_eq!(consensus_scalar(&p), 0.0);
    }

    #[test]
    fn consensus_rejects_bad_params() {
        assert!(ConsensusParams::new(vec![], 1.0, 1.0, 1.0).is_err());
        assert!(ConsensusParams::new(vec![1.0], -1.0, 1.0, 1.0).is_err());
        assert!(ConsensusParams::new(vec![1.0], 1.0, 0.0, 1.0).is_err());
    }

    #[test]
    fn quadratic_anchor_against_grid() {
        for &(y, alpha, beta, c) in &[
            (1.0, 0.5, 0.1, 2.0),
            (-0.3, 2.0, 0.5, 0.4),
            (0.05, 0.0, 0.2, 1.0),
            (3.0, 1.0, 1.0, -1.0),
        ] {
            let f = |j: f64| beta * j.abs() + alpha * (j - c).powi(2) + 0.5 * (j - y).powi(2);
            let got = prox_l1_quadratic_anchor(y, alpha, beta, c);
            let grid_min = (-100_000..=100_000)
                .map(|i| f(i as f64 * 1e-4))
                .fold(f64::INFINITY, f64::min);
            assert!(f(got) <= grid_min + 1e-9, "{y} {alpha} {beta} {c}");
        }
    }

    #[test]
    fn update_a_examples() {
        let z = DMatrix::zeros(3, 3);
        assert_eq!(update_a(&z, &z, &z, 1.0, 0.5, 0.5).unwrap(), z);

        let c = DMatrix::from_row_slice(2, 2, &[0.0, 3.0, 3.0, 0.0]);
        let cs = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0]);
        let a = update_a(&c, &DMatrix::zeros(2, 2), &cs, 1.0, 0.5, 0.5).unwrap();
        assert_eq!(a, DMatrix::from_row_slice(2, 2, &[0.0, 2.0, 2.0, 0.0]));

        let full = DMatrix::from_element(4, 4, 7.0);
        let a = update_a(&full, &full, &DMatrix::zeros(4, 4), 0.3, 0.1, 0.1).unwrap();
        assert!((0..4).all(|i| a[(i, i)] == 0.0));
        let a = update_a_frobenius(&full, &full, &full, 0.3, 0.1, 0.1).unwrap();
        assert!((0..4).all(|i| a[(i, i)] == 0.0));
    }

    #[test]
    fn update_a_rejects_bad_input() {
        let z = DMatrix::zeros(2, 2);
        assert!(update_a(&z, &z, &z, 0.0, 0.1, 0.1).is_err());
        assert!(update_a(&z, &DMatrix::zeros(3, 3), &z, 1.0, 0.1, 0.1).is_err());
        let mut bad = z.clone();
        bad[(0, 1)] = f64::INFINITY;
        assert!(update_a(&bad, &z, &z, 1.0, 0.1, 0.1).is_err());
    }

    #[test]
    fn update_c_star_examples() {
        let z = DMatrix::zeros(3, 3);
        assert_eq!(update_c_star(&[z.clone(), z.clone()], &z, 1.0, 1.0).unwrap(), z);

        let a = DMatrix::from_row_slice(3, 3, &[0.0, 0.4, -0.2, 1.5, 0.0, 0.3, -0.7, 2.0, 0.0]);
        let q = DMatrix::from_element(3, 3, 5.0);
        assert_eq!(update_c_star(&[a.clone()], &q, 1.0, 0.0).unwrap(), a);

        let a1 = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 0.0, 0.0]);
        let a2 = DMatrix::from_row_slice(2, 2, &[0.0, 3.0, 0.0, 0.0]);
        let q = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0]);
        let cs = update_c_star(&[a1, a2], &q, 1.0, 1.0).unwrap();
        assert_eq!(cs[(0, 1)], 1.0);
        assert_eq!(cs[(1, 0)], 0.0);
        assert!(update_c_star(&[], &q, 1.0, 1.0).is_err());
        assert!(update_c_star(&[DMatrix::zeros(3, 3)], &q, 1.0, 1.0).is_err());
    }

    #[test]
    fn frobenius_consensus_against_grid() {
        let a1 = DMatrix::from_row_slice(2, 2, &[0.0, 0.8, -0.3, 0.0]);
        let a2 = DMatrix::from_row_slice(2, 2, &[0.0, 0.1, 0.9, 0.0]);
        let a3 = DMatrix::from_row_slice(2, 2, &[0.0, -0.2, 0.2, 0.0]);
        let q = DMatrix::from_row_slice(2, 2, &[0.0, 0.7, 0.7, 0.0]);
        let (lambda, gamma) = (0.4, 2.0);
        let views = [a1, a2, a3];
        let cs = update_c_star_frobenius(&views, &q, lambda, gamma).unwrap();
        for (i, j) in [(0, 1), (1, 0)] {
            let f = |c: f64| {
                gamma * q[(i, j)] * c.abs()
                    + 2.0 * lambda * views.iter().map(|a| (a[(i, j)] - c).powi(2)).sum::<f64>()
            };
            let grid_min = (-30_000..=30_000)
                .map(|t| f(t as f64 * 1e-4))
                .fold(f64::INFINITY, f64::min);
            assert!(f(cs[(i, j)]) <= grid_min + 1e-9);
        }
    }
}
