//! Clustering accuracy (optimal one-to-one label matching) and normalized
//! mutual information.
//!
//! NMI is normalized by the geometric mean of the two entropies,
//! `I(P;T) / sqrt(H(P)·H(T))`, with natural logarithms.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const NMI_NORMALIZATION: &str = "geometric-mean";

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Scores {
    pub acc: f64,
    pub nmi: f64,
}

pub fn evaluate(pred: &[usize], truth: &[usize]) -> Result<Scores> {
    Ok(Scores {
        acc: accuracy(pred, truth)?,
        nmi: nmi(pred, truth)?,
    })
}

fn check(pred: &[usize], truth: &[usize]) -> Result<()> {
    if pred.is_empty() || truth.is_empty() {
        return Err(Error::Empty("label vector"));
    }
    if pred.len() != truth.len() {
        return Err(Error::ShapeMismatch(format!(
            "label lengths differ: {} vs {}",
            pred.len(),
            truth.len()
        )));
    }
    Ok(())
}

/// Square contingency table `counts[p][t]`, zero-padded to the larger label
/// range.
pub fn contingency(pred: &[usize], truth: &[usize]) -> Vec<Vec<usize>> {
    let k = pred
        .iter()
        .chain(truth)
        .copied()
        .max()
        .map_or(0, |m| m + 1);
    let mut table = vec![vec![0usize; k]; k];
    for (&p, &t) in pred.iter().zip(truth) {
        table[p][t] += 1;
    }
    table
}

/// Fraction of samples correctly labelled under the best one-to-one mapping
/// from predicted to true labels.
pub fn accuracy(pred: &[usize], truth: &[usize]) -> Result<f64> {
    check(pred, truth)?;
    let table = contingency(pred, truth);
    let weights: Vec<Vec<i64>> = table
        .iter()
        .map(|row| row.iter().map(|&c| c as i64).collect())
        .collect();
    let assignment = max_weight_assignment(&weights);
    let matched: usize = assignment
        .iter()
        .enumerate()
        .map(|(p, &t)| table[p][t])
        .sum();
    Ok(matched as f64 / pred.len() as f64)
}

/// Hungarian method on a square weight matrix; returns `col[row]` maximizing
/// the total weight. O(k³).
pub fn max_weight_assignment(weights: &[Vec<i64>]) -> Vec<usize> {
    let n = weights.len();
    if n == 0 {
        return Vec::new();
    }
    let max_w = weights.iter().flatten().copied().max().unwrap_or(0);
    // Minimize cost = max_w - weight; 1-based potentials with a sentinel column 0.
    let cost = |i: usize, j: usize| max_w - weights[i - 1][j - 1];
    let mut u = vec![0i64; n + 1];
    let mut v = vec![0i64; n + 1];
    let mut p = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];
    for i in 1..=n {
        p[0] = i;
        let mut j0 = 0;
        let mut minv = vec![i64::MAX; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = p[j0];
            let mut delta = i64::MAX;
            let mut j1 = 0;
            for j in 1..=n {
                if !used[j] {
                    let cur = cost(i0, j) - u[i0] - v[j];
                    if cur < minv[j] {
                        minv[j] = cur;
                        way[j] = j0;
                    }
                    if minv[j] < delta {
                        delta = minv[j];
                        j1 = j;
                    }
                }
            }
            for j in 0..=n {
                if used[j] {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if p[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    let mut col_of_row = vec![0usize; n];
    for j in 1..=n {
        col_of_row[p[j] - 1] = j - 1;
    }
    col_of_row
}

fn entropy(counts: impl Iterator<Item = usize>, n: f64) -> f64 {
    counts
        .filter(|&c| c > 0)
        .map(|c| {
            let p = c as f64 / n;
            -p * p.ln()
        })
        .sum()
}

/// Normalized mutual information, geometric-mean normalization.
///
/// Returns 1 when both partitions are identical up to relabelling (including
/// the case of two single-cluster partitions) and 0 when exactly one side has
/// zero entropy.
pub fn nmi(pred: &[usize], truth: &[usize]) -> Result<f64> {
    check(pred, truth)?;
    let n = pred.len() as f64;
    let table = contingency(pred, truth);
    let k = table.len();
    let row: Vec<usize> = table.iter().map(|r| r.iter().sum()).collect();
    let col: Vec<usize> = (0..k).map(|t| table.iter().map(|r| r[t]).sum()).collect();

    let h_pred = entropy(row.iter().copied(), n);
    let h_truth = entropy(col.iter().copied(), n);
    if h_pred == 0.0 || h_truth == 0.0 {
        return Ok(if h_pred == 0.0 && h_truth == 0.0 {
            1.0
        } else {
            0.0
        });
    }

    let mut mi = 0.0;
    for p in 0..k {
        for t in 0..k {
            let c = table[p][t];
            if c > 0 {
                let c = c as f64;
                mi += c / n * (c * n / (row[p] as f64 * col[t] as f64)).ln();
            }
        }
    }
    Ok((mi / (h_pred * h_truth).sqrt()).clamp(0.0, 1.0))
}
