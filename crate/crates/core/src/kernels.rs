//! Gram matrices `𝒦 = Φ(X)ᵀΦ(X)` for the supported kernel families.
//!
//! The solver only ever touches `𝒦`, never the feature map itself, so adding a
//! kernel family means adding a variant here and an arm in [`gram`].

use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{ensure_finite, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "lowercase")]
pub enum KernelSpec {
    /// `𝒦(i,j) = ⟨xᵢ, xⱼ⟩`
    Linear,
    /// `𝒦(i,j) = (⟨xᵢ, xⱼ⟩ + c)^degree`
    Polynomial { c: f64, degree: u32 },
}

impl Default for KernelSpec {
    fn default() -> Self {
        KernelSpec::Linear
    }
}

impl KernelSpec {
    pub fn polynomial(c: f64, degree: u32) -> Result<Self> {
        let spec = KernelSpec::Polynomial { c, degree };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            KernelSpec::Linear => Ok(()),
            KernelSpec::Polynomial { c, degree } => {
                if !c.is_finite() || c < 0.0 {
                    return Err(Error::InvalidParameter(format!(
                        "polynomial kernel offset must be finite and >= 0, got {c}"
                    )));
                }
                if degree < 1 {
                    return Err(Error::InvalidParameter(
                        "polynomial kernel degree must be >= 1".into(),
                    ));
                }
                Ok(())
            }
        }
    }

    pub fn is_linear(&self) -> bool {
        matches!(self, KernelSpec::Linear)
    }
}

impl fmt::Display for KernelSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            KernelSpec::Linear => write!(f, "linear"),
            KernelSpec::Polynomial { c, degree } => write!(f, "poly:{c}:{degree}"),
        }
    }
}

/// Parses `linear` or `poly:<c>:<d>`.
impl FromStr for KernelSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.eq_ignore_ascii_case("linear") {
            return Ok(KernelSpec::Linear);
        }
        let mut parts = s.split(':');
        match (parts.next(), parts.next(), parts.next(), parts.next()) {
            (Some(p), Some(c), Some(d), None) if p == "poly" || p == "polynomial" => {
                let c: f64 = c
                    .parse()
                    .map_err(|_| Error::InvalidParameter(format!("bad kernel offset {c:?}")))?;
                let d: u32 = d
                    .parse()
                    .map_err(|_| Error::InvalidParameter(format!("bad kernel degree {d:?}")))?;
                KernelSpec::polynomial(c, d)
            }
            _ => Err(Error::InvalidParameter(format!(
                "unknown kernel {s:?}, expected linear or poly:<c>:<d>"
            ))),
        }
    }
}

/// Gram matrix of the columns of `x` (features × samples).
///
/// The result is symmetrized as `(K + Kᵀ)/2` so downstream code can rely on
/// exact symmetry.
pub fn gram(x: &DMatrix<f64>, spec: &KernelSpec) -> Result<DMatrix<f64>> {
    spec.validate()?;
    if x.nrows() == 0 || x.ncols() == 0 {
        return Err(Error::Empty("view matrix"));
    }
    if x.ncols() < 2 {
        return Err(Error::ShapeMismatch(format!(
            "need at least 2 samples, got {}",
            x.ncols()
        )));
    }
    ensure_finite(x, "view matrix")?;

    let mut k = x.tr_mul(x);
    if let KernelSpec::Polynomial { c, degree } = *spec {
        let d = degree as i32;
        k.apply(|v| *v = (*v + c).powi(d));
    }
    ensure_finite(&k, "gram matrix")?;

    let n = k.nrows();
    for i in 0..n {
        for j in (i + 1)..n {
            let s = 0.5 * (k[(i, j)] + k[(j, i)]);
            k[(i, j)] = s;
            k[(j, i)] = s;
        }
    }
    Ok(k)
}
