//! Curve dissimilarity and squared-error measures.

use crate::{Error, Result};

/// Train / validation / test curves of a common length.
#[derive(Debug, Clone, PartialEq)]
pub struct CurveTriple {
    g1: Vec<f64>,
    g2: Vec<f64>,
    g3: Vec<f64>,
}

impl CurveTriple {
    pub fn new(g1: Vec<f64>, g2: Vec<f64>, g3: Vec<f64>) -> Result<Self> {
        if g1.is_empty() {
            return Err(Error::EmptyData);
        }
        for g in [&g2, &g3] {
            if g.len() != g1.len() {
                return Err(Error::DimensionMismatch { expected: g1.len(), found: g.len() });
            }
        }
        if g1.iter().chain(&g2).chain(&g3).any(|v| !v.is_finite()) {
            return Err(Error::Domain("curve values must be finite".into()));
        }
        Ok(Self { g1, g2, g3 })
    }

    pub fn len(&self) -> usize {
        self.g1.len()
    }

    pub fn is_empty(&self) -> bool {
        self.g1.is_empty()
    }

    pub fn curves(&self) -> (&[f64], &[f64], &[f64]) {
        (&self.g1, &self.g2, &self.g3)
    }
}

/// `(1/100) Σ_i (|g1−g2| + |g1−g3| + |g2−g3|)`, each unordered pair once.
///
/// Zero exactly when the three curves coincide pointwise, and invariant
/// under any reordering of the curves.
pub fn dissimilarity(c: &CurveTriple) -> f64 {
    let sum: f64 = c
        .g1
        .iter()
        .zip(&c.g2)
        .zip(&c.g3)
        .map(|((a, b), d)| pair_sum(*a, *b, *d))
        .sum();
    sum / 100.0
}

// Sort first so the result does not depend on argument order, bit for bit.
fn pair_sum(a: f64, b: f64, c: f64) -> f64 {
    let mut v = [a, b, c];
    v.sort_by(f64::total_cmp);
    (v[1] - v[0]) + (v[2] - v[0]) + (v[2] - v[1])
}

fn check_pair(h: &[f64], t: &[f64]) -> Result<()> {
    if h.len() != t.len() {
        return Err(Error::DimensionMismatch { expected: h.len(), found: t.len() });
    }
    if h.is_empty() {
        return Err(Error::EmptyData);
    }
    Ok(())
}

/// Unnormalized `Σ (h_i − t_i)^2`.
pub fn mse_sum(h: &[f64], t: &[f64]) -> Result<f64> {
    check_pair(h, t)?;
    Ok(h.iter().zip(t).map(|(a, b)| (a - b) * (a - b)).sum())
}

/// Per-sample mean of the squared error.
pub fn mse_mean(h: &[f64], t: &[f64]) -> Result<f64> {
    Ok(mse_sum(h, t)? / h.len() as f64)
}

/// `Σ (h_i − t_i)^2 / (2r)`, the quantity gradient descent minimizes.
pub fn halved_objective(h: &[f64], t: &[f64]) -> Result<f64> {
    Ok(mse_sum(h, t)? / (2.0 * h.len() as f64))
}
