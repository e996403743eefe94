//! Kernel evaluation and gram/cross-kernel matrix construction.
//!
//! The decision function lives in the RKHS induced by one of two kernels:
//! the linear kernel `<x, y>` or the Gaussian RBF kernel
//! `exp(-||x - y||^2 / (2 sigma^2))`. RBF values lie in (0, 1], so the
//! sup-norm bound on the kernel holds with constant 1.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use nalgebra::DMatrix;

/// Kernel choice for the RKHS of candidate decision functions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum KernelSpec {
    Linear,
    Rbf { sigma: f64 },
}

impl KernelSpec {
    pub fn rbf(sigma: f64) -> Result<Self> {
        if sigma <= 0.0 || !sigma.is_finite() {
            return Err(Error::NonPositiveSigma(sigma));
        }
        Ok(KernelSpec::Rbf { sigma })
    }

    pub fn sigma(&self) -> Option<f64> {
        match self {
            KernelSpec::Linear => None,
            KernelSpec::Rbf { sigma } => Some(*sigma),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            KernelSpec::Linear => "linear",
            KernelSpec::Rbf { .. } => "rbf",
        }
    }

    fn validate(&self) -> Result<()> {
        if let KernelSpec::Rbf { sigma } = self {
            if *sigma <= 0.0 || !sigma.is_finite() {
                return Err(Error::NonPositiveSigma(*sigma));
            }
        }
        Ok(())
    }
}

fn check_dim(expected: usize, got: usize) -> Result<()> {
    if expected != got {
        return Err(Error::DimensionMismatch { expected, got });
    }
    Ok(())
}

/// Evaluate `k(x, y)` for a single pair of points.
pub fn kernel_eval(spec: &KernelSpec, x: &[f64], y: &[f64]) -> Result<f64> {
    spec.validate()?;
    if x.is_empty() {
        return Err(Error::DimensionMismatch { expected: 1, got: 0 });
    }
    check_dim(x.len(), y.len())?;
    Ok(eval_unchecked(spec, x, y))
}

#[inline]
fn eval_unchecked(spec: &KernelSpec, x: &[f64], y: &[f64]) -> f64 {
    match spec {
        KernelSpec::Linear => x.iter().zip(y).map(|(a, b)| a * b).sum(),
        KernelSpec::Rbf { sigma } => {
            let sq: f64 = x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum();
            (-sq / (2.0 * sigma * sigma)).exp()
        }
    }
}

fn check_shared_dim(points: &[Vec<f64>]) -> Result<usize> {
    let d = points.first().map_or(0, |p| p.len());
    for p in points {
        check_dim(d, p.len())?;
    }
    Ok(d)
}

/// Gram matrix `K[i][j] = k(points[i], points[j])`.
///
/// Each unordered pair is evaluated once, so the result is symmetric
/// bitwise, not merely up to rounding.
pub fn gram_matrix(spec: &KernelSpec, points: &[Vec<f64>]) -> Result<DMatrix<f64>> {
    spec.validate()?;
    if points.is_empty() {
        return Err(Error::EmptySamples("gram matrix needs at least one point"));
    }
    check_shared_dim(points)?;
    let n = points.len();
    let mut k = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in i..n {
            let v = eval_unchecked(spec, &points[i], &points[j]);
            k[(i, j)] = v;
            k[(j, i)] = v;
        }
    }
    Ok(k)
}

/// Cross-kernel matrix: entry `(i, j) = k(query[i], train[j])`.
///
/// An empty query yields a 0 x n matrix.
pub fn cross_kernel(
    spec: &KernelSpec,
    train: &[Vec<f64>],
    query: &[Vec<f64>],
) -> Result<DMatrix<f64>> {
    spec.validate()?;
    let d = check_shared_dim(train)?;
    for q in query {
        check_dim(d, q.len())?;
    }
    let mut k = DMatrix::zeros(query.len(), train.len());
    for (i, q) in query.iter().enumerate() {
        for (j, t) in train.iter().enumerate() {
            k[(i, j)] = eval_unchecked(spec, q, t);
        }
    }
    Ok(k)
}
