//! Cross-validated grid search over kernel width and regularization.
//!
//! Selection criterion is the censored empirical risk on the held-out
//! fold, evaluated with the same censoring model used for training (the
//! censoring fit is a nuisance step done once on the full data, not per
//! fold).

use std::io::Write;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::censoring::CensoringModel;
use crate::error::{Error, Result};
use crate::kernel::KernelSpec;
use crate::solver::{censored_empirical_risk, fit, predict, Dataset};
use crate::stats;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KernelKind {
    Linear,
    Rbf,
}

/// Cartesian hyperparameter grid. `sigmas` is empty iff the kernel is
/// linear.
#[derive(Debug, Clone)]
pub struct HyperGrid {
    pub kernel: KernelKind,
    pub sigmas: Vec<f64>,
    pub lambdas: Vec<f64>,
}

pub const DEFAULT_LAMBDAS: [f64; 5] = [1e-4, 1e-3, 1e-2, 1e-1, 1.0];
pub const DEFAULT_SIGMA_SCALES: [f64; 6] = [0.05, 0.1, 0.5, 1.0, 2.0, 5.0];

impl HyperGrid {
    pub fn linear(lambdas: Vec<f64>) -> Self {
        HyperGrid { kernel: KernelKind::Linear, sigmas: Vec::new(), lambdas }
    }

    pub fn rbf(sigmas: Vec<f64>, lambdas: Vec<f64>) -> Self {
        HyperGrid { kernel: KernelKind::Rbf, sigmas, lambdas }
    }

    /// Default grid for covariate dimension `d`: sigma scales multiplied
    /// by sqrt(d), lambdas on a decade grid.
    pub fn default_for(kernel: KernelKind, d: usize) -> Self {
        let lambdas = DEFAULT_LAMBDAS.to_vec();
        match kernel {
            KernelKind::Linear => HyperGrid::linear(lambdas),
            KernelKind::Rbf => {
                let root_d = (d as f64).sqrt();
                HyperGrid::rbf(DEFAULT_SIGMA_SCALES.iter().map(|s| s * root_d).collect(), lambdas)
            }
        }
    }

    fn validate(&self) -> Result<()> {
        if self.lambdas.is_empty() {
            return Err(Error::EmptyGrid);
        }
        if self.kernel == KernelKind::Rbf && self.sigmas.is_empty() {
            return Err(Error::EmptyGrid);
        }
        for &l in &self.lambdas {
            if l.is_nan() || l <= 0.0 {
                return Err(Error::InvalidParameter { name: "lambda", value: l });
            }
        }
        for &s in &self.sigmas {
            if s.is_nan() || s <= 0.0 {
                return Err(Error::InvalidParameter { name: "sigma", value: s });
            }
        }
        Ok(())
    }

    /// Grid cells in deterministic order.
    pub fn cells(&self) -> Vec<(KernelSpec, f64)> {
        let mut out = Vec::new();
        match self.kernel {
            KernelKind::Linear => {
                for &l in &self.lambdas {
                    out.push((KernelSpec::Linear, l));
                }
            }
            KernelKind::Rbf => {
                for &s in &self.sigmas {
                    for &l in &self.lambdas {
                        out.push((KernelSpec::Rbf { sigma: s }, l));
                    }
                }
            }
        }
        out
    }
}

/// Per-cell cross-validation record.
#[derive(Debug, Clone)]
pub struct CvCell {
    pub kernel: KernelSpec,
    pub lambda: f64,
    pub fold_risks: Vec<f64>,
    pub mean_risk: Option<f64>,
    pub std_risk: Option<f64>,
    pub error: Option<String>,
}

impl CvCell {
    pub fn failed(&self) -> bool {
        self.error.is_some()
    }
}

/// Full cross-validation table plus the chosen cell.
#[derive(Debug, Clone)]
pub struct CvReport {
    pub cells: Vec<CvCell>,
    pub chosen: usize,
    pub folds: usize,
    pub seed: u64,
}

impl CvReport {
    pub fn chosen_cell(&self) -> &CvCell {
        &self.cells[self.chosen]
    }

    /// CSV dump: one row per (cell, fold), then a summary block.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "kernel_kind,sigma,lambda,fold,val_risk")?;
        for cell in &self.cells {
            for (fold, risk) in cell.fold_risks.iter().enumerate() {
                writeln!(
                    w,
                    "{},{},{},{},{}",
                    cell.kernel.name(),
                    cell.kernel.sigma().map_or(String::new(), |s| s.to_string()),
                    cell.lambda,
                    fold,
                    risk
                )?;
            }
        }
        writeln!(w)?;
        writeln!(w, "# summary")?;
        writeln!(w, "kernel_kind,sigma,lambda,mean_risk,std_risk,status,chosen")?;
        for (i, cell) in self.cells.iter().enumerate() {
            writeln!(
                w,
                "{},{},{},{},{},{},{}",
                cell.kernel.name(),
                cell.kernel.sigma().map_or(String::new(), |s| s.to_string()),
                cell.lambda,
                cell.mean_risk.map_or(String::new(), |v| v.to_string()),
                cell.std_risk.map_or(String::new(), |v| v.to_string()),
                cell.error.as_deref().unwrap_or("ok"),
                i == self.chosen,
            )?;
        }
        Ok(())
    }
}

/// Deterministic k-fold partition of `{0..n}`; fold sizes differ by at
/// most one.
pub fn kfold_split(n: usize, k: usize, seed: u64) -> Result<Vec<Vec<usize>>> {
    if k < 2 || k > n {
        return Err(Error::InvalidFolds { k, n });
    }
    let mut idx: Vec<usize> = (0..n).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    idx.shuffle(&mut rng);
    let base = n / k;
    let extra = n % k;
    let mut folds = Vec::with_capacity(k);
    let mut start = 0;
    for f in 0..k {
        let size = base + usize::from(f < extra);
        folds.push(idx[start..start + size].to_vec());
        start += size;
    }
    Ok(folds)
}

/// Grid search with k-fold cross-validation. Returns the chosen kernel
/// and lambda plus the full report; refitting on the full data is the
/// caller's job.
///
/// Tie-break on equal mean risk: smaller lambda, then smaller sigma.
pub fn grid_search_cv(
    data: &Dataset,
    grid: &HyperGrid,
    k: usize,
    cens: &CensoringModel,
    seed: u64,
    with_intercept: bool,
) -> Result<(KernelSpec, f64, CvReport)> {
    grid.validate()?;
    let n = data.len();
    let folds = kfold_split(n, k, seed)?;
    let complements: Vec<Vec<usize>> = (0..k)
        .map(|f| {
            folds
                .iter()
                .enumerate()
                .filter(|(g, _)| *g != f)
                .flat_map(|(_, fold)| fold.iter().copied())
                .collect()
        })
        .collect();

    let mut cells = Vec::new();
    for (spec, lambda) in grid.cells() {
        let mut fold_risks = Vec::with_capacity(k);
        let mut error = None;
        for f in 0..k {
            let train = data.subset(&complements[f])?;
            let val = data.subset(&folds[f])?;
            match fit(&train, &spec, lambda, cens, with_intercept)
                .and_then(|m| predict(&m, val.covariates()))
                .and_then(|p| censored_empirical_risk(&p, &val, cens, false))
            {
                Ok(risk) => fold_risks.push(risk),
                Err(e) => {
                    error = Some(format!("fold {f}: {e}"));
                    break;
                }
            }
        }
        let (mean_risk, std_risk) = if error.is_none() {
            let mean = fold_risks.iter().sum::<f64>() / k as f64;
            (Some(mean), Some(stats::sample_std(&fold_risks)))
        } else {
            (None, None)
        };
        cells.push(CvCell { kernel: spec, lambda, fold_risks, mean_risk, std_risk, error });
    }

    let mut chosen: Option<usize> = None;
    for (i, cell) in cells.iter().enumerate() {
        let Some(mean) = cell.mean_risk else { continue };
        let better = match chosen {
            None => true,
            Some(j) => {
                let best = &cells[j];
                let best_mean = best.mean_risk.unwrap();
                if mean != best_mean {
                    mean < best_mean
                } else if cell.lambda != best.lambda {
                    cell.lambda < best.lambda
                } else {
                    cell.kernel.sigma().unwrap_or(0.0) < best.kernel.sigma().unwrap_or(0.0)
                }
            }
        };
        if better {
            chosen = Some(i);
        }
    }
    let chosen = chosen.ok_or(Error::AllCellsFailed)?;
    let spec = cells[chosen].kernel;
    let lambda = cells[chosen].lambda;
    Ok((spec, lambda, CvReport { cells, chosen, folds: k, seed }))
}
