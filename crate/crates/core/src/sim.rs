//! Simulation settings, Bayes oracles and the experiment harness.
//!
//! Four data-generating mechanisms: covariates uniform on the unit cube,
//! monitoring times uniform on `[0, tau]`, failure times truncated at the
//! horizon, and the current status indicator computed from the truncated
//! failure time. Latent failure times are retained so fitted models can
//! be scored by uncensored test MSE, whose minimizer is the conditional
//! expectation and whose minimum is the Bayes risk.

use std::io::Write;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::censoring::{BandwidthRule, CensoringModel, DEFAULT_BETA, DEFAULT_FLOOR};
use crate::error::{Error, Result};
use crate::quad::{adaptive_simpson, gauss_legendre_32, gl32_nodes};
use crate::seed::{derive_seed, SeedPart};
use crate::select::{grid_search_cv, HyperGrid, KernelKind};
use crate::solver::{fit, predict, Dataset, FittedModel};
use crate::stats;

const MIN_WEIBULL_SCALE: f64 = 1e-3;

/// Data-generating mechanism.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SimSetting {
    /// d=1, tau=1, Weibull(scale = e^{-z/2}, shape 2).
    Weibull1D,
    /// d=10, tau=2, Weibull(scale = -0.5 z1 + 2 z2 - z3, shape 2). The
    /// scale expression can be non-positive on part of the cube; it is
    /// clamped below at 1e-3, giving near-immediate failure there.
    MultiWeibull,
    /// d=10, tau=7, LogNormal(mu = 0.5(0.3 z1 + 0.5 z2 + 0.2 z3), sigma 1).
    MultiLogNormal,
    /// d=1, tau=8, T = 4 + 6z + eps below z = 0.5 and 10 - 6z + eps above,
    /// eps ~ N(0,1).
    Triangle,
    /// Diagnostic setting with T a deterministic function of Z
    /// (conditional variance identically zero). Test use only.
    Deterministic,
}

impl SimSetting {
    pub fn dim(self) -> usize {
        match self {
            SimSetting::Weibull1D | SimSetting::Triangle | SimSetting::Deterministic => 1,
            SimSetting::MultiWeibull | SimSetting::MultiLogNormal => 10,
        }
    }

    pub fn tau(self) -> f64 {
        match self {
            SimSetting::Weibull1D | SimSetting::Deterministic => 1.0,
            SimSetting::MultiWeibull => 2.0,
            SimSetting::MultiLogNormal => 7.0,
            SimSetting::Triangle => 8.0,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            SimSetting::Weibull1D => "weibull",
            SimSetting::MultiWeibull => "multiweibull",
            SimSetting::MultiLogNormal => "multilognormal",
            SimSetting::Triangle => "triangle",
            SimSetting::Deterministic => "deterministic",
        }
    }

    pub fn parse(name: &str) -> Option<Self> {
        match name {
            "weibull" => Some(SimSetting::Weibull1D),
            "multiweibull" => Some(SimSetting::MultiWeibull),
            "multilognormal" => Some(SimSetting::MultiLogNormal),
            "triangle" => Some(SimSetting::Triangle),
            "deterministic" => Some(SimSetting::Deterministic),
            _ => None,
        }
    }

    fn weibull_scale(self, z: &[f64]) -> f64 {
        match self {
            SimSetting::Weibull1D => (-0.5 * z[0]).exp(),
            SimSetting::MultiWeibull => (-0.5 * z[0] + 2.0 * z[1] - z[2]).max(MIN_WEIBULL_SCALE),
            _ => unreachable!("not a Weibull setting"),
        }
    }

    fn lognormal_mu(z: &[f64]) -> f64 {
        0.5 * (0.3 * z[0] + 0.5 * z[1] + 0.2 * z[2])
    }

    fn triangle_mean(z: f64) -> f64 {
        if z <= 0.5 {
            4.0 + 6.0 * z
        } else {
            10.0 - 6.0 * z
        }
    }

    /// Survival function of the untruncated failure time at `t >= 0`.
    fn survival(self, t: f64, z: &[f64]) -> f64 {
        if t <= 0.0 {
            return 1.0;
        }
        match self {
            SimSetting::Weibull1D | SimSetting::MultiWeibull => {
                let u = t / self.weibull_scale(z);
                (-u * u).exp()
            }
            SimSetting::MultiLogNormal => 1.0 - stats::std_normal_cdf(t.ln() - Self::lognormal_mu(z)),
            SimSetting::Triangle => 1.0 - stats::std_normal_cdf(t - Self::triangle_mean(z[0])),
            SimSetting::Deterministic => {
                if t < z[0] {
                    1.0
                } else {
                    0.0
                }
            }
        }
    }

    /// Inverse-CDF draw of the untruncated failure time.
    fn draw_failure(self, z: &[f64], u: f64) -> f64 {
        match self {
            SimSetting::Weibull1D | SimSetting::MultiWeibull => {
                self.weibull_scale(z) * (-(1.0 - u).ln()).sqrt()
            }
            SimSetting::MultiLogNormal => {
                (Self::lognormal_mu(z) + stats::std_normal_inv_cdf(u)).exp()
            }
            SimSetting::Triangle => Self::triangle_mean(z[0]) + stats::std_normal_inv_cdf(u),
            SimSetting::Deterministic => z[0],
        }
    }
}

/// A dataset together with the latent truncated failure times.
#[derive(Debug, Clone)]
pub struct LatentDataset {
    pub data: Dataset,
    /// `T` clamped to `[0, tau]`, one entry per record.
    pub latent: Vec<f64>,
}

/// Draw `n` records deterministically from `seed`.
pub fn generate(setting: SimSetting, n: usize, seed: u64) -> Result<LatentDataset> {
    if n == 0 {
        return Err(Error::InvalidDataset("n must be >= 1".into()));
    }
    let d = setting.dim();
    let tau = setting.tau();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut covariates = Vec::with_capacity(n);
    let mut times = Vec::with_capacity(n);
    let mut status = Vec::with_capacity(n);
    let mut latent = Vec::with_capacity(n);
    for _ in 0..n {
        let z: Vec<f64> = (0..d).map(|_| rng.random::<f64>()).collect();
        let c = tau * rng.random::<f64>();
        let u = rng.random::<f64>().max(f64::MIN_POSITIVE);
        let t = setting.draw_failure(&z, u).clamp(0.0, tau);
        status.push(u8::from(t <= c));
        covariates.push(z);
        times.push(c);
        latent.push(t);
    }
    Ok(LatentDataset { data: Dataset::new(covariates, times, status, tau)?, latent })
}

fn check_unit_cube(setting: SimSetting, z: &[f64]) -> Result<()> {
    if z.len() != setting.dim() {
        return Err(Error::DimensionMismatch { expected: setting.dim(), got: z.len() });
    }
    for (i, &v) in z.iter().enumerate() {
        if !(0.0..=1.0).contains(&v) {
            return Err(Error::OutsideUnitCube { index: i, value: v });
        }
    }
    Ok(())
}

/// Bayes decision function `E[T ∧ tau | Z = z]`, by adaptive quadrature
/// of the survival function over `[0, tau]`.
pub fn bayes_predict(setting: SimSetting, z: &[f64]) -> Result<f64> {
    check_unit_cube(setting, z)?;
    if setting == SimSetting::Deterministic {
        return Ok(z[0].clamp(0.0, setting.tau()));
    }
    Ok(adaptive_simpson(|t| setting.survival(t, z), 0.0, setting.tau(), 1e-7))
}

/// First and second conditional moments of the truncated failure time,
/// by fixed Gauss-Legendre quadrature (the integrands are smooth in t).
fn conditional_moments(setting: SimSetting, z: &[f64]) -> (f64, f64) {
    let tau = setting.tau();
    if setting == SimSetting::Deterministic {
        let t = z[0].clamp(0.0, tau);
        return (t, t * t);
    }
    let m1 = gauss_legendre_32(|t| setting.survival(t, z), 0.0, tau);
    let m2 = gauss_legendre_32(|t| 2.0 * t * setting.survival(t, z), 0.0, tau);
    (m1, m2)
}

fn active_panels(setting: SimSetting) -> Vec<Vec<(f64, f64)>> {
    // Per active covariate: quadrature nodes over [0,1], split where the
    // integrand has a kink (triangle peak; the multiweibull scale clamp
    // is handled by extra panels per dimension).
    match setting {
        SimSetting::Weibull1D => vec![gl32_nodes(0.0, 1.0)],
        SimSetting::Triangle => {
            let mut nodes = gl32_nodes(0.0, 0.5);
            nodes.extend(gl32_nodes(0.5, 1.0));
            vec![nodes]
        }
        SimSetting::MultiLogNormal => vec![gl32_nodes(0.0, 1.0); 3],
        SimSetting::MultiWeibull => {
            let mut nodes = gl32_nodes(0.0, 0.5);
            nodes.extend(gl32_nodes(0.5, 1.0));
            vec![nodes; 3]
        }
        SimSetting::Deterministic => Vec::new(),
    }
}

/// Bayes risk `E_Z[ Var(T ∧ tau | Z) ]` by tensor quadrature over the
/// active covariates.
pub fn bayes_risk(setting: SimSetting) -> f64 {
    if setting == SimSetting::Deterministic {
        return 0.0;
    }
    let panels = active_panels(setting);
    let mut z = vec![0.0; setting.dim()];
    fn recurse(setting: SimSetting, panels: &[Vec<(f64, f64)>], dim: usize, z: &mut [f64]) -> f64 {
        if dim == panels.len() {
            let (m1, m2) = conditional_moments(setting, z);
            return m2 - m1 * m1;
        }
        let mut sum = 0.0;
        for &(x, w) in &panels[dim] {
            z[dim] = x;
            sum += w * recurse(setting, panels, dim + 1, z);
        }
        sum
    }
    recurse(setting, &panels, 0, &mut z)
}

/// Uncensored test MSE of a fitted model against the latent truncated
/// failure times.
pub fn evaluate_risk(model: &FittedModel, test: &LatentDataset) -> Result<f64> {
    let preds = predict(model, test.data.covariates())?;
    Ok(prediction_mse(&preds, &test.latent))
}

/// MSE of arbitrary predictions against the latent failure times.
pub fn prediction_mse(predictions: &[f64], latent: &[f64]) -> f64 {
    assert_eq!(predictions.len(), latent.len());
    predictions
        .iter()
        .zip(latent)
        .map(|(p, t)| (t - p) * (t - p))
        .sum::<f64>()
        / latent.len() as f64
}

/// Whether the censoring density is treated as known or estimated.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CensoringCase {
    Known,
    Estimated,
}

impl CensoringCase {
    pub fn name(self) -> &'static str {
        match self {
            CensoringCase::Known => "known",
            CensoringCase::Estimated => "estimated",
        }
    }

    pub fn parse(name: &str) -> Option<Self> {
        match name {
            "known" => Some(CensoringCase::Known),
            "estimated" => Some(CensoringCase::Estimated),
            _ => None,
        }
    }
}

/// Method and model-selection configuration for one experiment run.
#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub kernel: KernelKind,
    /// Grid override; defaults to `HyperGrid::default_for` when absent.
    pub grid: Option<HyperGrid>,
    pub censoring_case: CensoringCase,
    pub folds: usize,
    pub test_size: usize,
    pub with_intercept: bool,
}

impl ExperimentConfig {
    pub fn new(kernel: KernelKind, censoring_case: CensoringCase) -> Self {
        ExperimentConfig {
            kernel,
            grid: None,
            censoring_case,
            folds: 5,
            test_size: 10_000,
            with_intercept: true,
        }
    }
}

/// One (size, rep) outcome.
#[derive(Debug, Clone)]
pub struct ExperimentRow {
    pub setting: &'static str,
    pub n: usize,
    pub rep: usize,
    pub method: String,
    pub kernel: String,
    pub censoring_case: &'static str,
    pub risk: f64,
    pub bayes_risk: f64,
    pub sigma: Option<f64>,
    pub lambda: f64,
    pub seed: u64,
}

/// Result table for a simulation run.
#[derive(Debug, Clone)]
pub struct ExperimentResult {
    pub rows: Vec<ExperimentRow>,
    pub bayes_risk: f64,
    /// Per-rep failures, recorded rather than fatal.
    pub failures: Vec<String>,
    /// Set when more than 5% of the attempted reps failed.
    pub flagged: bool,
}

impl ExperimentResult {
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "setting,n,rep,method,kernel,censoring_case,risk,bayes_risk,sigma,lambda,seed")?;
        for r in &self.rows {
            writeln!(
                w,
                "{},{},{},{},{},{},{},{},{},{},{}",
                r.setting,
                r.n,
                r.rep,
                r.method,
                r.kernel,
                r.censoring_case,
                r.risk,
                r.bayes_risk,
                r.sigma.map_or(String::new(), |s| s.to_string()),
                r.lambda,
                r.seed
            )?;
        }
        Ok(())
    }

    /// Median risks keyed by sample size, in ascending size order.
    pub fn median_risk_by_size(&self) -> Vec<(usize, f64)> {
        let mut sizes: Vec<usize> = self.rows.iter().map(|r| r.n).collect();
        sizes.sort_unstable();
        sizes.dedup();
        sizes
            .into_iter()
            .map(|n| {
                let risks: Vec<f64> =
                    self.rows.iter().filter(|r| r.n == n).map(|r| r.risk).collect();
                (n, stats::median(&risks))
            })
            .collect()
    }
}

/// Run the full simulation harness: per (size, rep), generate training
/// data, select hyperparameters by k-fold CV, refit on the full training
/// set, and score on a fresh uncensored test set. Deterministic given
/// `master_seed`.
pub fn run_experiment(
    setting: SimSetting,
    sizes: &[usize],
    reps: usize,
    config: &ExperimentConfig,
    master_seed: u64,
) -> Result<ExperimentResult> {
    if sizes.is_empty() || reps == 0 {
        return Err(Error::InvalidDataset("need at least one size and one rep".into()));
    }
    let grid = config
        .grid
        .clone()
        .unwrap_or_else(|| HyperGrid::default_for(config.kernel, setting.dim()));
    let bayes = bayes_risk(setting);
    let mut rows = Vec::new();
    let mut failures = Vec::new();

    for &n in sizes {
        for rep in 0..reps {
            let part = |tag: &'static str| {
                derive_seed(
                    master_seed,
                    &[
                        SeedPart::Tag(setting.name()),
                        SeedPart::Num(n as u64),
                        SeedPart::Num(rep as u64),
                        SeedPart::Tag(tag),
                    ],
                )
            };
            let train_seed = part("train");
            let outcome = (|| -> Result<ExperimentRow> {
                let train = generate(setting, n, train_seed)?;
                let cens = match config.censoring_case {
                    CensoringCase::Known => {
                        CensoringModel::known_uniform(setting.tau(), DEFAULT_FLOOR)?
                    }
                    CensoringCase::Estimated => CensoringModel::fit_kde(
                        train.data.times(),
                        BandwidthRule::SilvermanBeta { beta: DEFAULT_BETA },
                        DEFAULT_FLOOR,
                    )?,
                };
                let (spec, lambda, _report) = grid_search_cv(
                    &train.data,
                    &grid,
                    config.folds,
                    &cens,
                    part("cv"),
                    config.with_intercept,
                )?;
                let model = fit(&train.data, &spec, lambda, &cens, config.with_intercept)?;
                let test = generate(setting, config.test_size, part("test"))?;
                let risk = evaluate_risk(&model, &test)?;
                Ok(ExperimentRow {
                    setting: setting.name(),
                    n,
                    rep,
                    method: match config.kernel {
                        KernelKind::Rbf => "rbf".to_string(),
                        KernelKind::Linear => "linear".to_string(),
                    },
                    kernel: spec.name().to_string(),
                    censoring_case: config.censoring_case.name(),
                    risk,
                    bayes_risk: bayes,
                    sigma: spec.sigma(),
                    lambda,
                    seed: train_seed,
                })
            })();
            match outcome {
                Ok(row) => rows.push(row),
                Err(e) => failures.push(format!("setting {} n {n} rep {rep}: {e}", setting.name())),
            }
        }
    }
    let attempted = sizes.len() * reps;
    let flagged = failures.len() * 20 > attempted; // > 5%
    Ok(ExperimentResult { rows, bayes_risk: bayes, failures, flagged })
}
