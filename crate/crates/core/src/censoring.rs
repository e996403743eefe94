//! Censoring density models.
//!
//! The weighting scheme divides by the monitoring-time density g(c|z), so
//! the model either wraps a known density or a kernel density estimate of
//! the marginal monitoring-time distribution, and in both cases clamps the
//! evaluated density below at a positive floor. Without the floor the
//! weights blow up near the support boundary.

use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::stats;

pub const DEFAULT_FLOOR: f64 = 1e-3;
pub const DEFAULT_BETA: f64 = 2.0;

/// Bandwidth selection rule for the censoring KDE.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BandwidthRule {
    /// `1.06 * sigma_hat * n^{-1/(2 beta + 1)}` where `sigma_hat` is the
    /// smaller of the sample standard deviation and IQR/1.34. The exponent
    /// follows the n^{-1/(2 beta + 1)} rate; the scale is data driven.
    SilvermanBeta { beta: f64 },
    Fixed { h: f64 },
}

/// Select a KDE bandwidth from the monitoring-time samples.
pub fn select_bandwidth(samples: &[f64], rule: BandwidthRule) -> Result<f64> {
    if samples.is_empty() {
        return Err(Error::EmptySamples("bandwidth selection"));
    }
    match rule {
        BandwidthRule::Fixed { h } => {
            if h <= 0.0 || !h.is_finite() {
                return Err(Error::InvalidParameter { name: "fixed_h", value: h });
            }
            Ok(h)
        }
        BandwidthRule::SilvermanBeta { beta } => {
            if beta < 1.0 || !beta.is_finite() {
                return Err(Error::InvalidParameter { name: "beta", value: beta });
            }
            let n = samples.len() as f64;
            let sd = stats::sample_std(samples);
            let iqr = stats::quantile_type7(samples, 0.75) - stats::quantile_type7(samples, 0.25);
            let mut scale = sd.min(iqr / 1.34);
            if scale.is_nan() || scale <= 0.0 {
                scale = 1e-3;
            }
            if !scale.is_finite() {
                return Err(Error::InvalidParameter { name: "sample_scale", value: scale });
            }
            Ok(1.06 * scale * n.powf(-1.0 / (2.0 * beta + 1.0)))
        }
    }
}

/// User-supplied conditional density `g(c|z)`.
pub type DensityFn = Arc<dyn Fn(f64, &[f64]) -> f64 + Send + Sync>;

/// Known censoring density, either the uniform density on [0, tau] used by
/// all simulation settings or an arbitrary user-supplied `g(c|z)`.
#[derive(Clone)]
pub enum KnownDensity {
    Uniform { tau: f64 },
    Custom(DensityFn),
}

impl std::fmt::Debug for KnownDensity {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            KnownDensity::Uniform { tau } => write!(f, "Uniform {{ tau: {tau} }}"),
            KnownDensity::Custom(_) => write!(f, "Custom(..)"),
        }
    }
}

#[derive(Debug, Clone)]
enum CensoringKind {
    Known(KnownDensity),
    Kde { samples: Vec<f64>, bandwidth: f64 },
}

/// Censoring density with a positivity floor and a clamp diagnostic.
#[derive(Debug)]
pub struct CensoringModel {
    kind: CensoringKind,
    floor: f64,
    clamps: AtomicU64,
}

impl Clone for CensoringModel {
    fn clone(&self) -> Self {
        CensoringModel {
            kind: self.kind.clone(),
            floor: self.floor,
            clamps: AtomicU64::new(self.clamps.load(Ordering::Relaxed)),
        }
    }
}

fn check_floor(floor: f64) -> Result<()> {
    if floor <= 0.0 || !floor.is_finite() {
        return Err(Error::InvalidParameter { name: "floor", value: floor });
    }
    Ok(())
}

impl CensoringModel {
    /// Known density `g(c|z)`, clamped below at `floor` on evaluation.
    pub fn known(density: KnownDensity, floor: f64) -> Result<Self> {
        check_floor(floor)?;
        if let KnownDensity::Uniform { tau } = density {
            if tau <= 0.0 || !tau.is_finite() {
                return Err(Error::InvalidParameter { name: "tau", value: tau });
            }
        }
        Ok(CensoringModel { kind: CensoringKind::Known(density), floor, clamps: AtomicU64::new(0) })
    }

    pub fn known_uniform(tau: f64, floor: f64) -> Result<Self> {
        Self::known(KnownDensity::Uniform { tau }, floor)
    }

    /// Fit a normal-kernel KDE to the monitoring times.
    pub fn fit_kde(samples: &[f64], rule: BandwidthRule, floor: f64) -> Result<Self> {
        check_floor(floor)?;
        let h = select_bandwidth(samples, rule)?;
        Ok(CensoringModel {
            kind: CensoringKind::Kde { samples: samples.to_vec(), bandwidth: h },
            floor,
            clamps: AtomicU64::new(0),
        })
    }

    /// Rebuild a KDE model from persisted samples and bandwidth.
    pub fn from_kde_parts(samples: Vec<f64>, bandwidth: f64, floor: f64) -> Result<Self> {
        check_floor(floor)?;
        if samples.is_empty() {
            return Err(Error::EmptySamples("kde"));
        }
        if bandwidth <= 0.0 || !bandwidth.is_finite() {
            return Err(Error::InvalidParameter { name: "bandwidth", value: bandwidth });
        }
        Ok(CensoringModel {
            kind: CensoringKind::Kde { samples, bandwidth },
            floor,
            clamps: AtomicU64::new(0),
        })
    }

    pub fn floor(&self) -> f64 {
        self.floor
    }

    pub fn bandwidth(&self) -> Option<f64> {
        match &self.kind {
            CensoringKind::Kde { bandwidth, .. } => Some(*bandwidth),
            CensoringKind::Known(_) => None,
        }
    }

    pub fn kde_samples(&self) -> Option<&[f64]> {
        match &self.kind {
            CensoringKind::Kde { samples, .. } => Some(samples),
            CensoringKind::Known(_) => None,
        }
    }

    pub fn known_density(&self) -> Option<&KnownDensity> {
        match &self.kind {
            CensoringKind::Known(d) => Some(d),
            CensoringKind::Kde { .. } => None,
        }
    }

    /// One-line descriptor for result tables and model metadata.
    pub fn describe(&self) -> String {
        match &self.kind {
            CensoringKind::Known(KnownDensity::Uniform { tau }) => format!("known-uniform(tau={tau})"),
            CensoringKind::Known(KnownDensity::Custom(_)) => "known-custom".to_string(),
            CensoringKind::Kde { samples, bandwidth } => {
                format!("kde(n={},h={bandwidth})", samples.len())
            }
        }
    }

    /// Density before the floor clamp. The KDE variant is marginal in `c`
    /// and ignores `z`; all simulation settings have C independent of Z.
    pub fn density_unclamped(&self, c: f64, z: &[f64]) -> f64 {
        match &self.kind {
            CensoringKind::Known(KnownDensity::Uniform { tau }) => {
                if (0.0..=*tau).contains(&c) {
                    1.0 / tau
                } else {
                    0.0
                }
            }
            CensoringKind::Known(KnownDensity::Custom(g)) => g(c, z),
            CensoringKind::Kde { samples, bandwidth } => {
                let h = *bandwidth;
                let sum: f64 = samples.iter().map(|&ci| stats::std_normal_pdf((ci - c) / h)).sum();
                sum / (h * samples.len() as f64)
            }
        }
    }

    /// Density clamped below at the floor; clamp events are counted.
    pub fn density_eval(&self, c: f64, z: &[f64]) -> f64 {
        let g = self.density_unclamped(c, z);
        if g < self.floor || !g.is_finite() {
            self.clamps.fetch_add(1, Ordering::Relaxed);
            self.floor
        } else {
            g
        }
    }

    /// Number of evaluations that hit the floor clamp so far.
    pub fn clamp_count(&self) -> u64 {
        self.clamps.load(Ordering::Relaxed)
    }
}
