//! Small numerical helpers shared across modules.

use statrs::distribution::{Continuous, ContinuousCDF, Normal};

fn std_normal() -> Normal {
    Normal::new(0.0, 1.0).expect("standard normal")
}

pub fn std_normal_pdf(x: f64) -> f64 {
    std_normal().pdf(x)
}

pub fn std_normal_cdf(x: f64) -> f64 {
    std_normal().cdf(x)
}

pub fn std_normal_inv_cdf(p: f64) -> f64 {
    std_normal().inverse_cdf(p)
}

/// Sample standard deviation with the n-1 denominator; 0 for n < 2.
pub fn sample_std(samples: &[f64]) -> f64 {
    let n = samples.len();
    if n < 2 {
        return 0.0;
    }
    let mean = samples.iter().sum::<f64>() / n as f64;
    let ss: f64 = samples.iter().map(|x| (x - mean) * (x - mean)).sum();
    (ss / (n - 1) as f64).sqrt()
}

/// Type-7 (linear interpolation) quantile on unsorted data.
pub fn quantile_type7(samples: &[f64], p: f64) -> f64 {
    assert!(!samples.is_empty(), "quantile of empty sample");
    assert!((0.0..=1.0).contains(&p), "quantile level out of range");
    let mut v = samples.to_vec();
    v.sort_by(f64::total_cmp);
    quantile_type7_sorted(&v, p)
}

/// Type-7 quantile assuming `sorted` is ascending.
pub fn quantile_type7_sorted(sorted: &[f64], p: f64) -> f64 {
    let n = sorted.len();
    if n == 1 {
        return sorted[0];
    }
    let pos = p * (n - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    let frac = pos - lo as f64;
    sorted[lo] + frac * (sorted[hi] - sorted[lo])
}

/// Median via the type-7 rule.
pub fn median(samples: &[f64]) -> f64 {
    quantile_type7(samples, 0.5)
}
