//! Closed-form fitting of the decision function and censored risk
//! evaluation.
//!
//! The regularized objective
//!
//! ```text
//! lambda ||f||_H^2 + (1/n) sum_i [ 2 v_i (c_i - f(z_i)) + f(z_i)^2 ]
//! ```
//!
//! with inverse-censoring weights `v_i = (1 - delta_i) / g(c_i|z_i)` is
//! quadratic in the representer coefficients, so fitting reduces to one
//! dense symmetric solve: `(K + n lambda I) alpha = v` without an
//! intercept, or the bordered system with the `sum alpha_i = 0`
//! constraint when an intercept is requested.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::censoring::CensoringModel;
use crate::error::{Error, Result};
use crate::kernel::{cross_kernel, gram_matrix, KernelSpec};

const RESIDUAL_TOL: f64 = 1e-8;

/// Current status observations: covariates, monitoring times in
/// `[0, tau]` and status indicators.
#[derive(Debug, Clone)]
pub struct Dataset {
    covariates: Vec<Vec<f64>>,
    times: Vec<f64>,
    status: Vec<u8>,
    tau: f64,
}

impl Dataset {
    pub fn new(covariates: Vec<Vec<f64>>, times: Vec<f64>, status: Vec<u8>, tau: f64) -> Result<Self> {
        let n = covariates.len();
        if n == 0 {
            return Err(Error::InvalidDataset("need at least one record".into()));
        }
        if times.len() != n || status.len() != n {
            return Err(Error::InvalidDataset(format!(
                "length mismatch: {} covariate rows, {} times, {} status entries",
                n,
                times.len(),
                status.len()
            )));
        }
        let d = covariates[0].len();
        if d == 0 {
            return Err(Error::InvalidDataset("covariate dimension must be >= 1".into()));
        }
        for row in &covariates {
            if row.len() != d {
                return Err(Error::InvalidDataset("ragged covariate rows".into()));
            }
        }
        if tau <= 0.0 || !tau.is_finite() {
            return Err(Error::InvalidParameter { name: "tau", value: tau });
        }
        for (i, &c) in times.iter().enumerate() {
            if !(0.0..=tau).contains(&c) {
                return Err(Error::InvalidDataset(format!(
                    "time {c} at row {i} outside [0, {tau}]"
                )));
            }
        }
        if let Some(&s) = status.iter().find(|&&s| s > 1) {
            return Err(Error::InvalidDataset(format!("status entry {s} not in {{0,1}}")));
        }
        Ok(Dataset { covariates, times, status, tau })
    }

    pub fn len(&self) -> usize {
        self.covariates.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn dim(&self) -> usize {
        self.covariates[0].len()
    }

    pub fn covariates(&self) -> &[Vec<f64>] {
        &self.covariates
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn status(&self) -> &[u8] {
        &self.status
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    /// Restrict to the given rows (used by cross-validation folds).
    pub fn subset(&self, idx: &[usize]) -> Result<Self> {
        Dataset::new(
            idx.iter().map(|&i| self.covariates[i].clone()).collect(),
            idx.iter().map(|&i| self.times[i]).collect(),
            idx.iter().map(|&i| self.status[i]).collect(),
            self.tau,
        )
    }
}

/// Fitted decision function `f(z) = sum_j alpha_j k(z, z_j) + b`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FittedModel {
    pub kernel: KernelSpec,
    pub support: Vec<Vec<f64>>,
    pub alpha: Vec<f64>,
    pub intercept: Option<f64>,
    pub lambda: f64,
    pub train_n: usize,
    pub censoring: String,
}

impl FittedModel {
    pub fn dim(&self) -> usize {
        self.support.first().map_or(0, |r| r.len())
    }
}

/// Inverse-censoring-weighted pseudo targets
/// `v_i = (1 - delta_i) / g(c_i|z_i)`; exactly zero where `delta_i = 1`.
pub fn pseudo_targets(data: &Dataset, cens: &CensoringModel) -> Vec<f64> {
    data.status()
        .iter()
        .zip(data.times().iter().zip(data.covariates()))
        .map(|(&delta, (&c, z))| {
            if delta == 1 {
                0.0
            } else {
                1.0 / cens.density_eval(c, z)
            }
        })
        .collect()
}

fn condition_estimate(a: &DMatrix<f64>) -> f64 {
    // Cheap estimate: ratio of extreme diagonal magnitudes of the LU
    // factor; good enough for an error message.
    let lu = a.clone().lu();
    let u = lu.u();
    let mut max = 0.0f64;
    let mut min = f64::MAX;
    for i in 0..u.nrows().min(u.ncols()) {
        let d = u[(i, i)].abs();
        max = max.max(d);
        min = min.min(d);
    }
    if min == 0.0 {
        f64::INFINITY
    } else {
        max / min
    }
}

fn check_residual(a: &DMatrix<f64>, x: &DVector<f64>, rhs: &DVector<f64>) -> Result<()> {
    let res = (a * x - rhs).norm() / rhs.norm().max(1.0);
    if res.is_nan() || res > RESIDUAL_TOL {
        return Err(Error::Numerical {
            message: format!("linear system residual {res:.3e} exceeds {RESIDUAL_TOL:.0e}"),
            condition: condition_estimate(a),
        });
    }
    Ok(())
}

/// Fit the decision function in closed form.
///
/// The solution depends on the monitoring times only through the
/// censoring density values and the status indicators, because the loss
/// is linear in `(c - f)`.
pub fn fit(
    data: &Dataset,
    kernel: &KernelSpec,
    lambda: f64,
    cens: &CensoringModel,
    with_intercept: bool,
) -> Result<FittedModel> {
    if lambda <= 0.0 || !lambda.is_finite() {
        return Err(Error::InvalidParameter { name: "lambda", value: lambda });
    }
    let n = data.len();
    if with_intercept && n < 2 {
        return Err(Error::InvalidDataset("intercept fit needs n >= 2".into()));
    }
    let k = gram_matrix(kernel, data.covariates())?;
    let v = DVector::from_vec(pseudo_targets(data, cens));
    let ridge = n as f64 * lambda;

    let (alpha, intercept) = if with_intercept {
        // Bordered system [[K + n lambda I, 1], [1^T, 0]] [alpha; b] = [v; 0]
        let mut a = DMatrix::zeros(n + 1, n + 1);
        a.view_mut((0, 0), (n, n)).copy_from(&k);
        for i in 0..n {
            a[(i, i)] += ridge;
            a[(i, n)] = 1.0;
            a[(n, i)] = 1.0;
        }
        let mut rhs = DVector::zeros(n + 1);
        rhs.rows_mut(0, n).copy_from(&v);
        let lu = a.clone().lu();
        let x = lu.solve(&rhs).ok_or_else(|| Error::Numerical {
            message: "bordered system is singular".into(),
            condition: condition_estimate(&a),
        })?;
        check_residual(&a, &x, &rhs)?;
        (x.rows(0, n).iter().cloned().collect::<Vec<f64>>(), Some(x[n]))
    } else {
        let mut a = k.clone();
        for i in 0..n {
            a[(i, i)] += ridge;
        }
        let chol = a.clone().cholesky().ok_or_else(|| Error::Numerical {
            message: "ridge-regularized gram matrix is not positive definite".into(),
            condition: condition_estimate(&a),
        })?;
        let x = chol.solve(&v);
        check_residual(&a, &x, &v)?;
        (x.iter().cloned().collect::<Vec<f64>>(), None)
    };

    Ok(FittedModel {
        kernel: *kernel,
        support: data.covariates().to_vec(),
        alpha,
        intercept,
        lambda,
        train_n: n,
        censoring: cens.describe(),
    })
}

/// Evaluate the decision function on query points.
pub fn predict(model: &FittedModel, query: &[Vec<f64>]) -> Result<Vec<f64>> {
    let kq = cross_kernel(&model.kernel, &model.support, query)?;
    let alpha = DVector::from_vec(model.alpha.clone());
    let b = model.intercept.unwrap_or(0.0);
    Ok((kq * alpha).iter().map(|f| f + b).collect())
}

/// Censored empirical risk `(1/n) sum_i [ 2 v_i (c_i - f_i) + f_i^2 ]`.
///
/// With `shift` the positivity constant `a = max_i (1 - delta_i) / g_i^2`
/// is added; it changes the value but never the ranking of two prediction
/// vectors on the same data.
pub fn censored_empirical_risk(
    predictions: &[f64],
    data: &Dataset,
    cens: &CensoringModel,
    shift: bool,
) -> Result<f64> {
    let n = data.len();
    if predictions.len() != n {
        return Err(Error::DimensionMismatch { expected: n, got: predictions.len() });
    }
    let mut sum = 0.0;
    let mut max_shift = 0.0f64;
    for (i, &f) in predictions.iter().enumerate() {
        let (delta, c, z) = (data.status()[i], data.times()[i], &data.covariates()[i]);
        if delta == 0 {
            let g = cens.density_eval(c, z);
            sum += 2.0 * (c - f) / g;
            max_shift = max_shift.max(1.0 / (g * g));
        }
        sum += f * f;
    }
    let mut risk = sum / n as f64;
    if shift {
        risk += max_shift;
    }
    Ok(risk)
}

/// The regularized objective at explicit coefficients: exposed so that
/// tests can compare the closed-form solution to generic minimization.
pub fn regularized_objective(
    alpha: &[f64],
    intercept: Option<f64>,
    data: &Dataset,
    kernel: &KernelSpec,
    lambda: f64,
    cens: &CensoringModel,
) -> Result<f64> {
    let n = data.len();
    if alpha.len() != n {
        return Err(Error::DimensionMismatch { expected: n, got: alpha.len() });
    }
    let k = gram_matrix(kernel, data.covariates())?;
    let a = DVector::from_vec(alpha.to_vec());
    let ka = &k * &a;
    let b = intercept.unwrap_or(0.0);
    let preds: Vec<f64> = ka.iter().map(|f| f + b).collect();
    let rkhs = a.dot(&ka);
    Ok(lambda * rkhs + censored_empirical_risk(&preds, data, cens, false)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::censoring::KnownDensity;
    use approx::assert_relative_eq;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::sync::Arc;

    fn unit_density(floor: f64) -> CensoringModel {
        CensoringModel::known_uniform(1.0, floor).unwrap()
    }

    fn two_point_data() -> Dataset {
        Dataset::new(vec![vec![1.0], vec![2.0]], vec![0.5, 0.5], vec![0, 0], 1.0).unwrap()
    }

    #[test]
    fn pseudo_targets_values() {
        let data =
            Dataset::new(vec![vec![0.1], vec![0.2], vec![0.3]], vec![0.5, 0.5, 0.5], vec![1, 0, 0], 1.0)
                .unwrap();
        let g = KnownDensity::Custom(Arc::new(|c, _z: &[f64]| if c < 0.6 { 0.25 } else { 1.0 }));
        let cens = CensoringModel::known(g, 1e-3).unwrap();
        let v = pseudo_targets(&data, &cens);
        assert_eq!(v, vec![0.0, 4.0, 4.0]);
    }

    #[test]
    fn all_observed_gives_zero_function() {
        let data = Dataset::new(vec![vec![0.1], vec![0.9]], vec![0.5, 0.7], vec![1, 1], 1.0).unwrap();
        let m = fit(&data, &KernelSpec::Linear, 0.5, &unit_density(1e-3), false).unwrap();
        assert_eq!(m.alpha, vec![0.0, 0.0]);
        assert_eq!(predict(&m, &[vec![0.3]]).unwrap(), vec![0.0]);
    }

    #[test]
    fn two_point_closed_form() {
        // (K + I) = [[2,2],[2,5]], v = (1,1) => alpha = (0.5, 0)
        let m = fit(&two_point_data(), &KernelSpec::Linear, 0.5, &unit_density(1e-3), false).unwrap();
        assert_relative_eq!(m.alpha[0], 0.5, epsilon = 1e-12);
        assert_relative_eq!(m.alpha[1], 0.0, epsilon = 1e-12);
        let p = predict(&m, &[vec![3.0]]).unwrap();
        assert_relative_eq!(p[0], 1.5, epsilon = 1e-12);
    }

    // Independent oracle: plain gradient descent on the objective, never
    // touching the linear-system path.
    fn gradient_descent_objective(
        data: &Dataset,
        kernel: &KernelSpec,
        lambda: f64,
        cens: &CensoringModel,
        iters: usize,
        step: f64,
    ) -> Vec<f64> {
        let n = data.len();
        let k = gram_matrix(kernel, data.covariates()).unwrap();
        let v = DVector::from_vec(pseudo_targets(data, cens));
        let mut a = DVector::zeros(n);
        for _ in 0..iters {
            // grad = 2 lambda K a + (2/n) K (K a - v)
            let ka = &k * &a;
            let grad = 2.0 * lambda * &ka + (2.0 / n as f64) * (&k * (&ka - &v));
            a -= step * grad;
        }
        a.iter().cloned().collect()
    }

    #[test]
    fn closed_form_matches_gradient_descent() {
        let data = two_point_data();
        let cens = unit_density(1e-3);
        let m = fit(&data, &KernelSpec::Linear, 0.5, &cens, false).unwrap();
        let oracle = gradient_descent_objective(&data, &KernelSpec::Linear, 0.5, &cens, 200_000, 0.02);
        // The descent iterate may differ from alpha by a gram null-space
        // component; the objective value and the fitted function agree.
        let obj_closed =
            regularized_objective(&m.alpha, None, &data, &KernelSpec::Linear, 0.5, &cens).unwrap();
        let obj_oracle =
            regularized_objective(&oracle, None, &data, &KernelSpec::Linear, 0.5, &cens).unwrap();
        assert_relative_eq!(obj_closed, obj_oracle, epsilon = 1e-10);
        assert!(obj_closed <= obj_oracle + 1e-12);
        let k = gram_matrix(&KernelSpec::Linear, data.covariates()).unwrap();
        let f_closed = &k * DVector::from_vec(m.alpha.clone());
        let f_oracle = &k * DVector::from_vec(oracle);
        assert!((f_closed - f_oracle).norm() <= 1e-8);
    }

    #[test]
    fn intercept_zero_targets() {
        let data = Dataset::new(vec![vec![0.1], vec![0.9]], vec![0.5, 0.7], vec![1, 1], 1.0).unwrap();
        let m = fit(&data, &KernelSpec::Linear, 0.5, &unit_density(1e-3), true).unwrap();
        assert_eq!(m.alpha, vec![0.0, 0.0]);
        assert_eq!(m.intercept, Some(0.0));
    }

    fn random_instance(n: usize, d: usize, seed: u64) -> Dataset {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let cov: Vec<Vec<f64>> =
            (0..n).map(|_| (0..d).map(|_| rng.random::<f64>()).collect()).collect();
        let times: Vec<f64> = (0..n).map(|_| rng.random::<f64>()).collect();
        let status: Vec<u8> = (0..n).map(|_| u8::from(rng.random::<f64>() < 0.5)).collect();
        Dataset::new(cov, times, status, 1.0).unwrap()
    }

    #[test]
    fn dual_constraint_with_intercept() {
        for seed in 0..5 {
            let data = random_instance(25, 3, seed);
            let cens = unit_density(1e-3);
            let m = fit(&data, &KernelSpec::rbf(0.7).unwrap(), 0.01, &cens, true).unwrap();
            let sum: f64 = m.alpha.iter().sum();
            let l1: f64 = m.alpha.iter().map(|a| a.abs()).sum();
            assert!(sum.abs() <= 1e-8 * l1.max(1e-300), "sum = {sum}, l1 = {l1}");
        }
    }

    #[test]
    fn stationarity_identity_without_intercept() {
        // alpha = (1/(lambda n)) (v - K alpha)
        let data = random_instance(30, 2, 9);
        let cens = unit_density(1e-3);
        let lambda = 0.05;
        let m = fit(&data, &KernelSpec::rbf(0.5).unwrap(), lambda, &cens, false).unwrap();
        let k = gram_matrix(&m.kernel, data.covariates()).unwrap();
        let a = DVector::from_vec(m.alpha.clone());
        let v = DVector::from_vec(pseudo_targets(&data, &cens));
        let rhs = (v - &k * &a) / (lambda * data.len() as f64);
        let rel = (&a - &rhs).norm() / a.norm().max(1e-300);
        assert!(rel <= 1e-8, "relative deviation {rel}");
    }

    #[test]
    fn shrinkage_monotone_in_lambda() {
        let data = random_instance(40, 2, 4);
        let cens = unit_density(1e-3);
        let mut prev = f64::INFINITY;
        for &lambda in &[1e-3, 1e-2, 1e-1, 1.0, 10.0] {
            let m = fit(&data, &KernelSpec::rbf(0.6).unwrap(), lambda, &cens, false).unwrap();
            let k = gram_matrix(&m.kernel, data.covariates()).unwrap();
            let a = DVector::from_vec(m.alpha.clone());
            let norm = a.dot(&(&k * &a));
            assert!(norm <= prev + 1e-10, "norm {norm} > previous {prev} at lambda {lambda}");
            prev = norm;
        }
    }

    #[test]
    fn solution_ignores_times_given_weights() {
        // Constant known density: changing the monitoring times leaves
        // every density value (and delta) fixed, so (alpha, b) must be
        // bitwise unchanged.
        let cov: Vec<Vec<f64>> = (0..10).map(|i| vec![i as f64 / 10.0]).collect();
        let status = vec![0, 1, 0, 0, 1, 0, 1, 0, 0, 1];
        let t1: Vec<f64> = (0..10).map(|i| 0.05 * i as f64).collect();
        let t2: Vec<f64> = (0..10).map(|i| 0.9 - 0.05 * i as f64).collect();
        let d1 = Dataset::new(cov.clone(), t1, status.clone(), 1.0).unwrap();
        let d2 = Dataset::new(cov, t2, status, 1.0).unwrap();
        let cens = unit_density(1e-3);
        let spec = KernelSpec::rbf(0.4).unwrap();
        let m1 = fit(&d1, &spec, 0.1, &cens, true).unwrap();
        let m2 = fit(&d2, &spec, 0.1, &cens, true).unwrap();
        assert_eq!(m1.alpha, m2.alpha);
        assert_eq!(m1.intercept, m2.intercept);
    }

    #[test]
    fn normalized_loss_equivalence() {
        // Dividing the loss by tau^2 and using lambda' = lambda / tau^2
        // leaves the minimizer unchanged: the production alpha must be a
        // stationary point of the normalized objective.
        let tau = 3.0f64;
        let cov: Vec<Vec<f64>> = (0..12).map(|i| vec![(i as f64) / 12.0, (i as f64 % 4.0) / 4.0]).collect();
        let times: Vec<f64> = (0..12).map(|i| 0.25 * (i as f64 % 9.0) + 0.3).collect();
        let status = vec![0, 1, 0, 0, 1, 0, 0, 0, 1, 0, 1, 0];
        let data = Dataset::new(cov, times, status, tau).unwrap();
        let cens = CensoringModel::known_uniform(tau, 1e-3).unwrap();
        let lambda = 0.07;
        let spec = KernelSpec::rbf(0.8).unwrap();
        let m = fit(&data, &spec, lambda, &cens, false).unwrap();

        let n = data.len();
        let k = gram_matrix(&spec, data.covariates()).unwrap();
        let v = DVector::from_vec(pseudo_targets(&data, &cens));
        let a = DVector::from_vec(m.alpha.clone());
        let lambda_norm = lambda / (tau * tau);
        // gradient of lambda' a'Ka + (1/(n tau^2)) [2 v'(c - Ka) + |Ka|^2]
        let ka = &k * &a;
        let grad = 2.0 * lambda_norm * &ka
            + (2.0 / (n as f64 * tau * tau)) * (&k * (&ka - &v));
        assert!(grad.norm() <= 1e-10, "gradient norm {}", grad.norm());
    }

    #[test]
    fn risk_all_observed_is_mean_square() {
        let data = Dataset::new(vec![vec![0.0], vec![1.0]], vec![0.5, 0.5], vec![1, 1], 1.0).unwrap();
        let r = censored_empirical_risk(&[2.0, 4.0], &data, &unit_density(1e-3), false).unwrap();
        assert_relative_eq!(r, 10.0, epsilon = 1e-12);
    }

    #[test]
    fn risk_zero_predictor() {
        let data = two_point_data();
        let r = censored_empirical_risk(&[0.0, 0.0], &data, &unit_density(1e-3), false).unwrap();
        // (1/2)(2*1*0.5 + 2*1*0.5) = 1
        assert_relative_eq!(r, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn shift_is_constant_offset() {
        let data = two_point_data();
        let cens = unit_density(1e-3);
        let p1 = [0.1, 0.4];
        let p2 = [0.7, -0.2];
        let d_noshift = censored_empirical_risk(&p1, &data, &cens, false).unwrap()
            - censored_empirical_risk(&p2, &data, &cens, false).unwrap();
        let d_shift = censored_empirical_risk(&p1, &data, &cens, true).unwrap()
            - censored_empirical_risk(&p2, &data, &cens, true).unwrap();
        assert_relative_eq!(d_noshift, d_shift, epsilon = 1e-12);
    }

    #[test]
    fn objective_perturbation_optimality() {
        let data = two_point_data();
        let cens = unit_density(1e-3);
        let spec = KernelSpec::Linear;
        let m = fit(&data, &spec, 0.5, &cens, false).unwrap();
        let base = regularized_objective(&m.alpha, None, &data, &spec, 0.5, &cens).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..1000 {
            let cand: Vec<f64> = m
                .alpha
                .iter()
                .map(|a| a + rng.random_range(-0.5..0.5))
                .collect();
            let obj = regularized_objective(&cand, None, &data, &spec, 0.5, &cens).unwrap();
            assert!(base <= obj + 1e-10);
        }
    }

    #[test]
    fn objective_linear_in_lambda() {
        let data = random_instance(8, 2, 2);
        let cens = unit_density(1e-3);
        let spec = KernelSpec::rbf(0.9).unwrap();
        let alpha: Vec<f64> = (0..8).map(|i| 0.1 * i as f64 - 0.3).collect();
        let o1 = regularized_objective(&alpha, None, &data, &spec, 0.02, &cens).unwrap();
        let o2 = regularized_objective(&alpha, None, &data, &spec, 0.2, &cens).unwrap();
        // regularization term scales exactly with lambda
        let k = gram_matrix(&spec, data.covariates()).unwrap();
        let a = DVector::from_vec(alpha.clone());
        let quad = a.dot(&(&k * &a));
        assert_relative_eq!(o2 - o1, (0.2 - 0.02) * quad, epsilon = 1e-12);
    }

    #[test]
    fn predict_dimension_mismatch() {
        let m = fit(&two_point_data(), &KernelSpec::Linear, 0.5, &unit_density(1e-3), false).unwrap();
        assert!(predict(&m, &[vec![1.0, 2.0]]).is_err());
    }

    #[test]
    fn dataset_validation() {
        assert!(Dataset::new(vec![], vec![], vec![], 1.0).is_err());
        assert!(Dataset::new(vec![vec![1.0]], vec![2.0], vec![0], 1.0).is_err());
        assert!(Dataset::new(vec![vec![1.0]], vec![0.5], vec![2], 1.0).is_err());
        assert!(Dataset::new(vec![vec![1.0], vec![1.0, 2.0]], vec![0.5, 0.5], vec![0, 0], 1.0).is_err());
    }
}
