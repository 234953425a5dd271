//! Drift estimators: the exact discrete maximum-likelihood estimator built
//! from the increment covariance, and the continuous-scheme estimator driven
//! by a weight function.

use crate::error::{Error, Result};
use crate::kernels::{IncrementCovariance, NoiseModel};
use crate::simulate::SamplePath;
use crate::weights::WeightFunction;

/// Which estimator produced a result.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scheme {
    Discrete,
    Continuous,
}

impl Scheme {
    pub fn as_str(&self) -> &'static str {
        match self {
            Scheme::Discrete => "discrete",
            Scheme::Continuous => "continuous",
        }
    }
}

/// Point estimate plus the model-implied variance of the estimator.
#[derive(Debug, Clone, Copy)]
pub struct EstimateResult {
    pub theta_hat: f64,
    /// `Var(theta_hat)`; the reciprocal of the Fisher information.
    pub variance: f64,
    pub scheme: Scheme,
}

impl EstimateResult {
    /// Standardized error `(theta_hat - theta) / sqrt(variance)`; under the
    /// model this is standard normal for any sample size.
    pub fn z_score(&self, theta_true: f64) -> f64 {
        (self.theta_hat - theta_true) / self.variance.sqrt()
    }
}

/// Discrete MLE from observed increments:
/// `theta_hat = (dG' Gamma^{-1} dX) / (dG' Gamma^{-1} dG)`, with variance
/// `1 / (dG' Gamma^{-1} dG)`. Exactly unbiased and normal for any grid.
pub fn estimate_discrete(path: &SamplePath, cov: &IncrementCovariance) -> Result<EstimateResult> {
    if path.grid.nodes() != cov.grid.nodes() {
        return Err(Error::GridMismatch(
            "path and covariance are on different grids".into(),
        ));
    }
    if path.model != cov.model {
        return Err(Error::GridMismatch(format!(
            "path model {:?} does not match covariance model {:?}",
            path.model, cov.model
        )));
    }
    let chol = cov.cholesky()?;
    estimate_discrete_prefactored(path, cov, &chol)
}

/// [`estimate_discrete`] with a caller-supplied Cholesky factor of the
/// increment covariance, for replicated estimation on a fixed grid.
pub fn estimate_discrete_prefactored(
    path: &SamplePath,
    cov: &IncrementCovariance,
    chol: &crate::linalg::Cholesky,
) -> Result<EstimateResult> {
    if path.grid.nodes() != cov.grid.nodes() {
        return Err(Error::GridMismatch(
            "path and covariance are on different grids".into(),
        ));
    }
    if path.model != cov.model {
        return Err(Error::GridMismatch(format!(
            "path model {:?} does not match covariance model {:?}",
            path.model, cov.model
        )));
    }
    let dg = path.drift.increments(&path.grid);
    let w_g = chol.solve(&dg);
    let info: f64 = dg.iter().zip(&w_g).map(|(a, b)| a * b).sum();
    if !(info > 0.0) {
        return Err(Error::Degeneracy { pivot: info });
    }
    // theta_hat = (w' dX) / (w' dG) with w = Gamma^{-1} dG; the ratio is
    // invariant under rescaling w, so normalize by the last weight and sum
    // by parts. A constant weight vector (Wiener on a uniform grid) then
    // telescopes exactly instead of accumulating per-increment rounding.
    let scale = w_g[w_g.len() - 1];
    let w_n: Vec<f64> = if scale != 0.0 {
        w_g.iter().map(|v| v / scale).collect()
    } else {
        w_g.clone()
    };
    let big_g: Vec<f64> = path
        .grid
        .nodes()
        .iter()
        .map(|&t| path.drift.big_g(t))
        .collect();
    let num = weighted_increment_sum(&w_n, &path.values);
    let den = weighted_increment_sum(&w_n, &big_g);
    Ok(EstimateResult {
        theta_hat: num / den,
        variance: 1.0 / info,
        scheme: Scheme::Discrete,
    })
}

/// `sum_k w_k (x_k - x_{k-1})` with `x_0 = 0`, summed by parts:
/// `w_n x_n - sum_{k<n} x_k (w_{k+1} - w_k)`. Identical in exact arithmetic,
/// but avoids re-rounding every increment when the weights are flat.
fn weighted_increment_sum(w: &[f64], x: &[f64]) -> f64 {
    let n = x.len();
    let mut s = w[n - 1] * x[n - 1];
    for k in 0..n - 1 {
        s -= x[k] * (w[k + 1] - w[k]);
    }
    s
}

/// Gaussian log-likelihood of the increments as a function of `theta`
/// (up to the theta-free constant):
/// `theta * dG' Gamma^{-1} dX - theta^2 / 2 * dG' Gamma^{-1} dG`.
pub fn log_likelihood_discrete(
    path: &SamplePath,
    cov: &IncrementCovariance,
    theta: f64,
) -> Result<f64> {
    let dx = path.increments();
    let dg = path.drift.increments(&path.grid);
    let chol = cov.cholesky()?;
    let w_x = chol.solve(&dx);
    let w_g = chol.solve(&dg);
    let num: f64 = dg.iter().zip(&w_x).map(|(a, b)| a * b).sum();
    let info: f64 = dg.iter().zip(&w_g).map(|(a, b)| a * b).sum();
    Ok(theta * num - 0.5 * theta * theta * info)
}

/// Continuous-scheme estimator: `theta_hat = int h dX / int g h`, with the
/// stochastic integral approximated by `sum_i h(midpoint_i) dX_i` on a
/// uniform grid matching the weight's quadrature grid.
pub fn estimate_continuous(path: &SamplePath, weight: &WeightFunction) -> Result<EstimateResult> {
    let n = weight.h.grid.n;
    if path.grid.len() != n {
        return Err(Error::GridMismatch(format!(
            "path has {} increments, weight grid has {} cells",
            path.grid.len(),
            n
        )));
    }
    let step = path.grid.uniform_step().ok_or_else(|| {
        Error::GridMismatch("continuous scheme requires a uniform observation grid".into())
    })?;
    let dx_cell = weight.h.grid.dx();
    if (step - dx_cell).abs() > 1e-12 * dx_cell.max(1.0) {
        return Err(Error::GridMismatch(format!(
            "grid step {step} does not match weight cell width {dx_cell}"
        )));
    }
    if path.model != weight.model {
        return Err(Error::GridMismatch(format!(
            "path model {:?} does not match weight model {:?}",
            path.model, weight.model
        )));
    }
    let num = weighted_increment_sum(&weight.h.values, &path.values);
    Ok(EstimateResult {
        theta_hat: num / weight.denom,
        variance: 1.0 / weight.denom,
        scheme: Scheme::Continuous,
    })
}

/// Consistency certificate `Var(B_t) / G(t)^2`: the estimator is consistent
/// as the horizon grows iff this ratio tends to zero.
pub fn consistency_diagnostic(
    model: &NoiseModel,
    drift: &crate::simulate::DriftSpec,
    t: f64,
) -> Result<f64> {
    if !(t > 0.0) {
        return Err(Error::Parameter(format!("need t > 0, got {t}")));
    }
    let g = drift.big_g(t);
    if g == 0.0 {
        return Err(Error::Parameter(format!(
            "consistency ratio undefined: G({t}) = 0"
        )));
    }
    Ok(model.variance(t)? / (g * g))
}

/// Summary of a strong-consistency diagnostic: estimates along a single
/// trajectory at growing horizons and the decay rate of the error.
#[derive(Debug, Clone)]
pub struct ConsistencyDiagnostic {
    pub horizons: Vec<f64>,
    pub estimates: Vec<f64>,
    pub variances: Vec<f64>,
    /// Least-squares slope of `log Var(theta_hat)` against `log T`.
    pub variance_slope: f64,
}

/// Discrete-scheme estimates of one nested trajectory observed at horizons
/// `T_1 < T_2 < ...`; the variance decay exponent is the information growth
/// rate (`-1` for Wiener, `2H - 2` for fBm-type models with linear drift).
pub fn nested_horizon_estimates(
    path: &SamplePath,
    horizons: &[f64],
) -> Result<ConsistencyDiagnostic> {
    if horizons.is_empty() {
        return Err(Error::Parameter("need at least one horizon".into()));
    }
    let mut estimates = Vec::with_capacity(horizons.len());
    let mut variances = Vec::with_capacity(horizons.len());
    for &t in horizons {
        let sub = path.truncate(t)?;
        let cov = sub.model.increment_covariance(&sub.grid)?;
        let est = estimate_discrete(&sub, &cov)?;
        estimates.push(est.theta_hat);
        variances.push(est.variance);
    }
    let logs_t: Vec<f64> = horizons.iter().map(|t| t.ln()).collect();
    let logs_v: Vec<f64> = variances.iter().map(|v| v.ln()).collect();
    let variance_slope = crate::stats::slope(&logs_t, &logs_v);
    Ok(ConsistencyDiagnostic {
        horizons: horizons.to_vec(),
        estimates,
        variances,
        variance_slope,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::TimeGrid;
    use crate::kernels::NoiseModel;
    use crate::rng::derive_seed;
    use crate::simulate::{sample_path, DriftSpec, PathSampler};
    use crate::stats::{ks_critical_1pct, ks_statistic_standard_normal, mean_var};
    use crate::weights::{weight_fbm_linear, weight_wiener_linear};

    fn wiener_path(theta: f64, t_max: f64, n: usize, seed: u64) -> SamplePath {
        sample_path(
            NoiseModel::Wiener,
            &DriftSpec::Linear,
            theta,
            &TimeGrid::uniform(t_max, n),
            seed,
        )
        .unwrap()
    }

    #[test]
    fn wiener_discrete_mle_is_terminal_value_over_t() {
        // independent increments make theta_hat = X_T / T exactly
        let path = wiener_path(1.5, 2.0, 64, 7);
        let cov = NoiseModel::Wiener.increment_covariance(&path.grid).unwrap();
        let est = estimate_discrete(&path, &cov).unwrap();
        let x_t = *path.values.last().unwrap();
        assert!((est.theta_hat - x_t / 2.0).abs() < 1e-12);
        assert!((est.variance - 0.5).abs() < 1e-12);
    }

    #[test]
    fn noise_free_path_recovers_theta_exactly() {
        let theta = -2.25;
        let grid = TimeGrid::uniform(1.0, 32);
        let model = NoiseModel::Fbm { h: 0.7 };
        let drift = DriftSpec::Linear;
        let values: Vec<f64> = grid.nodes().iter().map(|t| theta * t).collect();
        let path = SamplePath {
            grid: grid.clone(),
            values,
            theta_true: Some(theta),
            seed: 0,
            model: model.clone(),
            drift,
        };
        let cov = model.increment_covariance(&grid).unwrap();
        let est = estimate_discrete(&path, &cov).unwrap();
        assert!((est.theta_hat - theta).abs() < 1e-10, "{}", est.theta_hat);
    }

    #[test]
    fn mle_maximizes_log_likelihood() {
        let path = wiener_path(0.8, 1.0, 32, 11);
        let cov = NoiseModel::Wiener.increment_covariance(&path.grid).unwrap();
        let est = estimate_discrete(&path, &cov).unwrap();
        let at = |t| log_likelihood_discrete(&path, &cov, t).unwrap();
        let l0 = at(est.theta_hat);
        for d in [1e-3, 1e-2, 0.1] {
            assert!(at(est.theta_hat + d) < l0);
            assert!(at(est.theta_hat - d) < l0);
        }
        // curvature equals minus the Fisher information
        let d = 1e-3;
        let second = (at(est.theta_hat + d) - 2.0 * l0 + at(est.theta_hat - d)) / (d * d);
        assert!((second + 1.0 / est.variance).abs() < 1e-4 / est.variance);
    }

    #[test]
    fn scale_equivariance_in_theta() {
        // same noise seed, shifted drift: theta_hat shifts by exactly the
        // same amount (estimator is linear in the observations)
        let grid = TimeGrid::uniform(1.0, 48);
        let model = NoiseModel::Fbm { h: 0.65 };
        let cov = model.increment_covariance(&grid).unwrap();
        let a = sample_path(model, &DriftSpec::Linear, 1.0, &grid, 99).unwrap();
        let b = sample_path(model, &DriftSpec::Linear, 3.5, &grid, 99).unwrap();
        let ea = estimate_discrete(&a, &cov).unwrap();
        let eb = estimate_discrete(&b, &cov).unwrap();
        assert!((eb.theta_hat - ea.theta_hat - 2.5).abs() < 1e-9);
        assert!((eb.variance - ea.variance).abs() < 1e-15);
    }

    #[test]
    fn information_grows_on_nested_grids() {
        // refining the observation grid can only add information
        let model = NoiseModel::Fbm { h: 0.7 };
        let mut prev = 0.0;
        for n in [16usize, 32, 64] {
            let grid = TimeGrid::uniform(1.0, n);
            let cov = model.increment_covariance(&grid).unwrap();
            let path = sample_path(model, &DriftSpec::Linear, 1.0, &grid, 5).unwrap();
            let info = 1.0 / estimate_discrete(&path, &cov).unwrap().variance;
            assert!(info >= prev - 1e-12, "n={n}: {info} < {prev}");
            prev = info;
        }
    }

    #[test]
    fn discrete_mle_unbiased_normal_mc() {
        let theta = 2.0;
        let model = NoiseModel::Fbm { h: 0.7 };
        let grid = TimeGrid::uniform(1.0, 16);
        let sampler = PathSampler::new(model, &grid).unwrap();
        let cov = model.increment_covariance(&grid).unwrap();
        let reps = 4000usize;
        let mut z = Vec::with_capacity(reps);
        for i in 0..reps {
            let noise = sampler
                .sample(&DriftSpec::Linear, theta, derive_seed(321, i as u64));
            let est = estimate_discrete(&noise, &cov).unwrap();
            z.push(est.z_score(theta));
        }
        let (mean, var) = mean_var(&z);
        assert!(mean.abs() < 4.0 / (reps as f64).sqrt(), "mean {mean}");
        assert!((var - 1.0).abs() < 0.1, "var {var}");
        let ks = ks_statistic_standard_normal(&mut z);
        assert!(ks < ks_critical_1pct(reps), "ks {ks}");
    }

    #[test]
    fn continuous_wiener_matches_discrete() {
        // with h = 1 the continuous scheme is X_T / T, same as discrete
        let path = wiener_path(1.2, 2.0, 128, 13);
        let wf = weight_wiener_linear(2.0, 128).unwrap();
        let est = estimate_continuous(&path, &wf).unwrap();
        let cov = NoiseModel::Wiener.increment_covariance(&path.grid).unwrap();
        let d = estimate_discrete(&path, &cov).unwrap();
        assert!((est.theta_hat - d.theta_hat).abs() < 1e-12);
        assert!((est.variance - d.variance).abs() < 1e-12);
    }

    #[test]
    fn continuous_fbm_close_to_discrete() {
        let model = NoiseModel::Fbm { h: 0.7 };
        let n = 512usize;
        let grid = TimeGrid::uniform(1.0, n);
        let path = sample_path(model, &DriftSpec::Linear, 2.0, &grid, 77).unwrap();
        let wf = weight_fbm_linear(0.7, 1.0, n).unwrap();
        let c = estimate_continuous(&path, &wf).unwrap();
        let cov = model.increment_covariance(&grid).unwrap();
        let d = estimate_discrete(&path, &cov).unwrap();
        assert!(
            (c.theta_hat - d.theta_hat).abs() < 0.2,
            "{} vs {}",
            c.theta_hat,
            d.theta_hat
        );
        // discrete information dominates the continuous-approximation one
        assert!((c.variance / d.variance - 1.0).abs() < 0.1);
    }

    #[test]
    fn grid_mismatch_is_rejected() {
        let path = wiener_path(1.0, 1.0, 64, 3);
        let wf = weight_wiener_linear(1.0, 32).unwrap();
        assert!(matches!(
            estimate_continuous(&path, &wf),
            Err(Error::GridMismatch(_))
        ));
        let cov = NoiseModel::Wiener
            .increment_covariance(&TimeGrid::uniform(1.0, 32))
            .unwrap();
        assert!(matches!(
            estimate_discrete(&path, &cov),
            Err(Error::GridMismatch(_))
        ));
    }

    #[test]
    fn consistency_ratio_values() {
        // Fbm + linear: t^{2H-2}; at H = 0.7, t = 100 this is 100^{-0.6}
        let r = consistency_diagnostic(&NoiseModel::Fbm { h: 0.7 }, &DriftSpec::Linear, 100.0)
            .unwrap();
        assert!((r - 100.0f64.powf(-0.6)).abs() < 1e-12);
        assert!((r - 0.0631).abs() < 1e-4);
        // two-fBm: sum of the component rates
        let r = consistency_diagnostic(
            &NoiseModel::TwoFbm { h1: 0.6, h2: 0.8 },
            &DriftSpec::Linear,
            50.0,
        )
        .unwrap();
        let expect = 50.0f64.powf(2.0 * 0.6 - 2.0) + 50.0f64.powf(2.0 * 0.8 - 2.0);
        assert!((r - expect).abs() < 1e-12);
        // power drift with alpha = H - 1 sits on the consistency boundary:
        // the ratio is constant in t
        let h = 0.7;
        let drift = DriftSpec::power(h - 1.0).unwrap();
        let a = consistency_diagnostic(&NoiseModel::Fbm { h }, &drift, 10.0).unwrap();
        let b = consistency_diagnostic(&NoiseModel::Fbm { h }, &drift, 1000.0).unwrap();
        assert!((a - b).abs() < 1e-12 * a);
    }

    #[test]
    fn continuous_noise_free_recovers_theta() {
        let theta = 1.75;
        let n = 1024usize;
        let grid = TimeGrid::uniform(1.0, n);
        let model = NoiseModel::Fbm { h: 0.7 };
        let values: Vec<f64> = grid.nodes().iter().map(|t| theta * t).collect();
        let path = SamplePath {
            grid,
            values,
            theta_true: Some(theta),
            seed: 0,
            model,
            drift: DriftSpec::Linear,
        };
        let wf = weight_fbm_linear(0.7, 1.0, n).unwrap();
        let est = estimate_continuous(&path, &wf).unwrap();
        // quadrature-level bias only
        assert!(
            (est.theta_hat - theta).abs() / theta < 1e-2,
            "{}",
            est.theta_hat
        );
    }

    #[test]
    fn log_likelihood_zero_at_reference() {
        let path = wiener_path(0.8, 1.0, 32, 11);
        let cov = NoiseModel::Wiener.increment_covariance(&path.grid).unwrap();
        assert_eq!(log_likelihood_discrete(&path, &cov, 0.0).unwrap(), 0.0);
    }

    #[test]
    fn consistency_variance_slope_wiener() {
        // Var = 1/T for the Wiener model: slope of log-variance is -1
        let grid = TimeGrid::uniform(8.0, 256);
        let path = sample_path(NoiseModel::Wiener, &DriftSpec::Linear, 1.0, &grid, 17).unwrap();
        let diag = nested_horizon_estimates(&path, &[1.0, 2.0, 4.0, 8.0]).unwrap();
        assert!((diag.variance_slope + 1.0).abs() < 1e-6, "{}", diag.variance_slope);
        for (v, t) in diag.variances.iter().zip(&diag.horizons) {
            assert!((v - 1.0 / t).abs() < 1e-9);
        }
    }
}
