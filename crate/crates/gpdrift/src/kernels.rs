//! Noise models: covariance functions, increment covariance matrices, and
//! the kernel densities `K(s,t) = d^2 cov / ds dt` used by the integral
//! operators for `H > 1/2`.

use crate::error::{Error, Result};
use crate::grid::TimeGrid;
use crate::linalg::{cholesky_jittered, Cholesky};

/// The centered Gaussian noise driving the observed process.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NoiseModel {
    /// Standard Wiener process.
    Wiener,
    /// Fractional Brownian motion with Hurst index `h`.
    Fbm { h: f64 },
    /// Sub-fractional Brownian motion with Hurst index `h`.
    SubFbm { h: f64 },
    /// Independent sum of a Wiener process and an fBm.
    MixedBmFbm { h: f64 },
    /// Independent sum of two fBms, `h1 < h2`.
    TwoFbm { h1: f64, h2: f64 },
}

fn check_hurst(h: f64) -> Result<()> {
    if h > 0.0 && h < 1.0 {
        Ok(())
    } else {
        Err(Error::Parameter(format!(
            "Hurst parameter must lie in (0, 1), got {h}"
        )))
    }
}

impl NoiseModel {
    pub fn validate(&self) -> Result<()> {
        match *self {
            NoiseModel::Wiener => Ok(()),
            NoiseModel::Fbm { h } | NoiseModel::SubFbm { h } | NoiseModel::MixedBmFbm { h } => {
                check_hurst(h)
            }
            NoiseModel::TwoFbm { h1, h2 } => {
                check_hurst(h1)?;
                check_hurst(h2)?;
                if h1 < h2 {
                    Ok(())
                } else {
                    Err(Error::Parameter(format!(
                        "two-fBm model requires H1 < H2, got H1={h1}, H2={h2}"
                    )))
                }
            }
        }
    }

    /// Covariance `E[B_s B_t]`.
    pub fn cov(&self, s: f64, t: f64) -> Result<f64> {
        self.validate()?;
        if s < 0.0 || t < 0.0 {
            return Err(Error::Parameter(format!(
                "covariance arguments must be nonnegative, got ({s}, {t})"
            )));
        }
        Ok(match *self {
            NoiseModel::Wiener => s.min(t),
            NoiseModel::Fbm { h } => fbm_cov(h, s, t),
            NoiseModel::SubFbm { h } => {
                (2.0 * t.powf(2.0 * h) + 2.0 * s.powf(2.0 * h)
                    - (t - s).abs().powf(2.0 * h)
                    - (t + s).powf(2.0 * h))
                    / 2.0
            }
            NoiseModel::MixedBmFbm { h } => s.min(t) + fbm_cov(h, s, t),
            NoiseModel::TwoFbm { h1, h2 } => fbm_cov(h1, s, t) + fbm_cov(h2, s, t),
        })
    }

    /// `Var(B_t)`.
    pub fn variance(&self, t: f64) -> Result<f64> {
        self.cov(t, t)
    }

    /// Kernel density `K(s,t)` of the covariance operator for the fBm-type
    /// components; requires the relevant Hurst parameters above 1/2. The
    /// identity component of the mixed model is excluded (operators handle it
    /// separately, never a density).
    pub fn kernel_density(&self, s: f64, t: f64) -> Result<f64> {
        self.validate()?;
        if s == t {
            return Err(Error::DiagonalSingularity(s));
        }
        match *self {
            NoiseModel::Wiener => Err(Error::Unsupported(
                "Wiener noise has no kernel density".into(),
            )),
            NoiseModel::Fbm { h } | NoiseModel::MixedBmFbm { h } => fbm_kernel(h, s, t),
            NoiseModel::SubFbm { h } => {
                let base = fbm_kernel(h, s, t)?;
                Ok(base - h * (2.0 * h - 1.0) * (t + s).powf(2.0 * h - 2.0))
            }
            NoiseModel::TwoFbm { h1, h2 } => Ok(fbm_kernel(h1, s, t)? + fbm_kernel(h2, s, t)?),
        }
    }

    /// Covariance matrix of noise increments on the grid (`t_0 = 0` implicit).
    pub fn increment_covariance(&self, grid: &TimeGrid) -> Result<IncrementCovariance> {
        self.validate()?;
        let nodes = grid.nodes();
        let n = nodes.len();
        let mut matrix = vec![0.0; n * n];
        // cov(B_{t_i}-B_{t_{i-1}}, B_{t_j}-B_{t_{j-1}})
        // = c(t_i,t_j) - c(t_i,t_{j-1}) - c(t_{i-1},t_j) + c(t_{i-1},t_{j-1})
        let node = |k: isize| if k < 0 { 0.0 } else { nodes[k as usize] };
        for i in 0..n {
            for j in 0..=i {
                let (ti, tim) = (node(i as isize), node(i as isize - 1));
                let (tj, tjm) = (node(j as isize), node(j as isize - 1));
                let v = self.cov(ti, tj)? - self.cov(ti, tjm)? - self.cov(tim, tj)?
                    + self.cov(tim, tjm)?;
                matrix[i * n + j] = v;
                matrix[j * n + i] = v;
            }
        }
        Ok(IncrementCovariance {
            matrix,
            grid: grid.clone(),
            model: *self,
        })
    }
}

fn fbm_cov(h: f64, s: f64, t: f64) -> f64 {
    0.5 * (t.abs().powf(2.0 * h) + s.abs().powf(2.0 * h) - (t - s).abs().powf(2.0 * h))
}

fn fbm_kernel(h: f64, s: f64, t: f64) -> Result<f64> {
    if h <= 0.5 {
        return Err(Error::Unsupported(format!(
            "kernel density requires H > 1/2, got H={h}"
        )));
    }
    Ok(h * (2.0 * h - 1.0) * (t - s).abs().powf(2.0 * h - 2.0))
}

/// Covariance matrix of the increment vector `Delta B^(N)`.
#[derive(Debug, Clone)]
pub struct IncrementCovariance {
    /// Row-major symmetric `N x N` matrix.
    pub matrix: Vec<f64>,
    pub grid: TimeGrid,
    pub model: NoiseModel,
}

impl IncrementCovariance {
    pub fn n(&self) -> usize {
        self.grid.len()
    }

    /// Cholesky factor under the jitter policy.
    pub fn cholesky(&self) -> Result<Cholesky> {
        cholesky_jittered(&self.matrix, self.n())
    }
}
