//! Exact Gaussian path simulation by Cholesky factorization of the increment
//! covariance, plus conditional refinement onto nested uniform grids.

use crate::error::{Error, Result};
use crate::grid::TimeGrid;
use crate::kernels::NoiseModel;
use crate::linalg::{cholesky_jittered, Cholesky};
use crate::rng;

/// Drift shape `(G, g)` with `G(t) = int_0^t g(s) ds`.
#[derive(Debug, Clone, PartialEq)]
pub enum DriftSpec {
    /// `G(t) = t`, `g = 1`.
    Linear,
    /// `G(t) = t^{alpha+1}`, `g(t) = (alpha+1) t^alpha`, `alpha > -1`.
    Power { alpha: f64 },
    /// `g` sampled on a grid starting at 0; `G` by exact integration of the
    /// piecewise-linear interpolant.
    Tabulated {
        nodes: Vec<f64>,
        g: Vec<f64>,
        big_g: Vec<f64>,
    },
}

impl DriftSpec {
    pub fn power(alpha: f64) -> Result<Self> {
        if alpha > -1.0 {
            Ok(DriftSpec::Power { alpha })
        } else {
            Err(Error::Parameter(format!(
                "power drift requires alpha > -1, got {alpha}"
            )))
        }
    }

    pub fn tabulated(nodes: Vec<f64>, g: Vec<f64>) -> Result<Self> {
        if nodes.len() != g.len() || nodes.len() < 2 {
            return Err(Error::Parameter(
                "tabulated drift needs matching node/value vectors of length >= 2".into(),
            ));
        }
        if nodes[0] != 0.0 {
            return Err(Error::Parameter(
                "tabulated drift grid must start at t = 0".into(),
            ));
        }
        for w in nodes.windows(2) {
            if !(w[1] > w[0]) {
                return Err(Error::Parameter(
                    "tabulated drift grid must be strictly increasing".into(),
                ));
            }
        }
        let mut big_g = vec![0.0; nodes.len()];
        for k in 1..nodes.len() {
            big_g[k] = big_g[k - 1] + 0.5 * (g[k] + g[k - 1]) * (nodes[k] - nodes[k - 1]);
        }
        Ok(DriftSpec::Tabulated { nodes, g, big_g })
    }

    /// `g(t)`.
    pub fn g(&self, t: f64) -> f64 {
        match self {
            DriftSpec::Linear => 1.0,
            DriftSpec::Power { alpha } => (alpha + 1.0) * t.powf(*alpha),
            DriftSpec::Tabulated { nodes, g, .. } => interp(nodes, g, t),
        }
    }

    /// `G(t)`.
    pub fn big_g(&self, t: f64) -> f64 {
        match self {
            DriftSpec::Linear => t,
            DriftSpec::Power { alpha } => t.powf(alpha + 1.0),
            DriftSpec::Tabulated { nodes, g, big_g } => {
                // integrate the linear interpolant exactly up to t
                let k = match nodes.binary_search_by(|x| x.partial_cmp(&t).unwrap()) {
                    Ok(k) => return big_g[k],
                    Err(k) => k,
                };
                if k == 0 {
                    return 0.0;
                }
                let k = k.min(nodes.len() - 1);
                let (t0, t1) = (nodes[k - 1], nodes[k]);
                let dt = t - t0;
                let gt = g[k - 1] + (g[k] - g[k - 1]) * dt / (t1 - t0);
                big_g[k - 1] + 0.5 * (g[k - 1] + gt) * dt
            }
        }
    }

    /// Drift increments `G(t_k) - G(t_{k-1})` on an observation grid.
    pub fn increments(&self, grid: &TimeGrid) -> Vec<f64> {
        let mut prev = 0.0;
        grid.nodes()
            .iter()
            .map(|&t| {
                let v = self.big_g(t);
                let d = v - prev;
                prev = v;
                d
            })
            .collect()
    }
}

fn interp(xs: &[f64], ys: &[f64], t: f64) -> f64 {
    if t <= xs[0] {
        return ys[0];
    }
    if t >= *xs.last().unwrap() {
        return *ys.last().unwrap();
    }
    let k = xs.partition_point(|&x| x < t);
    let (x0, x1) = (xs[k - 1], xs[k]);
    ys[k - 1] + (ys[k] - ys[k - 1]) * (t - x0) / (x1 - x0)
}

/// One simulated trajectory of `X_t = theta G(t) + B_t` on a grid.
#[derive(Debug, Clone)]
pub struct SamplePath {
    pub grid: TimeGrid,
    pub values: Vec<f64>,
    pub theta_true: Option<f64>,
    pub seed: u64,
    pub model: NoiseModel,
    pub drift: DriftSpec,
}

impl SamplePath {
    /// Observed increments `X_{t_k} - X_{t_{k-1}}` with `X_0 = 0`.
    pub fn increments(&self) -> Vec<f64> {
        let mut prev = 0.0;
        self.values
            .iter()
            .map(|&x| {
                let d = x - prev;
                prev = x;
                d
            })
            .collect()
    }

    /// Restriction to observation times `<= t_stop`.
    pub fn truncate(&self, t_stop: f64) -> Result<SamplePath> {
        let keep = self.grid.nodes().partition_point(|&t| t <= t_stop);
        if keep == 0 {
            return Err(Error::Parameter(format!(
                "no observations at or before t = {t_stop}"
            )));
        }
        Ok(SamplePath {
            grid: TimeGrid::new(self.grid.nodes()[..keep].to_vec())?,
            values: self.values[..keep].to_vec(),
            theta_true: self.theta_true,
            seed: self.seed,
            model: self.model,
            drift: self.drift.clone(),
        })
    }
}

/// Simulator with a cached Cholesky factor for replicated sampling on a
/// fixed (model, grid) pair.
pub struct PathSampler {
    model: NoiseModel,
    grid: TimeGrid,
    chol: Cholesky,
}

impl PathSampler {
    pub fn new(model: NoiseModel, grid: &TimeGrid) -> Result<Self> {
        let cov = model.increment_covariance(grid)?;
        let chol = cov.cholesky()?;
        Ok(Self {
            model,
            grid: grid.clone(),
            chol,
        })
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    /// Noise increments `Delta B = L z` from a dedicated stream.
    pub fn noise_increments(&self, seed: u64) -> Vec<f64> {
        let mut rng = rng::stream_from_seed(seed);
        let z = rng::standard_normals(&mut rng, self.grid.len());
        self.chol.mul_lower(&z)
    }

    pub fn sample(&self, drift: &DriftSpec, theta: f64, seed: u64) -> SamplePath {
        let db = self.noise_increments(seed);
        let mut values = Vec::with_capacity(self.grid.len());
        let mut b = 0.0;
        for (k, &t) in self.grid.nodes().iter().enumerate() {
            b += db[k];
            values.push(theta * drift.big_g(t) + b);
        }
        SamplePath {
            grid: self.grid.clone(),
            values,
            theta_true: Some(theta),
            seed,
            model: self.model,
            drift: drift.clone(),
        }
    }
}

/// Generate one path. For replicated runs build a [`PathSampler`] once.
pub fn sample_path(
    model: NoiseModel,
    drift: &DriftSpec,
    theta: f64,
    grid: &TimeGrid,
    seed: u64,
) -> Result<SamplePath> {
    Ok(PathSampler::new(model, grid)?.sample(drift, theta, seed))
}

/// Conditional refinement plan: fine increments, except the last within each
/// coarse cell, are sampled from their Gaussian law conditional on the
/// observed coarse increments; the coarse-node values are carried over
/// verbatim so the restriction is bit-exact.
pub struct RefinePlan {
    model: NoiseModel,
    n_coarse: usize,
    factor: usize,
    t_max: f64,
    fine_grid: TimeGrid,
    /// (M - N) x N gain matrix `C_FS A^{-1}` mapping coarse noise increments
    /// to the conditional mean of the free fine increments.
    gain: Vec<f64>,
    /// Cholesky factor of the conditional covariance of the free increments.
    chol_free: Cholesky,
}

impl RefinePlan {
    pub fn new(model: NoiseModel, coarse: &TimeGrid, factor: usize) -> Result<Self> {
        if factor < 2 {
            return Err(Error::Parameter("refinement factor must be >= 2".into()));
        }
        if coarse.uniform_step().is_none() {
            return Err(Error::Unsupported(
                "conditional refinement supports uniform grids only".into(),
            ));
        }
        let n = coarse.len();
        let m = n * factor;
        let t_max = coarse.t_max();
        let fine_grid = TimeGrid::uniform(t_max, m);
        let cov = model.increment_covariance(&fine_grid)?;
        let c = &cov.matrix;

        // Aggregate to coarse increments: A = S C S^T, B = C S^T.
        let mut b_full = vec![0.0; m * n]; // (C S^T)_{i,k}
        for i in 0..m {
            for k in 0..n {
                let mut s = 0.0;
                for j in k * factor..(k + 1) * factor {
                    s += c[i * m + j];
                }
                b_full[i * n + k] = s;
            }
        }
        let mut a = vec![0.0; n * n];
        for k in 0..n {
            for l in 0..n {
                let mut s = 0.0;
                for i in k * factor..(k + 1) * factor {
                    s += b_full[i * n + l];
                }
                a[k * n + l] = s;
            }
        }
        let chol_a = cholesky_jittered(&a, n)?;

        // Free rows: all fine increments except the last in each coarse cell.
        let free: Vec<usize> = (0..m).filter(|i| (i + 1) % factor != 0).collect();
        let nf = free.len();

        // gain = C_FS A^{-1}: solve A x = b_row for each free row.
        let mut gain = vec![0.0; nf * n];
        for (r, &i) in free.iter().enumerate() {
            let row = &b_full[i * n..(i + 1) * n];
            let x = chol_a.solve(row);
            gain[r * n..(r + 1) * n].copy_from_slice(&x);
        }

        // Sigma_F = C_FF - gain * C_SF.
        let mut sigma = vec![0.0; nf * nf];
        for (r, &i) in free.iter().enumerate() {
            for (s_idx, &j) in free.iter().enumerate() {
                let mut v = c[i * m + j];
                for k in 0..n {
                    v -= gain[r * n + k] * b_full[j * n + k];
                }
                sigma[r * nf + s_idx] = v;
            }
        }
        // enforce exact symmetry before factoring
        for r in 0..nf {
            for s_idx in 0..r {
                let v = 0.5 * (sigma[r * nf + s_idx] + sigma[s_idx * nf + r]);
                sigma[r * nf + s_idx] = v;
                sigma[s_idx * nf + r] = v;
            }
        }
        let chol_free = cholesky_jittered(&sigma, nf)?;

        Ok(Self {
            model,
            n_coarse: n,
            factor,
            t_max,
            fine_grid,
            gain,
            chol_free,
        })
    }

    pub fn fine_grid(&self) -> &TimeGrid {
        &self.fine_grid
    }

    /// Extend a coarse path to the fine grid on the same realization.
    pub fn extend(&self, path: &SamplePath, seed: u64) -> Result<SamplePath> {
        let n = self.n_coarse;
        let factor = self.factor;
        if path.grid.len() != n || (path.grid.t_max() - self.t_max).abs() > 1e-12 * self.t_max {
            return Err(Error::GridMismatch(
                "path grid does not match the refinement plan".into(),
            ));
        }
        if path.model != self.model {
            return Err(Error::GridMismatch("path model differs from plan".into()));
        }
        let theta = path.theta_true.ok_or_else(|| {
            Error::Unsupported("conditional refinement requires theta_true on the path".into())
        })?;

        // Coarse noise increments d = Delta X - theta Delta G.
        let dg = path.drift.increments(&path.grid);
        let mut d = Vec::with_capacity(n);
        let mut prev = 0.0;
        for (k, &x) in path.values.iter().enumerate() {
            d.push(x - prev - theta * dg[k]);
            prev = x;
        }

        let nf = n * (factor - 1);
        let mut rng = rng::stream_from_seed(rng::derive_seed(seed, 0x5245_4649_4e45));
        let z = rng::standard_normals(&mut rng, nf);
        let colored = self.chol_free.mul_lower(&z);

        // Free fine noise increments: conditional mean + colored noise.
        let mut db_free = vec![0.0; nf];
        for r in 0..nf {
            let mut mu = 0.0;
            for k in 0..n {
                mu += self.gain[r * n + k] * d[k];
            }
            db_free[r] = mu + colored[r];
        }

        // Assemble fine values; coarse nodes are assigned verbatim.
        let fine_nodes = self.fine_grid.nodes();
        let mut values = vec![0.0; n * factor];
        for k in 0..n {
            let x_left = if k == 0 { 0.0 } else { path.values[k - 1] };
            let g_left = if k == 0 {
                0.0
            } else {
                path.drift.big_g(path.grid.nodes()[k - 1])
            };
            let mut noise_acc = 0.0;
            for q in 0..factor {
                let idx = k * factor + q;
                if q == factor - 1 {
                    values[idx] = path.values[k];
                } else {
                    noise_acc += db_free[k * (factor - 1) + q];
                    let t = fine_nodes[idx];
                    values[idx] = x_left + theta * (path.drift.big_g(t) - g_left) + noise_acc;
                }
            }
        }

        Ok(SamplePath {
            grid: self.fine_grid.clone(),
            values,
            theta_true: path.theta_true,
            seed,
            model: path.model,
            drift: path.drift.clone(),
        })
    }
}

/// One-shot conditional refinement of a uniform-grid path.
pub fn refine_path(path: &SamplePath, factor: usize, seed: u64) -> Result<SamplePath> {
    RefinePlan::new(path.model, &path.grid, factor)?.extend(path, seed)
}
