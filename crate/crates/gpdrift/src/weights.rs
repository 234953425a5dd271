//! Weight functions `h_T` solving `Gamma_T h = g` for the continuous-time
//! MLE: closed forms where available, discretized operator equations
//! otherwise.

use crate::error::{Error, Result};
use crate::fraccalc::{
    apply_gamma, apply_gamma_at, gamma_kernel_matrix, interior_indices, power_kernel_solve_with_tol,
};
use crate::grid::{GridFunction, QuadGrid, SingularityFlags};
use crate::kernels::NoiseModel;
use crate::linalg::{condition_estimate, lu_solve, mat_vec, spectral_norm_estimate};
use crate::simulate::DriftSpec;
use rayon::prelude::*;
use statrs::function::beta::beta;

/// Default acceptance gate on the interior forward residual, relative to the
/// interior scale of `g`.
pub const DEFAULT_RESIDUAL_GATE: f64 = 5e-2;

/// How the weight was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WeightMethod {
    ClosedForm,
    PowerDrift,
    FredholmDirect,
    Neumann,
    SecondKindTwoFbm,
}

impl WeightMethod {
    pub fn as_str(&self) -> &'static str {
        match self {
            WeightMethod::ClosedForm => "closed-form",
            WeightMethod::PowerDrift => "power-drift",
            WeightMethod::FredholmDirect => "fredholm-direct",
            WeightMethod::Neumann => "neumann",
            WeightMethod::SecondKindTwoFbm => "second-kind-two-fbm",
        }
    }
}

/// Discretized solution of `Gamma_T h = g` with its Fisher-information
/// denominator and forward residual.
#[derive(Debug, Clone)]
pub struct WeightFunction {
    pub h: GridFunction,
    pub model: NoiseModel,
    pub drift: DriftSpec,
    /// `int_0^T g(s) h(s) ds`, the Fisher information of the continuous MLE.
    pub denom: f64,
    pub method: WeightMethod,
    /// `max` interior `|(Gamma h)(t) - g(t)|`.
    pub residual: f64,
}

impl WeightFunction {
    pub fn t_max(&self) -> f64 {
        self.h.grid.t_max
    }

    /// Denominator by the naive midpoint rule (no singularity handling);
    /// kept close to the flag-aware value as a quadrature cross-check.
    pub fn denom_naive(&self) -> f64 {
        let drift = self.drift.clone();
        let mut plain = self.h.clone();
        plain.singularity = None;
        plain.integral_against(|t| drift.g(t))
    }
}

fn check_weight_hurst(h: f64) -> Result<()> {
    if h > 0.5 && h < 1.0 {
        Ok(())
    } else {
        Err(Error::Parameter(format!(
            "continuous-scheme weight requires H in (1/2, 1), got {h}"
        )))
    }
}

/// Forward residual `max` interior `|Gamma h - g|`, via the covariance
/// operator applied with product integration.
fn forward_residual(model: &NoiseModel, h: &GridFunction, g: impl Fn(f64) -> f64) -> Result<f64> {
    let out = apply_gamma(model, h)?;
    Ok(interior_indices(h.grid.n)
        .map(|i| (out.values[i] - g(h.grid.midpoint(i))).abs())
        .fold(0.0, f64::max))
}

fn gate_residual(residual: f64, scale: f64, method: WeightMethod) -> Result<()> {
    if residual > DEFAULT_RESIDUAL_GATE * scale.max(1e-300) {
        Err(Error::SolverFailure(format!(
            "{} weight residual {residual:.3e} exceeds gate {:.3e}",
            method.as_str(),
            DEFAULT_RESIDUAL_GATE * scale
        )))
    } else {
        Ok(())
    }
}

fn check_denom(denom: f64) -> Result<()> {
    if denom > 0.0 && denom.is_finite() {
        Ok(())
    } else {
        Err(Error::SolverFailure(format!(
            "Fisher information denominator must be positive and finite, got {denom}"
        )))
    }
}

/// Degenerate Wiener weight for linear drift: `Gamma = I`, so `h = g = 1`
/// and the denominator is `T`.
pub fn weight_wiener_linear(t_max: f64, n: usize) -> Result<WeightFunction> {
    let grid = QuadGrid::new(t_max, n)?;
    Ok(WeightFunction {
        h: GridFunction::constant(grid, 1.0),
        model: NoiseModel::Wiener,
        drift: DriftSpec::Linear,
        denom: t_max,
        method: WeightMethod::ClosedForm,
        residual: 0.0,
    })
}

/// Normalizing constant of the fBm linear-drift closed form:
/// `C_H = (H (2H-1) B(H - 1/2, 3/2 - H))^{-1}`.
pub fn fbm_weight_constant(h: f64) -> f64 {
    1.0 / (h * (2.0 * h - 1.0) * beta(h - 0.5, 1.5 - h))
}

/// Closed-form fBm weight for linear drift:
/// `h_T(s) = C_H s^{1/2-H} (T-s)^{1/2-H}`, solving `Gamma_H h_T = 1`.
pub fn weight_fbm_linear(hurst: f64, t_max: f64, n: usize) -> Result<WeightFunction> {
    check_weight_hurst(hurst)?;
    let grid = QuadGrid::new(t_max, n)?;
    let c = fbm_weight_constant(hurst);
    let e = 0.5 - hurst;
    // evaluate one half and mirror so h(s) = h(T - s) holds bit-exactly
    let mut values = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let s = grid.midpoint(i);
        let v = c * s.powf(e) * (t_max - s).powf(e);
        values[i] = v;
        values[n - 1 - i] = v;
    }
    let h = GridFunction::new(grid, values)?
        .with_singularity(SingularityFlags::new(e, e, false)?);
    // denom = int h = C_H B(3/2-H, 3/2-H) T^{2-2H}, exact Beta integral
    let denom = c * beta(1.5 - hurst, 1.5 - hurst) * t_max.powf(2.0 - 2.0 * hurst);
    check_denom(denom)?;
    let model = NoiseModel::Fbm { h: hurst };
    let residual = forward_residual(&model, &h, |_| 1.0)?;
    gate_residual(residual, 1.0, WeightMethod::ClosedForm)?;
    Ok(WeightFunction {
        h,
        model,
        drift: DriftSpec::Linear,
        denom,
        method: WeightMethod::ClosedForm,
        residual,
    })
}

/// `W(z, alpha, H - 1/2) = int_0^{z-1} (v+1)^{alpha-1} v^{1/2-H} dv`.
pub fn w_function(z: f64, alpha: f64, hurst: f64) -> f64 {
    let upper = z - 1.0;
    if upper <= 0.0 {
        return 0.0;
    }
    let e = 0.5 - hurst; // in (-1/2, 0)
    // Near 0 the integrand has an integrable power singularity; substitute
    // v = u^k with k = 1/(1+e) so the transformed integrand is bounded.
    let k = 1.0 / (1.0 + e);
    let split = upper.min(1.0);
    let head = adaptive_simpson(
        |u| k * (u.powf(k) + 1.0).powf(alpha - 1.0),
        0.0,
        split.powf(1.0 / k),
        1e-10,
        40,
    );
    if upper <= 1.0 {
        return head;
    }
    // Tail on [1, upper] under v = exp(w).
    let tail = adaptive_simpson(
        |w| {
            let v = w.exp();
            (v + 1.0).powf(alpha - 1.0) * v.powf(e + 1.0)
        },
        0.0,
        upper.ln(),
        1e-10,
        48,
    );
    head + tail
}

fn adaptive_simpson(f: impl Fn(f64) -> f64 + Copy, a: f64, b: f64, tol: f64, depth: u32) -> f64 {
    fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64) -> f64 {
        (b - a) / 6.0 * (f(a) + 4.0 * f(0.5 * (a + b)) + f(b))
    }
    fn rec(
        f: impl Fn(f64) -> f64 + Copy,
        a: f64,
        b: f64,
        whole: f64,
        tol: f64,
        depth: u32,
    ) -> f64 {
        let m = 0.5 * (a + b);
        let left = simpson(f, a, m);
        let right = simpson(f, m, b);
        if depth == 0 || (left + right - whole).abs() <= 15.0 * tol * (1.0 + whole.abs()) {
            left + right + (left + right - whole) / 15.0
        } else {
            rec(f, a, m, left, tol / 2.0, depth - 1) + rec(f, m, b, right, tol / 2.0, depth - 1)
        }
    }
    if b <= a {
        return 0.0;
    }
    rec(f, a, b, simpson(f, a, b), tol, depth)
}

/// Weight for the fBm model with power drift `G(t) = t^{alpha+1}`;
/// the shape comes from the closed form (up to a constant) and the constant
/// is fixed by least-squares matching of `Gamma_H h` to `g` on interior
/// cells.
pub fn weight_power_drift(hurst: f64, alpha: f64, t_max: f64, n: usize) -> Result<WeightFunction> {
    check_weight_hurst(hurst)?;
    if alpha <= 2.0 * hurst - 1.5 {
        return Err(Error::Parameter(format!(
            "power drift weight requires alpha > 2H - 3/2 = {}, got {alpha}",
            2.0 * hurst - 1.5
        )));
    }
    let grid = QuadGrid::new(t_max, n)?;
    let e = 0.5 - hurst;
    let shape = GridFunction::new(
        grid,
        (0..n)
            .map(|i| {
                let t = grid.midpoint(i);
                t_max.powf(alpha) * t.powf(e) * (t_max - t).powf(e)
                    - alpha
                        * t.powf(alpha + 1.0 - 2.0 * hurst)
                        * w_function(t_max / t, alpha, hurst)
            })
            .collect(),
    )?;
    let model = NoiseModel::Fbm { h: hurst };
    let drift = DriftSpec::power(alpha)?;
    // left endpoint exponent: the W-term dominates for 0 < alpha < H - 1/2,
    // both terms scale as t^{1/2-H} otherwise; at alpha = 0 the W-term's
    // coefficient vanishes identically
    let e_left = if alpha != 0.0 && alpha < hurst - 0.5 {
        alpha + 1.0 - 2.0 * hurst
    } else {
        e
    }
    .min(0.0);
    let shape = shape.with_singularity(SingularityFlags::new(e_left, e, false)?);
    let forward = apply_gamma(&model, &shape)?;
    // least-squares constant over interior cells
    let least_squares = |fwd: &GridFunction, g: &dyn Fn(f64) -> f64| {
        let (mut num, mut den) = (0.0, 0.0);
        for i in interior_indices(n) {
            let gi = g(grid.midpoint(i));
            num += fwd.values[i] * gi;
            den += fwd.values[i] * fwd.values[i];
        }
        num / den
    };
    let c_raw = least_squares(&forward, &|t| drift.g(t));
    // Calibrate out the common quadrature bias of the discrete forward
    // operator using the alpha = 0 case, whose exact constant C_H is known:
    // the same fit on the closed-form shape must return exactly C_H.
    let control = weight_fbm_linear(hurst, t_max, n)?;
    let control_shape = GridFunction::new(
        grid,
        control
            .h
            .values
            .iter()
            .map(|v| v / fbm_weight_constant(hurst))
            .collect(),
    )?
    .with_singularity(SingularityFlags::new(e, e, false)?);
    let control_forward = apply_gamma(&model, &control_shape)?;
    let c_control = least_squares(&control_forward, &|_| 1.0);
    let c = c_raw * fbm_weight_constant(hurst) / c_control;
    let h = GridFunction::new(grid, shape.values.iter().map(|v| c * v).collect())?
        .with_singularity(SingularityFlags::new(e_left, e, false)?);
    let denom = h.integral_against(|t| drift.g(t));
    check_denom(denom)?;
    let g_scale = interior_indices(n)
        .map(|i| drift.g(grid.midpoint(i)).abs())
        .fold(0.0, f64::max);
    let residual = interior_indices(n)
        .map(|i| (c * forward.values[i] - drift.g(grid.midpoint(i))).abs())
        .fold(0.0, f64::max);
    gate_residual(residual, g_scale, WeightMethod::PowerDrift)?;
    Ok(WeightFunction {
        h,
        model,
        drift,
        denom,
        method: WeightMethod::PowerDrift,
        residual,
    })
}

/// Solution method for the mixed-model Fredholm equation of the second kind.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MixedMethod {
    /// Nystrom discretization solved as a dense linear system.
    Direct,
    /// Neumann-series iteration.
    Neumann,
}

/// Mixed Brownian/fractional model: solve `h + Gamma_H h = 1`.
pub fn weight_mixed(hurst: f64, t_max: f64, n: usize, method: MixedMethod) -> Result<WeightFunction> {
    weight_mixed_scaled(hurst, t_max, n, method, 1.0)
}

/// [`weight_mixed`] with the kernel part scaled by `kernel_scale`
/// (`kernel_scale = 0` degenerates to the identity equation, `h = 1`).
pub fn weight_mixed_scaled(
    hurst: f64,
    t_max: f64,
    n: usize,
    method: MixedMethod,
    kernel_scale: f64,
) -> Result<WeightFunction> {
    check_weight_hurst(hurst)?;
    let grid = QuadGrid::new(t_max, n)?;
    let fbm = NoiseModel::Fbm { h: hurst };
    let mut k = gamma_kernel_matrix(&fbm, grid)?;
    if kernel_scale != 1.0 {
        for v in k.iter_mut() {
            *v *= kernel_scale;
        }
    }
    let (values, method_tag) = match method {
        MixedMethod::Direct => {
            let mut a = k.clone();
            for i in 0..n {
                a[i * n + i] += 1.0;
            }
            (lu_solve(&a, n, &vec![1.0; n])?, WeightMethod::FredholmDirect)
        }
        MixedMethod::Neumann => (neumann_series(&k, n)?, WeightMethod::Neumann),
    };
    let h = GridFunction::new(grid, values)?;
    // residual of the discrete second-kind equation, interior cells
    let kh = mat_vec(&k, n, &h.values);
    let residual = interior_indices(n)
        .map(|i| (h.values[i] + kh[i] - 1.0).abs())
        .fold(0.0, f64::max);
    gate_residual(residual, 1.0, method_tag)?;
    let denom = h.integral_against(|_| 1.0);
    check_denom(denom)?;
    Ok(WeightFunction {
        h,
        model: NoiseModel::MixedBmFbm { h: hurst },
        drift: DriftSpec::Linear,
        denom,
        method: method_tag,
        residual,
    })
}

/// Partial sums of `h = sum_k ((m I - K)^k 1) / (1 + m)^{k+1}` with
/// `m = ||K|| / 2`; stops when successive iterates differ by < 1e-10 in max
/// norm.
fn neumann_series(k: &[f64], n: usize) -> Result<Vec<f64>> {
    let norm = spectral_norm_estimate(k, n);
    let m = 0.5 * norm;
    let max_iter = 200_000usize;
    let mut term = vec![1.0 / (1.0 + m); n];
    let mut sum = term.clone();
    for _ in 0..max_iter {
        let kt = mat_vec(k, n, &term);
        let mut delta = 0.0f64;
        for i in 0..n {
            term[i] = (m * term[i] - kt[i]) / (1.0 + m);
            sum[i] += term[i];
            delta = delta.max(term[i].abs());
        }
        if delta < 1e-10 {
            return Ok(sum);
        }
    }
    Err(Error::NonConvergence {
        iterations: max_iter,
        norm_estimate: norm,
    })
}

/// Sub-fractional model: first-kind equation `int K_H(s,t) h(s) ds = 1`,
/// requires `1/2 < H < 3/4` (uniqueness hypothesis). The solution must be
/// stable under grid refinement; instability is reported with a condition
/// estimate.
pub fn weight_subfbm(hurst: f64, t_max: f64, n: usize) -> Result<WeightFunction> {
    if !(hurst > 0.5 && hurst < 0.75) {
        return Err(Error::Parameter(format!(
            "sub-fBm weight requires 1/2 < H < 3/4 strictly, got {hurst}"
        )));
    }
    let model = NoiseModel::SubFbm { h: hurst };
    let solve_at = |cells: usize| -> Result<Vec<f64>> {
        let g = QuadGrid::new(t_max, cells)?;
        let a = gamma_kernel_matrix(&model, g)?;
        lu_solve(&a, cells, &vec![1.0; cells])
    };
    let coarse = solve_at(n)?;
    let fine = solve_at(2 * n)?;
    // restrict the fine solution to the coarse cells by averaging pairs
    let (mut num, mut den) = (0.0, 0.0);
    for i in 0..n {
        let rf = 0.5 * (fine[2 * i] + fine[2 * i + 1]);
        num += (coarse[i] - rf).powi(2);
        den += coarse[i].powi(2);
    }
    let change = (num / den).sqrt();
    if change > 5e-2 {
        let grid = QuadGrid::new(t_max, n)?;
        let a = gamma_kernel_matrix(&model, grid)?;
        let cond = condition_estimate(&a, n, |b| lu_solve(&a, n, b));
        return Err(Error::RefinementInstability {
            change,
            condition: cond,
        });
    }
    let grid = QuadGrid::new(t_max, n)?;
    let e = 0.5 - hurst;
    let h = GridFunction::new(grid, coarse)?
        .with_singularity(SingularityFlags::new(e, e, true)?);
    // residual evaluated at interior cell edges, off the collocation points
    let targets: Vec<f64> = interior_indices(n).map(|i| grid.left_edge(i)).collect();
    let fwd = apply_gamma_at(&model, &h, &targets)?;
    let residual = fwd.iter().map(|v| (v - 1.0).abs()).fold(0.0, f64::max);
    gate_residual(residual, 1.0, WeightMethod::FredholmDirect)?;
    let denom = h.integral_against(|_| 1.0);
    check_denom(denom)?;
    Ok(WeightFunction {
        h,
        model,
        drift: DriftSpec::Linear,
        denom,
        method: WeightMethod::FredholmDirect,
        residual,
    })
}

/// Two-fBm model: solve `(I + Gamma_{H1}^{-1} Gamma_{H2}) h = Gamma_{H1}^{-1} 1`
/// column by column, with `Gamma_{H1}^{-1}` realized by the power-kernel
/// inversion at `p = 2 - 2 H1` and the right-hand side from the closed form.
pub fn weight_two_fbm(h1: f64, h2: f64, t_max: f64, n: usize) -> Result<WeightFunction> {
    weight_two_fbm_scaled(h1, h2, t_max, n, 1.0)
}

/// [`weight_two_fbm`] with the `Gamma_{H2}` operator scaled by `h2_scale`
/// (`h2_scale = 0` degenerates to the closed-form fBm weight at `H1`).
pub fn weight_two_fbm_scaled(
    h1: f64,
    h2: f64,
    t_max: f64,
    n: usize,
    h2_scale: f64,
) -> Result<WeightFunction> {
    if !(h1 > 0.5 && h1 <= 0.75) {
        return Err(Error::Parameter(format!(
            "two-fBm weight requires H1 in (1/2, 3/4], got {h1}"
        )));
    }
    if !(h2 > h1 && h2 < 1.0) {
        return Err(Error::Parameter(format!(
            "two-fBm weight requires H1 < H2 < 1, got H2={h2}"
        )));
    }
    let rhs = weight_fbm_linear(h1, t_max, n)?;
    let grid = rhs.h.grid;
    let model = NoiseModel::TwoFbm { h1, h2 };

    let values = if h2_scale == 0.0 {
        rhs.h.values.clone()
    } else {
        let k2 = gamma_kernel_matrix(&NoiseModel::Fbm { h: h2 }, grid)?;
        let p = 2.0 - 2.0 * h1;
        let c1 = h1 * (2.0 * h1 - 1.0);
        // columns of Gamma_{H1}^{-1} Gamma_{H2}: invert each column of K2
        let columns: Vec<Result<Vec<f64>>> = (0..n)
            .into_par_iter()
            .map(|j| {
                let col = GridFunction::new(
                    grid,
                    (0..n).map(|i| k2[i * n + j] / c1).collect(),
                )?;
                // Near-boundary columns carry a kink at their own cell, which
                // makes the embedded Abel reconstruction noisy; the assembled
                // solution is gated by the forward residual below, so the
                // per-column check only screens for outright non-solvability.
                let x = power_kernel_solve_with_tol(&col, p, Some(0.5)).map_err(|e| {
                    Error::SolverFailure(format!("two-fBm operator column {j}: {e}"))
                })?;
                Ok(x.values)
            })
            .collect();
        let mut a = vec![0.0; n * n];
        for (j, col) in columns.into_iter().enumerate() {
            let col = col?;
            for i in 0..n {
                a[i * n + j] = h2_scale * col[i];
            }
        }
        for i in 0..n {
            a[i * n + i] += 1.0;
        }
        lu_solve(&a, n, &rhs.h.values)?
    };

    let e = 0.5 - h1;
    let h = GridFunction::new(grid, values)?
        .with_singularity(SingularityFlags::new(e, e, true)?);
    // verify (Gamma_{H1} + scale * Gamma_{H2}) h = 1 on interior cells
    let f1 = apply_gamma(&NoiseModel::Fbm { h: h1 }, &h)?;
    let f2 = apply_gamma(&NoiseModel::Fbm { h: h2 }, &h)?;
    let residual = interior_indices(n)
        .map(|i| (f1.values[i] + h2_scale * f2.values[i] - 1.0).abs())
        .fold(0.0, f64::max);
    gate_residual(residual, 1.0, WeightMethod::SecondKindTwoFbm)?;
    let denom = h.integral_against(|_| 1.0);
    check_denom(denom)?;
    Ok(WeightFunction {
        h,
        model,
        drift: DriftSpec::Linear,
        denom,
        method: WeightMethod::SecondKindTwoFbm,
        residual,
    })
}

/// Linear-drift weight for any supported model (dispatch used by the CLI).
pub fn weight_for(model: &NoiseModel, t_max: f64, n: usize) -> Result<WeightFunction> {
    match *model {
        NoiseModel::Wiener => weight_wiener_linear(t_max, n),
        NoiseModel::Fbm { h } => weight_fbm_linear(h, t_max, n),
        NoiseModel::SubFbm { h } => weight_subfbm(h, t_max, n),
        NoiseModel::MixedBmFbm { h } => weight_mixed(h, t_max, n, MixedMethod::Direct),
        NoiseModel::TwoFbm { h1, h2 } => weight_two_fbm(h1, h2, t_max, n),
    }
}
