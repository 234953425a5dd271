//! Acceptance suite: one test per headline property, each printing a single
//! pass/fail line (run with `--nocapture` to see them). The statistical
//! checks use frozen seeds, so every run is deterministic.

use std::fs;
use std::path::PathBuf;
use std::process::Command;

use gpdrift::estimators::{
    estimate_continuous, estimate_discrete_prefactored, EstimateResult,
};
use gpdrift::fraccalc::{interior_indices, power_kernel_apply, power_kernel_solve};
use gpdrift::grid::{GridFunction, QuadGrid};
use gpdrift::rng::derive_seed;
use gpdrift::simulate::{DriftSpec, PathSampler};
use gpdrift::stats::{ks_critical_1pct, ks_statistic_standard_normal, mean_var};
use gpdrift::weights::{
    weight_fbm_linear, weight_mixed, weight_subfbm, weight_two_fbm, weight_two_fbm_scaled,
    MixedMethod,
};
use gpdrift::{NoiseModel, TimeGrid};
use rayon::prelude::*;

fn check(label: &str, ok: bool) {
    println!("acceptance {label}: {}", if ok { "pass" } else { "FAIL" });
    assert!(ok, "acceptance check failed: {label}");
}

/// Discrete-scheme Monte Carlo: per-replication estimates for a fixed setup.
fn mc_discrete(model: NoiseModel, t_max: f64, n: usize, reps: u64, seed: u64) -> Vec<EstimateResult> {
    let grid = TimeGrid::uniform(t_max, n);
    let sampler = PathSampler::new(model, &grid).unwrap();
    let cov = model.increment_covariance(&grid).unwrap();
    let chol = cov.cholesky().unwrap();
    (0..reps)
        .into_par_iter()
        .map(|i| {
            let path = sampler.sample(&DriftSpec::Linear, 1.0, derive_seed(seed, i));
            estimate_discrete_prefactored(&path, &cov, &chol).unwrap()
        })
        .collect()
}

#[test]
fn unbiasedness_and_exact_variance_all_models() {
    let models = [
        ("wiener", NoiseModel::Wiener),
        ("fbm-0.6", NoiseModel::Fbm { h: 0.6 }),
        ("fbm-0.75", NoiseModel::Fbm { h: 0.75 }),
        ("sub-fbm-0.6", NoiseModel::SubFbm { h: 0.6 }),
        ("mixed-0.7", NoiseModel::MixedBmFbm { h: 0.7 }),
        ("two-fbm-0.6-0.8", NoiseModel::TwoFbm { h1: 0.6, h2: 0.8 }),
    ];
    let reps = 10_000u64;
    let mut ok = true;
    for (name, model) in models {
        let results = mc_discrete(model, 8.0, 64, reps, 0x5eed_0001);
        let thetas: Vec<f64> = results.iter().map(|r| r.theta_hat).collect();
        let analytic = results[0].variance;
        let (mean, sample_var) = mean_var(&thetas);
        let bias = mean - 1.0;
        let bound = 3.0 * (analytic / reps as f64).sqrt();
        let ratio = sample_var / analytic;
        let this = bias.abs() <= bound && (0.96..=1.04).contains(&ratio);
        assert!(
            this,
            "{name}: bias {bias:.3e} (bound {bound:.3e}), variance ratio {ratio:.4}"
        );
        ok &= this;
    }
    check("estimator unbiased with exact variance across all noise models", ok);
}

#[test]
fn standardized_estimator_is_normal_both_schemes() {
    let model = NoiseModel::Fbm { h: 0.75 };
    let (t_max, n, reps) = (1.0, 64usize, 10_000u64);
    let threshold = ks_critical_1pct(reps as usize);

    let disc = mc_discrete(model, t_max, n, reps, 0x5eed_0002);
    let zs: Vec<f64> = disc.iter().map(|r| r.z_score(1.0)).collect();
    let ks_d = ks_statistic_standard_normal(&zs);

    let grid = TimeGrid::uniform(t_max, n);
    let sampler = PathSampler::new(model, &grid).unwrap();
    let weight = weight_fbm_linear(0.75, t_max, n).unwrap();
    let zs_c: Vec<f64> = (0..reps)
        .into_par_iter()
        .map(|i| {
            let path = sampler.sample(&DriftSpec::Linear, 1.0, derive_seed(0x5eed_0002, i));
            estimate_continuous(&path, &weight).unwrap().z_score(1.0)
        })
        .collect();
    let ks_c = ks_statistic_standard_normal(&zs_c);

    check(
        &format!(
            "standardized estimator passes KS at 1% for both schemes \
             (discrete {ks_d:.4}, continuous {ks_c:.4}, threshold {threshold:.4})"
        ),
        ks_d < threshold && ks_c < threshold,
    );
}

#[test]
fn closed_form_fbm_weight_solves_its_equation() {
    let mut ok = true;
    for h in [0.6, 0.7, 0.75] {
        for (n, tol) in [(512usize, 2e-2), (1024usize, 1e-2)] {
            let w = weight_fbm_linear(h, 1.0, n).unwrap();
            ok &= w.residual <= tol;
            assert!(ok, "H={h}, n={n}: residual {:.3e} > {tol:.1e}", w.residual);
        }
    }
    check("closed-form fbm weight satisfies its integral equation", ok);
}

#[test]
fn mixed_model_solvers_agree() {
    let (h, n) = (0.7, 256usize);
    let direct = weight_mixed(h, 1.0, n, MixedMethod::Direct).unwrap();
    let neumann = weight_mixed(h, 1.0, n, MixedMethod::Neumann).unwrap();
    let max_diff = direct
        .h
        .values
        .iter()
        .zip(&neumann.h.values)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0f64, f64::max);
    check(
        &format!(
            "mixed-model direct and series solvers agree \
             (max diff {max_diff:.2e}, residual {:.2e})",
            direct.residual
        ),
        max_diff <= 1e-8 && direct.residual <= 2e-2,
    );
}

#[test]
fn subfbm_weight_residual_stability_and_domain() {
    let h = 0.6;
    let coarse = weight_subfbm(h, 1.0, 512).unwrap();
    let fine = weight_subfbm(h, 1.0, 1024).unwrap();
    // restrict the fine solution by pairwise cell averaging
    let restricted: Vec<f64> = (0..512)
        .map(|i| 0.5 * (fine.h.values[2 * i] + fine.h.values[2 * i + 1]))
        .collect();
    let num: f64 = coarse
        .h
        .values
        .iter()
        .zip(&restricted)
        .map(|(a, b)| (a - b) * (a - b))
        .sum();
    let den: f64 = coarse.h.values.iter().map(|a| a * a).sum();
    let rel_l2 = (num / den).sqrt();
    let rejected = weight_subfbm(0.75, 1.0, 256).is_err();
    check(
        &format!(
            "sub-fbm weight: residual {:.2e}, refinement change {rel_l2:.2e}, \
             out-of-domain H rejected",
            coarse.residual
        ),
        coarse.residual <= 3e-2 && rel_l2 <= 5e-2 && rejected,
    );
}

#[test]
fn two_fbm_weight_residual_and_degenerate_limit() {
    let w = weight_two_fbm(0.6, 0.8, 1.0, 256).unwrap();
    let degenerate = weight_two_fbm_scaled(0.6, 0.8, 1.0, 256, 0.0).unwrap();
    let closed = weight_fbm_linear(0.6, 1.0, 256).unwrap();
    let max_diff = degenerate
        .h
        .values
        .iter()
        .zip(&closed.h.values)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0f64, f64::max);
    check(
        &format!(
            "two-fbm weight: residual {:.2e}, degenerate limit diff {max_diff:.2e}",
            w.residual
        ),
        w.residual <= 5e-2 && max_diff <= 1e-6,
    );
}

#[test]
fn power_kernel_inversion_residual_and_closed_form() {
    let n = 1024usize;
    let grid = QuadGrid::new(1.0, n).unwrap();
    let targets: Vec<f64> = interior_indices(n).map(|i| grid.midpoint(i)).collect();
    let mut ok = true;
    for p in [0.2, 0.4, 0.6] {
        let f = GridFunction::constant(grid, 1.0);
        let y = power_kernel_solve(&f, p).unwrap();
        let forward = power_kernel_apply(&y, p, &targets);
        let residual = forward
            .iter()
            .map(|v| (v - 1.0).abs())
            .fold(0.0f64, f64::max);
        ok &= residual <= 2e-2;
        assert!(ok, "p={p}: forward residual {residual:.3e}");

        // the kernel |s-t|^{-p} is the fbm weight kernel at H = 1 - p/2 up
        // to the constant H(2H-1), so the solution has a closed form
        let h = 1.0 - p / 2.0;
        let closed = weight_fbm_linear(h, 1.0, n).unwrap();
        let scale = h * (2.0 * h - 1.0);
        let rel = interior_indices(n)
            .map(|i| {
                let want = scale * closed.h.values[i];
                ((y.values[i] - want) / want).abs()
            })
            .fold(0.0f64, f64::max);
        ok &= rel <= 2e-2;
        assert!(ok, "p={p}: closed-form mismatch {rel:.3e}");
    }
    check("power-kernel inversion matches its equation and the closed form", ok);
}

// ---------------------------------------------------------------------------
// CLI-level checks
// ---------------------------------------------------------------------------

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_gpdrift")
}

fn work_dir(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("gpdrift-acceptance-{name}"));
    let _ = fs::remove_dir_all(&dir);
    fs::create_dir_all(&dir).unwrap();
    dir
}

/// Run a subcommand on an inline JSON config; returns (exit code, CSV body).
fn run_cli(dir: &PathBuf, sub: &str, cfg: &str, tag: &str, extra: &[&str]) -> (i32, String) {
    let cfg_path = dir.join(format!("{sub}-{tag}.json"));
    fs::write(&cfg_path, cfg).unwrap();
    let out_path = dir.join(format!("{sub}-{tag}.csv"));
    let status = Command::new(bin())
        .arg(sub)
        .arg("--config")
        .arg(&cfg_path)
        .arg("--out")
        .arg(&out_path)
        .args(extra)
        .output()
        .unwrap();
    let code = status.status.code().unwrap_or(-1);
    let body = fs::read_to_string(&out_path).unwrap_or_default();
    (code, body)
}

fn column(body: &str, name: &str) -> Vec<String> {
    let mut lines = body.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    let idx = header.iter().position(|c| *c == name).unwrap();
    lines.map(|l| l.split(',').nth(idx).unwrap().to_string()).collect()
}

#[test]
fn operator_property_suite_via_cli() {
    let dir = work_dir("ops");
    let cfg = r#"{"experiment":"operator-properties","model":{"kind":"wiener"},
        "drift":{"kind":"linear"},"theta":1.0,"t":1.0,"n":1024,
        "replications":200,"master_seed":11}"#;
    let (code, body) = run_cli(&dir, "ops", cfg, "main", &[]);
    let all_pass = !body.is_empty() && column(&body, "pass").iter().all(|v| v == "pass");
    check(
        "operator suite (semigroup, positivity, norm bound, adjointness) at n=1024",
        code == 0 && all_pass,
    );
}

#[test]
fn consistency_rates_match_theory() {
    let dir = work_dir("consistency");
    let fbm_cfg = r#"{"experiment":"consistency-sweep","model":{"kind":"fbm","h":0.7},
        "drift":{"kind":"linear"},"theta":1.0,"t_sweep":[4,8,16,32,64],"n":64,
        "replications":1000,"master_seed":21}"#;
    let (code_f, body_f) = run_cli(&dir, "consistency", fbm_cfg, "fbm", &[]);
    let wiener_cfg = r#"{"experiment":"consistency-sweep","model":{"kind":"wiener"},
        "drift":{"kind":"linear"},"theta":1.0,"t_sweep":[4,8,16,32,64],"n":64,
        "replications":1000,"master_seed":22,
        "tolerances":{"mse_slope_tol":0.1,"analytic_slope_tol":0.1}}"#;
    let (code_w, body_w) = run_cli(&dir, "consistency", wiener_cfg, "wiener", &[]);
    let slope_f: f64 = column(&body_f, "mse_slope")[0].parse().unwrap();
    let analytic_f: f64 = column(&body_f, "analytic_slope")[0].parse().unwrap();
    let slope_w: f64 = column(&body_w, "mse_slope")[0].parse().unwrap();
    check(
        &format!(
            "variance decay rates: fbm analytic slope {analytic_f:.3} \
             (expect -0.6), empirical {slope_f:.3}; wiener empirical {slope_w:.3}"
        ),
        code_f == 0
            && code_w == 0
            && (analytic_f + 0.6).abs() <= 0.05
            && (slope_f + 0.6).abs() <= 0.2
            && (slope_w + 1.0).abs() <= 0.1,
    );
}

#[test]
fn discrete_estimator_converges_to_continuous() {
    let dir = work_dir("d2c");
    let template = |model: &str, seed: u64| {
        format!(
            r#"{{"experiment":"discrete-to-continuous","model":{model},
            "drift":{{"kind":"linear"}},"theta":1.0,"t":1.0,"n":1024,
            "n_sweep":[16,32,64,128,256],"replications":1000,"master_seed":{seed}}}"#
        )
    };
    let mut ok = true;
    for (name, model, seed) in [
        ("fbm", r#"{"kind":"fbm","h":0.7}"#, 31u64),
        ("mixed", r#"{"kind":"mixed-bm-fbm","h":0.7}"#, 32),
    ] {
        let (code, body) = run_cli(&dir, "d2c", &template(model, seed), name, &[]);
        let gaps: Vec<f64> = column(&body, "mean_square_gap")
            .iter()
            .map(|v| v.parse().unwrap())
            .collect();
        let decreasing = gaps.windows(2).all(|w| w[1] < w[0]);
        ok &= code == 0 && decreasing;
        assert!(ok, "{name}: gaps {gaps:?}");
    }
    let (code, body) = run_cli(&dir, "d2c", &template(r#"{"kind":"wiener"}"#, 33), "wiener", &[]);
    let zero = column(&body, "mean_square_gap")
        .iter()
        .all(|v| v.parse::<f64>().unwrap() == 0.0);
    ok &= code == 0 && zero;
    check(
        "discrete estimator converges to the continuous one (wiener gap exactly 0)",
        ok,
    );
}

#[test]
fn reports_are_reproducible_across_runs_and_workers() {
    let dir = work_dir("determinism");
    let cfg = r#"{"experiment":"mc-bias-variance","model":{"kind":"fbm","h":0.7},
        "drift":{"kind":"linear"},"theta":1.0,"t":1.0,"n":64,
        "replications":2000,"master_seed":41,"scheme":"both",
        "tolerances":{"variance_ratio_tol":0.1}}"#;
    let (c1, b1) = run_cli(&dir, "mc", cfg, "w1", &["--workers", "1"]);
    let (c2, b2) = run_cli(&dir, "mc", cfg, "w4", &["--workers", "4"]);
    let (c3, b3) = run_cli(&dir, "mc", cfg, "w4s", &["--workers", "4", "--seed", "41"]);
    check(
        "CSV bodies byte-identical across repeated and multi-worker runs",
        c1 == 0 && c2 == 0 && c3 == 0 && b1 == b2 && b2 == b3 && !b1.is_empty(),
    );
}
