//! The acceptance suite: every headline property of the laboratory, each as
//! one criterion with its tolerance pinned in code. `run_criterion` returns
//! a report with a pass/fail verdict and a human-readable detail line.

use crate::experiment::{fit_pooled_plateaus, fit_run, run_ladder};
use lognls_core::gaussian::{
    breather_asymptotic_check, breather_period, eval_gausson, evolve_breather, evolve_matrix_ode,
};
use lognls_core::grid::{sample, Grid};
use lognls_core::inequality::{
    gauss_tail_1d, gauss_tail_moment, gauss_tail_moment_radial, pointwise_domination_check,
    sum_gaussian_log_bound, sweep_f1_expansion, sweep_log_pair, sweep_zlogz_lipschitz,
    weighted_log_diff_norm, NormalFormMember,
};
use lognls_core::linalg::CMatrix;
use lognls_core::localized::slow_variation_report;
use lognls_core::multisoliton::{fit_gaussian_decay, rigidity_lower_bound_check, MultiConfig};
use lognls_core::solver::{integrate, l2_distance, norms, stability_envelope_check, SolverConfig};
use lognls_core::{C64, Field64, GaussianParams64, Grid64, MultiConfig64};
use serde::Serialize;
use std::time::Instant;

#[derive(Clone, Debug, Serialize)]
pub struct CriterionReport {
    pub id: usize,
    pub name: String,
    pub passed: bool,
    pub details: String,
    pub runtime_s: f64,
}

impl CriterionReport {
    pub fn line(&self) -> String {
        format!(
            "criterion {:2} [{}] {} ({:.2}s): {}",
            self.id,
            if self.passed { "PASS" } else { "FAIL" },
            self.name,
            self.runtime_s,
            self.details
        )
    }
}

pub const CRITERIA: [(usize, &str); 12] = [
    (1, "gausson-fixed-point"),
    (2, "breather-periodicity"),
    (3, "negative-lambda-asymptotic"),
    (4, "solver-vs-exact-flow"),
    (5, "l2-stability-envelope"),
    (6, "multi-gausson-rate"),
    (7, "multi-gaussian-rate"),
    (8, "rigidity-lower-bound"),
    (9, "inequality-certification"),
    (10, "sum-log-decay-exponent"),
    (11, "slow-variation"),
    (12, "weighted-norm-ladder"),
];

pub fn run_criterion(id: usize, seed: u64) -> CriterionReport {
    let start = Instant::now();
    let (name, result) = match id {
        1 => ("gausson-fixed-point", c1_fixed_point()),
        2 => ("breather-periodicity", c2_breather_period()),
        3 => ("negative-lambda-asymptotic", c3_asymptotic()),
        4 => ("solver-vs-exact-flow", c4_solver_exact()),
        5 => ("l2-stability-envelope", c5_envelope()),
        6 => ("multi-gausson-rate", c6_multi_gausson()),
        7 => ("multi-gaussian-rate", c7_multi_gaussian()),
        8 => ("rigidity-lower-bound", c8_rigidity()),
        9 => ("inequality-certification", c9_inequalities(seed)),
        10 => ("sum-log-decay-exponent", c10_sum_log_slope()),
        11 => ("slow-variation", c11_slow_variation()),
        12 => ("weighted-norm-ladder", c12_weighted_ladder(seed)),
        other => (
            "unknown",
            Err(format!("no criterion with id {other} (valid: 1..=12)")),
        ),
    };
    let runtime_s = start.elapsed().as_secs_f64();
    match result {
        Ok(details) => CriterionReport { id, name: name.into(), passed: true, details, runtime_s },
        Err(details) => CriterionReport { id, name: name.into(), passed: false, details, runtime_s },
    }
}

pub fn run_all(only: Option<usize>, seed: u64) -> Vec<CriterionReport> {
    use rayon::prelude::*;
    let ids: Vec<usize> = match only {
        Some(id) => vec![id],
        None => CRITERIA.iter().map(|&(id, _)| id).collect(),
    };
    let mut reports: Vec<CriterionReport> =
        ids.par_iter().map(|&id| run_criterion(id, seed)).collect();
    reports.sort_by_key(|r| r.id);
    reports
}

// --- criterion 1 ---------------------------------------------------------

fn c1_fixed_point() -> Result<String, String> {
    let times: Vec<f64> = (0..=40).map(|i| 0.5 * i as f64).collect();
    let mut worst: f64 = 0.0;
    for &lambda in &[0.5, 1.0, 2.0] {
        for dim in 1..=3usize {
            let a_in = CMatrix::scaled_identity(dim, C64::new(2.0 * lambda, 0.0));
            let states =
                evolve_matrix_ode(&a_in, lambda, &times, 1e-10).map_err(|e| e.to_string())?;
            for s in &states {
                worst = worst.max(s.a.max_abs_diff(&a_in));
                if s.phi.abs() > 1e-10 {
                    return Err(format!("phi = {} at t = {} (lambda {lambda}, d {dim})", s.phi, s.t));
                }
            }
        }
    }
    if worst < 1e-12 {
        Ok(format!("max deviation from 2*lambda*I over t in [0,20]: {worst:.3e} < 1e-12"))
    } else {
        Err(format!("max deviation {worst:.3e} >= 1e-12"))
    }
}

// --- criterion 2 ---------------------------------------------------------

fn c2_breather_period() -> Result<String, String> {
    let p = breather_period::<f64>(1.0, 0.0, 1.0, 1e-11).map_err(|e| e.to_string())?;
    let states = evolve_breather::<f64>(1.0, 0.0, 1.0, p, 1e-11).map_err(|e| e.to_string())?;
    let last = states.last().unwrap();
    let return_err = ((last.r - 1.0).powi(2) + last.rdot.powi(2)).sqrt();
    let h0 = states[0].first_integral;
    let drift = states
        .iter()
        .map(|s| (s.first_integral - h0).abs())
        .fold(0.0f64, f64::max);
    if return_err < 1e-6 && drift < 1e-8 {
        Ok(format!("period {p:.9}, return error {return_err:.2e} < 1e-6, H drift {drift:.2e} < 1e-8"))
    } else {
        Err(format!("return error {return_err:.2e} (<1e-6?), H drift {drift:.2e} (<1e-8?)"))
    }
}

// --- criterion 3 ---------------------------------------------------------

fn c3_asymptotic() -> Result<String, String> {
    let ratios = breather_asymptotic_check::<f64>(1.0, 0.0, -1.0, 1e6, 1e-10).map_err(|e| e.to_string())?;
    let (t, ratio) = *ratios.last().unwrap();
    if (0.85..=1.15).contains(&ratio) {
        Ok(format!("r(t)/(2t sqrt(|lambda| ln t)) = {ratio:.4} at t = {t:.1e}, inside [0.85, 1.15]"))
    } else {
        Err(format!("ratio {ratio:.4} at t = {t:.1e} outside [0.85, 1.15]"))
    }
}

// --- criterion 4 ---------------------------------------------------------

fn oscillating_member_field(grid: &Grid64, t: f64) -> Field64 {
    let a_in = CMatrix::from_rows(&[&[C64::new(1.0, 0.0)]]);
    let p = GaussianParams64 {
        dim: 1,
        a_in: a_in.clone(),
        omega: 0.0,
        x0: vec![0.0],
        v: vec![0.0],
        theta: 0.0,
        lambda: 1.0,
    };
    let times: Vec<f64> = if t > 0.0 {
        (0..=600).map(|i| t * i as f64 / 600.0).collect()
    } else {
        vec![0.0]
    };
    let states = evolve_matrix_ode(&a_in, 1.0, &times, 1e-12).unwrap();
    let s = states.last().unwrap();
    sample(|x| lognls_core::gaussian::eval_gaussian_solution(&p, s, x), grid).unwrap()
}

fn c4_solver_exact() -> Result<String, String> {
    let grid = Grid::new(1, 40.0, 512).map_err(|e| e.to_string())?;
    let u0 = oscillating_member_field(&grid, 0.0);
    let cfg = SolverConfig::new(1.0, 1e-3);
    let traj = integrate(&u0, 0.0, 2.0, &cfg, &[]).map_err(|e| e.to_string())?;
    let exact = oscillating_member_field(&grid, 2.0);
    let u2 = &traj.last().unwrap().1;
    let rel = l2_distance(u2, &exact).map_err(|e| e.to_string())? / exact.l2();
    let mass_drift = ((norms(u2, &cfg).mass - norms(&u0, &cfg).mass) / norms(&u0, &cfg).mass).abs();

    // energy drift order via dt halving over [0, 5]
    let drift = |dt: f64| -> Result<f64, String> {
        let c = SolverConfig::new(1.0, dt);
        let e0 = norms(&u0, &c).energy;
        let u = integrate(&u0, 0.0, 5.0, &c, &[]).map_err(|e| e.to_string())?.pop().unwrap().1;
        Ok(((norms(&u, &c).energy - e0) / e0).abs())
    };
    let d1 = drift(2e-3)?;
    let d2 = drift(1e-3)?;
    let order = (d1 / d2).log2();

    let mut problems = Vec::new();
    if rel >= 1e-4 {
        problems.push(format!("relative L2 error {rel:.3e} >= 1e-4"));
    }
    if mass_drift >= 1e-12 {
        problems.push(format!("mass drift {mass_drift:.3e} >= 1e-12"));
    }
    if order < 1.9 {
        problems.push(format!("energy drift order {order:.2} < 1.9"));
    }
    if problems.is_empty() {
        Ok(format!(
            "relative L2 error {rel:.2e} at t=2, mass drift {mass_drift:.2e}, energy order {order:.2}"
        ))
    } else {
        Err(problems.join("; "))
    }
}

// --- criterion 5 ---------------------------------------------------------

fn gausson_field(grid: &Grid64) -> Field64 {
    sample(|x| eval_gausson(0.0, &[0.0], &[0.0], 0.0, 1.0, 0.0, x), grid).unwrap()
}

fn c5_envelope() -> Result<String, String> {
    let grid = Grid::new(1, 40.0, 512).map_err(|e| e.to_string())?;
    let u0 = gausson_field(&grid);
    let mut v0 = u0.clone();
    for v in v0.values.iter_mut() {
        *v *= 1.0 + 1e-3;
    }
    let cfg = SolverConfig::new(1.0, 1e-3);
    let ratios = stability_envelope_check(&u0, &v0, &cfg, 2.0, 20).map_err(|e| e.to_string())?;
    let worst = ratios.iter().map(|&(_, r)| r).fold(0.0f64, f64::max);
    if worst <= 1.05 {
        Ok(format!("max ratio ||u-v||/(||u0-v0|| e^(2 lambda t)) = {worst:.4} <= 1.05 on [0,2]"))
    } else {
        Err(format!("max ratio {worst:.4} > 1.05"))
    }
}

// --- criterion 6 ---------------------------------------------------------

fn crossing_gaussons() -> MultiConfig64 {
    let m1 = GaussianParams64::gausson(1, 0.0, vec![-8.0], vec![1.0], 0.0, 1.0);
    let m2 = GaussianParams64::gausson(1, 0.0, vec![8.0], vec![-1.0], 0.0, 1.0);
    MultiConfig::derive(vec![m1, m2], vec![6.0, 8.0, 10.0, 12.0], 4.0, 1e-10).unwrap()
}

/// ln values strictly decreasing with non-increasing slopes (up to slack):
/// the discrete signature of super-exponential decay.
fn superexponential_decay(times: &[f64], values: &[f64]) -> Result<(), String> {
    let pts: Vec<(f64, f64)> = times
        .iter()
        .zip(values)
        .map(|(&t, &v)| (t, v.ln()))
        .collect();
    if pts.len() < 4 {
        return Err("too few samples for a shape check".into());
    }
    let mut slopes = Vec::new();
    for w in pts.windows(2) {
        if w[1].1 >= w[0].1 {
            return Err(format!("not decreasing at t = {}", w[1].0));
        }
        slopes.push((w[1].1 - w[0].1) / (w[1].0 - w[0].0));
    }
    let mean = slopes.iter().sum::<f64>() / slopes.len() as f64;
    let slack = 0.15 * mean.abs();
    for w in slopes.windows(2) {
        if w[1] > w[0] + slack {
            return Err(format!("slope increases by {:.3} (> slack {slack:.3})", w[1] - w[0]));
        }
    }
    Ok(())
}

fn c6_multi_gausson() -> Result<String, String> {
    let cfg = crossing_gaussons();
    let grid = Grid::new(1, 40.0, 512).map_err(|e| e.to_string())?;
    let solver = SolverConfig::new(1.0, 2.5e-4);
    let outcome = run_ladder(&cfg, &grid, &solver, 0.1, 1e-10, true).map_err(|e| e.to_string())?;

    // the collision-time run must be gate-excluded, the others must exist
    let excluded: Vec<f64> = outcome
        .runs
        .iter()
        .filter(|r| r.excluded.is_some())
        .map(|r| r.t_n)
        .collect();
    if excluded != vec![8.0] {
        return Err(format!("expected exactly T_n = 8 gate-excluded, got {excluded:?}"));
    }

    // decay fit on the largest run
    let last = outcome.runs.iter().rev().find(|r| r.excluded.is_none()).unwrap();
    let fit = fit_run(last, outcome.floor, 0.2).map_err(|e| e.to_string())?;
    let target = cfg.rate_coefficient(); // -lambda v_*^2 / 4 = -1
    let c_lo = 1.5 * target;
    let c_hi = 0.5 * target;
    let mut problems = Vec::new();
    if !(c_lo..=c_hi).contains(&fit.c) {
        problems.push(format!("quadratic coefficient {:.3} outside [{c_lo:.2}, {c_hi:.2}]", fit.c));
    }
    if fit.r_squared <= 0.95 {
        problems.push(format!("r^2 = {:.4} <= 0.95", fit.r_squared));
    }

    // H1 and F(H1) error curves decay super-exponentially on the same window
    let cutoff = 10.0 * outcome.floor;
    let mut times = Vec::new();
    let mut h1 = Vec::new();
    let mut fh1 = Vec::new();
    for r in &last.records {
        if r.t >= fit.window.0 && r.t <= fit.window.1 && r.l2 > cutoff {
            times.push(r.t);
            h1.push(r.h1);
            fh1.push(r.fh1);
        }
    }
    if let Err(e) = superexponential_decay(&times, &h1) {
        problems.push(format!("H1 curve: {e}"));
    }
    if let Err(e) = superexponential_decay(&times, &fh1) {
        problems.push(format!("F(H1) curve: {e}"));
    }

    // ladder self-consistency at common valid times (T_n = 10 vs 12)
    let run10 = outcome.runs.iter().find(|r| r.t_n == 10.0 && r.excluded.is_none());
    if let Some(run10) = run10 {
        for r10 in &run10.records {
            if r10.l2 <= cutoff || r10.t > 10.0 - 0.3 {
                continue;
            }
            if let Some(r12) = last.records.iter().find(|r| (r.t - r10.t).abs() < 1e-9) {
                let (small, big) = if r10.l2 < r12.l2 { (r10.l2, r12.l2) } else { (r12.l2, r10.l2) };
                if big > 2.0 * small {
                    problems.push(format!(
                        "ladder inconsistency at t = {}: {:.3e} vs {:.3e}",
                        r10.t, r10.l2, r12.l2
                    ));
                    break;
                }
            }
        }
    }

    // error curves monotone increasing backward inside the fitted window
    let mut prev = f64::INFINITY;
    for r in &last.records {
        if r.t >= fit.window.0 && r.t <= fit.window.1 && r.l2 > cutoff {
            if r.l2 > prev {
                problems.push(format!("backward monotonicity broken at t = {}", r.t));
                break;
            }
            prev = r.l2;
        }
    }

    if problems.is_empty() {
        Ok(format!(
            "c = {:.3} (target {target:.2}, allowed [{c_lo:.2}, {c_hi:.2}]), r^2 = {:.4}, window [{:.1}, {:.1}], floor {:.1e}, T_n = 8 gate-excluded",
            fit.c, fit.r_squared, fit.window.0, fit.window.1, outcome.floor
        ))
    } else {
        Err(problems.join("; "))
    }
}

// --- criterion 7 ---------------------------------------------------------

fn c7_multi_gaussian() -> Result<String, String> {
    // same geometry with width-oscillating members A_in = 1 (alpha = (1,0));
    // T_n ladder placed at the slow-decay moments m*P of the width
    // oscillation, where the staircase plateaus sample the sigma_- envelope
    let period = breather_period::<f64>(1.0, 0.0, 1.0, 1e-11).map_err(|e| e.to_string())?;
    let a_in = CMatrix::from_rows(&[&[C64::new(1.0, 0.0)]]);
    let mk = |x0: f64, v: f64| GaussianParams64 {
        dim: 1,
        a_in: a_in.clone(),
        omega: 0.0,
        x0: vec![x0],
        v: vec![v],
        theta: 0.0,
        lambda: 1.0,
    };
    let ladder: Vec<f64> = [1.0, 2.0, 4.0, 5.0].iter().map(|m| m * period).collect();
    let cfg = MultiConfig::derive(vec![mk(-8.0, 1.0), mk(8.0, -1.0)], ladder, 0.0, 1e-10)
        .map_err(|e| e.to_string())?;
    if (cfg.sigma_minus - 0.5).abs() > 1e-4 {
        return Err(format!("sigma_minus = {} (expected 0.5 from the width scan)", cfg.sigma_minus));
    }

    let grid = Grid::new(1, 48.0, 1024).map_err(|e| e.to_string())?;
    let solver = SolverConfig::new(1.0, 1.25e-4);

    // each run only needs the last 1.0 time units before its T_n
    let mut short = cfg.clone();
    let mut runs = Vec::new();
    let mut floor = 0.0f64;
    for &t_n in &cfg.t_n_list.clone() {
        short.t_obs = t_n - 1.0;
        short.t_n_list = vec![t_n];
        let outcome = run_ladder(&short, &grid, &solver, 0.05, 1e-10, t_n == *cfg.t_n_list.last().unwrap())
            .map_err(|e| e.to_string())?;
        floor = floor.max(outcome.floor);
        runs.extend(outcome.runs);
    }

    let fit = fit_pooled_plateaus(&runs, &[0.4, 0.6, 0.8], floor).map_err(|e| e.to_string())?;
    let target = cfg.rate_coefficient(); // -sigma_- v_*^2/4 = -0.5
    let c_lo = 1.5 * target;
    let c_hi = 0.5 * target;
    if (c_lo..=c_hi).contains(&fit.c) {
        Ok(format!(
            "c = {:.3} (target {target:.2}, allowed [{c_lo:.2}, {c_hi:.2}]), r^2 = {:.3}, {} plateau samples, sigma_- = {:.3}",
            fit.c, fit.r_squared, fit.samples_used, cfg.sigma_minus
        ))
    } else {
        Err(format!(
            "quadratic coefficient {:.3} outside [{c_lo:.2}, {c_hi:.2}] (r^2 = {:.3})",
            fit.c, fit.r_squared
        ))
    }
}

// --- criterion 8 ---------------------------------------------------------

fn c8_rigidity() -> Result<String, String> {
    let grid = Grid::new(1, 40.0, 512).map_err(|e| e.to_string())?;
    let u0 = gausson_field(&grid);
    let cfg = SolverConfig::new(1.0, 1e-3);

    // amplitude-perturbed pair
    let mut v0 = u0.clone();
    for v in v0.values.iter_mut() {
        *v *= 1.0 + 1e-3;
    }
    let r1 = rigidity_lower_bound_check(&u0, &v0, &cfg, 3.0, 15).map_err(|e| e.to_string())?;
    let min1 = r1.iter().map(|&(_, r)| r).fold(f64::INFINITY, f64::min);

    // grid-shifted pair
    let shifted = sample(
        |x| eval_gausson(0.0, &[grid.spacing()], &[0.0], 0.0, 1.0, 0.0, x),
        &grid,
    )
    .map_err(|e| e.to_string())?;
    let r2 = rigidity_lower_bound_check(&u0, &shifted, &cfg, 3.0, 15).map_err(|e| e.to_string())?;
    let min2 = r2.iter().map(|&(_, r)| r).fold(f64::INFINITY, f64::min);

    if min1 >= 0.9 && min2 >= 0.9 {
        Ok(format!(
            "min ||u-v||/(||u0-v0|| e^(-2 lambda t)) = {min1:.3} (amplitude pair), {min2:.3} (shift pair), both >= 0.9"
        ))
    } else {
        Err(format!("min ratios {min1:.3}, {min2:.3}; need >= 0.9"))
    }
}

// --- criterion 9 ---------------------------------------------------------

fn c9_inequalities(seed: u64) -> Result<String, String> {
    const N: u64 = 1_000_000;
    let r1 = sweep_log_pair::<f64>(N, seed);
    let r2 = sweep_f1_expansion::<f64>(N, seed);
    let r3 = sweep_zlogz_lipschitz::<f64>(N, seed);
    let mut problems = Vec::new();
    for r in [&r1, &r2, &r3] {
        if r.violations > 0 {
            problems.push(format!("{}: {} violations (worst margin {:.3e})", r.name, r.violations, r.worst_margin));
        }
    }

    // tail bound strict at every ladder point
    for &(y, gamma) in &[(0.5, 1.0), (1.0, 1.0), (2.0, 0.5), (4.0, 2.0), (10.0, 1.0), (20.0, 1.5)] {
        let t = gauss_tail_1d(y, gamma).map_err(|e| e.to_string())?;
        if t.ratio >= 1.0 {
            problems.push(format!("tail bound not strict at y={y}, gamma={gamma}: ratio {}", t.ratio));
        }
    }
    // moment bounds at the ladder (n = 1 is the exact-equality case)
    for &(n, gamma, r) in &[(0usize, 1.0, 2.0), (1, 2.0, 3.0), (2, 1.0, 1.5), (3, 0.5, 2.0), (4, 2.0, 3.0)] {
        let t = gauss_tail_moment(n, gamma, r).map_err(|e| e.to_string())?;
        let limit = if n == 1 { 1.0 + 1e-10 } else { 1.0 };
        if t.ratio >= limit {
            problems.push(format!("moment bound violated at n={n}: ratio {}", t.ratio));
        }
    }
    for dim in 1..=3usize {
        let t = gauss_tail_moment_radial(dim, 2, 1.0, 2.0).map_err(|e| e.to_string())?;
        if t.ratio >= 1.0 {
            problems.push(format!("radial moment bound violated at d={dim}: ratio {}", t.ratio));
        }
    }

    if problems.is_empty() {
        Ok(format!(
            "3 x {N} samples, zero violations (worst margins {:.1e}, {:.1e}, {:.1e}); tail ladders strict",
            r1.worst_margin, r2.worst_margin, r3.worst_margin
        ))
    } else {
        Err(problems.join("; "))
    }
}

// --- criterion 10 --------------------------------------------------------

fn c10_sum_log_slope() -> Result<String, String> {
    let lam = CMatrix::from_rows(&[&[C64::new(1.0, 0.0)]]);
    let mut pts = Vec::new();
    for &sep in &[6.0, 8.0, 10.0, 12.0] {
        let members = vec![
            NormalFormMember { lambda_mat: lam.clone(), omega: 0.0, center: vec![-sep / 2.0], theta: 0.0 },
            NormalFormMember { lambda_mat: lam.clone(), omega: 0.0, center: vec![sep / 2.0], theta: 0.0 },
        ];
        let r = sum_gaussian_log_bound(&members).map_err(|e| e.to_string())?;
        pts.push((sep * sep, r.lhs_norm.ln()));
    }
    let n = pts.len() as f64;
    let sx: f64 = pts.iter().map(|p| p.0).sum();
    let sy: f64 = pts.iter().map(|p| p.1).sum();
    let sxx: f64 = pts.iter().map(|p| p.0 * p.0).sum();
    let sxy: f64 = pts.iter().map(|p| p.0 * p.1).sum();
    let slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    if (slope + 0.25).abs() <= 0.15 * 0.25 {
        Ok(format!("regression slope of ln||g ln g - sum|| vs L^2: {slope:.4}, within 15% of -0.25"))
    } else {
        Err(format!("slope {slope:.4} outside -0.25 +- 15%"))
    }
}

// --- criterion 11 --------------------------------------------------------

fn c11_slow_variation() -> Result<String, String> {
    let cfg = crossing_gaussons();
    let grid = Grid::new(1, 40.0, 512).map_err(|e| e.to_string())?;
    let solver = SolverConfig::new(1.0, 2.5e-4);
    // dense trajectory over the late window of the T_n = 12 run
    let samples: Vec<f64> = (0..=28).map(|i| 11.3 + 0.025 * i as f64).collect();
    let out = lognls_core::multisoliton::build_approximate_multisoliton(
        &cfg, 12.0, &solver, &grid, &samples, 1e-10,
    )
    .map_err(|e| e.to_string())?;
    let t_ref = 11.25;
    let rep = slow_variation_report(&out.fields, &cfg.members, cfg.v_star, t_ref, &solver)
        .map_err(|e| e.to_string())?;

    let mut problems = Vec::new();
    if !rep.envelope_c.is_finite() || rep.envelope_c <= 0.0 {
        problems.push(format!("envelope constant not finite/positive: {}", rep.envelope_c));
    }
    match &rep.fit {
        Some(fit) if fit.c < 0.0 => {}
        Some(fit) => problems.push(format!("quadratic log-fit slope {:.3} not negative", fit.c)),
        None => problems.push("log-fit failed".into()),
    }
    if rep.energy_drift >= 1e-6 {
        problems.push(format!("energy drift {:.2e} >= 1e-6", rep.energy_drift));
    }
    if problems.is_empty() {
        Ok(format!(
            "envelope C = {:.3e}, log-fit slope {:.2}, |dS/dt| in [{:.1e}, {:.1e}], E drift {:.1e}",
            rep.envelope_c,
            rep.fit.as_ref().map(|f| f.c).unwrap_or(f64::NAN),
            rep.ds_dt.iter().cloned().fold(f64::INFINITY, f64::min),
            rep.ds_dt.iter().cloned().fold(0.0, f64::max),
            rep.energy_drift
        ))
    } else {
        Err(problems.join("; "))
    }
}

// --- criterion 12 --------------------------------------------------------

fn c12_weighted_ladder(seed: u64) -> Result<String, String> {
    // two Gaussons launched from the origin with opposite unit speeds
    let members = vec![
        GaussianParams64::gausson(1, 0.0, vec![0.0], vec![1.0], 0.0, 1.0),
        GaussianParams64::gausson(1, 0.0, vec![0.0], vec![-1.0], 0.0, 1.0),
    ];
    let times = [3.0, 4.0, 5.0, 6.0];
    let mut ts = Vec::new();
    let mut vals = Vec::new();
    for &t in &times {
        let v = weighted_log_diff_norm(&members, t).map_err(|e| e.to_string())?;
        ts.push(t);
        vals.push(v);
    }
    // pad with midpoints for the 6-sample minimum of the quadratic fit
    for &t in &[3.5, 4.5, 5.5] {
        let v = weighted_log_diff_norm(&members, t).map_err(|e| e.to_string())?;
        ts.push(t);
        vals.push(v);
    }
    let fit = fit_gaussian_decay(&ts, &vals, 0.0).map_err(|e| e.to_string())?;
    let target = -1.0; // -lambda v_*^2 / 4
    let mut problems = Vec::new();
    if !(1.5 * target..=0.5 * target).contains(&fit.c) {
        problems.push(format!("ladder slope {:.3} outside 50% of {target}", fit.c));
    }
    let dom = pointwise_domination_check(&members, 4.0, 10_000, seed).map_err(|e| e.to_string())?;
    if dom.violations > 0 {
        problems.push(format!(
            "{} pointwise domination violations (worst margin {:.3e})",
            dom.violations, dom.worst_margin
        ));
    }
    if problems.is_empty() {
        Ok(format!(
            "weighted-norm ladder slope {:.3} (target {target}), domination clean over {} points (worst margin {:.2e})",
            fit.c, dom.samples, dom.worst_margin
        ))
    } else {
        Err(problems.join("; "))
    }
}
