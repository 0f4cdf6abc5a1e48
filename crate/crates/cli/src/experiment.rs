//! The backward-construction ladder experiment shared by the CLI commands
//! and the acceptance suite: per-T_n validity windows, the N = 1 control
//! run for the error floor, and the decay fit over floor-filtered samples.

use lognls_core::multisoliton::{
    build_approximate_multisoliton, fit_gaussian_decay, BuildError, DecayFit, ErrorRecord,
};
use lognls_core::solver::SolverConfig;
use lognls_core::{Field64, Grid64, MultiConfig64};
use serde::Serialize;

#[derive(Debug, Serialize)]
pub struct LadderRun {
    pub t_n: f64,
    pub window: (f64, f64),
    #[serde(skip)]
    pub records: Vec<ErrorRecord<f64>>,
    #[serde(skip)]
    pub fields: Vec<(f64, Field64)>,
    pub excluded: Option<String>,
}

#[derive(Debug, Serialize)]
pub struct LadderOutcome {
    pub runs: Vec<LadderRun>,
    #[serde(skip)]
    pub control: Vec<ErrorRecord<f64>>,
    /// max L² error of the single-member control over its window
    pub floor: f64,
    pub sigma_minus: f64,
    pub v_star: f64,
    pub epsilon0: f64,
    pub t_sep: f64,
    pub rate_coefficient: f64,
}

/// First sample time `t` in [t_obs, t_n] such that the member centers stay
/// at least 1/ε₀ apart on every sample of [t, t_n]. None if t_n itself is
/// inside the forbidden zone.
pub fn valid_window_start(cfg: &MultiConfig64, t_n: f64, spacing: f64) -> Option<f64> {
    if cfg.members.len() < 2 {
        return Some(cfg.t_obs.min(t_n));
    }
    let min_allowed = 1.0 / cfg.epsilon0;
    if cfg.min_center_distance(t_n) < min_allowed {
        return None;
    }
    let mut start = t_n;
    let mut k = 1usize;
    loop {
        let t = t_n - k as f64 * spacing;
        if t < cfg.t_obs - 1e-12 {
            break;
        }
        if cfg.min_center_distance(t) < min_allowed {
            break;
        }
        start = t;
        k += 1;
    }
    Some(start)
}

fn sample_grid(lo: f64, hi: f64, spacing: f64) -> Vec<f64> {
    // anchored at hi so ladder runs share sample times modulo the window
    let n = ((hi - lo) / spacing).round() as usize;
    (0..=n).map(|i| hi - (n - i) as f64 * spacing).collect()
}

/// Runs the whole T_n ladder plus the N = 1 control at matched windows.
pub fn run_ladder(
    cfg: &MultiConfig64,
    grid: &Grid64,
    solver: &SolverConfig<f64>,
    sample_spacing: f64,
    ode_tol: f64,
    with_control: bool,
) -> Result<LadderOutcome, BuildError> {
    let mut runs = Vec::new();
    for &t_n in &cfg.t_n_list {
        match valid_window_start(cfg, t_n, sample_spacing) {
            None => runs.push(LadderRun {
                t_n,
                window: (t_n, t_n),
                records: Vec::new(),
                fields: Vec::new(),
                excluded: Some(format!(
                    "members within 1/eps0 = {:.3} of each other at T_n = {t_n}",
                    1.0 / cfg.epsilon0
                )),
            }),
            Some(lo) => {
                let samples = sample_grid(lo, t_n, sample_spacing);
                let out = build_approximate_multisoliton(cfg, t_n, solver, grid, &samples, ode_tol)?;
                runs.push(LadderRun { t_n, window: (lo, t_n), records: out.records, fields: out.fields, excluded: None });
            }
        }
    }

    let (control, floor) = if with_control {
        let single = MultiConfig64::derive(
            vec![cfg.members[0].clone()],
            cfg.t_n_list.clone(),
            cfg.t_obs,
            ode_tol,
        )?;
        // control over the largest valid window of the ladder
        let t_n = *cfg.t_n_list.last().unwrap();
        let lo = runs
            .iter()
            .rev()
            .find(|r| r.excluded.is_none())
            .map(|r| r.window.0)
            .unwrap_or(cfg.t_obs);
        let samples = sample_grid(lo, t_n, sample_spacing);
        let out = build_approximate_multisoliton(&single, t_n, solver, grid, &samples, ode_tol)?;
        let floor = out.records.iter().map(|r| r.l2).fold(0.0f64, f64::max);
        (out.records, floor)
    } else {
        (Vec::new(), 0.0)
    };

    Ok(LadderOutcome {
        runs,
        control,
        floor,
        sigma_minus: cfg.sigma_minus,
        v_star: cfg.v_star,
        epsilon0: cfg.epsilon0,
        t_sep: cfg.t_sep,
        rate_coefficient: cfg.rate_coefficient(),
    })
}

/// Decay fit of one run's L² errors over its window, with the trailing
/// samples next to T_n dropped (the construction pins w_n(T_n) = 0, which
/// bends the last fraction of the curve below the envelope).
pub fn fit_run(run: &LadderRun, floor: f64, trailing_trim: f64) -> Result<DecayFit<f64>, BuildError> {
    let cutoff_t = run.t_n - trailing_trim;
    let mut times = Vec::new();
    let mut errors = Vec::new();
    for r in &run.records {
        if r.t <= cutoff_t {
            times.push(r.t);
            errors.push(r.l2);
        }
    }
    fit_gaussian_decay(&times, &errors, floor)
}

/// Pooled fit over plateau samples of several runs (the oscillating-member
/// protocol: each run contributes its late-window levels).
pub fn fit_pooled_plateaus(
    runs: &[LadderRun],
    offsets: &[f64],
    floor: f64,
) -> Result<DecayFit<f64>, BuildError> {
    let mut times = Vec::new();
    let mut errors = Vec::new();
    for run in runs {
        if run.excluded.is_some() {
            continue;
        }
        for &off in offsets {
            let target = run.t_n - off;
            if let Some(rec) = run
                .records
                .iter()
                .min_by(|a, b| (a.t - target).abs().partial_cmp(&(b.t - target).abs()).unwrap())
            {
                if (rec.t - target).abs() < 1e-6 {
                    times.push(rec.t);
                    errors.push(rec.l2);
                }
            }
        }
    }
    fit_gaussian_decay(&times, &errors, floor)
}
