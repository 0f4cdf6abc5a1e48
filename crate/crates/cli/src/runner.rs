//! Command implementations. Each reads a TOML config, runs the experiment,
//! writes CSV/JSON artifacts into a content-addressed run directory and
//! finishes with a manifest.

use crate::config::{
    BreatherConfig, ConfigError, GaussonConfig, LocalizedConfig, MatrixOdeConfig, MultisolitonConfig,
};
use crate::experiment::{fit_run, run_ladder};
use crate::manifest::RunDir;
use lognls_core::gaussian::{
    breather_trajectory_csv, evolve_breather, evolve_matrix_ode_fine, matrix_trajectory_csv,
};
use lognls_core::grid::Grid;
use lognls_core::inequality::{
    gauss_tail_1d, gauss_tail_moment, pointwise_domination_check, sum_gaussian_log_bound,
    sweep_f1_expansion, sweep_log_pair, sweep_zlogz_lipschitz, weighted_log_diff_norm,
    NormalFormMember,
};
use lognls_core::linalg::CMatrix;
use lognls_core::localized::slow_variation_report;
use lognls_core::multisoliton::{error_records_csv, BuildError, MultiConfig};
use lognls_core::{fmt_g17, C64, GaussianParams64};
use serde::Serialize;
use std::path::{Path, PathBuf};

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error("{0}")]
    Config(#[from] ConfigError),
    #[error("validity gate: {0}")]
    Gate(String),
    #[error("check failed: {0}")]
    Check(String),
    #[error("{0}")]
    Other(String),
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
}

impl RunError {
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Config(_) => 2,
            RunError::Gate(_) => 3,
            RunError::Check(_) => 1,
            RunError::Other(_) | RunError::Io(_) => 1,
        }
    }
}

fn classify(e: BuildError) -> RunError {
    match e {
        BuildError::SeparationViolated { .. } | BuildError::BoxTooSmall { .. } => RunError::Gate(e.to_string()),
        other => RunError::Other(other.to_string()),
    }
}

fn read_config_text(path: &Path) -> Result<String, RunError> {
    std::fs::read_to_string(path).map_err(|source| {
        RunError::Config(ConfigError::Io { path: path.display().to_string(), source })
    })
}

pub fn cmd_breather(config_path: &Path, out_dir: &Path, seed: u64) -> Result<PathBuf, RunError> {
    let text = read_config_text(config_path)?;
    let cfg = BreatherConfig::load(config_path)?;
    let states = evolve_breather(cfg.alpha_r, cfg.alpha_i, cfg.lambda, cfg.t_end, cfg.tol)
        .map_err(|e| RunError::Other(e.to_string()))?;
    let mut run = RunDir::create(out_dir, "breather", &text, seed)?;
    run.write_text("trajectory.csv", &breather_trajectory_csv(&states))?;
    Ok(run.finish()?)
}

pub fn cmd_matrix_ode(config_path: &Path, out_dir: &Path, seed: u64) -> Result<PathBuf, RunError> {
    let text = read_config_text(config_path)?;
    let cfg = MatrixOdeConfig::load(config_path)?;
    let a_in = cfg.a_in()?;
    let times: Vec<f64> = (0..=cfg.samples)
        .map(|i| cfg.t_end * i as f64 / cfg.samples as f64)
        .collect();
    let states = evolve_matrix_ode_fine(&a_in, cfg.lambda, &times, cfg.tol, 0.005)
        .map_err(|e| RunError::Other(e.to_string()))?;
    let mut run = RunDir::create(out_dir, "matrix-ode", &text, seed)?;
    run.write_text("trajectory.csv", &matrix_trajectory_csv(&states))?;
    Ok(run.finish()?)
}

pub fn cmd_gausson(config_path: &Path, out_dir: &Path, seed: u64) -> Result<PathBuf, RunError> {
    let text = read_config_text(config_path)?;
    let cfg = GaussonConfig::load(config_path)?;
    let dim = cfg.x0.len();
    if cfg.v.len() != dim {
        return Err(RunError::Config(ConfigError::Invalid {
            path: config_path.display().to_string(),
            message: "x0 and v must have the same dimension".into(),
        }));
    }
    if cfg.lambda <= 0.0 {
        return Err(RunError::Config(ConfigError::Invalid {
            path: config_path.display().to_string(),
            message: "field `lambda` must be positive for a Gausson".into(),
        }));
    }
    let a_in = CMatrix::scaled_identity(dim, C64::new(2.0 * cfg.lambda, 0.0));
    let times: Vec<f64> = (0..=cfg.samples)
        .map(|i| cfg.t_end * i as f64 / cfg.samples as f64)
        .collect();
    let states = evolve_matrix_ode_fine(&a_in, cfg.lambda, &times, cfg.tol, 0.01)
        .map_err(|e| RunError::Other(e.to_string()))?;
    let mut run = RunDir::create(out_dir, "gausson", &text, seed)?;
    run.write_text("trajectory.csv", &matrix_trajectory_csv(&states))?;
    Ok(run.finish()?)
}

#[derive(Serialize)]
struct LadderJson {
    sigma_minus: f64,
    v_star: f64,
    epsilon0: f64,
    t_sep: f64,
    rate_coefficient: f64,
    floor: f64,
    runs: Vec<RunJson>,
    fit: Option<lognls_core::DecayFit64>,
}

#[derive(Serialize)]
struct RunJson {
    t_n: f64,
    window: (f64, f64),
    excluded: Option<String>,
    csv: Option<String>,
}

fn build_command(config_path: &Path, out_dir: &Path, seed: u64, command: &str) -> Result<PathBuf, RunError> {
    let text = read_config_text(config_path)?;
    let cfg = MultisolitonConfig::load(config_path)?;
    let members = cfg.members()?;
    let grid = Grid::new(members[0].dim, cfg.grid.extent, cfg.grid.points_per_dim)
        .map_err(|e| RunError::Other(e.to_string()))?;
    let multi = MultiConfig::derive(members, cfg.t_n_list.clone(), cfg.t_obs, cfg.ode_tol)
        .map_err(classify)?;
    let solver = cfg.solver_config();
    let outcome = run_ladder(&multi, &grid, &solver, cfg.sample_spacing, cfg.ode_tol, cfg.control_run)
        .map_err(classify)?;

    if outcome.runs.iter().all(|r| r.excluded.is_some()) {
        return Err(RunError::Gate(format!(
            "every T_n in the ladder violates the separation gate: {}",
            outcome.runs[0].excluded.clone().unwrap_or_default()
        )));
    }

    let mut run_dir = RunDir::create(out_dir, command, &text, seed)?;
    let mut runs_json = Vec::new();
    for (k, r) in outcome.runs.iter().enumerate() {
        let csv = if r.excluded.is_none() {
            let name = format!("errors_tn{k}.csv");
            run_dir.write_text(&name, &error_records_csv(&r.records))?;
            Some(name)
        } else {
            None
        };
        runs_json.push(RunJson { t_n: r.t_n, window: r.window, excluded: r.excluded.clone(), csv });
    }
    if !outcome.control.is_empty() {
        run_dir.write_text("control.csv", &error_records_csv(&outcome.control))?;
    }
    if let Some(r) = outcome.runs.iter().rev().find(|r| r.excluded.is_none()) {
        if let Some((t, field)) = r.fields.last() {
            let mut buf = Vec::new();
            lognls_core::grid::write_field(field, &mut buf).map_err(|e| RunError::Other(e.to_string()))?;
            let path = run_dir.dir.join("final_data.bin");
            std::fs::write(&path, buf)?;
            run_dir.note_output("final_data.bin");
            run_dir.write_json(
                "final_data.json",
                &lognls_core::grid::FieldMeta { lambda: cfg.lambda, eps: cfg.solver.eps, t: *t },
            )?;
        }
    }
    let fit = outcome
        .runs
        .iter()
        .rev()
        .find(|r| r.excluded.is_none())
        .and_then(|r| fit_run(r, outcome.floor, 2.0 * cfg.sample_spacing).ok());
    let summary = LadderJson {
        sigma_minus: outcome.sigma_minus,
        v_star: outcome.v_star,
        epsilon0: outcome.epsilon0,
        t_sep: outcome.t_sep,
        rate_coefficient: outcome.rate_coefficient,
        floor: outcome.floor,
        runs: runs_json,
        fit,
    };
    run_dir.write_json("fit.json", &summary)?;
    Ok(run_dir.finish()?)
}

pub fn cmd_build_multisoliton(config_path: &Path, out_dir: &Path, seed: u64) -> Result<PathBuf, RunError> {
    build_command(config_path, out_dir, seed, "build-multisoliton")
}

pub fn cmd_multigaussian(config_path: &Path, out_dir: &Path, seed: u64) -> Result<PathBuf, RunError> {
    build_command(config_path, out_dir, seed, "multigaussian")
}

pub fn cmd_localized(config_path: &Path, out_dir: &Path, seed: u64) -> Result<PathBuf, RunError> {
    let text = read_config_text(config_path)?;
    let cfg = LocalizedConfig::load(config_path)?;
    let ms = &cfg.multisoliton;
    let members = ms.members()?;
    let grid = Grid::new(members[0].dim, ms.grid.extent, ms.grid.points_per_dim)
        .map_err(|e| RunError::Other(e.to_string()))?;
    let multi = MultiConfig::derive(members, ms.t_n_list.clone(), ms.t_obs, ms.ode_tol).map_err(classify)?;
    let solver = ms.solver_config();
    let t_n = cfg.t_n.unwrap_or(*ms.t_n_list.last().unwrap());
    let n = ((t_n - cfg.window_start) / cfg.window_spacing).round() as usize;
    let samples: Vec<f64> = (0..=n).map(|i| t_n - (n - i) as f64 * cfg.window_spacing).collect();
    let out = lognls_core::multisoliton::build_approximate_multisoliton(
        &multi, t_n, &solver, &grid, &samples, ms.ode_tol,
    )
    .map_err(classify)?;
    let rep = slow_variation_report(&out.fields, &multi.members, multi.v_star.max(1.0), cfg.t_ref, &solver)
        .map_err(|e| match e {
            lognls_core::localized::LocalizedError::SupportsOverlap { .. } => RunError::Gate(e.to_string()),
            other => RunError::Other(other.to_string()),
        })?;

    let mut run_dir = RunDir::create(out_dir, "localized", &text, seed)?;
    // per-time localized quantities
    let mut reports = Vec::new();
    let shifted: Vec<GaussianParams64> = multi
        .members
        .iter()
        .map(|m| {
            let mut s = m.clone();
            s.x0 = m.center(cfg.t_ref);
            s
        })
        .collect();
    for (t, field) in &out.fields {
        let part = lognls_core::localized::build_partition(&shifted, t - cfg.t_ref, multi.v_star.max(1.0), &grid)
            .map_err(|e| RunError::Gate(e.to_string()))?;
        let mut rep = lognls_core::localized::localized_quantities(field, &part, &solver)
            .map_err(|e| RunError::Other(e.to_string()))?;
        rep.t = *t; // label with absolute time, not the partition radius clock
        reports.push(rep);
    }
    run_dir.write_text("localized.csv", &lognls_core::localized::localized_report_csv(&reports))?;
    let mut slow_csv = String::from("t,ds_dt\n");
    for (t, v) in rep.times.iter().zip(&rep.ds_dt) {
        slow_csv.push_str(&format!("{},{}\n", fmt_g17(*t), fmt_g17(*v)));
    }
    run_dir.write_text("slow_variation.csv", &slow_csv)?;
    run_dir.write_json("envelope.json", &rep)?;

    // Gausson tail and pairwise near-orthogonality ladders
    let all_gaussons = multi.members.iter().all(|m| {
        let target = CMatrix::scaled_identity(m.dim, C64::new(2.0 * m.lambda, 0.0));
        m.a_in.max_abs_diff(&target) < 1e-12
    });
    if all_gaussons {
        let mut tail_csv = String::from("t,name,raw,normalized\n");
        for &t in &[4.0, 6.0, 8.0] {
            let rows = lognls_core::localized::gausson_tail_report(&multi.members[0], t, multi.v_star.max(1.0))
                .map_err(|e| RunError::Other(e.to_string()))?;
            for r in rows {
                tail_csv.push_str(&format!("{},{},{},{}\n", fmt_g17(t), r.name, fmt_g17(r.raw), fmt_g17(r.normalized)));
            }
        }
        run_dir.write_text("tail_ladder.csv", &tail_csv)?;
        if multi.members.len() >= 2 {
            let mut orth_csv = String::from("t,name,raw,normalized\n");
            for &t in &[4.0, 6.0, 8.0] {
                let rows = lognls_core::localized::gausson_orthogonality_report(
                    &shifted[0],
                    &shifted[1],
                    t,
                    multi.v_star.max(1.0),
                )
                .map_err(|e| RunError::Other(e.to_string()))?;
                for r in rows {
                    orth_csv.push_str(&format!("{},{},{},{}\n", fmt_g17(t), r.name, fmt_g17(r.raw), fmt_g17(r.normalized)));
                }
            }
            run_dir.write_text("orthogonality_ladder.csv", &orth_csv)?;
        }
    }
    Ok(run_dir.finish()?)
}

#[derive(Serialize)]
struct TailLadderJson {
    points: Vec<(f64, f64, f64)>, // (y or R, lhs, bound)
    all_strict: bool,
}

pub fn cmd_verify_inequalities(
    out_dir: &Path,
    seed: u64,
    samples: u64,
) -> Result<PathBuf, RunError> {
    if samples == 0 {
        return Err(RunError::Config(ConfigError::Invalid {
            path: "--samples".into(),
            message: "must be at least 1".into(),
        }));
    }
    let pseudo_config = format!("samples = {samples}\nseed = {seed}\n");
    let mut run_dir = RunDir::create(out_dir, "verify-inequalities", &pseudo_config, seed)?;

    let r1 = sweep_log_pair::<f64>(samples, seed);
    let r2 = sweep_f1_expansion::<f64>(samples, seed);
    let r3 = sweep_zlogz_lipschitz::<f64>(samples, seed);
    run_dir.write_json("log_pair.json", &r1)?;
    run_dir.write_json("f1_expansion.json", &r2)?;
    run_dir.write_json("zlogz_lipschitz.json", &r3)?;

    let mut tail_pts = Vec::new();
    let mut strict = true;
    for &(y, gamma) in &[(0.5, 1.0), (1.0, 1.0), (2.0, 0.5), (4.0, 2.0), (10.0, 1.0)] {
        let t = gauss_tail_1d(y, gamma).map_err(|e| RunError::Other(e.to_string()))?;
        strict &= t.ratio < 1.0;
        tail_pts.push((y, t.lhs, t.bound));
    }
    run_dir.write_json("gauss_tail.json", &TailLadderJson { points: tail_pts.clone(), all_strict: strict })?;
    let mut tail_csv = String::from("y,lhs,bound\n");
    for (y, lhs, bound) in &tail_pts {
        tail_csv.push_str(&format!("{},{},{}\n", fmt_g17(*y), fmt_g17(*lhs), fmt_g17(*bound)));
    }
    run_dir.write_text("gauss_tail.csv", &tail_csv)?;

    let mut mom_pts = Vec::new();
    let mut mom_ok = true;
    for &(n, gamma, r) in &[(0usize, 1.0, 2.0), (1, 2.0, 3.0), (2, 1.0, 1.5), (4, 2.0, 3.0)] {
        let t = gauss_tail_moment(n, gamma, r).map_err(|e| RunError::Other(e.to_string()))?;
        mom_ok &= t.ratio <= if n == 1 { 1.0 + 1e-10 } else { 1.0 };
        mom_pts.push((n as f64, t.lhs, t.bound));
    }
    run_dir.write_json("gauss_tail_moments.json", &TailLadderJson { points: mom_pts, all_strict: mom_ok })?;

    let lam = CMatrix::from_rows(&[&[C64::new(1.0, 0.0)]]);
    let mut sum_rows = Vec::new();
    for &sep in &[6.0, 8.0, 10.0, 12.0] {
        let members = vec![
            NormalFormMember { lambda_mat: lam.clone(), omega: 0.0, center: vec![-sep / 2.0], theta: 0.0 },
            NormalFormMember { lambda_mat: lam.clone(), omega: 0.0, center: vec![sep / 2.0], theta: 0.0 },
        ];
        let r = sum_gaussian_log_bound(&members).map_err(|e| RunError::Other(e.to_string()))?;
        sum_rows.push(r);
    }
    run_dir.write_json("sum_gaussian_log.json", &sum_rows)?;
    let mut sum_csv = String::from("separation,lhs_norm,rhs_shape,implied_constant\n");
    for (sep, r) in [6.0, 8.0, 10.0, 12.0].iter().zip(&sum_rows) {
        sum_csv.push_str(&format!(
            "{},{},{},{}\n",
            fmt_g17(*sep),
            fmt_g17(r.lhs_norm),
            fmt_g17(r.rhs_shape),
            fmt_g17(r.implied_constant)
        ));
    }
    run_dir.write_text("sum_gaussian_log.csv", &sum_csv)?;

    let members = vec![
        GaussianParams64::gausson(1, 0.0, vec![0.0], vec![1.0], 0.0, 1.0),
        GaussianParams64::gausson(1, 0.0, vec![0.0], vec![-1.0], 0.0, 1.0),
    ];
    let mut weighted_rows = Vec::new();
    for &t in &[3.0, 4.0, 5.0, 6.0] {
        let v = weighted_log_diff_norm(&members, t).map_err(|e| RunError::Other(e.to_string()))?;
        weighted_rows.push((t, v));
    }
    let dom = pointwise_domination_check(&members, 4.0, samples.min(10_000), seed)
        .map_err(|e| RunError::Other(e.to_string()))?;
    #[derive(Serialize)]
    struct WeightedJson {
        ladder: Vec<(f64, f64)>,
        domination: lognls_core::inequality::CheckReport<f64>,
    }
    let mut wcsv = String::from("t,lhs\n");
    for (t, v) in &weighted_rows {
        wcsv.push_str(&format!("{},{}\n", fmt_g17(*t), fmt_g17(*v)));
    }
    run_dir.write_text("weighted_log_diff.csv", &wcsv)?;
    run_dir.write_json("weighted_log_diff.json", &WeightedJson { ladder: weighted_rows, domination: dom.clone() })?;

    let manifest = run_dir.finish()?;
    let violations = r1.violations + r2.violations + r3.violations + dom.violations;
    if violations > 0 || !strict || !mom_ok {
        return Err(RunError::Check(format!(
            "{violations} violations; tail strict: {strict}; moments ok: {mom_ok}"
        )));
    }
    Ok(manifest)
}

#[derive(Serialize)]
pub struct AcceptanceSummary {
    pub passed: bool,
    pub reports: Vec<crate::acceptance::CriterionReport>,
}

pub fn cmd_acceptance(out_dir: &Path, only: Option<usize>, seed: u64) -> Result<PathBuf, RunError> {
    let reports = crate::acceptance::run_all(only, seed);
    for r in &reports {
        println!("{}", r.line());
    }
    let passed = reports.iter().all(|r| r.passed);
    let pseudo_config = format!("only = {only:?}\nseed = {seed}\n");
    let mut run_dir = RunDir::create(out_dir, "acceptance", &pseudo_config, seed)?;
    run_dir.write_json("summary.json", &AcceptanceSummary { passed, reports })?;
    let manifest = run_dir.finish()?;
    if passed {
        Ok(manifest)
    } else {
        Err(RunError::Check("one or more acceptance criteria failed".into()))
    }
}
