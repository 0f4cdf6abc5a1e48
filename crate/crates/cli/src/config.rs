//! TOML experiment configurations. One file per run; unknown fields are
//! rejected so typos surface as config errors with the field name.

use lognls_core::linalg::CMatrix;
use lognls_core::solver::Splitting;
use lognls_core::{C64, GaussianParams64};
use serde::{Deserialize, Serialize};
use std::path::Path;

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("invalid config {path}: {message}")]
    Invalid { path: String, message: String },
}

fn parse<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
        path: path.display().to_string(),
        source,
    })?;
    toml::from_str(&text).map_err(|e| ConfigError::Invalid {
        path: path.display().to_string(),
        message: e.to_string(),
    })
}

fn default_tol() -> f64 {
    1e-10
}

fn default_samples() -> usize {
    200
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct BreatherConfig {
    pub lambda: f64,
    pub alpha_r: f64,
    #[serde(default)]
    pub alpha_i: f64,
    pub t_end: f64,
    #[serde(default = "default_tol")]
    pub tol: f64,
}

impl BreatherConfig {
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        parse(path)
    }
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct MatrixOdeConfig {
    pub lambda: f64,
    /// Re A_in, row-major rows
    pub a_re: Vec<Vec<f64>>,
    /// Im A_in (zero if omitted)
    #[serde(default)]
    pub a_im: Option<Vec<Vec<f64>>>,
    pub t_end: f64,
    #[serde(default = "default_samples")]
    pub samples: usize,
    #[serde(default = "default_tol")]
    pub tol: f64,
}

impl MatrixOdeConfig {
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        parse(path)
    }

    pub fn a_in(&self) -> Result<CMatrix<f64>, ConfigError> {
        let d = self.a_re.len();
        let mut m = CMatrix::zeros(d);
        for (i, row) in self.a_re.iter().enumerate() {
            if row.len() != d {
                return Err(ConfigError::Invalid {
                    path: String::new(),
                    message: format!("a_re row {i} has {} entries, expected {d}", row.len()),
                });
            }
            for (j, &v) in row.iter().enumerate() {
                m[(i, j)] = C64::new(v, 0.0);
            }
        }
        if let Some(im) = &self.a_im {
            for (i, row) in im.iter().enumerate() {
                for (j, &v) in row.iter().enumerate() {
                    let re = m[(i, j)].re;
                    m[(i, j)] = C64::new(re, v);
                }
            }
        }
        Ok(m)
    }
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct GaussonConfig {
    pub lambda: f64,
    #[serde(default)]
    pub omega: f64,
    pub x0: Vec<f64>,
    pub v: Vec<f64>,
    #[serde(default)]
    pub theta: f64,
    pub t_end: f64,
    #[serde(default = "default_samples")]
    pub samples: usize,
    #[serde(default = "default_tol")]
    pub tol: f64,
}

impl GaussonConfig {
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        parse(path)
    }
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct MemberConfig {
    #[serde(default)]
    pub omega: f64,
    pub x0: Vec<f64>,
    pub v: Vec<f64>,
    #[serde(default)]
    pub theta: f64,
    /// Re A_in rows; a Gausson member (2λI) if omitted
    #[serde(default)]
    pub a_re: Option<Vec<Vec<f64>>>,
    #[serde(default)]
    pub a_im: Option<Vec<Vec<f64>>>,
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub extent: f64,
    pub points_per_dim: usize,
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct SolverSection {
    pub dt: f64,
    #[serde(default = "default_eps")]
    pub eps: f64,
    #[serde(default)]
    pub lie_splitting: bool,
    #[serde(default = "default_tail_tol")]
    pub tail_tol: f64,
}

fn default_eps() -> f64 {
    1e-14
}

fn default_tail_tol() -> f64 {
    1e-10
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct MultisolitonConfig {
    pub lambda: f64,
    pub members: Vec<MemberConfig>,
    pub t_n_list: Vec<f64>,
    pub t_obs: f64,
    /// spacing of the error-record sample times
    pub sample_spacing: f64,
    pub grid: GridConfig,
    pub solver: SolverSection,
    #[serde(default = "default_tol")]
    pub ode_tol: f64,
    /// run the N = 1 control (first member alone) to measure the floor
    #[serde(default = "default_true")]
    pub control_run: bool,
}

fn default_true() -> bool {
    true
}

impl MultisolitonConfig {
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        parse(path)
    }

    pub fn members(&self) -> Result<Vec<GaussianParams64>, ConfigError> {
        let dim = self
            .members
            .first()
            .map(|m| m.x0.len())
            .ok_or_else(|| ConfigError::Invalid { path: String::new(), message: "members list is empty".into() })?;
        let mut out = Vec::with_capacity(self.members.len());
        for (i, m) in self.members.iter().enumerate() {
            if m.x0.len() != dim || m.v.len() != dim {
                return Err(ConfigError::Invalid {
                    path: String::new(),
                    message: format!("member {i}: x0/v must have {dim} components"),
                });
            }
            let a_in = match &m.a_re {
                None => CMatrix::scaled_identity(dim, C64::new(2.0 * self.lambda, 0.0)),
                Some(re) => {
                    let mut a = CMatrix::zeros(dim);
                    for (r, row) in re.iter().enumerate() {
                        for (c, &v) in row.iter().enumerate() {
                            a[(r, c)] = C64::new(v, 0.0);
                        }
                    }
                    if let Some(im) = &m.a_im {
                        for (r, row) in im.iter().enumerate() {
                            for (c, &v) in row.iter().enumerate() {
                                let re_v = a[(r, c)].re;
                                a[(r, c)] = C64::new(re_v, v);
                            }
                        }
                    }
                    a
                }
            };
            out.push(GaussianParams64 {
                dim,
                a_in,
                omega: m.omega,
                x0: m.x0.clone(),
                v: m.v.clone(),
                theta: m.theta,
                lambda: self.lambda,
            });
        }
        Ok(out)
    }

    pub fn solver_config(&self) -> lognls_core::SolverConfig64 {
        let mut cfg = lognls_core::SolverConfig64::new(self.lambda, self.solver.dt);
        cfg.eps = self.solver.eps;
        cfg.tail_tol = self.solver.tail_tol;
        if self.solver.lie_splitting {
            cfg.splitting = Splitting::Lie;
        }
        cfg
    }
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct LocalizedConfig {
    /// the builder run that produces the trajectory
    pub multisoliton: MultisolitonConfig,
    /// which T_n of the ladder to analyze (defaults to the largest)
    #[serde(default)]
    pub t_n: Option<f64>,
    /// start of the partition radius clock
    pub t_ref: f64,
    /// analysis window [window_start, T_n]
    pub window_start: f64,
    /// sample spacing inside the window
    pub window_spacing: f64,
}

impl LocalizedConfig {
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        parse(path)
    }
}
