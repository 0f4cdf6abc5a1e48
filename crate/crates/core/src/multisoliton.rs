//! Backward construction of approximate multi-solitons: solve the equation
//! from final data u_n(T_n) = B(T_n), where B is a sum of exact Gaussian
//! members, and measure how fast u_n − B decays forward in time.
//!
//! The decay of ln‖w_n‖ is quadratic in t with coefficient −σ₋ v_*²/4
//! (σ₋ = λ when every member is a Gausson); fits report the quadratic
//! coefficient with the time offset left free, since the theory fixes
//! neither the constant nor the origin.

use crate::gaussian::{eval_gaussian_solution, evolve_matrix_ode_fine, GaussianError, GaussianParams, GaussianState};
use crate::grid::{Field, Grid};
use crate::solver::{fh1_distance, h1_distance, integrate, l2_distance, SolverConfig, SolverError};
use crate::{cast, fmt_g17, Real, SolverReal};
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum BuildError {
    #[error(transparent)]
    Gaussian(#[from] GaussianError),
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error("grid box too small: member center {center} needs margin {margin} inside half-extent {half}")]
    BoxTooSmall { center: f64, margin: f64, half: f64 },
    #[error("members come within 1/eps0 = {min_allowed} of each other at t = {t} (distance {dist})")]
    SeparationViolated { t: f64, dist: f64, min_allowed: f64 },
    #[error("need at least {need} samples above the error floor, found {found}")]
    InsufficientData { need: usize, found: usize },
    #[error("invalid multi-soliton configuration: {0}")]
    InvalidConfig(String),
}

/// A family of Gaussian members sharing λ, plus the derived separation data.
#[derive(Clone, Debug)]
pub struct MultiConfig<T> {
    pub members: Vec<GaussianParams<T>>,
    pub t_n_list: Vec<T>,
    pub t_obs: T,
    /// min over pairs of |v_j − v_k| (zero for a single member)
    pub v_star: T,
    /// ½ inf over members and time of the smallest eigenvalue of Re A_k(t)
    pub sigma_minus: T,
    /// ½ sup of the largest eigenvalue
    pub sigma_plus: T,
    /// separation threshold from the well-separated Gaussian-sum estimate
    pub epsilon0: T,
    /// time after which centers are provably 1/ε₀ + v_*·t apart
    pub t_sep: T,
}

impl<T: Real> MultiConfig<T> {
    /// Scans each member's width-matrix trajectory over [0, max T_n] to
    /// derive v_*, σ₋, σ₊, ε₀ and T_sep.
    pub fn derive(
        members: Vec<GaussianParams<T>>,
        t_n_list: Vec<T>,
        t_obs: T,
        ode_tol: T,
    ) -> Result<Self, BuildError> {
        if members.is_empty() {
            return Err(BuildError::InvalidConfig("no members".into()));
        }
        let lambda = members[0].lambda;
        let dim = members[0].dim;
        for m in &members {
            m.validate().map_err(BuildError::Gaussian)?;
            if m.lambda != lambda {
                return Err(BuildError::InvalidConfig("members must share lambda".into()));
            }
            if m.dim != dim {
                return Err(BuildError::InvalidConfig("members must share the dimension".into()));
            }
        }
        if t_n_list.is_empty() || t_n_list.windows(2).any(|w| w[1] <= w[0]) || t_n_list[0] <= T::zero() {
            return Err(BuildError::InvalidConfig("T_n list must be positive and increasing".into()));
        }

        let mut v_star = T::infinity();
        for j in 0..members.len() {
            for k in (j + 1)..members.len() {
                let dv = members[j]
                    .v
                    .iter()
                    .zip(&members[k].v)
                    .fold(T::zero(), |s, (&a, &b)| s + (a - b) * (a - b))
                    .sqrt();
                v_star = v_star.min(dv);
            }
        }
        if members.len() > 1 && v_star <= T::zero() {
            return Err(BuildError::InvalidConfig("v_* must be positive".into()));
        }
        if members.len() == 1 {
            v_star = T::zero();
        }

        let t_max = *t_n_list.last().unwrap();
        let scan_times: Vec<T> = (0..=200).map(|i| t_max * cast::<T>(i as f64 / 200.0)).collect();
        let mut eig_min = T::infinity();
        let mut eig_max = T::zero();
        let mut omega_lo = T::infinity();
        let mut omega_hi = T::neg_infinity();
        for m in &members {
            let states = evolve_matrix_ode_fine(&m.a_in, lambda, &scan_times, ode_tol, cast(0.01))?;
            let (lo, hi) = states.last().unwrap().spectrum_bounds;
            eig_min = eig_min.min(lo);
            eig_max = eig_max.max(hi);
            // effective log-amplitude spread in the normal form of the
            // sum-of-Gaussians estimate, including the det prefactor
            let mut dr_lo = T::infinity();
            let mut dr_hi = T::neg_infinity();
            for s in &states {
                let q = cast::<T>(0.25) * s.det_ratio.ln();
                dr_lo = dr_lo.min(q);
                dr_hi = dr_hi.max(q);
            }
            omega_lo = omega_lo.min(m.omega + dr_lo);
            omega_hi = omega_hi.max(m.omega + dr_hi);
        }
        let sigma_minus = cast::<T>(0.5) * eig_min;
        let sigma_plus = cast::<T>(0.5) * eig_max;
        let delta_omega = (omega_hi - omega_lo).max(T::zero());
        let n_members = cast::<T>(members.len() as f64);
        let epsilon0 = (sigma_minus.sqrt() / (delta_omega + T::one()).sqrt().max(n_members.ln().sqrt()))
            .min((sigma_minus / cast::<T>(dim as f64 + 2.0)).sqrt());

        let mut t_sep = T::zero();
        if members.len() > 1 {
            for j in 0..members.len() {
                for k in (j + 1)..members.len() {
                    let dx = members[j]
                        .x0
                        .iter()
                        .zip(&members[k].x0)
                        .fold(T::zero(), |s, (&a, &b)| s + (a - b) * (a - b))
                        .sqrt();
                    t_sep = t_sep.max((epsilon0.recip() + dx) / v_star);
                }
            }
        }

        Ok(MultiConfig { members, t_n_list, t_obs, v_star, sigma_minus, sigma_plus, epsilon0, t_sep })
    }

    pub fn lambda(&self) -> T {
        self.members[0].lambda
    }

    pub fn dim(&self) -> usize {
        self.members[0].dim
    }

    /// Time of closest approach of the member centers within [0, max T_n]
    /// (0 for a single member or members separating from the start).
    pub fn closest_approach_time(&self) -> T {
        if self.members.len() < 2 {
            return T::zero();
        }
        let mut best_t = T::zero();
        let mut best_d = self.min_center_distance(T::zero());
        let t_max = *self.t_n_list.last().unwrap();
        let steps = 4096;
        for i in 1..=steps {
            let t = t_max * cast::<T>(i as f64 / steps as f64);
            let d = self.min_center_distance(t);
            if d < best_d {
                best_d = d;
                best_t = t;
            }
        }
        best_t
    }

    pub fn min_center_distance(&self, t: T) -> T {
        let mut dmin = T::infinity();
        for j in 0..self.members.len() {
            for k in (j + 1)..self.members.len() {
                let cj = self.members[j].center(t);
                let ck = self.members[k].center(t);
                let d = cj.iter().zip(&ck).fold(T::zero(), |s, (&a, &b)| s + (a - b) * (a - b)).sqrt();
                dmin = dmin.min(d);
            }
        }
        dmin
    }

    /// −σ₋ v_*²/4, the expected quadratic coefficient of ln‖w_n‖ vs t.
    pub fn rate_coefficient(&self) -> T {
        -self.sigma_minus * self.v_star * self.v_star * cast(0.25)
    }
}

/// Every member's width/phase trajectory on a shared time grid.
pub struct MemberFlows<T> {
    pub times: Vec<T>,
    /// `states[k][i]` is member k at `times[i]`
    pub states: Vec<Vec<GaussianState<T>>>,
}

/// Evolve every member's width matrix and phase to the requested times
/// (increasing, starting at 0).
pub fn member_flows<T: Real>(cfg: &MultiConfig<T>, times: &[T], ode_tol: T) -> Result<MemberFlows<T>, BuildError> {
    let mut states = Vec::with_capacity(cfg.members.len());
    for m in &cfg.members {
        states.push(evolve_matrix_ode_fine(&m.a_in, m.lambda, times, ode_tol, cast(0.005))?);
    }
    Ok(MemberFlows { times: times.to_vec(), states })
}

/// B(t, ·) = Σ_k B_k(t, ·) sampled on the grid, with a 12-width margin check
/// on every member center.
pub fn sum_field<T: SolverReal>(
    cfg: &MultiConfig<T>,
    flows: &MemberFlows<T>,
    time_index: usize,
    grid: &Grid<T>,
) -> Result<Field<T>, BuildError> {
    let t = flows.times[time_index];
    let half = grid.extent * cast::<T>(0.5);
    for (k, m) in cfg.members.iter().enumerate() {
        let margin = cast::<T>(12.0) / flows.states[k][time_index].spectrum_bounds.0.sqrt();
        for &c in &m.center(t) {
            if c.abs() + margin > half {
                return Err(BuildError::BoxTooSmall {
                    center: c.to_f64().unwrap_or(f64::NAN),
                    margin: margin.to_f64().unwrap_or(f64::NAN),
                    half: half.to_f64().unwrap_or(f64::NAN),
                });
            }
        }
    }
    let mut field = Field::zeros(grid.clone());
    for idx in 0..grid.num_points() {
        let x = grid.coords(idx);
        let mut acc = num_complex::Complex::new(T::zero(), T::zero());
        for (k, m) in cfg.members.iter().enumerate() {
            acc += eval_gaussian_solution(m, &flows.states[k][time_index], &x);
        }
        field.values[idx] = acc;
    }
    Ok(field)
}

/// Final data for the backward construction: B(T_n) on the grid.
pub fn make_final_data<T: SolverReal>(
    cfg: &MultiConfig<T>,
    t_n: T,
    grid: &Grid<T>,
    ode_tol: T,
) -> Result<Field<T>, BuildError> {
    let times = if t_n > T::zero() { vec![T::zero(), t_n] } else { vec![T::zero()] };
    let flows = member_flows(cfg, &times, ode_tol)?;
    sum_field(cfg, &flows, times.len() - 1, grid)
}

/// Distances of w_n(t) = u_n(t) − B(t) at one sample time.
#[derive(Clone, Debug, Serialize)]
pub struct ErrorRecord<T> {
    pub t: T,
    pub l2: T,
    pub h1: T,
    pub fh1: T,
}

pub struct BuildOutput<T: SolverReal> {
    pub records: Vec<ErrorRecord<T>>,
    /// u_n at the sample times (ascending)
    pub fields: Vec<(T, Field<T>)>,
    /// B at the same times, for localized diagnostics
    pub reference: Vec<(T, Field<T>)>,
}

/// Integrate backward from u_n(T_n) = B(T_n) and record the distances to
/// B(t) at each sample time.
///
/// Errors with `SeparationViolated` if the member centers come closer than
/// 1/ε₀ anywhere in the sampled window including T_n — outside that regime
/// the well-separated estimates the construction rests on do not apply.
pub fn build_approximate_multisoliton<T: SolverReal>(
    cfg: &MultiConfig<T>,
    t_n: T,
    solver: &SolverConfig<T>,
    grid: &Grid<T>,
    sample_times: &[T],
    ode_tol: T,
) -> Result<BuildOutput<T>, BuildError> {
    if sample_times.is_empty() {
        return Err(BuildError::InvalidConfig("no sample times".into()));
    }
    let mut samples = sample_times.to_vec();
    samples.sort_by(|a, b| a.partial_cmp(b).unwrap());
    if samples[0] < T::zero() || *samples.last().unwrap() > t_n {
        return Err(BuildError::InvalidConfig("sample times must lie in [0, T_n]".into()));
    }

    // member trajectory on {0} ∪ samples ∪ {T_n}
    let mut times = vec![T::zero()];
    times.extend(samples.iter().copied().filter(|&t| t > T::zero()));
    if *times.last().unwrap() < t_n {
        times.push(t_n);
    }
    let flows = member_flows(cfg, &times, ode_tol)?;

    if cfg.members.len() > 1 {
        let min_allowed = cfg.epsilon0.recip();
        for &t in samples.iter().chain(std::iter::once(&t_n)) {
            let d = cfg.min_center_distance(t);
            if d < min_allowed {
                return Err(BuildError::SeparationViolated {
                    t: t.to_f64().unwrap_or(f64::NAN),
                    dist: d.to_f64().unwrap_or(f64::NAN),
                    min_allowed: min_allowed.to_f64().unwrap_or(f64::NAN),
                });
            }
        }
    }

    let final_data = sum_field(cfg, &flows, times.len() - 1, grid)?;
    let trajectory = integrate(&final_data, t_n, samples[0], solver, &samples)?;

    let mut records = Vec::with_capacity(samples.len());
    let mut fields = Vec::with_capacity(samples.len());
    let mut reference = Vec::with_capacity(samples.len());
    for (t, u) in trajectory {
        let ti = times
            .iter()
            .position(|&tt| tt == t)
            .ok_or_else(|| BuildError::InvalidConfig("internal: sample time missing from flow grid".into()))?;
        let b = sum_field(cfg, &flows, ti, grid)?;
        records.push(ErrorRecord {
            t,
            l2: l2_distance(&u, &b)?,
            h1: h1_distance(&u, &b)?,
            fh1: fh1_distance(&u, &b)?,
        });
        fields.push((t, u));
        reference.push((t, b));
    }
    records.sort_by(|a, b| a.t.partial_cmp(&b.t).unwrap());
    fields.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    reference.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    Ok(BuildOutput { records, fields, reference })
}

/// General-member entry point (members need not be Gaussons). The
/// construction is identical; only the rate the caller compares against
/// changes, via [`MultiConfig::rate_coefficient`], and only the L² column
/// is rate-checked.
pub fn multigaussian_build<T: SolverReal>(
    cfg: &MultiConfig<T>,
    t_n: T,
    solver: &SolverConfig<T>,
    grid: &Grid<T>,
    sample_times: &[T],
    ode_tol: T,
) -> Result<BuildOutput<T>, BuildError> {
    build_approximate_multisoliton(cfg, t_n, solver, grid, sample_times, ode_tol)
}

/// Least-squares fit of ln‖w‖ ≈ a + b·t + c·t² over the samples with
/// ‖w‖ > 10·floor.
#[derive(Clone, Debug, Serialize)]
pub struct DecayFit<T> {
    pub a: T,
    pub b: T,
    pub c: T,
    pub r_squared: T,
    pub window: (T, T),
    pub floor: T,
    pub samples_used: usize,
}

pub fn fit_gaussian_decay<T: Real>(times: &[T], errors: &[T], floor: T) -> Result<DecayFit<T>, BuildError> {
    assert_eq!(times.len(), errors.len());
    let cutoff = floor * cast::<T>(10.0);
    let pts: Vec<(T, T)> = times
        .iter()
        .zip(errors)
        .filter(|(_, &e)| e > cutoff && e.is_finite())
        .map(|(&t, &e)| (t, e.ln()))
        .collect();
    if pts.len() < 6 {
        return Err(BuildError::InsufficientData { need: 6, found: pts.len() });
    }
    let n = cast::<T>(pts.len() as f64);
    let mut s = [T::zero(); 5]; // Σ t^k, k = 0..4
    let mut m = [T::zero(); 3]; // Σ y t^k, k = 0..2
    s[0] = n;
    for &(t, y) in &pts {
        let t2 = t * t;
        s[1] += t;
        s[2] += t2;
        s[3] += t2 * t;
        s[4] += t2 * t2;
        m[0] += y;
        m[1] += y * t;
        m[2] += y * t2;
    }
    let coeffs = solve3([[s[0], s[1], s[2]], [s[1], s[2], s[3]], [s[2], s[3], s[4]]], m)
        .ok_or_else(|| BuildError::InvalidConfig("singular normal equations in decay fit".into()))?;
    let (a, b, c) = (coeffs[0], coeffs[1], coeffs[2]);
    let mean = m[0] / n;
    let mut ss_res = T::zero();
    let mut ss_tot = T::zero();
    for &(t, y) in &pts {
        let p = a + b * t + c * t * t;
        ss_res += (y - p) * (y - p);
        ss_tot += (y - mean) * (y - mean);
    }
    let r_squared = if ss_tot > T::zero() { T::one() - ss_res / ss_tot } else { T::one() };
    Ok(DecayFit {
        a,
        b,
        c,
        r_squared,
        window: (pts[0].0, pts[pts.len() - 1].0),
        floor,
        samples_used: pts.len(),
    })
}

fn solve3<T: Real>(mut a: [[T; 3]; 3], mut b: [T; 3]) -> Option<[T; 3]> {
    for col in 0..3 {
        let piv = (col..3).max_by(|&i, &j| a[i][col].abs().partial_cmp(&a[j][col].abs()).unwrap())?;
        a.swap(col, piv);
        b.swap(col, piv);
        if a[col][col].abs() < cast(1e-300) {
            return None;
        }
        for row in (col + 1)..3 {
            let f = a[row][col] / a[col][col];
            for k in col..3 {
                let v = a[col][k];
                a[row][k] -= f * v;
            }
            let vb = b[col];
            b[row] -= f * vb;
        }
    }
    let mut x = [T::zero(); 3];
    for row in (0..3).rev() {
        let mut acc = b[row];
        for k in (row + 1)..3 {
            acc -= a[row][k] * x[k];
        }
        x[row] = acc / a[row][row];
    }
    Some(x)
}

/// Per-time ratios ‖u−v‖(t) / (‖u0−v0‖ e^{−2λt}) for two distinct solutions.
/// The L² energy estimate read backward keeps these ≥ 1 for the exact flow:
/// distinct solutions cannot approach each other faster than e^{−2λt}.
pub fn rigidity_lower_bound_check<T: SolverReal>(
    u0: &Field<T>,
    v0: &Field<T>,
    cfg: &SolverConfig<T>,
    t_end: T,
    samples: usize,
) -> Result<Vec<(T, T)>, BuildError> {
    let d0 = l2_distance(u0, v0)?;
    if d0 == T::zero() {
        return Err(BuildError::InvalidConfig("rigidity check needs distinct initial data".into()));
    }
    let times: Vec<T> = (1..=samples).map(|i| t_end * cast::<T>(i as f64 / samples as f64)).collect();
    let tu = integrate(u0, T::zero(), t_end, cfg, &times)?;
    let tv = integrate(v0, T::zero(), t_end, cfg, &times)?;
    let two = cast::<T>(2.0);
    let mut out = Vec::with_capacity(times.len());
    for ((t, uf), (_, vf)) in tu.iter().zip(&tv) {
        let dist = l2_distance(uf, vf)?;
        out.push((*t, dist / (d0 * (-two * cfg.lambda * *t).exp())));
    }
    Ok(out)
}

/// CSV with header `t,l2,h1,fh1`.
pub fn error_records_csv<T: Real>(records: &[ErrorRecord<T>]) -> String {
    let mut s = String::from("t,l2,h1,fh1\n");
    for r in records {
        s.push_str(&format!(
            "{},{},{},{}\n",
            fmt_g17(r.t.to_f64().unwrap()),
            fmt_g17(r.l2.to_f64().unwrap()),
            fmt_g17(r.h1.to_f64().unwrap()),
            fmt_g17(r.fh1.to_f64().unwrap())
        ));
    }
    s
}
