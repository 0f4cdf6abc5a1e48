//! Split-step pseudospectral integration of
//! i ∂_t u + ½Δu + λ u ln|u|² = 0 on a periodic box, with the logarithm
//! regularized as ln(ε² + |u|²).
//!
//! Both sub-flows are exact: the kinetic half is a Fourier multiplier and
//! the nonlinear flow is a pointwise phase rotation that leaves |u|
//! untouched. In particular both preserve the discrete L² norm and the
//! composition is invertible, so backward integration just negates dt.

use crate::grid::{Field, Grid, GridError};
use crate::{cast, Real, SolverReal};
use num_complex::Complex;
use rustfft::{Fft, FftPlanner};
use std::sync::Arc;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SolverError {
    #[error(transparent)]
    Grid(#[from] GridError),
    #[error("state became non-finite at t = {t}")]
    NonFiniteState { t: f64 },
    #[error("high-frequency spectral mass fraction {fraction} exceeds tail_tol at t = {t}")]
    AliasingOverflow { t: f64, fraction: f64 },
    #[error("boundary mass fraction {fraction} exceeds tail_tol at t = {t}")]
    BoundaryLeak { t: f64, fraction: f64 },
    #[error("observer times must lie between t0 and t1 in integration order")]
    BadObservers,
    #[error("solver config: {0}")]
    BadConfig(String),
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum Splitting {
    Lie,
    Strang,
}

#[derive(Clone, Debug)]
pub struct SolverConfig<T> {
    pub lambda: T,
    pub dt: T,
    /// regularization floor: the nonlinear phase uses ln(eps² + |u|²)
    pub eps: T,
    pub splitting: Splitting,
    /// 2/3-rule spectral mask, off by default (the nonlinear flow preserves
    /// |u| pointwise, so it creates no amplitude aliasing)
    pub dealias: bool,
    /// max allowed boundary/aliasing mass fraction before erroring
    pub tail_tol: T,
}

impl<T: Real> SolverConfig<T> {
    pub fn validate(&self) -> Result<(), SolverError> {
        if !(self.eps > T::zero()) {
            return Err(SolverError::BadConfig("eps must be positive".into()));
        }
        if self.dt == T::zero() || !self.dt.is_finite() {
            return Err(SolverError::BadConfig("dt must be nonzero and finite".into()));
        }
        Ok(())
    }

    pub fn new(lambda: T, dt: T) -> Self {
        SolverConfig {
            lambda,
            dt,
            eps: cast(1e-14),
            splitting: Splitting::Strang,
            dealias: false,
            tail_tol: cast(1e-10),
        }
    }
}

/// Cached FFT plans and multiplier tables for one grid.
pub struct SplitStep<T: SolverReal> {
    grid: Grid<T>,
    fwd: Arc<dyn Fft<T>>,
    inv: Arc<dyn Fft<T>>,
    scratch: Vec<Complex<T>>,
    lane: Vec<Complex<T>>,
    /// |k|² per flattened index
    k2: Vec<T>,
    /// per-axis 2/3-rule pass mask (true = keep)
    keep_23: Vec<bool>,
    /// flattened indices within 4h of the box boundary
    boundary: Vec<usize>,
}

impl<T: SolverReal> SplitStep<T> {
    pub fn new(grid: &Grid<T>) -> Self {
        let mut planner = FftPlanner::new();
        let n = grid.points_per_dim;
        let fwd = planner.plan_fft_forward(n);
        let inv = planner.plan_fft_inverse(n);
        let scratch_len = fwd.get_inplace_scratch_len().max(inv.get_inplace_scratch_len());

        let len = grid.num_points();
        let mut k2 = vec![T::zero(); len];
        for (idx, k) in k2.iter_mut().enumerate() {
            let mut rest = idx;
            let mut acc = T::zero();
            for _ in 0..grid.dim {
                let ki = grid.wavenumber_1d(rest % n);
                acc += ki * ki;
                rest /= n;
            }
            *k = acc;
        }
        let keep_23 = (0..n)
            .map(|i| {
                let f = if i < n / 2 { i } else { n - i };
                3 * f < n // keep |freq| < n/3
            })
            .collect();
        let h4 = grid.spacing() * cast::<T>(4.0);
        let half = grid.extent * cast::<T>(0.5);
        let boundary = (0..len)
            .filter(|&idx| {
                grid.coords(idx)
                    .iter()
                    .any(|&x| x < -half + h4 || x >= half - h4)
            })
            .collect();
        SplitStep {
            grid: grid.clone(),
            fwd,
            inv,
            scratch: vec![Complex::new(T::zero(), T::zero()); scratch_len],
            lane: vec![Complex::new(T::zero(), T::zero()); n],
            k2,
            keep_23,
            boundary,
        }
    }

    pub fn grid(&self) -> &Grid<T> {
        &self.grid
    }

    fn transform(&mut self, values: &mut [Complex<T>], forward: bool) {
        let n = self.grid.points_per_dim;
        let d = self.grid.dim;
        let plan = if forward { self.fwd.clone() } else { self.inv.clone() };
        for axis in 0..d {
            let stride = n.pow((d - 1 - axis) as u32);
            let block = stride * n;
            let nblocks = values.len() / block;
            for b in 0..nblocks {
                for offset in 0..stride {
                    let base = b * block + offset;
                    if stride == 1 {
                        plan.process_with_scratch(&mut values[base..base + n], &mut self.scratch);
                    } else {
                        for (j, v) in self.lane.iter_mut().enumerate() {
                            *v = values[base + j * stride];
                        }
                        plan.process_with_scratch(&mut self.lane, &mut self.scratch);
                        for (j, v) in self.lane.iter().enumerate() {
                            values[base + j * stride] = *v;
                        }
                    }
                }
            }
        }
        if !forward {
            let norm = T::one() / cast::<T>((n as f64).powi(d as i32));
            for v in values.iter_mut() {
                *v *= norm;
            }
        }
    }

    /// exp(−i |k|² τ / 2) multiplier (kinetic flow of duration τ), applied in
    /// spectral space; optionally also the 2/3 mask. Returns the
    /// high-frequency-third spectral mass fraction seen before masking.
    fn kinetic(&mut self, values: &mut [Complex<T>], tau: T, dealias: bool) -> T {
        self.transform(values, true);
        let n = self.grid.points_per_dim;
        let d = self.grid.dim;
        let mut total = T::zero();
        let mut high = T::zero();
        let half = cast::<T>(0.5);
        for (idx, v) in values.iter_mut().enumerate() {
            let p = v.norm_sqr();
            total += p;
            let mut rest = idx;
            let mut keep = true;
            for _ in 0..d {
                keep &= self.keep_23[rest % n];
                rest /= n;
            }
            if !keep {
                high += p;
                if dealias {
                    *v = Complex::new(T::zero(), T::zero());
                }
            }
            let phase = -half * self.k2[idx] * tau;
            *v *= Complex::from_polar(T::one(), phase);
        }
        self.transform(values, false);
        if total > T::zero() {
            high / total
        } else {
            T::zero()
        }
    }

    fn nonlinear(&self, values: &mut [Complex<T>], lambda: T, dt: T, eps: T) {
        let e2 = eps * eps;
        for v in values.iter_mut() {
            let phase = lambda * dt * (e2 + v.norm_sqr()).ln();
            *v *= Complex::from_polar(T::one(), phase);
        }
    }

    /// One step of size `dt_step` (may differ from cfg.dt for fractional
    /// landings; may be negative). `t` only labels error reports.
    pub fn step_by(&mut self, field: &mut Field<T>, cfg: &SolverConfig<T>, dt_step: T, t: T) -> Result<(), SolverError> {
        assert_eq!(field.grid, self.grid, "field grid does not match plan grid");
        let half = cast::<T>(0.5);
        let alias_frac = match cfg.splitting {
            Splitting::Strang => {
                let f = self.kinetic(&mut field.values, dt_step * half, cfg.dealias);
                self.nonlinear(&mut field.values, cfg.lambda, dt_step, cfg.eps);
                self.kinetic(&mut field.values, dt_step * half, cfg.dealias);
                f
            }
            Splitting::Lie => {
                let f = self.kinetic(&mut field.values, dt_step, cfg.dealias);
                self.nonlinear(&mut field.values, cfg.lambda, dt_step, cfg.eps);
                f
            }
        };
        let tf = t.to_f64().unwrap_or(f64::NAN);
        if !field.all_finite() {
            return Err(SolverError::NonFiniteState { t: tf });
        }
        let total = field.values.iter().fold(T::zero(), |s, z| s + z.norm_sqr());
        if total > T::zero() {
            let edge = self.boundary.iter().fold(T::zero(), |s, &i| s + field.values[i].norm_sqr());
            let frac = edge / total;
            if frac > cfg.tail_tol {
                return Err(SolverError::BoundaryLeak { t: tf, fraction: frac.to_f64().unwrap_or(f64::NAN) });
            }
        }
        if alias_frac > cfg.tail_tol {
            return Err(SolverError::AliasingOverflow { t: tf, fraction: alias_frac.to_f64().unwrap_or(f64::NAN) });
        }
        Ok(())
    }

    pub fn step(&mut self, field: &mut Field<T>, cfg: &SolverConfig<T>) -> Result<(), SolverError> {
        self.step_by(field, cfg, cfg.dt, T::zero())
    }
}

/// One step as a pure function (plans are rebuilt; use [`SplitStep`] for
/// repeated stepping).
pub fn step<T: SolverReal>(field: &Field<T>, cfg: &SolverConfig<T>) -> Result<Field<T>, SolverError> {
    cfg.validate()?;
    let mut f = field.clone();
    SplitStep::new(&field.grid).step(&mut f, cfg)?;
    Ok(f)
}

/// Integrate from `t0` to `t1`, recording the state at each observer time
/// (fractional steps land on observers and on `t1` exactly). The returned
/// trajectory always ends with the state at `t1`.
///
/// The sign of cfg.dt is overridden by the direction of [t0, t1].
pub fn integrate<T: SolverReal>(
    field: &Field<T>,
    t0: T,
    t1: T,
    cfg: &SolverConfig<T>,
    observers: &[T],
) -> Result<Vec<(T, Field<T>)>, SolverError> {
    cfg.validate()?;
    let dir = if t1 >= t0 { T::one() } else { -T::one() };
    let dt = cfg.dt.abs() * dir;
    let mut targets: Vec<T> = Vec::new();
    for &ot in observers {
        if (ot - t0) * dir < -cast::<T>(1e-12) || (t1 - ot) * dir < -cast::<T>(1e-12) {
            return Err(SolverError::BadObservers);
        }
        targets.push(ot);
    }
    targets.sort_by(|a, b| ((*a - t0) * dir).partial_cmp(&((*b - t0) * dir)).unwrap());
    if targets.last().map(|&t| t != t1).unwrap_or(true) {
        targets.push(t1);
    }

    let mut plan = SplitStep::new(&field.grid);
    let mut u = field.clone();
    let mut t = t0;
    let mut out: Vec<(T, Field<T>)> = Vec::with_capacity(targets.len());
    for &target in &targets {
        let span = (target - t) * dir;
        if span > T::zero() {
            let nfull = (span / dt.abs()).floor().to_f64().unwrap() as usize;
            for _ in 0..nfull {
                plan.step_by(&mut u, cfg, dt, t)?;
                t += dt;
            }
            let rem = target - t;
            if rem.abs() > t.abs().max(T::one()) * T::epsilon() * cast(8.0) {
                plan.step_by(&mut u, cfg, rem, t)?;
            }
            t = target;
        }
        out.push((target, u.clone()));
    }
    Ok(out)
}

/// Spectral gradient components ∂_j u, j = 0..d.
pub fn gradient<T: SolverReal>(field: &Field<T>) -> Vec<Field<T>> {
    let grid = &field.grid;
    let n = grid.points_per_dim;
    let d = grid.dim;
    let mut plan = SplitStep::new(grid);
    let mut hat = field.clone();
    plan.transform(&mut hat.values, true);
    let mut out = Vec::with_capacity(d);
    for axis in 0..d {
        let mut g = hat.clone();
        for (idx, v) in g.values.iter_mut().enumerate() {
            let mut rest = idx;
            for _ in 0..(d - 1 - axis) {
                rest /= n;
            }
            let k = grid.wavenumber_1d(rest % n);
            *v = Complex::new(-v.im * k, v.re * k); // i k v
        }
        plan.transform(&mut g.values, false);
        out.push(g);
    }
    out
}

/// Mass, momentum, energy and the L²/H¹/F(H¹)/L^∞ norms of a field.
#[derive(Clone, Debug, serde::Serialize)]
pub struct NormReport<T> {
    pub mass: T,
    pub momentum: Vec<T>,
    pub energy: T,
    pub l2: T,
    pub h1: T,
    pub fh1: T,
    pub linf: T,
}

/// All integrals are h^d Riemann sums (spectrally accurate for smooth
/// decaying fields); the energy uses the regularized logarithm.
pub fn norms<T: SolverReal>(field: &Field<T>, cfg: &SolverConfig<T>) -> NormReport<T> {
    let w = field.grid.cell_volume();
    let grads = gradient(field);
    let mut mass = T::zero();
    let mut grad_sq = T::zero();
    let mut pot = T::zero();
    let mut xw_sq = T::zero();
    let mut momentum = vec![T::zero(); field.grid.dim];
    let e2 = cfg.eps * cfg.eps;
    for (idx, u) in field.values.iter().enumerate() {
        let p = u.norm_sqr();
        mass += p;
        pot += p * ((e2 + p).ln() - T::one());
        let x = field.grid.coords(idx);
        let x2 = x.iter().fold(T::zero(), |s, &xi| s + xi * xi);
        xw_sq += x2 * p;
        for (j, g) in grads.iter().enumerate() {
            let du = g.values[idx];
            grad_sq += du.norm_sqr();
            momentum[j] += (u.conj() * du).im;
        }
    }
    let half = cast::<T>(0.5);
    NormReport {
        mass: mass * w,
        momentum: momentum.into_iter().map(|m| m * w).collect(),
        energy: half * grad_sq * w - cfg.lambda * pot * w,
        l2: (mass * w).sqrt(),
        h1: ((mass + grad_sq) * w).sqrt(),
        fh1: ((mass + xw_sq) * w).sqrt(),
        linf: field.linf(),
    }
}

/// CSV with header `t,mass,momentum...,energy,l2,h1,fh1,linf`.
pub fn norm_reports_csv<T: Real>(rows: &[(T, NormReport<T>)]) -> String {
    let mut s = String::new();
    if rows.is_empty() {
        return s;
    }
    s.push_str("t,mass");
    for ax in 0..rows[0].1.momentum.len() {
        s.push_str(&format!(",momentum_{ax}"));
    }
    s.push_str(",energy,l2,h1,fh1,linf\n");
    for (t, n) in rows {
        s.push_str(&crate::fmt_g17(t.to_f64().unwrap()));
        s.push_str(&format!(",{}", crate::fmt_g17(n.mass.to_f64().unwrap())));
        for m in &n.momentum {
            s.push_str(&format!(",{}", crate::fmt_g17(m.to_f64().unwrap())));
        }
        s.push_str(&format!(
            ",{},{},{},{},{}\n",
            crate::fmt_g17(n.energy.to_f64().unwrap()),
            crate::fmt_g17(n.l2.to_f64().unwrap()),
            crate::fmt_g17(n.h1.to_f64().unwrap()),
            crate::fmt_g17(n.fh1.to_f64().unwrap()),
            crate::fmt_g17(n.linf.to_f64().unwrap())
        ));
    }
    s
}

pub fn l2_distance<T: SolverReal>(a: &Field<T>, b: &Field<T>) -> Result<T, SolverError> {
    if !a.same_grid(b) {
        return Err(GridError::GridMismatch.into());
    }
    let w = a.grid.cell_volume();
    let s = a
        .values
        .iter()
        .zip(&b.values)
        .fold(T::zero(), |s, (x, y)| s + (*x - *y).norm_sqr());
    Ok((s * w).sqrt())
}

pub fn h1_distance<T: SolverReal>(a: &Field<T>, b: &Field<T>) -> Result<T, SolverError> {
    if !a.same_grid(b) {
        return Err(GridError::GridMismatch.into());
    }
    let mut diff = a.clone();
    for (d, y) in diff.values.iter_mut().zip(&b.values) {
        *d -= *y;
    }
    let l2 = diff.l2();
    let grads = gradient(&diff);
    let w = a.grid.cell_volume();
    let gsq = grads.iter().fold(T::zero(), |s, g| {
        s + g.values.iter().fold(T::zero(), |si, z| si + z.norm_sqr())
    }) * w;
    Ok((l2 * l2 + gsq).sqrt())
}

/// (‖a−b‖² + ‖ |x| (a−b) ‖²)^{1/2}
pub fn fh1_distance<T: SolverReal>(a: &Field<T>, b: &Field<T>) -> Result<T, SolverError> {
    if !a.same_grid(b) {
        return Err(GridError::GridMismatch.into());
    }
    let w = a.grid.cell_volume();
    let mut plain = T::zero();
    let mut weighted = T::zero();
    for (idx, (x, y)) in a.values.iter().zip(&b.values).enumerate() {
        let d = (*x - *y).norm_sqr();
        plain += d;
        let c = a.grid.coords(idx);
        let x2 = c.iter().fold(T::zero(), |s, &xi| s + xi * xi);
        weighted += x2 * d;
    }
    Ok(((plain + weighted) * w).sqrt())
}

/// Per-time ratios ‖u−v‖ / (‖u0−v0‖ e^{2λt}) for two solutions launched from
/// `u0`, `v0`. The L² energy estimate bounds these by 1 for the exact flow;
/// the coincident-data case returns zeros.
pub fn stability_envelope_check<T: SolverReal>(
    u0: &Field<T>,
    v0: &Field<T>,
    cfg: &SolverConfig<T>,
    t_end: T,
    samples: usize,
) -> Result<Vec<(T, T)>, SolverError> {
    let d0 = l2_distance(u0, v0)?;
    let times: Vec<T> = (1..=samples)
        .map(|i| t_end * cast::<T>(i as f64 / samples as f64))
        .collect();
    if d0 == T::zero() {
        return Ok(times.into_iter().map(|t| (t, T::zero())).collect());
    }
    let tu = integrate(u0, T::zero(), t_end, cfg, &times)?;
    let tv = integrate(v0, T::zero(), t_end, cfg, &times)?;
    let two = cast::<T>(2.0);
    tu.iter()
        .zip(&tv)
        .map(|((t, uf), (_, vf))| {
            let dist = l2_distance(uf, vf)?;
            Ok((*t, dist / (d0 * (two * cfg.lambda * *t).exp())))
        })
        .collect()
}
