//! Exact Gaussian solutions of the focusing logNLS.
//!
//! A Gaussian profile exp[d/2 − ½ xᵀA(t)x] stays Gaussian under the flow;
//! the width matrix obeys dA/dt = −iA² + 2iλ Re A and the global phase is
//! a quadrature of Tr Re A and ln det Re A. In one dimension the same flow
//! reduces to the width equation r̈ = 1/r³ − 2λ/r.
//!
//! Evaluation uses the Galilean factor e^{i(v·x − |v|²t/2)} together with
//! the moving center x₀ + vt; this is the combination under which boosted
//! profiles solve the equation.

use crate::linalg::CMatrix;
use crate::ode::{integrate_adaptive, solve_at_times, OdeError, OdeOptions};
use crate::{cast, fmt_g17, Real};
use num_complex::Complex;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GaussianError {
    #[error("invalid Gaussian parameters: {0}")]
    InvalidParams(String),
    #[error("Re A lost positive definiteness at t = {t} (min eigenvalue {min_eig})")]
    PositivityLost { t: f64, min_eig: f64 },
    #[error("breather width became nonpositive at t = {t}")]
    NonpositiveWidth { t: f64 },
    #[error("step size underflow at t = {t}")]
    StepUnderflow { t: f64 },
    #[error("phase quadrature needs at least 3 samples")]
    GridTooCoarse,
    #[error("integration budget exhausted")]
    Exhausted,
}

impl From<OdeError> for GaussianError {
    fn from(e: OdeError) -> Self {
        match e {
            OdeError::StepUnderflow { t } => GaussianError::StepUnderflow { t },
            OdeError::MaxSteps(_) => GaussianError::Exhausted,
        }
    }
}

/// One Gaussian member: B^{A_in}_{ω,x₀,v,θ} with nonlinearity coefficient λ.
#[derive(Clone, Debug)]
pub struct GaussianParams<T> {
    pub dim: usize,
    pub a_in: CMatrix<T>,
    pub omega: T,
    pub x0: Vec<T>,
    pub v: Vec<T>,
    pub theta: T,
    pub lambda: T,
}

impl<T: Real> GaussianParams<T> {
    /// Gausson member: A_in = 2λ I, the constant solution of the matrix ODE.
    pub fn gausson(dim: usize, omega: T, x0: Vec<T>, v: Vec<T>, theta: T, lambda: T) -> Self {
        let a_in = CMatrix::scaled_identity(dim, Complex::new(cast::<T>(2.0) * lambda, T::zero()));
        GaussianParams { dim, a_in, omega, x0, v, theta, lambda }
    }

    pub fn validate(&self) -> Result<(), GaussianError> {
        if self.dim == 0 || self.a_in.dim != self.dim || self.x0.len() != self.dim || self.v.len() != self.dim {
            return Err(GaussianError::InvalidParams("dimension mismatch".into()));
        }
        let asym = self.a_in.asymmetry();
        if asym > cast(1e-12) {
            return Err(GaussianError::InvalidParams(format!("A_in not symmetric (asymmetry {asym})")));
        }
        let min_eig = self.a_in.re().min_eigenvalue();
        if min_eig <= T::zero() {
            return Err(GaussianError::InvalidParams(format!("Re A_in not positive definite (min eig {min_eig})")));
        }
        if self.lambda <= T::zero() {
            return Err(GaussianError::InvalidParams("lambda must be positive".into()));
        }
        Ok(())
    }

    /// Center of the member at time t.
    pub fn center(&self, t: T) -> Vec<T> {
        self.x0.iter().zip(&self.v).map(|(&x, &v)| x + v * t).collect()
    }
}

/// Time slice of the matrix flow.
#[derive(Clone, Debug)]
pub struct GaussianState<T> {
    pub t: T,
    pub a: CMatrix<T>,
    pub phi: T,
    pub det_ratio: T,
    /// min/max eigenvalue of Re A seen anywhere on the trajectory up to t.
    pub spectrum_bounds: (T, T),
}

/// Time slice of the 1D width flow.
#[derive(Clone, Debug)]
pub struct BreatherState<T> {
    pub t: T,
    pub r: T,
    pub rdot: T,
    pub phi: T,
    /// H = ṙ²/2 + 1/(2r²) + 2λ ln r, conserved along the flow.
    pub first_integral: T,
}

fn pack<T: Real>(a: &CMatrix<T>, y: &mut [T]) {
    let n = a.dim * a.dim;
    for (i, z) in a.data.iter().enumerate() {
        y[i] = z.re;
        y[n + i] = z.im;
    }
}

fn unpack<T: Real>(dim: usize, y: &[T]) -> CMatrix<T> {
    let n = dim * dim;
    let mut a = CMatrix::zeros(dim);
    for i in 0..n {
        a.data[i] = Complex::new(y[i], y[n + i]);
    }
    a
}

fn matrix_rhs<T: Real>(dim: usize, lambda: T, y: &[T], dy: &mut [T]) {
    let a = unpack(dim, y);
    let a2 = a.mul(&a);
    let two_lam = cast::<T>(2.0) * lambda;
    let mut d = CMatrix::zeros(dim);
    for i in 0..dim * dim {
        // -i a2 + 2iλ Re a
        let z = a2.data[i];
        d.data[i] = Complex::new(z.im, -z.re) + Complex::new(T::zero(), two_lam * a.data[i].re);
    }
    pack(&d, dy);
}

/// Integrate dA/dt = −iA² + 2iλ Re A from A(0) = `a_in`, reporting states at
/// `times` (increasing, `times[0] = 0`). The state is re-symmetrized after
/// every accepted step and Re A is checked for positive definiteness at every
/// output time (λ > 0 guarantees it for the exact flow, so a loss signals an
/// integrator failure).
pub fn evolve_matrix_ode<T: Real>(
    a_in: &CMatrix<T>,
    lambda: T,
    times: &[T],
    tol: T,
) -> Result<Vec<GaussianState<T>>, GaussianError> {
    if times.is_empty() || times[0] != T::zero() {
        return Err(GaussianError::InvalidParams("times must start at 0".into()));
    }
    if times.windows(2).any(|w| w[1] <= w[0]) {
        return Err(GaussianError::InvalidParams("times must be strictly increasing".into()));
    }
    let dim = a_in.dim;
    let mut a0 = a_in.clone();
    a0.symmetrize();
    if a0.re().min_eigenvalue() <= T::zero() {
        return Err(GaussianError::InvalidParams("Re A_in not positive definite".into()));
    }

    let n = dim * dim;
    let mut y0 = vec![T::zero(); 2 * n];
    pack(&a0, &mut y0);
    let opts = OdeOptions { rtol: tol, atol: tol, ..Default::default() };
    let rhs = |_t: T, y: &[T], dy: &mut [T]| matrix_rhs(dim, lambda, y, dy);

    let mut spec_min = a0.re().min_eigenvalue();
    let mut spec_max = a0.re().eigenvalues().last().copied().unwrap();
    let mut raw: Vec<(T, CMatrix<T>, (T, T))> = vec![(times[0], a0.clone(), (spec_min, spec_max))];
    let mut next = 1usize;
    let mut failure: Option<GaussianError> = None;
    let mut buf = vec![T::zero(); 2 * n];

    let t_end = *times.last().unwrap();
    if t_end > T::zero() {
        integrate_adaptive(rhs, T::zero(), t_end, &y0, &opts, |dense, t_new, y: &mut [T]| {
            let mut a = unpack(dim, y);
            a.symmetrize();
            pack(&a, y);
            let ev = a.re().eigenvalues();
            spec_min = spec_min.min(ev[0]);
            spec_max = spec_max.max(*ev.last().unwrap());
            if ev[0] <= T::zero() {
                failure = Some(GaussianError::PositivityLost {
                    t: t_new.to_f64().unwrap_or(f64::NAN),
                    min_eig: ev[0].to_f64().unwrap_or(f64::NAN),
                });
                return false;
            }
            while next < times.len() && times[next] <= t_new {
                dense.eval_at_time(times[next], &mut buf);
                let mut am = unpack(dim, &buf);
                am.symmetrize();
                raw.push((times[next], am, (spec_min, spec_max)));
                next += 1;
            }
            true
        })?;
    }
    if let Some(e) = failure {
        return Err(e);
    }

    let det_in = a0.re().det();
    let mut states: Vec<GaussianState<T>> = Vec::with_capacity(raw.len());
    for (t, a, bounds) in raw {
        let ev = a.re().eigenvalues();
        if ev[0] <= T::zero() {
            return Err(GaussianError::PositivityLost {
                t: t.to_f64().unwrap_or(f64::NAN),
                min_eig: ev[0].to_f64().unwrap_or(f64::NAN),
            });
        }
        let det_ratio = a.re().det() / det_in;
        states.push(GaussianState { t, a, phi: T::zero(), det_ratio, spectrum_bounds: bounds });
    }
    if states.len() >= 3 {
        let phis = phase_integral(&states, lambda)?;
        for (s, phi) in states.iter_mut().zip(phis) {
            s.phi = phi;
        }
    }
    Ok(states)
}

/// [`evolve_matrix_ode`] with the phase quadrature carried out on an
/// internally refined time grid (spacing ≤ `phase_dt`), so that Φ keeps
/// quadrature accuracy even when only a few output times are requested.
pub fn evolve_matrix_ode_fine<T: Real>(
    a_in: &CMatrix<T>,
    lambda: T,
    times: &[T],
    tol: T,
    phase_dt: T,
) -> Result<Vec<GaussianState<T>>, GaussianError> {
    if times.is_empty() || times[0] != T::zero() {
        return Err(GaussianError::InvalidParams("times must start at 0".into()));
    }
    let t_end = *times.last().unwrap();
    if t_end == T::zero() {
        return evolve_matrix_ode(a_in, lambda, times, tol);
    }
    let n_fine = (t_end / phase_dt).ceil().to_f64().unwrap_or(2.0).max(2.0) as usize;
    let mut fine: Vec<T> = (0..=n_fine).map(|i| t_end * cast::<T>(i as f64 / n_fine as f64)).collect();
    fine.extend(times.iter().copied());
    fine.sort_by(|a, b| a.partial_cmp(b).unwrap());
    fine.dedup_by(|a, b| (*a - *b).abs() <= t_end * T::epsilon() * cast(4.0));
    let all = evolve_matrix_ode(a_in, lambda, &fine, tol)?;
    let mut out = Vec::with_capacity(times.len());
    for &t in times {
        let idx = all
            .iter()
            .position(|s| (s.t - t).abs() <= t_end * T::epsilon() * cast(8.0) + T::min_positive_value())
            .ok_or_else(|| GaussianError::InvalidParams("requested time missing from fine grid".into()))?;
        out.push(all[idx].clone());
    }
    Ok(out)
}

/// Φ(t) = ½∫₀ᵗ Tr Re A − (λ/2)∫₀ᵗ ln(det Re A/det Re A_in) − dλt on the
/// state grid, by composite Simpson with cubic-Hermite midpoint
/// densification (the derivative comes from the ODE right-hand side).
pub fn phase_integral<T: Real>(states: &[GaussianState<T>], lambda: T) -> Result<Vec<T>, GaussianError> {
    if states.len() < 3 {
        return Err(GaussianError::GridTooCoarse);
    }
    let dim = states[0].a.dim;
    let d = cast::<T>(dim as f64);
    let det_in = states[0].a.re().det();
    let half = cast::<T>(0.5);

    let integrand = |a: &CMatrix<T>| -> T {
        let re = a.re();
        half * re.trace() - half * lambda * (re.det() / det_in).ln()
    };
    let n2 = 2 * dim * dim;
    let mut ya = vec![T::zero(); n2];
    let mut yb = vec![T::zero(); n2];
    let mut fa = vec![T::zero(); n2];
    let mut fb = vec![T::zero(); n2];
    let mut ym = vec![T::zero(); n2];

    let mut out = Vec::with_capacity(states.len());
    let mut acc = T::zero();
    out.push(T::zero());
    for w in states.windows(2) {
        let (s0, s1) = (&w[0], &w[1]);
        let dt = s1.t - s0.t;
        pack(&s0.a, &mut ya);
        pack(&s1.a, &mut yb);
        matrix_rhs(dim, lambda, &ya, &mut fa);
        matrix_rhs(dim, lambda, &yb, &mut fb);
        // cubic Hermite at the midpoint: (y0+y1)/2 + dt (f0 - f1)/8
        for i in 0..n2 {
            ym[i] = half * (ya[i] + yb[i]) + dt * (fa[i] - fb[i]) * cast::<T>(0.125);
        }
        let am = unpack(dim, &ym);
        let g0 = integrand(&s0.a);
        let gm = integrand(&am);
        let g1 = integrand(&s1.a);
        acc += dt / cast::<T>(6.0) * (g0 + cast::<T>(4.0) * gm + g1);
        out.push(acc - d * lambda * s1.t);
    }
    Ok(out)
}

/// B^{A_in}_{ω,x₀,v,θ}(t, x) from the state of the matrix flow.
pub fn eval_gaussian_solution<T: Real>(p: &GaussianParams<T>, s: &GaussianState<T>, x: &[T]) -> Complex<T> {
    let d = cast::<T>(p.dim as f64);
    let t = s.t;
    let vx = p.v.iter().zip(x).fold(T::zero(), |acc, (&vi, &xi)| acc + vi * xi);
    let v2 = p.v.iter().fold(T::zero(), |acc, &vi| acc + vi * vi);
    let y: Vec<T> = x
        .iter()
        .zip(p.x0.iter().zip(&p.v))
        .map(|(&xi, (&x0i, &vi))| xi - x0i - vi * t)
        .collect();
    let quad = s.a.quadratic_form(&y);
    let phase = p.theta + cast::<T>(2.0) * p.lambda * p.omega * t + vx - cast::<T>(0.5) * v2 * t - s.phi
        - cast::<T>(0.5) * quad.im;
    let log_amp = p.omega + cast::<T>(0.25) * s.det_ratio.ln() + cast::<T>(0.5) * d - cast::<T>(0.5) * quad.re;
    Complex::from_polar(log_amp.exp(), phase)
}

/// Closed-form Gausson G^d_{ω,x₀,v,θ}(t, x); equals the matrix-flow
/// evaluation at A_in = 2λI.
#[allow(clippy::too_many_arguments)]
pub fn eval_gausson<T: Real>(omega: T, x0: &[T], v: &[T], theta: T, lambda: T, t: T, x: &[T]) -> Complex<T> {
    let d = cast::<T>(x.len() as f64);
    let vx = v.iter().zip(x).fold(T::zero(), |acc, (&vi, &xi)| acc + vi * xi);
    let v2 = v.iter().fold(T::zero(), |acc, &vi| acc + vi * vi);
    let y2 = x
        .iter()
        .zip(x0.iter().zip(v))
        .fold(T::zero(), |acc, (&xi, (&x0i, &vi))| {
            let y = xi - x0i - vi * t;
            acc + y * y
        });
    let phase = theta + cast::<T>(2.0) * lambda * omega * t + vx - cast::<T>(0.5) * v2 * t;
    let log_amp = cast::<T>(0.5) * d + omega - lambda * y2;
    Complex::from_polar(log_amp.exp(), phase)
}

/// ‖G^d‖²_{L²} = e^d (π/2λ)^{d/2} for the Gausson at ω = 0; scaling by e^{2ω}
/// otherwise.
pub fn gausson_mass<T: Real>(dim: usize, omega: T, lambda: T) -> T {
    let d = cast::<T>(dim as f64);
    (d + cast::<T>(2.0) * omega).exp() * (T::PI() / (cast::<T>(2.0) * lambda)).powf(d * cast(0.5))
}

fn breather_first_integral<T: Real>(r: T, rdot: T, lambda: T) -> T {
    cast::<T>(0.5) * rdot * rdot + cast::<T>(0.5) / (r * r) + cast::<T>(2.0) * lambda * r.ln()
}

/// Integrate r̈ = 1/r³ − 2λ/r with r(0) = α_r, ṙ(0) = α_i, reporting states
/// on the accepted-step grid (with an exact landing at `t_end`).
///
/// Φ(t) = ½∫1/r² + λ∫ln(r/α_r) − λt accumulates by Hermite–Simpson
/// quadrature over the same grid.
pub fn evolve_breather<T: Real>(
    alpha_r: T,
    alpha_i: T,
    lambda: T,
    t_end: T,
    tol: T,
) -> Result<Vec<BreatherState<T>>, GaussianError> {
    if alpha_r <= T::zero() {
        return Err(GaussianError::InvalidParams("alpha_r must be positive".into()));
    }
    let rhs = |_t: T, y: &[T], dy: &mut [T]| {
        let r = y[0];
        dy[0] = y[1];
        dy[1] = T::one() / (r * r * r) - cast::<T>(2.0) * lambda / r;
    };
    let opts = OdeOptions { rtol: tol, atol: tol, ..Default::default() };
    let mut raw: Vec<(T, T, T)> = vec![(T::zero(), alpha_r, alpha_i)];
    let mut failure = None;
    if t_end > T::zero() {
        integrate_adaptive(rhs, T::zero(), t_end, &[alpha_r, alpha_i], &opts, |_d, t, y: &mut [T]| {
            if y[0] <= T::zero() || !y[0].is_finite() {
                failure = Some(GaussianError::NonpositiveWidth { t: t.to_f64().unwrap_or(f64::NAN) });
                return false;
            }
            raw.push((t, y[0], y[1]));
            true
        })?;
    }
    if let Some(e) = failure {
        return Err(e);
    }

    // Hermite–Simpson accumulation of ½∫1/r² + λ∫ln(r/α_r)
    let half = cast::<T>(0.5);
    let g = |r: T| half / (r * r) + lambda * (r / alpha_r).ln();
    let mut states = Vec::with_capacity(raw.len());
    let mut acc = T::zero();
    for (i, &(t, r, rdot)) in raw.iter().enumerate() {
        if i > 0 {
            let (t0, r0, rd0) = raw[i - 1];
            let dt = t - t0;
            let rm = half * (r0 + r) + dt * (rd0 - rdot) * cast::<T>(0.125);
            acc += dt / cast::<T>(6.0) * (g(r0) + cast::<T>(4.0) * g(rm) + g(r));
        }
        states.push(BreatherState {
            t,
            r,
            rdot,
            phi: acc - lambda * t,
            first_integral: breather_first_integral(r, rdot, lambda),
        });
    }
    Ok(states)
}

/// u^α(t, x) = √(α_r/r) exp[½ − iΦ − x²/(2r²) + i(ṙ/r)x²/2] in d = 1.
pub fn eval_breather<T: Real>(alpha_r: T, s: &BreatherState<T>, x: T) -> Complex<T> {
    let half = cast::<T>(0.5);
    let amp = (alpha_r / s.r).sqrt() * (half - half * x * x / (s.r * s.r)).exp();
    let phase = -s.phi + half * s.rdot / s.r * x * x;
    Complex::from_polar(amp, phase)
}

/// First period of the width oscillation for λ > 0, located from sign
/// changes of ṙ and polished by Newton iteration on ṙ(t) = 0 (the second
/// derivative is known from the ODE). `alpha` must not start at the
/// equilibrium width.
pub fn breather_period<T: Real>(alpha_r: T, alpha_i: T, lambda: T, tol: T) -> Result<T, GaussianError> {
    if lambda <= T::zero() {
        return Err(GaussianError::InvalidParams("periodicity requires lambda > 0".into()));
    }
    // crude upper bound for the scan: a few linearized periods
    let r_eq = (cast::<T>(0.5) / lambda).sqrt();
    let omega_sq = cast::<T>(3.0) / (r_eq * r_eq * r_eq * r_eq) - cast::<T>(2.0) * lambda / (r_eq * r_eq);
    let t_scan = cast::<T>(20.0) * T::PI() / omega_sq.sqrt();

    let states = evolve_breather(alpha_r, alpha_i, lambda, t_scan, tol)?;
    // collect the first two zeros of rdot with the same crossing direction as
    // the initial one (one full period apart); for alpha_i = 0 the start is
    // itself a turning point and the period is the second zero.
    let mut zeros: Vec<T> = Vec::new();
    for w in states.windows(2) {
        let (s0, s1) = (&w[0], &w[1]);
        if s0.rdot == T::zero() && s0.t == T::zero() {
            continue;
        }
        if (s0.rdot <= T::zero()) != (s1.rdot <= T::zero()) || s1.rdot == T::zero() {
            let z = refine_rdot_zero(s0, s1.t, lambda, tol)?;
            zeros.push(z);
            if zeros.len() == 2 {
                break;
            }
        }
    }
    if zeros.len() < 2 {
        return Err(GaussianError::InvalidParams("no oscillation detected (equilibrium data?)".into()));
    }
    if alpha_i == T::zero() {
        Ok(zeros[1])
    } else {
        // generic start: zeros alternate min/max, one period spans two
        Ok(cast::<T>(2.0) * (zeros[1] - zeros[0]))
    }
}

fn refine_rdot_zero<T: Real>(s0: &BreatherState<T>, t_hi: T, lambda: T, tol: T) -> Result<T, GaussianError> {
    let rhs = |_t: T, y: &[T], dy: &mut [T]| {
        let r = y[0];
        dy[0] = y[1];
        dy[1] = T::one() / (r * r * r) - cast::<T>(2.0) * lambda / r;
    };
    let opts = OdeOptions { rtol: tol * cast(0.1), atol: tol * cast(0.1), ..Default::default() };
    let mut t_guess = cast::<T>(0.5) * (s0.t + t_hi);
    for _ in 0..8 {
        let y = if t_guess > s0.t {
            let times = [s0.t, t_guess];
            solve_at_times(rhs, s0.t, &[s0.r, s0.rdot], &times, &opts)?.pop().unwrap()
        } else {
            vec![s0.r, s0.rdot]
        };
        let rdot = y[1];
        let rddot = T::one() / (y[0] * y[0] * y[0]) - cast::<T>(2.0) * lambda / y[0];
        let delta = rdot / rddot;
        t_guess -= delta;
        if delta.abs() < cast::<T>(1e-13) * t_guess.abs().max(T::one()) {
            break;
        }
    }
    Ok(t_guess)
}

/// For λ < 0 the width grows like 2t√(|λ| ln t). Returns (t, r/(2t√(|λ| ln t)))
/// on a logarithmic grid from t = 10 to `t_end`.
pub fn breather_asymptotic_check<T: Real>(
    alpha_r: T,
    alpha_i: T,
    lambda: T,
    t_end: T,
    tol: T,
) -> Result<Vec<(T, T)>, GaussianError> {
    if lambda >= T::zero() {
        return Err(GaussianError::InvalidParams("asymptotic check requires lambda < 0".into()));
    }
    if alpha_r <= T::zero() {
        return Err(GaussianError::InvalidParams("alpha_r must be positive".into()));
    }
    if t_end < cast(1e3) {
        return Err(GaussianError::InvalidParams("the log-growth regime needs t_end >= 1e3".into()));
    }
    let rhs = |_t: T, y: &[T], dy: &mut [T]| {
        let r = y[0];
        dy[0] = y[1];
        dy[1] = T::one() / (r * r * r) - cast::<T>(2.0) * lambda / r;
    };
    let opts = OdeOptions { rtol: tol, atol: tol, ..Default::default() };
    let mut times = Vec::new();
    let lo = cast::<T>(10.0f64.ln());
    let hi = t_end.ln();
    let n = 40usize;
    for i in 0..=n {
        let w = cast::<T>(i as f64 / n as f64);
        times.push((lo + (hi - lo) * w).exp());
    }
    *times.last_mut().unwrap() = t_end;
    let sols = solve_at_times(rhs, T::zero(), &[alpha_r, alpha_i], &times, &opts)?;
    Ok(times
        .iter()
        .zip(sols)
        .map(|(&t, y)| {
            let envelope = cast::<T>(2.0) * t * (lambda.abs() * t.ln()).sqrt();
            (t, y[0] / envelope)
        })
        .collect())
}

/// CSV with header `t, re_a_ij..., im_a_ij..., phi, det_ratio` (row-major A).
pub fn matrix_trajectory_csv<T: Real>(states: &[GaussianState<T>]) -> String {
    let mut s = String::new();
    if states.is_empty() {
        return s;
    }
    let d = states[0].a.dim;
    s.push('t');
    for i in 0..d {
        for j in 0..d {
            s.push_str(&format!(",re_a_{i}{j}"));
        }
    }
    for i in 0..d {
        for j in 0..d {
            s.push_str(&format!(",im_a_{i}{j}"));
        }
    }
    s.push_str(",phi,det_ratio\n");
    for st in states {
        s.push_str(&fmt_g17(st.t.to_f64().unwrap()));
        for z in &st.a.data {
            s.push(',');
            s.push_str(&fmt_g17(z.re.to_f64().unwrap()));
        }
        for z in &st.a.data {
            s.push(',');
            s.push_str(&fmt_g17(z.im.to_f64().unwrap()));
        }
        s.push(',');
        s.push_str(&fmt_g17(st.phi.to_f64().unwrap()));
        s.push(',');
        s.push_str(&fmt_g17(st.det_ratio.to_f64().unwrap()));
        s.push('\n');
    }
    s
}

/// CSV with header `t,r,rdot,phi,first_integral`.
pub fn breather_trajectory_csv<T: Real>(states: &[BreatherState<T>]) -> String {
    let mut s = String::from("t,r,rdot,phi,first_integral\n");
    for st in states {
        s.push_str(&format!(
            "{},{},{},{},{}\n",
            fmt_g17(st.t.to_f64().unwrap()),
            fmt_g17(st.r.to_f64().unwrap()),
            fmt_g17(st.rdot.to_f64().unwrap()),
            fmt_g17(st.phi.to_f64().unwrap()),
            fmt_g17(st.first_integral.to_f64().unwrap())
        ));
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use num_complex::Complex64;

    fn uniform_times(t_end: f64, n: usize) -> Vec<f64> {
        (0..=n).map(|i| t_end * i as f64 / n as f64).collect()
    }

    #[test]
    fn gausson_matrix_is_fixed_point() {
        for &lambda in &[0.5, 1.0, 2.0] {
            for dim in 1..=3usize {
                let a_in = CMatrix::scaled_identity(dim, Complex64::new(2.0 * lambda, 0.0));
                let states = evolve_matrix_ode(&a_in, lambda, &uniform_times(20.0, 40), 1e-10).unwrap();
                let mut worst: f64 = 0.0;
                for s in &states {
                    worst = worst.max(s.a.max_abs_diff(&a_in));
                    assert!(s.phi.abs() < 1e-10, "phi = {} at t = {}", s.phi, s.t);
                }
                assert!(worst < 1e-12, "deviation {worst} for lambda={lambda}, d={dim}");
            }
        }
    }

    #[test]
    fn matrix_ode_frozen_reference_diag() {
        // A_in = diag(1, 3), lambda = 0.5, t = 1: the first entry sits at the
        // fixed point 2λ = 1; the second was frozen from a high-order
        // independent integration.
        let a_in = CMatrix::from_rows(&[
            &[Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)],
            &[Complex64::new(0.0, 0.0), Complex64::new(3.0, 0.0)],
        ]);
        let states = evolve_matrix_ode(&a_in, 0.5, &uniform_times(1.0, 8), 1e-12).unwrap();
        let a1 = &states.last().unwrap().a;
        assert_relative_eq!(a1[(0, 0)].re, 1.0, epsilon = 1e-10);
        assert_relative_eq!(a1[(0, 0)].im, 0.0, epsilon = 1e-10);
        assert_relative_eq!(a1[(1, 1)].re, 0.5499389140493485, epsilon = 1e-8);
        assert_relative_eq!(a1[(1, 1)].im, -0.6437230541456028, epsilon = 1e-8);
        assert_eq!(a1[(0, 1)], Complex64::new(0.0, 0.0));
    }

    #[test]
    fn matrix_ode_frozen_reference_full() {
        let a_in = CMatrix::from_rows(&[
            &[Complex64::new(1.0, 0.0), Complex64::new(0.3, 0.1)],
            &[Complex64::new(0.3, 0.1), Complex64::new(2.0, -0.5)],
        ]);
        let states = evolve_matrix_ode(&a_in, 1.0, &[0.0, 0.35, 0.7], 1e-12).unwrap();
        let a = &states.last().unwrap().a;
        assert_relative_eq!(a[(0, 0)].re, 1.607330243264277, epsilon = 1e-8);
        assert_relative_eq!(a[(0, 0)].im, 0.6901897832762343, epsilon = 1e-8);
        assert_relative_eq!(a[(0, 1)].re, 0.3320074612463679, epsilon = 1e-8);
        assert_relative_eq!(a[(0, 1)].im, -0.07713837330068656, epsilon = 1e-8);
        assert_relative_eq!(a[(1, 1)].re, 1.320815262624482, epsilon = 1e-8);
        assert_relative_eq!(a[(1, 1)].im, -0.03674754575784183, epsilon = 1e-8);
        assert!(a.asymmetry() < 1e-12);
    }

    #[test]
    fn matrix_ode_agrees_with_independent_rk4() {
        // fixed-step classical RK4 at tiny steps as an independent oracle
        let a_in = CMatrix::from_rows(&[
            &[Complex64::new(0.7, 0.2), Complex64::new(-0.1, 0.05)],
            &[Complex64::new(-0.1, 0.05), Complex64::new(1.4, -0.3)],
        ]);
        let lambda = 0.8;
        let dim = 2;
        let n = 2 * dim * dim;
        let mut y = vec![0.0; n];
        pack(&a_in, &mut y);
        let h = 1e-4;
        let steps = 10_000; // to t = 1
        let mut k1 = vec![0.0; n];
        let mut k2 = vec![0.0; n];
        let mut k3 = vec![0.0; n];
        let mut k4 = vec![0.0; n];
        let mut tmp = vec![0.0; n];
        for _ in 0..steps {
            matrix_rhs(dim, lambda, &y, &mut k1);
            for i in 0..n {
                tmp[i] = y[i] + 0.5 * h * k1[i];
            }
            matrix_rhs(dim, lambda, &tmp, &mut k2);
            for i in 0..n {
                tmp[i] = y[i] + 0.5 * h * k2[i];
            }
            matrix_rhs(dim, lambda, &tmp, &mut k3);
            for i in 0..n {
                tmp[i] = y[i] + h * k3[i];
            }
            matrix_rhs(dim, lambda, &tmp, &mut k4);
            for i in 0..n {
                y[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
            }
        }
        let oracle = unpack(dim, &y);
        let states = evolve_matrix_ode(&a_in, lambda, &[0.0, 0.5, 1.0], 1e-12).unwrap();
        assert!(states.last().unwrap().a.max_abs_diff(&oracle) < 1e-9);
    }

    #[test]
    fn one_dimensional_flow_matches_breather() {
        // A(t) = 1/r² − i ṙ/r with matched initial data
        let a_in = CMatrix::from_rows(&[&[Complex64::new(1.0, 0.0)]]);
        let times = uniform_times(10.0, 200);
        let states = evolve_matrix_ode(&a_in, 1.0, &times, 1e-11).unwrap();
        let rhs = |_t: f64, y: &[f64], dy: &mut [f64]| {
            dy[0] = y[1];
            dy[1] = 1.0 / (y[0] * y[0] * y[0]) - 2.0 / y[0];
        };
        let opts = OdeOptions { rtol: 1e-12, atol: 1e-12, ..Default::default() };
        let sols = solve_at_times(rhs, 0.0, &[1.0, 0.0], &times, &opts).unwrap();
        let mut worst: f64 = 0.0;
        for (s, y) in states.iter().zip(&sols) {
            let (r, rd) = (y[0], y[1]);
            let expect = Complex64::new(1.0 / (r * r), -rd / r);
            worst = worst.max((s.a[(0, 0)] - expect).norm());
        }
        assert!(worst < 1e-8, "sup error {worst}");
    }

    #[test]
    fn phase_matches_breather_quadrature() {
        let a_in = CMatrix::from_rows(&[&[Complex64::new(1.0, 0.0)]]);
        let times = uniform_times(1.0, 100);
        let states = evolve_matrix_ode(&a_in, 1.0, &times, 1e-12).unwrap();
        // frozen from an independent high-order quadrature of the 1D formula
        assert_relative_eq!(states.last().unwrap().phi, -0.4249841544164551, epsilon = 1e-8);
    }

    #[test]
    fn phase_integral_needs_three_samples() {
        let a_in = CMatrix::from_rows(&[&[Complex64::new(2.0, 0.0)]]);
        let states = evolve_matrix_ode(&a_in, 1.0, &[0.0, 1.0], 1e-10).unwrap();
        assert!(matches!(phase_integral(&states, 1.0), Err(GaussianError::GridTooCoarse)));
    }

    #[test]
    fn gausson_value_and_invariance_factors() {
        // center value e^{1/2}
        let g = eval_gausson(0.0, &[0.0], &[0.0], 0.0, 1.0, 3.7, &[0.0]);
        assert_relative_eq!(g.re, 0.5f64.exp(), max_relative = 1e-15);
        assert_relative_eq!(g.im, 0.0, epsilon = 1e-12);

        // omega shift multiplies the modulus by e^omega
        let x = [0.73];
        let g0 = eval_gausson(0.0, &[0.2], &[0.4], 0.1, 1.0, 1.3, &x);
        let g1 = eval_gausson(1.0, &[0.2], &[0.4], 0.1, 1.0, 1.3, &x);
        assert_relative_eq!(g1.norm(), g0.norm() * 1.0f64.exp(), max_relative = 1e-13);

        // Galilean boost: |B_{0,0,v,0}(t,x)| = |B_{0,0,0,0}(t, x - v t)|
        let t = 0.9;
        let v = 1.7;
        let b_boost = eval_gausson(0.0, &[0.0], &[v], 0.0, 1.0, t, &x);
        let b_rest = eval_gausson(0.0, &[0.0], &[0.0], 0.0, 1.0, t, &[x[0] - v * t]);
        assert_relative_eq!(b_boost.norm(), b_rest.norm(), max_relative = 1e-13);
    }

    #[test]
    fn gaussian_solution_reduces_to_gausson() {
        let lambda = 1.0;
        let p = GaussianParams::gausson(1, 0.3, vec![0.5], vec![-0.7], 0.2, lambda);
        let states = evolve_matrix_ode(&p.a_in, lambda, &uniform_times(2.0, 20), 1e-11).unwrap();
        for s in states.iter().step_by(5) {
            for &x in &[-1.0, 0.0, 0.4, 2.2] {
                let b = eval_gaussian_solution(&p, s, &[x]);
                let g = eval_gausson(0.3, &[0.5], &[-0.7], 0.2, lambda, s.t, &[x]);
                assert_relative_eq!(b.re, g.re, epsilon = 1e-9);
                assert_relative_eq!(b.im, g.im, epsilon = 1e-9);
            }
        }
    }

    #[test]
    fn breather_equilibrium_width_is_constant() {
        let lambda = 1.0;
        let req = (0.5f64 / lambda).sqrt();
        let states = evolve_breather::<f64>(req, 0.0, lambda, 10.0, 1e-11).unwrap();
        for s in &states {
            assert!((s.r - req).abs() < 1e-10, "r = {} at t = {}", s.r, s.t);
        }
    }

    #[test]
    fn breather_first_integral_conserved() {
        let states = evolve_breather::<f64>(1.0, 0.0, 1.0, 10.0, 1e-10).unwrap();
        let h0 = states[0].first_integral;
        for s in &states {
            assert!((s.first_integral - h0).abs() / h0.abs() < 1e-8);
        }
    }

    #[test]
    fn breather_period_frozen_value() {
        // frozen from the turning-point quadrature
        // 2 ∫_{r_min}^{1} dr/sqrt(1 - 1/r² - 4 ln r)
        let p = breather_period::<f64>(1.0, 0.0, 1.0, 1e-11).unwrap();
        assert_relative_eq!(p, 2.42794912122589, epsilon = 1e-7);
        // return error in (r, rdot)
        let states = evolve_breather::<f64>(1.0, 0.0, 1.0, p, 1e-11).unwrap();
        let last = states.last().unwrap();
        assert!((last.r - 1.0).abs() < 1e-6 && last.rdot.abs() < 1e-6);
    }

    #[test]
    fn negative_lambda_asymptotic_short() {
        let ratios = breather_asymptotic_check::<f64>(1.0, 0.0, -1.0, 1e3, 1e-10).unwrap();
        let (t0, r0) = ratios[0];
        assert!((t0 - 10.0).abs() < 1e-9);
        assert!(r0 > 0.0 && r0.is_finite());
        let (t, ratio) = *ratios.last().unwrap();
        assert_eq!(t, 1e3);
        assert!(ratio > 0.0 && ratio.is_finite());
        assert!((ratio - 1.0).abs() < 0.15, "ratio {ratio}");
        assert!(breather_asymptotic_check::<f64>(1.0, 0.0, -1.0, 50.0, 1e-10).is_err());
    }

    #[test]
    fn rejects_bad_params() {
        let asym = CMatrix::from_rows(&[
            &[Complex64::new(1.0, 0.0), Complex64::new(0.4, 0.0)],
            &[Complex64::new(0.1, 0.0), Complex64::new(1.0, 0.0)],
        ]);
        let p = GaussianParams {
            dim: 2,
            a_in: asym,
            omega: 0.0,
            x0: vec![0.0; 2],
            v: vec![0.0; 2],
            theta: 0.0,
            lambda: 1.0,
        };
        assert!(p.validate().is_err());

        let neg = CMatrix::from_rows(&[&[Complex64::new(-1.0, 0.0)]]);
        assert!(evolve_matrix_ode(&neg, 1.0, &[0.0, 1.0, 2.0], 1e-10).is_err());
    }

    #[test]
    fn csv_headers() {
        let a_in = CMatrix::from_rows(&[&[Complex64::new(2.0, 0.0)]]);
        let states = evolve_matrix_ode(&a_in, 1.0, &[0.0, 0.5, 1.0], 1e-10).unwrap();
        let csv = matrix_trajectory_csv(&states);
        assert!(csv.starts_with("t,re_a_00,im_a_00,phi,det_ratio\n"));
        assert_eq!(csv.lines().count(), 4);

        let b = evolve_breather::<f64>(1.0, 0.0, 1.0, 1.0, 1e-10).unwrap();
        assert!(breather_trajectory_csv(&b).starts_with("t,r,rdot,phi,first_integral\n"));
    }
}
