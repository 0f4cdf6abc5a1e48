//! Embedded Dormand–Prince 5(4) integrator with PI step-size control and
//! a 4th-order continuous extension for observer output and event location.
//!
//! States are flat real slices; callers pack complex matrices as needed.

use crate::{cast, Real};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OdeError {
    #[error("step size underflow at t = {t}")]
    StepUnderflow { t: f64 },
    #[error("step budget exhausted ({0} steps)")]
    MaxSteps(usize),
}

#[derive(Clone, Debug)]
pub struct OdeOptions<T> {
    pub rtol: T,
    pub atol: T,
    pub h_init: Option<T>,
    pub max_steps: usize,
}

impl<T: Real> Default for OdeOptions<T> {
    fn default() -> Self {
        OdeOptions { rtol: cast(1e-10), atol: cast(1e-10), h_init: None, max_steps: 50_000_000 }
    }
}

/// One accepted step with the data needed to evaluate the solution anywhere
/// inside it.
#[derive(Clone, Debug)]
pub struct DenseStep<T> {
    pub t0: T,
    pub h: T,
    rcont: [Vec<T>; 5],
}

impl<T: Real> DenseStep<T> {
    pub fn t1(&self) -> T {
        self.t0 + self.h
    }

    /// Solution at t0 + θ·h, θ ∈ [0, 1].
    pub fn eval(&self, theta: T, out: &mut [T]) {
        let th1 = T::one() - theta;
        for i in 0..out.len() {
            out[i] = self.rcont[0][i]
                + theta
                    * (self.rcont[1][i]
                        + th1 * (self.rcont[2][i] + theta * (self.rcont[3][i] + th1 * self.rcont[4][i])));
        }
    }

    pub fn eval_at_time(&self, t: T, out: &mut [T]) {
        self.eval((t - self.t0) / self.h, out);
    }
}

const A: [[f64; 6]; 6] = [
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const C: [f64; 6] = [1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
// b5 - b4
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];
// dense-output weights
const D: [f64; 7] = [
    -12715105075.0 / 11282082432.0,
    0.0,
    87487479700.0 / 32700410799.0,
    -10690763975.0 / 1880347072.0,
    701980252875.0 / 199316789632.0,
    -1453857185.0 / 822651844.0,
    69997945.0 / 29380423.0,
];

/// Integrate dy/dt = f(t, y) from `t0` to `t_end` (either direction).
///
/// `on_step` runs after every accepted step and may inspect the dense
/// interpolant or project the state (e.g. re-symmetrize a matrix);
/// returning `false` stops the integration early (the last state is still
/// returned). If the state is mutated, the next step restarts from the
/// mutated value.
pub fn integrate_adaptive<T, F, O>(
    f: F,
    t0: T,
    t_end: T,
    y0: &[T],
    opts: &OdeOptions<T>,
    mut on_step: O,
) -> Result<Vec<T>, OdeError>
where
    T: Real,
    F: Fn(T, &[T], &mut [T]),
    O: FnMut(&DenseStep<T>, T, &mut [T]) -> bool,
{
    let n = y0.len();
    let dir = if t_end >= t0 { T::one() } else { -T::one() };
    let span = (t_end - t0).abs();
    if span == T::zero() {
        return Ok(y0.to_vec());
    }

    let mut t = t0;
    let mut y = y0.to_vec();
    let mut k: Vec<Vec<T>> = (0..7).map(|_| vec![T::zero(); n]).collect();
    f(t, &y, &mut k[0]);

    let mut h = opts.h_init.map(|h| h.abs()).unwrap_or_else(|| initial_step(&y, &k[0], span, opts)) * dir;

    let safety = cast::<T>(0.9);
    let alpha = cast::<T>(0.17);
    let beta = cast::<T>(0.04);
    let mut err_old = cast::<T>(1e-4);
    let mut ytmp = vec![T::zero(); n];
    let mut ynew = vec![T::zero(); n];

    for step in 0..opts.max_steps {
        let remaining = (t_end - t) * dir;
        if remaining <= t_end.abs().max(T::one()) * T::epsilon() * cast(4.0) {
            return Ok(y);
        }
        if (t + h - t_end) * dir > T::zero() {
            h = t_end - t;
        }
        if h.abs() <= t.abs().max(T::one()) * T::epsilon() * cast(4.0) {
            return Err(OdeError::StepUnderflow { t: t.to_f64().unwrap_or(f64::NAN) });
        }

        for s in 0..6 {
            for i in 0..n {
                let mut acc = T::zero();
                for (j, kj) in k.iter().enumerate().take(s + 1) {
                    let a = cast::<T>(A[s][j]);
                    if a != T::zero() {
                        acc += a * kj[i];
                    }
                }
                ytmp[i] = y[i] + h * acc;
            }
            let ts = t + cast::<T>(C[s]) * h;
            let (head, tail) = k.split_at_mut(s + 1);
            f(ts, &ytmp, &mut tail[0]);
            let _ = head;
        }
        // k[6] is f at (t+h, y5); y5 was the last ytmp (A[5] row = b5)
        ynew.copy_from_slice(&ytmp);

        let mut err_sq = T::zero();
        for i in 0..n {
            let mut e = T::zero();
            for (j, kj) in k.iter().enumerate() {
                let c = cast::<T>(E[j]);
                if c != T::zero() {
                    e += c * kj[i];
                }
            }
            e *= h;
            let sc = opts.atol + opts.rtol * y[i].abs().max(ynew[i].abs());
            err_sq += (e / sc) * (e / sc);
        }
        let err = (err_sq / cast(n as f64)).sqrt().max(T::min_positive_value());

        if err <= T::one() {
            let dense = make_dense(t, h, &y, &ynew, &k);
            let t_new = t + h;
            y.copy_from_slice(&ynew);
            t = t_new;
            let go_on = on_step(&dense, t, &mut y);
            if y != ynew {
                // state was projected; recompute the FSAL derivative
                f(t, &y, &mut k[0]);
            } else {
                k.swap(0, 6); // FSAL
            }
            if !go_on {
                return Ok(y);
            }
            let fac = safety * err.powf(-alpha) * err_old.powf(beta);
            h *= fac.min(cast(5.0)).max(cast(0.2));
            err_old = err.max(cast(1e-4));
        } else {
            let fac = safety * err.powf(-cast::<T>(0.2));
            h *= fac.max(cast(0.1));
        }
        if step + 1 == opts.max_steps {
            return Err(OdeError::MaxSteps(opts.max_steps));
        }
    }
    Err(OdeError::MaxSteps(opts.max_steps))
}

fn make_dense<T: Real>(t: T, h: T, y0: &[T], y1: &[T], k: &[Vec<T>]) -> DenseStep<T> {
    let n = y0.len();
    let mut r = [
        vec![T::zero(); n],
        vec![T::zero(); n],
        vec![T::zero(); n],
        vec![T::zero(); n],
        vec![T::zero(); n],
    ];
    for i in 0..n {
        let ydiff = y1[i] - y0[i];
        let bspl = h * k[0][i] - ydiff;
        r[0][i] = y0[i];
        r[1][i] = ydiff;
        r[2][i] = bspl;
        r[3][i] = ydiff - h * k[6][i] - bspl;
        let mut acc = T::zero();
        for (j, kj) in k.iter().enumerate() {
            let d = cast::<T>(D[j]);
            if d != T::zero() {
                acc += d * kj[i];
            }
        }
        r[4][i] = h * acc;
    }
    DenseStep { t0: t, h, rcont: r }
}

fn initial_step<T: Real>(y0: &[T], f0: &[T], span: T, opts: &OdeOptions<T>) -> T {
    let d0 = rms(y0);
    let d1 = rms(f0);
    let h0 = if d0 < cast(1e-5) || d1 < cast(1e-5) { cast::<T>(1e-6) } else { cast::<T>(0.01) * d0 / d1 };
    h0.min(span * cast(0.1)).max(span * opts.rtol.max(cast(1e-14)))
}

fn rms<T: Real>(v: &[T]) -> T {
    if v.is_empty() {
        return T::zero();
    }
    (v.iter().fold(T::zero(), |s, &x| s + x * x) / cast(v.len() as f64)).sqrt()
}

/// Integrate and record the dense-output solution at each requested time.
/// `times` must be sorted in integration direction; `times[0]` may equal `t0`.
pub fn solve_at_times<T, F>(
    f: F,
    t0: T,
    y0: &[T],
    times: &[T],
    opts: &OdeOptions<T>,
) -> Result<Vec<Vec<T>>, OdeError>
where
    T: Real,
    F: Fn(T, &[T], &mut [T]),
{
    let t_end = *times.last().expect("at least one output time");
    let dir = if t_end >= t0 { T::one() } else { -T::one() };
    let mut out: Vec<Vec<T>> = Vec::with_capacity(times.len());
    let mut next = 0usize;
    while next < times.len() && (times[next] - t0) * dir <= T::zero() {
        out.push(y0.to_vec());
        next += 1;
    }
    if next == times.len() {
        return Ok(out);
    }
    let mut buf = vec![T::zero(); y0.len()];
    let y_final = integrate_adaptive(
        f,
        t0,
        t_end,
        y0,
        opts,
        |dense, t_new, _y: &mut [T]| {
            while next < times.len() && (times[next] - t_new) * dir <= T::zero() {
                dense.eval_at_time(times[next], &mut buf);
                out.push(buf.clone());
                next += 1;
            }
            true
        },
    )?;
    while next < times.len() {
        // only possible when t_end was hit exactly between callbacks
        out.push(y_final.clone());
        next += 1;
    }
    Ok(out)
}
