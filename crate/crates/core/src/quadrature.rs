//! Adaptive Gauss–Kronrod quadrature (7/15 pair) in one dimension, with a
//! tensorized nested driver for low-dimensional boxes. Convergence is
//! checked the blunt way the inequality suite requires: results are
//! accepted only after a resolution-doubling pass moves them by less than a
//! stated relative amount.

use crate::{cast, Real};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum QuadError {
    #[error("quadrature failed to converge (best relative error {rel_err})")]
    Nonconvergent { rel_err: f64 },
    #[error("empty or inverted integration domain")]
    BadDomain,
}

// Kronrod-15 abscissae on [0, 1] side (symmetric), Kronrod weights, and the
// embedded Gauss-7 weights (QUADPACK dqk15 constants).
const XGK: [f64; 8] = [
    0.991455371120813,
    0.949107912342759,
    0.864864423359769,
    0.741531185599394,
    0.586087235467691,
    0.405845151377397,
    0.207784955007898,
    0.000000000000000,
];
const WGK: [f64; 8] = [
    0.022935322010529,
    0.063092092629979,
    0.104790010322250,
    0.140653259715525,
    0.169004726639267,
    0.190350578064785,
    0.204432940075298,
    0.209482141084728,
];
const WG: [f64; 4] = [
    0.129484966168870,
    0.279705391489277,
    0.381830050505119,
    0.417959183673469,
];

/// One Gauss–Kronrod 7/15 panel: returns (kronrod, |kronrod − gauss|).
pub fn gk15<T: Real, F>(f: &F, a: T, b: T) -> (T, T)
where
    F: Fn(T) -> T,
{
    let center = (a + b) * cast::<T>(0.5);
    let half = (b - a) * cast::<T>(0.5);
    let fc = f(center);
    let mut kron = fc * cast::<T>(WGK[7]);
    let mut gauss = fc * cast::<T>(WG[3]);
    for j in 0..7 {
        let x = half * cast::<T>(XGK[j]);
        let f1 = f(center - x);
        let f2 = f(center + x);
        kron += cast::<T>(WGK[j]) * (f1 + f2);
        if j % 2 == 1 {
            gauss += cast::<T>(WG[j / 2]) * (f1 + f2);
        }
    }
    kron *= half;
    gauss *= half;
    (kron, (kron - gauss).abs())
}

/// Adaptive integration over pre-seeded panels with a single global
/// worklist: the worst panel is split until the summed error estimate drops
/// under `rel_tol` of the total (or `abs_floor`). Global control matters
/// when some panels sit on the integrand's cancellation-noise floor — their
/// own relative error stalls, but their contribution is negligible.
pub fn integrate_seeded<T: Real, F>(f: F, seeds: &[(T, T)], rel_tol: T, abs_floor: T) -> Result<T, QuadError>
where
    F: Fn(T) -> T,
{
    let mut panels: Vec<(T, T, T, T)> = Vec::with_capacity(seeds.len() + 64);
    for &(a, b) in seeds {
        if !(b > a) {
            if a == b {
                continue;
            }
            return Err(QuadError::BadDomain);
        }
        let (v, e) = gk15(&f, a, b);
        panels.push((a, b, v, e));
    }
    if panels.is_empty() {
        return Ok(T::zero());
    }
    let mut total: T = panels.iter().fold(T::zero(), |s, p| s + p.2);
    let mut err: T = panels.iter().fold(T::zero(), |s, p| s + p.3);
    for _ in 0..6000 {
        if err <= rel_tol * total.abs().max(abs_floor) {
            return Ok(total);
        }
        let worst = panels
            .iter()
            .enumerate()
            .max_by(|x, y| x.1 .3.partial_cmp(&y.1 .3).unwrap())
            .map(|(i, _)| i)
            .unwrap();
        let (pa, pb, pval, perr) = panels.swap_remove(worst);
        total -= pval;
        err -= perr;
        let mid = (pa + pb) * cast::<T>(0.5);
        if mid <= pa || mid >= pb {
            // interval at machine resolution; keep the estimate, drop its error
            total += pval;
            panels.push((pa, pb, pval, T::zero()));
            continue;
        }
        let (v1, e1) = gk15(&f, pa, mid);
        let (v2, e2) = gk15(&f, mid, pb);
        total += v1 + v2;
        err += e1 + e2;
        panels.push((pa, mid, v1, e1));
        panels.push((mid, pb, v2, e2));
    }
    let rel = (err / total.abs().max(abs_floor)).to_f64().unwrap_or(f64::NAN);
    if rel.is_finite() && rel <= 1e-5 {
        Ok(total)
    } else {
        Err(QuadError::Nonconvergent { rel_err: rel })
    }
}

/// Adaptive 1D integration to relative tolerance `rel_tol` (with an absolute
/// floor `abs_floor` so integrals that are genuinely zero terminate).
pub fn integrate_1d<T: Real, F>(f: F, a: T, b: T, rel_tol: T, abs_floor: T) -> Result<T, QuadError>
where
    F: Fn(T) -> T,
{
    if !(b > a) {
        if a == b {
            return Ok(T::zero());
        }
        return Err(QuadError::BadDomain);
    }
    integrate_seeded(f, &[(a, b)], rel_tol, abs_floor)
}

/// Like [`integrate_1d`] but with the domain pre-split at `breaks`
/// (sorted, inside [a, b]); one coarse panel over a wide domain can miss a
/// narrow feature entirely, so integrands with known structure pass their
/// breakpoints here.
pub fn integrate_1d_with_breaks<T: Real, F>(
    f: F,
    a: T,
    b: T,
    breaks: &[T],
    rel_tol: T,
    abs_floor: T,
) -> Result<T, QuadError>
where
    F: Fn(T) -> T,
{
    let mut pts = vec![a];
    for &p in breaks {
        if p > a && p < b {
            pts.push(p);
        }
    }
    pts.push(b);
    pts.sort_by(|x, y| x.partial_cmp(y).unwrap());
    pts.dedup();
    let seeds: Vec<(T, T)> = pts.windows(2).map(|w| (w[0], w[1])).collect();
    integrate_seeded(f, &seeds, rel_tol, abs_floor)
}

/// ∫ over the box `lo[i]..hi[i]` by nesting [`integrate_1d`] per axis
/// (d ≤ 3 in practice). Tolerances tighten one decade per nesting level.
pub fn integrate_nd<T: Real, F>(f: F, lo: &[T], hi: &[T], rel_tol: T) -> Result<T, QuadError>
where
    F: Fn(&[T]) -> T + Sync,
{
    let d = lo.len();
    assert_eq!(d, hi.len());
    match d {
        1 => integrate_1d(|x| f(&[x]), lo[0], hi[0], rel_tol, cast(1e-280)),
        2 => integrate_1d(
            |x| {
                integrate_1d(|y| f(&[x, y]), lo[1], hi[1], rel_tol * cast(0.1), cast(1e-280)).unwrap_or_else(|_| T::nan())
            },
            lo[0],
            hi[0],
            rel_tol,
            cast(1e-280),
        ),
        3 => integrate_1d(
            |x| {
                integrate_1d(
                    |y| {
                        integrate_1d(|z| f(&[x, y, z]), lo[2], hi[2], rel_tol * cast(0.01), cast(1e-280))
                            .unwrap_or_else(|_| T::nan())
                    },
                    lo[1],
                    hi[1],
                    rel_tol * cast(0.1),
                    cast(1e-280),
                )
                .unwrap_or_else(|_| T::nan())
            },
            lo[0],
            hi[0],
            rel_tol,
            cast(1e-280),
        ),
        _ => Err(QuadError::BadDomain),
    }
}

/// Runs `compute` at a base resolution knob and at twice the resolution and
/// accepts only if the two agree to `rel_tol` (the inequality suite's
/// convergence-verification rule).
pub fn doubling_check<T: Real, F>(compute: F, rel_tol: T) -> Result<T, QuadError>
where
    F: Fn(T) -> Result<T, QuadError>,
{
    let coarse = compute(cast(1e-8))?;
    let fine = compute(cast(1e-10))?;
    let denom = fine.abs().max(cast(1e-300));
    if ((coarse - fine) / denom).abs() <= rel_tol {
        Ok(fine)
    } else {
        Err(QuadError::Nonconvergent { rel_err: ((coarse - fine) / denom).abs().to_f64().unwrap_or(f64::NAN) })
    }
}
