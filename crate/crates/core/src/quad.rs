//! Adaptive quadrature, including a log-space variant for integrands of the
//! form `exp(g)` whose exponents overflow or underflow `exp` directly.

use crate::error::{Error, Result};
use crate::scalar::FloatScalar;

const MAX_DEPTH: usize = 60;

/// Adaptive Simpson quadrature of `f` over `[a, b]` (`a <= b`) to absolute
/// tolerance `tol`.
pub fn integrate<S: FloatScalar>(f: impl Fn(S) -> S, a: S, b: S, tol: S) -> Result<S> {
    if !(a <= b) {
        return Err(Error::domain("integration bounds must satisfy a <= b"));
    }
    if tol <= S::zero() {
        return Err(Error::invalid("quadrature tolerance must be positive"));
    }
    if a == b {
        return Ok(S::zero());
    }
    let m = midpoint(a, b);
    let (fa, fm, fb) = (f(a), f(m), f(b));
    let whole = simpson(a, b, fa, fm, fb);
    Ok(refine(&f, a, b, fa, fm, fb, whole, tol, MAX_DEPTH))
}

fn midpoint<S: FloatScalar>(a: S, b: S) -> S {
    (a + b) / S::from_count(2)
}

fn simpson<S: FloatScalar>(a: S, b: S, fa: S, fm: S, fb: S) -> S {
    (b - a) / S::from_f64(6.0).unwrap() * (fa + S::from_count(4) * fm + fb)
}

#[allow(clippy::too_many_arguments)]
fn refine<S: FloatScalar>(
    f: &impl Fn(S) -> S,
    a: S,
    b: S,
    fa: S,
    fm: S,
    fb: S,
    whole: S,
    tol: S,
    depth: usize,
) -> S {
    let m = midpoint(a, b);
    let lm = midpoint(a, m);
    let rm = midpoint(m, b);
    let (flm, frm) = (f(lm), f(rm));
    let left = simpson(a, m, fa, flm, fm);
    let right = simpson(m, b, fm, frm, fb);
    let delta = left + right - whole;
    let fifteen = S::from_count(15);
    if depth == 0 || delta.abs() <= fifteen * tol {
        return left + right + delta / fifteen;
    }
    let half_tol = tol / S::from_count(2);
    refine(f, a, m, fa, flm, fm, left, half_tol, depth - 1)
        + refine(f, m, b, fm, frm, fb, right, half_tol, depth - 1)
}

/// `ln ∫_a^b exp(g(y)) dy`, computed without overflow by shifting the
/// exponent: the maximum of `g` over a coarse scan is factored out before
/// the adaptive pass. `rel_tol` is a relative tolerance on the integral;
/// internally a loose pass estimates its magnitude and a second pass
/// tightens to `rel_tol` of it. Returns `-inf` for an identically `-inf`
/// exponent or a zero-width domain.
pub fn log_integral_exp<S: FloatScalar>(
    g: impl Fn(S) -> S,
    a: S,
    b: S,
    rel_tol: S,
) -> Result<S> {
    if !(a <= b) {
        return Err(Error::domain("integration bounds must satisfy a <= b"));
    }
    if a == b {
        return Ok(S::neg_infinity());
    }
    // Coarse scan for the exponent peak; the shift only needs to be near the
    // maximum for stability, not exactly at it.
    let scan = 256usize;
    let width = b - a;
    let mut peak = S::neg_infinity();
    for k in 0..=scan {
        let y = a + width * S::from_count(k) / S::from_count(scan);
        let v = g(y);
        if v > peak {
            peak = v;
        }
    }
    if peak == S::neg_infinity() {
        return Ok(S::neg_infinity());
    }
    let f = |y: S| (g(y) - peak).exp();
    // The shifted integrand peaks at ~1, so `width` bounds the integral.
    let loose = integrate(f, a, b, width * S::from_f64(1e-4).unwrap())?;
    if loose <= S::zero() {
        return Ok(S::neg_infinity());
    }
    let shifted = integrate(f, a, b, loose * rel_tol)?;
    if shifted <= S::zero() {
        return Ok(S::neg_infinity());
    }
    Ok(peak + shifted.ln())
}
