//! Adaptive Gauss–Legendre quadrature.
//!
//! The decay bounds are only as trustworthy as the weighted integrals behind
//! them, so the integrator is deliberately conservative: a 15-point
//! Gauss–Legendre rule compared against its two-panel refinement, with
//! bisection until the panel discrepancy is below tolerance. Integrands are
//! smooth except for isolated kinks introduced by envelope majorants, which
//! the bisection resolves at the cost of a few extra levels.

use crate::{Error, Result};
use std::sync::OnceLock;

const GL_N: usize = 15;

/// Nodes and weights of the 15-point Gauss–Legendre rule on [-1, 1].
///
/// Computed once by Newton iteration on the Legendre recurrence rather than
/// pasted from a table, so the values are exactly the f64 roots.
fn gl15() -> &'static ([f64; GL_N], [f64; GL_N]) {
    static CACHE: OnceLock<([f64; GL_N], [f64; GL_N])> = OnceLock::new();
    CACHE.get_or_init(|| {
        let mut nodes = [0.0_f64; GL_N];
        let mut weights = [0.0_f64; GL_N];
        let n = GL_N;
        for i in 0..n {
            // Chebyshev-style initial guess, then Newton on P_n(x) = 0.
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            for _ in 0..100 {
                let (p, dp) = legendre_with_derivative(n, x);
                let dx = p / dp;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, dp) = legendre_with_derivative(n, x);
            nodes[i] = x;
            weights[i] = 2.0 / ((1.0 - x * x) * dp * dp);
        }
        (nodes, weights)
    })
}

/// Value and derivative of the Legendre polynomial P_n at x via the
/// three-term recurrence.
fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    // P_n' from P_n and P_{n-1}.
    let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}

/// One Gauss–Legendre panel over [a, b].
fn panel<F>(f: &mut F, a: f64, b: f64) -> Result<f64>
where
    F: FnMut(f64) -> Result<f64>,
{
    let (nodes, weights) = gl15();
    let mid = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let mut sum = 0.0;
    for (&x, &w) in nodes.iter().zip(weights.iter()) {
        sum += w * f(mid + half * x)?;
    }
    Ok(sum * half)
}

/// Integrate `f` over `[a, b]` adaptively to absolute tolerance `abs_tol`
/// and relative tolerance `rel_tol` (whichever is looser wins locally).
///
/// Returns an error if the recursion cannot reach tolerance, or if the
/// integrand itself fails or produces a non-finite value.
pub fn integrate<F>(mut f: F, a: f64, b: f64, abs_tol: f64, rel_tol: f64) -> Result<f64>
where
    F: FnMut(f64) -> Result<f64>,
{
    if !(a.is_finite() && b.is_finite()) {
        return Err(Error::invalid("integration limits must be finite"));
    }
    if a > b {
        return Err(Error::invalid(format!(
            "integration interval is reversed: [{a}, {b}]"
        )));
    }
    if a == b {
        return Ok(0.0);
    }
    let whole = panel(&mut f, a, b)?;
    let total = refine(&mut f, a, b, whole, abs_tol, rel_tol, 0)?;
    if !total.is_finite() {
        return Err(Error::numerical(format!(
            "integral over [{a}, {b}] is not finite"
        )));
    }
    Ok(total)
}

const MAX_DEPTH: u32 = 48;

fn refine<F>(
    f: &mut F,
    a: f64,
    b: f64,
    whole: f64,
    abs_tol: f64,
    rel_tol: f64,
    depth: u32,
) -> Result<f64>
where
    F: FnMut(f64) -> Result<f64>,
{
    let mid = 0.5 * (a + b);
    let left = panel(f, a, mid)?;
    let right = panel(f, mid, b)?;
    let refined = left + right;
    let err = (refined - whole).abs();
    if err <= abs_tol.max(rel_tol * refined.abs()) || !refined.is_finite() {
        return Ok(refined);
    }
    if depth >= MAX_DEPTH || mid <= a || mid >= b {
        return Err(Error::numerical(format!(
            "quadrature failed to converge on [{a}, {b}] (residual {err:.3e})"
        )));
    }
    let half_abs = 0.5 * abs_tol;
    Ok(refine(f, a, mid, left, half_abs, rel_tol, depth + 1)?
        + refine(f, mid, b, right, half_abs, rel_tol, depth + 1)?)
}

/// Default tolerances used for the weighted integrals in this crate.
pub const ABS_TOL: f64 = 1e-12;
pub const REL_TOL: f64 = 1e-10;

/// Convenience wrapper with the crate-default tolerances.
pub fn integrate_default<F>(f: F, a: f64, b: f64) -> Result<f64>
where
    F: FnMut(f64) -> Result<f64>,
{
    integrate(f, a, b, ABS_TOL, REL_TOL)
}
