//! Decay bounds for `||e^{tA}||` built from a resolvent frame and a
//! norm majorant, and the machinery that optimizes their free interval
//! parameters and assembles a pointwise envelope on a time grid.
//!
//! Five bound kinds are implemented, identified by the stable strings
//! `"gp"`, `"gp_decay"`, `"wei"`, `"riccati"` and `"appendix"`:
//!
//! * `gp` — the two-interval quadrature bound `e^{omega t}/(r N_a N_b)`,
//!   where `N_x` is the weighted inverse norm of the majorant on `(0, x)`.
//! * `gp_decay` — the same with the exponential improvement
//!   `e^{-r (t - a - b)}` threaded through.
//! * `wei` — the fixed-rate bound `e^{(omega - r) t + pi/2}`, valid when
//!   the weight normalizes to a contraction majorant.
//! * `riccati` — the profile-optimized bound: the boundary factors are the
//!   exact minimal energies `I(a)`, `J(b)` expressed through the optimizer
//!   profile `psi0`.
//! * `appendix` — the long-horizon variant that replaces the exponential
//!   factor with the inverse of the variational maximum [`j_max`].

use std::collections::HashMap;
use std::f64::consts::FRAC_PI_2;
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;

use crate::quad;
use crate::rescale::FrameProfile;
use crate::riccati::DEFAULT_S_MAX;
use crate::weights::WeightFunction;
use crate::{Error, Result};

/// Relative margin keeping optimized interval pairs strictly inside the
/// feasible region: the optimizer enforces `a + b <= t - FEASIBILITY_MARGIN * t`.
const FEASIBILITY_MARGIN: f64 = 1e-6;

/// Log-grid span for the coarse optimization stage: the smallest probed
/// interval length is `GRID_SPAN` times the largest.
const GRID_SPAN: f64 = 1e-6;

/// Coarse grid resolution per axis.
const GRID_POINTS: usize = 32;

/// Maximum simplex iterations in the refinement stage.
const MAX_REFINE_ITERS: usize = 200;

/// A half-plane resolvent estimate: the resolvent norm is bounded by `1/r`
/// on `Re z > omega`. `r` must be positive; `omega` may have either sign.
#[derive(Debug, Clone, Copy)]
pub struct ResolventFrame {
    omega: f64,
    r: f64,
}

impl ResolventFrame {
    pub fn new(omega: f64, r: f64) -> Result<Self> {
        if !omega.is_finite() {
            return Err(Error::invalid("frame abscissa must be finite"));
        }
        if !(r.is_finite() && r > 0.0) {
            return Err(Error::invalid(format!(
                "frame rate must be positive, got {r}"
            )));
        }
        Ok(ResolventFrame { omega, r })
    }

    pub fn omega(&self) -> f64 {
        self.omega
    }

    pub fn r(&self) -> f64 {
        self.r
    }
}

/// The bound families the library can evaluate and optimize.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BoundKind {
    Gp,
    GpDecay,
    Wei,
    Riccati,
    Appendix,
}

impl BoundKind {
    /// All kinds, in the order they appear in tabular output.
    pub const ALL: [BoundKind; 5] = [
        BoundKind::Gp,
        BoundKind::GpDecay,
        BoundKind::Wei,
        BoundKind::Riccati,
        BoundKind::Appendix,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            BoundKind::Gp => "gp",
            BoundKind::GpDecay => "gp_decay",
            BoundKind::Wei => "wei",
            BoundKind::Riccati => "riccati",
            BoundKind::Appendix => "appendix",
        }
    }

    /// Whether this kind carries optimizable interval parameters `(a, b)`.
    pub fn has_intervals(&self) -> bool {
        !matches!(self, BoundKind::Wei)
    }
}

impl fmt::Display for BoundKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for BoundKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "gp" => Ok(BoundKind::Gp),
            "gp_decay" => Ok(BoundKind::GpDecay),
            "wei" => Ok(BoundKind::Wei),
            "riccati" => Ok(BoundKind::Riccati),
            "appendix" => Ok(BoundKind::Appendix),
            other => Err(Error::invalid(format!(
                "unknown bound kind {other:?}; expected one of gp, gp_decay, wei, riccati, appendix"
            ))),
        }
    }
}

/// Anything that can serve as a norm majorant in the quadrature bounds:
/// a pointwise value and the weighted inverse-norm square on `(0, a)`.
///
/// [`WeightFunction`] is the primary implementor; the envelope iteration
/// also feeds a grid-interpolated majorant back through the same trait.
pub(crate) trait Majorant: Sync {
    fn value(&self, t: f64) -> Result<f64>;
    fn weighted_inv_norm_sq(&self, omega: f64, a: f64) -> Result<f64>;
}

impl Majorant for WeightFunction {
    fn value(&self, t: f64) -> Result<f64> {
        Ok(self.eval(t)?.0)
    }

    fn weighted_inv_norm_sq(&self, omega: f64, a: f64) -> Result<f64> {
        WeightFunction::weighted_inv_norm_sq(self, omega, a)
    }
}

fn check_interval(name: &str, x: f64) -> Result<()> {
    if !(x.is_finite() && x > 0.0) {
        return Err(Error::invalid(format!(
            "interval length {name} must be positive and finite, got {x}"
        )));
    }
    Ok(())
}

fn finite_bound(v: f64) -> Result<f64> {
    if v.is_finite() && v > 0.0 {
        Ok(v)
    } else {
        Err(Error::numerical(format!(
            "bound evaluation produced a non-finite value ({v})"
        )))
    }
}

fn n_factor(maj: &dyn Majorant, omega: f64, x: f64) -> Result<f64> {
    let nsq = maj.weighted_inv_norm_sq(omega, x)?;
    if !(nsq.is_finite() && nsq > 0.0) {
        return Err(Error::numerical(format!(
            "weighted inverse norm on (0, {x}) is not positive and finite"
        )));
    }
    Ok(nsq.sqrt())
}

/// Two-interval quadrature bound: `e^{omega t} / (r N_a N_b)` for
/// `t >= a + b`, where `N_x^2 = ∫₀^x e^{2 omega s} m(s)^{-2} ds`.
pub fn bound_gp(
    frame: &ResolventFrame,
    w: &WeightFunction,
    a: f64,
    b: f64,
    t: f64,
) -> Result<f64> {
    bound_gp_m(frame, w, a, b, t)
}

pub(crate) fn bound_gp_m(
    frame: &ResolventFrame,
    maj: &dyn Majorant,
    a: f64,
    b: f64,
    t: f64,
) -> Result<f64> {
    check_interval("a", a)?;
    check_interval("b", b)?;
    if !(t.is_finite() && t >= a + b) {
        return Err(Error::invalid(format!(
            "time {t} must satisfy t >= a + b = {}",
            a + b
        )));
    }
    let na = n_factor(maj, frame.omega, a)?;
    let nb = n_factor(maj, frame.omega, b)?;
    finite_bound((frame.omega * t).exp() / (frame.r * na * nb))
}

/// Quadrature bound with the exponential improvement:
/// `e^{omega t - r (t - a - b)} / (r N_a N_b)` for `t > a + b`.
pub fn bound_gp_decay(
    frame: &ResolventFrame,
    w: &WeightFunction,
    a: f64,
    b: f64,
    t: f64,
) -> Result<f64> {
    bound_gp_decay_m(frame, w, a, b, t)
}

pub(crate) fn bound_gp_decay_m(
    frame: &ResolventFrame,
    maj: &dyn Majorant,
    a: f64,
    b: f64,
    t: f64,
) -> Result<f64> {
    check_interval("a", a)?;
    check_interval("b", b)?;
    if !(t.is_finite() && t > a + b) {
        return Err(Error::invalid(format!(
            "time {t} must satisfy t > a + b = {}",
            a + b
        )));
    }
    let na = n_factor(maj, frame.omega, a)?;
    let nb = n_factor(maj, frame.omega, b)?;
    let exponent = frame.omega * t - frame.r * (t - a - b);
    finite_bound(exponent.exp() / (frame.r * na * nb))
}

/// Fixed-rate bound `e^{(omega - r) t + pi/2}` for `t >= 0`.
///
/// Valid when the weight normalizes to a contraction majorant, i.e.
/// `m(t) <= e^{omega t}` for all `t` — see
/// [`WeightFunction::dominated_by_exponential`]. The admissibility check is
/// the caller's responsibility; this function only evaluates the formula.
pub fn bound_wei(frame: &ResolventFrame, t: f64) -> Result<f64> {
    if !(t.is_finite() && t >= 0.0) {
        return Err(Error::invalid(format!(
            "time must be nonnegative, got {t}"
        )));
    }
    finite_bound(((frame.omega - frame.r) * t + FRAC_PI_2).exp())
}

fn check_profile_cap(profile: &FrameProfile, name: &str, x: f64) -> Result<()> {
    // Matches the slack the profile accessors themselves allow at the cap.
    let cap = profile.a_star_hat().cap();
    if x > cap + 1e-9 {
        return Err(Error::invalid(format!(
            "interval length {name} = {x} exceeds the critical length cap {cap}"
        )));
    }
    Ok(())
}

/// Profile-optimized bound
/// `e^{(omega - r)(t - a - b)} m(a) m(b) sqrt(psi(a) psi(b))` for
/// `t > a + b`, with both interval lengths capped by the critical length.
///
/// `psi` is the optimizer profile of the *normalized* weight evaluated in
/// frame units, so `profile` must have been built from the same `(frame, w)`
/// pair that is passed here.
pub fn bound_riccati(
    frame: &ResolventFrame,
    w: &WeightFunction,
    profile: &FrameProfile,
    a: f64,
    b: f64,
    t: f64,
) -> Result<f64> {
    bound_riccati_m(frame, w, profile, a, b, t)
}

pub(crate) fn bound_riccati_m(
    frame: &ResolventFrame,
    maj: &dyn Majorant,
    profile: &FrameProfile,
    a: f64,
    b: f64,
    t: f64,
) -> Result<f64> {
    let (ma, mb, psi_a, psi_b) = profile_factors(maj, profile, a, b, t)?;
    let exponent = (frame.omega - frame.r) * (t - a - b);
    finite_bound(exponent.exp() * ma * mb * (psi_a * psi_b).sqrt())
}

/// Long-horizon variant of the profile-optimized bound:
/// `e^{omega (t - a - b)} m(a) m(b) sqrt(psi(a) psi(b)) / j_max(1, r (t - a - b))`
/// for `t > a + b`, with the same critical-length caps as [`bound_riccati`].
pub fn bound_appendix(
    frame: &ResolventFrame,
    w: &WeightFunction,
    profile: &FrameProfile,
    a: f64,
    b: f64,
    t: f64,
) -> Result<f64> {
    bound_appendix_m(frame, w, profile, a, b, t)
}

pub(crate) fn bound_appendix_m(
    frame: &ResolventFrame,
    maj: &dyn Majorant,
    profile: &FrameProfile,
    a: f64,
    b: f64,
    t: f64,
) -> Result<f64> {
    let (ma, mb, psi_a, psi_b) = profile_factors(maj, profile, a, b, t)?;
    let gap = t - a - b;
    // The normalizing maximum grows like e^{r gap} and overflows long before
    // the quotient e^{omega gap} / j_max does (the quotient decays whenever
    // omega < r), so fold its logarithm into the exponent instead of
    // dividing by the raw value.
    let t_tilde = frame.r * gap;
    let qm1 = t_tilde * t_tilde / (1.0 + t_tilde.mul_add(t_tilde, 1.0).sqrt());
    let ln_peak = qm1 + (2.0 * qm1 / t_tilde).ln();
    let exponent = frame.omega * gap - ln_peak;
    finite_bound(exponent.exp() * ma * mb * (psi_a * psi_b).sqrt())
}

fn profile_factors(
    maj: &dyn Majorant,
    profile: &FrameProfile,
    a: f64,
    b: f64,
    t: f64,
) -> Result<(f64, f64, f64, f64)> {
    check_interval("a", a)?;
    check_interval("b", b)?;
    if !(t.is_finite() && t > a + b) {
        return Err(Error::invalid(format!(
            "time {t} must satisfy t > a + b = {}",
            a + b
        )));
    }
    check_profile_cap(profile, "a", a)?;
    check_profile_cap(profile, "b", b)?;
    let psi_a = profile.psi_hat(a)?;
    let psi_b = profile.psi_hat(b)?;
    if psi_a <= 0.0 || psi_b <= 0.0 {
        return Err(Error::numerical(
            "optimizer profile is not positive at the requested interval lengths",
        ));
    }
    let ma = maj.value(a)?;
    let mb = maj.value(b)?;
    Ok((ma, mb, psi_a, psi_b))
}

/// The maximizer of `J(alpha, t) = t e^{alpha t} (r^2 - alpha^2)` over
/// `alpha in (0, r)`: `alpha_plus = (sqrt(1 + (r t)^2) - 1)/t`, computed in
/// cancellation-free form. Strictly inside `(0, r)` for every `t > 0`.
///
/// # Panics
///
/// Panics if `r <= 0` or `t_tilde <= 0` (or either is not finite).
pub fn alpha_plus(r: f64, t_tilde: f64) -> f64 {
    assert!(r.is_finite() && r > 0.0, "rate must be positive");
    assert!(
        t_tilde.is_finite() && t_tilde > 0.0,
        "horizon must be positive"
    );
    let p = r * t_tilde;
    r * r * t_tilde / (1.0 + p.mul_add(p, 1.0).sqrt())
}

/// The maximum `J(alpha_plus, t) = e^{q - 1} (2/t)(q - 1)` with
/// `q = sqrt(1 + (r t)^2)`, in cancellation-free form. Grows like
/// `r^2 t` for small `t` and approaches `(2/e) r e^{r t}` for large `t`.
///
/// # Panics
///
/// Panics if `r <= 0` or `t_tilde <= 0` (or either is not finite).
pub fn j_max(r: f64, t_tilde: f64) -> f64 {
    assert!(r.is_finite() && r > 0.0, "rate must be positive");
    assert!(
        t_tilde.is_finite() && t_tilde > 0.0,
        "horizon must be positive"
    );
    let p = r * t_tilde;
    // q - 1 = p^2 / (1 + q) avoids cancellation for small p.
    let qm1 = p * p / (1.0 + p.mul_add(p, 1.0).sqrt());
    qm1.exp() * 2.0 * qm1 / t_tilde
}

/// Shared state for the two-stage interval optimization: memoizes the
/// weighted inverse norms (the expensive factor, identical for `a` and `b`
/// at equal lengths) and remembers the first hard error so an all-infeasible
/// search can report a cause.
struct Objective<'a> {
    kind: BoundKind,
    frame: &'a ResolventFrame,
    maj: &'a dyn Majorant,
    profile: Option<&'a FrameProfile>,
    t: f64,
    budget: f64,
    cap: f64,
    n_memo: HashMap<u64, f64>,
    first_err: Option<Error>,
}

impl<'a> Objective<'a> {
    fn n_sq(&mut self, x: f64) -> Result<f64> {
        if let Some(&v) = self.n_memo.get(&x.to_bits()) {
            return Ok(v);
        }
        let v = self.maj.weighted_inv_norm_sq(self.frame.omega, x)?;
        self.n_memo.insert(x.to_bits(), v);
        Ok(v)
    }

    /// Pull an arbitrary positive pair into the feasible set: clamp each
    /// length to the cap, then scale the pair radially onto the time
    /// budget. Optima frequently sit exactly on these constraint surfaces;
    /// projecting (rather than rejecting) lets the simplex slide along them
    /// instead of stalling against an infinite wall.
    fn project(&self, a: f64, b: f64) -> (f64, f64) {
        let a = a.min(self.cap);
        let b = b.min(self.cap);
        let sum = a + b;
        if sum > self.budget {
            let k = self.budget / sum;
            (a * k, b * k)
        } else {
            (a, b)
        }
    }

    fn eval(&mut self, a: f64, b: f64) -> f64 {
        if !(a > 0.0 && b > 0.0 && a.is_finite() && b.is_finite()) {
            return f64::INFINITY;
        }
        let (a, b) = self.project(a, b);
        let res = match self.kind {
            BoundKind::Gp | BoundKind::GpDecay => self.eval_quadrature(a, b),
            BoundKind::Riccati => {
                bound_riccati_m(self.frame, self.maj, self.profile.unwrap(), a, b, self.t)
            }
            BoundKind::Appendix => {
                bound_appendix_m(self.frame, self.maj, self.profile.unwrap(), a, b, self.t)
            }
            BoundKind::Wei => unreachable!("fixed-rate kind has no interval parameters"),
        };
        match res {
            Ok(v) if v.is_finite() => v,
            Ok(_) => f64::INFINITY,
            Err(e) => {
                self.first_err.get_or_insert(e);
                f64::INFINITY
            }
        }
    }

    fn eval_quadrature(&mut self, a: f64, b: f64) -> Result<f64> {
        let na_sq = self.n_sq(a)?;
        let nb_sq = self.n_sq(b)?;
        if !(na_sq > 0.0 && nb_sq > 0.0) {
            return Err(Error::numerical("weighted inverse norm is not positive"));
        }
        let exponent = match self.kind {
            BoundKind::Gp => self.frame.omega * self.t,
            _ => self.frame.omega * self.t - self.frame.r * (self.t - a - b),
        };
        Ok(exponent.exp() / (self.frame.r * (na_sq * nb_sq).sqrt()))
    }
}

/// Minimize a bound kind over its interval parameters at fixed time `t`.
///
/// Returns the optimizing pair `(a, b)` and the bound value there. The
/// feasible region is `a, b > 0`, `a + b <= t (1 - 1e-6)`, and for the
/// profile-based kinds additionally `a, b <= ` the critical-length cap;
/// `profile` is required for those kinds and ignored otherwise.
///
/// Search strategy: a 32 x 32 logarithmic grid spanning six decades below
/// the largest admissible length, followed by a simplex refinement in
/// log-coordinates (at most 200 iterations). For the profile-optimized kind
/// the boundary-energy product is monotone decreasing in each interval
/// length, so when the caps fit inside the time budget the optimum
/// `(cap, cap)` is returned directly without a search.
pub fn optimize_ab(
    kind: BoundKind,
    frame: &ResolventFrame,
    w: &WeightFunction,
    profile: Option<&FrameProfile>,
    t: f64,
) -> Result<((f64, f64), f64)> {
    optimize_ab_majorant(kind, frame, w, profile, t)
}

pub(crate) fn optimize_ab_majorant(
    kind: BoundKind,
    frame: &ResolventFrame,
    maj: &dyn Majorant,
    profile: Option<&FrameProfile>,
    t: f64,
) -> Result<((f64, f64), f64)> {
    if !(t.is_finite() && t > 0.0) {
        return Err(Error::invalid(format!(
            "interval optimization requires a positive time, got {t}"
        )));
    }
    if kind == BoundKind::Wei {
        return Err(Error::invalid(
            "the fixed-rate bound has no interval parameters to optimize",
        ));
    }
    let budget = t * (1.0 - FEASIBILITY_MARGIN);
    let profile = match kind {
        BoundKind::Riccati | BoundKind::Appendix => Some(profile.ok_or_else(|| {
            Error::invalid("profile-based bound kinds need a frame profile")
        })?),
        _ => None,
    };
    let cap = match profile {
        Some(p) => p.a_star_hat().cap().min(budget),
        None => budget,
    };

    // Monotonicity shortcut: the boundary-energy product in the
    // profile-optimized bound decreases in each interval length up to the
    // cap, while the exponential factor does not involve a or b beyond
    // their sum, so (cap, cap) is exactly optimal whenever it is feasible.
    if kind == BoundKind::Riccati {
        let c = profile.unwrap().a_star_hat().cap();
        if 2.0 * c <= budget {
            let value = bound_riccati_m(frame, maj, profile.unwrap(), c, c, t)?;
            return Ok(((c, c), value));
        }
    }

    let mut obj = Objective {
        kind,
        frame,
        maj,
        profile,
        t,
        budget,
        cap,
        n_memo: HashMap::new(),
        first_err: None,
    };

    let lo = cap * GRID_SPAN;
    let span = (cap / lo).ln();
    let mut xs: Vec<f64> = (0..GRID_POINTS)
        .map(|i| lo * (span * i as f64 / (GRID_POINTS - 1) as f64).exp())
        .collect();
    *xs.last_mut().unwrap() = cap;

    let mut best = ((f64::NAN, f64::NAN), f64::INFINITY);
    for &a in &xs {
        for &b in &xs {
            if a + b <= budget {
                let v = obj.eval(a, b);
                if v < best.1 {
                    best = ((a, b), v);
                }
            }
        }
    }
    if !best.1.is_finite() {
        return Err(obj.first_err.take().unwrap_or_else(|| {
            Error::numerical("no admissible interval pair produced a finite bound")
        }));
    }

    let step = span / (GRID_POINTS - 1) as f64;
    let start = ((best.0).0.ln(), (best.0).1.ln());
    let ((la, lb), v) = nelder_mead_2(
        &mut |x, y| obj.eval(x.exp(), y.exp()),
        start,
        step,
        MAX_REFINE_ITERS,
    );
    if v < best.1 {
        // The simplex wanders in unconstrained log-coordinates; the value it
        // found belongs to the projected pair.
        best = (obj.project(la.exp(), lb.exp()), v);
    }

    // Re-evaluate through the canonical bound functions so the reported
    // value is exactly what a direct call at (a, b) would produce.
    let (a, b) = best.0;
    let value = match kind {
        BoundKind::Gp => bound_gp_m(frame, maj, a, b, t)?,
        BoundKind::GpDecay => bound_gp_decay_m(frame, maj, a, b, t)?,
        BoundKind::Riccati => bound_riccati_m(frame, maj, profile.unwrap(), a, b, t)?,
        BoundKind::Appendix => bound_appendix_m(frame, maj, profile.unwrap(), a, b, t)?,
        BoundKind::Wei => unreachable!(),
    };
    Ok(((a, b), value))
}

/// Downhill simplex in two variables. Returns the best vertex found.
/// Infinite objective values are handled (they repel the simplex), so the
/// caller can encode constraints as hard infeasibility.
fn nelder_mead_2(
    f: &mut dyn FnMut(f64, f64) -> f64,
    x0: (f64, f64),
    step: f64,
    max_iters: usize,
) -> ((f64, f64), f64) {
    let mut p = [x0, (x0.0 + step, x0.1), (x0.0, x0.1 + step)];
    let mut v = [f(p[0].0, p[0].1), f(p[1].0, p[1].1), f(p[2].0, p[2].1)];
    for _ in 0..max_iters {
        let mut idx = [0usize, 1, 2];
        idx.sort_by(|&i, &j| v[i].partial_cmp(&v[j]).unwrap_or(std::cmp::Ordering::Equal));
        let (ib, im, iw) = (idx[0], idx[1], idx[2]);
        if !v[ib].is_finite() {
            break;
        }
        if v[iw].is_finite() && v[iw] - v[ib] <= 1e-13 * (v[ib].abs() + 1e-300) {
            break;
        }
        let diam = (p[ib].0 - p[iw].0)
            .abs()
            .max((p[ib].1 - p[iw].1).abs())
            .max((p[ib].0 - p[im].0).abs())
            .max((p[ib].1 - p[im].1).abs());
        if diam <= 1e-10 {
            break;
        }
        let c = (0.5 * (p[ib].0 + p[im].0), 0.5 * (p[ib].1 + p[im].1));
        let refl = (2.0 * c.0 - p[iw].0, 2.0 * c.1 - p[iw].1);
        let fr = f(refl.0, refl.1);
        if fr < v[ib] {
            let exp = (c.0 + 2.0 * (c.0 - p[iw].0), c.1 + 2.0 * (c.1 - p[iw].1));
            let fe = f(exp.0, exp.1);
            if fe < fr {
                p[iw] = exp;
                v[iw] = fe;
            } else {
                p[iw] = refl;
                v[iw] = fr;
            }
        } else if fr < v[im] {
            p[iw] = refl;
            v[iw] = fr;
        } else {
            let (cx, fc) = if fr < v[iw] {
                let out = (c.0 + 0.5 * (refl.0 - c.0), c.1 + 0.5 * (refl.1 - c.1));
                (out, f(out.0, out.1))
            } else {
                let inn = (c.0 - 0.5 * (c.0 - p[iw].0), c.1 - 0.5 * (c.1 - p[iw].1));
                (inn, f(inn.0, inn.1))
            };
            if fc < v[iw].min(fr) {
                p[iw] = cx;
                v[iw] = fc;
            } else {
                // Shrink toward the best vertex.
                for k in 0..3 {
                    if k != ib {
                        p[k] = (
                            p[ib].0 + 0.5 * (p[k].0 - p[ib].0),
                            p[ib].1 + 0.5 * (p[k].1 - p[ib].1),
                        );
                        v[k] = f(p[k].0, p[k].1);
                    }
                }
            }
        }
    }
    let mut ib = 0;
    for k in 1..3 {
        if v[k] < v[ib] {
            ib = k;
        }
    }
    (p[ib], v[ib])
}

/// One bound contribution at a grid time: the kind, its optimized interval
/// pair (absent for the fixed-rate kind), and the bound value.
#[derive(Debug, Clone)]
pub struct EnvelopePiece {
    pub kind: BoundKind,
    pub interval: Option<(f64, f64)>,
    pub value: f64,
}

/// Envelope state at one grid time: the base majorant value, every active
/// piece, and the pointwise minimum over all of them.
#[derive(Debug, Clone)]
pub struct EnvelopeRow {
    pub t: f64,
    pub base: f64,
    pub pieces: Vec<EnvelopePiece>,
    pub value: f64,
}

impl EnvelopeRow {
    pub fn piece(&self, kind: BoundKind) -> Option<&EnvelopePiece> {
        self.pieces.iter().find(|p| p.kind == kind)
    }

    /// The piece achieving the smallest value, if any piece is active.
    pub fn winner(&self) -> Option<&EnvelopePiece> {
        self.pieces
            .iter()
            .min_by(|x, y| x.value.partial_cmp(&y.value).unwrap_or(std::cmp::Ordering::Equal))
    }
}

/// A pointwise decay envelope on a time grid: at every grid node the
/// minimum of the base majorant and all optimized bound pieces, and between
/// nodes the conservative interpolation `min(base(t), max(v_i, v_{i+1}))`.
#[derive(Debug, Clone)]
pub struct DecayEnvelope {
    frame: ResolventFrame,
    base: WeightFunction,
    rows: Vec<EnvelopeRow>,
}

impl DecayEnvelope {
    pub fn frame(&self) -> &ResolventFrame {
        &self.frame
    }

    pub fn rows(&self) -> &[EnvelopeRow] {
        &self.rows
    }

    /// Envelope value at an arbitrary time. Between grid nodes the value is
    /// rounded up to the larger neighboring node value (then capped by the
    /// base majorant), so the result stays a valid majorant under the same
    /// hypotheses as the grid values themselves; outside the grid range the
    /// base majorant is returned unchanged.
    pub fn evaluate(&self, t: f64) -> Result<f64> {
        if !(t.is_finite() && t >= 0.0) {
            return Err(Error::invalid(format!(
                "envelope evaluation time must be nonnegative, got {t}"
            )));
        }
        let base_v = self.base.eval(t)?.0;
        let first = self.rows.first().expect("envelope has rows");
        let last = self.rows.last().expect("envelope has rows");
        if t < first.t || t > last.t {
            return Ok(base_v);
        }
        let idx = self.rows.partition_point(|r| r.t < t);
        if self.rows[idx].t == t {
            return Ok(base_v.min(self.rows[idx].value));
        }
        let step = self.rows[idx - 1].value.max(self.rows[idx].value);
        Ok(base_v.min(step))
    }
}

/// Grid-interpolated majorant fed back into the quadrature bounds on later
/// envelope iterations. Between nodes it takes the larger neighboring node
/// value capped by the base majorant (the same rule as
/// [`DecayEnvelope::evaluate`]); outside the grid it falls back to the base
/// majorant alone. Weighted inverse norms reuse cumulative integrals
/// precomputed at the grid nodes, so each query only integrates a partial
/// cell.
pub(crate) struct GridMajorant<'a> {
    base: &'a WeightFunction,
    grid: &'a [f64],
    values: Vec<f64>,
    omega: f64,
    cum: Vec<f64>,
}

impl<'a> GridMajorant<'a> {
    pub(crate) fn new(
        base: &'a WeightFunction,
        grid: &'a [f64],
        values: Vec<f64>,
        omega: f64,
    ) -> Result<Self> {
        assert_eq!(grid.len(), values.len());
        let mut gm = GridMajorant {
            base,
            grid,
            values,
            omega,
            cum: Vec::new(),
        };
        let mut cum = Vec::with_capacity(grid.len());
        let mut acc = if grid[0] > 0.0 {
            quad::integrate(
                |s| {
                    let m = gm.base.eval(s)?.0;
                    Ok((2.0 * omega * s).exp() / (m * m))
                },
                0.0,
                grid[0],
                quad::ABS_TOL,
                quad::REL_TOL,
            )?
        } else {
            0.0
        };
        cum.push(acc);
        for i in 0..grid.len() - 1 {
            acc += quad::integrate(
                |s| gm.inv_sq_at(s),
                grid[i],
                grid[i + 1],
                quad::ABS_TOL,
                quad::REL_TOL,
            )?;
            cum.push(acc);
        }
        gm.cum = cum;
        Ok(gm)
    }

    fn inv_sq_at(&self, s: f64) -> Result<f64> {
        let m = self.value(s)?;
        Ok((2.0 * self.omega * s).exp() / (m * m))
    }
}

impl Majorant for GridMajorant<'_> {
    fn value(&self, t: f64) -> Result<f64> {
        let base_v = self.base.eval(t)?.0;
        let first = self.grid[0];
        let last = *self.grid.last().unwrap();
        if t < first || t > last {
            return Ok(base_v);
        }
        let idx = self.grid.partition_point(|&g| g < t);
        let step = if self.grid[idx] == t {
            self.values[idx]
        } else {
            self.values[idx - 1].max(self.values[idx])
        };
        Ok(base_v.min(step))
    }

    fn weighted_inv_norm_sq(&self, omega: f64, a: f64) -> Result<f64> {
        if omega != self.omega {
            // The cached integrals are tied to one abscissa; any other
            // request integrates directly.
            return quad::integrate(
                |s| {
                    let m = self.value(s)?;
                    Ok((2.0 * omega * s).exp() / (m * m))
                },
                0.0,
                a,
                quad::ABS_TOL,
                quad::REL_TOL,
            );
        }
        if !(a.is_finite() && a > 0.0) {
            return Err(Error::invalid(format!(
                "integration endpoint must be positive, got {a}"
            )));
        }
        let first = self.grid[0];
        let last = *self.grid.last().unwrap();
        if a <= first {
            return quad::integrate(
                |s| self.inv_sq_at(s),
                0.0,
                a,
                quad::ABS_TOL,
                quad::REL_TOL,
            );
        }
        let (k, from) = if a >= last {
            (self.cum.len() - 1, last)
        } else {
            let idx = self.grid.partition_point(|&g| g <= a) - 1;
            (idx, self.grid[idx])
        };
        let tail = if a > from {
            quad::integrate(
                |s| self.inv_sq_at(s),
                from,
                a,
                quad::ABS_TOL,
                quad::REL_TOL,
            )?
        } else {
            0.0
        };
        Ok(self.cum[k] + tail)
    }
}

/// Build a decay envelope on `t_grid` with the default critical-length
/// search window. See [`build_envelope_windowed`].
pub fn build_envelope(
    frame: &ResolventFrame,
    w: &WeightFunction,
    base: &WeightFunction,
    t_grid: &[f64],
    iterations: usize,
) -> Result<DecayEnvelope> {
    build_envelope_windowed(frame, w, base, t_grid, iterations, DEFAULT_S_MAX)
}

/// Build a decay envelope on `t_grid`.
///
/// `w` is the majorant the bounds are evaluated against; `base` is the
/// envelope's fallback value (the two are normally the same object, but the
/// pointwise cap and the bound evaluation are kept distinct). At every grid
/// time the envelope records the base value, the optimized value of every
/// applicable bound kind, and their minimum.
///
/// With `iterations > 1` the envelope from the previous pass — a tighter
/// majorant than `w` itself — is fed back into the quadrature kinds through
/// a grid-interpolated majorant, and the result is min-merged so the
/// envelope can only improve. The profile-based kinds and the fixed-rate
/// kind are evaluated once against the original weight: their derivations
/// require the smooth weight itself, not a grid interpolant.
///
/// `window_hat` caps the critical-length search window (in frame time) for
/// the profile-based kinds.
pub fn build_envelope_windowed(
    frame: &ResolventFrame,
    w: &WeightFunction,
    base: &WeightFunction,
    t_grid: &[f64],
    iterations: usize,
    window_hat: f64,
) -> Result<DecayEnvelope> {
    if iterations == 0 {
        return Err(Error::invalid("envelope needs at least one iteration"));
    }
    if t_grid.is_empty() {
        return Err(Error::invalid("envelope needs a nonempty time grid"));
    }
    for pair in t_grid.windows(2) {
        // False for NaN nodes too, which must equally be rejected.
        let increasing = pair[1] > pair[0];
        if !increasing {
            return Err(Error::invalid("envelope time grid must be strictly increasing"));
        }
    }
    if !(t_grid[0].is_finite() && t_grid[0] >= 0.0) || !t_grid.last().unwrap().is_finite() {
        return Err(Error::invalid("envelope time grid must be finite and nonnegative"));
    }
    let t_max = *t_grid.last().unwrap();
    // Interval lengths never exceed the largest grid time, so the
    // critical-length search window need not either.
    let profile = if t_max > 0.0 {
        Some(FrameProfile::new(frame, w, window_hat.min(t_max))?)
    } else {
        None
    };
    let wei_ok = w.dominated_by_exponential(frame.omega);

    let mut rows: Vec<EnvelopeRow> = Vec::new();
    for iter in 0..iterations {
        let grid_majorant = if iter == 0 {
            None
        } else {
            let values: Vec<f64> = rows.iter().map(|r| r.value).collect();
            Some(GridMajorant::new(base, t_grid, values, frame.omega)?)
        };
        let prev = std::mem::take(&mut rows);
        let new_rows: Result<Vec<EnvelopeRow>> = t_grid
            .par_iter()
            .enumerate()
            .map(|(i, &t)| {
                let maj: &dyn Majorant = match &grid_majorant {
                    Some(g) => g,
                    None => w,
                };
                let base_v = base.eval(t)?.0;
                let mut pieces: Vec<EnvelopePiece> = Vec::new();
                for kind in BoundKind::ALL {
                    match kind {
                        BoundKind::Gp | BoundKind::GpDecay => {
                            if t > 0.0 {
                                let ((a, b), v) =
                                    optimize_ab_majorant(kind, frame, maj, None, t)?;
                                let refreshed = EnvelopePiece {
                                    kind,
                                    interval: Some((a, b)),
                                    value: v,
                                };
                                let merged = match prev.get(i).and_then(|r| r.piece(kind)) {
                                    Some(old) if old.value <= refreshed.value => old.clone(),
                                    _ => refreshed,
                                };
                                pieces.push(merged);
                            }
                        }
                        BoundKind::Wei => {
                            if iter == 0 {
                                if wei_ok {
                                    pieces.push(EnvelopePiece {
                                        kind,
                                        interval: None,
                                        value: bound_wei(frame, t)?,
                                    });
                                }
                            } else if let Some(old) = prev[i].piece(kind) {
                                pieces.push(old.clone());
                            }
                        }
                        BoundKind::Riccati | BoundKind::Appendix => {
                            if iter == 0 {
                                if let (Some(p), true) = (&profile, t > 0.0) {
                                    let ((a, b), v) =
                                        optimize_ab_majorant(kind, frame, w, Some(p), t)?;
                                    pieces.push(EnvelopePiece {
                                        kind,
                                        interval: Some((a, b)),
                                        value: v,
                                    });
                                }
                            } else if let Some(old) = prev[i].piece(kind) {
                                pieces.push(old.clone());
                            }
                        }
                    }
                }
                let mut value = base_v;
                for piece in &pieces {
                    value = value.min(piece.value);
                }
                if let Some(old) = prev.get(i) {
                    value = value.min(old.value);
                }
                Ok(EnvelopeRow {
                    t,
                    base: base_v,
                    pieces,
                    value,
                })
            })
            .collect();
        rows = new_rows?;
    }
    Ok(DecayEnvelope {
        frame: *frame,
        base: base.clone(),
        rows,
    })
}
