//! Optimizer profiles for the weighted decay bounds.
//!
//! For a weight `m` the quantity driving the sharpest bounds is
//! `psi0 = u'/u`, where `u` solves the linear second-order equation
//! `u'' + 2 mu u' + u = 0`, `u(0) = 0`, `u'(0) = 1`, with `mu = m'/m`.
//! The critical length `a_star` is the first point where `psi0` reaches 1;
//! beyond it the associated Dirichlet–Robin quadratic form loses positivity
//! and the bounds stop being valid.
//!
//! The singular Riccati equation for `psi0` itself (blowing up like `1/s` at
//! the origin) is never integrated; everything is formed as a quotient of
//! the regular linear solution. A dual profile `psi_dual = theta'/theta`
//! from the adjoint equation `theta'' - 2 mu theta' + theta = 0`,
//! `theta(0) = 1`, `theta'(0) = 0`, provides an independent route to the
//! same information through the identity `psi_dual = -1/psi0`.

use crate::ode::{self, DenseOdeSolution};
use crate::weights::WeightFunction;
use crate::{Error, Result};
use std::fmt;

/// Default upper end of the search window for critical lengths.
pub const DEFAULT_S_MAX: f64 = 50.0;

/// Absolute tolerance of the bisection locating critical lengths.
pub const ROOT_TOL: f64 = 1e-10;

/// Lower end of the root search window; below this `psi0 ~ 1/s` dominates.
const DELTA: f64 = 1e-6;

/// Spacing of the stored solution samples. Cubic interpolation between
/// samples at this spacing keeps the local error comfortably below 1e-10.
const SAMPLE_STEP: f64 = 0.005;

/// Result of searching for a critical length on a finite window.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CriticalLength {
    /// The critical length, located to [`ROOT_TOL`].
    Finite(f64),
    /// No root in the searched window `[1e-6, s_max]` — a statement about
    /// the window only, not a proof that the length is infinite.
    NotFound { s_max: f64 },
}

impl CriticalLength {
    /// The finite value, if one was found.
    pub fn finite(&self) -> Option<f64> {
        match self {
            CriticalLength::Finite(v) => Some(*v),
            CriticalLength::NotFound { .. } => None,
        }
    }

    /// Largest argument up to which profile quantities gated by this length
    /// may be evaluated: the length itself when finite, otherwise the whole
    /// searched window.
    pub fn cap(&self) -> f64 {
        match self {
            CriticalLength::Finite(v) => *v,
            CriticalLength::NotFound { s_max } => *s_max,
        }
    }
}

impl fmt::Display for CriticalLength {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CriticalLength::Finite(v) => write!(f, "{v:.12}"),
            CriticalLength::NotFound { s_max } => write!(f, "not found <= {s_max}"),
        }
    }
}

/// Growth ceiling for `psi0` from the Riccati structure: `psi0` can only
/// increase while it sits below `f_plus(mu)`, the larger fixed point of the
/// frozen-coefficient equation.
pub fn f_plus(mu: f64) -> f64 {
    if mu >= -1.0 {
        1.0
    } else {
        -mu + (mu * mu - 1.0).sqrt()
    }
}

/// Integrate `u'' + 2 mu u' + u = 0`, `u(0) = 0`, `u'(0) = 1` over
/// `[0, s_max]`, returning densely sampled `(u, u')`.
pub fn solve_m_harmonic(w: &WeightFunction, s_max: f64) -> Result<DenseOdeSolution> {
    check_window(w, s_max)?;
    ode::integrate_dense(
        |s, y| {
            let (_, mu) = w.eval(s)?;
            Ok([y[1], -2.0 * mu * y[1] - y[0]])
        },
        s_max,
        [0.0, 1.0],
        SAMPLE_STEP,
    )
}

/// Integrate the adjoint equation `theta'' - 2 mu theta' + theta = 0`,
/// `theta(0) = 1`, `theta'(0) = 0`, returning densely sampled
/// `(theta, theta')`.
fn solve_dual(w: &WeightFunction, s_max: f64) -> Result<DenseOdeSolution> {
    check_window(w, s_max)?;
    ode::integrate_dense(
        |s, y| {
            let (_, mu) = w.eval(s)?;
            Ok([y[1], 2.0 * mu * y[1] - y[0]])
        },
        s_max,
        [1.0, 0.0],
        SAMPLE_STEP,
    )
}

fn check_window(w: &WeightFunction, s_max: f64) -> Result<()> {
    if !(s_max.is_finite() && s_max > 0.0) {
        return Err(Error::invalid(format!(
            "profile window must be positive, got {s_max}"
        )));
    }
    if s_max > w.validity() {
        return Err(Error::invalid(format!(
            "profile window {s_max} exceeds weight validity {}",
            w.validity()
        )));
    }
    Ok(())
}

/// Sampled optimizer profile for one weight: `psi0` with its critical
/// length `a_star`, and the dual profile `psi_dual` with `b_star`.
///
/// Immutable after construction; cheap to share across threads.
#[derive(Debug, Clone)]
pub struct RiccatiProfile {
    weight: WeightFunction,
    s_max: f64,
    minimizer: DenseOdeSolution,
    maximizer: DenseOdeSolution,
    a_star: CriticalLength,
    b_star: CriticalLength,
}

/// Computes the `psi0 = u'/u` side of the profile (together with the dual
/// side, which the same computation yields for free).
pub fn psi0_profile(w: &WeightFunction, s_max: f64) -> Result<RiccatiProfile> {
    RiccatiProfile::compute(w, s_max)
}

/// Computes the `psi_dual = theta'/theta` side of the profile (together
/// with the primal side).
pub fn dual_profile(w: &WeightFunction, s_max: f64) -> Result<RiccatiProfile> {
    RiccatiProfile::compute(w, s_max)
}

impl RiccatiProfile {
    /// Build the full profile on `(0, s_max]`.
    pub fn compute(w: &WeightFunction, s_max: f64) -> Result<Self> {
        let minimizer = solve_m_harmonic(w, s_max)?;
        let maximizer = solve_dual(w, s_max)?;

        // a_star: first root of u' - u = 0 (psi0 = 1 while u > 0).
        let a_star = first_root(&minimizer, s_max, |y| y[1] - y[0], |y| y[0] > 0.0)?;
        // b_star: first root of theta' + theta = 0 (psi_dual = -1 while theta > 0).
        let b_star = first_root(&maximizer, s_max, |y| y[1] + y[0], |y| y[0] > 0.0)?;

        let profile = RiccatiProfile {
            weight: w.clone(),
            s_max,
            minimizer,
            maximizer,
            a_star,
            b_star,
        };
        profile.check_growth_control()?;
        Ok(profile)
    }

    pub fn weight(&self) -> &WeightFunction {
        &self.weight
    }

    pub fn s_max(&self) -> f64 {
        self.s_max
    }

    /// Sample points of the stored profile in `(0, s_max]`.
    pub fn grid(&self) -> &[f64] {
        &self.minimizer.grid()[1..]
    }

    pub fn a_star(&self) -> CriticalLength {
        self.a_star
    }

    pub fn b_star(&self) -> CriticalLength {
        self.b_star
    }

    /// `psi0(s) = u'(s)/u(s)` for `0 < s <= s_max` with `u(s) > 0`.
    pub fn psi0(&self, s: f64) -> Result<f64> {
        if !(s > 0.0 && s <= self.s_max) {
            return Err(Error::invalid(format!(
                "psi0 argument {s} outside (0, {}]",
                self.s_max
            )));
        }
        let [u, du] = self.minimizer.eval(s)?;
        if u <= 0.0 {
            return Err(Error::numerical(format!(
                "psi0 undefined at s = {s}: solution is not positive there"
            )));
        }
        Ok(du / u)
    }

    /// `psi_dual(s) = theta'(s)/theta(s)` for `0 < s <= s_max` with
    /// `theta(s) > 0`.
    pub fn psi_dual(&self, s: f64) -> Result<f64> {
        if !(s > 0.0 && s <= self.s_max) {
            return Err(Error::invalid(format!(
                "psi_dual argument {s} outside (0, {}]",
                self.s_max
            )));
        }
        let [th, dth] = self.maximizer.eval(s)?;
        if th <= 0.0 {
            return Err(Error::numerical(format!(
                "psi_dual undefined at s = {s}: dual solution is not positive there"
            )));
        }
        Ok(dth / th)
    }

    /// Sharpest constant in the weighted lower bound on the Dirichlet
    /// segment: `I_inf(a) = psi0(a) m(a)^2`, valid for `0 < a <= a_star`.
    /// At `a = a_star` this equals `m(a_star)^2` up to root tolerance.
    pub fn i_inf(&self, a: f64) -> Result<f64> {
        self.check_capped("i_inf", a, self.a_star)?;
        let (m, _) = self.weight.eval(a)?;
        Ok(self.psi0(a)? * m * m)
    }

    /// Sharpest constant on the dual segment:
    /// `J_sup(b) = 1/(m(b)^2 psi0(b))`, valid for `0 < b <= b_star`.
    /// At `b = b_star` this equals `1/m(b_star)^2` up to root tolerance.
    pub fn j_sup(&self, b: f64) -> Result<f64> {
        self.check_capped("j_sup", b, self.b_star)?;
        let (m, _) = self.weight.eval(b)?;
        Ok(1.0 / (m * m * self.psi0(b)?))
    }

    /// The combined objective `Theta(a) = e^{2a} m(a)^2 psi0(a)`, which is
    /// strictly decreasing on `(0, a_star)` and minimal at `a_star`.
    pub fn theta_big(&self, a: f64) -> Result<f64> {
        self.check_capped("theta_big", a, self.a_star)?;
        let (m, _) = self.weight.eval(a)?;
        Ok((2.0 * a).exp() * m * m * self.psi0(a)?)
    }

    fn check_capped(&self, what: &str, x: f64, star: CriticalLength) -> Result<()> {
        if !(x.is_finite() && x > 0.0) {
            return Err(Error::invalid(format!(
                "{what} argument must be positive, got {x}"
            )));
        }
        // Tiny slack so the critical length itself, as returned by the root
        // finder, is always admissible.
        let cap = star.cap() + 10.0 * ROOT_TOL;
        if x > cap {
            return Err(Error::invalid(format!(
                "{what} argument {x} exceeds admissible range (cap {})",
                star.cap()
            )));
        }
        Ok(())
    }

    /// Verify the growth ceiling along the computed profile: `psi0` may only
    /// increase while below `f_plus(mu)`, so any observed increase between
    /// adjacent samples must stay under the local `f_plus` maximum. A
    /// violation beyond interpolation noise means the integration cannot be
    /// trusted.
    fn check_growth_control(&self) -> Result<()> {
        const GATE: f64 = 1e-6;
        let limit = self.a_star.cap();
        let grid = self.minimizer.grid();
        let values = self.minimizer.values();
        let mut prev: Option<(f64, f64)> = None; // (s, psi0)
        for (i, &s) in grid.iter().enumerate() {
            if s <= 0.0 {
                continue;
            }
            if s >= limit {
                break;
            }
            let [u, du] = values[i];
            if u <= 0.0 {
                return Err(Error::numerical(format!(
                    "solution lost positivity at s = {s} before the critical length"
                )));
            }
            let psi = du / u;
            if let Some((s_prev, psi_prev)) = prev {
                if psi > psi_prev {
                    let mut ceil = psi_prev;
                    for probe in [s_prev, 0.5 * (s_prev + s), s] {
                        let (_, mu) = self.weight.eval(probe)?;
                        ceil = ceil.max(f_plus(mu));
                    }
                    if psi > ceil + GATE {
                        return Err(Error::numerical(format!(
                            "profile growth control violated near s = {s} \
                             (psi0 rose to {psi:.6e} past ceiling {ceil:.6e})"
                        )));
                    }
                }
            }
            prev = Some((s, psi));
        }
        Ok(())
    }
}

/// Locate the first root of `g(y(s))` on `[DELTA, s_max]` by scanning the
/// sample grid for a sign change and bisecting to [`ROOT_TOL`]. `positive`
/// must hold at the left end of the bracket (it guards against picking up
/// spurious roots past a zero of the solution itself).
fn first_root(
    sol: &DenseOdeSolution,
    s_max: f64,
    g: impl Fn(&[f64; 2]) -> f64,
    positive: impl Fn(&[f64; 2]) -> bool,
) -> Result<CriticalLength> {
    let delta = DELTA.min(0.5 * s_max);
    let grid = sol.grid();
    let mut s_prev = delta;
    let mut y_prev = sol.eval(s_prev)?;
    let mut g_prev = g(&y_prev);
    if g_prev <= 0.0 {
        // Root (or sign change) already at the very start of the window.
        return Ok(CriticalLength::Finite(delta));
    }
    for &s in grid.iter() {
        if s <= s_prev {
            continue;
        }
        let y = sol.eval(s)?;
        let gv = g(&y);
        if !positive(&y_prev) {
            return Err(Error::numerical(format!(
                "solution lost positivity near s = {s_prev} before the profile root"
            )));
        }
        if gv <= 0.0 {
            // Bracketed in [s_prev, s]; bisect.
            let (mut lo, mut hi) = (s_prev, s);
            let mut g_lo = g_prev;
            while hi - lo > ROOT_TOL {
                let mid = 0.5 * (lo + hi);
                let gm = g(&sol.eval(mid)?);
                if gm <= 0.0 {
                    hi = mid;
                } else {
                    lo = mid;
                    g_lo = gm;
                }
            }
            let _ = g_lo;
            return Ok(CriticalLength::Finite(0.5 * (lo + hi)));
        }
        s_prev = s;
        y_prev = y;
        g_prev = gv;
    }
    Ok(CriticalLength::NotFound { s_max })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::{assert_abs_diff_eq, assert_relative_eq};
    use std::f64::consts::{FRAC_PI_4, FRAC_PI_6, PI};

    fn unit_weight() -> WeightFunction {
        WeightFunction::constant(1.0).unwrap()
    }

    fn exp_weight(alpha: f64) -> WeightFunction {
        WeightFunction::exponential_decay(alpha).unwrap()
    }

    #[test]
    fn unit_weight_solution_is_sine() {
        let sol = solve_m_harmonic(&unit_weight(), 3.0).unwrap();
        for &s in &[0.2, 1.0, 2.4] {
            let [u, du] = sol.eval(s).unwrap();
            assert_abs_diff_eq!(u, s.sin(), epsilon = 1e-10);
            assert_abs_diff_eq!(du, s.cos(), epsilon = 1e-10);
        }
    }

    #[test]
    fn growing_exponential_weight_solution() {
        // m = e^{-s} (alpha = 1) gives u(s) = s e^{s}.
        let sol = solve_m_harmonic(&exp_weight(1.0), 3.0).unwrap();
        for &s in &[0.5, 1.5, 2.9] {
            let [u, _] = sol.eval(s).unwrap();
            assert_relative_eq!(u, s * s.exp(), max_relative = 1e-9);
        }
        // General alpha = cos(theta): u ∝ e^{alpha s} sin(sqrt(1-alpha^2) s).
        let alpha = (PI / 3.0).cos();
        let om = (1.0 - alpha * alpha).sqrt();
        let sol = solve_m_harmonic(&exp_weight(alpha), 2.0).unwrap();
        for &s in &[0.3, 1.1, 1.9] {
            let [u, _] = sol.eval(s).unwrap();
            assert_relative_eq!(u, (alpha * s).exp() * (om * s).sin() / om, max_relative = 1e-9);
        }
    }

    #[test]
    fn unit_weight_profile_is_cotangent() {
        let p = RiccatiProfile::compute(&unit_weight(), 3.0).unwrap();
        let mut s = 0.05;
        while s <= FRAC_PI_4 {
            assert_abs_diff_eq!(p.psi0(s).unwrap(), 1.0 / s.tan(), epsilon = 1e-9);
            s += 0.01;
        }
        assert_abs_diff_eq!(p.a_star().finite().unwrap(), FRAC_PI_4, epsilon = 1e-9);
        // Dual side: theta ∝ cos, psi_dual = -tan, b_star = pi/4.
        for &s in &[0.1, 0.4, 0.7] {
            assert_abs_diff_eq!(p.psi_dual(s).unwrap(), -s.tan(), epsilon = 1e-9);
        }
        assert_abs_diff_eq!(p.b_star().finite().unwrap(), FRAC_PI_4, epsilon = 1e-9);
    }

    #[test]
    fn critical_length_for_exponential_family() {
        // m = e^{-alpha s} with alpha = cos(theta): a* = (pi - theta)/(2 sin theta).
        for theta in [FRAC_PI_6, PI / 3.0, PI / 2.0, 2.0 * PI / 3.0, 5.0 * PI / 6.0] {
            let w = exp_weight(theta.cos());
            let p = RiccatiProfile::compute(&w, 10.0).unwrap();
            let expected = (PI - theta) / (2.0 * theta.sin());
            assert_abs_diff_eq!(p.a_star().finite().unwrap(), expected, epsilon = 1e-8);
            assert_abs_diff_eq!(p.b_star().finite().unwrap(), expected, epsilon = 1e-8);
        }
    }

    #[test]
    fn critical_length_edge_cases() {
        // m = e^{s} (alpha = -1): a* = 1/2.
        let p = RiccatiProfile::compute(&exp_weight(-1.0), 5.0).unwrap();
        assert_abs_diff_eq!(p.a_star().finite().unwrap(), 0.5, epsilon = 1e-9);
        assert_abs_diff_eq!(p.b_star().finite().unwrap(), 0.5, epsilon = 1e-9);

        // m = e^{-s} (alpha = 1): psi0 = 1/s + 1 > 1 everywhere; no root.
        let p = RiccatiProfile::compute(&exp_weight(1.0), DEFAULT_S_MAX).unwrap();
        assert_eq!(p.a_star(), CriticalLength::NotFound { s_max: 50.0 });
        assert_eq!(p.b_star(), CriticalLength::NotFound { s_max: 50.0 });
        assert_eq!(p.a_star().to_string(), "not found <= 50");
    }

    #[test]
    fn duality_links_the_two_profiles() {
        for w in [unit_weight(), exp_weight(0.5), exp_weight(-0.7)] {
            let p = RiccatiProfile::compute(&w, 6.0).unwrap();
            let cap = p.a_star().cap().min(p.b_star().cap());
            let mut s = cap / 40.0;
            while s < cap {
                let psi = p.psi0(s).unwrap();
                let dual = p.psi_dual(s).unwrap();
                assert_abs_diff_eq!(dual, -1.0 / psi, epsilon = 1e-8);
                s += cap / 40.0;
            }
        }
    }

    #[test]
    fn profile_diverges_like_one_over_s_at_origin() {
        // The leading correction is -mu(0) * s, so weights with |mu(0)| < 1
        // sit strictly inside the 1e-4 window at s = 1e-4.
        for w in [unit_weight(), exp_weight(0.5), exp_weight(-0.7)] {
            let p = RiccatiProfile::compute(&w, 2.0).unwrap();
            let s = 1e-4;
            assert_abs_diff_eq!(s * p.psi0(s).unwrap(), 1.0, epsilon = 1e-4);
        }
    }

    #[test]
    fn derived_quantities_match_closed_forms() {
        let p = RiccatiProfile::compute(&unit_weight(), 2.0).unwrap();
        assert_abs_diff_eq!(p.i_inf(FRAC_PI_4).unwrap(), 1.0, epsilon = 1e-8);
        assert_abs_diff_eq!(p.i_inf(FRAC_PI_6).unwrap(), 3.0_f64.sqrt(), epsilon = 1e-8);
        assert_abs_diff_eq!(p.j_sup(FRAC_PI_6).unwrap(), FRAC_PI_6.tan(), epsilon = 1e-8);
        assert_abs_diff_eq!(p.j_sup(FRAC_PI_4).unwrap(), 1.0, epsilon = 1e-8);
        assert_relative_eq!(
            p.theta_big(FRAC_PI_4).unwrap(),
            std::f64::consts::FRAC_PI_2.exp(),
            max_relative = 1e-8
        );
        assert!(p.theta_big(PI / 8.0).unwrap() > p.theta_big(FRAC_PI_4).unwrap());
    }

    #[test]
    fn theta_big_derivative_matches_closed_form() {
        let p = RiccatiProfile::compute(&exp_weight(0.5), 5.0).unwrap();
        let a_star = p.a_star().finite().unwrap();
        let h = 1e-5;
        for k in 1..10 {
            let a = a_star * (k as f64) / 10.0;
            let fd = (p.theta_big(a + h).unwrap() - p.theta_big(a - h).unwrap()) / (2.0 * h);
            let (m, _) = p.weight().eval(a).unwrap();
            let psi = p.psi0(a).unwrap();
            let expected = -(2.0 * a).exp() * m * m * (psi - 1.0) * (psi - 1.0);
            assert_abs_diff_eq!(fd, expected, epsilon = 1e-4);
        }
    }

    #[test]
    fn product_identity_and_sandwich() {
        for w in [unit_weight(), exp_weight(0.5), exp_weight(-0.5)] {
            let p = RiccatiProfile::compute(&w, 10.0).unwrap();
            let a_star = p.a_star().finite().unwrap();
            for k in 1..=20 {
                let a = a_star * (k as f64) / 20.0;
                let i = p.i_inf(a).unwrap();
                let j = p.j_sup(a).unwrap();
                assert_abs_diff_eq!(i * j, 1.0, epsilon = 1e-8);
                let base = crate::quad::integrate_default(
                    |s| {
                        let (m, _) = w.eval(s)?;
                        Ok(1.0 / (m * m))
                    },
                    0.0,
                    a,
                )
                .unwrap();
                assert!(i <= 1.0 / base + 1e-8);
                assert!(j >= base - 1e-8);
            }
        }
    }

    #[test]
    fn growth_control_holds_on_closed_forms() {
        // Pairwise form of the ceiling check at test tolerance, on a
        // subsampled grid.
        for w in [unit_weight(), exp_weight(0.8), exp_weight(-1.0), exp_weight(1.5)] {
            let p = RiccatiProfile::compute(&w, 8.0).unwrap();
            let cap = p.a_star().cap().min(8.0);
            let n = 60;
            let pts: Vec<f64> = (1..n).map(|i| cap * (i as f64) / (n as f64)).collect();
            for (i, &s0) in pts.iter().enumerate() {
                let psi0_at_s0 = p.psi0(s0).unwrap();
                let mut fmax = f64::NEG_INFINITY;
                for &s in &pts[i..] {
                    let (_, mu) = w.eval(s).unwrap();
                    fmax = fmax.max(f_plus(mu));
                    assert!(p.psi0(s).unwrap() <= psi0_at_s0.max(fmax) + 1e-8);
                }
            }
        }
    }

    #[test]
    fn range_checks() {
        let p = RiccatiProfile::compute(&unit_weight(), 2.0).unwrap();
        let a_star = p.a_star().finite().unwrap();
        assert!(p.i_inf(a_star).is_ok());
        assert!(p.i_inf(a_star + 1e-6).is_err());
        assert!(p.i_inf(0.0).is_err());
        assert!(p.j_sup(-1.0).is_err());
        assert!(p.psi0(0.0).is_err());
        assert!(p.psi0(2.1).is_err());
        // Past the zero of u (at pi) psi0 is undefined.
        let p = RiccatiProfile::compute(&unit_weight(), 4.0).unwrap();
        assert!(p.psi0(3.5).is_err());
    }

    #[test]
    fn named_entry_points_agree() {
        let a = psi0_profile(&unit_weight(), 2.0).unwrap();
        let b = dual_profile(&unit_weight(), 2.0).unwrap();
        assert_eq!(
            a.a_star().finite().unwrap(),
            b.a_star().finite().unwrap()
        );
    }
}
