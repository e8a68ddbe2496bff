//! Weight functions `m(s)` and the weighted integrals the decay bounds
//! consume.
//!
//! A weight is a strictly positive C¹ function on `[0, validity]`, carried
//! together with its logarithmic derivative `mu = m'/m`. Closed-form kinds
//! are exact; tabulated weights interpolate a sample table with a natural
//! cubic spline and refuse to extrapolate.

use crate::quad;
use crate::{Error, Result};
use std::sync::Arc;

/// A positive C¹ weight function.
///
/// Cheap to clone: tabulated and modulated payloads sit behind `Arc`s.
/// Immutable after construction, so values can be shared freely across
/// threads.
#[derive(Clone, Debug)]
pub enum WeightFunction {
    /// `m(s) = c` for a fixed `c > 0`.
    Constant(f64),
    /// `m(s) = e^{-alpha s}`; `alpha` may have either sign.
    ExponentialDecay(f64),
    /// Natural cubic spline through a strictly increasing sample table.
    Tabulated(Arc<TabulatedWeight>),
    /// `m(s) = e^{rate s} * base(time_scale * s)` — produced when a weight is
    /// pulled back into normalized time (see [`crate::rescale::normalize`]).
    Modulated(Arc<ModulatedWeight>),
}

#[derive(Debug)]
pub struct ModulatedWeight {
    pub base: WeightFunction,
    pub rate: f64,
    pub time_scale: f64,
}

impl WeightFunction {
    /// Constant weight `m = c`.
    pub fn constant(c: f64) -> Result<Self> {
        if !(c.is_finite() && c > 0.0) {
            return Err(Error::invalid(format!(
                "constant weight must be positive and finite, got {c}"
            )));
        }
        Ok(WeightFunction::Constant(c))
    }

    /// Exponential weight `m(s) = e^{-alpha s}`.
    pub fn exponential_decay(alpha: f64) -> Result<Self> {
        if !alpha.is_finite() {
            return Err(Error::invalid("exponential rate must be finite"));
        }
        Ok(WeightFunction::ExponentialDecay(alpha))
    }

    /// Weight interpolating `(s_i, m_i)` samples with a natural cubic spline.
    ///
    /// Requires the first node at `s = 0`, strictly increasing nodes,
    /// strictly positive values, and a strictly positive interpolant (the
    /// spline is checked between nodes as well — a table whose spline
    /// undershoots zero is rejected rather than silently clamped).
    pub fn tabulated(samples: &[(f64, f64)]) -> Result<Self> {
        Ok(WeightFunction::Tabulated(Arc::new(TabulatedWeight::new(
            samples,
        )?)))
    }

    /// `m(s) = e^{rate s} * base(time_scale * s)`; used to express a weight
    /// in rescaled time without resampling it.
    pub(crate) fn modulated(base: WeightFunction, rate: f64, time_scale: f64) -> Result<Self> {
        if !(rate.is_finite() && time_scale.is_finite() && time_scale > 0.0) {
            return Err(Error::invalid(
                "modulation requires finite rate and positive time scale",
            ));
        }
        Ok(WeightFunction::Modulated(Arc::new(ModulatedWeight {
            base,
            rate,
            time_scale,
        })))
    }

    /// Upper end of the interval on which the weight may be evaluated.
    /// Closed-form kinds are valid on all of `[0, inf)`.
    pub fn validity(&self) -> f64 {
        match self {
            WeightFunction::Constant(_) | WeightFunction::ExponentialDecay(_) => f64::INFINITY,
            WeightFunction::Tabulated(t) => *t.s.last().unwrap(),
            WeightFunction::Modulated(m) => m.base.validity() / m.time_scale,
        }
    }

    /// Evaluate `(m(s), mu(s))` with `mu = m'/m`.
    pub fn eval(&self, s: f64) -> Result<(f64, f64)> {
        if !(s.is_finite() && s >= 0.0) {
            return Err(Error::invalid(format!(
                "weight evaluation point must be finite and nonnegative, got {s}"
            )));
        }
        match self {
            WeightFunction::Constant(c) => Ok((*c, 0.0)),
            WeightFunction::ExponentialDecay(alpha) => Ok(((-alpha * s).exp(), -alpha)),
            WeightFunction::Tabulated(t) => t.eval(s),
            WeightFunction::Modulated(mw) => {
                let (base_m, base_mu) = mw.base.eval(mw.time_scale * s)?;
                let m = (mw.rate * s).exp() * base_m;
                let mu = mw.rate + mw.time_scale * base_mu;
                Ok((m, mu))
            }
        }
    }

    /// The weighted inverse-norm square `∫₀^a e^{2 omega s} m(s)^{-2} ds`,
    /// the squared norm of `1/m` in the exponentially weighted L² space on
    /// `(0, a)`.
    ///
    /// Every kind goes through the same adaptive quadrature — closed-form
    /// weights are *not* special-cased here, so the unit tests comparing
    /// against symbolic antiderivatives genuinely exercise the integrator.
    pub fn weighted_inv_norm_sq(&self, omega: f64, a: f64) -> Result<f64> {
        if !(a.is_finite() && a > 0.0) {
            return Err(Error::invalid(format!(
                "integration endpoint must be positive, got {a}"
            )));
        }
        if a > self.validity() {
            return Err(Error::invalid(format!(
                "integration endpoint {a} exceeds weight validity {}",
                self.validity()
            )));
        }
        quad::integrate_default(
            |s| {
                let (m, _) = self.eval(s)?;
                Ok((2.0 * omega * s).exp() / (m * m))
            },
            0.0,
            a,
        )
    }

    /// Whether `m(s) <= e^{omega s}` holds for all `s >= 0`, i.e. whether the
    /// weight normalizes to a contraction majorant in the frame with abscissa
    /// `omega`. This gates the fixed-decay bound that assumes a contraction.
    ///
    /// Closed-form kinds are decided exactly; tabulated weights are checked by
    /// sampling (nodes plus midpoints over the validity interval), which is
    /// conservative only up to sampling resolution.
    pub fn dominated_by_exponential(&self, omega: f64) -> bool {
        if !omega.is_finite() {
            return false;
        }
        match self {
            // c * e^{-omega s} <= 1 for all s >= 0 needs c <= 1 at s = 0 and a
            // nonincreasing twist, i.e. omega >= 0.
            WeightFunction::Constant(c) => *c <= 1.0 && omega >= 0.0,
            // e^{-(alpha + omega) s} <= 1 for all s >= 0 iff alpha + omega >= 0.
            WeightFunction::ExponentialDecay(alpha) => alpha + omega >= 0.0,
            WeightFunction::Tabulated(t) => {
                let nodes = t.nodes();
                let mut ok = true;
                for w in nodes.windows(2) {
                    for s in [w[0], 0.5 * (w[0] + w[1])] {
                        match self.eval(s) {
                            Ok((m, _)) => ok &= m <= (omega * s).exp() * (1.0 + 1e-12),
                            Err(_) => return false,
                        }
                    }
                }
                if let Some(&last) = nodes.last() {
                    if let Ok((m, _)) = self.eval(last) {
                        ok &= m <= (omega * last).exp() * (1.0 + 1e-12);
                    } else {
                        return false;
                    }
                }
                ok
            }
            // e^{rate s} base(scale s) <= e^{omega s} pulls back to
            // base(u) <= e^{u (omega - rate)/scale} in the base's own time.
            WeightFunction::Modulated(mw) => {
                mw.base
                    .dominated_by_exponential((omega - mw.rate) / mw.time_scale)
            }
        }
    }
}

/// Sample table with natural cubic spline interpolation.
///
/// `d2` holds the spline's second derivatives at the nodes (zero at both
/// ends), so evaluation and the analytic first derivative are closed-form
/// per cell — `mu` never touches finite differences.
#[derive(Debug)]
pub struct TabulatedWeight {
    s: Vec<f64>,
    v: Vec<f64>,
    d2: Vec<f64>,
}

impl TabulatedWeight {
    fn new(samples: &[(f64, f64)]) -> Result<Self> {
        if samples.len() < 2 {
            return Err(Error::invalid(
                "weight table needs at least two sample points",
            ));
        }
        let s: Vec<f64> = samples.iter().map(|p| p.0).collect();
        let v: Vec<f64> = samples.iter().map(|p| p.1).collect();
        if s[0] != 0.0 {
            return Err(Error::invalid(format!(
                "weight table must start at s = 0, got {}",
                s[0]
            )));
        }
        for w in s.windows(2) {
            if !(w[1].is_finite() && w[1] > w[0]) {
                return Err(Error::invalid(
                    "weight table nodes must be finite and strictly increasing",
                ));
            }
        }
        for &val in &v {
            if !(val.is_finite() && val > 0.0) {
                return Err(Error::invalid("weight values must be strictly positive"));
            }
        }
        let d2 = natural_spline_second_derivatives(&s, &v);
        // Extreme value jumps over near-degenerate node gaps can overflow
        // the curvature solve; such a table has no usable interpolant.
        if d2.iter().any(|x| !x.is_finite()) {
            return Err(Error::invalid(
                "weight table is numerically degenerate (interpolant curvature overflows)",
            ));
        }
        let table = TabulatedWeight { s, v, d2 };
        // The nodes are positive, but a wiggly table can drive the spline
        // below zero (or out of floating-point range) between them; probe
        // each cell before accepting.
        for i in 0..table.s.len() - 1 {
            for k in 1..8 {
                let x = table.s[i] + (table.s[i + 1] - table.s[i]) * (k as f64) / 8.0;
                let probe = table.raw_eval(x).0;
                if !(probe.is_finite() && probe > 0.0) {
                    return Err(Error::invalid(
                        "weight table interpolant is not strictly positive between nodes",
                    ));
                }
            }
        }
        Ok(table)
    }

    /// The sample abscissae the table was built from.
    pub fn nodes(&self) -> &[f64] {
        &self.s
    }

    fn eval(&self, s: f64) -> Result<(f64, f64)> {
        let end = *self.s.last().unwrap();
        if s < self.s[0] || s > end {
            return Err(Error::invalid(format!(
                "evaluation point {s} outside tabulated range [{}, {end}]",
                self.s[0]
            )));
        }
        let (m, dm) = self.raw_eval(s);
        if !(m.is_finite() && m > 0.0 && dm.is_finite()) {
            return Err(Error::numerical(format!(
                "tabulated weight is not finite and positive at s = {s}"
            )));
        }
        Ok((m, dm / m))
    }

    /// Spline value and first derivative without range or positivity checks.
    fn raw_eval(&self, x: f64) -> (f64, f64) {
        let i = match self.s.binary_search_by(|a| a.partial_cmp(&x).unwrap()) {
            Ok(i) => i.min(self.s.len() - 2),
            Err(i) => i.saturating_sub(1).min(self.s.len() - 2),
        };
        let h = self.s[i + 1] - self.s[i];
        let up = self.s[i + 1] - x;
        let lo = x - self.s[i];
        let (m0, m1) = (self.d2[i], self.d2[i + 1]);
        let value = m0 * up * up * up / (6.0 * h)
            + m1 * lo * lo * lo / (6.0 * h)
            + (self.v[i] / h - m0 * h / 6.0) * up
            + (self.v[i + 1] / h - m1 * h / 6.0) * lo;
        let deriv = -m0 * up * up / (2.0 * h) + m1 * lo * lo / (2.0 * h)
            + (self.v[i + 1] - self.v[i]) / h
            - (m1 - m0) * h / 6.0;
        (value, deriv)
    }
}

/// Second derivatives of the natural cubic spline through `(s_i, v_i)`
/// via the standard tridiagonal solve (Thomas algorithm).
fn natural_spline_second_derivatives(s: &[f64], v: &[f64]) -> Vec<f64> {
    let n = s.len();
    let mut d2 = vec![0.0; n];
    if n < 3 {
        return d2;
    }
    let mut sub = vec![0.0; n];
    let mut diag = vec![0.0; n];
    let mut sup = vec![0.0; n];
    let mut rhs = vec![0.0; n];
    for i in 1..n - 1 {
        let h0 = s[i] - s[i - 1];
        let h1 = s[i + 1] - s[i];
        sub[i] = h0;
        diag[i] = 2.0 * (h0 + h1);
        sup[i] = h1;
        rhs[i] = 6.0 * ((v[i + 1] - v[i]) / h1 - (v[i] - v[i - 1]) / h0);
    }
    // Forward elimination on the interior block 1..n-1.
    for i in 2..n - 1 {
        let w = sub[i] / diag[i - 1];
        diag[i] -= w * sup[i - 1];
        rhs[i] -= w * rhs[i - 1];
    }
    d2[n - 2] = rhs[n - 2] / diag[n - 2];
    for i in (1..n - 2).rev() {
        d2[i] = (rhs[i] - sup[i] * d2[i + 1]) / diag[i];
    }
    d2
}
