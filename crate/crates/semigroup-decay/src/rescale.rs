//! Conversion between a general resolvent frame `(omega_hat, r_hat)` and
//! the canonical frame `(0, 1)`, plus the leftward extension of a frame.
//!
//! Every decay bound has a clean statement in the canonical frame; the
//! general statement is obtained by rescaling time by `r_hat` and twisting
//! the weight by `e^{-omega_hat t}`. [`FrameMap`] carries that change of
//! variables both ways.

use crate::bounds::ResolventFrame;
use crate::riccati::{CriticalLength, RiccatiProfile};
use crate::weights::WeightFunction;
use crate::{Error, Result};

/// Invertible change of variables between frame time `t_hat` and
/// normalized time `t = r_hat * t_hat`, with the weight pulled back as
/// `m(t) = e^{-omega_hat * t_hat} * m_hat(t_hat)`.
///
/// Scaling convention for derived lengths: critical lengths divide by
/// `r_hat` (`a_star_hat = a_star / r_hat`) and profile arguments multiply
/// (`psi_hat(s_hat) = psi0(r_hat * s_hat)`, with `psi0` computed for the
/// normalized weight). The scaling relation could also be read with the
/// factor on the other side — multiplying lengths by `r_hat` instead —
/// but only the division convention makes the rescaled optimal bound for
/// the constant weight reproduce the contraction-semigroup decay
/// `e^{-r t + pi/2}` exactly, so that is the convention adopted throughout
/// (see the round-trip tests).
#[derive(Debug, Clone, Copy)]
pub struct FrameMap {
    omega_hat: f64,
    r_hat: f64,
}

impl FrameMap {
    pub fn omega_hat(&self) -> f64 {
        self.omega_hat
    }

    pub fn r_hat(&self) -> f64 {
        self.r_hat
    }

    /// Frame time to normalized time: `t = r_hat * t_hat`.
    pub fn to_normalized_time(&self, t_hat: f64) -> f64 {
        self.r_hat * t_hat
    }

    /// Normalized time back to frame time: `t_hat = t / r_hat`.
    pub fn from_normalized_time(&self, t: f64) -> f64 {
        t / self.r_hat
    }

    /// Map a bound value computed in the normalized frame back to the
    /// general frame at frame time `t_hat`.
    pub fn map_back(&self, t_hat: f64, normalized_value: f64) -> f64 {
        (self.omega_hat * t_hat).exp() * normalized_value
    }
}

/// Express the weight `m_hat` of frame `(omega_hat, r_hat)` in the
/// canonical frame: returns `t |-> e^{-omega_hat (t/r_hat)} m_hat(t/r_hat)`
/// together with the invertible map.
pub fn normalize(
    omega_hat: f64,
    r_hat: f64,
    m_hat: &WeightFunction,
) -> Result<(WeightFunction, FrameMap)> {
    if !(r_hat.is_finite() && r_hat > 0.0) {
        return Err(Error::invalid(format!("frame rate must be positive, got {r_hat}")));
    }
    if !omega_hat.is_finite() {
        return Err(Error::invalid("frame abscissa must be finite"));
    }
    let map = FrameMap { omega_hat, r_hat };
    let normalized = if omega_hat == 0.0 && r_hat == 1.0 {
        m_hat.clone()
    } else {
        WeightFunction::modulated(m_hat.clone(), -omega_hat / r_hat, 1.0 / r_hat)?
    };
    Ok((normalized, map))
}

/// Extend a frame leftward: a bound `1/r` on the half-plane right of
/// `omega` implies the bound `1/(r - (omega - omega_prime))` right of any
/// `omega_prime` in `(omega - r, omega]`. Returns that smaller rate.
pub fn extend_frame(omega: f64, r: f64, omega_prime: f64) -> Result<f64> {
    if !(r.is_finite() && r > 0.0) {
        return Err(Error::invalid(format!("frame rate must be positive, got {r}")));
    }
    if !(omega_prime > omega - r && omega_prime <= omega) {
        return Err(Error::invalid(format!(
            "target abscissa {omega_prime} outside the admissible interval \
             ({}, {omega}]",
            omega - r
        )));
    }
    Ok(r - (omega - omega_prime))
}

/// A resolvent frame together with the optimizer profile of its weight,
/// computed in the normalized frame and exposed in frame units.
///
/// This is the object the profile-based bounds consume: it owns the
/// normalized weight, the profile of that weight, and the map connecting
/// the two time axes.
#[derive(Debug, Clone)]
pub struct FrameProfile {
    frame: ResolventFrame,
    map: FrameMap,
    normalized_weight: WeightFunction,
    profile: RiccatiProfile,
}

impl FrameProfile {
    /// Build the profile for `(frame, w)`, searching for critical lengths
    /// up to `window_hat` in frame time (capped by the weight's validity).
    pub fn new(frame: &ResolventFrame, w: &WeightFunction, window_hat: f64) -> Result<Self> {
        if !(window_hat.is_finite() && window_hat > 0.0) {
            return Err(Error::invalid(format!(
                "profile window must be positive, got {window_hat}"
            )));
        }
        let (normalized_weight, map) = normalize(frame.omega(), frame.r(), w)?;
        let window = map.to_normalized_time(window_hat.min(w.validity()));
        let profile = RiccatiProfile::compute(&normalized_weight, window)?;
        Ok(FrameProfile {
            frame: *frame,
            map,
            normalized_weight,
            profile,
        })
    }

    pub fn frame(&self) -> &ResolventFrame {
        &self.frame
    }

    pub fn map(&self) -> &FrameMap {
        &self.map
    }

    pub fn normalized_weight(&self) -> &WeightFunction {
        &self.normalized_weight
    }

    /// The underlying profile of the normalized weight, in normalized time.
    pub fn profile(&self) -> &RiccatiProfile {
        &self.profile
    }

    /// Critical length in frame units: `a_star / r_hat`.
    pub fn a_star_hat(&self) -> CriticalLength {
        self.scale_down(self.profile.a_star())
    }

    /// Dual critical length in frame units.
    pub fn b_star_hat(&self) -> CriticalLength {
        self.scale_down(self.profile.b_star())
    }

    fn scale_down(&self, star: CriticalLength) -> CriticalLength {
        match star {
            CriticalLength::Finite(v) => CriticalLength::Finite(v / self.map.r_hat),
            CriticalLength::NotFound { s_max } => CriticalLength::NotFound {
                s_max: s_max / self.map.r_hat,
            },
        }
    }

    /// Profile value in frame units: `psi_hat(s_hat) = psi0(r_hat * s_hat)`.
    pub fn psi_hat(&self, s_hat: f64) -> Result<f64> {
        self.profile.psi0(self.map.to_normalized_time(s_hat))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::{assert_abs_diff_eq, assert_relative_eq};
    use std::f64::consts::FRAC_PI_4;

    #[test]
    fn identity_frame_is_the_identity() {
        let w = WeightFunction::exponential_decay(0.3).unwrap();
        let (wn, map) = normalize(0.0, 1.0, &w).unwrap();
        for s in [0.1, 1.0, 2.5] {
            assert_eq!(w.eval(s).unwrap(), wn.eval(s).unwrap());
            assert_eq!(map.to_normalized_time(s), s);
            assert_eq!(map.map_back(s, 2.0), 2.0);
        }
    }

    #[test]
    fn constant_weight_keeps_unit_normalization() {
        // m_hat = 1 with omega_hat = 0: the normalized weight is still 1,
        // and the critical length in frame units is (pi/4)/r.
        let w = WeightFunction::constant(1.0).unwrap();
        for r in [0.5, 1.0, 3.0] {
            let frame = ResolventFrame::new(0.0, r).unwrap();
            let fp = FrameProfile::new(&frame, &w, 10.0).unwrap();
            let (m, mu) = fp.normalized_weight().eval(1.3).unwrap();
            assert_relative_eq!(m, 1.0, max_relative = 1e-14);
            assert_abs_diff_eq!(mu, 0.0, epsilon = 1e-14);
            assert_abs_diff_eq!(
                fp.a_star_hat().finite().unwrap(),
                FRAC_PI_4 / r,
                epsilon = 1e-9
            );
        }
    }

    #[test]
    fn exponential_weight_cancels_against_frame_rate() {
        // m_hat(t) = e^{omega_hat t} with r_hat = 1 normalizes to 1.
        let omega_hat = 0.8;
        let w = WeightFunction::exponential_decay(-omega_hat).unwrap();
        let (wn, _) = normalize(omega_hat, 1.0, &w).unwrap();
        for s in [0.2, 1.0, 4.0] {
            let (m, mu) = wn.eval(s).unwrap();
            assert_relative_eq!(m, 1.0, max_relative = 1e-12);
            assert_abs_diff_eq!(mu, 0.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn round_trip_is_the_identity() {
        let w = WeightFunction::exponential_decay(0.4).unwrap();
        let (wn, map) = normalize(-1.0, 0.5, &w).unwrap();
        for t_hat in [0.3, 1.7, 6.0] {
            let t = map.to_normalized_time(t_hat);
            assert_abs_diff_eq!(map.from_normalized_time(t), t_hat, epsilon = 1e-12);
            // weight map: m(t) = e^{-omega_hat t_hat} m_hat(t_hat)
            let (m_norm, _) = wn.eval(t).unwrap();
            let (m_hat, _) = w.eval(t_hat).unwrap();
            assert_relative_eq!(
                m_norm,
                (-(-1.0) * t_hat).exp() * m_hat,
                max_relative = 1e-12
            );
            // value map round trip
            let v = 0.37;
            let back = map.map_back(t_hat, v / (map.omega_hat() * t_hat).exp());
            assert_relative_eq!(back, v, max_relative = 1e-12);
        }
    }

    #[test]
    fn frame_extension_examples() {
        assert_eq!(extend_frame(0.0, 1.0, 0.0).unwrap(), 1.0);
        assert_eq!(extend_frame(0.0, 1.0, -0.5).unwrap(), 0.5);
        // monotone in the target abscissa
        let mut prev = 0.0;
        for k in 1..10 {
            let op = -1.0 + 0.1 * k as f64;
            let r = extend_frame(0.0, 1.0, op).unwrap();
            assert!(r > prev && r <= 1.0);
            prev = r;
        }
    }

    #[test]
    fn frame_extension_rejects_out_of_range() {
        assert!(extend_frame(0.0, 1.0, -1.0).is_err()); // open left end
        assert!(extend_frame(0.0, 1.0, 0.1).is_err()); // beyond closed right end
        assert!(extend_frame(0.0, -1.0, -0.1).is_err());
    }

    #[test]
    fn rejects_bad_frames() {
        let w = WeightFunction::constant(1.0).unwrap();
        assert!(normalize(0.0, 0.0, &w).is_err());
        assert!(normalize(f64::NAN, 1.0, &w).is_err());
    }
}
