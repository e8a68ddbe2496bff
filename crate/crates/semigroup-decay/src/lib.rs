//! Converts resolvent information for a semigroup generator into explicit,
//! certified time-decay envelopes for the semigroup norm.
//!
//! The core objects are:
//!
//! * [`WeightFunction`] — a positive weight `m(t)` majorizing the semigroup
//!   norm, given in closed form or as a sampled table.
//! * [`ResolventFrame`] — a pair `(omega, r)` recording that the resolvent
//!   norm is bounded by `1/r` on the half-plane `Re z > omega`.
//! * Decay bounds ([`bound_gp`], [`bound_gp_decay`], [`bound_wei`],
//!   [`bound_riccati`], [`bound_appendix`]) that combine a frame and a weight
//!   into pointwise upper bounds on the semigroup norm.
//! * [`DecayEnvelope`] — the pointwise minimum of all applicable bounds,
//!   optimized over their free parameters on a time grid.
//! * [`MatrixOperator`] — a finite-dimensional oracle used to measure frames
//!   and to validate envelopes against exactly computable semigroup norms.
//!
//! The crate also ships a small CLI (`semigroup-decay`) that drives the same
//! machinery from a structured text config and writes deterministic CSV.

pub mod bounds;
pub mod config;
pub mod matrix_oracle;
pub mod ode;
pub mod quad;
pub mod rescale;
pub mod riccati;
pub mod runner;
pub mod variational;
pub mod weights;

pub use bounds::{
    alpha_plus, bound_appendix, bound_gp, bound_gp_decay, bound_riccati, bound_wei,
    build_envelope, build_envelope_windowed, j_max, optimize_ab, BoundKind, DecayEnvelope,
    EnvelopePiece, EnvelopeRow, ResolventFrame,
};
pub use config::RunConfig;
pub use matrix_oracle::{
    calibrate_majorant, is_m_accretive, measure_frame, verify_envelope, MajorantCalibration,
    MatrixOperator, VerifyReport, VerifyRow,
};
pub use rescale::{extend_frame, normalize, FrameMap, FrameProfile};
pub use riccati::{dual_profile, psi0_profile, solve_m_harmonic, CriticalLength, RiccatiProfile};
pub use variational::{
    a_star_by_eigenvalue, a_star_eigen_scan, brute_max_j, brute_min_i, dr_lowest_eigenvalue,
};
pub use weights::WeightFunction;

/// Unified error type for every fallible operation in the crate.
///
/// The three variants map onto the CLI exit codes: configuration problems
/// exit with 1, numerical failures with 2 and bound violations with 3.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// Invalid input: bad arguments, malformed config, unusable weight table.
    #[error("invalid input: {0}")]
    Invalid(String),

    /// A numerical routine failed to reach its target accuracy or left its
    /// domain of validity (quadrature non-convergence, ODE breakdown,
    /// optimizer stall, overflow).
    #[error("numerical failure: {0}")]
    Numerical(String),

    /// A certified inequality was observed to fail (an envelope crossed a
    /// directly computed semigroup norm, or an internal consistency check
    /// between independent routes broke down).
    #[error("bound violation: {0}")]
    Violation(String),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::Invalid(msg.into())
    }

    pub(crate) fn numerical(msg: impl Into<String>) -> Self {
        Error::Numerical(msg.into())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
