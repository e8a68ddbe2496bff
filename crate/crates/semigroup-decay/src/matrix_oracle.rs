//! Finite-dimensional oracles: for a concrete matrix generator the
//! semigroup norm, the spectral abscissa, and the half-plane resolvent
//! bound are all directly computable, which makes matrices the ground
//! truth against which decay envelopes are verified.

use nalgebra::{Complex, DMatrix};
use rayon::prelude::*;

use crate::bounds::DecayEnvelope;
use crate::weights::WeightFunction;
use crate::{Error, Result};

/// Largest supported matrix dimension. The oracles are dense and cubic in
/// the dimension; this cap keeps every operation interactive.
pub const MAX_DIM: usize = 200;

/// Relative slack allowed when comparing a directly computed semigroup norm
/// against an envelope value.
pub const VERIFY_SLACK: f64 = 1e-8;

/// A dense complex matrix `A` viewed as a semigroup generator, with its
/// operator norm and spectral abscissa precomputed.
#[derive(Debug, Clone)]
pub struct MatrixOperator {
    m: DMatrix<Complex<f64>>,
    norm: f64,
    abscissa: f64,
}

impl MatrixOperator {
    pub fn new(m: DMatrix<Complex<f64>>) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(Error::invalid(format!(
                "operator matrix must be square, got {}x{}",
                m.nrows(),
                m.ncols()
            )));
        }
        let d = m.nrows();
        if d == 0 || d > MAX_DIM {
            return Err(Error::invalid(format!(
                "operator dimension must be between 1 and {MAX_DIM}, got {d}"
            )));
        }
        if m.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
            return Err(Error::invalid("operator entries must be finite"));
        }
        let norm = largest_singular_value(&m)?;
        // The eigenvalues sit on the diagonal of the complex Schur form.
        let (_, t) = m.clone().schur().unpack();
        let abscissa = (0..d)
            .map(|i| t[(i, i)].re)
            .fold(f64::NEG_INFINITY, f64::max);
        if !abscissa.is_finite() {
            return Err(Error::numerical(
                "eigenvalue computation produced non-finite spectral abscissa",
            ));
        }
        Ok(MatrixOperator { m, norm, abscissa })
    }

    /// Build from real row data (row-major).
    pub fn from_real_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let d = rows.len();
        if rows.iter().any(|r| r.len() != d) {
            return Err(Error::invalid("row lengths must all equal the row count"));
        }
        let m = DMatrix::from_fn(d, d, |i, j| Complex::new(rows[i][j], 0.0));
        MatrixOperator::new(m)
    }

    /// Build from complex row data (row-major).
    pub fn from_rows(rows: &[Vec<Complex<f64>>]) -> Result<Self> {
        let d = rows.len();
        if rows.iter().any(|r| r.len() != d) {
            return Err(Error::invalid("row lengths must all equal the row count"));
        }
        let m = DMatrix::from_fn(d, d, |i, j| rows[i][j]);
        MatrixOperator::new(m)
    }

    pub fn dim(&self) -> usize {
        self.m.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<Complex<f64>> {
        &self.m
    }

    /// Operator norm (largest singular value), cached at construction.
    pub fn operator_norm(&self) -> f64 {
        self.norm
    }

    /// Largest real part of an eigenvalue, cached at construction.
    pub fn spectral_abscissa(&self) -> f64 {
        self.abscissa
    }

    /// The exact semigroup norm `||e^{tA}||` via the matrix exponential.
    pub fn semigroup_norm(&self, t: f64) -> Result<f64> {
        if !(t.is_finite() && t >= 0.0) {
            return Err(Error::invalid(format!(
                "semigroup time must be nonnegative, got {t}"
            )));
        }
        let e = (self.m.clone() * Complex::new(t, 0.0)).exp();
        largest_singular_value(&e)
    }

    /// The resolvent norm `||(z - A)^{-1}|| = 1 / sigma_min(z I - A)`.
    pub fn resolvent_norm(&self, z: Complex<f64>) -> Result<f64> {
        let d = self.dim();
        let mut shifted = -self.m.clone();
        for i in 0..d {
            shifted[(i, i)] += z;
        }
        let smin = smallest_singular_value(&shifted)?;
        if smin <= 0.0 {
            return Err(Error::numerical(format!(
                "resolvent evaluated at (or numerically on) the spectrum: z = {z}"
            )));
        }
        Ok(1.0 / smin)
    }
}

fn singular_values(m: &DMatrix<Complex<f64>>) -> Result<Vec<f64>> {
    let svd = m.clone().svd(false, false);
    let sv: Vec<f64> = svd.singular_values.iter().copied().collect();
    if sv.iter().any(|s| !s.is_finite()) {
        return Err(Error::numerical("singular value decomposition failed"));
    }
    Ok(sv)
}

fn largest_singular_value(m: &DMatrix<Complex<f64>>) -> Result<f64> {
    Ok(singular_values(m)?
        .into_iter()
        .fold(f64::NEG_INFINITY, f64::max))
}

fn smallest_singular_value(m: &DMatrix<Complex<f64>>) -> Result<f64> {
    Ok(singular_values(m)?
        .into_iter()
        .fold(f64::INFINITY, f64::min))
}

/// Whether `-A` is m-accretive, i.e. the Hermitian part of `A` is negative
/// semidefinite (up to a `1e-12` tolerance). Exactly these generators give
/// contraction semigroups, for which the constant weight `m = 1` is valid.
pub fn is_m_accretive(a: &MatrixOperator) -> bool {
    let h = (a.m.clone() + a.m.adjoint()) * Complex::new(-0.5, 0.0);
    let eig = h.symmetric_eigen();
    eig.eigenvalues.iter().all(|l| *l >= -1e-12)
}

/// Measure the half-plane resolvent bound of `A` right of the abscissa
/// `omega`: returns `r` with `1/r = sup_{y} ||(omega + i y - A)^{-1}||`.
///
/// The supremum over the vertical line is located on a 4001-point grid over
/// `|y| <= Y` with `Y = 2 (||A|| + |omega|) + 10`, then each of the five
/// largest interior local maxima is refined by golden-section search to a
/// `1e-10` bracket. Outside the grid the resolvent norm is at most
/// `1/(|y| - ||A|| - |omega|)`, which is checked against the located
/// supremum so the truncation can never silently win.
pub fn measure_frame(a: &MatrixOperator, omega: f64) -> Result<f64> {
    if !omega.is_finite() {
        return Err(Error::invalid("frame abscissa must be finite"));
    }
    if omega <= a.spectral_abscissa() {
        return Err(Error::invalid(format!(
            "frame abscissa {omega} must lie strictly right of the spectral abscissa {}",
            a.spectral_abscissa()
        )));
    }
    let y_max = 2.0 * (a.operator_norm() + omega.abs()) + 10.0;
    let n = 4001usize;
    let ys: Vec<f64> = (0..n)
        .map(|i| -y_max + 2.0 * y_max * i as f64 / (n - 1) as f64)
        .collect();
    let f = |y: f64| a.resolvent_norm(Complex::new(omega, y));
    let vals: Vec<f64> = ys
        .par_iter()
        .map(|&y| f(y))
        .collect::<Result<Vec<f64>>>()?;

    let mut sup = vals.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    // Collect interior local maxima, largest first.
    let mut peaks: Vec<usize> = (1..n - 1)
        .filter(|&i| vals[i] >= vals[i - 1] && vals[i] >= vals[i + 1])
        .collect();
    peaks.sort_by(|&i, &j| vals[j].partial_cmp(&vals[i]).unwrap());
    for &i in peaks.iter().take(5) {
        let (_, v) = golden_max(&f, ys[i - 1], ys[i + 1], 1e-10)?;
        sup = sup.max(v);
    }

    let tail_bound = 1.0 / (y_max - a.operator_norm() - omega.abs());
    if sup < tail_bound {
        return Err(Error::numerical(
            "resolvent supremum search was dominated by the truncation tail",
        ));
    }
    if !(sup.is_finite() && sup > 0.0) {
        return Err(Error::numerical(
            "resolvent supremum is not positive and finite",
        ));
    }
    Ok(1.0 / sup)
}

/// Golden-section maximization of `f` on `[lo, hi]` down to bracket width
/// `tol`. Returns the midpoint of the final bracket and the best value seen.
fn golden_max(
    f: &impl Fn(f64) -> Result<f64>,
    mut lo: f64,
    mut hi: f64,
    tol: f64,
) -> Result<(f64, f64)> {
    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    let mut x1 = hi - INV_PHI * (hi - lo);
    let mut x2 = lo + INV_PHI * (hi - lo);
    let mut f1 = f(x1)?;
    let mut f2 = f(x2)?;
    let mut best = f1.max(f2);
    while hi - lo > tol {
        if f1 < f2 {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + INV_PHI * (hi - lo);
            f2 = f(x2)?;
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - INV_PHI * (hi - lo);
            f1 = f(x1)?;
        }
        best = best.max(f1.max(f2));
    }
    Ok((0.5 * (lo + hi), best))
}

/// One verification sample: the directly computed semigroup norm against
/// the envelope value at the same time.
#[derive(Debug, Clone)]
pub struct VerifyRow {
    pub t: f64,
    pub true_norm: f64,
    pub envelope: f64,
    /// `true_norm / envelope`; at most `1 + 1e-8` when the bound holds.
    pub ratio: f64,
}

/// Result of checking an envelope against a matrix oracle on the
/// envelope's own grid.
#[derive(Debug, Clone)]
pub struct VerifyReport {
    pub rows: Vec<VerifyRow>,
    /// Smallest `true_norm / envelope` over the grid — how far the envelope
    /// is from sharp at its loosest point — and the time where it occurs.
    pub min_ratio: f64,
    pub min_ratio_t: f64,
    /// Largest ratio and its location; the bound is violated exactly when
    /// this exceeds `1 + 1e-8`.
    pub max_ratio: f64,
    pub max_ratio_t: f64,
    /// True when `true_norm <= envelope * (1 + 1e-8)` at every grid time.
    pub ok: bool,
}

/// Compare an envelope against the exact semigroup norms of `a` at every
/// grid node. Always returns the full report; deciding what to do about a
/// violation is the caller's concern.
pub fn verify_envelope(a: &MatrixOperator, env: &DecayEnvelope) -> Result<VerifyReport> {
    let rows: Vec<VerifyRow> = env
        .rows()
        .par_iter()
        .map(|row| {
            let true_norm = a.semigroup_norm(row.t)?;
            Ok(VerifyRow {
                t: row.t,
                true_norm,
                envelope: row.value,
                ratio: true_norm / row.value,
            })
        })
        .collect::<Result<Vec<VerifyRow>>>()?;
    let mut min_ratio = f64::INFINITY;
    let mut min_ratio_t = f64::NAN;
    let mut max_ratio = f64::NEG_INFINITY;
    let mut max_ratio_t = f64::NAN;
    let mut ok = true;
    for r in &rows {
        if r.ratio < min_ratio {
            min_ratio = r.ratio;
            min_ratio_t = r.t;
        }
        if r.ratio > max_ratio {
            max_ratio = r.ratio;
            max_ratio_t = r.t;
        }
        ok &= r.true_norm <= r.envelope * (1.0 + VERIFY_SLACK);
    }
    Ok(VerifyReport {
        rows,
        min_ratio,
        min_ratio_t,
        max_ratio,
        max_ratio_t,
        ok,
    })
}

/// A weight calibrated to majorize the semigroup norm of one matrix.
#[derive(Debug, Clone)]
pub struct MajorantCalibration {
    pub weight: WeightFunction,
    /// Growth abscissa of the weight: `weight(t) = amplitude * e^{omega0 t}`.
    pub omega0: f64,
    pub amplitude: f64,
}

/// Produce a norm majorant for `e^{tA}`.
///
/// For an accretive case the semigroup is a contraction and the constant
/// weight `1` is exact. Otherwise the weight `M e^{omega0 t}` is used with
/// `omega0` the spectral abscissa plus `abscissa_margin`: `M` is the sampled
/// supremum of `||e^{tA}|| e^{-omega0 t}` (2049 points out to the later of
/// `horizon` and `30/abscissa_margin`, where the ratio has provably decayed)
/// inflated by 1%. The sampling makes this a calibration heuristic, not a
/// certificate — downstream envelope verification still checks the result
/// independently.
pub fn calibrate_majorant(
    a: &MatrixOperator,
    abscissa_margin: f64,
    horizon: f64,
) -> Result<MajorantCalibration> {
    if !(abscissa_margin.is_finite() && abscissa_margin > 0.0) {
        return Err(Error::invalid(format!(
            "abscissa margin must be positive, got {abscissa_margin}"
        )));
    }
    if !(horizon.is_finite() && horizon > 0.0) {
        return Err(Error::invalid(format!(
            "horizon must be positive, got {horizon}"
        )));
    }
    if is_m_accretive(a) {
        return Ok(MajorantCalibration {
            weight: WeightFunction::constant(1.0)?,
            omega0: 0.0,
            amplitude: 1.0,
        });
    }
    let omega0 = a.spectral_abscissa() + abscissa_margin;
    let t_end = horizon.max(30.0 / abscissa_margin);
    let n = 2049usize;
    let sup = (0..n)
        .into_par_iter()
        .map(|i| {
            let t = t_end * i as f64 / (n - 1) as f64;
            Ok(a.semigroup_norm(t)? * (-omega0 * t).exp())
        })
        .collect::<Result<Vec<f64>>>()?
        .into_iter()
        .fold(1.0_f64, f64::max);
    let amplitude = 1.01 * sup;
    let weight = WeightFunction::modulated(WeightFunction::constant(amplitude)?, omega0, 1.0)?;
    Ok(MajorantCalibration {
        weight,
        omega0,
        amplitude,
    })
}
