//! Embedded Runge–Kutta 5(4) integration with dense output, specialized to
//! the two-dimensional first-order systems this crate integrates (linear
//! second-order scalar equations rewritten as systems).
//!
//! The solver takes adaptive steps controlled by a mixed absolute/relative
//! error norm and fills a uniform sample grid through the step interpolant,
//! so downstream code can evaluate the solution anywhere by local cubic
//! Hermite interpolation of the stored values and slopes.

use crate::{Error, Result};

/// Absolute tolerance for the step error estimate.
pub const ATOL: f64 = 1e-12;
/// Relative tolerance for the step error estimate.
pub const RTOL: f64 = 1e-10;

// Dormand–Prince 5(4) tableau.
const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A2: [f64; 1] = [1.0 / 5.0];
const A3: [f64; 2] = [3.0 / 40.0, 9.0 / 40.0];
const A4: [f64; 3] = [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0];
const A5: [f64; 4] = [
    19372.0 / 6561.0,
    -25360.0 / 2187.0,
    64448.0 / 6561.0,
    -212.0 / 729.0,
];
const A6: [f64; 5] = [
    9017.0 / 3168.0,
    -355.0 / 33.0,
    46732.0 / 5247.0,
    49.0 / 176.0,
    -5103.0 / 18656.0,
];
// Fifth-order weights; the last stage reuses them, giving the FSAL property.
const B: [f64; 7] = [
    35.0 / 384.0,
    0.0,
    500.0 / 1113.0,
    125.0 / 192.0,
    -2187.0 / 6784.0,
    11.0 / 84.0,
    0.0,
];
// Difference between the fifth- and fourth-order weights (error estimator).
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];
// Extra weights for the fourth-order dense-output polynomial.
const D: [f64; 7] = [
    -12715105075.0 / 11282082432.0,
    0.0,
    87487479700.0 / 32700410799.0,
    -10690763975.0 / 1880347072.0,
    701980252875.0 / 199316789632.0,
    -1453857185.0 / 822651844.0,
    69997945.0 / 29380423.0,
];

type State = [f64; 2];

fn axpy(y: &State, h: f64, coeffs: &[f64], k: &[State]) -> State {
    let mut out = *y;
    for (c, ki) in coeffs.iter().zip(k.iter()) {
        out[0] += h * c * ki[0];
        out[1] += h * c * ki[1];
    }
    out
}

/// Solution samples on a uniform grid over `[0, s_end]`.
///
/// `y[i]` and `dy[i]` hold the state and its derivative at `grid[i]`; the
/// derivative comes from the right-hand side itself, so cubic Hermite
/// interpolation between samples is consistent with the equation.
#[derive(Debug, Clone)]
pub struct DenseOdeSolution {
    grid: Vec<f64>,
    y: Vec<State>,
    dy: Vec<State>,
}

impl DenseOdeSolution {
    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    pub fn s_end(&self) -> f64 {
        *self.grid.last().unwrap()
    }

    pub fn values(&self) -> &[State] {
        &self.y
    }

    /// Evaluate the state at `s` by per-component cubic Hermite
    /// interpolation on the sample cell containing `s`.
    pub fn eval(&self, s: f64) -> Result<State> {
        let end = self.s_end();
        if !(s.is_finite() && (0.0..=end).contains(&s)) {
            return Err(Error::invalid(format!(
                "evaluation point {s} outside solution range [0, {end}]"
            )));
        }
        let n = self.grid.len();
        let h = end / (n as f64 - 1.0);
        let i = ((s / h) as usize).min(n - 2);
        let t = (s - self.grid[i]) / h;
        let t2 = t * t;
        let t3 = t2 * t;
        let h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
        let h10 = t3 - 2.0 * t2 + t;
        let h01 = -2.0 * t3 + 3.0 * t2;
        let h11 = t3 - t2;
        let mut out = [0.0; 2];
        for (c, slot) in out.iter_mut().enumerate() {
            *slot = h00 * self.y[i][c]
                + h10 * h * self.dy[i][c]
                + h01 * self.y[i + 1][c]
                + h11 * h * self.dy[i + 1][c];
        }
        Ok(out)
    }
}

/// Integrate `y' = f(s, y)` from `(0, y0)` to `s_end`, sampling the solution
/// on a uniform grid of spacing at most `out_step`.
pub fn integrate_dense<F>(f: F, s_end: f64, y0: State, out_step: f64) -> Result<DenseOdeSolution>
where
    F: Fn(f64, State) -> Result<State>,
{
    if !(s_end.is_finite() && s_end > 0.0) {
        return Err(Error::invalid(format!(
            "integration endpoint must be positive, got {s_end}"
        )));
    }
    if !(out_step.is_finite() && out_step > 0.0) {
        return Err(Error::invalid("output step must be positive"));
    }
    let n_out = (s_end / out_step).ceil().max(1.0) as usize;
    let h_out = s_end / n_out as f64;

    let mut grid = Vec::with_capacity(n_out + 1);
    let mut ys = Vec::with_capacity(n_out + 1);
    let mut dys = Vec::with_capacity(n_out + 1);
    let d0 = f(0.0, y0)?;
    grid.push(0.0);
    ys.push(y0);
    dys.push(d0);
    let mut next_out = 1usize;

    let mut s = 0.0;
    let mut y = y0;
    let mut k1 = d0;
    let mut h: f64 = (s_end * 1e-4).min(1e-3);
    let mut steps = 0u64;
    const MAX_STEPS: u64 = 2_000_000;

    while s < s_end {
        steps += 1;
        if steps > MAX_STEPS {
            return Err(Error::numerical(format!(
                "step limit exceeded near s = {s}"
            )));
        }
        if h < 1e-14 * s_end.max(1.0) {
            return Err(Error::numerical(format!(
                "step size underflow near s = {s}"
            )));
        }
        let last = s + h >= s_end;
        if last {
            h = s_end - s;
        }

        let k2 = f(s + C[1] * h, axpy(&y, h, &A2, &[k1]))?;
        let k3 = f(s + C[2] * h, axpy(&y, h, &A3, &[k1, k2]))?;
        let k4 = f(s + C[3] * h, axpy(&y, h, &A4, &[k1, k2, k3]))?;
        let k5 = f(s + C[4] * h, axpy(&y, h, &A5, &[k1, k2, k3, k4]))?;
        let k6 = f(s + C[5] * h, axpy(&y, h, &A6, &[k1, k2, k3, k4, k5]))?;
        let k = [k1, k2, k3, k4, k5, k6];
        let y_new = axpy(&y, h, &B, &k);
        let k7 = f(s + h, y_new)?;
        let all_k = [k1, k2, k3, k4, k5, k6, k7];

        // RMS of the componentwise error against the mixed tolerance scale.
        // The absolute part is measured relative to the current solution
        // magnitude: the systems integrated here are linear, so their scale
        // is arbitrary and may traverse many orders of magnitude — a fixed
        // absolute floor would let noise swamp exponentially small
        // solutions.
        let y_scale = y[0]
            .abs()
            .max(y[1].abs())
            .max(y_new[0].abs())
            .max(y_new[1].abs())
            .max(1e-30);
        let mut err_sq = 0.0;
        for c in 0..2 {
            let mut e = 0.0;
            for (ei, ki) in E.iter().zip(all_k.iter()) {
                e += ei * ki[c];
            }
            e *= h;
            let sk = ATOL * y_scale + RTOL * y[c].abs().max(y_new[c].abs());
            err_sq += (e / sk) * (e / sk);
        }
        let err = (err_sq / 2.0).sqrt();

        if err <= 1.0 {
            // Dense-output polynomial for this step (Hairer's contiguous form).
            let mut rcont = [[0.0_f64; 2]; 5];
            for c in 0..2 {
                let ydiff = y_new[c] - y[c];
                let bspl = h * k1[c] - ydiff;
                let mut dsum = 0.0;
                for (di, ki) in D.iter().zip(all_k.iter()) {
                    dsum += di * ki[c];
                }
                rcont[0][c] = y[c];
                rcont[1][c] = ydiff;
                rcont[2][c] = bspl;
                rcont[3][c] = ydiff - h * k7[c] - bspl;
                rcont[4][c] = h * dsum;
            }
            let s_new = s + h;
            while next_out <= n_out {
                let g = if next_out == n_out {
                    s_end
                } else {
                    h_out * next_out as f64
                };
                if g > s_new && !last {
                    break;
                }
                if g > s_new + 1e-12 * s_end.max(1.0) {
                    break;
                }
                let theta = ((g - s) / h).clamp(0.0, 1.0);
                let th1 = 1.0 - theta;
                let mut yg = [0.0; 2];
                for c in 0..2 {
                    yg[c] = rcont[0][c]
                        + theta
                            * (rcont[1][c]
                                + th1 * (rcont[2][c] + theta * (rcont[3][c] + th1 * rcont[4][c])));
                }
                grid.push(g);
                ys.push(yg);
                dys.push(f(g, yg)?);
                next_out += 1;
            }
            s = s_new;
            y = y_new;
            k1 = k7; // first-same-as-last
            let factor = (0.9 * err.powf(-0.2)).clamp(0.2, 5.0);
            h *= factor;
            if last {
                break;
            }
        } else {
            let factor = (0.9 * err.powf(-0.2)).clamp(0.2, 1.0);
            h *= factor;
        }
    }

    debug_assert_eq!(grid.len(), n_out + 1);
    Ok(DenseOdeSolution {
        grid,
        y: ys,
        dy: dys,
    })
}
