//! Independent numerical oracles for the profile module: a Sturm–Liouville
//! eigensolver for the Dirichlet–Robin operator behind the critical length,
//! and direct discrete optimization of the two variational problems whose
//! optima the profile quantities `I_inf` and `J_sup` represent.
//!
//! Nothing here reuses the profile formulas: the eigensolver discretizes the
//! operator `-(1/m^2) d/ds (m^2 d/ds) - 1` with `u(0) = 0`, `u'(a) = u(a)`,
//! and the brute-force routines minimize/maximize the discrete functionals
//! over piecewise-linear fields. Agreement with the ODE-based route is what
//! the test suite certifies.

use crate::riccati;
use crate::weights::WeightFunction;
use crate::{Error, Result};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Symmetrized tridiagonal discretization of the Dirichlet–Robin operator
/// on `[0, a]` with `n` cells.
///
/// Built from the quadratic form `int m^2 u'^2 - m(a)^2 u(a)^2 - int m^2 u^2`
/// with trapezoidal node masses (half mass at the Robin end), then scaled
/// symmetric by the inverse square root of the mass matrix. The boundary row
/// enforces `u'(a) = u(a)` through the form's boundary term — a half-cell
/// Robin row, second-order accurate like the rest of the stencil.
#[derive(Debug)]
pub struct DiscretizedOperator {
    /// Diagonal of the symmetric tridiagonal matrix.
    diag: Vec<f64>,
    /// Off-diagonal (length one less than `diag`).
    off: Vec<f64>,
}

impl DiscretizedOperator {
    pub fn assemble(w: &WeightFunction, a: f64, n: usize) -> Result<Self> {
        if n < 16 {
            return Err(Error::invalid(format!("mesh must have n >= 16, got {n}")));
        }
        if !(a.is_finite() && a > 0.0) {
            return Err(Error::invalid(format!(
                "interval end must be positive, got {a}"
            )));
        }
        if a > w.validity() {
            return Err(Error::invalid(format!(
                "interval end {a} exceeds weight validity {}",
                w.validity()
            )));
        }
        let h = a / n as f64;
        // c = m^2 at half nodes (cell centers) and full nodes.
        let mut c_half = Vec::with_capacity(n);
        for i in 0..n {
            let (m, _) = w.eval((i as f64 + 0.5) * h)?;
            c_half.push(m * m);
        }
        let mut c_node = Vec::with_capacity(n + 1);
        for i in 0..=n {
            let (m, _) = w.eval(i as f64 * h)?;
            c_node.push(m * m);
        }
        // Unknowns u_1..u_n (u_0 = 0 eliminated by the Dirichlet condition).
        // Stiffness-minus-mass form and trapezoidal mass matrix.
        let mut diag = Vec::with_capacity(n);
        let mut off = Vec::with_capacity(n - 1);
        let mut mass = Vec::with_capacity(n);
        for i in 1..n {
            diag.push((c_half[i - 1] + c_half[i]) / h - h * c_node[i]);
            mass.push(h * c_node[i]);
        }
        // Robin row: left flux, boundary term, half trapezoid mass.
        diag.push(c_half[n - 1] / h - c_node[n] - 0.5 * h * c_node[n]);
        mass.push(0.5 * h * c_node[n]);
        for ch in &c_half[1..n] {
            off.push(-ch / h);
        }
        // Reduce the generalized problem A u = lambda B u to standard
        // symmetric form with the diagonal scaling B^{-1/2} A B^{-1/2}.
        for i in 0..n {
            diag[i] /= mass[i];
        }
        for i in 0..n - 1 {
            off[i] /= (mass[i] * mass[i + 1]).sqrt();
        }
        Ok(DiscretizedOperator { diag, off })
    }

    /// Smallest eigenvalue by Sturm-sequence bisection inside the
    /// Gershgorin enclosure.
    pub fn lowest_eigenvalue(&self) -> f64 {
        let n = self.diag.len();
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for i in 0..n {
            let radius = (if i > 0 { self.off[i - 1].abs() } else { 0.0 })
                + (if i < n - 1 { self.off[i].abs() } else { 0.0 });
            lo = lo.min(self.diag[i] - radius);
            hi = hi.max(self.diag[i] + radius);
        }
        // The bracket starts at the Gershgorin enclosure, whose width is the
        // matrix norm (~1/h^2), but the tolerance must follow the eigenvalue
        // itself — otherwise a near-zero eigenvalue inherits the huge scale.
        let mut guard = 0;
        while hi - lo > 1e-12 * lo.abs().max(hi.abs()).max(1.0) && guard < 200 {
            let mid = 0.5 * (lo + hi);
            if self.count_below(mid) >= 1 {
                hi = mid;
            } else {
                lo = mid;
            }
            guard += 1;
        }
        0.5 * (lo + hi)
    }

    /// Number of eigenvalues strictly below `x` (Sturm sequence via the
    /// LDL^T pivots of `T - x I`).
    fn count_below(&self, x: f64) -> usize {
        let mut count = 0;
        let mut q = self.diag[0] - x;
        if q < 0.0 {
            count += 1;
        }
        for i in 1..self.diag.len() {
            let e = self.off[i - 1];
            if q == 0.0 {
                // Pivot breakdown: nudge by a tiny relative amount.
                q = 1e-300;
            }
            q = self.diag[i] - x - e * e / q;
            if q < 0.0 {
                count += 1;
            }
        }
        count
    }
}

/// Smallest eigenvalue of the Dirichlet–Robin operator on `[0, a]`
/// discretized with `n` cells. Second-order accurate in `1/n`.
pub fn dr_lowest_eigenvalue(w: &WeightFunction, a: f64, n: usize) -> Result<f64> {
    Ok(DiscretizedOperator::assemble(w, a, n)?.lowest_eigenvalue())
}

/// Critical length located as the root of `a -> lowest eigenvalue(a)`,
/// bisected inside `window = (lo, hi)`; requires a sign change
/// (`lambda(lo) > 0 > lambda(hi)`) across the window.
pub fn a_star_by_eigenvalue(w: &WeightFunction, n: usize, window: (f64, f64)) -> Result<f64> {
    let (mut lo, mut hi) = window;
    if !(lo.is_finite() && hi.is_finite() && 0.0 < lo && lo < hi) {
        return Err(Error::invalid(format!(
            "window must satisfy 0 < lo < hi, got ({lo}, {hi})"
        )));
    }
    let f_lo = dr_lowest_eigenvalue(w, lo, n)?;
    let f_hi = dr_lowest_eigenvalue(w, hi, n)?;
    if !(f_lo > 0.0 && f_hi < 0.0) {
        return Err(Error::invalid(format!(
            "no sign change in window ({lo}, {hi}): lambda = {f_lo:.3e}, {f_hi:.3e}"
        )));
    }
    while hi - lo > 1e-6 {
        let mid = 0.5 * (lo + hi);
        if dr_lowest_eigenvalue(w, mid, n)? > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Scan `a` in `(0, s_hi]` for the first sign change of the lowest
/// eigenvalue and refine it; `Ok(None)` when the eigenvalue stays positive
/// on the whole scanned range.
pub fn a_star_eigen_scan(w: &WeightFunction, n: usize, s_hi: f64) -> Result<Option<f64>> {
    if !(s_hi.is_finite() && s_hi > 0.0) {
        return Err(Error::invalid("scan limit must be positive"));
    }
    let points = 60;
    let mut prev_a = s_hi / points as f64 * 0.25;
    let mut prev = dr_lowest_eigenvalue(w, prev_a, n)?;
    for k in 1..=points {
        let a = s_hi * k as f64 / points as f64;
        let lam = dr_lowest_eigenvalue(w, a, n)?;
        if prev > 0.0 && lam <= 0.0 {
            return Ok(Some(a_star_by_eigenvalue(w, n, (prev_a, a))?));
        }
        prev_a = a;
        prev = lam;
    }
    Ok(None)
}

/// Smoothed positive part `(x)_+ ~ (x + sqrt(x^2 + eps^2))/2` and its
/// derivative.
fn pos_smooth(x: f64, eps: f64) -> (f64, f64) {
    let root = (x * x + eps * eps).sqrt();
    (0.5 * (x + root), 0.5 * (1.0 + x / root))
}

/// Shared Armijo backtracking step: returns the accepted next point and
/// value, or `None` when no improving step exists down to the cutoff.
fn armijo_step(
    x: &[f64],
    value: f64,
    grad: &[f64],
    direction: &[f64],
    eval: &mut dyn FnMut(&[f64]) -> f64,
    project: &dyn Fn(&mut [f64]),
) -> Option<(Vec<f64>, f64)> {
    let slope: f64 = grad.iter().zip(direction).map(|(g, d)| g * d).sum();
    if slope >= 0.0 {
        return None;
    }
    let mut step = 1.0;
    for _ in 0..45 {
        let mut cand: Vec<f64> = x
            .iter()
            .zip(direction)
            .map(|(xi, di)| xi + step * di)
            .collect();
        project(&mut cand);
        let v = eval(&cand);
        if v <= value + 1e-4 * step * slope {
            return Some((cand, v));
        }
        step *= 0.5;
    }
    None
}

const MAX_ITERS_PER_STAGE: usize = 4000;

/// Discrete minimization oracle for the Dirichlet-side energy:
/// minimizes `sum ((du_i/h)^2 - ubar_i^2)_+ mbar_i^2 h` over piecewise
/// linear `u` with `u(0) = 0`, `u(a) = 1`, by smoothed diagonally
/// preconditioned descent with positive-part continuation and multi-start.
/// The result is an upper bound on the continuum infimum, converging to it
/// as `n` grows.
pub fn brute_min_i(w: &WeightFunction, a: f64, n: usize, seed: u64) -> Result<f64> {
    if n < 64 {
        return Err(Error::invalid(format!("mesh must have n >= 64, got {n}")));
    }
    if !(a.is_finite() && a > 0.0 && a <= w.validity()) {
        return Err(Error::invalid(format!("invalid interval end {a}")));
    }
    let h = a / n as f64;
    let mut mbar_sq = Vec::with_capacity(n);
    let mut inv_msq = Vec::with_capacity(n);
    for i in 0..n {
        let (m, _) = w.eval((i as f64 + 0.5) * h)?;
        mbar_sq.push(m * m);
        inv_msq.push(1.0 / (m * m));
    }

    // Diagonal preconditioner from the gradient-squared part of the
    // Hessian. Raw-gradient descent stalls when the weight varies over
    // orders of magnitude across the interval; dividing by the local
    // stiffness makes the step sizes uniform in the field.
    let precond: Vec<f64> = (0..n.saturating_sub(1))
        .map(|j| 2.0 * (mbar_sq[j] + mbar_sq[j + 1]) / h)
        .collect();

    // Full field including the pinned endpoints; unknowns are 1..n-1.
    let energy_and_grad = |u: &[f64], eps: f64, grad: Option<&mut [f64]>| -> f64 {
        let mut total = 0.0;
        let mut g = grad;
        if let Some(gr) = g.as_deref_mut() {
            gr.iter_mut().for_each(|v| *v = 0.0);
        }
        for i in 0..n {
            let du = (u[i + 1] - u[i]) / h;
            let ubar = 0.5 * (u[i] + u[i + 1]);
            let x = du * du - ubar * ubar;
            let (p, dp) = pos_smooth(x, eps);
            total += p * mbar_sq[i] * h;
            if let Some(gr) = g.as_deref_mut() {
                let scale = dp * mbar_sq[i] * h;
                let d_du = 2.0 * du / h;
                let d_ubar = -ubar;
                // interior unknowns only (indices 1..n-1 in the full field)
                if i >= 1 {
                    gr[i - 1] += scale * (-d_du + d_ubar);
                }
                if i < n - 1 {
                    gr[i] += scale * (d_du + d_ubar);
                }
            }
        }
        total
    };

    // Starting profiles (full fields with u[0]=0, u[n]=1).
    let mut starts: Vec<Vec<f64>> = Vec::new();
    // 1. Linear ramp.
    starts.push((0..=n).map(|i| i as f64 / n as f64).collect());
    // 2. Equality profile of the crude lower bound: u proportional to the
    //    cumulative integral of 1/m^2.
    let mut cumulative = vec![0.0; n + 1];
    for i in 0..n {
        cumulative[i + 1] = cumulative[i] + inv_msq[i] * h;
    }
    let total_cum = cumulative[n];
    starts.push(cumulative.iter().map(|&c| c / total_cum).collect());
    // 3. The normalized harmonic solution for this weight, when available.
    if let Ok(sol) = riccati::solve_m_harmonic(w, a) {
        if let Ok([ua, _]) = sol.eval(a) {
            if ua > 0.0 {
                let mut field = Vec::with_capacity(n + 1);
                let mut ok = true;
                for i in 0..=n {
                    // i*h can land one ulp past the endpoint; clamp inside.
                    match sol.eval((i as f64 * h).min(a)) {
                        Ok([u, _]) => field.push(u / ua),
                        Err(_) => {
                            ok = false;
                            break;
                        }
                    }
                }
                if ok {
                    starts.push(field);
                }
            }
        }
    }
    // Seeded perturbations of the first start, for basin coverage.
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..2 {
        let mut field: Vec<f64> = starts[0].clone();
        for item in field.iter_mut().take(n).skip(1) {
            *item += 0.05 * rng.random_range(-1.0..1.0);
        }
        starts.push(field);
    }

    let mut best: Option<(f64, f64)> = None; // (value, final preconditioned grad norm)
    for start in starts {
        let mut field = start;
        let mut grad = vec![0.0; n.saturating_sub(1)];
        let mut value = 0.0;
        let mut gnorm = f64::INFINITY;
        for eps in [1e-2, 1e-3, 1e-4, 1e-5, 1e-6] {
            value = energy_and_grad(&field, eps, Some(&mut grad));
            for _ in 0..MAX_ITERS_PER_STAGE {
                let direction: Vec<f64> =
                    grad.iter().zip(&precond).map(|(g, p)| -g / p).collect();
                let interior: Vec<f64> = field[1..n].to_vec();
                let mut eval = |x: &[f64]| {
                    let mut full = field.clone();
                    full[1..n].copy_from_slice(x);
                    energy_and_grad(&full, eps, None)
                };
                match armijo_step(&interior, value, &grad, &direction, &mut eval, &|_| {}) {
                    Some((next, v)) => {
                        field[1..n].copy_from_slice(&next);
                        let improvement = value - v;
                        value = energy_and_grad(&field, eps, Some(&mut grad));
                        if improvement <= 1e-14 * (1.0 + value.abs()) {
                            break;
                        }
                    }
                    None => break,
                }
            }
            // Stationarity in field units: the length of the Newton-like
            // step the descent would still take.
            gnorm = grad
                .iter()
                .zip(&precond)
                .fold(0.0_f64, |m, (g, p)| m.max((g / p).abs()));
        }
        if best.is_none() || value < best.unwrap().0 {
            best = Some((value, gnorm));
        }
    }
    let (value, gnorm) = best.unwrap();
    if !value.is_finite() || gnorm > 1e-5 {
        return Err(Error::numerical(format!(
            "energy minimization did not converge: best value {value:.12e}, \
             preconditioned gradient norm {gnorm:.3e}"
        )));
    }
    Ok(value)
}

/// Discrete maximization oracle for the dual-side energy: writes
/// `theta = e^eta` with `eta(b) = 0`, parameterizes the slopes
/// `d_i = (eta_{i+1}-eta_i)/h` inside the box `|d_i| <= 1`, and maximizes
/// `sum e^{2 etabar_i} (1 - d_i^2) mbar_i^{-2} h` by projected gradient
/// ascent. The result is a lower bound on the continuum supremum.
pub fn brute_max_j(w: &WeightFunction, b: f64, n: usize, seed: u64) -> Result<f64> {
    if n < 64 {
        return Err(Error::invalid(format!("mesh must have n >= 64, got {n}")));
    }
    if !(b.is_finite() && b > 0.0 && b <= w.validity()) {
        return Err(Error::invalid(format!("invalid interval end {b}")));
    }
    let h = b / n as f64;
    let mut inv_msq = Vec::with_capacity(n);
    for i in 0..n {
        let (m, _) = w.eval((i as f64 + 0.5) * h)?;
        inv_msq.push(1.0 / (m * m));
    }

    // eta_i = -h * sum_{j >= i} d_j (so eta_n = 0); etabar_i over cell i.
    let objective = |d: &[f64], grad: Option<&mut [f64]>| -> f64 {
        let mut eta = vec![0.0; n + 1];
        for i in (0..n).rev() {
            eta[i] = eta[i + 1] - h * d[i];
        }
        let mut total = 0.0;
        let mut cell_t = vec![0.0; n];
        for i in 0..n {
            let etabar = 0.5 * (eta[i] + eta[i + 1]);
            let weight = (2.0 * etabar).exp() * inv_msq[i] * h;
            total += weight * (1.0 - d[i] * d[i]);
            cell_t[i] = 2.0 * weight * (1.0 - d[i] * d[i]);
        }
        if let Some(gr) = grad {
            // d eta_i / d d_k = -h for k >= i, so d etabar_i / d d_k is
            // -h for k > i, -h/2 for k == i, 0 otherwise. Prefix sums give
            // the chain-rule part in O(n).
            let mut prefix = 0.0;
            for k in 0..n {
                let etabar = 0.5 * (eta[k] + eta[k + 1]);
                let weight = (2.0 * etabar).exp() * inv_msq[k] * h;
                gr[k] = -h * (prefix + 0.5 * cell_t[k]) - 2.0 * d[k] * weight;
                prefix += cell_t[k];
            }
        }
        total
    };

    let project = |d: &mut [f64]| {
        for v in d.iter_mut() {
            *v = v.clamp(-1.0, 1.0);
        }
    };

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut starts: Vec<Vec<f64>> = vec![vec![0.0; n]];
    for _ in 0..2 {
        starts.push((0..n).map(|_| rng.random_range(-0.5..0.5)).collect());
    }

    // The flat start evaluates the trivial candidate theta = 1, so the
    // returned maximum can never fall below that baseline.
    let mut best: Option<(f64, f64)> = None;
    for start in starts {
        let mut d = start;
        project(&mut d);
        let mut grad = vec![0.0; n];
        let mut value = objective(&d, Some(&mut grad));
        for _ in 0..MAX_ITERS_PER_STAGE {
            // Ascent = descent on the negated objective.
            let direction: Vec<f64> = grad.to_vec();
            let neg_grad: Vec<f64> = grad.iter().map(|g| -g).collect();
            let mut eval = |x: &[f64]| -objective(x, None);
            match armijo_step(&d, -value, &neg_grad, &direction, &mut eval, &project) {
                Some((next, neg_v)) => {
                    d = next;
                    let v = -neg_v;
                    let improvement = v - value;
                    value = objective(&d, Some(&mut grad));
                    if improvement <= 1e-14 * (1.0 + value.abs()) {
                        break;
                    }
                }
                None => break,
            }
        }
        // Projected gradient: ignore components pushing into the active box
        // faces, which legitimately stay nonzero at the optimum.
        let mut gnorm = 0.0_f64;
        for i in 0..n {
            let blocked_hi = d[i] >= 1.0 && grad[i] > 0.0;
            let blocked_lo = d[i] <= -1.0 && grad[i] < 0.0;
            if !(blocked_hi || blocked_lo) {
                gnorm = gnorm.max(grad[i].abs());
            }
        }
        if best.is_none() || value > best.unwrap().0 {
            best = Some((value, gnorm));
        }
    }
    let (value, gnorm) = best.unwrap();
    if !value.is_finite() || gnorm > 1e-3 * (1.0 + value.abs()) {
        return Err(Error::numerical(format!(
            "energy maximization did not converge: best value {value:.12e}, \
             gradient norm {gnorm:.3e}"
        )));
    }
    Ok(value)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::{FRAC_PI_4, FRAC_PI_6, PI};

    fn unit() -> WeightFunction {
        WeightFunction::constant(1.0).unwrap()
    }

    #[test]
    fn eigenvalue_vanishes_at_critical_length() {
        let lam = dr_lowest_eigenvalue(&unit(), FRAC_PI_4, 4096).unwrap();
        assert_abs_diff_eq!(lam, 0.0, epsilon = 1e-5);
    }

    #[test]
    fn eigenvalue_matches_transcendental_oracle() {
        // For m = 1 on [0, a], eigenfunctions are sin(ks) with tan(ka) = k;
        // the smallest eigenvalue is k^2 - 1. At a = pi/8 the root is
        // k = 3.2370066120597434 (solved independently).
        let k = 3.237_006_612_059_743_4_f64;
        let lam = dr_lowest_eigenvalue(&unit(), PI / 8.0, 4096).unwrap();
        assert_abs_diff_eq!(lam, k * k - 1.0, epsilon = 2e-3);
    }

    #[test]
    fn eigenvalue_sign_flips_past_critical_length() {
        assert!(dr_lowest_eigenvalue(&unit(), 0.9, 1024).unwrap() < 0.0);
        assert!(dr_lowest_eigenvalue(&unit(), 0.5, 1024).unwrap() > 0.0);
    }

    #[test]
    fn eigenvalue_is_strictly_decreasing_in_interval_length() {
        let mut prev = f64::INFINITY;
        for k in 0..10 {
            let a = 0.3 + 0.1 * k as f64;
            let lam = dr_lowest_eigenvalue(&unit(), a, 512).unwrap();
            assert!(lam < prev, "lambda({a}) = {lam} did not decrease");
            prev = lam;
        }
    }

    #[test]
    fn mesh_convergence_is_second_order() {
        for w in [unit(), WeightFunction::exponential_decay(0.5).unwrap()] {
            let a = 0.6;
            let l1 = dr_lowest_eigenvalue(&w, a, 128).unwrap();
            let l2 = dr_lowest_eigenvalue(&w, a, 256).unwrap();
            let l4 = dr_lowest_eigenvalue(&w, a, 512).unwrap();
            assert!((l1 - l2).abs() <= 4.0 * (l2 - l4).abs() + 1e-8);
        }
    }

    #[test]
    fn critical_length_by_eigenvalue_route() {
        let a = a_star_by_eigenvalue(&unit(), 4096, (0.5, 1.0)).unwrap();
        assert_abs_diff_eq!(a, FRAC_PI_4, epsilon = 1e-4);

        let theta: f64 = 2.0 * PI / 5.0;
        let w = WeightFunction::exponential_decay(theta.cos()).unwrap();
        let expected = (PI - theta) / (2.0 * theta.sin());
        let a = a_star_by_eigenvalue(&w, 4096, (0.5, 1.5)).unwrap();
        assert_abs_diff_eq!(a, expected, epsilon = 1e-4);

        let w = WeightFunction::exponential_decay(-1.0).unwrap();
        let a = a_star_by_eigenvalue(&w, 4096, (0.2, 0.9)).unwrap();
        assert_abs_diff_eq!(a, 0.5, epsilon = 1e-4);
    }

    #[test]
    fn scan_finds_or_reports_absence() {
        let found = a_star_eigen_scan(&unit(), 512, 2.0).unwrap().unwrap();
        assert_abs_diff_eq!(found, FRAC_PI_4, epsilon = 1e-3);
        // m = e^{-s}: eigenvalue stays positive on any window.
        let w = WeightFunction::exponential_decay(1.0).unwrap();
        assert!(a_star_eigen_scan(&w, 256, 5.0).unwrap().is_none());
    }

    #[test]
    fn window_without_sign_change_is_an_error() {
        assert!(a_star_by_eigenvalue(&unit(), 256, (0.1, 0.2)).is_err());
        assert!(a_star_by_eigenvalue(&unit(), 256, (0.9, 1.2)).is_err());
        assert!(dr_lowest_eigenvalue(&unit(), 0.5, 8).is_err());
    }

    #[test]
    fn brute_minimum_matches_closed_forms() {
        let v = brute_min_i(&unit(), FRAC_PI_4, 400, 0).unwrap();
        assert!((v - 1.0).abs() < 0.01, "got {v}");
        let v = brute_min_i(&unit(), FRAC_PI_6, 400, 0).unwrap();
        let target = 3.0_f64.sqrt();
        assert!((v - target).abs() / target < 0.01, "got {v}");
    }

    #[test]
    fn brute_minimum_respects_crude_upper_bound() {
        for (w, a) in [
            (unit(), 0.4),
            (WeightFunction::exponential_decay(0.5).unwrap(), 0.7),
        ] {
            let v = brute_min_i(&w, a, 256, 0).unwrap();
            let integral = crate::quad::integrate_default(
                |s| {
                    let (m, _) = w.eval(s)?;
                    Ok(1.0 / (m * m))
                },
                0.0,
                a,
            )
            .unwrap();
            assert!(v <= 1.0 / integral * 1.01);
        }
    }

    #[test]
    fn brute_maximum_matches_closed_forms() {
        let v = brute_max_j(&unit(), FRAC_PI_4, 400, 0).unwrap();
        assert!((v - 1.0).abs() < 0.01, "got {v}");
        let v = brute_max_j(&unit(), FRAC_PI_6, 400, 0).unwrap();
        let target = FRAC_PI_6.tan();
        assert!((v - target).abs() / target < 0.01, "got {v}");
    }

    #[test]
    fn brute_maximum_dominates_trivial_candidate() {
        for (w, b) in [
            (unit(), 0.5),
            (WeightFunction::exponential_decay(-0.5).unwrap(), 0.6),
        ] {
            let v = brute_max_j(&w, b, 256, 0).unwrap();
            let integral = crate::quad::integrate_default(
                |s| {
                    let (m, _) = w.eval(s)?;
                    Ok(1.0 / (m * m))
                },
                0.0,
                b,
            )
            .unwrap();
            assert!(v >= integral - 1e-9);
        }
    }

    #[test]
    fn oracles_agree_with_profile_route() {
        let p = riccati::RiccatiProfile::compute(&unit(), 2.0).unwrap();
        let a = 0.6 * p.a_star().finite().unwrap();
        let i_profile = p.i_inf(a).unwrap();
        let i_brute = brute_min_i(&unit(), a, 400, 0).unwrap();
        assert!((i_brute - i_profile).abs() / i_profile <= 1e-2);
        let j_profile = p.j_sup(a).unwrap();
        let j_brute = brute_max_j(&unit(), a, 400, 0).unwrap();
        assert!((j_brute - j_profile).abs() / j_profile <= 1e-2);
    }
}
