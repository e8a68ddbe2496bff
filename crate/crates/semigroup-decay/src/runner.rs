//! Command execution: turn a [`RunConfig`] into deterministic CSV text.
//!
//! Every numeric field is printed as `{:.16e}` (17 significant digits,
//! `.` decimal separator) and rows end with `\n`, so identical configs
//! produce byte-identical output.

use std::fmt::Write as _;

use crate::bounds::{build_envelope_windowed, BoundKind, ResolventFrame};
use crate::config::{Command, RateSpec, RunConfig};
use crate::matrix_oracle::{calibrate_majorant, measure_frame, verify_envelope, MatrixOperator};
use crate::rescale::FrameProfile;
use crate::riccati::{CriticalLength, RiccatiProfile};
use crate::variational::{a_star_eigen_scan, brute_min_i, dr_lowest_eigenvalue};
use crate::weights::WeightFunction;
use crate::{Error, Result};

/// Output of one run: the CSV text plus, for verify sweeps, an optional
/// violation message. A violation does not abort the sweep — the table is
/// still produced — but it must surface in the process exit status.
#[derive(Debug)]
pub struct RunResult {
    pub csv: String,
    pub violation: Option<String>,
}

/// Execute the configured command.
pub fn run(cfg: &RunConfig) -> Result<RunResult> {
    match cfg.command {
        Command::Astar => run_astar(cfg),
        Command::Profile => run_profile(cfg),
        Command::Bounds => run_bounds(cfg),
        Command::Verify => run_verify(cfg),
    }
}

fn fmt(x: f64) -> String {
    format!("{x:.16e}")
}

fn required_weight(cfg: &RunConfig) -> Result<WeightFunction> {
    cfg.weight
        .as_ref()
        .ok_or_else(|| Error::invalid("this command needs a [weight] section"))?
        .build()
}

/// Report the critical length by two independent routes: the shooting
/// profile's own root and the sign change of the lowest eigenvalue of the
/// discretized operator. When a route finds no root inside the window the
/// length column carries the marker `not found <= {window}`; the probe
/// column then reports the profile value at the window end, whose distance
/// from the critical value 1 appears as the residual.
fn run_astar(cfg: &RunConfig) -> Result<RunResult> {
    let w = required_weight(cfg)?;
    let window = cfg.profile_window.min(w.validity());
    let profile = RiccatiProfile::compute(&w, window)?;
    let cap = profile.a_star().cap();
    let mut csv = String::from("method,a_star,psi0_at_probe,residual\n");

    match profile.a_star() {
        CriticalLength::Finite(a) => {
            let psi = profile.psi0(a)?;
            writeln!(csv, "riccati,{},{},{}", fmt(a), fmt(psi), fmt((psi - 1.0).abs())).unwrap();
        }
        CriticalLength::NotFound { s_max } => {
            let psi = profile.psi0(s_max)?;
            writeln!(
                csv,
                "riccati,not found <= {s_max},{},{}",
                fmt(psi),
                fmt((psi - 1.0).abs())
            )
            .unwrap();
        }
    }

    match a_star_eigen_scan(&w, cfg.eigen_n, window)? {
        Some(a) => {
            // The discretized root may overshoot the profile's own cap by
            // its O(1/n^2) bias; probe the profile inside its valid range.
            let psi = profile.psi0(a.min(cap))?;
            let lambda = dr_lowest_eigenvalue(&w, a, cfg.eigen_n)?;
            writeln!(csv, "eigenvalue,{},{},{}", fmt(a), fmt(psi), fmt(lambda.abs())).unwrap();
        }
        None => {
            let psi = profile.psi0(cap)?;
            let lambda = dr_lowest_eigenvalue(&w, window, cfg.eigen_n)?;
            writeln!(
                csv,
                "eigenvalue,not found <= {window},{},{}",
                fmt(psi),
                fmt(lambda.abs())
            )
            .unwrap();
        }
    }

    Ok(RunResult { csv, violation: None })
}

/// Tabulate the optimizer profile of a weight over its sample grid, up to
/// the critical length (beyond it the profile quantities are undefined).
fn run_profile(cfg: &RunConfig) -> Result<RunResult> {
    let w = required_weight(cfg)?;
    let window = cfg.profile_window.min(w.validity());
    let profile = RiccatiProfile::compute(&w, window)?;
    let cap = profile.a_star().cap().min(profile.b_star().cap());
    let mut csv = String::from("s,m,mu,psi0,psi_dual,i_inf,j_sup\n");
    for &s in profile.grid() {
        if s > cap {
            break;
        }
        let (m, mu) = w.eval(s)?;
        writeln!(
            csv,
            "{},{},{},{},{},{},{}",
            fmt(s),
            fmt(m),
            fmt(mu),
            fmt(profile.psi0(s)?),
            fmt(profile.psi_dual(s)?),
            fmt(profile.i_inf(s)?),
            fmt(profile.j_sup(s)?)
        )
        .unwrap();
    }
    Ok(RunResult { csv, violation: None })
}

fn build_operator(cfg: &RunConfig) -> Result<Option<MatrixOperator>> {
    match &cfg.matrix {
        Some(spec) => Ok(Some(MatrixOperator::from_rows(&spec.rows)?)),
        None => Ok(None),
    }
}

fn resolve_frame(cfg: &RunConfig, op: Option<&MatrixOperator>) -> Result<ResolventFrame> {
    let spec = cfg
        .frame
        .ok_or_else(|| Error::invalid("this command needs a [frame] section"))?;
    let r = match spec.rate {
        RateSpec::Explicit(r) => r,
        RateSpec::Measure => {
            let op = op.ok_or_else(|| {
                Error::invalid("frame r = measure needs a [matrix] section")
            })?;
            measure_frame(op, spec.omega)?
        }
    };
    ResolventFrame::new(spec.omega, r)
}

/// Evaluate all bounds on the time grid. Inactive bounds leave their column
/// empty; the argmin columns report the interval split of the winning
/// optimized piece, and stay empty when the pointwise majorant itself or
/// the fixed-rate bound (which splits nothing) is the smallest value.
fn run_bounds(cfg: &RunConfig) -> Result<RunResult> {
    let w = required_weight(cfg)?;
    let op = build_operator(cfg)?;
    let frame = resolve_frame(cfg, op.as_ref())?;
    let grid = cfg
        .grid
        .ok_or_else(|| Error::invalid("this command needs a [grid] section"))?
        .build()?;
    let env = build_envelope_windowed(&frame, &w, &w, &grid, cfg.iterations, cfg.profile_window)?;

    let mut csv =
        String::from("t,base,gp,gp_decay,wei,riccati,appendix,envelope,argmin_a,argmin_b\n");
    for row in env.rows() {
        let mut fields = vec![fmt(row.t), fmt(row.base)];
        for kind in BoundKind::ALL {
            fields.push(match row.piece(kind) {
                Some(p) => fmt(p.value),
                None => String::new(),
            });
        }
        fields.push(fmt(row.value));
        let (aa, bb) = match row.winner() {
            Some(p) if p.value <= row.base => match p.interval {
                Some((a, b)) => (fmt(a), fmt(b)),
                None => (String::new(), String::new()),
            },
            _ => (String::new(), String::new()),
        };
        fields.push(aa);
        fields.push(bb);
        writeln!(csv, "{}", fields.join(",")).unwrap();
    }
    Ok(RunResult { csv, violation: None })
}

/// Cross-validate the profile against two independent routes before
/// trusting it in a verify sweep: the critical length against the
/// discretized-eigenvalue root, and the optimized quadratic form against a
/// direct variational minimizer. Disagreement is a numerical failure.
fn check_profile_consistency(
    frame: &ResolventFrame,
    w: &WeightFunction,
    cfg: &RunConfig,
) -> Result<()> {
    let fp = FrameProfile::new(frame, w, cfg.profile_window)?;
    let profile = fp.profile();
    let wn = fp.normalized_weight();
    let window = profile.s_max();

    let eigen = a_star_eigen_scan(wn, cfg.eigen_n, window)?;
    match (profile.a_star().finite(), eigen) {
        (Some(ar), Some(ae)) => {
            if (ar - ae).abs() > 1e-3 * ar.max(1.0) {
                return Err(Error::numerical(format!(
                    "critical length mismatch: profile {ar:.9}, eigenvalue route {ae:.9}"
                )));
            }
        }
        (None, None) => {}
        (ricc, eig) => {
            return Err(Error::numerical(format!(
                "critical length existence mismatch: profile route found {ricc:?}, \
                 eigenvalue route found {eig:?}"
            )));
        }
    }

    // Probe where both routes are well-conditioned: the deepest point at
    // most 0.6 of the cap at which the weight's dynamic range stays within
    // two orders of magnitude. The variational route squares the weight, so
    // a steeply decaying majorant makes its quadratic form unresolvable in
    // double precision far out in the window.
    let limit = 0.6 * profile.a_star().cap();
    let (m0, _) = wn.eval(0.0)?;
    let (mut lo, mut hi) = (m0, m0);
    let mut probe = f64::NAN;
    for &s in profile.grid() {
        if s > limit {
            break;
        }
        let (m, _) = wn.eval(s)?;
        lo = lo.min(m);
        hi = hi.max(m);
        if hi / lo > 1e2 {
            break;
        }
        probe = s;
    }
    if probe.is_finite() {
        let from_profile = profile.i_inf(probe)?;
        let brute = brute_min_i(wn, probe, 384, cfg.seed)?;
        let rel = (from_profile - brute).abs() / from_profile.abs().max(1e-300);
        if rel > 0.02 {
            return Err(Error::numerical(format!(
                "optimized form mismatch at a = {probe:.6}: profile {from_profile:.9e}, \
                 variational {brute:.9e}"
            )));
        }
    }
    Ok(())
}

/// Build an envelope for the configured matrix and sweep the exact
/// semigroup norm against it. The trailing row reports the sharpest point
/// of the envelope: the literal `min_ratio` marker, the minimizing time,
/// an empty third column, and the smallest norm/envelope ratio.
fn run_verify(cfg: &RunConfig) -> Result<RunResult> {
    let op = build_operator(cfg)?
        .ok_or_else(|| Error::invalid("verify needs a [matrix] section"))?;
    let frame = resolve_frame(cfg, Some(&op))?;
    let grid = cfg
        .grid
        .ok_or_else(|| Error::invalid("verify needs a [grid] section"))?
        .build()?;

    let w = match &cfg.weight {
        Some(spec) => spec.build()?,
        None => {
            let horizon = *grid.last().unwrap();
            calibrate_majorant(&op, cfg.abscissa_margin, horizon)?.weight
        }
    };
    ensure_weight_majorizes(&op, &w, &grid)?;

    if cfg.check_profile {
        check_profile_consistency(&frame, &w, cfg)?;
    }

    let env = build_envelope_windowed(&frame, &w, &w, &grid, cfg.iterations, cfg.profile_window)?;
    let report = verify_envelope(&op, &env)?;

    let mut csv = String::from("t,true_norm,envelope,ratio\n");
    for row in &report.rows {
        writeln!(
            csv,
            "{},{},{},{}",
            fmt(row.t),
            fmt(row.true_norm),
            fmt(row.envelope),
            fmt(row.ratio)
        )
        .unwrap();
    }
    writeln!(csv, "min_ratio,{},,{}", fmt(report.min_ratio_t), fmt(report.min_ratio)).unwrap();

    let violation = if report.ok {
        None
    } else {
        Some(format!(
            "envelope exceeded: norm/envelope = {:.6e} at t = {:.6e}",
            report.max_ratio, report.max_ratio_t
        ))
    };
    Ok(RunResult { csv, violation })
}

/// A verify sweep is only meaningful if the configured weight actually
/// majorizes the semigroup norm — otherwise every bound built from it is
/// vacuous. Spot-check the grid nodes before doing any heavy work.
fn ensure_weight_majorizes(
    op: &MatrixOperator,
    w: &WeightFunction,
    grid: &[f64],
) -> Result<()> {
    for &t in grid {
        if t > w.validity() {
            break;
        }
        let (m, _) = w.eval(t)?;
        let norm = op.semigroup_norm(t)?;
        if norm > m * (1.0 + 1e-8) {
            return Err(Error::invalid(format!(
                "configured weight is not a majorant: |e^(tA)| = {norm:.9e} > m(t) = {m:.9e} \
                 at t = {t:.6e}"
            )));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::{FrameSpec, GridScale, GridSpec, WeightSpec};

    fn base_cfg(command: Command) -> RunConfig {
        RunConfig {
            command,
            seed: 0,
            output: None,
            weight: Some(WeightSpec::Constant(1.0)),
            frame: Some(FrameSpec {
                omega: 0.0,
                rate: RateSpec::Explicit(1.0),
            }),
            grid: Some(GridSpec {
                start: 0.0,
                stop: 10.0,
                count: 6,
                scale: GridScale::Linear,
            }),
            iterations: 1,
            profile_window: 50.0,
            eigen_n: 512,
            matrix: None,
            check_profile: false,
            abscissa_margin: 0.1,
        }
    }

    fn parse_csv(csv: &str) -> Vec<Vec<String>> {
        csv.lines()
            .map(|l| l.split(',').map(|f| f.to_string()).collect())
            .collect()
    }

    #[test]
    fn astar_reports_both_routes_for_constant_weight() {
        let out = run(&base_cfg(Command::Astar)).unwrap();
        let rows = parse_csv(&out.csv);
        assert_eq!(rows[0], vec!["method", "a_star", "psi0_at_probe", "residual"]);
        assert_eq!(rows[1][0], "riccati");
        assert_eq!(rows[2][0], "eigenvalue");
        let a_r: f64 = rows[1][1].parse().unwrap();
        let a_e: f64 = rows[2][1].parse().unwrap();
        assert!((a_r - std::f64::consts::FRAC_PI_4).abs() < 1e-8, "{a_r}");
        assert!((a_e - std::f64::consts::FRAC_PI_4).abs() < 1e-3, "{a_e}");
        let res_r: f64 = rows[1][3].parse().unwrap();
        assert!(res_r < 1e-8, "{res_r}");
    }

    #[test]
    fn astar_marks_absent_critical_length() {
        let mut cfg = base_cfg(Command::Astar);
        cfg.weight = Some(WeightSpec::ExponentialDecay(1.0));
        cfg.profile_window = 40.0;
        let out = run(&cfg).unwrap();
        let rows = parse_csv(&out.csv);
        assert_eq!(rows[1][1], "not found <= 40");
        assert_eq!(rows[2][1], "not found <= 40");
    }

    #[test]
    fn profile_table_matches_closed_form() {
        let mut cfg = base_cfg(Command::Profile);
        cfg.profile_window = 10.0;
        let out = run(&cfg).unwrap();
        let rows = parse_csv(&out.csv);
        assert_eq!(
            rows[0],
            vec!["s", "m", "mu", "psi0", "psi_dual", "i_inf", "j_sup"]
        );
        assert!(rows.len() > 10);
        // Spot-check a middle row against cot/tan closed forms.
        let mid = &rows[rows.len() / 2];
        let s: f64 = mid[0].parse().unwrap();
        let psi0: f64 = mid[3].parse().unwrap();
        let psi_dual: f64 = mid[4].parse().unwrap();
        assert!((psi0 - 1.0 / s.tan()).abs() < 1e-8, "s = {s}");
        assert!((psi_dual + s.tan()).abs() < 1e-8, "s = {s}");
        // No row escapes the critical length.
        let last_s: f64 = rows.last().unwrap()[0].parse().unwrap();
        assert!(last_s <= std::f64::consts::FRAC_PI_4 + 1e-9);
    }

    #[test]
    fn bounds_table_has_full_columns_and_argmins() {
        let out = run(&base_cfg(Command::Bounds)).unwrap();
        let rows = parse_csv(&out.csv);
        assert_eq!(
            rows[0],
            vec![
                "t", "base", "gp", "gp_decay", "wei", "riccati", "appendix", "envelope",
                "argmin_a", "argmin_b"
            ]
        );
        assert_eq!(rows.len(), 7);
        // t = 0 row: quadrature bounds inactive, fixed-rate active.
        assert_eq!(rows[1][2], "");
        assert!(!rows[1][4].is_empty());
        // Late row: every bound active, envelope at most each of them,
        // winner interval columns populated.
        let last = &rows[6];
        let env: f64 = last[7].parse().unwrap();
        for (col, cell) in last.iter().enumerate().take(7).skip(2) {
            let v: f64 = cell.parse().unwrap();
            assert!(env <= v * (1.0 + 1e-12), "column {col}");
        }
        assert!(!last[8].is_empty() && !last[9].is_empty());
        let t10: f64 = last[0].parse().unwrap();
        assert_eq!(t10, 10.0);
        // The critical length is located to 1e-10, which propagates into
        // the optimal value at the same order.
        let expect = (-10.0 + std::f64::consts::FRAC_PI_2).exp();
        assert!((env - expect).abs() < 1e-9 * expect, "{env} vs {expect}");
    }

    #[test]
    fn verify_passes_for_contraction_and_emits_min_ratio_row() {
        let mut cfg = base_cfg(Command::Verify);
        cfg.matrix = Some(crate::config::MatrixSpec {
            rows: vec![
                vec![nalgebra::Complex::new(-1.0, 0.0), nalgebra::Complex::new(0.0, 0.0)],
                vec![nalgebra::Complex::new(0.0, 0.0), nalgebra::Complex::new(-1.0, 0.0)],
            ],
        });
        cfg.frame = Some(FrameSpec {
            omega: 0.0,
            rate: RateSpec::Measure,
        });
        cfg.check_profile = true;
        let out = run(&cfg).unwrap();
        assert!(out.violation.is_none());
        let rows = parse_csv(&out.csv);
        assert_eq!(rows[0], vec!["t", "true_norm", "envelope", "ratio"]);
        let tail = rows.last().unwrap();
        assert_eq!(tail[0], "min_ratio");
        assert_eq!(tail[2], "");
        let min_ratio: f64 = tail[3].parse().unwrap();
        assert!(min_ratio <= 1.0 + 1e-8);
        for row in &rows[1..rows.len() - 1] {
            let ratio: f64 = row[3].parse().unwrap();
            assert!(ratio <= 1.0 + 1e-8);
        }
    }

    #[test]
    fn verify_flags_envelope_violation_but_still_writes_rows() {
        // Claimed frame rate 2 for A = -I is false and must be caught.
        let mut cfg = base_cfg(Command::Verify);
        cfg.matrix = Some(crate::config::MatrixSpec {
            rows: vec![vec![nalgebra::Complex::new(-1.0, 0.0)]],
        });
        cfg.frame = Some(FrameSpec {
            omega: 0.0,
            rate: RateSpec::Explicit(2.0),
        });
        let out = run(&cfg).unwrap();
        assert!(out.violation.is_some(), "false frame must be flagged");
        let rows = parse_csv(&out.csv);
        assert_eq!(rows.last().unwrap()[0], "min_ratio");
        assert!(rows.len() > 3);
    }

    #[test]
    fn verify_rejects_non_majorant_weight() {
        // m = 0.5 does not dominate |e^(tA)| near t = 0.
        let mut cfg = base_cfg(Command::Verify);
        cfg.weight = Some(WeightSpec::Constant(0.5));
        cfg.matrix = Some(crate::config::MatrixSpec {
            rows: vec![vec![nalgebra::Complex::new(-1.0, 0.0)]],
        });
        let err = run(&cfg).unwrap_err();
        assert!(matches!(err, Error::Invalid(_)), "{err}");
    }

    #[test]
    fn deterministic_byte_identical_reruns() {
        for command in [Command::Astar, Command::Profile, Command::Bounds] {
            let cfg = base_cfg(command);
            let first = run(&cfg).unwrap().csv;
            let second = run(&cfg).unwrap().csv;
            assert_eq!(first, second);
            assert!(first.ends_with('\n'));
            assert!(!first.contains('\r'));
        }
    }
}

