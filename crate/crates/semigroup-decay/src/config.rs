//! Run configuration: a small structured text format with `[section]`
//! headers and `key = value` lines, parsed strictly — unknown sections or
//! keys, duplicates, and malformed values are all errors carrying the
//! offending line number.
//!
//! ```text
//! # decay study for the damped shift
//! [run]
//! command = bounds
//! seed = 0
//!
//! [weight]
//! kind = constant
//! value = 1.0
//!
//! [frame]
//! omega = 0.0
//! r = 1.0
//!
//! [grid]
//! start = 0.0
//! stop = 30.0
//! count = 300
//! scale = linear
//! ```
//!
//! [`RunConfig::parse`] works on in-memory text and performs no IO;
//! [`RunConfig::load`] additionally reads the config file and resolves a
//! `samples_file` weight table relative to the config's directory.

use std::path::{Path, PathBuf};
use std::str::FromStr;

use nalgebra::Complex;

use crate::riccati::DEFAULT_S_MAX;
use crate::weights::WeightFunction;
use crate::{Error, Result};

/// The command a run executes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    /// Report the critical length by both available routes.
    Astar,
    /// Tabulate the optimizer profile of a weight.
    Profile,
    /// Evaluate and optimize all bounds on a time grid.
    Bounds,
    /// Check an envelope against a matrix oracle.
    Verify,
}

impl Command {
    pub fn as_str(&self) -> &'static str {
        match self {
            Command::Astar => "astar",
            Command::Profile => "profile",
            Command::Bounds => "bounds",
            Command::Verify => "verify",
        }
    }
}

impl FromStr for Command {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "astar" => Ok(Command::Astar),
            "profile" => Ok(Command::Profile),
            "bounds" => Ok(Command::Bounds),
            "verify" => Ok(Command::Verify),
            other => Err(Error::invalid(format!(
                "unknown command {other:?}; expected astar, profile, bounds or verify"
            ))),
        }
    }
}

/// Weight description as written in the config.
#[derive(Debug, Clone)]
pub enum WeightSpec {
    Constant(f64),
    ExponentialDecay(f64),
    /// Sample table given inline or already loaded from a file.
    Tabulated(Vec<(f64, f64)>),
    /// Sample table to be loaded from a file ([`RunConfig::load`] resolves
    /// this into `Tabulated`; building a weight from it directly is an error).
    TabulatedFile(PathBuf),
}

impl WeightSpec {
    pub fn build(&self) -> Result<WeightFunction> {
        match self {
            WeightSpec::Constant(c) => WeightFunction::constant(*c),
            WeightSpec::ExponentialDecay(alpha) => WeightFunction::exponential_decay(*alpha),
            WeightSpec::Tabulated(samples) => WeightFunction::tabulated(samples),
            WeightSpec::TabulatedFile(p) => Err(Error::invalid(format!(
                "weight table file {} has not been loaded; use RunConfig::load",
                p.display()
            ))),
        }
    }
}

/// The rate part of a frame: written explicitly or measured from a matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RateSpec {
    Explicit(f64),
    Measure,
}

#[derive(Debug, Clone, Copy)]
pub struct FrameSpec {
    pub omega: f64,
    pub rate: RateSpec,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GridScale {
    Linear,
    Log,
}

#[derive(Debug, Clone, Copy)]
pub struct GridSpec {
    pub start: f64,
    pub stop: f64,
    pub count: usize,
    pub scale: GridScale,
}

impl GridSpec {
    pub fn build(&self) -> Result<Vec<f64>> {
        if self.count < 2 {
            return Err(Error::invalid("grid count must be at least 2"));
        }
        if !(self.start.is_finite() && self.stop.is_finite() && self.stop > self.start) {
            return Err(Error::invalid(format!(
                "grid must have finite stop > start, got [{}, {}]",
                self.start, self.stop
            )));
        }
        if self.start < 0.0 {
            return Err(Error::invalid("grid start must be nonnegative"));
        }
        let n = self.count;
        let grid = match self.scale {
            GridScale::Linear => (0..n)
                .map(|i| self.start + (self.stop - self.start) * i as f64 / (n - 1) as f64)
                .collect(),
            GridScale::Log => {
                if self.start <= 0.0 {
                    return Err(Error::invalid("log-scale grid needs start > 0"));
                }
                let ratio = self.stop / self.start;
                (0..n)
                    .map(|i| self.start * ratio.powf(i as f64 / (n - 1) as f64))
                    .collect()
            }
        };
        Ok(grid)
    }
}

/// Matrix rows as parsed from `row0 = ...` lines.
#[derive(Debug, Clone)]
pub struct MatrixSpec {
    pub rows: Vec<Vec<Complex<f64>>>,
}

/// Everything a run needs, parsed and validated.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub command: Command,
    pub seed: u64,
    pub output: Option<PathBuf>,
    pub weight: Option<WeightSpec>,
    pub frame: Option<FrameSpec>,
    pub grid: Option<GridSpec>,
    pub iterations: usize,
    /// Search window (in frame time) for critical lengths and profiles.
    pub profile_window: f64,
    /// Discretization size for the eigenvalue route to the critical length.
    pub eigen_n: usize,
    pub matrix: Option<MatrixSpec>,
    /// Cross-validate the profile against the eigenvalue and variational
    /// routes before a verify sweep.
    pub check_profile: bool,
    /// Distance above the spectral abscissa used when calibrating a weight
    /// from a matrix.
    pub abscissa_margin: f64,
}

/// Parse one complex entry: `re`, `re+imI`, `re-imI`, or a pure imaginary
/// `imI`. Exponent markers inside the mantissas are handled (`1e-3+2e+4I`).
pub fn parse_complex(s: &str) -> Result<Complex<f64>> {
    let t = s.trim();
    let parse_part = |p: &str| -> Result<f64> {
        p.trim()
            .parse::<f64>()
            .map_err(|_| Error::invalid(format!("malformed number {p:?} in complex entry {t:?}")))
    };
    match t.strip_suffix('I') {
        None => Ok(Complex::new(parse_part(t)?, 0.0)),
        Some(body) => {
            let bytes = body.as_bytes();
            let mut split = None;
            for i in (1..bytes.len()).rev() {
                let c = bytes[i] as char;
                if (c == '+' || c == '-') && !matches!(bytes[i - 1] as char, 'e' | 'E') {
                    split = Some(i);
                    break;
                }
            }
            match split {
                Some(i) => Ok(Complex::new(parse_part(&body[..i])?, parse_part(&body[i..])?)),
                None => Ok(Complex::new(0.0, parse_part(body)?)),
            }
        }
    }
}

/// Parse a two-column sample table: one `s value` pair per line, `#`
/// comments and blank lines ignored.
pub fn parse_table(text: &str) -> Result<Vec<(f64, f64)>> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = strip_comment(raw).trim();
        if line.is_empty() {
            continue;
        }
        let mut parts = line.split_whitespace();
        let (a, b) = match (parts.next(), parts.next(), parts.next()) {
            (Some(a), Some(b), None) => (a, b),
            _ => {
                return Err(Error::invalid(format!(
                    "table line {}: expected exactly two columns, got {line:?}",
                    i + 1
                )))
            }
        };
        let s = a.parse::<f64>().map_err(|_| {
            Error::invalid(format!("table line {}: malformed number {a:?}", i + 1))
        })?;
        let v = b.parse::<f64>().map_err(|_| {
            Error::invalid(format!("table line {}: malformed number {b:?}", i + 1))
        })?;
        out.push((s, v));
    }
    Ok(out)
}

fn strip_comment(line: &str) -> &str {
    match line.find('#') {
        Some(i) => &line[..i],
        None => line,
    }
}

/// Parse inline samples `s:v, s:v, ...`.
fn parse_inline_samples(value: &str, line_no: usize) -> Result<Vec<(f64, f64)>> {
    let mut out = Vec::new();
    for item in value.split(',') {
        let item = item.trim();
        let (a, b) = item.split_once(':').ok_or_else(|| {
            Error::invalid(format!(
                "line {line_no}: sample {item:?} must have the form s:value"
            ))
        })?;
        let s = a.trim().parse::<f64>().map_err(|_| {
            Error::invalid(format!("line {line_no}: malformed number {a:?}"))
        })?;
        let v = b.trim().parse::<f64>().map_err(|_| {
            Error::invalid(format!("line {line_no}: malformed number {b:?}"))
        })?;
        out.push((s, v));
    }
    Ok(out)
}

/// Raw keys collected per section before validation.
#[derive(Default)]
struct Builder {
    command: Option<Command>,
    seed: Option<u64>,
    output: Option<PathBuf>,

    weight_kind: Option<String>,
    weight_value: Option<f64>,
    weight_alpha: Option<f64>,
    weight_samples: Option<Vec<(f64, f64)>>,
    weight_samples_file: Option<PathBuf>,

    frame_omega: Option<f64>,
    frame_rate: Option<RateSpec>,

    grid_start: Option<f64>,
    grid_stop: Option<f64>,
    grid_count: Option<usize>,
    grid_scale: Option<GridScale>,

    iterations: Option<usize>,
    profile_window: Option<f64>,
    eigen_n: Option<usize>,

    matrix_dim: Option<usize>,
    matrix_rows: Vec<(usize, Vec<Complex<f64>>, usize)>, // (index, entries, line)

    check_profile: Option<bool>,
    abscissa_margin: Option<f64>,

    saw_weight_section: bool,
    saw_frame_section: bool,
    saw_grid_section: bool,
    saw_matrix_section: bool,
}

fn parse_f64(v: &str, line_no: usize) -> Result<f64> {
    v.parse::<f64>()
        .map_err(|_| Error::invalid(format!("line {line_no}: malformed number {v:?}")))
}

fn parse_usize(v: &str, line_no: usize) -> Result<usize> {
    v.parse::<usize>()
        .map_err(|_| Error::invalid(format!("line {line_no}: malformed integer {v:?}")))
}

fn parse_bool(v: &str, line_no: usize) -> Result<bool> {
    match v {
        "true" => Ok(true),
        "false" => Ok(false),
        _ => Err(Error::invalid(format!(
            "line {line_no}: expected true or false, got {v:?}"
        ))),
    }
}

fn reject_duplicate<T>(slot: &Option<T>, key: &str, line_no: usize) -> Result<()> {
    if slot.is_some() {
        return Err(Error::invalid(format!("line {line_no}: duplicate key {key}")));
    }
    Ok(())
}

impl RunConfig {
    /// Parse config text. Performs no IO: a `samples_file` weight stays a
    /// path (see [`RunConfig::load`]).
    pub fn parse(text: &str) -> Result<RunConfig> {
        let mut b = Builder::default();
        let mut section: Option<String> = None;
        for (i, raw) in text.lines().enumerate() {
            let line_no = i + 1;
            let line = strip_comment(raw).trim();
            if line.is_empty() {
                continue;
            }
            if let Some(name) = line.strip_prefix('[') {
                let name = name.strip_suffix(']').ok_or_else(|| {
                    Error::invalid(format!("line {line_no}: unterminated section header"))
                })?;
                match name {
                    "run" | "weight" | "frame" | "grid" | "envelope" | "profile" | "matrix"
                    | "verify" => {
                        match name {
                            "weight" => b.saw_weight_section = true,
                            "frame" => b.saw_frame_section = true,
                            "grid" => b.saw_grid_section = true,
                            "matrix" => b.saw_matrix_section = true,
                            _ => {}
                        }
                        section = Some(name.to_string());
                    }
                    other => {
                        return Err(Error::invalid(format!(
                            "line {line_no}: unknown section [{other}]"
                        )))
                    }
                }
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::invalid(format!(
                    "line {line_no}: expected key = value or [section], got {line:?}"
                ))
            })?;
            let key = key.trim();
            let value = value.trim();
            if value.is_empty() {
                return Err(Error::invalid(format!(
                    "line {line_no}: key {key} has an empty value"
                )));
            }
            let section = section.as_deref().ok_or_else(|| {
                Error::invalid(format!(
                    "line {line_no}: key {key} appears before any [section]"
                ))
            })?;
            b.dispatch(section, key, value, line_no)?;
        }
        b.finish()
    }

    /// Read and parse a config file, resolving a `samples_file` weight table
    /// relative to the config's own directory.
    pub fn load(path: &Path) -> Result<RunConfig> {
        let text = std::fs::read_to_string(path).map_err(|e| {
            Error::invalid(format!("cannot read config {}: {e}", path.display()))
        })?;
        let mut cfg = RunConfig::parse(&text)?;
        if let Some(WeightSpec::TabulatedFile(rel)) = &cfg.weight {
            let resolved = if rel.is_absolute() {
                rel.clone()
            } else {
                path.parent().unwrap_or(Path::new(".")).join(rel)
            };
            let table_text = std::fs::read_to_string(&resolved).map_err(|e| {
                Error::invalid(format!(
                    "cannot read weight table {}: {e}",
                    resolved.display()
                ))
            })?;
            cfg.weight = Some(WeightSpec::Tabulated(parse_table(&table_text)?));
        }
        Ok(cfg)
    }
}

impl Builder {
    fn dispatch(&mut self, section: &str, key: &str, value: &str, line_no: usize) -> Result<()> {
        match (section, key) {
            ("run", "command") => {
                reject_duplicate(&self.command, key, line_no)?;
                self.command = Some(value.parse().map_err(|e| prefix_line(e, line_no))?);
            }
            ("run", "seed") => {
                reject_duplicate(&self.seed, key, line_no)?;
                self.seed = Some(value.parse::<u64>().map_err(|_| {
                    Error::invalid(format!("line {line_no}: malformed integer {value:?}"))
                })?);
            }
            ("run", "output") => {
                reject_duplicate(&self.output, key, line_no)?;
                self.output = Some(PathBuf::from(value));
            }
            ("weight", "kind") => {
                reject_duplicate(&self.weight_kind, key, line_no)?;
                self.weight_kind = Some(value.to_string());
            }
            ("weight", "value") => {
                reject_duplicate(&self.weight_value, key, line_no)?;
                self.weight_value = Some(parse_f64(value, line_no)?);
            }
            ("weight", "alpha") => {
                reject_duplicate(&self.weight_alpha, key, line_no)?;
                self.weight_alpha = Some(parse_f64(value, line_no)?);
            }
            ("weight", "samples") => {
                reject_duplicate(&self.weight_samples, key, line_no)?;
                self.weight_samples = Some(parse_inline_samples(value, line_no)?);
            }
            ("weight", "samples_file") => {
                reject_duplicate(&self.weight_samples_file, key, line_no)?;
                self.weight_samples_file = Some(PathBuf::from(value));
            }
            ("frame", "omega") => {
                reject_duplicate(&self.frame_omega, key, line_no)?;
                self.frame_omega = Some(parse_f64(value, line_no)?);
            }
            ("frame", "r") => {
                reject_duplicate(&self.frame_rate, key, line_no)?;
                self.frame_rate = Some(if value == "measure" {
                    RateSpec::Measure
                } else {
                    RateSpec::Explicit(parse_f64(value, line_no)?)
                });
            }
            ("grid", "start") => {
                reject_duplicate(&self.grid_start, key, line_no)?;
                self.grid_start = Some(parse_f64(value, line_no)?);
            }
            ("grid", "stop") => {
                reject_duplicate(&self.grid_stop, key, line_no)?;
                self.grid_stop = Some(parse_f64(value, line_no)?);
            }
            ("grid", "count") => {
                reject_duplicate(&self.grid_count, key, line_no)?;
                self.grid_count = Some(parse_usize(value, line_no)?);
            }
            ("grid", "scale") => {
                reject_duplicate(&self.grid_scale, key, line_no)?;
                self.grid_scale = Some(match value {
                    "linear" => GridScale::Linear,
                    "log" => GridScale::Log,
                    _ => {
                        return Err(Error::invalid(format!(
                            "line {line_no}: grid scale must be linear or log, got {value:?}"
                        )))
                    }
                });
            }
            ("envelope", "iterations") => {
                reject_duplicate(&self.iterations, key, line_no)?;
                self.iterations = Some(parse_usize(value, line_no)?);
            }
            ("profile", "s_max") => {
                reject_duplicate(&self.profile_window, key, line_no)?;
                self.profile_window = Some(parse_f64(value, line_no)?);
            }
            ("profile", "eigen_n") => {
                reject_duplicate(&self.eigen_n, key, line_no)?;
                self.eigen_n = Some(parse_usize(value, line_no)?);
            }
            ("matrix", "dim") => {
                reject_duplicate(&self.matrix_dim, key, line_no)?;
                self.matrix_dim = Some(parse_usize(value, line_no)?);
            }
            ("matrix", _) if key.starts_with("row") => {
                let idx = key[3..].parse::<usize>().map_err(|_| {
                    Error::invalid(format!("line {line_no}: malformed row key {key:?}"))
                })?;
                if self.matrix_rows.iter().any(|(i, _, _)| *i == idx) {
                    return Err(Error::invalid(format!(
                        "line {line_no}: duplicate key {key}"
                    )));
                }
                let entries = value
                    .split(',')
                    .map(|e| parse_complex(e).map_err(|err| prefix_line(err, line_no)))
                    .collect::<Result<Vec<_>>>()?;
                self.matrix_rows.push((idx, entries, line_no));
            }
            ("verify", "check_profile") => {
                reject_duplicate(&self.check_profile, key, line_no)?;
                self.check_profile = Some(parse_bool(value, line_no)?);
            }
            ("verify", "abscissa_margin") => {
                reject_duplicate(&self.abscissa_margin, key, line_no)?;
                self.abscissa_margin = Some(parse_f64(value, line_no)?);
            }
            (section, key) => {
                return Err(Error::invalid(format!(
                    "line {line_no}: unknown key {key} in section [{section}]"
                )))
            }
        }
        Ok(())
    }

    fn finish(self) -> Result<RunConfig> {
        let command = self
            .command
            .ok_or_else(|| Error::invalid("missing required key command in section [run]"))?;

        let weight = if self.saw_weight_section {
            Some(self.build_weight_spec()?)
        } else {
            None
        };

        let frame = if self.saw_frame_section {
            let omega = self
                .frame_omega
                .ok_or_else(|| Error::invalid("section [frame] needs key omega"))?;
            let rate = self
                .frame_rate
                .ok_or_else(|| Error::invalid("section [frame] needs key r"))?;
            Some(FrameSpec { omega, rate })
        } else {
            None
        };

        let grid = if self.saw_grid_section {
            let spec = GridSpec {
                start: self
                    .grid_start
                    .ok_or_else(|| Error::invalid("section [grid] needs key start"))?,
                stop: self
                    .grid_stop
                    .ok_or_else(|| Error::invalid("section [grid] needs key stop"))?,
                count: self
                    .grid_count
                    .ok_or_else(|| Error::invalid("section [grid] needs key count"))?,
                scale: self.grid_scale.unwrap_or(GridScale::Linear),
            };
            spec.build()?; // validate eagerly so errors carry config context
            Some(spec)
        } else {
            None
        };

        let matrix = if self.saw_matrix_section {
            Some(self.build_matrix_spec()?)
        } else {
            None
        };

        let iterations = self.iterations.unwrap_or(1);
        if iterations == 0 {
            return Err(Error::invalid("envelope iterations must be at least 1"));
        }
        let profile_window = self.profile_window.unwrap_or(DEFAULT_S_MAX);
        if !(profile_window.is_finite() && profile_window > 0.0) {
            return Err(Error::invalid("profile s_max must be positive"));
        }
        let eigen_n = self.eigen_n.unwrap_or(4096);
        if eigen_n < 16 {
            return Err(Error::invalid("profile eigen_n must be at least 16"));
        }
        let abscissa_margin = self.abscissa_margin.unwrap_or(0.1);
        if !(abscissa_margin.is_finite() && abscissa_margin > 0.0) {
            return Err(Error::invalid("verify abscissa_margin must be positive"));
        }

        let cfg = RunConfig {
            command,
            seed: self.seed.unwrap_or(0),
            output: self.output,
            weight,
            frame,
            grid,
            iterations,
            profile_window,
            eigen_n,
            matrix,
            check_profile: self.check_profile.unwrap_or(false),
            abscissa_margin,
        };
        cfg.validate_for_command()?;
        Ok(cfg)
    }

    fn build_weight_spec(&self) -> Result<WeightSpec> {
        let kind = self
            .weight_kind
            .as_deref()
            .ok_or_else(|| Error::invalid("section [weight] needs key kind"))?;
        let forbid = |cond: bool, key: &str| -> Result<()> {
            if cond {
                Err(Error::invalid(format!(
                    "weight key {key} is not used by kind {kind}"
                )))
            } else {
                Ok(())
            }
        };
        match kind {
            "constant" => {
                forbid(self.weight_alpha.is_some(), "alpha")?;
                forbid(self.weight_samples.is_some(), "samples")?;
                forbid(self.weight_samples_file.is_some(), "samples_file")?;
                let c = self
                    .weight_value
                    .ok_or_else(|| Error::invalid("constant weight needs key value"))?;
                Ok(WeightSpec::Constant(c))
            }
            "exponential_decay" => {
                forbid(self.weight_value.is_some(), "value")?;
                forbid(self.weight_samples.is_some(), "samples")?;
                forbid(self.weight_samples_file.is_some(), "samples_file")?;
                let alpha = self
                    .weight_alpha
                    .ok_or_else(|| Error::invalid("exponential_decay weight needs key alpha"))?;
                Ok(WeightSpec::ExponentialDecay(alpha))
            }
            "tabulated" => {
                forbid(self.weight_value.is_some(), "value")?;
                forbid(self.weight_alpha.is_some(), "alpha")?;
                match (&self.weight_samples, &self.weight_samples_file) {
                    (Some(s), None) => Ok(WeightSpec::Tabulated(s.clone())),
                    (None, Some(p)) => Ok(WeightSpec::TabulatedFile(p.clone())),
                    (Some(_), Some(_)) => Err(Error::invalid(
                        "tabulated weight takes samples or samples_file, not both",
                    )),
                    (None, None) => Err(Error::invalid(
                        "tabulated weight needs samples or samples_file",
                    )),
                }
            }
            other => Err(Error::invalid(format!(
                "unknown weight kind {other:?}; expected constant, exponential_decay or tabulated"
            ))),
        }
    }

    fn build_matrix_spec(&self) -> Result<MatrixSpec> {
        let dim = self
            .matrix_dim
            .ok_or_else(|| Error::invalid("section [matrix] needs key dim"))?;
        if dim == 0 {
            return Err(Error::invalid("matrix dim must be positive"));
        }
        let mut rows: Vec<Option<Vec<Complex<f64>>>> = vec![None; dim];
        for (idx, entries, line_no) in &self.matrix_rows {
            if *idx >= dim {
                return Err(Error::invalid(format!(
                    "line {line_no}: row{idx} out of range for dim = {dim}"
                )));
            }
            if entries.len() != dim {
                return Err(Error::invalid(format!(
                    "line {line_no}: row{idx} has {} entries, expected {dim}",
                    entries.len()
                )));
            }
            rows[*idx] = Some(entries.clone());
        }
        let rows: Vec<Vec<Complex<f64>>> = rows
            .into_iter()
            .enumerate()
            .map(|(i, r)| r.ok_or_else(|| Error::invalid(format!("matrix is missing row{i}"))))
            .collect::<Result<_>>()?;
        Ok(MatrixSpec { rows })
    }
}

fn prefix_line(e: Error, line_no: usize) -> Error {
    match e {
        Error::Invalid(m) => Error::Invalid(format!("line {line_no}: {m}")),
        other => other,
    }
}

impl RunConfig {
    fn validate_for_command(&self) -> Result<()> {
        let need = |present: bool, what: &str| -> Result<()> {
            if present {
                Ok(())
            } else {
                Err(Error::invalid(format!(
                    "command {} needs a [{what}] section",
                    self.command.as_str()
                )))
            }
        };
        match self.command {
            Command::Astar | Command::Profile => {
                need(self.weight.is_some(), "weight")?;
            }
            Command::Bounds => {
                need(self.weight.is_some(), "weight")?;
                need(self.frame.is_some(), "frame")?;
                need(self.grid.is_some(), "grid")?;
            }
            Command::Verify => {
                need(self.matrix.is_some(), "matrix")?;
                need(self.frame.is_some(), "frame")?;
                need(self.grid.is_some(), "grid")?;
            }
        }
        if let Some(FrameSpec {
            rate: RateSpec::Measure,
            ..
        }) = self.frame
        {
            if self.matrix.is_none() {
                return Err(Error::invalid(
                    "frame r = measure needs a [matrix] section",
                ));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const BOUNDS_EXAMPLE: &str = "\
# comment\n\
[run]\n\
command = bounds\n\
seed = 7\n\
\n\
[weight]\n\
kind = constant\n\
value = 1.0\n\
\n\
[frame]\n\
omega = 0.0\n\
r = 1.0\n\
\n\
[grid]\n\
start = 0.5\n\
stop = 10\n\
count = 4\n\
scale = linear\n";

    #[test]
    fn parses_a_full_bounds_config() {
        let cfg = RunConfig::parse(BOUNDS_EXAMPLE).unwrap();
        assert_eq!(cfg.command, Command::Bounds);
        assert_eq!(cfg.seed, 7);
        assert_eq!(cfg.iterations, 1);
        let grid = cfg.grid.unwrap().build().unwrap();
        assert_eq!(grid.len(), 4);
        assert_eq!(grid[0], 0.5);
        assert_eq!(grid[3], 10.0);
        let w = cfg.weight.unwrap().build().unwrap();
        assert_eq!(w.eval(1.0).unwrap().0, 1.0);
    }

    #[test]
    fn unknown_keys_and_sections_carry_line_numbers() {
        let text = "[run]\ncommand = astar\n[weight]\nkind = constant\nvalue = 1\nbogus = 3\n";
        let err = RunConfig::parse(text).unwrap_err().to_string();
        assert!(err.contains("line 6"), "{err}");
        assert!(err.contains("bogus"), "{err}");
        let err = RunConfig::parse("[nonsense]\n").unwrap_err().to_string();
        assert!(err.contains("line 1"), "{err}");
    }

    #[test]
    fn duplicate_keys_are_rejected() {
        let text = "[run]\ncommand = astar\ncommand = profile\n";
        let err = RunConfig::parse(text).unwrap_err().to_string();
        assert!(err.contains("duplicate"), "{err}");
    }

    #[test]
    fn weight_kind_key_mismatch_is_rejected() {
        let text = "[run]\ncommand = astar\n[weight]\nkind = constant\nvalue = 1\nalpha = 2\n";
        let err = RunConfig::parse(text).unwrap_err().to_string();
        assert!(err.contains("alpha"), "{err}");
        let text = "[run]\ncommand = astar\n[weight]\nkind = tabulated\n";
        let err = RunConfig::parse(text).unwrap_err().to_string();
        assert!(err.contains("samples"), "{err}");
    }

    #[test]
    fn inline_samples_parse() {
        let text = "[run]\ncommand = astar\n[weight]\nkind = tabulated\nsamples = 0:1, 0.5:0.779, 1:0.607\n";
        let cfg = RunConfig::parse(text).unwrap();
        match cfg.weight.unwrap() {
            WeightSpec::Tabulated(s) => {
                assert_eq!(s.len(), 3);
                assert_eq!(s[1], (0.5, 0.779));
            }
            other => panic!("unexpected weight spec {other:?}"),
        }
    }

    #[test]
    fn missing_required_sections_are_reported() {
        let err = RunConfig::parse("[run]\ncommand = bounds\n")
            .unwrap_err()
            .to_string();
        assert!(err.contains("[weight]"), "{err}");
        let err = RunConfig::parse("[run]\ncommand = verify\n")
            .unwrap_err()
            .to_string();
        assert!(err.contains("[matrix]"), "{err}");
    }

    #[test]
    fn measure_rate_requires_matrix() {
        let text = "[run]\ncommand = bounds\n[weight]\nkind = constant\nvalue = 1\n\
                    [frame]\nomega = 0\nr = measure\n[grid]\nstart = 0\nstop = 1\ncount = 2\n";
        let err = RunConfig::parse(text).unwrap_err().to_string();
        assert!(err.contains("measure"), "{err}");
    }

    #[test]
    fn matrix_rows_assemble() {
        let text = "[run]\ncommand = verify\n[frame]\nomega = 0\nr = measure\n\
                    [grid]\nstart = 0\nstop = 30\ncount = 4\n\
                    [matrix]\ndim = 2\nrow0 = -1, 10\nrow1 = 0, -1\n";
        let cfg = RunConfig::parse(text).unwrap();
        let m = cfg.matrix.unwrap();
        assert_eq!(m.rows.len(), 2);
        assert_eq!(m.rows[0][1], Complex::new(10.0, 0.0));
        // Missing row or wrong width must fail.
        let err = RunConfig::parse(&text.replace("row1 = 0, -1\n", ""))
            .unwrap_err()
            .to_string();
        assert!(err.contains("row1"), "{err}");
        let err = RunConfig::parse(&text.replace("row1 = 0, -1\n", "row1 = 0\n"))
            .unwrap_err()
            .to_string();
        assert!(err.contains("1 entries"), "{err}");
    }

    #[test]
    fn complex_entry_forms() {
        assert_eq!(parse_complex("1.5").unwrap(), Complex::new(1.5, 0.0));
        assert_eq!(parse_complex("-2").unwrap(), Complex::new(-2.0, 0.0));
        assert_eq!(parse_complex("1+2I").unwrap(), Complex::new(1.0, 2.0));
        assert_eq!(parse_complex("1.5-0.5I").unwrap(), Complex::new(1.5, -0.5));
        assert_eq!(parse_complex("3I").unwrap(), Complex::new(0.0, 3.0));
        assert_eq!(parse_complex("-3I").unwrap(), Complex::new(0.0, -3.0));
        assert_eq!(
            parse_complex("1e-3+2e+4I").unwrap(),
            Complex::new(1e-3, 2e4)
        );
        assert!(parse_complex("").is_err());
        assert!(parse_complex("1+I").is_err());
        assert!(parse_complex("fish").is_err());
    }

    #[test]
    fn table_text_parses() {
        let table = parse_table("# header\n0 1.0\n0.5 0.8\n\n1.0 0.6 # tail\n").unwrap();
        assert_eq!(table, vec![(0.0, 1.0), (0.5, 0.8), (1.0, 0.6)]);
        assert!(parse_table("0 1 2\n").is_err());
        assert!(parse_table("0 x\n").is_err());
    }

    #[test]
    fn grid_scales() {
        let lin = GridSpec {
            start: 0.0,
            stop: 3.0,
            count: 4,
            scale: GridScale::Linear,
        };
        assert_eq!(lin.build().unwrap(), vec![0.0, 1.0, 2.0, 3.0]);
        let log = GridSpec {
            start: 1.0,
            stop: 100.0,
            count: 3,
            scale: GridScale::Log,
        };
        let g = log.build().unwrap();
        assert!((g[1] - 10.0).abs() < 1e-12);
        let bad = GridSpec {
            start: 0.0,
            stop: 1.0,
            count: 3,
            scale: GridScale::Log,
        };
        assert!(bad.build().is_err());
        let bad = GridSpec {
            start: 1.0,
            stop: 1.0,
            count: 3,
            scale: GridScale::Linear,
        };
        assert!(bad.build().is_err());
    }
}
