//! Flat `key=value` sweep configuration.
//!
//! ```text
//! # paper fixture
//! b=10
//! delta=0.01,0.001
//! dt=auto
//! k=1,5,20
//! xi=0.5
//! mode=both
//! ```
//!
//! Lists are comma separated. Blank lines and `#` comments are ignored.
//! Ranges for the optimizer are written `lo..hi`.

use std::collections::HashSet;
use std::path::PathBuf;

use crate::error::{LabError, Result};
use crate::paperform::ScalingQuantity;
use crate::protocol::{AccountingMode, DtChoice};
use crate::qcore::MeasurementDirection;

/// Default number of significant digits in reports.
pub const DEFAULT_DIGITS: usize = 17;

/// How the candidate amplitudes are specified: by `b` (with `a` solved from
/// normalization) or by `a` (with `b` solved per `δ`).
#[derive(Debug, Clone, PartialEq)]
pub enum AmplitudeGrid {
    B(Vec<f64>),
    A(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq)]
pub enum DtGrid {
    Auto,
    Explicit(Vec<f64>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModeSelection {
    Exact,
    Paper,
    Both,
}

impl ModeSelection {
    pub fn parse(text: &str) -> Option<Self> {
        match text.trim() {
            "exact" => Some(ModeSelection::Exact),
            "paper" => Some(ModeSelection::Paper),
            "both" => Some(ModeSelection::Both),
            _ => None,
        }
    }

    pub fn modes(self) -> Vec<AccountingMode> {
        match self {
            ModeSelection::Exact => vec![AccountingMode::Exact],
            ModeSelection::Paper => vec![AccountingMode::Paper],
            ModeSelection::Both => vec![AccountingMode::Exact, AccountingMode::Paper],
        }
    }

    pub fn includes(self, mode: AccountingMode) -> bool {
        self.modes().contains(&mode)
    }
}

/// Search box for the optimizer. `None` means the variable is held fixed.
#[derive(Debug, Clone, PartialEq)]
pub struct OptimizeRanges {
    pub k: Option<(usize, usize)>,
    pub dt: Option<(f64, f64)>,
    pub dt_points: usize,
}

impl Default for OptimizeRanges {
    fn default() -> Self {
        OptimizeRanges {
            k: None,
            dt: None,
            dt_points: 41,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    pub amplitude: AmplitudeGrid,
    pub deltas: Vec<f64>,
    pub dt: DtGrid,
    pub ks: Vec<usize>,
    pub priors: Vec<f64>,
    pub e0: f64,
    pub e1: f64,
    pub direction: MeasurementDirection,
    pub mode: ModeSelection,
    pub output: Option<PathBuf>,
    pub digits: usize,
    pub quantities: Vec<ScalingQuantity>,
    pub optimize: OptimizeRanges,
}

impl SweepConfig {
    /// Number of parameter tuples in the Cartesian product.
    pub fn grid_size(&self) -> usize {
        let amps = match &self.amplitude {
            AmplitudeGrid::B(v) | AmplitudeGrid::A(v) => v.len(),
        };
        let dts = match &self.dt {
            DtGrid::Auto => 1,
            DtGrid::Explicit(v) => v.len(),
        };
        amps * self.deltas.len() * dts * self.ks.len() * self.priors.len()
    }

    pub fn dt_choices(&self) -> Vec<DtChoice> {
        match &self.dt {
            DtGrid::Auto => vec![DtChoice::Auto],
            DtGrid::Explicit(v) => v.iter().map(|&dt| DtChoice::Fixed(dt)).collect(),
        }
    }
}

const KEYS: &[&str] = &[
    "a",
    "b",
    "delta",
    "dt",
    "k",
    "xi",
    "e0",
    "e1",
    "direction",
    "mode",
    "out",
    "digits",
    "quantity",
    "optimize_k",
    "optimize_dt",
    "optimize_dt_points",
];

fn err(line: usize, message: impl Into<String>) -> LabError {
    LabError::Config {
        line,
        message: message.into(),
    }
}

fn parse_f64(line: usize, key: &str, text: &str) -> Result<f64> {
    let v: f64 = text
        .trim()
        .parse()
        .map_err(|_| err(line, format!("{key}: '{}' is not a number", text.trim())))?;
    if !v.is_finite() {
        return Err(err(line, format!("{key}: value must be finite")));
    }
    Ok(v)
}

fn parse_list<T>(
    line: usize,
    key: &str,
    value: &str,
    item: impl Fn(&str) -> Result<T>,
) -> Result<Vec<T>> {
    let items: Vec<&str> = value.split(',').map(str::trim).collect();
    if items.iter().any(|s| s.is_empty()) {
        return Err(err(line, format!("{key}: empty list entry")));
    }
    items.into_iter().map(item).collect()
}

fn parse_f64_list(line: usize, key: &str, value: &str) -> Result<Vec<f64>> {
    parse_list(line, key, value, |s| parse_f64(line, key, s))
}

fn parse_usize(line: usize, key: &str, text: &str) -> Result<usize> {
    text.trim().parse().map_err(|_| {
        err(
            line,
            format!("{key}: '{}' is not a non-negative integer", text.trim()),
        )
    })
}

fn parse_range<T>(
    line: usize,
    key: &str,
    value: &str,
    item: impl Fn(&str) -> Result<T>,
) -> Result<(T, T)> {
    let (lo, hi) = value
        .split_once("..")
        .ok_or_else(|| err(line, format!("{key}: expected a range 'lo..hi'")))?;
    Ok((item(lo)?, item(hi)?))
}

/// Parses and validates a sweep configuration.
pub fn parse_config(text: &str) -> Result<SweepConfig> {
    let mut seen = HashSet::new();
    let mut a = None;
    let mut b = None;
    let mut deltas = None;
    let mut dt = DtGrid::Auto;
    let mut ks = None;
    let mut priors = vec![0.5];
    let mut e0 = 0.0;
    let mut e1 = 0.0;
    let mut direction = MeasurementDirection::protocol_default();
    let mut mode = ModeSelection::Both;
    let mut output = None;
    let mut digits = DEFAULT_DIGITS;
    let mut quantities = ScalingQuantity::ALL.to_vec();
    let mut optimize = OptimizeRanges::default();

    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let (key, value) = content
            .split_once('=')
            .ok_or_else(|| err(line, format!("expected key=value, found '{content}'")))?;
        let (key, value) = (key.trim(), value.trim());
        if !KEYS.contains(&key) {
            return Err(err(line, format!("unknown key '{key}'")));
        }
        if !seen.insert(key.to_string()) {
            return Err(err(line, format!("duplicate key '{key}'")));
        }
        if value.is_empty() {
            return Err(err(line, format!("{key}: empty value")));
        }
        match key {
            "a" => {
                let v = parse_f64_list(line, key, value)?;
                if let Some(x) = v.iter().find(|x| !(**x > 0.0 && **x <= 1.0)) {
                    return Err(err(line, format!("a: {x} outside (0, 1]")));
                }
                a = Some((line, v));
            }
            "b" => {
                let v = parse_f64_list(line, key, value)?;
                if let Some(x) = v.iter().find(|x| **x < 0.0) {
                    return Err(err(line, format!("b: {x} is negative")));
                }
                b = Some((line, v));
            }
            "delta" => {
                let v = parse_f64_list(line, key, value)?;
                if let Some(x) = v.iter().find(|x| **x < 0.0) {
                    return Err(err(line, format!("delta: {x} is negative")));
                }
                deltas = Some(v);
            }
            "dt" => {
                dt = if value == "auto" {
                    DtGrid::Auto
                } else {
                    if value.split(',').any(|s| s.trim() == "auto") {
                        return Err(err(line, "dt: 'auto' cannot be mixed with explicit values"));
                    }
                    let v = parse_f64_list(line, key, value)?;
                    if let Some(x) = v.iter().find(|x| **x <= 0.0) {
                        return Err(err(line, format!("dt: {x} must be positive")));
                    }
                    DtGrid::Explicit(v)
                };
            }
            "k" => {
                let v = parse_list(line, key, value, |s| parse_usize(line, key, s))?;
                if v.contains(&0) {
                    return Err(err(line, "k: iteration counts must be at least 1"));
                }
                ks = Some(v);
            }
            "xi" => {
                let v = parse_f64_list(line, key, value)?;
                if let Some(x) = v.iter().find(|x| !(0.0..=1.0).contains(*x)) {
                    return Err(err(line, format!("xi: prior {x} outside [0, 1]")));
                }
                priors = v;
            }
            "e0" => e0 = parse_f64(line, key, value)?,
            "e1" => e1 = parse_f64(line, key, value)?,
            "direction" => {
                let v = parse_f64_list(line, key, value)?;
                if v.len() != 5 {
                    return Err(err(line, "direction: expected 5 components"));
                }
                direction = MeasurementDirection::from_real(&v)
                    .map_err(|e| err(line, format!("direction: {e}")))?;
            }
            "mode" => {
                mode = ModeSelection::parse(value).ok_or_else(|| {
                    err(
                        line,
                        format!("mode: expected exact|paper|both, got '{value}'"),
                    )
                })?;
            }
            "out" => output = Some(PathBuf::from(value)),
            "digits" => {
                digits = parse_usize(line, key, value)?;
                if !(1..=17).contains(&digits) {
                    return Err(err(line, "digits: must lie in 1..=17"));
                }
            }
            "quantity" => {
                quantities = if value == "all" {
                    ScalingQuantity::ALL.to_vec()
                } else {
                    parse_list(line, key, value, |s| {
                        ScalingQuantity::from_key(s)
                            .ok_or_else(|| err(line, format!("quantity: unknown '{s}'")))
                    })?
                };
            }
            "optimize_k" => {
                let (lo, hi) = parse_range(line, key, value, |s| parse_usize(line, key, s))?;
                if lo == 0 || lo > hi {
                    return Err(err(
                        line,
                        format!("optimize_k: empty or invalid range {lo}..{hi}"),
                    ));
                }
                optimize.k = Some((lo, hi));
            }
            "optimize_dt" => {
                let (lo, hi) = parse_range(line, key, value, |s| parse_f64(line, key, s))?;
                if lo <= 0.0 || lo > hi {
                    return Err(err(
                        line,
                        format!("optimize_dt: empty or invalid range {lo}..{hi}"),
                    ));
                }
                optimize.dt = Some((lo, hi));
            }
            "optimize_dt_points" => {
                optimize.dt_points = parse_usize(line, key, value)?;
                if optimize.dt_points < 2 {
                    return Err(err(line, "optimize_dt_points: need at least 2"));
                }
            }
            _ => unreachable!("key list checked above"),
        }
    }

    let last_line = text.lines().count().max(1);
    let amplitude = match (a, b) {
        (Some(_), Some((line, _))) => {
            return Err(err(line, "'a' and 'b' are mutually exclusive"));
        }
        (Some((_, v)), None) => AmplitudeGrid::A(v),
        (None, Some((_, v))) => AmplitudeGrid::B(v),
        (None, None) => return Err(err(last_line, "missing amplitude grid: set 'b' or 'a'")),
    };
    let deltas = deltas.ok_or_else(|| err(last_line, "missing key 'delta'"))?;
    let ks = ks.ok_or_else(|| err(last_line, "missing key 'k'"))?;

    Ok(SweepConfig {
        amplitude,
        deltas,
        dt,
        ks,
        priors,
        e0,
        e1,
        direction,
        mode,
        output,
        digits,
        quantities,
        optimize,
    })
}
