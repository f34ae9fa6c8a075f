//! One-port Touchstone v1.0 (`.s1p`) reader and writer.
//!
//! Grammar accepted by [`parse_touchstone`]:
//!
//! ```text
//! ! comment (anything after '!' on any line)
//! # <Hz|kHz|MHz|GHz> S <RI|MA|DB> R <ohms>      option line, tokens in any order,
//!                                              case-insensitive; defaults GHz, MA, R 50
//! <freq> <a> <b>                               one data row per line
//! ```
//!
//! `RI` is real/imaginary, `MA` magnitude/angle in degrees, `DB` is
//! `20·log₁₀|Γ|`/angle in degrees. Everything is normalized to complex Γ
//! and hertz on the way in; downstream code never sees the file format.
//! Keyword lines (`[Version] 2.0`, ...) are rejected.

use std::fmt;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::rfcore::{Frequency, ReflectionCoefficient, S11_FLOOR_DB};
use crate::units;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TouchstoneError {
    #[error("line {line}: malformed option line: {reason}")]
    MalformedOption { line: usize, reason: String },
    #[error("line {line}: frequency {frequency_hz} Hz does not increase (previous {previous_hz} Hz)")]
    NonMonotonic { line: usize, frequency_hz: f64, previous_hz: f64 },
    #[error("line {line}: expected 3 columns for a one-port row, found {found}")]
    ColumnCount { line: usize, found: usize },
    #[error("line {line}: non-numeric token {token:?}")]
    NonNumeric { line: usize, token: String },
    #[error("line {line}: file contains no data rows")]
    EmptyData { line: usize },
    #[error("line {line}: frequency must be positive, got {frequency_hz} Hz")]
    NonPositiveFrequency { line: usize, frequency_hz: f64 },
    #[error("line {line}: Touchstone 2.0 keyword {keyword} is not supported (v1.0 one-port only)")]
    Version2 { line: usize, keyword: String },
    #[error("dataset must contain at least one row")]
    EmptyRows,
    #[error("row {index}: frequencies must be positive and strictly increasing")]
    RowsNotIncreasing { index: usize },
    #[error("row {index}: reflection coefficient is not finite")]
    NonFiniteRow { index: usize },
    #[error("reference resistance must be positive, got {0}")]
    BadReference(f64),
    #[error("{frequency_hz} Hz is outside the measured range {min_hz}..={max_hz} Hz")]
    OutOfRange { frequency_hz: f64, min_hz: f64, max_hz: f64 },
}

impl TouchstoneError {
    /// 1-based source line, for parse errors.
    pub fn line(&self) -> Option<usize> {
        match self {
            TouchstoneError::MalformedOption { line, .. }
            | TouchstoneError::NonMonotonic { line, .. }
            | TouchstoneError::ColumnCount { line, .. }
            | TouchstoneError::NonNumeric { line, .. }
            | TouchstoneError::EmptyData { line }
            | TouchstoneError::NonPositiveFrequency { line, .. }
            | TouchstoneError::Version2 { line, .. } => Some(*line),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum FrequencyUnit {
    Hz,
    #[serde(rename = "kHz")]
    KHz,
    MHz,
    GHz,
}

impl FrequencyUnit {
    pub const ALL: [FrequencyUnit; 4] = [FrequencyUnit::Hz, FrequencyUnit::KHz, FrequencyUnit::MHz, FrequencyUnit::GHz];

    /// Power of ten relating the unit to hertz.
    pub fn exponent(self) -> i32 {
        match self {
            FrequencyUnit::Hz => 0,
            FrequencyUnit::KHz => 3,
            FrequencyUnit::MHz => 6,
            FrequencyUnit::GHz => 9,
        }
    }

    fn parse(token: &str) -> Option<Self> {
        match token.to_ascii_uppercase().as_str() {
            "HZ" => Some(FrequencyUnit::Hz),
            "KHZ" => Some(FrequencyUnit::KHz),
            "MHZ" => Some(FrequencyUnit::MHz),
            "GHZ" => Some(FrequencyUnit::GHz),
            _ => None,
        }
    }
}

impl fmt::Display for FrequencyUnit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FrequencyUnit::Hz => "Hz",
            FrequencyUnit::KHz => "kHz",
            FrequencyUnit::MHz => "MHz",
            FrequencyUnit::GHz => "GHz",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum DataFormat {
    RI,
    MA,
    DB,
}

impl DataFormat {
    pub const ALL: [DataFormat; 3] = [DataFormat::RI, DataFormat::MA, DataFormat::DB];

    fn parse(token: &str) -> Option<Self> {
        match token.to_ascii_uppercase().as_str() {
            "RI" => Some(DataFormat::RI),
            "MA" => Some(DataFormat::MA),
            "DB" => Some(DataFormat::DB),
            _ => None,
        }
    }

    fn decode(self, a: f64, b: f64) -> ReflectionCoefficient {
        match self {
            DataFormat::RI => ReflectionCoefficient::new(a, b),
            DataFormat::MA => ReflectionCoefficient::from_polar_deg(a, b),
            DataFormat::DB => ReflectionCoefficient::from_polar_deg(10f64.powf(a / 20.0), b),
        }
    }

    fn encode(self, g: ReflectionCoefficient) -> (f64, f64) {
        match self {
            DataFormat::RI => (g.re, g.im),
            DataFormat::MA => (g.magnitude(), g.angle_deg()),
            DataFormat::DB => {
                let mag = g.magnitude();
                let db = if mag > 0.0 { (20.0 * mag.log10()).max(S11_FLOOR_DB) } else { S11_FLOOR_DB };
                (db, g.angle_deg())
            }
        }
    }
}

impl fmt::Display for DataFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TouchstoneRow {
    pub frequency_hz: f64,
    pub s11: ReflectionCoefficient,
}

/// Parsed one-port file. Rows are nonempty with strictly increasing
/// frequencies; `frequency_unit` and `format` record how the source file
/// was written.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "DatasetDoc")]
pub struct TouchstoneDataset {
    frequency_unit: FrequencyUnit,
    format: DataFormat,
    reference_resistance: f64,
    rows: Vec<TouchstoneRow>,
}

#[derive(Deserialize)]
struct DatasetDoc {
    frequency_unit: FrequencyUnit,
    format: DataFormat,
    reference_resistance: f64,
    rows: Vec<TouchstoneRow>,
}

impl TryFrom<DatasetDoc> for TouchstoneDataset {
    type Error = TouchstoneError;
    fn try_from(d: DatasetDoc) -> Result<Self, Self::Error> {
        TouchstoneDataset::new(d.frequency_unit, d.format, d.reference_resistance, d.rows)
    }
}

impl TouchstoneDataset {
    pub fn new(
        frequency_unit: FrequencyUnit,
        format: DataFormat,
        reference_resistance: f64,
        rows: Vec<TouchstoneRow>,
    ) -> Result<Self, TouchstoneError> {
        if !(reference_resistance.is_finite() && reference_resistance > 0.0) {
            return Err(TouchstoneError::BadReference(reference_resistance));
        }
        if rows.is_empty() {
            return Err(TouchstoneError::EmptyRows);
        }
        let mut prev = 0.0;
        for (index, r) in rows.iter().enumerate() {
            if !(r.frequency_hz.is_finite() && r.frequency_hz > prev) {
                return Err(TouchstoneError::RowsNotIncreasing { index });
            }
            if !(r.s11.re.is_finite() && r.s11.im.is_finite()) {
                return Err(TouchstoneError::NonFiniteRow { index });
            }
            prev = r.frequency_hz;
        }
        Ok(TouchstoneDataset { frequency_unit, format, reference_resistance, rows })
    }

    pub fn frequency_unit(&self) -> FrequencyUnit {
        self.frequency_unit
    }

    pub fn format(&self) -> DataFormat {
        self.format
    }

    pub fn reference_resistance(&self) -> f64 {
        self.reference_resistance
    }

    pub fn rows(&self) -> &[TouchstoneRow] {
        &self.rows
    }

    pub fn frequency_range(&self) -> (f64, f64) {
        (self.rows[0].frequency_hz, self.rows[self.rows.len() - 1].frequency_hz)
    }
}

struct OptionLine {
    unit: FrequencyUnit,
    format: DataFormat,
    resistance: f64,
}

impl Default for OptionLine {
    fn default() -> Self {
        OptionLine { unit: FrequencyUnit::GHz, format: DataFormat::MA, resistance: 50.0 }
    }
}

fn parse_option_line(body: &str, line: usize) -> Result<OptionLine, TouchstoneError> {
    let malformed = |reason: String| TouchstoneError::MalformedOption { line, reason };
    let mut opt = OptionLine::default();
    let (mut seen_unit, mut seen_param, mut seen_format, mut seen_r) = (false, false, false, false);
    let mut tokens = body.split_whitespace();
    while let Some(tok) = tokens.next() {
        if let Some(u) = FrequencyUnit::parse(tok) {
            if std::mem::replace(&mut seen_unit, true) {
                return Err(malformed(format!("duplicate frequency unit {tok:?}")));
            }
            opt.unit = u;
        } else if let Some(f) = DataFormat::parse(tok) {
            if std::mem::replace(&mut seen_format, true) {
                return Err(malformed(format!("duplicate data format {tok:?}")));
            }
            opt.format = f;
        } else {
            match tok.to_ascii_uppercase().as_str() {
                "S" => {
                    if std::mem::replace(&mut seen_param, true) {
                        return Err(malformed("duplicate parameter type".into()));
                    }
                }
                "Y" | "Z" | "H" | "G" => {
                    return Err(malformed(format!("parameter type {tok} is not supported, only S")));
                }
                "R" => {
                    if std::mem::replace(&mut seen_r, true) {
                        return Err(malformed("duplicate reference resistance".into()));
                    }
                    let value = tokens.next().ok_or_else(|| malformed("R must be followed by a resistance".into()))?;
                    let r: f64 = value
                        .parse()
                        .map_err(|_| malformed(format!("reference resistance {value:?} is not a number")))?;
                    if !(r.is_finite() && r > 0.0) {
                        return Err(malformed(format!("reference resistance must be positive, got {value}")));
                    }
                    opt.resistance = r;
                }
                _ => return Err(malformed(format!("unrecognized token {tok:?}"))),
            }
        }
    }
    Ok(opt)
}

fn parse_number(token: &str, line: usize) -> Result<f64, TouchstoneError> {
    match token.parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(v),
        _ => Err(TouchstoneError::NonNumeric { line, token: token.to_string() }),
    }
}

pub fn parse_touchstone(text: &str) -> Result<TouchstoneDataset, TouchstoneError> {
    let mut options: Option<OptionLine> = None;
    let mut raw_rows: Vec<(usize, &str, f64, f64)> = Vec::new();
    let mut line_count = 0;
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        line_count = line;
        let content = raw.split('!').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        if content.starts_with('[') {
            let keyword = content.split(']').next().unwrap_or(content).to_string() + "]";
            return Err(TouchstoneError::Version2 { line, keyword });
        }
        if let Some(body) = content.strip_prefix('#') {
            if !raw_rows.is_empty() {
                return Err(TouchstoneError::MalformedOption {
                    line,
                    reason: "option line must precede the data".into(),
                });
            }
            let parsed = parse_option_line(body, line)?;
            // later option lines are ignored, as in v1.0
            options.get_or_insert(parsed);
            continue;
        }
        let tokens: Vec<&str> = content.split_whitespace().collect();
        if tokens.len() != 3 {
            return Err(TouchstoneError::ColumnCount { line, found: tokens.len() });
        }
        parse_number(tokens[0], line)?;
        let a = parse_number(tokens[1], line)?;
        let b = parse_number(tokens[2], line)?;
        raw_rows.push((line, tokens[0], a, b));
    }
    let opt = options.unwrap_or_default();
    if raw_rows.is_empty() {
        return Err(TouchstoneError::EmptyData { line: line_count.max(1) });
    }
    let mut rows = Vec::with_capacity(raw_rows.len());
    let mut prev: Option<f64> = None;
    for (line, f_raw, a, b) in raw_rows {
        let hz = scale_frequency(f_raw, opt.unit.exponent(), line)?;
        if !(hz > 0.0) {
            return Err(TouchstoneError::NonPositiveFrequency { line, frequency_hz: hz });
        }
        if let Some(p) = prev {
            if !(hz > p) {
                return Err(TouchstoneError::NonMonotonic { line, frequency_hz: hz, previous_hz: p });
            }
        }
        prev = Some(hz);
        let s11 = opt.format.decode(a, b);
        if !(s11.re.is_finite() && s11.im.is_finite()) {
            return Err(TouchstoneError::NonNumeric { line, token: format!("{a} {b}") });
        }
        rows.push(TouchstoneRow { frequency_hz: hz, s11 });
    }
    TouchstoneDataset::new(opt.unit, opt.format, opt.resistance, rows)
}

/// `token × 10^exp`, rounded once from the decimal as written.
fn scale_frequency(token: &str, exp: i32, line: usize) -> Result<f64, TouchstoneError> {
    let bad = || TouchstoneError::NonNumeric { line, token: token.to_string() };
    let out = units::scaled(token, exp, token).map_err(|_| bad())?;
    if out.is_finite() {
        Ok(out)
    } else {
        Err(bad())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct WriteOptions {
    pub format: DataFormat,
    pub frequency_unit: FrequencyUnit,
    /// Emit the `! generated by ...` line with a timestamp. Turn off for
    /// byte-reproducible output.
    pub include_header: bool,
}

impl Default for WriteOptions {
    fn default() -> Self {
        WriteOptions { format: DataFormat::MA, frequency_unit: FrequencyUnit::MHz, include_header: true }
    }
}

/// Shortest round-trip decimal of `v × 10^shift`, in plain notation
/// where that stays short.
fn decimal(v: f64, shift: i32) -> String {
    if v == 0.0 {
        return "0".to_string();
    }
    let sci = format!("{v:e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent form");
    let exp: i32 = exp.parse::<i32>().expect("integer exponent") + shift;
    let (sign, mantissa) = match mantissa.strip_prefix('-') {
        Some(m) => ("-", m),
        None => ("", mantissa),
    };
    let digits: String = mantissa.chars().filter(|c| *c != '.').collect();
    if !(-6..=15).contains(&exp) {
        let (head, tail) = digits.split_at(1);
        return if tail.is_empty() {
            format!("{sign}{head}e{exp}")
        } else {
            format!("{sign}{head}.{tail}e{exp}")
        };
    }
    let point = exp + 1; // digits before the decimal point
    if point <= 0 {
        format!("{sign}0.{}{digits}", "0".repeat((-point) as usize))
    } else if point as usize >= digits.len() {
        format!("{sign}{digits}{}", "0".repeat(point as usize - digits.len()))
    } else {
        let (int, frac) = digits.split_at(point as usize);
        format!("{sign}{int}.{frac}")
    }
}

pub fn write_touchstone(d: &TouchstoneDataset, opts: WriteOptions) -> String {
    let mut out = String::new();
    if opts.include_header {
        let stamp = chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true);
        let _ = writeln!(out, "! generated by leafrf {} at {stamp}", env!("CARGO_PKG_VERSION"));
    }
    let _ = writeln!(
        out,
        "# {} S {} R {}",
        opts.frequency_unit,
        opts.format,
        decimal(d.reference_resistance, 0)
    );
    let shift = -opts.frequency_unit.exponent();
    for row in &d.rows {
        let (a, b) = opts.format.encode(row.s11);
        let _ = writeln!(out, "{} {} {}", decimal(row.frequency_hz, shift), decimal(a, 0), decimal(b, 0));
    }
    out
}

/// Linear interpolation of Γ in the real/imaginary plane. Exact at grid
/// frequencies; no extrapolation.
pub fn interpolate_gamma(d: &TouchstoneDataset, f: Frequency) -> Result<ReflectionCoefficient, TouchstoneError> {
    let hz = f.hertz();
    let (min_hz, max_hz) = d.frequency_range();
    if !(hz >= min_hz && hz <= max_hz) {
        return Err(TouchstoneError::OutOfRange { frequency_hz: hz, min_hz, max_hz });
    }
    let idx = d.rows.partition_point(|r| r.frequency_hz < hz);
    let hi = d.rows[idx];
    if hi.frequency_hz == hz {
        return Ok(hi.s11);
    }
    let lo = d.rows[idx - 1];
    let t = (hz - lo.frequency_hz) / (hi.frequency_hz - lo.frequency_hz);
    let g0 = lo.s11.as_complex();
    let g1 = hi.s11.as_complex();
    Ok(ReflectionCoefficient::from_complex(g0 + (g1 - g0) * t))
}
