//! Unit-suffix grammar shared by the CLI and the session service.
//!
//! ```text
//! quantity  := number [prefix] [unit]
//! prefix    := f | p | n | u | µ | m | k | M | G | T     (case-sensitive)
//! unit      := Hz | H | F | ohm | Ω | W | V | s
//! impedance := real | real (+|-) imag j | imag j | real (+|-) j imag
//! ```
//!
//! Examples: `915MHz`, `6.8nH`, `1.2pF`, `50ohm`, `25-10j`.

use std::fmt;

use thiserror::Error;

use crate::rfcore::Impedance;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum UnitError {
    #[error("empty value")]
    Empty,
    #[error("cannot parse {0:?} as a number")]
    BadNumber(String),
    #[error("expected a value in {expected}, got {input:?}")]
    WrongUnit { input: String, expected: &'static str },
    #[error("cannot parse {0:?} as an impedance (expected e.g. 25-10j)")]
    BadImpedance(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Unit {
    Hertz,
    Henry,
    Farad,
    Ohm,
    Watt,
    Volt,
    Second,
}

impl Unit {
    pub fn symbol(self) -> &'static str {
        match self {
            Unit::Hertz => "Hz",
            Unit::Henry => "H",
            Unit::Farad => "F",
            Unit::Ohm => "ohm",
            Unit::Watt => "W",
            Unit::Volt => "V",
            Unit::Second => "s",
        }
    }
}

// Longer symbols first so "Hz" is not read as "H".
const UNIT_SUFFIXES: &[(&str, Unit)] = &[
    ("ohm", Unit::Ohm),
    ("Ω", Unit::Ohm),
    ("Hz", Unit::Hertz),
    ("H", Unit::Henry),
    ("F", Unit::Farad),
    ("W", Unit::Watt),
    ("V", Unit::Volt),
    ("s", Unit::Second),
];

const PREFIXES: &[(char, f64)] = &[
    ('f', 1e-15),
    ('p', 1e-12),
    ('n', 1e-9),
    ('u', 1e-6),
    ('µ', 1e-6),
    ('μ', 1e-6),
    ('m', 1e-3),
    ('k', 1e3),
    ('M', 1e6),
    ('G', 1e9),
    ('T', 1e12),
];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quantity {
    /// SI value.
    pub value: f64,
    pub unit: Option<Unit>,
}

fn parse_number(text: &str, original: &str) -> Result<f64, UnitError> {
    let v: f64 = text
        .trim()
        .parse()
        .map_err(|_| UnitError::BadNumber(original.to_string()))?;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(UnitError::BadNumber(original.to_string()))
    }
}

/// Applies an SI prefix by shifting the decimal exponent, so `6.8n` is
/// exactly the double nearest to 6.8×10⁻⁹.
pub(crate) fn scaled(number: &str, exponent: i32, original: &str) -> Result<f64, UnitError> {
    parse_number(number, original)?;
    let shifted = match number.find(['e', 'E']) {
        Some(pos) => {
            let mantissa = &number[..pos];
            let exp: i32 = number[pos + 1..]
                .parse()
                .map_err(|_| UnitError::BadNumber(original.to_string()))?;
            let exp = exp.checked_add(exponent).ok_or_else(|| UnitError::BadNumber(original.to_string()))?;
            format!("{mantissa}e{exp}")
        }
        None => format!("{number}e{exponent}"),
    };
    parse_number(&shifted, original)
}

fn prefix_exponent(scale: f64) -> i32 {
    scale.log10().round() as i32
}

pub fn parse_quantity(input: &str) -> Result<Quantity, UnitError> {
    let s = input.trim();
    if s.is_empty() {
        return Err(UnitError::Empty);
    }
    let (rest, unit) = UNIT_SUFFIXES
        .iter()
        .find_map(|(sym, unit)| s.strip_suffix(sym).map(|r| (r.trim_end(), Some(*unit))))
        .unwrap_or((s, None));
    if rest.is_empty() {
        return Err(UnitError::BadNumber(input.to_string()));
    }
    let last = rest.chars().next_back().expect("nonempty");
    if let Some((_, scale)) = PREFIXES.iter().find(|(p, _)| *p == last) {
        let number = &rest[..rest.len() - last.len_utf8()];
        let value = scaled(number.trim_end(), prefix_exponent(*scale), input)?;
        return Ok(Quantity { value, unit });
    }
    Ok(Quantity { value: parse_number(rest, input)?, unit })
}

fn parse_expecting(input: &str, unit: Unit, expected: &'static str) -> Result<f64, UnitError> {
    let q = parse_quantity(input)?;
    match q.unit {
        Some(u) if u != unit => Err(UnitError::WrongUnit { input: input.to_string(), expected }),
        _ => Ok(q.value),
    }
}

/// `915MHz`, `0.915GHz`, `915e6` (bare numbers are hertz).
pub fn parse_frequency_hz(input: &str) -> Result<f64, UnitError> {
    parse_expecting(input, Unit::Hertz, "Hz")
}

pub fn parse_inductance(input: &str) -> Result<f64, UnitError> {
    parse_expecting(input, Unit::Henry, "H")
}

pub fn parse_capacitance(input: &str) -> Result<f64, UnitError> {
    parse_expecting(input, Unit::Farad, "F")
}

pub fn parse_resistance(input: &str) -> Result<f64, UnitError> {
    parse_expecting(input, Unit::Ohm, "ohm")
}

/// Parses `R±Xj` literals such as `25-10j`, `50+0j`, `-10j`, `25-j10`, `50`.
pub fn parse_impedance(input: &str) -> Result<Impedance, UnitError> {
    let bad = || UnitError::BadImpedance(input.to_string());
    let mut s: String = input.chars().filter(|c| !c.is_whitespace()).collect();
    for suffix in ["ohm", "Ω"] {
        if let Some(r) = s.strip_suffix(suffix) {
            s = r.to_string();
        }
    }
    if s.is_empty() {
        return Err(bad());
    }
    let imag_term = |t: &str| -> Result<f64, UnitError> {
        // t carries its sign; accepts "10j", "j10", "-j10", "+10j", "j"
        let (sign, body) = match t.as_bytes().first() {
            Some(b'-') => (-1.0, &t[1..]),
            Some(b'+') => (1.0, &t[1..]),
            _ => (1.0, t),
        };
        let digits = body
            .strip_suffix('j')
            .or_else(|| body.strip_prefix('j'))
            .ok_or_else(bad)?;
        let v = if digits.is_empty() { 1.0 } else { digits.parse::<f64>().map_err(|_| bad())? };
        if v.is_finite() {
            Ok(sign * v)
        } else {
            Err(bad())
        }
    };
    if !s.contains('j') {
        let r: f64 = s.parse().map_err(|_| bad())?;
        return if r.is_finite() { Ok(Impedance::new(r, 0.0)) } else { Err(bad()) };
    }
    // split at the last sign that is not a leading sign or an exponent sign
    let bytes = s.as_bytes();
    let split = (1..bytes.len())
        .rev()
        .find(|&i| (bytes[i] == b'+' || bytes[i] == b'-') && !matches!(bytes[i - 1], b'e' | b'E'));
    match split {
        Some(i) => {
            let r: f64 = s[..i].parse().map_err(|_| bad())?;
            if !r.is_finite() {
                return Err(bad());
            }
            Ok(Impedance::new(r, imag_term(&s[i..])?))
        }
        None => Ok(Impedance::new(0.0, imag_term(&s)?)),
    }
}

/// Engineering formatting: `6.8e-9, "H"` → `6.8 nH`.
pub fn format_si(value: f64, unit: &str) -> String {
    SiDisplay { value, unit }.to_string()
}

struct SiDisplay<'a> {
    value: f64,
    unit: &'a str,
}

impl fmt::Display for SiDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        const STEPS: &[(i32, &str)] = &[
            (-15, "f"),
            (-12, "p"),
            (-9, "n"),
            (-6, "u"),
            (-3, "m"),
            (0, ""),
            (3, "k"),
            (6, "M"),
            (9, "G"),
            (12, "T"),
        ];
        if self.value == 0.0 || !self.value.is_finite() {
            return write!(f, "{} {}", self.value, self.unit);
        }
        let exp = self.value.abs().log10().floor() as i32;
        let (e, p) = STEPS
            .iter()
            .rev()
            .find(|(e, _)| *e <= exp)
            .copied()
            .unwrap_or(STEPS[0]);
        let mantissa = self.value / 10f64.powi(e);
        // 4 significant digits, trailing zeros trimmed
        let digits = (3 - (mantissa.abs().log10().floor() as i32)).clamp(0, 6) as usize;
        let mut text = format!("{mantissa:.digits$}");
        if text.contains('.') {
            text = text.trim_end_matches('0').trim_end_matches('.').to_string();
        }
        write!(f, "{text} {p}{}", self.unit)
    }
}

/// `%g`-style formatting with `sig` significant digits.
pub fn format_sig(value: f64, sig: usize) -> String {
    if value == 0.0 {
        return "0".to_string();
    }
    if !value.is_finite() {
        return value.to_string();
    }
    let sig = sig.max(1);
    let exp = value.abs().log10().floor() as i32;
    let trim = |s: String| -> String {
        if s.contains('.') {
            s.trim_end_matches('0').trim_end_matches('.').to_string()
        } else {
            s
        }
    };
    if exp < -4 || exp >= sig as i32 {
        let s = format!("{:.*e}", sig - 1, value);
        let (m, e) = s.split_once('e').expect("exponent form");
        format!("{}e{}", trim(m.to_string()), e)
    } else {
        let decimals = (sig as i32 - 1 - exp).max(0) as usize;
        trim(format!("{value:.decimals$}"))
    }
}
