//! Lumped-element ladder networks terminated in a frequency-dependent load.
//!
//! A [`MatchingNetwork`] is ordered **from the load toward the source**:
//! element 0 is soldered next to the antenna, the last element faces the
//! 50 Ω feed. Evaluation folds in that order.
//!
//! ```text
//!   source ── e[n-1] ── ... ── e[1] ── e[0] ── load
//! ```

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::rfcore::{
    floor_db, reciprocal, reflection_coefficient, s11_db, Frequency, Impedance,
    ReferenceImpedance, ReflectionCoefficient, RfError,
};
use crate::touchstone::{TouchstoneDataset, TouchstoneError};

/// Sanity bound on ladder length.
pub const MAX_ELEMENTS: usize = 8;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LadderError {
    #[error("component value must be positive and finite, got {0}")]
    BadValue(f64),
    #[error("quality factor must be positive, got {0}")]
    BadQuality(f64),
    #[error("network has {0} elements; at most {MAX_ELEMENTS} are allowed")]
    TooManyElements(usize),
    #[error("unknown component kind {0:?} (expected inductor, capacitor or resistor)")]
    UnknownKind(String),
    #[error("resonator parameters must be positive")]
    BadResonator,
    #[error("degenerate network at {frequency_hz} Hz: {source}")]
    Degenerate { frequency_hz: f64, source: RfError },
    #[error("invalid sweep: {0}")]
    BadSweep(String),
    #[error("sweep is empty")]
    EmptySweep,
    #[error(transparent)]
    Measured(#[from] TouchstoneError),
    #[error(transparent)]
    Rf(#[from] RfError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Placement {
    Series,
    Shunt,
}

impl fmt::Display for Placement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Placement::Series => "series",
            Placement::Shunt => "shunt",
        })
    }
}

/// Component and its value in SI units (H, F, Ω).
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ComponentKind {
    Inductor(f64),
    Capacitor(f64),
    Resistor(f64),
}

impl ComponentKind {
    pub fn value(self) -> f64 {
        match self {
            ComponentKind::Inductor(v) | ComponentKind::Capacitor(v) | ComponentKind::Resistor(v) => v,
        }
    }

    /// Same kind, different value.
    pub fn with_value(self, v: f64) -> ComponentKind {
        match self {
            ComponentKind::Inductor(_) => ComponentKind::Inductor(v),
            ComponentKind::Capacitor(_) => ComponentKind::Capacitor(v),
            ComponentKind::Resistor(_) => ComponentKind::Resistor(v),
        }
    }

    pub fn letter(self) -> char {
        match self {
            ComponentKind::Inductor(_) => 'L',
            ComponentKind::Capacitor(_) => 'C',
            ComponentKind::Resistor(_) => 'R',
        }
    }

    pub fn unit(self) -> &'static str {
        match self {
            ComponentKind::Inductor(_) => "H",
            ComponentKind::Capacitor(_) => "F",
            ComponentKind::Resistor(_) => "ohm",
        }
    }

    fn name(self) -> &'static str {
        match self {
            ComponentKind::Inductor(_) => "inductor",
            ComponentKind::Capacitor(_) => "capacitor",
            ComponentKind::Resistor(_) => "resistor",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ElementDoc", into = "ElementDoc")]
pub struct LadderElement {
    kind: ComponentKind,
    placement: Placement,
    quality_factor: Option<f64>,
}

/// Wire form of an element: `{"kind":"inductor","placement":"series","value":6.8e-9,"q":40}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ElementDoc {
    pub kind: String,
    pub placement: Placement,
    pub value: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub q: Option<f64>,
}

impl TryFrom<ElementDoc> for LadderElement {
    type Error = LadderError;
    fn try_from(doc: ElementDoc) -> Result<Self, Self::Error> {
        let kind = match doc.kind.to_ascii_lowercase().as_str() {
            "inductor" | "l" => ComponentKind::Inductor(doc.value),
            "capacitor" | "c" => ComponentKind::Capacitor(doc.value),
            "resistor" | "r" => ComponentKind::Resistor(doc.value),
            _ => return Err(LadderError::UnknownKind(doc.kind)),
        };
        let e = LadderElement::new(kind, doc.placement)?;
        match doc.q {
            Some(q) => e.with_quality_factor(q),
            None => Ok(e),
        }
    }
}

impl From<LadderElement> for ElementDoc {
    fn from(e: LadderElement) -> ElementDoc {
        ElementDoc {
            kind: e.kind.name().to_string(),
            placement: e.placement,
            value: e.kind.value(),
            q: e.quality_factor,
        }
    }
}

impl LadderElement {
    pub fn new(kind: ComponentKind, placement: Placement) -> Result<Self, LadderError> {
        let v = kind.value();
        if !(v.is_finite() && v > 0.0) {
            return Err(LadderError::BadValue(v));
        }
        Ok(LadderElement { kind, placement, quality_factor: None })
    }

    pub fn series(kind: ComponentKind) -> Result<Self, LadderError> {
        Self::new(kind, Placement::Series)
    }

    pub fn shunt(kind: ComponentKind) -> Result<Self, LadderError> {
        Self::new(kind, Placement::Shunt)
    }

    pub fn with_quality_factor(mut self, q: f64) -> Result<Self, LadderError> {
        if !(q > 0.0) || q.is_nan() {
            return Err(LadderError::BadQuality(q));
        }
        self.quality_factor = if q.is_infinite() { None } else { Some(q) };
        Ok(self)
    }

    /// Same element with a new value (quality factor kept).
    pub fn with_value(self, v: f64) -> Result<Self, LadderError> {
        let mut e = LadderElement::new(self.kind.with_value(v), self.placement)?;
        e.quality_factor = self.quality_factor;
        Ok(e)
    }

    pub fn kind(&self) -> ComponentKind {
        self.kind
    }

    pub fn placement(&self) -> Placement {
        self.placement
    }

    pub fn quality_factor(&self) -> Option<f64> {
        self.quality_factor
    }

    pub fn value(&self) -> f64 {
        self.kind.value()
    }

    /// Short label such as `series-L`.
    pub fn label(&self) -> String {
        format!("{}-{}", self.placement, self.kind.letter())
    }
}

impl fmt::Display for LadderElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} {}",
            self.label(),
            crate::units::format_si(self.kind.value(), self.kind.unit())
        )?;
        if let Some(q) = self.quality_factor {
            write!(f, " (Q={q})")?;
        }
        Ok(())
    }
}

/// Ideal L → jωL, C → −j/(ωC), R → R. A quality factor adds series
/// resistance |X|/Q to reactive elements.
pub fn element_impedance(e: &LadderElement, f: Frequency) -> Impedance {
    let w = f.omega();
    let x = match e.kind {
        ComponentKind::Inductor(l) => w * l,
        ComponentKind::Capacitor(c) => -1.0 / (w * c),
        ComponentKind::Resistor(r) => return Impedance::new(r, 0.0),
    };
    let r = e.quality_factor.map_or(0.0, |q| x.abs() / q);
    Impedance::new(r, x)
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "NetworkDoc", into = "NetworkDoc")]
pub struct MatchingNetwork {
    elements: Vec<LadderElement>,
}

#[derive(Serialize, Deserialize)]
struct NetworkDoc {
    elements: Vec<LadderElement>,
}

impl TryFrom<NetworkDoc> for MatchingNetwork {
    type Error = LadderError;
    fn try_from(doc: NetworkDoc) -> Result<Self, Self::Error> {
        MatchingNetwork::new(doc.elements)
    }
}

impl From<MatchingNetwork> for NetworkDoc {
    fn from(n: MatchingNetwork) -> NetworkDoc {
        NetworkDoc { elements: n.elements }
    }
}

impl MatchingNetwork {
    pub fn new(elements: Vec<LadderElement>) -> Result<Self, LadderError> {
        if elements.len() > MAX_ELEMENTS {
            return Err(LadderError::TooManyElements(elements.len()));
        }
        Ok(MatchingNetwork { elements })
    }

    pub fn empty() -> Self {
        MatchingNetwork::default()
    }

    pub fn elements(&self) -> &[LadderElement] {
        &self.elements
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    /// Appends an element on the source side.
    pub fn push(&mut self, e: LadderElement) -> Result<(), LadderError> {
        if self.elements.len() >= MAX_ELEMENTS {
            return Err(LadderError::TooManyElements(self.elements.len() + 1));
        }
        self.elements.push(e);
        Ok(())
    }

    pub fn pop(&mut self) -> Option<LadderElement> {
        self.elements.pop()
    }

    /// Concatenation: `self` nearest the load, then `outer`.
    pub fn extended(&self, outer: &MatchingNetwork) -> Result<MatchingNetwork, LadderError> {
        let mut v = self.elements.clone();
        v.extend_from_slice(&outer.elements);
        MatchingNetwork::new(v)
    }

    /// Labels joined load→source, e.g. `series-L then shunt-C`.
    pub fn topology_label(&self) -> String {
        if self.elements.is_empty() {
            return "empty".to_string();
        }
        self.elements.iter().map(LadderElement::label).collect::<Vec<_>>().join(" then ")
    }
}

impl fmt::Display for MatchingNetwork {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.elements.is_empty() {
            return f.write_str("(no elements)");
        }
        for (i, e) in self.elements.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{e}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum LoadProfile {
    Constant(Impedance),
    /// Series R-L-C: Z = r + j(ωL − 1/(ωC)).
    Resonator { r_series: f64, l: f64, c: f64 },
    Measured { dataset: Arc<TouchstoneDataset> },
}

impl LoadProfile {
    /// Synthetic antenna used throughout the tests: 10 Ω, 18 nH, 1.2 pF.
    /// Unmatched S11 at 915 MHz is about −2.05 dB; self-resonance sits
    /// near 1.083 GHz. These are fixture constants, not a measured antenna.
    pub const FIXTURE_RESONATOR: LoadProfile =
        LoadProfile::Resonator { r_series: 10.0, l: 18e-9, c: 1.2e-12 };

    pub fn resonator(r_series: f64, l: f64, c: f64) -> Result<Self, LadderError> {
        let p = LoadProfile::Resonator { r_series, l, c };
        p.validate()?;
        Ok(p)
    }

    pub fn measured(dataset: TouchstoneDataset) -> Self {
        LoadProfile::Measured { dataset: Arc::new(dataset) }
    }

    pub fn validate(&self) -> Result<(), LadderError> {
        match self {
            LoadProfile::Constant(z) if !z.is_finite() => Err(RfError::NonFinite("load impedance").into()),
            LoadProfile::Resonator { r_series, l, c } => {
                if [*r_series, *l, *c].iter().all(|v| v.is_finite() && *v > 0.0) {
                    Ok(())
                } else {
                    Err(LadderError::BadResonator)
                }
            }
            _ => Ok(()),
        }
    }
}

pub fn load_impedance(p: &LoadProfile, f: Frequency) -> Result<Impedance, LadderError> {
    match p {
        LoadProfile::Constant(z) => Ok(*z),
        LoadProfile::Resonator { r_series, l, c } => {
            let w = f.omega();
            Ok(Impedance::new(*r_series, w * l - 1.0 / (w * c)))
        }
        LoadProfile::Measured { dataset } => {
            let g = crate::touchstone::interpolate_gamma(dataset, f)?;
            let z0 = ReferenceImpedance::new(dataset.reference_resistance())?;
            g.to_impedance(z0).map_err(|source| LadderError::Degenerate {
                frequency_hz: f.hertz(),
                source,
            })
        }
    }
}

/// Adds one element on the source side of `z`: series adds impedance,
/// shunt adds admittance.
pub fn apply_element(z: Impedance, e: &LadderElement, f: Frequency) -> Result<Impedance, LadderError> {
    let ze = element_impedance(e, f).as_complex();
    let out = match e.placement {
        Placement::Series => z.as_complex() + ze,
        Placement::Shunt => shunt_combine(z.as_complex(), ze)
            .map_err(|source| LadderError::Degenerate { frequency_hz: f.hertz(), source })?,
    };
    Ok(Impedance::from_complex(out))
}

fn shunt_combine(z: Complex64, ze: Complex64) -> Result<Complex64, RfError> {
    let y = reciprocal(z)? + reciprocal(ze)?;
    reciprocal(y)
}

pub fn input_impedance_from(
    n: &MatchingNetwork,
    z_load: Impedance,
    f: Frequency,
) -> Result<Impedance, LadderError> {
    n.elements.iter().try_fold(z_load, |z, e| apply_element(z, e, f))
}

/// Impedance seen from the source side of the network.
pub fn input_impedance(
    n: &MatchingNetwork,
    p: &LoadProfile,
    f: Frequency,
) -> Result<Impedance, LadderError> {
    input_impedance_from(n, load_impedance(p, f)?, f)
}

/// Γ at the source side of `n` over `p`.
pub fn gamma_at(
    n: &MatchingNetwork,
    p: &LoadProfile,
    z0: ReferenceImpedance,
    f: Frequency,
) -> Result<ReflectionCoefficient, LadderError> {
    let z = input_impedance(n, p, f)?;
    reflection_coefficient(z, z0).map_err(|source| LadderError::Degenerate { frequency_hz: f.hertz(), source })
}

/// S11 in dB at a single frequency, clamped to the output floor.
pub fn s11_at(
    n: &MatchingNetwork,
    p: &LoadProfile,
    z0: ReferenceImpedance,
    f: Frequency,
) -> Result<f64, LadderError> {
    gamma_at(n, p, z0, f).map(|g| floor_db(s11_db(g)))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub frequency: Frequency,
    pub gamma: ReflectionCoefficient,
    /// Floored at −200 dB.
    pub s11_db: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub points: Vec<SweepPoint>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    pub start: Frequency,
    pub stop: Frequency,
    pub points: usize,
}

impl Default for SweepSpec {
    /// 201 points over 700–1100 MHz.
    fn default() -> Self {
        SweepSpec {
            start: Frequency::new(700e6).expect("positive"),
            stop: Frequency::new(1100e6).expect("positive"),
            points: 201,
        }
    }
}

impl SweepSpec {
    /// Linear grid, endpoints exact.
    pub fn frequencies(&self) -> Result<Vec<Frequency>, LadderError> {
        let (a, b) = (self.start.hertz(), self.stop.hertz());
        if !(a < b) {
            return Err(LadderError::BadSweep(format!("start {a} Hz must be below stop {b} Hz")));
        }
        if self.points < 2 {
            return Err(LadderError::BadSweep(format!("need at least 2 points, got {}", self.points)));
        }
        let last = self.points - 1;
        let grid: Vec<Frequency> = (0..self.points)
            .map(|i| {
                let hz = if i == last { b } else { a + (b - a) * (i as f64) / (last as f64) };
                Frequency::new(hz)
            })
            .collect::<Result<_, _>>()?;
        if grid.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(LadderError::BadSweep("grid spacing below floating-point resolution".into()));
        }
        Ok(grid)
    }

    pub fn step_hz(&self) -> f64 {
        (self.stop.hertz() - self.start.hertz()) / (self.points.saturating_sub(1).max(1) as f64)
    }
}

/// Evaluates Γ and S11 on a linear grid. Points are computed in parallel;
/// each one is a pure function of its frequency so the result matches a
/// sequential loop exactly.
pub fn sweep_s11(
    n: &MatchingNetwork,
    p: &LoadProfile,
    z0: ReferenceImpedance,
    spec: SweepSpec,
) -> Result<SweepResult, LadderError> {
    let points = spec
        .frequencies()?
        .into_par_iter()
        .map(|f| {
            let gamma = gamma_at(n, p, z0, f)?;
            Ok(SweepPoint { frequency: f, gamma, s11_db: floor_db(s11_db(gamma)) })
        })
        .collect::<Result<Vec<_>, LadderError>>()?;
    Ok(SweepResult { points })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Dip {
    pub frequency: Frequency,
    pub s11_db: f64,
}

/// Grid point with the lowest S11; ties go to the lower frequency.
pub fn find_dip(s: &SweepResult) -> Result<Dip, LadderError> {
    let mut best: Option<&SweepPoint> = None;
    for pt in &s.points {
        if best.is_none_or(|b| pt.s11_db < b.s11_db) {
            best = Some(pt);
        }
    }
    best.map(|b| Dip { frequency: b.frequency, s11_db: b.s11_db }).ok_or(LadderError::EmptySweep)
}
