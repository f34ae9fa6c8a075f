//! Request and response documents.

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use leafrf_core::discrete::ToleranceSpec;
use leafrf_core::ladder::{Dip, MatchingNetwork, Placement, SweepPoint};
use leafrf_core::rfcore::{Impedance, ReflectionCoefficient};
use leafrf_core::synth::{MatchSolution, SmithArc};

/// A number in SI base units, or text in the unit grammar (`915MHz`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Quantity {
    Number(f64),
    Text(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum LoadSpec {
    Constant {
        resistance: f64,
        #[serde(default)]
        reactance: f64,
    },
    Resonator { r_series: Quantity, l: Quantity, c: Quantity },
    /// Touchstone v1.0 one-port file contents.
    S1p { text: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CreateSession {
    #[serde(default)]
    pub z0: Option<f64>,
    pub f0: Quantity,
    pub load: LoadSpec,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PushElement {
    /// `inductor`/`L`, `capacitor`/`C` or `resistor`/`R`.
    pub kind: String,
    pub placement: Placement,
    pub value: Quantity,
    #[serde(default)]
    pub q: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Discretize {
    #[serde(default)]
    pub series: Option<String>,
    #[serde(default)]
    pub k: Option<usize>,
    #[serde(default)]
    pub runner_ups: Option<usize>,
    #[serde(default)]
    pub tolerance: Option<ToleranceSpec>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SweepQuery {
    pub from: Option<String>,
    pub to: Option<String>,
    pub points: Option<usize>,
}

/// Everything the chart needs; the client does no RF arithmetic.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionState {
    pub id: String,
    pub z0: f64,
    pub f0: f64,
    /// `constant`, `resonator` or `measured`.
    pub load_kind: String,
    pub load_impedance: Impedance,
    /// Γ of the bare load: where the trajectory starts.
    pub start_gamma: ReflectionCoefficient,
    pub elements: MatchingNetwork,
    pub topology_label: String,
    pub input_impedance: Impedance,
    pub gamma: ReflectionCoefficient,
    pub s11_db: f64,
    pub arcs: Vec<SmithArc>,
    /// Extensions that would finish the match from the current stack.
    pub suggestions: Vec<MatchSolution>,
    pub created: DateTime<Utc>,
    pub updated: DateTime<Utc>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Created {
    pub id: String,
    pub state: SessionState,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResponse {
    pub points: Vec<SweepPoint>,
    pub dip: Dip,
}
