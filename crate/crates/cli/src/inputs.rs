//! Turning flags and files into library values. Everything here fails
//! with an input error (exit 2).

use std::path::Path;

use serde::de::DeserializeOwned;

use leafrf_core::ladder::{ComponentKind, LadderElement, LoadProfile, MatchingNetwork, Placement};
use leafrf_core::rfcore::{Frequency, ReferenceImpedance};
use leafrf_core::synth::match_and_verify;
use leafrf_core::touchstone::parse_touchstone;
use leafrf_core::units;

use crate::{Cli, CliError, LoadArgs, NetworkArgs, SweepArgs};

pub fn input(e: impl std::fmt::Display) -> CliError {
    CliError::Input(e.to_string())
}

pub fn compute(e: impl std::fmt::Display) -> CliError {
    CliError::Compute(e.to_string())
}

pub fn read_text(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| input(format!("{}: {e}", path.display())))
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T, CliError> {
    serde_json::from_str(&read_text(path)?).map_err(|e| input(format!("{}: {e}", path.display())))
}

pub fn z0(cli: &Cli) -> Result<ReferenceImpedance, CliError> {
    let ohms = units::parse_resistance(&cli.z0).map_err(input)?;
    ReferenceImpedance::new(ohms).map_err(input)
}

pub fn frequency(text: &str) -> Result<Frequency, CliError> {
    Frequency::new(units::parse_frequency_hz(text).map_err(input)?).map_err(input)
}

pub fn f0(cli: &Cli) -> Result<Frequency, CliError> {
    frequency(&cli.f0)
}

pub fn load(args: &LoadArgs) -> Result<LoadProfile, CliError> {
    if let Some(z) = &args.load {
        return Ok(LoadProfile::Constant(units::parse_impedance(z).map_err(input)?));
    }
    if let Some(path) = &args.s1p {
        let text = read_text(path)?;
        let d = parse_touchstone(&text).map_err(|e| input(format!("{}: {e}", path.display())))?;
        return Ok(LoadProfile::measured(d));
    }
    let spec = args.resonator.as_deref().ok_or_else(|| input("no load given"))?;
    let parts: Vec<&str> = spec.split(',').map(str::trim).collect();
    let [r, l, c] = parts[..] else {
        return Err(input(format!("resonator wants R,L,C, got {spec:?}")));
    };
    LoadProfile::resonator(
        units::parse_resistance(r).map_err(input)?,
        units::parse_inductance(l).map_err(input)?,
        units::parse_capacitance(c).map_err(input)?,
    )
    .map_err(input)
}

/// One `placement:kind:value` item, e.g. `series:L:10nH` or `shunt:C:6.8e-12`.
pub fn element(item: &str) -> Result<LadderElement, CliError> {
    let bad = || input(format!("element {item:?} is not placement:kind:value"));
    let mut it = item.trim().splitn(3, ':');
    let (Some(p), Some(k), Some(v)) = (it.next(), it.next(), it.next()) else {
        return Err(bad());
    };
    let placement = match p.to_ascii_lowercase().as_str() {
        "series" => Placement::Series,
        "shunt" => Placement::Shunt,
        _ => return Err(bad()),
    };
    let kind = match k.to_ascii_uppercase().as_str() {
        "L" => ComponentKind::Inductor(units::parse_inductance(v).map_err(input)?),
        "C" => ComponentKind::Capacitor(units::parse_capacitance(v).map_err(input)?),
        "R" => ComponentKind::Resistor(units::parse_resistance(v).map_err(input)?),
        _ => return Err(bad()),
    };
    LadderElement::new(kind, placement).map_err(input)
}

/// Inverse of [`element`], exact for every value.
pub fn element_spec(e: &LadderElement) -> String {
    format!("{}:{}:{:e}", e.placement(), e.kind().letter(), e.value())
}

pub fn network(args: &NetworkArgs, p: &LoadProfile, z0: ReferenceImpedance, f0: Frequency) -> Result<MatchingNetwork, CliError> {
    if let Some(path) = &args.network {
        return read_json(path);
    }
    if let Some(list) = &args.elements {
        let elements = list.split([',', ';']).filter(|s| !s.trim().is_empty()).map(element).collect::<Result<Vec<_>, _>>()?;
        return MatchingNetwork::new(elements).map_err(input);
    }
    let sols = match_and_verify(p, z0, f0).map_err(compute)?;
    let count = sols.len();
    sols.into_iter()
        .nth(args.solution)
        .map(|s| s.network)
        .ok_or_else(|| input(format!("--solution {} out of range ({count} solutions)", args.solution)))
}

pub fn sweep_spec(args: &SweepArgs) -> Result<leafrf_core::ladder::SweepSpec, CliError> {
    let spec = leafrf_core::ladder::SweepSpec { start: frequency(&args.from)?, stop: frequency(&args.to)?, points: args.points };
    spec.frequencies().map_err(input)?;
    Ok(spec)
}
