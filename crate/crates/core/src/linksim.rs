//! Far-field link budget and storage-capacitor charge time versus
//! transmitter distance.
//!
//! Charging uses a constant-power energy balance: the rectifier delivers
//! `η·P_r` until the capacitor reaches its threshold. Absolute times depend
//! on rig parameters (transmit power, gains, capacitance) that are fixtures
//! here; the model reproduces the trend, not measured seconds.

use std::f64::consts::PI;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::rfcore::{Frequency, ReflectionCoefficient};
use crate::units::format_sig;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LinkError {
    #[error("{name} out of range: {value}")]
    Domain { name: &'static str, value: f64 },
    #[error("distance {distance} m is inside the near field (λ = {wavelength} m); the Friis model does not apply")]
    NearField { distance: f64, wavelength: f64 },
    #[error("received power is zero; the capacitor never charges")]
    ZeroPower,
    #[error("efficiency curve must have strictly increasing input powers and efficiencies in (0, 1]")]
    BadCurve,
}

/// Tabulated rectifier efficiency η(P_in), linearly interpolated and held
/// constant beyond the ends.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EfficiencyCurve {
    /// (input power in W, efficiency)
    pub points: Vec<(f64, f64)>,
}

impl EfficiencyCurve {
    pub fn validate(&self) -> Result<(), LinkError> {
        let ok = !self.points.is_empty()
            && self.points.iter().all(|&(p, e)| p.is_finite() && p >= 0.0 && e > 0.0 && e <= 1.0)
            && self.points.windows(2).all(|w| w[1].0 > w[0].0);
        if ok {
            Ok(())
        } else {
            Err(LinkError::BadCurve)
        }
    }

    pub fn at(&self, p_in: f64) -> f64 {
        let pts = &self.points;
        let first = pts[0];
        let last = pts[pts.len() - 1];
        if p_in <= first.0 {
            return first.1;
        }
        if p_in >= last.0 {
            return last.1;
        }
        let i = pts.partition_point(|&(p, _)| p <= p_in);
        let ((p0, e0), (p1, e1)) = (pts[i - 1], pts[i]);
        e0 + (e1 - e0) * (p_in - p0) / (p1 - p0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinkBudget {
    pub tx_power: f64,
    pub tx_gain_dbi: f64,
    pub rx_gain_dbi: f64,
    pub frequency: Frequency,
    #[serde(default = "matched")]
    pub mismatch_gamma: ReflectionCoefficient,
    pub rectifier_efficiency: f64,
    /// Overrides `rectifier_efficiency` when present.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub efficiency_curve: Option<EfficiencyCurve>,
}

fn matched() -> ReflectionCoefficient {
    ReflectionCoefficient::new(0.0, 0.0)
}

impl LinkBudget {
    pub fn validate(&self) -> Result<(), LinkError> {
        if !(self.tx_power.is_finite() && self.tx_power > 0.0) {
            return Err(LinkError::Domain { name: "tx_power", value: self.tx_power });
        }
        for (name, v) in [("tx_gain_dbi", self.tx_gain_dbi), ("rx_gain_dbi", self.rx_gain_dbi)] {
            if !v.is_finite() {
                return Err(LinkError::Domain { name, value: v });
            }
        }
        let eta = self.rectifier_efficiency;
        if !(eta > 0.0 && eta <= 1.0) {
            return Err(LinkError::Domain { name: "rectifier_efficiency", value: eta });
        }
        let g = self.mismatch_gamma.magnitude();
        if !(g <= 1.0) {
            return Err(LinkError::Domain { name: "|mismatch_gamma|", value: g });
        }
        if let Some(c) = &self.efficiency_curve {
            c.validate()?;
        }
        Ok(())
    }

    fn efficiency(&self, p_in: f64) -> f64 {
        match &self.efficiency_curve {
            Some(c) => c.at(p_in),
            None => self.rectifier_efficiency,
        }
    }
}

impl Default for LinkBudget {
    /// Fixture rig: 1 W EIRP-less transmitter, unity-gain antennas, 915 MHz,
    /// matched receiver, 50 % rectifier.
    fn default() -> Self {
        LinkBudget {
            tx_power: 1.0,
            tx_gain_dbi: 0.0,
            rx_gain_dbi: 0.0,
            frequency: Frequency::new(915e6).expect("constant"),
            mismatch_gamma: matched(),
            rectifier_efficiency: 0.5,
            efficiency_curve: None,
        }
    }
}

fn default_threshold() -> f64 {
    4.0
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChargeTank {
    pub capacitance: f64,
    #[serde(default = "default_threshold")]
    pub threshold_volts: f64,
    #[serde(default)]
    pub initial_volts: f64,
}

impl ChargeTank {
    pub fn new(capacitance: f64) -> Self {
        ChargeTank { capacitance, threshold_volts: default_threshold(), initial_volts: 0.0 }
    }

    pub fn validate(&self) -> Result<(), LinkError> {
        if !(self.capacitance.is_finite() && self.capacitance > 0.0) {
            return Err(LinkError::Domain { name: "capacitance", value: self.capacitance });
        }
        if !self.threshold_volts.is_finite() {
            return Err(LinkError::Domain { name: "threshold_volts", value: self.threshold_volts });
        }
        // V0 = Vth is allowed and charges instantly
        if !(self.initial_volts >= 0.0 && self.initial_volts <= self.threshold_volts) {
            return Err(LinkError::Domain { name: "initial_volts", value: self.initial_volts });
        }
        Ok(())
    }

    /// Energy needed to go from the initial to the threshold voltage, J.
    pub fn energy(&self) -> f64 {
        self.capacitance * (self.threshold_volts.powi(2) - self.initial_volts.powi(2)) / 2.0
    }
}

impl Default for ChargeTank {
    fn default() -> Self {
        ChargeTank::new(100e-6)
    }
}

fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

/// Friis received power with the receiver mismatch loss `1 − |Γ|²`.
pub fn received_power(lb: &LinkBudget, d: f64) -> Result<f64, LinkError> {
    lb.validate()?;
    if !(d.is_finite() && d > 0.0) {
        return Err(LinkError::Domain { name: "distance", value: d });
    }
    let lambda = lb.frequency.wavelength();
    if d < lambda {
        return Err(LinkError::NearField { distance: d, wavelength: lambda });
    }
    let path = (lambda / (4.0 * PI * d)).powi(2);
    let mismatch = 1.0 - lb.mismatch_gamma.magnitude().powi(2);
    Ok(lb.tx_power * db_to_linear(lb.tx_gain_dbi) * db_to_linear(lb.rx_gain_dbi) * path * mismatch)
}

/// `t = C·(V_th² − V_0²) / (2·η·P_r)`.
pub fn charge_time_from_power(lb: &LinkBudget, tank: &ChargeTank, p_r: f64) -> Result<f64, LinkError> {
    tank.validate()?;
    if tank.initial_volts == tank.threshold_volts {
        return Ok(0.0);
    }
    if !(p_r > 0.0) {
        return Err(LinkError::ZeroPower);
    }
    Ok(tank.energy() / (lb.efficiency(p_r) * p_r))
}

pub fn charge_time(lb: &LinkBudget, tank: &ChargeTank, d: f64) -> Result<f64, LinkError> {
    let p = received_power(lb, d)?;
    charge_time_from_power(lb, tank, p)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DistanceRow {
    pub distance_m: f64,
    pub received_w: f64,
    pub charge_s: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistanceSweepResult {
    pub rows: Vec<DistanceRow>,
}

/// Number of rows in `start, start+step, … ≤ stop`, with a small slack so
/// decimal steps like 0.25 land on the stop value.
pub fn sweep_len(start: f64, stop: f64, step: f64) -> usize {
    ((stop - start) / step + 1e-9).floor() as usize + 1
}

pub fn distance_sweep(
    lb: &LinkBudget,
    tank: &ChargeTank,
    start: f64,
    stop: f64,
    step: f64,
) -> Result<DistanceSweepResult, LinkError> {
    if !(start.is_finite() && start > 0.0) {
        return Err(LinkError::Domain { name: "start", value: start });
    }
    if !(stop.is_finite() && stop > start) {
        return Err(LinkError::Domain { name: "stop", value: stop });
    }
    if !(step.is_finite() && step > 0.0) {
        return Err(LinkError::Domain { name: "step", value: step });
    }
    let rows = (0..sweep_len(start, stop, step))
        .map(|i| {
            let d = start + step * i as f64;
            let p = received_power(lb, d)?;
            Ok(DistanceRow { distance_m: d, received_w: p, charge_s: charge_time_from_power(lb, tank, p)? })
        })
        .collect::<Result<_, LinkError>>()?;
    Ok(DistanceSweepResult { rows })
}

impl DistanceSweepResult {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("distance_m,received_w,charge_s\n");
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{},{},{}",
                format_sig(r.distance_m, 6),
                format_sig(r.received_w, 6),
                format_sig(r.charge_s, 6)
            );
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_metre_unity_link() {
        let lb = LinkBudget { rectifier_efficiency: 1.0, ..LinkBudget::default() };
        let p = received_power(&lb, 1.0).unwrap();
        // λ = 299792458/915e6 = 0.327642030601...; (λ/4π)²
        assert!((p - 6.797_973_9e-4).abs() < 1e-10, "{p}");
    }

    #[test]
    fn charge_time_oracle() {
        let lb = LinkBudget::default();
        let t = charge_time_from_power(&lb, &ChargeTank::new(100e-6), 6.81e-4).unwrap();
        assert!((t - 1.6e-3 / 6.81e-4).abs() < 1e-12);
        assert!((t - 2.349_486).abs() < 1e-6);
    }

    #[test]
    fn full_mismatch_is_zero_power() {
        let lb = LinkBudget { mismatch_gamma: ReflectionCoefficient::new(0.0, 1.0), ..LinkBudget::default() };
        assert_eq!(received_power(&lb, 1.0).unwrap(), 0.0);
        assert_eq!(charge_time(&lb, &ChargeTank::default(), 1.0), Err(LinkError::ZeroPower));
    }

    #[test]
    fn near_field_guard() {
        let lb = LinkBudget::default();
        assert!(matches!(received_power(&lb, 0.3), Err(LinkError::NearField { .. })));
        assert!(received_power(&lb, 0.33).is_ok());
    }

    #[test]
    fn charged_tank_takes_no_time() {
        let tank = ChargeTank { capacitance: 1e-4, threshold_volts: 4.0, initial_volts: 4.0 };
        assert_eq!(charge_time(&LinkBudget::default(), &tank, 1.0).unwrap(), 0.0);
    }

    #[test]
    fn half_metre_to_two_metres() {
        let r = distance_sweep(&LinkBudget::default(), &ChargeTank::default(), 0.5, 2.0, 0.25).unwrap();
        assert_eq!(r.rows.len(), 7);
        assert_eq!(r.rows[6].distance_m, 2.0);
        let ratio = r.rows[6].charge_s / r.rows[0].charge_s;
        assert!((ratio - 16.0).abs() < 1e-9);
        let csv = r.to_csv();
        assert!(csv.starts_with("distance_m,received_w,charge_s\n0.5,"));
        assert_eq!(csv.lines().count(), 8);
    }

    #[test]
    fn efficiency_curve_interpolates() {
        let c = EfficiencyCurve { points: vec![(1e-4, 0.2), (1e-3, 0.6)] };
        assert_eq!(c.at(0.0), 0.2);
        assert_eq!(c.at(1.0), 0.6);
        assert!((c.at(5.5e-4) - 0.4).abs() < 1e-12);
        assert_eq!(EfficiencyCurve { points: vec![(1e-3, 0.2), (1e-4, 0.6)] }.validate(), Err(LinkError::BadCurve));
    }
}
