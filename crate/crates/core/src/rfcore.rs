//! Complex-valued RF primitives.
//!
//! Sign convention: time-harmonic fields vary as `e^{+jωt}`, so an inductor
//! presents `+jωL` and a capacitor `−j/(ωC)`. Every module in this crate
//! follows it. Quantities are SI internally; human units (MHz, nH, pF) only
//! appear at I/O boundaries (see [`crate::units`]).

use std::f64::consts::PI;
use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Vacuum permeability, fixed at the pre-2019 SI value 4π×10⁻⁷ H/m.
pub const MU0: f64 = 4.0e-7 * PI;

/// Speed of light in vacuum, m/s.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Value used in place of −∞ dB when S11 is written to a file or API.
pub const S11_FLOOR_DB: f64 = -200.0;

/// Default reference impedance of the feed line.
pub const DEFAULT_Z0_OHMS: f64 = 50.0;

/// Denominators smaller than this (in ohms) are treated as zero.
const DEGENERATE_OHMS: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RfError {
    #[error("degenerate denominator: |Z + Z0| = {0:e} ohm")]
    DegenerateDenominator(f64),
    #[error("cannot take the reciprocal of a zero-magnitude quantity")]
    ZeroMagnitude,
    #[error("{name} must be positive and finite, got {value}")]
    Domain { name: &'static str, value: f64 },
    #[error("{0} is not finite")]
    NonFinite(&'static str),
}

fn positive(name: &'static str, value: f64) -> Result<f64, RfError> {
    if value.is_finite() && value > 0.0 {
        Ok(value)
    } else {
        Err(RfError::Domain { name, value })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct Frequency(f64);

impl Frequency {
    pub fn new(hertz: f64) -> Result<Self, RfError> {
        positive("frequency", hertz).map(Frequency)
    }

    pub fn from_mhz(mhz: f64) -> Result<Self, RfError> {
        Self::new(mhz * 1e6)
    }

    pub fn hertz(self) -> f64 {
        self.0
    }

    /// Angular frequency ω = 2πf.
    pub fn omega(self) -> f64 {
        2.0 * PI * self.0
    }

    /// Free-space wavelength in meters.
    pub fn wavelength(self) -> f64 {
        SPEED_OF_LIGHT / self.0
    }
}

impl TryFrom<f64> for Frequency {
    type Error = RfError;
    fn try_from(value: f64) -> Result<Self, Self::Error> {
        Frequency::new(value)
    }
}

impl From<Frequency> for f64 {
    fn from(f: Frequency) -> f64 {
        f.0
    }
}

impl fmt::Display for Frequency {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} MHz", self.0 / 1e6)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Impedance {
    pub resistance: f64,
    pub reactance: f64,
}

impl Impedance {
    pub const fn new(resistance: f64, reactance: f64) -> Self {
        Impedance { resistance, reactance }
    }

    pub fn from_complex(z: Complex64) -> Self {
        Impedance::new(z.re, z.im)
    }

    pub fn as_complex(self) -> Complex64 {
        Complex64::new(self.resistance, self.reactance)
    }

    pub fn is_finite(self) -> bool {
        self.resistance.is_finite() && self.reactance.is_finite()
    }

    pub fn magnitude(self) -> f64 {
        self.as_complex().norm()
    }
}

impl fmt::Display for Impedance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sign = if self.reactance < 0.0 { '-' } else { '+' };
        write!(f, "{}{}{}j ohm", self.resistance, sign, self.reactance.abs())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Admittance {
    pub conductance: f64,
    pub susceptance: f64,
}

impl Admittance {
    pub const fn new(conductance: f64, susceptance: f64) -> Self {
        Admittance { conductance, susceptance }
    }

    pub fn from_complex(y: Complex64) -> Self {
        Admittance::new(y.re, y.im)
    }

    pub fn as_complex(self) -> Complex64 {
        Complex64::new(self.conductance, self.susceptance)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReflectionCoefficient {
    pub re: f64,
    pub im: f64,
}

impl ReflectionCoefficient {
    pub const fn new(re: f64, im: f64) -> Self {
        ReflectionCoefficient { re, im }
    }

    pub fn from_complex(g: Complex64) -> Self {
        ReflectionCoefficient::new(g.re, g.im)
    }

    /// From magnitude and angle in degrees.
    pub fn from_polar_deg(magnitude: f64, angle_deg: f64) -> Self {
        Self::from_complex(Complex64::from_polar(magnitude, angle_deg.to_radians()))
    }

    pub fn as_complex(self) -> Complex64 {
        Complex64::new(self.re, self.im)
    }

    pub fn magnitude(self) -> f64 {
        self.as_complex().norm()
    }

    pub fn angle_deg(self) -> f64 {
        self.im.atan2(self.re).to_degrees()
    }

    /// Inverse of [`reflection_coefficient`]: Z = Z₀(1+Γ)/(1−Γ).
    pub fn to_impedance(self, z0: ReferenceImpedance) -> Result<Impedance, RfError> {
        let g = self.as_complex();
        let den = Complex64::new(1.0, 0.0) - g;
        if den.norm() < 1e-15 {
            return Err(RfError::DegenerateDenominator(den.norm()));
        }
        Ok(Impedance::from_complex(z0.ohms() * (1.0 + g) / den))
    }
}

/// Real, positive reference impedance (the matching target).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct ReferenceImpedance(f64);

impl ReferenceImpedance {
    pub fn new(ohms: f64) -> Result<Self, RfError> {
        positive("reference impedance", ohms).map(ReferenceImpedance)
    }

    pub fn ohms(self) -> f64 {
        self.0
    }

    pub fn as_impedance(self) -> Impedance {
        Impedance::new(self.0, 0.0)
    }
}

impl Default for ReferenceImpedance {
    fn default() -> Self {
        ReferenceImpedance(DEFAULT_Z0_OHMS)
    }
}

impl TryFrom<f64> for ReferenceImpedance {
    type Error = RfError;
    fn try_from(value: f64) -> Result<Self, Self::Error> {
        ReferenceImpedance::new(value)
    }
}

impl From<ReferenceImpedance> for f64 {
    fn from(z0: ReferenceImpedance) -> f64 {
        z0.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MaterialSpec {
    /// Ohm-meters.
    pub resistivity: f64,
    pub relative_permeability: f64,
}

impl MaterialSpec {
    pub fn new(resistivity: f64, relative_permeability: f64) -> Result<Self, RfError> {
        Ok(MaterialSpec {
            resistivity: positive("resistivity", resistivity)?,
            relative_permeability: positive("relative permeability", relative_permeability)?,
        })
    }

    pub const COPPER: MaterialSpec = MaterialSpec { resistivity: 1.68e-8, relative_permeability: 1.0 };
    pub const ALUMINUM: MaterialSpec = MaterialSpec { resistivity: 2.65e-8, relative_permeability: 1.0 };
    pub const GOLD: MaterialSpec = MaterialSpec { resistivity: 2.44e-8, relative_permeability: 1.0 };
    pub const SILVER: MaterialSpec = MaterialSpec { resistivity: 1.59e-8, relative_permeability: 1.0 };

    pub fn by_name(name: &str) -> Option<MaterialSpec> {
        match name.to_ascii_lowercase().as_str() {
            "copper" | "cu" => Some(Self::COPPER),
            "aluminum" | "aluminium" | "al" => Some(Self::ALUMINUM),
            "gold" | "au" => Some(Self::GOLD),
            "silver" | "ag" => Some(Self::SILVER),
            _ => None,
        }
    }
}

/// Γ = (Z − Z₀)/(Z + Z₀).
pub fn reflection_coefficient(
    z: Impedance,
    z0: ReferenceImpedance,
) -> Result<ReflectionCoefficient, RfError> {
    if !z.is_finite() {
        return Err(RfError::NonFinite("impedance"));
    }
    let z = z.as_complex();
    let den = z + z0.ohms();
    if den.norm() < DEGENERATE_OHMS {
        return Err(RfError::DegenerateDenominator(den.norm()));
    }
    Ok(ReflectionCoefficient::from_complex((z - z0.ohms()) / den))
}

/// S11 in dB, `20·log₁₀|Γ|` (equivalently `10·log₁₀(Pr/Pi)`).
///
/// A perfect match returns `f64::NEG_INFINITY`; use [`floor_db`] before
/// writing the value anywhere.
pub fn s11_db(g: ReflectionCoefficient) -> f64 {
    let mag = g.magnitude();
    if mag == 0.0 {
        f64::NEG_INFINITY
    } else {
        20.0 * mag.log10()
    }
}

/// Clamp a dB value to [`S11_FLOOR_DB`]; maps −∞ to the floor.
pub fn floor_db(db: f64) -> f64 {
    if db < S11_FLOOR_DB {
        S11_FLOOR_DB
    } else {
        db
    }
}

/// Skin depth δ = √(ρ / (π f μ₀ μᵣ)) in meters.
pub fn skin_depth(m: MaterialSpec, f: Frequency) -> Result<f64, RfError> {
    let rho = positive("resistivity", m.resistivity)?;
    let mu_r = positive("relative permeability", m.relative_permeability)?;
    let hz = positive("frequency", f.hertz())?;
    Ok((rho / (PI * hz * MU0 * mu_r)).sqrt())
}

pub fn impedance_to_admittance(z: Impedance) -> Result<Admittance, RfError> {
    reciprocal(z.as_complex()).map(Admittance::from_complex)
}

pub fn admittance_to_impedance(y: Admittance) -> Result<Impedance, RfError> {
    reciprocal(y.as_complex()).map(Impedance::from_complex)
}

pub(crate) fn reciprocal(v: Complex64) -> Result<Complex64, RfError> {
    if !(v.re.is_finite() && v.im.is_finite()) {
        return Err(RfError::NonFinite("reciprocal input"));
    }
    if v.re == 0.0 && v.im == 0.0 {
        return Err(RfError::ZeroMagnitude);
    }
    Ok(v.inv())
}
