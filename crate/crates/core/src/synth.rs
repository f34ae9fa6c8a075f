//! Closed-form L-network synthesis and Smith-chart trajectories.
//!
//! Two topologies are tried, named load→source:
//!
//! * series-then-shunt: a series reactance moves the load along its
//!   constant-resistance circle onto the `G = 1/Z₀` circle, then a shunt
//!   susceptance cancels the remaining susceptance. Needs `R_L < Z₀`.
//! * shunt-then-series: a shunt susceptance moves along the
//!   constant-conductance circle onto `R = Z₀`, then a series reactance
//!   cancels the remaining reactance. Needs `G_L ≤ 1/Z₀`.
//!
//! Each topology has two roots, so up to four networks come back. Element
//! kinds follow the sign of the required reactance/susceptance, which is
//! why component values are always positive.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ladder::{
    apply_element, element_impedance, gamma_at, input_impedance, input_impedance_from, load_impedance,
    ComponentKind, LadderElement, LadderError, LoadProfile, MatchingNetwork, Placement,
};
use crate::rfcore::{
    floor_db, reciprocal, reflection_coefficient, s11_db, Frequency, Impedance, ReferenceImpedance,
    ReflectionCoefficient, RfError,
};

/// Relative tolerance for routing `R_L ≈ Z₀` to the single-element branch.
const BORDERLINE_REL: f64 = 1e-9;

/// Reactances below this fraction of Z₀ are dropped as zero.
const NEGLIGIBLE_REL: f64 = 1e-12;

/// Default number of points per Smith-chart arc.
pub const DEFAULT_ARC_STEPS: usize = 64;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SynthError {
    #[error("load resistance must be positive for an L-match, got {0} ohm")]
    PurelyReactive(f64),
    #[error("an arc needs at least 2 steps, got {0}")]
    BadSteps(usize),
    #[error(transparent)]
    Ladder(#[from] LadderError),
    #[error(transparent)]
    Rf(#[from] RfError),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatchSolution {
    pub network: MatchingNetwork,
    pub topology_label: String,
    pub achieved_gamma: ReflectionCoefficient,
    /// Floored at −200 dB.
    pub achieved_s11_db: f64,
}

impl MatchSolution {
    fn evaluated(network: MatchingNetwork, gamma: ReflectionCoefficient) -> Self {
        MatchSolution {
            topology_label: network.topology_label(),
            achieved_s11_db: floor_db(s11_db(gamma)),
            achieved_gamma: gamma,
            network,
        }
    }
}

fn series_for_reactance(x: f64, w: f64) -> Result<LadderElement, LadderError> {
    let kind = if x > 0.0 { ComponentKind::Inductor(x / w) } else { ComponentKind::Capacitor(-1.0 / (w * x)) };
    LadderElement::series(kind)
}

fn shunt_for_susceptance(b: f64, w: f64) -> Result<LadderElement, LadderError> {
    let kind = if b > 0.0 { ComponentKind::Capacitor(b / w) } else { ComponentKind::Inductor(-1.0 / (w * b)) };
    LadderElement::shunt(kind)
}

fn sort_solutions(v: &mut [MatchSolution]) {
    v.sort_by(|a, b| {
        a.network
            .len()
            .cmp(&b.network.len())
            .then(a.achieved_gamma.magnitude().total_cmp(&b.achieved_gamma.magnitude()))
            .then_with(|| a.topology_label.cmp(&b.topology_label))
    });
}

fn same_network(a: &MatchingNetwork, b: &MatchingNetwork) -> bool {
    a.len() == b.len()
        && a.elements().iter().zip(b.elements()).all(|(x, y)| {
            x.placement() == y.placement()
                && x.kind().letter() == y.kind().letter()
                && (x.value() - y.value()).abs() <= 1e-12 * x.value().abs().max(y.value().abs())
        })
}

/// Every valid one- or two-element L-match for `load` at `f0`, each
/// checked with the ladder evaluator. Sorted by element count, achieved
/// |Γ|, then label.
pub fn l_match_solutions(
    load: Impedance,
    z0: ReferenceImpedance,
    f0: Frequency,
) -> Result<Vec<MatchSolution>, SynthError> {
    let (r, x) = (load.resistance, load.reactance);
    if !(r.is_finite() && x.is_finite()) {
        return Err(RfError::NonFinite("load impedance").into());
    }
    if r <= 0.0 {
        return Err(SynthError::PurelyReactive(r));
    }
    let zr = z0.ohms();
    let w = f0.omega();
    let negligible_x = NEGLIGIBLE_REL * zr;
    let negligible_b = NEGLIGIBLE_REL / zr;

    let mut networks: Vec<MatchingNetwork> = Vec::new();
    if (r - zr).abs() <= BORDERLINE_REL * zr {
        if x.abs() <= BORDERLINE_REL * zr {
            networks.push(MatchingNetwork::empty());
        } else {
            networks.push(MatchingNetwork::new(vec![series_for_reactance(-x, w)?])?);
        }
    } else {
        if r < zr {
            let root = (r * (zr - r)).sqrt();
            for sign in [1.0, -1.0] {
                let xs = sign * root - x;
                let z1 = Impedance::new(r, x + xs).as_complex();
                let b = -reciprocal(z1)?.im;
                let mut elements = Vec::with_capacity(2);
                if xs.abs() > negligible_x {
                    elements.push(series_for_reactance(xs, w)?);
                }
                if b.abs() > negligible_b {
                    elements.push(shunt_for_susceptance(b, w)?);
                }
                networks.push(MatchingNetwork::new(elements)?);
            }
        }
        let y = reciprocal(load.as_complex())?;
        let (g, bl) = (y.re, y.im);
        let disc = g / zr - g * g;
        if disc >= -1e-15 * (g / zr) {
            let root = disc.max(0.0).sqrt();
            for sign in [1.0, -1.0] {
                let bs = sign * root - bl;
                let y1 = num_complex::Complex64::new(g, bl + bs);
                let xs = -reciprocal(y1)?.im;
                let mut elements = Vec::with_capacity(2);
                if bs.abs() > negligible_b {
                    elements.push(shunt_for_susceptance(bs, w)?);
                }
                if xs.abs() > negligible_x {
                    elements.push(series_for_reactance(xs, w)?);
                }
                networks.push(MatchingNetwork::new(elements)?);
            }
        }
    }

    let mut unique: Vec<MatchingNetwork> = Vec::with_capacity(networks.len());
    for n in networks {
        if !unique.iter().any(|u| same_network(u, &n)) {
            unique.push(n);
        }
    }
    let mut out = unique
        .into_iter()
        .map(|n| {
            let z = input_impedance_from(&n, load, f0)?;
            let g = reflection_coefficient(z, z0)?;
            Ok(MatchSolution::evaluated(n, g))
        })
        .collect::<Result<Vec<_>, SynthError>>()?;
    assert!(!out.is_empty(), "an L-match always exists for R > 0");
    sort_solutions(&mut out);
    Ok(out)
}

/// Reads the load at `f0`, synthesizes, and re-evaluates every network
/// over the full profile.
pub fn match_and_verify(
    p: &LoadProfile,
    z0: ReferenceImpedance,
    f0: Frequency,
) -> Result<Vec<MatchSolution>, SynthError> {
    let load = load_impedance(p, f0)?;
    let mut out = l_match_solutions(load, z0, f0)?
        .into_iter()
        .map(|s| Ok(MatchSolution::evaluated(s.network.clone(), gamma_at(&s.network, p, z0, f0)?)))
        .collect::<Result<Vec<_>, SynthError>>()?;
    sort_solutions(&mut out);
    Ok(out)
}

/// Matches whatever `stack` leaves at `f0`. Returned networks hold only the
/// extra elements to push on the source side; achieved Γ is for
/// `stack` followed by those elements. Solutions that would exceed the
/// ladder length bound are dropped.
pub fn suggest_extension(
    stack: &MatchingNetwork,
    p: &LoadProfile,
    z0: ReferenceImpedance,
    f0: Frequency,
) -> Result<Vec<MatchSolution>, SynthError> {
    let residual = input_impedance(stack, p, f0)?;
    let mut out = Vec::new();
    for s in l_match_solutions(residual, z0, f0)? {
        let Ok(full) = stack.extended(&s.network) else { continue };
        let g = gamma_at(&full, p, z0, f0)?;
        out.push(MatchSolution::evaluated(s.network, g));
    }
    sort_solutions(&mut out);
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SmithArc {
    pub element_index: usize,
    pub points: Vec<ReflectionCoefficient>,
}

/// Trajectory of Γ as `e` is added to `start`, its contribution scaled
/// linearly from zero to full over `steps` points.
///
/// The contribution is the element's impedance for series placement and
/// its admittance for shunt placement. For series inductors and shunt
/// capacitors that is the same as scaling the component value. The last
/// point is computed exactly as the ladder evaluator does, so arcs chain
/// bit-for-bit.
pub fn smith_arc(
    start: Impedance,
    e: &LadderElement,
    f0: Frequency,
    steps: usize,
    z0: ReferenceImpedance,
) -> Result<SmithArc, SynthError> {
    if steps < 2 {
        return Err(SynthError::BadSteps(steps));
    }
    let ze = element_impedance(e, f0).as_complex();
    let zs = start.as_complex();
    let last = steps - 1;
    let mut points = Vec::with_capacity(steps);
    points.push(reflection_coefficient(start, z0)?);
    if e.placement() == Placement::Shunt {
        let ys = reciprocal(zs)?;
        let ye = reciprocal(ze)?;
        for i in 1..last {
            let t = i as f64 / last as f64;
            let z = Impedance::from_complex(reciprocal(ys + ye * t)?);
            points.push(reflection_coefficient(z, z0)?);
        }
    } else {
        for i in 1..last {
            let t = i as f64 / last as f64;
            points.push(reflection_coefficient(Impedance::from_complex(zs + ze * t), z0)?);
        }
    }
    points.push(reflection_coefficient(apply_element(start, e, f0)?, z0)?);
    Ok(SmithArc { element_index: 0, points })
}

/// One arc per element of `n`, starting from the load at `f0`. Each arc's
/// first point is the previous arc's last point.
pub fn network_arcs(
    n: &MatchingNetwork,
    p: &LoadProfile,
    z0: ReferenceImpedance,
    f0: Frequency,
    steps: usize,
) -> Result<Vec<SmithArc>, SynthError> {
    let mut z = load_impedance(p, f0)?;
    let mut arcs = Vec::with_capacity(n.len());
    for (i, e) in n.elements().iter().enumerate() {
        let mut arc = smith_arc(z, e, f0, steps, z0)?;
        arc.element_index = i;
        arcs.push(arc);
        z = apply_element(z, e, f0)?;
    }
    Ok(arcs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rfcore::impedance_to_admittance;

    fn f915() -> Frequency {
        Frequency::from_mhz(915.0).unwrap()
    }

    fn z50() -> ReferenceImpedance {
        ReferenceImpedance::default()
    }

    /// Independent check: fold the network by hand with complex numbers.
    fn oracle_gamma(n: &MatchingNetwork, load: Impedance, f: Frequency) -> f64 {
        let w = f.omega();
        let mut z = load.as_complex();
        for e in n.elements() {
            let ze = match e.kind() {
                ComponentKind::Inductor(l) => num_complex::Complex64::new(0.0, w * l),
                ComponentKind::Capacitor(c) => num_complex::Complex64::new(0.0, -1.0 / (w * c)),
                ComponentKind::Resistor(r) => num_complex::Complex64::new(r, 0.0),
            };
            z = match e.placement() {
                Placement::Series => z + ze,
                Placement::Shunt => 1.0 / (1.0 / z + 1.0 / ze),
            };
        }
        ((z - 50.0) / (z + 50.0)).norm()
    }

    #[test]
    fn matched_load_needs_nothing() {
        let s = l_match_solutions(Impedance::new(50.0, 0.0), z50(), f915()).unwrap();
        assert_eq!(s.len(), 1);
        assert!(s[0].network.is_empty());
        assert_eq!(s[0].achieved_s11_db, -200.0);
    }

    #[test]
    fn equal_resistance_uses_single_series_element() {
        let s = l_match_solutions(Impedance::new(50.0, 30.0), z50(), f915()).unwrap();
        assert_eq!(s.len(), 1);
        let e = s[0].network.elements()[0];
        assert_eq!(e.placement(), Placement::Series);
        let x = element_impedance(&e, f915()).reactance;
        assert!(matches!(e.kind(), ComponentKind::Capacitor(_)));
        assert!((x + 30.0).abs() < 1e-9);
    }

    #[test]
    fn all_solutions_for_25_minus_10j_match() {
        let load = Impedance::new(25.0, -10.0);
        let s = l_match_solutions(load, z50(), f915()).unwrap();
        assert!(s.len() >= 2);
        for sol in &s {
            assert!(oracle_gamma(&sol.network, load, f915()) < 1e-6, "{}", sol.topology_label);
            assert!(sol.achieved_gamma.magnitude() < 1e-6);
            assert!(sol.network.elements().iter().all(|e| e.value() > 0.0 && e.value().is_finite()));
        }
    }

    #[test]
    fn high_resistance_load() {
        let load = Impedance::new(200.0, 80.0);
        let s = l_match_solutions(load, z50(), f915()).unwrap();
        assert!(s.len() >= 2);
        assert!(s.iter().all(|sol| sol.topology_label.starts_with("shunt")));
        for sol in &s {
            assert!(oracle_gamma(&sol.network, load, f915()) < 1e-6);
        }
    }

    #[test]
    fn purely_reactive_rejected() {
        assert_eq!(
            l_match_solutions(Impedance::new(0.0, 20.0), z50(), f915()).unwrap_err(),
            SynthError::PurelyReactive(0.0)
        );
    }

    #[test]
    fn solutions_are_sorted() {
        let s = l_match_solutions(Impedance::new(10.0, 40.0), z50(), f915()).unwrap();
        for w in s.windows(2) {
            assert!(w[0].network.len() <= w[1].network.len());
        }
    }

    #[test]
    fn resonator_fixture_matches_deeply() {
        let s = match_and_verify(&LoadProfile::FIXTURE_RESONATOR, z50(), f915()).unwrap();
        assert!(s.len() >= 2);
        assert!(s.iter().all(|sol| sol.achieved_s11_db < -100.0));
    }

    #[test]
    fn constant_profile_equals_direct_synthesis() {
        let load = Impedance::new(25.0, -10.0);
        let a = match_and_verify(&LoadProfile::Constant(load), z50(), f915()).unwrap();
        let b = l_match_solutions(load, z50(), f915()).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn series_arc_keeps_resistance() {
        let start = Impedance::new(20.0, -35.0);
        let e = LadderElement::series(ComponentKind::Inductor(12e-9)).unwrap();
        let arc = smith_arc(start, &e, f915(), 64, z50()).unwrap();
        assert_eq!(arc.points.len(), 64);
        for g in &arc.points {
            let z = g.to_impedance(z50()).unwrap();
            assert!((z.resistance - 20.0).abs() / 20.0 < 1e-9);
            assert!(g.magnitude() <= 1.0 + 1e-9);
        }
    }

    #[test]
    fn shunt_arc_keeps_conductance() {
        let start = Impedance::new(20.0, -35.0);
        let g0 = impedance_to_admittance(start).unwrap().conductance;
        for kind in [ComponentKind::Capacitor(3e-12), ComponentKind::Inductor(20e-9)] {
            let e = LadderElement::shunt(kind).unwrap();
            let arc = smith_arc(start, &e, f915(), 33, z50()).unwrap();
            for g in &arc.points {
                let y = impedance_to_admittance(g.to_impedance(z50()).unwrap()).unwrap();
                assert!((y.conductance - g0).abs() / g0 < 1e-9);
            }
        }
    }

    #[test]
    fn arc_endpoints() {
        let start = Impedance::new(20.0, -35.0);
        let e = LadderElement::series(ComponentKind::Capacitor(2e-12)).unwrap();
        let arc = smith_arc(start, &e, f915(), 8, z50()).unwrap();
        assert_eq!(arc.points[0], reflection_coefficient(start, z50()).unwrap());
        let n = MatchingNetwork::new(vec![e]).unwrap();
        let end = reflection_coefficient(input_impedance_from(&n, start, f915()).unwrap(), z50()).unwrap();
        assert_eq!(*arc.points.last().unwrap(), end);
        assert_eq!(smith_arc(start, &e, f915(), 1, z50()).unwrap_err(), SynthError::BadSteps(1));
    }

    #[test]
    fn suggestion_completes_a_partial_stack() {
        let p = LoadProfile::FIXTURE_RESONATOR;
        let stack = MatchingNetwork::new(vec![LadderElement::series(ComponentKind::Inductor(5e-9)).unwrap()]).unwrap();
        let s = suggest_extension(&stack, &p, z50(), f915()).unwrap();
        assert!(!s.is_empty());
        for sol in s {
            let full = stack.extended(&sol.network).unwrap();
            assert!(gamma_at(&full, &p, z50(), f915()).unwrap().magnitude() < 1e-6);
        }
    }

    #[test]
    fn arcs_chain() {
        let p = LoadProfile::FIXTURE_RESONATOR;
        let sol = &match_and_verify(&p, z50(), f915()).unwrap()[0];
        let arcs = network_arcs(&sol.network, &p, z50(), f915(), DEFAULT_ARC_STEPS).unwrap();
        assert_eq!(arcs.len(), sol.network.len());
        for w in arcs.windows(2) {
            assert_eq!(w[0].points.last(), w[1].points.first());
        }
        assert_eq!(*arcs.last().unwrap().points.last().unwrap(), sol.achieved_gamma);
    }
}
