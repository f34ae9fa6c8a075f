use std::time::Instant;

use leafrf_core::ladder::*;
use leafrf_core::rfcore::*;
use leafrf_core::synth::*;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type C = (f64, f64);

fn mul(a: C, b: C) -> C {
    (a.0 * b.0 - a.1 * b.1, a.0 * b.1 + a.1 * b.0)
}

fn inv(a: C) -> C {
    let d = a.0 * a.0 + a.1 * a.1;
    (a.0 / d, -a.1 / d)
}

/// Hand fold with plain tuples: series adds Z, shunt adds Y.
fn fold_gamma(n: &MatchingNetwork, load: Impedance, f: f64, z0: f64) -> f64 {
    let w = 2.0 * std::f64::consts::PI * f;
    let mut z: C = (load.resistance, load.reactance);
    for e in n.elements() {
        let ze: C = match e.kind() {
            ComponentKind::Inductor(l) => (0.0, w * l),
            ComponentKind::Capacitor(c) => (0.0, -1.0 / (w * c)),
            ComponentKind::Resistor(r) => (r, 0.0),
        };
        z = match e.placement() {
            Placement::Series => (z.0 + ze.0, z.1 + ze.1),
            Placement::Shunt => {
                let (y, ye) = (inv(z), inv(ze));
                inv((y.0 + ye.0, y.1 + ye.1))
            }
        };
    }
    let g = mul((z.0 - z0, z.1), inv((z.0 + z0, z.1)));
    g.0.hypot(g.1)
}

#[test]
fn ten_thousand_random_loads() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x1eaf);
    let z0 = ReferenceImpedance::default();
    let f0 = Frequency::new(915e6).unwrap();
    let started = Instant::now();
    let mut solutions = 0usize;
    for _ in 0..10_000 {
        let r = 10f64.powf(rng.random_range(-1.0..3.0));
        let x = rng.random_range(-1000.0..1000.0);
        let load = Impedance::new(r, x);
        let sols = l_match_solutions(load, z0, f0).unwrap();
        assert!(!sols.is_empty(), "no solution for {load}");
        for s in &sols {
            let g = fold_gamma(&s.network, load, 915e6, 50.0);
            assert!(g < 1e-6, "{load} via {}: |Γ| = {g}", s.topology_label);
            solutions += 1;
        }
    }
    let elapsed = started.elapsed();
    assert!(elapsed.as_secs_f64() < 5.0, "{elapsed:?}");
    assert!(solutions >= 20_000);
}

#[test]
fn matched_load_needs_nothing() {
    let sols = l_match_solutions(Impedance::new(50.0, 0.0), ReferenceImpedance::default(), Frequency::new(915e6).unwrap()).unwrap();
    assert_eq!(sols.len(), 1);
    assert!(sols[0].network.is_empty());
    assert_eq!(sols[0].topology_label, "empty");
}

#[test]
fn purely_reactive_load_rejected() {
    let e = l_match_solutions(Impedance::new(0.0, 30.0), ReferenceImpedance::default(), Frequency::new(915e6).unwrap());
    assert!(matches!(e, Err(SynthError::PurelyReactive(_))));
}

fn normalized_r(g: ReflectionCoefficient) -> f64 {
    // r = (1 − |Γ|²) / |1 − Γ|²
    (1.0 - g.re * g.re - g.im * g.im) / ((1.0 - g.re).powi(2) + g.im * g.im)
}

fn normalized_g(g: ReflectionCoefficient) -> f64 {
    (1.0 - g.re * g.re - g.im * g.im) / ((1.0 + g.re).powi(2) + g.im * g.im)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn arcs_chain_and_follow_constant_circles(r in 1.0f64..300.0, x in -300.0f64..300.0, steps in 2usize..80) {
        let z0 = ReferenceImpedance::default();
        let f0 = Frequency::new(915e6).unwrap();
        let p = LoadProfile::Constant(Impedance::new(r, x));
        for s in match_and_verify(&p, z0, f0).unwrap() {
            let arcs = network_arcs(&s.network, &p, z0, f0, steps).unwrap();
            prop_assert_eq!(arcs.len(), s.network.len());
            let mut expected_start = reflection_coefficient(Impedance::new(r, x), z0).unwrap();
            for (arc, e) in arcs.iter().zip(s.network.elements()) {
                prop_assert_eq!(arc.points.len(), steps);
                prop_assert_eq!(arc.points[0], expected_start);
                // lossless series moves along constant r, shunt along constant g
                let (law, base): (fn(ReflectionCoefficient) -> f64, f64) = match e.placement() {
                    Placement::Series => (normalized_r, normalized_r(arc.points[0])),
                    Placement::Shunt => (normalized_g, normalized_g(arc.points[0])),
                };
                for pt in &arc.points {
                    prop_assert!((law(*pt) - base).abs() < 1e-6 * base.max(1.0));
                }
                expected_start = *arc.points.last().unwrap();
            }
            prop_assert_eq!(expected_start, s.achieved_gamma);
        }
    }

    #[test]
    fn suggestion_completes_any_stack(r in 1.0f64..300.0, x in -300.0f64..300.0, l in 1.0f64..20.0) {
        let z0 = ReferenceImpedance::default();
        let f0 = Frequency::new(915e6).unwrap();
        let p = LoadProfile::Constant(Impedance::new(r, x));
        let stack = MatchingNetwork::new(vec![LadderElement::series(ComponentKind::Inductor(l * 1e-9)).unwrap()]).unwrap();
        for s in suggest_extension(&stack, &p, z0, f0).unwrap() {
            let full = stack.extended(&s.network).unwrap();
            prop_assert!(gamma_at(&full, &p, z0, f0).unwrap().magnitude() < 1e-6);
        }
    }
}
