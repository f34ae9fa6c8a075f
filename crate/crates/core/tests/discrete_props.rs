use leafrf_core::discrete::*;
use leafrf_core::ladder::*;
use leafrf_core::rfcore::*;
use proptest::prelude::*;

fn series() -> impl Strategy<Value = ESeries> {
    proptest::sample::select(vec![ESeries::E12, ESeries::E24, ESeries::E48, ESeries::E96])
}

#[test]
fn seven_nanohenry_snaps_to_6n8() {
    assert_eq!(snap(7.0e-9, ESeries::E24).unwrap().value, 6.8e-9);
    let n: Vec<f64> = neighborhood(7.0e-9, ESeries::E24, 1).unwrap().iter().map(|c| c.value).collect();
    assert_eq!(n, vec![6.2e-9, 6.8e-9, 7.5e-9]);
}

#[test]
fn series_names_parse() {
    assert_eq!("e96".parse::<ESeries>().unwrap(), ESeries::E96);
    assert!("E6".parse::<ESeries>().is_err());
}

#[test]
fn candidate_cap_enforced() {
    let e = LadderElement::series(ComponentKind::Inductor(5e-9)).unwrap();
    let ideal = MatchingNetwork::new(vec![e; 8]).unwrap();
    let opts = SearchOptions { k: 3, ..SearchOptions::default() };
    let r = optimize_discrete(&ideal, &LoadProfile::FIXTURE_RESONATOR, ReferenceImpedance::default(), Frequency::new(915e6).unwrap(), opts);
    assert!(matches!(r, Err(DiscreteError::CandidateCap { .. })));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn snap_is_nearest_by_ratio(v in 1e-13f64..1e3, s in series()) {
        let c = snap(v, s).unwrap();
        for n in neighborhood(v, s, 2).unwrap() {
            prop_assert!((c.value / v).ln().abs() <= (n.value / v).ln().abs() + 1e-12);
        }
        // never further than half the widest gap in the catalog
        let m = s.mantissas();
        let widest = m.windows(2).map(|w| (w[1] / w[0]).ln()).fold((10.0 / m[m.len() - 1]).ln(), f64::max);
        prop_assert!((c.value / v).ln().abs() <= widest / 2.0 + 1e-12);
    }

    #[test]
    fn neighborhood_is_sorted_and_centred(v in 1e-13f64..1e3, s in series(), k in 0usize..5) {
        let n = neighborhood(v, s, k).unwrap();
        prop_assert_eq!(n.len(), 2 * k + 1);
        prop_assert!(n.windows(2).all(|w| w[1].value > w[0].value));
        prop_assert_eq!(n[k].value, snap(v, s).unwrap().value);
    }

    #[test]
    fn snapping_a_catalog_value_is_identity(v in 1e-12f64..1e2, s in series()) {
        let c = snap(v, s).unwrap().value;
        prop_assert_eq!(snap(c, s).unwrap().value, c);
    }

    #[test]
    fn search_beats_plain_snapping(r in 2.0f64..200.0, x in -200.0f64..200.0, k in 0usize..3) {
        let z0 = ReferenceImpedance::default();
        let f0 = Frequency::new(915e6).unwrap();
        let p = LoadProfile::Constant(Impedance::new(r, x));
        for sol in leafrf_core::synth::match_and_verify(&p, z0, f0).unwrap() {
            if sol.network.is_empty() { continue; }
            let snapped = snap_network(&sol.network, ESeries::E24).unwrap();
            let opts = SearchOptions { k, ..SearchOptions::default() };
            let rep = optimize_discrete(&sol.network, &p, z0, f0, opts).unwrap();
            prop_assert!(rep.best_s11_db <= s11_at(&snapped, &p, z0, f0).unwrap());
            prop_assert_eq!(rep.candidates_evaluated, ((2 * k + 1) as u64).pow(sol.network.len() as u32));
            prop_assert!(rep.runner_ups.iter().all(|c| c.s11_db >= rep.best_s11_db));
        }
    }
}

#[test]
fn search_is_deterministic_across_runs() {
    let z0 = ReferenceImpedance::default();
    let f0 = Frequency::new(915e6).unwrap();
    let p = LoadProfile::FIXTURE_RESONATOR;
    let ideal = leafrf_core::synth::match_and_verify(&p, z0, f0).unwrap().remove(0).network;
    let opts = SearchOptions { k: 4, tolerance: Some(ToleranceSpec { percent: 5.0, samples: 500, seed: 7 }), ..SearchOptions::default() };
    let a = optimize_discrete(&ideal, &p, z0, f0, opts).unwrap();
    for _ in 0..5 {
        assert_eq!(optimize_discrete(&ideal, &p, z0, f0, opts).unwrap(), a);
    }
}
