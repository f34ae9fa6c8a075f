use leafrf_core::linksim::*;
use leafrf_core::rfcore::*;
use proptest::prelude::*;

fn budget() -> impl Strategy<Value = LinkBudget> {
    (0.01f64..10.0, -5.0f64..10.0, -5.0f64..10.0, 3e8f64..3e9, 0.0f64..0.99, 0.05f64..1.0).prop_map(
        |(p, gt, gr, f, g, eta)| LinkBudget {
            tx_power: p,
            tx_gain_dbi: gt,
            rx_gain_dbi: gr,
            frequency: Frequency::new(f).unwrap(),
            mismatch_gamma: ReflectionCoefficient::new(g, 0.0),
            rectifier_efficiency: eta,
            efficiency_curve: None,
        },
    )
}

#[test]
fn quarter_metre_steps_to_two_metres() {
    let r = distance_sweep(&LinkBudget::default(), &ChargeTank::default(), 0.5, 2.0, 0.25).unwrap();
    let d: Vec<f64> = r.rows.iter().map(|r| r.distance_m).collect();
    assert_eq!(d, vec![0.5, 0.75, 1.0, 1.25, 1.5, 1.75, 2.0]);
    assert!(r.rows.windows(2).all(|w| w[1].charge_s > w[0].charge_s));
    assert!((r.rows[6].charge_s / r.rows[0].charge_s - 16.0).abs() < 1e-9);
}

#[test]
fn sweep_json_round_trip() {
    let r = distance_sweep(&LinkBudget::default(), &ChargeTank::default(), 0.5, 2.0, 0.25).unwrap();
    let back: DistanceSweepResult = serde_json::from_str(&serde_json::to_string(&r).unwrap()).unwrap();
    assert_eq!(back, r);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    #[test]
    fn further_is_weaker_and_slower(lb in budget(), d in 1.0f64..50.0, k in 1.01f64..5.0) {
        let tank = ChargeTank::default();
        prop_assert!(received_power(&lb, d * k).unwrap() < received_power(&lb, d).unwrap());
        prop_assert!(charge_time(&lb, &tank, d * k).unwrap() > charge_time(&lb, &tank, d).unwrap());
    }

    #[test]
    fn charge_time_scaling(lb in budget(), c in 1e-6f64..1e-2, k in 1.1f64..10.0, d in 1.0f64..10.0) {
        let t1 = charge_time(&lb, &ChargeTank::new(c), d).unwrap();
        let t2 = charge_time(&lb, &ChargeTank::new(c * k), d).unwrap();
        prop_assert!((t2 / t1 - k).abs() < 1e-9 * k);
        let half = LinkBudget { rectifier_efficiency: lb.rectifier_efficiency / 2.0, ..lb.clone() };
        let t3 = charge_time(&half, &ChargeTank::new(c), d).unwrap();
        prop_assert!((t3 / t1 - 2.0).abs() < 1e-9);
    }

    #[test]
    fn mismatch_costs_exactly_one_minus_gamma_squared(lb in budget(), re in -0.7f64..0.7, im in -0.7f64..0.7, d in 1.0f64..10.0) {
        let g = ReflectionCoefficient::new(re, im);
        let matched = LinkBudget { mismatch_gamma: ReflectionCoefficient::new(0.0, 0.0), ..lb.clone() };
        let lossy = LinkBudget { mismatch_gamma: g, ..lb };
        let ratio = received_power(&lossy, d).unwrap() / received_power(&matched, d).unwrap();
        prop_assert!((ratio - (1.0 - g.magnitude().powi(2))).abs() < 1e-12);
    }

    #[test]
    fn row_count_follows_progression(start in 1.0f64..5.0, n in 1usize..60, step in 0.01f64..1.0) {
        let stop = start + step * n as f64;
        let r = distance_sweep(&LinkBudget::default(), &ChargeTank::default(), start, stop, step).unwrap();
        prop_assert_eq!(r.rows.len(), sweep_len(start, stop, step));
        prop_assert!(r.rows.len() == n + 1 || r.rows.len() == n);
        prop_assert!(r.rows.last().unwrap().distance_m <= stop + 1e-9 * stop);
        prop_assert!(r.rows.windows(2).all(|w| w[1].distance_m > w[0].distance_m));
    }
}

#[test]
fn snapped_match_feeds_the_link() {
    use leafrf_core::discrete::{snap_network, ESeries};
    use leafrf_core::ladder::{gamma_at, LoadProfile};
    let p = LoadProfile::FIXTURE_RESONATOR;
    let z0 = ReferenceImpedance::default();
    let f0 = Frequency::new(915e6).unwrap();
    let ideal = leafrf_core::synth::match_and_verify(&p, z0, f0).unwrap().remove(0).network;
    let g = gamma_at(&snap_network(&ideal, ESeries::E24).unwrap(), &p, z0, f0).unwrap();
    let matched = LinkBudget::default();
    let real = LinkBudget { mismatch_gamma: g, ..LinkBudget::default() };
    let ratio = received_power(&real, 1.0).unwrap() / received_power(&matched, 1.0).unwrap();
    assert!((ratio - (1.0 - g.magnitude().powi(2))).abs() < 1e-12);
    assert!(ratio < 1.0 && ratio > 0.99);
}
