use leafrf_core::rfcore::*;
use proptest::prelude::*;

#[test]
fn copper_skin_depth_at_915() {
    let d = skin_depth(MaterialSpec::COPPER, Frequency::new(915e6).unwrap()).unwrap();
    // √(ρ/(π f μ0)) by hand: 1.68e-8 / (π · 915e6 · 4π·1e-7) = 4.6508e-12
    assert!((d - 2.156_573e-6).abs() / 2.156_573e-6 < 1e-6, "{d}");
    assert!((d - 2.16e-6).abs() / 2.16e-6 < 0.01);
}

#[test]
fn threshold_semantics() {
    let db = s11_db(ReflectionCoefficient::new(0.3162, 0.0));
    assert!((db + 10.0).abs() < 0.01);
    assert!((s11_db(ReflectionCoefficient::new(0.0, 0.1)) + 20.0).abs() < 1e-12);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn skin_depth_falls_with_frequency(rho in 1e-9f64..1e-6, mu in 1.0f64..1000.0, f in 1e3f64..1e10, k in 1.001f64..100.0) {
        let m = MaterialSpec::new(rho, mu).unwrap();
        let lo = skin_depth(m, Frequency::new(f).unwrap()).unwrap();
        let hi = skin_depth(m, Frequency::new(f * k).unwrap()).unwrap();
        prop_assert!(hi < lo);
        // δ ∝ f^{-1/2}
        prop_assert!((lo / hi - k.sqrt()).abs() < 1e-9 * k.sqrt());
    }

    #[test]
    fn skin_depth_grows_with_resistivity(rho in 1e-9f64..1e-6, k in 1.001f64..100.0, f in 1e3f64..1e10) {
        let f = Frequency::new(f).unwrap();
        let a = skin_depth(MaterialSpec::new(rho, 1.0).unwrap(), f).unwrap();
        let b = skin_depth(MaterialSpec::new(rho * k, 1.0).unwrap(), f).unwrap();
        prop_assert!(b > a);
    }

    #[test]
    fn passive_loads_reflect_at_most_unity(r in 0.0f64..1e4, x in -1e4f64..1e4, z0 in 1.0f64..500.0) {
        prop_assume!(r > 0.0 || x != 0.0);
        let g = reflection_coefficient(Impedance::new(r, x), ReferenceImpedance::new(z0).unwrap()).unwrap();
        prop_assert!(g.magnitude() <= 1.0 + 1e-12);
        prop_assert!(s11_db(g) <= 1e-9);
    }

    #[test]
    fn gamma_impedance_round_trip(r in 0.01f64..1e3, x in -1e3f64..1e3) {
        let z0 = ReferenceImpedance::default();
        let back = reflection_coefficient(Impedance::new(r, x), z0).unwrap().to_impedance(z0).unwrap();
        let scale = r.abs().max(x.abs()).max(1.0);
        prop_assert!((back.resistance - r).abs() < 1e-9 * scale);
        prop_assert!((back.reactance - x).abs() < 1e-9 * scale);
    }

    #[test]
    fn admittance_round_trip(r in -1e3f64..1e3, x in -1e3f64..1e3) {
        prop_assume!(r.abs() + x.abs() > 1e-3);
        let z = Impedance::new(r, x);
        let back = admittance_to_impedance(impedance_to_admittance(z).unwrap()).unwrap();
        prop_assert!((back.resistance - r).abs() < 1e-9 * z.magnitude());
        prop_assert!((back.reactance - x).abs() < 1e-9 * z.magnitude());
    }
}
