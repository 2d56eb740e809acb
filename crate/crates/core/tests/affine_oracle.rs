//! Affine load, quadratic fleet: every settlement quantity has a closed form.

use ldprice_core::{
    dispatch_cost, duration_price, settle_duration, settle_spot, solve_equilibrium, spot_price,
    LoadCurve, Plant, QuadraticCost, QuadratureConfig,
};
use proptest::prelude::*;

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1e-9)
}

fn arb_instance() -> impl Strategy<Value = (Vec<(f64, f64, f64)>, f64, f64, f64)> {
    (
        prop::collection::vec((1e-4f64..1e-2, 0.0f64..0.5, 0.0f64..5.0), 1..5),
        1.0f64..500.0,
        0.0f64..100.0,
        0.25f64..24.0,
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn settlement_matches_closed_form((coefs, margin, slope, horizon) in arb_instance()) {
        let top = coefs.iter().map(|c| c.1).fold(0.0, f64::max);
        let inv: f64 = coefs.iter().map(|c| 1.0 / (2.0 * c.0)).sum();
        let base = coefs.iter().map(|c| (top - c.1) / (2.0 * c.0)).sum::<f64>() + margin;
        let plants: Vec<Plant> = coefs
            .iter()
            .enumerate()
            .map(|(j, &(q2, q1, q0))| Plant::new(format!("g{j}"), QuadraticCost::new(q2, q1, q0).unwrap()))
            .collect();
        let load = LoadCurve::affine(base, slope, horizon).unwrap();
        let sol = solve_equilibrium(&plants, &load).unwrap();
        let cfg = QuadratureConfig::default();

        // λ = l0 + l1 t and P_j = a_j + b_j t
        let shift: f64 = coefs.iter().map(|c| c.1 / (2.0 * c.0)).sum();
        let (l0, l1) = ((base + shift) / inv, slope / inv);
        let t = horizon;
        let costs = dispatch_cost(&sol, &cfg).unwrap();
        let spot = settle_spot(&sol, &spot_price(&sol), &cfg).unwrap();
        let price = duration_price(&sol, &cfg).unwrap();
        let duration = settle_duration(&sol, &price, &cfg).unwrap();
        for (j, &(q2, q1, q0)) in coefs.iter().enumerate() {
            let (a, b) = ((l0 - q1) / (2.0 * q2), l1 / (2.0 * q2));
            let cost = q2 * (a * a * t + a * b * t * t + b * b * t * t * t / 3.0) + q1 * (a * t + b * t * t / 2.0) + q0 * t;
            let spot_rev = l0 * a * t + (l0 * b + l1 * a) * t * t / 2.0 + l1 * b * t * t * t / 3.0;
            let dur_rev = l0 * a * t + b * (l0 * t * t / 2.0 + l1 * t * t * t / 2.0);
            prop_assert!(rel(costs.per_plant[j], cost) < 1e-8, "cost {} vs {}", costs.per_plant[j], cost);
            prop_assert!(rel(spot.plants[j].revenue, spot_rev) < 1e-8);
            prop_assert!(rel(duration.plants[j].revenue, dur_rev) < 1e-8,
                "duration revenue {} vs {}", duration.plants[j].revenue, dur_rev);
        }
        // both mechanisms pay for the same energy
        prop_assert!(rel(spot.total_energy, duration.total_energy) < 1e-12);
    }
}
