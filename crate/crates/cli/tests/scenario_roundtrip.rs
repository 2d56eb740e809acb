use ldprice::parse_scenario;
use ldprice_core::{
    validate, Breakpoint, LoadSpec, Mechanism, OptionsSpec, PlantSpec, ScenarioFile,
};
use proptest::prelude::*;

fn arb_load(horizon: f64) -> impl Strategy<Value = LoadSpec> {
    prop_oneof![
        (0.0f64..1e3, 0.0f64..1e3)
            .prop_map(|(base, slope)| LoadSpec::Affine(ldprice_core::AffineLoad { base, slope })),
        prop::collection::vec((0.01f64..1.0, 0.0f64..1e3), 1..6).prop_map(move |steps| {
            let total: f64 = steps.iter().map(|s| s.0).sum();
            let mut t = 0.0;
            let mut pts = vec![Breakpoint {
                time: 0.0,
                power: steps[0].1,
            }];
            for (i, (dt, p)) in steps.iter().enumerate() {
                t += dt;
                let time = if i + 1 == steps.len() {
                    horizon
                } else {
                    t * horizon / total
                };
                pts.push(Breakpoint { time, power: *p });
            }
            LoadSpec::Breakpoints(pts)
        }),
    ]
}

fn arb_file() -> impl Strategy<Value = ScenarioFile> {
    (0.1f64..48.0).prop_flat_map(|horizon| {
        let plants = prop::collection::vec(
            (
                1e-5f64..1.0,
                0.0f64..1.0,
                0.0f64..10.0,
                prop::option::of(0.0f64..10.0),
            ),
            1..5,
        )
        .prop_map(|ps| {
            ps.into_iter()
                .enumerate()
                .map(|(j, (q2, q1, q0, p_min))| PlantSpec {
                    id: format!("unit-{j}"),
                    q2,
                    q1,
                    q0,
                    p_min,
                    p_max: p_min.map(|lo| lo + 500.0),
                })
                .collect::<Vec<_>>()
        });
        let options = (
            prop::option::of((1usize..5000).prop_map(|n| 2 * n)),
            prop::option::of(1e-9f64..1e-3),
            prop::option::of(any::<bool>()),
            prop::option::of(prop::sample::subsequence(
                vec![Mechanism::Spot, Mechanism::Duration],
                1..=2,
            )),
        )
            .prop_map(
                move |(grid_n, m_floor, allow_clamp, mechanisms)| OptionsSpec {
                    grid_n,
                    m_floor: m_floor.map(|f| f * horizon),
                    allow_clamp,
                    mechanisms,
                },
            );
        (Just(horizon), arb_load(horizon), plants, options).prop_map(
            |(horizon, load, plants, options)| ScenarioFile {
                name: "random".into(),
                horizon,
                load,
                plants,
                options,
            },
        )
    })
}

proptest! {
    #[test]
    fn serialize_then_validate_is_identity(raw in arb_file()) {
        let scenario = validate(&raw).expect("generated scenarios are valid");
        let text = serde_json::to_string(&scenario.to_file()).unwrap();
        prop_assert_eq!(parse_scenario(&text).unwrap(), scenario);
    }
}

#[test]
fn builtin_case_study_validates_cleanly() {
    let s = ldprice_core::builtin_case_study();
    assert_eq!(validate(&s.to_file()), Ok(s));
}
