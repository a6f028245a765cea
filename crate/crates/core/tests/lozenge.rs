use hivelab::hive::{gt_from_minors, LargeGapTuple};
use hivelab::lozenge::{
    enumerate_tilings, hive_value, max_by_enumeration, max_weight_tiling, octahedron_field, tiling_weight, validate_tiling,
    ExcavationHexagon, WeightField, WeightForm,
};
use hivelab::randmat::sample_minor_process;
use proptest::prelude::*;

/// Hexagon size, interior vertex and field values in `[-1, 1)`.
fn instance() -> impl Strategy<Value = (i64, (i64, i64), Vec<f64>)> {
    (2i64..=4).prop_flat_map(|n| {
        let cells = ((n + 1) * (n + 1)) as usize;
        (Just(n), (1..n, 1..n), prop::collection::vec(-1.0f64..1.0, cells))
    })
}

fn field(n: i64, vals: &[f64]) -> WeightField {
    WeightField::from_fn(n, |x, y| vals[(y * (n + 1) + x) as usize])
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn flow_maximum_equals_enumeration((n, v, vals) in instance()) {
        let h = ExcavationHexagon::new(v, n).unwrap();
        let w = field(n, &vals);
        let (t, value) = max_weight_tiling(&h, &w, None).unwrap();
        let (best, _) = max_by_enumeration(&h, &w).unwrap();
        prop_assert!(validate_tiling(&h, &t).is_ok());
        prop_assert!((value - best).abs() <= 1e-9, "{value} vs {best}");
        let own = tiling_weight(&t, &h, &w, WeightForm::Primal).unwrap();
        prop_assert!((own - value).abs() <= 1e-9);
    }

    #[test]
    fn weight_forms_agree_on_every_tiling((n, v, vals) in instance()) {
        let h = ExcavationHexagon::new(v, n).unwrap();
        let w = field(n, &vals);
        for t in enumerate_tilings(&h).unwrap() {
            let a = tiling_weight(&t, &h, &w, WeightForm::Primal).unwrap();
            let b = tiling_weight(&t, &h, &w, WeightForm::RedAvoiding).unwrap();
            prop_assert!((a - b).abs() <= 1e-9, "{a} vs {b}");
        }
    }

    #[test]
    fn octahedron_matches_tilings_on_gue_data(n in 2usize..=5, seed in any::<u64>()) {
        let gl = gt_from_minors(&sample_minor_process(n, 1.0, seed, 0).unwrap()).unwrap();
        let gm = gt_from_minors(&sample_minor_process(n, 1.0, seed, 1).unwrap()).unwrap();
        let big = LargeGapTuple::default_for(n, gl.spread().max(gm.spread()));
        let w = WeightField::from_patterns(&gm, &gl, &big).unwrap();
        let oct = octahedron_field(&w);
        for i in 1..n as i64 {
            for j in 1..n as i64 {
                let direct = hive_value((i, j), &gm, &gl, &big).unwrap();
                prop_assert!((oct.at((i, j)) - direct).abs() <= 1e-9 * (1.0 + direct.abs()));
            }
        }
    }
}
