use hivelab::hive::{gt_from_minors, hive_from_gt, is_rhombus_concave, LargeGapTuple};
use hivelab::lozenge::{hive_value, lambda_offset};
use hivelab::randmat::{eigenvalues_hermitian, sample_gue_indexed, sample_minor_process};
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn spectrum_keeps_trace_and_frobenius_norm(n in 1usize..=24, var in 0.25f64..4.0, seed in any::<u64>(), idx in 0u64..1000) {
        let m = sample_gue_indexed(n, var, seed, idx).unwrap();
        let s = eigenvalues_hermitian(&m).unwrap();
        let scale = 1.0 + m.frobenius_norm();
        prop_assert!((s.sum() - m.trace()).abs() <= 1e-9 * scale * n as f64);
        let sq: f64 = s.values.iter().map(|x| x * x).sum();
        prop_assert!((sq - m.frobenius_norm().powi(2)).abs() <= 1e-9 * scale * scale * n as f64);
        prop_assert!(s.values.windows(2).all(|w| w[0] >= w[1]));
    }

    #[test]
    fn minor_rows_interlace(n in 2usize..=20, var in 0.25f64..4.0, seed in any::<u64>()) {
        let p = sample_minor_process(n, var, seed, 0).unwrap();
        for k in 1..n {
            let (lo, hi) = (&p.rows[k - 1], &p.rows[k]);
            prop_assert_eq!(lo.len(), k);
            prop_assert_eq!(hi.len(), k + 1);
            for i in 0..k {
                let tol = 1e-9 * (1.0 + hi[i].abs());
                prop_assert!(hi[i] + tol >= lo[i] && lo[i] + tol >= hi[i + 1], "level {k}, index {i}");
            }
        }
        prop_assert!(p.check_interlacing(1e-9).is_ok());
    }

    #[test]
    fn hives_from_minor_processes_are_rhombus_concave(n in 2usize..=16, seed in any::<u64>()) {
        let p = sample_minor_process(n, 1.0, seed, 1).unwrap();
        let g = gt_from_minors(&p).unwrap();
        let h = hive_from_gt(&g, &LargeGapTuple::default_for(n, g.spread())).unwrap();
        prop_assert!(is_rhombus_concave(&h).concave);
    }

    #[test]
    fn offset_removes_the_large_gap_tuple(n in 2usize..=5, seed in any::<u64>(), extra in 1.0f64..50.0) {
        let gl = gt_from_minors(&sample_minor_process(n, 1.0, seed, 2).unwrap()).unwrap();
        let gm = gt_from_minors(&sample_minor_process(n, 1.0, seed, 3).unwrap()).unwrap();
        let spread = gl.spread().max(gm.spread());
        let b1 = LargeGapTuple::default_for(n, spread);
        let b2 = LargeGapTuple::with_gap(n, b1.min_gap() + extra);
        for i in 1..n as i64 {
            for j in 1..n as i64 {
                let a = hive_value((i, j), &gm, &gl, &b1).unwrap() - lambda_offset((i, j), &b1);
                let b = hive_value((i, j), &gm, &gl, &b2).unwrap() - lambda_offset((i, j), &b2);
                prop_assert!((a - b).abs() <= 1e-9 * (1.0 + a.abs()), "v = ({i}, {j}): {a} vs {b}");
            }
        }
    }
}
