use hivelab::height::{dagger, is_tileable, round_asymptotic, LatticeDomain};
use hivelab::lozenge::geometry::Region;
use hivelab::lozenge::{first_tiling, validate_tiling, ExcavationHexagon, Side, Triangle};
use hivelab::tension::{psi, sigma_m_from_processes, ProcessSource, TensionQuery};
use hivelab::height::TiltVector;
use hivelab::varsolve::fit_position;
use proptest::prelude::*;
use rand::seq::IndexedRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Triangles grown from one seed triangle by random edge neighbours.
fn grown(seed: u64, cells: usize) -> Vec<Triangle> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut tris = vec![Triangle::lower(0, 0)];
    while tris.len() < cells {
        let t = *tris.choose(&mut rng).unwrap();
        let nb = *t.neighbours().choose(&mut rng).unwrap();
        if !tris.contains(&nb) {
            tris.push(nb);
        }
    }
    tris
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn tileability_matches_search(seed in any::<u64>(), cells in 2usize..=20) {
        let tris = grown(seed, cells);
        let d = LatticeDomain::from_triangles(tris.clone()).unwrap();
        prop_assume!(d.is_simply_connected());
        let found = first_tiling(&Region::new(tris, None)).is_some();
        prop_assert_eq!(is_tileable(&d).unwrap(), found);
    }

    #[test]
    fn rounding_stays_within_three(n in 2i64..=24, a in 0.0f64..1.0, b in 0.0f64..1.0) {
        let v = (1 + (a * (n - 1) as f64) as i64 % (n - 1), 1 + (b * (n - 1) as f64) as i64 % (n - 1));
        let h = ExcavationHexagon::new(v, n).unwrap();
        let f = dagger(&h);
        let r = round_asymptotic(&f).unwrap();
        for side in [Side::Up, Side::Lo] {
            for p in f.side(side).points() {
                let d = f.side(side).get(p).unwrap() - r.side(side).get(p).unwrap() as f64;
                prop_assert!(d.abs() < 3.0, "n = {n}, v = {v:?}, {p:?}: {d}");
            }
        }
        prop_assert!(validate_tiling(&h, &r.to_tiling().unwrap()).is_ok());
    }

    #[test]
    fn psi_decreases_while_m_psi_grows(m in 3usize..100_000) {
        let (a, b) = (psi(m).unwrap(), psi(m + 1).unwrap());
        prop_assert!(b < a && a <= 1.0);
        prop_assert!((m + 1) as f64 * b > m as f64 * a);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    #[test]
    fn narrowing_the_corridor_never_raises_the_maximum(seed in any::<u64>(), tilt in 0usize..4, m in 3usize..=5) {
        let processes = ProcessSource { n: 24, variance: 1.0, seed }.samples(4).unwrap();
        let t = [TiltVector::new(0.0, 0.0), TiltVector::new(0.5, 0.0), TiltVector::new(0.0, 0.5), TiltVector::new(-0.5, 0.0)][tilt];
        let position = fit_position((0.5, 0.6), m, 24).unwrap();
        let q = |eps| TensionQuery { side: Side::Lo, position, tilt: t, m, eps, trials: 4 };
        let wide = sigma_m_from_processes(&q(None), &processes).unwrap();
        let narrow = sigma_m_from_processes(&q(Some(2.0 / m as f64)), &processes).unwrap();
        for (w, s) in wide.samples.iter().zip(&narrow.samples) {
            prop_assert!(*s >= *w - 1e-9, "{s} < {w}");
        }
        prop_assert!(wide.mean >= -3.0 * wide.std_error - 1e-12);
    }
}
