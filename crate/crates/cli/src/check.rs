//! Property suite run by `hivelab check`: small exhaustive comparisons and
//! seeded random instances of the library invariants.

use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use hivelab::height::{is_tileable, LatticeDomain};
use hivelab::hive::{gt_from_minors, hive_from_gt, is_rhombus_concave, LargeGapTuple};
use hivelab::lozenge::geometry::Region;
use hivelab::lozenge::{
    enumerate_tilings, first_tiling, hive_value, lambda_offset, max_by_enumeration, max_weight_tiling, octahedron_field,
    tiling_weight, ExcavationHexagon, Triangle, WeightField, WeightForm,
};
use hivelab::qdiff::{cz_decompose, verify_cz, CZParams, RandomLipschitz};
use hivelab::randmat::sample_minor_process;
use hivelab::rng::derive_seed;

use crate::commands::rounding_gap;
use crate::config::RunConfig;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckRow {
    pub name: &'static str,
    pub cases: usize,
    pub failures: usize,
    /// Largest observed discrepancy, where one is defined.
    pub worst: f64,
}

impl CheckRow {
    pub fn passed(&self) -> bool {
        self.failures == 0 && self.cases > 0
    }
}

struct Tally {
    row: CheckRow,
}

impl Tally {
    fn new(name: &'static str) -> Self {
        Self { row: CheckRow { name, cases: 0, failures: 0, worst: 0.0 } }
    }

    fn record(&mut self, ok: bool, err: f64) {
        self.row.cases += 1;
        self.row.failures += !ok as usize;
        if err.is_finite() {
            self.row.worst = self.row.worst.max(err);
        } else {
            self.row.worst = f64::INFINITY;
        }
    }

    fn fail(&mut self) {
        self.record(false, f64::INFINITY);
    }
}

/// Random simply connected domain of `cells` triangles grown from one
/// triangle by adding random edge neighbours; `None` when the grown set has
/// a hole.
pub fn random_domain(rng: &mut impl Rng, cells: usize) -> Option<Vec<Triangle>> {
    let mut tris = vec![Triangle::lower(0, 0)];
    while tris.len() < cells {
        let t = *tris.choose(rng).expect("nonempty");
        let nb = *t.neighbours().choose(rng).expect("three neighbours");
        if !tris.contains(&nb) {
            tris.push(nb);
        }
    }
    let d = LatticeDomain::from_triangles(tris.clone()).ok()?;
    d.is_simply_connected().then_some(tris)
}

/// Random field on `{0..n}^2` with values in `[-1, 1)`.
pub fn random_field(rng: &mut impl Rng, n: i64) -> WeightField {
    let vals: Vec<f64> = (0..(n + 1) * (n + 1)).map(|_| rng.random_range(-1.0..1.0)).collect();
    WeightField::from_fn(n, |x, y| vals[(y * (n + 1) + x) as usize])
}

pub fn run(cfg: &RunConfig) -> Vec<CheckRow> {
    let trials = cfg.trials;
    let small = cfg.check.small_n;
    let seed = cfg.seed;
    let mut rows = Vec::new();

    let mut t = Tally::new("interlacing");
    let mut c = Tally::new("rhombus_concavity");
    let mut lam_inv = Tally::new("lambda_invariance");
    let mut octa = Tally::new("octahedron_vs_tiling");
    for k in 0..trials as u64 {
        let n = 2 + (k % (small as u64 - 1)) as usize;
        let (Ok(l), Ok(m)) = (sample_minor_process(n, 1.0, derive_seed(seed, 11), k), sample_minor_process(n, 1.0, derive_seed(seed, 12), k)) else {
            t.fail();
            continue;
        };
        t.record(l.check_interlacing(1e-9).is_ok(), l.interlacing_defect());
        let (Ok(gl), Ok(gm)) = (gt_from_minors(&l), gt_from_minors(&m)) else {
            c.fail();
            continue;
        };
        let spread = gl.spread().max(gm.spread());
        let (b1, b2) = (LargeGapTuple::default_for(n, spread), LargeGapTuple::with_gap(n, 5.0 * spread + 3.0));
        match hive_from_gt(&gl, &b1) {
            Ok(h) => c.record(is_rhombus_concave(&h).concave, 0.0),
            Err(_) => c.fail(),
        }
        for i in 1..n as i64 {
            for j in 1..n as i64 {
                let v = (i, j);
                match (hive_value(v, &gm, &gl, &b1), hive_value(v, &gm, &gl, &b2)) {
                    (Ok(a), Ok(b)) => {
                        let d = ((a - lambda_offset(v, &b1)) - (b - lambda_offset(v, &b2))).abs();
                        lam_inv.record(d <= 1e-9 * (1.0 + a.abs()), d);
                        match WeightField::from_patterns(&gm, &gl, &b1) {
                            Ok(w) => {
                                let e = (octahedron_field(&w).at(v) - a).abs();
                                octa.record(e <= 1e-9 * (1.0 + a.abs()), e);
                            }
                            Err(_) => octa.fail(),
                        }
                    }
                    _ => lam_inv.fail(),
                }
            }
        }
    }
    rows.extend([t.row, c.row, lam_inv.row, octa.row]);

    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, 13));
    let mut oracle = Tally::new("max_tiling_vs_enumeration");
    let mut forms = Tally::new("weight_forms");
    for k in 0..trials {
        let n = 2 + (k as i64 % (small - 1));
        let v = (rng.random_range(1..n), rng.random_range(1..n));
        let w = random_field(&mut rng, n);
        let Ok(h) = ExcavationHexagon::new(v, n) else {
            oracle.fail();
            continue;
        };
        match (max_weight_tiling(&h, &w, None), max_by_enumeration(&h, &w)) {
            (Ok((_, a)), Ok((b, _))) => oracle.record((a - b).abs() <= 1e-9, (a - b).abs()),
            _ => oracle.fail(),
        }
        match enumerate_tilings(&h) {
            Ok(all) => {
                for til in &all {
                    match (tiling_weight(til, &h, &w, WeightForm::Primal), tiling_weight(til, &h, &w, WeightForm::RedAvoiding)) {
                        (Ok(a), Ok(b)) => forms.record((a - b).abs() <= 1e-9, (a - b).abs()),
                        _ => forms.fail(),
                    }
                }
            }
            Err(_) => forms.fail(),
        }
    }
    rows.extend([oracle.row, forms.row]);

    let mut tile = Tally::new("tileability_vs_search");
    let mut attempts = 0;
    while tile.row.cases < trials && attempts < 20 * trials {
        attempts += 1;
        let cells = rng.random_range(2..=24);
        let Some(tris) = random_domain(&mut rng, cells) else {
            continue;
        };
        let brute = first_tiling(&Region::new(tris.clone(), None)).is_some();
        match LatticeDomain::from_triangles(tris).and_then(|d| is_tileable(&d)) {
            Ok(b) => tile.record(b == brute, 0.0),
            Err(_) => tile.fail(),
        }
    }
    rows.push(tile.row);

    let mut round = Tally::new("rounding_within_three");
    let r = cfg.check.round_n;
    for n in (2..=r).step_by(((r - 1) / 4).max(1) as usize) {
        for v in [(1, n - 1), (n / 2, n / 2), (n - 1, 1), ((n / 3).max(1), (2 * n / 3).max(1))] {
            match rounding_gap(v, n) {
                Ok(g) => round.record(g < 3.0, g),
                Err(_) => round.fail(),
            }
        }
    }
    rows.push(round.row);

    let mut cz = Tally::new("cz_decomposition");
    for k in 0..trials.min(20) as u64 {
        let field = RandomLipschitz::draw(derive_seed(seed, 100 + k)).sample(5);
        match cz_decompose(&field, CZParams::new(0.9, 0.5, 5)) {
            Ok(res) => cz.record(verify_cz(&field, &res).is_clean(), res.bad_volume()),
            Err(_) => cz.fail(),
        }
    }
    rows.push(cz.row);
    rows
}
