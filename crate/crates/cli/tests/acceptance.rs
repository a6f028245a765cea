//! Acceptance suite: one line per criterion, then a nonzero exit if any
//! criterion outside `KNOWN_UNATTAINABLE` fails.
//!
//! `ACCEPTANCE_ONLY=1,7` restricts the run to the listed criteria.

use std::collections::HashSet;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::Instant;

use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::Value;
use sha2::{Digest, Sha256};

use hivelab::height::{is_tileable, round_free, LatticeDomain, TiltVector};
use hivelab::hive::{gt_from_minors, hive_from_gt, is_rhombus_concave, GTPattern, LargeGapTuple};
use hivelab::lozenge::geometry::Region;
use hivelab::lozenge::{
    enumerate_tilings, first_tiling, hive_value, lambda_offset, max_by_enumeration, max_weight_tiling,
    octahedron_field, octahedron_recurrence, tiling_weight, ExcavationHexagon, Half, Side, Triangle, WeightField,
    WeightForm,
};
use hivelab::qdiff::{cz_decompose, verify_cz, CZParams, RandomLipschitz, Sampled, C_SHARP};
use hivelab::randmat::{normalized_gaps, sample_minor_process, MinorProcess};
use hivelab::tension::{hexagon_term, psi, sigma_m_from_processes, ProcessSource, TensionEstimate, TensionQuery};
use hivelab::varsolve::{
    default_tilt_nodes, estimate_table, f_ddagger, fit_position, maximize_sv, scaled_vertex, MaximizeConfig,
    TableConfig, TauField,
};
use hivelab_cli::commands::rounding_gap;

/// Criteria that fail for reasons analysed in the decisions ledger. Empty
/// means every criterion is expected to pass.
const KNOWN_UNATTAINABLE: &[u32] = &[];

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

/// GUE processes for `lambda` (stream 1) and `mu` (stream 2) of one trial.
fn pair(n: usize, seed: u64, t: u64) -> (MinorProcess, MinorProcess) {
    let l = sample_minor_process(n, 1.0, seed.wrapping_mul(2), t).unwrap();
    let m = sample_minor_process(n, 1.0, seed.wrapping_mul(2) + 1, t).unwrap();
    (l, m)
}

/// GT patterns `(mu, lambda)` and the default large-gap tuple.
fn patterns(l: &MinorProcess, m: &MinorProcess) -> (GTPattern, GTPattern, LargeGapTuple) {
    let (gl, gm) = (gt_from_minors(l).unwrap(), gt_from_minors(m).unwrap());
    let big = LargeGapTuple::default_for(l.n(), gl.spread().max(gm.spread()));
    (gm, gl, big)
}

fn gue_field(n: usize, seed: u64, t: u64) -> WeightField {
    let (l, m) = pair(n, seed, t);
    let (gm, gl, big) = patterns(&l, &m);
    WeightField::from_patterns(&gm, &gl, &big).unwrap()
}

fn interior(n: i64) -> impl Iterator<Item = (i64, i64)> {
    (1..n).flat_map(move |i| (1..n).map(move |j| (i, j)))
}

fn c1_oracle() -> Outcome {
    // every hexagon with area <= 40 exists for n <= 7 only up to the
    // enumeration bound; larger n have none below it
    let hexes: Vec<ExcavationHexagon> = (2..=7)
        .flat_map(|n| interior(n).map(move |v| ExcavationHexagon::new(v, n).unwrap()))
        .filter(|h| h.area() <= 40.0)
        .collect();
    let ns: Vec<i64> = {
        let mut s: Vec<i64> = hexes.iter().map(|h| h.n).collect();
        s.dedup();
        s
    };
    let (mut cases, mut worst) = (0usize, 0.0f64);
    for t in 0..200u64 {
        let n = ns[t as usize % ns.len()];
        let w = gue_field(n as usize, 101, t);
        for h in hexes.iter().filter(|h| h.n == n) {
            let (_, fast) = max_weight_tiling(h, &w, None).unwrap();
            let (brute, _) = max_by_enumeration(h, &w).unwrap();
            worst = worst.max((fast - brute).abs());
            cases += 1;
        }
    }
    outcome(worst <= 1e-9, format!("{cases} (hexagon, field) pairs over {} hexagons, max |diff| = {worst:.2e}", hexes.len()))
}

fn c2_weight_forms() -> Outcome {
    let (mut tilings, mut worst) = (0usize, 0.0f64);
    for n in 2..=4i64 {
        for t in 0..10u64 {
            let w = gue_field(n as usize, 202, t);
            for v in interior(n) {
                let h = ExcavationHexagon::new(v, n).unwrap();
                for til in enumerate_tilings(&h).unwrap() {
                    let a = tiling_weight(&til, &h, &w, WeightForm::Primal).unwrap();
                    let b = tiling_weight(&til, &h, &w, WeightForm::RedAvoiding).unwrap();
                    worst = worst.max((a - b).abs());
                    tilings += 1;
                }
            }
        }
    }
    outcome(worst <= 1e-9, format!("{tilings} tilings, max |primal - red-avoiding| = {worst:.2e}"))
}

fn c3_octahedron() -> Outcome {
    let (mut points, mut worst) = (0usize, 0.0f64);
    for t in 0..100u64 {
        let n = 2 + (t % 3) as usize;
        let (l, m) = pair(n, 303, t);
        let (gm, gl, big) = patterns(&l, &m);
        let (k, kp) = WeightField::from_patterns(&gm, &gl, &big).unwrap().hives();
        let out = octahedron_recurrence(&k, &kp).unwrap();
        for v in interior(n as i64) {
            let exact = hive_value(v, &gm, &gl, &big).unwrap();
            worst = worst.max((out.at(v) - exact).abs());
            points += 1;
        }
    }
    outcome(worst <= 1e-9, format!("100 instances, {points} vertices, max |diff| = {worst:.2e}"))
}

fn c4_concavity() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(404);
    let mut bad = 0;
    for t in 0..1000u64 {
        let n = rng.random_range(2..=30);
        let (l, m) = pair(n, 404, t);
        let (_, gl, _) = patterns(&l, &m);
        let big = LargeGapTuple::default_for(n, gl.spread());
        let h = hive_from_gt(&gl, &big).unwrap();
        bad += !is_rhombus_concave(&h).concave as usize;
    }
    outcome(bad == 0, format!("1000 hives with n in 2..=30, {bad} not rhombus-concave"))
}

fn c5_lambda_invariance() -> Outcome {
    let (mut points, mut worst) = (0usize, 0.0f64);
    for t in 0..100u64 {
        let n = 2 + (t % 5) as usize;
        let (l, m) = pair(n, 505, t);
        let (gm, gl, b1) = patterns(&l, &m);
        let b2 = LargeGapTuple::with_gap(n, 7.0 * gl.spread().max(gm.spread()) + 11.0);
        for v in interior(n as i64) {
            let a = hive_value(v, &gm, &gl, &b1).unwrap() - lambda_offset(v, &b1);
            let b = hive_value(v, &gm, &gl, &b2).unwrap() - lambda_offset(v, &b2);
            worst = worst.max((a - b).abs());
            points += 1;
        }
    }
    outcome(worst <= 1e-9, format!("100 instances, {points} vertices, max |diff| = {worst:.2e}"))
}

/// Semicircle CDF by Simpson quadrature of `sqrt(4 - x^2) / (2 pi)`.
fn semicircle_cdf_numeric(u: f64) -> f64 {
    let u = u.clamp(-2.0, 2.0);
    let steps = 2000;
    let h = (u + 2.0) / steps as f64;
    let rho = |x: f64| (4.0 - x * x).max(0.0).sqrt() / (2.0 * std::f64::consts::PI);
    let mut s = rho(-2.0) + rho(u);
    for k in 1..steps {
        s += rho(-2.0 + k as f64 * h) * if k % 2 == 1 { 4.0 } else { 2.0 };
    }
    s * h / 3.0
}

fn c6_semicircle() -> Outcome {
    let start = Instant::now();
    let n = 200;
    let procs: Vec<MinorProcess> = (0..50).map(|t| sample_minor_process(n, 1.0, 606, t).unwrap()).collect();
    let mut pooled: Vec<f64> = procs.iter().flat_map(|p| p.top().values.iter().map(|x| x / n as f64).collect::<Vec<_>>()).collect();
    pooled.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let len = pooled.len() as f64;
    let ks = pooled.iter().enumerate().fold(0.0f64, |d, (k, &x)| {
        let c = semicircle_cdf_numeric(x);
        d.max((c - k as f64 / len).abs()).max(((k + 1) as f64 / len - c).abs())
    });
    // bulk gaps, normalized by the local semicircle density
    let quantile = |p: f64| {
        let (mut a, mut b) = (-2.0f64, 2.0f64);
        for _ in 0..60 {
            let mid = 0.5 * (a + b);
            if semicircle_cdf_numeric(mid) < p {
                a = mid;
            } else {
                b = mid;
            }
        }
        0.5 * (a + b)
    };
    let (delta, mut sum, mut count, mut lib_dev) = (0.2, 0.0, 0usize, 0.0f64);
    let (lo, hi) = ((delta * n as f64) as usize, ((1.0 - delta) * n as f64) as usize);
    for p in &procs {
        let asc: Vec<f64> = p.top().values.iter().rev().copied().collect();
        for i in lo..hi {
            let g = quantile(i as f64 / n as f64);
            let rho = (4.0 - g * g).sqrt() / (2.0 * std::f64::consts::PI);
            let gap = n as f64 * rho * (asc[i] - asc[i - 1]) / n as f64;
            sum += gap;
            count += 1;
            lib_dev = lib_dev.max((normalized_gaps(p, i, delta).unwrap().0 - gap).abs());
        }
    }
    let mean_gap = sum / count as f64;
    let secs = start.elapsed().as_secs_f64();
    outcome(
        ks < 0.05 && (mean_gap - 1.0).abs() <= 0.05 && lib_dev < 1e-4 && secs <= 600.0,
        format!("KS = {ks:.4} (< 0.05), bulk mean gap = {mean_gap:.4} (within 5% of 1), library gaps agree to {lib_dev:.1e}, {secs:.0} s"),
    )
}

fn c7_concentration() -> Outcome {
    let mut vars = Vec::new();
    for n in [50usize, 100, 200] {
        let v = (n as i64 / 2, n as i64 / 2);
        let xs: Vec<f64> = (0..100u64)
            .map(|t| {
                let (l, m) = pair(n, 707, t);
                let (gm, gl, big) = patterns(&l, &m);
                let w = WeightField::from_patterns(&gm, &gl, &big).unwrap();
                (octahedron_field(&w).at(v) - lambda_offset(v, &big)) / (n * n) as f64
            })
            .collect();
        let mean = xs.iter().sum::<f64>() / xs.len() as f64;
        vars.push(xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (xs.len() - 1) as f64);
    }
    let pass = vars[1] < vars[0] && vars[2] < vars[1];
    outcome(pass, format!("variance of h~(centre)/n^2 at n = 50, 100, 200: {:.3e}, {:.3e}, {:.3e}", vars[0], vars[1], vars[2]))
}

/// Random simply connected domain with equal numbers of up and down
/// triangles and at most `2 * max_area` triangles.
fn balanced_domain(rng: &mut ChaCha8Rng, max_area: usize) -> Vec<Triangle> {
    loop {
        let cells = 2 * rng.random_range(1..=max_area);
        let mut tris = vec![Triangle::lower(0, 0)];
        while tris.len() < cells {
            let t = *tris.choose(rng).unwrap();
            let nb = *t.neighbours().choose(rng).unwrap();
            if !tris.contains(&nb) {
                tris.push(nb);
            }
        }
        let lower = tris.iter().filter(|t| t.half == Half::Lower).count();
        if 2 * lower != tris.len() {
            continue;
        }
        if LatticeDomain::from_triangles(tris.clone()).unwrap().is_simply_connected() {
            return tris;
        }
    }
}

fn c8_thurston() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(808);
    let (mut disagree, mut tileable) = (0, 0);
    for _ in 0..1000 {
        let tris = balanced_domain(&mut rng, 24);
        let brute = first_tiling(&Region::new(tris.clone(), None)).is_some();
        let d = LatticeDomain::from_triangles(tris).unwrap();
        let thurston = is_tileable(&d).unwrap();
        disagree += (brute != thurston) as usize;
        tileable += brute as usize;
    }
    outcome(disagree == 0, format!("1000 balanced domains of area <= 24 ({tileable} tileable), {disagree} disagreements"))
}

fn c9_rounding() -> Outcome {
    let mut worst = 0.0f64;
    let mut cases = 0;
    for n in [10i64, 20, 30, 40, 50, 60] {
        for v in [(n / 4, n / 2), (n / 2, n / 2), (n / 2, n / 4), (1, n - 1), (n - 1, 1)] {
            worst = worst.max(rounding_gap(v, n).unwrap());
            cases += 1;
        }
    }
    let dagger_worst = worst;
    let mut rng = ChaCha8Rng::seed_from_u64(909);
    for k in 0..20 {
        let n = [20i64, 40, 60][k % 3];
        let v = (rng.random_range(1..n), rng.random_range(1..n));
        let h = ExcavationHexagon::new(v, n).unwrap();
        let w: Vec<f64> = (0..3).map(|_| rng.random_range(0.1..1.0)).collect();
        let s: f64 = w.iter().sum();
        let kv = TiltVector::K_VERTICES;
        let tilt = TiltVector::new(
            (0..3).map(|i| w[i] / s * kv[i].g[0]).sum(),
            (0..3).map(|i| w[i] / s * kv[i].g[1]).sum(),
        );
        let c = rng.random_range(-5.0..5.0);
        let f = |p: (i64, i64)| tilt.apply(p) + c;
        let d = LatticeDomain::from_triangles(h.triangles()).unwrap();
        let g = round_free(&d, f).unwrap();
        // free rounding has no boundary condition: every step is 1 or -2
        let steps_ok = d.edges().iter().all(|(e, _)| matches!(g.get(e.to).unwrap() - g.get(e.from).unwrap(), 1 | -2));
        if !steps_ok {
            worst = f64::INFINITY;
        }
        for &p in d.points() {
            worst = worst.max((f(p) - g.get(p).unwrap() as f64).abs());
        }
        cases += 1;
    }
    outcome(worst < 3.0, format!("{cases} fields on hexagons up to n = 60, sup |f - round(f)| = {worst:.4} (f-dagger alone {dagger_worst:.4})"))
}

fn c10_cz() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1010);
    let (mut dirty, mut worst_ratio) = (0, 0.0f64);
    for t in 0..100u64 {
        let p = loop {
            let p = CZParams::new(rng.random_range(0.6..1.0), rng.random_range(0.2..1.0), rng.random_range(2..=8));
            if p.product() >= C_SHARP {
                break p;
            }
        };
        let f = RandomLipschitz::draw(t).sample(p.k);
        let r = cz_decompose(&f, p).unwrap();
        let rep = verify_cz(&f, &r);
        dirty += (!rep.sup_violations.is_empty() || rep.bad_volume > p.eta || !rep.is_clean()) as usize;
        worst_ratio = worst_ratio.max(rep.bad_volume / p.eta);
    }
    let mut single = 0;
    let p = CZParams::new(0.8, 0.5, 6);
    for f in [Sampled::for_depth(6, |_, _| 0.3), Sampled::for_depth(6, |x, y| 0.2 + 0.6 * x - 0.7 * y)] {
        let r = cz_decompose(&f, p).unwrap();
        single += (r.good.len() == 1 && r.bad.is_empty()) as usize;
    }
    outcome(
        dirty == 0 && single == 2,
        format!("100 random fields: {dirty} with violations, max bad volume / eta = {worst_ratio:.3}; constant and affine give one GOOD cube: {}", single == 2),
    )
}

/// Tilts of the tension grid: half of each corner of `K`, the midpoint of
/// the first two of those, and the origin.
fn grid_tilts() -> Vec<TiltVector> {
    let k = TiltVector::K_VERTICES;
    let mut t: Vec<TiltVector> = k.iter().map(|v| TiltVector::new(v.g[0] / 2.0, v.g[1] / 2.0)).collect();
    t.push(TiltVector::new((k[0].g[0] + k[1].g[0]) / 4.0, (k[0].g[1] + k[1].g[1]) / 4.0));
    t.push(TiltVector::new(0.0, 0.0));
    t
}

const C11_MS: [usize; 3] = [4, 8, 16];
const C11_N: usize = 160;

struct TensionGrid {
    /// `[tilt][m]`, default corridor.
    wide: Vec<Vec<TensionEstimate>>,
    /// `[tilt][m]`, radius-2 corridor.
    narrow: Vec<Vec<TensionEstimate>>,
}

fn combined(a: &TensionEstimate, b: &TensionEstimate) -> f64 {
    (a.std_error.powi(2) + b.std_error.powi(2)).sqrt()
}

fn c11_tension() -> (Outcome, TensionGrid) {
    let start = Instant::now();
    let n = C11_N;
    let processes = ProcessSource { n, variance: 1.0, seed: 1111 }.samples(200).unwrap();
    let position = fit_position((0.5, 0.7), *C11_MS.iter().max().unwrap(), n).unwrap();
    let tilts = grid_tilts();
    let est = |tilt: TiltVector, m: usize, eps: Option<f64>| {
        let q = TensionQuery { side: Side::Lo, position, tilt, m, eps, trials: 200 };
        sigma_m_from_processes(&q, &processes).unwrap()
    };
    let wide: Vec<Vec<TensionEstimate>> = tilts.iter().map(|&t| C11_MS.iter().map(|&m| est(t, m, None)).collect()).collect();
    let narrow: Vec<Vec<TensionEstimate>> =
        tilts.iter().map(|&t| C11_MS.iter().map(|&m| est(t, m, Some(2.0 / m as f64))).collect()).collect();

    let mut notes = Vec::new();
    // nonnegativity
    let neg = wide.iter().chain(&narrow).flatten().filter(|e| e.mean < -3.0 * e.std_error).count();
    notes.push(format!("negative cells {neg}"));
    // eps-monotonicity: a narrower corridor never raises the maximum
    let mut eps_viol = 0;
    for (w, s) in wide.iter().flatten().zip(narrow.iter().flatten()) {
        assert!(psi(w.m).unwrap() > s.eps);
        eps_viol += w.samples.iter().zip(&s.samples).filter(|(a, b)| **a > **b + 1e-9).count();
    }
    notes.push(format!("eps violations {eps_viol}/{}", 200 * wide.len() * C11_MS.len()));
    // m-monotonicity: non-increasing in m within 3 s.e. under the default
    // corridor; the fixed radius-2 corridor widens relative to the window as
    // m grows, so its trend is reported only
    let mono = |grid: &Vec<Vec<TensionEstimate>>| {
        let mut breaks = Vec::new();
        for (k, row) in grid.iter().enumerate() {
            for w in row.windows(2) {
                let z = (w[1].mean - w[0].mean) / combined(&w[0], &w[1]);
                if z > 3.0 {
                    breaks.push(format!("tilt {k} m {}->{} {:.3}->{:.3} (+{z:.1} s.e.)", w[0].m, w[1].m, w[0].mean, w[1].mean));
                }
            }
        }
        breaks
    };
    let (mono_w, mono_n) = (mono(&wide), mono(&narrow));
    notes.push(format!(
        "m-monotonicity breaks {} (default corridor) [{}]; radius-2 increases beyond 3 s.e.: {} [{}]",
        mono_w.len(),
        mono_w.join("; "),
        mono_n.len(),
        mono_n.join("; ")
    ));
    // midpoint convexity: tilt 3 is the midpoint of tilts 0 and 1
    let mut conv = 0;
    let mut slack = Vec::new();
    for grid in [&wide, &narrow] {
        for k in 0..C11_MS.len() {
            let (a, b, c) = (&grid[0][k], &grid[1][k], &grid[3][k]);
            let se = (c.std_error.powi(2) + (a.std_error.powi(2) + b.std_error.powi(2)) / 4.0).sqrt();
            let gap = c.mean - 0.5 * (a.mean + b.mean);
            slack.push(gap / se);
            conv += (gap > 3.0 * se) as usize;
        }
    }
    let worst_slack = slack.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    notes.push(format!("midpoint breaks {conv} (worst {worst_slack:.2} s.e.)"));
    let secs = start.elapsed().as_secs_f64();
    notes.push(format!("{secs:.0} s"));
    let pass = neg == 0 && eps_viol == 0 && mono_w.is_empty() && conv == 0 && secs <= 1800.0;
    (outcome(pass, format!("5 tilts x m in {C11_MS:?} x 200 trials: {}", notes.join(", "))), TensionGrid { wide, narrow })
}

struct SolveSetting {
    m: usize,
    eps: Option<f64>,
}

fn c12_variational(grid: &TensionGrid) -> Outcome {
    let n = 200;
    let v = (50, 100);
    let trials = 40;
    let lam: Vec<MinorProcess> = (0..trials).map(|t| sample_minor_process(n, 1.0, 1201, t).unwrap()).collect();
    let mu: Vec<MinorProcess> = (0..trials).map(|t| sample_minor_process(n, 1.0, 1202, t).unwrap()).collect();
    let spread = lam.iter().chain(&mu).map(|p| p.top().spread()).fold(0.0, f64::max);
    let big = LargeGapTuple::with_gap(n, 4.0 * spread + 1.0);
    let off = lambda_offset(v, &big);
    let fields: Vec<WeightField> = lam
        .iter()
        .zip(&mu)
        .map(|(l, m)| WeightField::from_patterns(&gt_from_minors(m).unwrap(), &gt_from_minors(l).unwrap(), &big).unwrap())
        .collect();
    let emp: Vec<f64> = fields.iter().map(|w| (octahedron_field(w).at(v) - off) / (n * n) as f64).collect();
    let mean = emp.iter().sum::<f64>() / emp.len() as f64;
    let hex = hexagon_term(&fields, v, off).unwrap();
    let tau = TauField::from_processes(&mu, &lam).unwrap();
    let mut nodes = default_tilt_nodes();
    for t in grid_tilts() {
        if !nodes.contains(&t) {
            nodes.push(t);
        }
    }
    let res = 24;
    let h = ExcavationHexagon::new(scaled_vertex(v, n as i64, res).unwrap(), res).unwrap();
    let start = f_ddagger(&h).unwrap();
    let solve = |s: &SolveSetting| {
        let cfg = TableConfig {
            eps: s.eps,
            nodes: nodes.clone(),
            quantiles: vec![0.02, 0.15, 0.5, 0.85, 0.98],
            level_fracs: vec![0.3, 0.6, 0.9, 1.0],
            ..TableConfig::new(s.m, 30)
        };
        let table = estimate_table(&cfg, &mu, &lam).unwrap().convexified();
        let best = maximize_sv(&start, &table, &tau, hex.mean, &MaximizeConfig { iterations: 500, gap_tol: 1e-9 }).unwrap();
        (best.value.total, (best.value.total - mean).abs() / mean.abs())
    };
    let m_top = *C11_MS.last().unwrap();
    let primary = SolveSetting { m: m_top, eps: Some(2.0 / m_top as f64) };
    let (value, rel) = solve(&primary);
    let mut rows = vec![format!("m = {m_top}, radius 2: max S_v = {value:.4}, rel {rel:.3}")];
    for s in [SolveSetting { m: 8, eps: Some(0.25) }, SolveSetting { m: 8, eps: None }] {
        let (val, r) = solve(&s);
        let corridor = if s.eps.is_some() { "radius 2".to_string() } else { format!("eps = psi(m) = {:.3}", psi(s.m).unwrap()) };
        rows.push(format!("sensitivity m = {}, {corridor}: max S_v = {val:.4}, rel {r:.3}", s.m));
    }
    // the grid from criterion 11 at the same m, for reference
    let at_centre = &grid.narrow[4][C11_MS.len() - 1];
    rows.push(format!("grid sigma at the centre tilt, radius 2: {:.4} +- {:.4}", at_centre.mean, at_centre.std_error));
    let _ = &grid.wide;
    outcome(
        rel <= 0.10,
        format!("v = {v:?}, n = {n}: empirical n^-2 h~ = {mean:.4} ({trials} trials); {}", rows.join("; ")),
    )
}

fn file_hashes(dir: &Path, manifest: &Value) -> Vec<(String, String)> {
    manifest["record"]["outputs"]
        .as_array()
        .unwrap()
        .iter()
        .map(|o| {
            let p = o["path"].as_str().unwrap().to_string();
            let data = std::fs::read(dir.join(&p)).unwrap();
            (p, hex::encode(Sha256::digest(&data)))
        })
        .collect()
}

fn c13_determinism() -> Outcome {
    let root = std::env::temp_dir().join(format!("hivelab-acceptance-{}", std::process::id()));
    let cfg = root.join("cfg.toml");
    std::fs::create_dir_all(&root).unwrap();
    std::fs::write(&cfg, "[sample_hive]\nn = 30\n[tension]\nn = 40\nm_schedule = [3, 5]\n[czd]\nfield = \"random\"\n").unwrap();
    let mut mismatches = Vec::new();
    let mut files = 0;
    for cmd in ["sample-hive", "tension", "czd"] {
        let mut seen: Vec<(String, Value, Vec<(String, String)>)> = Vec::new();
        for (run, threads) in [("a", "1"), ("b", "1"), ("c", "4")] {
            let out: PathBuf = root.join(format!("{cmd}-{run}"));
            let status = Command::new(env!("CARGO_BIN_EXE_hivelab"))
                .args([cmd, "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()])
                .args(["--seed", "13", "--trials", "20", "--threads", threads])
                .stdout(std::process::Stdio::null())
                .status()
                .unwrap();
            assert!(status.success(), "{cmd} failed");
            let m: Value = serde_json::from_str(&std::fs::read_to_string(out.join("manifest.json")).unwrap()).unwrap();
            let hashes = file_hashes(&out, &m);
            seen.push((run.to_string(), m, hashes));
        }
        files += seen[0].2.len();
        for other in &seen[1..] {
            if other.1["record_sha256"] != seen[0].1["record_sha256"] || other.2 != seen[0].2 {
                mismatches.push(format!("{cmd} run {}", other.0));
            }
        }
    }
    let _ = std::fs::remove_dir_all(&root);
    outcome(
        mismatches.is_empty(),
        format!("3 commands x (2 runs at 1 thread + 1 run at 4 threads), {files} files per run set; mismatches: {mismatches:?}"),
    )
}

fn main() {
    let only: Option<HashSet<u32>> =
        std::env::var("ACCEPTANCE_ONLY").ok().map(|s| s.split(',').filter_map(|x| x.trim().parse().ok()).collect());
    let want = |k: u32| only.as_ref().is_none_or(|s| s.contains(&k));
    let names = [
        "oracle equivalence (tilings)",
        "weight-form agreement",
        "octahedron consistency",
        "rhombus concavity",
        "large-gap invariance",
        "semicircle and gaps",
        "concentration trend",
        "tileability criterion",
        "rounding bound",
        "dyadic decomposition",
        "surface-tension properties",
        "variational consistency",
        "determinism",
    ];
    let mut results: Vec<(u32, Outcome)> = Vec::new();
    let mut grid = None;
    for k in 1..=13u32 {
        let needs_grid = k == 12 && want(12);
        if !want(k) && !(k == 11 && needs_grid) {
            continue;
        }
        let t = Instant::now();
        let o = match k {
            1 => c1_oracle(),
            2 => c2_weight_forms(),
            3 => c3_octahedron(),
            4 => c4_concavity(),
            5 => c5_lambda_invariance(),
            6 => c6_semicircle(),
            7 => c7_concentration(),
            8 => c8_thurston(),
            9 => c9_rounding(),
            10 => c10_cz(),
            11 => {
                let (o, g) = c11_tension();
                grid = Some(g);
                o
            }
            12 => c12_variational(grid.as_ref().expect("criterion 11 runs first")),
            _ => c13_determinism(),
        };
        if !want(k) {
            continue;
        }
        let tag = if o.pass { "PASS" } else if KNOWN_UNATTAINABLE.contains(&k) { "FAIL (known)" } else { "FAIL" };
        println!("criterion {k:>2} {tag}: {} | {} | {:.1} s", names[k as usize - 1], o.detail, t.elapsed().as_secs_f64());
        results.push((k, o));
    }
    let unexpected: Vec<u32> = results.iter().filter(|(k, o)| !o.pass && !KNOWN_UNATTAINABLE.contains(k)).map(|(k, _)| *k).collect();
    let passed = results.iter().filter(|(_, o)| o.pass).count();
    println!("acceptance: {passed}/{} passed", results.len());
    if !unexpected.is_empty() {
        println!("unexpected failures: {unexpected:?}");
        std::process::exit(1);
    }
}
