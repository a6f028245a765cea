//! The subcommand drivers. Each one computes, writes its files through
//! [`OutDir`] and returns a JSON summary for the manifest.

use rayon::prelude::*;
use serde_json::{json, Value};

use hivelab::height::{dagger, TiltVector};
use hivelab::hive::{gt_from_minors, LargeGapTuple};
use hivelab::lozenge::render::heatmap_svg;
use hivelab::lozenge::{lambda_offset, octahedron_field, ExcavationHexagon, Side, WeightField};
use hivelab::qdiff::{cz_decompose, cz_svg, verify_cz, CZParams, RandomLipschitz, Sampled};
use hivelab::randmat::{sample_minor_process, MinorProcess};
use hivelab::rng::derive_seed;
use hivelab::stats::Running;
use hivelab::tension::{hexagon_term, sigma_diamond, ProcessSource, MIN_HEXAGON_SAMPLES};
use hivelab::varsolve::{
    estimate_table, f_ddagger, fit_position, maximize_sv, s_v, scaled_vertex, MaximizeConfig, TableConfig, TauField,
};

use crate::config::RunConfig;
use crate::output::{csv_text, line_chart_svg, OutDir};
use crate::CliError;

/// Stream labels under the run seed.
const LAMBDA_STREAM: u64 = 1;
const MU_STREAM: u64 = 2;
const TENSION_STREAM: u64 = 3;
const CZD_STREAM: u64 = 4;

fn f(x: f64) -> String {
    format!("{x}")
}

/// Lambda and mu processes for trial `t`.
fn process_pair(cfg: &RunConfig, n: usize, var_l: f64, var_m: f64, t: u64) -> hivelab::Result<(MinorProcess, MinorProcess)> {
    let lam = sample_minor_process(n, var_l, derive_seed(cfg.seed, LAMBDA_STREAM), t)?;
    let mu = sample_minor_process(n, var_m, derive_seed(cfg.seed, MU_STREAM), t)?;
    Ok((lam, mu))
}

/// Weight field glued from a trial's processes (mu on the upper trapezoid)
/// and its large-gap tuple.
fn trial_field(lam: &MinorProcess, mu: &MinorProcess) -> hivelab::Result<(WeightField, LargeGapTuple)> {
    let (gl, gm) = (gt_from_minors(lam)?, gt_from_minors(mu)?);
    let big = LargeGapTuple::default_for(lam.n(), gl.spread().max(gm.spread()));
    Ok((WeightField::from_patterns(&gm, &gl, &big)?, big))
}

pub fn sample_hive(cfg: &RunConfig, out: &mut OutDir) -> Result<Value, CliError> {
    let s = &cfg.sample_hive;
    let n = s.n as i64;
    let verts: Vec<(i64, i64)> = (1..n)
        .filter(|j| j % s.stride as i64 == 0)
        .flat_map(|j| (1..n).filter(|i| i % s.stride as i64 == 0).map(move |i| (i, j)))
        .collect();
    let scale = (n * n) as f64;
    let per_trial: Vec<Vec<f64>> = (0..cfg.trials as u64)
        .into_par_iter()
        .map(|t| {
            let (lam, mu) = process_pair(cfg, s.n, s.sigma_lambda, s.sigma_mu, t)?;
            let (w, big) = trial_field(&lam, &mu)?;
            let top = octahedron_field(&w);
            Ok(verts.iter().map(|&v| (top.at(v) - lambda_offset(v, &big)) / scale).collect())
        })
        .collect::<hivelab::Result<_>>()?;
    let stats: Vec<Running> = (0..verts.len()).map(|k| per_trial.iter().map(|row| row[k]).collect()).collect();

    let side = (n - 1) as usize / s.stride;
    let mut mean_grid = vec![vec![f64::NAN; side]; side];
    let mut var_grid = mean_grid.clone();
    let (mut mean_rows, mut var_rows) = (Vec::new(), Vec::new());
    for (&(i, j), r) in verts.iter().zip(&stats) {
        let (c, rr) = (i as usize / s.stride - 1, j as usize / s.stride - 1);
        mean_grid[rr][c] = r.mean;
        var_grid[rr][c] = r.variance();
        mean_rows.push(vec![i.to_string(), j.to_string(), f(r.mean), f(r.std_error())]);
        var_rows.push(vec![i.to_string(), j.to_string(), f(r.variance())]);
    }
    out.write("mean.csv", &csv_text(&["i", "j", "mean", "std_error"], mean_rows)?)?;
    out.write("variance.csv", &csv_text(&["i", "j", "variance"], var_rows)?)?;
    out.write("mean.svg", &heatmap_svg(&mean_grid, &format!("mean of h~(v) / n^2, n = {n}")))?;
    out.write("variance.svg", &heatmap_svg(&var_grid, &format!("variance of h~(v) / n^2, n = {n}")))?;

    let centre = verts
        .iter()
        .zip(&stats)
        .min_by_key(|((i, j), _)| (2 * i - n).abs() + (2 * j - n).abs())
        .map(|(v, r)| json!({ "vertex": v, "mean": r.mean, "variance": r.variance() }));
    Ok(json!({ "n": n, "vertices": verts.len(), "trials": cfg.trials, "centre": centre }))
}

pub fn tension(cfg: &RunConfig, out: &mut OutDir) -> Result<Value, CliError> {
    let t = &cfg.tension;
    let side = if t.side == "up" { Side::Up } else { Side::Lo };
    let m_max = *t.m_schedule.iter().max().expect("validated nonempty");
    let position = fit_position((t.position[0], t.position[1]), m_max, t.n)?;
    let source = ProcessSource { n: t.n, variance: t.sigma, seed: derive_seed(cfg.seed, TENSION_STREAM) };
    let processes = source.samples(cfg.trials)?;
    let mut rows = Vec::new();
    let mut diag = Vec::new();
    let mut series = Vec::new();
    for g in &t.tilts {
        let tilt = TiltVector::new(g[0], g[1]);
        if !tilt.in_k(1e-9) {
            return Err(CliError::Config(format!("tilt {g:?} lies outside K")));
        }
        let sd = sigma_diamond(side, position, tilt, &t.m_schedule, cfg.trials, &processes, t.inset)?;
        for e in &sd.estimates {
            rows.push(vec![f(g[0]), f(g[1]), e.m.to_string(), f(e.eps), f(e.mean), f(e.std_error), f(e.per_cell())]);
        }
        series.push((format!("({}, {})", g[0], g[1]), sd.estimates.iter().map(|e| (e.m as f64, e.mean)).collect()));
        diag.push(json!({ "tilt": g, "monotone_within_noise": sd.monotone_within_noise, "value": sd.value, "std_error": sd.std_error }));
    }
    out.write("tension.csv", &csv_text(&["tilt_a", "tilt_b", "m", "eps", "sigma_m", "std_error", "per_cell"], rows)?)?;
    out.write_json("tension.json", &json!({ "position": position, "tilts": diag }))?;
    out.write("tension.svg", &line_chart_svg("sigma_m against m", &series))?;
    let monotone = diag.iter().all(|d| d["monotone_within_noise"] == json!(true));
    Ok(json!({ "position": position, "tilts": t.tilts.len(), "all_monotone_within_noise": monotone }))
}

pub fn solve(cfg: &RunConfig, out: &mut OutDir) -> Result<Value, CliError> {
    let s = &cfg.solve;
    if cfg.trials < MIN_HEXAGON_SAMPLES || s.table_trials > cfg.trials {
        return Err(CliError::Config(format!(
            "solve needs trials >= {MIN_HEXAGON_SAMPLES} and table_trials <= trials, got {} and {}",
            cfg.trials, s.table_trials
        )));
    }
    let pairs: Vec<(MinorProcess, MinorProcess)> = (0..cfg.trials as u64)
        .into_par_iter()
        .map(|t| process_pair(cfg, s.n, s.sigma_lambda, s.sigma_mu, t))
        .collect::<hivelab::Result<_>>()?;
    let (lam, mu): (Vec<_>, Vec<_>) = pairs.into_iter().unzip();
    let v = (s.vertex[0], s.vertex[1]);
    let n = s.n as f64;

    // one large-gap tuple for all trials, so the offset is common
    let spread = lam.iter().chain(&mu).map(|p| p.top().spread()).fold(0.0, f64::max);
    let big = LargeGapTuple::default_for(s.n, spread);
    let offset = lambda_offset(v, &big);
    let fields: Vec<WeightField> = lam
        .par_iter()
        .zip(&mu)
        .map(|(l, m)| WeightField::from_patterns(&gt_from_minors(m)?, &gt_from_minors(l)?, &big))
        .collect::<hivelab::Result<_>>()?;
    let empirical: Running = fields
        .par_iter()
        .map(|w| octahedron_field(w).at(v))
        .collect::<Vec<_>>()
        .into_iter()
        .map(|x| (x - offset) / (n * n))
        .collect();
    let hex = hexagon_term(&fields, v, offset)?;
    let tau = TauField::from_processes(&mu, &lam)?;
    let tcfg = TableConfig {
        eps: s.eps,
        quantiles: s.quantiles.clone(),
        level_fracs: s.level_fracs.clone(),
        ..TableConfig::new(s.m, s.table_trials)
    };
    let table = estimate_table(&tcfg, &mu, &lam)?.convexified();

    let hv = ExcavationHexagon::new(scaled_vertex(v, s.n as i64, s.mesh)?, s.mesh)?;
    let start = f_ddagger(&hv)?;
    let at_start = s_v(&start, &table, &tau, hex.mean)?;
    let best = maximize_sv(&start, &table, &tau, hex.mean, &MaximizeConfig { iterations: s.iterations, gap_tol: 1e-9 })?;
    let rel = (best.value.total - empirical.mean).abs() / empirical.mean.abs();

    out.write("table.csv", &table.to_csv())?;
    out.write("solution.csv", &best.field.to_csv())?;
    let trace: Vec<Vec<String>> = best.trace.iter().enumerate().map(|(k, x)| vec![k.to_string(), f(*x)]).collect();
    out.write("trace.csv", &csv_text(&["iteration", "objective"], trace)?)?;
    let pts = best.trace.iter().enumerate().map(|(k, x)| (k as f64, *x)).collect();
    out.write("trace.svg", &line_chart_svg("objective by iteration", &[("S_v".into(), pts)]))?;
    let report = json!({
        "vertex": v,
        "empirical": { "mean": empirical.mean, "std_error": empirical.std_error(), "trials": empirical.count },
        "hexagon_term": hex,
        "start": at_start,
        "maximum": best.value,
        "gap": best.gap,
        "relative_difference": rel,
    });
    out.write_json("solve.json", &report)?;
    Ok(json!({ "empirical": empirical.mean, "maximum": best.value.total, "relative_difference": rel }))
}

/// Bundled 1-Lipschitz sample: a ridge in `x` plus a ripple in `y`.
pub fn sample_function(x: f64, y: f64) -> f64 {
    0.5 * (x - 0.4).abs() + 0.2 * (4.0 * y).sin()
}

pub fn czd(cfg: &RunConfig, out: &mut OutDir) -> Result<Value, CliError> {
    let c = &cfg.czd;
    let params = CZParams { c_sharp: c.c_sharp, ..CZParams::new(c.eps, c.eta, c.k) };
    params.check().map_err(|e| CliError::Config(e.to_string()))?;
    let field = if c.field == "random" {
        RandomLipschitz::draw(derive_seed(cfg.seed, CZD_STREAM)).sample(c.k)
    } else {
        Sampled::for_depth(c.k, sample_function)
    };
    let r = cz_decompose(&field, params)?;
    let report = verify_cz(&field, &r);
    let mut rows = Vec::new();
    for (q, l) in &r.good {
        rows.push(vec![q.level.to_string(), q.index.0.to_string(), q.index.1.to_string(), "good".into(), f(l.c), f(l.gx), f(l.gy)]);
    }
    for q in &r.bad {
        rows.push(vec![q.level.to_string(), q.index.0.to_string(), q.index.1.to_string(), "bad".into(), String::new(), String::new(), String::new()]);
    }
    out.write("cubes.csv", &csv_text(&["level", "ix", "iy", "status", "c", "gx", "gy"], rows)?)?;
    out.write_json("czd.json", &json!({ "params": params, "report": report }))?;
    out.write("czd.svg", &cz_svg(&r, 400.0))?;
    if !report.is_clean() {
        return Err(CliError::Violation(format!("decomposition failed verification: {report:?}")));
    }
    Ok(json!({ "good": r.good.len(), "bad": r.bad.len(), "bad_volume": r.bad_volume() }))
}

/// Largest deviation between `f_dagger` and its rounding on the hexagon
/// around `v`.
pub fn rounding_gap(v: (i64, i64), n: i64) -> hivelab::Result<f64> {
    let h = ExcavationHexagon::new(v, n)?;
    let a = dagger(&h);
    let r = hivelab::height::round_asymptotic(&a)?;
    let mut gap: f64 = 0.0;
    for side in [Side::Up, Side::Lo] {
        for p in a.side(side).points() {
            let d = a.side(side).get(p).expect("point") - r.side(side).get(p).expect("same points") as f64;
            gap = gap.max(d.abs());
        }
    }
    Ok(gap)
}
