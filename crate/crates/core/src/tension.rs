//! Empirical surface tension on small patches of a GUE minor process, the
//! equator tension and the hexagon term.
//!
//! A patch window is a `(2m+1) x (2m+1)` box of the Gelfand–Tsetlin index
//! triangle, `(level offset R, index offset T)`. It is placed on the lattice
//! of one trapezoid of an excavation hexagon through the same coordinates the
//! field `k~` uses: below the equator `(x, y) = (-R, T)`, above it
//! `(x, y) = (T - R, R)`. On the window the local field
//! `K(R, T) = sum_{p < T} M(p, R)` carries the lozenge weights, and the blue
//! and green weights it induces are exact interlacing gaps divided by three.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{HiveError, Result};
use crate::height::domain::LatticeDomain;
use crate::height::{HeightField, HeightPair, TiltVector};
use crate::hive::GTPattern;
use crate::lozenge::geometry::{Edge, ExcavationHexagon, Pt, Side, Triangle};
use crate::lozenge::{Color, DiffProblem, Lozenge, WeightField};
use crate::randmat::{extract_patch, interlacing_gap_array, sample_minor_process, MinorProcess, Patch};
use crate::stats::Running;

/// `(log m)^(-1/10)`.
pub fn psi(m: usize) -> Result<f64> {
    if m < 2 {
        return Err(HiveError::Parameter(format!("psi needs m >= 2, got {m}")));
    }
    Ok((m as f64).ln().powf(-0.1))
}

/// Lattice point of window coordinates `(r, t)` on the given side.
fn native(side: Side, r: i64, t: i64) -> Pt {
    match side {
        Side::Lo => (-r, t),
        Side::Up => (t - r, r),
    }
}

fn triangle_of(v: [Pt; 3]) -> Triangle {
    let x = v.iter().map(|p| p.0).min().expect("three vertices");
    let y = v.iter().map(|p| p.1).min().expect("three vertices");
    let lower = Triangle::lower(x, y);
    let mut a = lower.vertices();
    let mut b = v;
    a.sort();
    b.sort();
    if a == b {
        lower
    } else {
        Triangle::upper(x, y)
    }
}

/// The lattice window of a patch on one side of the equator.
#[derive(Debug, Clone)]
pub struct PatchWindow {
    pub side: Side,
    pub m: usize,
    domain: LatticeDomain,
    /// `(r, t)` of every domain point, by domain index.
    rt: Vec<(usize, usize)>,
}

impl PatchWindow {
    pub fn new(side: Side, m: usize) -> Result<Self> {
        if m == 0 {
            return Err(HiveError::Parameter("window half-width must be positive".into()));
        }
        let w = 2 * m as i64;
        let mut tris = Vec::new();
        for r in 0..w {
            for t in 0..w {
                let p = |a: i64, b: i64| native(side, a, b);
                tris.push(triangle_of([p(r, t), p(r + 1, t), p(r + 1, t + 1)]));
                tris.push(triangle_of([p(r, t), p(r, t + 1), p(r + 1, t + 1)]));
            }
        }
        let domain = LatticeDomain::from_triangles(tris)?;
        let mut rt = vec![(0, 0); domain.points().len()];
        for r in 0..=w {
            for t in 0..=w {
                let k = domain.index_of(native(side, r, t)).expect("window point");
                rt[k] = (r as usize, t as usize);
            }
        }
        Ok(Self { side, m, domain, rt })
    }

    pub fn domain(&self) -> &LatticeDomain {
        &self.domain
    }

    pub fn center(&self) -> Pt {
        native(self.side, self.m as i64, self.m as i64)
    }

    /// Number of lattice cells, `(2m)^2`.
    pub fn area(&self) -> f64 {
        self.domain.area()
    }

    /// Blue lozenges count twice, green once and red not at all.
    pub fn multiplier(&self, l: &Lozenge) -> f64 {
        match l.color(self.side) {
            Color::Blue => 2.0,
            Color::Green => 1.0,
            Color::Red => 0.0,
        }
    }

    /// Local field `K` at every window point.
    pub fn local_field(&self, patch: &Patch) -> Result<Vec<f64>> {
        if patch.m != self.m {
            return Err(HiveError::Parameter(format!("patch half-width {} differs from window {}", patch.m, self.m)));
        }
        Ok(self.rt.iter().map(|&(r, t)| (0..t).map(|p| patch.at(p, r)).sum()).collect())
    }

    fn weight(&self, k: &[f64], l: &Lozenge) -> f64 {
        let [a, b, c, d] = l.vertices().map(|p| k[self.domain.index_of(p).expect("lozenge inside window")]);
        (a + c - b - d) / 3.0
    }

    /// Interior edges of the window with the lozenge they are the diagonal of.
    fn lozenges(&self) -> impl Iterator<Item = (Edge, Lozenge)> + '_ {
        self.domain.edges().iter().filter(|(_, c)| *c == 2).map(|(e, _)| {
            let (a, b) = e.sides();
            (*e, Lozenge::from_triangles(a, b).expect("edge sides form a lozenge"))
        })
    }

    /// Residue class `x - y` of heights, relative to the window centre.
    fn residue(&self, p: Pt) -> i64 {
        let c = self.center();
        ((p.0 - p.1) - (c.0 - c.1)).rem_euclid(3)
    }

    /// Check that `a` is a height function on the window whose boundary may
    /// be crossed by lozenges: steps in `{1, -2}` on every edge and exactly
    /// one drop by two around every triangle.
    pub fn check_heights(&self, a: &HeightField) -> Result<()> {
        for p in self.domain.points() {
            if a.get(*p).is_none() {
                return Err(HiveError::Validation(format!("height missing at {p:?}")));
            }
        }
        for t in self.domain.triangles() {
            let mut drops = 0;
            for e in Edge::of_triangle(t) {
                match a.get(e.to).expect("checked") - a.get(e.from).expect("checked") {
                    1 => {}
                    -2 => drops += 1,
                    d => return Err(HiveError::Validation(format!("step {d} on edge {e:?}"))),
                }
            }
            if drops != 1 {
                return Err(HiveError::Validation(format!("triangle {t:?} has {drops} diagonal edges")));
            }
        }
        Ok(())
    }

    /// Lozenges of the tiling of `a` lying inside the window.
    pub fn tiling(&self, a: &HeightField) -> Result<Vec<Lozenge>> {
        self.check_heights(a)?;
        Ok(self
            .lozenges()
            .filter(|(e, _)| a.get(e.to).expect("checked") - a.get(e.from).expect("checked") == -2)
            .map(|(_, l)| l)
            .collect())
    }

    /// The affine height `a_infinity`, anchored at the window centre.
    pub fn affine(&self, tilt: &TiltVector, p: Pt) -> f64 {
        let c = self.center();
        tilt.apply((p.0 - c.0, p.1 - c.1))
    }
}

/// Twice the blue plus the green lozenge weights of the tiling of `a`, over
/// lozenges inside the window.
pub fn total_lozenge_weight(w: &PatchWindow, patch: &Patch, a: &HeightField) -> Result<f64> {
    let k = w.local_field(patch)?;
    Ok(w.tiling(a)?.iter().map(|l| w.multiplier(l) * w.weight(&k, l)).sum())
}

/// Maximum of [`total_lozenge_weight`] over heights within `radius` of the
/// affine height with the given tilt, with one maximizer.
pub fn corridor_max(w: &PatchWindow, patch: &Patch, tilt: &TiltVector, radius: f64) -> Result<(f64, HeightField)> {
    let k = w.local_field(patch)?;
    let pts = w.domain.points();
    let mut prob = DiffProblem::with_vars(pts.len());
    for (v, p) in pts.iter().enumerate() {
        prob.residue[v] = w.residue(*p);
        let c = w.affine(tilt, *p);
        prob.lower[v] = c - radius;
        prob.upper[v] = c + radius;
    }
    for (e, _) in w.domain.edges() {
        let (u, v) = (w.domain.index_of(e.from).expect("edge end"), w.domain.index_of(e.to).expect("edge end"));
        prob.constraints.push((u, v, 1));
    }
    // an edge is a diagonal exactly when the step is -2, so the indicator is
    // (1 - step) / 3
    let mut constant = 0.0;
    for (e, l) in w.lozenges() {
        let c = w.multiplier(&l) * w.weight(&k, &l);
        if c == 0.0 {
            continue;
        }
        let (u, v) = (w.domain.index_of(e.from).expect("edge end"), w.domain.index_of(e.to).expect("edge end"));
        constant += c / 3.0;
        prob.objective[u] += c / 3.0;
        prob.objective[v] -= c / 3.0;
    }
    let g = prob.solve().map_err(|e| match e {
        HiveError::Infeasible(s) => HiveError::Infeasible(format!("corridor of radius {radius} is empty: {s}")),
        other => other,
    })?;
    let value = constant + g.iter().zip(&prob.objective).map(|(x, o)| *x as f64 * o).sum::<f64>();
    let a = HeightField::from_pairs(pts.iter().copied().zip(g).collect());
    Ok((value, a))
}

/// Patch in the units of the process itself: `M|_{c + box_m} - M(c)` around
/// `c = ceil(n x)`.
pub fn raw_patch(p: &MinorProcess, x: (f64, f64), m: usize) -> Result<Patch> {
    let n = p.n() as f64;
    let mut patch = extract_patch(p, x, n, m)?;
    let s = n.sqrt().recip();
    patch.values.iter_mut().for_each(|v| *v *= s);
    Ok(patch)
}

/// Source of minor processes: one per trial, addressed by `(seed, trial)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProcessSource {
    pub n: usize,
    pub variance: f64,
    pub seed: u64,
}

impl ProcessSource {
    pub fn sample(&self, trial: u64) -> Result<MinorProcess> {
        sample_minor_process(self.n, self.variance, self.seed, trial)
    }

    /// Processes for trials `0..trials`, in trial order.
    pub fn samples(&self, trials: usize) -> Result<Vec<MinorProcess>> {
        (0..trials as u64).into_par_iter().map(|t| self.sample(t)).collect()
    }
}

/// Which maximization path produced an estimate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SolverPath {
    /// Exact minimum-cut maximization over the corridor.
    Exact,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TensionQuery {
    pub side: Side,
    /// `(index fraction, level fraction)` of the patch centre.
    pub position: (f64, f64),
    pub tilt: TiltVector,
    pub m: usize,
    /// Corridor radius parameter; the radius is `m * eps`. `None` means
    /// `psi(m)`.
    pub eps: Option<f64>,
    pub trials: usize,
}

impl TensionQuery {
    pub fn eps(&self) -> Result<f64> {
        match self.eps {
            Some(e) => Ok(e),
            None => psi(self.m),
        }
    }

    fn validate(&self) -> Result<()> {
        if self.m < 2 {
            return Err(HiveError::Parameter(format!("m must be at least 2, got {}", self.m)));
        }
        if self.trials < 2 {
            return Err(HiveError::Parameter("at least two trials are needed for an error bar".into()));
        }
        let eps = self.eps()?;
        if !(eps > 0.0) {
            return Err(HiveError::Parameter(format!("eps must be positive, got {eps}")));
        }
        if !self.tilt.in_k(1e-9) {
            return Err(HiveError::Parameter(format!("tilt {:?} lies outside K", self.tilt.g)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TensionEstimate {
    pub mean: f64,
    pub std_error: f64,
    pub m: usize,
    pub eps: f64,
    pub trials: usize,
    pub path: SolverPath,
    /// Per-trial values `-max / m^2`, in trial order.
    pub samples: Vec<f64>,
}

impl TensionEstimate {
    fn from_samples(samples: Vec<f64>, m: usize, eps: f64) -> Self {
        let r: Running = samples.iter().copied().collect();
        Self { mean: r.mean, std_error: r.std_error(), m, eps, trials: samples.len(), path: SolverPath::Exact, samples }
    }

    /// Tension per lattice cell, `mean * m^2 / (2m)^2`.
    pub fn per_cell(&self) -> f64 {
        self.mean / 4.0
    }
}

/// `-(1/m^2)` times the per-trial corridor maximum, averaged over patches
/// taken from the given processes.
pub fn sigma_m_from_processes(q: &TensionQuery, processes: &[MinorProcess]) -> Result<TensionEstimate> {
    q.validate()?;
    if processes.len() < q.trials {
        return Err(HiveError::Parameter(format!("{} processes for {} trials", processes.len(), q.trials)));
    }
    let eps = q.eps()?;
    let w = PatchWindow::new(q.side, q.m)?;
    let m2 = (q.m * q.m) as f64;
    let samples: Vec<f64> = processes[..q.trials]
        .par_iter()
        .map(|p| {
            let patch = raw_patch(p, q.position, q.m)?;
            let (v, _) = corridor_max(&w, &patch, &q.tilt, q.m as f64 * eps)?;
            Ok(-v / m2)
        })
        .collect::<Result<_>>()?;
    Ok(TensionEstimate::from_samples(samples, q.m, eps))
}

/// [`sigma_m_from_processes`] with freshly sampled processes.
pub fn sigma_m_estimate(q: &TensionQuery, source: &ProcessSource) -> Result<TensionEstimate> {
    let processes = source.samples(q.trials)?;
    sigma_m_from_processes(q, &processes)
}

/// Estimates over a schedule of half-widths.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SigmaDiamond {
    pub estimates: Vec<TensionEstimate>,
    /// Each estimate is at most the previous one plus three combined
    /// standard errors.
    pub monotone_within_noise: bool,
    /// The last estimate of the schedule.
    pub value: f64,
    pub std_error: f64,
}

/// Tension at a tilt of `K`. Tilts on the boundary of `K` are approached
/// along the segment toward the opposite corner, moved inward by `inset`.
pub fn sigma_diamond(
    side: Side,
    position: (f64, f64),
    tilt: TiltVector,
    schedule: &[usize],
    trials: usize,
    processes: &[MinorProcess],
    inset: f64,
) -> Result<SigmaDiamond> {
    if schedule.is_empty() {
        return Err(HiveError::Parameter("empty m schedule".into()));
    }
    let tilt = approach_interior(tilt, inset);
    let mut estimates = Vec::new();
    for &m in schedule {
        let q = TensionQuery { side, position, tilt, m, eps: None, trials };
        estimates.push(sigma_m_from_processes(&q, processes)?);
    }
    let monotone_within_noise = estimates.windows(2).all(|w| {
        let se = (w[0].std_error.powi(2) + w[1].std_error.powi(2)).sqrt();
        w[1].mean <= w[0].mean + 3.0 * se
    });
    let last = estimates.last().expect("nonempty schedule");
    let (value, std_error) = (last.mean, last.std_error);
    Ok(SigmaDiamond { estimates, monotone_within_noise, value, std_error })
}

/// Move a tilt on the boundary of `K` toward the corner opposite its edge
/// (for a corner: toward the centre) by the fraction `inset`.
pub fn approach_interior(tilt: TiltVector, inset: f64) -> TiltVector {
    let (p, q) = tilt.partials();
    let tol = 1e-12;
    let on = [p >= 1.0 - tol, q <= -1.0 + tol, q - p >= 1.0 - tol];
    let count = on.iter().filter(|b| **b).count();
    let target = match count {
        0 => return tilt,
        1 => {
            // corners in partials: opposite of p = 1 is II, of q = -1 is I,
            // of q - p = 1 is III
            if on[0] {
                (-2.0, -1.0)
            } else if on[1] {
                (1.0, 2.0)
            } else {
                (1.0, -1.0)
            }
        }
        _ => (0.0, 0.0),
    };
    TiltVector::from_partials(p + inset * (target.0 - p), q + inset * (target.1 - q))
}

/// Mean interlacing gaps of patches at one position.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RhoEstimate {
    /// `lambda_{j,k+1} - lambda_{j,k}`.
    pub level: f64,
    /// `lambda_{j-1,k-1} - lambda_{j,k}`.
    pub diagonal: f64,
    pub level_se: f64,
    pub diagonal_se: f64,
}

impl RhoEstimate {
    pub fn as_array(&self) -> [f64; 2] {
        [self.level, self.diagonal]
    }
}

/// Empirical means of the two interlacing-gap families in raw patches at
/// `x`, one patch mean per process.
pub fn rho_field(x: (f64, f64), m: usize, processes: &[MinorProcess]) -> Result<RhoEstimate> {
    if (x.0 - x.1).abs() < 1e-12 {
        return Err(HiveError::Range(format!("position {x:?} lies on the diagonal of the index triangle")));
    }
    if processes.len() < 2 {
        return Err(HiveError::Parameter("at least two processes are needed".into()));
    }
    let mut level = Running::new();
    let mut diagonal = Running::new();
    for p in processes {
        let g = interlacing_gap_array(&raw_patch(p, x, m)?);
        level.push(g.level.iter().sum::<f64>() / g.level.len() as f64);
        diagonal.push(g.diagonal.iter().sum::<f64>() / g.diagonal.len() as f64);
    }
    Ok(RhoEstimate {
        level: level.mean,
        diagonal: diagonal.mean,
        level_se: level.std_error(),
        diagonal_se: diagonal.std_error(),
    })
}

/// Equator tension `-[((b+1)/3)(tau_up/3) + ((2-b)/3)(-tau_lo/3)]` for a
/// slope `b` in `[-1, 2]`.
pub fn sigma_delta(tau: (f64, f64), b: f64) -> Result<f64> {
    if !(-1.0 - 1e-12..=2.0 + 1e-12).contains(&b) {
        return Err(HiveError::Range(format!("equator slope {b} outside [-1, 2]")));
    }
    let (up, lo) = tau;
    Ok(-(((b + 1.0) / 3.0) * (up / 3.0) + ((2.0 - b) / 3.0) * (-lo / 3.0)))
}

/// Pairing of the edge eigenvalues with the equator steps of `f`:
/// `sum_k ((1 + b(k))/3)(mu_{1,n-k}/3) + ((2 - b(k))/3)(-lambda_{n-k,n-k}/3)`
/// with `b(k) = f_up(k+1, n-k-1) - f_up(k, n-k)`. Indices outside the
/// patterns contribute zero.
pub fn equator_pairing(g_up: &GTPattern, g_lo: &GTPattern, f: &HeightPair) -> Result<f64> {
    let h = f.hexagon()?;
    let n = f.n;
    let get = |g: &GTPattern, j: i64, k: i64| -> f64 {
        if k >= 1 && k as usize <= g.n() && j >= 1 && j <= k {
            g.get(j as usize, k as usize)
        } else {
            0.0
        }
    };
    let mut total = 0.0;
    for k in h.border_edges() {
        let (a, b) = (f.up.get((k, n - k)), f.up.get((k + 1, n - k - 1)));
        let (Some(a), Some(b)) = (a, b) else {
            return Err(HiveError::Validation(format!("upper height missing at equator edge {k}")));
        };
        let bk = (b - a) as f64;
        let r = n - k;
        total += ((1.0 + bk) / 3.0) * (get(g_up, 1, r) / 3.0) + ((2.0 - bk) / 3.0) * (-get(g_lo, r, r) / 3.0);
    }
    Ok(total)
}

/// Estimate of the scaled hexagon weight `n^-2 wt'`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HexagonTerm {
    pub mean: f64,
    pub std_error: f64,
    pub std_dev: f64,
    pub samples: usize,
}

/// Minimum number of fields accepted by [`hexagon_term`].
pub const MIN_HEXAGON_SAMPLES: usize = 30;

/// Mean of `n^-2 (wt'(hexagon) - offset)` over sampled fields.
pub fn hexagon_term(fields: &[WeightField], v: Pt, offset: f64) -> Result<HexagonTerm> {
    if fields.len() < MIN_HEXAGON_SAMPLES {
        return Err(HiveError::Statistics(format!(
            "{} samples, at least {MIN_HEXAGON_SAMPLES} are needed",
            fields.len()
        )));
    }
    let mut r = Running::new();
    for w in fields {
        let h = ExcavationHexagon::new(v, w.n)?;
        r.push((w.hex_weight_alt(&h) - offset) / (w.n * w.n) as f64);
    }
    Ok(HexagonTerm { mean: r.mean, std_error: r.std_error(), std_dev: r.std_dev(), samples: r.count as usize })
}

/// Variance of the corridor maximum at one half-width.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VarianceRow {
    pub m: usize,
    pub variance: f64,
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VarianceProbe {
    pub rows: Vec<VarianceRow>,
    /// `variance / m^4` strictly decreases along the schedule.
    pub decreasing: bool,
}

/// Empirical variance of the corridor maximum over a schedule of
/// half-widths, reported against `m^4`.
pub fn patch_variance_probe(
    side: Side,
    x: (f64, f64),
    tilt: TiltVector,
    schedule: &[usize],
    eps: Option<f64>,
    processes: &[MinorProcess],
) -> Result<VarianceProbe> {
    let mut rows = Vec::new();
    for &m in schedule {
        let q = TensionQuery { side, position: x, tilt, m, eps, trials: processes.len() };
        let est = sigma_m_from_processes(&q, processes)?;
        // samples are -max / m^2
        let r: Running = est.samples.iter().map(|s| s * (m * m) as f64).collect();
        let variance = r.variance();
        rows.push(VarianceRow { m, variance, ratio: variance / (m as f64).powi(4) });
    }
    let decreasing = rows.windows(2).all(|w| w[1].ratio < w[0].ratio);
    Ok(VarianceProbe { rows, decreasing })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn constant_patch(m: usize, c: f64) -> Patch {
        let w = 2 * m + 1;
        Patch { origin: (m + 1, 3 * m + 1), m, values: vec![c; w * w] }
    }

    /// Patch of a deterministic interlacing array with index/level structure.
    fn ramp_patch(m: usize) -> Patch {
        let w = 2 * m + 1;
        let mut values = Vec::new();
        for p in 0..w {
            for q in 0..w {
                // decreasing in the index, increasing in the level
                values.push(-(p as f64) * 1.5 + q as f64 * 0.7 + ((p * 7 + q * 3) % 5) as f64 * 0.01);
            }
        }
        Patch { origin: (m + 1, 3 * m + 1), m, values }
    }

    #[test]
    fn psi_values() {
        assert!((psi(3).unwrap() - 3f64.ln().powf(-0.1)).abs() < 1e-15);
        assert!((psi(3).unwrap() - 0.9905).abs() < 5e-4);
        assert!(psi(1_000_000).unwrap() < psi(1000).unwrap());
        let mp: Vec<f64> = [10, 100, 1000].iter().map(|&m| m as f64 * psi(m).unwrap()).collect();
        assert!(mp[0] < mp[1] && mp[1] < mp[2]);
        assert!(psi(1).is_err());
    }

    #[test]
    fn window_has_full_area() {
        for side in [Side::Lo, Side::Up] {
            let w = PatchWindow::new(side, 3).unwrap();
            assert_eq!(w.area(), 36.0);
            assert_eq!(w.domain().points().len(), 49);
        }
    }

    #[test]
    fn blue_and_green_weights_are_gaps() {
        let m = 2;
        let patch = ramp_patch(m);
        for side in [Side::Lo, Side::Up] {
            let w = PatchWindow::new(side, m).unwrap();
            let k = w.local_field(&patch).unwrap();
            for (_, l) in w.lozenges() {
                let wt = w.weight(&k, &l);
                let [a, b, c, d] = l.vertices().map(|p| w.rt[w.domain.index_of(p).unwrap()]);
                let _ = (a, c);
                // the short diagonal B -> D in window coordinates
                let dir = (d.0 as i64 - b.0 as i64, d.1 as i64 - b.1 as i64);
                let (r, t) = (b.0.min(d.0), b.1.min(d.1));
                let expect = match (l.color(side), dir.0.abs(), dir.1.abs()) {
                    (Color::Red, _, _) => continue,
                    // short diagonal along the level direction: a diagonal gap
                    (_, 1, 0) => patch.at(t, r + 1) - patch.at(t - 1, r),
                    // short diagonal along (1, 1): a level gap
                    (_, 1, 1) => patch.at(t, r) - patch.at(t, r + 1),
                    other => panic!("unexpected diagonal {other:?}"),
                };
                assert!((wt - expect / 3.0).abs() < 1e-12, "{side:?} {l:?}: {wt} vs {}", expect / 3.0);
            }
        }
    }

    #[test]
    fn colours_swap_gap_families_between_sides() {
        let lo = PatchWindow::new(Side::Lo, 2).unwrap();
        let up = PatchWindow::new(Side::Up, 2).unwrap();
        let blue_dir = |w: &PatchWindow| {
            w.lozenges()
                .find(|(_, l)| l.color(w.side) == Color::Blue)
                .map(|(_, l)| {
                    let [_, b, _, d] = l.vertices().map(|p| w.rt[w.domain.index_of(p).unwrap()]);
                    (d.0 as i64 - b.0 as i64).abs() + (d.1 as i64 - b.1 as i64).abs()
                })
                .unwrap()
        };
        assert_eq!(blue_dir(&lo), 1);
        assert_eq!(blue_dir(&up), 2);
    }

    #[test]
    fn constant_patch_has_zero_weight() {
        let m = 3;
        let w = PatchWindow::new(Side::Lo, m).unwrap();
        let (v, a) = corridor_max(&w, &constant_patch(m, 1.0), &TiltVector::new(0.0, 0.0), 3.0).unwrap();
        assert!(v.abs() < 1e-12);
        assert!(total_lozenge_weight(&w, &constant_patch(m, 1.0), &a).unwrap().abs() < 1e-12);
    }

    #[test]
    fn solver_value_matches_recomputed_weight() {
        let m = 3;
        let patch = ramp_patch(m);
        for side in [Side::Lo, Side::Up] {
            let w = PatchWindow::new(side, m).unwrap();
            for tilt in [TiltVector::new(0.0, 0.0), TiltVector::new(0.5, -0.4), TiltVector::new(-0.6, 0.2)] {
                let (v, a) = corridor_max(&w, &patch, &tilt, 4.0).unwrap();
                let direct = total_lozenge_weight(&w, &patch, &a).unwrap();
                assert!((v - direct).abs() < 1e-9, "{v} vs {direct}");
                assert!(v <= 1e-12);
                for p in w.domain().points() {
                    assert!((a.get(*p).unwrap() as f64 - w.affine(&tilt, *p)).abs() <= 4.0 + 1e-9);
                }
            }
        }
    }

    #[test]
    fn red_corner_has_zero_tension() {
        let m = 3;
        let patch = ramp_patch(m);
        // red is type I below the equator and type II above it
        for (side, kind) in [(Side::Lo, 1), (Side::Up, 2)] {
            let corner = TiltVector::K_VERTICES[kind];
            let w = PatchWindow::new(side, m).unwrap();
            let (v, a) = corridor_max(&w, &patch, &corner, 2.0).unwrap();
            assert!(v.abs() < 1e-12, "{side:?}: {v}");
            let reds = w.tiling(&a).unwrap().iter().all(|l| l.color(side) == Color::Red);
            assert!(reds || v.abs() < 1e-12);
        }
    }

    #[test]
    fn single_entry_hand_case() {
        // one unit entry at the window corner enters one level gap and one
        // diagonal gap
        let m = 1;
        let mut patch = constant_patch(m, 0.0);
        patch.values[0] = 1.0;
        let w = PatchWindow::new(Side::Lo, m).unwrap();
        let k = w.local_field(&patch).unwrap();
        let mut nonzero: Vec<f64> = w
            .lozenges()
            .filter(|(_, l)| l.color(Side::Lo) != Color::Red)
            .map(|(_, l)| w.weight(&k, &l))
            .filter(|x| x.abs() > 1e-12)
            .collect();
        nonzero.sort_by(f64::total_cmp);
        assert_eq!(nonzero.len(), 2);
        assert!((nonzero[0] + 1.0 / 3.0).abs() < 1e-12 && (nonzero[1] - 1.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn sigma_delta_closed_forms() {
        let tau = (1.7, -0.9);
        // at b = -1 only the lower term survives, with coefficient (2 - b) / 3 = 1
        assert!((sigma_delta(tau, -1.0).unwrap() - tau.1 / 3.0).abs() < 1e-15);
        assert!((sigma_delta(tau, 2.0).unwrap() + tau.0 / 3.0).abs() < 1e-15);
        let (a, b, c) = (sigma_delta(tau, -0.5).unwrap(), sigma_delta(tau, 0.25).unwrap(), sigma_delta(tau, 1.0).unwrap());
        assert!(((b - a) / 0.75 - (c - b) / 0.75).abs() < 1e-12);
        assert!(sigma_delta(tau, 2.5).is_err());
    }

    #[test]
    fn equator_pairing_is_the_border_triangle_weight() {
        use crate::hive::LargeGapTuple;
        use crate::lozenge::{enumerate_tilings, BorderTriangle};
        let lo = GTPattern::new(vec![vec![1.0], vec![2.0, 0.5], vec![3.0, 1.5, -1.0]], 1e-12).unwrap();
        let up = GTPattern::new(vec![vec![0.2], vec![0.7, -0.4], vec![1.1, 0.0, -0.9]], 1e-12).unwrap();
        let field = WeightField::from_patterns(&up, &lo, &LargeGapTuple::with_gap(3, 20.0)).unwrap();
        for v in [(1, 1), (1, 2), (2, 1), (2, 2)] {
            let h = ExcavationHexagon::new(v, 3).unwrap();
            for t in enumerate_tilings(&h).unwrap() {
                let f = HeightPair::from_tiling(&h, &t).unwrap();
                let direct: f64 = t.border.iter().map(|b: &BorderTriangle| field.triangle_weight(b).unwrap()).sum();
                let pairing = equator_pairing(&up, &lo, &f).unwrap();
                assert!((direct - pairing).abs() < 1e-12, "v={v:?}: {direct} vs {pairing}");
            }
        }
    }

    #[test]
    fn zero_spectra_pair_to_zero() {
        let z = GTPattern::new(vec![vec![0.0], vec![0.0, 0.0], vec![0.0, 0.0, 0.0]], 1e-12).unwrap();
        let h = ExcavationHexagon::new((1, 2), 3).unwrap();
        let f = HeightPair::from_tiling(&h, &crate::lozenge::standard_tiling(&h)).unwrap();
        assert_eq!(equator_pairing(&z, &z, &f).unwrap(), 0.0);
    }

    #[test]
    fn hexagon_term_of_constant_fields_is_deterministic() {
        let fields: Vec<WeightField> = (0..30).map(|_| WeightField::from_fn(6, |x, y| (x * y) as f64)).collect();
        let t = hexagon_term(&fields, (2, 3), 0.0).unwrap();
        assert_eq!(t.std_dev, 0.0);
        assert!(hexagon_term(&fields[..10], (2, 3), 0.0).is_err());
    }

    #[test]
    fn boundary_tilts_move_inside() {
        for c in TiltVector::K_VERTICES {
            let t = approach_interior(c, 0.1);
            assert!(t.in_scaled_k(0.95, 0.0));
        }
        let mid = TiltVector::from_partials(1.0, 0.5);
        let t = approach_interior(mid, 0.1);
        assert!(t.partials().0 < 1.0);
        let inner = TiltVector::new(0.1, 0.1);
        assert_eq!(approach_interior(inner, 0.1), inner);
    }
}
