//! The limiting variational functional on a mesh of the rescaled hexagon and
//! its maximization.
//!
//! A mesh of resolution `N` is the lattice hexagon of size `N` with the
//! vertex scaled by `N / n`; every lattice triangle is a mesh triangle of
//! area `1 / (2 N^2)` in rescaled cell units. Node values are asymptotic
//! height pairs at resolution `N`, so tilts are read off exactly as for
//! lattice heights. The admissible pairs form a polytope cut out by the
//! difference constraints of the merged function `G` (upper heights above
//! the equator, `x + c0 - f_lo` below), which lets the maximizer call the
//! exact min-cut solver as its linear oracle.

use serde::{Deserialize, Serialize};

use crate::error::{HiveError, Result};
use crate::height::round::dagger;
use crate::height::{check_asymptotic, AsymptoticPair, Field, TiltVector};
use crate::lozenge::geometry::{ExcavationHexagon, Half, Pt, Side};
use crate::lozenge::solver::HexGraph;
use crate::lozenge::DiffProblem;
use crate::randmat::MinorProcess;
use crate::tension::{approach_interior, sigma_m_from_processes, TensionQuery};

/// Closed form of the horizontally linear height in the upper trapezoid,
/// `x + z (2a - b - 2x) / (a + b - x)`, in the trapezoid's own coordinates.
pub fn ddagger_closed(a: f64, b: f64, x: f64, z: f64) -> Result<f64> {
    let den = a + b - x;
    if !(den > 0.0) || a < 0.0 || b <= 0.0 {
        return Err(HiveError::Geometry(format!("degenerate trapezoid a = {a}, b = {b} at x = {x}")));
    }
    Ok(x + z * (2.0 * a - b - 2.0 * x) / den)
}

/// `d/dz` of [`ddagger_closed`]: `2 - 3b / (a + b - x)`.
pub fn ddagger_closed_dz(a: f64, b: f64, x: f64) -> f64 {
    2.0 - 3.0 * b / (a + b - x)
}

/// Asymptotic height pair sampled at the nodes of a mesh.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeshAHT {
    pub pair: AsymptoticPair,
}

impl MeshAHT {
    pub fn new(pair: AsymptoticPair) -> Result<Self> {
        check_asymptotic(&pair, 1e-7)?;
        Ok(Self { pair })
    }

    /// Mesh resolution `N`.
    pub fn resolution(&self) -> i64 {
        self.pair.n
    }

    pub fn hexagon(&self) -> Result<ExcavationHexagon> {
        self.pair.hexagon()
    }

    /// Node values as CSV rows `side,x,y,value`.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("side,x,y,value\n");
        for (name, f) in [("up", &self.pair.up), ("lo", &self.pair.lo)] {
            for (p, v) in &f.values {
                s.push_str(&format!("{name},{},{},{v}\n", p.0, p.1));
            }
        }
        s
    }
}

/// Scale a vertex given at size `n` to mesh resolution `res`; the scaled
/// vertex must be a lattice point.
pub fn scaled_vertex(v: Pt, n: i64, res: i64) -> Result<Pt> {
    let (a, b) = (v.0 * res, v.1 * res);
    if a % n != 0 || b % n != 0 {
        return Err(HiveError::Geometry(format!("vertex {v:?} of size {n} does not scale to resolution {res}")));
    }
    Ok((a / n, b / n))
}

/// The pair that is linear along every line parallel to the equator.
pub fn f_ddagger(h: &ExcavationHexagon) -> Result<MeshAHT> {
    if h.v.0 < 1 || h.v.1 < 1 || h.v.0 >= h.n || h.v.1 >= h.n {
        return Err(HiveError::Geometry(format!("vertex {:?} gives a degenerate trapezoid", h.v)));
    }
    MeshAHT::new(dagger(h))
}

/// Node-wise `delta * f_ddagger + (1 - delta) * f`.
pub fn blend(f: &MeshAHT, delta: f64) -> Result<MeshAHT> {
    if !(0.0..=1.0).contains(&delta) {
        return Err(HiveError::Parameter(format!("blend weight {delta} outside [0, 1]")));
    }
    let d = f_ddagger(&f.hexagon()?)?;
    let mix = |a: &Field<f64>, b: &Field<f64>| {
        Field::from_pairs(a.values.iter().map(|&(p, x)| (p, delta * b.get(p).expect("same mesh") + (1.0 - delta) * x)).collect())
    };
    Ok(MeshAHT { pair: AsymptoticPair { n: f.pair.n, v: f.pair.v, up: mix(&f.pair.up, &d.pair.up), lo: mix(&f.pair.lo, &d.pair.lo) } })
}

/// Piecewise-linear function on a grid over `K` in lattice partials
/// `(p, q)`: `p` in `[-2, 1]`, `q` in `[-1, 2]`, spacing `3 / cells`. Each
/// grid square is split along the direction `(1, 1)`, which matches the
/// boundary edge `q - p = 1` of `K`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TiltGrid {
    pub cells: usize,
    /// `values[j * (cells + 1) + i]` at `(p, q) = (-2 + i h, -1 + j h)` for
    /// `j <= i`; entries with `j > i` lie outside `K` and are unused.
    pub values: Vec<f64>,
}

impl TiltGrid {
    pub fn spacing(&self) -> f64 {
        3.0 / self.cells as f64
    }

    fn idx(&self, i: usize, j: usize) -> usize {
        j * (self.cells + 1) + i
    }

    /// Tabulate `f(p, q)` at the grid points of `K`.
    pub fn from_fn(cells: usize, mut f: impl FnMut(f64, f64) -> f64) -> Self {
        let h = 3.0 / cells as f64;
        let mut values = vec![f64::NAN; (cells + 1) * (cells + 1)];
        for j in 0..=cells {
            for i in j..=cells {
                values[j * (cells + 1) + i] = f(-2.0 + i as f64 * h, -1.0 + j as f64 * h);
            }
        }
        Self { cells, values }
    }

    pub fn constant(cells: usize, c: f64) -> Self {
        Self::from_fn(cells, |_, _| c)
    }

    /// Lower convex envelope of scattered samples, tabulated. The samples'
    /// convex hull must cover `K`.
    pub fn from_nodes(cells: usize, nodes: &[(TiltVector, f64)]) -> Result<Self> {
        let pts: Vec<(f64, f64, f64)> = nodes
            .iter()
            .map(|(t, v)| {
                let (p, q) = t.partials();
                (p, q, *v)
            })
            .collect();
        let mut missing = None;
        let g = Self::from_fn(cells, |p, q| match envelope_at(&pts, p, q) {
            Some(v) => v,
            None => {
                missing = Some((p, q));
                f64::NAN
            }
        });
        if let Some((p, q)) = missing {
            return Err(HiveError::Range(format!("tilt nodes do not cover K near partials ({p}, {q})")));
        }
        Ok(g)
    }

    /// Value and gradient `(d/dp, d/dq)` at partials `(p, q)`.
    pub fn eval(&self, p: f64, q: f64) -> Result<(f64, (f64, f64))> {
        let tol = 1e-7;
        if p > 1.0 + tol || q < -1.0 - tol || q - p > 1.0 + tol {
            return Err(HiveError::Range(format!("tilt with partials ({p}, {q}) lies outside the table")));
        }
        let h = self.spacing();
        let c = self.cells;
        let u = ((p + 2.0) / h).clamp(0.0, c as f64);
        let w = ((q + 1.0) / h).clamp(0.0, c as f64).min(u);
        let i = (u.floor() as usize).min(c - 1);
        let j = (w.floor() as usize).min(c - 1);
        let (s, t) = (u - i as f64, w - j as f64);
        let v00 = self.values[self.idx(i, j)];
        let v11 = self.values[self.idx(i + 1, j + 1)];
        if s >= t || j + 1 > i {
            let v10 = self.values[self.idx(i + 1, j)];
            let (gp, gq) = ((v10 - v00) / h, (v11 - v10) / h);
            Ok((v00 + s * (v10 - v00) + t * (v11 - v10), (gp, gq)))
        } else {
            let v01 = self.values[self.idx(i, j + 1)];
            let (gp, gq) = ((v11 - v01) / h, (v01 - v00) / h);
            Ok((v00 + t * (v01 - v00) + s * (v11 - v01), (gp, gq)))
        }
    }

    /// Largest difference between the values at two corners of one grid
    /// triangle; bounds the interpolation error of a convex function.
    pub fn oscillation_at(&self, p: f64, q: f64) -> f64 {
        let h = self.spacing();
        let c = self.cells;
        let i = (((p + 2.0) / h).floor().max(0.0) as usize).min(c - 1);
        let j = (((q + 1.0) / h).floor().max(0.0) as usize).min(c - 1).min(i);
        let mut vals = vec![self.values[self.idx(i, j)], self.values[self.idx(i + 1, j)], self.values[self.idx(i + 1, j + 1)]];
        if j < i {
            vals.push(self.values[self.idx(i, j + 1)]);
        }
        let lo = vals.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = vals.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        hi - lo
    }

    /// Convex minorant by a discrete double Legendre transform over a slope
    /// grid wide enough for every finite-difference slope of the table.
    pub fn convexified(&self) -> Self {
        let h = self.spacing();
        let c = self.cells;
        let pts: Vec<(f64, f64, f64)> = (0..=c)
            .flat_map(|j| (j..=c).map(move |i| (i, j)))
            .map(|(i, j)| (-2.0 + i as f64 * h, -1.0 + j as f64 * h, self.values[self.idx(i, j)]))
            .collect();
        let vmax = pts.iter().map(|x| x.2).fold(f64::NEG_INFINITY, f64::max);
        let vmin = pts.iter().map(|x| x.2).fold(f64::INFINITY, f64::min);
        let bound = 2.0 * (vmax - vmin) / h + 1e-9;
        let k = 4 * c;
        let slopes: Vec<(f64, f64)> = (0..=k)
            .flat_map(|a| (0..=k).map(move |b| (a, b)))
            .map(|(a, b)| (-bound + 2.0 * bound * a as f64 / k as f64, -bound + 2.0 * bound * b as f64 / k as f64))
            .collect();
        let conj: Vec<f64> = slopes
            .iter()
            .map(|&(sp, sq)| pts.iter().map(|&(p, q, v)| sp * p + sq * q - v).fold(f64::NEG_INFINITY, f64::max))
            .collect();
        Self::from_fn(c, |p, q| {
            let env = slopes
                .iter()
                .zip(&conj)
                .map(|(&(sp, sq), cs)| sp * p + sq * q - cs)
                .fold(f64::NEG_INFINITY, f64::max);
            // the discrete envelope never exceeds the samples
            let own = pts.iter().find(|x| (x.0 - p).abs() < 1e-12 && (x.1 - q).abs() < 1e-12).map(|x| x.2);
            own.map_or(env, |o| env.min(o))
        })
    }

    /// Largest violation of midpoint convexity along the three grid
    /// directions.
    pub fn convexity_defect(&self) -> f64 {
        let c = self.cells as i64;
        let inside = |i: i64, j: i64| i >= 0 && j >= 0 && i <= c && j <= c && j <= i;
        let mut worst: f64 = 0.0;
        for j in 0..=c {
            for i in j..=c {
                for (di, dj) in [(1, 0), (0, 1), (1, 1)] {
                    if inside(i - di, j - dj) && inside(i + di, j + dj) {
                        let v = |a: i64, b: i64| self.values[self.idx(a as usize, b as usize)];
                        let d = v(i, j) - 0.5 * (v(i - di, j - dj) + v(i + di, j + dj));
                        worst = worst.max(d);
                    }
                }
            }
        }
        worst
    }
}

/// Lower convex envelope of scattered `(p, q, value)` samples at `(p, q)`:
/// the least barycentric interpolant over all sample triangles containing
/// the point.
fn envelope_at(pts: &[(f64, f64, f64)], p: f64, q: f64) -> Option<f64> {
    let mut best: Option<f64> = None;
    let n = pts.len();
    let tol = 1e-9;
    for a in 0..n {
        if (pts[a].0 - p).abs() < tol && (pts[a].1 - q).abs() < tol {
            best = Some(best.map_or(pts[a].2, |b: f64| b.min(pts[a].2)));
        }
        for b in a + 1..n {
            for c in b + 1..n {
                let (x1, y1, v1) = pts[a];
                let (x2, y2, v2) = pts[b];
                let (x3, y3, v3) = pts[c];
                let det = (y2 - y3) * (x1 - x3) + (x3 - x2) * (y1 - y3);
                if det.abs() < 1e-12 {
                    continue;
                }
                let l1 = ((y2 - y3) * (p - x3) + (x3 - x2) * (q - y3)) / det;
                let l2 = ((y3 - y1) * (p - x3) + (x1 - x3) * (q - y3)) / det;
                let l3 = 1.0 - l1 - l2;
                if l1 >= -tol && l2 >= -tol && l3 >= -tol {
                    let v = l1 * v1 + l2 * v2 + l3 * v3;
                    best = Some(best.map_or(v, |b: f64| b.min(v)));
                }
            }
        }
    }
    best
}

/// Per-cell tension of one trapezoid on a rectangular grid of patch
/// positions `(quantile, level fraction)`, blended bilinearly. The quantile
/// of a position `(index fraction, level fraction)` is their ratio, the
/// relative place of the eigenvalue within its row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SideTension {
    pub quantiles: Vec<f64>,
    pub level_fracs: Vec<f64>,
    /// `grids[l * quantiles.len() + i]`.
    pub grids: Vec<TiltGrid>,
}

impl SideTension {
    pub fn uniform(grid: TiltGrid) -> Self {
        Self { quantiles: vec![0.5], level_fracs: vec![0.5], grids: vec![grid] }
    }

    fn bracket(xs: &[f64], x: f64) -> (usize, usize, f64) {
        if xs.len() == 1 || x <= xs[0] {
            return (0, 0, 0.0);
        }
        if x >= xs[xs.len() - 1] {
            return (xs.len() - 1, xs.len() - 1, 0.0);
        }
        let k = xs.windows(2).position(|w| x >= w[0] && x <= w[1]).expect("inside the range");
        (k, k + 1, (x - xs[k]) / (xs[k + 1] - xs[k]))
    }

    fn quantile(pos: (f64, f64)) -> f64 {
        if pos.1 > 0.0 {
            (pos.0 / pos.1).clamp(0.0, 1.0)
        } else {
            0.5
        }
    }

    /// Value and gradient at a position `(index fraction, level fraction)`
    /// and tilt partials.
    pub fn eval(&self, pos: (f64, f64), p: f64, q: f64) -> Result<(f64, (f64, f64))> {
        let ni = self.quantiles.len();
        let (i0, i1, s) = Self::bracket(&self.quantiles, Self::quantile(pos));
        let (l0, l1, t) = Self::bracket(&self.level_fracs, pos.1);
        let mut val = 0.0;
        let mut grad = (0.0, 0.0);
        for (i, l, wgt) in [(i0, l0, (1.0 - s) * (1.0 - t)), (i1, l0, s * (1.0 - t)), (i0, l1, (1.0 - s) * t), (i1, l1, s * t)] {
            if wgt == 0.0 {
                continue;
            }
            let (v, g) = self.grids[l * ni + i].eval(p, q)?;
            val += wgt * v;
            grad.0 += wgt * g.0;
            grad.1 += wgt * g.1;
        }
        Ok((val, grad))
    }

    fn oscillation(&self, pos: (f64, f64), p: f64, q: f64) -> f64 {
        let ni = self.quantiles.len();
        let (i0, _, _) = Self::bracket(&self.quantiles, Self::quantile(pos));
        let (l0, _, _) = Self::bracket(&self.level_fracs, pos.1);
        self.grids[l0 * ni + i0].oscillation_at(p, q)
    }

    pub fn convexified(&self) -> Self {
        Self { grids: self.grids.iter().map(|g| g.convexified()).collect(), ..self.clone() }
    }
}

/// Per-cell surface tension as a function of trapezoid, patch position
/// `(index fraction, level fraction)` and tilt partials.
pub trait Tension {
    /// Value and gradient `(d/dp, d/dq)`.
    fn sigma(&self, side: Side, pos: (f64, f64), p: f64, q: f64) -> Result<(f64, (f64, f64))>;

    /// Bound on the error of the value against the underlying tension.
    fn interpolation_error(&self, _side: Side, _pos: (f64, f64), _p: f64, _q: f64) -> f64 {
        0.0
    }
}

impl Tension for TensionTable {
    fn sigma(&self, side: Side, pos: (f64, f64), p: f64, q: f64) -> Result<(f64, (f64, f64))> {
        self.side(side).eval(pos, p, q)
    }

    fn interpolation_error(&self, side: Side, pos: (f64, f64), p: f64, q: f64) -> f64 {
        self.side(side).oscillation(pos, p, q)
    }
}

/// Tension tables for both trapezoids.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TensionTable {
    pub up: SideTension,
    pub lo: SideTension,
}

impl TensionTable {
    pub fn constant(c: f64) -> Self {
        let g = SideTension::uniform(TiltGrid::constant(30, c));
        Self { up: g.clone(), lo: g }
    }

    pub fn side(&self, s: Side) -> &SideTension {
        match s {
            Side::Up => &self.up,
            Side::Lo => &self.lo,
        }
    }

    pub fn convexified(&self) -> Self {
        Self { up: self.up.convexified(), lo: self.lo.convexified() }
    }

    /// CSV rows `side,quantile,level_frac,p,q,sigma` at every grid point.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("side,quantile,level_frac,p,q,sigma\n");
        for (name, t) in [("up", &self.up), ("lo", &self.lo)] {
            for (l, lf) in t.level_fracs.iter().enumerate() {
                for (i, xf) in t.quantiles.iter().enumerate() {
                    let g = &t.grids[l * t.quantiles.len() + i];
                    let h = g.spacing();
                    for j in 0..=g.cells {
                        for a in j..=g.cells {
                            let (p, q) = (-2.0 + a as f64 * h, -1.0 + j as f64 * h);
                            s.push_str(&format!("{name},{xf},{lf},{p},{q},{}\n", g.values[g.idx(a, j)]));
                        }
                    }
                }
            }
        }
        s
    }
}

/// Monte Carlo settings for a tension table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableConfig {
    pub quantiles: Vec<f64>,
    pub level_fracs: Vec<f64>,
    pub m: usize,
    /// `None` means `psi(m)`.
    pub eps: Option<f64>,
    pub trials: usize,
    pub nodes: Vec<TiltVector>,
    /// Boundary nodes of `K` are sampled this far inside along the segment
    /// to the opposite corner and recorded at the node itself.
    pub inset: f64,
    pub cells: usize,
}

impl TableConfig {
    pub fn new(m: usize, trials: usize) -> Self {
        Self {
            quantiles: vec![0.02, 0.1, 0.25, 0.5, 0.75, 0.9, 0.98],
            level_fracs: vec![0.3, 0.5, 0.7, 0.9, 1.0],
            m,
            eps: None,
            trials,
            nodes: default_tilt_nodes(),
            inset: 0.05,
            cells: 30,
        }
    }
}

/// Corners, edge midpoints and centre of `K`, plus the points halfway from
/// the centre to each corner.
pub fn default_tilt_nodes() -> Vec<TiltVector> {
    let v = TiltVector::K_VERTICES;
    let mix = |a: &TiltVector, b: &TiltVector, s: f64| TiltVector::new(s * a.g[0] + (1.0 - s) * b.g[0], s * a.g[1] + (1.0 - s) * b.g[1]);
    let c = TiltVector::new(0.0, 0.0);
    let mut out = v.to_vec();
    for i in 0..3 {
        out.push(mix(&v[i], &v[(i + 1) % 3], 0.5));
    }
    out.push(c);
    for t in &v {
        out.push(mix(t, &c, 0.5));
    }
    out
}

/// Nearest patch position at which a window of half-width `m` fits in a
/// process of size `n`.
pub fn fit_position(pos: (f64, f64), m: usize, n: usize) -> Result<(f64, f64)> {
    let (m, nn) = (m as i64, n as i64);
    if 4 * m + 2 > nn {
        return Err(HiveError::Range(format!("no window of half-width {m} fits in size {n}")));
    }
    let k0 = ((pos.1 * n as f64).ceil() as i64).clamp(3 * m + 2, nn - m);
    let j0 = ((pos.0 * n as f64).ceil() as i64).clamp(m + 1, k0 - 2 * m);
    Ok(((j0 as f64 - 0.5) / n as f64, (k0 as f64 - 0.5) / n as f64))
}

/// One trapezoid's table from sampled processes of that side.
pub fn estimate_side_table(side: Side, cfg: &TableConfig, processes: &[MinorProcess]) -> Result<SideTension> {
    if cfg.quantiles.is_empty() || cfg.level_fracs.is_empty() {
        return Err(HiveError::Parameter("empty position grid".into()));
    }
    let n = processes.first().ok_or_else(|| HiveError::Parameter("no processes".into()))?.n();
    let mut grids = Vec::new();
    for &lf in &cfg.level_fracs {
        for &xf in &cfg.quantiles {
            let position = fit_position((xf * lf, lf), cfg.m, n)?;
            let mut nodes = Vec::new();
            for t in &cfg.nodes {
                let tilt = approach_interior(*t, cfg.inset);
                let q = TensionQuery { side, position, tilt, m: cfg.m, eps: cfg.eps, trials: cfg.trials };
                nodes.push((*t, sigma_m_from_processes(&q, processes)?.per_cell()));
            }
            grids.push(TiltGrid::from_nodes(cfg.cells, &nodes)?);
        }
    }
    Ok(SideTension { quantiles: cfg.quantiles.clone(), level_fracs: cfg.level_fracs.clone(), grids })
}

/// Tables for both trapezoids: upper from the `mu` processes, lower from
/// the `lambda` processes.
pub fn estimate_table(cfg: &TableConfig, up: &[MinorProcess], lo: &[MinorProcess]) -> Result<TensionTable> {
    Ok(TensionTable { up: estimate_side_table(Side::Up, cfg, up)?, lo: estimate_side_table(Side::Lo, cfg, lo)? })
}

/// Edge eigenvalues along the equator: `up[r] = E mu_{1,r} / n` and
/// `lo[r] = E lambda_{r,r} / n` for `r = 0..=n`, with zero at `r = 0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TauField {
    pub up: Vec<f64>,
    pub lo: Vec<f64>,
}

impl TauField {
    pub fn zero(n: usize) -> Self {
        Self { up: vec![0.0; n + 1], lo: vec![0.0; n + 1] }
    }

    pub fn constant(n: usize, up: f64, lo: f64) -> Self {
        Self { up: vec![up; n + 1], lo: vec![lo; n + 1] }
    }

    /// Sample means over processes of one size `n`.
    pub fn from_processes(up: &[MinorProcess], lo: &[MinorProcess]) -> Result<Self> {
        let n = up.first().ok_or_else(|| HiveError::Parameter("no processes".into()))?.n();
        if lo.is_empty() || up.iter().chain(lo).any(|p| p.n() != n) {
            return Err(HiveError::Parameter("edge eigenvalue means need non-empty samples of one size".into()));
        }
        let mean = |ps: &[MinorProcess], f: &dyn Fn(&MinorProcess, usize) -> f64| -> Vec<f64> {
            (0..=n)
                .map(|r| if r == 0 { 0.0 } else { ps.iter().map(|p| f(p, r)).sum::<f64>() / (ps.len() * n) as f64 })
                .collect()
        };
        Ok(Self { up: mean(up, &|p, r| p.get(1, r)), lo: mean(lo, &|p, r| p.get(r, r)) })
    }

    /// `(tau_up, tau_lo)` at equator fraction `y`, where the row is
    /// `r = n (1 - y)`.
    pub fn at(&self, y: f64) -> (f64, f64) {
        let n = self.up.len() - 1;
        let r = (n as f64 * (1.0 - y)).clamp(0.0, n as f64);
        let k = (r.floor() as usize).min(n.saturating_sub(1));
        let s = r - k as f64;
        let lerp = |v: &[f64]| if n == 0 { v[0] } else { v[k] + s * (v[k + 1] - v[k]) };
        (lerp(&self.up), lerp(&self.lo))
    }
}

/// The three terms of the functional with quadrature error estimates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FunctionalValue {
    pub s_diamond: f64,
    pub s_delta: f64,
    pub s_hex: f64,
    pub total: f64,
    pub err_diamond: f64,
    pub err_delta: f64,
}

impl FunctionalValue {
    pub fn error(&self) -> f64 {
        self.err_diamond + self.err_delta
    }
}

/// Patch position `(index fraction, level fraction)` of a point of the
/// hexagon of size `n`.
pub fn patch_position(side: Side, p: (f64, f64), n: f64) -> (f64, f64) {
    match side {
        Side::Lo => (p.1 / n, 1.0 - p.0 / n),
        Side::Up => ((p.0 + p.1) / n - 1.0, p.1 / n),
    }
}

/// Mesh data shared by evaluation and optimization.
struct Mesh {
    h: ExcavationHexagon,
    graph: HexGraph,
    /// `(side, half, vertex indices in `Triangle::vertices` order, centroid)`.
    tris: Vec<(Side, Half, [usize; 3], (f64, f64))>,
    /// `(k, index of (k, N-k), index of (k+1, N-k-1))`.
    equator: Vec<(i64, usize, usize)>,
    fixed: Vec<bool>,
}

impl Mesh {
    fn new(h: &ExcavationHexagon) -> Self {
        let graph = HexGraph::new(h);
        let n = h.n;
        let tris = h
            .triangles()
            .into_iter()
            .map(|t| {
                let vs = t.vertices();
                let c = vs.iter().fold((0.0, 0.0), |a, p| (a.0 + p.0 as f64 / 3.0, a.1 + p.1 as f64 / 3.0));
                (h.side_of(&t), t.half, vs.map(|p| graph.index[&p]), c)
            })
            .collect();
        let equator = h.border_edges().map(|k| (k, graph.index[&(k, n - k)], graph.index[&(k + 1, n - k - 1)])).collect();
        let mut fixed = vec![false; graph.points.len()];
        for &(k, _) in &graph.boundary {
            fixed[k] = true;
        }
        Self { h: h.clone(), graph, tris, equator, fixed }
    }

    /// Height values of the side's function at the triangle's vertices.
    fn heights(&self, t: usize, g: &[f64]) -> [f64; 3] {
        let (side, _, v, _) = self.tris[t];
        v.map(|k| match side {
            Side::Up => g[k],
            Side::Lo => (self.graph.points[k].0 + self.graph.c0) as f64 - g[k],
        })
    }

    /// Partials `(p, q)` of the side's function on triangle `t`.
    fn partials(&self, t: usize, g: &[f64]) -> (f64, f64) {
        let f = self.heights(t, g);
        if self.tris[t].1 == Half::Upper {
            (f[1] - f[2], f[1] - f[0])
        } else {
            (f[1] - f[0], f[2] - f[0])
        }
    }

    fn area(&self) -> f64 {
        let n = self.h.n as f64;
        1.0 / (2.0 * n * n)
    }

    fn to_g(&self, f: &AsymptoticPair) -> Result<Vec<f64>> {
        let n = self.h.n;
        self.graph
            .points
            .iter()
            .map(|&p| {
                if p.0 + p.1 >= n {
                    f.up.get(p)
                } else {
                    f.lo.get(p).map(|v| (p.0 + self.graph.c0) as f64 - v)
                }
                .ok_or_else(|| HiveError::Validation(format!("mesh value missing at {p:?}")))
            })
            .collect()
    }

    fn to_pair(&self, g: &[f64]) -> AsymptoticPair {
        let n = self.h.n;
        let mut up = Vec::new();
        let mut lo = Vec::new();
        for (k, &p) in self.graph.points.iter().enumerate() {
            if p.0 + p.1 >= n {
                up.push((p, g[k]));
            }
            if p.0 + p.1 <= n {
                lo.push((p, (p.0 + self.graph.c0) as f64 - g[k]));
            }
        }
        AsymptoticPair { n, v: self.h.v, up: Field::from_pairs(up), lo: Field::from_pairs(lo) }
    }

    fn feasibility_defect(&self, g: &[f64]) -> f64 {
        let mut worst: f64 = 0.0;
        for &(u, w, d) in &self.graph.constraints {
            worst = worst.max(g[w] - g[u] - d as f64);
        }
        for &(k, b) in &self.graph.boundary {
            worst = worst.max((g[k] - b as f64).abs());
        }
        worst
    }

    /// Functional value and, optionally, its gradient in `G`.
    fn evaluate(
        &self,
        g: &[f64],
        table: &impl Tension,
        tau: &TauField,
        s_hex: f64,
        mut grad: Option<&mut Vec<f64>>,
    ) -> Result<FunctionalValue> {
        let n = self.h.n as f64;
        let a = self.area();
        if let Some(gr) = grad.as_deref_mut() {
            gr.clear();
            gr.resize(g.len(), 0.0);
        }
        let mut s_diamond = 0.0;
        let mut err_diamond = 0.0;
        for t in 0..self.tris.len() {
            let (side, half, v, c) = self.tris[t];
            let (p, q) = self.partials(t, g);
            let pos = patch_position(side, c, n);
            let (val, (gp, gq)) = table.sigma(side, pos, p, q)?;
            s_diamond -= a * val;
            err_diamond += a * table.interpolation_error(side, pos, p, q);
            if let Some(gr) = grad.as_deref_mut() {
                // d(-a sigma)/d f at the three vertices
                let df = if half == Half::Upper {
                    [a * gq, -a * (gp + gq), a * gp]
                } else {
                    [a * (gp + gq), -a * gp, -a * gq]
                };
                let sign = if side == Side::Up { 1.0 } else { -1.0 };
                for k in 0..3 {
                    gr[v[k]] += sign * df[k];
                }
            }
        }
        let mut s_delta = 0.0;
        let mut err_delta = 0.0;
        for &(k, ia, ib) in &self.equator {
            let b = g[ib] - g[ia];
            let y0 = k as f64 / n;
            let (tu, tl) = tau.at((k as f64 + 0.5) / n);
            s_delta += (((1.0 + b) / 3.0) * (tu / 3.0) + ((2.0 - b) / 3.0) * (-tl / 3.0)) / n;
            let (u0, l0) = tau.at(y0);
            let (u1, l1) = tau.at(y0 + 1.0 / n);
            err_delta += ((u1 - u0).abs() + (l1 - l0).abs()) / (3.0 * n);
            if let Some(gr) = grad.as_deref_mut() {
                let db = (tu + tl) / (9.0 * n);
                gr[ib] += db;
                gr[ia] -= db;
            }
        }
        if let Some(gr) = grad {
            for (k, f) in self.fixed.iter().enumerate() {
                if *f {
                    gr[k] = 0.0;
                }
            }
        }
        Ok(FunctionalValue {
            s_diamond,
            s_delta,
            s_hex,
            total: s_diamond + s_delta + s_hex,
            err_diamond,
            err_delta,
        })
    }

    /// Maximizer of a linear function of `G` over the admissible polytope;
    /// its vertices are integral, so the integer solver is exact.
    fn linear_oracle(&self, c: &[f64]) -> Result<Vec<f64>> {
        let mut prob = DiffProblem::with_vars(c.len());
        prob.constraints = self.graph.constraints.iter().map(|&(u, w, d)| (u, w, 3 * d)).collect();
        for &(k, b) in &self.graph.boundary {
            prob.fix(k, 3 * b);
        }
        prob.objective = c.to_vec();
        Ok(prob.solve()?.into_iter().map(|x| x as f64 / 3.0).collect())
    }
}

fn mesh_of(f: &MeshAHT) -> Result<(Mesh, Vec<f64>)> {
    let h = f.hexagon()?;
    let mesh = Mesh::new(&h);
    let g = mesh.to_g(&f.pair)?;
    Ok((mesh, g))
}

/// `-sum_t area(t) sigma(position(t), tilt(t))`.
pub fn s_v_diamond(f: &MeshAHT, table: &impl Tension) -> Result<f64> {
    let (mesh, g) = mesh_of(f)?;
    Ok(mesh.evaluate(&g, table, &TauField::zero(1), 0.0, None)?.s_diamond)
}

/// `-integral over the equator of sigma_Delta(tau, b)`, with `b` the slope
/// of the upper function along the equator.
pub fn s_v_delta(f: &MeshAHT, tau: &TauField) -> Result<f64> {
    let (mesh, g) = mesh_of(f)?;
    for &(k, ia, ib) in &mesh.equator {
        let b = g[ib] - g[ia];
        if !(-1.0 - 1e-9..=2.0 + 1e-9).contains(&b) {
            return Err(HiveError::Validation(format!("equator slope {b} at edge {k} outside [-1, 2]")));
        }
    }
    let zero = TensionTable::constant(0.0);
    Ok(mesh.evaluate(&g, &zero, tau, 0.0, None)?.s_delta)
}

/// All three terms.
pub fn s_v(f: &MeshAHT, table: &impl Tension, tau: &TauField, s_hex: f64) -> Result<FunctionalValue> {
    let (mesh, g) = mesh_of(f)?;
    mesh.evaluate(&g, table, tau, s_hex, None)
}

/// Settings for [`maximize_sv`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MaximizeConfig {
    pub iterations: usize,
    /// Stop once the duality gap falls below this.
    pub gap_tol: f64,
}

impl Default for MaximizeConfig {
    fn default() -> Self {
        Self { iterations: 2000, gap_tol: 1e-9 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Maximized {
    pub field: MeshAHT,
    pub value: FunctionalValue,
    /// Objective after each iteration.
    pub trace: Vec<f64>,
    /// Frank–Wolfe duality gap at the returned iterate.
    pub gap: f64,
}

/// Maximize the functional over admissible pairs on the mesh of `start` by
/// pairwise conditional gradients with exact line search. The iterate is
/// kept as a convex combination of the start and oracle vertices, so it
/// stays admissible; feasibility is rechecked at each step.
pub fn maximize_sv(
    start: &MeshAHT,
    table: &impl Tension,
    tau: &TauField,
    s_hex: f64,
    cfg: &MaximizeConfig,
) -> Result<Maximized> {
    let (mesh, mut g) = mesh_of(start)?;
    if mesh.feasibility_defect(&g) > 1e-7 {
        return Err(HiveError::Infeasible("starting pair violates the mesh constraints".into()));
    }
    let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>();
    let mut atoms: Vec<(Vec<f64>, f64)> = vec![(g.clone(), 1.0)];
    let mut grad = Vec::new();
    let mut val = mesh.evaluate(&g, table, tau, s_hex, Some(&mut grad))?;
    let mut trace = vec![val.total];
    let mut gap = f64::INFINITY;
    for _ in 0..cfg.iterations {
        let s = mesh.linear_oracle(&grad)?;
        gap = dot(&s, &grad) - dot(&g, &grad);
        if gap <= cfg.gap_tol {
            break;
        }
        let away = (0..atoms.len())
            .min_by(|&i, &j| dot(&atoms[i].0, &grad).total_cmp(&dot(&atoms[j].0, &grad)))
            .expect("at least one atom");
        let dir: Vec<f64> = s.iter().zip(&atoms[away].0).map(|(a, b)| a - b).collect();
        let gmax = atoms[away].1;
        let at = |gamma: f64| -> Result<f64> {
            let x: Vec<f64> = g.iter().zip(&dir).map(|(a, d)| a + gamma * d).collect();
            Ok(mesh.evaluate(&x, table, tau, s_hex, None)?.total)
        };
        let gamma = golden_max(&at, gmax)?;
        if gamma == 0.0 {
            break;
        }
        for (a, d) in g.iter_mut().zip(&dir) {
            *a += gamma * d;
        }
        atoms[away].1 -= gamma;
        match atoms.iter().position(|(v, _)| v == &s) {
            Some(k) => atoms[k].1 += gamma,
            None => atoms.push((s, gamma)),
        }
        atoms.retain(|(_, w)| *w > 1e-15);
        let defect = mesh.feasibility_defect(&g);
        if defect > 1e-7 {
            return Err(HiveError::Numerical {
                what: "iterate left the admissible polytope".into(),
                iterations: trace.len(),
                residual: defect,
            });
        }
        val = mesh.evaluate(&g, table, tau, s_hex, Some(&mut grad))?;
        trace.push(val.total);
    }
    Ok(Maximized { field: MeshAHT { pair: mesh.to_pair(&g) }, value: val, trace, gap })
}

/// Maximizer of a concave function on `[0, hi]` by golden-section search,
/// with the endpoints also tried.
fn golden_max(f: &impl Fn(f64) -> Result<f64>, hi: f64) -> Result<f64> {
    let phi = 0.5 * (5f64.sqrt() - 1.0);
    let (mut lo, mut up) = (0.0, hi);
    let mut x1 = up - phi * (up - lo);
    let mut x2 = lo + phi * (up - lo);
    let (mut f1, mut f2) = (f(x1)?, f(x2)?);
    for _ in 0..60 {
        if f1 < f2 {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + phi * (up - lo);
            f2 = f(x2)?;
        } else {
            up = x2;
            x2 = x1;
            f2 = f1;
            x1 = up - phi * (up - lo);
            f1 = f(x1)?;
        }
    }
    let mid = 0.5 * (lo + up);
    let (f0, fm, fh) = (f(0.0)?, f(mid)?, f(hi)?);
    Ok(if fh >= fm && fh > f0 {
        hi
    } else if fm > f0 {
        mid
    } else {
        0.0
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn hex() -> ExcavationHexagon {
        ExcavationHexagon::new((3, 6), 12).unwrap()
    }

    #[test]
    fn closed_form_basics() {
        assert_eq!(ddagger_closed(2.0, 3.0, 0.0, 0.0).unwrap(), 0.0);
        let (a, b, x, z) = (2.0, 3.0, 0.7, 0.4);
        let d = 1e-6;
        let fd = (ddagger_closed(a, b, x, z + d).unwrap() - ddagger_closed(a, b, x, z - d).unwrap()) / (2.0 * d);
        assert!((fd - ddagger_closed_dz(a, b, x)).abs() < 1e-6);
        assert!(ddagger_closed(1.0, 1.0, 2.0, 0.0).is_err());
    }

    #[test]
    fn dagger_mesh_is_admissible() {
        let f = f_ddagger(&hex()).unwrap();
        let (mesh, g) = mesh_of(&f).unwrap();
        assert!(mesh.feasibility_defect(&g) < 1e-9);
    }

    #[test]
    fn partials_match_the_height_module() {
        let h = hex();
        let f = f_ddagger(&h).unwrap();
        let (mesh, g) = mesh_of(&f).unwrap();
        let tris = h.triangles();
        for (t, tri) in tris.iter().enumerate() {
            let side = h.side_of(tri);
            let field = f.pair.side(side);
            let expect = crate::height::triangle_partials(|p| field.get(p).unwrap(), tri);
            let got = mesh.partials(t, &g);
            assert!((got.0 - expect.0).abs() < 1e-9 && (got.1 - expect.1).abs() < 1e-9, "{tri:?}");
        }
    }

    #[test]
    fn zero_table_gives_zero() {
        let f = f_ddagger(&hex()).unwrap();
        assert_eq!(s_v_diamond(&f, &TensionTable::constant(0.0)).unwrap(), 0.0);
        assert_eq!(s_v_delta(&f, &TauField::zero(50)).unwrap(), 0.0);
        let v = s_v(&f, &TensionTable::constant(0.0), &TauField::zero(50), 0.0).unwrap();
        assert_eq!(v.total, 0.0);
    }

    #[test]
    fn constant_table_integrates_area() {
        let h = hex();
        let f = f_ddagger(&h).unwrap();
        let c = 0.37;
        let got = s_v_diamond(&f, &TensionTable::constant(c)).unwrap();
        let area = h.triangles().len() as f64 / (2.0 * (h.n * h.n) as f64);
        assert!((got + c * area).abs() < 1e-12);
    }

    #[test]
    fn blend_endpoints() {
        let h = hex();
        let d = f_ddagger(&h).unwrap();
        assert_eq!(blend(&d, 0.0).unwrap(), d);
        assert_eq!(blend(&d, 1.0).unwrap(), d);
        assert!(blend(&d, 1.5).is_err());
    }

    #[test]
    fn tilt_grid_interpolates_linear_functions() {
        let g = TiltGrid::from_fn(30, |p, q| 0.3 * p - 0.7 * q + 1.0);
        for (p, q) in [(0.0, 0.0), (0.93, -0.41), (-1.2, -0.6), (1.0, 2.0), (-2.0, -1.0)] {
            let (v, (gp, gq)) = g.eval(p, q).unwrap();
            assert!((v - (0.3 * p - 0.7 * q + 1.0)).abs() < 1e-12);
            assert!((gp - 0.3).abs() < 1e-9 && (gq + 0.7).abs() < 1e-9);
        }
        assert!(g.eval(1.5, 0.0).is_err());
    }

    #[test]
    fn envelope_of_corner_nodes_is_planar() {
        let nodes: Vec<(TiltVector, f64)> = TiltVector::K_VERTICES.iter().zip([1.0, 0.0, 2.0]).map(|(t, v)| (*t, v)).collect();
        let g = TiltGrid::from_nodes(30, &nodes).unwrap();
        assert!(g.convexity_defect() < 1e-12);
        let (v, _) = g.eval(1.0, -1.0).unwrap();
        assert!((v - 1.0).abs() < 1e-9);
    }

    #[test]
    fn convexification_is_a_convex_minorant() {
        let g = TiltGrid::from_fn(12, |p, q| (p * 3.0).sin() + q * q);
        let c = g.convexified();
        assert!(c.convexity_defect() < 1e-9);
        for (a, b) in g.values.iter().zip(&c.values) {
            if a.is_finite() {
                assert!(*b <= *a + 1e-12);
            }
        }
    }

    #[test]
    fn flat_objective_is_already_optimal() {
        let f = f_ddagger(&hex()).unwrap();
        let m = maximize_sv(&f, &TensionTable::constant(0.2), &TauField::zero(50), 0.1, &MaximizeConfig::default()).unwrap();
        let start = s_v(&f, &TensionTable::constant(0.2), &TauField::zero(50), 0.1).unwrap();
        assert!((m.value.total - start.total).abs() < 1e-12);
    }

    /// Quadratic tension `|a|^2` on both sides: the maximizer minimizes a
    /// discrete Dirichlet energy, whose unconstrained minimizer solves a
    /// linear system. When that minimizer is admissible it is the optimum.
    #[test]
    fn quadratic_tension_matches_the_linear_solve() {
        let h = ExcavationHexagon::new((4, 8), 12).unwrap();
        struct Quadratic;
        impl Tension for Quadratic {
            fn sigma(&self, _: Side, _: (f64, f64), p: f64, q: f64) -> Result<(f64, (f64, f64))> {
                Ok((p * p + q * q, (2.0 * p, 2.0 * q)))
            }
        }
        let table = Quadratic;
        let start = f_ddagger(&h).unwrap();
        let (mesh, g0) = mesh_of(&start).unwrap();

        // energy sum_t |A_t G + b_t|^2, with A_t read off unit perturbations
        let free: Vec<usize> = (0..g0.len()).filter(|&k| !mesh.fixed[k]).collect();
        let col: std::collections::HashMap<usize, usize> = free.iter().enumerate().map(|(c, &k)| (k, c)).collect();
        let nf = free.len();
        let mut hess = nalgebra::DMatrix::<f64>::zeros(nf, nf);
        let mut rhs = nalgebra::DVector::<f64>::zeros(nf);
        let mut base = g0.clone();
        for &k in &free {
            base[k] = 0.0;
        }
        for t in 0..mesh.tris.len() {
            let b = mesh.partials(t, &base);
            let mut rows: Vec<(usize, (f64, f64))> = Vec::new();
            for &k in &mesh.tris[t].2 {
                if let Some(&c) = col.get(&k) {
                    let mut e = base.clone();
                    e[k] = 1.0;
                    let pe = mesh.partials(t, &e);
                    rows.push((c, (pe.0 - b.0, pe.1 - b.1)));
                }
            }
            for &(c1, a1) in &rows {
                rhs[c1] -= a1.0 * b.0 + a1.1 * b.1;
                for &(c2, a2) in &rows {
                    hess[(c1, c2)] += a1.0 * a2.0 + a1.1 * a2.1;
                }
            }
        }
        let sol = hess.lu().solve(&rhs).unwrap();
        let mut g_star = base.clone();
        for (c, &k) in free.iter().enumerate() {
            g_star[k] = sol[c];
        }
        assert!(mesh.feasibility_defect(&g_star) <= 0.0, "unconstrained minimizer is not admissible");

        let cfg = MaximizeConfig { iterations: 4000, gap_tol: 1e-12 };
        let out = maximize_sv(&start, &table, &TauField::zero(12), 0.0, &cfg).unwrap();
        let g = mesh.to_g(&out.field.pair).unwrap();
        let best = mesh.evaluate(&g_star, &table, &TauField::zero(12), 0.0, None).unwrap().total;
        assert!(out.value.total <= best + 1e-12);
        assert!(best - out.value.total < 1e-7, "objective gap {}", best - out.value.total);
        let mut worst: f64 = 0.0;
        for t in 0..mesh.tris.len() {
            let (a, b) = (mesh.partials(t, &g), mesh.partials(t, &g_star));
            worst = worst.max((a.0 - b.0).abs()).max((a.1 - b.1).abs());
        }
        assert!(worst < 1e-3, "tilt error {worst}");
    }

    #[test]
    fn small_table_is_convex_and_finite() {
        let src = crate::tension::ProcessSource { n: 40, variance: 1.0, seed: 7 };
        let procs = src.samples(3).unwrap();
        let mut cfg = TableConfig::new(4, 3);
        cfg.quantiles = vec![0.3];
        cfg.level_fracs = vec![0.7];
        let t = estimate_table(&cfg, &procs, &procs).unwrap();
        for g in t.up.grids.iter().chain(&t.lo.grids) {
            assert!(g.convexity_defect() < 1e-9);
            assert!(g.values.iter().filter(|v| !v.is_nan()).all(|v| v.is_finite()));
        }
        let f = f_ddagger(&hex()).unwrap();
        let out = maximize_sv(&f, &t, &TauField::zero(40), 0.0, &MaximizeConfig { iterations: 50, gap_tol: 1e-9 }).unwrap();
        assert!(out.value.total >= s_v(&f, &t, &TauField::zero(40), 0.0).unwrap().total - 1e-12);
    }

    #[test]
    fn fitted_positions_hold_a_window() {
        for pos in [(0.0, 0.0), (1.0, 1.0), (0.5, 0.2), (0.9, 0.95)] {
            let (u, w) = fit_position(pos, 8, 100).unwrap();
            let (j0, k0) = ((u * 100.0).ceil() as i64, (w * 100.0).ceil() as i64);
            assert!(j0 - 8 >= 1 && k0 + 8 <= 100 && j0 + 8 <= k0 - 8, "{pos:?}");
        }
        assert!(fit_position((0.5, 0.5), 8, 30).is_err());
    }
}
