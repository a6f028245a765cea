//! Calderón–Zygmund decomposition of a Lipschitz function on the unit
//! square into dyadic cubes where it is close to affine (GOOD) and a small
//! set of finest-level cubes where it is not (BAD).
//!
//! Functions are sampled on the nodes of a uniform grid with `2^(k+2)`
//! cells per side, so every cube of level `<= k` holds at least 25 samples
//! of its closed square.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{HiveError, Result};

/// Dimension of the cubes.
pub const DIM: u32 = 2;

/// Stopping constant of the `L^2` rule: a cube is GOOD once
/// `|Q|^-(1 + 2/d) * integral_Q |F - L_Q|^2 <= C_HAT * eps^(d + 2)`.
/// Calibrated by `examples/calibrate_c_hat.rs` as the largest power of two
/// for which GOOD cubes never broke the sup bound on the calibration corpus.
pub const C_HAT: f64 = 1.0 / 16.0;

/// Default for the precondition constant `eps^(d+2) * eta * k >= C_SHARP`.
pub const C_SHARP: f64 = 1.0;

/// Dyadic subsquare `[i 2^-l, (i+1) 2^-l] x [j 2^-l, (j+1) 2^-l]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct DyadicCube {
    pub level: u32,
    pub index: (u64, u64),
}

impl DyadicCube {
    pub const UNIT: DyadicCube = DyadicCube { level: 0, index: (0, 0) };

    pub fn side(&self) -> f64 {
        (-(self.level as f64)).exp2()
    }

    pub fn volume(&self) -> f64 {
        self.side() * self.side()
    }

    pub fn children(&self) -> [DyadicCube; 4] {
        let (i, j) = (2 * self.index.0, 2 * self.index.1);
        let l = self.level + 1;
        [
            DyadicCube { level: l, index: (i, j) },
            DyadicCube { level: l, index: (i + 1, j) },
            DyadicCube { level: l, index: (i, j + 1) },
            DyadicCube { level: l, index: (i + 1, j + 1) },
        ]
    }

    pub fn parent(&self) -> Option<DyadicCube> {
        (self.level > 0).then(|| DyadicCube { level: self.level - 1, index: (self.index.0 / 2, self.index.1 / 2) })
    }

    pub fn contains(&self, other: &DyadicCube) -> bool {
        other.level >= self.level && {
            let s = other.level - self.level;
            (other.index.0 >> s, other.index.1 >> s) == self.index
        }
    }
}

/// Samples of a function on the nodes `(a, b) / cells` of the unit square.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sampled {
    /// `cells = 2^exponent`.
    pub exponent: u32,
    /// `values[b * (cells + 1) + a]`.
    pub values: Vec<f64>,
}

impl Sampled {
    pub fn from_fn(exponent: u32, f: impl Fn(f64, f64) -> f64) -> Self {
        let c = 1usize << exponent;
        let h = 1.0 / c as f64;
        let values = (0..=c).flat_map(|b| (0..=c).map(move |a| (a, b))).map(|(a, b)| f(a as f64 * h, b as f64 * h)).collect();
        Self { exponent, values }
    }

    /// Grid fine enough for decompositions down to level `k`.
    pub fn for_depth(k: u32, f: impl Fn(f64, f64) -> f64) -> Self {
        Self::from_fn(k + 2, f)
    }

    pub fn cells(&self) -> usize {
        1 << self.exponent
    }

    pub fn at(&self, a: usize, b: usize) -> f64 {
        self.values[b * (self.cells() + 1) + a]
    }

    /// Node range `a0..=a1` covering the closed cube along one axis.
    fn range(&self, q: &DyadicCube, i: u64) -> Result<(usize, usize)> {
        if q.level > self.exponent {
            return Err(HiveError::Parameter(format!("cube level {} is finer than the sampling grid", q.level)));
        }
        let per = 1usize << (self.exponent - q.level);
        let a0 = i as usize * per;
        if a0 + per > self.cells() {
            return Err(HiveError::Range(format!("cube {q:?} lies outside the unit square")));
        }
        Ok((a0, a0 + per))
    }

    /// `(x, y, F)` at every sample of the closed cube.
    pub fn samples_in(&self, q: &DyadicCube) -> Result<Vec<(f64, f64, f64)>> {
        let (a0, a1) = self.range(q, q.index.0)?;
        let (b0, b1) = self.range(q, q.index.1)?;
        let h = 1.0 / self.cells() as f64;
        Ok((b0..=b1).flat_map(|b| (a0..=a1).map(move |a| (a, b))).map(|(a, b)| (a as f64 * h, b as f64 * h, self.at(a, b))).collect())
    }

    /// Largest difference quotient over horizontal, vertical and diagonal
    /// neighbour pairs.
    pub fn lipschitz_estimate(&self) -> f64 {
        let c = self.cells();
        let h = 1.0 / c as f64;
        let mut worst: f64 = 0.0;
        for b in 0..=c {
            for a in 0..=c {
                let v = self.at(a, b);
                if a < c {
                    worst = worst.max((self.at(a + 1, b) - v).abs() / h);
                }
                if b < c {
                    worst = worst.max((self.at(a, b + 1) - v).abs() / h);
                }
                if a < c && b < c {
                    worst = worst.max((self.at(a + 1, b + 1) - v).abs() / (h * 2f64.sqrt()));
                }
                if a > 0 && b < c {
                    worst = worst.max((self.at(a - 1, b + 1) - v).abs() / (h * 2f64.sqrt()));
                }
            }
        }
        worst
    }
}

/// Affine function `c + gx x + gy y`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Affine {
    pub c: f64,
    pub gx: f64,
    pub gy: f64,
}

impl Affine {
    pub fn at(&self, x: f64, y: f64) -> f64 {
        self.c + self.gx * x + self.gy * y
    }
}

/// Least-squares affine fit to the samples of `F` in the closed cube `Q`.
pub fn best_l2_linear(f: &Sampled, q: &DyadicCube) -> Result<Affine> {
    fit(&f.samples_in(q)?)
}

fn fit(s: &[(f64, f64, f64)]) -> Result<Affine> {
    if s.len() < DIM as usize + 1 {
        return Err(HiveError::Parameter(format!("{} samples cannot determine an affine fit", s.len())));
    }
    let k = s.len() as f64;
    let (mx, my, mf) = s.iter().fold((0.0, 0.0, 0.0), |a, p| (a.0 + p.0 / k, a.1 + p.1 / k, a.2 + p.2 / k));
    let (mut sxx, mut sxy, mut syy, mut sxf, mut syf) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for &(x, y, v) in s {
        let (dx, dy, dv) = (x - mx, y - my, v - mf);
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
        sxf += dx * dv;
        syf += dy * dv;
    }
    let det = sxx * syy - sxy * sxy;
    if det <= 1e-14 * (sxx * syy).max(f64::MIN_POSITIVE) {
        return Err(HiveError::Parameter("sample points are collinear".into()));
    }
    let gx = (syy * sxf - sxy * syf) / det;
    let gy = (sxx * syf - sxy * sxf) / det;
    Ok(Affine { c: mf - gx * mx - gy * my, gx, gy })
}

/// Decomposition parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CZParams {
    pub eps: f64,
    pub eta: f64,
    pub k: u32,
    pub c_sharp: f64,
}

impl CZParams {
    pub fn new(eps: f64, eta: f64, k: u32) -> Self {
        Self { eps, eta, k, c_sharp: C_SHARP }
    }

    /// `eps^(d+2) * eta * k`.
    pub fn product(&self) -> f64 {
        self.eps.powi(DIM as i32 + 2) * self.eta * self.k as f64
    }

    pub fn check(&self) -> Result<()> {
        if !(self.eps > 0.0 && self.eta > 0.0 && self.k > 0 && self.c_sharp > 0.0) {
            return Err(HiveError::Parameter(format!("invalid decomposition parameters {self:?}")));
        }
        let p = self.product();
        if p < self.c_sharp {
            return Err(HiveError::Parameter(format!(
                "eps^{} * eta * k = {p} is below the required {}",
                DIM + 2,
                self.c_sharp
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CZResult {
    pub good: Vec<(DyadicCube, Affine)>,
    pub bad: Vec<DyadicCube>,
    pub params: CZParams,
}

impl CZResult {
    pub fn bad_volume(&self) -> f64 {
        self.bad.iter().fold(0.0, |a, q| a + q.volume())
    }
}

/// `|Q|^-(1 + 2/d) * integral_Q |F - L|^2`, with the integral taken as the
/// sample mean times `|Q|`.
pub fn normalized_residual(s: &[(f64, f64, f64)], l: &Affine, q: &DyadicCube) -> f64 {
    let mean = s.iter().map(|&(x, y, v)| (v - l.at(x, y)).powi(2)).sum::<f64>() / s.len() as f64;
    mean * q.volume() / q.volume().powf(1.0 + 2.0 / DIM as f64)
}

/// Bisect from the unit square, stopping at cubes that pass the `L^2` rule
/// (GOOD) or reach level `k` (BAD).
pub fn cz_decompose(f: &Sampled, params: CZParams) -> Result<CZResult> {
    params.check()?;
    if f.exponent < params.k + 2 {
        return Err(HiveError::Parameter(format!(
            "grid of 2^{} cells per side is too coarse for depth {}",
            f.exponent, params.k
        )));
    }
    let lip = f.lipschitz_estimate();
    if lip > 1.0 + 1e-9 {
        return Err(HiveError::Validation(format!("sampled Lipschitz constant {lip} exceeds 1")));
    }
    let threshold = C_HAT * params.eps.powi(DIM as i32 + 2);
    let (good, bad) = split(f, DyadicCube::UNIT, params.k, threshold)?;
    Ok(CZResult { good, bad, params })
}

type Parts = (Vec<(DyadicCube, Affine)>, Vec<DyadicCube>);

fn split(f: &Sampled, q: DyadicCube, k: u32, threshold: f64) -> Result<Parts> {
    let s = f.samples_in(&q)?;
    let l = fit(&s)?;
    if normalized_residual(&s, &l, &q) <= threshold {
        return Ok((vec![(q, l)], Vec::new()));
    }
    if q.level >= k {
        return Ok((Vec::new(), vec![q]));
    }
    let parts: Vec<Parts> = q.children().par_iter().map(|c| split(f, *c, k, threshold)).collect::<Result<_>>()?;
    let mut out: Parts = (Vec::new(), Vec::new());
    for (g, b) in parts {
        out.0.extend(g);
        out.1.extend(b);
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CZReport {
    /// GOOD cubes where `max |F - L_Q| > eps * side(Q)`, with the maximum.
    pub sup_violations: Vec<(DyadicCube, f64)>,
    pub bad_volume: f64,
    pub bad_volume_ok: bool,
    /// BAD cubes not at level `k`.
    pub misplaced_bad: Vec<DyadicCube>,
    /// The cubes tile the unit square without overlap.
    pub partition_ok: bool,
}

impl CZReport {
    pub fn is_clean(&self) -> bool {
        self.sup_violations.is_empty() && self.bad_volume_ok && self.misplaced_bad.is_empty() && self.partition_ok
    }
}

/// Exhaustive grid check of a decomposition.
pub fn verify_cz(f: &Sampled, r: &CZResult) -> CZReport {
    let eps = r.params.eps;
    let mut sup_violations = Vec::new();
    for (q, l) in &r.good {
        let worst = match f.samples_in(q) {
            Ok(s) => s.iter().map(|&(x, y, v)| (v - l.at(x, y)).abs()).fold(0.0, f64::max),
            Err(_) => f64::INFINITY,
        };
        if worst > eps * q.side() * (1.0 + 1e-12) {
            sup_violations.push((*q, worst));
        }
    }
    let bad_volume = r.bad_volume();
    let misplaced_bad = r.bad.iter().filter(|q| q.level != r.params.k).copied().collect();
    // count covered cells at the finest level present
    let cubes: Vec<DyadicCube> = r.good.iter().map(|g| g.0).chain(r.bad.iter().copied()).collect();
    let deepest = cubes.iter().map(|q| q.level).max().unwrap_or(0);
    let side = 1u64 << deepest;
    let mut cover = vec![0u8; (side * side) as usize];
    let mut partition_ok = true;
    for q in &cubes {
        if q.level > deepest || q.index.0 >= (1 << q.level) || q.index.1 >= (1 << q.level) {
            partition_ok = false;
            continue;
        }
        let s = deepest - q.level;
        for b in (q.index.1 << s)..((q.index.1 + 1) << s) {
            for a in (q.index.0 << s)..((q.index.0 + 1) << s) {
                let c = &mut cover[(b * side + a) as usize];
                *c = c.saturating_add(1);
            }
        }
    }
    partition_ok &= cover.iter().all(|&c| c == 1);
    CZReport { sup_violations, bad_volume, bad_volume_ok: bad_volume <= r.params.eta, misplaced_bad, partition_ok }
}

/// SVG overlay of GOOD (green) and BAD (red) cubes on the unit square.
pub fn cz_svg(r: &CZResult, size: f64) -> String {
    let mut s = format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{size}\" height=\"{size}\" viewBox=\"0 0 {size} {size}\">\n"
    );
    let rect = |q: &DyadicCube, fill: &str| {
        let d = q.side() * size;
        let (x, y) = (q.index.0 as f64 * d, size - (q.index.1 as f64 + 1.0) * d);
        format!("<rect x=\"{x}\" y=\"{y}\" width=\"{d}\" height=\"{d}\" fill=\"{fill}\" stroke=\"black\" stroke-width=\"0.5\"/>\n")
    };
    for (q, _) in &r.good {
        s.push_str(&rect(q, "#9fd89f"));
    }
    for q in &r.bad {
        s.push_str(&rect(q, "#e06666"));
    }
    s.push_str("</svg>\n");
    s
}

/// Random 1-Lipschitz function on the unit square, drawn from a mixture of
/// trigonometric sums, distance-to-point minima and plane maxima.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum RandomLipschitz {
    /// `sum a_i sin(2 pi <f_i, x> + phi_i)`, scaled to Lipschitz constant 1.
    Trig { terms: Vec<(f64, [f64; 2], f64)> },
    /// `min_i (c_i + |x - p_i|)`.
    Cones { points: Vec<([f64; 2], f64)> },
    /// `max_i (c_i + <g_i, x>)` with `|g_i| <= 1`.
    Planes { planes: Vec<([f64; 2], f64)> },
    /// Convex combination of two fields.
    Mix(Box<RandomLipschitz>, Box<RandomLipschitz>, f64),
}

impl RandomLipschitz {
    pub fn draw(seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Self::draw_with(&mut rng, 0)
    }

    fn draw_with(rng: &mut ChaCha8Rng, depth: u32) -> Self {
        let pick = if depth > 0 { rng.random_range(0..3) } else { rng.random_range(0..4) };
        match pick {
            0 => {
                let k = rng.random_range(1..=4);
                let mut terms: Vec<(f64, [f64; 2], f64)> = (0..k)
                    .map(|_| {
                        let a: f64 = rng.random_range(-1.0..1.0);
                        let f = [rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0)];
                        (a, f, rng.random_range(0.0..std::f64::consts::TAU))
                    })
                    .collect();
                let lip: f64 = terms.iter().map(|(a, f, _)| a.abs() * std::f64::consts::TAU * f[0].hypot(f[1])).sum();
                let s = rng.random_range(0.3..1.0) / lip.max(1e-12);
                terms.iter_mut().for_each(|t| t.0 *= s);
                RandomLipschitz::Trig { terms }
            }
            1 => {
                let k = rng.random_range(1..=5);
                RandomLipschitz::Cones {
                    points: (0..k)
                        .map(|_| ([rng.random_range(-0.2..1.2), rng.random_range(-0.2..1.2)], rng.random_range(0.0..0.3)))
                        .collect(),
                }
            }
            2 => {
                let k = rng.random_range(1..=5);
                RandomLipschitz::Planes {
                    planes: (0..k)
                        .map(|_| {
                            let r: f64 = rng.random_range(0.0..1.0);
                            let t: f64 = rng.random_range(0.0..std::f64::consts::TAU);
                            ([r * t.cos(), r * t.sin()], rng.random_range(-0.5..0.5))
                        })
                        .collect(),
                }
            }
            _ => {
                let a = Self::draw_with(rng, depth + 1);
                let b = Self::draw_with(rng, depth + 1);
                RandomLipschitz::Mix(Box::new(a), Box::new(b), rng.random_range(0.0..1.0))
            }
        }
    }

    pub fn eval(&self, x: f64, y: f64) -> f64 {
        match self {
            RandomLipschitz::Trig { terms } => {
                terms.iter().map(|(a, f, p)| a * (std::f64::consts::TAU * (f[0] * x + f[1] * y) + p).sin()).sum()
            }
            RandomLipschitz::Cones { points } => {
                points.iter().map(|(p, c)| c + (x - p[0]).hypot(y - p[1])).fold(f64::INFINITY, f64::min)
            }
            RandomLipschitz::Planes { planes } => {
                planes.iter().map(|(g, c)| c + g[0] * x + g[1] * y).fold(f64::NEG_INFINITY, f64::max)
            }
            RandomLipschitz::Mix(a, b, t) => t * a.eval(x, y) + (1.0 - t) * b.eval(x, y),
        }
    }

    /// Samples for decompositions down to level `k`, scaled by a hair
    /// below 1 so rounding never pushes a difference quotient over 1.
    pub fn sample(&self, k: u32) -> Sampled {
        Sampled::for_depth(k, |x, y| (1.0 - 1e-9) * self.eval(x, y))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cube_relations() {
        let q = DyadicCube { level: 2, index: (1, 3) };
        for c in q.children() {
            assert_eq!(c.parent(), Some(q));
            assert!(q.contains(&c));
        }
        assert_eq!(q.side(), 0.25);
        assert!(DyadicCube::UNIT.contains(&q));
        assert!(!q.contains(&DyadicCube::UNIT));
    }

    #[test]
    fn affine_fit_is_exact_on_affine_data() {
        let f = Sampled::from_fn(5, |x, y| 0.3 - 0.4 * x + 0.2 * y);
        let l = best_l2_linear(&f, &DyadicCube { level: 2, index: (1, 2) }).unwrap();
        assert!((l.c - 0.3).abs() < 1e-12 && (l.gx + 0.4).abs() < 1e-12 && (l.gy - 0.2).abs() < 1e-12);
    }

    #[test]
    fn residual_is_orthogonal_to_affine_functions() {
        let f = Sampled::from_fn(4, |x, y| (3.0 * x).sin() * y);
        let q = DyadicCube::UNIT;
        let s = f.samples_in(&q).unwrap();
        let l = best_l2_linear(&f, &q).unwrap();
        for basis in [|_: f64, _: f64| 1.0, |x: f64, _: f64| x, |_: f64, y: f64| y] {
            let ip: f64 = s.iter().map(|&(x, y, v)| (v - l.at(x, y)) * basis(x, y)).sum();
            assert!(ip.abs() < 1e-10);
        }
    }

    #[test]
    fn constant_and_affine_inputs_give_one_good_cube() {
        for f in [Sampled::for_depth(3, |_, _| 0.0), Sampled::for_depth(3, |x, y| 0.5 * x - 0.5 * y + 2.0)] {
            let r = cz_decompose(&f, CZParams::new(1.0, 1.0, 3)).unwrap();
            assert_eq!(r.good.len(), 1);
            assert_eq!(r.good[0].0, DyadicCube::UNIT);
            assert!(r.bad.is_empty());
            assert!(verify_cz(&f, &r).is_clean());
        }
    }

    #[test]
    fn precondition_and_lipschitz_are_enforced() {
        let f = Sampled::for_depth(3, |x, _| x);
        assert!(cz_decompose(&f, CZParams::new(0.1, 0.1, 3)).is_err());
        let steep = Sampled::for_depth(3, |x, _| 2.0 * x);
        assert!(matches!(cz_decompose(&steep, CZParams::new(1.0, 1.0, 3)), Err(HiveError::Validation(_))));
    }
}
