//! Height functions of tilings, tilts, Thurston tileability, and rounding of
//! asymptotic height functions to discrete ones.
//!
//! The local rule: along a positive unit step `u -> w` the height goes up by
//! one when the step follows a lozenge edge and down by two when it crosses
//! a lozenge diagonally.

pub mod domain;
pub mod round;

use std::collections::{HashMap, HashSet, VecDeque};

use serde::{Deserialize, Serialize};

use crate::error::{HiveError, Result};
use crate::lozenge::geometry::{Edge, ExcavationHexagon, Pt, Side};
use crate::lozenge::{validate_tiling, BorderTriangle, Lozenge, Tiling};

pub use domain::{extendability_annulus, is_tileable, max_extension, AnnulusParams, DomainDoc, LatticeDomain};
pub use round::{dagger, round_asymptotic, round_free, standard_heights};

/// Values on a finite set of lattice points, sorted by `(y, x)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Field<T> {
    pub values: Vec<(Pt, T)>,
}

/// Integer heights on lattice points.
pub type HeightField = Field<i64>;

impl<T: Copy> Field<T> {
    pub fn from_pairs(mut values: Vec<(Pt, T)>) -> Self {
        values.sort_by_key(|&((x, y), _)| (y, x));
        values.dedup_by_key(|(p, _)| *p);
        Self { values }
    }

    pub fn get(&self, p: Pt) -> Option<T> {
        self.values
            .binary_search_by_key(&(p.1, p.0), |&((x, y), _)| (y, x))
            .ok()
            .map(|k| self.values[k].1)
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn points(&self) -> impl Iterator<Item = Pt> + '_ {
        self.values.iter().map(|(p, _)| *p)
    }

    pub fn map<U: Copy>(&self, f: impl Fn(Pt, T) -> U) -> Field<U> {
        Field { values: self.values.iter().map(|&(p, v)| (p, f(p, v))).collect() }
    }

    /// Dense grid over the bounding box, rows indexed by `y - y0`; returns
    /// `(x0, y0, rows)`.
    pub fn grid(&self) -> (i64, i64, Vec<Vec<Option<T>>>) {
        if self.values.is_empty() {
            return (0, 0, Vec::new());
        }
        let x0 = self.values.iter().map(|(p, _)| p.0).min().expect("non-empty");
        let x1 = self.values.iter().map(|(p, _)| p.0).max().expect("non-empty");
        let y0 = self.values.iter().map(|(p, _)| p.1).min().expect("non-empty");
        let y1 = self.values.iter().map(|(p, _)| p.1).max().expect("non-empty");
        let mut rows = vec![vec![None; (x1 - x0 + 1) as usize]; (y1 - y0 + 1) as usize];
        for &((x, y), v) in &self.values {
            rows[(y - y0) as usize][(x - x0) as usize] = Some(v);
        }
        (x0, y0, rows)
    }
}

/// Gradient `(a, b)` in the basis of the unit lattice vectors `i` and `j`,
/// which meet at 60 degrees.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TiltVector {
    pub g: [f64; 2],
}

impl TiltVector {
    /// Corners of `K`: `2(i - j)`, `2j` and `-2i`.
    pub const K_VERTICES: [TiltVector; 3] =
        [TiltVector { g: [2.0, -2.0] }, TiltVector { g: [0.0, 2.0] }, TiltVector { g: [-2.0, 0.0] }];

    pub fn new(a: f64, b: f64) -> Self {
        Self { g: [a, b] }
    }

    /// Directional derivatives `(df/dx, df/dy)` along the lattice steps
    /// `(1, 0)` and `(0, 1)`; the Gram matrix of the basis is
    /// `[[1, 1/2], [1/2, 1]]`.
    pub fn partials(&self) -> (f64, f64) {
        let [a, b] = self.g;
        (a + 0.5 * b, 0.5 * a + b)
    }

    pub fn from_partials(p: f64, q: f64) -> Self {
        // inverse of [[1, 1/2], [1/2, 1]]
        Self { g: [(4.0 * p - 2.0 * q) / 3.0, (4.0 * q - 2.0 * p) / 3.0] }
    }

    /// Membership in `s K` (scaled about the origin) up to `tol`, tested on
    /// the partials: `p <= s`, `q >= -s`, `q - p <= s`.
    pub fn in_scaled_k(&self, s: f64, tol: f64) -> bool {
        let (p, q) = self.partials();
        p <= s + tol && q >= -s - tol && q - p <= s + tol
    }

    pub fn in_k(&self, tol: f64) -> bool {
        self.in_scaled_k(1.0, tol)
    }

    /// Value at a lattice point of the linear function with this gradient.
    pub fn apply(&self, p: Pt) -> f64 {
        let (px, py) = self.partials();
        px * p.0 as f64 + py * p.1 as f64
    }

    /// Lozenge densities `(type I, type II, type III)` of a tilt in `K`:
    /// the barycentric coordinates with respect to the corners
    /// `2j`, `-2i` and `2(i - j)`.
    pub fn densities(&self) -> [f64; 3] {
        let (p, q) = self.partials();
        // corners in partials: I (1, 2), II (-2, -1), III (1, -1)
        let t1 = (q + 1.0) / 3.0;
        let t2 = (1.0 - p) / 3.0;
        [t1, t2, 1.0 - t1 - t2]
    }
}

/// Discrete gradient of a function on the lower or upper half of a unit
/// cell, as partials `(df/dx, df/dy)`.
pub fn triangle_partials(mut f: impl FnMut(Pt) -> f64, t: &crate::lozenge::Triangle) -> (f64, f64) {
    let (x, y) = (t.x, t.y);
    match t.half {
        crate::lozenge::Half::Lower => (f((x + 1, y)) - f((x, y)), f((x, y + 1)) - f((x, y))),
        crate::lozenge::Half::Upper => (f((x + 1, y + 1)) - f((x, y + 1)), f((x + 1, y + 1)) - f((x + 1, y))),
    }
}

/// A pair of functions on the two trapezoids of an excavation hexagon.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Pair<T> {
    pub n: i64,
    pub v: Pt,
    pub up: Field<T>,
    pub lo: Field<T>,
}

/// Discrete height pair of a tiling.
pub type HeightPair = Pair<i64>;
/// Real-valued pair, for asymptotic height functions sampled on the lattice.
pub type AsymptoticPair = Pair<f64>;

impl<T: Copy> Pair<T> {
    pub fn hexagon(&self) -> Result<ExcavationHexagon> {
        ExcavationHexagon::new(self.v, self.n)
    }

    pub fn side(&self, s: Side) -> &Field<T> {
        match s {
            Side::Up => &self.up,
            Side::Lo => &self.lo,
        }
    }

    pub fn map<U: Copy>(&self, f: impl Fn(Side, Pt, T) -> U) -> Pair<U> {
        Pair {
            n: self.n,
            v: self.v,
            up: self.up.map(|p, v| f(Side::Up, p, v)),
            lo: self.lo.map(|p, v| f(Side::Lo, p, v)),
        }
    }
}

impl HeightPair {
    /// Heights of a tiling, with `f_up(A) = 2j - i` and `f_lo(A) = 2i - j`
    /// at the westmost corner `A` of the hexagon around `v = (i, j)`.
    pub fn from_tiling(h: &ExcavationHexagon, t: &Tiling) -> Result<Self> {
        validate_tiling(h, t)?;
        let mut diag: [HashSet<Edge>; 2] = [HashSet::new(), HashSet::new()];
        for l in &t.lozenges {
            let s = l.side(h.n).expect("validated tilings do not cross the equator");
            diag[(s == Side::Lo) as usize].insert(l.diagonal());
        }
        for b in &t.border {
            let e = Edge { from: (b.k + 1, h.n - b.k - 1), to: (b.k, h.n - b.k) };
            diag[(!b.upward) as usize].insert(e);
        }
        let starts = h.boundary_heights(Side::Up)[0].1;
        let startl = h.boundary_heights(Side::Lo)[0].1;
        let up = side_heights(h, Side::Up, &diag[0], starts)?;
        let lo = side_heights(h, Side::Lo, &diag[1], startl)?;
        Ok(Pair { n: h.n, v: h.v, up, lo })
    }

    /// Inverse of [`HeightPair::from_tiling`].
    pub fn to_tiling(&self) -> Result<Tiling> {
        let h = self.hexagon()?;
        let mut t = Tiling::default();
        for side in [Side::Up, Side::Lo] {
            let f = self.side(side);
            for (e, _) in side_edges(&h, side) {
                let (Some(a), Some(b)) = (f.get(e.from), f.get(e.to)) else {
                    return Err(HiveError::Validation(format!("missing height on edge {e:?}")));
                };
                match b - a {
                    1 => {}
                    -2 => {
                        let on_equator = e.from.0 + e.from.1 == h.n && e.to.0 + e.to.1 == h.n;
                        if on_equator {
                            t.border.push(BorderTriangle { k: e.to.0, upward: side == Side::Up });
                        } else {
                            let (x, y) = e.sides();
                            t.lozenges.push(Lozenge::from_triangles(x, y).expect("edge sides form a lozenge"));
                        }
                    }
                    d => return Err(HiveError::Validation(format!("height step {d} on edge {e:?}"))),
                }
            }
        }
        let t = t.canonical();
        validate_tiling(&h, &t)?;
        Ok(t)
    }

    /// The same pair shifted to vanish at the westmost corner.
    pub fn zeroed(&self) -> Self {
        let a = self.corner_a();
        let (su, sl) = (self.up.get(a).unwrap_or(0), self.lo.get(a).unwrap_or(0));
        self.map(|s, _, v| if s == Side::Up { v - su } else { v - sl })
    }

    fn corner_a(&self) -> Pt {
        let (i, j) = self.v;
        if i <= j {
            (0, self.n)
        } else {
            (i - j, self.n + j - i)
        }
    }
}

/// Positive edges of one trapezoid with their triangle counts there.
fn side_edges(h: &ExcavationHexagon, side: Side) -> Vec<(Edge, u8)> {
    let mut count: HashMap<Edge, u8> = HashMap::new();
    for t in h.triangles().iter().filter(|t| h.side_of(t) == side) {
        for e in Edge::of_triangle(t) {
            *count.entry(e).or_insert(0) += 1;
        }
    }
    let mut v: Vec<(Edge, u8)> = count.into_iter().collect();
    v.sort();
    v
}

fn side_heights(h: &ExcavationHexagon, side: Side, diag: &HashSet<Edge>, start: i64) -> Result<HeightField> {
    let edges = side_edges(h, side);
    let mut adj: HashMap<Pt, Vec<(Pt, i64)>> = HashMap::new();
    for (e, _) in &edges {
        let s = if diag.contains(e) { -2 } else { 1 };
        adj.entry(e.from).or_default().push((e.to, s));
        adj.entry(e.to).or_default().push((e.from, -s));
    }
    let a = h.a();
    let mut val: HashMap<Pt, i64> = HashMap::from([(a, start)]);
    let mut queue = VecDeque::from([a]);
    while let Some(p) = queue.pop_front() {
        let fp = val[&p];
        for &(q, s) in adj.get(&p).map(Vec::as_slice).unwrap_or(&[]) {
            match val.get(&q) {
                Some(&fq) if fq != fp + s => {
                    return Err(HiveError::Validation(format!("inconsistent heights between {p:?} and {q:?}")));
                }
                Some(_) => {}
                None => {
                    val.insert(q, fp + s);
                    queue.push_back(q);
                }
            }
        }
    }
    Ok(Field::from_pairs(val.into_iter().collect()))
}

fn check_same(f: &Pair<impl Copy>, g: &Pair<impl Copy>) -> Result<()> {
    if f.n != g.n || f.v != g.v || f.up.len() != g.up.len() || f.lo.len() != g.lo.len() {
        return Err(HiveError::Parameter(format!(
            "pairs live on different hexagons: ({}, {:?}) vs ({}, {:?})",
            f.n, f.v, g.n, g.v
        )));
    }
    Ok(())
}

fn combine<T: Copy + PartialOrd>(f: &Pair<T>, g: &Pair<T>, upper_max: bool) -> Result<Pair<T>> {
    check_same(f, g)?;
    let pick = |a: T, b: T, take_max: bool| if (a < b) == take_max { b } else { a };
    let side = |x: &Field<T>, y: &Field<T>, take_max: bool| -> Result<Field<T>> {
        x.values
            .iter()
            .zip(&y.values)
            .map(|(&(p, a), &(q, b))| {
                if p != q {
                    Err(HiveError::Parameter(format!("point sets differ at {p:?} / {q:?}")))
                } else {
                    Ok((p, pick(a, b, take_max)))
                }
            })
            .collect::<Result<Vec<_>>>()
            .map(|values| Field { values })
    };
    Ok(Pair { n: f.n, v: f.v, up: side(&f.up, &g.up, upper_max)?, lo: side(&f.lo, &g.lo, !upper_max)? })
}

/// `f v g`: maximum on the upper trapezoid, minimum on the lower one.
pub fn join<T: Copy + PartialOrd>(f: &Pair<T>, g: &Pair<T>) -> Result<Pair<T>> {
    combine(f, g, true)
}

/// `f ^ g`: minimum on the upper trapezoid, maximum on the lower one.
pub fn meet<T: Copy + PartialOrd>(f: &Pair<T>, g: &Pair<T>) -> Result<Pair<T>> {
    combine(f, g, false)
}

/// `f` dominates `g` in the order where `f v g = f`.
pub fn dominates<T: Copy + PartialOrd>(f: &Pair<T>, g: &Pair<T>) -> bool {
    f.up.values.iter().zip(&g.up.values).all(|((_, a), (_, b))| a >= b)
        && f.lo.values.iter().zip(&g.lo.values).all(|((_, a), (_, b))| a <= b)
}

/// Checks that a real pair is an asymptotic height function pair on its
/// hexagon: discrete gradients in `K` on every triangle, exact outer
/// boundary values, and `f_up + f_lo` rising by one per unit step along the
/// equator.
pub fn check_asymptotic(f: &AsymptoticPair, tol: f64) -> Result<()> {
    let h = f.hexagon()?;
    for side in [Side::Up, Side::Lo] {
        let field = f.side(side);
        for t in h.triangles().iter().filter(|t| h.side_of(t) == side) {
            let mut missing = None;
            let (p, q) = triangle_partials(
                |pt| {
                    field.get(pt).unwrap_or_else(|| {
                        missing = Some(pt);
                        0.0
                    })
                },
                t,
            );
            if let Some(pt) = missing {
                return Err(HiveError::Validation(format!("no value at {pt:?}")));
            }
            if !TiltVector::from_partials(p, q).in_k(tol) {
                return Err(HiveError::Validation(format!(
                    "gradient ({p}, {q}) on {t:?} lies outside K"
                )));
            }
        }
        for (pt, b) in h.boundary_heights(side) {
            let v = field.get(pt).ok_or_else(|| HiveError::Validation(format!("no value at {pt:?}")))?;
            if (v - b as f64).abs() > tol {
                return Err(HiveError::Validation(format!("boundary value {v} at {pt:?}, expected {b}")));
            }
        }
    }
    for k in h.border_edges() {
        let (a, b) = ((k, h.n - k), (k + 1, h.n - k - 1));
        let s = |p: Pt| f.up.get(p).unwrap_or(f64::NAN) + f.lo.get(p).unwrap_or(f64::NAN);
        let step = s(b) - s(a);
        if (step - 1.0).abs() > tol {
            return Err(HiveError::Validation(format!("equator step {step} at border edge {k}")));
        }
    }
    Ok(())
}
