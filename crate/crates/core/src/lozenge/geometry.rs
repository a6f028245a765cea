//! Lattice triangles, excavation hexagons and general triangle regions.
//!
//! Points are integer pairs `(x, y)` of the triangular lattice spanned by the
//! unit steps `(1, 0)`, `(0, 1)` and `(1, -1)`. The unit square with lower
//! left corner `(x, y)` splits along its anti-diagonal into a lower-left and
//! an upper-right triangle.

use std::collections::{HashMap, HashSet};

use serde::{Deserialize, Serialize};

use crate::error::{HiveError, Result};

pub type Pt = (i64, i64);

/// Which half of a unit square a triangle is.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Half {
    /// `{(x, y), (x+1, y), (x, y+1)}`.
    Lower,
    /// `{(x+1, y), (x+1, y+1), (x, y+1)}`.
    Upper,
}

/// Unit lattice triangle, named by the cell `(x, y)` and the half.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Triangle {
    pub y: i64,
    pub x: i64,
    pub half: Half,
}

impl Triangle {
    pub fn lower(x: i64, y: i64) -> Self {
        Self { x, y, half: Half::Lower }
    }

    pub fn upper(x: i64, y: i64) -> Self {
        Self { x, y, half: Half::Upper }
    }

    pub fn vertices(&self) -> [Pt; 3] {
        let (x, y) = (self.x, self.y);
        match self.half {
            Half::Lower => [(x, y), (x + 1, y), (x, y + 1)],
            Half::Upper => [(x + 1, y), (x + 1, y + 1), (x, y + 1)],
        }
    }

    /// The three edge-adjacent triangles.
    pub fn neighbours(&self) -> [Triangle; 3] {
        let (x, y) = (self.x, self.y);
        match self.half {
            Half::Lower => [Triangle::upper(x, y), Triangle::upper(x - 1, y), Triangle::upper(x, y - 1)],
            Half::Upper => [Triangle::lower(x, y), Triangle::lower(x + 1, y), Triangle::lower(x, y + 1)],
        }
    }

    /// Twice the centroid, in integer coordinates.
    pub fn centroid3(&self) -> (i64, i64) {
        let v = self.vertices();
        (v[0].0 + v[1].0 + v[2].0, v[0].1 + v[1].1 + v[2].1)
    }
}

/// A unit lattice edge oriented along a positive direction
/// `(1, 0)`, `(0, -1)` or `(-1, 1)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Edge {
    pub from: Pt,
    pub to: Pt,
}

impl Edge {
    /// The two triangles sharing this edge: `(lower-half, upper-half)`.
    pub fn sides(&self) -> (Triangle, Triangle) {
        let (a, b) = (self.from, self.to);
        match (b.0 - a.0, b.1 - a.1) {
            (1, 0) => (Triangle::lower(a.0, a.1), Triangle::upper(a.0, a.1 - 1)),
            (0, -1) => (Triangle::lower(b.0, b.1), Triangle::upper(b.0 - 1, b.1)),
            (-1, 1) => (Triangle::lower(b.0, a.1), Triangle::upper(b.0, a.1)),
            d => panic!("edge step {d:?} is not a positive unit direction"),
        }
    }

    /// The three positively oriented edges of a triangle.
    pub fn of_triangle(t: &Triangle) -> [Edge; 3] {
        let (x, y) = (t.x, t.y);
        match t.half {
            Half::Lower => [
                Edge { from: (x, y), to: (x + 1, y) },
                Edge { from: (x + 1, y), to: (x, y + 1) },
                Edge { from: (x, y + 1), to: (x, y) },
            ],
            Half::Upper => [
                Edge { from: (x, y + 1), to: (x + 1, y + 1) },
                Edge { from: (x + 1, y + 1), to: (x + 1, y) },
                Edge { from: (x + 1, y), to: (x, y + 1) },
            ],
        }
    }
}

/// The three positive unit steps.
pub const POSITIVE_STEPS: [Pt; 3] = [(1, 0), (0, -1), (-1, 1)];

/// Which side of the anti-diagonal `x + y = n` a set of points lies on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Side {
    /// `x + y >= n`.
    Up,
    /// `x + y <= n`.
    Lo,
}

/// Excavation hexagon `ABCDEF` around an interior vertex `v` of
/// `{0..n}^2`. The equator `AD` lies on `x + y = n`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExcavationHexagon {
    pub n: i64,
    pub v: Pt,
    /// `A, B, C, D, E, F`.
    pub corners: [Pt; 6],
}

impl ExcavationHexagon {
    /// Corners for `v = (i, j)`; `v` must lie strictly inside the square.
    pub fn new(v: Pt, n: i64) -> Result<Self> {
        let (i, j) = v;
        if n < 2 || i <= 0 || j <= 0 || i >= n || j >= n {
            return Err(HiveError::Range(format!("vertex {v:?} is not interior to {{0..{n}}}^2")));
        }
        let corners = if i <= j {
            [(0, n), (0, j), (i, j - i), (n + i - j, j - i), (n + i - j, j), (i, n)]
        } else {
            [(i - j, n + j - i), (i - j, j), (i, 0), (n, 0), (n, j), (i, n + j - i)]
        };
        Ok(Self { n, v, corners })
    }

    pub fn a(&self) -> Pt {
        self.corners[0]
    }
    pub fn b(&self) -> Pt {
        self.corners[1]
    }
    pub fn c(&self) -> Pt {
        self.corners[2]
    }
    pub fn d(&self) -> Pt {
        self.corners[3]
    }
    pub fn e(&self) -> Pt {
        self.corners[4]
    }
    pub fn f(&self) -> Pt {
        self.corners[5]
    }

    /// Intersection of the diagonal `BE` with the equator.
    pub fn o(&self) -> Pt {
        (self.n - self.v.1, self.v.1)
    }

    /// Light-cone radius `n - |i - j|`.
    pub fn radius(&self) -> i64 {
        self.n - (self.v.0 - self.v.1).abs()
    }

    /// Closed-hexagon membership.
    pub fn contains(&self, p: Pt) -> bool {
        let (i, j) = self.v;
        (p.0 - i).abs() + (p.1 - j).abs() + (p.0 + p.1 - self.n).abs() <= self.radius()
    }

    pub fn contains_triangle(&self, t: &Triangle) -> bool {
        t.vertices().iter().all(|&p| self.contains(p))
    }

    /// Side of a triangle relative to the equator.
    pub fn side_of(&self, t: &Triangle) -> Side {
        let s = t.x + t.y;
        match t.half {
            Half::Lower if s + 1 <= self.n => Side::Lo,
            Half::Upper if s + 1 >= self.n => Side::Up,
            Half::Lower => Side::Up,
            Half::Upper => Side::Lo,
        }
    }

    /// Lattice points of the closed hexagon, sorted by `(y, x)`.
    pub fn points(&self) -> Vec<Pt> {
        let r = self.radius();
        let (i, j) = self.v;
        let mut out = Vec::new();
        for y in (j - r).max(0)..=(j + r).min(self.n) {
            for x in (i - r).max(0)..=(i + r).min(self.n) {
                if self.contains((x, y)) {
                    out.push((x, y));
                }
            }
        }
        out.sort_by_key(|&(x, y)| (y, x));
        out
    }

    /// Unit triangles of the hexagon, sorted.
    pub fn triangles(&self) -> Vec<Triangle> {
        let r = self.radius();
        let (i, j) = self.v;
        let mut out = Vec::new();
        for y in (j - r - 1).max(0)..=(j + r).min(self.n) {
            for x in (i - r - 1).max(0)..=(i + r).min(self.n) {
                for t in [Triangle::lower(x, y), Triangle::upper(x, y)] {
                    if self.contains_triangle(&t) {
                        out.push(t);
                    }
                }
            }
        }
        out.sort();
        out
    }

    /// Area in unit cells (two triangles per cell).
    pub fn area(&self) -> f64 {
        self.triangles().len() as f64 / 2.0
    }

    /// Indices `k` of the border edges `(k, n-k) - (k+1, n-k-1)` on the
    /// equator, west to east.
    pub fn border_edges(&self) -> std::ops::Range<i64> {
        self.a().0..self.d().0
    }

    /// Corners of the upper trapezoid `A, F, E, D`.
    pub fn upper_polygon(&self) -> [Pt; 4] {
        [self.a(), self.f(), self.e(), self.d()]
    }

    /// Corners of the lower trapezoid `A, B, C, D`.
    pub fn lower_polygon(&self) -> [Pt; 4] {
        [self.a(), self.b(), self.c(), self.d()]
    }

    /// Outer boundary heights of one trapezoid, walking `A -> F -> E -> D`
    /// (upper) or `A -> B -> C -> D` (lower): `+1` per unit step in a positive
    /// direction and `-1` against it, starting from `2j - i` (upper) or
    /// `2i - j` (lower) at `A` for `v = (i, j)`.
    pub fn boundary_heights(&self, side: Side) -> Vec<(Pt, i64)> {
        let (i, j) = self.v;
        let (poly, start) = match side {
            Side::Up => (self.upper_polygon(), 2 * j - i),
            Side::Lo => (self.lower_polygon(), 2 * i - j),
        };
        let mut out = vec![(poly[0], start)];
        let mut val = start;
        for w in poly.windows(2) {
            let (p, q) = (w[0], w[1]);
            let len = (q.0 - p.0).abs().max((q.1 - p.1).abs());
            if len == 0 {
                continue;
            }
            let step = ((q.0 - p.0) / len, (q.1 - p.1) / len);
            let sign = if POSITIVE_STEPS.contains(&step) { 1 } else { -1 };
            for t in 1..=len {
                val += sign;
                out.push(((p.0 + t * step.0, p.1 + t * step.1), val));
            }
        }
        out
    }

    /// Triangle region of the hexagon with the equator marked.
    pub fn region(&self) -> Region {
        Region::new(self.triangles(), Some(self.n))
    }
}

/// Finite set of unit triangles, optionally split by an equator `x + y = n`
/// that lozenges may not cross and along which border triangles may be left
/// unpaired.
#[derive(Debug, Clone)]
pub struct Region {
    /// Sorted triangles.
    pub tris: Vec<Triangle>,
    index: HashMap<Triangle, usize>,
    pub equator: Option<i64>,
}

impl Region {
    pub fn new(mut tris: Vec<Triangle>, equator: Option<i64>) -> Self {
        tris.sort();
        tris.dedup();
        let index = tris.iter().enumerate().map(|(k, t)| (*t, k)).collect();
        Self { tris, index, equator }
    }

    pub fn len(&self) -> usize {
        self.tris.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tris.is_empty()
    }

    pub fn index_of(&self, t: &Triangle) -> Option<usize> {
        self.index.get(t).copied()
    }

    pub fn contains(&self, t: &Triangle) -> bool {
        self.index.contains_key(t)
    }

    /// True if the two triangles share the equator edge.
    pub fn crosses_equator(&self, a: &Triangle, b: &Triangle) -> bool {
        match self.equator {
            Some(n) => a.x == b.x && a.y == b.y && a.half != b.half && a.x + a.y == n - 1,
            None => false,
        }
    }

    /// For a triangle touching the equator, the triangle on the other side.
    pub fn equator_partner(&self, t: &Triangle) -> Option<Triangle> {
        let n = self.equator?;
        if t.x + t.y != n - 1 {
            return None;
        }
        let other = match t.half {
            Half::Lower => Triangle::upper(t.x, t.y),
            Half::Upper => Triangle::lower(t.x, t.y),
        };
        Some(other)
    }

    /// Lattice points of the closed region.
    pub fn points(&self) -> Vec<Pt> {
        let set: HashSet<Pt> = self.tris.iter().flat_map(|t| t.vertices()).collect();
        let mut v: Vec<Pt> = set.into_iter().collect();
        v.sort_by_key(|&(x, y)| (y, x));
        v
    }

    /// Positive edges with the number of region triangles on each (1 or 2).
    pub fn edges(&self) -> Vec<(Edge, u8)> {
        let mut count: HashMap<Edge, u8> = HashMap::new();
        for t in &self.tris {
            for e in Edge::of_triangle(t) {
                *count.entry(e).or_insert(0) += 1;
            }
        }
        let mut v: Vec<(Edge, u8)> = count.into_iter().collect();
        v.sort();
        v
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn corners_for_t_prime_case() {
        let h = ExcavationHexagon::new((3, 2), 6).unwrap();
        assert_eq!(h.corners, [(1, 5), (1, 2), (3, 0), (6, 0), (6, 2), (3, 5)]);
        for c in h.corners {
            assert!(h.contains(c));
        }
    }

    #[test]
    fn edge_sides_share_the_edge() {
        for e in [
            Edge { from: (2, 3), to: (3, 3) },
            Edge { from: (2, 3), to: (2, 2) },
            Edge { from: (3, 2), to: (2, 3) },
        ] {
            let (a, b) = e.sides();
            for t in [a, b] {
                let v = t.vertices();
                assert!(v.contains(&e.from) && v.contains(&e.to), "{e:?} {t:?}");
            }
        }
    }
}
