//! Excavation hexagons, lozenge tilings and augmented-hive values.

pub mod enumerate;
pub mod geometry;
pub mod octahedron;
pub mod render;
pub mod solver;
pub mod tiling;
pub mod weights;

use serde::{Deserialize, Serialize};

pub use enumerate::{count_tilings, enumerate_tilings, first_tiling, for_each_tiling, max_by_enumeration};
pub use geometry::{Edge, ExcavationHexagon, Half, Pt, Region, Side, Triangle};
pub use octahedron::{octahedron_field, octahedron_recurrence, OctahedronOutput};
pub use solver::{hive_value, lambda_offset, max_weight_heights, max_weight_tiling, Band, DiffProblem};
pub use tiling::{standard_tiling, tiling_weight, validate_tiling, WeightForm};
pub use weights::WeightField;

/// The three lozenge shapes, named after their vertex templates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Kind {
    /// `(i,j), (i+1,j-1), (i+2,j-1), (i+1,j)`.
    I,
    /// `(i,j), (i,j+1), (i-1,j+2), (i-1,j+1)`.
    II,
    /// `(i,j), (i+1,j), (i+1,j+1), (i,j+1)`.
    III,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Color {
    Blue,
    Red,
    Green,
}

/// A lozenge `ABCD`; `anchor` is the vertex `A`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Lozenge {
    pub kind: Kind,
    pub anchor: Pt,
}

impl Lozenge {
    pub fn new(kind: Kind, anchor: Pt) -> Self {
        Self { kind, anchor }
    }

    /// Vertices `A, B, C, D`; `A, C` are the ends of the long diagonal.
    pub fn vertices(&self) -> [Pt; 4] {
        let (i, j) = self.anchor;
        match self.kind {
            Kind::I => [(i, j), (i + 1, j - 1), (i + 2, j - 1), (i + 1, j)],
            Kind::II => [(i, j), (i, j + 1), (i - 1, j + 2), (i - 1, j + 1)],
            Kind::III => [(i, j), (i + 1, j), (i + 1, j + 1), (i, j + 1)],
        }
    }

    /// The two unit triangles, `(lower half, upper half)`.
    pub fn triangles(&self) -> (Triangle, Triangle) {
        let (x, y) = self.anchor;
        match self.kind {
            Kind::I => (Triangle::lower(x + 1, y - 1), Triangle::upper(x, y - 1)),
            Kind::II => (Triangle::lower(x - 1, y + 1), Triangle::upper(x - 1, y)),
            Kind::III => (Triangle::lower(x, y), Triangle::upper(x, y)),
        }
    }

    /// Lozenge made of two edge-adjacent triangles, if they form one.
    pub fn from_triangles(a: Triangle, b: Triangle) -> Option<Self> {
        let (lo, up) = match (a.half, b.half) {
            (Half::Lower, Half::Upper) => (a, b),
            (Half::Upper, Half::Lower) => (b, a),
            _ => return None,
        };
        let (x, y) = (lo.x, lo.y);
        if (up.x, up.y) == (x, y) {
            Some(Lozenge::new(Kind::III, (x, y)))
        } else if (up.x, up.y) == (x - 1, y) {
            Some(Lozenge::new(Kind::I, (x - 1, y + 1)))
        } else if (up.x, up.y) == (x, y - 1) {
            Some(Lozenge::new(Kind::II, (x + 1, y - 1)))
        } else {
            None
        }
    }

    /// The shared (short-diagonal) edge, positively oriented.
    pub fn diagonal(&self) -> Edge {
        let [_, b, _, d] = self.vertices();
        match self.kind {
            Kind::I | Kind::II => Edge { from: d, to: b },
            Kind::III => Edge { from: b, to: d },
        }
    }

    /// Side of the anti-diagonal `x + y = n`, or `None` if the lozenge
    /// crosses it.
    pub fn side(&self, n: i64) -> Option<Side> {
        let sums = self.vertices().map(|(x, y)| x + y);
        if sums.iter().all(|&s| s >= n) {
            Some(Side::Up)
        } else if sums.iter().all(|&s| s <= n) {
            Some(Side::Lo)
        } else {
            None
        }
    }

    /// Colour given the side: type I is blue above and red below the
    /// equator, type II the reverse, type III always green.
    pub fn color(&self, side: Side) -> Color {
        match (self.kind, side) {
            (Kind::III, _) => Color::Green,
            (Kind::I, Side::Up) | (Kind::II, Side::Lo) => Color::Blue,
            _ => Color::Red,
        }
    }
}

/// Border triangle on the equator edge `(k, n-k) - (k+1, n-k-1)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct BorderTriangle {
    pub k: i64,
    /// Upward triangles lie on the `x + y >= n` side.
    pub upward: bool,
}

impl BorderTriangle {
    pub fn triangle(&self, n: i64) -> Triangle {
        let (x, y) = (self.k, n - self.k - 1);
        if self.upward {
            Triangle::upper(x, y)
        } else {
            Triangle::lower(x, y)
        }
    }

    /// Vertices `A, B, C` as in the weight formula `(k~(B) - k~(A)) / 3`.
    pub fn vertices(&self, n: i64) -> [Pt; 3] {
        let (i, m) = (self.k, n - self.k);
        if self.upward {
            [(i, m), (i + 1, m), (i + 1, m - 1)]
        } else {
            [(i, m), (i, m - 1), (i + 1, m - 1)]
        }
    }
}

/// A lozenge tiling: lozenges plus border triangles.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Tiling {
    pub lozenges: Vec<Lozenge>,
    pub border: Vec<BorderTriangle>,
}

impl Tiling {
    /// Sort pieces so equal tilings compare equal.
    pub fn canonical(mut self) -> Self {
        self.lozenges.sort();
        self.border.sort();
        self
    }

    /// Number of lozenges of each colour `(blue, red, green)` for side
    /// threshold `n`.
    pub fn color_counts(&self, n: i64) -> (usize, usize, usize) {
        let mut c = (0, 0, 0);
        for l in &self.lozenges {
            match l.side(n).map(|s| l.color(s)) {
                Some(Color::Blue) => c.0 += 1,
                Some(Color::Red) => c.1 += 1,
                Some(Color::Green) => c.2 += 1,
                None => {}
            }
        }
        c
    }
}
