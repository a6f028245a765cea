//! Tropical octahedron recurrence transforming a hive pair `(k, k')` into
//! `(h, h')`.
//!
//! The field `f(x, y, t)` lives on the solid
//! `|x + y - n| <= t <= n - |x - y|` over `{0..n}^2`. The bottom face carries
//! `k~`, the recurrence
//! `f(x,y,t+1) = max(f(x+1,y,t) + f(x-1,y,t), f(x,y+1,t) + f(x,y-1,t)) - f(x,y,t-1)`
//! fills the interior, and the top face `t = n - |x - y|` carries the output.

use serde::{Deserialize, Serialize};

use super::geometry::Pt;
use super::weights::WeightField;
use crate::error::Result;
use crate::hive::Hive;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OctahedronOutput {
    /// Top face over `T = {x <= y}`: `h(i, j) = f(i, j, n - (j - i))`.
    pub h: Hive,
    /// Top face over `T' = {x >= y}`: `h'(a, b) = f(n - b + a, a, b)`.
    pub h_prime: Hive,
    /// Top face on the whole square, `top[y * (n + 1) + x]`.
    pub top: Vec<f64>,
}

impl OctahedronOutput {
    pub fn n(&self) -> usize {
        self.h.n
    }

    /// Output value at a square point.
    pub fn at(&self, p: Pt) -> f64 {
        let n = self.h.n as i64;
        self.top[(p.1 * (n + 1) + p.0) as usize]
    }
}

/// Run the recurrence on a glued field.
pub fn octahedron_field(w: &WeightField) -> OctahedronOutput {
    let n = w.n;
    let side = (n + 1) as usize;
    let idx = |x: i64, y: i64| y as usize * side + x as usize;
    // two rolling layers per parity: prev = f(., ., t-1), cur = f(., ., t)
    let base = |x: i64, y: i64| (x + y - n).abs();
    let mut top = vec![f64::NAN; side * side];
    let mut older = vec![f64::NAN; side * side];
    let mut prev = vec![f64::NAN; side * side];
    for y in 0..=n {
        for x in 0..=n {
            if base(x, y) == 0 {
                prev[idx(x, y)] = w.k((x, y));
            }
            if n - (x - y).abs() == 0 {
                top[idx(x, y)] = w.k((x, y));
            }
        }
    }
    for t in 1..=n {
        let mut cur = vec![f64::NAN; side * side];
        for y in 0..=n {
            for x in 0..=n {
                let b = base(x, y);
                if t < b || t > n - (x - y).abs() || (t - b) % 2 != 0 {
                    continue;
                }
                let v = if t == b {
                    w.k((x, y))
                } else {
                    let h = prev[idx(x + 1, y)] + prev[idx(x - 1, y)];
                    let v = prev[idx(x, y + 1)] + prev[idx(x, y - 1)];
                    h.max(v) - older[idx(x, y)]
                };
                cur[idx(x, y)] = v;
                if t == n - (x - y).abs() {
                    top[idx(x, y)] = v;
                }
            }
        }
        older = prev;
        prev = cur;
    }
    let nu = n as usize;
    let h = Hive::from_fn(nu, |i, j| top[j * side + i]);
    let h_prime = Hive::from_fn(nu, |a, b| top[a * side + (nu - b + a)]);
    OctahedronOutput { h, h_prime, top }
}

/// Run the recurrence on a hive pair; fails when the hives disagree on their
/// shared edge.
pub fn octahedron_recurrence(k: &Hive, k_prime: &Hive) -> Result<OctahedronOutput> {
    Ok(octahedron_field(&WeightField::from_hives(k, k_prime)?))
}
