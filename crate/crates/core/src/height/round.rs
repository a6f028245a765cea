//! Rounding asymptotic height functions to discrete ones.
//!
//! Each target value is snapped down to the nearest integer in its
//! congruence class mod 3 and the snapped values are replaced by their
//! largest common Lipschitz minorant. On a hexagon the result is then joined
//! with the standard height pair, which restores the boundary values. Both
//! steps move values down by less than three and never above the target.

use std::collections::HashMap;

use super::domain::LatticeDomain;
use super::{check_asymptotic, triangle_partials, AsymptoticPair, Field, HeightField, HeightPair, TiltVector};
use crate::error::{HiveError, Result};
use crate::lozenge::geometry::{ExcavationHexagon, Pt, Side};
use crate::lozenge::solver::HexGraph;
use crate::lozenge::standard_tiling;

/// Largest integer `s <= x` with `s = r (mod 3)`.
pub fn snap_down(x: f64, r: i64) -> i64 {
    let fl = (x + 1e-9).floor() as i64;
    fl - (fl - r).rem_euclid(3)
}

/// Height pair of the standard tiling.
pub fn standard_heights(h: &ExcavationHexagon) -> HeightPair {
    HeightPair::from_tiling(h, &standard_tiling(h)).expect("the standard tiling is valid")
}

/// The pair that is linear along every line `x + y = c` of each trapezoid,
/// interpolating the outer boundary values at the two ends.
pub fn dagger(h: &ExcavationHexagon) -> AsymptoticPair {
    let n = h.n;
    let pts = h.points();
    let side_field = |side: Side| {
        let bd: HashMap<Pt, i64> = h.boundary_heights(side).into_iter().collect();
        let mine: Vec<Pt> = pts
            .iter()
            .copied()
            .filter(|p| if side == Side::Up { p.0 + p.1 >= n } else { p.0 + p.1 <= n })
            .collect();
        let mut ends: HashMap<i64, (Pt, Pt)> = HashMap::new();
        for &p in &mine {
            let e = ends.entry(p.0 + p.1).or_insert((p, p));
            if p.0 < e.0 .0 {
                e.0 = p;
            }
            if p.0 > e.1 .0 {
                e.1 = p;
            }
        }
        let values = mine
            .iter()
            .map(|&p| {
                let (a, b) = ends[&(p.0 + p.1)];
                let (fa, fb) = (bd[&a] as f64, bd[&b] as f64);
                let v = if a == b { fa } else { fa + (fb - fa) * (p.0 - a.0) as f64 / (b.0 - a.0) as f64 };
                (p, v)
            })
            .collect();
        Field::from_pairs(values)
    };
    AsymptoticPair { n, v: h.v, up: side_field(Side::Up), lo: side_field(Side::Lo) }
}

/// Discrete height pair within distance three of an asymptotic pair, with
/// the same boundary values.
pub fn round_asymptotic(f: &AsymptoticPair) -> Result<HeightPair> {
    check_asymptotic(f, 1e-9)?;
    let h = f.hexagon()?;
    let graph = HexGraph::new(&h);
    let target: Vec<f64> = graph
        .points
        .iter()
        .map(|&p| {
            if p.0 + p.1 >= h.n {
                f.up.get(p).expect("checked")
            } else {
                (p.0 + graph.c0) as f64 - f.lo.get(p).expect("checked")
            }
        })
        .collect();
    let snapped: Vec<(usize, i64)> =
        target.iter().enumerate().map(|(k, &t)| (k, snap_down(t, graph.residue[k]))).collect();
    let lower = graph.min_plus(&snapped, false);
    let neg: Vec<(usize, i64)> = graph.boundary.iter().map(|&(k, g)| (k, -g)).collect();
    let floor = graph.min_plus(&neg, true);
    let g: Vec<i64> = lower.iter().zip(&floor).map(|(&a, &b)| a.max(-b)).collect();
    let (up, lo) = graph.split(h.n, &g);
    Ok(HeightPair { n: h.n, v: h.v, up: Field::from_pairs(up), lo: Field::from_pairs(lo) })
}

/// Height function on a domain, without boundary conditions, within
/// distance three below a real function whose gradients lie in `K`.
pub fn round_free(d: &LatticeDomain, f: impl Fn(Pt) -> f64) -> Result<HeightField> {
    for t in d.triangles() {
        let (p, q) = triangle_partials(&f, t);
        if !TiltVector::from_partials(p, q).in_k(1e-9) {
            return Err(HiveError::Validation(format!("gradient ({p}, {q}) on {t:?} lies outside K")));
        }
    }
    let init: Vec<(usize, i64)> =
        d.points().iter().enumerate().map(|(k, &p)| (k, snap_down(f(p), p.0 - p.1))).collect();
    let g = d.min_plus(&init);
    Ok(Field::from_pairs(d.points().iter().copied().zip(g).collect()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn snapping() {
        assert_eq!(snap_down(4.5, 1), 4);
        assert_eq!(snap_down(4.5, 0), 3);
        assert_eq!(snap_down(-0.5, 0), -3);
        assert_eq!(snap_down(3.0, 0), 3);
    }

    #[test]
    fn standard_heights_round_to_themselves() {
        let h = ExcavationHexagon::new((2, 3), 5).unwrap();
        let s = standard_heights(&h);
        let r = round_asymptotic(&s.map(|_, _, v| v as f64)).unwrap();
        assert_eq!(r, s);
    }

    #[test]
    fn dagger_is_an_asymptotic_pair() {
        let h = ExcavationHexagon::new((3, 5), 9).unwrap();
        check_asymptotic(&dagger(&h), 1e-9).unwrap();
    }
}
