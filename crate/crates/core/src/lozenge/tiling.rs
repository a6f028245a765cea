//! Tiling validation, the standard tiling and tiling weights.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::geometry::{ExcavationHexagon, Half, Side, Triangle};
use super::weights::WeightField;
use super::{BorderTriangle, Color, Kind, Lozenge, Tiling};
use crate::error::{HiveError, Result};

/// Which of the two equivalent weight expressions to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum WeightForm {
    /// Sum of lozenge weights, triangle weights and the hexagon weight.
    Primal,
    /// Twice the blue weights plus the green weights, the triangle weights and
    /// the modified hexagon weight; red lozenges do not appear.
    RedAvoiding,
}

/// Check that `t` partitions the hexagon, with exactly one border triangle
/// per equator edge.
pub fn validate_tiling(h: &ExcavationHexagon, t: &Tiling) -> Result<()> {
    let tris = h.triangles();
    let mut cover: HashMap<Triangle, u32> = tris.iter().map(|t| (*t, 0)).collect();
    let mut bump = |tri: Triangle, what: &str| -> Result<()> {
        match cover.get_mut(&tri) {
            Some(c) => {
                *c += 1;
                Ok(())
            }
            None => Err(HiveError::Validation(format!("{what} leaves the hexagon at {tri:?}"))),
        }
    };
    for l in &t.lozenges {
        if l.side(h.n).is_none() {
            return Err(HiveError::Validation(format!("lozenge {l:?} crosses the equator")));
        }
        let (a, b) = l.triangles();
        bump(a, "lozenge")?;
        bump(b, "lozenge")?;
    }
    let mut per_edge: HashMap<i64, u32> = HashMap::new();
    for b in &t.border {
        if !h.border_edges().contains(&b.k) {
            return Err(HiveError::Validation(format!("border triangle {b:?} is off the equator")));
        }
        bump(b.triangle(h.n), "border triangle")?;
        *per_edge.entry(b.k).or_insert(0) += 1;
    }
    if let Some((tri, c)) = cover.iter().find(|(_, &c)| c != 1) {
        return Err(HiveError::Validation(format!("triangle {tri:?} covered {c} times")));
    }
    for k in h.border_edges() {
        let c = per_edge.get(&k).copied().unwrap_or(0);
        if c != 1 {
            return Err(HiveError::Validation(format!("border edge {k} has {c} border triangles")));
        }
    }
    Ok(())
}

/// The standard tiling: above the line `BE` the upper side carries type I
/// lozenges and the lower side squares with downward border triangles; below
/// `BE` the upper side carries squares with upward border triangles and the
/// lower side type I lozenges.
pub fn standard_tiling(h: &ExcavationHexagon) -> Tiling {
    let tris = h.triangles();
    let present: std::collections::HashSet<Triangle> = tris.iter().copied().collect();
    let j = h.v.1;
    let slanted = |t: &Triangle| {
        let above = t.y >= j;
        matches!((above, h.side_of(t)), (true, Side::Up) | (false, Side::Lo))
    };
    let mut out = Tiling::default();
    for t in &tris {
        match t.half {
            Half::Upper if slanted(t) => out.lozenges.push(Lozenge::new(Kind::I, (t.x, t.y + 1))),
            Half::Lower if !slanted(t) => {
                let partner = Triangle::upper(t.x, t.y);
                if present.contains(&partner) && h.side_of(&partner) == h.side_of(t) {
                    out.lozenges.push(Lozenge::new(Kind::III, (t.x, t.y)));
                } else {
                    out.border.push(BorderTriangle { k: t.x, upward: false });
                }
            }
            Half::Upper => {
                let partner = Triangle::lower(t.x, t.y);
                if !(present.contains(&partner) && h.side_of(&partner) == h.side_of(t)) {
                    out.border.push(BorderTriangle { k: t.x, upward: true });
                }
            }
            Half::Lower => {}
        }
    }
    out.canonical()
}

/// Weight of a tiling in either form; the tiling is validated first.
pub fn tiling_weight(t: &Tiling, h: &ExcavationHexagon, w: &WeightField, form: WeightForm) -> Result<f64> {
    validate_tiling(h, t)?;
    if w.n != h.n {
        return Err(HiveError::Parameter(format!("field size {} differs from hexagon size {}", w.n, h.n)));
    }
    let tri: f64 = t.border.iter().map(|b| w.triangle_weight(b)).sum::<Result<f64>>()?;
    let mut total = tri;
    match form {
        WeightForm::Primal => {
            for l in &t.lozenges {
                total += w.lozenge_weight(l)?;
            }
            total += w.hex_weight(h);
        }
        WeightForm::RedAvoiding => {
            for l in &t.lozenges {
                let side = l.side(h.n).expect("validated");
                match l.color(side) {
                    Color::Blue => total += 2.0 * w.lozenge_weight(l)?,
                    Color::Green => total += w.lozenge_weight(l)?,
                    Color::Red => {}
                }
            }
            total += w.hex_weight_alt(h);
        }
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn standard_tiling_is_valid() {
        for n in 2..7 {
            for i in 1..n {
                for j in 1..n {
                    let h = ExcavationHexagon::new((i, j), n).unwrap();
                    validate_tiling(&h, &standard_tiling(&h)).unwrap_or_else(|e| panic!("n={n} v=({i},{j}): {e}"));
                }
            }
        }
    }

    fn field(n: i64) -> WeightField {
        WeightField::from_fn(n, |x, y| ((x * 13 + y * 7 + x * y) % 11) as f64 - 0.3 * x as f64)
    }

    #[test]
    fn standard_tiling_weight_is_two_point_difference() {
        for n in 2..7 {
            let w = field(n);
            for i in 1..n {
                for j in 1..n {
                    let h = ExcavationHexagon::new((i, j), n).unwrap();
                    let value = tiling_weight(&standard_tiling(&h), &h, &w, WeightForm::Primal).unwrap();
                    let expect = w.k(h.e()) + w.k(h.b()) - w.k(h.o());
                    assert!((value - expect).abs() < 1e-9, "n={n} v=({i},{j}): {value} vs {expect}");
                }
            }
        }
    }

    #[test]
    fn weight_forms_agree_on_all_tilings() {
        for n in 2..=4 {
            let w = field(n);
            for i in 1..n {
                for j in 1..n {
                    let h = ExcavationHexagon::new((i, j), n).unwrap();
                    for t in crate::lozenge::enumerate_tilings(&h).unwrap() {
                        let a = tiling_weight(&t, &h, &w, WeightForm::Primal).unwrap();
                        let b = tiling_weight(&t, &h, &w, WeightForm::RedAvoiding).unwrap();
                        assert!((a - b).abs() < 1e-9);
                    }
                }
            }
        }
    }
}
