//! Brute-force enumeration of tilings, used as an oracle for the solvers.

use super::geometry::{ExcavationHexagon, Half, Region};
use super::weights::WeightField;
use super::{BorderTriangle, Lozenge, Tiling};
use crate::error::{HiveError, Result};

/// Largest hexagon area, in unit cells, accepted by [`enumerate_tilings`].
pub const MAX_ENUMERATION_AREA: f64 = 40.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Piece {
    Lozenge(Lozenge),
    Border(BorderTriangle),
}

/// How a triangle at the head of the search can be covered.
#[derive(Debug, Clone, Copy)]
struct Choice {
    piece: usize,
    other: Option<usize>,
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum State {
    Open,
    Paired,
    Single,
}

/// Depth-first tiling search over a region, visiting tilings in a fixed
/// order. Triangles are taken in sorted order, so the first open triangle
/// can only be paired with triangles later in the order.
struct Search<'a> {
    region: &'a Region,
    pieces: Vec<Piece>,
    choices: Vec<Vec<Choice>>,
    partner: Vec<Option<usize>>,
    state: Vec<State>,
    stack: Vec<usize>,
}

impl<'a> Search<'a> {
    fn new(region: &'a Region) -> Self {
        let mut pieces = Vec::new();
        let mut choices = vec![Vec::new(); region.len()];
        let mut partner = vec![None; region.len()];
        for (k, t) in region.tris.iter().enumerate() {
            for nb in t.neighbours() {
                let Some(o) = region.index_of(&nb) else { continue };
                if o < k || region.crosses_equator(t, &nb) {
                    continue;
                }
                let l = Lozenge::from_triangles(*t, nb).expect("neighbours form a lozenge");
                pieces.push(Piece::Lozenge(l));
                choices[k].push(Choice { piece: pieces.len() - 1, other: Some(o) });
            }
            if let Some(p) = region.equator_partner(t) {
                partner[k] = region.index_of(&p);
                // a border triangle is always allowed, even if the opposite
                // triangle lies outside the region
                pieces.push(Piece::Border(BorderTriangle { k: t.x, upward: t.half == Half::Upper }));
                choices[k].push(Choice { piece: pieces.len() - 1, other: None });
            }
        }
        let n = region.len();
        Self { region, pieces, choices, partner, state: vec![State::Open; n], stack: Vec::new() }
    }

    fn compatible(&self, t: usize, s: State) -> bool {
        match self.partner[t] {
            Some(p) => self.state[p] == State::Open || self.state[p] != s,
            None => true,
        }
    }

    fn run(&mut self, weights: &[f64], visit: &mut dyn FnMut(&[Piece], &[usize], f64)) {
        self.dfs(0, 0.0, weights, visit, None);
    }

    fn run_until(
        &mut self,
        weights: &[f64],
        visit: &mut dyn FnMut(&[Piece], &[usize], f64),
        stop: &std::cell::Cell<bool>,
    ) {
        self.dfs(0, 0.0, weights, visit, Some(stop));
    }

    fn dfs(
        &mut self,
        from: usize,
        acc: f64,
        weights: &[f64],
        visit: &mut dyn FnMut(&[Piece], &[usize], f64),
        stop: Option<&std::cell::Cell<bool>>,
    ) {
        if stop.is_some_and(|s| s.get()) {
            return;
        }
        let Some(t) = (from..self.region.len()).find(|&k| self.state[k] == State::Open) else {
            visit(&self.pieces, &self.stack, acc);
            return;
        };
        for c in 0..self.choices[t].len() {
            let Choice { piece, other } = self.choices[t][c];
            match other {
                Some(o) => {
                    if self.state[o] != State::Open
                        || !self.compatible(t, State::Paired)
                        || !self.compatible(o, State::Paired)
                    {
                        continue;
                    }
                    self.state[t] = State::Paired;
                    self.state[o] = State::Paired;
                    self.stack.push(piece);
                    self.dfs(t + 1, acc + weights[piece], weights, visit, stop);
                    self.stack.pop();
                    self.state[t] = State::Open;
                    self.state[o] = State::Open;
                }
                None => {
                    if !self.compatible(t, State::Single) {
                        continue;
                    }
                    self.state[t] = State::Single;
                    self.stack.push(piece);
                    self.dfs(t + 1, acc + weights[piece], weights, visit, stop);
                    self.stack.pop();
                    self.state[t] = State::Open;
                }
            }
        }
    }
}

fn tiling_of(pieces: &[Piece], chosen: &[usize]) -> Tiling {
    let mut t = Tiling::default();
    for &p in chosen {
        match pieces[p] {
            Piece::Lozenge(l) => t.lozenges.push(l),
            Piece::Border(b) => t.border.push(b),
        }
    }
    t.canonical()
}

/// Call `f` on every tiling of `region`. For regions with an equator every
/// equator edge inside the region gets exactly one border triangle.
pub fn for_each_tiling(region: &Region, mut f: impl FnMut(Tiling)) {
    let mut s = Search::new(region);
    let zeros = vec![0.0; s.pieces.len()];
    let full_edges = equator_edges_with_both_sides(region);
    s.run(&zeros, &mut |pieces, chosen, _| {
        let t = tiling_of(pieces, chosen);
        if border_complete(&t, &full_edges) {
            f(t)
        }
    });
}

/// Some tiling of `region`, found by the same search with an early exit.
pub fn first_tiling(region: &Region) -> Option<Tiling> {
    let mut s = Search::new(region);
    let zeros = vec![0.0; s.pieces.len()];
    let full_edges = equator_edges_with_both_sides(region);
    let mut found: Option<Vec<usize>> = None;
    let stop = std::cell::Cell::new(false);
    {
        let mut visit = |pieces: &[Piece], chosen: &[usize], _: f64| {
            if found.is_none() && border_complete(&tiling_of(pieces, chosen), &full_edges) {
                found = Some(chosen.to_vec());
                stop.set(true);
            }
        };
        s.run_until(&zeros, &mut visit, &stop);
    }
    found.map(|c| tiling_of(&s.pieces, &c))
}

/// Number of tilings of a region.
pub fn count_tilings(region: &Region) -> u64 {
    let mut c = 0;
    for_each_tiling(region, |_| c += 1);
    c
}

fn equator_edges_with_both_sides(region: &Region) -> Vec<i64> {
    let mut ks: Vec<i64> = region
        .tris
        .iter()
        .filter(|t| t.half == Half::Lower)
        .filter_map(|t| region.equator_partner(t).filter(|p| region.contains(p)).map(|_| t.x))
        .collect();
    ks.sort();
    ks
}

fn border_complete(t: &Tiling, edges: &[i64]) -> bool {
    edges.iter().all(|k| t.border.iter().filter(|b| b.k == *k).count() == 1)
}

/// All tilings of an excavation hexagon of area at most
/// [`MAX_ENUMERATION_AREA`] cells.
pub fn enumerate_tilings(h: &ExcavationHexagon) -> Result<Vec<Tiling>> {
    let area = h.area();
    if area > MAX_ENUMERATION_AREA {
        return Err(HiveError::Capacity(format!(
            "hexagon area {area} exceeds the enumeration limit {MAX_ENUMERATION_AREA}"
        )));
    }
    let mut out = Vec::new();
    for_each_tiling(&h.region(), |t| out.push(t));
    Ok(out)
}

/// Maximum of the primal tiling weight over all tilings, by exhaustive
/// search; returns the value and one maximizing tiling.
pub fn max_by_enumeration(h: &ExcavationHexagon, w: &WeightField) -> Result<(f64, Tiling)> {
    let area = h.area();
    if area > MAX_ENUMERATION_AREA {
        return Err(HiveError::Capacity(format!(
            "hexagon area {area} exceeds the enumeration limit {MAX_ENUMERATION_AREA}"
        )));
    }
    let region = h.region();
    let mut s = Search::new(&region);
    let weights: Vec<f64> = s
        .pieces
        .iter()
        .map(|p| match p {
            Piece::Lozenge(l) => w.lozenge_weight(l),
            Piece::Border(b) => w.triangle_weight(b),
        })
        .collect::<Result<_>>()?;
    let mut best = f64::NEG_INFINITY;
    let mut arg: Vec<usize> = Vec::new();
    // every edge of the hexagon equator has both triangles inside, so the
    // pairing rules already force one border triangle per edge
    s.run(&weights, &mut |_, chosen, acc| {
        if acc > best {
            best = acc;
            arg.clear();
            arg.extend_from_slice(chosen);
        }
    });
    if arg.is_empty() && best == f64::NEG_INFINITY {
        return Err(HiveError::Infeasible("hexagon has no tiling".into()));
    }
    let t = tiling_of(&s.pieces, &arg);
    Ok((best + w.hex_weight(h), t))
}
