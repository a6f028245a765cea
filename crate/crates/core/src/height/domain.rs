//! Lattice domains, the asymmetric distance `d_R`, Thurston's tileability
//! test and maximal extensions of boundary data.

use std::cmp::Reverse;
use std::collections::{BinaryHeap, HashMap, HashSet, VecDeque};
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use super::{HeightField, TiltVector};
use crate::error::{HiveError, Result};
use crate::lozenge::geometry::{Edge, Pt, Triangle, POSITIVE_STEPS};
use crate::lozenge::Lozenge;

/// A finite union of closed unit triangles.
///
/// Distance rows are computed on first use and cached for the life of the
/// domain.
#[derive(Debug)]
pub struct LatticeDomain {
    tris: Vec<Triangle>,
    points: Vec<Pt>,
    index: HashMap<Pt, usize>,
    /// Outgoing positive steps of each point along domain edges.
    out: Vec<Vec<usize>>,
    edges: Vec<(Edge, u8)>,
    rows: Vec<OnceLock<Vec<u32>>>,
}

impl Clone for LatticeDomain {
    fn clone(&self) -> Self {
        Self::from_triangles(self.tris.clone()).expect("cloned domain is valid")
    }
}

/// Serialized form: the triangles and the closed boundary paths.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DomainDoc {
    pub triangles: Vec<Triangle>,
    pub boundary: Vec<Vec<Pt>>,
}

/// Marker for an unreachable pair.
pub const UNREACHABLE: u32 = u32::MAX;

impl LatticeDomain {
    pub fn from_triangles(mut tris: Vec<Triangle>) -> Result<Self> {
        tris.sort();
        tris.dedup();
        if tris.is_empty() {
            return Err(HiveError::Geometry("empty domain".into()));
        }
        let set: HashSet<Pt> = tris.iter().flat_map(|t| t.vertices()).collect();
        let mut points: Vec<Pt> = set.into_iter().collect();
        points.sort_by_key(|&(x, y)| (y, x));
        let index: HashMap<Pt, usize> = points.iter().enumerate().map(|(k, p)| (*p, k)).collect();
        let mut count: HashMap<Edge, u8> = HashMap::new();
        for t in &tris {
            for e in Edge::of_triangle(t) {
                *count.entry(e).or_insert(0) += 1;
            }
        }
        let mut edges: Vec<(Edge, u8)> = count.into_iter().collect();
        edges.sort();
        let mut out = vec![Vec::new(); points.len()];
        for (e, _) in &edges {
            out[index[&e.from]].push(index[&e.to]);
        }
        let rows = (0..points.len()).map(|_| OnceLock::new()).collect();
        Ok(Self { tris, points, index, out, edges, rows })
    }

    /// Domain bounded by closed lattice paths. Every segment must be parallel
    /// to a positive direction; the first path is the outer boundary and the
    /// rest are holes. A triangle belongs to the domain when its centre lies
    /// inside the outer path and outside every hole.
    pub fn from_boundary(outer: &[Pt], holes: &[Vec<Pt>]) -> Result<Self> {
        let mut all = vec![outer.to_vec()];
        all.extend(holes.iter().cloned());
        for path in &all {
            check_path(path)?;
        }
        let (mut x0, mut x1, mut y0, mut y1) = (i64::MAX, i64::MIN, i64::MAX, i64::MIN);
        for &(x, y) in outer {
            x0 = x0.min(x);
            x1 = x1.max(x);
            y0 = y0.min(y);
            y1 = y1.max(y);
        }
        let mut tris = Vec::new();
        for y in y0 - 1..=y1 {
            for x in x0 - 1..=x1 {
                for t in [Triangle::lower(x, y), Triangle::upper(x, y)] {
                    let (cx, cy) = t.centroid3();
                    let c = (cx as f64 / 3.0, cy as f64 / 3.0);
                    if winding(outer, c) != 0 && holes.iter().all(|h| winding(h, c) == 0) {
                        tris.push(t);
                    }
                }
            }
        }
        Self::from_triangles(tris)
    }

    pub fn triangles(&self) -> &[Triangle] {
        &self.tris
    }

    /// Lattice points, sorted by `(y, x)`.
    pub fn points(&self) -> &[Pt] {
        &self.points
    }

    pub fn index_of(&self, p: Pt) -> Option<usize> {
        self.index.get(&p).copied()
    }

    pub fn contains_point(&self, p: Pt) -> bool {
        self.index.contains_key(&p)
    }

    /// Area in unit cells.
    pub fn area(&self) -> f64 {
        self.tris.len() as f64 / 2.0
    }

    /// Positive edges with the number of domain triangles on each.
    pub fn edges(&self) -> &[(Edge, u8)] {
        &self.edges
    }

    pub fn boundary_edges(&self) -> Vec<Edge> {
        self.edges.iter().filter(|(_, c)| *c == 1).map(|(e, _)| *e).collect()
    }

    /// Lattice points on the boundary, sorted.
    pub fn boundary_points(&self) -> Vec<Pt> {
        let set: HashSet<Pt> = self.boundary_edges().iter().flat_map(|e| [e.from, e.to]).collect();
        let mut v: Vec<Pt> = set.into_iter().collect();
        v.sort_by_key(|&(x, y)| (y, x));
        v
    }

    /// Connected, Euler characteristic one and no pinch points.
    pub fn is_simply_connected(&self) -> bool {
        let tri_index: HashMap<Triangle, usize> = self.tris.iter().enumerate().map(|(k, t)| (*t, k)).collect();
        let mut seen = vec![false; self.tris.len()];
        let mut queue = VecDeque::from([0usize]);
        seen[0] = true;
        while let Some(a) = queue.pop_front() {
            for nb in self.tris[a].neighbours() {
                if let Some(&b) = tri_index.get(&nb) {
                    if !seen[b] {
                        seen[b] = true;
                        queue.push_back(b);
                    }
                }
            }
        }
        if seen.iter().any(|s| !s) {
            return false;
        }
        let chi = self.points.len() as i64 - self.edges.len() as i64 + self.tris.len() as i64;
        if chi != 1 {
            return false;
        }
        // the triangles around each vertex must form one fan
        let mut around: HashMap<Pt, Vec<usize>> = HashMap::new();
        for (k, t) in self.tris.iter().enumerate() {
            for p in t.vertices() {
                around.entry(p).or_default().push(k);
            }
        }
        around.values().all(|fan| {
            let set: HashSet<usize> = fan.iter().copied().collect();
            let mut seen: HashSet<usize> = HashSet::from([fan[0]]);
            let mut stack = vec![fan[0]];
            while let Some(a) = stack.pop() {
                for nb in self.tris[a].neighbours() {
                    if let Some(&b) = tri_index.get(&nb) {
                        if set.contains(&b) && seen.insert(b) {
                            stack.push(b);
                        }
                    }
                }
            }
            seen.len() == set.len()
        })
    }

    fn row(&self, from: usize) -> &[u32] {
        self.rows[from].get_or_init(|| {
            let mut dist = vec![UNREACHABLE; self.points.len()];
            dist[from] = 0;
            let mut queue = VecDeque::from([from]);
            while let Some(a) = queue.pop_front() {
                for &b in &self.out[a] {
                    if dist[b] == UNREACHABLE {
                        dist[b] = dist[a] + 1;
                        queue.push_back(b);
                    }
                }
            }
            dist
        })
    }

    /// Length of the shortest positively oriented path from `u` to `v` along
    /// domain edges; `None` when no such path exists.
    pub fn d_r(&self, u: Pt, v: Pt) -> Result<Option<u32>> {
        let a = self.index_of(u).ok_or_else(|| HiveError::Range(format!("point {u:?} outside the domain")))?;
        let b = self.index_of(v).ok_or_else(|| HiveError::Range(format!("point {v:?} outside the domain")))?;
        let d = self.row(a)[b];
        Ok((d != UNREACHABLE).then_some(d))
    }

    /// `min_s (init_s + d_R(s, w))` over the given sources, `i64::MAX` where
    /// no source reaches.
    pub fn min_plus(&self, init: &[(usize, i64)]) -> Vec<i64> {
        let mut val = vec![i64::MAX; self.points.len()];
        let mut heap = BinaryHeap::new();
        for &(k, f) in init {
            if f < val[k] {
                val[k] = f;
                heap.push(Reverse((f, k)));
            }
        }
        while let Some(Reverse((v, a))) = heap.pop() {
            if v > val[a] {
                continue;
            }
            for &b in &self.out[a] {
                if v + 1 < val[b] {
                    val[b] = v + 1;
                    heap.push(Reverse((v + 1, b)));
                }
            }
        }
        val
    }

    /// Distance between two indexed points, `UNREACHABLE` if none.
    pub fn d_index(&self, a: usize, b: usize) -> u32 {
        self.row(a)[b]
    }

    /// Heights along the boundary from the local rule: `+1` per unit step in
    /// a positive direction and `-1` against it, with value `0` at the first
    /// point of each boundary component. Fails if some boundary loop does
    /// not close up.
    pub fn boundary_heights(&self) -> Result<Vec<(Pt, i64)>> {
        let bd = self.boundary_edges();
        let mut adj: HashMap<Pt, Vec<(Pt, i64)>> = HashMap::new();
        for e in &bd {
            adj.entry(e.from).or_default().push((e.to, 1));
            adj.entry(e.to).or_default().push((e.from, -1));
        }
        let mut pts: Vec<Pt> = adj.keys().copied().collect();
        pts.sort_by_key(|&(x, y)| (y, x));
        let mut value: HashMap<Pt, i64> = HashMap::new();
        for &start in &pts {
            if value.contains_key(&start) {
                continue;
            }
            value.insert(start, 0);
            let mut queue = VecDeque::from([start]);
            while let Some(a) = queue.pop_front() {
                let fa = value[&a];
                for &(b, s) in &adj[&a] {
                    match value.get(&b) {
                        Some(&fb) if fb != fa + s => {
                            return Err(HiveError::Validation(format!(
                                "boundary heights do not close up between {a:?} and {b:?}"
                            )));
                        }
                        Some(_) => {}
                        None => {
                            value.insert(b, fa + s);
                            queue.push_back(b);
                        }
                    }
                }
            }
        }
        let mut out: Vec<(Pt, i64)> = value.into_iter().collect();
        out.sort_by_key(|&((x, y), _)| (y, x));
        Ok(out)
    }

    /// Closed boundary paths, each listed from its smallest point.
    pub fn boundary_paths(&self) -> Vec<Vec<Pt>> {
        let mut next: HashMap<Pt, Vec<Pt>> = HashMap::new();
        for e in self.boundary_edges() {
            next.entry(e.from).or_default().push(e.to);
            next.entry(e.to).or_default().push(e.from);
        }
        let mut used: HashSet<(Pt, Pt)> = HashSet::new();
        let mut starts: Vec<Pt> = next.keys().copied().collect();
        starts.sort_by_key(|&(x, y)| (y, x));
        let mut paths = Vec::new();
        for s in starts {
            for &first in &next[&s].clone() {
                if used.contains(&(s, first)) {
                    continue;
                }
                let mut path = vec![s];
                let (mut prev, mut cur) = (s, first);
                used.insert((s, first));
                used.insert((first, s));
                while cur != s {
                    path.push(cur);
                    let Some(&nxt) = next[&cur].iter().find(|&&q| q != prev && !used.contains(&(cur, q))) else {
                        break;
                    };
                    used.insert((cur, nxt));
                    used.insert((nxt, cur));
                    prev = cur;
                    cur = nxt;
                }
                paths.push(path);
            }
        }
        paths
    }

    pub fn to_doc(&self) -> DomainDoc {
        DomainDoc { triangles: self.tris.clone(), boundary: self.boundary_paths() }
    }

    /// Lozenges read off from a height function: each triangle is paired
    /// across its unique edge where the height drops by two.
    pub fn tiling_from_heights(&self, f: &HeightField) -> Result<Vec<Lozenge>> {
        let tri_set: HashSet<Triangle> = self.tris.iter().copied().collect();
        let mut used: HashSet<Triangle> = HashSet::new();
        let mut out = Vec::new();
        for t in &self.tris {
            let drops: Vec<Edge> = Edge::of_triangle(t)
                .into_iter()
                .filter(|e| matches!((f.get(e.from), f.get(e.to)), (Some(a), Some(b)) if b - a == -2))
                .collect();
            if drops.len() != 1 {
                return Err(HiveError::Validation(format!("triangle {t:?} has {} diagonal edges", drops.len())));
            }
            let (a, b) = drops[0].sides();
            let other = if a == *t { b } else { a };
            if !tri_set.contains(&other) {
                return Err(HiveError::Validation(format!("triangle {t:?} pairs across the boundary")));
            }
            if used.insert(*t) && used.insert(other) {
                out.push(Lozenge::from_triangles(*t, other).expect("edge sides form a lozenge"));
            }
        }
        out.sort();
        Ok(out)
    }

    /// Whether `f` is a height function: integer steps in `{1, -2}` along
    /// every positive edge, and `+1` along every boundary edge.
    pub fn is_height_function(&self, f: &HeightField) -> bool {
        self.edges.iter().all(|(e, c)| match (f.get(e.from), f.get(e.to)) {
            (Some(a), Some(b)) => {
                let d = b - a;
                if *c == 1 {
                    d == 1
                } else {
                    d == 1 || d == -2
                }
            }
            _ => false,
        })
    }
}

fn check_path(path: &[Pt]) -> Result<()> {
    if path.len() < 3 {
        return Err(HiveError::Geometry("boundary path needs at least three corners".into()));
    }
    let mut seen = HashSet::new();
    for k in 0..path.len() {
        let (p, q) = (path[k], path[(k + 1) % path.len()]);
        let (dx, dy) = (q.0 - p.0, q.1 - p.1);
        let len = dx.abs().max(dy.abs());
        if len == 0 {
            return Err(HiveError::Geometry(format!("repeated corner {p:?}")));
        }
        let step = (dx / len, dy / len);
        if (step.0 * len, step.1 * len) != (dx, dy)
            || !(POSITIVE_STEPS.contains(&step) || POSITIVE_STEPS.contains(&(-step.0, -step.1)))
        {
            return Err(HiveError::Geometry(format!("segment {p:?} -> {q:?} is not along a lattice direction")));
        }
        for t in 0..len {
            if !seen.insert((p.0 + t * step.0, p.1 + t * step.1)) {
                return Err(HiveError::Geometry(format!("boundary path revisits {:?}", (p.0 + t * step.0, p.1 + t * step.1))));
            }
        }
    }
    Ok(())
}

/// Winding number of a closed lattice path around a planar point; lattice
/// coordinates are mapped affinely, which preserves winding numbers.
fn winding(path: &[Pt], c: (f64, f64)) -> i32 {
    let mut w = 0;
    for k in 0..path.len() {
        let (a, b) = (path[k], path[(k + 1) % path.len()]);
        let (ax, ay, bx, by) = (a.0 as f64, a.1 as f64, b.0 as f64, b.1 as f64);
        let cross = (bx - ax) * (c.1 - ay) - (by - ay) * (c.0 - ax);
        if ay <= c.1 {
            if by > c.1 && cross > 0.0 {
                w += 1;
            }
        } else if by <= c.1 && cross < 0.0 {
            w -= 1;
        }
    }
    w
}

/// Thurston's criterion on a simply connected domain: the boundary heights
/// must close up and satisfy `f(v) - f(u) <= d_R(u, v)` for every pair of
/// boundary points.
pub fn is_tileable(d: &LatticeDomain) -> Result<bool> {
    if !d.is_simply_connected() {
        return Err(HiveError::Precondition(
            "domain is not simply connected; use the annulus extension test".into(),
        ));
    }
    let Ok(bd) = d.boundary_heights() else {
        return Ok(false);
    };
    let idx: Vec<(usize, i64)> = bd.iter().map(|&(p, f)| (d.index_of(p).expect("boundary point"), f)).collect();
    for &(u, fu) in &idx {
        for &(v, fv) in &idx {
            let dist = d.d_index(u, v);
            if dist == UNREACHABLE || fv - fu > dist as i64 {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Pointwise-maximal height-like extension
/// `g(w) = min_u (f(u) + d_R(u, w))` of partial values `f`.
///
/// Fails when the result does not reproduce the given values or some edge
/// step is not in `{1, -2}`.
pub fn max_extension(boundary: &[(Pt, i64)], d: &LatticeDomain) -> Result<HeightField> {
    if boundary.is_empty() {
        return Err(HiveError::Parameter("no boundary values".into()));
    }
    let mut init = Vec::with_capacity(boundary.len());
    for &(p, f) in boundary {
        let k = d.index_of(p).ok_or_else(|| HiveError::Range(format!("point {p:?} outside the domain")))?;
        init.push((k, f));
    }
    let val = d.min_plus(&init);
    for &(p, f) in boundary {
        let g = val[d.index_of(p).expect("checked")];
        if g != f {
            return Err(HiveError::Infeasible(format!(
                "boundary value {f} at {p:?} cannot be kept; extension gives {g}"
            )));
        }
    }
    if let Some(k) = val.iter().position(|&v| v == i64::MAX) {
        return Err(HiveError::Infeasible(format!("point {:?} is unreachable", d.points[k])));
    }
    for (e, _) in &d.edges {
        let s = val[d.index[&e.to]] - val[d.index[&e.from]];
        if s != 1 && s != -2 {
            return Err(HiveError::Infeasible(format!(
                "boundary values violate the congruence condition on edge {:?} -> {:?}",
                e.from, e.to
            )));
        }
    }
    Ok(HeightField::from_pairs(d.points.iter().copied().zip(val).collect()))
}

/// Constants of the annulus extension test.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AnnulusParams {
    pub m: f64,
    pub eps_hat: f64,
    pub eps_tilde: f64,
    pub eps_prime: f64,
    /// Common affine approximation `a(p) = tilt . p + offset`; when absent
    /// the closeness condition is not checked.
    pub affine: Option<(TiltVector, f64)>,
}

/// Shift `chi` in `{-1, 0, 1}` such that `g0` on the outer boundary together
/// with `g1 + chi` on the inner boundary extends to a height function on
/// `r0 \ r1`, with that extension.
pub fn extendability_annulus(
    g0: &[(Pt, i64)],
    g1: &[(Pt, i64)],
    r0: &LatticeDomain,
    r1: &LatticeDomain,
    params: &AnnulusParams,
) -> Result<(i64, HeightField)> {
    if !(params.m > 0.0 && params.eps_hat > 0.0 && params.eps_tilde > 0.0 && params.eps_prime > 0.0) {
        return Err(HiveError::Parameter("annulus constants must be positive".into()));
    }
    if 2.0 * params.eps_prime >= params.eps_hat * params.eps_tilde {
        return Err(HiveError::Parameter(format!(
            "need 2 eps' < eps_hat eps_tilde, got eps' = {}, eps_hat = {}, eps_tilde = {}",
            params.eps_prime, params.eps_hat, params.eps_tilde
        )));
    }
    let outer: HashSet<Triangle> = r0.tris.iter().copied().collect();
    if let Some(t) = r1.tris.iter().find(|t| !outer.contains(t)) {
        return Err(HiveError::Precondition(format!("inner domain leaves the outer one at {t:?}")));
    }
    let inner: HashSet<Triangle> = r1.tris.iter().copied().collect();
    let ring = LatticeDomain::from_triangles(r0.tris.iter().filter(|t| !inner.contains(t)).copied().collect())?;
    let b0 = r0.boundary_points();
    let b1 = r1.boundary_points();
    let margin = params.eps_tilde * params.m;
    for &x in &b1 {
        let xi = r0.index_of(x).expect("inner boundary lies in the outer domain");
        if let Some(&y) = b0.iter().find(|&&y| r0.d_index(xi, r0.index_of(y).expect("boundary")) as f64 <= margin) {
            return Err(HiveError::Precondition(format!("inner point {x:?} is within {margin} of outer point {y:?}")));
        }
    }
    for &y in &b0 {
        let yi = r0.index_of(y).expect("boundary");
        if let Some(&x) = b1.iter().find(|&&x| r0.d_index(yi, r0.index_of(x).expect("inside")) as f64 <= margin) {
            return Err(HiveError::Precondition(format!("outer point {y:?} is within {margin} of inner point {x:?}")));
        }
    }
    if let Some((tilt, c)) = params.affine {
        if !tilt.in_scaled_k(1.0 - params.eps_hat, 0.0) {
            return Err(HiveError::Precondition(format!("affine tilt {:?} is not in (1 - eps_hat) K", tilt.g)));
        }
        let bound = params.eps_prime * params.m;
        for &(p, f) in g0.iter().chain(g1) {
            let a = tilt.apply(p) + c;
            if (f as f64 - a).abs() >= bound {
                return Err(HiveError::Precondition(format!(
                    "boundary value {f} at {p:?} is {} from the affine approximation, limit {bound}",
                    (f as f64 - a).abs()
                )));
            }
        }
    }
    let class = |g: &[(Pt, i64)], what: &str| -> Result<i64> {
        let mut r: Option<i64> = None;
        for &(p, f) in g {
            let c = (f - (p.0 - p.1)).rem_euclid(3);
            match r {
                Some(r) if r != c => {
                    return Err(HiveError::Precondition(format!("{what} values are not congruent at {p:?}")));
                }
                _ => r = Some(c),
            }
        }
        r.ok_or_else(|| HiveError::Parameter(format!("{what} values are empty")))
    };
    let r0c = class(g0, "outer")?;
    let r1c = class(g1, "inner")?;
    let chi = match (r0c - r1c).rem_euclid(3) {
        0 => 0,
        1 => 1,
        _ => -1,
    };
    let mut combined: Vec<(Pt, i64)> = g0.to_vec();
    combined.extend(g1.iter().map(|&(p, f)| (p, f + chi)));
    let field = max_extension(&combined, &ring)?;
    Ok((chi, field))
}
