//! Gelfand–Tsetlin patterns, hives and discrete concavity.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{HiveError, Result};
use crate::randmat::{MinorProcess, Spectrum};
use crate::rng;

/// Interlacing triangular array `lambda_{j,k}`, `1 <= j <= k <= n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GTPattern {
    /// `rows[k - 1]` is row `k`, of length `k`, non-increasing.
    pub rows: Vec<Vec<f64>>,
}

impl GTPattern {
    /// Validate shape and interlacing; `tol` is relative to the value scale.
    pub fn new(rows: Vec<Vec<f64>>, tol: f64) -> Result<Self> {
        if rows.is_empty() {
            return Err(HiveError::Parameter("pattern needs at least one row".into()));
        }
        let p = MinorProcess::from_rows(rows, 1.0)?;
        p.check_interlacing(tol)?;
        Ok(Self { rows: p.rows })
    }

    /// Wrap rows without checking interlacing.
    pub fn new_unchecked(rows: Vec<Vec<f64>>) -> Self {
        Self { rows }
    }

    pub fn n(&self) -> usize {
        self.rows.len()
    }

    /// `lambda_{j,k}` with 1-based indices.
    pub fn get(&self, j: usize, k: usize) -> f64 {
        self.rows[k - 1][j - 1]
    }

    pub fn top(&self) -> &[f64] {
        &self.rows[self.n() - 1]
    }

    /// `lambda_{1,k} + ... + lambda_{i,k}`; zero when `i = 0` or `k = 0`.
    pub fn prefix(&self, i: usize, k: usize) -> f64 {
        if k == 0 {
            return 0.0;
        }
        self.rows[k - 1][..i].iter().sum()
    }

    /// Diagonal data `a` with `a_1 + ... + a_k = sum of row k`.
    pub fn diagonal(&self) -> Vec<f64> {
        let mut prev = 0.0;
        self.rows
            .iter()
            .map(|r| {
                let s: f64 = r.iter().sum();
                let a = s - prev;
                prev = s;
                a
            })
            .collect()
    }

    /// Largest minus smallest entry of the top row.
    pub fn spread(&self) -> f64 {
        let t = self.top();
        t[0] - t[t.len() - 1]
    }
}

/// Reindex a minor process as a GT pattern, checking interlacing to `1e-8`
/// relative slack.
pub fn gt_from_minors(p: &MinorProcess) -> Result<GTPattern> {
    GTPattern::new(p.rows.clone(), 1e-8)
}

/// Tuple whose consecutive gaps exceed the spread of a paired spectrum.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LargeGapTuple {
    pub values: Spectrum,
}

impl LargeGapTuple {
    /// Check that every gap of `values` exceeds `spread`.
    pub fn new(values: Spectrum, spread: f64) -> Result<Self> {
        let t = Self { values };
        if t.min_gap() <= spread {
            return Err(HiveError::Precondition(format!(
                "tuple gap {} does not exceed spread {spread}",
                t.min_gap()
            )));
        }
        Ok(t)
    }

    /// `Lambda_i = (n - i + 1) G` with `G = 2 spread + 1`.
    pub fn default_for(n: usize, spread: f64) -> Self {
        Self::with_gap(n, 2.0 * spread + 1.0)
    }

    /// `Lambda_i = (n - i + 1) gap`.
    pub fn with_gap(n: usize, gap: f64) -> Self {
        Self { values: Spectrum { values: (1..=n).map(|i| (n - i + 1) as f64 * gap).collect() } }
    }

    /// `Lambda_1 + ... + Lambda_r`.
    pub fn prefix(&self, r: usize) -> f64 {
        self.values.values[..r].iter().sum()
    }

    pub fn min_gap(&self) -> f64 {
        self.values.values.windows(2).map(|w| w[0] - w[1]).fold(f64::INFINITY, f64::min)
    }

    pub fn n(&self) -> usize {
        self.values.len()
    }
}

/// Function on the lattice triangle `T_n = {(i, j) : 0 <= i <= j <= n}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Hive {
    pub n: usize,
    /// Value at `(i, j)` stored at `j (j + 1) / 2 + i`.
    pub values: Vec<f64>,
}

impl Hive {
    pub fn from_fn(n: usize, f: impl Fn(usize, usize) -> f64) -> Self {
        let mut values = Vec::with_capacity((n + 1) * (n + 2) / 2);
        for j in 0..=n {
            for i in 0..=j {
                values.push(f(i, j));
            }
        }
        Self { n, values }
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        debug_assert!(i <= j && j <= self.n);
        self.values[j * (j + 1) / 2 + i]
    }

    /// Value at signed coordinates, `None` outside `T_n`.
    pub fn at(&self, i: i64, j: i64) -> Option<f64> {
        if i < 0 || i > j || j > self.n as i64 {
            None
        } else {
            Some(self.get(i as usize, j as usize))
        }
    }

    /// Increments along the edge `(0, 0) -> (0, n)`.
    pub fn lambda_boundary(&self) -> Vec<f64> {
        (1..=self.n).map(|t| self.get(0, t) - self.get(0, t - 1)).collect()
    }

    /// Increments along the edge `(0, n) -> (n, n)`.
    pub fn mu_boundary(&self) -> Vec<f64> {
        (1..=self.n).map(|t| self.get(t, self.n) - self.get(t - 1, self.n)).collect()
    }

    /// Increments along the diagonal `(0, 0) -> (n, n)`.
    pub fn nu_boundary(&self) -> Vec<f64> {
        (1..=self.n).map(|t| self.get(t, t) - self.get(t - 1, t - 1)).collect()
    }

    /// Row-major grid `(n+1) x (n+1)` with `NaN` outside `T_n`, for heatmaps.
    pub fn grid(&self) -> Vec<Vec<f64>> {
        (0..=self.n)
            .map(|j| (0..=self.n).map(|i| if i <= j { self.get(i, j) } else { f64::NAN }).collect())
            .collect()
    }
}

/// The three unit parallelogram shapes of the discrete Hessian.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Rhombus {
    E0,
    E1,
    E2,
}

impl Rhombus {
    pub const ALL: [Rhombus; 3] = [Rhombus::E0, Rhombus::E1, Rhombus::E2];

    /// Vertex offsets with their signs in the Hessian sum.
    pub fn stencil(self) -> [((i64, i64), f64); 4] {
        match self {
            Rhombus::E0 => [((0, 0), 1.0), ((1, 0), -1.0), ((1, 1), -1.0), ((2, 1), 1.0)],
            Rhombus::E1 => [((0, 0), -1.0), ((1, 0), 1.0), ((0, 1), 1.0), ((1, 1), -1.0)],
            Rhombus::E2 => [((0, 0), 1.0), ((1, 1), -1.0), ((0, 1), -1.0), ((1, 2), 1.0)],
        }
    }
}

/// Discrete Hessian of `f` on the parallelogram of the given shape anchored
/// at `anchor`. `f` returns `None` outside its domain.
pub fn discrete_hessian(f: impl Fn(i64, i64) -> Option<f64>, shape: Rhombus, anchor: (i64, i64)) -> Result<f64> {
    let mut s = 0.0;
    for ((dx, dy), sign) in shape.stencil() {
        let (x, y) = (anchor.0 + dx, anchor.1 + dy);
        let v = f(x, y).ok_or_else(|| HiveError::Range(format!("vertex ({x},{y}) outside the domain")))?;
        s += sign * v;
    }
    Ok(s)
}

/// A parallelogram on which concavity fails.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub shape: Rhombus,
    pub anchor: (i64, i64),
    pub value: f64,
}

/// Outcome of a concavity check.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConcavityReport {
    pub concave: bool,
    pub first_violation: Option<Violation>,
    pub cells_checked: usize,
}

/// Check `Delta_i h <= tol` on every parallelogram inside `T_n`, with `tol`
/// equal to `1e-9` times the value scale.
pub fn is_rhombus_concave(h: &Hive) -> ConcavityReport {
    let scale = h.values.iter().fold(1.0f64, |a, v| a.max(v.abs()));
    rhombus_check(h.n as i64, |i, j| h.at(i, j), 1e-9 * scale)
}

/// Concavity check for any function on `T_n` with an absolute tolerance.
pub fn rhombus_check(n: i64, f: impl Fn(i64, i64) -> Option<f64>, tol: f64) -> ConcavityReport {
    let mut checked = 0;
    for shape in Rhombus::ALL {
        for y in 0..=n {
            for x in 0..=y {
                let inside = shape.stencil().iter().all(|((dx, dy), _)| {
                    let (a, b) = (x + dx, y + dy);
                    a >= 0 && a <= b && b <= n
                });
                if !inside {
                    continue;
                }
                checked += 1;
                let v = discrete_hessian(&f, shape, (x, y)).expect("stencil checked inside");
                if v > tol {
                    return ConcavityReport {
                        concave: false,
                        first_violation: Some(Violation { shape, anchor: (x, y), value: v }),
                        cells_checked: checked,
                    };
                }
            }
        }
    }
    ConcavityReport { concave: true, first_violation: None, cells_checked: checked }
}

/// Map a GT pattern to the hive `h(i, j) = Lambda_1 + ... + Lambda_j +
/// lambda_{1,j} + ... + lambda_{i,j}`.
pub fn hive_from_gt(g: &GTPattern, big: &LargeGapTuple) -> Result<Hive> {
    let n = g.n();
    if big.n() != n {
        return Err(HiveError::Parameter(format!("tuple length {} differs from pattern size {n}", big.n())));
    }
    if n > 1 && big.min_gap() <= g.spread() {
        return Err(HiveError::Precondition(format!(
            "large-gap condition fails: min gap {} <= spread {}",
            big.min_gap(),
            g.spread()
        )));
    }
    let mut lam = vec![0.0; n + 1];
    for r in 1..=n {
        lam[r] = lam[r - 1] + big.values.values[r - 1];
    }
    Ok(Hive::from_fn(n, |i, j| lam[j] + g.prefix(i, j)))
}

/// Schur–Horn test: equal sums and sorted prefix sums of `a` dominated by
/// those of `lambda`, with relative tolerance `1e-9`.
pub fn majorization_check(a: &[f64], lambda: &Spectrum) -> bool {
    if a.len() != lambda.len() {
        return false;
    }
    let scale = a.iter().chain(&lambda.values).fold(1.0f64, |m, x| m.max(x.abs())) * a.len().max(1) as f64;
    let tol = 1e-9 * scale;
    let mut sorted = a.to_vec();
    sorted.sort_by(|x, y| y.total_cmp(x));
    let (mut sa, mut sl) = (0.0, 0.0);
    for (x, l) in sorted.iter().zip(&lambda.values) {
        sa += x;
        sl += l;
        if sa > sl + tol {
            return false;
        }
    }
    (sa - sl).abs() <= tol
}

/// Result of the Weyl inequality test.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeylReport {
    pub holds: bool,
    /// 1-based `(i, j)` with `nu_{i+j-1} > lambda_i + mu_j`.
    pub violations: Vec<(usize, usize)>,
}

/// Check `nu_{i+j-1} <= lambda_i + mu_j` for all admissible `(i, j)`.
pub fn weyl_check(lambda: &Spectrum, mu: &Spectrum, nu: &Spectrum) -> Result<WeylReport> {
    let n = lambda.len();
    if mu.len() != n || nu.len() != n {
        return Err(HiveError::Parameter("spectra must share a length".into()));
    }
    let scale = [lambda, mu, nu]
        .iter()
        .flat_map(|s| s.values.iter())
        .fold(1.0f64, |m, x| m.max(x.abs()))
        * n.max(1) as f64;
    let tol = 1e-9 * scale;
    let trace_gap = lambda.sum() + mu.sum() - nu.sum();
    if trace_gap.abs() > tol {
        return Err(HiveError::Validation(format!("trace condition fails by {trace_gap:e}")));
    }
    let mut violations = Vec::new();
    for i in 1..=n {
        for j in 1..=n + 1 - i {
            if nu.values[i + j - 2] > lambda.values[i - 1] + mu.values[j - 1] + tol {
                violations.push((i, j));
            }
        }
    }
    Ok(WeylReport { holds: violations.is_empty(), violations })
}

/// `prod_{i<j} (x_i - x_j)`.
pub fn vandermonde(x: &Spectrum) -> f64 {
    let v = &x.values;
    let mut p = 1.0;
    for i in 0..v.len() {
        for j in i + 1..v.len() {
            p *= v[i] - v[j];
        }
    }
    p
}

/// Monte-Carlo volume estimate with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VolumeEstimate {
    pub mean: f64,
    pub std_error: f64,
    pub trials: usize,
}

/// Estimate the volume of the GT polytope with top row `lambda`.
///
/// Each trial fills the pattern top-down, drawing every entry uniformly from
/// its interlacing interval given the row above, and records the product of
/// the interval lengths. That product is an unbiased estimator of the volume.
pub fn gt_polytope_volume_mc(lambda: &Spectrum, trials: usize, seed: u64) -> Result<VolumeEstimate> {
    let n = lambda.len();
    if n == 0 || n > 4 {
        return Err(HiveError::Parameter(format!("volume estimates are limited to 1 <= n <= 4, got {n}")));
    }
    if lambda.values.windows(2).any(|w| w[0] <= w[1]) {
        return Err(HiveError::Validation("spectrum must have distinct entries".into()));
    }
    if trials < 2 {
        return Err(HiveError::Parameter("need at least two trials".into()));
    }
    let mut acc = crate::stats::Running::new();
    let mut rng = rng::stream(seed, 0);
    let mut row = Vec::with_capacity(n);
    let mut next = Vec::with_capacity(n);
    for _ in 0..trials {
        row.clear();
        row.extend_from_slice(&lambda.values);
        let mut w = 1.0;
        while row.len() > 1 {
            next.clear();
            for j in 0..row.len() - 1 {
                let (hi, lo) = (row[j], row[j + 1]);
                w *= hi - lo;
                next.push(lo + (hi - lo) * rng.random::<f64>());
            }
            std::mem::swap(&mut row, &mut next);
        }
        acc.push(w);
    }
    Ok(VolumeEstimate { mean: acc.mean, std_error: acc.std_error(), trials })
}
