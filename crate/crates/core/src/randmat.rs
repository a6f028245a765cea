//! GUE sampling, minor processes and the eigenvalue statistics built on them.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::eigen::hermitian_eigen;
use crate::error::{HiveError, Result};
use crate::rng;

/// A Hermitian matrix together with the parameters that produced it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HermitianSample {
    pub n: usize,
    /// Row-major entries; `entries[i * n + j]` is entry `(i, j)`.
    pub entries: Vec<Complex64>,
    pub variance_param: f64,
    pub seed: u64,
    /// Matrix index inside the seed's family of streams.
    pub index: u64,
}

impl HermitianSample {
    /// Wrap explicit entries, checking the Hermitian symmetry.
    pub fn from_entries(n: usize, entries: Vec<Complex64>) -> Result<Self> {
        if entries.len() != n * n {
            return Err(HiveError::Parameter(format!("expected {} entries, got {}", n * n, entries.len())));
        }
        let scale = entries.iter().map(|z| z.norm()).fold(1.0, f64::max);
        for i in 0..n {
            if entries[i * n + i].im.abs() > 1e-12 * scale {
                return Err(HiveError::Validation(format!("diagonal entry {i} is not real")));
            }
            for j in 0..i {
                if (entries[i * n + j] - entries[j * n + i].conj()).norm() > 1e-12 * scale {
                    return Err(HiveError::Validation(format!("entries ({i},{j}) and ({j},{i}) are not conjugate")));
                }
            }
        }
        Ok(Self { n, entries, variance_param: f64::NAN, seed: 0, index: 0 })
    }

    /// Real diagonal matrix.
    pub fn diagonal(values: &[f64]) -> Self {
        let n = values.len();
        let mut entries = vec![Complex64::new(0.0, 0.0); n * n];
        for (i, &v) in values.iter().enumerate() {
            entries[i * n + i] = Complex64::new(v, 0.0);
        }
        Self { n, entries, variance_param: f64::NAN, seed: 0, index: 0 }
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.entries[i * self.n + j]
    }

    /// Leading `k x k` principal submatrix, row-major.
    pub fn leading_minor(&self, k: usize) -> Vec<Complex64> {
        let mut out = Vec::with_capacity(k * k);
        for i in 0..k {
            out.extend_from_slice(&self.entries[i * self.n..i * self.n + k]);
        }
        out
    }

    pub fn trace(&self) -> f64 {
        (0..self.n).map(|i| self.entries[i * self.n + i].re).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.entries.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }
}

/// Sorted (non-increasing) real spectrum.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Spectrum {
    pub values: Vec<f64>,
}

impl Spectrum {
    /// Sort the given values into a spectrum; ties keep their input order.
    pub fn new(mut values: Vec<f64>) -> Self {
        values.sort_by(|a, b| b.total_cmp(a));
        Self { values }
    }

    /// Accept values that are already non-increasing.
    pub fn from_sorted(values: Vec<f64>) -> Result<Self> {
        if values.windows(2).any(|w| w[0] < w[1]) {
            return Err(HiveError::Validation("spectrum is not non-increasing".into()));
        }
        Ok(Self { values })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn sum(&self) -> f64 {
        self.values.iter().sum()
    }

    /// Largest minus smallest value.
    pub fn spread(&self) -> f64 {
        match (self.values.first(), self.values.last()) {
            (Some(a), Some(b)) => a - b,
            _ => 0.0,
        }
    }
}

/// Spectra of all leading principal minors of one Hermitian matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MinorProcess {
    /// `rows[k - 1]` holds the k eigenvalues of the leading `k x k` minor,
    /// non-increasing.
    pub rows: Vec<Vec<f64>>,
    /// Semicircle scale of the top row: `value / scale` fills `[-2, 2]`.
    pub scale: f64,
}

impl MinorProcess {
    pub fn from_rows(rows: Vec<Vec<f64>>, scale: f64) -> Result<Self> {
        for (k, r) in rows.iter().enumerate() {
            if r.len() != k + 1 {
                return Err(HiveError::Validation(format!("row {} has length {}", k + 1, r.len())));
            }
        }
        Ok(Self { rows, scale })
    }

    pub fn n(&self) -> usize {
        self.rows.len()
    }

    /// Entry `lambda_{j,k}` with 1-based `1 <= j <= k <= n`.
    pub fn get(&self, j: usize, k: usize) -> f64 {
        self.rows[k - 1][j - 1]
    }

    pub fn top(&self) -> Spectrum {
        Spectrum { values: self.rows.last().cloned().unwrap_or_default() }
    }

    /// Multiply every entry (and the semicircle scale) by `c`.
    pub fn scaled(&self, c: f64) -> Self {
        Self {
            rows: self.rows.iter().map(|r| r.iter().map(|x| x * c).collect()).collect(),
            scale: self.scale * c,
        }
    }

    /// Largest violation of `lambda_{j,k+1} >= lambda_{j,k} >= lambda_{j+1,k+1}`.
    pub fn interlacing_defect(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for k in 1..self.n() {
            let (lo, hi) = (&self.rows[k - 1], &self.rows[k]);
            for j in 0..k {
                worst = worst.max(lo[j] - hi[j]).max(hi[j + 1] - lo[j]);
            }
        }
        worst
    }

    /// Check interlacing up to `tol` times the value scale.
    pub fn check_interlacing(&self, tol: f64) -> Result<()> {
        let scale = self.rows.iter().flatten().fold(1.0f64, |a, x| a.max(x.abs()));
        let d = self.interlacing_defect();
        if d > tol * scale {
            return Err(HiveError::Validation(format!("interlacing violated by {d:e}")));
        }
        Ok(())
    }
}

/// Sample a GUE matrix: off-diagonal entries complex Gaussian with
/// `E|z|^2 = variance_param * n`, diagonal entries real Gaussian with variance
/// `variance_param * n`. Uses matrix index 0 of the seed.
pub fn sample_gue(n: usize, variance_param: f64, seed: u64) -> Result<HermitianSample> {
    sample_gue_indexed(n, variance_param, seed, 0)
}

/// As [`sample_gue`], for an explicit matrix index inside the seed.
pub fn sample_gue_indexed(n: usize, variance_param: f64, seed: u64, index: u64) -> Result<HermitianSample> {
    check_gue_params(n, variance_param)?;
    let mut entries = vec![Complex64::new(0.0, 0.0); n * n];
    for i in 0..n {
        for j in i..n {
            let z = gue_entry(n, variance_param, seed, index, i, j);
            entries[i * n + j] = z;
            entries[j * n + i] = z.conj();
        }
    }
    Ok(HermitianSample { n, entries, variance_param, seed, index })
}

fn check_gue_params(n: usize, variance_param: f64) -> Result<()> {
    if n == 0 {
        return Err(HiveError::Parameter("matrix size must be positive".into()));
    }
    if !(variance_param > 0.0 && variance_param.is_finite()) {
        return Err(HiveError::Parameter(format!("variance_param must be positive, got {variance_param}")));
    }
    Ok(())
}

/// Entry `(i, j)`, `i <= j`, of GUE matrix `index`; keyed by the entry
/// position so any subset of entries can be regenerated independently.
fn gue_entry(n: usize, variance_param: f64, seed: u64, index: u64, i: usize, j: usize) -> Complex64 {
    let var = variance_param * n as f64;
    let (a, b) = rng::normal_pair(seed, index, (i * n + j) as u64);
    if i == j {
        Complex64::new(a * var.sqrt(), 0.0)
    } else {
        let s = (var / 2.0).sqrt();
        Complex64::new(a * s, b * s)
    }
}

/// Eigenvalues of a Hermitian sample, non-increasing.
pub fn eigenvalues_hermitian(m: &HermitianSample) -> Result<Spectrum> {
    let r = hermitian_eigen(&m.entries, m.n, false)?;
    Ok(Spectrum { values: r.values })
}

/// Eigenvalues and column-major eigenvectors.
pub fn eigen_decomposition(m: &HermitianSample) -> Result<(Spectrum, Vec<Complex64>)> {
    let r = hermitian_eigen(&m.entries, m.n, true)?;
    Ok((Spectrum { values: r.values }, r.vectors.unwrap_or_default()))
}

/// Spectra of all leading minors, computed one minor at a time.
pub fn minor_process(m: &HermitianSample) -> Result<MinorProcess> {
    let mut rows = Vec::with_capacity(m.n);
    for k in 1..=m.n {
        let r = hermitian_eigen(&m.leading_minor(k), k, false)?;
        rows.push(r.values);
    }
    let scale = if m.variance_param.is_finite() { m.variance_param.sqrt() * m.n as f64 } else { 1.0 };
    Ok(MinorProcess { rows, scale })
}

/// Sample the minor process of a GUE matrix directly, level by level.
///
/// Conditionally on the spectrum `d` of the leading `k x k` minor, the next
/// spectrum is that of the arrowhead matrix `[[diag(d), z], [z*, c]]` where
/// `z` is a fresh complex Gaussian vector (unitary invariance) and `c` the
/// new diagonal entry. The joint law equals that of
/// `minor_process(sample_gue_indexed(..))`, at `O(n^3)` instead of `O(n^4)`
/// cost, and interlacing holds exactly by construction. The Gaussians are
/// the same keyed entries that [`sample_gue_indexed`] would use for the
/// matrix's upper triangle.
pub fn sample_minor_process(n: usize, variance_param: f64, seed: u64, index: u64) -> Result<MinorProcess> {
    check_gue_params(n, variance_param)?;
    let mut rows: Vec<Vec<f64>> = Vec::with_capacity(n);
    rows.push(vec![gue_entry(n, variance_param, seed, index, 0, 0).re]);
    let mut w = Vec::new();
    for k in 1..n {
        w.clear();
        w.extend((0..k).map(|i| gue_entry(n, variance_param, seed, index, i, k).norm_sqr()));
        let c = gue_entry(n, variance_param, seed, index, k, k).re;
        let next = arrowhead_eigenvalues(&rows[k - 1], &w, c);
        rows.push(next);
    }
    Ok(MinorProcess { rows, scale: variance_param.sqrt() * n as f64 })
}

/// Eigenvalues of `[[diag(d), z], [z*, c]]` given `d` non-increasing and the
/// squared moduli `w = |z|^2`, via bisection on the secular equation
/// `c - x - sum_i w_i / (d_i - x) = 0` inside each interlacing interval.
pub fn arrowhead_eigenvalues(d: &[f64], w: &[f64], c: f64) -> Vec<f64> {
    let k = d.len();
    let znorm = w.iter().sum::<f64>().sqrt();
    let hi = d.first().copied().unwrap_or(c).max(c) + znorm + 1e-300;
    let lo = d.last().copied().unwrap_or(c).min(c) - znorm - 1e-300;
    let secular = |x: f64| -> f64 {
        let mut s = c - x;
        for (di, wi) in d.iter().zip(w) {
            s -= wi / (di - x);
        }
        s
    };
    let mut out = Vec::with_capacity(k + 1);
    for t in 0..=k {
        let right = if t == 0 { hi } else { d[t - 1] };
        let left = if t == k { lo } else { d[t] };
        if right <= left {
            out.push(left);
            continue;
        }
        let (mut a, mut b) = (left, right);
        for _ in 0..200 {
            let mid = 0.5 * (a + b);
            if mid <= a || mid >= b {
                break;
            }
            if secular(mid) > 0.0 {
                a = mid;
            } else {
                b = mid;
            }
        }
        out.push((0.5 * (a + b)).clamp(left, right));
    }
    out
}

/// Wigner semicircle density on `[-2, 2]`.
pub fn semicircle_density(u: f64) -> f64 {
    let s = 4.0 - u * u;
    if s <= 0.0 {
        0.0
    } else {
        s.sqrt() / (2.0 * std::f64::consts::PI)
    }
}

/// Cumulative distribution function of the semicircle law.
pub fn semicircle_cdf(u: f64) -> f64 {
    if u <= -2.0 {
        return 0.0;
    }
    if u >= 2.0 {
        return 1.0;
    }
    let pi = std::f64::consts::PI;
    0.5 + u * (4.0 - u * u).sqrt() / (4.0 * pi) + (u / 2.0).asin() / pi
}

/// Classical location: the `u` with semicircle mass `i / n` to its left.
pub fn classical_location(i: usize, n: usize) -> Result<f64> {
    if n == 0 || i == 0 || i > n {
        return Err(HiveError::Range(format!("classical location needs 1 <= i <= n, got i={i}, n={n}")));
    }
    Ok(semicircle_quantile(i as f64 / n as f64))
}

/// Inverse semicircle CDF by bisection on `[-2, 2]`.
pub fn semicircle_quantile(p: f64) -> f64 {
    let (mut a, mut b) = (-2.0f64, 2.0f64);
    while b - a > 1e-13 {
        let mid = 0.5 * (a + b);
        if semicircle_cdf(mid) < p {
            a = mid;
        } else {
            b = mid;
        }
    }
    0.5 * (a + b)
}

/// Normalized nearest-neighbour gap `g_i` and interlacing gap `g~_i` at
/// ascending index `i` of the top row.
///
/// With ascending top row `l_1 <= ... <= l_N` and ascending next row
/// `l'_1 <= ... <= l'_{N-1}`, the gaps are `N rho(gamma) (l_{i+1} - l_i) / s`
/// and `N rho(gamma) (l'_i - l_i) / s`, where `s` is the semicircle scale of
/// the process and `gamma` the classical location of `i / N`. In the
/// normalization `s = sqrt(2N)` this is `sqrt(N/2) rho(gamma) (l_{i+1} - l_i)`.
/// Indices outside `[delta N, (1 - delta) N]` are rejected.
pub fn normalized_gaps(p: &MinorProcess, i: usize, delta: f64) -> Result<(f64, f64)> {
    let n = p.n();
    if n < 3 {
        return Err(HiveError::Range("gap statistics need at least 3 rows".into()));
    }
    let lo = (delta * n as f64).ceil().max(1.0) as usize;
    let hi = (((1.0 - delta) * n as f64).floor() as usize).min(n - 1);
    if i < lo || i > hi {
        return Err(HiveError::Range(format!("index {i} outside the bulk [{lo}, {hi}]")));
    }
    let top = &p.rows[n - 1];
    let next = &p.rows[n - 2];
    let asc = |j: usize| top[n - j];
    let asc_next = |j: usize| next[n - 1 - j];
    let gamma = classical_location(i, n)?;
    let f = n as f64 * semicircle_density(gamma) / p.scale;
    Ok((f * (asc(i + 1) - asc(i)), f * (asc_next(i) - asc(i))))
}

/// Recentred, rescaled window of a minor process.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Patch {
    /// `(index j, level k)` of the window centre, 1-based.
    pub origin: (usize, usize),
    pub m: usize,
    /// `values[p * (2m+1) + q]` is the entry at index `j0 + p - m`,
    /// level `k0 + q - m`.
    pub values: Vec<f64>,
}

impl Patch {
    pub fn width(&self) -> usize {
        2 * self.m + 1
    }

    /// Entry at index offset `p` and level offset `q`, both in `0..2m+1`.
    pub fn at(&self, p: usize, q: usize) -> f64 {
        self.values[p * self.width() + q]
    }
}

/// Window `sqrt(ell) (M|_{c + box_m} - M(c))` around `c = ceil(ell x)`.
///
/// `x = (index fraction, level fraction)`; every entry of the window must
/// satisfy `1 <= j <= k <= n`.
pub fn extract_patch(p: &MinorProcess, x: (f64, f64), ell: f64, m: usize) -> Result<Patch> {
    let j0 = (ell * x.0).ceil() as i64;
    let k0 = (ell * x.1).ceil() as i64;
    let mi = m as i64;
    let n = p.n() as i64;
    if j0 - mi < 1 || k0 + mi > n || k0 - mi < 1 || j0 + mi > k0 - mi {
        return Err(HiveError::Range(format!(
            "window of half-width {m} at (j={j0}, k={k0}) leaves the index triangle of size {n}"
        )));
    }
    let (j0, k0) = (j0 as usize, k0 as usize);
    let centre = p.get(j0, k0);
    let w = 2 * m + 1;
    let s = ell.sqrt();
    let mut values = Vec::with_capacity(w * w);
    for a in 0..w {
        for b in 0..w {
            values.push(s * (p.get(j0 + a - m, k0 + b - m) - centre));
        }
    }
    Ok(Patch { origin: (j0, k0), m, values })
}

/// The two families of interlacing gaps inside a patch.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GapArrays {
    /// `lambda_{j,k+1} - lambda_{j,k}`, indexed `[p][q]` for `q < 2m`.
    pub level: Vec<f64>,
    /// `lambda_{j-1,k-1} - lambda_{j,k}`, indexed `[p][q]` for `p, q >= 1`.
    pub diagonal: Vec<f64>,
}

/// Interlacing gaps of a patch; all entries are nonnegative up to rounding.
pub fn interlacing_gap_array(patch: &Patch) -> GapArrays {
    let w = patch.width();
    let mut level = Vec::new();
    let mut diagonal = Vec::new();
    for a in 0..w {
        for b in 0..w {
            if b + 1 < w {
                level.push(patch.at(a, b + 1) - patch.at(a, b));
            }
            if a >= 1 && b >= 1 {
                diagonal.push(patch.at(a - 1, b - 1) - patch.at(a, b));
            }
        }
    }
    GapArrays { level, diagonal }
}

/// Settings for [`rigidity_report`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RigidityConfig {
    /// Envelope multiplier.
    pub multiplier: f64,
    /// Exponent of `log n` in the envelope.
    pub log_power: f64,
    /// Value unit: deviations are divided by it before comparison. For
    /// spectra from [`sample_gue`] this is `sqrt(variance_param)`.
    pub unit: f64,
}

impl Default for RigidityConfig {
    fn default() -> Self {
        Self { multiplier: 1.0, log_power: 1.0, unit: 1.0 }
    }
}

/// Per-index fluctuation summary of a family of spectra.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RigidityReport {
    pub n: usize,
    pub samples: usize,
    pub mean: Vec<f64>,
    /// Mean absolute deviation from the per-index mean, in units.
    pub deviation: Vec<f64>,
    /// `multiplier * n^{1/3} min(i, n-i+1)^{-1/3} (log n)^p`.
    pub envelope: Vec<f64>,
    /// 1-based indices whose deviation exceeds the envelope.
    pub flagged: Vec<usize>,
}

/// Compare per-index eigenvalue fluctuations with the rigidity envelope.
pub fn rigidity_report(samples: &[Spectrum], cfg: &RigidityConfig) -> Result<RigidityReport> {
    if samples.len() < 30 {
        return Err(HiveError::Statistics(format!("need at least 30 samples, got {}", samples.len())));
    }
    let n = samples[0].len();
    if n == 0 || samples.iter().any(|s| s.len() != n) {
        return Err(HiveError::Statistics("samples must share a positive length".into()));
    }
    let t = samples.len() as f64;
    let mean: Vec<f64> = (0..n).map(|i| samples.iter().map(|s| s.values[i]).sum::<f64>() / t).collect();
    let deviation: Vec<f64> = (0..n)
        .map(|i| samples.iter().map(|s| (s.values[i] - mean[i]).abs()).sum::<f64>() / t / cfg.unit)
        .collect();
    let nf = n as f64;
    let logn = nf.ln().max(1.0);
    let envelope: Vec<f64> = (1..=n)
        .map(|i| {
            let edge = i.min(n - i + 1) as f64;
            cfg.multiplier * nf.cbrt() * edge.powf(-1.0 / 3.0) * logn.powf(cfg.log_power)
        })
        .collect();
    let flagged = (0..n).filter(|&i| deviation[i] > envelope[i]).map(|i| i + 1).collect();
    Ok(RigidityReport { n, samples: samples.len(), mean, deviation, envelope, flagged })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn arrowhead_matches_dense() {
        let d = [3.0, 1.0, -0.5];
        let z = [0.4, -1.2, 0.7];
        let c = 0.25;
        let mut m = vec![Complex64::new(0.0, 0.0); 16];
        for i in 0..3 {
            m[i * 4 + i] = Complex64::new(d[i], 0.0);
            m[i * 4 + 3] = Complex64::new(z[i], 0.0);
            m[3 * 4 + i] = Complex64::new(z[i], 0.0);
        }
        m[15] = Complex64::new(c, 0.0);
        let dense = hermitian_eigen(&m, 4, false).unwrap().values;
        let w: Vec<f64> = z.iter().map(|x| x * x).collect();
        let arrow = arrowhead_eigenvalues(&d, &w, c);
        for (a, b) in dense.iter().zip(&arrow) {
            assert!((a - b).abs() < 1e-12, "{dense:?} vs {arrow:?}");
        }
    }

    #[test]
    fn quantile_inverts_cdf() {
        for p in [0.1, 0.25, 0.5, 0.9] {
            assert!((semicircle_cdf(semicircle_quantile(p)) - p).abs() < 1e-12);
        }
    }
}
