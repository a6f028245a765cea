//! Dense Hermitian eigensolver: Householder reduction to a real symmetric
//! tridiagonal matrix followed by implicit-shift QL iteration.

use num_complex::Complex64;

use crate::error::{HiveError, Result};

/// Eigen-decomposition of a Hermitian matrix.
#[derive(Debug, Clone)]
pub struct HermitianEigen {
    /// Eigenvalues, non-increasing; ties keep the order produced by the
    /// iteration (index order).
    pub values: Vec<f64>,
    /// Column-major unit eigenvectors: entry `vectors[k * n + i]` is the i-th
    /// component of the k-th eigenvector.
    pub vectors: Option<Vec<Complex64>>,
}

/// Decompose the `n x n` Hermitian matrix stored row-major in `a`.
///
/// Only the lower triangle is read. Fails with a numerical error if the QL
/// iteration exceeds `64 * n` sweeps in total.
pub fn hermitian_eigen(a: &[Complex64], n: usize, want_vectors: bool) -> Result<HermitianEigen> {
    if a.len() != n * n {
        return Err(HiveError::Parameter(format!(
            "matrix storage has {} entries, expected {}",
            a.len(),
            n * n
        )));
    }
    if n == 0 {
        return Ok(HermitianEigen { values: vec![], vectors: want_vectors.then(Vec::new) });
    }
    let mut w: Vec<Complex64> = a.to_vec();
    // Mirror the lower triangle so the working copy is exactly Hermitian.
    for i in 0..n {
        w[i * n + i] = Complex64::new(w[i * n + i].re, 0.0);
        for j in 0..i {
            w[j * n + i] = w[i * n + j].conj();
        }
    }

    let mut reflectors: Vec<Vec<Complex64>> = Vec::with_capacity(n.saturating_sub(2));
    let mut off = vec![Complex64::new(0.0, 0.0); n];
    for k in 0..n.saturating_sub(1) {
        let m = n - k - 1;
        let x: Vec<Complex64> = (0..m).map(|t| w[(k + 1 + t) * n + k]).collect();
        let xnorm = x.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if m == 1 || xnorm == 0.0 {
            off[k] = x[0];
            reflectors.push(Vec::new());
            continue;
        }
        let phase = if x[0].norm() > 0.0 { x[0] / x[0].norm() } else { Complex64::new(1.0, 0.0) };
        let alpha = -phase * xnorm;
        let mut v = x;
        v[0] -= alpha;
        let vnorm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        for z in v.iter_mut() {
            *z /= vnorm;
        }
        // S <- H S H with H = I - 2 v v*, as a rank-two update.
        let base = k + 1;
        let mut p = vec![Complex64::new(0.0, 0.0); m];
        for i in 0..m {
            let row = (base + i) * n + base;
            let mut acc = Complex64::new(0.0, 0.0);
            for j in 0..m {
                acc += w[row + j] * v[j];
            }
            p[i] = acc;
        }
        let kappa: f64 = v.iter().zip(&p).map(|(vi, pi)| (vi.conj() * pi).re).sum();
        let q: Vec<Complex64> = p.iter().zip(&v).map(|(pi, vi)| 2.0 * pi - 2.0 * kappa * vi).collect();
        for i in 0..m {
            let row = (base + i) * n + base;
            for j in 0..m {
                w[row + j] -= v[i] * q[j].conj() + q[i] * v[j].conj();
            }
        }
        off[k] = alpha;
        reflectors.push(v);
    }

    let mut d: Vec<f64> = (0..n).map(|i| w[i * n + i].re).collect();
    // Unitary diagonal scaling that makes the off-diagonal real and nonnegative.
    let mut phases = vec![Complex64::new(1.0, 0.0); n];
    let mut e = vec![0.0; n];
    for k in 0..n - 1 {
        let t = off[k];
        let r = t.norm();
        e[k] = r;
        phases[k + 1] = if r > 0.0 { phases[k] * (t / r) } else { phases[k] };
    }

    let mut z = if want_vectors {
        let mut id = vec![0.0; n * n];
        for i in 0..n {
            id[i * n + i] = 1.0;
        }
        Some(id)
    } else {
        None
    };
    tridiagonal_ql(&mut d, &mut e, z.as_deref_mut(), 64 * n)?;

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&x, &y| d[y].total_cmp(&d[x]).then(x.cmp(&y)));
    let values: Vec<f64> = order.iter().map(|&i| d[i]).collect();

    let vectors = z.map(|z| {
        // Q = H_0 H_1 ... accumulated explicitly, then V = Q D Z.
        let mut qm = vec![Complex64::new(0.0, 0.0); n * n];
        for i in 0..n {
            qm[i * n + i] = Complex64::new(1.0, 0.0);
        }
        for (k, v) in reflectors.iter().enumerate() {
            if v.is_empty() {
                continue;
            }
            let base = k + 1;
            let m = v.len();
            for r in 0..n {
                let row = r * n + base;
                let mut s = Complex64::new(0.0, 0.0);
                for j in 0..m {
                    s += qm[row + j] * v[j];
                }
                for j in 0..m {
                    qm[row + j] -= 2.0 * s * v[j].conj();
                }
            }
        }
        let mut out = vec![Complex64::new(0.0, 0.0); n * n];
        for (col, &src) in order.iter().enumerate() {
            for r in 0..n {
                let mut s = Complex64::new(0.0, 0.0);
                for j in 0..n {
                    s += qm[r * n + j] * phases[j] * z[j * n + src];
                }
                out[col * n + r] = s;
            }
        }
        out
    });
    Ok(HermitianEigen { values, vectors })
}

/// Implicit-shift QL on a symmetric tridiagonal matrix with diagonal `d` and
/// off-diagonal `e` (`e[i]` couples rows `i` and `i + 1`). Rotations are
/// accumulated into the row-major matrix `z` when supplied.
pub fn tridiagonal_ql(d: &mut [f64], e: &mut [f64], mut z: Option<&mut [f64]>, cap: usize) -> Result<()> {
    let n = d.len();
    if n == 0 {
        return Ok(());
    }
    e[n - 1] = 0.0;
    let mut sweeps = 0usize;
    for l in 0..n {
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            sweeps += 1;
            if sweeps > cap {
                return Err(HiveError::Numerical {
                    what: format!("QL iteration did not converge at index {l}"),
                    iterations: sweeps,
                    residual: e[l].abs(),
                });
            }
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let (mut s, mut c, mut p) = (1.0f64, 1.0f64, 0.0f64);
            let mut i = m;
            let mut deflated = false;
            while i > l {
                i -= 1;
                let f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    deflated = true;
                    break;
                }
                s = f / r;
                c = g / r;
                let gg = d[i + 1] - p;
                r = (d[i] - gg) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = gg + p;
                g = c * r - b;
                if let Some(z) = z.as_deref_mut() {
                    for k in 0..n {
                        let t = z[k * n + i + 1];
                        z[k * n + i + 1] = s * z[k * n + i] + c * t;
                        z[k * n + i] = c * z[k * n + i] - s * t;
                    }
                }
            }
            if deflated {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn two_by_two_swap() {
        let a = vec![c(0.0, 0.0), c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)];
        let r = hermitian_eigen(&a, 2, false).unwrap();
        assert!((r.values[0] - 1.0).abs() < 1e-14);
        assert!((r.values[1] + 1.0).abs() < 1e-14);
    }

    #[test]
    fn complex_residuals_small() {
        let n = 5;
        let mut a = vec![c(0.0, 0.0); n * n];
        for i in 0..n {
            for j in 0..=i {
                let v = if i == j { c(i as f64 - 1.5, 0.0) } else { c(0.3 * (i + j) as f64, 0.7 - 0.2 * i as f64) };
                a[i * n + j] = v;
                a[j * n + i] = v.conj();
            }
        }
        let r = hermitian_eigen(&a, n, true).unwrap();
        let v = r.vectors.unwrap();
        for k in 0..n {
            for i in 0..n {
                let mut s = c(0.0, 0.0);
                for j in 0..n {
                    s += a[i * n + j] * v[k * n + j];
                }
                assert!((s - r.values[k] * v[k * n + i]).norm() < 1e-12);
            }
        }
    }
}
