//! The field `k~` on `{0..n}^2` and the weights it induces.

use serde::{Deserialize, Serialize};

use super::geometry::{ExcavationHexagon, Pt};
use super::{BorderTriangle, Lozenge};
use crate::error::{HiveError, Result};
use crate::hive::{GTPattern, Hive, LargeGapTuple};

/// Values of `k~` on `{0..n}^2`, assembled from two hives glued along the
/// anti-diagonal `x + y = n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightField {
    pub n: i64,
    /// `values[y * (n + 1) + x]`.
    pub values: Vec<f64>,
}

impl WeightField {
    pub fn from_fn(n: i64, f: impl Fn(i64, i64) -> f64) -> Self {
        let mut values = Vec::with_capacity(((n + 1) * (n + 1)) as usize);
        for y in 0..=n {
            for x in 0..=n {
                values.push(f(x, y));
            }
        }
        Self { n, values }
    }

    /// Field built from an upper pattern `mu`, a lower pattern `lambda` and a
    /// large-gap tuple:
    ///
    /// * below the anti-diagonal, `k~(x, y) = P(n-x) + lambda_{1,n-x} + ... + lambda_{y,n-x}`;
    /// * above it, `k~(x, y) = P(y) + (lambda row sum)_y + mu_{1,y} + ... + mu_{x+y-n,y}`,
    ///
    /// where `P(r) = Lambda_1 + ... + Lambda_r`. The two hives agree on the
    /// anti-diagonal.
    pub fn from_patterns(g_up: &GTPattern, g_lo: &GTPattern, big: &LargeGapTuple) -> Result<Self> {
        let n = g_lo.n();
        if g_up.n() != n || big.n() != n {
            return Err(HiveError::Parameter(format!(
                "sizes differ: upper {}, lower {}, tuple {}",
                g_up.n(),
                n,
                big.n()
            )));
        }
        let mut p = vec![0.0; n + 1];
        for r in 1..=n {
            p[r] = p[r - 1] + big.values.values[r - 1];
        }
        let n = n as i64;
        Ok(Self::from_fn(n, |x, y| {
            if x + y <= n {
                let r = (n - x) as usize;
                p[r] + g_lo.prefix(y as usize, r)
            } else {
                let b = y as usize;
                p[b] + g_lo.prefix(b, b) + g_up.prefix((x + y - n) as usize, b)
            }
        }))
    }

    /// Field from a hive `k` placed on `x + y >= n` and a hive `k'` placed on
    /// `x + y <= n`: `k~(x, y) = k(x+y-n, y)` above and `k'(y, n-x)` below.
    pub fn from_hives(k: &Hive, k_prime: &Hive) -> Result<Self> {
        if k.n != k_prime.n {
            return Err(HiveError::Validation(format!("hive sizes differ: {} vs {}", k.n, k_prime.n)));
        }
        let n = k.n;
        let scale = k.values.iter().chain(&k_prime.values).fold(1.0f64, |a, v| a.max(v.abs()));
        for y in 0..=n {
            let (a, b) = (k.get(0, y), k_prime.get(y, y));
            if (a - b).abs() > 1e-9 * scale {
                return Err(HiveError::Validation(format!(
                    "hives disagree on the shared edge at {y}: {a} vs {b}"
                )));
            }
        }
        let n = n as i64;
        Ok(Self::from_fn(n, |x, y| {
            if x + y >= n {
                k.get((x + y - n) as usize, y as usize)
            } else {
                k_prime.get(y as usize, (n - x) as usize)
            }
        }))
    }

    /// The two hives `(k, k')` this field is glued from.
    pub fn hives(&self) -> (Hive, Hive) {
        let n = self.n;
        let k = Hive::from_fn(n as usize, |a, b| self.k((n + a as i64 - b as i64, b as i64)));
        let kp = Hive::from_fn(n as usize, |i, j| self.k((n - j as i64, i as i64)));
        (k, kp)
    }

    pub fn in_range(&self, p: Pt) -> bool {
        p.0 >= 0 && p.1 >= 0 && p.0 <= self.n && p.1 <= self.n
    }

    /// `k~(p)`; panics outside `{0..n}^2`.
    pub fn k(&self, p: Pt) -> f64 {
        assert!(self.in_range(p), "point {p:?} outside the field");
        self.values[(p.1 * (self.n + 1) + p.0) as usize]
    }

    fn try_k(&self, p: Pt) -> Result<f64> {
        if self.in_range(p) {
            Ok(self.k(p))
        } else {
            Err(HiveError::Range(format!("point {p:?} outside {{0..{}}}^2", self.n)))
        }
    }

    /// `(k~(A) + k~(C) - k~(B) - k~(D)) / 3`.
    pub fn lozenge_weight(&self, l: &Lozenge) -> Result<f64> {
        let [a, b, c, d] = l.vertices();
        Ok((self.try_k(a)? + self.try_k(c)? - self.try_k(b)? - self.try_k(d)?) / 3.0)
    }

    /// `(k~(B) - k~(A)) / 3`.
    pub fn triangle_weight(&self, t: &BorderTriangle) -> Result<f64> {
        if t.k < 0 || t.k >= self.n {
            return Err(HiveError::Range(format!("border index {} outside 0..{}", t.k, self.n)));
        }
        let [a, b, _] = t.vertices(self.n);
        Ok((self.k(b) - self.k(a)) / 3.0)
    }

    /// `(k~(B) + k~(C) - k~(D) + k~(E) + k~(F)) / 3`.
    pub fn hex_weight(&self, h: &ExcavationHexagon) -> f64 {
        (self.k(h.b()) + self.k(h.c()) - self.k(h.d()) + self.k(h.e()) + self.k(h.f())) / 3.0
    }

    /// `(-k~(A) + 2 k~(B) + 2 k~(F)) / 3`.
    pub fn hex_weight_alt(&self, h: &ExcavationHexagon) -> f64 {
        (-self.k(h.a()) + 2.0 * self.k(h.b()) + 2.0 * self.k(h.f())) / 3.0
    }
}
