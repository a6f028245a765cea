//! Calibrates the `L^2` stopping constant of the dyadic decomposition.
//!
//! For every cube down to level `K` of every corpus function and every
//! `eps` in the list, a cube whose sup deviation from its best affine fit
//! exceeds `eps * side` must not pass the stopping rule, so the constant has
//! to stay below `residual / eps^4` for all such cubes. The printed value is
//! the largest power of two under the smallest such bound.
//!
//! Usage: `cargo run --release --example calibrate_c_hat [functions] [seed]`

use hivelab::qdiff::{best_l2_linear, normalized_residual, DyadicCube, RandomLipschitz, DIM};
use rayon::prelude::*;

const K: u32 = 5;
const EPS: [f64; 6] = [0.1, 0.2, 0.3, 0.5, 0.7, 1.0];

fn cubes(k: u32) -> Vec<DyadicCube> {
    (0..=k)
        .flat_map(|l| (0..1u64 << l).flat_map(move |i| (0..1u64 << l).map(move |j| DyadicCube { level: l, index: (i, j) })))
        .collect()
}

fn main() {
    let args: Vec<u64> = std::env::args().skip(1).map(|a| a.parse().expect("integer argument")).collect();
    let count = args.first().copied().unwrap_or(10_000);
    let seed = args.get(1).copied().unwrap_or(0x5eed);
    let all = cubes(K);
    let bound = (0..count)
        .into_par_iter()
        .map(|i| {
            let f = RandomLipschitz::draw(seed.wrapping_mul(1_000_003).wrapping_add(i)).sample(K);
            let mut best = f64::INFINITY;
            for q in &all {
                let s = f.samples_in(q).expect("cube inside the grid");
                let l = best_l2_linear(&f, q).expect("full-rank grid");
                let sup = s.iter().map(|&(x, y, v)| (v - l.at(x, y)).abs()).fold(0.0, f64::max);
                let a = normalized_residual(&s, &l, q);
                for e in EPS {
                    if sup > e * q.side() {
                        best = best.min(a / e.powi(DIM as i32 + 2));
                    }
                }
            }
            best
        })
        .reduce(|| f64::INFINITY, f64::min);
    let c_hat = bound.log2().floor().exp2();
    let c_hat = if c_hat < bound { c_hat } else { c_hat / 2.0 };
    println!("functions {count}, smallest bound {bound:e}, c_hat = 2^{} = {c_hat:e}", c_hat.log2());
}
