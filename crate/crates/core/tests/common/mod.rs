//! Reference implementations shared by the integration suites. Nothing here
//! goes through the crate's synthesis or simulation code.
#![allow(dead_code)]

use std::collections::BTreeMap;
use std::f64::consts::PI;

use diqft::StateVector;
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Dense inverse DFT: `out[x] = sum_y exp(-2 pi i x y / N) in[y] / sqrt(N)`.
pub fn inverse_dft(input: &[Complex64]) -> Vec<Complex64> {
    let dim = input.len();
    let scale = 1.0 / (dim as f64).sqrt();
    (0..dim)
        .map(|x| {
            input
                .iter()
                .enumerate()
                .map(|(y, a)| {
                    let phase = -2.0 * PI * ((x * y) % dim) as f64 / dim as f64;
                    a * Complex64::from_polar(scale, phase)
                })
                .sum()
        })
        .collect()
}

/// `(control, target, k)` multiset of the `t`-pruned `n`-qubit transform,
/// by direct pair enumeration.
pub fn pair_oracle(n: usize, t: Option<u32>) -> BTreeMap<(usize, usize, u32), usize> {
    let mut m = BTreeMap::new();
    for c in 0..n {
        for tg in c + 1..n {
            let k = (tg - c) as u32;
            if t.is_none_or(|t| k <= t) {
                *m.entry((c, tg, k)).or_default() += 1;
            }
        }
    }
    m
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn haar(n: usize, seed: u64) -> StateVector {
    StateVector::haar_random(n, &mut rng(seed)).unwrap()
}

pub fn max_abs_diff(a: &[Complex64], b: &[Complex64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}
