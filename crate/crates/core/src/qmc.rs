//! Randomized low-discrepancy points in the unit cube.
//!
//! Halton points in bases 2, 3 and 5, each replicate shifted by an independent
//! uniform vector modulo 1 (Cranley-Patterson). Replicate means are unbiased
//! and their spread gives the error estimate.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const BASES: [u64; 3] = [2, 3, 5];

#[derive(Debug, Clone)]
pub struct ShiftedSequence {
    shift: [f64; 3],
}

fn radical_inverse(mut n: u64, base: u64) -> f64 {
    let inv = 1.0 / base as f64;
    let mut f = inv;
    let mut v = 0.0;
    while n > 0 {
        v += (n % base) as f64 * f;
        n /= base;
        f *= inv;
    }
    v
}

impl ShiftedSequence {
    pub fn new(shift: [f64; 3]) -> Self {
        ShiftedSequence { shift }
    }

    /// One independent shift per replicate, drawn from `seed`.
    pub fn replicates(seed: u64, count: usize) -> Vec<Self> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..count).map(|_| Self::new([rng.gen(), rng.gen(), rng.gen()])).collect()
    }

    pub fn point(&self, n: u64) -> [f64; 3] {
        let mut out = [0.0; 3];
        for d in 0..3 {
            let v = self.shift[d] + radical_inverse(n + 1, BASES[d]);
            out[d] = v - v.floor();
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn radical_inverse_digits() {
        assert_eq!(radical_inverse(1, 2), 0.5);
        assert_eq!(radical_inverse(6, 2), 0.375);
        assert!((radical_inverse(5, 3) - 7.0 / 9.0).abs() < 1e-15);
    }

    #[test]
    fn integrates_smooth_function() {
        for s in ShiftedSequence::replicates(7, 4) {
            let n = 20_000;
            let mean: f64 = (0..n)
                .map(|i| {
                    let p = s.point(i);
                    p[0] * p[1] + p[2] * p[2]
                })
                .sum::<f64>()
                / n as f64;
            assert!((mean - (0.25 + 1.0 / 3.0)).abs() < 3e-4, "{mean}");
        }
    }
}
