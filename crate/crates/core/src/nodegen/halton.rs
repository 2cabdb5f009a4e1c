//! Halton low-discrepancy sequence.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::geometry::{BoundingBox, Point};

const BASES: [u64; 3] = [2, 3, 5];

/// Van der Corput radical inverse of `i` in `base`.
pub fn radical_inverse(mut i: u64, base: u64) -> f64 {
    let inv = 1.0 / base as f64;
    let mut f = inv;
    let mut r = 0.0;
    while i > 0 {
        r += f * (i % base) as f64;
        i /= base;
        f *= inv;
    }
    r
}

/// Index of the first point used for `seed`. Seed 0 starts the sequence
/// at its beginning; other seeds start at a pseudo-random index.
pub fn start_index(seed: u64) -> u64 {
    if seed == 0 {
        0
    } else {
        ChaCha8Rng::seed_from_u64(seed ^ 0x4a41_4c54_4f4e_0001).random_range(1..1u64 << 32)
    }
}

/// `n` consecutive Halton points (bases 2, 3 and 5) mapped into `bbox`,
/// starting at [`start_index`]`(seed) + 1`.
pub fn halton(seed: u64, n: usize, dim: usize, bbox: &BoundingBox) -> Vec<Point> {
    let start = start_index(seed);
    (0..n as u64)
        .map(|i| {
            let mut p = [0.0; 3];
            for k in 0..dim {
                let u = radical_inverse(start + i + 1, BASES[k]);
                p[k] = bbox.lo[k] + u * (bbox.hi[k] - bbox.lo[k]);
            }
            p
        })
        .collect()
}
