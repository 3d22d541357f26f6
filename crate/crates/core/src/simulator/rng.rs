//! Counter-based randomness: every vertex key is a hash of its parent's key and
//! the child index, and every draw is a hash of the key and a stream constant.
//! Marks are therefore pure functions of `(seed, vertex path)`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;
const STREAM_SPLIT: u64 = 0x243F_6A88_85A3_08D3;
const STREAM_DIR: u64 = 0x1319_8A2E_0370_7344;
const STREAM_EXP: u64 = 0xA409_3822_299F_31D0;

/// SplitMix64 finalizer.
#[inline]
pub fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(GOLDEN);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Uniform on the open interval `(0, 1)` from 52 high bits.
#[inline]
pub fn to_unit(bits: u64) -> f64 {
    ((bits >> 12) as f64 + 0.5) * (1.0 / (1u64 << 52) as f64)
}

/// Exp(1) by inversion.
#[inline]
pub fn exp_from_unit(u: f64) -> f64 {
    -u.ln()
}

pub fn root_key(seed: u64) -> u64 {
    mix(seed ^ 0x5851_F42D_4C95_7F2D)
}

/// Key of child `1` or `2`.
#[inline]
pub fn child_key(parent: u64, child: u8) -> u64 {
    mix(parent ^ (child as u64).wrapping_mul(GOLDEN).rotate_left(17))
}

/// Key for the `i`th independent replica under `seed`.
pub fn replica_key(seed: u64, i: u64) -> u64 {
    mix(root_key(seed) ^ mix(i.wrapping_add(0xD1B5_4A32_D192_ED03)))
}

/// Sequential generator for one replica of a Monte Carlo experiment.
pub fn replica_rng(seed: u64, i: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(replica_key(seed, i))
}

/// The three marks attached to a vertex.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VertexMark {
    pub u_split: f64,
    pub u_dir: f64,
    pub e: f64,
}

/// Source of vertex marks, keyed by the vertex hash.
pub trait MarkSource: Sync {
    fn mark(&self, key: u64) -> VertexMark;
}

/// The default source: three independent streams of the counter hash.
#[derive(Debug, Clone, Copy, Default)]
pub struct HashMarks;

impl MarkSource for HashMarks {
    #[inline]
    fn mark(&self, key: u64) -> VertexMark {
        VertexMark {
            u_split: to_unit(mix(key ^ STREAM_SPLIT)),
            u_dir: to_unit(mix(key ^ STREAM_DIR)),
            e: exp_from_unit(to_unit(mix(key ^ STREAM_EXP))),
        }
    }
}

/// The same marks at every vertex; for walking the recursion by hand.
#[derive(Debug, Clone, Copy)]
pub struct FixedMarks(pub VertexMark);

impl MarkSource for FixedMarks {
    fn mark(&self, _key: u64) -> VertexMark {
        self.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn units_are_open_and_uniform() {
        assert!(to_unit(0) > 0.0 && to_unit(u64::MAX) < 1.0);
        let n = 200_000u64;
        let mut sum = 0.0;
        let mut buckets = [0u32; 10];
        for i in 0..n {
            let u = to_unit(mix(i));
            sum += u;
            buckets[(u * 10.0) as usize] += 1;
        }
        assert!((sum / n as f64 - 0.5).abs() < 0.005);
        let chi2: f64 = buckets.iter().map(|&b| (b as f64 - n as f64 / 10.0).powi(2) / (n as f64 / 10.0)).sum();
        assert!(chi2 < 27.9, "chi2 = {chi2}");
    }

    #[test]
    fn streams_and_children_are_distinct() {
        let k = root_key(7);
        let m = HashMarks.mark(k);
        assert_ne!(m.u_split, m.u_dir);
        assert_ne!(child_key(k, 1), child_key(k, 2));
        assert_eq!(HashMarks.mark(child_key(k, 1)), HashMarks.mark(child_key(k, 1)));
        assert_ne!(root_key(7), root_key(8));
    }

    #[test]
    fn exponential_mean_is_one() {
        let n = 100_000u64;
        let mean: f64 = (0..n).map(|i| HashMarks.mark(mix(i)).e).sum::<f64>() / n as f64;
        assert!((mean - 1.0).abs() < 0.015);
    }
}
