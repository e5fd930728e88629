//! Deterministic counter-based PRNG.
//!
//! Every random choice in the crate flows through [`Stream`], so any
//! experiment is reproducible from (command line, seed) alone. The generator
//! is bit-exact across platforms: draw `j` of the stream derived from
//! `(seed, index)` is `finalize(seed ^ (index + j) * GOLDEN_GAMMA)` where
//! `finalize` is the xor-shift-multiply avalanche below.
//!
//! Nested experiments derive independent child seeds with [`subseed`] rather
//! than adjacent indices, so sibling streams never share draws.

pub const GOLDEN_GAMMA: u64 = 0x9E3779B97F4A7C15;

/// Xor-shift-multiply avalanche.
pub fn finalize(mut z: u64) -> u64 {
    z ^= z >> 30;
    z = z.wrapping_mul(0xBF58476D1CE4E5B9);
    z ^= z >> 27;
    z = z.wrapping_mul(0x94D049BB133111EB);
    z ^ (z >> 31)
}

/// Derive an independent 64-bit seed for a tagged child experiment.
pub fn subseed(seed: u64, tag: u64) -> u64 {
    finalize(seed ^ tag.wrapping_mul(GOLDEN_GAMMA))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Stream {
    seed: u64,
    index: u64,
}

impl Stream {
    pub fn derive(seed: u64, index: u64) -> Stream {
        Stream { seed, index }
    }

    pub fn next_u64(&mut self) -> u64 {
        let v = finalize(self.seed ^ self.index.wrapping_mul(GOLDEN_GAMMA));
        self.index = self.index.wrapping_add(1);
        v
    }

    /// Uniform draw in 0..n via rejection (n >= 1).
    pub fn next_below(&mut self, n: u64) -> u64 {
        assert!(n >= 1);
        if n.is_power_of_two() {
            return self.next_u64() & (n - 1);
        }
        let zone = u64::MAX - (u64::MAX % n);
        loop {
            let v = self.next_u64();
            if v < zone {
                return v % n;
            }
        }
    }

    /// Uniform in [0,1) with 53 bits of precision.
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Sorted random k-subset of 0..n (Floyd's algorithm).
    pub fn subset(&mut self, n: u64, k: usize) -> Vec<u64> {
        assert!(k as u64 <= n);
        let mut chosen = std::collections::BTreeSet::new();
        for j in (n - k as u64)..n {
            let t = self.next_below(j + 1);
            if !chosen.insert(t) {
                chosen.insert(j);
            }
        }
        chosen.into_iter().collect()
    }
}

/// Worker cap for parallel searches: EXLAB_THREADS if set, else all cores.
pub fn worker_count() -> usize {
    #[cfg(target_family = "wasm")]
    {
        1
    }
    #[cfg(not(target_family = "wasm"))]
    {
        if let Ok(v) = std::env::var("EXLAB_THREADS") {
            if let Ok(n) = v.parse::<usize>() {
                return n.max(1);
            }
        }
        std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1)
    }
}
