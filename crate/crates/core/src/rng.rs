//! Seedable, splittable randomness and the subset samplers built on it.
//!
//! The generator is a counter-based SplitMix64: the state never branches, so
//! identical `(seed, stream-id)` pairs reproduce identical sequences on every
//! platform. Splitting derives a child key by mixing the parent key with the
//! child index, which keeps streams pairwise distinct without coordination.

use crate::error::{CoreError, Result};

/// SplitMix64 finalization (deterministic 64-bit mixer).
#[inline]
#[must_use]
pub fn mix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

const GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

/// A splittable random stream identified by `(seed, stream-id)` where the
/// stream-id is the path of child indices taken from the root.
#[derive(Clone, Debug)]
pub struct RngStream {
    key: u64,
    ctr: u64,
    seed: u64,
    path: Vec<u32>,
    children: u32,
}

impl RngStream {
    pub fn new(seed: u64) -> Self {
        RngStream {
            key: mix64(seed ^ 0x6A09_E667_F3BC_C909),
            ctr: 0,
            seed,
            path: Vec::new(),
            children: 0,
        }
    }

    /// Root seed this stream descends from.
    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Stream-id as a `/`-separated child-index path ("root" for the root).
    pub fn stream_id(&self) -> String {
        if self.path.is_empty() {
            "root".to_string()
        } else {
            self.path
                .iter()
                .map(|i| i.to_string())
                .collect::<Vec<_>>()
                .join("/")
        }
    }

    /// Deterministic child stream with an explicit index.
    pub fn child(&self, index: u32) -> RngStream {
        let mut path = self.path.clone();
        path.push(index);
        RngStream {
            key: mix64(self.key ^ mix64(GAMMA ^ u64::from(index).wrapping_mul(0xD6E8_FEB8_6659_FD93))),
            ctr: 0,
            seed: self.seed,
            path,
            children: 0,
        }
    }

    /// Next unused child; advances the parent's child counter only.
    pub fn split(&mut self) -> RngStream {
        let c = self.children;
        self.children += 1;
        self.child(c)
    }

    #[inline]
    pub fn next_u64(&mut self) -> u64 {
        let c = self.ctr;
        self.ctr = self.ctr.wrapping_add(1);
        mix64(self.key.wrapping_add(c.wrapping_mul(GAMMA)))
    }

    /// Uniform in `[0, n)`. Rejection-based, bias-free.
    #[inline]
    pub fn below(&mut self, n: u64) -> u64 {
        debug_assert!(n > 0);
        if n.is_power_of_two() {
            return self.next_u64() & (n - 1);
        }
        let zone = u64::MAX - u64::MAX % n;
        loop {
            let v = self.next_u64();
            if v < zone {
                return v % n;
            }
        }
    }

    #[inline]
    pub fn bernoulli_half(&mut self) -> bool {
        self.next_u64() & 1 == 1
    }

    pub fn f64(&mut self) -> f64 {
        const DEN: f64 = (1u64 << 53) as f64;
        ((self.next_u64() >> 11) as f64) / DEN
    }

    /// Bernoulli(p) for a probability given as an f64 in [0,1].
    pub fn bernoulli(&mut self, p: f64) -> bool {
        self.f64() < p
    }
}

/// Exact `Bin(m, 1/2)`: popcount of `m` fair bits.
pub fn binomial_half(m: u64, rng: &mut RngStream) -> u64 {
    let mut total = 0u64;
    let mut left = m;
    while left >= 64 {
        total += u64::from(rng.next_u64().count_ones());
        left -= 64;
    }
    if left > 0 {
        let mask = (1u64 << left) - 1;
        total += u64::from((rng.next_u64() & mask).count_ones());
    }
    total
}

/// `Bin(n, 2^-i)` by `i` rounds of fair-coin thinning. Exact.
///
/// Also reports the number of elementary sampling steps taken, which the
/// uncoloured estimator charges against its sampling budget.
pub fn sample_binomial_steps(n: u64, i: u32, rng: &mut RngStream) -> (u64, u64) {
    let mut cur = n;
    for _ in 0..i {
        cur = binomial_half(cur, rng);
    }
    (cur, u64::from(i.max(1)))
}

/// `Bin(n, 2^-i)`.
pub fn sample_binomial(n: u64, i: u32, rng: &mut RngStream) -> u64 {
    sample_binomial_steps(n, i, rng).0
}

/// Uniformly random size-`s` subset of `set`.
///
/// Hash-set rejection sampling capped at `64·s·ln(|set|+2)` draws, then a
/// partial Fisher-Yates shuffle; both stages produce the uniform distribution.
pub fn uniform_k_subset(set: &[u32], s: usize, rng: &mut RngStream) -> Result<Vec<u32>> {
    uniform_k_subset_steps(set, s, rng).map(|(v, _)| v)
}

pub fn uniform_k_subset_steps(
    set: &[u32],
    s: usize,
    rng: &mut RngStream,
) -> Result<(Vec<u32>, u64)> {
    let n = set.len();
    if s > n {
        return Err(CoreError::pre(format!(
            "uniform_k_subset: requested {s} elements from a set of {n}"
        )));
    }
    if s == 0 {
        return Ok((Vec::new(), 1));
    }
    if s == n {
        return Ok((set.to_vec(), n as u64));
    }
    let cap = (64.0 * s as f64 * ((n + 2) as f64).ln()).ceil() as u64;
    let mut chosen = std::collections::HashSet::with_capacity(s * 2);
    let mut out = Vec::with_capacity(s);
    let mut steps = 0u64;
    while out.len() < s && steps < cap {
        steps += 1;
        let idx = rng.below(n as u64) as usize;
        if chosen.insert(idx) {
            out.push(set[idx]);
        }
    }
    if out.len() < s {
        // Shuffle-prefix fallback.
        let mut pool: Vec<u32> = set.to_vec();
        for j in 0..s {
            let pick = j + rng.below((n - j) as u64) as usize;
            pool.swap(j, pick);
            steps += 1;
        }
        pool.truncate(s);
        pool.sort_unstable();
        return Ok((pool, steps));
    }
    out.sort_unstable();
    Ok((out, steps))
}

/// Random subset of `[1, n]` including each element with probability `2^-i`.
///
/// Naive per-element coins for `i <= 2`; for `i >= 3` a binomial size draw
/// followed by a uniform subset of that size.
pub fn sample_subset(n: u64, i: u32, rng: &mut RngStream) -> Vec<u32> {
    sample_subset_steps(n, i, rng).0
}

/// As [`sample_subset`] but also reports elementary sampling steps.
pub fn sample_subset_steps(n: u64, i: u32, rng: &mut RngStream) -> (Vec<u32>, u64) {
    if i == 0 {
        return ((1..=n as u32).collect(), n.max(1));
    }
    if i <= 2 {
        let mut out = Vec::with_capacity((n >> i) as usize + 8);
        let mask = (1u64 << i) - 1;
        for v in 1..=n as u32 {
            if rng.next_u64() & mask == 0 {
                out.push(v);
            }
        }
        return (out, n.max(1));
    }
    let (size, bin_steps) = sample_binomial_steps(n, i, rng);
    let universe: Vec<u32> = (1..=n as u32).collect();
    let (mut out, pick_steps) =
        uniform_k_subset_steps(&universe, size as usize, rng).expect("size <= n by construction");
    out.sort_unstable();
    (out, bin_steps + pick_steps)
}

/// Random subset of `set` including each element with probability `2^-i`;
/// the set-valued analogue of [`sample_subset`].
pub fn subsample_set(set: &[u32], i: u32, rng: &mut RngStream) -> Vec<u32> {
    if i == 0 {
        return set.to_vec();
    }
    if i <= 2 {
        let mask = (1u64 << i) - 1;
        return set.iter().copied().filter(|_| rng.next_u64() & mask == 0).collect();
    }
    let size = sample_binomial(set.len() as u64, i, rng) as usize;
    uniform_k_subset(set, size, rng).expect("size <= |set| by construction")
}

/// Assign each element of `universe` a uniform independent colour in `[k]`,
/// returning the k classes.
pub fn uniform_k_partition(universe: &[u32], k: usize, rng: &mut RngStream) -> Vec<Vec<u32>> {
    assert!(k >= 1, "uniform_k_partition: k must be at least 1");
    let mut classes = vec![Vec::new(); k];
    for &v in universe {
        let c = rng.below(k as u64) as usize;
        classes[c].push(v);
    }
    classes
}
