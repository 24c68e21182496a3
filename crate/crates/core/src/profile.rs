//! Run profiles: `theory` keeps every constant exactly as analysed; `fast`
//! swaps the constants (never the algorithms) for values that make desk-scale
//! statistical runs feasible. Every knob is overridable.

use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ProfileKind {
    Theory,
    Fast,
}

impl std::str::FromStr for ProfileKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "theory" => Ok(ProfileKind::Theory),
            "fast" => Ok(ProfileKind::Fast),
            other => Err(format!("unknown profile `{other}` (expected theory|fast)")),
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Profile {
    pub kind: ProfileKind,
    /// Fast-profile flat multiplier for the per-iteration sample counts
    /// `t_i = ⌈c_t · F_i⌉`.
    pub fast_ti_multiplier: f64,
    /// Fast-profile colour-coding constant: `t_cc = ⌈c_cc · k^k/k!⌉` (ln-free).
    pub fast_cc_multiplier: f64,
    /// Fast-profile SparseCount failure budget parameter.
    pub fast_sc_delta: f64,
    /// Fast-profile colourful-side median-boost repetition count (odd).
    pub fast_col_boost: u64,
    /// Fast-profile effective coarse factor used by the fine counter.
    pub fast_fine_b: f64,
    /// Fast-profile inner failure budget for sub-counters.
    pub fast_inner_delta: f64,
}

impl Profile {
    pub fn theory() -> Self {
        Profile {
            kind: ProfileKind::Theory,
            fast_ti_multiplier: 16.0,
            fast_cc_multiplier: 16.0,
            fast_sc_delta: 1e-3,
            fast_col_boost: 3,
            fast_fine_b: 8.0,
            fast_inner_delta: 1e-3,
        }
    }

    pub fn fast() -> Self {
        Profile { kind: ProfileKind::Fast, ..Profile::theory() }
    }

    pub fn of(kind: ProfileKind) -> Self {
        match kind {
            ProfileKind::Theory => Profile::theory(),
            ProfileKind::Fast => Profile::fast(),
        }
    }

    pub fn is_theory(&self) -> bool {
        self.kind == ProfileKind::Theory
    }

    /// Number of random colourings inside SparseCount.
    /// Theory: `⌈e^{2k} · ln(|U| + 2)⌉`; fast: `⌈c_cc · k^k / k!⌉`.
    pub fn sparse_colourings(&self, k: u32, u_len: usize) -> u64 {
        match self.kind {
            ProfileKind::Theory => {
                let t = (2.0 * f64::from(k)).exp() * ((u_len as f64) + 2.0).ln();
                t.ceil() as u64
            }
            ProfileKind::Fast => {
                let mut ratio = 1.0f64; // k^k / k!
                for j in 1..=k {
                    ratio *= f64::from(k) / f64::from(j);
                }
                (self.fast_cc_multiplier * ratio).ceil() as u64
            }
        }
    }

    /// `ln(1/δ)` for the SparseCount failure budget.
    /// Theory: `δ = n^{-5k}/120`; fast: a flat small δ.
    pub fn sparse_delta_ln_inv(&self, n: u64, k: u32) -> f64 {
        match self.kind {
            ProfileKind::Theory => 5.0 * f64::from(k) * (n as f64).ln() + 120f64.ln(),
            ProfileKind::Fast => (1.0 / self.fast_sc_delta).ln(),
        }
    }

    /// Per-iteration sample count from the schedule's exact `log2 F_i`.
    /// Theory: `⌈ε^-2 · 10k² · 2^k · log n · F_i⌉`; fast: `⌈c_t · F_i⌉`.
    pub fn samples_per_iteration(&self, eps: f64, k: u32, log2_n: u32, log2_f: i64) -> u64 {
        let f = (log2_f as f64).exp2();
        match self.kind {
            ProfileKind::Theory => {
                let t = eps.powi(-2)
                    * 10.0
                    * f64::from(k)
                    * f64::from(k)
                    * f64::from(k).exp2()
                    * f64::from(log2_n)
                    * f;
                t.ceil() as u64
            }
            ProfileKind::Fast => (self.fast_ti_multiplier * f).ceil().max(1.0) as u64,
        }
    }

    /// Median-boost repetitions for the uncoloured estimator.
    /// Theory: `⌈6 ln(2/δ)/ξ²⌉` with `ξ = 1/4`; fast: the smallest odd count
    /// whose exact Bin(N, 1/3) median-failure tail is below delta.
    pub fn boost_uncol(&self, delta: f64) -> u64 {
        match self.kind {
            ProfileKind::Theory => (96.0 * (2.0 / delta).ln()).ceil() as u64 | 1,
            ProfileKind::Fast => median_repeats(delta),
        }
    }

    /// Median-boost repetitions on the colourful side.
    pub fn boost_col(&self, delta: f64) -> u64 {
        match self.kind {
            ProfileKind::Theory => (96.0 * (2.0 / delta).ln()).ceil() as u64 | 1,
            ProfileKind::Fast => self.fast_col_boost | 1,
        }
    }

    /// VerifyGuess repetitions per ladder rung.
    /// Theory: `⌈24 ln(12k log n)/p_out⌉`; fast drops the `1/p_out` factor
    /// and halves the leading constant (the accept rule `S_M >= 3 p_out N/4`
    /// is kept verbatim and degenerates to `S_M >= 1` at these counts).
    pub fn verify_guess_repeats(&self, p_out: f64, k: u32, log2_n: u32) -> u64 {
        let base = (12.0 * f64::from(k) * f64::from(log2_n)).ln();
        match self.kind {
            ProfileKind::Theory => (24.0 * base / p_out).ceil() as u64,
            ProfileKind::Fast => (12.0 * base).ceil() as u64,
        }
    }

    /// The block size `t` used by the colourful coarse dispatcher.
    /// Theory: `⌊n/(log n)^{20k/(α-α')}⌋`; fast: `⌊n/log n⌋`.
    pub fn colour_coarse_t(&self, n: u64, k: u32, alpha: f64, alpha_prime: f64) -> u64 {
        let log_n = (n as f64).log2();
        match self.kind {
            ProfileKind::Theory => {
                let expo = 20.0 * f64::from(k) / (alpha - alpha_prime);
                (n as f64 / log_n.powf(expo)).floor().max(0.0) as u64
            }
            ProfileKind::Fast => (n as f64 / log_n).floor() as u64,
        }
    }

    /// Effective coarse factor `b` the fine counter plans around.
    pub fn fine_b(&self, theory_b: f64) -> f64 {
        match self.kind {
            ProfileKind::Theory => theory_b,
            ProfileKind::Fast => self.fast_fine_b,
        }
    }

    /// Sampling repetitions of the fine counter:
    /// `T = ⌈c_f · ε^-2 · b² · ln(3/δ)⌉` with `c_f = 1` (theory) or `1/16`.
    pub fn fine_repeats(&self, eps: f64, delta: f64, b_eff: f64) -> u64 {
        let c_f = match self.kind {
            ProfileKind::Theory => 1.0,
            ProfileKind::Fast => 1.0 / 16.0,
        };
        (c_f * eps.powi(-2) * b_eff * b_eff * (3.0 / delta).ln()).ceil().max(1.0) as u64
    }

    /// Failure budget handed to the counter inside CoarseSmallCoreHelper.
    /// Theory: `1/(12 n^k)`; fast: flat.
    pub fn inner_counter_delta(&self, n: u64, k: u32) -> f64 {
        match self.kind {
            ProfileKind::Theory => 1.0 / (12.0 * (n as f64).powi(k as i32)),
            ProfileKind::Fast => self.fast_inner_delta,
        }
    }
}

/// Smallest odd `N` such that a median over `N` trials, each failing with
/// probability 1/3, fails with probability at most `delta` (exact binomial
/// tail).
pub fn median_repeats(delta: f64) -> u64 {
    let mut n = 1u64;
    loop {
        // P(Bin(n, 1/3) >= ceil(n/2)).
        let cut = n.div_ceil(2);
        let mut pmf = (2.0f64 / 3.0).powi(n as i32); // P(X = 0)
        let mut tail = 0.0f64;
        for x in 0..=n {
            if x >= cut {
                tail += pmf;
            }
            if x < n {
                // pmf(x+1) = pmf(x) · (n-x)/(x+1) · (p/(1-p)) with p = 1/3.
                pmf *= (n - x) as f64 / (x as f64 + 1.0) * 0.5;
            }
        }
        if tail <= delta {
            return n;
        }
        n += 2;
        if n > 4001 {
            return n;
        }
    }
}
