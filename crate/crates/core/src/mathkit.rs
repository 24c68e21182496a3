//! Closed-form algebra behind the sampling schedules: half-up rounding, the
//! overhead exponent `g(k, beta)`, the per-iteration `(L̂, γ̂, F, t, M)`
//! schedule, and brute-force oracles for the inequalities they rely on.
//!
//! Everything here is exact: `n` is a power of two, so every `F_i` is a power
//! of two with an integer base-2 logarithm, and `g` is an exact rational.

use crate::error::{CoreError, Result};
use num_rational::Ratio;
use num_traits::{One, Signed, Zero};

pub type Rat = Ratio<i128>;

pub fn rat(num: i128, den: i128) -> Rat {
    Rat::new(num, den)
}

/// Nearest integer, ties rounded up: `⌊x⌉ = ⌊x + 1/2⌋`.
pub fn round_half(x: Rat) -> i128 {
    (x + rat(1, 2)).floor().to_integer()
}

/// Overhead exponent `g(k, beta) = (1/k) ⌊(k-beta)/2⌉ (k - beta - ⌊(k-beta)/2⌉)`.
pub fn g(k: u32, beta: Rat) -> Result<Rat> {
    let kk = Rat::from_integer(i128::from(k));
    if beta.is_negative() || beta > kk {
        return Err(CoreError::pre(format!("beta = {beta} outside [0, {k}]")));
    }
    let m = Rat::from_integer(round_half((kk - beta) / rat(2, 1)));
    Ok(m * (kk - beta - m) / kk)
}

/// The rounding argument `⌊(k-beta)/2⌉`.
pub fn g_split_point(k: u32, beta: Rat) -> i128 {
    round_half((Rat::from_integer(i128::from(k)) - beta) / rat(2, 1))
}

#[derive(Clone, Debug)]
pub struct ScheduleRow {
    pub i: u32,
    /// `p_i = 2^-i`.
    pub l_hat: u32,
    pub gamma_hat: Rat,
    /// `log2(F_i)`; an integer because `n` is a power of two.
    pub log2_f: i64,
    /// Theory-profile sample count `t_i = ⌈ε^-2 · 10k² · 2^k · log n · F_i⌉`.
    pub t: u128,
    /// `M_i = 2^{k+1} · t_i`.
    pub m: u128,
}

/// Per-iteration parameters of the uncoloured sampling loop for a
/// power-of-two vertex count.
#[derive(Clone, Debug)]
pub struct Schedule {
    pub n: u64,
    pub log2_n: u32,
    pub k: u32,
    pub rows: Vec<ScheduleRow>,
}

fn require_pow2(n: u64) -> Result<u32> {
    if n == 0 || !n.is_power_of_two() {
        return Err(CoreError::pre(format!("n = {n} is not a power of two")));
    }
    Ok(n.trailing_zeros())
}

/// `(L̂_i, γ̂_i, log2 F_i)` for one iteration; exact.
pub fn schedule_row_params(log2_n: u32, k: u32, i: u32) -> (u32, Rat, i64) {
    let ell = i64::from(log2_n);
    let ik = i64::from(i) * i64::from(k);
    let l_hat = (ik / ell) as u32;
    let gamma_hat = rat(i128::from(ik % ell), i128::from(ell));
    // F_i = n^{(L̂+γ̂)(k-L̂)/k} · max{2^-i, n^-γ̂}
    //     = 2^{i(k-L̂)} · 2^{-min(i, ℓγ̂)}   with ℓγ̂ = ik - ℓL̂ integral.
    let ell_gamma = ik - ell * i64::from(l_hat);
    let log2_f = i64::from(i) * (i64::from(k) - i64::from(l_hat)) - i64::from(i).min(ell_gamma);
    (l_hat, gamma_hat, log2_f)
}

/// Builds the full schedule with the paper-profile `t_i` and `M_i`.
pub fn build_schedule(n_pow2: u64, k: u32, eps: Rat) -> Result<Schedule> {
    let log2_n = require_pow2(n_pow2)?;
    if eps <= Rat::zero() || eps >= Rat::one() {
        return Err(CoreError::pre(format!("eps = {eps} outside (0, 1)")));
    }
    if k < 2 {
        return Err(CoreError::pre("k must be at least 2"));
    }
    let mut rows = Vec::with_capacity(log2_n as usize);
    for i in 0..log2_n {
        let (l_hat, gamma_hat, log2_f) = schedule_row_params(log2_n, k, i);
        // t_i = ⌈ε^-2 · 10k² · 2^k · log n · F_i⌉ in exact rationals.
        if log2_f > 90 || k > 40 {
            return Err(CoreError::pre(format!(
                "schedule parameters overflow exact arithmetic (log2 F = {log2_f}, k = {k})"
            )));
        }
        let factor = rat(
            10 * i128::from(k) * i128::from(k) * (1i128 << k) * i128::from(log2_n),
            1,
        );
        let f_pow = rat(1i128 << log2_f, 1);
        let t_exact = factor * f_pow / (eps * eps);
        let t = t_exact.ceil().to_integer() as u128;
        let m = (1u128 << (k + 1)) * t;
        rows.push(ScheduleRow { i, l_hat, gamma_hat, log2_f, t, m });
    }
    Ok(Schedule { n: n_pow2, log2_n, k, rows })
}

/// Both sides of the Lemma-3.4-style overhead identity, in exact base-2
/// exponent arithmetic.
#[derive(Clone, Debug)]
pub struct Overhead {
    /// `max_i log2(F_i · 2^{-i·beta})` over the integer grid `i ∈ [0, log n)`.
    pub grid_log2: Rat,
    /// `max_{L ∈ {0..k-⌈beta⌉}} log2(n^{L(k-L-beta)/k})`.
    pub enum_log2: Rat,
    /// `log2(n^{g(k,beta)})`.
    pub g_log2: Rat,
    /// Whether the integer-i grid attains the algebraic maximum.
    pub attained: bool,
}

/// Computes `max_i F_i · 2^{-i·beta}` and the algebraic value `n^{g(k,beta)}`
/// it is compared against. The two agree exactly whenever some maximizing
/// integer `L* = ⌊(k-beta)/2⌉` satisfies `k | L*·log2(n)`; otherwise the grid
/// maximum is strictly smaller and both sides are reported.
pub fn max_overhead(n_pow2: u64, k: u32, beta: Rat) -> Result<Overhead> {
    let log2_n = require_pow2(n_pow2)?;
    let kk = Rat::from_integer(i128::from(k));
    if beta.is_negative() || beta > kk {
        return Err(CoreError::pre(format!("beta = {beta} outside [0, {k}]")));
    }
    let ell = Rat::from_integer(i128::from(log2_n));
    let mut grid: Option<Rat> = None;
    for i in 0..log2_n {
        let (_, _, log2_f) = schedule_row_params(log2_n, k, i);
        let val = Rat::from_integer(i128::from(log2_f)) - Rat::from_integer(i128::from(i)) * beta;
        grid = Some(match grid {
            None => val,
            Some(g) if val > g => val,
            Some(g) => g,
        });
    }
    let grid_log2 = grid.expect("log2_n >= 1");

    // Ceiling of a non-negative rational.
    let beta_ceil = beta.ceil().to_integer() as u32;
    let mut enum_log2 = Rat::zero();
    for l in 0..=(k - beta_ceil.min(k)) {
        let ll = Rat::from_integer(i128::from(l));
        let val = ell * ll * (kk - ll - beta) / kk;
        if val > enum_log2 {
            enum_log2 = val;
        }
    }
    let g_log2 = ell * g(k, beta)?;
    Ok(Overhead { grid_log2, enum_log2, g_log2, attained: grid_log2 == g_log2 })
}

/// Test oracle for the Karamata corollary: given `s ∈ [0,c]^t` with
/// `Σ s_i^alpha <= w`, the conclusion `Σ s_i^r <= w · c^{r-alpha}` must hold.
/// Returns whether the conclusion holds for this instance.
pub fn karamata_check(s: &[f64], alpha: f64, r: f64, c: f64, w: f64) -> Result<bool> {
    if !(r >= alpha && alpha >= 0.0) {
        return Err(CoreError::pre(format!("need r >= alpha >= 0, got r = {r}, alpha = {alpha}")));
    }
    if !(c > 0.0) {
        return Err(CoreError::pre("need c > 0"));
    }
    if let Some(&bad) = s.iter().find(|&&x| !(0.0..=c * (1.0 + 1e-12)).contains(&x)) {
        return Err(CoreError::pre(format!("entry {bad} outside [0, {c}]")));
    }
    let lhs: f64 = s.iter().map(|&x| x.powf(r)).sum();
    let rhs = w * c.powf(r - alpha);
    Ok(lhs <= rhs * (1.0 + 1e-9))
}

/// Whether the premise `Σ s_i^alpha <= w` of the Karamata corollary holds.
pub fn karamata_premise(s: &[f64], alpha: f64, w: f64) -> bool {
    s.iter().map(|&x| x.powf(alpha)).sum::<f64>() <= w * (1.0 + 1e-12)
}
