//! The uncoloured pipeline: a schedule of successively sparser random
//! subsamples counted exactly by SparseCount, averaged at the first density
//! at which counting stops saturating, plus a median-boosted wrapper.

use crate::error::{CoreError, Result};
use crate::mathkit::schedule_row_params;
use crate::oracle::{IndoraAccess, OracleMode, OracleSession};
use crate::profile::Profile;
use crate::rng::{sample_subset_steps, RngStream};
use crate::sparse::{sparse_count, SparseCountOutcome, SparseCountParams};
use serde::Serialize;

/// Estimator output value: a number or the resource sentinel.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub enum EstValue {
    Value(f64),
    Rte,
}

impl EstValue {
    pub fn numeric(&self) -> Option<f64> {
        match *self {
            EstValue::Value(v) => Some(v),
            EstValue::Rte => None,
        }
    }

    /// Numeric view with non-numeric outputs mapped to -1 (the median
    /// boosting rule).
    pub fn or_negative(&self) -> f64 {
        self.numeric().unwrap_or(-1.0)
    }
}

/// Per-iteration trace of the sampling loop.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct IterSummary {
    pub i: u32,
    pub samples: u64,
    pub too_dense: bool,
    pub returned: bool,
}

/// An estimator run: value, where it halted, and what it cost.
#[derive(Clone, Debug, Serialize)]
pub struct Estimate {
    pub value: EstValue,
    pub halted_at_i: Option<u32>,
    pub oracle_cost: f64,
    pub queries: u64,
    pub seed: u64,
    pub stream_id: String,
    #[serde(skip)]
    pub iterations: Vec<IterSummary>,
}

fn combinations(n: u32, k: usize, mut visit: impl FnMut(&[u32]) -> bool) {
    let mut idx: Vec<u32> = (1..=k as u32).collect();
    if k == 0 || (k as u32) > n {
        return;
    }
    loop {
        if !visit(&idx) {
            return;
        }
        // Advance to the next combination.
        let mut pos = k;
        loop {
            if pos == 0 {
                return;
            }
            pos -= 1;
            if idx[pos] < n - (k as u32 - 1 - pos as u32) {
                idx[pos] += 1;
                for j in pos + 1..k {
                    idx[j] = idx[j - 1] + 1;
                }
                break;
            }
        }
    }
}

fn binom_exceeds(n: u64, k: u32, cap: u64) -> bool {
    let mut acc: u128 = 1;
    for j in 0..u64::from(k) {
        acc = acc.saturating_mul((n - j) as u128) / (j as u128 + 1);
        if acc > cap as u128 {
            return true;
        }
    }
    false
}

/// One pass of the schedule estimator. With probability at least 2/3 the
/// value is an eps-approximation of `e(G)`.
pub fn uncol_approx(
    sess: &mut OracleSession,
    eps: f64,
    profile: &Profile,
    rng: &mut RngStream,
) -> Result<Estimate> {
    uncol_approx_capped(sess, eps, profile, None, rng)
}

/// As [`uncol_approx`], aborting with RTE once the run exceeds `query_cap`
/// oracle queries (the worst-case capping used by the boosted wrapper).
pub fn uncol_approx_capped(
    sess: &mut OracleSession,
    eps: f64,
    profile: &Profile,
    query_cap: Option<u64>,
    rng: &mut RngStream,
) -> Result<Estimate> {
    if sess.mode() != OracleMode::Indora {
        return Err(CoreError::pre("uncol_approx needs an indora-mode session"));
    }
    if !(0.0 < eps && eps < 1.0) {
        return Err(CoreError::pre(format!("eps = {eps} outside (0, 1)")));
    }
    let (cost0, queries0) = sess.ledger_total();
    let n_real = u64::from(sess.n());
    let k = sess.k() as u32;
    let finish = |sess: &OracleSession,
                  value: EstValue,
                  halted: Option<u32>,
                  iterations: Vec<IterSummary>,
                  rng: &RngStream| {
        let (cost1, queries1) = sess.ledger_total();
        Estimate {
            value,
            halted_at_i: halted,
            oracle_cost: cost1 - cost0,
            queries: queries1 - queries0,
            seed: rng.seed(),
            stream_id: rng.stream_id(),
            iterations,
        }
    };

    // Brute force for tiny instances: count every k-subset directly.
    let nf = n_real as f64;
    if nf.powi(k as i32) <= eps.powi(-2) || n_real <= (u64::from(k)).pow(5) {
        if binom_exceeds(n_real, k, 20_000_000) {
            return Err(CoreError::pre(format!(
                "brute-force branch infeasible at n = {n_real}, k = {k}"
            )));
        }
        let mut count = 0u64;
        combinations(n_real as u32, k as usize, |tuple| {
            if !sess.indora(tuple) {
                count += 1;
            }
            true
        });
        return Ok(finish(sess, EstValue::Value(count as f64), None, Vec::new(), rng));
    }

    // Pad the vertex count to a power of two; padding vertices are sampled
    // but stripped from queries by the session.
    let n_pad = n_real.next_power_of_two();
    sess.set_padding((n_pad - n_real) as u32);
    let log2_n = n_pad.trailing_zeros();

    let t: Vec<u64> = (0..log2_n)
        .map(|i| {
            let (_, _, log2_f) = schedule_row_params(log2_n, k, i);
            profile.samples_per_iteration(eps, k, log2_n, log2_f)
        })
        .collect();

    // Operation-count analogue of the sampling time budget
    // 20 · Σ t_i (i + n/2^i).
    let mut sample_budget: u64 = 0;
    for (i, &ti) in t.iter().enumerate() {
        let per = u64::from(i as u32) + n_pad.div_ceil(1 << i);
        sample_budget = sample_budget.saturating_add(20u64.saturating_mul(ti).saturating_mul(per));
    }

    let mut iterations: Vec<IterSummary> = Vec::new();
    for i in 0..log2_n {
        let t_i = t[i as usize];
        let m_i = (1u64 << (k + 1)).saturating_mul(t_i);
        let mut m_cur = m_i;
        let mut sum_c: u64 = 0;
        let mut too_dense = false;
        let mut samples = 0u64;
        let size_guard = (7.0 * (n_pad as f64) / f64::from(1u32 << i.min(31)))
            .max(7.0 * f64::from(k) * (n_pad as f64).ln());
        for _ in 0..t_i {
            if let Some(cap) = query_cap {
                if sess.ledger_total().1 - queries0 > cap {
                    return Ok(finish(sess, EstValue::Rte, Some(i), iterations, rng));
                }
            }
            let (u_ij, steps) = sample_subset_steps(n_pad, i, rng);
            sample_budget = match sample_budget.checked_sub(steps) {
                Some(b) => b,
                None => return Ok(finish(sess, EstValue::Rte, Some(i), iterations, rng)),
            };
            if u_ij.len() as f64 > size_guard {
                return Ok(finish(sess, EstValue::Rte, Some(i), iterations, rng));
            }
            samples += 1;
            let params = SparseCountParams::from_profile(profile, k, u_ij.len(), n_pad);
            match sparse_count(sess, &u_ij, m_cur, &params, rng) {
                SparseCountOutcome::TooDense => {
                    too_dense = true;
                    break;
                }
                SparseCountOutcome::Rte => {
                    return Ok(finish(sess, EstValue::Rte, Some(i), iterations, rng));
                }
                SparseCountOutcome::Count(c) => {
                    sum_c += c;
                    m_cur -= c.min(m_cur);
                }
            }
        }
        let returned = !too_dense;
        iterations.push(IterSummary { i, samples, too_dense, returned });
        if returned {
            // (1 / (p_i^k t_i)) Σ C_{i,j} with p_i^k = 2^{-ik}.
            let scale = ((i as f64) * f64::from(k)).exp2();
            let value = sum_c as f64 * scale / t_i as f64;
            return Ok(finish(sess, EstValue::Value(value), Some(i), iterations, rng));
        }
    }
    Ok(finish(sess, EstValue::Rte, None, iterations, rng))
}

/// Worst-case query cap for a single boosted run; an operation-count
/// analogue of the resource capping in the boosting analysis.
fn per_run_query_cap(sess: &OracleSession, eps: f64, profile: &Profile) -> u64 {
    let n_pad = u64::from(sess.n()).next_power_of_two();
    let k = sess.k() as u32;
    let log2_n = n_pad.trailing_zeros().max(1);
    let mut total: u64 = 0;
    for i in 0..log2_n {
        let (_, _, log2_f) = schedule_row_params(log2_n, k, i);
        total = total.saturating_add(profile.samples_per_iteration(eps, k, log2_n, log2_f));
    }
    let t_cc = profile.sparse_colourings(k, n_pad as usize);
    40u64
        .saturating_mul(total.max(1))
        .saturating_mul(t_cc)
        .saturating_mul(1u64 << k.min(20))
        .saturating_mul(u64::from(log2_n) + 2)
        .max(1u64 << 22)
}

/// Median-boosted estimator: an eps-approximation with failure probability
/// at most delta. Non-numeric inner runs enter the median as -1.
pub fn uncol(
    sess: &mut OracleSession,
    eps: f64,
    delta: f64,
    profile: &Profile,
    rng: &mut RngStream,
) -> Result<Estimate> {
    if !(0.0 < delta && delta < 1.0) {
        return Err(CoreError::pre(format!("delta = {delta} outside (0, 1)")));
    }
    let (cost0, queries0) = sess.ledger_total();
    let n = profile.boost_uncol(delta);
    let cap = per_run_query_cap(sess, eps, profile);
    let mut vals: Vec<f64> = Vec::with_capacity(n as usize);
    let mut halted = None;
    for _ in 0..n {
        let mut run_rng = rng.split();
        let est = uncol_approx_capped(sess, eps, profile, Some(cap), &mut run_rng)?;
        vals.push(est.value.or_negative());
        if est.value.numeric().is_some() {
            halted = est.halted_at_i.or(halted);
        }
    }
    vals.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let median = vals[vals.len() / 2];
    let (cost1, queries1) = sess.ledger_total();
    Ok(Estimate {
        value: EstValue::Value(median),
        halted_at_i: halted,
        oracle_cost: cost1 - cost0,
        queries: queries1 - queries0,
        seed: rng.seed(),
        stream_id: rng.stream_id(),
        iterations: Vec::new(),
    })
}
