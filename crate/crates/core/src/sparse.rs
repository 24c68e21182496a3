//! Colour-coded sparse enumeration: `RecEnum` walks one random colouring to
//! list its colourful edges; `SparseCount` aggregates a batch of colourings
//! behind a dedup counter with a density threshold `M`.

use crate::oracle::IndoraAccess;
use crate::profile::Profile;
use crate::rng::{uniform_k_partition, RngStream};
use std::collections::HashSet;

/// Outcome of a thresholded exact count.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SparseCountOutcome {
    /// Exact edge count of `G[U]` (it was at most `M`).
    Count(u64),
    /// `G[U]` definitely has more than `M` edges.
    TooDense,
    /// Query budget exceeded.
    Rte,
}

pub(crate) enum RecStatus {
    Complete,
    EmitAbort,
    Rte,
}

/// Recursively enumerates every edge colourful with respect to the class
/// tuple, charging one query per tested tuple. `emit` returns `false` to
/// abort the walk (the caller's dedup counter passed its threshold).
pub(crate) fn rec_enum<O: IndoraAccess>(
    view: &mut O,
    classes: &[Vec<u32>],
    budget: &mut u64,
    rng: &mut RngStream,
    emit: &mut dyn FnMut(&[u32]) -> bool,
) -> RecStatus {
    // A class with no vertices admits no colourful edge.
    if classes.iter().any(|c| c.is_empty()) {
        return RecStatus::Complete;
    }
    let k = classes.len();
    let total: usize = classes.iter().map(|c| c.len()).sum();
    if total <= k {
        // All classes are singletons; the union is an edge iff the oracle
        // says the k-set is not independent.
        let mut edge: Vec<u32> = classes.iter().map(|c| c[0]).collect();
        edge.sort_unstable();
        if *budget == 0 {
            return RecStatus::Rte;
        }
        *budget -= 1;
        if !view.indora(&edge) && !emit(&edge) {
            return RecStatus::EmitAbort;
        }
        return RecStatus::Complete;
    }
    // Split each class uniformly at random into two near-equal halves.
    let mut halves: Vec<[Vec<u32>; 2]> = Vec::with_capacity(k);
    for class in classes {
        let mut items = class.clone();
        let l = items.len();
        for j in 0..l.saturating_sub(1) {
            let pick = j + rng.below((l - j) as u64) as usize;
            items.swap(j, pick);
        }
        let hi = items.split_off(l.div_ceil(2));
        halves.push([items, hi]);
    }
    let mut child: Vec<Vec<u32>> = vec![Vec::new(); k];
    let mut union: Vec<u32> = Vec::with_capacity(total);
    for bits in 0..(1u32 << k) {
        let mut any_empty = false;
        union.clear();
        for j in 0..k {
            let part = &halves[j][((bits >> j) & 1) as usize];
            if part.is_empty() {
                any_empty = true;
                break;
            }
            union.extend_from_slice(part);
        }
        if any_empty {
            continue;
        }
        if *budget == 0 {
            return RecStatus::Rte;
        }
        *budget -= 1;
        if !view.indora(&union) {
            for j in 0..k {
                child[j] = halves[j][((bits >> j) & 1) as usize].clone();
            }
            match rec_enum(view, &child, budget, rng, emit) {
                RecStatus::Complete => {}
                other => return other,
            }
        }
    }
    RecStatus::Complete
}

/// Parameters of one SparseCount invocation.
#[derive(Clone, Debug)]
pub struct SparseCountParams {
    /// Number of random colourings.
    pub colourings: u64,
    /// `ln(1/δ)` scaling the query budget.
    pub ln_inv_delta: f64,
    /// Explicit query-budget override (mainly for tests).
    pub budget: Option<u64>,
}

impl SparseCountParams {
    /// Derives the colouring count and failure budget from a profile.
    /// `n` is the algorithm-level vertex count that the failure probability
    /// is calibrated against.
    pub fn from_profile(profile: &Profile, k: u32, u_len: usize, n: u64) -> Self {
        SparseCountParams {
            colourings: profile.sparse_colourings(k, u_len),
            ln_inv_delta: profile.sparse_delta_ln_inv(n.max(2), k),
            budget: None,
        }
    }

    fn query_budget(&self, k: u32, u_len: usize, m: u64) -> u64 {
        if let Some(b) = self.budget {
            return b;
        }
        let logu = ((u_len as f64) + 2.0).log2() + 2.0;
        let b = (1.0 + self.ln_inv_delta)
            * self.colourings as f64
            * f64::from(k).exp2()
            * logu
            * (m as f64 + 2.0);
        if b >= u64::MAX as f64 {
            u64::MAX
        } else {
            b.ceil() as u64
        }
    }
}

/// Thresholded exact edge count of `G[U]` through the independence oracle.
///
/// If `e(G[U]) <= m` the outcome is `Count(e(G[U]))` or `Rte`; otherwise
/// `TooDense` or `Rte`.
pub fn sparse_count<O: IndoraAccess>(
    view: &mut O,
    u: &[u32],
    m: u64,
    params: &SparseCountParams,
    rng: &mut RngStream,
) -> SparseCountOutcome {
    let k = view.k() as u32;
    let mut budget = params.query_budget(k, u.len(), m);
    if budget == 0 {
        return SparseCountOutcome::Rte;
    }
    // An edgeless G[U] answers every colouring identically; one query settles it.
    budget -= 1;
    if view.indora(u) {
        return SparseCountOutcome::Count(0);
    }
    let mut seen: HashSet<Vec<u32>> = HashSet::new();
    let mut over = false;
    for _ in 0..params.colourings {
        let classes = uniform_k_partition(u, k as usize, rng);
        let status = rec_enum(view, &classes, &mut budget, rng, &mut |edge| {
            if seen.contains(edge) {
                return true;
            }
            seen.insert(edge.to_vec());
            if seen.len() as u64 > m {
                over = true;
                return false;
            }
            true
        });
        match status {
            RecStatus::Rte => return SparseCountOutcome::Rte,
            RecStatus::EmitAbort => {
                debug_assert!(over);
                return SparseCountOutcome::TooDense;
            }
            RecStatus::Complete => {}
        }
    }
    SparseCountOutcome::Count(seen.len() as u64)
}
