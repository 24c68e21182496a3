//! Hard instance-pair generators for both oracle models and the
//! distinguishing-game harness that probes cost thresholds on them.

use crate::cost::CostModel;
use crate::error::{CoreError, Result};
use crate::hypergraph::{build_hypergraph, Hypergraph, PartitionedHypergraph};
use crate::mathkit::{rat, Rat};
use crate::oracle::{OracleMode, OracleSession, SessionGraph};
use crate::rng::RngStream;
use num_traits::{One, ToPrimitive, Zero};
use std::collections::BTreeSet;
use std::sync::Arc;

fn binom_u128(n: u64, k: u32) -> u128 {
    let mut acc: u128 = 1;
    for j in 0..u128::from(k) {
        acc = acc.saturating_mul(u128::from(n) - j) / (j + 1);
    }
    acc
}

/// Lexicographic unranking of a k-subset of `{1..n}`.
fn unrank_combination(n: u64, k: u32, mut rank: u128) -> Vec<u32> {
    let mut out = Vec::with_capacity(k as usize);
    let mut x = 1u64;
    let mut left = k;
    while left > 0 {
        let c = binom_u128(n - x, left - 1);
        if rank < c {
            out.push(x as u32);
            left -= 1;
        } else {
            rank -= c;
        }
        x += 1;
    }
    out
}

/// Ranks at which a Bernoulli(p) process over `0..total` fires, via
/// geometric skips.
fn bernoulli_ranks(total: u128, p: f64, rng: &mut RngStream) -> Vec<u128> {
    let mut out = Vec::new();
    if p <= 0.0 {
        return out;
    }
    if p >= 1.0 {
        panic!("bernoulli_ranks expects p < 1");
    }
    let log1p = (-p).ln_1p(); // ln(1 - p) < 0
    let mut pos: u128 = 0;
    loop {
        let u = rng.f64();
        let gap = ((1.0 - u).ln() / log1p).floor();
        if !gap.is_finite() || gap >= total as f64 {
            break;
        }
        pos = pos.saturating_add(gap as u128);
        if pos >= total {
            break;
        }
        out.push(pos);
        pos += 1;
        if pos >= total {
            break;
        }
    }
    out
}

// ---------------------------------------------------------------------------
// Plain instance families
// ---------------------------------------------------------------------------

/// Erdős–Rényi k-hypergraph: each k-set present independently at rate `p`.
pub fn er_hypergraph(n: u64, k: u32, p: f64, rng: &mut RngStream) -> Result<Hypergraph> {
    if !(0.0..1.0).contains(&p) {
        return Err(CoreError::pre(format!("p = {p} outside [0, 1)")));
    }
    let total = binom_u128(n, k);
    let edges: Vec<Vec<u32>> = bernoulli_ranks(total, p, rng)
        .into_iter()
        .map(|rank| unrank_combination(n, k, rank))
        .collect();
    build_hypergraph(n as u32, k as usize, edges)
}

/// k-partite Erdős–Rényi hypergraph on k classes of size `t` (class `i`
/// occupies `{(i-1)t+1 .. it}`): each colourful tuple present at rate `p`.
pub fn er_partite_hypergraph(
    t: u64,
    k: u32,
    p: f64,
    rng: &mut RngStream,
) -> Result<PartitionedHypergraph> {
    if !(0.0..1.0).contains(&p) {
        return Err(CoreError::pre(format!("p = {p} outside [0, 1)")));
    }
    let total = pow_u128(t, k);
    let mut edges = Vec::new();
    for rank in bernoulli_ranks(total, p, rng) {
        let mut rest = rank;
        let mut edge = Vec::with_capacity(k as usize);
        for i in 0..k as usize {
            let off = (rest % u128::from(t)) as u64;
            rest /= u128::from(t);
            edge.push((i as u64 * t + off + 1) as u32);
        }
        edge.sort_unstable();
        edges.push(edge);
    }
    let classes: Vec<Vec<u32>> = (0..k as u64)
        .map(|i| ((i * t + 1)..=(i + 1) * t).map(|v| v as u32).collect())
        .collect();
    PartitionedHypergraph::new_strict(build_hypergraph((t * u64::from(k)) as u32, k as usize, edges)?, classes)
}

/// Star hypergraph: every k-set containing the root set `{1..r}`.
pub fn star_hypergraph(n: u64, k: u32, r: u32) -> Result<Hypergraph> {
    if r == 0 || r > k || u64::from(k) > n {
        return Err(CoreError::pre(format!("need 1 <= r <= k <= n, got r={r}, k={k}")));
    }
    let root: Vec<u32> = (1..=r).collect();
    let mut edges = BTreeSet::new();
    extend_root(n, k, &root, &mut edges);
    build_hypergraph(n as u32, k as usize, edges)
}

// ---------------------------------------------------------------------------
// Uncoloured pairs
// ---------------------------------------------------------------------------

#[derive(Clone, Debug)]
pub struct UncolPairConfig {
    pub n: u64,
    pub k: u32,
    pub r: u32,
    /// Gap parameter of the pair.
    pub eps: Rat,
    pub p1_override: Option<Rat>,
    pub p2_override: Option<Rat>,
    /// Divisor in the size hypothesis `sqrt(n)/scale >= k`; the analysed
    /// value is 10^4, desk runs relax it.
    pub hypothesis_scale: f64,
    /// Enforce the analysed hypotheses instead of just recording them.
    pub strict: bool,
}

impl UncolPairConfig {
    pub fn new(n: u64, k: u32, r: u32, eps: Rat) -> Self {
        UncolPairConfig {
            n,
            k,
            r,
            eps,
            p1_override: None,
            p2_override: None,
            hypothesis_scale: 1.0,
            strict: false,
        }
    }
}

#[derive(Clone, Debug)]
pub struct UncolPair {
    pub g1: Hypergraph,
    pub g2: Hypergraph,
    pub roots: Vec<Vec<u32>>,
    pub p1: Rat,
    pub p2: Rat,
    /// Hypotheses that did not hold at this size (empty means none).
    pub relaxed: Vec<String>,
}

fn rat_f64(x: Rat) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}

fn pow_u128(base: u64, exp: u32) -> u128 {
    (0..exp).fold(1u128, |acc, _| acc.saturating_mul(u128::from(base)))
}

fn factorial(k: u32) -> i128 {
    (1..=i128::from(k)).product()
}

/// The uncoloured hard pair: `G1` is Erdős–Rényi at `p1 = k!/(eps·n^r)`, and
/// `G2` adds every k-set containing one of a `p2 = 240·r!/n^r` random family
/// of r-element roots.
pub fn gen_uncol_pair(cfg: &UncolPairConfig, rng: &mut RngStream) -> Result<UncolPair> {
    let UncolPairConfig { n, k, r, eps, .. } = *cfg;
    if !(1 <= r && r <= k && u64::from(k) <= n) {
        return Err(CoreError::pre(format!("need 1 <= r <= k <= n, got r={r}, k={k}, n={n}")));
    }
    if eps <= Rat::zero() || eps >= Rat::one() {
        return Err(CoreError::pre(format!("eps = {eps} outside (0, 1)")));
    }
    let n_pow_r = pow_u128(n, r);
    if n_pow_r > i128::MAX as u128 {
        return Err(CoreError::pre("n^r overflows exact arithmetic"));
    }
    let n_pow_r = n_pow_r as i128;
    let p1 = cfg
        .p1_override
        .unwrap_or_else(|| Rat::new(factorial(k), 1) / (eps * Rat::from_integer(n_pow_r)));
    let p2 = cfg
        .p2_override
        .unwrap_or_else(|| Rat::new(240 * factorial(r), n_pow_r));

    let mut relaxed = Vec::new();
    let size_ok = (n as f64).sqrt() / cfg.hypothesis_scale >= f64::from(k);
    if !size_ok {
        relaxed.push(format!("sqrt(n)/{} >= k fails at n = {n}", cfg.hypothesis_scale));
    }
    let eps_ok = Rat::new(240 * factorial(k), n_pow_r) <= eps;
    if !eps_ok {
        relaxed.push(format!("240·k!/n^r <= eps fails at n = {n}"));
    }
    if cfg.strict && !relaxed.is_empty() {
        return Err(CoreError::EmptyDomain(relaxed.join("; ")));
    }
    if p1 > Rat::one() {
        return Err(CoreError::EmptyDomain(format!("p1 = {p1} > 1 (k!/(eps·n^r) exceeds one)")));
    }
    if p2 > Rat::one() {
        return Err(CoreError::EmptyDomain(format!("p2 = {p2} > 1 (240·r!/n^r exceeds one)")));
    }

    // H1 ~ ER(n, k, p1).
    let total_edges = binom_u128(n, k);
    let h1_edges: Vec<Vec<u32>> = bernoulli_ranks(total_edges, rat_f64(p1), rng)
        .into_iter()
        .map(|rank| unrank_combination(n, k, rank))
        .collect();

    // Roots ~ each r-set independently at p2.
    let total_roots = binom_u128(n, r);
    let roots: Vec<Vec<u32>> = bernoulli_ranks(total_roots, rat_f64(p2), rng)
        .into_iter()
        .map(|rank| unrank_combination(n, r, rank))
        .collect();

    // H2: all k-sets containing some root.
    let per_root = binom_u128(n - u64::from(r), k - r);
    if (roots.len() as u128).saturating_mul(per_root) > 50_000_000 {
        return Err(CoreError::pre(format!(
            "H2 materialization would exceed the edge cap ({} roots x C(n-r, k-r) = {per_root})",
            roots.len()
        )));
    }
    let mut g2_edges: BTreeSet<Vec<u32>> = h1_edges.iter().cloned().collect();
    for root in &roots {
        extend_root(n, k, root, &mut g2_edges);
    }
    let g1 = build_hypergraph(n as u32, k as usize, h1_edges)?;
    let g2 = build_hypergraph(n as u32, k as usize, g2_edges)?;
    Ok(UncolPair { g1, g2, roots, p1, p2, relaxed })
}

/// Inserts every size-k superset of `root` within `[n]`.
fn extend_root(n: u64, k: u32, root: &[u32], out: &mut BTreeSet<Vec<u32>>) {
    let rest: Vec<u32> = (1..=n as u32).filter(|v| !root.contains(v)).collect();
    let need = (k as usize) - root.len();
    let mut idx: Vec<usize> = (0..need).collect();
    if need == 0 {
        out.insert(root.to_vec());
        return;
    }
    if rest.len() < need {
        return;
    }
    loop {
        let mut edge: Vec<u32> = root.to_vec();
        edge.extend(idx.iter().map(|&i| rest[i]));
        edge.sort_unstable();
        out.insert(edge);
        let mut pos = need;
        loop {
            if pos == 0 {
                return;
            }
            pos -= 1;
            if idx[pos] + 1 < rest.len() - (need - 1 - pos) {
                idx[pos] += 1;
                for j in pos + 1..need {
                    idx[j] = idx[j - 1] + 1;
                }
                break;
            }
        }
    }
}

// ---------------------------------------------------------------------------
// Colourful pairs
// ---------------------------------------------------------------------------

#[derive(Clone, Debug)]
pub struct ColPairConfig {
    /// Class size; must be a power of two at least 2^10 so the grid exponents
    /// are exact.
    pub t: u64,
    pub k: u32,
    pub alpha: f64,
    pub beta_override: Option<u64>,
    pub b_override: Option<u64>,
}

#[derive(Clone, Debug)]
pub struct ColPair {
    pub g1: PartitionedHypergraph,
    pub g2: PartitionedHypergraph,
    /// Sampled grid exponents, one per non-rooted class.
    pub q_exponents: Vec<u64>,
    /// Exact `log2 q_i` values.
    pub q_log2: Vec<Rat>,
    /// `log2 x`.
    pub x_log2: Rat,
    /// `log2 p`.
    pub p_log2: Rat,
    pub beta: u64,
    pub b_cap: u64,
    /// Root vertex of each rooted class.
    pub roots: Vec<u32>,
    pub relaxed: Vec<String>,
}

impl ColPair {
    pub fn non_rooted(&self) -> usize {
        self.q_exponents.len()
    }
}

/// The colourful hard pair: `G1` is a k-partite Erdős–Rényi graph at
/// `p = t^{-(k+⌊α⌋+2)/2}`; `G2` adds the complete k-partite graph on planted
/// classes (binomial at grid rates `q_i` for non-rooted classes, single
/// uniform roots for the `⌊α⌋+2` rooted classes).
pub fn gen_col_pair(cfg: &ColPairConfig, rng: &mut RngStream) -> Result<ColPair> {
    let ColPairConfig { t, k, alpha, .. } = *cfg;
    if k < 2 {
        return Err(CoreError::pre("k must be at least 2"));
    }
    if !(0.0 <= alpha && alpha <= f64::from(k) - 3.0) {
        return Err(CoreError::pre(format!("alpha = {alpha} outside [0, k-3]")));
    }
    if !t.is_power_of_two() {
        return Err(CoreError::pre(format!("t = {t} must be a power of two")));
    }
    let tau = i128::from(t.trailing_zeros());
    if tau < 10 {
        return Err(CoreError::EmptyDomain(
            "2^{5c}·x <= 1 requires t >= 2^10".into(),
        ));
    }
    let floor_alpha = alpha.floor() as i128;
    let c = i128::from(k) - floor_alpha - 2; // non-rooted class count
    debug_assert!(c >= 1);
    let mut relaxed = vec![format!("t = {t} is far below the analysed threshold 2^(400 k^6)")];

    // Exact exponents: log2 p and log2 x.
    let p_log2 = rat(-tau * (i128::from(k) + floor_alpha + 2), 2);
    let x_log2 = rat(-tau * c, 2);

    // beta = ⌊log t/(20 k^4 log log t)⌋, overridable at desk scale.
    let beta_formula = {
        let tt = tau as f64;
        (tt / (20.0 * f64::from(k).powi(4) * tt.log2())).floor() as u64
    };
    let beta = match cfg.beta_override {
        Some(b) => {
            if b != beta_formula {
                relaxed.push(format!("beta overridden to {b} (formula gives {beta_formula})"));
            }
            b
        }
        None => beta_formula,
    };
    if beta == 0 {
        return Err(CoreError::EmptyDomain(
            "beta = 0 at this t; supply a beta override".into(),
        ));
    }
    // B = ⌊log_{x^{1/beta}}((24 log t)/t)⌋.
    let b_formula = {
        let tt = tau as f64;
        let num = (24.0 * tt).log2() - tt;
        let den = rat_f64(x_log2) / beta as f64;
        (num / den).floor().max(-1.0) as i64
    };
    let b_cap = match cfg.b_override {
        Some(b) => {
            if b as i64 != b_formula {
                relaxed.push(format!("B overridden to {b} (formula gives {b_formula})"));
            }
            b
        }
        None => {
            if b_formula < 0 {
                return Err(CoreError::EmptyQGrid { beta, b: 0 });
            }
            b_formula as u64
        }
    };

    // The grid constraint Π q_i = 2^{5c}·x pins Σ j_i:
    // Σj · (5 + log2 x) = beta (5c + log2 x).
    let base_log2 = rat(5, 1) + x_log2; // log2(2^5 x)
    let target_log2 = rat(5 * c, 1) + x_log2; // log2(2^{5c} x)
    if target_log2 > Rat::zero() {
        return Err(CoreError::EmptyDomain(format!(
            "product constraint 2^{{5c}}·x = 2^{target_log2} exceeds 1"
        )));
    }
    let sum_exponents: u64 = if base_log2.is_zero() {
        // 2^5 x = 1: every q_i equals 1, any exponent vector works; the
        // canonical choice is all zeros.
        if !target_log2.is_zero() {
            return Err(CoreError::EmptyQGrid { beta, b: b_cap });
        }
        0
    } else {
        let s = Rat::from_integer(i128::from(beta)) * target_log2 / base_log2;
        if !s.is_integer() || s < Rat::zero() {
            return Err(CoreError::EmptyQGrid { beta, b: b_cap });
        }
        let s = s.to_integer();
        if s as u128 > (c as u128) * u128::from(b_cap) {
            return Err(CoreError::EmptyQGrid { beta, b: b_cap });
        }
        s as u64
    };

    // Uniform composition of sum_exponents into c parts within [0, B].
    let exponents = sample_composition(c as usize, sum_exponents, b_cap, rng)
        .ok_or(CoreError::EmptyQGrid { beta, b: b_cap })?;

    let q_log2: Vec<Rat> = exponents
        .iter()
        .map(|&j| base_log2 * rat(j as i128, i128::from(beta)))
        .collect();

    // Class layout: class i occupies {(i-1)t+1 .. it}.
    let n_total = t * u64::from(k);
    if n_total > u32::MAX as u64 {
        return Err(CoreError::pre("t·k exceeds the vertex-id space"));
    }
    let class_of = |i: usize| -> Vec<u32> {
        let start = (i as u64) * t + 1;
        (start..start + t).map(|v| v as u32).collect()
    };
    let classes: Vec<Vec<u32>> = (0..k as usize).map(class_of).collect();

    // Planted classes.
    let mut planted: Vec<Vec<u32>> = Vec::with_capacity(k as usize);
    let mut roots = Vec::new();
    for (i, class) in classes.iter().enumerate() {
        if i < c as usize {
            let q = rat_f64(q_log2[i]).exp2();
            planted.push(class.iter().copied().filter(|_| rng.bernoulli(q)).collect());
        } else {
            let root = class[rng.below(t) as usize];
            roots.push(root);
            planted.push(vec![root]);
        }
    }

    // H1: k-partite ER at rate p over the t^k tuple space.
    let total: u128 = pow_u128(t, k);
    let p = rat_f64(p_log2).exp2();
    let mut h1_edges: Vec<Vec<u32>> = Vec::new();
    for rank in bernoulli_ranks(total, p, rng) {
        let mut rest = rank;
        let mut edge = Vec::with_capacity(k as usize);
        for i in 0..k as usize {
            let off = (rest % u128::from(t)) as u64;
            rest /= u128::from(t);
            edge.push((i as u64 * t + off + 1) as u32);
        }
        edge.sort_unstable();
        h1_edges.push(edge);
    }

    // H2: complete k-partite graph over the planted classes.
    let h2_count: u128 = planted.iter().map(|x| x.len() as u128).product();
    if h2_count > 20_000_000 {
        return Err(CoreError::pre(format!(
            "H2 would have {h2_count} edges; reduce t or the q rates"
        )));
    }
    let mut g2_edges: BTreeSet<Vec<u32>> = h1_edges.iter().cloned().collect();
    let mut idx = vec![0usize; k as usize];
    if planted.iter().all(|x| !x.is_empty()) {
        loop {
            let mut edge: Vec<u32> =
                (0..k as usize).map(|i| planted[i][idx[i]]).collect();
            edge.sort_unstable();
            g2_edges.insert(edge);
            let mut pos = k as usize;
            let mut done = false;
            loop {
                if pos == 0 {
                    done = true;
                    break;
                }
                pos -= 1;
                if idx[pos] + 1 < planted[pos].len() {
                    idx[pos] += 1;
                    for j in pos + 1..k as usize {
                        idx[j] = 0;
                    }
                    break;
                }
            }
            if done {
                break;
            }
        }
    }

    let class_sizes: Vec<Vec<u32>> = classes.clone();
    let g1 = PartitionedHypergraph::new_strict(
        build_hypergraph(n_total as u32, k as usize, h1_edges)?,
        class_sizes.clone(),
    )?;
    let g2 = PartitionedHypergraph::new_strict(
        build_hypergraph(n_total as u32, k as usize, g2_edges)?,
        class_sizes,
    )?;
    Ok(ColPair {
        g1,
        g2,
        q_exponents: exponents,
        q_log2,
        x_log2,
        p_log2,
        beta,
        b_cap,
        roots,
        relaxed,
    })
}

/// Uniform composition of `sum` into `parts` parts within `[0, cap]`:
/// exhaustive enumeration when the box is small, rejection sampling from the
/// uniform box otherwise.
fn sample_composition(parts: usize, sum: u64, cap: u64, rng: &mut RngStream) -> Option<Vec<u64>> {
    let box_size = (u128::from(cap) + 1).checked_pow(parts as u32)?;
    if box_size <= 1_000_000 {
        let mut all = Vec::new();
        let mut cur = vec![0u64; parts];
        fn rec(pos: usize, left: u64, cap: u64, cur: &mut Vec<u64>, all: &mut Vec<Vec<u64>>) {
            if pos + 1 == cur.len() {
                if left <= cap {
                    cur[pos] = left;
                    all.push(cur.clone());
                }
                return;
            }
            let lo = left.saturating_sub(cap * (cur.len() - pos - 1) as u64);
            for v in lo..=left.min(cap) {
                cur[pos] = v;
                rec(pos + 1, left - v, cap, cur, all);
            }
        }
        if parts == 0 {
            return if sum == 0 { Some(vec![]) } else { None };
        }
        rec(0, sum, cap, &mut cur, &mut all);
        if all.is_empty() {
            return None;
        }
        let pick = rng.below(all.len() as u64) as usize;
        Some(all[pick].clone())
    } else {
        for _ in 0..1_000_000 {
            let cand: Vec<u64> = (0..parts).map(|_| rng.below(cap + 1)).collect();
            if cand.iter().sum::<u64>() == sum {
                return Some(cand);
            }
        }
        None
    }
}

// ---------------------------------------------------------------------------
// Gap checks and the distinguishing game
// ---------------------------------------------------------------------------

/// Fraction of independent pair draws with `e(G2) > (1+eps)·e(G1)`.
pub fn gap_check_uncol(cfg: &UncolPairConfig, trials: u32, rng: &mut RngStream) -> Result<f64> {
    if trials == 0 {
        return Err(CoreError::pre("trials must be >= 1"));
    }
    let mut hits = 0u32;
    for _ in 0..trials {
        let mut pair_rng = rng.split();
        let pair = gen_uncol_pair(cfg, &mut pair_rng)?;
        let e1 = pair.g1.edge_count() as f64;
        let e2 = pair.g2.edge_count() as f64;
        if e2 > (1.0 + rat_f64(cfg.eps)) * e1 {
            hits += 1;
        }
    }
    Ok(f64::from(hits) / f64::from(trials))
}

/// Fraction of independent pair draws with `e(G2) >= factor·e(G1)`.
pub fn gap_check_col(
    cfg: &ColPairConfig,
    factor: f64,
    trials: u32,
    rng: &mut RngStream,
) -> Result<f64> {
    if trials == 0 {
        return Err(CoreError::pre("trials must be >= 1"));
    }
    let mut hits = 0u32;
    for _ in 0..trials {
        let mut pair_rng = rng.split();
        let pair = gen_col_pair(cfg, &mut pair_rng)?;
        let e1 = pair.g1.base.edge_count() as f64;
        let e2 = pair.g2.base.edge_count() as f64;
        if e2 >= factor * e1 {
            hits += 1;
        }
    }
    Ok(f64::from(hits) / f64::from(trials))
}

#[derive(Clone, Debug, serde::Serialize)]
pub struct TrialRow {
    pub distinguished: bool,
    pub cost_g1: f64,
    pub queries_g1: u64,
}

#[derive(Clone, Debug, serde::Serialize)]
pub struct DistinguishReport {
    pub trials: u32,
    pub rate: f64,
    pub median_cost_g1: f64,
    pub class_violations: u64,
    pub rows: Vec<TrialRow>,
}

/// A strategy is any deterministic-given-seed oracle algorithm; it is run on
/// both oracles of each generated pair with identical randomness, and the
/// report records how often the outputs differ and what the run on `G1`
/// cost.
pub type Strategy<'a> = dyn FnMut(&mut OracleSession, &mut RngStream) -> f64 + 'a;

/// Per-trial sessions for the two graphs of a pair.
pub struct PairSessions {
    pub g1: OracleSession,
    pub g2: OracleSession,
}

pub fn distinguish_experiment(
    mut make_pair: impl FnMut(&mut RngStream) -> Result<PairSessions>,
    strategy: &mut Strategy<'_>,
    trials: u32,
    rng: &mut RngStream,
) -> Result<DistinguishReport> {
    if trials == 0 {
        return Err(CoreError::pre("trials must be >= 1"));
    }
    let mut rows = Vec::with_capacity(trials as usize);
    let mut hits = 0u32;
    let mut violations = 0u64;
    for _ in 0..trials {
        let mut pair_rng = rng.split();
        let PairSessions { mut g1, mut g2 } = make_pair(&mut pair_rng)?;
        let algo_rng = pair_rng.split();
        let out1 = strategy(&mut g1, &mut algo_rng.clone());
        let out2 = strategy(&mut g2, &mut algo_rng.clone());
        let distinguished = out1 != out2;
        if distinguished {
            hits += 1;
        }
        violations += g1.class_violations() + g2.class_violations();
        let (cost_g1, queries_g1) = g1.ledger_total();
        rows.push(TrialRow { distinguished, cost_g1, queries_g1 });
    }
    let mut costs: Vec<f64> = rows.iter().map(|r| r.cost_g1).collect();
    costs.sort_by(|a, b| a.partial_cmp(b).unwrap());
    Ok(DistinguishReport {
        trials,
        rate: f64::from(hits) / f64::from(trials),
        median_cost_g1: costs[costs.len() / 2],
        class_violations: violations,
        rows,
    })
}

/// Builds sessions over an uncoloured pair.
pub fn uncol_pair_sessions(
    cfg: &UncolPairConfig,
    model: &CostModel,
    mode: OracleMode,
    rng: &mut RngStream,
) -> Result<PairSessions> {
    let pair = gen_uncol_pair(cfg, rng)?;
    Ok(PairSessions {
        g1: OracleSession::plain(Arc::new(pair.g1), model.clone(), mode)?,
        g2: OracleSession::plain(Arc::new(pair.g2), model.clone(), mode)?,
    })
}

/// Builds class-respecting cindora sessions over a colourful pair.
pub fn col_pair_sessions(
    cfg: &ColPairConfig,
    model: &CostModel,
    rng: &mut RngStream,
) -> Result<PairSessions> {
    let pair = gen_col_pair(cfg, rng)?;
    let mk = |ph: PartitionedHypergraph| -> Result<OracleSession> {
        Ok(OracleSession::new(
            SessionGraph::Partitioned(Arc::new(ph)),
            model.clone(),
            OracleMode::Cindora,
        )?
        .with_class_enforcement())
    };
    Ok(PairSessions { g1: mk(pair.g1)?, g2: mk(pair.g2)? })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn base_cfg() -> UncolPairConfig {
        UncolPairConfig::new(960, 2, 1, rat(1, 2))
    }

    #[test]
    fn uncol_pair_params_exact() {
        let mut rng = RngStream::new(1);
        let pair = gen_uncol_pair(&base_cfg(), &mut rng).unwrap();
        assert_eq!(pair.p1, rat(2, 1) / (rat(1, 2) * rat(960, 1)));
        assert_eq!(pair.p2, rat(240, 960));
        // E|R| <= p2·n^r/r! = 240 is an identity of the construction.
        assert_eq!(pair.p2 * rat(960, 1), rat(240, 1));
    }

    #[test]
    fn uncol_pair_structure() {
        for seed in 0..10 {
            let mut rng = RngStream::new(seed);
            let pair = gen_uncol_pair(&base_cfg(), &mut rng).unwrap();
            // Subgraph order.
            for e in pair.g1.edges() {
                assert!(pair.g2.is_edge(e));
            }
            // Root closure: every G2-minus-G1 edge contains a root, and
            // every superset of every root is present.
            let g1_set: BTreeSet<Vec<u32>> = pair.g1.edges().map(<[u32]>::to_vec).collect();
            for e in pair.g2.edges() {
                if !g1_set.contains(e) {
                    assert!(pair.roots.iter().any(|r| r.iter().all(|v| e.contains(v))));
                }
            }
            for root in &pair.roots {
                for v in 1..=960u32 {
                    if !root.contains(&v) {
                        let mut edge = root.clone();
                        edge.push(v);
                        edge.sort_unstable();
                        assert!(pair.g2.is_edge(&edge));
                        break; // spot-check one superset per root
                    }
                }
            }
        }
    }

    #[test]
    fn uncol_pair_rejects_p_above_one() {
        // n = 200, r = 1: p2 = 240/200 > 1.
        let cfg = UncolPairConfig::new(200, 2, 1, rat(1, 2));
        let mut rng = RngStream::new(1);
        assert!(matches!(
            gen_uncol_pair(&cfg, &mut rng),
            Err(CoreError::EmptyDomain(_))
        ));
    }

    #[test]
    fn uncol_root_count_concentrates() {
        // |R| in [30, 360] in at least 90% of draws at n = 960.
        let mut rng = RngStream::new(0xABCD);
        let mut ok = 0;
        for _ in 0..200 {
            let mut pair_rng = rng.split();
            let pair = gen_uncol_pair(&base_cfg(), &mut pair_rng).unwrap();
            let cnt = pair.roots.len();
            if (30..=360).contains(&cnt) {
                ok += 1;
            }
        }
        assert!(ok >= 180, "{ok}/200");
    }

    #[test]
    fn uncol_gap_with_zero_p2_is_zero() {
        let mut cfg = base_cfg();
        cfg.p2_override = Some(Rat::zero());
        let mut rng = RngStream::new(3);
        let rate = gap_check_uncol(&cfg, 50, &mut rng).unwrap();
        assert_eq!(rate, 0.0);
    }

    fn col_cfg_c1() -> ColPairConfig {
        // k = 3, alpha = 0: one non-rooted class; t = 2^12.
        ColPairConfig { t: 1 << 12, k: 3, alpha: 0.0, beta_override: Some(4), b_override: Some(4) }
    }

    #[test]
    fn col_pair_structure() {
        let mut rng = RngStream::new(5);
        let pair = gen_col_pair(&col_cfg_c1(), &mut rng).unwrap();
        assert_eq!(pair.non_rooted(), 1);
        assert_eq!(pair.roots.len(), 2);
        // Rooted classes are singletons by construction; product identity:
        // Σ log2 q_i = 5c + log2 x exactly.
        let total: Rat = pair.q_log2.iter().cloned().sum();
        assert_eq!(total, rat(5, 1) + pair.x_log2);
        // Subgraph order.
        for e in pair.g1.base.edges() {
            assert!(pair.g2.base.is_edge(e));
        }
        // Completeness of H2 over the planted classes: count G2-only edges
        // through the roots.
        let e2 = pair.g2.base.edge_count();
        let e1 = pair.g1.base.edge_count();
        assert!(e2 >= e1);
    }

    #[test]
    fn col_pair_sum_zero_grid() {
        // k = 4, alpha = 0, t = 2^10: the product constraint forces all
        // exponents to zero (q_i = 1).
        let cfg = ColPairConfig {
            t: 1 << 10,
            k: 4,
            alpha: 0.0,
            beta_override: Some(3),
            b_override: Some(3),
        };
        let mut rng = RngStream::new(8);
        let pair = gen_col_pair(&cfg, &mut rng).unwrap();
        assert_eq!(pair.q_exponents, vec![0, 0]);
        assert!(pair.q_log2.iter().all(Rat::is_zero));
        // e(H2) = t^2 exactly: both non-rooted classes kept whole.
        let e2_only = pair.g2.base.edge_count() - overlap(&pair);
        assert_eq!(e2_only + overlap(&pair), pair.g2.base.edge_count());
        // Conditional expectation of e(H2) given Q is Π(q_i t) = t^2.
        let expect: f64 = pair
            .q_log2
            .iter()
            .map(|q| rat_f64(*q).exp2() * (1u64 << 10) as f64)
            .product();
        assert_eq!(expect, (1u64 << 20) as f64);
    }

    fn overlap(pair: &ColPair) -> u64 {
        pair.g1
            .base
            .edges()
            .filter(|e| pair.g2.base.is_edge(e))
            .count() as u64
    }

    #[test]
    fn col_pair_rejects_infeasible_grid() {
        // Tiny t fails the 2^{5c} x <= 1 requirement.
        let cfg = ColPairConfig { t: 1 << 9, k: 3, alpha: 0.0, beta_override: Some(2), b_override: Some(2) };
        let mut rng = RngStream::new(2);
        assert!(gen_col_pair(&cfg, &mut rng).is_err());
    }

    #[test]
    fn distinguish_trivial_strategies() {
        let cfg = base_cfg();
        let model = CostModel::unit();
        let mut rng = RngStream::new(77);
        // Query nothing: rate 0, cost 0.
        let report = distinguish_experiment(
            |r| uncol_pair_sessions(&cfg, &model, OracleMode::Indora, r),
            &mut |_sess, _rng| 0.0,
            10,
            &mut rng,
        )
        .unwrap();
        assert_eq!(report.rate, 0.0);
        assert_eq!(report.median_cost_g1, 0.0);
        // Query the full vertex set once: both graphs are dense, rate 0.
        let mut rng = RngStream::new(78);
        let report = distinguish_experiment(
            |r| uncol_pair_sessions(&cfg, &model, OracleMode::Indora, r),
            &mut |sess, _rng| {
                let all: Vec<u32> = (1..=sess.n()).collect();
                if sess.indora_query(&all).unwrap() {
                    1.0
                } else {
                    0.0
                }
            },
            10,
            &mut rng,
        )
        .unwrap();
        assert_eq!(report.rate, 0.0);
    }
}
