//! The colourful pipeline: core finding, the guess verifier, the two coarse
//! counters and their dispatcher, exact colourful enumeration, and the fine
//! counter built on top of them.

use crate::error::{CoreError, Result};
use crate::hypergraph::{ClassMap, PartitionedHypergraph};
use crate::mathkit::{rat, Rat};
use crate::oracle::{CindoraAccess, OracleMode, OracleSession};
use crate::profile::Profile;
use crate::rng::{subsample_set, uniform_k_partition, RngStream};
use crate::uncol::{EstValue, Estimate};
use num_traits::Zero;

// ---------------------------------------------------------------------------
// Cores
// ---------------------------------------------------------------------------

/// A root-localised sub-instance: classes `Y_i ⊆ X_i` keeping a `(2k)^-k`
/// fraction of the edges, with small classes on `I` and no degree hot-spots
/// off `I`.
#[derive(Clone, Debug)]
pub struct Core {
    /// Indices (0-based) of the small root classes.
    pub i_set: Vec<usize>,
    pub classes: Vec<Vec<u32>>,
    pub zeta: Rat,
}

/// Colourful edge count of `H[Y_1..Y_k]` plus per-vertex colourful degrees.
fn colourful_stats(h: &PartitionedHypergraph, ys: &[Vec<u32>]) -> (u64, Vec<u64>) {
    let n = h.base.n();
    let k = h.k();
    let cm = ClassMap::build(n, ys);
    let mut degrees = vec![0u64; n as usize + 1];
    let mut count = 0u64;
    for e in h.base.edges() {
        if cm.is_colourful(e, k) {
            count += 1;
            for &v in e {
                degrees[v as usize] += 1;
            }
        }
    }
    (count, degrees)
}

/// `v` is a zeta-root of a graph with `e` edges if `d(v) >= zeta·e` and
/// `e > 0` (an edgeless graph has no hot-spots).
fn is_root(d: u64, e: u64, zeta: Rat) -> bool {
    if e == 0 {
        return false;
    }
    // d >= zeta·e  <=>  d·den >= num·e
    Rat::from_integer(d as i128) >= zeta * Rat::from_integer(e as i128)
}

/// Constructive core finder: repeatedly either shrinks one class to its
/// (zeta/2)-roots (when they carry more than a 1/(2k) share of the edges) or
/// deletes the (zeta/2)-roots from every class outside `I` and stops.
pub fn find_core(h: &PartitionedHypergraph, zeta: Rat) -> Result<Core> {
    if zeta <= Rat::zero() || zeta > Rat::from_integer(1) {
        return Err(CoreError::pre(format!("zeta = {zeta} outside (0, 1]")));
    }
    let k = h.k();
    let mut ys: Vec<Vec<u32>> = h.classes.clone();
    let mut i_set: Vec<usize> = Vec::new();
    let half = zeta / rat(2, 1);
    loop {
        let (e_j, deg) = colourful_stats(h, &ys);
        if e_j == 0 {
            break;
        }
        let mut shrink: Option<usize> = None;
        let mut roots: Vec<Vec<u32>> = vec![Vec::new(); k];
        for i in 0..k {
            if i_set.contains(&i) {
                continue;
            }
            let z: Vec<u32> = ys[i]
                .iter()
                .copied()
                .filter(|&v| is_root(deg[v as usize], e_j, half))
                .collect();
            let mass: u64 = z.iter().map(|&v| deg[v as usize]).sum();
            // Σ_{v∈Z} d(v) > e(J)/(2k)
            if mass as u128 * 2 * k as u128 > e_j as u128 {
                shrink = Some(i);
                roots[i] = z;
                break;
            }
            roots[i] = z;
        }
        match shrink {
            Some(l) => {
                ys[l] = roots[l].clone();
                i_set.push(l);
                if i_set.len() == k {
                    break;
                }
            }
            None => {
                for i in 0..k {
                    if !i_set.contains(&i) {
                        let z = &roots[i];
                        ys[i].retain(|v| !z.contains(v));
                    }
                }
                break;
            }
        }
    }
    i_set.sort_unstable();
    let core = Core { i_set, classes: ys, zeta };
    debug_assert!(verify_core(h, &core));
    Ok(core)
}

/// Direct check of the three core clauses.
pub fn verify_core(h: &PartitionedHypergraph, core: &Core) -> bool {
    let k = h.k();
    let e_h = h.colourful_edge_count();
    let (e_y, deg) = colourful_stats(h, &core.classes);
    // (i) e(H[Y]) >= e(H) / (2k)^k
    let factor = (2 * k as u128).pow(k as u32);
    if (e_y as u128) * factor < e_h as u128 {
        return false;
    }
    // (ii) |Y_i| <= 2/zeta for i in I
    for &i in &core.i_set {
        if Rat::from_integer(core.classes[i].len() as i128) * core.zeta > rat(2, 1) {
            return false;
        }
    }
    // (iii) no zeta-roots of H[Y] in classes outside I
    for i in 0..k {
        if core.i_set.contains(&i) {
            continue;
        }
        for &v in &core.classes[i] {
            if is_root(deg[v as usize], e_y, core.zeta) {
                return false;
            }
        }
    }
    true
}

// ---------------------------------------------------------------------------
// VerifyGuess
// ---------------------------------------------------------------------------

#[derive(Clone, Copy, Debug)]
pub struct GuessVerdict {
    pub yes: bool,
    pub tuples_tried: u64,
}

const LOG_GUARD: f64 = 2.0f64 * 1e-12; // 2^-40-style guard against flicker

fn log2_inv(zeta: Rat) -> f64 {
    (*zeta.denom() as f64).log2() - (*zeta.numer() as f64).log2()
}

/// The tuple set `A` of the guess verifier: exponent vectors
/// `(a_1, ..., a_k)` with `a_i ∈ [0, 2 log n - 1]`,
/// `a_i <= 2 log2(1/zeta) + 1` for `i ∈ I`, and
/// `Σ a_i >= log2(M) - k log2(2k)`.
pub fn guess_tuples(
    k: usize,
    log2_n: u32,
    i_set: &[usize],
    zeta: Rat,
    log2_m: u32,
) -> Vec<Vec<u32>> {
    let amax_all = 2 * log2_n - 1;
    let root_cap = (2.0 * log2_inv(zeta) + 1.0 + LOG_GUARD).floor();
    let caps: Vec<u32> = (0..k)
        .map(|i| {
            if i_set.contains(&i) {
                amax_all.min(root_cap.max(0.0) as u32)
            } else {
                amax_all
            }
        })
        .collect();
    let threshold =
        f64::from(log2_m) - (k as f64) * (2.0 * k as f64).log2() - LOG_GUARD;
    let mut out = Vec::new();
    let mut cur = vec![0u32; k];
    fn rec(
        pos: usize,
        sum: u32,
        caps: &[u32],
        suffix_max: &[u32],
        threshold: f64,
        cur: &mut Vec<u32>,
        out: &mut Vec<Vec<u32>>,
    ) {
        if pos == caps.len() {
            if f64::from(sum) >= threshold {
                out.push(cur.clone());
            }
            return;
        }
        // Prune branches that cannot reach the sum threshold.
        if f64::from(sum + suffix_max[pos]) < threshold {
            return;
        }
        for a in 0..=caps[pos] {
            cur[pos] = a;
            rec(pos + 1, sum + a, caps, suffix_max, threshold, cur, out);
        }
    }
    let mut suffix_max = vec![0u32; k + 1];
    for i in (0..k).rev() {
        suffix_max[i] = suffix_max[i + 1] + caps[i];
    }
    rec(0, 0, &caps, &suffix_max, threshold, &mut cur, &mut out);
    out
}

fn require_pow2_ge32(n: u64) -> Result<u32> {
    if n < 32 || !n.is_power_of_two() {
        return Err(CoreError::pre(format!("n = {n} must be a power of two >= 32")));
    }
    Ok(n.trailing_zeros())
}

fn check_zeta(zeta: Rat) -> Result<()> {
    if zeta <= Rat::zero() || zeta >= rat(1, 32) {
        return Err(CoreError::pre(format!("zeta = {zeta} outside (0, 1/32)")));
    }
    Ok(())
}

/// Output probability floor of the guess verifier.
pub fn p_out(k: usize, log2_n: u32, i_len: usize, zeta: Rat) -> f64 {
    let lz = log2_inv(zeta);
    1.0 / ((5.0 * k as f64).exp2()
        * lz.powi(i_len as i32)
        * f64::from(log2_n).powi((k - i_len) as i32))
}

/// Distinguishes "few edges" from "an (I,zeta)-core with at least M edges":
/// samples `Z_{i,j} ⊆ X_i` at rate `2^-j` and answers Yes iff some exponent
/// tuple in `A` yields a dependent colourful query.
pub fn verify_guess<O: CindoraAccess>(
    ora: &mut O,
    n_eff: u64,
    m: u64,
    classes: &[Vec<u32>],
    i_set: &[usize],
    zeta: Rat,
    rng: &mut RngStream,
) -> Result<GuessVerdict> {
    if !m.is_power_of_two() {
        return Err(CoreError::pre(format!("M = {m} must be a power of two")));
    }
    verify_guess_log(ora, n_eff, m.trailing_zeros(), classes, i_set, zeta, rng)
}

fn verify_guess_log<O: CindoraAccess>(
    ora: &mut O,
    n_eff: u64,
    log2_m: u32,
    classes: &[Vec<u32>],
    i_set: &[usize],
    zeta: Rat,
    rng: &mut RngStream,
) -> Result<GuessVerdict> {
    let log2_n = require_pow2_ge32(n_eff)?;
    check_zeta(zeta)?;
    let k = ora.k();
    if classes.len() != k {
        return Err(CoreError::pre(format!("expected {k} classes")));
    }
    if i_set.iter().any(|&i| i >= k) {
        return Err(CoreError::pre("root-class index out of range"));
    }
    let jmax = 2 * log2_n; // indices 0..=jmax-1
    let mut z: Vec<Vec<Vec<u32>>> = Vec::with_capacity(k);
    for class in classes {
        let mut per_j = Vec::with_capacity(jmax as usize);
        for j in 0..jmax {
            per_j.push(subsample_set(class, j, rng));
        }
        z.push(per_j);
    }
    let tuples = guess_tuples(k, log2_n, i_set, zeta, log2_m);
    let mut tried = 0u64;
    let mut query: Vec<Vec<u32>> = vec![Vec::new(); k];
    for tuple in &tuples {
        tried += 1;
        for i in 0..k {
            query[i] = z[i][tuple[i] as usize].clone();
        }
        if !ora.cindora(&query) {
            return Ok(GuessVerdict { yes: true, tuples_tried: tried });
        }
    }
    Ok(GuessVerdict { yes: false, tuples_tried: tried })
}

// ---------------------------------------------------------------------------
// CoarseLargeCore
// ---------------------------------------------------------------------------

fn median(mut vals: Vec<f64>) -> f64 {
    vals.sort_by(|a, b| a.partial_cmp(b).unwrap());
    vals[vals.len() / 2]
}

/// Coarse counter for instances with a large-root-set core: a power-of-two
/// ladder of guesses, each verified by repeated [`verify_guess`] calls,
/// median-boosted to failure probability `delta`.
#[allow(clippy::too_many_arguments)]
pub fn coarse_large_core(
    sess: &mut OracleSession,
    n_eff: u64,
    classes: &[Vec<u32>],
    i_set: &[usize],
    zeta: Rat,
    delta: f64,
    profile: &Profile,
    rng: &mut RngStream,
) -> Result<f64> {
    let log2_n = require_pow2_ge32(n_eff)?;
    check_zeta(zeta)?;
    if !(0.0 < delta && delta < 1.0 / 32.0) {
        return Err(CoreError::pre(format!("delta = {delta} outside (0, 1/32)")));
    }
    if profile.is_theory() {
        // Theory profile enforces the denominator bound on zeta.
        let k = sess.k() as u32;
        let cap = 64f64 * (n_eff as f64).powi(k as i32);
        if (*zeta.denom() as f64) > cap {
            return Err(CoreError::pre(format!(
                "zeta denominator {} exceeds O(n^k) = {cap}",
                zeta.denom()
            )));
        }
    }
    let k = sess.k();
    let i_len = i_set.len();
    let po = p_out(k, log2_n, i_len, zeta);
    let reps = profile.verify_guess_repeats(po, k as u32, log2_n);
    let b = (2.0 * k as f64).powi(5 * k as i32)
        * f64::from(log2_n).powi((k - i_len) as i32)
        * log2_inv(zeta).powi(i_len as i32);
    let boosts = profile.boost_col(delta);
    let mut vals = Vec::with_capacity(boosts as usize);
    for _ in 0..boosts {
        let mut run_rng = rng.split();
        let ladder_top = (k as u32) * log2_n; // M ranges over 2^0 .. 2^{k log n}
        let mut best: Option<u32> = None;
        for j in 0..=ladder_top {
            let mut yes = 0u64;
            for _ in 0..reps {
                let verdict =
                    verify_guess_log(sess, n_eff, j, classes, i_set, zeta, &mut run_rng)?;
                if verdict.yes {
                    yes += 1;
                }
            }
            if yes as f64 >= 0.75 * po * reps as f64 {
                best = Some(j);
            }
        }
        let full_independent = sess.cindora(classes);
        let m = if full_independent {
            0.0
        } else {
            match best {
                Some(j) => f64::from(j).exp2(),
                None => (n_eff as f64).powi(k as i32),
            }
        };
        vals.push(2.0 * m / b);
    }
    Ok(median(vals))
}

// ---------------------------------------------------------------------------
// Exact colourful enumeration
// ---------------------------------------------------------------------------

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum EnumOutcome {
    Edges(Vec<Vec<u32>>),
    TooDense,
    Rte,
}

/// Exhaustively lists the edges of `G[X_1..X_k]` by recursively halving every
/// class and recursing into child tuples whose colourful query is dependent.
/// Exact whenever it returns a list; `TooDense` past `m` edges.
pub fn colourful_enumerate(
    sess: &mut OracleSession,
    classes: &[Vec<u32>],
    m: u64,
    budget: u64,
    rng: &mut RngStream,
) -> Result<EnumOutcome> {
    if sess.mode() != OracleMode::Cindora {
        return Err(CoreError::pre("colourful_enumerate needs a cindora-mode session"));
    }
    let k = sess.k();
    if classes.len() != k {
        return Err(CoreError::pre(format!("expected {k} classes")));
    }
    let mut budget = budget;
    let mut edges: Vec<Vec<u32>> = Vec::new();
    enum Walk {
        Done,
        TooDense,
        Rte,
    }
    fn go(
        sess: &mut OracleSession,
        classes: &[Vec<u32>],
        m: u64,
        budget: &mut u64,
        edges: &mut Vec<Vec<u32>>,
        rng: &mut RngStream,
    ) -> Walk {
        if classes.iter().any(|c| c.is_empty()) {
            return Walk::Done;
        }
        if *budget == 0 {
            return Walk::Rte;
        }
        *budget -= 1;
        if sess.cindora(classes) {
            return Walk::Done;
        }
        if classes.iter().all(|c| c.len() == 1) {
            let mut edge: Vec<u32> = classes.iter().map(|c| c[0]).collect();
            edge.sort_unstable();
            edges.push(edge);
            if edges.len() as u64 > m {
                return Walk::TooDense;
            }
            return Walk::Done;
        }
        // Split every non-singleton class into two random near-equal halves.
        let k = classes.len();
        let mut halves: Vec<[Vec<u32>; 2]> = Vec::with_capacity(k);
        for class in classes {
            if class.len() == 1 {
                halves.push([class.clone(), Vec::new()]);
                continue;
            }
            let mut items = class.clone();
            let l = items.len();
            for j in 0..l - 1 {
                let pick = j + rng.below((l - j) as u64) as usize;
                items.swap(j, pick);
            }
            let hi = items.split_off(l.div_ceil(2));
            halves.push([items, hi]);
        }
        for bits in 0..(1u32 << k) {
            let mut child: Vec<Vec<u32>> = Vec::with_capacity(k);
            let mut any_empty = false;
            for (j, h) in halves.iter().enumerate() {
                let part = &h[((bits >> j) & 1) as usize];
                if part.is_empty() {
                    any_empty = true;
                    break;
                }
                child.push(part.clone());
            }
            if any_empty || child.len() != k {
                continue;
            }
            match go(sess, &child, m, budget, edges, rng) {
                Walk::Done => {}
                other => return other,
            }
        }
        Walk::Done
    }
    match go(sess, classes, m, &mut budget, &mut edges, rng) {
        Walk::Done => Ok(EnumOutcome::Edges(edges)),
        Walk::TooDense => Ok(EnumOutcome::TooDense),
        Walk::Rte => Ok(EnumOutcome::Rte),
    }
}

// ---------------------------------------------------------------------------
// Fine counter
// ---------------------------------------------------------------------------

/// Lemma-4.1-shaped coarse factor for the current cost model.
fn lemma41_b(k: usize, log2_n: u32, alpha: f64) -> f64 {
    let alpha_prime = alpha.ceil() - 1.0;
    let gap = (alpha - alpha_prime).max(1e-9);
    let ell = f64::from(log2_n);
    let inner = (8.0 * k as f64).log2() + 40.0 * k as f64 * (k as f64 - alpha_prime) / gap * ell.log2();
    (2.0 * k as f64).powi(5 * k as i32)
        * ell.powf(k as f64 - alpha_prime - 1.0)
        * inner.log2().max(1.0).powi(k as i32)
}

fn n_eff_for(classes: &[Vec<u32>]) -> u64 {
    let total: u64 = classes.iter().map(|c| c.len() as u64).sum();
    total.max(32).next_power_of_two()
}

/// Coarse estimate dispatcher used inside the fine counter: the full
/// [`colour_coarse`] when the Lemma-4.1 precondition `k <= log n/(log log n)²`
/// holds, otherwise the prior-work reduction (large-core helper with `I = ∅`
/// and `zeta = 1/33`).
fn fine_coarse_step(
    sess: &mut OracleSession,
    n_eff: u64,
    classes: &[Vec<u32>],
    delta: f64,
    profile: &Profile,
    rng: &mut RngStream,
) -> Result<f64> {
    let k = sess.k();
    let logn = (n_eff as f64).log2();
    let threshold = logn / logn.log2().max(1.0).powi(2);
    let delta = delta.min(1.0 / 33.0);
    if (k as f64) <= threshold {
        let boosts = profile.boost_col(delta);
        let mut vals = Vec::with_capacity(boosts as usize);
        for _ in 0..boosts {
            let mut run_rng = rng.split();
            vals.push(colour_coarse(sess, classes, profile, &mut run_rng)?.value);
        }
        Ok(median(vals))
    } else {
        coarse_large_core(sess, n_eff, classes, &[], rat(1, 33), delta, profile, rng)
    }
}

/// epsilon-approximation of `e(G[X_1..X_k])` for explicit classes: a coarse
/// bound sizes a subsampling rate, then exact counts of subsampled instances
/// are averaged and rescaled.
pub fn fine_count_on_classes(
    sess: &mut OracleSession,
    classes: &[Vec<u32>],
    eps: f64,
    delta: f64,
    profile: &Profile,
    rng: &mut RngStream,
) -> Result<EstValue> {
    let k = sess.k();
    let n_eff = n_eff_for(classes);
    let log2_n = n_eff.trailing_zeros();
    let m_hat = fine_coarse_step(sess, n_eff, classes, delta / 3.0, profile, rng)?;
    let b_eff = profile.fine_b(lemma41_b(k, log2_n, sess.model().alpha()));
    let s0 = 64.0 * eps.powi(-2);
    let enum_cap = (8.0 * s0).ceil() as u64;
    let enum_budget = 1u64 << 26;
    if m_hat * b_eff <= s0 {
        match colourful_enumerate(sess, classes, enum_cap, enum_budget, rng)? {
            EnumOutcome::Edges(edges) => return Ok(EstValue::Value(edges.len() as f64)),
            EnumOutcome::TooDense | EnumOutcome::Rte => {} // fall through to sampling
        }
    }
    let a = ((m_hat.max(1.0) * b_eff / s0).log2() / k as f64).ceil().max(0.0) as u32;
    let reps = profile.fine_repeats(eps, delta, b_eff);
    let mut sum = 0u64;
    for _ in 0..reps {
        let sub: Vec<Vec<u32>> =
            classes.iter().map(|c| subsample_set(c, a, rng)).collect();
        match colourful_enumerate(sess, &sub, enum_cap, enum_budget, rng)? {
            EnumOutcome::Edges(edges) => sum += edges.len() as u64,
            EnumOutcome::TooDense | EnumOutcome::Rte => return Ok(EstValue::Rte),
        }
    }
    let scale = (f64::from(a) * k as f64).exp2();
    Ok(EstValue::Value(sum as f64 * scale / reps as f64))
}

/// epsilon-approximation of `e(G)` through the colourful oracle. Sessions
/// over a partitioned graph are counted directly on their classes; plain
/// sessions go through uniform random colourings with the `k!/k^k`
/// colourful-fraction rescale.
pub fn fine_count(
    sess: &mut OracleSession,
    eps: f64,
    delta: f64,
    profile: &Profile,
    rng: &mut RngStream,
) -> Result<Estimate> {
    if sess.mode() != OracleMode::Cindora {
        return Err(CoreError::pre("fine_count needs a cindora-mode session"));
    }
    if !(0.0 < eps && eps < 1.0) || !(0.0 < delta && delta < 1.0) {
        return Err(CoreError::pre("eps and delta must lie in (0, 1)"));
    }
    let (cost0, queries0) = sess.ledger_total();
    let value = match sess.graph().classes().map(<[Vec<u32>]>::to_vec) {
        Some(classes) => fine_count_on_classes(sess, &classes, eps, delta, profile, rng)?,
        None => fine_count_colour_coded(sess, eps, delta, profile, rng)?,
    };
    let (cost1, queries1) = sess.ledger_total();
    Ok(Estimate {
        value,
        halted_at_i: None,
        oracle_cost: cost1 - cost0,
        queries: queries1 - queries0,
        seed: rng.seed(),
        stream_id: rng.stream_id(),
        iterations: Vec::new(),
    })
}

fn colour_fraction(k: usize) -> f64 {
    // k!/k^k
    let mut f = 1.0f64;
    for j in 1..=k {
        f *= j as f64 / k as f64;
    }
    f
}

fn fine_count_colour_coded(
    sess: &mut OracleSession,
    eps: f64,
    delta: f64,
    profile: &Profile,
    rng: &mut RngStream,
) -> Result<EstValue> {
    let k = sess.k();
    let n_real = sess.n();
    let universe: Vec<u32> = (1..=n_real).collect();
    let n_eff = u64::from(n_real).max(32).next_power_of_two();
    let log2_n = n_eff.trailing_zeros();
    let gamma = colour_fraction(k);

    // Coarse step: median over fresh colourings of the coarse counter.
    let boosts = profile.boost_col((delta / 3.0).min(1.0 / 33.0));
    let mut vals = Vec::with_capacity(boosts as usize);
    for _ in 0..boosts {
        let mut run_rng = rng.split();
        let classes = uniform_k_partition(&universe, k, &mut run_rng);
        let v = coarse_large_core(
            sess,
            n_eff,
            &classes,
            &[],
            rat(1, 33),
            1.0 / 33.0,
            profile,
            &mut run_rng,
        )?;
        vals.push(v / gamma);
    }
    let m_hat = median(vals);

    let b_eff = profile.fine_b(lemma41_b(k, log2_n, sess.model().alpha()));
    let s0 = 64.0 * eps.powi(-2);
    let enum_cap = (8.0 * s0).ceil() as u64;
    let enum_budget = 1u64 << 26;
    if m_hat * b_eff <= s0 {
        // Exact-by-union: every edge is colourful in some colouring with
        // overwhelming probability at the profile's colouring count.
        let t_cc = profile.sparse_colourings(k as u32, n_real as usize);
        let mut union: std::collections::HashSet<Vec<u32>> = std::collections::HashSet::new();
        let mut fell_through = false;
        for _ in 0..t_cc {
            let classes = uniform_k_partition(&universe, k, rng);
            match colourful_enumerate(sess, &classes, enum_cap, enum_budget, rng)? {
                EnumOutcome::Edges(edges) => union.extend(edges),
                EnumOutcome::TooDense | EnumOutcome::Rte => {
                    fell_through = true;
                    break;
                }
            }
        }
        if !fell_through {
            return Ok(EstValue::Value(union.len() as f64));
        }
    }
    let a = ((m_hat.max(1.0) * gamma * b_eff / s0).log2() / k as f64).ceil().max(0.0) as u32;
    let reps = profile.fine_repeats(eps, delta, b_eff);
    let mut sum = 0u64;
    for _ in 0..reps {
        let classes = uniform_k_partition(&universe, k, rng);
        let sub: Vec<Vec<u32>> =
            classes.iter().map(|c| subsample_set(c, a, rng)).collect();
        match colourful_enumerate(sess, &sub, enum_cap, enum_budget, rng)? {
            EnumOutcome::Edges(edges) => sum += edges.len() as u64,
            EnumOutcome::TooDense | EnumOutcome::Rte => return Ok(EstValue::Rte),
        }
    }
    let scale = (f64::from(a) * k as f64).exp2() / gamma;
    Ok(EstValue::Value(sum as f64 * scale / reps as f64))
}

// ---------------------------------------------------------------------------
// CoarseSmallCore
// ---------------------------------------------------------------------------

/// Coarse counter for instances with a small-root-set core: classes in `I`
/// are covered by blocks of size at most `t`, classes outside `I` are
/// subsampled at rate `t/n`, and exact sub-counts over all block combinations
/// are rescaled by `(n/t)^{k-|I|}`. Median-boosted to `delta`.
#[allow(clippy::too_many_arguments)]
pub fn coarse_small_core(
    sess: &mut OracleSession,
    n_eff: u64,
    classes: &[Vec<u32>],
    i_set: &[usize],
    t: u64,
    delta: f64,
    profile: &Profile,
    rng: &mut RngStream,
) -> Result<f64> {
    if !n_eff.is_power_of_two() {
        return Err(CoreError::pre(format!("n = {n_eff} must be a power of two")));
    }
    let k = sess.k();
    let min_t = (12.0 * (k as f64).log2()).ceil() as u64;
    if t > n_eff || t < min_t.max(1) {
        return Err(CoreError::pre(format!("need n >= t >= 12 log k, got t = {t}")));
    }
    if i_set.len() >= k {
        return Err(CoreError::pre("I must be a proper subset of [k]"));
    }
    if i_set.iter().any(|&i| i >= k) {
        return Err(CoreError::pre("root-class index out of range"));
    }
    if !(0.0 < delta && delta < 1.0) {
        return Err(CoreError::pre(format!("delta = {delta} outside (0, 1)")));
    }
    let boosts = profile.boost_col(delta);
    let delta_inner = profile.inner_counter_delta(n_eff, k as u32);
    let mut vals = Vec::with_capacity(boosts as usize);
    for _ in 0..boosts {
        let mut run_rng = rng.split();
        vals.push(coarse_small_core_helper(
            sess,
            n_eff,
            classes,
            i_set,
            t,
            delta_inner,
            profile,
            &mut run_rng,
        )?);
    }
    Ok(median(vals))
}

#[allow(clippy::too_many_arguments)]
fn coarse_small_core_helper(
    sess: &mut OracleSession,
    n_eff: u64,
    classes: &[Vec<u32>],
    i_set: &[usize],
    t: u64,
    delta_inner: f64,
    profile: &Profile,
    rng: &mut RngStream,
) -> Result<f64> {
    let k = sess.k();
    let rate = t as f64 / n_eff as f64;
    let mut blocks: Vec<Vec<Vec<u32>>> = Vec::with_capacity(k);
    for (i, class) in classes.iter().enumerate() {
        if i_set.contains(&i) {
            let mut chunks: Vec<Vec<u32>> =
                class.chunks(t as usize).map(<[u32]>::to_vec).collect();
            if chunks.is_empty() {
                chunks.push(Vec::new());
            }
            blocks.push(chunks);
        } else {
            let sub: Vec<u32> = class.iter().copied().filter(|_| rng.bernoulli(rate)).collect();
            if sub.len() as u64 > 2 * t {
                return Ok(0.0); // halt with an arbitrary value
            }
            blocks.push(vec![sub]);
        }
    }
    // Sum the sub-counts over every block combination.
    let mut total = 0.0f64;
    let mut idx = vec![0usize; k];
    loop {
        let pi_classes: Vec<Vec<u32>> =
            (0..k).map(|i| blocks[i][idx[i]].clone()).collect();
        if pi_classes.iter().all(|c| !c.is_empty()) {
            let v = fine_count_on_classes(sess, &pi_classes, 0.5, delta_inner, profile, rng)?;
            total += v.numeric().unwrap_or(0.0);
        }
        // Odometer over the block choices of classes in I.
        let mut pos = k;
        loop {
            if pos == 0 {
                let rescale = ((n_eff as f64) / t as f64).powi((k - i_set.len()) as i32);
                return Ok(rescale * total);
            }
            pos -= 1;
            if idx[pos] + 1 < blocks[pos].len() {
                idx[pos] += 1;
                for j in pos + 1..k {
                    idx[j] = 0;
                }
                break;
            }
        }
    }
}

// ---------------------------------------------------------------------------
// ColourCoarse dispatcher
// ---------------------------------------------------------------------------

#[derive(Clone, Debug)]
pub struct CoarseOutcome {
    pub value: f64,
    /// Whether the instance was counted exactly by the brute-force branch.
    pub brute: bool,
    /// The Lemma-4.1 size precondition `k <= log n/(log log n)²` failed, so
    /// the multiplicative bound is heuristic at this size.
    pub heuristic_bound: bool,
}

/// Exact count of `G[X_1..X_k]` through the oracle: singleton queries over
/// the class product when small, recursive enumeration otherwise.
fn brute_force_colourful(
    sess: &mut OracleSession,
    classes: &[Vec<u32>],
    rng: &mut RngStream,
) -> Result<f64> {
    let product: u128 = classes.iter().map(|c| c.len() as u128).product();
    if product == 0 {
        return Ok(0.0);
    }
    if product <= 65_536 {
        let k = sess.k();
        let mut idx = vec![0usize; k];
        let mut count = 0u64;
        loop {
            let tuple: Vec<Vec<u32>> =
                (0..k).map(|i| vec![classes[i][idx[i]]]).collect();
            if !sess.cindora(&tuple) {
                count += 1;
            }
            let mut pos = k;
            loop {
                if pos == 0 {
                    return Ok(count as f64);
                }
                pos -= 1;
                if idx[pos] + 1 < classes[pos].len() {
                    idx[pos] += 1;
                    for j in pos + 1..k {
                        idx[j] = 0;
                    }
                    break;
                }
            }
        }
    }
    match colourful_enumerate(sess, classes, u64::MAX, u64::MAX, rng)? {
        EnumOutcome::Edges(edges) => Ok(edges.len() as f64),
        _ => unreachable!("unbounded enumeration cannot overflow"),
    }
}

/// Coarse multiplicative approximation of `e(G[X_1..X_k])`: tries every
/// possible root-class set `R`, dispatching small `R` to the block counter
/// and large `R` to the guess-ladder counter, and returns the maximum.
pub fn colour_coarse(
    sess: &mut OracleSession,
    classes: &[Vec<u32>],
    profile: &Profile,
    rng: &mut RngStream,
) -> Result<CoarseOutcome> {
    if sess.mode() != OracleMode::Cindora {
        return Err(CoreError::pre("colour_coarse needs a cindora-mode session"));
    }
    let k = sess.k();
    if classes.len() != k {
        return Err(CoreError::pre(format!("expected {k} classes")));
    }
    let alpha = sess.model().alpha();
    let alpha_prime = alpha.ceil() as i64 - 1;
    let n_eff = u64::from(sess.padded_n()).max(32).next_power_of_two();
    let log2_n = n_eff.trailing_zeros();
    let t = profile.colour_coarse_t(n_eff, k as u32, alpha, alpha_prime as f64);
    let logn = f64::from(log2_n);
    let heuristic_bound = (k as f64) > logn / logn.log2().max(1.0).powi(2);

    let brute_cutoff = (12.0 * (k as f64).log2()).ceil() as u64;
    if u64::from(sess.padded_n()) < 32 || t < brute_cutoff.max(1) {
        let value = brute_force_colourful(sess, classes, rng)?;
        return Ok(CoarseOutcome { value, brute: true, heuristic_bound });
    }

    // zeta = (t/n)^{2k(k-alpha')} / (8k), clamped when the exact rational
    // would overflow 128-bit denominators.
    let expo = 2 * (k as i64) * (k as i64 - alpha_prime);
    let ratio = rat(t as i128, n_eff as i128);
    let mut zeta = rat(1, 8 * k as i128);
    let mut overflowed = false;
    for _ in 0..expo {
        let next_num = zeta.numer().checked_mul(*ratio.numer());
        let next_den = zeta.denom().checked_mul(*ratio.denom());
        match (next_num, next_den) {
            (Some(nn), Some(nd)) => zeta = Rat::new(nn, nd),
            _ => {
                overflowed = true;
                break;
            }
        }
    }
    if overflowed || *zeta.denom() > (1i128 << 110) {
        zeta = Rat::new(1, 1i128 << 110);
    }

    let delta = 1.0 / f64::from(1u32 << (k as u32 + 5).min(30));
    let mut best = f64::NEG_INFINITY;
    for mask in 0u32..(1u32 << k) {
        let r: Vec<usize> = (0..k).filter(|&i| mask >> i & 1 == 1).collect();
        let z = if (r.len() as i64) <= alpha_prime {
            coarse_small_core(sess, n_eff, classes, &r, t, delta, profile, rng)?
        } else {
            coarse_large_core(sess, n_eff, classes, &r, zeta, delta, profile, rng)?
        };
        if z > best {
            best = z;
        }
    }
    Ok(CoarseOutcome { value: best, brute: false, heuristic_bound })
}
