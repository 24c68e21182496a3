//! Oracle sessions: the two independence oracles with bit-exact semantics,
//! per-query cost accounting in an append-only ledger, padding-stripping, and
//! induced-subgraph views.

use crate::cost::{CostModel, KahanSum};
use crate::error::{CoreError, Result};
use crate::hypergraph::{Hypergraph, Marks, PartitionedHypergraph};
use crate::rng::{uniform_k_partition, RngStream};
use std::sync::Arc;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OracleMode {
    Indora,
    Cindora,
}

/// One charged oracle query. `size` is the vertex count after padding strip.
#[derive(Clone, Copy, Debug)]
pub struct QueryRecord {
    pub kind: OracleMode,
    pub size: u64,
    pub charge: f64,
    pub answer: bool,
}

/// Append-only query ledger. Totals are always tracked; full records only
/// when recording is enabled.
#[derive(Debug, Default)]
pub struct Ledger {
    count: u64,
    total: KahanSum,
    exact: Option<u128>,
    records: Option<Vec<QueryRecord>>,
}

impl Ledger {
    fn new(record: bool) -> Self {
        Ledger {
            count: 0,
            total: KahanSum::default(),
            exact: Some(0),
            records: if record { Some(Vec::new()) } else { None },
        }
    }

    fn append(&mut self, rec: QueryRecord, exact_charge: Option<u128>) {
        self.count += 1;
        self.total.add(rec.charge);
        self.exact = match (self.exact, exact_charge) {
            (Some(acc), Some(c)) => acc.checked_add(c),
            _ => None,
        };
        if let Some(v) = self.records.as_mut() {
            v.push(rec);
        }
    }

    pub fn count(&self) -> u64 {
        self.count
    }

    pub fn total(&self) -> f64 {
        self.total.total()
    }

    /// Exact integer total, available while every charge was exact.
    pub fn exact_total(&self) -> Option<u128> {
        self.exact
    }

    pub fn records(&self) -> Option<&[QueryRecord]> {
        self.records.as_deref()
    }
}

/// Graph behind a session: plain or with declared vertex classes.
#[derive(Clone, Debug)]
pub enum SessionGraph {
    Plain(Arc<Hypergraph>),
    Partitioned(Arc<PartitionedHypergraph>),
}

impl SessionGraph {
    pub fn base(&self) -> &Hypergraph {
        match self {
            SessionGraph::Plain(g) => g,
            SessionGraph::Partitioned(p) => &p.base,
        }
    }

    pub fn classes(&self) -> Option<&[Vec<u32>]> {
        match self {
            SessionGraph::Plain(_) => None,
            SessionGraph::Partitioned(p) => Some(&p.classes),
        }
    }
}

struct Scratch {
    epoch: u32,
    stamp: Vec<u32>,
    class_id: Vec<u8>,
}

impl Scratch {
    fn new(n: u32) -> Self {
        Scratch { epoch: 0, stamp: vec![0; n as usize + 1], class_id: vec![0; n as usize + 1] }
    }

    fn next_epoch(&mut self) -> u32 {
        self.epoch = self.epoch.wrapping_add(1);
        if self.epoch == 0 {
            self.stamp.iter_mut().for_each(|s| *s = 0);
            self.epoch = 1;
        }
        self.epoch
    }
}

/// An access handle bundling a hypergraph, a cost model, and a query ledger.
///
/// Estimators see the graph only through [`OracleSession::indora_query`] and
/// [`OracleSession::cindora_query`]; every answered query is charged
/// `cost(size after padding strip)` and appended to the ledger.
pub struct OracleSession {
    graph: SessionGraph,
    model: CostModel,
    mode: OracleMode,
    ledger: Ledger,
    padding: u32,
    enforce_classes: bool,
    class_violations: u64,
    scratch: Scratch,
}

impl OracleSession {
    pub fn new(graph: SessionGraph, model: CostModel, mode: OracleMode) -> Result<Self> {
        let base = graph.base();
        model.validate_for(base.k(), u64::from(base.n()).max(1))?;
        let n = base.n();
        Ok(OracleSession {
            graph,
            model,
            mode,
            ledger: Ledger::new(false),
            padding: 0,
            enforce_classes: false,
            class_violations: 0,
            scratch: Scratch::new(n),
        })
    }

    pub fn plain(graph: Arc<Hypergraph>, model: CostModel, mode: OracleMode) -> Result<Self> {
        Self::new(SessionGraph::Plain(graph), model, mode)
    }

    pub fn partitioned(
        graph: Arc<PartitionedHypergraph>,
        model: CostModel,
        mode: OracleMode,
    ) -> Result<Self> {
        Self::new(SessionGraph::Partitioned(graph), model, mode)
    }

    /// Enable full per-query records.
    pub fn with_recording(mut self) -> Self {
        self.ledger = Ledger::new(true);
        self
    }

    /// Require cindora queries to respect the declared classes (violations
    /// are counted, not repaired).
    pub fn with_class_enforcement(mut self) -> Self {
        self.enforce_classes = true;
        self
    }

    /// Declare padding vertices beyond the graph's real vertex set. They may
    /// appear in queries but are stripped before answering and charging.
    pub fn set_padding(&mut self, padding: u32) {
        self.padding = padding;
    }

    pub fn padding(&self) -> u32 {
        self.padding
    }

    /// Universe size including padding vertices.
    pub fn padded_n(&self) -> u32 {
        self.graph.base().n() + self.padding
    }

    pub fn n(&self) -> u32 {
        self.graph.base().n()
    }

    pub fn k(&self) -> usize {
        self.graph.base().k()
    }

    pub fn mode(&self) -> OracleMode {
        self.mode
    }

    pub fn graph(&self) -> &SessionGraph {
        &self.graph
    }

    pub fn model(&self) -> &CostModel {
        &self.model
    }

    pub fn ledger(&self) -> &Ledger {
        &self.ledger
    }

    /// `(total cost, query count)`.
    pub fn ledger_total(&self) -> (f64, u64) {
        (self.ledger.total(), self.ledger.count())
    }

    pub fn class_violations(&self) -> u64 {
        self.class_violations
    }

    /// Uncoloured independence query: 1 iff `G[S]` (padding stripped) is
    /// edgeless.
    pub fn indora_query(&mut self, s: &[u32]) -> Result<bool> {
        if self.mode != OracleMode::Indora {
            return Err(CoreError::pre("indora_query on a cindora-mode session"));
        }
        let padded = self.padded_n();
        if let Some(&v) = s.iter().find(|&&v| v == 0 || v > padded) {
            return Err(CoreError::pre(format!("query vertex {v} outside universe 1..={padded}")));
        }
        Ok(self.indora_raw(s, None))
    }

    /// Colourful independence query on pairwise-disjoint classes: 1 iff no
    /// edge has exactly one vertex in each class.
    pub fn cindora_query(&mut self, classes: &[Vec<u32>]) -> Result<bool> {
        if self.mode != OracleMode::Cindora {
            return Err(CoreError::pre("cindora_query on an indora-mode session"));
        }
        if classes.len() != self.k() {
            return Err(CoreError::pre(format!(
                "cindora query needs {} classes, got {}",
                self.k(),
                classes.len()
            )));
        }
        let padded = self.padded_n();
        // Disjointness is a hard precondition, not an oracle answer.
        let epoch = self.scratch.next_epoch();
        for (ci, class) in classes.iter().enumerate() {
            for &v in class {
                if v == 0 || v > padded {
                    return Err(CoreError::pre(format!(
                        "query vertex {v} outside universe 1..={padded}"
                    )));
                }
                let idx = v as usize;
                if idx < self.scratch.stamp.len() && self.scratch.stamp[idx] == epoch {
                    return Err(CoreError::pre(format!(
                        "cindora query classes overlap at vertex {v}"
                    )));
                }
                if idx < self.scratch.stamp.len() {
                    self.scratch.stamp[idx] = epoch;
                    self.scratch.class_id[idx] = (ci + 1) as u8;
                }
            }
        }
        if self.enforce_classes {
            if let Some(declared) = self.graph.classes() {
                let n = self.n();
                let mut declared_of = vec![0u8; n as usize + 1];
                for (ci, class) in declared.iter().enumerate() {
                    for &v in class {
                        declared_of[v as usize] = (ci + 1) as u8;
                    }
                }
                'outer: for (ci, class) in classes.iter().enumerate() {
                    for &v in class {
                        if v <= n && declared_of[v as usize] != (ci + 1) as u8 {
                            self.class_violations += 1;
                            break 'outer;
                        }
                    }
                }
            }
        }
        Ok(self.cindora_with_mark(classes, epoch))
    }

    // -- internals ---------------------------------------------------------

    /// Strips padding (and an optional view mask), charges, answers.
    pub(crate) fn indora_raw(&mut self, s: &[u32], mask: Option<&Marks>) -> bool {
        let n = self.n();
        let epoch = self.scratch.next_epoch();
        let mut size = 0u64;
        let mut stripped: Vec<u32> = Vec::with_capacity(s.len().min(n as usize));
        for &v in s {
            if v == 0 || v > n {
                continue; // padding vertex: stripped before charging
            }
            if let Some(m) = mask {
                if !m.contains(v) {
                    continue;
                }
            }
            if self.scratch.stamp[v as usize] != epoch {
                self.scratch.stamp[v as usize] = epoch;
                stripped.push(v);
                size += 1;
            }
        }
        let answer = self.eval_indora(&stripped, epoch);
        self.charge(OracleMode::Indora, size, answer);
        answer
    }

    pub(crate) fn cindora_raw(&mut self, classes: &[Vec<u32>], mask: Option<&Marks>) -> bool {
        let n = self.n();
        let epoch = self.scratch.next_epoch();
        for (ci, class) in classes.iter().enumerate() {
            for &v in class {
                if v == 0 || v > n {
                    continue;
                }
                if let Some(m) = mask {
                    if !m.contains(v) {
                        continue;
                    }
                }
                self.scratch.stamp[v as usize] = epoch;
                self.scratch.class_id[v as usize] = (ci + 1) as u8;
            }
        }
        self.cindora_with_mark(classes, epoch)
    }

    /// Assumes the scratch map was stamped for `epoch`; counts the stamped
    /// size, evaluates, charges.
    fn cindora_with_mark(&mut self, classes: &[Vec<u32>], epoch: u32) -> bool {
        let n = self.n();
        let mut size = 0u64;
        let mut smallest: Option<(usize, u32)> = None; // (class len in G, some member)
        let mut any_empty = false;
        for class in classes {
            let mut len = 0usize;
            let mut member = 0u32;
            for &v in class {
                if v >= 1 && v <= n && self.scratch.stamp[v as usize] == epoch {
                    len += 1;
                    member = v;
                }
            }
            size += len as u64;
            if len == 0 {
                any_empty = true;
            } else if smallest.map_or(true, |(l, _)| len < l) {
                smallest = Some((len, member));
            }
        }
        let answer = if any_empty {
            true
        } else {
            !self.eval_cindora_colourful(classes, epoch)
        };
        self.charge(OracleMode::Cindora, size, answer);
        answer
    }

    fn charge(&mut self, kind: OracleMode, size: u64, answer: bool) {
        let ch = self.model.charge(size);
        self.ledger.append(QueryRecord { kind, size, charge: ch.value, answer }, ch.exact);
    }

    /// True iff some edge lies entirely inside the stamped set.
    fn eval_indora(&self, stripped: &[u32], epoch: u32) -> bool {
        if stripped.is_empty() {
            return true;
        }
        let g = self.graph.base();
        let m = g.edge_count() as usize;
        if m == 0 {
            return true;
        }
        let inside =
            |e: &[u32]| e.iter().all(|&v| self.scratch.stamp[v as usize] == epoch);
        if m > 64 && stripped.len() * 8 < m {
            let inc = g.incidence();
            let deg_sum: usize = stripped.iter().map(|&v| inc[v as usize].len()).sum();
            if deg_sum < m {
                for &v in stripped {
                    for &ei in &inc[v as usize] {
                        if inside(g.edge(ei as usize)) {
                            return false;
                        }
                    }
                }
                return true;
            }
        }
        !g.edges().any(|e| inside(e))
    }

    /// True iff some edge is colourful for the stamped class map.
    fn eval_cindora_colourful(&self, classes: &[Vec<u32>], epoch: u32) -> bool {
        let g = self.graph.base();
        let k = g.k();
        let m = g.edge_count() as usize;
        if m == 0 {
            return false;
        }
        let colourful = |e: &[u32]| {
            let mut seen = 0u64;
            for &v in e {
                if self.scratch.stamp[v as usize] != epoch {
                    return false;
                }
                let id = self.scratch.class_id[v as usize];
                let bit = 1u64 << (id - 1);
                if seen & bit != 0 {
                    return false;
                }
                seen |= bit;
            }
            seen.count_ones() as usize == k
        };
        if m > 64 {
            let inc = g.incidence();
            let smallest = classes
                .iter()
                .min_by_key(|c| c.len())
                .expect("non-empty class list");
            let deg_sum: usize = smallest
                .iter()
                .filter(|&&v| v >= 1 && v <= g.n())
                .map(|&v| inc[v as usize].len())
                .sum();
            if deg_sum < m {
                for &v in smallest {
                    if v < 1 || v > g.n() {
                        continue;
                    }
                    for &ei in &inc[v as usize] {
                        if colourful(g.edge(ei as usize)) {
                            return true;
                        }
                    }
                }
                return false;
            }
        }
        g.edges().any(colourful)
    }

    /// Induced-subgraph view `G[X]`: queries are intersected with `X` and
    /// charged on the intersection; the ledger is shared with the parent.
    pub fn induced_view(&mut self, x: &[u32]) -> SessionView<'_> {
        let mask = Marks::from_set(self.padded_n(), x);
        SessionView { sess: self, mask }
    }
}

/// View over a session answering as if the graph were `G[X]`.
pub struct SessionView<'a> {
    sess: &'a mut OracleSession,
    mask: Marks,
}

impl SessionView<'_> {
    pub fn indora_query(&mut self, s: &[u32]) -> Result<bool> {
        if self.sess.mode != OracleMode::Indora {
            return Err(CoreError::pre("indora_query on a cindora-mode session"));
        }
        Ok(self.sess.indora_raw(s, Some(&self.mask)))
    }

    pub fn cindora_query(&mut self, classes: &[Vec<u32>]) -> Result<bool> {
        if self.sess.mode != OracleMode::Cindora {
            return Err(CoreError::pre("cindora_query on an indora-mode session"));
        }
        Ok(self.sess.cindora_raw(classes, Some(&self.mask)))
    }

    /// Narrow the view further to `G[X ∩ Y]`.
    pub fn narrowed(mut self, y: &[u32]) -> Self {
        let inner = Marks::from_set(self.sess.padded_n(), y);
        let n = self.sess.padded_n();
        for v in 1..=n {
            if self.mask.contains(v) && !inner.contains(v) {
                self.mask.clear(v);
            }
        }
        self
    }

    pub fn session(&mut self) -> &mut OracleSession {
        self.sess
    }
}

/// Access to an (effective) uncoloured independence oracle. Implemented by
/// sessions and views; estimators are written against this.
pub trait IndoraAccess {
    fn universe(&self) -> u32;
    fn k(&self) -> usize;
    fn indora(&mut self, s: &[u32]) -> bool;
}

impl IndoraAccess for OracleSession {
    fn universe(&self) -> u32 {
        self.padded_n()
    }

    fn k(&self) -> usize {
        OracleSession::k(self)
    }

    fn indora(&mut self, s: &[u32]) -> bool {
        debug_assert_eq!(self.mode, OracleMode::Indora);
        self.indora_raw(s, None)
    }
}

impl IndoraAccess for SessionView<'_> {
    fn universe(&self) -> u32 {
        self.sess.padded_n()
    }

    fn k(&self) -> usize {
        self.sess.k()
    }

    fn indora(&mut self, s: &[u32]) -> bool {
        debug_assert_eq!(self.sess.mode, OracleMode::Indora);
        self.sess.indora_raw(s, Some(&self.mask))
    }
}

/// Access to a colourful independence oracle.
pub trait CindoraAccess {
    fn universe(&self) -> u32;
    fn k(&self) -> usize;
    fn cindora(&mut self, classes: &[Vec<u32>]) -> bool;
}

impl CindoraAccess for OracleSession {
    fn universe(&self) -> u32 {
        self.padded_n()
    }

    fn k(&self) -> usize {
        OracleSession::k(self)
    }

    fn cindora(&mut self, classes: &[Vec<u32>]) -> bool {
        debug_assert_eq!(self.mode, OracleMode::Cindora);
        self.cindora_raw(classes, None)
    }
}

impl CindoraAccess for SessionView<'_> {
    fn universe(&self) -> u32 {
        self.sess.padded_n()
    }

    fn k(&self) -> usize {
        self.sess.k()
    }

    fn cindora(&mut self, classes: &[Vec<u32>]) -> bool {
        debug_assert_eq!(self.sess.mode, OracleMode::Cindora);
        self.sess.cindora_raw(classes, Some(&self.mask))
    }
}

/// One-sided simulation of `indora(G)_S` from the colourful oracle: answers 0
/// if any of `trials` uniformly random k-partitions of `S` contains a
/// colourful edge; returns 1 only if every trial returned 1.
pub fn simulate_indora_via_cindora(
    sess: &mut OracleSession,
    s: &[u32],
    trials: u32,
    rng: &mut RngStream,
) -> Result<bool> {
    if sess.mode() != OracleMode::Cindora {
        return Err(CoreError::pre("simulation requires a cindora-mode session"));
    }
    if trials == 0 {
        return Err(CoreError::pre("trials must be >= 1"));
    }
    let k = sess.k();
    for _ in 0..trials {
        let classes = uniform_k_partition(s, k, rng);
        if !sess.cindora_query(&classes)? {
            return Ok(false);
        }
    }
    Ok(true)
}
