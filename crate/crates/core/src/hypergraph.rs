//! k-uniform hypergraphs over `[n]` with canonical edge storage, plus the
//! partitioned variant used by the colourful algorithms and generators.

use crate::error::{CoreError, Result};
use std::collections::BTreeSet;
use std::sync::OnceLock;

/// A k-uniform hypergraph on vertex set `{1, ..., n}`.
///
/// Edges are stored flat (stride `k`), each sorted ascending, the edge list
/// sorted lexicographically and deduplicated.
#[derive(Debug)]
pub struct Hypergraph {
    n: u32,
    k: usize,
    edges: Vec<u32>,
    incidence: OnceLock<Vec<Vec<u32>>>,
}

impl Clone for Hypergraph {
    fn clone(&self) -> Self {
        Hypergraph {
            n: self.n,
            k: self.k,
            edges: self.edges.clone(),
            incidence: OnceLock::new(),
        }
    }
}

/// Validates and canonicalizes an edge list into a [`Hypergraph`].
pub fn build_hypergraph<I, E>(n: u32, k: usize, edges: I) -> Result<Hypergraph>
where
    I: IntoIterator<Item = E>,
    E: AsRef<[u32]>,
{
    if k < 2 || (k as u64) > u64::from(n) {
        return Err(CoreError::pre(format!("need 2 <= k <= n, got k = {k}, n = {n}")));
    }
    let mut canonical: BTreeSet<Vec<u32>> = BTreeSet::new();
    for e in edges {
        let raw = e.as_ref();
        if raw.len() != k {
            return Err(CoreError::MalformedEdge {
                edge: raw.to_vec(),
                reason: format!("has {} vertices, expected {k}", raw.len()),
            });
        }
        let mut v = raw.to_vec();
        v.sort_unstable();
        for w in v.windows(2) {
            if w[0] == w[1] {
                return Err(CoreError::MalformedEdge {
                    edge: raw.to_vec(),
                    reason: format!("vertex {} repeated", w[0]),
                });
            }
        }
        if v[0] == 0 || v[k - 1] > n {
            return Err(CoreError::MalformedEdge {
                edge: raw.to_vec(),
                reason: format!("vertex out of range 1..={n}"),
            });
        }
        canonical.insert(v);
    }
    let mut flat = Vec::with_capacity(canonical.len() * k);
    for e in canonical {
        flat.extend_from_slice(&e);
    }
    Ok(Hypergraph { n, k, edges: flat, incidence: OnceLock::new() })
}

impl Hypergraph {
    /// Edgeless hypergraph.
    pub fn empty(n: u32, k: usize) -> Result<Self> {
        build_hypergraph(n, k, std::iter::empty::<Vec<u32>>())
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn edge_count(&self) -> u64 {
        (self.edges.len() / self.k) as u64
    }

    pub fn edge(&self, i: usize) -> &[u32] {
        &self.edges[i * self.k..(i + 1) * self.k]
    }

    pub fn edges(&self) -> impl Iterator<Item = &[u32]> + '_ {
        self.edges.chunks_exact(self.k)
    }

    /// Membership test for a sorted k-tuple.
    pub fn is_edge(&self, sorted: &[u32]) -> bool {
        debug_assert_eq!(sorted.len(), self.k);
        let m = self.edge_count() as usize;
        let (mut lo, mut hi) = (0usize, m);
        while lo < hi {
            let mid = (lo + hi) / 2;
            match self.edge(mid).cmp(sorted) {
                std::cmp::Ordering::Less => lo = mid + 1,
                std::cmp::Ordering::Greater => hi = mid,
                std::cmp::Ordering::Equal => return true,
            }
        }
        false
    }

    /// Per-vertex incidence index (edge indices), built lazily.
    pub fn incidence(&self) -> &Vec<Vec<u32>> {
        self.incidence.get_or_init(|| {
            let mut inc = vec![Vec::new(); self.n as usize + 1];
            for (i, e) in self.edges().enumerate() {
                for &v in e {
                    inc[v as usize].push(i as u32);
                }
            }
            inc
        })
    }

    pub fn degree(&self, v: u32) -> usize {
        self.incidence()[v as usize].len()
    }

    /// `e(G[S])`: edges entirely inside `S`. Brute-force edge scan.
    pub fn exact_edge_count(&self, s: &[u32]) -> u64 {
        let mark = Marks::from_set(self.n, s);
        self.edges().filter(|e| e.iter().all(|&v| mark.contains(v))).count() as u64
    }

    /// Edges with exactly one vertex in each class (classes must be disjoint).
    pub fn colourful_edge_count(&self, classes: &[Vec<u32>]) -> u64 {
        let cm = ClassMap::build(self.n, classes);
        self.edges().filter(|e| cm.is_colourful(e, classes.len())).count() as u64
    }
}

/// Simple bitset keyed by vertex id (1-based).
#[derive(Clone, Debug)]
pub struct Marks {
    words: Vec<u64>,
}

impl Marks {
    pub fn new(n: u32) -> Self {
        Marks { words: vec![0; (n as usize + 64) / 64 + 1] }
    }

    pub fn from_set(n: u32, s: &[u32]) -> Self {
        let mut m = Marks::new(n);
        for &v in s {
            m.set(v);
        }
        m
    }

    #[inline]
    pub fn set(&mut self, v: u32) {
        self.words[(v / 64) as usize] |= 1u64 << (v % 64);
    }

    #[inline]
    pub fn clear(&mut self, v: u32) {
        self.words[(v / 64) as usize] &= !(1u64 << (v % 64));
    }

    #[inline]
    pub fn contains(&self, v: u32) -> bool {
        (self.words[(v / 64) as usize] >> (v % 64)) & 1 == 1
    }
}

/// Vertex -> class-id map (0 = unclassed, 1..=k otherwise).
pub struct ClassMap {
    ids: Vec<u8>,
}

impl ClassMap {
    pub fn build(n: u32, classes: &[Vec<u32>]) -> Self {
        let mut ids = vec![0u8; n as usize + 1];
        for (c, class) in classes.iter().enumerate() {
            for &v in class {
                ids[v as usize] = (c + 1) as u8;
            }
        }
        ClassMap { ids }
    }

    /// Edge has exactly one vertex in each of the k classes.
    #[inline]
    pub fn is_colourful(&self, edge: &[u32], k: usize) -> bool {
        let mut seen = 0u64;
        for &v in edge {
            let id = self.ids[v as usize];
            if id == 0 {
                return false;
            }
            let bit = 1u64 << (id - 1);
            if seen & bit != 0 {
                return false;
            }
            seen |= bit;
        }
        seen.count_ones() as usize == k
    }
}

/// A hypergraph together with k disjoint vertex classes.
///
/// The strict constructor enforces k-partiteness (every edge meets each class
/// exactly once); the relaxed one only checks disjointness, with the classes
/// then used purely as query arguments.
#[derive(Clone, Debug)]
pub struct PartitionedHypergraph {
    pub base: Hypergraph,
    pub classes: Vec<Vec<u32>>,
}

impl PartitionedHypergraph {
    pub fn new_strict(base: Hypergraph, classes: Vec<Vec<u32>>) -> Result<Self> {
        let ph = Self::new_relaxed(base, classes)?;
        let cm = ClassMap::build(ph.base.n(), &ph.classes);
        for e in ph.base.edges() {
            if !cm.is_colourful(e, ph.classes.len()) {
                return Err(CoreError::MalformedEdge {
                    edge: e.to_vec(),
                    reason: "edge is not k-partite with respect to the classes".into(),
                });
            }
        }
        Ok(ph)
    }

    pub fn new_relaxed(base: Hypergraph, mut classes: Vec<Vec<u32>>) -> Result<Self> {
        if classes.len() != base.k() {
            return Err(CoreError::pre(format!(
                "expected {} classes, got {}",
                base.k(),
                classes.len()
            )));
        }
        let mut seen = Marks::new(base.n());
        for class in classes.iter_mut() {
            class.sort_unstable();
            class.dedup();
            for &v in class.iter() {
                if v == 0 || v > base.n() {
                    return Err(CoreError::pre(format!("class vertex {v} out of range")));
                }
                if seen.contains(v) {
                    return Err(CoreError::pre(format!("classes overlap at vertex {v}")));
                }
                seen.set(v);
            }
        }
        Ok(PartitionedHypergraph { base, classes })
    }

    pub fn k(&self) -> usize {
        self.base.k()
    }

    /// Edge count of the induced k-partite subgraph `G[X_1, ..., X_k]`.
    pub fn colourful_edge_count(&self) -> u64 {
        self.base.colourful_edge_count(&self.classes)
    }
}
