//! The `.hg` text format.
//!
//! First line `k n m`; then `m` lines of `k` strictly increasing 1-based
//! vertex ids separated by single spaces. Lines starting with `#` are
//! comments. A partitioned file adds one `P t1 ... tk` line after the header,
//! declaring classes `V1 = {1..t1}`, `V2 = {t1+1..t1+t2}`, and so on.

use crate::error::{CoreError, Result};
use crate::hypergraph::{build_hypergraph, Hypergraph, PartitionedHypergraph};
use std::fmt::Write as _;
use std::path::Path;

pub struct HgFile {
    pub graph: Hypergraph,
    pub classes: Option<Vec<Vec<u32>>>,
}

impl HgFile {
    /// As a partitioned hypergraph; relaxed partiteness (classes are query
    /// arguments, the base need not be k-partite).
    pub fn into_partitioned(self) -> Result<Option<PartitionedHypergraph>> {
        match self.classes {
            None => Ok(None),
            Some(classes) => Ok(Some(PartitionedHypergraph::new_relaxed(self.graph, classes)?)),
        }
    }
}

pub fn parse_hg(text: &str) -> Result<HgFile> {
    let mut header: Option<(usize, u32, u64)> = None;
    let mut partition: Option<Vec<u32>> = None;
    let mut edges: Vec<Vec<u32>> = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let err = |reason: String| CoreError::Parse { line: lineno + 1, reason };
        if header.is_none() {
            let parts: Vec<&str> = line.split_whitespace().collect();
            if parts.len() != 3 {
                return Err(err("header must be `k n m`".into()));
            }
            let k: usize = parts[0].parse().map_err(|_| err("bad k".into()))?;
            let n: u32 = parts[1].parse().map_err(|_| err("bad n".into()))?;
            let m: u64 = parts[2].parse().map_err(|_| err("bad m".into()))?;
            header = Some((k, n, m));
            continue;
        }
        let (k, n, _) = header.unwrap();
        if let Some(rest) = line.strip_prefix("P ") {
            if partition.is_some() || !edges.is_empty() {
                return Err(err("P line must come directly after the header".into()));
            }
            let sizes: Vec<u32> = rest
                .split_whitespace()
                .map(|t| t.parse().map_err(|_| err(format!("bad class size `{t}`"))))
                .collect::<Result<_>>()?;
            if sizes.len() != k {
                return Err(err(format!("P line must list {k} class sizes")));
            }
            let total: u64 = sizes.iter().map(|&t| u64::from(t)).sum();
            if total > u64::from(n) {
                return Err(err(format!("class sizes sum to {total} > n = {n}")));
            }
            partition = Some(sizes);
            continue;
        }
        let verts: Vec<u32> = line
            .split_whitespace()
            .map(|t| t.parse().map_err(|_| err(format!("bad vertex `{t}`"))))
            .collect::<Result<_>>()?;
        if verts.len() != k {
            return Err(err(format!("edge has {} vertices, expected {k}", verts.len())));
        }
        if !verts.windows(2).all(|w| w[0] < w[1]) {
            return Err(err("edge vertices must be strictly increasing".into()));
        }
        edges.push(verts);
    }
    let (k, n, m) = header.ok_or(CoreError::Parse { line: 0, reason: "missing header".into() })?;
    if edges.len() as u64 != m {
        return Err(CoreError::Parse {
            line: 0,
            reason: format!("header declares {m} edges, found {}", edges.len()),
        });
    }
    let graph = build_hypergraph(n, k, edges)?;
    let classes = partition.map(|sizes| {
        let mut start = 1u32;
        sizes
            .iter()
            .map(|&t| {
                let c: Vec<u32> = (start..start + t).collect();
                start += t;
                c
            })
            .collect()
    });
    Ok(HgFile { graph, classes })
}

pub fn format_hg(graph: &Hypergraph, class_sizes: Option<&[u32]>) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{} {} {}", graph.k(), graph.n(), graph.edge_count());
    if let Some(sizes) = class_sizes {
        let _ = writeln!(
            out,
            "P {}",
            sizes.iter().map(|t| t.to_string()).collect::<Vec<_>>().join(" ")
        );
    }
    for e in graph.edges() {
        let _ = writeln!(
            out,
            "{}",
            e.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(" ")
        );
    }
    out
}

pub fn read_hg(path: &Path) -> Result<HgFile> {
    let text = std::fs::read_to_string(path)?;
    parse_hg(&text)
}

pub fn write_hg(path: &Path, graph: &Hypergraph, class_sizes: Option<&[u32]>) -> Result<()> {
    std::fs::write(path, format_hg(graph, class_sizes))?;
    Ok(())
}

/// Prefix class sizes for a partitioned graph whose classes are contiguous
/// ranges `1..t1`, `t1+1..t1+t2`, ...; None if they are not in that shape.
pub fn contiguous_class_sizes(classes: &[Vec<u32>]) -> Option<Vec<u32>> {
    let mut start = 1u32;
    let mut sizes = Vec::with_capacity(classes.len());
    for class in classes {
        let t = class.len() as u32;
        for (i, &v) in class.iter().enumerate() {
            if v != start + i as u32 {
                return None;
            }
        }
        sizes.push(t);
        start += t;
    }
    Some(sizes)
}
