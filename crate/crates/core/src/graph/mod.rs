//! Attributed graph model and the raw edge counting every other module builds on.

mod io;
mod set;

use std::cmp::Ordering;
use std::collections::HashSet;

pub use io::{load_graph, write_graph, LoadOptions};
pub use set::VertexSet;

use crate::error::{Error, Result};

pub type VertexId = u32;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AttributeKind {
    Nominal,
    Numeric,
}

impl AttributeKind {
    pub fn as_str(self) -> &'static str {
        match self {
            AttributeKind::Nominal => "nominal",
            AttributeKind::Numeric => "numeric",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum AttributeValues {
    /// Per-vertex index into `domain`; `None` is a missing value.
    Nominal {
        codes: Vec<Option<u32>>,
        domain: Vec<String>,
    },
    Numeric(Vec<Option<f64>>),
}

#[derive(Clone, Debug, PartialEq)]
pub struct AttributeColumn {
    name: String,
    values: AttributeValues,
}

impl AttributeColumn {
    /// Builds a nominal column. The domain is the set of distinct present
    /// symbols in natural order (numeric-looking symbols compare as numbers).
    pub fn nominal<S: AsRef<str>>(name: impl Into<String>, values: &[Option<S>]) -> Self {
        let mut domain: Vec<String> = values
            .iter()
            .flatten()
            .map(|s| s.as_ref().to_string())
            .collect::<HashSet<_>>()
            .into_iter()
            .collect();
        domain.sort_by(|a, b| natural_cmp(a, b));
        let codes = values
            .iter()
            .map(|v| {
                v.as_ref().map(|s| {
                    domain
                        .binary_search_by(|d| natural_cmp(d, s.as_ref()))
                        .expect("value is in domain") as u32
                })
            })
            .collect();
        AttributeColumn {
            name: name.into(),
            values: AttributeValues::Nominal { codes, domain },
        }
    }

    pub fn numeric(name: impl Into<String>, values: Vec<Option<f64>>) -> Result<Self> {
        let name = name.into();
        if let Some(bad) = values.iter().flatten().find(|x| !x.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "numeric attribute `{name}` has non-finite value {bad}"
            )));
        }
        Ok(AttributeColumn {
            name,
            values: AttributeValues::Numeric(values),
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn kind(&self) -> AttributeKind {
        match self.values {
            AttributeValues::Nominal { .. } => AttributeKind::Nominal,
            AttributeValues::Numeric(_) => AttributeKind::Numeric,
        }
    }

    pub fn values(&self) -> &AttributeValues {
        &self.values
    }

    pub fn len(&self) -> usize {
        match &self.values {
            AttributeValues::Nominal { codes, .. } => codes.len(),
            AttributeValues::Numeric(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Text form of vertex `v`'s value, `None` when missing.
    pub fn display_value(&self, v: usize) -> Option<String> {
        match &self.values {
            AttributeValues::Nominal { codes, domain } => {
                codes[v].map(|c| domain[c as usize].clone())
            }
            AttributeValues::Numeric(vals) => vals[v].map(|x| format!("{x:?}")),
        }
    }
}

/// Orders numeric-looking strings numerically, and before everything else.
pub(crate) fn natural_cmp(a: &str, b: &str) -> Ordering {
    match (a.parse::<f64>(), b.parse::<f64>()) {
        (Ok(x), Ok(y)) => x.total_cmp(&y).then_with(|| a.cmp(b)),
        (Ok(_), Err(_)) => Ordering::Less,
        (Err(_), Ok(_)) => Ordering::Greater,
        (Err(_), Err(_)) => a.cmp(b),
    }
}

/// `G = (V, E, A)`: vertices `0..n`, simple edges, typed attribute columns.
///
/// Immutable once built. Undirected graphs store each edge in both
/// adjacency lists; directed graphs keep separate out- and in-lists.
#[derive(Clone, Debug)]
pub struct AttributedGraph {
    labels: Vec<String>,
    directed: bool,
    out_adj: Vec<Vec<VertexId>>,
    in_adj: Vec<Vec<VertexId>>,
    edge_count: usize,
    attributes: Vec<AttributeColumn>,
}

impl AttributedGraph {
    /// Builds a graph on vertices `0..n` labelled by their index.
    pub fn new(
        n: usize,
        edges: &[(VertexId, VertexId)],
        directed: bool,
        attributes: Vec<AttributeColumn>,
    ) -> Result<Self> {
        let labels = (0..n).map(|i| i.to_string()).collect();
        Self::with_labels(labels, edges, directed, attributes)
    }

    pub fn with_labels(
        labels: Vec<String>,
        edges: &[(VertexId, VertexId)],
        directed: bool,
        attributes: Vec<AttributeColumn>,
    ) -> Result<Self> {
        let n = labels.len();
        if n > VertexId::MAX as usize {
            return Err(Error::InvalidArgument(format!("too many vertices: {n}")));
        }
        for col in &attributes {
            if col.len() != n {
                return Err(Error::InvalidArgument(format!(
                    "attribute `{}` has {} values for {n} vertices",
                    col.name(),
                    col.len()
                )));
            }
        }
        let mut seen = HashSet::with_capacity(edges.len());
        let mut out_adj = vec![Vec::new(); n];
        let mut in_adj = vec![Vec::new(); if directed { n } else { 0 }];
        for &(u, v) in edges {
            for id in [u, v] {
                if id as usize >= n {
                    return Err(Error::VertexOutOfRange { id: id as usize, n });
                }
            }
            if u == v {
                return Err(Error::SelfLoop(labels[u as usize].clone()));
            }
            let key = if directed || u < v { (u, v) } else { (v, u) };
            if !seen.insert(key) {
                return Err(Error::DuplicateEdge(
                    labels[u as usize].clone(),
                    labels[v as usize].clone(),
                ));
            }
            out_adj[u as usize].push(v);
            if directed {
                in_adj[v as usize].push(u);
            } else {
                out_adj[v as usize].push(u);
            }
        }
        for list in out_adj.iter_mut().chain(in_adj.iter_mut()) {
            list.sort_unstable();
        }
        Ok(AttributedGraph {
            labels,
            directed,
            out_adj,
            in_adj,
            edge_count: edges.len(),
            attributes,
        })
    }

    pub fn n(&self) -> usize {
        self.labels.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edge_count
    }

    pub fn is_directed(&self) -> bool {
        self.directed
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn label(&self, u: VertexId) -> &str {
        &self.labels[u as usize]
    }

    pub fn attributes(&self) -> &[AttributeColumn] {
        &self.attributes
    }

    pub fn attribute(&self, name: &str) -> Option<(usize, &AttributeColumn)> {
        self.attributes
            .iter()
            .enumerate()
            .find(|(_, c)| c.name() == name)
    }

    /// Out-neighbours for directed graphs, all neighbours otherwise.
    pub fn neighbors(&self, u: VertexId) -> &[VertexId] {
        &self.out_adj[u as usize]
    }

    /// In-neighbours for directed graphs, all neighbours otherwise.
    pub fn in_neighbors(&self, u: VertexId) -> &[VertexId] {
        if self.directed {
            &self.in_adj[u as usize]
        } else {
            &self.out_adj[u as usize]
        }
    }

    pub fn has_edge(&self, u: VertexId, v: VertexId) -> bool {
        self.out_adj[u as usize].binary_search(&v).is_ok()
    }

    fn check(&self, u: VertexId) -> Result<()> {
        if (u as usize) < self.n() {
            Ok(())
        } else {
            Err(Error::VertexOutOfRange {
                id: u as usize,
                n: self.n(),
            })
        }
    }

    /// Number of incident edges; in plus out for directed graphs.
    pub fn degree(&self, u: VertexId) -> Result<usize> {
        self.check(u)?;
        Ok(if self.directed {
            self.out_adj[u as usize].len() + self.in_adj[u as usize].len()
        } else {
            self.out_adj[u as usize].len()
        })
    }

    pub fn out_degree(&self, u: VertexId) -> Result<usize> {
        self.check(u)?;
        Ok(self.out_adj[u as usize].len())
    }

    pub fn in_degree(&self, u: VertexId) -> Result<usize> {
        self.check(u)?;
        Ok(self.in_neighbors(u).len())
    }

    /// Each edge once: `u < v` for undirected graphs, `u -> v` for directed ones.
    pub fn edges(&self) -> impl Iterator<Item = (VertexId, VertexId)> + '_ {
        self.out_adj.iter().enumerate().flat_map(move |(u, list)| {
            let u = u as VertexId;
            list.iter()
                .filter(move |&&v| self.directed || u < v)
                .map(move |&v| (u, v))
        })
    }

    pub fn full_set(&self) -> VertexSet {
        VertexSet::full(self.n())
    }

    fn check_set(&self, s: &VertexSet) -> Result<()> {
        if s.universe() == self.n() {
            Ok(())
        } else {
            Err(Error::InvalidArgument(format!(
                "vertex set over {} vertices used with a graph of {}",
                s.universe(),
                self.n()
            )))
        }
    }

    /// Edges between `a` and `b`, each qualifying edge counted once.
    ///
    /// Undirected: `{u,v}` with `u∈a, v∈b` or `u∈b, v∈a`; with `a = b` this is
    /// the number of edges inside `a`. Directed: edges `u -> v` with `u∈a, v∈b`.
    pub fn count_edges_between(&self, a: &VertexSet, b: &VertexSet) -> Result<u64> {
        self.check_set(a)?;
        self.check_set(b)?;
        let ordered = self.ordered_pair_edges(a, b);
        if self.directed {
            return Ok(ordered);
        }
        // edges with both ends in a∩b were seen from both endpoints
        let common = a.intersection(b);
        Ok(ordered - self.ordered_pair_edges(&common, &common) / 2)
    }

    /// Ordered pairs `(u, v)`, `u∈a, v∈b`, that carry an edge. For undirected
    /// graphs an edge inside `a∩b` contributes two pairs.
    pub fn count_ordered_pairs(&self, a: &VertexSet, b: &VertexSet) -> Result<u64> {
        self.check_set(a)?;
        self.check_set(b)?;
        Ok(self.ordered_pair_edges(a, b))
    }

    fn ordered_pair_edges(&self, a: &VertexSet, b: &VertexSet) -> u64 {
        let mut count = 0u64;
        for u in a.ids() {
            count += self.out_adj[u as usize]
                .iter()
                .filter(|&&v| b.contains(v))
                .count() as u64;
        }
        count
    }

    /// Edges with exactly one endpoint in `a`.
    pub fn inter_edge_count(&self, a: &VertexSet) -> Result<u64> {
        self.check_set(a)?;
        let mut count = 0u64;
        for u in a.ids() {
            count += self.out_adj[u as usize]
                .iter()
                .filter(|&&v| !a.contains(v))
                .count() as u64;
            if self.directed {
                count += self.in_adj[u as usize]
                    .iter()
                    .filter(|&&v| !a.contains(v))
                    .count() as u64;
            }
        }
        Ok(count)
    }
}

#[cfg(test)]
pub(crate) mod fixtures {
    use super::*;

    pub fn triangle() -> AttributedGraph {
        AttributedGraph::new(3, &[(0, 1), (1, 2), (0, 2)], false, vec![]).unwrap()
    }

    pub fn path(n: usize) -> AttributedGraph {
        let edges: Vec<_> = (1..n as u32).map(|v| (v - 1, v)).collect();
        AttributedGraph::new(n, &edges, false, vec![]).unwrap()
    }

    pub fn star(leaves: usize) -> AttributedGraph {
        let edges: Vec<_> = (1..=leaves as u32).map(|v| (0, v)).collect();
        AttributedGraph::new(leaves + 1, &edges, false, vec![]).unwrap()
    }

    /// The 11-vertex example graph's attribute table (one numeric, three binary).
    pub fn example_attributes() -> Vec<AttributeColumn> {
        let a = [3.5, 2.6, 3.8, 3.2, 1.8, 1.2, 5.4, 0.9, 6.7, 2.3, 3.1];
        let b = [1, 1, 1, 1, 1, 0, 0, 1, 0, 0, 0];
        let c = [0, 0, 1, 0, 0, 0, 1, 1, 1, 1, 1];
        let d = [1, 0, 1, 1, 1, 0, 0, 0, 0, 1, 0];
        let nominal = |name: &str, vals: [i32; 11]| {
            let v: Vec<Option<String>> = vals.iter().map(|x| Some(x.to_string())).collect();
            AttributeColumn::nominal(name, &v)
        };
        vec![
            AttributeColumn::numeric("a", a.iter().map(|&x| Some(x)).collect()).unwrap(),
            nominal("b", b),
            nominal("c", c),
            nominal("d", d),
        ]
    }
}
