//! Synthetic attributed graphs with planted dense blocks between
//! attribute-defined groups.
//!
//! Every vertex belongs to one of `groups` contiguous groups (attribute
//! `group`, values `g0`, `g1`, ...). Pairs get an edge with the background
//! density unless a planted block covers them. `age` is numeric noise. Each
//! binary tag `t<i>` marks a few random vertices that are linked to each
//! other with probability `tag_link`. Isolated vertices lose all their edges
//! and are marked by `status=isolated`.

use std::path::Path;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{write_graph, AttributeColumn, AttributedGraph, VertexId};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlantedBlock {
    /// Group index of the first side.
    pub a: usize,
    /// Group index of the second side; equal to `a` for a dense group.
    pub b: usize,
    pub density: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SynthParams {
    pub n: usize,
    pub background: f64,
    pub groups: usize,
    pub blocks: Vec<PlantedBlock>,
    pub tags: usize,
    pub tag_size: usize,
    pub tag_link: f64,
    pub isolated: usize,
    pub seed: u64,
}

impl Default for SynthParams {
    fn default() -> Self {
        SynthParams {
            n: 400,
            background: 0.02,
            groups: 8,
            blocks: vec![PlantedBlock {
                a: 0,
                b: 1,
                density: 0.3,
            }],
            tags: 0,
            tag_size: 2,
            tag_link: 1.0,
            isolated: 0,
            seed: 0,
        }
    }
}

/// Ground truth written next to a synthetic graph.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub params: SynthParams,
    pub edges: usize,
    pub blocks: Vec<PlantedTruth>,
    pub isolated: Vec<VertexId>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlantedTruth {
    pub description_a: String,
    pub description_b: String,
    pub members_a: Vec<VertexId>,
    pub members_b: Vec<VertexId>,
    pub density: f64,
    pub edges: u64,
}

fn check_prob(name: &str, p: f64) -> Result<()> {
    if (0.0..=1.0).contains(&p) {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("{name} must lie in [0,1], got {p}")))
    }
}

impl SynthParams {
    fn validate(&self) -> Result<()> {
        if self.groups == 0 || self.n < self.groups {
            return Err(Error::InvalidArgument(format!(
                "need 1 <= groups <= n, got {} groups for {} vertices",
                self.groups, self.n
            )));
        }
        check_prob("background density", self.background)?;
        check_prob("tag link probability", self.tag_link)?;
        for b in &self.blocks {
            check_prob("block density", b.density)?;
            if b.a >= self.groups || b.b >= self.groups {
                return Err(Error::InvalidArgument(format!(
                    "block ({}, {}) refers to a group beyond {}",
                    b.a, b.b, self.groups
                )));
            }
        }
        if self.tags > 0 && self.tag_size < 2 {
            return Err(Error::InvalidArgument("tags need at least two members".into()));
        }
        Ok(())
    }

    /// Group of vertex `u`: contiguous ranges, the last absorbing the remainder.
    pub fn group_of(&self, u: usize) -> usize {
        (u / (self.n / self.groups)).min(self.groups - 1)
    }

    pub fn group_members(&self, g: usize) -> Vec<VertexId> {
        (0..self.n).filter(|&u| self.group_of(u) == g).map(|u| u as VertexId).collect()
    }
}

/// Build the graph and its ground truth. Deterministic for a given seed.
pub fn generate(params: &SynthParams) -> Result<(AttributedGraph, Manifest)> {
    params.validate()?;
    let n = params.n;
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let group: Vec<usize> = (0..n).map(|u| params.group_of(u)).collect();
    let planted = |x: usize, y: usize| -> Option<f64> {
        let (gx, gy) = (group[x], group[y]);
        params
            .blocks
            .iter()
            .rev()
            .find(|b| (b.a == gx && b.b == gy) || (b.a == gy && b.b == gx))
            .map(|b| b.density)
    };

    // isolated vertices come from groups no block touches
    let free: Vec<usize> = (0..n)
        .filter(|&u| !params.blocks.iter().any(|b| b.a == group[u] || b.b == group[u]))
        .collect();
    if params.isolated > free.len() {
        return Err(Error::InvalidArgument(format!(
            "{} isolated vertices requested but only {} lie outside planted blocks",
            params.isolated,
            free.len()
        )));
    }
    let mut isolated: Vec<usize> = free.choose_multiple(&mut rng, params.isolated).copied().collect();
    isolated.sort_unstable();
    let mut is_isolated = vec![false; n];
    for &u in &isolated {
        is_isolated[u] = true;
    }

    let mut adj = vec![false; n * n];
    for u in 0..n {
        for v in u + 1..n {
            let p = planted(u, v).unwrap_or(params.background);
            if rng.gen_bool(p) {
                adj[u * n + v] = true;
            }
        }
    }

    let active: Vec<usize> = (0..n).filter(|&u| !is_isolated[u]).collect();
    let mut tags = Vec::with_capacity(params.tags);
    for _ in 0..params.tags {
        let members: Vec<usize> = active
            .choose_multiple(&mut rng, params.tag_size.min(active.len()))
            .copied()
            .collect();
        for (i, &u) in members.iter().enumerate() {
            for &v in &members[i + 1..] {
                if rng.gen_bool(params.tag_link) {
                    let (x, y) = (u.min(v), u.max(v));
                    adj[x * n + y] = true;
                }
            }
        }
        tags.push(members);
    }
    let age: Vec<Option<f64>> = (0..n)
        .map(|_| Some((rng.gen_range(18.0..80.0f64) * 10.0).round() / 10.0 + 0.05))
        .collect();

    let mut edges = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            if adj[u * n + v] && !is_isolated[u] && !is_isolated[v] {
                edges.push((u as VertexId, v as VertexId));
            }
        }
    }

    let mut attrs = Vec::new();
    let group_vals: Vec<Option<String>> = group.iter().map(|g| Some(format!("g{g}"))).collect();
    attrs.push(AttributeColumn::nominal("group", &group_vals));
    attrs.push(AttributeColumn::numeric("age", age)?);
    if params.isolated > 0 {
        let status: Vec<Option<&str>> = is_isolated
            .iter()
            .map(|&i| Some(if i { "isolated" } else { "active" }))
            .collect();
        attrs.push(AttributeColumn::nominal("status", &status));
    }
    for (t, members) in tags.iter().enumerate() {
        let vals: Vec<Option<&str>> = (0..n)
            .map(|u| Some(if members.contains(&u) { "1" } else { "0" }))
            .collect();
        attrs.push(AttributeColumn::nominal(format!("t{t}"), &vals));
    }
    let g = AttributedGraph::new(n, &edges, false, attrs)?;

    let mut blocks = Vec::new();
    for b in &params.blocks {
        let ma = params.group_members(b.a);
        let mb = params.group_members(b.b);
        let sa = crate::graph::VertexSet::from_ids(n, ma.iter().copied());
        let sb = crate::graph::VertexSet::from_ids(n, mb.iter().copied());
        blocks.push(PlantedTruth {
            description_a: format!("group=g{}", b.a),
            description_b: format!("group=g{}", b.b),
            members_a: ma,
            members_b: mb,
            density: b.density,
            edges: g.count_edges_between(&sa, &sb)?,
        });
    }
    let manifest = Manifest {
        params: params.clone(),
        edges: g.edge_count(),
        blocks,
        isolated: isolated.iter().map(|&u| u as VertexId).collect(),
    };
    Ok((g, manifest))
}

/// Generate and write `<prefix>.edges`, `<prefix>.csv` and `<prefix>.manifest.json`.
pub fn write_synth(params: &SynthParams, dir: impl AsRef<Path>, prefix: &str) -> Result<Manifest> {
    let dir = dir.as_ref();
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let (g, manifest) = generate(params)?;
    write_graph(&g, dir.join(format!("{prefix}.edges")), dir.join(format!("{prefix}.csv")))?;
    let path = dir.join(format!("{prefix}.manifest.json"));
    let text = serde_json::to_string_pretty(&manifest)?;
    std::fs::write(&path, text + "\n").map_err(|e| Error::io(&path, e))?;
    Ok(manifest)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{load_graph, LoadOptions, VertexSet};

    #[test]
    fn same_seed_same_graph() {
        let p = SynthParams {
            n: 120,
            groups: 4,
            tags: 5,
            isolated: 3,
            ..SynthParams::default()
        };
        let (a, ma) = generate(&p).unwrap();
        let (b, mb) = generate(&p).unwrap();
        assert_eq!(a.edges().collect::<Vec<_>>(), b.edges().collect::<Vec<_>>());
        assert_eq!(ma, mb);
        let other = generate(&SynthParams { seed: 1, ..p }).unwrap().0;
        assert_ne!(a.edges().collect::<Vec<_>>(), other.edges().collect::<Vec<_>>());
    }

    #[test]
    fn planted_block_is_denser() {
        let p = SynthParams::default();
        let (g, m) = generate(&p).unwrap();
        let t = &m.blocks[0];
        assert_eq!(t.members_a.len(), 50);
        let density = t.edges as f64 / 2500.0;
        assert!((density - 0.3).abs() < 0.05, "{density}");
        let rest = VertexSet::from_ids(400, 100..400);
        let k = g.count_edges_between(&rest, &rest).unwrap() as f64;
        assert!((k / (300.0 * 299.0 / 2.0) - 0.02).abs() < 0.005);
    }

    #[test]
    fn isolated_and_tags() {
        let p = SynthParams {
            n: 80,
            groups: 4,
            tags: 6,
            isolated: 4,
            ..SynthParams::default()
        };
        let (g, m) = generate(&p).unwrap();
        assert_eq!(m.isolated.len(), 4);
        for &u in &m.isolated {
            assert_eq!(g.degree(u).unwrap(), 0);
            assert!(u >= 40);
        }
        let (i, _) = g.attribute("t0").unwrap();
        assert!(i > 0);
        let tagged: Vec<VertexId> = (0..80).filter(|&u| g.attributes()[i].display_value(u).as_deref() == Some("1")).map(|u| u as VertexId).collect();
        assert_eq!(tagged.len(), 2);
        assert!(g.has_edge(tagged[0], tagged[1]));
        assert!(generate(&SynthParams { isolated: 500, ..p.clone() }).is_err());
        assert!(generate(&SynthParams { background: 1.5, ..p }).is_err());
    }

    #[test]
    fn files_load_back() {
        let dir = tempfile::tempdir().unwrap();
        let p = SynthParams {
            n: 60,
            groups: 3,
            tags: 2,
            isolated: 2,
            blocks: vec![PlantedBlock { a: 0, b: 1, density: 0.5 }],
            ..SynthParams::default()
        };
        let m = write_synth(&p, dir.path(), "toy").unwrap();
        let g = load_graph(dir.path().join("toy.edges"), dir.path().join("toy.csv"), &LoadOptions::default()).unwrap();
        assert_eq!(g.n(), 60);
        assert_eq!(g.edge_count(), m.edges);
        assert_eq!(g.attribute("age").unwrap().1.kind(), crate::graph::AttributeKind::Numeric);
        assert_eq!(g.attribute("t1").unwrap().1.kind(), crate::graph::AttributeKind::Nominal);
        let text = std::fs::read_to_string(dir.path().join("toy.manifest.json")).unwrap();
        let back: Manifest = serde_json::from_str(&text).unwrap();
        assert_eq!(back, m);
    }
}
