//! Background distribution over graphs: independent Bernoulli edges whose
//! probabilities come from a fitted prior and are then tilted by every
//! pattern the user has absorbed.

mod fit;
mod text;

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

pub use fit::{fit_block_prior, fit_degree_prior, fit_density_prior, observed_density, FitOptions, FitReport};

use crate::error::{Error, Result};
use crate::graph::{AttributedGraph, VertexId, VertexSet};
use crate::math::sigmoid;

/// Probabilities are kept inside `[PROB_FLOOR, 1 - PROB_FLOOR]`.
pub const PROB_FLOOR: f64 = 1e-12;
/// Bound on every fitted multiplier and every pattern tilt.
pub const MULTIPLIER_BOUND: f64 = 30.0;

const DENSE_TABLE_LIMIT: usize = 2048;

/// How the pairs between two vertex sets are enumerated.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PairCounting {
    /// `{u,v}`, `u != v`, with one end in each set. Directed graphs ignore this.
    Unordered,
    /// `(u,v)`, `u∈A`, `v∈B`, `u != v`.
    Ordered,
}

impl PairCounting {
    pub fn as_str(self) -> &'static str {
        match self {
            PairCounting::Unordered => "unordered",
            PairCounting::Ordered => "ordered",
        }
    }
}

impl std::str::FromStr for PairCounting {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "unordered" => Ok(PairCounting::Unordered),
            "ordered" => Ok(PairCounting::Ordered),
            _ => Err(Error::InvalidArgument(format!(
                "pair counting must be `ordered` or `unordered`, got `{s}`"
            ))),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Prior {
    Density,
    Degree,
    Blocks { attributes: Vec<String>, with_degrees: bool },
}

#[derive(Clone, Debug, PartialEq)]
pub(crate) enum Base {
    Uniform(f64),
    Logistic {
        row: Vec<f64>,
        /// Column multipliers; `None` for undirected graphs, where the row
        /// multipliers serve both ends.
        col: Option<Vec<f64>>,
        bin: Vec<u32>,
        bins: usize,
        gamma: Vec<f64>,
    },
}

/// One absorbed pattern: every pair between `a` and `b` is tilted by `lambda`.
#[derive(Clone, Debug, PartialEq)]
pub struct PatternUpdate {
    pub lambda: f64,
    pub label: String,
    pub a: VertexSet,
    pub b: VertexSet,
}

impl PatternUpdate {
    #[inline]
    fn covers(&self, u: VertexId, v: VertexId, directed: bool) -> bool {
        (self.a.contains(u) && self.b.contains(v))
            || (!directed && self.a.contains(v) && self.b.contains(u))
    }
}

/// Vertices that are indistinguishable under the model share a class, so
/// pair sums reduce to sums over class histograms.
#[derive(Clone, Debug)]
struct ClassTable {
    class_of: Vec<u32>,
    reps: Vec<VertexId>,
    dense: Option<Vec<f64>>,
}

#[derive(Clone, Debug)]
pub struct BackgroundModel {
    n: usize,
    directed: bool,
    prior: Prior,
    base: Base,
    updates: Vec<PatternUpdate>,
    table: ClassTable,
}

impl PartialEq for BackgroundModel {
    fn eq(&self, other: &Self) -> bool {
        self.n == other.n
            && self.directed == other.directed
            && self.prior == other.prior
            && self.base == other.base
            && self.updates == other.updates
    }
}

/// Number of pairs between two sets and their summed edge probability.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PairStats {
    pub pairs: u64,
    pub expected: f64,
}

impl PairStats {
    /// Mean edge probability; `None` for an empty pair set.
    pub fn mean(&self) -> Option<f64> {
        (self.pairs > 0).then(|| self.expected / self.pairs as f64)
    }
}

/// What absorbing a pattern did.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Absorbed {
    pub lambda: f64,
    pub pairs: u64,
    pub observed: u64,
    pub expected_before: f64,
    /// The tilt hit the multiplier bound before matching the observed count.
    pub saturated: bool,
}

#[inline]
fn clamp_prob(p: f64) -> f64 {
    p.clamp(PROB_FLOOR, 1.0 - PROB_FLOOR)
}

#[inline]
fn tilt(p: f64, lambda: f64) -> f64 {
    let e = lambda.exp();
    p * e / (1.0 - p + p * e)
}

impl BackgroundModel {
    pub(crate) fn from_base(n: usize, directed: bool, prior: Prior, base: Base) -> Self {
        Self::assemble(n, directed, prior, base, Vec::new())
    }

    pub(crate) fn assemble(
        n: usize,
        directed: bool,
        prior: Prior,
        base: Base,
        updates: Vec<PatternUpdate>,
    ) -> Self {
        let mut m = BackgroundModel {
            n,
            directed,
            prior,
            base,
            updates,
            table: ClassTable {
                class_of: Vec::new(),
                reps: Vec::new(),
                dense: None,
            },
        };
        m.table = m.build_table();
        m
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn is_directed(&self) -> bool {
        self.directed
    }

    pub fn prior(&self) -> &Prior {
        &self.prior
    }

    pub fn updates(&self) -> &[PatternUpdate] {
        &self.updates
    }

    /// Number of vertex classes the model currently distinguishes.
    pub fn class_count(&self) -> usize {
        self.table.reps.len()
    }

    fn base_probability(&self, u: VertexId, v: VertexId) -> f64 {
        match &self.base {
            Base::Uniform(p) => *p,
            Base::Logistic {
                row,
                col,
                bin,
                bins,
                gamma,
            } => {
                let (u, v) = (u as usize, v as usize);
                let c = col.as_ref().map_or(row[v], |c| c[v]);
                let g = gamma[bin[u] as usize * bins + bin[v] as usize];
                sigmoid(row[u] + c + g)
            }
        }
    }

    fn raw_probability(&self, u: VertexId, v: VertexId) -> f64 {
        let mut p = clamp_prob(self.base_probability(u, v));
        for up in &self.updates {
            if up.lambda != 0.0 && up.covers(u, v, self.directed) {
                p = tilt(p, up.lambda);
            }
        }
        clamp_prob(p)
    }

    fn build_table(&self) -> ClassTable {
        let active: Vec<&PatternUpdate> = self.updates.iter().filter(|u| u.lambda != 0.0).collect();
        let mut index: HashMap<Vec<u64>, u32> = HashMap::new();
        let mut class_of = Vec::with_capacity(self.n);
        let mut reps = Vec::new();
        for u in 0..self.n as VertexId {
            let mut key = Vec::with_capacity(3 + active.len() / 32 + 1);
            if let Base::Logistic { row, col, bin, .. } = &self.base {
                key.push(row[u as usize].to_bits());
                key.push(col.as_ref().map_or(0, |c| c[u as usize].to_bits()));
                key.push(bin[u as usize] as u64);
            }
            for chunk in active.chunks(32) {
                let mut word = 0u64;
                for (i, up) in chunk.iter().enumerate() {
                    word |= (up.a.contains(u) as u64) << (2 * i);
                    word |= (up.b.contains(u) as u64) << (2 * i + 1);
                }
                key.push(word);
            }
            let next = reps.len() as u32;
            let c = *index.entry(key).or_insert_with(|| {
                reps.push(u);
                next
            });
            class_of.push(c);
        }
        let k = reps.len();
        let dense = (k <= DENSE_TABLE_LIMIT).then(|| {
            let mut t = Vec::with_capacity(k * k);
            for &ru in &reps {
                for &rv in &reps {
                    t.push(self.raw_probability(ru, rv));
                }
            }
            t
        });
        ClassTable {
            class_of,
            reps,
            dense,
        }
    }

    #[inline]
    fn class_probability(&self, c: u32, d: u32) -> f64 {
        match &self.table.dense {
            Some(t) => t[c as usize * self.table.reps.len() + d as usize],
            None => self.raw_probability(self.table.reps[c as usize], self.table.reps[d as usize]),
        }
    }

    /// Probability of the edge `u -> v` (or `{u,v}` when undirected).
    pub fn edge_probability(&self, u: VertexId, v: VertexId) -> Result<f64> {
        for x in [u, v] {
            if x as usize >= self.n {
                return Err(Error::VertexOutOfRange {
                    id: x as usize,
                    n: self.n,
                });
            }
        }
        if u == v {
            return Err(Error::InvalidArgument(format!("no self-pairs (vertex {u})")));
        }
        Ok(self.class_probability(self.table.class_of[u as usize], self.table.class_of[v as usize]))
    }

    fn histogram(&self, s: &VertexSet) -> Vec<(u32, f64)> {
        let mut counts = vec![0u32; self.table.reps.len()];
        for u in s.ids() {
            counts[self.table.class_of[u as usize] as usize] += 1;
        }
        counts
            .into_iter()
            .enumerate()
            .filter(|&(_, c)| c > 0)
            .map(|(i, c)| (i as u32, c as f64))
            .collect()
    }

    fn check_set(&self, s: &VertexSet) -> Result<()> {
        if s.universe() == self.n {
            Ok(())
        } else {
            Err(Error::InvalidArgument(format!(
                "vertex set over {} vertices used with a model of {}",
                s.universe(),
                self.n
            )))
        }
    }

    /// Calls `f(p, multiplicity)` for groups of pairs sharing probability `p`.
    /// Multiplicities may be negative; their signed sum is the pair count.
    fn fold_pairs(&self, a: &VertexSet, b: &VertexSet, counting: PairCounting, mut f: impl FnMut(f64, f64)) {
        let common = a.intersection(b);
        let hc = self.histogram(&common);
        if self.directed || counting == PairCounting::Ordered {
            let ha = self.histogram(a);
            let hb = self.histogram(b);
            for &(c, x) in &ha {
                for &(d, y) in &hb {
                    f(self.class_probability(c, d), x * y);
                }
            }
            for &(c, z) in &hc {
                f(self.class_probability(c, c), -z);
            }
            return;
        }
        let ha = self.histogram(&a.difference(&common));
        let hb = self.histogram(&b.difference(&common));
        for &(c, x) in &ha {
            for &(d, y) in hb.iter().chain(&hc) {
                f(self.class_probability(c, d), x * y);
            }
        }
        for &(c, z) in &hc {
            for &(d, y) in &hb {
                f(self.class_probability(c, d), z * y);
            }
        }
        for (i, &(c, z)) in hc.iter().enumerate() {
            f(self.class_probability(c, c), z * (z - 1.0) / 2.0);
            for &(d, w) in &hc[i + 1..] {
                f(self.class_probability(c, d), z * w);
            }
        }
    }

    /// Pair count between `a` and `b` and the expected number of edges among
    /// those pairs. Directed models always count ordered pairs.
    pub fn pair_stats(&self, a: &VertexSet, b: &VertexSet, counting: PairCounting) -> Result<PairStats> {
        self.check_set(a)?;
        self.check_set(b)?;
        let (na, nb, nc) = (a.len() as u64, b.len() as u64, a.intersection_len(b) as u64);
        let pairs = if self.directed || counting == PairCounting::Ordered {
            na * nb - nc
        } else {
            na * nb - nc * (nc + 1) / 2
        };
        let mut expected = 0.0;
        self.fold_pairs(a, b, counting, |p, m| expected += p * m);
        Ok(PairStats {
            pairs,
            expected: expected.max(0.0),
        })
    }

    /// Mean edge probability over the pairs between `a` and `b`.
    pub fn block_mean_probability(&self, a: &VertexSet, b: &VertexSet, counting: PairCounting) -> Result<f64> {
        self.pair_stats(a, b, counting)?.mean().ok_or(Error::EmptyPairSet)
    }

    /// Absorb the knowledge that the pairs between `a` and `b` carry exactly
    /// `observed` edges (unordered pairs for undirected graphs).
    pub fn update_with_block(
        &self,
        a: &VertexSet,
        b: &VertexSet,
        observed: u64,
        label: impl Into<String>,
    ) -> Result<(BackgroundModel, Absorbed)> {
        let stats = self.pair_stats(a, b, PairCounting::Unordered)?;
        if stats.pairs == 0 {
            return Err(Error::EmptyPairSet);
        }
        if observed > stats.pairs {
            return Err(Error::InvalidArgument(format!(
                "{observed} edges cannot fit in {} pairs",
                stats.pairs
            )));
        }
        let mut groups = Vec::new();
        self.fold_pairs(a, b, PairCounting::Unordered, |p, m| groups.push((p, m)));
        let (lambda, saturated) = solve_tilt(&groups, observed as f64, stats.pairs as f64);
        if saturated {
            log::warn!("pattern tilt saturated at {lambda}; {observed} of {} pairs are edges", stats.pairs);
        }
        let mut updates = self.updates.clone();
        updates.push(PatternUpdate {
            lambda,
            label: label.into(),
            a: a.clone(),
            b: b.clone(),
        });
        let model = Self::assemble(self.n, self.directed, self.prior.clone(), self.base.clone(), updates);
        Ok((
            model,
            Absorbed {
                lambda,
                pairs: stats.pairs,
                observed,
                expected_before: stats.expected,
                saturated,
            },
        ))
    }

    /// [`update_with_block`](Self::update_with_block) with the edge count taken from `g`.
    pub fn absorb(
        &self,
        g: &AttributedGraph,
        a: &VertexSet,
        b: &VertexSet,
        label: impl Into<String>,
    ) -> Result<(BackgroundModel, Absorbed)> {
        if g.n() != self.n || g.is_directed() != self.directed {
            return Err(Error::InvalidArgument("model does not belong to this graph".into()));
        }
        let k = g.count_edges_between(a, b)?;
        self.update_with_block(a, b, k, label)
    }

    /// Drop all absorbed patterns, keeping the prior.
    pub fn prior_only(&self) -> BackgroundModel {
        Self::from_base(self.n, self.directed, self.prior.clone(), self.base.clone())
    }
}

/// Tilt `lambda` such that the tilted expectation over `groups` equals `k`.
fn solve_tilt(groups: &[(f64, f64)], k: f64, pairs: f64) -> (f64, bool) {
    let excess = |lambda: f64| -> f64 {
        let mut s = 0.0;
        for &(p, m) in groups {
            s += m * clamp_prob(tilt(p, lambda));
        }
        s - k
    };
    let tol = 1e-9 * pairs.max(1.0);
    if excess(0.0).abs() <= tol {
        return (0.0, false);
    }
    let (mut lo, mut hi) = (-1.0f64, 1.0f64);
    while excess(lo) > 0.0 {
        if lo <= -MULTIPLIER_BOUND {
            return (-MULTIPLIER_BOUND, true);
        }
        lo = (2.0 * lo).max(-MULTIPLIER_BOUND);
    }
    while excess(hi) < 0.0 {
        if hi >= MULTIPLIER_BOUND {
            return (MULTIPLIER_BOUND, true);
        }
        hi = (2.0 * hi).min(MULTIPLIER_BOUND);
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if excess(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    if excess(lo).abs() <= excess(hi).abs() {
        (lo, false)
    } else {
        (hi, false)
    }
}
