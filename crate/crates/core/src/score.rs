//! Subjective interestingness of dense and sparse subgraph patterns, and the
//! objective community measures it is compared against.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::background::{BackgroundModel, PairCounting, PROB_FLOOR};
use crate::description::Description;
use crate::error::{Error, Result};
use crate::graph::{AttributedGraph, VertexSet};
use crate::math;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScoreConstants {
    /// Cost per selector.
    pub alpha: f64,
    /// Fixed cost of stating the direction and the count.
    pub beta: f64,
    pub single_counting: PairCounting,
    pub bi_counting: PairCounting,
}

impl Default for ScoreConstants {
    fn default() -> Self {
        ScoreConstants {
            alpha: 0.3,
            beta: 0.5,
            single_counting: PairCounting::Ordered,
            bi_counting: PairCounting::Unordered,
        }
    }
}

impl ScoreConstants {
    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.beta > 0.0 && self.alpha.is_finite() && self.beta.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "alpha and beta must be positive, got {} and {}",
                self.alpha, self.beta
            )));
        }
        Ok(())
    }
}

/// Whether the pattern says "at least k edges" or "at most k edges".
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Dense,
    Sparse,
}

impl Direction {
    /// 0 for dense, 1 for sparse.
    pub fn indicator(self) -> u8 {
        match self {
            Direction::Dense => 0,
            Direction::Sparse => 1,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Pattern {
    pub w1: Description,
    /// `None` for a single-subgroup pattern.
    pub w2: Option<Description>,
    pub ext1: VertexSet,
    pub ext2: Option<VertexSet>,
    pub direction: Direction,
    pub k_w: u64,
    pub n_w: u64,
    pub p_w: f64,
    pub ic: f64,
    pub dl: f64,
    pub si: f64,
    pub counting: PairCounting,
}

impl Pattern {
    /// Expected number of edges over the pattern's pairs.
    pub fn expected(&self) -> f64 {
        self.p_w * self.n_w as f64
    }

    /// Total selector count of both descriptions.
    pub fn total_len(&self) -> usize {
        self.w1.len() + self.w2.as_ref().map_or(0, |w| w.len())
    }

    pub fn is_single(&self) -> bool {
        self.w2.is_none()
    }

    /// The second extension, which equals the first for single-subgroup patterns.
    pub fn target(&self) -> &VertexSet {
        self.ext2.as_ref().unwrap_or(&self.ext1)
    }
}

impl fmt::Display for Pattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.w2 {
            None => write!(f, "{}", self.w1)?,
            Some(w2) => write!(f, "{} ~ {}", self.w1, w2)?,
        }
        write!(f, " (I={}, k={}, si={:.4})", self.direction.indicator(), self.k_w, self.si)
    }
}

/// Pairs inside a subgroup of `size` vertices.
pub fn n_w_single(size: u64, counting: PairCounting) -> Result<u64> {
    if size < 2 {
        return Err(Error::InvalidArgument(format!("subgroup of {size} vertices has no pairs")));
    }
    Ok(match counting {
        PairCounting::Unordered => size * (size - 1) / 2,
        PairCounting::Ordered => size * (size - 1),
    })
}

/// Pairs between two subgroups of sizes `a` and `b` sharing `overlap` vertices.
pub fn n_w_bi(a: u64, b: u64, overlap: u64, counting: PairCounting) -> Result<u64> {
    if overlap > a.min(b) {
        return Err(Error::InvalidArgument(format!(
            "overlap {overlap} exceeds subgroup sizes {a} and {b}"
        )));
    }
    Ok(match counting {
        PairCounting::Unordered => a * b - overlap * (overlap + 1) / 2,
        PairCounting::Ordered => a * b - overlap,
    })
}

/// KL(Bernoulli(q) ‖ Bernoulli(p)) in nats, with `p` clamped away from 0 and 1.
pub fn kl_bernoulli(q: f64, p: f64) -> f64 {
    math::kl_bernoulli(q, p.clamp(PROB_FLOOR, 1.0 - PROB_FLOOR))
}

/// Lower bound on the negative log probability of the observed count.
pub fn information_content(n_w: u64, k_w: u64, p_w: f64) -> Result<f64> {
    if n_w == 0 {
        return Err(Error::EmptyPairSet);
    }
    if k_w > n_w {
        return Err(Error::InvalidArgument(format!("{k_w} edges over {n_w} pairs")));
    }
    Ok(n_w as f64 * kl_bernoulli(k_w as f64 / n_w as f64, p_w))
}

pub fn description_length(len1: usize, len2: Option<usize>, c: &ScoreConstants) -> f64 {
    c.alpha * (len1 + len2.unwrap_or(0)) as f64 + c.beta
}

pub fn direction_of(n_w: u64, k_w: u64, p_w: f64) -> Direction {
    if k_w as f64 / n_w as f64 >= p_w {
        Direction::Dense
    } else {
        Direction::Sparse
    }
}

/// Score from raw counts: `(direction, ic, dl, si)`.
pub fn score_counts(
    n_w: u64,
    k_w: u64,
    expected: f64,
    len1: usize,
    len2: Option<usize>,
    c: &ScoreConstants,
) -> Result<(Direction, f64, f64, f64)> {
    if n_w == 0 {
        return Err(Error::EmptyPairSet);
    }
    let p_w = (expected / n_w as f64).clamp(PROB_FLOOR, 1.0 - PROB_FLOOR);
    let ic = information_content(n_w, k_w, p_w)?;
    let dl = description_length(len1, len2, c);
    Ok((direction_of(n_w, k_w, p_w), ic, dl, ic / dl))
}

fn build(
    w1: Description,
    w2: Option<Description>,
    ext1: VertexSet,
    ext2: Option<VertexSet>,
    k_w: u64,
    n_w: u64,
    expected: f64,
    counting: PairCounting,
    c: &ScoreConstants,
) -> Result<Pattern> {
    let (direction, ic, dl, si) = score_counts(n_w, k_w, expected, w1.len(), w2.as_ref().map(|w| w.len()), c)?;
    Ok(Pattern {
        w1,
        w2,
        ext1,
        ext2,
        direction,
        k_w,
        n_w,
        p_w: (expected / n_w as f64).clamp(PROB_FLOOR, 1.0 - PROB_FLOOR),
        ic,
        dl,
        si,
        counting,
    })
}

fn observed(g: &AttributedGraph, a: &VertexSet, b: &VertexSet, counting: PairCounting) -> Result<u64> {
    match counting {
        PairCounting::Ordered => g.count_ordered_pairs(a, b),
        PairCounting::Unordered => g.count_edges_between(a, b),
    }
}

fn effective(g: &AttributedGraph, counting: PairCounting) -> PairCounting {
    if g.is_directed() {
        PairCounting::Ordered
    } else {
        counting
    }
}

/// Score the pattern about the edges inside `ext`, the extension of `w`.
pub fn score_single(
    g: &AttributedGraph,
    model: &BackgroundModel,
    w: &Description,
    ext: &VertexSet,
    c: &ScoreConstants,
) -> Result<Pattern> {
    let counting = effective(g, c.single_counting);
    let stats = model.pair_stats(ext, ext, counting)?;
    let k = observed(g, ext, ext, counting)?;
    build(w.clone(), None, ext.clone(), None, k, stats.pairs, stats.expected, counting, c)
}

/// Score the pattern about the edges between `ext1` and `ext2`.
pub fn score_bi(
    g: &AttributedGraph,
    model: &BackgroundModel,
    (w1, ext1): (&Description, &VertexSet),
    (w2, ext2): (&Description, &VertexSet),
    c: &ScoreConstants,
) -> Result<Pattern> {
    let counting = effective(g, c.bi_counting);
    let stats = model.pair_stats(ext1, ext2, counting)?;
    let k = observed(g, ext1, ext2, counting)?;
    build(
        w1.clone(),
        Some(w2.clone()),
        ext1.clone(),
        Some(ext2.clone()),
        k,
        stats.pairs,
        stats.expected,
        counting,
        c,
    )
}

/// Score descriptions given as text, computing their extensions.
pub fn score_descriptions(
    g: &AttributedGraph,
    model: &BackgroundModel,
    w1: &Description,
    w2: Option<&Description>,
    c: &ScoreConstants,
) -> Result<Pattern> {
    let e1 = w1.extension(g)?;
    match w2 {
        None => score_single(g, model, w1, &e1, c),
        Some(w2) => {
            let e2 = w2.extension(g)?;
            score_bi(g, model, (w1, &e1), (w2, &e2), c)
        }
    }
}

/// Which tail of the count distribution.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Tail {
    AtLeast,
    AtMost,
}

/// Exact tail of a Poisson-binomial distribution.
pub fn exact_tail_probability(probs: &[f64], k: usize, tail: Tail) -> Result<f64> {
    if probs.len() > 25 {
        return Err(Error::InvalidArgument(format!(
            "exact tail limited to 25 pairs, got {}",
            probs.len()
        )));
    }
    let mut dist = vec![0.0; probs.len() + 1];
    dist[0] = 1.0;
    for (i, &p) in probs.iter().enumerate() {
        for j in (0..=i + 1).rev() {
            let stay = dist[j] * (1.0 - p);
            let step = if j > 0 { dist[j - 1] * p } else { 0.0 };
            dist[j] = stay + step;
        }
    }
    Ok(match tail {
        Tail::AtLeast => dist.iter().skip(k).sum(),
        Tail::AtMost => dist.iter().take(k + 1).sum(),
    })
}

/// Objective community measures.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Measure {
    EdgeDensity,
    AvgDegree,
    Pool,
    EdgeSurplus,
    Segregation,
    Modularity1,
    InvAvgOdf,
    InvConductance,
}

impl Measure {
    pub const ALL: [Measure; 8] = [
        Measure::EdgeDensity,
        Measure::AvgDegree,
        Measure::Pool,
        Measure::EdgeSurplus,
        Measure::Segregation,
        Measure::Modularity1,
        Measure::InvAvgOdf,
        Measure::InvConductance,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Measure::EdgeDensity => "edge_density",
            Measure::AvgDegree => "avg_degree",
            Measure::Pool => "pool",
            Measure::EdgeSurplus => "edge_surplus",
            Measure::Segregation => "segregation",
            Measure::Modularity1 => "modularity1",
            Measure::InvAvgOdf => "inv_avg_odf",
            Measure::InvConductance => "inv_conductance",
        }
    }
}

impl fmt::Display for Measure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Measure {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Measure::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown measure `{s}`")))
    }
}

/// Counts every objective measure is computed from.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SubgroupCounts {
    pub size: u64,
    /// Edges with both endpoints inside.
    pub inside: u64,
    /// Edges with exactly one endpoint inside.
    pub inter: u64,
    pub degree_sum: u64,
    /// Mean over members of inter-degree / degree; isolated members count 0.
    pub mean_odf: f64,
}

impl SubgroupCounts {
    pub fn of(g: &AttributedGraph, a: &VertexSet) -> Result<Self> {
        let inside = g.count_edges_between(a, a)?;
        let inter = g.inter_edge_count(a)?;
        let mut degree_sum = 0u64;
        let mut odf = 0.0;
        for u in a.ids() {
            let d = g.degree(u)?;
            degree_sum += d as u64;
            if d > 0 {
                let mut out = g.neighbors(u).iter().filter(|&&v| !a.contains(v)).count();
                if g.is_directed() {
                    out += g.in_neighbors(u).iter().filter(|&&v| !a.contains(v)).count();
                }
                odf += out as f64 / d as f64;
            }
        }
        let size = a.len() as u64;
        Ok(SubgroupCounts {
            size,
            inside,
            inter,
            degree_sum,
            mean_odf: if size > 0 { odf / size as f64 } else { 0.0 },
        })
    }
}

/// Value of `measure` for a subgroup. `surplus_alpha` parameterises edge surplus.
pub fn measure_value(
    measure: Measure,
    counts: &SubgroupCounts,
    n: usize,
    m: usize,
    surplus_alpha: f64,
) -> Result<f64> {
    let s = counts.size as f64;
    if counts.size < 2 {
        return Err(Error::InvalidArgument("measures need at least two vertices".into()));
    }
    let k = counts.inside as f64;
    let inter = counts.inter as f64;
    let (n, m) = (n as f64, m as f64);
    Ok(match measure {
        Measure::EdgeDensity => 2.0 * k / (s * (s - 1.0)),
        Measure::AvgDegree => 2.0 * k / s,
        Measure::Pool => -s * (s - 1.0) / 2.0 + 3.0 * k,
        Measure::EdgeSurplus => k - surplus_alpha * s * (s - 1.0),
        Measure::Segregation => {
            if counts.inter == 0 {
                1.0
            } else {
                1.0 - inter * n * (n - 1.0) / (2.0 * m * s * (n - s))
            }
        }
        Measure::Modularity1 => {
            if m == 0.0 {
                0.0
            } else {
                let d = counts.degree_sum as f64;
                (2.0 * k - d * d / (2.0 * m)) / (2.0 * m)
            }
        }
        Measure::InvAvgOdf => 1.0 - counts.mean_odf,
        Measure::InvConductance => {
            if counts.inter == 0 {
                f64::INFINITY
            } else {
                k / inter
            }
        }
    })
}

/// All eight measures for subgroup `a`, in [`Measure::ALL`] order.
pub fn baseline_scores(g: &AttributedGraph, a: &VertexSet, surplus_alpha: f64) -> Result<Vec<(Measure, f64)>> {
    let counts = SubgroupCounts::of(g, a)?;
    Measure::ALL
        .into_iter()
        .map(|m| Ok((m, measure_value(m, &counts, g.n(), g.edge_count(), surplus_alpha)?)))
        .collect()
}

#[cfg(test)]
mod tests {
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    use super::*;
    use crate::background::fit_density_prior;
    use crate::graph::fixtures::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn pair_counts() {
        assert_eq!(n_w_single(4, PairCounting::Unordered).unwrap(), 6);
        assert_eq!(n_w_single(78, PairCounting::Ordered).unwrap(), 6006);
        assert_eq!(n_w_single(2, PairCounting::Unordered).unwrap(), 1);
        assert!(n_w_single(1, PairCounting::Ordered).is_err());
        assert_eq!(n_w_bi(3, 5, 0, PairCounting::Unordered).unwrap(), 15);
        assert_eq!(n_w_bi(4, 4, 4, PairCounting::Unordered).unwrap(), 6);
        assert_eq!(n_w_bi(2, 2, 1, PairCounting::Unordered).unwrap(), 3);
        assert_eq!(n_w_bi(4, 4, 4, PairCounting::Ordered).unwrap(), 12);
        assert!(n_w_bi(2, 3, 4, PairCounting::Unordered).is_err());
    }

    #[test]
    fn kl_examples() {
        assert_eq!(kl_bernoulli(0.3, 0.3), 0.0);
        let want = 0.5 * 2f64.ln() + 0.5 * (2.0f64 / 3.0).ln();
        assert!(close(kl_bernoulli(0.5, 0.25), want, 1e-15));
        assert!(close(kl_bernoulli(0.5, 0.25), 0.14384, 1e-5));
        assert!(close(kl_bernoulli(1.0, 0.5), 2f64.ln(), 1e-15));
        assert!(kl_bernoulli(1.0, 0.0).is_finite());
    }

    #[test]
    fn ic_examples() {
        assert_eq!(information_content(10, 3, 0.3).unwrap(), 0.0);
        let want = 10.0 * (0.8 * (0.8f64 / 0.3).ln() + 0.2 * (0.2f64 / 0.7).ln());
        assert!(close(information_content(10, 8, 0.3).unwrap(), want, 1e-12));
        assert!(close(want, 5.341, 1e-3));
        assert!(information_content(0, 0, 0.5).is_err());
    }

    #[test]
    fn dl_examples() {
        let c = ScoreConstants::default();
        assert!(close(description_length(1, None, &c), 0.8, 1e-15));
        assert!(close(description_length(1, Some(1), &c), 1.1, 1e-15));
        assert!(close(description_length(2, Some(1), &c), 1.4, 1e-15));
    }

    #[test]
    fn reference_single_subgroup_scores() {
        let c = ScoreConstants::default();
        // size 78 with 96 edges and 8.929 expected, counted over ordered pairs
        let n = n_w_single(78, c.single_counting).unwrap();
        let (dir, ic, _, si) = score_counts(n, 2 * 96, 2.0 * 8.929, 1, None, &c).unwrap();
        assert_eq!(dir, Direction::Dense);
        assert!(close(ic, 284.4, 0.5));
        assert!((si - 355.533).abs() / 355.533 < 0.01, "{si}");
        let n = n_w_single(165, c.single_counting).unwrap();
        let (_, _, _, si) = score_counts(n, 2 * 220, 2.0 * 60.040, 1, None, &c).unwrap();
        assert!((si - 316.725).abs() / 316.725 < 0.01, "{si}");
    }

    #[test]
    fn tail_examples() {
        assert!(close(exact_tail_probability(&[0.5, 0.5], 2, Tail::AtLeast).unwrap(), 0.25, 1e-15));
        assert!(close(exact_tail_probability(&[0.5, 0.5], 1, Tail::AtLeast).unwrap(), 0.75, 1e-15));
        assert!(close(exact_tail_probability(&[0.2, 0.3, 0.5], 2, Tail::AtLeast).unwrap(), 0.25, 1e-12));
        assert!(close(exact_tail_probability(&[0.2, 0.3, 0.5], 0, Tail::AtMost).unwrap(), 0.28, 1e-12));
        assert!(exact_tail_probability(&[0.1; 26], 1, Tail::AtLeast).is_err());
    }

    #[test]
    fn unsurprising_pattern_scores_zero() {
        let (_, ic, _, si) = score_counts(10, 4, 4.0, 1, None, &ScoreConstants::default()).unwrap();
        assert_eq!(ic, 0.0);
        assert_eq!(si, 0.0);
    }

    #[test]
    fn direction_follows_the_data() {
        let c = ScoreConstants::default();
        assert_eq!(score_counts(10, 1, 5.0, 1, None, &c).unwrap().0, Direction::Sparse);
        assert_eq!(score_counts(10, 9, 5.0, 1, None, &c).unwrap().0, Direction::Dense);
    }

    #[test]
    fn scoring_on_a_graph_uses_the_conventions() {
        let g = path(4);
        let m = fit_density_prior(&g, 0.25).unwrap();
        let all = g.full_set();
        let w = Description::empty();
        let c = ScoreConstants::default();
        let p = score_single(&g, &m, &w, &all, &c).unwrap();
        assert_eq!((p.n_w, p.k_w), (12, 6));
        assert!(close(p.expected(), 3.0, 1e-12));
        let u = ScoreConstants {
            single_counting: PairCounting::Unordered,
            ..c
        };
        let p = score_single(&g, &m, &w, &all, &u).unwrap();
        assert_eq!((p.n_w, p.k_w), (6, 3));
        let a = VertexSet::from_ids(4, [0, 1]);
        let b = VertexSet::from_ids(4, [1, 2]);
        let p = score_bi(&g, &m, (&w, &a), (&w, &b), &c).unwrap();
        // pairs {0,1} {0,2} {1,2}, edges 0-1 and 1-2
        assert_eq!((p.n_w, p.k_w), (3, 2));
    }

    #[test]
    fn measures_on_small_sets() {
        let g = path(3);
        let pair = VertexSet::from_ids(3, [0, 1]);
        let v = baseline_scores(&g, &pair, 1.0 / 3.0).unwrap();
        assert_eq!(v[0], (Measure::EdgeDensity, 1.0));
        assert_eq!(v[2], (Measure::Pool, 2.0));
        let all = g.full_set();
        let v = baseline_scores(&g, &all, 1.0 / 3.0).unwrap();
        let get = |m: Measure| v.iter().find(|x| x.0 == m).unwrap().1;
        assert!(close(get(Measure::EdgeDensity), 2.0 / 3.0, 1e-15));
        assert!(close(get(Measure::AvgDegree), 4.0 / 3.0, 1e-15));
        assert_eq!(get(Measure::Pool), 3.0);
        assert_eq!(get(Measure::Segregation), 1.0);
        assert_eq!(get(Measure::InvConductance), f64::INFINITY);
        assert_eq!(get(Measure::Modularity1), 0.0);
        assert_eq!(get(Measure::InvAvgOdf), 1.0);
        assert!(baseline_scores(&g, &VertexSet::from_ids(3, [0]), 0.3).is_err());
    }

    #[test]
    fn measure_hand_values() {
        // star with 3 leaves, subgroup {centre, leaf 1}: one inside edge, two leaving
        let g = star(3);
        let a = VertexSet::from_ids(4, [0, 1]);
        let c = SubgroupCounts::of(&g, &a).unwrap();
        assert_eq!((c.inside, c.inter, c.degree_sum), (1, 2, 4));
        let val = |m| measure_value(m, &c, 4, 3, 1.0 / 3.0).unwrap();
        assert!(close(val(Measure::EdgeSurplus), 1.0 - 2.0 / 3.0, 1e-15));
        // 1 - 2*4*3 / (2*3*2*2)
        assert!(close(val(Measure::Segregation), 0.0, 1e-15));
        assert!(close(val(Measure::Modularity1), (2.0 - 16.0 / 6.0) / 6.0, 1e-15));
        assert!(close(val(Measure::InvAvgOdf), 1.0 - (2.0 / 3.0) / 2.0, 1e-15));
        assert!(close(val(Measure::InvConductance), 0.5, 1e-15));
        assert_eq!("pool".parse::<Measure>().unwrap(), Measure::Pool);
        assert!("nope".parse::<Measure>().is_err());
    }

    #[test]
    fn pool_ranks_like_edge_surplus_at_one_sixth() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let n = 10;
        let mut edges = Vec::new();
        for u in 0..n as u32 {
            for v in u + 1..n as u32 {
                if rng.gen_bool(0.4) {
                    edges.push((u, v));
                }
            }
        }
        let g = AttributedGraph::new(n, &edges, false, vec![]).unwrap();
        let mut rows = Vec::new();
        for mask in 0u32..(1 << n) {
            if mask.count_ones() < 2 {
                continue;
            }
            let a = VertexSet::from_ids(n, (0..n as u32).filter(|i| mask >> i & 1 == 1));
            let c = SubgroupCounts::of(&g, &a).unwrap();
            let pool = measure_value(Measure::Pool, &c, n, g.edge_count(), 0.0).unwrap();
            let surplus = measure_value(Measure::EdgeSurplus, &c, n, g.edge_count(), 1.0 / 6.0).unwrap();
            rows.push((pool, surplus));
        }
        for x in &rows {
            for y in &rows {
                assert_eq!(x.0 < y.0, x.1 < y.1 - 1e-9);
            }
        }
    }

    fn enumerate_tail(probs: &[f64], k: usize, tail: Tail) -> f64 {
        let mut total = 0.0;
        for mask in 0u32..(1 << probs.len()) {
            let hits = mask.count_ones() as usize;
            let keep = match tail {
                Tail::AtLeast => hits >= k,
                Tail::AtMost => hits <= k,
            };
            if keep {
                total += probs
                    .iter()
                    .enumerate()
                    .map(|(i, &p)| if mask >> i & 1 == 1 { p } else { 1.0 - p })
                    .product::<f64>();
            }
        }
        total
    }

    proptest! {
        #[test]
        fn tail_matches_enumeration(probs in proptest::collection::vec(0.0f64..=1.0, 0..=10), k in 0usize..12, at_least in any::<bool>()) {
            let tail = if at_least { Tail::AtLeast } else { Tail::AtMost };
            let dp = exact_tail_probability(&probs, k, tail).unwrap();
            prop_assert!((dp - enumerate_tail(&probs, k, tail)).abs() < 1e-12);
        }

        #[test]
        fn bound_dominates_exact_tail(probs in proptest::collection::vec(0.001f64..0.999, 1..=20), frac in 0.0f64..=1.0) {
            let n = probs.len();
            let k = ((n as f64) * frac).round() as usize;
            let p_w = probs.iter().sum::<f64>() / n as f64;
            let ic = information_content(n as u64, k as u64, p_w).unwrap();
            let tail = match direction_of(n as u64, k as u64, p_w) {
                Direction::Dense => Tail::AtLeast,
                Direction::Sparse => Tail::AtMost,
            };
            let exact = exact_tail_probability(&probs, k, tail).unwrap();
            prop_assert!((-ic).exp() >= exact * (1.0 - 1e-12));
        }

        #[test]
        fn kl_symmetry(q in 0.0f64..=1.0, p in 1e-6f64..(1.0 - 1e-6)) {
            prop_assert!((kl_bernoulli(q, p) - kl_bernoulli(1.0 - q, 1.0 - p)).abs() < 1e-12);
        }

        #[test]
        fn si_scales_inversely_with_costs(n in 2u64..500, kf in 0.0f64..=1.0, p in 0.01f64..0.99, factor in 0.1f64..10.0, len in 1usize..4) {
            let k = (n as f64 * kf).round() as u64;
            let c = ScoreConstants::default();
            let scaled = ScoreConstants { alpha: c.alpha * factor, beta: c.beta * factor, ..c };
            let a = score_counts(n, k, p * n as f64, len, None, &c).unwrap().3;
            let b = score_counts(n, k, p * n as f64, len, None, &scaled).unwrap().3;
            prop_assert!((a / factor - b).abs() <= 1e-9 * (1.0 + a));
        }

        #[test]
        fn ic_grows_away_from_expectation(n in 2u64..200, p in 0.02f64..0.98) {
            let centre = p * n as f64;
            let mut last = f64::INFINITY;
            for k in 0..=n {
                let ic = information_content(n, k, p).unwrap();
                prop_assert!(ic >= 0.0);
                if (k as f64) <= centre {
                    prop_assert!(ic < last || ic == 0.0);
                    last = ic;
                } else if (k - 1) as f64 >= centre {
                    prop_assert!(ic > information_content(n, k - 1, p).unwrap());
                }
            }
        }
    }
}
