//! Beam search over descriptions for single-subgroup patterns, the nested
//! variant for bi-subgroup patterns, and the iterative mining loop.

mod beam;

use std::collections::HashSet;
use std::sync::atomic::{AtomicBool, Ordering as AtomicOrdering};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use beam::{Beam, Entry};

use crate::background::BackgroundModel;
use crate::description::{Description, Selector};
use crate::error::{Error, Result};
use crate::graph::{AttributedGraph, VertexSet};
use crate::score::{measure_value, score_bi, score_single, Measure, Pattern, ScoreConstants, SubgroupCounts};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SearchConfig {
    /// Beam width of the single-subgroup search.
    pub beam_width: usize,
    /// Minimum number of distinct first descriptions in the nested search's result.
    pub x1: usize,
    /// Width of the inner beam.
    pub x2: usize,
    pub depth: usize,
    pub require_shared_attribute: bool,
    pub require_disjoint_extensions: bool,
    pub min_extension_size: usize,
    pub constants: ScoreConstants,
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig {
            beam_width: 20,
            x1: 8,
            x2: 6,
            depth: 2,
            require_shared_attribute: false,
            require_disjoint_extensions: false,
            min_extension_size: 1,
            constants: ScoreConstants::default(),
        }
    }
}

impl SearchConfig {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("beam width", self.beam_width),
            ("x1", self.x1),
            ("x2", self.x2),
            ("depth", self.depth),
        ] {
            if v == 0 {
                return Err(Error::InvalidArgument(format!("{name} must be at least 1")));
            }
        }
        self.constants.validate()
    }
}

/// Progress of a search, reported once per expanded candidate batch.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Progress {
    pub round: usize,
    pub rounds: usize,
    pub done: usize,
    pub total: usize,
}

/// Optional observers for long searches.
#[derive(Default, Clone, Copy)]
pub struct Hooks<'a> {
    pub progress: Option<&'a (dyn Fn(Progress) + Sync)>,
    pub cancel: Option<&'a AtomicBool>,
}

impl Hooks<'_> {
    fn report(&self, p: Progress) {
        if let Some(f) = self.progress {
            f(p);
        }
    }

    fn check(&self) -> Result<()> {
        match self.cancel {
            Some(c) if c.load(AtomicOrdering::Relaxed) => Err(Error::Cancelled),
            _ => Ok(()),
        }
    }
}

/// Selectors with their extensions computed once.
struct Space<'a> {
    selectors: &'a [Selector],
    extensions: Vec<VertexSet>,
}

impl<'a> Space<'a> {
    fn new(g: &AttributedGraph, selectors: &'a [Selector]) -> Result<Self> {
        let extensions = selectors
            .par_iter()
            .map(|s| s.extension(g))
            .collect::<Result<Vec<_>>>()?;
        Ok(Space {
            selectors,
            extensions,
        })
    }

    /// Distinct admissible one-selector refinements of `parents`, in a
    /// deterministic order, each with its extension.
    fn refine(
        &self,
        parents: &[(&Description, &VertexSet)],
        seen: &mut HashSet<Description>,
        min_size: usize,
    ) -> Vec<(Description, VertexSet)> {
        let mut todo = Vec::new();
        for (pi, &(d, _)) in parents.iter().enumerate() {
            for (si, s) in self.selectors.iter().enumerate() {
                if let Ok(r) = d.refine(s) {
                    if seen.insert(r.clone()) {
                        todo.push((pi, si, r));
                    }
                }
            }
        }
        todo.into_par_iter()
            .filter_map(|(pi, si, r)| {
                let pext = parents[pi].1;
                let ext = pext.intersection(&self.extensions[si]);
                (ext.len() >= min_size && ext != *pext).then_some((r, ext))
            })
            .collect()
    }
}

fn pattern_key(p: &Pattern) -> String {
    match &p.w2 {
        None => p.w1.to_string(),
        Some(w2) => format!("{} | {}", p.w1, w2),
    }
}

fn entry(p: Pattern) -> Entry<Pattern> {
    Entry {
        score: p.si,
        len: p.total_len(),
        key: pattern_key(&p),
        group: p.w1.to_string(),
        item: p,
    }
}

/// Level-wise beam search over single descriptions with an arbitrary
/// objective. `objective` returns `None` for candidates that cannot be scored.
/// Shorter descriptions stay in the beam and compete with longer ones.
pub fn beam_search_by<T, F>(
    g: &AttributedGraph,
    selectors: &[Selector],
    width: usize,
    depth: usize,
    min_size: usize,
    objective: F,
    hooks: &Hooks,
) -> Result<Vec<Entry<(Description, VertexSet, T)>>>
where
    T: Send + Clone,
    F: Fn(&Description, &VertexSet) -> Option<Entry<T>> + Sync,
{
    let space = Space::new(g, selectors)?;
    let root = (Description::empty(), g.full_set());
    let mut beam: Beam<(Description, VertexSet, T)> = Beam::new(width);
    let mut seen = HashSet::new();
    for round in 1..=depth {
        hooks.check()?;
        let parents: Vec<(&Description, &VertexSet)> = if round == 1 {
            vec![(&root.0, &root.1)]
        } else {
            beam.sorted()
                .into_iter()
                .filter(|e| e.item.0.len() == round - 1)
                .map(|e| (&e.item.0, &e.item.1))
                .collect()
        };
        if parents.is_empty() {
            break;
        }
        let cands = space.refine(&parents, &mut seen, min_size);
        let scored: Vec<Option<Entry<(Description, VertexSet, T)>>> = cands
            .into_par_iter()
            .map(|(d, ext)| {
                objective(&d, &ext).map(|e| Entry {
                    score: e.score,
                    len: e.len,
                    key: e.key,
                    group: e.group,
                    item: (d, ext, e.item),
                })
            })
            .collect();
        let total = scored.len();
        for e in scored.into_iter().flatten() {
            beam.add_if_required(e);
        }
        hooks.report(Progress {
            round,
            rounds: depth,
            done: total,
            total,
        });
    }
    Ok(beam.into_sorted())
}

/// Top single-subgroup patterns by subjective interestingness.
pub fn beam_search_single(
    g: &AttributedGraph,
    model: &BackgroundModel,
    selectors: &[Selector],
    cfg: &SearchConfig,
) -> Result<Vec<Pattern>> {
    beam_search_single_with(g, model, selectors, cfg, &Hooks::default())
}

pub fn beam_search_single_with(
    g: &AttributedGraph,
    model: &BackgroundModel,
    selectors: &[Selector],
    cfg: &SearchConfig,
    hooks: &Hooks,
) -> Result<Vec<Pattern>> {
    cfg.validate()?;
    let found = beam_search_by(
        g,
        selectors,
        cfg.beam_width,
        cfg.depth,
        cfg.min_extension_size.max(2),
        |d, ext| score_single(g, model, d, ext, &cfg.constants).ok().map(entry),
        hooks,
    )?;
    if found.is_empty() {
        log::warn!("no description has an extension of at least two vertices");
    }
    Ok(found.into_iter().map(|e| e.item.2).collect())
}

/// A subgroup ranked by an objective measure.
#[derive(Clone, Debug, PartialEq)]
pub struct MeasureHit {
    pub description: Description,
    pub extension: VertexSet,
    pub counts: SubgroupCounts,
    pub value: f64,
}

/// Top subgroups by one objective measure.
pub fn beam_search_measure(
    g: &AttributedGraph,
    selectors: &[Selector],
    cfg: &SearchConfig,
    measure: Measure,
    surplus_alpha: f64,
    hooks: &Hooks,
) -> Result<Vec<MeasureHit>> {
    cfg.validate()?;
    let found = beam_search_by(
        g,
        selectors,
        cfg.beam_width,
        cfg.depth,
        cfg.min_extension_size.max(2),
        |d, ext| {
            let counts = SubgroupCounts::of(g, ext).ok()?;
            let value = measure_value(measure, &counts, g.n(), g.edge_count(), surplus_alpha).ok()?;
            Some(Entry {
                score: value,
                len: d.len(),
                key: d.to_string(),
                group: d.to_string(),
                item: counts,
            })
        },
        hooks,
    )?;
    Ok(found
        .into_iter()
        .map(|e| MeasureHit {
            description: e.item.0,
            extension: e.item.1,
            counts: e.item.2,
            value: e.score,
        })
        .collect())
}

fn admissible(cfg: &SearchConfig, z1: (&Description, &VertexSet), z2: (&Description, &VertexSet)) -> bool {
    if cfg.require_shared_attribute && !z1.0.shares_attribute_with_different_value(z2.0) {
        return false;
    }
    if cfg.require_disjoint_extensions && !z1.1.is_disjoint(z2.1) {
        return false;
    }
    true
}

/// Inner beam: best second descriptions for a fixed first one.
fn inner_search(
    g: &AttributedGraph,
    model: &BackgroundModel,
    space: &Space,
    cfg: &SearchConfig,
    z1: (&Description, &VertexSet),
    min_size: usize,
) -> Vec<Entry<Pattern>> {
    let root = (Description::empty(), g.full_set());
    let mut beam: Beam<Pattern> = Beam::new(cfg.x2);
    let mut seen = HashSet::new();
    for round in 1..=cfg.depth {
        let parents: Vec<(&Description, &VertexSet)> = if round == 1 {
            vec![(&root.0, &root.1)]
        } else {
            beam.entries()
                .iter()
                .filter_map(|e| {
                    let w2 = e.item.w2.as_ref()?;
                    (w2.len() == round - 1).then(|| (w2, e.item.target()))
                })
                .collect()
        };
        if parents.is_empty() {
            break;
        }
        let cands = space.refine(&parents, &mut seen, min_size);
        let mut scored = Vec::with_capacity(cands.len());
        for (d, ext) in &cands {
            if !admissible(cfg, z1, (d, ext)) {
                continue;
            }
            if let Ok(p) = score_bi(g, model, z1, (d, ext), &cfg.constants) {
                scored.push(entry(p));
            }
        }
        for e in scored {
            beam.add_if_required(e);
        }
    }
    beam.into_sorted()
}

/// Top bi-subgroup patterns: one inner beam search over the second
/// description per candidate first description.
pub fn nested_beam_search(
    g: &AttributedGraph,
    model: &BackgroundModel,
    selectors: &[Selector],
    cfg: &SearchConfig,
) -> Result<Vec<Pattern>> {
    nested_beam_search_with(g, model, selectors, cfg, &Hooks::default())
}

pub fn nested_beam_search_with(
    g: &AttributedGraph,
    model: &BackgroundModel,
    selectors: &[Selector],
    cfg: &SearchConfig,
    hooks: &Hooks,
) -> Result<Vec<Pattern>> {
    cfg.validate()?;
    let space = Space::new(g, selectors)?;
    let min_size = cfg.min_extension_size.max(1);
    let root = (Description::empty(), g.full_set());
    let mut outer: Beam<Pattern> = Beam::with_floor(cfg.x1 * cfg.x2, cfg.x1);
    let mut seen = HashSet::new();
    for round in 1..=cfg.depth {
        hooks.check()?;
        let parents: Vec<(Description, VertexSet)> = if round == 1 {
            vec![root.clone()]
        } else {
            let mut v: Vec<(Description, VertexSet)> = Vec::new();
            for e in outer.sorted() {
                if e.item.w1.len() == round - 1 && !v.iter().any(|(d, _)| *d == e.item.w1) {
                    v.push((e.item.w1.clone(), e.item.ext1.clone()));
                }
            }
            v
        };
        if parents.is_empty() {
            break;
        }
        let parent_refs: Vec<(&Description, &VertexSet)> = parents.iter().map(|(d, e)| (d, e)).collect();
        let z1s = space.refine(&parent_refs, &mut seen, min_size);
        let total = z1s.len();
        let done = std::sync::atomic::AtomicUsize::new(0);
        let inner: Vec<Vec<Entry<Pattern>>> = z1s
            .par_iter()
            .map(|(d, ext)| {
                if hooks.check().is_err() {
                    return Vec::new();
                }
                let r = inner_search(g, model, &space, cfg, (d, ext), min_size);
                let k = done.fetch_add(1, AtomicOrdering::Relaxed) + 1;
                hooks.report(Progress {
                    round,
                    rounds: cfg.depth,
                    done: k,
                    total,
                });
                r
            })
            .collect();
        hooks.check()?;
        for e in inner.into_iter().flatten() {
            outer.add_if_required(e);
        }
    }
    let found: Vec<Pattern> = outer.into_sorted().into_iter().map(|e| e.item).collect();
    if found.is_empty() {
        log::warn!("no admissible pair of descriptions");
    }
    Ok(found)
}

/// Result of iterative mining.
#[derive(Clone, Debug)]
pub struct Iteration {
    /// Ranked patterns of each round, scored against the model of that round.
    pub rounds: Vec<Vec<Pattern>>,
    /// Model after absorbing every round's top patterns.
    pub model: BackgroundModel,
}

/// Repeatedly mine bi-subgroup patterns, absorbing the top `absorb` patterns
/// of each round into the model before the next.
pub fn iterate(
    g: &AttributedGraph,
    model0: &BackgroundModel,
    selectors: &[Selector],
    cfg: &SearchConfig,
    rounds: usize,
    absorb: usize,
) -> Result<Iteration> {
    iterate_with(g, model0, selectors, cfg, rounds, absorb, &Hooks::default())
}

pub fn iterate_with(
    g: &AttributedGraph,
    model0: &BackgroundModel,
    selectors: &[Selector],
    cfg: &SearchConfig,
    rounds: usize,
    absorb: usize,
    hooks: &Hooks,
) -> Result<Iteration> {
    if rounds == 0 {
        return Err(Error::InvalidArgument("need at least one round".into()));
    }
    let mut model = model0.clone();
    let mut out = Vec::new();
    for round in 1..=rounds {
        let found = nested_beam_search_with(g, &model, selectors, cfg, hooks)?;
        if found.is_empty() {
            log::warn!("round {round} found no patterns; stopping");
            break;
        }
        for p in found.iter().take(absorb.max(1)) {
            let (next, abs) = model.absorb(g, &p.ext1, p.target(), pattern_key(p))?;
            log::info!("round {round}: absorbed {} with tilt {:.4}", pattern_key(p), abs.lambda);
            model = next;
        }
        out.push(found);
    }
    Ok(Iteration { rounds: out, model })
}

#[cfg(test)]
mod tests;
