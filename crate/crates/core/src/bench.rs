//! Wall-time of the mining pipeline as the selector count grows.

use std::time::Instant;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::background::BackgroundModel;
use crate::description::Selector;
use crate::error::{Error, Result};
use crate::graph::AttributedGraph;
use crate::search::{beam_search_single, nested_beam_search, SearchConfig};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BenchMode {
    Single,
    Bi,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchRow {
    pub selectors: usize,
    pub seconds: f64,
    /// Time relative to the previous row.
    pub ratio: Option<f64>,
    pub patterns: usize,
}

/// Selectors in a seeded random order, so that every prefix is a fair sample.
pub fn shuffled(selectors: &[Selector], seed: u64) -> Vec<Selector> {
    let mut v = selectors.to_vec();
    v.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    v
}

/// Time the search on the first `k` selectors for each `k` in `schedule`,
/// keeping the fastest of `reps` runs, on a pool of `threads` threads.
#[allow(clippy::too_many_arguments)]
pub fn bench(
    g: &AttributedGraph,
    model: &BackgroundModel,
    selectors: &[Selector],
    schedule: &[usize],
    cfg: &SearchConfig,
    mode: BenchMode,
    reps: usize,
    threads: usize,
) -> Result<Vec<BenchRow>> {
    if schedule.is_empty() {
        return Err(Error::InvalidArgument("empty selector schedule".into()));
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads.max(1))
        .build()
        .map_err(|e| Error::InvalidArgument(format!("thread pool: {e}")))?;
    for &k in schedule {
        if k > selectors.len() {
            log::warn!("schedule asks for {k} selectors but only {} exist", selectors.len());
        }
    }
    // repetitions sweep the whole schedule so that slow drift hits every size alike
    let mut best = vec![f64::INFINITY; schedule.len()];
    let mut patterns = vec![0; schedule.len()];
    for _ in 0..reps.max(1) {
        for (i, &k) in schedule.iter().enumerate() {
            let subset = &selectors[..k.min(selectors.len())];
            let start = Instant::now();
            let found = pool.install(|| match mode {
                BenchMode::Single => beam_search_single(g, model, subset, cfg),
                BenchMode::Bi => nested_beam_search(g, model, subset, cfg),
            })?;
            best[i] = best[i].min(start.elapsed().as_secs_f64());
            patterns[i] = found.len();
        }
    }
    let mut rows: Vec<BenchRow> = Vec::new();
    for (i, &k) in schedule.iter().enumerate() {
        let ratio = rows.last().map(|r| best[i] / r.seconds);
        rows.push(BenchRow {
            selectors: k.min(selectors.len()),
            seconds: best[i],
            ratio,
            patterns: patterns[i],
        });
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::background::fit_density_prior;
    use crate::description::{generate_selectors, SelectorConfig};
    use crate::synth::{generate, SynthParams};

    #[test]
    fn two_rows_with_a_ratio() {
        let (g, _) = generate(&SynthParams {
            n: 100,
            groups: 4,
            tags: 30,
            ..SynthParams::default()
        })
        .unwrap();
        let m = fit_density_prior(&g, 0.05).unwrap();
        let s = shuffled(&generate_selectors(&g, &SelectorConfig::default()).unwrap(), 1);
        let cfg = SearchConfig {
            beam_width: 5,
            ..SearchConfig::default()
        };
        let rows = bench(&g, &m, &s, &[10, 20], &cfg, BenchMode::Single, 1, 1).unwrap();
        assert_eq!(rows.len(), 2);
        assert_eq!(rows[0].selectors, 10);
        assert!(rows[0].ratio.is_none());
        assert!(rows[1].ratio.unwrap() > 0.0);
        assert!(bench(&g, &m, &s, &[], &cfg, BenchMode::Bi, 1, 1).is_err());
    }

    #[test]
    fn shuffle_is_seeded() {
        let (g, _) = generate(&SynthParams {
            n: 40,
            groups: 4,
            tags: 10,
            ..SynthParams::default()
        })
        .unwrap();
        let s = generate_selectors(&g, &SelectorConfig::default()).unwrap();
        assert_eq!(shuffled(&s, 3), shuffled(&s, 3));
        assert_ne!(shuffled(&s, 3), s);
    }
}
