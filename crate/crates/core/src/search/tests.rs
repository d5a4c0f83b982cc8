use std::sync::atomic::AtomicBool;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::background::{fit_degree_prior, fit_density_prior, FitOptions};
use crate::description::{generate_selectors, SelectorConfig};
use crate::graph::AttributeColumn;
use crate::score::score_descriptions;

/// Small random graph with three nominal attributes (8 selectors) and a
/// denser block inside `a=1`.
fn tiny(seed: u64, n: usize) -> AttributedGraph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let col = |rng: &mut ChaCha8Rng, k: u32| -> Vec<Option<String>> {
        (0..n).map(|_| Some(rng.gen_range(0..k).to_string())).collect()
    };
    let a = col(&mut rng, 2);
    let b = col(&mut rng, 3);
    let c = col(&mut rng, 3);
    let mut edges = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            let p = if a[u].as_deref() == Some("1") && a[v].as_deref() == Some("1") { 0.4 } else { 0.1 };
            if rng.gen_bool(p) {
                edges.push((u as u32, v as u32));
            }
        }
    }
    AttributedGraph::new(
        n,
        &edges,
        false,
        vec![
            AttributeColumn::nominal("a", &a),
            AttributeColumn::nominal("b", &b),
            AttributeColumn::nominal("c", &c),
        ],
    )
    .unwrap()
}

/// Every description of one or two selectors on distinct attributes.
fn all_descriptions(selectors: &[Selector]) -> Vec<Description> {
    let mut out = Vec::new();
    for (i, s) in selectors.iter().enumerate() {
        let d = Description::empty().refine(s).unwrap();
        for t in &selectors[i + 1..] {
            if let Ok(r) = d.refine(t) {
                out.push(r);
            }
        }
        out.push(d);
    }
    out
}

fn model_for(g: &AttributedGraph) -> BackgroundModel {
    match fit_degree_prior(g, &FitOptions::default()) {
        Ok((m, _)) => m,
        Err(_) => fit_density_prior(g, 0.1).unwrap(),
    }
}

#[test]
fn width_one_round_is_exhaustive() {
    let g = tiny(1, 30);
    let m = model_for(&g);
    let s = generate_selectors(&g, &SelectorConfig::default()).unwrap();
    let cfg = SearchConfig {
        beam_width: s.len(),
        depth: 1,
        ..SearchConfig::default()
    };
    let found = beam_search_single(&g, &m, &s, &cfg).unwrap();
    let mut want: Vec<(String, f64)> = s
        .iter()
        .filter_map(|sel| {
            let d = Description::empty().refine(sel).unwrap();
            let p = score_descriptions(&g, &m, &d, None, &cfg.constants).ok()?;
            Some((d.to_string(), p.si))
        })
        .collect();
    want.sort_by(|x, y| y.1.total_cmp(&x.1).then(x.0.cmp(&y.0)));
    let got: Vec<(String, f64)> = found.iter().map(|p| (p.w1.to_string(), p.si)).collect();
    assert_eq!(got, want);
}

#[test]
fn single_search_matches_exhaustive_optimum() {
    for seed in 0..5 {
        let g = tiny(seed, 36);
        let m = model_for(&g);
        let s = generate_selectors(&g, &SelectorConfig::default()).unwrap();
        let all = all_descriptions(&s);
        let cfg = SearchConfig {
            beam_width: all.len(),
            depth: 2,
            ..SearchConfig::default()
        };
        let best = all
            .iter()
            .filter_map(|d| score_descriptions(&g, &m, d, None, &cfg.constants).ok())
            .map(|p| p.si)
            .fold(f64::NEG_INFINITY, f64::max);
        let found = beam_search_single(&g, &m, &s, &cfg).unwrap();
        assert!((found[0].si - best).abs() < 1e-12, "seed {seed}");
    }
}

#[test]
fn nested_search_matches_exhaustive_optimum() {
    for seed in 0..3 {
        let g = tiny(seed + 10, 24);
        let m = model_for(&g);
        let s = generate_selectors(&g, &SelectorConfig::default()).unwrap();
        let all = all_descriptions(&s);
        let cfg = SearchConfig {
            x1: all.len(),
            x2: all.len(),
            depth: 2,
            ..SearchConfig::default()
        };
        let mut best = f64::NEG_INFINITY;
        for w1 in &all {
            for w2 in &all {
                if let Ok(p) = score_descriptions(&g, &m, w1, Some(w2), &cfg.constants) {
                    best = best.max(p.si);
                }
            }
        }
        let found = nested_beam_search(&g, &m, &s, &cfg).unwrap();
        assert!((found[0].si - best).abs() < 1e-12, "seed {seed}: {} vs {best}", found[0].si);
    }
}

#[test]
fn planted_clique_is_found() {
    let n = 200;
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let group: Vec<Option<String>> = (0..n).map(|u| Some(format!("g{}", u / 20))).collect();
    let noise: Vec<Option<String>> = (0..n).map(|_| Some(rng.gen_range(0..4).to_string())).collect();
    let mut edges = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            if (u / 20 == 3 && v / 20 == 3) || rng.gen_bool(0.02) {
                edges.push((u as u32, v as u32));
            }
        }
    }
    let g = AttributedGraph::new(
        n,
        &edges,
        false,
        vec![AttributeColumn::nominal("group", &group), AttributeColumn::nominal("noise", &noise)],
    )
    .unwrap();
    let (m, _) = fit_degree_prior(&g, &FitOptions::default()).unwrap();
    let s = generate_selectors(&g, &SelectorConfig::default()).unwrap();
    let cfg = SearchConfig {
        beam_width: 10,
        depth: 1,
        ..SearchConfig::default()
    };
    let found = beam_search_single(&g, &m, &s, &cfg).unwrap();
    assert_eq!(found[0].w1.to_string(), "group=g3");
    assert_eq!(found[0].ext1, VertexSet::from_ids(n, 60..80));
}

#[test]
fn searches_are_deterministic() {
    let g = tiny(3, 40);
    let m = model_for(&g);
    let s = generate_selectors(&g, &SelectorConfig::default()).unwrap();
    let cfg = SearchConfig {
        x1: 3,
        x2: 2,
        beam_width: 4,
        ..SearchConfig::default()
    };
    let a = nested_beam_search(&g, &m, &s, &cfg).unwrap();
    let b = nested_beam_search(&g, &m, &s, &cfg).unwrap();
    assert_eq!(a, b);
    let a = beam_search_single(&g, &m, &s, &cfg).unwrap();
    let b = beam_search_single(&g, &m, &s, &cfg).unwrap();
    assert_eq!(a, b);
}

#[test]
fn outer_beam_keeps_distinct_first_descriptions() {
    let g = tiny(4, 40);
    let m = model_for(&g);
    let s = generate_selectors(&g, &SelectorConfig::default()).unwrap();
    let cfg = SearchConfig {
        x1: 4,
        x2: 3,
        ..SearchConfig::default()
    };
    let found = nested_beam_search(&g, &m, &s, &cfg).unwrap();
    assert!(found.len() <= 12);
    let mut firsts: Vec<String> = found.iter().map(|p| p.w1.to_string()).collect();
    firsts.sort();
    firsts.dedup();
    assert!(firsts.len() >= 4);
    for w in found.windows(2) {
        assert!(w[0].si >= w[1].si);
    }
}

#[test]
fn constraints_filter_candidates() {
    let g = tiny(5, 40);
    let m = model_for(&g);
    let s = generate_selectors(&g, &SelectorConfig::default()).unwrap();
    let cfg = SearchConfig {
        x1: 3,
        x2: 3,
        require_shared_attribute: true,
        require_disjoint_extensions: true,
        ..SearchConfig::default()
    };
    let found = nested_beam_search(&g, &m, &s, &cfg).unwrap();
    assert!(!found.is_empty());
    for p in &found {
        let w2 = p.w2.as_ref().unwrap();
        assert!(p.w1.shares_attribute_with_different_value(w2));
        assert!(p.ext1.is_disjoint(p.target()));
    }
}

#[test]
fn iterate_absorbs_the_top_pattern() {
    let g = tiny(6, 40);
    let m = model_for(&g);
    let s = generate_selectors(&g, &SelectorConfig::default()).unwrap();
    let cfg = SearchConfig {
        x1: 2,
        x2: 2,
        ..SearchConfig::default()
    };
    let it = iterate(&g, &m, &s, &cfg, 2, 1).unwrap();
    assert_eq!(it.rounds.len(), 2);
    assert_eq!(it.model.updates().len(), 2);
    let top = &it.rounds[0][0];
    let after = it.model.updates()[0].clone();
    assert_eq!(after.a, top.ext1);
    let one = m.absorb(&g, &top.ext1, top.target(), "x").unwrap().0;
    let again = score_descriptions(&g, &one, &top.w1, top.w2.as_ref(), &cfg.constants).unwrap();
    assert!(again.si < 1e-6);
    assert_ne!(it.rounds[1][0].w1.to_string() + &it.rounds[1][0].w2.as_ref().unwrap().to_string(),
        top.w1.to_string() + &top.w2.as_ref().unwrap().to_string());
}

#[test]
fn cancellation_stops_the_search() {
    let g = tiny(7, 30);
    let m = model_for(&g);
    let s = generate_selectors(&g, &SelectorConfig::default()).unwrap();
    let stop = AtomicBool::new(true);
    let hooks = Hooks {
        progress: None,
        cancel: Some(&stop),
    };
    let r = nested_beam_search_with(&g, &m, &s, &SearchConfig::default(), &hooks);
    assert!(matches!(r, Err(Error::Cancelled)));
}

#[test]
fn progress_is_reported() {
    let g = tiny(8, 30);
    let m = model_for(&g);
    let s = generate_selectors(&g, &SelectorConfig::default()).unwrap();
    let calls = std::sync::atomic::AtomicUsize::new(0);
    let f = |_: Progress| {
        calls.fetch_add(1, AtomicOrdering::Relaxed);
    };
    let hooks = Hooks {
        progress: Some(&f),
        cancel: None,
    };
    nested_beam_search_with(&g, &m, &s, &SearchConfig::default(), &hooks).unwrap();
    assert!(calls.load(AtomicOrdering::Relaxed) >= s.len());
}

#[test]
fn measure_search_finds_tiny_dense_sets() {
    let g = tiny(9, 40);
    let s = generate_selectors(&g, &SelectorConfig::default()).unwrap();
    let cfg = SearchConfig {
        beam_width: 5,
        ..SearchConfig::default()
    };
    let hits = beam_search_measure(&g, &s, &cfg, Measure::AvgDegree, 1.0 / 3.0, &Hooks::default()).unwrap();
    assert!(!hits.is_empty());
    for w in hits.windows(2) {
        assert!(w[0].value >= w[1].value);
    }
    assert_eq!(hits[0].extension, hits[0].description.extension(&g).unwrap());
}

#[test]
fn empty_selector_list_gives_empty_result() {
    let g = tiny(2, 20);
    let m = model_for(&g);
    assert!(beam_search_single(&g, &m, &[], &SearchConfig::default()).unwrap().is_empty());
    assert!(nested_beam_search(&g, &m, &[], &SearchConfig::default()).unwrap().is_empty());
    let bad = SearchConfig {
        depth: 0,
        ..SearchConfig::default()
    };
    assert!(beam_search_single(&g, &m, &[], &bad).is_err());
}
