use densub::report::{pattern_records, read_jsonl, write_jsonl, PatternRecord};
use densub::synth::{write_synth, PlantedBlock, SynthParams};
use densub::{
    fit_block_prior, fit_degree_prior, generate_selectors, iterate, load_graph, nested_beam_search, score_descriptions,
    BackgroundModel, Description, FitOptions, LoadOptions, SearchConfig, SelectorConfig,
};

fn fixture(dir: &std::path::Path) -> (std::path::PathBuf, std::path::PathBuf) {
    let params = SynthParams {
        n: 160,
        groups: 4,
        blocks: vec![PlantedBlock { a: 0, b: 2, density: 0.4 }],
        tags: 3,
        seed: 5,
        ..SynthParams::default()
    };
    write_synth(&params, dir, "g").unwrap();
    (dir.join("g.edges"), dir.join("g.csv"))
}

#[test]
fn files_to_ranked_report() {
    let dir = tempfile::tempdir().unwrap();
    let (e, a) = fixture(dir.path());
    let g = load_graph(&e, &a, &LoadOptions::default()).unwrap();
    let (m, report) = fit_degree_prior(&g, &FitOptions::default()).unwrap();
    assert!(report.max_degree_residual <= 1e-4);

    let path = dir.path().join("model.txt");
    m.save(&path, &["degree prior".into()]).unwrap();
    let m = BackgroundModel::load(&path).unwrap();

    let s = generate_selectors(&g, &SelectorConfig::default()).unwrap();
    let cfg = SearchConfig { x1: 3, x2: 2, ..SearchConfig::default() };
    let found = nested_beam_search(&g, &m, &s, &cfg).unwrap();
    let mut top = [found[0].w1.to_string(), found[0].w2.as_ref().unwrap().to_string()];
    top.sort();
    assert_eq!(top, ["group=g0", "group=g2"]);

    let mut buf = Vec::new();
    write_jsonl(&pattern_records(&found, None), &mut buf).unwrap();
    let back: Vec<PatternRecord> = read_jsonl(buf.as_slice()).unwrap();
    for r in back {
        let w1 = Description::parse(&r.w1, &g).unwrap();
        let w2 = Description::parse(r.w2.as_deref().unwrap(), &g).unwrap();
        let p = score_descriptions(&g, &m, &w1, Some(&w2), &cfg.constants).unwrap();
        assert!((p.si - r.si).abs() < 1e-9);
    }
}

#[test]
fn block_prior_explains_the_planted_block() {
    let dir = tempfile::tempdir().unwrap();
    let (e, a) = fixture(dir.path());
    let g = load_graph(&e, &a, &LoadOptions::default()).unwrap();
    let (plain, _) = fit_degree_prior(&g, &FitOptions::default()).unwrap();
    let (informed, _) = fit_block_prior(&g, &["group"], true, &FitOptions::default()).unwrap();
    let w1 = Description::parse("group=g0", &g).unwrap();
    let w2 = Description::parse("group=g2", &g).unwrap();
    let c = SearchConfig::default().constants;
    let before = score_descriptions(&g, &plain, &w1, Some(&w2), &c).unwrap();
    let after = score_descriptions(&g, &informed, &w1, Some(&w2), &c).unwrap();
    assert!(before.si > 10.0);
    assert!(after.si < 1e-3, "{}", after.si);
}

#[test]
fn iteration_moves_on_after_absorbing() {
    let dir = tempfile::tempdir().unwrap();
    let (e, a) = fixture(dir.path());
    let g = load_graph(&e, &a, &LoadOptions::default()).unwrap();
    let (m, _) = fit_degree_prior(&g, &FitOptions::default()).unwrap();
    let s = generate_selectors(&g, &SelectorConfig::default()).unwrap();
    let cfg = SearchConfig { x1: 3, x2: 2, ..SearchConfig::default() };
    let it = iterate(&g, &m, &s, &cfg, 3, 1).unwrap();
    assert_eq!(it.model.updates().len(), 3);
    let key = |r: usize| {
        let p = &it.rounds[r][0];
        let mut k = [p.w1.to_string(), p.w2.as_ref().unwrap().to_string()];
        k.sort();
        k
    };
    assert_ne!(key(0), key(1));
    assert!(it.rounds[1][0].si < it.rounds[0][0].si);
}
