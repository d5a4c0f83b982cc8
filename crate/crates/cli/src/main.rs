use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{anyhow, Context};
use clap::{Args, CommandFactory, Parser, Subcommand};

use densub::background::{BackgroundModel, FitOptions, FitReport, PairCounting};
use densub::bench::{bench, shuffled, BenchMode};
use densub::config::{parse_config, Mode, PriorSpec};
use densub::report::{measure_table, pattern_records, pattern_table, write_jsonl, MeasureRecord, PatternRecord};
use densub::search::{beam_search_measure, iterate_with, nested_beam_search_with, beam_search_single_with};
use densub::synth::{write_synth, PlantedBlock, SynthParams};
use densub::{
    generate_selectors, load_graph, AttributedGraph, Hooks, LoadOptions, Measure, Progress, ScoreConstants,
    SearchConfig, Selector, SelectorConfig,
};

const EXIT_INPUT: u8 = 1;
const EXIT_FIT: u8 = 2;
const EXIT_EMPTY: u8 = 3;

/// Mine subjectively interesting dense and sparse subgroup patterns in attributed graphs.
#[derive(Parser, Debug)]
#[command(name = "densub", version, args_override_self = true)]
struct Cli {
    /// File of `key = value` lines supplying defaults for the subcommand's flags.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,

    /// Worker threads for the search (all cores when unset).
    #[arg(long, global = true, env = "DENSUB_THREADS")]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Fit a background model and save it.
    Fit(FitArgs),
    /// Mine ranked patterns.
    Mine(MineArgs),
    /// Rank subgroups by objective quality measures.
    Baselines(BaselineArgs),
    /// Generate a synthetic attributed graph with planted blocks.
    Synth(SynthArgs),
    /// Time the search as the number of selectors grows.
    Bench(BenchArgs),
}

#[derive(Args, Debug)]
struct GraphArgs {
    /// Edge list, two whitespace-separated vertex labels per line.
    #[arg(long)]
    edges: PathBuf,
    /// Attribute table with a header row; the id column comes first unless `--id-col` is given.
    #[arg(long)]
    attrs: PathBuf,
    #[arg(long)]
    directed: bool,
    /// Field delimiter of the attribute table.
    #[arg(long, default_value = ",")]
    delim: char,
    #[arg(long)]
    id_col: Option<String>,
    /// Treat these attributes as nominal even if every value is numeric.
    #[arg(long, value_delimiter = ',')]
    nominal: Vec<String>,
    /// Treat these attributes as numeric.
    #[arg(long, value_delimiter = ',')]
    numeric: Vec<String>,
}

impl GraphArgs {
    fn load(&self) -> Result<AttributedGraph, Failure> {
        if !self.delim.is_ascii() {
            return Err(input(anyhow!("delimiter must be a single ASCII character")));
        }
        let opts = LoadOptions {
            directed: self.directed,
            delimiter: self.delim as u8,
            id_column: self.id_col.clone(),
            force_nominal: self.nominal.clone(),
            force_numeric: self.numeric.clone(),
        };
        let g = load_graph(&self.edges, &self.attrs, &opts).map_err(input)?;
        log::info!("loaded {} vertices, {} edges, {} attributes", g.n(), g.edge_count(), g.attributes().len());
        Ok(g)
    }
}

#[derive(Args, Debug)]
struct PriorArgs {
    /// degree | density | density:<p> | blocks:<attr>[,<attr>...][+degree]
    #[arg(long, default_value = "degree", conflicts_with = "model")]
    prior: PriorSpec,
    /// Use a previously fitted model instead of fitting one.
    #[arg(long)]
    model: Option<PathBuf>,
    /// Largest constraint residual accepted by the fit.
    #[arg(long, default_value_t = 1e-4)]
    tol: f64,
    #[arg(long, default_value_t = 500)]
    max_iter: usize,
    /// Fail instead of pinning vertices with degree 0 or n-1 at the probability bounds.
    #[arg(long)]
    strict: bool,
}

impl PriorArgs {
    fn options(&self) -> FitOptions {
        FitOptions {
            tol: self.tol,
            max_iter: self.max_iter,
            clamp_extremal: !self.strict,
        }
    }

    fn resolve(&self, g: &AttributedGraph) -> Result<BackgroundModel, Failure> {
        match &self.model {
            Some(path) => {
                let m = BackgroundModel::load(path).map_err(input)?;
                if m.n() != g.n() || m.is_directed() != g.is_directed() {
                    return Err(input(anyhow!(
                        "model {} is for {} vertices ({}), graph has {} ({})",
                        path.display(),
                        m.n(),
                        if m.is_directed() { "directed" } else { "undirected" },
                        g.n(),
                        if g.is_directed() { "directed" } else { "undirected" },
                    )));
                }
                Ok(m)
            }
            None => {
                let (m, report) = self.prior.fit(g, &self.options()).map_err(fit_failure)?;
                if let Some(r) = report {
                    log::info!("fitted {} prior in {} sweeps", self.prior, r.sweeps);
                }
                Ok(m)
            }
        }
    }
}

#[derive(Args, Debug)]
struct SearchArgs {
    /// Beam width of the single-subgroup search.
    #[arg(long)]
    width: Option<usize>,
    /// Minimum number of distinct first descriptions among bi-subgroup results.
    #[arg(long)]
    x1: Option<usize>,
    /// Inner beam width of the bi-subgroup search.
    #[arg(long)]
    x2: Option<usize>,
    /// Maximum number of selectors per description.
    #[arg(long)]
    depth: Option<usize>,
    /// Require W1 and W2 to constrain a common attribute to different values.
    #[arg(long)]
    shared_attr: bool,
    /// Require disjoint extensions in bi-subgroup patterns.
    #[arg(long)]
    disjoint: bool,
    #[arg(long)]
    min_size: Option<usize>,
    /// Equal-frequency bins per numeric attribute.
    #[arg(long, default_value_t = 6)]
    bins: usize,
    /// Description length cost per selector.
    #[arg(long)]
    alpha: Option<f64>,
    /// Fixed description length cost.
    #[arg(long)]
    beta: Option<f64>,
    /// Pair counting inside a single subgroup: ordered | unordered.
    #[arg(long)]
    single_counting: Option<PairCounting>,
    /// Pair counting between two subgroups: ordered | unordered.
    #[arg(long)]
    bi_counting: Option<PairCounting>,
}

impl SearchArgs {
    fn config(&self) -> Result<SearchConfig, Failure> {
        let d = SearchConfig::default();
        let c = ScoreConstants::default();
        let cfg = SearchConfig {
            beam_width: self.width.unwrap_or(d.beam_width),
            x1: self.x1.unwrap_or(d.x1),
            x2: self.x2.unwrap_or(d.x2),
            depth: self.depth.unwrap_or(d.depth),
            require_shared_attribute: self.shared_attr,
            require_disjoint_extensions: self.disjoint,
            min_extension_size: self.min_size.unwrap_or(d.min_extension_size),
            constants: ScoreConstants {
                alpha: self.alpha.unwrap_or(c.alpha),
                beta: self.beta.unwrap_or(c.beta),
                single_counting: self.single_counting.unwrap_or(c.single_counting),
                bi_counting: self.bi_counting.unwrap_or(c.bi_counting),
            },
        };
        cfg.validate().map_err(input)?;
        Ok(cfg)
    }

    fn selectors(&self, g: &AttributedGraph) -> Result<Vec<Selector>, Failure> {
        let s = generate_selectors(g, &SelectorConfig { numeric_bins: self.bins }).map_err(input)?;
        log::info!("{} selectors", s.len());
        Ok(s)
    }
}

#[derive(Args, Debug)]
struct FitArgs {
    #[command(flatten)]
    graph: GraphArgs,
    /// degree | density | density:<p> | blocks:<attr>[,<attr>...][+degree]
    #[arg(long, default_value = "degree")]
    prior: PriorSpec,
    #[arg(long, default_value_t = 1e-4)]
    tol: f64,
    #[arg(long, default_value_t = 500)]
    max_iter: usize,
    #[arg(long)]
    strict: bool,
    /// Model file to write.
    #[arg(long, short)]
    output: PathBuf,
}

#[derive(Args, Debug)]
struct MineArgs {
    #[command(flatten)]
    graph: GraphArgs,
    #[command(flatten)]
    prior: PriorArgs,
    #[command(flatten)]
    search: SearchArgs,
    /// single | bi | iterate:<rounds>
    #[arg(long, default_value = "bi")]
    mode: Mode,
    /// Patterns absorbed into the model after each iterate round.
    #[arg(long, default_value_t = 1)]
    absorb: usize,
    /// Write records here instead of standard output.
    #[arg(long, short)]
    output: Option<PathBuf>,
    /// Print an aligned table (instead of records when no output file is given).
    #[arg(long)]
    table: bool,
    /// After iterate mode, save the model with every absorbed pattern.
    #[arg(long)]
    save_model: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct BaselineArgs {
    #[command(flatten)]
    graph: GraphArgs,
    #[command(flatten)]
    search: SearchArgs,
    /// Measures to run (all when empty).
    #[arg(long, value_delimiter = ',')]
    measures: Vec<Measure>,
    /// Weight of the expected-edge term in the edge surplus.
    #[arg(long, default_value_t = 1.0 / 3.0)]
    surplus_alpha: f64,
    /// Rows per measure (the beam width when unset).
    #[arg(long)]
    top: Option<usize>,
    #[arg(long, short)]
    output: Option<PathBuf>,
    #[arg(long)]
    table: bool,
}

#[derive(Args, Debug)]
struct SynthArgs {
    /// JSON parameter file; the flags below override its fields.
    #[arg(long)]
    params: Option<PathBuf>,
    #[arg(long)]
    n: Option<usize>,
    /// Edge probability outside planted blocks.
    #[arg(long)]
    background: Option<f64>,
    /// Number of contiguous `group` values.
    #[arg(long)]
    groups: Option<usize>,
    /// Planted block `A:B:DENSITY` between groups A and B (A = B for a dense group). Repeatable.
    #[arg(long = "block", value_parser = parse_block)]
    blocks: Vec<PlantedBlock>,
    /// Remove the default planted block.
    #[arg(long, conflicts_with = "blocks")]
    no_blocks: bool,
    /// Number of binary tag attributes.
    #[arg(long)]
    tags: Option<usize>,
    #[arg(long)]
    tag_size: Option<usize>,
    #[arg(long)]
    tag_link: Option<f64>,
    /// Vertices with every edge removed, marked `status=isolated`.
    #[arg(long)]
    isolated: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, default_value = ".")]
    out_dir: PathBuf,
    #[arg(long, default_value = "synth")]
    prefix: String,
}

#[derive(Args, Debug)]
struct BenchArgs {
    #[command(flatten)]
    graph: GraphArgs,
    #[command(flatten)]
    prior: PriorArgs,
    #[command(flatten)]
    search: SearchArgs,
    /// Selector counts to time.
    #[arg(long, value_delimiter = ',', default_value = "50,100,200,400")]
    schedule: Vec<usize>,
    /// Runs per selector count; the fastest is kept.
    #[arg(long, default_value_t = 3)]
    reps: usize,
    /// Seed of the selector order.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// single | bi
    #[arg(long, default_value = "single", value_parser = parse_bench_mode)]
    bench_mode: BenchMode,
    #[arg(long, short)]
    output: Option<PathBuf>,
    #[arg(long)]
    table: bool,
}

fn parse_block(s: &str) -> Result<PlantedBlock, String> {
    let parts: Vec<&str> = s.split(':').collect();
    let [a, b, d] = parts.as_slice() else {
        return Err("expected A:B:DENSITY".into());
    };
    Ok(PlantedBlock {
        a: a.parse().map_err(|_| format!("bad group `{a}`"))?,
        b: b.parse().map_err(|_| format!("bad group `{b}`"))?,
        density: d.parse().map_err(|_| format!("bad density `{d}`"))?,
    })
}

fn parse_bench_mode(s: &str) -> Result<BenchMode, String> {
    match s {
        "single" => Ok(BenchMode::Single),
        "bi" => Ok(BenchMode::Bi),
        _ => Err(format!("unknown bench mode `{s}`")),
    }
}

struct Failure {
    code: u8,
    error: anyhow::Error,
}

fn input(e: impl Into<anyhow::Error>) -> Failure {
    Failure {
        code: EXIT_INPUT,
        error: e.into(),
    }
}

/// Unknown or mistyped prior attributes are input errors even when the fit reports them.
fn fit_failure(e: densub::Error) -> Failure {
    let code = match e {
        densub::Error::UnknownAttribute(_) | densub::Error::KindMismatch { .. } => EXIT_INPUT,
        _ => EXIT_FIT,
    };
    Failure { code, error: e.into() }
}

enum Outcome {
    Found,
    Empty,
}

/// Where records go: a file, or standard output.
fn sink(path: &Option<PathBuf>) -> Result<Box<dyn Write>, Failure> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).with_context(|| format!("cannot create {}", p.display())).map_err(input)?,
        )),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn emit<T: serde::Serialize>(
    records: &[T],
    output: &Option<PathBuf>,
    table: bool,
    render: impl Fn(&[T]) -> String,
) -> Result<(), Failure> {
    if output.is_some() || !table {
        let mut out = sink(output)?;
        write_jsonl(records, &mut out).map_err(input)?;
        out.flush().map_err(input)?;
    }
    if table {
        print!("{}", render(records));
    }
    Ok(())
}

fn progress_logger(p: Progress) {
    log::debug!("round {}/{}: {}/{}", p.round, p.rounds, p.done, p.total);
}

fn fit_comments(spec: &PriorSpec, report: Option<&FitReport>) -> Vec<String> {
    let mut c = vec![format!("prior {spec}")];
    if let Some(r) = report {
        c.push(format!("sweeps {}", r.sweeps));
        c.push(format!("max degree residual {:e}", r.max_degree_residual));
        c.push(format!("max block residual {:e}", r.max_block_residual));
        c.push(format!("worst constraint {}", r.worst_constraint));
        c.push(format!("saturated {}", r.saturated));
    }
    c
}

fn cmd_fit(a: &FitArgs) -> Result<Outcome, Failure> {
    let g = a.graph.load()?;
    let opts = FitOptions {
        tol: a.tol,
        max_iter: a.max_iter,
        clamp_extremal: !a.strict,
    };
    let (model, report) = a.prior.fit(&g, &opts).map_err(fit_failure)?;
    let comments = fit_comments(&a.prior, report.as_ref());
    model.save(&a.output, &comments).map_err(input)?;
    for c in &comments {
        println!("{c}");
    }
    println!("classes {}", model.class_count());
    Ok(Outcome::Found)
}

fn cmd_mine(a: &MineArgs) -> Result<Outcome, Failure> {
    let g = a.graph.load()?;
    let cfg = a.search.config()?;
    let selectors = a.search.selectors(&g)?;
    let model = a.prior.resolve(&g)?;
    let hooks = Hooks {
        progress: Some(&progress_logger),
        cancel: None,
    };
    let records: Vec<PatternRecord> = match a.mode {
        Mode::Single => {
            let found = beam_search_single_with(&g, &model, &selectors, &cfg, &hooks).map_err(input)?;
            pattern_records(&found, None)
        }
        Mode::Bi => {
            let found = nested_beam_search_with(&g, &model, &selectors, &cfg, &hooks).map_err(input)?;
            pattern_records(&found, None)
        }
        Mode::Iterate(rounds) => {
            let it = iterate_with(&g, &model, &selectors, &cfg, rounds, a.absorb, &hooks).map_err(fit_failure)?;
            if let Some(path) = &a.save_model {
                let comments = vec![format!("after {} rounds absorbing {} each", it.rounds.len(), a.absorb)];
                it.model.save(path, &comments).map_err(input)?;
            }
            it.rounds
                .iter()
                .enumerate()
                .flat_map(|(i, r)| pattern_records(r, Some(i + 1)))
                .collect()
        }
    };
    emit(&records, &a.output, a.table, pattern_table)?;
    Ok(if records.is_empty() { Outcome::Empty } else { Outcome::Found })
}

fn cmd_baselines(a: &BaselineArgs) -> Result<Outcome, Failure> {
    let g = a.graph.load()?;
    let cfg = a.search.config()?;
    let selectors = a.search.selectors(&g)?;
    let measures = if a.measures.is_empty() { Measure::ALL.to_vec() } else { a.measures.clone() };
    let top = a.top.unwrap_or(cfg.beam_width);
    let hooks = Hooks {
        progress: Some(&progress_logger),
        cancel: None,
    };
    let mut records = Vec::new();
    for m in measures {
        let hits = beam_search_measure(&g, &selectors, &cfg, m, a.surplus_alpha, &hooks).map_err(input)?;
        records.extend(
            hits.iter()
                .take(top)
                .enumerate()
                .map(|(i, h)| MeasureRecord::from_hit(m.name(), h, i + 1)),
        );
    }
    emit(&records, &a.output, a.table, measure_table)?;
    Ok(if records.is_empty() { Outcome::Empty } else { Outcome::Found })
}

fn cmd_synth(a: &SynthArgs) -> Result<Outcome, Failure> {
    let mut p: SynthParams = match &a.params {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .with_context(|| format!("cannot read {}", path.display()))
                .map_err(input)?;
            serde_json::from_str(&text)
                .with_context(|| format!("bad parameter file {}", path.display()))
                .map_err(input)?
        }
        None => SynthParams::default(),
    };
    macro_rules! set {
        ($($f:ident),*) => { $( if let Some(v) = a.$f { p.$f = v; } )* };
    }
    set!(n, background, groups, tags, tag_size, tag_link, isolated, seed);
    if a.no_blocks {
        p.blocks.clear();
    } else if !a.blocks.is_empty() {
        p.blocks = a.blocks.clone();
    }
    let manifest = write_synth(&p, &a.out_dir, &a.prefix).map_err(input)?;
    let base = a.out_dir.join(&a.prefix);
    println!("edges {}", manifest.edges);
    for b in &manifest.blocks {
        println!("block {} x {} density {} edges {}", b.description_a, b.description_b, b.density, b.edges);
    }
    println!("wrote {}.edges {}.csv {}.manifest.json", base.display(), base.display(), base.display());
    Ok(Outcome::Found)
}

fn cmd_bench(a: &BenchArgs, threads: Option<usize>) -> Result<Outcome, Failure> {
    let g = a.graph.load()?;
    let cfg = a.search.config()?;
    let selectors = shuffled(&a.search.selectors(&g)?, a.seed);
    let model = a.prior.resolve(&g)?;
    let rows = bench(
        &g,
        &model,
        &selectors,
        &a.schedule,
        &cfg,
        a.bench_mode,
        a.reps,
        threads.unwrap_or(1),
    )
    .map_err(input)?;
    emit(&rows, &a.output, a.table, |rows| {
        let mut s = String::from("selectors  seconds     ratio  patterns\n");
        for r in rows {
            let ratio = r.ratio.map_or("-".to_string(), |x| format!("{x:.3}"));
            s.push_str(&format!("{:<9}  {:<10.6}  {:<5}  {}\n", r.selectors, r.seconds, ratio, r.patterns));
        }
        s
    })?;
    Ok(Outcome::Found)
}

/// Splice `--config` entries into the argument list right after the
/// subcommand, so that flags given on the command line win.
fn expand_config(args: Vec<String>) -> Result<Vec<String>, Failure> {
    let mut path = None;
    for (i, a) in args.iter().enumerate() {
        if a == "--config" {
            path = args.get(i + 1).cloned();
        } else if let Some(p) = a.strip_prefix("--config=") {
            path = Some(p.to_string());
        }
    }
    let Some(path) = path else { return Ok(args) };
    let text = std::fs::read_to_string(&path)
        .with_context(|| format!("cannot read config {path}"))
        .map_err(input)?;
    let entries = parse_config(&text).map_err(input)?;
    let Some(pos) = args.iter().skip(1).position(|a| !a.starts_with('-')).map(|p| p + 1) else {
        return Ok(args);
    };
    let root = Cli::command();
    let Some(sub) = root.find_subcommand(&args[pos]) else {
        return Ok(args);
    };
    let mut extra = Vec::new();
    for (key, value) in entries {
        let arg = sub
            .get_arguments()
            .chain(root.get_arguments())
            .find(|a| a.get_long() == Some(key.as_str()))
            .ok_or_else(|| input(anyhow!("{path}: unknown key `{key}` for `{}`", args[pos])))?;
        if key == "config" {
            continue;
        }
        if arg.get_action().takes_values() {
            extra.push(format!("--{key}"));
            extra.push(value);
        } else {
            match value.as_str() {
                "true" | "yes" | "1" => extra.push(format!("--{key}")),
                "false" | "no" | "0" => {}
                _ => return Err(input(anyhow!("{path}: `{key}` expects true or false"))),
            }
        }
    }
    let mut out = args[..=pos].to_vec();
    out.extend(extra);
    out.extend_from_slice(&args[pos + 1..]);
    Ok(out)
}

fn run() -> Result<Outcome, Failure> {
    let args = expand_config(std::env::args().collect())?;
    let cli = match Cli::try_parse_from(&args) {
        Ok(c) => c,
        Err(e) if e.use_stderr() => {
            let _ = e.print();
            return Err(Failure {
                code: EXIT_INPUT,
                error: anyhow!("invalid arguments"),
            });
        }
        Err(e) => {
            let _ = e.print();
            std::process::exit(0);
        }
    };
    if let Some(t) = cli.threads {
        if !matches!(cli.command, Command::Bench(_)) {
            rayon::ThreadPoolBuilder::new()
                .num_threads(t)
                .build_global()
                .map_err(input)?;
        }
    }
    match &cli.command {
        Command::Fit(a) => cmd_fit(a),
        Command::Mine(a) => cmd_mine(a),
        Command::Baselines(a) => cmd_baselines(a),
        Command::Synth(a) => cmd_synth(a),
        Command::Bench(a) => cmd_bench(a, cli.threads),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run() {
        Ok(Outcome::Found) => ExitCode::SUCCESS,
        Ok(Outcome::Empty) => {
            eprintln!("no patterns found");
            ExitCode::from(EXIT_EMPTY)
        }
        Err(f) => {
            if f.error.to_string() != "invalid arguments" {
                let mut msg = f.error.to_string();
                for cause in f.error.chain().skip(1) {
                    let c = cause.to_string();
                    if !msg.contains(&c) {
                        msg = format!("{msg}: {c}");
                    }
                }
                eprintln!("error: {msg}");
            }
            ExitCode::from(f.code)
        }
    }
}
