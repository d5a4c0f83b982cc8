pub mod background;
pub mod bench;
pub mod config;
pub mod description;
pub mod error;
pub mod graph;
mod math;
pub mod report;
pub mod score;
pub mod search;
pub mod synth;

pub use background::{
    fit_block_prior, fit_degree_prior, fit_density_prior, Absorbed, BackgroundModel, FitOptions, FitReport,
    PairCounting, PairStats, PatternUpdate, Prior,
};
pub use description::{generate_selectors, Condition, Description, Selector, SelectorConfig};
pub use config::{parse_config, Mode, PriorSpec};
pub use error::{Error, Result};
pub use score::{
    baseline_scores, description_length, exact_tail_probability, information_content, kl_bernoulli, n_w_bi, n_w_single,
    score_bi, score_descriptions, score_single, Direction, Measure, Pattern, ScoreConstants, Tail,
};
pub use graph::{load_graph, write_graph, AttributeColumn, AttributeKind, AttributedGraph, LoadOptions, VertexId, VertexSet};
pub use search::{
    beam_search_measure, beam_search_single, iterate, nested_beam_search, Beam, Entry, Hooks, Iteration, MeasureHit,
    Progress, SearchConfig,
};
