//! Benchmark maps, reference fixtures and the batch experiment protocol.

pub mod experiment;
pub mod fixture;
pub mod generate;
pub mod oracle;
pub mod summary;

pub use experiment::{
    checked_optimality_gap, optimality_gap, run_experiment, run_on_map, sample_queries, write_jsonl, ExperimentConfig,
    ExperimentRecord, MapInstance, PreparedMap, RunStatus,
};
pub use fixture::{lemma1_fixture, FixtureGraph};
pub use generate::{gen_boxes, gen_hills, MapKind, BOXES_MAX_STEP};
pub use oracle::{brute_force_min_exposure, EnumerationLimits};
pub use summary::{median, quartiles, summarize, write_summary_csv, SummaryRow};
