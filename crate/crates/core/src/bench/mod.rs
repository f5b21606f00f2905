//! Split generation, paired ACS-vs-learned SCF benchmarking and metrics.

mod metrics;
mod report;
mod runner;
mod suite;
mod validation;

pub use metrics::{iteration_savings, lower_median, s_auc, SavingsSummary};
pub use report::{read_pairs_csv, run_dir_name, write_pairs_csv, write_run, write_summary_csv, PairRecord};
pub use runner::{run_benchmark, worker_pool, BenchmarkResult, ConvergencePair, ExcludedPair, SplitSummary};
pub use suite::{generate_suite, species_pool, Split, SplitSuite, SuiteCounts, SuiteStructure, MAX_PERTURBATION};
pub use validation::{validate_energy_bias, validate_gaps, EnergyBiasReport, GapReport};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("suite: {0}")]
    Suite(String),
    #[error("metric: {0}")]
    Metric(String),
    #[error("results: {0}")]
    Format(String),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}
