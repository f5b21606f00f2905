use super::{iteration_savings, s_auc, BenchError, SavingsSummary, Split, SuiteStructure};
use crate::initdens::{acs_density, ingest_predicted_density, AtomicDensityTable, PREDICTION_FLOOR};
use crate::predictor::{evaluate_mae, predict_grid, PredictorModel};
use crate::solver::{band_gap, run_scf_with, ScfTrace, SolverParams, SolverSetup};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// One structure solved from both initializations with identical parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergencePair {
    pub structure_id: String,
    pub split: String,
    pub baseline: ScfTrace,
    pub learned: ScfTrace,
    pub s_auc: f64,
    pub iter_savings_pct: Option<f64>,
    pub baseline_gap: Option<f64>,
    pub learned_gap: Option<f64>,
    /// Mean |raw prediction − baseline converged density|.
    pub mae: f64,
    /// Grid points the ingest step raised to the floor.
    pub floored_points: usize,
}

impl ConvergencePair {
    pub fn both_converged(&self) -> bool {
        self.baseline.converged && self.learned.converged
    }

    pub fn energy_rel_diff(&self) -> Option<f64> {
        self.both_converged().then(|| {
            let (b, l) = (self.baseline.final_energy, self.learned.final_energy);
            (l - b).abs() / b.abs()
        })
    }

    pub fn gap_diff(&self) -> Option<f64> {
        match (self.baseline_gap, self.learned_gap) {
            (Some(b), Some(l)) if self.both_converged() => Some((l - b).abs()),
            _ => None,
        }
    }

    pub fn flags(&self) -> String {
        let mut f = Vec::new();
        if !self.baseline.converged {
            f.push("baseline_unconverged".to_string());
        }
        if !self.learned.converged {
            f.push("learned_unconverged".to_string());
        }
        if self.floored_points > 0 {
            f.push(format!("floored={}", self.floored_points));
        }
        if self.baseline_gap.is_none() || self.learned_gap.is_none() {
            f.push("no_gap".to_string());
        }
        f.join(";")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExcludedPair {
    pub structure_id: String,
    pub split: String,
    pub reason: String,
}

/// s-AUC and iteration-savings statistics of one split.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitSummary {
    pub s_auc: SavingsSummary,
    pub savings: SavingsSummary,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkResult {
    pub pairs: Vec<ConvergencePair>,
    pub excluded: Vec<ExcludedPair>,
    pub summaries: Vec<SplitSummary>,
}

impl BenchmarkResult {
    pub fn summary(&self, split: Split) -> Option<&SplitSummary> {
        self.summaries.iter().find(|s| s.s_auc.split == split.name())
    }
}

/// Rayon pool capped by `RHOBENCH_THREADS` (default: all cores).
pub fn worker_pool() -> rayon::ThreadPool {
    let threads = std::env::var("RHOBENCH_THREADS")
        .ok()
        .and_then(|v| v.parse::<usize>().ok())
        .filter(|&n| n > 0)
        .unwrap_or(0);
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .expect("thread pool builds")
}

fn run_pair(
    s: &SuiteStructure,
    model: &PredictorModel,
    table: &AtomicDensityTable,
    params: &SolverParams,
) -> Result<ConvergencePair, String> {
    let structure = &s.structure;
    let setup = SolverSetup::new(structure, params).map_err(|e| e.to_string())?;
    let grid = setup.grid();
    let acs = acs_density(structure, table, grid).map_err(|e| format!("acs: {e}"))?;
    let raw = predict_grid(structure, model, grid).map_err(|e| format!("predict: {e}"))?;
    let init = ingest_predicted_density(&raw, structure, grid).map_err(|e| format!("ingest: {e}"))?;
    let floored_points = init.values().iter().filter(|&&v| v == PREDICTION_FLOOR).count();
    let base = run_scf_with(&setup, &acs).map_err(|e| format!("baseline scf: {e}"))?;
    let learned = run_scf_with(&setup, &init).map_err(|e| format!("learned scf: {e}"))?;
    let sauc = s_auc(&base.trace.accuracies, &learned.trace.accuracies).map_err(|e| e.to_string())?;
    let mae = evaluate_mae(&raw, &base.density).map_err(|e| e.to_string())?;
    Ok(ConvergencePair {
        structure_id: s.id.clone(),
        split: s.split.name().to_string(),
        s_auc: sauc,
        iter_savings_pct: iteration_savings(&base.trace, &learned.trace),
        baseline_gap: band_gap(&base.orbitals).ok(),
        learned_gap: band_gap(&learned.orbitals).ok(),
        baseline: base.trace,
        learned: learned.trace,
        mae,
        floored_points,
    })
}

/// Runs every structure from ACS and from the ingested prediction, in
/// parallel, then summarizes per split in input order.
pub fn run_benchmark(
    structures: &[&SuiteStructure],
    model: &PredictorModel,
    table: &AtomicDensityTable,
    params: &SolverParams,
) -> Result<BenchmarkResult, BenchError> {
    params.validate().map_err(|e| BenchError::Suite(e.to_string()))?;
    let outcomes: Vec<_> = structures
        .par_iter()
        .map(|s| (s, run_pair(s, model, table, params)))
        .collect();
    let mut pairs = Vec::new();
    let mut excluded = Vec::new();
    for (s, outcome) in outcomes {
        match outcome {
            Ok(p) => pairs.push(p),
            Err(reason) => {
                log::warn!("excluding {}: {reason}", s.id);
                excluded.push(ExcludedPair {
                    structure_id: s.id.clone(),
                    split: s.split.name().to_string(),
                    reason,
                });
            }
        }
    }
    let mut splits: Vec<Split> = structures.iter().map(|s| s.split).collect();
    splits.sort();
    splits.dedup();
    let summaries = splits
        .into_iter()
        .map(|split| summarize(split.name(), &pairs))
        .collect();
    Ok(BenchmarkResult {
        pairs,
        excluded,
        summaries,
    })
}

pub(crate) fn summarize(split: &str, pairs: &[ConvergencePair]) -> SplitSummary {
    let mine: Vec<&ConvergencePair> = pairs.iter().filter(|p| p.split == split).collect();
    let saucs: Vec<f64> = mine.iter().map(|p| p.s_auc).collect();
    let savings: Vec<f64> = mine.iter().filter_map(|p| p.iter_savings_pct).collect();
    SplitSummary {
        s_auc: SavingsSummary::from_values(split, &saucs),
        savings: SavingsSummary::from_values(split, &savings),
    }
}
