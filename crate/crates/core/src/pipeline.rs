//! File-level pipeline stages behind the `rhobench` command line.
//!
//! A data directory written by [`gen`] holds `suite.json`, `structures/`,
//! ground-truth `densities/` (RHO1) and `traces/`, and the atomic `tables/`.

use crate::bench::{
    read_pairs_csv, run_benchmark, run_dir_name, write_run, worker_pool, BenchmarkResult, Split, SplitSuite, SuiteCounts,
    SuiteStructure,
};
use crate::crystal::{Grid, Species, Structure};
use crate::densio::{decode_reciprocal, encode_reciprocal, project_density, read_realspace, read_reciprocal_native, write_projection, write_realspace};
use crate::initdens::{acs_density, ingest_predicted_density, AtomicDensityTable};
use crate::predictor::{fit, predict_grid, sample_dataset, sample_manifest_hash, DescriptorSpec, PredictorModel, TrainingItem};
use crate::solver::{band_gap, run_scf_with, ScfTrace, SolverParams, SolverSetup};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::fs;
use std::path::{Path, PathBuf};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("missing input {}", .0.display())]
    MissingInput(PathBuf),
    #[error("{stage}: {message}")]
    Failed { stage: &'static str, message: String },
}

impl PipelineError {
    /// Missing inputs are usage errors; everything else is a stage failure.
    pub fn is_usage(&self) -> bool {
        matches!(self, PipelineError::MissingInput(_))
    }
}

fn stage<E: std::fmt::Display>(stage: &'static str) -> impl Fn(E) -> PipelineError {
    move |e| PipelineError::Failed {
        stage,
        message: e.to_string(),
    }
}

fn require(path: &Path) -> Result<(), PipelineError> {
    if path.exists() {
        Ok(())
    } else {
        Err(PipelineError::MissingInput(path.to_path_buf()))
    }
}

fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CountsFile {
    pub train_binary: usize,
    pub val_binary: usize,
    pub test_binary: usize,
    pub test_ternary: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StructureEntry {
    pub id: String,
    pub split: String,
    pub motif: String,
    pub converged: bool,
    pub iterations: usize,
    pub final_energy: f64,
    pub gap: Option<f64>,
}

/// `suite.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteManifest {
    pub pool_size: usize,
    pub seed: u64,
    pub counts: CountsFile,
    pub params: SolverParams,
    pub species: Vec<Species>,
    pub structures: Vec<StructureEntry>,
}

/// Solver settings used by the shipped pipeline: the library defaults with
/// a tighter threshold so that converged band gaps agree to 1e-6 Ha.
pub fn pipeline_params() -> SolverParams {
    SolverParams {
        conv_thr: 1e-11,
        ..SolverParams::default()
    }
}

pub fn structure_path(data: &Path, id: &str) -> PathBuf {
    data.join("structures").join(format!("{id}.json"))
}

pub fn density_path(data: &Path, id: &str) -> PathBuf {
    data.join("densities").join(format!("{id}.rho"))
}

/// Builds the suite, the atomic tables and every ground-truth SCF (started
/// from ACS), and writes them under `out`.
pub fn gen(out: &Path, pool_size: usize, seed: u64, params: &SolverParams) -> Result<SuiteManifest, PipelineError> {
    let counts = SuiteCounts::default_for(pool_size);
    let suite = crate::bench::generate_suite(pool_size, counts, seed).map_err(stage("gen"))?;
    for sub in ["structures", "densities", "traces", "tables"] {
        fs::create_dir_all(out.join(sub)).map_err(stage("gen"))?;
    }
    let pool = worker_pool();
    let table = pool
        .install(|| AtomicDensityTable::build(&suite.pool, params))
        .map_err(stage("tables"))?;
    table.write_dir(&out.join("tables")).map_err(stage("tables"))?;
    let solved: Vec<Result<StructureEntry, PipelineError>> = pool.install(|| {
        suite
            .structures
            .par_iter()
            .map(|s| solve_ground_truth(out, s, &table, params))
            .collect()
    });
    let structures = solved.into_iter().collect::<Result<Vec<_>, _>>()?;
    let manifest = SuiteManifest {
        pool_size,
        seed,
        counts: CountsFile {
            train_binary: counts.train_binary,
            val_binary: counts.val_binary,
            test_binary: counts.test_binary,
            test_ternary: counts.test_ternary,
        },
        params: *params,
        species: suite.pool.clone(),
        structures,
    };
    let text = serde_json::to_string_pretty(&manifest).map_err(stage("gen"))?;
    fs::write(out.join("suite.json"), text).map_err(stage("gen"))?;
    Ok(manifest)
}

fn solve_ground_truth(
    out: &Path,
    s: &SuiteStructure,
    table: &AtomicDensityTable,
    params: &SolverParams,
) -> Result<StructureEntry, PipelineError> {
    let st = &s.structure;
    let setup = SolverSetup::new(st, params).map_err(stage("ground truth"))?;
    let init = acs_density(st, table, setup.grid()).map_err(stage("ground truth"))?;
    let outcome = run_scf_with(&setup, &init).map_err(stage("ground truth"))?;
    if !outcome.trace.converged {
        log::warn!("{} did not converge in {} iterations", s.id, outcome.trace.len());
    }
    fs::write(structure_path(out, &s.id), st.to_json()).map_err(stage("gen"))?;
    let bytes = encode_reciprocal(&outcome.density, params.ecutrho).map_err(stage("gen"))?;
    fs::write(density_path(out, &s.id), bytes).map_err(stage("gen"))?;
    fs::write(out.join("traces").join(format!("{}.csv", s.id)), outcome.trace.to_csv()).map_err(stage("gen"))?;
    Ok(StructureEntry {
        id: s.id.clone(),
        split: s.split.name().to_string(),
        motif: s.motif.to_string(),
        converged: outcome.trace.converged,
        iterations: outcome.trace.len(),
        final_energy: outcome.trace.final_energy,
        gap: band_gap(&outcome.orbitals).ok(),
    })
}

/// A data directory loaded back into memory.
#[derive(Debug, Clone)]
pub struct Dataset {
    pub root: PathBuf,
    pub manifest: SuiteManifest,
    pub suite: SplitSuite,
}

impl Dataset {
    pub fn entry(&self, id: &str) -> Option<&StructureEntry> {
        self.manifest.structures.iter().find(|e| e.id == id)
    }

    pub fn table(&self) -> Result<AtomicDensityTable, PipelineError> {
        AtomicDensityTable::read_dir(&self.root.join("tables")).map_err(stage("tables"))
    }

    /// Ground-truth density of `id` on its solver grid.
    pub fn density(&self, id: &str) -> Result<crate::crystal::DensityField, PipelineError> {
        let s = self.suite.get(id).ok_or_else(|| PipelineError::Failed {
            stage: "data",
            message: format!("unknown structure {id}"),
        })?;
        let grid = Grid::for_cutoff(s.structure.cell(), self.manifest.params.ecutrho);
        let bytes = fs::read(density_path(&self.root, id)).map_err(stage("data"))?;
        decode_reciprocal(&bytes, &grid).map_err(stage("data"))
    }
}

fn motif_name(m: &str) -> &'static str {
    match m {
        "sc" => "sc",
        "bcc" => "bcc",
        "cscl" => "cscl",
        "rocksalt" => "rocksalt",
        "fcc_abx2" => "fcc_abx2",
        _ => "unknown",
    }
}

pub fn load_dataset(data: &Path) -> Result<Dataset, PipelineError> {
    let manifest_path = data.join("suite.json");
    require(&manifest_path)?;
    let text = fs::read_to_string(&manifest_path).map_err(stage("data"))?;
    let manifest: SuiteManifest = serde_json::from_str(&text).map_err(stage("data"))?;
    let mut structures = Vec::new();
    for e in &manifest.structures {
        let split = Split::parse(&e.split).ok_or_else(|| PipelineError::Failed {
            stage: "data",
            message: format!("unknown split {}", e.split),
        })?;
        let path = structure_path(data, &e.id);
        require(&path)?;
        let structure = Structure::from_json(&fs::read_to_string(&path).map_err(stage("data"))?).map_err(stage("data"))?;
        structures.push(SuiteStructure {
            id: e.id.clone(),
            split,
            motif: motif_name(&e.motif),
            structure,
        });
    }
    let suite = SplitSuite {
        pool: manifest.species.clone(),
        structures,
        seed: manifest.seed,
    };
    suite.check_disjoint().map_err(stage("data"))?;
    Ok(Dataset {
        root: data.to_path_buf(),
        manifest,
        suite,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrainConfig {
    pub r_cut: f64,
    pub n_radial: usize,
    pub ridge_lambda: f64,
    pub n_per_structure: usize,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            r_cut: 6.0,
            n_radial: 24,
            ridge_lambda: 1e-6,
            n_per_structure: 4096,
            seed: 42,
        }
    }
}

/// Fits the predictor on the converged training structures and writes the
/// model JSON to `out`.
pub fn train(data: &Path, out: &Path, cfg: &TrainConfig) -> Result<PredictorModel, PipelineError> {
    let ds = load_dataset(data)?;
    let items = ds
        .suite
        .structures
        .iter()
        .filter(|s| s.split.is_train() && ds.entry(&s.id).is_some_and(|e| e.converged))
        .map(|s| {
            Ok(TrainingItem {
                id: s.id.clone(),
                structure: s.structure.clone(),
                density: ds.density(&s.id)?,
            })
        })
        .collect::<Result<Vec<_>, PipelineError>>()?;
    let spec = DescriptorSpec::with_basis(ds.suite.pool.iter().map(|s| s.id).collect(), cfg.r_cut, cfg.n_radial);
    spec.validate().map_err(stage("train"))?;
    let samples = worker_pool().install(|| sample_dataset(&items, &spec, cfg.n_per_structure, cfg.seed));
    let mut model = fit(&samples, &spec, cfg.ridge_lambda).map_err(stage("train"))?;
    model.sample_hash = sample_manifest_hash(&items, &samples);
    if let Some(dir) = out.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(stage("train"))?;
    }
    fs::write(out, model.to_json()).map_err(stage("train"))?;
    Ok(model)
}

pub fn load_model(path: &Path) -> Result<(PredictorModel, String), PipelineError> {
    require(path)?;
    let bytes = fs::read(path).map_err(stage("model"))?;
    let text = String::from_utf8(bytes.clone()).map_err(stage("model"))?;
    let model = PredictorModel::from_json(&text).map_err(stage("model"))?;
    Ok((model, sha256_hex(&bytes)))
}

/// Writes the ingested (solver-ready) predicted density of the structure in
/// `structure` as RHR1.
pub fn predict(model: &Path, structure: &Path, out: &Path, ecutrho: f64) -> Result<(), PipelineError> {
    let (model, _) = load_model(model)?;
    require(structure)?;
    let text = fs::read_to_string(structure).map_err(stage("predict"))?;
    let st = Structure::from_json(&text).map_err(stage("predict"))?;
    let grid = Grid::for_cutoff(st.cell(), ecutrho);
    let raw = worker_pool().install(|| predict_grid(&st, &model, &grid)).map_err(stage("predict"))?;
    let rho = ingest_predicted_density(&raw, &st, &grid).map_err(stage("predict"))?;
    write_realspace(&rho, out).map_err(stage("predict"))?;
    Ok(())
}

/// Benchmarks every held-out structure and writes the run under `out`.
pub fn bench(data: &Path, model: &Path, out: &Path) -> Result<BenchmarkResult, PipelineError> {
    let ds = load_dataset(data)?;
    let (model, hash) = load_model(model)?;
    let table = ds.table()?;
    let held: Vec<&SuiteStructure> = ds.suite.structures.iter().filter(|s| !s.split.is_train()).collect();
    let result = worker_pool()
        .install(|| run_benchmark(&held, &model, &table, &ds.manifest.params))
        .map_err(stage("bench"))?;
    fs::create_dir_all(out).map_err(stage("bench"))?;
    write_run(out, &result, ds.manifest.seed, &hash).map_err(stage("bench"))?;
    Ok(result)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoundTripCheck {
    pub structure_id: String,
    pub byte_identical: bool,
    /// Iterations to reconverge; `None` if the restart did not converge.
    pub restart_iterations: Option<usize>,
    pub restart_energy_rel_diff: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub pairs: usize,
    pub energy_checked: usize,
    pub energy_max_rel_diff: f64,
    pub energy_share_zero: f64,
    pub gap_checked: usize,
    pub gap_max_diff: f64,
    pub gap_mean_diff: f64,
    pub traces_round_trip: bool,
    pub splits: Vec<String>,
    pub round_trips: Vec<RoundTripCheck>,
    /// Benchmarked structures whose ground truth never converged.
    pub round_trips_skipped: usize,
    pub passed: bool,
}

pub const ENERGY_TOLERANCE: f64 = 1e-8;
pub const GAP_TOLERANCE: f64 = 1e-6;
pub const RESTART_MAX_ITERATIONS: usize = 2;
pub const RESTART_ENERGY_TOLERANCE: f64 = 1e-10;

fn find_run_subdir(run: &Path) -> Result<PathBuf, PipelineError> {
    let mut found = Vec::new();
    for entry in fs::read_dir(run).map_err(stage("validate"))? {
        let entry = entry.map_err(stage("validate"))?;
        if entry.file_type().map_err(stage("validate"))?.is_dir() && entry.file_name().to_string_lossy().starts_with("run_s") {
            found.push(entry.path());
        }
    }
    match found.len() {
        1 => Ok(found.remove(0)),
        n => Err(PipelineError::Failed {
            stage: "validate",
            message: format!("expected one run_s* directory in {}, found {n}", run.display()),
        }),
    }
}

/// Restarts SCF from the codec round trip of the ground-truth density of `id`.
pub fn restart_check(ds: &Dataset, id: &str) -> Result<RoundTripCheck, PipelineError> {
    let s = ds.suite.get(id).ok_or_else(|| PipelineError::Failed {
        stage: "validate",
        message: format!("unknown structure {id}"),
    })?;
    let params = ds.manifest.params;
    let bytes = fs::read(density_path(&ds.root, id)).map_err(stage("validate"))?;
    let grid = Grid::for_cutoff(s.structure.cell(), params.ecutrho);
    let rho = decode_reciprocal(&bytes, &grid).map_err(stage("validate"))?;
    let again = encode_reciprocal(&rho, params.ecutrho).map_err(stage("validate"))?;
    let setup = SolverSetup::new(&s.structure, &params).map_err(stage("validate"))?;
    let out = run_scf_with(&setup, &rho).map_err(stage("validate"))?;
    let reference = ds.entry(id).map_or(f64::NAN, |e| e.final_energy);
    Ok(RoundTripCheck {
        structure_id: id.to_string(),
        byte_identical: again == bytes,
        restart_iterations: out.trace.iterations_to_converge,
        restart_energy_rel_diff: (out.trace.final_energy - reference).abs() / reference.abs(),
    })
}

/// Re-derives the energy-bias and gap checks from a run directory and, with
/// `data`, exercises the codec round trip and restart for every benchmarked
/// structure whose ground truth converged. Writes `validation.json` into `run`.
pub fn validate(run: &Path, data: Option<&Path>) -> Result<ValidationReport, PipelineError> {
    let pairs_path = run.join("pairs.csv");
    require(&pairs_path)?;
    let records = read_pairs_csv(&pairs_path).map_err(stage("validate"))?;
    let sub = find_run_subdir(run)?;
    let mut energy = Vec::new();
    let mut traces_ok = true;
    for r in &records {
        let load = |side: &str| -> Result<ScfTrace, PipelineError> {
            let path = sub.join("traces").join(format!("{}_{side}.csv", r.structure_id));
            require(&path)?;
            let text = fs::read_to_string(&path).map_err(stage("validate"))?;
            ScfTrace::from_csv(&text, pipeline_params().conv_thr).map_err(stage("validate"))
        };
        let (b, l) = (load("baseline")?, load("learned")?);
        for (t, side) in [(&b, "baseline"), (&l, "learned")] {
            let path = sub.join("traces").join(format!("{}_{side}.csv", r.structure_id));
            traces_ok &= fs::read_to_string(&path).map_err(stage("validate"))? == t.to_csv();
        }
        if r.e_rel_diff.is_some() {
            energy.push((l.final_energy - b.final_energy).abs() / b.final_energy.abs());
        }
    }
    let gaps: Vec<f64> = records.iter().filter_map(|r| r.gap_diff).collect();
    let mut round_trips_skipped = 0;
    let round_trips = match data {
        Some(d) => {
            let ds = load_dataset(d)?;
            let ids: Vec<&str> = records
                .iter()
                .map(|r| r.structure_id.as_str())
                .filter(|id| ds.entry(id).is_some_and(|e| e.converged))
                .collect();
            round_trips_skipped = records.len() - ids.len();
            worker_pool().install(|| ids.par_iter().map(|id| restart_check(&ds, id)).collect::<Result<Vec<_>, _>>())?
        }
        None => Vec::new(),
    };
    let mut splits: Vec<String> = records.iter().map(|r| r.split.clone()).collect();
    splits.sort();
    splits.dedup();
    let energy_max = energy.iter().copied().fold(0.0, f64::max);
    let gap_max = gaps.iter().copied().fold(0.0, f64::max);
    let passed = energy_max <= ENERGY_TOLERANCE
        && gap_max <= GAP_TOLERANCE
        && traces_ok
        && round_trips.iter().all(|c| {
            c.byte_identical
                && c.restart_iterations.is_some_and(|n| n <= RESTART_MAX_ITERATIONS)
                && c.restart_energy_rel_diff <= RESTART_ENERGY_TOLERANCE
        });
    let report = ValidationReport {
        pairs: records.len(),
        energy_checked: energy.len(),
        energy_max_rel_diff: energy_max,
        energy_share_zero: if energy.is_empty() {
            f64::NAN
        } else {
            energy.iter().filter(|&&d| d == 0.0).count() as f64 / energy.len() as f64
        },
        gap_checked: gaps.len(),
        gap_max_diff: gap_max,
        gap_mean_diff: if gaps.is_empty() { 0.0 } else { gaps.iter().sum::<f64>() / gaps.len() as f64 },
        traces_round_trip: traces_ok,
        splits,
        round_trips,
        round_trips_skipped,
        passed,
    };
    let text = serde_json::to_string_pretty(&report).map_err(stage("validate"))?;
    fs::write(run.join("validation.json"), text).map_err(stage("validate"))?;
    Ok(report)
}

/// Projects an RHO1 or RHR1 density file to `<out>.csv` and `<out>.png`.
pub fn project(density: &Path, out: &Path) -> Result<(PathBuf, PathBuf), PipelineError> {
    require(density)?;
    let magic = fs::read(density).map_err(stage("project"))?;
    let field = match magic.get(..4) {
        Some(b"RHO1") => read_reciprocal_native(density).map_err(stage("project"))?.1,
        Some(b"RHR1") => read_realspace(density).map_err(stage("project"))?,
        _ => {
            return Err(PipelineError::Failed {
                stage: "project",
                message: format!("{} is neither RHO1 nor RHR1", density.display()),
            })
        }
    };
    if let Some(dir) = out.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(stage("project"))?;
    }
    write_projection(&project_density(&field), out).map_err(stage("project"))
}

/// Name of the run subdirectory `bench` writes for this data and model.
pub fn run_subdir(data: &Path, model: &Path) -> Result<String, PipelineError> {
    let ds = load_dataset(data)?;
    let (_, hash) = load_model(model)?;
    Ok(run_dir_name(ds.manifest.seed, &hash))
}
