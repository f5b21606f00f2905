use super::{BenchError, BenchmarkResult, ConvergencePair, SplitSummary};
use crate::bench::{validate_energy_bias, validate_gaps};
use crate::solver::ScfTrace;
use serde::{Deserialize, Serialize};
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

const PAIRS_HEADER: [&str; 13] = [
    "structure_id",
    "split",
    "s_auc",
    "iter_savings_pct",
    "baseline_iters",
    "learned_iters",
    "e_rel_diff",
    "gap_diff",
    "flags",
    "mae",
    "baseline_gap",
    "learned_gap",
    "floored_points",
];

/// One row of `pairs.csv`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairRecord {
    pub structure_id: String,
    pub split: String,
    pub s_auc: f64,
    pub iter_savings_pct: Option<f64>,
    pub baseline_iters: usize,
    pub learned_iters: usize,
    pub e_rel_diff: Option<f64>,
    pub gap_diff: Option<f64>,
    pub flags: String,
    pub mae: f64,
    pub baseline_gap: Option<f64>,
    pub learned_gap: Option<f64>,
    pub floored_points: usize,
}

impl From<&ConvergencePair> for PairRecord {
    fn from(p: &ConvergencePair) -> Self {
        PairRecord {
            structure_id: p.structure_id.clone(),
            split: p.split.clone(),
            s_auc: p.s_auc,
            iter_savings_pct: p.iter_savings_pct,
            baseline_iters: p.baseline.len(),
            learned_iters: p.learned.len(),
            e_rel_diff: p.energy_rel_diff(),
            gap_diff: p.gap_diff(),
            flags: p.flags(),
            mae: p.mae,
            baseline_gap: p.baseline_gap,
            learned_gap: p.learned_gap,
            floored_points: p.floored_points,
        }
    }
}

fn num(v: f64) -> String {
    format!("{v:.16e}")
}

fn opt(v: Option<f64>) -> String {
    v.map(num).unwrap_or_default()
}

fn csv_err(e: impl std::fmt::Display) -> BenchError {
    BenchError::Format(e.to_string())
}

pub fn write_pairs_csv(path: &Path, pairs: &[ConvergencePair]) -> Result<(), BenchError> {
    let mut w = csv::Writer::from_path(path).map_err(csv_err)?;
    w.write_record(PAIRS_HEADER).map_err(csv_err)?;
    for p in pairs.iter().map(PairRecord::from) {
        w.write_record([
            p.structure_id,
            p.split,
            num(p.s_auc),
            opt(p.iter_savings_pct),
            p.baseline_iters.to_string(),
            p.learned_iters.to_string(),
            opt(p.e_rel_diff),
            opt(p.gap_diff),
            p.flags,
            num(p.mae),
            opt(p.baseline_gap),
            opt(p.learned_gap),
            p.floored_points.to_string(),
        ])
        .map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_pairs_csv(path: &Path) -> Result<Vec<PairRecord>, BenchError> {
    let mut r = csv::Reader::from_path(path).map_err(csv_err)?;
    if r.headers().map_err(csv_err)? != PAIRS_HEADER.as_slice() {
        return Err(BenchError::Format(format!("{}: unexpected header", path.display())));
    }
    let mut out = Vec::new();
    for (line, rec) in r.records().enumerate() {
        let rec = rec.map_err(csv_err)?;
        let bad = |col: &str| BenchError::Format(format!("pairs.csv row {}: bad {col}", line + 1));
        let f = |i: usize| rec[i].parse::<f64>().map_err(|_| bad(PAIRS_HEADER[i]));
        let o = |i: usize| {
            if rec[i].is_empty() {
                Ok(None)
            } else {
                f(i).map(Some)
            }
        };
        let u = |i: usize| rec[i].parse::<usize>().map_err(|_| bad(PAIRS_HEADER[i]));
        out.push(PairRecord {
            structure_id: rec[0].to_string(),
            split: rec[1].to_string(),
            s_auc: f(2)?,
            iter_savings_pct: o(3)?,
            baseline_iters: u(4)?,
            learned_iters: u(5)?,
            e_rel_diff: o(6)?,
            gap_diff: o(7)?,
            flags: rec[8].to_string(),
            mae: f(9)?,
            baseline_gap: o(10)?,
            learned_gap: o(11)?,
            floored_points: u(12)?,
        });
    }
    Ok(out)
}

/// One row per split: s-AUC statistics followed by iteration-savings ones.
pub fn write_summary_csv(path: &Path, summaries: &[SplitSummary]) -> Result<(), BenchError> {
    let mut w = csv::Writer::from_path(path).map_err(csv_err)?;
    w.write_record([
        "split",
        "n",
        "n_plus",
        "pct_positive",
        "mean",
        "median",
        "max",
        "min",
        "savings_n",
        "savings_n_plus",
        "savings_mean_pct",
        "savings_median_pct",
        "savings_max_pct",
        "savings_min_pct",
    ])
    .map_err(csv_err)?;
    for s in summaries {
        let (a, b) = (&s.s_auc, &s.savings);
        w.write_record([
            a.split.clone(),
            a.n.to_string(),
            a.n_plus.to_string(),
            num(a.pct_positive),
            num(a.mean),
            num(a.median),
            num(a.max),
            num(a.min),
            b.n.to_string(),
            b.n_plus.to_string(),
            num(b.mean),
            num(b.median),
            num(b.max),
            num(b.min),
        ])
        .map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

/// `run_s{seed}_{first 12 hex digits of the model hash}`.
pub fn run_dir_name(suite_seed: u64, model_hash: &str) -> String {
    format!("run_s{suite_seed}_{}", &model_hash[..model_hash.len().min(12)])
}

/// Log-accuracy convergence curves of both initializations.
fn curve_svg(id: &str, baseline: &ScfTrace, learned: &ScfTrace) -> String {
    let (w, h, pad) = (640.0, 400.0, 50.0);
    let logs = |t: &ScfTrace| t.accuracies.iter().map(|a| a.log10()).collect::<Vec<f64>>();
    let (lb, ll) = (logs(baseline), logs(learned));
    let all = lb.iter().chain(&ll);
    let lo = all.clone().copied().fold(f64::INFINITY, f64::min).floor();
    let hi = all.copied().fold(f64::NEG_INFINITY, f64::max).ceil().max(lo + 1.0);
    let n = lb.len().max(ll.len()).max(2) as f64;
    let x = |i: usize| pad + (w - 2.0 * pad) * i as f64 / (n - 1.0);
    let y = |v: f64| pad + (h - 2.0 * pad) * (hi - v) / (hi - lo);
    let line = |vals: &[f64]| {
        vals.iter()
            .enumerate()
            .map(|(i, &v)| format!("{:.2},{:.2}", x(i), y(v)))
            .collect::<Vec<_>>()
            .join(" ")
    };
    let mut s = String::new();
    let _ = writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}">"#);
    let _ = writeln!(s, r#"<rect width="{w}" height="{h}" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<rect x="{pad}" y="{pad}" width="{}" height="{}" fill="none" stroke="black"/>"#,
        w - 2.0 * pad,
        h - 2.0 * pad
    );
    let mut e = lo as i64;
    while e as f64 <= hi {
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="{:.2}" font-size="11" text-anchor="end">1e{e}</text>"#,
            pad - 4.0,
            y(e as f64) + 4.0
        );
        e += 1;
    }
    let _ = writeln!(s, r#"<text x="{:.2}" y="{:.2}" font-size="12" text-anchor="middle">SCF iteration</text>"#, w / 2.0, h - 15.0);
    let _ = writeln!(s, r#"<text x="{:.2}" y="30" font-size="13" text-anchor="middle">{id}</text>"#, w / 2.0);
    let _ = writeln!(s, r##"<polyline fill="none" stroke="#1f77b4" stroke-width="1.5" points="{}"/>"##, line(&lb));
    let _ = writeln!(s, r##"<polyline fill="none" stroke="#d62728" stroke-width="1.5" points="{}"/>"##, line(&ll));
    let _ = writeln!(s, r##"<text x="{:.2}" y="{:.2}" font-size="12" fill="#1f77b4">ACS</text>"##, w - pad - 80.0, pad + 18.0);
    let _ = writeln!(s, r##"<text x="{:.2}" y="{:.2}" font-size="12" fill="#d62728">learned</text>"##, w - pad - 80.0, pad + 34.0);
    s.push_str("</svg>\n");
    s
}

#[derive(Serialize)]
struct ResultsFile<'a> {
    suite_seed: u64,
    model_hash: &'a str,
    summaries: &'a [SplitSummary],
    excluded: &'a [super::ExcludedPair],
    energy_bias: super::EnergyBiasReport,
    gaps: super::GapReport,
}

/// Writes pairs.csv, summary.csv and results.json into `dir`, plus per-pair
/// traces and curves under the run subdirectory. Returns the subdirectory.
pub fn write_run(dir: &Path, result: &BenchmarkResult, suite_seed: u64, model_hash: &str) -> Result<PathBuf, BenchError> {
    let run = dir.join(run_dir_name(suite_seed, model_hash));
    fs::create_dir_all(run.join("traces"))?;
    fs::create_dir_all(run.join("curves"))?;
    write_pairs_csv(&dir.join("pairs.csv"), &result.pairs)?;
    write_summary_csv(&dir.join("summary.csv"), &result.summaries)?;
    for p in &result.pairs {
        fs::write(run.join("traces").join(format!("{}_baseline.csv", p.structure_id)), p.baseline.to_csv())?;
        fs::write(run.join("traces").join(format!("{}_learned.csv", p.structure_id)), p.learned.to_csv())?;
        fs::write(run.join("curves").join(format!("{}.svg", p.structure_id)), curve_svg(&p.structure_id, &p.baseline, &p.learned))?;
    }
    let results = ResultsFile {
        suite_seed,
        model_hash,
        summaries: &result.summaries,
        excluded: &result.excluded,
        energy_bias: validate_energy_bias(&result.pairs),
        gaps: validate_gaps(&result.pairs),
    };
    fs::write(dir.join("results.json"), serde_json::to_string_pretty(&results).map_err(csv_err)?)?;
    Ok(run)
}
