//! End-to-end acceptance run: one PASS/FAIL line per criterion.
//!
//! Criteria 2, 3, 4 and 8 share two full gen/train/bench runs with the same
//! seed, written to temporary directories.

mod common;

use rand::seq::SliceRandom;
use rand::Rng;
use rhobench::bench::{s_auc, validate_energy_bias, validate_gaps, BenchmarkResult, Split};
use rhobench::crystal::{fft_inverse, Cell, DensityField, Grid, Structure, Vec3};
use rhobench::densio::{decode_reciprocal, encode_reciprocal, DensioError};
use rhobench::initdens::{acs_density, AtomicDensityTable};
use rhobench::pipeline::{self, Dataset, TrainConfig};
use rhobench::predictor::{featurize, fit, DescriptorSpec, QuerySample};
use rhobench::solver::{build_hamiltonian, hermiticity_residual, local_potential, run_scf, solve_linear_eigenproblem};
use rhobench::solver::{SolverParams, SolverSetup};
use sha2::{Digest, Sha256};
use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Instant;

const SEED: u64 = 7;
const POOL: usize = 8;

type Outcome = Result<String, String>;

fn check(cond: bool, what: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(what())
    }
}

struct Run {
    root: PathBuf,
    data: PathBuf,
    result: BenchmarkResult,
    seconds: f64,
}

fn full_run(root: &Path) -> Result<Run, String> {
    let start = Instant::now();
    let data = root.join("data");
    let model = root.join("model.json");
    pipeline::gen(&data, POOL, SEED, &pipeline::pipeline_params()).map_err(|e| e.to_string())?;
    pipeline::train(&data, &model, &TrainConfig::default()).map_err(|e| e.to_string())?;
    let result = pipeline::bench(&data, &model, &root.join("run")).map_err(|e| e.to_string())?;
    Ok(Run {
        root: root.to_path_buf(),
        data,
        result,
        seconds: start.elapsed().as_secs_f64(),
    })
}

fn ac1() -> Outcome {
    let start = Instant::now();
    let x = [1e-1, 1e-2, 1e-3];
    let s = |a: &[f64], b: &[f64]| s_auc(a, b).map_err(|e| e.to_string());
    check(s(&x, &x)? == 0.0, || "identical curves".into())?;
    let half = s(&x, &[1e-2, 1e-3, 1e-4])?;
    check((half - 0.5).abs() <= 1e-12, || format!("+0.5 case gave {half}"))?;
    let crossed = s(&[1e-1, 1e-5], &[1e-2, 1e-3])?;
    check((crossed + 0.25).abs() <= 1e-12, || format!("-0.25 case gave {crossed}"))?;
    let mut rng = common::rng(1);
    let mut worst = 0.0f64;
    for _ in 0..1000 {
        let len_x = rng.random_range(2..40);
        let len_y = rng.random_range(2..40);
        let a = common::decaying_series(&mut rng, len_x);
        let b = common::decaying_series(&mut rng, len_y);
        let ab = s(&a, &b)?;
        worst = worst.max((ab + s(&b, &a)?).abs()).max((ab - common::s_auc_base10(&a, &b)).abs());
    }
    check(worst <= 1e-12, || format!("antisymmetry/base deviation {worst:e}"))?;
    let t = start.elapsed().as_secs_f64();
    check(t < 1.0, || format!("took {t:.2}s"))?;
    Ok(format!("hand cases exact, 1000 pairs worst {worst:.1e}, {t:.3}s"))
}

fn ac2(run: &Run) -> Outcome {
    let ds = pipeline::load_dataset(&run.data).map_err(|e| e.to_string())?;
    ds.suite.check_disjoint().map_err(|e| e.to_string())?;
    let train = ds.suite.structures.iter().filter(|s| s.split.is_train()).count();
    let held_binary = ds.suite.split(Split::TestBinary).count();
    let ternary = ds.suite.split(Split::TestTernary).count();
    check(train >= 20 && held_binary >= 10 && ternary >= 10, || {
        format!("suite too small: train {train}, test binary {held_binary}, ternary {ternary}")
    })?;
    let mut parts = Vec::new();
    for split in [Split::TestBinary, Split::TestTernary] {
        let sm = run.result.summary(split).ok_or_else(|| format!("no summary for {split}"))?;
        check(sm.s_auc.pct_positive > 50.0, || {
            format!("{split}: {:.1}% positive s-AUC", sm.s_auc.pct_positive)
        })?;
        check(sm.savings.mean > 0.0, || format!("{split}: mean savings {:.2}%", sm.savings.mean))?;
        parts.push(format!(
            "{split} {}/{} positive, mean s-AUC {:.3}, mean savings {:.2}%",
            sm.s_auc.n_plus, sm.s_auc.n, sm.s_auc.mean, sm.savings.mean
        ));
    }
    check(run.seconds < 1800.0, || format!("pipeline took {:.0}s", run.seconds))?;
    parts.push(format!("pipeline {:.0}s", run.seconds));
    Ok(parts.join("; "))
}

fn ac3(run: &Run) -> Outcome {
    let ds: Dataset = pipeline::load_dataset(&run.data).map_err(|e| e.to_string())?;
    let ids: Vec<String> = ds.manifest.structures.iter().filter(|e| e.converged).map(|e| e.id.clone()).collect();
    let mut worst_iters = 0;
    let mut worst_energy = 0.0f64;
    for id in &ids {
        let c = pipeline::restart_check(&ds, id).map_err(|e| e.to_string())?;
        let n = c.restart_iterations.ok_or_else(|| format!("{id}: restart did not converge"))?;
        check(n <= 2, || format!("{id}: restart took {n} iterations"))?;
        check(c.restart_energy_rel_diff <= 1e-10, || {
            format!("{id}: restart energy off by {:e}", c.restart_energy_rel_diff)
        })?;
        worst_iters = worst_iters.max(n);
        worst_energy = worst_energy.max(c.restart_energy_rel_diff);
    }
    let skipped = ds.manifest.structures.len() - ids.len();
    Ok(format!(
        "{} converged structures, max {worst_iters} iterations, max energy rel diff {worst_energy:.1e} ({skipped} unconverged ground truths not applicable)",
        ids.len()
    ))
}

fn ac4(run: &Run) -> Outcome {
    let e = validate_energy_bias(&run.result.pairs);
    let g = validate_gaps(&run.result.pairs);
    check(!e.per_structure.is_empty(), || "no pair converged on both sides".into())?;
    check(e.max <= 1e-8, || format!("energy relative difference {:e}", e.max))?;
    check(g.max <= 1e-6, || format!("gap difference {:e} Ha", g.max))?;
    Ok(format!(
        "{} pairs: max energy rel diff {:.1e}, max gap diff {:.1e} Ha ({} pairs without both converged)",
        e.per_structure.len(),
        e.max,
        g.max,
        e.skipped
    ))
}

fn ac5() -> Outcome {
    let mut parts = Vec::new();

    let a = 2.0 * PI;
    let jellium = Structure::empty_lattice(Cell::cubic(a).unwrap(), 2.0).unwrap();
    let params = SolverParams {
        ecutwfc: 2.0,
        ecutrho: 8.0,
        exchange: false,
        ..SolverParams::default()
    };
    let setup = SolverSetup::new(&jellium, &params).unwrap();
    let uniform = DensityField::uniform(setup.grid().clone(), 2.0 / setup.grid().cell().volume());
    let h = build_hamiltonian(&jellium, &uniform, &params).unwrap();
    let orb = solve_linear_eigenproblem(&h, Arc::new(setup.basis().miller().to_vec()), 27, 1).unwrap();
    let shells = [0.0, 0.5, 0.5, 0.5, 0.5, 0.5, 0.5];
    let mut worst_shell = 0.0f64;
    for (k, &e) in orb.eigenvalues.iter().enumerate() {
        let want = if k < 7 { shells[k] } else if k < 19 { 1.0 } else { 1.5 };
        worst_shell = worst_shell.max((e - want).abs());
    }
    check(worst_shell <= 1e-10, || format!("empty-lattice shells off by {worst_shell:e}"))?;
    parts.push(format!("shells {worst_shell:.0e}"));

    let (side, sigma) = (10.0, 0.8);
    let pos = Vec3::new(1.3, 2.1, 0.7);
    let atom = common::single_atom(side, sigma, pos);
    let grid = Grid::new(atom.cell().clone(), [48, 48, 48]).unwrap();
    let v = fft_inverse(&local_potential(&atom, &grid));
    let mut worst_v = 0.0f64;
    for idx in (0..grid.len()).step_by(61) {
        let want = common::gaussian_potential_oracle(side, 2.0, sigma, 2.0, &(grid.point(idx) - pos));
        worst_v = worst_v.max((v.values()[idx] - want).abs());
    }
    check(worst_v <= 1e-6, || format!("pseudopotential off by {worst_v:e}"))?;
    parts.push(format!("erf potential {worst_v:.0e}"));

    let suite = rhobench::bench::generate_suite(POOL, rhobench::bench::SuiteCounts::default_for(POOL), SEED)
        .map_err(|e| e.to_string())?;
    let picks = ["train_unary_000", "train_binary_003", "test_binary_000", "test_ternary_000"];
    let table = common::gaussian_table(&suite.pool);
    let (mut herm, mut resid, mut charge, mut builds) = (0.0f64, 0.0f64, 0.0f64, 0usize);
    for id in picks {
        let s = &suite.get(id).ok_or_else(|| format!("{id} missing"))?.structure;
        let p = SolverParams {
            max_iter: 40,
            ..pipeline::pipeline_params()
        };
        let setup = SolverSetup::new(s, &p).unwrap();
        let init = acs_density(s, &table, setup.grid()).map_err(|e| e.to_string())?;
        let out = run_scf(s, &init, &p).map_err(|e| e.to_string())?;
        for d in &out.diagnostics {
            herm = herm.max(d.hermiticity);
            resid = resid.max(d.max_eigen_residual);
            charge = charge.max(d.charge_error);
            builds += 1;
        }
    }
    check(herm <= 1e-12, || format!("hermiticity residual {herm:e}"))?;
    check(resid <= 1e-8, || format!("eigen residual {resid:e}"))?;
    check(charge <= 1e-8, || format!("charge error {charge:e}"))?;
    check(hermiticity_residual(&h) <= 1e-12, || "empty-lattice hamiltonian not hermitian".into())?;
    parts.push(format!(
        "{builds} builds: hermiticity {herm:.0e}, eigen residual {resid:.0e}, charge {charge:.0e}"
    ));
    Ok(parts.join("; "))
}

fn ac6() -> Outcome {
    let width = 0.8;
    let lone = common::single_atom(24.0, 0.6, Vec3::zeros());
    let mut table = AtomicDensityTable::new();
    table.insert(lone.species_table()[0], common::gaussian_radial(2.0, width));
    let grid = Grid::new(lone.cell().clone(), [48, 48, 48]).unwrap();
    let rho = acs_density(&lone, &table, &grid).map_err(|e| e.to_string())?;
    let peak = common::gaussian_atom(2.0, width, 0.0);
    let mut worst_ray = 0.0f64;
    for i in 0..24 {
        for idx in [grid.index([i, 0, 0]), grid.index([0, 0, i]), grid.index([i, i, 0]), grid.index([i, i, i])] {
            let want = common::gaussian_atom(2.0, width, grid.point(idx).norm());
            worst_ray = worst_ray.max((rho.values()[idx] - want).abs() / peak);
        }
    }
    check(worst_ray <= 1e-6, || format!("ray mismatch {worst_ray:e}"))?;

    let mut rng = common::rng(6);
    let (mut worst_norm, mut worst_shift) = (0.0f64, 0.0f64);
    for _ in 0..5 {
        let cell = common::random_cell(&mut rng, (5.0, 7.0), 0.2);
        let s = common::random_structure(&mut rng, cell, 4, 3);
        let table = common::gaussian_table(s.species_table());
        let grid = Grid::for_cutoff(s.cell(), 10.0);
        let base = acs_density(&s, &table, &grid).map_err(|e| e.to_string())?;
        worst_norm = worst_norm.max((base.integral() - s.n_electrons()).abs() / s.n_electrons());
        let mut atoms = s.atoms().to_vec();
        atoms.shuffle(&mut rng);
        let perm = acs_density(&s.with_atoms(atoms).unwrap(), &table, &grid).map_err(|e| e.to_string())?;
        check(perm.values() == base.values(), || "atom permutation changed the field".into())?;
        let shift = s.cell().vector(0) * 2.0 - s.cell().vector(2);
        let moved = acs_density(&s.translated(&shift), &table, &grid).map_err(|e| e.to_string())?;
        let d = base.values().iter().zip(moved.values()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        worst_shift = worst_shift.max(d / base.max());
    }
    check(worst_norm <= 1e-12, || format!("normalization off by {worst_norm:e}"))?;
    check(worst_shift <= 1e-13, || format!("lattice translation changed the field by {worst_shift:e}"))?;
    Ok(format!(
        "ray {worst_ray:.1e}, permutation bit-identical, translation {worst_shift:.0e} (rounding), normalization {worst_norm:.0e}"
    ))
}

fn ac7() -> Outcome {
    let spec = DescriptorSpec::with_basis(vec![0, 1], 4.0, 5);
    let mut rng = common::rng(21);
    let w: Vec<f64> = (0..spec.dim()).map(|_| rng.random_range(-1.0..1.0)).collect();
    let samples: Vec<QuerySample> = (0..200)
        .map(|k| {
            let mut f: Vec<f64> = (0..spec.dim() - 1).map(|_| rng.random_range(0.0..2.0)).collect();
            f.push(1.0);
            let target = f.iter().zip(&w).map(|(a, b)| a * b).sum();
            QuerySample {
                features: f,
                target,
                source: (0, k),
            }
        })
        .collect();
    let model = fit(&samples, &spec, 0.0).map_err(|e| e.to_string())?;
    let worst_w = model.weights.iter().zip(&w).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    check(worst_w <= 1e-8, || format!("weights off by {worst_w:e}"))?;

    let full = DescriptorSpec::new(vec![0, 1, 2]);
    let mut worst_oracle = 0.0f64;
    for case in 0..100 {
        let mut rng = common::rng(5000 + case);
        let cell = common::random_cell(&mut rng, (6.6, 9.0), 0.08);
        let n = rng.random_range(1..6);
        let s = common::random_structure(&mut rng, cell, n, 3);
        let p = common::random_point(&mut rng, s.cell());
        let got = featurize(&s, &p, &full);
        let want = common::brute_features(&s, &p, &full);
        for (g, w) in got.iter().zip(&want) {
            worst_oracle = worst_oracle.max((g - w).abs() / w.abs().max(1.0));
        }
    }
    check(worst_oracle <= 1e-12, || format!("featurize vs image oracle {worst_oracle:e}"))?;

    let mut worst_inv = 0.0f64;
    for case in 0..50 {
        let mut rng = common::rng(9000 + case);
        let cell = common::random_cell(&mut rng, (6.6, 9.0), 0.08);
        let s = common::random_structure(&mut rng, cell, 4, 3);
        let p = common::random_point(&mut rng, s.cell());
        let base = featurize(&s, &p, &full);
        let q = common::random_rotation(&mut rng);
        let atoms = s
            .atoms()
            .iter()
            .map(|a| rhobench::crystal::Atom {
                position: q * a.position,
                species: a.species,
            })
            .collect();
        let rotated = Structure::new(s.cell().lattice() * q.transpose(), atoms, s.species_table().to_vec()).unwrap();
        let t = Vec3::from_fn(|_, _| rng.random_range(-15.0..15.0));
        let mut shuffled = s.atoms().to_vec();
        shuffled.shuffle(&mut rng);
        let perm = featurize(&s.with_atoms(shuffled).unwrap(), &p, &full);
        check(perm == base, || format!("permutation changed features in case {case}"))?;
        for other in [featurize(&rotated, &(q * p), &full), featurize(&s.translated(&t), &(p + t), &full)] {
            for (a, b) in other.iter().zip(&base) {
                worst_inv = worst_inv.max((a - b).abs() / b.abs().max(1.0));
            }
        }
    }
    check(worst_inv <= 1e-10, || format!("rotation/translation deviation {worst_inv:e}"))?;
    Ok(format!(
        "realizable weights {worst_w:.0e}, image oracle {worst_oracle:.0e} over 100 cases, rotation/translation {worst_inv:.0e}, permutation exact"
    ))
}

fn hash_tree(root: &Path) -> BTreeMap<String, String> {
    fn walk(base: &Path, dir: &Path, out: &mut BTreeMap<String, String>) {
        for entry in std::fs::read_dir(dir).unwrap() {
            let path = entry.unwrap().path();
            if path.is_dir() {
                walk(base, &path, out);
            } else {
                let rel = path.strip_prefix(base).unwrap().to_string_lossy().into_owned();
                out.insert(rel, hex::encode(Sha256::digest(std::fs::read(&path).unwrap())));
            }
        }
    }
    let mut out = BTreeMap::new();
    walk(root, root, &mut out);
    out
}

fn ac8(a: &Run, b: &Run) -> Outcome {
    let (ha, hb) = (hash_tree(&a.root), hash_tree(&b.root));
    let differing: Vec<&String> = ha.keys().chain(hb.keys()).filter(|k| ha.get(*k) != hb.get(*k)).collect();
    check(differing.is_empty(), || format!("{} files differ, e.g. {}", differing.len(), differing[0]))?;
    Ok(format!("{} files hash-identical across two runs", ha.len()))
}

fn ac9(run: &Run) -> Outcome {
    let ds = pipeline::load_dataset(&run.data).map_err(|e| e.to_string())?;
    let ecut = ds.manifest.params.ecutrho;
    for entry in &ds.manifest.structures {
        let bytes = std::fs::read(pipeline::density_path(&run.data, &entry.id)).map_err(|e| e.to_string())?;
        let s = &ds.suite.get(&entry.id).unwrap().structure;
        let grid = Grid::for_cutoff(s.cell(), ecut);
        let field = decode_reciprocal(&bytes, &grid).map_err(|e| e.to_string())?;
        let again = encode_reciprocal(&field, ecut).map_err(|e| e.to_string())?;
        check(again == bytes, || format!("{} not byte-identical after write/read/write", entry.id))?;
    }

    let grid = Grid::new(Cell::cubic(2.0 * PI).unwrap(), [6, 6, 6]).unwrap();
    let values = (0..grid.len()).map(|i| 1.0 + 0.1 * (grid.point(i).x).cos()).collect();
    let field = DensityField::new(grid.clone(), values).unwrap();
    let good = encode_reciprocal(&field, 2.0).map_err(|e| e.to_string())?;
    let header = 104;
    let count = u64::from_le_bytes(good[header - 8..header].try_into().unwrap());
    check(count == 33, || format!("{count} records instead of 33"))?;

    let mut rejected = 0;
    let mut expect = |bytes: Vec<u8>, what: &str, ok: fn(&DensioError) -> bool| -> Result<(), String> {
        match decode_reciprocal(&bytes, &grid) {
            Err(e) if ok(&e) => {
                rejected += 1;
                Ok(())
            }
            other => Err(format!("{what}: {other:?}")),
        }
    };
    let mut bad_magic = good.clone();
    bad_magic[1] = b'?';
    expect(bad_magic, "bad magic", |e| matches!(e, DensioError::Parse(_)))?;
    expect(good[..good.len() - 9].to_vec(), "truncated", |e| matches!(e, DensioError::Parse(_)))?;
    let mut trailing = good.clone();
    trailing.push(0);
    expect(trailing, "trailing", |e| matches!(e, DensioError::Parse(_)))?;
    let mut skew = good.clone();
    let at = header + 3 * 28 + 20;
    let v = f64::from_le_bytes(skew[at..at + 8].try_into().unwrap()) + 0.01;
    skew[at..at + 8].copy_from_slice(&v.to_le_bytes());
    expect(skew, "non-Hermitian pair", |e| matches!(e, DensioError::Corrupt(_)))?;
    let mut dup = good.clone();
    let first: Vec<u8> = dup[header + 28..header + 40].to_vec();
    dup[header + 56..header + 68].copy_from_slice(&first);
    expect(dup, "duplicate record", |e| matches!(e, DensioError::Corrupt(_)))?;
    Ok(format!(
        "{} suite densities byte-identical, 33 records, {rejected} corrupt variants rejected",
        ds.manifest.structures.len()
    ))
}

fn report(label: &str, name: &str, f: impl FnOnce() -> Outcome) -> bool {
    let outcome = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|p| {
        let msg = p
            .downcast_ref::<String>()
            .cloned()
            .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
            .unwrap_or_else(|| "panic".into());
        Err(format!("panicked: {msg}"))
    });
    match outcome {
        Ok(detail) => {
            println!("{label} PASS {name}: {detail}");
            true
        }
        Err(reason) => {
            println!("{label} FAIL {name}: {reason}");
            false
        }
    }
}

fn main() {
    let tmp = tempfile::tempdir().expect("temp dir");
    let first = full_run(&tmp.path().join("a"));
    let second = full_run(&tmp.path().join("b"));
    let need = |r: &Result<Run, String>| -> Result<(), String> { r.as_ref().map(|_| ()).map_err(|e| format!("pipeline failed: {e}")) };

    let mut ok = true;
    ok &= report("AC1", "s-AUC formula fidelity", ac1);
    ok &= report("AC2", "learned initialization beats ACS on held-out splits", || {
        need(&first)?;
        ac2(first.as_ref().unwrap())
    });
    ok &= report("AC3", "codec round trip preserves the SCF fixed point", || {
        need(&first)?;
        ac3(first.as_ref().unwrap())
    });
    ok &= report("AC4", "no energy or gap bias", || {
        need(&first)?;
        ac4(first.as_ref().unwrap())
    });
    ok &= report("AC5", "solver correctness", ac5);
    ok &= report("AC6", "ACS correctness", ac6);
    ok &= report("AC7", "predictor correctness", ac7);
    ok &= report("AC8", "end-to-end determinism", || {
        need(&first)?;
        need(&second)?;
        ac8(first.as_ref().unwrap(), second.as_ref().unwrap())
    });
    ok &= report("AC9", "codec bit-exactness", || {
        need(&first)?;
        ac9(first.as_ref().unwrap())
    });
    if !ok {
        std::process::exit(1);
    }
}
