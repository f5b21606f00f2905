use super::BenchError;
use crate::crystal::{Atom, Mat3, Species, SpeciesId, Structure, Vec3};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::BTreeSet;
use std::fmt;

/// Largest positional perturbation as a fraction of the lattice constant.
pub const MAX_PERTURBATION: f64 = 0.02;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Split {
    TrainUnary,
    TrainBinary,
    ValBinary,
    TestBinary,
    TestTernary,
}

impl Split {
    pub const ALL: [Split; 5] = [
        Split::TrainUnary,
        Split::TrainBinary,
        Split::ValBinary,
        Split::TestBinary,
        Split::TestTernary,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Split::TrainUnary => "train_unary",
            Split::TrainBinary => "train_binary",
            Split::ValBinary => "val_binary",
            Split::TestBinary => "test_binary",
            Split::TestTernary => "test_ternary",
        }
    }

    pub fn parse(name: &str) -> Option<Split> {
        Self::ALL.into_iter().find(|s| s.name() == name)
    }

    pub fn is_train(self) -> bool {
        matches!(self, Split::TrainUnary | Split::TrainBinary)
    }
}

impl fmt::Display for Split {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SuiteCounts {
    pub train_binary: usize,
    pub val_binary: usize,
    pub test_binary: usize,
    pub test_ternary: usize,
}

impl SuiteCounts {
    /// Holds out 3/7 of the binary combos for test and one in 14 for
    /// validation; the rest train. Up to 12 ternary combos are tested.
    pub fn default_for(pool_size: usize) -> Self {
        let pairs = pool_size * pool_size.saturating_sub(1) / 2;
        let triples = pairs * pool_size.saturating_sub(2) / 3;
        let test_binary = (pairs * 3 / 7).max(1);
        let val_binary = (pairs / 14).max(1);
        SuiteCounts {
            train_binary: pairs.saturating_sub(test_binary + val_binary),
            val_binary,
            test_binary,
            test_ternary: triples.min(12),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SuiteStructure {
    pub id: String,
    pub split: Split,
    pub motif: &'static str,
    pub structure: Structure,
}

impl SuiteStructure {
    pub fn combo(&self) -> Vec<SpeciesId> {
        self.structure.combo()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SplitSuite {
    pub pool: Vec<Species>,
    pub structures: Vec<SuiteStructure>,
    pub seed: u64,
}

impl SplitSuite {
    pub fn split(&self, split: Split) -> impl Iterator<Item = &SuiteStructure> {
        self.structures.iter().filter(move |s| s.split == split)
    }

    pub fn get(&self, id: &str) -> Option<&SuiteStructure> {
        self.structures.iter().find(|s| s.id == id)
    }

    pub fn combos(&self, train: bool) -> BTreeSet<Vec<SpeciesId>> {
        self.structures
            .iter()
            .filter(|s| s.split.is_train() == train)
            .map(SuiteStructure::combo)
            .collect()
    }

    /// Checks that no held-out combo is trained on and that every held-out
    /// species is trained on.
    pub fn check_disjoint(&self) -> Result<(), BenchError> {
        let train = self.combos(true);
        let test = self.combos(false);
        if let Some(c) = train.intersection(&test).next() {
            return Err(BenchError::Suite(format!("combo {c:?} is in train and held-out splits")));
        }
        let seen: BTreeSet<SpeciesId> = train.iter().flatten().copied().collect();
        if let Some(s) = test.iter().flatten().find(|s| !seen.contains(s)) {
            return Err(BenchError::Suite(format!("species {s} is never trained on")));
        }
        Ok(())
    }
}

/// Toy species pool: z_val 2 throughout, widths spread evenly on [0.55, 1.25].
pub fn species_pool(pool_size: usize) -> Vec<Species> {
    (0..pool_size)
        .map(|i| {
            let t = if pool_size > 1 { i as f64 / (pool_size - 1) as f64 } else { 0.0 };
            Species::new(i as SpeciesId, 2.0, 0.55 + 0.7 * t).expect("valid toy species")
        })
        .collect()
}

/// Contact radius used to size lattices.
fn radius(s: &Species) -> f64 {
    1.5 + s.sigma
}

fn cubic(a: f64) -> Mat3 {
    Mat3::identity() * a
}

fn perturbed(rng: &mut ChaCha8Rng, a: f64, sites: Vec<(Vec3, SpeciesId)>) -> Vec<Atom> {
    let step = MAX_PERTURBATION * a / 3f64.sqrt();
    sites
        .into_iter()
        .map(|(p, species)| {
            let d = Vec3::from_fn(|_, _| rng.random_range(-step..=step));
            Atom {
                position: p + d,
                species,
            }
        })
        .collect()
}

fn build(cell: Mat3, atoms: Vec<Atom>, pool: &[Species]) -> Result<Structure, BenchError> {
    let used: BTreeSet<SpeciesId> = atoms.iter().map(|a| a.species).collect();
    let table = pool.iter().filter(|s| used.contains(&s.id)).copied().collect();
    Structure::new(cell, atoms, table).map_err(|e| BenchError::Suite(e.to_string()))
}

fn unary(rng: &mut ChaCha8Rng, s: &Species, bcc: bool, pool: &[Species]) -> Result<(Structure, &'static str), BenchError> {
    let r = radius(s);
    if bcc {
        let a = 4.0 * r / 3f64.sqrt();
        let atoms = perturbed(rng, a, vec![(Vec3::zeros(), s.id), (Vec3::repeat(0.5 * a), s.id)]);
        Ok((build(cubic(a), atoms, pool)?, "bcc"))
    } else {
        let a = 2.0 * r;
        let atoms = perturbed(rng, a, vec![(Vec3::zeros(), s.id)]);
        Ok((build(cubic(a), atoms, pool)?, "sc"))
    }
}

fn binary(rng: &mut ChaCha8Rng, a_sp: &Species, b_sp: &Species, pool: &[Species]) -> Result<(Structure, &'static str), BenchError> {
    let contact = radius(a_sp) + radius(b_sp);
    if rng.random_bool(0.5) {
        let a = 2.0 * contact / 3f64.sqrt();
        let atoms = perturbed(rng, a, vec![(Vec3::zeros(), a_sp.id), (Vec3::repeat(0.5 * a), b_sp.id)]);
        Ok((build(cubic(a), atoms, pool)?, "cscl"))
    } else {
        let a = 2.0 * contact;
        let h = 0.5 * a;
        let cell = Mat3::new(0.0, h, h, h, 0.0, h, h, h, 0.0);
        let atoms = perturbed(rng, a, vec![(Vec3::zeros(), a_sp.id), (Vec3::new(h, 0.0, 0.0), b_sp.id)]);
        Ok((build(cell, atoms, pool)?, "rocksalt"))
    }
}

/// ABX2 on the four sites of a cubic fcc cell (A corner, B and two X on
/// face centres). Eight electrons fill the s+p-like manifold, so the
/// ground state is closed-shell.
fn ternary(rng: &mut ChaCha8Rng, trio: [&Species; 3], pool: &[Species]) -> Result<(Structure, &'static str), BenchError> {
    let [a_sp, b_sp, x_sp] = trio;
    let a = 2f64.sqrt() * 0.5 * (radius(a_sp) + radius(b_sp) + 2.0 * radius(x_sp));
    let h = 0.5 * a;
    let sites = vec![
        (Vec3::zeros(), a_sp.id),
        (Vec3::new(h, h, 0.0), b_sp.id),
        (Vec3::new(0.0, h, h), x_sp.id),
        (Vec3::new(h, 0.0, h), x_sp.id),
    ];
    let atoms = perturbed(rng, a, sites);
    Ok((build(cubic(a), atoms, pool)?, "fcc_abx2"))
}

/// Builds the unary, binary and ternary structures and assigns combos to
/// splits so that held-out combos never appear in training.
pub fn generate_suite(pool_size: usize, counts: SuiteCounts, seed: u64) -> Result<SplitSuite, BenchError> {
    if pool_size < 3 {
        return Err(BenchError::Suite(format!("pool of {pool_size} species is too small (need 3)")));
    }
    let pool = species_pool(pool_size);
    let mut pairs: Vec<[usize; 2]> = Vec::new();
    let mut triples: Vec<[usize; 3]> = Vec::new();
    for i in 0..pool_size {
        for j in i + 1..pool_size {
            pairs.push([i, j]);
            for k in j + 1..pool_size {
                triples.push([i, j, k]);
            }
        }
    }
    let held = counts.test_binary + counts.val_binary;
    if held + counts.train_binary > pairs.len() {
        return Err(BenchError::Suite(format!(
            "{} binary structures requested but only {} combos exist",
            held + counts.train_binary,
            pairs.len()
        )));
    }
    if counts.test_ternary > triples.len() {
        return Err(BenchError::Suite(format!(
            "{} ternary combos requested but only {} exist",
            counts.test_ternary,
            triples.len()
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    pairs.shuffle(&mut rng);
    triples.shuffle(&mut rng);

    let mut structures = Vec::new();
    let mut push = |split: Split, k: usize, (structure, motif): (Structure, &'static str)| {
        structures.push(SuiteStructure {
            id: format!("{}_{k:03}", split.name()),
            split,
            motif,
            structure,
        })
    };
    let mut k = 0;
    for s in &pool {
        for bcc in [false, true] {
            push(Split::TrainUnary, k, unary(&mut rng, s, bcc, &pool)?);
            k += 1;
        }
    }
    let assignments = [
        (Split::TestBinary, &pairs[..counts.test_binary]),
        (Split::ValBinary, &pairs[counts.test_binary..held]),
        (Split::TrainBinary, &pairs[held..held + counts.train_binary]),
    ];
    for (split, chosen) in assignments {
        let mut chosen = chosen.to_vec();
        chosen.sort_unstable();
        for (k, [i, j]) in chosen.into_iter().enumerate() {
            push(split, k, binary(&mut rng, &pool[i], &pool[j], &pool)?);
        }
    }
    let mut chosen = triples[..counts.test_ternary].to_vec();
    chosen.sort_unstable();
    for (k, [i, j, l]) in chosen.into_iter().enumerate() {
        let mut trio = [&pool[i], &pool[j], &pool[l]];
        trio.shuffle(&mut rng);
        push(Split::TestTernary, k, ternary(&mut rng, trio, &pool)?);
    }
    let suite = SplitSuite { pool, structures, seed };
    suite.check_disjoint()?;
    Ok(suite)
}
