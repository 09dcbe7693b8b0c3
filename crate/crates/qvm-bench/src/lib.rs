//! Shared fixtures for the benchmarks.

use qvm::annealer::IsingModel;
use qvm::lang::{compile, ElaboratedProgram};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::path::Path;

/// The bundled order-finding program, ready to execute.
pub fn shor_program() -> ElaboratedProgram {
    let entry = qvm::corpus::entry("shor_9_4").unwrap();
    compile(&entry.program.contents, Path::new(".")).unwrap()
}

/// The bundled search program, with its table resolved from a temp dir.
pub fn grover_program() -> ElaboratedProgram {
    let dir = tempfile::tempdir().unwrap();
    let entry = qvm::corpus::entry("grover_64").unwrap();
    qvm::corpus::materialize(&entry, dir.path()).unwrap();
    compile(&entry.program.contents, dir.path()).unwrap()
}

/// A random Ising instance with the given vertex and edge counts.
pub fn random_ising(n: usize, edges: usize, seed: u64) -> IsingModel {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut pairs: Vec<(usize, usize)> =
        (0..n).flat_map(|i| ((i + 1)..n).map(move |j| (i, j))).collect();
    for i in (1..pairs.len()).rev() {
        let j = rng.gen_range(0..=i);
        pairs.swap(i, j);
    }
    let edges: Vec<(usize, usize, f64)> = pairs
        .into_iter()
        .take(edges)
        .map(|(i, j)| (i, j, rng.gen_range(-1.0..1.0)))
        .collect();
    let h: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
    IsingModel::new(h, edges).unwrap()
}
