//! Runtime integration tests: report schema stability, determinism, and
//! sampled-versus-exact convergence on the bundled programs.

use qvm::corpus;
use qvm::isa::IsaError;
use qvm::lang::compile;
use qvm::runtime::{exact_rea_distributions, run_once, run_shots, RunConfig, ShotEvent};
use std::collections::BTreeMap;
use std::path::Path;

fn corpus_program(name: &str) -> (tempfile::TempDir, qvm::ElaboratedProgram) {
    let dir = tempfile::tempdir().unwrap();
    let entry = corpus::entry(name).unwrap();
    corpus::materialize(&entry, dir.path()).unwrap();
    let program = compile(&entry.program.contents, dir.path()).unwrap();
    (dir, program)
}

/// Pins field names and ordering of the report JSON.
#[test]
fn report_schema_is_stable() {
    let program = compile("REG R 1\nQFT R\nREA R", Path::new(".")).unwrap();
    let config = RunConfig { seed: 7, shots: 3, trace: true, dump_state: false };
    let report = run_shots(&program, &config).unwrap();
    let golden = r#"{
  "prng": "splitmix64/chacha8-v1",
  "seed": 7,
  "shots": 3,
  "histograms": {
    "R": {
      "0": 1,
      "1": 2
    }
  },
  "records": [
    {
      "events": [
        {
          "kind": "rea",
          "instruction": 1,
          "register": "R",
          "value": 0
        }
      ]
    },
    {
      "events": [
        {
          "kind": "rea",
          "instruction": 1,
          "register": "R",
          "value": 1
        }
      ]
    },
    {
      "events": [
        {
          "kind": "rea",
          "instruction": 1,
          "register": "R",
          "value": 1
        }
      ]
    }
  ]
}"#;
    assert_eq!(serde_json::to_string_pretty(&report).unwrap(), golden);

    let single = RunConfig { seed: 7, shots: 1, trace: false, dump_state: true };
    let report = run_shots(&program, &single).unwrap();
    let golden = r#"{
  "prng": "splitmix64/chacha8-v1",
  "seed": 7,
  "shots": 1,
  "histograms": {
    "R": {
      "0": 1
    }
  },
  "state_dump": [
    "0  1.00000000000e0 0.00000000000e0"
  ]
}"#;
    assert_eq!(serde_json::to_string_pretty(&report).unwrap(), golden);
}

#[test]
fn fair_coin_histogram_is_binomial() {
    let program = compile("REG R 1\nINI R\nQFT R\nREA R", Path::new(".")).unwrap();
    let config = RunConfig { seed: 0, shots: 10_000, ..Default::default() };
    let report = run_shots(&program, &config).unwrap();
    let hist = &report.histograms["R"];
    let zeros = *hist.get(&0).unwrap_or(&0) as i64;
    let ones = *hist.get(&1).unwrap_or(&0) as i64;
    assert_eq!(zeros + ones, 10_000);
    // Three sigma around the fair-coin mean.
    assert!((zeros - 5000).abs() <= 150, "{zeros} heads");
    assert!((ones - 5000).abs() <= 150, "{ones} tails");
}

fn total_variation(hist: &BTreeMap<u64, u64>, shots: u64, exact: &[f64]) -> f64 {
    let mut tv = 0.0;
    for (k, p) in exact.iter().enumerate() {
        let empirical = *hist.get(&(k as u64)).unwrap_or(&0) as f64 / shots as f64;
        tv += (empirical - p).abs();
    }
    tv / 2.0
}

#[test]
fn sampled_histograms_converge_to_the_exact_marginals() {
    for name in ["shor_9_4", "grover_64", "dj_constant", "dj_balanced"] {
        let (_dir, program) = corpus_program(name);
        let exact = exact_rea_distributions(&program).unwrap();
        let config = RunConfig { seed: 5, shots: 10_000, ..Default::default() };
        let report = run_shots(&program, &config).unwrap();
        for (register, hist) in &report.histograms {
            let tv = total_variation(hist, config.shots, &exact[register]);
            assert!(tv <= 0.05, "{name}/{register}: total variation {tv}");
        }
    }
}

#[test]
fn grover_reads_the_marked_address() {
    let (_dir, program) = corpus_program("grover_64");
    let config = RunConfig { seed: 9, shots: 2_000, ..Default::default() };
    let report = run_shots(&program, &config).unwrap();
    let hits = *report.histograms["R1"].get(&corpus::GROVER_ADDRESS).unwrap_or(&0);
    // Success probability is 0.9966 per shot.
    assert!(hits >= 1_950, "only {hits}/2000 shots found the address");
}

#[test]
fn shor_never_reads_an_impossible_power() {
    let (_dir, program) = corpus_program("shor_9_4");
    let config = RunConfig { seed: 3, shots: 500, trace: true, ..Default::default() };
    let report = run_shots(&program, &config).unwrap();
    for record in report.records.unwrap() {
        match &record.events[0] {
            ShotEvent::Rea { register, value, .. } => {
                assert_eq!(register, "R2");
                assert!([1, 4, 7].contains(value), "impossible readout {value}");
            }
            other => panic!("expected a readout first, got {other:?}"),
        }
    }
}

#[test]
fn annealing_events_share_the_shot_stream() {
    let (_dir, program) = corpus_program("anneal_demo");
    let a = run_once(&program, 42).unwrap();
    let b = run_once(&program, 42).unwrap();
    assert_eq!(a, b);
    match &a.events[0] {
        ShotEvent::Ann { energy, spins, model, .. } => {
            assert_eq!(model, "anneal_demo.ising");
            assert_eq!(*energy, -8.5);
            assert_eq!(spins.len(), 8);
        }
        other => panic!("expected an annealing event, got {other:?}"),
    }
}

#[test]
fn instruction_errors_carry_their_index() {
    // A mapping image outside the destination register only slips past the
    // elaborator when the program is built by hand.
    let program = qvm::ElaboratedProgram {
        registers: vec![
            qvm::RegisterDecl::new("A", 2),
            qvm::RegisterDecl::new("B", 1),
        ],
        instructions: vec![
            qvm::Instr::Qft { reg: 0 },
            qvm::Instr::Ent {
                src: 0,
                dst: 1,
                map: std::sync::Arc::new(qvm::MappingSpec::table(vec![0, 1, 2, 3])),
            },
        ],
    };
    let err = run_once(&program, 0).unwrap_err();
    match err {
        qvm::runtime::RuntimeError::Instruction { index, source } => {
            assert_eq!(index, 1);
            assert!(matches!(source, IsaError::MapRange { .. }));
        }
        other => panic!("unexpected error {other:?}"),
    }
}

#[test]
fn empty_histograms_for_programs_without_readouts() {
    let program = compile("REG R 2\nINI R\nQFT R", Path::new(".")).unwrap();
    let report = run_shots(&program, &RunConfig::default()).unwrap();
    assert!(report.histograms.is_empty());
}

fn slow_pow_mod(base: u64, exp: u64, modulus: u64) -> u64 {
    (0..exp).fold(1u64, |acc, _| acc * base % modulus)
}

#[test]
fn inferred_orders_always_verify() {
    use qvm::runtime::infer_order;
    for modulus in [9u64, 15, 21, 35] {
        for base in 2..modulus {
            if gcd(base, modulus) != 1 {
                continue;
            }
            for k in 0..128u64 {
                if let Some(r) = infer_order(k, 7, modulus, base) {
                    assert_eq!(slow_pow_mod(base, r, modulus), 1, "k={k} N={modulus} x={base}");
                }
            }
        }
    }
}

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

#[test]
fn extracted_factors_divide_the_modulus() {
    use qvm::runtime::{extract_factor, FactorOutcome};
    for modulus in [15u64, 21, 33, 35, 39, 55] {
        for base in 2..modulus {
            if gcd(base, modulus) != 1 {
                continue;
            }
            // Order by brute force.
            let order = (1..=modulus).find(|&r| slow_pow_mod(base, r, modulus) == 1).unwrap();
            match extract_factor(modulus, base, order).unwrap() {
                FactorOutcome::Factor(g) => {
                    assert!(g > 1 && g < modulus && modulus % g == 0, "N={modulus} x={base}: {g}");
                }
                FactorOutcome::OddOrder => assert_eq!(order % 2, 1),
                FactorOutcome::TrivialFactor => {}
            }
        }
    }
}
