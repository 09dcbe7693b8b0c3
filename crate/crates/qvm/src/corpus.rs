//! Bundled example programs.
//!
//! Each entry is a `.qvm` source plus whatever table or model files it
//! references; [`materialize`] writes them side by side so the relative
//! paths resolve.

use std::io;
use std::path::{Path, PathBuf};

/// Names accepted by the `corpus` command.
pub const CORPUS_NAMES: [&str; 5] = [
    "shor_9_4",
    "grover_64",
    "dj_constant",
    "dj_balanced",
    "anneal_demo",
];

/// The value the bundled search program looks for.
pub const GROVER_MARKED: u64 = 21;
/// The address associated with [`GROVER_MARKED`] by the bundled table.
pub const GROVER_ADDRESS: u64 = grover_address(GROVER_MARKED);

const fn grover_address(data: u64) -> u64 {
    (5 * data + 3) % 64
}

#[derive(Debug, Clone)]
pub struct CorpusFile {
    pub name: &'static str,
    pub contents: String,
}

#[derive(Debug, Clone)]
pub struct CorpusEntry {
    pub name: &'static str,
    /// The program source; always the first file written.
    pub program: CorpusFile,
    /// Table and model files the program refers to.
    pub aux: Vec<CorpusFile>,
}

const SHOR_9_4: &str = "\
; Order finding for N = 9 with base x = 4.
; R1 scans the exponent j over 0..127; R2 receives x^j mod N. Reading R2
; collapses R1 onto one residue class of the order, and the second QFT
; turns the residue spacing into peaks near multiples of 2^7 / r.
REG R1 7
REG R2 4

INI R1
INI R2
QFT R1
ENT R1, R2, MODEXP(4, 9)
REA R2
QFT R1
REA R1
";

const GROVER_64: &str = "\
; Search for the data value 21 in a 64-entry space.
; R2 holds the data superposition; each round flips the sign of the marked
; value and diffuses about the mean. After the rounds, the table pairs the
; amplified data value with its address in R1, which the readout returns.
REG R1 6
REG R2 6

INI R1
INI R2
QFT R2
REPEAT GROVER_ITERS(DIM(R2)) {
  PHA R2, PI, 21
  DIF R2, DIM(R2)
}
ENT R2, R1, TABLE(\"grover_64.tab\")
REA R1
";

const DJ_CONSTANT: &str = "\
; Balanced-or-constant test over an 8-value domain, constant f = 1.
; The sign flip lands on every branch (or none), so the final transform
; returns all weight to |0> and the readout is 0 with certainty.
REG R1 3
REG R2 1

INI R1
INI R2
QFT R1
ENT R1, R2, TABLE(\"dj_constant.tab\")
PHA R2, PI, 1
ENT R1, R2, TABLE(\"dj_constant.tab\")
QFT R1
REA R1
";

const DJ_BALANCED: &str = "\
; Balanced-or-constant test over an 8-value domain, balanced f(i) = i mod 2.
; Half the branches flip sign, the |0> coefficient cancels exactly, and the
; readout is never 0.
REG R1 3
REG R2 1

INI R1
INI R2
QFT R1
ENT R1, R2, TABLE(\"dj_balanced.tab\")
PHA R2, PI, 1
ENT R1, R2, TABLE(\"dj_balanced.tab\")
QFT R1
REA R1
";

const ANNEAL_DEMO: &str = "\
; Classical annealing backend demo: an eight-spin antiferromagnetic ring
; with a field pinning vertex 0. Ground energy is -8.5 at the alternating
; configuration starting with -1.
ANN \"anneal_demo.ising\"
";

const ANNEAL_DEMO_MODEL: &str = "\
# Eight-spin antiferromagnetic ring, field on vertex 0.
h 0 0.5
J 0 1 1.0
J 1 2 1.0
J 2 3 1.0
J 3 4 1.0
J 4 5 1.0
J 5 6 1.0
J 6 7 1.0
J 0 7 1.0
";

fn grover_table() -> String {
    let mut out = String::from("# data value -> address, d -> (5 d + 3) mod 64\n");
    for d in 0..64u64 {
        out.push_str(&format!("{},{}\n", d, grover_address(d)));
    }
    out
}

fn dj_table<F: Fn(u64) -> u64>(f: F) -> String {
    (0..8u64).map(|i| format!("{},{}\n", i, f(i))).collect()
}

pub fn entry(name: &str) -> Option<CorpusEntry> {
    let entry = match name {
        "shor_9_4" => CorpusEntry {
            name: "shor_9_4",
            program: CorpusFile { name: "shor_9_4.qvm", contents: SHOR_9_4.into() },
            aux: vec![],
        },
        "grover_64" => CorpusEntry {
            name: "grover_64",
            program: CorpusFile { name: "grover_64.qvm", contents: GROVER_64.into() },
            aux: vec![CorpusFile { name: "grover_64.tab", contents: grover_table() }],
        },
        "dj_constant" => CorpusEntry {
            name: "dj_constant",
            program: CorpusFile { name: "dj_constant.qvm", contents: DJ_CONSTANT.into() },
            aux: vec![CorpusFile { name: "dj_constant.tab", contents: dj_table(|_| 1) }],
        },
        "dj_balanced" => CorpusEntry {
            name: "dj_balanced",
            program: CorpusFile { name: "dj_balanced.qvm", contents: DJ_BALANCED.into() },
            aux: vec![CorpusFile { name: "dj_balanced.tab", contents: dj_table(|i| i % 2) }],
        },
        "anneal_demo" => CorpusEntry {
            name: "anneal_demo",
            program: CorpusFile { name: "anneal_demo.qvm", contents: ANNEAL_DEMO.into() },
            aux: vec![CorpusFile { name: "anneal_demo.ising", contents: ANNEAL_DEMO_MODEL.into() }],
        },
        _ => return None,
    };
    Some(entry)
}

/// Writes the entry's files into `dir` and returns the program path.
pub fn materialize(entry: &CorpusEntry, dir: &Path) -> io::Result<PathBuf> {
    std::fs::create_dir_all(dir)?;
    let program_path = dir.join(entry.program.name);
    std::fs::write(&program_path, &entry.program.contents)?;
    for aux in &entry.aux {
        std::fs::write(dir.join(aux.name), &aux.contents)?;
    }
    Ok(program_path)
}
