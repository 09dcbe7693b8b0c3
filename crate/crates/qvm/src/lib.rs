//! A virtual machine for a seven-instruction quantum assembly language.
//!
//! The machine operates on named quantum registers held in a sparse joint
//! state vector. Six instructions (`INI`, `QFT`, `REA`, `ENT`, `DIF`, `PHA`)
//! transform or measure that state by exact simulation; the seventh (`ANN`)
//! runs a classical simulated-annealing minimizer over an Ising model. The
//! assembly language is deliberately straight-line: fixed-count `REPEAT`
//! loops are the only control structure, and there are no conditionals.
//!
//! Crate layout:
//!
//! - [`state`] — sparse multi-register quantum states and register-local
//!   unitary application.
//! - [`isa`] — semantics of the six register instructions.
//! - [`annealer`] — the Ising model, a brute-force ground-state oracle, and
//!   the Metropolis annealer behind `ANN`.
//! - [`lang`] — lexer, parser, pretty printer, and elaborator for `.qvm`
//!   source files.
//! - [`runtime`] — shot-by-shot execution with seeded randomness, report
//!   aggregation, and the classical order-finding post-processing used by
//!   the bundled factoring program.
//! - [`corpus`] — the bundled example programs.

pub mod annealer;
pub mod corpus;
pub mod isa;
pub mod lang;
pub mod rng;
pub mod runtime;
pub mod state;

pub use annealer::{AnnealSchedule, IsingModel, SpinConfig};
pub use isa::{MappingSpec, PhaseAngle};
pub use lang::{ElaboratedProgram, Instr, ProgramAst};
pub use runtime::{RunConfig, RunReport, ShotRecord};
pub use state::{Amplitude, JointState, RegisterDecl, RegisterLayout, Unitary};
