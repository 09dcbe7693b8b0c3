//! Shot-by-shot execution with seeded randomness, report aggregation, and
//! the classical post-processing for order finding.
//!
//! A run is deterministic: shot `i` executes on the child seed
//! `derive_seed(config.seed, i)`, and every measurement draw and annealing
//! move inside the shot comes from that one ChaCha8 stream. Shots are
//! independent, so they run in parallel and merge order-insensitively.

use crate::annealer::{anneal, AnnealSchedule};
use crate::isa::{op_dif, op_ent, op_ini, op_pha, op_qft, op_rea, IsaError};
use crate::lang::{ElaboratedProgram, Instr};
use crate::rng::{derive_seed, PRNG_ID};
use crate::state::{init_zero, JointState, StateError};
use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;
use std::collections::{BTreeMap, HashMap};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RuntimeError {
    #[error("instruction {index}: {source}")]
    Instruction { index: usize, source: IsaError },
    #[error("cannot build the machine state: {0}")]
    Setup(#[from] StateError),
    #[error("{0}")]
    Config(String),
    #[error("order contract violated: {0}")]
    Contract(String),
}

/// Knobs for a run. `trace` embeds per-shot records in the report;
/// `dump_state` embeds the final state (single-shot runs only).
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub seed: u64,
    pub shots: u64,
    pub trace: bool,
    pub dump_state: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig { seed: 0, shots: 1, trace: false, dump_state: false }
    }
}

/// Everything observed during one shot, in execution order.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ShotEvent {
    Rea { instruction: usize, register: String, value: u64 },
    Ann { instruction: usize, model: String, energy: f64, spins: Vec<i8> },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ShotRecord {
    pub events: Vec<ShotEvent>,
}

/// Aggregated result of a run. Histograms count, per register, the last
/// readout of each shot; registers that are never read do not appear.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunReport {
    pub prng: String,
    pub seed: u64,
    pub shots: u64,
    pub histograms: BTreeMap<String, BTreeMap<u64, u64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub records: Option<Vec<ShotRecord>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub state_dump: Option<Vec<String>>,
}

fn instr_err(index: usize) -> impl Fn(IsaError) -> RuntimeError {
    move |source| RuntimeError::Instruction { index, source }
}

/// Executes one shot. All randomness comes from the stream seeded here, so
/// identical seeds give identical records.
pub fn run_once(program: &ElaboratedProgram, seed: u64) -> Result<ShotRecord, RuntimeError> {
    run_once_with_state(program, seed).map(|(record, _)| record)
}

/// [`run_once`], also returning the final machine state (`None` when the
/// program declares no registers).
pub fn run_once_with_state(
    program: &ElaboratedProgram,
    seed: u64,
) -> Result<(ShotRecord, Option<JointState>), RuntimeError> {
    let mut rng = crate::rng::stream(seed);
    let mut state: Option<JointState> = if program.registers.is_empty() {
        None
    } else {
        Some(init_zero(program.registers.clone())?)
    };
    let mut events = Vec::new();
    for (index, instr) in program.instructions.iter().enumerate() {
        match instr {
            Instr::Ann { label, model } => {
                let anneal_seed = rng.gen::<u64>();
                let schedule = AnnealSchedule::default_for(model.vertex_count());
                let (spins, energy) = anneal(model, &schedule, anneal_seed);
                events.push(ShotEvent::Ann {
                    instruction: index,
                    model: label.clone(),
                    energy,
                    spins: spins.spins().to_vec(),
                });
            }
            _ => {
                let s = state
                    .take()
                    .expect("register instructions require declared registers");
                let next = match instr {
                    Instr::Ini { reg } => op_ini(&s, *reg, rng.gen::<f64>()),
                    Instr::Qft { reg } => op_qft(&s, *reg),
                    Instr::Rea { reg } => {
                        let (value, collapsed) = op_rea(&s, *reg, rng.gen::<f64>());
                        events.push(ShotEvent::Rea {
                            instruction: index,
                            register: program.registers[*reg].name.clone(),
                            value,
                        });
                        collapsed
                    }
                    Instr::Ent { src, dst, map } => {
                        op_ent(&s, *src, *dst, map).map_err(instr_err(index))?
                    }
                    Instr::Dif { reg, size } => op_dif(&s, *reg, *size).map_err(instr_err(index))?,
                    Instr::Pha { reg, phase, index: n } => {
                        op_pha(&s, *reg, *phase, *n).map_err(instr_err(index))?
                    }
                    Instr::Ann { .. } => unreachable!(),
                };
                debug_assert!(
                    (next.norm_sqr() - 1.0).abs() <= 1e-9,
                    "state norm drifted at instruction {index}"
                );
                state = Some(next);
            }
        }
    }
    Ok((ShotRecord { events }, state))
}

/// Runs `config.shots` independent shots and aggregates the report.
pub fn run_shots(program: &ElaboratedProgram, config: &RunConfig) -> Result<RunReport, RuntimeError> {
    if config.shots == 0 {
        return Err(RuntimeError::Config("shots must be at least 1".into()));
    }
    let mut state_dump = None;
    let records: Vec<ShotRecord> = if config.shots == 1 {
        let (record, state) = run_once_with_state(program, derive_seed(config.seed, 0))?;
        if config.dump_state || config.trace {
            state_dump = state.map(|s| s.dump_lines());
        }
        vec![record]
    } else {
        (0..config.shots)
            .into_par_iter()
            .map(|i| run_once(program, derive_seed(config.seed, i)))
            .collect::<Result<_, _>>()?
    };
    let mut histograms: BTreeMap<String, BTreeMap<u64, u64>> = BTreeMap::new();
    for record in &records {
        let mut last: HashMap<&str, u64> = HashMap::new();
        for event in &record.events {
            if let ShotEvent::Rea { register, value, .. } = event {
                last.insert(register, *value);
            }
        }
        for (register, value) in last {
            *histograms
                .entry(register.to_string())
                .or_default()
                .entry(value)
                .or_insert(0) += 1;
        }
    }
    Ok(RunReport {
        prng: PRNG_ID.to_string(),
        seed: config.seed,
        shots: config.shots,
        histograms,
        records: config.trace.then_some(records),
        state_dump,
    })
}

fn apply_pure(state: &JointState, instr: &Instr) -> Result<JointState, IsaError> {
    match instr {
        Instr::Qft { reg } => Ok(op_qft(state, *reg)),
        Instr::Ent { src, dst, map } => op_ent(state, *src, *dst, map),
        Instr::Dif { reg, size } => op_dif(state, *reg, *size),
        Instr::Pha { reg, phase, index } => op_pha(state, *reg, *phase, *index),
        Instr::Ini { .. } | Instr::Rea { .. } | Instr::Ann { .. } => {
            unreachable!("not a pure state transform")
        }
    }
}

fn walk_branches(
    program: &ElaboratedProgram,
    index: usize,
    weight: f64,
    state: JointState,
    on_rea: &mut dyn FnMut(usize, usize, f64, &JointState),
    out: &mut Vec<(f64, JointState)>,
) -> Result<(), RuntimeError> {
    if index == program.instructions.len() {
        out.push((weight, state));
        return Ok(());
    }
    match &program.instructions[index] {
        Instr::Rea { reg } => {
            on_rea(index, *reg, weight, &state);
            for (&value, &p) in &state.marginal_sparse(*reg) {
                if p <= 0.0 {
                    continue;
                }
                let collapsed = state
                    .collapse(*reg, value)
                    .expect("branch has positive probability");
                walk_branches(program, index + 1, weight * p, collapsed, on_rea, out)?;
            }
            Ok(())
        }
        Instr::Ini { reg } => {
            for (&value, &p) in &state.marginal_sparse(*reg) {
                if p <= 0.0 {
                    continue;
                }
                let collapsed = state
                    .collapse(*reg, value)
                    .expect("branch has positive probability");
                let zeroed =
                    collapsed.permute_points(|layout, key| layout.set_coord(key, *reg, 0));
                walk_branches(program, index + 1, weight * p, zeroed, on_rea, out)?;
            }
            Ok(())
        }
        Instr::Ann { .. } => walk_branches(program, index + 1, weight, state, on_rea, out),
        instr => {
            let next = apply_pure(&state, instr).map_err(instr_err(index))?;
            walk_branches(program, index + 1, weight, next, on_rea, out)
        }
    }
}

/// Exhaustive no-sampling trace: follows every measurement branch with its
/// probability weight and returns the final states. Intended for exact
/// checks against sampled runs; branch count grows with each mid-circuit
/// readout, so keep it to small programs.
pub fn final_branches(program: &ElaboratedProgram) -> Result<Vec<(f64, JointState)>, RuntimeError> {
    if program.registers.is_empty() {
        return Ok(Vec::new());
    }
    let state = init_zero(program.registers.clone())?;
    let mut out = Vec::new();
    walk_branches(program, 0, 1.0, state, &mut |_, _, _, _| {}, &mut out)?;
    Ok(out)
}

/// The exact outcome distribution each register's final `REA` would sample
/// from, averaged over all earlier measurement branches with their weights.
/// This is what a shot histogram converges to.
pub fn exact_rea_distributions(
    program: &ElaboratedProgram,
) -> Result<BTreeMap<String, Vec<f64>>, RuntimeError> {
    if program.registers.is_empty() {
        return Ok(BTreeMap::new());
    }
    let state = init_zero(program.registers.clone())?;
    let mut acc: HashMap<(usize, usize), Vec<f64>> = HashMap::new();
    let mut sink = Vec::new();
    walk_branches(
        program,
        0,
        1.0,
        state,
        &mut |index, reg, weight, state| {
            let marginal = state.marginal(reg);
            let entry = acc
                .entry((index, reg))
                .or_insert_with(|| vec![0.0; marginal.len()]);
            for (slot, p) in entry.iter_mut().zip(marginal.iter()) {
                *slot += weight * p;
            }
        },
        &mut sink,
    )?;
    let mut final_site: HashMap<usize, usize> = HashMap::new();
    for &(index, reg) in acc.keys() {
        let slot = final_site.entry(reg).or_insert(index);
        *slot = (*slot).max(index);
    }
    Ok(final_site
        .into_iter()
        .map(|(reg, index)| {
            let name = program.registers[reg].name.clone();
            (name, acc[&(index, reg)].clone())
        })
        .collect())
}

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

fn mod_pow(base: u64, mut exp: u64, modulus: u64) -> u64 {
    debug_assert!(modulus >= 1);
    let mut result: u128 = 1 % modulus as u128;
    let mut base = base as u128 % modulus as u128;
    while exp > 0 {
        if exp & 1 == 1 {
            result = result * base % modulus as u128;
        }
        base = base * base % modulus as u128;
        exp >>= 1;
    }
    result as u64
}

/// Denominators of the continued-fraction convergents of `num/den`, in
/// increasing order, stopping once they exceed `max_den`.
fn convergent_denominators(mut num: u64, mut den: u64, max_den: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let (mut q_prev2, mut q_prev1) = (1u64, 0u64);
    while den != 0 {
        let a = num / den;
        let q = match a.checked_mul(q_prev1).and_then(|x| x.checked_add(q_prev2)) {
            Some(q) => q,
            None => break,
        };
        if q > max_den {
            break;
        }
        out.push(q);
        let r = num % den;
        num = den;
        den = r;
        q_prev2 = q_prev1;
        q_prev1 = q;
    }
    out
}

/// Infers the multiplicative order of `base` modulo `modulus` from a
/// readout `k` of an `n_bits`-qubit register: candidate denominators come
/// from the continued-fraction convergents of `k / 2^n_bits` (capped at the
/// modulus) plus `round(2^n_bits / k)`, each verified by modular
/// exponentiation; the smallest verified candidate wins. `k = 0` carries no
/// information and returns `None`.
pub fn infer_order(k: u64, n_bits: u32, modulus: u64, base: u64) -> Option<u64> {
    assert!(n_bits < 64, "register too wide");
    let q = 1u64 << n_bits;
    assert!(k < q, "readout exceeds the register range");
    if k == 0 {
        return None;
    }
    let mut candidates: std::collections::BTreeSet<u64> =
        convergent_denominators(k, q, modulus).into_iter().collect();
    let rounded = ((2 * q as u128 + k as u128) / (2 * k as u128)) as u64;
    candidates.insert(rounded);
    candidates
        .into_iter()
        .filter(|&r| r >= 1)
        .find(|&r| mod_pow(base, r, modulus) == 1)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FactorOutcome {
    /// A nontrivial factor of the modulus.
    Factor(u64),
    /// The order is odd, so the gcd trick does not apply; rerun with a
    /// different base.
    OddOrder,
    /// Both gcd candidates were 1 or the modulus itself.
    TrivialFactor,
}

/// The classical tail of the factoring pipeline: given `base^order = 1
/// (mod modulus)` with even order, `gcd(base^(order/2) - 1, modulus)` (or
/// the `+ 1` variant) yields a factor of the modulus.
pub fn extract_factor(modulus: u64, base: u64, order: u64) -> Result<FactorOutcome, RuntimeError> {
    if modulus < 2 || order == 0 || mod_pow(base, order, modulus) != 1 {
        return Err(RuntimeError::Contract(format!(
            "{base}^{order} is not 1 modulo {modulus}"
        )));
    }
    if order % 2 == 1 {
        return Ok(FactorOutcome::OddOrder);
    }
    let half = mod_pow(base, order / 2, modulus);
    let minus = (half + modulus - 1) % modulus;
    let plus = (half + 1) % modulus;
    for g in [gcd(minus, modulus), gcd(plus, modulus)] {
        if g != 1 && g != modulus {
            return Ok(FactorOutcome::Factor(g));
        }
    }
    Ok(FactorOutcome::TrivialFactor)
}
