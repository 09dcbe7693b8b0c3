//! The ANN instruction: classical simulated annealing over an Ising model.
//!
//! This backend minimizes the dimensionless energy
//! `E(s) = sum_i h_i s_i + sum_{(i,j)} J_ij s_i s_j` with spins in {-1, +1}
//! by single-flip Metropolis moves under a geometric cooling schedule.
//! It is a classical simulation of the annealing *outcome*, not of
//! adiabatic dynamics, and like any annealer it is a heuristic: it may
//! return a configuration above the true ground state. Small instances can
//! be checked against [`brute_force_ground`].

use crate::rng::derive_seed;
use rand::Rng;
use serde::Serialize;
use thiserror::Error;

/// Exhaustive search bound for [`brute_force_ground`].
pub const BRUTE_FORCE_MAX: usize = 20;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AnnealError {
    #[error("brute force handles at most {max} spins, model has {n}")]
    TooLarge { n: usize, max: usize },
    #[error("spin configuration has {got} entries, model has {expected}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("edge ({i}, {j}) must satisfy i < j < n")]
    InvalidEdge { i: usize, j: usize },
    #[error("duplicate edge ({i}, {j})")]
    DuplicateEdge { i: usize, j: usize },
    #[error("model coefficients must be finite")]
    NonFinite,
    #[error("spins must be +1 or -1")]
    BadSpin,
    #[error("schedule: {0}")]
    BadSchedule(String),
    #[error("model file line {line}: {message}")]
    Parse { line: usize, message: String },
}

/// Vertex fields `h` and edge couplings `J` over a graph.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IsingModel {
    h: Vec<f64>,
    edges: Vec<(usize, usize, f64)>,
}

impl IsingModel {
    /// `h[i]` is the field on vertex `i`; edges must have `i < j < h.len()`
    /// and appear at most once.
    pub fn new(h: Vec<f64>, edges: Vec<(usize, usize, f64)>) -> Result<Self, AnnealError> {
        if h.iter().any(|v| !v.is_finite()) || edges.iter().any(|&(_, _, v)| !v.is_finite()) {
            return Err(AnnealError::NonFinite);
        }
        let n = h.len();
        for (k, &(i, j, _)) in edges.iter().enumerate() {
            if i >= j || j >= n {
                return Err(AnnealError::InvalidEdge { i, j });
            }
            if edges[..k].iter().any(|&(a, b, _)| (a, b) == (i, j)) {
                return Err(AnnealError::DuplicateEdge { i, j });
            }
        }
        Ok(IsingModel { h, edges })
    }

    /// Parses the model file format: `h <i> <value>` and `J <i> <j> <value>`
    /// lines, `#` comments. The vertex count is one past the largest index
    /// mentioned; vertices without an `h` line get field zero.
    pub fn from_text(text: &str) -> Result<Self, AnnealError> {
        let mut fields: Vec<(usize, f64, usize)> = Vec::new(); // (i, value, line)
        let mut edges: Vec<(usize, usize, f64)> = Vec::new();
        let mut max_index: Option<usize> = None;
        for (lineno, raw) in text.lines().enumerate() {
            let line = lineno + 1;
            let body = raw.split('#').next().unwrap_or("").trim();
            if body.is_empty() {
                continue;
            }
            let parts: Vec<&str> = body.split_whitespace().collect();
            let parse_index = |s: &str| -> Result<usize, AnnealError> {
                s.parse().map_err(|_| AnnealError::Parse {
                    line,
                    message: format!("bad vertex index `{s}`"),
                })
            };
            let parse_value = |s: &str| -> Result<f64, AnnealError> {
                let v: f64 = s.parse().map_err(|_| AnnealError::Parse {
                    line,
                    message: format!("bad value `{s}`"),
                })?;
                if !v.is_finite() {
                    return Err(AnnealError::Parse { line, message: "value must be finite".into() });
                }
                Ok(v)
            };
            match parts.as_slice() {
                ["h", i, v] => {
                    let i = parse_index(i)?;
                    let v = parse_value(v)?;
                    if fields.iter().any(|&(j, _, _)| j == i) {
                        return Err(AnnealError::Parse {
                            line,
                            message: format!("duplicate field for vertex {i}"),
                        });
                    }
                    max_index = Some(max_index.map_or(i, |m| m.max(i)));
                    fields.push((i, v, line));
                }
                ["J", i, j, v] => {
                    let (mut i, mut j) = (parse_index(i)?, parse_index(j)?);
                    let v = parse_value(v)?;
                    if i == j {
                        return Err(AnnealError::Parse {
                            line,
                            message: format!("self-coupling J {i} {i}"),
                        });
                    }
                    if i > j {
                        std::mem::swap(&mut i, &mut j);
                    }
                    if edges.iter().any(|&(a, b, _)| (a, b) == (i, j)) {
                        return Err(AnnealError::Parse {
                            line,
                            message: format!("duplicate coupling J {i} {j}"),
                        });
                    }
                    max_index = Some(max_index.map_or(j, |m| m.max(j)));
                    edges.push((i, j, v));
                }
                _ => {
                    return Err(AnnealError::Parse {
                        line,
                        message: format!("expected `h <i> <value>` or `J <i> <j> <value>`, got `{body}`"),
                    })
                }
            }
        }
        let n = max_index.map_or(0, |m| m + 1);
        let mut h = vec![0.0; n];
        for (i, v, _) in fields {
            h[i] = v;
        }
        IsingModel::new(h, edges)
    }

    pub fn vertex_count(&self) -> usize {
        self.h.len()
    }

    pub fn fields(&self) -> &[f64] {
        &self.h
    }

    pub fn edges(&self) -> &[(usize, usize, f64)] {
        &self.edges
    }

    /// `E(s) = sum h_i s_i + sum J_ij s_i s_j`.
    pub fn energy(&self, s: &SpinConfig) -> Result<f64, AnnealError> {
        if s.len() != self.h.len() {
            return Err(AnnealError::DimensionMismatch { expected: self.h.len(), got: s.len() });
        }
        let spins = s.spins();
        let mut e = 0.0;
        for (i, &hi) in self.h.iter().enumerate() {
            e += hi * spins[i] as f64;
        }
        for &(i, j, v) in &self.edges {
            e += v * (spins[i] as f64) * (spins[j] as f64);
        }
        Ok(e)
    }

    fn adjacency(&self) -> Vec<Vec<(usize, f64)>> {
        let mut adj = vec![Vec::new(); self.h.len()];
        for &(i, j, v) in &self.edges {
            adj[i].push((j, v));
            adj[j].push((i, v));
        }
        adj
    }
}

/// Spins, each exactly +1 or -1.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SpinConfig(Vec<i8>);

impl SpinConfig {
    pub fn new(spins: Vec<i8>) -> Result<Self, AnnealError> {
        if spins.iter().any(|&s| s != 1 && s != -1) {
            return Err(AnnealError::BadSpin);
        }
        Ok(SpinConfig(spins))
    }

    pub fn spins(&self) -> &[i8] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// Geometric cooling ladder plus restart count.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AnnealSchedule {
    pub t_initial: f64,
    pub t_final: f64,
    pub sweeps: u64,
    pub restarts: u64,
}

impl AnnealSchedule {
    pub fn new(t_initial: f64, t_final: f64, sweeps: u64, restarts: u64) -> Result<Self, AnnealError> {
        if !(t_initial.is_finite() && t_final.is_finite()) || t_final <= 0.0 || t_initial <= t_final {
            return Err(AnnealError::BadSchedule(
                "need t_initial > t_final > 0".into(),
            ));
        }
        if sweeps == 0 || restarts == 0 {
            return Err(AnnealError::BadSchedule("sweeps and restarts must be positive".into()));
        }
        Ok(AnnealSchedule { t_initial, t_final, sweeps, restarts })
    }

    /// Default: cool 2.0 -> 0.01 over `200 * n` sweeps with 8 restarts.
    /// Empirically enough for random desk-scale instances; every knob is
    /// tunable from the command line.
    pub fn default_for(n: usize) -> Self {
        AnnealSchedule {
            t_initial: 2.0,
            t_final: 0.01,
            sweeps: 200 * n.max(1) as u64,
            restarts: 8,
        }
    }

    fn temperature(&self, sweep: u64) -> f64 {
        if self.sweeps <= 1 {
            return self.t_initial;
        }
        let frac = sweep as f64 / (self.sweeps - 1) as f64;
        self.t_initial * (self.t_final / self.t_initial).powf(frac)
    }
}

/// Exhaustive ground state for models of at most [`BRUTE_FORCE_MAX`] spins.
/// Ties are broken toward the lexicographically smallest configuration,
/// with -1 ordered before +1.
pub fn brute_force_ground(model: &IsingModel) -> Result<(SpinConfig, f64), AnnealError> {
    let n = model.vertex_count();
    if n > BRUTE_FORCE_MAX {
        return Err(AnnealError::TooLarge { n, max: BRUTE_FORCE_MAX });
    }
    if n == 0 {
        return Ok((SpinConfig(Vec::new()), 0.0));
    }
    let mut best_spins = Vec::new();
    let mut best_e = f64::INFINITY;
    let mut spins = vec![0i8; n];
    for code in 0u64..(1u64 << n) {
        for (i, s) in spins.iter_mut().enumerate() {
            // Bit order makes ascending codes enumerate configurations in
            // lexicographic order with -1 before +1, so the first strict
            // minimum is the tie-break winner.
            *s = if (code >> (n - 1 - i)) & 1 == 1 { 1 } else { -1 };
        }
        let e = model.energy(&SpinConfig(spins.clone()))?;
        if e < best_e {
            best_e = e;
            best_spins = spins.clone();
        }
    }
    Ok((SpinConfig(best_spins), best_e))
}

/// Flip energy for spin `i`: `E(after) - E(before)`.
fn flip_delta(model: &IsingModel, adj: &[Vec<(usize, f64)>], spins: &[i8], i: usize) -> f64 {
    let mut local = model.fields()[i];
    for &(j, v) in &adj[i] {
        local += v * spins[j] as f64;
    }
    -2.0 * spins[i] as f64 * local
}

/// Simulated annealing. Deterministic for a given `(model, schedule, seed)`
/// triple: restart `r` runs on the child seed `derive_seed(seed, r)`, and
/// the best configuration across restarts wins, first found on ties. The
/// reported energy is re-evaluated exactly on the winning configuration.
pub fn anneal(model: &IsingModel, schedule: &AnnealSchedule, seed: u64) -> (SpinConfig, f64) {
    let n = model.vertex_count();
    if n == 0 {
        return (SpinConfig(Vec::new()), 0.0);
    }
    let adj = model.adjacency();
    let mut best: Option<(f64, Vec<i8>)> = None;
    for restart in 0..schedule.restarts {
        let mut rng = crate::rng::stream(derive_seed(seed, restart));
        let mut spins: Vec<i8> = (0..n).map(|_| if rng.gen::<bool>() { 1 } else { -1 }).collect();
        let mut current = model
            .energy(&SpinConfig(spins.clone()))
            .expect("model and spins have matching size");
        let mut restart_best = (current, spins.clone());
        for sweep in 0..schedule.sweeps {
            let t = schedule.temperature(sweep);
            for _ in 0..n {
                let i = rng.gen_range(0..n);
                let de = flip_delta(model, &adj, &spins, i);
                if de <= 0.0 || rng.gen::<f64>() < (-de / t).exp() {
                    spins[i] = -spins[i];
                    current += de;
                    if current < restart_best.0 {
                        restart_best = (current, spins.clone());
                    }
                }
            }
        }
        let exact = model
            .energy(&SpinConfig(restart_best.1.clone()))
            .expect("model and spins have matching size");
        if best.as_ref().is_none_or(|(e, _)| exact < *e) {
            best = Some((exact, restart_best.1));
        }
    }
    let (e, spins) = best.expect("at least one restart");
    (SpinConfig(spins), e)
}
