//! Semantics of the six register instructions: INI, QFT, REA, ENT, DIF, PHA.
//!
//! All operations are pure functions from states to states. Randomness for
//! the measuring instructions (REA, and INI on an entangled register) is a
//! single uniform draw supplied by the caller; the virtual machine owns the
//! stream, so this module holds no random state.

use crate::state::{JointState, StateError, Unitary};
use num_complex::Complex64;
use std::f64::consts::TAU;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum IsaError {
    #[error("mapping is undefined for reachable source value {j}")]
    MapDomain { j: u64 },
    #[error("mapping image {image} of {j} does not fit the destination register (dimension {dim})")]
    MapRange { j: u64, image: u64, dim: u64 },
    #[error("index {index} is out of range for dimension {dim}")]
    IndexOutOfRange { index: u64, dim: u64 },
    #[error("phase angle must be finite")]
    NonFinitePhase,
    #[error("modular-exponentiation base must be positive")]
    ZeroBase,
    #[error("modulus must be at least 2, got {modulus}")]
    BadModulus { modulus: u64 },
    #[error(transparent)]
    State(#[from] StateError),
}

/// A phase rotation angle in radians, kept finite by construction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseAngle(f64);

impl PhaseAngle {
    pub fn radians(value: f64) -> Result<Self, IsaError> {
        if !value.is_finite() {
            return Err(IsaError::NonFinitePhase);
        }
        Ok(PhaseAngle(value))
    }

    pub fn pi() -> Self {
        PhaseAngle(std::f64::consts::PI)
    }

    pub fn value(self) -> f64 {
        self.0
    }

    /// The unit phasor `e^{i phi}`.
    pub fn factor(self) -> Complex64 {
        Complex64::from_polar(1.0, self.0)
    }
}

/// How ENT associates destination values with source values.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum MapKind {
    /// `j -> base^j mod modulus`, defined for every `j >= 0`.
    ModExp { base: u64, modulus: u64 },
    /// An explicit table.
    Table,
}

/// The transform mapping `M` of the entangling instruction, resolved to an
/// image table over its domain `0..domain`.
#[derive(Debug, Clone, PartialEq)]
pub struct MappingSpec {
    kind: MapKind,
    images: Vec<u64>,
    codomain: u64,
}

impl MappingSpec {
    /// Modular exponentiation, precomputed over `0..domain`.
    pub fn mod_exp(base: u64, modulus: u64, domain: u64) -> Result<Self, IsaError> {
        if base == 0 {
            return Err(IsaError::ZeroBase);
        }
        if modulus < 2 {
            return Err(IsaError::BadModulus { modulus });
        }
        let mut images = Vec::with_capacity(domain as usize);
        let mut cur: u64 = 1 % modulus;
        for _ in 0..domain {
            images.push(cur);
            cur = ((cur as u128 * base as u128) % modulus as u128) as u64;
        }
        let codomain = images.iter().copied().max().map_or(1, |m| m + 1);
        Ok(MappingSpec { kind: MapKind::ModExp { base, modulus }, images, codomain })
    }

    /// An explicit image table; `images[j]` is the image of `j`.
    pub fn table(images: Vec<u64>) -> Self {
        let codomain = images.iter().copied().max().map_or(1, |m| m + 1);
        MappingSpec { kind: MapKind::Table, images, codomain }
    }

    pub fn kind(&self) -> &MapKind {
        &self.kind
    }

    pub fn domain(&self) -> u64 {
        self.images.len() as u64
    }

    /// Exclusive upper bound of the images actually taken.
    pub fn codomain(&self) -> u64 {
        self.codomain
    }

    pub fn image(&self, j: u64) -> Option<u64> {
        self.images.get(j as usize).copied()
    }

    pub fn images(&self) -> &[u64] {
        &self.images
    }
}

/// INI: force a register to `|0>`.
///
/// On an entangled register this measures first (consuming the caller's
/// draw) and then permutes the observed value to zero, which keeps the
/// operation unitary-after-measurement instead of projecting onto a branch
/// that may have zero probability. On a fresh register it is a plain reset
/// and the draw is ignored in effect.
pub fn op_ini(state: &JointState, reg: usize, draw: f64) -> JointState {
    let (value, collapsed) = op_rea(state, reg, draw);
    if value == 0 {
        return collapsed;
    }
    // Every surviving point holds `value` in this coordinate, so the
    // subtraction permutation c -> (c - value) mod dim just writes zero.
    collapsed.permute_points(|layout, key| layout.set_coord(key, reg, 0))
}

/// The transform behind QFT: `b_k = (1/sqrt(N)) sum_j a_j e^{i 2 pi j k / N}`.
///
/// Direct summation against a precomputed table of the N-th roots of unity;
/// columns are usually sparse, so zero inputs are skipped.
pub fn qft_coefficients(a: &[Complex64]) -> Vec<Complex64> {
    let n = a.len();
    assert!(n >= 1, "QFT needs at least one coefficient");
    if n == 1 {
        return a.to_vec();
    }
    let roots: Vec<Complex64> = (0..n)
        .map(|j| Complex64::from_polar(1.0, TAU * j as f64 / n as f64))
        .collect();
    let scale = 1.0 / (n as f64).sqrt();
    let zero = Complex64::new(0.0, 0.0);
    (0..n)
        .map(|k| {
            let mut acc = zero;
            for (j, &aj) in a.iter().enumerate() {
                if aj != zero {
                    acc += aj * roots[(j * k) % n];
                }
            }
            acc * scale
        })
        .collect()
}

/// The QFT as an explicit matrix, `Q_{kj} = e^{i 2 pi j k / N} / sqrt(N)`.
pub fn qft_matrix(n: usize) -> Unitary {
    let scale = 1.0 / (n as f64).sqrt();
    let mut data = Vec::with_capacity(n * n);
    for k in 0..n {
        for j in 0..n {
            data.push(Complex64::from_polar(scale, TAU * ((j * k) % n) as f64 / n as f64));
        }
    }
    Unitary::new(n, data).expect("QFT matrix is unitary")
}

/// QFT applied to one register of the joint state.
pub fn op_qft(state: &JointState, reg: usize) -> JointState {
    state.transform_register(reg, |col| {
        let out = qft_coefficients(col);
        col.copy_from_slice(&out);
    })
}

/// ENT: entangle `src` into `dst` through the mapping, as the basis
/// permutation `|j, v> -> |j, (v + M(j)) mod dim(dst)>`.
///
/// With `dst` at `|0>` this pairs every source value `j` with `|M(j)>`;
/// because it is a permutation it is unitary for every input state, and a
/// second application with the same map into a 1-qubit register undoes the
/// first (`M(j) + M(j)` is 0 mod 2).
pub fn op_ent(state: &JointState, src: usize, dst: usize, map: &MappingSpec) -> Result<JointState, IsaError> {
    let layout = state.layout();
    assert!(src < layout.len() && dst < layout.len(), "register index out of range");
    assert_ne!(src, dst, "ENT needs two distinct registers");
    let dst_dim = layout.dim(dst);
    // Validate the reachable domain before moving anything.
    for (key, _) in state.keys() {
        let j = state.coord_of_key(key, src);
        let image = map.image(j).ok_or(IsaError::MapDomain { j })?;
        if image >= dst_dim {
            return Err(IsaError::MapRange { j, image, dim: dst_dim });
        }
    }
    Ok(state.permute_points(|layout, key| {
        let j = layout.coord(key, src);
        let v = layout.coord(key, dst);
        let image = map.image(j).expect("validated above");
        layout.set_coord(key, dst, (v + image) % dst_dim)
    }))
}

/// DIF: the diffusion matrix with `2/N` off the diagonal and `2/N - 1` on
/// it, i.e. `(2/N) J - I`. Symmetric and its own inverse.
pub fn dif_matrix(n: usize) -> Unitary {
    assert!(n >= 2, "diffusion needs dimension at least 2");
    let off = 2.0 / n as f64;
    let mut data = vec![Complex64::new(off, 0.0); n * n];
    for i in 0..n {
        data[i * n + i] = Complex64::new(off - 1.0, 0.0);
    }
    Unitary::new(n, data).expect("diffusion matrix is unitary")
}

/// DIF applied to a register. `n` must equal the register dimension; the
/// instruction takes the size separately, so programs must size registers
/// to the search space (checked statically by the elaborator too).
pub fn op_dif(state: &JointState, reg: usize, n: u64) -> Result<JointState, IsaError> {
    let layout = state.layout();
    assert!(reg < layout.len(), "register index out of range");
    let dim = layout.dim(reg);
    if n != dim {
        return Err(IsaError::State(StateError::DimensionMismatch {
            register: layout.register(reg).name.clone(),
            dim,
            got: n,
        }));
    }
    // Reflection about the mean: out_k = (2/N) * sum - in_k.
    let inv = 2.0 / dim as f64;
    Ok(state.transform_register(reg, |col| {
        let sum: Complex64 = col.iter().sum();
        for a in col.iter_mut() {
            *a = sum * inv - *a;
        }
    }))
}

/// PHA as an explicit matrix: identity with `e^{i phi}` at `index`.
pub fn pha_matrix(n: usize, phi: PhaseAngle, index: u64) -> Result<Unitary, IsaError> {
    if index >= n as u64 {
        return Err(IsaError::IndexOutOfRange { index, dim: n as u64 });
    }
    let mut data = vec![Complex64::new(0.0, 0.0); n * n];
    for i in 0..n {
        data[i * n + i] = Complex64::new(1.0, 0.0);
    }
    let i = index as usize;
    data[i * n + i] = phi.factor();
    Ok(Unitary::new(n, data).expect("phase matrix is unitary"))
}

/// PHA: multiply the branches where `reg` holds `index` by `e^{i phi}`.
pub fn op_pha(state: &JointState, reg: usize, phi: PhaseAngle, index: u64) -> Result<JointState, IsaError> {
    let layout = state.layout();
    assert!(reg < layout.len(), "register index out of range");
    let dim = layout.dim(reg);
    if index >= dim {
        return Err(IsaError::IndexOutOfRange { index, dim });
    }
    Ok(state.scale_where(reg, |v| v == index, phi.factor()))
}

/// REA: sample a value from the register's marginal by inverse CDF over
/// ascending coordinate values, then collapse onto it. `draw` is uniform
/// in `[0, 1)`. Returns the observed value and the collapsed state.
pub fn op_rea(state: &JointState, reg: usize, draw: f64) -> (u64, JointState) {
    let probs = state.marginal_sparse(reg);
    debug_assert!(!probs.is_empty(), "state has empty support");
    let mut chosen = *probs.keys().next_back().expect("nonempty support");
    let mut acc = 0.0f64;
    for (&value, &p) in &probs {
        acc += p;
        if draw < acc {
            chosen = value;
            break;
        }
    }
    let collapsed = state
        .collapse(reg, chosen)
        .expect("sampled value has positive probability");
    (chosen, collapsed)
}
