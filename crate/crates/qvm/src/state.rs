//! Sparse multi-register quantum states.
//!
//! A [`JointState`] maps basis points (one coordinate per declared register)
//! to complex amplitudes; points that are absent carry amplitude zero. The
//! representation is sparse because the entangling instruction produces
//! states whose support is bounded by the source register dimension, far
//! below the full joint dimension. Register-local transforms densify one
//! coordinate at a time and never materialize the joint space.
//!
//! Basis points are packed into a single `u64` key, first register in the
//! most significant bits, so that numeric key order equals lexicographic
//! basis-point order. Total width is capped well below 64 bits.

use num_complex::Complex64;
use std::collections::{BTreeMap, HashMap};
use std::sync::Arc;
use thiserror::Error;

/// A complex probability amplitude.
pub type Amplitude = Complex64;

/// Stored amplitudes with squared magnitude below this are dropped after
/// every instruction. Bounds memory without measurable effect at the 1e-9
/// tolerances the simulator is tested to.
pub const PRUNE_THRESHOLD: f64 = 1e-24;

/// Deviation of the squared norm from 1 that triggers renormalization.
/// Keeping the trigger tight stops floating-point drift; skipping the
/// rescale inside the trigger keeps permutation instructions bit-exact.
const RENORM_TRIGGER: f64 = 1e-12;

/// Tolerance for the unitarity check at matrix construction.
pub const UNITARITY_TOL: f64 = 1e-9;

/// Default per-register width ceiling (qubits).
pub const MAX_REGISTER_WIDTH: u32 = 24;
/// Default ceiling on the summed width of all registers.
pub const MAX_TOTAL_WIDTH: u32 = 26;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum StateError {
    #[error("register `{name}` is {width} qubits wide, the ceiling is {max}")]
    WidthExceeded { name: String, width: u32, max: u32 },
    #[error("registers total {total} qubits, the ceiling is {max}")]
    TotalWidthExceeded { total: u32, max: u32 },
    #[error("register `{name}` must be at least one qubit wide")]
    ZeroWidth { name: String },
    #[error("duplicate register name `{name}`")]
    DuplicateRegister { name: String },
    #[error("a state needs at least one register")]
    EmptyRegisters,
    #[error("transform has dimension {got} but register `{register}` has dimension {dim}")]
    DimensionMismatch { register: String, dim: u64, got: u64 },
    #[error("matrix is not unitary (max deviation {max_dev:.3e})")]
    NotUnitary { max_dev: f64 },
    #[error("collapse of register `{register}` onto value {value}, which has zero probability")]
    ZeroProbabilityBranch { register: String, value: u64 },
    #[error("coordinate {value} is out of range for register `{register}` (dimension {dim})")]
    CoordinateOutOfRange { register: String, value: u64, dim: u64 },
    #[error("basis point has {got} coordinates, expected {expected}")]
    ArityMismatch { expected: usize, got: usize },
    #[error("amplitudes must be finite")]
    NonFiniteAmplitude,
    #[error("state has zero total weight")]
    ZeroNorm,
}

/// A named quantum register of `width` qubits.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct RegisterDecl {
    pub name: String,
    pub width: u32,
}

impl RegisterDecl {
    pub fn new(name: impl Into<String>, width: u32) -> Self {
        RegisterDecl { name: name.into(), width }
    }

    /// Number of basis values the register can hold, `2^width`.
    pub fn dim(&self) -> u64 {
        1u64 << self.width
    }
}

/// Validated, ordered register declarations with the key packing layout.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RegisterLayout {
    regs: Vec<RegisterDecl>,
    shifts: Vec<u32>,
    total_bits: u32,
}

impl RegisterLayout {
    pub fn new(regs: Vec<RegisterDecl>) -> Result<Self, StateError> {
        Self::with_limits(regs, MAX_REGISTER_WIDTH, MAX_TOTAL_WIDTH)
    }

    pub fn with_limits(
        regs: Vec<RegisterDecl>,
        max_width: u32,
        max_total: u32,
    ) -> Result<Self, StateError> {
        if regs.is_empty() {
            return Err(StateError::EmptyRegisters);
        }
        let mut total = 0u32;
        for (i, r) in regs.iter().enumerate() {
            if r.width == 0 {
                return Err(StateError::ZeroWidth { name: r.name.clone() });
            }
            if r.width > max_width {
                return Err(StateError::WidthExceeded {
                    name: r.name.clone(),
                    width: r.width,
                    max: max_width,
                });
            }
            if regs[..i].iter().any(|p| p.name == r.name) {
                return Err(StateError::DuplicateRegister { name: r.name.clone() });
            }
            total += r.width;
        }
        if total > max_total {
            return Err(StateError::TotalWidthExceeded { total, max: max_total });
        }
        // Register 0 occupies the most significant bits.
        let mut shifts = vec![0u32; regs.len()];
        let mut acc = 0u32;
        for i in (0..regs.len()).rev() {
            shifts[i] = acc;
            acc += regs[i].width;
        }
        Ok(RegisterLayout { regs, shifts, total_bits: total })
    }

    pub fn len(&self) -> usize {
        self.regs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.regs.is_empty()
    }

    pub fn registers(&self) -> &[RegisterDecl] {
        &self.regs
    }

    pub fn register(&self, reg: usize) -> &RegisterDecl {
        &self.regs[reg]
    }

    pub fn dim(&self, reg: usize) -> u64 {
        self.regs[reg].dim()
    }

    pub fn total_bits(&self) -> u32 {
        self.total_bits
    }

    /// Joint dimension `2^total_bits`.
    pub fn total_dim(&self) -> u64 {
        1u64 << self.total_bits
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.regs.iter().position(|r| r.name == name)
    }

    pub(crate) fn coord(&self, key: u64, reg: usize) -> u64 {
        (key >> self.shifts[reg]) & (self.dim(reg) - 1)
    }

    pub(crate) fn set_coord(&self, key: u64, reg: usize, value: u64) -> u64 {
        let mask = (self.dim(reg) - 1) << self.shifts[reg];
        (key & !mask) | (value << self.shifts[reg])
    }

    fn pack(&self, values: &[u64]) -> Result<u64, StateError> {
        if values.len() != self.regs.len() {
            return Err(StateError::ArityMismatch {
                expected: self.regs.len(),
                got: values.len(),
            });
        }
        let mut key = 0u64;
        for (i, &v) in values.iter().enumerate() {
            if v >= self.dim(i) {
                return Err(StateError::CoordinateOutOfRange {
                    register: self.regs[i].name.clone(),
                    value: v,
                    dim: self.dim(i),
                });
            }
            key |= v << self.shifts[i];
        }
        Ok(key)
    }

    pub fn unpack(&self, key: u64) -> Vec<u64> {
        (0..self.regs.len()).map(|i| self.coord(key, i)).collect()
    }
}

/// A square matrix verified unitary at construction.
#[derive(Debug, Clone, PartialEq)]
pub struct Unitary {
    dim: usize,
    data: Vec<Complex64>, // row major
}

impl Unitary {
    /// Builds the matrix from row-major entries, rejecting anything that is
    /// not unitary within [`UNITARITY_TOL`].
    pub fn new(dim: usize, data: Vec<Complex64>) -> Result<Self, StateError> {
        assert_eq!(data.len(), dim * dim, "matrix data must be dim*dim entries");
        if data.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
            return Err(StateError::NonFiniteAmplitude);
        }
        let mut max_dev = 0.0f64;
        for i in 0..dim {
            for j in 0..dim {
                // (U†U)_{ij} = sum_k conj(U_{ki}) U_{kj}
                let mut acc = Complex64::new(0.0, 0.0);
                for k in 0..dim {
                    acc += data[k * dim + i].conj() * data[k * dim + j];
                }
                let target = if i == j { 1.0 } else { 0.0 };
                max_dev = max_dev.max((acc - target).norm());
            }
        }
        if max_dev > UNITARITY_TOL {
            return Err(StateError::NotUnitary { max_dev });
        }
        Ok(Unitary { dim, data })
    }

    pub fn identity(dim: usize) -> Self {
        let mut data = vec![Complex64::new(0.0, 0.0); dim * dim];
        for i in 0..dim {
            data[i * dim + i] = Complex64::new(1.0, 0.0);
        }
        Unitary { dim, data }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn at(&self, row: usize, col: usize) -> Complex64 {
        self.data[row * self.dim + col]
    }

    /// Conjugate transpose.
    pub fn dagger(&self) -> Unitary {
        let mut data = vec![Complex64::new(0.0, 0.0); self.dim * self.dim];
        for r in 0..self.dim {
            for c in 0..self.dim {
                data[c * self.dim + r] = self.data[r * self.dim + c].conj();
            }
        }
        Unitary { dim: self.dim, data }
    }

    /// `out = M * v`. Skips zero inputs, which dominates on sparse columns.
    pub fn mul_vec(&self, v: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(v.len(), self.dim);
        let zero = Complex64::new(0.0, 0.0);
        let mut out = vec![zero; self.dim];
        for (c, &amp) in v.iter().enumerate() {
            if amp == zero {
                continue;
            }
            for (r, slot) in out.iter_mut().enumerate() {
                *slot += self.data[r * self.dim + c] * amp;
            }
        }
        out
    }
}

/// Sparse joint state of all declared registers.
///
/// Values are immutable from the caller's perspective: every operation
/// returns a new state, so states can be shared read-only across threads.
#[derive(Debug, Clone)]
pub struct JointState {
    layout: Arc<RegisterLayout>,
    amps: HashMap<u64, Complex64>,
}

/// The all-zeros state `|0,0,...,0>` over the given registers.
pub fn init_zero(registers: Vec<RegisterDecl>) -> Result<JointState, StateError> {
    let layout = Arc::new(RegisterLayout::new(registers)?);
    Ok(JointState::zero(layout))
}

impl JointState {
    pub fn zero(layout: Arc<RegisterLayout>) -> JointState {
        let mut amps = HashMap::new();
        amps.insert(0u64, Complex64::new(1.0, 0.0));
        JointState { layout, amps }
    }

    /// Builds a state from explicit basis-point amplitudes. The result is
    /// normalized; entries below the prune threshold are dropped.
    pub fn from_amplitudes<I, V>(layout: Arc<RegisterLayout>, entries: I) -> Result<JointState, StateError>
    where
        I: IntoIterator<Item = (V, Complex64)>,
        V: AsRef<[u64]>,
    {
        let mut amps = HashMap::new();
        for (point, amp) in entries {
            if !amp.re.is_finite() || !amp.im.is_finite() {
                return Err(StateError::NonFiniteAmplitude);
            }
            let key = layout.pack(point.as_ref())?;
            *amps.entry(key).or_insert(Complex64::new(0.0, 0.0)) += amp;
        }
        let norm_sqr: f64 = amps.values().map(|a| a.norm_sqr()).sum();
        if norm_sqr <= 0.0 {
            return Err(StateError::ZeroNorm);
        }
        let scale = 1.0 / norm_sqr.sqrt();
        if (norm_sqr - 1.0).abs() > RENORM_TRIGGER {
            for a in amps.values_mut() {
                *a *= scale;
            }
        }
        amps.retain(|_, a| a.norm_sqr() >= PRUNE_THRESHOLD);
        Ok(JointState { layout, amps })
    }

    pub fn layout(&self) -> &Arc<RegisterLayout> {
        &self.layout
    }

    /// Number of stored (nonzero) basis points.
    pub fn support_len(&self) -> usize {
        self.amps.len()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.values().map(|a| a.norm_sqr()).sum()
    }

    /// Amplitude at a basis point; absent points are zero.
    pub fn amplitude(&self, point: &[u64]) -> Complex64 {
        match self.layout.pack(point) {
            Ok(key) => self.amps.get(&key).copied().unwrap_or(Complex64::new(0.0, 0.0)),
            Err(_) => Complex64::new(0.0, 0.0),
        }
    }

    /// All stored points with their amplitudes, in lexicographic order.
    pub fn points(&self) -> Vec<(Vec<u64>, Complex64)> {
        let mut keys: Vec<u64> = self.amps.keys().copied().collect();
        keys.sort_unstable();
        keys.into_iter()
            .map(|k| (self.layout.unpack(k), self.amps[&k]))
            .collect()
    }

    /// Probability distribution of one register, marginalized over the rest.
    /// The vector has `dim(reg)` entries.
    pub fn marginal(&self, reg: usize) -> Vec<f64> {
        assert!(reg < self.layout.len(), "register index out of range");
        let mut probs = vec![0.0f64; self.layout.dim(reg) as usize];
        for (&key, amp) in &self.amps {
            probs[self.layout.coord(key, reg) as usize] += amp.norm_sqr();
        }
        probs
    }

    /// Sparse marginal: only coordinates with nonzero mass, ascending.
    pub fn marginal_sparse(&self, reg: usize) -> BTreeMap<u64, f64> {
        assert!(reg < self.layout.len(), "register index out of range");
        let mut probs = BTreeMap::new();
        for (&key, amp) in &self.amps {
            *probs.entry(self.layout.coord(key, reg)).or_insert(0.0) += amp.norm_sqr();
        }
        probs
    }

    /// Keeps only the branches where `reg` holds `value` and renormalizes.
    pub fn collapse(&self, reg: usize, value: u64) -> Result<JointState, StateError> {
        assert!(reg < self.layout.len(), "register index out of range");
        let mut amps: HashMap<u64, Complex64> = self
            .amps
            .iter()
            .filter(|(&key, _)| self.layout.coord(key, reg) == value)
            .map(|(&key, &amp)| (key, amp))
            .collect();
        let mass: f64 = amps.values().map(|a| a.norm_sqr()).sum();
        if amps.is_empty() || mass <= 0.0 {
            return Err(StateError::ZeroProbabilityBranch {
                register: self.layout.register(reg).name.clone(),
                value,
            });
        }
        if (mass - 1.0).abs() > RENORM_TRIGGER {
            let scale = 1.0 / mass.sqrt();
            for a in amps.values_mut() {
                *a *= scale;
            }
        }
        amps.retain(|_, a| a.norm_sqr() >= PRUNE_THRESHOLD);
        Ok(JointState { layout: Arc::clone(&self.layout), amps })
    }

    /// Applies a unitary to one register: for each group of points that
    /// differ only in that coordinate, the amplitude column is multiplied
    /// by the matrix.
    pub fn apply_on_register(&self, reg: usize, transform: &Unitary) -> Result<JointState, StateError> {
        assert!(reg < self.layout.len(), "register index out of range");
        let dim = self.layout.dim(reg);
        if transform.dim() as u64 != dim {
            return Err(StateError::DimensionMismatch {
                register: self.layout.register(reg).name.clone(),
                dim,
                got: transform.dim() as u64,
            });
        }
        Ok(self.transform_register(reg, |col| {
            let out = transform.mul_vec(col);
            col.copy_from_slice(&out);
        }))
    }

    /// Shared kernel for register-local transforms: gathers each group into
    /// a dense column over the register coordinate, lets `f` rewrite it in
    /// place, and scatters the result back, pruning and renormalizing.
    pub(crate) fn transform_register<F: Fn(&mut [Complex64])>(&self, reg: usize, f: F) -> JointState {
        let dim = self.layout.dim(reg) as usize;
        let field_mask = (dim as u64 - 1) << self.layout.shifts[reg];
        let mut groups: HashMap<u64, Vec<Complex64>> = HashMap::new();
        for (&key, &amp) in &self.amps {
            let base = key & !field_mask;
            let col = groups
                .entry(base)
                .or_insert_with(|| vec![Complex64::new(0.0, 0.0); dim]);
            col[self.layout.coord(key, reg) as usize] = amp;
        }
        let mut amps = HashMap::with_capacity(self.amps.len());
        let shift = self.layout.shifts[reg];
        for (base, mut col) in groups {
            f(&mut col);
            for (v, a) in col.iter().enumerate() {
                if a.norm_sqr() >= PRUNE_THRESHOLD {
                    amps.insert(base | ((v as u64) << shift), *a);
                }
            }
        }
        JointState { layout: Arc::clone(&self.layout), amps }.renormalized()
    }

    /// Rewrites basis points one at a time. `f` maps the coordinate vector
    /// in place; it must be injective on the support (a basis permutation),
    /// so amplitudes move without recombining.
    pub(crate) fn permute_points<F: Fn(&RegisterLayout, u64) -> u64>(&self, f: F) -> JointState {
        let mut amps = HashMap::with_capacity(self.amps.len());
        for (&key, &amp) in &self.amps {
            let prev = amps.insert(f(&self.layout, key), amp);
            debug_assert!(prev.is_none(), "permutation must be injective on the support");
        }
        JointState { layout: Arc::clone(&self.layout), amps }
    }

    /// Multiplies amplitudes selected by `pred` on one coordinate.
    pub(crate) fn scale_where<F: Fn(u64) -> bool>(&self, reg: usize, pred: F, factor: Complex64) -> JointState {
        let mut amps = HashMap::with_capacity(self.amps.len());
        for (&key, &amp) in &self.amps {
            let a = if pred(self.layout.coord(key, reg)) { amp * factor } else { amp };
            if a.norm_sqr() >= PRUNE_THRESHOLD {
                amps.insert(key, a);
            }
        }
        JointState { layout: Arc::clone(&self.layout), amps }
    }

    pub(crate) fn coord_of_key(&self, key: u64, reg: usize) -> u64 {
        self.layout.coord(key, reg)
    }

    pub(crate) fn keys(&self) -> impl Iterator<Item = (u64, Complex64)> + '_ {
        self.amps.iter().map(|(&k, &a)| (k, a))
    }

    fn renormalized(mut self) -> JointState {
        let n = self.norm_sqr();
        if n > 0.0 && (n - 1.0).abs() > RENORM_TRIGGER {
            let scale = 1.0 / n.sqrt();
            for a in self.amps.values_mut() {
                *a *= scale;
            }
        }
        self
    }

    /// Text dump: one line per stored point, `"<v1>,<v2>,...  <re> <im>"`,
    /// lexicographic point order, amplitudes with 12 significant digits.
    pub fn dump_lines(&self) -> Vec<String> {
        self.points()
            .into_iter()
            .map(|(values, amp)| {
                let coords: Vec<String> = values.iter().map(u64::to_string).collect();
                format!("{}  {:.11e} {:.11e}", coords.join(","), amp.re, amp.im)
            })
            .collect()
    }
}
