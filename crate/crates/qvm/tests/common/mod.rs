//! Helpers shared by the integration tests: dense reference kernels,
//! random generators, and a grammar-shaped AST generator.

#![allow(dead_code)]

use num_complex::Complex64;
use qvm::lang::{IntExpr, MapExpr, PhaseExpr, Pos, ProgramAst, Spanned, Stmt};
use qvm::state::{JointState, RegisterDecl, RegisterLayout, Unitary};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::sync::Arc;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

// ---------------------------------------------------------------------------
// Dense reference path. Index packing is recomputed here from the declared
// widths (first register most significant), independent of the library.

pub fn shifts_of(widths: &[u32]) -> Vec<u32> {
    let mut shifts = vec![0u32; widths.len()];
    let mut acc = 0;
    for i in (0..widths.len()).rev() {
        shifts[i] = acc;
        acc += widths[i];
    }
    shifts
}

pub fn flatten(state: &JointState) -> Vec<Complex64> {
    let widths: Vec<u32> = state.layout().registers().iter().map(|r| r.width).collect();
    let shifts = shifts_of(&widths);
    let total_bits: u32 = widths.iter().sum();
    let mut dense = vec![c(0.0, 0.0); 1usize << total_bits];
    for (point, amp) in state.points() {
        let mut index = 0usize;
        for (i, &v) in point.iter().enumerate() {
            index |= (v as usize) << shifts[i];
        }
        dense[index] = amp;
    }
    dense
}

/// Applies `matrix` to the coordinate of register `reg` on a flattened
/// joint vector: the brute-force oracle for `apply_on_register`.
pub fn dense_apply_register(dense: &[Complex64], widths: &[u32], reg: usize, matrix: &Unitary) -> Vec<Complex64> {
    let shifts = shifts_of(widths);
    let dim = 1usize << widths[reg];
    assert_eq!(matrix.dim(), dim);
    let stride = 1usize << shifts[reg];
    let mut out = vec![c(0.0, 0.0); dense.len()];
    for (index, _) in dense.iter().enumerate() {
        let v = (index >> shifts[reg]) & (dim - 1);
        let base = index - v * stride;
        let mut acc = c(0.0, 0.0);
        for col in 0..dim {
            acc += matrix.at(v, col) * dense[base + col * stride];
        }
        out[index] = acc;
    }
    out
}

pub fn max_entry_distance(a: &[Complex64], b: &[Complex64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

// ---------------------------------------------------------------------------
// Random states and unitaries.

pub fn layout_of(widths: &[u32]) -> Arc<RegisterLayout> {
    let regs: Vec<RegisterDecl> = widths
        .iter()
        .enumerate()
        .map(|(i, &w)| RegisterDecl::new(format!("R{i}"), w))
        .collect();
    Arc::new(RegisterLayout::new(regs).unwrap())
}

/// A random normalized state supported on at most `max_support` points.
pub fn random_state(layout: &Arc<RegisterLayout>, max_support: usize, rng: &mut ChaCha8Rng) -> JointState {
    let support = rng.gen_range(1..=max_support.max(1));
    let entries: Vec<(Vec<u64>, Complex64)> = (0..support)
        .map(|_| {
            let point: Vec<u64> = (0..layout.len())
                .map(|i| rng.gen_range(0..layout.dim(i)))
                .collect();
            let amp = c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
            (point, amp)
        })
        .collect();
    match JointState::from_amplitudes(Arc::clone(layout), entries) {
        Ok(state) => state,
        // Amplitudes can cancel to zero weight; a basis state always works.
        Err(_) => {
            let point: Vec<u64> = (0..layout.len()).map(|i| rng.gen_range(0..layout.dim(i))).collect();
            JointState::from_amplitudes(Arc::clone(layout), vec![(point, c(1.0, 0.0))]).unwrap()
        }
    }
}

/// A random unitary from modified Gram-Schmidt on a random complex matrix.
pub fn random_unitary(dim: usize, rng: &mut ChaCha8Rng) -> Unitary {
    loop {
        let mut rows: Vec<Vec<Complex64>> = (0..dim)
            .map(|_| (0..dim).map(|_| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect())
            .collect();
        let mut ok = true;
        for i in 0..dim {
            for _pass in 0..2 {
                for j in 0..i {
                    let row_j = rows[j].clone();
                    let proj: Complex64 =
                        row_j.iter().zip(rows[i].iter()).map(|(a, b)| a.conj() * b).sum();
                    for (x, rj) in rows[i].iter_mut().zip(row_j.iter()) {
                        *x -= proj * rj;
                    }
                }
            }
            let norm: f64 = rows[i].iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
            if norm < 1e-6 {
                ok = false;
                break;
            }
            for x in rows[i].iter_mut() {
                *x /= norm;
            }
        }
        if !ok {
            continue;
        }
        let data: Vec<Complex64> = rows.into_iter().flatten().collect();
        if let Ok(u) = Unitary::new(dim, data) {
            return u;
        }
    }
}

pub fn matmul(a: &Unitary, b: &Unitary) -> Vec<Complex64> {
    let n = a.dim();
    assert_eq!(n, b.dim());
    let mut out = vec![c(0.0, 0.0); n * n];
    for i in 0..n {
        for k in 0..n {
            let aik = a.at(i, k);
            if aik == c(0.0, 0.0) {
                continue;
            }
            for j in 0..n {
                out[i * n + j] += aik * b.at(k, j);
            }
        }
    }
    out
}

pub fn max_dev_from_identity(m: &[Complex64], n: usize) -> f64 {
    let mut max = 0.0f64;
    for i in 0..n {
        for j in 0..n {
            let target = if i == j { 1.0 } else { 0.0 };
            max = max.max((m[i * n + j] - target).norm());
        }
    }
    max
}

// ---------------------------------------------------------------------------
// Grammar-shaped AST generator for the round-trip law.

const NAME_POOL: &[&str] = &["R1", "R2", "A", "B", "D", "IDX", "DATA", "Q"];

pub struct AstGen {
    pub rng: ChaCha8Rng,
}

impl AstGen {
    pub fn new(seed: u64) -> Self {
        AstGen { rng: rng(seed) }
    }

    fn pos() -> Pos {
        Pos { line: 1, col: 1 }
    }

    pub fn program(&mut self) -> ProgramAst {
        let reg_count = self.rng.gen_range(1..=3usize);
        let mut names: Vec<&str> = NAME_POOL.to_vec();
        let mut declarations = Vec::new();
        for _ in 0..reg_count {
            let pick = self.rng.gen_range(0..names.len());
            let name = names.remove(pick);
            let width = self.rng.gen_range(1..=6u32);
            declarations.push(Spanned::new(RegisterDecl::new(name, width), Self::pos()));
        }
        let reg_names: Vec<String> =
            declarations.iter().map(|d| d.node.name.clone()).collect();
        let stmt_count = self.rng.gen_range(0..=6usize);
        let body = (0..stmt_count).map(|_| self.stmt(&reg_names, 2)).collect();
        ProgramAst { declarations, body }
    }

    fn reg(&mut self, regs: &[String]) -> String {
        regs[self.rng.gen_range(0..regs.len())].clone()
    }

    fn stmt(&mut self, regs: &[String], depth: usize) -> Spanned<Stmt> {
        let max = if depth > 0 { 8 } else { 7 };
        let node = match self.rng.gen_range(0..max) {
            0 => Stmt::Ini { reg: self.reg(regs) },
            1 => Stmt::Qft { reg: self.reg(regs) },
            2 => Stmt::Rea { reg: self.reg(regs) },
            3 => {
                let src = self.reg(regs);
                let mut dst = self.reg(regs);
                if dst == src {
                    dst = format!("{src}X");
                }
                let map = if self.rng.gen::<bool>() {
                    MapExpr::ModExp { base: self.int_expr(regs, 1), modulus: self.int_expr(regs, 1) }
                } else {
                    MapExpr::Table { path: self.file_name() }
                };
                Stmt::Ent { src, dst, map }
            }
            4 => Stmt::Dif { reg: self.reg(regs), size: self.int_expr(regs, 2) },
            5 => Stmt::Pha { reg: self.reg(regs), phase: self.phase(), index: self.int_expr(regs, 2) },
            6 => Stmt::Ann { model: self.file_name() },
            _ => {
                let count = self.int_expr(regs, 1);
                let len = self.rng.gen_range(0..=3usize);
                let body = (0..len).map(|_| self.stmt(regs, depth - 1)).collect();
                Stmt::Repeat { count, body }
            }
        };
        Spanned::new(node, Self::pos())
    }

    fn file_name(&mut self) -> String {
        let stem: String = (0..self.rng.gen_range(1..=8usize))
            .map(|_| (b'a' + self.rng.gen_range(0..26u8)) as char)
            .collect();
        format!("{stem}.tab")
    }

    fn phase(&mut self) -> PhaseExpr {
        match self.rng.gen_range(0..3u8) {
            0 => PhaseExpr::Pi,
            1 => PhaseExpr::PiRational {
                num: self.rng.gen_range(0..32),
                den: self.rng.gen_range(1..32),
            },
            _ => {
                // Any positive finite float round-trips through {:?}.
                let mantissa: f64 = self.rng.gen_range(0.0..1000.0);
                let scale = 10f64.powi(self.rng.gen_range(-6..6));
                PhaseExpr::Literal(mantissa * scale)
            }
        }
    }

    /// Additive chains are built left-nested and `*` only joins atoms,
    /// mirroring what the parenthesis-free grammar can produce.
    fn int_expr(&mut self, regs: &[String], depth: usize) -> IntExpr {
        let terms = self.rng.gen_range(1..=3usize);
        let mut expr = self.term(regs, depth);
        for _ in 1..terms {
            let rhs = self.term(regs, depth);
            expr = if self.rng.gen::<bool>() {
                IntExpr::Add(Box::new(expr), Box::new(rhs))
            } else {
                IntExpr::Sub(Box::new(expr), Box::new(rhs))
            };
        }
        expr
    }

    fn term(&mut self, regs: &[String], depth: usize) -> IntExpr {
        let factors = self.rng.gen_range(1..=2usize);
        let mut expr = self.atom(regs, depth);
        for _ in 1..factors {
            let rhs = self.atom(regs, depth);
            expr = IntExpr::Mul(Box::new(expr), Box::new(rhs));
        }
        expr
    }

    fn atom(&mut self, regs: &[String], depth: usize) -> IntExpr {
        let max = if depth > 0 { 4 } else { 2 };
        match self.rng.gen_range(0..max) {
            0 => IntExpr::Lit(self.rng.gen_range(0..1000)),
            1 => IntExpr::Dim(self.reg(regs)),
            2 => IntExpr::Isqrt(Box::new(self.int_expr(regs, depth - 1))),
            _ => IntExpr::GroverIters(Box::new(self.int_expr(regs, depth - 1))),
        }
    }
}

/// Fuzz inputs that put a branching mnemonic in statement position.
pub fn branching_fuzz_inputs(seed: u64, count: usize) -> Vec<String> {
    let keywords = ["IF", "ELSE", "WHILE", "FOR", "GOTO", "JMP", "JNZ", "CALL", "RET", "BRANCH"];
    let valid_fragments =
        ["INI R", "QFT R", "REA R", "DIF R, 2", "PHA R, PI, 0", "REPEAT 2 { INI R }"];
    let mut rng = rng(seed);
    (0..count)
        .map(|_| {
            let kw = keywords[rng.gen_range(0..keywords.len())];
            let mut lines = vec!["REG R 1".to_string()];
            for _ in 0..rng.gen_range(0..3usize) {
                lines.push(valid_fragments[rng.gen_range(0..valid_fragments.len())].into());
            }
            let tail = match rng.gen_range(0..4u8) {
                0 => format!("{kw} R"),
                1 => format!("{kw} R {{ INI R }}"),
                2 => format!("{kw} 3, 4"),
                _ => kw.to_string(),
            };
            lines.push(tail);
            if rng.gen::<bool>() {
                lines.push(valid_fragments[rng.gen_range(0..valid_fragments.len())].into());
            }
            lines.join("\n")
        })
        .collect()
}
