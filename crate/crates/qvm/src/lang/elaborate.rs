//! The elaborator: evaluates count expressions, unrolls loops, resolves
//! mapping specs and model files, and runs the static checks, producing a
//! flat instruction list.

use super::ast::{IntExpr, MapExpr, PhaseExpr, ProgramAst, Spanned, Stmt};
use super::token::Pos;
use crate::annealer::IsingModel;
use crate::isa::{MappingSpec, PhaseAngle};
use crate::state::{RegisterDecl, RegisterLayout};
use std::collections::HashMap;
use std::path::Path;
use std::sync::Arc;
use thiserror::Error;

/// Ceiling on the unrolled instruction count; guards against runaway
/// REPEAT counts allocating unbounded memory.
pub const MAX_UNROLLED_INSTRUCTIONS: usize = 1 << 22;

#[derive(Debug, Error, Clone, PartialEq)]
pub struct ElabError {
    pub pos: Option<Pos>,
    pub message: String,
}

impl std::fmt::Display for ElabError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self.pos {
            Some(pos) => write!(f, "{pos}: {}", self.message),
            None => write!(f, "{}", self.message),
        }
    }
}

fn err(pos: Pos, message: impl Into<String>) -> ElabError {
    ElabError { pos: Some(pos), message: message.into() }
}

/// One flat machine instruction. Register operands are indices into the
/// program's register list.
#[derive(Debug, Clone)]
pub enum Instr {
    Ini { reg: usize },
    Qft { reg: usize },
    Rea { reg: usize },
    Ent { src: usize, dst: usize, map: Arc<MappingSpec> },
    Dif { reg: usize, size: u64 },
    Pha { reg: usize, phase: PhaseAngle, index: u64 },
    Ann { label: String, model: Arc<IsingModel> },
}

/// A loop-free program ready to execute.
#[derive(Debug, Clone)]
pub struct ElaboratedProgram {
    pub registers: Vec<RegisterDecl>,
    pub instructions: Vec<Instr>,
}

impl ElaboratedProgram {
    pub fn layout(&self) -> Result<RegisterLayout, crate::state::StateError> {
        RegisterLayout::new(self.registers.clone())
    }
}

struct RegInfo {
    index: usize,
    width: u32,
    pos: Pos,
}

struct Elaborator<'a> {
    regs: HashMap<String, RegInfo>,
    base_dir: &'a Path,
    out: Vec<Instr>,
}

pub fn elaborate(ast: &ProgramAst, base_dir: &Path) -> Result<ElaboratedProgram, ElabError> {
    let mut regs = HashMap::new();
    for (index, decl) in ast.declarations.iter().enumerate() {
        if regs.contains_key(&decl.node.name) {
            return Err(err(decl.pos, format!("duplicate register `{}`", decl.node.name)));
        }
        regs.insert(
            decl.node.name.clone(),
            RegInfo { index, width: decl.node.width, pos: decl.pos },
        );
    }
    let registers: Vec<RegisterDecl> = ast.declarations.iter().map(|d| d.node.clone()).collect();
    if !registers.is_empty() {
        // Width and uniqueness limits are the layout's rules; surface them
        // here with the first declaration's position.
        RegisterLayout::new(registers.clone())
            .map_err(|e| err(ast.declarations[0].pos, e.to_string()))?;
    }
    let mut el = Elaborator { regs, base_dir, out: Vec::new() };
    el.lower_block(&ast.body)?;
    Ok(ElaboratedProgram { registers, instructions: el.out })
}

impl<'a> Elaborator<'a> {
    fn lower_block(&mut self, stmts: &[Spanned<Stmt>]) -> Result<(), ElabError> {
        for stmt in stmts {
            self.lower_stmt(stmt)?;
        }
        Ok(())
    }

    fn lower_stmt(&mut self, stmt: &Spanned<Stmt>) -> Result<(), ElabError> {
        let pos = stmt.pos;
        match &stmt.node {
            Stmt::Ini { reg } => {
                let reg = self.resolve(reg, pos)?;
                self.push(pos, Instr::Ini { reg })?;
            }
            Stmt::Qft { reg } => {
                let reg = self.resolve(reg, pos)?;
                self.push(pos, Instr::Qft { reg })?;
            }
            Stmt::Rea { reg } => {
                let reg = self.resolve(reg, pos)?;
                self.push(pos, Instr::Rea { reg })?;
            }
            Stmt::Ent { src, dst, map } => {
                let (src_name, dst_name) = (src, dst);
                let src = self.resolve(src_name, pos)?;
                let dst = self.resolve(dst_name, pos)?;
                if src == dst {
                    return Err(err(pos, "ENT needs two distinct registers"));
                }
                let src_dim = self.dim_of(src);
                let dst_dim = self.dim_of(dst);
                let spec = match map {
                    MapExpr::ModExp { base, modulus } => {
                        let base = self.eval_u64(base, pos, "MODEXP base")?;
                        let modulus = self.eval_u64(modulus, pos, "MODEXP modulus")?;
                        MappingSpec::mod_exp(base, modulus, src_dim)
                            .map_err(|e| err(pos, e.to_string()))?
                    }
                    MapExpr::Table { path } => self.load_table(path, src_dim, pos)?,
                };
                if spec.codomain() > dst_dim {
                    let j = spec
                        .images()
                        .iter()
                        .position(|&im| im >= dst_dim)
                        .unwrap_or(0) as u64;
                    return Err(err(
                        pos,
                        format!(
                            "mapping image {} of {} does not fit register `{}` (dimension {})",
                            spec.image(j).unwrap_or(0),
                            j,
                            dst_name,
                            dst_dim
                        ),
                    ));
                }
                self.push(pos, Instr::Ent { src, dst, map: Arc::new(spec) })?;
            }
            Stmt::Dif { reg, size } => {
                let name = reg;
                let reg = self.resolve(name, pos)?;
                let size = self.eval_u64(size, pos, "DIF size")?;
                let dim = self.dim_of(reg);
                if size != dim {
                    return Err(err(
                        pos,
                        format!("DIF size {size} must equal the dimension {dim} of register `{name}`"),
                    ));
                }
                self.push(pos, Instr::Dif { reg, size })?;
            }
            Stmt::Pha { reg, phase, index } => {
                let name = reg;
                let reg = self.resolve(name, pos)?;
                let index = self.eval_u64(index, pos, "PHA index")?;
                let dim = self.dim_of(reg);
                if index >= dim {
                    return Err(err(
                        pos,
                        format!("PHA index {index} is out of range for register `{name}` (dimension {dim})"),
                    ));
                }
                let phase = self.eval_phase(phase, pos)?;
                self.push(pos, Instr::Pha { reg, phase, index })?;
            }
            Stmt::Ann { model } => {
                let path = self.base_dir.join(model);
                let text = std::fs::read_to_string(&path).map_err(|e| {
                    err(pos, format!("cannot read model file `{}`: {e}", path.display()))
                })?;
                let parsed = IsingModel::from_text(&text)
                    .map_err(|e| err(pos, format!("model file `{model}`: {e}")))?;
                self.push(pos, Instr::Ann { label: model.clone(), model: Arc::new(parsed) })?;
            }
            Stmt::Repeat { count, body } => {
                let count = self.eval_u64(count, pos, "REPEAT count")?;
                for _ in 0..count {
                    self.lower_block(body)?;
                }
            }
        }
        Ok(())
    }

    fn push(&mut self, pos: Pos, instr: Instr) -> Result<(), ElabError> {
        if self.out.len() >= MAX_UNROLLED_INSTRUCTIONS {
            return Err(err(
                pos,
                format!("program unrolls past {MAX_UNROLLED_INSTRUCTIONS} instructions"),
            ));
        }
        self.out.push(instr);
        Ok(())
    }

    fn resolve(&self, name: &str, at: Pos) -> Result<usize, ElabError> {
        let info = self
            .regs
            .get(name)
            .ok_or_else(|| err(at, format!("register `{name}` is not declared")))?;
        if at < info.pos {
            return Err(err(at, format!("register `{name}` is used before its declaration")));
        }
        Ok(info.index)
    }

    fn dim_of(&self, index: usize) -> u64 {
        let width = self
            .regs
            .values()
            .find(|r| r.index == index)
            .expect("resolved index")
            .width;
        1u64 << width
    }

    fn eval_u64(&self, expr: &IntExpr, pos: Pos, what: &str) -> Result<u64, ElabError> {
        let v = self.eval(expr, pos)?;
        u64::try_from(v).map_err(|_| err(pos, format!("{what} evaluates to {v}, which is negative")))
    }

    fn eval(&self, expr: &IntExpr, pos: Pos) -> Result<i128, ElabError> {
        Ok(match expr {
            IntExpr::Lit(v) => *v as i128,
            IntExpr::Dim(name) => {
                let reg = self.resolve(name, pos)?;
                self.dim_of(reg) as i128
            }
            IntExpr::Isqrt(inner) => {
                let v = self.eval(inner, pos)?;
                if v < 0 {
                    return Err(err(pos, format!("ISQRT of negative value {v}")));
                }
                isqrt(v as u128) as i128
            }
            IntExpr::GroverIters(inner) => {
                let v = self.eval(inner, pos)?;
                if v < 0 {
                    return Err(err(pos, format!("GROVER_ITERS of negative value {v}")));
                }
                grover_iterations(v as u64) as i128
            }
            IntExpr::Add(a, b) => self
                .eval(a, pos)?
                .checked_add(self.eval(b, pos)?)
                .ok_or_else(|| err(pos, "integer overflow in count expression"))?,
            IntExpr::Sub(a, b) => self
                .eval(a, pos)?
                .checked_sub(self.eval(b, pos)?)
                .ok_or_else(|| err(pos, "integer overflow in count expression"))?,
            IntExpr::Mul(a, b) => self
                .eval(a, pos)?
                .checked_mul(self.eval(b, pos)?)
                .ok_or_else(|| err(pos, "integer overflow in count expression"))?,
        })
    }

    fn eval_phase(&self, phase: &PhaseExpr, pos: Pos) -> Result<PhaseAngle, ElabError> {
        let value = match phase {
            PhaseExpr::Pi => std::f64::consts::PI,
            PhaseExpr::PiRational { num, den } => {
                if *den == 0 {
                    return Err(err(pos, "phase denominator is zero"));
                }
                std::f64::consts::PI * (*num as f64) / (*den as f64)
            }
            PhaseExpr::Literal(v) => *v,
        };
        PhaseAngle::radians(value).map_err(|e| err(pos, e.to_string()))
    }

    /// Table files hold `j,M(j)` lines with `#` comments and must cover the
    /// whole source domain exactly once.
    fn load_table(&self, path: &str, src_dim: u64, pos: Pos) -> Result<MappingSpec, ElabError> {
        let full = self.base_dir.join(path);
        let text = std::fs::read_to_string(&full)
            .map_err(|e| err(pos, format!("cannot read table file `{}`: {e}", full.display())))?;
        let mut images: Vec<Option<u64>> = vec![None; src_dim as usize];
        for (lineno, raw) in text.lines().enumerate() {
            let body = raw.split('#').next().unwrap_or("").trim();
            if body.is_empty() {
                continue;
            }
            let mut parts = body.splitn(2, ',');
            let bad = |what: &str| {
                err(pos, format!("table file `{path}` line {}: {what}", lineno + 1))
            };
            let j: u64 = parts
                .next()
                .and_then(|s| s.trim().parse().ok())
                .ok_or_else(|| bad("expected `j,M(j)`"))?;
            let image: u64 = parts
                .next()
                .and_then(|s| s.trim().parse().ok())
                .ok_or_else(|| bad("expected `j,M(j)`"))?;
            if j >= src_dim {
                return Err(bad(&format!("entry {j} is outside the source domain 0..{src_dim}")));
            }
            let slot = &mut images[j as usize];
            if slot.is_some() {
                return Err(bad(&format!("duplicate entry for {j}")));
            }
            *slot = Some(image);
        }
        let mut resolved = Vec::with_capacity(src_dim as usize);
        for (j, image) in images.into_iter().enumerate() {
            match image {
                Some(v) => resolved.push(v),
                None => {
                    return Err(err(
                        pos,
                        format!("table file `{path}` does not define an image for {j}"),
                    ))
                }
            }
        }
        Ok(MappingSpec::table(resolved))
    }
}

/// Exact integer square root.
fn isqrt(v: u128) -> u64 {
    if v == 0 {
        return 0;
    }
    let mut r = (v as f64).sqrt() as u128;
    while r * r > v {
        r -= 1;
    }
    while (r + 1) * (r + 1) <= v {
        r += 1;
    }
    r as u64
}

/// `floor(pi/4 * sqrt(n))`: the amplification round count for a search
/// space of size `n`.
fn grover_iterations(n: u64) -> u64 {
    (std::f64::consts::FRAC_PI_4 * (n as f64).sqrt()).floor() as u64
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lang::{parse, tokenize};
    use std::path::PathBuf;

    fn elaborate_src(src: &str) -> Result<ElaboratedProgram, ElabError> {
        let ast = parse(&tokenize(src).unwrap()).unwrap();
        elaborate(&ast, &PathBuf::from("."))
    }

    #[test]
    fn grover_iterations_for_64_is_6() {
        assert_eq!(grover_iterations(64), 6);
    }

    #[test]
    fn isqrt_matches_loop_bound() {
        assert_eq!(isqrt(64), 8);
        assert_eq!(isqrt(63), 7);
        assert_eq!(isqrt(0), 0);
        assert_eq!(isqrt(1), 1);
        for v in [2u128, 3, 15, 16, 17, 1 << 40, (1 << 40) + 1] {
            let r = isqrt(v) as u128;
            assert!(r * r <= v && (r + 1) * (r + 1) > v);
        }
    }

    #[test]
    fn dif_size_is_checked_against_the_register() {
        let err = elaborate_src("REG R 3\nDIF R, 4").unwrap_err();
        assert!(err.message.contains("DIF size 4"));
        assert!(elaborate_src("REG R 2\nDIF R, 4").is_ok());
        assert!(elaborate_src("REG R 2\nDIF R, DIM(R)").is_ok());
    }

    #[test]
    fn pha_index_is_checked() {
        assert!(elaborate_src("REG R 2\nPHA R, PI, 4").is_err());
        assert!(elaborate_src("REG R 2\nPHA R, PI, 3").is_ok());
        assert!(elaborate_src("REG R 2\nPHA R, PI, DIM(R) - 1").is_ok());
    }

    #[test]
    fn loops_unroll_to_the_closed_form() {
        let prog = elaborate_src("REG R 1\nREPEAT 3 { INI R REPEAT 2 { QFT R } }").unwrap();
        // 3 * (1 + 2) = 9 instructions.
        assert_eq!(prog.instructions.len(), 9);
    }

    #[test]
    fn zero_count_loops_vanish() {
        let prog = elaborate_src("REG R 1\nREPEAT 0 { INI R }\nREA R").unwrap();
        assert_eq!(prog.instructions.len(), 1);
    }

    #[test]
    fn negative_counts_are_rejected() {
        let err = elaborate_src("REG R 1\nREPEAT 1 - 2 { INI R }").unwrap_err();
        assert!(err.message.contains("negative"));
    }

    #[test]
    fn use_before_declaration_is_rejected() {
        let err = elaborate_src("INI R\nREG R 1").unwrap_err();
        assert!(err.message.contains("before its declaration"));
        let err = elaborate_src("INI R").unwrap_err();
        assert!(err.message.contains("not declared"));
    }

    #[test]
    fn modexp_is_resolved_over_the_source_domain() {
        let prog = elaborate_src("REG R1 7\nREG R2 4\nENT R1, R2, MODEXP(4, 9)").unwrap();
        match &prog.instructions[0] {
            Instr::Ent { map, .. } => {
                assert_eq!(map.domain(), 128);
                assert_eq!(map.image(2), Some(7));
            }
            other => panic!("expected ENT, got {other:?}"),
        }
    }

    #[test]
    fn modexp_images_must_fit_the_destination() {
        let err = elaborate_src("REG R1 4\nREG R2 2\nENT R1, R2, MODEXP(7, 39)").unwrap_err();
        assert!(err.message.contains("does not fit"));
    }

    #[test]
    fn missing_table_file_is_reported() {
        let err = elaborate_src("REG A 2\nREG B 2\nENT A, B, TABLE(\"no_such.tab\")").unwrap_err();
        assert!(err.message.contains("no_such.tab"));
    }

    #[test]
    fn table_files_resolve_and_validate() {
        let dir = tempfile::tempdir().unwrap();
        std::fs::write(dir.path().join("map.tab"), "# map\n0,1\n1,0\n2,3\n3,2\n").unwrap();
        std::fs::write(dir.path().join("short.tab"), "0,1\n").unwrap();
        std::fs::write(dir.path().join("wide.tab"), "0,1\n1,9\n2,0\n3,0\n").unwrap();
        let ast = parse(&tokenize("REG A 2\nREG B 2\nENT A, B, TABLE(\"map.tab\")").unwrap()).unwrap();
        let prog = elaborate(&ast, dir.path()).unwrap();
        match &prog.instructions[0] {
            Instr::Ent { map, .. } => assert_eq!(map.images(), &[1, 0, 3, 2]),
            other => panic!("expected ENT, got {other:?}"),
        }
        let ast = parse(&tokenize("REG A 2\nREG B 2\nENT A, B, TABLE(\"short.tab\")").unwrap()).unwrap();
        assert!(elaborate(&ast, dir.path()).unwrap_err().message.contains("does not define"));
        let ast = parse(&tokenize("REG A 2\nREG B 2\nENT A, B, TABLE(\"wide.tab\")").unwrap()).unwrap();
        assert!(elaborate(&ast, dir.path()).unwrap_err().message.contains("does not fit"));
    }
}
