//! Canonical formatter. `parse(pretty_print(ast))` is structurally equal
//! to `ast` for every tree the parser can produce.

use super::ast::{IntExpr, MapExpr, PhaseExpr, ProgramAst, Spanned, Stmt};

pub fn pretty_print(ast: &ProgramAst) -> String {
    let mut out = String::new();
    for decl in &ast.declarations {
        out.push_str(&format!("REG {} {}\n", decl.node.name, decl.node.width));
    }
    if !ast.declarations.is_empty() && !ast.body.is_empty() {
        out.push('\n');
    }
    for stmt in &ast.body {
        write_stmt(&mut out, stmt, 0);
    }
    out
}

fn write_stmt(out: &mut String, stmt: &Spanned<Stmt>, depth: usize) {
    let indent = "  ".repeat(depth);
    match &stmt.node {
        Stmt::Ini { reg } => out.push_str(&format!("{indent}INI {reg}\n")),
        Stmt::Qft { reg } => out.push_str(&format!("{indent}QFT {reg}\n")),
        Stmt::Rea { reg } => out.push_str(&format!("{indent}REA {reg}\n")),
        Stmt::Ent { src, dst, map } => {
            out.push_str(&format!("{indent}ENT {src}, {dst}, {}\n", map_expr(map)))
        }
        Stmt::Dif { reg, size } => {
            out.push_str(&format!("{indent}DIF {reg}, {}\n", int_expr(size)))
        }
        Stmt::Pha { reg, phase, index } => out.push_str(&format!(
            "{indent}PHA {reg}, {}, {}\n",
            phase_expr(phase),
            int_expr(index)
        )),
        Stmt::Ann { model } => out.push_str(&format!("{indent}ANN \"{model}\"\n")),
        Stmt::Repeat { count, body } => {
            out.push_str(&format!("{indent}REPEAT {} {{\n", int_expr(count)));
            for inner in body {
                write_stmt(out, inner, depth + 1);
            }
            out.push_str(&format!("{indent}}}\n"));
        }
    }
}

fn map_expr(map: &MapExpr) -> String {
    match map {
        MapExpr::ModExp { base, modulus } => {
            format!("MODEXP({}, {})", int_expr(base), int_expr(modulus))
        }
        MapExpr::Table { path } => format!("TABLE(\"{path}\")"),
    }
}

fn phase_expr(phase: &PhaseExpr) -> String {
    match phase {
        PhaseExpr::Pi => "PI".to_string(),
        PhaseExpr::PiRational { num, den } => format!("PI*{num}/{den}"),
        // Debug formatting of f64 round-trips exactly.
        PhaseExpr::Literal(v) => format!("{v:?}"),
    }
}

/// The grammar has no parentheses, so this prints structure bare; parse
/// trees are always precedence-shaped, which keeps the round trip exact.
fn int_expr(expr: &IntExpr) -> String {
    match expr {
        IntExpr::Lit(v) => v.to_string(),
        IntExpr::Dim(name) => format!("DIM({name})"),
        IntExpr::Isqrt(inner) => format!("ISQRT({})", int_expr(inner)),
        IntExpr::GroverIters(inner) => format!("GROVER_ITERS({})", int_expr(inner)),
        IntExpr::Add(a, b) => format!("{} + {}", int_expr(a), int_expr(b)),
        IntExpr::Sub(a, b) => format!("{} - {}", int_expr(a), int_expr(b)),
        IntExpr::Mul(a, b) => format!("{} * {}", int_expr(a), int_expr(b)),
    }
}
