//! Kernel pretty-printer.
//!
//! Prints the retained surface statements, so re-parsing the output lowers
//! to a structurally identical kernel (same nodes, edges, and generated
//! temporaries — lowering is deterministic).

use super::ast::*;
use std::fmt::Write;

pub fn print_kernel(k: &Kernel) -> String {
    let mut out = String::new();
    if k.name == "kernel" {
        out.push_str("kernel(");
    } else {
        let _ = write!(out, "kernel {}(", k.name);
    }
    for (i, p) in k.params.iter().enumerate() {
        if i > 0 {
            out.push_str(", ");
        }
        let default_space = if p.kind == ParamKind::Array {
            Space::Shared
        } else {
            Space::Private
        };
        if p.space != default_space {
            let _ = write!(
                out,
                "{} ",
                if p.space == Space::Shared {
                    "shared"
                } else {
                    "private"
                }
            );
        }
        let _ = write!(out, "int {}", p.name);
        if p.kind == ParamKind::Array {
            out.push_str("[]");
        }
    }
    out.push_str(") {\n");
    print_stmts(&mut out, &k.body, 1);
    out.push_str("}\n");
    out
}

fn indent(out: &mut String, depth: usize) {
    for _ in 0..depth {
        out.push_str("    ");
    }
}

fn print_stmts(out: &mut String, stmts: &[Stmt], depth: usize) {
    for s in stmts {
        print_stmt(out, s, depth);
    }
}

fn print_stmt(out: &mut String, s: &Stmt, depth: usize) {
    indent(out, depth);
    match s {
        Stmt::Decl { space, name, init } => {
            if *space == Space::Shared {
                out.push_str("shared ");
            }
            let _ = write!(out, "int {name}");
            if let Some(e) = init {
                let _ = write!(out, " = {}", expr_str(e, 0));
            }
            out.push_str(";\n");
        }
        Stmt::AssignVar { name, value } => {
            let _ = writeln!(out, "{name} = {};", expr_str(value, 0));
        }
        Stmt::AssignIndex {
            array,
            index,
            value,
        } => {
            let _ = writeln!(out, "{array}[{}] = {};", expr_str(index, 0), expr_str(value, 0));
        }
        Stmt::Barrier => out.push_str("barrier;\n"),
        Stmt::Assume(b) => {
            let _ = writeln!(out, "assume({});", bool_str(b));
        }
        Stmt::Assert(b) => {
            let _ = writeln!(out, "assert({});", bool_str(b));
        }
        Stmt::If {
            cond,
            then_branch,
            else_branch,
        } => {
            let _ = writeln!(out, "if ({}) {{", bool_str(cond));
            print_stmts(out, then_branch, depth + 1);
            indent(out, depth);
            if else_branch.is_empty() {
                out.push_str("}\n");
            } else {
                out.push_str("} else {\n");
                print_stmts(out, else_branch, depth + 1);
                indent(out, depth);
                out.push_str("}\n");
            }
        }
        Stmt::While { cond, body } => {
            let _ = writeln!(out, "while ({}) {{", bool_str(cond));
            print_stmts(out, body, depth + 1);
            indent(out, depth);
            out.push_str("}\n");
        }
    }
}

fn prec(op: OpKind) -> u8 {
    match op {
        OpKind::Add | OpKind::Sub => 1,
        OpKind::Mul | OpKind::Div | OpKind::Mod => 2,
        OpKind::Neg | OpKind::Cos | OpKind::Sqrt => 3,
    }
}

fn expr_str(e: &SurfaceExpr, min: u8) -> String {
    match e {
        SurfaceExpr::Const(c) => {
            if *c < 0 && min >= 3 {
                format!("({c})")
            } else {
                format!("{c}")
            }
        }
        SurfaceExpr::Var(v) => v.clone(),
        SurfaceExpr::Tid => "tid".into(),
        SurfaceExpr::Size(a) => format!("size({a})"),
        SurfaceExpr::Index(a, i) => format!("{a}[{}]", expr_str(i, 0)),
        SurfaceExpr::Op(op, args) => match op {
            OpKind::Cos | OpKind::Sqrt => format!("{}({})", op.name(), expr_str(&args[0], 0)),
            OpKind::Neg => format!("-{}", expr_str(&args[0], 3)),
            _ => {
                let p = prec(*op);
                let s = format!(
                    "{} {} {}",
                    expr_str(&args[0], p),
                    op.name(),
                    expr_str(&args[1], p + 1)
                );
                if p < min {
                    format!("({s})")
                } else {
                    s
                }
            }
        },
    }
}

fn bool_str(b: &SurfaceBool) -> String {
    match b {
        SurfaceBool::Lt(a, b) => format!("{} < {}", expr_str(a, 0), expr_str(b, 0)),
        SurfaceBool::Eq(a, b) => format!("{} == {}", expr_str(a, 0), expr_str(b, 0)),
        SurfaceBool::And(a, b) => format!("{} && {}", bool_atom_str(a), bool_atom_str(b)),
        SurfaceBool::Not(inner) => format!("!{}", bool_atom_str(inner)),
    }
}

fn bool_atom_str(b: &SurfaceBool) -> String {
    match b {
        SurfaceBool::Not(_) => bool_str(b),
        _ => format!("({})", bool_str(b)),
    }
}
