//! Human-readable formula printing: `E |-> E'`, `a |-> A[n,m | F]`, `*`
//! between spatial conjuncts, `&` between pure atoms, `eta(cond; then;
//! else)` and `lam i. E` for function expressions.
//!
//! The output reparses with [`super::parse_heap`]. Two spellings are
//! reserved: `i` is the bound index variable and `N` the symbolic thread
//! count, so program variables with those exact names would not round-trip
//! (fixtures avoid them).

use super::syntax::{Atom, FunctionExpr, Pure, Spatial, SymExpr, SymbolicHeap};
use crate::lang::OpKind;
use std::fmt::Write;

pub fn heap_to_string(h: &SymbolicHeap) -> String {
    format!("{} | {}", pure_to_string(&h.pure), spatial_to_string(&h.spatial))
}

pub fn pure_to_string(p: &Pure) -> String {
    if p.0.is_empty() {
        return "true".into();
    }
    p.0.iter().map(atom_to_string).collect::<Vec<_>>().join(" & ")
}

fn spatial_to_string(s: &[Spatial]) -> String {
    if s.is_empty() {
        return "emp".into();
    }
    s.iter().map(spat_to_string).collect::<Vec<_>>().join(" * ")
}

fn atom_to_string(a: &Atom) -> String {
    match a {
        Atom::Eq(x, y) => format!("{} = {}", expr_str(x, 0), expr_str(y, 0)),
        Atom::Ne(x, y) => format!("{} != {}", expr_str(x, 0), expr_str(y, 0)),
        Atom::Le(x, y) => format!("{} <= {}", expr_str(x, 0), expr_str(y, 0)),
        Atom::FnEq(n, fe) => format!("{} = {}", n, fexpr_to_string(fe)),
    }
}

fn spat_to_string(s: &Spatial) -> String {
    match s {
        Spatial::PointsTo(a, v) => {
            format!("{} |-> {}", spatial_side(a), spatial_side(v))
        }
        Spatial::ArraySeg {
            base,
            lo,
            hi,
            contents,
        } => format!(
            "{} |-> A[{}, {} | {}]",
            spatial_side(base),
            expr_str(lo, 0),
            expr_str(hi, 0),
            fexpr_to_string(contents)
        ),
    }
}

/// Spatial-position expressions parenthesize top-level `*`/`/`/`%` so the
/// separating conjunction stays unambiguous.
fn spatial_side(e: &SymExpr) -> String {
    match e {
        SymExpr::Op(OpKind::Mul | OpKind::Div | OpKind::Mod, _) => {
            format!("({})", expr_str(e, 0))
        }
        _ => expr_str(e, 0),
    }
}

pub fn fexpr_to_string(fe: &FunctionExpr) -> String {
    match fe {
        FunctionExpr::Lambda(body) => format!("lam i. {}", expr_str(body, 0)),
        FunctionExpr::Eta { cond, then, els } => format!(
            "eta({}; {}; {})",
            pure_to_string(cond),
            fexpr_to_string(then),
            fexpr_to_string(els)
        ),
        FunctionExpr::Symbol(s) => s.clone(),
    }
}

pub fn sym_to_string(e: &SymExpr) -> String {
    expr_str(e, 0)
}

fn prec(op: OpKind) -> u8 {
    match op {
        OpKind::Add | OpKind::Sub => 1,
        OpKind::Mul | OpKind::Div | OpKind::Mod => 2,
        OpKind::Neg | OpKind::Cos | OpKind::Sqrt => 3,
    }
}

fn expr_str(e: &SymExpr, min: u8) -> String {
    match e {
        SymExpr::Const(c) => {
            if *c < 0 && min > 0 {
                format!("({c})")
            } else {
                format!("{c}")
            }
        }
        SymExpr::Var(v) => v.clone(),
        SymExpr::Primed(h, id) => format!("{h}'{id}"),
        SymExpr::Tid => "tid".into(),
        SymExpr::NThreads => "N".into(),
        SymExpr::Size(a) => format!("size({a})"),
        SymExpr::Idx => "i".into(),
        SymExpr::Op(op, args) => match op {
            OpKind::Cos | OpKind::Sqrt => {
                format!("{}({})", op.name(), expr_str(&args[0], 0))
            }
            OpKind::Neg => format!("-{}", expr_str(&args[0], 3)),
            _ => {
                let p = prec(*op);
                let mut s = String::new();
                let _ = write!(
                    s,
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
        SymExpr::App(fe, arg) => match &**fe {
            FunctionExpr::Symbol(s) => format!("{}({})", s, expr_str(arg, 0)),
            other => format!("({})({})", fexpr_to_string(other), expr_str(arg, 0)),
        },
    }
}
