//! Term, formula and heap syntax, with substitution.

use crate::lang::OpKind;
use std::collections::BTreeSet;

/// Symbolic integer expressions.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum SymExpr {
    Const(i64),
    /// Program variable (possibly thread-tagged after renaming).
    Var(String),
    /// Logical (primed) variable: hint plus a unique id, printed `hint'id`.
    Primed(String, u64),
    Tid,
    /// The symbolic thread count, printed `N`.
    NThreads,
    /// Declared element count of an array.
    Size(String),
    /// The bound index variable of the enclosing function expression,
    /// printed `i`. Only meaningful under a `lam`/`eta` binder.
    Idx,
    Op(OpKind, Vec<SymExpr>),
    /// Application of a function expression to an index.
    App(Box<FunctionExpr>, Box<SymExpr>),
}

impl SymExpr {
    pub fn bin(op: OpKind, a: SymExpr, b: SymExpr) -> SymExpr {
        SymExpr::Op(op, vec![a, b])
    }

    pub fn add(a: SymExpr, b: SymExpr) -> SymExpr {
        SymExpr::bin(OpKind::Add, a, b)
    }

    pub fn app(f: FunctionExpr, arg: SymExpr) -> SymExpr {
        SymExpr::App(Box::new(f), Box::new(arg))
    }

    pub fn var(name: impl Into<String>) -> SymExpr {
        SymExpr::Var(name.into())
    }
}

/// Array-content functions.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum FunctionExpr {
    /// `lam i. body`
    Lambda(Box<SymExpr>),
    /// `eta(cond; then; else)` — `then(i)` where `cond(i)` holds, `else(i)`
    /// otherwise. The condition ranges over the bound index and whatever the
    /// store rule captured (typically the pure context plus `i = e`).
    Eta {
        cond: Pure,
        then: Box<FunctionExpr>,
        els: Box<FunctionExpr>,
    },
    /// A named content symbol (unknown initial contents, or a committed
    /// post-barrier snapshot).
    Symbol(String),
}

impl FunctionExpr {
    pub fn lambda(body: SymExpr) -> FunctionExpr {
        FunctionExpr::Lambda(Box::new(body))
    }

    pub fn eta(cond: Pure, then: FunctionExpr, els: FunctionExpr) -> FunctionExpr {
        FunctionExpr::Eta {
            cond,
            then: Box::new(then),
            els: Box::new(els),
        }
    }
}

/// Pure atoms. `FnEq` embeds a function-expression definition `g = F` in the
/// pure part, which is how the store rule names each write layer.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Atom {
    Eq(SymExpr, SymExpr),
    Ne(SymExpr, SymExpr),
    Le(SymExpr, SymExpr),
    FnEq(String, FunctionExpr),
}

/// A flattened conjunction; empty means `true`.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Pure(pub Vec<Atom>);

impl Pure {
    pub fn truth() -> Pure {
        Pure(Vec::new())
    }

    pub fn atom(a: Atom) -> Pure {
        Pure(vec![a])
    }

    pub fn and(&self, other: &Pure) -> Pure {
        let mut atoms = self.0.clone();
        atoms.extend(other.0.iter().cloned());
        Pure(atoms)
    }

    pub fn push(&mut self, a: Atom) {
        self.0.push(a);
    }

    /// Definition of a named function symbol, if this conjunction carries
    /// one.
    pub fn fn_def(&self, name: &str) -> Option<&FunctionExpr> {
        self.0.iter().find_map(|a| match a {
            Atom::FnEq(n, f) if n == name => Some(f),
            _ => None,
        })
    }
}

/// Spatial assertions.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Spatial {
    /// `E |-> E'`
    PointsTo(SymExpr, SymExpr),
    /// `base |-> A[lo, hi | F]`: cells `base+lo ..= base+hi`, cell `base+j`
    /// holding `F(j)`.
    ArraySeg {
        base: SymExpr,
        lo: SymExpr,
        hi: SymExpr,
        contents: FunctionExpr,
    },
}

/// `∃x'. (Π ∧ Σ)` — primed variables are implicitly existentially
/// quantified. The spatial part is a flat multiset under `*`; empty is
/// `emp`.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SymbolicHeap {
    pub pure: Pure,
    pub spatial: Vec<Spatial>,
}

impl SymbolicHeap {
    pub fn new(pure: Pure, spatial: Vec<Spatial>) -> SymbolicHeap {
        SymbolicHeap { pure, spatial }
    }

    pub fn emp() -> SymbolicHeap {
        SymbolicHeap::default()
    }

    /// All primed variables occurring in the heap (free by construction,
    /// hence existential).
    pub fn primed_vars(&self) -> BTreeSet<(String, u64)> {
        let mut out = BTreeSet::new();
        self.visit_exprs(&mut |e| {
            if let SymExpr::Primed(h, id) = e {
                out.insert((h.clone(), *id));
            }
        });
        out
    }

    /// All program variables occurring in the heap.
    pub fn program_vars(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.visit_exprs(&mut |e| {
            if let SymExpr::Var(v) = e {
                out.insert(v.clone());
            }
        });
        out
    }

    /// Walk every expression node in the heap, including inside function
    /// expressions and eta conditions.
    pub fn visit_exprs(&self, f: &mut impl FnMut(&SymExpr)) {
        for a in &self.pure.0 {
            visit_atom(a, f);
        }
        for s in &self.spatial {
            match s {
                Spatial::PointsTo(a, b) => {
                    visit_expr(a, f);
                    visit_expr(b, f);
                }
                Spatial::ArraySeg {
                    base,
                    lo,
                    hi,
                    contents,
                } => {
                    visit_expr(base, f);
                    visit_expr(lo, f);
                    visit_expr(hi, f);
                    visit_fexpr(contents, f);
                }
            }
        }
    }
}

fn visit_atom(a: &Atom, f: &mut impl FnMut(&SymExpr)) {
    match a {
        Atom::Eq(x, y) | Atom::Ne(x, y) | Atom::Le(x, y) => {
            visit_expr(x, f);
            visit_expr(y, f);
        }
        Atom::FnEq(_, fe) => visit_fexpr(fe, f),
    }
}

fn visit_expr(e: &SymExpr, f: &mut impl FnMut(&SymExpr)) {
    f(e);
    match e {
        SymExpr::Op(_, args) => {
            for a in args {
                visit_expr(a, f);
            }
        }
        SymExpr::App(fe, arg) => {
            visit_fexpr(fe, f);
            visit_expr(arg, f);
        }
        _ => {}
    }
}

fn visit_fexpr(fe: &FunctionExpr, f: &mut impl FnMut(&SymExpr)) {
    match fe {
        FunctionExpr::Lambda(body) => visit_expr(body, f),
        FunctionExpr::Eta { cond, then, els } => {
            for a in &cond.0 {
                visit_atom(a, f);
            }
            visit_fexpr(then, f);
            visit_fexpr(els, f);
        }
        FunctionExpr::Symbol(_) => {}
    }
}

/// What a substitution replaces.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Target {
    Var(String),
    Primed(String, u64),
    Tid,
    /// The bound index. Substituting for `Idx` does not descend into
    /// applicand function expressions — their `Idx` is their own binder.
    Idx,
}

impl Target {
    fn matches(&self, e: &SymExpr) -> bool {
        match (self, e) {
            (Target::Var(v), SymExpr::Var(w)) => v == w,
            (Target::Primed(h, i), SymExpr::Primed(h2, i2)) => h == h2 && i == i2,
            (Target::Tid, SymExpr::Tid) => true,
            (Target::Idx, SymExpr::Idx) => true,
            _ => false,
        }
    }
}

/// Capture-avoiding substitution in an expression.
pub fn subst_sym(e: &SymExpr, target: &Target, repl: &SymExpr) -> SymExpr {
    if target.matches(e) {
        return repl.clone();
    }
    match e {
        SymExpr::Op(op, args) => SymExpr::Op(
            *op,
            args.iter().map(|a| subst_sym(a, target, repl)).collect(),
        ),
        SymExpr::App(fe, arg) => {
            let fe2 = if matches!(target, Target::Idx) {
                // applicand's Idx is bound by its own binder
                (**fe).clone()
            } else {
                subst_fexpr(fe, target, repl)
            };
            SymExpr::app(fe2, subst_sym(arg, target, repl))
        }
        _ => e.clone(),
    }
}

/// Substitution in a function expression. For `Target::Idx` this is only
/// used internally by [`apply`] on the outermost binder.
pub fn subst_fexpr(fe: &FunctionExpr, target: &Target, repl: &SymExpr) -> FunctionExpr {
    match fe {
        FunctionExpr::Lambda(body) => FunctionExpr::lambda(subst_sym(body, target, repl)),
        FunctionExpr::Eta { cond, then, els } => FunctionExpr::eta(
            subst_pure(cond, target, repl),
            subst_fexpr(then, target, repl),
            subst_fexpr(els, target, repl),
        ),
        FunctionExpr::Symbol(s) => FunctionExpr::Symbol(s.clone()),
    }
}

pub fn subst_pure(p: &Pure, target: &Target, repl: &SymExpr) -> Pure {
    Pure(
        p.0.iter()
            .map(|a| match a {
                Atom::Eq(x, y) => Atom::Eq(subst_sym(x, target, repl), subst_sym(y, target, repl)),
                Atom::Ne(x, y) => Atom::Ne(subst_sym(x, target, repl), subst_sym(y, target, repl)),
                Atom::Le(x, y) => Atom::Le(subst_sym(x, target, repl), subst_sym(y, target, repl)),
                Atom::FnEq(n, fe) => Atom::FnEq(n.clone(), subst_fexpr(fe, target, repl)),
            })
            .collect(),
    )
}

/// Substitution across a whole heap — pure part, spatial part, and the
/// bodies and conditions of every function expression.
pub fn subst_heap(h: &SymbolicHeap, target: &Target, repl: &SymExpr) -> SymbolicHeap {
    SymbolicHeap {
        pure: subst_pure(&h.pure, target, repl),
        spatial: h
            .spatial
            .iter()
            .map(|s| match s {
                Spatial::PointsTo(a, b) => {
                    Spatial::PointsTo(subst_sym(a, target, repl), subst_sym(b, target, repl))
                }
                Spatial::ArraySeg {
                    base,
                    lo,
                    hi,
                    contents,
                } => Spatial::ArraySeg {
                    base: subst_sym(base, target, repl),
                    lo: subst_sym(lo, target, repl),
                    hi: subst_sym(hi, target, repl),
                    contents: subst_fexpr(contents, target, repl),
                },
            })
            .collect(),
    }
}

/// Apply a function expression to an index expression. `lam` β-reduces;
/// `eta` and symbols stay as application nodes (the prover and evaluator
/// resolve them).
pub fn apply(fe: &FunctionExpr, arg: &SymExpr) -> SymExpr {
    match fe {
        FunctionExpr::Lambda(body) => subst_sym(body, &Target::Idx, arg),
        _ => SymExpr::app(fe.clone(), arg.clone()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn x() -> SymExpr {
        SymExpr::var("x")
    }

    #[test]
    fn subst_rewrites_pure_and_spatial() {
        // x = 3 ∧ emp   [x'/x]   →   x'0 = 3 ∧ emp
        let h = SymbolicHeap::new(
            Pure::atom(Atom::Eq(x(), SymExpr::Const(3))),
            vec![],
        );
        let xp = SymExpr::Primed("x".into(), 0);
        let h2 = subst_heap(&h, &Target::Var("x".into()), &xp);
        assert_eq!(h2.pure.0, vec![Atom::Eq(xp, SymExpr::Const(3))]);
    }

    #[test]
    fn subst_descends_into_eta_conditions() {
        // eta(i = tid; f; g)[t/tid] = eta(i = t; f[t/tid]; g[t/tid])
        let f = FunctionExpr::eta(
            Pure::atom(Atom::Eq(SymExpr::Idx, SymExpr::Tid)),
            FunctionExpr::lambda(SymExpr::Tid),
            FunctionExpr::Symbol("g".into()),
        );
        let t = SymExpr::var("t");
        let f2 = subst_fexpr(&f, &Target::Tid, &t);
        let FunctionExpr::Eta { cond, then, .. } = &f2 else {
            panic!()
        };
        assert_eq!(cond.0, vec![Atom::Eq(SymExpr::Idx, t.clone())]);
        assert_eq!(**then, FunctionExpr::lambda(t));
    }

    #[test]
    fn subst_of_absent_variable_is_identity() {
        let h = SymbolicHeap::new(
            Pure::atom(Atom::Le(SymExpr::Const(0), SymExpr::Tid)),
            vec![Spatial::PointsTo(x(), SymExpr::Const(7))],
        );
        let h2 = subst_heap(&h, &Target::Var("zz".into()), &SymExpr::Const(1));
        assert_eq!(h, h2);
    }

    #[test]
    fn idx_substitution_does_not_capture_applicand_binders() {
        // lam i. (eta(i = 0; f; g))(i + 1)  applied at 5  must substitute the
        // argument but leave the eta's own condition alone
        let inner = FunctionExpr::eta(
            Pure::atom(Atom::Eq(SymExpr::Idx, SymExpr::Const(0))),
            FunctionExpr::Symbol("f".into()),
            FunctionExpr::Symbol("g".into()),
        );
        let outer = FunctionExpr::lambda(SymExpr::app(
            inner.clone(),
            SymExpr::add(SymExpr::Idx, SymExpr::Const(1)),
        ));
        let applied = apply(&outer, &SymExpr::Const(5));
        let SymExpr::App(fe, arg) = &applied else {
            panic!()
        };
        assert_eq!(**fe, inner, "eta condition untouched");
        assert_eq!(
            **arg,
            SymExpr::add(SymExpr::Const(5), SymExpr::Const(1)),
            "argument substituted"
        );
    }

    #[test]
    fn substitution_composition_commutes_for_disjoint_vars() {
        let h = SymbolicHeap::new(
            Pure(vec![
                Atom::Eq(x(), SymExpr::var("y")),
                Atom::Le(SymExpr::var("y"), SymExpr::Const(4)),
            ]),
            vec![Spatial::PointsTo(x(), SymExpr::var("y"))],
        );
        let e1 = SymExpr::Const(1);
        let e2 = SymExpr::Const(2);
        let tx = Target::Var("x".into());
        let ty = Target::Var("y".into());
        let a = subst_heap(&subst_heap(&h, &tx, &e1), &ty, &e2);
        let b = subst_heap(&subst_heap(&h, &ty, &e2), &tx, &e1);
        assert_eq!(a, b);
    }
}
