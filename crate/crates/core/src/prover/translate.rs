//! Translation of symbolic expressions into linear integer constraints.
//!
//! Linear structure (constants, sums, constant multiples) is kept; anything
//! else — products of variables, division, modulo, `cos`/`sqrt`,
//! unresolvable function applications — is abstracted to an opaque variable
//! keyed by the (folded) subterm, so syntactically identical subterms share
//! one variable. That gives congruence-style reasoning and errs toward
//! "not proven", which is the sound direction everywhere the analyzer asks.
//!
//! Function applications unfold before abstraction:
//!
//! * `(lam i. B)(e)` β-reduces;
//! * `g(e)` where the context pure part defines `g = F` δ-expands to `F(e)`;
//! * `eta(φ; T; E)(e)` asks the solver to decide `φ(e)` against the current
//!   context (recursively, depth-limited) and reduces to the chosen branch;
//!   an undecided condition leaves the application opaque.

use super::fm::{LinCon, LinExpr};
use super::Solver;
use crate::lang::OpKind;
use crate::symheap::{apply, subst_pure, Atom, FunctionExpr, Pure, SymExpr, Target};
use crate::symheap::simplify::fold;

impl Solver {
    /// Map an opaque term to its LIA variable.
    pub(super) fn opaque_var(&mut self, key: SymExpr) -> LinExpr {
        let next = self.atoms.len();
        let id = *self.atoms.entry(key).or_insert(next);
        LinExpr::var(id)
    }

    /// Normalize an expression to linear form at the given unfold depth.
    pub(super) fn linearize(&mut self, e: &SymExpr, depth: u32) -> LinExpr {
        match e {
            SymExpr::Const(c) => LinExpr::constant(*c as i128),
            SymExpr::Var(_)
            | SymExpr::Primed(..)
            | SymExpr::Tid
            | SymExpr::NThreads
            | SymExpr::Size(_)
            | SymExpr::Idx => self.opaque_var(e.clone()),
            SymExpr::Op(op, args) => match op {
                OpKind::Add | OpKind::Sub => {
                    let a = self.linearize(&args[0], depth);
                    let b = self.linearize(&args[1], depth);
                    let b = if *op == OpKind::Sub {
                        b.checked_scale(-1)
                    } else {
                        Some(b)
                    };
                    match b.and_then(|b| a.checked_add(&b)) {
                        Some(r) => r,
                        None => self.opaque_var(fold(e)),
                    }
                }
                OpKind::Neg => {
                    let a = self.linearize(&args[0], depth);
                    match a.checked_scale(-1) {
                        Some(r) => r,
                        None => self.opaque_var(fold(e)),
                    }
                }
                OpKind::Mul => {
                    let a = self.linearize(&args[0], depth);
                    let b = self.linearize(&args[1], depth);
                    let scaled = if a.is_constant() {
                        b.checked_scale(a.constant)
                    } else if b.is_constant() {
                        a.checked_scale(b.constant)
                    } else {
                        None
                    };
                    match scaled {
                        Some(r) => r,
                        None => self.opaque_var(fold(e)),
                    }
                }
                OpKind::Div | OpKind::Mod | OpKind::Cos | OpKind::Sqrt => {
                    self.opaque_var(fold(e))
                }
            },
            SymExpr::App(fe, arg) => {
                let folded_arg = fold(arg);
                match self.unfold_app(fe, &folded_arg, depth) {
                    Some(reduced) => self.linearize(&reduced, depth),
                    None => self.opaque_var(fold(e)),
                }
            }
        }
    }

    /// Try to reduce `fe(arg)` one step. `None` means the application stays
    /// opaque.
    fn unfold_app(&mut self, fe: &FunctionExpr, arg: &SymExpr, depth: u32) -> Option<SymExpr> {
        if depth == 0 {
            return None;
        }
        match fe {
            FunctionExpr::Lambda(_) => Some(apply(fe, arg)),
            FunctionExpr::Symbol(s) => {
                let def = self.defs.get(s).cloned()?;
                self.unfold_app(&def, arg, depth - 1)
            }
            FunctionExpr::Eta { cond, then, els } => {
                let cond_at = subst_pure(cond, &Target::Idx, arg);
                match self.decide(&cond_at, depth - 1) {
                    Some(true) => self.unfold_app(then, arg, depth - 1).or_else(|| {
                        Some(SymExpr::app((**then).clone(), arg.clone()))
                    }),
                    Some(false) => self.unfold_app(els, arg, depth - 1).or_else(|| {
                        Some(SymExpr::app((**els).clone(), arg.clone()))
                    }),
                    None => None,
                }
            }
        }
    }

    /// Decide a substituted eta condition against the solver's context:
    /// `Some(true)` when every atom is provable, `Some(false)` when the
    /// conjunction is refutable, `None` otherwise. Memoized per query.
    pub(super) fn decide(&mut self, cond: &Pure, depth: u32) -> Option<bool> {
        if let Some(hit) = self.decision_memo.get(&cond.0) {
            return *hit;
        }
        let arithmetic: Vec<Atom> = cond
            .0
            .iter()
            .filter(|a| !matches!(a, Atom::FnEq(..)))
            .cloned()
            .collect();
        let result = (|| {
            // refutable?
            let mut cons = self.context_cons.clone();
            for a in &arithmetic {
                cons.extend(self.atom_cons(a, depth));
            }
            if self.refute_cons(&cons) {
                return Some(false);
            }
            // provable atom by atom?
            for a in &arithmetic {
                let mut cons = self.context_cons.clone();
                cons.extend(self.negate_atom(a, depth));
                if !self.refute_cons(&cons) {
                    return None;
                }
            }
            Some(true)
        })();
        self.decision_memo.insert(cond.0.clone(), result);
        result
    }

    /// Linear constraints asserting an atom.
    pub(super) fn atom_cons(&mut self, a: &Atom, depth: u32) -> Vec<LinCon> {
        match a {
            Atom::Eq(x, y) => {
                let d = self.diff(x, y, depth);
                vec![LinCon::Eq(d)]
            }
            Atom::Ne(x, y) => {
                let d = self.diff(x, y, depth);
                vec![LinCon::Ne(d)]
            }
            Atom::Le(x, y) => {
                let d = self.diff(x, y, depth);
                vec![LinCon::Le(d)]
            }
            Atom::FnEq(..) => vec![],
        }
    }

    /// Linear constraints asserting an atom's negation.
    pub(super) fn negate_atom(&mut self, a: &Atom, depth: u32) -> Vec<LinCon> {
        match a {
            Atom::Eq(x, y) => {
                let d = self.diff(x, y, depth);
                vec![LinCon::Ne(d)]
            }
            Atom::Ne(x, y) => {
                let d = self.diff(x, y, depth);
                vec![LinCon::Eq(d)]
            }
            // ¬(x ≤ y)  ⟺  y + 1 ≤ x  ⟺  y - x + 1 ≤ 0
            Atom::Le(x, y) => {
                let d = self.diff(y, x, depth);
                match d.checked_add(&LinExpr::constant(1)) {
                    Some(d1) => vec![LinCon::Le(d1)],
                    None => vec![],
                }
            }
            Atom::FnEq(..) => vec![],
        }
    }

    fn diff(&mut self, x: &SymExpr, y: &SymExpr, depth: u32) -> LinExpr {
        let a = self.linearize(x, depth);
        let b = self.linearize(y, depth);
        a.checked_sub(&b)
            .unwrap_or_else(|| self.opaque_var(fold(&SymExpr::bin(OpKind::Sub, x.clone(), y.clone()))))
    }
}
