//! Thread instantiation: replace `tid` and tag private names.
//!
//! `rename(h, i, tag, ctx)` replaces every occurrence of `tid` by `i` and
//! renames all private variables (and per-thread logical names: primed
//! variables and per-epoch write-layer symbols) to `name@tag` variants, so
//! two instantiations with distinct tags share no private names. Shared
//! scalars, shared array bases, initial-content symbols and committed
//! snapshot symbols stay untouched — they denote the one shared state.
//!
//! Already-tagged names (containing `@`) are left alone, which makes the
//! operation idempotent on its own output provided the instance expression
//! `i` is itself rename-stable — a constant, or a logical variable whose
//! hint carries the tag (`tid@i1`), which is how the race check builds
//! them.

use super::syntax::{Atom, FunctionExpr, Pure, Spatial, SymExpr, SymbolicHeap};
use std::collections::BTreeSet;

#[derive(Debug, Clone, Default)]
pub struct RenameCtx {
    /// Shared program variables: shared scalars plus shared array names.
    pub shared_vars: BTreeSet<String>,
    /// Function symbols denoting shared contents (initial arrays, committed
    /// snapshots). Everything else is a per-thread write layer.
    pub shared_fns: BTreeSet<String>,
}

fn tag_name(name: &str, tag: &str) -> String {
    if name.contains('@') {
        name.to_string()
    } else {
        format!("{name}@{tag}")
    }
}

pub fn rename(h: &SymbolicHeap, i: &SymExpr, tag: &str, ctx: &RenameCtx) -> SymbolicHeap {
    SymbolicHeap {
        pure: rename_pure(&h.pure, i, tag, ctx),
        spatial: h
            .spatial
            .iter()
            .map(|s| match s {
                Spatial::PointsTo(a, b) => {
                    Spatial::PointsTo(rename_sym(a, i, tag, ctx), rename_sym(b, i, tag, ctx))
                }
                Spatial::ArraySeg {
                    base,
                    lo,
                    hi,
                    contents,
                } => Spatial::ArraySeg {
                    base: rename_sym(base, i, tag, ctx),
                    lo: rename_sym(lo, i, tag, ctx),
                    hi: rename_sym(hi, i, tag, ctx),
                    contents: rename_fexpr(contents, i, tag, ctx),
                },
            })
            .collect(),
    }
}

pub(super) fn rename_pure(p: &Pure, i: &SymExpr, tag: &str, ctx: &RenameCtx) -> Pure {
    Pure(
        p.0.iter()
            .map(|a| match a {
                Atom::Eq(x, y) => Atom::Eq(rename_sym(x, i, tag, ctx), rename_sym(y, i, tag, ctx)),
                Atom::Ne(x, y) => Atom::Ne(rename_sym(x, i, tag, ctx), rename_sym(y, i, tag, ctx)),
                Atom::Le(x, y) => Atom::Le(rename_sym(x, i, tag, ctx), rename_sym(y, i, tag, ctx)),
                Atom::FnEq(n, fe) => Atom::FnEq(
                    rename_fn_name(n, tag, ctx),
                    rename_fexpr(fe, i, tag, ctx),
                ),
            })
            .collect(),
    )
}

fn rename_fn_name(name: &str, tag: &str, ctx: &RenameCtx) -> String {
    if ctx.shared_fns.contains(name) {
        name.to_string()
    } else {
        tag_name(name, tag)
    }
}

pub(super) fn rename_sym(e: &SymExpr, i: &SymExpr, tag: &str, ctx: &RenameCtx) -> SymExpr {
    match e {
        SymExpr::Tid => i.clone(),
        SymExpr::Var(v) => {
            if ctx.shared_vars.contains(v) {
                SymExpr::Var(v.clone())
            } else {
                SymExpr::Var(tag_name(v, tag))
            }
        }
        SymExpr::Primed(h, id) => SymExpr::Primed(tag_name(h, tag), *id),
        SymExpr::Const(_) | SymExpr::NThreads | SymExpr::Size(_) | SymExpr::Idx => e.clone(),
        SymExpr::Op(op, args) => SymExpr::Op(
            *op,
            args.iter().map(|a| rename_sym(a, i, tag, ctx)).collect(),
        ),
        SymExpr::App(fe, arg) => SymExpr::app(
            rename_fexpr(fe, i, tag, ctx),
            rename_sym(arg, i, tag, ctx),
        ),
    }
}

pub(super) fn rename_fexpr(
    fe: &FunctionExpr,
    i: &SymExpr,
    tag: &str,
    ctx: &RenameCtx,
) -> FunctionExpr {
    match fe {
        FunctionExpr::Lambda(body) => FunctionExpr::lambda(rename_sym(body, i, tag, ctx)),
        FunctionExpr::Eta { cond, then, els } => FunctionExpr::eta(
            rename_pure(cond, i, tag, ctx),
            rename_fexpr(then, i, tag, ctx),
            rename_fexpr(els, i, tag, ctx),
        ),
        FunctionExpr::Symbol(s) => FunctionExpr::Symbol(rename_fn_name(s, tag, ctx)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeSet;

    fn ctx() -> RenameCtx {
        RenameCtx {
            shared_vars: BTreeSet::from(["A".to_string(), "g".to_string()]),
            shared_fns: BTreeSet::from(["f_A".to_string()]),
        }
    }

    fn i1() -> SymExpr {
        SymExpr::Primed("tid@i1".into(), 100)
    }

    #[test]
    fn tid_becomes_the_instance_variable() {
        let h = SymbolicHeap::new(
            Pure::atom(Atom::Eq(SymExpr::Tid, SymExpr::Const(3))),
            vec![],
        );
        let r = rename(&h, &i1(), "i1", &ctx());
        assert_eq!(r.pure.0, vec![Atom::Eq(i1(), SymExpr::Const(3))]);
    }

    #[test]
    fn private_vars_tagged_shared_arrays_kept() {
        // v = tid ∧ A |-> lam i. i   →   v@i1 = i' ∧ A |-> lam i. i
        let h = SymbolicHeap::new(
            Pure::atom(Atom::Eq(SymExpr::var("v"), SymExpr::Tid)),
            vec![Spatial::ArraySeg {
                base: SymExpr::var("A"),
                lo: SymExpr::Const(0),
                hi: SymExpr::Const(7),
                contents: FunctionExpr::lambda(SymExpr::Idx),
            }],
        );
        let r = rename(&h, &i1(), "i1", &ctx());
        assert_eq!(
            r.pure.0,
            vec![Atom::Eq(SymExpr::var("v@i1"), i1())]
        );
        let Spatial::ArraySeg { base, .. } = &r.spatial[0] else {
            panic!()
        };
        assert_eq!(*base, SymExpr::var("A"));
    }

    #[test]
    fn distinct_tags_share_no_private_names() {
        let h = SymbolicHeap::new(
            Pure(vec![
                Atom::Eq(SymExpr::var("v"), SymExpr::Tid),
                Atom::Eq(SymExpr::Primed("w".into(), 4), SymExpr::Const(0)),
                Atom::FnEq("A$0".into(), FunctionExpr::Symbol("f_A".into())),
            ]),
            vec![],
        );
        let a = rename(&h, &SymExpr::Primed("tid@i1".into(), 100), "i1", &ctx());
        let b = rename(&h, &SymExpr::Primed("tid@j1".into(), 101), "j1", &ctx());
        let mut names_a = a.program_vars();
        names_a.extend(a.primed_vars().into_iter().map(|(h, _)| h));
        let mut names_b = b.program_vars();
        names_b.extend(b.primed_vars().into_iter().map(|(h, _)| h));
        let private = |n: &String| !ctx().shared_vars.contains(n);
        assert!(names_a
            .iter()
            .filter(|n| private(n))
            .all(|n| !names_b.contains(n)));
    }

    #[test]
    fn rename_is_idempotent_on_its_result() {
        let h = SymbolicHeap::new(
            Pure(vec![
                Atom::Eq(SymExpr::var("v"), SymExpr::Tid),
                Atom::Le(SymExpr::Primed("x".into(), 2), SymExpr::NThreads),
            ]),
            vec![Spatial::PointsTo(SymExpr::var("p"), SymExpr::var("g"))],
        );
        let once = rename(&h, &i1(), "i1", &ctx());
        let twice = rename(&once, &i1(), "i1", &ctx());
        assert_eq!(once, twice);
    }
}
