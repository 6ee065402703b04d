//! Symbolic heaps: the separation-logic fragment used by the analyzer.
//!
//! A symbolic heap is an (implicitly existentially closed) pair of a pure
//! conjunction `Π` and a spatial multiset `Σ` of points-to and array-segment
//! assertions. Array contents are *function expressions*: either `lam i. E`,
//! a named content symbol, or an `eta(φ; then; else)` update layer that
//! records a (possibly thread-parametric) write on top of a snapshot.
//!
//! Everything here is immutable after construction; the only mutable piece
//! is the fresh-name supply.

mod eval;
mod fresh;
mod parse;
mod print;
mod rename;
mod satisfies;
pub mod simplify;
mod syntax;

pub use eval::{eval_fexpr, eval_sym, pure_holds, FnInterp, Model, SymEvalError};
pub use fresh::FreshSupply;
pub use parse::parse_heap;
pub use print::{fexpr_to_string, heap_to_string, pure_to_string, sym_to_string};
pub use rename::{rename, RenameCtx};
pub use satisfies::{satisfies, SatisfiesCfg, SatisfiesError};
pub use simplify::{simplify, simplify_fexpr};
pub use syntax::{
    apply, subst_fexpr, subst_heap, subst_pure, subst_sym, Atom, FunctionExpr, Pure, Spatial,
    SymExpr, SymbolicHeap, Target,
};
