//! Fresh-name supply for primed variables and function symbols.
//!
//! Deterministic given its starting counter, and safe for concurrent draws.

use super::syntax::SymExpr;
use std::sync::atomic::{AtomicU64, Ordering};

#[derive(Debug, Default)]
pub struct FreshSupply {
    counter: AtomicU64,
}

impl FreshSupply {
    pub fn new() -> Self {
        FreshSupply::default()
    }

    pub fn starting_at(n: u64) -> Self {
        FreshSupply {
            counter: AtomicU64::new(n),
        }
    }

    fn next(&self) -> u64 {
        self.counter.fetch_add(1, Ordering::Relaxed)
    }

    /// A globally-unused primed variable whose name embeds the hint, e.g.
    /// `v'3` for hint `v`.
    pub fn primed(&self, hint: &str) -> SymExpr {
        SymExpr::Primed(hint.to_string(), self.next())
    }

    /// A fresh function-symbol name, e.g. `A$3` for hint `A`.
    pub fn fn_symbol(&self, hint: &str) -> String {
        format!("{hint}${}", self.next())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeSet;

    #[test]
    fn draws_are_distinct_and_embed_the_hint() {
        let s = FreshSupply::new();
        let a = s.primed("v");
        let b = s.primed("v");
        assert_ne!(a, b);
        let SymExpr::Primed(hint, _) = a else { panic!() };
        assert_eq!(hint, "v");
    }

    #[test]
    fn a_thousand_draws_stay_distinct() {
        let s = FreshSupply::new();
        let names: BTreeSet<_> = (0..1000).map(|_| s.primed("x")).collect();
        assert_eq!(names.len(), 1000);
    }
}
