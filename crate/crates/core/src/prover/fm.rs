//! Integer-aware Fourier–Motzkin refutation.
//!
//! The engine only ever *refutes*: it answers "this conjunction of linear
//! integer constraints has no solution" or "unknown". Everything it derives
//! is valid over the reals (resolution of bounds) or exact over the
//! integers (equality substitution, GCD tests, bound tightening), so a
//! refutation is sound for ℤ. The converse direction is deliberately
//! incomplete — integer-infeasible but real-feasible systems (dark-shadow
//! territory) come back `Unknown`.
//!
//! Coefficients are i128 internally; any overflow aborts to `Unknown`.

use std::cell::Cell;
use std::collections::BTreeMap;

/// `Σ coeffs·x + constant`, compared against 0.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct LinExpr {
    pub coeffs: BTreeMap<usize, i128>,
    pub constant: i128,
}

impl LinExpr {
    pub fn constant(c: i128) -> LinExpr {
        LinExpr {
            coeffs: BTreeMap::new(),
            constant: c,
        }
    }

    pub fn var(v: usize) -> LinExpr {
        LinExpr {
            coeffs: BTreeMap::from([(v, 1)]),
            constant: 0,
        }
    }

    pub fn is_constant(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn checked_add(&self, other: &LinExpr) -> Option<LinExpr> {
        let mut out = self.clone();
        out.constant = out.constant.checked_add(other.constant)?;
        for (v, c) in &other.coeffs {
            let e = out.coeffs.entry(*v).or_insert(0);
            *e = e.checked_add(*c)?;
            if *e == 0 {
                out.coeffs.remove(v);
            }
        }
        Some(out)
    }

    pub fn checked_scale(&self, k: i128) -> Option<LinExpr> {
        let mut out = LinExpr {
            coeffs: BTreeMap::new(),
            constant: self.constant.checked_mul(k)?,
        };
        if k == 0 {
            return Some(out);
        }
        for (v, c) in &self.coeffs {
            out.coeffs.insert(*v, c.checked_mul(k)?);
        }
        Some(out)
    }

    pub fn checked_sub(&self, other: &LinExpr) -> Option<LinExpr> {
        self.checked_add(&other.checked_scale(-1)?)
    }
}

/// A constraint: the expression related to zero.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LinCon {
    /// expr ≤ 0
    Le(LinExpr),
    /// expr = 0
    Eq(LinExpr),
    /// expr ≠ 0
    Ne(LinExpr),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Refutation {
    Refuted,
    Unknown,
}

fn gcd(a: i128, b: i128) -> i128 {
    let (mut a, mut b) = (a.abs(), b.abs());
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

fn floor_div(a: i128, b: i128) -> i128 {
    debug_assert!(b > 0);
    a.div_euclid(b)
}

/// Refute a conjunction of constraints, spending at most `budget` steps.
pub fn refute(cons: &[LinCon], budget: &Cell<u64>, split_cap: u32) -> Refutation {
    let mut les: Vec<LinExpr> = Vec::new();
    let mut eqs: Vec<LinExpr> = Vec::new();
    let mut nes: Vec<LinExpr> = Vec::new();
    for c in cons {
        match c {
            LinCon::Le(e) => les.push(e.clone()),
            LinCon::Eq(e) => eqs.push(e.clone()),
            LinCon::Ne(e) => nes.push(e.clone()),
        }
    }
    refute_split(les, eqs, &nes, budget, split_cap)
}

/// Case-split disequalities: `e ≠ 0` becomes `e ≤ -1 ∨ e ≥ 1`; the system
/// is refuted when every branch is.
fn refute_split(
    les: Vec<LinExpr>,
    eqs: Vec<LinExpr>,
    nes: &[LinExpr],
    budget: &Cell<u64>,
    split_cap: u32,
) -> Refutation {
    match nes.split_first() {
        None => refute_conj(les, eqs, budget),
        Some((ne, rest)) => {
            if split_cap == 0 || budget.get() == 0 {
                return Refutation::Unknown;
            }
            // trivially-decided disequalities don't need a split
            if ne.is_constant() {
                return if ne.constant == 0 {
                    // 0 ≠ 0 is false: refuted regardless of the rest
                    Refutation::Refuted
                } else {
                    refute_split(les, eqs, rest, budget, split_cap)
                };
            }
            // e + 1 ≤ 0  (e ≤ -1)
            let mut low = les.clone();
            let Some(e_plus) = ne.checked_add(&LinExpr::constant(1)) else {
                return Refutation::Unknown;
            };
            low.push(e_plus);
            if refute_split(low, eqs.clone(), rest, budget, split_cap - 1) != Refutation::Refuted {
                return Refutation::Unknown;
            }
            // 1 - e ≤ 0  (e ≥ 1)
            let mut high = les;
            let Some(neg) = ne.checked_scale(-1).and_then(|n| n.checked_add(&LinExpr::constant(1)))
            else {
                return Refutation::Unknown;
            };
            high.push(neg);
            refute_split(high, eqs, rest, budget, split_cap - 1)
        }
    }
}

fn spend(budget: &Cell<u64>, amount: u64) -> bool {
    let b = budget.get();
    if b < amount {
        budget.set(0);
        false
    } else {
        budget.set(b - amount);
        true
    }
}

fn refute_conj(mut les: Vec<LinExpr>, mut eqs: Vec<LinExpr>, budget: &Cell<u64>) -> Refutation {
    // eliminate equalities first
    while let Some(eq) = eqs.pop() {
        if !spend(budget, 1) {
            return Refutation::Unknown;
        }
        if eq.is_constant() {
            if eq.constant != 0 {
                return Refutation::Refuted;
            }
            continue;
        }
        // GCD test: Σ aᵢxᵢ = -c needs gcd(aᵢ) | c
        let g = eq.coeffs.values().fold(0i128, |acc, c| gcd(acc, *c));
        if eq.constant % g != 0 {
            return Refutation::Refuted;
        }
        // substitute out a unit-coefficient variable when one exists
        if let Some((&v, &c)) = eq.coeffs.iter().find(|(_, c)| c.abs() == 1) {
            // v = sign · (rest + constant) with sign = -c
            let mut rest = eq.clone();
            rest.coeffs.remove(&v);
            let Some(repl) = rest.checked_scale(-c) else {
                return Refutation::Unknown;
            };
            let sub = |e: &LinExpr| -> Option<LinExpr> {
                match e.coeffs.get(&v) {
                    None => Some(e.clone()),
                    Some(&k) => {
                        let mut base = e.clone();
                        base.coeffs.remove(&v);
                        base.checked_add(&repl.checked_scale(k)?)
                    }
                }
            };
            let mut new_les = Vec::with_capacity(les.len());
            for e in &les {
                match sub(e) {
                    Some(x) => new_les.push(x),
                    None => return Refutation::Unknown,
                }
            }
            let mut new_eqs = Vec::with_capacity(eqs.len());
            for e in &eqs {
                match sub(e) {
                    Some(x) => new_eqs.push(x),
                    None => return Refutation::Unknown,
                }
            }
            les = new_les;
            eqs = new_eqs;
        } else {
            // no unit coefficient: normalize by the gcd and keep as two
            // inequalities
            let mut e = eq.clone();
            for c in e.coeffs.values_mut() {
                *c /= g;
            }
            e.constant /= g;
            let Some(neg) = e.checked_scale(-1) else {
                return Refutation::Unknown;
            };
            les.push(e);
            les.push(neg);
        }
    }

    // Fourier–Motzkin elimination over the inequalities
    loop {
        // normalize: gcd-tighten, detect constant contradictions, drop
        // trivially-true constraints
        let mut seen: Vec<LinExpr> = Vec::new();
        for e in les.drain(..) {
            if e.is_constant() {
                if e.constant > 0 {
                    return Refutation::Refuted;
                }
                continue;
            }
            let g = e.coeffs.values().fold(0i128, |acc, c| gcd(acc, *c));
            let mut t = e;
            if g > 1 {
                for c in t.coeffs.values_mut() {
                    *c /= g;
                }
                // a·x ≤ -c  ⟹  (a/g)·x ≤ floor(-c/g): integer tightening
                t.constant = -floor_div(-t.constant, g);
            }
            if !seen.contains(&t) {
                seen.push(t);
            }
        }
        les = seen;
        let Some(&v) = les.iter().flat_map(|e| e.coeffs.keys()).min_by_key(|&&v| {
            let lowers = les.iter().filter(|e| e.coeffs.get(&v).is_some_and(|c| *c < 0)).count();
            let uppers = les.iter().filter(|e| e.coeffs.get(&v).is_some_and(|c| *c > 0)).count();
            lowers * uppers
        }) else {
            // no variables left and no contradiction found
            return Refutation::Unknown;
        };
        let mut lowers = Vec::new(); // e with coeff(v) < 0: gives a lower bound on v
        let mut uppers = Vec::new();
        let mut rest = Vec::new();
        for e in les.drain(..) {
            match e.coeffs.get(&v) {
                Some(&c) if c < 0 => lowers.push(e),
                Some(&c) if c > 0 => uppers.push(e),
                _ => rest.push(e),
            }
        }
        let combos = lowers.len() as u64 * uppers.len() as u64;
        if !spend(budget, combos.max(1)) {
            return Refutation::Unknown;
        }
        for lo in &lowers {
            for up in &uppers {
                let a = -lo.coeffs[&v]; // > 0
                let b = up.coeffs[&v]; // > 0
                // a·up + b·lo eliminates v (real shadow)
                let Some(combined) = up
                    .checked_scale(a)
                    .and_then(|x| lo.checked_scale(b).and_then(|y| x.checked_add(&y)))
                else {
                    return Refutation::Unknown;
                };
                rest.push(combined);
            }
        }
        les = rest;
        if les.is_empty() {
            return Refutation::Unknown;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fresh_budget() -> Cell<u64> {
        Cell::new(10_000)
    }

    fn le(pairs: &[(usize, i128)], c: i128) -> LinCon {
        LinCon::Le(LinExpr {
            coeffs: pairs.iter().copied().filter(|(_, c)| *c != 0).collect(),
            constant: c,
        })
    }

    fn eq(pairs: &[(usize, i128)], c: i128) -> LinCon {
        LinCon::Eq(LinExpr {
            coeffs: pairs.iter().copied().filter(|(_, c)| *c != 0).collect(),
            constant: c,
        })
    }

    #[test]
    fn detects_interval_contradiction() {
        // x ≤ 3 ∧ x ≥ 5: x - 3 ≤ 0, 5 - x ≤ 0
        let cons = vec![le(&[(0, 1)], -3), le(&[(0, -1)], 5)];
        assert_eq!(refute(&cons, &fresh_budget(), 8), Refutation::Refuted);
    }

    #[test]
    fn satisfiable_interval_is_unknown() {
        // 2 ≤ x < 4
        let cons = vec![le(&[(0, -1)], 2), le(&[(0, 1)], -3)];
        assert_eq!(refute(&cons, &fresh_budget(), 8), Refutation::Unknown);
    }

    #[test]
    fn gcd_test_refutes_parity_equations() {
        // 2x = 5
        let cons = vec![eq(&[(0, 2)], -5)];
        assert_eq!(refute(&cons, &fresh_budget(), 8), Refutation::Refuted);
    }

    #[test]
    fn integer_tightening_catches_strict_bounds() {
        // 3 ≤ 2x ≤ 3: real-feasible (x = 1.5), integer-infeasible;
        // tightening 2x ≤ 3 to x ≤ 1 and 2x ≥ 3 to x ≥ 2 exposes it
        let cons = vec![le(&[(0, 2)], -3), le(&[(0, -2)], 3)];
        assert_eq!(refute(&cons, &fresh_budget(), 8), Refutation::Refuted);
    }

    #[test]
    fn disequality_split_refutes_pigeonhole() {
        // 0 ≤ x ≤ 1 ∧ x ≠ 0 ∧ x ≠ 1
        let cons = vec![
            le(&[(0, -1)], 0),
            le(&[(0, 1)], -1),
            LinCon::Ne(LinExpr::var(0)),
            LinCon::Ne(LinExpr {
                coeffs: BTreeMap::from([(0, 1)]),
                constant: -1,
            }),
        ];
        assert_eq!(refute(&cons, &fresh_budget(), 8), Refutation::Refuted);
    }

    #[test]
    fn equality_substitution_chains() {
        // x = y ∧ y = z ∧ x - z ≠ 0
        let cons = vec![
            eq(&[(0, 1), (1, -1)], 0),
            eq(&[(1, 1), (2, -1)], 0),
            LinCon::Ne(LinExpr {
                coeffs: BTreeMap::from([(0, 1), (2, -1)]),
                constant: 0,
            }),
        ];
        assert_eq!(refute(&cons, &fresh_budget(), 8), Refutation::Refuted);
    }

    #[test]
    fn exhausted_budget_is_unknown_not_refuted() {
        let cons = vec![le(&[(0, 1)], -3), le(&[(0, -1)], 5)];
        let budget = Cell::new(0);
        assert_eq!(refute(&cons, &budget, 8), Refutation::Unknown);
    }
}
