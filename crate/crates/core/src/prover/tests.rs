use super::*;
use crate::lang::OpKind;
use crate::symheap::{FunctionExpr, Pure, Spatial, SymExpr, SymbolicHeap};

fn v(n: &str) -> SymExpr {
    SymExpr::var(n)
}

fn c(n: i64) -> SymExpr {
    SymExpr::Const(n)
}

fn lt(a: SymExpr, b: SymExpr) -> Atom {
    // a < b  ⟺  a + 1 ≤ b
    Atom::Le(SymExpr::add(a, c(1)), b)
}

fn p() -> ProverCtx {
    ProverCtx::default()
}

#[test]
fn bounds_consequence_is_proven() {
    // 0 ≤ tid ∧ tid < size(A) ∧ size(A) = 8  ⊢  tid ≤ 7
    let ctx = Pure(vec![
        Atom::Le(c(0), SymExpr::Tid),
        lt(SymExpr::Tid, SymExpr::Size("A".into())),
        Atom::Eq(SymExpr::Size("A".into()), c(8)),
    ]);
    let goal = Atom::Le(SymExpr::Tid, c(7));
    assert_eq!(prove_pure(&ctx, &goal, &p()), ProofResult::Proven);
}

#[test]
fn unconstrained_tid_is_not_proven() {
    let goal = Atom::Le(SymExpr::Tid, c(7));
    assert_eq!(prove_pure(&Pure::truth(), &goal, &p()), ProofResult::NotProven);
}

#[test]
fn congruence_of_abstracted_symbols() {
    // x = cos(y) ∧ z = cos(y)  ⊢  x = z
    let cos_y = SymExpr::Op(OpKind::Cos, vec![v("y")]);
    let ctx = Pure(vec![
        Atom::Eq(v("x"), cos_y.clone()),
        Atom::Eq(v("z"), cos_y),
    ]);
    assert_eq!(
        prove_pure(&ctx, &Atom::Eq(v("x"), v("z")), &p()),
        ProofResult::Proven
    );
    // but cos of a different argument stays unrelated
    let cos_w = SymExpr::Op(OpKind::Cos, vec![v("w")]);
    let ctx2 = Pure(vec![
        Atom::Eq(v("x"), SymExpr::Op(OpKind::Cos, vec![v("y")])),
        Atom::Eq(v("z"), cos_w),
    ]);
    assert_eq!(
        prove_pure(&ctx2, &Atom::Eq(v("x"), v("z")), &p()),
        ProofResult::NotProven
    );
}

#[test]
fn sat_answers_follow_the_abstraction() {
    assert_eq!(
        sat(
            &Pure(vec![
                Atom::Eq(SymExpr::Tid, c(0)),
                Atom::Eq(SymExpr::Tid, c(1))
            ]),
            &p()
        ),
        SatOutcome::Unsat
    );
    assert_eq!(
        sat(
            &Pure(vec![lt(SymExpr::Tid, c(4)), Atom::Le(c(2), SymExpr::Tid)]),
            &p()
        ),
        SatOutcome::Sat
    );
    // x·x = -1 is masked by the nonlinear abstraction: documented imprecision
    let xx = SymExpr::bin(OpKind::Mul, v("x"), v("x"));
    assert_eq!(
        sat(&Pure(vec![Atom::Eq(xx, c(-1))]), &p()),
        SatOutcome::Sat
    );
}

#[test]
fn compare_constants_and_congruent_applications() {
    let h = SymbolicHeap::emp();
    assert!(compare(&c(5), &h, &c(5), &h, &p()));
    let fk = SymExpr::app(FunctionExpr::Symbol("f".into()), v("k"));
    assert!(compare(&fk, &h, &fk, &h, &p()));
    // unconstrained distinct thread-tagged names
    assert!(!compare(&v("v@i1"), &h, &v("v@j1"), &h, &p()));
}

#[test]
fn disjoint_offsets_and_bases() {
    let mut pc = p();
    pc.array_bases.insert("A".into());
    pc.array_bases.insert("B".into());
    let ctx_ne = SymbolicHeap::new(Pure(vec![Atom::Ne(v("i1"), v("j1"))]), vec![]);
    let a_i = SymExpr::add(v("A"), v("i1"));
    let a_j = SymExpr::add(v("A"), v("j1"));
    // A+i vs A+j under i ≠ j
    assert!(disjoint(&a_i, &ctx_ne, &a_j, &SymbolicHeap::emp(), &pc));
    // distinct bases regardless of offsets
    let b_k = SymExpr::add(v("B"), v("k"));
    assert!(disjoint(
        &a_i,
        &SymbolicHeap::emp(),
        &b_k,
        &SymbolicHeap::emp(),
        &pc
    ));
    // same base, unrelated offsets
    assert!(!disjoint(
        &a_i,
        &SymbolicHeap::emp(),
        &a_j,
        &SymbolicHeap::emp(),
        &pc
    ));
}

#[test]
fn compare_and_disjoint_are_mutually_exclusive_and_symmetric() {
    let mut pc = p();
    pc.array_bases.insert("A".into());
    let h1 = SymbolicHeap::new(
        Pure(vec![Atom::Ne(v("i1"), v("j1")), Atom::Eq(v("x"), c(4))]),
        vec![],
    );
    let h2 = SymbolicHeap::new(Pure(vec![Atom::Eq(v("y"), c(4))]), vec![]);
    let pairs = [
        (SymExpr::add(v("A"), v("i1")), SymExpr::add(v("A"), v("j1"))),
        (v("x"), v("y")),
        (c(3), c(3)),
        (v("x"), v("j1")),
    ];
    for (e1, e2) in pairs {
        let cmp_ab = compare(&e1, &h1, &e2, &h2, &pc);
        let cmp_ba = compare(&e2, &h2, &e1, &h1, &pc);
        let dis_ab = disjoint(&e1, &h1, &e2, &h2, &pc);
        let dis_ba = disjoint(&e2, &h2, &e1, &h1, &pc);
        assert_eq!(cmp_ab, cmp_ba);
        assert_eq!(dis_ab, dis_ba);
        assert!(!(cmp_ab && dis_ab), "both compare and disjoint for {e1:?} {e2:?}");
    }
}

#[test]
fn entailment_matches_frames_up_to_commutativity() {
    let x7 = Spatial::PointsTo(v("x"), c(7));
    let y8 = Spatial::PointsTo(v("y"), c(8));
    // x = 3 ∧ x ↦ 7 ⊢ x ↦ 7
    let ant = SymbolicHeap::new(Pure(vec![Atom::Eq(v("x"), c(3))]), vec![x7.clone()]);
    let cons = SymbolicHeap::new(Pure::truth(), vec![x7.clone()]);
    assert_eq!(
        prove_entailment(&ant, &Consequent::Heap(cons), &p()),
        ProofResult::Proven
    );
    // commutativity of *
    let ant2 = SymbolicHeap::new(Pure::truth(), vec![x7.clone(), y8.clone()]);
    let cons2 = SymbolicHeap::new(Pure::truth(), vec![y8, x7.clone()]);
    assert_eq!(
        prove_entailment(&ant2, &Consequent::Heap(cons2), &p()),
        ProofResult::Proven
    );
    // wrong contents
    let ant3 = SymbolicHeap::new(Pure::truth(), vec![x7]);
    let cons3 = SymbolicHeap::new(
        Pure::truth(),
        vec![Spatial::PointsTo(v("x"), c(8))],
    );
    assert_eq!(
        prove_entailment(&ant3, &Consequent::Heap(cons3), &p()),
        ProofResult::NotProven
    );
}

#[test]
fn eta_conditions_are_decided_against_the_context() {
    // t = chain(tid+1) where chain = eta(Π ∧ i = tid; lam i. 1; f0):
    // at index tid+1 the condition contains tid+1 = tid, which is refutable,
    // so the application reduces to f0(tid+1); with f0 = lam i. 0, t = 0.
    let chain = FunctionExpr::eta(
        Pure(vec![
            Atom::Le(c(0), SymExpr::Tid),
            Atom::Eq(SymExpr::Idx, SymExpr::Tid),
        ]),
        FunctionExpr::lambda(c(1)),
        FunctionExpr::Symbol("f0".into()),
    );
    let read = SymExpr::app(chain.clone(), SymExpr::add(SymExpr::Tid, c(1)));
    let ctx = Pure(vec![
        Atom::Le(c(0), SymExpr::Tid),
        Atom::FnEq("f0".into(), FunctionExpr::lambda(c(0))),
        Atom::Eq(v("t"), read),
    ]);
    assert_eq!(
        prove_pure(&ctx, &Atom::Eq(v("t"), c(0)), &p()),
        ProofResult::Proven
    );
    // at index tid the condition is provable and the then-branch is taken
    let own_read = SymExpr::app(chain, SymExpr::Tid);
    let ctx2 = Pure(vec![
        Atom::Le(c(0), SymExpr::Tid),
        Atom::Eq(v("t"), own_read),
    ]);
    assert_eq!(
        prove_pure(&ctx2, &Atom::Eq(v("t"), c(1)), &p()),
        ProofResult::Proven
    );
}

#[test]
fn external_solver_is_trusted_only_for_unsat() {
    use std::io::Write;
    use std::os::unix::fs::PermissionsExt;
    let dir = std::env::temp_dir();
    let write_fake = |name: &str, answer: &str| {
        let path = dir.join(name);
        let mut f = std::fs::File::create(&path).unwrap();
        writeln!(f, "#!/bin/sh\ncat > /dev/null\necho {answer}").unwrap();
        let mut perm = f.metadata().unwrap().permissions();
        perm.set_mode(0o755);
        std::fs::set_permissions(&path, perm).unwrap();
        path
    };
    // zero internal budget forces the escape hatch
    let goal = Atom::Le(SymExpr::Tid, c(7));
    let ctx = Pure(vec![Atom::Le(SymExpr::Tid, c(7))]);
    let mut with_unsat = p();
    with_unsat.max_steps = 0;
    with_unsat.solver = Some(write_fake("klrace_fake_unsat.sh", "unsat"));
    assert_eq!(prove_pure(&ctx, &goal, &with_unsat), ProofResult::Proven);
    let mut with_sat = p();
    with_sat.max_steps = 0;
    with_sat.solver = Some(write_fake("klrace_fake_sat.sh", "sat"));
    assert_eq!(prove_pure(&ctx, &goal, &with_sat), ProofResult::NotProven);
    // a missing executable degrades to not-proven
    let mut with_missing = p();
    with_missing.max_steps = 0;
    with_missing.solver = Some(dir.join("klrace_no_such_solver"));
    assert_eq!(prove_pure(&ctx, &goal, &with_missing), ProofResult::NotProven);
}

#[test]
fn budget_exhaustion_fails_toward_unknown() {
    let mut tight = p();
    tight.max_steps = 0;
    let ctx = Pure(vec![
        Atom::Eq(SymExpr::Tid, c(0)),
        Atom::Eq(SymExpr::Tid, c(1)),
    ]);
    assert_eq!(sat(&ctx, &tight), SatOutcome::Unknown);
    assert_eq!(
        prove_pure(&ctx, &Atom::Eq(c(0), c(1)), &tight),
        ProofResult::NotProven
    );
}
