//! CFG validation.

use super::ast::*;
use serde::{Deserialize, Serialize};

/// A structural problem found in a kernel's edge relation.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CfgIssue {
    pub error: bool,
    pub node: NodeId,
    pub message: String,
}

/// Validate the edge relation of a kernel.
///
/// Errors (the `Err` side): a non-exit node without successors, an exit
/// node with successors, a start node with predecessors, or a branch whose
/// two arms are not an `assume(b)` / `assume(!b)` pair. Unreachable nodes
/// are warnings and are returned alongside the validated kernel.
pub fn build_cfg(kernel: Kernel) -> Result<(Kernel, Vec<CfgIssue>), Vec<CfgIssue>> {
    let mut errors = Vec::new();
    let mut warnings = Vec::new();
    let n = kernel.nodes.len();

    let mut preds = vec![0usize; n];
    for (id, succs) in kernel.succs.iter().enumerate() {
        for &s in succs {
            preds[s] += 1;
        }
        match &kernel.nodes[id] {
            Node::Exit => {
                if !succs.is_empty() {
                    errors.push(CfgIssue {
                        error: true,
                        node: id,
                        message: "exit node has successors".into(),
                    });
                }
            }
            _ => {
                if succs.is_empty() {
                    errors.push(CfgIssue {
                        error: true,
                        node: id,
                        message: "missing successor".into(),
                    });
                }
            }
        }
        if succs.len() > 2 {
            errors.push(CfgIssue {
                error: true,
                node: id,
                message: format!("node has {} successors, at most 2 allowed", succs.len()),
            });
        }
        if succs.len() == 2 {
            let guard = |t: NodeId| match &kernel.nodes[t] {
                Node::Command(Command::Assume(b)) => Some(b.clone()),
                _ => None,
            };
            let ok = match (guard(succs[0]), guard(succs[1])) {
                (Some(a), Some(b)) => {
                    a == BoolExpr::not(b.clone()) || b == BoolExpr::not(a.clone())
                }
                _ => false,
            };
            if !ok {
                errors.push(CfgIssue {
                    error: true,
                    node: id,
                    message: "branch successors are not an assume(b)/assume(!b) pair".into(),
                });
            }
        }
    }
    if preds[kernel.start] != 0 {
        errors.push(CfgIssue {
            error: true,
            node: kernel.start,
            message: "start node has predecessors".into(),
        });
    }

    // reachability from start
    let mut seen = vec![false; n];
    let mut stack = vec![kernel.start];
    while let Some(id) = stack.pop() {
        if std::mem::replace(&mut seen[id], true) {
            continue;
        }
        for &s in &kernel.succs[id] {
            stack.push(s);
        }
    }
    for (id, seen) in seen.iter().enumerate() {
        if !seen {
            warnings.push(CfgIssue {
                error: false,
                node: id,
                message: "unreachable node".into(),
            });
        }
    }

    if errors.is_empty() {
        Ok((kernel, warnings))
    } else {
        Err(errors)
    }
}

#[cfg(test)]
mod tests {
    use super::super::parse_kernel;
    use super::*;

    #[test]
    fn straight_line_chain() {
        let k = parse_kernel("kernel(int A[]) { int x; x = 1; x = 2; x = 3; }").unwrap();
        let (k, warnings) = build_cfg(k).unwrap();
        assert!(warnings.is_empty());
        // start -> c1 -> c2 -> c3 -> exit
        assert_eq!(k.command_count(), 3);
        let mut at = k.start;
        for _ in 0..3 {
            assert_eq!(k.succs[at].len(), 1);
            at = k.succs[at][0];
            assert!(matches!(k.nodes[at], Node::Command(Command::Assign { .. })));
        }
        assert_eq!(k.succs[at], vec![k.exit]);
    }

    #[test]
    fn if_makes_a_guarded_diamond() {
        let k = parse_kernel(
            "kernel(int x) { int y; if (x < 1) { y = 1; } else { y = 2; } y = 3; }",
        )
        .unwrap();
        let (k, _) = build_cfg(k).unwrap();
        // the branch node is start itself here
        let branch = k.start;
        assert_eq!(k.succs[branch].len(), 2);
        let arms: Vec<_> = k.succs[branch]
            .iter()
            .map(|&s| k.command(s).unwrap().clone())
            .collect();
        assert!(matches!(arms[0], Command::Assume(_)));
        assert!(matches!(arms[1], Command::Assume(_)));
        // both arms reconverge on y = 3
        let tail_of = |mut at: NodeId| {
            while k.succs[at].len() == 1 {
                at = k.succs[at][0];
                if let Some(Command::Assign { value, .. }) = k.command(at) {
                    if *value == Expr::Const(3) {
                        return at;
                    }
                }
            }
            panic!("arm never reaches y = 3");
        };
        assert_eq!(tail_of(k.succs[branch][0]), tail_of(k.succs[branch][1]));
    }

    #[test]
    fn while_has_a_back_edge_to_the_guard_pair() {
        let k = parse_kernel("kernel(int n) { int i; i = 0; while (i < n) { i = i + 1; } }")
            .unwrap();
        let (k, _) = build_cfg(k).unwrap();
        // find the body assignment i = i + 1 and check its successors are the
        // two assume guards
        let body = k
            .nodes
            .iter()
            .position(|n| {
                matches!(n, Node::Command(Command::Assign { value, .. })
                    if matches!(value, Expr::Op(OpKind::Add, _)))
            })
            .unwrap();
        assert_eq!(k.succs[body].len(), 2);
        for &s in &k.succs[body] {
            assert!(matches!(k.command(s), Some(Command::Assume(_))));
        }
    }

    #[test]
    fn while_with_array_condition_reloads_each_iteration() {
        let k = parse_kernel("kernel(int A[]) { while (A[0] < 10) { A[0] = A[0] + 1; } }")
            .unwrap();
        let (k, _) = build_cfg(k).unwrap();
        // the store's successor must be the condition load, not the guards
        let store = k
            .nodes
            .iter()
            .position(|n| matches!(n, Node::Command(Command::Store { .. })))
            .unwrap();
        assert_eq!(k.succs[store].len(), 1);
        assert!(matches!(
            k.command(k.succs[store][0]),
            Some(Command::Load { .. })
        ));
    }

    #[test]
    fn missing_successor_is_an_error() {
        let k = parse_kernel("kernel(int x) { int y; y = 1; }").unwrap();
        let mut broken = k;
        // detach the command from exit
        let cmd = broken
            .nodes
            .iter()
            .position(|n| matches!(n, Node::Command(_)))
            .unwrap();
        broken.succs[cmd].clear();
        let errs = build_cfg(broken).unwrap_err();
        assert!(errs.iter().any(|e| e.message.contains("missing successor")));
    }

    #[test]
    fn unreachable_node_is_a_warning() {
        let k = parse_kernel("kernel(int x) { int y; y = 1; }").unwrap();
        let mut with_orphan = k;
        with_orphan.nodes.push(Node::Command(Command::Barrier));
        with_orphan.succs.push(vec![with_orphan.exit]);
        let (_, warnings) = build_cfg(with_orphan).unwrap();
        assert_eq!(warnings.len(), 1);
        assert!(!warnings[0].error);
        assert!(warnings[0].message.contains("unreachable"));
    }
}
