//! Lowering from surface statements to the CFG command form.
//!
//! Two desugarings happen here:
//!
//! * array reads are hoisted out of expressions into fresh-temp `Load`
//!   commands (left to right, innermost first), since the core command set
//!   only reads arrays via `v := a[e]`;
//! * `if`/`while` become branch points whose two successors start with
//!   `assume(b)` and `assume(!b)`. A `while` back edge re-enters at the
//!   condition's first hoisted load so loop-carried reads are re-executed.

use super::ast::*;
use super::parser::Scope;

pub(super) fn lower_kernel(
    name: Ident,
    params: Vec<Param>,
    scope: &Scope,
    body: Vec<Stmt>,
) -> Kernel {
    let mut b = Builder {
        nodes: vec![Node::Start, Node::Exit],
        succs: vec![Vec::new(), Vec::new()],
        temps: Vec::new(),
        next_temp: 0,
    };
    let frontier = b.lower_stmts(&body, vec![START]);
    b.connect(&frontier, &[EXIT]);

    let mut locals = scope.locals();
    locals.extend(b.temps.iter().cloned());
    Kernel {
        name,
        params,
        locals,
        shared_scalars: scope.shared_scalars(),
        nodes: b.nodes,
        succs: b.succs,
        start: START,
        exit: EXIT,
        body,
    }
}

const START: NodeId = 0;
const EXIT: NodeId = 1;

struct Builder {
    nodes: Vec<Node>,
    succs: Vec<Vec<NodeId>>,
    temps: Vec<Ident>,
    next_temp: u32,
}

impl Builder {
    fn add(&mut self, cmd: Command) -> NodeId {
        self.nodes.push(Node::Command(cmd));
        self.succs.push(Vec::new());
        self.nodes.len() - 1
    }

    fn connect(&mut self, from: &[NodeId], to: &[NodeId]) {
        for &f in from {
            for &t in to {
                if !self.succs[f].contains(&t) {
                    self.succs[f].push(t);
                }
            }
        }
    }

    /// Append a command after every node of the frontier; the new node is
    /// the whole new frontier.
    fn emit(&mut self, cmd: Command, frontier: Vec<NodeId>) -> Vec<NodeId> {
        let id = self.add(cmd);
        self.connect(&frontier, &[id]);
        vec![id]
    }

    fn fresh_temp(&mut self) -> Ident {
        let name = format!("__t{}", self.next_temp);
        self.next_temp += 1;
        self.temps.push(name.clone());
        name
    }

    fn lower_stmts(&mut self, stmts: &[Stmt], mut frontier: Vec<NodeId>) -> Vec<NodeId> {
        for s in stmts {
            frontier = self.lower_stmt(s, frontier);
        }
        frontier
    }

    fn lower_stmt(&mut self, stmt: &Stmt, frontier: Vec<NodeId>) -> Vec<NodeId> {
        match stmt {
            Stmt::Decl { init: None, .. } => frontier,
            Stmt::Decl {
                name,
                init: Some(e),
                ..
            } => {
                let (value, frontier) = self.hoist(e, frontier);
                self.emit(
                    Command::Assign {
                        var: name.clone(),
                        value,
                    },
                    frontier,
                )
            }
            Stmt::AssignVar { name, value } => {
                let (value, frontier) = self.hoist(value, frontier);
                self.emit(
                    Command::Assign {
                        var: name.clone(),
                        value,
                    },
                    frontier,
                )
            }
            Stmt::AssignIndex {
                array,
                index,
                value,
            } => {
                let (index, frontier) = self.hoist(index, frontier);
                let (value, frontier) = self.hoist(value, frontier);
                self.emit(
                    Command::Store {
                        array: array.clone(),
                        index,
                        value,
                    },
                    frontier,
                )
            }
            Stmt::Barrier => self.emit(Command::Barrier, frontier),
            Stmt::Assume(b) => {
                let (b, frontier) = self.hoist_bool(b, frontier);
                self.emit(Command::Assume(b), frontier)
            }
            Stmt::Assert(b) => {
                let (b, frontier) = self.hoist_bool(b, frontier);
                self.emit(Command::Assert(b), frontier)
            }
            Stmt::If {
                cond,
                then_branch,
                else_branch,
            } => {
                let (cond, frontier) = self.hoist_bool(cond, frontier);
                let then_guard = self.add(Command::Assume(cond.clone()));
                let else_guard = self.add(Command::Assume(BoolExpr::not(cond)));
                self.connect(&frontier, &[then_guard, else_guard]);
                let mut then_tail = self.lower_stmts(then_branch, vec![then_guard]);
                let else_tail = self.lower_stmts(else_branch, vec![else_guard]);
                then_tail.extend(else_tail);
                then_tail
            }
            Stmt::While { cond, body } => {
                let first_new = self.nodes.len();
                let (cond, after_loads) = self.hoist_bool(cond, frontier);
                let enter_guard = self.add(Command::Assume(cond.clone()));
                let leave_guard = self.add(Command::Assume(BoolExpr::not(cond)));
                self.connect(&after_loads, &[enter_guard, leave_guard]);
                // the back edge re-enters at the first hoisted load, or at
                // the guard pair when the condition reads no arrays
                let loop_head = if first_new < enter_guard.min(leave_guard)
                    && matches!(self.nodes[first_new], Node::Command(Command::Load { .. }))
                {
                    vec![first_new]
                } else {
                    vec![enter_guard, leave_guard]
                };
                let body_tail = self.lower_stmts(body, vec![enter_guard]);
                self.connect(&body_tail, &loop_head);
                vec![leave_guard]
            }
        }
    }

    /// Replace array reads in `e` with fresh temps, emitting the loads onto
    /// the frontier. Returns the core expression and the new frontier.
    fn hoist(&mut self, e: &SurfaceExpr, frontier: Vec<NodeId>) -> (Expr, Vec<NodeId>) {
        match e {
            SurfaceExpr::Const(c) => (Expr::Const(*c), frontier),
            SurfaceExpr::Var(v) => (Expr::Var(v.clone()), frontier),
            SurfaceExpr::Tid => (Expr::Tid, frontier),
            SurfaceExpr::Size(a) => (Expr::Size(a.clone()), frontier),
            SurfaceExpr::Op(op, args) => {
                let mut lowered = Vec::with_capacity(args.len());
                let mut frontier = frontier;
                for a in args {
                    let (la, f) = self.hoist(a, frontier);
                    lowered.push(la);
                    frontier = f;
                }
                (Expr::Op(*op, lowered), frontier)
            }
            SurfaceExpr::Index(array, index) => {
                let (index, frontier) = self.hoist(index, frontier);
                let temp = self.fresh_temp();
                let frontier = self.emit(
                    Command::Load {
                        var: temp.clone(),
                        array: array.clone(),
                        index,
                    },
                    frontier,
                );
                (Expr::Var(temp), frontier)
            }
        }
    }

    fn hoist_bool(&mut self, b: &SurfaceBool, frontier: Vec<NodeId>) -> (BoolExpr, Vec<NodeId>) {
        match b {
            SurfaceBool::Lt(a, b) => {
                let (a, frontier) = self.hoist(a, frontier);
                let (b, frontier) = self.hoist(b, frontier);
                (BoolExpr::Lt(a, b), frontier)
            }
            SurfaceBool::Eq(a, b) => {
                let (a, frontier) = self.hoist(a, frontier);
                let (b, frontier) = self.hoist(b, frontier);
                (BoolExpr::Eq(a, b), frontier)
            }
            SurfaceBool::And(a, b) => {
                let (a, frontier) = self.hoist_bool(a, frontier);
                let (b, frontier) = self.hoist_bool(b, frontier);
                (BoolExpr::and(a, b), frontier)
            }
            SurfaceBool::Not(inner) => {
                let (inner, frontier) = self.hoist_bool(inner, frontier);
                (BoolExpr::not(inner), frontier)
            }
        }
    }
}
