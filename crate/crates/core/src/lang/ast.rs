//! AST and CFG types for the kernel language.

use serde::{Deserialize, Serialize};
use std::fmt;

/// Variable and array names.
pub type Ident = String;

/// n-ary operator tags. `Cos` and `Sqrt` are kept as opaque operations and
/// treated as uninterpreted symbols by the symbolic side.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum OpKind {
    Add,
    Sub,
    Mul,
    Div,
    Mod,
    Neg,
    Cos,
    Sqrt,
}

impl OpKind {
    pub fn arity(self) -> usize {
        match self {
            OpKind::Neg | OpKind::Cos | OpKind::Sqrt => 1,
            _ => 2,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            OpKind::Add => "+",
            OpKind::Sub => "-",
            OpKind::Mul => "*",
            OpKind::Div => "/",
            OpKind::Mod => "%",
            OpKind::Neg => "neg",
            OpKind::Cos => "cos",
            OpKind::Sqrt => "sqrt",
        }
    }
}

/// Core (desugared) integer expressions. No array reads here: loads are
/// explicit commands by the time a `Kernel` is built.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Expr {
    Const(i64),
    Var(Ident),
    Tid,
    /// Declared element count of an array parameter.
    Size(Ident),
    Op(OpKind, Vec<Expr>),
}

impl Expr {
    pub fn bin(op: OpKind, a: Expr, b: Expr) -> Expr {
        Expr::Op(op, vec![a, b])
    }
}

/// Boolean guards.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum BoolExpr {
    Lt(Expr, Expr),
    Eq(Expr, Expr),
    And(Box<BoolExpr>, Box<BoolExpr>),
    Not(Box<BoolExpr>),
}

impl BoolExpr {
    pub fn not(b: BoolExpr) -> BoolExpr {
        BoolExpr::Not(Box::new(b))
    }

    pub fn and(a: BoolExpr, b: BoolExpr) -> BoolExpr {
        BoolExpr::And(Box::new(a), Box::new(b))
    }
}

/// The desugared command set.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Command {
    /// `v := e`
    Assign { var: Ident, value: Expr },
    /// `a[index] := value`
    Store {
        array: Ident,
        index: Expr,
        value: Expr,
    },
    /// `v := a[index]`
    Load {
        var: Ident,
        array: Ident,
        index: Expr,
    },
    Barrier,
    Assume(BoolExpr),
    Assert(BoolExpr),
}

impl Command {
    pub fn is_barrier(&self) -> bool {
        matches!(self, Command::Barrier)
    }
}

/// Whether a name lives in the shared state or in per-thread private state.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Space {
    Shared,
    Private,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ParamKind {
    Scalar,
    Array,
}

/// A kernel parameter. Arrays default to shared, scalars to private; an
/// explicit `shared` / `private` qualifier overrides the default.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Param {
    pub name: Ident,
    pub kind: ParamKind,
    pub space: Space,
}

/// CFG node payload.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum Node {
    Start,
    Exit,
    Command(Command),
}

pub type NodeId = usize;

/// Surface statements, retained for pretty-printing. The CFG is the
/// authoritative program; `body` exists so a parsed kernel can be printed
/// back to source and re-parsed to a structurally identical kernel.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum Stmt {
    /// `int x;` / `shared int g;` with optional initializer.
    Decl {
        space: Space,
        name: Ident,
        init: Option<SurfaceExpr>,
    },
    AssignVar {
        name: Ident,
        value: SurfaceExpr,
    },
    AssignIndex {
        array: Ident,
        index: SurfaceExpr,
        value: SurfaceExpr,
    },
    If {
        cond: SurfaceBool,
        then_branch: Vec<Stmt>,
        else_branch: Vec<Stmt>,
    },
    While {
        cond: SurfaceBool,
        body: Vec<Stmt>,
    },
    Barrier,
    Assume(SurfaceBool),
    Assert(SurfaceBool),
}

/// Surface expressions may read arrays anywhere; lowering hoists each read
/// into a fresh-temp load command.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum SurfaceExpr {
    Const(i64),
    Var(Ident),
    Tid,
    Size(Ident),
    Index(Ident, Box<SurfaceExpr>),
    Op(OpKind, Vec<SurfaceExpr>),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum SurfaceBool {
    Lt(SurfaceExpr, SurfaceExpr),
    Eq(SurfaceExpr, SurfaceExpr),
    And(Box<SurfaceBool>, Box<SurfaceBool>),
    Not(Box<SurfaceBool>),
}

/// A parsed kernel in CFG form.
///
/// Invariants (checked by [`build_cfg`]): exactly one start and one exit
/// node, start has no predecessors, exit has no successors, every node is
/// reachable from start, and every non-exit node has at least one successor.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Kernel {
    pub name: Ident,
    pub params: Vec<Param>,
    /// Private scalars: declared locals plus lowering temporaries.
    pub locals: Vec<Ident>,
    /// Shared scalars declared in the body (`shared int g;`).
    pub shared_scalars: Vec<Ident>,
    pub nodes: Vec<Node>,
    pub succs: Vec<Vec<NodeId>>,
    pub start: NodeId,
    pub exit: NodeId,
    /// Surface statements, for printing only.
    pub body: Vec<Stmt>,
}

impl Kernel {
    pub fn command(&self, id: NodeId) -> Option<&Command> {
        match &self.nodes[id] {
            Node::Command(c) => Some(c),
            _ => None,
        }
    }

    /// Names of array parameters, in declaration order.
    pub fn arrays(&self) -> impl Iterator<Item = &Param> {
        self.params.iter().filter(|p| p.kind == ParamKind::Array)
    }

    /// Names of scalar parameters, in declaration order.
    pub fn scalar_params(&self) -> impl Iterator<Item = &Param> {
        self.params.iter().filter(|p| p.kind == ParamKind::Scalar)
    }

    /// Is `name` an array parameter?
    pub fn array_param(&self, name: &str) -> Option<&Param> {
        self.params
            .iter()
            .find(|p| p.kind == ParamKind::Array && p.name == name)
    }

    /// The space a scalar variable lives in. Arrays are looked up via
    /// [`Kernel::array_param`].
    pub fn scalar_space(&self, name: &str) -> Option<Space> {
        if self.locals.iter().any(|l| l == name) {
            return Some(Space::Private);
        }
        if self.shared_scalars.iter().any(|s| s == name) {
            return Some(Space::Shared);
        }
        self.params
            .iter()
            .find(|p| p.kind == ParamKind::Scalar && p.name == name)
            .map(|p| p.space)
    }

    /// All shared names (scalars and arrays).
    pub fn shared_names(&self) -> Vec<Ident> {
        let mut out: Vec<Ident> = self
            .params
            .iter()
            .filter(|p| p.space == Space::Shared)
            .map(|p| p.name.clone())
            .collect();
        out.extend(self.shared_scalars.iter().cloned());
        out
    }

    /// Number of command nodes (excludes start and exit).
    pub fn command_count(&self) -> usize {
        self.nodes
            .iter()
            .filter(|n| matches!(n, Node::Command(_)))
            .count()
    }
}

// Command display is what witnesses and reports show; keep it close to the
// surface syntax.
impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Command::Assign { var, value } => write!(f, "{} = {}", var, DisplayExpr(value)),
            Command::Store {
                array,
                index,
                value,
            } => write!(
                f,
                "{}[{}] = {}",
                array,
                DisplayExpr(index),
                DisplayExpr(value)
            ),
            Command::Load { var, array, index } => {
                write!(f, "{} = {}[{}]", var, array, DisplayExpr(index))
            }
            Command::Barrier => write!(f, "barrier"),
            Command::Assume(b) => write!(f, "assume({})", DisplayBool(b)),
            Command::Assert(b) => write!(f, "assert({})", DisplayBool(b)),
        }
    }
}

/// Precedence-aware expression printer.
pub struct DisplayExpr<'a>(pub &'a Expr);

impl fmt::Display for DisplayExpr<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_expr(f, self.0, 0)
    }
}

fn prec(op: OpKind) -> u8 {
    match op {
        OpKind::Add | OpKind::Sub => 1,
        OpKind::Mul | OpKind::Div | OpKind::Mod => 2,
        OpKind::Neg | OpKind::Cos | OpKind::Sqrt => 3,
    }
}

fn write_expr(f: &mut fmt::Formatter<'_>, e: &Expr, min: u8) -> fmt::Result {
    match e {
        Expr::Const(c) => write!(f, "{c}"),
        Expr::Var(v) => write!(f, "{v}"),
        Expr::Tid => write!(f, "tid"),
        Expr::Size(a) => write!(f, "size({a})"),
        Expr::Op(op, args) => match op {
            OpKind::Cos | OpKind::Sqrt => {
                write!(f, "{}(", op.name())?;
                write_expr(f, &args[0], 0)?;
                write!(f, ")")
            }
            OpKind::Neg => {
                write!(f, "-")?;
                write_expr(f, &args[0], 3)
            }
            _ => {
                let p = prec(*op);
                if p < min {
                    write!(f, "(")?;
                }
                write_expr(f, &args[0], p)?;
                write!(f, " {} ", op.name())?;
                // right operand needs one more level to keep `a - b - c`
                // printing left-associated
                write_expr(f, &args[1], p + 1)?;
                if p < min {
                    write!(f, ")")?;
                }
                Ok(())
            }
        },
    }
}

pub struct DisplayBool<'a>(pub &'a BoolExpr);

impl fmt::Display for DisplayBool<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.0 {
            BoolExpr::Lt(a, b) => write!(f, "{} < {}", DisplayExpr(a), DisplayExpr(b)),
            BoolExpr::Eq(a, b) => write!(f, "{} == {}", DisplayExpr(a), DisplayExpr(b)),
            BoolExpr::And(a, b) => {
                write_bool_atom(f, a)?;
                write!(f, " && ")?;
                write_bool_atom(f, b)
            }
            BoolExpr::Not(b) => {
                write!(f, "!")?;
                write_bool_atom(f, b)
            }
        }
    }
}

fn write_bool_atom(f: &mut fmt::Formatter<'_>, b: &BoolExpr) -> fmt::Result {
    match b {
        BoolExpr::And(..) | BoolExpr::Lt(..) | BoolExpr::Eq(..) => {
            write!(f, "({})", DisplayBool(b))
        }
        BoolExpr::Not(_) => write!(f, "{}", DisplayBool(b)),
    }
}
