//! Recursive-descent parser for the kernel surface syntax.
//!
//! The grammar is permissive about statement separators (`;` is optional —
//! statements end greedily) and accepts both C-style `if (b) { ... }` and
//! `if b then s else s` forms, so kernels written in either style parse
//! unchanged. In boolean context a bare `=` is equality.

use super::ast::*;
use super::lexer::{Lexer, Token, TokenKind as T};
use super::lower::lower_kernel;
use super::{Diagnostic, Pos};

/// Parse kernel source text into CFG form.
///
/// Returns all diagnostics at once when the source is invalid: a syntax
/// error stops the parse, but name/arity validation keeps going to report
/// every offending use.
pub fn parse_kernel(text: &str) -> Result<Kernel, Vec<Diagnostic>> {
    let tokens = Lexer::new(text).tokenize().map_err(|d| vec![d])?;
    let mut p = Parser {
        tokens,
        at: 0,
        diags: Vec::new(),
        scope: Scope::default(),
    };
    match p.parse_file() {
        Ok((name, params, body)) => {
            if p.diags.is_empty() {
                Ok(lower_kernel(name, params, &p.scope, body))
            } else {
                Err(p.diags)
            }
        }
        Err(fatal) => {
            p.diags.push(fatal);
            Err(p.diags)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum DeclKind {
    ScalarParam(Space),
    ArrayParam(Space),
    Local,
    SharedScalar,
}

#[derive(Default)]
pub(super) struct Scope {
    names: Vec<(Ident, DeclKind)>,
}

impl Scope {
    fn lookup(&self, name: &str) -> Option<DeclKind> {
        self.names
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, k)| *k)
    }

    fn is_array(&self, name: &str) -> bool {
        matches!(self.lookup(name), Some(DeclKind::ArrayParam(_)))
    }

    pub(super) fn locals(&self) -> Vec<Ident> {
        self.names
            .iter()
            .filter(|(_, k)| *k == DeclKind::Local)
            .map(|(n, _)| n.clone())
            .collect()
    }

    pub(super) fn shared_scalars(&self) -> Vec<Ident> {
        self.names
            .iter()
            .filter(|(_, k)| *k == DeclKind::SharedScalar)
            .map(|(n, _)| n.clone())
            .collect()
    }
}

struct Parser {
    tokens: Vec<Token>,
    at: usize,
    diags: Vec<Diagnostic>,
    scope: Scope,
}

impl Parser {
    fn peek(&self) -> &Token {
        &self.tokens[self.at]
    }

    fn peek_kind(&self) -> T {
        self.tokens[self.at].kind
    }

    fn bump(&mut self) -> Token {
        let t = self.tokens[self.at].clone();
        if self.at + 1 < self.tokens.len() {
            self.at += 1;
        }
        t
    }

    fn eat(&mut self, kind: T) -> bool {
        if self.peek_kind() == kind {
            self.bump();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, kind: T, what: &str) -> Result<Token, Diagnostic> {
        if self.peek_kind() == kind {
            Ok(self.bump())
        } else {
            let t = self.peek();
            Err(Diagnostic::new(
                t.pos,
                format!("expected {what}, found `{}`", describe(t)),
            ))
        }
    }

    fn error(&self, pos: Pos, msg: impl Into<String>) -> Diagnostic {
        Diagnostic::new(pos, msg)
    }

    fn report(&mut self, pos: Pos, msg: impl Into<String>) {
        self.diags.push(Diagnostic::new(pos, msg));
    }

    fn parse_file(&mut self) -> Result<(Ident, Vec<Param>, Vec<Stmt>), Diagnostic> {
        self.expect(T::Kernel, "`kernel`")?;
        let name = if self.peek_kind() == T::Ident {
            self.bump().text
        } else {
            "kernel".to_string()
        };
        self.expect(T::LParen, "`(`")?;
        let params = self.parse_params()?;
        self.expect(T::RParen, "`)`")?;
        self.expect(T::LBrace, "`{`")?;
        let body = self.parse_stmts(T::RBrace)?;
        self.expect(T::RBrace, "`}`")?;
        self.expect(T::Eof, "end of input")?;
        Ok((name, params, body))
    }

    fn parse_params(&mut self) -> Result<Vec<Param>, Diagnostic> {
        let mut params = Vec::new();
        if self.peek_kind() == T::RParen {
            return Ok(params);
        }
        loop {
            let space = if self.eat(T::Shared) {
                Some(Space::Shared)
            } else if self.eat(T::Private) {
                Some(Space::Private)
            } else {
                None
            };
            self.expect(T::Int32, "`int`")?;
            let name_tok = self.expect(T::Ident, "parameter name")?;
            let is_array = if self.eat(T::LBracket) {
                self.expect(T::RBracket, "`]`")?;
                true
            } else {
                false
            };
            // arrays default to shared, scalars to private
            let space = space.unwrap_or(if is_array { Space::Shared } else { Space::Private });
            let kind = if is_array {
                ParamKind::Array
            } else {
                ParamKind::Scalar
            };
            if self.scope.lookup(&name_tok.text).is_some() {
                self.report(
                    name_tok.pos,
                    format!("duplicate parameter `{}`", name_tok.text),
                );
            }
            self.scope.names.push((
                name_tok.text.clone(),
                if is_array {
                    DeclKind::ArrayParam(space)
                } else {
                    DeclKind::ScalarParam(space)
                },
            ));
            params.push(Param {
                name: name_tok.text,
                kind,
                space,
            });
            if !self.eat(T::Comma) {
                return Ok(params);
            }
        }
    }

    fn parse_stmts(&mut self, end: T) -> Result<Vec<Stmt>, Diagnostic> {
        let mut stmts = Vec::new();
        loop {
            while self.eat(T::Semi) {}
            if self.peek_kind() == end || self.peek_kind() == T::Eof {
                return Ok(stmts);
            }
            stmts.push(self.parse_stmt()?);
        }
    }

    fn parse_block_or_stmt(&mut self) -> Result<Vec<Stmt>, Diagnostic> {
        if self.eat(T::LBrace) {
            let stmts = self.parse_stmts(T::RBrace)?;
            self.expect(T::RBrace, "`}`")?;
            Ok(stmts)
        } else {
            Ok(vec![self.parse_stmt()?])
        }
    }

    fn parse_stmt(&mut self) -> Result<Stmt, Diagnostic> {
        let tok = self.peek().clone();
        let stmt = match tok.kind {
            T::Barrier => {
                self.bump();
                Stmt::Barrier
            }
            T::Assume => {
                self.bump();
                self.expect(T::LParen, "`(`")?;
                let b = self.parse_bool()?;
                self.expect(T::RParen, "`)`")?;
                Stmt::Assume(b)
            }
            T::Assert => {
                self.bump();
                self.expect(T::LParen, "`(`")?;
                let b = self.parse_bool()?;
                self.expect(T::RParen, "`)`")?;
                Stmt::Assert(b)
            }
            T::If => {
                self.bump();
                let cond = self.parse_bool()?;
                self.eat(T::Then);
                let then_branch = self.parse_block_or_stmt()?;
                let else_branch = if self.eat(T::Else) {
                    self.parse_block_or_stmt()?
                } else {
                    Vec::new()
                };
                Stmt::If {
                    cond,
                    then_branch,
                    else_branch,
                }
            }
            T::While => {
                self.bump();
                let cond = self.parse_bool()?;
                self.eat(T::Do);
                let body = self.parse_block_or_stmt()?;
                Stmt::While { cond, body }
            }
            T::Shared | T::Private | T::Int32 => self.parse_decl()?,
            T::Ident => self.parse_assign()?,
            _ => {
                return Err(self.error(
                    tok.pos,
                    format!("expected a statement, found `{}`", describe(&tok)),
                ))
            }
        };
        while self.eat(T::Semi) {}
        Ok(stmt)
    }

    fn parse_decl(&mut self) -> Result<Stmt, Diagnostic> {
        let space = if self.eat(T::Shared) {
            Space::Shared
        } else {
            self.eat(T::Private);
            Space::Private
        };
        self.expect(T::Int32, "`int`")?;
        let name_tok = self.expect(T::Ident, "variable name")?;
        if self.scope.lookup(&name_tok.text).is_some() {
            self.report(
                name_tok.pos,
                format!("duplicate declaration of `{}`", name_tok.text),
            );
        }
        self.scope.names.push((
            name_tok.text.clone(),
            if space == Space::Shared {
                DeclKind::SharedScalar
            } else {
                DeclKind::Local
            },
        ));
        let init = if self.eat(T::Assign) {
            Some(self.parse_expr()?)
        } else {
            None
        };
        Ok(Stmt::Decl {
            space,
            name: name_tok.text,
            init,
        })
    }

    fn parse_assign(&mut self) -> Result<Stmt, Diagnostic> {
        let name_tok = self.expect(T::Ident, "variable name")?;
        if self.eat(T::LBracket) {
            if !self.scope.is_array(&name_tok.text) {
                self.report_not_array(&name_tok);
            }
            let index = self.parse_expr()?;
            self.expect(T::RBracket, "`]`")?;
            self.expect(T::Assign, "`=`")?;
            let value = self.parse_expr()?;
            Ok(Stmt::AssignIndex {
                array: name_tok.text,
                index,
                value,
            })
        } else {
            match self.scope.lookup(&name_tok.text) {
                None => self.report(
                    name_tok.pos,
                    format!("undeclared variable {}", name_tok.text),
                ),
                Some(DeclKind::ArrayParam(_)) => self.report(
                    name_tok.pos,
                    format!("array `{}` cannot be assigned as a scalar", name_tok.text),
                ),
                _ => {}
            }
            self.expect(T::Assign, "`=`")?;
            let value = self.parse_expr()?;
            Ok(Stmt::AssignVar {
                name: name_tok.text,
                value,
            })
        }
    }

    fn report_not_array(&mut self, tok: &Token) {
        match self.scope.lookup(&tok.text) {
            None => self.report(tok.pos, format!("undeclared array {}", tok.text)),
            Some(_) => self.report(tok.pos, format!("`{}` is not an array", tok.text)),
        }
    }

    // boolean expressions: `||` < `&&` < `!` < comparisons
    fn parse_bool(&mut self) -> Result<SurfaceBool, Diagnostic> {
        let mut lhs = self.parse_bool_and()?;
        while self.eat(T::OrOr) {
            let rhs = self.parse_bool_and()?;
            // a || b  ==  !(!a && !b)
            lhs = SurfaceBool::Not(Box::new(SurfaceBool::And(
                Box::new(SurfaceBool::Not(Box::new(lhs))),
                Box::new(SurfaceBool::Not(Box::new(rhs))),
            )));
        }
        Ok(lhs)
    }

    fn parse_bool_and(&mut self) -> Result<SurfaceBool, Diagnostic> {
        let mut lhs = self.parse_bool_not()?;
        while self.eat(T::AndAnd) {
            let rhs = self.parse_bool_not()?;
            lhs = SurfaceBool::And(Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn parse_bool_not(&mut self) -> Result<SurfaceBool, Diagnostic> {
        if self.eat(T::Bang) {
            Ok(SurfaceBool::Not(Box::new(self.parse_bool_not()?)))
        } else {
            self.parse_bool_atom()
        }
    }

    /// Either a comparison `e <op> e`, or a parenthesized boolean. Tried in
    /// that order with backtracking, so `(x) < y` and `(x < y) && b` both
    /// parse.
    fn parse_bool_atom(&mut self) -> Result<SurfaceBool, Diagnostic> {
        let save = (self.at, self.diags.len());
        match self.parse_comparison() {
            Ok(b) => Ok(b),
            Err(cmp_err) => {
                self.at = save.0;
                self.diags.truncate(save.1);
                if self.peek_kind() == T::LParen {
                    self.bump();
                    let b = self.parse_bool()?;
                    self.expect(T::RParen, "`)`")?;
                    Ok(b)
                } else {
                    Err(cmp_err)
                }
            }
        }
    }

    fn parse_comparison(&mut self) -> Result<SurfaceBool, Diagnostic> {
        let lhs = self.parse_expr()?;
        let op = self.peek().clone();
        let b = match op.kind {
            T::Lt => {
                self.bump();
                SurfaceBool::Lt(lhs, self.parse_expr()?)
            }
            T::Gt => {
                self.bump();
                let rhs = self.parse_expr()?;
                SurfaceBool::Lt(rhs, lhs)
            }
            T::Le => {
                self.bump();
                let rhs = self.parse_expr()?;
                // a <= b  ==  !(b < a)
                SurfaceBool::Not(Box::new(SurfaceBool::Lt(rhs, lhs)))
            }
            T::Ge => {
                self.bump();
                let rhs = self.parse_expr()?;
                SurfaceBool::Not(Box::new(SurfaceBool::Lt(lhs, rhs)))
            }
            T::EqEq | T::Assign => {
                self.bump();
                SurfaceBool::Eq(lhs, self.parse_expr()?)
            }
            T::NotEq => {
                self.bump();
                SurfaceBool::Not(Box::new(SurfaceBool::Eq(lhs, self.parse_expr()?)))
            }
            _ => {
                return Err(self.error(
                    op.pos,
                    format!("expected a comparison operator, found `{}`", describe(&op)),
                ))
            }
        };
        Ok(b)
    }

    // arithmetic expressions, precedence-climbing
    fn parse_expr(&mut self) -> Result<SurfaceExpr, Diagnostic> {
        self.parse_additive()
    }

    fn parse_additive(&mut self) -> Result<SurfaceExpr, Diagnostic> {
        let mut lhs = self.parse_multiplicative()?;
        loop {
            let op = match self.peek_kind() {
                T::Plus => OpKind::Add,
                T::Minus => OpKind::Sub,
                _ => return Ok(lhs),
            };
            self.bump();
            let rhs = self.parse_multiplicative()?;
            lhs = SurfaceExpr::Op(op, vec![lhs, rhs]);
        }
    }

    fn parse_multiplicative(&mut self) -> Result<SurfaceExpr, Diagnostic> {
        let mut lhs = self.parse_unary()?;
        loop {
            let op = match self.peek_kind() {
                T::Star => OpKind::Mul,
                T::Slash => OpKind::Div,
                T::Percent => OpKind::Mod,
                _ => return Ok(lhs),
            };
            self.bump();
            let rhs = self.parse_unary()?;
            lhs = SurfaceExpr::Op(op, vec![lhs, rhs]);
        }
    }

    fn parse_unary(&mut self) -> Result<SurfaceExpr, Diagnostic> {
        if self.eat(T::Minus) {
            let e = self.parse_unary()?;
            // constant-fold the common `-c` literal case
            if let SurfaceExpr::Const(c) = e {
                return Ok(SurfaceExpr::Const(c.wrapping_neg()));
            }
            return Ok(SurfaceExpr::Op(OpKind::Neg, vec![e]));
        }
        self.parse_primary()
    }

    fn parse_primary(&mut self) -> Result<SurfaceExpr, Diagnostic> {
        let tok = self.peek().clone();
        match tok.kind {
            T::Int => {
                self.bump();
                Ok(SurfaceExpr::Const(tok.text.parse().unwrap()))
            }
            T::Tid => {
                self.bump();
                Ok(SurfaceExpr::Tid)
            }
            T::Size => {
                self.bump();
                self.expect(T::LParen, "`(`")?;
                let arg = self.expect(T::Ident, "array name")?;
                self.expect(T::RParen, "`)`")?;
                match self.scope.lookup(&arg.text) {
                    Some(DeclKind::ArrayParam(_)) => {}
                    Some(_) => self.report(
                        arg.pos,
                        format!("size() applied to a scalar: {}", arg.text),
                    ),
                    None => self.report(arg.pos, format!("undeclared array {}", arg.text)),
                }
                Ok(SurfaceExpr::Size(arg.text))
            }
            T::LParen => {
                self.bump();
                let e = self.parse_expr()?;
                self.expect(T::RParen, "`)`")?;
                Ok(e)
            }
            T::Ident => {
                self.bump();
                // function-style operators
                if (tok.text == "cos" || tok.text == "sqrt") && self.peek_kind() == T::LParen {
                    self.bump();
                    let arg = self.parse_expr()?;
                    self.expect(T::RParen, "`)`")?;
                    let op = if tok.text == "cos" {
                        OpKind::Cos
                    } else {
                        OpKind::Sqrt
                    };
                    return Ok(SurfaceExpr::Op(op, vec![arg]));
                }
                if self.eat(T::LBracket) {
                    if !self.scope.is_array(&tok.text) {
                        self.report_not_array(&tok);
                    }
                    let index = self.parse_expr()?;
                    self.expect(T::RBracket, "`]`")?;
                    return Ok(SurfaceExpr::Index(tok.text, Box::new(index)));
                }
                match self.scope.lookup(&tok.text) {
                    None => self.report(tok.pos, format!("undeclared variable {}", tok.text)),
                    Some(DeclKind::ArrayParam(_)) => self.report(
                        tok.pos,
                        format!("array `{}` used as a scalar value", tok.text),
                    ),
                    _ => {}
                }
                Ok(SurfaceExpr::Var(tok.text))
            }
            _ => Err(self.error(
                tok.pos,
                format!("expected an expression, found `{}`", describe(&tok)),
            )),
        }
    }
}

fn describe(t: &Token) -> String {
    if t.kind == T::Eof {
        "end of input".to_string()
    } else {
        t.text.clone()
    }
}

#[cfg(test)]
mod tests {
    use super::super::pretty::print_kernel;
    use super::*;

    const FIG1: &str = "kernel( int A[], int B[], int R[]) {
   
      R[tid] = A[tid-1] + B[tid+1];
      barrier;
      R[tid] = 2 * R[tid + 1];
  }";

    // Body as printed in the source figure (no semicolons, `if ... then`,
    // `=` as comparison), plus the declaration of the shared scalar g.
    const FIG2: &str = "kernel( int A[]) {
    shared int g
    g = 0
    A[tid] = 0
    barrier
    A[tid] = 1
    if A[tid + 1] = 0 then g = 1
    barrier
  }";

    #[test]
    fn fig1_parses_to_loads_stores_barrier() {
        let k = parse_kernel(FIG1).unwrap();
        assert_eq!(k.name, "kernel");
        assert_eq!(k.params.len(), 3);
        assert!(k.params.iter().all(|p| p.kind == ParamKind::Array));
        assert!(k.params.iter().all(|p| p.space == Space::Shared));
        let cmds: Vec<_> = k
            .nodes
            .iter()
            .filter_map(|n| match n {
                Node::Command(c) => Some(c.clone()),
                _ => None,
            })
            .collect();
        // each array-store statement desugars to loads followed by a store
        let loads = cmds.iter().filter(|c| matches!(c, Command::Load { .. })).count();
        let stores = cmds.iter().filter(|c| matches!(c, Command::Store { .. })).count();
        let barriers = cmds.iter().filter(|c| c.is_barrier()).count();
        assert_eq!((loads, stores, barriers), (3, 2, 1));
        assert_eq!(k.command_count(), 6);
        // temps were added to locals
        assert_eq!(k.locals, vec!["__t0", "__t1", "__t2"]);
    }

    #[test]
    fn fig2_parses_with_shared_scalar() {
        let k = parse_kernel(FIG2).unwrap();
        assert_eq!(k.shared_scalars, vec!["g"]);
        assert_eq!(k.scalar_space("g"), Some(Space::Shared));
        // one branch: two assume-guarded successors somewhere in the graph
        let branch = k
            .succs
            .iter()
            .position(|s| s.len() == 2)
            .expect("if produced a branch");
        for &arm in &k.succs[branch] {
            assert!(matches!(k.command(arm), Some(Command::Assume(_))));
        }
    }

    #[test]
    fn empty_body_is_start_to_exit() {
        let k = parse_kernel("kernel() {}").unwrap();
        assert_eq!(k.command_count(), 0);
        assert_eq!(k.succs[k.start], vec![k.exit]);
        assert!(k.succs[k.exit].is_empty());
    }

    #[test]
    fn undeclared_variable_is_reported() {
        let errs = parse_kernel("kernel(int A[]) { int v; v = w; }").unwrap_err();
        assert!(errs
            .iter()
            .any(|d| d.message.contains("undeclared variable w")));
        // location is 1-based line:col of the use
        assert_eq!(errs[0].pos.line, 1);
    }

    #[test]
    fn size_of_scalar_is_reported() {
        let errs = parse_kernel("kernel(int x) { int v; v = size(x); }").unwrap_err();
        assert!(errs
            .iter()
            .any(|d| d.message.contains("size() applied to a scalar")));
    }

    #[test]
    fn scalar_indexed_as_array_is_reported() {
        let errs = parse_kernel("kernel(int x) { x[0] = 1; }").unwrap_err();
        assert!(errs.iter().any(|d| d.message.contains("not an array")));
    }

    #[test]
    fn multiple_validation_errors_are_all_reported() {
        let errs = parse_kernel("kernel() { int v; v = a; v = b; }").unwrap_err();
        assert_eq!(errs.len(), 2);
    }

    #[test]
    fn qualifiers_override_defaults() {
        let k = parse_kernel("kernel(private int P[], shared int s, int n) {}").unwrap();
        assert_eq!(k.params[0].space, Space::Private);
        assert_eq!(k.params[1].space, Space::Shared);
        assert_eq!(k.params[2].space, Space::Private);
    }

    #[test]
    fn roundtrip_is_structurally_identical() {
        for src in [
            FIG1,
            FIG2,
            "kernel() {}",
            "kernel(int A[], int n) { int i; i = 0; while (i < n) { A[i] = cos(i) + A[i+1] / 2; i = i + 1; } barrier; assert(A[0] >= 0 || n == 0); }",
        ] {
            let k1 = parse_kernel(src).unwrap();
            let printed = print_kernel(&k1);
            let k2 = parse_kernel(&printed).unwrap_or_else(|e| {
                panic!("reparse failed for:\n{printed}\n{e:?}");
            });
            assert_eq!(k1, k2, "round-trip changed the kernel for:\n{printed}");
        }
    }
}
