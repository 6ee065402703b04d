//! Parser for the printed formula syntax, used by test fixtures.

use super::syntax::{Atom, FunctionExpr, Pure, Spatial, SymExpr, SymbolicHeap};
use crate::lang::OpKind;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("formula parse error at {at}: {message}")]
pub struct FormulaError {
    pub at: usize,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Primed(String, u64),
    Int(i64),
    MapsTo, // |->
    Bar,    // |
    Star,
    Amp,
    Eq,
    Ne,
    Le,
    LParen,
    RParen,
    LBracket,
    RBracket,
    Comma,
    Semi,
    Dot,
    Plus,
    Minus,
    Slash,
    Percent,
    Eof,
}

fn lex(s: &str) -> Result<Vec<(Tok, usize)>, FormulaError> {
    let b = s.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < b.len() {
        let c = b[i];
        let at = i;
        if c.is_ascii_whitespace() {
            i += 1;
            continue;
        }
        if c.is_ascii_digit() {
            let start = i;
            while i < b.len() && b[i].is_ascii_digit() {
                i += 1;
            }
            let n: i64 = s[start..i].parse().map_err(|_| FormulaError {
                at,
                message: "integer literal out of range".into(),
            })?;
            out.push((Tok::Int(n), at));
            continue;
        }
        if c.is_ascii_alphabetic() || c == b'_' {
            let start = i;
            while i < b.len() && (b[i].is_ascii_alphanumeric() || matches!(b[i], b'_' | b'@' | b'$')) {
                i += 1;
            }
            let name = s[start..i].to_string();
            // primed variable: name'digits
            if i < b.len() && b[i] == b'\'' {
                let pstart = i + 1;
                let mut j = pstart;
                while j < b.len() && b[j].is_ascii_digit() {
                    j += 1;
                }
                if j > pstart {
                    let id: u64 = s[pstart..j].parse().map_err(|_| FormulaError {
                        at,
                        message: "primed id out of range".into(),
                    })?;
                    i = j;
                    out.push((Tok::Primed(name, id), at));
                    continue;
                }
            }
            out.push((Tok::Ident(name), at));
            continue;
        }
        let (tok, len) = match (c, b.get(i + 1), b.get(i + 2)) {
            (b'|', Some(b'-'), Some(b'>')) => (Tok::MapsTo, 3),
            (b'|', _, _) => (Tok::Bar, 1),
            (b'!', Some(b'='), _) => (Tok::Ne, 2),
            (b'<', Some(b'='), _) => (Tok::Le, 2),
            (b'=', _, _) => (Tok::Eq, 1),
            (b'*', _, _) => (Tok::Star, 1),
            (b'&', _, _) => (Tok::Amp, 1),
            (b'(', _, _) => (Tok::LParen, 1),
            (b')', _, _) => (Tok::RParen, 1),
            (b'[', _, _) => (Tok::LBracket, 1),
            (b']', _, _) => (Tok::RBracket, 1),
            (b',', _, _) => (Tok::Comma, 1),
            (b';', _, _) => (Tok::Semi, 1),
            (b'.', _, _) => (Tok::Dot, 1),
            (b'+', _, _) => (Tok::Plus, 1),
            (b'-', _, _) => (Tok::Minus, 1),
            (b'/', _, _) => (Tok::Slash, 1),
            (b'%', _, _) => (Tok::Percent, 1),
            _ => {
                return Err(FormulaError {
                    at,
                    message: format!("unexpected character `{}`", c as char),
                })
            }
        };
        out.push((tok, at));
        i += len;
    }
    out.push((Tok::Eof, s.len()));
    Ok(out)
}

struct P {
    toks: Vec<(Tok, usize)>,
    at: usize,
}

impl P {
    fn peek(&self) -> &Tok {
        &self.toks[self.at].0
    }

    fn pos(&self) -> usize {
        self.toks[self.at].1
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.at].0.clone();
        if self.at + 1 < self.toks.len() {
            self.at += 1;
        }
        t
    }

    fn eat(&mut self, t: &Tok) -> bool {
        if self.peek() == t {
            self.bump();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, t: Tok, what: &str) -> Result<(), FormulaError> {
        if self.eat(&t) {
            Ok(())
        } else {
            Err(self.err(format!("expected {what}")))
        }
    }

    fn err(&self, message: String) -> FormulaError {
        FormulaError {
            at: self.pos(),
            message,
        }
    }

    fn ident(&mut self, what: &str) -> Result<String, FormulaError> {
        match self.bump() {
            Tok::Ident(s) => Ok(s),
            _ => Err(self.err(format!("expected {what}"))),
        }
    }

    // pure := "true" | atom (& atom)*
    fn pure(&mut self) -> Result<Pure, FormulaError> {
        if matches!(self.peek(), Tok::Ident(s) if s == "true") {
            self.bump();
            return Ok(Pure::truth());
        }
        let mut atoms = vec![self.atom()?];
        while self.eat(&Tok::Amp) {
            atoms.push(self.atom()?);
        }
        Ok(Pure(atoms))
    }

    fn atom(&mut self) -> Result<Atom, FormulaError> {
        // FnEq: name = eta(...) / name = lam i. ...
        if let Tok::Ident(name) = self.peek().clone() {
            if !is_keyword(&name)
                && self.toks.get(self.at + 1).map(|t| &t.0) == Some(&Tok::Eq)
                && matches!(self.toks.get(self.at + 2).map(|t| &t.0),
                    Some(Tok::Ident(k)) if k == "eta" || k == "lam")
            {
                self.bump();
                self.bump();
                let fe = self.fexpr()?;
                return Ok(Atom::FnEq(name, fe));
            }
        }
        let lhs = self.expr(true)?;
        match self.bump() {
            Tok::Eq => Ok(Atom::Eq(lhs, self.expr(true)?)),
            Tok::Ne => Ok(Atom::Ne(lhs, self.expr(true)?)),
            Tok::Le => Ok(Atom::Le(lhs, self.expr(true)?)),
            _ => Err(self.err("expected `=`, `!=` or `<=`".into())),
        }
    }

    // spatial := "emp" | spat (* spat)*
    fn spatial(&mut self) -> Result<Vec<Spatial>, FormulaError> {
        if matches!(self.peek(), Tok::Ident(s) if s == "emp") {
            self.bump();
            return Ok(Vec::new());
        }
        let mut out = vec![self.spat()?];
        while self.eat(&Tok::Star) {
            out.push(self.spat()?);
        }
        Ok(out)
    }

    fn spat(&mut self) -> Result<Spatial, FormulaError> {
        let addr = self.expr(false)?;
        self.expect(Tok::MapsTo, "`|->`")?;
        // segment: literal `A[` follows
        if matches!(self.peek(), Tok::Ident(s) if s == "A")
            && self.toks.get(self.at + 1).map(|t| &t.0) == Some(&Tok::LBracket)
        {
            self.bump();
            self.bump();
            let lo = self.expr(true)?;
            self.expect(Tok::Comma, "`,`")?;
            let hi = self.expr(true)?;
            self.expect(Tok::Bar, "`|`")?;
            let contents = self.fexpr()?;
            self.expect(Tok::RBracket, "`]`")?;
            return Ok(Spatial::ArraySeg {
                base: addr,
                lo,
                hi,
                contents,
            });
        }
        let val = self.expr(false)?;
        Ok(Spatial::PointsTo(addr, val))
    }

    fn fexpr(&mut self) -> Result<FunctionExpr, FormulaError> {
        match self.peek().clone() {
            Tok::Ident(s) if s == "lam" => {
                self.bump();
                let v = self.ident("index variable")?;
                if v != "i" {
                    return Err(self.err("the bound index variable is spelled `i`".into()));
                }
                self.expect(Tok::Dot, "`.`")?;
                Ok(FunctionExpr::lambda(self.expr(true)?))
            }
            Tok::Ident(s) if s == "eta" => {
                self.bump();
                self.expect(Tok::LParen, "`(`")?;
                let cond = self.pure()?;
                self.expect(Tok::Semi, "`;`")?;
                let then = self.fexpr()?;
                self.expect(Tok::Semi, "`;`")?;
                let els = self.fexpr()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(FunctionExpr::eta(cond, then, els))
            }
            Tok::Ident(s) if !is_keyword(&s) => {
                self.bump();
                Ok(FunctionExpr::Symbol(s))
            }
            _ => Err(self.err("expected a function expression".into())),
        }
    }

    /// `allow_mul` is false in spatial positions, where a top-level `*`
    /// separates conjuncts instead.
    fn expr(&mut self, allow_mul: bool) -> Result<SymExpr, FormulaError> {
        let mut lhs = if allow_mul {
            self.mul()?
        } else {
            self.unary()?
        };
        loop {
            let op = match self.peek() {
                Tok::Plus => OpKind::Add,
                Tok::Minus => OpKind::Sub,
                _ => return Ok(lhs),
            };
            self.bump();
            let rhs = if allow_mul { self.mul()? } else { self.unary()? };
            lhs = SymExpr::bin(op, lhs, rhs);
        }
    }

    fn mul(&mut self) -> Result<SymExpr, FormulaError> {
        let mut lhs = self.unary()?;
        loop {
            let op = match self.peek() {
                Tok::Star => OpKind::Mul,
                Tok::Slash => OpKind::Div,
                Tok::Percent => OpKind::Mod,
                _ => return Ok(lhs),
            };
            self.bump();
            lhs = SymExpr::bin(op, lhs, self.unary()?);
        }
    }

    fn unary(&mut self) -> Result<SymExpr, FormulaError> {
        if self.eat(&Tok::Minus) {
            let e = self.unary()?;
            if let SymExpr::Const(c) = e {
                return Ok(SymExpr::Const(c.wrapping_neg()));
            }
            return Ok(SymExpr::Op(OpKind::Neg, vec![e]));
        }
        self.primary()
    }

    fn primary(&mut self) -> Result<SymExpr, FormulaError> {
        match self.bump() {
            Tok::Int(n) => Ok(SymExpr::Const(n)),
            Tok::Primed(h, id) => Ok(SymExpr::Primed(h, id)),
            Tok::LParen => {
                // either a parenthesized expression or an applied function
                // expression `(lam i. ...)(e)` / `(eta(...))(e)`
                if matches!(self.peek(), Tok::Ident(s) if s == "lam" || s == "eta") {
                    let fe = self.fexpr()?;
                    self.expect(Tok::RParen, "`)`")?;
                    self.expect(Tok::LParen, "`(` (application argument)")?;
                    let arg = self.expr(true)?;
                    self.expect(Tok::RParen, "`)`")?;
                    return Ok(SymExpr::app(fe, arg));
                }
                let e = self.expr(true)?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(e)
            }
            Tok::Ident(name) => match name.as_str() {
                "tid" => Ok(SymExpr::Tid),
                "N" => Ok(SymExpr::NThreads),
                "i" => Ok(SymExpr::Idx),
                "size" => {
                    self.expect(Tok::LParen, "`(`")?;
                    let a = self.ident("array name")?;
                    self.expect(Tok::RParen, "`)`")?;
                    Ok(SymExpr::Size(a))
                }
                "cos" | "sqrt" if self.peek() == &Tok::LParen => {
                    self.bump();
                    let arg = self.expr(true)?;
                    self.expect(Tok::RParen, "`)`")?;
                    let op = if name == "cos" { OpKind::Cos } else { OpKind::Sqrt };
                    Ok(SymExpr::Op(op, vec![arg]))
                }
                _ if self.peek() == &Tok::LParen => {
                    self.bump();
                    let arg = self.expr(true)?;
                    self.expect(Tok::RParen, "`)`")?;
                    Ok(SymExpr::app(FunctionExpr::Symbol(name), arg))
                }
                _ => Ok(SymExpr::Var(name)),
            },
            _ => Err(self.err("expected an expression".into())),
        }
    }
}

fn is_keyword(s: &str) -> bool {
    matches!(
        s,
        "true" | "emp" | "tid" | "N" | "i" | "size" | "lam" | "eta" | "cos" | "sqrt" | "A"
    )
}

/// Parse a printed heap: `<pure> | <spatial>`.
pub fn parse_heap(text: &str) -> Result<SymbolicHeap, FormulaError> {
    let toks = lex(text)?;
    let mut p = P { toks, at: 0 };
    let pure = p.pure()?;
    p.expect(Tok::Bar, "`|` between pure and spatial parts")?;
    let spatial = p.spatial()?;
    if p.peek() != &Tok::Eof {
        return Err(p.err("trailing input after heap".into()));
    }
    Ok(SymbolicHeap { pure, spatial })
}

#[cfg(test)]
mod tests {
    use super::super::print::heap_to_string;
    use super::*;

    #[test]
    fn roundtrips_representative_heaps() {
        let samples = [
            "true | emp",
            "x = 3 | emp",
            "0 <= tid & tid <= N - 1 | A |-> A[0, size(A) - 1 | f_A]",
            "v'3 != tid & A$0 = eta(i = tid & 0 <= tid; lam i. tid * 2; f_A) | A |-> A[0, 7 | A$0] * p |-> (x * y)",
            "g = 0 & x = f_A(tid + 1) | q |-> 7",
            "true | x + 1 |-> (lam i. i + 1)(4)",
        ];
        for s in samples {
            let h1 = parse_heap(s).unwrap_or_else(|e| panic!("parse `{s}`: {e}"));
            let printed = heap_to_string(&h1);
            let h2 = parse_heap(&printed)
                .unwrap_or_else(|e| panic!("reparse `{printed}`: {e}"));
            assert_eq!(h1, h2, "round trip through `{printed}`");
        }
    }

    #[test]
    fn shorthand_contents_expand_nowhere_but_segments_parse() {
        let h = parse_heap("true | A |-> A[0, size(A) - 1 | lam i. 0]").unwrap();
        assert!(matches!(h.spatial[0], Spatial::ArraySeg { .. }));
    }

    #[test]
    fn rejects_trailing_junk() {
        assert!(parse_heap("true | emp emp").is_err());
    }
}
