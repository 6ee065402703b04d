//! Hand-rolled lexer with line:column tracking.

use super::{Diagnostic, Pos};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TokenKind {
    Ident,
    Int,
    // keywords
    Kernel,
    If,
    Then,
    Else,
    While,
    Do,
    Barrier,
    Assume,
    Assert,
    Shared,
    Private,
    Int32,
    Tid,
    Size,
    // punctuation
    LParen,
    RParen,
    LBracket,
    RBracket,
    LBrace,
    RBrace,
    Semi,
    Comma,
    Assign,   // =
    EqEq,     // ==
    NotEq,    // !=
    Lt,
    Le,
    Gt,
    Ge,
    Plus,
    Minus,
    Star,
    Slash,
    Percent,
    AndAnd,
    OrOr,
    Bang,
    Eof,
}

#[derive(Debug, Clone)]
pub struct Token {
    pub kind: TokenKind,
    pub text: String,
    pub pos: Pos,
}

pub struct Lexer<'a> {
    src: &'a [u8],
    at: usize,
    line: u32,
    col: u32,
}

impl<'a> Lexer<'a> {
    pub fn new(src: &'a str) -> Self {
        Lexer {
            src: src.as_bytes(),
            at: 0,
            line: 1,
            col: 1,
        }
    }

    /// Tokenize the whole input.
    pub fn tokenize(mut self) -> Result<Vec<Token>, Diagnostic> {
        let mut out = Vec::new();
        loop {
            let tok = self.next_token()?;
            let done = tok.kind == TokenKind::Eof;
            out.push(tok);
            if done {
                return Ok(out);
            }
        }
    }

    fn pos(&self) -> Pos {
        Pos {
            line: self.line,
            col: self.col,
        }
    }

    fn peek(&self) -> Option<u8> {
        self.src.get(self.at).copied()
    }

    fn peek2(&self) -> Option<u8> {
        self.src.get(self.at + 1).copied()
    }

    fn bump(&mut self) -> Option<u8> {
        let c = self.peek()?;
        self.at += 1;
        if c == b'\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        Some(c)
    }

    fn skip_trivia(&mut self) -> Result<(), Diagnostic> {
        loop {
            match self.peek() {
                Some(c) if c.is_ascii_whitespace() => {
                    self.bump();
                }
                Some(b'/') if self.peek2() == Some(b'/') => {
                    while let Some(c) = self.peek() {
                        if c == b'\n' {
                            break;
                        }
                        self.bump();
                    }
                }
                Some(b'/') if self.peek2() == Some(b'*') => {
                    let open = self.pos();
                    self.bump();
                    self.bump();
                    loop {
                        match (self.peek(), self.peek2()) {
                            (Some(b'*'), Some(b'/')) => {
                                self.bump();
                                self.bump();
                                break;
                            }
                            (Some(_), _) => {
                                self.bump();
                            }
                            (None, _) => {
                                return Err(Diagnostic::new(open, "unterminated block comment"))
                            }
                        }
                    }
                }
                _ => return Ok(()),
            }
        }
    }

    fn next_token(&mut self) -> Result<Token, Diagnostic> {
        self.skip_trivia()?;
        let pos = self.pos();
        let mk = |kind, text: &str| Token {
            kind,
            text: text.to_string(),
            pos,
        };
        let c = match self.peek() {
            None => return Ok(mk(TokenKind::Eof, "")),
            Some(c) => c,
        };
        if c.is_ascii_digit() {
            let start = self.at;
            while self.peek().is_some_and(|c| c.is_ascii_digit()) {
                self.bump();
            }
            let text = std::str::from_utf8(&self.src[start..self.at]).unwrap();
            if text.parse::<i64>().is_err() {
                return Err(Diagnostic::new(pos, format!("integer literal out of range: {text}")));
            }
            return Ok(mk(TokenKind::Int, text));
        }
        if c.is_ascii_alphabetic() || c == b'_' {
            let start = self.at;
            while self
                .peek()
                .is_some_and(|c| c.is_ascii_alphanumeric() || c == b'_')
            {
                self.bump();
            }
            let text = std::str::from_utf8(&self.src[start..self.at]).unwrap();
            let kind = match text {
                "kernel" => TokenKind::Kernel,
                "if" => TokenKind::If,
                "then" => TokenKind::Then,
                "else" => TokenKind::Else,
                "while" => TokenKind::While,
                "do" => TokenKind::Do,
                "barrier" => TokenKind::Barrier,
                "assume" => TokenKind::Assume,
                "assert" => TokenKind::Assert,
                "shared" => TokenKind::Shared,
                "private" => TokenKind::Private,
                "int" => TokenKind::Int32,
                "tid" => TokenKind::Tid,
                "size" => TokenKind::Size,
                _ => TokenKind::Ident,
            };
            if kind == TokenKind::Ident && text.starts_with("__") {
                return Err(Diagnostic::new(
                    pos,
                    format!("identifiers starting with `__` are reserved: {text}"),
                ));
            }
            return Ok(mk(kind, text));
        }
        self.bump();
        let two = |lex: &mut Self, kind| {
            lex.bump();
            kind
        };
        let kind = match c {
            b'(' => TokenKind::LParen,
            b')' => TokenKind::RParen,
            b'[' => TokenKind::LBracket,
            b']' => TokenKind::RBracket,
            b'{' => TokenKind::LBrace,
            b'}' => TokenKind::RBrace,
            b';' => TokenKind::Semi,
            b',' => TokenKind::Comma,
            b'+' => TokenKind::Plus,
            b'-' => TokenKind::Minus,
            b'*' => TokenKind::Star,
            b'/' => TokenKind::Slash,
            b'%' => TokenKind::Percent,
            b'=' if self.peek() == Some(b'=') => two(self, TokenKind::EqEq),
            b'=' => TokenKind::Assign,
            b'!' if self.peek() == Some(b'=') => two(self, TokenKind::NotEq),
            b'!' => TokenKind::Bang,
            b'<' if self.peek() == Some(b'=') => two(self, TokenKind::Le),
            b'<' => TokenKind::Lt,
            b'>' if self.peek() == Some(b'=') => two(self, TokenKind::Ge),
            b'>' => TokenKind::Gt,
            b'&' if self.peek() == Some(b'&') => two(self, TokenKind::AndAnd),
            b'|' if self.peek() == Some(b'|') => two(self, TokenKind::OrOr),
            _ => {
                return Err(Diagnostic::new(
                    pos,
                    format!("unexpected character `{}`", c as char),
                ))
            }
        };
        let text: String = match kind {
            TokenKind::EqEq => "==".into(),
            TokenKind::NotEq => "!=".into(),
            TokenKind::Le => "<=".into(),
            TokenKind::Ge => ">=".into(),
            TokenKind::AndAnd => "&&".into(),
            TokenKind::OrOr => "||".into(),
            _ => (c as char).to_string(),
        };
        Ok(Token { kind, text, pos })
    }
}
