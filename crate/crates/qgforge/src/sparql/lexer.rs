//! Tokenizer for the SPARQL subset. Tracks line/column for error
//! reporting. A `.` is part of an identifier when immediately followed
//! by an identifier character, otherwise it terminates a triple.

use super::SparqlError;

#[derive(Debug, Clone, PartialEq)]
pub enum Tok {
    LBrace,
    RBrace,
    LParen,
    RParen,
    Dot,
    AndAnd,
    OrOr,
    CmpOp(&'static str),
    Var(String),
    Ident(String),
    Int(i64),
    Dec(f64),
    /// Quoted literal plus optional `^^kind` suffix.
    Str(String, Option<String>),
}

#[derive(Debug, Clone)]
pub struct Spanned {
    pub tok: Tok,
    pub line: usize,
    pub col: usize,
}

pub struct Lexer<'a> {
    src: &'a [u8],
    pos: usize,
    line: usize,
    col: usize,
}

fn is_ident_start(c: u8) -> bool {
    c.is_ascii_alphabetic() || c == b'_'
}

fn is_ident_continue(c: u8) -> bool {
    c.is_ascii_alphanumeric() || matches!(c, b'_' | b'$')
}

impl<'a> Lexer<'a> {
    pub fn new(src: &'a str) -> Lexer<'a> {
        Lexer {
            src: src.as_bytes(),
            pos: 0,
            line: 1,
            col: 1,
        }
    }

    fn err(&self, msg: impl Into<String>) -> SparqlError {
        SparqlError::Syntax {
            line: self.line,
            col: self.col,
            msg: msg.into(),
        }
    }

    fn peek(&self) -> Option<u8> {
        self.src.get(self.pos).copied()
    }

    fn peek2(&self) -> Option<u8> {
        self.src.get(self.pos + 1).copied()
    }

    fn bump(&mut self) -> Option<u8> {
        let c = self.peek()?;
        self.pos += 1;
        if c == b'\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        Some(c)
    }

    pub fn tokenize(mut self) -> Result<Vec<Spanned>, SparqlError> {
        let mut out = Vec::new();
        loop {
            while matches!(self.peek(), Some(c) if c.is_ascii_whitespace()) {
                self.bump();
            }
            let (line, col) = (self.line, self.col);
            let Some(c) = self.peek() else { break };
            let tok = match c {
                b'{' => {
                    self.bump();
                    Tok::LBrace
                }
                b'}' => {
                    self.bump();
                    Tok::RBrace
                }
                b'(' => {
                    self.bump();
                    Tok::LParen
                }
                b')' => {
                    self.bump();
                    Tok::RParen
                }
                b'.' => {
                    self.bump();
                    Tok::Dot
                }
                b'&' => {
                    self.bump();
                    if self.peek() == Some(b'&') {
                        self.bump();
                        Tok::AndAnd
                    } else {
                        return Err(self.err("expected `&&`"));
                    }
                }
                b'|' => {
                    self.bump();
                    if self.peek() == Some(b'|') {
                        self.bump();
                        Tok::OrOr
                    } else {
                        return Err(self.err("expected `||`"));
                    }
                }
                b'=' => {
                    self.bump();
                    Tok::CmpOp("=")
                }
                b'!' => {
                    self.bump();
                    if self.peek() == Some(b'=') {
                        self.bump();
                        Tok::CmpOp("!=")
                    } else {
                        return Err(self.err("expected `!=`"));
                    }
                }
                b'>' => {
                    self.bump();
                    if self.peek() == Some(b'=') {
                        self.bump();
                        Tok::CmpOp(">=")
                    } else {
                        Tok::CmpOp(">")
                    }
                }
                b'<' => {
                    self.bump();
                    if self.peek() == Some(b'=') {
                        self.bump();
                        Tok::CmpOp("<=")
                    } else if matches!(self.peek(), Some(c) if is_ident_start(c)) {
                        // angle-bracketed IRI: <r>
                        let mut name = String::new();
                        while let Some(c) = self.peek() {
                            if c == b'>' {
                                break;
                            }
                            if c.is_ascii_whitespace() {
                                return Err(self.err("unterminated `<...>` identifier"));
                            }
                            name.push(self.bump().unwrap() as char);
                        }
                        if self.peek() != Some(b'>') {
                            return Err(self.err("unterminated `<...>` identifier"));
                        }
                        self.bump();
                        Tok::Ident(name)
                    } else {
                        Tok::CmpOp("<")
                    }
                }
                b'?' => {
                    self.bump();
                    let mut name = String::new();
                    while matches!(self.peek(), Some(c) if is_ident_continue(c)) {
                        name.push(self.bump().unwrap() as char);
                    }
                    if name.is_empty() {
                        return Err(self.err("empty variable name after `?`"));
                    }
                    Tok::Var(name)
                }
                b'"' => {
                    self.bump();
                    let mut lex = String::new();
                    loop {
                        match self.bump() {
                            None => return Err(self.err("unterminated string literal")),
                            Some(b'\\') => match self.bump() {
                                Some(c) => lex.push(c as char),
                                None => return Err(self.err("unterminated escape")),
                            },
                            Some(b'"') => break,
                            Some(c) => lex.push(c as char),
                        }
                    }
                    let kind = if self.peek() == Some(b'^') && self.peek2() == Some(b'^') {
                        self.bump();
                        self.bump();
                        let mut k = String::new();
                        while matches!(self.peek(), Some(c) if is_ident_continue(c) || c == b':') {
                            k.push(self.bump().unwrap() as char);
                        }
                        if k.is_empty() {
                            return Err(self.err("missing literal type after `^^`"));
                        }
                        Some(k)
                    } else {
                        None
                    };
                    Tok::Str(lex, kind)
                }
                c if c.is_ascii_digit() => {
                    let mut num = String::new();
                    while matches!(self.peek(), Some(c) if c.is_ascii_digit()) {
                        num.push(self.bump().unwrap() as char);
                    }
                    if self.peek() == Some(b'.')
                        && matches!(self.peek2(), Some(c) if c.is_ascii_digit())
                    {
                        num.push(self.bump().unwrap() as char);
                        while matches!(self.peek(), Some(c) if c.is_ascii_digit()) {
                            num.push(self.bump().unwrap() as char);
                        }
                        let v: f64 = num
                            .parse()
                            .map_err(|_| self.err(format!("bad decimal `{num}`")))?;
                        Tok::Dec(v)
                    } else {
                        let v: i64 = num
                            .parse()
                            .map_err(|_| self.err(format!("bad integer `{num}`")))?;
                        Tok::Int(v)
                    }
                }
                c if is_ident_start(c) => {
                    let mut name = String::new();
                    name.push(self.bump().unwrap() as char);
                    loop {
                        match self.peek() {
                            Some(c) if is_ident_continue(c) => {
                                name.push(self.bump().unwrap() as char);
                            }
                            // dot glued to a following identifier character
                            // stays inside the name (m.0f2y0, ns.people.person)
                            Some(b'.') if matches!(self.peek2(), Some(n) if is_ident_continue(n)) =>
                            {
                                name.push(self.bump().unwrap() as char);
                            }
                            _ => break,
                        }
                    }
                    Tok::Ident(name)
                }
                other => {
                    return Err(self.err(format!("unexpected character `{}`", other as char)))
                }
            };
            out.push(Spanned { tok, line, col });
        }
        Ok(out)
    }
}
