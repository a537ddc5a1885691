//! Tokenizer shared by the turtle subset, rule files and trace terms.

use std::fmt;

use crate::term::{is_name_char, is_name_start};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct Pos {
    pub line: usize,
    pub col: usize,
}

impl fmt::Display for Pos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Tok {
    IriRef(String),
    PName { prefix: String, local: String },
    Blank(String),
    Str(String),
    Integer(String),
    Double(String),
    /// Bare identifier: `a`, `true`, `not`, `equal`, ...
    Word(String),
    Var(String),
    /// `@prefix`, `@aggregate`, ...
    Directive(String),
    Dot,
    Semi,
    Comma,
    LBracket,
    RBracket,
    LParen,
    RParen,
    Arrow,
    Carets,
    Star,
    Eof,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::IriRef(i) => write!(f, "<{i}>"),
            Tok::PName { prefix, local } => write!(f, "{prefix}:{local}"),
            Tok::Blank(b) => write!(f, "_:{b}"),
            Tok::Str(s) => write!(f, "{s:?}"),
            Tok::Integer(s) | Tok::Double(s) | Tok::Word(s) => f.write_str(s),
            Tok::Var(v) => write!(f, "?{v}"),
            Tok::Directive(d) => write!(f, "@{d}"),
            Tok::Dot => f.write_str("'.'"),
            Tok::Semi => f.write_str("';'"),
            Tok::Comma => f.write_str("','"),
            Tok::LBracket => f.write_str("'['"),
            Tok::RBracket => f.write_str("']'"),
            Tok::LParen => f.write_str("'('"),
            Tok::RParen => f.write_str("')'"),
            Tok::Arrow => f.write_str("'->'"),
            Tok::Carets => f.write_str("'^^'"),
            Tok::Star => f.write_str("'*'"),
            Tok::Eof => f.write_str("end of input"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Token {
    pub tok: Tok,
    pub pos: Pos,
}

#[derive(Debug, Clone, PartialEq)]
pub enum LexError {
    Unexpected { found: char, pos: Pos },
    UnterminatedLiteral { pos: Pos },
    BadEscape { found: char, pos: Pos },
    UnterminatedIri { pos: Pos },
}

impl LexError {
    pub fn pos(&self) -> Pos {
        match self {
            LexError::Unexpected { pos, .. }
            | LexError::UnterminatedLiteral { pos }
            | LexError::BadEscape { pos, .. }
            | LexError::UnterminatedIri { pos } => *pos,
        }
    }
}

impl fmt::Display for LexError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LexError::Unexpected { found, .. } => write!(f, "unexpected character {found:?}"),
            LexError::UnterminatedLiteral { .. } => f.write_str("unterminated string literal"),
            LexError::BadEscape { found, .. } => write!(f, "invalid escape sequence \\{found}"),
            LexError::UnterminatedIri { .. } => f.write_str("unterminated IRI reference"),
        }
    }
}

struct Lexer<'a> {
    chars: std::iter::Peekable<std::str::Chars<'a>>,
    line: usize,
    col: usize,
    /// Lookahead copy for two-character decisions.
    rest: &'a str,
}

impl<'a> Lexer<'a> {
    fn pos(&self) -> Pos {
        Pos { line: self.line, col: self.col }
    }

    fn peek(&mut self) -> Option<char> {
        self.chars.peek().copied()
    }

    fn peek2(&self) -> Option<char> {
        let mut it = self.rest.chars();
        it.next();
        it.next()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.chars.next()?;
        self.rest = &self.rest[c.len_utf8()..];
        if c == '\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        Some(c)
    }

    fn take_while(&mut self, pred: impl Fn(char) -> bool) -> String {
        let mut s = String::new();
        while let Some(c) = self.peek() {
            if !pred(c) {
                break;
            }
            s.push(c);
            self.bump();
        }
        s
    }

    /// Name characters, stopping before a `-` that begins `->`.
    fn take_name(&mut self) -> String {
        let mut s = String::new();
        while let Some(c) = self.peek() {
            if !is_name_char(c) || (c == '-' && self.peek2() == Some('>')) {
                break;
            }
            s.push(c);
            self.bump();
        }
        s
    }

    fn string(&mut self, start: Pos) -> Result<String, LexError> {
        let mut s = String::new();
        loop {
            match self.bump() {
                None | Some('\n') => return Err(LexError::UnterminatedLiteral { pos: start }),
                Some('"') => return Ok(s),
                Some('\\') => {
                    let epos = self.pos();
                    match self.bump() {
                        Some('"') => s.push('"'),
                        Some('\\') => s.push('\\'),
                        Some('n') => s.push('\n'),
                        Some('r') => s.push('\r'),
                        Some('t') => s.push('\t'),
                        Some(c) => return Err(LexError::BadEscape { found: c, pos: epos }),
                        None => return Err(LexError::UnterminatedLiteral { pos: start }),
                    }
                }
                Some(c) => s.push(c),
            }
        }
    }

    fn number(&mut self) -> Tok {
        let mut s = String::new();
        if let Some(c @ ('+' | '-')) = self.peek() {
            s.push(c);
            self.bump();
        }
        s.push_str(&self.take_while(|c| c.is_ascii_digit()));
        let mut is_double = false;
        if self.peek() == Some('.') && self.peek2().is_some_and(|c| c.is_ascii_digit()) {
            is_double = true;
            s.push('.');
            self.bump();
            s.push_str(&self.take_while(|c| c.is_ascii_digit()));
        }
        if matches!(self.peek(), Some('e' | 'E')) {
            let after = self.peek2();
            if after.is_some_and(|c| c.is_ascii_digit() || c == '+' || c == '-') {
                is_double = true;
                s.push(self.bump().unwrap());
                if let Some(c @ ('+' | '-')) = self.peek() {
                    s.push(c);
                    self.bump();
                }
                s.push_str(&self.take_while(|c| c.is_ascii_digit()));
            }
        }
        if is_double {
            Tok::Double(s)
        } else {
            Tok::Integer(s)
        }
    }
}

pub fn tokenize(text: &str) -> Result<Vec<Token>, LexError> {
    let mut lx = Lexer { chars: text.chars().peekable(), line: 1, col: 1, rest: text };
    let mut out = Vec::new();
    while let Some(c) = lx.peek() {
        if c.is_whitespace() {
            lx.bump();
            continue;
        }
        if c == '#' {
            lx.take_while(|c| c != '\n');
            continue;
        }
        let pos = lx.pos();
        let tok = match c {
            '<' => {
                lx.bump();
                let iri = lx.take_while(|c| c != '>' && c != '\n');
                if lx.bump() != Some('>') {
                    return Err(LexError::UnterminatedIri { pos });
                }
                Tok::IriRef(iri)
            }
            '"' => {
                lx.bump();
                Tok::Str(lx.string(pos)?)
            }
            '?' => {
                lx.bump();
                let name = lx.take_name();
                if name.is_empty() {
                    return Err(LexError::Unexpected { found: '?', pos });
                }
                Tok::Var(name)
            }
            '@' => {
                lx.bump();
                let name = lx.take_name();
                if name.is_empty() {
                    return Err(LexError::Unexpected { found: '@', pos });
                }
                Tok::Directive(name)
            }
            '_' if lx.peek2() == Some(':') => {
                lx.bump();
                lx.bump();
                Tok::Blank(lx.take_name())
            }
            '^' if lx.peek2() == Some('^') => {
                lx.bump();
                lx.bump();
                Tok::Carets
            }
            '-' if lx.peek2() == Some('>') => {
                lx.bump();
                lx.bump();
                Tok::Arrow
            }
            '+' | '-' if lx.peek2().is_some_and(|c| c.is_ascii_digit() || c == '.') => lx.number(),
            '.' if lx.peek2().is_some_and(|c| c.is_ascii_digit()) => lx.number(),
            c if c.is_ascii_digit() => lx.number(),
            ':' => {
                lx.bump();
                Tok::PName { prefix: String::new(), local: lx.take_name() }
            }
            c if is_name_start(c) => {
                let word = lx.take_name();
                if lx.peek() == Some(':') {
                    lx.bump();
                    Tok::PName { prefix: word, local: lx.take_name() }
                } else {
                    Tok::Word(word)
                }
            }
            '.' => single(&mut lx, Tok::Dot),
            ';' => single(&mut lx, Tok::Semi),
            ',' => single(&mut lx, Tok::Comma),
            '[' => single(&mut lx, Tok::LBracket),
            ']' => single(&mut lx, Tok::RBracket),
            '(' => single(&mut lx, Tok::LParen),
            ')' => single(&mut lx, Tok::RParen),
            '*' => single(&mut lx, Tok::Star),
            other => return Err(LexError::Unexpected { found: other, pos }),
        };
        out.push(Token { tok, pos });
    }
    out.push(Token { tok: Tok::Eof, pos: lx.pos() });
    Ok(out)
}

fn single(lx: &mut Lexer<'_>, tok: Tok) -> Tok {
    lx.bump();
    tok
}
