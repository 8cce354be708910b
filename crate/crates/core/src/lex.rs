//! Tokenizer shared by the term, arc-label and model-file parsers.
//!
//! Besides ASCII spellings the lexer accepts the usual mathematical glyphs:
//! `⊙` for `<CASE>`, `⊗` for `<PLACE>`, `→` for `->`, `≥`/`≤` for `>=`/`<=`,
//! `∀`/`∃` for `forall`/`exists` and `∪` for `union`.

use std::fmt;

/// A byte offset into the source text together with its 1-based line and column.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Pos {
    pub offset: usize,
    pub line: usize,
    pub column: usize,
}

impl fmt::Display for Pos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.column)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Tok {
    Int(i64),
    Real(f64),
    Ident(String),
    Str(String),
    CaseIdx,
    PlaceIdx,
    Plus,
    Minus,
    Star,
    Slash,
    LParen,
    RParen,
    LBracket,
    RBracket,
    LBrace,
    RBrace,
    Comma,
    Semi,
    Colon,
    Pipe,
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
    Arrow,
    Assign,
    PlusAssign,
    MinusAssign,
    Eof,
}

impl Tok {
    /// Human readable spelling used in "expected ..." messages.
    pub fn describe(&self) -> String {
        match self {
            Tok::Int(v) => format!("integer `{v}`"),
            Tok::Real(v) => format!("real `{v:?}`"),
            Tok::Ident(s) => format!("`{s}`"),
            Tok::Str(s) => format!("string {s:?}"),
            Tok::Eof => "end of input".to_string(),
            other => format!("`{}`", other.spelling()),
        }
    }

    pub fn spelling(&self) -> &'static str {
        match self {
            Tok::CaseIdx => "<CASE>",
            Tok::PlaceIdx => "<PLACE>",
            Tok::Plus => "+",
            Tok::Minus => "-",
            Tok::Star => "*",
            Tok::Slash => "/",
            Tok::LParen => "(",
            Tok::RParen => ")",
            Tok::LBracket => "[",
            Tok::RBracket => "]",
            Tok::LBrace => "{",
            Tok::RBrace => "}",
            Tok::Comma => ",",
            Tok::Semi => ";",
            Tok::Colon => ":",
            Tok::Pipe => "|",
            Tok::Eq => "=",
            Tok::Ne => "!=",
            Tok::Lt => "<",
            Tok::Le => "<=",
            Tok::Gt => ">",
            Tok::Ge => ">=",
            Tok::Arrow => "->",
            Tok::Assign => ":=",
            Tok::PlusAssign => "+=",
            Tok::MinusAssign => "-=",
            Tok::Eof => "<eof>",
            Tok::Int(_) | Tok::Real(_) | Tok::Ident(_) | Tok::Str(_) => "<value>",
        }
    }

    pub fn is_ident(&self, word: &str) -> bool {
        matches!(self, Tok::Ident(s) if s == word)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Token {
    pub tok: Tok,
    pub pos: Pos,
    /// True when whitespace or a comment separates this token from the previous one.
    pub spaced: bool,
}

/// Error produced while tokenizing or parsing, always carrying a position.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("{pos}: {message}{}", expected_suffix(.expected))]
pub struct ParseError {
    pub pos: Pos,
    pub message: String,
    /// Tokens or constructs that would have been accepted at `pos`.
    pub expected: Vec<String>,
}

fn expected_suffix(expected: &[String]) -> String {
    if expected.is_empty() {
        String::new()
    } else {
        format!(" (expected one of: {})", expected.join(", "))
    }
}

impl ParseError {
    pub fn new(pos: Pos, message: impl Into<String>) -> Self {
        ParseError { pos, message: message.into(), expected: Vec::new() }
    }

    pub fn expected(pos: Pos, found: &Tok, expected: &[&str]) -> Self {
        ParseError {
            pos,
            message: format!("unexpected {}", found.describe()),
            expected: expected.iter().map(|s| s.to_string()).collect(),
        }
    }
}

pub fn tokenize(src: &str) -> Result<Vec<Token>, ParseError> {
    let mut out = Vec::new();
    let chars: Vec<(usize, char)> = src.char_indices().collect();
    let mut i = 0;
    let mut line = 1;
    let mut col = 1;
    let mut spaced = true;

    macro_rules! advance {
        ($n:expr) => {
            for _ in 0..$n {
                if chars[i].1 == '\n' {
                    line += 1;
                    col = 1;
                } else {
                    col += 1;
                }
                i += 1;
            }
        };
    }

    let rest = |i: usize| -> &str {
        match chars.get(i) {
            Some(&(off, _)) => &src[off..],
            None => "",
        }
    };

    while i < chars.len() {
        let (offset, c) = chars[i];
        let pos = Pos { offset, line, column: col };

        if c.is_whitespace() {
            spaced = true;
            advance!(1);
            continue;
        }
        if c == '#' || rest(i).starts_with("//") {
            while i < chars.len() && chars[i].1 != '\n' {
                advance!(1);
            }
            spaced = true;
            continue;
        }

        let r = rest(i);
        let (tok, len) = if let Some(t) = fixed_token(r) {
            t
        } else if c.is_ascii_digit() {
            lex_number(r, pos)?
        } else if c.is_alphabetic() || c == '_' {
            let len = r
                .chars()
                .take_while(|ch| ch.is_alphanumeric() || *ch == '_')
                .count();
            let word: String = r.chars().take(len).collect();
            (Tok::Ident(word), len)
        } else if c == '"' {
            let mut s = String::new();
            let mut len = 1;
            let mut closed = false;
            let mut it = r.chars().skip(1);
            while let Some(ch) = it.next() {
                len += 1;
                match ch {
                    '"' => {
                        closed = true;
                        break;
                    }
                    '\\' => {
                        let Some(esc) = it.next() else { break };
                        len += 1;
                        s.push(match esc {
                            'n' => '\n',
                            't' => '\t',
                            other => other,
                        });
                    }
                    other => s.push(other),
                }
            }
            if !closed {
                return Err(ParseError::new(pos, "unterminated string literal"));
            }
            (Tok::Str(s), len)
        } else {
            return Err(ParseError::new(pos, format!("unexpected character `{c}`")));
        };

        out.push(Token { tok, pos, spaced });
        spaced = false;
        advance!(len);
    }

    let offset = src.len();
    out.push(Token { tok: Tok::Eof, pos: Pos { offset, line, column: col }, spaced: true });
    Ok(out)
}

/// Returns the token and its length in chars.
fn fixed_token(r: &str) -> Option<(Tok, usize)> {
    const TABLE: &[(&str, Tok)] = &[
        ("<CASE>", Tok::CaseIdx),
        ("<PLACE>", Tok::PlaceIdx),
        ("⊙", Tok::CaseIdx),
        ("⊗", Tok::PlaceIdx),
        ("->", Tok::Arrow),
        ("→", Tok::Arrow),
        (":=", Tok::Assign),
        ("+=", Tok::PlusAssign),
        ("-=", Tok::MinusAssign),
        ("<=", Tok::Le),
        ("≤", Tok::Le),
        (">=", Tok::Ge),
        ("≥", Tok::Ge),
        ("==", Tok::Eq),
        ("!=", Tok::Ne),
        ("≠", Tok::Ne),
        ("+", Tok::Plus),
        ("-", Tok::Minus),
        ("−", Tok::Minus),
        ("*", Tok::Star),
        ("·", Tok::Star),
        ("×", Tok::Star),
        ("/", Tok::Slash),
        ("(", Tok::LParen),
        (")", Tok::RParen),
        ("[", Tok::LBracket),
        ("]", Tok::RBracket),
        ("{", Tok::LBrace),
        ("}", Tok::RBrace),
        (",", Tok::Comma),
        (";", Tok::Semi),
        (":", Tok::Colon),
        ("|", Tok::Pipe),
        ("=", Tok::Eq),
        ("<", Tok::Lt),
        (">", Tok::Gt),
    ];
    for (text, tok) in TABLE {
        if r.starts_with(text) {
            return Some((tok.clone(), text.chars().count()));
        }
    }
    for (glyph, word) in [("∀", "forall"), ("∃", "exists"), ("∪", "union"), ("∈", "in"), ("¬", "not"), ("∧", "and"), ("∨", "or")] {
        if r.starts_with(glyph) {
            return Some((Tok::Ident(word.to_string()), 1));
        }
    }
    None
}

fn lex_number(r: &str, pos: Pos) -> Result<(Tok, usize), ParseError> {
    let bytes = r.as_bytes();
    let mut n = 0;
    while n < bytes.len() && bytes[n].is_ascii_digit() {
        n += 1;
    }
    let mut is_real = false;
    if n + 1 < bytes.len() && bytes[n] == b'.' && bytes[n + 1].is_ascii_digit() {
        is_real = true;
        n += 1;
        while n < bytes.len() && bytes[n].is_ascii_digit() {
            n += 1;
        }
    }
    if n < bytes.len() && (bytes[n] == b'e' || bytes[n] == b'E') {
        let mut m = n + 1;
        if m < bytes.len() && (bytes[m] == b'+' || bytes[m] == b'-') {
            m += 1;
        }
        if m < bytes.len() && bytes[m].is_ascii_digit() {
            while m < bytes.len() && bytes[m].is_ascii_digit() {
                m += 1;
            }
            is_real = true;
            n = m;
        }
    }
    let text = &r[..n];
    let tok = if is_real {
        Tok::Real(text.parse().map_err(|_| ParseError::new(pos, format!("invalid real literal `{text}`")))?)
    } else {
        Tok::Int(text.parse().map_err(|_| ParseError::new(pos, format!("integer literal `{text}` out of range")))?)
    };
    Ok((tok, n))
}

/// Cursor over a token vector with the small helpers every parser needs.
#[derive(Debug, Clone)]
pub struct Cursor {
    toks: Vec<Token>,
    idx: usize,
}

impl Cursor {
    pub fn new(src: &str) -> Result<Self, ParseError> {
        Ok(Cursor { toks: tokenize(src)?, idx: 0 })
    }

    pub fn peek(&self) -> &Tok {
        &self.toks[self.idx].tok
    }

    pub fn peek_at(&self, ahead: usize) -> &Tok {
        let i = (self.idx + ahead).min(self.toks.len() - 1);
        &self.toks[i].tok
    }

    pub fn token(&self) -> &Token {
        &self.toks[self.idx]
    }

    pub fn token_at(&self, ahead: usize) -> &Token {
        let i = (self.idx + ahead).min(self.toks.len() - 1);
        &self.toks[i]
    }

    pub fn pos(&self) -> Pos {
        self.toks[self.idx].pos
    }

    pub fn bump(&mut self) -> Token {
        let t = self.toks[self.idx].clone();
        if self.idx + 1 < self.toks.len() {
            self.idx += 1;
        }
        t
    }

    pub fn eat(&mut self, tok: &Tok) -> bool {
        if self.peek() == tok {
            self.bump();
            true
        } else {
            false
        }
    }

    pub fn eat_ident(&mut self, word: &str) -> bool {
        if self.peek().is_ident(word) {
            self.bump();
            true
        } else {
            false
        }
    }

    pub fn expect(&mut self, tok: &Tok) -> Result<Token, ParseError> {
        if self.peek() == tok {
            Ok(self.bump())
        } else {
            Err(ParseError::expected(self.pos(), self.peek(), &[tok.spelling()]))
        }
    }

    pub fn expect_ident_word(&mut self, word: &str) -> Result<(), ParseError> {
        if self.eat_ident(word) {
            Ok(())
        } else {
            Err(ParseError::expected(self.pos(), self.peek(), &[word]))
        }
    }

    pub fn expect_name(&mut self) -> Result<(String, Pos), ParseError> {
        let pos = self.pos();
        match self.peek().clone() {
            Tok::Ident(s) => {
                self.bump();
                Ok((s, pos))
            }
            other => Err(ParseError::expected(pos, &other, &["identifier"])),
        }
    }

    pub fn at_eof(&self) -> bool {
        matches!(self.peek(), Tok::Eof)
    }

    pub fn expect_eof(&self) -> Result<(), ParseError> {
        if self.at_eof() {
            Ok(())
        } else {
            Err(ParseError::expected(self.pos(), self.peek(), &["end of input"]))
        }
    }
}
