//! Recursive-descent parser for the infix term syntax.
//!
//! Precedence, loosest first: `or`, `and`, `not`, comparisons and `in`,
//! `union`, `+ -`, `* / div mod`, unary `-`, postfix `x[i]`.
//! A parenthesised boolean used as an arithmetic operand, as in
//! `1 + (p > 0.0)`, denotes its 0/1 value.

use super::{BinaryOp, Placeholder, Term, UnaryOp};
use crate::lex::{Cursor, ParseError, Tok};

const KEYWORDS: &[&str] = &[
    "and", "or", "not", "div", "mod", "union", "in", "true", "false", "to_real", "int", "forall", "exists",
];

pub fn is_keyword(word: &str) -> bool {
    KEYWORDS.contains(&word)
}

/// Parses a complete term; trailing input is an error.
pub fn parse_term(src: &str) -> Result<Term, ParseError> {
    let mut cur = Cursor::new(src)?;
    let t = TermParser::new(&mut cur).expr()?;
    cur.expect_eof()?;
    Ok(t)
}

struct Operand {
    term: Term,
    /// Written as `( e )` with a syntactically boolean `e`.
    paren_bool: bool,
}

impl Operand {
    fn plain(term: Term) -> Self {
        Operand { term, paren_bool: false }
    }

    fn arith(self) -> Term {
        if self.paren_bool {
            Term::unary(UnaryOp::BoolToInt, self.term)
        } else {
            self.term
        }
    }
}

pub(crate) fn is_syntactic_bool(t: &Term) -> bool {
    use BinaryOp as B;
    match t {
        Term::Bool(_) => true,
        Term::Unary(UnaryOp::Not, _) => true,
        Term::Binary(op, _, _) => matches!(
            op,
            B::Eq | B::Ne | B::Lt | B::Le | B::Gt | B::Ge | B::And | B::Or | B::Member
        ),
        _ => false,
    }
}

pub struct TermParser<'c> {
    cur: &'c mut Cursor,
    /// Restricted top level used inside arc labels: no comparisons, logic or `/`.
    label_mode: bool,
}

impl<'c> TermParser<'c> {
    pub fn new(cur: &'c mut Cursor) -> Self {
        TermParser { cur, label_mode: false }
    }

    /// Parser for integer terms embedded in arc labels and quantifier conditions.
    /// Comparison operators and `/` terminate the term unless parenthesised.
    pub fn label(cur: &'c mut Cursor) -> Self {
        TermParser { cur, label_mode: true }
    }

    pub fn expr(&mut self) -> Result<Term, ParseError> {
        if self.label_mode {
            return self.union_level().map(Operand::arith);
        }
        self.or_level()
    }

    fn nested<T>(&mut self, f: impl FnOnce(&mut Self) -> Result<T, ParseError>) -> Result<T, ParseError> {
        let saved = self.label_mode;
        self.label_mode = false;
        let r = f(self);
        self.label_mode = saved;
        r
    }

    fn or_level(&mut self) -> Result<Term, ParseError> {
        let mut l = self.and_level()?;
        while self.cur.eat_ident("or") {
            let r = self.and_level()?;
            l = Term::binary(BinaryOp::Or, l, r);
        }
        Ok(l)
    }

    fn and_level(&mut self) -> Result<Term, ParseError> {
        let mut l = self.not_level()?;
        while self.cur.eat_ident("and") {
            let r = self.not_level()?;
            l = Term::binary(BinaryOp::And, l, r);
        }
        Ok(l)
    }

    fn not_level(&mut self) -> Result<Term, ParseError> {
        if self.cur.eat_ident("not") {
            let t = self.not_level()?;
            return Ok(Term::unary(UnaryOp::Not, t));
        }
        self.cmp_level()
    }

    fn cmp_level(&mut self) -> Result<Term, ParseError> {
        let l = self.union_level()?;
        let op = match self.cur.peek() {
            Tok::Eq => BinaryOp::Eq,
            Tok::Ne => BinaryOp::Ne,
            Tok::Lt => BinaryOp::Lt,
            Tok::Le => BinaryOp::Le,
            Tok::Gt => BinaryOp::Gt,
            Tok::Ge => BinaryOp::Ge,
            t if t.is_ident("in") => BinaryOp::Member,
            _ => return Ok(l.term),
        };
        self.cur.bump();
        let r = self.union_level()?;
        Ok(Term::binary(op, l.term, r.term))
    }

    fn union_level(&mut self) -> Result<Operand, ParseError> {
        let mut l = self.additive()?;
        while self.cur.eat_ident("union") {
            let r = self.additive()?;
            l = Operand::plain(Term::binary(BinaryOp::Union, l.term, r.term));
        }
        Ok(l)
    }

    fn additive(&mut self) -> Result<Operand, ParseError> {
        let mut l = self.multiplicative()?;
        loop {
            let op = match self.cur.peek() {
                Tok::Plus => BinaryOp::Add,
                Tok::Minus => BinaryOp::Sub,
                _ => return Ok(l),
            };
            self.cur.bump();
            let r = self.multiplicative()?;
            l = Operand::plain(Term::binary(op, l.arith(), r.arith()));
        }
    }

    fn multiplicative(&mut self) -> Result<Operand, ParseError> {
        let mut l = self.unary()?;
        loop {
            let op = match self.cur.peek() {
                Tok::Star => BinaryOp::Mul,
                Tok::Slash if !self.label_mode => BinaryOp::Div,
                t if t.is_ident("div") => BinaryOp::IntDiv,
                t if t.is_ident("mod") => BinaryOp::Mod,
                _ if self.implicit_product(&l.term) => {
                    // `3<PLACE>` and `2k`: a literal directly followed by an operand
                    let r = self.unary()?;
                    l = Operand::plain(Term::binary(BinaryOp::Mul, l.arith(), r.arith()));
                    continue;
                }
                _ => return Ok(l),
            };
            self.cur.bump();
            let r = self.unary()?;
            l = Operand::plain(Term::binary(op, l.arith(), r.arith()));
        }
    }

    fn implicit_product(&self, left: &Term) -> bool {
        if !matches!(left, Term::Int(_) | Term::Real(_)) {
            return false;
        }
        let tok = self.cur.token();
        if tok.spaced {
            return false;
        }
        match &tok.tok {
            Tok::CaseIdx | Tok::PlaceIdx | Tok::LParen => true,
            Tok::Ident(w) => !is_keyword(w),
            _ => false,
        }
    }

    fn unary(&mut self) -> Result<Operand, ParseError> {
        if matches!(self.cur.peek(), Tok::Minus) {
            // `-3` is a literal; `-(3)` and `-x` are negations
            match self.cur.peek_at(1).clone() {
                Tok::Int(v) if !self.cur_spaced_at(1) => {
                    self.cur.bump();
                    self.cur.bump();
                    return self.postfix(Operand::plain(Term::Int(-v)));
                }
                Tok::Real(v) if !self.cur_spaced_at(1) => {
                    self.cur.bump();
                    self.cur.bump();
                    return self.postfix(Operand::plain(Term::Real(-v)));
                }
                _ => {}
            }
            self.cur.bump();
            let t = self.unary()?;
            return Ok(Operand::plain(Term::unary(UnaryOp::Neg, t.arith())));
        }
        let p = self.primary()?;
        self.postfix(p)
    }

    fn cur_spaced_at(&self, ahead: usize) -> bool {
        self.cur.token_at(ahead).spaced
    }

    fn postfix(&mut self, mut base: Operand) -> Result<Operand, ParseError> {
        while matches!(self.cur.peek(), Tok::LBracket) {
            self.cur.bump();
            let idx = self.nested(|p| p.or_level())?;
            self.cur.expect(&Tok::RBracket)?;
            base = Operand::plain(Term::index(base.term, idx));
        }
        Ok(base)
    }

    fn primary(&mut self) -> Result<Operand, ParseError> {
        let pos = self.cur.pos();
        let tok = self.cur.peek().clone();
        let term = match tok {
            Tok::Int(v) => {
                self.cur.bump();
                Term::Int(v)
            }
            Tok::Real(v) => {
                self.cur.bump();
                Term::Real(v)
            }
            Tok::CaseIdx => {
                self.cur.bump();
                Term::Placeholder(Placeholder::Case)
            }
            Tok::PlaceIdx => {
                self.cur.bump();
                Term::Placeholder(Placeholder::Place)
            }
            Tok::LParen => {
                self.cur.bump();
                let inner = self.nested(|p| p.or_level())?;
                self.cur.expect(&Tok::RParen)?;
                let paren_bool = is_syntactic_bool(&inner);
                return Ok(Operand { term: inner, paren_bool });
            }
            Tok::Pipe => {
                self.cur.bump();
                let inner = self.nested(|p| p.or_level())?;
                self.cur.expect(&Tok::Pipe)?;
                Term::size(inner)
            }
            Tok::LBrace => {
                self.cur.bump();
                let mut items = Vec::new();
                if !self.cur.eat(&Tok::RBrace) {
                    loop {
                        items.push(self.nested(|p| p.or_level())?);
                        if self.cur.eat(&Tok::Comma) {
                            continue;
                        }
                        self.cur.expect(&Tok::RBrace)?;
                        break;
                    }
                }
                Term::SetLiteral(items)
            }
            Tok::Ident(ref w) if w == "true" || w == "false" => {
                self.cur.bump();
                Term::Bool(w == "true")
            }
            Tok::Ident(ref w) if w == "to_real" || w == "int" => {
                let op = if w == "to_real" { UnaryOp::ToReal } else { UnaryOp::BoolToInt };
                self.cur.bump();
                self.cur.expect(&Tok::LParen)?;
                let inner = self.nested(|p| p.or_level())?;
                self.cur.expect(&Tok::RParen)?;
                Term::unary(op, inner)
            }
            Tok::Ident(ref w) if !is_keyword(w) => {
                self.cur.bump();
                Term::Param(w.clone())
            }
            other => {
                return Err(ParseError::expected(
                    pos,
                    &other,
                    &["number", "parameter", "<CASE>", "<PLACE>", "(", "|", "{", "true", "false", "to_real", "int", "-"],
                ))
            }
        };
        Ok(Operand::plain(term))
    }
}
