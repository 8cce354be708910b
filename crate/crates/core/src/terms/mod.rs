//! Many-sorted terms over template parameters.
//!
//! A [`Term`] is built from constants, parameter references, the two index
//! placeholders (`<CASE>` and `<PLACE>`) and a fixed operator set. Terms are
//! sort-checked with [`infer_sort`] and evaluated under an [`Assignment`]
//! with [`eval`]. Sequence indexing is 1-based throughout.

mod eval;
mod parse;
mod print;
mod sort;

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

pub use eval::{eval, EvalContext, EvalError};
pub use parse::{is_keyword, parse_term, TermParser};
pub use sort::{binary_sort, expect_sort, infer_sort, ParamDecls, SortError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Sort {
    Int,
    Real,
    Bool,
    OrderedSetInt,
    OrderedSetReal,
}

impl Sort {
    pub const ALL: [Sort; 5] = [Sort::Int, Sort::Real, Sort::Bool, Sort::OrderedSetInt, Sort::OrderedSetReal];

    pub fn is_set(self) -> bool {
        matches!(self, Sort::OrderedSetInt | Sort::OrderedSetReal)
    }

    pub fn element(self) -> Option<Sort> {
        match self {
            Sort::OrderedSetInt => Some(Sort::Int),
            Sort::OrderedSetReal => Some(Sort::Real),
            _ => None,
        }
    }

    /// Parses the spellings used in model files (`Int`, `OrderedSet<Int>`, `set<real>` ...).
    pub fn from_name(name: &str) -> Option<Sort> {
        let n: String = name.chars().filter(|c| !c.is_whitespace()).collect::<String>().to_ascii_lowercase();
        match n.as_str() {
            "int" => Some(Sort::Int),
            "real" => Some(Sort::Real),
            "bool" => Some(Sort::Bool),
            "orderedset<int>" | "orderedset{int}" | "set<int>" => Some(Sort::OrderedSetInt),
            "orderedset<real>" | "orderedset{real}" | "set<real>" => Some(Sort::OrderedSetReal),
            _ => None,
        }
    }
}

impl fmt::Display for Sort {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Sort::Int => "Int",
            Sort::Real => "Real",
            Sort::Bool => "Bool",
            Sort::OrderedSetInt => "OrderedSet<Int>",
            Sort::OrderedSetReal => "OrderedSet<Real>",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Value {
    Int(i64),
    Real(f64),
    Bool(bool),
    IntSeq(Vec<i64>),
    RealSeq(Vec<f64>),
}

impl Value {
    pub fn sort(&self) -> Sort {
        match self {
            Value::Int(_) => Sort::Int,
            Value::Real(_) => Sort::Real,
            Value::Bool(_) => Sort::Bool,
            Value::IntSeq(_) => Sort::OrderedSetInt,
            Value::RealSeq(_) => Sort::OrderedSetReal,
        }
    }

    pub fn as_int(&self) -> Option<i64> {
        match self {
            Value::Int(v) => Some(*v),
            _ => None,
        }
    }

    pub fn as_real(&self) -> Option<f64> {
        match self {
            Value::Real(v) => Some(*v),
            _ => None,
        }
    }

    pub fn as_bool(&self) -> Option<bool> {
        match self {
            Value::Bool(v) => Some(*v),
            _ => None,
        }
    }

    pub fn as_int_seq(&self) -> Option<&[i64]> {
        match self {
            Value::IntSeq(v) => Some(v),
            _ => None,
        }
    }

    /// The literal term denoting this value.
    pub fn to_term(&self) -> Term {
        match self {
            Value::Int(v) => Term::Int(*v),
            Value::Real(v) => Term::Real(*v),
            Value::Bool(v) => Term::Bool(*v),
            Value::IntSeq(v) => Term::SetLiteral(v.iter().map(|x| Term::Int(*x)).collect()),
            Value::RealSeq(v) => Term::SetLiteral(v.iter().map(|x| Term::Real(*x)).collect()),
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Int(v) => write!(f, "{v}"),
            Value::Real(v) => write!(f, "{v:?}"),
            Value::Bool(v) => write!(f, "{v}"),
            Value::IntSeq(v) => {
                let items: Vec<String> = v.iter().map(|x| x.to_string()).collect();
                write!(f, "{{{}}}", items.join(", "))
            }
            Value::RealSeq(v) => {
                let items: Vec<String> = v.iter().map(|x| format!("{x:?}")).collect();
                write!(f, "{{{}}}", items.join(", "))
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum UnaryOp {
    /// Arithmetic negation on Int or Real.
    Neg,
    Not,
    /// `|x|`
    Size,
    /// `to_real(x)`, the only Int to Real conversion.
    ToReal,
    /// Boolean to 0/1, written `(cond)` in arithmetic position or `int(b)`.
    BoolToInt,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum BinaryOp {
    Add,
    Sub,
    Mul,
    /// Real division `/`.
    Div,
    /// Integer division `div`, truncating toward negative infinity.
    IntDiv,
    Mod,
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
    And,
    Or,
    Union,
    /// Element-at `x[i]`, 1-based.
    Index,
    /// Membership `e in x`.
    Member,
}

impl BinaryOp {
    pub fn symbol(self) -> &'static str {
        match self {
            BinaryOp::Add => "+",
            BinaryOp::Sub => "-",
            BinaryOp::Mul => "*",
            BinaryOp::Div => "/",
            BinaryOp::IntDiv => "div",
            BinaryOp::Mod => "mod",
            BinaryOp::Eq => "=",
            BinaryOp::Ne => "!=",
            BinaryOp::Lt => "<",
            BinaryOp::Le => "<=",
            BinaryOp::Gt => ">",
            BinaryOp::Ge => ">=",
            BinaryOp::And => "and",
            BinaryOp::Or => "or",
            BinaryOp::Union => "union",
            BinaryOp::Index => "[]",
            BinaryOp::Member => "in",
        }
    }
}

/// The two index placeholders usable inside gate and arc-label expressions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Placeholder {
    /// `<CASE>`: index of the activity case an output gate is concretized for.
    Case,
    /// `<PLACE>`: index of the concrete place an expression is applied to.
    Place,
}

impl fmt::Display for Placeholder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Placeholder::Case => "<CASE>",
            Placeholder::Place => "<PLACE>",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Term {
    Int(i64),
    Real(f64),
    Bool(bool),
    Param(String),
    Placeholder(Placeholder),
    SetLiteral(Vec<Term>),
    Unary(UnaryOp, Box<Term>),
    Binary(BinaryOp, Box<Term>, Box<Term>),
}

#[allow(clippy::should_implement_trait)]
impl Term {
    pub fn param(name: impl Into<String>) -> Term {
        Term::Param(name.into())
    }

    pub fn case() -> Term {
        Term::Placeholder(Placeholder::Case)
    }

    pub fn place() -> Term {
        Term::Placeholder(Placeholder::Place)
    }

    pub fn int_set(items: impl IntoIterator<Item = i64>) -> Term {
        Term::SetLiteral(items.into_iter().map(Term::Int).collect())
    }

    pub fn unary(op: UnaryOp, t: Term) -> Term {
        Term::Unary(op, Box::new(t))
    }

    pub fn binary(op: BinaryOp, l: Term, r: Term) -> Term {
        Term::Binary(op, Box::new(l), Box::new(r))
    }

    pub fn size(t: Term) -> Term {
        Term::unary(UnaryOp::Size, t)
    }

    pub fn index(seq: Term, i: Term) -> Term {
        Term::binary(BinaryOp::Index, seq, i)
    }

    pub fn add(l: Term, r: Term) -> Term {
        Term::binary(BinaryOp::Add, l, r)
    }

    pub fn sub(l: Term, r: Term) -> Term {
        Term::binary(BinaryOp::Sub, l, r)
    }

    pub fn mul(l: Term, r: Term) -> Term {
        Term::binary(BinaryOp::Mul, l, r)
    }

    pub fn eq(l: Term, r: Term) -> Term {
        Term::binary(BinaryOp::Eq, l, r)
    }

    pub fn and(l: Term, r: Term) -> Term {
        Term::binary(BinaryOp::And, l, r)
    }

    pub fn union(l: Term, r: Term) -> Term {
        Term::binary(BinaryOp::Union, l, r)
    }

    /// True if `<CASE>` or `<PLACE>` (as selected) occurs anywhere in the term.
    pub fn uses_placeholder(&self, which: Placeholder) -> bool {
        let mut found = false;
        self.visit(&mut |t| {
            if matches!(t, Term::Placeholder(p) if *p == which) {
                found = true;
            }
        });
        found
    }

    /// Parameter names referenced by the term, in first-occurrence order.
    pub fn params(&self) -> Vec<&str> {
        let mut out: Vec<&str> = Vec::new();
        self.visit_ref(&mut |t| {
            if let Term::Param(p) = t {
                if !out.contains(&p.as_str()) {
                    out.push(p.as_str());
                }
            }
        });
        out
    }

    /// True if the term contains no parameters or placeholders.
    pub fn is_ground(&self) -> bool {
        let mut ground = true;
        self.visit(&mut |t| {
            if matches!(t, Term::Param(_) | Term::Placeholder(_)) {
                ground = false;
            }
        });
        ground
    }

    fn visit(&self, f: &mut impl FnMut(&Term)) {
        f(self);
        match self {
            Term::SetLiteral(items) => items.iter().for_each(|t| t.visit(f)),
            Term::Unary(_, t) => t.visit(f),
            Term::Binary(_, l, r) => {
                l.visit(f);
                r.visit(f);
            }
            _ => {}
        }
    }

    fn visit_ref<'a>(&'a self, f: &mut impl FnMut(&'a Term)) {
        f(self);
        match self {
            Term::SetLiteral(items) => items.iter().for_each(|t| t.visit_ref(f)),
            Term::Unary(_, t) => t.visit_ref(f),
            Term::Binary(_, l, r) => {
                l.visit_ref(f);
                r.visit_ref(f);
            }
            _ => {}
        }
    }
}

impl From<i64> for Term {
    fn from(v: i64) -> Self {
        Term::Int(v)
    }
}

impl From<f64> for Term {
    fn from(v: f64) -> Self {
        Term::Real(v)
    }
}

/// A binding of parameter names to values.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Assignment {
    bindings: BTreeMap<String, Value>,
}

impl Assignment {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with(mut self, name: impl Into<String>, value: Value) -> Self {
        self.bind(name, value);
        self
    }

    pub fn bind(&mut self, name: impl Into<String>, value: Value) {
        self.bindings.insert(name.into(), value);
    }

    pub fn get(&self, name: &str) -> Option<&Value> {
        self.bindings.get(name)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&String, &Value)> {
        self.bindings.iter()
    }

    pub fn len(&self) -> usize {
        self.bindings.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bindings.is_empty()
    }

    /// Checks totality and sort agreement against the declared parameters.
    pub fn check_against(&self, decls: &ParamDecls) -> Result<(), EvalError> {
        for (name, sort) in decls.iter() {
            match self.bindings.get(name) {
                None => return Err(EvalError::UnboundParameter(name.to_string())),
                Some(v) if v.sort() != sort => {
                    return Err(EvalError::WrongSort { name: name.to_string(), expected: sort, found: v.sort() })
                }
                Some(_) => {}
            }
        }
        Ok(())
    }
}

impl FromIterator<(String, Value)> for Assignment {
    fn from_iter<I: IntoIterator<Item = (String, Value)>>(iter: I) -> Self {
        Assignment { bindings: iter.into_iter().collect() }
    }
}
