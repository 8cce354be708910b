use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{BinaryOp, Sort, Term, UnaryOp};

/// Declared parameters and their sorts, in declaration order.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ParamDecls {
    decls: Vec<(String, Sort)>,
}

impl ParamDecls {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with(mut self, name: impl Into<String>, sort: Sort) -> Self {
        self.declare(name, sort);
        self
    }

    /// Adds a declaration; a repeated name replaces the earlier sort.
    pub fn declare(&mut self, name: impl Into<String>, sort: Sort) {
        let name = name.into();
        if let Some(slot) = self.decls.iter_mut().find(|(n, _)| *n == name) {
            slot.1 = sort;
        } else {
            self.decls.push((name, sort));
        }
    }

    pub fn get(&self, name: &str) -> Option<Sort> {
        self.decls.iter().find(|(n, _)| n == name).map(|(_, s)| *s)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, Sort)> {
        self.decls.iter().map(|(n, s)| (n.as_str(), *s))
    }

    pub fn len(&self) -> usize {
        self.decls.len()
    }

    pub fn is_empty(&self) -> bool {
        self.decls.is_empty()
    }

    pub fn as_map(&self) -> BTreeMap<&str, Sort> {
        self.iter().collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SortError {
    #[error("operator `{op}` cannot be applied to {}", fmt_sorts(.found))]
    SortMismatch { op: String, found: Vec<Sort> },
    #[error("unknown parameter `{0}`")]
    UnknownParameter(String),
    #[error("set literal mixes element sorts {0} and {1}")]
    MixedSetLiteral(Sort, Sort),
    #[error("set literal elements must be Int or Real, found {0}")]
    BadSetElement(Sort),
    #[error("expected a term of sort {expected}, found {found}")]
    Expected { expected: Sort, found: Sort },
}

fn fmt_sorts(s: &[Sort]) -> String {
    let parts: Vec<String> = s.iter().map(|s| s.to_string()).collect();
    format!("({})", parts.join(", "))
}

fn mismatch(op: &str, found: Vec<Sort>) -> SortError {
    SortError::SortMismatch { op: op.to_string(), found }
}

/// Infers the sort of a term, checking every operator application.
///
/// There is no implicit promotion between Int and Real: `to_real` must be used.
pub fn infer_sort(term: &Term, params: &ParamDecls) -> Result<Sort, SortError> {
    use Sort::*;
    Ok(match term {
        Term::Int(_) => Int,
        Term::Real(_) => Real,
        Term::Bool(_) => Bool,
        Term::Placeholder(_) => Int,
        Term::Param(name) => params.get(name).ok_or_else(|| SortError::UnknownParameter(name.clone()))?,
        Term::SetLiteral(items) => {
            let mut elem: Option<Sort> = None;
            for item in items {
                let s = infer_sort(item, params)?;
                if !matches!(s, Int | Real) {
                    return Err(SortError::BadSetElement(s));
                }
                match elem {
                    None => elem = Some(s),
                    Some(e) if e != s => return Err(SortError::MixedSetLiteral(e, s)),
                    Some(_) => {}
                }
            }
            match elem {
                Some(Real) => OrderedSetReal,
                _ => OrderedSetInt,
            }
        }
        Term::Unary(op, t) => {
            let s = infer_sort(t, params)?;
            match (op, s) {
                (UnaryOp::Neg, Int) => Int,
                (UnaryOp::Neg, Real) => Real,
                (UnaryOp::Not, Bool) => Bool,
                (UnaryOp::Size, OrderedSetInt | OrderedSetReal) => Int,
                (UnaryOp::ToReal, Int) => Real,
                (UnaryOp::BoolToInt, Bool) => Int,
                (op, s) => return Err(mismatch(unary_name(*op), vec![s])),
            }
        }
        Term::Binary(op, l, r) => {
            let ls = infer_sort(l, params)?;
            let rs = infer_sort(r, params)?;
            binary_sort(*op, ls, rs).ok_or_else(|| mismatch(op.symbol(), vec![ls, rs]))?
        }
    })
}

pub(crate) fn unary_name(op: UnaryOp) -> &'static str {
    match op {
        UnaryOp::Neg => "-",
        UnaryOp::Not => "not",
        UnaryOp::Size => "|.|",
        UnaryOp::ToReal => "to_real",
        UnaryOp::BoolToInt => "int",
    }
}

/// Result sort of a binary operator, or `None` if the operand sorts are not in its arity.
pub fn binary_sort(op: BinaryOp, l: Sort, r: Sort) -> Option<Sort> {
    use BinaryOp as B;
    use Sort::*;
    match (op, l, r) {
        (B::Add | B::Sub | B::Mul, Int, Int) => Some(Int),
        (B::Add | B::Sub | B::Mul | B::Div, Real, Real) => Some(Real),
        (B::IntDiv | B::Mod, Int, Int) => Some(Int),
        (B::Eq | B::Ne, a, b) if a == b => Some(Bool),
        (B::Lt | B::Le | B::Gt | B::Ge, Int, Int) | (B::Lt | B::Le | B::Gt | B::Ge, Real, Real) => Some(Bool),
        (B::And | B::Or, Bool, Bool) => Some(Bool),
        (B::Union, OrderedSetInt, OrderedSetInt) => Some(OrderedSetInt),
        (B::Union, OrderedSetReal, OrderedSetReal) => Some(OrderedSetReal),
        (B::Index, OrderedSetInt, Int) => Some(Int),
        (B::Index, OrderedSetReal, Int) => Some(Real),
        (B::Member, Int, OrderedSetInt) | (B::Member, Real, OrderedSetReal) => Some(Bool),
        _ => None,
    }
}

/// Checks that `term` has sort `expected`.
pub fn expect_sort(term: &Term, params: &ParamDecls, expected: Sort) -> Result<(), SortError> {
    let found = infer_sort(term, params)?;
    if found == expected {
        Ok(())
    } else {
        Err(SortError::Expected { expected, found })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::terms::parse_term;

    fn decls() -> ParamDecls {
        ParamDecls::new()
            .with("s", Sort::OrderedSetInt)
            .with("pb", Sort::OrderedSetReal)
            .with("i", Sort::Int)
            .with("p", Sort::Real)
    }

    fn sort_of(src: &str) -> Result<Sort, SortError> {
        infer_sort(&parse_term(src).unwrap(), &decls())
    }

    #[test]
    fn size_of_int_set_is_int() {
        assert_eq!(sort_of("|s|"), Ok(Sort::Int));
    }

    #[test]
    fn constant_is_int() {
        assert_eq!(sort_of("1"), Ok(Sort::Int));
    }

    #[test]
    fn no_implicit_promotion() {
        assert!(matches!(sort_of("s[i] + 0.5"), Err(SortError::SortMismatch { .. })));
        assert_eq!(sort_of("to_real(s[i]) + 0.5"), Ok(Sort::Real));
    }

    #[test]
    fn iverson_bracket_for_case_count() {
        assert_eq!(sort_of("1 + (p > 0.0)"), Ok(Sort::Int));
        assert!(matches!(sort_of("1 + (p > 0)"), Err(SortError::SortMismatch { .. })));
    }

    #[test]
    fn element_at_real_sequence() {
        assert_eq!(sort_of("pb[<CASE>]"), Ok(Sort::Real));
        assert_eq!(sort_of("{1} union s"), Ok(Sort::OrderedSetInt));
    }

    #[test]
    fn unknown_parameter() {
        assert_eq!(sort_of("q + 1"), Err(SortError::UnknownParameter("q".into())));
    }

    #[test]
    fn mixed_set_literal() {
        assert!(matches!(sort_of("{1, 2.0}"), Err(SortError::MixedSetLiteral(..))));
    }
}
