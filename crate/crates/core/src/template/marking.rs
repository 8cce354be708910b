use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::terms::{eval, Assignment, EvalContext, EvalError, Term, Value};

/// A marking template: a function from place indices to token counts.
///
/// `Const`, `SetAt` and `SetOn` are the closed forms `f^k`, `f^k_j` and
/// `f^k_J`. `SetAt` and `SetOn` override `base` at the given indices; with
/// `base = Identity` they are exactly `n ↦ k if n = j else n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum MarkingTemplateFn {
    Const(Term),
    SetAt { value: Term, index: Term, base: Box<MarkingTemplateFn> },
    SetOn { value: Term, indices: Term, base: Box<MarkingTemplateFn> },
    Identity,
    /// Int term over `<PLACE>` and parameters.
    Expr(Term),
    /// Explicit values; indices not listed hold zero tokens.
    Table(BTreeMap<i64, u64>),
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum MarkingError {
    #[error("marking of `{place}` at index {index} evaluates to negative value {value}")]
    NegativeMarking { place: String, index: i64, value: i64 },
    #[error("marking of `{place}`: {source}")]
    Eval { place: String, source: EvalError },
    #[error("no marking template for place `{0}`")]
    Missing(String),
}

impl MarkingTemplateFn {
    pub fn constant(k: i64) -> Self {
        MarkingTemplateFn::Const(Term::Int(k))
    }

    /// `f^k_j` over a given base.
    pub fn set_at(value: Term, index: Term, base: MarkingTemplateFn) -> Self {
        MarkingTemplateFn::SetAt { value, index, base: Box::new(base) }
    }

    /// `f^k_J` over a given base.
    pub fn set_on(value: Term, indices: Term, base: MarkingTemplateFn) -> Self {
        MarkingTemplateFn::SetOn { value, indices, base: Box::new(base) }
    }

    /// Evaluates the function at `index`, returning a signed result.
    pub fn eval_at(&self, index: i64, xi: &Assignment) -> Result<i64, EvalError> {
        let int = |t: &Term, ctx: EvalContext| -> Result<i64, EvalError> {
            match eval(t, xi, ctx)? {
                Value::Int(v) => Ok(v),
                other => Err(EvalError::Invalid(format!("marking term `{t}` evaluated to {other}, expected Int"))),
            }
        };
        match self {
            MarkingTemplateFn::Const(t) => int(t, EvalContext::NONE),
            MarkingTemplateFn::SetAt { value, index: at, base } => {
                if int(at, EvalContext::NONE)? == index {
                    int(value, EvalContext::NONE)
                } else {
                    base.eval_at(index, xi)
                }
            }
            MarkingTemplateFn::SetOn { value, indices, base } => {
                let set = match eval(indices, xi, EvalContext::NONE)? {
                    Value::IntSeq(s) => s,
                    other => {
                        return Err(EvalError::Invalid(format!(
                            "marking index set `{indices}` evaluated to {other}, expected OrderedSet<Int>"
                        )))
                    }
                };
                if set.contains(&index) {
                    int(value, EvalContext::NONE)
                } else {
                    base.eval_at(index, xi)
                }
            }
            MarkingTemplateFn::Identity => Ok(index),
            MarkingTemplateFn::Expr(t) => int(t, EvalContext::place(index)),
            MarkingTemplateFn::Table(map) => Ok(map.get(&index).map(|v| *v as i64).unwrap_or(0)),
        }
    }

    /// Token count at `index` for the place named `place`; negative values are errors.
    pub fn tokens_at(&self, place: &str, index: i64, xi: &Assignment) -> Result<u64, MarkingError> {
        let v = self
            .eval_at(index, xi)
            .map_err(|source| MarkingError::Eval { place: place.to_string(), source })?;
        u64::try_from(v).map_err(|_| MarkingError::NegativeMarking { place: place.to_string(), index, value: v })
    }

    pub fn terms(&self) -> Vec<&Term> {
        match self {
            MarkingTemplateFn::Const(t) | MarkingTemplateFn::Expr(t) => vec![t],
            MarkingTemplateFn::SetAt { value, index, base } => {
                let mut v = vec![value, index];
                v.extend(base.terms());
                v
            }
            MarkingTemplateFn::SetOn { value, indices, base } => {
                let mut v = vec![value, indices];
                v.extend(base.terms());
                v
            }
            MarkingTemplateFn::Identity | MarkingTemplateFn::Table(_) => vec![],
        }
    }
}

/// A marking of a SAN template: one marking-template function per place template.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct TemplateMarking {
    pub map: BTreeMap<String, MarkingTemplateFn>,
}

impl TemplateMarking {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with(mut self, place: impl Into<String>, f: MarkingTemplateFn) -> Self {
        self.map.insert(place.into(), f);
        self
    }

    pub fn set(&mut self, place: impl Into<String>, f: MarkingTemplateFn) {
        self.map.insert(place.into(), f);
    }

    pub fn get(&self, place: &str) -> Option<&MarkingTemplateFn> {
        self.map.get(place)
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }
}
