use super::{Assignment, BinaryOp, Placeholder, Sort, Term, UnaryOp, Value};

/// Values substituted for `<CASE>` and `<PLACE>` during evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct EvalContext {
    pub case_index: Option<i64>,
    pub place_index: Option<i64>,
}

impl EvalContext {
    pub const NONE: EvalContext = EvalContext { case_index: None, place_index: None };

    pub fn case(i: i64) -> Self {
        EvalContext { case_index: Some(i), place_index: None }
    }

    pub fn place(i: i64) -> Self {
        EvalContext { case_index: None, place_index: Some(i) }
    }

    pub fn with_case(mut self, i: i64) -> Self {
        self.case_index = Some(i);
        self
    }

    pub fn with_place(mut self, i: i64) -> Self {
        self.place_index = Some(i);
        self
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum EvalError {
    #[error("parameter `{0}` is not bound by the assignment")]
    UnboundParameter(String),
    #[error("parameter `{name}` is declared {expected} but bound to a value of sort {found}")]
    WrongSort { name: String, expected: Sort, found: Sort },
    #[error("index {index} out of range for a sequence of length {len}")]
    IndexOutOfRange { index: i64, len: usize },
    #[error("{0} used where no index is available")]
    MissingContext(Placeholder),
    #[error("division by zero")]
    DivisionByZero,
    #[error("integer overflow")]
    Overflow,
    #[error("operator `{op}` applied to ill-sorted values")]
    IllSorted { op: String },
    #[error("{0}")]
    Invalid(String),
}

impl EvalError {
    /// Short stable name of the failure, used in reports.
    pub fn kind(&self) -> &'static str {
        match self {
            EvalError::UnboundParameter(_) => "UnboundParameter",
            EvalError::WrongSort { .. } => "WrongSort",
            EvalError::IndexOutOfRange { .. } => "IndexOutOfRange",
            EvalError::MissingContext(_) => "MissingContext",
            EvalError::DivisionByZero => "DivisionByZero",
            EvalError::Overflow => "Overflow",
            EvalError::IllSorted { .. } => "IllSorted",
            EvalError::Invalid(_) => "Invalid",
        }
    }
}

/// Evaluates a term. Terms are assumed to pass [`super::infer_sort`]; ill-sorted
/// input is reported as [`EvalError::IllSorted`] rather than panicking.
pub fn eval(term: &Term, assignment: &Assignment, ctx: EvalContext) -> Result<Value, EvalError> {
    match term {
        Term::Int(v) => Ok(Value::Int(*v)),
        Term::Real(v) => Ok(Value::Real(*v)),
        Term::Bool(v) => Ok(Value::Bool(*v)),
        Term::Param(name) => assignment
            .get(name)
            .cloned()
            .ok_or_else(|| EvalError::UnboundParameter(name.clone())),
        Term::Placeholder(p) => {
            let v = match p {
                Placeholder::Case => ctx.case_index,
                Placeholder::Place => ctx.place_index,
            };
            v.map(Value::Int).ok_or(EvalError::MissingContext(*p))
        }
        Term::SetLiteral(items) => {
            let vals = items
                .iter()
                .map(|t| eval(t, assignment, ctx))
                .collect::<Result<Vec<_>, _>>()?;
            if vals.iter().any(|v| matches!(v, Value::Real(_))) {
                vals.iter()
                    .map(|v| v.as_real().ok_or_else(|| ill("{..}")))
                    .collect::<Result<Vec<_>, _>>()
                    .map(Value::RealSeq)
            } else {
                vals.iter()
                    .map(|v| v.as_int().ok_or_else(|| ill("{..}")))
                    .collect::<Result<Vec<_>, _>>()
                    .map(Value::IntSeq)
            }
        }
        Term::Unary(op, t) => {
            let v = eval(t, assignment, ctx)?;
            eval_unary(*op, v)
        }
        Term::Binary(BinaryOp::And, l, r) => {
            // short-circuit so guards like `i <= |s| and s[i] > 0` are safe
            if !bool_of(eval(l, assignment, ctx)?, "and")? {
                return Ok(Value::Bool(false));
            }
            Ok(Value::Bool(bool_of(eval(r, assignment, ctx)?, "and")?))
        }
        Term::Binary(BinaryOp::Or, l, r) => {
            if bool_of(eval(l, assignment, ctx)?, "or")? {
                return Ok(Value::Bool(true));
            }
            Ok(Value::Bool(bool_of(eval(r, assignment, ctx)?, "or")?))
        }
        Term::Binary(op, l, r) => {
            let lv = eval(l, assignment, ctx)?;
            let rv = eval(r, assignment, ctx)?;
            eval_binary(*op, lv, rv)
        }
    }
}

fn ill(op: &str) -> EvalError {
    EvalError::IllSorted { op: op.to_string() }
}

fn bool_of(v: Value, op: &str) -> Result<bool, EvalError> {
    v.as_bool().ok_or_else(|| ill(op))
}

fn eval_unary(op: UnaryOp, v: Value) -> Result<Value, EvalError> {
    Ok(match (op, v) {
        (UnaryOp::Neg, Value::Int(x)) => Value::Int(x.checked_neg().ok_or(EvalError::Overflow)?),
        (UnaryOp::Neg, Value::Real(x)) => Value::Real(-x),
        (UnaryOp::Not, Value::Bool(b)) => Value::Bool(!b),
        (UnaryOp::Size, Value::IntSeq(s)) => Value::Int(s.len() as i64),
        (UnaryOp::Size, Value::RealSeq(s)) => Value::Int(s.len() as i64),
        (UnaryOp::ToReal, Value::Int(x)) => Value::Real(x as f64),
        (UnaryOp::BoolToInt, Value::Bool(b)) => Value::Int(b as i64),
        (op, _) => return Err(ill(super::sort::unary_name(op))),
    })
}

fn floor_div(a: i64, b: i64) -> Result<i64, EvalError> {
    if b == 0 {
        return Err(EvalError::DivisionByZero);
    }
    let q = a.checked_div(b).ok_or(EvalError::Overflow)?;
    if a % b != 0 && ((a < 0) != (b < 0)) {
        Ok(q - 1)
    } else {
        Ok(q)
    }
}

fn element_at<T: Copy>(seq: &[T], index: i64) -> Result<T, EvalError> {
    if index < 1 || index as u64 > seq.len() as u64 {
        return Err(EvalError::IndexOutOfRange { index, len: seq.len() });
    }
    Ok(seq[(index - 1) as usize])
}

fn eval_binary(op: BinaryOp, l: Value, r: Value) -> Result<Value, EvalError> {
    use BinaryOp as B;
    use Value as V;
    let overflow = || EvalError::Overflow;
    Ok(match (op, l, r) {
        (B::Add, V::Int(a), V::Int(b)) => V::Int(a.checked_add(b).ok_or_else(overflow)?),
        (B::Sub, V::Int(a), V::Int(b)) => V::Int(a.checked_sub(b).ok_or_else(overflow)?),
        (B::Mul, V::Int(a), V::Int(b)) => V::Int(a.checked_mul(b).ok_or_else(overflow)?),
        (B::IntDiv, V::Int(a), V::Int(b)) => V::Int(floor_div(a, b)?),
        (B::Mod, V::Int(a), V::Int(b)) => {
            let q = floor_div(a, b)?;
            V::Int(a - b * q)
        }
        (B::Add, V::Real(a), V::Real(b)) => V::Real(a + b),
        (B::Sub, V::Real(a), V::Real(b)) => V::Real(a - b),
        (B::Mul, V::Real(a), V::Real(b)) => V::Real(a * b),
        (B::Div, V::Real(a), V::Real(b)) => {
            if b == 0.0 {
                return Err(EvalError::DivisionByZero);
            }
            V::Real(a / b)
        }
        (B::Eq, a, b) if a.sort() == b.sort() => V::Bool(a == b),
        (B::Ne, a, b) if a.sort() == b.sort() => V::Bool(a != b),
        (B::Lt, V::Int(a), V::Int(b)) => V::Bool(a < b),
        (B::Le, V::Int(a), V::Int(b)) => V::Bool(a <= b),
        (B::Gt, V::Int(a), V::Int(b)) => V::Bool(a > b),
        (B::Ge, V::Int(a), V::Int(b)) => V::Bool(a >= b),
        (B::Lt, V::Real(a), V::Real(b)) => V::Bool(a < b),
        (B::Le, V::Real(a), V::Real(b)) => V::Bool(a <= b),
        (B::Gt, V::Real(a), V::Real(b)) => V::Bool(a > b),
        (B::Ge, V::Real(a), V::Real(b)) => V::Bool(a >= b),
        (B::Union, V::IntSeq(mut a), V::IntSeq(b)) => {
            a.extend(b);
            a.sort_unstable();
            a.dedup();
            V::IntSeq(a)
        }
        (B::Union, V::RealSeq(mut a), V::RealSeq(b)) => {
            a.extend(b);
            a.sort_by(f64::total_cmp);
            a.dedup();
            V::RealSeq(a)
        }
        (B::Index, V::IntSeq(s), V::Int(i)) => V::Int(element_at(&s, i)?),
        (B::Index, V::RealSeq(s), V::Int(i)) => V::Real(element_at(&s, i)?),
        (B::Member, V::Int(x), V::IntSeq(s)) => V::Bool(s.contains(&x)),
        (B::Member, V::Real(x), V::RealSeq(s)) => V::Bool(s.contains(&x)),
        (op, _, _) => return Err(ill(op.symbol())),
    })
}
