//! Arc-template labels.
//!
//! Output arcs carry labels such as `+3<PLACE>`, `s[<CASE>] -> +1` or
//! `1 -> +2 / 0`; input arcs carry `[exists = 1] 0`, `[k > 0] -1` or just
//! `-2`. An empty label means `+1` on output arcs and `-1` on input arcs.
//! Labels desugar into ordinary gate templates.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::lex::{Cursor, ParseError, Tok};
use crate::template::{
    Action, ActivityTemplate, Comparison, GateFunction, GateOrigin, GatePredicate, InputGateTemplate,
    OutputGateTemplate, PlaceTemplate, Quantifier, Selector, UpdateRule,
};
use crate::terms::{BinaryOp, Placeholder, Term, TermParser};

/// Right-hand side of an output label: assign or add.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum OutExpr {
    SetTo(Term),
    Add(Term),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum OutputArcSpec {
    Unconditional(OutExpr),
    Conditional { index: Term, then: OutExpr, otherwise: Option<OutExpr> },
}

/// Input function of an explicit input label.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum InFunc {
    SetTo(Term),
    Sub(Term),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum InputArcSpec {
    Explicit { quantifier: Quantifier, cmp: Comparison, value: Term, func: InFunc },
    /// `-n`: enabled when every instance holds at least `n`, removes `n` from each.
    ImplicitSub(Term),
}

impl Default for OutputArcSpec {
    fn default() -> Self {
        OutputArcSpec::Unconditional(OutExpr::Add(Term::Int(1)))
    }
}

impl Default for InputArcSpec {
    fn default() -> Self {
        InputArcSpec::ImplicitSub(Term::Int(1))
    }
}

pub fn parse_output_label(text: &str) -> Result<OutputArcSpec, ParseError> {
    let mut cur = Cursor::new(text)?;
    if cur.at_eof() {
        return Ok(OutputArcSpec::default());
    }
    let spec = if matches!(cur.peek(), Tok::Plus) {
        OutputArcSpec::Unconditional(out_expr(&mut cur)?)
    } else {
        let first = int_term(&mut cur, true)?;
        if cur.eat(&Tok::Arrow) {
            let then = out_expr(&mut cur)?;
            let otherwise = if cur.eat(&Tok::Slash) { Some(out_expr(&mut cur)?) } else { None };
            OutputArcSpec::Conditional { index: first, then, otherwise }
        } else {
            OutputArcSpec::Unconditional(OutExpr::SetTo(first))
        }
    };
    if !cur.at_eof() {
        let expected: &[&str] = match &spec {
            OutputArcSpec::Unconditional(OutExpr::SetTo(_)) => &["->", "<eof>"],
            OutputArcSpec::Conditional { otherwise: None, .. } => &["/", "<eof>"],
            _ => &["<eof>"],
        };
        return Err(ParseError::expected(cur.pos(), cur.peek(), expected));
    }
    Ok(spec)
}

pub fn parse_input_label(text: &str) -> Result<InputArcSpec, ParseError> {
    let mut cur = Cursor::new(text)?;
    if cur.at_eof() {
        return Ok(InputArcSpec::default());
    }
    let spec = match cur.peek() {
        Tok::Minus => {
            cur.bump();
            InputArcSpec::ImplicitSub(int_term(&mut cur, false)?)
        }
        Tok::LBracket => {
            cur.bump();
            let quantifier = if cur.eat_ident("forall") {
                Quantifier::ForAll
            } else if cur.eat_ident("exists") {
                Quantifier::Exists
            } else {
                Quantifier::AtIndex(int_term(&mut cur, false)?)
            };
            let cmp = match cur.peek() {
                Tok::Eq => Comparison::Eq,
                Tok::Gt => Comparison::Gt,
                Tok::Ge => Comparison::Ge,
                other => return Err(ParseError::expected(cur.pos(), other, &["=", ">", ">="])),
            };
            cur.bump();
            let value = int_term(&mut cur, false)?;
            cur.expect(&Tok::RBracket)?;
            let func = if cur.eat(&Tok::Minus) {
                InFunc::Sub(int_term(&mut cur, false)?)
            } else {
                InFunc::SetTo(int_term(&mut cur, false)?)
            };
            InputArcSpec::Explicit { quantifier, cmp, value, func }
        }
        other => return Err(ParseError::expected(cur.pos(), other, &["[", "-", "<eof>"])),
    };
    cur.expect_eof()?;
    Ok(spec)
}

fn out_expr(cur: &mut Cursor) -> Result<OutExpr, ParseError> {
    if cur.eat(&Tok::Plus) {
        Ok(OutExpr::Add(int_term(cur, true)?))
    } else {
        Ok(OutExpr::SetTo(int_term(cur, true)?))
    }
}

fn int_term(cur: &mut Cursor, case_allowed: bool) -> Result<Term, ParseError> {
    let pos = cur.pos();
    if cur.at_eof() {
        return Err(ParseError::expected(pos, cur.peek(), &["integer term"]));
    }
    let t = TermParser::label(cur).expr()?;
    if !case_allowed && t.uses_placeholder(Placeholder::Case) {
        return Err(ParseError::new(pos, "<CASE> cannot be used in an input arc label"));
    }
    Ok(t)
}

/// Wraps terms whose printed form would be read back differently in label position.
pub(crate) struct LabelTerm<'a>(pub(crate) &'a Term);

impl fmt::Display for LabelTerm<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = self.0.to_string();
        if s.starts_with('-') || needs_parens(self.0) {
            write!(f, "({s})")
        } else {
            f.write_str(&s)
        }
    }
}

/// Terms whose top-level operator lies outside the label sublanguage.
fn needs_parens(t: &Term) -> bool {
    use BinaryOp as B;
    match t {
        Term::Binary(op, _, _) => {
            matches!(op, B::Eq | B::Ne | B::Lt | B::Le | B::Gt | B::Ge | B::And | B::Or | B::Member | B::Div)
        }
        Term::Unary(crate::terms::UnaryOp::Not, _) => true,
        _ => false,
    }
}

impl fmt::Display for OutExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OutExpr::SetTo(t) => write!(f, "{}", LabelTerm(t)),
            OutExpr::Add(t) => write!(f, "+{}", LabelTerm(t)),
        }
    }
}

impl fmt::Display for OutputArcSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OutputArcSpec::Unconditional(o) => write!(f, "{o}"),
            OutputArcSpec::Conditional { index, then, otherwise } => {
                write!(f, "{} -> {then}", LabelTerm(index))?;
                if let Some(o) = otherwise {
                    write!(f, " / {o}")?;
                }
                Ok(())
            }
        }
    }
}

impl fmt::Display for InputArcSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            InputArcSpec::ImplicitSub(t) => write!(f, "-{}", LabelTerm(t)),
            InputArcSpec::Explicit { quantifier, cmp, value, func } => {
                f.write_str("[")?;
                match quantifier {
                    Quantifier::ForAll => f.write_str("forall")?,
                    Quantifier::Exists => f.write_str("exists")?,
                    Quantifier::AtIndex(i) => write!(f, "{}", LabelTerm(i))?,
                }
                write!(f, " {} {}] ", cmp.symbol(), LabelTerm(value))?;
                match func {
                    InFunc::SetTo(t) => write!(f, "{}", LabelTerm(t)),
                    InFunc::Sub(t) => write!(f, "-{}", LabelTerm(t)),
                }
            }
        }
    }
}

/// Default gate name for an arc from `src` to `dst`.
pub fn arc_gate_name(src: &str, dst: &str) -> String {
    format!("{src}to{dst}")
}

fn out_action(o: &OutExpr) -> Action {
    match o {
        OutExpr::SetTo(t) => Action::SetTo(t.clone()),
        OutExpr::Add(t) => Action::Add(t.clone()),
    }
}

/// Builds the output gate template equivalent to an output arc from
/// `activity` to `place`. Terms are not sort-checked here; template
/// validation reports ill-sorted labels.
pub fn desugar_output_arc(spec: &OutputArcSpec, place: &PlaceTemplate, activity: &ActivityTemplate) -> OutputGateTemplate {
    let p = &place.name;
    let rules = match spec {
        OutputArcSpec::Unconditional(o) => vec![UpdateRule::new(p, Selector::All, out_action(o))],
        OutputArcSpec::Conditional { index, then, otherwise } => {
            let mut rules = vec![UpdateRule::new(p, Selector::AtIndex(index.clone()), out_action(then))];
            if let Some(o) = otherwise {
                let others = Term::binary(BinaryOp::Ne, Term::place(), index.clone());
                rules.push(UpdateRule::new(p, Selector::All, out_action(o)).when(others));
            }
            rules
        }
    };
    OutputGateTemplate {
        name: arc_gate_name(&activity.name, p),
        activity: activity.name.clone(),
        places: vec![p.clone()],
        function: GateFunction::new(rules),
        origin: GateOrigin::Arc { place: p.clone(), label: spec.to_string() },
    }
}

/// Builds the input gate template equivalent to an input arc from `place`
/// to `activity`.
pub fn desugar_input_arc(spec: &InputArcSpec, place: &PlaceTemplate, activity: &ActivityTemplate) -> InputGateTemplate {
    let p = &place.name;
    let (predicate, rule) = match spec {
        InputArcSpec::ImplicitSub(n) => (
            GatePredicate::atom(Quantifier::ForAll, p, Comparison::Ge, n.clone()),
            UpdateRule::new(p, Selector::All, Action::Sub(n.clone())),
        ),
        InputArcSpec::Explicit { quantifier, cmp, value, func } => {
            let selector = match quantifier {
                Quantifier::ForAll => Selector::All,
                Quantifier::Exists => Selector::WhereSatisfied { cmp: *cmp, value: value.clone() },
                Quantifier::AtIndex(i) => Selector::AtIndex(i.clone()),
            };
            let action = match func {
                InFunc::SetTo(t) => Action::SetTo(t.clone()),
                InFunc::Sub(t) => Action::Sub(t.clone()),
            };
            (GatePredicate::atom(quantifier.clone(), p, *cmp, value.clone()), UpdateRule::new(p, selector, action))
        }
    };
    InputGateTemplate {
        name: arc_gate_name(p, &activity.name),
        activity: activity.name.clone(),
        places: vec![p.clone()],
        predicate,
        function: GateFunction::new(vec![rule]),
        origin: GateOrigin::Arc { place: p.clone(), label: spec.to_string() },
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn output_examples() {
        assert_eq!(
            parse_output_label("+3<PLACE>").unwrap(),
            OutputArcSpec::Unconditional(OutExpr::Add(Term::mul(Term::Int(3), Term::place())))
        );
        assert_eq!(
            parse_output_label("1 -> +2 / 0").unwrap(),
            OutputArcSpec::Conditional {
                index: Term::Int(1),
                then: OutExpr::Add(Term::Int(2)),
                otherwise: Some(OutExpr::SetTo(Term::Int(0))),
            }
        );
        assert_eq!(parse_output_label("").unwrap(), OutputArcSpec::Unconditional(OutExpr::Add(Term::Int(1))));
        assert_eq!(parse_output_label("  ").unwrap(), OutputArcSpec::default());
        assert_eq!(
            parse_output_label("s[⊙] → +1").unwrap(),
            OutputArcSpec::Conditional {
                index: Term::index(Term::param("s"), Term::case()),
                then: OutExpr::Add(Term::Int(1)),
                otherwise: None,
            }
        );
    }

    #[test]
    fn input_examples() {
        assert_eq!(
            parse_input_label("[exists = 1] 0").unwrap(),
            InputArcSpec::Explicit {
                quantifier: Quantifier::Exists,
                cmp: Comparison::Eq,
                value: Term::Int(1),
                func: InFunc::SetTo(Term::Int(0)),
            }
        );
        assert_eq!(parse_input_label("-2").unwrap(), InputArcSpec::ImplicitSub(Term::Int(2)));
        assert_eq!(parse_input_label("").unwrap(), InputArcSpec::ImplicitSub(Term::Int(1)));
        assert_eq!(
            parse_input_label("[k > 0] -1").unwrap(),
            InputArcSpec::Explicit {
                quantifier: Quantifier::AtIndex(Term::param("k")),
                cmp: Comparison::Gt,
                value: Term::Int(0),
                func: InFunc::Sub(Term::Int(1)),
            }
        );
        assert_eq!(
            parse_input_label("[∀ ≥ 2] -(1)").unwrap(),
            InputArcSpec::Explicit {
                quantifier: Quantifier::ForAll,
                cmp: Comparison::Ge,
                value: Term::Int(2),
                func: InFunc::Sub(Term::Int(1)),
            }
        );
    }

    #[test]
    fn rejects_with_position() {
        for bad in ["[exists 1] 0", "1 -> ", "+", "[forall = 1]", "1 -> +2 / 0 / 1", "-<CASE>", "[k < 1] 0", "2 3"] {
            let label = if bad.starts_with('[') || bad.starts_with("-<") { parse_input_label(bad).err() } else { parse_output_label(bad).err() };
            let err = label.unwrap_or_else(|| panic!("accepted {bad:?}"));
            assert!(err.pos.column >= 1, "{bad:?}: {err}");
        }
    }

    #[test]
    fn printing_round_trips() {
        for s in ["+3 * <PLACE>", "1 -> +2 / 0", "s[<CASE>] -> +1", "(-1)", "+-1", "k -> (-2) / +k"] {
            let spec = parse_output_label(s).unwrap();
            assert_eq!(parse_output_label(&spec.to_string()).unwrap(), spec, "{s}");
        }
        for s in ["-1", "[exists = 1] 0", "[k > 0] -1", "[forall >= 2] (-3)", "[2 * k = <PLACE>] --1"] {
            let spec = parse_input_label(s).unwrap();
            assert_eq!(parse_input_label(&spec.to_string()).unwrap(), spec, "{s}");
        }
    }

    #[test]
    fn desugared_names_and_rules() {
        let place = PlaceTemplate::new("Req", Term::param("s"));
        let act = ActivityTemplate::instantaneous("Request");
        let og = desugar_output_arc(&parse_output_label("1 -> +2 / 0").unwrap(), &place, &act);
        assert_eq!(og.name, "RequesttoReq");
        assert_eq!(og.function.rules.len(), 2);
        assert!(og.function.rules[1].guard.is_some());

        let ig = desugar_input_arc(&InputArcSpec::default(), &place, &act);
        assert_eq!(ig.name, "ReqtoRequest");
        assert_eq!(ig.predicate, GatePredicate::atom(Quantifier::ForAll, "Req", Comparison::Ge, Term::Int(1)));
    }
}
