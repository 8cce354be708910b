//! Direct execution of gate templates on template markings.
//!
//! This evaluates `ẽ` and `f̃` on a [`TemplateMarking`] without building a
//! concrete SAN. Projecting its result must agree with firing the concrete
//! instance, which makes it a useful cross-check of concretization.

use std::collections::BTreeMap;

use super::{case_count, eval_bool, eval_int, index_set, ConcretizeError};
use crate::template::{Action, GateFunction, GatePredicate, MarkingTemplateFn, Quantifier, SanTemplate, Selector, TemplateMarking};
use crate::terms::{Assignment, EvalContext, Term};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum TemplateFireError {
    #[error("activity `{0}` does not exist")]
    UnknownActivity(String),
    #[error("activity `{0}` is not enabled")]
    NotEnabled(String),
    #[error("activity `{activity}` has no case {case}")]
    CaseOutOfRange { activity: String, case: usize },
    #[error("gate `{gate}` would leave `{place}` index {index} with {value} tokens")]
    NegativeMarking { gate: String, place: String, index: i64, value: i128 },
    #[error(transparent)]
    Concretize(#[from] ConcretizeError),
}

struct State<'a> {
    xi: &'a Assignment,
    /// Expanded indices and current tokens, per place template.
    places: BTreeMap<&'a str, (Vec<i64>, BTreeMap<i64, u64>)>,
}

impl<'a> State<'a> {
    fn new(t: &'a SanTemplate, xi: &'a Assignment, mu: &TemplateMarking) -> Result<Self, ConcretizeError> {
        let mut places = BTreeMap::new();
        for pt in &t.places {
            let idx = index_set(pt, xi)?;
            let f = mu.get(&pt.name).ok_or_else(|| crate::template::MarkingError::Missing(pt.name.clone()))?;
            let mut tokens = BTreeMap::new();
            for &i in &idx {
                tokens.insert(i, f.tokens_at(&pt.name, i, xi)?);
            }
            places.insert(pt.name.as_str(), (idx, tokens));
        }
        Ok(State { xi, places })
    }

    fn indices(&self, place: &str) -> &[i64] {
        self.places.get(place).map_or(&[], |(idx, _)| idx.as_slice())
    }

    fn tokens(&self, place: &str, index: i64) -> i64 {
        i64::try_from(self.places[place].1[&index]).unwrap_or(i64::MAX)
    }

    fn at_index(&self, gate: &str, place: &str, t: &Term, ctx: EvalContext) -> Result<Option<i64>, ConcretizeError> {
        if self.indices(place).is_empty() {
            return Err(ConcretizeError::EmptyAtIndex { gate: gate.to_string(), place: place.to_string() });
        }
        let i = eval_int(gate, t, self.xi, ctx)?;
        Ok(self.indices(place).contains(&i).then_some(i))
    }

    fn holds(&self, gate: &str, p: &GatePredicate) -> Result<bool, ConcretizeError> {
        Ok(match p {
            GatePredicate::True => true,
            GatePredicate::False => false,
            GatePredicate::Atom { quantifier, place, cmp, value } => {
                let test = |i: i64| -> Result<bool, ConcretizeError> {
                    let v = eval_int(gate, value, self.xi, EvalContext::place(i))?;
                    Ok(cmp.holds(self.tokens(place, i), v))
                };
                match quantifier {
                    Quantifier::ForAll => {
                        let mut all = true;
                        for &i in self.indices(place) {
                            all &= test(i)?;
                        }
                        all
                    }
                    Quantifier::Exists => {
                        let mut any = false;
                        for &i in self.indices(place) {
                            any |= test(i)?;
                        }
                        any
                    }
                    Quantifier::AtIndex(t) => match self.at_index(gate, place, t, EvalContext::NONE)? {
                        Some(i) => test(i)?,
                        None => false,
                    },
                }
            }
            GatePredicate::And(ps) => {
                let mut all = true;
                for p in ps {
                    all &= self.holds(gate, p)?;
                }
                all
            }
            GatePredicate::Or(ps) => {
                let mut any = false;
                for p in ps {
                    any |= self.holds(gate, p)?;
                }
                any
            }
            GatePredicate::Not(p) => !self.holds(gate, p)?,
        })
    }

    fn apply(&mut self, gate: &str, f: &GateFunction, case: Option<i64>) -> Result<(), TemplateFireError> {
        let base = EvalContext { case_index: case, place_index: None };
        for rule in &f.rules {
            let place = rule.place.as_str();
            let targets: Vec<i64> = match &rule.selector {
                Selector::All | Selector::WhereSatisfied { .. } => self.indices(place).to_vec(),
                Selector::AtIndex(t) => self.at_index(gate, place, t, base)?.into_iter().collect(),
            };
            for i in targets {
                let ctx = base.with_place(i);
                if let Some(g) = &rule.guard {
                    if !eval_bool(gate, g, self.xi, ctx)? {
                        continue;
                    }
                }
                if let Selector::WhereSatisfied { cmp, value } = &rule.selector {
                    let v = eval_int(gate, value, self.xi, ctx)?;
                    if !cmp.holds(self.tokens(place, i), v) {
                        continue;
                    }
                }
                let amount = i128::from(eval_int(gate, rule.action.term(), self.xi, ctx)?);
                let cur = i128::from(self.places[place].1[&i]);
                let next = match rule.action {
                    Action::SetTo(_) => amount,
                    Action::Add(_) => cur + amount,
                    Action::Sub(_) => cur - amount,
                };
                let next = u64::try_from(next).map_err(|_| TemplateFireError::NegativeMarking {
                    gate: gate.to_string(),
                    place: place.to_string(),
                    index: i,
                    value: next,
                })?;
                self.places.get_mut(place).expect("known place").1.insert(i, next);
            }
        }
        Ok(())
    }

    fn into_marking(self) -> TemplateMarking {
        let mut out = TemplateMarking::new();
        for (place, (_, tokens)) in self.places {
            let table = tokens.into_iter().filter(|(_, v)| *v != 0).collect();
            out.set(place, MarkingTemplateFn::Table(table));
        }
        out
    }
}

/// `ẽ` of every input gate template of `activity`, evaluated on `mu`.
pub fn template_enabled(
    t: &SanTemplate,
    xi: &Assignment,
    mu: &TemplateMarking,
    activity: &str,
) -> Result<bool, TemplateFireError> {
    if t.activity(activity).is_none() {
        return Err(TemplateFireError::UnknownActivity(activity.to_string()));
    }
    let state = State::new(t, xi, mu)?;
    for g in t.input_gates_of(activity) {
        if !state.holds(&g.name, &g.predicate)? {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Fires `activity` with `case` directly on the template marking: input
/// gate functions first, then output gate functions with `<CASE>` bound to
/// `case`, each group in declaration order.
pub fn fire_template(
    t: &SanTemplate,
    xi: &Assignment,
    mu: &TemplateMarking,
    activity: &str,
    case: usize,
) -> Result<TemplateMarking, TemplateFireError> {
    let a = t.activity(activity).ok_or_else(|| TemplateFireError::UnknownActivity(activity.to_string()))?;
    let cases = case_count(a, xi)?;
    if case == 0 || case > cases {
        return Err(TemplateFireError::CaseOutOfRange { activity: activity.to_string(), case });
    }
    let mut state = State::new(t, xi, mu)?;
    for g in t.input_gates_of(activity) {
        if !state.holds(&g.name, &g.predicate)? {
            return Err(TemplateFireError::NotEnabled(activity.to_string()));
        }
    }
    for g in t.input_gates_of(activity) {
        state.apply(&g.name, &g.function, None)?;
    }
    for g in t.output_gates_of(activity) {
        state.apply(&g.name, &g.function, Some(case as i64))?;
    }
    Ok(state.into_marking())
}
