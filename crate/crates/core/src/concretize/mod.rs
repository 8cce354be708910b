//! Instantiation of a SAN template under a parameter assignment.
//!
//! Every place template expands into one concrete place per index of its
//! multiplicity (`Req` with `s = {1, 6, 7}` gives `Req_1`, `Req_6`, `Req_7`),
//! every input gate template into one input gate, and every output gate
//! template into one output gate per case of its activity.

mod interp;

use std::collections::BTreeMap;

use crate::diag::{has_errors, Diagnostic, DiagnosticKind as K};
use crate::san::{
    validate_san, Activity, ConcreteSan, Distribution, InputGate, Marking, OutputGate, Place, Predicate, Update,
    UpdateKind,
};
use crate::template::{
    validate_template, Action, ActivityTemplate, DistributionSpec, GateFunction, GatePredicate, InputGateTemplate,
    MarkingError, OutputGateTemplate, PlaceTemplate, Quantifier, SanTemplate, Selector, TemplateMarking,
};
use crate::terms::{eval, Assignment, EvalContext, EvalError, Term, Value};

pub use interp::{fire_template, template_enabled, TemplateFireError};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ConcretizeError {
    #[error("assignment: {0}")]
    Assignment(EvalError),
    #[error("`{element}`: {source}")]
    Eval { element: String, source: EvalError },
    #[error(transparent)]
    Marking(#[from] MarkingError),
    #[error("multiplicity of `{place}` {reason}")]
    InvalidIndexSet { place: String, reason: String },
    #[error("activity `{activity}` has {value} cases; at least one is required")]
    InvalidCaseCount { activity: String, value: i64 },
    #[error("gate `{gate}` selects an index of `{place}`, which has no instances")]
    EmptyAtIndex { gate: String, place: String },
    #[error("template is invalid ({} error(s))", count_errors(.0))]
    InvalidTemplate(Vec<Diagnostic>),
    #[error("instance is invalid ({} error(s))", count_errors(.0))]
    InvalidInstance(Vec<Diagnostic>),
}

fn count_errors(d: &[Diagnostic]) -> usize {
    d.iter().filter(|d| d.is_error()).count()
}

impl ConcretizeError {
    /// Diagnostics carried by validation failures.
    pub fn diagnostics(&self) -> &[Diagnostic] {
        match self {
            ConcretizeError::InvalidTemplate(d) | ConcretizeError::InvalidInstance(d) => d,
            _ => &[],
        }
    }
}

/// A concrete SAN together with the warnings produced while building it.
#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    pub san: ConcreteSan,
    pub warnings: Vec<Diagnostic>,
}

/// Maps `(place template, index)` pairs to concrete place ids and back.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct PlaceIndexMap {
    /// Template name, expanded indices, id of the first concrete place.
    entries: Vec<(String, Vec<i64>, usize)>,
    inverse: Vec<(usize, i64)>,
}

impl PlaceIndexMap {
    fn push(&mut self, template: &str, indices: Vec<i64>) {
        let first = self.inverse.len();
        let slot = self.entries.len();
        self.inverse.extend(indices.iter().map(|&i| (slot, i)));
        self.entries.push((template.to_string(), indices, first));
    }

    /// Rebuilds the map from the places of a concrete SAN.
    pub fn from_san(san: &ConcreteSan) -> Self {
        let mut grouped: Vec<(String, Vec<i64>)> = Vec::new();
        for p in &san.places {
            match grouped.last_mut() {
                Some((t, idx)) if *t == p.template => idx.push(p.index),
                _ => grouped.push((p.template.clone(), vec![p.index])),
            }
        }
        let mut map = PlaceIndexMap::default();
        for (t, idx) in grouped {
            map.push(&t, idx);
        }
        map
    }

    /// `Π(p̃, i)`: the concrete place for the `i`-th (1-based) index of `template`.
    pub fn forward(&self, template: &str, ordinal: usize) -> Option<usize> {
        let (_, idx, first) = self.entries.iter().find(|(t, _, _)| t == template)?;
        (ordinal >= 1 && ordinal <= idx.len()).then(|| first + ordinal - 1)
    }

    /// The concrete place holding index `index` of `template`.
    pub fn lookup(&self, template: &str, index: i64) -> Option<usize> {
        let (_, idx, first) = self.entries.iter().find(|(t, _, _)| t == template)?;
        idx.iter().position(|&i| i == index).map(|o| first + o)
    }

    /// `(template, index)` of a concrete place.
    pub fn inverse(&self, place: usize) -> Option<(&str, i64)> {
        let (slot, index) = *self.inverse.get(place)?;
        Some((self.entries[slot].0.as_str(), index))
    }

    pub fn indices(&self, template: &str) -> &[i64] {
        self.entries.iter().find(|(t, _, _)| t == template).map_or(&[], |(_, idx, _)| idx.as_slice())
    }

    pub fn templates(&self) -> impl Iterator<Item = &str> {
        self.entries.iter().map(|(t, _, _)| t.as_str())
    }

    pub fn len(&self) -> usize {
        self.inverse.len()
    }

    pub fn is_empty(&self) -> bool {
        self.inverse.is_empty()
    }
}

/// Concrete place name for index `index` of template `template`.
pub fn place_name(template: &str, index: i64) -> String {
    format!("{template}_{index}")
}

fn eval_at(element: &str, t: &Term, xi: &Assignment, ctx: EvalContext) -> Result<Value, ConcretizeError> {
    eval(t, xi, ctx).map_err(|source| ConcretizeError::Eval { element: element.to_string(), source })
}

fn wrong_sort(element: &str, t: &Term, v: &Value, want: &str) -> ConcretizeError {
    ConcretizeError::Eval {
        element: element.to_string(),
        source: EvalError::Invalid(format!("`{t}` evaluated to {v}, expected {want}")),
    }
}

pub(crate) fn eval_int(element: &str, t: &Term, xi: &Assignment, ctx: EvalContext) -> Result<i64, ConcretizeError> {
    let v = eval_at(element, t, xi, ctx)?;
    v.as_int().ok_or_else(|| wrong_sort(element, t, &v, "Int"))
}

pub(crate) fn eval_real(element: &str, t: &Term, xi: &Assignment, ctx: EvalContext) -> Result<f64, ConcretizeError> {
    let v = eval_at(element, t, xi, ctx)?;
    v.as_real().ok_or_else(|| wrong_sort(element, t, &v, "Real"))
}

pub(crate) fn eval_bool(element: &str, t: &Term, xi: &Assignment, ctx: EvalContext) -> Result<bool, ConcretizeError> {
    let v = eval_at(element, t, xi, ctx)?;
    v.as_bool().ok_or_else(|| wrong_sort(element, t, &v, "Bool"))
}

/// The index set of a place template: distinct, strictly positive integers
/// in the order produced by the multiplicity term.
pub fn index_set(pt: &PlaceTemplate, xi: &Assignment) -> Result<Vec<i64>, ConcretizeError> {
    let v = eval_at(&pt.name, &pt.multiplicity, xi, EvalContext::NONE)?;
    let Value::IntSeq(indices) = v else {
        return Err(wrong_sort(&pt.name, &pt.multiplicity, &v, "OrderedSet<Int>"));
    };
    let mut seen = std::collections::HashSet::new();
    for &i in &indices {
        if i <= 0 {
            return Err(ConcretizeError::InvalidIndexSet {
                place: pt.name.clone(),
                reason: format!("contains non-positive index {i}"),
            });
        }
        if !seen.insert(i) {
            return Err(ConcretizeError::InvalidIndexSet {
                place: pt.name.clone(),
                reason: format!("contains duplicate index {i}"),
            });
        }
    }
    Ok(indices)
}

/// One concrete place per index, named `<template>_<index>`.
pub fn expand_place(pt: &PlaceTemplate, xi: &Assignment) -> Result<Vec<Place>, ConcretizeError> {
    Ok(index_set(pt, xi)?
        .into_iter()
        .map(|i| Place { name: place_name(&pt.name, i), template: pt.name.clone(), index: i })
        .collect())
}

/// Builds the index map for all place templates of `t`.
pub fn index_map(t: &SanTemplate, xi: &Assignment) -> Result<PlaceIndexMap, ConcretizeError> {
    let mut map = PlaceIndexMap::default();
    for pt in &t.places {
        map.push(&pt.name, index_set(pt, xi)?);
    }
    Ok(map)
}

/// `Γ`: evaluates each place's marking function at the place's index.
pub fn project_marking(mu: &TemplateMarking, map: &PlaceIndexMap, xi: &Assignment) -> Result<Marking, ConcretizeError> {
    let mut out = Vec::with_capacity(map.len());
    for id in 0..map.len() {
        let (template, index) = map.inverse(id).expect("id in range");
        let f = mu.get(template).ok_or_else(|| MarkingError::Missing(template.to_string()))?;
        out.push(f.tokens_at(template, index, xi)?);
    }
    Ok(Marking(out))
}

/// `Γ⁻¹`: one table per place template, zero outside the expanded indices.
pub fn lift_marking(m: &Marking, map: &PlaceIndexMap) -> TemplateMarking {
    let mut out = TemplateMarking::new();
    for template in map.templates() {
        let table: BTreeMap<i64, u64> = map
            .indices(template)
            .iter()
            .map(|&i| (i, m.0[map.lookup(template, i).expect("expanded index")]))
            .filter(|(_, v)| *v != 0)
            .collect();
        out.set(template, crate::template::MarkingTemplateFn::Table(table));
    }
    out
}

struct GateBuilder<'a> {
    xi: &'a Assignment,
    map: &'a PlaceIndexMap,
    gate: &'a str,
    case: Option<i64>,
    warnings: &'a mut Vec<Diagnostic>,
}

impl GateBuilder<'_> {
    fn ctx(&self) -> EvalContext {
        EvalContext { case_index: self.case, place_index: None }
    }

    fn id(&self, place: &str, index: i64) -> usize {
        self.map.lookup(place, index).expect("index from the same map")
    }

    /// Resolves an `AtIndex` term; `None` if the index is outside the expansion.
    fn at_index(&mut self, place: &str, t: &Term) -> Result<Option<i64>, ConcretizeError> {
        let indices = self.map.indices(place);
        if indices.is_empty() {
            return Err(ConcretizeError::EmptyAtIndex { gate: self.gate.to_string(), place: place.to_string() });
        }
        let i = eval_int(self.gate, t, self.xi, self.ctx())?;
        if indices.contains(&i) {
            Ok(Some(i))
        } else {
            self.warnings.push(Diagnostic::warning(
                K::IndexOutsideDomain,
                self.gate,
                format!("index {i} is not an index of `{place}` {indices:?}"),
            ));
            Ok(None)
        }
    }

    fn predicate(&mut self, p: &GatePredicate) -> Result<Predicate, ConcretizeError> {
        Ok(match p {
            GatePredicate::True => Predicate::True,
            GatePredicate::False => Predicate::False,
            GatePredicate::Atom { quantifier, place, cmp, value } => {
                let atom = |s: &Self, i: i64| -> Result<Predicate, ConcretizeError> {
                    let v = eval_int(s.gate, value, s.xi, s.ctx().with_place(i))?;
                    Ok(Predicate::Cmp { place: s.id(place, i), cmp: *cmp, value: v })
                };
                match quantifier {
                    Quantifier::ForAll | Quantifier::Exists => {
                        let mut parts = Vec::new();
                        for &i in self.map.indices(place) {
                            parts.push(atom(self, i)?);
                        }
                        if matches!(quantifier, Quantifier::ForAll) {
                            Predicate::And(parts)
                        } else {
                            Predicate::Or(parts)
                        }
                    }
                    Quantifier::AtIndex(t) => match self.at_index(place, t)? {
                        Some(i) => atom(self, i)?,
                        None => Predicate::False,
                    },
                }
            }
            GatePredicate::And(ps) => Predicate::And(ps.iter().map(|p| self.predicate(p)).collect::<Result<_, _>>()?),
            GatePredicate::Or(ps) => Predicate::Or(ps.iter().map(|p| self.predicate(p)).collect::<Result<_, _>>()?),
            GatePredicate::Not(p) => Predicate::Not(Box::new(self.predicate(p)?)),
        })
    }

    fn function(&mut self, f: &GateFunction) -> Result<Vec<Update>, ConcretizeError> {
        let mut out = Vec::new();
        for rule in &f.rules {
            let place = rule.place.as_str();
            let selected: Vec<i64> = match &rule.selector {
                Selector::All | Selector::WhereSatisfied { .. } => self.map.indices(place).to_vec(),
                Selector::AtIndex(t) => self.at_index(place, t)?.into_iter().collect(),
            };
            let kind = match rule.action {
                Action::SetTo(_) => UpdateKind::Set,
                Action::Add(_) => UpdateKind::Add,
                Action::Sub(_) => UpdateKind::Sub,
            };
            for i in selected {
                let ctx = self.ctx().with_place(i);
                if let Some(g) = &rule.guard {
                    if !eval_bool(self.gate, g, self.xi, ctx)? {
                        continue;
                    }
                }
                let condition = match &rule.selector {
                    Selector::WhereSatisfied { cmp, value } => Some((*cmp, eval_int(self.gate, value, self.xi, ctx)?)),
                    _ => None,
                };
                let amount = eval_int(self.gate, rule.action.term(), self.xi, ctx)?;
                out.push(Update { place: self.id(place, i), kind, amount, condition });
            }
        }
        Ok(out)
    }
}

fn gate_places(places: &[String], map: &PlaceIndexMap) -> Vec<usize> {
    places
        .iter()
        .flat_map(|p| map.indices(p).iter().map(move |&i| map.lookup(p, i).expect("expanded index")))
        .collect()
}

/// `α`: the concrete input gate of an input gate template.
pub fn concretize_input_gate(
    g: &InputGateTemplate,
    activity: usize,
    xi: &Assignment,
    map: &PlaceIndexMap,
    warnings: &mut Vec<Diagnostic>,
) -> Result<InputGate, ConcretizeError> {
    let mut b = GateBuilder { xi, map, gate: &g.name, case: None, warnings };
    let predicate = b.predicate(&g.predicate)?;
    let updates = b.function(&g.function)?;
    Ok(InputGate { name: g.name.clone(), activity, places: gate_places(&g.places, map), predicate, updates })
}

/// `β`: the concrete output gate of `g` for case `case` (1-based).
pub fn concretize_output_gate(
    g: &OutputGateTemplate,
    name: String,
    activity: usize,
    case: usize,
    xi: &Assignment,
    map: &PlaceIndexMap,
    warnings: &mut Vec<Diagnostic>,
) -> Result<OutputGate, ConcretizeError> {
    let mut b = GateBuilder { xi, map, gate: &g.name, case: Some(case as i64), warnings };
    let updates = b.function(&g.function)?;
    Ok(OutputGate { name, activity, case, places: gate_places(&g.places, map), updates })
}

/// Number of cases of an activity template under `xi`.
pub fn case_count(a: &ActivityTemplate, xi: &Assignment) -> Result<usize, ConcretizeError> {
    let n = eval_int(&a.name, &a.cases, xi, EvalContext::NONE)?;
    usize::try_from(n)
        .ok()
        .filter(|n| *n >= 1)
        .ok_or(ConcretizeError::InvalidCaseCount { activity: a.name.clone(), value: n })
}

/// Probability of case `case` under the first matching entry, zero if none match.
pub fn case_probability(a: &ActivityTemplate, case: usize, xi: &Assignment) -> Result<f64, ConcretizeError> {
    let ctx = EvalContext::case(case as i64);
    for e in &a.case_distribution.entries {
        if eval_bool(&a.name, &e.guard, xi, ctx)? {
            return eval_real(&a.name, &e.probability, xi, ctx);
        }
    }
    Ok(0.0)
}

fn distribution(a: &ActivityTemplate, spec: &DistributionSpec, xi: &Assignment) -> Result<Distribution, ConcretizeError> {
    let r = |t: &Term| eval_real(&a.name, t, xi, EvalContext::NONE);
    Ok(match spec {
        DistributionSpec::Exponential { rate } => Distribution::Exponential { rate: r(rate)? },
        DistributionSpec::Uniform { low, high } => Distribution::Uniform { low: r(low)?, high: r(high)? },
        DistributionSpec::Deterministic { delay } => Distribution::Deterministic { delay: r(delay)? },
    })
}

/// Output gates of activities with a variable number of cases, or more than
/// one case, are named `<gate>_<case>`; others keep the template name.
pub fn output_gate_name(gate: &str, activity: &ActivityTemplate, cases: usize, case: usize) -> String {
    if cases > 1 || activity.has_variable_cases() {
        format!("{gate}_{case}")
    } else {
        gate.to_string()
    }
}

/// Instantiates `t` under `xi` and validates the result.
pub fn concretize(t: &SanTemplate, xi: &Assignment) -> Result<Instance, ConcretizeError> {
    let mut diags = validate_template(t);
    if has_errors(&diags) {
        return Err(ConcretizeError::InvalidTemplate(diags));
    }
    xi.check_against(&t.parameters).map_err(ConcretizeError::Assignment)?;

    let mut places = Vec::new();
    for pt in &t.places {
        places.extend(expand_place(pt, xi)?);
    }
    let map = index_map(t, xi)?;

    let mut activities = Vec::new();
    for a in &t.activities {
        let cases = case_count(a, xi)?;
        let case_probs = (1..=cases).map(|c| case_probability(a, c, xi)).collect::<Result<Vec<_>, _>>()?;
        // Cases beyond the count must carry no probability; a bounded window is checked.
        let window = 2 * cases + a.case_distribution.entries.len() + 1;
        for c in cases + 1..=window {
            match case_probability(a, c, xi) {
                Ok(p) if p != 0.0 => diags.push(Diagnostic::error(
                    K::CaseOutOfRange,
                    &a.name,
                    format!("case {c} has probability {p} but the activity has {cases} cases"),
                )),
                Ok(_) => {}
                Err(e) => diags.push(Diagnostic::error(K::EvalError, &a.name, format!("case {c}: {e}"))),
            }
        }
        let time = a.time.as_ref().map(|d| distribution(a, d, xi)).transpose()?;
        activities.push(Activity {
            name: a.name.clone(),
            kind: a.kind,
            cases,
            case_probs,
            time,
            reactivation: a.reactivation.clone(),
        });
    }
    let act_id = |name: &str| t.activities.iter().position(|a| a.name == name).expect("validated gate activity");

    let mut input_gates = Vec::new();
    for g in &t.input_gates {
        input_gates.push(concretize_input_gate(g, act_id(&g.activity), xi, &map, &mut diags)?);
    }
    let mut output_gates = Vec::new();
    for g in &t.output_gates {
        let a = act_id(&g.activity);
        let cases = activities[a].cases;
        for c in 1..=cases {
            let name = output_gate_name(&g.name, &t.activities[a], cases, c);
            output_gates.push(concretize_output_gate(g, name, a, c, xi, &map, &mut diags)?);
        }
    }
    let initial_marking = project_marking(&t.initial_marking, &map, xi)?;

    let san = ConcreteSan { name: t.name.clone(), places, activities, input_gates, output_gates, initial_marking };
    diags.extend(validate_san(&san));
    if has_errors(&diags) {
        return Err(ConcretizeError::InvalidInstance(diags));
    }
    Ok(Instance { san, warnings: diags })
}
