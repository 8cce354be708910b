use std::collections::HashSet;

use super::{
    Action, ActivityKind, GatePredicate, MarkingTemplateFn, Quantifier, ReactivationSpec, SanTemplate, Selector,
    UpdateRule,
};
use crate::diag::{Diagnostic, DiagnosticKind as K};
use crate::terms::{infer_sort, is_keyword, ParamDecls, Placeholder, Sort, SortError, Term};

/// Static checks on a template. Never fails; all findings are returned.
pub fn validate_template(t: &SanTemplate) -> Vec<Diagnostic> {
    let mut v = Validator { params: &t.parameters, out: Vec::new() };
    v.names(t);
    for (name, _) in t.parameters.iter() {
        if is_keyword(name) {
            v.out.push(Diagnostic::error(K::DuplicateName, name, "parameter name is a reserved word"));
        }
    }

    for p in &t.places {
        v.term(&p.multiplicity, Sort::OrderedSetInt, Allowed::NONE, &p.name, "multiplicity");
    }

    for a in &t.activities {
        v.term(&a.cases, Sort::Int, Allowed::NONE, &a.name, "case count");
        match (a.kind, &a.time) {
            (ActivityKind::Timed, None) => v.out.push(Diagnostic::error(
                K::DistributionMismatch,
                &a.name,
                "timed activity has no time distribution",
            )),
            (ActivityKind::Instantaneous, Some(_)) => v.out.push(Diagnostic::error(
                K::DistributionMismatch,
                &a.name,
                "instantaneous activity must not have a time distribution",
            )),
            (_, Some(d)) => {
                for term in d.terms() {
                    v.term(term, Sort::Real, Allowed::NONE, &a.name, d.family());
                }
            }
            (ActivityKind::Instantaneous, None) => {}
        }
        for entry in &a.case_distribution.entries {
            v.term(&entry.guard, Sort::Bool, Allowed::CASE, &a.name, "case distribution guard");
            v.term(&entry.probability, Sort::Real, Allowed::CASE, &a.name, "case probability");
        }
        if let ReactivationSpec::Unsupported(desc) = &a.reactivation {
            v.out.push(Diagnostic::warning(
                K::UnsupportedReactivation,
                &a.name,
                format!("reactivation markings ({desc}) cannot be simulated"),
            ));
        }
    }

    let places: HashSet<&str> = t.places.iter().map(|p| p.name.as_str()).collect();
    let activities: HashSet<&str> = t.activities.iter().map(|a| a.name.as_str()).collect();

    for g in &t.input_gates {
        if !activities.contains(g.activity.as_str()) {
            v.out.push(Diagnostic::error(
                K::DanglingGate,
                &g.name,
                format!("input gate attached to unknown activity `{}`", g.activity),
            ));
        }
        v.gate_places(&g.name, &g.places, &places);
        v.predicate(&g.name, &g.predicate, &g.places);
        for rule in &g.function.rules {
            v.rule(&g.name, rule, &g.places, false);
        }
    }

    for g in &t.output_gates {
        if !activities.contains(g.activity.as_str()) {
            v.out.push(Diagnostic::error(
                K::DanglingGate,
                &g.name,
                format!("output gate attached to unknown activity `{}`", g.activity),
            ));
        }
        v.gate_places(&g.name, &g.places, &places);
        for rule in &g.function.rules {
            v.rule(&g.name, rule, &g.places, true);
        }
    }

    for p in &t.places {
        if t.initial_marking.get(&p.name).is_none() {
            v.out.push(Diagnostic::error(K::MissingInitialMarking, &p.name, "place has no initial marking"));
        }
    }
    for (place, f) in &t.initial_marking.map {
        if !places.contains(place.as_str()) {
            v.out.push(Diagnostic::error(K::UnknownPlace, place, "initial marking given for an unknown place"));
        }
        v.marking_fn(place, f);
    }

    v.out
}

#[derive(Clone, Copy)]
struct Allowed {
    case: bool,
    place: bool,
}

impl Allowed {
    const NONE: Allowed = Allowed { case: false, place: false };
    const CASE: Allowed = Allowed { case: true, place: false };
    const PLACE: Allowed = Allowed { case: false, place: true };
    const BOTH: Allowed = Allowed { case: true, place: true };
}

struct Validator<'a> {
    params: &'a ParamDecls,
    out: Vec<Diagnostic>,
}

impl Validator<'_> {
    fn names(&mut self, t: &SanTemplate) {
        let classes: [(&str, Vec<&str>); 4] = [
            ("place", t.places.iter().map(|p| p.name.as_str()).collect()),
            ("activity", t.activities.iter().map(|a| a.name.as_str()).collect()),
            ("input gate", t.input_gates.iter().map(|g| g.name.as_str()).collect()),
            ("output gate", t.output_gates.iter().map(|g| g.name.as_str()).collect()),
        ];
        for (class, names) in classes {
            let mut seen = HashSet::new();
            for n in names {
                if !seen.insert(n) {
                    self.out.push(Diagnostic::error(K::DuplicateName, n, format!("duplicate {class} name")));
                }
            }
        }
    }

    fn term(&mut self, term: &Term, expected: Sort, allowed: Allowed, element: &str, what: &str) {
        if !allowed.case && term.uses_placeholder(Placeholder::Case) {
            self.out.push(Diagnostic::error(
                K::PlaceholderMisuse,
                element,
                format!("<CASE> is not available in {what} `{term}`"),
            ));
        }
        if !allowed.place && term.uses_placeholder(Placeholder::Place) {
            self.out.push(Diagnostic::error(
                K::PlaceholderMisuse,
                element,
                format!("<PLACE> is not available in {what} `{term}`"),
            ));
        }
        match infer_sort(term, self.params) {
            Ok(s) if s == expected => {}
            Ok(s) => self.out.push(Diagnostic::error(
                K::SortMismatch,
                element,
                format!("{what} `{term}` has sort {s}, expected {expected}"),
            )),
            Err(SortError::UnknownParameter(p)) => self.out.push(Diagnostic::error(
                K::UnknownParameter,
                element,
                format!("{what} `{term}` refers to unknown parameter `{p}`"),
            )),
            Err(e) => self.out.push(Diagnostic::error(K::SortMismatch, element, format!("{what} `{term}`: {e}"))),
        }
    }

    fn gate_places(&mut self, gate: &str, gate_places: &[String], known: &HashSet<&str>) {
        for p in gate_places {
            if !known.contains(p.as_str()) {
                self.out.push(Diagnostic::error(K::UnknownPlace, gate, format!("gate references unknown place `{p}`")));
            }
        }
    }

    fn in_gate(&mut self, gate: &str, place: &str, gate_places: &[String]) {
        if !gate_places.iter().any(|p| p == place) {
            self.out.push(Diagnostic::error(
                K::PlaceOutsideGate,
                gate,
                format!("place `{place}` is not in the gate's place set"),
            ));
        }
    }

    fn predicate(&mut self, gate: &str, pred: &GatePredicate, gate_places: &[String]) {
        match pred {
            GatePredicate::True | GatePredicate::False => {}
            GatePredicate::Atom { quantifier, place, value, .. } => {
                self.in_gate(gate, place, gate_places);
                if let Quantifier::AtIndex(idx) = quantifier {
                    self.term(idx, Sort::Int, Allowed::NONE, gate, "predicate index");
                }
                self.term(value, Sort::Int, Allowed::PLACE, gate, "predicate bound");
            }
            GatePredicate::And(ps) | GatePredicate::Or(ps) => {
                for p in ps {
                    self.predicate(gate, p, gate_places);
                }
            }
            GatePredicate::Not(p) => self.predicate(gate, p, gate_places),
        }
    }

    fn rule(&mut self, gate: &str, rule: &UpdateRule, gate_places: &[String], output: bool) {
        self.in_gate(gate, &rule.place, gate_places);
        let (index_allowed, value_allowed) =
            if output { (Allowed::CASE, Allowed::BOTH) } else { (Allowed::NONE, Allowed::PLACE) };
        match &rule.selector {
            Selector::All => {}
            Selector::AtIndex(t) => self.term(t, Sort::Int, index_allowed, gate, "rule index"),
            Selector::WhereSatisfied { value, .. } => self.term(value, Sort::Int, value_allowed, gate, "rule condition"),
        }
        let what = match rule.action {
            Action::SetTo(_) => "assigned value",
            Action::Add(_) => "added amount",
            Action::Sub(_) => "removed amount",
        };
        self.term(rule.action.term(), Sort::Int, value_allowed, gate, what);
        if let Some(g) = &rule.guard {
            self.term(g, Sort::Bool, value_allowed, gate, "rule guard");
        }
    }

    fn marking_fn(&mut self, place: &str, f: &MarkingTemplateFn) {
        match f {
            MarkingTemplateFn::Const(t) => self.term(t, Sort::Int, Allowed::NONE, place, "initial marking"),
            MarkingTemplateFn::SetAt { value, index, base } => {
                self.term(value, Sort::Int, Allowed::NONE, place, "initial marking value");
                self.term(index, Sort::Int, Allowed::NONE, place, "initial marking index");
                self.marking_fn(place, base);
            }
            MarkingTemplateFn::SetOn { value, indices, base } => {
                self.term(value, Sort::Int, Allowed::NONE, place, "initial marking value");
                self.term(indices, Sort::OrderedSetInt, Allowed::NONE, place, "initial marking index set");
                self.marking_fn(place, base);
            }
            MarkingTemplateFn::Expr(t) => self.term(t, Sort::Int, Allowed::PLACE, place, "initial marking expression"),
            MarkingTemplateFn::Identity | MarkingTemplateFn::Table(_) => {}
        }
    }
}
