//! Canonical `.sant` rendering. `parse_model(&print_model(t)) == t` for
//! every template whose arc-derived gates still match their labels.

use std::fmt::Write;

use crate::arclabel::{arc_gate_name, desugar_input_arc, desugar_output_arc, parse_input_label, parse_output_label, LabelTerm};
use crate::template::{
    Action, ActivityKind, ActivityTemplate, CaseDistribution, DistributionSpec, GateOrigin, GatePredicate,
    InputGateTemplate, MarkingTemplateFn, OutputGateTemplate, Quantifier, ReactivationSpec, SanTemplate, Selector,
    UpdateRule,
};
use crate::terms::Term;

pub fn print_model(t: &SanTemplate) -> String {
    let mut out = String::new();
    let w = &mut out;
    let _ = writeln!(w, "template {};", t.name);
    if !t.parameters.is_empty() {
        w.push('\n');
        for (name, sort) in t.parameters.iter() {
            let _ = writeln!(w, "param {name} : {sort};");
        }
    }
    w.push('\n');
    for p in &t.places {
        if p.is_unary() {
            let _ = writeln!(w, "place {};", p.name);
        } else {
            let _ = writeln!(w, "place {} [{}];", p.name, p.multiplicity);
        }
    }
    w.push('\n');
    for a in &t.activities {
        activity(w, a);
    }
    if !t.input_gates.is_empty() {
        w.push('\n');
        for g in &t.input_gates {
            match arc_form_input(t, g) {
                Some(line) => w.push_str(&line),
                None => input_gate(w, g),
            }
        }
    }
    if !t.output_gates.is_empty() {
        w.push('\n');
        for g in &t.output_gates {
            match arc_form_output(t, g) {
                Some(line) => w.push_str(&line),
                None => output_gate(w, g),
            }
        }
    }
    if !t.initial_marking.is_empty() {
        w.push('\n');
        for (place, f) in &t.initial_marking.map {
            let _ = writeln!(w, "init {place} = {};", marking_fn(f));
        }
    }
    out
}

fn activity(w: &mut String, a: &ActivityTemplate) {
    let kind = match a.kind {
        ActivityKind::Timed => "timed",
        ActivityKind::Instantaneous => "instantaneous",
    };
    let mut body = Vec::new();
    if a.cases != Term::Int(1) {
        body.push(format!("cases {}", a.cases));
    }
    if let Some(d) = &a.time {
        body.push(format!("time {}", distribution(d)));
    }
    if a.case_distribution != CaseDistribution::single() {
        for e in &a.case_distribution.entries {
            body.push(format!("prob {} : {}", e.guard, e.probability));
        }
    }
    if let ReactivationSpec::Unsupported(text) = &a.reactivation {
        body.push(format!("reactivation {text:?}"));
    }
    if body.is_empty() {
        let _ = writeln!(w, "activity {} {kind};", a.name);
    } else {
        let _ = writeln!(w, "activity {} {kind} {{", a.name);
        for line in body {
            let _ = writeln!(w, "    {line};");
        }
        w.push_str("}\n");
    }
}

fn arc_line(src: &str, dst: &str, label: &str, name: &str) -> String {
    let mut line = format!("arc {src} -> {dst} {label:?}");
    if name != arc_gate_name(src, dst) {
        let _ = write!(line, " as {name}");
    }
    line.push_str(";\n");
    line
}

/// The `arc` line for a gate that is exactly the desugaring of its label.
fn arc_form_input(t: &SanTemplate, g: &InputGateTemplate) -> Option<String> {
    let GateOrigin::Arc { place, label } = &g.origin else { return None };
    let spec = parse_input_label(label).ok()?;
    let mut expected = desugar_input_arc(&spec, t.place(place)?, t.activity(&g.activity)?);
    expected.name = g.name.clone();
    (expected == *g).then(|| arc_line(place, &g.activity, label, &g.name))
}

fn arc_form_output(t: &SanTemplate, g: &OutputGateTemplate) -> Option<String> {
    let GateOrigin::Arc { place, label } = &g.origin else { return None };
    let spec = parse_output_label(label).ok()?;
    let mut expected = desugar_output_arc(&spec, t.place(place)?, t.activity(&g.activity)?);
    expected.name = g.name.clone();
    (expected == *g).then(|| arc_line(&g.activity, place, label, &g.name))
}

fn input_gate(w: &mut String, g: &InputGateTemplate) {
    let _ = writeln!(w, "input {} -> {} {{", g.name, g.activity);
    let _ = writeln!(w, "    places {};", g.places.join(", "));
    let _ = writeln!(w, "    enable {};", predicate(&g.predicate));
    for r in &g.function.rules {
        let _ = writeln!(w, "    {}", rule(r));
    }
    w.push_str("}\n");
}

fn output_gate(w: &mut String, g: &OutputGateTemplate) {
    let _ = writeln!(w, "output {} -> {} {{", g.name, g.activity);
    let _ = writeln!(w, "    places {};", g.places.join(", "));
    for r in &g.function.rules {
        let _ = writeln!(w, "    {}", rule(r));
    }
    w.push_str("}\n");
}

pub(crate) fn predicate(p: &GatePredicate) -> String {
    match p {
        GatePredicate::True => "true".into(),
        GatePredicate::False => "false".into(),
        GatePredicate::Atom { quantifier, place, cmp, value } => {
            let head = match quantifier {
                Quantifier::ForAll => format!("forall {place}"),
                Quantifier::Exists => format!("exists {place}"),
                Quantifier::AtIndex(i) => format!("{place}[{i}]"),
            };
            format!("{head} {} {}", cmp.symbol(), LabelTerm(value))
        }
        GatePredicate::And(ps) if ps.len() > 1 => {
            join(ps, " and ", |p| matches!(p, GatePredicate::Or(v) | GatePredicate::And(v) if v.len() > 1))
        },
        GatePredicate::Or(ps) if ps.len() > 1 => join(ps, " or ", |p| matches!(p, GatePredicate::Or(v) if v.len() > 1)),
        // degenerate connectives have no surface syntax of their own
        GatePredicate::And(ps) => ps.first().map_or("true".into(), predicate),
        GatePredicate::Or(ps) => ps.first().map_or("false".into(), predicate),
        GatePredicate::Not(inner) => match **inner {
            GatePredicate::And(ref v) | GatePredicate::Or(ref v) if v.len() > 1 => format!("not ({})", predicate(inner)),
            _ => format!("not {}", predicate(inner)),
        },
    }
}

fn join(ps: &[GatePredicate], sep: &str, wrap: impl Fn(&GatePredicate) -> bool) -> String {
    ps.iter()
        .map(|p| if wrap(p) { format!("({})", predicate(p)) } else { predicate(p) })
        .collect::<Vec<_>>()
        .join(sep)
}

pub(crate) fn rule(r: &UpdateRule) -> String {
    let mut s = r.place.clone();
    match &r.selector {
        Selector::All => {}
        Selector::AtIndex(i) => {
            let _ = write!(s, "[{i}]");
        }
        Selector::WhereSatisfied { cmp, value } => {
            let _ = write!(s, " where {} {}", cmp.symbol(), LabelTerm(value));
        }
    }
    let (op, t) = match &r.action {
        Action::SetTo(t) => (":=", t),
        Action::Add(t) => ("+=", t),
        Action::Sub(t) => ("-=", t),
    };
    let _ = write!(s, " {op} {t}");
    if let Some(g) = &r.guard {
        let _ = write!(s, " when {g}");
    }
    s.push(';');
    s
}

pub(crate) fn marking_fn(f: &MarkingTemplateFn) -> String {
    match f {
        MarkingTemplateFn::Const(t) => t.to_string(),
        MarkingTemplateFn::Identity => "identity".into(),
        MarkingTemplateFn::Expr(t) => format!("expr {t}"),
        MarkingTemplateFn::Table(map) => {
            let items: Vec<String> = map.iter().map(|(i, v)| format!("{i}: {v}")).collect();
            format!("table {{{}}}", items.join(", "))
        }
        MarkingTemplateFn::SetAt { value, index, base } => format!("{value} at {index} over {}", marking_fn(base)),
        MarkingTemplateFn::SetOn { value, indices, base } => format!("{value} on {indices} over {}", marking_fn(base)),
    }
}

/// One-line description of a distribution, as written in model files.
pub fn distribution(d: &DistributionSpec) -> String {
    let args: Vec<String> = d.terms().iter().map(|t| t.to_string()).collect();
    format!("{}({})", d.family(), args.join(", "))
}
