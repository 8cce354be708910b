//! Graphviz export.
//!
//! Places are circles, timed activities thick bars, instantaneous activities
//! thin bars and gates triangles. In templates, elements whose shape depends
//! on the assignment are drawn dashed: places with a non-unary multiplicity,
//! activities whose case count is not a constant, gates touching such a
//! place and output gates of such an activity. Gates written as arcs are
//! drawn as labelled edges.

use std::collections::BTreeSet;
use std::fmt::Write;

use super::model::ElementKind;
use crate::san::ConcreteSan;
use crate::template::{ActivityKind, GateOrigin, SanTemplate};

/// Template elements that carry variability, i.e. the ones drawn dashed.
pub fn template_elements(t: &SanTemplate) -> BTreeSet<(ElementKind, String)> {
    let multi: BTreeSet<&str> = t.places.iter().filter(|p| !p.is_unary()).map(|p| p.name.as_str()).collect();
    let variable: BTreeSet<&str> =
        t.activities.iter().filter(|a| a.has_variable_cases()).map(|a| a.name.as_str()).collect();
    let touches = |places: &[String]| places.iter().any(|p| multi.contains(p.as_str()));
    let mut out = BTreeSet::new();
    out.extend(multi.iter().map(|p| (ElementKind::Place, p.to_string())));
    out.extend(variable.iter().map(|a| (ElementKind::Activity, a.to_string())));
    for g in t.input_gates.iter().filter(|g| touches(&g.places)) {
        out.insert((ElementKind::InputGate, g.name.clone()));
    }
    for g in &t.output_gates {
        if touches(&g.places) || variable.contains(g.activity.as_str()) {
            out.insert((ElementKind::OutputGate, g.name.clone()));
        }
    }
    out
}

fn q(s: &str) -> String {
    format!("\"{}\"", s.replace('\\', "\\\\").replace('"', "\\\""))
}

fn style(dashed: bool, base: &[&str]) -> String {
    let mut parts: Vec<&str> = base.to_vec();
    if dashed {
        parts.push("dashed");
    }
    if parts.is_empty() {
        String::new()
    } else {
        format!(", style={}", q(&parts.join(",")))
    }
}

fn activity_node(w: &mut String, name: &str, timed: bool, dashed: bool) {
    let width = if timed { 0.18 } else { 0.05 };
    let _ = writeln!(
        w,
        "  {} [shape=box, label=\"\", xlabel={}, width={width}, height=0.6, fixedsize=true, fillcolor=black{}];",
        q(&format!("a:{name}")),
        q(name),
        style(dashed, &["filled"])
    );
}

fn gate_node(w: &mut String, name: &str, input: bool, dashed: bool) {
    let orientation = if input { 270 } else { 90 };
    let _ = writeln!(
        w,
        "  {} [shape=triangle, orientation={orientation}, label=\"\", xlabel={}, width=0.3, height=0.3, fixedsize=true{}];",
        q(&format!("g:{name}")),
        q(name),
        style(dashed, &[])
    );
}

fn header(w: &mut String, name: &str) {
    let _ = writeln!(w, "digraph {} {{", q(name));
    w.push_str("  rankdir=LR;\n  node [fontname=\"Helvetica\"];\n  edge [fontname=\"Helvetica\"];\n");
}

pub fn template_to_dot(t: &SanTemplate) -> String {
    let dashed = template_elements(t);
    let is = |k: ElementKind, n: &str| dashed.contains(&(k, n.to_string()));
    let mut w = String::new();
    header(&mut w, &t.name);
    for p in &t.places {
        let label = if p.is_unary() { p.name.clone() } else { format!("{} [{}]", p.name, p.multiplicity) };
        let _ = writeln!(
            w,
            "  {} [shape=circle, label={}{}];",
            q(&format!("p:{}", p.name)),
            q(&label),
            style(is(ElementKind::Place, &p.name), &[])
        );
    }
    for a in &t.activities {
        activity_node(&mut w, &a.name, a.kind == ActivityKind::Timed, is(ElementKind::Activity, &a.name));
    }
    for g in &t.input_gates {
        let d = is(ElementKind::InputGate, &g.name);
        let act = q(&format!("a:{}", g.activity));
        if let GateOrigin::Arc { place, label } = &g.origin {
            let _ = writeln!(
                w,
                "  {} -> {act} [id={}, label={}{}];",
                q(&format!("p:{place}")),
                q(&format!("g:{}", g.name)),
                q(label),
                style(d, &[])
            );
            continue;
        }
        gate_node(&mut w, &g.name, true, d);
        let node = q(&format!("g:{}", g.name));
        let _ = writeln!(w, "  {node} -> {act};");
        for p in &g.places {
            let _ = writeln!(w, "  {} -> {node} [arrowhead=none];", q(&format!("p:{p}")));
        }
    }
    for g in &t.output_gates {
        let d = is(ElementKind::OutputGate, &g.name);
        let act = q(&format!("a:{}", g.activity));
        if let GateOrigin::Arc { place, label } = &g.origin {
            let _ = writeln!(
                w,
                "  {act} -> {} [id={}, label={}{}];",
                q(&format!("p:{place}")),
                q(&format!("g:{}", g.name)),
                q(label),
                style(d, &[])
            );
            continue;
        }
        gate_node(&mut w, &g.name, false, d);
        let node = q(&format!("g:{}", g.name));
        let _ = writeln!(w, "  {act} -> {node} [arrowhead=none];");
        for p in &g.places {
            let _ = writeln!(w, "  {node} -> {};", q(&format!("p:{p}")));
        }
    }
    w.push_str("}\n");
    w
}

/// Concrete SANs have no variability, so nothing is dashed.
pub fn instance_to_dot(san: &ConcreteSan) -> String {
    let mut w = String::new();
    header(&mut w, &san.name);
    for (i, p) in san.places.iter().enumerate() {
        let tokens = san.initial_marking.tokens(i);
        let label = if tokens > 0 { format!("{}\\n{tokens}", p.name) } else { p.name.clone() };
        let _ = writeln!(w, "  {} [shape=circle, label=\"{label}\"];", q(&format!("p:{}", p.name)));
    }
    for a in &san.activities {
        activity_node(&mut w, &a.name, a.is_timed(), false);
    }
    for g in &san.input_gates {
        gate_node(&mut w, &g.name, true, false);
        let node = q(&format!("g:{}", g.name));
        let _ = writeln!(w, "  {node} -> {};", q(&format!("a:{}", san.activities[g.activity].name)));
        for &p in &g.places {
            let _ = writeln!(w, "  {} -> {node} [arrowhead=none];", q(&format!("p:{}", san.places[p].name)));
        }
    }
    for g in &san.output_gates {
        gate_node(&mut w, &g.name, false, false);
        let node = q(&format!("g:{}", g.name));
        let act = &san.activities[g.activity];
        let label = if act.cases > 1 { format!(", label=\"{}\"", g.case) } else { String::new() };
        let _ = writeln!(w, "  {} -> {node} [arrowhead=none{label}];", q(&format!("a:{}", act.name)));
        for &p in &g.places {
            let _ = writeln!(w, "  {node} -> {};", q(&format!("p:{}", san.places[p].name)));
        }
    }
    w.push_str("}\n");
    w
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::template::{build_geo_template, build_user_template};

    fn names(t: &SanTemplate) -> Vec<String> {
        template_elements(t).into_iter().map(|(_, n)| n).collect()
    }

    #[test]
    fn user_variability() {
        let d = names(&build_user_template());
        for n in ["Req", "Request", "OGRequest"] {
            assert!(d.contains(&n.to_string()), "{n} should be dashed");
        }
        for n in ["Idle", "Fail", "Drop", "IGRequest"] {
            assert!(!d.contains(&n.to_string()), "{n} should be solid");
        }
    }

    #[test]
    fn geo_variability() {
        let t = build_geo_template();
        assert_eq!(names(&t), ["Working_S", "IG_GF", "OG_GR"]);
        let dot = template_to_dot(&t);
        let line = |id: &str| dot.lines().find(|l| l.contains(id)).unwrap().to_string();
        assert!(line("\"p:Working_S\"").contains("dashed"));
        assert!(!line("\"p:GEO\"").contains("dashed"));
        assert!(line("\"g:IG_GF\"").contains("dashed"));
    }
}
