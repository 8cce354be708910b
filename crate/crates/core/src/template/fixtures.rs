//! The three bundled templates: the User model and the GEO and TMI
//! dependency blocks.

use super::{
    Action, ActivityTemplate, CaseDistribution, CaseProbability, Comparison, DistributionSpec, GateFunction,
    GateOrigin, GatePredicate, InputGateTemplate, MarkingTemplateFn, OutputGateTemplate, PlaceTemplate, Quantifier,
    SanTemplate, Selector, TemplateMarking, UpdateRule,
};
use crate::arclabel::{desugar_input_arc, desugar_output_arc, parse_input_label, parse_output_label};
use crate::terms::{parse_term, Sort, Term};

fn t(src: &str) -> Term {
    parse_term(src).unwrap_or_else(|e| panic!("bad fixture term {src:?}: {e}"))
}

fn input_arc(tpl: &SanTemplate, place: &str, activity: &str, label: &str) -> InputGateTemplate {
    let spec = parse_input_label(label).expect("fixture label");
    desugar_input_arc(&spec, tpl.place(place).expect("place"), tpl.activity(activity).expect("activity"))
}

fn output_arc(tpl: &SanTemplate, activity: &str, place: &str, label: &str) -> OutputGateTemplate {
    let spec = parse_output_label(label).expect("fixture label");
    desugar_output_arc(&spec, tpl.place(place).expect("place"), tpl.activity(activity).expect("activity"))
}

/// The User template: an idle user requests one of the services in `s`,
/// choosing service `i` with probability `pb[i]`.
pub fn build_user_template() -> SanTemplate {
    let mut tpl = SanTemplate::new("User");
    tpl.parameters.declare("s", Sort::OrderedSetInt);
    tpl.parameters.declare("pb", Sort::OrderedSetReal);
    tpl.places = vec![
        PlaceTemplate::single("Idle"),
        PlaceTemplate::new("Req", t("s")),
        PlaceTemplate::single("Dropped"),
        PlaceTemplate::single("Failed"),
    ];
    let request = ActivityTemplate::timed("Request", DistributionSpec::Uniform { low: t("1.0"), high: t("2.0") })
        .with_cases(
            t("|s|"),
            CaseDistribution {
                entries: vec![CaseProbability { guard: t("1 <= <CASE> and <CASE> <= |s|"), probability: t("pb[<CASE>]") }],
            },
        );
    tpl.activities = vec![request, ActivityTemplate::instantaneous("Fail"), ActivityTemplate::instantaneous("Drop")];

    let mut ig_request = input_arc(&tpl, "Idle", "Request", "");
    ig_request.name = "IGRequest".into();
    tpl.input_gates = vec![ig_request, failure_gate("ArcInFail", "Fail", "Failed"), failure_gate("ArcInDrop", "Drop", "Dropped")];

    let og_request = OutputGateTemplate {
        name: "OGRequest".into(),
        activity: "Request".into(),
        places: vec!["Req".into()],
        function: GateFunction::new(vec![UpdateRule::new(
            "Req",
            Selector::AtIndex(t("s[<CASE>]")),
            Action::SetTo(Term::Int(1)),
        )]),
        origin: GateOrigin::Gate,
    };
    let mut out_fail = output_arc(&tpl, "Fail", "Idle", "");
    out_fail.name = "ArcOutFail".into();
    let mut out_drop = output_arc(&tpl, "Drop", "Idle", "");
    out_drop.name = "ArcOutDrop".into();
    tpl.output_gates = vec![og_request, out_fail, out_drop];

    tpl.initial_marking = TemplateMarking::new()
        .with("Idle", MarkingTemplateFn::constant(1))
        .with("Req", MarkingTemplateFn::constant(0))
        .with("Dropped", MarkingTemplateFn::constant(0))
        .with("Failed", MarkingTemplateFn::constant(0));
    tpl
}

/// Consumes the token that signals a failed or dropped request and clears
/// the pending request.
fn failure_gate(name: &str, activity: &str, signal: &str) -> InputGateTemplate {
    InputGateTemplate {
        name: name.into(),
        activity: activity.into(),
        places: vec![signal.into(), "Req".into()],
        predicate: GatePredicate::atom(Quantifier::ForAll, signal, Comparison::Ge, Term::Int(1)),
        function: GateFunction::new(vec![
            UpdateRule::new(signal, Selector::All, Action::Sub(Term::Int(1))),
            UpdateRule::new("Req", Selector::All, Action::SetTo(Term::Int(0))),
        ]),
        origin: GateOrigin::Gate,
    }
}

/// The GEO common-cause failure block over the components in `n`.
pub fn build_geo_template() -> SanTemplate {
    let mut tpl = SanTemplate::new("GEO");
    tpl.parameters.declare("n", Sort::OrderedSetInt);
    tpl.parameters.declare("lambda_f", Sort::Real);
    tpl.parameters.declare("lambda_r", Sort::Real);
    tpl.places = vec![PlaceTemplate::single("GEO"), PlaceTemplate::new("Working_S", t("n"))];
    tpl.activities = vec![
        ActivityTemplate::timed("GEO_F", DistributionSpec::Exponential { rate: t("lambda_f") }),
        ActivityTemplate::timed("GEO_R", DistributionSpec::Exponential { rate: t("lambda_r") }),
    ];
    let ig_gf = InputGateTemplate {
        name: "IG_GF".into(),
        activity: "GEO_F".into(),
        places: vec!["Working_S".into()],
        predicate: GatePredicate::atom(Quantifier::ForAll, "Working_S", Comparison::Gt, Term::Int(0)),
        function: GateFunction::new(vec![UpdateRule::new("Working_S", Selector::All, Action::SetTo(Term::Int(0)))]),
        origin: GateOrigin::Gate,
    };
    tpl.input_gates = vec![ig_gf, input_arc(&tpl, "GEO", "GEO_R", "")];
    let og_gr = OutputGateTemplate {
        name: "OG_GR".into(),
        activity: "GEO_R".into(),
        places: vec!["Working_S".into()],
        function: GateFunction::new(vec![UpdateRule::new("Working_S", Selector::All, Action::SetTo(Term::Int(1)))]),
        origin: GateOrigin::Gate,
    };
    tpl.output_gates = vec![og_gr, output_arc(&tpl, "GEO_F", "GEO", "")];
    tpl.initial_marking = TemplateMarking::new()
        .with("GEO", MarkingTemplateFn::constant(0))
        .with("Working_S", MarkingTemplateFn::constant(1));
    tpl
}

/// An SDN switch `k` whose software failure may, with probability `p_TMI`,
/// also bring down the switches in `J` (traffic migration induced failure).
pub fn build_tmi_template() -> SanTemplate {
    let mut tpl = SanTemplate::new("SwitchTMI");
    tpl.parameters.declare("k", Sort::Int);
    tpl.parameters.declare("J", Sort::OrderedSetInt);
    tpl.parameters.declare("p_TMI", Sort::Real);
    tpl.parameters.declare("lambda_f", Sort::Real);
    tpl.parameters.declare("lambda_r", Sort::Real);
    tpl.places = vec![
        PlaceTemplate::new("Working_S", t("J union {k}")),
        PlaceTemplate::new("Failed_SW_S", t("J union {k}")),
    ];
    let sw_f = ActivityTemplate::timed("SW_F", DistributionSpec::Exponential { rate: t("lambda_f") }).with_cases(
        t("1 + (p_TMI > 0.0)"),
        CaseDistribution {
            entries: vec![
                CaseProbability { guard: t("<CASE> = 1"), probability: t("1.0 - p_TMI") },
                CaseProbability { guard: t("<CASE> = 2"), probability: t("p_TMI") },
            ],
        },
    );
    tpl.activities =
        vec![sw_f, ActivityTemplate::timed("SW_R", DistributionSpec::Exponential { rate: t("lambda_r") })];
    tpl.input_gates = vec![
        input_arc(&tpl, "Working_S", "SW_F", "[k > 0] -1"),
        input_arc(&tpl, "Failed_SW_S", "SW_R", "[k > 0] -1"),
    ];
    let og_sw = OutputGateTemplate {
        name: "OG_SW".into(),
        activity: "SW_F".into(),
        places: vec!["Working_S".into(), "Failed_SW_S".into()],
        function: GateFunction::new(vec![
            UpdateRule::new("Failed_SW_S", Selector::AtIndex(t("k")), Action::SetTo(Term::Int(1))).when(t("<CASE> = 1")),
            UpdateRule::new("Working_S", Selector::All, Action::SetTo(Term::Int(0))).when(t("<CASE> = 2")),
            UpdateRule::new("Failed_SW_S", Selector::All, Action::SetTo(Term::Int(1))).when(t("<CASE> = 2")),
        ]),
        origin: GateOrigin::Gate,
    };
    tpl.output_gates = vec![og_sw, output_arc(&tpl, "SW_R", "Working_S", "k -> +1")];
    tpl.initial_marking = TemplateMarking::new()
        .with("Working_S", MarkingTemplateFn::constant(1))
        .with("Failed_SW_S", MarkingTemplateFn::constant(0));
    tpl
}
