//! Helpers shared by the integration tests.
#![allow(dead_code)]

use std::collections::{HashSet, VecDeque};

use rand::Rng;
use sant::arclabel::{InFunc, InputArcSpec, OutExpr, OutputArcSpec};
use sant::concretize::{
    concretize, fire_template, index_map, lift_marking, project_marking, template_enabled, TemplateFireError,
};
use sant::formats::{parse_model, AssignmentDocument};
use sant::san::{FireError, Marking};
use sant::template::{Comparison, Quantifier, SanTemplate};
use sant::terms::{Assignment, BinaryOp, Term, UnaryOp, Value};

pub const USER_SANT: &str = include_str!("../../examples/user.sant");
pub const GEO_SANT: &str = include_str!("../../examples/geo.sant");
pub const TMI_SANT: &str = include_str!("../../examples/tmi.sant");
pub const USERS_SASG: &str = include_str!("../../examples/users.sasg");
pub const GEO_SASG: &str = include_str!("../../examples/geo.sasg");
pub const TMI_SASG: &str = include_str!("../../examples/tmi.sasg");

pub fn model(src: &str) -> SanTemplate {
    parse_model(src).expect("bundled model parses")
}

pub fn assignment(src: &str, name: &str) -> Assignment {
    AssignmentDocument::parse(src).expect("bundled assignments parse").get(name).expect("named assignment").clone()
}

pub fn user_internal() -> Assignment {
    assignment(USERS_SASG, "UserInternal")
}

pub fn user_press() -> Assignment {
    assignment(USERS_SASG, "UserPress")
}

pub fn geo(n: &[i64], lambda_f: f64, lambda_r: f64) -> Assignment {
    Assignment::new()
        .with("n", Value::IntSeq(n.to_vec()))
        .with("lambda_f", Value::Real(lambda_f))
        .with("lambda_r", Value::Real(lambda_r))
}

pub fn tmi(k: i64, j: &[i64], p: f64) -> Assignment {
    Assignment::new()
        .with("k", Value::Int(k))
        .with("J", Value::IntSeq(j.to_vec()))
        .with("p_TMI", Value::Real(p))
        .with("lambda_f", Value::Real(1.0))
        .with("lambda_r", Value::Real(4.0))
}

/// Three assignments per bundled template.
pub fn grid() -> Vec<(&'static str, SanTemplate, Vec<Assignment>)> {
    let single_user =
        Assignment::new().with("s", Value::IntSeq(vec![2])).with("pb", Value::RealSeq(vec![1.0]));
    vec![
        ("User", model(USER_SANT), vec![user_internal(), user_press(), single_user]),
        ("GEO", model(GEO_SANT), vec![geo(&[1, 2], 1.0, 10.0), geo(&[1, 2, 3], 0.5, 2.0), geo(&[5], 1.0, 1.0)]),
        ("TMI", model(TMI_SANT), vec![tmi(1, &[2], 0.3), tmi(1, &[2], 0.0), tmi(2, &[1, 2, 4], 0.5)]),
    ]
}

/// Every 0/1 marking when there are at most `max_places` places.
pub fn binary_markings(places: usize, max_places: usize) -> Vec<Marking> {
    if places > max_places {
        return Vec::new();
    }
    (0..1u32 << places)
        .map(|bits| Marking((0..places).map(|i| u64::from(bits >> i & 1)).collect()))
        .collect()
}

/// Checks that firing on the template marking and projecting gives the same
/// marking as projecting and firing the concrete SAN, for every enabled
/// activity and case, over markings reachable from the initial marking and
/// from every 0/1 marking. Returns the number of firings compared.
pub fn check_commutation(t: &SanTemplate, xi: &Assignment, max_states: usize) -> Result<usize, String> {
    let san = concretize(t, xi).map_err(|e| e.to_string())?.san;
    let map = index_map(t, xi).map_err(|e| e.to_string())?;
    let mut queue: VecDeque<Marking> = VecDeque::new();
    let mut seen: HashSet<Marking> = HashSet::new();
    for m in std::iter::once(san.initial_marking.clone()).chain(binary_markings(san.places.len(), 10)) {
        if seen.len() < max_states && seen.insert(m.clone()) {
            queue.push_back(m);
        }
    }
    let mut checked = 0;
    while let Some(m) = queue.pop_front() {
        let mu = lift_marking(&m, &map);
        let back = project_marking(&mu, &map, xi).map_err(|e| e.to_string())?;
        if back != m {
            return Err(format!("lifting {m:?} and projecting gives {back:?}"));
        }
        for (a, act) in san.activities.iter().enumerate() {
            let concrete = san.is_enabled(&m, a);
            let template = template_enabled(t, xi, &mu, &act.name).map_err(|e| e.to_string())?;
            if concrete != template {
                return Err(format!("{}: enabled {concrete} concretely, {template} on the template at {m:?}", act.name));
            }
            if !concrete {
                continue;
            }
            for case in 1..=act.cases {
                checked += 1;
                match (san.fire(&m, a, case), fire_template(t, xi, &mu, &act.name, case)) {
                    (Ok(next), Ok(mu_next)) => {
                        let projected = project_marking(&mu_next, &map, xi).map_err(|e| e.to_string())?;
                        if projected != next {
                            return Err(format!(
                                "{} case {case} at {m:?}: concrete {next:?}, template {projected:?}",
                                act.name
                            ));
                        }
                        if seen.len() < max_states && seen.insert(next.clone()) {
                            queue.push_back(next);
                        }
                    }
                    (Err(FireError::NegativeMarking { .. }), Err(TemplateFireError::NegativeMarking { .. })) => {}
                    (c, tm) => return Err(format!("{} case {case} at {m:?}: {c:?} vs {tm:?}", act.name)),
                }
            }
        }
    }
    Ok(checked)
}

/// Random integer term in the arc-label sublanguage over `n`, `s` and the placeholders.
pub fn random_term<R: Rng>(rng: &mut R, depth: u32, allow_case: bool) -> Term {
    if depth == 0 || rng.gen_bool(0.35) {
        return match rng.gen_range(0..6) {
            0 | 1 => Term::Int(rng.gen_range(0..=12)),
            2 => Term::param("n"),
            3 => Term::place(),
            4 if allow_case => Term::case(),
            4 => Term::size(Term::param("s")),
            _ => Term::index(Term::param("s"), random_term(rng, depth.saturating_sub(1), allow_case)),
        };
    }
    let l = random_term(rng, depth - 1, allow_case);
    match rng.gen_range(0..7) {
        0 => Term::unary(UnaryOp::Neg, l),
        1 => Term::unary(UnaryOp::BoolToInt, Term::binary(BinaryOp::Gt, l, random_term(rng, depth - 1, allow_case))),
        k => {
            let op = [BinaryOp::Add, BinaryOp::Sub, BinaryOp::Mul, BinaryOp::IntDiv, BinaryOp::Mod][k - 2];
            Term::binary(op, l, random_term(rng, depth - 1, allow_case))
        }
    }
}

pub fn random_output_spec<R: Rng>(rng: &mut R) -> OutputArcSpec {
    let expr = |rng: &mut R| {
        let t = random_term(rng, 3, true);
        if rng.gen_bool(0.5) { OutExpr::Add(t) } else { OutExpr::SetTo(t) }
    };
    if rng.gen_bool(0.4) {
        OutputArcSpec::Unconditional(expr(rng))
    } else {
        let index = random_term(rng, 2, true);
        let then = expr(rng);
        let otherwise = rng.gen_bool(0.5).then(|| expr(rng));
        OutputArcSpec::Conditional { index, then, otherwise }
    }
}

pub fn random_input_spec<R: Rng>(rng: &mut R) -> InputArcSpec {
    if rng.gen_bool(0.3) {
        return InputArcSpec::ImplicitSub(random_term(rng, 3, false));
    }
    let quantifier = match rng.gen_range(0..3) {
        0 => Quantifier::ForAll,
        1 => Quantifier::Exists,
        _ => Quantifier::AtIndex(random_term(rng, 2, false)),
    };
    let cmp = [Comparison::Eq, Comparison::Gt, Comparison::Ge][rng.gen_range(0..3)];
    let value = random_term(rng, 2, false);
    let t = random_term(rng, 3, false);
    let func = if rng.gen_bool(0.5) { InFunc::Sub(t) } else { InFunc::SetTo(t) };
    InputArcSpec::Explicit { quantifier, cmp, value, func }
}
