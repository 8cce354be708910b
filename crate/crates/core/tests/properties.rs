mod common;

use std::collections::BTreeSet;
use std::sync::Mutex;

use proptest::collection::vec;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sant::arclabel::{parse_input_label, parse_output_label};
use sant::concretize::{case_count, case_probability, concretize};
use sant::formats::{instance_to_json, parse_model, print_model, template_from_json, template_to_json};
use sant::san::{ConcreteSan, FireError, Marking};
use sant::sim::{simulate, simulate_observed, RewardSpec, SimConfig, VisitKind};
use sant::template::{
    Action, Comparison, GateFunction, GateOrigin, GatePredicate, InputGateTemplate, Quantifier, Selector, UpdateRule,
};
use sant::terms::{
    eval, infer_sort, parse_term, Assignment, BinaryOp, EvalContext, ParamDecls, Sort, Term, UnaryOp, Value,
};

use common::*;

// ---------------------------------------------------------------------------
// terms

const INT_UNARY: [UnaryOp; 4] = [UnaryOp::Neg, UnaryOp::Not, UnaryOp::Size, UnaryOp::BoolToInt];
const INT_BINARY: [BinaryOp; 16] = [
    BinaryOp::Add,
    BinaryOp::Sub,
    BinaryOp::Mul,
    BinaryOp::IntDiv,
    BinaryOp::Mod,
    BinaryOp::Eq,
    BinaryOp::Ne,
    BinaryOp::Lt,
    BinaryOp::Le,
    BinaryOp::Gt,
    BinaryOp::Ge,
    BinaryOp::And,
    BinaryOp::Or,
    BinaryOp::Union,
    BinaryOp::Index,
    BinaryOp::Member,
];

fn small_set() -> impl Strategy<Value = Term> {
    vec(-4i64..=4, 0..=3).prop_map(|v| Term::SetLiteral(v.into_iter().map(Term::Int).collect()))
}

fn leaf() -> impl Strategy<Value = Term> {
    prop_oneof![
        (-4i64..=4).prop_map(Term::Int),
        any::<bool>().prop_map(Term::Bool),
        Just(Term::param("x")),
        Just(Term::param("b")),
        Just(Term::param("q")),
        Just(Term::case()),
        Just(Term::place()),
        small_set(),
    ]
}

/// Terms over Int, Bool and OrderedSet<Int> of depth at most 3; many are ill-sorted.
fn term() -> impl Strategy<Value = Term> {
    leaf().prop_recursive(3, 16, 2, |inner| {
        prop_oneof![
            (prop::sample::select(INT_UNARY.to_vec()), inner.clone()).prop_map(|(op, t)| Term::unary(op, t)),
            (prop::sample::select(INT_BINARY.to_vec()), inner.clone(), inner)
                .prop_map(|(op, l, r)| Term::binary(op, l, r)),
        ]
    })
}

/// Well-sorted terms of the requested sort, built top down.
fn typed(sort: Sort, depth: u32) -> BoxedStrategy<Term> {
    use BinaryOp as B;
    let leaf: BoxedStrategy<Term> = match sort {
        Sort::Int => prop_oneof![(-4i64..=4).prop_map(Term::Int), Just(Term::param("x")), Just(Term::case())].boxed(),
        Sort::Real => prop_oneof![
            prop::sample::select(vec![0.0, 0.5, 1.25, 3.0, 1e-3, 2.5e10]).prop_map(Term::Real),
            Just(Term::param("r")),
        ]
        .boxed(),
        Sort::Bool => prop_oneof![any::<bool>().prop_map(Term::Bool), Just(Term::param("b"))].boxed(),
        Sort::OrderedSetInt => prop_oneof![small_set(), Just(Term::param("q"))].boxed(),
        Sort::OrderedSetReal => Just(Term::param("w")).boxed(),
    };
    if depth == 0 {
        return leaf;
    }
    let d = depth - 1;
    let bin = move |op, l, r| (typed(l, d), typed(r, d)).prop_map(move |(a, b)| Term::binary(op, a, b));
    let un = move |op, s| typed(s, d).prop_map(move |a| Term::unary(op, a));
    let compound: BoxedStrategy<Term> = match sort {
        Sort::Int => prop_oneof![
            prop::sample::select(vec![B::Add, B::Sub, B::Mul, B::IntDiv, B::Mod])
                .prop_flat_map(move |op| bin(op, Sort::Int, Sort::Int)),
            un(UnaryOp::Neg, Sort::Int),
            un(UnaryOp::Size, Sort::OrderedSetInt),
            un(UnaryOp::BoolToInt, Sort::Bool),
            bin(B::Index, Sort::OrderedSetInt, Sort::Int),
        ]
        .boxed(),
        Sort::Real => prop_oneof![
            prop::sample::select(vec![B::Add, B::Sub, B::Mul, B::Div])
                .prop_flat_map(move |op| bin(op, Sort::Real, Sort::Real)),
            un(UnaryOp::Neg, Sort::Real),
            un(UnaryOp::ToReal, Sort::Int),
            bin(B::Index, Sort::OrderedSetReal, Sort::Int),
        ]
        .boxed(),
        Sort::Bool => prop_oneof![
            prop::sample::select(vec![B::Eq, B::Ne, B::Lt, B::Le, B::Gt, B::Ge]).prop_flat_map(move |op| prop_oneof![
                bin(op, Sort::Int, Sort::Int),
                bin(op, Sort::Real, Sort::Real)
            ]),
            prop::sample::select(vec![B::And, B::Or]).prop_flat_map(move |op| bin(op, Sort::Bool, Sort::Bool)),
            un(UnaryOp::Not, Sort::Bool),
            bin(B::Member, Sort::Int, Sort::OrderedSetInt),
        ]
        .boxed(),
        Sort::OrderedSetInt => bin(B::Union, Sort::OrderedSetInt, Sort::OrderedSetInt).boxed(),
        Sort::OrderedSetReal => bin(B::Union, Sort::OrderedSetReal, Sort::OrderedSetReal).boxed(),
    };
    prop_oneof![1 => leaf, 2 => compound].boxed()
}

fn any_sort() -> impl Strategy<Value = Sort> {
    prop::sample::select(vec![Sort::Int, Sort::Real, Sort::Bool, Sort::OrderedSetInt, Sort::OrderedSetReal])
}

#[derive(Debug, Clone, PartialEq)]
enum O {
    I(i64),
    B(bool),
    S(Vec<i64>),
}

#[derive(Debug)]
struct Env {
    x: i64,
    b: bool,
    q: Vec<i64>,
    case: Option<i64>,
    place: Option<i64>,
}

impl Env {
    fn assignment(&self) -> Assignment {
        Assignment::new()
            .with("x", Value::Int(self.x))
            .with("b", Value::Bool(self.b))
            .with("q", Value::IntSeq(self.q.clone()))
    }

    fn ctx(&self) -> EvalContext {
        EvalContext { case_index: self.case, place_index: self.place }
    }
}

fn env() -> impl Strategy<Value = Env> {
    (-4i64..=4, any::<bool>(), vec(-4i64..=4, 0..=3), prop::option::of(1i64..=3), prop::option::of(1i64..=3))
        .prop_map(|(x, b, q, case, place)| Env { x, b, q, case, place })
}

fn floor_div(a: i64, b: i64) -> Option<i64> {
    (b != 0).then(|| (a as f64 / b as f64).floor() as i64)
}

/// Reference interpreter written directly from the operator table.
fn oracle(t: &Term, env: &Env) -> Option<O> {
    use BinaryOp as B;
    use O::*;
    Some(match t {
        Term::Int(v) => I(*v),
        Term::Bool(v) => B(*v),
        Term::Real(_) => return None,
        Term::Param(p) => match p.as_str() {
            "x" => I(env.x),
            "b" => B(env.b),
            "q" => S(env.q.clone()),
            _ => return None,
        },
        Term::Placeholder(sant::terms::Placeholder::Case) => I(env.case?),
        Term::Placeholder(sant::terms::Placeholder::Place) => I(env.place?),
        Term::SetLiteral(items) => {
            let mut out = Vec::new();
            for it in items {
                match oracle(it, env)? {
                    I(v) => out.push(v),
                    _ => return None,
                }
            }
            S(out)
        }
        Term::Unary(op, inner) => match (op, oracle(inner, env)?) {
            (UnaryOp::Neg, I(v)) => I(-v),
            (UnaryOp::Not, B(v)) => B(!v),
            (UnaryOp::Size, S(v)) => I(v.len() as i64),
            (UnaryOp::BoolToInt, B(v)) => I(if v { 1 } else { 0 }),
            _ => return None,
        },
        Term::Binary(B::And, l, r) => match oracle(l, env)? {
            B(false) => B(false),
            B(true) => match oracle(r, env)? {
                B(v) => B(v),
                _ => return None,
            },
            _ => return None,
        },
        Term::Binary(B::Or, l, r) => match oracle(l, env)? {
            B(true) => B(true),
            B(false) => match oracle(r, env)? {
                B(v) => B(v),
                _ => return None,
            },
            _ => return None,
        },
        Term::Binary(op, l, r) => {
            let (l, r) = (oracle(l, env)?, oracle(r, env)?);
            match (op, l, r) {
                (B::Add, I(a), I(b)) => I(a + b),
                (B::Sub, I(a), I(b)) => I(a - b),
                (B::Mul, I(a), I(b)) => I(a * b),
                (B::IntDiv, I(a), I(b)) => I(floor_div(a, b)?),
                (B::Mod, I(a), I(b)) => I(a - b * floor_div(a, b)?),
                (B::Eq, a, b) if std::mem::discriminant(&a) == std::mem::discriminant(&b) => B(a == b),
                (B::Ne, a, b) if std::mem::discriminant(&a) == std::mem::discriminant(&b) => B(a != b),
                (B::Lt, I(a), I(b)) => B(a < b),
                (B::Le, I(a), I(b)) => B(a <= b),
                (B::Gt, I(a), I(b)) => B(a > b),
                (B::Ge, I(a), I(b)) => B(a >= b),
                (B::Union, S(a), S(b)) => S(a.into_iter().chain(b).collect::<BTreeSet<_>>().into_iter().collect()),
                (B::Index, S(s), I(i)) => I(*s.get(usize::try_from(i).ok()?.checked_sub(1)?)?),
                (B::Member, I(x), S(s)) => B(s.contains(&x)),
                _ => return None,
            }
        }
    })
}

fn to_o(v: Value) -> O {
    match v {
        Value::Int(i) => O::I(i),
        Value::Bool(b) => O::B(b),
        Value::IntSeq(s) => O::S(s),
        other => panic!("unexpected value {other:?}"),
    }
}

#[test]
fn every_operator_matches_the_oracle_on_small_operands() {
    let leaves: Vec<Term> = (-4..=4)
        .map(Term::Int)
        .chain([Term::Bool(true), Term::Bool(false), Term::param("x"), Term::param("q"), Term::case()])
        .chain([vec![], vec![2], vec![3, -1, 3]].map(|v| Term::SetLiteral(v.into_iter().map(Term::Int).collect())))
        .collect();
    let env = Env { x: -3, b: true, q: vec![4, -2], case: Some(2), place: None };
    let xi = env.assignment();
    let mut checked = 0;
    for l in &leaves {
        for op in INT_UNARY {
            let t = Term::unary(op, l.clone());
            assert_eq!(eval(&t, &xi, env.ctx()).ok().map(to_o), oracle(&t, &env), "{t}");
            checked += 1;
        }
        for r in &leaves {
            for op in INT_BINARY {
                let t = Term::binary(op, l.clone(), r.clone());
                assert_eq!(eval(&t, &xi, env.ctx()).ok().map(to_o), oracle(&t, &env), "{t}");
                checked += 1;
            }
        }
    }
    assert!(checked > 4000);
}

proptest! {
    #[test]
    fn eval_matches_oracle(t in term(), env in env()) {
        let got = eval(&t, &env.assignment(), env.ctx()).ok().map(to_o);
        prop_assert_eq!(got, oracle(&t, &env), "term {}", t);
    }

    #[test]
    fn eval_is_pure(t in term(), env in env()) {
        let xi = env.assignment();
        prop_assert_eq!(eval(&t, &xi, env.ctx()), eval(&t, &xi, env.ctx()));
    }

    #[test]
    fn well_sorted_terms_round_trip_through_text((sort, t) in any_sort().prop_flat_map(|s| (Just(s), typed(s, 3)))) {
        let decls = ParamDecls::new()
            .with("x", Sort::Int)
            .with("r", Sort::Real)
            .with("b", Sort::Bool)
            .with("q", Sort::OrderedSetInt)
            .with("w", Sort::OrderedSetReal);
        prop_assert_eq!(infer_sort(&t, &decls), Ok(sort));
        let text = t.to_string();
        let back = parse_term(&text).map_err(|e| TestCaseError::fail(format!("{text:?}: {e}")))?;
        prop_assert_eq!(back, t, "printed as {}", text);
    }

    /// Ill-sorted terms may gain an implicit `int(..)` when reparsed, but printing is then stable.
    #[test]
    fn printing_reaches_a_fixpoint(t in term()) {
        let once = parse_term(&t.to_string()).unwrap();
        let twice = parse_term(&once.to_string()).unwrap();
        prop_assert_eq!(twice, once);
    }

    #[test]
    fn indexing_is_one_based(q in vec(-50i64..50, 1..6)) {
        let xi = Assignment::new().with("q", Value::IntSeq(q.clone()));
        prop_assert_eq!(eval(&parse_term("q[1]").unwrap(), &xi, EvalContext::NONE), Ok(Value::Int(q[0])));
        let last = parse_term("q[|q|]").unwrap();
        prop_assert_eq!(eval(&last, &xi, EvalContext::NONE), Ok(Value::Int(q[q.len() - 1])));
    }
}

// ---------------------------------------------------------------------------
// arc labels

/// Deletes, duplicates or swaps characters of `text`.
fn mutate(text: &str, edits: &[(u8, usize)]) -> String {
    let mut chars: Vec<char> = text.chars().collect();
    for &(kind, at) in edits {
        if chars.is_empty() {
            chars.push('[');
            continue;
        }
        let i = at % chars.len();
        match kind % 4 {
            0 => {
                chars.remove(i);
            }
            1 => chars.insert(i, chars[i]),
            2 if i + 1 < chars.len() => chars.swap(i, i + 1),
            _ => chars.insert(i, ['[', ']', '-', '>', '/', '(', '=', '<'][at % 8]),
        }
    }
    chars.into_iter().collect()
}

proptest! {
    #[test]
    fn output_labels_round_trip(seed in any::<u64>()) {
        let spec = random_output_spec(&mut ChaCha8Rng::seed_from_u64(seed));
        let text = spec.to_string();
        prop_assert_eq!(parse_output_label(&text).map_err(|e| e.to_string()), Ok(spec.clone()));
        prop_assert_eq!(parse_output_label(&text).unwrap().to_string(), text);
    }

    #[test]
    fn input_labels_round_trip(seed in any::<u64>()) {
        let spec = random_input_spec(&mut ChaCha8Rng::seed_from_u64(seed));
        let text = spec.to_string();
        prop_assert_eq!(parse_input_label(&text).map_err(|e| e.to_string()), Ok(spec));
    }

    #[test]
    fn mutated_labels_never_panic(seed in any::<u64>(), edits in vec((any::<u8>(), any::<usize>()), 1..4)) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for text in [random_output_spec(&mut rng).to_string(), random_input_spec(&mut rng).to_string()] {
            let bad = mutate(&text, &edits);
            let len = bad.len();
            if let Err(e) = parse_output_label(&bad) {
                prop_assert!(e.pos.offset <= len && e.pos.line >= 1 && e.pos.column >= 1);
            }
            if let Err(e) = parse_input_label(&bad) {
                prop_assert!(e.pos.offset <= len && e.pos.line >= 1 && e.pos.column >= 1);
            }
        }
    }

    #[test]
    fn mutated_models_never_panic(edits in vec((any::<u8>(), any::<usize>()), 1..6)) {
        for src in [USER_SANT, GEO_SANT, TMI_SANT] {
            let bad = mutate(src, &edits);
            if let Err(e) = parse_model(&bad) {
                prop_assert!(e.pos.offset <= bad.len());
            }
        }
    }
}

#[test]
fn malformed_labels_are_rejected_with_positions() {
    for bad in ["[", "[forall", "[forall =", "[forall = 1", "[forall = 1]", "1 ->", "-> +1", "+", "1 -> +2 /", "[exists 1] 0", "((1"] {
        let out = parse_output_label(bad);
        let inp = parse_input_label(bad);
        assert!(out.is_err() || inp.is_err(), "{bad:?} accepted by both parsers");
        for e in [out.err(), inp.err()].into_iter().flatten() {
            assert!(e.pos.offset <= bad.len(), "{bad:?}: {e}");
        }
    }
}

// ---------------------------------------------------------------------------
// desugared arcs against hand-written semantics

fn arc_net(indices: &[i64], arc: &str) -> ConcreteSan {
    let set: Vec<String> = indices.iter().map(|i| i.to_string()).collect();
    let src = format!(
        "template D;\nplace P [{{{}}}];\nactivity A timed {{ time exponential(1.0); }}\n{arc}\ninit P = 0;",
        set.join(", ")
    );
    concretize(&parse_model(&src).unwrap(), &Assignment::new()).unwrap().san
}

fn markings(len: usize, max: u64) -> Vec<Marking> {
    let mut out = vec![Marking(vec![])];
    for _ in 0..len {
        out = out
            .into_iter()
            .flat_map(|m| (0..=max).map(move |v| Marking(m.0.iter().copied().chain([v]).collect())))
            .collect();
    }
    out
}

#[test]
fn conditional_output_arc_semantics() {
    let san = arc_net(&[1, 2, 3], "arc A -> P \"1 -> +2 / 0\";");
    for m in markings(3, 2) {
        let next = san.fire(&m, 0, 1).unwrap();
        assert_eq!(next.0, vec![m.0[0] + 2, 0, 0], "from {m:?}");
    }
    let san = arc_net(&[1, 2, 3], "arc A -> P \"2 -> +1\";");
    for m in markings(3, 2) {
        assert_eq!(san.fire(&m, 0, 1).unwrap().0, vec![m.0[0], m.0[1] + 1, m.0[2]]);
    }
}

#[test]
fn input_arc_semantics() {
    let san = arc_net(&[1, 6, 7], "arc P -> A \"-1\";");
    for m in markings(3, 2) {
        let all = m.0.iter().all(|&v| v >= 1);
        assert_eq!(san.is_enabled(&m, 0), all, "{m:?}");
        if all {
            assert_eq!(san.fire(&m, 0, 1).unwrap().0, m.0.iter().map(|v| v - 1).collect::<Vec<_>>());
        }
    }
    let san = arc_net(&[1, 6, 7], "arc P -> A \"[exists = 1] 0\";");
    for m in markings(3, 2) {
        let any = m.0.contains(&1);
        assert_eq!(san.is_enabled(&m, 0), any, "{m:?}");
        if any {
            let want: Vec<u64> = m.0.iter().map(|&v| if v == 1 { 0 } else { v }).collect();
            assert_eq!(san.fire(&m, 0, 1).unwrap().0, want);
        }
    }
    let san = arc_net(&[1, 6, 7], "arc P -> A \"[6 >= 2] -2\";");
    for m in markings(3, 3) {
        assert_eq!(san.is_enabled(&m, 0), m.0[1] >= 2);
        if m.0[1] >= 2 {
            assert_eq!(san.fire(&m, 0, 1).unwrap().0, vec![m.0[0], m.0[1] - 2, m.0[2]]);
        }
    }
}

proptest! {
    /// The default input arc on an ordinary place is the classic "consume one token" arc.
    #[test]
    fn default_input_arc_on_unary_place(tokens in 0u64..100) {
        let san = arc_net(&[1], "arc P -> A;");
        let m = Marking(vec![tokens]);
        prop_assert_eq!(san.is_enabled(&m, 0), tokens >= 1);
        if tokens >= 1 {
            prop_assert_eq!(san.fire(&m, 0, 1).unwrap(), Marking(vec![tokens - 1]));
        } else {
            let refused = matches!(san.fire(&m, 0, 1), Err(FireError::NotEnabled { .. }));
            prop_assert!(refused);
        }
    }

    #[test]
    fn default_input_arc_on_any_index_set(
        idx in prop::collection::btree_set(1i64..20, 1..4),
        values in vec(0u64..3, 3),
    ) {
        let idx: Vec<i64> = idx.into_iter().collect();
        let san = arc_net(&idx, "arc P -> A \"\";");
        let m = Marking(values[..idx.len()].to_vec());
        let all = m.0.iter().all(|&v| v >= 1);
        prop_assert_eq!(san.is_enabled(&m, 0), all);
        if all {
            prop_assert_eq!(san.fire(&m, 0, 1).unwrap().0, m.0.iter().map(|v| v - 1).collect::<Vec<_>>());
        }
    }
}

// ---------------------------------------------------------------------------
// concretization

fn user_assignment() -> impl Strategy<Value = Assignment> {
    (prop::collection::btree_set(1i64..30, 1..7), vec(1u32..100, 6), any::<bool>()).prop_map(|(s, w, shuffle)| {
        let mut s: Vec<i64> = s.into_iter().collect();
        if shuffle {
            s.reverse();
        }
        let w = &w[..s.len()];
        let total: u32 = w.iter().sum();
        let pb: Vec<f64> = w.iter().map(|&x| f64::from(x) / f64::from(total)).collect();
        Assignment::new().with("s", Value::IntSeq(s)).with("pb", Value::RealSeq(pb))
    })
}

fn geo_assignment() -> impl Strategy<Value = Assignment> {
    (prop::collection::btree_set(1i64..10, 1..5), 0.1f64..5.0, 0.1f64..5.0)
        .prop_map(|(n, f, r)| geo(&n.into_iter().collect::<Vec<_>>(), f, r))
}

fn tmi_assignment() -> impl Strategy<Value = Assignment> {
    (1i64..6, prop::collection::btree_set(1i64..6, 0..4), prop_oneof![Just(0.0), 0.0f64..=1.0])
        .prop_map(|(k, j, p)| tmi(k, &j.into_iter().collect::<Vec<_>>(), p))
}

fn any_fixture() -> impl Strategy<Value = (&'static str, Assignment)> {
    prop_oneof![
        user_assignment().prop_map(|a| (USER_SANT, a)),
        geo_assignment().prop_map(|a| (GEO_SANT, a)),
        tmi_assignment().prop_map(|a| (TMI_SANT, a)),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn case_probabilities_close((src, xi) in any_fixture()) {
        let t = model(src);
        let san = concretize(&t, &xi).unwrap().san;
        for (a, at) in san.activities.iter().zip(&t.activities) {
            prop_assert_eq!(a.case_probs.len(), a.cases);
            prop_assert!(a.case_probs.iter().all(|p| (0.0..=1.0).contains(p)));
            prop_assert!((a.case_probs.iter().sum::<f64>() - 1.0).abs() <= 1e-9);
            for extra in a.cases + 1..=a.cases + 3 {
                prop_assert_eq!(case_probability(at, extra, &xi).unwrap(), 0.0);
            }
        }
        // one concrete output gate per template output gate and case
        let expected: usize = t
            .output_gates
            .iter()
            .map(|g| case_count(t.activity(&g.activity).unwrap(), &xi).unwrap())
            .sum();
        prop_assert_eq!(san.output_gates.len(), expected);
    }

    #[test]
    fn concretization_is_deterministic((src, xi) in any_fixture()) {
        let t = model(src);
        let a = concretize(&t, &xi).unwrap();
        let b = concretize(&t, &xi).unwrap();
        prop_assert_eq!(instance_to_json(&a.san, &a.warnings), instance_to_json(&b.san, &b.warnings));
    }

    #[test]
    fn projection_commutes((src, xi) in any_fixture()) {
        let checked = check_commutation(&model(src), &xi, 300).map_err(TestCaseError::fail)?;
        prop_assert!(checked > 0);
    }

    #[test]
    fn firing_is_guarded((src, xi) in any_fixture(), values in vec(0u64..3, 16)) {
        let san = concretize(&model(src), &xi).unwrap().san;
        let m = Marking(values.iter().copied().cycle().take(san.places.len()).collect());
        for a in 0..san.activities.len() {
            for case in 1..=san.activities[a].cases {
                let r = san.fire(&m, a, case);
                prop_assert_eq!(&r, &san.fire(&m, a, case));
                if !san.is_enabled(&m, a) {
                    let refused = matches!(r, Err(FireError::NotEnabled { .. }));
                    prop_assert!(refused, "{:?}", r);
                }
            }
        }
    }

    #[test]
    fn instances_round_trip_through_json((src, xi) in any_fixture()) {
        let inst = concretize(&model(src), &xi).unwrap();
        let text = instance_to_json(&inst.san, &inst.warnings);
        let (san, warnings) = sant::formats::instance_from_json(&text).unwrap();
        prop_assert_eq!(san, inst.san);
        prop_assert_eq!(warnings, inst.warnings);
    }
}

#[test]
fn fixtures_never_reach_negative_markings() {
    for (name, t, xis) in grid() {
        for xi in xis {
            let san = concretize(&t, &xi).unwrap().san;
            let mut seen = std::collections::HashSet::from([san.initial_marking.clone()]);
            let mut todo = vec![san.initial_marking.clone()];
            while let Some(m) = todo.pop() {
                for a in san.enabled(&m) {
                    for case in san.possible_cases(a) {
                        let next = san.fire(&m, a, case).unwrap_or_else(|e| panic!("{name}: {e} at {m:?}"));
                        if seen.len() < 10_000 && seen.insert(next.clone()) {
                            todo.push(next);
                        }
                    }
                }
            }
        }
    }
}

#[test]
fn templates_round_trip_through_json() {
    for (_, t, _) in grid() {
        assert_eq!(template_from_json(&template_to_json(&t)).unwrap(), t);
    }
}

// ---------------------------------------------------------------------------
// model printing

fn predicate() -> impl Strategy<Value = GatePredicate> {
    let cmp = prop::sample::select(vec![Comparison::Eq, Comparison::Gt, Comparison::Ge]);
    let quantifier = prop_oneof![
        Just(Quantifier::ForAll),
        Just(Quantifier::Exists),
        (1i64..4).prop_map(|i| Quantifier::AtIndex(Term::Int(i))),
    ];
    let atom = (quantifier, prop::sample::select(vec!["Idle", "Req"]), cmp, 0i64..3).prop_map(|(q, p, c, v)| {
        GatePredicate::atom(q, p, c, Term::Int(v))
    });
    let leaf = prop_oneof![Just(GatePredicate::True), Just(GatePredicate::False), atom.clone(), atom];
    leaf.prop_recursive(3, 12, 3, |inner| {
        prop_oneof![
            vec(inner.clone(), 2..4).prop_map(GatePredicate::And),
            vec(inner.clone(), 2..4).prop_map(GatePredicate::Or),
            inner.prop_map(|p| GatePredicate::Not(Box::new(p))),
        ]
    })
}

fn update_rule() -> impl Strategy<Value = UpdateRule> {
    let selector = prop_oneof![
        Just(Selector::All),
        (1i64..4).prop_map(|i| Selector::AtIndex(Term::Int(i))),
        (0i64..3).prop_map(|v| Selector::WhereSatisfied { cmp: Comparison::Ge, value: Term::Int(v) }),
    ];
    let action = prop_oneof![
        (0i64..3).prop_map(|v| Action::SetTo(Term::Int(v))),
        (0i64..3).prop_map(|v| Action::Add(Term::Int(v))),
        (0i64..3).prop_map(|v| Action::Sub(Term::Int(v))),
    ];
    (prop::sample::select(vec!["Idle", "Req"]), selector, action, any::<bool>()).prop_map(|(p, s, a, guarded)| {
        let r = UpdateRule::new(p, s, a);
        if guarded {
            r.when(parse_term("<PLACE> != 1").unwrap())
        } else {
            r
        }
    })
}

proptest! {
    #[test]
    fn gate_blocks_round_trip(p in predicate(), rules in vec(update_rule(), 0..4)) {
        let mut t = model(USER_SANT);
        t.input_gates.push(InputGateTemplate {
            name: "Extra".into(),
            activity: "Request".into(),
            places: vec!["Idle".into(), "Req".into()],
            predicate: p,
            function: GateFunction::new(rules),
            origin: GateOrigin::Gate,
        });
        let text = print_model(&t);
        let back = parse_model(&text).map_err(|e| TestCaseError::fail(format!("{e}\n{text}")))?;
        prop_assert_eq!(back, t);
    }
}

// ---------------------------------------------------------------------------
// simulation

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn simulation_is_reproducible(seed in any::<u64>(), xi in geo_assignment()) {
        let san = concretize(&model(GEO_SANT), &xi).unwrap().san;
        let cfg = SimConfig { seed, horizon: 50.0, replications: 4, ..SimConfig::default() };
        let rewards = [RewardSpec::at_least("GEO_1", 1), RewardSpec::throughput("GEO_R")];
        prop_assert_eq!(simulate(&san, &cfg, &rewards).unwrap(), simulate(&san, &cfg, &rewards).unwrap());
    }

    #[test]
    fn geo_components_stay_binary(seed in any::<u64>(), xi in geo_assignment()) {
        let san = concretize(&model(GEO_SANT), &xi).unwrap().san;
        let working: Vec<usize> = (0..san.places.len()).filter(|&i| san.places[i].template == "Working_S").collect();
        let geo = san.place_id("GEO_1").unwrap();
        let bad = Mutex::new(Vec::new());
        let cfg = SimConfig { seed, horizon: 30.0, replications: 3, ..SimConfig::default() };
        simulate_observed(&san, &cfg, &[], |v| {
            let w: Vec<u64> = working.iter().map(|&i| v.marking.tokens(i)).collect();
            let ok = w.iter().all(|&x| x <= 1) && w.iter().all(|&x| x == w[0]) && v.marking.tokens(geo) + w[0] == 1;
            if !ok {
                bad.lock().unwrap().push(v.marking.clone());
            }
        })
        .unwrap();
        let bad = bad.into_inner().unwrap();
        prop_assert!(bad.is_empty(), "{:?}", bad);
    }

    #[test]
    fn markings_are_stable_when_time_advances(seed in any::<u64>(), routes in 1usize..4) {
        let src = "
template Router;
param r : OrderedSet<Int>;
place Queue;
place Out [r];
activity Arrive timed { time exponential(3.0); }
activity Route instantaneous {
    cases |r|;
    prob <CASE> <= |r| : 1.0 / to_real(|r|);
}
activity Serve timed { time exponential(1.0); }
arc Arrive -> Queue;
arc Queue -> Route;
output ToOut -> Route { Out[r[<CASE>]] += 1; }
input Drain -> Serve { enable exists Out >= 1; Out where >= 1 -= 1; }
init Queue = 0;
init Out = 0;
";
        let xi = Assignment::new().with("r", Value::IntSeq((1..=routes as i64).collect()));
        let san = concretize(&parse_model(src).unwrap(), &xi).unwrap().san;
        let unstable = Mutex::new(0usize);
        let advances = Mutex::new(0usize);
        let cfg = SimConfig { seed, horizon: 20.0, replications: 2, ..SimConfig::default() };
        simulate_observed(&san, &cfg, &[RewardSpec::tokens("Queue_1")], |v| {
            if v.kind == VisitKind::Advance {
                *advances.lock().unwrap() += 1;
                if !san.is_stable(v.marking) {
                    *unstable.lock().unwrap() += 1;
                }
            }
        })
        .unwrap();
        prop_assert_eq!(unstable.into_inner().unwrap(), 0);
        prop_assert!(advances.into_inner().unwrap() > 0);
    }
}

#[test]
fn replications_use_distinct_streams() {
    let san = concretize(&model(GEO_SANT), &geo(&[1, 2], 1.0, 1.0)).unwrap().san;
    let cfg = SimConfig { seed: 7, horizon: 100.0, replications: 16, ..SimConfig::default() };
    let r = simulate(&san, &cfg, &[RewardSpec::at_least("GEO_1", 1)]).unwrap();
    let distinct: BTreeSet<u64> = r.rewards[0].samples.iter().map(|x| x.to_bits()).collect();
    assert_eq!(distinct.len(), 16);
}
