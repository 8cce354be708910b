//! The SAN template data model.
//!
//! A [`SanTemplate`] holds parameters, place templates, activity templates,
//! input and output gate templates and an initial marking template. Gate
//! behaviour is described by a closed rule language ([`GatePredicate`] and
//! [`GateFunction`]) so that templates can be checked, serialized and
//! concretized without running user code.

mod fixtures;
mod marking;
mod validate;

use serde::{Deserialize, Serialize};

use crate::terms::{ParamDecls, Term};

pub use fixtures::{build_geo_template, build_tmi_template, build_user_template};
pub use marking::{MarkingError, MarkingTemplateFn, TemplateMarking};
pub use validate::validate_template;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ActivityKind {
    Timed,
    Instantaneous,
}

/// A named place expanded into one concrete place per index of its multiplicity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlaceTemplate {
    pub name: String,
    /// `OrderedSet<Int>` term; `{1}` for an ordinary place.
    pub multiplicity: Term,
}

impl PlaceTemplate {
    pub fn new(name: impl Into<String>, multiplicity: Term) -> Self {
        PlaceTemplate { name: name.into(), multiplicity }
    }

    /// A place with multiplicity `{1}`.
    pub fn single(name: impl Into<String>) -> Self {
        Self::new(name, Term::int_set([1]))
    }

    /// True if the multiplicity is syntactically `{1}`.
    pub fn is_unary(&self) -> bool {
        self.multiplicity == Term::int_set([1])
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum DistributionSpec {
    Exponential { rate: Term },
    Uniform { low: Term, high: Term },
    Deterministic { delay: Term },
}

impl DistributionSpec {
    pub fn terms(&self) -> Vec<&Term> {
        match self {
            DistributionSpec::Exponential { rate } => vec![rate],
            DistributionSpec::Uniform { low, high } => vec![low, high],
            DistributionSpec::Deterministic { delay } => vec![delay],
        }
    }

    pub fn family(&self) -> &'static str {
        match self {
            DistributionSpec::Exponential { .. } => "exponential",
            DistributionSpec::Uniform { .. } => "uniform",
            DistributionSpec::Deterministic { .. } => "deterministic",
        }
    }
}

/// One entry of a case distribution: for case indices where `guard` holds,
/// the probability is `probability`. The first matching entry wins; cases
/// matched by no entry have probability zero.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CaseProbability {
    /// Bool term over `<CASE>` and parameters.
    pub guard: Term,
    /// Real term over `<CASE>` and parameters.
    pub probability: Term,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CaseDistribution {
    pub entries: Vec<CaseProbability>,
}

impl CaseDistribution {
    /// Probability 1 on case 1.
    pub fn single() -> Self {
        CaseDistribution {
            entries: vec![CaseProbability { guard: Term::eq(Term::case(), Term::Int(1)), probability: Term::Real(1.0) }],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum ReactivationSpec {
    Empty,
    /// Non-empty reactivation markings: representable, not executable.
    Unsupported(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ActivityTemplate {
    pub name: String,
    pub kind: ActivityKind,
    /// Int term giving the number of cases.
    pub cases: Term,
    pub time: Option<DistributionSpec>,
    pub case_distribution: CaseDistribution,
    pub reactivation: ReactivationSpec,
}

impl ActivityTemplate {
    pub fn timed(name: impl Into<String>, time: DistributionSpec) -> Self {
        ActivityTemplate {
            name: name.into(),
            kind: ActivityKind::Timed,
            cases: Term::Int(1),
            time: Some(time),
            case_distribution: CaseDistribution::single(),
            reactivation: ReactivationSpec::Empty,
        }
    }

    pub fn instantaneous(name: impl Into<String>) -> Self {
        ActivityTemplate {
            name: name.into(),
            kind: ActivityKind::Instantaneous,
            cases: Term::Int(1),
            time: None,
            case_distribution: CaseDistribution::single(),
            reactivation: ReactivationSpec::Empty,
        }
    }

    pub fn with_cases(mut self, cases: Term, distribution: CaseDistribution) -> Self {
        self.cases = cases;
        self.case_distribution = distribution;
        self
    }

    /// True if the case count depends on parameters.
    pub fn has_variable_cases(&self) -> bool {
        !self.cases.is_ground()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Comparison {
    Eq,
    Gt,
    Ge,
}

impl Comparison {
    pub fn holds(self, lhs: i64, rhs: i64) -> bool {
        match self {
            Comparison::Eq => lhs == rhs,
            Comparison::Gt => lhs > rhs,
            Comparison::Ge => lhs >= rhs,
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            Comparison::Eq => "=",
            Comparison::Gt => ">",
            Comparison::Ge => ">=",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Quantifier {
    ForAll,
    Exists,
    /// The instance whose index equals the term.
    AtIndex(Term),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum GatePredicate {
    True,
    False,
    Atom {
        quantifier: Quantifier,
        place: String,
        cmp: Comparison,
        /// Int term; may use `<PLACE>` for the instance being tested.
        value: Term,
    },
    And(Vec<GatePredicate>),
    Or(Vec<GatePredicate>),
    Not(Box<GatePredicate>),
}

impl GatePredicate {
    pub fn atom(quantifier: Quantifier, place: impl Into<String>, cmp: Comparison, value: Term) -> Self {
        GatePredicate::Atom { quantifier, place: place.into(), cmp, value }
    }

    /// Places referenced by atoms, in first-occurrence order.
    pub fn places(&self) -> Vec<&str> {
        let mut out = Vec::new();
        self.collect_places(&mut out);
        out
    }

    fn collect_places<'a>(&'a self, out: &mut Vec<&'a str>) {
        match self {
            GatePredicate::Atom { place, .. } => {
                if !out.contains(&place.as_str()) {
                    out.push(place);
                }
            }
            GatePredicate::And(v) | GatePredicate::Or(v) => v.iter().for_each(|p| p.collect_places(out)),
            GatePredicate::Not(p) => p.collect_places(out),
            GatePredicate::True | GatePredicate::False => {}
        }
    }

    pub fn terms(&self) -> Vec<&Term> {
        let mut out = Vec::new();
        self.collect_terms(&mut out);
        out
    }

    fn collect_terms<'a>(&'a self, out: &mut Vec<&'a Term>) {
        match self {
            GatePredicate::Atom { quantifier, value, .. } => {
                if let Quantifier::AtIndex(t) = quantifier {
                    out.push(t);
                }
                out.push(value);
            }
            GatePredicate::And(v) | GatePredicate::Or(v) => v.iter().for_each(|p| p.collect_terms(out)),
            GatePredicate::Not(p) => p.collect_terms(out),
            GatePredicate::True | GatePredicate::False => {}
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Selector {
    All,
    /// The instance whose index equals the term.
    AtIndex(Term),
    /// Instances whose current marking satisfies the comparison.
    WhereSatisfied { cmp: Comparison, value: Term },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Action {
    SetTo(Term),
    Add(Term),
    Sub(Term),
}

impl Action {
    pub fn term(&self) -> &Term {
        match self {
            Action::SetTo(t) | Action::Add(t) | Action::Sub(t) => t,
        }
    }

    /// Applies the action to a token count. `None` on underflow or overflow.
    pub fn apply(&self, current: u64, amount: i64) -> Option<u64> {
        let cur = i128::from(current);
        let amount = i128::from(amount);
        let next = match self {
            Action::SetTo(_) => amount,
            Action::Add(_) => cur + amount,
            Action::Sub(_) => cur - amount,
        };
        u64::try_from(next).ok()
    }
}

/// One marking update. Rules of a gate run in declaration order; a rule
/// visits the selected instances of `place` in index order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UpdateRule {
    pub place: String,
    pub selector: Selector,
    pub action: Action,
    /// Optional Bool term (may use `<CASE>` and `<PLACE>`); the rule only
    /// touches instances for which it holds.
    pub guard: Option<Term>,
}

impl UpdateRule {
    pub fn new(place: impl Into<String>, selector: Selector, action: Action) -> Self {
        UpdateRule { place: place.into(), selector, action, guard: None }
    }

    pub fn when(mut self, guard: Term) -> Self {
        self.guard = Some(guard);
        self
    }

    pub fn terms(&self) -> Vec<&Term> {
        let mut out = Vec::new();
        match &self.selector {
            Selector::All => {}
            Selector::AtIndex(t) => out.push(t),
            Selector::WhereSatisfied { value, .. } => out.push(value),
        }
        out.push(self.action.term());
        if let Some(g) = &self.guard {
            out.push(g);
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct GateFunction {
    pub rules: Vec<UpdateRule>,
}

impl GateFunction {
    pub fn new(rules: Vec<UpdateRule>) -> Self {
        GateFunction { rules }
    }

    pub fn identity() -> Self {
        GateFunction::default()
    }
}

/// How a gate was written: as a gate block or as an arc with a label.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum GateOrigin {
    Gate,
    Arc { place: String, label: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InputGateTemplate {
    pub name: String,
    /// The activity template this gate is attached to.
    pub activity: String,
    pub places: Vec<String>,
    pub predicate: GatePredicate,
    pub function: GateFunction,
    pub origin: GateOrigin,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutputGateTemplate {
    pub name: String,
    /// The activity template this gate is attached to; it expands to one
    /// concrete gate per case.
    pub activity: String,
    pub places: Vec<String>,
    pub function: GateFunction,
    pub origin: GateOrigin,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SanTemplate {
    pub name: String,
    pub parameters: ParamDecls,
    pub places: Vec<PlaceTemplate>,
    pub activities: Vec<ActivityTemplate>,
    pub input_gates: Vec<InputGateTemplate>,
    pub output_gates: Vec<OutputGateTemplate>,
    pub initial_marking: TemplateMarking,
}

impl SanTemplate {
    pub fn new(name: impl Into<String>) -> Self {
        SanTemplate {
            name: name.into(),
            parameters: ParamDecls::new(),
            places: Vec::new(),
            activities: Vec::new(),
            input_gates: Vec::new(),
            output_gates: Vec::new(),
            initial_marking: TemplateMarking::default(),
        }
    }

    pub fn place(&self, name: &str) -> Option<&PlaceTemplate> {
        self.places.iter().find(|p| p.name == name)
    }

    pub fn activity(&self, name: &str) -> Option<&ActivityTemplate> {
        self.activities.iter().find(|a| a.name == name)
    }

    pub fn input_gates_of<'a>(&'a self, activity: &'a str) -> impl Iterator<Item = &'a InputGateTemplate> + 'a {
        self.input_gates.iter().filter(move |g| g.activity == activity)
    }

    pub fn output_gates_of<'a>(&'a self, activity: &'a str) -> impl Iterator<Item = &'a OutputGateTemplate> + 'a {
        self.output_gates.iter().filter(move |g| g.activity == activity)
    }
}
