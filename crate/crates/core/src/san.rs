//! Ordinary (concrete) stochastic activity networks.
//!
//! Places are plain token counters, gates are fully evaluated predicates and
//! update lists, and every activity carries its own case probabilities and
//! firing-time distribution. Firing applies the input gates of the activity
//! in declaration order, then the output gates of the chosen case, also in
//! declaration order.

use std::collections::{HashMap, HashSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::diag::{Diagnostic, DiagnosticKind as K};
use crate::template::{ActivityKind, Comparison, ReactivationSpec};

/// Default depth of the instantaneous-chain search.
pub const DEFAULT_STABILITY_DEPTH: usize = 10_000;

/// Tolerance on the sum of case probabilities.
pub const PROBABILITY_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Place {
    pub name: String,
    /// Place template this place was expanded from.
    pub template: String,
    /// Index within the template's multiplicity.
    pub index: i64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Distribution {
    Exponential { rate: f64 },
    Uniform { low: f64, high: f64 },
    Deterministic { delay: f64 },
}

impl Distribution {
    /// Checks rate > 0, low <= high, delay >= 0 and finiteness.
    pub fn check(&self) -> Result<(), String> {
        match *self {
            Distribution::Exponential { rate } if !(rate.is_finite() && rate > 0.0) => {
                Err(format!("exponential rate must be positive, got {rate}"))
            }
            Distribution::Uniform { low, high } if !(low.is_finite() && high.is_finite() && low <= high && low >= 0.0) => {
                Err(format!("uniform bounds must satisfy 0 <= low <= high, got [{low}, {high}]"))
            }
            Distribution::Deterministic { delay } if !(delay.is_finite() && delay >= 0.0) => {
                Err(format!("deterministic delay must be nonnegative, got {delay}"))
            }
            _ => Ok(()),
        }
    }

    pub fn mean(&self) -> f64 {
        match *self {
            Distribution::Exponential { rate } => 1.0 / rate,
            Distribution::Uniform { low, high } => (low + high) / 2.0,
            Distribution::Deterministic { delay } => delay,
        }
    }
}

impl fmt::Display for Distribution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Distribution::Exponential { rate } => write!(f, "exponential({rate:?})"),
            Distribution::Uniform { low, high } => write!(f, "uniform({low:?}, {high:?})"),
            Distribution::Deterministic { delay } => write!(f, "deterministic({delay:?})"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Activity {
    pub name: String,
    pub kind: ActivityKind,
    pub cases: usize,
    /// Probability of case `i` at position `i - 1`.
    pub case_probs: Vec<f64>,
    pub time: Option<Distribution>,
    pub reactivation: ReactivationSpec,
}

impl Activity {
    pub fn is_timed(&self) -> bool {
        self.kind == ActivityKind::Timed
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Predicate {
    True,
    False,
    /// `marking(place) cmp value`
    Cmp { place: usize, cmp: Comparison, value: i64 },
    And(Vec<Predicate>),
    Or(Vec<Predicate>),
    Not(Box<Predicate>),
}

impl Predicate {
    pub fn holds(&self, m: &Marking) -> bool {
        match self {
            Predicate::True => true,
            Predicate::False => false,
            Predicate::Cmp { place, cmp, value } => {
                cmp.holds(saturate(m.0[*place]), *value)
            }
            Predicate::And(ps) => ps.iter().all(|p| p.holds(m)),
            Predicate::Or(ps) => ps.iter().any(|p| p.holds(m)),
            Predicate::Not(p) => !p.holds(m),
        }
    }

    fn places(&self, out: &mut Vec<usize>) {
        match self {
            Predicate::Cmp { place, .. } => out.push(*place),
            Predicate::And(ps) | Predicate::Or(ps) => ps.iter().for_each(|p| p.places(out)),
            Predicate::Not(p) => p.places(out),
            Predicate::True | Predicate::False => {}
        }
    }
}

fn saturate(tokens: u64) -> i64 {
    i64::try_from(tokens).unwrap_or(i64::MAX)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum UpdateKind {
    Set,
    Add,
    Sub,
}

/// A single marking update on one place.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Update {
    pub place: usize,
    pub kind: UpdateKind,
    pub amount: i64,
    /// Only applied if the place's current marking satisfies this comparison.
    pub condition: Option<(Comparison, i64)>,
}

impl Update {
    fn apply(&self, m: &mut Marking) -> Result<(), i128> {
        let cur = m.0[self.place];
        if let Some((cmp, v)) = self.condition {
            if !cmp.holds(saturate(cur), v) {
                return Ok(());
            }
        }
        let cur = i128::from(cur);
        let amount = i128::from(self.amount);
        let next = match self.kind {
            UpdateKind::Set => amount,
            UpdateKind::Add => cur + amount,
            UpdateKind::Sub => cur - amount,
        };
        m.0[self.place] = u64::try_from(next).map_err(|_| next)?;
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InputGate {
    pub name: String,
    pub activity: usize,
    pub places: Vec<usize>,
    pub predicate: Predicate,
    pub updates: Vec<Update>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutputGate {
    pub name: String,
    pub activity: usize,
    /// 1-based case of `activity` this gate belongs to.
    pub case: usize,
    pub places: Vec<usize>,
    pub updates: Vec<Update>,
}

/// A token count per place, indexed like [`ConcreteSan::places`].
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Marking(pub Vec<u64>);

impl Marking {
    pub fn zeros(n: usize) -> Self {
        Marking(vec![0; n])
    }

    pub fn tokens(&self, place: usize) -> u64 {
        self.0[place]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConcreteSan {
    pub name: String,
    pub places: Vec<Place>,
    pub activities: Vec<Activity>,
    pub input_gates: Vec<InputGate>,
    pub output_gates: Vec<OutputGate>,
    pub initial_marking: Marking,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum FireError {
    #[error("activity `{0}` is not enabled")]
    NotEnabled(String),
    #[error("activity `{activity}` has no case {case}")]
    CaseOutOfRange { activity: String, case: usize },
    #[error("gate `{gate}` would leave place `{place}` with {value} tokens")]
    NegativeMarking { gate: String, place: String, value: i128 },
}

impl ConcreteSan {
    pub fn place_id(&self, name: &str) -> Option<usize> {
        self.places.iter().position(|p| p.name == name)
    }

    pub fn activity_id(&self, name: &str) -> Option<usize> {
        self.activities.iter().position(|a| a.name == name)
    }

    pub fn input_gates_of(&self, activity: usize) -> impl Iterator<Item = &InputGate> {
        self.input_gates.iter().filter(move |g| g.activity == activity)
    }

    pub fn output_gates_of(&self, activity: usize, case: usize) -> impl Iterator<Item = &OutputGate> {
        self.output_gates.iter().filter(move |g| g.activity == activity && g.case == case)
    }

    /// True iff every input gate of `activity` holds. An activity without
    /// input gates is always enabled.
    pub fn is_enabled(&self, m: &Marking, activity: usize) -> bool {
        self.input_gates_of(activity).all(|g| g.predicate.holds(m))
    }

    pub fn enabled(&self, m: &Marking) -> Vec<usize> {
        (0..self.activities.len()).filter(|&a| self.is_enabled(m, a)).collect()
    }

    /// Fires `activity` with the given 1-based case.
    pub fn fire(&self, m: &Marking, activity: usize, case: usize) -> Result<Marking, FireError> {
        let act = &self.activities[activity];
        if case == 0 || case > act.cases {
            return Err(FireError::CaseOutOfRange { activity: act.name.clone(), case });
        }
        if !self.is_enabled(m, activity) {
            return Err(FireError::NotEnabled(act.name.clone()));
        }
        let mut next = m.clone();
        for g in self.input_gates_of(activity) {
            self.apply_updates(&g.name, &g.updates, &mut next)?;
        }
        for g in self.output_gates_of(activity, case) {
            self.apply_updates(&g.name, &g.updates, &mut next)?;
        }
        Ok(next)
    }

    fn apply_updates(&self, gate: &str, updates: &[Update], m: &mut Marking) -> Result<(), FireError> {
        for u in updates {
            u.apply(m).map_err(|value| FireError::NegativeMarking {
                gate: gate.to_string(),
                place: self.places[u.place].name.clone(),
                value,
            })?;
        }
        Ok(())
    }

    /// True iff no instantaneous activity is enabled.
    pub fn is_stable(&self, m: &Marking) -> bool {
        self.activities.iter().enumerate().all(|(a, act)| act.is_timed() || !self.is_enabled(m, a))
    }

    /// Cases of `activity` with nonzero probability.
    pub fn possible_cases(&self, activity: usize) -> impl Iterator<Item = usize> + '_ {
        let probs = &self.activities[activity].case_probs;
        (1..=self.activities[activity].cases).filter(move |&c| probs.get(c - 1).is_some_and(|p| *p > 0.0))
    }

    /// Searches for an unbounded chain of instantaneous firings starting at `m`.
    /// Returns a witness chain if a marking repeats along a chain or a chain
    /// reaches `depth` firings.
    pub fn find_instability(&self, m: &Marking, depth: usize) -> Option<Instability> {
        let mut search = StabilitySearch { san: self, depth, done: HashSet::new(), on_path: HashMap::new(), chain: Vec::new() };
        search.dfs(m.clone())
    }

    pub fn summary(&self) -> Summary {
        Summary {
            places: self.places.len(),
            activities: self.activities.len(),
            input_gates: self.input_gates.len(),
            output_gates: self.output_gates.len(),
            total_cases: self.activities.iter().map(|a| a.cases).sum(),
        }
    }
}

/// Element counts of a concrete SAN.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Summary {
    pub places: usize,
    pub activities: usize,
    pub input_gates: usize,
    pub output_gates: usize,
    pub total_cases: usize,
}

impl fmt::Display for Summary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} places, {} activities, {} input gates, {} output gates, {} cases",
            self.places, self.activities, self.input_gates, self.output_gates, self.total_cases
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InstabilityKind {
    /// The last firing returns to a marking already on the chain.
    Cycle,
    /// The chain reached the depth limit.
    DepthExhausted,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Instability {
    pub kind: InstabilityKind,
    /// `(activity, case)` firings, starting from the searched marking.
    pub chain: Vec<(usize, usize)>,
}

struct StabilitySearch<'a> {
    san: &'a ConcreteSan,
    depth: usize,
    /// Markings from which every instantaneous chain is known to terminate.
    done: HashSet<Marking>,
    on_path: HashMap<Marking, usize>,
    chain: Vec<(usize, usize)>,
}

impl StabilitySearch<'_> {
    // Explicit stack: chains may be as deep as the depth limit.
    fn dfs(&mut self, start: Marking) -> Option<Instability> {
        struct Frame {
            marking: Marking,
            moves: Vec<(usize, usize)>,
            next: usize,
        }
        let moves_of = |san: &ConcreteSan, m: &Marking| -> Vec<(usize, usize)> {
            let mut v = Vec::new();
            for (a, act) in san.activities.iter().enumerate() {
                if !act.is_timed() && san.is_enabled(m, a) {
                    v.extend(san.possible_cases(a).map(|c| (a, c)));
                }
            }
            v
        };
        let mut stack = vec![Frame { moves: moves_of(self.san, &start), marking: start.clone(), next: 0 }];
        self.on_path.insert(start, 0);
        while let Some(top) = stack.last_mut() {
            if top.next == top.moves.len() {
                let f = stack.pop().expect("non-empty");
                self.on_path.remove(&f.marking);
                self.done.insert(f.marking);
                self.chain.pop();
                continue;
            }
            let (a, c) = top.moves[top.next];
            top.next += 1;
            // Firing errors make the chain stop; they are reported elsewhere.
            let Ok(next) = self.san.fire(&top.marking, a, c) else { continue };
            self.chain.push((a, c));
            if self.on_path.contains_key(&next) {
                return Some(Instability { kind: InstabilityKind::Cycle, chain: self.chain.clone() });
            }
            if self.chain.len() >= self.depth {
                return Some(Instability { kind: InstabilityKind::DepthExhausted, chain: self.chain.clone() });
            }
            if self.done.contains(&next) {
                self.chain.pop();
                continue;
            }
            self.on_path.insert(next.clone(), stack.len());
            stack.push(Frame { moves: moves_of(self.san, &next), marking: next, next: 0 });
        }
        None
    }
}

/// Well-formedness checks on a concrete SAN.
pub fn validate_san(san: &ConcreteSan) -> Vec<Diagnostic> {
    let mut out = Vec::new();
    let mut seen = HashSet::new();
    for p in &san.places {
        if !seen.insert(p.name.as_str()) {
            out.push(Diagnostic::error(K::DuplicateName, &p.name, "duplicate place name"));
        }
    }
    if san.initial_marking.0.len() != san.places.len() {
        out.push(Diagnostic::error(
            K::MissingInitialMarking,
            &san.name,
            format!("initial marking has {} entries for {} places", san.initial_marking.0.len(), san.places.len()),
        ));
    }
    for a in &san.activities {
        if a.cases == 0 {
            out.push(Diagnostic::error(K::InvalidCaseCount, &a.name, "activity has no cases"));
        }
        if a.case_probs.len() != a.cases {
            out.push(Diagnostic::error(
                K::NormalizationError,
                &a.name,
                format!("{} case probabilities for {} cases", a.case_probs.len(), a.cases),
            ));
        }
        if let Some(p) = a.case_probs.iter().find(|p| !(p.is_finite() && (0.0..=1.0).contains(*p))) {
            out.push(Diagnostic::error(K::NormalizationError, &a.name, format!("case probability {p} outside [0, 1]")));
        }
        let sum: f64 = a.case_probs.iter().sum();
        if (sum - 1.0).abs() > PROBABILITY_TOLERANCE {
            out.push(Diagnostic::error(K::NormalizationError, &a.name, format!("case probabilities sum to {sum}")));
        }
        match (a.kind, &a.time) {
            (ActivityKind::Timed, None) => {
                out.push(Diagnostic::error(K::DistributionMismatch, &a.name, "timed activity without distribution"))
            }
            (ActivityKind::Instantaneous, Some(_)) => out.push(Diagnostic::error(
                K::DistributionMismatch,
                &a.name,
                "instantaneous activity with a time distribution",
            )),
            (_, Some(d)) => {
                if let Err(msg) = d.check() {
                    out.push(Diagnostic::error(K::InvalidDistribution, &a.name, msg));
                }
            }
            _ => {}
        }
        if let ReactivationSpec::Unsupported(desc) = &a.reactivation {
            out.push(Diagnostic::warning(
                K::UnsupportedReactivation,
                &a.name,
                format!("reactivation markings ({desc}) cannot be simulated"),
            ));
        }
    }
    let n_places = san.places.len();
    let check_places = |out: &mut Vec<Diagnostic>, gate: &str, places: &[usize], used: &[usize]| {
        for p in places.iter().chain(used) {
            if *p >= n_places {
                out.push(Diagnostic::error(K::UnknownPlace, gate, format!("place id {p} out of range")));
            }
        }
        for p in used {
            if !places.contains(p) && *p < n_places {
                out.push(Diagnostic::error(K::PlaceOutsideGate, gate, format!("place `{}` not in gate", san.places[*p].name)));
            }
        }
    };
    for g in &san.input_gates {
        if g.activity >= san.activities.len() {
            out.push(Diagnostic::error(K::DanglingGate, &g.name, "input gate attached to missing activity"));
        }
        let mut used = Vec::new();
        g.predicate.places(&mut used);
        used.extend(g.updates.iter().map(|u| u.place));
        check_places(&mut out, &g.name, &g.places, &used);
    }
    for g in &san.output_gates {
        match san.activities.get(g.activity) {
            None => out.push(Diagnostic::error(K::DanglingGate, &g.name, "output gate attached to missing activity")),
            Some(a) if g.case == 0 || g.case > a.cases => out.push(Diagnostic::error(
                K::CaseOutOfRange,
                &g.name,
                format!("mapped to case {} of `{}`, which has {} cases", g.case, a.name, a.cases),
            )),
            Some(_) => {}
        }
        let used: Vec<usize> = g.updates.iter().map(|u| u.place).collect();
        check_places(&mut out, &g.name, &g.places, &used);
    }
    if !crate::diag::has_errors(&out) {
        if let Some(inst) = san.find_instability(&san.initial_marking, DEFAULT_STABILITY_DEPTH) {
            let chain: Vec<String> =
                inst.chain.iter().take(8).map(|(a, c)| format!("{}({c})", san.activities[*a].name)).collect();
            let what = match inst.kind {
                InstabilityKind::Cycle => "cycles",
                InstabilityKind::DepthExhausted => "does not terminate within the depth limit",
            };
            out.push(Diagnostic::warning(
                K::NonStabilizing,
                &san.name,
                format!("instantaneous firing chain {what}: {}", chain.join(" ")),
            ));
        }
    }
    out
}
