//! Discrete-event simulation of concrete SANs.
//!
//! Each replication runs on its own ChaCha8 stream (`seed`, stream =
//! replication index), so results do not depend on thread scheduling.
//! Timed activities follow the enabling-memory policy: a firing time is
//! sampled when the activity becomes enabled in a stable marking and is
//! discarded if the activity is disabled before it fires. Instantaneous
//! activities fire before time advances; when several are enabled one is
//! chosen uniformly at random. Timed events with equal times fire in the
//! order they were scheduled.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::diag::{has_errors, Diagnostic};
use crate::san::{validate_san, ConcreteSan, Distribution, FireError, Marking, DEFAULT_STABILITY_DEPTH};
use crate::template::ReactivationSpec;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub seed: u64,
    /// Simulated time per replication.
    pub horizon: f64,
    pub replications: usize,
    /// Per-replication bound on the number of firings.
    pub max_events: u64,
    /// Longest tolerated chain of instantaneous firings between time advances.
    pub max_instantaneous_chain: usize,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            seed: 1,
            horizon: 1000.0,
            replications: 10,
            max_events: 10_000_000,
            max_instantaneous_chain: DEFAULT_STABILITY_DEPTH,
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<(), SimError> {
        if !(self.horizon.is_finite() && self.horizon > 0.0) {
            return Err(SimError::InvalidConfig(format!("horizon must be positive, got {}", self.horizon)));
        }
        if self.replications == 0 {
            return Err(SimError::InvalidConfig("at least one replication is required".into()));
        }
        if self.max_events == 0 || self.max_instantaneous_chain == 0 {
            return Err(SimError::InvalidConfig("event limits must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum RewardKind {
    /// Time-averaged number of tokens in a place.
    TimeAveragedTokens { place: String },
    /// Firings per unit time.
    Throughput { activity: String },
    /// Fraction of time a place holds at least `n` tokens.
    ProbabilityTokensAtLeast { place: String, n: u64 },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RewardSpec {
    pub name: String,
    pub kind: RewardKind,
}

impl RewardSpec {
    pub fn tokens(place: &str) -> Self {
        RewardKind::TimeAveragedTokens { place: place.into() }.into()
    }

    pub fn throughput(activity: &str) -> Self {
        RewardKind::Throughput { activity: activity.into() }.into()
    }

    pub fn at_least(place: &str, n: u64) -> Self {
        RewardKind::ProbabilityTokensAtLeast { place: place.into(), n }.into()
    }

    pub fn named(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }
}

impl From<RewardKind> for RewardSpec {
    fn from(kind: RewardKind) -> Self {
        RewardSpec { name: kind.to_string(), kind }
    }
}

impl fmt::Display for RewardKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RewardKind::TimeAveragedTokens { place } => write!(f, "tokens({place})"),
            RewardKind::Throughput { activity } => write!(f, "throughput({activity})"),
            RewardKind::ProbabilityTokensAtLeast { place, n } => write!(f, "prob({place}>={n})"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("invalid reward `{0}`; expected tokens(PLACE), throughput(ACTIVITY) or prob(PLACE>=N), optionally prefixed by NAME=")]
pub struct RewardParseError(pub String);

impl FromStr for RewardSpec {
    type Err = RewardParseError;

    /// Parses `tokens(P)`, `throughput(A)` or `prob(P>=n)`, optionally written `name=...`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let err = || RewardParseError(s.to_string());
        let (name, body) = match s.split_once('=') {
            Some((n, b)) if !n.contains('(') => (Some(n.trim()), b.trim()),
            _ => (None, s.trim()),
        };
        let (func, rest) = body.split_once('(').ok_or_else(err)?;
        let arg = rest.strip_suffix(')').ok_or_else(err)?.trim();
        if arg.is_empty() {
            return Err(err());
        }
        let kind = match func.trim() {
            "tokens" => RewardKind::TimeAveragedTokens { place: arg.into() },
            "throughput" => RewardKind::Throughput { activity: arg.into() },
            "prob" => {
                let (place, n) = arg.split_once(">=").ok_or_else(err)?;
                let n = n.trim().parse().map_err(|_| err())?;
                RewardKind::ProbabilityTokensAtLeast { place: place.trim().into(), n }
            }
            _ => return Err(err()),
        };
        let mut spec = RewardSpec::from(kind);
        if let Some(n) = name.filter(|n| !n.is_empty()) {
            spec.name = n.to_string();
        }
        Ok(spec)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RewardEstimate {
    pub name: String,
    /// Mean over replications.
    pub estimate: f64,
    /// Sample standard deviation over replications (zero for one replication).
    pub std: f64,
    pub replications: usize,
    /// Per-replication values.
    pub samples: Vec<f64>,
}

impl RewardEstimate {
    /// Standard error of the mean.
    pub fn std_error(&self) -> f64 {
        self.std / (self.replications as f64).sqrt()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunStats {
    /// Activity firings, timed and instantaneous.
    pub events: u64,
    /// Time of the last firing, zero if nothing fired.
    pub end_time: f64,
    /// `case_counts[a][c - 1]`: firings of activity `a` with case `c`.
    pub case_counts: Vec<Vec<u64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimResult {
    pub rewards: Vec<RewardEstimate>,
    pub runs: Vec<RunStats>,
}

impl SimResult {
    pub fn reward(&self, name: &str) -> Option<&RewardEstimate> {
        self.rewards.iter().find(|r| r.name == name)
    }

    /// Case counts of `activity` summed over all replications.
    pub fn total_case_counts(&self, activity: usize) -> Vec<u64> {
        let mut out: Vec<u64> = Vec::new();
        for run in &self.runs {
            let counts = &run.case_counts[activity];
            out.resize(out.len().max(counts.len()), 0);
            for (o, c) in out.iter_mut().zip(counts) {
                *o += c;
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SimError {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("reward `{reward}` refers to unknown {what} `{name}`")]
    UnknownElement { reward: String, what: &'static str, name: String },
    #[error("activity `{0}` has reactivation markings, which the simulator does not support")]
    UnsupportedReactivation(String),
    #[error("the SAN has validation errors: {}", .0.iter().filter(|d| d.is_error()).map(|d| d.to_string()).collect::<Vec<_>>().join("; "))]
    InvalidSan(Vec<Diagnostic>),
    #[error("invalid distribution parameter: {0}")]
    InvalidParameter(String),
    #[error("replication {replication} exceeded {limit} events")]
    MaxEventsExceeded { replication: usize, limit: u64 },
    #[error("replication {replication}: more than {limit} consecutive instantaneous firings at time {time}")]
    NonStabilizingDetected { replication: usize, limit: usize, time: f64 },
    #[error("replication {replication}: {source}")]
    Fire { replication: usize, source: FireError },
}

/// Draws a firing delay.
pub fn sample_firing_time<R: Rng + ?Sized>(dist: &Distribution, rng: &mut R) -> Result<f64, SimError> {
    dist.check().map_err(SimError::InvalidParameter)?;
    Ok(match *dist {
        Distribution::Exponential { rate } => -(1.0 - rng.gen::<f64>()).ln() / rate,
        Distribution::Uniform { low, high } => low + (high - low) * rng.gen::<f64>(),
        Distribution::Deterministic { delay } => delay,
    })
}

/// Picks a 1-based case by inverting the cumulative distribution of `probs`.
pub fn select_case<R: Rng + ?Sized>(probs: &[f64], rng: &mut R) -> usize {
    if probs.len() <= 1 {
        return 1;
    }
    let u = rng.gen::<f64>();
    let mut cum = 0.0;
    for (i, p) in probs.iter().enumerate() {
        cum += p;
        if u < cum {
            return i + 1;
        }
    }
    // rounding left `u` above the total; take the last possible case
    probs.iter().rposition(|p| *p > 0.0).map_or(1, |i| i + 1)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum VisitKind {
    /// The initial marking, before any firing.
    Initial,
    /// Time is about to advance past this marking.
    Advance,
    /// The marking right after a firing.
    Fired { activity: usize, case: usize },
}

/// A marking visited during a replication, reported to observers.
#[derive(Debug, Clone, Copy)]
pub struct Visit<'a> {
    pub replication: usize,
    pub time: f64,
    pub marking: &'a Marking,
    pub kind: VisitKind,
}

/// Runs all replications and aggregates the rewards.
pub fn simulate(san: &ConcreteSan, cfg: &SimConfig, rewards: &[RewardSpec]) -> Result<SimResult, SimError> {
    simulate_observed(san, cfg, rewards, |_| {})
}

/// Like [`simulate`], calling `observer` for every visited marking.
pub fn simulate_observed<F>(
    san: &ConcreteSan,
    cfg: &SimConfig,
    rewards: &[RewardSpec],
    observer: F,
) -> Result<SimResult, SimError>
where
    F: Fn(&Visit<'_>) + Sync,
{
    cfg.validate()?;
    let diags = validate_san(san);
    if has_errors(&diags) {
        return Err(SimError::InvalidSan(diags));
    }
    if let Some(a) = san.activities.iter().find(|a| matches!(a.reactivation, ReactivationSpec::Unsupported(_))) {
        return Err(SimError::UnsupportedReactivation(a.name.clone()));
    }
    let probes = rewards.iter().map(|r| Probe::new(san, r)).collect::<Result<Vec<_>, _>>()?;

    let outcomes: Vec<Result<(Vec<f64>, RunStats), SimError>> = (0..cfg.replications)
        .into_par_iter()
        .map(|rep| Replication::new(san, cfg, &probes, rep).run(&observer))
        .collect();

    let mut samples = vec![Vec::with_capacity(cfg.replications); rewards.len()];
    let mut runs = Vec::with_capacity(cfg.replications);
    for outcome in outcomes {
        let (values, stats) = outcome?;
        for (s, v) in samples.iter_mut().zip(values) {
            s.push(v);
        }
        runs.push(stats);
    }
    let rewards = rewards
        .iter()
        .zip(samples)
        .map(|(r, samples)| {
            let n = samples.len() as f64;
            let mean = samples.iter().sum::<f64>() / n;
            let std = if samples.len() > 1 {
                (samples.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
            } else {
                0.0
            };
            RewardEstimate { name: r.name.clone(), estimate: mean, std, replications: samples.len(), samples }
        })
        .collect();
    Ok(SimResult { rewards, runs })
}

/// A reward resolved against the SAN's element ids.
#[derive(Debug, Clone, Copy)]
enum Probe {
    Tokens(usize),
    Throughput(usize),
    AtLeast(usize, u64),
}

impl Probe {
    fn new(san: &ConcreteSan, r: &RewardSpec) -> Result<Self, SimError> {
        let place = |name: &str| {
            san.place_id(name).ok_or_else(|| SimError::UnknownElement {
                reward: r.name.clone(),
                what: "place",
                name: name.to_string(),
            })
        };
        Ok(match &r.kind {
            RewardKind::TimeAveragedTokens { place: p } => Probe::Tokens(place(p)?),
            RewardKind::ProbabilityTokensAtLeast { place: p, n } => Probe::AtLeast(place(p)?, *n),
            RewardKind::Throughput { activity } => Probe::Throughput(san.activity_id(activity).ok_or_else(|| {
                SimError::UnknownElement { reward: r.name.clone(), what: "activity", name: activity.clone() }
            })?),
        })
    }

    fn rate(&self, m: &Marking) -> f64 {
        match *self {
            Probe::Tokens(p) => m.tokens(p) as f64,
            Probe::AtLeast(p, n) => f64::from(u8::from(m.tokens(p) >= n)),
            Probe::Throughput(_) => 0.0,
        }
    }
}

struct Replication<'a> {
    san: &'a ConcreteSan,
    cfg: &'a SimConfig,
    probes: &'a [Probe],
    rep: usize,
    rng: ChaCha8Rng,
    marking: Marking,
    time: f64,
    /// Scheduled `(time, sequence number)` per timed activity.
    schedule: Vec<Option<(f64, u64)>>,
    seq: u64,
    integrals: Vec<f64>,
    firings: Vec<u64>,
    stats: RunStats,
}

impl<'a> Replication<'a> {
    fn new(san: &'a ConcreteSan, cfg: &'a SimConfig, probes: &'a [Probe], rep: usize) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        rng.set_stream(rep as u64);
        Replication {
            san,
            cfg,
            probes,
            rep,
            rng,
            marking: san.initial_marking.clone(),
            time: 0.0,
            schedule: vec![None; san.activities.len()],
            seq: 0,
            integrals: vec![0.0; probes.len()],
            firings: vec![0; san.activities.len()],
            stats: RunStats {
                events: 0,
                end_time: 0.0,
                case_counts: san.activities.iter().map(|a| vec![0; a.cases]).collect(),
            },
        }
    }

    fn run(mut self, observer: &impl Fn(&Visit<'_>)) -> Result<(Vec<f64>, RunStats), SimError> {
        let horizon = self.cfg.horizon;
        self.observe(observer, VisitKind::Initial);
        self.stabilize(observer)?;
        loop {
            self.reschedule()?;
            let next = self
                .schedule
                .iter()
                .enumerate()
                .filter_map(|(a, s)| s.map(|(t, q)| (t, q, a)))
                .min_by(|x, y| x.0.total_cmp(&y.0).then(x.1.cmp(&y.1)));
            let until = next.map_or(horizon, |(t, _, _)| t.min(horizon));
            self.accumulate(until);
            let Some((t, _, activity)) = next.filter(|(t, _, _)| *t <= horizon) else { break };
            self.observe(observer, VisitKind::Advance);
            self.time = t;
            self.schedule[activity] = None;
            self.fire(activity, observer)?;
            self.stabilize(observer)?;
        }
        let values = self
            .probes
            .iter()
            .zip(&self.integrals)
            .map(|(p, integral)| match *p {
                Probe::Throughput(a) => self.firings[a] as f64 / horizon,
                _ => integral / horizon,
            })
            .collect();
        Ok((values, self.stats))
    }

    fn observe(&self, observer: &impl Fn(&Visit<'_>), kind: VisitKind) {
        observer(&Visit { replication: self.rep, time: self.time, marking: &self.marking, kind });
    }

    fn accumulate(&mut self, until: f64) {
        let dt = until - self.time;
        if dt > 0.0 {
            for (acc, p) in self.integrals.iter_mut().zip(self.probes) {
                *acc += p.rate(&self.marking) * dt;
            }
        }
        self.time = until;
    }

    fn fire(&mut self, activity: usize, observer: &impl Fn(&Visit<'_>)) -> Result<(), SimError> {
        let case = select_case(&self.san.activities[activity].case_probs, &mut self.rng);
        self.marking = self
            .san
            .fire(&self.marking, activity, case)
            .map_err(|source| SimError::Fire { replication: self.rep, source })?;
        self.stats.events += 1;
        self.stats.end_time = self.time;
        self.stats.case_counts[activity][case - 1] += 1;
        self.firings[activity] += 1;
        if self.stats.events > self.cfg.max_events {
            return Err(SimError::MaxEventsExceeded { replication: self.rep, limit: self.cfg.max_events });
        }
        self.observe(observer, VisitKind::Fired { activity, case });
        // enabling memory: a disabled activity loses its sampled time
        for (a, slot) in self.schedule.iter_mut().enumerate() {
            if slot.is_some() && !self.san.is_enabled(&self.marking, a) {
                *slot = None;
            }
        }
        Ok(())
    }

    fn stabilize(&mut self, observer: &impl Fn(&Visit<'_>)) -> Result<(), SimError> {
        let mut chain = 0;
        loop {
            let enabled: Vec<usize> = (0..self.san.activities.len())
                .filter(|&a| !self.san.activities[a].is_timed() && self.san.is_enabled(&self.marking, a))
                .collect();
            if enabled.is_empty() {
                return Ok(());
            }
            chain += 1;
            if chain > self.cfg.max_instantaneous_chain {
                return Err(SimError::NonStabilizingDetected {
                    replication: self.rep,
                    limit: self.cfg.max_instantaneous_chain,
                    time: self.time,
                });
            }
            let pick = if enabled.len() == 1 { enabled[0] } else { enabled[self.rng.gen_range(0..enabled.len())] };
            self.fire(pick, observer)?;
        }
    }

    /// Samples firing times for timed activities that are enabled but unscheduled.
    fn reschedule(&mut self) -> Result<(), SimError> {
        for (a, act) in self.san.activities.iter().enumerate() {
            if !act.is_timed() || self.schedule[a].is_some() || !self.san.is_enabled(&self.marking, a) {
                continue;
            }
            let dist = act.time.as_ref().expect("validated timed activity");
            let delay = sample_firing_time(dist, &mut self.rng)?;
            self.schedule[a] = Some((self.time + delay, self.seq));
            self.seq += 1;
        }
        Ok(())
    }
}
