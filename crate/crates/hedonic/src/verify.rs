//! Empirical verification: strategyproofness sweeps, acceptability checks,
//! and approximation ratios measured against the exact oracle.
//!
//! Deviations are single-agent full-row replacements: the deviating agent
//! swaps her entire declared valuation row while everybody else stays
//! truthful, and her gain is always measured with her true valuations.
//! Finite classes are swept exhaustively; continuous classes get a grid or
//! sampled search whose verdict is reported as "no violation found" rather
//! than "holds".

use std::collections::BTreeMap;
use std::fmt;

use thiserror::Error;

use crate::GuardError;
use crate::game::{
    Agent, GameKind, Partition, ValuationClass, ValuationProfile, social_welfare, utility,
};
use crate::instances::{GeneratorError, Instance, gen_random};
use crate::mechanisms::{AgentOrdering, MechanismError, MechanismId, run_mechanism};
use crate::oracle::optimal_partition;
use crate::rng::Rng;
use crate::scalar::Scalar;

/// Cap on enumerated rows per agent (and on enumerated profiles).
pub const MAX_ENUMERATION: u64 = 1 << 24;

#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum VerifyError {
    #[error("deviation space over {space} profiles cannot test a {truth} truth")]
    ClassMismatch {
        space: ValuationClass,
        truth: ValuationClass,
    },
    #[error("deviation space is sized for {space} agents, the profile has {profile}")]
    SizeMismatch { space: usize, profile: usize },
    #[error("{mode} deviations are not defined for {class} profiles")]
    UnsupportedMode {
        mode: &'static str,
        class: ValuationClass,
    },
    #[error("grid step must lie in (0, 1], got {0}")]
    BadGridStep(String),
    #[error(transparent)]
    Mechanism(#[from] MechanismError),
    #[error(transparent)]
    Guard(#[from] GuardError),
    #[error(transparent)]
    Generator(#[from] GeneratorError),
}

/// How an agent's alternative declarations are searched.
#[derive(Clone, Debug, PartialEq)]
pub enum DeviationMode<S> {
    /// Every row over the class's value set. Finite classes only.
    Exhaustive,
    /// Multiples of `step` inside the admissible range, plus the range
    /// boundaries and the adversarial magnitudes 1/100 and 9/10.
    Grid { step: S },
    /// `count` seeded rows per agent, entries uniform with denominator ≤ 1000.
    Sampled { count: u64, seed: u64 },
}

/// The set of deviation rows tried for each agent.
#[derive(Clone, Debug, PartialEq)]
pub struct DeviationSpace<S> {
    class: ValuationClass,
    n: usize,
    mode: DeviationMode<S>,
}

fn finite_values<S: Scalar>(class: ValuationClass) -> Vec<S> {
    // Canonical enumeration order: neutral first, then friend, then enemy,
    // so the sweep visits rows closest to the empty declaration first.
    match class {
        ValuationClass::Simple => vec![S::zero(), S::one()],
        ValuationClass::Duplex => vec![S::zero(), S::one(), -S::one()],
        _ => unreachable!("finite_values is only called for finite classes"),
    }
}

impl<S: Scalar> DeviationSpace<S> {
    pub fn exhaustive(class: ValuationClass, n: usize) -> Result<Self, VerifyError> {
        match class {
            ValuationClass::Duplex | ValuationClass::Simple => {}
            other => {
                return Err(VerifyError::UnsupportedMode {
                    mode: "exhaustive",
                    class: other,
                });
            }
        }
        let radix = finite_values::<S>(class).len() as u64;
        check_enumeration_size(radix, n.saturating_sub(1))?;
        Ok(DeviationSpace {
            class,
            n,
            mode: DeviationMode::Exhaustive,
        })
    }

    pub fn grid(class: ValuationClass, n: usize, step: S) -> Result<Self, VerifyError> {
        match class {
            ValuationClass::General | ValuationClass::NonNegative => {}
            other => {
                return Err(VerifyError::UnsupportedMode {
                    mode: "grid",
                    class: other,
                });
            }
        }
        if !(step > S::zero() && step <= S::one()) {
            return Err(VerifyError::BadGridStep(step.to_string()));
        }
        let space = DeviationSpace {
            class,
            n,
            mode: DeviationMode::Grid { step },
        };
        check_enumeration_size(space.grid_values().len() as u64, n.saturating_sub(1))?;
        Ok(space)
    }

    pub fn sampled(
        class: ValuationClass,
        n: usize,
        count: u64,
        seed: u64,
    ) -> Result<Self, VerifyError> {
        match class {
            ValuationClass::General | ValuationClass::NonNegative => {}
            other => {
                return Err(VerifyError::UnsupportedMode {
                    mode: "sampled",
                    class: other,
                });
            }
        }
        Ok(DeviationSpace {
            class,
            n,
            mode: DeviationMode::Sampled { count, seed },
        })
    }

    pub fn class(&self) -> ValuationClass {
        self.class
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Whether a clean pass proves strategyproofness rather than merely
    /// failing to refute it.
    pub fn is_exhaustive(&self) -> bool {
        matches!(self.mode, DeviationMode::Exhaustive)
    }

    fn grid_values(&self) -> Vec<S> {
        let DeviationMode::Grid { step } = &self.mode else {
            unreachable!("grid_values is only called in grid mode");
        };
        let mut values: Vec<S> = Vec::new();
        // multiples of the step inside the range
        let mut k = 0usize;
        loop {
            let magnitude = S::from_count(k) * step.clone();
            if !self.class.admits(&magnitude) {
                break;
            }
            values.push(magnitude.clone());
            values.push(-magnitude);
            k += 1;
        }
        // boundaries and the adversarial magnitudes from the gap instances
        let hundredth = S::one() / S::from_count(100);
        let nine_tenths = S::from_count(9) / S::from_count(10);
        for v in [
            S::one(),
            -S::one(),
            hundredth.clone(),
            -hundredth,
            nine_tenths.clone(),
            -nine_tenths,
        ] {
            values.push(v);
        }
        values.retain(|v| self.class.admits(v));
        values.sort_by(|a, b| a.partial_cmp(b).expect("scalar values are comparable"));
        values.dedup();
        values
    }

    /// The deviation rows for `agent`, in the documented deterministic
    /// order. Entries are indexed by target agent; zeros are left implicit.
    pub fn rows(&self, agent: Agent) -> Vec<BTreeMap<Agent, S>> {
        assert!(agent < self.n, "agent index out of range");
        let positions: Vec<Agent> = (0..self.n).filter(|&j| j != agent).collect();
        match &self.mode {
            DeviationMode::Exhaustive => odometer_rows(&positions, &finite_values::<S>(self.class)),
            DeviationMode::Grid { .. } => odometer_rows(&positions, &self.grid_values()),
            DeviationMode::Sampled { count, seed } => {
                let mut rng = Rng::new(*seed).fork(agent as u64);
                (0..*count)
                    .map(|_| {
                        let mut row = BTreeMap::new();
                        for &j in &positions {
                            let q = 1 + rng.next_below(1000);
                            let p: i64 = match self.class {
                                ValuationClass::NonNegative => rng.next_below(q + 1) as i64,
                                _ => rng.next_below(2 * q + 1) as i64 - q as i64,
                            };
                            if p != 0 {
                                let mag = S::from_count(p.unsigned_abs() as usize)
                                    / S::from_count(q as usize);
                                row.insert(j, if p < 0 { -mag } else { mag });
                            }
                        }
                        row
                    })
                    .collect()
            }
        }
    }
}

fn check_enumeration_size(radix: u64, digits: usize) -> Result<(), GuardError> {
    let mut total = 1u64;
    for _ in 0..digits {
        total = total.saturating_mul(radix);
        if total > MAX_ENUMERATION {
            return Err(GuardError {
                what: "deviation enumeration",
                limit: MAX_ENUMERATION as usize,
                requested: usize::MAX,
            });
        }
    }
    Ok(())
}

/// Cartesian product of `values` over `positions`, first position most
/// significant, values cycling fastest at the last position.
fn odometer_rows<S: Scalar>(positions: &[Agent], values: &[S]) -> Vec<BTreeMap<Agent, S>> {
    let mut rows = Vec::new();
    let mut digits = vec![0usize; positions.len()];
    loop {
        let row: BTreeMap<Agent, S> = positions
            .iter()
            .zip(&digits)
            .filter(|&(_, &d)| !values[d].is_zero())
            .map(|(&j, &d)| (j, values[d].clone()))
            .collect();
        rows.push(row);
        let mut i = positions.len();
        loop {
            if i == 0 {
                return rows;
            }
            i -= 1;
            digits[i] += 1;
            if digits[i] < values.len() {
                break;
            }
            digits[i] = 0;
        }
    }
}

/// A compiled strategyproofness violation, replayable exactly.
#[derive(Clone, Debug, PartialEq)]
pub struct SpWitness<S> {
    pub agent: Agent,
    pub truth: ValuationProfile<S>,
    pub deviation: BTreeMap<Agent, S>,
    pub utility_truthful: S,
    pub utility_deviating: S,
}

impl<S: Scalar> SpWitness<S> {
    /// Recomputes both utilities from scratch. A genuine witness reproduces
    /// `(utility_truthful, utility_deviating)` exactly.
    pub fn replay<M>(&self, mechanism: M, kind: GameKind) -> Result<(S, S), VerifyError>
    where
        M: Fn(&ValuationProfile<S>) -> Result<Partition, MechanismError>,
    {
        let truthful_outcome = mechanism(&self.truth)?;
        let u_truth = utility(&self.truth, kind, &truthful_outcome, self.agent);
        let deviated = self.truth.with_row(self.agent, self.deviation.clone());
        let deviating_outcome = mechanism(&deviated)?;
        let u_dev = utility(&self.truth, kind, &deviating_outcome, self.agent);
        Ok((u_truth, u_dev))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SpOutcome {
    /// No improving deviation exists (exhaustive search came up empty).
    Holds,
    /// The incomplete search found nothing; not a proof.
    NoViolationFound,
    Violated,
}

impl fmt::Display for SpOutcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SpOutcome::Holds => "holds",
            SpOutcome::NoViolationFound => "no-violation-found",
            SpOutcome::Violated => "violated",
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SpReport<S> {
    pub outcome: SpOutcome,
    pub witness: Option<SpWitness<S>>,
    pub deviations_checked: u64,
}

impl<S> SpReport<S> {
    pub fn holds(&self) -> bool {
        !matches!(self.outcome, SpOutcome::Violated)
    }
}

/// Sweeps every (agent, deviation row) pair against `mechanism`, comparing
/// the agent's true-valuation utility after deviating with her truthful
/// utility. Returns the first strict improvement as a witness — first by
/// agent index, then by the space's row order.
pub fn check_strategyproof_fn<S, M>(
    mechanism: M,
    kind: GameKind,
    truth: &ValuationProfile<S>,
    space: &DeviationSpace<S>,
) -> Result<SpReport<S>, VerifyError>
where
    S: Scalar,
    M: Fn(&ValuationProfile<S>) -> Result<Partition, MechanismError>,
{
    if space.class != truth.class() {
        return Err(VerifyError::ClassMismatch {
            space: space.class,
            truth: truth.class(),
        });
    }
    if space.n != truth.n() {
        return Err(VerifyError::SizeMismatch {
            space: space.n,
            profile: truth.n(),
        });
    }
    let truthful_outcome = mechanism(truth)?;
    let mut checked = 0u64;
    for agent in 0..truth.n() {
        let u_truth = utility(truth, kind, &truthful_outcome, agent);
        for row in space.rows(agent) {
            checked += 1;
            let deviated = truth.with_row(agent, row.clone());
            let outcome = mechanism(&deviated)?;
            let u_dev = utility(truth, kind, &outcome, agent);
            if u_dev > u_truth {
                return Ok(SpReport {
                    outcome: SpOutcome::Violated,
                    witness: Some(SpWitness {
                        agent,
                        truth: truth.clone(),
                        deviation: row,
                        utility_truthful: u_truth,
                        utility_deviating: u_dev,
                    }),
                    deviations_checked: checked,
                });
            }
        }
    }
    Ok(SpReport {
        outcome: if space.is_exhaustive() {
            SpOutcome::Holds
        } else {
            SpOutcome::NoViolationFound
        },
        witness: None,
        deviations_checked: checked,
    })
}

/// [`check_strategyproof_fn`] for a named mechanism under a fixed ordering.
pub fn check_strategyproof<S: Scalar>(
    id: MechanismId,
    ord: &AgentOrdering,
    kind: GameKind,
    truth: &ValuationProfile<S>,
    space: &DeviationSpace<S>,
) -> Result<SpReport<S>, VerifyError> {
    check_strategyproof_fn(|d| run_mechanism(id, d, ord), kind, truth, space)
}

/// An instance on which a mechanism produced negative social welfare.
#[derive(Clone, Debug, PartialEq)]
pub struct AcceptabilityCounterexample<S> {
    pub label: String,
    pub outcome: Partition,
    pub welfare: S,
}

#[derive(Clone, Debug, PartialEq)]
pub enum AcceptVerdict<S> {
    Acceptable { instances_checked: u64 },
    Counterexample(AcceptabilityCounterexample<S>),
}

/// Confirms the mechanism's output has nonnegative welfare on every given
/// instance. `ord` falls back to the identity of each instance's size.
pub fn check_acceptable<S: Scalar>(
    id: MechanismId,
    ord: Option<&AgentOrdering>,
    instances: &[Instance<S>],
) -> Result<AcceptVerdict<S>, VerifyError> {
    let mut checked = 0u64;
    for inst in instances {
        let identity;
        let ordering = match ord {
            Some(o) => o,
            None => {
                identity = AgentOrdering::identity(inst.profile.n());
                &identity
            }
        };
        let outcome = run_mechanism(id, &inst.profile, ordering)?;
        let welfare = social_welfare(&inst.profile, inst.kind, &outcome);
        if welfare < S::zero() {
            return Ok(AcceptVerdict::Counterexample(AcceptabilityCounterexample {
                label: inst.label.clone(),
                outcome,
                welfare,
            }));
        }
        checked += 1;
    }
    Ok(AcceptVerdict::Acceptable {
        instances_checked: checked,
    })
}

/// An exact approximation ratio, or its two degenerate shapes.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum RatioValue<S> {
    Finite(S),
    /// Positive optimum against zero mechanism welfare.
    Infinite,
    /// Zero optimum: nothing to approximate.
    Undefined,
}

impl<S: fmt::Display> fmt::Display for RatioValue<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RatioValue::Finite(v) => v.fmt(f),
            RatioValue::Infinite => f.write_str("inf"),
            RatioValue::Undefined => f.write_str("undef"),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RatioReport<S> {
    pub label: String,
    pub mechanism_welfare: S,
    pub opt_welfare: S,
    pub ratio: RatioValue<S>,
}

/// Measures OPT / mechanism-welfare on one instance, exactly.
pub fn approx_ratio<S: Scalar>(
    id: MechanismId,
    ord: Option<&AgentOrdering>,
    inst: &Instance<S>,
    kind: GameKind,
) -> Result<RatioReport<S>, VerifyError> {
    let identity;
    let ordering = match ord {
        Some(o) => o,
        None => {
            identity = AgentOrdering::identity(inst.profile.n());
            &identity
        }
    };
    let outcome = run_mechanism(id, &inst.profile, ordering)?;
    let mech = social_welfare(&inst.profile, kind, &outcome);
    let opt = optimal_partition(&inst.profile, kind)?;
    let ratio = if mech > S::zero() {
        RatioValue::Finite(opt.welfare.clone() / mech.clone())
    } else if opt.welfare > S::zero() {
        RatioValue::Infinite
    } else {
        RatioValue::Undefined
    };
    Ok(RatioReport {
        label: inst.label.clone(),
        mechanism_welfare: mech,
        opt_welfare: opt.welfare,
        ratio,
    })
}

/// Family of seeded random instances for a ratio sweep.
#[derive(Clone, Copy, Debug)]
pub struct SweepSpec {
    pub class: ValuationClass,
    pub kind: GameKind,
    pub n_min: usize,
    pub n_max: usize,
}

#[derive(Clone, Debug)]
pub struct SweepReport<S> {
    pub reports: Vec<RatioReport<S>>,
    pub max_ratio: RatioValue<S>,
}

/// Runs `trials` random instances (sizes uniform in the requested range,
/// density uniform over eighths) and reports every ratio plus the worst.
/// Deterministic in `seed`.
pub fn ratio_sweep<S: Scalar>(
    id: MechanismId,
    spec: &SweepSpec,
    trials: u64,
    seed: u64,
) -> Result<SweepReport<S>, VerifyError> {
    assert!(spec.n_min >= 1 && spec.n_min <= spec.n_max);
    let base = Rng::new(seed);
    let mut reports = Vec::with_capacity(trials as usize);
    let mut max_ratio = RatioValue::Undefined;
    for trial in 0..trials {
        let mut rng = base.fork(trial);
        let n = spec.n_min + rng.next_below((spec.n_max - spec.n_min + 1) as u64) as usize;
        let eighths = rng.next_below(9) as usize;
        let density = S::from_count(eighths) / S::from_count(8);
        let inst = gen_random(spec.class, n, &density, spec.kind, rng.next_u64())?;
        let report = approx_ratio(id, None, &inst, spec.kind)?;
        max_ratio = match (&max_ratio, &report.ratio) {
            (_, RatioValue::Undefined) => max_ratio,
            (RatioValue::Infinite, _) | (_, RatioValue::Infinite) => RatioValue::Infinite,
            (RatioValue::Undefined, RatioValue::Finite(b)) => RatioValue::Finite(b.clone()),
            (RatioValue::Finite(a), RatioValue::Finite(b)) => {
                RatioValue::Finite(if b > a { b.clone() } else { a.clone() })
            }
        };
        reports.push(report);
    }
    Ok(SweepReport { reports, max_ratio })
}

/// Exhaustive enumeration of all valid profiles of a finite class, in the
/// canonical value order, entries row-major.
pub fn enumerate_profiles<S: Scalar>(
    class: ValuationClass,
    n: usize,
) -> Result<ProfileIter<S>, VerifyError> {
    match class {
        ValuationClass::Duplex | ValuationClass::Simple => {}
        other => {
            return Err(VerifyError::UnsupportedMode {
                mode: "exhaustive",
                class: other,
            });
        }
    }
    let values = finite_values::<S>(class);
    check_enumeration_size(values.len() as u64, n * (n - 1))?;
    let positions: Vec<(Agent, Agent)> = (0..n)
        .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
        .collect();
    Ok(ProfileIter {
        n,
        class,
        values,
        positions,
        digits: vec![0; n * (n - 1)],
        done: false,
    })
}

pub struct ProfileIter<S> {
    n: usize,
    class: ValuationClass,
    values: Vec<S>,
    positions: Vec<(Agent, Agent)>,
    digits: Vec<usize>,
    done: bool,
}

impl<S: Scalar> Iterator for ProfileIter<S> {
    type Item = ValuationProfile<S>;

    fn next(&mut self) -> Option<ValuationProfile<S>> {
        if self.done {
            return None;
        }
        let mut profile = ValuationProfile::new(self.n, self.class);
        for (&(i, j), &d) in self.positions.iter().zip(&self.digits) {
            if !self.values[d].is_zero() {
                profile.set(i, j, self.values[d].clone());
            }
        }
        let mut i = self.digits.len();
        loop {
            if i == 0 {
                self.done = true;
                break;
            }
            i -= 1;
            self.digits[i] += 1;
            if self.digits[i] < self.values.len() {
                break;
            }
            self.digits[i] = 0;
        }
        Some(profile)
    }
}

pub mod controls {
    //! Known-broken mechanism variants, kept so the verifier can be shown
    //! to catch their manipulations. Deliberately not part of
    //! [`MechanismId`](crate::mechanisms::MechanismId).

    use std::collections::BTreeSet;

    use crate::game::{Agent, Partition, ValuationProfile};
    use crate::mechanisms::{AgentOrdering, MechanismError, pairing_pass};
    use crate::scalar::Scalar;

    /// The pairing mechanism rerun until no further pair forms, instead of
    /// stopping after the first. Matches more agents but is manipulable:
    /// an agent can poison a rival pairing with a −1 arc to get themselves
    /// matched earlier.
    pub fn iterated_duplex_pairing<S: Scalar>(
        d: &ValuationProfile<S>,
        ord: &AgentOrdering,
    ) -> Result<Partition, MechanismError> {
        // reuse the single-pass scan; sinks are recomputed among the
        // remaining agents each round
        let mut active: BTreeSet<Agent> = (0..d.n()).collect();
        let mut pairs: Vec<(Agent, Agent)> = Vec::new();
        while let Some((i, j)) = pairing_pass(d, ord, &active) {
            active.remove(&i);
            active.remove(&j);
            pairs.push((i, j));
        }
        Ok(Partition::from_pairs(d.n(), &pairs))
    }
}
