//! Deterministic coalition-formation mechanisms over declared valuations.
//!
//! Four mechanisms, each a pure function of the declarations (and, for the
//! pairing mechanism, a fixed agent ordering chosen before declarations are
//! read):
//!
//! * grand coalition — everyone together; optimal for non-negative sums;
//! * singletons — everyone alone; the trivially acceptable baseline;
//! * duplex pairing — scans agents in order and forms at most one mutually
//!   agreeable pair, then stops;
//! * matching — pairs agents along the `≺`-minimal maximum-weight matching
//!   of the symmetrized declaration graph.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::game::{Agent, Partition, ValuationClass, ValuationProfile};
use crate::matching::{UndirectedWeightedGraph, max_weight_matching};
use crate::scalar::Scalar;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum MechanismId {
    GrandCoalition,
    Singletons,
    DuplexPairing,
    MatchingMechanism,
}

impl MechanismId {
    pub const ALL: [MechanismId; 4] = [
        MechanismId::GrandCoalition,
        MechanismId::Singletons,
        MechanismId::DuplexPairing,
        MechanismId::MatchingMechanism,
    ];

    pub fn name(self) -> &'static str {
        match self {
            MechanismId::GrandCoalition => "grand",
            MechanismId::Singletons => "singletons",
            MechanismId::DuplexPairing => "duplex-pairing",
            MechanismId::MatchingMechanism => "matching",
        }
    }

    /// Which profile classes the mechanism is defined on.
    pub fn accepts(self, class: ValuationClass) -> bool {
        match self {
            MechanismId::GrandCoalition | MechanismId::Singletons => true,
            MechanismId::DuplexPairing => {
                matches!(class, ValuationClass::Duplex | ValuationClass::Simple)
            }
            MechanismId::MatchingMechanism => matches!(class, ValuationClass::Simple),
        }
    }

    /// Which classes the mechanism guarantees nonnegative welfare on. The
    /// grand coalition runs on any class but only promises acceptability
    /// when no valuation is negative.
    pub fn acceptable_on(self, class: ValuationClass) -> bool {
        match self {
            MechanismId::GrandCoalition => {
                matches!(class, ValuationClass::NonNegative | ValuationClass::Simple)
            }
            MechanismId::Singletons => true,
            _ => self.accepts(class),
        }
    }
}

impl fmt::Display for MechanismId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for MechanismId {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "grand" => Ok(MechanismId::GrandCoalition),
            "singletons" => Ok(MechanismId::Singletons),
            "duplex-pairing" => Ok(MechanismId::DuplexPairing),
            "matching" => Ok(MechanismId::MatchingMechanism),
            other => Err(format!("unknown mechanism `{other}`")),
        }
    }
}

#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum MechanismError {
    #[error("mechanism `{mechanism}` does not accept {class} profiles")]
    IncompatibleClass {
        mechanism: MechanismId,
        class: ValuationClass,
    },
    #[error("declared profile is invalid: {0}")]
    InvalidProfile(String),
    #[error("ordering is over {ordering} agents but the profile has {profile}")]
    OrderingMismatch { ordering: usize, profile: usize },
}

/// A fixed permutation of the agents, the pairing mechanism's parameter.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AgentOrdering {
    order: Vec<Agent>,
    position: Vec<usize>,
}

#[derive(Clone, Debug, Error, PartialEq, Eq)]
#[error("ordering is not a permutation of 0..{n}")]
pub struct InvalidOrdering {
    pub n: usize,
}

impl AgentOrdering {
    pub fn identity(n: usize) -> Self {
        AgentOrdering {
            order: (0..n).collect(),
            position: (0..n).collect(),
        }
    }

    pub fn new(order: Vec<Agent>) -> Result<Self, InvalidOrdering> {
        let n = order.len();
        let mut position = vec![usize::MAX; n];
        for (pos, &a) in order.iter().enumerate() {
            if a >= n || position[a] != usize::MAX {
                return Err(InvalidOrdering { n });
            }
            position[a] = pos;
        }
        Ok(AgentOrdering { order, position })
    }

    pub fn n(&self) -> usize {
        self.order.len()
    }

    /// Agents in scan order.
    pub fn iter(&self) -> impl Iterator<Item = Agent> + '_ {
        self.order.iter().copied()
    }

    /// Where agent `a` sits in the scan order.
    pub fn position(&self, a: Agent) -> usize {
        self.position[a]
    }
}

/// Dispatch: run mechanism `id` on declarations `d` under ordering `ord`.
pub fn run_mechanism<S: Scalar>(
    id: MechanismId,
    d: &ValuationProfile<S>,
    ord: &AgentOrdering,
) -> Result<Partition, MechanismError> {
    if !id.accepts(d.class()) {
        return Err(MechanismError::IncompatibleClass {
            mechanism: id,
            class: d.class(),
        });
    }
    if ord.n() != d.n() {
        return Err(MechanismError::OrderingMismatch {
            ordering: ord.n(),
            profile: d.n(),
        });
    }
    if let Some(v) = d.validate().first() {
        return Err(MechanismError::InvalidProfile(v.to_string()));
    }
    Ok(match id {
        MechanismId::GrandCoalition => Partition::grand(d.n()),
        MechanismId::Singletons => Partition::singletons(d.n()),
        MechanismId::DuplexPairing => duplex_pairing(d, ord)?,
        MechanismId::MatchingMechanism => matching_mechanism(d)?,
    })
}

fn ensure_duplex_like<S: Scalar>(
    d: &ValuationProfile<S>,
    mechanism: MechanismId,
) -> Result<(), MechanismError> {
    match d.class() {
        ValuationClass::Duplex | ValuationClass::Simple => Ok(()),
        class => Err(MechanismError::IncompatibleClass { mechanism, class }),
    }
}

fn is_plus_one<S: Scalar>(v: &S) -> bool {
    *v == S::one()
}

fn is_minus_one<S: Scalar>(v: &S) -> bool {
    *v == -S::one()
}

fn sink_unchecked<S: Scalar>(d: &ValuationProfile<S>, i: Agent, active: &BTreeSet<Agent>) -> bool {
    !d.row(i).iter().any(|(&j, v)| {
        j != i && active.contains(&j) && is_plus_one(v) && !is_minus_one(&d.get(j, i))
    })
}

/// Whether agent `i` is a sink: nobody `i` declares a friend accepts her
/// with anything better than −1.
pub fn is_sink<S: Scalar>(d: &ValuationProfile<S>, i: Agent) -> Result<bool, MechanismError> {
    ensure_duplex_like(d, MechanismId::DuplexPairing)?;
    assert!(i < d.n(), "agent index out of range");
    let all: BTreeSet<Agent> = (0..d.n()).collect();
    Ok(sink_unchecked(d, i, &all))
}

/// One scan over `active` agents in `ord` order. Returns the first pair
/// satisfying, for the scanned agent `i` (checking cases in order and
/// candidates `j` by ascending index):
///
/// * (a) `d_i(j) = 1` and `d_j(i) = 1`;
/// * (b) `d_i(j) = 1`, `d_j(i) = 0` and `j` is a sink among `active`;
/// * (c) `d_i(j) = 1`, `d_j(i) = 0` and `j` precedes `i` in the ordering.
pub(crate) fn pairing_pass<S: Scalar>(
    d: &ValuationProfile<S>,
    ord: &AgentOrdering,
    active: &BTreeSet<Agent>,
) -> Option<(Agent, Agent)> {
    let sink: Vec<bool> = (0..d.n())
        .map(|j| active.contains(&j) && sink_unchecked(d, j, active))
        .collect();
    for i in ord.iter().filter(|a| active.contains(a)) {
        // rows iterate by ascending j; only declared arcs matter
        let friends: Vec<Agent> = d
            .row(i)
            .iter()
            .filter(|&(&j, v)| j != i && active.contains(&j) && is_plus_one(v))
            .map(|(&j, _)| j)
            .collect();
        // case (a): mutual friends
        if let Some(&j) = friends.iter().find(|&&j| is_plus_one(&d.get(j, i))) {
            return Some((i, j));
        }
        // case (b): j neutral toward i and a sink
        if let Some(&j) = friends.iter().find(|&&j| d.get(j, i).is_zero() && sink[j]) {
            return Some((i, j));
        }
        // case (c): j neutral toward i and already scanned
        if let Some(&j) = friends
            .iter()
            .find(|&&j| d.get(j, i).is_zero() && ord.position(j) < ord.position(i))
        {
            return Some((i, j));
        }
    }
    None
}

/// The pairing mechanism: scan agents in `ord` order; the first agent
/// admitting a partner (cases a/b/c above) forms the only two-agent
/// coalition and the mechanism stops. Everyone else stays alone.
pub fn duplex_pairing<S: Scalar>(
    d: &ValuationProfile<S>,
    ord: &AgentOrdering,
) -> Result<Partition, MechanismError> {
    ensure_duplex_like(d, MechanismId::DuplexPairing)?;
    if ord.n() != d.n() {
        return Err(MechanismError::OrderingMismatch {
            ordering: ord.n(),
            profile: d.n(),
        });
    }
    let all: BTreeSet<Agent> = (0..d.n()).collect();
    Ok(match pairing_pass(d, ord, &all) {
        Some((i, j)) => Partition::from_pairs(d.n(), &[(i, j)]),
        None => Partition::singletons(d.n()),
    })
}

/// The symmetrized declaration graph: edge `{i,j}` when either agent names
/// the other, with weight 1 for a one-way arc and 2 when reciprocated.
pub fn build_gbar<S: Scalar>(
    d: &ValuationProfile<S>,
) -> Result<UndirectedWeightedGraph<S>, MechanismError> {
    if d.class() != ValuationClass::Simple {
        return Err(MechanismError::IncompatibleClass {
            mechanism: MechanismId::MatchingMechanism,
            class: d.class(),
        });
    }
    let n = d.n();
    let mut g = UndirectedWeightedGraph::new(n);
    for i in 0..n {
        for j in (i + 1)..n {
            let forward = is_plus_one(&d.get(i, j));
            let backward = is_plus_one(&d.get(j, i));
            match (forward, backward) {
                (false, false) => {}
                (true, true) => g.add_edge(i, j, S::from_count(2)),
                _ => g.add_edge(i, j, S::one()),
            }
        }
    }
    Ok(g)
}

/// The matching mechanism: coalitions are the edges of the `≺`-minimal
/// maximum-weight matching of the symmetrized graph, unmatched agents alone.
pub fn matching_mechanism<S: Scalar>(d: &ValuationProfile<S>) -> Result<Partition, MechanismError> {
    let g = build_gbar(d)?;
    let m = max_weight_matching(&g);
    let pairs: Vec<(Agent, Agent)> = m.pairs().collect();
    Ok(Partition::from_pairs(d.n(), &pairs))
}
