//! Game instances: valuation profiles, coalitions, partitions, utilities
//! and social welfare for both additively separable and fractional games.
//!
//! Agents are 0-indexed everywhere inside the library. Valuations are held
//! sparsely: an absent entry is an exact zero, mirroring the usual directed
//! graph view where only non-null valuations get an arc.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use crate::scalar::Scalar;

/// Agents are indices into `[0, n)`.
pub type Agent = usize;

/// Admissible value set of a valuation profile.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ValuationClass {
    /// Rationals in `[-1, 1]`.
    General,
    /// Rationals in `[0, 1]`.
    NonNegative,
    /// Values in `{-1, 0, 1}` (enemy / neutral / friend).
    Duplex,
    /// Values in `{0, 1}` (neutral / friend).
    Simple,
}

impl ValuationClass {
    /// Stable lowercase name, used by the file format and the CLI.
    pub fn name(self) -> &'static str {
        match self {
            ValuationClass::General => "general",
            ValuationClass::NonNegative => "nonneg",
            ValuationClass::Duplex => "duplex",
            ValuationClass::Simple => "simple",
        }
    }

    /// Whether `v` lies in the class's admissible set.
    pub fn admits<S: Scalar>(self, v: &S) -> bool {
        let one = S::one();
        let neg_one = -S::one();
        match self {
            ValuationClass::General => neg_one <= *v && *v <= one,
            ValuationClass::NonNegative => S::zero() <= *v && *v <= one,
            ValuationClass::Duplex => *v == neg_one || v.is_zero() || *v == one,
            ValuationClass::Simple => v.is_zero() || *v == one,
        }
    }

    /// Whether every value admitted by `self` is also admitted by `other`.
    pub fn is_subclass_of(self, other: ValuationClass) -> bool {
        use ValuationClass::*;
        match (self, other) {
            (a, b) if a == b => true,
            (Simple, _) => true,
            (NonNegative, General) => true,
            (Duplex, General) => true,
            _ => false,
        }
    }
}

impl fmt::Display for ValuationClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ValuationClass {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "general" => Ok(ValuationClass::General),
            "nonneg" => Ok(ValuationClass::NonNegative),
            "duplex" => Ok(ValuationClass::Duplex),
            "simple" => Ok(ValuationClass::Simple),
            other => Err(format!("unknown valuation class `{other}`")),
        }
    }
}

/// Which utility rule is in force.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum GameKind {
    /// Utility is the plain sum over coalition members.
    Ashg,
    /// Utility is the sum divided by the coalition size (self included).
    Fhg,
}

impl GameKind {
    pub fn name(self) -> &'static str {
        match self {
            GameKind::Ashg => "ashg",
            GameKind::Fhg => "fhg",
        }
    }
}

impl fmt::Display for GameKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for GameKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "ashg" => Ok(GameKind::Ashg),
            "fhg" => Ok(GameKind::Fhg),
            other => Err(format!("unknown game kind `{other}`")),
        }
    }
}

/// A sparse n×n valuation matrix with a class tag.
///
/// Absent entries are zero. Zero is never stored, so structural equality
/// coincides with value equality.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ValuationProfile<S> {
    n: usize,
    class: ValuationClass,
    rows: Vec<BTreeMap<Agent, S>>,
}

/// One problem found by [`ValuationProfile::validate`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ValuationViolation {
    pub agent: Agent,
    pub target: Agent,
    pub value: String,
    pub reason: ViolationReason,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ViolationReason {
    NonzeroDiagonal,
    OutOfClass,
}

impl fmt::Display for ValuationViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.reason {
            ViolationReason::NonzeroDiagonal => write!(
                f,
                "agent {}: diagonal entry must be 0, found {}",
                self.agent, self.value
            ),
            ViolationReason::OutOfClass => write!(
                f,
                "entry ({}, {}): value {} outside the admissible set",
                self.agent, self.target, self.value
            ),
        }
    }
}

impl<S: Scalar> ValuationProfile<S> {
    /// An all-zero profile on `n ≥ 1` agents.
    pub fn new(n: usize, class: ValuationClass) -> Self {
        assert!(n >= 1, "a game needs at least one agent");
        ValuationProfile {
            n,
            class,
            rows: vec![BTreeMap::new(); n],
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn class(&self) -> ValuationClass {
        self.class
    }

    /// Sets `v_i(j)`. Zero removes the entry. Bounds are asserted; class
    /// membership is not, so [`Self::validate`] can report offenders.
    pub fn set(&mut self, i: Agent, j: Agent, v: S) {
        assert!(i < self.n && j < self.n, "agent index out of range");
        if v.is_zero() {
            self.rows[i].remove(&j);
        } else {
            self.rows[i].insert(j, v);
        }
    }

    /// `v_i(j)`, zero when absent.
    pub fn get(&self, i: Agent, j: Agent) -> S {
        assert!(i < self.n && j < self.n, "agent index out of range");
        self.rows[i].get(&j).cloned().unwrap_or_else(S::zero)
    }

    /// The nonzero entries of row `i`.
    pub fn row(&self, i: Agent) -> &BTreeMap<Agent, S> {
        &self.rows[i]
    }

    /// A copy of the profile with row `i` replaced (zeros stripped).
    pub fn with_row(&self, i: Agent, row: BTreeMap<Agent, S>) -> Self {
        assert!(i < self.n, "agent index out of range");
        let mut out = self.clone();
        out.rows[i] = row.into_iter().filter(|(_, v)| !v.is_zero()).collect();
        out
    }

    /// All nonzero entries as `(i, j, v)` triples, row-major.
    pub fn entries(&self) -> impl Iterator<Item = (Agent, Agent, &S)> {
        self.rows
            .iter()
            .enumerate()
            .flat_map(|(i, row)| row.iter().map(move |(&j, v)| (i, j, v)))
    }

    /// Number of nonzero entries.
    pub fn arc_count(&self) -> usize {
        self.rows.iter().map(BTreeMap::len).sum()
    }

    /// Sum of every entry in the matrix.
    pub fn total_sum(&self) -> S {
        self.entries()
            .fold(S::zero(), |acc, (_, _, v)| acc + v.clone())
    }

    /// Every entry outside the class range and every nonzero diagonal entry.
    pub fn validate(&self) -> Vec<ValuationViolation> {
        let mut out = Vec::new();
        for (i, j, v) in self.entries() {
            if i == j {
                out.push(ValuationViolation {
                    agent: i,
                    target: j,
                    value: v.to_string(),
                    reason: ViolationReason::NonzeroDiagonal,
                });
            } else if !self.class.admits(v) {
                out.push(ValuationViolation {
                    agent: i,
                    target: j,
                    value: v.to_string(),
                    reason: ViolationReason::OutOfClass,
                });
            }
        }
        out
    }

    pub fn is_valid(&self) -> bool {
        self.validate().is_empty()
    }
}

/// A nonempty set of agents.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Coalition {
    members: BTreeSet<Agent>,
}

impl Coalition {
    pub fn new(members: impl IntoIterator<Item = Agent>) -> Self {
        let members: BTreeSet<Agent> = members.into_iter().collect();
        assert!(!members.is_empty(), "a coalition cannot be empty");
        Coalition { members }
    }

    pub fn singleton(i: Agent) -> Self {
        Coalition::new([i])
    }

    pub fn pair(i: Agent, j: Agent) -> Self {
        assert_ne!(i, j, "a pair needs two distinct agents");
        Coalition::new([i, j])
    }

    pub fn members(&self) -> impl Iterator<Item = Agent> + '_ {
        self.members.iter().copied()
    }

    pub fn member_set(&self) -> &BTreeSet<Agent> {
        &self.members
    }

    pub fn contains(&self, i: Agent) -> bool {
        self.members.contains(&i)
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Smallest member; drives the canonical coalition order.
    pub fn min_member(&self) -> Agent {
        *self.members.first().expect("coalition is nonempty")
    }
}

impl fmt::Display for Coalition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (k, m) in self.members().enumerate() {
            if k > 0 {
                write!(f, ",")?;
            }
            write!(f, "{m}")?;
        }
        write!(f, "}}")
    }
}

/// Disjoint nonempty coalitions covering `[0, n)`.
///
/// Canonical form: members ascend inside a coalition and coalitions are
/// ordered by smallest member, so equality is syntactic.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Partition {
    n: usize,
    coalitions: Vec<Coalition>,
}

impl Partition {
    /// Builds a partition, canonicalizing the coalition order.
    ///
    /// Panics unless the coalitions are disjoint and cover `[0, n)`.
    pub fn new(n: usize, mut coalitions: Vec<Coalition>) -> Self {
        let mut seen = vec![false; n];
        for c in &coalitions {
            for m in c.members() {
                assert!(m < n, "agent {m} out of range");
                assert!(!seen[m], "agent {m} appears in two coalitions");
                seen[m] = true;
            }
        }
        assert!(
            seen.iter().all(|&s| s),
            "partition does not cover all agents"
        );
        coalitions.sort_by_key(Coalition::min_member);
        Partition { n, coalitions }
    }

    /// All agents together.
    pub fn grand(n: usize) -> Self {
        Partition::new(n, vec![Coalition::new(0..n)])
    }

    /// Every agent alone.
    pub fn singletons(n: usize) -> Self {
        Partition::new(n, (0..n).map(Coalition::singleton).collect())
    }

    /// The given pairs as coalitions, every other agent alone.
    pub fn from_pairs(n: usize, pairs: &[(Agent, Agent)]) -> Self {
        let mut coalitions: Vec<Coalition> =
            pairs.iter().map(|&(i, j)| Coalition::pair(i, j)).collect();
        let paired: BTreeSet<Agent> = pairs.iter().flat_map(|&(i, j)| [i, j]).collect();
        coalitions.extend(
            (0..n)
                .filter(|a| !paired.contains(a))
                .map(Coalition::singleton),
        );
        Partition::new(n, coalitions)
    }

    /// Partition from a restricted-growth string: agents with equal labels
    /// share a coalition. Labels must start at 0 and each new label must be
    /// exactly one more than the maximum seen so far.
    pub fn from_growth_string(labels: &[usize]) -> Self {
        assert!(!labels.is_empty());
        let blocks = labels.iter().max().unwrap() + 1;
        let mut members: Vec<Vec<Agent>> = vec![Vec::new(); blocks];
        for (agent, &label) in labels.iter().enumerate() {
            members[label].push(agent);
        }
        let coalitions = members
            .into_iter()
            .map(|m| {
                assert!(!m.is_empty(), "growth string skips a label");
                Coalition::new(m)
            })
            .collect();
        Partition::new(labels.len(), coalitions)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn coalitions(&self) -> &[Coalition] {
        &self.coalitions
    }

    pub fn len(&self) -> usize {
        self.coalitions.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// The unique coalition containing agent `i`.
    pub fn coalition_of(&self, i: Agent) -> &Coalition {
        assert!(i < self.n, "agent index out of range");
        self.coalitions
            .iter()
            .find(|c| c.contains(i))
            .expect("partition covers every agent")
    }
}

impl fmt::Display for Partition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (k, c) in self.coalitions.iter().enumerate() {
            if k > 0 {
                write!(f, " ")?;
            }
            write!(f, "{c}")?;
        }
        Ok(())
    }
}

/// Utility of agent `i` under partition `p`.
pub fn utility<S: Scalar>(v: &ValuationProfile<S>, kind: GameKind, p: &Partition, i: Agent) -> S {
    assert_eq!(
        v.n(),
        p.n(),
        "profile and partition disagree on agent count"
    );
    let c = p.coalition_of(i);
    let sum = c
        .members()
        .filter(|&j| j != i)
        .fold(S::zero(), |acc, j| acc + v.get(i, j));
    match kind {
        GameKind::Ashg => sum,
        GameKind::Fhg => sum / S::from_count(c.len()),
    }
}

/// Sum of all internal arcs of coalition `c`: Σ_{i,j ∈ c} v_i(j).
pub fn coalition_sum<S: Scalar>(v: &ValuationProfile<S>, c: &Coalition) -> S {
    let mut acc = S::zero();
    for i in c.members() {
        for (&j, val) in v.row(i) {
            if j != i && c.contains(j) {
                acc = acc + val.clone();
            }
        }
    }
    acc
}

/// Welfare contributed by coalition `c`: its internal sum, divided by its
/// size under the fractional rule.
pub fn coalition_welfare<S: Scalar>(v: &ValuationProfile<S>, kind: GameKind, c: &Coalition) -> S {
    let sum = coalition_sum(v, c);
    match kind {
        GameKind::Ashg => sum,
        GameKind::Fhg => sum / S::from_count(c.len()),
    }
}

/// Social welfare: the sum of every agent's utility. Computed per coalition,
/// which agrees with the per-agent sum exactly for exact scalars.
pub fn social_welfare<S: Scalar>(v: &ValuationProfile<S>, kind: GameKind, p: &Partition) -> S {
    assert_eq!(
        v.n(),
        p.n(),
        "profile and partition disagree on agent count"
    );
    p.coalitions()
        .iter()
        .fold(S::zero(), |acc, c| acc + coalition_welfare(v, kind, c))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Rational;
    use num_traits::Zero;

    fn rat(p: i64, q: i64) -> Rational {
        Rational::new(p.into(), q.into())
    }

    /// Directed 7-cycle with unit arcs, the simple-valuations gap instance.
    fn cycle7() -> ValuationProfile<Rational> {
        let mut v = ValuationProfile::new(7, ValuationClass::Simple);
        for i in 0..7 {
            v.set(i, (i + 1) % 7, rat(1, 1));
        }
        v
    }

    #[test]
    fn coalition_of_finds_the_right_block() {
        let p = Partition::new(3, vec![Coalition::new([0, 1]), Coalition::singleton(2)]);
        assert_eq!(p.coalition_of(1), &Coalition::new([0, 1]));
        let grand = Partition::grand(4);
        assert_eq!(grand.coalition_of(3), &Coalition::new([0, 1, 2, 3]));
        let singles = Partition::singletons(3);
        assert_eq!(singles.coalition_of(2), &Coalition::singleton(2));
    }

    #[test]
    #[should_panic(expected = "does not cover")]
    fn partition_must_cover_all_agents() {
        let _ = Partition::new(3, vec![Coalition::new([0, 1])]);
    }

    #[test]
    #[should_panic(expected = "two coalitions")]
    fn partition_must_be_disjoint() {
        let _ = Partition::new(2, vec![Coalition::new([0, 1]), Coalition::singleton(1)]);
    }

    #[test]
    fn singleton_utility_is_zero() {
        let v = cycle7();
        let p = Partition::singletons(7);
        for i in 0..7 {
            assert!(utility(&v, GameKind::Ashg, &p, i).is_zero());
            assert!(utility(&v, GameKind::Fhg, &p, i).is_zero());
        }
    }

    #[test]
    fn cycle7_grand_fhg_utilities() {
        // Each agent has exactly one outgoing unit arc, so 1/7 per head.
        let v = cycle7();
        let p = Partition::grand(7);
        for i in 0..7 {
            assert_eq!(utility(&v, GameKind::Fhg, &p, i), rat(1, 7));
        }
        assert_eq!(social_welfare(&v, GameKind::Fhg, &p), rat(1, 1));
    }

    #[test]
    fn cycle7_block_partition_welfare() {
        // {1,2} {3,4} {5,6,7} in 1-indexed labels.
        let v = cycle7();
        let p = Partition::new(
            7,
            vec![
                Coalition::new([0, 1]),
                Coalition::new([2, 3]),
                Coalition::new([4, 5, 6]),
            ],
        );
        assert_eq!(social_welfare(&v, GameKind::Fhg, &p), rat(5, 3));
    }

    #[test]
    fn singleton_partition_welfare_is_zero() {
        let v = cycle7();
        let p = Partition::singletons(7);
        assert!(social_welfare(&v, GameKind::Ashg, &p).is_zero());
        assert!(social_welfare(&v, GameKind::Fhg, &p).is_zero());
    }

    #[test]
    fn grand_welfare_is_total_sum() {
        let mut v = ValuationProfile::new(4, ValuationClass::General);
        v.set(0, 1, rat(1, 2));
        v.set(1, 0, rat(-1, 3));
        v.set(2, 3, rat(1, 7));
        let total = v.total_sum();
        assert_eq!(
            social_welfare(&v, GameKind::Ashg, &Partition::grand(4)),
            total.clone()
        );
        assert_eq!(
            social_welfare(&v, GameKind::Fhg, &Partition::grand(4)),
            total / rat(4, 1)
        );
    }

    #[test]
    fn welfare_matches_per_agent_sum() {
        let v = cycle7();
        let p = Partition::new(
            7,
            vec![
                Coalition::new([0, 2, 4]),
                Coalition::new([1, 5]),
                Coalition::new([3, 6]),
            ],
        );
        for kind in [GameKind::Ashg, GameKind::Fhg] {
            let per_agent = (0..7).fold(Rational::from_count(0), |acc, i| {
                acc + utility(&v, kind, &p, i)
            });
            assert_eq!(social_welfare(&v, kind, &p), per_agent);
        }
    }

    #[test]
    fn validate_flags_class_and_diagonal() {
        let mut v = ValuationProfile::new(3, ValuationClass::Simple);
        v.set(0, 1, rat(1, 2));
        let violations = v.validate();
        assert_eq!(violations.len(), 1);
        assert_eq!(violations[0].reason, ViolationReason::OutOfClass);

        let mut d = ValuationProfile::new(3, ValuationClass::Duplex);
        d.set(0, 0, rat(1, 1));
        let violations = d.validate();
        assert_eq!(violations.len(), 1);
        assert_eq!(violations[0].reason, ViolationReason::NonzeroDiagonal);

        let mut ok = ValuationProfile::new(3, ValuationClass::NonNegative);
        ok.set(0, 1, rat(3, 4));
        ok.set(2, 1, rat(1, 1));
        assert!(ok.is_valid());
    }

    #[test]
    fn class_admission_rules() {
        assert!(ValuationClass::General.admits(&rat(-1, 1)));
        assert!(ValuationClass::General.admits(&rat(9, 10)));
        assert!(!ValuationClass::General.admits(&rat(11, 10)));
        assert!(!ValuationClass::NonNegative.admits(&rat(-1, 10)));
        assert!(ValuationClass::Duplex.admits(&rat(-1, 1)));
        assert!(!ValuationClass::Duplex.admits(&rat(1, 2)));
        assert!(ValuationClass::Simple.admits(&rat(1, 1)));
        assert!(!ValuationClass::Simple.admits(&rat(-1, 1)));
    }

    #[test]
    fn zero_entries_are_not_stored() {
        let mut v = ValuationProfile::new(2, ValuationClass::General);
        v.set(0, 1, rat(1, 2));
        v.set(0, 1, rat(0, 1));
        let w = ValuationProfile::new(2, ValuationClass::General);
        assert_eq!(v, w);
    }

    #[test]
    fn merging_unconnected_coalitions() {
        // No arcs across the two blocks: ASHG welfare unchanged, FHG never up.
        let mut v = ValuationProfile::new(4, ValuationClass::NonNegative);
        v.set(0, 1, rat(1, 2));
        v.set(2, 3, rat(1, 3));
        let split = Partition::new(4, vec![Coalition::new([0, 1]), Coalition::new([2, 3])]);
        let merged = Partition::grand(4);
        assert_eq!(
            social_welfare(&v, GameKind::Ashg, &split),
            social_welfare(&v, GameKind::Ashg, &merged)
        );
        assert!(
            social_welfare(&v, GameKind::Fhg, &merged) <= social_welfare(&v, GameKind::Fhg, &split)
        );
    }

    #[test]
    fn utilities_are_reproducible() {
        let v = cycle7();
        let p = Partition::grand(7);
        for i in 0..7 {
            let a = utility(&v, GameKind::Fhg, &p, i);
            let b = utility(&v, GameKind::Fhg, &p, i);
            assert_eq!(a, b);
        }
    }

    #[test]
    fn generic_over_floats() {
        let mut v: ValuationProfile<f64> = ValuationProfile::new(2, ValuationClass::Simple);
        v.set(0, 1, 1.0);
        let p = Partition::grand(2);
        assert_eq!(utility(&v, GameKind::Fhg, &p, 0), 0.5);
        assert_eq!(social_welfare(&v, GameKind::Ashg, &p), 1.0);
    }
}
