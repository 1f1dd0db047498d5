//! Brute-force optimal welfare: enumerate every partition, keep the best.
//!
//! The enumeration streams restricted-growth strings in lexicographic order,
//! so ties resolve to the first maximizer deterministically and nothing
//! Bell-sized is ever materialized. Trustworthiness over speed.

use crate::game::{GameKind, Partition, ValuationClass, ValuationProfile};
use crate::scalar::Scalar;
use crate::{GuardError, WrongClassError};

/// Enumeration guard: Bell(12) ≈ 4.2 million partitions.
pub const MAX_ORACLE_AGENTS: usize = 12;

/// Streams every partition of `[0, n)` exactly once, in the lexicographic
/// order of restricted-growth strings, each in canonical form.
pub fn enumerate_partitions(n: usize) -> Result<PartitionIter, GuardError> {
    if !(1..=MAX_ORACLE_AGENTS).contains(&n) {
        return Err(GuardError {
            what: "partition enumeration",
            limit: MAX_ORACLE_AGENTS,
            requested: n,
        });
    }
    Ok(PartitionIter {
        labels: vec![0; n],
        bounds: vec![1; n],
        done: false,
    })
}

pub struct PartitionIter {
    /// Current restricted-growth string: labels[0] = 0 and
    /// labels[i] ≤ max(labels[..i]) + 1.
    labels: Vec<usize>,
    /// bounds[i] = max(labels[..i]) + 1, the largest label allowed at i.
    bounds: Vec<usize>,
    done: bool,
}

impl Iterator for PartitionIter {
    type Item = Partition;

    fn next(&mut self) -> Option<Partition> {
        if self.done {
            return None;
        }
        let out = Partition::from_growth_string(&self.labels);
        // advance to the lexicographic successor
        let n = self.labels.len();
        let mut i = n;
        while i > 1 {
            i -= 1;
            if self.labels[i] < self.bounds[i] {
                self.labels[i] += 1;
                let reach = self.bounds[i].max(self.labels[i] + 1);
                for j in i + 1..n {
                    self.labels[j] = 0;
                    self.bounds[j] = reach;
                }
                return Some(out);
            }
        }
        self.done = true;
        Some(out)
    }
}

/// The best partition found, its welfare, and how many were examined.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OptResult<S> {
    pub best: Partition,
    pub welfare: S,
    pub partitions_examined: u64,
}

/// Maximizes social welfare over every partition. Ties go to the first
/// maximizer in enumeration order.
pub fn optimal_partition<S: Scalar>(
    v: &ValuationProfile<S>,
    kind: GameKind,
) -> Result<OptResult<S>, GuardError> {
    let mut best: Option<(Partition, S)> = None;
    let mut examined = 0u64;
    for p in enumerate_partitions(v.n())? {
        examined += 1;
        let w = crate::game::social_welfare(v, kind, &p);
        match &best {
            Some((_, bw)) if w <= *bw => {}
            _ => best = Some((p, w)),
        }
    }
    let (best, welfare) = best.expect("n ≥ 1 yields at least one partition");
    Ok(OptResult {
        best,
        welfare,
        partitions_examined: examined,
    })
}

/// Upper bound on the optimum for non-negative valuations: half the total
/// matrix sum, because any coalition contributing positive welfare has at
/// least two members.
pub fn optimal_welfare_upper_bound_nonneg<S: Scalar>(
    v: &ValuationProfile<S>,
) -> Result<S, WrongClassError> {
    match v.class() {
        ValuationClass::NonNegative | ValuationClass::Simple => {
            Ok(v.total_sum() / S::from_count(2))
        }
        other => Err(WrongClassError {
            operation: "non-negative welfare bound",
            class: other,
        }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Rational;

    fn rat(p: i64, q: i64) -> Rational {
        Rational::new(p.into(), q.into())
    }

    fn bell(n: usize) -> u64 {
        // Bell triangle: each row starts with the previous row's last entry,
        // and B(n) is the last entry of row n.
        let mut row = vec![1u64];
        for _ in 1..n {
            let mut next = vec![*row.last().unwrap()];
            for &x in &row {
                next.push(next.last().unwrap() + x);
            }
            row = next;
        }
        *row.last().unwrap()
    }

    #[test]
    fn partition_counts_match_bell_numbers() {
        let expected = [1u64, 2, 5, 15, 52, 203, 877, 4140, 21147];
        for (i, &want) in expected.iter().enumerate() {
            let n = i + 1;
            let got = enumerate_partitions(n).unwrap().count() as u64;
            assert_eq!(got, want, "Bell({n})");
            assert_eq!(bell(n), want, "triangle recurrence agrees");
        }
    }

    #[test]
    fn enumeration_is_exact_and_unique() {
        for n in 1..=6 {
            let all: Vec<Partition> = enumerate_partitions(n).unwrap().collect();
            let mut dedup = all.clone();
            dedup.sort_by_key(|p| format!("{p}"));
            dedup.dedup();
            assert_eq!(dedup.len(), all.len(), "duplicates at n={n}");
            for p in &all {
                assert_eq!(p.n(), n);
            }
        }
    }

    #[test]
    fn guard_rejects_out_of_range() {
        assert!(enumerate_partitions(0).is_err());
        assert!(enumerate_partitions(13).is_err());
        assert!(enumerate_partitions(12).is_ok());
    }

    #[test]
    fn first_and_last_partitions() {
        let mut it = enumerate_partitions(3).unwrap();
        assert_eq!(it.next().unwrap(), Partition::grand(3));
        assert_eq!(it.last().unwrap(), Partition::singletons(3));
    }

    fn cycle7(chord: bool) -> ValuationProfile<Rational> {
        let mut v = ValuationProfile::new(7, ValuationClass::Simple);
        for i in 0..7 {
            v.set(i, (i + 1) % 7, rat(1, 1));
        }
        if chord {
            v.set(1, 3, rat(1, 1)); // arc 2→4 in 1-indexed labels
        }
        v
    }

    #[test]
    fn seven_cycle_fractional_optimum() {
        let opt = optimal_partition(&cycle7(false), GameKind::Fhg).unwrap();
        assert_eq!(opt.welfare, rat(5, 3));
        assert_eq!(opt.partitions_examined, 877);
    }

    #[test]
    fn seven_cycle_with_chord_fractional_optimum() {
        let opt = optimal_partition(&cycle7(true), GameKind::Fhg).unwrap();
        assert_eq!(opt.welfare, rat(2, 1));
        // the documented optimum {2,3,4},{5,6},{1,7} attains it too
        let p = Partition::new(
            7,
            vec![
                crate::game::Coalition::new([1, 2, 3]),
                crate::game::Coalition::new([4, 5]),
                crate::game::Coalition::new([0, 6]),
            ],
        );
        assert_eq!(
            crate::game::social_welfare(&cycle7(true), GameKind::Fhg, &p),
            rat(2, 1)
        );
    }

    #[test]
    fn oracle_dominates_every_partition() {
        let v = cycle7(true);
        let opt = optimal_partition(&v, GameKind::Fhg).unwrap();
        for p in enumerate_partitions(7).unwrap() {
            assert!(crate::game::social_welfare(&v, GameKind::Fhg, &p) <= opt.welfare);
        }
    }

    #[test]
    fn nonneg_upper_bound() {
        let v = cycle7(false);
        let bound = optimal_welfare_upper_bound_nonneg(&v).unwrap();
        assert_eq!(bound, rat(7, 2));
        let opt = optimal_partition(&v, GameKind::Fhg).unwrap();
        assert!(opt.welfare <= bound);

        let zero = ValuationProfile::<Rational>::new(3, ValuationClass::Simple);
        assert_eq!(
            optimal_welfare_upper_bound_nonneg(&zero).unwrap(),
            rat(0, 1)
        );

        let mut single = ValuationProfile::new(2, ValuationClass::NonNegative);
        single.set(0, 1, rat(1, 1));
        assert_eq!(
            optimal_welfare_upper_bound_nonneg(&single).unwrap(),
            rat(1, 2)
        );
        let opt = optimal_partition(&single, GameKind::Fhg).unwrap();
        assert_eq!(opt.welfare, rat(1, 2));
    }

    #[test]
    fn four_cycle_sums_optimum_is_the_grand_coalition() {
        let inst = crate::instances::gen_four_cycle::<Rational>();
        let opt = optimal_partition(&inst.profile, GameKind::Ashg).unwrap();
        assert_eq!(opt.welfare, rat(4, 1));
        assert_eq!(opt.best, Partition::grand(4));
        assert_eq!(opt.partitions_examined, 15);
    }

    #[test]
    fn alternating_cycle_n4_fractional_optimum_pairs_up() {
        let inst =
            crate::instances::gen_nonneg_cycle(4, &rat(1, 100), &rat(1, 10000)).unwrap();
        let opt = optimal_partition(&inst.profile, GameKind::Fhg).unwrap();
        assert_eq!(opt.welfare, rat(1, 100)); // two alpha-pairs at alpha/2 each
        let pairs = Partition::new(
            4,
            vec![
                crate::game::Coalition::new([0, 1]),
                crate::game::Coalition::new([2, 3]),
            ],
        );
        assert_eq!(
            crate::game::social_welfare(&inst.profile, GameKind::Fhg, &pairs),
            rat(1, 100)
        );
    }

    #[test]
    fn nonneg_bound_dominates_random_instances() {
        let mut rng = crate::rng::Rng::new(0xb0bb);
        for _ in 0..60 {
            let n = 2 + rng.next_below(5) as usize;
            let mut v = ValuationProfile::new(n, ValuationClass::NonNegative);
            for i in 0..n {
                for j in 0..n {
                    if i != j && rng.next_below(3) > 0 {
                        v.set(i, j, rat(1 + rng.next_below(10) as i64, 10));
                    }
                }
            }
            let bound = optimal_welfare_upper_bound_nonneg(&v).unwrap();
            let opt = optimal_partition(&v, GameKind::Fhg).unwrap();
            assert!(
                opt.welfare <= bound,
                "OPT {} above bound {bound}",
                opt.welfare
            );
        }
    }

    #[test]
    fn wrong_class_is_rejected() {
        let v = ValuationProfile::<Rational>::new(3, ValuationClass::Duplex);
        assert!(optimal_welfare_upper_bound_nonneg(&v).is_err());
    }

    #[test]
    fn star_instance_optimum_groups_everyone_but_the_last() {
        let star = crate::instances::gen_duplex_star::<Rational>(8, 2).unwrap();
        let opt = optimal_partition(&star.profile, GameKind::Ashg).unwrap();
        assert_eq!(opt.welfare, rat(6, 1)); // n - 2
        let documented = Partition::new(
            8,
            vec![
                crate::game::Coalition::new(0..7),
                crate::game::Coalition::singleton(7),
            ],
        );
        assert_eq!(
            crate::game::social_welfare(&star.profile, GameKind::Ashg, &documented),
            rat(6, 1)
        );
    }

    #[test]
    fn grand_coalition_optimal_for_nonneg_ashg() {
        let mut rng = crate::rng::Rng::new(0xbeef);
        for _ in 0..40 {
            let n = 2 + rng.next_below(4) as usize;
            let mut v = ValuationProfile::new(n, ValuationClass::NonNegative);
            for i in 0..n {
                for j in 0..n {
                    if i != j && rng.next_below(2) == 0 {
                        let num = rng.next_below(5) as i64;
                        v.set(i, j, rat(num, 5));
                    }
                }
            }
            let opt = optimal_partition(&v, GameKind::Ashg).unwrap();
            let grand = crate::game::social_welfare(&v, GameKind::Ashg, &Partition::grand(n));
            assert_eq!(opt.welfare, grand);
        }
    }
}
