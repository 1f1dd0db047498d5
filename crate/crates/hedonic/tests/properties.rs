//! Property tests over randomly generated games, partitions and graphs.

use proptest::prelude::*;

use hedonic::Rational;
use hedonic::game::{
    Coalition, GameKind, Partition, ValuationClass, ValuationProfile, coalition_sum,
    coalition_welfare, social_welfare, utility,
};
use hedonic::instances::{Instance, parse_instance, serialize_instance};
use hedonic::matching::{
    UndirectedWeightedGraph, brute_force_max_matching, matching_precedes, max_weight_matching,
};

fn rat(p: i64, q: i64) -> Rational {
    Rational::new(p.into(), q.into())
}

fn arb_class() -> impl Strategy<Value = ValuationClass> {
    prop_oneof![
        Just(ValuationClass::General),
        Just(ValuationClass::NonNegative),
        Just(ValuationClass::Duplex),
        Just(ValuationClass::Simple),
    ]
}

fn arb_kind() -> impl Strategy<Value = GameKind> {
    prop_oneof![Just(GameKind::Ashg), Just(GameKind::Fhg)]
}

fn arb_value(class: ValuationClass) -> BoxedStrategy<Rational> {
    match class {
        ValuationClass::General => (-100i64..=100).prop_map(|p| rat(p, 100)).boxed(),
        ValuationClass::NonNegative => (0i64..=100).prop_map(|p| rat(p, 100)).boxed(),
        ValuationClass::Duplex => (-1i64..=1).prop_map(|p| rat(p, 1)).boxed(),
        ValuationClass::Simple => (0i64..=1).prop_map(|p| rat(p, 1)).boxed(),
    }
}

fn arb_profile() -> impl Strategy<Value = ValuationProfile<Rational>> {
    (arb_class(), 1usize..=6).prop_flat_map(|(class, n)| {
        proptest::collection::vec((0..n, 0..n, arb_value(class)), 0..=2 * n * n).prop_map(
            move |entries| {
                let mut v = ValuationProfile::new(n, class);
                for (i, j, value) in entries {
                    if i != j {
                        v.set(i, j, value);
                    }
                }
                v
            },
        )
    })
}

/// A partition of [0, n) from arbitrary labels, relabeled canonically.
fn arb_partition(n: usize) -> impl Strategy<Value = Partition> {
    proptest::collection::vec(0..n, n).prop_map(|labels| {
        let mut canonical = Vec::with_capacity(labels.len());
        let mut seen: Vec<usize> = Vec::new();
        for l in labels {
            let pos = match seen.iter().position(|&s| s == l) {
                Some(p) => p,
                None => {
                    seen.push(l);
                    seen.len() - 1
                }
            };
            canonical.push(pos);
        }
        Partition::from_growth_string(&canonical)
    })
}

fn arb_game() -> impl Strategy<Value = (ValuationProfile<Rational>, Partition)> {
    arb_profile().prop_flat_map(|v| {
        let n = v.n();
        arb_partition(n).prop_map(move |p| (v.clone(), p))
    })
}

fn arb_graph() -> impl Strategy<Value = UndirectedWeightedGraph<Rational>> {
    (2usize..=6).prop_flat_map(|n| {
        proptest::collection::vec((0..n, 0..n, 1i64..=12, 1i64..=6), 0..=n * n).prop_map(
            move |edges| {
                let mut g = UndirectedWeightedGraph::new(n);
                for (i, j, p, q) in edges {
                    if i != j {
                        g.add_edge(i, j, rat(p, q));
                    }
                }
                g
            },
        )
    })
}

proptest! {
    /// Social welfare is by definition the sum of agent utilities.
    #[test]
    fn welfare_is_the_sum_of_utilities((v, p) in arb_game(), kind in arb_kind()) {
        let per_agent = (0..v.n()).fold(rat(0, 1), |acc, i| acc + utility(&v, kind, &p, i));
        prop_assert_eq!(social_welfare(&v, kind, &p), per_agent);
    }

    /// Fractional welfare of a coalition is its plain sum over its size.
    #[test]
    fn fractional_welfare_divides_the_sum((v, p) in arb_game()) {
        for c in p.coalitions() {
            let size = Rational::new((c.len() as i64).into(), 1.into());
            prop_assert_eq!(
                coalition_welfare(&v, GameKind::Fhg, c),
                coalition_sum(&v, c) / size
            );
        }
    }

    /// Singletons always yield zero; the grand coalition carries the total.
    #[test]
    fn degenerate_partitions(v in arb_profile(), kind in arb_kind()) {
        let n = v.n();
        prop_assert_eq!(social_welfare(&v, kind, &Partition::singletons(n)), rat(0, 1));
        let grand = social_welfare(&v, GameKind::Ashg, &Partition::grand(n));
        prop_assert_eq!(grand, v.total_sum());
    }

    /// The blossom solver and the exhaustive oracle agree exactly,
    /// including the order tie-break.
    #[test]
    fn matching_routes_agree(g in arb_graph()) {
        let fast = max_weight_matching(&g);
        let slow = brute_force_max_matching(&g).unwrap();
        prop_assert_eq!(fast, slow);
    }

    /// The matching order is a strict total order and ignores weights.
    #[test]
    fn matching_order_is_total(g in arb_graph(), scale in 2i64..=9) {
        let n = g.n();
        let a = max_weight_matching(&g);
        let mut scaled = UndirectedWeightedGraph::new(n);
        for (i, j, w) in g.edges() {
            scaled.add_edge(i, j, w * rat(scale, 1));
        }
        let b = max_weight_matching(&scaled);
        // rescaling weights moves nothing
        prop_assert_eq!(&a, &b);
        // trichotomy against a fixed comparison matching
        let probe = if n >= 2 {
            hedonic::matching::Matching::from_pairs([(0, 1)])
        } else {
            hedonic::matching::Matching::empty()
        };
        let eq = a == probe;
        let lt = matching_precedes(&a, &probe, n);
        let gt = matching_precedes(&probe, &a, n);
        prop_assert_eq!([eq, lt, gt].iter().filter(|&&x| x).count(), 1);
    }

    /// Parsing a serialized instance gives back the same instance.
    #[test]
    fn serialization_round_trips(
        v in arb_profile(),
        kind in arb_kind(),
        label in "[a-z][a-z0-9-]{0,15}",
    ) {
        let inst = Instance { label, profile: v, kind };
        let text = serialize_instance(&inst);
        let back = parse_instance(&text).expect("serialized instances parse");
        prop_assert_eq!(back, inst);
    }

    /// Every coalition's welfare is reproducible (exactness, no hidden state).
    #[test]
    fn evaluation_is_pure((v, p) in arb_game(), kind in arb_kind()) {
        for i in 0..v.n() {
            prop_assert_eq!(utility(&v, kind, &p, i), utility(&v, kind, &p, i));
        }
        let c = Coalition::new(0..v.n());
        prop_assert_eq!(coalition_sum(&v, &c), coalition_sum(&v, &c));
    }
}
