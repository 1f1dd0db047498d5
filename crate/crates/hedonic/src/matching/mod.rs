//! Exact maximum-weight matching with a declaration-independent tie-break.
//!
//! Among all matchings of maximum total weight we return the least one under
//! a fixed total order `≺` that depends only on the vertex count, never on
//! the weights. The order compares matchings as subsets of the complete
//! graph's edge set: edge `{i,j}` (with `i < j`) gets the lexicographic index
//! of `(i, j)`, a matching maps to the integer `Σ 2^index`, and smaller
//! integers come first. Consistent tie-breaking is what makes the matching
//! mechanism immune to strategic edge reporting.
//!
//! Two independent routes compute the same answer: a primal-dual blossom
//! solver run on adjusted weights that fold the tie-break into the
//! objective, and a guarded exhaustive enumeration used as the oracle.

mod blossom;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One, Zero};

use crate::game::{Agent, Coalition};
use crate::scalar::Scalar;
use crate::{GuardError, Rational};

/// Undirected graph with positive weights, no self-loops.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct UndirectedWeightedGraph<S> {
    n: usize,
    edges: BTreeMap<(usize, usize), S>,
}

impl<S: Scalar> UndirectedWeightedGraph<S> {
    pub fn new(n: usize) -> Self {
        UndirectedWeightedGraph {
            n,
            edges: BTreeMap::new(),
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// Inserts (or overwrites) edge `{i,j}` with weight `w > 0`.
    pub fn add_edge(&mut self, i: usize, j: usize, w: S) {
        assert!(i < self.n && j < self.n, "vertex out of range");
        assert_ne!(i, j, "no self-loops");
        assert!(w > S::zero(), "edge weights must be positive");
        self.edges.insert((i.min(j), i.max(j)), w);
    }

    pub fn weight(&self, i: usize, j: usize) -> Option<&S> {
        self.edges.get(&(i.min(j), i.max(j)))
    }

    /// Edges as `(i, j, weight)` with `i < j`, ascending by `(i, j)`.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize, &S)> {
        self.edges.iter().map(|(&(i, j), w)| (i, j, w))
    }

    /// Sum of all edge weights.
    pub fn total_weight(&self) -> S {
        self.edges
            .values()
            .fold(S::zero(), |acc, w| acc + w.clone())
    }

    /// Subgraph keeping only edges with both ends in `members`.
    /// Vertex identities (and hence the `≺` order) are preserved.
    pub fn induced(&self, members: &BTreeSet<Agent>) -> Self {
        let edges = self
            .edges
            .iter()
            .filter(|((i, j), _)| members.contains(i) && members.contains(j))
            .map(|(&k, w)| (k, w.clone()))
            .collect();
        UndirectedWeightedGraph { n: self.n, edges }
    }
}

/// A set of pairwise vertex-disjoint unordered pairs.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct Matching {
    pairs: BTreeSet<(usize, usize)>,
}

impl Matching {
    pub fn empty() -> Self {
        Matching::default()
    }

    /// Builds a matching from pairs, asserting vertex-disjointness.
    pub fn from_pairs(pairs: impl IntoIterator<Item = (usize, usize)>) -> Self {
        let mut seen = BTreeSet::new();
        let mut set = BTreeSet::new();
        for (i, j) in pairs {
            assert_ne!(i, j, "a matched pair needs two distinct vertices");
            assert!(seen.insert(i), "vertex {i} matched twice");
            assert!(seen.insert(j), "vertex {j} matched twice");
            set.insert((i.min(j), i.max(j)));
        }
        Matching { pairs: set }
    }

    fn from_mates(mates: &[Option<usize>]) -> Self {
        Matching::from_pairs(
            mates
                .iter()
                .enumerate()
                .filter_map(|(v, m)| m.map(|m| (v, m)))
                .filter(|&(v, m)| v < m),
        )
    }

    /// Pairs as `(i, j)` with `i < j`, ascending.
    pub fn pairs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.pairs.iter().copied()
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    /// The partner of `v`, if matched.
    pub fn partner(&self, v: usize) -> Option<usize> {
        self.pairs.iter().find_map(|&(i, j)| {
            if i == v {
                Some(j)
            } else if j == v {
                Some(i)
            } else {
                None
            }
        })
    }

    pub fn covers(&self, v: usize) -> bool {
        self.partner(v).is_some()
    }

    /// Total weight of the matching in `g`. Every pair must be an edge.
    pub fn total_weight<S: Scalar>(&self, g: &UndirectedWeightedGraph<S>) -> S {
        self.pairs.iter().fold(S::zero(), |acc, &(i, j)| {
            acc + g
                .weight(i, j)
                .cloned()
                .unwrap_or_else(|| panic!("pair ({i},{j}) is not an edge"))
        })
    }

    /// The matching's position key in the `≺` order over `n` vertices:
    /// `Σ 2^(canonical edge index)`. Injective over edge sets.
    pub fn order_key(&self, n: usize) -> BigUint {
        let mut key = BigUint::zero();
        for &(i, j) in &self.pairs {
            key.set_bit(canonical_edge_index(n, i, j) as u64, true);
        }
        key
    }
}

impl fmt::Display for Matching {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (k, (i, j)) in self.pairs().enumerate() {
            if k > 0 {
                write!(f, " ")?;
            }
            write!(f, "{{{i},{j}}}")?;
        }
        Ok(())
    }
}

/// Index of edge `{i,j}` in the lexicographic enumeration of the pairs of
/// `[0, n)`: (0,1), (0,2), …, (0,n−1), (1,2), …
pub fn canonical_edge_index(n: usize, i: usize, j: usize) -> usize {
    let (i, j) = (i.min(j), i.max(j));
    assert!(j < n && i != j, "not an edge of the complete graph on {n}");
    i * n - i * (i + 1) / 2 + (j - i - 1)
}

/// Strict `≺` comparison: does `a` precede `b` among matchings on `n`
/// vertices? Weights are deliberately absent from the signature.
pub fn matching_precedes(a: &Matching, b: &Matching, n: usize) -> bool {
    a.order_key(n) < b.order_key(n)
}

/// Enumeration guard for the brute-force route.
pub const MAX_BRUTE_FORCE_VERTICES: usize = 16;

/// The `≺`-minimal maximum-weight matching, by the blossom solver.
///
/// Weights are embedded exactly into the rationals, scaled to integers and
/// adjusted to `ŵ(e)·2^(E+1) − 2^(index(e))` with `E = n(n−1)/2`, so a single
/// exact optimization yields the tie-broken optimum: weight differences
/// dominate the adjustment, and among equal-weight matchings the smaller
/// order key wins.
pub fn max_weight_matching<S: Scalar>(g: &UndirectedWeightedGraph<S>) -> Matching {
    if g.edge_count() == 0 {
        return Matching::empty();
    }
    let n = g.n();
    let exact: Vec<(usize, usize, Rational)> =
        g.edges().map(|(i, j, w)| (i, j, w.to_rational())).collect();
    let common_denom = exact
        .iter()
        .fold(BigInt::one(), |acc, (_, _, w)| acc.lcm(w.denom()));
    let shift = BigInt::one() << (n * (n - 1) / 2 + 1);
    let adjusted: Vec<(usize, usize, Rational)> = exact
        .iter()
        .map(|(i, j, w)| {
            let scaled = (w * Rational::from_integer(common_denom.clone())).to_integer();
            debug_assert!(scaled > BigInt::zero());
            let key_bit = BigInt::one() << canonical_edge_index(n, *i, *j);
            (*i, *j, Rational::from_integer(scaled * &shift - key_bit))
        })
        .collect();
    Matching::from_mates(&blossom::solve(n, &adjusted))
}

/// The `≺`-minimal maximum-weight matching by exhaustive enumeration.
/// Independent of the blossom route; guarded to small instances.
pub fn brute_force_max_matching<S: Scalar>(
    g: &UndirectedWeightedGraph<S>,
) -> Result<Matching, GuardError> {
    if g.n() > MAX_BRUTE_FORCE_VERTICES {
        return Err(GuardError {
            what: "brute-force matching",
            limit: MAX_BRUTE_FORCE_VERTICES,
            requested: g.n(),
        });
    }
    let n = g.n();
    // neighbors[v] = edges (w, weight) with w > v
    let mut neighbors: Vec<Vec<(usize, Rational)>> = vec![Vec::new(); n];
    for (i, j, w) in g.edges() {
        neighbors[i].push((j, w.to_rational()));
    }

    type Candidate = (Rational, BigUint, Vec<(usize, usize)>);

    struct Search<'a> {
        n: usize,
        neighbors: &'a [Vec<(usize, Rational)>],
        used: Vec<bool>,
        stack: Vec<(usize, usize)>,
        weight: Rational,
        best: Option<Candidate>,
    }

    impl Search<'_> {
        fn consider(&mut self) {
            let key = Matching::from_pairs(self.stack.iter().copied()).order_key(self.n);
            let better = match &self.best {
                None => true,
                Some((bw, bk, _)) => self.weight > *bw || (self.weight == *bw && key < *bk),
            };
            if better {
                self.best = Some((self.weight.clone(), key, self.stack.clone()));
            }
        }

        fn recurse(&mut self, v: usize) {
            if v == self.n {
                self.consider();
                return;
            }
            if self.used[v] {
                self.recurse(v + 1);
                return;
            }
            // v stays unmatched
            self.recurse(v + 1);
            // or v pairs with a free higher neighbor
            for k in 0..self.neighbors[v].len() {
                let (w, dw) = self.neighbors[v][k].clone();
                if self.used[w] {
                    continue;
                }
                self.used[w] = true;
                self.stack.push((v, w));
                self.weight += &dw;
                self.recurse(v + 1);
                self.weight -= &dw;
                self.stack.pop();
                self.used[w] = false;
            }
        }
    }

    let mut search = Search {
        n,
        neighbors: &neighbors,
        used: vec![false; n],
        stack: Vec::new(),
        weight: Rational::zero(),
        best: None,
    };
    search.recurse(0);
    let (_, _, pairs) = search
        .best
        .expect("the empty matching is always a candidate");
    Ok(Matching::from_pairs(pairs))
}

/// Maximum-weight matching of the subgraph induced by coalition `c`,
/// under the same `≺` tie-break as the full graph.
pub fn intra_coalition_max_matching<S: Scalar>(
    g: &UndirectedWeightedGraph<S>,
    c: &Coalition,
) -> Matching {
    max_weight_matching(&g.induced(c.member_set()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Rational;

    fn rat(p: i64) -> Rational {
        Rational::from_integer(p.into())
    }

    fn cycle_graph(n: usize) -> UndirectedWeightedGraph<Rational> {
        let mut g = UndirectedWeightedGraph::new(n);
        for i in 0..n {
            g.add_edge(i, (i + 1) % n, rat(1));
        }
        g
    }

    /// Every matching of `g`, by the same branch structure as the oracle but
    /// collected rather than maximized.
    fn all_matchings(g: &UndirectedWeightedGraph<Rational>) -> Vec<Matching> {
        fn go(
            n: usize,
            edges: &[(usize, usize, Rational)],
            v: usize,
            used: &mut Vec<bool>,
            stack: &mut Vec<(usize, usize)>,
            out: &mut Vec<Matching>,
        ) {
            if v == n {
                out.push(Matching::from_pairs(stack.iter().copied()));
                return;
            }
            if used[v] {
                go(n, edges, v + 1, used, stack, out);
                return;
            }
            go(n, edges, v + 1, used, stack, out);
            for &(i, j, _) in edges {
                if i == v && !used[j] {
                    used[j] = true;
                    stack.push((i, j));
                    go(n, edges, v + 1, used, stack, out);
                    stack.pop();
                    used[j] = false;
                }
            }
        }
        let edges: Vec<_> = g.edges().map(|(i, j, w)| (i, j, w.clone())).collect();
        let mut out = Vec::new();
        go(
            g.n(),
            &edges,
            0,
            &mut vec![false; g.n()],
            &mut Vec::new(),
            &mut out,
        );
        out
    }

    #[test]
    fn edge_index_is_lexicographic() {
        assert_eq!(canonical_edge_index(3, 0, 1), 0);
        assert_eq!(canonical_edge_index(3, 0, 2), 1);
        assert_eq!(canonical_edge_index(3, 1, 2), 2);
        assert_eq!(canonical_edge_index(3, 2, 1), 2);
        // all indices distinct and dense for n = 6
        let mut seen = std::collections::BTreeSet::new();
        for i in 0..6 {
            for j in (i + 1)..6 {
                assert!(seen.insert(canonical_edge_index(6, i, j)));
            }
        }
        assert_eq!(seen.len(), 15);
        assert_eq!(*seen.last().unwrap(), 14);
    }

    #[test]
    fn precedes_is_a_strict_order() {
        let empty = Matching::empty();
        let m01 = Matching::from_pairs([(0, 1)]);
        let m02 = Matching::from_pairs([(0, 2)]);
        assert!(matching_precedes(&empty, &m01, 3));
        assert!(!matching_precedes(&m01, &empty, 3));
        assert!(matching_precedes(&m01, &m02, 3));
        assert!(!matching_precedes(&m01, &m01, 3));
    }

    #[test]
    fn tie_break_picks_smaller_edge_set() {
        // Path a-b-c with both edges weighing 2: two optimal matchings.
        let mut g = UndirectedWeightedGraph::new(3);
        g.add_edge(0, 1, rat(2));
        g.add_edge(1, 2, rat(2));
        let expected = Matching::from_pairs([(0, 1)]);
        assert_eq!(max_weight_matching(&g), expected);
        assert_eq!(brute_force_max_matching(&g).unwrap(), expected);
    }

    #[test]
    fn seven_cycle_gets_three_edges() {
        let g = cycle_graph(7);
        let m = max_weight_matching(&g);
        assert_eq!(m.len(), 3);
        assert_eq!(m.total_weight(&g), rat(3));
        assert_eq!(brute_force_max_matching(&g).unwrap(), m);
    }

    #[test]
    fn edgeless_graph_gives_empty_matching() {
        let g: UndirectedWeightedGraph<Rational> = UndirectedWeightedGraph::new(5);
        assert!(max_weight_matching(&g).is_empty());
        assert!(brute_force_max_matching(&g).unwrap().is_empty());
    }

    #[test]
    fn brute_force_guard() {
        let g: UndirectedWeightedGraph<Rational> = UndirectedWeightedGraph::new(17);
        let err = brute_force_max_matching(&g).unwrap_err();
        assert_eq!(err.requested, 17);
    }

    #[test]
    fn single_edge_and_triangle() {
        let mut g = UndirectedWeightedGraph::new(2);
        g.add_edge(0, 1, rat(2));
        assert_eq!(
            brute_force_max_matching(&g).unwrap(),
            Matching::from_pairs([(0, 1)])
        );

        let mut t = UndirectedWeightedGraph::new(3);
        t.add_edge(0, 1, rat(1));
        t.add_edge(0, 2, rat(1));
        t.add_edge(1, 2, rat(2));
        let expected = Matching::from_pairs([(1, 2)]);
        assert_eq!(brute_force_max_matching(&t).unwrap(), expected);
        assert_eq!(max_weight_matching(&t), expected);
    }

    #[test]
    fn intra_coalition_matches_inside_only() {
        let g = cycle_graph(7);
        // single vertex: nothing to match
        assert!(intra_coalition_max_matching(&g, &Coalition::singleton(0)).is_empty());
        // consecutive vertices 4,5,6 (an induced path): one edge
        let m = intra_coalition_max_matching(&g, &Coalition::new([4, 5, 6]));
        assert_eq!(m.len(), 1);
        assert_eq!(m.total_weight(&g), rat(1));
        // the whole vertex set: same as the global matching
        let all = Coalition::new(0..7);
        assert_eq!(
            intra_coalition_max_matching(&g, &all),
            max_weight_matching(&g)
        );
    }

    #[test]
    fn blossom_agrees_with_enumeration_on_random_graphs() {
        let mut rng = crate::rng::Rng::new(0x5eed_0001);
        for trial in 0..300 {
            let n = 2 + (rng.next_below(9) as usize); // 2..=10
            let mut g = UndirectedWeightedGraph::new(n);
            for i in 0..n {
                for j in (i + 1)..n {
                    if rng.next_below(2) == 0 {
                        let num = 1 + rng.next_below(12) as i64;
                        let den = 1 + rng.next_below(6) as i64;
                        g.add_edge(i, j, Rational::new(num.into(), den.into()));
                    }
                }
            }
            let fast = max_weight_matching(&g);
            let slow = brute_force_max_matching(&g).unwrap();
            assert_eq!(fast, slow, "trial {trial} on {g:?}");
        }
    }

    #[test]
    fn returned_matching_is_order_minimal_among_optima() {
        let mut rng = crate::rng::Rng::new(0x5eed_0002);
        for _ in 0..120 {
            let n = 2 + (rng.next_below(7) as usize); // 2..=8
            let mut g = UndirectedWeightedGraph::new(n);
            for i in 0..n {
                for j in (i + 1)..n {
                    if rng.next_below(3) > 0 {
                        g.add_edge(i, j, rat(1 + rng.next_below(3) as i64));
                    }
                }
            }
            let chosen = max_weight_matching(&g);
            let best_weight = chosen.total_weight(&g);
            for m in all_matchings(&g) {
                let w = m.total_weight(&g);
                assert!(w <= best_weight, "missed a heavier matching {m} in {g:?}");
                if w == best_weight {
                    assert!(
                        !matching_precedes(&m, &chosen, n),
                        "{m} precedes the returned optimum {chosen}"
                    );
                }
            }
        }
    }

    #[test]
    fn order_ignores_weights() {
        // Rescaling all weights leaves both the comparison and the chosen
        // edge set untouched.
        let mut rng = crate::rng::Rng::new(0x5eed_0003);
        for _ in 0..50 {
            let n = 3 + (rng.next_below(4) as usize);
            let mut light = UndirectedWeightedGraph::new(n);
            for i in 0..n {
                for j in (i + 1)..n {
                    if rng.next_below(2) == 0 {
                        light.add_edge(i, j, rat(2));
                    }
                }
            }
            let mut heavy = UndirectedWeightedGraph::new(n);
            for (i, j, w) in light.edges() {
                heavy.add_edge(i, j, w * rat(17));
            }
            assert_eq!(max_weight_matching(&light), max_weight_matching(&heavy));
            let a = Matching::from_pairs([(0, 1)]);
            let b = Matching::from_pairs([(0, 2)]);
            assert!(matching_precedes(&a, &b, n));
        }
    }

    #[test]
    fn round_robin_one_factorization_covers_complete_graph() {
        // The complete graph on an even number of vertices splits into k-1
        // perfect matchings (circle method), the fact behind the matching
        // mechanism's 2-approximation bound.
        for k in [2usize, 4, 6, 8] {
            let rounds = k - 1;
            let mut seen: BTreeSet<(usize, usize)> = BTreeSet::new();
            for r in 0..rounds {
                let mut round_pairs = Vec::new();
                // fix vertex k-1, rotate the rest (circle method)
                let mut slots: Vec<usize> = Vec::with_capacity(k);
                slots.push(k - 1);
                for idx in 0..(k - 1) {
                    slots.push((idx + r) % (k - 1));
                }
                for t in 0..k / 2 {
                    let a = slots[t];
                    let b = slots[k - 1 - t];
                    round_pairs.push((a.min(b), a.max(b)));
                }
                let m = Matching::from_pairs(round_pairs.iter().copied());
                assert_eq!(m.len(), k / 2, "round {r} is a perfect matching");
                for p in round_pairs {
                    assert!(seen.insert(p), "edge {p:?} repeated across rounds");
                }
            }
            assert_eq!(seen.len(), k * (k - 1) / 2, "all edges of K{k} covered");
        }
    }

    #[test]
    fn float_weights_take_the_exact_path() {
        let mut g: UndirectedWeightedGraph<f64> = UndirectedWeightedGraph::new(3);
        g.add_edge(0, 1, 2.0);
        g.add_edge(1, 2, 2.0);
        assert_eq!(max_weight_matching(&g), Matching::from_pairs([(0, 1)]));
    }
}
