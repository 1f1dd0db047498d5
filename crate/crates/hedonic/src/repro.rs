//! End-to-end reproduction checks: every headline value, bound and behavior
//! the library is supposed to exhibit, verified with exact arithmetic.
//!
//! The CLI's `repro` command prints one PASS/FAIL line per check; the
//! acceptance test target runs the same checks one at a time.

use std::collections::BTreeSet;
use std::fs;
use std::path::Path;
use std::time::Instant;

use num_traits::Zero;

use crate::game::{
    Agent, Coalition, GameKind, Partition, ValuationClass, ValuationProfile, social_welfare,
};
use crate::instances::{
    Instance, gen_duplex_star, gen_four_cycle, gen_general_gap, gen_nonneg_cycle, gen_random,
    gen_simple_cycle7, parse_instance, serialize_instance,
};
use crate::matching::{
    Matching, UndirectedWeightedGraph, brute_force_max_matching, intra_coalition_max_matching,
    matching_precedes, max_weight_matching,
};
use crate::mechanisms::{AgentOrdering, MechanismId, build_gbar, run_mechanism};
use crate::oracle::{enumerate_partitions, optimal_partition};
use crate::rng::Rng;
use crate::verify::{
    DeviationSpace, RatioValue, SpOutcome, approx_ratio, check_strategyproof,
    check_strategyproof_fn, controls, enumerate_profiles,
};
use crate::{Rational, Scalar};

/// Identifiers of all checks, in execution order.
pub const CHECK_IDS: [&str; 12] = [
    "corpus-golden",
    "cycle7-optimum",
    "cycle7-chord-optimum",
    "duplex-star-gap",
    "alternating-cycle-gap",
    "sp-exhaustive",
    "iterated-negative-control",
    "matching-2approx",
    "matching-tightness",
    "acceptability",
    "oracle-selfcheck",
    "gap-instances",
];

#[derive(Clone, Debug)]
pub struct CheckResult {
    pub id: &'static str,
    pub passed: bool,
    pub detail: String,
}

/// Runs one check by id; `None` for unknown ids.
pub fn run_check(id: &str, corpus_dir: &Path) -> Option<CheckResult> {
    let id: &'static str = CHECK_IDS.iter().find(|c| **c == id)?;
    let outcome = match id {
        "corpus-golden" => check_corpus_golden(corpus_dir),
        "cycle7-optimum" => check_cycle7_optimum(),
        "cycle7-chord-optimum" => check_cycle7_chord_optimum(),
        "duplex-star-gap" => check_duplex_star_gap(),
        "alternating-cycle-gap" => check_alternating_cycle_gap(),
        "sp-exhaustive" => check_sp_exhaustive(),
        "iterated-negative-control" => check_iterated_negative_control(),
        "matching-2approx" => check_matching_two_approx(),
        "matching-tightness" => check_matching_tightness(),
        "acceptability" => check_acceptability(),
        "oracle-selfcheck" => check_oracle_selfcheck(),
        "gap-instances" => check_lower_bound_gaps(),
        _ => unreachable!("id comes from CHECK_IDS"),
    };
    Some(match outcome {
        Ok(detail) => CheckResult {
            id,
            passed: true,
            detail,
        },
        Err(detail) => CheckResult {
            id,
            passed: false,
            detail,
        },
    })
}

/// Runs every check whose id contains `only` (all of them when absent).
pub fn run_all(corpus_dir: &Path, only: Option<&str>) -> Vec<CheckResult> {
    CHECK_IDS
        .iter()
        .filter(|id| only.is_none_or(|pat| id.contains(pat)))
        .filter_map(|id| run_check(id, corpus_dir))
        .collect()
}

fn rat(p: i64, q: i64) -> Rational {
    Rational::new(p.into(), q.into())
}

fn ensure(cond: bool, msg: String) -> Result<(), String> {
    if cond { Ok(()) } else { Err(msg) }
}

fn golden_corpus() -> Vec<(&'static str, Instance<Rational>)> {
    let eps = rat(1, 100);
    vec![
        (
            "general-gap-v1.hg",
            gen_general_gap(&eps, 1).expect("valid"),
        ),
        (
            "general-gap-v2.hg",
            gen_general_gap(&eps, 2).expect("valid"),
        ),
        (
            "nonneg-cycle-n4.hg",
            gen_nonneg_cycle(4, &rat(1, 100), &rat(1, 10000)).expect("valid"),
        ),
        (
            "duplex-star-v1-n8.hg",
            gen_duplex_star(8, 1).expect("valid"),
        ),
        (
            "duplex-star-v2-n8.hg",
            gen_duplex_star(8, 2).expect("valid"),
        ),
        ("simple-cycle7-v1.hg", gen_simple_cycle7(1).expect("valid")),
        ("simple-cycle7-v2.hg", gen_simple_cycle7(2).expect("valid")),
        ("four-cycle.hg", gen_four_cycle()),
    ]
}

fn check_corpus_golden(corpus_dir: &Path) -> Result<String, String> {
    let entries = golden_corpus();
    for (name, inst) in &entries {
        let path = corpus_dir.join(name);
        let text = fs::read_to_string(&path)
            .map_err(|e| format!("{}: cannot read golden file: {e}", path.display()))?;
        let expected = serialize_instance(inst);
        ensure(
            text == expected,
            format!("{name}: golden file differs from its generator output"),
        )?;
        let parsed = parse_instance(&text).map_err(|e| format!("{name}: {e}"))?;
        ensure(
            parsed == *inst,
            format!("{name}: parsed instance differs from the generated one"),
        )?;
    }
    Ok(format!(
        "{} golden files match their generators byte for byte and round-trip",
        entries.len()
    ))
}

fn check_cycle7_optimum() -> Result<String, String> {
    let inst = gen_simple_cycle7::<Rational>(1).expect("valid");
    let opt = optimal_partition(&inst.profile, GameKind::Fhg).map_err(|e| e.to_string())?;
    ensure(
        opt.welfare == rat(5, 3),
        format!("OPT = {}, want 5/3", opt.welfare),
    )?;
    let grand = social_welfare(&inst.profile, GameKind::Fhg, &Partition::grand(7));
    ensure(
        grand == rat(1, 1),
        format!("grand welfare = {grand}, want 1"),
    )?;
    let report = approx_ratio(MechanismId::MatchingMechanism, None, &inst, GameKind::Fhg)
        .map_err(|e| e.to_string())?;
    ensure(
        report.mechanism_welfare == rat(3, 2),
        format!("matching welfare = {}, want 3/2", report.mechanism_welfare),
    )?;
    ensure(
        report.ratio == RatioValue::Finite(rat(10, 9)),
        format!("ratio = {}, want 10/9", report.ratio),
    )?;
    Ok("OPT 5/3, grand coalition 1, matching 3/2, ratio 10/9 ≤ 2".to_string())
}

fn check_cycle7_chord_optimum() -> Result<String, String> {
    let inst = gen_simple_cycle7::<Rational>(2).expect("valid");
    let opt = optimal_partition(&inst.profile, GameKind::Fhg).map_err(|e| e.to_string())?;
    ensure(
        opt.welfare == rat(2, 1),
        format!("OPT = {}, want 2", opt.welfare),
    )?;
    // the documented optimum (an equal-welfare tie is fine for the oracle)
    let documented = Partition::new(
        7,
        vec![
            Coalition::new([1, 2, 3]),
            Coalition::new([4, 5]),
            Coalition::new([0, 6]),
        ],
    );
    let w = social_welfare(&inst.profile, GameKind::Fhg, &documented);
    ensure(
        w == rat(2, 1),
        format!("documented partition has welfare {w}, want 2"),
    )?;
    Ok(format!("OPT 2 attained (oracle found {})", opt.best))
}

fn check_duplex_star_gap() -> Result<String, String> {
    let inst = gen_duplex_star::<Rational>(8, 2).expect("valid");
    let opt = optimal_partition(&inst.profile, GameKind::Ashg).map_err(|e| e.to_string())?;
    ensure(
        opt.welfare == rat(6, 1),
        format!("OPT = {}, want 6 = n-2", opt.welfare),
    )?;
    let report = approx_ratio(MechanismId::DuplexPairing, None, &inst, GameKind::Ashg)
        .map_err(|e| e.to_string())?;
    ensure(
        report.mechanism_welfare == rat(1, 1),
        format!("pairing welfare = {}, want 1", report.mechanism_welfare),
    )?;
    ensure(
        report.ratio == RatioValue::Finite(rat(6, 1)),
        format!("ratio = {}, want 6", report.ratio),
    )?;
    Ok("OPT 6 = n-2, pairing welfare 1, measured gap 6".to_string())
}

fn check_alternating_cycle_gap() -> Result<String, String> {
    let (alpha, beta) = (rat(1, 100), rat(1, 10000));
    let inst = gen_nonneg_cycle(6, &alpha, &beta).expect("valid");
    let opt = optimal_partition(&inst.profile, GameKind::Fhg).map_err(|e| e.to_string())?;
    ensure(
        opt.welfare == rat(3, 200),
        format!("OPT = {}, want (n/4)·alpha = 3/200", opt.welfare),
    )?;
    let grand = social_welfare(&inst.profile, GameKind::Fhg, &Partition::grand(6));
    let expected_grand = inst.profile.total_sum() / rat(6, 1);
    ensure(
        grand == expected_grand && grand == (alpha.clone() + beta.clone()) / rat(2, 1),
        format!("grand welfare = {grand}, want (alpha+beta)/2"),
    )?;
    let report = approx_ratio(MechanismId::GrandCoalition, None, &inst, GameKind::Fhg)
        .map_err(|e| e.to_string())?;
    let RatioValue::Finite(ratio) = &report.ratio else {
        return Err(format!("ratio = {}, want a finite value", report.ratio));
    };
    ensure(
        *ratio == rat(300, 101),
        format!("ratio = {ratio}, want 300/101"),
    )?;
    ensure(
        *ratio >= rat(29, 10) && *ratio < rat(3, 1),
        format!("ratio = {ratio}, want within [2.9, 3)"),
    )?;
    Ok("OPT 3/200, grand 101/20000, ratio 300/101 ∈ [2.9, n/2)".to_string())
}

/// Exhaustive strategyproofness sweep for the pairing mechanism over every
/// duplex truth at n = 3. Returns (truths swept, violating truths, first
/// witness description).
pub fn sweep_duplex_pairing_n3() -> Result<(u64, u64, Option<String>), String> {
    let space = DeviationSpace::exhaustive(ValuationClass::Duplex, 3).map_err(|e| e.to_string())?;
    let ord = AgentOrdering::identity(3);
    let mut truths = 0u64;
    let mut violations = 0u64;
    let mut first: Option<String> = None;
    for truth in
        enumerate_profiles::<Rational>(ValuationClass::Duplex, 3).map_err(|e| e.to_string())?
    {
        truths += 1;
        let report = check_strategyproof(
            MechanismId::DuplexPairing,
            &ord,
            GameKind::Ashg,
            &truth,
            &space,
        )
        .map_err(|e| e.to_string())?;
        if report.outcome != SpOutcome::Holds {
            violations += 1;
            if first.is_none() {
                let w = report.witness.expect("violated verdicts carry a witness");
                let arcs: Vec<String> = truth
                    .entries()
                    .map(|(i, j, v)| format!("d_{}({})={v}", i + 1, j + 1))
                    .collect();
                let row: Vec<String> = w
                    .deviation
                    .iter()
                    .map(|(j, v)| format!("d'({})={v}", j + 1))
                    .collect();
                first = Some(format!(
                    "truth [{}]: agent {} declares [{}], utility {} -> {}",
                    arcs.join(", "),
                    w.agent + 1,
                    row.join(", "),
                    w.utility_truthful,
                    w.utility_deviating
                ));
            }
        }
    }
    Ok((truths, violations, first))
}

/// Exhaustive strategyproofness sweep for the matching mechanism over every
/// simple truth at n = 4. Returns (truths swept, violating truths).
pub fn sweep_matching_n4() -> Result<(u64, u64), String> {
    let space = DeviationSpace::exhaustive(ValuationClass::Simple, 4).map_err(|e| e.to_string())?;
    let ord = AgentOrdering::identity(4);
    let mut truths = 0u64;
    let mut violations = 0u64;
    for truth in
        enumerate_profiles::<Rational>(ValuationClass::Simple, 4).map_err(|e| e.to_string())?
    {
        truths += 1;
        let report = check_strategyproof(
            MechanismId::MatchingMechanism,
            &ord,
            GameKind::Fhg,
            &truth,
            &space,
        )
        .map_err(|e| e.to_string())?;
        if report.outcome != SpOutcome::Holds {
            violations += 1;
        }
    }
    Ok((truths, violations))
}

fn check_sp_exhaustive() -> Result<String, String> {
    let start = Instant::now();

    let (duplex_truths, duplex_violations, witness) = sweep_duplex_pairing_n3()?;
    ensure(
        duplex_truths == 729,
        format!("swept {duplex_truths} duplex truths, want 3^6 = 729"),
    )?;

    let (simple_truths, simple_violations) = sweep_matching_n4()?;
    ensure(
        simple_truths == 4096,
        format!("swept {simple_truths} simple truths, want 2^12 = 4096"),
    )?;
    ensure(
        simple_violations == 0,
        format!("matching mechanism manipulated on {simple_violations} simple truths"),
    )?;

    let elapsed = start.elapsed();
    ensure(
        elapsed.as_secs() < 60,
        format!("sweep took {elapsed:.1?}, budget is 60s"),
    )?;

    // Known red: the pairing mechanism is manipulable exactly as swept.
    // Withdrawing a truthful -1 arc un-sinks a rival's partner, derails the
    // sink pairing at an earlier agent, and redirects the pair to the
    // manipulator via the precedence case. The check states the required
    // property and reports the verifier's witness.
    ensure(
        duplex_violations == 0,
        format!(
            "pairing mechanism manipulated on {duplex_violations} of {duplex_truths} duplex truths \
             (matching half clean: 0 of {simple_truths}); first witness: {}",
            witness.unwrap_or_default()
        ),
    )?;
    Ok(format!(
        "no violation over 729 duplex truths (9 deviations/agent) and 4096 simple truths (8 deviations/agent) in {elapsed:.1?}"
    ))
}

fn check_iterated_negative_control() -> Result<String, String> {
    let inst = gen_four_cycle::<Rational>();
    let ord = AgentOrdering::identity(4);
    let space = DeviationSpace::exhaustive(ValuationClass::Duplex, 4).map_err(|e| e.to_string())?;
    let report = check_strategyproof_fn(
        |d| controls::iterated_duplex_pairing(d, &ord),
        GameKind::Ashg,
        &inst.profile,
        &space,
    )
    .map_err(|e| e.to_string())?;
    ensure(
        report.outcome == SpOutcome::Violated,
        "iterated pairing was not caught manipulating".to_string(),
    )?;
    let witness = report
        .witness
        .ok_or("violated verdict carries no witness")?;
    ensure(
        witness.agent == 0,
        format!("witness agent {}, want agent 1", witness.agent + 1),
    )?;
    let expected: std::collections::BTreeMap<Agent, Rational> =
        [(1usize, rat(1, 1)), (3usize, rat(-1, 1))]
            .into_iter()
            .collect();
    ensure(
        witness.deviation == expected,
        format!(
            "witness deviation {:?}, want agent 1 adding -1 toward agent 4",
            witness.deviation
        ),
    )?;
    ensure(
        witness.utility_truthful == rat(0, 1) && witness.utility_deviating == rat(1, 1),
        format!(
            "witness utilities {} → {}, want 0 → 1",
            witness.utility_truthful, witness.utility_deviating
        ),
    )?;
    let (u_truth, u_dev) = witness
        .replay(
            |d| controls::iterated_duplex_pairing(d, &ord),
            GameKind::Ashg,
        )
        .map_err(|e| e.to_string())?;
    ensure(
        u_truth == witness.utility_truthful && u_dev == witness.utility_deviating,
        "witness replay does not reproduce the recorded utilities".to_string(),
    )?;
    Ok(
        "verifier found the manipulation: agent 1 adds a -1 arc toward agent 4, utility 0 → 1"
            .to_string(),
    )
}

fn check_matching_two_approx() -> Result<String, String> {
    let base = Rng::new(0xA11CE);
    let mut worst: Option<Rational> = None;
    let mut undefined = 0u64;
    for trial in 0..1000u64 {
        let mut rng = base.fork(trial);
        let n = 2 + rng.next_below(6) as usize; // 2..=7
        let density = rat(rng.next_below(9) as i64, 8);
        let inst = gen_random(
            ValuationClass::Simple,
            n,
            &density,
            GameKind::Fhg,
            rng.next_u64(),
        )
        .map_err(|e| e.to_string())?;
        let report = approx_ratio(MechanismId::MatchingMechanism, None, &inst, GameKind::Fhg)
            .map_err(|e| e.to_string())?;
        match &report.ratio {
            RatioValue::Undefined => {
                ensure(
                    report.opt_welfare.is_zero() && report.mechanism_welfare.is_zero(),
                    format!("{}: undefined ratio on nonzero welfare", inst.label),
                )?;
                undefined += 1;
            }
            RatioValue::Infinite => {
                return Err(format!(
                    "{}: infinite ratio for the matching mechanism",
                    inst.label
                ));
            }
            RatioValue::Finite(r) => {
                ensure(
                    *r <= rat(2, 1),
                    format!("{}: ratio {r} exceeds 2", inst.label),
                )?;
                if worst.as_ref().is_none_or(|w| r > w) {
                    worst = Some(r.clone());
                }
            }
        }
        check_matching_proof_inequalities(&inst).map_err(|e| format!("{}: {e}", inst.label))?;
    }
    let worst = worst.map_or("none".to_string(), |w| w.to_string());
    Ok(format!(
        "1000 seeded instances: every ratio ≤ 2 (worst finite {worst}, {undefined} undefined), proof inequalities hold"
    ))
}

/// The two matching-bound inequalities and the aggregate chain
/// SW(C*) ≤ w(m′) ≤ w(m), checked on the instance's optimal partition.
fn check_matching_proof_inequalities(inst: &Instance<Rational>) -> Result<(), String> {
    let gbar = build_gbar(&inst.profile).map_err(|e| e.to_string())?;
    let opt = optimal_partition(&inst.profile, GameKind::Fhg).map_err(|e| e.to_string())?;
    let weight = |i: Agent, j: Agent| -> Rational {
        gbar.weight(i, j).cloned().unwrap_or_else(Rational::zero)
    };
    let mut m_prime_weight = Rational::zero();
    for c in opt.best.coalitions() {
        let m_h = intra_coalition_max_matching(&gbar, c);
        let matched: BTreeSet<Agent> = m_h.pairs().flat_map(|(i, j)| [i, j]).collect();
        let stable: Vec<Agent> = c.members().filter(|a| !matched.contains(a)).collect();
        let b_count = Rational::from_count(stable.len());
        for (i, j) in m_h.pairs() {
            let w_ij = weight(i, j);
            let cross = stable.iter().fold(Rational::zero(), |acc, &b| {
                acc + weight(i, b) + weight(j, b)
            });
            ensure(
                cross.clone() <= w_ij.clone() * (b_count.clone() + rat(1, 1)),
                format!("edge ({i},{j}): Σ_b w(i,b)+w(j,b) = {cross} exceeds w(i,j)(|B|+1)"),
            )?;
        }
        let m_h_weight = m_h.total_weight(&gbar);
        let induced_weight = gbar.induced(&matched).total_weight();
        let e_hat = induced_weight - m_h_weight.clone();
        let slots = Rational::from_count(matched.len()) - rat(2, 1);
        ensure(
            e_hat.clone() <= m_h_weight.clone() * slots,
            format!("coalition {c}: w(Ê) = {e_hat} exceeds w(m′)(|A|-2)"),
        )?;
        m_prime_weight += m_h_weight;
    }
    ensure(
        opt.welfare <= m_prime_weight,
        format!("SW(C*) = {} exceeds w(m′) = {m_prime_weight}", opt.welfare),
    )?;
    let m = max_weight_matching(&gbar);
    ensure(
        m.total_weight(&gbar) >= m_prime_weight,
        "w(m) < w(m′): global matching lighter than the coalition-wise union".to_string(),
    )?;
    Ok(())
}

fn complete_reciprocal(n: usize) -> Instance<Rational> {
    let mut v = ValuationProfile::new(n, ValuationClass::Simple);
    for i in 0..n {
        for j in 0..n {
            if i != j {
                v.set(i, j, rat(1, 1));
            }
        }
    }
    Instance {
        label: format!("complete-reciprocal-n{n}"),
        profile: v,
        kind: GameKind::Fhg,
    }
}

fn check_matching_tightness() -> Result<String, String> {
    let mut previous: Option<Rational> = None;
    let mut shown = Vec::new();
    for n in [4usize, 6, 8] {
        let inst = complete_reciprocal(n);
        let report = approx_ratio(MechanismId::MatchingMechanism, None, &inst, GameKind::Fhg)
            .map_err(|e| e.to_string())?;
        let RatioValue::Finite(ratio) = report.ratio else {
            return Err(format!("n={n}: ratio {} is not finite", report.ratio));
        };
        let expected = rat(2 * (n as i64 - 1), n as i64);
        ensure(
            ratio == expected,
            format!("n={n}: ratio {ratio}, want 2(n-1)/n = {expected}"),
        )?;
        if n == 6 {
            ensure(ratio == rat(5, 3), format!("n=6: ratio {ratio}, want 5/3"))?;
        }
        if let Some(prev) = &previous {
            ensure(
                *prev <= ratio,
                format!("ratio decreased from {prev} to {ratio} at n={n}"),
            )?;
        }
        shown.push(ratio.to_string());
        previous = Some(ratio);
    }
    Ok(format!(
        "complete reciprocal digraphs: ratios {} are exactly 2(n-1)/n and nondecreasing",
        shown.join(" ≤ ")
    ))
}

fn check_acceptability() -> Result<String, String> {
    // fixed named instances, every compatible mechanism
    let mut checked = 0u64;
    for (_, inst) in golden_corpus() {
        for id in MechanismId::ALL {
            if !id.acceptable_on(inst.profile.class()) {
                continue;
            }
            let ord = AgentOrdering::identity(inst.profile.n());
            let outcome = run_mechanism(id, &inst.profile, &ord).map_err(|e| e.to_string())?;
            let welfare = social_welfare(&inst.profile, inst.kind, &outcome);
            ensure(
                welfare >= rat(0, 1),
                format!("{id} on {}: welfare {welfare} < 0", inst.label),
            )?;
            checked += 1;
        }
    }
    // seeded random instances across every class and kind
    let base = Rng::new(0xACCE97);
    for trial in 0..300u64 {
        let mut rng = base.fork(trial);
        let class = [
            ValuationClass::General,
            ValuationClass::NonNegative,
            ValuationClass::Duplex,
            ValuationClass::Simple,
        ][rng.next_below(4) as usize];
        let kind = [GameKind::Ashg, GameKind::Fhg][rng.next_below(2) as usize];
        let n = 2 + rng.next_below(5) as usize;
        let density = rat(rng.next_below(9) as i64, 8);
        let inst =
            gen_random(class, n, &density, kind, rng.next_u64()).map_err(|e| e.to_string())?;
        for id in MechanismId::ALL {
            if !id.acceptable_on(class) {
                continue;
            }
            let ord = AgentOrdering::identity(n);
            let outcome = run_mechanism(id, &inst.profile, &ord).map_err(|e| e.to_string())?;
            let welfare = social_welfare(&inst.profile, inst.kind, &outcome);
            ensure(
                welfare >= rat(0, 1),
                format!("{id} on {}: welfare {welfare} < 0", inst.label),
            )?;
            checked += 1;
        }
    }
    // the grand coalition is exactly optimal for non-negative sums
    let base = Rng::new(0x9EAD);
    for trial in 0..500u64 {
        let mut rng = base.fork(trial);
        let class = if rng.next_below(2) == 0 {
            ValuationClass::NonNegative
        } else {
            ValuationClass::Simple
        };
        let n = 2 + rng.next_below(6) as usize; // 2..=7
        let density = rat(rng.next_below(9) as i64, 8);
        let inst = gen_random(class, n, &density, GameKind::Ashg, rng.next_u64())
            .map_err(|e| e.to_string())?;
        let opt = optimal_partition(&inst.profile, GameKind::Ashg).map_err(|e| e.to_string())?;
        let grand = social_welfare(&inst.profile, GameKind::Ashg, &Partition::grand(n));
        ensure(
            grand == opt.welfare,
            format!(
                "{}: grand coalition {grand} misses OPT {}",
                inst.label, opt.welfare
            ),
        )?;
    }
    Ok(format!(
        "welfare ≥ 0 on {checked} mechanism runs; grand coalition equals OPT on 500 non-negative sum games"
    ))
}

/// Every matching of `g`, enumerated independently of the solvers.
fn all_matchings(g: &UndirectedWeightedGraph<Rational>) -> Vec<Matching> {
    fn go(
        n: usize,
        adj: &[Vec<usize>],
        v: usize,
        used: &mut [bool],
        stack: &mut Vec<(usize, usize)>,
        out: &mut Vec<Matching>,
    ) {
        if v == n {
            out.push(Matching::from_pairs(stack.iter().copied()));
            return;
        }
        if used[v] {
            go(n, adj, v + 1, used, stack, out);
            return;
        }
        go(n, adj, v + 1, used, stack, out);
        for &w in &adj[v] {
            if !used[w] {
                used[w] = true;
                stack.push((v, w));
                go(n, adj, v + 1, used, stack, out);
                stack.pop();
                used[w] = false;
            }
        }
    }
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); g.n()];
    for (i, j, _) in g.edges() {
        adj[i].push(j);
    }
    let mut out = Vec::new();
    go(
        g.n(),
        &adj,
        0,
        &mut vec![false; g.n()],
        &mut Vec::new(),
        &mut out,
    );
    out
}

fn check_oracle_selfcheck() -> Result<String, String> {
    let bell = [1u64, 2, 5, 15, 52, 203, 877, 4140, 21147];
    for (i, &want) in bell.iter().enumerate() {
        let n = i + 1;
        let got = enumerate_partitions(n).map_err(|e| e.to_string())?.count() as u64;
        ensure(got == want, format!("Bell({n}) = {got}, want {want}"))?;
    }
    let base = Rng::new(0x0B5E55);
    let mut order_checked = 0u64;
    for trial in 0..500u64 {
        let mut rng = base.fork(trial);
        let n = 2 + rng.next_below(7) as usize; // 2..=8
        let mut g: UndirectedWeightedGraph<Rational> = UndirectedWeightedGraph::new(n);
        let edge_prob = 1 + rng.next_below(7);
        for i in 0..n {
            for j in (i + 1)..n {
                if rng.next_bool_with_probability(edge_prob, 8) {
                    let num = 1 + rng.next_below(12) as i64;
                    let den = 1 + rng.next_below(6) as i64;
                    g.add_edge(i, j, rat(num, den));
                }
            }
        }
        let fast = max_weight_matching(&g);
        let slow = brute_force_max_matching(&g).map_err(|e| e.to_string())?;
        ensure(
            fast == slow,
            format!("trial {trial}: blossom and enumeration disagree on {g:?}"),
        )?;
        if n <= 6 {
            let best_weight = fast.total_weight(&g);
            for m in all_matchings(&g) {
                let w = m.total_weight(&g);
                ensure(
                    w <= best_weight,
                    format!("trial {trial}: enumeration found a heavier matching"),
                )?;
                if w == best_weight {
                    ensure(
                        !matching_precedes(&m, &fast, n),
                        format!("trial {trial}: returned optimum is not ≺-minimal"),
                    )?;
                }
            }
            order_checked += 1;
        }
    }
    Ok(format!(
        "Bell numbers match for n ≤ 9; solver agrees with enumeration on 500 graphs (≺-minimality fully checked on {order_checked})"
    ))
}

fn check_lower_bound_gaps() -> Result<String, String> {
    let eps = rat(1, 100);
    // general valuations: the instance pair behind the unbounded bound
    let i1 = gen_general_gap(&eps, 1).expect("valid");
    let opt1 = optimal_partition(&i1.profile, GameKind::Ashg).map_err(|e| e.to_string())?;
    ensure(
        opt1.welfare == eps,
        format!("gap I1: OPT = {}, want eps", opt1.welfare),
    )?;
    let i2 = gen_general_gap(&eps, 2).expect("valid");
    let opt2 = optimal_partition(&i2.profile, GameKind::Ashg).map_err(|e| e.to_string())?;
    ensure(
        opt2.welfare == rat(9, 10),
        format!("gap I2: OPT = {}, want 9/10", opt2.welfare),
    )?;
    let pair23 = Partition::new(3, vec![Coalition::singleton(0), Coalition::new([1, 2])]);
    let w23 = social_welfare(&i2.profile, GameKind::Ashg, &pair23);
    ensure(
        w23 == rat(9, 10) - eps.clone(),
        format!("gap I2: coalition {{2,3}} carries {w23}, want 9/10 - eps"),
    )?;
    let pair12 = Partition::new(3, vec![Coalition::new([0, 1]), Coalition::singleton(2)]);
    let w12 = social_welfare(&i2.profile, GameKind::Ashg, &pair12);
    ensure(
        w12 == eps,
        format!("gap I2: coalition {{1,2}} carries {w12}, want eps"),
    )?;

    // duplex star pair: the n-2 (sums) and 2 (fractional) gaps
    let star1 = gen_duplex_star::<Rational>(8, 1).expect("valid");
    let s1_ashg = optimal_partition(&star1.profile, GameKind::Ashg).map_err(|e| e.to_string())?;
    ensure(
        s1_ashg.welfare == rat(1, 1),
        format!("star I1: OPT = {}, want 1", s1_ashg.welfare),
    )?;
    let s1_fhg = optimal_partition(&star1.profile, GameKind::Fhg).map_err(|e| e.to_string())?;
    ensure(
        s1_fhg.welfare == rat(1, 2),
        format!("star I1: FHG OPT = {}, want 1/2", s1_fhg.welfare),
    )?;
    let star2 = gen_duplex_star::<Rational>(8, 2).expect("valid");
    let s2_fhg = optimal_partition(&star2.profile, GameKind::Fhg).map_err(|e| e.to_string())?;
    ensure(
        s2_fhg.welfare == rat(6, 7),
        format!(
            "star I2: FHG OPT = {}, want (n-2)/(n-1) = 6/7",
            s2_fhg.welfare
        ),
    )?;
    let ord = AgentOrdering::identity(8);
    let pairing = run_mechanism(MechanismId::DuplexPairing, &star2.profile, &ord)
        .map_err(|e| e.to_string())?;
    let pairing_fhg = social_welfare(&star2.profile, GameKind::Fhg, &pairing);
    ensure(
        pairing_fhg == rat(1, 2),
        format!("star I2: pairing fractional welfare {pairing_fhg}, want 1/2"),
    )?;
    Ok(
        "shipped gap pairs verified: I1/I2 optima eps vs 9/10 with the 9/10-eps coalition, star optima 1, 1/2 and 6/7"
            .to_string(),
    )
}
