//! Named game instances: the constructions behind the lower-bound results,
//! seeded random instances, and a line-oriented text format.
//!
//! Agents are 1-indexed in files and labels (matching the usual drawings)
//! and 0-indexed in memory.
//!
//! File format:
//!
//! ```text
//! hedonic 1
//! # label simple-cycle7-v1
//! agents 7
//! class simple
//! game fhg
//! v 1 2 1
//! v 2 3 1
//! ```
//!
//! `#` starts a comment; a `# label <text>` comment carries the instance
//! label so that parse ∘ serialize is the identity. Value lines `v i j x`
//! hold only nonzero entries, `x` an exact rational (`p/q` or an integer).

use std::fmt::Write as _;

use num_traits::{One, Zero};
use thiserror::Error;

use crate::Rational;
use crate::game::{GameKind, ValuationClass, ValuationProfile};
use crate::rng::Rng;
use crate::scalar::Scalar;

/// A labeled game: profile plus utility rule.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Instance<S> {
    pub label: String,
    pub profile: ValuationProfile<S>,
    pub kind: GameKind,
}

#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum GeneratorError {
    #[error("variant must be 1 or 2, got {0}")]
    BadVariant(u8),
    #[error("epsilon must satisfy 0 < eps < 1/10, got {0}")]
    EpsilonOutOfRange(String),
    #[error("the cycle construction needs an even agent count ≥ 4, got {0}")]
    BadCycleSize(usize),
    #[error("cycle weights must satisfy 0 < beta < alpha < 1/n, got alpha={alpha}, beta={beta}")]
    BadCycleWeights { alpha: String, beta: String },
    #[error("the star construction needs n ≥ 4, got {0}")]
    StarTooSmall(usize),
    #[error("density must be a rational in [0, 1] with denominator ≤ 10^6, got {0}")]
    BadDensity(String),
}

/// The 3-agent general-valuations gap pair: arcs 1→2 (ε) and 3→2 (9/10),
/// with 2→3 carrying −1 in variant 1 and −ε in variant 2.
pub fn gen_general_gap<S: Scalar>(eps: &S, variant: u8) -> Result<Instance<S>, GeneratorError> {
    if variant != 1 && variant != 2 {
        return Err(GeneratorError::BadVariant(variant));
    }
    let tenth = S::one() / S::from_count(10);
    if !(*eps > S::zero() && *eps < tenth) {
        return Err(GeneratorError::EpsilonOutOfRange(eps.to_string()));
    }
    let mut v = ValuationProfile::new(3, ValuationClass::General);
    v.set(0, 1, eps.clone());
    let middle = if variant == 1 {
        -S::one()
    } else {
        -eps.clone()
    };
    v.set(1, 2, middle);
    v.set(2, 1, S::from_count(9) / S::from_count(10));
    Ok(Instance {
        label: format!("general-gap-v{variant}-eps{eps}"),
        profile: v,
        kind: GameKind::Ashg,
    })
}

/// The even directed cycle with alternating weights: odd agents point at
/// their successor with α, even agents with β, and the cycle closes with β.
/// Requires 0 < β < α < 1/n.
pub fn gen_nonneg_cycle<S: Scalar>(
    n: usize,
    alpha: &S,
    beta: &S,
) -> Result<Instance<S>, GeneratorError> {
    if n < 4 || !n.is_multiple_of(2) {
        return Err(GeneratorError::BadCycleSize(n));
    }
    let over_n = S::one() / S::from_count(n);
    if !(*beta > S::zero() && beta < alpha && *alpha < over_n) {
        return Err(GeneratorError::BadCycleWeights {
            alpha: alpha.to_string(),
            beta: beta.to_string(),
        });
    }
    let mut v = ValuationProfile::new(n, ValuationClass::NonNegative);
    for i in 0..n {
        let weight = if i % 2 == 0 {
            alpha.clone()
        } else {
            beta.clone()
        };
        v.set(i, (i + 1) % n, weight);
    }
    Ok(Instance {
        label: format!("nonneg-cycle-n{n}-a{alpha}-b{beta}"),
        profile: v,
        kind: GameKind::Fhg,
    })
}

/// The duplex star pair on `n ≥ 4` agents. Everybody among the first n−2
/// wants agent n−1; agent n−1 wants agent n, and in variant 1 rejects all
/// others with −1 (variant 2 is neutral instead); agent n rejects the first
/// n−2 agents and is neutral toward n−1.
pub fn gen_duplex_star<S: Scalar>(n: usize, variant: u8) -> Result<Instance<S>, GeneratorError> {
    if variant != 1 && variant != 2 {
        return Err(GeneratorError::BadVariant(variant));
    }
    if n < 4 {
        return Err(GeneratorError::StarTooSmall(n));
    }
    let hub = n - 2; // agent n-1 of the 1-indexed description
    let last = n - 1; // agent n
    let mut v = ValuationProfile::new(n, ValuationClass::Duplex);
    for i in 0..n - 2 {
        v.set(i, hub, S::one());
    }
    v.set(hub, last, S::one());
    if variant == 1 {
        for j in 0..n - 2 {
            v.set(hub, j, -S::one());
        }
    }
    for j in 0..n - 2 {
        v.set(last, j, -S::one());
    }
    Ok(Instance {
        label: format!("duplex-star-v{variant}-n{n}"),
        profile: v,
        kind: GameKind::Ashg,
    })
}

/// The simple 7-cycle (variant 1) and the 7-cycle plus the chord 2→4
/// (variant 2).
pub fn gen_simple_cycle7<S: Scalar>(variant: u8) -> Result<Instance<S>, GeneratorError> {
    if variant != 1 && variant != 2 {
        return Err(GeneratorError::BadVariant(variant));
    }
    let mut v = ValuationProfile::new(7, ValuationClass::Simple);
    for i in 0..7 {
        v.set(i, (i + 1) % 7, S::one());
    }
    if variant == 2 {
        v.set(1, 3, S::one());
    }
    Ok(Instance {
        label: format!("simple-cycle7-v{variant}"),
        profile: v,
        kind: GameKind::Fhg,
    })
}

/// The duplex 4-cycle with unit arcs (1,2),(2,3),(3,4),(4,1): the instance
/// showing that iterating the pairing mechanism breaks strategyproofness.
pub fn gen_four_cycle<S: Scalar>() -> Instance<S> {
    let mut v = ValuationProfile::new(4, ValuationClass::Duplex);
    for i in 0..4 {
        v.set(i, (i + 1) % 4, S::one());
    }
    Instance {
        label: "four-cycle".to_string(),
        profile: v,
        kind: GameKind::Ashg,
    }
}

/// Seeded random instance: each off-diagonal entry is nonzero with
/// probability `density`, drawn uniformly from the class's nonzero values
/// (denominator ≤ 100 for the continuous classes). Deterministic in `seed`.
pub fn gen_random<S: Scalar>(
    class: ValuationClass,
    n: usize,
    density: &S,
    kind: GameKind,
    seed: u64,
) -> Result<Instance<S>, GeneratorError> {
    let d = density.to_rational();
    let (num, den): (u64, u64) = if d < Rational::zero() || d > Rational::one() {
        return Err(GeneratorError::BadDensity(density.to_string()));
    } else {
        let num = u64::try_from(d.numer()).ok();
        let den = u64::try_from(d.denom()).ok();
        match (num, den) {
            (Some(n), Some(d)) if d <= 1_000_000 => (n, d),
            _ => return Err(GeneratorError::BadDensity(density.to_string())),
        }
    };
    let mut rng = Rng::new(seed);
    let mut v = ValuationProfile::new(n, class);
    for i in 0..n {
        for j in 0..n {
            if i == j || !rng.next_bool_with_probability(num, den) {
                continue;
            }
            let value = match class {
                ValuationClass::Simple => S::one(),
                ValuationClass::Duplex => {
                    if rng.next_below(2) == 0 {
                        S::one()
                    } else {
                        -S::one()
                    }
                }
                ValuationClass::NonNegative | ValuationClass::General => {
                    let q = 1 + rng.next_below(100);
                    let p = 1 + rng.next_below(q);
                    let mag = S::from_count(p as usize) / S::from_count(q as usize);
                    if class == ValuationClass::General && rng.next_below(2) == 1 {
                        -mag
                    } else {
                        mag
                    }
                }
            };
            v.set(i, j, value);
        }
    }
    Ok(Instance {
        label: format!("random-{}-n{n}-d{density}-s{seed}", class.name()),
        profile: v,
        kind,
    })
}

#[derive(Clone, Debug, Error, PartialEq, Eq)]
#[error("line {line}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub message: String,
}

fn err(line: usize, message: impl Into<String>) -> ParseError {
    ParseError {
        line,
        message: message.into(),
    }
}

/// Renders an instance in the file format. Values are written reduced, as
/// `p/q` or a bare integer; agents are 1-indexed.
pub fn serialize_instance<S: Scalar>(inst: &Instance<S>) -> String {
    let mut out = String::new();
    out.push_str("hedonic 1\n");
    if !inst.label.is_empty() {
        let _ = writeln!(out, "# label {}", inst.label);
    }
    let _ = writeln!(out, "agents {}", inst.profile.n());
    let _ = writeln!(out, "class {}", inst.profile.class());
    let _ = writeln!(out, "game {}", inst.kind);
    for (i, j, value) in inst.profile.entries() {
        let _ = writeln!(out, "v {} {} {}", i + 1, j + 1, value.to_rational());
    }
    out
}

/// Parses the file format, reporting the offending line on failure.
pub fn parse_instance(text: &str) -> Result<Instance<Rational>, ParseError> {
    let mut label = String::new();
    let mut n: Option<usize> = None;
    let mut class: Option<ValuationClass> = None;
    let mut kind: Option<GameKind> = None;
    let mut profile: Option<ValuationProfile<Rational>> = None;
    let mut saw_magic = false;

    for (idx, raw) in text.lines().enumerate() {
        let lineno = idx + 1;
        let trimmed = raw.trim();
        if let Some(comment) = trimmed.strip_prefix('#') {
            if let Some(l) = comment.trim_start().strip_prefix("label ")
                && label.is_empty()
            {
                label = l.trim().to_string();
            }
            continue;
        }
        let line = match trimmed.find('#') {
            Some(pos) => trimmed[..pos].trim_end(),
            None => trimmed,
        };
        if line.is_empty() {
            continue;
        }
        let tokens: Vec<&str> = line.split_whitespace().collect();
        if !saw_magic {
            if tokens != ["hedonic", "1"] {
                return Err(err(lineno, "expected magic header `hedonic 1`"));
            }
            saw_magic = true;
            continue;
        }
        match tokens[0] {
            "agents" => {
                if n.is_some() {
                    return Err(err(lineno, "duplicate `agents` line"));
                }
                let [_, count] = tokens[..] else {
                    return Err(err(lineno, "expected `agents <n>`"));
                };
                let count: usize = count
                    .parse()
                    .map_err(|_| err(lineno, format!("invalid agent count `{count}`")))?;
                if count == 0 {
                    return Err(err(lineno, "a game needs at least one agent"));
                }
                n = Some(count);
            }
            "class" => {
                if class.is_some() {
                    return Err(err(lineno, "duplicate `class` line"));
                }
                let [_, name] = tokens[..] else {
                    return Err(err(
                        lineno,
                        "expected `class <general|nonneg|duplex|simple>`",
                    ));
                };
                class = Some(name.parse().map_err(|e: String| err(lineno, e))?);
            }
            "game" => {
                if kind.is_some() {
                    return Err(err(lineno, "duplicate `game` line"));
                }
                let [_, name] = tokens[..] else {
                    return Err(err(lineno, "expected `game <ashg|fhg>`"));
                };
                kind = Some(name.parse().map_err(|e: String| err(lineno, e))?);
            }
            "v" => {
                let (n, class) = match (n, class) {
                    (Some(n), Some(c)) => (n, c),
                    _ => {
                        return Err(err(
                            lineno,
                            "value lines must come after `agents` and `class`",
                        ));
                    }
                };
                let profile = profile.get_or_insert_with(|| ValuationProfile::new(n, class));
                let [_, i, j, value] = tokens[..] else {
                    return Err(err(lineno, "expected `v <i> <j> <value>`"));
                };
                let parse_agent = |tok: &str| -> Result<usize, ParseError> {
                    let id: usize = tok
                        .parse()
                        .map_err(|_| err(lineno, format!("invalid agent id `{tok}`")))?;
                    if id < 1 || id > n {
                        return Err(err(lineno, format!("agent id {id} out of range 1..={n}")));
                    }
                    Ok(id - 1)
                };
                let i = parse_agent(i)?;
                let j = parse_agent(j)?;
                if i == j {
                    return Err(err(lineno, "nonzero diagonal entry"));
                }
                let value: Rational = value
                    .parse()
                    .map_err(|_| err(lineno, format!("invalid rational `{value}`")))?;
                if value.is_zero() {
                    return Err(err(lineno, "explicit zero entry (omit it instead)"));
                }
                if !class.admits(&value) {
                    return Err(err(lineno, format!("value {value} violates class {class}")));
                }
                if !profile.get(i, j).is_zero() {
                    return Err(err(
                        lineno,
                        format!("duplicate entry ({}, {})", i + 1, j + 1),
                    ));
                }
                profile.set(i, j, value);
            }
            other => return Err(err(lineno, format!("unknown directive `{other}`"))),
        }
    }

    let last = text.lines().count();
    if !saw_magic {
        return Err(err(1, "missing magic header `hedonic 1`"));
    }
    let n = n.ok_or_else(|| err(last, "missing `agents` line"))?;
    let class = class.ok_or_else(|| err(last, "missing `class` line"))?;
    let kind = kind.ok_or_else(|| err(last, "missing `game` line"))?;
    Ok(Instance {
        label,
        profile: profile.unwrap_or_else(|| ValuationProfile::new(n, class)),
        kind,
    })
}
