//! Hypothesis selection policies and exact generalisation probabilities.
//!
//! Weakness-maximising induction picks, among the models of a known child
//! task, those with the largest extension. The rival policies (strongest,
//! uniform random, lexicographically first) exist so the harness can measure
//! how often each choice remains a model of a uniformly drawn strict parent.

use std::fmt;
use std::str::FromStr;

use num::{BigInt, BigRational, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lang::{Language, Statement};
use crate::task::{enumerate_parents, is_model_unchecked, valid_models, Task, TaskBounds};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Policy {
    Weakest,
    Strongest,
    Random { seed: u64 },
    LexicographicFirst,
}

impl Policy {
    pub fn label(&self) -> String {
        self.to_string()
    }
}

impl fmt::Display for Policy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Policy::Weakest => f.write_str("weakest"),
            Policy::Strongest => f.write_str("strongest"),
            Policy::Random { seed } => write!(f, "random({seed})"),
            Policy::LexicographicFirst => f.write_str("lexicographic-first"),
        }
    }
}

impl FromStr for Policy {
    type Err = Error;

    /// Accepts `weakest`, `strongest`, `lex`/`lexicographic-first`, `random`
    /// (seed 0), `random:N` and `random(N)`.
    fn from_str(s: &str) -> Result<Policy> {
        let s = s.trim();
        let seed_of = |t: &str| {
            t.parse::<u64>()
                .map_err(|_| Error::Scenario(format!("bad random seed in policy `{s}`")))
        };
        match s {
            "weakest" => Ok(Policy::Weakest),
            "strongest" => Ok(Policy::Strongest),
            "lex" | "lexicographic-first" | "lexicographic" => Ok(Policy::LexicographicFirst),
            "random" => Ok(Policy::Random { seed: 0 }),
            _ => {
                if let Some(rest) = s.strip_prefix("random:") {
                    Ok(Policy::Random {
                        seed: seed_of(rest)?,
                    })
                } else if let Some(rest) =
                    s.strip_prefix("random(").and_then(|r| r.strip_suffix(')'))
                {
                    Ok(Policy::Random {
                        seed: seed_of(rest)?,
                    })
                } else {
                    Err(Error::Scenario(format!("unknown policy `{s}`")))
                }
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InductionResult {
    /// Every hypothesis the policy considers equally good, sorted by mask.
    pub argmax_set: Vec<Statement>,
    /// Smallest mask of `argmax_set`.
    pub chosen: Statement,
    pub weakness_value: u128,
}

/// Selects hypotheses from M_α according to `policy`.
pub fn induce(lang: &Language, alpha: &Task, policy: Policy) -> Result<InductionResult> {
    let models = valid_models(lang, alpha)?;
    if models.is_empty() {
        return Err(Error::NoModel);
    }
    let weakness: Vec<u128> = models.iter().map(|&m| lang.weakness_fast(m)).collect();
    let selected: Vec<Statement> = match policy {
        Policy::Weakest => {
            let best = *weakness.iter().max().unwrap();
            filter_by(&models, &weakness, best)
        }
        Policy::Strongest => {
            let best = *weakness.iter().min().unwrap();
            filter_by(&models, &weakness, best)
        }
        Policy::LexicographicFirst => vec![models[0]],
        Policy::Random { seed } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            vec![models[rng.gen_range(0..models.len())]]
        }
    };
    let chosen = selected[0];
    Ok(InductionResult {
        weakness_value: lang.weakness_fast(chosen),
        argmax_set: selected,
        chosen,
    })
}

fn filter_by(models: &[Statement], weakness: &[u128], target: u128) -> Vec<Statement> {
    models
        .iter()
        .zip(weakness)
        .filter(|(_, &w)| w == target)
        .map(|(&m, _)| m)
        .collect()
}

/// Raw counts behind a generalisation probability.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GeneralisationCount {
    pub generalised: u128,
    pub parents: u128,
}

impl GeneralisationCount {
    pub fn probability(&self) -> BigRational {
        BigRational::new(BigInt::from(self.generalised), BigInt::from(self.parents))
    }
}

/// For each hypothesis, the number of strict parents of α within `b` in
/// which it is still a model, with the parents enumerated once.
pub fn generalisation_counts(
    lang: &Language,
    alpha: &Task,
    hypotheses: &[Statement],
    b: TaskBounds,
) -> Result<Vec<GeneralisationCount>> {
    for &m in hypotheses {
        lang.require_valid(m)?;
        if !is_model_unchecked(lang, m, alpha) {
            return Err(Error::NotAModel);
        }
    }
    let mut hits = vec![0u128; hypotheses.len()];
    let mut parents = 0u128;
    for omega in enumerate_parents(lang, alpha, b)? {
        parents += 1;
        for (h, &m) in hits.iter_mut().zip(hypotheses) {
            if is_model_unchecked(lang, m, &omega) {
                *h += 1;
            }
        }
    }
    if parents == 0 {
        return Err(Error::NoParents);
    }
    Ok(hits
        .into_iter()
        .map(|generalised| GeneralisationCount {
            generalised,
            parents,
        })
        .collect())
}

/// |{ω ∈ Γ_b : α ⊏ ω, m ∈ M_ω}| / |{ω ∈ Γ_b : α ⊏ ω}|.
pub fn generalisation_probability(
    lang: &Language,
    alpha: &Task,
    m: Statement,
    b: TaskBounds,
) -> Result<BigRational> {
    Ok(generalisation_counts(lang, alpha, &[m], b)?[0].probability())
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PolicyRow {
    pub policy: Policy,
    pub chosen: Statement,
    pub weakness: u128,
    pub count: GeneralisationCount,
}

impl PolicyRow {
    pub fn probability(&self) -> BigRational {
        self.count.probability()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PolicyReport {
    pub rows: Vec<PolicyRow>,
    /// Probability of the weakest policy's choice, whether or not it was listed.
    pub weakest: GeneralisationCount,
    pub weakest_dominates: bool,
}

impl PolicyReport {
    pub const CSV_HEADER: [&'static str; 7] = [
        "policy",
        "chosen_mask",
        "weakness",
        "numerator",
        "denominator",
        "probability",
        "decimal",
    ];

    pub fn write_csv<W: std::io::Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(Self::CSV_HEADER)?;
        for r in &self.rows {
            let p = r.probability();
            w.write_record([
                r.policy.label(),
                r.chosen.mask().to_string(),
                r.weakness.to_string(),
                r.count.generalised.to_string(),
                r.count.parents.to_string(),
                format_rational(&p),
                format_decimal(&p),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

pub fn compare_policies(
    lang: &Language,
    alpha: &Task,
    policies: &[Policy],
    b: TaskBounds,
) -> Result<PolicyReport> {
    let weakest = induce(lang, alpha, Policy::Weakest)?;
    let mut chosen = vec![weakest.chosen];
    let mut results = Vec::with_capacity(policies.len());
    for &p in policies {
        let r = induce(lang, alpha, p)?;
        chosen.push(r.chosen);
        results.push((p, r));
    }
    let counts = generalisation_counts(lang, alpha, &chosen, b)?;
    let reference = counts[0];
    let rows: Vec<PolicyRow> = results
        .into_iter()
        .zip(&counts[1..])
        .map(|((policy, r), &count)| PolicyRow {
            policy,
            chosen: r.chosen,
            weakness: r.weakness_value,
            count,
        })
        .collect();
    // all counts share one denominator, so numerators compare directly
    let weakest_dominates = rows
        .iter()
        .all(|r| reference.generalised >= r.count.generalised);
    Ok(PolicyReport {
        rows,
        weakest: reference,
        weakest_dominates,
    })
}

/// `num/den` in lowest terms; integers print without a denominator.
pub fn format_rational(r: &BigRational) -> String {
    if r.denom() == &BigInt::from(1) {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Fixed six-decimal rendering, rounded half away from zero, computed exactly.
pub fn format_decimal(r: &BigRational) -> String {
    let scale = BigInt::from(1_000_000);
    let scaled = r * BigRational::from_integer(scale.clone());
    let rounded = scaled.round().to_integer();
    let negative = rounded < BigInt::zero();
    let abs = if negative { -rounded } else { rounded };
    let int = &abs / &scale;
    let frac = &abs % &scale;
    format!(
        "{}{}.{:0>6}",
        if negative { "-" } else { "" },
        int,
        frac.to_string()
    )
}

/// Parses `n`, `n/d` or a finite decimal such as `0.25` into an exact rational.
pub fn parse_rational(s: &str) -> Result<BigRational> {
    let t = s.trim();
    let bad = || Error::BadRational(s.to_string());
    if let Some((n, d)) = t.split_once('/') {
        let n: BigInt = n.trim().parse().map_err(|_| bad())?;
        let d: BigInt = d.trim().parse().map_err(|_| bad())?;
        if d.is_zero() {
            return Err(bad());
        }
        return Ok(BigRational::new(n, d));
    }
    if let Some((i, f)) = t.split_once('.') {
        if f.is_empty() || !f.chars().all(|c| c.is_ascii_digit()) {
            return Err(bad());
        }
        let digits: BigInt = format!("{i}{f}").parse().map_err(|_| bad())?;
        let den = num::pow(BigInt::from(10), f.len());
        return Ok(BigRational::new(digits, den));
    }
    Ok(BigRational::from_integer(t.parse().map_err(|_| bad())?))
}
