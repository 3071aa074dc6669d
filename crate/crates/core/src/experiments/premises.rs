//! Does choosing the weakest model maximise the probability of
//! generalising to a uniformly drawn strict parent task?
//!
//! For every eligible child task α (at least one model, at least one strict
//! parent within the parent bounds), each policy picks a hypothesis and the
//! fraction of parents in which that hypothesis is still a model is
//! recorded. Exhaustive mode enumerates the parents and gives exact
//! rationals. Sampling mode draws parents uniformly by rejection and gives
//! estimates.

use num::{BigInt, BigRational, Zero};
use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::{canonical_worlds, world_label, Report};
use crate::error::{Error, Result};
use crate::induction::{format_decimal, format_rational, generalisation_counts, induce, Policy};
use crate::lang::{Language, Statement};
use crate::task::{
    binomial, binomial_sum, count_parents, enumerate_tasks, is_model_unchecked, valid_models, Task,
    TaskBounds, EXHAUSTIVE_CEILING,
};
use crate::world::World;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Exhaustive,
    Sampling {
        samples: u64,
    },
    /// Exhaustive where the parent count stays under the ceiling,
    /// sampling elsewhere.
    Auto {
        samples: u64,
    },
}

impl Mode {
    pub fn label(&self) -> String {
        match self {
            Mode::Exhaustive => "exhaustive".into(),
            Mode::Sampling { samples } => format!("sampling({samples})"),
            Mode::Auto { samples } => format!("auto({samples})"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PremiseRow {
    pub world: String,
    pub alpha: String,
    pub policy: Policy,
    pub chosen: String,
    pub weakness: u128,
    /// Parents (or sampled parents) in which the choice is still a model.
    pub generalised: u128,
    /// Parents enumerated, or samples drawn.
    pub parents: u128,
    pub exact: bool,
    /// Same count for the weakest policy's choice on this α.
    pub weakest_generalised: u128,
}

impl PremiseRow {
    pub fn probability(&self) -> BigRational {
        BigRational::new(BigInt::from(self.generalised), BigInt::from(self.parents))
    }

    pub fn weakest_probability(&self) -> BigRational {
        BigRational::new(
            BigInt::from(self.weakest_generalised),
            BigInt::from(self.parents),
        )
    }

    /// Weakest probability ≥ this row's. Both share one denominator.
    pub fn dominated(&self) -> bool {
        self.weakest_generalised >= self.generalised
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PremiseReport {
    pub child_bounds: TaskBounds,
    pub parent_bounds: TaskBounds,
    pub policies: Vec<Policy>,
    pub mode: Mode,
    pub seed: u64,
    pub rows: Vec<PremiseRow>,
    /// Number of eligible child tasks.
    pub alphas: usize,
    pub worlds: usize,
}

impl PremiseReport {
    /// Weakest probability ≥ every other policy's, on every row.
    pub fn dominance(&self) -> bool {
        self.rows.iter().all(PremiseRow::dominated)
    }

    pub fn violations(&self) -> Vec<&PremiseRow> {
        self.rows.iter().filter(|r| !r.dominated()).collect()
    }

    /// Mean probability over α, per policy, in the order given.
    pub fn means(&self) -> Vec<(Policy, BigRational)> {
        self.policies
            .iter()
            .map(|&p| {
                let probs: Vec<BigRational> = self
                    .rows
                    .iter()
                    .filter(|r| r.policy == p)
                    .map(PremiseRow::probability)
                    .collect();
                let mean = if probs.is_empty() {
                    BigRational::zero()
                } else {
                    let n = BigRational::from_integer(BigInt::from(probs.len()));
                    probs.into_iter().sum::<BigRational>() / n
                };
                (p, mean)
            })
            .collect()
    }

    pub const COLUMNS: [&'static str; 12] = [
        "world",
        "alpha",
        "policy",
        "chosen",
        "weakness",
        "generalised",
        "parents",
        "probability",
        "decimal",
        "weakest_probability",
        "exact",
        "dominated",
    ];

    pub fn to_report(&self) -> Report {
        let mut r = Report::new("premises", &Self::COLUMNS);
        r.header("seed", self.seed);
        r.header("mode", self.mode.label());
        r.header(
            "child_bounds",
            format!(
                "{},{}",
                self.child_bounds.max_situations, self.child_bounds.max_decisions
            ),
        );
        r.header(
            "parent_bounds",
            format!(
                "{},{}",
                self.parent_bounds.max_situations, self.parent_bounds.max_decisions
            ),
        );
        let names: Vec<String> = self.policies.iter().map(Policy::label).collect();
        r.header("policies", names.join(","));
        r.header("worlds", self.worlds);
        r.header("alphas", self.alphas);
        for (p, mean) in self.means() {
            r.header(
                &format!("mean[{p}]"),
                format!("{} ({})", format_rational(&mean), format_decimal(&mean)),
            );
        }
        let violations = self.violations().len();
        r.header("violations", violations);
        r.header("dominance", self.dominance());
        for row in &self.rows {
            let p = row.probability();
            r.row(vec![
                row.world.clone(),
                row.alpha.clone(),
                row.policy.label(),
                row.chosen.clone(),
                row.weakness.to_string(),
                row.generalised.to_string(),
                row.parents.to_string(),
                format_rational(&p),
                format_decimal(&p),
                format_rational(&row.weakest_probability()),
                row.exact.to_string(),
                row.dominated().to_string(),
            ]);
        }
        if violations > 0 {
            r.note(format!("{violations} rows where the weakest choice generalises less often than another policy's"));
        }
        r.passed = self.dominance();
        r
    }
}

/// Uniform sampler over the strict parents of α within a bound.
///
/// A parent is (S_α ∪ X, D_α ∪ Y) with X a non-empty set of new
/// situations and Y a set of new decisions from Z_{S_α ∪ X}. X is proposed
/// uniformly and accepted with probability W(X) / W_max, where W(X) counts
/// the admissible Y; Y is then drawn uniformly. Every parent is therefore
/// equally likely.
#[derive(Debug, Clone)]
pub struct ParentSampler<'a> {
    lang: &'a Language,
    alpha: &'a Task,
    extra: Vec<Statement>,
    /// C(n, k) for k = 1..=max_extra_s.
    size_weights: Vec<u128>,
    size_total: u128,
    max_extra_d: usize,
    w_max: u128,
}

const MAX_REJECTIONS: u64 = 1_000_000;

impl<'a> ParentSampler<'a> {
    pub fn new(lang: &'a Language, alpha: &'a Task, b: TaskBounds) -> Result<ParentSampler<'a>> {
        if !has_parents(lang, alpha, b)? {
            return Err(Error::NoParents);
        }
        let all = lang.statements()?;
        let extra: Vec<Statement> = all
            .iter()
            .copied()
            .filter(|s| !alpha.situations().contains(s))
            .collect();
        let max_extra_s = (b.max_situations - alpha.situations().len()).min(extra.len());
        let size_weights: Vec<u128> = (1..=max_extra_s)
            .map(|k| binomial(extra.len() as u128, k as u128))
            .collect();
        let size_total = size_weights.iter().fold(0u128, |a, &w| a.saturating_add(w));
        let max_extra_d = b.max_decisions - alpha.decisions().len();
        let w_max = binomial_sum(
            (all.len() - alpha.decisions().len()) as u128,
            0,
            max_extra_d as u128,
        );
        Ok(ParentSampler {
            lang,
            alpha,
            extra,
            size_weights,
            size_total,
            max_extra_d,
            w_max,
        })
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<Task> {
        for _ in 0..MAX_REJECTIONS {
            let mut pick = rng.gen_range(0..self.size_total);
            let mut k = 1;
            for &w in &self.size_weights {
                if pick < w {
                    break;
                }
                pick -= w;
                k += 1;
            }
            let mut situations: Vec<Statement> = self.alpha.situations().iter().copied().collect();
            situations.extend(
                index::sample(rng, self.extra.len(), k)
                    .into_iter()
                    .map(|i| self.extra[i]),
            );
            let fresh: Vec<Statement> = self
                .lang
                .extension_of_set(&situations)?
                .into_iter()
                .filter(|d| !self.alpha.decisions().contains(d))
                .collect();
            let weight = binomial_sum(fresh.len() as u128, 0, self.max_extra_d as u128);
            if rng.gen_range(0..self.w_max) >= weight {
                continue;
            }
            let mut r = rng.gen_range(0..weight);
            let mut j = 0;
            loop {
                let c = binomial(fresh.len() as u128, j as u128);
                if r < c {
                    break;
                }
                r -= c;
                j += 1;
            }
            let mut decisions: Vec<Statement> = self.alpha.decisions().iter().copied().collect();
            decisions.extend(
                index::sample(rng, fresh.len(), j)
                    .into_iter()
                    .map(|i| fresh[i]),
            );
            return Ok(Task::from_parts(
                self.lang.id(),
                situations.into_iter().collect(),
                decisions.into_iter().collect(),
            ));
        }
        Err(Error::SamplingExhausted {
            attempts: MAX_REJECTIONS,
        })
    }
}

/// A strict parent exists iff a new situation can be added and α's
/// decisions already fit the parent bound.
fn has_parents(lang: &Language, alpha: &Task, b: TaskBounds) -> Result<bool> {
    Ok(b.max_situations > alpha.situations().len()
        && b.max_decisions >= alpha.decisions().len()
        && (lang.statements()?.len() > alpha.situations().len()))
}

fn sampled_counts(
    lang: &Language,
    alpha: &Task,
    hypotheses: &[Statement],
    b: TaskBounds,
    samples: u64,
    rng: &mut ChaCha8Rng,
) -> Result<Vec<(u128, u128)>> {
    let sampler = ParentSampler::new(lang, alpha, b)?;
    let mut hits = vec![0u128; hypotheses.len()];
    for _ in 0..samples {
        let omega = sampler.sample(rng)?;
        for (h, &m) in hits.iter_mut().zip(hypotheses) {
            if is_model_unchecked(lang, m, &omega) {
                *h += 1;
            }
        }
    }
    Ok(hits.into_iter().map(|h| (h, samples as u128)).collect())
}

fn wants_sampling(lang: &Language, alpha: &Task, b: TaskBounds, mode: Mode) -> Result<Option<u64>> {
    match mode {
        Mode::Exhaustive => Ok(None),
        Mode::Sampling { samples } => Ok(Some(samples)),
        Mode::Auto { samples } => match count_parents(lang, alpha, b) {
            Ok(n) if n <= EXHAUSTIVE_CEILING => Ok(None),
            Ok(_) | Err(Error::BoundExplosion { .. }) => Ok(Some(samples)),
            Err(e) => Err(e),
        },
    }
}

fn alpha_rows(
    lang: &Language,
    world: &str,
    alpha: &Task,
    parent: TaskBounds,
    policies: &[Policy],
    mode: Mode,
    rng: &mut ChaCha8Rng,
) -> Result<Option<Vec<PremiseRow>>> {
    if valid_models(lang, alpha)?.is_empty() || !has_parents(lang, alpha, parent)? {
        return Ok(None);
    }
    let weakest = induce(lang, alpha, Policy::Weakest)?;
    let mut hypotheses = vec![weakest.chosen];
    let mut picks = Vec::with_capacity(policies.len());
    for &p in policies {
        let r = induce(lang, alpha, p)?;
        hypotheses.push(r.chosen);
        picks.push((p, r));
    }
    let (counts, exact): (Vec<(u128, u128)>, bool) =
        match wants_sampling(lang, alpha, parent, mode)? {
            None => (
                generalisation_counts(lang, alpha, &hypotheses, parent)?
                    .into_iter()
                    .map(|c| (c.generalised, c.parents))
                    .collect(),
                true,
            ),
            Some(samples) => (
                sampled_counts(lang, alpha, &hypotheses, parent, samples, rng)?,
                false,
            ),
        };
    let alpha_text = alpha.render(lang);
    Ok(Some(
        picks
            .into_iter()
            .zip(&counts[1..])
            .map(|((policy, r), &(generalised, parents))| PremiseRow {
                world: world.to_string(),
                alpha: alpha_text.clone(),
                policy,
                chosen: lang.render(r.chosen),
                weakness: r.weakness_value,
                generalised,
                parents,
                exact,
                weakest_generalised: counts[0].0,
            })
            .collect(),
    ))
}

fn collect_rows(
    lang: &Language,
    world: &str,
    child: TaskBounds,
    parent: TaskBounds,
    policies: &[Policy],
    mode: Mode,
    seed: u64,
) -> Result<(Vec<PremiseRow>, usize)> {
    TaskBounds::new(parent.max_situations, parent.max_decisions)?;
    let alphas: Vec<Task> = enumerate_tasks(lang, child)?.collect();
    let per_alpha: Vec<Result<Option<Vec<PremiseRow>>>> = alphas
        .par_iter()
        .enumerate()
        .map(|(i, alpha)| {
            // one independent stream per α keeps results thread-count free
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(i as u64);
            alpha_rows(lang, world, alpha, parent, policies, mode, &mut rng)
        })
        .collect();
    let mut rows = Vec::new();
    let mut eligible = 0;
    for r in per_alpha {
        if let Some(mut v) = r? {
            eligible += 1;
            rows.append(&mut v);
        }
    }
    Ok((rows, eligible))
}

/// Runs the harness on one language. Fails with
/// [`Error::NoEligibleChild`] when no child task has both a model and a
/// strict parent.
pub fn verify_premises(
    lang: &Language,
    world: &str,
    child: TaskBounds,
    parent: TaskBounds,
    policies: &[Policy],
    mode: Mode,
    seed: u64,
) -> Result<PremiseReport> {
    let (rows, alphas) = collect_rows(lang, world, child, parent, policies, mode, seed)?;
    if alphas == 0 {
        return Err(Error::NoEligibleChild);
    }
    Ok(PremiseReport {
        child_bounds: child,
        parent_bounds: parent,
        policies: policies.to_vec(),
        mode,
        seed,
        rows,
        alphas,
        worlds: 1,
    })
}

/// Runs the harness on every world of [`canonical_worlds`], each with its
/// full vocabulary, and merges the rows. Worlds without eligible children
/// are skipped.
pub fn verify_all_worlds(
    max_states: usize,
    max_programs: usize,
    child: TaskBounds,
    parent: TaskBounds,
    policies: &[Policy],
    mode: Mode,
    seed: u64,
) -> Result<PremiseReport> {
    let mut rows = Vec::new();
    let mut alphas = 0;
    let mut worlds = 0;
    for (n, masks) in canonical_worlds(max_states, max_programs) {
        let world = World::from_truth_masks(n, &masks);
        let lang = Language::new(&world, &world.full_vocabulary()?)?;
        let (mut r, a) = collect_rows(
            &lang,
            &world_label(&world),
            child,
            parent,
            policies,
            mode,
            seed,
        )?;
        if a > 0 {
            worlds += 1;
            alphas += a;
            rows.append(&mut r);
        }
    }
    if alphas == 0 {
        return Err(Error::NoEligibleChild);
    }
    Ok(PremiseReport {
        child_bounds: child,
        parent_bounds: parent,
        policies: policies.to_vec(),
        mode,
        seed,
        rows,
        alphas,
        worlds,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lang::tests::w1;
    use crate::task::{enumerate_parents, is_child, is_model};
    use std::collections::BTreeMap;

    fn b(s: usize, d: usize) -> TaskBounds {
        TaskBounds::new(s, d).unwrap()
    }

    const POLICIES: [Policy; 4] = [
        Policy::Weakest,
        Policy::Strongest,
        Policy::Random { seed: 7 },
        Policy::LexicographicFirst,
    ];

    /// Three states; p1 holds in φ1, p2 in φ1 and φ2, p3 in φ1 and φ3.
    /// Every subset of {p1,p2,p3} is a statement.
    fn full_cube() -> Language {
        let w = World::from_truth_masks(3, &[0b001, 0b011, 0b101]);
        Language::new(&w, &w.full_vocabulary().unwrap()).unwrap()
    }

    /// Generalisation probability straight from the definition: scan the
    /// whole bounded task space for parents of α.
    fn oracle(lang: &Language, alpha: &Task, m: Statement, parent: TaskBounds) -> (u128, u128) {
        let mut hit = 0;
        let mut total = 0;
        for omega in enumerate_tasks(lang, parent).unwrap() {
            if is_child(alpha, &omega).unwrap() {
                total += 1;
                if is_model(lang, m, &omega).unwrap() {
                    hit += 1;
                }
            }
        }
        (hit, total)
    }

    #[test]
    fn worked_world_rows_match_the_oracle() {
        let (_, l) = w1();
        let report =
            verify_premises(&l, "w1", b(1, 1), b(2, 2), &POLICIES, Mode::Exhaustive, 0).unwrap();
        assert_eq!(report.alphas, 4);
        // The only violation: for S = D = {{p1,p2}} the weakest model {}
        // fits 2 of 8 parents while {p1,p2} fits 3.
        assert!(!report.dominance());
        for v in report.violations() {
            assert_eq!(v.alpha, "S={{p1,p2}} D={{p1,p2}}");
            assert_eq!((v.weakest_generalised, v.generalised, v.parents), (2, 3, 8));
        }
        let alphas: Vec<Task> = enumerate_tasks(&l, b(1, 1)).unwrap().collect();
        for row in &report.rows {
            let alpha = alphas.iter().find(|a| a.render(&l) == row.alpha).unwrap();
            let chosen = induce(&l, alpha, row.policy).unwrap().chosen;
            assert_eq!(row.chosen, l.render(chosen));
            assert_eq!(
                (row.generalised, row.parents),
                oracle(&l, alpha, chosen, b(2, 2))
            );
        }
    }

    #[test]
    fn no_eligible_children_without_room_for_parents() {
        let (_, l) = w1();
        assert_eq!(
            verify_premises(&l, "w1", b(1, 1), b(1, 1), &POLICIES, Mode::Exhaustive, 0)
                .unwrap_err(),
            Error::NoEligibleChild
        );
    }

    /// With at most two parent decisions the weakest model of (S={V},
    /// D={V}) generalises to 3 of 26 parents, the strongest to 7.
    #[test]
    fn capped_decisions_favour_the_strongest_model() {
        let l = full_cube();
        let v = Statement::from_mask(0b111);
        let alpha = Task::new(&l, [v], [v]).unwrap();
        assert_eq!(valid_models(&l, &alpha).unwrap().len(), 8);
        let weakest = induce(&l, &alpha, Policy::Weakest).unwrap().chosen;
        let strongest = induce(&l, &alpha, Policy::Strongest).unwrap().chosen;
        assert_eq!((weakest, strongest), (Statement::EMPTY, v));
        assert_eq!(oracle(&l, &alpha, weakest, b(2, 2)), (3, 26));
        assert_eq!(oracle(&l, &alpha, strongest, b(2, 2)), (7, 26));
        let report =
            verify_premises(&l, "cube", b(1, 1), b(2, 2), &POLICIES, Mode::Exhaustive, 0).unwrap();
        assert!(!report.dominance());
        let alpha_text = alpha.render(&l);
        assert!(report
            .violations()
            .iter()
            .any(|r| r.alpha == alpha_text && r.policy == Policy::Strongest));
    }

    /// Without a cap on parent decisions every model of α fits the same
    /// number of parents: exactly one decision set per situation set.
    #[test]
    fn uncapped_decisions_make_every_model_equal() {
        let l = full_cube();
        let v = Statement::from_mask(0b111);
        let alpha = Task::new(&l, [v], [v]).unwrap();
        let models = valid_models(&l, &alpha).unwrap();
        let counts = generalisation_counts(&l, &alpha, &models, b(2, 8)).unwrap();
        assert!(counts.iter().all(|c| c.generalised == 7));
        let report =
            verify_premises(&l, "cube", b(1, 1), b(2, 8), &POLICIES, Mode::Exhaustive, 0).unwrap();
        assert!(report.dominance());
        assert!(report
            .rows
            .iter()
            .all(|r| r.generalised == r.weakest_generalised));
    }

    #[test]
    fn sampler_is_uniform_over_parents() {
        let (_, l) = w1();
        let alpha = Task::new(
            &l,
            [Statement::from_mask(0b01)],
            [Statement::from_mask(0b11)],
        )
        .unwrap();
        let bounds = b(3, 3);
        let parents: Vec<Task> = enumerate_parents(&l, &alpha, bounds).unwrap().collect();
        let sampler = ParentSampler::new(&l, &alpha, bounds).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let n = 40_000u64;
        let mut freq: BTreeMap<String, u64> = BTreeMap::new();
        for _ in 0..n {
            *freq
                .entry(sampler.sample(&mut rng).unwrap().render(&l))
                .or_default() += 1;
        }
        assert_eq!(freq.len(), parents.len());
        let p = 1.0 / parents.len() as f64;
        let sigma = (n as f64 * p * (1.0 - p)).sqrt();
        for t in &parents {
            let got = *freq.get(&t.render(&l)).unwrap() as f64;
            assert!(
                (got - n as f64 * p).abs() <= 5.0 * sigma,
                "{} drawn {got} times",
                t.render(&l)
            );
        }
    }

    #[test]
    fn sampling_agrees_with_enumeration_within_three_sigma() {
        for l in [w1().1, full_cube()] {
            let exact =
                verify_premises(&l, "w", b(1, 1), b(2, 2), &POLICIES, Mode::Exhaustive, 3).unwrap();
            let est = verify_premises(
                &l,
                "w",
                b(1, 1),
                b(2, 2),
                &POLICIES,
                Mode::Sampling { samples: 4000 },
                3,
            )
            .unwrap();
            assert_eq!(exact.rows.len(), est.rows.len());
            for (x, e) in exact.rows.iter().zip(&est.rows) {
                assert_eq!(
                    (&x.alpha, x.policy, &x.chosen),
                    (&e.alpha, e.policy, &e.chosen)
                );
                let p = x.generalised as f64 / x.parents as f64;
                let phat = e.generalised as f64 / e.parents as f64;
                let sigma = (p * (1.0 - p) / e.parents as f64).sqrt();
                assert!(
                    (p - phat).abs() <= 3.0 * sigma + 1e-12,
                    "{} {}: {p} vs {phat}",
                    x.alpha,
                    x.policy
                );
            }
        }
    }

    #[test]
    fn auto_mode_is_exhaustive_below_the_ceiling() {
        let (_, l) = w1();
        let exact =
            verify_premises(&l, "w1", b(1, 1), b(2, 2), &POLICIES, Mode::Exhaustive, 0).unwrap();
        let auto = verify_premises(
            &l,
            "w1",
            b(1, 1),
            b(2, 2),
            &POLICIES,
            Mode::Auto { samples: 10 },
            0,
        )
        .unwrap();
        assert_eq!(exact.rows, auto.rows);
    }

    #[test]
    fn results_do_not_depend_on_thread_count() {
        let l = full_cube();
        let run = |threads| {
            rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap()
                .install(|| {
                    verify_premises(
                        &l,
                        "cube",
                        b(1, 1),
                        b(2, 2),
                        &POLICIES,
                        Mode::Sampling { samples: 50 },
                        9,
                    )
                    .unwrap()
                    .to_report()
                })
        };
        assert_eq!(run(1), run(4));
    }

    #[test]
    fn sweep_over_small_worlds() {
        let report =
            verify_all_worlds(2, 2, b(1, 1), b(2, 2), &POLICIES, Mode::Exhaustive, 0).unwrap();
        assert!(report.worlds > 0);
        let r = report.to_report();
        assert_eq!(r.rows.len(), report.rows.len());
        assert_eq!(r.passed, report.dominance());
        let means = report.means();
        assert_eq!(means.len(), POLICIES.len());
        assert!(means.iter().all(|(_, m)| *m >= BigRational::zero()));
    }
}
