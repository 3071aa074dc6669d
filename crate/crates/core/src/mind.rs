//! Intent inference and mirror rationales.
//!
//! Observed (situation, decision) pairs form a task; the weakest models of
//! that task are the intent those decisions served. A rationale refines a
//! goal model `m_Ω` to a strictly lower-level `m_ω` that still accounts for
//! one observed decision.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::error::{Error, Result};
use crate::induction::{induce, InductionResult, Policy};
use crate::lang::{masks_between, Language, Statement};
use crate::task::{complete, Task};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Observation {
    situation: Statement,
    decision: Statement,
}

impl Observation {
    pub fn new(lang: &Language, situation: Statement, decision: Statement) -> Result<Observation> {
        lang.require_valid(situation)?;
        lang.require_valid(decision)?;
        if !situation.is_subset_of(decision) {
            return Err(Error::MalformedObservation);
        }
        Ok(Observation {
            situation,
            decision,
        })
    }

    pub fn situation(&self) -> Statement {
        self.situation
    }

    pub fn decision(&self) -> Statement {
        self.decision
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Rationale {
    pub model: Statement,
    pub anchor: Statement,
}

/// The task (S = {s_i}, D = {d_i}) induced by a set of observations.
pub fn observed_task(lang: &Language, obs: &[Observation]) -> Result<Task> {
    if obs.is_empty() {
        return Err(Error::NoObservations);
    }
    Task::new(
        lang,
        obs.iter().map(|o| o.situation),
        obs.iter().map(|o| o.decision),
    )
}

/// Weakest models of the observed task. The whole argmax set is the
/// inferred intent; `chosen` is only a representative.
pub fn infer_intent(lang: &Language, obs: &[Observation]) -> Result<InductionResult> {
    let task = observed_task(lang, obs)?;
    match induce(lang, &task, Policy::Weakest) {
        Err(Error::NoModel) => Err(Error::NoRationale),
        other => other,
    }
}

/// Does `r` satisfy both defining constraints for observation `o`:
/// Z_model ⊊ Z_anchor, and d ∈ Z_s ∩ Z_model?
pub fn is_rationale_for(lang: &Language, r: &Rationale, o: &Observation) -> bool {
    lang.is_valid(r.model)
        && r.anchor.is_strict_subset_of(r.model)
        && o.situation.is_subset_of(o.decision)
        && r.model.is_subset_of(o.decision)
}

/// The weakest `m` with Z_m ⊊ Z_{m_Ω} whose extension still contains the
/// observed decision. Ties go to the smallest mask.
///
/// Fails with [`Error::BehaviourOutsideGoal`] exactly when d ∉ Z_{m_Ω}. When
/// d = m_Ω every refinement excludes d and [`Error::NoStrictRefinement`] is
/// returned instead.
pub fn mirror_rationale(lang: &Language, goal: Statement, o: &Observation) -> Result<Rationale> {
    lang.require_valid(goal)?;
    lang.require_valid(o.decision)?;
    refine_towards(lang, goal, o.decision).inspect(|r| debug_assert!(is_rationale_for(lang, r, o)))
}

/// Weakest `m` with `anchor ⊊ m ⊆ target`. Every such `m` is valid because
/// `target` is.
fn refine_towards(lang: &Language, anchor: Statement, target: Statement) -> Result<Rationale> {
    if !anchor.is_subset_of(target) {
        return Err(Error::BehaviourOutsideGoal);
    }
    let mut best: Option<(u128, Statement)> = None;
    for mask in masks_between(anchor.mask(), target.mask()) {
        let m = Statement::from_mask(mask);
        if m == anchor {
            continue;
        }
        let w = lang.weakness(m)?;
        let better = match best {
            None => true,
            Some((bw, bm)) => w > bw || (w == bw && m < bm),
        };
        if better {
            best = Some((w, m));
        }
    }
    let (_, model) = best.ok_or(Error::NoStrictRefinement)?;
    Ok(Rationale { model, anchor })
}

/// Depth-two modelling: infer the other party's intent from their
/// observations, then refine `my_anchor` towards it. The result is the
/// weakest `m` strictly below the anchor whose extension contains the
/// inferred intent's extension.
pub fn nested_intent(
    lang: &Language,
    obs_of_other: &[Observation],
    my_anchor: Statement,
) -> Result<Rationale> {
    lang.require_valid(my_anchor)?;
    let intent = infer_intent(lang, obs_of_other)?;
    refine_towards(lang, my_anchor, intent.chosen)
}

/// Observations generated from a planted model `m*`: for each of up to
/// `n_situations` random situations compatible with `m*`, every valid
/// statement containing both is recorded as a decision. The maximal
/// projections above `m*` are added as situations of their own, so `m*`
/// is a model of the resulting task. Needs an exhaustive language.
pub fn planted_observations<R: Rng + ?Sized>(
    lang: &Language,
    m_star: Statement,
    n_situations: usize,
    rng: &mut R,
) -> Result<Vec<Observation>> {
    lang.require_valid(m_star)?;
    let compatible: Vec<Statement> = lang
        .statements()?
        .iter()
        .copied()
        .filter(|s| lang.is_valid(s.union(m_star)))
        .collect();
    let mut situations: Vec<Statement> = compatible
        .choose_multiple(rng, n_situations.min(compatible.len()))
        .copied()
        .collect();
    situations.extend(
        lang.maximal_projections()
            .iter()
            .copied()
            .filter(|p| m_star.is_subset_of(*p)),
    );
    situations.sort();
    situations.dedup();
    let mut out = Vec::new();
    for s in situations {
        for z in lang.extension(s.union(m_star))? {
            out.push(Observation {
                situation: s,
                decision: z,
            });
        }
    }
    Ok(out)
}

/// For each observation, `complete(intent, s)` lands in D.
pub fn reproduces_observations(
    lang: &Language,
    intent: Statement,
    obs: &[Observation],
) -> Result<bool> {
    let task = observed_task(lang, obs)?;
    for o in obs {
        if !complete(lang, intent, o.situation, &task)?.correct {
            return Ok(false);
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lang::tests::w1;
    use crate::task::valid_models;
    use crate::world::World;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    const E: Statement = Statement::from_mask(0b00);
    const P1: Statement = Statement::from_mask(0b01);
    const P2: Statement = Statement::from_mask(0b10);
    const P12: Statement = Statement::from_mask(0b11);

    fn obs(lang: &Language, pairs: &[(Statement, Statement)]) -> Vec<Observation> {
        pairs
            .iter()
            .map(|&(s, d)| Observation::new(lang, s, d).unwrap())
            .collect()
    }

    /// Intent from the definition: all 2^|V| masks, filtered by the model
    /// conditions written out over explicit extension sets.
    fn brute_intent(lang: &Language, o: &[Observation]) -> Vec<Statement> {
        let valid: Vec<Statement> = (0..1u64 << lang.width())
            .map(Statement::from_mask)
            .filter(|b| lang.projections().iter().any(|p| b.is_subset_of(*p)))
            .collect();
        let ext = |a: Statement| valid.iter().copied().filter(move |b| a.is_subset_of(*b));
        let d: Vec<Statement> = o.iter().map(|x| x.decision).collect();
        let reach = d.iter().fold(E, |acc, x| acc.union(*x));
        let models: Vec<Statement> = valid
            .iter()
            .copied()
            .filter(|&m| {
                d.iter().all(|x| m.is_subset_of(*x))
                    && ext(m).all(|z| z.is_subset_of(reach))
                    && o.iter().all(|x| {
                        ext(x.situation)
                            .filter(|z| m.is_subset_of(*z))
                            .all(|z| d.contains(&z))
                    })
            })
            .collect();
        let best = models.iter().map(|&m| ext(m).count()).max();
        models
            .into_iter()
            .filter(|&m| Some(ext(m).count()) == best)
            .collect()
    }

    #[test]
    fn observations_must_extend_their_situation() {
        let (_, l) = w1();
        assert_eq!(
            Observation::new(&l, P1, P2).unwrap_err(),
            Error::MalformedObservation
        );
        assert!(Observation::new(&l, P1, P12).is_ok());
    }

    #[test]
    fn intent_of_the_worked_task() {
        let (_, l) = w1();
        let o = obs(&l, &[(P1, P12)]);
        let r = infer_intent(&l, &o).unwrap();
        assert_eq!(r.argmax_set, vec![P2]);
        assert_eq!(r.argmax_set, brute_intent(&l, &o));
        assert!(reproduces_observations(&l, r.chosen, &o).unwrap());
    }

    #[test]
    fn anything_goes_intent() {
        let (_, l) = w1();
        let all: Vec<(Statement, Statement)> =
            l.statements().unwrap().iter().map(|&z| (E, z)).collect();
        let r = infer_intent(&l, &obs(&l, &all)).unwrap();
        assert_eq!(r.argmax_set, vec![E]);
    }

    #[test]
    fn decisions_equal_to_the_situation_extension() {
        let (_, l) = w1();
        let o = obs(&l, &[(P1, P1), (P1, P12)]);
        assert_eq!(
            valid_models(&l, &observed_task(&l, &o).unwrap()).unwrap(),
            vec![E, P1]
        );
        let r = infer_intent(&l, &o).unwrap();
        assert_eq!(r.argmax_set, brute_intent(&l, &o));
        assert_eq!(r.argmax_set, vec![E]);
    }

    #[test]
    fn no_rationale_when_the_task_is_unlearnable() {
        let (_, l) = w1();
        let o = obs(&l, &[(P1, P1)]);
        assert!(brute_intent(&l, &o).is_empty());
        assert_eq!(infer_intent(&l, &o).unwrap_err(), Error::NoRationale);
        assert_eq!(infer_intent(&l, &[]).unwrap_err(), Error::NoObservations);
    }

    /// Adding an observation inside the same Z_S can make the inferred
    /// intent weaker, so weakness is not monotone in D.
    #[test]
    fn more_observations_can_weaken_the_intent() {
        let (_, l) = w1();
        let before = infer_intent(&l, &obs(&l, &[(P1, P12)])).unwrap();
        let after = infer_intent(&l, &obs(&l, &[(P1, P12), (P1, P1)])).unwrap();
        assert_eq!(before.weakness_value, 2);
        assert_eq!(after.weakness_value, 4);
        assert!(after.weakness_value > before.weakness_value);
    }

    #[test]
    fn mirror_rationale_examples() {
        let (_, l) = w1();
        let o = Observation::new(&l, P1, P12).unwrap();
        let r = mirror_rationale(&l, E, &o).unwrap();
        assert_eq!(
            r,
            Rationale {
                model: P1,
                anchor: E
            }
        );
        assert!(is_rationale_for(&l, &r, &o));

        let o = Observation::new(&l, P1, P1).unwrap();
        assert_eq!(
            mirror_rationale(&l, P2, &o).unwrap_err(),
            Error::BehaviourOutsideGoal
        );

        // d is the only maximal statement above the goal
        let o = Observation::new(&l, P1, P12).unwrap();
        assert_eq!(mirror_rationale(&l, P1, &o).unwrap().model, P12);

        let o = Observation::new(&l, P12, P12).unwrap();
        assert_eq!(
            mirror_rationale(&l, P12, &o).unwrap_err(),
            Error::NoStrictRefinement
        );
    }

    #[test]
    fn nested_intent_examples() {
        let (_, l) = w1();
        let o = obs(&l, &[(P1, P12)]);
        assert_eq!(
            nested_intent(&l, &o, E).unwrap(),
            Rationale {
                model: P2,
                anchor: E
            }
        );
        assert_eq!(
            nested_intent(&l, &[], E).unwrap_err(),
            Error::NoObservations
        );
        assert_eq!(
            nested_intent(&l, &o, P12).unwrap_err(),
            Error::BehaviourOutsideGoal
        );
        assert_eq!(
            nested_intent(&l, &o, P1).unwrap_err(),
            Error::BehaviourOutsideGoal
        );
        assert_eq!(
            nested_intent(&l, &o, P2).unwrap_err(),
            Error::NoStrictRefinement
        );
    }

    fn random_language(rng: &mut ChaCha8Rng) -> Language {
        let n_states = rng.gen_range(1..=5usize);
        let n_programs = rng.gen_range(1..=5usize.min((1 << n_states) - 1));
        let w = World::random(n_states, n_programs, rng).unwrap();
        Language::new(&w, &w.full_vocabulary().unwrap()).unwrap()
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(96))]

        #[test]
        fn planted_models_are_recovered(seed in any::<u64>()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let l = random_language(&mut rng);
            let all = l.statements().unwrap().to_vec();
            let m_star = *all.choose(&mut rng).unwrap();
            let o = planted_observations(&l, m_star, rng.gen_range(1..=3), &mut rng).unwrap();
            let task = observed_task(&l, &o).unwrap();
            prop_assert!(valid_models(&l, &task).unwrap().contains(&m_star));
            for x in &o {
                prop_assert!(complete(&l, m_star, x.situation, &task).unwrap().correct);
            }
            let r = infer_intent(&l, &o).unwrap();
            prop_assert_eq!(&r.argmax_set, &brute_intent(&l, &o));
            prop_assert!(r.weakness_value >= l.weakness(m_star).unwrap());
            for &m in &r.argmax_set {
                prop_assert!(reproduces_observations(&l, m, &o).unwrap());
            }
        }

        #[test]
        fn rationales_satisfy_their_constraints(seed in any::<u64>()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let l = random_language(&mut rng);
            let all = l.statements().unwrap().to_vec();
            let goal = *all.choose(&mut rng).unwrap();
            let d = *all.choose(&mut rng).unwrap();
            let s = Statement::from_mask(d.mask() & rng.gen::<u64>());
            let o = Observation::new(&l, s, d).unwrap();
            match mirror_rationale(&l, goal, &o) {
                Ok(r) => {
                    prop_assert!(is_rationale_for(&l, &r, &o));
                    prop_assert!(l.weakness(r.model).unwrap() < l.weakness(goal).unwrap());
                    // nothing weaker qualifies
                    for &m in &all {
                        if goal.is_strict_subset_of(m) && m.is_subset_of(d) {
                            prop_assert!(l.weakness(m).unwrap() <= l.weakness(r.model).unwrap());
                        }
                    }
                }
                Err(Error::BehaviourOutsideGoal) => prop_assert!(!goal.is_subset_of(d)),
                Err(Error::NoStrictRefinement) => prop_assert_eq!(goal, d),
                Err(e) => prop_assert!(false, "unexpected error {e}"),
            }
        }
    }
}
