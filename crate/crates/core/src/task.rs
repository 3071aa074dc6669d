//! Tasks ⟨S, D, M⟩, their model sets, completion, the child/parent order,
//! bounded enumeration of the task space, and outlier forgetting.

use std::collections::BTreeSet;

use crate::error::{Error, Result};
use crate::lang::{masks_between, union_all, Language, LanguageId, Statement};

/// Ceiling on the number of tasks an exhaustive enumeration may visit.
pub const EXHAUSTIVE_CEILING: u128 = 10_000_000;

/// Situations and correct decisions; the model set M is derived on demand.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Task {
    lang: LanguageId,
    situations: BTreeSet<Statement>,
    decisions: BTreeSet<Statement>,
}

impl Task {
    pub fn new(
        lang: &Language,
        situations: impl IntoIterator<Item = Statement>,
        decisions: impl IntoIterator<Item = Statement>,
    ) -> Result<Task> {
        let situations: BTreeSet<Statement> = situations.into_iter().collect();
        let decisions: BTreeSet<Statement> = decisions.into_iter().collect();
        if situations.is_empty() {
            return Err(Error::EmptySituations);
        }
        if decisions.is_empty() {
            return Err(Error::EmptyDecisions);
        }
        for s in situations.iter().chain(&decisions) {
            lang.require_valid(*s)?;
        }
        for d in &decisions {
            if !situations.iter().any(|s| s.is_subset_of(*d)) {
                return Err(Error::DecisionOutsideSituations(lang.render(*d)));
            }
        }
        Ok(Task {
            lang: lang.id(),
            situations,
            decisions,
        })
    }

    /// Construction from parts already known to satisfy the invariants.
    pub(crate) fn from_parts(
        lang: LanguageId,
        situations: BTreeSet<Statement>,
        decisions: BTreeSet<Statement>,
    ) -> Task {
        Task {
            lang,
            situations,
            decisions,
        }
    }

    pub fn language(&self) -> LanguageId {
        self.lang
    }

    pub fn situations(&self) -> &BTreeSet<Statement> {
        &self.situations
    }

    pub fn decisions(&self) -> &BTreeSet<Statement> {
        &self.decisions
    }

    pub(crate) fn check_language(&self, lang: &Language) -> Result<()> {
        if self.lang == lang.id() {
            Ok(())
        } else {
            Err(Error::LanguageMismatch)
        }
    }

    pub fn render(&self, lang: &Language) -> String {
        format!(
            "S={} D={}",
            lang.render_set(&self.situations),
            lang.render_set(&self.decisions)
        )
    }
}

/// The outcome of answering one situation with a hypothesis.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Decision {
    pub value: Statement,
    pub correct: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TaskBounds {
    pub max_situations: usize,
    pub max_decisions: usize,
}

impl TaskBounds {
    pub fn new(max_situations: usize, max_decisions: usize) -> Result<TaskBounds> {
        if max_situations == 0 || max_decisions == 0 {
            return Err(Error::InvalidBounds);
        }
        Ok(TaskBounds {
            max_situations,
            max_decisions,
        })
    }
}

/// Z_S, the possible decisions in situations `situations`.
pub fn decision_space(lang: &Language, situations: &[Statement]) -> Result<Vec<Statement>> {
    if situations.is_empty() {
        return Err(Error::EmptySituations);
    }
    lang.extension_of_set(situations)
}

/// Model test without materialising M. `m` is a model when
///
/// 1. every decision contains `m` (D ⊆ Z_m),
/// 2. every projection above `m` lies inside ∪D, which is equivalent to every
///    z ∈ Z_m being a subset of ∪D,
/// 3. every valid z containing some `s ∪ m` is a decision (Z_S ∩ Z_m ⊆ D).
///    By (2) such z lie inside ∪D, so only that interval is searched.
pub fn is_model(lang: &Language, m: Statement, task: &Task) -> Result<bool> {
    task.check_language(lang)?;
    lang.require_valid(m)?;
    Ok(is_model_unchecked(lang, m, task))
}

pub(crate) fn is_model_unchecked(lang: &Language, m: Statement, task: &Task) -> bool {
    if !task.decisions.iter().all(|d| m.is_subset_of(*d)) {
        return false;
    }
    let reach = union_all(&task.decisions);
    if lang
        .maximal_projections()
        .iter()
        .any(|p| m.is_subset_of(*p) && !p.is_subset_of(reach))
    {
        return false;
    }
    task.situations.iter().all(|s| {
        let base = s.union(m);
        if !base.is_subset_of(reach) {
            // base is outside every projection above m, so nothing extends it
            return true;
        }
        masks_between(base.mask(), reach.mask())
            .map(Statement::from_mask)
            .filter(|z| lang.is_valid(*z))
            .all(|z| task.decisions.contains(&z))
    })
}

/// M, sorted by mask. Empty when the task is unlearnable in this vocabulary.
/// Candidates are restricted to subsets of ∩D, as every model is contained in
/// every decision.
pub fn valid_models(lang: &Language, task: &Task) -> Result<Vec<Statement>> {
    task.check_language(lang)?;
    let meet = task
        .decisions
        .iter()
        .fold(lang.vocabulary().full_mask(), |acc, d| acc & d.mask());
    let mut out: Vec<Statement> = masks_between(0, meet)
        .map(Statement::from_mask)
        .filter(|m| lang.is_valid(*m) && is_model_unchecked(lang, *m, task))
        .collect();
    out.sort();
    Ok(out)
}

/// Answers situation `s` with hypothesis `h`: the smallest-mask member of
/// Z_s ∩ Z_h. Because L is downward closed that member is `s ∪ h` whenever
/// it is valid, and the intersection is empty otherwise.
pub fn complete(lang: &Language, h: Statement, s: Statement, task: &Task) -> Result<Decision> {
    task.check_language(lang)?;
    lang.require_valid(h)?;
    if !task.situations.contains(&s) {
        return Err(Error::NotASituation(lang.render(s)));
    }
    let value = s.union(h);
    if !lang.is_valid(value) {
        return Err(Error::SilentHypothesis);
    }
    Ok(Decision {
        value,
        correct: task.decisions.contains(&value),
    })
}

/// α ⊏ ω: S_α ⊊ S_ω and D_α ⊆ D_ω.
pub fn is_child(alpha: &Task, omega: &Task) -> Result<bool> {
    if alpha.lang != omega.lang {
        return Err(Error::LanguageMismatch);
    }
    Ok(alpha.situations.len() < omega.situations.len()
        && alpha.situations.is_subset(&omega.situations)
        && alpha.decisions.is_subset(&omega.decisions))
}

/// Does model `m` generalise to ω, i.e. is it in M_ω?
pub fn generalises(lang: &Language, m: Statement, omega: &Task) -> Result<bool> {
    is_model(lang, m, omega)
}

pub(crate) fn binomial(n: u128, k: u128) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        match acc.checked_mul(n - i) {
            Some(v) => acc = v / (i + 1),
            None => return u128::MAX,
        }
    }
    acc
}

/// Σ_{j=lo..=hi} C(n, j), saturating.
pub(crate) fn binomial_sum(n: u128, lo: u128, hi: u128) -> u128 {
    (lo..=hi.min(n)).fold(0u128, |acc, j| acc.saturating_add(binomial(n, j)))
}

/// k-subsets of `0..n` in lexicographic order.
pub(crate) fn combinations(n: usize, k: usize) -> impl Iterator<Item = Vec<usize>> {
    let mut state: Option<Vec<usize>> = if k <= n { Some((0..k).collect()) } else { None };
    std::iter::from_fn(move || {
        let current = state.clone()?;
        // advance
        let mut next = current.clone();
        let mut i = k;
        let mut advanced = false;
        while i > 0 {
            i -= 1;
            if next[i] < n - k + i {
                next[i] += 1;
                for j in i + 1..k {
                    next[j] = next[j - 1] + 1;
                }
                advanced = true;
                break;
            }
        }
        state = if advanced { Some(next) } else { None };
        Some(current)
    })
}

/// Exact size of the bounded task space Γ_b.
pub fn count_tasks(lang: &Language, b: TaskBounds) -> Result<u128> {
    let all = lang.statements()?;
    let n = all.len() as u128;
    let s_combos = binomial_sum(n, 1, b.max_situations as u128);
    if s_combos > EXHAUSTIVE_CEILING {
        return Err(Error::BoundExplosion {
            count: s_combos,
            ceiling: EXHAUSTIVE_CEILING,
        });
    }
    let mut total: u128 = 0;
    for k in 1..=b.max_situations.min(all.len()) {
        for idx in combinations(all.len(), k) {
            let s: Vec<Statement> = idx.iter().map(|&i| all[i]).collect();
            let z = lang.extension_of_set(&s)?.len() as u128;
            total = total.saturating_add(binomial_sum(z, 1, b.max_decisions as u128));
        }
    }
    Ok(total)
}

/// Every task with 1 ≤ |S| ≤ max_situations, 1 ≤ |D| ≤ max_decisions and
/// D ⊆ Z_S, each exactly once. Order: by |S|, then S lexicographically over
/// L's mask order, then by |D|, then D lexicographically over Z_S. Under the
/// uniform distribution each has probability 1 / [`count_tasks`].
pub fn enumerate_tasks(lang: &Language, b: TaskBounds) -> Result<impl Iterator<Item = Task> + '_> {
    TaskBounds::new(b.max_situations, b.max_decisions)?;
    let count = count_tasks(lang, b)?;
    if count > EXHAUSTIVE_CEILING {
        return Err(Error::BoundExplosion {
            count,
            ceiling: EXHAUSTIVE_CEILING,
        });
    }
    let all = lang.statements()?;
    let id = lang.id();
    Ok((1..=b.max_situations.min(all.len()))
        .flat_map(move |k| combinations(all.len(), k))
        .flat_map(move |idx| {
            let s: Vec<Statement> = idx.iter().map(|&i| all[i]).collect();
            let z = lang.extension_of_set(&s).expect("situations drawn from L");
            let s: BTreeSet<Statement> = s.into_iter().collect();
            let mut out = Vec::new();
            for j in 1..=b.max_decisions.min(z.len()) {
                for didx in combinations(z.len(), j) {
                    let d: BTreeSet<Statement> = didx.iter().map(|&i| z[i]).collect();
                    out.push(Task::from_parts(id, s.clone(), d));
                }
            }
            out
        }))
}

/// Child-to-parent structure used by the generalisation harness: every
/// strict parent of `alpha` inside `b`, in deterministic order.
pub fn enumerate_parents<'a>(
    lang: &'a Language,
    alpha: &'a Task,
    b: TaskBounds,
) -> Result<impl Iterator<Item = Task> + 'a> {
    alpha.check_language(lang)?;
    let count = count_parents(lang, alpha, b)?;
    if count > EXHAUSTIVE_CEILING {
        return Err(Error::BoundExplosion {
            count,
            ceiling: EXHAUSTIVE_CEILING,
        });
    }
    let all = lang.statements()?;
    let extra: Vec<Statement> = all
        .iter()
        .copied()
        .filter(|s| !alpha.situations.contains(s))
        .collect();
    let max_extra_s = b.max_situations.saturating_sub(alpha.situations.len());
    let max_extra_d = b.max_decisions.saturating_sub(alpha.decisions.len());
    let id = lang.id();
    let n_extra = extra.len();
    // a child with more decisions than the bound allows has no parents
    let top = if b.max_decisions < alpha.decisions.len() {
        0
    } else {
        max_extra_s.min(n_extra)
    };
    Ok((1..=top)
        .flat_map(move |k| combinations(n_extra, k))
        .flat_map(move |idx| {
            let mut s = alpha.situations.clone();
            s.extend(idx.iter().map(|&i| extra[i]));
            let sv: Vec<Statement> = s.iter().copied().collect();
            let z: Vec<Statement> = lang
                .extension_of_set(&sv)
                .expect("situations drawn from L")
                .into_iter()
                .filter(|d| !alpha.decisions.contains(d))
                .collect();
            let mut out = Vec::new();
            for j in 0..=max_extra_d.min(z.len()) {
                for didx in combinations(z.len(), j) {
                    let mut d = alpha.decisions.clone();
                    d.extend(didx.iter().map(|&i| z[i]));
                    out.push(Task::from_parts(id, s.clone(), d));
                }
            }
            out
        }))
}

/// Number of strict parents of `alpha` within `b`, without enumerating
/// decision sets.
pub fn count_parents(lang: &Language, alpha: &Task, b: TaskBounds) -> Result<u128> {
    alpha.check_language(lang)?;
    let all = lang.statements()?;
    let extra: Vec<Statement> = all
        .iter()
        .copied()
        .filter(|s| !alpha.situations.contains(s))
        .collect();
    let max_extra_s = b.max_situations.saturating_sub(alpha.situations.len());
    let max_extra_d = b.max_decisions.saturating_sub(alpha.decisions.len());
    if b.max_decisions < alpha.decisions.len() {
        return Ok(0);
    }
    let s_combos = binomial_sum(extra.len() as u128, 1, max_extra_s as u128);
    if s_combos > EXHAUSTIVE_CEILING {
        return Err(Error::BoundExplosion {
            count: s_combos,
            ceiling: EXHAUSTIVE_CEILING,
        });
    }
    let mut total: u128 = 0;
    let alpha_s: Vec<Statement> = alpha.situations.iter().copied().collect();
    for k in 1..=max_extra_s.min(extra.len()) {
        for idx in combinations(extra.len(), k) {
            let mut s = alpha_s.clone();
            s.extend(idx.iter().map(|&i| extra[i]));
            let z = lang.extension_of_set(&s)?.len() - alpha.decisions.len();
            total = total.saturating_add(binomial_sum(z as u128, 0, max_extra_d as u128));
        }
    }
    Ok(total)
}

/// Weakness of the weakest model, or `None` when M is empty.
pub(crate) fn best_weakness(lang: &Language, task: &Task) -> Result<Option<u128>> {
    Ok(valid_models(lang, task)?
        .into_iter()
        .map(|m| lang.weakness_fast(m))
        .max())
}

/// Drops `k` decisions, one at a time, each time removing the decision whose
/// absence leaves the weakest best model (ties: the largest mask goes).
/// Situations left without any decision are dropped too.
pub fn forget_outliers(lang: &Language, task: &Task, k: usize) -> Result<Task> {
    task.check_language(lang)?;
    if k >= task.decisions.len() {
        return Err(Error::ForgetTooMany {
            k,
            available: task.decisions.len(),
        });
    }
    let mut current = task.clone();
    for _ in 0..k {
        let mut best: Option<(Option<u128>, Statement, Task)> = None;
        // descending mask order so the first maximum found is the largest mask
        for &d in current.decisions.iter().rev() {
            let candidate = without_decision(&current, d)?;
            let score = best_weakness(lang, &candidate)?;
            if best.as_ref().is_none_or(|(s, _, _)| score > *s) {
                best = Some((score, d, candidate));
            }
        }
        current = best.expect("at least two decisions remain").2;
    }
    Ok(current)
}

fn without_decision(task: &Task, d: Statement) -> Result<Task> {
    let mut decisions = task.decisions.clone();
    decisions.remove(&d);
    let situations: BTreeSet<Statement> = task
        .situations
        .iter()
        .copied()
        .filter(|s| decisions.iter().any(|d| s.is_subset_of(*d)))
        .collect();
    if situations.is_empty() {
        return Err(Error::EmptySituations);
    }
    Ok(Task::from_parts(task.lang, situations, decisions))
}
