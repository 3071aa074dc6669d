//! Finite worlds: states, declarative programs stored extensionally as truth
//! vectors, objective totalities, and vocabularies.

use std::collections::hash_map::DefaultHasher;
use std::collections::{HashMap, HashSet};
use std::hash::{Hash, Hasher};

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lang::Statement;

/// Hard ceiling on states; truth vectors are packed into `u64` for projection.
pub const MAX_STATES: usize = 64;
/// Default vocabulary bound for exhaustive work (2^16 statements fit in memory).
pub const DEFAULT_VOCAB_BOUND: usize = 16;
/// Hard ceiling on vocabulary width; statement masks are `u64`.
pub const MAX_VOCAB: usize = 64;

/// Serializable description of a world, as found in scenario files.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WorldSpec {
    pub states: Vec<String>,
    pub programs: Vec<ProgramSpec>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProgramSpec {
    pub name: String,
    /// States in which the program evaluates to true.
    #[serde(default)]
    pub true_in: Vec<String>,
}

/// Fingerprint used to detect vocabularies and totalities from other worlds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct WorldId(u64);

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Program {
    name: String,
    truth: Vec<bool>,
}

impl Program {
    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn truth(&self) -> &[bool] {
        &self.truth
    }

    pub fn holds_in(&self, state: usize) -> bool {
        self.truth[state]
    }

    fn state_mask(&self) -> u64 {
        self.truth
            .iter()
            .enumerate()
            .filter(|(_, &t)| t)
            .fold(0, |acc, (i, _)| acc | (1 << i))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct World {
    id: WorldId,
    states: Vec<String>,
    programs: Vec<Program>,
    /// Every declared name, including names collapsed onto an earlier
    /// program with the same truth vector.
    names: HashMap<String, usize>,
}

impl World {
    /// Builds a world from its description. Programs with identical truth
    /// vectors are the same function; later declarations collapse onto the
    /// first and their names become aliases.
    pub fn build(spec: &WorldSpec) -> Result<World> {
        if spec.states.is_empty() {
            return Err(Error::NoStates);
        }
        if spec.states.len() > MAX_STATES {
            return Err(Error::TooManyStates {
                got: spec.states.len(),
                max: MAX_STATES,
            });
        }
        let mut state_index = HashMap::new();
        for (i, s) in spec.states.iter().enumerate() {
            if state_index.insert(s.as_str(), i).is_some() {
                return Err(Error::DuplicateState(s.clone()));
            }
        }

        let mut programs: Vec<Program> = Vec::new();
        let mut names = HashMap::new();
        let mut by_truth: HashMap<Vec<bool>, usize> = HashMap::new();
        for p in &spec.programs {
            if names.contains_key(&p.name) {
                return Err(Error::DuplicateProgram(p.name.clone()));
            }
            let mut truth = vec![false; spec.states.len()];
            for s in &p.true_in {
                let i = *state_index
                    .get(s.as_str())
                    .ok_or_else(|| Error::UnknownState(s.clone()))?;
                truth[i] = true;
            }
            let idx = *by_truth.entry(truth.clone()).or_insert_with(|| {
                programs.push(Program {
                    name: p.name.clone(),
                    truth,
                });
                programs.len() - 1
            });
            names.insert(p.name.clone(), idx);
        }

        let mut h = DefaultHasher::new();
        spec.states.hash(&mut h);
        for p in &programs {
            p.name.hash(&mut h);
            p.truth.hash(&mut h);
        }
        Ok(World {
            id: WorldId(h.finish()),
            states: spec.states.clone(),
            programs,
            names,
        })
    }

    /// A random world with `n_states` states and `n_programs` programs with
    /// distinct truth vectors, each true somewhere. Programs are `p1..pK`,
    /// states `s1..sN`.
    pub fn random<R: Rng + ?Sized>(
        n_states: usize,
        n_programs: usize,
        rng: &mut R,
    ) -> Result<World> {
        if n_states == 0 {
            return Err(Error::NoStates);
        }
        if n_states > 20 {
            return Err(Error::TooManyStates {
                got: n_states,
                max: 20,
            });
        }
        let available = (1u64 << n_states) - 1;
        if n_programs as u64 > available {
            return Err(Error::VocabularyTooLarge {
                got: n_programs,
                max: available as usize,
            });
        }
        let mut seen = HashSet::new();
        let mut vectors = Vec::with_capacity(n_programs);
        while vectors.len() < n_programs {
            let v = rng.gen_range(1..=available);
            if seen.insert(v) {
                vectors.push(v);
            }
        }
        Ok(World::from_truth_masks(n_states, &vectors))
    }

    /// World over states `s1..sN` with one program `p{i+1}` per state mask
    /// (bit j set means true in state j). Masks are assumed distinct.
    pub fn from_truth_masks(n_states: usize, masks: &[u64]) -> World {
        let spec = WorldSpec {
            states: (1..=n_states).map(|i| format!("s{i}")).collect(),
            programs: masks
                .iter()
                .enumerate()
                .map(|(i, &m)| ProgramSpec {
                    name: format!("p{}", i + 1),
                    true_in: (0..n_states)
                        .filter(|j| m >> j & 1 == 1)
                        .map(|j| format!("s{}", j + 1))
                        .collect(),
                })
                .collect(),
        };
        World::build(&spec).expect("generated world spec is well formed")
    }

    pub fn id(&self) -> WorldId {
        self.id
    }

    pub fn states(&self) -> &[String] {
        &self.states
    }

    pub fn programs(&self) -> &[Program] {
        &self.programs
    }

    pub fn state_index(&self, state: &str) -> Result<usize> {
        self.states
            .iter()
            .position(|s| s == state)
            .ok_or_else(|| Error::UnknownState(state.to_string()))
    }

    pub fn program_index(&self, name: &str) -> Result<usize> {
        self.names
            .get(name)
            .copied()
            .ok_or_else(|| Error::UnknownProgram(name.to_string()))
    }

    /// The objective totality h_φ: every program true at `state`.
    pub fn totality(&self, state: &str) -> Result<Totality> {
        let state = self.state_index(state)?;
        Ok(self.totality_at(state))
    }

    pub fn totality_at(&self, state: usize) -> Totality {
        Totality {
            world: self.id,
            state,
            members: (0..self.programs.len())
                .filter(|&p| self.programs[p].holds_in(state))
                .collect(),
        }
    }

    /// H, one totality per state (not deduplicated).
    pub fn totalities(&self) -> Vec<Totality> {
        (0..self.states.len())
            .map(|s| self.totality_at(s))
            .collect()
    }

    pub fn make_vocabulary<S: AsRef<str>>(&self, names: &[S]) -> Result<Vocabulary> {
        self.make_vocabulary_bounded(names, DEFAULT_VOCAB_BOUND)
    }

    /// Like [`World::make_vocabulary`] with an explicit width bound (at most
    /// [`MAX_VOCAB`]); wide vocabularies are only usable in sampling modes.
    pub fn make_vocabulary_bounded<S: AsRef<str>>(
        &self,
        names: &[S],
        bound: usize,
    ) -> Result<Vocabulary> {
        let bound = bound.min(MAX_VOCAB);
        if names.len() > bound {
            return Err(Error::VocabularyTooLarge {
                got: names.len(),
                max: bound,
            });
        }
        let mut members = Vec::with_capacity(names.len());
        for name in names {
            let name = name.as_ref();
            let idx = self.program_index(name)?;
            if members.contains(&idx) {
                return Err(Error::DuplicateVocabularyEntry(name.to_string()));
            }
            if !self.programs[idx].truth.iter().any(|&t| t) {
                return Err(Error::NeverTrue(name.to_string()));
            }
            members.push(idx);
        }
        Ok(Vocabulary {
            world: self.id,
            names: members
                .iter()
                .map(|&i| self.programs[i].name.clone())
                .collect(),
            members,
        })
    }

    /// Vocabulary of every program that is true somewhere, in declaration order.
    pub fn full_vocabulary(&self) -> Result<Vocabulary> {
        let names: Vec<&str> = self
            .programs
            .iter()
            .filter(|p| p.truth.iter().any(|&t| t))
            .map(|p| p.name.as_str())
            .collect();
        self.make_vocabulary_bounded(&names, MAX_VOCAB)
    }

    /// Deduplicated, sorted per-state projections {h ∩ V : h ∈ H}.
    pub fn projections(&self, vocab: &Vocabulary) -> Result<Vec<Statement>> {
        if vocab.world != self.id {
            return Err(Error::WorldMismatch);
        }
        let columns: Vec<u64> = vocab
            .members
            .iter()
            .map(|&p| self.programs[p].state_mask())
            .collect();
        let mut out: Vec<Statement> = (0..self.states.len())
            .map(|s| {
                let mask = columns
                    .iter()
                    .enumerate()
                    .filter(|(_, &col)| col >> s & 1 == 1)
                    .fold(0u64, |acc, (bit, _)| acc | (1 << bit));
                Statement::from_mask(mask)
            })
            .collect();
        out.sort();
        out.dedup();
        Ok(out)
    }
}

/// h_φ: the programs true at one state.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Totality {
    world: WorldId,
    state: usize,
    members: Vec<usize>,
}

impl Totality {
    pub fn world(&self) -> WorldId {
        self.world
    }

    pub fn state(&self) -> usize {
        self.state
    }

    /// Program indices, ascending.
    pub fn members(&self) -> &[usize] {
        &self.members
    }

    pub fn contains(&self, program: usize) -> bool {
        self.members.binary_search(&program).is_ok()
    }
}

/// An ordered subset of a world's programs. Position in the list is the bit
/// position in statement masks.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Vocabulary {
    world: WorldId,
    members: Vec<usize>,
    names: Vec<String>,
}

impl Vocabulary {
    pub fn world(&self) -> WorldId {
        self.world
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    /// World program index at each bit position.
    pub fn programs(&self) -> &[usize] {
        &self.members
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn bit_of(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    /// Statement naming exactly these programs; each must be in the vocabulary.
    pub fn statement<S: AsRef<str>>(&self, names: &[S]) -> Result<Statement> {
        let mut mask = 0u64;
        for n in names {
            let bit = self
                .bit_of(n.as_ref())
                .ok_or_else(|| Error::UnknownProgram(n.as_ref().to_string()))?;
            mask |= 1 << bit;
        }
        Ok(Statement::from_mask(mask))
    }

    /// Projects a set of world programs onto the vocabulary, silently
    /// dropping programs the vocabulary cannot express. Names must still exist
    /// in `world`.
    pub fn project<S: AsRef<str>>(&self, world: &World, names: &[S]) -> Result<Statement> {
        if world.id() != self.world {
            return Err(Error::WorldMismatch);
        }
        let mut mask = 0u64;
        for n in names {
            let p = world.program_index(n.as_ref())?;
            if let Some(bit) = self.members.iter().position(|&m| m == p) {
                mask |= 1 << bit;
            }
        }
        Ok(Statement::from_mask(mask))
    }

    /// Renders a statement as `{a,b}` using program names.
    pub fn render(&self, s: Statement) -> String {
        format!("{{{}}}", self.names_of(s).join(","))
    }

    pub fn names_of(&self, s: Statement) -> Vec<&str> {
        s.bits()
            .filter(|&b| b < self.names.len())
            .map(|b| self.names[b].as_str())
            .collect()
    }

    pub fn full_mask(&self) -> u64 {
        if self.members.len() == 64 {
            u64::MAX
        } else {
            (1u64 << self.members.len()) - 1
        }
    }
}

/// Random permutation of a vocabulary's bit order (same programs).
pub fn shuffled_vocabulary<R: Rng + ?Sized>(
    world: &World,
    vocab: &Vocabulary,
    rng: &mut R,
) -> Result<Vocabulary> {
    let mut names = vocab.names().to_vec();
    names.shuffle(rng);
    world.make_vocabulary_bounded(&names, MAX_VOCAB)
}
