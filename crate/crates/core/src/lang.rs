//! Statements over a fixed vocabulary, the extension lattice and weakness.
//!
//! A statement is a subset of the vocabulary, held as a bit mask whose bit
//! positions follow the vocabulary's declaration order. It is valid (a member
//! of L) when some state's projection onto the vocabulary contains it, so L is
//! the downward closure of the projections. The extension Z_a of a valid
//! statement is the set of valid statements containing it and its weakness is
//! |Z_a|.
//!
//! Languages of width up to the exhaustive limit precompute a validity table
//! and a weakness table for all 2^|V| masks; wider languages answer validity
//! by scanning projections and weakness by inclusion–exclusion.

use std::collections::hash_map::DefaultHasher;
use std::collections::BTreeMap;
use std::fmt;
use std::hash::{Hash, Hasher};

use crate::error::{Error, Result};
use crate::world::{Totality, Vocabulary, World, DEFAULT_VOCAB_BOUND};

#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Statement(u64);

impl Statement {
    pub const EMPTY: Statement = Statement(0);

    pub const fn from_mask(mask: u64) -> Statement {
        Statement(mask)
    }

    pub const fn mask(self) -> u64 {
        self.0
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn is_subset_of(self, other: Statement) -> bool {
        self.0 & !other.0 == 0
    }

    pub fn is_strict_subset_of(self, other: Statement) -> bool {
        self != other && self.is_subset_of(other)
    }

    pub fn union(self, other: Statement) -> Statement {
        Statement(self.0 | other.0)
    }

    pub fn intersection(self, other: Statement) -> Statement {
        Statement(self.0 & other.0)
    }

    pub fn difference(self, other: Statement) -> Statement {
        Statement(self.0 & !other.0)
    }

    pub fn contains_bit(self, bit: usize) -> bool {
        bit < 64 && self.0 >> bit & 1 == 1
    }

    /// Set bit positions, ascending.
    pub fn bits(self) -> impl Iterator<Item = usize> {
        let mut rest = self.0;
        std::iter::from_fn(move || {
            if rest == 0 {
                None
            } else {
                let b = rest.trailing_zeros() as usize;
                rest &= rest - 1;
                Some(b)
            }
        })
    }
}

impl fmt::Debug for Statement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Statement({:#b})", self.0)
    }
}

/// Union of a collection of statements.
pub fn union_all<'a>(statements: impl IntoIterator<Item = &'a Statement>) -> Statement {
    statements
        .into_iter()
        .fold(Statement::EMPTY, |acc, s| acc.union(*s))
}

/// Every mask `b` with `base ⊆ b ⊆ ceiling`, in descending mask order.
pub(crate) fn masks_between(base: u64, ceiling: u64) -> impl Iterator<Item = u64> {
    let free = ceiling & !base;
    let mut next = Some(free);
    std::iter::from_fn(move || {
        let x = next?;
        next = if x == 0 { None } else { Some((x - 1) & free) };
        Some(base | x)
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct LanguageId(u64);

#[derive(Debug, Clone)]
struct Tables {
    valid: Vec<bool>,
    weakness: Vec<u64>,
    statements: Vec<Statement>,
}

/// ⟨H, V, L⟩ with H reduced to its projections onto V.
#[derive(Debug, Clone)]
pub struct Language {
    id: LanguageId,
    vocabulary: Vocabulary,
    projections: Vec<Statement>,
    maximal: Vec<Statement>,
    size: u128,
    tables: Option<Tables>,
    limit: usize,
}

impl Language {
    pub fn new(world: &World, vocabulary: &Vocabulary) -> Result<Language> {
        Language::with_limit(world, vocabulary, DEFAULT_VOCAB_BOUND)
    }

    /// Builds a language, materialising tables only if |V| ≤ `limit`.
    pub fn with_limit(world: &World, vocabulary: &Vocabulary, limit: usize) -> Result<Language> {
        let projections = world.projections(vocabulary)?;
        let mut maximal: Vec<Statement> = projections
            .iter()
            .copied()
            .filter(|p| !projections.iter().any(|q| p.is_strict_subset_of(*q)))
            .collect();
        maximal.sort();

        let mut h = DefaultHasher::new();
        world.id().hash(&mut h);
        vocabulary.programs().hash(&mut h);

        let mut lang = Language {
            id: LanguageId(h.finish()),
            vocabulary: vocabulary.clone(),
            projections,
            maximal,
            size: 0,
            tables: None,
            limit: limit.min(24),
        };
        if vocabulary.len() <= lang.limit {
            lang.tables = Some(lang.build_tables());
            lang.size = lang.tables.as_ref().unwrap().statements.len() as u128;
        } else {
            lang.size = lang.weakness_by_inclusion_exclusion_unchecked(Statement::EMPTY);
        }
        Ok(lang)
    }

    fn build_tables(&self) -> Tables {
        let width = self.vocabulary.len();
        let n = 1usize << width;
        let mut valid = vec![false; n];
        for p in &self.projections {
            valid[p.mask() as usize] = true;
        }
        // downward closure
        for bit in 0..width {
            for mask in 0..n {
                if mask >> bit & 1 == 1 && valid[mask] {
                    valid[mask ^ (1 << bit)] = true;
                }
            }
        }
        // superset sums of the validity indicator
        let mut weakness: Vec<u64> = valid.iter().map(|&v| v as u64).collect();
        for bit in 0..width {
            for mask in 0..n {
                if mask >> bit & 1 == 0 {
                    weakness[mask] += weakness[mask | (1 << bit)];
                }
            }
        }
        for (w, &v) in weakness.iter_mut().zip(&valid) {
            if !v {
                *w = 0;
            }
        }
        let statements = (0..n)
            .filter(|&m| valid[m])
            .map(|m| Statement(m as u64))
            .collect();
        Tables {
            valid,
            weakness,
            statements,
        }
    }

    pub fn id(&self) -> LanguageId {
        self.id
    }

    pub fn vocabulary(&self) -> &Vocabulary {
        &self.vocabulary
    }

    pub fn width(&self) -> usize {
        self.vocabulary.len()
    }

    /// Π: distinct projections of the world's states onto V, sorted by mask.
    pub fn projections(&self) -> &[Statement] {
        &self.projections
    }

    /// Projections not strictly contained in another projection.
    pub fn maximal_projections(&self) -> &[Statement] {
        &self.maximal
    }

    pub fn is_exhaustive(&self) -> bool {
        self.tables.is_some()
    }

    /// |L|.
    pub fn size(&self) -> u128 {
        self.size
    }

    /// All of L sorted by mask. Exhaustive languages only.
    pub fn statements(&self) -> Result<&[Statement]> {
        Ok(&self.tables()?.statements)
    }

    fn tables(&self) -> Result<&Tables> {
        self.tables.as_ref().ok_or(Error::NotExhaustive {
            width: self.width(),
            limit: self.limit,
        })
    }

    pub fn statement<S: AsRef<str>>(&self, names: &[S]) -> Result<Statement> {
        self.vocabulary.statement(names)
    }

    pub fn render(&self, s: Statement) -> String {
        self.vocabulary.render(s)
    }

    pub fn render_set<'a>(&self, set: impl IntoIterator<Item = &'a Statement>) -> String {
        let parts: Vec<String> = set.into_iter().map(|s| self.render(*s)).collect();
        format!("{{{}}}", parts.join(","))
    }

    pub fn check_mask(&self, s: Statement) -> Result<()> {
        if s.mask() & !self.vocabulary.full_mask() != 0 {
            Err(Error::MaskOutOfRange(s.mask()))
        } else {
            Ok(())
        }
    }

    /// Membership in L. Masks with bits outside the vocabulary are never valid.
    pub fn is_valid(&self, s: Statement) -> bool {
        if self.check_mask(s).is_err() {
            return false;
        }
        match &self.tables {
            Some(t) => t.valid[s.mask() as usize],
            None => self.valid_by_scan(s),
        }
    }

    fn valid_by_scan(&self, s: Statement) -> bool {
        self.maximal.iter().any(|p| s.is_subset_of(*p))
    }

    pub fn require_valid(&self, s: Statement) -> Result<()> {
        self.check_mask(s)?;
        if self.is_valid(s) {
            Ok(())
        } else {
            Err(Error::InvalidStatement(self.render(s)))
        }
    }

    /// Truth of `l` at the state whose totality is `h`: every program of `l`
    /// belongs to `h`.
    pub fn is_true(&self, l: Statement, h: &Totality) -> Result<bool> {
        if h.world() != self.vocabulary.world() {
            return Err(Error::WorldMismatch);
        }
        self.check_mask(l)?;
        let programs = self.vocabulary.programs();
        Ok(l.bits().all(|b| h.contains(programs[b])))
    }

    /// Z_a, sorted by mask.
    pub fn extension(&self, a: Statement) -> Result<Vec<Statement>> {
        self.require_valid(a)?;
        let t = self.tables()?;
        let mut out: Vec<Statement> = masks_between(a.mask(), self.vocabulary.full_mask())
            .filter(|&m| t.valid[m as usize])
            .map(Statement)
            .collect();
        out.sort();
        Ok(out)
    }

    /// Z_A = ∪_{a ∈ A} Z_a, sorted by mask.
    pub fn extension_of_set(&self, set: &[Statement]) -> Result<Vec<Statement>> {
        let mut out = Vec::new();
        for &a in set {
            out.extend(self.extension(a)?);
        }
        out.sort();
        out.dedup();
        Ok(out)
    }

    /// |Z_a|.
    pub fn weakness(&self, a: Statement) -> Result<u128> {
        self.require_valid(a)?;
        Ok(match &self.tables {
            Some(t) => t.weakness[a.mask() as usize] as u128,
            None => self.weakness_by_inclusion_exclusion_unchecked(a),
        })
    }

    /// Table lookup without validity checks; invalid masks read as 0.
    #[inline]
    pub(crate) fn weakness_fast(&self, a: Statement) -> u128 {
        match &self.tables {
            Some(t) => t.weakness[a.mask() as usize] as u128,
            None => self.weakness_by_inclusion_exclusion_unchecked(a),
        }
    }

    /// |Z_a| by walking every superset of `a` inside V and testing each
    /// against the projections directly.
    pub fn weakness_by_enumeration(&self, a: Statement) -> Result<u128> {
        self.require_valid(a)?;
        if self.width() > 30 {
            return Err(Error::NotExhaustive {
                width: self.width(),
                limit: 30,
            });
        }
        Ok(masks_between(a.mask(), self.vocabulary.full_mask())
            .filter(|&m| self.valid_by_scan(Statement(m)))
            .count() as u128)
    }

    /// |Z_a| = |∪_{π ⊇ a} [a, π]| by inclusion–exclusion over projection
    /// intersections. Signed coefficients are accumulated per distinct
    /// intersection mask so the alternating sum never revisits a subset.
    pub fn weakness_by_inclusion_exclusion(&self, a: Statement) -> Result<u128> {
        self.require_valid(a)?;
        Ok(self.weakness_by_inclusion_exclusion_unchecked(a))
    }

    fn weakness_by_inclusion_exclusion_unchecked(&self, a: Statement) -> u128 {
        let mut coef: BTreeMap<u64, i128> = BTreeMap::new();
        for p in self.maximal.iter().filter(|p| a.is_subset_of(**p)) {
            let mut updates: Vec<(u64, i128)> = Vec::with_capacity(coef.len() + 1);
            updates.push((p.mask(), 1));
            for (&m, &c) in &coef {
                updates.push((m & p.mask(), -c));
            }
            for (m, c) in updates {
                let e = coef.entry(m).or_insert(0);
                *e += c;
                if *e == 0 {
                    coef.remove(&m);
                }
            }
        }
        let base = a.len() as u32;
        let total: i128 = coef
            .iter()
            .map(|(&m, &c)| c * (1i128 << (m.count_ones() - base)))
            .sum();
        debug_assert!(total >= 0);
        total as u128
    }

    /// `c` is higher level than `a` (written a ⊏ c) when Z_a ⊊ Z_c. For
    /// valid statements this holds exactly when c ⊊ a.
    pub fn is_higher_level(&self, c: Statement, a: Statement) -> Result<bool> {
        self.require_valid(c)?;
        self.require_valid(a)?;
        Ok(c.is_strict_subset_of(a))
    }
}
