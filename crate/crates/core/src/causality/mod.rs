//! Interventions as statements.
//!
//! An intervention `a` that forces `c` contains it (`c ⊆ a`). Whatever `a`
//! holds beyond `c` is the residue `a − c`: the part that tells intervening
//! apart from merely observing `c`, and that marks who intervened. Whether
//! that residue is non-empty depends on the vocabulary.
//!
//! The [`net`] submodule holds the exact discrete network used to show that
//! graph surgery is reproduced by conditioning on a switch variable.

pub mod net;

use crate::error::{Error, Result};
use crate::lang::{Language, Statement};

pub use net::{DiscreteNet, SwitchVerdict, VariableSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct InterventionEvent {
    a: Statement,
    c: Statement,
}

impl InterventionEvent {
    /// `a` is the whole event, `c` the content it forces.
    pub fn new(lang: &Language, a: Statement, c: Statement) -> Result<InterventionEvent> {
        lang.require_valid(a)?;
        lang.require_valid(c)?;
        InterventionEvent::from_statements(a, c)
    }

    /// Checks only containment; validity is the caller's concern.
    pub fn from_statements(a: Statement, c: Statement) -> Result<InterventionEvent> {
        if !c.is_subset_of(a) {
            return Err(Error::MalformedEvent);
        }
        Ok(InterventionEvent { a, c })
    }

    pub fn event(&self) -> Statement {
        self.a
    }

    pub fn forced(&self) -> Statement {
        self.c
    }

    /// i = a − c.
    pub fn residue(&self) -> Statement {
        self.a.difference(self.c)
    }

    /// Intervention can be told from observation only when c ⊊ a.
    pub fn is_distinguishable(&self) -> bool {
        self.c.is_strict_subset_of(self.a)
    }
}

/// i = a − c for a raw pair, rejecting pairs where `c ⊄ a`.
pub fn intervention_residue(a: Statement, c: Statement) -> Result<Statement> {
    Ok(InterventionEvent::from_statements(a, c)?.residue())
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Identity {
    pub label: String,
    pub residue: Statement,
}

impl Identity {
    /// An empty residue cannot mark anyone.
    pub fn is_stable(&self) -> bool {
        !self.residue.is_empty()
    }
}

/// The residue common to every event: a party identity `k ⊆ a − c` that
/// persists across its interventions. Empty when the events share nothing.
pub fn shared_identity(events: &[InterventionEvent], label: &str) -> Result<Identity> {
    let first = events.first().ok_or(Error::NoEvents)?;
    let residue = events
        .iter()
        .fold(first.residue(), |acc, e| acc.intersection(e.residue()));
    Ok(Identity {
        label: label.to_string(),
        residue,
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Attribution {
    Attributed(String),
    /// No identity fits: the content was passively observed.
    Unattributed,
    Ambiguous(Vec<String>),
}

/// Attributes an observed event `v` forcing `c` to every stable identity
/// whose residue lies inside `v − c`.
pub fn attribute_party(v: Statement, c: Statement, ids: &[Identity]) -> Result<Attribution> {
    let residue = intervention_residue(v, c)?;
    let matches: Vec<String> = ids
        .iter()
        .filter(|id| id.is_stable() && id.residue.is_subset_of(residue))
        .map(|id| id.label.clone())
        .collect();
    Ok(match matches.len() {
        0 => Attribution::Unattributed,
        1 => Attribution::Attributed(matches.into_iter().next().unwrap()),
        _ => Attribution::Ambiguous(matches),
    })
}
