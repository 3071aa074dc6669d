//! Weakness-maximising induction over finite statement lattices.
//!
//! The crate builds a finite world of states and declarative programs, a
//! language of statements over a chosen vocabulary, and tasks whose models are
//! selected by maximising weakness (extension size). On top of that it shows
//! how interventions, identities and intents are represented as statements,
//! and checks that an intervention switch variable reproduces graph surgery
//! in an exact discrete network.

pub mod causality;
pub mod error;
pub mod experiments;
pub mod induction;
pub mod lang;
pub mod mind;
pub mod task;
pub mod world;

pub use causality::{Attribution, Identity, InterventionEvent};
pub use error::{Error, Result};
pub use experiments::{Format, Report};
pub use induction::{induce, InductionResult, Policy};
pub use lang::{Language, Statement};
pub use mind::{Observation, Rationale};
pub use task::{Decision, Task, TaskBounds};
pub use world::{Vocabulary, World, WorldSpec};
