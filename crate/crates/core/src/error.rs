use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    // world
    #[error("a world needs at least one state")]
    NoStates,
    #[error("a world supports at most {max} states, got {got}")]
    TooManyStates { got: usize, max: usize },
    #[error("duplicate state `{0}`")]
    DuplicateState(String),
    #[error("duplicate program name `{0}`")]
    DuplicateProgram(String),
    #[error("unknown state `{0}`")]
    UnknownState(String),
    #[error("unknown program `{0}`")]
    UnknownProgram(String),
    #[error("program `{0}` listed twice in the vocabulary")]
    DuplicateVocabularyEntry(String),
    #[error("program `{0}` is true in no state and cannot belong to a vocabulary")]
    NeverTrue(String),
    #[error("vocabulary of {got} programs exceeds the bound of {max}")]
    VocabularyTooLarge { got: usize, max: usize },
    #[error("vocabulary or totality belongs to a different world")]
    WorldMismatch,

    // lang
    #[error("statement mask {0:#b} sets bits outside the vocabulary")]
    MaskOutOfRange(u64),
    #[error("statement {0} is not contained in any state of the world")]
    InvalidStatement(String),
    #[error("operation needs an exhaustive language (|V| <= {limit}), this one has {width}")]
    NotExhaustive { width: usize, limit: usize },

    // task
    #[error("a task needs at least one situation")]
    EmptySituations,
    #[error("a task needs at least one decision")]
    EmptyDecisions,
    #[error("decision {0} extends none of the situations")]
    DecisionOutsideSituations(String),
    #[error("tasks are defined over different languages")]
    LanguageMismatch,
    #[error("statement {0} is not a situation of this task")]
    NotASituation(String),
    #[error("hypothesis silent in this situation: no decision extends both")]
    SilentHypothesis,
    #[error("task bounds must be positive")]
    InvalidBounds,
    #[error("enumeration of {count} tasks exceeds the exhaustive ceiling of {ceiling}; use sampling mode")]
    BoundExplosion { count: u128, ceiling: u128 },
    #[error("cannot forget {k} of {available} decisions")]
    ForgetTooMany { k: usize, available: usize },

    // induction
    #[error("task has no valid model in this vocabulary")]
    NoModel,
    #[error("hypothesis is not a model of the child task")]
    NotAModel,
    #[error("task has no strict parent within the bounds")]
    NoParents,
    #[error("parent sampling gave up after {attempts} rejected draws")]
    SamplingExhausted { attempts: u64 },

    // causality
    #[error("malformed intervention: forced content is not contained in the event")]
    MalformedEvent,
    #[error("identity needs at least one intervention event")]
    NoEvents,
    #[error("unknown variable `{0}`")]
    UnknownVariable(String),
    #[error("variable `{var}` has no value `{value}`")]
    UnknownValue { var: String, value: String },
    #[error("duplicate variable `{0}`")]
    DuplicateVariable(String),
    #[error("variable `{0}` has an empty domain")]
    EmptyDomain(String),
    #[error("CPT of `{var}` has {got} rows, expected {expected}")]
    CptShape {
        var: String,
        expected: usize,
        got: usize,
    },
    #[error("CPT row {row} of `{var}` sums to {sum}, not 1")]
    CptRowSum {
        var: String,
        row: usize,
        sum: String,
    },
    #[error("CPT of `{0}` has a negative entry")]
    NegativeProbability(String),
    #[error("parent graph has a cycle through `{0}`")]
    Cycle(String),
    #[error("conditioning event has probability zero")]
    ZeroProbabilityEvidence,
    #[error("not a two-variable R -> C copy net: {0}")]
    MalformedBaseNet(String),
    #[error("cannot parse `{0}` as a rational")]
    BadRational(String),

    // mind
    #[error("no observations given")]
    NoObservations,
    #[error("observation decision does not extend its situation")]
    MalformedObservation,
    #[error("no rationale exists in this vocabulary")]
    NoRationale,
    #[error("behaviour outside projected goal")]
    BehaviourOutsideGoal,
    #[error("decision coincides with the goal model; no strictly lower-level refinement exists")]
    NoStrictRefinement,

    // experiments
    #[error("no eligible child task within the bounds")]
    NoEligibleChild,
    #[error("scenario: {0}")]
    Scenario(String),
    #[error("i/o: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Io(e.to_string())
    }
}
