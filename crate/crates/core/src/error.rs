use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("unknown fluent `{0}`")]
    UnknownFluent(String),
    #[error("unbound variable `{0}`")]
    UnboundVariable(String),
    #[error("unknown object `{0}`")]
    UnknownObject(String),
    #[error("unknown action type `{0}`")]
    UnknownActionType(String),
    #[error("`{symbol}` expects {expected} argument(s), got {found}")]
    ArityMismatch {
        symbol: String,
        expected: usize,
        found: usize,
    },
    #[error("action equality `a = {0}` is only meaningful inside a successor-state axiom")]
    UnresolvedActionEquality(String),
    #[error("state space exceeded the budget of {cap} nodes")]
    StateSpaceBudgetExceeded { cap: usize },
    #[error("configuration search exceeded the budget of {cap} configurations")]
    ConfigurationBudgetExceeded { cap: usize },
    #[error("fluent `{0}` has no refinement")]
    UnmappedFluent(String),
    #[error("action type `{0}` has no refinement")]
    UnmappedActionType(String),
    #[error("{0}")]
    Usage(String),
    #[error("{line}:{col}: {message}")]
    Syntax {
        line: usize,
        col: usize,
        message: String,
    },
    #[error("symbol `{0}` is declared by both theories")]
    VocabularyClash(String),
    #[error("high-level symbol `{0}` has no mapping entry")]
    UnmappedSymbol(String),
    #[error("invalid theory: {0}")]
    InvalidTheory(String),
    #[error("invalid mapping: {0}")]
    InvalidMapping(String),
    #[error("template for `{action}` is not situation-determined after [{trace}]")]
    NonSdTemplate { action: String, trace: String },
    #[error("the two theories declare different object domains")]
    DomainMismatch,
    #[error("initial model index {index} out of range ({count} model(s))")]
    InvalidModelIndex { index: usize, count: usize },
    #[error("trace is not executable: action {index} (`{action}`) is not possible")]
    NonExecutableTrace { index: usize, action: String },
    #[error("constraint 1 has not been verified for this theory and mapping")]
    ConstraintNotVerified,
    #[error("trace prefix of length {prefix} is explained by several high-level sequences: {candidates}")]
    AmbiguousExplanation { prefix: usize, candidates: String },
    #[error("no refinement exists for the plan prefix ending at step {step}")]
    NoRefinement { step: usize },
    #[error(
        "step {step} cannot be refined after the committed prefix although the prefix has other refinements"
    )]
    SoundnessAssumptionViolated { step: usize },
}

impl Error {
    pub fn is_budget(&self) -> bool {
        matches!(
            self,
            Error::StateSpaceBudgetExceeded { .. } | Error::ConfigurationBudgetExceeded { .. }
        )
    }
}
