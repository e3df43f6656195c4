//! Local mu-calculus: syntax, derived operators and fixpoint evaluation.

mod eval;
mod formula;

use thiserror::Error;

pub use eval::{evaluate, failing_initial, holds, Env};
pub use formula::{Formula, Label};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FormulaError {
    #[error("unknown label `{0}`")]
    UnknownLabel(String),
    #[error("empty label set")]
    EmptyLabelSet,
    #[error("label set not resolved against a template")]
    UnresolvedLabelSet,
    #[error("`{0}` occurs under an odd number of negations in its own fixpoint")]
    NonMonotone(String),
    #[error("unknown proposition `{0}`")]
    UnknownProposition(String),
    #[error("unbound variable `{0}`")]
    UnboundVariable(String),
    #[error("bad comparison: {0}")]
    BadComparison(String),
    #[error("transition system has no initial states")]
    NoInitialStates,
}
