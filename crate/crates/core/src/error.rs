use thiserror::Error;

use crate::{ConstraintId, FiringId, ObservationId, RuleId, VariableId};

/// Errors raised by network construction and the engine operations.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum NetworkError {
    #[error("unknown variable {0:?}")]
    UnknownVariable(VariableId),
    #[error("unknown variable `{0}`")]
    UnknownVariableName(String),
    #[error("unknown constraint {0:?}")]
    UnknownConstraint(ConstraintId),
    #[error("unknown constraint `{0}`")]
    UnknownConstraintName(String),
    #[error("unknown observation {0:?}")]
    UnknownObservation(ObservationId),
    #[error("unknown observation `{0}`")]
    UnknownObservationLabel(String),
    #[error("unknown rule {0:?}")]
    UnknownRule(RuleId),
    #[error("unknown firing {0:?}")]
    UnknownFiring(FiringId),
    #[error("value index {value} is outside the declared domain of `{variable}`")]
    ValueOutsideDomain { variable: String, value: u16 },
    #[error("unknown token `{token}` for variable `{variable}`")]
    UnknownToken { variable: String, token: String },
    #[error("duplicate name `{0}`")]
    DuplicateName(String),
    #[error("variable `{0}` must declare between 1 and 64 distinct values")]
    BadDomain(String),
    #[error("constraint `{0}` has an empty or repeated scope")]
    BadScope(String),
    #[error("constraint `{0}` allows no tuple")]
    EmptyRelation(String),
    #[error("tuple of constraint `{label}` has {found} components, expected {expected}")]
    TupleArity {
        label: String,
        expected: usize,
        found: usize,
    },
    #[error("no justification {cause} on ({variable:?}, {value:?})")]
    NoSuchJustification {
        variable: VariableId,
        value: crate::Value,
        cause: String,
    },
    #[error("cause {0} is not an active firing or observation")]
    InactiveCause(String),
    #[error("observation `{0}` already exists")]
    DuplicateObservation(String),
    #[error(
        "observation `{new}` contradicts active observation `{existing}` on the same variable"
    )]
    ObservationClash { existing: String, new: String },
    #[error("observation {0:?} is already retracted")]
    AlreadyRetracted(ObservationId),
    #[error("constraint `{0}` is already relaxed")]
    AlreadyRelaxed(String),
    #[error("constraint `{0}` is not relaxable")]
    NotRelaxable(String),
    #[error("constraint `{0}` is not relaxed")]
    NotRelaxed(String),
    #[error("constraint `{0}` is relaxed; its rules cannot fire")]
    ConstraintInactive(String),
    #[error("rule {0:?} has a condition that is not instantiated")]
    ConditionsNotInstantiated(RuleId),
    #[error("rule {0:?} already has an active firing")]
    RuleAlreadyFired(RuleId),
    #[error("firing {0:?} is already cancelled")]
    AlreadyCancelled(FiringId),
    #[error("variable {0:?} still has visible values")]
    VariableNotEmpty(VariableId),
    #[error("maximum diagnosis cardinality must be at least 1")]
    InvalidCardinality,
}

/// Errors raised by the rule compiler's pure operations.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CompileError {
    #[error("variable {0:?} is not in the constraint scope")]
    OutsideScope(VariableId),
    #[error("value {value:?} is outside the domain of {variable:?}")]
    OutsideDomain {
        variable: VariableId,
        value: crate::Value,
    },
    #[error("target {0:?} is already assigned")]
    TargetAssigned(VariableId),
    #[error("constraint allows no tuple")]
    EmptyRelation,
    #[error("expected {expected} domain sizes, got {found}")]
    DomainCount { expected: usize, found: usize },
}
