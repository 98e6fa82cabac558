//! Dynamic constraint networks over finite domains.
//!
//! Each extensional constraint is compiled into ground propagation rules
//! ([`compiler`]). Rules fire forward to a fixpoint and leave a justification
//! trace ([`engine`]), which supports relaxing and restoring constraints
//! incrementally ([`dynamic`]) and enumerating minimal diagnoses of an
//! inconsistent network ([`diagnosis`]). [`netspec`] and [`script`] provide
//! the text formats used by the command-line tool.

pub mod compiler;
pub mod diagnosis;
pub mod domain;
pub mod dynamic;
pub mod engine;
pub mod error;
pub mod event;
pub mod gates;
pub mod netspec;
pub mod script;
pub mod value;
pub mod verify;

pub use compiler::{closure, dump_rules, generate, projection, Assignment, RuleSet};
pub use diagnosis::{Diagnosis, DiagnosisReport, TreeNode};
pub use domain::{
    CancellationMarker, ChangeRecord, Conclusion, ConditionLiteral, ConstraintId,
    ExtensionalConstraint, FiniteDomain, Firing, FiringId, FiringStatus, Justification, Network,
    NetworkState, Observation, ObservationId, PropagationRule, RuleId, VariableId,
};
pub use engine::{ConflictSet, PropagationOptions, PropagationOutcome, PropagationStatus};
pub use error::{CompileError, NetworkError};
pub use event::{Event, EventKind};
pub use gates::{gate_table, GateError, GateKind};
pub use netspec::{parse_network, NetworkSpec, ParseError};
pub use script::{
    execute, parse_script, run_script, Command, Report, RunError, RunOptions, Script,
};
pub use value::{Value, ValueSet, MAX_DOMAIN_SIZE};
pub use verify::{oracle_check, verify_coverage, verify_rules, VerificationReport};
