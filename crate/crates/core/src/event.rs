//! Append-only event log and its replay.

use serde::Serialize;

use crate::domain::{
    CancellationMarker, ConditionLiteral, Firing, FiringStatus, Justification, Network,
};
use crate::{ConstraintId, FiringId, ObservationId, RuleId, Value, VariableId};

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Event {
    pub seq: u64,
    #[serde(flatten)]
    pub kind: EventKind,
}

/// One mutation of a network. Replaying the events of a network, in order,
/// on a copy of its initial state reproduces its current state.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "op", rename_all = "snake_case")]
pub enum EventKind {
    Assert {
        observation: ObservationId,
        label: String,
        variable: VariableId,
        value: Value,
        internal: bool,
    },
    Fire {
        firing: FiringId,
        rule: RuleId,
        constraint: ConstraintId,
        supports: Vec<(ConditionLiteral, Vec<Justification>)>,
    },
    Mask {
        variable: VariableId,
        values: Vec<Value>,
        cause: Justification,
        /// Date given to the domain if this mask empties it.
        stamp: u64,
    },
    Unmask {
        variable: VariableId,
        value: Value,
        cause: Justification,
    },
    Cancel {
        firing: FiringId,
        unmasked: Vec<(VariableId, Value)>,
    },
    Retract {
        observation: ObservationId,
        unmasked: Vec<(VariableId, Value)>,
    },
    Relax {
        constraint: ConstraintId,
    },
    Restore {
        constraint: ConstraintId,
    },
    Conflict {
        variable: VariableId,
        constraints: Vec<ConstraintId>,
        observations: Vec<ObservationId>,
    },
}

impl Network {
    /// Rebuilds a network by applying `events` to `self`, which must be the
    /// initial state the events were recorded against.
    ///
    /// Replay uses only the recorded mutations; no rule is re-evaluated.
    pub fn replay(&self, events: &[Event]) -> Network {
        let mut net = self.clone();
        for e in events {
            net.events.push(e.clone());
            match &e.kind {
                EventKind::Assert {
                    label,
                    variable,
                    value,
                    ..
                } => {
                    net.register_observation(label, *variable, *value);
                }
                EventKind::Fire {
                    firing,
                    rule,
                    constraint,
                    supports,
                } => {
                    debug_assert_eq!(firing.index(), net.firings.len());
                    net.firings.push(Firing {
                        id: *firing,
                        rule: *rule,
                        owner: *constraint,
                        supports: supports.clone(),
                        effects: Vec::new(),
                        status: FiringStatus::Active,
                    });
                    net.active_firing[rule.index()] = Some(*firing);
                    net.active_per_constraint[constraint.index()] += 1;
                }
                EventKind::Mask {
                    variable,
                    values,
                    cause,
                    stamp,
                } => {
                    net.apply_masks(*variable, values.iter().copied().collect(), *cause, *stamp);
                }
                EventKind::Unmask {
                    variable,
                    value,
                    cause,
                } => {
                    net.apply_unmask(*variable, *value, *cause);
                }
                EventKind::Cancel { firing, .. } => {
                    net.tombstone_firing(*firing);
                }
                EventKind::Retract { observation, .. } => {
                    net.drop_observation(*observation);
                }
                EventKind::Relax { constraint } => {
                    net.constraints[constraint.index()].active = false;
                    let seq = e.seq;
                    let range = net.rule_ranges[constraint.index()].clone();
                    for r in range {
                        net.markers.insert(
                            RuleId(r),
                            CancellationMarker {
                                rule: RuleId(r),
                                origin: seq,
                            },
                        );
                    }
                }
                EventKind::Restore { constraint } => {
                    net.constraints[constraint.index()].active = true;
                    let range = net.rule_ranges[constraint.index()].clone();
                    for r in range {
                        net.markers.remove(&RuleId(r));
                    }
                }
                EventKind::Conflict { .. } => {}
            }
        }
        net
    }
}
