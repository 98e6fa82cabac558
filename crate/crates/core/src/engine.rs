//! Forward chaining of compiled rules over a network, with a justification
//! trace and conflict extraction.
//!
//! Propagation runs in rounds. A round collects every rule that is
//! applicable in the state at the start of the round (all conditions
//! instantiated, owner active, and at least one conclusion strictly shrinks a
//! visible domain), then fires them all. Each firing justifies exactly the
//! values that were visible at the start of the round, so the resulting
//! masks and trace do not depend on the order in which a round's firings are
//! applied. Propagation continues to the least fixpoint even after a domain
//! empties; the reported conflict is the one of the variable that emptied
//! first.

use std::collections::{BTreeSet, HashSet};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::domain::{ChangeRecord, ConditionLiteral, Firing, FiringStatus, Justification, Network};
use crate::error::NetworkError;
use crate::event::EventKind;
use crate::{ConstraintId, FiringId, ObservationId, RuleId, Value, ValueSet, VariableId};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct PropagationOptions {
    /// Once a rule of a constraint has an active firing, no other rule of
    /// that constraint is considered.
    pub short_circuit: bool,
    /// Apply each round's firings in an order drawn from this seed instead of
    /// (constraint, rule) order.
    pub shuffle_seed: Option<u64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PropagationStatus {
    Fixpoint,
    Conflict,
}

/// Constraints (and, separately, observations) in the justification
/// ancestry of an empty domain.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct ConflictSet {
    pub constraints: BTreeSet<ConstraintId>,
    pub observations: BTreeSet<ObservationId>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PropagationOutcome {
    pub status: PropagationStatus,
    pub fired: Vec<FiringId>,
    pub changed: Vec<(VariableId, Value)>,
    /// Firings cancelled by the operation before re-propagation.
    pub cancelled: Vec<FiringId>,
    /// Values made visible by those cancellations.
    pub unmasked: Vec<(VariableId, Value)>,
    pub conflict: Option<(VariableId, ConflictSet)>,
}

impl PropagationOutcome {
    pub fn is_conflict(&self) -> bool {
        self.status == PropagationStatus::Conflict
    }
}

impl Network {
    pub fn set_options(&mut self, options: PropagationOptions) {
        self.options = options;
        self.rng = options.shuffle_seed.map(ChaCha8Rng::seed_from_u64);
    }

    pub fn options(&self) -> PropagationOptions {
        self.options
    }

    /// Pins `variable` to `value` under a new observation, then propagates.
    pub fn assert_observation(
        &mut self,
        label: &str,
        variable: VariableId,
        value: Value,
    ) -> Result<PropagationOutcome, NetworkError> {
        if self.observation_by_label(label).is_some() {
            return Err(NetworkError::DuplicateObservation(label.to_string()));
        }
        let d = self.domain(variable)?;
        if value.index() >= d.size() {
            return Err(NetworkError::ValueOutsideDomain {
                variable: d.name.clone(),
                value: value.0,
            });
        }
        if let Some(other) = self
            .observations
            .iter()
            .find(|o| o.active && o.variable == variable && o.value != value)
        {
            return Err(NetworkError::ObservationClash {
                existing: other.label.clone(),
                new: label.to_string(),
            });
        }
        let internal = self.is_internal(variable);
        let id = self.register_observation(label, variable, value);
        self.log(EventKind::Assert {
            observation: id,
            label: label.to_string(),
            variable,
            value,
            internal,
        });
        let others = d_declared(self, variable).difference(ValueSet::singleton(value));
        let rec = self.add_masks(variable, others, Justification::Observation(id));
        let mut out = self.propagate();
        let mut changed = rec.masked;
        changed.append(&mut out.changed);
        out.changed = changed;
        Ok(out)
    }

    /// Fires rules to the least fixpoint.
    pub fn propagate(&mut self) -> PropagationOutcome {
        let mut fired = Vec::new();
        let mut changed = Vec::new();
        while !self.pending.is_empty() {
            let candidates = std::mem::take(&mut self.pending);
            let mut plans = self.plan_round(candidates);
            if plans.is_empty() {
                break;
            }
            if let Some(rng) = self.rng.as_mut() {
                plans.shuffle(rng);
            }
            // Domains emptied during a round share its date, so the
            // reported conflict does not depend on the order above.
            let stamp = self.next_seq();
            for (rule, effects) in plans {
                let fid = match self.active_firing[rule.index()] {
                    Some(f) => f,
                    None => {
                        let f = self.open_firing(rule);
                        fired.push(f);
                        f
                    }
                };
                for (var, values) in effects {
                    let rec =
                        self.add_masks_at(var, values, Justification::Firing(fid), Some(stamp));
                    changed.extend(rec.masked);
                }
            }
        }
        let conflict = self.current_conflict();
        if let Some((var, cs)) = &conflict {
            let already = self.events.iter().rev().find_map(|e| match &e.kind {
                EventKind::Conflict {
                    variable,
                    constraints,
                    ..
                } => Some((*variable, constraints.clone())),
                _ => None,
            });
            let cons: Vec<ConstraintId> = cs.constraints.iter().copied().collect();
            if fired.len() + changed.len() > 0 || already != Some((*var, cons.clone())) {
                self.log(EventKind::Conflict {
                    variable: *var,
                    constraints: cons,
                    observations: cs.observations.iter().copied().collect(),
                });
            }
        }
        PropagationOutcome {
            status: if conflict.is_some() {
                PropagationStatus::Conflict
            } else {
                PropagationStatus::Fixpoint
            },
            fired,
            changed,
            cancelled: Vec::new(),
            unmasked: Vec::new(),
            conflict,
        }
    }

    /// Applicable rules among `candidates` in the current state, with the
    /// values each would mask.
    fn plan_round(
        &self,
        candidates: BTreeSet<RuleId>,
    ) -> Vec<(RuleId, Vec<(VariableId, ValueSet)>)> {
        let mut plans = Vec::new();
        let mut claimed: HashSet<ConstraintId> = HashSet::new();
        for rid in candidates {
            let rule = &self.rules[rid.index()];
            if !self.constraints[rule.owner.index()].active || self.markers.contains_key(&rid) {
                continue;
            }
            if !rule.conditions.iter().all(|&l| self.condition_holds(l)) {
                continue;
            }
            let effects: Vec<(VariableId, ValueSet)> = rule
                .conclusions
                .iter()
                .map(|k| {
                    (
                        k.variable,
                        self.domains[k.variable.index()]
                            .visible
                            .difference(k.values),
                    )
                })
                .filter(|(_, s)| !s.is_empty())
                .collect();
            if effects.is_empty() {
                continue;
            }
            if self.options.short_circuit && self.active_firing[rid.index()].is_none() {
                let owner = rule.owner;
                if self.active_per_constraint[owner.index()] > 0 || !claimed.insert(owner) {
                    continue;
                }
            }
            plans.push((rid, effects));
        }
        plans
    }

    fn open_firing(&mut self, rule: RuleId) -> FiringId {
        let id = FiringId(self.firings.len() as u32);
        let r = &self.rules[rule.index()];
        let owner = r.owner;
        let supports: Vec<(ConditionLiteral, Vec<Justification>)> = r
            .conditions
            .iter()
            .map(|&lit| {
                let d = &self.domains[lit.variable.index()];
                let mut js: Vec<Justification> = d
                    .declared()
                    .iter()
                    .filter(|&v| v != lit.value)
                    .flat_map(|v| d.masks[v.index()].iter().copied())
                    .collect();
                js.sort();
                js.dedup();
                (lit, js)
            })
            .collect();
        self.log(EventKind::Fire {
            firing: id,
            rule,
            constraint: owner,
            supports: supports.clone(),
        });
        self.firings.push(Firing {
            id,
            rule,
            owner,
            supports,
            effects: Vec::new(),
            status: FiringStatus::Active,
        });
        self.active_firing[rule.index()] = Some(id);
        self.active_per_constraint[owner.index()] += 1;
        id
    }

    /// Fires one rule against the current state. Requires every condition
    /// variable to be instantiated to its literal value and the rule to have
    /// no active firing. A rule whose conclusions would change nothing
    /// creates no firing.
    pub fn fire_rule(&mut self, rule: RuleId) -> Result<ChangeRecord, NetworkError> {
        let r = self.rule(rule)?.clone();
        let owner = &self.constraints[r.owner.index()];
        if !owner.active {
            return Err(NetworkError::ConstraintInactive(owner.label.clone()));
        }
        for l in &r.conditions {
            if !self.is_instantiated(l.variable, l.value)? {
                return Err(NetworkError::ConditionsNotInstantiated(rule));
            }
        }
        if self.active_firing[rule.index()].is_some() {
            return Err(NetworkError::RuleAlreadyFired(rule));
        }
        let shrinks = r
            .conclusions
            .iter()
            .any(|k| !self.domains[k.variable.index()].visible.is_subset(k.values));
        if !shrinks {
            return Ok(ChangeRecord::default());
        }
        let fid = self.open_firing(rule);
        let mut rec = ChangeRecord::default();
        for k in &r.conclusions {
            rec.absorb(self.restrict(k.variable, k.values, Justification::Firing(fid))?);
        }
        Ok(rec)
    }

    /// Constraints and observations in the justification ancestry of the
    /// masks of an empty variable.
    pub fn extract_conflict(&self, variable: VariableId) -> Result<ConflictSet, NetworkError> {
        let d = self.domain(variable)?;
        if !d.visible.is_empty() {
            return Err(NetworkError::VariableNotEmpty(variable));
        }
        let mut out = ConflictSet::default();
        let mut stack: Vec<Justification> = d.masks.iter().flatten().copied().collect();
        let mut seen: HashSet<FiringId> = HashSet::new();
        while let Some(j) = stack.pop() {
            match j {
                Justification::Observation(o) => {
                    out.observations.insert(o);
                }
                Justification::Firing(f) => {
                    if !seen.insert(f) {
                        continue;
                    }
                    let firing = &self.firings[f.index()];
                    out.constraints.insert(firing.owner);
                    for (_, js) in &firing.supports {
                        stack.extend(js.iter().copied().filter(|&j| self.justification_active(j)));
                    }
                }
            }
        }
        Ok(out)
    }

    pub(crate) fn justification_active(&self, j: Justification) -> bool {
        match j {
            Justification::Firing(f) => self.firings[f.index()].is_active(),
            Justification::Observation(o) => self.observations[o.index()].active,
        }
    }

    /// The conflict of the earliest-emptied variable, if any domain is empty.
    pub fn current_conflict(&self) -> Option<(VariableId, ConflictSet)> {
        let var = self
            .variables()
            .filter(|v| self.domains[v.index()].visible.is_empty())
            .min_by_key(|v| (self.domains[v.index()].emptied_at.unwrap_or(0), *v))?;
        let cs = self.extract_conflict(var).expect("variable is empty");
        Some((var, cs))
    }

    pub fn is_consistent(&self) -> bool {
        self.domains.iter().all(|d| !d.visible.is_empty())
    }
}

fn d_declared(net: &Network, var: VariableId) -> ValueSet {
    net.domains[var.index()].declared()
}
