//! Relaxation, restoration and retraction without recomputing from scratch.
//!
//! Removing a constraint or an observation withdraws exactly the mask entries
//! it justified. A firing whose condition lost its instantiation is cancelled
//! in turn, and so on transitively. The network is then re-propagated.

use crate::domain::{CancellationMarker, FiringStatus, Justification, Network};
use crate::engine::PropagationOutcome;
use crate::error::NetworkError;
use crate::event::EventKind;
use crate::{ConstraintId, FiringId, ObservationId, RuleId, Value, VariableId};

impl Network {
    /// Disables a constraint: its rules stop firing and every active firing
    /// of them is cancelled with its consequences.
    pub fn relax(&mut self, id: ConstraintId) -> Result<PropagationOutcome, NetworkError> {
        let c = self.constraint(id)?;
        if !c.relaxable {
            return Err(NetworkError::NotRelaxable(c.label.clone()));
        }
        if !c.active {
            return Err(NetworkError::AlreadyRelaxed(c.label.clone()));
        }
        self.constraints[id.index()].active = false;
        let seq = self.log(EventKind::Relax { constraint: id });
        let range = self.rule_ranges[id.index()].clone();
        let mut seeds = Vec::new();
        for r in range {
            let rule = RuleId(r);
            self.markers
                .insert(rule, CancellationMarker { rule, origin: seq });
            if let Some(f) = self.active_firing[rule.index()] {
                seeds.push(f);
            }
        }
        let (cancelled, unmasked) = self.cascade(seeds, Vec::new());
        Ok(self.finish(cancelled, unmasked))
    }

    /// Re-enables a relaxed constraint and propagates its rules again.
    pub fn restore(&mut self, id: ConstraintId) -> Result<PropagationOutcome, NetworkError> {
        let c = self.constraint(id)?;
        if c.active {
            return Err(NetworkError::NotRelaxed(c.label.clone()));
        }
        self.constraints[id.index()].active = true;
        self.log(EventKind::Restore { constraint: id });
        let range = self.rule_ranges[id.index()].clone();
        for r in range {
            self.markers.remove(&RuleId(r));
            self.pending.insert(RuleId(r));
        }
        Ok(self.finish(Vec::new(), Vec::new()))
    }

    /// Withdraws an observation and everything derived from it.
    pub fn retract_observation(
        &mut self,
        id: ObservationId,
    ) -> Result<PropagationOutcome, NetworkError> {
        let o = self.observation(id)?;
        if !o.active {
            return Err(NetworkError::AlreadyRetracted(id));
        }
        let released = self.drop_observation(id);
        self.log(EventKind::Retract {
            observation: id,
            unmasked: released.clone(),
        });
        let (cancelled, unmasked) = self.cascade(Vec::new(), released);
        Ok(self.finish(cancelled, unmasked))
    }

    /// Cancels one firing and, transitively, every firing that depended on
    /// an instantiation it produced. Does not re-propagate.
    pub fn cancel_firing(
        &mut self,
        id: FiringId,
    ) -> Result<Vec<(VariableId, Value)>, NetworkError> {
        if !self.firing(id)?.is_active() {
            return Err(NetworkError::AlreadyCancelled(id));
        }
        Ok(self.cascade(vec![id], Vec::new()).1)
    }

    fn finish(
        &mut self,
        cancelled: Vec<FiringId>,
        unmasked: Vec<(VariableId, Value)>,
    ) -> PropagationOutcome {
        let mut out = self.propagate();
        out.cancelled = cancelled;
        out.unmasked = unmasked;
        out
    }

    /// Cancels `seeds`, then every active firing whose condition on a
    /// variable is contradicted by a value that has become visible.
    fn cascade(
        &mut self,
        seeds: Vec<FiringId>,
        released: Vec<(VariableId, Value)>,
    ) -> (Vec<FiringId>, Vec<(VariableId, Value)>) {
        let mut cancelled = Vec::new();
        let mut unmasked = released.clone();
        let mut work = seeds;
        self.dependents(&released, &mut work);
        while let Some(f) = work.pop() {
            if !self.firings[f.index()].is_active() {
                continue;
            }
            let released = self.tombstone_firing(f);
            self.log(EventKind::Cancel {
                firing: f,
                unmasked: released.clone(),
            });
            cancelled.push(f);
            self.dependents(&released, &mut work);
            unmasked.extend(released);
        }
        (cancelled, unmasked)
    }

    fn dependents(&self, released: &[(VariableId, Value)], work: &mut Vec<FiringId>) {
        for &(var, value) in released {
            for &rid in &self.cond_watch[var.index()] {
                let Some(f) = self.active_firing[rid.index()] else {
                    continue;
                };
                let broken = self.rules[rid.index()]
                    .conditions
                    .iter()
                    .any(|l| l.variable == var && l.value != value);
                if broken {
                    work.push(f);
                }
            }
        }
    }

    /// Marks a firing cancelled and withdraws its mask entries. Returns the
    /// values that became visible.
    pub(crate) fn tombstone_firing(&mut self, id: FiringId) -> Vec<(VariableId, Value)> {
        let f = &mut self.firings[id.index()];
        f.status = FiringStatus::Cancelled;
        let (rule, owner) = (f.rule, f.owner);
        let effects = f.effects.clone();
        if self.active_firing[rule.index()] == Some(id) {
            self.active_firing[rule.index()] = None;
        }
        self.active_per_constraint[owner.index()] -= 1;
        let mut released = Vec::new();
        for (var, value) in effects {
            if self.unjustify(var, value, Justification::Firing(id)) {
                released.push((var, value));
            }
        }
        // Sibling rules may have been held back while this firing was active.
        let range = self.rule_ranges[owner.index()].clone();
        self.pending.extend(range.map(RuleId));
        released
    }

    /// Marks an observation inactive and withdraws its mask entries. Returns
    /// the values that became visible.
    pub(crate) fn drop_observation(&mut self, id: ObservationId) -> Vec<(VariableId, Value)> {
        let o = &mut self.observations[id.index()];
        o.active = false;
        let var = o.variable;
        let masks = std::mem::take(&mut o.masks);
        let mut released = Vec::new();
        for value in masks {
            if self.unjustify(var, value, Justification::Observation(id)) {
                released.push((var, value));
            }
        }
        released
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gates::{gate_table, GateKind};
    use crate::ValueSet;

    fn chain() -> (Network, Vec<VariableId>, Vec<ConstraintId>) {
        // A -not-> B -not-> C
        let mut n = Network::new();
        let vs: Vec<VariableId> = ["A", "B", "C"]
            .iter()
            .map(|s| n.add_bool_variable(s).unwrap())
            .collect();
        let t = gate_table(GateKind::Not, 1).unwrap();
        let g1 = n
            .add_constraint("N1", vec![vs[0], vs[1]], t.clone(), true)
            .unwrap();
        let g2 = n.add_constraint("N2", vec![vs[1], vs[2]], t, true).unwrap();
        (n, vs, vec![g1, g2])
    }

    #[test]
    fn relax_withdraws_consequences() {
        let (mut n, vs, gs) = chain();
        n.assert_observation("a", vs[0], Value::TRUE).unwrap();
        assert_eq!(
            n.visible_values(vs[2]).unwrap(),
            ValueSet::singleton(Value::TRUE)
        );
        let out = n.relax(gs[0]).unwrap();
        assert_eq!(out.cancelled.len(), 2);
        assert_eq!(n.visible_values(vs[1]).unwrap(), ValueSet::full(2));
        assert_eq!(n.visible_values(vs[2]).unwrap(), ValueSet::full(2));
        n.check_invariants().unwrap();
        assert!(matches!(
            n.relax(gs[0]),
            Err(NetworkError::AlreadyRelaxed(_))
        ));
        n.restore(gs[0]).unwrap();
        assert_eq!(
            n.visible_values(vs[2]).unwrap(),
            ValueSet::singleton(Value::TRUE)
        );
        assert!(matches!(n.restore(gs[0]), Err(NetworkError::NotRelaxed(_))));
        n.check_invariants().unwrap();
    }

    #[test]
    fn retract_withdraws_consequences() {
        let (mut n, vs, _) = chain();
        n.assert_observation("a", vs[0], Value::TRUE).unwrap();
        let o = n.observation_by_label("a").unwrap();
        n.retract_observation(o).unwrap();
        for v in &vs {
            assert_eq!(n.visible_values(*v).unwrap(), ValueSet::full(2));
        }
        assert!(matches!(
            n.retract_observation(o),
            Err(NetworkError::AlreadyRetracted(_))
        ));
        n.check_invariants().unwrap();
    }

    #[test]
    fn not_relaxable() {
        let mut n = Network::new();
        let a = n.add_bool_variable("A").unwrap();
        let b = n.add_bool_variable("B").unwrap();
        let g = n
            .add_constraint(
                "N",
                vec![a, b],
                gate_table(GateKind::Not, 1).unwrap(),
                false,
            )
            .unwrap();
        assert!(matches!(n.relax(g), Err(NetworkError::NotRelaxable(_))));
    }

    #[test]
    fn cancel_cascades_and_rejects_twice() {
        let (mut n, vs, _) = chain();
        n.assert_observation("a", vs[0], Value::TRUE).unwrap();
        let first = n.firings()[0].id;
        let unmasked = n.cancel_firing(first).unwrap();
        assert_eq!(unmasked.len(), 2);
        assert!(matches!(
            n.cancel_firing(first),
            Err(NetworkError::AlreadyCancelled(_))
        ));
        n.check_invariants().unwrap();
    }

    #[test]
    fn shared_justification_survives_partial_withdrawal() {
        let (mut n, vs, gs) = chain();
        n.assert_observation("a", vs[0], Value::TRUE).unwrap();
        n.assert_observation("b", vs[1], Value::FALSE).unwrap();
        n.relax(gs[0]).unwrap();
        // B stays pinned by its own observation, so C keeps its value.
        assert_eq!(
            n.visible_values(vs[1]).unwrap(),
            ValueSet::singleton(Value::FALSE)
        );
        assert_eq!(
            n.visible_values(vs[2]).unwrap(),
            ValueSet::singleton(Value::TRUE)
        );
        n.check_invariants().unwrap();
    }
}
