//! Core vocabulary: variables with maskable finite domains, extensional
//! constraints, compiled rules, observations, firings, and the network that
//! owns them, together with the domain-mutation primitives.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::ops::Range;

use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::compiler;
use crate::engine::PropagationOptions;
use crate::error::NetworkError;
use crate::event::{Event, EventKind};
use crate::value::{Value, ValueSet, MAX_DOMAIN_SIZE};

macro_rules! id_type {
    ($(#[$m:meta])* $name:ident) => {
        $(#[$m])*
        #[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
        #[serde(transparent)]
        pub struct $name(pub u32);

        impl $name {
            pub fn index(self) -> usize {
                self.0 as usize
            }
        }
    };
}

id_type!(VariableId);
id_type!(ConstraintId);
id_type!(
    /// Rules are numbered network-wide, grouped by owner in canonical order.
    RuleId
);
id_type!(ObservationId);
id_type!(FiringId);

/// The reason a value is masked.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(tag = "kind", content = "id", rename_all = "snake_case")]
pub enum Justification {
    Firing(FiringId),
    Observation(ObservationId),
}

impl fmt::Display for Justification {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Justification::Firing(id) => write!(f, "f{}", id.0),
            Justification::Observation(id) => write!(f, "o{}", id.0),
        }
    }
}

/// A variable's declared values plus the per-value justification multisets
/// that hide values from the visible domain.
#[derive(Debug, Clone)]
pub struct FiniteDomain {
    pub(crate) name: String,
    pub(crate) tokens: Vec<String>,
    pub(crate) masks: Vec<Vec<Justification>>,
    pub(crate) visible: ValueSet,
    /// Event sequence number at which the domain last became empty.
    pub(crate) emptied_at: Option<u64>,
}

impl FiniteDomain {
    fn new(name: String, tokens: Vec<String>) -> Self {
        let n = tokens.len();
        FiniteDomain {
            name,
            tokens,
            masks: vec![Vec::new(); n],
            visible: ValueSet::full(n),
            emptied_at: None,
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }

    pub fn size(&self) -> usize {
        self.tokens.len()
    }

    pub fn declared(&self) -> ValueSet {
        ValueSet::full(self.tokens.len())
    }

    pub fn visible(&self) -> ValueSet {
        self.visible
    }

    pub fn masked(&self) -> ValueSet {
        self.declared().difference(self.visible)
    }

    pub fn justifications(&self, value: Value) -> &[Justification] {
        &self.masks[value.index()]
    }

    pub fn token(&self, value: Value) -> &str {
        &self.tokens[value.index()]
    }

    pub fn value_of(&self, token: &str) -> Option<Value> {
        self.tokens
            .iter()
            .position(|t| t == token)
            .map(|i| Value(i as u16))
    }

    pub fn is_boolean(&self) -> bool {
        self.tokens == ["false", "true"]
    }
}

/// An n-ary relation given by its scope and allowed tuples.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExtensionalConstraint {
    pub id: ConstraintId,
    pub label: String,
    pub scope: Vec<VariableId>,
    /// Sorted and deduplicated.
    pub allowed: Vec<Vec<Value>>,
    pub active: bool,
    pub relaxable: bool,
}

impl ExtensionalConstraint {
    pub fn arity(&self) -> usize {
        self.scope.len()
    }

    pub fn position(&self, var: VariableId) -> Option<usize> {
        self.scope.iter().position(|&v| v == var)
    }
}

/// `variable = value`, holding when that value is the only one left visible.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct ConditionLiteral {
    pub variable: VariableId,
    pub value: Value,
}

/// `dom(variable) <- dom(variable) ∩ values`
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Conclusion {
    pub variable: VariableId,
    pub values: ValueSet,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PropagationRule {
    pub id: RuleId,
    pub owner: ConstraintId,
    /// Ordered by scope position.
    pub conditions: Vec<ConditionLiteral>,
    /// Ordered by scope position.
    pub conclusions: Vec<Conclusion>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Observation {
    pub id: ObservationId,
    pub label: String,
    pub variable: VariableId,
    pub value: Value,
    pub active: bool,
    /// Values this observation justifies the masking of.
    pub(crate) masks: Vec<Value>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FiringStatus {
    Active,
    Cancelled,
}

/// One firing of a rule: the instantiations it consumed and the mask
/// entries it produced.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Firing {
    pub id: FiringId,
    pub rule: RuleId,
    pub owner: ConstraintId,
    /// For each condition, the justifications masking the other values of
    /// its variable at firing time.
    pub supports: Vec<(ConditionLiteral, Vec<Justification>)>,
    pub effects: Vec<(VariableId, Value)>,
    pub status: FiringStatus,
}

impl Firing {
    pub fn is_active(&self) -> bool {
        self.status == FiringStatus::Active
    }
}

/// What a mutation did to the visible domains.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ChangeRecord {
    pub masked: Vec<(VariableId, Value)>,
    pub unmasked: Vec<(VariableId, Value)>,
    pub emptied: Vec<VariableId>,
}

impl ChangeRecord {
    pub fn is_empty(&self) -> bool {
        self.masked.is_empty() && self.unmasked.is_empty()
    }

    /// True when the mutation left some variable without visible values.
    pub fn empty_domain(&self) -> bool {
        !self.emptied.is_empty()
    }

    pub fn absorb(&mut self, other: ChangeRecord) {
        self.masked.extend(other.masked);
        self.unmasked.extend(other.unmasked);
        self.emptied.extend(other.emptied);
    }
}

/// Tombstone on a rule of a relaxed constraint; such rules never fire.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CancellationMarker {
    pub rule: RuleId,
    /// Sequence number of the relax event that placed the marker.
    pub origin: u64,
}

/// Comparable snapshot of everything that replay must reproduce.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NetworkState {
    pub visible: Vec<ValueSet>,
    pub masks: Vec<Vec<Vec<Justification>>>,
    pub firings: Vec<(RuleId, FiringStatus, Vec<(VariableId, Value)>)>,
    pub constraints_active: Vec<bool>,
    pub observations_active: Vec<bool>,
}

/// Variables, constraints with their compiled rules, observations, the
/// firing log and the event log.
///
/// A network is a single-writer value: every mutating operation takes
/// `&mut self`.
#[derive(Debug, Clone)]
pub struct Network {
    pub(crate) domains: Vec<FiniteDomain>,
    pub(crate) constraints: Vec<ExtensionalConstraint>,
    pub(crate) rules: Vec<PropagationRule>,
    pub(crate) rule_ranges: Vec<Range<u32>>,
    pub(crate) observations: Vec<Observation>,
    pub(crate) firings: Vec<Firing>,
    pub(crate) active_firing: Vec<Option<FiringId>>,
    pub(crate) active_per_constraint: Vec<u32>,
    /// Rules mentioning a variable in a condition or conclusion.
    pub(crate) watch: Vec<Vec<RuleId>>,
    /// Rules with a condition on a variable.
    pub(crate) cond_watch: Vec<Vec<RuleId>>,
    /// Rules to re-examine at the next propagation round.
    pub(crate) pending: BTreeSet<RuleId>,
    pub(crate) markers: BTreeMap<RuleId, CancellationMarker>,
    pub(crate) events: Vec<Event>,
    pub(crate) options: PropagationOptions,
    pub(crate) rng: Option<ChaCha8Rng>,
    var_names: HashMap<String, VariableId>,
    constraint_names: HashMap<String, ConstraintId>,
    observation_names: HashMap<String, ObservationId>,
    /// Variables that are both a gate output and an input elsewhere.
    pub(crate) internal: BTreeSet<VariableId>,
}

impl Default for Network {
    fn default() -> Self {
        Network::new()
    }
}

impl Network {
    pub fn new() -> Self {
        Network {
            domains: Vec::new(),
            constraints: Vec::new(),
            rules: Vec::new(),
            rule_ranges: Vec::new(),
            observations: Vec::new(),
            firings: Vec::new(),
            active_firing: Vec::new(),
            active_per_constraint: Vec::new(),
            watch: Vec::new(),
            cond_watch: Vec::new(),
            pending: BTreeSet::new(),
            markers: BTreeMap::new(),
            events: Vec::new(),
            options: PropagationOptions::default(),
            rng: None,
            var_names: HashMap::new(),
            constraint_names: HashMap::new(),
            observation_names: HashMap::new(),
            internal: BTreeSet::new(),
        }
    }

    pub fn add_variable<S: Into<String>>(
        &mut self,
        name: &str,
        tokens: impl IntoIterator<Item = S>,
    ) -> Result<VariableId, NetworkError> {
        let tokens: Vec<String> = tokens.into_iter().map(Into::into).collect();
        let distinct: BTreeSet<&String> = tokens.iter().collect();
        if tokens.is_empty() || tokens.len() > MAX_DOMAIN_SIZE || distinct.len() != tokens.len() {
            return Err(NetworkError::BadDomain(name.to_string()));
        }
        if self.var_names.contains_key(name) {
            return Err(NetworkError::DuplicateName(name.to_string()));
        }
        let id = VariableId(self.domains.len() as u32);
        self.domains
            .push(FiniteDomain::new(name.to_string(), tokens));
        self.watch.push(Vec::new());
        self.cond_watch.push(Vec::new());
        self.var_names.insert(name.to_string(), id);
        Ok(id)
    }

    pub fn add_bool_variable(&mut self, name: &str) -> Result<VariableId, NetworkError> {
        self.add_variable(name, ["false", "true"])
    }

    /// Adds a constraint and compiles it into its rule set. The new rules are
    /// examined at the next propagation.
    pub fn add_constraint(
        &mut self,
        label: &str,
        scope: Vec<VariableId>,
        allowed: Vec<Vec<Value>>,
        relaxable: bool,
    ) -> Result<ConstraintId, NetworkError> {
        if self.constraint_names.contains_key(label) {
            return Err(NetworkError::DuplicateName(label.to_string()));
        }
        let distinct: BTreeSet<_> = scope.iter().collect();
        if scope.is_empty() || distinct.len() != scope.len() {
            return Err(NetworkError::BadScope(label.to_string()));
        }
        for &v in &scope {
            self.domain(v)?;
        }
        for t in &allowed {
            if t.len() != scope.len() {
                return Err(NetworkError::TupleArity {
                    label: label.to_string(),
                    expected: scope.len(),
                    found: t.len(),
                });
            }
            for (&v, &val) in scope.iter().zip(t) {
                self.check_value(v, val)?;
            }
        }
        let mut allowed = allowed;
        allowed.sort();
        allowed.dedup();
        if allowed.is_empty() {
            return Err(NetworkError::EmptyRelation(label.to_string()));
        }
        let id = ConstraintId(self.constraints.len() as u32);
        let constraint = ExtensionalConstraint {
            id,
            label: label.to_string(),
            scope,
            allowed,
            active: true,
            relaxable,
        };
        let sizes: Vec<usize> = constraint
            .scope
            .iter()
            .map(|v| self.domains[v.index()].size())
            .collect();
        let ruleset = compiler::generate(&constraint, &sizes).expect("constraint validated above");
        let start = self.rules.len() as u32;
        for mut rule in ruleset.rules {
            rule.id = RuleId(self.rules.len() as u32);
            let mut touched = BTreeSet::new();
            for c in &rule.conditions {
                self.cond_watch[c.variable.index()].push(rule.id);
                touched.insert(c.variable);
            }
            touched.extend(rule.conclusions.iter().map(|c| c.variable));
            for v in touched {
                self.watch[v.index()].push(rule.id);
            }
            self.pending.insert(rule.id);
            self.rules.push(rule);
            self.active_firing.push(None);
        }
        self.rule_ranges.push(start..self.rules.len() as u32);
        self.active_per_constraint.push(0);
        self.constraints.push(constraint);
        self.constraint_names.insert(label.to_string(), id);
        Ok(id)
    }

    /// Marks a variable as internal (not directly measurable). Observations
    /// on internal variables are allowed and flagged in traces.
    pub fn mark_internal(&mut self, var: VariableId) {
        self.internal.insert(var);
    }

    pub fn is_internal(&self, var: VariableId) -> bool {
        self.internal.contains(&var)
    }

    pub fn variable_count(&self) -> usize {
        self.domains.len()
    }

    pub fn variables(&self) -> impl Iterator<Item = VariableId> {
        (0..self.domains.len() as u32).map(VariableId)
    }

    pub fn domain(&self, var: VariableId) -> Result<&FiniteDomain, NetworkError> {
        self.domains
            .get(var.index())
            .ok_or(NetworkError::UnknownVariable(var))
    }

    pub fn variable_by_name(&self, name: &str) -> Result<VariableId, NetworkError> {
        self.var_names
            .get(name)
            .copied()
            .ok_or_else(|| NetworkError::UnknownVariableName(name.to_string()))
    }

    pub fn value_by_token(&self, var: VariableId, token: &str) -> Result<Value, NetworkError> {
        let d = self.domain(var)?;
        d.value_of(token).ok_or_else(|| NetworkError::UnknownToken {
            variable: d.name.clone(),
            token: token.to_string(),
        })
    }

    pub fn constraint(&self, id: ConstraintId) -> Result<&ExtensionalConstraint, NetworkError> {
        self.constraints
            .get(id.index())
            .ok_or(NetworkError::UnknownConstraint(id))
    }

    pub fn constraints(&self) -> &[ExtensionalConstraint] {
        &self.constraints
    }

    pub fn constraint_by_label(&self, label: &str) -> Result<ConstraintId, NetworkError> {
        self.constraint_names
            .get(label)
            .copied()
            .ok_or_else(|| NetworkError::UnknownConstraintName(label.to_string()))
    }

    pub fn rule(&self, id: RuleId) -> Result<&PropagationRule, NetworkError> {
        self.rules
            .get(id.index())
            .ok_or(NetworkError::UnknownRule(id))
    }

    /// The compiled rules of a constraint, in canonical order.
    pub fn rules_of(&self, id: ConstraintId) -> Result<&[PropagationRule], NetworkError> {
        let r = self
            .rule_ranges
            .get(id.index())
            .ok_or(NetworkError::UnknownConstraint(id))?;
        Ok(&self.rules[r.start as usize..r.end as usize])
    }

    /// 0-based position of a rule in its constraint's canonical listing.
    pub fn rule_ordinal(&self, rule: RuleId) -> u32 {
        let owner = self.rules[rule.index()].owner;
        rule.0 - self.rule_ranges[owner.index()].start
    }

    pub fn observation(&self, id: ObservationId) -> Result<&Observation, NetworkError> {
        self.observations
            .get(id.index())
            .ok_or(NetworkError::UnknownObservation(id))
    }

    pub fn observations(&self) -> &[Observation] {
        &self.observations
    }

    pub fn observation_by_label(&self, label: &str) -> Option<ObservationId> {
        self.observation_names.get(label).copied()
    }

    pub(crate) fn register_observation(
        &mut self,
        label: &str,
        variable: VariableId,
        value: Value,
    ) -> ObservationId {
        let id = ObservationId(self.observations.len() as u32);
        self.observations.push(Observation {
            id,
            label: label.to_string(),
            variable,
            value,
            active: true,
            masks: Vec::new(),
        });
        self.observation_names.insert(label.to_string(), id);
        id
    }

    pub fn firing(&self, id: FiringId) -> Result<&Firing, NetworkError> {
        self.firings
            .get(id.index())
            .ok_or(NetworkError::UnknownFiring(id))
    }

    pub fn firings(&self) -> &[Firing] {
        &self.firings
    }

    pub fn active_firing_of(&self, rule: RuleId) -> Option<FiringId> {
        self.active_firing.get(rule.index()).copied().flatten()
    }

    pub fn events(&self) -> &[Event] {
        &self.events
    }

    pub fn marker(&self, rule: RuleId) -> Option<&CancellationMarker> {
        self.markers.get(&rule)
    }

    pub(crate) fn next_seq(&self) -> u64 {
        self.events.len() as u64
    }

    pub(crate) fn log(&mut self, kind: EventKind) -> u64 {
        let seq = self.next_seq();
        self.events.push(Event { seq, kind });
        seq
    }

    fn check_value(&self, var: VariableId, value: Value) -> Result<(), NetworkError> {
        let d = self.domain(var)?;
        if value.index() >= d.size() {
            return Err(NetworkError::ValueOutsideDomain {
                variable: d.name.clone(),
                value: value.0,
            });
        }
        Ok(())
    }

    fn cause_active(&self, cause: Justification) -> bool {
        match cause {
            Justification::Firing(f) => self.firings.get(f.index()).is_some_and(Firing::is_active),
            Justification::Observation(o) => {
                self.observations.get(o.index()).is_some_and(|o| o.active)
            }
        }
    }

    /// Visible values of a variable: declared minus masked.
    pub fn visible_values(&self, var: VariableId) -> Result<ValueSet, NetworkError> {
        Ok(self.domain(var)?.visible)
    }

    /// True iff `value` is the only visible value of `var`.
    pub fn is_instantiated(&self, var: VariableId, value: Value) -> Result<bool, NetworkError> {
        Ok(self.domain(var)?.visible == ValueSet::singleton(value))
    }

    /// Monotone form of a condition test used by the engine: every value
    /// other than `value` is masked. Coincides with [`Network::is_instantiated`]
    /// unless the domain is empty.
    pub(crate) fn condition_holds(&self, lit: ConditionLiteral) -> bool {
        self.domains[lit.variable.index()]
            .visible
            .is_subset(ValueSet::singleton(lit.value))
    }

    /// Variables whose visible domain is empty.
    pub fn empty_variables(&self) -> Vec<VariableId> {
        self.variables()
            .filter(|v| self.domains[v.index()].visible.is_empty())
            .collect()
    }

    /// `dom(var) <- dom(var) ∩ allowed`: every visible value outside
    /// `allowed` gains a mask justified by `cause`.
    pub fn restrict(
        &mut self,
        var: VariableId,
        allowed: ValueSet,
        cause: Justification,
    ) -> Result<ChangeRecord, NetworkError> {
        let d = self.domain(var)?;
        if !allowed.is_subset(d.declared()) {
            let bad = allowed
                .difference(d.declared())
                .iter()
                .next()
                .unwrap_or(Value(0));
            return Err(NetworkError::ValueOutsideDomain {
                variable: d.name.clone(),
                value: bad.0,
            });
        }
        if !self.cause_active(cause) {
            return Err(NetworkError::InactiveCause(cause.to_string()));
        }
        let values = d.visible.difference(allowed);
        Ok(self.add_masks(var, values, cause))
    }

    /// Adds `cause` to the justification multiset of each value in `values`,
    /// records it as an effect of the cause and logs a mask event.
    pub(crate) fn add_masks(
        &mut self,
        var: VariableId,
        values: ValueSet,
        cause: Justification,
    ) -> ChangeRecord {
        self.add_masks_at(var, values, cause, None)
    }

    /// As [`Network::add_masks`]; an emptied domain is dated `stamp` instead
    /// of the mask event's own sequence number.
    pub(crate) fn add_masks_at(
        &mut self,
        var: VariableId,
        values: ValueSet,
        cause: Justification,
        stamp: Option<u64>,
    ) -> ChangeRecord {
        if values.is_empty() {
            return ChangeRecord::default();
        }
        let seq = self.log(EventKind::Mask {
            variable: var,
            values: values.iter().collect(),
            cause,
            stamp: stamp.unwrap_or(self.next_seq()),
        });
        self.apply_masks(var, values, cause, stamp.unwrap_or(seq))
    }

    pub(crate) fn apply_masks(
        &mut self,
        var: VariableId,
        values: ValueSet,
        cause: Justification,
        seq: u64,
    ) -> ChangeRecord {
        let mut rec = ChangeRecord::default();
        let d = &mut self.domains[var.index()];
        let was_empty = d.visible.is_empty();
        for v in values.iter() {
            d.masks[v.index()].push(cause);
            if d.visible.contains(v) {
                d.visible.remove(v);
                rec.masked.push((var, v));
            }
        }
        if !was_empty && d.visible.is_empty() {
            d.emptied_at = Some(seq);
            rec.emptied.push(var);
        }
        match cause {
            Justification::Firing(f) => self.firings[f.index()]
                .effects
                .extend(values.iter().map(|v| (var, v))),
            Justification::Observation(o) => {
                self.observations[o.index()].masks.extend(values.iter())
            }
        }
        if !rec.masked.is_empty() {
            self.touch(var);
        }
        rec
    }

    /// Removes one `cause` justification from `(var, value)`; returns whether
    /// the value became visible.
    pub fn release(
        &mut self,
        var: VariableId,
        value: Value,
        cause: Justification,
    ) -> Result<bool, NetworkError> {
        self.check_value(var, value)?;
        if !self.domains[var.index()].masks[value.index()].contains(&cause) {
            return Err(NetworkError::NoSuchJustification {
                variable: var,
                value,
                cause: cause.to_string(),
            });
        }
        self.log(EventKind::Unmask {
            variable: var,
            value,
            cause,
        });
        Ok(self.apply_unmask(var, value, cause))
    }

    pub(crate) fn apply_unmask(
        &mut self,
        var: VariableId,
        value: Value,
        cause: Justification,
    ) -> bool {
        match cause {
            Justification::Firing(f) => {
                let eff = &mut self.firings[f.index()].effects;
                if let Some(i) = eff.iter().position(|&e| e == (var, value)) {
                    eff.remove(i);
                }
            }
            Justification::Observation(o) => {
                let m = &mut self.observations[o.index()].masks;
                if let Some(i) = m.iter().position(|&v| v == value) {
                    m.remove(i);
                }
            }
        }
        self.unjustify(var, value, cause)
    }

    /// Drops one occurrence of `cause` from the multiset without logging.
    pub(crate) fn unjustify(
        &mut self,
        var: VariableId,
        value: Value,
        cause: Justification,
    ) -> bool {
        let d = &mut self.domains[var.index()];
        let m = &mut d.masks[value.index()];
        let Some(i) = m.iter().position(|&j| j == cause) else {
            return false;
        };
        m.swap_remove(i);
        if m.is_empty() {
            d.visible.insert(value);
            d.emptied_at = None;
            self.touch(var);
            true
        } else {
            false
        }
    }

    pub(crate) fn touch(&mut self, var: VariableId) {
        let Network { watch, pending, .. } = self;
        pending.extend(watch[var.index()].iter().copied());
    }

    /// Snapshot of the replayable state.
    pub fn state(&self) -> NetworkState {
        let canon = |m: &Vec<Justification>| {
            let mut m = m.clone();
            m.sort();
            m
        };
        NetworkState {
            visible: self.domains.iter().map(|d| d.visible).collect(),
            masks: self
                .domains
                .iter()
                .map(|d| d.masks.iter().map(canon).collect())
                .collect(),
            firings: self
                .firings
                .iter()
                .map(|f| {
                    let mut e = f.effects.clone();
                    e.sort();
                    (f.rule, f.status, e)
                })
                .collect(),
            constraints_active: self.constraints.iter().map(|c| c.active).collect(),
            observations_active: self.observations.iter().map(|o| o.active).collect(),
        }
    }

    /// Visible domains as token lists, keyed by variable name.
    pub fn visible_tokens(&self) -> BTreeMap<String, Vec<String>> {
        self.domains
            .iter()
            .map(|d| {
                (
                    d.name.clone(),
                    d.visible.iter().map(|v| d.token(v).to_string()).collect(),
                )
            })
            .collect()
    }

    /// Formats a value of a variable.
    pub fn token(&self, var: VariableId, value: Value) -> &str {
        self.domains[var.index()].token(value)
    }

    pub fn variable_name(&self, var: VariableId) -> &str {
        &self.domains[var.index()].name
    }

    /// Checks the mask-conservation and justification-integrity invariants.
    pub fn check_invariants(&self) -> Result<(), String> {
        for d in &self.domains {
            for v in d.declared().iter() {
                let masked = !d.masks[v.index()].is_empty();
                if masked == d.visible.contains(v) {
                    return Err(format!(
                        "{}: value {} visible/masked mismatch",
                        d.name,
                        d.token(v)
                    ));
                }
                for j in &d.masks[v.index()] {
                    if !self.cause_active(*j) {
                        return Err(format!(
                            "{}: value {} justified by inactive {}",
                            d.name,
                            d.token(v),
                            j
                        ));
                    }
                }
            }
        }
        for (i, r) in self.rules.iter().enumerate() {
            if let Some(f) = self.active_firing[i] {
                if !self.firings[f.index()].is_active() || self.firings[f.index()].rule != r.id {
                    return Err(format!("rule {i} points at a stale firing"));
                }
            }
        }
        Ok(())
    }
}
