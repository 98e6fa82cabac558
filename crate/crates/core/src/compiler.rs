//! Compilation of extensional constraints into ground propagation rules.
//!
//! A rule `IF v1=x1 AND ... THEN w in S` fires when each condition variable
//! is reduced to its literal value and intersects the domain of `w` with `S`.
//! [`generate`] enumerates candidate conditions by increasing size and keeps
//! a candidate only when the rules already emitted cannot derive its
//! conclusions by chaining, which yields a sound, complete and irredundant
//! rule set for the constraint.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use rand::seq::SliceRandom;
use rand::Rng;

use crate::domain::{Conclusion, ConditionLiteral, ExtensionalConstraint, PropagationRule};
use crate::error::CompileError;
use crate::{ConstraintId, RuleId, Value, ValueSet, VariableId};

/// A partial assignment of scope variables.
pub type Assignment = BTreeMap<VariableId, Value>;

/// The rules compiled from one constraint, in canonical order: ascending
/// condition count, then lexicographic on (scope position, value index).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RuleSet {
    pub owner: ConstraintId,
    pub rules: Vec<PropagationRule>,
}

impl RuleSet {
    pub fn len(&self) -> usize {
        self.rules.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rules.is_empty()
    }
}

/// Position-indexed rule used by the compiler internals.
#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) struct LocalRule {
    pub conds: Vec<(usize, Value)>,
    pub concls: Vec<(usize, ValueSet)>,
}

fn check_sizes(c: &ExtensionalConstraint, sizes: &[usize]) -> Result<(), CompileError> {
    if sizes.len() != c.arity() {
        return Err(CompileError::DomainCount {
            expected: c.arity(),
            found: sizes.len(),
        });
    }
    Ok(())
}

fn local_partial(
    c: &ExtensionalConstraint,
    sizes: &[usize],
    partial: &Assignment,
) -> Result<Vec<Option<Value>>, CompileError> {
    let mut out = vec![None; c.arity()];
    for (&var, &val) in partial {
        let p = c.position(var).ok_or(CompileError::OutsideScope(var))?;
        if val.index() >= sizes[p] {
            return Err(CompileError::OutsideDomain {
                variable: var,
                value: val,
            });
        }
        out[p] = Some(val);
    }
    Ok(out)
}

fn agrees(tuple: &[Value], partial: &[Option<Value>]) -> bool {
    tuple
        .iter()
        .zip(partial)
        .all(|(t, p)| p.is_none_or(|p| p == *t))
}

pub(crate) fn project_local(
    tuples: &[Vec<Value>],
    partial: &[Option<Value>],
    target: usize,
) -> ValueSet {
    tuples
        .iter()
        .filter(|t| agrees(t, partial))
        .map(|t| t[target])
        .collect()
}

/// Values `target` takes among the allowed tuples agreeing with `partial`.
/// Empty iff `partial` is inconsistent with the constraint.
pub fn projection(
    c: &ExtensionalConstraint,
    sizes: &[usize],
    partial: &Assignment,
    target: VariableId,
) -> Result<ValueSet, CompileError> {
    check_sizes(c, sizes)?;
    let local = local_partial(c, sizes, partial)?;
    let t = c
        .position(target)
        .ok_or(CompileError::OutsideScope(target))?;
    if local[t].is_some() {
        return Err(CompileError::TargetAssigned(target));
    }
    Ok(project_local(&c.allowed, &local, t))
}

/// Fixpoint of `rules` from the pinned start values, in rule order.
pub(crate) fn closure_local(
    rules: &[LocalRule],
    sizes: &[usize],
    start: &[Option<Value>],
) -> Vec<ValueSet> {
    let mut dom: Vec<ValueSet> = sizes
        .iter()
        .zip(start)
        .map(|(&n, s)| s.map_or(ValueSet::full(n), ValueSet::singleton))
        .collect();
    loop {
        let mut changed = false;
        for r in rules {
            if fire_local(r, &mut dom) {
                changed = true;
            }
        }
        if !changed {
            return dom;
        }
    }
}

fn applicable_local(r: &LocalRule, dom: &[ValueSet]) -> bool {
    r.conds
        .iter()
        .all(|&(p, x)| dom[p].is_subset(ValueSet::singleton(x)))
        && r.concls.iter().any(|&(p, s)| !dom[p].is_subset(s))
}

fn fire_local(r: &LocalRule, dom: &mut [ValueSet]) -> bool {
    if !applicable_local(r, dom) {
        return false;
    }
    for &(p, s) in &r.concls {
        dom[p] = dom[p].intersection(s);
    }
    true
}

/// Like [`closure_local`] but fires one applicable rule at a time, chosen
/// uniformly at random.
pub(crate) fn closure_local_random<R: Rng>(
    rules: &[LocalRule],
    sizes: &[usize],
    start: &[Option<Value>],
    rng: &mut R,
) -> Vec<ValueSet> {
    let mut dom: Vec<ValueSet> = sizes
        .iter()
        .zip(start)
        .map(|(&n, s)| s.map_or(ValueSet::full(n), ValueSet::singleton))
        .collect();
    let mut order: Vec<usize> = (0..rules.len()).collect();
    loop {
        order.shuffle(rng);
        match order.iter().find(|&&i| applicable_local(&rules[i], &dom)) {
            Some(&i) => {
                fire_local(&rules[i], &mut dom);
            }
            None => return dom,
        }
    }
}

/// All partial assignments over `sizes`, by increasing size then
/// lexicographic on (position, value).
pub(crate) fn candidates(sizes: &[usize]) -> Vec<Vec<(usize, Value)>> {
    let n = sizes.len();
    let mut all: Vec<Vec<(usize, Value)>> = Vec::new();
    let mut stack: Vec<(usize, Vec<(usize, Value)>)> = vec![(0, Vec::new())];
    while let Some((next, cur)) = stack.pop() {
        for p in next..n {
            for v in 0..sizes[p] {
                let mut c = cur.clone();
                c.push((p, Value(v as u16)));
                stack.push((p + 1, c));
            }
        }
        all.push(cur);
    }
    all.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
    all
}

pub(crate) fn to_partial(n: usize, cand: &[(usize, Value)]) -> Vec<Option<Value>> {
    let mut out = vec![None; n];
    for &(p, v) in cand {
        out[p] = Some(v);
    }
    out
}

pub(crate) fn generate_local(tuples: &[Vec<Value>], sizes: &[usize]) -> Vec<LocalRule> {
    let n = sizes.len();
    let mut emitted: Vec<LocalRule> = Vec::new();
    for cand in candidates(sizes) {
        let partial = to_partial(n, &cand);
        let supported: Vec<&Vec<Value>> = tuples.iter().filter(|t| agrees(t, &partial)).collect();
        if supported.is_empty() {
            continue;
        }
        let concls: Vec<(usize, ValueSet)> = (0..n)
            .filter(|&p| partial[p].is_none())
            .filter_map(|p| {
                let proj: ValueSet = supported.iter().map(|t| t[p]).collect();
                (proj != ValueSet::full(sizes[p])).then_some((p, proj))
            })
            .collect();
        if concls.is_empty() {
            continue;
        }
        let derived = closure_local(&emitted, sizes, &partial);
        if concls.iter().all(|&(p, s)| derived[p].is_subset(s)) {
            continue;
        }
        emitted.push(LocalRule {
            conds: cand,
            concls,
        });
    }
    // A rule emitted later with a condition of the same size can make an
    // earlier one derivable. Drop such rules, last first.
    let mut i = emitted.len();
    while i > 0 {
        i -= 1;
        let r = emitted.remove(i);
        let derived = closure_local(&emitted, sizes, &to_partial(n, &r.conds));
        if !r.concls.iter().all(|&(p, s)| derived[p].is_subset(s)) {
            emitted.insert(i, r);
        }
    }
    emitted
}

/// Compiles a constraint into its canonical rule set. `sizes` gives the
/// declared domain size of each scope variable, in scope order. Rule ids are
/// numbered from 0 within the set.
pub fn generate(c: &ExtensionalConstraint, sizes: &[usize]) -> Result<RuleSet, CompileError> {
    check_sizes(c, sizes)?;
    if c.allowed.is_empty() {
        return Err(CompileError::EmptyRelation);
    }
    let rules = generate_local(&c.allowed, sizes)
        .into_iter()
        .enumerate()
        .map(|(i, r)| globalize(c, RuleId(i as u32), &r))
        .collect();
    Ok(RuleSet { owner: c.id, rules })
}

fn globalize(c: &ExtensionalConstraint, id: RuleId, r: &LocalRule) -> PropagationRule {
    PropagationRule {
        id,
        owner: c.id,
        conditions: r
            .conds
            .iter()
            .map(|&(p, value)| ConditionLiteral {
                variable: c.scope[p],
                value,
            })
            .collect(),
        conclusions: r
            .concls
            .iter()
            .map(|&(p, values)| Conclusion {
                variable: c.scope[p],
                values,
            })
            .collect(),
    }
}

/// Position-indexed view of network rules over a constraint's scope. Rules
/// mentioning variables outside the scope are rejected.
pub(crate) fn localize(
    c: &ExtensionalConstraint,
    rules: &[PropagationRule],
) -> Result<Vec<LocalRule>, CompileError> {
    rules
        .iter()
        .map(|r| {
            let conds = r
                .conditions
                .iter()
                .map(|l| {
                    c.position(l.variable)
                        .map(|p| (p, l.value))
                        .ok_or(CompileError::OutsideScope(l.variable))
                })
                .collect::<Result<_, _>>()?;
            let concls = r
                .conclusions
                .iter()
                .map(|k| {
                    c.position(k.variable)
                        .map(|p| (p, k.values))
                        .ok_or(CompileError::OutsideScope(k.variable))
                })
                .collect::<Result<_, _>>()?;
            Ok(LocalRule { conds, concls })
        })
        .collect()
}

/// Fires `rules` to a fixpoint starting from `start` pinned to singletons
/// and every other variable at its full declared domain.
pub fn closure(
    rules: &[PropagationRule],
    start: &Assignment,
    domains: &BTreeMap<VariableId, usize>,
) -> BTreeMap<VariableId, ValueSet> {
    let mut dom: BTreeMap<VariableId, ValueSet> = domains
        .iter()
        .map(|(&v, &n)| {
            (
                v,
                start
                    .get(&v)
                    .map_or(ValueSet::full(n), |&x| ValueSet::singleton(x)),
            )
        })
        .collect();
    loop {
        let mut changed = false;
        for r in rules {
            let holds = r.conditions.iter().all(|l| {
                dom.get(&l.variable)
                    .is_some_and(|d| d.is_subset(ValueSet::singleton(l.value)))
            });
            if !holds {
                continue;
            }
            for k in &r.conclusions {
                if let Some(d) = dom.get_mut(&k.variable) {
                    let nd = d.intersection(k.values);
                    if nd != *d {
                        *d = nd;
                        changed = true;
                    }
                }
            }
        }
        if !changed {
            return dom;
        }
    }
}

/// Writes rules in the dump format:
/// `Rk: IF v1=x1 AND v2=x2 THEN v3 in {a,b}; v4 in {c}`.
pub fn dump_rules<'a>(
    rules: &[PropagationRule],
    name: impl Fn(VariableId) -> &'a str,
    token: impl Fn(VariableId, Value) -> &'a str,
) -> String {
    let mut out = String::new();
    for (k, r) in rules.iter().enumerate() {
        let conds: Vec<String> = r
            .conditions
            .iter()
            .map(|l| format!("{}={}", name(l.variable), token(l.variable, l.value)))
            .collect();
        let concls: Vec<String> = r
            .conclusions
            .iter()
            .map(|c| {
                let vals: Vec<&str> = c.values.iter().map(|v| token(c.variable, v)).collect();
                format!("{} in {{{}}}", name(c.variable), vals.join(","))
            })
            .collect();
        let cond = if conds.is_empty() {
            "*".to_string()
        } else {
            conds.join(" AND ")
        };
        let _ = writeln!(out, "R{}: IF {} THEN {}", k + 1, cond, concls.join("; "));
    }
    out
}
