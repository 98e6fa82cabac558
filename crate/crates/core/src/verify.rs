//! Exhaustive checks of a rule set against its constraint: semantic
//! equivalence (cr1), soundness (cr2), order independence (cr3) and
//! minimality (cr4).

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::compiler::{
    candidates, closure_local, closure_local_random, localize, project_local, to_partial, LocalRule,
};
use crate::domain::{ExtensionalConstraint, Network, PropagationRule};
use crate::error::{CompileError, NetworkError};
use crate::{RuleId, Value, ValueSet};

/// Number of shuffled firing orders tried for cr3.
pub const CONFLUENCE_ORDERS: usize = 10;

/// A scope-ordered partial assignment; `None` leaves the variable free.
pub type LocalAssignment = Vec<Option<Value>>;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Cr1Witness {
    pub assignment: LocalAssignment,
    /// Expected visible set per scope position.
    pub expected: Vec<ValueSet>,
    pub derived: Vec<ValueSet>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Cr2Witness {
    pub rule: RuleId,
    /// An allowed tuple the rule would prune.
    pub tuple: Vec<Value>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Cr3Witness {
    pub assignment: LocalAssignment,
    pub first: Vec<ValueSet>,
    pub second: Vec<ValueSet>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct VerificationReport {
    pub cr1: Option<Cr1Witness>,
    pub cr2: Option<Cr2Witness>,
    pub cr3: Option<Cr3Witness>,
    /// A rule whose conclusions the others already derive.
    pub cr4: Option<RuleId>,
}

impl VerificationReport {
    pub fn cr1_pass(&self) -> bool {
        self.cr1.is_none()
    }
    pub fn cr2_pass(&self) -> bool {
        self.cr2.is_none()
    }
    pub fn cr3_pass(&self) -> bool {
        self.cr3.is_none()
    }
    pub fn cr4_pass(&self) -> bool {
        self.cr4.is_none()
    }
    pub fn passed(&self) -> bool {
        self.cr1_pass() && self.cr2_pass() && self.cr3_pass() && self.cr4_pass()
    }
}

/// Checks `rules` against `constraint` whose scope variables have the given
/// declared domain sizes. `seed` drives the shuffled orders of cr3.
pub fn verify_rules(
    rules: &[PropagationRule],
    constraint: &ExtensionalConstraint,
    sizes: &[usize],
    seed: u64,
) -> Result<VerificationReport, CompileError> {
    if sizes.len() != constraint.arity() {
        return Err(CompileError::DomainCount {
            expected: constraint.arity(),
            found: sizes.len(),
        });
    }
    let local = localize(constraint, rules)?;
    let tuples = &constraint.allowed;
    Ok(VerificationReport {
        cr1: check_cr1(&local, tuples, sizes),
        cr2: check_cr2(&local, rules, tuples),
        cr3: check_cr3(&local, sizes, seed),
        cr4: check_cr4(&local, rules, sizes),
    })
}

/// Only the cr1 and cr4 parts of [`verify_rules`]: the checks that detect a
/// missing rule.
pub fn verify_coverage(
    rules: &[PropagationRule],
    constraint: &ExtensionalConstraint,
    sizes: &[usize],
) -> Result<(Option<Cr1Witness>, Option<RuleId>), CompileError> {
    if sizes.len() != constraint.arity() {
        return Err(CompileError::DomainCount {
            expected: constraint.arity(),
            found: sizes.len(),
        });
    }
    let local = localize(constraint, rules)?;
    Ok((
        check_cr1(&local, &constraint.allowed, sizes),
        check_cr4(&local, rules, sizes),
    ))
}

fn all_full(sizes: &[usize]) -> Vec<Vec<Value>> {
    let mut out = vec![Vec::new()];
    for &n in sizes {
        out = out
            .into_iter()
            .flat_map(|t| {
                (0..n).map(move |v| {
                    let mut t = t.clone();
                    t.push(Value(v as u16));
                    t
                })
            })
            .collect();
    }
    out
}

fn check_cr1(rules: &[LocalRule], tuples: &[Vec<Value>], sizes: &[usize]) -> Option<Cr1Witness> {
    let n = sizes.len();
    for cand in candidates(sizes) {
        let partial = to_partial(n, &cand);
        let supported = tuples.iter().any(|t| {
            t.iter()
                .zip(&partial)
                .all(|(v, p)| p.is_none_or(|p| p == *v))
        });
        if !supported {
            continue;
        }
        let expected: Vec<ValueSet> = (0..n)
            .map(|p| match partial[p] {
                Some(x) => ValueSet::singleton(x),
                None => project_local(tuples, &partial, p),
            })
            .collect();
        let derived = closure_local(rules, sizes, &partial);
        if derived != expected {
            return Some(Cr1Witness {
                assignment: partial,
                expected,
                derived,
            });
        }
    }
    for full in all_full(sizes) {
        if tuples.contains(&full) {
            continue;
        }
        let partial: LocalAssignment = full.iter().map(|&v| Some(v)).collect();
        let derived = closure_local(rules, sizes, &partial);
        if !derived.iter().any(|d| d.is_empty()) {
            return Some(Cr1Witness {
                expected: vec![ValueSet::EMPTY; n],
                assignment: partial,
                derived,
            });
        }
    }
    None
}

fn check_cr2(
    rules: &[LocalRule],
    ids: &[PropagationRule],
    tuples: &[Vec<Value>],
) -> Option<Cr2Witness> {
    for (r, g) in rules.iter().zip(ids) {
        for t in tuples {
            let agrees = r.conds.iter().all(|&(p, x)| t[p] == x);
            if agrees && r.concls.iter().any(|&(p, s)| !s.contains(t[p])) {
                return Some(Cr2Witness {
                    rule: g.id,
                    tuple: t.clone(),
                });
            }
        }
    }
    None
}

fn check_cr3(rules: &[LocalRule], sizes: &[usize], seed: u64) -> Option<Cr3Witness> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = sizes.len();
    for cand in candidates(sizes) {
        let partial = to_partial(n, &cand);
        let first = closure_local(rules, sizes, &partial);
        for _ in 0..CONFLUENCE_ORDERS {
            let second = closure_local_random(rules, sizes, &partial, &mut rng);
            if second != first {
                return Some(Cr3Witness {
                    assignment: partial,
                    first,
                    second,
                });
            }
        }
    }
    None
}

fn check_cr4(rules: &[LocalRule], ids: &[PropagationRule], sizes: &[usize]) -> Option<RuleId> {
    for (i, r) in rules.iter().enumerate() {
        let others: Vec<LocalRule> = rules
            .iter()
            .enumerate()
            .filter(|&(j, _)| j != i)
            .map(|(_, r)| r.clone())
            .collect();
        let derived = closure_local(&others, sizes, &to_partial(sizes.len(), &r.conds));
        if r.concls.iter().all(|&(p, s)| derived[p].is_subset(s)) {
            return Some(ids[i].id);
        }
    }
    None
}

/// Result of running the engine on one constraint in isolation.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct OracleReport {
    pub assignments: usize,
    pub mismatch: Option<Cr1Witness>,
}

/// Builds a one-constraint network from `constraint` and, for every partial
/// assignment of its scope, compares the engine's fixpoint with the
/// projections of the allowed tuples (or an empty domain when no tuple
/// agrees).
pub fn oracle_check(
    net: &Network,
    constraint: &ExtensionalConstraint,
) -> Result<OracleReport, NetworkError> {
    let mut base = Network::new();
    let mut scope = Vec::new();
    let mut sizes = Vec::new();
    for &v in &constraint.scope {
        let d = net.domain(v)?;
        scope.push(base.add_variable(d.name(), d.tokens().iter().cloned())?);
        sizes.push(d.size());
    }
    base.add_constraint(
        &constraint.label,
        scope.clone(),
        constraint.allowed.clone(),
        true,
    )?;
    base.propagate();
    let n = scope.len();
    let mut report = OracleReport {
        assignments: 0,
        mismatch: None,
    };
    for cand in candidates(&sizes) {
        let partial = to_partial(n, &cand);
        let mut net = base.clone();
        for &(p, x) in &cand {
            net.assert_observation(&format!("p{p}"), scope[p], x)?;
        }
        report.assignments += 1;
        let supported = constraint.allowed.iter().any(|t| {
            t.iter()
                .zip(&partial)
                .all(|(v, p)| p.is_none_or(|p| p == *v))
        });
        let derived: Vec<ValueSet> = scope
            .iter()
            .map(|&v| net.visible_values(v).expect("declared"))
            .collect();
        let ok = if supported {
            let expected: Vec<ValueSet> = (0..n)
                .map(|p| match partial[p] {
                    Some(x) => ValueSet::singleton(x),
                    None => project_local(&constraint.allowed, &partial, p),
                })
                .collect();
            if derived != expected {
                report.mismatch = Some(Cr1Witness {
                    assignment: partial,
                    expected,
                    derived,
                });
                return Ok(report);
            }
            true
        } else {
            derived.iter().any(|d| d.is_empty())
        };
        if !ok {
            report.mismatch = Some(Cr1Witness {
                assignment: partial,
                expected: vec![ValueSet::EMPTY; n],
                derived,
            });
            return Ok(report);
        }
    }
    Ok(report)
}
