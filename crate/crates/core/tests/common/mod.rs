//! Random workloads and brute-force oracles shared by the integration tests.
#![allow(dead_code)]

use std::collections::BTreeSet;

use dcsp::{gate_table, ConstraintId, GateKind, Network, NetworkSpec, Value, ValueSet, VariableId};
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub fn fixture(name: &str) -> String {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/../../fixtures/");
    std::fs::read_to_string(format!("{path}{name}")).expect("fixture exists")
}

pub fn spec(name: &str) -> NetworkSpec {
    dcsp::parse_network(&fixture(name)).expect("fixture parses")
}

/// A boolean circuit description independent of [`Network`].
#[derive(Debug, Clone)]
pub struct Circuit {
    pub vars: usize,
    /// (kind, scope as inputs followed by output)
    pub gates: Vec<(GateKind, Vec<usize>)>,
    pub obs: Vec<(usize, bool)>,
}

impl Circuit {
    pub fn random(rng: &mut ChaCha8Rng, max_vars: usize, max_gates: usize) -> Circuit {
        let vars = rng.gen_range(3..=max_vars);
        let gates = (0..rng.gen_range(1..=max_gates))
            .map(|_| {
                let kind = *GateKind::ALL.choose(rng).unwrap();
                let mut pool: Vec<usize> = (0..vars).collect();
                pool.shuffle(rng);
                (kind, pool[..kind.inputs() + 1].to_vec())
            })
            .collect();
        let mut order: Vec<usize> = (0..vars).collect();
        order.shuffle(rng);
        let k = rng.gen_range(0..=vars);
        let obs = order[..k].iter().map(|&v| (v, rng.gen())).collect();
        Circuit { vars, gates, obs }
    }

    /// Builds the network without observations.
    pub fn network(&self) -> (Network, Vec<VariableId>, Vec<ConstraintId>) {
        let mut net = Network::new();
        let vs: Vec<VariableId> = (0..self.vars)
            .map(|i| net.add_bool_variable(&format!("V{i}")).unwrap())
            .collect();
        let cs = self
            .gates
            .iter()
            .enumerate()
            .map(|(i, (k, scope))| {
                net.add_constraint(
                    &format!("G{i}"),
                    scope.iter().map(|&p| vs[p]).collect(),
                    gate_table(*k, k.inputs()).unwrap(),
                    true,
                )
                .unwrap()
            })
            .collect();
        (net, vs, cs)
    }

    /// Builds and asserts every observation.
    pub fn observed(&self) -> (Network, Vec<VariableId>, Vec<ConstraintId>) {
        let (mut net, vs, cs) = self.network();
        for (i, &(v, b)) in self.obs.iter().enumerate() {
            net.assert_observation(&format!("m{i}"), vs[v], Value::from_bool(b))
                .unwrap();
        }
        (net, vs, cs)
    }

    pub fn tables(&self, active: &BTreeSet<usize>) -> Vec<(Vec<usize>, Vec<Vec<Value>>)> {
        self.gates
            .iter()
            .enumerate()
            .filter(|(i, _)| active.contains(i))
            .map(|(_, (k, s))| (s.clone(), gate_table(*k, k.inputs()).unwrap()))
            .collect()
    }

    pub fn start_domains(&self, obs: &[(usize, bool)]) -> Vec<ValueSet> {
        let mut d = vec![ValueSet::full(2); self.vars];
        for &(v, b) in obs {
            d[v] = d[v].intersection(ValueSet::singleton(Value::from_bool(b)));
        }
        d
    }

    /// Oracle fixpoint with the given gates active.
    pub fn gac(&self, active: &BTreeSet<usize>, obs: &[(usize, bool)]) -> Option<Vec<ValueSet>> {
        gac(self.start_domains(obs), &self.tables(active))
    }

    pub fn all_gates(&self) -> BTreeSet<usize> {
        (0..self.gates.len()).collect()
    }
}

/// Generalized arc consistency by repeated support search over every
/// allowed tuple. `None` when a domain is wiped out.
pub fn gac(
    mut doms: Vec<ValueSet>,
    constraints: &[(Vec<usize>, Vec<Vec<Value>>)],
) -> Option<Vec<ValueSet>> {
    loop {
        let mut changed = false;
        for (scope, tuples) in constraints {
            let live: Vec<&Vec<Value>> = tuples
                .iter()
                .filter(|t| {
                    scope
                        .iter()
                        .zip(t.iter())
                        .all(|(&v, &x)| doms[v].contains(x))
                })
                .collect();
            for (p, &v) in scope.iter().enumerate() {
                let supported: ValueSet = live.iter().map(|t| t[p]).collect();
                let nd = doms[v].intersection(supported);
                if nd != doms[v] {
                    doms[v] = nd;
                    changed = true;
                }
            }
        }
        if doms.iter().any(|d| d.is_empty()) {
            return None;
        }
        if !changed {
            return Some(doms);
        }
    }
}

pub fn visible(net: &Network, vs: &[VariableId]) -> Vec<ValueSet> {
    vs.iter().map(|&v| net.visible_values(v).unwrap()).collect()
}

/// Every subset-minimal set of gates whose removal leaves the oracle
/// without a wipeout, up to `max` members.
pub fn brute_diagnoses(c: &Circuit, max: usize) -> Vec<BTreeSet<usize>> {
    let n = c.gates.len();
    let mut restoring: Vec<BTreeSet<usize>> = Vec::new();
    for mask in 0u32..1 << n {
        let removed: BTreeSet<usize> = (0..n).filter(|i| mask >> i & 1 == 1).collect();
        if removed.len() > max {
            continue;
        }
        let active: BTreeSet<usize> = (0..n).filter(|i| !removed.contains(i)).collect();
        if c.gac(&active, &c.obs).is_some() {
            restoring.push(removed);
        }
    }
    let mut minimal: Vec<BTreeSet<usize>> = restoring
        .iter()
        .filter(|s| !restoring.iter().any(|t| t != *s && t.is_subset(s)))
        .cloned()
        .collect();
    minimal.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
    minimal
}
