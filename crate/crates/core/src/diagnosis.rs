//! Consistency checking and enumeration of minimal diagnoses by a
//! hitting-set search over extracted conflicts.

use std::collections::{BTreeSet, HashSet};

use serde::Serialize;

use crate::domain::Network;
use crate::engine::ConflictSet;
use crate::error::NetworkError;
use crate::ConstraintId;

/// A set of relaxable constraints whose joint relaxation restores
/// consistency.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct Diagnosis {
    pub constraints: BTreeSet<ConstraintId>,
}

impl Diagnosis {
    pub fn cardinality(&self) -> usize {
        self.constraints.len()
    }
}

/// One node of the search tree: the constraints relaxed on the way down and
/// the conflict found there (none when the node is consistent).
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TreeNode {
    pub path: Vec<ConstraintId>,
    pub conflict: Option<BTreeSet<ConstraintId>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DiagnosisReport {
    /// Subset-minimal, ordered by cardinality then members.
    pub diagnoses: Vec<Diagnosis>,
    pub tree: Vec<TreeNode>,
}

impl Network {
    /// Propagates to fixpoint and reports the conflict of the first emptied
    /// variable, if any.
    pub fn check_consistent(&mut self) -> (bool, Option<ConflictSet>) {
        let out = self.propagate();
        match out.conflict {
            Some((_, cs)) => (false, Some(cs)),
            None => (true, None),
        }
    }

    /// All subset-minimal sets of at most `max_cardinality` relaxable active
    /// constraints whose relaxation removes every conflict. Runs on a copy, so
    /// `self` is left as found.
    pub fn diagnose(&self, max_cardinality: usize) -> Result<DiagnosisReport, NetworkError> {
        if max_cardinality < 1 {
            return Err(NetworkError::InvalidCardinality);
        }
        let mut search = Search {
            net: self.clone(),
            max: max_cardinality,
            visited: HashSet::new(),
            found: Vec::new(),
            tree: Vec::new(),
        };
        search.net.propagate();
        search.expand(&mut Vec::new())?;
        let mut found = search.found;
        found.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
        let mut minimal: Vec<BTreeSet<ConstraintId>> = Vec::new();
        for d in found {
            if !minimal.iter().any(|m| m.is_subset(&d)) {
                minimal.push(d);
            }
        }
        Ok(DiagnosisReport {
            diagnoses: minimal
                .into_iter()
                .map(|constraints| Diagnosis { constraints })
                .collect(),
            tree: search.tree,
        })
    }
}

struct Search {
    net: Network,
    max: usize,
    visited: HashSet<BTreeSet<ConstraintId>>,
    found: Vec<BTreeSet<ConstraintId>>,
    tree: Vec<TreeNode>,
}

impl Search {
    fn expand(&mut self, path: &mut Vec<ConstraintId>) -> Result<(), NetworkError> {
        let set: BTreeSet<ConstraintId> = path.iter().copied().collect();
        if !self.visited.insert(set.clone()) || self.found.iter().any(|d| d.is_subset(&set)) {
            return Ok(());
        }
        let Some((_, conflict)) = self.net.current_conflict() else {
            self.tree.push(TreeNode {
                path: path.clone(),
                conflict: None,
            });
            self.found.push(set);
            return Ok(());
        };
        self.tree.push(TreeNode {
            path: path.clone(),
            conflict: Some(conflict.constraints.clone()),
        });
        if path.len() == self.max {
            return Ok(());
        }
        for c in conflict.constraints {
            let k = &self.net.constraints[c.index()];
            if !k.relaxable || !k.active {
                continue;
            }
            self.net.relax(c)?;
            path.push(c);
            self.expand(path)?;
            path.pop();
            self.net.restore(c)?;
        }
        Ok(())
    }
}
