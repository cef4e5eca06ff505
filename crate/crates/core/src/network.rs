//! Feedback from approved query results.
//!
//! Approving a solution is the one place query results write back into the
//! base: it links the descriptors and trees the solution bound together,
//! strengthens the bound descriptors, and groups the bound trees under a
//! global concept node. Global nodes that share a tree trigger each other.

use std::collections::BTreeSet;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{descriptor_pair, ConceptBase, DescriptorId, GlobalConceptNode, LinkState, TreeKey};
use crate::query::{ResultStatus, Solution};

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ApprovalReport {
    pub result_id: u64,
    pub descriptor_links: Vec<(DescriptorId, DescriptorId, LinkState)>,
    pub tree_links: Vec<(TreeKey, Vec<String>, TreeKey, LinkState)>,
    pub global_id: u64,
}

impl ConceptBase {
    fn pending_solution(&self, result_id: u64, index: usize) -> Result<Solution> {
        let result = self.results.get(&result_id).ok_or(Error::UnknownResult(result_id))?;
        if result.status != ResultStatus::Pending {
            return Err(Error::ResultSettled(result_id));
        }
        let solution = result
            .solutions
            .get(index)
            .ok_or(Error::NoSuchSolution { id: result_id, index })?;
        for b in &solution.bindings {
            let stale = |reason: String| Error::StaleResult { id: result_id, reason };
            let node = self
                .trees
                .get(&b.key)
                .and_then(|t| t.find(&b.path))
                .ok_or_else(|| stale(format!("{} {:?} is gone", b.key, b.path)))?;
            if node.lemma != b.lemma {
                return Err(stale(format!("{} {:?} is no longer {:?}", b.key, b.path, b.lemma)));
            }
            if let Some(d) = &b.descriptor {
                if !node.descriptors.iter().any(|x| x.id == d.id) {
                    return Err(stale(format!("descriptor {:?} moved or expired", d.word)));
                }
            }
        }
        Ok(solution.clone())
    }

    /// Applies a human approval of one solution of a pending result.
    pub fn approve_result(&mut self, result_id: u64, solution_index: usize) -> Result<ApprovalReport> {
        let solution = self.pending_solution(result_id, solution_index)?;
        let bindings = &solution.bindings;
        let mut report = ApprovalReport {
            result_id,
            descriptor_links: Vec::new(),
            tree_links: Vec::new(),
            global_id: 0,
        };

        let mut linked = BTreeSet::new();
        for i in 0..bindings.len() {
            for j in i + 1..bindings.len() {
                let (Some(a), Some(b)) = (&bindings[i].descriptor, &bindings[j].descriptor) else {
                    continue;
                };
                if a.id == b.id || !linked.insert(descriptor_pair(a.id, b.id)) {
                    continue;
                }
                let state = self.link_descriptors(a.id, b.id)?;
                report.descriptor_links.push((a.id, b.id, state));
            }
        }

        let mut tree_pairs = BTreeSet::new();
        for i in 0..bindings.len() {
            for j in i + 1..bindings.len() {
                let (from, to) = (&bindings[i], &bindings[j]);
                if from.key == to.key || !tree_pairs.insert((from.key, from.path.clone(), to.key)) {
                    continue;
                }
                let state = self.link_trees(from.key, &from.path, to.key)?;
                report.tree_links.push((from.key, from.path.clone(), to.key, state));
            }
        }

        let mut strengthened = BTreeSet::new();
        for b in bindings {
            let Some(d) = &b.descriptor else { continue };
            if !strengthened.insert(d.id) {
                continue;
            }
            let node = self.node_mut(b.key, &b.path)?;
            let cap = node.count;
            if let Some(x) = node.descriptors.iter_mut().find(|x| x.id == d.id) {
                x.count = (x.count + 1).min(cap);
            }
        }

        for key in solution.tree_keys() {
            self.touch(key);
        }
        let label = self.results[&result_id].query.to_string();
        report.global_id = self.group_result(&solution, &label)?;

        let result = self.results.get_mut(&result_id).expect("checked above");
        result.status = ResultStatus::Approved;
        result.approved_solution = Some(solution_index);
        Ok(report)
    }

    /// Marks a pending result rejected. Nothing else changes.
    pub fn reject_result(&mut self, result_id: u64) -> Result<()> {
        let result = self
            .results
            .get_mut(&result_id)
            .ok_or(Error::UnknownResult(result_id))?;
        if result.status != ResultStatus::Pending {
            return Err(Error::ResultSettled(result_id));
        }
        result.status = ResultStatus::Rejected;
        Ok(())
    }

    /// Groups the trees bound by `solution` under a global node. A node with
    /// the identical tree set is reinforced instead of duplicated.
    pub fn group_result(&mut self, solution: &Solution, label: &str) -> Result<u64> {
        let refs = solution.tree_keys();
        if refs.is_empty() {
            return Err(Error::EmptyGroup);
        }
        if let Some(node) = self.global_nodes.values_mut().find(|n| n.tree_refs == refs) {
            node.count += 1;
            return Ok(node.id);
        }
        let id = self.alloc_id();
        self.global_nodes.insert(
            id,
            GlobalConceptNode {
                id,
                label: label.to_string(),
                tree_refs: refs,
                count: 1,
            },
        );
        Ok(id)
    }

    /// The node's trees plus those of every global node sharing one of them.
    pub fn trigger(&self, global_id: u64) -> Result<BTreeSet<TreeKey>> {
        let node = self
            .global_nodes
            .get(&global_id)
            .ok_or(Error::UnknownGlobal(global_id))?;
        let mut out = node.tree_refs.clone();
        for other in self.global_nodes.values() {
            if other.id != global_id && !other.tree_refs.is_disjoint(&node.tree_refs) {
                out.extend(other.tree_refs.iter().copied());
            }
        }
        Ok(out)
    }
}
