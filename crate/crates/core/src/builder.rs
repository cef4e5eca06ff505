//! Tree construction and maintenance.
//!
//! Sequences either start a new tree or update an existing one when they
//! share at least `merge_overlap_threshold` leading concepts with a path.
//! Updates that start below a base can leave a node counting more than its
//! parent; such a node is split off into its own tree and the former parent
//! keeps a keyed link to it.

use std::cmp::Reverse;
use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::ingest::{
    corpus_popular_words, descriptor_class_for, sentence_to_sequence, split_sentences, word_classes, ConceptTerm,
};
use crate::linking::decay_link;
use crate::model::{ConceptBase, ConceptNode, Descriptor, DescriptorId, DescriptorLink, LinkState, TreeKey, TreeLink};

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TargetKind {
    NewTree,
    BaseAnchored { key: TreeKey },
    Interior { key: TreeKey, path: Vec<String> },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct InsertionTarget {
    pub kind: TargetKind,
    pub matched_prefix_length: usize,
}

/// A node that was detached into its own tree.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SplitEvent {
    pub source_key: TreeKey,
    pub parent_path: Vec<String>,
    pub new_key: TreeKey,
    pub lemma: String,
    pub count: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct InsertOutcome {
    pub key: TreeKey,
    pub target: InsertionTarget,
    pub created_tree: bool,
    pub splits: Vec<SplitEvent>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct IngestReport {
    pub sentences: usize,
    pub trees_created: usize,
    pub concepts: usize,
    pub descriptors: usize,
    pub splits: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct DecayReport {
    pub cycle: u64,
    pub decremented: Vec<TreeKey>,
    pub removed_trees: Vec<TreeKey>,
    pub removed_nodes: usize,
    pub removed_tree_links: usize,
    pub removed_descriptor_links: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct MergeReport {
    /// (absorbed, survivor)
    pub merged: Vec<(TreeKey, TreeKey)>,
    pub splits: Vec<SplitEvent>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct MaintenanceReport {
    pub decay: DecayReport,
    pub merge: MergeReport,
}

/// Interior anchor preference: shallower, larger base count, smaller key,
/// longer match, earlier in walk order.
type InteriorRank = (usize, Reverse<u64>, TreeKey, Reverse<usize>, usize);

/// Length of the run of `seq` that matches the path starting at `node`.
fn match_len(node: &ConceptNode, seq: &[ConceptTerm]) -> usize {
    let mut node = node;
    let Some(first) = seq.first() else { return 0 };
    if node.lemma != first.lemma || node.pos != first.pos {
        return 0;
    }
    let mut len = 1;
    for term in &seq[1..] {
        match node
            .children
            .iter()
            .find(|c| c.lemma == term.lemma && c.pos == term.pos)
        {
            Some(child) => {
                node = child;
                len += 1;
            }
            None => break,
        }
    }
    len
}

fn first_violation(node: &ConceptNode) -> Option<Vec<String>> {
    let mut found = None;
    node.walk(&mut |path, n| {
        if found.is_none() {
            if let Some(c) = n.children.iter().find(|c| c.count > n.count) {
                let mut p = path.to_vec();
                p.push(c.lemma.clone());
                found = Some(p);
            }
        }
    });
    found
}

fn stronger(a: LinkState, b: LinkState) -> LinkState {
    if (b.level, b.strength) > (a.level, a.strength) {
        b
    } else {
        a
    }
}

fn add_links(into: &mut Vec<TreeLink>, from: Vec<TreeLink>) {
    for link in from {
        match into.iter_mut().find(|l| l.target_key == link.target_key) {
            Some(existing) => existing.state = stronger(existing.state, link.state),
            None => into.push(link),
        }
    }
}

/// Folds `from` into `into`, summing counts along matching paths.
fn graft(into: &mut ConceptNode, from: ConceptNode, remap: &mut BTreeMap<DescriptorId, DescriptorId>) {
    into.count += from.count;
    for d in from.descriptors {
        match into.descriptors.iter_mut().find(|x| x.word == d.word) {
            Some(existing) => {
                existing.count += d.count;
                remap.insert(d.id, existing.id);
            }
            None => into.descriptors.push(d),
        }
    }
    add_links(&mut into.tree_links, from.tree_links);
    for child in from.children {
        match into
            .children
            .iter_mut()
            .find(|c| c.lemma == child.lemma && c.pos == child.pos)
        {
            Some(existing) => graft(existing, child, remap),
            None => into.children.push(child),
        }
    }
}

/// Decrements a subtree by one. Returns the number of nodes removed below
/// `node`; the caller removes `node` itself when its count reaches zero.
fn decrement(node: &mut ConceptNode, config: &crate::config::Config, removed_links: &mut usize) -> usize {
    node.count = node.count.saturating_sub(1);
    for d in &mut node.descriptors {
        d.count = d.count.saturating_sub(1);
    }
    node.descriptors.retain(|d| d.count > 0);
    let before = node.tree_links.len();
    node.tree_links = std::mem::take(&mut node.tree_links)
        .into_iter()
        .filter_map(|mut l| {
            l.state = decay_link(l.state, config)?;
            Some(l)
        })
        .collect();
    *removed_links += before - node.tree_links.len();
    let mut removed = 0;
    for child in &mut node.children {
        removed += decrement(child, config, removed_links);
    }
    node.children.retain(|c| {
        if c.count == 0 {
            removed += c.node_count();
            false
        } else {
            true
        }
    });
    removed
}

/// Stable sort by descending corpus frequency so the most popular concept
/// becomes the base.
pub fn reorder_for_popular_base(seq: &[ConceptTerm], popularity: &BTreeMap<String, usize>) -> Vec<ConceptTerm> {
    let mut out = seq.to_vec();
    out.sort_by_key(|t| Reverse(popularity.get(&t.lemma).copied().unwrap_or(0)));
    out
}

impl ConceptBase {
    pub fn find_insertion_target(&self, seq: &[ConceptTerm]) -> Result<InsertionTarget> {
        if seq.is_empty() {
            return Err(Error::EmptySequence);
        }
        let threshold = self.config.merge_overlap_threshold;

        let best_base = self
            .trees
            .values()
            .map(|t| (match_len(&t.base, seq), t))
            .filter(|(len, _)| *len > 0)
            .min_by_key(|(len, t)| (Reverse(*len), Reverse(t.base.count), t.key));
        if let Some((len, tree)) = best_base {
            if len >= threshold {
                return Ok(InsertionTarget {
                    kind: TargetKind::BaseAnchored { key: tree.key },
                    matched_prefix_length: len,
                });
            }
        }

        if self.config.allow_interior_updates {
            let mut best: Option<(InteriorRank, Vec<String>, usize)> = None;
            for tree in self.trees.values() {
                let mut order = 0usize;
                tree.base.walk(&mut |path, node| {
                    order += 1;
                    if path.is_empty() {
                        return;
                    }
                    let len = match_len(node, seq);
                    if len < threshold {
                        return;
                    }
                    let rank = (path.len(), Reverse(tree.base.count), tree.key, Reverse(len), order);
                    if best.as_ref().is_none_or(|(r, _, _)| rank < *r) {
                        best = Some((rank, path.to_vec(), len));
                    }
                });
            }
            if let Some((rank, path, len)) = best {
                return Ok(InsertionTarget {
                    kind: TargetKind::Interior { key: rank.2, path },
                    matched_prefix_length: len,
                });
            }
        }

        Ok(InsertionTarget {
            kind: TargetKind::NewTree,
            matched_prefix_length: 0,
        })
    }

    fn check_terms(&self, seq: &[ConceptTerm]) -> Result<()> {
        for term in seq {
            let wanted = descriptor_class_for(term.pos);
            for word in &term.descriptors {
                if !word_classes(word, &self.config).contains(&wanted) {
                    return Err(Error::RejectedTerm {
                        lemma: term.lemma.clone(),
                        pos: term.pos.to_string(),
                        word: word.clone(),
                    });
                }
            }
        }
        Ok(())
    }

    fn attach_descriptors(&mut self, key: TreeKey, path: &[String], words: &[String]) -> Result<()> {
        let mut fresh = Vec::new();
        {
            let node = self.node_mut(key, path)?;
            let mut seen = BTreeSet::new();
            for word in words {
                if !seen.insert(word.as_str()) {
                    continue;
                }
                match node.descriptors.iter_mut().find(|d| &d.word == word) {
                    Some(d) => d.count = (d.count + 1).min(node.count),
                    None => fresh.push(word.clone()),
                }
            }
        }
        for word in fresh {
            let id = DescriptorId(self.alloc_id());
            let node = self.node_mut(key, path)?;
            node.descriptors.push(Descriptor { id, word, count: 1 });
        }
        Ok(())
    }

    /// Applies the sequence at `target`, then restores the count rule.
    pub fn insert_sequence(&mut self, target: &InsertionTarget, seq: &[ConceptTerm]) -> Result<InsertOutcome> {
        if seq.is_empty() {
            return Err(Error::EmptySequence);
        }
        self.check_terms(seq)?;

        let (key, anchor) = match &target.kind {
            TargetKind::NewTree => {
                let mut chain: Option<ConceptNode> = None;
                for term in seq.iter().rev() {
                    let mut node = ConceptNode::new(term.lemma.clone(), term.pos, 1);
                    node.children.extend(chain.take());
                    chain = Some(node);
                }
                let key = self.add_tree(chain.expect("sequence is nonempty"));
                let mut path = Vec::new();
                for (i, term) in seq.iter().enumerate() {
                    if i > 0 {
                        path.push(term.lemma.clone());
                    }
                    self.attach_descriptors(key, &path, &term.descriptors)?;
                }
                return Ok(InsertOutcome {
                    key,
                    target: target.clone(),
                    created_tree: true,
                    splits: Vec::new(),
                });
            }
            TargetKind::BaseAnchored { key } => (*key, Vec::new()),
            TargetKind::Interior { key, path } => (*key, path.clone()),
        };

        let anchor_node = self.node_mut(key, &anchor)?;
        if anchor_node.lemma != seq[0].lemma || anchor_node.pos != seq[0].pos {
            return Err(Error::NodeNotFound { key, path: anchor });
        }

        let mut path = anchor.clone();
        let mut touched = Vec::with_capacity(seq.len());
        for (i, term) in seq.iter().enumerate() {
            if i > 0 {
                let parent = self.node_mut(key, &path)?;
                match parent
                    .children
                    .iter_mut()
                    .find(|c| c.lemma == term.lemma && c.pos == term.pos)
                {
                    Some(child) => child.count += 1,
                    None => parent.children.push(ConceptNode::new(term.lemma.clone(), term.pos, 1)),
                }
                path.push(term.lemma.clone());
            } else {
                self.node_mut(key, &path)?.count += 1;
            }
            self.attach_descriptors(key, &path, &term.descriptors)?;
            touched.push(path.clone());
        }
        self.touch(key);

        let mut splits = Vec::new();
        for path in touched {
            if self.find_node(key, &path)?.is_none() {
                continue;
            }
            let events = self.check_and_split(key, &path)?;
            let moved = !events.is_empty();
            splits.extend(events);
            if moved {
                break;
            }
        }
        Ok(InsertOutcome {
            key,
            target: target.clone(),
            created_tree: false,
            splits,
        })
    }

    /// Finds the target for `seq` and inserts it.
    pub fn insert(&mut self, seq: &[ConceptTerm]) -> Result<InsertOutcome> {
        let target = self.find_insertion_target(seq)?;
        self.insert_sequence(&target, seq)
    }

    /// Detaches the node at `path` into a new linked tree if it counts more
    /// than its parent, then repeats inside the new tree until the rule
    /// holds. Base nodes are never split.
    pub fn check_and_split(&mut self, key: TreeKey, path: &[String]) -> Result<Vec<SplitEvent>> {
        let Some((lemma, parent_path)) = path.split_last() else {
            self.find_node(key, path)?;
            return Ok(Vec::new());
        };
        let node_count = self
            .find_node(key, path)?
            .ok_or_else(|| Error::NodeNotFound {
                key,
                path: path.to_vec(),
            })?
            .count;
        let parent = self.node_mut(key, parent_path)?;
        if node_count <= parent.count {
            return Ok(Vec::new());
        }
        let idx = parent
            .children
            .iter()
            .position(|c| &c.lemma == lemma)
            .expect("child found above");
        let detached = parent.children.remove(idx);
        let new_key = self.add_tree(detached);
        self.node_mut(key, parent_path)?.tree_links.push(TreeLink {
            target_key: new_key,
            state: LinkState::fresh(),
        });
        let mut events = vec![SplitEvent {
            source_key: key,
            parent_path: parent_path.to_vec(),
            new_key,
            lemma: lemma.clone(),
            count: node_count,
        }];
        events.extend(self.restore_tree(new_key)?);
        Ok(events)
    }

    fn restore_tree(&mut self, key: TreeKey) -> Result<Vec<SplitEvent>> {
        let mut events = Vec::new();
        loop {
            let tree = self.trees.get(&key).ok_or(Error::KeyNotFound(key))?;
            let Some(path) = first_violation(&tree.base) else { break };
            events.extend(self.check_and_split(key, &path)?);
        }
        Ok(events)
    }

    /// Splits until no tree in the base violates the count rule.
    pub fn restore_count_rule(&mut self) -> Result<Vec<SplitEvent>> {
        let keys: Vec<TreeKey> = self.trees.keys().copied().collect();
        let mut events = Vec::new();
        for key in keys {
            if self.trees.contains_key(&key) {
                events.extend(self.restore_tree(key)?);
            }
        }
        Ok(events)
    }

    /// Runs the text pipeline and inserts one sequence per sentence.
    pub fn ingest_text(&mut self, text: &str) -> Result<IngestReport> {
        let sequences: Vec<Vec<ConceptTerm>> = split_sentences(text)
            .iter()
            .map(|s| sentence_to_sequence(s, &self.config))
            .collect();
        let mut report = IngestReport {
            sentences: sequences.len(),
            ..IngestReport::default()
        };
        let popularity = self
            .config
            .popular_word_base_mode
            .then(|| corpus_popular_words(&sequences));
        for seq in sequences {
            if seq.is_empty() {
                continue;
            }
            let seq = match &popularity {
                Some(p) => reorder_for_popular_base(&seq, p),
                None => seq,
            };
            report.concepts += seq.len();
            report.descriptors += seq.iter().map(|t| t.descriptors.len()).sum::<usize>();
            let outcome = self.insert(&seq)?;
            report.trees_created += usize::from(outcome.created_tree) + outcome.splits.len();
            report.splits += outcome.splits.len();
        }
        Ok(report)
    }

    /// Advances the maintenance clock and decays unused trees and links.
    ///
    /// A tree that was accessed since the last pass is exempt. Otherwise,
    /// once idle for more than `decay_grace_cycles` passes, every count in
    /// it drops by one and its outgoing links decay. Nodes, descriptors and
    /// trees reaching zero are removed along with links pointing at them.
    pub fn decay_pass(&mut self) -> DecayReport {
        self.maintenance_cycle += 1;
        let cycle = self.maintenance_cycle;
        let grace = self.config.decay_grace_cycles;
        let mut report = DecayReport {
            cycle,
            ..DecayReport::default()
        };

        let config = self.config.clone();
        for tree in self.trees.values_mut() {
            if tree.access_count_since_cycle > 0 {
                tree.access_count_since_cycle = 0;
                tree.last_access_cycle = cycle;
                continue;
            }
            if cycle.saturating_sub(tree.last_access_cycle) <= grace {
                continue;
            }
            report.decremented.push(tree.key);
            report.removed_nodes += decrement(&mut tree.base, &config, &mut report.removed_tree_links);
            if tree.base.count == 0 {
                report.removed_nodes += tree.base.node_count();
                report.removed_trees.push(tree.key);
            }
        }
        for key in &report.removed_trees {
            self.trees.remove(key);
        }

        let before = self.descriptor_links.len();
        self.descriptor_links.retain(|_, link| {
            if cycle.saturating_sub(link.last_touched_cycle) <= grace {
                return true;
            }
            match decay_link(link.state, &config) {
                Some(state) => {
                    link.state = state;
                    true
                }
                None => false,
            }
        });
        self.prune_descriptor_links();
        report.removed_descriptor_links = before - self.descriptor_links.len();

        let links_before = self.tree_link_count();
        self.prune_dangling_refs();
        report.removed_tree_links += links_before - self.tree_link_count();
        report
    }

    pub fn tree_link_count(&self) -> usize {
        let mut n = 0;
        for tree in self.trees.values() {
            tree.base.walk(&mut |_, node| n += node.tree_links.len());
        }
        n
    }

    /// Folds trees that share a base lemma and class into the one with the
    /// highest base count (smaller key on ties).
    pub fn merge_pass(&mut self) -> Result<MergeReport> {
        let mut groups: BTreeMap<(String, crate::model::NodePos), Vec<(u64, TreeKey)>> = BTreeMap::new();
        for tree in self.trees.values() {
            groups
                .entry((tree.base.lemma.clone(), tree.base.pos))
                .or_default()
                .push((tree.base.count, tree.key));
        }

        let mut report = MergeReport::default();
        let mut rename: BTreeMap<TreeKey, TreeKey> = BTreeMap::new();
        let mut remap: BTreeMap<DescriptorId, DescriptorId> = BTreeMap::new();
        for (_, mut members) in groups {
            if members.len() < 2 {
                continue;
            }
            members.sort_by_key(|&(count, key)| (Reverse(count), key));
            let survivor = members[0].1;
            for &(_, absorbed) in &members[1..] {
                let tree = self.trees.remove(&absorbed).expect("grouped key exists");
                let target = self.trees.get_mut(&survivor).expect("survivor exists");
                graft(&mut target.base, tree.base, &mut remap);
                target.access_count_since_cycle += tree.access_count_since_cycle;
                target.last_access_cycle = target.last_access_cycle.max(tree.last_access_cycle);
                rename.insert(absorbed, survivor);
                report.merged.push((absorbed, survivor));
            }
        }
        if report.merged.is_empty() {
            return Ok(report);
        }

        for tree in self.trees.values_mut() {
            let own = tree.key;
            tree.base.walk_mut(&mut |node| {
                let links = std::mem::take(&mut node.tree_links);
                let renamed = links
                    .into_iter()
                    .map(|mut l| {
                        l.target_key = rename.get(&l.target_key).copied().unwrap_or(l.target_key);
                        l
                    })
                    .filter(|l| l.target_key != own)
                    .collect();
                add_links(&mut node.tree_links, renamed);
            });
        }

        let old_links = std::mem::take(&mut self.descriptor_links);
        for (_, link) in old_links {
            let from = remap.get(&link.from_id).copied().unwrap_or(link.from_id);
            let to = remap.get(&link.to_id).copied().unwrap_or(link.to_id);
            if from == to {
                continue;
            }
            let pair = crate::model::descriptor_pair(from, to);
            self.descriptor_links
                .entry(pair)
                .and_modify(|l| {
                    l.state = stronger(l.state, link.state);
                    l.last_touched_cycle = l.last_touched_cycle.max(link.last_touched_cycle);
                })
                .or_insert(DescriptorLink {
                    from_id: pair.0,
                    to_id: pair.1,
                    state: link.state,
                    last_touched_cycle: link.last_touched_cycle,
                });
        }

        let globals = std::mem::take(&mut self.global_nodes);
        let mut by_refs: BTreeMap<BTreeSet<TreeKey>, u64> = BTreeMap::new();
        for (id, mut node) in globals {
            node.tree_refs = node
                .tree_refs
                .iter()
                .map(|k| rename.get(k).copied().unwrap_or(*k))
                .collect();
            match by_refs.get(&node.tree_refs) {
                Some(&keep) => {
                    self.global_nodes.get_mut(&keep).expect("kept node").count += node.count;
                }
                None => {
                    by_refs.insert(node.tree_refs.clone(), id);
                    self.global_nodes.insert(id, node);
                }
            }
        }

        report.splits = self.restore_count_rule()?;
        Ok(report)
    }

    /// Decay followed by merge.
    pub fn maintain(&mut self) -> Result<MaintenanceReport> {
        let decay = self.decay_pass();
        let merge = self.merge_pass()?;
        Ok(MaintenanceReport { decay, merge })
    }
}
