//! Domain types of the concept base.
//!
//! A [`ConceptBase`] is a set of keyed [`ConceptTree`]s. Each tree is a
//! counted tree of noun/verb [`ConceptNode`]s; no child may carry a higher
//! count than its parent. Nodes hold contextual [`Descriptor`]s (adjectives
//! on nouns, adverbs on verbs) and keyed [`TreeLink`]s to the bases of other
//! trees. Descriptors associate with each other through [`DescriptorLink`]s.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::config::Config;
use crate::error::{Error, Result};
use crate::query::ResultSet;

/// Opaque tree identifier, rendered `T1`, `T2`, ...
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TreeKey(pub u64);

impl fmt::Display for TreeKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "T{}", self.0)
    }
}

impl FromStr for TreeKey {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        s.strip_prefix('T')
            .and_then(|n| n.parse().ok())
            .map(TreeKey)
            .ok_or_else(|| format!("invalid tree key {s:?}"))
    }
}

impl Serialize for TreeKey {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for TreeKey {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct DescriptorId(pub u64);

impl fmt::Display for DescriptorId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "d{}", self.0)
    }
}

/// Word class of a tree node. Only nouns and verbs form tree structure.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NodePos {
    Noun,
    Verb,
}

impl fmt::Display for NodePos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            NodePos::Noun => "noun",
            NodePos::Verb => "verb",
        })
    }
}

/// Lifecycle state shared by tree and descriptor links.
///
/// Level 1 is a candidate link, level 2 established, level 3 permanent.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LinkState {
    pub level: u8,
    pub strength: u64,
}

impl LinkState {
    pub const fn fresh() -> Self {
        LinkState { level: 1, strength: 1 }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TreeLink {
    pub target_key: TreeKey,
    #[serde(flatten)]
    pub state: LinkState,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Descriptor {
    pub id: DescriptorId,
    pub word: String,
    pub count: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConceptNode {
    pub lemma: String,
    pub pos: NodePos,
    pub count: u64,
    pub descriptors: Vec<Descriptor>,
    pub tree_links: Vec<TreeLink>,
    pub children: Vec<ConceptNode>,
}

impl ConceptNode {
    pub fn new(lemma: impl Into<String>, pos: NodePos, count: u64) -> Self {
        ConceptNode {
            lemma: lemma.into(),
            pos,
            count,
            descriptors: Vec::new(),
            tree_links: Vec::new(),
            children: Vec::new(),
        }
    }

    pub fn child(&self, lemma: &str) -> Option<&ConceptNode> {
        self.children.iter().find(|c| c.lemma == lemma)
    }

    pub fn child_mut(&mut self, lemma: &str) -> Option<&mut ConceptNode> {
        self.children.iter_mut().find(|c| c.lemma == lemma)
    }

    pub fn descend(&self, path: &[String]) -> Option<&ConceptNode> {
        path.iter().try_fold(self, |node, lemma| node.child(lemma))
    }

    pub fn descend_mut(&mut self, path: &[String]) -> Option<&mut ConceptNode> {
        path.iter().try_fold(self, |node, lemma| node.child_mut(lemma))
    }

    pub fn descriptor(&self, word: &str) -> Option<&Descriptor> {
        self.descriptors.iter().find(|d| d.word == word)
    }

    /// Visits this node and all descendants depth-first, pre-order, with the
    /// lemma path from this node.
    pub fn walk<'a>(&'a self, f: &mut impl FnMut(&[String], &'a ConceptNode)) {
        let mut path = Vec::new();
        self.walk_inner(&mut path, f);
    }

    fn walk_inner<'a>(&'a self, path: &mut Vec<String>, f: &mut impl FnMut(&[String], &'a ConceptNode)) {
        f(path, self);
        for child in &self.children {
            path.push(child.lemma.clone());
            child.walk_inner(path, f);
            path.pop();
        }
    }

    pub fn walk_mut(&mut self, f: &mut impl FnMut(&mut ConceptNode)) {
        f(self);
        for child in &mut self.children {
            child.walk_mut(f);
        }
    }

    pub fn total_count(&self) -> u64 {
        self.count + self.children.iter().map(ConceptNode::total_count).sum::<u64>()
    }

    pub fn node_count(&self) -> usize {
        1 + self.children.iter().map(ConceptNode::node_count).sum::<usize>()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConceptTree {
    pub key: TreeKey,
    pub base: ConceptNode,
    pub last_access_cycle: u64,
    pub access_count_since_cycle: u64,
}

impl ConceptTree {
    pub fn find(&self, path: &[String]) -> Option<&ConceptNode> {
        self.base.descend(path)
    }
}

/// Association between two descriptors, stored with `from_id < to_id`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DescriptorLink {
    pub from_id: DescriptorId,
    pub to_id: DescriptorId,
    #[serde(flatten)]
    pub state: LinkState,
    pub last_touched_cycle: u64,
}

/// A grouping of the trees bound by an approved query result.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GlobalConceptNode {
    pub id: u64,
    pub label: String,
    pub tree_refs: BTreeSet<TreeKey>,
    pub count: u64,
}

/// Normalized unordered descriptor pair.
pub fn descriptor_pair(a: DescriptorId, b: DescriptorId) -> (DescriptorId, DescriptorId) {
    if a <= b {
        (a, b)
    } else {
        (b, a)
    }
}

/// Where a descriptor lives.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DescriptorLocation {
    pub key: TreeKey,
    pub path: Vec<String>,
    pub word: String,
    pub count: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConceptBase {
    pub(crate) trees: BTreeMap<TreeKey, ConceptTree>,
    pub(crate) descriptor_links: BTreeMap<(DescriptorId, DescriptorId), DescriptorLink>,
    pub(crate) global_nodes: BTreeMap<u64, GlobalConceptNode>,
    pub(crate) results: BTreeMap<u64, ResultSet>,
    pub(crate) config: Config,
    pub(crate) next_id: u64,
    pub(crate) next_tree_key: u64,
    pub(crate) maintenance_cycle: u64,
}

impl Default for ConceptBase {
    fn default() -> Self {
        Self::with_valid_config(Config::default())
    }
}

impl ConceptBase {
    pub fn new(config: Config) -> Result<Self> {
        config.check()?;
        Ok(Self::with_valid_config(config))
    }

    fn with_valid_config(config: Config) -> Self {
        ConceptBase {
            trees: BTreeMap::new(),
            descriptor_links: BTreeMap::new(),
            global_nodes: BTreeMap::new(),
            results: BTreeMap::new(),
            config,
            next_id: 1,
            next_tree_key: 1,
            maintenance_cycle: 0,
        }
    }

    pub fn config(&self) -> &Config {
        &self.config
    }

    pub fn trees(&self) -> impl Iterator<Item = &ConceptTree> {
        self.trees.values()
    }

    pub fn tree(&self, key: TreeKey) -> Option<&ConceptTree> {
        self.trees.get(&key)
    }

    pub fn tree_count(&self) -> usize {
        self.trees.len()
    }

    pub fn descriptor_links(&self) -> impl Iterator<Item = &DescriptorLink> {
        self.descriptor_links.values()
    }

    pub fn descriptor_link(&self, a: DescriptorId, b: DescriptorId) -> Option<&DescriptorLink> {
        self.descriptor_links.get(&descriptor_pair(a, b))
    }

    pub fn global_nodes(&self) -> impl Iterator<Item = &GlobalConceptNode> {
        self.global_nodes.values()
    }

    pub fn global_node(&self, id: u64) -> Option<&GlobalConceptNode> {
        self.global_nodes.get(&id)
    }

    pub fn results(&self) -> impl Iterator<Item = &ResultSet> {
        self.results.values()
    }

    pub fn result(&self, id: u64) -> Option<&ResultSet> {
        self.results.get(&id)
    }

    pub fn maintenance_cycle(&self) -> u64 {
        self.maintenance_cycle
    }

    pub fn next_id(&self) -> u64 {
        self.next_id
    }

    pub fn next_tree_key(&self) -> u64 {
        self.next_tree_key
    }

    /// Walks from the base of tree `key` matching `path` lemma by lemma.
    pub fn find_node(&self, key: TreeKey, path: &[String]) -> Result<Option<&ConceptNode>> {
        let tree = self.trees.get(&key).ok_or(Error::KeyNotFound(key))?;
        Ok(tree.find(path))
    }

    pub(crate) fn node_mut(&mut self, key: TreeKey, path: &[String]) -> Result<&mut ConceptNode> {
        let tree = self.trees.get_mut(&key).ok_or(Error::KeyNotFound(key))?;
        tree.base.descend_mut(path).ok_or_else(|| Error::NodeNotFound {
            key,
            path: path.to_vec(),
        })
    }

    pub(crate) fn alloc_id(&mut self) -> u64 {
        let id = self.next_id;
        self.next_id += 1;
        id
    }

    pub(crate) fn alloc_tree_key(&mut self) -> TreeKey {
        let key = TreeKey(self.next_tree_key);
        self.next_tree_key += 1;
        key
    }

    /// Records a use of the tree in the current maintenance cycle.
    pub(crate) fn touch(&mut self, key: TreeKey) {
        let cycle = self.maintenance_cycle;
        if let Some(tree) = self.trees.get_mut(&key) {
            tree.access_count_since_cycle += 1;
            tree.last_access_cycle = cycle;
        }
    }

    pub(crate) fn add_tree(&mut self, base: ConceptNode) -> TreeKey {
        let key = self.alloc_tree_key();
        let tree = ConceptTree {
            key,
            base,
            last_access_cycle: self.maintenance_cycle,
            access_count_since_cycle: 1,
        };
        self.trees.insert(key, tree);
        key
    }

    /// Index of every live descriptor by id.
    pub fn descriptor_index(&self) -> BTreeMap<DescriptorId, DescriptorLocation> {
        let mut index = BTreeMap::new();
        for tree in self.trees.values() {
            tree.base.walk(&mut |path, node| {
                for d in &node.descriptors {
                    index.insert(
                        d.id,
                        DescriptorLocation {
                            key: tree.key,
                            path: path.to_vec(),
                            word: d.word.clone(),
                            count: d.count,
                        },
                    );
                }
            });
        }
        index
    }

    /// Drops descriptor links with an endpoint that no longer exists.
    pub(crate) fn prune_descriptor_links(&mut self) {
        let live = self.descriptor_index();
        self.descriptor_links
            .retain(|_, l| live.contains_key(&l.from_id) && live.contains_key(&l.to_id));
    }

    /// Removes tree links whose target is gone and prunes global node refs.
    pub(crate) fn prune_dangling_refs(&mut self) {
        let keys: BTreeSet<TreeKey> = self.trees.keys().copied().collect();
        for tree in self.trees.values_mut() {
            tree.base.walk_mut(&mut |node| {
                node.tree_links.retain(|l| keys.contains(&l.target_key));
            });
        }
        for node in self.global_nodes.values_mut() {
            node.tree_refs.retain(|k| keys.contains(k));
        }
        self.global_nodes.retain(|_, n| !n.tree_refs.is_empty());
    }
}
