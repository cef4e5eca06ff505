use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::Serialize;

use crate::ingest::{descriptor_class_for, word_classes};
use crate::model::{ConceptBase, DescriptorId, NodePos, TreeKey};

/// One broken invariant. [`Violation::is_warning`] marks reports that do not
/// make the base ill-formed.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Violation {
    CountRule {
        key: TreeKey,
        path: Vec<String>,
        count: u64,
        parent_count: u64,
    },
    DescriptorBound {
        key: TreeKey,
        path: Vec<String>,
        word: String,
        count: u64,
        node_count: u64,
    },
    PosMismatch {
        key: TreeKey,
        path: Vec<String>,
        word: String,
        pos: NodePos,
    },
    DuplicateDescriptorWord {
        key: TreeKey,
        path: Vec<String>,
        word: String,
    },
    DuplicateChild {
        key: TreeKey,
        path: Vec<String>,
        lemma: String,
    },
    DuplicateDescriptorId {
        id: DescriptorId,
    },
    DanglingTreeLink {
        key: TreeKey,
        path: Vec<String>,
        target: TreeKey,
    },
    SelfTreeLink {
        key: TreeKey,
        path: Vec<String>,
    },
    DanglingDescriptorLink {
        from: DescriptorId,
        to: DescriptorId,
    },
    SelfDescriptorLink {
        id: DescriptorId,
    },
    InvalidLinkLevel {
        level: u8,
    },
    DanglingGlobalRef {
        global: u64,
        target: TreeKey,
    },
    EmptyGlobal {
        global: u64,
    },
    IdNotBelowCounter {
        id: u64,
        next_id: u64,
    },
    KeyNotBelowCounter {
        key: TreeKey,
    },
}

impl Violation {
    pub fn is_warning(&self) -> bool {
        matches!(self, Violation::SelfTreeLink { .. })
    }
}

fn show_path(key: &TreeKey, path: &[String]) -> String {
    if path.is_empty() {
        format!("{key}:<base>")
    } else {
        format!("{key}:{}", path.join("/"))
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use Violation::*;
        match self {
            CountRule {
                key,
                path,
                count,
                parent_count,
            } => write!(
                f,
                "count rule: {} has count {count} above parent count {parent_count}",
                show_path(key, path)
            ),
            DescriptorBound {
                key,
                path,
                word,
                count,
                node_count,
            } => write!(
                f,
                "descriptor {word:?} at {} has count {count} above node count {node_count}",
                show_path(key, path)
            ),
            PosMismatch { key, path, word, pos } => write!(
                f,
                "descriptor {word:?} does not describe the {pos} at {}",
                show_path(key, path)
            ),
            DuplicateDescriptorWord { key, path, word } => {
                write!(f, "descriptor {word:?} repeated at {}", show_path(key, path))
            }
            DuplicateChild { key, path, lemma } => {
                write!(f, "child {lemma:?} repeated under {}", show_path(key, path))
            }
            DuplicateDescriptorId { id } => write!(f, "descriptor id {id} used twice"),
            DanglingTreeLink { key, path, target } => {
                write!(f, "link from {} to missing tree {target}", show_path(key, path))
            }
            SelfTreeLink { key, path } => {
                write!(f, "warning: {} links to its own tree", show_path(key, path))
            }
            DanglingDescriptorLink { from, to } => {
                write!(f, "descriptor link {from}-{to} has a missing endpoint")
            }
            SelfDescriptorLink { id } => write!(f, "descriptor {id} links to itself"),
            InvalidLinkLevel { level } => write!(f, "link level {level} outside 1..=3"),
            DanglingGlobalRef { global, target } => {
                write!(f, "global node {global} refers to missing tree {target}")
            }
            EmptyGlobal { global } => write!(f, "global node {global} has no trees"),
            IdNotBelowCounter { id, next_id } => {
                write!(f, "identifier {id} is not below the id counter {next_id}")
            }
            KeyNotBelowCounter { key } => write!(f, "tree key {key} is not below the key counter"),
        }
    }
}

impl ConceptBase {
    /// Reports every broken invariant; an empty list means the base is
    /// well-formed. Never mutates.
    pub fn validate(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        let mut seen_ids = BTreeSet::new();
        let mut max_id = 0u64;

        for tree in self.trees.values() {
            let key = tree.key;
            if key.0 >= self.next_tree_key {
                out.push(Violation::KeyNotBelowCounter { key });
            }
            let mut check = |path: &[String], node: &crate::model::ConceptNode| {
                let mut lemmas = BTreeSet::new();
                for child in &node.children {
                    if child.count > node.count {
                        let mut p = path.to_vec();
                        p.push(child.lemma.clone());
                        out.push(Violation::CountRule {
                            key,
                            path: p,
                            count: child.count,
                            parent_count: node.count,
                        });
                    }
                    if !lemmas.insert(child.lemma.as_str()) {
                        out.push(Violation::DuplicateChild {
                            key,
                            path: path.to_vec(),
                            lemma: child.lemma.clone(),
                        });
                    }
                }
                let mut words = BTreeSet::new();
                for d in &node.descriptors {
                    if d.count > node.count {
                        out.push(Violation::DescriptorBound {
                            key,
                            path: path.to_vec(),
                            word: d.word.clone(),
                            count: d.count,
                            node_count: node.count,
                        });
                    }
                    let wanted = descriptor_class_for(node.pos);
                    if !word_classes(&d.word, &self.config).contains(&wanted) {
                        out.push(Violation::PosMismatch {
                            key,
                            path: path.to_vec(),
                            word: d.word.clone(),
                            pos: node.pos,
                        });
                    }
                    if !words.insert(d.word.as_str()) {
                        out.push(Violation::DuplicateDescriptorWord {
                            key,
                            path: path.to_vec(),
                            word: d.word.clone(),
                        });
                    }
                    if !seen_ids.insert(d.id) {
                        out.push(Violation::DuplicateDescriptorId { id: d.id });
                    }
                    max_id = max_id.max(d.id.0);
                }
                for link in &node.tree_links {
                    if !(1..=3).contains(&link.state.level) {
                        out.push(Violation::InvalidLinkLevel {
                            level: link.state.level,
                        });
                    }
                    if !self.trees.contains_key(&link.target_key) {
                        out.push(Violation::DanglingTreeLink {
                            key,
                            path: path.to_vec(),
                            target: link.target_key,
                        });
                    } else if link.target_key == key {
                        out.push(Violation::SelfTreeLink {
                            key,
                            path: path.to_vec(),
                        });
                    }
                }
            };
            tree.base.walk(&mut check);
        }

        for link in self.descriptor_links.values() {
            if link.from_id == link.to_id {
                out.push(Violation::SelfDescriptorLink { id: link.from_id });
            }
            if !seen_ids.contains(&link.from_id) || !seen_ids.contains(&link.to_id) {
                out.push(Violation::DanglingDescriptorLink {
                    from: link.from_id,
                    to: link.to_id,
                });
            }
            if !(1..=3).contains(&link.state.level) {
                out.push(Violation::InvalidLinkLevel {
                    level: link.state.level,
                });
            }
        }

        for node in self.global_nodes.values() {
            if node.tree_refs.is_empty() {
                out.push(Violation::EmptyGlobal { global: node.id });
            }
            for target in &node.tree_refs {
                if !self.trees.contains_key(target) {
                    out.push(Violation::DanglingGlobalRef {
                        global: node.id,
                        target: *target,
                    });
                }
            }
            max_id = max_id.max(node.id);
        }
        max_id = self.results.keys().copied().fold(max_id, u64::max);
        if max_id >= self.next_id {
            out.push(Violation::IdNotBelowCounter {
                id: max_id,
                next_id: self.next_id,
            });
        }
        out
    }

    /// Only the reports that make the base ill-formed.
    pub fn errors(&self) -> Vec<Violation> {
        self.validate().into_iter().filter(|v| !v.is_warning()).collect()
    }
}

/// Count of violations by kind, for summaries.
pub fn summarize(violations: &[Violation]) -> BTreeMap<String, usize> {
    let mut out = BTreeMap::new();
    for v in violations {
        let kind = serde_json::to_value(v)
            .ok()
            .and_then(|j| j.get("kind").and_then(|k| k.as_str()).map(str::to_string))
            .unwrap_or_default();
        *out.entry(kind).or_insert(0) += 1;
    }
    out
}
