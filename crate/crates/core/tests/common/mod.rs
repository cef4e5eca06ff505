#![allow(dead_code)]

pub mod oracle;

use conceptbase::{ConceptBase, DescriptorId, TreeKey};
use rand::rngs::StdRng;
use rand::seq::IndexedRandom;
use rand::Rng;

pub const NOUNS: [&str; 6] = ["cat", "milk", "boy", "dog", "shirt", "hat"];
pub const VERBS: [&str; 4] = ["drank", "ate", "wore", "ran"];
pub const ADJECTIVES: [&str; 5] = ["white", "black", "blue", "cold", "big"];
pub const ADVERBS: [&str; 2] = ["quickly", "slowly"];

pub fn random_sentence(rng: &mut StdRng) -> String {
    let mut words = Vec::new();
    let len = rng.random_range(1..=4);
    for i in 0..len {
        let noun_slot = i % 2 == 0;
        if noun_slot {
            if rng.random_bool(0.4) {
                words.push(*ADJECTIVES.choose(rng).unwrap());
            }
            words.push(*NOUNS.choose(rng).unwrap());
        } else {
            words.push(*VERBS.choose(rng).unwrap());
            if rng.random_bool(0.3) {
                words.push(*ADVERBS.choose(rng).unwrap());
            }
        }
    }
    words.join(" ")
}

pub fn node_total(base: &ConceptBase) -> usize {
    base.trees().map(|t| t.base.node_count()).sum()
}

/// All (key, path) node addresses in walk order.
pub fn node_addresses(base: &ConceptBase) -> Vec<(TreeKey, Vec<String>)> {
    let mut out = Vec::new();
    for tree in base.trees() {
        tree.base.walk(&mut |path, _| out.push((tree.key, path.to_vec())));
    }
    out
}

/// A base with at most 10 trees, 50 nodes and 20 descriptor links, built
/// only through public operations.
pub fn random_base(rng: &mut StdRng) -> ConceptBase {
    let mut base = ConceptBase::default();
    let sentences = rng.random_range(1..=30);
    for _ in 0..sentences {
        let mut trial = base.clone();
        trial.ingest_text(&random_sentence(rng)).unwrap();
        if trial.tree_count() <= 10 && node_total(&trial) <= 50 {
            base = trial;
        }
    }

    let ids: Vec<DescriptorId> = base.descriptor_index().keys().copied().collect();
    if ids.len() >= 2 {
        let links = rng.random_range(0..=20usize);
        for _ in 0..links {
            let a = *ids.choose(rng).unwrap();
            let b = *ids.choose(rng).unwrap();
            if a == b {
                continue;
            }
            if base.descriptor_link(a, b).is_none() && base.descriptor_links().count() >= 20 {
                continue;
            }
            for _ in 0..rng.random_range(1..=12) {
                base.link_descriptors(a, b).unwrap();
            }
        }
    }

    let nodes = node_addresses(&base);
    let keys: Vec<TreeKey> = base.trees().map(|t| t.key).collect();
    if keys.len() >= 2 {
        for _ in 0..rng.random_range(0..=6) {
            let (from_key, path) = nodes.choose(rng).unwrap().clone();
            let to = *keys.choose(rng).unwrap();
            if to == from_key {
                continue;
            }
            for _ in 0..rng.random_range(1..=11) {
                base.link_trees(from_key, &path, to).unwrap();
            }
        }
    }
    assert!(base.validate().is_empty(), "{:?}", base.validate());
    base
}

pub fn random_query(rng: &mut StdRng) -> String {
    let clauses = rng.random_range(1..=3);
    let concept = |rng: &mut StdRng| {
        if rng.random_bool(0.85) {
            *NOUNS.choose(rng).unwrap()
        } else {
            *VERBS.choose(rng).unwrap()
        }
    };
    let descriptor = |rng: &mut StdRng| {
        if rng.random_bool(0.1) {
            "mauve"
        } else {
            *ADJECTIVES.choose(rng).unwrap()
        }
    };
    (0..clauses)
        .map(|_| match rng.random_range(0..4) {
            0 => format!("[{}:{}]", concept(rng), descriptor(rng)),
            1 => format!("[{}:?]", concept(rng)),
            2 => format!("[{}]", concept(rng)),
            _ => format!("[?:{}]", descriptor(rng)),
        })
        .collect::<Vec<_>>()
        .join(" AND ")
}
