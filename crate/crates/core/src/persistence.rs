//! Single-file JSON form of a concept base (`.cbase.json`).
//!
//! Object keys are written in sorted order, so two equal bases serialize to
//! identical bytes.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::config::Config;
use crate::error::{Error, Result};
use crate::model::{descriptor_pair, ConceptBase, ConceptTree, DescriptorLink, GlobalConceptNode};
use crate::query::ResultSet;

pub const FORMAT_VERSION: u64 = 1;
pub const FILE_EXTENSION: &str = ".cbase.json";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BaseDocument {
    pub format_version: u64,
    pub config: Config,
    pub trees: Vec<ConceptTree>,
    pub descriptor_links: Vec<DescriptorLink>,
    pub global_nodes: Vec<GlobalConceptNode>,
    pub results: Vec<ResultSet>,
    pub next_id: u64,
    pub next_tree_key: u64,
    pub maintenance_cycle: u64,
}

fn canonical(value: Value) -> Value {
    match value {
        Value::Object(map) => {
            let mut entries: Vec<(String, Value)> = map.into_iter().collect();
            entries.sort_by(|a, b| a.0.cmp(&b.0));
            let mut out = Map::new();
            for (k, v) in entries {
                out.insert(k, canonical(v));
            }
            Value::Object(out)
        }
        Value::Array(items) => Value::Array(items.into_iter().map(canonical).collect()),
        other => other,
    }
}

impl ConceptBase {
    pub fn to_document(&self) -> BaseDocument {
        BaseDocument {
            format_version: FORMAT_VERSION,
            config: self.config.clone(),
            trees: self.trees.values().cloned().collect(),
            descriptor_links: self.descriptor_links.values().cloned().collect(),
            global_nodes: self.global_nodes.values().cloned().collect(),
            results: self.results.values().cloned().collect(),
            next_id: self.next_id,
            next_tree_key: self.next_tree_key,
            maintenance_cycle: self.maintenance_cycle,
        }
    }

    pub fn to_json(&self) -> String {
        let value = serde_json::to_value(self.to_document()).expect("document serializes");
        let mut text = serde_json::to_string_pretty(&canonical(value)).expect("value serializes");
        text.push('\n');
        text
    }

    pub fn save(&self, destination: impl AsRef<Path>) -> Result<String> {
        let text = self.to_json();
        std::fs::write(destination, &text)?;
        Ok(text)
    }

    pub fn from_document(doc: BaseDocument) -> Result<Self> {
        if doc.format_version != FORMAT_VERSION {
            return Err(Error::UnsupportedVersion(doc.format_version));
        }
        doc.config.check()?;
        let malformed = |path: &str, message: String| Error::Malformed {
            path: path.into(),
            message,
        };

        let mut trees = BTreeMap::new();
        for (i, tree) in doc.trees.into_iter().enumerate() {
            if let Some(dup) = trees.insert(tree.key, tree) {
                return Err(malformed(
                    &format!("trees[{i}].key"),
                    format!("duplicate tree key {}", dup.key),
                ));
            }
        }
        let mut descriptor_links = BTreeMap::new();
        for (i, mut link) in doc.descriptor_links.into_iter().enumerate() {
            let (a, b) = descriptor_pair(link.from_id, link.to_id);
            link.from_id = a;
            link.to_id = b;
            if descriptor_links.insert((a, b), link).is_some() {
                return Err(malformed(
                    &format!("descriptor_links[{i}]"),
                    format!("duplicate link {a}-{b}"),
                ));
            }
        }
        let mut global_nodes = BTreeMap::new();
        for (i, node) in doc.global_nodes.into_iter().enumerate() {
            if global_nodes.insert(node.id, node).is_some() {
                return Err(malformed(
                    &format!("global_nodes[{i}].id"),
                    "duplicate global id".into(),
                ));
            }
        }
        let mut results = BTreeMap::new();
        for (i, result) in doc.results.into_iter().enumerate() {
            if results.insert(result.id, result).is_some() {
                return Err(malformed(&format!("results[{i}].id"), "duplicate result id".into()));
            }
        }

        let base = ConceptBase {
            trees,
            descriptor_links,
            global_nodes,
            results,
            config: doc.config,
            next_id: doc.next_id,
            next_tree_key: doc.next_tree_key,
            maintenance_cycle: doc.maintenance_cycle,
        };
        let errors = base.errors();
        if !errors.is_empty() {
            return Err(Error::CorruptBase(errors));
        }
        Ok(base)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let value: Value = serde_json::from_str(text).map_err(|e| Error::Malformed {
            path: format!("line {} column {}", e.line(), e.column()),
            message: e.to_string(),
        })?;
        match value.get("format_version").and_then(Value::as_u64) {
            Some(FORMAT_VERSION) => {}
            Some(other) => return Err(Error::UnsupportedVersion(other)),
            None => {
                return Err(Error::Malformed {
                    path: "format_version".into(),
                    message: "missing or not an integer".into(),
                })
            }
        }
        let doc: BaseDocument = serde_path_to_error::deserialize(value).map_err(|e| Error::Malformed {
            path: e.path().to_string(),
            message: e.inner().to_string(),
        })?;
        Self::from_document(doc)
    }

    pub fn load(source: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(source)?;
        Self::from_json(&text)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_document() {
        let base = ConceptBase::default();
        let doc: Value = serde_json::from_str(&base.to_json()).unwrap();
        assert_eq!(doc["format_version"], 1);
        assert_eq!(doc["trees"], Value::Array(vec![]));
        assert_eq!(ConceptBase::from_json(&base.to_json()).unwrap(), base);
    }

    #[test]
    fn jack_document_shape() {
        let mut base = ConceptBase::default();
        base.ingest_text("Jack wore a white shirt and blue trousers.").unwrap();
        let doc: Value = serde_json::from_str(&base.to_json()).unwrap();
        let shirt = &doc["trees"][0]["base"]["children"][0]["children"][0];
        assert_eq!(shirt["lemma"], "shirt");
        assert_eq!(shirt["pos"], "noun");
        assert_eq!(shirt["descriptors"][0]["word"], "white");
        assert_eq!(shirt["descriptors"][0]["count"], 1);
        assert_eq!(doc["trees"][0]["key"], "T1");
        assert_eq!(base.to_json(), base.to_json());
    }

    #[test]
    fn keys_are_sorted() {
        let mut base = ConceptBase::default();
        base.ingest_text("cat drank milk").unwrap();
        let text = base.to_json();
        let first_keys: Vec<&str> = text
            .lines()
            .filter(|l| l.starts_with("  \""))
            .map(|l| l.trim().split('"').nth(1).unwrap())
            .collect();
        let mut sorted = first_keys.clone();
        sorted.sort();
        assert_eq!(first_keys, sorted);
    }

    #[test]
    fn version_and_shape_errors() {
        let base = ConceptBase::default();
        let mut doc: Value = serde_json::from_str(&base.to_json()).unwrap();
        doc["format_version"] = 2.into();
        assert!(matches!(
            ConceptBase::from_json(&doc.to_string()),
            Err(Error::UnsupportedVersion(2))
        ));
        assert!(matches!(ConceptBase::from_json("{"), Err(Error::Malformed { .. })));

        let mut doc: Value = serde_json::from_str(&base.to_json()).unwrap();
        doc["next_id"] = "seven".into();
        match ConceptBase::from_json(&doc.to_string()) {
            Err(Error::Malformed { path, .. }) => assert_eq!(path, "next_id"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn count_rule_violation_is_corrupt() {
        let mut base = ConceptBase::default();
        base.ingest_text("cat drank milk").unwrap();
        let mut doc: Value = serde_json::from_str(&base.to_json()).unwrap();
        doc["trees"][0]["base"]["children"][0]["count"] = 5.into();
        match ConceptBase::from_json(&doc.to_string()) {
            Err(Error::CorruptBase(v)) => assert_eq!(v.len(), 1),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn file_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join(format!("jack{FILE_EXTENSION}"));
        let mut base = ConceptBase::default();
        base.ingest_text("Jack wore a white shirt and blue trousers.").unwrap();
        let r = base.execute_query("[shirt:white] AND [trousers:?]").unwrap();
        base.approve_result(r.id, 0).unwrap();
        let written = base.save(&path).unwrap();
        let loaded = ConceptBase::load(&path).unwrap();
        assert_eq!(loaded, base);
        assert_eq!(loaded.to_json(), written);
    }
}
