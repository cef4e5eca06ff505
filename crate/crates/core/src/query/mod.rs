//! Conjunctive concept:descriptor queries.
//!
//! Each clause names a concept and a descriptor, either of which may be a
//! wildcard slot. Evaluation binds every clause to a tree node, scores the
//! combination and fills the wildcard slots from the bound nodes.

mod engine;
mod parser;

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::model::{DescriptorId, TreeKey};

pub use engine::{Candidate, Evaluation};
pub use parser::parse_query;

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", content = "word", rename_all = "snake_case")]
pub enum ConceptSlot {
    Word(String),
    Wildcard,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", content = "word", rename_all = "snake_case")]
pub enum DescriptorSlot {
    Word(String),
    Wildcard,
    Unconstrained,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Clause {
    pub concept: ConceptSlot,
    pub descriptor: DescriptorSlot,
}

impl fmt::Display for Clause {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let concept = match &self.concept {
            ConceptSlot::Word(w) => w.as_str(),
            ConceptSlot::Wildcard => "?",
        };
        match &self.descriptor {
            DescriptorSlot::Word(w) => write!(f, "[{concept}:{w}]"),
            DescriptorSlot::Wildcard => write!(f, "[{concept}:?]"),
            DescriptorSlot::Unconstrained => write!(f, "[{concept}]"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Query {
    pub clauses: Vec<Clause>,
}

impl fmt::Display for Query {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, clause) in self.clauses.iter().enumerate() {
            if i > 0 {
                f.write_str(" AND ")?;
            }
            write!(f, "{clause}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoundDescriptor {
    pub id: DescriptorId,
    pub word: String,
    pub count: u64,
}

/// One clause bound to one node.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Binding {
    pub key: TreeKey,
    pub path: Vec<String>,
    pub lemma: String,
    pub node_count: u64,
    /// The matched or suggested descriptor, if the clause has one.
    pub descriptor: Option<BoundDescriptor>,
    pub concept_suggested: bool,
    pub descriptor_suggested: bool,
    /// A descriptor wildcard bound to a node with no descriptors.
    pub unfilled: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Solution {
    pub bindings: Vec<Binding>,
    pub score: f64,
    pub cycles: u64,
}

impl Solution {
    pub fn tree_keys(&self) -> std::collections::BTreeSet<TreeKey> {
        self.bindings.iter().map(|b| b.key).collect()
    }
}

/// A clause with its slots filled from a solution.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FilledClause {
    pub concept: String,
    pub descriptor: Option<String>,
    pub concept_suggested: bool,
    pub descriptor_suggested: bool,
    pub unfilled: bool,
}

impl fmt::Display for FilledClause {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.concept)?;
        if self.concept_suggested {
            f.write_str(" (suggested)")?;
        }
        match &self.descriptor {
            Some(d) => {
                write!(f, ": {d}")?;
                if self.descriptor_suggested {
                    f.write_str(" (suggested)")?;
                }
            }
            None if self.unfilled => f.write_str(": ? (unfilled)")?,
            None => {}
        }
        Ok(())
    }
}

/// How a clause's candidates were found.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CandidateSource {
    /// Lookup by concept lemma.
    Concept,
    /// Wildcard concept, reached through descriptor links from descriptors
    /// bound by other clauses.
    LinkedDescriptors,
    /// Wildcard concept, found by scanning every node.
    Scan,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ResultStatus {
    Pending,
    Approved,
    Rejected,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultSet {
    pub id: u64,
    pub query: Query,
    pub solutions: Vec<Solution>,
    pub sources: Vec<CandidateSource>,
    pub status: ResultStatus,
    pub approved_solution: Option<usize>,
}

/// Fills the wildcard slots of `query` from `solution`.
pub fn fill_slots(query: &Query, solution: &Solution) -> Vec<FilledClause> {
    query
        .clauses
        .iter()
        .zip(&solution.bindings)
        .map(|(clause, b)| FilledClause {
            concept: match &clause.concept {
                ConceptSlot::Word(w) => w.clone(),
                ConceptSlot::Wildcard => b.lemma.clone(),
            },
            descriptor: match &clause.descriptor {
                DescriptorSlot::Unconstrained => None,
                _ => b.descriptor.as_ref().map(|d| d.word.clone()),
            },
            concept_suggested: b.concept_suggested,
            descriptor_suggested: b.descriptor_suggested,
            unfilled: b.unfilled,
        })
        .collect()
}
