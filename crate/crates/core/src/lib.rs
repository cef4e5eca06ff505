//! Concept-tree knowledge base.
//!
//! Plain text is split into sentences, each sentence becomes an ordered
//! sequence of noun/verb concepts carrying adjective/adverb descriptors, and
//! each sequence is added to a base of counted concept trees. Conjunctive
//! `[concept:descriptor]` queries bind clauses to tree nodes and fill
//! wildcard slots; approving a result strengthens the links it used.
//!
//! ```
//! use conceptbase::ConceptBase;
//!
//! let mut base = ConceptBase::default();
//! base.ingest_text("Jack wore a white shirt and blue trousers.").unwrap();
//! let result = base.execute_query("[shirt:white] AND [trousers:?]").unwrap();
//! let filled = conceptbase::fill_slots(&result.query, &result.solutions[0]);
//! assert_eq!(filled[1].descriptor.as_deref(), Some("blue"));
//! ```

pub mod builder;
pub mod config;
pub mod error;
pub mod ingest;
pub mod linking;
pub mod model;
pub mod network;
pub mod persistence;
pub mod query;
pub mod validate;

pub use builder::{IngestReport, InsertOutcome, InsertionTarget, MaintenanceReport, SplitEvent, TargetKind};
pub use config::{Config, WordClass};
pub use error::{Error, Result};
pub use ingest::ConceptTerm;
pub use model::{
    ConceptBase, ConceptNode, ConceptTree, Descriptor, DescriptorId, DescriptorLink, GlobalConceptNode, LinkState,
    NodePos, TreeKey, TreeLink,
};
pub use network::ApprovalReport;
pub use persistence::BaseDocument;
pub use query::{fill_slots, parse_query, FilledClause, Query, ResultSet, ResultStatus, Solution};
pub use validate::Violation;
