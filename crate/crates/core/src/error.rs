use thiserror::Error;

use crate::model::{DescriptorId, TreeKey};
use crate::validate::Violation;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("unknown tree key {0}")]
    KeyNotFound(TreeKey),

    #[error("no node at path {path:?} in tree {key}")]
    NodeNotFound { key: TreeKey, path: Vec<String> },

    #[error("unknown descriptor {0}")]
    DescriptorNotFound(DescriptorId),

    #[error("descriptor {0} cannot link to itself")]
    SelfLink(DescriptorId),

    #[error("term {lemma:?} rejected: descriptor {word:?} does not fit a {pos} node")]
    RejectedTerm { lemma: String, pos: String, word: String },

    #[error("empty concept sequence")]
    EmptySequence,

    #[error("query parse error at {position}: {message}")]
    Parse { position: usize, message: String },

    #[error("unknown result {0}")]
    UnknownResult(u64),

    #[error("result {0} is already settled")]
    ResultSettled(u64),

    #[error("result {id} has no solution {index}")]
    NoSuchSolution { id: u64, index: usize },

    #[error("result {id} no longer matches the base: {reason}")]
    StaleResult { id: u64, reason: String },

    #[error("cannot group a solution with no bound trees")]
    EmptyGroup,

    #[error("unknown global node {0}")]
    UnknownGlobal(u64),

    #[error("invalid config: {0}")]
    InvalidConfig(String),

    #[error("lexicon line {line}: {message}")]
    Lexicon { line: usize, message: String },

    #[error("unsupported format version {0}")]
    UnsupportedVersion(u64),

    #[error("malformed document at {path}: {message}")]
    Malformed { path: String, message: String },

    #[error("corrupt base: {}", .0.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("; "))]
    CorruptBase(Vec<Violation>),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
