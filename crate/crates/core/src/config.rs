use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const SHIPPED_LEXICON: &str = include_str!("../data/lexicon.tsv");
const SHIPPED_STOPWORDS: &str = include_str!("../data/stopwords.txt");

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WordClass {
    Noun,
    Verb,
    Adjective,
    Adverb,
    Stopword,
    Unknown,
}

impl fmt::Display for WordClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            WordClass::Noun => "noun",
            WordClass::Verb => "verb",
            WordClass::Adjective => "adjective",
            WordClass::Adverb => "adverb",
            WordClass::Stopword => "stopword",
            WordClass::Unknown => "unknown",
        })
    }
}

impl FromStr for WordClass {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "noun" => Ok(WordClass::Noun),
            "verb" => Ok(WordClass::Verb),
            "adjective" => Ok(WordClass::Adjective),
            "adverb" => Ok(WordClass::Adverb),
            other => Err(format!("unknown word class {other:?}")),
        }
    }
}

pub type Lexicon = BTreeMap<String, Vec<WordClass>>;

/// Parses `word<TAB>class[,class...]` lines. `#` starts a comment line.
pub fn parse_lexicon(text: &str) -> Result<Lexicon> {
    let mut lexicon = Lexicon::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim_end_matches('\r');
        if line.trim().is_empty() || line.trim_start().starts_with('#') {
            continue;
        }
        let err = |message: String| Error::Lexicon { line: i + 1, message };
        let (word, classes) = line
            .split_once('\t')
            .ok_or_else(|| err("expected word<TAB>classes".into()))?;
        let word = word.trim().to_lowercase();
        if word.is_empty() {
            return Err(err("empty word".into()));
        }
        let classes = classes
            .split(',')
            .map(|c| c.trim().parse::<WordClass>().map_err(&err))
            .collect::<Result<Vec<_>>>()?;
        lexicon.insert(word, classes);
    }
    Ok(lexicon)
}

pub fn parse_stopwords(text: &str) -> BTreeSet<String> {
    text.lines()
        .map(|l| l.trim().to_lowercase())
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .collect()
}

pub fn shipped_lexicon() -> Lexicon {
    parse_lexicon(SHIPPED_LEXICON).expect("shipped lexicon is well-formed")
}

pub fn shipped_stopwords() -> BTreeSet<String> {
    parse_stopwords(SHIPPED_STOPWORDS)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Config {
    /// Minimum matched prefix before a sequence updates an existing tree.
    pub merge_overlap_threshold: usize,
    pub allow_interior_updates: bool,
    pub promote_t1: u64,
    pub promote_t2: u64,
    pub decay_grace_cycles: u64,
    pub w_same_tree: f64,
    pub w_link: f64,
    pub w_cycle: f64,
    pub max_solutions: usize,
    pub popular_word_base_mode: bool,
    pub stopwords: BTreeSet<String>,
    pub lexicon: Lexicon,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            merge_overlap_threshold: 2,
            allow_interior_updates: true,
            promote_t1: 3,
            promote_t2: 10,
            decay_grace_cycles: 1,
            w_same_tree: 2.0,
            w_link: 1.0,
            w_cycle: 3.0,
            max_solutions: 100,
            popular_word_base_mode: false,
            stopwords: shipped_stopwords(),
            lexicon: shipped_lexicon(),
        }
    }
}

impl Config {
    pub fn check(&self) -> Result<()> {
        let fail = |m: &str| Err(Error::InvalidConfig(m.to_string()));
        if self.merge_overlap_threshold < 1 {
            return fail("merge_overlap_threshold must be at least 1");
        }
        if self.promote_t1 == 0 || self.promote_t2 == 0 {
            return fail("promotion thresholds must be positive");
        }
        if self.promote_t1 >= self.promote_t2 {
            return fail("promote_t1 must be below promote_t2");
        }
        if self.decay_grace_cycles == 0 {
            return fail("decay_grace_cycles must be positive");
        }
        for (name, w) in [
            ("w_same_tree", self.w_same_tree),
            ("w_link", self.w_link),
            ("w_cycle", self.w_cycle),
        ] {
            if !(w.is_finite() && w > 0.0) {
                return Err(Error::InvalidConfig(format!("{name} must be positive")));
            }
        }
        if self.max_solutions == 0 {
            return fail("max_solutions must be positive");
        }
        Ok(())
    }
}
