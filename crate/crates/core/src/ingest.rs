//! Text to concept sequences.
//!
//! Sentences are split on terminators, tokens are normalized and tagged from
//! the configured lexicon (falling back to suffix rules), stopwords are
//! dropped, and each adjective/adverb is attached to the neighbouring
//! concepts of the matching class on both sides.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::config::{Config, WordClass};
use crate::model::NodePos;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Token {
    pub surface: String,
    pub norm: String,
    pub tag: WordClass,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConceptTerm {
    pub lemma: String,
    pub pos: NodePos,
    pub descriptors: Vec<String>,
}

impl ConceptTerm {
    pub fn new(lemma: impl Into<String>, pos: NodePos) -> Self {
        ConceptTerm {
            lemma: lemma.into(),
            pos,
            descriptors: Vec::new(),
        }
    }

    pub fn with_descriptors(mut self, words: &[&str]) -> Self {
        self.descriptors = words.iter().map(|w| w.to_string()).collect();
        self
    }
}

pub fn split_sentences(text: &str) -> Vec<String> {
    text.split(['.', '?', '!', ';', '\n', '\r'])
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(str::to_string)
        .collect()
}

/// Lowercases and strips punctuation, keeping hyphens and apostrophes that
/// sit between two alphanumeric characters.
pub fn normalize_word(word: &str) -> String {
    let chars: Vec<char> = word.chars().collect();
    let mut out = String::with_capacity(word.len());
    for (i, &c) in chars.iter().enumerate() {
        if c.is_alphanumeric() {
            out.extend(c.to_lowercase());
        } else if (c == '-' || c == '\'')
            && i > 0
            && chars[i - 1].is_alphanumeric()
            && chars.get(i + 1).is_some_and(|n| n.is_alphanumeric())
        {
            out.push(c);
        }
    }
    out
}

const ADJECTIVE_SUFFIXES: [&str; 4] = ["ous", "ful", "ive", "less"];
const VERB_SUFFIXES: [&str; 2] = ["ed", "ing"];

fn suffix_class(word: &str) -> Option<WordClass> {
    let has = |suffix: &str| word.len() > suffix.len() && word.ends_with(suffix);
    if has("ly") {
        Some(WordClass::Adverb)
    } else if ADJECTIVE_SUFFIXES.iter().any(|s| has(s)) {
        Some(WordClass::Adjective)
    } else if VERB_SUFFIXES.iter().any(|s| has(s)) {
        Some(WordClass::Verb)
    } else {
        None
    }
}

/// Tags a normalized word: stopword list, then the first lexicon class, then
/// suffix rules, then noun.
pub fn tag_word(word: &str, config: &Config) -> WordClass {
    if config.stopwords.contains(word) {
        return WordClass::Stopword;
    }
    if let Some(first) = config.lexicon.get(word).and_then(|c| c.first()) {
        return *first;
    }
    suffix_class(word).unwrap_or(WordClass::Noun)
}

/// Every class the word may take: all lexicon classes, or the single class
/// [`tag_word`] would give.
pub fn word_classes(word: &str, config: &Config) -> Vec<WordClass> {
    match config.lexicon.get(word) {
        Some(classes) if !classes.is_empty() => classes.clone(),
        _ => vec![tag_word(word, config)],
    }
}

/// The descriptor class a node of `pos` accepts.
pub fn descriptor_class_for(pos: NodePos) -> WordClass {
    match pos {
        NodePos::Noun => WordClass::Adjective,
        NodePos::Verb => WordClass::Adverb,
    }
}

pub fn tokenize(sentence: &str, config: &Config) -> Vec<Token> {
    sentence
        .split_whitespace()
        .filter_map(|surface| {
            let norm = normalize_word(surface);
            if norm.is_empty() {
                return None;
            }
            let tag = tag_word(&norm, config);
            (tag != WordClass::Stopword).then(|| Token {
                surface: surface.to_string(),
                norm,
                tag,
            })
        })
        .collect()
}

fn concept_pos(tag: WordClass) -> Option<NodePos> {
    match tag {
        WordClass::Noun => Some(NodePos::Noun),
        WordClass::Verb => Some(NodePos::Verb),
        _ => None,
    }
}

/// Builds the ordered noun/verb sequence of a tagged sentence.
///
/// A descriptor looks at the nearest concept on each side, skipping other
/// descriptors, and attaches to each one whose class it describes. A
/// descriptor whose neighbours are both of the wrong class is dropped.
pub fn extract_concept_sequence(tokens: &[Token]) -> Vec<ConceptTerm> {
    let mut terms = Vec::new();
    // token index -> term index
    let mut term_at = vec![None; tokens.len()];
    for (i, token) in tokens.iter().enumerate() {
        if let Some(pos) = concept_pos(token.tag) {
            term_at[i] = Some(terms.len());
            terms.push(ConceptTerm::new(token.norm.clone(), pos));
        }
    }

    for (i, token) in tokens.iter().enumerate() {
        let host_pos = match token.tag {
            WordClass::Adjective => NodePos::Noun,
            WordClass::Adverb => NodePos::Verb,
            _ => continue,
        };
        let before = (0..i).rev().find_map(|j| term_at[j]);
        let after = (i + 1..tokens.len()).find_map(|j| term_at[j]);
        for t in [before, after].into_iter().flatten() {
            let term: &mut ConceptTerm = &mut terms[t];
            if term.pos == host_pos && !term.descriptors.contains(&token.norm) {
                term.descriptors.push(token.norm.clone());
            }
        }
    }
    terms
}

/// Sentence text to concept sequence.
pub fn sentence_to_sequence(sentence: &str, config: &Config) -> Vec<ConceptTerm> {
    extract_concept_sequence(&tokenize(sentence, config))
}

pub fn corpus_popular_words(sequences: &[Vec<ConceptTerm>]) -> BTreeMap<String, usize> {
    let mut freq = BTreeMap::new();
    for term in sequences.iter().flatten() {
        *freq.entry(term.lemma.clone()).or_insert(0) += 1;
    }
    freq
}
