//! Recursive-descent parser for the clause grammar:
//!
//! ```text
//! query  := clause ("AND" clause)*
//! clause := "[" slot ":" slot "]" | "[" word "]"
//! slot   := word | "?"
//! ```
//!
//! `AND` is case-insensitive. Words are normalized the same way ingested
//! text is.

use crate::error::{Error, Result};
use crate::ingest::normalize_word;

use super::{Clause, ConceptSlot, DescriptorSlot, Query};

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Open,
    Close,
    Colon,
    Wild,
    Word(String),
}

fn is_word_char(c: char) -> bool {
    !c.is_whitespace() && !matches!(c, '[' | ']' | ':' | '?')
}

fn lex(text: &str) -> Vec<(usize, Tok)> {
    let mut out = Vec::new();
    let mut chars = text.char_indices().peekable();
    while let Some(&(pos, c)) = chars.peek() {
        let tok = match c {
            c if c.is_whitespace() => {
                chars.next();
                continue;
            }
            '[' => Tok::Open,
            ']' => Tok::Close,
            ':' => Tok::Colon,
            '?' => Tok::Wild,
            _ => {
                let mut word = String::new();
                while let Some(&(_, c)) = chars.peek() {
                    if !is_word_char(c) {
                        break;
                    }
                    word.push(c);
                    chars.next();
                }
                out.push((pos, Tok::Word(word)));
                continue;
            }
        };
        chars.next();
        out.push((pos, tok));
    }
    out
}

struct Parser {
    toks: Vec<(usize, Tok)>,
    at: usize,
    end: usize,
}

impl Parser {
    fn pos(&self) -> usize {
        self.toks.get(self.at).map_or(self.end, |(p, _)| *p)
    }

    fn err<T>(&self, message: impl Into<String>) -> Result<T> {
        Err(Error::Parse {
            position: self.pos(),
            message: message.into(),
        })
    }

    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.at).map(|(_, t)| t)
    }

    fn expect(&mut self, want: Tok, what: &str) -> Result<()> {
        if self.peek() == Some(&want) {
            self.at += 1;
            Ok(())
        } else {
            self.err(format!("expected {what}"))
        }
    }

    fn word(&mut self) -> Result<String> {
        let position = self.pos();
        match self.peek() {
            Some(Tok::Word(w)) => {
                let norm = normalize_word(w);
                if norm.is_empty() {
                    return Err(Error::Parse {
                        position,
                        message: format!("{w:?} is not a word"),
                    });
                }
                self.at += 1;
                Ok(norm)
            }
            _ => self.err("expected a word or '?'"),
        }
    }

    fn clause(&mut self) -> Result<Clause> {
        let start = self.pos();
        self.expect(Tok::Open, "'['")?;
        let concept = if self.peek() == Some(&Tok::Wild) {
            self.at += 1;
            ConceptSlot::Wildcard
        } else {
            ConceptSlot::Word(self.word()?)
        };
        let descriptor = if self.peek() == Some(&Tok::Colon) {
            self.at += 1;
            if self.peek() == Some(&Tok::Wild) {
                self.at += 1;
                DescriptorSlot::Wildcard
            } else {
                DescriptorSlot::Word(self.word()?)
            }
        } else {
            DescriptorSlot::Unconstrained
        };
        self.expect(Tok::Close, "']'")?;
        match (&concept, &descriptor) {
            (ConceptSlot::Wildcard, DescriptorSlot::Wildcard) => Err(Error::Parse {
                position: start,
                message: "a clause may hold at most one wildcard".into(),
            }),
            (ConceptSlot::Wildcard, DescriptorSlot::Unconstrained) => Err(Error::Parse {
                position: start,
                message: "a wildcard concept needs a descriptor".into(),
            }),
            _ => Ok(Clause { concept, descriptor }),
        }
    }

    fn query(&mut self) -> Result<Query> {
        if self.toks.is_empty() {
            return self.err("empty query");
        }
        let mut clauses = vec![self.clause()?];
        while let Some(tok) = self.peek() {
            match tok {
                Tok::Word(w) if w.eq_ignore_ascii_case("and") => {
                    self.at += 1;
                    clauses.push(self.clause()?);
                }
                _ => return self.err("expected AND"),
            }
        }
        Ok(Query { clauses })
    }
}

pub fn parse_query(text: &str) -> Result<Query> {
    Parser {
        toks: lex(text),
        at: 0,
        end: text.len(),
    }
    .query()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn word(w: &str) -> ConceptSlot {
        ConceptSlot::Word(w.into())
    }

    #[test]
    fn forward_query() {
        let q = parse_query("[shirt:white] AND [trousers:?]").unwrap();
        assert_eq!(
            q.clauses,
            vec![
                Clause {
                    concept: word("shirt"),
                    descriptor: DescriptorSlot::Word("white".into())
                },
                Clause {
                    concept: word("trousers"),
                    descriptor: DescriptorSlot::Wildcard
                },
            ]
        );
    }

    #[test]
    fn wildcard_concept() {
        let q = parse_query("[?:blue]").unwrap();
        assert_eq!(
            q.clauses,
            vec![Clause {
                concept: ConceptSlot::Wildcard,
                descriptor: DescriptorSlot::Word("blue".into())
            }]
        );
    }

    #[test]
    fn sugar_and_case() {
        let q = parse_query("  [Shirt] and [CAT:Black]").unwrap();
        assert_eq!(
            q.clauses[0],
            Clause {
                concept: word("shirt"),
                descriptor: DescriptorSlot::Unconstrained
            }
        );
        assert_eq!(q.clauses[1].descriptor, DescriptorSlot::Word("black".into()));
        assert_eq!(q.to_string(), "[shirt] AND [cat:black]");
    }

    #[test]
    fn errors_carry_positions() {
        let pos = |t: &str| match parse_query(t) {
            Err(Error::Parse { position, .. }) => position,
            other => panic!("expected parse error for {t:?}, got {other:?}"),
        };
        assert_eq!(pos("[?:?]"), 0);
        assert_eq!(pos(""), 0);
        assert_eq!(pos("   "), 3);
        assert_eq!(pos("[shirt:white"), 12);
        assert_eq!(pos("[shirt] OR [hat]"), 8);
        assert_eq!(pos("[shirt] AND"), 11);
        assert_eq!(pos("[a] AND [?]"), 8);
        assert_eq!(pos("[:x]"), 1);
        assert_eq!(pos("[,,:x]"), 1);
    }

    fn arb_clause() -> impl Strategy<Value = Clause> {
        let w = "[a-z]{1,8}";
        prop_oneof![
            (w, w).prop_map(|(c, d)| Clause {
                concept: ConceptSlot::Word(c),
                descriptor: DescriptorSlot::Word(d)
            }),
            w.prop_map(|c| Clause {
                concept: ConceptSlot::Word(c),
                descriptor: DescriptorSlot::Wildcard
            }),
            w.prop_map(|c| Clause {
                concept: ConceptSlot::Word(c),
                descriptor: DescriptorSlot::Unconstrained
            }),
            w.prop_map(|d| Clause {
                concept: ConceptSlot::Wildcard,
                descriptor: DescriptorSlot::Word(d)
            }),
        ]
    }

    proptest! {
        #[test]
        fn display_round_trips(clauses in prop::collection::vec(arb_clause(), 1..5)) {
            let q = Query { clauses };
            prop_assert_eq!(parse_query(&q.to_string()).unwrap(), q);
        }
    }
}
