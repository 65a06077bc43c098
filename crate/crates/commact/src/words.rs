use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Named generating set of an abstract group.
///
/// Generators are referred to by index; the inverse of generator `i` is not a
/// separate member of the alphabet but is addressed through [`Letter::inv`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Alphabet {
    names: Vec<String>,
}

fn valid_name(name: &str) -> bool {
    !name.is_empty()
        && name
            .chars()
            .all(|c| c.is_ascii_alphanumeric() || c == '_')
}

impl Alphabet {
    pub fn new<S: AsRef<str>>(names: &[S]) -> Result<Self> {
        let names: Vec<String> = names.iter().map(|s| s.as_ref().to_string()).collect();
        if names.is_empty() {
            return Err(Error::Validation("alphabet must not be empty".into()));
        }
        for name in &names {
            if !valid_name(name) {
                return Err(Error::Validation(format!(
                    "generator name must be alphanumeric: {name:?}"
                )));
            }
        }
        let mut sorted = names.clone();
        sorted.sort();
        sorted.dedup();
        if sorted.len() != names.len() {
            return Err(Error::Validation("duplicate generator name".into()));
        }
        Ok(Alphabet { names })
    }

    #[must_use]
    pub fn len(&self) -> usize {
        self.names.len()
    }

    #[must_use]
    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    #[must_use]
    pub fn name(&self, index: usize) -> &str {
        &self.names[index]
    }

    #[must_use]
    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    /// Every letter over this alphabet: generators first, then inverses.
    pub fn letters(&self) -> impl Iterator<Item = Letter> + '_ {
        let n = self.names.len();
        (0..n)
            .map(|gen| Letter { gen, inv: false })
            .chain((0..n).map(|gen| Letter { gen, inv: true }))
    }

    /// Parses a word in either of the two accepted spellings.
    ///
    /// The readable form is whitespace-separated generator names where a
    /// trailing apostrophe marks an inverse: `"a b' a"`. The compact form is
    /// a run of signed 1-based generator indices: `"+1-2+1"`. The empty
    /// string is the identity.
    pub fn parse_word(&self, text: &str) -> Result<Word> {
        let text = text.trim();
        if text.is_empty() {
            return Ok(Word::identity());
        }
        if text.starts_with('+') || text.starts_with('-') {
            return self.parse_compact(text);
        }
        let mut letters = Vec::new();
        for part in text.split_whitespace() {
            let (name, inv) = match part.strip_suffix('\'') {
                Some(base) => (base, true),
                None => (part, false),
            };
            let gen = self
                .index_of(name)
                .ok_or_else(|| Error::Parse(format!("unknown generator {name:?} in word")))?;
            letters.push(Letter { gen, inv });
        }
        Ok(Word(letters))
    }

    fn parse_compact(&self, text: &str) -> Result<Word> {
        let bytes = text.as_bytes();
        let mut letters = Vec::new();
        let mut i = 0;
        while i < bytes.len() {
            let inv = match bytes[i] {
                b'+' => false,
                b'-' => true,
                other => {
                    return Err(Error::Parse(format!(
                        "expected sign in compact word, found {:?}",
                        other as char
                    )))
                }
            };
            i += 1;
            let start = i;
            while i < bytes.len() && bytes[i].is_ascii_digit() {
                i += 1;
            }
            if start == i {
                return Err(Error::Parse("sign without index in compact word".into()));
            }
            let index: usize = text[start..i]
                .parse()
                .map_err(|_| Error::Parse("bad index in compact word".into()))?;
            if index == 0 || index > self.names.len() {
                return Err(Error::Parse(format!(
                    "generator index {index} out of range 1..={}",
                    self.names.len()
                )));
            }
            letters.push(Letter {
                gen: index - 1,
                inv,
            });
        }
        Ok(Word(letters))
    }

    /// Renders a word with this alphabet's generator names.
    #[must_use]
    pub fn format_word(&self, word: &Word) -> String {
        if word.is_identity() {
            return "1".to_string();
        }
        word.0
            .iter()
            .map(|l| {
                let mut s = self.names[l.gen].clone();
                if l.inv {
                    s.push('\'');
                }
                s
            })
            .collect::<Vec<_>>()
            .join(" ")
    }
}

/// One occurrence of a generator or of its inverse.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Letter {
    pub gen: usize,
    pub inv: bool,
}

impl Letter {
    #[must_use]
    pub fn inverse(self) -> Letter {
        Letter {
            gen: self.gen,
            inv: !self.inv,
        }
    }
}

/// Word over an [`Alphabet`].
///
/// Words act on the left: `s t` applied to a point first applies `t`, then
/// `s`. No free reduction is performed; a word is exactly the sequence of
/// letters it was built from.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Word(pub Vec<Letter>);

impl Word {
    #[must_use]
    pub fn identity() -> Word {
        Word(Vec::new())
    }

    #[must_use]
    pub fn single(gen: usize) -> Word {
        Word(vec![Letter { gen, inv: false }])
    }

    #[must_use]
    pub fn len(&self) -> usize {
        self.0.len()
    }

    #[must_use]
    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    #[must_use]
    pub fn is_identity(&self) -> bool {
        self.0.is_empty()
    }

    #[must_use]
    pub fn inverse(&self) -> Word {
        Word(self.0.iter().rev().map(|l| l.inverse()).collect())
    }

    #[must_use]
    pub fn concat(&self, other: &Word) -> Word {
        let mut letters = self.0.clone();
        letters.extend_from_slice(&other.0);
        Word(letters)
    }

    #[must_use]
    pub fn pow(&self, n: i64) -> Word {
        let base = if n < 0 { self.inverse() } else { self.clone() };
        let mut out = Word::identity();
        for _ in 0..n.unsigned_abs() {
            out = out.concat(&base);
        }
        out
    }

    pub fn letters(&self) -> impl Iterator<Item = Letter> + '_ {
        self.0.iter().copied()
    }
}

/// All freely reduced words of length at most `radius`, in breadth-first
/// order starting from the identity. Reduction only cancels a letter followed
/// by its own inverse, so the list covers every group element of word length
/// at most `radius` (possibly with repeats when the group has more
/// relations).
#[must_use]
pub fn word_ball(alphabet: &Alphabet, radius: usize) -> Vec<Word> {
    let mut out = vec![Word::identity()];
    let mut frontier = vec![Word::identity()];
    for _ in 0..radius {
        let mut next = Vec::new();
        for w in &frontier {
            for gen in 0..alphabet.len() {
                for inv in [false, true] {
                    let letter = Letter { gen, inv };
                    if w.0.last() == Some(&letter.inverse()) {
                        continue;
                    }
                    let mut letters = w.0.clone();
                    letters.push(letter);
                    next.push(Word(letters));
                }
            }
        }
        out.extend(next.iter().cloned());
        frontier = next;
    }
    out
}

impl fmt::Display for Word {
    /// Alphabet-independent rendering in the compact signed-index form.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "1");
        }
        for l in &self.0 {
            write!(f, "{}{}", if l.inv { '-' } else { '+' }, l.gen + 1)?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_readable_and_compact_agree() {
        let ab = Alphabet::new(&["a", "b"]).unwrap();
        let w1 = ab.parse_word("a b' a").unwrap();
        let w2 = ab.parse_word("+1-2+1").unwrap();
        assert_eq!(w1, w2);
        assert_eq!(ab.format_word(&w1), "a b' a");
    }

    #[test]
    fn identity_and_inverse() {
        let ab = Alphabet::new(&["t"]).unwrap();
        let w = ab.parse_word("t t t").unwrap();
        assert_eq!(w.inverse().inverse(), w);
        assert!(ab.parse_word("").unwrap().is_identity());
        let conj = w.concat(&w.inverse());
        assert_eq!(conj.len(), 6);
    }

    #[test]
    fn reduced_ball_sizes() {
        let z = Alphabet::new(&["t"]).unwrap();
        let ball = word_ball(&z, 3);
        assert_eq!(ball.len(), 7);
        let f2 = Alphabet::new(&["a", "b"]).unwrap();
        assert_eq!(word_ball(&f2, 2).len(), 17);
        assert!(word_ball(&f2, 0) == vec![Word::identity()]);
    }

    #[test]
    fn bad_names_rejected() {
        assert!(Alphabet::new(&["a b"]).is_err());
        assert!(Alphabet::new(&["a", "a"]).is_err());
        let ab = Alphabet::new(&["a"]).unwrap();
        assert!(ab.parse_word("c").is_err());
        assert!(ab.parse_word("+2").is_err());
    }
}
