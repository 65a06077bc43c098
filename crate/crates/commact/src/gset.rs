use std::collections::BTreeMap;
use std::sync::Arc;

use crate::budget::Budget;
use crate::error::{Error, Result};
use crate::words::{Alphabet, Letter, Word};

/// Canonical element token. Tokens are compared as strings; two tokens are
/// the same point exactly when the strings are equal.
pub type Token = String;

pub fn valid_token(token: &str) -> bool {
    !token.is_empty() && token.chars().all(|c| c.is_ascii_graphic() && c != '"')
}

/// Action of the generators on an infinite (or lazily explored) carrier.
///
/// Implementations must be deterministic and must return canonical tokens:
/// applying a letter to a canonical token yields the canonical token of the
/// image point.
pub trait PointOracle: Send + Sync {
    fn apply(&self, letter: Letter, point: &str) -> Result<Token>;

    /// Starting points for breadth-first exploration.
    fn seeds(&self) -> Vec<Token>;

    fn describe(&self) -> String;
}

/// Finite carrier with one validated permutation per generator.
#[derive(Debug, Clone)]
pub struct ExplicitAction {
    tokens: Vec<Token>,
    index: BTreeMap<Token, usize>,
    perms: Vec<Permutation>,
}

/// Permutation of `0..n` stored with its inverse.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Permutation {
    fwd: Vec<usize>,
    inv: Vec<usize>,
}

impl Permutation {
    pub fn new(fwd: Vec<usize>) -> Result<Self> {
        let n = fwd.len();
        let mut inv = vec![usize::MAX; n];
        for (i, &j) in fwd.iter().enumerate() {
            if j >= n {
                return Err(Error::Validation(format!(
                    "permutation image {j} out of range 0..{n}"
                )));
            }
            if inv[j] != usize::MAX {
                return Err(Error::Validation(format!(
                    "permutation not injective at image {j}"
                )));
            }
            inv[j] = i;
        }
        Ok(Permutation { fwd, inv })
    }

    #[must_use]
    pub fn identity(n: usize) -> Self {
        Permutation {
            fwd: (0..n).collect(),
            inv: (0..n).collect(),
        }
    }

    #[must_use]
    pub fn len(&self) -> usize {
        self.fwd.len()
    }

    #[must_use]
    pub fn is_empty(&self) -> bool {
        self.fwd.is_empty()
    }

    #[must_use]
    pub fn apply(&self, i: usize, inverse: bool) -> usize {
        if inverse {
            self.inv[i]
        } else {
            self.fwd[i]
        }
    }

    #[must_use]
    pub fn images(&self) -> &[usize] {
        &self.fwd
    }

    /// Composition acting on the left: `(self.compose(other))(i) = self(other(i))`.
    #[must_use]
    pub fn compose(&self, other: &Permutation) -> Permutation {
        let fwd: Vec<usize> = (0..self.fwd.len()).map(|i| self.fwd[other.fwd[i]]).collect();
        let inv: Vec<usize> = (0..self.fwd.len()).map(|i| other.inv[self.inv[i]]).collect();
        Permutation { fwd, inv }
    }

    #[must_use]
    pub fn inverse(&self) -> Permutation {
        Permutation {
            fwd: self.inv.clone(),
            inv: self.fwd.clone(),
        }
    }
}

impl ExplicitAction {
    pub fn new(tokens: Vec<Token>, perms: Vec<Permutation>) -> Result<Self> {
        if tokens.is_empty() {
            return Err(Error::Validation("carrier must not be empty".into()));
        }
        for t in &tokens {
            if !valid_token(t) {
                return Err(Error::Validation(format!("invalid token {t:?}")));
            }
        }
        let mut index = BTreeMap::new();
        for (i, t) in tokens.iter().enumerate() {
            if index.insert(t.clone(), i).is_some() {
                return Err(Error::Validation(format!("duplicate token {t:?}")));
            }
        }
        for p in &perms {
            if p.len() != tokens.len() {
                return Err(Error::Validation(
                    "permutation length differs from carrier size".into(),
                ));
            }
        }
        Ok(ExplicitAction {
            tokens,
            index,
            perms,
        })
    }

    #[must_use]
    pub fn size(&self) -> usize {
        self.tokens.len()
    }

    #[must_use]
    pub fn tokens(&self) -> &[Token] {
        &self.tokens
    }

    #[must_use]
    pub fn token(&self, i: usize) -> &str {
        &self.tokens[i]
    }

    #[must_use]
    pub fn index_of(&self, token: &str) -> Option<usize> {
        self.index.get(token).copied()
    }

    #[must_use]
    pub fn perm(&self, gen: usize) -> &Permutation {
        &self.perms[gen]
    }

    #[must_use]
    pub fn apply_index(&self, letter: Letter, i: usize) -> usize {
        self.perms[letter.gen].apply(i, letter.inv)
    }
}

/// A group action on a set, presented either explicitly or through an oracle.
pub struct GSet {
    pub name: String,
    pub alphabet: Alphabet,
    backend: BackendImpl,
}

enum BackendImpl {
    Explicit(ExplicitAction),
    Oracle(Arc<dyn PointOracle>),
}

/// Which backend a [`GSet`] uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BackendKind {
    Explicit,
    Oracle,
}

impl GSet {
    pub fn explicit(name: &str, alphabet: Alphabet, action: ExplicitAction) -> Result<Self> {
        if action.perms.len() != alphabet.len() {
            return Err(Error::Validation(
                "one permutation per generator required".into(),
            ));
        }
        Ok(GSet {
            name: name.to_string(),
            alphabet,
            backend: BackendImpl::Explicit(action),
        })
    }

    pub fn oracle(name: &str, alphabet: Alphabet, oracle: Arc<dyn PointOracle>) -> Self {
        GSet {
            name: name.to_string(),
            alphabet,
            backend: BackendImpl::Oracle(oracle),
        }
    }

    #[must_use]
    pub fn backend_kind(&self) -> BackendKind {
        match &self.backend {
            BackendImpl::Explicit(_) => BackendKind::Explicit,
            BackendImpl::Oracle(_) => BackendKind::Oracle,
        }
    }

    #[must_use]
    pub fn explicit_action(&self) -> Option<&ExplicitAction> {
        match &self.backend {
            BackendImpl::Explicit(a) => Some(a),
            BackendImpl::Oracle(_) => None,
        }
    }

    /// Carrier size when finite and known.
    #[must_use]
    pub fn size(&self) -> Option<usize> {
        self.explicit_action().map(ExplicitAction::size)
    }

    /// Starting points for exploration.
    #[must_use]
    pub fn seeds(&self) -> Vec<Token> {
        match &self.backend {
            BackendImpl::Explicit(a) => a.tokens.first().cloned().into_iter().collect(),
            BackendImpl::Oracle(o) => o.seeds(),
        }
    }

    pub fn contains(&self, token: &str) -> bool {
        match &self.backend {
            BackendImpl::Explicit(a) => a.index_of(token).is_some(),
            // Oracles cannot enumerate membership; assume canonical input.
            BackendImpl::Oracle(_) => valid_token(token),
        }
    }

    pub fn apply_letter(&self, letter: Letter, token: &str) -> Result<Token> {
        if letter.gen >= self.alphabet.len() {
            return Err(Error::Validation(format!(
                "letter index {} out of range for alphabet of size {}",
                letter.gen,
                self.alphabet.len()
            )));
        }
        match &self.backend {
            BackendImpl::Explicit(a) => {
                let i = a.index_of(token).ok_or_else(|| {
                    Error::Oracle(format!("token {token:?} not in carrier of {}", self.name))
                })?;
                Ok(a.tokens[a.apply_index(letter, i)].clone())
            }
            BackendImpl::Oracle(o) => o.apply(letter, token),
        }
    }

    /// Applies a word acting on the left: the rightmost letter acts first.
    pub fn apply_word(&self, word: &Word, token: &str) -> Result<Token> {
        let mut current = token.to_string();
        for letter in word.0.iter().rev() {
            current = self.apply_letter(*letter, &current)?;
        }
        Ok(current)
    }

    /// Orbit partition of an explicit carrier, each orbit sorted by index,
    /// orbits ordered by their smallest element.
    pub fn orbits(&self) -> Result<Vec<Vec<usize>>> {
        let action = self.explicit_action().ok_or_else(|| {
            Error::Domain("orbit decomposition requires an explicit carrier".into())
        })?;
        let n = action.size();
        let mut seen = vec![false; n];
        let mut orbits = Vec::new();
        for start in 0..n {
            if seen[start] {
                continue;
            }
            let mut stack = vec![start];
            let mut orbit = Vec::new();
            seen[start] = true;
            while let Some(i) = stack.pop() {
                orbit.push(i);
                for letter in self.alphabet.letters() {
                    let j = action.apply_index(letter, i);
                    if !seen[j] {
                        seen[j] = true;
                        stack.push(j);
                    }
                }
            }
            orbit.sort_unstable();
            orbits.push(orbit);
        }
        Ok(orbits)
    }
}

/// Group element reached by closure, together with a word that produces it.
#[derive(Debug, Clone)]
pub struct GroupElement {
    pub perm: Permutation,
    pub word: Word,
}

/// Enumerates the permutation group generated by an explicit action.
///
/// Breadth-first closure over left multiplication by generators and their
/// inverses; element order is deterministic (discovery order, which is
/// shortlex in the generators). Fails with a budget error when the group is
/// larger than `budget.group_closure`.
pub fn enumerate_group(gset: &GSet, budget: &Budget) -> Result<Vec<GroupElement>> {
    let action = gset
        .explicit_action()
        .ok_or_else(|| Error::Domain("group closure requires an explicit carrier".into()))?;
    let n = action.size();
    let identity = GroupElement {
        perm: Permutation::identity(n),
        word: Word::identity(),
    };
    let mut seen: BTreeMap<Vec<usize>, usize> = BTreeMap::new();
    seen.insert(identity.perm.images().to_vec(), 0);
    let mut elements = vec![identity];
    let mut frontier = vec![0usize];
    while !frontier.is_empty() {
        let mut next = Vec::new();
        for &idx in &frontier {
            let base = elements[idx].clone();
            for letter in gset.alphabet.letters() {
                let gen_perm = if letter.inv {
                    action.perm(letter.gen).inverse()
                } else {
                    action.perm(letter.gen).clone()
                };
                let product = gen_perm.compose(&base.perm);
                if seen.contains_key(product.images()) {
                    continue;
                }
                if elements.len() >= budget.group_closure {
                    return Err(Error::Budget(format!(
                        "group closure exceeded {} elements",
                        budget.group_closure
                    )));
                }
                let word = Word(vec![crate::words::Letter {
                    gen: letter.gen,
                    inv: letter.inv,
                }])
                .concat(&base.word);
                seen.insert(product.images().to_vec(), elements.len());
                next.push(elements.len());
                elements.push(GroupElement {
                    perm: product,
                    word,
                });
            }
        }
        frontier = next;
    }
    Ok(elements)
}
