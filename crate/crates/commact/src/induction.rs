use std::collections::BTreeSet;
use std::sync::Arc;

use serde::Serialize;

use crate::commens::CommensuratedSet;
use crate::error::{Error, Result};
use crate::gset::{GSet, PointOracle, Token};
use crate::words::{Alphabet, Letter, Word};

/// Coset multiplication rule `s · f_i = f_j · h`, as a shared closure.
pub type FactorFn = Arc<dyn Fn(Letter, usize) -> Result<(usize, Word)> + Send + Sync>;

/// Input of the induction construction: a subgroup action together with the
/// coset bookkeeping needed to spread it over a finite-index overgroup.
///
/// The transversal is referenced by index, with index 0 the identity coset.
/// `factor` encodes the multiplication table `s · f_i = f_j · h`: given a
/// generator letter of the big group and a transversal index, it returns the
/// new index and the subgroup element `h` as a word over the subgroup
/// alphabet. `embed` gives, for each subgroup generator, a word over the big
/// alphabet representing the same group element.
pub struct InductionData {
    pub subgroup_set: Arc<GSet>,
    pub subgroup_subset: CommensuratedSet,
    pub big_alphabet: Alphabet,
    pub transversal_size: usize,
    pub factor: FactorFn,
    pub embed: Vec<Word>,
}

/// Report of the induction postcondition checks.
#[derive(Debug, Clone, Serialize)]
pub struct InduceReport {
    pub transversal_size: usize,
    pub induced_diff_sizes: Vec<usize>,
    pub identity_copy_matches: bool,
    /// Triples `(word, ell_subgroup, ell_induced)` over sampled subgroup
    /// words, written in the subgroup alphabet.
    pub ell_comparisons: Vec<(String, u64, u64)>,
    pub ell_dominates: bool,
}

struct InducedOracle {
    inner: Arc<GSet>,
    /// `table[code][i] = (j, h)` with `s·f_i = f_j·h`; code is
    /// `2·gen + inv`.
    table: Vec<Vec<(usize, Word)>>,
}

fn split_token(token: &str) -> Result<(usize, &str)> {
    let (i, x) = token
        .split_once('|')
        .ok_or_else(|| Error::Oracle(format!("induced token {token:?} lacks a coset part")))?;
    let i = i
        .parse::<usize>()
        .map_err(|_| Error::Oracle(format!("bad coset index in token {token:?}")))?;
    Ok((i, x))
}

fn join_token(i: usize, x: &str) -> Token {
    format!("{i}|{x}")
}

impl PointOracle for InducedOracle {
    fn apply(&self, letter: Letter, point: &str) -> Result<Token> {
        let (i, x) = split_token(point)?;
        let (j, h) = self
            .table
            .get(2 * letter.gen + usize::from(letter.inv))
            .and_then(|row| row.get(i))
            .ok_or_else(|| Error::Oracle(format!("coset index {i} out of range")))?;
        Ok(join_token(*j, &self.inner.apply_word(h, x)?))
    }

    fn seeds(&self) -> Vec<Token> {
        let mut out = Vec::new();
        for i in 0..self.table.first().map_or(0, Vec::len) {
            for s in self.inner.seeds() {
                out.push(join_token(i, &s));
            }
        }
        out
    }

    fn describe(&self) -> String {
        format!(
            "induced from {} over {} cosets",
            self.inner.name,
            self.table.first().map_or(0, Vec::len)
        )
    }
}

/// Spreads a commensurated subset of a subgroup action over the whole group.
///
/// The induced carrier is the set of pairs `coset|point`; the induced subset
/// is the union of the transversal copies of the original one. Returns the
/// new action, the new subset and a report of the sampled checks: the
/// identity copy restricts back to the original subset, and the length
/// function of the induced subset dominates the original one on the sampled
/// words (evaluated through `embed`).
pub fn induce(data: &InductionData, sample_words: &[Word]) -> Result<(Arc<GSet>, CommensuratedSet, InduceReport)> {
    if data.transversal_size == 0 {
        return Err(Error::Validation("transversal must be nonempty".into()));
    }
    if data.embed.len() != data.subgroup_set.alphabet.len() {
        return Err(Error::Validation(
            "need one embedding word per subgroup generator".into(),
        ));
    }
    let mut table: Vec<Vec<(usize, Word)>> = Vec::with_capacity(2 * data.big_alphabet.len());
    for gen in 0..data.big_alphabet.len() {
        for inv in [false, true] {
            let mut row = Vec::with_capacity(data.transversal_size);
            for i in 0..data.transversal_size {
                let (j, h) = (data.factor)(Letter { gen, inv }, i).map_err(|e| {
                    Error::Validation(format!(
                        "factorization failed at generator {}, coset {i}: {e}",
                        data.big_alphabet.name(gen)
                    ))
                })?;
                if j >= data.transversal_size {
                    return Err(Error::Validation(format!(
                        "factorization points at coset {j}, only {} cosets given",
                        data.transversal_size
                    )));
                }
                row.push((j, h));
            }
            table.push(row);
        }
    }
    // Transversal sanity: s followed by s⁻¹ must return to the same coset
    // and act trivially on a sample point.
    let probe = data
        .subgroup_set
        .seeds()
        .into_iter()
        .next()
        .ok_or_else(|| Error::Validation("subgroup action has no seed points".into()))?;
    for gen in 0..data.big_alphabet.len() {
        for inv in [false, true] {
            for i in 0..data.transversal_size {
                let (j, h1) = &table[2 * gen + usize::from(inv)][i];
                let (k, h2) = &table[2 * gen + usize::from(!inv)][*j];
                let round_trip = data
                    .subgroup_set
                    .apply_word(&h2.concat(h1), &probe)?;
                if *k != i || round_trip != probe {
                    return Err(Error::Validation(format!(
                        "coset factorization is inconsistent at generator {}, coset {i}: \
                         not a transversal",
                        data.big_alphabet.name(gen)
                    )));
                }
            }
        }
    }

    let oracle = InducedOracle {
        inner: Arc::clone(&data.subgroup_set),
        table: table.clone(),
    };
    let induced_set = Arc::new(GSet::oracle(
        &format!("ind:{}", data.subgroup_set.name),
        data.big_alphabet.clone(),
        Arc::new(oracle),
    ));

    // Difference set of the induced subset along generator s, sliced per
    // coset: the slice at i is {x : 1_M(x) != 1_M(h·x)} for s⁻¹·f_i = f_j·h,
    // which is the symmetric difference of M with its translate by h⁻¹.
    let mut diffs: Vec<BTreeSet<Token>> = Vec::with_capacity(data.big_alphabet.len());
    for gen in 0..data.big_alphabet.len() {
        let mut diff = BTreeSet::new();
        for (i, (_, h)) in table[2 * gen + 1].iter().enumerate() {
            for x in data.subgroup_subset.symmetric_difference(&h.inverse())? {
                diff.insert(join_token(i, &x));
            }
        }
        diffs.push(diff);
    }
    let subgroup_subset = data.subgroup_subset.clone();
    let membership = Arc::new(move |token: &str| -> Result<bool> {
        let (_, x) = split_token(token)?;
        subgroup_subset.member(x)
    });
    let induced_subset =
        CommensuratedSet::from_oracle(Arc::clone(&induced_set), membership, diffs)?;

    // Identity copy: membership over coset 0 agrees with the original subset
    // on seeds and on every element of every declared difference set.
    let mut sample_points: BTreeSet<Token> = data.subgroup_set.seeds().into_iter().collect();
    for gen in 0..data.subgroup_set.alphabet.len() {
        sample_points.extend(data.subgroup_subset.diff_set(gen).iter().cloned());
    }
    let mut identity_copy_matches = true;
    for x in &sample_points {
        if induced_subset.member(&join_token(0, x))? != data.subgroup_subset.member(x)? {
            identity_copy_matches = false;
        }
    }

    let mut ell_comparisons = Vec::new();
    let mut ell_dominates = true;
    for word in sample_words {
        let embedded = embed_word(word, &data.embed);
        let ell_sub = data.subgroup_subset.ell(word)?;
        let ell_ind = induced_subset.ell(&embedded)?;
        if ell_ind < ell_sub {
            ell_dominates = false;
        }
        ell_comparisons.push((
            data.subgroup_set.alphabet.format_word(word),
            ell_sub,
            ell_ind,
        ));
    }

    let report = InduceReport {
        transversal_size: data.transversal_size,
        induced_diff_sizes: (0..data.big_alphabet.len())
            .map(|g| induced_subset.diff_set(g).len())
            .collect(),
        identity_copy_matches,
        ell_comparisons,
        ell_dominates,
    };
    Ok((induced_set, induced_subset, report))
}

/// Rewrites a subgroup word through the per-generator embedding words.
#[must_use]
pub fn embed_word(word: &Word, embed: &[Word]) -> Word {
    let mut out = Word::identity();
    for letter in word.letters() {
        let piece = if letter.inv {
            embed[letter.gen].inverse()
        } else {
            embed[letter.gen].clone()
        };
        out = out.concat(&piece);
    }
    out
}

struct EvenStepOracle;

impl PointOracle for EvenStepOracle {
    fn apply(&self, letter: Letter, point: &str) -> Result<Token> {
        let x: i64 = point
            .parse()
            .map_err(|_| Error::Oracle(format!("bad integer token {point:?}")))?;
        Ok((x + if letter.inv { -2 } else { 2 }).to_string())
    }

    fn seeds(&self) -> Vec<Token> {
        vec!["0".into()]
    }

    fn describe(&self) -> String {
        "integer line, steps of two".into()
    }
}

/// Named induction inputs. `even_line` is the index-2 subgroup of the
/// integers acting on the integers with the nonnegative even numbers as
/// subset and transversal `{1, t}`.
pub fn induction_fixture(name: &str) -> Result<InductionData> {
    if name != "even_line" {
        return Err(Error::Validation(format!(
            "unknown induction fixture {name:?}; available: even_line"
        )));
    }
    let alphabet = Alphabet::new(&["h"])?;
    let sub = Arc::new(GSet::oracle("2z", alphabet, Arc::new(EvenStepOracle)));
    let membership = Arc::new(|tok: &str| -> Result<bool> {
        let x: i64 = tok
            .parse()
            .map_err(|_| Error::Oracle(format!("bad integer token {tok:?}")))?;
        Ok(x >= 0 && x % 2 == 0)
    });
    let diff: BTreeSet<Token> = ["0".to_string()].into();
    let subset = CommensuratedSet::from_oracle(Arc::clone(&sub), membership, vec![diff])?;
    let factor = |letter: Letter, i: usize| -> Result<(usize, Word)> {
        // t·1 = t·1, t·t = 1·t², t⁻¹·1 = t·t⁻², t⁻¹·t = 1·1.
        Ok(match (letter.inv, i) {
            (false, 0) => (1, Word::identity()),
            (false, 1) => (0, Word::single(0)),
            (true, 0) => (1, Word::single(0).inverse()),
            (true, 1) => (0, Word::identity()),
            _ => return Err(Error::Validation("coset out of range".into())),
        })
    };
    Ok(InductionData {
        subgroup_set: sub,
        subgroup_subset: subset,
        big_alphabet: Alphabet::new(&["t"])?,
        transversal_size: 2,
        factor: Arc::new(factor),
        embed: vec![Word::single(0).pow(2)],
    })
}
