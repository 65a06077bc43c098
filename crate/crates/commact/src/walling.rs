use std::collections::BTreeSet;
use std::sync::Arc;

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use serde::Serialize;

use crate::commens::CommensuratedSet;
use crate::error::{Error, Result};
use crate::gset::{GSet, Token};
use crate::words::Word;

/// A point of a walling's point domain: either a group element given as a
/// word, or a point of a carrier set given by its token.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Point {
    Group(Word),
    Carrier(Token),
}

/// Point maps along which wallings are pulled back.
#[derive(Clone)]
pub enum PointMap {
    Identity,
    /// `w ↦ w·basepoint`, from the group into a carrier.
    Orbital { gset: Arc<GSet>, basepoint: Token },
    Constant(Point),
}

impl PointMap {
    pub fn apply(&self, point: &Point) -> Result<Point> {
        match self {
            PointMap::Identity => Ok(point.clone()),
            PointMap::Orbital { gset, basepoint } => match point {
                Point::Group(w) => Ok(Point::Carrier(gset.apply_word(w, basepoint)?)),
                Point::Carrier(_) => Err(Error::Domain(
                    "orbital map takes group elements, got a carrier point".into(),
                )),
            },
            PointMap::Constant(c) => Ok(c.clone()),
        }
    }
}

/// A family of halfspaces indexed by a carrier, with a finite separation
/// count between any two points of the point domain.
///
/// Three shapes cover the desk-scale needs: the dictionary walling of a
/// commensurated subset (halfspaces `W_x = {h : h⁻¹·x ∈ A}` over the group),
/// a fully materialized family over a finite carrier, and pull-backs of
/// either along a point map.
#[derive(Clone)]
pub struct Walling {
    kind: WallingKind,
}

#[derive(Clone)]
enum WallingKind {
    Dictionary(CommensuratedSet),
    Explicit {
        index_set: Arc<GSet>,
        point_set: Arc<GSet>,
        halfspaces: Vec<BTreeSet<Token>>,
    },
    PulledBack {
        base: Box<Walling>,
        map: PointMap,
    },
}

/// Summary of an equivariance spot-check over sampled triples.
#[derive(Debug, Clone, Serialize)]
pub struct EquivarianceReport {
    pub triples_checked: usize,
    pub holds: bool,
    pub counterexample: Option<String>,
}

/// Outcome of the dictionary round trip.
#[derive(Debug, Clone, Serialize)]
pub struct RoundTripReport {
    pub samples_checked: usize,
    pub matches: bool,
}

impl Walling {
    /// The dictionary walling of a commensurated subset: indexed by the
    /// host carrier, with halfspaces over the group.
    #[must_use]
    pub fn from_commensurated(subset: CommensuratedSet) -> Self {
        Walling {
            kind: WallingKind::Dictionary(subset),
        }
    }

    /// A materialized walling over finite carriers. Equivariance
    /// `W_{s·x} = s·W_x` is verified exhaustively for every generator.
    pub fn explicit(
        index_set: Arc<GSet>,
        point_set: Arc<GSet>,
        halfspaces: Vec<BTreeSet<Token>>,
    ) -> Result<Self> {
        let action = index_set
            .explicit_action()
            .ok_or_else(|| Error::Validation("materialized wallings need explicit indices".into()))?;
        if halfspaces.len() != action.size() {
            return Err(Error::Validation(format!(
                "{} halfspaces for {} indices",
                halfspaces.len(),
                action.size()
            )));
        }
        for h in &halfspaces {
            for t in h {
                if !point_set.contains(t) {
                    return Err(Error::Validation(format!(
                        "halfspace element {t:?} is not a point of the domain"
                    )));
                }
            }
        }
        for gen in 0..index_set.alphabet.len() {
            let s = Word::single(gen);
            for i in 0..action.size() {
                let image_index = action.apply_index(crate::words::Letter { gen, inv: false }, i);
                let translated: BTreeSet<Token> = halfspaces[i]
                    .iter()
                    .map(|t| point_set.apply_word(&s, t))
                    .collect::<Result<_>>()?;
                if translated != halfspaces[image_index] {
                    return Err(Error::Validation(format!(
                        "walling is not equivariant: generator {} at index {}",
                        index_set.alphabet.name(gen),
                        action.token(i)
                    )));
                }
            }
        }
        Ok(Walling {
            kind: WallingKind::Explicit {
                index_set,
                point_set,
                halfspaces,
            },
        })
    }

    /// Pull-back along a point map: `(f*W)_x = f⁻¹(W_x)`.
    #[must_use]
    pub fn pull_back(self, map: PointMap) -> Self {
        Walling {
            kind: WallingKind::PulledBack {
                base: Box::new(self),
                map,
            },
        }
    }

    /// The G-set indexing the halfspaces.
    #[must_use]
    pub fn index_set(&self) -> &Arc<GSet> {
        match &self.kind {
            WallingKind::Dictionary(subset) => subset.gset(),
            WallingKind::Explicit { index_set, .. } => index_set,
            WallingKind::PulledBack { base, .. } => base.index_set(),
        }
    }

    /// Whether the given point lies in the halfspace at the given index.
    pub fn membership(&self, index: &str, point: &Point) -> Result<bool> {
        match &self.kind {
            WallingKind::Dictionary(subset) => match point {
                Point::Group(h) => {
                    let moved = subset.gset().apply_word(&h.inverse(), index)?;
                    subset.member(&moved)
                }
                Point::Carrier(_) => Err(Error::Domain(
                    "dictionary halfspaces live over the group, got a carrier point".into(),
                )),
            },
            WallingKind::Explicit {
                index_set,
                halfspaces,
                ..
            } => match point {
                Point::Carrier(t) => {
                    let action = index_set.explicit_action().expect("validated explicit");
                    let i = action
                        .index_of(index)
                        .ok_or_else(|| Error::Oracle(format!("unknown index token {index:?}")))?;
                    Ok(halfspaces[i].contains(t))
                }
                Point::Group(_) => Err(Error::Domain(
                    "materialized halfspaces live over a carrier, got a group point".into(),
                )),
            },
            WallingKind::PulledBack { base, map } => base.membership(index, &map.apply(point)?),
        }
    }

    /// Identity point of the point domain, when the domain is the group.
    fn group_identity_point(&self) -> Option<Point> {
        match &self.kind {
            WallingKind::Dictionary(_) => Some(Point::Group(Word::identity())),
            WallingKind::Explicit { .. } => None,
            WallingKind::PulledBack { map, .. } => match map {
                PointMap::Orbital { .. } => Some(Point::Group(Word::identity())),
                PointMap::Identity => self
                    .base()
                    .expect("pulled-back walling has a base")
                    .group_identity_point(),
                PointMap::Constant(_) => None,
            },
        }
    }

    fn base(&self) -> Option<&Walling> {
        match &self.kind {
            WallingKind::PulledBack { base, .. } => Some(base),
            _ => None,
        }
    }

    /// Number of indices whose halfspace separates the two points.
    pub fn wall_distance(&self, u: &Point, v: &Point) -> Result<u64> {
        match &self.kind {
            WallingKind::Dictionary(subset) => match (u, v) {
                (Point::Group(a), Point::Group(b)) => subset.ell(&a.inverse().concat(b)),
                _ => Err(Error::Domain(
                    "dictionary wall distance takes group points".into(),
                )),
            },
            WallingKind::Explicit { halfspaces, .. } => match (u, v) {
                (Point::Carrier(a), Point::Carrier(b)) => Ok(halfspaces
                    .iter()
                    .filter(|h| h.contains(a) != h.contains(b))
                    .count() as u64),
                _ => Err(Error::Domain(
                    "materialized wall distance takes carrier points".into(),
                )),
            },
            WallingKind::PulledBack { base, map } => {
                base.wall_distance(&map.apply(u)?, &map.apply(v)?)
            }
        }
    }

    /// The separating indices themselves; finite by the walling axiom.
    /// Supported where the index set is explicit or the walling is the
    /// dictionary of a commensurated subset.
    pub fn separating_indices(&self, u: &Point, v: &Point) -> Result<BTreeSet<Token>> {
        match &self.kind {
            WallingKind::Dictionary(subset) => match (u, v) {
                (Point::Group(a), Point::Group(b)) => {
                    // W_x separates u,v iff x ∈ uA △ vA = u·(A △ (u⁻¹v)A).
                    let relative = subset.symmetric_difference(&a.inverse().concat(b))?;
                    relative
                        .into_iter()
                        .map(|x| subset.gset().apply_word(a, &x))
                        .collect()
                }
                _ => Err(Error::Domain(
                    "dictionary wall separation takes group points".into(),
                )),
            },
            WallingKind::Explicit {
                index_set,
                halfspaces,
                ..
            } => match (u, v) {
                (Point::Carrier(a), Point::Carrier(b)) => {
                    let action = index_set.explicit_action().expect("validated explicit");
                    Ok(halfspaces
                        .iter()
                        .enumerate()
                        .filter(|(_, h)| h.contains(a) != h.contains(b))
                        .map(|(i, _)| action.token(i).to_string())
                        .collect())
                }
                _ => Err(Error::Domain(
                    "materialized wall separation takes carrier points".into(),
                )),
            },
            WallingKind::PulledBack { base, map } => {
                base.separating_indices(&map.apply(u)?, &map.apply(v)?)
            }
        }
    }

    /// Recovers the subset of the index set from the dictionary direction:
    /// `{x : identity ∈ W_x}`. Requires a group point domain.
    pub fn recover_membership(&self, index: &str) -> Result<bool> {
        let identity = self.group_identity_point().ok_or_else(|| {
            Error::Domain("subset recovery needs halfspaces over the group".into())
        })?;
        self.membership(index, &identity)
    }

    /// Acts on a point of this walling's point domain.
    pub fn act_on_point(&self, word: &Word, point: &Point) -> Result<Point> {
        match &self.kind {
            WallingKind::Dictionary(_) => match point {
                Point::Group(w) => Ok(Point::Group(word.concat(w))),
                Point::Carrier(_) => Err(Error::Domain("group point expected".into())),
            },
            WallingKind::Explicit { point_set, .. } => match point {
                Point::Carrier(t) => Ok(Point::Carrier(point_set.apply_word(word, t)?)),
                Point::Group(_) => Err(Error::Domain("carrier point expected".into())),
            },
            WallingKind::PulledBack { map, base } => match map {
                PointMap::Orbital { .. } => match point {
                    Point::Group(w) => Ok(Point::Group(word.concat(w))),
                    Point::Carrier(_) => Err(Error::Domain("group point expected".into())),
                },
                PointMap::Identity => base.act_on_point(word, point),
                PointMap::Constant(_) => Err(Error::Domain(
                    "no group action on the domain of a constant map".into(),
                )),
            },
        }
    }

    /// Spot-checks `v ∈ W_{g·x} ⟺ g⁻¹·v ∈ W_x` on sampled triples.
    ///
    /// `indices` and `points` are the sample pools; every combination with
    /// every word in `words` is tested, up to `limit` triples drawn
    /// deterministically from the given seed.
    pub fn equivariance_check(
        &self,
        words: &[Word],
        indices: &[Token],
        points: &[Point],
        seed: u64,
        limit: usize,
    ) -> Result<EquivarianceReport> {
        let mut triples: Vec<(usize, usize, usize)> = Vec::new();
        for g in 0..words.len() {
            for x in 0..indices.len() {
                for v in 0..points.len() {
                    triples.push((g, x, v));
                }
            }
        }
        if triples.len() > limit {
            let mut rng = StdRng::seed_from_u64(seed);
            let mut picked = Vec::with_capacity(limit);
            for _ in 0..limit {
                picked.push(triples[rng.random_range(0..triples.len())]);
            }
            triples = picked;
        }
        let index_set = Arc::clone(self.index_set());
        for &(g, x, v) in &triples {
            let word = &words[g];
            let moved_index = index_set.apply_word(word, &indices[x])?;
            let lhs = self.membership(&moved_index, &points[v])?;
            let moved_point = self.act_on_point(&word.inverse(), &points[v])?;
            let rhs = self.membership(&indices[x], &moved_point)?;
            if lhs != rhs {
                return Ok(EquivarianceReport {
                    triples_checked: triples.len(),
                    holds: false,
                    counterexample: Some(format!(
                        "word {}, index {}, point {:?}",
                        index_set.alphabet.format_word(word),
                        indices[x],
                        points[v]
                    )),
                });
            }
        }
        Ok(EquivarianceReport {
            triples_checked: triples.len(),
            holds: true,
            counterexample: None,
        })
    }
}

/// Round trip subset → walling → subset, compared on the given sample
/// tokens (sampling because oracle carriers cannot be enumerated).
pub fn dictionary_round_trip(
    subset: &CommensuratedSet,
    samples: &[Token],
) -> Result<RoundTripReport> {
    let walling = Walling::from_commensurated(subset.clone());
    let mut matches = true;
    for token in samples {
        if walling.recover_membership(token)? != subset.member(token)? {
            matches = false;
        }
    }
    Ok(RoundTripReport {
        samples_checked: samples.len(),
        matches,
    })
}

/// Checks `#(u·M △ v·M) = d_M(u, v)` with the left side materialized by
/// brute force over an explicit carrier — the walling distance agrees with
/// the plain set difference of translated indicator functions.
pub fn translate_difference_check(
    subset: &CommensuratedSet,
    pairs: &[(Word, Word)],
) -> Result<Vec<(String, String, u64, u64)>> {
    let gset = subset.gset();
    let action = gset
        .explicit_action()
        .ok_or_else(|| Error::Domain("indicator materialization needs a finite carrier".into()))?;
    let walling = Walling::from_commensurated(subset.clone());
    let mut out = Vec::new();
    for (u, v) in pairs {
        let mut translated_u = BTreeSet::new();
        let mut translated_v = BTreeSet::new();
        for i in 0..action.size() {
            let token = action.token(i);
            if subset.member(token)? {
                translated_u.insert(gset.apply_word(u, token)?);
                translated_v.insert(gset.apply_word(v, token)?);
            }
        }
        let brute = translated_u.symmetric_difference(&translated_v).count() as u64;
        let via_walls =
            walling.wall_distance(&Point::Group(u.clone()), &Point::Group(v.clone()))?;
        out.push((
            gset.alphabet.format_word(u),
            gset.alphabet.format_word(v),
            brute,
            via_walls,
        ));
    }
    Ok(out)
}
