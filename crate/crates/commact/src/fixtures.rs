use std::collections::BTreeSet;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::commens::{CommensuratedSet, ZSubset};
use crate::error::{Error, Result};
use crate::gset::{ExplicitAction, GSet, Permutation, PointOracle, Token};
use crate::words::{Alphabet, Letter};

/// Entry of the fixture catalogue printed by `commact list-fixtures`.
#[derive(Debug, Clone, Serialize)]
pub struct FixtureInfo {
    pub name: String,
    pub kind: &'static str,
    pub backends: &'static str,
    pub generators: Vec<String>,
    pub description: String,
}

/// Catalogue of the built-in group actions and finite graphs.
#[must_use]
pub fn list_fixtures() -> Vec<FixtureInfo> {
    let mut out = vec![
        FixtureInfo {
            name: "zn:N".into(),
            kind: "gset",
            backends: "explicit, oracle",
            generators: vec!["t".into()],
            description: "cyclic group of order N acting on itself by translation".into(),
        },
        FixtureInfo {
            name: "z".into(),
            kind: "gset",
            backends: "oracle",
            generators: vec!["t".into()],
            description: "the integers acting on themselves by translation".into(),
        },
        FixtureInfo {
            name: "z2".into(),
            kind: "gset",
            backends: "oracle",
            generators: vec!["x".into(), "y".into()],
            description: "the rank-two lattice acting on itself by translation".into(),
        },
        FixtureInfo {
            name: "f2".into(),
            kind: "gset",
            backends: "oracle",
            generators: vec!["a".into(), "b".into()],
            description: "free group of rank two acting on itself by left multiplication".into(),
        },
        FixtureInfo {
            name: "dihedral_inf".into(),
            kind: "gset",
            backends: "oracle",
            generators: vec!["a".into(), "b".into(), "c".into()],
            description: "infinite dihedral group on the integer line through the reflections \
                          x -> -x, x -> 1-x and their composite conjugate x -> -1-x; the line \
                          realizes the cosets of the first reflection's stabilizer"
                .into(),
        },
        FixtureInfo {
            name: "dihedral_inf:ab".into(),
            kind: "gset",
            backends: "oracle",
            generators: vec!["a".into(), "b".into()],
            description: "infinite dihedral group on the integer line, two reflections only".into(),
        },
        FixtureInfo {
            name: "dihedral_inf:cayley".into(),
            kind: "gset",
            backends: "oracle",
            generators: vec!["a".into(), "b".into(), "c".into()],
            description: "infinite dihedral group on itself, three involutions".into(),
        },
        FixtureInfo {
            name: "z_cross_c2".into(),
            kind: "gset",
            backends: "oracle",
            generators: vec!["s".into(), "u".into()],
            description: "product of the integers with order two, acting on the cosets of the \
                          order-two factor (`s` shifts, `u` acts trivially)"
                .into(),
        },
        FixtureInfo {
            name: "z_cross_c2:cayley".into(),
            kind: "gset",
            backends: "oracle",
            generators: vec!["s".into(), "u".into()],
            description: "product of the integers with order two, acting on itself with \
                          generators s = (1, flip) and u = (0, flip)"
                .into(),
        },
        FixtureInfo {
            name: "projective_f2:d".into(),
            kind: "gset",
            backends: "explicit",
            generators: vec!["s".into(), "t".into()],
            description: "binary projective space of dimension d (2..=4) under a transitive \
                          linear group: a multiplier of full multiplicative order plus one \
                          transvection"
                .into(),
        },
        FixtureInfo {
            name: "singer:d".into(),
            kind: "gset",
            backends: "explicit, oracle",
            generators: vec!["s".into()],
            description: "binary projective space of dimension d (2..=4) under the cyclic \
                          group generated by a multiplier of full multiplicative order; \
                          singer:2 is the order-7 cycle on the projective plane"
                .into(),
        },
        FixtureInfo {
            name: "q_auto:d".into(),
            kind: "gset",
            backends: "explicit",
            generators: vec!["swap+flip".into()],
            description: "hypercube vertex set of dimension d (2..=6) under adjacent \
                          coordinate swaps and one coordinate flip"
                .into(),
        },
    ];
    for info in crate::graph::list_graph_fixtures() {
        out.push(info);
    }
    out.sort_by(|a, b| a.name.cmp(&b.name));
    out
}

fn parse_fixture_name(spec: &str) -> (String, Option<String>, bool) {
    let (name, oracle) = match spec.strip_suffix("@oracle") {
        Some(base) => (base, true),
        None => (spec, false),
    };
    match name.split_once(':') {
        Some((head, params)) => (head.to_string(), Some(params.to_string()), oracle),
        None => (name.to_string(), None, oracle),
    }
}

fn parse_size(params: Option<String>, what: &str) -> Result<u64> {
    params
        .as_deref()
        .and_then(|p| p.parse::<u64>().ok())
        .ok_or_else(|| Error::Parse(format!("{what} needs a numeric parameter")))
}

/// Instantiates a built-in group-action fixture by name, e.g. `zn:10`,
/// `singer:3@oracle` or `dihedral_inf:cayley`.
pub fn gset_fixture(spec: &str) -> Result<Arc<GSet>> {
    let (name, params, oracle) = parse_fixture_name(spec);
    let gset = match name.as_str() {
        "zn" => {
            let n = parse_size(params, "zn")?;
            if n == 0 || n > 1 << 20 {
                return Err(Error::Validation(format!("zn size {n} out of range")));
            }
            if oracle {
                GSet::oracle(
                    spec,
                    Alphabet::new(&["t"])?,
                    Arc::new(ModLineOracle { n: n as i64 }),
                )
            } else {
                let tokens: Vec<Token> = (0..n).map(|i| i.to_string()).collect();
                let perm =
                    Permutation::new((0..n as usize).map(|i| (i + 1) % n as usize).collect())?;
                GSet::explicit(
                    spec,
                    Alphabet::new(&["t"])?,
                    ExplicitAction::new(tokens, vec![perm])?,
                )?
            }
        }
        "z" => GSet::oracle(spec, Alphabet::new(&["t"])?, Arc::new(ZLineOracle)),
        "z2" => GSet::oracle(spec, Alphabet::new(&["x", "y"])?, Arc::new(Z2Oracle)),
        "f2" => GSet::oracle(spec, Alphabet::new(&["a", "b"])?, Arc::new(FreeGroupOracle)),
        "dihedral_inf" => match params.as_deref() {
            None => GSet::oracle(
                spec,
                Alphabet::new(&["a", "b", "c"])?,
                Arc::new(DihedralLineOracle { with_conjugate: true }),
            ),
            Some("ab") => GSet::oracle(
                spec,
                Alphabet::new(&["a", "b"])?,
                Arc::new(DihedralLineOracle {
                    with_conjugate: false,
                }),
            ),
            Some("cayley") => GSet::oracle(
                spec,
                Alphabet::new(&["a", "b", "c"])?,
                Arc::new(DihedralCayleyOracle),
            ),
            Some(other) => {
                return Err(Error::Parse(format!("unknown dihedral_inf variant {other:?}")));
            }
        },
        "z_cross_c2" => match params.as_deref() {
            None => GSet::oracle(
                spec,
                Alphabet::new(&["s", "u"])?,
                Arc::new(ZxC2LineOracle),
            ),
            Some("cayley") => GSet::oracle(
                spec,
                Alphabet::new(&["s", "u"])?,
                Arc::new(ZxC2CayleyOracle),
            ),
            Some(other) => {
                return Err(Error::Parse(format!("unknown z_cross_c2 variant {other:?}")));
            }
        },
        "projective_f2" => {
            let d = parse_size(params, "projective_f2")? as usize;
            projective_fixture(spec, d, true, false)?
        }
        "singer" => {
            let d = parse_size(params, "singer")? as usize;
            projective_fixture(spec, d, false, oracle)?
        }
        "q_auto" => {
            let d = parse_size(params, "q_auto")? as usize;
            hypercube_automorphism_fixture(spec, d)?
        }
        other => {
            return Err(Error::Parse(format!("unknown gset fixture {other:?}")));
        }
    };
    Ok(Arc::new(gset))
}

/// Subset description used by scenario files and fixture constructors.
#[derive(Debug, Clone, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct SubsetSpec {
    /// Explicit member tokens (explicit carriers, or integer-token oracles).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tokens: Option<Vec<String>>,
    /// The nonnegative ray of the integer line.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub nat: Option<bool>,
    /// The nonnegative ray with the listed points flipped.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub nat_flips: Option<Vec<i64>>,
    /// A finite set of integers.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub finite: Option<Vec<i64>>,
}

impl SubsetSpec {
    #[must_use]
    pub fn from_tokens(tokens: &[&str]) -> Self {
        SubsetSpec {
            tokens: Some(tokens.iter().map(|s| s.to_string()).collect()),
            ..Default::default()
        }
    }

    fn single_field_count(&self) -> usize {
        usize::from(self.tokens.is_some())
            + usize::from(self.nat.is_some())
            + usize::from(self.nat_flips.is_some())
            + usize::from(self.finite.is_some())
    }

    /// The integer-line normal form, when this spec describes one.
    pub fn as_z_subset(&self) -> Result<ZSubset> {
        if self.nat == Some(true) {
            Ok(ZSubset::nat())
        } else if let Some(flips) = &self.nat_flips {
            Ok(ZSubset::nat_with_flips(flips))
        } else if let Some(points) = &self.finite {
            Ok(ZSubset::finite(points))
        } else {
            Err(Error::Validation(
                "subset spec does not describe an integer-line subset".into(),
            ))
        }
    }
}

/// Builds a commensurated subset over a fixture carrier from its description.
pub fn subset_fixture(gset: &Arc<GSet>, spec: &SubsetSpec) -> Result<CommensuratedSet> {
    if spec.single_field_count() != 1 {
        return Err(Error::Validation(
            "subset spec must set exactly one of: tokens, nat, nat_flips, finite".into(),
        ));
    }
    if gset.explicit_action().is_some() {
        let tokens = spec.tokens.as_ref().ok_or_else(|| {
            Error::Validation("explicit carriers take subsets as token lists".into())
        })?;
        return CommensuratedSet::from_tokens(gset.clone(), tokens);
    }
    // Oracle carriers with integer tokens.
    let (name, ..) = parse_fixture_name(&gset.name);
    match name.as_str() {
        "z" => {
            let z = spec.as_z_subset()?;
            z_commensurated(gset.clone(), z)
        }
        "zn" | "singer" => {
            let tokens = spec.tokens.as_ref().ok_or_else(|| {
                Error::Validation("integer-token oracles take subsets as token lists".into())
            })?;
            let members: BTreeSet<Token> = tokens.iter().cloned().collect();
            if members.len() != tokens.len() {
                return Err(Error::Validation("duplicate member token".into()));
            }
            finite_oracle_commensurated(gset.clone(), members)
        }
        other => Err(Error::Validation(format!(
            "no subset construction available for oracle fixture {other:?}"
        ))),
    }
}

/// Commensurated subset of the integer line from its normal form.
pub fn z_commensurated(gset: Arc<GSet>, z: ZSubset) -> Result<CommensuratedSet> {
    let diff: BTreeSet<Token> = z.step_diff().iter().map(|x| x.to_string()).collect();
    let z_for_member = z.clone();
    CommensuratedSet::from_oracle(
        gset,
        Arc::new(move |tok: &str| {
            let x: i64 = tok
                .parse()
                .map_err(|_| Error::Oracle(format!("bad integer token {tok:?}")))?;
            Ok(z_for_member.member(x))
        }),
        vec![diff],
    )
}

/// Commensurated subset of a finite-carrier oracle: membership by token list,
/// difference sets computed by walking the orbit of the declared members.
fn finite_oracle_commensurated(
    gset: Arc<GSet>,
    members: BTreeSet<Token>,
) -> Result<CommensuratedSet> {
    let mut diffs = Vec::new();
    for gen in 0..gset.alphabet.len() {
        let mut diff = BTreeSet::new();
        // M △ sM touches only members and images of members.
        let mut candidates = members.clone();
        for m in &members {
            candidates.insert(gset.apply_letter(Letter { gen, inv: false }, m)?);
        }
        for x in candidates {
            let pre = gset.apply_letter(Letter { gen, inv: true }, &x)?;
            if members.contains(&x) != members.contains(&pre) {
                diff.insert(x);
            }
        }
        diffs.push(diff);
    }
    let members_for_closure = members.clone();
    CommensuratedSet::from_oracle(
        gset,
        Arc::new(move |tok: &str| Ok(members_for_closure.contains(tok))),
        diffs,
    )
}

// ---------------------------------------------------------------------------
// Integer-token oracles.

fn parse_int(token: &str) -> Result<i64> {
    token
        .parse()
        .map_err(|_| Error::Oracle(format!("bad integer token {token:?}")))
}

struct ZLineOracle;

impl PointOracle for ZLineOracle {
    fn apply(&self, letter: Letter, point: &str) -> Result<Token> {
        let x = parse_int(point)?;
        let step = if letter.inv { -1 } else { 1 };
        Ok((x + step).to_string())
    }

    fn seeds(&self) -> Vec<Token> {
        vec!["0".into()]
    }

    fn describe(&self) -> String {
        "integer translation line".into()
    }
}

struct ModLineOracle {
    n: i64,
}

impl PointOracle for ModLineOracle {
    fn apply(&self, letter: Letter, point: &str) -> Result<Token> {
        let x = parse_int(point)?;
        if !(0..self.n).contains(&x) {
            return Err(Error::Oracle(format!("token {point:?} out of range")));
        }
        let step = if letter.inv { self.n - 1 } else { 1 };
        Ok(((x + step) % self.n).to_string())
    }

    fn seeds(&self) -> Vec<Token> {
        vec!["0".into()]
    }

    fn describe(&self) -> String {
        format!("cyclic translation modulo {}", self.n)
    }
}

struct Z2Oracle;

impl PointOracle for Z2Oracle {
    fn apply(&self, letter: Letter, point: &str) -> Result<Token> {
        let (a, b) = point
            .split_once(',')
            .ok_or_else(|| Error::Oracle(format!("bad pair token {point:?}")))?;
        let mut x = parse_int(a)?;
        let mut y = parse_int(b)?;
        let step = if letter.inv { -1 } else { 1 };
        if letter.gen == 0 {
            x += step;
        } else {
            y += step;
        }
        Ok(format!("{x},{y}"))
    }

    fn seeds(&self) -> Vec<Token> {
        vec!["0,0".into()]
    }

    fn describe(&self) -> String {
        "rank-two lattice translation".into()
    }
}

struct FreeGroupOracle;

impl PointOracle for FreeGroupOracle {
    fn apply(&self, letter: Letter, point: &str) -> Result<Token> {
        let word = if point == "e" { "" } else { point };
        if !word
            .chars()
            .all(|c| matches!(c, 'a' | 'b' | 'A' | 'B'))
        {
            return Err(Error::Oracle(format!("bad reduced word token {point:?}")));
        }
        let head = match (letter.gen, letter.inv) {
            (0, false) => 'a',
            (0, true) => 'A',
            (1, false) => 'b',
            (1, true) => 'B',
            _ => return Err(Error::Oracle("letter out of range".into())),
        };
        let mut out = String::with_capacity(word.len() + 1);
        let mut chars = word.chars();
        match chars.next() {
            Some(first) if cancels(head, first) => {
                out.extend(chars);
            }
            Some(first) => {
                out.push(head);
                out.push(first);
                out.extend(chars);
            }
            None => out.push(head),
        }
        Ok(if out.is_empty() { "e".into() } else { out })
    }

    fn seeds(&self) -> Vec<Token> {
        vec!["e".into()]
    }

    fn describe(&self) -> String {
        "free group of rank two, left multiplication".into()
    }
}

fn cancels(x: char, y: char) -> bool {
    matches!(
        (x, y),
        ('a', 'A') | ('A', 'a') | ('b', 'B') | ('B', 'b')
    )
}

/// Reflections of the integer line generating the infinite dihedral group.
///
/// `a` is `x -> -x`, `b` is `x -> 1 - x`; the optional third generator `c`
/// is the conjugate `x -> -1 - x` of `b` by `a`. All three are involutions.
struct DihedralLineOracle {
    with_conjugate: bool,
}

impl PointOracle for DihedralLineOracle {
    fn apply(&self, letter: Letter, point: &str) -> Result<Token> {
        let x = parse_int(point)?;
        let y = match letter.gen {
            0 => -x,
            1 => 1 - x,
            2 if self.with_conjugate => -1 - x,
            _ => return Err(Error::Oracle("letter out of range".into())),
        };
        Ok(y.to_string())
    }

    fn seeds(&self) -> Vec<Token> {
        vec!["0".into()]
    }

    fn describe(&self) -> String {
        "infinite dihedral reflections on the line".into()
    }
}

/// The infinite dihedral group on itself. Elements are the isometries
/// `x -> x + m` (token `t<m>`) and `x -> -x + m` (token `r<m>`); generators
/// act by composition on the left.
struct DihedralCayleyOracle;

impl PointOracle for DihedralCayleyOracle {
    fn apply(&self, letter: Letter, point: &str) -> Result<Token> {
        let (kind, m) = point.split_at(1);
        let m = parse_int(m)?;
        // Left composition with the reflection x -> k - x turns
        // x -> x + m into x -> (k - m) - x and vice versa.
        let k = match letter.gen {
            0 => 0,
            1 => 1,
            2 => -1,
            _ => return Err(Error::Oracle("letter out of range".into())),
        };
        match kind {
            "t" => Ok(format!("r{}", k - m)),
            "r" => Ok(format!("t{}", k - m)),
            _ => Err(Error::Oracle(format!("bad isometry token {point:?}"))),
        }
    }

    fn seeds(&self) -> Vec<Token> {
        vec!["t0".into()]
    }

    fn describe(&self) -> String {
        "infinite dihedral group on itself".into()
    }
}

/// Cosets of the order-two factor in `Z x C2`, i.e. the integer line where
/// `s` shifts by one and `u` fixes every point.
struct ZxC2LineOracle;

impl PointOracle for ZxC2LineOracle {
    fn apply(&self, letter: Letter, point: &str) -> Result<Token> {
        let x = parse_int(point)?;
        match letter.gen {
            0 => Ok((x + if letter.inv { -1 } else { 1 }).to_string()),
            1 => Ok(x.to_string()),
            _ => Err(Error::Oracle("letter out of range".into())),
        }
    }

    fn seeds(&self) -> Vec<Token> {
        vec!["0".into()]
    }

    fn describe(&self) -> String {
        "Z x C2 on the cosets of the order-two factor".into()
    }
}

/// `Z x C2` on itself with generators `s = (1, flip)` and `u = (0, flip)`.
struct ZxC2CayleyOracle;

impl PointOracle for ZxC2CayleyOracle {
    fn apply(&self, letter: Letter, point: &str) -> Result<Token> {
        let (a, b) = point
            .split_once(',')
            .ok_or_else(|| Error::Oracle(format!("bad pair token {point:?}")))?;
        let n = parse_int(a)?;
        let e = parse_int(b)?;
        if !(0..=1).contains(&e) {
            return Err(Error::Oracle(format!("bad flip component in {point:?}")));
        }
        match letter.gen {
            0 => {
                let step = if letter.inv { -1 } else { 1 };
                Ok(format!("{},{}", n + step, 1 - e))
            }
            1 => Ok(format!("{n},{}", 1 - e)),
            _ => Err(Error::Oracle("letter out of range".into())),
        }
    }

    fn seeds(&self) -> Vec<Token> {
        vec!["0,0".into()]
    }

    fn describe(&self) -> String {
        "Z x C2 on itself".into()
    }
}

// ---------------------------------------------------------------------------
// Binary projective space.

/// Primitive polynomials over the binary field, index = degree.
const GF2_POLY: [u64; 6] = [0, 0b11, 0b111, 0b1011, 0b10011, 0b100101];

fn gf2_times_alpha(v: u64, k: usize) -> u64 {
    let shifted = v << 1;
    if shifted & (1 << k) != 0 {
        shifted ^ GF2_POLY[k]
    } else {
        shifted
    }
}

/// Verifies that multiplication by the polynomial variable has full order
/// `2^k - 1`, i.e. the listed polynomial is primitive.
fn multiplier_cycle(k: usize) -> Result<Vec<u64>> {
    let order = (1u64 << k) - 1;
    let mut cycle = Vec::with_capacity(order as usize);
    let mut v = 1u64;
    for _ in 0..order {
        cycle.push(v);
        v = gf2_times_alpha(v, k);
    }
    if v != 1 || cycle.iter().collect::<BTreeSet<_>>().len() != order as usize {
        return Err(Error::Validation(format!(
            "multiplier is not of full order for degree {k}"
        )));
    }
    Ok(cycle)
}

/// Points of the binary projective space of dimension `d` are the nonzero
/// vectors of a `(d+1)`-dimensional binary space, encoded as bit masks.
/// The multiplier `s` acts with full order `2^{d+1} - 1`, hence transitively;
/// the optional transvection `t` adds the second coordinate to the first.
fn projective_fixture(
    spec: &str,
    d: usize,
    with_transvection: bool,
    oracle: bool,
) -> Result<GSet> {
    if !(2..=4).contains(&d) {
        return Err(Error::Validation(format!(
            "projective dimension {d} out of supported range 2..=4"
        )));
    }
    let k = d + 1;
    let count = (1usize << k) - 1;
    multiplier_cycle(k)?;
    if oracle {
        if with_transvection {
            return Err(Error::Validation(
                "oracle backend is only provided for the cyclic multiplier action".into(),
            ));
        }
        return Ok(GSet::oracle(
            spec,
            Alphabet::new(&["s"])?,
            Arc::new(GfMultiplierOracle { k }),
        ));
    }
    let tokens: Vec<Token> = (1..=count as u64).map(|v| v.to_string()).collect();
    let mult: Vec<usize> = (1..=count as u64)
        .map(|v| gf2_times_alpha(v, k) as usize - 1)
        .collect();
    let mut perms = vec![Permutation::new(mult)?];
    let mut names = vec!["s"];
    if with_transvection {
        let trans: Vec<usize> = (1..=count as u64)
            .map(|v| (if v & 0b10 != 0 { v ^ 0b1 } else { v }) as usize - 1)
            .collect();
        perms.push(Permutation::new(trans)?);
        names.push("t");
    }
    GSet::explicit(
        spec,
        Alphabet::new(&names)?,
        ExplicitAction::new(tokens, perms)?,
    )
}

struct GfMultiplierOracle {
    k: usize,
}

impl PointOracle for GfMultiplierOracle {
    fn apply(&self, letter: Letter, point: &str) -> Result<Token> {
        let v = parse_int(point)? as u64;
        let count = (1u64 << self.k) - 1;
        if v == 0 || v > count {
            return Err(Error::Oracle(format!("token {point:?} out of range")));
        }
        if letter.inv {
            // The multiplier has order 2^k - 1; invert by running the cycle.
            let mut w = v;
            for _ in 0..count - 1 {
                w = gf2_times_alpha(w, self.k);
            }
            Ok(w.to_string())
        } else {
            Ok(gf2_times_alpha(v, self.k).to_string())
        }
    }

    fn seeds(&self) -> Vec<Token> {
        vec!["1".into()]
    }

    fn describe(&self) -> String {
        format!("multiplier on the nonzero vectors of a binary {}-space", self.k)
    }
}

/// The hyperplane `first coordinate = 0` of the binary projective space, as
/// member tokens for `projective_f2:d` and `singer:d`.
#[must_use]
pub fn projective_hyperplane(d: usize) -> Vec<Token> {
    let k = d + 1;
    (1..(1u64 << k))
        .filter(|v| v & 1 == 0)
        .map(|v| v.to_string())
        .collect()
}

// ---------------------------------------------------------------------------
// Hypercube vertex set with a generating set of automorphisms.

fn hypercube_automorphism_fixture(spec: &str, d: usize) -> Result<GSet> {
    if !(2..=6).contains(&d) {
        return Err(Error::Validation(format!(
            "hypercube dimension {d} out of supported range 2..=6"
        )));
    }
    let n = 1usize << d;
    let tokens: Vec<Token> = (0..n)
        .map(|v| {
            (0..d)
                .map(|i| if v >> i & 1 == 1 { '1' } else { '0' })
                .collect()
        })
        .collect();
    let mut perms = Vec::new();
    let mut names = Vec::new();
    for i in 0..d - 1 {
        // Swap coordinates i and i+1.
        let perm: Vec<usize> = (0..n)
            .map(|v| {
                let a = v >> i & 1;
                let b = v >> (i + 1) & 1;
                if a == b {
                    v
                } else {
                    v ^ (1 << i) ^ (1 << (i + 1))
                }
            })
            .collect();
        perms.push(Permutation::new(perm)?);
        names.push(format!("s{}", i + 1));
    }
    perms.push(Permutation::new((0..n).map(|v| v ^ 1).collect())?);
    names.push("f".to_string());
    GSet::explicit(
        spec,
        Alphabet::new(&names)?,
        ExplicitAction::new(tokens, perms)?,
    )
}
