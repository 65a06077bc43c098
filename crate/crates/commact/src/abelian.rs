//! Displacement functions on `Z^k`: structured fixtures built from ray and
//! torus components, exact slope extraction along rays, recovery of the
//! character multiset in rank at most two, and independence checks for the
//! uniqueness of that recovery.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::Rational64;
use num_traits::{One, Signed, Zero};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use serde::{Deserialize, Serialize};

use crate::budget::Budget;
use crate::commens::ZSubset;
use crate::error::{Error, Result};

/// Smallest horizon handed to the slope detector by the recovery code.
const BASE_HORIZON: i64 = 16;
/// Largest difference period tried before doubling the horizon.
const MAX_PERIOD: usize = 16;

/// Evaluation oracle for a function on `Z^k`.
pub type ZkOracle<'a> = &'a dyn Fn(&[i64]) -> Result<u64>;

/// One building block of a structured `Z^k` fixture: the group acts on the
/// integer line through the character `chi`, displacing either the
/// flip-corrected nonnegative ray (unbounded contribution `ℓ(χ(g))`) or a
/// finite cyclic carrier (bounded, periodic contribution).
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ZkComponent {
    pub chi: Vec<i64>,
    /// Points flipped out of or into the nonnegative ray.
    #[serde(rename = "F", default, skip_serializing_if = "Vec::is_empty")]
    pub flips: Vec<i64>,
    /// Modulus of a finite cyclic carrier instead of the ray.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub torus: Option<u32>,
    /// Member residues of the cyclic carrier.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub subset: Option<Vec<i64>>,
}

#[derive(Debug, Clone)]
enum CompiledComponent {
    Ray { chi: Vec<i64>, subset: ZSubset },
    Torus { chi: Vec<i64>, members: Vec<bool> },
}

/// Structured fixture on `Z^k` whose displacement function is the sum of
/// its components' contributions, evaluated exactly.
#[derive(Debug, Clone)]
pub struct ZkAction {
    k: usize,
    components: Vec<ZkComponent>,
    compiled: Vec<CompiledComponent>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ZkActionJson {
    k: usize,
    components: Vec<ZkComponent>,
}

impl ZkAction {
    pub fn new(k: usize, components: Vec<ZkComponent>) -> Result<Self> {
        if k == 0 || k > 8 {
            return Err(Error::Validation(format!("rank {k} out of range 1..=8")));
        }
        let mut compiled = Vec::with_capacity(components.len());
        for (i, c) in components.iter().enumerate() {
            if c.chi.len() != k {
                return Err(Error::Validation(format!(
                    "component {i}: character has length {}, rank is {k}",
                    c.chi.len()
                )));
            }
            if c.chi.iter().all(|&x| x == 0) {
                return Err(Error::Validation(format!(
                    "component {i}: character must be nonzero"
                )));
            }
            match (c.torus, &c.subset) {
                (None, None) => compiled.push(CompiledComponent::Ray {
                    chi: c.chi.clone(),
                    subset: ZSubset::nat_with_flips(&c.flips),
                }),
                (Some(m), Some(residues)) => {
                    if m == 0 {
                        return Err(Error::Validation(format!(
                            "component {i}: torus modulus must be positive"
                        )));
                    }
                    if !c.flips.is_empty() {
                        return Err(Error::Validation(format!(
                            "component {i}: torus components take a subset, not flips"
                        )));
                    }
                    let mut members = vec![false; m as usize];
                    for &r in residues {
                        members[r.rem_euclid(i64::from(m)) as usize] = true;
                    }
                    compiled.push(CompiledComponent::Torus {
                        chi: c.chi.clone(),
                        members,
                    });
                }
                _ => {
                    return Err(Error::Validation(format!(
                        "component {i}: torus and subset must be given together"
                    )));
                }
            }
        }
        Ok(ZkAction {
            k,
            components,
            compiled,
        })
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let raw: ZkActionJson =
            serde_json::from_str(text).map_err(|e| Error::Parse(format!("fixture: {e}")))?;
        ZkAction::new(raw.k, raw.components)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&ZkActionJson {
            k: self.k,
            components: self.components.clone(),
        })
        .expect("fixture serializes")
    }

    #[must_use]
    pub fn rank(&self) -> usize {
        self.k
    }

    #[must_use]
    pub fn components(&self) -> &[ZkComponent] {
        &self.components
    }

    /// The exact displacement `f(g)`: sum over components of the translate
    /// distance of the component's carrier subset under the shift `χ(g)`.
    pub fn eval(&self, g: &[i64]) -> Result<u64> {
        if g.len() != self.k {
            return Err(Error::Validation(format!(
                "vector has length {}, rank is {}",
                g.len(),
                self.k
            )));
        }
        let mut total = 0u64;
        for c in &self.compiled {
            total += match c {
                CompiledComponent::Ray { chi, subset } => subset.ell(dot(chi, g)?),
                CompiledComponent::Torus { chi, members } => {
                    let m = members.len() as i64;
                    let shift = dot(chi, g)?.rem_euclid(m);
                    (0..m)
                        .filter(|&r| {
                            members[r as usize] != members[(r - shift).rem_euclid(m) as usize]
                        })
                        .count() as u64
                }
            };
        }
        Ok(total)
    }

    /// Character multiset of the unbounded part, in canonical form: each
    /// ray component contributes its primitive character (first nonzero
    /// coordinate positive) with multiplicity equal to the removed content.
    /// Torus components only displace boundedly and contribute nothing.
    #[must_use]
    pub fn character_multiset(&self) -> Vec<Vec<i64>> {
        let mut out = Vec::new();
        for c in &self.compiled {
            if let CompiledComponent::Ray { chi, .. } = c {
                let (prim, content) = primitive_form(chi);
                for _ in 0..content {
                    out.push(prim.clone());
                }
            }
        }
        out.sort();
        out
    }
}

fn dot(chi: &[i64], g: &[i64]) -> Result<i64> {
    let mut acc: i128 = 0;
    for (&a, &b) in chi.iter().zip(g) {
        acc += i128::from(a) * i128::from(b);
    }
    i64::try_from(acc).map_err(|_| Error::Domain("character value overflows i64".into()))
}

/// Divides out the content and fixes the sign so the first nonzero
/// coordinate is positive; returns the primitive covector and the content.
fn primitive_form(chi: &[i64]) -> (Vec<i64>, u64) {
    let content = chi.iter().fold(0i64, |acc, &x| acc.gcd(&x));
    debug_assert!(content > 0, "characters are validated nonzero");
    let mut prim: Vec<i64> = chi.iter().map(|&x| x / content).collect();
    if prim.iter().find(|&&x| x != 0).is_some_and(|&x| x < 0) {
        for x in &mut prim {
            *x = -*x;
        }
    }
    (prim, content as u64)
}

/// Slope of `n ↦ f(n·g)` once the successive differences become exactly
/// periodic, found by scanning small periods and doubling the horizon.
#[derive(Debug, Clone, Serialize)]
pub struct HomogeneousPart {
    /// Exact slope, present only when linearity stabilized.
    pub slope: Option<Rational64>,
    pub stabilized: bool,
    /// Horizon at which the decision was made.
    pub horizon: i64,
    /// Difference period that witnessed linearity.
    pub period: Option<usize>,
}

/// Detects eventual exact linearity of `n ↦ f(n·g)` over `n ∈ [N/2, N]`:
/// some difference period `p` must give a constant jump, and the slope is
/// that jump over `p`. On failure the horizon doubles up to the
/// `horizon_cap` budget, after which the result is flagged unstabilized.
pub fn homogeneous_part(
    f: ZkOracle,
    g: &[i64],
    horizon: i64,
    budget: &Budget,
) -> Result<HomogeneousPart> {
    if horizon < 4 {
        return Err(Error::Validation(format!(
            "slope horizon must be at least 4, got {horizon}"
        )));
    }
    let cap = i64::try_from(budget.horizon_cap).unwrap_or(i64::MAX);
    let mut n = horizon;
    loop {
        let lo = n / 2;
        let values: Vec<i64> = (lo..=n)
            .map(|i| {
                let scaled: Vec<i64> = g.iter().map(|&x| x * i).collect();
                f(&scaled).map(|v| v as i64)
            })
            .collect::<Result<_>>()?;
        let max_period = MAX_PERIOD.min(values.len() / 2);
        for p in 1..=max_period {
            let jump = values[p] - values[0];
            let linear = values
                .windows(p + 1)
                .all(|w| w[p] - w[0] == jump);
            if linear {
                return Ok(HomogeneousPart {
                    slope: Some(Rational64::new(jump, p as i64)),
                    stabilized: true,
                    horizon: n,
                    period: Some(p),
                });
            }
        }
        if n >= cap {
            return Ok(HomogeneousPart {
                slope: None,
                stabilized: false,
                horizon: n,
                period: None,
            });
        }
        n = (2 * n).min(cap);
    }
}

/// Character multiset plus residual data recovered from a displacement
/// oracle. `failure` is set (and `residual_ok` cleared) when the oracle
/// does not behave like a displacement function at the tested scale.
#[derive(Debug, Clone, Serialize)]
pub struct CardinalDefiniteProfile {
    /// Primitive characters, first nonzero coordinate positive, sorted,
    /// repeated per multiplicity.
    pub characters: Vec<Vec<i64>>,
    /// Largest residual `f(g) − Σ|χ_i(g)|` seen on the verification boxes.
    pub sup_b: u64,
    /// Residual stayed nonnegative and stopped growing across nested boxes.
    pub residual_ok: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub failure: Option<String>,
}

/// Soft outcome used inside recovery: a value or a decomposition-failure
/// message (which is a reported result, not an `Error`).
type Soft<T> = std::result::Result<T, String>;

fn f0(f: ZkOracle, g: &[i64], budget: &Budget) -> Result<Soft<Rational64>> {
    let part = homogeneous_part(f, g, BASE_HORIZON, budget)?;
    match part.slope {
        Some(s) => Ok(Ok(s)),
        None => Ok(Err(format!(
            "homogeneous part did not stabilize along {g:?} by horizon {}",
            part.horizon
        ))),
    }
}

/// Transverse slope jump at the lattice direction `w`, measured with the
/// unimodular transversal `t` and doubled outward until the nearby kinks
/// stop contributing: `j(K) = f₀(Kw−t) + f₀(Kw+t) − 2K·f₀(w)` is
/// non-increasing in `K` and constant once exact, so `j(K) = j(2K)` is a
/// proof of stabilization. The returned value is twice the multiplicity of
/// the character vanishing on `w`.
fn transverse_jump(
    f: ZkOracle,
    w: &[i64; 2],
    t: &[i64; 2],
    budget: &Budget,
) -> Result<Soft<Rational64>> {
    let fw = match f0(f, w, budget)? {
        Ok(v) => v,
        Err(e) => return Ok(Err(e)),
    };
    let jump_at = |f: ZkOracle, scale: i64, budget: &Budget| -> Result<Soft<Rational64>> {
        let minus = [scale * w[0] - t[0], scale * w[1] - t[1]];
        let plus = [scale * w[0] + t[0], scale * w[1] + t[1]];
        let a = match f0(f, &minus, budget)? {
            Ok(v) => v,
            Err(e) => return Ok(Err(e)),
        };
        let b = match f0(f, &plus, budget)? {
            Ok(v) => v,
            Err(e) => return Ok(Err(e)),
        };
        Ok(Ok(a + b - Rational64::from_integer(2 * scale) * fw))
    };
    let mut scale = 1i64;
    let mut current = match jump_at(f, scale, budget)? {
        Ok(v) => v,
        Err(e) => return Ok(Err(e)),
    };
    for _ in 0..budget.kink_depth {
        let next = match jump_at(f, 2 * scale, budget)? {
            Ok(v) => v,
            Err(e) => return Ok(Err(e)),
        };
        if next == current {
            return Ok(Ok(current));
        }
        if next > current {
            return Ok(Err(format!(
                "transverse jump at {w:?} grew from {current} to {next}; \
                 the oracle is not subadditive"
            )));
        }
        scale *= 2;
        current = next;
    }
    Ok(Err(format!(
        "transverse jump at {w:?} did not stabilize within the kink depth budget"
    )))
}

/// Kink-ray search over the upper half-plane: mediant subdivision of
/// unimodular cones, descending only where the subadditivity defect
/// `μ(u,v) = f₀(u) + f₀(v) − f₀(u+v)` shows a kink strictly inside.
fn recover_rank2(f: ZkOracle, budget: &Budget) -> Result<Soft<Vec<Vec<i64>>>> {
    let mut kinks: Vec<([i64; 2], u64)> = Vec::new();
    for (w, t) in [([1i64, 0i64], [0i64, 1i64]), ([0, 1], [1, 0])] {
        match check_kink(f, &w, &t, budget)? {
            Ok(Some(mult)) => kinks.push((w, mult)),
            Ok(None) => {}
            Err(e) => return Ok(Err(e)),
        }
    }
    for (u, v) in [([1i64, 0i64], [0i64, 1i64]), ([0, 1], [-1, 0])] {
        if let Err(e) = explore_cone(f, u, v, 0, budget, &mut kinks)? {
            return Ok(Err(e));
        }
    }
    let mut characters = Vec::new();
    for (w, mult) in kinks {
        let (prim, _) = primitive_form(&[-w[1], w[0]]);
        for _ in 0..mult {
            characters.push(prim.clone());
        }
    }
    characters.sort();
    Ok(Ok(characters))
}

/// Stabilized-jump kink test at `w`; returns the multiplicity when `w` is
/// a kink ray. The transversal is unimodular against `w`, so the character
/// vanishing on `w` takes value ±1 on it and the multiplicity is half the
/// jump.
fn check_kink(
    f: ZkOracle,
    w: &[i64; 2],
    t: &[i64; 2],
    budget: &Budget,
) -> Result<Soft<Option<u64>>> {
    debug_assert_eq!((w[0] * t[1] - w[1] * t[0]).abs(), 1);
    let jump = match transverse_jump(f, w, t, budget)? {
        Ok(v) => v,
        Err(e) => return Ok(Err(e)),
    };
    if jump.is_zero() {
        return Ok(Ok(None));
    }
    if jump.is_negative() {
        return Ok(Err(format!(
            "negative transverse jump {jump} at {w:?}; the oracle is not subadditive"
        )));
    }
    let mult = jump / Rational64::from_integer(2);
    if !mult.is_integer() {
        return Ok(Err(format!(
            "slope jump at {w:?} is {jump}, not an even integer; \
             no integral character multiset exists"
        )));
    }
    Ok(Ok(Some(mult.to_integer() as u64)))
}

fn explore_cone(
    f: ZkOracle,
    u: [i64; 2],
    v: [i64; 2],
    depth: usize,
    budget: &Budget,
    kinks: &mut Vec<([i64; 2], u64)>,
) -> Result<Soft<()>> {
    if depth > budget.kink_depth {
        return Err(Error::Budget(format!(
            "kink search between {u:?} and {v:?} exceeded mediant depth {}",
            budget.kink_depth
        )));
    }
    let fu = match f0(f, &u, budget)? {
        Ok(x) => x,
        Err(e) => return Ok(Err(e)),
    };
    let fv = match f0(f, &v, budget)? {
        Ok(x) => x,
        Err(e) => return Ok(Err(e)),
    };
    let w = [u[0] + v[0], u[1] + v[1]];
    let fw = match f0(f, &w, budget)? {
        Ok(x) => x,
        Err(e) => return Ok(Err(e)),
    };
    let mu = fu + fv - fw;
    if mu.is_negative() {
        return Ok(Err(format!(
            "μ({u:?}, {v:?}) = {mu} < 0; the oracle is not subadditive"
        )));
    }
    if mu.is_zero() {
        return Ok(Ok(()));
    }
    // The mediant of a unimodular cone is primitive, and u is unimodular
    // against it, so it doubles as the transversal.
    match check_kink(f, &w, &u, budget)? {
        Ok(Some(mult)) => kinks.push((w, mult)),
        Ok(None) => {}
        Err(e) => return Ok(Err(e)),
    }
    if let Err(e) = explore_cone(f, u, w, depth + 1, budget, kinks)? {
        return Ok(Err(e));
    }
    explore_cone(f, w, v, depth + 1, budget, kinks)
}

fn recover_rank1(f: ZkOracle, budget: &Budget) -> Result<Soft<Vec<Vec<i64>>>> {
    let slope = match f0(f, &[1], budget)? {
        Ok(s) => s,
        Err(e) => return Ok(Err(e)),
    };
    if !slope.is_integer() || slope.is_negative() {
        return Ok(Err(format!(
            "rank-1 homogeneous part is {slope}, not a natural number"
        )));
    }
    Ok(Ok(vec![vec![1]; slope.to_integer() as usize]))
}

/// Residual scan over the full box `[−bound, bound]^k`; `Err` carries the
/// failure message when the residual goes negative.
fn residual_sup(
    f: ZkOracle,
    characters: &[Vec<i64>],
    k: usize,
    bound: i64,
) -> Result<Soft<u64>> {
    let mut sup = 0u64;
    let mut g = vec![-bound; k];
    loop {
        let mut homogeneous = 0i64;
        for chi in characters {
            homogeneous += dot(chi, &g)?.abs();
        }
        let value = f(&g)? as i64;
        let residual = value - homogeneous;
        if residual < 0 {
            return Ok(Err(format!(
                "negative residual {residual} at {g:?}: f = {value}, \
                 homogeneous part = {homogeneous}"
            )));
        }
        sup = sup.max(residual as u64);
        let mut axis = 0;
        loop {
            if axis == k {
                return Ok(Ok(sup));
            }
            if g[axis] < bound {
                g[axis] += 1;
                break;
            }
            g[axis] = -bound;
            axis += 1;
        }
    }
}

/// Recovers the character multiset of a displacement oracle on `Z^k`
/// (rank ≤ 2; higher ranks verify a caller-supplied multiset instead) and
/// checks the residual `b = f − Σ|χ_i|` on the nested boxes of sizes
/// `bound`, `3·bound/2`, and `2·bound`: it must be nonnegative everywhere
/// and its sup must not grow, since a bounded residual of structured
/// origin is saturated well inside the smallest box.
pub fn decompose(
    f: ZkOracle,
    k: usize,
    bound: i64,
    supplied: Option<&[Vec<i64>]>,
    budget: &Budget,
) -> Result<CardinalDefiniteProfile> {
    if bound < 8 {
        return Err(Error::Validation(format!(
            "box bound must be at least 8, got {bound}"
        )));
    }
    if k == 0 {
        return Err(Error::Validation("rank must be positive".into()));
    }
    let recovered: Soft<Vec<Vec<i64>>> = match (k, supplied) {
        (1, None) => recover_rank1(f, budget)?,
        (2, None) => recover_rank2(f, budget)?,
        (_, Some(chars)) => {
            let mut canonical = Vec::with_capacity(chars.len());
            for chi in chars {
                if chi.len() != k {
                    return Err(Error::Validation(format!(
                        "supplied character {chi:?} has length {}, rank is {k}",
                        chi.len()
                    )));
                }
                if chi.iter().all(|&x| x == 0) {
                    return Err(Error::Validation(
                        "supplied characters must be nonzero".into(),
                    ));
                }
                canonical.push(primitive_form(chi).0);
            }
            canonical.sort();
            Ok(canonical)
        }
        _ => {
            return Err(Error::Validation(format!(
                "rank-{k} recovery is not supported; supply the characters to verify"
            )));
        }
    };
    let characters = match recovered {
        Ok(c) => c,
        Err(failure) => {
            return Ok(CardinalDefiniteProfile {
                characters: Vec::new(),
                sup_b: 0,
                residual_ok: false,
                failure: Some(failure),
            });
        }
    };
    let points = (2 * (2 * bound) + 1)
        .checked_pow(k as u32)
        .filter(|&p| p <= 200_000);
    if points.is_none() {
        return Err(Error::Budget(format!(
            "residual verification box (bound {bound}, rank {k}) is too large"
        )));
    }
    let mut sups = Vec::new();
    for b in [bound, 3 * bound / 2, 2 * bound] {
        match residual_sup(f, &characters, k, b)? {
            Ok(sup) => sups.push(sup),
            Err(failure) => {
                return Ok(CardinalDefiniteProfile {
                    characters,
                    sup_b: 0,
                    residual_ok: false,
                    failure: Some(failure),
                });
            }
        }
    }
    if sups[1] > sups[0] || sups[2] > sups[1] {
        return Ok(CardinalDefiniteProfile {
            characters,
            sup_b: sups[2],
            residual_ok: false,
            failure: Some(format!(
                "residual sup grows across nested boxes: {} → {} → {}",
                sups[0], sups[1], sups[2]
            )),
        });
    }
    Ok(CardinalDefiniteProfile {
        characters,
        sup_b: sups[0],
        residual_ok: true,
        failure: None,
    })
}

/// Exact nonsingularity of the Gram matrix of the sampled functions
/// `g ↦ |χ_i(g)|` over the box `[−bound, bound]^k`, witnessing their
/// linear independence. Proportional or zero characters are rejected.
pub fn independence_check(characters: &[Vec<i64>], bound: i64) -> Result<bool> {
    if characters.is_empty() {
        return Err(Error::Validation("no characters supplied".into()));
    }
    let k = characters[0].len();
    for chi in characters {
        if chi.len() != k {
            return Err(Error::Validation(
                "characters must share one rank".into(),
            ));
        }
        if chi.iter().all(|&x| x == 0) {
            return Err(Error::Validation("characters must be nonzero".into()));
        }
    }
    for (i, a) in characters.iter().enumerate() {
        for b in characters.iter().skip(i + 1) {
            if primitive_form(a).0 == primitive_form(b).0 {
                return Err(Error::Validation(format!(
                    "proportional characters {a:?} and {b:?}"
                )));
            }
        }
    }
    if bound < 1 {
        return Err(Error::Validation("box bound must be positive".into()));
    }
    let side = 2 * bound + 1;
    if side.checked_pow(k as u32).is_none_or(|p| p > 200_000) {
        return Err(Error::Budget(format!(
            "independence box (bound {bound}, rank {k}) is too large"
        )));
    }
    let n = characters.len();
    let mut gram = vec![vec![BigInt::zero(); n]; n];
    let mut g = vec![-bound; k];
    loop {
        let values: Vec<i64> = characters
            .iter()
            .map(|chi| dot(chi, &g).map(|v| v.abs()))
            .collect::<Result<_>>()?;
        for i in 0..n {
            for j in i..n {
                let prod = BigInt::from(values[i]) * BigInt::from(values[j]);
                gram[i][j] += &prod;
                if i != j {
                    gram[j][i] += prod;
                }
            }
        }
        let mut axis = 0;
        loop {
            if axis == k {
                return Ok(!bareiss_determinant(gram).is_zero());
            }
            if g[axis] < bound {
                g[axis] += 1;
                break;
            }
            g[axis] = -bound;
            axis += 1;
        }
    }
}

/// Fraction-free Gaussian elimination; every division is exact.
fn bareiss_determinant(mut m: Vec<Vec<BigInt>>) -> BigInt {
    let n = m.len();
    let mut sign = BigInt::one();
    let mut prev = BigInt::one();
    for r in 0..n {
        if m[r][r].is_zero() {
            let Some(swap) = (r + 1..n).find(|&i| !m[i][r].is_zero()) else {
                return BigInt::zero();
            };
            m.swap(r, swap);
            sign = -sign;
        }
        for i in r + 1..n {
            for j in r + 1..n {
                let numerator = &m[i][j] * &m[r][r] - &m[i][r] * &m[r][j];
                m[i][j] = numerator / &prev;
            }
            m[i][r] = BigInt::zero();
        }
        prev = m[r][r].clone();
    }
    sign * m[n - 1][n - 1].clone()
}

/// Random structured fixture for round-trip tests: up to four ray
/// components with small (possibly imprimitive) characters and at most
/// three flips each, plus an occasional torus component.
#[must_use]
pub fn random_zk_action(seed: u64, k: usize) -> ZkAction {
    let mut rng = StdRng::seed_from_u64(seed);
    let mut components = Vec::new();
    let rays = rng.random_range(1..=4);
    for _ in 0..rays {
        let mut chi: Vec<i64> = (0..k).map(|_| rng.random_range(-3..=3)).collect();
        if chi.iter().all(|&x| x == 0) {
            chi[rng.random_range(0..k)] = 1;
        }
        let flips: Vec<i64> = (0..rng.random_range(0..=3))
            .map(|_| rng.random_range(-5..=5))
            .collect();
        components.push(ZkComponent {
            chi,
            flips,
            torus: None,
            subset: None,
        });
    }
    if rng.random_bool(0.3) {
        let modulus = rng.random_range(2..=6u32);
        let subset: Vec<i64> = (0..i64::from(modulus))
            .filter(|_| rng.random_bool(0.5))
            .collect();
        let mut chi: Vec<i64> = (0..k).map(|_| rng.random_range(-2..=2)).collect();
        if chi.iter().all(|&x| x == 0) {
            chi[0] = 1;
        }
        components.push(ZkComponent {
            chi,
            flips: Vec::new(),
            torus: Some(modulus),
            subset: Some(subset),
        });
    }
    ZkAction::new(k, components).expect("random fixture is valid")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn budget() -> Budget {
        Budget::default()
    }

    fn ray(chi: &[i64], flips: &[i64]) -> ZkComponent {
        ZkComponent {
            chi: chi.to_vec(),
            flips: flips.to_vec(),
            torus: None,
            subset: None,
        }
    }

    #[test]
    fn evaluation_sums_ray_lengths() {
        let a = ZkAction::new(1, vec![ray(&[1], &[])]).unwrap();
        assert_eq!(a.eval(&[7]).unwrap(), 7);
        let b = ZkAction::new(2, vec![ray(&[1, 1], &[])]).unwrap();
        assert_eq!(b.eval(&[2, -2]).unwrap(), 0);
        let c = ZkAction::new(2, vec![ray(&[1, 0], &[]), ray(&[1, 1], &[])]).unwrap();
        assert_eq!(c.eval(&[1, 1]).unwrap(), 3);
    }

    #[test]
    fn torus_component_is_bounded_and_periodic() {
        let a = ZkAction::new(
            1,
            vec![ZkComponent {
                chi: vec![1],
                flips: vec![],
                torus: Some(4),
                subset: Some(vec![0, 1]),
            }],
        )
        .unwrap();
        let values: Vec<u64> = (0..9).map(|n| a.eval(&[n]).unwrap()).collect();
        assert_eq!(values, vec![0, 2, 4, 2, 0, 2, 4, 2, 0]);
    }

    #[test]
    fn fixture_json_round_trip_and_validation() {
        let a = ZkAction::new(2, vec![ray(&[2, -2], &[1]), ray(&[0, 1], &[])]).unwrap();
        let b = ZkAction::from_json(&a.to_json()).unwrap();
        assert_eq!(b.eval(&[3, 1]).unwrap(), a.eval(&[3, 1]).unwrap());
        assert!(ZkAction::new(2, vec![ray(&[0, 0], &[])]).is_err());
        assert!(ZkAction::new(2, vec![ray(&[1], &[])]).is_err());
        assert!(ZkAction::from_json("{\"k\":1,\"components\":[],\"x\":0}").is_err());
    }

    #[test]
    fn slope_detection_handles_alternating_residue() {
        let f = |g: &[i64]| -> Result<u64> {
            let n = g[0];
            Ok(n.unsigned_abs() + u64::from(n.rem_euclid(2) == 1))
        };
        let part = homogeneous_part(&f, &[1], 8, &budget()).unwrap();
        assert!(part.stabilized);
        assert_eq!(part.slope, Some(Rational64::from_integer(1)));
        assert_eq!(part.period, Some(2));
    }

    #[test]
    fn slope_along_kernel_and_diagonal() {
        let a = ZkAction::new(2, vec![ray(&[1, 0], &[])]).unwrap();
        let f = |g: &[i64]| a.eval(g);
        let kernel = homogeneous_part(&f, &[0, 1], 8, &budget()).unwrap();
        assert_eq!(kernel.slope, Some(Rational64::zero()));
        let b = ZkAction::new(2, vec![ray(&[1, 1], &[])]).unwrap();
        let g = |v: &[i64]| b.eval(v);
        let diag = homogeneous_part(&g, &[2, 3], 8, &budget()).unwrap();
        assert_eq!(diag.slope, Some(Rational64::from_integer(5)));
    }

    #[test]
    fn slope_flags_non_stabilizing_oracle() {
        // A bump at every power of two puts one jump near the right edge
        // of each sampling window, so the differences are never periodic.
        let f = |g: &[i64]| -> Result<u64> {
            let n = g[0].unsigned_abs();
            Ok(n + if n == 0 { 0 } else { u64::from(n.ilog2()) + 1 })
        };
        let mut tight = budget();
        tight.horizon_cap = 64;
        let part = homogeneous_part(&f, &[1], 8, &tight).unwrap();
        assert!(!part.stabilized);
        assert_eq!(part.slope, None);
        assert_eq!(part.horizon, 64);
    }

    #[test]
    fn decompose_recovers_two_rays_exactly() {
        let a = ZkAction::new(2, vec![ray(&[1, 0], &[]), ray(&[1, 1], &[])]).unwrap();
        let f = |g: &[i64]| a.eval(g);
        let profile = decompose(&f, 2, 8, None, &budget()).unwrap();
        assert_eq!(profile.characters, vec![vec![1, 0], vec![1, 1]]);
        assert_eq!(profile.sup_b, 0);
        assert!(profile.residual_ok);
    }

    #[test]
    fn decompose_of_zero_is_empty() {
        let f = |_: &[i64]| Ok(0u64);
        let profile = decompose(&f, 2, 8, None, &budget()).unwrap();
        assert!(profile.characters.is_empty());
        assert_eq!(profile.sup_b, 0);
        assert!(profile.residual_ok);
    }

    #[test]
    fn decompose_sees_through_perturbation() {
        let a = ZkAction::new(2, vec![ray(&[1, 0], &[-3])]).unwrap();
        let f = |g: &[i64]| a.eval(g);
        let profile = decompose(&f, 2, 8, None, &budget()).unwrap();
        assert_eq!(profile.characters, vec![vec![1, 0]]);
        assert!(profile.sup_b <= 2, "sup_b = {}", profile.sup_b);
        assert!(profile.residual_ok);
    }

    #[test]
    fn decompose_reads_multiplicity_from_content() {
        let a = ZkAction::new(2, vec![ray(&[2, 2], &[])]).unwrap();
        let f = |g: &[i64]| a.eval(g);
        let profile = decompose(&f, 2, 8, None, &budget()).unwrap();
        assert_eq!(profile.characters, vec![vec![1, 1], vec![1, 1]]);
    }

    #[test]
    fn decompose_rank1_counts_ray_components() {
        let a = ZkAction::new(1, vec![ray(&[1], &[2]), ray(&[-1], &[])]).unwrap();
        let f = |g: &[i64]| a.eval(g);
        let profile = decompose(&f, 1, 8, None, &budget()).unwrap();
        assert_eq!(profile.characters, vec![vec![1], vec![1]]);
        assert!(profile.residual_ok);
    }

    #[test]
    fn decompose_flags_sublinear_oracle() {
        let f = |g: &[i64]| -> Result<u64> {
            let n = g.iter().map(|x| x.unsigned_abs()).sum::<u64>();
            Ok(n + (n as f64).sqrt() as u64)
        };
        let mut tight = budget();
        tight.horizon_cap = 64;
        let profile = decompose(&f, 2, 8, None, &tight).unwrap();
        assert!(!profile.residual_ok);
        assert!(profile.failure.is_some());
    }

    #[test]
    fn round_trip_on_random_fixtures() {
        for seed in 0..10 {
            let k = 1 + (seed as usize) % 2;
            let a = random_zk_action(seed, k);
            let f = |g: &[i64]| a.eval(g);
            let profile = decompose(&f, k, 8, None, &budget()).unwrap();
            assert_eq!(
                profile.characters,
                a.character_multiset(),
                "seed {seed}: {}",
                a.to_json()
            );
            assert!(profile.residual_ok, "seed {seed}");
        }
    }

    #[test]
    fn independence_of_sampled_characters() {
        assert!(independence_check(&[vec![1, 0], vec![0, 1]], 6).unwrap());
        assert!(independence_check(&[vec![1, 0], vec![1, 1], vec![0, 1]], 6).unwrap());
        assert!(matches!(
            independence_check(&[vec![1, 0], vec![2, 0]], 6),
            Err(Error::Validation(_))
        ));
        assert!(matches!(
            independence_check(&[vec![1, 0], vec![-2, 0]], 6),
            Err(Error::Validation(_))
        ));
    }

    #[test]
    fn rank1_residual_is_a_bounded_natural(){
        let a = ZkAction::new(1, vec![ray(&[1], &[-4, 2]), ray(&[2], &[])]).unwrap();
        let slope = homogeneous_part(&|g: &[i64]| a.eval(g), &[1], 16, &budget())
            .unwrap()
            .slope
            .unwrap();
        assert_eq!(slope, Rational64::from_integer(3));
        let mut sup = 0i64;
        for n in -200..=200i64 {
            let b = a.eval(&[n]).unwrap() as i64 - 3 * n.abs();
            assert!(b >= 0, "negative residual at {n}");
            sup = sup.max(b);
        }
        assert!(sup <= 10);
    }
}
