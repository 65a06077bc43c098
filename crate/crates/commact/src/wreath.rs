//! Wreath products `H ≀ Z` over the integer line: support lengths, the
//! lamp-carrier action on pairs `(x, μ)` with its exact translate distance
//! and proved bounds, and the proper combination length whose sublevel sets
//! are finite enumerable boxes.

use std::cell::RefCell;
use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use serde::Serialize;

use crate::budget::Budget;
use crate::commens::{CommensuratedSet, ZSubset};
use crate::error::{Error, Result};
use crate::fixtures::{gset_fixture, z_commensurated};
use crate::gset::Token;
use crate::sageev::double_construction;
use crate::words::Word;

/// The lamp group `H`: the infinite cyclic group, or a finite cyclic group
/// when a modulus is given. Elements are integers, reduced representatives
/// `0..m` in the cyclic case.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HGroup {
    modulus: Option<u64>,
}

impl HGroup {
    #[must_use]
    pub fn integers() -> Self {
        HGroup { modulus: None }
    }

    pub fn cyclic(modulus: u64) -> Result<Self> {
        if modulus < 2 {
            return Err(Error::Validation(format!(
                "cyclic lamp group needs modulus at least 2, got {modulus}"
            )));
        }
        Ok(HGroup {
            modulus: Some(modulus),
        })
    }

    /// Parses the same names the carrier fixtures use: `z` for the
    /// integers, `zn:m` for the cyclic group of order `m`.
    pub fn from_fixture(spec: &str) -> Result<Self> {
        if spec == "z" {
            return Ok(HGroup::integers());
        }
        if let Some(m) = spec.strip_prefix("zn:") {
            let modulus = m
                .parse::<u64>()
                .map_err(|_| Error::Parse(format!("bad cyclic order {m:?}")))?;
            return HGroup::cyclic(modulus);
        }
        Err(Error::Validation(format!(
            "unsupported lamp group {spec:?}; use \"z\" or \"zn:m\""
        )))
    }

    #[must_use]
    pub fn reduce(&self, h: i64) -> i64 {
        match self.modulus {
            Some(m) => h.rem_euclid(m as i64),
            None => h,
        }
    }

    #[must_use]
    pub fn add(&self, a: i64, b: i64) -> i64 {
        self.reduce(a.wrapping_add(b))
    }

    #[must_use]
    pub fn negate(&self, h: i64) -> i64 {
        self.reduce(-h)
    }

    /// The counting length `2·[h ≠ 1]` for cyclic lamps (`H` acting on
    /// itself commensurating `{1}`), the ray length `|n|` for integer lamps.
    #[must_use]
    pub fn standard_length(&self, h: i64) -> u64 {
        match self.modulus {
            Some(_) => 2 * u64::from(self.reduce(h) != 0),
            None => h.unsigned_abs(),
        }
    }

    /// All elements of standard length at most `n`.
    #[must_use]
    pub fn ball(&self, n: u64) -> Vec<i64> {
        match self.modulus {
            Some(m) => {
                if n >= 2 {
                    (0..m as i64).collect()
                } else {
                    vec![0]
                }
            }
            None => {
                let n = n as i64;
                (-n..=n).collect()
            }
        }
    }
}

/// Element `w·g` of `H ≀ Z`: a finitely supported lamp configuration
/// (nonidentity values only) and a shift.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct WreathElement {
    w: BTreeMap<i64, i64>,
    g: i64,
}

impl WreathElement {
    pub fn new(h: &HGroup, lamps: &[(i64, i64)], g: i64) -> Result<Self> {
        let mut w = BTreeMap::new();
        for &(pos, value) in lamps {
            let value = h.reduce(value);
            if value == 0 {
                return Err(Error::Validation(format!(
                    "lamp at {pos} carries the identity"
                )));
            }
            if w.insert(pos, value).is_some() {
                return Err(Error::Validation(format!("lamp at {pos} given twice")));
            }
        }
        Ok(WreathElement { w, g })
    }

    #[must_use]
    pub fn identity() -> Self {
        WreathElement {
            w: BTreeMap::new(),
            g: 0,
        }
    }

    #[must_use]
    pub fn is_identity(&self) -> bool {
        self.w.is_empty() && self.g == 0
    }

    #[must_use]
    pub fn shift(&self) -> i64 {
        self.g
    }

    #[must_use]
    pub fn lamps(&self) -> &BTreeMap<i64, i64> {
        &self.w
    }

    #[must_use]
    pub fn support(&self) -> Vec<i64> {
        self.w.keys().copied().collect()
    }

    /// Product `(w₁, g₁)(w₂, g₂) = (w₁ · (g₁·w₂), g₁g₂)`, where the shifted
    /// configuration is `(g·w)(γ) = w(γ − g)`.
    #[must_use]
    pub fn mul(&self, other: &WreathElement, h: &HGroup) -> WreathElement {
        let mut w = self.w.clone();
        for (&pos, &value) in &other.w {
            let shifted = pos + self.g;
            let combined = h.add(w.get(&shifted).copied().unwrap_or(0), value);
            if combined == 0 {
                w.remove(&shifted);
            } else {
                w.insert(shifted, combined);
            }
        }
        WreathElement { w, g: self.g + other.g }
    }

    #[must_use]
    pub fn inverse(&self, h: &HGroup) -> WreathElement {
        let w = self
            .w
            .iter()
            .map(|(&pos, &value)| (pos - self.g, h.negate(value)))
            .collect();
        WreathElement { w, g: -self.g }
    }
}

/// Sum of a lamp length over the configuration; with the counting length
/// this is twice the support size.
#[must_use]
pub fn support_length(e: &WreathElement, ell0: &dyn Fn(i64) -> u64) -> u64 {
    e.w.values().map(|&h| ell0(h)).sum()
}

/// A point of the lamp-carrier set: a carrier point `x` together with a
/// finitely supported configuration `μ` on the shifts that do NOT pull `x`
/// into the commensurated subset (`γ ∈ A_x ⟺ γ⁻¹·x ∈ M`; keys of `μ` lie
/// outside `A_x`).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ZxPoint {
    pub x: Token,
    pub mu: BTreeMap<i64, i64>,
}

type SplitSets = (BTreeSet<Token>, BTreeSet<Token>);

/// A commensurated subset of a line-like carrier (single-generator
/// alphabet), with memoized split difference sets `(M ∖ γM, γM ∖ M)` for
/// whole-group shifts `γ ∈ Z`.
pub struct ZxData {
    base: CommensuratedSet,
    h: HGroup,
    cache: RefCell<BTreeMap<i64, Arc<SplitSets>>>,
}

impl ZxData {
    pub fn new(base: CommensuratedSet, h: HGroup) -> Result<Self> {
        if base.gset().alphabet.len() != 1 {
            return Err(Error::Validation(format!(
                "the carrier of the lamp construction must have a single \
                 generator, {} has {}",
                base.gset().name,
                base.gset().alphabet.len()
            )));
        }
        Ok(ZxData {
            base,
            h,
            cache: RefCell::new(BTreeMap::new()),
        })
    }

    #[must_use]
    pub fn base(&self) -> &CommensuratedSet {
        &self.base
    }

    #[must_use]
    pub fn lamp_group(&self) -> &HGroup {
        &self.h
    }

    fn word(&self, g: i64) -> Word {
        Word::single(0).pow(g)
    }

    fn split(&self, g: i64) -> Result<Arc<SplitSets>> {
        if let Some(hit) = self.cache.borrow().get(&g) {
            return Ok(hit.clone());
        }
        let sets = Arc::new(self.base.translate_split(&self.word(g))?);
        self.cache.borrow_mut().insert(g, sets.clone());
        Ok(sets)
    }

    fn shift_token(&self, g: i64, token: &str) -> Result<Token> {
        self.base.gset().apply_word(&self.word(g), token)
    }

    /// `γ ∈ A_x`, i.e. `γ⁻¹·x ∈ M`.
    fn in_a(&self, gamma: i64, x: &str) -> Result<bool> {
        let pre = self.shift_token(-gamma, x)?;
        self.base.member(&pre)
    }

    pub fn validate_point(&self, p: &ZxPoint) -> Result<()> {
        self.base.gset().apply_word(&Word::identity(), &p.x)?;
        for (&gamma, &value) in &p.mu {
            if self.h.reduce(value) != value || value == 0 {
                return Err(Error::Validation(format!(
                    "configuration value {value} at {gamma} is not a reduced \
                     nonidentity lamp"
                )));
            }
            if self.in_a(gamma, &p.x)? {
                return Err(Error::Validation(format!(
                    "configuration key {gamma} pulls {:?} into the subset",
                    p.x
                )));
            }
        }
        Ok(())
    }
}

/// Action of `w·g` on a lamp-carrier point: the shift moves the carrier
/// point and relabels the configuration (`g·(x,μ) = (gx, g·μ)` with
/// `(g·μ)(γ) = μ(g⁻¹γ)`), then the lamps act by `λ·(x,μ) = (x, λ|_{A_x^c}·μ)`
/// — only the lamps outside `A_x` touch the configuration.
pub fn zx_act(e: &WreathElement, p: &ZxPoint, data: &ZxData) -> Result<ZxPoint> {
    let x = data.shift_token(e.g, &p.x)?;
    let mut mu: BTreeMap<i64, i64> = p
        .mu
        .iter()
        .map(|(&gamma, &value)| (gamma + e.g, value))
        .collect();
    for (&gamma, &value) in &e.w {
        if data.in_a(gamma, &x)? {
            continue;
        }
        let combined = data.h.add(mu.get(&gamma).copied().unwrap_or(0), value);
        if combined == 0 {
            mu.remove(&gamma);
        } else {
            mu.insert(gamma, combined);
        }
    }
    let out = ZxPoint { x, mu };
    data.validate_point(&out)?;
    Ok(out)
}

/// The two sides of `N △ (wg)N` in the lamp-carrier set, projected to their
/// carrier points: `N ∖ wgN` is carried by `(M ∖ gM) ∪ ⋃_γ (M ∖ γM)` and
/// `wgN ∖ N` by `(gM ∖ M) ∪ ⋃_γ (gM ∖ γM)`, with `γ` over the support.
pub fn zx_translate_sets(
    e: &WreathElement,
    data: &ZxData,
) -> Result<(BTreeSet<Token>, BTreeSet<Token>)> {
    let g_split = data.split(e.g)?;
    let mut gone = g_split.0.clone();
    let mut gained = g_split.1.clone();
    for &gamma in e.w.keys() {
        gone.extend(data.split(gamma)?.0.iter().cloned());
        // gM ∖ γM is the g-shift of M ∖ (γ−g)M.
        for token in &data.split(gamma - e.g)?.0 {
            gained.insert(data.shift_token(e.g, token)?);
        }
    }
    Ok((gone, gained))
}

/// Exact translate distance `#(N △ (wg)N)` of the lamp-carrier subset.
pub fn ell_zx(e: &WreathElement, data: &ZxData) -> Result<u64> {
    let (gone, gained) = zx_translate_sets(e, data)?;
    Ok((gone.len() + gained.len()) as u64)
}

/// The translate distance of an element against its proved bounds.
#[derive(Debug, Clone, Serialize)]
pub struct ZxBoundsReport {
    pub ell: u64,
    /// `#(M △ gM)` — first lower bound.
    pub translate_distance: u64,
    /// `sup_γ #(M ∖ γM)` over the support — second lower bound.
    pub support_drop_sup: u64,
    /// `#(M △ gM) + Σ_γ #(M ∖ γM) + Σ_γ #(M ∖ (g⁻¹γ)M)` — upper bound.
    pub upper_bound: u64,
    pub lower_translate_ok: bool,
    pub lower_support_ok: bool,
    pub upper_ok: bool,
}

impl ZxBoundsReport {
    #[must_use]
    pub fn all_ok(&self) -> bool {
        self.lower_translate_ok && self.lower_support_ok && self.upper_ok
    }
}

pub fn zx_bounds_check(e: &WreathElement, data: &ZxData) -> Result<ZxBoundsReport> {
    let ell = ell_zx(e, data)?;
    let g_split = data.split(e.g)?;
    let translate_distance = (g_split.0.len() + g_split.1.len()) as u64;
    let mut support_drop_sup = 0u64;
    let mut upper = translate_distance;
    for &gamma in e.w.keys() {
        let drop = data.split(gamma)?.0.len() as u64;
        support_drop_sup = support_drop_sup.max(drop);
        upper += drop + data.split(gamma - e.g)?.0.len() as u64;
    }
    Ok(ZxBoundsReport {
        ell,
        translate_distance,
        support_drop_sup,
        upper_bound: upper,
        lower_translate_ok: ell >= translate_distance,
        lower_support_ok: ell >= support_drop_sup,
        upper_ok: ell <= upper,
    })
}

/// Outcome of enumerating a sublevel set of the combined proper length.
#[derive(Debug, Clone, Serialize)]
pub struct PwReport {
    pub n: u64,
    /// Size of `F_n`, the shifts of base length at most `n`.
    pub shift_window: usize,
    /// Size of `F′_n`, the lamp ball of standard length at most `n`.
    pub lamp_ball: usize,
    /// Cardinality of the predicted box `(F′_n)^{F_n} × F_n`.
    pub box_size: u128,
    pub sublevel_size: usize,
    /// Every sublevel element sits in the predicted box and satisfies the
    /// justifying bound `ℓ(wg) ≥ sup_{γ∈{g}∪Supp(w)} ℓ_M(γ)`.
    pub contained: bool,
}

/// Enumerates the sublevel set `{ e : ℓ(e) + ℓ′(e) ≤ n }` of the combined
/// length — `ℓ` from the lamp-carrier construction over the two-sided
/// double of the base (which restores properness in both directions) and
/// `ℓ′` the standard support length — and confirms it is finite and
/// contained in the predicted box `(F′_n)^{F_n} × F_n`.
pub fn pw_sublevel(
    line: &ZSubset,
    h: &HGroup,
    n: u64,
    budget: &Budget,
) -> Result<(PwReport, Vec<WreathElement>)> {
    if line.left_tail == line.right_tail {
        return Err(Error::Validation(
            "the base translate length must be proper: one tail inside, \
             one outside"
                .into(),
        ));
    }
    let gset = gset_fixture("z")?;
    let plain = z_commensurated(gset, line.clone())?;
    let doubled = double_construction(&plain, &[Word::single(0)])?;
    let data = ZxData::new(doubled.subset, *h)?;

    // ℓ(wg) ≥ ℓ_M(γ) for γ ∈ {g} ∪ Supp(w), and ℓ_M(γ) ≥ |γ| − 2·#flips,
    // so the scan window below covers all of F_n.
    let margin = n as i64 + 2 * line.flips.len() as i64;
    let shifts: Vec<i64> = (-margin..=margin).filter(|&g| line.ell(g) <= n).collect();
    let lamp_ball: Vec<i64> = h.ball(n).into_iter().filter(|&v| v != 0).collect();

    let box_size = (lamp_ball.len() as u128 + 1)
        .checked_pow(shifts.len() as u32)
        .and_then(|maps| maps.checked_mul(shifts.len() as u128))
        .ok_or_else(|| {
            Error::Budget("predicted sublevel box overflows u128".into())
        })?;

    let mut search = PwSearch {
        line,
        h,
        data: &data,
        n,
        shifts: &shifts,
        lamp_ball: &lamp_ball,
        cap: budget.wreath_box,
        visited: 0,
        contained: true,
        sublevel: Vec::new(),
    };
    search.descend(0, 0, &mut Vec::new())?;
    let PwSearch {
        contained,
        mut sublevel,
        ..
    } = search;
    sublevel.sort();
    let report = PwReport {
        n,
        shift_window: shifts.len(),
        lamp_ball: lamp_ball.len() + 1,
        box_size,
        sublevel_size: sublevel.len(),
        contained,
    };
    Ok((report, sublevel))
}

pub fn pw_combination_check(
    line: &ZSubset,
    h: &HGroup,
    n: u64,
    budget: &Budget,
) -> Result<PwReport> {
    Ok(pw_sublevel(line, h, n, budget)?.0)
}

struct PwSearch<'a> {
    line: &'a ZSubset,
    h: &'a HGroup,
    data: &'a ZxData,
    n: u64,
    shifts: &'a [i64],
    lamp_ball: &'a [i64],
    cap: usize,
    visited: usize,
    contained: bool,
    sublevel: Vec<WreathElement>,
}

impl PwSearch<'_> {
    /// Depth-first over lamp configurations with `Σℓ₀ ≤ n`: each support
    /// position is skipped or takes each affordable lamp value in turn.
    fn descend(&mut self, pos: usize, used: u64, lamps: &mut Vec<(i64, i64)>) -> Result<()> {
        if pos == self.shifts.len() {
            return self.sweep_shifts(used, lamps);
        }
        self.descend(pos + 1, used, lamps)?;
        for k in 0..self.lamp_ball.len() {
            let value = self.lamp_ball[k];
            let cost = self.h.standard_length(value);
            if used + cost <= self.n {
                lamps.push((self.shifts[pos], value));
                self.descend(pos + 1, used + cost, lamps)?;
                lamps.pop();
            }
        }
        Ok(())
    }

    fn sweep_shifts(&mut self, support_cost: u64, lamps: &[(i64, i64)]) -> Result<()> {
        for &g in self.shifts {
            self.visited += 1;
            if self.visited > self.cap {
                return Err(Error::Budget(format!(
                    "sublevel enumeration exceeded {} elements",
                    self.cap
                )));
            }
            let e = WreathElement::new(self.h, lamps, g)?;
            let ell = ell_zx(&e, self.data)?;
            if ell + support_cost > self.n {
                continue;
            }
            let justification = e
                .support()
                .iter()
                .chain([&g])
                .map(|&gamma| self.line.ell(gamma))
                .max()
                .unwrap_or(0);
            if ell < justification {
                self.contained = false;
            }
            self.sublevel.push(e);
        }
        Ok(())
    }
}

/// Random element with shift in `[−g_bound, g_bound]` and lamps in
/// `[−support_bound, support_bound]`.
pub fn random_wreath_element(
    rng: &mut StdRng,
    h: &HGroup,
    g_bound: i64,
    support_bound: i64,
) -> WreathElement {
    let g = rng.random_range(-g_bound..=g_bound);
    let count = rng.random_range(0..=4);
    let mut lamps: Vec<(i64, i64)> = Vec::new();
    for _ in 0..count {
        let pos = rng.random_range(-support_bound..=support_bound);
        if lamps.iter().any(|&(p, _)| p == pos) {
            continue;
        }
        let value = match h.modulus {
            Some(m) => rng.random_range(1..m as i64),
            None => {
                let v = rng.random_range(1..=3i64);
                if rng.random_bool(0.5) {
                    v
                } else {
                    -v
                }
            }
        };
        lamps.push((pos, value));
    }
    WreathElement::new(h, &lamps, g).expect("random lamps are nonidentity")
}

/// Seeded random element batch for scenario runs.
pub fn random_elements(
    seed: u64,
    samples: usize,
    h: &HGroup,
    g_bound: i64,
    support_bound: i64,
) -> Vec<WreathElement> {
    let mut rng = StdRng::seed_from_u64(seed);
    (0..samples)
        .map(|_| random_wreath_element(&mut rng, h, g_bound, support_bound))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn nat_data(h: HGroup) -> ZxData {
        let gset = gset_fixture("z").unwrap();
        let subset = z_commensurated(gset, ZSubset::nat()).unwrap();
        ZxData::new(subset, h).unwrap()
    }

    fn element(h: &HGroup, lamps: &[(i64, i64)], g: i64) -> WreathElement {
        WreathElement::new(h, lamps, g).unwrap()
    }

    #[test]
    fn support_length_counts_and_sums() {
        let z2 = HGroup::cyclic(2).unwrap();
        let counting = |h: i64| z2.standard_length(h);
        assert_eq!(support_length(&WreathElement::identity(), &counting), 0);
        let e = element(&z2, &[(-1, 1), (0, 1), (5, 1)], 2);
        assert_eq!(support_length(&e, &counting), 6);
        let z = HGroup::integers();
        let ray = |h: i64| z.standard_length(h);
        let e = element(&z, &[(0, 2), (3, -3)], 0);
        assert_eq!(support_length(&e, &ray), 5);
    }

    #[test]
    fn multiplication_shifts_the_second_configuration() {
        let z2 = HGroup::cyclic(2).unwrap();
        let a = element(&z2, &[], 1);
        let b = element(&z2, &[(0, 1)], 0);
        let ab = a.mul(&b, &z2);
        assert_eq!(ab.support(), vec![1]);
        assert_eq!(ab.shift(), 1);
        let ba = b.mul(&a, &z2);
        assert_eq!(ba.support(), vec![0]);
        // The right factor's lamp shifts to position 1 and cancels there.
        let abb = ab.mul(&b, &z2);
        assert!(abb.lamps().is_empty());
        assert_eq!(abb.shift(), 1);
    }

    #[test]
    fn inverse_and_associativity_on_random_elements() {
        for h in [HGroup::cyclic(3).unwrap(), HGroup::integers()] {
            let mut rng = StdRng::seed_from_u64(7);
            for _ in 0..200 {
                let a = random_wreath_element(&mut rng, &h, 5, 5);
                let b = random_wreath_element(&mut rng, &h, 5, 5);
                let c = random_wreath_element(&mut rng, &h, 5, 5);
                assert_eq!(a.mul(&a.inverse(&h), &h), WreathElement::identity());
                assert_eq!(a.inverse(&h).mul(&a, &h), WreathElement::identity());
                assert_eq!(
                    a.mul(&b, &h).mul(&c, &h),
                    a.mul(&b.mul(&c, &h), &h)
                );
            }
        }
    }

    #[test]
    fn action_shifts_carrier_and_restricts_lamps() {
        let z2 = HGroup::cyclic(2).unwrap();
        let data = nat_data(z2);
        let p = ZxPoint {
            x: "3".into(),
            mu: BTreeMap::new(),
        };
        data.validate_point(&p).unwrap();
        let idle = zx_act(&WreathElement::identity(), &p, &data).unwrap();
        assert_eq!(idle, p);
        // A_3 = (−∞, 3], so lamps at 0 and 2 are invisible from (3, ∅)…
        let inside = element(&z2, &[(0, 1), (2, 1)], 0);
        assert_eq!(zx_act(&inside, &p, &data).unwrap(), p);
        // …while a lamp at 5 lands in the configuration.
        let outside = element(&z2, &[(5, 1)], 0);
        let moved = zx_act(&outside, &p, &data).unwrap();
        assert_eq!(moved.x, "3");
        assert_eq!(moved.mu, BTreeMap::from([(5, 1)]));
        // A pure shift moves the carrier point and relabels the keys.
        let shift = element(&z2, &[], 1);
        let shifted = zx_act(&shift, &moved, &data).unwrap();
        assert_eq!(shifted.x, "4");
        assert_eq!(shifted.mu, BTreeMap::from([(6, 1)]));
    }

    #[test]
    fn invalid_points_are_rejected() {
        let z2 = HGroup::cyclic(2).unwrap();
        let data = nat_data(z2);
        let inside_key = ZxPoint {
            x: "3".into(),
            mu: BTreeMap::from([(2, 1)]),
        };
        assert!(matches!(
            data.validate_point(&inside_key),
            Err(Error::Validation(_))
        ));
        let identity_value = ZxPoint {
            x: "3".into(),
            mu: BTreeMap::from([(5, 2)]),
        };
        assert!(matches!(
            data.validate_point(&identity_value),
            Err(Error::Validation(_))
        ));
    }

    #[test]
    fn translate_distance_matches_the_set_formulas() {
        let z2 = HGroup::cyclic(2).unwrap();
        let data = nat_data(z2);
        assert_eq!(ell_zx(&WreathElement::identity(), &data).unwrap(), 0);
        for g in [-4i64, -1, 1, 4] {
            let pure = element(&z2, &[], g);
            assert_eq!(ell_zx(&pure, &data).unwrap(), g.unsigned_abs());
        }
        let two_lamps = element(&z2, &[(0, 1), (2, 1)], 0);
        let (gone, gained) = zx_translate_sets(&two_lamps, &data).unwrap();
        assert_eq!(gone, BTreeSet::from(["0".into(), "1".into()]));
        assert_eq!(gained, BTreeSet::from(["0".into(), "1".into()]));
        assert_eq!(ell_zx(&two_lamps, &data).unwrap(), 4);
    }

    #[test]
    fn action_axiom_on_random_triples() {
        for h in [HGroup::cyclic(2).unwrap(), HGroup::integers()] {
            let data = nat_data(h);
            let mut rng = StdRng::seed_from_u64(11);
            for _ in 0..150 {
                let a = random_wreath_element(&mut rng, &h, 4, 6);
                let b = random_wreath_element(&mut rng, &h, 4, 6);
                let start = ZxPoint {
                    x: rng.random_range(-6i64..=6).to_string(),
                    mu: BTreeMap::new(),
                };
                let p = zx_act(&random_wreath_element(&mut rng, &h, 4, 6), &start, &data)
                    .unwrap();
                let left = zx_act(&a.mul(&b, &h), &p, &data).unwrap();
                let right = zx_act(&a, &zx_act(&b, &p, &data).unwrap(), &data).unwrap();
                assert_eq!(left, right);
            }
        }
    }

    #[test]
    fn translate_distance_is_symmetric_under_inverse() {
        let h = HGroup::cyclic(2).unwrap();
        let data = nat_data(h);
        let mut rng = StdRng::seed_from_u64(23);
        for _ in 0..300 {
            let e = random_wreath_element(&mut rng, &h, 8, 8);
            assert_eq!(
                ell_zx(&e, &data).unwrap(),
                ell_zx(&e.inverse(&h), &data).unwrap(),
                "element {e:?}"
            );
        }
    }

    #[test]
    fn bounds_hold_on_a_thousand_random_elements() {
        let h = HGroup::cyclic(2).unwrap();
        let data = nat_data(h);
        let mut rng = StdRng::seed_from_u64(5);
        for _ in 0..1000 {
            let e = random_wreath_element(&mut rng, &h, 10, 10);
            let report = zx_bounds_check(&e, &data).unwrap();
            assert!(report.all_ok(), "bounds fail on {e:?}: {report:?}");
        }
    }

    #[test]
    fn pure_parts_meet_their_bounds() {
        let h = HGroup::cyclic(2).unwrap();
        let data = nat_data(h);
        let pure_shift = element(&h, &[], 7);
        let report = zx_bounds_check(&pure_shift, &data).unwrap();
        assert_eq!(report.ell, report.translate_distance);
        assert_eq!(report.ell, report.upper_bound);
        // A single lamp at γ > 0 over the plain ray: both difference sides
        // equal M ∖ γM, so the second lower bound is half the value.
        let single = element(&h, &[(3, 1)], 0);
        let report = zx_bounds_check(&single, &data).unwrap();
        assert_eq!(report.support_drop_sup, 3);
        assert_eq!(report.ell, 6);
        assert_eq!(report.upper_bound, 6);
    }

    #[test]
    fn doubling_restores_properness_for_negative_lamps() {
        let h = HGroup::cyclic(2).unwrap();
        let plain = nat_data(h);
        let backward = element(&h, &[(-2, 1)], 0);
        assert_eq!(ell_zx(&backward, &plain).unwrap(), 0);
        let gset = gset_fixture("z").unwrap();
        let subset = z_commensurated(gset, ZSubset::nat()).unwrap();
        let doubled = double_construction(&subset, &[Word::single(0)]).unwrap();
        let data = ZxData::new(doubled.subset, h).unwrap();
        assert_eq!(ell_zx(&backward, &data).unwrap(), 4);
        let forward = element(&h, &[(2, 1)], 0);
        assert_eq!(ell_zx(&forward, &data).unwrap(), 4);
    }

    #[test]
    fn sublevel_zero_is_the_identity() {
        let h = HGroup::cyclic(2).unwrap();
        let (report, elements) =
            pw_sublevel(&ZSubset::nat(), &h, 0, &Budget::default()).unwrap();
        assert_eq!(report.sublevel_size, 1);
        assert!(report.contained);
        assert_eq!(elements, vec![WreathElement::identity()]);
    }

    #[test]
    fn sublevel_six_fills_a_verified_box() {
        let h = HGroup::cyclic(2).unwrap();
        let budget = Budget::default();
        let (report, elements) = pw_sublevel(&ZSubset::nat(), &h, 6, &budget).unwrap();
        assert!(report.contained);
        assert_eq!(report.shift_window, 13);
        assert!(report.sublevel_size > 1);
        for e in &elements {
            // ℓ ≥ 2|g| over the doubled base and ℓ′ = 2·#Supp.
            assert!(e.shift().abs() <= 3);
            assert!(e.lamps().len() <= 3);
            assert!(e.support().iter().all(|pos| pos.abs() <= 6));
        }
        let (smaller, inner) = pw_sublevel(&ZSubset::nat(), &h, 4, &budget).unwrap();
        assert!(smaller.sublevel_size <= report.sublevel_size);
        assert!(inner.iter().all(|e| elements.binary_search(e).is_ok()));
    }

    #[test]
    fn sublevel_respects_the_search_budget() {
        let h = HGroup::cyclic(2).unwrap();
        let mut budget = Budget::default();
        budget.wreath_box = 10;
        assert!(matches!(
            pw_sublevel(&ZSubset::nat(), &h, 6, &budget),
            Err(Error::Budget(_))
        ));
        assert!(matches!(
            pw_sublevel(&ZSubset::finite(&[0, 1]), &h, 4, &Budget::default()),
            Err(Error::Validation(_))
        ));
    }

    #[test]
    fn support_length_is_unbounded() {
        let h = HGroup::cyclic(2).unwrap();
        let counting = |v: i64| h.standard_length(v);
        for n in 0..=50 {
            let lamps: Vec<(i64, i64)> = (0..n).map(|i| (i, 1)).collect();
            let e = element(&h, &lamps, 0);
            assert_eq!(support_length(&e, &counting), 2 * n as u64);
            assert_eq!(
                support_length(&e.inverse(&h), &counting),
                2 * n as u64
            );
        }
    }

    #[test]
    fn lamp_group_parsing_and_arithmetic() {
        let z5 = HGroup::from_fixture("zn:5").unwrap();
        assert_eq!(z5.reduce(-3), 2);
        assert_eq!(z5.add(3, 4), 2);
        assert_eq!(z5.negate(2), 3);
        assert_eq!(z5.standard_length(0), 0);
        assert_eq!(z5.standard_length(4), 2);
        let z = HGroup::from_fixture("z").unwrap();
        assert_eq!(z.standard_length(-7), 7);
        assert_eq!(z.ball(2), vec![-2, -1, 0, 1, 2]);
        assert!(HGroup::from_fixture("f2").is_err());
        assert!(HGroup::from_fixture("zn:1").is_err());
        assert!(HGroup::cyclic(0).is_err());
    }
}
