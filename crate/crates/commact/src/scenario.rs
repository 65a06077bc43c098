//! Scenario execution: the registry binding operation names to the library.
//!
//! A scenario file is a JSON array of [`Scenario`] values. Each scenario
//! names an operation, passes its arguments as one JSON object, and may pin
//! a seed, budget overrides, and expected output values. Running a scenario
//! yields one [`RunResult`]; the result stream is serialized with a stable
//! field order and sorted object keys, so identical scenarios and seeds
//! produce identical bytes.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::sync::Arc;
use std::time::Instant;

use rayon::prelude::*;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::abelian::{self, ZkAction};
use crate::budget::Budget;
use crate::commens::{
    classify_z, is_commensurated, neumann_check, orbit_report, sm_enumerate, sm_verify,
    transfixing_distance, CommensuratedSet,
};
use crate::error::{Error, Result};
use crate::fixtures::{gset_fixture, subset_fixture, z_commensurated, SubsetSpec};
use crate::graph::{graph_fixture, lattice_box_graph, FiniteGraph, GraphJson};
use crate::gset::{GSet, Permutation, Token};
use crate::induction::{induce, induction_fixture};
use crate::median::{MedianGraph, OrientationOutcome};
use crate::sageev::{
    check_sageev_median, double_construction, enumerate_ultraselections, incidence_graph,
    random_preposet, sageev_window, validate_preposet, DoubledAction, InvolutivePreposet,
};
use crate::schreier::{count_ends, SchreierGraph};
use crate::walling::{dictionary_round_trip, Point, PointMap, Walling};
use crate::words::{Letter, Word};
use crate::wreath::{
    ell_zx, pw_combination_check, support_length, zx_act, zx_bounds_check, HGroup, WreathElement,
    ZxData, ZxPoint,
};

/// One unit of work: an operation name, its arguments, and optional
/// execution pins.
///
/// `expect` is a shallow key match: every key listed must be present in the
/// outputs with exactly the given value. When present it decides pass/fail,
/// overriding the operation's intrinsic verdict, which lets a scenario pin a
/// negative outcome (a set that is not commensurated, a graph that is not
/// median) and still count as passing.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub op: String,
    #[serde(default)]
    pub args: Value,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub budgets: Option<BTreeMap<String, u64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub expect: Option<Value>,
}

/// Result of one scenario, in the order the fields are serialized.
#[derive(Debug, Clone, Serialize)]
pub struct RunResult {
    pub op: String,
    /// Hex SHA-256 of the canonical scenario JSON.
    pub inputs: String,
    /// Effective seed: the scenario's own, else the global one, else 0.
    pub seed: u64,
    /// Effective budget overrides (scenario overrides, then global ones).
    pub budget: BTreeMap<String, u64>,
    pub outputs: Value,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timings: Option<Timings>,
    pub pass: bool,
}

/// Wall-clock execution time. Only attached on request, since it breaks
/// byte-for-byte determinism of the result stream.
#[derive(Debug, Clone, Serialize)]
pub struct Timings {
    pub millis: u64,
}

/// Global execution options coming from the command line.
#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    /// Fallback seed for scenarios that do not pin one.
    pub seed: Option<u64>,
    /// Budget overrides applied after per-scenario ones.
    pub overrides: Vec<(String, u64)>,
    /// Attach wall-clock timings to each result.
    pub timings: bool,
}

/// Results of a scenario list together with the process exit code: the
/// first nonzero per-scenario code in file order, where an error maps to
/// its class code and a failed expectation to 1.
#[derive(Debug)]
pub struct RunSummary {
    pub results: Vec<RunResult>,
    pub exit: i32,
}

/// Bundled scenario suites, compiled into the binary and run by `selftest`.
#[must_use]
pub fn bundled_suites() -> &'static [(&'static str, &'static str)] {
    &[
        ("known_values", include_str!("../scenarios/known_values.json")),
        ("actions", include_str!("../scenarios/actions.json")),
        ("walling", include_str!("../scenarios/walling.json")),
        ("median", include_str!("../scenarios/median.json")),
        ("sageev", include_str!("../scenarios/sageev.json")),
        ("abelian", include_str!("../scenarios/abelian.json")),
        ("wreath", include_str!("../scenarios/wreath.json")),
    ]
}

/// Parses a scenario file: a JSON array of scenarios.
pub fn parse_scenarios(text: &str) -> Result<Vec<Scenario>> {
    serde_json::from_str(text).map_err(|e| Error::Parse(format!("scenario file: {e}")))
}

/// Hex SHA-256 of the scenario's canonical JSON form (sorted object keys).
#[must_use]
pub fn scenario_digest(scenario: &Scenario) -> String {
    let canonical = serde_json::to_string(scenario).expect("scenario serializes");
    let mut hasher = Sha256::new();
    hasher.update(canonical.as_bytes());
    hex::encode(hasher.finalize())
}

/// Runs every scenario, sequentially or in parallel, preserving file order.
#[must_use]
pub fn run_all(scenarios: &[Scenario], options: &RunOptions, parallel: bool) -> RunSummary {
    let outcomes: Vec<(RunResult, i32)> = if parallel {
        scenarios
            .par_iter()
            .map(|s| run_scenario(s, options))
            .collect()
    } else {
        scenarios.iter().map(|s| run_scenario(s, options)).collect()
    };
    let exit = outcomes.iter().map(|(_, code)| *code).find(|&c| c != 0);
    RunSummary {
        results: outcomes.into_iter().map(|(r, _)| r).collect(),
        exit: exit.unwrap_or(0),
    }
}

/// Runs a single scenario and reports its result together with the exit
/// code it would cause (0 when it passes).
#[must_use]
pub fn run_scenario(scenario: &Scenario, options: &RunOptions) -> (RunResult, i32) {
    let seed = scenario.seed.or(options.seed).unwrap_or(0);
    let mut budget = Budget::default();
    let mut overrides = BTreeMap::new();
    let mut setup_error = None;
    for source in [
        scenario.budgets.clone().unwrap_or_default().into_iter().collect::<Vec<_>>(),
        options.overrides.clone(),
    ] {
        for (key, value) in source {
            match budget.set(&key, value) {
                Ok(()) => {
                    overrides.insert(key, value);
                }
                Err(e) => {
                    setup_error = setup_error.or(Some(e));
                }
            }
        }
    }

    let started = Instant::now();
    let executed = match setup_error {
        Some(e) => Err(e),
        None => dispatch(&scenario.op, &scenario.args, seed, &budget),
    };
    let elapsed = started.elapsed();

    let (outputs, verdict, error) = match executed {
        Ok(outcome) => (outcome.outputs, outcome.verdict, None),
        Err(e) => (
            json!({"error": {"kind": e.kind(), "message": e.to_string()}}),
            None,
            Some(e),
        ),
    };
    let pass = if error.is_some() {
        false
    } else if let Some(expect) = &scenario.expect {
        expect_matches(expect, &outputs)
    } else {
        verdict.unwrap_or(true)
    };
    let code = match &error {
        Some(e) => e.exit_code(),
        None if !pass => 1,
        None => 0,
    };
    let result = RunResult {
        op: scenario.op.clone(),
        inputs: scenario_digest(scenario),
        seed,
        budget: overrides,
        outputs,
        timings: options.timings.then(|| Timings {
            millis: u64::try_from(elapsed.as_millis()).unwrap_or(u64::MAX),
        }),
        pass,
    };
    (result, code)
}

fn expect_matches(expect: &Value, outputs: &Value) -> bool {
    match expect.as_object() {
        Some(map) => map.iter().all(|(k, v)| outputs.get(k) == Some(v)),
        None => expect == outputs,
    }
}

struct OpOutcome {
    outputs: Value,
    /// Intrinsic pass/fail of assertion-style operations.
    verdict: Option<bool>,
}

impl OpOutcome {
    fn report(outputs: Value) -> Self {
        OpOutcome {
            outputs,
            verdict: None,
        }
    }

    fn checked(outputs: Value, ok: bool) -> Self {
        OpOutcome {
            outputs,
            verdict: Some(ok),
        }
    }
}

fn dispatch(op: &str, args: &Value, seed: u64, budget: &Budget) -> Result<OpOutcome> {
    match op {
        "ell" => op_ell(args),
        "is_commensurated" => op_is_commensurated(args),
        "transfixing_distance" => op_transfixing_distance(args, budget),
        "neumann_check" => op_neumann_check(args, budget),
        "sm_search" => op_sm_search(args, budget),
        "classify_z_commensurated" => op_classify_z(args),
        "induce" => op_induce(args),
        "schreier_graph" => op_schreier_graph(args, budget),
        "count_ends" => op_count_ends(args, budget),
        "orbit_commensuration_report" => op_orbit_report(args),
        "walling_from_commensurated" => op_walling_from_commensurated(args),
        "commensurated_from_walling" => op_commensurated_from_walling(args),
        "wall_distance" => op_wall_distance(args),
        "pull_back" => op_pull_back(args),
        "is_median" => op_is_median(args, budget),
        "median" => op_median(args, budget),
        "halfspace" => op_halfspace(args, budget),
        "separating_halfspaces" => op_separating_halfspaces(args, budget),
        "wall_classes" => op_wall_classes(args, budget),
        "median_orientation" => op_median_orientation(args, budget),
        "cubulate" => op_cubulate(args, budget),
        "invariant_cube" => op_invariant_cube(args, budget),
        "embed_into_powerset" => op_embed_into_powerset(args, budget),
        "hypercube_fixture" => op_hypercube_fixture(args),
        "lattice_box_fixture" => op_lattice_box_fixture(args),
        "validate_preposet" => op_validate_preposet(args, seed),
        "enumerate_ultraselections" => op_enumerate_ultraselections(args, seed, budget),
        "incidence_graph" => op_incidence_graph(args, seed, budget),
        "check_sageev_median" => op_check_sageev_median(args, seed, budget),
        "double_construction" => op_double_construction(args),
        "sageev_window" => op_sageev_window(args, budget),
        "eval_f" => op_eval_f(args, seed),
        "homogeneous_part" => op_homogeneous_part(args, seed, budget),
        "decompose" => op_decompose(args, seed, budget),
        "independence_check" => op_independence_check(args),
        "support_length" => op_support_length(args),
        "zx_act" => op_zx_act(args),
        "ell_zx" => op_ell_zx(args),
        "zx_bounds_check" => op_zx_bounds_check(args),
        "pw_combination_check" => op_pw_combination_check(args, budget),
        other => Err(Error::Validation(format!("unknown operation {other:?}"))),
    }
}

fn parse_args<T: DeserializeOwned>(args: &Value) -> Result<T> {
    serde_json::from_value(args.clone())
        .map_err(|e| Error::Validation(format!("operation arguments: {e}")))
}

fn to_outputs<T: Serialize>(value: &T) -> Result<Value> {
    serde_json::to_value(value).map_err(|e| Error::Validation(format!("outputs: {e}")))
}

fn load_set(gset: &str, subset: &SubsetSpec) -> Result<(Arc<GSet>, CommensuratedSet)> {
    let gs = gset_fixture(gset)?;
    let set = subset_fixture(&gs, subset)?;
    Ok((gs, set))
}

fn parse_words(gset: &GSet, texts: &[String]) -> Result<Vec<Word>> {
    texts.iter().map(|t| gset.alphabet.parse_word(t)).collect()
}

#[derive(Deserialize)]
#[serde(untagged)]
enum GraphArg {
    Fixture(String),
    Inline(GraphJson),
}

fn load_graph(arg: &GraphArg) -> Result<FiniteGraph> {
    match arg {
        GraphArg::Fixture(spec) => graph_fixture(spec),
        GraphArg::Inline(spec) => FiniteGraph::from_json(spec),
    }
}

fn load_median(arg: &GraphArg, budget: &Budget) -> Result<MedianGraph> {
    MedianGraph::new(load_graph(arg)?, budget)
}

fn load_permutations(images: &[Vec<usize>]) -> Result<Vec<Permutation>> {
    images.iter().map(|v| Permutation::new(v.clone())).collect()
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RandomSpec {
    #[serde(default)]
    seed: Option<u64>,
    #[serde(default)]
    pairs: Option<usize>,
    #[serde(default)]
    k: Option<usize>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct PreposetArg {
    #[serde(default)]
    elements: Option<Vec<Token>>,
    #[serde(default)]
    le: Option<Vec<(usize, usize)>>,
    #[serde(default)]
    sigma: Option<Vec<usize>>,
    #[serde(default)]
    discrete: Option<usize>,
    #[serde(default)]
    chain: Option<usize>,
    #[serde(default)]
    random: Option<RandomSpec>,
}

fn load_preposet(arg: PreposetArg, seed: u64) -> Result<InvolutivePreposet> {
    let pick = usize::from(arg.elements.is_some())
        + usize::from(arg.discrete.is_some())
        + usize::from(arg.chain.is_some())
        + usize::from(arg.random.is_some());
    if pick != 1 {
        return Err(Error::Validation(
            "preposet takes exactly one of: elements (+ le, sigma), discrete, chain, random"
                .into(),
        ));
    }
    if let Some(elements) = arg.elements {
        let sigma = arg.sigma.ok_or_else(|| {
            Error::Validation("an explicit preposet needs a sigma permutation".into())
        })?;
        return InvolutivePreposet::new(elements, &arg.le.unwrap_or_default(), sigma);
    }
    if let Some(pairs) = arg.discrete {
        if pairs > 32 {
            return Err(Error::Validation("discrete preposets cap at 32 pairs".into()));
        }
        return Ok(InvolutivePreposet::discrete(pairs));
    }
    if let Some(k) = arg.chain {
        if k > 32 {
            return Err(Error::Validation("chain preposets cap at 32 pairs".into()));
        }
        return Ok(InvolutivePreposet::chain_with_reversal(k));
    }
    let spec = arg.random.expect("counted above");
    let pairs = spec
        .pairs
        .ok_or_else(|| Error::Validation("random preposets need a pair count".into()))?;
    if pairs > 32 {
        return Err(Error::Validation("random preposets cap at 32 pairs".into()));
    }
    Ok(random_preposet(spec.seed.unwrap_or(seed), pairs))
}

#[derive(Deserialize)]
#[serde(untagged)]
enum ActionArg {
    Random { random: RandomSpec },
    Inline(Value),
}

fn load_action(arg: ActionArg, seed: u64) -> Result<ZkAction> {
    match arg {
        ActionArg::Random { random } => {
            let k = random
                .k
                .ok_or_else(|| Error::Validation("random actions need a rank k".into()))?;
            Ok(abelian::random_zk_action(random.seed.unwrap_or(seed), k))
        }
        ActionArg::Inline(value) => ZkAction::from_json(&value.to_string()),
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ElementArg {
    #[serde(default)]
    lamps: Vec<(i64, i64)>,
    #[serde(default)]
    shift: i64,
}

fn load_zx(line: &SubsetSpec, h: HGroup, double: bool) -> Result<ZxData> {
    let z = line.as_z_subset()?;
    let plain = z_commensurated(gset_fixture("z")?, z)?;
    let base = if double {
        double_construction(&plain, &[Word::single(0)])?.subset
    } else {
        plain
    };
    ZxData::new(base, h)
}

fn rational_string(r: &num_rational::Rational64) -> String {
    if *r.denom() == 1 {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

fn op_ell(args: &Value) -> Result<OpOutcome> {
    #[derive(Deserialize)]
    #[serde(deny_unknown_fields)]
    struct Args {
        gset: String,
        subset: SubsetSpec,
        word: String,
    }
    let a: Args = parse_args(args)?;
    let (gs, set) = load_set(&a.gset, &a.subset)?;
    let word = gs.alphabet.parse_word(&a.word)?;
    Ok(OpOutcome::report(json!({
        "word": a.word,
        "ell": set.ell(&word)?,
    })))
}

fn op_is_commensurated(args: &Value) -> Result<OpOutcome> {
    #[derive(Deserialize)]
    #[serde(deny_unknown_fields)]
    struct Args {
        gset: String,
        subset: SubsetSpec,
    }
    let a: Args = parse_args(args)?;
    let (_, set) = load_set(&a.gset, &a.subset)?;
    let report = is_commensurated(&set);
    let ok = report.commensurated;
    Ok(OpOutcome::checked(to_outputs(&report)?, ok))
}

fn op_transfixing_distance(args: &Value, budget: &Budget) -> Result<OpOutcome> {
    #[derive(Deserialize)]
    #[serde(deny_unknown_fields)]
    struct Args {
        gset: String,
        subset: SubsetSpec,
    }
    let a: Args = parse_args(args)?;
    let (_, set) = load_set(&a.gset, &a.subset)?;
    let report = transfixing_distance(&set, budget)?;
    Ok(OpOutcome::report(to_outputs(&report)?))
}

fn op_neumann_check(args: &Value, budget: &Budget) -> Result<OpOutcome> {
    #[derive(Deserialize)]
    #[serde(deny_unknown_fields)]
    struct Args {
        gset: String,
        subset: SubsetSpec,
    }
    let a: Args = parse_args(args)?;
    let (_, set) = load_set(&a.gset, &a.subset)?;
    let report = neumann_check(&set, budget)?;
    let ok = report.holds;
    Ok(OpOutcome::checked(to_outputs(&report)?, ok))
}

fn op_sm_search(args: &Value, budget: &Budget) -> Result<OpOutcome> {
    #[derive(Deserialize)]
    #[serde(deny_unknown_fields)]
    struct Args {
        n: u64,
        threshold: u64,
        #[serde(default)]
        members: Option<Vec<u64>>,
        #[serde(default = "default_true")]
        up_to_rotation: bool,
    }
    let a: Args = parse_args(args)?;
    match a.members {
        Some(members) => {
            let set: BTreeSet<u64> = members.into_iter().collect();
            let holds = sm_verify(a.n, a.threshold, &set)?;
            Ok(OpOutcome::checked(
                json!({"mode": "verify", "holds": holds}),
                holds,
            ))
        }
        None => {
            let sets = sm_enumerate(a.n, a.threshold, a.up_to_rotation, budget)?;
            Ok(OpOutcome::report(json!({
                "mode": "enumerate",
                "count": sets.len(),
                "sets": sets,
            })))
        }
    }
}

fn default_true() -> bool {
    true
}

fn op_classify_z(args: &Value) -> Result<OpOutcome> {
    #[derive(Deserialize)]
    #[serde(deny_unknown_fields)]
    struct Args {
        subset: SubsetSpec,
    }
    let a: Args = parse_args(args)?;
    let classification = classify_z(&a.subset.as_z_subset()?);
    Ok(OpOutcome::report(to_outputs(&classification)?))
}

fn op_induce(args: &Value) -> Result<OpOutcome> {
    #[derive(Deserialize)]
    #[serde(deny_unknown_fields)]
    struct Args {
        fixture: String,
        #[serde(default)]
        samples: Vec<String>,
    }
    let a: Args = parse_args(args)?;
    let data = induction_fixture(&a.fixture)?;
    let samples = parse_words(&data.subgroup_set, &a.samples)?;
    let (_, _, report) = induce(&data, &samples)?;
    let ok = report.identity_copy_matches && report.ell_dominates;
    Ok(OpOutcome::checked(to_outputs(&report)?, ok))
}

fn op_schreier_graph(args: &Value, budget: &Budget) -> Result<OpOutcome> {
    #[derive(Deserialize)]
    #[serde(deny_unknown_fields)]
    struct Args {
        gset: String,
        radius: u32,
    }
    let a: Args = parse_args(args)?;
    let gs = gset_fixture(&a.gset)?;
    let schreier = SchreierGraph::build(&gs, a.radius, budget)?;
    let graph = FiniteGraph::new(schreier.vertex_count(), schreier.simple_edges(), None)?;
    Ok(OpOutcome::report(json!({
        "vertex_count": graph.vertex_count(),
        "edge_count": graph.edge_count(),
        "graph": to_outputs(&graph.to_json())?,
    })))
}

fn op_count_ends(args: &Value, budget: &Budget) -> Result<OpOutcome> {
    #[derive(Deserialize)]
    #[serde(deny_unknown_fields)]
    struct Args {
        gset: String,
        r: u32,
        big_r: u32,
    }
    let a: Args = parse_args(args)?;
    let gs = gset_fixture(&a.gset)?;
    let estimate = count_ends(&gs, a.r, a.big_r, budget)?;
    Ok(OpOutcome::report(to_outputs(&estimate)?))
}

fn op_orbit_report(args: &Value) -> Result<OpOutcome> {
    #[derive(Deserialize)]
    #[serde(deny_unknown_fields)]
    struct Args {
        gset: String,
        subset: SubsetSpec,
    }
    let a: Args = parse_args(args)?;
    let (_, set) = load_set(&a.gset, &a.subset)?;
    let report = orbit_report(&set)?;
    Ok(OpOutcome::report(to_outputs(&report)?))
}

fn op_walling_from_commensurated(args: &Value) -> Result<OpOutcome> {
    #[derive(Deserialize)]
    #[serde(deny_unknown_fields)]
    struct Args {
        gset: String,
        subset: SubsetSpec,
        indices: Vec<Token>,
        points: Vec<String>,
    }
    let a: Args = parse_args(args)?;
    let (gs, set) = load_set(&a.gset, &a.subset)?;
    let walling = Walling::from_commensurated(set);
    let points: Vec<Point> = parse_words(&gs, &a.points)?
        .into_iter()
        .map(Point::Group)
        .collect();
    let mut membership = Vec::with_capacity(a.indices.len());
    for index in &a.indices {
        let row: Vec<bool> = points
            .iter()
            .map(|p| walling.membership(index, p))
            .collect::<Result<_>>()?;
        membership.push(row);
    }
    Ok(OpOutcome::report(json!({
        "indices": a.indices,
        "points": a.points,
        "membership": membership,
    })))
}

fn op_commensurated_from_walling(args: &Value) -> Result<OpOutcome> {
    #[derive(Deserialize)]
    #[serde(deny_unknown_fields)]
    struct Args {
        gset: String,
        subset: SubsetSpec,
        samples: Vec<Token>,
    }
    let a: Args = parse_args(args)?;
    let (_, set) = load_set(&a.gset, &a.subset)?;
    let report = dictionary_round_trip(&set, &a.samples)?;
    let ok = report.matches;
    Ok(OpOutcome::checked(to_outputs(&report)?, ok))
}

fn op_wall_distance(args: &Value) -> Result<OpOutcome> {
    #[derive(Deserialize)]
    #[serde(deny_unknown_fields)]
    struct Args {
        gset: String,
        subset: SubsetSpec,
        u: String,
        v: String,
    }
    let a: Args = parse_args(args)?;
    let (gs, set) = load_set(&a.gset, &a.subset)?;
    let u = Point::Group(gs.alphabet.parse_word(&a.u)?);
    let v = Point::Group(gs.alphabet.parse_word(&a.v)?);
    let walling = Walling::from_commensurated(set);
    let distance = walling.wall_distance(&u, &v)?;
    let separating: Vec<Token> = walling.separating_indices(&u, &v)?.into_iter().collect();
    Ok(OpOutcome::report(json!({
        "distance": distance,
        "separating_indices": separating,
    })))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields, tag = "kind", rename_all = "snake_case")]
enum MapArg {
    Identity,
    Orbital { basepoint: Token },
    Constant { token: Token },
}

/// The translate walling of a finite explicit carrier: the halfspace at
/// index `w·x₀` is the translate `w·M`. Well-defined exactly when the
/// family is equivariant, which the constructor verifies.
fn translate_walling(gset: &Arc<GSet>, set: &CommensuratedSet) -> Result<Walling> {
    let action = gset
        .explicit_action()
        .ok_or_else(|| Error::Domain("carrier wallings need an explicit carrier".into()))?;
    let n = action.size();
    let mut word_to: Vec<Option<Word>> = vec![None; n];
    let mut queue = VecDeque::new();
    for seed in gset.seeds() {
        if let Some(i) = action.index_of(&seed) {
            if word_to[i].is_none() {
                word_to[i] = Some(Word::identity());
                queue.push_back(i);
            }
        }
    }
    while let Some(i) = queue.pop_front() {
        let base = word_to[i].clone().expect("queued vertices carry words");
        for gen in 0..gset.alphabet.len() {
            for inv in [false, true] {
                let j = action.apply_index(Letter { gen, inv }, i);
                if word_to[j].is_none() {
                    let mut step = Word::single(gen);
                    if inv {
                        step = step.inverse();
                    }
                    word_to[j] = Some(step.concat(&base));
                    queue.push_back(j);
                }
            }
        }
    }
    let members = set.member_tokens()?;
    let mut halfspaces = Vec::with_capacity(n);
    for w in &word_to {
        let w = w
            .as_ref()
            .ok_or_else(|| Error::Domain("translate wallings need a transitive carrier".into()))?;
        let halfspace: BTreeSet<Token> = members
            .iter()
            .map(|t| gset.apply_word(w, t))
            .collect::<Result<_>>()?;
        halfspaces.push(halfspace);
    }
    Walling::explicit(Arc::clone(gset), Arc::clone(gset), halfspaces)
}

fn op_pull_back(args: &Value) -> Result<OpOutcome> {
    #[derive(Deserialize)]
    #[serde(deny_unknown_fields)]
    struct Args {
        gset: String,
        subset: SubsetSpec,
        map: MapArg,
        pairs: Vec<(String, String)>,
        #[serde(default)]
        compare_ell: bool,
    }
    let a: Args = parse_args(args)?;
    let (gs, set) = load_set(&a.gset, &a.subset)?;
    let (walling, map_name) = match &a.map {
        MapArg::Identity => (
            Walling::from_commensurated(set.clone()).pull_back(PointMap::Identity),
            "identity",
        ),
        MapArg::Orbital { basepoint } => (
            translate_walling(&gs, &set)?.pull_back(PointMap::Orbital {
                gset: Arc::clone(&gs),
                basepoint: basepoint.clone(),
            }),
            "orbital",
        ),
        MapArg::Constant { token } => (
            translate_walling(&gs, &set)?
                .pull_back(PointMap::Constant(Point::Carrier(token.clone()))),
            "constant",
        ),
    };
    let mut distances = Vec::with_capacity(a.pairs.len());
    let mut ell_matches = true;
    for (u_text, v_text) in &a.pairs {
        let u = gs.alphabet.parse_word(u_text)?;
        let v = gs.alphabet.parse_word(v_text)?;
        let pulled =
            walling.wall_distance(&Point::Group(u.clone()), &Point::Group(v.clone()))?;
        let mut entry = json!({"u": u_text, "v": v_text, "pulled": pulled});
        if a.compare_ell {
            let ell = set.ell(&u.inverse().concat(&v))?;
            ell_matches &= ell == pulled;
            entry["ell"] = json!(ell);
        }
        distances.push(entry);
    }
    let outputs = json!({
        "map": map_name,
        "distances": distances,
        "ell_matches": a.compare_ell.then_some(ell_matches),
    });
    Ok(if a.compare_ell {
        OpOutcome::checked(outputs, ell_matches)
    } else {
        OpOutcome::report(outputs)
    })
}

fn op_is_median(args: &Value, budget: &Budget) -> Result<OpOutcome> {
    #[derive(Deserialize)]
    #[serde(deny_unknown_fields)]
    struct Args {
        graph: GraphArg,
    }
    let a: Args = parse_args(args)?;
    let verdict = crate::median::is_median(&load_graph(&a.graph)?, budget)?;
    let ok = verdict.median;
    Ok(OpOutcome::checked(to_outputs(&verdict)?, ok))
}

fn op_median(args: &Value, budget: &Budget) -> Result<OpOutcome> {
    #[derive(Deserialize)]
    #[serde(deny_unknown_fields)]
    struct Args {
        graph: GraphArg,
        x: u32,
        y: u32,
        z: u32,
    }
    let a: Args = parse_args(args)?;
    let mg = load_median(&a.graph, budget)?;
    Ok(OpOutcome::report(json!({
        "median": mg.median(a.x, a.y, a.z)?,
    })))
}

fn op_halfspace(args: &Value, budget: &Budget) -> Result<OpOutcome> {
    #[derive(Deserialize)]
    #[serde(deny_unknown_fields)]
    struct Args {
        graph: GraphArg,
        x: u32,
        y: u32,
    }
    let a: Args = parse_args(args)?;
    let mg = load_median(&a.graph, budget)?;
    let halfspace = mg.halfspace(a.x, a.y)?;
    Ok(OpOutcome::report(json!({
        "edge": halfspace.edge,
        "side": halfspace.side.to_sorted_vec(),
        "size": halfspace.side.len(),
    })))
}

fn op_separating_halfspaces(args: &Value, budget: &Budget) -> Result<OpOutcome> {
    #[derive(Deserialize)]
    #[serde(deny_unknown_fields)]
    struct Args {
        graph: GraphArg,
        x: u32,
        y: u32,
    }
    let a: Args = parse_args(args)?;
    let mg = load_median(&a.graph, budget)?;
    let halfspaces = mg.separating_halfspaces(a.x, a.y)?;
    let distance = mg.distance(a.x, a.y);
    let matches = halfspaces.len() == distance as usize;
    let listed: Vec<Value> = halfspaces
        .iter()
        .map(|h| json!({"edge": h.edge, "size": h.side.len()}))
        .collect();
    Ok(OpOutcome::checked(
        json!({
            "count": halfspaces.len(),
            "distance": distance,
            "matches": matches,
            "halfspaces": listed,
        }),
        matches,
    ))
}

fn op_wall_classes(args: &Value, budget: &Budget) -> Result<OpOutcome> {
    #[derive(Deserialize)]
    #[serde(deny_unknown_fields)]
    struct Args {
        graph: GraphArg,
    }
    let a: Args = parse_args(args)?;
    let mg = load_median(&a.graph, budget)?;
    let walls = mg.wall_classes()?;
    let classes: Vec<Value> = walls
        .classes
        .iter()
        .map(|c| {
            json!({
                "representative": c.representative,
                "size": c.size,
                "halfspace_size": c.halfspace.len(),
            })
        })
        .collect();
    Ok(OpOutcome::report(json!({
        "wall_count": walls.wall_count,
        "oriented_count": walls.oriented_count(),
        "classes": classes,
    })))
}

fn op_median_orientation(args: &Value, budget: &Budget) -> Result<OpOutcome> {
    #[derive(Deserialize)]
    #[serde(deny_unknown_fields)]
    struct Args {
        graph: GraphArg,
        generators: Vec<Vec<usize>>,
    }
    let a: Args = parse_args(args)?;
    let mg = load_median(&a.graph, budget)?;
    let outcome = mg.orientation(&load_permutations(&a.generators)?)?;
    let oriented = matches!(outcome, OrientationOutcome::Oriented { .. });
    Ok(OpOutcome::report(json!({
        "oriented": oriented,
        "outcome": to_outputs(&outcome)?,
    })))
}

fn op_cubulate(args: &Value, budget: &Budget) -> Result<OpOutcome> {
    #[derive(Deserialize)]
    #[serde(deny_unknown_fields)]
    struct Args {
        graph: GraphArg,
    }
    let a: Args = parse_args(args)?;
    let mg = load_median(&a.graph, budget)?;
    let complex = mg.cubulate(budget)?;
    Ok(OpOutcome::report(json!({
        "counts": complex.counts(),
    })))
}

fn op_invariant_cube(args: &Value, budget: &Budget) -> Result<OpOutcome> {
    #[derive(Deserialize)]
    #[serde(deny_unknown_fields)]
    struct Args {
        graph: GraphArg,
        generators: Vec<Vec<usize>>,
    }
    let a: Args = parse_args(args)?;
    let mg = load_median(&a.graph, budget)?;
    let report = mg.invariant_cube(&load_permutations(&a.generators)?, budget)?;
    Ok(OpOutcome::report(to_outputs(&report)?))
}

fn op_embed_into_powerset(args: &Value, budget: &Budget) -> Result<OpOutcome> {
    #[derive(Deserialize)]
    #[serde(deny_unknown_fields)]
    struct Args {
        graph: GraphArg,
        basepoint: u32,
    }
    let a: Args = parse_args(args)?;
    let mg = load_median(&a.graph, budget)?;
    let embedding = mg.embed_into_powerset(a.basepoint)?;
    let ok = embedding.doubled_isometry;
    Ok(OpOutcome::checked(to_outputs(&embedding)?, ok))
}

fn op_hypercube_fixture(args: &Value) -> Result<OpOutcome> {
    #[derive(Deserialize)]
    #[serde(deny_unknown_fields)]
    struct Args {
        d: usize,
    }
    let a: Args = parse_args(args)?;
    let graph = graph_fixture(&format!("q:{}", a.d))?;
    Ok(OpOutcome::report(json!({
        "vertices": graph.vertex_count(),
        "edges": graph.edge_count(),
        "graph": to_outputs(&graph.to_json())?,
    })))
}

fn op_lattice_box_fixture(args: &Value) -> Result<OpOutcome> {
    #[derive(Deserialize)]
    #[serde(deny_unknown_fields)]
    struct Args {
        #[serde(default)]
        bounds: Option<Vec<i64>>,
        #[serde(default)]
        bound: Option<i64>,
        #[serde(default)]
        k: Option<usize>,
    }
    let a: Args = parse_args(args)?;
    let bounds = match (a.bounds, a.bound, a.k) {
        (Some(bounds), None, None) => bounds,
        (None, Some(bound), Some(k)) => vec![bound; k],
        _ => {
            return Err(Error::Validation(
                "lattice boxes take either explicit bounds or bound + k".into(),
            ))
        }
    };
    let graph = lattice_box_graph(&bounds)?;
    Ok(OpOutcome::report(json!({
        "vertices": graph.vertex_count(),
        "edges": graph.edge_count(),
        "graph": to_outputs(&graph.to_json())?,
    })))
}

fn op_validate_preposet(args: &Value, seed: u64) -> Result<OpOutcome> {
    #[derive(Deserialize)]
    #[serde(deny_unknown_fields)]
    struct Args {
        preposet: PreposetArg,
    }
    let a: Args = parse_args(args)?;
    let preposet = load_preposet(a.preposet, seed)?;
    let violation = validate_preposet(&preposet);
    let valid = violation.is_none();
    Ok(OpOutcome::checked(
        json!({
            "elements": preposet.len(),
            "valid": valid,
            "violation": violation.map(|v| to_outputs(&v)).transpose()?,
        }),
        valid,
    ))
}

fn op_enumerate_ultraselections(args: &Value, seed: u64, budget: &Budget) -> Result<OpOutcome> {
    #[derive(Deserialize)]
    #[serde(deny_unknown_fields)]
    struct Args {
        preposet: PreposetArg,
    }
    let a: Args = parse_args(args)?;
    let preposet = load_preposet(a.preposet, seed)?;
    let selections = enumerate_ultraselections(&preposet, budget)?;
    let listed: Vec<Vec<Token>> = selections.iter().map(|s| s.tokens(&preposet)).collect();
    Ok(OpOutcome::report(json!({
        "count": selections.len(),
        "selections": listed,
    })))
}

fn op_incidence_graph(args: &Value, seed: u64, budget: &Budget) -> Result<OpOutcome> {
    #[derive(Deserialize)]
    #[serde(deny_unknown_fields)]
    struct Args {
        preposet: PreposetArg,
    }
    let a: Args = parse_args(args)?;
    let preposet = load_preposet(a.preposet, seed)?;
    let (selections, graph) = incidence_graph(&preposet, budget)?;
    Ok(OpOutcome::report(json!({
        "vertices": selections.len(),
        "edges": graph.edge_count(),
        "graph": to_outputs(&graph.to_json())?,
    })))
}

fn op_check_sageev_median(args: &Value, seed: u64, budget: &Budget) -> Result<OpOutcome> {
    #[derive(Deserialize)]
    #[serde(deny_unknown_fields)]
    struct Args {
        preposet: PreposetArg,
    }
    let a: Args = parse_args(args)?;
    let preposet = load_preposet(a.preposet, seed)?;
    let median = check_sageev_median(&preposet, budget)?;
    Ok(OpOutcome::checked(json!({"median": median}), median))
}

fn op_double_construction(args: &Value) -> Result<OpOutcome> {
    #[derive(Deserialize)]
    #[serde(deny_unknown_fields)]
    struct Args {
        gset: String,
        subset: SubsetSpec,
        samples: Vec<String>,
    }
    let a: Args = parse_args(args)?;
    let (gs, set) = load_set(&a.gset, &a.subset)?;
    let samples = parse_words(&gs, &a.samples)?;
    let doubled = double_construction(&set, &samples)?;
    let mut pairs = Vec::with_capacity(samples.len());
    let mut doubles = true;
    for (text, word) in a.samples.iter().zip(&samples) {
        let base = set.ell(word)?;
        let lifted = doubled.subset.ell(word)?;
        doubles &= lifted == 2 * base;
        pairs.push(json!({"word": text, "ell": base, "doubled_ell": lifted}));
    }
    Ok(OpOutcome::checked(
        json!({"carrier": doubled.gset.name, "pairs": pairs, "doubles": doubles}),
        doubles,
    ))
}

fn op_sageev_window(args: &Value, budget: &Budget) -> Result<OpOutcome> {
    #[derive(Deserialize)]
    #[serde(deny_unknown_fields)]
    struct Args {
        gset: String,
        subset: SubsetSpec,
        /// Base-carrier tokens; the window takes both flagged copies.
        window: Vec<Token>,
        words: Vec<String>,
        ball_radius: usize,
    }
    let a: Args = parse_args(args)?;
    let (gs, set) = load_set(&a.gset, &a.subset)?;
    let words = parse_words(&gs, &a.words)?;
    let doubled = double_construction(&set, &words)?;
    let window: Vec<Token> = a
        .window
        .iter()
        .flat_map(|t| [format!("{t}|0"), format!("{t}|1")])
        .collect();
    let sigma = |t: &str| DoubledAction::sigma(t);
    let sw = sageev_window(&doubled.subset, &sigma, &window, &words, a.ball_radius, budget)?;
    let principal: Vec<Value> = sw
        .principal
        .iter()
        .map(|(w, v)| json!({"word": w, "vertex": v}))
        .collect();
    let mut principal_distances = Vec::with_capacity(sw.principal.len());
    for (_, u) in &sw.principal {
        let from_u = sw.graph.bfs_distances(*u as usize);
        principal_distances.push(
            sw.principal
                .iter()
                .map(|(_, v)| from_u[*v as usize])
                .collect::<Vec<u32>>(),
        );
    }
    Ok(OpOutcome::checked(
        json!({
            "window_points": sw.preposet.len(),
            "component_vertices": sw.vertices.len(),
            "total_ultraselections": sw.total_ultraselections,
            "ball_radius": sw.ball_radius,
            "ball_size": sw.ball_size,
            "preorder": sw.preorder,
            "component_median": sw.component_median,
            "principal": principal,
            "principal_distances": principal_distances,
        }),
        sw.component_median,
    ))
}

fn op_eval_f(args: &Value, seed: u64) -> Result<OpOutcome> {
    #[derive(Deserialize)]
    #[serde(deny_unknown_fields)]
    struct Args {
        action: ActionArg,
        g: Vec<i64>,
    }
    let a: Args = parse_args(args)?;
    let action = load_action(a.action, seed)?;
    Ok(OpOutcome::report(json!({
        "rank": action.rank(),
        "value": action.eval(&a.g)?,
    })))
}

fn op_homogeneous_part(args: &Value, seed: u64, budget: &Budget) -> Result<OpOutcome> {
    #[derive(Deserialize)]
    #[serde(deny_unknown_fields)]
    struct Args {
        action: ActionArg,
        g: Vec<i64>,
        #[serde(default = "default_horizon")]
        horizon: i64,
    }
    let a: Args = parse_args(args)?;
    let action = load_action(a.action, seed)?;
    let f = |g: &[i64]| action.eval(g);
    let part = abelian::homogeneous_part(&f, &a.g, a.horizon, budget)?;
    Ok(OpOutcome::checked(
        json!({
            "slope": part.slope.as_ref().map(rational_string),
            "stabilized": part.stabilized,
            "horizon": part.horizon,
            "period": part.period,
        }),
        part.stabilized,
    ))
}

fn default_horizon() -> i64 {
    16
}

fn op_decompose(args: &Value, seed: u64, budget: &Budget) -> Result<OpOutcome> {
    #[derive(Deserialize)]
    #[serde(deny_unknown_fields)]
    struct Args {
        action: ActionArg,
        #[serde(default = "default_bound")]
        bound: i64,
        #[serde(default)]
        supplied: Option<Vec<Vec<i64>>>,
    }
    let a: Args = parse_args(args)?;
    let action = load_action(a.action, seed)?;
    let f = |g: &[i64]| action.eval(g);
    let profile = abelian::decompose(&f, action.rank(), a.bound, a.supplied.as_deref(), budget)?;
    let ok = profile.failure.is_none() && profile.residual_ok;
    Ok(OpOutcome::checked(to_outputs(&profile)?, ok))
}

fn default_bound() -> i64 {
    16
}

fn op_independence_check(args: &Value) -> Result<OpOutcome> {
    #[derive(Deserialize)]
    #[serde(deny_unknown_fields)]
    struct Args {
        characters: Vec<Vec<i64>>,
        #[serde(default = "default_bound")]
        bound: i64,
    }
    let a: Args = parse_args(args)?;
    let independent = abelian::independence_check(&a.characters, a.bound)?;
    Ok(OpOutcome::checked(
        json!({"independent": independent}),
        independent,
    ))
}

fn op_support_length(args: &Value) -> Result<OpOutcome> {
    #[derive(Deserialize)]
    #[serde(deny_unknown_fields)]
    struct Args {
        h: String,
        element: ElementArg,
    }
    let a: Args = parse_args(args)?;
    let h = HGroup::from_fixture(&a.h)?;
    let element = WreathElement::new(&h, &a.element.lamps, a.element.shift)?;
    let length = support_length(&element, &|v| h.standard_length(v));
    Ok(OpOutcome::report(json!({"length": length})))
}

fn op_zx_act(args: &Value) -> Result<OpOutcome> {
    #[derive(Deserialize)]
    #[serde(deny_unknown_fields)]
    struct Args {
        h: String,
        line: SubsetSpec,
        #[serde(default = "default_true")]
        double: bool,
        element: ElementArg,
        point: PointArg,
    }
    #[derive(Deserialize)]
    #[serde(deny_unknown_fields)]
    struct PointArg {
        x: Token,
        #[serde(default)]
        mu: Vec<(i64, i64)>,
    }
    let a: Args = parse_args(args)?;
    let h = HGroup::from_fixture(&a.h)?;
    let data = load_zx(&a.line, h, a.double)?;
    let element = WreathElement::new(&h, &a.element.lamps, a.element.shift)?;
    let point = ZxPoint {
        x: a.point.x,
        mu: a.point.mu.into_iter().collect(),
    };
    data.validate_point(&point)?;
    let image = zx_act(&element, &point, &data)?;
    let mu: Vec<(i64, i64)> = image.mu.into_iter().collect();
    Ok(OpOutcome::report(json!({"x": image.x, "mu": mu})))
}

fn op_ell_zx(args: &Value) -> Result<OpOutcome> {
    #[derive(Deserialize)]
    #[serde(deny_unknown_fields)]
    struct Args {
        h: String,
        line: SubsetSpec,
        #[serde(default = "default_true")]
        double: bool,
        element: ElementArg,
    }
    let a: Args = parse_args(args)?;
    let h = HGroup::from_fixture(&a.h)?;
    let data = load_zx(&a.line, h, a.double)?;
    let element = WreathElement::new(&h, &a.element.lamps, a.element.shift)?;
    Ok(OpOutcome::report(json!({
        "ell": ell_zx(&element, &data)?,
    })))
}

fn op_zx_bounds_check(args: &Value) -> Result<OpOutcome> {
    #[derive(Deserialize)]
    #[serde(deny_unknown_fields)]
    struct Args {
        h: String,
        line: SubsetSpec,
        #[serde(default = "default_true")]
        double: bool,
        element: ElementArg,
    }
    let a: Args = parse_args(args)?;
    let h = HGroup::from_fixture(&a.h)?;
    let data = load_zx(&a.line, h, a.double)?;
    let element = WreathElement::new(&h, &a.element.lamps, a.element.shift)?;
    let report = zx_bounds_check(&element, &data)?;
    let ok = report.all_ok();
    Ok(OpOutcome::checked(to_outputs(&report)?, ok))
}

fn op_pw_combination_check(args: &Value, budget: &Budget) -> Result<OpOutcome> {
    #[derive(Deserialize)]
    #[serde(deny_unknown_fields)]
    struct Args {
        h: String,
        line: SubsetSpec,
        n: u64,
    }
    let a: Args = parse_args(args)?;
    let h = HGroup::from_fixture(&a.h)?;
    let report = pw_combination_check(&a.line.as_z_subset()?, &h, a.n, budget)?;
    Ok(OpOutcome::checked(
        json!({
            "n": report.n,
            "shift_window": report.shift_window,
            "lamp_ball": report.lamp_ball,
            "box_size": report.box_size.to_string(),
            "sublevel_size": report.sublevel_size,
            "contained": report.contained,
        }),
        report.contained,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scenario(op: &str, args: Value) -> Scenario {
        Scenario {
            op: op.into(),
            args,
            seed: None,
            budgets: None,
            expect: None,
        }
    }

    #[test]
    fn ell_on_the_cyclic_example() {
        let s = scenario(
            "ell",
            json!({
                "gset": "zn:10",
                "subset": {"tokens": ["0", "1", "2", "5", "7"]},
                "word": "t",
            }),
        );
        let (result, code) = run_scenario(&s, &RunOptions::default());
        assert_eq!(code, 0);
        assert!(result.pass);
        assert_eq!(result.outputs["ell"], json!(6));
    }

    #[test]
    fn expectation_mismatch_fails_with_exit_one() {
        let mut s = scenario(
            "ell",
            json!({
                "gset": "zn:10",
                "subset": {"tokens": ["0", "1", "2", "5", "7"]},
                "word": "t",
            }),
        );
        s.expect = Some(json!({"ell": 7}));
        let (result, code) = run_scenario(&s, &RunOptions::default());
        assert_eq!(code, 1);
        assert!(!result.pass);
    }

    #[test]
    fn expectation_can_pin_a_negative_outcome() {
        let mut s = scenario(
            "is_median",
            json!({"graph": "cycle:5"}),
        );
        s.expect = Some(json!({"median": false}));
        let (result, code) = run_scenario(&s, &RunOptions::default());
        assert!(result.pass, "{:?}", result.outputs);
        assert_eq!(code, 0);
    }

    #[test]
    fn unknown_operation_is_a_validation_error() {
        let s = scenario("frobnicate", json!({}));
        let (result, code) = run_scenario(&s, &RunOptions::default());
        assert_eq!(code, 3);
        assert!(!result.pass);
        assert_eq!(result.outputs["error"]["kind"], json!("validation"));
    }

    #[test]
    fn unknown_argument_fields_are_rejected() {
        let s = scenario(
            "ell",
            json!({
                "gset": "zn:10",
                "subset": {"tokens": ["0"]},
                "word": "t",
                "surprise": 1,
            }),
        );
        let (_, code) = run_scenario(&s, &RunOptions::default());
        assert_eq!(code, 3);
    }

    #[test]
    fn budget_overrides_reach_the_operation() {
        let mut s = scenario(
            "transfixing_distance",
            json!({
                "gset": "zn:10",
                "subset": {"tokens": ["0", "1", "2", "5", "7"]},
            }),
        );
        s.budgets = Some([("power_set_orbit".to_string(), 0u64)].into());
        let (result, code) = run_scenario(&s, &RunOptions::default());
        assert_eq!(code, 4);
        assert_eq!(result.outputs["error"]["kind"], json!("budget"));
    }

    #[test]
    fn global_overrides_win_over_scenario_ones() {
        let mut s = scenario(
            "transfixing_distance",
            json!({
                "gset": "zn:10",
                "subset": {"tokens": ["0", "1", "2", "5", "7"]},
            }),
        );
        s.budgets = Some([("power_set_orbit".to_string(), 1_000_000u64)].into());
        let options = RunOptions {
            overrides: vec![("power_set_orbit".into(), 0)],
            ..RunOptions::default()
        };
        let (_, code) = run_scenario(&s, &options);
        assert_eq!(code, 4);
    }

    #[test]
    fn results_are_byte_identical_across_runs() {
        let s = scenario(
            "decompose",
            json!({"action": {"random": {"k": 2}}, "bound": 12}),
        );
        let opts = RunOptions {
            seed: Some(7),
            ..RunOptions::default()
        };
        let (a, _) = run_scenario(&s, &opts);
        let (b, _) = run_scenario(&s, &opts);
        assert_eq!(
            serde_json::to_string(&a).unwrap(),
            serde_json::to_string(&b).unwrap()
        );
        assert_eq!(a.seed, 7);
    }

    #[test]
    fn parallel_execution_preserves_order_and_exit() {
        let list = vec![
            scenario("ell", json!({"gset": "zn:6", "subset": {"tokens": ["0"]}, "word": "t"})),
            scenario("frobnicate", json!({})),
            scenario("ell", json!({"gset": "zn:6", "subset": {"tokens": ["0"]}, "word": "t^2"})),
        ];
        let sequential = run_all(&list, &RunOptions::default(), false);
        let parallel = run_all(&list, &RunOptions::default(), true);
        assert_eq!(sequential.exit, 3);
        assert_eq!(parallel.exit, 3);
        let a: Vec<String> = sequential
            .results
            .iter()
            .map(|r| serde_json::to_string(r).unwrap())
            .collect();
        let b: Vec<String> = parallel
            .results
            .iter()
            .map(|r| serde_json::to_string(r).unwrap())
            .collect();
        assert_eq!(a, b);
    }

    #[test]
    fn every_registered_operation_is_dispatchable() {
        // A wrong-shape argument must be rejected as validation, proving the
        // name is known; unknown names answer with their own message.
        let ops = [
            "ell",
            "is_commensurated",
            "transfixing_distance",
            "neumann_check",
            "sm_search",
            "classify_z_commensurated",
            "induce",
            "schreier_graph",
            "count_ends",
            "orbit_commensuration_report",
            "walling_from_commensurated",
            "commensurated_from_walling",
            "wall_distance",
            "pull_back",
            "is_median",
            "median",
            "halfspace",
            "separating_halfspaces",
            "wall_classes",
            "median_orientation",
            "cubulate",
            "invariant_cube",
            "embed_into_powerset",
            "hypercube_fixture",
            "lattice_box_fixture",
            "validate_preposet",
            "enumerate_ultraselections",
            "incidence_graph",
            "check_sageev_median",
            "double_construction",
            "sageev_window",
            "eval_f",
            "homogeneous_part",
            "decompose",
            "independence_check",
            "support_length",
            "zx_act",
            "ell_zx",
            "zx_bounds_check",
            "pw_combination_check",
        ];
        for op in ops {
            let s = scenario(op, json!({"definitely_not_an_argument": true}));
            let (result, _) = run_scenario(&s, &RunOptions::default());
            let message = result.outputs["error"]["message"].as_str().unwrap();
            assert!(
                !message.contains("unknown operation"),
                "{op} missing from the registry: {message}"
            );
        }
    }
}
