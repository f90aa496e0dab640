//! Randomized verification suites: seeded instance sweeps per agent count,
//! oracle cross-checks, per-procedure invariant checks, and the golden
//! tightness case. Failures are serialized for replay.

use crate::error::Result;
use crate::gen::{four_agent_cases, gen_paper_example, gen_random, three_agent_cases, CostModel};
use crate::instance::{bundle_cost, Instance};
use crate::items::ItemSet;
use crate::oracle::{mms_with_budget, normalize, DEFAULT_ITEM_BUDGET};
use crate::procedures::{
    capped_bag_filling_over, load_balancing, merge_threshold, partition_merging_over,
};
use crate::rational::Rational;
use crate::solver::{alpha_for, solve, CaseTag};
use crate::verify::{naive_mms, verify_allocation};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::path::PathBuf;
use std::str::FromStr;
use std::time::Instant;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SuiteKind {
    OracleCrossCheck,
    LemmaInvariants,
    SolverByN,
    Tightness,
}

impl FromStr for SuiteKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "oracle-cross-check" => Ok(SuiteKind::OracleCrossCheck),
            "lemma-invariants" => Ok(SuiteKind::LemmaInvariants),
            "solver-by-n" => Ok(SuiteKind::SolverByN),
            "tightness" => Ok(SuiteKind::Tightness),
            other => Err(format!("unknown suite '{other}'")),
        }
    }
}

#[derive(Clone, Debug)]
pub struct SuiteConfig {
    pub suites: Vec<SuiteKind>,
    pub seed: u64,
    /// Instances per n in the solver sweep.
    pub solver_cases: usize,
    pub oracle_cases: usize,
    /// Cases per lemma in the invariant suite.
    pub lemma_cases: usize,
    /// Where to write failing instances for replay.
    pub failures_dir: Option<PathBuf>,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        SuiteConfig {
            suites: vec![
                SuiteKind::OracleCrossCheck,
                SuiteKind::LemmaInvariants,
                SuiteKind::SolverByN,
                SuiteKind::Tightness,
            ],
            seed: 0,
            solver_cases: 100,
            oracle_cases: 200,
            lemma_cases: 200,
            failures_dir: None,
        }
    }
}

/// One failed check, with the instance serialized for replay.
#[derive(Clone, Debug, Serialize)]
pub struct Failure {
    pub label: String,
    pub reason: String,
    pub instance: Option<Instance>,
}

#[derive(Clone, Debug, Serialize)]
pub struct SuiteOutcome {
    pub name: String,
    pub cases: usize,
    pub failures: Vec<Failure>,
    /// Largest per-agent cost ratio observed, keyed by agent count.
    pub max_ratio_by_n: BTreeMap<usize, Rational>,
    /// Valid-reduction inequalities re-checked across traces.
    pub reduction_steps_checked: usize,
    pub wall_ms: u128,
}

impl SuiteOutcome {
    fn new(name: &str) -> Self {
        SuiteOutcome {
            name: name.to_string(),
            cases: 0,
            failures: vec![],
            max_ratio_by_n: BTreeMap::new(),
            reduction_steps_checked: 0,
            wall_ms: 0,
        }
    }

    pub fn pass(&self) -> bool {
        self.failures.is_empty()
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SuiteReport {
    pub outcomes: Vec<SuiteOutcome>,
    pub pass: bool,
}

/// Runs the configured suites in order, stopping after the first suite that
/// reports a failure. Failing instances are written under `failures_dir`.
pub fn run_suite(config: &SuiteConfig) -> Result<SuiteReport> {
    let mut outcomes = Vec::new();
    let mut pass = true;
    for kind in &config.suites {
        let outcome = match kind {
            SuiteKind::OracleCrossCheck => run_oracle_cross_check(config.oracle_cases, config.seed),
            SuiteKind::LemmaInvariants => run_lemma_invariants(config.lemma_cases, config.seed),
            SuiteKind::SolverByN => {
                let mut merged = SuiteOutcome::new("solver-by-n");
                for n in 1..=7 {
                    let o = run_solver_cases(n, config.solver_cases, config.seed, true, ALL_MODELS);
                    merged.cases += o.cases;
                    merged.failures.extend(o.failures);
                    merged.reduction_steps_checked += o.reduction_steps_checked;
                    for (k, v) in o.max_ratio_by_n {
                        merged
                            .max_ratio_by_n
                            .entry(k)
                            .and_modify(|cur| {
                                if v > *cur {
                                    *cur = v.clone();
                                }
                            })
                            .or_insert(v);
                    }
                    merged.wall_ms += o.wall_ms;
                    if !merged.failures.is_empty() {
                        break;
                    }
                }
                merged
            }
            SuiteKind::Tightness => run_tightness(),
        };
        if let Some(dir) = &config.failures_dir {
            write_failures(dir, &outcome);
        }
        let ok = outcome.pass();
        outcomes.push(outcome);
        if !ok {
            pass = false;
            break;
        }
    }
    Ok(SuiteReport { outcomes, pass })
}

fn write_failures(dir: &PathBuf, outcome: &SuiteOutcome) {
    if outcome.failures.is_empty() {
        return;
    }
    let _ = std::fs::create_dir_all(dir);
    for (i, f) in outcome.failures.iter().enumerate() {
        let path = dir.join(format!("failure-{}-{}.json", outcome.name, i));
        if let Ok(json) = serde_json::to_string_pretty(f) {
            let _ = std::fs::write(path, json);
        }
    }
}

/// Items-per-instance ceiling for the solver sweep at a given n.
pub fn max_items_for(n: usize) -> usize {
    match n {
        0..=4 => 9,
        _ => 11,
    }
}

/// Model rotation for the default solver sweep.
pub const ALL_MODELS: &[CostModel] = &[
    CostModel::Uniform,
    CostModel::PaperLike,
    CostModel::Adversarial,
];

/// Solves and independently verifies `count` seeded instances with `n`
/// agents at the advertised bound for n, rotating through `models`. For
/// n >= 5 every reduction step is re-checked against a fresh normalization.
pub fn run_solver_cases(
    n: usize,
    count: usize,
    seed: u64,
    constructed: bool,
    models: &[CostModel],
) -> SuiteOutcome {
    let start = Instant::now();
    let mut outcome = SuiteOutcome::new(&format!("solver-n{n}"));
    let alpha = alpha_for(n);

    let mut cases: Vec<(String, Instance, Option<CaseTag>)> = (0..count)
        .map(|i| {
            let case_seed = seed
                .wrapping_mul(1_000_003)
                .wrapping_add((n * 1_000_000 + i) as u64);
            let mut rng = ChaCha8Rng::seed_from_u64(case_seed);
            let max_m = max_items_for(n);
            let m = rng.random_range(n.min(max_m)..=max_m);
            let model = models[i % models.len()];
            (
                format!("n{n}-seed{case_seed}-{model:?}"),
                gen_random(n, m, model, case_seed),
                None,
            )
        })
        .collect();
    if constructed && n == 3 {
        cases.extend(
            three_agent_cases()
                .into_iter()
                .map(|(name, inst, tag)| (name.to_string(), inst, Some(tag))),
        );
    }
    if constructed && n == 4 {
        cases.extend(
            four_agent_cases()
                .into_iter()
                .map(|(name, inst, tag)| (name.to_string(), inst, Some(tag))),
        );
    }

    let results: Vec<std::result::Result<(Rational, usize), Failure>> = cases
        .par_iter()
        .map(|(label, inst, expected_tag)| run_one_solver_case(label, inst, expected_tag, &alpha))
        .collect();

    outcome.cases = results.len();
    for r in results {
        match r {
            Ok((max_ratio, steps)) => {
                outcome.reduction_steps_checked += steps;
                outcome
                    .max_ratio_by_n
                    .entry(n)
                    .and_modify(|cur| {
                        if max_ratio > *cur {
                            *cur = max_ratio.clone();
                        }
                    })
                    .or_insert(max_ratio);
            }
            Err(f) => outcome.failures.push(f),
        }
    }
    outcome.wall_ms = start.elapsed().as_millis();
    outcome
}

fn run_one_solver_case(
    label: &str,
    inst: &Instance,
    expected_tag: &Option<CaseTag>,
    alpha: &Rational,
) -> std::result::Result<(Rational, usize), Failure> {
    let fail = |reason: String| Failure {
        label: label.to_string(),
        reason,
        instance: Some(inst.clone()),
    };
    let res = solve(inst).map_err(|e| fail(format!("solve error: {e}")))?;
    if let Some(tag) = expected_tag {
        if res.case != *tag {
            return Err(fail(format!(
                "expected case {tag:?}, solver took {:?}",
                res.case
            )));
        }
    }
    let report = verify_allocation(inst, &res.allocation, alpha)
        .map_err(|e| fail(format!("verify error: {e}")))?;
    if !report.pass {
        return Err(fail(format!(
            "verification failed at alpha {alpha}: ratios {:?}",
            report
                .agents
                .iter()
                .map(|a| a.ratio.as_ref().map(|r| r.to_string()))
                .collect::<Vec<_>>()
        )));
    }
    let max_ratio = report
        .agents
        .iter()
        .filter_map(|a| a.ratio.clone())
        .max()
        .unwrap_or_else(Rational::zero);

    // Re-check every reduction step against a fresh normalization.
    let mut steps_checked = 0;
    if let Some(trace) = &res.trace {
        if trace.steps.len() > inst.n() {
            return Err(fail(format!(
                "trace has {} steps for {} agents",
                trace.steps.len(),
                inst.n()
            )));
        }
        let norm = normalize(inst).map_err(|e| fail(format!("normalize error: {e}")))?;
        for (si, step) in trace.steps.iter().enumerate() {
            let k = Rational::from(step.surviving_agents.len());
            for &a in &step.surviving_agents {
                if norm.bundle_cost(a, step.surviving_items) > k {
                    return Err(fail(format!(
                        "step {si}: agent {a} breaks the valid-reduction inequality"
                    )));
                }
            }
            steps_checked += 1;
        }
        if !trace.steps.last().map(|s| s.terminal).unwrap_or(false) {
            return Err(fail("trace does not end in a terminal step".into()));
        }
    }
    Ok((max_ratio, steps_checked))
}

/// Exact agreement between the subset search and the naive enumerator on
/// random (agent, items, k) queries with at most 8 items.
pub fn run_oracle_cross_check(cases: usize, seed: u64) -> SuiteOutcome {
    let start = Instant::now();
    let mut outcome = SuiteOutcome::new("oracle-cross-check");
    let results: Vec<Option<Failure>> = (0..cases)
        .into_par_iter()
        .map(|i| {
            let case_seed = seed.wrapping_mul(7_777_777).wrapping_add(i as u64);
            let mut rng = ChaCha8Rng::seed_from_u64(case_seed);
            let n = rng.random_range(1..=3);
            let m = rng.random_range(1..=8);
            let model = if i % 2 == 0 {
                CostModel::Uniform
            } else {
                CostModel::PaperLike
            };
            let inst = gen_random(n, m, model, case_seed);
            let agent = rng.random_range(0..n);
            let k = rng.random_range(1..=4);
            let mut items = ItemSet::empty();
            for e in 0..m {
                if rng.random_range(0..4) != 0 {
                    items = items.with(e);
                }
            }
            let fast = match mms_with_budget(&inst, agent, items, k, DEFAULT_ITEM_BUDGET) {
                Ok(r) => r,
                Err(e) => {
                    return Some(Failure {
                        label: format!("oracle-seed{case_seed}"),
                        reason: format!("oracle error: {e}"),
                        instance: Some(inst),
                    })
                }
            };
            let slow = match naive_mms(inst.cost_row(agent), items, k) {
                Ok(v) => v,
                Err(e) => {
                    return Some(Failure {
                        label: format!("oracle-seed{case_seed}"),
                        reason: format!("naive error: {e}"),
                        instance: Some(inst),
                    })
                }
            };
            if fast.value != slow {
                return Some(Failure {
                    label: format!("oracle-seed{case_seed}"),
                    reason: format!(
                        "oracle disagreement: search {} vs enumeration {slow} (agent {agent}, items {items:?}, k {k})",
                        fast.value
                    ),
                    instance: Some(inst),
                });
            }
            let witness_max = fast
                .witness
                .bundles()
                .iter()
                .map(|&b| inst.bundle_cost(agent, b).unwrap())
                .max()
                .unwrap_or_else(Rational::zero);
            if witness_max != fast.value {
                return Some(Failure {
                    label: format!("oracle-seed{case_seed}"),
                    reason: "witness does not achieve the reported value".into(),
                    instance: Some(inst),
                });
            }
            None
        })
        .collect();
    outcome.cases = cases;
    outcome.failures = results.into_iter().flatten().collect();
    outcome.wall_ms = start.elapsed().as_millis();
    outcome
}

/// Random costs in [0, 1] with small denominators.
fn random_unit_costs(rng: &mut ChaCha8Rng, m: usize) -> Vec<Rational> {
    const DENS: [i64; 6] = [3, 4, 5, 6, 8, 10];
    (0..m)
        .map(|_| {
            let den = DENS[rng.random_range(0..DENS.len())];
            Rational::new(rng.random_range(0..=den), den)
        })
        .collect()
}

/// Random costs in (0, 1] with small denominators.
fn random_positive_unit_costs(rng: &mut ChaCha8Rng, m: usize) -> Vec<Rational> {
    const DENS: [i64; 6] = [3, 4, 5, 6, 8, 10];
    (0..m)
        .map(|_| {
            let den = DENS[rng.random_range(0..DENS.len())];
            Rational::new(rng.random_range(1..=den), den)
        })
        .collect()
}

/// Scales costs down so their total is at most (or strictly below) `cap`.
/// Scaling down keeps every item at most 1.
fn scale_total_to(costs: &mut [Rational], cap: &Rational, strict: bool) {
    let total: Rational = costs.iter().sum();
    if total < *cap || (!strict && total == *cap) {
        return;
    }
    if total.is_zero() {
        return;
    }
    let mut factor = cap.checked_div(&total).expect("nonzero total");
    if strict {
        factor = factor * Rational::new(99, 100);
    }
    for c in costs.iter_mut() {
        *c = &*c * &factor;
    }
}

/// Per-procedure invariants, `cases` randomized checks each:
/// load-balancing's removed-item bound, the (4/3, 1) split, bag-filling's
/// last-bundle and leftover bounds, partition-merging's merged-bundle bound,
/// and the two-item reduction monotonicity.
pub fn run_lemma_invariants(cases: usize, seed: u64) -> SuiteOutcome {
    let start = Instant::now();
    let mut outcome = SuiteOutcome::new("lemma-invariants");
    type LemmaCheck = fn(u64) -> std::result::Result<(), String>;
    let checks: [(&str, LemmaCheck); 5] = [
        ("load-balancing-removed-item", check_load_balancing),
        ("four-thirds-pair-split", check_pair_split),
        ("capped-bag-filling-bounds", check_bag_filling),
        ("partition-merging-bound", check_partition_merging),
        ("two-item-reduction", check_two_item_reduction),
    ];
    for (name, check) in checks {
        let failures: Vec<Failure> = (0..cases)
            .into_par_iter()
            .filter_map(|i| {
                let case_seed = seed.wrapping_mul(31_337).wrapping_add(i as u64);
                check(case_seed).err().map(|reason| Failure {
                    label: format!("{name}-seed{case_seed}"),
                    reason,
                    instance: None,
                })
            })
            .collect();
        outcome.cases += cases;
        outcome.failures.extend(failures);
        if !outcome.failures.is_empty() {
            break;
        }
    }
    outcome.wall_ms = start.elapsed().as_millis();
    outcome
}

/// With positive items and total cost at most n', removing any item from a
/// load-balanced bundle drops it strictly below 1. (A zero-cost item placed
/// on a bundle sitting at exactly 1 would meet the bound with equality, so
/// the strict form needs positive costs; see the zero-item boundary test in
/// the procedures module.)
fn check_load_balancing(seed: u64) -> std::result::Result<(), String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n_prime = rng.random_range(2..=5);
    let m = rng.random_range(1..=10);
    let mut costs = random_positive_unit_costs(&mut rng, m);
    scale_total_to(&mut costs, &Rational::from(n_prime), false);
    let items = ItemSet::full(m);
    let p = load_balancing(&costs, items, n_prime);
    let one = Rational::one();
    for &b in p.bundles() {
        let total = bundle_cost(&costs, b);
        for e in b.iter() {
            if &total - &costs[e] >= one {
                return Err(format!(
                    "bundle {b:?} minus item {e} still costs {}",
                    &total - &costs[e]
                ));
            }
        }
    }
    Ok(())
}

/// With total at most 2, the two-way load balance is a (4/3, 1) split.
fn check_pair_split(seed: u64) -> std::result::Result<(), String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let m = rng.random_range(1..=10);
    let mut costs = random_unit_costs(&mut rng, m);
    scale_total_to(&mut costs, &Rational::from(2usize), false);
    let p = load_balancing(&costs, ItemSet::full(m), 2);
    let (a, b) = (
        bundle_cost(&costs, p.bundle(0)),
        bundle_cost(&costs, p.bundle(1)),
    );
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    if hi > Rational::new(4, 3) {
        return Err(format!("larger bundle costs {hi}"));
    }
    if lo > Rational::one() {
        return Err(format!("smaller bundle costs {lo}"));
    }
    Ok(())
}

/// With total at most k and items at most 1: at most k-1 leftovers, bundles
/// 1..k-1 within 1, and the last bundle within k^2/(2k-1).
fn check_bag_filling(seed: u64) -> std::result::Result<(), String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let k = rng.random_range(1..=5);
    let m = rng.random_range(0..=10);
    let mut costs = random_unit_costs(&mut rng, m);
    scale_total_to(&mut costs, &Rational::from(k), false);
    let items = ItemSet::full(m);
    let fill =
        capped_bag_filling_over(&costs, items, k).map_err(|e| format!("bag filling: {e}"))?;
    if fill.leftovers.len() >= k {
        return Err(format!("{} leftovers for {k} bundles", fill.leftovers.len()));
    }
    let ki = k as i64;
    let last_bound = Rational::new(ki * ki, 2 * ki - 1);
    let p = fill.partition;
    for (j, &b) in p.bundles().iter().enumerate() {
        let c = bundle_cost(&costs, b);
        if j + 1 < k && c > Rational::one() {
            return Err(format!("bundle {j} costs {c}"));
        }
        if j + 1 == k && c > last_bound {
            return Err(format!("last bundle costs {c}, bound {last_bound}"));
        }
    }
    Ok(())
}

/// On a strictly valid view with k survivors, merging the original witness
/// keeps the merged bundle strictly below (-k^2 + (1+n)k)/n and every other
/// bundle within 1.
fn check_partition_merging(seed: u64) -> std::result::Result<(), String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.random_range(5..=7);
    let m = rng.random_range(n..=10);
    let inst = gen_random(n, m, CostModel::Uniform, seed);
    let norm = normalize(&inst).map_err(|e| format!("normalize: {e}"))?;
    let k = rng.random_range(merge_threshold(n) + 1..=n);
    let costs = norm.cost_row(0);
    // Drop items until the total is strictly below k.
    let bound = Rational::from(k);
    let mut items = inst.all_items();
    let mut order: Vec<usize> = items.iter().collect();
    while bundle_cost(costs, items) >= bound {
        match order.pop() {
            Some(e) => items = items.without(e),
            None => break,
        }
    }
    let p = partition_merging_over(costs, norm.witness(0), items, k)
        .map_err(|e| format!("merge: {e}"))?;
    let (ni, ki) = (n as i64, k as i64);
    let merged_bound = Rational::new(-(ki * ki) + (1 + ni) * ki, ni);
    for (j, &b) in p.bundles().iter().enumerate() {
        let c = bundle_cost(costs, b);
        if j + 1 < k && c > Rational::one() {
            return Err(format!("kept bundle {j} costs {c}"));
        }
        if j + 1 == k && c >= merged_bound {
            return Err(format!("merged bundle costs {c}, bound {merged_bound}"));
        }
    }
    Ok(())
}

/// Two items reaching the MMS together can be dropped alongside one bundle:
/// MMS over n-1 bundles does not grow.
fn check_two_item_reduction(seed: u64) -> std::result::Result<(), String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.random_range(2..=4);
    let m = rng.random_range(2..=8);
    let inst = gen_random(n, m, CostModel::PaperLike, seed);
    let all = inst.all_items();
    for agent in 0..n {
        let base = mms_with_budget(&inst, agent, all, n, DEFAULT_ITEM_BUDGET)
            .map_err(|e| format!("mms: {e}"))?
            .value;
        let mut checked = 0;
        'pairs: for e1 in 0..m {
            for e2 in (e1 + 1)..m {
                if inst.cost(agent, e1) + inst.cost(agent, e2) >= base {
                    let reduced = mms_with_budget(
                        &inst,
                        agent,
                        all.without(e1).without(e2),
                        n - 1,
                        DEFAULT_ITEM_BUDGET,
                    )
                    .map_err(|e| format!("mms: {e}"))?
                    .value;
                    if reduced > base {
                        return Err(format!(
                            "agent {agent}: removing {{{e1},{e2}}} raised MMS from {base} to {reduced}"
                        ));
                    }
                    checked += 1;
                    if checked >= 5 {
                        break 'pairs;
                    }
                }
            }
        }
    }
    Ok(())
}

/// The golden case: the worked example solves to ratios exactly
/// (9/8, 3/4, 1) and serializes byte-identically across runs.
pub fn run_tightness() -> SuiteOutcome {
    let start = Instant::now();
    let mut outcome = SuiteOutcome::new("tightness");
    outcome.cases = 1;
    let inst = gen_paper_example();
    let run = || -> std::result::Result<String, String> {
        let res = solve(&inst).map_err(|e| e.to_string())?;
        let expected = [
            Rational::new(9, 8),
            Rational::new(3, 4),
            Rational::one(),
        ];
        if res.allocation.ratios != expected {
            return Err(format!("ratios {:?}", res.allocation.ratios));
        }
        if res.allocation.flexible_agent != Some(0) {
            return Err(format!(
                "flexible agent {:?}",
                res.allocation.flexible_agent
            ));
        }
        serde_json::to_string(&res.allocation).map_err(|e| e.to_string())
    };
    match (run(), run()) {
        (Ok(a), Ok(b)) if a == b => {
            outcome
                .max_ratio_by_n
                .insert(3, Rational::new(9, 8));
        }
        (Ok(_), Ok(_)) => outcome.failures.push(Failure {
            label: "tightness".into(),
            reason: "allocation JSON differs between runs".into(),
            instance: Some(inst),
        }),
        (Err(e), _) | (_, Err(e)) => outcome.failures.push(Failure {
            label: "tightness".into(),
            reason: e,
            instance: Some(inst),
        }),
    }
    outcome.wall_ms = start.elapsed().as_millis();
    outcome
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_config_gives_empty_report() {
        let cfg = SuiteConfig {
            suites: vec![],
            ..SuiteConfig::default()
        };
        let report = run_suite(&cfg).unwrap();
        assert!(report.pass);
        assert!(report.outcomes.is_empty());
    }

    #[test]
    fn tightness_passes() {
        let o = run_tightness();
        assert!(o.pass(), "{:?}", o.failures);
    }

    #[test]
    fn small_solver_sweep() {
        for n in 1..=7 {
            let o = run_solver_cases(n, 6, 42, false, ALL_MODELS);
            assert!(o.pass(), "n={n}: {:?}", o.failures);
            assert_eq!(o.cases, 6);
            if let Some(max) = o.max_ratio_by_n.get(&n) {
                assert!(*max <= alpha_for(n));
            }
        }
    }

    #[test]
    fn failure_artifacts_are_written() {
        let dir = std::env::temp_dir().join(format!("amms-failures-{}", std::process::id()));
        let _ = std::fs::remove_dir_all(&dir);
        let mut outcome = SuiteOutcome::new("demo");
        outcome.failures.push(Failure {
            label: "case-1".into(),
            reason: "bound violated".into(),
            instance: Some(crate::gen::gen_paper_example()),
        });
        write_failures(&dir, &outcome);
        let artifact = dir.join("failure-demo-0.json");
        let text = std::fs::read_to_string(&artifact).unwrap();
        let parsed: serde_json::Value = serde_json::from_str(&text).unwrap();
        assert_eq!(parsed["reason"], "bound violated");
        assert_eq!(parsed["instance"]["n"], 3);
        let _ = std::fs::remove_dir_all(&dir);
    }

    #[test]
    fn small_oracle_cross_check() {
        let o = run_oracle_cross_check(25, 9);
        assert!(o.pass(), "{:?}", o.failures);
    }

    #[test]
    fn small_lemma_sweep() {
        let o = run_lemma_invariants(20, 5);
        assert!(o.pass(), "{:?}", o.failures);
    }
}
