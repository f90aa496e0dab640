//! Independent certification of allocations and partitions.
//!
//! The verifier recomputes every MMS value from the raw instance through the
//! oracle and never reuses a solver's normalization, so a normalization bug
//! cannot mask a solver bug. [`naive_mms`] and [`brute_force_best_alpha`]
//! are enumeration references with no code shared with the search in
//! [`crate::oracle`].

use crate::error::{Error, Result};
use crate::instance::{Allocation, Instance, Partition, ReducedInstanceView};
use crate::items::ItemSet;
use crate::oracle::{mms_with_budget, DEFAULT_ITEM_BUDGET};
use crate::rational::Rational;
use serde::Serialize;

#[derive(Clone, Debug, Serialize)]
pub struct AgentCheck {
    pub cost: Rational,
    pub mms: Rational,
    /// `cost / mms`; `None` when the agent has MMS 0 but positive cost.
    pub ratio: Option<Rational>,
    pub within_mms: bool,
    pub within_alpha: bool,
    /// Proportionality `cost <= total / n`, reported informationally.
    pub proportional: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct VerifyReport {
    pub pass: bool,
    pub alpha: Rational,
    /// The unique agent above her MMS, when exactly one exists.
    pub flexible_agent: Option<usize>,
    pub agents: Vec<AgentCheck>,
}

/// Checks the allocation covers all items exactly once, recomputes each
/// agent's MMS through the oracle, and tests the all-but-one guarantee: at
/// least `n - 1` agents within MMS and any remaining agent within
/// `alpha * MMS`.
pub fn verify_allocation(
    instance: &Instance,
    allocation: &Allocation,
    alpha: &Rational,
) -> Result<VerifyReport> {
    verify_allocation_with_budget(instance, allocation, alpha, DEFAULT_ITEM_BUDGET)
}

pub fn verify_allocation_with_budget(
    instance: &Instance,
    allocation: &Allocation,
    alpha: &Rational,
    budget: usize,
) -> Result<VerifyReport> {
    allocation.check_complete(instance)?;
    let n = instance.n();
    let all = instance.all_items();
    let mut agents = Vec::with_capacity(n);
    let mut over = Vec::new();
    for i in 0..n {
        let mms = mms_with_budget(instance, i, all, n, budget)?.value;
        let cost = instance.bundle_cost(i, allocation.bundles[i])?;
        let within_mms = cost <= mms;
        let within_alpha = cost <= alpha * &mms;
        let ratio = cost.checked_div(&mms).or_else(|| {
            // MMS 0: the agent values everything at 0 or fails outright.
            cost.is_zero().then(Rational::zero)
        });
        let proportional = &cost * &Rational::from(n) <= instance.total_cost(i);
        if !within_mms {
            over.push(i);
        }
        agents.push(AgentCheck {
            cost,
            mms,
            ratio,
            within_mms,
            within_alpha,
            proportional,
        });
    }
    let pass = match over.as_slice() {
        [] => true,
        [i] => agents[*i].within_alpha,
        _ => false,
    };
    Ok(VerifyReport {
        pass,
        alpha: alpha.clone(),
        flexible_agent: over.first().copied().filter(|_| over.len() == 1),
        agents,
    })
}

/// True when at most one bundle exceeds normalized cost 1 for `agent` and
/// that bundle stays within `alpha`.
pub fn verify_partition_shape(
    view: &ReducedInstanceView<'_>,
    partition: &Partition,
    agent: usize,
    alpha: &Rational,
) -> bool {
    let one = Rational::one();
    let mut over = 0usize;
    for &b in partition.bundles() {
        let c = view.bundle_cost(agent, b);
        if c > one {
            if c > *alpha {
                return false;
            }
            over += 1;
        }
    }
    over <= 1
}

/// Reference MMS by full enumeration of all `k^|items|` labeled bundle
/// assignments. Test oracle only; independent of the subset search.
pub fn naive_mms(costs: &[Rational], items: ItemSet, k: usize) -> Result<Rational> {
    if k == 0 {
        return Err(Error::InvalidInstance("k must be at least 1".into()));
    }
    let idx: Vec<usize> = items.iter().collect();
    let p = idx.len();
    let states = (k as u64).checked_pow(p as u32).unwrap_or(u64::MAX);
    if states > 20_000_000 {
        return Err(Error::EnumerationBudgetExceeded(format!(
            "{k}^{p} assignments"
        )));
    }
    let mut assign = vec![0usize; p];
    let mut loads = vec![Rational::zero(); k];
    for &e in &idx {
        loads[0] += &costs[e];
    }
    let mut best: Option<Rational> = None;
    loop {
        let cur = loads.iter().max().cloned().unwrap_or_else(Rational::zero);
        if best.as_ref().is_none_or(|b| cur < *b) {
            best = Some(cur);
        }
        // Odometer over assignments, updating loads incrementally.
        let mut pos = 0;
        loop {
            if pos == p {
                return Ok(best.unwrap_or_else(Rational::zero));
            }
            let c = &costs[idx[pos]];
            loads[assign[pos]] -= c;
            assign[pos] += 1;
            if assign[pos] < k {
                loads[assign[pos]] += c;
                break;
            }
            assign[pos] = 0;
            loads[0] += c;
            pos += 1;
        }
    }
}

/// Exact minimum `alpha` for which an all-but-one allocation exists, by
/// exhaustive enumeration of every allocation with oracle MMS values.
/// Budgeted at `n^m <= 2_000_000`.
pub fn brute_force_best_alpha(instance: &Instance) -> Result<Rational> {
    let n = instance.n();
    let m = instance.m();
    let states = (n as u64).checked_pow(m as u32).unwrap_or(u64::MAX);
    if states > 2_000_000 {
        return Err(Error::EnumerationBudgetExceeded(format!(
            "{n}^{m} allocations"
        )));
    }
    let all = instance.all_items();
    let mms: Vec<Rational> = (0..n)
        .map(|i| Ok(mms_with_budget(instance, i, all, n, DEFAULT_ITEM_BUDGET)?.value))
        .collect::<Result<_>>()?;

    let one = Rational::one();
    let mut assign = vec![0usize; m];
    // per_agent[i][a]: cost to agent i of the bundle currently held by agent
    // a. Only the diagonal decides feasibility; keeping the whole matrix
    // makes each odometer step O(n). Agent 0 starts with everything.
    let mut per_agent: Vec<Vec<Rational>> = (0..n)
        .map(|i| {
            let mut v = vec![Rational::zero(); n];
            v[0] = instance.total_cost(i);
            v
        })
        .collect();
    let mut best: Option<Rational> = None;
    loop {
        let mut over: Option<Rational> = None;
        let mut valid = true;
        for i in 0..n {
            let cost = &per_agent[i][i];
            if *cost > mms[i] {
                if mms[i].is_zero() {
                    valid = false;
                    break;
                }
                let ratio = cost.checked_div(&mms[i]).expect("nonzero mms");
                if over.is_some() {
                    valid = false;
                    break;
                }
                over = Some(ratio);
            }
        }
        if valid {
            let needed = over.unwrap_or_else(|| one.clone());
            if best.as_ref().is_none_or(|b| needed < *b) {
                best = Some(needed);
            }
        }
        let mut pos = 0;
        loop {
            if pos == m {
                return Ok(best.unwrap_or_else(Rational::one));
            }
            let from = assign[pos];
            assign[pos] += 1;
            let to = if assign[pos] < n {
                assign[pos]
            } else {
                assign[pos] = 0;
                0
            };
            for (i, row) in per_agent.iter_mut().enumerate() {
                let c = instance.cost(i, pos);
                row[from] -= c;
                row[to] += c;
            }
            if assign[pos] != 0 {
                break;
            }
            pos += 1;
        }
    }
}
