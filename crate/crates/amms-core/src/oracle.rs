//! Exact computation of maximin-share values and witness partitions.
//!
//! The oracle is the only place MMS values originate; the solvers and the
//! verifier both consume it and never re-derive MMS on their own.
//!
//! The search is a memoized branch-and-bound over item subsets:
//! `f(S, j) = min over T ⊆ S of max(c(T), f(S \ T, j - 1))`, with the first
//! bundle canonically forced to contain the lowest item of `S`. Candidate
//! first bundles are enumerated in ascending compact-mask order and ties keep
//! the earliest candidate, so witnesses are deterministic. Exact answers are
//! practical to roughly [`DEFAULT_ITEM_BUDGET`] items; larger queries are
//! refused with [`Error::OracleBudgetExceeded`].

use crate::error::{Error, Result};
use crate::instance::{bundle_cost, Instance, NormalizedInstance, Partition};
use crate::items::ItemSet;
use crate::rational::Rational;
use std::collections::HashMap;

/// Default cap on the number of items in a single oracle query.
pub const DEFAULT_ITEM_BUDGET: usize = 24;

/// Dense subset-sum tables are only built up to this many items.
const SUM_TABLE_LIMIT: usize = 16;

/// An exact MMS value together with a witness partition achieving it.
#[derive(Clone, Debug)]
pub struct MmsResult {
    pub value: Rational,
    pub witness: Partition,
}

/// `MMS_agent(items, k)` under the default item budget.
pub fn mms(instance: &Instance, agent: usize, items: ItemSet, k: usize) -> Result<MmsResult> {
    mms_with_budget(instance, agent, items, k, DEFAULT_ITEM_BUDGET)
}

pub fn mms_with_budget(
    instance: &Instance,
    agent: usize,
    items: ItemSet,
    k: usize,
    budget: usize,
) -> Result<MmsResult> {
    if agent >= instance.n() {
        return Err(Error::InvalidInstance(format!(
            "agent index {agent} out of range (n = {})",
            instance.n()
        )));
    }
    if !items.is_subset_of(instance.all_items()) {
        return Err(Error::InvalidInstance(
            "query items outside the instance".into(),
        ));
    }
    mms_over_costs(instance.cost_row(agent), items, k, budget)
}

/// Witness-only convenience wrapper around [`mms`].
pub fn mms_partition(
    instance: &Instance,
    agent: usize,
    items: ItemSet,
    k: usize,
) -> Result<Partition> {
    Ok(mms(instance, agent, items, k)?.witness)
}

/// The core search over an explicit cost row. Exposed so procedures can run
/// it against normalized (view) costs.
pub fn mms_over_costs(
    costs: &[Rational],
    items: ItemSet,
    k: usize,
    budget: usize,
) -> Result<MmsResult> {
    if k == 0 {
        return Err(Error::InvalidInstance("k must be at least 1".into()));
    }
    let p = items.len();
    if p > budget {
        return Err(Error::OracleBudgetExceeded {
            items: p,
            budget,
        });
    }

    let positions: Vec<usize> = items.iter().collect();
    let local_costs: Vec<Rational> = positions.iter().map(|&e| costs[e].clone()).collect();

    let mut search = Search::new(local_costs);
    let full: u32 = if p == 32 { u32::MAX } else { (1u32 << p) - 1 };
    let (value, _) = search.solve(full, k);
    let local_bundles = search.reconstruct(full, k);

    let bundles: Vec<ItemSet> = local_bundles
        .iter()
        .map(|&b| {
            let mut s = ItemSet::empty();
            let mut rest = b;
            while rest != 0 {
                let bit = rest.trailing_zeros() as usize;
                s = s.with(positions[bit]);
                rest &= rest - 1;
            }
            s
        })
        .collect();
    debug_assert_eq!(bundles.len(), k);
    let witness = Partition::new(bundles, items)?;
    debug_assert_eq!(
        witness
            .bundles()
            .iter()
            .map(|&b| bundle_cost(costs, b))
            .max()
            .unwrap_or_else(Rational::zero),
        value
    );
    Ok(MmsResult { value, witness })
}

struct Search {
    costs: Vec<Rational>,
    // Dense subset sums for small queries, otherwise summed per call.
    sums: Option<Vec<Rational>>,
    memo: HashMap<u64, (Rational, u32)>,
}

impl Search {
    fn new(costs: Vec<Rational>) -> Self {
        let p = costs.len();
        let sums = if p <= SUM_TABLE_LIMIT {
            let mut table = vec![Rational::zero(); 1usize << p];
            for mask in 1..(1usize << p) {
                let low = mask.trailing_zeros() as usize;
                table[mask] = &table[mask & (mask - 1)] + &costs[low];
            }
            Some(table)
        } else {
            None
        };
        Search {
            costs,
            sums,
            memo: HashMap::new(),
        }
    }

    fn sum(&self, mask: u32) -> Rational {
        match &self.sums {
            Some(table) => table[mask as usize].clone(),
            None => {
                let mut acc = Rational::zero();
                let mut rest = mask;
                while rest != 0 {
                    acc += &self.costs[rest.trailing_zeros() as usize];
                    rest &= rest - 1;
                }
                acc
            }
        }
    }

    fn max_item(&self, mask: u32) -> Rational {
        let mut best = Rational::zero();
        let mut rest = mask;
        while rest != 0 {
            let c = &self.costs[rest.trailing_zeros() as usize];
            if *c > best {
                best = c.clone();
            }
            rest &= rest - 1;
        }
        best
    }

    /// Exact `f(mask, j)` plus the canonical first bundle.
    fn solve(&mut self, mask: u32, j: usize) -> (Rational, u32) {
        if j == 1 {
            return (self.sum(mask), mask);
        }
        if mask == 0 {
            return (Rational::zero(), 0);
        }
        if mask.count_ones() as usize <= j {
            // One item per bundle is optimal; peel the lowest.
            let low = mask & mask.wrapping_neg();
            return (self.max_item(mask), low);
        }
        let key = ((mask as u64) << 8) | j as u64;
        if let Some(hit) = self.memo.get(&key) {
            return hit.clone();
        }

        let low_bit = mask & mask.wrapping_neg();
        let rest = mask & !low_bit;
        let lower = {
            let by_split = self.sum(mask) / Rational::from(j);
            let by_item = self.max_item(mask);
            if by_item > by_split {
                by_item
            } else {
                by_split
            }
        };

        let mut best: Option<(Rational, u32)> = None;
        // Subsets of `rest` in ascending numeric order; the first strict
        // improvement wins, which fixes the witness deterministically.
        let mut sub: u32 = 0;
        loop {
            let t = sub | low_bit;
            let cost_t = self.sum(t);
            let skip = match &best {
                Some((b, _)) => {
                    if cost_t >= *b {
                        true
                    } else {
                        let rem = mask & !t;
                        let child_floor = self.sum(rem) / Rational::from(j - 1);
                        child_floor >= *b || self.max_item(rem) >= *b
                    }
                }
                None => false,
            };
            if !skip {
                let rem = mask & !t;
                let (val_rest, _) = self.solve(rem, j - 1);
                let cand = if cost_t > val_rest { cost_t } else { val_rest };
                let improves = match &best {
                    Some((b, _)) => cand < *b,
                    None => true,
                };
                if improves {
                    let done = cand == lower;
                    best = Some((cand, t));
                    if done {
                        break;
                    }
                }
            }
            if sub == rest {
                break;
            }
            sub = sub.wrapping_sub(rest) & rest;
        }

        let result = best.expect("at least one first bundle is always evaluated");
        self.memo.insert(key, result.clone());
        result
    }

    /// Reads the canonical witness back out of the memoized search.
    fn reconstruct(&mut self, mut mask: u32, k: usize) -> Vec<u32> {
        let mut bundles = Vec::with_capacity(k);
        let mut j = k;
        while j > 1 {
            let (_, first) = self.solve(mask, j);
            bundles.push(first);
            mask &= !first;
            j -= 1;
        }
        bundles.push(mask);
        bundles
    }
}

/// Computes per-agent MMS values and witnesses and rescales every agent's
/// costs by her own MMS, so MMS-feasibility becomes "cost at most 1".
///
/// Agents with MMS 0 necessarily value every item at 0; their normalized row
/// is all zeros and every bundle is feasible for them.
pub fn normalize(instance: &Instance) -> Result<NormalizedInstance> {
    normalize_with_budget(instance, DEFAULT_ITEM_BUDGET)
}

pub fn normalize_with_budget(instance: &Instance, budget: usize) -> Result<NormalizedInstance> {
    let n = instance.n();
    let all = instance.all_items();
    let mut mms_values = Vec::with_capacity(n);
    let mut witnesses = Vec::with_capacity(n);
    let mut norm_costs = Vec::with_capacity(n);
    for i in 0..n {
        let res = mms_with_budget(instance, i, all, n, budget)?;
        if res.value.is_zero() {
            if !instance.total_cost(i).is_zero() {
                return Err(Error::DegenerateInstance(format!(
                    "agent {i} has MMS 0 but positive total cost"
                )));
            }
            norm_costs.push(vec![Rational::zero(); instance.m()]);
        } else {
            let row: Vec<Rational> = instance
                .cost_row(i)
                .iter()
                .map(|c| c / &res.value)
                .collect();
            // c_i(e) <= MMS_i and c_i(M) <= n * MMS_i hold for every
            // instance; failing either means the search returned a wrong
            // value.
            for (e, c) in row.iter().enumerate() {
                if *c > Rational::one() {
                    return Err(Error::InternalInvariant(format!(
                        "normalized cost[{i}][{e}] = {c} exceeds 1"
                    )));
                }
            }
            if instance.total_cost(i) > Rational::from(n) * &res.value {
                return Err(Error::InternalInvariant(format!(
                    "agent {i}: total cost exceeds n times the MMS value"
                )));
            }
            norm_costs.push(row);
        }
        mms_values.push(res.value);
        witnesses.push(res.witness);
    }
    Ok(NormalizedInstance::from_parts(
        instance.clone(),
        mms_values,
        witnesses,
        norm_costs,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gen::gen_paper_example;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn ints(costs: &[i64]) -> Vec<Rational> {
        costs.iter().map(|&c| Rational::from(c)).collect()
    }

    #[test]
    fn paper_example_witness_for_agent_three() {
        let inst = gen_paper_example();
        let res = mms(&inst, 2, inst.all_items(), 3).unwrap();
        assert_eq!(res.value, Rational::one());
        let expect: Vec<ItemSet> = vec![
            [0, 1].into_iter().collect(),
            [2, 3, 4].into_iter().collect(),
            [5, 6, 7].into_iter().collect(),
        ];
        assert_eq!(res.witness.bundles(), expect.as_slice());
    }

    #[test]
    fn k_one_returns_total() {
        let inst = gen_paper_example();
        let items: ItemSet = [1, 3, 7].into_iter().collect();
        let res = mms(&inst, 0, items, 1).unwrap();
        assert_eq!(res.value, inst.bundle_cost(0, items).unwrap());
        assert_eq!(res.witness.bundles(), &[items]);
        // The witness-only wrapper returns the same partition.
        assert_eq!(mms_partition(&inst, 0, items, 1).unwrap(), res.witness);
    }

    #[test]
    fn two_partition_of_small_integers() {
        // {3,3,2,2,2} into 2 bundles: optimum 6 (frozen from exhaustive
        // enumeration of all 2-partitions).
        let res = mms_over_costs(&ints(&[3, 3, 2, 2, 2]), ItemSet::full(5), 2, 24).unwrap();
        assert_eq!(res.value, Rational::from(6i64));
    }

    #[test]
    fn more_bundles_than_items() {
        let res = mms_over_costs(&ints(&[5, 2]), ItemSet::full(2), 4, 24).unwrap();
        assert_eq!(res.value, Rational::from(5i64));
        assert_eq!(res.witness.len(), 4);
        assert_eq!(res.witness.bundle(2), ItemSet::empty());
    }

    #[test]
    fn budget_guard() {
        let costs = ints(&[1; 30]);
        let err = mms_over_costs(&costs, ItemSet::full(30), 3, 24).unwrap_err();
        assert!(matches!(err, Error::OracleBudgetExceeded { items: 30, budget: 24 }));
    }

    #[test]
    fn normalize_paper_example() {
        let inst = gen_paper_example();
        let norm = normalize(&inst).unwrap();
        for i in 0..3 {
            assert_eq!(*norm.mms(i), Rational::one());
            assert_eq!(norm.cost_row(i), inst.cost_row(i));
        }
    }

    #[test]
    fn normalize_single_agent_single_item() {
        let inst = Instance::new(vec![vec![Rational::from(7i64)]]).unwrap();
        let norm = normalize(&inst).unwrap();
        assert_eq!(*norm.mms(0), Rational::from(7i64));
        assert_eq!(norm.cost_row(0), &[Rational::one()]);
    }

    #[test]
    fn normalize_scale_invariance() {
        let inst = gen_paper_example();
        let scale = Rational::new(7, 3);
        let scaled = Instance::new(
            (0..inst.n())
                .map(|i| inst.cost_row(i).iter().map(|c| c * &scale).collect())
                .collect(),
        )
        .unwrap();
        let a = normalize(&inst).unwrap();
        let b = normalize(&scaled).unwrap();
        for i in 0..inst.n() {
            assert_eq!(a.cost_row(i), b.cost_row(i));
        }
    }

    #[test]
    fn normalize_zero_mms_agent() {
        let inst = Instance::new(vec![
            vec![Rational::zero(), Rational::zero()],
            vec![Rational::one(), Rational::one()],
        ])
        .unwrap();
        let norm = normalize(&inst).unwrap();
        assert!(norm.mms(0).is_zero());
        assert!(norm.cost_row(0).iter().all(|c| c.is_zero()));
    }

    #[test]
    fn witness_always_achieves_value() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..60 {
            let m = rng.random_range(1..=8);
            let k = rng.random_range(1..=4);
            let costs: Vec<Rational> =
                (0..m).map(|_| Rational::from(rng.random_range(0i64..=20))).collect();
            let items = ItemSet::full(m);
            let res = mms_over_costs(&costs, items, k, 24).unwrap();
            let max = res
                .witness
                .bundles()
                .iter()
                .map(|&b| bundle_cost(&costs, b))
                .max()
                .unwrap();
            assert_eq!(max, res.value);
            assert_eq!(res.witness.len(), k);
        }
    }

    #[test]
    fn monotone_in_k_and_items() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        for _ in 0..40 {
            let m = rng.random_range(2..=7);
            let costs: Vec<Rational> =
                (0..m).map(|_| Rational::from(rng.random_range(0i64..=12))).collect();
            let items = ItemSet::full(m);
            for k in 1..m {
                let coarse = mms_over_costs(&costs, items, k, 24).unwrap().value;
                let fine = mms_over_costs(&costs, items, k + 1, 24).unwrap().value;
                assert!(fine <= coarse, "not non-increasing in k");
            }
            // Dropping an item cannot increase the value.
            let k = rng.random_range(1..=3);
            let full = mms_over_costs(&costs, items, k, 24).unwrap().value;
            let drop = rng.random_range(0..m);
            let fewer = mms_over_costs(&costs, items.without(drop), k, 24)
                .unwrap()
                .value;
            assert!(fewer <= full);
        }
    }

    #[test]
    fn two_item_removal_lemma() {
        // If two items together cost at least MMS(M, n), removing both keeps
        // MMS over n-1 bundles no larger.
        let mut rng = ChaCha8Rng::seed_from_u64(37);
        for _ in 0..40 {
            let m = rng.random_range(3..=7);
            let n = rng.random_range(2..=3);
            let costs: Vec<Rational> =
                (0..m).map(|_| Rational::from(rng.random_range(0i64..=10))).collect();
            let items = ItemSet::full(m);
            let base = mms_over_costs(&costs, items, n, 24).unwrap().value;
            for e1 in 0..m {
                for e2 in (e1 + 1)..m {
                    if &costs[e1] + &costs[e2] >= base {
                        let reduced =
                            mms_over_costs(&costs, items.without(e1).without(e2), n - 1, 24)
                                .unwrap()
                                .value;
                        assert!(reduced <= base);
                    }
                }
            }
        }
    }
}
