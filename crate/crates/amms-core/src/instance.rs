//! The exact-arithmetic domain model: instances, partitions, normalized
//! instances, reduced views, and allocations.

use crate::error::{Error, Result};
use crate::items::{ItemSet, MAX_ITEMS};
use crate::rational::Rational;
use serde::{Deserialize, Serialize};

/// A chore-allocation instance: `n` agents, `m` items, and an exact
/// nonnegative cost matrix.
///
/// Agents are indexed `0..n-1` and items `0..m-1`; indices are stable
/// identities throughout the crate.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Instance {
    n: usize,
    m: usize,
    costs: Vec<Vec<Rational>>,
}

impl Instance {
    pub fn new(costs: Vec<Vec<Rational>>) -> Result<Self> {
        let n = costs.len();
        if n == 0 {
            return Err(Error::InvalidInstance("need at least one agent".into()));
        }
        let m = costs[0].len();
        if m > MAX_ITEMS {
            return Err(Error::InvalidInstance(format!(
                "{m} items exceeds the supported maximum of {MAX_ITEMS}"
            )));
        }
        for (i, row) in costs.iter().enumerate() {
            if row.len() != m {
                return Err(Error::InvalidInstance(format!(
                    "agent {i} has {} costs, expected {m}",
                    row.len()
                )));
            }
            for (e, c) in row.iter().enumerate() {
                if c.is_negative() {
                    return Err(Error::InvalidInstance(format!(
                        "cost[{i}][{e}] = {c} is negative"
                    )));
                }
            }
        }
        Ok(Instance { n, m, costs })
    }

    /// Convenience constructor from integer pairs; rows of `(num, den)`.
    pub fn from_pairs(rows: &[&[(i64, i64)]]) -> Result<Self> {
        Instance::new(
            rows.iter()
                .map(|r| r.iter().map(|&(p, q)| Rational::new(p, q)).collect())
                .collect(),
        )
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn all_items(&self) -> ItemSet {
        ItemSet::full(self.m)
    }

    pub fn cost(&self, agent: usize, item: usize) -> &Rational {
        &self.costs[agent][item]
    }

    pub fn cost_row(&self, agent: usize) -> &[Rational] {
        &self.costs[agent]
    }

    /// Exact additive cost of `bundle` for `agent`.
    pub fn bundle_cost(&self, agent: usize, bundle: ItemSet) -> Result<Rational> {
        if agent >= self.n {
            return Err(Error::InvalidInstance(format!(
                "agent index {agent} out of range (n = {})",
                self.n
            )));
        }
        if !bundle.is_subset_of(self.all_items()) {
            return Err(Error::InvalidInstance(format!(
                "bundle {bundle:?} contains items outside 0..{}",
                self.m
            )));
        }
        Ok(bundle_cost(&self.costs[agent], bundle))
    }

    pub fn total_cost(&self, agent: usize) -> Rational {
        bundle_cost(&self.costs[agent], self.all_items())
    }
}

/// Sum of a cost row over an item set. Callers guarantee the indices exist.
pub(crate) fn bundle_cost(costs: &[Rational], bundle: ItemSet) -> Rational {
    let mut acc = Rational::zero();
    for e in bundle.iter() {
        acc += &costs[e];
    }
    acc
}

#[derive(Serialize, Deserialize)]
struct InstanceJson {
    n: usize,
    m: usize,
    costs: Vec<Vec<Rational>>,
}

impl Serialize for Instance {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        InstanceJson {
            n: self.n,
            m: self.m,
            costs: self.costs.clone(),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Instance {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let raw = InstanceJson::deserialize(deserializer)?;
        let inst = Instance::new(raw.costs).map_err(serde::de::Error::custom)?;
        if inst.n != raw.n || inst.m != raw.m {
            return Err(serde::de::Error::custom(format!(
                "declared dimensions {}x{} do not match the cost matrix {}x{}",
                raw.n, raw.m, inst.n, inst.m
            )));
        }
        Ok(inst)
    }
}

/// An ordered `k`-partition of a ground item set. Bundles may be empty.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Partition {
    bundles: Vec<ItemSet>,
    ground: ItemSet,
}

impl Partition {
    /// Bundles must be pairwise disjoint and union to `ground`.
    pub fn new(bundles: Vec<ItemSet>, ground: ItemSet) -> Result<Self> {
        let mut seen = ItemSet::empty();
        for (j, b) in bundles.iter().enumerate() {
            if !seen.is_disjoint(*b) {
                return Err(Error::InvalidInstance(format!(
                    "bundle {j} overlaps an earlier bundle"
                )));
            }
            seen = seen.union(*b);
        }
        if seen != ground {
            return Err(Error::InvalidInstance(
                "bundles do not cover the ground set exactly".into(),
            ));
        }
        Ok(Partition { bundles, ground })
    }

    pub fn bundles(&self) -> &[ItemSet] {
        &self.bundles
    }

    pub fn bundle(&self, j: usize) -> ItemSet {
        self.bundles[j]
    }

    pub fn len(&self) -> usize {
        self.bundles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bundles.is_empty()
    }

    pub fn ground(&self) -> ItemSet {
        self.ground
    }
}

/// An instance together with every agent's exact MMS value, an MMS witness
/// partition per agent, and the cost matrix rescaled so each agent's MMS
/// equals 1.
#[derive(Clone, Debug)]
pub struct NormalizedInstance {
    base: Instance,
    mms: Vec<Rational>,
    witnesses: Vec<Partition>,
    norm_costs: Vec<Vec<Rational>>,
}

impl NormalizedInstance {
    pub(crate) fn from_parts(
        base: Instance,
        mms: Vec<Rational>,
        witnesses: Vec<Partition>,
        norm_costs: Vec<Vec<Rational>>,
    ) -> Self {
        NormalizedInstance {
            base,
            mms,
            witnesses,
            norm_costs,
        }
    }

    pub fn base(&self) -> &Instance {
        &self.base
    }

    pub fn n(&self) -> usize {
        self.base.n()
    }

    pub fn m(&self) -> usize {
        self.base.m()
    }

    pub fn all_items(&self) -> ItemSet {
        self.base.all_items()
    }

    /// The agent's MMS value in the original instance.
    pub fn mms(&self, agent: usize) -> &Rational {
        &self.mms[agent]
    }

    /// An MMS witness partition of the full item set for `agent` (n bundles,
    /// each of normalized cost at most 1).
    pub fn witness(&self, agent: usize) -> &Partition {
        &self.witnesses[agent]
    }

    /// Normalized cost row: `cost[i][e] / mms[i]` (zeros for zero-MMS agents).
    pub fn cost_row(&self, agent: usize) -> &[Rational] {
        &self.norm_costs[agent]
    }

    pub fn bundle_cost(&self, agent: usize, bundle: ItemSet) -> Rational {
        bundle_cost(&self.norm_costs[agent], bundle)
    }
}

/// A live sub-instance: the agents and items that survive a sequence of valid
/// reductions, viewed against the enclosing normalized instance.
///
/// Invariant: the normalized cost of the remaining items is at most the
/// number of remaining agents, for every remaining agent.
#[derive(Clone, Debug)]
pub struct ReducedInstanceView<'a> {
    norm: &'a NormalizedInstance,
    agents: Vec<usize>,
    items: ItemSet,
}

impl<'a> ReducedInstanceView<'a> {
    /// The whole instance as a view; valid because `c_i(M) <= n` after
    /// normalization.
    pub fn full(norm: &'a NormalizedInstance) -> Self {
        ReducedInstanceView {
            norm,
            agents: (0..norm.n()).collect(),
            items: norm.all_items(),
        }
    }

    /// Checks the valid-reduction inequality before admitting the view.
    pub fn new(norm: &'a NormalizedInstance, agents: Vec<usize>, items: ItemSet) -> Result<Self> {
        let view = ReducedInstanceView {
            norm,
            agents,
            items,
        };
        view.check_valid()?;
        Ok(view)
    }

    pub fn check_valid(&self) -> Result<()> {
        let k = Rational::from(self.agents.len());
        for &i in &self.agents {
            let c = self.norm.bundle_cost(i, self.items);
            if c > k {
                return Err(Error::InternalInvariant(format!(
                    "valid-reduction inequality violated: c_{i}(remaining) = {c} > {k}"
                )));
            }
        }
        Ok(())
    }

    pub fn normalized(&self) -> &'a NormalizedInstance {
        self.norm
    }

    /// Remaining agents, ascending.
    pub fn agents(&self) -> &[usize] {
        &self.agents
    }

    pub fn items(&self) -> ItemSet {
        self.items
    }

    pub fn k(&self) -> usize {
        self.agents.len()
    }

    pub fn contains_agent(&self, agent: usize) -> bool {
        self.agents.contains(&agent)
    }

    /// Normalized cost row of a (remaining) agent.
    pub fn cost_row(&self, agent: usize) -> &'a [Rational] {
        self.norm.cost_row(agent)
    }

    pub fn bundle_cost(&self, agent: usize, bundle: ItemSet) -> Rational {
        debug_assert!(bundle.is_subset_of(self.items));
        self.norm.bundle_cost(agent, bundle)
    }

    /// The view that survives after removing agents and their assigned items.
    pub fn without(&self, removed_agents: &[usize], removed_items: ItemSet) -> Result<Self> {
        let agents: Vec<usize> = self
            .agents
            .iter()
            .copied()
            .filter(|a| !removed_agents.contains(a))
            .collect();
        ReducedInstanceView::new(self.norm, agents, self.items.difference(removed_items))
    }
}

/// A complete allocation: one bundle per agent, the advertised guarantee
/// `alpha`, the agent (if any) held only to `alpha`, and the exact per-agent
/// normalized cost ratios.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Allocation {
    pub alpha: Rational,
    pub flexible_agent: Option<usize>,
    pub bundles: Vec<ItemSet>,
    pub ratios: Vec<Rational>,
}

impl Allocation {
    /// Checks the bundles form a partition of the instance's items.
    pub fn check_complete(&self, instance: &Instance) -> Result<()> {
        if self.bundles.len() != instance.n() {
            return Err(Error::InvalidAllocation(format!(
                "{} bundles for {} agents",
                self.bundles.len(),
                instance.n()
            )));
        }
        Partition::new(self.bundles.clone(), instance.all_items())
            .map_err(|_| Error::InvalidAllocation("bundles must partition the item set".into()))?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gen::gen_paper_example;
    use proptest::prelude::*;

    #[test]
    fn bundle_cost_paper_rows() {
        let inst = gen_paper_example();
        // Agent 3 of the example (index 2), bundle {e1,e2} (indices 0,1).
        let b: ItemSet = [0, 1].into_iter().collect();
        assert_eq!(inst.bundle_cost(2, b).unwrap(), Rational::one());
        // Empty bundle.
        assert_eq!(
            inst.bundle_cost(0, ItemSet::empty()).unwrap(),
            Rational::zero()
        );
        // Agent 1 (index 0), bundle {e3,e4,e5} (indices 2,3,4): three items at 3/8.
        let b2: ItemSet = [2, 3, 4].into_iter().collect();
        assert_eq!(inst.bundle_cost(0, b2).unwrap(), Rational::new(9, 8));
        // Index errors.
        assert!(inst.bundle_cost(5, b).is_err());
        assert!(inst.bundle_cost(0, ItemSet::singleton(32)).is_err());
    }

    #[test]
    fn instance_validation() {
        assert!(Instance::new(vec![]).is_err());
        assert!(Instance::new(vec![vec![Rational::one()], vec![]]).is_err());
        assert!(Instance::new(vec![vec![Rational::new(-1, 2)]]).is_err());
        assert!(Instance::new(vec![vec![Rational::one(); 65]]).is_err());
    }

    #[test]
    fn domain_values_are_shareable_across_threads() {
        fn assert_send_sync<T: Send + Sync>() {}
        assert_send_sync::<Rational>();
        assert_send_sync::<ItemSet>();
        assert_send_sync::<Instance>();
        assert_send_sync::<Partition>();
        assert_send_sync::<NormalizedInstance>();
        assert_send_sync::<Allocation>();
        assert_send_sync::<ReducedInstanceView<'static>>();
    }

    #[test]
    fn partition_validation() {
        let ground = ItemSet::full(3);
        let ok = Partition::new(
            vec![
                [0].into_iter().collect(),
                ItemSet::empty(),
                [1, 2].into_iter().collect(),
            ],
            ground,
        );
        assert!(ok.is_ok());
        let overlap = Partition::new(
            vec![[0, 1].into_iter().collect(), [1, 2].into_iter().collect()],
            ground,
        );
        assert!(overlap.is_err());
        let missing = Partition::new(vec![[0].into_iter().collect()], ground);
        assert!(missing.is_err());
    }

    #[test]
    fn instance_json_round_trip() {
        let inst = gen_paper_example();
        let s = serde_json::to_string(&inst).unwrap();
        let back: Instance = serde_json::from_str(&s).unwrap();
        assert_eq!(back, inst);
        // Mixed string/int costs parse.
        let raw = r#"{"n":1,"m":2,"costs":[[1,"3/8"]]}"#;
        let one: Instance = serde_json::from_str(raw).unwrap();
        assert_eq!(*one.cost(0, 1), Rational::new(3, 8));
        // Mismatched dims rejected.
        let bad = r#"{"n":2,"m":2,"costs":[[1,1]]}"#;
        assert!(serde_json::from_str::<Instance>(bad).is_err());
    }

    proptest! {
        // Additivity: cost(A ∪ B) = cost(A) + cost(B) for disjoint A, B, and
        // a partition's bundle costs sum to the ground cost.
        #[test]
        fn additivity(costs in proptest::collection::vec(0i64..50, 8), mask_a in 0u64..256, mask_b in 0u64..256) {
            let row: Vec<Rational> = costs.iter().map(|&c| Rational::from(c)).collect();
            let inst = Instance::new(vec![row]).unwrap();
            let a = ItemSet::from_mask(mask_a);
            let b = ItemSet::from_mask(mask_b & !mask_a);
            let ab = a.union(b);
            let sum = &inst.bundle_cost(0, a).unwrap() + &inst.bundle_cost(0, b).unwrap();
            prop_assert_eq!(inst.bundle_cost(0, ab).unwrap(), sum);

            let rest = inst.all_items().difference(ab);
            let p = Partition::new(vec![a, b, rest], inst.all_items()).unwrap();
            let total: Rational = p.bundles().iter().map(|&s| inst.bundle_cost(0, s).unwrap()).sum();
            prop_assert_eq!(total, inst.total_cost(0));
        }
    }
}
