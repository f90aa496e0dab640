//! Reusable allocation subroutines shared by the solvers.
//!
//! Tie-breaking is fixed everywhere: items are processed in non-increasing
//! cost order with ascending index as the secondary key, and the cheapest
//! bundle is chosen by ascending bundle index. Equal-cost bundle sorts are
//! stable. This makes every procedure a deterministic function of its
//! inputs.

use crate::error::{Error, Result};
use crate::instance::{bundle_cost, Partition, ReducedInstanceView};
use crate::items::ItemSet;
use crate::oracle::mms_over_costs;
use crate::rational::Rational;

/// Flexible-agent bound for n agents: (n+1)^2 / 4n.
pub fn gamma_for(n: usize) -> Rational {
    let n = n as i64;
    Rational::new((n + 1) * (n + 1), 4 * n)
}

/// Agent counts at or below `(n+1)/2` use bag filling; larger ones merge the
/// original witness.
pub fn merge_threshold(n: usize) -> usize {
    n.div_ceil(2)
}

/// Item indices of `items` in non-increasing cost order, ties by ascending
/// index.
fn items_desc(costs: &[Rational], items: ItemSet) -> Vec<usize> {
    let mut order: Vec<usize> = items.iter().collect();
    order.sort_by(|&a, &b| costs[b].cmp(&costs[a]).then(a.cmp(&b)));
    order
}

/// The divider splits `items` into her exact optimal two bundles; the
/// chooser takes whichever is cheaper for her and the divider keeps the
/// other. Returns `(divider_bundle, chooser_bundle)`.
pub fn divide_and_choose(
    view: &ReducedInstanceView<'_>,
    items: ItemSet,
    divider: usize,
    chooser: usize,
    budget: usize,
) -> Result<(ItemSet, ItemSet)> {
    debug_assert!(items.is_subset_of(view.items()));
    let split = mms_over_costs(view.cost_row(divider), items, 2, budget)?.witness;
    let (b0, b1) = (split.bundle(0), split.bundle(1));
    let chooser_row = view.cost_row(chooser);
    if bundle_cost(chooser_row, b0) <= bundle_cost(chooser_row, b1) {
        Ok((b1, b0))
    } else {
        Ok((b0, b1))
    }
}

/// Greedy longest-processing-time split: items in non-increasing cost order,
/// each placed on the currently cheapest of `n_prime` bundles.
pub fn load_balancing(costs: &[Rational], items: ItemSet, n_prime: usize) -> Partition {
    assert!(n_prime >= 1);
    let mut bundles = vec![ItemSet::empty(); n_prime];
    let mut loads = vec![Rational::zero(); n_prime];
    for e in items_desc(costs, items) {
        let mut target = 0;
        for j in 1..n_prime {
            if loads[j] < loads[target] {
                target = j;
            }
        }
        bundles[target] = bundles[target].with(e);
        loads[target] += &costs[e];
    }
    Partition::new(bundles, items).expect("load-balancing bundles partition the items")
}

/// Some agent from `agents` and two distinct items inside `bundle` whose
/// normalized costs sum to at least 1, or `None`. Scans agents in the given
/// order and item pairs lexicographically.
pub fn find_heavy_pair(
    view: &ReducedInstanceView<'_>,
    bundle: ItemSet,
    agents: &[usize],
) -> Option<(usize, usize, usize)> {
    let one = Rational::one();
    let idx: Vec<usize> = bundle.iter().collect();
    for &i in agents {
        let row = view.cost_row(i);
        for a in 0..idx.len() {
            for b in (a + 1)..idx.len() {
                if &row[idx[a]] + &row[idx[b]] >= one {
                    return Some((i, idx[a], idx[b]));
                }
            }
        }
    }
    None
}

/// Output of the capped bag fill: the final bundles plus the items that fit
/// under no cap and were appended to the last bundle.
#[derive(Clone, Debug)]
pub struct BagFill {
    pub partition: Partition,
    pub leftovers: ItemSet,
}

/// Greedy descending fill of `k` bundles under cap 1 (first fitting bundle
/// by ascending index), then bundles sorted non-increasing by cost and all
/// leftover items appended to the last (cheapest) bundle.
///
/// On a valid reduced view the leftover count is at most `k - 1`; more than
/// that is reported as an internal-invariant error.
pub fn capped_bag_filling_over(costs: &[Rational], items: ItemSet, k: usize) -> Result<BagFill> {
    if k == 0 {
        return Err(Error::InvalidInstance("bag filling needs k >= 1".into()));
    }
    let one = Rational::one();
    let mut bundles = vec![ItemSet::empty(); k];
    let mut loads = vec![Rational::zero(); k];
    let mut leftovers = ItemSet::empty();
    for e in items_desc(costs, items) {
        match (0..k).find(|&j| (&loads[j] + &costs[e]) <= one) {
            Some(j) => {
                bundles[j] = bundles[j].with(e);
                loads[j] += &costs[e];
            }
            None => leftovers = leftovers.with(e),
        }
    }
    if leftovers.len() >= k {
        return Err(Error::InternalInvariant(format!(
            "bag filling left {} items over for {k} bundles",
            leftovers.len()
        )));
    }
    let mut order: Vec<usize> = (0..k).collect();
    // Stable: equal loads keep construction order.
    order.sort_by(|&a, &b| loads[b].cmp(&loads[a]));
    let mut sorted: Vec<ItemSet> = order.into_iter().map(|j| bundles[j]).collect();
    sorted[k - 1] = sorted[k - 1].union(leftovers);
    Ok(BagFill {
        partition: Partition::new(sorted, items)?,
        leftovers,
    })
}

/// View-level bag filling for one agent over the remaining items.
pub fn capped_bag_filling(view: &ReducedInstanceView<'_>, agent: usize) -> Result<Partition> {
    Ok(capped_bag_filling_over(view.cost_row(agent), view.items(), view.k())?.partition)
}

/// Restricts `witness` to `items`, sorts the restricted bundles by
/// non-increasing cost (stable in the original bundle order), keeps the
/// `k - 1` largest and merges the rest into one final bundle.
pub fn partition_merging_over(
    costs: &[Rational],
    witness: &Partition,
    items: ItemSet,
    k: usize,
) -> Result<Partition> {
    let n = witness.len();
    if k == 0 || k > n {
        return Err(Error::InvalidInstance(format!(
            "cannot merge a {n}-bundle witness down to {k} bundles"
        )));
    }
    if !items.is_subset_of(witness.ground()) {
        return Err(Error::InvalidInstance(
            "items outside the witness ground set".into(),
        ));
    }
    let mut restricted: Vec<(Rational, ItemSet)> = witness
        .bundles()
        .iter()
        .map(|&b| {
            let r = b.intersection(items);
            (bundle_cost(costs, r), r)
        })
        .collect();
    restricted.sort_by(|a, b| b.0.cmp(&a.0));
    let mut bundles: Vec<ItemSet> = restricted[..k - 1].iter().map(|(_, s)| *s).collect();
    let merged = restricted[k - 1..]
        .iter()
        .fold(ItemSet::empty(), |acc, (_, s)| acc.union(*s));
    bundles.push(merged);
    Partition::new(bundles, items)
}

/// View-level partition merging for one agent, using her MMS witness for the
/// original instance.
pub fn partition_merging(view: &ReducedInstanceView<'_>, agent: usize) -> Result<Partition> {
    partition_merging_over(
        view.cost_row(agent),
        view.normalized().witness(agent),
        view.items(),
        view.k(),
    )
}

/// A (γ,1,…,1)-partition of the view's items for `agent`: the first `k - 1`
/// bundles cost at most 1 to her and the relaxed bundle is last. Dispatches
/// on the surviving agent count relative to the original `n`.
pub fn gamma_partition(view: &ReducedInstanceView<'_>, agent: usize) -> Result<Partition> {
    let n = view.normalized().n();
    if view.k() > merge_threshold(n) {
        partition_merging(view, agent)
    } else {
        capped_bag_filling(view, agent)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::Instance;
    use crate::oracle::{normalize, DEFAULT_ITEM_BUDGET};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn rats(v: &[(i64, i64)]) -> Vec<Rational> {
        v.iter().map(|&(p, q)| Rational::new(p, q)).collect()
    }

    #[test]
    fn load_balancing_five_equal_items() {
        // Five items at 3/8 into two bundles: loads 9/8 and 3/4.
        let costs = rats(&[(3, 8); 5]);
        let p = load_balancing(&costs, ItemSet::full(5), 2);
        assert_eq!(bundle_cost(&costs, p.bundle(0)), Rational::new(9, 8));
        assert_eq!(bundle_cost(&costs, p.bundle(1)), Rational::new(3, 4));
    }

    #[test]
    fn load_balancing_empty() {
        let p = load_balancing(&[], ItemSet::empty(), 3);
        assert_eq!(p.bundles(), &[ItemSet::empty(); 3]);
    }

    #[test]
    fn load_balancing_zero_item_boundary() {
        // Four halves fill both bundles to exactly 1; the zero-cost item
        // lands on a full bundle, so removing it leaves exactly 1. This is
        // why the strict removed-item bound holds only for positive costs.
        let costs = rats(&[(1, 2), (1, 2), (1, 2), (1, 2), (0, 1)]);
        let p = load_balancing(&costs, ItemSet::full(5), 2);
        assert!(p.bundle(0).contains(4));
        assert_eq!(
            bundle_cost(&costs, p.bundle(0).without(4)),
            Rational::one()
        );
    }

    #[test]
    fn load_balancing_hand_simulated() {
        // Items {5,4,3,3,2} on three bundles: {5}, {4,2}, {3,3}.
        let costs = rats(&[(5, 1), (4, 1), (3, 1), (3, 1), (2, 1)]);
        let p = load_balancing(&costs, ItemSet::full(5), 3);
        assert_eq!(p.bundle(0).to_indices(), vec![0]);
        assert_eq!(p.bundle(1).to_indices(), vec![1, 4]);
        assert_eq!(p.bundle(2).to_indices(), vec![2, 3]);
    }

    #[test]
    fn divide_and_choose_single_item() {
        let inst = Instance::from_pairs(&[&[(5, 1)], &[(5, 1)]]).unwrap();
        let norm = normalize(&inst).unwrap();
        let view = ReducedInstanceView::full(&norm);
        let (div, choose) =
            divide_and_choose(&view, inst.all_items(), 0, 1, DEFAULT_ITEM_BUDGET).unwrap();
        assert_eq!(div.to_indices(), vec![0]);
        assert!(choose.is_empty());
    }

    #[test]
    fn divide_and_choose_exact_split() {
        // Divider costs {4,3,3,2}: optimal split {4,2} / {3,3}, both 6; the
        // chooser with identical costs pays 6.
        let row = &[(4, 1), (3, 1), (3, 1), (2, 1)];
        let inst = Instance::from_pairs(&[row, row]).unwrap();
        let norm = normalize(&inst).unwrap();
        let view = ReducedInstanceView::full(&norm);
        let (div, choose) =
            divide_and_choose(&view, inst.all_items(), 0, 1, DEFAULT_ITEM_BUDGET).unwrap();
        assert_eq!(
            inst.bundle_cost(1, choose).unwrap(),
            Rational::from(6i64)
        );
        assert_eq!(inst.bundle_cost(0, div).unwrap(), Rational::from(6i64));
        let split: Vec<Vec<usize>> = vec![div.to_indices(), choose.to_indices()];
        assert!(split.contains(&vec![0, 3]) && split.contains(&vec![1, 2]));
    }

    #[test]
    fn divide_and_choose_symmetric_pair() {
        let inst = Instance::from_pairs(&[&[(1, 1), (1, 1)], &[(1, 1), (1, 1)]]).unwrap();
        let norm = normalize(&inst).unwrap();
        let view = ReducedInstanceView::full(&norm);
        let (div, choose) =
            divide_and_choose(&view, inst.all_items(), 0, 1, DEFAULT_ITEM_BUDGET).unwrap();
        assert_eq!(div.len(), 1);
        assert_eq!(choose.len(), 1);
    }

    #[test]
    fn heavy_pair_examples() {
        // Normalized paper-example view; bundle {e6,e7,e8} has no pair
        // reaching 1 for agents 1 and 2 (pairs sum to 1/2, 7/8, 7/8).
        let inst = crate::gen::gen_paper_example();
        let norm = normalize(&inst).unwrap();
        let view = ReducedInstanceView::full(&norm);
        let p3: ItemSet = [5, 6, 7].into_iter().collect();
        assert_eq!(find_heavy_pair(&view, p3, &[0, 1]), None);
        // Two items of 1/2 meet the closed threshold.
        let boundary = Instance::from_pairs(&[&[(1, 2), (1, 2)], &[(1, 2), (1, 2)]]).unwrap();
        let bnorm = normalize(&boundary).unwrap();
        let bview = ReducedInstanceView::full(&bnorm);
        assert_eq!(
            find_heavy_pair(&bview, boundary.all_items(), &[0, 1]),
            Some((0, 0, 1))
        );
    }

    #[test]
    fn heavy_pair_matches_exhaustive_scan() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..50 {
            let m = rng.random_range(2..=8);
            let row: Vec<(i64, i64)> = (0..m)
                .map(|_| (rng.random_range(0..=8), 8))
                .collect();
            let inst = Instance::from_pairs(&[&row, &row]).unwrap();
            let Ok(norm) = normalize(&inst) else { continue };
            let view = ReducedInstanceView::full(&norm);
            let bundle = ItemSet::full(m);
            let found = find_heavy_pair(&view, bundle, &[0]);
            let exists = (0..m).any(|a| {
                ((a + 1)..m).any(|b| {
                    &view.cost_row(0)[a] + &view.cost_row(0)[b] >= Rational::one()
                })
            });
            assert_eq!(found.is_some(), exists);
            if let Some((agent, e1, e2)) = found {
                assert_eq!(agent, 0);
                assert!(&view.cost_row(0)[e1] + &view.cost_row(0)[e2] >= Rational::one());
            }
        }
    }

    #[test]
    fn bag_filling_with_leftover() {
        // k=2, costs {9/10, 4/5, 3/10}: greedy fills {9/10} and {4/5}, the
        // 3/10 item fits nowhere and lands on the cheaper bundle.
        let costs = rats(&[(9, 10), (4, 5), (3, 10)]);
        let fill = capped_bag_filling_over(&costs, ItemSet::full(3), 2).unwrap();
        let p = fill.partition;
        assert_eq!(p.bundle(0).to_indices(), vec![0]);
        assert_eq!(p.bundle(1).to_indices(), vec![1, 2]);
        assert_eq!(bundle_cost(&costs, p.bundle(1)), Rational::new(11, 10));
        assert_eq!(fill.leftovers.to_indices(), vec![2]);
    }

    #[test]
    fn bag_filling_everything_fits() {
        let costs = rats(&[(1, 4), (1, 4), (1, 3)]);
        let fill = capped_bag_filling_over(&costs, ItemSet::full(3), 2).unwrap();
        assert!(fill.leftovers.is_empty());
        for &b in fill.partition.bundles() {
            assert!(bundle_cost(&costs, b) <= Rational::one());
        }
    }

    #[test]
    fn bag_filling_single_bundle() {
        // k=1 on a valid view: one bundle holding everything, cost <= 1.
        let costs = rats(&[(1, 2), (1, 4), (1, 8)]);
        let fill = capped_bag_filling_over(&costs, ItemSet::full(3), 1).unwrap();
        assert_eq!(fill.partition.bundle(0), ItemSet::full(3));
        assert!(bundle_cost(&costs, fill.partition.bundle(0)) <= Rational::one());
    }

    fn singleton_witness(costs: &[Rational]) -> Partition {
        let m = costs.len();
        Partition::new(
            (0..m).map(ItemSet::singleton).collect(),
            ItemSet::full(m),
        )
        .unwrap()
    }

    #[test]
    fn merging_keeps_cheapest_when_nothing_removed() {
        // k = n: the merged bundle is the single cheapest witness bundle.
        let costs = rats(&[(1, 1), (9, 10), (4, 5), (7, 10)]);
        let witness = singleton_witness(&costs);
        let p = partition_merging_over(&costs, &witness, ItemSet::full(4), 4).unwrap();
        assert_eq!(p.bundle(3).to_indices(), vec![3]);
        assert!(bundle_cost(&costs, p.bundle(3)) <= Rational::one());
    }

    #[test]
    fn merging_combines_last_four_of_eight() {
        // n=8, k=5: keep the four largest restricted bundles, merge the rest.
        let costs = rats(&[
            (70, 100),
            (65, 100),
            (60, 100),
            (55, 100),
            (50, 100),
            (45, 100),
            (40, 100),
            (40, 100),
        ]);
        let witness = singleton_witness(&costs);
        let p = partition_merging_over(&costs, &witness, ItemSet::full(8), 5).unwrap();
        assert_eq!(p.len(), 5);
        assert_eq!(p.bundle(4).to_indices(), vec![4, 5, 6, 7]);
    }

    #[test]
    fn merging_bound_example() {
        // n=5, k=4, restricted costs (1, 9/10, 8/10, 7/10, 6/10): merged cost
        // 13/10, below the bound (-k^2 + (1+n)k)/n = 8/5.
        let costs = rats(&[(1, 1), (9, 10), (8, 10), (7, 10), (6, 10)]);
        let witness = singleton_witness(&costs);
        let p = partition_merging_over(&costs, &witness, ItemSet::full(5), 4).unwrap();
        let merged = bundle_cost(&costs, p.bundle(3));
        assert_eq!(merged, Rational::new(13, 10));
        assert!(merged < Rational::new(8, 5));
    }

    #[test]
    fn gamma_partition_dispatch() {
        // Costs chosen so the two branches produce different partitions:
        // merging keeps the singleton witness bundles in cost order, bag
        // filling repacks the light items.
        let row: Vec<(i64, i64)> = vec![(1, 1), (9, 10), (4, 5), (3, 20), (3, 20)];
        let rows5: Vec<&[(i64, i64)]> = (0..5).map(|_| row.as_slice()).collect();
        let inst5 = Instance::from_pairs(&rows5).unwrap();
        let norm5 = normalize(&inst5).unwrap();

        // n=5, k=5: above the threshold, merge.
        let full5 = ReducedInstanceView::full(&norm5);
        let merged = partition_merging(&full5, 0).unwrap();
        assert_ne!(merged, capped_bag_filling(&full5, 0).unwrap());
        assert_eq!(gamma_partition(&full5, 0).unwrap(), merged);

        // n=5, k=4: still above.
        let view4 =
            ReducedInstanceView::new(&norm5, vec![0, 1, 2, 3], ItemSet::full(5)).unwrap();
        assert_eq!(
            gamma_partition(&view4, 0).unwrap(),
            partition_merging(&view4, 0).unwrap()
        );

        // n=5, k=3 = threshold: bag-fill.
        let items3: ItemSet = [0, 1, 2, 3].into_iter().collect();
        let view3 = ReducedInstanceView::new(&norm5, vec![0, 1, 2], items3).unwrap();
        let filled = capped_bag_filling(&view3, 0).unwrap();
        assert_ne!(filled, partition_merging(&view3, 0).unwrap());
        assert_eq!(gamma_partition(&view3, 0).unwrap(), filled);

        // n=6, k=3 sits exactly on the boundary and still bag-fills.
        let rows6: Vec<&[(i64, i64)]> = (0..6).map(|_| row.as_slice()).collect();
        let inst6 = Instance::from_pairs(&rows6).unwrap();
        let norm6 = normalize(&inst6).unwrap();
        assert_eq!(merge_threshold(6), 3);
        let view6 = ReducedInstanceView::new(&norm6, vec![0, 1, 2], items3).unwrap();
        let filled6 = capped_bag_filling(&view6, 0).unwrap();
        assert_ne!(filled6, partition_merging(&view6, 0).unwrap());
        assert_eq!(gamma_partition(&view6, 0).unwrap(), filled6);
    }

    #[test]
    fn gamma_values() {
        assert_eq!(gamma_for(5), Rational::new(9, 5));
        assert_eq!(gamma_for(6), Rational::new(49, 24));
        assert_eq!(gamma_for(7), Rational::new(16, 7));
    }
}
