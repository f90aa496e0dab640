//! The entry-point solvers: exact allocations for one and two agents, the
//! 9/8 three-agent and 4/3 four-agent case analyses, and the general
//! reduction loop at (n+1)^2/4n.
//!
//! Every solver runs the independent verifier on its own output before
//! returning; a violated bound is reported as an internal error, never
//! silently returned.

use crate::error::{Error, Result};
use crate::instance::{Allocation, Instance, NormalizedInstance, Partition, ReducedInstanceView};
use crate::items::ItemSet;
use crate::matching::{complement_matching, max_violator, perfect_matching, FeasibilityGraph};
use crate::oracle::{normalize_with_budget, DEFAULT_ITEM_BUDGET};
use crate::procedures::{
    divide_and_choose, find_heavy_pair, gamma_for, gamma_partition, load_balancing,
};
use crate::rational::Rational;
use crate::verify::verify_allocation_with_budget;
use serde::{Deserialize, Serialize};

/// Which branch of the case analysis produced the allocation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CaseTag {
    SingleAgent,
    TwoAgents,
    ThreePerfectMatching,
    ThreeHeavyPair,
    ThreeDirectAssignment,
    ThreeLoadBalance,
    FourPerfectMatching,
    FourPairViolator,
    FourTripleViolatorTwoLikedSingle,
    FourTripleViolatorTwoLikedDouble,
    FourTripleViolatorOneLikedCell,
    FourTripleViolatorOneLikedBetaLow,
    FourTripleViolatorOneLikedBetaHigh,
    GeneralGamma,
}

/// The guarantee the solver advertises for `n` agents.
pub fn alpha_for(n: usize) -> Rational {
    match n {
        0..=2 => Rational::one(),
        3 => Rational::new(9, 8),
        4 => Rational::new(4, 3),
        _ => gamma_for(n),
    }
}

/// One step of the general solver: either a valid reduction or the terminal
/// matching.
#[derive(Clone, Debug, Serialize)]
pub struct ReductionStep {
    pub pivot: usize,
    pub partition: Partition,
    /// Agents matched to bundles (bundle indices into `partition`).
    pub matching: Vec<(usize, usize)>,
    pub violator_agents: Option<Vec<usize>>,
    pub violator_bundles: Option<Vec<usize>>,
    /// Bundles handed out this step.
    pub assigned: Vec<(usize, ItemSet)>,
    pub surviving_agents: Vec<usize>,
    pub surviving_items: ItemSet,
    pub terminal: bool,
}

/// The audit trail of the general solver.
#[derive(Clone, Debug, Default, Serialize)]
pub struct ReductionTrace {
    pub steps: Vec<ReductionStep>,
}

/// Atomic bundles: pairwise intersections of two agents' witness bundles.
/// Cell (i, j) is `rows[i] ∩ cols[j]`; row cells partition `rows[i]`, column
/// cells partition `cols[j]`, and all cells together partition the ground.
#[derive(Clone, Debug)]
pub struct AtomicBundleMatrix {
    cells: Vec<Vec<ItemSet>>,
}

impl AtomicBundleMatrix {
    pub fn new(rows: &Partition, cols: &Partition) -> Self {
        let cells = rows
            .bundles()
            .iter()
            .map(|&r| cols.bundles().iter().map(|&c| r.intersection(c)).collect())
            .collect();
        AtomicBundleMatrix { cells }
    }

    pub fn cell(&self, i: usize, j: usize) -> ItemSet {
        self.cells[i][j]
    }

    pub fn n_rows(&self) -> usize {
        self.cells.len()
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SolveResult {
    pub allocation: Allocation,
    pub case: CaseTag,
    pub trace: Option<ReductionTrace>,
}

/// Solves under the default oracle budget.
pub fn solve(instance: &Instance) -> Result<SolveResult> {
    solve_with_budget(instance, DEFAULT_ITEM_BUDGET)
}

pub fn solve_with_budget(instance: &Instance, budget: usize) -> Result<SolveResult> {
    let norm = normalize_with_budget(instance, budget)?;
    let (allocation, case, trace) = match norm.n() {
        1 => (solve_one(&norm)?, CaseTag::SingleAgent, None),
        2 => (solve_two(&norm, budget)?, CaseTag::TwoAgents, None),
        3 => {
            let (alloc, case) = solve_three(&norm, budget)?;
            (alloc, case, None)
        }
        4 => {
            let (alloc, case) = solve_four(&norm, budget)?;
            (alloc, case, None)
        }
        _ => {
            let (alloc, trace) = solve_general(&norm)?;
            (alloc, CaseTag::GeneralGamma, Some(trace))
        }
    };
    let report = verify_allocation_with_budget(instance, &allocation, &allocation.alpha, budget)?;
    if !report.pass {
        return Err(Error::InternalInvariant(format!(
            "solver output failed independent verification at alpha {}",
            allocation.alpha
        )));
    }
    Ok(SolveResult {
        allocation,
        case,
        trace,
    })
}

/// Assembles an allocation from per-agent bundles, computing exact ratios
/// and checking the advertised bounds.
fn build_allocation(
    norm: &NormalizedInstance,
    bundles: Vec<ItemSet>,
    flexible_agent: Option<usize>,
    alpha: Rational,
) -> Result<Allocation> {
    debug_assert_eq!(bundles.len(), norm.n());
    let one = Rational::one();
    let mut ratios = Vec::with_capacity(bundles.len());
    for (i, &b) in bundles.iter().enumerate() {
        let ratio = norm.bundle_cost(i, b);
        let bound = if Some(i) == flexible_agent { &alpha } else { &one };
        if ratio > *bound {
            return Err(Error::InternalInvariant(format!(
                "agent {i} holds normalized cost {ratio}, above the promised {bound}"
            )));
        }
        ratios.push(ratio);
    }
    Ok(Allocation {
        alpha,
        flexible_agent,
        bundles,
        ratios,
    })
}

fn solve_one(norm: &NormalizedInstance) -> Result<Allocation> {
    build_allocation(norm, vec![norm.all_items()], None, Rational::one())
}

fn solve_two(norm: &NormalizedInstance, budget: usize) -> Result<Allocation> {
    let view = ReducedInstanceView::full(norm);
    let (divider_bundle, chooser_bundle) =
        divide_and_choose(&view, norm.all_items(), 0, 1, budget)?;
    build_allocation(
        norm,
        vec![divider_bundle, chooser_bundle],
        None,
        Rational::one(),
    )
}

fn allocation_from_matching(
    norm: &NormalizedInstance,
    partition: &Partition,
    matching: &[(usize, usize)],
) -> Result<Allocation> {
    let mut bundles = vec![ItemSet::empty(); norm.n()];
    for &(agent, j) in matching {
        bundles[agent] = partition.bundle(j);
    }
    build_allocation(norm, bundles, None, Rational::one())
}

fn solve_three(norm: &NormalizedInstance, budget: usize) -> Result<(Allocation, CaseTag)> {
    let view = ReducedInstanceView::full(norm);
    let p = norm.witness(2).clone();
    let graph = FeasibilityGraph::build(&view, &p, None, None)?;
    if let Some(matching) = perfect_matching(&graph) {
        return Ok((
            allocation_from_matching(norm, &p, &matching)?,
            CaseTag::ThreePerfectMatching,
        ));
    }

    // No perfect matching: agents 0 and 1 share exactly one feasible bundle.
    let shared = {
        let liked = graph.neighborhood_of(&[0, 1]);
        if liked.len() != 1 {
            return Err(Error::InternalInvariant(format!(
                "expected one shared feasible bundle, found {liked:?}"
            )));
        }
        liked[0]
    };

    // A pair of items in a non-shared bundle reaching cost 1 for one of the
    // constrained agents lets that agent divide the rest exactly.
    for j in (0..3).filter(|&j| j != shared) {
        if let Some((agent, _, _)) = find_heavy_pair(&view, p.bundle(j), &[0, 1]) {
            let other = 1 - agent;
            let rest = norm.all_items().difference(p.bundle(j));
            let sub = view.without(&[2], p.bundle(j))?;
            let (div_bundle, choose_bundle) =
                divide_and_choose(&sub, rest, agent, other, budget)?;
            let mut bundles = vec![ItemSet::empty(); 3];
            bundles[agent] = div_bundle;
            bundles[other] = choose_bundle;
            bundles[2] = p.bundle(j);
            return Ok((
                build_allocation(norm, bundles, None, Rational::one())?,
                CaseTag::ThreeHeavyPair,
            ));
        }
    }

    // Order the two non-shared bundles by agent 0's cost; ties send the
    // higher-index bundle to agent 2.
    let rest_bundles: Vec<usize> = (0..3).filter(|&j| j != shared).collect();
    let (mid, top) = {
        let (a, b) = (rest_bundles[0], rest_bundles[1]);
        let (ca, cb) = (
            norm.bundle_cost(0, p.bundle(a)),
            norm.bundle_cost(0, p.bundle(b)),
        );
        if cb >= ca {
            (a, b)
        } else {
            (b, a)
        }
    };
    let alpha = Rational::new(9, 8);

    if norm.bundle_cost(0, p.bundle(mid)) <= alpha {
        // Direct assignment: the middle bundle is already within 9/8 for
        // agent 0.
        let mut bundles = vec![ItemSet::empty(); 3];
        bundles[0] = p.bundle(mid);
        bundles[1] = p.bundle(shared);
        bundles[2] = p.bundle(top);
        return Ok((
            build_allocation(norm, bundles, Some(0), alpha)?,
            CaseTag::ThreeDirectAssignment,
        ));
    }

    // Load-balance the shared and middle bundles for agent 0; agent 1 picks
    // her cheaper half.
    let rest = p.bundle(shared).union(p.bundle(mid));
    let split = load_balancing(view.cost_row(0), rest, 2);
    let (b0, b1) = (split.bundle(0), split.bundle(1));
    let pick = if norm.bundle_cost(1, b0) <= norm.bundle_cost(1, b1) {
        b0
    } else {
        b1
    };
    let mut bundles = vec![ItemSet::empty(); 3];
    bundles[0] = rest.difference(pick);
    bundles[1] = pick;
    bundles[2] = p.bundle(top);
    Ok((
        build_allocation(norm, bundles, Some(0), alpha)?,
        CaseTag::ThreeLoadBalance,
    ))
}

/// Outcome of the three-agent 4/3 subroutine on a reduced view.
#[derive(Clone, Debug)]
pub struct ThreeSplit {
    /// Bundle handed to each of the three view agents.
    pub assignment: Vec<(usize, ItemSet)>,
    /// The agent held only to 4/3.
    pub flexible: usize,
}

/// Given a (4/3,1,1)-partition for `special` (relaxed bundle first) over the
/// view's items, allocates the three view agents: by matching when the two
/// other agents can be saturated, otherwise `special` takes a bundle only
/// she likes and the others divide-and-choose the rest.
pub fn four_thirds_three_agents(
    view: &ReducedInstanceView<'_>,
    bundles: [ItemSet; 3],
    special: usize,
    budget: usize,
) -> Result<ThreeSplit> {
    debug_assert_eq!(view.k(), 3);
    let partition = Partition::new(bundles.to_vec(), view.items())?;
    let four_thirds = Rational::new(4, 3);
    let one = Rational::one();
    for (j, &b) in partition.bundles().iter().enumerate() {
        let c = view.bundle_cost(special, b);
        let bound = if j == 0 { &four_thirds } else { &one };
        if c > *bound {
            return Err(Error::InternalInvariant(format!(
                "handed partition is not (4/3,1,1) for agent {special}: bundle {j} costs {c}"
            )));
        }
    }
    let others: Vec<usize> = view
        .agents()
        .iter()
        .copied()
        .filter(|&a| a != special)
        .collect();
    let graph = FeasibilityGraph::build(view, &partition, Some(special), None)?;
    if let Some(matching) = perfect_matching(&graph) {
        let mut assignment: Vec<(usize, ItemSet)> = matching
            .iter()
            .map(|&(agent, j)| (agent, partition.bundle(j)))
            .collect();
        let used: Vec<usize> = matching.iter().map(|&(_, j)| j).collect();
        let leftover = (0..3).find(|j| !used.contains(j)).expect("one bundle left");
        assignment.push((special, partition.bundle(leftover)));
        return Ok(ThreeSplit {
            assignment,
            flexible: special,
        });
    }

    // Both other agents like exactly one common bundle; special takes a
    // bundle feasible for her alone.
    let liked_by_others = graph.neighborhood_of(&others);
    let choice = (0..3)
        .find(|&j| {
            view.bundle_cost(special, partition.bundle(j)) <= one
                && !liked_by_others.contains(&j)
        })
        .ok_or_else(|| {
            Error::InternalInvariant(
                "no bundle feasible for the special agent and infeasible for the others".into(),
            )
        })?;
    let picked = partition.bundle(choice);
    let rest = view.items().difference(picked);
    let sub = view.without(&[special], picked)?;
    let (divider, chooser) = (others[0], others[1]);
    let (div_bundle, choose_bundle) = divide_and_choose(&sub, rest, divider, chooser, budget)?;
    Ok(ThreeSplit {
        assignment: vec![
            (special, picked),
            (divider, div_bundle),
            (chooser, choose_bundle),
        ],
        flexible: divider,
    })
}

/// Load-balances the remaining items between the two agents of a pair
/// violator; the higher-indexed agent picks first.
fn split_pair(
    norm: &NormalizedInstance,
    rest: ItemSet,
    first: usize,
    second: usize,
) -> Vec<(usize, ItemSet)> {
    let split = load_balancing(norm.cost_row(first), rest, 2);
    let (b0, b1) = (split.bundle(0), split.bundle(1));
    let pick = if norm.bundle_cost(second, b0) <= norm.bundle_cost(second, b1) {
        b0
    } else {
        b1
    };
    vec![(second, pick), (first, rest.difference(pick))]
}

fn solve_four(norm: &NormalizedInstance, budget: usize) -> Result<(Allocation, CaseTag)> {
    let view = ReducedInstanceView::full(norm);
    let p = norm.witness(3).clone();
    let graph = FeasibilityGraph::build(&view, &p, None, None)?;
    if let Some(matching) = perfect_matching(&graph) {
        return Ok((
            allocation_from_matching(norm, &p, &matching)?,
            CaseTag::FourPerfectMatching,
        ));
    }

    let alpha = Rational::new(4, 3);
    let violator = max_violator(&graph)?
        .ok_or_else(|| Error::InternalInvariant("no matching and no violator".into()))?;
    if violator.agents.contains(&3) {
        return Err(Error::InternalInvariant(
            "agent 3 likes all bundles of her own witness".into(),
        ));
    }

    match violator.agents.len() {
        2 => {
            // Match the two outside agents, then split what remains between
            // the violating pair.
            let matched = complement_matching(&graph, &violator)?;
            let mut bundles = vec![ItemSet::empty(); 4];
            let mut removed = ItemSet::empty();
            for &(agent, j) in &matched {
                bundles[agent] = p.bundle(j);
                removed = removed.union(p.bundle(j));
            }
            let rest = norm.all_items().difference(removed);
            let (a, b) = (violator.agents[0], violator.agents[1]);
            let outside: Vec<usize> = matched.iter().map(|&(ag, _)| ag).collect();
            view.without(&outside, removed)?;
            for (agent, bundle) in split_pair(norm, rest, a, b) {
                bundles[agent] = bundle;
            }
            Ok((
                build_allocation(norm, bundles, Some(a), alpha)?,
                CaseTag::FourPairViolator,
            ))
        }
        3 => {
            debug_assert_eq!(violator.agents, vec![0, 1, 2]);
            match violator.bundles.len() {
                2 => solve_four_two_liked(norm, &view, &p, &graph, &violator.bundles, budget),
                1 => solve_four_one_liked(norm, &view, &p, violator.bundles[0], budget),
                d => Err(Error::InternalInvariant(format!(
                    "triple violator with neighborhood size {d}"
                ))),
            }
        }
        s => Err(Error::InternalInvariant(format!(
            "violator of size {s} in a four-agent instance"
        ))),
    }
}

/// |S*| = 3 with two liked bundles.
fn solve_four_two_liked(
    norm: &NormalizedInstance,
    view: &ReducedInstanceView<'_>,
    p: &Partition,
    graph: &FeasibilityGraph,
    liked: &[usize],
    budget: usize,
) -> Result<(Allocation, CaseTag)> {
    let alpha = Rational::new(4, 3);
    let double_liker = (0..3).find(|&a| graph.liked_bundles(a).len() >= 2);

    if let Some(special) = double_liker {
        // Sort all bundles by the special agent's cost (ties by index); her
        // two liked bundles come first. The costliest goes to agent 3, the
        // second-liked is kept whole, and the rest is load-balanced.
        let mut order: Vec<usize> = (0..4).collect();
        order.sort_by(|&x, &y| {
            norm.bundle_cost(special, p.bundle(x))
                .cmp(&norm.bundle_cost(special, p.bundle(y)))
                .then(x.cmp(&y))
        });
        let (q1, q2, q3, q4) = (order[0], order[1], order[2], order[3]);
        let mut bundles = vec![ItemSet::empty(); 4];
        bundles[3] = p.bundle(q4);
        let sub = view.without(&[3], p.bundle(q4))?;
        let lb = load_balancing(
            norm.cost_row(special),
            p.bundle(q1).union(p.bundle(q3)),
            2,
        );
        let (hi, lo) = if norm.bundle_cost(special, lb.bundle(0))
            >= norm.bundle_cost(special, lb.bundle(1))
        {
            (lb.bundle(0), lb.bundle(1))
        } else {
            (lb.bundle(1), lb.bundle(0))
        };
        let split = four_thirds_three_agents(&sub, [hi, lo, p.bundle(q2)], special, budget)?;
        for (agent, bundle) in split.assignment {
            bundles[agent] = bundle;
        }
        Ok((
            build_allocation(norm, bundles, Some(split.flexible), alpha)?,
            CaseTag::FourTripleViolatorTwoLikedDouble,
        ))
    } else {
        // Every violator agent likes exactly one bundle; two share one and
        // the third likes the other alone.
        let mut sharers = Vec::new();
        let mut loner = None;
        for a in 0..3 {
            let b = graph.liked_bundles(a);
            debug_assert_eq!(b.len(), 1);
            let others_like = (0..3).filter(|&o| o != a).any(|o| graph.has_edge(o, b[0]));
            if others_like {
                sharers.push(a);
            } else {
                loner = Some((a, b[0]));
            }
        }
        let (loner_agent, loner_bundle) = loner.ok_or_else(|| {
            Error::InternalInvariant("two liked bundles but no uniquely liked one".into())
        })?;
        let spare = (0..4)
            .find(|j| !liked.contains(j))
            .expect("two bundles outside the neighborhood");
        let mut bundles = vec![ItemSet::empty(); 4];
        bundles[loner_agent] = p.bundle(loner_bundle);
        bundles[3] = p.bundle(spare);
        let removed = p.bundle(loner_bundle).union(p.bundle(spare));
        let rest = norm.all_items().difference(removed);
        view.without(&[loner_agent, 3], removed)?;
        let (a, b) = (sharers[0], sharers[1]);
        for (agent, bundle) in split_pair(norm, rest, a, b) {
            bundles[agent] = bundle;
        }
        Ok((
            build_allocation(norm, bundles, Some(a), Rational::new(4, 3))?,
            CaseTag::FourTripleViolatorTwoLikedSingle,
        ))
    }
}

/// |S*| = 3 with a single liked bundle: the atomic-bundle analysis against
/// agent 0's own witness.
fn solve_four_one_liked(
    norm: &NormalizedInstance,
    view: &ReducedInstanceView<'_>,
    p: &Partition,
    liked: usize,
    budget: usize,
) -> Result<(Allocation, CaseTag)> {
    let alpha = Rational::new(4, 3);
    let one = Rational::one();
    let b_witness = norm.witness(0).clone();
    let cells = AtomicBundleMatrix::new(&b_witness, p);

    // A heavy cell: removing it from its column still leaves cost above 1
    // for agent 0.
    for i in 0..4 {
        for j in (0..4).filter(|&j| j != liked) {
            let remainder = p.bundle(j).difference(cells.cell(i, j));
            if norm.bundle_cost(0, remainder) > one {
                let mut bundles = vec![ItemSet::empty(); 4];
                bundles[3] = p.bundle(j);
                let keep = b_witness.bundle(i).difference(cells.cell(i, j));
                let rest = norm
                    .all_items()
                    .difference(p.bundle(j))
                    .difference(keep);
                let sub = view.without(&[3], p.bundle(j))?;
                let lb = load_balancing(norm.cost_row(0), rest, 2);
                let (hi, lo) =
                    if norm.bundle_cost(0, lb.bundle(0)) >= norm.bundle_cost(0, lb.bundle(1)) {
                        (lb.bundle(0), lb.bundle(1))
                    } else {
                        (lb.bundle(1), lb.bundle(0))
                    };
                let split = four_thirds_three_agents(&sub, [hi, lo, keep], 0, budget)?;
                for (agent, bundle) in split.assignment {
                    bundles[agent] = bundle;
                }
                return Ok((
                    build_allocation(norm, bundles, Some(split.flexible), alpha)?,
                    CaseTag::FourTripleViolatorOneLikedCell,
                ));
            }
        }
    }

    // No heavy cell: order bundles by agent 0's cost and steal the cheapest
    // cells of the two middle columns.
    let mut order: Vec<usize> = (0..4).collect();
    order.sort_by(|&x, &y| {
        norm.bundle_cost(0, p.bundle(x))
            .cmp(&norm.bundle_cost(0, p.bundle(y)))
            .then(x.cmp(&y))
    });
    let (o1, o2, o3, o4) = (order[0], order[1], order[2], order[3]);
    debug_assert_eq!(o1, liked);
    let beta = norm.bundle_cost(0, p.bundle(o1));
    let min_cell = |col: usize| -> ItemSet {
        let mut best = 0;
        for i in 1..4 {
            if norm.bundle_cost(0, cells.cell(i, col)) < norm.bundle_cost(0, cells.cell(best, col))
            {
                best = i;
            }
        }
        cells.cell(best, col)
    };
    let b2 = min_cell(o2);
    let b3 = min_cell(o3);

    let mut bundles = vec![ItemSet::empty(); 4];
    bundles[3] = p.bundle(o4);
    let sub = view.without(&[3], p.bundle(o4))?;
    let (parts, tag) = if beta <= Rational::new(4, 5) {
        (
            [
                p.bundle(o1).union(b2).union(b3),
                p.bundle(o2).difference(b2),
                p.bundle(o3).difference(b3),
            ],
            CaseTag::FourTripleViolatorOneLikedBetaLow,
        )
    } else {
        (
            [
                p.bundle(o2).union(b3),
                p.bundle(o1),
                p.bundle(o3).difference(b3),
            ],
            CaseTag::FourTripleViolatorOneLikedBetaHigh,
        )
    };
    let split = four_thirds_three_agents(&sub, parts, 0, budget)?;
    for (agent, bundle) in split.assignment {
        bundles[agent] = bundle;
    }
    Ok((
        build_allocation(norm, bundles, Some(split.flexible), alpha)?,
        tag,
    ))
}

fn solve_general(norm: &NormalizedInstance) -> Result<(Allocation, ReductionTrace)> {
    let n = norm.n();
    let gamma = gamma_for(n);
    let mut view = ReducedInstanceView::full(norm);
    let mut bundles: Vec<Option<ItemSet>> = vec![None; n];
    let mut trace = ReductionTrace::default();
    let flexible;

    loop {
        if trace.steps.len() >= n {
            return Err(Error::InternalInvariant(
                "reduction loop failed to terminate within n iterations".into(),
            ));
        }
        let k = view.k();
        let pivot = view.agents()[0];
        let partition = gamma_partition(&view, pivot)?;
        let graph = FeasibilityGraph::build(&view, &partition, Some(pivot), Some(k - 1))?;

        if let Some(matching) = perfect_matching(&graph) {
            let mut assigned = Vec::with_capacity(k);
            for &(agent, j) in &matching {
                bundles[agent] = Some(partition.bundle(j));
                assigned.push((agent, partition.bundle(j)));
            }
            bundles[pivot] = Some(partition.bundle(k - 1));
            assigned.push((pivot, partition.bundle(k - 1)));
            flexible = Some(pivot);
            trace.steps.push(ReductionStep {
                pivot,
                partition,
                matching,
                violator_agents: None,
                violator_bundles: None,
                assigned,
                surviving_agents: vec![],
                surviving_items: ItemSet::empty(),
                terminal: true,
            });
            break;
        }

        let violator = max_violator(&graph)?
            .ok_or_else(|| Error::InternalInvariant("no matching and no violator".into()))?;
        let non_pivot: Vec<usize> = view
            .agents()
            .iter()
            .copied()
            .filter(|&a| a != pivot)
            .collect();
        let matching = if violator.agents == non_pivot {
            vec![]
        } else {
            complement_matching(&graph, &violator)?
        };

        let mut assigned = Vec::new();
        let mut removed = ItemSet::empty();
        let mut removed_agents = vec![pivot];
        let mut used_bundles: Vec<usize> = vec![k - 1];
        for &(agent, j) in &matching {
            bundles[agent] = Some(partition.bundle(j));
            assigned.push((agent, partition.bundle(j)));
            removed = removed.union(partition.bundle(j));
            removed_agents.push(agent);
            used_bundles.push(j);
        }
        // The pivot gets the lowest-index bundle outside the violator's
        // neighborhood and the matching; the deficiency argument leaves at
        // least one.
        let pivot_bundle = (0..k - 1)
            .find(|j| !violator.bundles.contains(j) && !used_bundles.contains(j))
            .ok_or_else(|| {
                Error::InternalInvariant("no bundle left for the pivot agent".into())
            })?;
        bundles[pivot] = Some(partition.bundle(pivot_bundle));
        assigned.push((pivot, partition.bundle(pivot_bundle)));
        removed = removed.union(partition.bundle(pivot_bundle));

        // Every surviving view must satisfy the valid-reduction inequality;
        // the constructor checks it exactly.
        let next = view.without(&removed_agents, removed)?;
        if next.k() >= k {
            return Err(Error::InternalInvariant(
                "reduction did not shrink the agent set".into(),
            ));
        }
        trace.steps.push(ReductionStep {
            pivot,
            partition,
            matching,
            violator_agents: Some(violator.agents.clone()),
            violator_bundles: Some(violator.bundles.clone()),
            assigned,
            surviving_agents: next.agents().to_vec(),
            surviving_items: next.items(),
            terminal: false,
        });
        view = next;
    }

    let bundles: Vec<ItemSet> = bundles
        .into_iter()
        .enumerate()
        .map(|(i, b)| b.ok_or_else(|| Error::InternalInvariant(format!("agent {i} unassigned"))))
        .collect::<Result<_>>()?;
    let allocation = build_allocation(norm, bundles, flexible, gamma)?;
    Ok((allocation, trace))
}
