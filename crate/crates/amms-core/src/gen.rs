//! Instance generation: seeded random models, the worked three-agent
//! example, and hand-built instances pinned to specific solver branches.

use crate::instance::{Instance, ReducedInstanceView};
use crate::matching::FeasibilityGraph;
use crate::oracle::normalize;
use crate::rational::Rational;
use crate::solver::CaseTag;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::str::FromStr;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CostModel {
    /// Uniform integer costs in 0..=100.
    Uniform,
    /// Rationals with small denominators, in [0, 1].
    PaperLike,
    /// Structured instances where all but the last agent share one feasible
    /// bundle of the last agent's witness, defeating the perfect matching.
    Adversarial,
}

impl FromStr for CostModel {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "uniform" => Ok(CostModel::Uniform),
            "paper-like" => Ok(CostModel::PaperLike),
            "adversarial" => Ok(CostModel::Adversarial),
            other => Err(format!(
                "unknown cost model '{other}' (expected uniform, paper-like, or adversarial)"
            )),
        }
    }
}

/// Deterministic instance for (n, m, model, seed).
pub fn gen_random(n: usize, m: usize, model: CostModel, seed: u64) -> Instance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    match model {
        CostModel::Uniform => uniform(n, m, &mut rng),
        CostModel::PaperLike => paper_like(n, m, &mut rng),
        CostModel::Adversarial => adversarial(n, m, &mut rng),
    }
}

fn uniform(n: usize, m: usize, rng: &mut ChaCha8Rng) -> Instance {
    Instance::new(
        (0..n)
            .map(|_| (0..m).map(|_| Rational::from(rng.random_range(0i64..=100))).collect())
            .collect(),
    )
    .expect("nonnegative integer costs")
}

fn paper_like(n: usize, m: usize, rng: &mut ChaCha8Rng) -> Instance {
    const DENS: [i64; 7] = [2, 3, 4, 5, 6, 8, 12];
    Instance::new(
        (0..n)
            .map(|_| {
                (0..m)
                    .map(|_| {
                        let den = DENS[rng.random_range(0..DENS.len())];
                        Rational::new(rng.random_range(0..=den), den)
                    })
                    .collect()
            })
            .collect(),
    )
    .expect("nonnegative costs")
}

/// Clone agents value one group of the last agent's witness cheaply and
/// every other group above their MMS; found by rejection over a structured
/// family, checked against the real oracle and feasibility graph.
fn adversarial(n: usize, m: usize, rng: &mut ChaCha8Rng) -> Instance {
    if n < 2 || m < n {
        return paper_like(n, m, rng);
    }
    let mut last_candidate = None;
    for _ in 0..60 {
        let candidate = adversarial_candidate(n, m, rng);
        if adversarial_accept(&candidate, n) {
            return candidate;
        }
        last_candidate = Some(candidate);
    }
    if n == 3 && m == 8 {
        return permuted_paper_example(rng);
    }
    last_candidate.unwrap_or_else(|| paper_like(n, m, rng))
}

fn adversarial_candidate(n: usize, m: usize, rng: &mut ChaCha8Rng) -> Instance {
    // Random composition of m items into n nonempty groups.
    let mut sizes = vec![1usize; n];
    for _ in 0..(m - n) {
        sizes[rng.random_range(0..n)] += 1;
    }
    const LIKED: [(i64, i64); 4] = [(1, 2), (3, 5), (2, 3), (3, 4)];
    const DISLIKED: [(i64, i64); 4] = [(9, 8), (7, 6), (6, 5), (5, 4)];
    let (ln, ld) = LIKED[rng.random_range(0..LIKED.len())];
    let mut clone_row = Vec::with_capacity(m);
    let mut last_row = Vec::with_capacity(m);
    for (g, &size) in sizes.iter().enumerate() {
        let t = size as i64;
        let (gn, gd) = if g == 0 {
            (ln, ld)
        } else {
            DISLIKED[rng.random_range(0..DISLIKED.len())]
        };
        for _ in 0..size {
            clone_row.push(Rational::new(gn, gd * t));
            last_row.push(Rational::new(1, t));
        }
    }
    let mut rows = vec![clone_row; n - 1];
    rows.push(last_row);
    Instance::new(rows).expect("nonnegative costs")
}

fn adversarial_accept(candidate: &Instance, n: usize) -> bool {
    let Ok(norm) = normalize(candidate) else {
        return false;
    };
    let view = ReducedInstanceView::full(&norm);
    let witness = norm.witness(n - 1).clone();
    let Ok(graph) = FeasibilityGraph::build(&view, &witness, None, None) else {
        return false;
    };
    let clones: Vec<usize> = (0..n - 1).collect();
    graph.neighborhood_of(&clones).len() <= n.saturating_sub(2).max(1)
}

fn permuted_paper_example(rng: &mut ChaCha8Rng) -> Instance {
    let base = gen_paper_example();
    let mut perm: Vec<usize> = (0..base.m()).collect();
    for i in (1..perm.len()).rev() {
        perm.swap(i, rng.random_range(0..=i));
    }
    Instance::new(
        (0..base.n())
            .map(|i| perm.iter().map(|&e| base.cost(i, e).clone()).collect())
            .collect(),
    )
    .expect("permutation of a valid instance")
}

/// The worked three-agent, eight-item instance. All three agents have
/// MMS exactly 1 and the solver's flexible agent lands on 9/8 exactly.
pub fn gen_paper_example() -> Instance {
    Instance::from_pairs(&[
        &[
            (3, 8),
            (3, 8),
            (3, 8),
            (3, 8),
            (3, 8),
            (1, 4),
            (1, 4),
            (5, 8),
        ],
        &[
            (3, 8),
            (3, 8),
            (3, 8),
            (3, 8),
            (3, 8),
            (1, 4),
            (1, 4),
            (5, 8),
        ],
        &[
            (1, 2),
            (1, 2),
            (1, 3),
            (1, 3),
            (1, 3),
            (1, 3),
            (1, 3),
            (1, 3),
        ],
    ])
    .expect("static instance")
}

/// Last-agent row whose witness is the group partition {0,1} {2,3} {4,5}
/// {6,7,8}: halves for the two-item groups, thirds for the last.
fn groups_2223_row() -> Vec<(i64, i64)> {
    vec![
        (1, 2),
        (1, 2),
        (1, 2),
        (1, 2),
        (1, 2),
        (1, 2),
        (1, 3),
        (1, 3),
        (1, 3),
    ]
}

/// Clone row for the nine-item group layout: likes only the first group
/// (cost 3/4), every other group costs 13/12; MMS exactly 1.
fn clone_row_2223() -> Vec<(i64, i64)> {
    vec![
        (1, 2),
        (1, 4),
        (1, 2),
        (7, 12),
        (13, 24),
        (13, 24),
        (1, 6),
        (11, 24),
        (11, 24),
    ]
}

fn from_rows(rows: Vec<Vec<(i64, i64)>>) -> Instance {
    let refs: Vec<&[(i64, i64)]> = rows.iter().map(|r| r.as_slice()).collect();
    Instance::from_pairs(&refs).expect("static instance")
}

/// Hand-built three-agent instances pinned to each solver branch.
pub fn three_agent_cases() -> Vec<(&'static str, Instance, CaseTag)> {
    // Last-agent rows whose witnesses are the obvious group partitions.
    let groups_223: Vec<(i64, i64)> = vec![
        (1, 2),
        (1, 2),
        (1, 2),
        (1, 2),
        (1, 3),
        (1, 3),
        (1, 3),
    ];
    let all_thirds: Vec<(i64, i64)> = vec![(1, 3); 9];

    let matching = from_rows(vec![groups_223.clone(), groups_223.clone(), groups_223.clone()]);

    // Clones like only the first group; the pair (5/8, 1/2) in the second
    // group reaches cost 1 and triggers the exact reduction.
    let heavy_clone: Vec<(i64, i64)> = vec![
        (1, 2),
        (1, 4),
        (5, 8),
        (1, 2),
        (1, 2),
        (1, 2),
        (1, 8),
    ];
    let heavy = from_rows(vec![heavy_clone.clone(), heavy_clone, groups_223]);

    // Clones like only the first group (3/5); both other groups cost 6/5,
    // above 9/8, with every pair strictly below 1.
    let lb_clone: Vec<(i64, i64)> = vec![
        (1, 5),
        (1, 5),
        (1, 5),
        (2, 5),
        (2, 5),
        (2, 5),
        (2, 5),
        (2, 5),
        (2, 5),
    ];
    let load_balance = from_rows(vec![lb_clone.clone(), lb_clone, all_thirds]);

    vec![
        ("three-perfect-matching", matching, CaseTag::ThreePerfectMatching),
        ("three-heavy-pair", heavy, CaseTag::ThreeHeavyPair),
        (
            "three-direct-assignment",
            gen_paper_example(),
            CaseTag::ThreeDirectAssignment,
        ),
        ("three-load-balance", load_balance, CaseTag::ThreeLoadBalance),
    ]
}

/// Hand-built four-agent instances pinned to each case of the analysis:
/// the violator sizes, both liked-bundle shapes, the heavy atomic cell, and
/// both β branches.
pub fn four_agent_cases() -> Vec<(&'static str, Instance, CaseTag)> {
    let groups = groups_2223_row();
    let clone = clone_row_2223();

    let matching = from_rows(vec![
        groups.clone(),
        groups.clone(),
        groups.clone(),
        groups.clone(),
    ]);

    // Agents 0,1 like only G1; agent 2 likes G2 and G3, so the maximum
    // violator is the pair {0,1}.
    let pair_agent2: Vec<(i64, i64)> = vec![
        (5, 8),
        (5, 8),
        (1, 2),
        (1, 4),
        (1, 2),
        (1, 4),
        (1, 2),
        (3, 8),
        (3, 8),
    ];
    let pair = from_rows(vec![clone.clone(), clone.clone(), pair_agent2, groups.clone()]);

    // Agents 0,1 like only G1, agent 2 only G2: a triple violator with two
    // liked bundles, every agent liking exactly one.
    let single_agent2: Vec<(i64, i64)> = vec![
        (1, 1),
        (1, 8),
        (1, 4),
        (1, 4),
        (3, 4),
        (3, 8),
        (3, 8),
        (3, 8),
        (3, 8),
    ];
    let single = from_rows(vec![clone.clone(), clone.clone(), single_agent2, groups.clone()]);

    // Agent 0 likes G1 and G2; agents 1,2 like only G1.
    let double_agent0: Vec<(i64, i64)> = vec![
        (1, 2),
        (1, 4),
        (1, 2),
        (1, 4),
        (1, 1),
        (1, 8),
        (3, 8),
        (3, 8),
        (3, 8),
    ];
    let double = from_rows(vec![double_agent0, clone.clone(), clone.clone(), groups.clone()]);

    // All three clones like only G1; two-item disliked groups force an
    // atomic cell whose column remainder exceeds 1.
    let cell = from_rows(vec![clone.clone(), clone.clone(), clone, groups]);

    vec![
        ("four-perfect-matching", matching, CaseTag::FourPerfectMatching),
        ("four-pair-violator", pair, CaseTag::FourPairViolator),
        (
            "four-triple-two-liked-single",
            single,
            CaseTag::FourTripleViolatorTwoLikedSingle,
        ),
        (
            "four-triple-two-liked-double",
            double,
            CaseTag::FourTripleViolatorTwoLikedDouble,
        ),
        (
            "four-triple-one-liked-cell",
            cell,
            CaseTag::FourTripleViolatorOneLikedCell,
        ),
        (
            "four-beta-low",
            beta_case(Rational::new(2, 5), Rational::new(1, 15)),
            CaseTag::FourTripleViolatorOneLikedBetaLow,
        ),
        (
            "four-beta-high",
            beta_case(Rational::new(9, 20), Rational::new(1, 30)),
            CaseTag::FourTripleViolatorOneLikedBetaHigh,
        ),
    ]
}

/// Fourteen-item instance for the atomic-bundle β branches. Three clone
/// agents like only the two `half` items (β = 2·half); each disliked group
/// has four items, one light and three at 1/3, so every witness bundle of
/// agent 0 meets every disliked group and no cell is heavy.
///
/// Layout: items 0,1 form the liked group; items 2,3,4 are the light members
/// of groups G2, G3, G4; items 5..14 cycle through G2, G3, G4 at cost 1/3.
fn beta_case(half: Rational, light: Rational) -> Instance {
    let third = Rational::new(1, 3);
    let mut clone: Vec<Rational> = vec![half.clone(), half];
    clone.extend([light.clone(), light.clone(), light]);
    clone.extend(std::iter::repeat_n(third, 9));

    // The last agent's groups each sum to 1 with denominators 7, 9, 11, so
    // no cross-group subset sums to 1 and her witness is exactly the groups.
    let mut last = vec![Rational::new(1, 2), Rational::new(1, 2)];
    last.extend([Rational::new(1, 7), Rational::new(1, 3), Rational::new(5, 11)]);
    for _ in 0..3 {
        last.extend([Rational::new(2, 7), Rational::new(2, 9), Rational::new(2, 11)]);
    }

    Instance::new(vec![clone.clone(), clone.clone(), clone, last]).expect("static instance")
}
