//! Exact solver for all-but-one maximin-share (AMMS) chore allocation.
//!
//! An allocation of indivisible chores is α-AMMS when n−1 agents receive
//! bundles within their maximin share (MMS) and the one remaining agent
//! stays within α times hers. This crate computes such allocations with
//! exact rational arithmetic throughout:
//!
//! - `n = 1, 2`: exact MMS allocations (α = 1),
//! - `n = 3`: α = 9/8,
//! - `n = 4`: α = 4/3,
//! - `n ≥ 5`: α = (n+1)²/4n via iterated valid reductions.
//!
//! The pieces: [`oracle`] computes exact MMS values and witness partitions
//! (the only place MMS values originate), [`matching`] handles
//! MMS-feasibility graphs and Hall violators, [`procedures`] holds the
//! reusable subroutines (divide-and-choose, load balancing, capped bag
//! filling, partition merging), [`solver`] runs the per-n case analyses,
//! and [`verify`] independently certifies every output against the raw
//! instance. [`gen`] and [`suite`] provide seeded instances and randomized
//! verification sweeps.

pub mod error;
pub mod gen;
pub mod instance;
pub mod items;
pub mod matching;
pub mod oracle;
pub mod procedures;
pub mod rational;
pub mod solver;
pub mod suite;
pub mod verify;

pub use error::{Error, Result};
pub use instance::{Allocation, Instance, NormalizedInstance, Partition, ReducedInstanceView};
pub use items::ItemSet;
pub use oracle::{mms, mms_partition, normalize, MmsResult, DEFAULT_ITEM_BUDGET};
pub use rational::Rational;
pub use solver::{alpha_for, solve, solve_with_budget, CaseTag, SolveResult};
pub use verify::{verify_allocation, VerifyReport};
