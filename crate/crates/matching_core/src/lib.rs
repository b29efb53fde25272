//! School matching markets with quotas and an explicit outside option:
//! instances, stability checks, deferred acceptance, the lattice operations
//! on stable matchings and an exhaustive enumerator for small markets.

pub mod brute;
pub mod clone;
pub mod da;
pub mod instance;
pub mod matching;
pub mod random;
pub mod text;

pub use brute::{enumerate_stable_bruteforce, LimitExceeded};
pub use clone::{clone_to_unit_capacity, UnitClone};
pub use da::{deferred_acceptance, Side};
pub use instance::{Instance, InstanceError, Partner, RankTable, OUTSIDE};
pub use matching::{
    compare, dominates, is_stable, lattice_op, lattice_op_unchecked, rank_sum, LatticeOp, Matching, MatchingError,
    Stability, Witness,
};
pub use random::{random_cyclic_instance, random_instance, MarketShape};
pub use text::{parse_base, write_base, BaseParse, ParseError};
