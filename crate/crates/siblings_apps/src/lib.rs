//! Sibling placement on top of the minimum cut framework: same school
//! (MSSS), same activity with shared activity orders (MSSP) and the brute
//! force search for differing orders (MSDP).

pub mod instance;
pub mod msdp;
pub mod mssp;
pub mod msss;
pub mod normalize;

pub use instance::{parse_sibling_text, ActivityStructure, SiblingInstance, SiblingText};
pub use msdp::{activity_mismatch_objective, activity_stable_family, is_activity_stable, solve_msdp_bruteforce};
pub use mssp::{irp_digraph, mssp_pair_family, mssp_pair_objective, solve_mssp, IrpEnd, IrpSpec, PairFamily};
pub use msss::{msss_tables, rho_in_out, separated_pairs, solve_msss, InOut, MsssSolution};
pub use normalize::{normalize_msss, Normalized};

use matching_core::ParseError;
use mincut_framework::FrameworkError;
use rotation_lattice::LatticeError;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SiblingError {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error(transparent)]
    Lattice(#[from] LatticeError),
    #[error(transparent)]
    Framework(#[from] FrameworkError),
    #[error("sibling pair {index} names student {student} twice")]
    SamePair { index: usize, student: usize },
    #[error("sibling pair {index} refers to unknown student {student}")]
    UnknownStudent { index: usize, student: usize },
    #[error("school `{0}` belongs to no activity")]
    Uncovered(String),
    #[error("school `{0}` belongs to more than one activity")]
    Overlap(String),
    #[error("student `{student}` ranks two classes of activity `{activity}` above the outside option")]
    TwoClasses { student: String, activity: String },
    #[error("siblings of pair {0} rank activities in different orders")]
    OrderMismatch(usize),
    #[error("students {a} and {b} share a school in an extreme stable matching")]
    AssumptionViolated { a: usize, b: usize },
    #[error("an implied-rotation constraint needs at least one rotation")]
    BothSentinels,
    #[error("no activity-stable matching search beyond {limit} stable matchings: the problem is NP-complete, only exhaustive search is offered")]
    TooMany { limit: usize },
}
