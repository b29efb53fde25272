//! Rotations of a school matching market, the order in which they can be
//! eliminated, and the correspondence between upper-closed rotation sets and
//! stable matchings.

pub mod order;
pub mod rotation;
pub mod upset;

pub use order::{all_rotations, all_rotations_with, rotation_order, rotation_order_with, Greedy, RotationOrder};
pub use rotation::{eliminate, exposed_rotations, Exposer, Rotation};
pub use upset::{enumerate_upsets, matching_of, upset_of, UpSet};

use matching_core::{MatchingError, Witness};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LatticeError {
    #[error(transparent)]
    Matching(#[from] MatchingError),
    #[error("matching is not stable: {0:?}")]
    Unstable(Witness),
    #[error("rotation is not exposed in the matching")]
    NotExposed,
    #[error("rotation set is not upper-closed: {missing} must precede {member}")]
    NotUpperClosed { member: usize, missing: usize },
    #[error("more than {limit} upper-closed sets")]
    LimitExceeded { limit: usize },
}
