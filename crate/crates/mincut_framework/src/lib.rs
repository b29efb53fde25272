//! Minimum-cut representability of optimization problems over stable
//! matchings: meta-rotations of a sublattice, first and second order
//! differentials, the cut digraph, certificates of non-representability,
//! conic combinations and the end-to-end minimizer.

pub mod certify;
pub mod digraph;
pub mod family;
pub mod meta;
pub mod objective;
pub mod solve;

pub use certify::{
    check_representability, is_linearizable, nonlinear_witness, Certificate, CheckMode, Verdict, DEFAULT_CAP,
};
pub use digraph::{build_cut_digraph, conic_combine, default_gamma, CutBundle};
pub use family::{find_violation, Family, LatticeViolation};
pub use meta::{Class, MetaRotations};
pub use objective::{differentials, DiffTables, Evaluator, LinearWeights, Objective};
pub use solve::{minimize, solve_bundle, Solution};

use num_rational::BigRational;
use thiserror::Error;

pub type Rational = BigRational;

/// Integer as a rational.
pub fn int(x: i64) -> Rational {
    BigRational::from_integer(x.into())
}

/// `n / d` as a rational.
pub fn ratio(n: i64, d: i64) -> Rational {
    BigRational::new(n.into(), d.into())
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FrameworkError {
    #[error(transparent)]
    Lattice(#[from] rotation_lattice::LatticeError),
    #[error(transparent)]
    Flow(#[from] flow_solver::FlowError),
    #[error("the feasible family is empty")]
    EmptyFamily,
    #[error("gamma {given} is below the required {needed}")]
    GammaTooSmall { given: Box<Rational>, needed: Box<Rational> },
    #[error("coefficient {index} is negative")]
    NegativeCoefficient { index: usize },
    #[error("bundles are built over different rotation sets")]
    MismatchedBundles,
    #[error("not minimum cut representable: {0}")]
    NotRepresentable(Box<Certificate>),
    #[error("the minimum cut is infinite: no feasible matching")]
    Infeasible,
    #[error("rotation set is not a union of meta-rotations of the family")]
    OutsideFamily,
}
