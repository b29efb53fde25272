//! Minimization through the minimum cut of a cut digraph.

use matching_core::Matching;
use rotation_lattice::{matching_of, RotationOrder, UpSet};

use crate::certify::{check_representability, CheckMode, Verdict};
use crate::digraph::CutBundle;
use crate::family::Family;
use crate::objective::Objective;
use crate::{FrameworkError, Rational};

#[derive(Debug, Clone, PartialEq)]
pub struct Solution {
    pub upset: UpSet,
    pub matching: Matching,
    /// Cut value minus the bundle constant.
    pub value: Rational,
}

/// Reads the minimizer off the canonical minimum cut, which is the source
/// side closest to the source and hence the least upset among the optima.
pub fn solve_bundle(order: &RotationOrder, bundle: &CutBundle) -> Result<Solution, FrameworkError> {
    let cut = flow_solver::solve_min_cut(&bundle.network)?;
    let value = cut.value.as_finite().ok_or(FrameworkError::Infeasible)?.clone();
    let upset = UpSet::from_ids(order.len(), cut.inner());
    let matching = matching_of(order, &upset)?;
    Ok(Solution { upset, matching, value: value - &bundle.constant })
}

/// Certifies `(objective, family)` and minimizes through the cut digraph.
pub fn minimize(
    order: &RotationOrder,
    family: &Family,
    objective: &Objective,
    mode: CheckMode,
) -> Result<Solution, FrameworkError> {
    match check_representability(order, family, objective, mode)? {
        Verdict::NotRepresentable(c) => Err(FrameworkError::NotRepresentable(Box::new(c))),
        Verdict::Representable(b) | Verdict::Consistent { bundle: b, .. } => solve_bundle(order, &b),
    }
}
