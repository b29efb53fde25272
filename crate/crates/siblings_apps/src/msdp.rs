//! Same-activity placement with differing activity orders, by exhaustive
//! search over the stable matchings.

use std::sync::Arc;

use matching_core::{Instance, Matching};
use mincut_framework::{int, Family, Objective};
use rotation_lattice::{enumerate_upsets, matching_of, rotation_order, LatticeError, RotationOrder, UpSet};

use crate::{ActivityStructure, SiblingError};

/// Both siblings of every pair hold classes of one activity.
pub fn is_activity_stable(acts: &ActivityStructure, m: &Matching, pairs: &[(usize, usize)]) -> bool {
    pairs.iter().all(|&(a, abar)| {
        let (x, y) = (acts.activity(m.partner(a)), acts.activity(m.partner(abar)));
        x.is_some() && x == y
    })
}

/// Number of pairs not both placed in one activity.
pub fn activity_mismatch_objective(acts: &ActivityStructure, pairs: &[(usize, usize)]) -> Objective {
    let (acts, pairs) = (acts.clone(), pairs.to_vec());
    Objective::oracle(move |m| {
        int(pairs.iter().filter(|&&(a, abar)| !is_activity_stable(&acts, m, &[(a, abar)])).count() as i64)
    })
}

/// The activity-stable matchings as a family over `order`.
pub fn activity_stable_family(order: &RotationOrder, acts: &ActivityStructure, pairs: &[(usize, usize)]) -> Family {
    let (order, acts, pairs) = (order.clone(), acts.clone(), pairs.to_vec());
    Family::Predicate(Arc::new(move |r: &UpSet| {
        matching_of(&order, r).is_ok_and(|m| is_activity_stable(&acts, &m, &pairs))
    }))
}

/// The first activity-stable matching in upset enumeration order, searching
/// at most `limit` stable matchings.
pub fn solve_msdp_bruteforce(
    inst: &Instance,
    acts: &ActivityStructure,
    pairs: &[(usize, usize)],
    limit: usize,
) -> Result<Option<Matching>, SiblingError> {
    let order = rotation_order(inst);
    let upsets = enumerate_upsets(&order, limit).map_err(|e| match e {
        LatticeError::LimitExceeded { limit } => SiblingError::TooMany { limit },
        e => e.into(),
    })?;
    for r in &upsets {
        let m = matching_of(&order, r)?;
        if is_activity_stable(acts, &m, pairs) {
            return Ok(Some(m));
        }
    }
    Ok(None)
}
