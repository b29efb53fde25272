//! Feasible families of stable matchings, stored as upsets of rotations.

use std::collections::HashSet;
use std::sync::Arc;

use matching_core::{Instance, LatticeOp, Matching};
use rotation_lattice::{enumerate_upsets, upset_of, RotationOrder, UpSet};

use crate::FrameworkError;

/// The feasible set F.
#[derive(Clone)]
pub enum Family {
    /// Every stable matching.
    All,
    /// An explicit list, identified by upsets.
    Explicit(Vec<UpSet>),
    /// Membership predicate over upsets; enumerated when needed.
    Predicate(Arc<dyn Fn(&UpSet) -> bool + Send + Sync>),
}

impl std::fmt::Debug for Family {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Family::All => write!(f, "All"),
            Family::Explicit(v) => write!(f, "Explicit({} members)", v.len()),
            Family::Predicate(_) => write!(f, "Predicate"),
        }
    }
}

/// Two members whose meet or join leaves the family.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LatticeViolation {
    pub first: UpSet,
    pub second: UpSet,
    pub op: LatticeOp,
    pub result: UpSet,
}

impl Family {
    pub fn from_matchings(inst: &Instance, order: &RotationOrder, ms: &[Matching]) -> Result<Family, FrameworkError> {
        let mut ups = Vec::with_capacity(ms.len());
        for m in ms {
            ups.push(upset_of(inst, order, m)?);
        }
        ups.sort();
        ups.dedup();
        Ok(Family::Explicit(ups))
    }

    /// Members as upsets; `All` and `Predicate` enumerate the lattice up to `limit`.
    pub fn members(&self, order: &RotationOrder, limit: usize) -> Result<Vec<UpSet>, FrameworkError> {
        Ok(match self {
            Family::All => enumerate_upsets(order, limit)?,
            Family::Explicit(v) => v.clone(),
            Family::Predicate(p) => enumerate_upsets(order, limit)?.into_iter().filter(|u| p(u)).collect(),
        })
    }
}

/// Meet is the union of upsets and join their intersection.
pub fn find_violation(members: &[UpSet]) -> Option<LatticeViolation> {
    let set: HashSet<&UpSet> = members.iter().collect();
    for (i, x) in members.iter().enumerate() {
        for y in &members[i + 1..] {
            for op in [LatticeOp::Join, LatticeOp::Meet] {
                let r = match op {
                    LatticeOp::Meet => x.union(y),
                    LatticeOp::Join => x.intersection(y),
                };
                if !set.contains(&r) {
                    return Some(LatticeViolation { first: x.clone(), second: y.clone(), op, result: r });
                }
            }
        }
    }
    None
}
