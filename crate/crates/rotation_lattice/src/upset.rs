//! Upper-closed rotation sets and the matchings they stand for.

use fixedbitset::FixedBitSet;
use matching_core::{is_stable, Instance, Matching, Stability};

use crate::order::RotationOrder;
use crate::LatticeError;

/// A set of rotation ids. Sets produced by this crate are upper-closed.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct UpSet(FixedBitSet);

impl UpSet {
    pub fn empty(k: usize) -> Self {
        UpSet(FixedBitSet::with_capacity(k))
    }

    pub fn full(k: usize) -> Self {
        let mut s = FixedBitSet::with_capacity(k);
        s.insert_range(..);
        UpSet(s)
    }

    pub fn from_ids(k: usize, ids: impl IntoIterator<Item = usize>) -> Self {
        let mut s = FixedBitSet::with_capacity(k);
        s.extend(ids);
        UpSet(s)
    }

    pub fn from_bits(bits: FixedBitSet) -> Self {
        UpSet(bits)
    }

    pub fn bits(&self) -> &FixedBitSet {
        &self.0
    }

    pub fn contains(&self, i: usize) -> bool {
        self.0.contains(i)
    }

    pub fn insert(&mut self, i: usize) {
        self.0.insert(i);
    }

    pub fn remove(&mut self, i: usize) {
        self.0.set(i, false);
    }

    pub fn ids(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.ones()
    }

    pub fn len(&self) -> usize {
        self.0.count_ones(..)
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_clear()
    }

    pub fn capacity(&self) -> usize {
        self.0.len()
    }

    pub fn union(&self, other: &UpSet) -> UpSet {
        let mut s = self.0.clone();
        s.union_with(&other.0);
        UpSet(s)
    }

    pub fn intersection(&self, other: &UpSet) -> UpSet {
        let mut s = self.0.clone();
        s.intersect_with(&other.0);
        UpSet(s)
    }

    pub fn is_subset(&self, other: &UpSet) -> bool {
        self.0.is_subset(&other.0)
    }

    /// The first (member, missing predecessor) violating upward closure.
    pub fn closure_violation(&self, order: &RotationOrder) -> Option<(usize, usize)> {
        for i in self.ids() {
            if let Some(p) = order.up_set(i).ones().find(|&p| !self.contains(p)) {
                return Some((i, p));
            }
        }
        None
    }

    /// Smallest upper-closed superset.
    pub fn closure(&self, order: &RotationOrder) -> UpSet {
        let mut s = self.0.clone();
        for i in self.ids() {
            s.union_with(order.up_set(i));
        }
        UpSet(s)
    }
}

/// The stable matching reached from the student-optimal one by eliminating `r`.
pub fn matching_of(order: &RotationOrder, r: &UpSet) -> Result<Matching, LatticeError> {
    if let Some((member, missing)) = r.closure_violation(order) {
        return Err(LatticeError::NotUpperClosed { member, missing });
    }
    // Ids are a linear extension, so ascending order always finds the next rotation exposed.
    let mut m = order.m0.clone();
    for i in r.ids() {
        let rho = &order.rotations[i];
        debug_assert!(rho.plus_in(&m));
        m = rho.apply(&m);
    }
    Ok(m)
}

/// The rotations eliminated on any path from the student-optimal matching to `m`.
pub fn upset_of(inst: &Instance, order: &RotationOrder, m: &Matching) -> Result<UpSet, LatticeError> {
    if let Stability::Unstable(w) = is_stable(inst, m)? {
        return Err(LatticeError::Unstable(w));
    }
    let k = order.len();
    let ids = (0..k).filter(|&i| {
        let (a, b) = order.rotations[i].plus[0];
        inst.student_prefers(a, Some(b), m.partner(a))
    });
    let r = UpSet::from_ids(k, ids);
    debug_assert_eq!(matching_of(order, &r).as_ref(), Ok(m));
    Ok(r)
}

/// All upper-closed sets, in lexicographic order of their membership over ids.
pub fn enumerate_upsets(order: &RotationOrder, limit: usize) -> Result<Vec<UpSet>, LatticeError> {
    let k = order.len();
    let preds: Vec<Vec<usize>> = (0..k).map(|j| order.up_set(j).ones().filter(|&i| i != j).collect()).collect();
    let mut out = Vec::new();
    let mut cur = FixedBitSet::with_capacity(k);
    fn go(
        j: usize,
        k: usize,
        preds: &[Vec<usize>],
        cur: &mut FixedBitSet,
        out: &mut Vec<UpSet>,
        limit: usize,
    ) -> Result<(), LatticeError> {
        if j == k {
            if out.len() >= limit {
                return Err(LatticeError::LimitExceeded { limit });
            }
            out.push(UpSet(cur.clone()));
            return Ok(());
        }
        go(j + 1, k, preds, cur, out, limit)?;
        if preds[j].iter().all(|&p| cur.contains(p)) {
            cur.insert(j);
            go(j + 1, k, preds, cur, out, limit)?;
            cur.set(j, false);
        }
        Ok(())
    }
    go(0, k, &preds, &mut cur, &mut out, limit)?;
    Ok(out)
}
