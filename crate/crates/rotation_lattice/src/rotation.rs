//! Exposed rotations and their elimination.
//!
//! Rotations are found on the unit-capacity clone, where every school copy
//! holds one student, and mapped back. A student that only moves between two
//! copies of the same school drops out of the mapped rotation.

use matching_core::{clone_to_unit_capacity, is_stable, Instance, Matching, Stability, UnitClone};

use crate::LatticeError;

/// Pairs exchanged by a rotation, each list sorted by student.
///
/// Every student of the rotation appears once in `plus` and once in `minus`
/// and strictly prefers its `plus` school.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Rotation {
    pub plus: Vec<(usize, usize)>,
    pub minus: Vec<(usize, usize)>,
}

impl Rotation {
    pub fn students(&self) -> impl Iterator<Item = usize> + '_ {
        self.plus.iter().map(|&(a, _)| a)
    }

    /// Schools involved, sorted and deduplicated.
    pub fn schools(&self) -> Vec<usize> {
        let mut bs: Vec<usize> = self.plus.iter().map(|&(_, b)| b).collect();
        bs.sort_unstable();
        bs.dedup();
        bs
    }

    pub fn plus_of(&self, a: usize) -> Option<usize> {
        self.plus.binary_search_by_key(&a, |p| p.0).ok().map(|i| self.plus[i].1)
    }

    pub fn minus_of(&self, a: usize) -> Option<usize> {
        self.minus.binary_search_by_key(&a, |p| p.0).ok().map(|i| self.minus[i].1)
    }

    /// Students of `b` in the plus (resp. minus) pairs.
    pub fn plus_at(&self, b: usize) -> Vec<usize> {
        self.plus.iter().filter(|p| p.1 == b).map(|p| p.0).collect()
    }

    pub fn minus_at(&self, b: usize) -> Vec<usize> {
        self.minus.iter().filter(|p| p.1 == b).map(|p| p.0).collect()
    }

    /// Every plus pair is present in `m`.
    pub fn plus_in(&self, m: &Matching) -> bool {
        self.plus.iter().all(|&(a, b)| m.partner(a) == Some(b))
    }

    /// Applies the exchange without checking exposure.
    pub fn apply(&self, m: &Matching) -> Matching {
        let mut out = m.clone();
        for &(a, b) in &self.minus {
            out.set(a, Some(b));
        }
        out
    }
}

/// Reusable exposure computation for one instance.
#[derive(Debug, Clone)]
pub struct Exposer {
    unit: UnitClone,
}

impl Exposer {
    pub fn new(inst: &Instance) -> Self {
        Exposer { unit: clone_to_unit_capacity(inst) }
    }

    /// Rotations exposed in a stable matching of the original instance, sorted.
    pub fn exposed(&self, inst: &Instance, m: &Matching) -> Vec<Rotation> {
        let ci = &self.unit.inst;
        let cm = self.unit.from_original(inst, m);
        let mut holder = vec![None; ci.num_schools()];
        for (a, p) in cm.assignment().iter().enumerate() {
            if let Some(c) = p {
                holder[*c] = Some(a);
            }
        }
        // next[a] = (student holding a's next school, that school copy)
        let n = ci.num_students();
        let mut next: Vec<Option<(usize, usize)>> = vec![None; n];
        for (a, slot) in next.iter_mut().enumerate() {
            let Some(cur) = cm.partner(a) else { continue };
            let list = ci.student_pref(a);
            for &p in &list[ci.student_pos(a, Some(cur)) + 1..] {
                let Some(c) = p else { break };
                if ci.school_prefers(c, Some(a), holder[c]) {
                    *slot = holder[c].map(|h| (h, c));
                    break;
                }
            }
        }
        // Cycles of the partial function `next`.
        let mut state = vec![0u8; n];
        let mut out = Vec::new();
        for start in 0..n {
            if state[start] != 0 {
                continue;
            }
            let mut path = Vec::new();
            let mut a = start;
            loop {
                if state[a] != 0 {
                    if state[a] == 1 {
                        let k = path.iter().position(|&x| x == a).unwrap();
                        out.push(self.map_back(&cm, &path[k..], &next));
                    }
                    break;
                }
                state[a] = 1;
                path.push(a);
                match next[a] {
                    Some((h, _)) => a = h,
                    None => break,
                }
            }
            for &x in &path {
                state[x] = 2;
            }
        }
        out.sort();
        out
    }

    fn map_back(&self, cm: &Matching, cycle: &[usize], next: &[Option<(usize, usize)>]) -> Rotation {
        let origin = &self.unit.origin;
        let mut plus = Vec::new();
        let mut minus = Vec::new();
        for &a in cycle {
            let from = origin[cm.partner(a).unwrap()];
            let to = origin[next[a].unwrap().1];
            if from != to {
                plus.push((a, from));
                minus.push((a, to));
            }
        }
        plus.sort_unstable();
        minus.sort_unstable();
        Rotation { plus, minus }
    }
}

fn check_stable(inst: &Instance, m: &Matching) -> Result<(), LatticeError> {
    match is_stable(inst, m)? {
        Stability::Stable => Ok(()),
        Stability::Unstable(w) => Err(LatticeError::Unstable(w)),
    }
}

/// All rotations exposed in `m`; empty exactly when `m` is student-pessimal.
pub fn exposed_rotations(inst: &Instance, m: &Matching) -> Result<Vec<Rotation>, LatticeError> {
    check_stable(inst, m)?;
    Ok(Exposer::new(inst).exposed(inst, m))
}

/// The matching obtained from `m` by eliminating an exposed rotation.
pub fn eliminate(inst: &Instance, m: &Matching, rho: &Rotation) -> Result<Matching, LatticeError> {
    if !exposed_rotations(inst, m)?.contains(rho) {
        return Err(LatticeError::NotExposed);
    }
    Ok(rho.apply(m))
}
