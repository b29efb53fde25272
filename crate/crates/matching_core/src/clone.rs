//! Many-to-one to one-to-one reduction by splitting each school into unit-quota copies.

use crate::instance::{Instance, Partner};
use crate::matching::Matching;

/// A unit-capacity copy of an instance plus the map from copies back to schools.
#[derive(Debug, Clone)]
pub struct UnitClone {
    pub inst: Instance,
    /// Original school of each copy.
    pub origin: Vec<usize>,
    /// First copy index of each original school; copies are consecutive.
    pub first_copy: Vec<usize>,
}

pub fn clone_to_unit_capacity(inst: &Instance) -> UnitClone {
    let mut origin = Vec::new();
    let mut first_copy = Vec::with_capacity(inst.num_schools());
    let mut names = Vec::new();
    for b in 0..inst.num_schools() {
        first_copy.push(origin.len());
        let q = inst.quota(b);
        for k in 0..q {
            origin.push(b);
            if q == 1 {
                names.push(inst.school_name(b).to_string());
            } else {
                names.push(format!("{}#{}", inst.school_name(b), k + 1));
            }
        }
    }
    let student_pref = (0..inst.num_students())
        .map(|a| {
            let mut list: Vec<Partner> = Vec::with_capacity(origin.len() + 1);
            for &p in inst.student_pref(a) {
                match p {
                    Some(b) => list.extend((0..inst.quota(b)).map(|k| Some(first_copy[b] + k))),
                    None => list.push(None),
                }
            }
            list
        })
        .collect();
    let school_pref = origin.iter().map(|&b| inst.school_pref(b).to_vec()).collect();
    let quota = vec![1; origin.len()];
    let cloned = Instance::new(inst.students().to_vec(), names, quota, student_pref, school_pref)
        .expect("unit clone of a valid instance is valid");
    UnitClone { inst: cloned, origin, first_copy }
}

impl UnitClone {
    /// Collapses copies back to their schools.
    pub fn to_original(&self, m: &Matching) -> Matching {
        Matching::new(m.assignment().iter().map(|p| p.map(|c| self.origin[c])).collect())
    }

    /// Spreads each roster over its copies, the school's best student on the first copy.
    pub fn from_original(&self, original: &Instance, m: &Matching) -> Matching {
        let mut out = Matching::empty(m.len());
        for (b, mut roster) in m.rosters(original.num_schools()).into_iter().enumerate() {
            roster.sort_by_key(|&a| original.school_pos(b, Some(a)));
            for (k, a) in roster.into_iter().enumerate() {
                out.set(a, Some(self.first_copy[b] + k));
            }
        }
        out
    }

    pub fn is_identity(&self) -> bool {
        self.origin.len() == self.first_copy.len()
    }
}
