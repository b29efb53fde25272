use std::cmp::Ordering;

use thiserror::Error;

use crate::instance::{Instance, Partner, OUTSIDE};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MatchingError {
    #[error("matching covers {found} students, instance has {expected}")]
    WrongSize { expected: usize, found: usize },
    #[error("student {student} is assigned to unknown school index {school}")]
    UnknownSchool { student: usize, school: usize },
    #[error("school {school} holds {held} students, quota is {quota}")]
    QuotaOverflow { school: usize, held: usize, quota: usize },
    #[error("input matching is not stable: {0:?}")]
    Unstable(Witness),
}

/// A student-to-assignment map. School rosters are derived on demand.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Matching {
    assign: Vec<Partner>,
}

impl Matching {
    pub fn new(assign: Vec<Partner>) -> Self {
        Matching { assign }
    }

    pub fn empty(num_students: usize) -> Self {
        Matching { assign: vec![OUTSIDE; num_students] }
    }

    pub fn from_pairs(num_students: usize, pairs: &[(usize, usize)]) -> Self {
        let mut m = Matching::empty(num_students);
        for &(a, b) in pairs {
            m.assign[a] = Some(b);
        }
        m
    }

    #[inline]
    pub fn partner(&self, a: usize) -> Partner {
        self.assign[a]
    }

    pub fn set(&mut self, a: usize, p: Partner) {
        self.assign[a] = p;
    }

    pub fn assignment(&self) -> &[Partner] {
        &self.assign
    }

    pub fn len(&self) -> usize {
        self.assign.len()
    }

    pub fn is_empty(&self) -> bool {
        self.assign.is_empty()
    }

    /// Matched (student, school) pairs in student order.
    pub fn pairs(&self) -> Vec<(usize, usize)> {
        self.assign.iter().enumerate().filter_map(|(a, p)| p.map(|b| (a, b))).collect()
    }

    /// Students held by `b`, in increasing id order.
    pub fn roster(&self, b: usize) -> Vec<usize> {
        self.assign.iter().enumerate().filter(|(_, p)| **p == Some(b)).map(|(a, _)| a).collect()
    }

    /// All rosters at once, indexed by school.
    pub fn rosters(&self, num_schools: usize) -> Vec<Vec<usize>> {
        let mut r = vec![Vec::new(); num_schools];
        for (a, p) in self.assign.iter().enumerate() {
            if let Some(b) = p {
                r[*b].push(a);
            }
        }
        r
    }

    pub fn validate(&self, inst: &Instance) -> Result<(), MatchingError> {
        if self.assign.len() != inst.num_students() {
            return Err(MatchingError::WrongSize { expected: inst.num_students(), found: self.assign.len() });
        }
        let mut held = vec![0usize; inst.num_schools()];
        for (a, p) in self.assign.iter().enumerate() {
            if let Some(b) = *p {
                if b >= inst.num_schools() {
                    return Err(MatchingError::UnknownSchool { student: a, school: b });
                }
                held[b] += 1;
            }
        }
        for (b, &h) in held.iter().enumerate() {
            if h > inst.quota(b) {
                return Err(MatchingError::QuotaOverflow { school: b, held: h, quota: inst.quota(b) });
            }
        }
        Ok(())
    }
}

/// Why a matching is not stable.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Witness {
    /// Student prefers the outside option to the assigned school.
    StudentBlocks { student: usize },
    /// School prefers the outside option to a student it holds.
    SchoolBlocks { school: usize, student: usize },
    /// Student and school prefer each other to their current situation.
    BlockingPair { student: usize, school: usize },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Stability {
    Stable,
    Unstable(Witness),
}

impl Stability {
    pub fn is_stable(&self) -> bool {
        matches!(self, Stability::Stable)
    }
}

/// Checks stability; structural problems are reported as errors, not as instability.
pub fn is_stable(inst: &Instance, m: &Matching) -> Result<Stability, MatchingError> {
    m.validate(inst)?;
    let rosters = m.rosters(inst.num_schools());
    for a in 0..inst.num_students() {
        if let Some(b) = m.partner(a) {
            if inst.student_prefers(a, OUTSIDE, Some(b)) {
                return Ok(Stability::Unstable(Witness::StudentBlocks { student: a }));
            }
            if inst.school_prefers(b, OUTSIDE, Some(a)) {
                return Ok(Stability::Unstable(Witness::SchoolBlocks { school: b, student: a }));
            }
        }
    }
    // worst held student per school, or None when the school has a free seat
    let worst: Vec<Option<usize>> = (0..inst.num_schools())
        .map(|b| {
            if rosters[b].len() < inst.quota(b) {
                None
            } else {
                rosters[b].iter().copied().max_by_key(|&a| inst.school_pos(b, Some(a)))
            }
        })
        .collect();
    for a in 0..inst.num_students() {
        let cur = m.partner(a);
        for &p in inst.student_pref(a) {
            if p == cur || p == OUTSIDE {
                break;
            }
            let b = p.unwrap();
            let wants = match worst[b] {
                None => inst.school_prefers(b, Some(a), OUTSIDE),
                Some(w) => inst.school_prefers(b, Some(a), Some(w)),
            };
            if wants {
                return Ok(Stability::Unstable(Witness::BlockingPair { student: a, school: b }));
            }
        }
    }
    Ok(Stability::Stable)
}

/// Student-wise comparison of two matchings.
///
/// `Some(Greater)` means every student weakly prefers `m1` and at least one
/// strictly; `None` means the matchings are incomparable.
pub fn compare(inst: &Instance, m1: &Matching, m2: &Matching) -> Option<Ordering> {
    let mut better = false;
    let mut worse = false;
    for a in 0..inst.num_students() {
        let (x, y) = (m1.partner(a), m2.partner(a));
        if x == y {
            continue;
        }
        if inst.student_prefers(a, x, y) {
            better = true;
        } else {
            worse = true;
        }
    }
    match (better, worse) {
        (false, false) => Some(Ordering::Equal),
        (true, false) => Some(Ordering::Greater),
        (false, true) => Some(Ordering::Less),
        (true, true) => None,
    }
}

/// Weak student-wise dominance: every student weakly prefers `m1`.
pub fn dominates(inst: &Instance, m1: &Matching, m2: &Matching) -> bool {
    matches!(compare(inst, m1, m2), Some(Ordering::Greater) | Some(Ordering::Equal))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LatticeOp {
    /// Each student receives the less preferred of the two partners.
    Meet,
    /// Each student receives the more preferred of the two partners.
    Join,
}

pub fn lattice_op(inst: &Instance, kind: LatticeOp, m1: &Matching, m2: &Matching) -> Result<Matching, MatchingError> {
    for m in [m1, m2] {
        if let Stability::Unstable(w) = is_stable(inst, m)? {
            return Err(MatchingError::Unstable(w));
        }
    }
    Ok(lattice_op_unchecked(inst, kind, m1, m2))
}

/// Lattice operation without the stability precondition check.
pub fn lattice_op_unchecked(inst: &Instance, kind: LatticeOp, m1: &Matching, m2: &Matching) -> Matching {
    let assign = (0..inst.num_students())
        .map(|a| {
            let (x, y) = (m1.partner(a), m2.partner(a));
            let x_better = inst.student_pos(a, x) <= inst.student_pos(a, y);
            match (kind, x_better) {
                (LatticeOp::Join, true) | (LatticeOp::Meet, false) => x,
                _ => y,
            }
        })
        .collect();
    Matching::new(assign)
}

/// Sum of 0-based student ranks; strictly decreases along strict dominance.
pub fn rank_sum(inst: &Instance, m: &Matching) -> usize {
    (0..inst.num_students()).map(|a| inst.student_pos(a, m.partner(a))).sum()
}
