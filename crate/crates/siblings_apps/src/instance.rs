//! Sibling instances, activity structures and their text annotations.
//!
//! ```text
//! pair a1 abar1
//! activity c1: b11 b21 b31
//! ```

use matching_core::{parse_base, Instance, ParseError, Partner};

use crate::SiblingError;

/// A market with sibling pairs given as student indices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SiblingInstance {
    pub base: Instance,
    pub pairs: Vec<(usize, usize)>,
}

impl SiblingInstance {
    pub fn new(base: Instance, pairs: Vec<(usize, usize)>) -> Result<Self, SiblingError> {
        for (index, &(a, b)) in pairs.iter().enumerate() {
            for s in [a, b] {
                if s >= base.num_students() {
                    return Err(SiblingError::UnknownStudent { index, student: s });
                }
            }
            if a == b {
                return Err(SiblingError::SamePair { index, student: a });
            }
        }
        Ok(SiblingInstance { base, pairs })
    }
}

/// Schools grouped into activities.
///
/// Each student finds at most one class per activity acceptable. A student
/// with no acceptable class in an activity can never take part in it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ActivityStructure {
    pub names: Vec<String>,
    pub classes: Vec<Vec<usize>>,
    pub activity_of: Vec<usize>,
    /// `eligible[a][j]`: the class of activity `j` that `a` ranks above OUTSIDE.
    pub eligible: Vec<Vec<Option<usize>>>,
}

impl ActivityStructure {
    pub fn new(inst: &Instance, activities: Vec<(String, Vec<usize>)>) -> Result<Self, SiblingError> {
        let mut activity_of = vec![usize::MAX; inst.num_schools()];
        for (j, (_, cls)) in activities.iter().enumerate() {
            for &b in cls {
                if activity_of[b] != usize::MAX {
                    return Err(SiblingError::Overlap(inst.school_name(b).to_string()));
                }
                activity_of[b] = j;
            }
        }
        if let Some(b) = activity_of.iter().position(|&j| j == usize::MAX) {
            return Err(SiblingError::Uncovered(inst.school_name(b).to_string()));
        }
        let k = activities.len();
        let mut eligible = vec![vec![None; k]; inst.num_students()];
        for (a, row) in eligible.iter_mut().enumerate() {
            for b in inst.acceptable_schools(a) {
                let j = activity_of[b];
                if row[j].is_some() {
                    return Err(SiblingError::TwoClasses {
                        student: inst.student_name(a).to_string(),
                        activity: activities[j].0.clone(),
                    });
                }
                row[j] = Some(b);
            }
        }
        let (names, classes) = activities.into_iter().unzip();
        Ok(ActivityStructure { names, classes, activity_of, eligible })
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn activity(&self, p: Partner) -> Option<usize> {
        p.map(|b| self.activity_of[b])
    }

    /// Activities `a` can join, best first.
    pub fn order_of(&self, inst: &Instance, a: usize) -> Vec<usize> {
        let mut v: Vec<usize> = (0..self.len()).filter(|&j| self.eligible[a][j].is_some()).collect();
        v.sort_by_key(|&j| inst.student_pos(a, self.eligible[a][j]));
        v
    }

    /// Checks that every pair ranks their shared activities in the same order.
    pub fn check_same_order(&self, inst: &Instance, pairs: &[(usize, usize)]) -> Result<(), SiblingError> {
        for (i, &(a, b)) in pairs.iter().enumerate() {
            let oa: Vec<usize> =
                self.order_of(inst, a).into_iter().filter(|&j| self.eligible[b][j].is_some()).collect();
            let ob: Vec<usize> =
                self.order_of(inst, b).into_iter().filter(|&j| self.eligible[a][j].is_some()).collect();
            if oa != ob {
                return Err(SiblingError::OrderMismatch(i));
            }
        }
        Ok(())
    }

    /// A total order of all activities extending the orders of `a` and `b`,
    /// which must agree on shared activities. Ties go to the lower index.
    pub fn merged_order(&self, inst: &Instance, a: usize, b: usize) -> Vec<usize> {
        let k = self.len();
        let mut succ = vec![Vec::new(); k];
        let mut indeg = vec![0usize; k];
        for s in [a, b] {
            let o = self.order_of(inst, s);
            for w in o.windows(2) {
                succ[w[0]].push(w[1]);
                indeg[w[1]] += 1;
            }
        }
        let mut out = Vec::with_capacity(k);
        let mut ready: std::collections::BTreeSet<usize> = (0..k).filter(|&j| indeg[j] == 0).collect();
        while let Some(j) = ready.pop_first() {
            out.push(j);
            for &x in &succ[j] {
                indeg[x] -= 1;
                if indeg[x] == 0 {
                    ready.insert(x);
                }
            }
        }
        debug_assert_eq!(out.len(), k, "orders of a pair disagree");
        out
    }
}

/// A parsed sibling file: the instance, its activities if any are declared,
/// and lines left for other extensions.
#[derive(Debug, Clone)]
pub struct SiblingText {
    pub instance: SiblingInstance,
    pub activities: Option<ActivityStructure>,
    pub extra: Vec<(usize, String)>,
}

pub fn parse_sibling_text(text: &str) -> Result<SiblingText, SiblingError> {
    let parsed = parse_base(text)?;
    let inst = parsed.instance;
    let mut pairs = Vec::new();
    let mut acts: Vec<(String, Vec<usize>)> = Vec::new();
    let mut extra = Vec::new();
    for (ln, line) in parsed.extra {
        if let Some(rest) = line.strip_prefix("pair ") {
            let ids: Vec<&str> = rest.split_whitespace().collect();
            if ids.len() != 2 {
                return Err(ParseError::new(ln, "expected `pair <student> <student>`").into());
            }
            let mut idx = [0; 2];
            for (slot, id) in idx.iter_mut().zip(&ids) {
                *slot = inst
                    .student_index(id)
                    .ok_or_else(|| ParseError::new(ln, format!("unknown student `{id}` in pair")))?;
            }
            if idx[0] == idx[1] {
                return Err(ParseError::new(ln, "a pair needs two distinct students").into());
            }
            pairs.push((idx[0], idx[1]));
        } else if let Some(rest) = line.strip_prefix("activity ") {
            let Some((name, list)) = rest.split_once(':') else {
                return Err(ParseError::new(ln, "expected `activity <name>: <classes>`").into());
            };
            let mut cls = Vec::new();
            for id in list.split_whitespace() {
                cls.push(
                    inst.school_index(id)
                        .ok_or_else(|| ParseError::new(ln, format!("unknown class `{id}` in activity")))?,
                );
            }
            acts.push((name.trim().to_string(), cls));
        } else {
            extra.push((ln, line));
        }
    }
    let activities = if acts.is_empty() { None } else { Some(ActivityStructure::new(&inst, acts)?) };
    Ok(SiblingText { instance: SiblingInstance::new(inst, pairs)?, activities, extra })
}
