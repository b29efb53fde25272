use std::collections::HashMap;

use thiserror::Error;

/// A student's assignment or a school's seat holder. `None` is the outside option.
pub type Partner = Option<usize>;

/// The outside option.
pub const OUTSIDE: Partner = None;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum InstanceError {
    #[error("duplicate {side} id `{id}`")]
    DuplicateId { side: &'static str, id: String },
    #[error("school `{school}` has quota {quota}, expected 1..={max}")]
    BadQuota { school: String, quota: usize, max: usize },
    #[error("preference list of {side} `{id}` is not a permutation of the other side plus the outside option")]
    BadPreference { side: &'static str, id: String },
    #[error("expected {expected} preference lists for {side}, found {found}")]
    PreferenceCount { side: &'static str, expected: usize, found: usize },
}

/// A many-to-one school matching market.
///
/// Every preference list is a strict total order over the other side plus
/// the outside option. Ranks are stored as 0-based positions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Instance {
    students: Vec<String>,
    schools: Vec<String>,
    quota: Vec<usize>,
    student_pref: Vec<Vec<Partner>>,
    school_pref: Vec<Vec<Partner>>,
    student_pos: Vec<Vec<usize>>,
    school_pos: Vec<Vec<usize>>,
}

fn positions(list: &[Partner], others: usize) -> Option<Vec<usize>> {
    if list.len() != others + 1 {
        return None;
    }
    let mut pos = vec![usize::MAX; others + 1];
    for (i, p) in list.iter().enumerate() {
        let slot = match p {
            Some(x) if *x < others => *x,
            Some(_) => return None,
            None => others,
        };
        if pos[slot] != usize::MAX {
            return None;
        }
        pos[slot] = i;
    }
    Some(pos)
}

fn check_unique(side: &'static str, ids: &[String]) -> Result<(), InstanceError> {
    let mut seen = HashMap::new();
    for id in ids {
        if seen.insert(id.as_str(), ()).is_some() {
            return Err(InstanceError::DuplicateId { side, id: id.clone() });
        }
    }
    Ok(())
}

impl Instance {
    pub fn new(
        students: Vec<String>,
        schools: Vec<String>,
        quota: Vec<usize>,
        student_pref: Vec<Vec<Partner>>,
        school_pref: Vec<Vec<Partner>>,
    ) -> Result<Self, InstanceError> {
        check_unique("student", &students)?;
        check_unique("school", &schools)?;
        if quota.len() != schools.len() {
            return Err(InstanceError::PreferenceCount {
                side: "school quotas",
                expected: schools.len(),
                found: quota.len(),
            });
        }
        let max = students.len().max(1);
        for (b, &q) in quota.iter().enumerate() {
            if q == 0 || q > max {
                return Err(InstanceError::BadQuota { school: schools[b].clone(), quota: q, max });
            }
        }
        if student_pref.len() != students.len() {
            return Err(InstanceError::PreferenceCount {
                side: "students",
                expected: students.len(),
                found: student_pref.len(),
            });
        }
        if school_pref.len() != schools.len() {
            return Err(InstanceError::PreferenceCount {
                side: "schools",
                expected: schools.len(),
                found: school_pref.len(),
            });
        }
        let mut student_pos = Vec::with_capacity(students.len());
        for (a, list) in student_pref.iter().enumerate() {
            let pos = positions(list, schools.len())
                .ok_or_else(|| InstanceError::BadPreference { side: "student", id: students[a].clone() })?;
            student_pos.push(pos);
        }
        let mut school_pos = Vec::with_capacity(schools.len());
        for (b, list) in school_pref.iter().enumerate() {
            let pos = positions(list, students.len())
                .ok_or_else(|| InstanceError::BadPreference { side: "school", id: schools[b].clone() })?;
            school_pos.push(pos);
        }
        Ok(Instance { students, schools, quota, student_pref, school_pref, student_pos, school_pos })
    }

    /// Places markets side by side. Agents of part `i` keep their names with
    /// `.i` appended and list every agent of the other parts after the
    /// outside option, so parts never match across.
    pub fn juxtapose(parts: &[&Instance]) -> Result<Instance, InstanceError> {
        let mut sa = vec![0];
        let mut sb = vec![0];
        for p in parts {
            sa.push(sa.last().unwrap() + p.num_students());
            sb.push(sb.last().unwrap() + p.num_schools());
        }
        let (na, nb) = (*sa.last().unwrap(), *sb.last().unwrap());
        let widen = |list: &[Partner], lo: usize, hi: usize, n: usize| -> Vec<Partner> {
            let mut out: Vec<Partner> = list.iter().map(|p| p.map(|x| x + lo)).collect();
            out.extend((0..lo).chain(hi..n).map(Some));
            out
        };
        let (mut students, mut schools, mut quota, mut sp, mut bp) = (vec![], vec![], vec![], vec![], vec![]);
        for (i, p) in parts.iter().enumerate() {
            students.extend(p.students.iter().map(|n| format!("{n}.{i}")));
            schools.extend(p.schools.iter().map(|n| format!("{n}.{i}")));
            quota.extend(p.quota.iter().copied());
            sp.extend(p.student_pref.iter().map(|l| widen(l, sb[i], sb[i + 1], nb)));
            bp.extend(p.school_pref.iter().map(|l| widen(l, sa[i], sa[i + 1], na)));
        }
        Instance::new(students, schools, quota, sp, bp)
    }

    pub fn num_students(&self) -> usize {
        self.students.len()
    }

    pub fn num_schools(&self) -> usize {
        self.schools.len()
    }

    pub fn student_name(&self, a: usize) -> &str {
        &self.students[a]
    }

    pub fn school_name(&self, b: usize) -> &str {
        &self.schools[b]
    }

    pub fn students(&self) -> &[String] {
        &self.students
    }

    pub fn schools(&self) -> &[String] {
        &self.schools
    }

    pub fn student_index(&self, id: &str) -> Option<usize> {
        self.students.iter().position(|s| s == id)
    }

    pub fn school_index(&self, id: &str) -> Option<usize> {
        self.schools.iter().position(|s| s == id)
    }

    pub fn quota(&self, b: usize) -> usize {
        self.quota[b]
    }

    pub fn quotas(&self) -> &[usize] {
        &self.quota
    }

    pub fn student_pref(&self, a: usize) -> &[Partner] {
        &self.student_pref[a]
    }

    pub fn school_pref(&self, b: usize) -> &[Partner] {
        &self.school_pref[b]
    }

    /// 0-based position of `p` in student `a`'s list.
    #[inline]
    pub fn student_pos(&self, a: usize, p: Partner) -> usize {
        self.student_pos[a][p.unwrap_or(self.schools.len())]
    }

    /// 0-based position of `p` in school `b`'s list.
    #[inline]
    pub fn school_pos(&self, b: usize, p: Partner) -> usize {
        self.school_pos[b][p.unwrap_or(self.students.len())]
    }

    /// True if student `a` strictly prefers `x` to `y`.
    #[inline]
    pub fn student_prefers(&self, a: usize, x: Partner, y: Partner) -> bool {
        self.student_pos(a, x) < self.student_pos(a, y)
    }

    /// True if school `b` strictly prefers `x` to `y`.
    #[inline]
    pub fn school_prefers(&self, b: usize, x: Partner, y: Partner) -> bool {
        self.school_pos(b, x) < self.school_pos(b, y)
    }

    /// Both sides rank each other above the outside option.
    #[inline]
    pub fn acceptable(&self, a: usize, b: usize) -> bool {
        self.student_prefers(a, Some(b), OUTSIDE) && self.school_prefers(b, Some(a), OUTSIDE)
    }

    /// Schools that student `a` ranks above the outside option, best first.
    pub fn acceptable_schools(&self, a: usize) -> impl Iterator<Item = usize> + '_ {
        self.student_pref[a].iter().map_while(|p| *p)
    }

    /// Students that school `b` ranks above the outside option, best first.
    pub fn acceptable_students(&self, b: usize) -> impl Iterator<Item = usize> + '_ {
        self.school_pref[b].iter().map_while(|p| *p)
    }
}

/// 1-based ranks over each student's full option list (schools plus outside).
#[derive(Debug, Clone)]
pub struct RankTable {
    rank: Vec<Vec<usize>>,
    outside_slot: usize,
}

impl RankTable {
    pub fn new(inst: &Instance) -> Self {
        let rank = (0..inst.num_students())
            .map(|a| {
                let mut r = vec![0; inst.num_schools() + 1];
                for (i, p) in inst.student_pref(a).iter().enumerate() {
                    r[p.unwrap_or(inst.num_schools())] = i + 1;
                }
                r
            })
            .collect();
        RankTable { rank, outside_slot: inst.num_schools() }
    }

    pub fn rank(&self, a: usize, p: Partner) -> usize {
        self.rank[a][p.unwrap_or(self.outside_slot)]
    }
}
