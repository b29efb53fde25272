//! Dummy agents that separate siblings sharing a school in the extreme
//! stable matchings, with maps between the old and new stable matchings.

use matching_core::{deferred_acceptance, Instance, Matching, Partner, Side};

use crate::instance::SiblingInstance;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Kind {
    /// A student only `school` accepts, ranked last among its acceptable
    /// students. It occupies one free seat in every stable matching.
    Filler,
    /// Pair shared `school` in the student-optimal matching; `student` is
    /// the first sibling.
    Top,
    /// Pair shared `school` in the student-pessimal matching; `student` is
    /// the sibling `school` likes least.
    Bottom,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct Step {
    kind: Kind,
    student: usize,
    school: usize,
    dummy_student: usize,
    /// Unused for fillers.
    dummy_school: usize,
}

/// A sibling instance whose pairs are apart in the student-optimal stable
/// matching, plus the steps that produced it.
#[derive(Debug, Clone)]
pub struct Normalized {
    pub original: SiblingInstance,
    pub instance: SiblingInstance,
    steps: Vec<Step>,
}

fn shares(m: &Matching, a: usize, b: usize) -> Option<usize> {
    match m.partner(a) {
        Some(s) if m.partner(b) == Some(s) => Some(s),
        _ => None,
    }
}

fn insert_at(list: &mut Vec<Partner>, anchor: Partner, item: Partner, after: bool) {
    let i = list.iter().position(|&p| p == anchor).expect("anchor is in the list");
    list.insert(if after { i + 1 } else { i }, item);
}

/// Full list led by `head`, then the rest of the other side in index order.
fn led_by(head: &[Partner], others: usize) -> Vec<Partner> {
    let mut l = head.to_vec();
    l.extend((0..others).map(Some).filter(|p| !head.contains(p)));
    l
}

struct Builder {
    inst: Instance,
    steps: Vec<Step>,
    students: usize,
    schools: usize,
}

impl Builder {
    fn filler(&mut self, b: usize) {
        let inst = &self.inst;
        let (n, m) = (inst.num_students(), inst.num_schools());
        let f = Some(n);
        let mut sp: Vec<Vec<Partner>> = (0..n).map(|x| inst.student_pref(x).to_vec()).collect();
        sp.push(led_by(&[Some(b), None], m));
        let mut bp = Vec::with_capacity(m);
        for y in 0..m {
            let mut l = inst.school_pref(y).to_vec();
            if y == b {
                insert_at(&mut l, None, f, false);
            } else {
                l.push(f);
            }
            bp.push(l);
        }
        self.students += 1;
        let mut students = inst.students().to_vec();
        students.push(format!("_d{}", self.students));
        self.inst = Instance::new(students, inst.schools().to_vec(), inst.quotas().to_vec(), sp, bp)
            .expect("a filler keeps the instance valid");
        self.steps.push(Step { kind: Kind::Filler, student: n, school: b, dummy_student: n, dummy_school: m });
    }

    /// Adds a dummy student and a dummy school moving `a` away from `b`.
    /// `worst` is the least preferred student of `b` for the top variant.
    fn pair(&mut self, kind: Kind, a: usize, b: usize, worst: Option<usize>) {
        let inst = &self.inst;
        let (n, m) = (inst.num_students(), inst.num_schools());
        let (d, s) = (Some(n), Some(m));
        let mut sp: Vec<Vec<Partner>> = Vec::with_capacity(n + 1);
        for x in 0..n {
            let mut l = inst.student_pref(x).to_vec();
            match (x == a, kind) {
                (true, Kind::Top) => insert_at(&mut l, Some(b), s, false),
                (true, _) => insert_at(&mut l, Some(b), s, true),
                _ => l.push(s),
            }
            sp.push(l);
        }
        let mut bp: Vec<Vec<Partner>> = Vec::with_capacity(m + 1);
        for y in 0..m {
            let mut l = inst.school_pref(y).to_vec();
            match (y == b, kind) {
                (true, Kind::Top) => insert_at(&mut l, worst, d, true),
                (true, _) => insert_at(&mut l, Some(a), d, false),
                _ => l.push(d),
            }
            bp.push(l);
        }
        if kind == Kind::Top {
            sp.push(led_by(&[Some(b), s, None], m + 1));
            bp.push(led_by(&[d, Some(a), None], n + 1));
        } else {
            sp.push(led_by(&[s, Some(b), None], m + 1));
            bp.push(led_by(&[Some(a), d, None], n + 1));
        }
        self.students += 1;
        self.schools += 1;
        let mut students = inst.students().to_vec();
        students.push(format!("_d{}", self.students));
        let mut schools = inst.schools().to_vec();
        schools.push(format!("_s{}", self.schools));
        let mut quota = inst.quotas().to_vec();
        quota.push(1);
        self.inst = Instance::new(students, schools, quota, sp, bp).expect("dummies keep the instance valid");
        self.steps.push(Step { kind, student: a, school: b, dummy_student: n, dummy_school: m });
    }

    fn worst(&self, m: &Matching, b: usize) -> Option<usize> {
        m.roster(b).into_iter().max_by_key(|&x| self.inst.school_pos(b, Some(x)))
    }
}

/// Adds dummy agents, pair by pair, so that no pair shares a school in the
/// student-optimal stable matching, nor in the student-pessimal one when the
/// shared school is full there and likes one of the siblings least. Stable
/// matchings, and with them the best number of co-located pairs, carry over.
pub fn normalize_msss(si: &SiblingInstance) -> Normalized {
    let mut bld = Builder { inst: si.base.clone(), steps: Vec::new(), students: 0, schools: 0 };
    for &(a, abar) in &si.pairs {
        let m0 = deferred_acceptance(&bld.inst, Side::Students);
        if let Some(b) = shares(&m0, a, abar) {
            // Free seats would let the dummy in next to the sibling.
            for _ in m0.roster(b).len()..bld.inst.quota(b) {
                bld.filler(b);
            }
            let m0 = deferred_acceptance(&bld.inst, Side::Students);
            let worst = bld.worst(&m0, b);
            bld.pair(Kind::Top, a, b, worst);
        }
        let mz = deferred_acceptance(&bld.inst, Side::Schools);
        if let Some(b) = shares(&mz, a, abar) {
            // Moving a sibling out of `b` keeps the matching stable only when
            // `b` is full and likes that sibling least.
            let full = mz.roster(b).len() == bld.inst.quota(b);
            if let Some(mover) = bld.worst(&mz, b).filter(|&w| full && (w == a || w == abar)) {
                bld.pair(Kind::Bottom, mover, b, None);
            }
        }
    }
    let instance = SiblingInstance { base: bld.inst, pairs: si.pairs.clone() };
    Normalized { original: si.clone(), instance, steps: bld.steps }
}

impl Normalized {
    pub fn is_identity(&self) -> bool {
        self.steps.is_empty()
    }

    /// Number of dummy students.
    pub fn dummies(&self) -> usize {
        self.steps.len()
    }

    /// Stable matching of the original instance to one of the new instance:
    /// fillers take their school, other dummy students their dummy school.
    pub fn forward(&self, m: &Matching) -> Matching {
        let mut assign = m.assignment().to_vec();
        assign.extend(self.steps.iter().map(|s| match s.kind {
            Kind::Filler => Some(s.school),
            _ => Some(s.dummy_school),
        }));
        Matching::new(assign)
    }

    /// Stable matching of the new instance back to the original one. Every
    /// pair sharing a school before still shares it after.
    pub fn backward(&self, m: &Matching) -> Matching {
        let mut assign = m.assignment().to_vec();
        for step in self.steps.iter().rev() {
            let d = assign.pop().expect("dummy student present");
            debug_assert_eq!(assign.len(), step.dummy_student);
            if step.kind == Kind::Filler {
                debug_assert_eq!(d, Some(step.school));
            } else if d != Some(step.dummy_school) {
                debug_assert_eq!(d, Some(step.school));
                debug_assert_eq!(assign[step.student], Some(step.dummy_school));
                assign[step.student] = Some(step.school);
            }
        }
        Matching::new(assign)
    }
}
