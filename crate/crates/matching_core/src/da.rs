use crate::instance::{Instance, OUTSIDE};
use crate::matching::Matching;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Students,
    Schools,
}

/// Deferred acceptance. Student-proposing yields the student-optimal
/// matching, school-proposing the student-pessimal one.
pub fn deferred_acceptance(inst: &Instance, proposing: Side) -> Matching {
    match proposing {
        Side::Students => student_proposing(inst),
        Side::Schools => school_proposing(inst),
    }
}

fn student_proposing(inst: &Instance) -> Matching {
    let n = inst.num_students();
    let mut next = vec![0usize; n];
    let mut held: Vec<Vec<usize>> = vec![Vec::new(); inst.num_schools()];
    let mut assign = vec![OUTSIDE; n];
    let mut free: Vec<usize> = (0..n).collect();
    while !free.is_empty() {
        let mut rejected = Vec::new();
        for a in free.drain(..) {
            let choice = inst.student_pref(a)[next[a]];
            let Some(b) = choice else { continue };
            next[a] += 1;
            if !inst.school_prefers(b, Some(a), OUTSIDE) {
                rejected.push(a);
                continue;
            }
            held[b].push(a);
            assign[a] = Some(b);
            if held[b].len() > inst.quota(b) {
                let (i, &worst) = held[b].iter().enumerate().max_by_key(|(_, &x)| inst.school_pos(b, Some(x))).unwrap();
                held[b].swap_remove(i);
                assign[worst] = OUTSIDE;
                rejected.push(worst);
            }
        }
        rejected.sort_unstable();
        free = rejected;
    }
    Matching::new(assign)
}

fn school_proposing(inst: &Instance) -> Matching {
    let m = inst.num_schools();
    let mut next = vec![0usize; m];
    let mut seats = inst.quotas().to_vec();
    let mut assign = vec![OUTSIDE; inst.num_students()];
    loop {
        let mut progressed = false;
        for b in 0..m {
            while seats[b] > 0 {
                let Some(a) = inst.school_pref(b)[next[b]] else { break };
                next[b] += 1;
                progressed = true;
                if !inst.student_prefers(a, Some(b), assign[a]) {
                    continue;
                }
                if let Some(old) = assign[a] {
                    seats[old] += 1;
                }
                assign[a] = Some(b);
                seats[b] -= 1;
            }
        }
        if !progressed {
            break;
        }
    }
    Matching::new(assign)
}
