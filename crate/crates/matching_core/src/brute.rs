//! Exhaustive enumeration of stable matchings, used as a test oracle.

use thiserror::Error;

use crate::instance::{Instance, Partner, OUTSIDE};
use crate::matching::{is_stable, rank_sum, Matching};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("more than {limit} stable matchings")]
pub struct LimitExceeded {
    pub limit: usize,
}

/// All stable matchings, ordered so that a matching precedes every matching it dominates.
pub fn enumerate_stable_bruteforce(inst: &Instance, limit: usize) -> Result<Vec<Matching>, LimitExceeded> {
    let mut search = Search {
        inst,
        assign: vec![OUTSIDE; inst.num_students()],
        rosters: vec![Vec::new(); inst.num_schools()],
        out: Vec::new(),
        limit,
    };
    search.go(0)?;
    let mut out = search.out;
    out.sort_by_cached_key(|m| (rank_sum(inst, m), m.clone()));
    out.dedup();
    Ok(out)
}

struct Search<'a> {
    inst: &'a Instance,
    assign: Vec<Partner>,
    rosters: Vec<Vec<usize>>,
    out: Vec<Matching>,
    limit: usize,
}

impl Search<'_> {
    /// A full school's roster is final. Any student already placed whom the
    /// school prefers to its worst holder, and who prefers the school back,
    /// blocks every completion.
    fn full_school_blocks(&self, b: usize, placed: usize) -> bool {
        let inst = self.inst;
        let worst = self.rosters[b].iter().map(|&x| inst.school_pos(b, Some(x))).max().unwrap();
        (0..placed).any(|a| inst.school_pos(b, Some(a)) < worst && inst.student_prefers(a, Some(b), self.assign[a]))
    }

    /// Student `a` was just placed: does it block with some already full school?
    fn new_student_blocks(&self, a: usize) -> bool {
        let inst = self.inst;
        for &p in inst.student_pref(a) {
            if p == self.assign[a] || p == OUTSIDE {
                return false;
            }
            let b = p.unwrap();
            if self.rosters[b].len() == inst.quota(b)
                && self.rosters[b].iter().any(|&x| inst.school_prefers(b, Some(a), Some(x)))
            {
                return true;
            }
        }
        false
    }

    fn go(&mut self, a: usize) -> Result<(), LimitExceeded> {
        let inst = self.inst;
        if a == inst.num_students() {
            let m = Matching::new(self.assign.clone());
            if is_stable(inst, &m).map(|s| s.is_stable()).unwrap_or(false) {
                if self.out.len() >= self.limit {
                    return Err(LimitExceeded { limit: self.limit });
                }
                self.out.push(m);
            }
            return Ok(());
        }
        let mut options: Vec<Partner> =
            inst.acceptable_schools(a).filter(|&b| inst.acceptable(a, b)).map(Some).collect();
        options.push(OUTSIDE);
        for p in options {
            if let Some(b) = p {
                if self.rosters[b].len() == inst.quota(b) {
                    continue;
                }
            }
            self.assign[a] = p;
            if let Some(b) = p {
                self.rosters[b].push(a);
            }
            let pruned = self.new_student_blocks(a)
                || p.is_some_and(|b| self.rosters[b].len() == inst.quota(b) && self.full_school_blocks(b, a + 1));
            if !pruned {
                self.go(a + 1)?;
            }
            if let Some(b) = p {
                self.rosters[b].pop();
            }
            self.assign[a] = OUTSIDE;
        }
        Ok(())
    }
}
