//! Disjoint union of the first-stage market and the scenario markets.
//!
//! The union's rotation order is assembled from the order of each part, so
//! its cost grows linearly with the number of parts. Part 0 is the first
//! stage and part `k` is scenario `k`.

use matching_core::{is_stable, Instance, Matching, Partner};
use rotation_lattice::{rotation_order, RotationOrder};

use crate::market::{Scenario, TwoStageInstance};
use crate::TwoStageError;

#[derive(Debug, Clone)]
pub struct UnionInstance {
    pub parts: Vec<Instance>,
    pub orders: Vec<RotationOrder>,
    /// Order of the union, ids concatenated part by part.
    pub order: RotationOrder,
    student_start: Vec<usize>,
    school_start: Vec<usize>,
    rotation_start: Vec<usize>,
}

fn starts(sizes: impl Iterator<Item = usize>) -> Vec<usize> {
    let mut out = vec![0];
    for s in sizes {
        out.push(out.last().unwrap() + s);
    }
    out
}

impl UnionInstance {
    pub fn new(parts: Vec<Instance>) -> Self {
        let orders: Vec<RotationOrder> = parts.iter().map(rotation_order).collect();
        UnionInstance::from_orders(parts, orders)
    }

    /// Union of parts whose orders are already known.
    pub fn from_orders(parts: Vec<Instance>, orders: Vec<RotationOrder>) -> Self {
        let student_start = starts(parts.iter().map(Instance::num_students));
        let school_start = starts(parts.iter().map(Instance::num_schools));
        let rotation_start = starts(orders.iter().map(RotationOrder::len));
        let spec: Vec<(&RotationOrder, (usize, usize))> =
            orders.iter().enumerate().map(|(l, o)| (o, (student_start[l], school_start[l]))).collect();
        let order = RotationOrder::disjoint_union(&spec);
        UnionInstance { parts, orders, order, student_start, school_start, rotation_start }
    }

    pub fn num_parts(&self) -> usize {
        self.parts.len()
    }

    pub fn num_students(&self) -> usize {
        *self.student_start.last().unwrap()
    }

    pub fn num_schools(&self) -> usize {
        *self.school_start.last().unwrap()
    }

    /// Union id of local student `a` of part `l`.
    pub fn student(&self, l: usize, a: usize) -> usize {
        self.student_start[l] + a
    }

    pub fn school(&self, l: usize, b: usize) -> usize {
        self.school_start[l] + b
    }

    /// Union id of local rotation `r` of part `l`.
    pub fn rotation(&self, l: usize, r: usize) -> usize {
        self.rotation_start[l] + r
    }

    /// Part and local id of a union student.
    pub fn student_tag(&self, u: usize) -> (usize, usize) {
        let l = self.student_start.partition_point(|&s| s <= u) - 1;
        (l, u - self.student_start[l])
    }

    pub fn school_tag(&self, u: usize) -> (usize, usize) {
        let l = self.school_start.partition_point(|&s| s <= u) - 1;
        (l, u - self.school_start[l])
    }

    pub fn rotation_tag(&self, u: usize) -> (usize, usize) {
        let l = self.rotation_start.partition_point(|&s| s <= u) - 1;
        (l, u - self.rotation_start[l])
    }

    pub fn rotations_of(&self, l: usize) -> std::ops::Range<usize> {
        self.rotation_start[l]..self.rotation_start[l + 1]
    }

    /// The union as one market. Agents of part `l` carry the suffix `.l`.
    pub fn instance(&self) -> Result<Instance, TwoStageError> {
        Ok(Instance::juxtapose(&self.parts.iter().collect::<Vec<_>>())?)
    }

    /// Restriction of a union matching to part `l`, checked for stability.
    pub fn project(&self, m: &Matching, l: usize) -> Result<Matching, TwoStageError> {
        if m.len() != self.num_students() {
            return Err(TwoStageError::WrongSize);
        }
        let (lo, hi) = (self.student_start[l], self.student_start[l + 1]);
        let (blo, bhi) = (self.school_start[l], self.school_start[l + 1]);
        let mut out = Vec::with_capacity(hi - lo);
        for p in &m.assignment()[lo..hi] {
            out.push(match *p {
                None => None,
                Some(b) if (blo..bhi).contains(&b) => Some(b - blo),
                Some(_) => return Err(TwoStageError::NotStable(l)),
            });
        }
        let out = Matching::new(out);
        self.check(l, &out)?;
        Ok(out)
    }

    /// Union matching from one stable matching per part.
    pub fn lift(&self, ms: &[Matching]) -> Result<Matching, TwoStageError> {
        if ms.len() != self.num_parts() {
            return Err(TwoStageError::WrongSize);
        }
        let mut out: Vec<Partner> = Vec::with_capacity(self.num_students());
        for (l, m) in ms.iter().enumerate() {
            self.check(l, m)?;
            out.extend(m.assignment().iter().map(|p| p.map(|b| b + self.school_start[l])));
        }
        Ok(Matching::new(out))
    }

    fn check(&self, l: usize, m: &Matching) -> Result<(), TwoStageError> {
        match is_stable(&self.parts[l], m) {
            Ok(s) if s.is_stable() => Ok(()),
            _ => Err(TwoStageError::NotStable(l)),
        }
    }
}

/// Union of the first stage and the given scenarios.
pub fn disjoint_union(ts: &TwoStageInstance, scenarios: &[Scenario]) -> UnionInstance {
    let mut parts = vec![ts.first.inst.clone()];
    parts.extend(scenarios.iter().map(|s| s.market.inst.clone()));
    UnionInstance::new(parts)
}

/// For every student of every part, its stable partners from best to worst
/// and the union rotations that move it along that chain.
#[derive(Debug, Clone)]
pub struct PsiMap {
    /// `chains[l][a] = [b_0, b_1, ...]` in local ids of part `l`.
    chains: Vec<Vec<Vec<Partner>>>,
    /// `movers[l][a][j - 1]` moves `a` from `b_{j-1}` to `b_j`.
    movers: Vec<Vec<Vec<usize>>>,
    /// Per union rotation, the moved students as `(local student, j)`.
    steps: Vec<Vec<(usize, usize)>>,
}

impl PsiMap {
    pub fn new(u: &UnionInstance) -> Self {
        let mut chains = Vec::with_capacity(u.num_parts());
        let mut movers = Vec::with_capacity(u.num_parts());
        let mut steps = vec![Vec::new(); u.order.len()];
        for (l, order) in u.orders.iter().enumerate() {
            let mut chain: Vec<Vec<Partner>> = order.m0.assignment().iter().map(|&p| vec![p]).collect();
            let mut mover: Vec<Vec<usize>> = vec![Vec::new(); chain.len()];
            for (r, rho) in order.rotations.iter().enumerate() {
                let id = u.rotation(l, r);
                for &(a, b) in &rho.minus {
                    chain[a].push(Some(b));
                    mover[a].push(id);
                    steps[id].push((a, chain[a].len() - 1));
                }
            }
            chains.push(chain);
            movers.push(mover);
        }
        PsiMap { chains, movers, steps }
    }

    /// `[b_0, b_1, ...]` for local student `a` of part `l`.
    pub fn chain(&self, l: usize, a: usize) -> &[Partner] {
        &self.chains[l][a]
    }

    /// Union rotations moving local student `a` of part `l`, in chain order.
    pub fn movers(&self, l: usize, a: usize) -> &[usize] {
        &self.movers[l][a]
    }

    /// Students moved by a union rotation with their chain step.
    pub fn steps(&self, r: usize) -> &[(usize, usize)] {
        &self.steps[r]
    }
}
