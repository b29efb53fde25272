//! The complete rotation set and the precedence order between rotations.

use std::collections::HashMap;

use fixedbitset::FixedBitSet;
use matching_core::{deferred_acceptance, Instance, Matching, Partner, Side};

use crate::rotation::{Exposer, Rotation};

/// Which exposed rotation a greedy elimination picks first.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Greedy {
    Ascending,
    Descending,
}

/// Rotations with ids in extraction order, plus the precedence relation.
///
/// `geq(i, j)` means rotation `i` must be eliminated before `j` can be (or
/// `i == j`). Ids form a linear extension: `geq(i, j)` implies `i <= j`.
#[derive(Debug, Clone)]
pub struct RotationOrder {
    pub rotations: Vec<Rotation>,
    pub m0: Matching,
    pub mz: Matching,
    down: Vec<FixedBitSet>,
    up: Vec<FixedBitSet>,
    hasse: Vec<(usize, usize)>,
}

impl RotationOrder {
    pub fn len(&self) -> usize {
        self.rotations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rotations.is_empty()
    }

    pub fn geq(&self, i: usize, j: usize) -> bool {
        self.down[i].contains(j)
    }

    /// Strict precedence.
    pub fn gt(&self, i: usize, j: usize) -> bool {
        i != j && self.geq(i, j)
    }

    pub fn comparable(&self, i: usize, j: usize) -> bool {
        self.geq(i, j) || self.geq(j, i)
    }

    /// `{j : i ⊵ j}`, including `i`.
    pub fn down_set(&self, i: usize) -> &FixedBitSet {
        &self.down[i]
    }

    /// `{j : j ⊵ i}`, including `i`.
    pub fn up_set(&self, i: usize) -> &FixedBitSet {
        &self.up[i]
    }

    /// Cover pairs `(i, j)`: `i` strictly precedes `j` with nothing in between.
    pub fn hasse(&self) -> &[(usize, usize)] {
        &self.hasse
    }

    pub fn id_of(&self, rho: &Rotation) -> Option<usize> {
        self.rotations.iter().position(|r| r == rho)
    }

    /// Order of a union of independent instances, assembled from the order of
    /// each part. Part `i` has its students shifted by `offsets[i].0` and its
    /// schools by `offsets[i].1`; rotation ids are concatenated in part order.
    /// No rotation of one part is comparable with a rotation of another.
    pub fn disjoint_union(parts: &[(&RotationOrder, (usize, usize))]) -> RotationOrder {
        let k: usize = parts.iter().map(|(o, _)| o.len()).sum();
        let shift =
            |m: &Matching, sb: usize| -> Vec<Partner> { m.assignment().iter().map(|p| p.map(|b| b + sb)).collect() };
        let (mut m0, mut mz) = (Vec::new(), Vec::new());
        let (mut rotations, mut down, mut up, mut hasse) = (Vec::with_capacity(k), Vec::new(), Vec::new(), Vec::new());
        let mut base = 0;
        for &(o, (sa, sb)) in parts {
            m0.extend(shift(&o.m0, sb));
            mz.extend(shift(&o.mz, sb));
            let lift = |v: &[(usize, usize)]| v.iter().map(|&(a, b)| (a + sa, b + sb)).collect();
            rotations.extend(o.rotations.iter().map(|r| Rotation { plus: lift(&r.plus), minus: lift(&r.minus) }));
            let widen = |s: &FixedBitSet| {
                let mut t = FixedBitSet::with_capacity(k);
                t.extend(s.ones().map(|j| j + base));
                t
            };
            down.extend(o.down.iter().map(widen));
            up.extend(o.up.iter().map(widen));
            hasse.extend(o.hasse.iter().map(|&(i, j)| (i + base, j + base)));
            base += o.len();
        }
        RotationOrder { rotations, m0: Matching::new(m0), mz: Matching::new(mz), down, up, hasse }
    }
}

fn chain(inst: &Instance, exposer: &Exposer, pick: Greedy) -> (Matching, Matching, Vec<Rotation>) {
    let m0 = deferred_acceptance(inst, Side::Students);
    let mut m = m0.clone();
    let mut out = Vec::new();
    loop {
        let mut exposed = exposer.exposed(inst, &m);
        let rho = match pick {
            Greedy::Ascending if !exposed.is_empty() => exposed.swap_remove(0),
            Greedy::Descending => match exposed.pop() {
                Some(r) => r,
                None => break,
            },
            _ => break,
        };
        m = rho.apply(&m);
        out.push(rho);
    }
    (m0, m, out)
}

/// Every rotation, extracted along one elimination chain from the
/// student-optimal to the student-pessimal matching.
pub fn all_rotations(inst: &Instance) -> Vec<Rotation> {
    all_rotations_with(inst, Greedy::Ascending)
}

pub fn all_rotations_with(inst: &Instance, pick: Greedy) -> Vec<Rotation> {
    chain(inst, &Exposer::new(inst), pick).2
}

pub fn rotation_order(inst: &Instance) -> RotationOrder {
    rotation_order_with(inst, Greedy::Ascending)
}

/// Builds the order by the forbidden-rotation greedy: eliminating everything
/// except rotation `i` until nothing else is exposed leaves exactly the
/// rotations that `i` precedes. `greedy` only changes which exposed rotation
/// goes first; the fixpoint does not depend on it.
pub fn rotation_order_with(inst: &Instance, greedy: Greedy) -> RotationOrder {
    let exposer = Exposer::new(inst);
    let (m0, mz, rotations) = chain(inst, &exposer, Greedy::Ascending);
    let k = rotations.len();
    let ids: HashMap<&Rotation, usize> = rotations.iter().enumerate().map(|(i, r)| (r, i)).collect();

    let mut down = Vec::with_capacity(k);
    for forbidden in 0..k {
        let mut left = FixedBitSet::with_capacity(k);
        left.insert_range(..);
        let mut m = m0.clone();
        loop {
            let mut exposed: Vec<usize> =
                exposer.exposed(inst, &m).iter().map(|r| ids[r]).filter(|&i| i != forbidden).collect();
            exposed.sort_unstable();
            let pick = match greedy {
                Greedy::Ascending => exposed.first(),
                Greedy::Descending => exposed.last(),
            };
            let Some(&i) = pick else { break };
            m = rotations[i].apply(&m);
            left.set(i, false);
        }
        down.push(left);
    }

    let mut up = vec![FixedBitSet::with_capacity(k); k];
    for (i, d) in down.iter().enumerate() {
        for j in d.ones() {
            up[j].insert(i);
        }
    }
    let mut hasse = Vec::new();
    for i in 0..k {
        for j in down[i].ones().filter(|&j| j != i) {
            let between = down[i].ones().any(|x| x != i && x != j && down[x].contains(j));
            if !between {
                hasse.push((i, j));
            }
        }
    }
    RotationOrder { rotations, m0, mz, down, up, hasse }
}
