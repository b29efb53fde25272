//! Meta-rotations: classes of rotations always eliminated together across a
//! sublattice, and the order between the proper classes.

use fixedbitset::FixedBitSet;
use rotation_lattice::{RotationOrder, UpSet};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Class {
    /// Eliminated in every member.
    Zero,
    /// Eliminated in no member.
    Z,
    Proper(usize),
}

/// Partition of the rotations plus the order over proper classes.
///
/// Proper classes are indexed along a linear extension: `geq(i, j)` implies
/// `i <= j`. Each class lists its rotations in increasing id order, so the
/// representative is the first entry.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MetaRotations {
    pub num_rotations: usize,
    pub theta0: Vec<usize>,
    pub thetaz: Vec<usize>,
    pub proper: Vec<Vec<usize>>,
    pub class_of: Vec<Class>,
    down: Vec<FixedBitSet>,
    up: Vec<FixedBitSet>,
    hasse: Vec<(usize, usize)>,
}

fn covers(down: &[FixedBitSet]) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    for (i, d) in down.iter().enumerate() {
        for j in d.ones().filter(|&j| j != i) {
            if !d.ones().any(|x| x != i && x != j && down[x].contains(j)) {
                out.push((i, j));
            }
        }
    }
    out
}

impl MetaRotations {
    /// Every rotation is its own proper class, ordered as the rotations are.
    pub fn all(order: &RotationOrder) -> Self {
        let k = order.len();
        let down: Vec<FixedBitSet> = (0..k).map(|i| order.down_set(i).clone()).collect();
        let up: Vec<FixedBitSet> = (0..k).map(|i| order.up_set(i).clone()).collect();
        MetaRotations {
            num_rotations: k,
            theta0: Vec::new(),
            thetaz: Vec::new(),
            proper: (0..k).map(|i| vec![i]).collect(),
            class_of: (0..k).map(Class::Proper).collect(),
            down,
            up,
            hasse: order.hasse().to_vec(),
        }
    }

    /// Classes of a non-empty sublattice given by its upsets.
    pub fn from_members(num_rotations: usize, members: &[UpSet]) -> Self {
        let k = num_rotations;
        let n = members.len();
        let mut rows: Vec<FixedBitSet> = vec![FixedBitSet::with_capacity(n); k];
        for (m, u) in members.iter().enumerate() {
            for r in u.ids() {
                rows[r].insert(m);
            }
        }
        let mut theta0 = Vec::new();
        let mut thetaz = Vec::new();
        let mut groups: Vec<(FixedBitSet, Vec<usize>)> = Vec::new();
        for (r, row) in rows.iter().enumerate() {
            let count = row.count_ones(..);
            if count == n {
                theta0.push(r);
            } else if count == 0 {
                thetaz.push(r);
            } else if let Some(g) = groups.iter_mut().find(|g| &g.0 == row) {
                g.1.push(r);
            } else {
                groups.push((row.clone(), vec![r]));
            }
        }
        // i ⊵ j iff every member containing j contains i.
        let p = groups.len();
        let geq = |i: usize, j: usize| groups[j].0.is_subset(&groups[i].0);
        let mut rank: Vec<(usize, usize, usize)> =
            (0..p).map(|i| ((0..p).filter(|&x| geq(x, i)).count(), groups[i].1[0], i)).collect();
        rank.sort_unstable();
        let perm: Vec<usize> = rank.iter().map(|t| t.2).collect();
        let mut down = vec![FixedBitSet::with_capacity(p); p];
        let mut up = vec![FixedBitSet::with_capacity(p); p];
        for (a, &i) in perm.iter().enumerate() {
            for (b, &j) in perm.iter().enumerate() {
                if geq(i, j) {
                    down[a].insert(b);
                    up[b].insert(a);
                }
            }
        }
        let proper: Vec<Vec<usize>> = perm.iter().map(|&i| groups[i].1.clone()).collect();
        let mut class_of = vec![Class::Zero; k];
        for &r in &thetaz {
            class_of[r] = Class::Z;
        }
        for (c, rs) in proper.iter().enumerate() {
            for &r in rs {
                class_of[r] = Class::Proper(c);
            }
        }
        let hasse = covers(&down);
        MetaRotations { num_rotations: k, theta0, thetaz, proper, class_of, down, up, hasse }
    }

    pub fn len(&self) -> usize {
        self.proper.len()
    }

    pub fn is_empty(&self) -> bool {
        self.proper.is_empty()
    }

    pub fn rep(&self, i: usize) -> usize {
        self.proper[i][0]
    }

    pub fn geq(&self, i: usize, j: usize) -> bool {
        self.down[i].contains(j)
    }

    pub fn comparable(&self, i: usize, j: usize) -> bool {
        self.geq(i, j) || self.geq(j, i)
    }

    /// Classes `j` with `j ⊵ i`, including `i`.
    pub fn up_set(&self, i: usize) -> &FixedBitSet {
        &self.up[i]
    }

    /// Cover pairs `(i, j)` of the proper order: `i` strictly above `j`.
    pub fn hasse(&self) -> &[(usize, usize)] {
        &self.hasse
    }

    /// θ₀ alone: the upset of the best member of the family.
    pub fn base_upset(&self) -> UpSet {
        UpSet::from_ids(self.num_rotations, self.theta0.iter().copied())
    }

    /// θ₀ plus the rotations of the given proper classes.
    pub fn upset_of_classes(&self, classes: &FixedBitSet) -> UpSet {
        let mut u = self.base_upset();
        for c in classes.ones() {
            for &r in &self.proper[c] {
                u.insert(r);
            }
        }
        u
    }

    /// Proper classes inside `r`, if `r` is a union of θ₀ and whole proper
    /// classes avoiding θ_z.
    pub fn classes_in(&self, r: &UpSet) -> Option<FixedBitSet> {
        if !self.theta0.iter().all(|&x| r.contains(x)) || self.thetaz.iter().any(|&x| r.contains(x)) {
            return None;
        }
        let mut out = FixedBitSet::with_capacity(self.len());
        for (c, rs) in self.proper.iter().enumerate() {
            let inside = rs.iter().filter(|&&x| r.contains(x)).count();
            if inside == rs.len() {
                out.insert(c);
            } else if inside != 0 {
                return None;
            }
        }
        Some(out)
    }

    /// `R^θ`: θ₀ plus every class above or equal to `i`.
    pub fn upper(&self, i: usize) -> UpSet {
        self.upset_of_classes(&self.up[i])
    }

    /// `R_θ`: θ₀ plus every class strictly above `i`.
    pub fn lower(&self, i: usize) -> UpSet {
        let mut s = self.up[i].clone();
        s.set(i, false);
        self.upset_of_classes(&s)
    }

    /// Smallest upper-closed family of classes containing `seed`.
    pub fn close_up(&self, seed: &FixedBitSet) -> FixedBitSet {
        let mut s = FixedBitSet::with_capacity(self.len());
        for c in seed.ones() {
            s.union_with(&self.up[c]);
        }
        s
    }
}
