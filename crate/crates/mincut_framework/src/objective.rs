//! Objectives over stable matchings and their first and second order
//! differentials with respect to a meta-rotation partition.

use std::collections::{BTreeMap, HashMap};
use std::sync::Arc;

use fixedbitset::FixedBitSet;
use matching_core::{Matching, Partner};
use num_traits::Zero;
use rotation_lattice::{matching_of, RotationOrder, UpSet};

use crate::meta::MetaRotations;
use crate::{FrameworkError, Rational};

/// Weights `w(a, b)` of a linear objective, with a column for OUTSIDE.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearWeights {
    num_schools: usize,
    w: Vec<Vec<Rational>>,
}

impl LinearWeights {
    pub fn zero(num_students: usize, num_schools: usize) -> Self {
        LinearWeights { num_schools, w: vec![vec![Rational::zero(); num_schools + 1]; num_students] }
    }

    pub fn num_students(&self) -> usize {
        self.w.len()
    }

    pub fn num_schools(&self) -> usize {
        self.num_schools
    }

    fn col(&self, p: Partner) -> usize {
        p.unwrap_or(self.num_schools)
    }

    pub fn get(&self, a: usize, p: Partner) -> &Rational {
        &self.w[a][self.col(p)]
    }

    pub fn set(&mut self, a: usize, p: Partner, x: Rational) {
        let c = self.col(p);
        self.w[a][c] = x;
    }

    pub fn add(&mut self, a: usize, p: Partner, x: &Rational) {
        let c = self.col(p);
        self.w[a][c] += x;
    }

    /// Sum of `w(a, M(a))` over all students.
    pub fn eval(&self, m: &Matching) -> Rational {
        (0..self.w.len()).map(|a| self.get(a, m.partner(a)).clone()).sum()
    }

    /// Change of the objective when `ρ` is eliminated.
    pub fn delta(&self, plus: &[(usize, usize)], minus: &[(usize, usize)]) -> Rational {
        let after: Rational = minus.iter().map(|&(a, b)| self.get(a, Some(b)).clone()).sum();
        let before: Rational = plus.iter().map(|&(a, b)| self.get(a, Some(b)).clone()).sum();
        after - before
    }
}

/// Differential tables over the proper classes of a partition.
#[derive(Debug, Clone, PartialEq)]
pub struct DiffTables {
    /// `f(M₀^F)`.
    pub base: Rational,
    /// `∂f_θ` per proper class.
    pub first: Vec<Rational>,
    /// `∂²f_{θ,θ'}` keyed by `(i, j)` with `i < j`; absent entries are zero.
    pub second: BTreeMap<(usize, usize), Rational>,
}

impl DiffTables {
    pub fn len(&self) -> usize {
        self.first.len()
    }

    pub fn is_empty(&self) -> bool {
        self.first.is_empty()
    }

    pub fn get(&self, i: usize, j: usize) -> Rational {
        let key = if i < j { (i, j) } else { (j, i) };
        self.second.get(&key).cloned().unwrap_or_else(Rational::zero)
    }

    /// `f(M₀^F) + Σ ∂f_θ − Σ_{pairs} ∂²f_{θ,θ'}` over the given classes.
    pub fn f_aprx(&self, classes: &FixedBitSet) -> Rational {
        let mut v = self.base.clone();
        for i in classes.ones() {
            v += &self.first[i];
        }
        for ((i, j), x) in &self.second {
            if classes.contains(*i) && classes.contains(*j) {
                v -= x;
            }
        }
        v
    }
}

pub type OracleFn = Arc<dyn Fn(&Matching) -> Rational + Send + Sync>;

#[derive(Clone)]
pub enum Objective {
    /// Arbitrary evaluator on matchings.
    Oracle(OracleFn),
    Linear(LinearWeights),
    /// Given directly by its tables over a fixed partition.
    Structured(DiffTables),
}

impl std::fmt::Debug for Objective {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Objective::Oracle(_) => write!(f, "Oracle"),
            Objective::Linear(w) => f.debug_tuple("Linear").field(w).finish(),
            Objective::Structured(t) => f.debug_tuple("Structured").field(t).finish(),
        }
    }
}

impl Objective {
    pub fn oracle(f: impl Fn(&Matching) -> Rational + Send + Sync + 'static) -> Self {
        Objective::Oracle(Arc::new(f))
    }

    pub fn constant(c: Rational) -> Self {
        Objective::oracle(move |_| c.clone())
    }
}

/// Memoised evaluation of an objective on upsets.
pub struct Evaluator<'a> {
    order: &'a RotationOrder,
    meta: &'a MetaRotations,
    objective: &'a Objective,
    memo: HashMap<UpSet, Rational>,
}

impl<'a> Evaluator<'a> {
    pub fn new(order: &'a RotationOrder, meta: &'a MetaRotations, objective: &'a Objective) -> Self {
        Evaluator { order, meta, objective, memo: HashMap::new() }
    }

    /// Number of distinct upsets evaluated so far.
    pub fn evaluations(&self) -> usize {
        self.memo.len()
    }

    pub fn eval(&mut self, r: &UpSet) -> Result<Rational, FrameworkError> {
        if let Some(v) = self.memo.get(r) {
            return Ok(v.clone());
        }
        let v = match self.objective {
            Objective::Oracle(f) => f(&matching_of(self.order, r)?),
            Objective::Linear(w) => w.eval(&matching_of(self.order, r)?),
            Objective::Structured(t) => {
                // Structured objectives are only defined on unions of classes.
                let classes = self.meta.classes_in(r).ok_or(FrameworkError::OutsideFamily)?;
                t.f_aprx(&classes)
            }
        };
        self.memo.insert(r.clone(), v.clone());
        Ok(v)
    }
}

/// Differential tables of `objective` over `meta`.
///
/// Linear objectives use the closed form; comparable pairs are skipped since
/// their second differential vanishes identically.
pub fn differentials(
    order: &RotationOrder,
    meta: &MetaRotations,
    objective: &Objective,
) -> Result<DiffTables, FrameworkError> {
    match objective {
        Objective::Structured(t) => {
            if t.len() != meta.len() {
                return Err(FrameworkError::MismatchedBundles);
            }
            Ok(t.clone())
        }
        Objective::Linear(w) => {
            let delta: Vec<Rational> = order.rotations.iter().map(|rho| w.delta(&rho.plus, &rho.minus)).collect();
            let mut base = w.eval(&order.m0);
            for &r in &meta.theta0 {
                base += &delta[r];
            }
            let first = meta.proper.iter().map(|rs| rs.iter().map(|&r| delta[r].clone()).sum()).collect();
            Ok(DiffTables { base, first, second: BTreeMap::new() })
        }
        Objective::Oracle(_) => {
            let mut ev = Evaluator::new(order, meta, objective);
            let base = ev.eval(&meta.base_upset())?;
            let k = meta.len();
            let upper: Vec<UpSet> = (0..k).map(|i| meta.upper(i)).collect();
            let lower: Vec<UpSet> = (0..k).map(|i| meta.lower(i)).collect();
            let mut first = Vec::with_capacity(k);
            for i in 0..k {
                first.push(ev.eval(&upper[i])? - ev.eval(&lower[i])?);
            }
            let mut second = BTreeMap::new();
            for i in 0..k {
                for j in i + 1..k {
                    if meta.comparable(i, j) {
                        continue;
                    }
                    let x = ev.eval(&upper[i].union(&lower[j]))? + ev.eval(&lower[i].union(&upper[j]))?
                        - ev.eval(&lower[i].union(&lower[j]))?
                        - ev.eval(&upper[i].union(&upper[j]))?;
                    if !x.is_zero() {
                        second.insert((i, j), x);
                    }
                }
            }
            Ok(DiffTables { base, first, second })
        }
    }
}
