//! Sub-markets of an aggregate market, pair costs, rank weights and the
//! two-stage instance itself.

use std::sync::Arc;

use matching_core::{Instance, Matching, Partner};
use mincut_framework::{int, ratio, Rational};
use num_traits::{Signed, Zero};
use rand::{Rng, RngCore};

use crate::TwoStageError;

/// Agents kept in a sub-market, as aggregate ids, plus quota overrides.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SubSpec {
    pub students: Vec<usize>,
    pub schools: Vec<usize>,
    /// `(school, quota)` pairs replacing the aggregate quota.
    pub quotas: Vec<(usize, usize)>,
}

impl SubSpec {
    /// Every agent of the aggregate market.
    pub fn full(agg: &Instance) -> Self {
        SubSpec {
            students: (0..agg.num_students()).collect(),
            schools: (0..agg.num_schools()).collect(),
            quotas: vec![],
        }
    }

    pub fn new(mut students: Vec<usize>, mut schools: Vec<usize>, mut quotas: Vec<(usize, usize)>) -> Self {
        students.sort_unstable();
        students.dedup();
        schools.sort_unstable();
        schools.dedup();
        quotas.sort_unstable();
        SubSpec { students, schools, quotas }
    }
}

/// A sub-market whose preferences are the aggregate lists restricted to the
/// kept agents. Local ids follow increasing aggregate ids.
#[derive(Debug, Clone)]
pub struct Market {
    pub spec: SubSpec,
    pub inst: Instance,
    /// Aggregate id of each local student.
    pub student_of: Vec<usize>,
    /// Aggregate id of each local school.
    pub school_of: Vec<usize>,
    local_student: Vec<Option<usize>>,
    local_school: Vec<Option<usize>>,
}

impl Market {
    /// Quotas are clamped to the number of kept students, which leaves the
    /// stable matchings unchanged.
    pub fn restrict(agg: &Instance, spec: SubSpec) -> Result<Market, TwoStageError> {
        let spec = SubSpec::new(spec.students, spec.schools, spec.quotas);
        if let Some(&a) = spec.students.iter().find(|&&a| a >= agg.num_students()) {
            return Err(TwoStageError::UnknownStudent(a));
        }
        if let Some(&b) = spec.schools.iter().find(|&&b| b >= agg.num_schools()) {
            return Err(TwoStageError::UnknownSchool(b));
        }
        let mut local_student = vec![None; agg.num_students()];
        for (i, &a) in spec.students.iter().enumerate() {
            local_student[a] = Some(i);
        }
        let mut local_school = vec![None; agg.num_schools()];
        for (i, &b) in spec.schools.iter().enumerate() {
            local_school[b] = Some(i);
        }
        let mut quota: Vec<usize> = spec.schools.iter().map(|&b| agg.quota(b)).collect();
        for &(b, q) in &spec.quotas {
            let i = local_school.get(b).copied().flatten().ok_or(TwoStageError::UnknownSchool(b))?;
            if q == 0 {
                return Err(TwoStageError::BadQuota { school: agg.school_name(b).to_string(), quota: q });
            }
            quota[i] = q;
        }
        let cap = spec.students.len().max(1);
        for q in &mut quota {
            *q = (*q).min(cap);
        }
        let keep = |list: &[Partner], local: &[Option<usize>]| -> Vec<Partner> {
            list.iter().filter_map(|p| p.map_or(Some(None), |x| local[x].map(Some))).collect()
        };
        let sp = spec.students.iter().map(|&a| keep(agg.student_pref(a), &local_school)).collect();
        let bp = spec.schools.iter().map(|&b| keep(agg.school_pref(b), &local_student)).collect();
        let names = |ids: &[usize], f: &dyn Fn(usize) -> String| ids.iter().map(|&x| f(x)).collect();
        let inst = Instance::new(
            names(&spec.students, &|a| agg.student_name(a).to_string()),
            names(&spec.schools, &|b| agg.school_name(b).to_string()),
            quota,
            sp,
            bp,
        )?;
        Ok(Market {
            student_of: spec.students.clone(),
            school_of: spec.schools.clone(),
            spec,
            inst,
            local_student,
            local_school,
        })
    }

    pub fn local_student(&self, a: usize) -> Option<usize> {
        self.local_student.get(a).copied().flatten()
    }

    pub fn local_school(&self, b: usize) -> Option<usize> {
        self.local_school.get(b).copied().flatten()
    }

    /// Aggregate partner of a local partner.
    pub fn aggregate_partner(&self, p: Partner) -> Partner {
        p.map(|b| self.school_of[b])
    }

    /// Matched pairs of a local matching in aggregate ids.
    pub fn aggregate_pairs(&self, m: &Matching) -> Vec<(usize, usize)> {
        m.pairs().into_iter().map(|(a, b)| (self.student_of[a], self.school_of[b])).collect()
    }

    /// Local matching from aggregate pairs.
    pub fn from_aggregate_pairs(&self, pairs: &[(usize, usize)]) -> Result<Matching, TwoStageError> {
        let mut m = Matching::empty(self.inst.num_students());
        for &(a, b) in pairs {
            let la = self.local_student(a).ok_or(TwoStageError::UnknownStudent(a))?;
            let lb = self.local_school(b).ok_or(TwoStageError::UnknownSchool(b))?;
            m.set(la, Some(lb));
        }
        Ok(m)
    }
}

/// Costs of aggregate pairs; an unmatched student costs nothing.
#[derive(Debug, Clone, PartialEq)]
pub struct PairCosts {
    table: Vec<Vec<Rational>>,
}

impl PairCosts {
    pub fn zero(agg: &Instance) -> Self {
        PairCosts { table: vec![vec![Rational::zero(); agg.num_schools()]; agg.num_students()] }
    }

    /// `c(ab) = (R_a(b) + R_b(a)) / 2` with ranks counted from 1.
    pub fn egalitarian(agg: &Instance) -> Self {
        let mut c = PairCosts::zero(agg);
        for a in 0..agg.num_students() {
            for b in 0..agg.num_schools() {
                let r = agg.student_pos(a, Some(b)) + agg.school_pos(b, Some(a)) + 2;
                c.table[a][b] = ratio(r as i64, 2);
            }
        }
        c
    }

    pub fn get(&self, a: usize, b: usize) -> &Rational {
        &self.table[a][b]
    }

    pub fn set(&mut self, a: usize, b: usize, x: Rational) {
        self.table[a][b] = x;
    }

    /// `max |c(ab)|`.
    pub fn max_abs(&self) -> Rational {
        self.table.iter().flatten().map(|x| x.abs()).fold(Rational::zero(), |m, x| if x > m { x } else { m })
    }

    /// Total cost of a local matching of `market`.
    pub fn eval(&self, market: &Market, m: &Matching) -> Rational {
        market.aggregate_pairs(m).into_iter().map(|(a, b)| self.table[a][b].clone()).sum()
    }
}

/// Per-student values of each partner measuring how far down the list it
/// sits. Values never decrease down a student's aggregate list, outside
/// option included.
#[derive(Debug, Clone, PartialEq)]
pub struct RankWeights {
    num_schools: usize,
    table: Vec<Vec<Rational>>,
}

impl RankWeights {
    /// `R_a(p)`: the 0-based position of `p` in the aggregate list of `a`.
    pub fn ranks(agg: &Instance) -> Self {
        let table = (0..agg.num_students())
            .map(|a| {
                (0..=agg.num_schools())
                    .map(|c| {
                        let p = (c < agg.num_schools()).then_some(c);
                        int(agg.student_pos(a, p) as i64)
                    })
                    .collect()
            })
            .collect();
        RankWeights { num_schools: agg.num_schools(), table }
    }

    /// Custom weights, `table[a][b]` with column `num_schools` for the
    /// outside option.
    pub fn custom(agg: &Instance, table: Vec<Vec<Rational>>) -> Result<Self, TwoStageError> {
        let w = RankWeights { num_schools: agg.num_schools(), table };
        if w.table.len() != agg.num_students() || w.table.iter().any(|r| r.len() != agg.num_schools() + 1) {
            return Err(TwoStageError::WeightShape);
        }
        for a in 0..agg.num_students() {
            let list = agg.student_pref(a);
            if list.windows(2).any(|p| w.get(a, p[0]) > w.get(a, p[1])) {
                return Err(TwoStageError::WeightNotMonotone(agg.student_name(a).to_string()));
            }
        }
        Ok(w)
    }

    pub fn get(&self, a: usize, p: Partner) -> &Rational {
        &self.table[a][p.unwrap_or(self.num_schools)]
    }
}

/// Draws the kept agents of one second-stage market.
pub type Sampler = Arc<dyn Fn(&mut dyn RngCore) -> Result<SubSpec, TwoStageError> + Send + Sync>;

/// Each agent of the aggregate market leaves independently with probability `p`.
pub fn departure_sampler(agg: &Instance, p: f64) -> Result<Sampler, TwoStageError> {
    if !(0.0..=1.0).contains(&p) {
        return Err(TwoStageError::BadProbability(p.to_string()));
    }
    let (na, nb) = (agg.num_students(), agg.num_schools());
    Ok(Arc::new(move |rng: &mut dyn RngCore| {
        let students = (0..na).filter(|_| !rng.gen_bool(p)).collect();
        let schools = (0..nb).filter(|_| !rng.gen_bool(p)).collect();
        Ok(SubSpec::new(students, schools, vec![]))
    }))
}

#[derive(Debug, Clone)]
pub struct Scenario {
    pub name: String,
    pub prob: Rational,
    pub market: Market,
}

#[derive(Clone)]
pub enum Scenarios {
    Explicit(Vec<Scenario>),
    Sampler(Sampler),
}

impl std::fmt::Debug for Scenarios {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Scenarios::Explicit(s) => f.debug_tuple("Explicit").field(s).finish(),
            Scenarios::Sampler(_) => write!(f, "Sampler"),
        }
    }
}

#[derive(Debug, Clone)]
pub struct TwoStageInstance {
    pub aggregate: Instance,
    pub first: Market,
    pub scenarios: Scenarios,
    pub c1: PairCosts,
    pub c2: PairCosts,
    pub lambda: Rational,
    /// Custom weights; aggregate ranks when absent.
    pub weights: Option<RankWeights>,
    ranks: RankWeights,
}

impl TwoStageInstance {
    /// Zero costs and `λ = 1`.
    pub fn new(aggregate: Instance, first: SubSpec, scenarios: Scenarios) -> Result<Self, TwoStageError> {
        let first = Market::restrict(&aggregate, first)?;
        if let Scenarios::Explicit(list) = &scenarios {
            if let Some(s) = list.iter().find(|s| s.prob.is_negative()) {
                return Err(TwoStageError::BadProbability(s.prob.to_string()));
            }
        }
        Ok(TwoStageInstance {
            c1: PairCosts::zero(&aggregate),
            c2: PairCosts::zero(&aggregate),
            lambda: int(1),
            weights: None,
            ranks: RankWeights::ranks(&aggregate),
            first,
            scenarios,
            aggregate,
        })
    }

    pub fn with_costs(mut self, c1: PairCosts, c2: PairCosts) -> Self {
        self.c1 = c1;
        self.c2 = c2;
        self
    }

    pub fn with_lambda(mut self, lambda: Rational) -> Result<Self, TwoStageError> {
        if lambda.is_negative() {
            return Err(TwoStageError::NegativeLambda);
        }
        self.lambda = lambda;
        Ok(self)
    }

    pub fn with_weights(mut self, w: RankWeights) -> Self {
        self.weights = Some(w);
        self
    }

    /// Builds the scenario list from sub-market specs and probabilities.
    pub fn explicit(agg: &Instance, list: Vec<(String, Rational, SubSpec)>) -> Result<Scenarios, TwoStageError> {
        let mut out = Vec::with_capacity(list.len());
        for (name, prob, spec) in list {
            out.push(Scenario { name, prob, market: Market::restrict(agg, spec)? });
        }
        Ok(Scenarios::Explicit(out))
    }

    /// Same instance with another scenario description.
    pub fn with_scenarios(&self, scenarios: Scenarios) -> Self {
        TwoStageInstance { scenarios, ..self.clone() }
    }

    /// `R_a(p)` or `w(a, p)` for aggregate ids.
    pub fn rank(&self, a: usize, p: Partner) -> &Rational {
        self.weights.as_ref().unwrap_or(&self.ranks).get(a, p)
    }

    pub fn explicit_scenarios(&self) -> Result<&[Scenario], TwoStageError> {
        match &self.scenarios {
            Scenarios::Explicit(s) => Ok(s),
            Scenarios::Sampler(_) => Err(TwoStageError::NeedsExplicit),
        }
    }

    pub fn sampler(&self) -> Result<&Sampler, TwoStageError> {
        match &self.scenarios {
            Scenarios::Sampler(s) => Ok(s),
            Scenarios::Explicit(_) => Err(TwoStageError::NeedsSampler),
        }
    }
}
