//! The expected-cost problem over explicit scenarios, its sample average
//! version for sampled scenarios and the best first stage in hindsight.

use std::collections::BTreeMap;

use matching_core::Matching;
use mincut_framework::{
    build_cut_digraph, conic_combine, int, solve_bundle, CutBundle, DiffTables, MetaRotations, Rational,
};
use num_traits::{One, ToPrimitive, Zero};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rotation_lattice::{rotation_order, RotationOrder};

use crate::market::{Market, Scenario, Scenarios, SubSpec, TwoStageInstance};
use crate::objective::{cost_weights, dissatisfaction, f3_sum_tables, linear_part_tables, second_stage_best_with};
use crate::union::{disjoint_union, PsiMap, UnionInstance};
use crate::TwoStageError;

#[derive(Debug, Clone, PartialEq)]
pub struct ExpSolution {
    /// First-stage matching, local to the first-stage market.
    pub first: Matching,
    /// One matching per scenario, local to its market.
    pub scenarios: Vec<Matching>,
    pub value: Rational,
}

fn check_probabilities(scns: &[Scenario]) -> Result<(), TwoStageError> {
    let total: Rational = scns.iter().map(|s| s.prob.clone()).sum();
    if total != Rational::one() {
        return Err(TwoStageError::ProbabilitySum(total.to_string()));
    }
    Ok(())
}

/// The terms of the objective as `(coefficient, tables)` over the union:
/// `c₁` on the first stage, then `c₂` and `Σ_a f³_{a,k}` for each scenario
/// with coefficients `p_k` and `λ p_k`.
pub fn objective_terms(
    ts: &TwoStageInstance,
    u: &UnionInstance,
    psi: &PsiMap,
    scns: &[Scenario],
) -> Result<Vec<(Rational, DiffTables)>, TwoStageError> {
    let mut out = vec![(Rational::one(), linear_part_tables(u, 0, cost_weights(&ts.c1, &ts.first))?)];
    for (i, s) in scns.iter().enumerate() {
        let k = i + 1;
        out.push((s.prob.clone(), linear_part_tables(u, k, cost_weights(&ts.c2, &s.market))?));
        out.push((&s.prob * &ts.lambda, f3_sum_tables(ts, u, psi, k, &s.market)?));
    }
    Ok(out)
}

/// `Σ cᵢ Tᵢ`.
pub fn combine_tables(terms: &[(Rational, DiffTables)]) -> DiffTables {
    let len = terms.first().map_or(0, |t| t.1.len());
    let mut out = DiffTables { base: Rational::zero(), first: vec![Rational::zero(); len], second: BTreeMap::new() };
    for (c, t) in terms {
        out.base += &t.base * c;
        for (x, y) in out.first.iter_mut().zip(&t.first) {
            *x += y * c;
        }
        for (key, y) in &t.second {
            *out.second.entry(*key).or_insert_with(Rational::zero) += y * c;
        }
    }
    out.second.retain(|_, x| !x.is_zero());
    out
}

/// One cut digraph for the whole objective over the union of the first stage
/// and the explicit scenarios.
pub fn two_stage_digraph(
    ts: &TwoStageInstance,
    gamma: Option<Rational>,
) -> Result<(UnionInstance, CutBundle), TwoStageError> {
    let scns = ts.explicit_scenarios()?;
    let u = disjoint_union(ts, scns);
    let psi = PsiMap::new(&u);
    let tables = combine_tables(&objective_terms(ts, &u, &psi, scns)?);
    let bundle = build_cut_digraph(&MetaRotations::all(&u.order), &tables, gamma)?;
    Ok((u, bundle))
}

/// `c₁(M^I) + Σ p_k (c₂(M^{J_k}) + d(M^I, M^{J_k}))`.
pub fn evaluate_tuple(ts: &TwoStageInstance, scns: &[Scenario], first: &Matching, ms: &[Matching]) -> Rational {
    let mut v = ts.c1.eval(&ts.first, first);
    for (s, m) in scns.iter().zip(ms) {
        v += (ts.c2.eval(&s.market, m) + dissatisfaction(ts, first, &s.market, m)) * &s.prob;
    }
    v
}

/// Minimizes the expected cost over explicit scenarios with one minimum cut
/// on the union, then re-evaluates the objective at the projections.
pub fn solve_exp_2sto(ts: &TwoStageInstance) -> Result<ExpSolution, TwoStageError> {
    let u = disjoint_union(ts, ts.explicit_scenarios()?);
    solve_exp_2sto_on(ts, &u)
}

/// Same as [`solve_exp_2sto`] over a union built earlier from the first
/// stage and the explicit scenarios, in order.
pub fn solve_exp_2sto_on(ts: &TwoStageInstance, u: &UnionInstance) -> Result<ExpSolution, TwoStageError> {
    let scns = ts.explicit_scenarios()?;
    check_probabilities(scns)?;
    if u.num_parts() != scns.len() + 1 {
        return Err(TwoStageError::WrongSize);
    }
    let psi = PsiMap::new(u);
    let meta = MetaRotations::all(&u.order);
    let terms = objective_terms(ts, u, &psi, scns)?;
    let mut bundles = Vec::with_capacity(terms.len());
    let mut coeffs = Vec::with_capacity(terms.len());
    for (c, t) in terms {
        bundles.push(build_cut_digraph(&meta, &t, None)?);
        coeffs.push(c);
    }
    let combined = conic_combine(&bundles, &coeffs)?;
    let sol = solve_bundle(&u.order, &combined)?;
    let first = u.project(&sol.matching, 0)?;
    let scenarios = (1..u.num_parts()).map(|k| u.project(&sol.matching, k)).collect::<Result<Vec<_>, _>>()?;
    let value = evaluate_tuple(ts, scns, &first, &scenarios);
    if value != sol.value {
        return Err(TwoStageError::ValueMismatch { cut: sol.value.to_string(), direct: value.to_string() });
    }
    Ok(ExpSolution { first, scenarios, value })
}

/// Expected cost of a fixed first stage when every scenario answers with its
/// best second stage. Scenario orders are computed once.
#[derive(Debug, Clone)]
pub struct FirstStageEvaluator<'a> {
    ts: &'a TwoStageInstance,
    orders: Vec<RotationOrder>,
}

impl<'a> FirstStageEvaluator<'a> {
    pub fn new(ts: &'a TwoStageInstance) -> Result<Self, TwoStageError> {
        let orders = ts.explicit_scenarios()?.iter().map(|s| rotation_order(&s.market.inst)).collect();
        FirstStageEvaluator::with_orders(ts, orders)
    }

    /// Reuses the rotation order of each scenario market.
    pub fn with_orders(ts: &'a TwoStageInstance, orders: Vec<RotationOrder>) -> Result<Self, TwoStageError> {
        let scns = ts.explicit_scenarios()?;
        check_probabilities(scns)?;
        if orders.len() != scns.len() {
            return Err(TwoStageError::WrongSize);
        }
        Ok(FirstStageEvaluator { ts, orders })
    }

    pub fn value(&self, first: &Matching) -> Result<Rational, TwoStageError> {
        let mut v = self.ts.c1.eval(&self.ts.first, first);
        for (s, o) in self.ts.explicit_scenarios()?.iter().zip(&self.orders) {
            v += second_stage_best_with(self.ts, first, &s.market, o)?.1 * &s.prob;
        }
        Ok(v)
    }
}

/// `⌈(4|A|(max|c₂| + λ|B|))² (max(|A|,|B|) ln 3.88 − ln α) / ε²⌉`, at least 1,
/// saturating at `u64::MAX`.
pub fn sample_count(ts: &TwoStageInstance, eps: &Rational, alpha: &Rational) -> Result<u64, TwoStageError> {
    if *eps <= Rational::zero() {
        return Err(TwoStageError::BadEpsilon(eps.to_string()));
    }
    if *alpha <= Rational::zero() || *alpha >= Rational::one() {
        return Err(TwoStageError::BadAlpha(alpha.to_string()));
    }
    let f = |x: &Rational| x.to_f64().unwrap_or(f64::INFINITY);
    let (na, nb) = (ts.aggregate.num_students() as f64, ts.aggregate.num_schools() as f64);
    let scale = 4.0 * na * (f(&ts.c2.max_abs()) + f(&ts.lambda) * nb);
    let logs = na.max(nb) * 3.88f64.ln() - f(alpha).ln();
    let k = (scale * scale * logs / (f(eps) * f(eps))).ceil();
    Ok(if k.is_finite() && k < u64::MAX as f64 { (k as u64).max(1) } else { u64::MAX })
}

/// A sample count after applying a budget.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SampleBudget {
    pub required: u64,
    pub used: u64,
    /// The budget cut the count, so the accuracy guarantee does not apply.
    pub capped: bool,
}

pub fn budgeted_sample_count(
    ts: &TwoStageInstance,
    eps: &Rational,
    alpha: &Rational,
    budget: Option<u64>,
) -> Result<SampleBudget, TwoStageError> {
    let required = sample_count(ts, eps, alpha)?;
    let used = budget.map_or(required, |b| required.min(b.max(1)));
    Ok(SampleBudget { required, used, capped: used < required })
}

/// `k` draws of the sampler from a stream seeded by `seed`.
pub fn draw_samples(ts: &TwoStageInstance, k: u64, seed: u64) -> Result<Vec<SubSpec>, TwoStageError> {
    let sampler = ts.sampler()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..k).map(|_| sampler(&mut rng)).collect()
}

/// Distinct draws with their empirical probabilities, in spec order.
pub fn empirical(ts: &TwoStageInstance, draws: &[SubSpec]) -> Result<Scenarios, TwoStageError> {
    if draws.is_empty() {
        return Err(TwoStageError::NoScenarios);
    }
    let mut counts: BTreeMap<&SubSpec, i64> = BTreeMap::new();
    for d in draws {
        *counts.entry(d).or_default() += 1;
    }
    let n = int(draws.len() as i64);
    let mut out = Vec::with_capacity(counts.len());
    for (i, (spec, c)) in counts.into_iter().enumerate() {
        let market = Market::restrict(&ts.aggregate, spec.clone())?;
        out.push(Scenario { name: format!("s{i}"), prob: int(c) / &n, market });
    }
    Ok(Scenarios::Explicit(out))
}

#[derive(Debug, Clone, PartialEq)]
pub struct SaaSolution {
    pub first: Matching,
    /// Optimal value of the sample average problem.
    pub estimate: Rational,
    pub samples: SampleBudget,
    /// Number of distinct sampled markets.
    pub distinct: usize,
}

/// Draws the sample count, merges equal draws and solves the sample average
/// problem exactly.
pub fn solve_saa(
    ts: &TwoStageInstance,
    eps: &Rational,
    alpha: &Rational,
    seed: u64,
    budget: Option<u64>,
) -> Result<SaaSolution, TwoStageError> {
    let samples = budgeted_sample_count(ts, eps, alpha, budget)?;
    let draws = draw_samples(ts, samples.used, seed)?;
    let scns = empirical(ts, &draws)?;
    let distinct = match &scns {
        Scenarios::Explicit(s) => s.len(),
        Scenarios::Sampler(_) => 0,
    };
    let sol = solve_exp_2sto(&ts.with_scenarios(scns))?;
    Ok(SaaSolution { first: sol.first, estimate: sol.value, samples, distinct })
}

/// Best first stage against the realized markets, each weighted by its
/// empirical frequency.
pub fn hindsight_best(ts: &TwoStageInstance, realized: &[SubSpec]) -> Result<(Matching, Rational), TwoStageError> {
    let sol = solve_exp_2sto(&ts.with_scenarios(empirical(ts, realized)?))?;
    Ok((sol.first, sol.value))
}
