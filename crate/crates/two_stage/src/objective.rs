//! The pieces of the two-stage objective: dissatisfaction, the best second
//! stage for a fixed first stage and the differential tables of each term
//! over the union.

use std::collections::BTreeMap;

use matching_core::{Matching, Partner};
use mincut_framework::{
    build_cut_digraph, differentials, solve_bundle, DiffTables, LinearWeights, MetaRotations, Objective, Rational,
};
use num_traits::Zero;
use rotation_lattice::{rotation_order, RotationOrder};

use crate::market::{Market, PairCosts, TwoStageInstance};
use crate::union::{PsiMap, UnionInstance};
use crate::TwoStageError;

/// `[x]⁺`.
pub fn pos(x: Rational) -> Rational {
    if x.is_zero() || x > Rational::zero() {
        x
    } else {
        Rational::zero()
    }
}

/// Length of `[x, y] ∩ [z, w]` for `x ≤ y` and `z ≤ w`, written as
/// `[z−y]⁺ + [w−x]⁺ − [z−x]⁺ − [w−y]⁺`.
pub fn interval_overlap(x: &Rational, y: &Rational, z: &Rational, w: &Rational) -> Rational {
    pos(z - y) + pos(w - x) - pos(z - x) - pos(w - y)
}

/// `λ Σ [r(a, M^J(a)) − r(a, M^I(a))]⁺` over students present in both
/// markets, with `r` the aggregate rank or the custom weights.
pub fn dissatisfaction(ts: &TwoStageInstance, m_first: &Matching, scenario: &Market, m_scn: &Matching) -> Rational {
    let first = &ts.first;
    let mut total = Rational::zero();
    for (la, &a) in scenario.student_of.iter().enumerate() {
        let Some(fa) = first.local_student(a) else { continue };
        let now = ts.rank(a, scenario.aggregate_partner(m_scn.partner(la)));
        let before = ts.rank(a, first.aggregate_partner(m_first.partner(fa)));
        total += pos(now - before);
    }
    total * &ts.lambda
}

/// Linear weights of a sub-market from aggregate pair costs.
pub fn cost_weights(costs: &PairCosts, market: &Market) -> LinearWeights {
    let mut w = LinearWeights::zero(market.inst.num_students(), market.inst.num_schools());
    for (la, &a) in market.student_of.iter().enumerate() {
        for (lb, &b) in market.school_of.iter().enumerate() {
            w.set(la, Some(lb), costs.get(a, b).clone());
        }
    }
    w
}

/// `c₂ + d(M^I, ·)` as weights on the scenario market.
pub fn second_stage_weights(ts: &TwoStageInstance, m_first: &Matching, scenario: &Market) -> LinearWeights {
    let mut w = cost_weights(&ts.c2, scenario);
    for (la, &a) in scenario.student_of.iter().enumerate() {
        let Some(fa) = ts.first.local_student(a) else { continue };
        let before = ts.rank(a, ts.first.aggregate_partner(m_first.partner(fa))).clone();
        let cols = (0..scenario.inst.num_schools()).map(Some).chain([None]);
        for p in cols {
            let drop = pos(ts.rank(a, scenario.aggregate_partner(p)) - &before) * &ts.lambda;
            w.add(la, p, &drop);
        }
    }
    w
}

/// Minimizes a linear objective over the stable matchings of one market.
pub fn minimize_linear(order: &RotationOrder, w: LinearWeights) -> Result<(Matching, Rational), TwoStageError> {
    let meta = MetaRotations::all(order);
    let tables = differentials(order, &meta, &Objective::Linear(w))?;
    let bundle = build_cut_digraph(&meta, &tables, None)?;
    let sol = solve_bundle(order, &bundle)?;
    Ok((sol.matching, sol.value))
}

/// Best second stage for a fixed first stage: `argmin c₂(M^J) + d(M^I, M^J)`.
pub fn second_stage_best(
    ts: &TwoStageInstance,
    m_first: &Matching,
    scenario: &Market,
) -> Result<(Matching, Rational), TwoStageError> {
    second_stage_best_with(ts, m_first, scenario, &rotation_order(&scenario.inst))
}

pub fn second_stage_best_with(
    ts: &TwoStageInstance,
    m_first: &Matching,
    scenario: &Market,
    order: &RotationOrder,
) -> Result<(Matching, Rational), TwoStageError> {
    minimize_linear(order, second_stage_weights(ts, m_first, scenario))
}

/// Tables of a linear cost on part `l`, spread over every union rotation.
pub fn linear_part_tables(u: &UnionInstance, l: usize, w: LinearWeights) -> Result<DiffTables, TwoStageError> {
    let order = &u.orders[l];
    let local = differentials(order, &MetaRotations::all(order), &Objective::Linear(w))?;
    let mut first = vec![Rational::zero(); u.order.len()];
    for (r, x) in local.first.into_iter().enumerate() {
        first[u.rotation(l, r)] = x;
    }
    Ok(DiffTables { base: local.base, first, second: BTreeMap::new() })
}

/// Adds `f³_{a,k}` to `tables`, where `f³_{a,k}(M) = [r(M^{J_k}(a)) − r(M^I(a))]⁺`.
///
/// Only rotations moving `a` contribute. When `a` is unmatched on one side
/// that side has no such rotation and the tables reduce to the linear form.
pub fn add_f3(
    tables: &mut DiffTables,
    ts: &TwoStageInstance,
    psi: &PsiMap,
    a: usize,
    k: usize,
    scenario: &Market,
) -> Result<(), TwoStageError> {
    let (Some(ai), Some(aj)) = (ts.first.local_student(a), scenario.local_student(a)) else {
        return Err(TwoStageError::NotInBoth(a));
    };
    let ranks = |market: &Market, chain: &[Partner]| -> Vec<Rational> {
        chain.iter().map(|&p| ts.rank(a, market.aggregate_partner(p)).clone()).collect()
    };
    let ri = ranks(&ts.first, psi.chain(0, ai));
    let rj = ranks(scenario, psi.chain(k, aj));
    let (mi, mj) = (psi.movers(0, ai), psi.movers(k, aj));
    tables.base += pos(&rj[0] - &ri[0]);
    for (j, &rho) in mi.iter().enumerate() {
        tables.first[rho] += pos(&rj[0] - &ri[j + 1]) - pos(&rj[0] - &ri[j]);
    }
    for (l, &rho) in mj.iter().enumerate() {
        tables.first[rho] += pos(&rj[l + 1] - &ri[0]) - pos(&rj[l] - &ri[0]);
    }
    for (j, &x) in mi.iter().enumerate() {
        for (l, &y) in mj.iter().enumerate() {
            let o = interval_overlap(&ri[j], &ri[j + 1], &rj[l], &rj[l + 1]);
            if !o.is_zero() {
                let key = if x < y { (x, y) } else { (y, x) };
                *tables.second.entry(key).or_insert_with(Rational::zero) += o;
            }
        }
    }
    Ok(())
}

/// Tables of `f³_{a,k}` alone over the union of the first stage with the
/// scenarios, where scenario `k` is part `k`.
pub fn f3_tables(
    ts: &TwoStageInstance,
    u: &UnionInstance,
    psi: &PsiMap,
    a: usize,
    k: usize,
    scenario: &Market,
) -> Result<DiffTables, TwoStageError> {
    let mut t = zero_tables(u.order.len());
    add_f3(&mut t, ts, psi, a, k, scenario)?;
    Ok(t)
}

pub fn zero_tables(len: usize) -> DiffTables {
    DiffTables { base: Rational::zero(), first: vec![Rational::zero(); len], second: BTreeMap::new() }
}

/// `Σ_a f³_{a,k}` over the students present in both stages.
pub fn f3_sum_tables(
    ts: &TwoStageInstance,
    u: &UnionInstance,
    psi: &PsiMap,
    k: usize,
    scenario: &Market,
) -> Result<DiffTables, TwoStageError> {
    let mut t = zero_tables(u.order.len());
    for &a in &scenario.student_of {
        if ts.first.local_student(a).is_some() {
            add_f3(&mut t, ts, psi, a, k, scenario)?;
        }
    }
    Ok(t)
}
