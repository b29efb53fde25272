//! Same-school placement: a stable matching maximizing the number of sibling
//! pairs at a common school.

use std::collections::BTreeMap;

use matching_core::Matching;
use mincut_framework::{build_cut_digraph, conic_combine, int, solve_bundle, DiffTables, MetaRotations, Rational};
use rotation_lattice::{rotation_order, RotationOrder};

use crate::normalize::normalize_msss;
use crate::{SiblingError, SiblingInstance};

/// Rotations bounding the stable matchings that put a pair together at one
/// school: together iff `rho_in` is eliminated and `rho_out` is not. A
/// missing exit means the pair stays together down to the student-pessimal
/// matching.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct InOut {
    pub rho_in: usize,
    pub rho_out: Option<usize>,
}

fn shared(m: &Matching, a: usize, abar: usize) -> Option<usize> {
    m.partner(a).filter(|&b| m.partner(abar) == Some(b))
}

/// Co-location intervals of `(a, abar)` along the ascending elimination
/// chain, keyed by school. The pair must be apart in the student-optimal
/// matching.
fn colocations(order: &RotationOrder, a: usize, abar: usize) -> Result<BTreeMap<usize, InOut>, SiblingError> {
    if shared(&order.m0, a, abar).is_some() {
        return Err(SiblingError::AssumptionViolated { a, b: abar });
    }
    let mut out = BTreeMap::new();
    let mut open: Option<(usize, usize)> = None;
    let mut m = order.m0.clone();
    for (id, rho) in order.rotations.iter().enumerate() {
        let next = rho.apply(&m);
        let (before, after) = (shared(&m, a, abar), shared(&next, a, abar));
        if before != after {
            if let Some(b) = before {
                let (ob, rho_in) = open.take().expect("an exit follows an entry");
                debug_assert_eq!(ob, b);
                out.insert(b, InOut { rho_in, rho_out: Some(id) });
            }
            if let Some(b) = after {
                open = Some((b, id));
            }
        }
        m = next;
    }
    if let Some((b, rho_in)) = open {
        out.insert(b, InOut { rho_in, rho_out: None });
    }
    Ok(out)
}

/// The entry and exit rotations of the pair at school `b`, or `None` when no
/// stable matching puts both there. Requires that neither extreme stable
/// matching puts the pair at a common school, so both rotations exist.
pub fn rho_in_out(order: &RotationOrder, a: usize, abar: usize, b: usize) -> Result<Option<InOut>, SiblingError> {
    if shared(&order.mz, a, abar).is_some() {
        return Err(SiblingError::AssumptionViolated { a, b: abar });
    }
    Ok(colocations(order, a, abar)?.get(&b).copied())
}

/// Differentials of the separation indicator of one pair over single
/// rotations: base 1, `+1` at each exit rotation, `-1` at each entry rotation,
/// no second-order terms. The pair must be apart in the student-optimal
/// matching.
pub fn msss_tables(order: &RotationOrder, a: usize, abar: usize) -> Result<DiffTables, SiblingError> {
    let mut first = vec![int(0); order.len()];
    for io in colocations(order, a, abar)?.values() {
        first[io.rho_in] -= int(1);
        if let Some(out) = io.rho_out {
            first[out] += int(1);
        }
    }
    Ok(DiffTables { base: int(1), first, second: BTreeMap::new() })
}

/// Pairs not placed at a common school.
pub fn separated_pairs(m: &Matching, pairs: &[(usize, usize)]) -> usize {
    pairs.iter().filter(|&&(a, abar)| shared(m, a, abar).is_none()).count()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MsssSolution {
    /// Stable matching of the input instance.
    pub matching: Matching,
    pub separated: usize,
    /// Dummy student/school pairs the normalization added.
    pub dummies: usize,
}

/// Minimizes the number of separated pairs over all stable matchings.
pub fn solve_msss(si: &SiblingInstance) -> Result<MsssSolution, SiblingError> {
    let norm = normalize_msss(si);
    let order = rotation_order(&norm.instance.base);
    let meta = MetaRotations::all(&order);
    let mut bundles = Vec::with_capacity(si.pairs.len());
    for &(a, abar) in &si.pairs {
        bundles.push(build_cut_digraph(&meta, &msss_tables(&order, a, abar)?, None)?);
    }
    let matching = if bundles.is_empty() {
        order.m0.clone()
    } else {
        let combined = conic_combine(&bundles, &vec![int(1); bundles.len()])?;
        let sol = solve_bundle(&order, &combined)?;
        debug_assert_eq!(sol.value, Rational::from_integer(separated_pairs(&sol.matching, &si.pairs).into()));
        sol.matching
    };
    let matching = norm.backward(&matching);
    let separated = separated_pairs(&matching, &si.pairs);
    Ok(MsssSolution { matching, separated, dummies: norm.dummies() })
}
