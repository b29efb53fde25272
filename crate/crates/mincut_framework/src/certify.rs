//! Deciding minimum cut representability and producing witnesses.

use std::collections::HashSet;
use std::fmt;

use fixedbitset::FixedBitSet;
use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rotation_lattice::{LatticeError, RotationOrder, UpSet};

use crate::digraph::{build_cut_digraph, CutBundle};
use crate::family::{find_violation, Family, LatticeViolation};
use crate::meta::MetaRotations;
use crate::objective::{differentials, DiffTables, Evaluator, Objective};
use crate::{FrameworkError, Rational};

pub const DEFAULT_CAP: usize = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CheckMode {
    /// Enumerate the family, up to `cap` members.
    Exact { cap: usize },
    /// Check the expansion on `k` random members.
    Sampled { k: usize, seed: u64 },
}

impl Default for CheckMode {
    fn default() -> Self {
        CheckMode::Exact { cap: DEFAULT_CAP }
    }
}

/// Why a pair (f, F) is not minimum cut representable.
#[derive(Debug, Clone, PartialEq)]
pub enum Certificate {
    /// The family is not closed under meet or join.
    NotSublattice(LatticeViolation),
    /// The minimizers of f over F are not closed under meet or join.
    MinimaNotSublattice(LatticeViolation),
    /// Negative second differential at proper classes `i`, `j`, with their
    /// representative rotations.
    NegativeSecond { i: usize, j: usize, rotations: (usize, usize), value: Rational },
    /// f differs from its second order expansion at a member.
    Mismatch { upset: UpSet, f: Rational, f_aprx: Rational },
}

impl Certificate {
    /// Label of the failed condition: `i`, `ii` or `iii`.
    pub fn condition(&self) -> &'static str {
        match self {
            Certificate::NotSublattice(_) | Certificate::MinimaNotSublattice(_) => "i",
            Certificate::NegativeSecond { .. } => "ii",
            Certificate::Mismatch { .. } => "iii",
        }
    }
}

fn ids(u: &UpSet) -> String {
    let v: Vec<String> = u.ids().map(|i| i.to_string()).collect();
    format!("{{{}}}", v.join(","))
}

impl fmt::Display for Certificate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Certificate::NotSublattice(v) => {
                write!(
                    f,
                    "{:?} of {} and {} is {}, not in the family",
                    v.op,
                    ids(&v.first),
                    ids(&v.second),
                    ids(&v.result)
                )
            }
            Certificate::MinimaNotSublattice(v) => write!(
                f,
                "{:?} of minimizers {} and {} is {}, not a minimizer",
                v.op,
                ids(&v.first),
                ids(&v.second),
                ids(&v.result)
            ),
            Certificate::NegativeSecond { i, j, rotations, value } => write!(
                f,
                "second differential of classes {i} and {j} (rotations {} and {}) is {value}",
                rotations.0, rotations.1
            ),
            Certificate::Mismatch { upset, f: v, f_aprx } => {
                write!(f, "at {} f = {v} but the expansion gives {f_aprx}", ids(upset))
            }
        }
    }
}

#[derive(Debug, Clone)]
pub enum Verdict {
    /// Every member was checked.
    Representable(CutBundle),
    /// Sampling found no counterexample; `downgraded` is set when exact mode
    /// fell back to sampling because the family exceeded the cap.
    Consistent {
        bundle: CutBundle,
        downgraded: bool,
    },
    NotRepresentable(Certificate),
}

impl Verdict {
    pub fn bundle(&self) -> Option<&CutBundle> {
        match self {
            Verdict::Representable(b) | Verdict::Consistent { bundle: b, .. } => Some(b),
            Verdict::NotRepresentable(_) => None,
        }
    }

    pub fn certificate(&self) -> Option<&Certificate> {
        match self {
            Verdict::NotRepresentable(c) => Some(c),
            _ => None,
        }
    }
}

/// A distinct proper pair with nonzero second differential, if any.
pub fn nonlinear_witness(tables: &DiffTables) -> Option<((usize, usize), Rational)> {
    tables.second.iter().find(|(_, x)| !x.is_zero()).map(|(k, x)| (*k, x.clone()))
}

/// True iff every second differential vanishes.
pub fn is_linearizable(tables: &DiffTables) -> bool {
    nonlinear_witness(tables).is_none()
}

/// Random members of a family too large to enumerate: upward closures of
/// random class sets, kept only if the family accepts them.
fn sample_members(family: &Family, meta: &MetaRotations, k: usize, seed: u64) -> Vec<UpSet> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let explicit: Option<HashSet<&UpSet>> = match family {
        Family::Explicit(v) => Some(v.iter().collect()),
        _ => None,
    };
    let mut out = Vec::with_capacity(k);
    let mut tries = 0;
    while out.len() < k && tries < 20 * k.max(1) {
        tries += 1;
        let mut s = FixedBitSet::with_capacity(meta.len());
        let p: f64 = rng.gen();
        for c in 0..meta.len() {
            if rng.gen_bool(p) {
                s.insert(c);
            }
        }
        let u = meta.upset_of_classes(&meta.close_up(&s));
        let ok = match family {
            Family::All => true,
            Family::Explicit(_) => explicit.as_ref().is_some_and(|e| e.contains(&u)),
            Family::Predicate(pred) => pred(&u),
        };
        if ok {
            out.push(u);
        }
    }
    out
}

fn check_expansion(
    ev: &mut Evaluator<'_>,
    meta: &MetaRotations,
    tables: &DiffTables,
    members: &[UpSet],
) -> Result<Option<Certificate>, FrameworkError> {
    for u in members {
        let classes = meta.classes_in(u).ok_or(FrameworkError::OutsideFamily)?;
        let fa = tables.f_aprx(&classes);
        let fv = ev.eval(u)?;
        if fa != fv {
            return Ok(Some(Certificate::Mismatch { upset: u.clone(), f: fv, f_aprx: fa }));
        }
    }
    Ok(None)
}

/// Runs the sublattice test, the minimizer pre-filter (exact mode), the sign
/// test on second differentials and the expansion test.
pub fn check_representability(
    order: &RotationOrder,
    family: &Family,
    objective: &Objective,
    mode: CheckMode,
) -> Result<Verdict, FrameworkError> {
    let (members, downgraded, sampled) = match mode {
        CheckMode::Exact { cap } => match family.members(order, cap) {
            Ok(m) => (Some(m), false, None),
            Err(FrameworkError::Lattice(LatticeError::LimitExceeded { .. })) if matches!(family, Family::All) => {
                (None, true, Some((1000, 0)))
            }
            Err(e) => return Err(e),
        },
        CheckMode::Sampled { k, seed } => match family {
            Family::All => (None, false, Some((k, seed))),
            _ => (Some(family.members(order, DEFAULT_CAP)?), false, Some((k, seed))),
        },
    };
    if let Some(m) = &members {
        if m.is_empty() {
            return Err(FrameworkError::EmptyFamily);
        }
        if !matches!(family, Family::All) {
            if let Some(v) = find_violation(m) {
                return Ok(Verdict::NotRepresentable(Certificate::NotSublattice(v)));
            }
        }
    }
    let meta = match (&members, family) {
        (_, Family::All) | (None, _) => MetaRotations::all(order),
        (Some(m), _) => MetaRotations::from_members(order.len(), m),
    };
    let tables = differentials(order, &meta, objective)?;
    let mut ev = Evaluator::new(order, &meta, objective);

    if sampled.is_none() {
        let m = members.as_ref().expect("exact mode has members");
        let mut values = Vec::with_capacity(m.len());
        for u in m {
            values.push(ev.eval(u)?);
        }
        let best = values.iter().min().expect("non-empty").clone();
        let minima: Vec<UpSet> = m.iter().zip(&values).filter(|(_, v)| **v == best).map(|(u, _)| u.clone()).collect();
        if let Some(v) = find_violation(&minima) {
            return Ok(Verdict::NotRepresentable(Certificate::MinimaNotSublattice(v)));
        }
    }
    if let Some(((i, j), value)) = tables.second.iter().find(|(_, x)| *x < &Rational::zero()) {
        return Ok(Verdict::NotRepresentable(Certificate::NegativeSecond {
            i: *i,
            j: *j,
            rotations: (meta.rep(*i), meta.rep(*j)),
            value: value.clone(),
        }));
    }
    let checked = match sampled {
        None => members.expect("exact mode has members"),
        Some((k, seed)) => match &members {
            Some(m) => {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                (0..k).map(|_| m[rng.gen_range(0..m.len())].clone()).collect()
            }
            None => sample_members(family, &meta, k, seed),
        },
    };
    if let Some(c) = check_expansion(&mut ev, &meta, &tables, &checked)? {
        return Ok(Verdict::NotRepresentable(c));
    }
    let bundle = build_cut_digraph(&meta, &tables, None)?;
    Ok(match sampled {
        None => Verdict::Representable(bundle),
        Some(_) => Verdict::Consistent { bundle, downgraded },
    })
}
