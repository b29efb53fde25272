//! The cut digraph over rotations and conic combinations of such digraphs.

use flow_solver::{cut_value, merge_parallel_arcs, Capacity, FlowNetwork, Vertex};
use num_traits::{Signed, Zero};
use rotation_lattice::UpSet;

use crate::meta::MetaRotations;
use crate::objective::DiffTables;
use crate::{FrameworkError, Rational};

/// A cut digraph with its offset: finite cut value = f(M_R) + `constant`.
#[derive(Debug, Clone)]
pub struct CutBundle {
    /// Inner vertex `i` is rotation `i`.
    pub network: FlowNetwork,
    pub gamma: Rational,
    pub constant: Rational,
    pub meta: MetaRotations,
}

impl CutBundle {
    /// Proper class of inner vertex `v`, if any.
    pub fn class_of_vertex(&self, v: usize) -> crate::Class {
        self.meta.class_of[v]
    }

    /// Objective value the digraph assigns to `upset`, or `None` when the
    /// cut is infinite.
    pub fn value_at(&self, upset: &UpSet) -> Option<Rational> {
        let side: Vec<Vertex> = upset.ids().map(Vertex::Node).collect();
        cut_value(&self.network, &side).as_finite().map(|v| v - &self.constant)
    }
}

fn half() -> Rational {
    Rational::new(1.into(), 2.into())
}

/// `∂f_θ − ½ Σ_{θ'≠θ} ∂²f_{θ,θ'}` per proper class.
fn sink_terms(tables: &DiffTables) -> Vec<Rational> {
    let mut out = tables.first.clone();
    for ((i, j), x) in &tables.second {
        let h = x * half();
        out[*i] -= &h;
        out[*j] -= &h;
    }
    out
}

/// Smallest γ keeping every sink arc non-negative.
pub fn default_gamma(tables: &DiffTables) -> Rational {
    sink_terms(tables).iter().map(|x| -x).fold(Rational::zero(), |a, b| if b > a { b } else { a })
}

/// Builds the cut digraph. Fails on a negative second differential or a γ
/// below the required minimum.
pub fn build_cut_digraph(
    meta: &MetaRotations,
    tables: &DiffTables,
    gamma: Option<Rational>,
) -> Result<CutBundle, FrameworkError> {
    if tables.len() != meta.len() {
        return Err(FrameworkError::MismatchedBundles);
    }
    if let Some(((i, j), x)) = tables.second.iter().find(|(_, x)| x.is_negative()) {
        return Err(FrameworkError::NotRepresentable(Box::new(crate::Certificate::NegativeSecond {
            i: *i,
            j: *j,
            rotations: (meta.rep(*i), meta.rep(*j)),
            value: x.clone(),
        })));
    }
    let needed = default_gamma(tables);
    let gamma = match gamma {
        Some(g) if g < needed => {
            return Err(FrameworkError::GammaTooSmall { given: Box::new(g), needed: Box::new(needed) })
        }
        Some(g) => g,
        None => needed,
    };
    let mut net = FlowNetwork::new(meta.num_rotations);
    let node = Vertex::Node;
    let clique = |net: &mut FlowNetwork, rs: &[usize]| {
        for &x in rs {
            for &y in rs {
                if x != y {
                    net.add(node(x), node(y), Capacity::Infinite);
                }
            }
        }
    };
    clique(&mut net, &meta.theta0);
    clique(&mut net, &meta.thetaz);
    for rs in &meta.proper {
        clique(&mut net, rs);
    }
    // Lower class to upper class along covers.
    for &(upper, lower) in meta.hasse() {
        net.add(node(meta.rep(lower)), node(meta.rep(upper)), Capacity::Infinite);
    }
    for ((i, j), x) in &tables.second {
        let h = Capacity::Finite(x * half());
        net.add(node(meta.rep(*i)), node(meta.rep(*j)), h.clone());
        net.add(node(meta.rep(*j)), node(meta.rep(*i)), h);
    }
    if let Some(&r) = meta.theta0.first() {
        net.add(Vertex::Source, node(r), Capacity::Infinite);
    }
    if let Some(&r) = meta.thetaz.first() {
        net.add(node(r), Vertex::Sink, Capacity::Infinite);
    }
    for (i, s) in sink_terms(tables).into_iter().enumerate() {
        let rep = node(meta.rep(i));
        net.add(rep, Vertex::Sink, Capacity::Finite(s + &gamma));
        net.add(Vertex::Source, rep, Capacity::Finite(gamma.clone()));
    }
    let constant = -tables.base.clone() + &gamma * Rational::from_integer(meta.len().into());
    Ok(CutBundle { network: net.prune_zero(), gamma, constant, meta: meta.clone() })
}

/// Network with capacities `Σ λᵢ uᵢ` and constant `Σ λᵢ Cᵢ`.
///
/// An infinite arc stays infinite even under a zero coefficient, so the
/// feasibility structure of every bundle is kept.
pub fn conic_combine(bundles: &[CutBundle], coeffs: &[Rational]) -> Result<CutBundle, FrameworkError> {
    if bundles.is_empty() || bundles.len() != coeffs.len() {
        return Err(FrameworkError::MismatchedBundles);
    }
    if let Some(i) = coeffs.iter().position(|c| c.is_negative()) {
        return Err(FrameworkError::NegativeCoefficient { index: i });
    }
    let n = bundles[0].network.nodes;
    if bundles.iter().any(|b| b.network.nodes != n || b.meta != bundles[0].meta) {
        return Err(FrameworkError::MismatchedBundles);
    }
    let mut net = FlowNetwork::new(n);
    let mut constant = Rational::zero();
    let mut gamma = Rational::zero();
    for (b, c) in bundles.iter().zip(coeffs) {
        for arc in &b.network.arcs {
            let cap = match &arc.cap {
                Capacity::Infinite => Capacity::Infinite,
                Capacity::Finite(x) => Capacity::Finite(x * c),
            };
            net.add(arc.tail, arc.head, cap);
        }
        constant += &b.constant * c;
        gamma += &b.gamma * c;
    }
    Ok(CutBundle { network: merge_parallel_arcs(&net).prune_zero(), gamma, constant, meta: bundles[0].meta.clone() })
}
