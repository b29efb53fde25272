//! Same-activity placement when siblings share their activity order.
//!
//! Each pair contributes a sum of implied-rotation constraints ("θ is
//! eliminated iff θ̄ is"), one per activity threshold, or a small linear
//! objective when the siblings have at most one reachable activity in common.

use flow_solver::{Capacity, FlowNetwork, Vertex};
use matching_core::{Instance, Matching, OUTSIDE};
use mincut_framework::{
    build_cut_digraph, conic_combine, differentials, int, solve_bundle, CutBundle, LinearWeights, MetaRotations,
    Objective,
};
use rotation_lattice::{rotation_order, RotationOrder};

use crate::{ActivityStructure, SiblingError};

/// One side of an implied-rotation constraint.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum IrpEnd {
    Rotation(usize),
    /// Eliminated in every stable matching.
    Empty,
    /// Never eliminated.
    Infinity,
}

/// Rotation `theta` is eliminated iff `theta_bar` is.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct IrpSpec {
    pub theta: IrpEnd,
    pub theta_bar: IrpEnd,
}

/// Digraph whose finite cut at an upset is 0 exactly when the upset meets
/// the constraint and 1 otherwise.
pub fn irp_digraph(order: &RotationOrder, spec: IrpSpec) -> Result<CutBundle, SiblingError> {
    let mut net = FlowNetwork::new(order.len());
    for &(upper, lower) in order.hasse() {
        net.add(Vertex::Node(lower), Vertex::Node(upper), Capacity::Infinite);
    }
    let one = || Capacity::from_int(1);
    match (spec.theta, spec.theta_bar) {
        (IrpEnd::Rotation(x), IrpEnd::Rotation(y)) => {
            net.add(Vertex::Node(x), Vertex::Node(y), one());
            net.add(Vertex::Node(y), Vertex::Node(x), one());
        }
        (IrpEnd::Empty, IrpEnd::Rotation(x)) | (IrpEnd::Rotation(x), IrpEnd::Empty) => {
            net.add(Vertex::Source, Vertex::Node(x), one());
        }
        (IrpEnd::Infinity, IrpEnd::Rotation(x)) | (IrpEnd::Rotation(x), IrpEnd::Infinity) => {
            net.add(Vertex::Node(x), Vertex::Sink, one());
        }
        _ => return Err(SiblingError::BothSentinels),
    }
    Ok(CutBundle { network: net, gamma: int(0), constant: int(0), meta: MetaRotations::all(order) })
}

/// The constraints of one pair, or a linear objective in the degenerate cases.
#[derive(Debug, Clone, PartialEq)]
pub enum PairFamily {
    Irp(Vec<IrpSpec>),
    Linear(LinearWeights),
}

/// Position of each student's activities in the pair's merged order, the
/// starting activity and the rotation entering each later one.
struct Track {
    start: Option<usize>,
    entries: Vec<(usize, usize)>,
}

impl Track {
    fn new(order: &RotationOrder, acts: &ActivityStructure, rank: &[usize], a: usize) -> Self {
        let start = acts.activity(order.m0.partner(a)).map(|j| rank[j]);
        let entries = order
            .rotations
            .iter()
            .enumerate()
            .filter_map(|(id, rho)| rho.minus_of(a).map(|b| (rank[acts.activity_of[b]], id)))
            .collect();
        Track { start, entries }
    }

    fn reachable(&self) -> Vec<usize> {
        self.start.into_iter().chain(self.entries.iter().map(|e| e.0)).collect()
    }

    /// When the student's activity first reaches position `l` or later.
    fn threshold(&self, l: usize) -> IrpEnd {
        match self.start {
            Some(s) if s >= l => IrpEnd::Empty,
            _ => self.entries.iter().find(|e| e.0 >= l).map_or(IrpEnd::Infinity, |e| IrpEnd::Rotation(e.1)),
        }
    }
}

/// Constraints whose joint satisfaction is equivalent to both siblings taking
/// a class of the same activity.
pub fn mssp_pair_family(
    inst: &Instance,
    order: &RotationOrder,
    acts: &ActivityStructure,
    a: usize,
    abar: usize,
) -> PairFamily {
    let merged = acts.merged_order(inst, a, abar);
    let mut rank = vec![0; acts.len()];
    for (p, &j) in merged.iter().enumerate() {
        rank[j] = p;
    }
    let (ta, tb) = (Track::new(order, acts, &rank, a), Track::new(order, acts, &rank, abar));
    let (la, lb) = (ta.reachable(), tb.reachable());
    let common: Vec<usize> = la.iter().copied().filter(|p| lb.contains(p)).collect();
    if common.len() <= 1 {
        let mut w = LinearWeights::zero(inst.num_students(), inst.num_schools());
        for s in [a, abar] {
            w.set(s, OUTSIDE, int(1));
            for b in 0..inst.num_schools() {
                if common.first() != Some(&rank[acts.activity_of[b]]) {
                    w.set(s, Some(b), int(1));
                }
            }
        }
        return PairFamily::Linear(w);
    }
    let low = ta.start.min(tb.start).expect("both students are matched");
    let mut specs: Vec<IrpSpec> = la
        .iter()
        .chain(&lb)
        .filter(|&&l| l > low)
        .map(|&l| IrpSpec { theta: ta.threshold(l), theta_bar: tb.threshold(l) })
        .collect();
    specs.sort();
    specs.dedup();
    PairFamily::Irp(specs)
}

/// Sum of the pair's constraint digraphs: zero exactly on the stable
/// matchings placing both siblings in one activity.
pub fn mssp_pair_objective(
    inst: &Instance,
    order: &RotationOrder,
    acts: &ActivityStructure,
    a: usize,
    abar: usize,
) -> Result<CutBundle, SiblingError> {
    let bundles = match mssp_pair_family(inst, order, acts, a, abar) {
        PairFamily::Irp(specs) => specs.into_iter().map(|s| irp_digraph(order, s)).collect::<Result<Vec<_>, _>>()?,
        PairFamily::Linear(w) => {
            let meta = MetaRotations::all(order);
            let tables = differentials(order, &meta, &Objective::Linear(w))?;
            vec![build_cut_digraph(&meta, &tables, None)?]
        }
    };
    Ok(conic_combine(&bundles, &vec![int(1); bundles.len()])?)
}

/// A stable matching placing every pair in a common activity, or `None`.
pub fn solve_mssp(
    inst: &Instance,
    acts: &ActivityStructure,
    pairs: &[(usize, usize)],
) -> Result<Option<Matching>, SiblingError> {
    acts.check_same_order(inst, pairs)?;
    let order = rotation_order(inst);
    if pairs.is_empty() {
        return Ok(Some(order.m0.clone()));
    }
    let bundles = pairs
        .iter()
        .map(|&(a, abar)| mssp_pair_objective(inst, &order, acts, a, abar))
        .collect::<Result<Vec<_>, _>>()?;
    let combined = conic_combine(&bundles, &vec![int(1); bundles.len()])?;
    let sol = solve_bundle(&order, &combined)?;
    Ok(if sol.value == int(0) { Some(sol.matching) } else { None })
}
