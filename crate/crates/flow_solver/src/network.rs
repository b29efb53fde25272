use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use thiserror::Error;

use crate::dinic::{Dinic, FlowNum};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Vertex {
    Source,
    Sink,
    Node(usize),
}

impl fmt::Display for Vertex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Vertex::Source => write!(f, "s"),
            Vertex::Sink => write!(f, "t"),
            Vertex::Node(i) => write!(f, "{i}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Capacity {
    Finite(BigRational),
    Infinite,
}

impl Capacity {
    pub fn finite(r: BigRational) -> Self {
        Capacity::Finite(r)
    }

    pub fn from_int(x: i64) -> Self {
        Capacity::Finite(BigRational::from_integer(x.into()))
    }

    pub fn is_infinite(&self) -> bool {
        matches!(self, Capacity::Infinite)
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, Capacity::Finite(r) if r.is_zero())
    }

    pub fn as_finite(&self) -> Option<&BigRational> {
        match self {
            Capacity::Finite(r) => Some(r),
            Capacity::Infinite => None,
        }
    }

    pub fn add(&self, other: &Capacity) -> Capacity {
        match (self, other) {
            (Capacity::Finite(a), Capacity::Finite(b)) => Capacity::Finite(a + b),
            _ => Capacity::Infinite,
        }
    }
}

impl fmt::Display for Capacity {
    /// `p/q`, an integer, or `inf`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Capacity::Finite(r) => write!(f, "{r}"),
            Capacity::Infinite => write!(f, "inf"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Arc {
    pub tail: Vertex,
    pub head: Vertex,
    pub cap: Capacity,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FlowError {
    #[error("arc {index} has negative capacity")]
    NegativeCapacity { index: usize },
    #[error("arc {index} enters the source or leaves the sink")]
    BadEndpoint { index: usize },
    #[error("arc {index} uses vertex {vertex} but the network has {nodes} inner vertices")]
    UnknownVertex { index: usize, vertex: usize, nodes: usize },
}

/// A capacitated digraph on `s`, `t` and inner vertices `0..nodes`.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct FlowNetwork {
    pub nodes: usize,
    pub arcs: Vec<Arc>,
}

impl FlowNetwork {
    pub fn new(nodes: usize) -> Self {
        FlowNetwork { nodes, arcs: Vec::new() }
    }

    pub fn add(&mut self, tail: Vertex, head: Vertex, cap: Capacity) {
        self.arcs.push(Arc { tail, head, cap });
    }

    pub fn validate(&self) -> Result<(), FlowError> {
        for (index, arc) in self.arcs.iter().enumerate() {
            if arc.head == Vertex::Source || arc.tail == Vertex::Sink {
                return Err(FlowError::BadEndpoint { index });
            }
            for v in [arc.tail, arc.head] {
                if let Vertex::Node(vertex) = v {
                    if vertex >= self.nodes {
                        return Err(FlowError::UnknownVertex { index, vertex, nodes: self.nodes });
                    }
                }
            }
            if let Capacity::Finite(r) = &arc.cap {
                if r.is_negative() {
                    return Err(FlowError::NegativeCapacity { index });
                }
            }
        }
        Ok(())
    }

    fn index(&self, v: Vertex) -> usize {
        match v {
            Vertex::Source => 0,
            Vertex::Sink => 1,
            Vertex::Node(i) => i + 2,
        }
    }

    /// Drops arcs of capacity zero.
    pub fn prune_zero(&self) -> FlowNetwork {
        FlowNetwork { nodes: self.nodes, arcs: self.arcs.iter().filter(|a| !a.cap.is_zero()).cloned().collect() }
    }
}

/// Sums parallel arcs; arcs come out sorted by (tail, head).
pub fn merge_parallel_arcs(net: &FlowNetwork) -> FlowNetwork {
    let mut merged: BTreeMap<(Vertex, Vertex), Capacity> = BTreeMap::new();
    for arc in &net.arcs {
        merged.entry((arc.tail, arc.head)).and_modify(|c| *c = c.add(&arc.cap)).or_insert_with(|| arc.cap.clone());
    }
    FlowNetwork {
        nodes: net.nodes,
        arcs: merged.into_iter().map(|((tail, head), cap)| Arc { tail, head, cap }).collect(),
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CutResult {
    /// Minimum cut value; `Infinite` when every cut crosses an infinite arc.
    pub value: Capacity,
    /// Vertices reachable from the source in the final residual graph.
    pub source_side: Vec<Vertex>,
    /// Flow on each input arc, in input order. Flow on infinite arcs is finite.
    pub flow: Vec<BigRational>,
}

impl CutResult {
    pub fn contains(&self, v: Vertex) -> bool {
        self.source_side.binary_search(&v).is_ok()
    }

    /// Inner vertices on the source side.
    pub fn inner(&self) -> Vec<usize> {
        self.source_side
            .iter()
            .filter_map(|v| match v {
                Vertex::Node(i) => Some(*i),
                _ => None,
            })
            .collect()
    }
}

/// Capacity of the arcs leaving `side`. The source is always on the source
/// side and the sink never is, whatever `side` says.
pub fn cut_value(net: &FlowNetwork, side: &[Vertex]) -> Capacity {
    let mut inside = vec![false; net.nodes + 2];
    for &v in side {
        inside[net.index(v)] = true;
    }
    inside[0] = true;
    inside[1] = false;
    let mut total = Capacity::Finite(BigRational::zero());
    for arc in &net.arcs {
        if inside[net.index(arc.tail)] && !inside[net.index(arc.head)] {
            total = total.add(&arc.cap);
        }
    }
    total
}

fn run<T: FlowNum>(net: &FlowNetwork, caps: Vec<T>, infinity: T) -> (T, Vec<bool>, Vec<T>) {
    let mut d = Dinic::new(net.nodes + 2);
    for (arc, cap) in net.arcs.iter().zip(caps) {
        d.add_arc(net.index(arc.tail), net.index(arc.head), cap);
    }
    let value = d.max_flow(0, 1, infinity);
    (value, d.residual_reach(0), d.arc_flows())
}

/// Maximum flow and the canonical (source-minimal) minimum cut.
pub fn solve_min_cut(net: &FlowNetwork) -> Result<CutResult, FlowError> {
    net.validate()?;
    let mut scale = BigInt::one();
    for arc in &net.arcs {
        if let Capacity::Finite(r) = &arc.cap {
            scale = scale.lcm(r.denom());
        }
    }
    let scaled: Vec<Option<BigInt>> = net
        .arcs
        .iter()
        .map(|a| a.cap.as_finite().map(|r| (r * BigRational::from_integer(scale.clone())).to_integer()))
        .collect();
    let finite_sum: BigInt = scaled.iter().flatten().sum();
    // Infinite arcs get 1 + (sum of finite capacities), in scaled units.
    let big_m = &scale + &finite_sum;
    let int_caps: Vec<BigInt> = scaled.into_iter().map(|c| c.unwrap_or_else(|| big_m.clone())).collect();
    let bound: BigInt = int_caps.iter().sum::<BigInt>() + BigInt::one();

    let (value, reach, flows): (BigInt, Vec<bool>, Vec<BigInt>) = match bound.to_i128() {
        Some(b) if b < i128::MAX / 4 => {
            let caps = int_caps.iter().map(|c| c.to_i128().unwrap()).collect();
            let (v, r, f) = run::<i128>(net, caps, b);
            (v.into(), r, f.into_iter().map(BigInt::from).collect())
        }
        _ => run::<BigInt>(net, int_caps, bound),
    };

    let mut source_side: Vec<Vertex> = vec![Vertex::Source];
    source_side.extend((0..net.nodes).filter(|&i| reach[i + 2]).map(Vertex::Node));
    source_side.sort();
    let unscale = |x: BigInt| BigRational::new(x, scale.clone());
    let value = if value >= big_m { Capacity::Infinite } else { Capacity::Finite(unscale(value)) };
    Ok(CutResult { value, source_side, flow: flows.into_iter().map(unscale).collect() })
}
