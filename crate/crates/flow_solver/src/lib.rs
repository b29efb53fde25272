//! Exact max-flow / min-cut on digraphs with a source, a sink, numbered inner
//! vertices and capacities that are non-negative rationals or infinite.

mod dinic;
pub mod network;

pub use network::{
    cut_value, merge_parallel_arcs, solve_min_cut, Arc, Capacity, CutResult, FlowError, FlowNetwork, Vertex,
};
