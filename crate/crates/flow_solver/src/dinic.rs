//! Dinic's blocking-flow algorithm over an integer-like capacity type.

use std::collections::VecDeque;
use std::ops::{Add, Sub};

pub(crate) trait FlowNum: Clone + Ord + Add<Output = Self> + Sub<Output = Self> {
    fn zero() -> Self;
}

impl FlowNum for i128 {
    fn zero() -> Self {
        0
    }
}

impl FlowNum for num_bigint::BigInt {
    fn zero() -> Self {
        num_traits::Zero::zero()
    }
}

struct Edge<T> {
    to: usize,
    rev: usize,
    cap: T,
}

pub(crate) struct Dinic<T> {
    graph: Vec<Vec<Edge<T>>>,
    /// (vertex, index) of the forward edge of every added arc.
    handles: Vec<(usize, usize)>,
    original: Vec<T>,
}

impl<T: FlowNum> Dinic<T> {
    pub fn new(n: usize) -> Self {
        Dinic { graph: (0..n).map(|_| Vec::new()).collect(), handles: Vec::new(), original: Vec::new() }
    }

    pub fn add_arc(&mut self, u: usize, v: usize, cap: T) {
        let iu = self.graph[u].len();
        let iv = self.graph[v].len() + usize::from(u == v);
        self.graph[u].push(Edge { to: v, rev: iv, cap: cap.clone() });
        self.graph[v].push(Edge { to: u, rev: iu, cap: T::zero() });
        self.handles.push((u, iu));
        self.original.push(cap);
    }

    fn levels(&self, s: usize) -> Vec<usize> {
        let mut level = vec![usize::MAX; self.graph.len()];
        level[s] = 0;
        let mut queue = VecDeque::from([s]);
        while let Some(u) = queue.pop_front() {
            for e in &self.graph[u] {
                if e.cap > T::zero() && level[e.to] == usize::MAX {
                    level[e.to] = level[u] + 1;
                    queue.push_back(e.to);
                }
            }
        }
        level
    }

    fn push(&mut self, u: usize, t: usize, limit: T, level: &[usize], it: &mut [usize]) -> T {
        if u == t {
            return limit;
        }
        while it[u] < self.graph[u].len() {
            let (to, cap) = {
                let e = &self.graph[u][it[u]];
                (e.to, e.cap.clone())
            };
            if cap > T::zero() && level[to] == level[u] + 1 {
                let want = if cap < limit { cap } else { limit.clone() };
                let got = self.push(to, t, want, level, it);
                if got > T::zero() {
                    let rev = self.graph[u][it[u]].rev;
                    let e = &mut self.graph[u][it[u]];
                    e.cap = e.cap.clone() - got.clone();
                    let r = &mut self.graph[to][rev];
                    r.cap = r.cap.clone() + got.clone();
                    return got;
                }
            }
            it[u] += 1;
        }
        T::zero()
    }

    /// Runs to completion; `infinity` must exceed any possible flow.
    pub fn max_flow(&mut self, s: usize, t: usize, infinity: T) -> T {
        let mut total = T::zero();
        loop {
            let level = self.levels(s);
            if level[t] == usize::MAX {
                return total;
            }
            let mut it = vec![0; self.graph.len()];
            loop {
                let f = self.push(s, t, infinity.clone(), &level, &mut it);
                if f == T::zero() {
                    break;
                }
                total = total + f;
            }
        }
    }

    /// Vertices reachable from `s` in the residual graph.
    pub fn residual_reach(&self, s: usize) -> Vec<bool> {
        let level = self.levels(s);
        level.iter().map(|&l| l != usize::MAX).collect()
    }

    pub fn arc_flows(&self) -> Vec<T> {
        self.handles
            .iter()
            .zip(&self.original)
            .map(|(&(u, i), cap)| cap.clone() - self.graph[u][i].cap.clone())
            .collect()
    }
}
