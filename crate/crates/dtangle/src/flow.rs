//! Vertex-capacitated unit flows (Menger).
//!
//! Every vertex `v` becomes `v_in = 2v` and `v_out = 2v + 1` joined by an arc
//! of capacity 1; graph edges become `u_out -> v_in` arcs of unbounded
//! capacity. The super source feeds every source's `v_in`, every sink's
//! `v_out` drains into the super sink.

use std::collections::VecDeque;

use crate::digraph::Digraph;
use crate::set::VertexSet;
use crate::Vertex;

const INF: i32 = i32::MAX / 4;

pub struct VertexFlow {
    n: usize,
    head: Vec<usize>,
    cap: Vec<i32>,
    adj: Vec<Vec<usize>>,
    source: usize,
    sink: usize,
    pub value: usize,
}

impl VertexFlow {
    /// Maximum number of vertex-disjoint paths from `s` to `t` inside
    /// `allowed`, stopping early once `limit` paths are found.
    pub fn run(g: &Digraph, s: &VertexSet, t: &VertexSet, allowed: &VertexSet, limit: usize) -> Self {
        let n = g.n();
        let nodes = 2 * n + 2;
        let mut f = VertexFlow {
            n,
            head: Vec::with_capacity(4 * (n + g.m())),
            cap: Vec::with_capacity(4 * (n + g.m())),
            adj: vec![Vec::new(); nodes],
            source: 2 * n,
            sink: 2 * n + 1,
            value: 0,
        };
        for v in allowed.iter() {
            f.arc(2 * v, 2 * v + 1, 1);
            for &w in g.out_neighbours(v) {
                if allowed.contains(w) {
                    f.arc(2 * v + 1, 2 * w, INF);
                }
            }
        }
        for v in s.intersection(allowed).iter() {
            f.arc(f.source, 2 * v, INF);
        }
        for v in t.intersection(allowed).iter() {
            f.arc(2 * v + 1, f.sink, INF);
        }
        while f.value < limit && f.augment() {
            f.value += 1;
        }
        f
    }

    fn arc(&mut self, a: usize, b: usize, c: i32) {
        self.adj[a].push(self.head.len());
        self.head.push(b);
        self.cap.push(c);
        self.adj[b].push(self.head.len());
        self.head.push(a);
        self.cap.push(0);
    }

    fn augment(&mut self) -> bool {
        let nodes = self.adj.len();
        let mut via = vec![usize::MAX; nodes];
        let mut seen = vec![false; nodes];
        let mut q = VecDeque::new();
        q.push_back(self.source);
        seen[self.source] = true;
        while let Some(x) = q.pop_front() {
            if x == self.sink {
                break;
            }
            for &e in &self.adj[x] {
                let y = self.head[e];
                if !seen[y] && self.cap[e] > 0 {
                    seen[y] = true;
                    via[y] = e;
                    q.push_back(y);
                }
            }
        }
        if !seen[self.sink] {
            return false;
        }
        let mut x = self.sink;
        while x != self.source {
            let e = via[x];
            self.cap[e] -= 1;
            self.cap[e ^ 1] += 1;
            x = self.head[e ^ 1];
        }
        true
    }

    /// The flow as vertex-disjoint paths, ordered by first vertex.
    pub fn paths(&self) -> Vec<Vec<Vertex>> {
        let mut flow_out: Vec<Vec<usize>> = vec![Vec::new(); self.adj.len()];
        for x in 0..self.adj.len() {
            for &e in &self.adj[x] {
                // Forward arcs have even index; flow = residual of the reverse.
                if e % 2 == 0 && self.cap[e ^ 1] > 0 {
                    flow_out[x].push(e);
                }
            }
        }
        let mut paths = Vec::new();
        let mut starts: Vec<usize> = flow_out[self.source].iter().map(|&e| self.head[e]).collect();
        starts.sort_unstable();
        for start in starts {
            let mut path = Vec::new();
            let mut x = start;
            loop {
                if x == self.sink {
                    break;
                }
                if x % 2 == 0 {
                    path.push(x / 2);
                }
                let Some(&e) = flow_out[x].first() else { break };
                x = self.head[e];
            }
            paths.push(path);
        }
        paths
    }

    /// The minimum cut closest to the sink: vertices whose out-node reaches
    /// the sink in the residual graph but whose in-node does not. Also
    /// returns the set of vertices strictly on the sink side.
    pub fn cut_near_sink(&self) -> (VertexSet, VertexSet) {
        let nodes = self.adj.len();
        let mut seen = vec![false; nodes];
        let mut stack = vec![self.sink];
        seen[self.sink] = true;
        while let Some(x) = stack.pop() {
            for &e in &self.adj[x] {
                // Arc y -> x is e ^ 1; usable backwards if it has residual.
                let y = self.head[e];
                if !seen[y] && self.cap[e ^ 1] > 0 {
                    seen[y] = true;
                    stack.push(y);
                }
            }
        }
        let mut cut = VertexSet::new(self.n);
        let mut side = VertexSet::new(self.n);
        for v in 0..self.n {
            if seen[2 * v] {
                side.insert(v);
            } else if seen[2 * v + 1] {
                cut.insert(v);
            }
        }
        (cut, side)
    }

    /// The minimum cut closest to the source, and the vertices strictly on
    /// the source side.
    pub fn cut_near_source(&self) -> (VertexSet, VertexSet) {
        let nodes = self.adj.len();
        let mut seen = vec![false; nodes];
        let mut stack = vec![self.source];
        seen[self.source] = true;
        while let Some(x) = stack.pop() {
            for &e in &self.adj[x] {
                let y = self.head[e];
                if !seen[y] && self.cap[e] > 0 {
                    seen[y] = true;
                    stack.push(y);
                }
            }
        }
        let mut cut = VertexSet::new(self.n);
        let mut side = VertexSet::new(self.n);
        for v in 0..self.n {
            if seen[2 * v + 1] {
                side.insert(v);
            } else if seen[2 * v] {
                cut.insert(v);
            }
        }
        (cut, side)
    }
}

/// Up to `limit` vertex-disjoint paths from `s` to `t` inside `allowed`.
pub fn disjoint_paths(g: &Digraph, s: &VertexSet, t: &VertexSet, allowed: &VertexSet, limit: usize) -> Vec<Vec<Vertex>> {
    VertexFlow::run(g, s, t, allowed, limit).paths()
}

/// Shortest path from `s` to `t` inside `allowed` (BFS, smallest ids first).
pub fn shortest_path(g: &Digraph, s: Vertex, t: Vertex, allowed: &VertexSet) -> Option<Vec<Vertex>> {
    if !allowed.contains(s) || !allowed.contains(t) {
        return None;
    }
    let mut prev = vec![usize::MAX; g.n()];
    let mut seen = VertexSet::new(g.n());
    seen.insert(s);
    let mut q = VecDeque::from([s]);
    while let Some(u) = q.pop_front() {
        if u == t {
            let mut path = vec![t];
            let mut x = t;
            while x != s {
                x = prev[x];
                path.push(x);
            }
            path.reverse();
            return Some(path);
        }
        for &w in g.out_neighbours(u) {
            if allowed.contains(w) && seen.insert(w) {
                prev[w] = u;
                q.push_back(w);
            }
        }
    }
    None
}
