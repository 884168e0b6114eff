//! Immutable digraphs, strong components and component dags.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::set::VertexSet;
use crate::Vertex;

/// A simple digraph: no self-loops, at most one edge per ordered pair.
///
/// Vertex ids are `0..n` in insertion order. Adjacency lists are sorted.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Digraph {
    names: Vec<String>,
    index: HashMap<String, Vertex>,
    out: Vec<Vec<Vertex>>,
    inn: Vec<Vec<Vertex>>,
    m: usize,
}

#[derive(Serialize, Deserialize)]
struct GraphJson {
    vertices: Vec<String>,
    edges: Vec<(String, String)>,
}

impl Digraph {
    /// Build from names and an edge list. Parallel edges collapse; self-loops
    /// and out-of-range endpoints are errors.
    pub fn from_edges(names: Vec<String>, edges: &[(Vertex, Vertex)]) -> Result<Self> {
        let n = names.len();
        let mut index = HashMap::with_capacity(n);
        for (i, s) in names.iter().enumerate() {
            if index.insert(s.clone(), i).is_some() {
                return Err(Error::Parse(format!("duplicate vertex {s}")));
            }
        }
        let mut out = vec![Vec::new(); n];
        let mut inn = vec![Vec::new(); n];
        for &(u, v) in edges {
            if u >= n || v >= n {
                return Err(Error::DanglingEndpoint(format!("{}", u.max(v))));
            }
            if u == v {
                return Err(Error::SelfLoop(names[u].clone()));
            }
            out[u].push(v);
            inn[v].push(u);
        }
        let mut m = 0;
        for l in out.iter_mut().chain(inn.iter_mut()) {
            l.sort_unstable();
            l.dedup();
        }
        for l in &out {
            m += l.len();
        }
        Ok(Digraph { names, index, out, inn, m })
    }

    /// Vertices named `0..n` by their ids.
    pub fn with_ids(n: usize, edges: &[(Vertex, Vertex)]) -> Result<Self> {
        Self::from_edges((0..n).map(|i| i.to_string()).collect(), edges)
    }

    /// The graph from a JSON or edge-list text; JSON if the first non-blank
    /// character is `{`.
    pub fn parse(text: &str) -> Result<Self> {
        if text.trim_start().starts_with('{') {
            Self::parse_json(text)
        } else {
            Self::parse_edge_list(text)
        }
    }

    pub fn parse_json(text: &str) -> Result<Self> {
        let g: GraphJson = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        let mut index = HashMap::new();
        for (i, s) in g.vertices.iter().enumerate() {
            if index.insert(s.as_str(), i).is_some() {
                return Err(Error::Parse(format!("duplicate vertex {s}")));
            }
        }
        let mut seen = HashSet::new();
        let mut edges = Vec::with_capacity(g.edges.len());
        for (a, b) in &g.edges {
            let u = *index.get(a.as_str()).ok_or_else(|| Error::DanglingEndpoint(a.clone()))?;
            let v = *index.get(b.as_str()).ok_or_else(|| Error::DanglingEndpoint(b.clone()))?;
            if u == v {
                return Err(Error::SelfLoop(a.clone()));
            }
            if !seen.insert((u, v)) {
                return Err(Error::DuplicateEdge(a.clone(), b.clone()));
            }
            edges.push((u, v));
        }
        Self::from_edges(g.vertices, &edges)
    }

    /// One `tail head` pair per line; `#` starts a comment.
    pub fn parse_edge_list(text: &str) -> Result<Self> {
        let mut names: Vec<String> = Vec::new();
        let mut index: HashMap<String, Vertex> = HashMap::new();
        let mut seen = HashSet::new();
        let mut edges = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let toks: Vec<&str> = line.split_whitespace().collect();
            if toks.len() != 2 {
                return Err(Error::Parse(format!("line {}: expected `tail head`, got {line:?}", lineno + 1)));
            }
            let mut id = |s: &str| -> Vertex {
                if let Some(&i) = index.get(s) {
                    return i;
                }
                names.push(s.to_string());
                index.insert(s.to_string(), names.len() - 1);
                names.len() - 1
            };
            let u = id(toks[0]);
            let v = id(toks[1]);
            if u == v {
                return Err(Error::SelfLoop(toks[0].to_string()));
            }
            if !seen.insert((u, v)) {
                return Err(Error::DuplicateEdge(toks[0].to_string(), toks[1].to_string()));
            }
            edges.push((u, v));
        }
        Self::from_edges(names, &edges)
    }

    pub fn to_json(&self) -> String {
        let g = GraphJson {
            vertices: self.names.clone(),
            edges: self.edges().map(|(u, v)| (self.names[u].clone(), self.names[v].clone())).collect(),
        };
        serde_json::to_string(&g).expect("graph serializes")
    }

    pub fn to_edge_list(&self) -> String {
        let mut s = String::new();
        for (u, v) in self.edges() {
            let _ = writeln!(s, "{} {}", self.names[u], self.names[v]);
        }
        s
    }

    pub fn to_dot(&self) -> String {
        let mut s = String::from("digraph G {\n");
        for name in &self.names {
            let _ = writeln!(s, "  {name:?};");
        }
        for (u, v) in self.edges() {
            let _ = writeln!(s, "  {:?} -> {:?};", self.names[u], self.names[v]);
        }
        s.push_str("}\n");
        s
    }

    pub fn n(&self) -> usize {
        self.names.len()
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn vertices(&self) -> std::ops::Range<Vertex> {
        0..self.n()
    }

    pub fn edges(&self) -> impl Iterator<Item = (Vertex, Vertex)> + '_ {
        self.out.iter().enumerate().flat_map(|(u, l)| l.iter().map(move |&v| (u, v)))
    }

    pub fn out_neighbours(&self, v: Vertex) -> &[Vertex] {
        &self.out[v]
    }

    pub fn in_neighbours(&self, v: Vertex) -> &[Vertex] {
        &self.inn[v]
    }

    pub fn has_edge(&self, u: Vertex, v: Vertex) -> bool {
        self.out[u].binary_search(&v).is_ok()
    }

    pub fn name(&self, v: Vertex) -> &str {
        &self.names[v]
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn id(&self, name: &str) -> Option<Vertex> {
        self.index.get(name).copied()
    }

    pub fn id_or_err(&self, name: &str) -> Result<Vertex> {
        self.id(name).ok_or_else(|| Error::NotFound(name.to_string()))
    }

    pub fn empty_set(&self) -> VertexSet {
        VertexSet::new(self.n())
    }

    pub fn full_set(&self) -> VertexSet {
        VertexSet::full(self.n())
    }

    pub fn set_of<I: IntoIterator<Item = Vertex>>(&self, it: I) -> VertexSet {
        VertexSet::from_iter(self.n(), it)
    }

    pub fn set_names(&self, s: &VertexSet) -> Vec<String> {
        s.iter().map(|v| self.names[v].clone()).collect()
    }

    pub fn set_from_names<S: AsRef<str>>(&self, names: &[S]) -> Result<VertexSet> {
        let mut s = self.empty_set();
        for nm in names {
            s.insert(self.id_or_err(nm.as_ref())?);
        }
        Ok(s)
    }

    /// The digraph with every edge reversed; ids and names unchanged.
    pub fn reverse(&self) -> Digraph {
        Digraph { names: self.names.clone(), index: self.index.clone(), out: self.inn.clone(), inn: self.out.clone(), m: self.m }
    }

    /// `G[keep]` with vertices renumbered in increasing id order; also
    /// returns the new-to-old id map.
    pub fn induced(&self, keep: &VertexSet) -> (Digraph, Vec<Vertex>) {
        let map: Vec<Vertex> = keep.iter().collect();
        let mut back = vec![usize::MAX; self.n()];
        for (i, &v) in map.iter().enumerate() {
            back[v] = i;
        }
        let mut edges = Vec::new();
        for &u in &map {
            for &v in &self.out[u] {
                if back[v] != usize::MAX {
                    edges.push((back[u], back[v]));
                }
            }
        }
        let names = map.iter().map(|&v| self.names[v].clone()).collect();
        (Digraph::from_edges(names, &edges).expect("induced subgraph is simple"), map)
    }

    /// Split `v`: remove it, add `v_in -> v_out`, redirect in-edges to
    /// `v_in` and out-edges from `v_out`. The new vertices get the two
    /// largest ids; other vertices keep their relative order.
    pub fn split_vertex(&self, v: Vertex) -> Result<Digraph> {
        if v >= self.n() {
            return Err(Error::NotFound(v.to_string()));
        }
        let n = self.n();
        let shift = |u: Vertex| if u > v { u - 1 } else { u };
        let vin = n - 1;
        let vout = n;
        let mut names: Vec<String> = self.names.iter().enumerate().filter(|&(u, _)| u != v).map(|(_, s)| s.clone()).collect();
        names.push(self.fresh_name(&format!("{}_in", self.names[v])));
        names.push(self.fresh_name(&format!("{}_out", self.names[v])));
        let mut edges = vec![(vin, vout)];
        for (a, b) in self.edges() {
            match (a == v, b == v) {
                (false, false) => edges.push((shift(a), shift(b))),
                (true, false) => edges.push((vout, shift(b))),
                (false, true) => edges.push((shift(a), vin)),
                (true, true) => unreachable!(),
            }
        }
        Digraph::from_edges(names, &edges)
    }

    fn fresh_name(&self, base: &str) -> String {
        let mut s = base.to_string();
        while self.index.contains_key(&s) {
            s.push('\'');
        }
        s
    }

    /// Replace each planned edge by a directed path with `len` edges. New
    /// vertices are appended in plan order and named `u~v~i`.
    pub fn subdivide(&self, plan: &BTreeMap<(Vertex, Vertex), usize>) -> Result<Digraph> {
        for (&(u, v), &len) in plan {
            if u >= self.n() || v >= self.n() || !self.has_edge(u, v) {
                return Err(Error::UnknownEdge(u.to_string(), v.to_string()));
            }
            if len == 0 {
                return Err(Error::Invalid(format!("subdivision length 0 for edge {u}->{v}")));
            }
        }
        let mut names = self.names.clone();
        let mut edges = Vec::with_capacity(self.m);
        let mut taken: HashSet<String> = names.iter().cloned().collect();
        for (u, v) in self.edges() {
            let len = plan.get(&(u, v)).copied().unwrap_or(1);
            let mut prev = u;
            for i in 1..len {
                let mut nm = format!("{}~{}~{}", self.names[u], self.names[v], i);
                while taken.contains(&nm) {
                    nm.push('\'');
                }
                taken.insert(nm.clone());
                names.push(nm);
                let w = names.len() - 1;
                edges.push((prev, w));
                prev = w;
            }
            edges.push((prev, v));
        }
        Digraph::from_edges(names, &edges)
    }

    /// Vertices reachable from `from` using only vertices in `allowed`
    /// (sources outside `allowed` are ignored).
    pub fn reach(&self, from: &VertexSet, allowed: &VertexSet) -> VertexSet {
        self.reach_dir(from, allowed, true)
    }

    /// Vertices that can reach `to` inside `allowed`.
    pub fn coreach(&self, to: &VertexSet, allowed: &VertexSet) -> VertexSet {
        self.reach_dir(to, allowed, false)
    }

    fn reach_dir(&self, from: &VertexSet, allowed: &VertexSet, forward: bool) -> VertexSet {
        let mut seen = from.intersection(allowed);
        let mut stack: Vec<Vertex> = seen.iter().collect();
        while let Some(u) = stack.pop() {
            let nb = if forward { &self.out[u] } else { &self.inn[u] };
            for &w in nb {
                if allowed.contains(w) && seen.insert(w) {
                    stack.push(w);
                }
            }
        }
        seen
    }

    /// Strong components of the whole graph, sorted by smallest member.
    pub fn strong_components(&self) -> Vec<VertexSet> {
        self.strong_components_within(&self.full_set())
    }

    /// Strong components of `G[allowed]`, sorted by smallest member.
    pub fn strong_components_within(&self, allowed: &VertexSet) -> Vec<VertexSet> {
        let labels = self.scc_labels(allowed);
        let mut comps: Vec<VertexSet> = Vec::new();
        let mut slot: HashMap<usize, usize> = HashMap::new();
        for v in allowed.iter() {
            let l = labels[v];
            let i = *slot.entry(l).or_insert_with(|| {
                comps.push(VertexSet::new(self.n()));
                comps.len() - 1
            });
            comps[i].insert(v);
        }
        // Allowed vertices are visited in increasing order, so comps is
        // already sorted by smallest member.
        comps
    }

    /// Iterative Tarjan; returns a component label per vertex (usize::MAX
    /// outside `allowed`).
    fn scc_labels(&self, allowed: &VertexSet) -> Vec<usize> {
        let n = self.n();
        const NONE: usize = usize::MAX;
        let mut index = vec![NONE; n];
        let mut low = vec![0usize; n];
        let mut on_stack = vec![false; n];
        let mut label = vec![NONE; n];
        let mut stack: Vec<Vertex> = Vec::new();
        let mut call: Vec<(Vertex, usize)> = Vec::new();
        let mut next = 0usize;
        let mut nlabels = 0usize;
        for root in allowed.iter() {
            if index[root] != NONE {
                continue;
            }
            call.push((root, 0));
            index[root] = next;
            low[root] = next;
            next += 1;
            stack.push(root);
            on_stack[root] = true;
            while let Some(&(v, pos)) = call.last() {
                let nb = &self.out[v];
                if pos < nb.len() {
                    let w = nb[pos];
                    call.last_mut().expect("frame").1 += 1;
                    if !allowed.contains(w) {
                        continue;
                    }
                    if index[w] == NONE {
                        index[w] = next;
                        low[w] = next;
                        next += 1;
                        stack.push(w);
                        on_stack[w] = true;
                        call.push((w, 0));
                    } else if on_stack[w] {
                        low[v] = low[v].min(index[w]);
                    }
                } else {
                    call.pop();
                    if let Some(&(p, _)) = call.last() {
                        low[p] = low[p].min(low[v]);
                    }
                    if low[v] == index[v] {
                        loop {
                            let w = stack.pop().expect("tarjan stack");
                            on_stack[w] = false;
                            label[w] = nlabels;
                            if w == v {
                                break;
                            }
                        }
                        nlabels += 1;
                    }
                }
            }
        }
        label
    }

    pub fn is_strongly_connected_set(&self, s: &VertexSet) -> bool {
        if s.is_empty() {
            return false;
        }
        self.strong_components_within(s).len() == 1
    }

    /// The component dag of `G - x`.
    pub fn component_dag(&self, x: &VertexSet) -> ComponentDag {
        let allowed = x.complement();
        let comps = self.strong_components_within(&allowed);
        let mut comp_of = vec![usize::MAX; self.n()];
        for (i, c) in comps.iter().enumerate() {
            for v in c.iter() {
                comp_of[v] = i;
            }
        }
        let l = comps.len();
        let mut succ: Vec<Vec<usize>> = vec![Vec::new(); l];
        let mut pred: Vec<Vec<usize>> = vec![Vec::new(); l];
        for (u, v) in self.edges() {
            let (a, b) = (comp_of[u], comp_of[v]);
            if a != usize::MAX && b != usize::MAX && a != b {
                succ[a].push(b);
                pred[b].push(a);
            }
        }
        for s in succ.iter_mut().chain(pred.iter_mut()) {
            s.sort_unstable();
            s.dedup();
        }
        // Heights via reverse topological processing (Kahn on out-degrees).
        let mut height = vec![0usize; l];
        let mut outdeg: Vec<usize> = succ.iter().map(|s| s.len()).collect();
        let mut queue: Vec<usize> = (0..l).filter(|&i| outdeg[i] == 0).collect();
        let mut qi = 0;
        while qi < queue.len() {
            let c = queue[qi];
            qi += 1;
            for &p in &pred[c] {
                height[p] = height[p].max(height[c] + 1);
                outdeg[p] -= 1;
                if outdeg[p] == 0 {
                    queue.push(p);
                }
            }
        }
        let mut topo: Vec<usize> = (0..l).collect();
        topo.sort_by_key(|&i| (height[i], i));
        let mut rank = vec![0; l];
        for (r, &c) in topo.iter().enumerate() {
            rank[c] = r;
        }
        ComponentDag { comps, comp_of, succ, pred, height, topo, rank }
    }
}

/// The component dag 𝒟(G, X).
///
/// `comps` is sorted by smallest member; `topo` lists component indices as
/// `C_1 < ... < C_l` by increasing height (ties by index), so `topo[0]` is a
/// sink.
#[derive(Clone, Debug)]
pub struct ComponentDag {
    pub comps: Vec<VertexSet>,
    /// Component index per vertex; `usize::MAX` for vertices of X.
    pub comp_of: Vec<usize>,
    pub succ: Vec<Vec<usize>>,
    pub pred: Vec<Vec<usize>>,
    pub height: Vec<usize>,
    pub topo: Vec<usize>,
    /// Position of each component in `topo`.
    pub rank: Vec<usize>,
}

impl ComponentDag {
    pub fn len(&self) -> usize {
        self.comps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.comps.is_empty()
    }

    /// All out-neighbours of members are members.
    pub fn is_downward_closed(&self, set: &[bool]) -> bool {
        (0..self.len()).all(|c| !set[c] || self.succ[c].iter().all(|&d| set[d]))
    }

    pub fn is_upward_closed(&self, set: &[bool]) -> bool {
        (0..self.len()).all(|c| !set[c] || self.pred[c].iter().all(|&d| set[d]))
    }

    pub fn down_closure(&self, seed: &[usize]) -> Vec<bool> {
        self.closure(seed, true)
    }

    pub fn up_closure(&self, seed: &[usize]) -> Vec<bool> {
        self.closure(seed, false)
    }

    fn closure(&self, seed: &[usize], down: bool) -> Vec<bool> {
        let mut set = vec![false; self.len()];
        let mut stack: Vec<usize> = seed.to_vec();
        for &c in seed {
            set[c] = true;
        }
        while let Some(c) = stack.pop() {
            let nb = if down { &self.succ[c] } else { &self.pred[c] };
            for &d in nb {
                if !set[d] {
                    set[d] = true;
                    stack.push(d);
                }
            }
        }
        set
    }

    pub fn vertices_of(&self, set: &[bool], n: usize) -> VertexSet {
        let mut s = VertexSet::new(n);
        for (c, &inside) in set.iter().enumerate() {
            if inside {
                s.union_with(&self.comps[c]);
            }
        }
        s
    }

    /// The order ⊏: compare the members of each set in topo order, smallest
    /// first; a set that runs out first counts as larger (the missing
    /// smallest element behaves like +∞).
    pub fn lex_less(&self, a: &[bool], b: &[bool]) -> bool {
        let seq = |s: &[bool]| -> Vec<usize> { self.topo.iter().filter(|&&c| s[c]).map(|&c| self.rank[c]).collect() };
        let (x, y) = (seq(a), seq(b));
        for i in 0.. {
            match (x.get(i), y.get(i)) {
                (None, None) => return false,
                (Some(_), None) => return true,
                (None, Some(_)) => return false,
                (Some(p), Some(q)) if p != q => return p < q,
                _ => {}
            }
        }
        unreachable!()
    }

    /// Every downward closed set of components, as membership vectors.
    /// Exponential in the number of components.
    pub fn downward_closed_sets(&self) -> Vec<Vec<bool>> {
        let mut out = Vec::new();
        let mut cur = vec![false; self.len()];
        self.down_sets_rec(0, &mut cur, &mut out);
        out
    }

    fn down_sets_rec(&self, i: usize, cur: &mut Vec<bool>, out: &mut Vec<Vec<bool>>) {
        if i == self.topo.len() {
            out.push(cur.clone());
            return;
        }
        let c = self.topo[i];
        self.down_sets_rec(i + 1, cur, out);
        // Successors have smaller height, so they were decided already.
        if self.succ[c].iter().all(|&d| cur[d]) {
            cur[c] = true;
            self.down_sets_rec(i + 1, cur, out);
            cur[c] = false;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn g(n: usize, e: &[(usize, usize)]) -> Digraph {
        Digraph::with_ids(n, e).unwrap()
    }

    #[test]
    fn parse_json_and_errors() {
        let d = Digraph::parse(r#"{"vertices":["a","b"],"edges":[["a","b"]]}"#).unwrap();
        assert_eq!((d.n(), d.m()), (2, 1));
        let d = Digraph::parse(r#"{"vertices":[],"edges":[]}"#).unwrap();
        assert_eq!((d.n(), d.m()), (0, 0));
        let e = Digraph::parse(r#"{"vertices":["a","b"],"edges":[["a","c"]]}"#).unwrap_err();
        assert_eq!(e.to_string(), "dangling endpoint c");
        let e = Digraph::parse(r#"{"vertices":["a"],"edges":[["a","a"]]}"#).unwrap_err();
        assert!(matches!(e, Error::SelfLoop(_)));
        let e = Digraph::parse(r#"{"vertices":["a","b"],"edges":[["a","b"],["a","b"]]}"#).unwrap_err();
        assert!(matches!(e, Error::DuplicateEdge(..)));
    }

    #[test]
    fn edge_list_round_trip() {
        let d = Digraph::parse("x y\ny z # c\n\nz x\n").unwrap();
        assert_eq!(d.names(), &["x", "y", "z"]);
        assert_eq!(Digraph::parse(&d.to_edge_list()).unwrap(), d);
        assert_eq!(Digraph::parse(&d.to_json()).unwrap(), d);
        assert!(d.to_dot().contains("\"x\" -> \"y\""));
    }

    #[test]
    fn split_path_vertex() {
        let d = Digraph::parse("a v\nv b\n").unwrap();
        let s = d.split_vertex(d.id("v").unwrap()).unwrap();
        assert_eq!((s.n(), s.m()), (4, 3));
        let (a, vi, vo, b) = (s.id("a").unwrap(), s.id("v_in").unwrap(), s.id("v_out").unwrap(), s.id("b").unwrap());
        assert!(s.has_edge(a, vi) && s.has_edge(vi, vo) && s.has_edge(vo, b));
    }

    #[test]
    fn split_isolated_and_degree_two() {
        let d = g(1, &[]);
        let s = d.split_vertex(0).unwrap();
        assert_eq!((s.n(), s.m()), (2, 1));
        // v = 0 with in-neighbours 1,2 and out-neighbours 3,4.
        let d = g(5, &[(1, 0), (2, 0), (0, 3), (0, 4), (1, 2)]);
        let s = d.split_vertex(0).unwrap();
        assert_eq!((s.n(), s.m()), (d.n() + 1, d.m() + 1));
        assert!(d.split_vertex(9).is_err());
    }

    #[test]
    fn subdivide_counts() {
        let d = g(2, &[(0, 1)]);
        assert_eq!(d.subdivide(&BTreeMap::new()).unwrap(), d);
        let s = d.subdivide(&BTreeMap::from([((0, 1), 3)])).unwrap();
        assert_eq!((s.n(), s.m()), (4, 3));
        assert!(d.subdivide(&BTreeMap::from([((1, 0), 2)])).is_err());
    }

    #[test]
    fn scc_small_cases() {
        let tri = g(3, &[(0, 1), (1, 0), (1, 2), (2, 1), (0, 2), (2, 0)]);
        assert_eq!(tri.strong_components().len(), 1);
        let c = g(4, &[(0, 1), (1, 2), (2, 0), (2, 3)]);
        let comps = c.strong_components();
        assert_eq!(comps.iter().map(|s| s.to_vec()).collect::<Vec<_>>(), vec![vec![0, 1, 2], vec![3]]);
    }

    #[test]
    fn path_dag_heights() {
        let p = g(3, &[(0, 1), (1, 2)]);
        let dag = p.component_dag(&p.empty_set());
        assert_eq!(dag.height, vec![2, 1, 0]);
        assert_eq!(dag.topo, vec![2, 1, 0]);
        let c = g(3, &[(0, 1), (1, 2), (2, 0)]);
        let dag = c.component_dag(&c.empty_set());
        assert_eq!((dag.len(), dag.height[0]), (1, 0));
    }

    #[test]
    fn lex_order_on_components() {
        let p = g(3, &[(0, 1), (1, 2)]);
        let dag = p.component_dag(&p.empty_set());
        // topo: C_1 = {2}, C_2 = {1}, C_3 = {0}
        let s = |v: &[usize]| {
            let mut b = vec![false; 3];
            for &i in v {
                b[dag.comp_of[i]] = true;
            }
            b
        };
        assert!(dag.lex_less(&s(&[2]), &s(&[1])));
        assert!(dag.lex_less(&s(&[2, 0]), &s(&[2])));
        assert!(!dag.lex_less(&s(&[1]), &s(&[1])));
        assert!(dag.lex_less(&s(&[2, 1]), &s(&[2, 0])));
    }
}
