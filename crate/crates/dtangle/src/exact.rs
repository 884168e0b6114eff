//! Exhaustive search for vertex-disjoint paths.

use std::collections::HashSet;

use crate::digraph::Digraph;
use crate::error::{Error, Result};
use crate::flow::shortest_path;
use crate::set::VertexSet;
use crate::Vertex;

/// Largest host accepted by [`exact_disjoint_paths`].
pub const EXACT_VERTEX_LIMIT: usize = 4096;
/// Largest host accepted with more than three pairs.
pub const EXACT_MANY_PAIRS_LIMIT: usize = 40;
/// Search nodes before giving up.
pub const EXACT_NODE_BUDGET: u64 = 20_000_000;

/// Pairwise vertex-disjoint paths `s_i -> t_i`, or `None` after exhausting
/// the search. Paths are restricted to chordless ones (a forward chord can
/// always be short-cut), pairs are routed most constrained first and failed
/// states are memoized.
pub fn exact_disjoint_paths(g: &Digraph, pairs: &[(Vertex, Vertex)]) -> Result<Option<Vec<Vec<Vertex>>>> {
    let n = g.n();
    if n > EXACT_VERTEX_LIMIT || (pairs.len() > 3 && n > EXACT_MANY_PAIRS_LIMIT) {
        return Err(Error::SizeGuard(format!("exact search on {n} vertices with {} pairs", pairs.len())));
    }
    for &(s, t) in pairs {
        for v in [s, t] {
            if v >= n {
                return Err(Error::NotFound(v.to_string()));
            }
        }
    }
    let mut owner = vec![usize::MAX; n];
    for (i, &(s, t)) in pairs.iter().enumerate() {
        for v in [s, t] {
            if owner[v] != usize::MAX && owner[v] != i {
                return Ok(None);
            }
            owner[v] = i;
        }
    }
    let mut used = VertexSet::new(n);
    let mut result: Vec<Vec<Vertex>> = vec![Vec::new(); pairs.len()];
    let mut open = Vec::new();
    for (i, &(s, t)) in pairs.iter().enumerate() {
        if s == t {
            used.insert(s);
            result[i] = vec![s];
        } else {
            open.push(i);
        }
    }
    let terminals = g.set_of(pairs.iter().flat_map(|&(s, t)| [s, t]));
    let room = |i: usize, used: &VertexSet| -> VertexSet {
        let (s, t) = pairs[i];
        let mut allowed = used.union(&terminals).complement();
        allowed.insert(s);
        allowed.insert(t);
        allowed
    };
    // Most constrained first: fewest vertices on some s_i -> t_i walk.
    let mut width: Vec<(usize, usize)> = open
        .iter()
        .map(|&i| {
            let a = room(i, &used);
            let (s, t) = pairs[i];
            let span = g.reach(&g.set_of([s]), &a).intersection(&g.coreach(&g.set_of([t]), &a));
            (span.len(), i)
        })
        .collect();
    width.sort_unstable();
    if width.iter().any(|&(w, _)| w == 0) {
        return Ok(None);
    }
    let order: Vec<usize> = width.into_iter().map(|(_, i)| i).collect();
    let mut search = Search { g, pairs, order: &order, terminals: &terminals, failed: HashSet::new(), nodes: 0 };
    match search.run(0, &used)? {
        None => Ok(None),
        Some(found) => {
            for (i, p) in order.iter().zip(found) {
                result[*i] = p;
            }
            Ok(Some(result))
        }
    }
}

struct Search<'a> {
    g: &'a Digraph,
    pairs: &'a [(Vertex, Vertex)],
    order: &'a [usize],
    terminals: &'a VertexSet,
    failed: HashSet<(usize, VertexSet)>,
    nodes: u64,
}

impl Search<'_> {
    fn allowed(&self, i: usize, used: &VertexSet) -> VertexSet {
        let (s, t) = self.pairs[i];
        let mut a = used.union(self.terminals).complement();
        a.insert(s);
        a.insert(t);
        a
    }

    fn feasible(&self, depth: usize, used: &VertexSet) -> bool {
        self.order[depth..].iter().all(|&i| {
            let (s, t) = self.pairs[i];
            self.g.reach(&self.g.set_of([s]), &self.allowed(i, used)).contains(t)
        })
    }

    fn run(&mut self, depth: usize, used: &VertexSet) -> Result<Option<Vec<Vec<Vertex>>>> {
        if depth == self.order.len() {
            return Ok(Some(Vec::new()));
        }
        let i = self.order[depth];
        let (s, t) = self.pairs[i];
        let allowed = self.allowed(i, used);
        if depth + 1 == self.order.len() {
            return Ok(shortest_path(self.g, s, t, &allowed).map(|p| vec![p]));
        }
        if self.failed.contains(&(depth, used.clone())) {
            return Ok(None);
        }
        let useful = allowed.intersection(&self.g.coreach(&self.g.set_of([t]), &allowed));
        for path in self.chordless_paths(s, t, &useful)? {
            let mut next = used.clone();
            for &v in &path {
                next.insert(v);
            }
            if !self.feasible(depth + 1, &next) {
                continue;
            }
            if let Some(mut rest) = self.run(depth + 1, &next)? {
                rest.insert(0, path);
                return Ok(Some(rest));
            }
        }
        self.failed.insert((depth, used.clone()));
        Ok(None)
    }

    fn chordless_paths(&mut self, s: Vertex, t: Vertex, allowed: &VertexSet) -> Result<Vec<Vec<Vertex>>> {
        let g = self.g;
        let mut out = Vec::new();
        let mut hits = vec![0u32; g.n()];
        let mut path = vec![s];
        let mut on = VertexSet::new(g.n());
        on.insert(s);
        for &w in g.out_neighbours(s) {
            hits[w] += 1;
        }
        let mut cursor = vec![0usize];
        while let Some(c) = cursor.last_mut() {
            self.nodes += 1;
            if self.nodes > EXACT_NODE_BUDGET {
                return Err(Error::Budget(format!("exact search exceeded {EXACT_NODE_BUDGET} nodes")));
            }
            let u = *path.last().expect("nonempty");
            let nb = g.out_neighbours(u);
            if *c < nb.len() && u != t {
                let v = nb[*c];
                *c += 1;
                if !allowed.contains(v) || on.contains(v) || hits[v] != 1 {
                    continue;
                }
                path.push(v);
                on.insert(v);
                for &w in g.out_neighbours(v) {
                    hits[w] += 1;
                }
                cursor.push(0);
                if v == t {
                    out.push(path.clone());
                }
            } else {
                cursor.pop();
                let v = path.pop().expect("nonempty");
                on.remove(v);
                for &w in g.out_neighbours(v) {
                    hits[w] -= 1;
                }
            }
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::directed_path;

    fn check(g: &Digraph, pairs: &[(Vertex, Vertex)], paths: &[Vec<Vertex>]) {
        let mut seen = VertexSet::new(g.n());
        for (p, &(s, t)) in paths.iter().zip(pairs) {
            assert_eq!((p[0], *p.last().unwrap()), (s, t));
            assert!(p.windows(2).all(|e| g.has_edge(e[0], e[1])));
            for &v in p {
                assert!(seen.insert(v), "vertex {v} reused");
            }
        }
    }

    #[test]
    fn single_pair_is_a_path() {
        let g = directed_path(5);
        assert_eq!(exact_disjoint_paths(&g, &[(0, 4)]).unwrap(), Some(vec![vec![0, 1, 2, 3, 4]]));
        assert_eq!(exact_disjoint_paths(&g, &[(4, 0)]).unwrap(), None);
        assert_eq!(exact_disjoint_paths(&g, &[(2, 2)]).unwrap(), Some(vec![vec![2]]));
    }

    #[test]
    fn crossing_gadget_has_no_linkage() {
        // Both pairs must pass through the middle vertex 4.
        let g = Digraph::with_ids(6, &[(0, 4), (2, 4), (4, 1), (4, 3), (0, 5), (5, 0)]).unwrap();
        assert_eq!(exact_disjoint_paths(&g, &[(0, 3), (2, 1)]).unwrap(), None);
        assert!(exact_disjoint_paths(&g, &[(0, 3)]).unwrap().is_some());
    }

    #[test]
    fn two_disjoint_paths() {
        let g = Digraph::with_ids(6, &[(0, 1), (1, 2), (3, 4), (4, 5), (1, 4)]).unwrap();
        let pairs = [(0, 2), (3, 5)];
        let p = exact_disjoint_paths(&g, &pairs).unwrap().unwrap();
        check(&g, &pairs, &p);
        assert_eq!(p, vec![vec![0, 1, 2], vec![3, 4, 5]]);
    }

    #[test]
    fn shared_terminal_is_infeasible() {
        let g = directed_path(3);
        assert_eq!(exact_disjoint_paths(&g, &[(0, 1), (1, 2)]).unwrap(), None);
    }
}
