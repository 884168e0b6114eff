//! Directed tree-decompositions: validation, width, the nice form, and the
//! extension of a tree-labelling to a decomposition that distinguishes the
//! labelled tangles.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use serde::{Deserialize, Serialize};

use crate::digraph::Digraph;
use crate::error::{Error, Result};
use crate::labelling::{verify_labelling, Context, LabelEdge, LabelEdgeJson, TreeLabelling};
use crate::separation::{boundary, Dir, DirectedSeparation};
use crate::set::VertexSet;
use crate::Vertex;

/// One node of the arborescence. `guard` belongs to the edge from `parent`
/// and is empty at the root.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DtdNode {
    pub parent: Option<usize>,
    pub bag: VertexSet,
    pub guard: VertexSet,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DirectedTreeDecomposition {
    pub nodes: Vec<DtdNode>,
}

/// Strict decompositions need every subtree to be exactly one strong
/// component of `G - guard`; relaxed ones allow a union of them.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GuardCheck {
    Strict,
    Relaxed,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum DtdViolation {
    NotArborescence,
    Uncovered(Vertex),
    InTwoBags { vertex: Vertex, nodes: (usize, usize) },
    /// The subtree below `node` contains a vertex of its own guard.
    GuardInSubtree { node: usize, vertex: Vertex },
    /// A closed walk avoiding the guard that leaves the subtree and comes
    /// back.
    Escapes { node: usize, walk: Vec<Vertex> },
    /// The subtree splits into several strong components.
    NotStrong { node: usize, parts: usize },
    EmptySubtree { node: usize },
}

impl DirectedTreeDecomposition {
    /// One node holding every vertex.
    pub fn trivial(g: &Digraph) -> Self {
        DirectedTreeDecomposition { nodes: vec![DtdNode { parent: None, bag: g.full_set(), guard: g.empty_set() }] }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn root(&self) -> Option<usize> {
        self.nodes.iter().position(|n| n.parent.is_none())
    }

    pub fn children(&self) -> Vec<Vec<usize>> {
        let mut ch = vec![Vec::new(); self.nodes.len()];
        for (i, n) in self.nodes.iter().enumerate() {
            if let Some(p) = n.parent {
                if p < ch.len() {
                    ch[p].push(i);
                }
            }
        }
        ch
    }

    /// Pre-order from the root, or `None` if the parent pointers do not
    /// form one arborescence.
    pub fn preorder(&self) -> Option<Vec<usize>> {
        let roots: Vec<usize> = (0..self.nodes.len()).filter(|&i| self.nodes[i].parent.is_none()).collect();
        if roots.len() != 1 || self.nodes.iter().any(|n| n.parent.is_some_and(|p| p >= self.nodes.len())) {
            return None;
        }
        let ch = self.children();
        let mut order = Vec::with_capacity(self.nodes.len());
        let mut stack = vec![roots[0]];
        while let Some(x) = stack.pop() {
            order.push(x);
            stack.extend(ch[x].iter().rev());
        }
        (order.len() == self.nodes.len()).then_some(order)
    }

    /// `β(T_t)` for every node. Panics if the shape is not an arborescence.
    pub fn subtree_unions(&self) -> Vec<VertexSet> {
        let order = self.preorder().expect("arborescence");
        let mut u: Vec<VertexSet> = self.nodes.iter().map(|n| n.bag.clone()).collect();
        for &x in order.iter().rev() {
            if let Some(p) = self.nodes[x].parent {
                let s = u[x].clone();
                u[p].union_with(&s);
            }
        }
        u
    }

    /// `Γ(t)`: the bag and every incident guard.
    pub fn gamma(&self, t: usize) -> VertexSet {
        let mut s = self.nodes[t].bag.union(&self.nodes[t].guard);
        for n in &self.nodes {
            if n.parent == Some(t) {
                s.union_with(&n.guard);
            }
        }
        s
    }

    /// `max |Γ(t)| - 1`, or 0 for a decomposition with no vertices.
    pub fn width(&self) -> usize {
        (0..self.nodes.len()).map(|t| self.gamma(t).len()).max().unwrap_or(0).saturating_sub(1)
    }

    pub fn edge_width(&self) -> usize {
        self.nodes.iter().filter(|n| n.parent.is_some()).map(|n| n.guard.len()).max().unwrap_or(0)
    }

    pub fn to_json(&self, g: &Digraph) -> DtdJson {
        DtdJson {
            nodes: self
                .nodes
                .iter()
                .enumerate()
                .map(|(id, n)| DtdNodeJson { id, parent: n.parent, bag: g.set_names(&n.bag), guard: g.set_names(&n.guard) })
                .collect(),
        }
    }

    pub fn from_json(g: &Digraph, j: &DtdJson) -> Result<Self> {
        let mut nodes = Vec::with_capacity(j.nodes.len());
        for (i, n) in j.nodes.iter().enumerate() {
            if n.id != i {
                return Err(Error::Parse(format!("node ids must be 0..{}, found {} at position {i}", j.nodes.len(), n.id)));
            }
            nodes.push(DtdNode { parent: n.parent, bag: g.set_from_names(&n.bag)?, guard: g.set_from_names(&n.guard)? });
        }
        Ok(DirectedTreeDecomposition { nodes })
    }

    pub fn to_dot(&self, g: &Digraph) -> String {
        let mut s = String::from("digraph decomposition {\n");
        for (i, n) in self.nodes.iter().enumerate() {
            s.push_str(&format!("  n{i} [label=\"{i}: |bag|={}\"];\n", n.bag.len()));
        }
        for (i, n) in self.nodes.iter().enumerate() {
            if let Some(p) = n.parent {
                s.push_str(&format!("  n{p} -> n{i} [label=\"{{{}}}\"];\n", g.set_names(&n.guard).join(",")));
            }
        }
        s.push_str("}\n");
        s
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DtdNodeJson {
    pub id: usize,
    pub parent: Option<usize>,
    pub bag: Vec<String>,
    pub guard: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DtdJson {
    pub nodes: Vec<DtdNodeJson>,
}

/// Shortest path from `s` to `t` inside `allowed`.
fn path_within(g: &Digraph, s: Vertex, t: Vertex, allowed: &VertexSet) -> Option<Vec<Vertex>> {
    let mut prev = vec![usize::MAX; g.n()];
    prev[s] = s;
    let mut q = VecDeque::from([s]);
    while let Some(u) = q.pop_front() {
        if u == t {
            let mut p = vec![t];
            let mut x = t;
            while x != s {
                x = prev[x];
                p.push(x);
            }
            p.reverse();
            return Some(p);
        }
        for &w in g.out_neighbours(u) {
            if allowed.contains(w) && prev[w] == usize::MAX {
                prev[w] = u;
                q.push_back(w);
            }
        }
    }
    None
}

/// Checks one edge: is `u` a strong component (strict) or a union of strong
/// components (relaxed) of `G - guard`.
fn check_guard(g: &Digraph, node: usize, u: &VertexSet, guard: &VertexSet, mode: GuardCheck) -> std::result::Result<(), DtdViolation> {
    if let Some(v) = u.intersection(guard).first() {
        return Err(DtdViolation::GuardInSubtree { node, vertex: v });
    }
    if u.is_empty() {
        return match mode {
            GuardCheck::Strict => Err(DtdViolation::EmptySubtree { node }),
            GuardCheck::Relaxed => Ok(()),
        };
    }
    let allowed = guard.complement();
    let mut parts = 0;
    for c in g.strong_components_within(&allowed) {
        if !c.intersects(u) {
            continue;
        }
        parts += 1;
        if !c.is_subset(u) {
            let a = c.intersection(u).first().expect("meets u");
            let b = c.difference(u).first().expect("leaves u");
            let mut walk = path_within(g, a, b, &c).expect("strongly connected");
            let back = path_within(g, b, a, &c).expect("strongly connected");
            walk.extend_from_slice(&back[1..]);
            return Err(DtdViolation::Escapes { node, walk });
        }
    }
    if mode == GuardCheck::Strict && parts > 1 {
        return Err(DtdViolation::NotStrong { node, parts });
    }
    Ok(())
}

/// Checks the partition, the arborescence shape and the guard condition on
/// every edge.
pub fn verify_dtd(g: &Digraph, d: &DirectedTreeDecomposition, mode: GuardCheck) -> std::result::Result<(), DtdViolation> {
    if d.preorder().is_none() {
        return Err(DtdViolation::NotArborescence);
    }
    let mut owner: Vec<Option<usize>> = vec![None; g.n()];
    for (i, n) in d.nodes.iter().enumerate() {
        for v in n.bag.iter() {
            if let Some(j) = owner[v] {
                return Err(DtdViolation::InTwoBags { vertex: v, nodes: (j, i) });
            }
            owner[v] = Some(i);
        }
    }
    if let Some(v) = owner.iter().position(|o| o.is_none()) {
        return Err(DtdViolation::Uncovered(v));
    }
    let unions = d.subtree_unions();
    for (i, n) in d.nodes.iter().enumerate() {
        if n.parent.is_some() {
            check_guard(g, i, &unions[i], &n.guard, mode)?;
        }
    }
    Ok(())
}

/// Converts a relaxed decomposition into a strict one by copying every
/// subtree once per strong component it meets. Guards and width are
/// unchanged.
pub fn make_nice(g: &Digraph, d: &DirectedTreeDecomposition) -> DirectedTreeDecomposition {
    make_nice_with_map(g, d, &[]).0
}

/// As [`make_nice`], also returning the original node of every new node
/// and, for every original node, its primary copy. Primary copies only
/// exist below primary parents; among the copies of a node the primary one
/// keeps the most `marked` nodes of its subtree, then most of the node's
/// own bag, then the smallest vertex.
pub fn make_nice_with_map(g: &Digraph, d: &DirectedTreeDecomposition, marked: &[bool]) -> (DirectedTreeDecomposition, Vec<usize>, Vec<Option<usize>>) {
    let Some(root) = d.root() else {
        return (d.clone(), (0..d.len()).collect(), (0..d.len()).map(Some).collect());
    };
    let ch = d.children();
    let unions = d.subtree_unions();
    let order = d.preorder().expect("arborescence");
    // Marked nodes in each subtree.
    let mut below: Vec<Vec<usize>> = (0..d.len()).map(|i| if marked.get(i) == Some(&true) { vec![i] } else { Vec::new() }).collect();
    for &x in order.iter().rev() {
        if let Some(p) = d.nodes[x].parent {
            let b = below[x].clone();
            below[p].extend(b);
        }
    }
    let mut nodes = vec![DtdNode { parent: None, bag: d.nodes[root].bag.clone(), guard: d.nodes[root].guard.clone() }];
    let mut origin = vec![root];
    let mut primary = vec![None; d.len()];
    primary[root] = Some(0);
    // (original node, its copy, mask, copy is primary)
    let mut queue = VecDeque::from([(root, 0usize, g.full_set(), true)]);
    while let Some((t, copy, mask, is_primary)) = queue.pop_front() {
        for &c in &ch[t] {
            let guard = &d.nodes[c].guard;
            let u = unions[c].intersection(&mask);
            let comps: Vec<VertexSet> = g.strong_components_within(&guard.complement()).into_iter().filter(|k| k.intersects(&u)).collect();
            let score = |k: &VertexSet| {
                let m = mask.intersection(k);
                let kept = below[c].iter().filter(|&&x| unions[x].intersects(&m)).count();
                (kept, k.intersection_len(&d.nodes[c].bag))
            };
            let best = comps
                .iter()
                .enumerate()
                .max_by(|(_, a), (_, b)| score(a).cmp(&score(b)).then(b.first().cmp(&a.first())))
                .map(|(i, _)| i);
            for (i, k) in comps.iter().enumerate() {
                let m = mask.intersection(k);
                let id = nodes.len();
                nodes.push(DtdNode { parent: Some(copy), bag: d.nodes[c].bag.intersection(&m), guard: guard.clone() });
                origin.push(c);
                let p = is_primary && Some(i) == best;
                if p {
                    primary[c] = Some(id);
                }
                queue.push_back((c, id, m, p));
            }
        }
    }
    (DirectedTreeDecomposition { nodes }, origin, primary)
}

/// Assertions made while extending a labelling; all hold on valid input.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConstructionChecks {
    /// `j ∈ κ(B_l)` implies `l ∈ κ(B_j)`.
    pub conflicts_symmetric: bool,
    /// Independent nodes end with disjoint component systems.
    pub independent_disjoint: bool,
    /// Ancestor pairs with `B_j ∖ B_i ≠ ∅` have opposite orientations and a
    /// smaller boundary.
    pub dependent_lemma: bool,
    /// Nodes added to resolve conflicts with ancestors.
    pub siblings: usize,
    /// Extra nodes created by the conversion to the strict form.
    pub copies: usize,
}

/// A directed tree-decomposition with the tangles placed on its nodes and
/// the labelling separations on the surviving labelling edges.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DecompositionForTangles {
    pub dtd: DirectedTreeDecomposition,
    /// Tangle index to node.
    pub tau: BTreeMap<usize, usize>,
    /// Labelling edge on the edge into each node, if any.
    pub labels: Vec<Option<LabelEdge>>,
    pub k: usize,
    /// Whether `dtd` is strict; otherwise it is only relaxed.
    pub strict: bool,
    pub checks: ConstructionChecks,
}

impl DecompositionForTangles {
    pub fn edge_width(&self) -> usize {
        self.dtd.edge_width()
    }

    /// The labelling read back off the decomposition.
    pub fn labelling(&self, mode: crate::labelling::Mode) -> TreeLabelling {
        TreeLabelling { nodes: self.tau.keys().copied().collect(), edges: self.labels.iter().flatten().cloned().collect(), mode }
    }

    pub fn to_json(&self, ctx: &Context) -> DecompositionJson {
        let g = ctx.g;
        let tangle_at: BTreeMap<usize, usize> = self.tau.iter().map(|(&t, &n)| (n, t)).collect();
        DecompositionJson {
            k: self.k,
            width: self.dtd.width(),
            edge_width: self.edge_width(),
            nodes: self
                .dtd
                .nodes
                .iter()
                .enumerate()
                .map(|(id, n)| {
                    let tangle = tangle_at.get(&id).copied();
                    DecompNodeJson {
                        id,
                        parent: n.parent,
                        bag: g.set_names(&n.bag),
                        guard: g.set_names(&n.guard),
                        tangle,
                        anchor: tangle.and_then(|t| ctx.ts[t].anchor()).map(|a| g.set_names(a)),
                        label: self.labels[id].as_ref().map(|e| LabelEdgeJson {
                            a: e.a,
                            b: e.b,
                            order: e.sep.order(),
                            separation: e.sep.to_json(g),
                            b_side: e.b_side,
                        }),
                    }
                })
                .collect(),
        }
    }

    pub fn from_json(g: &Digraph, j: &DecompositionJson) -> Result<Self> {
        let dj = DtdJson {
            nodes: j.nodes.iter().map(|n| DtdNodeJson { id: n.id, parent: n.parent, bag: n.bag.clone(), guard: n.guard.clone() }).collect(),
        };
        let dtd = DirectedTreeDecomposition::from_json(g, &dj)?;
        let mut tau = BTreeMap::new();
        let mut labels = Vec::with_capacity(j.nodes.len());
        for n in &j.nodes {
            if let Some(t) = n.tangle {
                if tau.insert(t, n.id).is_some() {
                    return Err(Error::Parse(format!("tangle {t} placed twice")));
                }
            }
            labels.push(match &n.label {
                Some(e) => Some(LabelEdge { a: e.a, b: e.b, sep: DirectedSeparation::from_json(g, &e.separation)?, b_side: e.b_side }),
                None => None,
            });
        }
        let strict = verify_dtd(g, &dtd, GuardCheck::Strict).is_ok();
        Ok(DecompositionForTangles { dtd, tau, labels, k: j.k, strict, checks: ConstructionChecks::default() })
    }

    pub fn to_dot(&self, g: &Digraph) -> String {
        let tangle_at: BTreeMap<usize, usize> = self.tau.iter().map(|(&t, &n)| (n, t)).collect();
        let mut s = String::from("digraph decomposition {\n");
        for (i, n) in self.dtd.nodes.iter().enumerate() {
            let t = tangle_at.get(&i).map(|t| format!(" T{t}")).unwrap_or_default();
            s.push_str(&format!("  n{i} [label=\"{i}{t}: |bag|={}\"];\n", n.bag.len()));
        }
        for (i, n) in self.dtd.nodes.iter().enumerate() {
            if let Some(p) = n.parent {
                let style = if self.labels[i].is_some() { ", style=bold" } else { "" };
                s.push_str(&format!("  n{p} -> n{i} [label=\"{{{}}}\"{style}];\n", g.set_names(&n.guard).join(",")));
            }
        }
        s.push_str("}\n");
        s
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DecompNodeJson {
    pub id: usize,
    pub parent: Option<usize>,
    pub bag: Vec<String>,
    pub guard: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tangle: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub anchor: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<LabelEdgeJson>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DecompositionJson {
    pub k: usize,
    pub width: usize,
    pub edge_width: usize,
    pub nodes: Vec<DecompNodeJson>,
}

/// Sibling and root order: least anchor vertex, then tangle index.
fn tangle_key(ctx: &Context, t: usize) -> (usize, usize) {
    (ctx.ts[t].anchor().and_then(|a| a.first()).unwrap_or(usize::MAX), t)
}

/// Drops every component contained in a component of an independent
/// index, keeping equal ones at the least index.
fn prune(sys: &[Vec<VertexSet>], independent: &dyn Fn(usize, usize) -> bool) -> Vec<Vec<VertexSet>> {
    (0..sys.len())
        .map(|i| {
            sys[i]
                .iter()
                .filter(|c| {
                    !(0..sys.len()).any(|j| {
                        independent(i, j) && sys[j].iter().any(|cj| (c.is_subset(cj) && *c != cj) || (*c == cj && j < i))
                    })
                })
                .cloned()
                .collect()
        })
        .collect()
}

fn union_all(n: usize, sets: &[VertexSet]) -> VertexSet {
    let mut u = VertexSet::new(n);
    for s in sets {
        u.union_with(s);
    }
    u
}

/// Extends a tree-labelling of tangles of order greater than `k` to a
/// directed tree-decomposition distinguishing them.
///
/// Roots are tried in sibling order; the first one whose extension can be
/// split into a strict decomposition without losing a tangle node wins.
/// If there is none, the first relaxed extension is returned with `strict`
/// unset, and if no root gives even that, the first error.
pub fn decomposition_from_labelling(ctx: &Context, lab: &TreeLabelling, k: usize) -> Result<DecompositionForTangles> {
    if let Err(v) = verify_labelling(ctx, lab, &lab.nodes)? {
        return Err(Error::Invalid(format!("labelling is not valid: {v:?}")));
    }
    if lab.nodes.is_empty() {
        return Err(Error::Invalid("labelling has no nodes".into()));
    }
    let mut roots = lab.nodes.clone();
    roots.sort_by_key(|&t| tangle_key(ctx, t));
    let mut first: Option<Result<DecompositionForTangles>> = None;
    for &r in &roots {
        match extend_from_root(ctx, lab, k, r) {
            Ok(d) if d.strict => return Ok(d),
            Ok(d) => {
                if !matches!(first, Some(Ok(_))) {
                    first = Some(Ok(d));
                }
            }
            Err(e) => {
                first.get_or_insert(Err(e));
            }
        }
    }
    first.expect("at least one root")
}

/// The extension with the labelling tree rooted at tangle `root`.
pub fn extend_from_root(ctx: &Context, lab: &TreeLabelling, k: usize, root: usize) -> Result<DecompositionForTangles> {
    let g = ctx.g;
    let n = g.n();
    // Pre-order numbering t_1..t_m.
    let mut adj: BTreeMap<usize, Vec<(usize, usize)>> = BTreeMap::new();
    for (i, e) in lab.edges.iter().enumerate() {
        adj.entry(e.a).or_default().push((e.b, i));
        adj.entry(e.b).or_default().push((e.a, i));
    }
    if !lab.nodes.contains(&root) {
        return Err(Error::Invalid(format!("tangle {root} is not in the labelling")));
    }
    let mut order: Vec<usize> = Vec::new();
    let mut parent: Vec<Option<usize>> = Vec::new();
    let mut via: Vec<Option<usize>> = Vec::new();
    let mut stack = vec![(root, None::<usize>, None::<usize>)];
    while let Some((t, p, e)) = stack.pop() {
        let pos = order.len();
        order.push(t);
        parent.push(p);
        via.push(e);
        let prev = p.map(|p| order[p]);
        let mut next: Vec<(usize, usize)> = adj.get(&t).into_iter().flatten().copied().filter(|&(c, _)| Some(c) != prev).collect();
        next.sort_by_key(|&(c, _)| std::cmp::Reverse(tangle_key(ctx, c)));
        stack.extend(next.into_iter().map(|(c, e)| (c, Some(pos), Some(e))));
    }
    let m = order.len();
    let is_anc = |i: usize, j: usize| {
        let mut x = parent[j];
        while let Some(p) = x {
            if p == i {
                return true;
            }
            x = parent[p];
        }
        false
    };
    let anc: Vec<Vec<bool>> = (0..m).map(|i| (0..m).map(|j| is_anc(i, j)).collect()).collect();
    let independent = |i: usize, j: usize| i != j && !anc[i][j] && !anc[j][i];

    // Big sides B_j and their boundaries; the root has none.
    let mut big: Vec<VertexSet> = vec![g.full_set(); m];
    let mut dir: Vec<Dir> = vec![Dir::Out; m];
    let mut bd: Vec<VertexSet> = vec![g.empty_set(); m];
    for j in 1..m {
        let sep = &lab.edges[via[j].expect("non-root")].sep;
        let d = ctx.big(order[j], sep).ok_or_else(|| Error::Invalid(format!("tangle {} does not orient its label", order[j])))?;
        big[j] = sep.side(d).clone();
        dir[j] = d;
        bd[j] = boundary(g, &big[j], d);
    }
    let mut c0: Vec<Vec<VertexSet>> = vec![Vec::new(); m];
    for j in 1..m {
        c0[j] = g.strong_components_within(&bd[j].complement()).into_iter().filter(|c| c.is_subset(&big[j])).collect();
    }
    let cs = prune(&c0, &independent);
    let inner: Vec<VertexSet> = cs.iter().map(|c| union_all(n, c)).collect();

    // Conflict sets κ(B_j, a) and resolvants.
    let mut kappa: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); m];
    let mut rho: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); m];
    for j in 1..m {
        for a in bd[j].iter() {
            let ka: Vec<usize> = (1..m)
                .filter(|&i| {
                    independent(i, j)
                        && cs[i].iter().any(|c| c.contains(a) && c.intersects(&inner[j]) && !c.is_subset(&inner[j]))
                })
                .collect();
            if let Some(&r) = ka.first() {
                rho[j].insert(r);
            }
            kappa[j].extend(ka);
        }
    }
    let conflicts_symmetric = (1..m).all(|l| kappa[l].iter().all(|&j| kappa[j].contains(&l)));

    let omega: Vec<VertexSet> = (0..m)
        .map(|i| {
            let mut w = bd[i].clone();
            for &j in &rho[i] {
                w.union_with(&bd[j]);
            }
            w
        })
        .collect();
    let mut d0: Vec<Vec<VertexSet>> = vec![Vec::new(); m];
    for i in 1..m {
        d0[i] = g
            .strong_components_within(&omega[i].complement())
            .into_iter()
            .filter(|c| cs[i].iter().any(|cc| c.is_subset(cc)))
            .collect();
    }
    let ds = prune(&d0, &independent);
    let dset: Vec<VertexSet> = ds.iter().map(|c| union_all(n, c)).collect();
    let independent_disjoint = (1..m).all(|i| (i + 1..m).all(|j| !independent(i, j) || dset[i].is_disjoint(&dset[j])));

    let mut dependent_lemma = true;
    for j in 1..m {
        for i in 1..m {
            if anc[i][j] && !big[j].is_subset(&big[i]) {
                let diff = big[j].difference(&big[i]);
                if dir[i] == dir[j] || boundary(g, &diff, dir[i].flip()).len() >= bd[j].len() {
                    dependent_lemma = false;
                }
            }
        }
    }

    // Node layout of L': t_1..t_m, then the new siblings.
    let mut nodes: Vec<DtdNode> =
        (0..m).map(|i| DtdNode { parent: parent[i], bag: dset[i].clone(), guard: omega[i].clone() }).collect();
    nodes[0].bag = g.full_set();
    nodes[0].guard = g.empty_set();
    let mut siblings = 0;
    for j in 1..m {
        // Ancestors (other than the root) in conflict with t_j.
        let conflicting: Vec<usize> = (1..m)
            .filter(|&i| anc[i][j] && ds[j].iter().any(|c| c.intersects(&dset[i]) && !c.is_subset(&dset[i])))
            .collect();
        let Some(&top) = conflicting.iter().min_by_key(|&&i| depth(&parent, i)) else { continue };
        let mut p = top;
        let mut x = parent[j];
        while let Some(y) = x {
            if dir[y] != dir[j] && (y == top || anc[top][y]) && y != 0 {
                p = y;
                break;
            }
            if y == top {
                break;
            }
            x = parent[y];
        }
        let w2 = omega[j].union(&bd[p]);
        let comps: Vec<VertexSet> = g
            .strong_components_within(&w2.complement())
            .into_iter()
            .filter(|c| ds[j].iter().any(|cc| c.is_subset(cc)))
            .collect();
        let keep: Vec<VertexSet> = comps.iter().filter(|c| c.is_subset(&dset[p])).cloned().collect();
        let away: Vec<VertexSet> = comps.iter().filter(|c| c.is_disjoint(&dset[p])).cloned().collect();
        nodes[j].bag = union_all(n, &keep);
        nodes[j].guard = w2.clone();
        let away = union_all(n, &away);
        if !away.is_empty() {
            nodes.push(DtdNode { parent: parent[j], bag: away, guard: w2 });
            siblings += 1;
        }
    }
    // β‴: subtract the children's sets.
    let full: Vec<VertexSet> = nodes.iter().map(|x| x.bag.clone()).collect();
    let parents: Vec<Option<usize>> = nodes.iter().map(|x| x.parent).collect();
    for (c, p) in parents.iter().enumerate() {
        if let Some(p) = *p {
            nodes[p].bag.difference_with(&full[c]);
        }
    }
    let raw = DirectedTreeDecomposition { nodes };
    if let Err(v) = verify_dtd(g, &raw, GuardCheck::Relaxed) {
        return Err(Error::Invalid(format!("extension is not a relaxed decomposition: {v:?}")));
    }
    let marked: Vec<bool> = (0..raw.len()).map(|i| i < m).collect();
    let (nice, origin, primary) = make_nice_with_map(g, &raw, &marked);
    let mut checks = ConstructionChecks {
        conflicts_symmetric,
        independent_disjoint,
        dependent_lemma,
        siblings,
        copies: origin.len() - raw.len(),
    };
    let strict = primary[..m].iter().all(Option::is_some);
    let (dtd, place): (DirectedTreeDecomposition, Vec<usize>) = if strict {
        (nice, primary[..m].iter().map(|p| p.expect("kept")).collect())
    } else {
        checks.copies = 0;
        (raw, (0..m).collect())
    };
    let mut tau = BTreeMap::new();
    let mut labels = vec![None; dtd.len()];
    for (pos, &t) in order.iter().enumerate() {
        tau.insert(t, place[pos]);
        if let Some(e) = via[pos] {
            labels[place[pos]] = Some(lab.edges[e].clone());
        }
    }
    Ok(DecompositionForTangles { dtd, tau, labels, k, strict, checks })
}

fn depth(parent: &[Option<usize>], mut i: usize) -> usize {
    let mut d = 0;
    while let Some(p) = parent[i] {
        d += 1;
        i = p;
    }
    d
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum DistinguishViolation {
    NotInjective,
    /// The tangle nodes do not induce a tree with a label on every edge.
    LabelShape,
    Labelling(crate::labelling::LabelViolation),
    SeparatorOutsideGuard { node: usize },
    Dtd(DtdViolation),
    EdgeWidth { width: usize, bound: usize },
    /// No minimum-order edge on the path separates the pair inside its guard.
    Pair { a: usize, b: usize },
}

/// Re-checks the labelling on the tangle nodes, the strict decomposition,
/// separators inside guards, the edge-width bound and every pair.
pub fn verify_distinguishing(ctx: &Context, d: &DecompositionForTangles) -> Result<std::result::Result<(), DistinguishViolation>> {
    let nodes = &d.dtd.nodes;
    let mut at: BTreeMap<usize, usize> = BTreeMap::new();
    for (&t, &x) in &d.tau {
        if x >= nodes.len() || at.insert(x, t).is_some() {
            return Ok(Err(DistinguishViolation::NotInjective));
        }
    }
    // Induced edges between tangle nodes, each carrying its label.
    let mut edges = Vec::new();
    for (&x, &t) in &at {
        if let Some(p) = nodes[x].parent {
            if let Some(&s) = at.get(&p) {
                match &d.labels[x] {
                    Some(e) if (e.a == s && e.b == t) || (e.a == t && e.b == s) => edges.push(e.clone()),
                    _ => return Ok(Err(DistinguishViolation::LabelShape)),
                }
            }
        }
    }
    if edges.len() + 1 != at.len() || d.labels.iter().flatten().count() != edges.len() {
        return Ok(Err(DistinguishViolation::LabelShape));
    }
    let lab = TreeLabelling { nodes: d.tau.keys().copied().collect(), edges, mode: ctx.mode };
    if let Err(v) = verify_labelling(ctx, &lab, &lab.nodes)? {
        return Ok(Err(DistinguishViolation::Labelling(v)));
    }
    for (i, l) in d.labels.iter().enumerate() {
        if let Some(e) = l {
            if !e.sep.separator().is_subset(&nodes[i].guard) {
                return Ok(Err(DistinguishViolation::SeparatorOutsideGuard { node: i }));
            }
        }
    }
    if let Err(v) = verify_dtd(ctx.g, &d.dtd, GuardCheck::Strict) {
        return Ok(Err(DistinguishViolation::Dtd(v)));
    }
    let bound = d.k * d.k + 2 * d.k;
    if d.edge_width() > bound {
        return Ok(Err(DistinguishViolation::EdgeWidth { width: d.edge_width(), bound }));
    }
    let path_up = |mut x: usize| {
        let mut p = vec![x];
        while let Some(y) = nodes[x].parent {
            p.push(y);
            x = y;
        }
        p
    };
    let ts: Vec<usize> = d.tau.keys().copied().collect();
    for (i, &a) in ts.iter().enumerate() {
        for &b in &ts[i + 1..] {
            let (pa, pb) = (path_up(d.tau[&a]), path_up(d.tau[&b]));
            // Edges are named by their lower node.
            let common: BTreeSet<usize> = pa.iter().copied().filter(|x| pb.contains(x)).collect();
            let path: Vec<usize> = pa.iter().chain(pb.iter()).copied().filter(|x| !common.contains(x)).collect();
            let labelled: Vec<&LabelEdge> = path.iter().filter_map(|&x| d.labels[x].as_ref()).collect();
            let Some(min) = labelled.iter().map(|e| e.sep.order()).min() else {
                return Ok(Err(DistinguishViolation::Pair { a, b }));
            };
            let dist = ctx.distance(a, b)?;
            let mut ok = false;
            for &x in &path {
                if let Some(e) = &d.labels[x] {
                    let sep = &e.sep;
                    if sep.order() == min
                        && Some(min) == dist
                        && matches!((ctx.big(a, sep), ctx.big(b, sep)), (Some(p), Some(q)) if p != q)
                        && sep.separator().is_subset(&nodes[x].guard)
                    {
                        ok = true;
                    }
                }
            }
            if !ok {
                return Ok(Err(DistinguishViolation::Pair { a, b }));
            }
        }
    }
    Ok(Ok(()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::{bidirected_clique, directed_path, five_clusters, two_clusters_bridge};
    use crate::labelling::{build_labelling, Mode};

    fn path_dag(n: usize) -> Digraph {
        directed_path(n)
    }

    #[test]
    fn trivial_decomposition() {
        let g = bidirected_clique(5);
        let d = DirectedTreeDecomposition::trivial(&g);
        assert_eq!(verify_dtd(&g, &d, GuardCheck::Strict), Ok(()));
        assert_eq!(d.width(), 4);
        assert_eq!(d.edge_width(), 0);
    }

    #[test]
    fn path_of_singletons_has_width_zero() {
        let g = path_dag(3);
        let single = |v: usize, parent: Option<usize>| DtdNode { parent, bag: g.set_of([v]), guard: g.empty_set() };
        let star = DirectedTreeDecomposition { nodes: vec![single(0, None), single(1, Some(0)), single(2, Some(0))] };
        assert_eq!(verify_dtd(&g, &star, GuardCheck::Strict), Ok(()));
        assert_eq!(star.width(), 0);
        // A chain puts {1, 2} below the first edge: two components.
        let chain = DirectedTreeDecomposition { nodes: vec![single(0, None), single(1, Some(0)), single(2, Some(1))] };
        assert_eq!(verify_dtd(&g, &chain, GuardCheck::Strict), Err(DtdViolation::NotStrong { node: 1, parts: 2 }));
        assert_eq!(verify_dtd(&g, &chain, GuardCheck::Relaxed), Ok(()));
        assert_eq!(verify_dtd(&g, &make_nice(&g, &chain), GuardCheck::Strict), Ok(()));
    }

    #[test]
    fn escaping_walk_is_reported() {
        // Cycle 0 -> 1 -> 2 -> 0 with {2} split off under an empty guard.
        let g = Digraph::with_ids(3, &[(0, 1), (1, 2), (2, 0)]).unwrap();
        let d = DirectedTreeDecomposition {
            nodes: vec![
                DtdNode { parent: None, bag: g.set_of([0, 1]), guard: g.empty_set() },
                DtdNode { parent: Some(0), bag: g.set_of([2]), guard: g.empty_set() },
            ],
        };
        match verify_dtd(&g, &d, GuardCheck::Strict) {
            Err(DtdViolation::Escapes { node: 1, walk }) => {
                assert_eq!(walk.first(), walk.last());
                assert!(walk.windows(2).all(|w| g.has_edge(w[0], w[1])));
            }
            other => panic!("{other:?}"),
        }
        let mut fixed = d.clone();
        fixed.nodes[1].guard = g.set_of([0]);
        fixed.nodes[1].bag = g.set_of([2]);
        // Guard {0}: {2} is its own component of G - 0.
        assert_eq!(verify_dtd(&g, &fixed, GuardCheck::Strict), Ok(()));
        assert_eq!(fixed.width(), 1);
    }

    #[test]
    fn make_nice_splits_a_two_component_edge() {
        // Two isolated 2-cycles below one empty guard.
        let g = Digraph::with_ids(5, &[(1, 2), (2, 1), (3, 4), (4, 3)]).unwrap();
        let d = DirectedTreeDecomposition {
            nodes: vec![
                DtdNode { parent: None, bag: g.set_of([0]), guard: g.empty_set() },
                DtdNode { parent: Some(0), bag: g.set_of([1, 3]), guard: g.empty_set() },
                DtdNode { parent: Some(1), bag: g.set_of([2, 4]), guard: g.set_of([1, 3]) },
            ],
        };
        assert!(verify_dtd(&g, &d, GuardCheck::Strict).is_err());
        assert_eq!(verify_dtd(&g, &d, GuardCheck::Relaxed), Ok(()));
        let (nice, origin, _) = make_nice_with_map(&g, &d, &[]);
        assert_eq!(nice.len(), 5);
        assert_eq!(origin.iter().filter(|&&o| o == 2).count(), 2);
        assert_eq!(verify_dtd(&g, &nice, GuardCheck::Strict), Ok(()));
        assert!(nice.width() <= d.width());
        let again = make_nice(&g, &nice);
        assert_eq!(again, nice);
    }

    #[test]
    fn bridge_decomposition() {
        let c = two_clusters_bridge();
        let ts = c.tangles();
        let ctx = Context::new(&c.graph, &ts, Mode::Explicit);
        let lab = build_labelling(&ctx).unwrap();
        let d = decomposition_from_labelling(&ctx, &lab, 2).unwrap();
        assert_eq!(d.dtd.len(), 2);
        assert_eq!(d.edge_width(), 1);
        assert!(d.edge_width() <= 8);
        assert_eq!(verify_distinguishing(&ctx, &d).unwrap(), Ok(()));
        let mut cut = d.clone();
        let x = cut.labels.iter().position(Option::is_some).unwrap();
        cut.dtd.nodes[x].guard = c.graph.empty_set();
        assert_eq!(verify_distinguishing(&ctx, &cut).unwrap(), Err(DistinguishViolation::SeparatorOutsideGuard { node: x }));
    }

    #[test]
    fn five_cluster_decomposition() {
        let c = five_clusters();
        let ts = c.tangles();
        let ctx = Context::new(&c.graph, &ts, Mode::Explicit);
        let lab = build_labelling(&ctx).unwrap();
        let d = decomposition_from_labelling(&ctx, &lab, 3).unwrap();
        assert!(d.checks.conflicts_symmetric && d.checks.independent_disjoint && d.checks.dependent_lemma);
        assert_eq!(d.tau.len(), 5);
        assert!(d.edge_width() <= 15);
        assert_eq!(verify_distinguishing(&ctx, &d).unwrap(), Ok(()));
        let j = d.to_json(&ctx);
        let back = DecompositionForTangles::from_json(&c.graph, &j).unwrap();
        assert_eq!(back.dtd, d.dtd);
        assert_eq!(back.tau, d.tau);
        assert_eq!(back.labels, d.labels);
    }

    #[test]
    fn one_tangle_is_trivial() {
        let g = bidirected_clique(7);
        let ts = vec![crate::tangle::Tangle::from_anchor(3, g.full_set())];
        let ctx = Context::new(&g, &ts, Mode::Explicit);
        let lab = build_labelling(&ctx).unwrap();
        let d = decomposition_from_labelling(&ctx, &lab, 3).unwrap();
        assert_eq!(d.dtd, DirectedTreeDecomposition::trivial(&g));
        assert_eq!(d.edge_width(), 0);
        assert_eq!(verify_distinguishing(&ctx, &d).unwrap(), Ok(()));
    }
}
