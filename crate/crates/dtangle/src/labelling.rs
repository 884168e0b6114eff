//! Tangle tree-labellings: ranks, the descendant dag, conflict elimination
//! and the cone-by-cone combination for tangles of mixed orders.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::digraph::Digraph;
use crate::error::{Error, Result};
use crate::separation::{
    enumerate_separations_of_order, min_separation, min_separation_near_source, Dir, DirectedSeparation, MinSep,
    SeparationJson,
};
use crate::set::VertexSet;
use crate::tangle::{min_distinguisher_flow, Tangle};

/// Where candidate separations come from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    /// All separations of the needed order are enumerated; minimum orders
    /// are exact.
    Explicit,
    /// Separations come from minimum cuts between tangle anchors.
    Oracle,
}

impl Dir {
    pub fn flip(self) -> Dir {
        match self {
            Dir::Out => Dir::In,
            Dir::In => Dir::Out,
        }
    }
}

/// A graph, a tangle family and a separation source, with caches.
pub struct Context<'a> {
    pub g: &'a Digraph,
    pub ts: &'a [Tangle],
    pub mode: Mode,
    by_order: Vec<OnceLock<Result<Vec<DirectedSeparation>>>>,
    dist: OnceLock<Result<Vec<Vec<Option<DirectedSeparation>>>>>,
}

impl<'a> Context<'a> {
    pub fn new(g: &'a Digraph, ts: &'a [Tangle], mode: Mode) -> Self {
        Context { g, ts, mode, by_order: (0..=g.n()).map(|_| OnceLock::new()).collect(), dist: OnceLock::new() }
    }

    /// Explicit mode when every tangle is small enough to enumerate, oracle
    /// mode otherwise.
    pub fn auto(g: &'a Digraph, ts: &'a [Tangle]) -> Self {
        let top = ts.iter().map(|t| t.order).max().unwrap_or(0);
        let n = g.n();
        let cost: u128 = (0..top.min(n + 1)).map(|r| crate::set::binomial(n, r)).sum();
        let mode = if n <= 40 && cost <= 100_000 { Mode::Explicit } else { Mode::Oracle };
        Self::new(g, ts, mode)
    }

    pub fn big(&self, t: usize, s: &DirectedSeparation) -> Option<Dir> {
        self.ts[t].big(self.g, s)
    }

    pub fn separations_of_order(&self, r: usize) -> Result<&[DirectedSeparation]> {
        if r > self.g.n() {
            return Ok(&[]);
        }
        match self.by_order[r].get_or_init(|| enumerate_separations_of_order(self.g, r)) {
            Ok(v) => Ok(v),
            Err(e) => Err(e.clone()),
        }
    }

    /// A minimum-order distinguisher of tangles `i` and `j`; exact in
    /// explicit mode.
    pub fn min_distinguisher(&self, i: usize, j: usize) -> Result<Option<DirectedSeparation>> {
        if i == j {
            return Ok(None);
        }
        match self.mode {
            Mode::Explicit => {
                let top = self.ts[i].order.min(self.ts[j].order);
                for r in 0..top {
                    for s in self.separations_of_order(r)? {
                        if let (Some(a), Some(b)) = (self.big(i, s), self.big(j, s)) {
                            if a != b {
                                return Ok(Some(s.clone()));
                            }
                        }
                    }
                }
                Ok(None)
            }
            Mode::Oracle => Ok(min_distinguisher_flow(self.g, &self.ts[i], &self.ts[j])),
        }
    }

    fn distinguishers(&self) -> Result<&Vec<Vec<Option<DirectedSeparation>>>> {
        let r = self.dist.get_or_init(|| {
            let k = self.ts.len();
            let mut d = vec![vec![None; k]; k];
            for i in 0..k {
                for j in i + 1..k {
                    let s = self.min_distinguisher(i, j)?;
                    d[i][j] = s.clone();
                    d[j][i] = s;
                }
            }
            Ok(d)
        });
        match r {
            Ok(d) => Ok(d),
            Err(e) => Err(e.clone()),
        }
    }

    /// Order of a minimum distinguisher, `None` if indistinguishable.
    pub fn distance(&self, i: usize, j: usize) -> Result<Option<usize>> {
        Ok(self.distinguishers()?[i][j].as_ref().map(|s| s.order()))
    }

    /// Separations of exactly `order` such that every tangle in `p` has its
    /// big side on `dir` and every tangle in `q` on the other side.
    pub fn splitting(&self, p: &[usize], q: &[usize], order: usize, extra: &[DirectedSeparation]) -> Result<Vec<(DirectedSeparation, Dir)>> {
        let mut cands: Vec<DirectedSeparation> = extra.to_vec();
        match self.mode {
            Mode::Explicit => cands.extend(self.separations_of_order(order)?.iter().cloned()),
            Mode::Oracle => {
                let anchor = |set: &[usize]| {
                    let mut a = self.g.empty_set();
                    for &t in set {
                        if let Some(w) = self.ts[t].anchor() {
                            a.union_with(w);
                        }
                    }
                    a
                };
                let (ap, aq) = (anchor(p), anchor(q));
                for (s, t) in [(&ap, &aq), (&aq, &ap)] {
                    for m in [min_separation(self.g, s, t, order + 1), min_separation_near_source(self.g, s, t, order + 1)] {
                        if let MinSep::Found { sep, .. } = m {
                            cands.push(sep);
                        }
                    }
                }
            }
        }
        let mut out = Vec::new();
        for s in cands {
            if s.order() != order {
                continue;
            }
            let Some(d) = p.first().and_then(|&t| self.big(t, &s)) else { continue };
            if p.iter().all(|&t| self.big(t, &s) == Some(d)) && q.iter().all(|&t| self.big(t, &s) == Some(d.flip())) {
                if !out.iter().any(|(x, y)| x == &s && *y == d) {
                    out.push((s, d));
                }
            }
        }
        Ok(out)
    }
}

/// The candidate whose `dir` side is inclusion-minimal, ties broken by the
/// least sorted side, then the least other side.
fn pick_minimal(cands: Vec<(DirectedSeparation, Dir)>) -> Option<(DirectedSeparation, Dir)> {
    let sides: Vec<&VertexSet> = cands.iter().map(|(s, d)| s.side(*d)).collect();
    let mut minimal: Vec<usize> = (0..cands.len())
        .filter(|&i| !(0..cands.len()).any(|j| sides[j] != sides[i] && sides[j].is_subset(sides[i])))
        .collect();
    minimal.sort_by(|&i, &j| sides[i].cmp(sides[j]).then_with(|| cands[i].0.side(cands[i].1.flip()).cmp(cands[j].0.side(cands[j].1.flip()))));
    minimal.first().map(|&i| cands[i].clone())
}

/// A separation together with the side that is big for the tangles it
/// splits off (`B` in `(A, B)`).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Split {
    pub sep: DirectedSeparation,
    pub b: Dir,
}

impl Split {
    pub fn b_side(&self) -> &VertexSet {
        self.sep.side(self.b)
    }

    pub fn a_side(&self) -> &VertexSet {
        self.sep.side(self.b.flip())
    }

    /// `σ(T)` is outgoing when `B(T)` is the out-side.
    pub fn is_outgoing(&self) -> bool {
        self.b == Dir::Out
    }
}

#[derive(Clone, Debug)]
pub struct RankAssignment {
    /// `levels[0]` is rank 1.
    pub levels: Vec<Vec<usize>>,
    pub rank: BTreeMap<usize, usize>,
    /// `σ(T)` as chosen by the rank construction. The root's entry, if
    /// any, is superseded by `(∅, V)`.
    pub sigma: BTreeMap<usize, Split>,
    /// `T_o`, with `σ(T_o) = (∅, V)` and rank one above the maximum.
    pub root: usize,
}

impl RankAssignment {
    /// `T'` is a descendant of `T`: `σ(T) ∈ T'` and `(B', A') ∈ T`.
    pub fn is_descendant(&self, ctx: &Context, t: usize, t2: usize) -> bool {
        if t == t2 || t2 == self.root {
            return false;
        }
        if t == self.root {
            return true;
        }
        let (s, s2) = (&self.sigma[&t], &self.sigma[&t2]);
        ctx.big(t2, &s.sep) == Some(s.b) && ctx.big(t, &s2.sep) == Some(s2.b.flip())
    }

    pub fn are_dependent(&self, ctx: &Context, t: usize, t2: usize) -> bool {
        self.is_descendant(ctx, t, t2) || self.is_descendant(ctx, t2, t)
    }
}

/// Ranks of pairwise `l`-distinguishable, `(l-1)`-indistinguishable tangles.
pub fn ranks(ctx: &Context, members: &[usize], l: usize) -> Result<RankAssignment> {
    let mut rest: Vec<usize> = members.to_vec();
    rest.sort_unstable();
    let mut levels = Vec::new();
    let mut sigma = BTreeMap::new();
    loop {
        if rest.len() <= 1 {
            if !rest.is_empty() {
                levels.push(rest.clone());
            }
            break;
        }
        let mut level = Vec::new();
        for &t in &rest {
            let others: Vec<usize> = rest.iter().copied().filter(|&x| x != t).collect();
            let cands = ctx.splitting(&[t], &others, l, &[])?;
            if let Some((sep, b)) = pick_minimal(cands) {
                sigma.insert(t, Split { sep, b });
                level.push(t);
            }
        }
        if level.is_empty() {
            return Err(Error::Precondition(format!(
                "no separation of order {l} splits a single tangle off {:?}",
                rest
            )));
        }
        rest.retain(|t| !level.contains(t));
        levels.push(level);
    }
    let mut rank = BTreeMap::new();
    for (i, lv) in levels.iter().enumerate() {
        for &t in lv {
            rank.insert(t, i + 1);
        }
    }
    let root = *levels.last().and_then(|lv| lv.first()).ok_or_else(|| Error::Invalid("no tangles".into()))?;
    rank.insert(root, levels.len() + 1);
    Ok(RankAssignment { levels, rank, sigma, root })
}

/// One labelled tree edge. Within the cone it was built for, the tangles on
/// `b`'s side have their big side of `sep` on `b_side`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LabelEdge {
    pub a: usize,
    pub b: usize,
    pub sep: DirectedSeparation,
    pub b_side: Dir,
}

/// Nodes are tangle indices; the identity is the node-tangle map unless
/// `nodes` says otherwise.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TreeLabelling {
    pub nodes: Vec<usize>,
    pub edges: Vec<LabelEdge>,
    pub mode: Mode,
}

/// Statistics of the conflict elimination, for testing.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct MergeStats {
    pub initial_conflict: usize,
    pub iterations: usize,
    pub conflicts: Vec<usize>,
    pub transitive: bool,
}

fn reach_from(children: &BTreeMap<usize, BTreeSet<usize>>, t: usize) -> BTreeSet<usize> {
    let mut seen = BTreeSet::from([t]);
    let mut stack = vec![t];
    while let Some(x) = stack.pop() {
        for &c in children.get(&x).into_iter().flatten() {
            if seen.insert(c) {
                stack.push(c);
            }
        }
    }
    seen
}

fn children_of(parents: &BTreeMap<usize, BTreeSet<usize>>) -> BTreeMap<usize, BTreeSet<usize>> {
    let mut ch: BTreeMap<usize, BTreeSet<usize>> = BTreeMap::new();
    for (&c, ps) in parents {
        for &p in ps {
            ch.entry(p).or_default().insert(c);
        }
    }
    ch
}

fn conflict_number(parents: &BTreeMap<usize, BTreeSet<usize>>, ra: &RankAssignment) -> usize {
    let n = ra.rank.len();
    let m = ra.rank.values().copied().max().unwrap_or(0);
    parents
        .iter()
        .filter(|(_, ps)| ps.len() > 1)
        .map(|(t, ps)| n * (m - ra.rank[t]) + ps.len())
        .sum()
}

/// The uniform-order labelling with every edge of order `l`.
pub fn build_uniform_labelling(ctx: &Context, members: &[usize], l: usize) -> Result<TreeLabelling> {
    Ok(build_uniform_labelling_with_stats(ctx, members, l)?.0)
}

pub fn build_uniform_labelling_with_stats(ctx: &Context, members: &[usize], l: usize) -> Result<(TreeLabelling, RankAssignment, MergeStats)> {
    let mut nodes: Vec<usize> = members.to_vec();
    nodes.sort_unstable();
    for (x, &i) in nodes.iter().enumerate() {
        for &j in &nodes[x + 1..] {
            match ctx.distance(i, j)? {
                None => return Err(Error::Indistinguishable(i, j)),
                Some(d) if d != l => {
                    return Err(Error::Precondition(format!("tangles {i} and {j} have a distinguisher of order {d}, not {l}")));
                }
                _ => {}
            }
        }
    }
    let ra = ranks(ctx, &nodes, l)?;
    let mut stats = MergeStats { transitive: true, ..Default::default() };
    // Descendant dag and its transitive reduction.
    let mut desc: BTreeMap<usize, BTreeSet<usize>> = BTreeMap::new();
    for &t in &nodes {
        for &t2 in &nodes {
            if ra.is_descendant(ctx, t, t2) {
                desc.entry(t).or_default().insert(t2);
            }
        }
    }
    for (&a, bs) in &desc {
        for &b in bs {
            for &c in desc.get(&b).into_iter().flatten() {
                if !desc[&a].contains(&c) {
                    stats.transitive = false;
                }
            }
        }
    }
    let mut parents: BTreeMap<usize, BTreeSet<usize>> = nodes.iter().map(|&t| (t, BTreeSet::new())).collect();
    for (&a, bs) in &desc {
        for &b in bs {
            let via = bs.iter().any(|&c| c != b && reach_from(&desc, c).contains(&b));
            if !via {
                parents.get_mut(&b).expect("node").insert(a);
            }
        }
    }
    let mut label: BTreeMap<usize, Split> = ra.sigma.clone();
    label.remove(&ra.root);
    stats.initial_conflict = conflict_number(&parents, &ra);
    stats.conflicts.push(stats.initial_conflict);
    loop {
        let Some(&t) = parents.iter().filter(|(_, ps)| ps.len() > 1).map(|(t, _)| t).min_by_key(|&&t| (ra.rank[&t], t)) else {
            break;
        };
        let children = children_of(&parents);
        let ins: Vec<usize> = parents[&t].iter().copied().collect();
        // Drop in-edges implied by another in-neighbour.
        let redundant: Vec<usize> =
            ins.iter().copied().filter(|&p| ins.iter().any(|&q| q != p && reach_from(&children, p).contains(&q))).collect();
        if !redundant.is_empty() {
            for p in redundant {
                parents.get_mut(&t).expect("node").remove(&p);
            }
            stats.conflicts.push(conflict_number(&parents, &ra));
            continue;
        }
        let (t1, t2) = (ins[0], ins[1]);
        let r1 = reach_from(&children, t1);
        let mut r: BTreeSet<usize> = r1.clone();
        r.extend(reach_from(&children, t2));
        let inside: Vec<usize> = r.iter().copied().collect();
        let outside: Vec<usize> = nodes.iter().copied().filter(|x| !r.contains(x)).collect();
        let mut extra = Vec::new();
        if let (Some(x1), Some(x2)) = (label.get(&t1), label.get(&t2)) {
            if x1.b == x2.b {
                let b = x1.b_side().union(x2.b_side());
                let a = x1.a_side().intersection(x2.a_side());
                extra.push(match x1.b {
                    Dir::Out => DirectedSeparation::new(b, a),
                    Dir::In => DirectedSeparation::new(a, b),
                });
            }
        }
        let cands = ctx.splitting(&inside, &outside, l, &extra)?;
        let (sep, b) = pick_minimal(cands)
            .ok_or_else(|| Error::Precondition(format!("no order-{l} separation merges the branches of {t1} and {t2}")))?;
        let p1 = parents[&t1].clone();
        {
            let p2 = parents.get_mut(&t2).expect("node");
            p2.extend(p1);
            p2.remove(&t1);
            p2.remove(&t2);
        }
        parents.insert(t1, BTreeSet::from([t2]));
        for c in &r1 {
            if *c != t1 {
                parents.get_mut(c).expect("node").remove(&t2);
            }
        }
        label.insert(t2, Split { sep, b });
        stats.iterations += 1;
        stats.conflicts.push(conflict_number(&parents, &ra));
        if stats.iterations > nodes.len() * nodes.len() * 4 + 16 {
            return Err(Error::Invalid("conflict elimination did not terminate".into()));
        }
    }
    let mut edges = Vec::new();
    for (&c, ps) in &parents {
        for &p in ps {
            let s = &label[&c];
            edges.push(LabelEdge { a: p, b: c, sep: s.sep.clone(), b_side: s.b });
        }
    }
    Ok((TreeLabelling { nodes, edges, mode: ctx.mode }, ra, stats))
}

/// A tree-labelling of the whole tangle family.
pub fn build_labelling(ctx: &Context) -> Result<TreeLabelling> {
    let k = ctx.ts.len();
    for i in 0..k {
        for j in i + 1..k {
            if ctx.distance(i, j)?.is_none() {
                return Err(Error::Indistinguishable(i, j));
            }
        }
    }
    let all: Vec<usize> = (0..k).collect();
    if all.is_empty() {
        return Ok(TreeLabelling { nodes: vec![], edges: vec![], mode: ctx.mode });
    }
    label_cone(ctx, &all, 0)
}

/// Members agree on every separation of order `< l`.
fn label_cone(ctx: &Context, members: &[usize], l: usize) -> Result<TreeLabelling> {
    if members.len() == 1 {
        return Ok(TreeLabelling { nodes: members.to_vec(), edges: vec![], mode: ctx.mode });
    }
    let groups = cone_groups(ctx, members, l)?;
    if groups.len() == 1 {
        return label_cone(ctx, members, l + 1);
    }
    let reps: Vec<usize> = groups.iter().map(|g| g[0]).collect();
    let outer = build_uniform_labelling(ctx, &reps, l)?;
    let inner: Vec<TreeLabelling> = groups.iter().map(|g| label_cone(ctx, g, l + 1)).collect::<Result<_>>()?;
    let group_of = |rep: usize| reps.iter().position(|&r| r == rep).expect("rep");
    let mut nodes = Vec::new();
    let mut edges = Vec::new();
    for lab in &inner {
        nodes.extend(lab.nodes.iter().copied());
        edges.extend(lab.edges.iter().cloned());
    }
    for e in &outer.edges {
        let (gs, gt) = (group_of(e.a), group_of(e.b));
        let u = sink_towards(ctx, &inner[gs], reps[gt]);
        let v = sink_towards(ctx, &inner[gt], reps[gs]);
        edges.push(LabelEdge { a: u, b: v, sep: e.sep.clone(), b_side: e.b_side });
    }
    nodes.sort_unstable();
    Ok(TreeLabelling { nodes, edges, mode: ctx.mode })
}

/// The node of `lab` at which all of its edges point when each edge is
/// oriented towards the side agreeing with tangle `toward`.
fn sink_towards(ctx: &Context, lab: &TreeLabelling, toward: usize) -> usize {
    let mut outdeg: BTreeMap<usize, usize> = lab.nodes.iter().map(|&v| (v, 0)).collect();
    for e in &lab.edges {
        let to_b = ctx.big(toward, &e.sep) == Some(e.b_side);
        *outdeg.get_mut(if to_b { &e.a } else { &e.b }).expect("node") += 1;
    }
    outdeg.iter().find(|(_, &d)| d == 0).map(|(&v, _)| v).unwrap_or(lab.nodes[0])
}

/// Partition of `members` into classes agreeing on all separations of
/// order `≤ l`.
pub fn cone_groups(ctx: &Context, members: &[usize], l: usize) -> Result<Vec<Vec<usize>>> {
    let mut groups: Vec<Vec<usize>> = Vec::new();
    for &t in members {
        let mut placed = false;
        for g in groups.iter_mut() {
            if ctx.distance(g[0], t)?.is_none_or(|d| d > l) {
                g.push(t);
                placed = true;
                break;
            }
        }
        if !placed {
            groups.push(vec![t]);
        }
    }
    Ok(groups)
}

/// A failed tree-labelling condition.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum LabelViolation {
    NotBijective,
    NotATree,
    /// A minimum-order edge on the path between two nodes that is not a
    /// minimum-order distinguisher of their tangles.
    PathEdge { a: usize, b: usize, edge: usize },
    /// An edge that is no minimum-order distinguisher for any pair it
    /// separates.
    Useless { edge: usize },
}

/// Checks the three tree-labelling conditions for the tangles `expected`.
pub fn verify_labelling(ctx: &Context, lab: &TreeLabelling, expected: &[usize]) -> Result<std::result::Result<(), LabelViolation>> {
    let mut sorted = lab.nodes.clone();
    sorted.sort_unstable();
    let mut want = expected.to_vec();
    want.sort_unstable();
    if sorted != want || sorted.windows(2).any(|w| w[0] == w[1]) {
        return Ok(Err(LabelViolation::NotBijective));
    }
    let k = sorted.len();
    if lab.edges.len() + 1 != k.max(1) {
        return Ok(Err(LabelViolation::NotATree));
    }
    let pos = |v: usize| sorted.binary_search(&v).ok();
    let mut adj: Vec<Vec<(usize, usize)>> = vec![Vec::new(); k];
    for (i, e) in lab.edges.iter().enumerate() {
        let (Some(a), Some(b)) = (pos(e.a), pos(e.b)) else { return Ok(Err(LabelViolation::NotATree)) };
        adj[a].push((b, i));
        adj[b].push((a, i));
    }
    // Parent pointers from every node.
    let paths_from = |s: usize| -> Vec<Option<(usize, usize)>> {
        let mut prev = vec![None; k];
        let mut seen = vec![false; k];
        seen[s] = true;
        let mut stack = vec![s];
        while let Some(x) = stack.pop() {
            for &(y, e) in &adj[x] {
                if !seen[y] {
                    seen[y] = true;
                    prev[y] = Some((x, e));
                    stack.push(y);
                }
            }
        }
        prev
    };
    let prevs: Vec<_> = (0..k).map(paths_from).collect();
    for (s, prev) in prevs.iter().enumerate() {
        if (0..k).any(|t| t != s && prev[t].is_none()) {
            return Ok(Err(LabelViolation::NotATree));
        }
    }
    let distinguishes_min = |a: usize, b: usize, s: &DirectedSeparation| -> Result<bool> {
        let d = ctx.distance(a, b)?;
        Ok(match (ctx.big(a, s), ctx.big(b, s), d) {
            (Some(x), Some(y), Some(d)) => x != y && s.order() == d,
            _ => false,
        })
    };
    let mut useful = vec![false; lab.edges.len()];
    for s in 0..k {
        for t in s + 1..k {
            let mut path = Vec::new();
            let mut x = t;
            while let Some((p, e)) = prevs[s][x] {
                path.push(e);
                x = p;
            }
            let min = path.iter().map(|&e| lab.edges[e].sep.order()).min().unwrap_or(0);
            for &e in &path {
                let ok = distinguishes_min(sorted[s], sorted[t], &lab.edges[e].sep)?;
                if ok {
                    useful[e] = true;
                }
                if lab.edges[e].sep.order() == min && !ok {
                    return Ok(Err(LabelViolation::PathEdge { a: sorted[s], b: sorted[t], edge: e }));
                }
            }
        }
    }
    if let Some(e) = useful.iter().position(|u| !u) {
        return Ok(Err(LabelViolation::Useless { edge: e }));
    }
    Ok(Ok(()))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabelEdgeJson {
    pub a: usize,
    pub b: usize,
    pub order: usize,
    pub separation: SeparationJson,
    pub b_side: Dir,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabellingJson {
    pub mode: Mode,
    pub nodes: Vec<usize>,
    pub edges: Vec<LabelEdgeJson>,
}

impl TreeLabelling {
    pub fn order(&self) -> usize {
        self.edges.iter().map(|e| e.sep.order()).max().unwrap_or(0)
    }

    pub fn to_json(&self, g: &Digraph) -> LabellingJson {
        LabellingJson {
            mode: self.mode,
            nodes: self.nodes.clone(),
            edges: self
                .edges
                .iter()
                .map(|e| LabelEdgeJson { a: e.a, b: e.b, order: e.sep.order(), separation: e.sep.to_json(g), b_side: e.b_side })
                .collect(),
        }
    }

    pub fn from_json(g: &Digraph, j: &LabellingJson) -> Result<Self> {
        let edges = j
            .edges
            .iter()
            .map(|e| Ok(LabelEdge { a: e.a, b: e.b, sep: DirectedSeparation::from_json(g, &e.separation)?, b_side: e.b_side }))
            .collect::<Result<_>>()?;
        Ok(TreeLabelling { nodes: j.nodes.clone(), edges, mode: j.mode })
    }

    pub fn to_dot(&self, g: &Digraph) -> String {
        let mut s = String::from("graph labelling {\n");
        for v in &self.nodes {
            s.push_str(&format!("  t{v} [label=\"T{v}\"];\n"));
        }
        for e in &self.edges {
            let sep = g.set_names(&e.sep.separator()).join(",");
            s.push_str(&format!("  t{} -- t{} [label=\"{} {{{}}}\"];\n", e.a, e.b, e.sep.order(), sep));
        }
        s.push_str("}\n");
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::{five_clusters, two_clusters_bridge};

    #[test]
    fn single_and_pair() {
        let c = two_clusters_bridge();
        let ts = c.tangles();
        let ctx = Context::new(&c.graph, &ts, Mode::Explicit);
        let one = build_labelling(&Context::new(&c.graph, &ts[..1], Mode::Explicit)).unwrap();
        assert!(one.edges.is_empty());
        let lab = build_labelling(&ctx).unwrap();
        assert_eq!(lab.edges.len(), 1);
        assert_eq!(lab.edges[0].sep.order(), 1);
        assert_eq!(verify_labelling(&ctx, &lab, &[0, 1]).unwrap(), Ok(()));
    }

    #[test]
    fn five_cluster_ranks() {
        let c = five_clusters();
        let ts = c.tangles();
        let ctx = Context::new(&c.graph, &ts, Mode::Explicit);
        let ra = ranks(&ctx, &[0, 1, 2, 3, 4], 2).unwrap();
        assert_eq!(ra.levels, vec![vec![0, 3, 4], vec![1, 2]]);
        assert!(!ra.sigma[&0].is_outgoing());
        assert!(ra.sigma[&3].is_outgoing() && ra.sigma[&4].is_outgoing());
    }
}
