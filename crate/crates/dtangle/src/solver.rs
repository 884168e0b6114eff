//! Half-or-no-integral disjoint paths: either certify that no integral
//! linkage exists, or return paths `s_i -> t_i` using every vertex at most
//! twice.

use std::collections::{BTreeSet, HashMap};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::decomposition::{decomposition_from_labelling, DirectedTreeDecomposition};
use crate::digraph::Digraph;
use crate::error::{Error, Result};
use crate::exact::exact_disjoint_paths;
use crate::flow::shortest_path;
use crate::labelling::{build_labelling, Context};
use crate::patterns::{enumerate_pattern_graphs, Part, PatternGraph, PatternType};
use crate::separation::{enumerate_separations, Dir, DirectedSeparation};
use crate::set::{combinations, VertexSet};
use crate::tangle::{check_tangle_axioms, Tangle};
use crate::walls::{congestion, required_wall_order, route_through_wall, shortcut, RoutingOutcome, Wall};
use crate::Vertex;

/// Hosts up to this size are solved exactly when a budget runs out.
pub const DEGRADE_LIMIT: usize = 40;
/// Default number of guesses (child terminal sets, pattern embeddings).
pub const DEFAULT_BUDGET: usize = 200_000;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum HalfIntegralOutcome {
    NoIntegral,
    Paths(Vec<Vec<Vertex>>),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct HalfIntegralJson {
    pub verdict: String,
    #[serde(default)]
    pub paths: Vec<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub congestion: Option<usize>,
}

impl HalfIntegralOutcome {
    pub fn to_json(&self, g: &Digraph) -> HalfIntegralJson {
        match self {
            HalfIntegralOutcome::NoIntegral => HalfIntegralJson { verdict: "no-integral".into(), paths: vec![], congestion: None },
            HalfIntegralOutcome::Paths(p) => HalfIntegralJson {
                verdict: "half-integral".into(),
                paths: p.iter().map(|p| p.iter().map(|&v| g.name(v).to_string()).collect()).collect(),
                congestion: Some(congestion(g.n(), p).max(1)),
            },
        }
    }

    pub fn from_json(g: &Digraph, j: &HalfIntegralJson) -> Result<Self> {
        match j.verdict.as_str() {
            "no-integral" => Ok(HalfIntegralOutcome::NoIntegral),
            "half-integral" => Ok(HalfIntegralOutcome::Paths(
                j.paths.iter().map(|p| p.iter().map(|n| g.id_or_err(n)).collect()).collect::<Result<_>>()?,
            )),
            v => Err(Error::Parse(format!("unknown verdict {v}"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum HalfViolation {
    #[error("expected {expected} paths, got {got}")]
    Count { expected: usize, got: usize },
    #[error("path {path} does not run from its source to its terminal")]
    Endpoints { path: usize },
    #[error("path {path} uses the missing edge {from} -> {to}")]
    MissingEdge { path: usize, from: Vertex, to: Vertex },
    #[error("path {path} visits vertex {vertex} twice")]
    Repeated { path: usize, vertex: Vertex },
    #[error("vertex {vertex} lies on {count} paths")]
    Congestion { vertex: Vertex, count: usize },
}

/// Each path runs along edges from `s_i` to `t_i` without repeating a
/// vertex, and no vertex lies on more than two paths.
pub fn verify_half_integral(g: &Digraph, pairs: &[(Vertex, Vertex)], paths: &[Vec<Vertex>]) -> std::result::Result<(), HalfViolation> {
    if paths.len() != pairs.len() {
        return Err(HalfViolation::Count { expected: pairs.len(), got: paths.len() });
    }
    let mut count = vec![0usize; g.n()];
    for (i, (p, &(s, t))) in paths.iter().zip(pairs).enumerate() {
        if p.first() != Some(&s) || p.last() != Some(&t) || p.iter().any(|&v| v >= g.n()) {
            return Err(HalfViolation::Endpoints { path: i });
        }
        for e in p.windows(2) {
            if !g.has_edge(e[0], e[1]) {
                return Err(HalfViolation::MissingEdge { path: i, from: e[0], to: e[1] });
            }
        }
        let mut seen = VertexSet::new(g.n());
        for &v in p {
            if !seen.insert(v) {
                return Err(HalfViolation::Repeated { path: i, vertex: v });
            }
            count[v] += 1;
            if count[v] > 2 {
                return Err(HalfViolation::Congestion { vertex: v, count: count[v] });
            }
        }
    }
    Ok(())
}

#[derive(Clone, Debug)]
pub struct SolverConfig {
    /// `m`: tangles of order at least `3m` get their own decomposition
    /// nodes. Defaults to `k(6k² + 2k + 3)`.
    pub tangle_order: Option<usize>,
    pub budget: usize,
    /// Wall certificate for the leaf case.
    pub wall: Option<Wall>,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig { tangle_order: None, budget: DEFAULT_BUDGET, wall: None }
    }
}

/// Counts guesses against a budget.
struct Budget {
    left: usize,
}

impl Budget {
    fn spend(&mut self, what: &str) -> Result<()> {
        if self.left == 0 {
            return Err(Error::Budget(format!("guess budget exhausted ({what})")));
        }
        self.left -= 1;
        Ok(())
    }
}

fn check_pairs(g: &Digraph, pairs: &[(Vertex, Vertex)]) -> Result<()> {
    for &(s, t) in pairs {
        for v in [s, t] {
            if v >= g.n() {
                return Err(Error::NotFound(v.to_string()));
            }
        }
    }
    Ok(())
}

pub fn half_or_no(g: &Digraph, pairs: &[(Vertex, Vertex)]) -> Result<HalfIntegralOutcome> {
    half_or_no_with(g, pairs, &SolverConfig::default())
}

/// The full pipeline: tangles of order `3m`, their decomposition and the
/// dynamic programme over it; the whole graph is one leaf when fewer than
/// two such tangles exist.
pub fn half_or_no_with(g: &Digraph, pairs: &[(Vertex, Vertex)], cfg: &SolverConfig) -> Result<HalfIntegralOutcome> {
    check_pairs(g, pairs)?;
    if pairs.is_empty() {
        return Ok(HalfIntegralOutcome::Paths(Vec::new()));
    }
    let mut budget = Budget { left: cfg.budget };
    if let Some(w) = &cfg.wall {
        return leaf(g, pairs, Some(w), &mut budget);
    }
    let m = cfg.tangle_order.unwrap_or_else(|| required_wall_order(pairs.len())).max(1);
    let q = 3 * m;
    let tangles = detect_tangles(g, q)?;
    if tangles.len() < 2 {
        return leaf(g, pairs, None, &mut budget);
    }
    let ctx = Context::auto(g, &tangles);
    let lab = build_labelling(&ctx)?;
    let dec = decomposition_from_labelling(&ctx, &lab, q)?;
    let mut dp = Dp::new(g, &dec.dtd, &mut budget);
    let root = dec.dtd.root().expect("nonempty decomposition");
    let out = match dp.solve(root, pairs)? {
        Some(p) => HalfIntegralOutcome::Paths(p),
        None => HalfIntegralOutcome::NoIntegral,
    };
    Ok(out)
}

/// Tangles of order `q` anchored at large strong components of `G - X`
/// with `|X| < q` or at large bidirected cliques, kept when the tangle
/// axioms hold; tangles orienting all separations alike are merged. The
/// search is a heuristic: it may miss tangles, which only coarsens the
/// decomposition the solver works on.
pub fn detect_tangles(g: &Digraph, q: usize) -> Result<Vec<Tangle>> {
    let n = g.n();
    if q == 0 || n <= 3 * (q - 1) {
        return Ok(Vec::new());
    }
    let verts: Vec<Vertex> = g.vertices().collect();
    let mut anchors = BTreeSet::new();
    for r in 0..q {
        for x in combinations(&verts, r) {
            let x = g.set_of(x);
            for c in g.strong_components_within(&x.complement()) {
                if c.len() + 2 >= 3 * q {
                    anchors.insert(c);
                }
            }
        }
    }
    // Greedy bidirected cliques catch dense clusters that never form a
    // strong component on their own.
    for v in g.vertices() {
        let mut clique = vec![v];
        for u in g.vertices() {
            if u != v && clique.iter().all(|&w| g.has_edge(u, w) && g.has_edge(w, u)) {
                clique.push(u);
            }
        }
        if clique.len() + 2 >= 3 * q {
            anchors.insert(g.set_of(clique));
        }
    }
    if anchors.is_empty() {
        return Ok(Vec::new());
    }
    let seps = enumerate_separations(g, q - 1)?;
    // Tangles are determined by their orientations, so one axiom check per
    // signature suffices.
    // Smallest anchors first, so each class is represented by its tightest
    // anchor.
    let mut anchors: Vec<VertexSet> = anchors.into_iter().collect();
    anchors.sort_by_key(|a| a.len());
    let mut classes: Vec<(Vec<Option<Dir>>, Tangle)> = anchors
        .into_par_iter()
        .map(|a| {
            let t = Tangle::from_anchor(q, a);
            (seps.iter().map(|s| t.big(g, s)).collect(), t)
        })
        .collect();
    let mut seen = BTreeSet::new();
    classes.retain(|(sig, _)| seen.insert(sig.clone()));
    let passing: Vec<bool> = classes.par_iter().map(|(_, t)| check_tangle_axioms(g, t).map(|r| r.is_ok())).collect::<Result<_>>()?;
    let out = classes.into_iter().zip(passing).filter(|(_, ok)| *ok).map(|((_, t), _)| t).collect();
    Ok(out)
}

/// The leaf case. Without a wall certificate the instance is solved
/// exactly when small enough; with one, two pairs are routed
/// independently and larger instances go through the wall or across the
/// small separation it reports.
pub fn half_or_no_leaf(g: &Digraph, pairs: &[(Vertex, Vertex)], wall: Option<&Wall>, budget: usize) -> Result<HalfIntegralOutcome> {
    check_pairs(g, pairs)?;
    leaf(g, pairs, wall, &mut Budget { left: budget })
}

fn leaf(g: &Digraph, pairs: &[(Vertex, Vertex)], wall: Option<&Wall>, budget: &mut Budget) -> Result<HalfIntegralOutcome> {
    let Some(w) = wall else {
        return match exact_disjoint_paths(g, pairs) {
            Ok(Some(p)) => Ok(HalfIntegralOutcome::Paths(p)),
            Ok(None) => Ok(HalfIntegralOutcome::NoIntegral),
            Err(Error::SizeGuard(msg)) => Err(Error::NeedsCertificate(msg)),
            Err(e) => Err(e),
        };
    };
    w.index(g).map_err(|v| Error::Invalid(format!("wall certificate: {v}")))?;
    let k = pairs.len();
    if k <= 2 {
        let mut paths = Vec::new();
        for &(s, t) in pairs {
            match shortest_path(g, s, t, &g.full_set()) {
                Some(p) => paths.push(p),
                None => return Ok(HalfIntegralOutcome::NoIntegral),
            }
        }
        return Ok(HalfIntegralOutcome::Paths(paths));
    }
    let s: Vec<Vertex> = pairs.iter().map(|p| p.0).collect();
    let t: Vec<Vertex> = pairs.iter().map(|p| p.1).collect();
    match route_through_wall(g, &s, &t, w)? {
        RoutingOutcome::Linkage(p) => Ok(HalfIntegralOutcome::Paths(p)),
        RoutingOutcome::SepFromS(sep) => shield(g, pairs, &sep, budget, &mut |h, p, keep, b| {
            let sub = sub_wall(w, h, keep, p.len());
            leaf(&h.g, p, sub.as_ref(), b)
        }),
        RoutingOutcome::SepToT(sep) => {
            // Reversing every edge turns the terminals into shielded sources.
            let rev = g.reverse();
            let rpairs: Vec<_> = pairs.iter().map(|&(a, b)| (b, a)).collect();
            let rsep = DirectedSeparation::new(sep.inn.clone(), sep.out.clone());
            let rw = w.reversed();
            let out = shield(&rev, &rpairs, &rsep, budget, &mut |h, p, keep, b| {
                let sub = sub_wall(&rw, h, keep, p.len());
                leaf(&h.g, p, sub.as_ref(), b)
            })?;
            Ok(match out {
                HalfIntegralOutcome::Paths(p) => HalfIntegralOutcome::Paths(p.into_iter().map(|mut q| {
                    q.reverse();
                    q
                }).collect()),
                other => other,
            })
        }
    }
}

/// The part of `w` inside `keep`, renamed into `h`, if it is still a wall
/// large enough for `k` pairs.
fn sub_wall(w: &Wall, h: &Sub, keep: &VertexSet, k: usize) -> Option<Wall> {
    let sub = w.restrict(keep)?.map(|v| h.new[&v]);
    let big_enough = k <= 2 || sub.order >= required_wall_order(k);
    (big_enough && sub.index(&h.g).is_ok()).then_some(sub)
}

/// `G[keep]` with its new-to-old map and the old-to-new lookup.
struct Sub {
    g: Digraph,
    old: Vec<Vertex>,
    new: HashMap<Vertex, Vertex>,
}

impl Sub {
    fn new(g: &Digraph, keep: &VertexSet) -> Sub {
        let (h, old) = g.induced(keep);
        let new = old.iter().enumerate().map(|(i, &v)| (v, i)).collect();
        Sub { g: h, old, new }
    }

    fn pairs(&self, pairs: &[(Vertex, Vertex)]) -> Vec<(Vertex, Vertex)> {
        pairs.iter().map(|&(s, t)| (self.new[&s], self.new[&t])).collect()
    }

    fn lift(&self, paths: Vec<Vec<Vertex>>) -> Vec<Vec<Vertex>> {
        paths.into_iter().map(|p| p.into_iter().map(|v| self.old[v]).collect()).collect()
    }
}

/// How a pattern edge is realised.
#[derive(Clone, Copy, PartialEq, Eq)]
enum EdgeKind {
    Literal,
    Left,
    Right,
}

fn edge_kind(a: Part, b: Part) -> EdgeKind {
    match (a, b) {
        (Part::M, Part::M) | (Part::R, Part::L) => EdgeKind::Literal,
        (Part::L, _) | (_, Part::L) => EdgeKind::Left,
        _ => EdgeKind::Right,
    }
}

/// A pattern with its vertices split into runs solved on either side.
struct Layout {
    parts: Vec<Part>,
    /// Per path: global vertex ids.
    paths: Vec<Vec<usize>>,
    /// (first, last) pattern vertices of the runs on each side; lone `L`
    /// vertices form one-vertex runs on the left.
    left: Vec<(usize, usize)>,
    right: Vec<(usize, usize)>,
    /// `M` vertices with no left (right) pattern edge.
    m_left: Vec<usize>,
    m_right: Vec<usize>,
    literal: Vec<(usize, usize)>,
    /// Vertices whose image must be guessed, in assignment order.
    needed: Vec<usize>,
    /// For each `L` vertex entered by a literal edge, its `R` tail.
    tail_of: HashMap<usize, usize>,
}

impl Layout {
    fn new(p: &PatternGraph) -> Layout {
        let parts = p.parts();
        let mut paths = Vec::new();
        let mut base = 0;
        for w in &p.paths {
            paths.push((base..base + w.len()).collect::<Vec<_>>());
            base += w.len();
        }
        let (mut left, mut right, mut literal) = (Vec::new(), Vec::new(), Vec::new());
        let mut has_left = vec![false; parts.len()];
        let mut has_right = vec![false; parts.len()];
        let mut tail_of = HashMap::new();
        for path in &paths {
            let mut i = 0;
            while i + 1 < path.len() {
                let kind = edge_kind(parts[path[i]], parts[path[i + 1]]);
                if kind == EdgeKind::Literal {
                    literal.push((path[i], path[i + 1]));
                    if parts[path[i]] == Part::R {
                        tail_of.insert(path[i + 1], path[i]);
                    }
                    i += 1;
                    continue;
                }
                let mut j = i;
                while j + 1 < path.len() && edge_kind(parts[path[j]], parts[path[j + 1]]) == kind {
                    j += 1;
                }
                for &v in &path[i..=j] {
                    if kind == EdgeKind::Left {
                        has_left[v] = true;
                    } else {
                        has_right[v] = true;
                    }
                }
                if kind == EdgeKind::Left {
                    left.push((path[i], path[j]));
                } else {
                    right.push((path[i], path[j]));
                }
                i = j;
            }
        }
        for v in 0..parts.len() {
            if parts[v] == Part::L && !has_left[v] {
                left.push((v, v));
            }
        }
        let m_left = (0..parts.len()).filter(|&v| parts[v] == Part::M && !has_left[v]).collect();
        let m_right = (0..parts.len()).filter(|&v| parts[v] == Part::M && !has_right[v]).collect();
        let mut need = BTreeSet::new();
        for path in &paths {
            need.insert(path[0]);
            need.insert(*path.last().expect("nonempty"));
        }
        for &(a, b) in left.iter().chain(&right).chain(&literal) {
            need.insert(a);
            need.insert(b);
        }
        for v in 0..parts.len() {
            if parts[v] == Part::M {
                need.insert(v);
            }
        }
        // M first, then L, then R, so that literal tails follow their heads.
        let mut needed: Vec<usize> = need.into_iter().collect();
        needed.sort_by_key(|&v| (match parts[v] {
            Part::M => 0,
            Part::L => 1,
            Part::R => 2,
        }, v));
        Layout { parts, paths, left, right, m_left, m_right, literal, needed, tail_of }
    }
}

type SideSolver<'s> = dyn FnMut(&Sub, &[(Vertex, Vertex)], &VertexSet, &mut Budget) -> Result<HalfIntegralOutcome> + 's;

/// Solves across a separation `(B -> A)` with every source in `A`: guesses
/// how an integral linkage crosses it (a pattern graph and the images of
/// its run endpoints), solves `G[A]` exactly and `G[B]` with `solve_b`,
/// and splices the results.
fn shield(g: &Digraph, pairs: &[(Vertex, Vertex)], sep: &DirectedSeparation, budget: &mut Budget, solve_b: &mut SideSolver) -> Result<HalfIntegralOutcome> {
    let (a, b) = (&sep.inn, &sep.out);
    if pairs.iter().any(|&(s, _)| !a.contains(s)) {
        return Err(Error::Precondition("every source must lie on the shielded side".into()));
    }
    let mid = a.intersection(b);
    let a_only = a.difference(b);
    let b_only = b.difference(a);
    let k = pairs.len();
    let t = mid.len();
    let region = |p: Part| match p {
        Part::L => &a_only,
        Part::M => &mid,
        Part::R => &b_only,
    };
    let entered: Vec<Vertex> = a_only.iter().filter(|&v| g.in_neighbours(v).iter().any(|&u| b_only.contains(u))).collect();
    for pattern in enumerate_pattern_graphs(PatternType::RToL, k, t) {
        let fits = pattern.paths.iter().zip(pairs).all(|(w, &(s, tt))| {
            region(w[0]).contains(s) && region(*w.last().expect("nonempty")).contains(tt) && ((w.len() == 1) == (s == tt))
        });
        if !fits {
            continue;
        }
        let lay = Layout::new(&pattern);
        let mut pinned: HashMap<usize, Vertex> = HashMap::new();
        for (path, &(s, tt)) in lay.paths.iter().zip(pairs) {
            pinned.insert(path[0], s);
            pinned.insert(*path.last().expect("nonempty"), tt);
        }
        let mut img = vec![usize::MAX; lay.parts.len()];
        let mut used = VertexSet::new(g.n());
        let mut found = None;
        let mut ctx = Embed { g, lay: &lay, pinned: &pinned, mid: &mid, entered: &entered, b_only: &b_only };
        ctx.assign(0, &mut img, &mut used, &mut |img| {
            budget.spend("pattern embeddings")?;
            if let Some(p) = try_embedding(g, pairs, &lay, img, a, b, &mid, budget, solve_b)? {
                found = Some(p);
                return Ok(true);
            }
            Ok(false)
        })?;
        if let Some(p) = found {
            return Ok(HalfIntegralOutcome::Paths(p));
        }
    }
    Ok(HalfIntegralOutcome::NoIntegral)
}

struct Embed<'e> {
    g: &'e Digraph,
    lay: &'e Layout,
    pinned: &'e HashMap<usize, Vertex>,
    mid: &'e VertexSet,
    entered: &'e [Vertex],
    b_only: &'e VertexSet,
}

impl Embed<'_> {
    fn candidates(&self, v: usize, img: &[usize]) -> Vec<Vertex> {
        if let Some(&x) = self.pinned.get(&v) {
            return vec![x];
        }
        match self.lay.parts[v] {
            Part::M => self.mid.to_vec(),
            Part::L => self.entered.to_vec(),
            Part::R => {
                // An R vertex is guessed only as the tail of a literal edge.
                match self.lay.tail_of.iter().find(|(_, &r)| r == v) {
                    Some((&l, _)) => self.g.in_neighbours(img[l]).iter().copied().filter(|&u| self.b_only.contains(u)).collect(),
                    None => self.b_only.to_vec(),
                }
            }
        }
    }

    /// Calls `visit` on every injective image of the needed vertices that
    /// keeps the literal edges; stops when `visit` returns true.
    fn assign(&mut self, i: usize, img: &mut [usize], used: &mut VertexSet, visit: &mut dyn FnMut(&[usize]) -> Result<bool>) -> Result<bool> {
        if i == self.lay.needed.len() {
            let ok = self.lay.literal.iter().all(|&(x, y)| self.g.has_edge(img[x], img[y]));
            return if ok { visit(img) } else { Ok(false) };
        }
        let v = self.lay.needed[i];
        for x in self.candidates(v, img) {
            if used.contains(x) {
                continue;
            }
            img[v] = x;
            used.insert(x);
            let stop = self.assign(i + 1, img, used, visit)?;
            used.remove(x);
            img[v] = usize::MAX;
            if stop {
                return Ok(true);
            }
        }
        Ok(false)
    }
}

#[allow(clippy::too_many_arguments)]
fn try_embedding(
    g: &Digraph,
    pairs: &[(Vertex, Vertex)],
    lay: &Layout,
    img: &[usize],
    a: &VertexSet,
    b: &VertexSet,
    mid: &VertexSet,
    budget: &mut Budget,
    solve_b: &mut SideSolver,
) -> Result<Option<Vec<Vec<Vertex>>>> {
    let mut unused = mid.clone();
    for (v, &p) in lay.parts.iter().enumerate() {
        if p == Part::M {
            unused.remove(img[v]);
        }
    }
    let mut keep_a = a.difference(&unused);
    for &v in &lay.m_left {
        keep_a.remove(img[v]);
    }
    let side_a = Sub::new(g, &keep_a);
    let left_pairs: Vec<(Vertex, Vertex)> = lay.left.iter().map(|&(x, y)| (img[x], img[y])).collect();
    let Some(left_paths) = exact_disjoint_paths(&side_a.g, &side_a.pairs(&left_pairs))? else {
        return Ok(None);
    };
    let left_paths = side_a.lift(left_paths);
    let mut keep_b = b.difference(&unused);
    for &v in &lay.m_right {
        keep_b.remove(img[v]);
    }
    let right_pairs: Vec<(Vertex, Vertex)> = lay.right.iter().map(|&(x, y)| (img[x], img[y])).collect();
    let right_paths = if right_pairs.is_empty() {
        Vec::new()
    } else {
        let side_b = Sub::new(g, &keep_b);
        match solve_b(&side_b, &side_b.pairs(&right_pairs), &keep_b, budget)? {
            HalfIntegralOutcome::NoIntegral => return Ok(None),
            HalfIntegralOutcome::Paths(p) => side_b.lift(p),
        }
    };
    let mut left_at: HashMap<usize, &Vec<Vertex>> = HashMap::new();
    for (&(x, _), p) in lay.left.iter().zip(&left_paths) {
        left_at.insert(x, p);
    }
    let mut right_at: HashMap<usize, &Vec<Vertex>> = HashMap::new();
    for (&(x, _), p) in lay.right.iter().zip(&right_paths) {
        right_at.insert(x, p);
    }
    let mut out = Vec::new();
    for path in &lay.paths {
        let mut walk = vec![img[path[0]]];
        let mut i = 0;
        if path.len() == 1 {
            out.push(walk);
            continue;
        }
        while i + 1 < path.len() {
            let kind = edge_kind(lay.parts[path[i]], lay.parts[path[i + 1]]);
            let v = path[i];
            match kind {
                EdgeKind::Literal => {
                    walk.push(img[path[i + 1]]);
                    i += 1;
                }
                EdgeKind::Left | EdgeKind::Right => {
                    let (runs, at) = if kind == EdgeKind::Left { (&lay.left, &left_at) } else { (&lay.right, &right_at) };
                    let &(_, end) = runs.iter().find(|r| r.0 == v).expect("run starts here");
                    walk.extend(&at[&v][1..]);
                    i = path.iter().position(|&x| x == end).expect("run end on path");
                }
            }
        }
        out.push(shortcut(&walk));
    }
    verify_half_integral(g, pairs, &out).map_err(|e| Error::Invalid(format!("spliced paths violate the contract: {e}")))?;
    Ok(Some(out))
}

/// Solves across a separation `(B -> A)` with every source in `A`; the
/// `B` side is solved exactly as a leaf.
pub fn solve_across_shield(g: &Digraph, pairs: &[(Vertex, Vertex)], sep: &DirectedSeparation, budget: usize) -> Result<HalfIntegralOutcome> {
    check_pairs(g, pairs)?;
    let mut b = Budget { left: budget };
    shield(g, pairs, sep, &mut b, &mut |h, p, _, b| leaf(&h.g, p, None, b))
}

/// Dynamic programme over a directed tree-decomposition.
struct Dp<'a, 'b> {
    g: &'a Digraph,
    d: &'a DirectedTreeDecomposition,
    unions: Vec<VertexSet>,
    children: Vec<Vec<usize>>,
    budget: &'b mut Budget,
}

type Guess = Vec<(Vertex, Vertex)>;

impl<'a, 'b> Dp<'a, 'b> {
    fn new(g: &'a Digraph, d: &'a DirectedTreeDecomposition, budget: &'b mut Budget) -> Self {
        Dp { g, d, unions: d.subtree_unions(), children: d.children(), budget }
    }

    /// Integral-or-half solution of `pairs` inside `G[U_t]`.
    fn solve(&mut self, t: usize, pairs: &[(Vertex, Vertex)]) -> Result<Option<Vec<Vec<Vertex>>>> {
        if self.children[t].is_empty() {
            let sub = Sub::new(self.g, &self.unions[t]);
            return Ok(match leaf(&sub.g, &sub.pairs(pairs), None, self.budget)? {
                HalfIntegralOutcome::Paths(p) => Some(sub.lift(p)),
                HalfIntegralOutcome::NoIntegral => None,
            });
        }
        match self.solve_internal(t, pairs) {
            Err(Error::Budget(_)) if self.unions[t].len() <= DEGRADE_LIMIT => {
                let sub = Sub::new(self.g, &self.unions[t]);
                Ok(exact_disjoint_paths(&sub.g, &sub.pairs(pairs))?.map(|p| sub.lift(p)))
            }
            other => other,
        }
    }

    fn solve_internal(&mut self, t: usize, pairs: &[(Vertex, Vertex)]) -> Result<Option<Vec<Vec<Vertex>>>> {
        let here = self.unions[t].clone();
        let kids = self.children[t].clone();
        let mut guesses = Vec::new();
        for &c in &kids {
            guesses.push(self.child_guesses(&here, c, pairs));
        }
        let mut chosen: Vec<(usize, Guess, Vec<Vec<Vertex>>)> = Vec::new();
        self.combine(&here, &kids, &guesses, 0, pairs, &mut chosen)
    }

    /// Candidate sets of `(entry, exit)` pieces of a linkage inside the
    /// subtree of `c`. A path leaves and re-enters the subtree only through
    /// the guard, so at most `k + |guard|` pieces occur.
    fn child_guesses(&self, here: &VertexSet, c: usize, pairs: &[(Vertex, Vertex)]) -> Vec<Guess> {
        let a = &self.unions[c];
        let outside = here.difference(a);
        let g = self.g;
        let must_enter: Vec<Vertex> = pairs.iter().map(|p| p.0).filter(|&v| a.contains(v)).collect();
        let must_exit: Vec<Vertex> = pairs.iter().map(|p| p.1).filter(|&v| a.contains(v)).collect();
        let mut entries: Vec<Vertex> = a.iter().filter(|&v| g.in_neighbours(v).iter().any(|&u| outside.contains(u))).collect();
        let mut exits: Vec<Vertex> = a.iter().filter(|&v| g.out_neighbours(v).iter().any(|&u| outside.contains(u))).collect();
        entries.extend(&must_enter);
        exits.extend(&must_exit);
        entries.sort_unstable();
        entries.dedup();
        exits.sort_unstable();
        exits.dedup();
        let cap = pairs.len() + self.d.nodes[c].guard.len();
        let mut out = Vec::new();
        let mut cur = Vec::new();
        let mut used = VertexSet::new(g.n());
        fn rec(
            i: usize,
            entries: &[Vertex],
            exits: &[Vertex],
            cap: usize,
            cur: &mut Guess,
            used: &mut VertexSet,
            must: (&[Vertex], &[Vertex]),
            out: &mut Vec<Guess>,
        ) {
            if i == entries.len() {
                let ok_in = must.0.iter().all(|v| cur.iter().any(|p| p.0 == *v));
                let ok_out = must.1.iter().all(|v| cur.iter().any(|p| p.1 == *v));
                if ok_in && ok_out {
                    out.push(cur.clone());
                }
                return;
            }
            let e = entries[i];
            rec(i + 1, entries, exits, cap, cur, used, must, out);
            if cur.len() == cap || used.contains(e) {
                return;
            }
            for &x in exits {
                if x != e && used.contains(x) {
                    continue;
                }
                cur.push((e, x));
                used.insert(e);
                used.insert(x);
                rec(i + 1, entries, exits, cap, cur, used, must, out);
                cur.pop();
                if x != e {
                    used.remove(x);
                }
                used.remove(e);
            }
        }
        rec(0, &entries, &exits, cap, &mut cur, &mut used, (&must_enter, &must_exit), &mut out);
        out.sort_by_key(|g| g.len());
        out
    }

    fn combine(
        &mut self,
        here: &VertexSet,
        kids: &[usize],
        guesses: &[Vec<Guess>],
        i: usize,
        pairs: &[(Vertex, Vertex)],
        chosen: &mut Vec<(usize, Guess, Vec<Vec<Vertex>>)>,
    ) -> Result<Option<Vec<Vec<Vertex>>>> {
        if i == kids.len() {
            self.budget.spend("quotient instances")?;
            return self.quotient(here, pairs, chosen);
        }
        let taken: VertexSet = {
            let mut s = VertexSet::new(self.g.n());
            for (_, gs, _) in chosen.iter() {
                for &(e, x) in gs {
                    s.insert(e);
                    s.insert(x);
                }
            }
            s
        };
        for guess in &guesses[i] {
            if guess.iter().any(|&(e, x)| taken.contains(e) || taken.contains(x)) {
                continue;
            }
            self.budget.spend("child terminal sets")?;
            let Some(paths) = self.solve(kids[i], guess)? else { continue };
            chosen.push((kids[i], guess.clone(), paths));
            let r = self.combine(here, kids, guesses, i + 1, pairs, chosen)?;
            chosen.pop();
            if r.is_some() {
                return Ok(r);
            }
        }
        Ok(None)
    }

    /// Replaces every child subtree by its guessed pieces, joined by
    /// matching edges, and solves the small quotient exactly.
    fn quotient(&self, here: &VertexSet, pairs: &[(Vertex, Vertex)], chosen: &[(usize, Guess, Vec<Vec<Vertex>>)]) -> Result<Option<Vec<Vec<Vertex>>>> {
        let g = self.g;
        let mut child_of: HashMap<Vertex, usize> = HashMap::new();
        let mut keep = here.clone();
        for (c, _, _) in chosen {
            keep.difference_with(&self.unions[*c]);
        }
        for &c in &self.children_of_chosen(chosen) {
            for v in self.unions[c].iter() {
                child_of.insert(v, c);
            }
        }
        let mut piece: HashMap<Vertex, &Vec<Vertex>> = HashMap::new();
        for (_, guess, paths) in chosen {
            for (&(e, x), p) in guess.iter().zip(paths) {
                keep.insert(e);
                keep.insert(x);
                piece.insert(e, p);
            }
        }
        let verts: Vec<Vertex> = keep.iter().collect();
        let id: HashMap<Vertex, usize> = verts.iter().enumerate().map(|(i, &v)| (v, i)).collect();
        let mut edges = Vec::new();
        for &u in &verts {
            for &v in g.out_neighbours(u) {
                if !keep.contains(v) {
                    continue;
                }
                match (child_of.get(&u), child_of.get(&v)) {
                    (Some(a), Some(b)) if a == b => {}
                    _ => edges.push((id[&u], id[&v])),
                }
            }
        }
        for (_, guess, _) in chosen {
            for &(e, x) in guess {
                if e != x {
                    edges.push((id[&e], id[&x]));
                }
            }
        }
        if pairs.iter().any(|&(s, t)| !keep.contains(s) || !keep.contains(t)) {
            return Ok(None);
        }
        let q = Digraph::with_ids(verts.len(), &edges)?;
        let qpairs: Vec<(Vertex, Vertex)> = pairs.iter().map(|&(s, t)| (id[&s], id[&t])).collect();
        let Some(qpaths) = exact_disjoint_paths(&q, &qpairs)? else { return Ok(None) };
        let mut out = Vec::new();
        for qp in qpaths {
            let p: Vec<Vertex> = qp.iter().map(|&i| verts[i]).collect();
            let mut walk = vec![p[0]];
            for w in p.windows(2) {
                let (u, v) = (w[0], w[1]);
                let internal = matches!((child_of.get(&u), child_of.get(&v)), (Some(a), Some(b)) if a == b);
                if internal {
                    walk.extend(&piece[&u][1..]);
                } else {
                    walk.push(v);
                }
            }
            out.push(shortcut(&walk));
        }
        Ok(Some(out))
    }

    fn children_of_chosen(&self, chosen: &[(usize, Guess, Vec<Vec<Vertex>>)]) -> Vec<usize> {
        chosen.iter().map(|c| c.0).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::two_clusters_bridge;

    #[test]
    fn verifier_catches_violations() {
        let g = Digraph::with_ids(4, &[(0, 1), (1, 2), (3, 1), (1, 0)]).unwrap();
        let pairs = [(0, 2), (3, 2), (0, 2)];
        assert!(verify_half_integral(&g, &pairs[..2], &[vec![0, 1, 2], vec![3, 1, 2]]).is_ok());
        assert!(matches!(
            verify_half_integral(&g, &pairs, &[vec![0, 1, 2], vec![3, 1, 2], vec![0, 1, 2]]),
            Err(HalfViolation::Congestion { .. })
        ));
        assert!(matches!(verify_half_integral(&g, &pairs[..1], &[vec![0, 2]]), Err(HalfViolation::MissingEdge { .. })));
        assert!(matches!(verify_half_integral(&g, &pairs[..1], &[vec![0, 1, 0, 1, 2]]), Err(HalfViolation::Repeated { .. })));
    }

    #[test]
    fn single_pair() {
        let g = Digraph::with_ids(3, &[(0, 1), (1, 2)]).unwrap();
        assert_eq!(half_or_no(&g, &[(0, 2)]).unwrap(), HalfIntegralOutcome::Paths(vec![vec![0, 1, 2]]));
        assert_eq!(half_or_no(&g, &[(2, 0)]).unwrap(), HalfIntegralOutcome::NoIntegral);
    }

    /// Order-1 shield: `A = {s1, s2, x, a1, a2}`, separator `{x}`, and the
    /// `B` side holds both terminals. Path 1 must dip into `B` and come
    /// back over a `B -> A` edge.
    fn shield_instance() -> (Digraph, Vec<(Vertex, Vertex)>, DirectedSeparation) {
        let names: Vec<String> = ["s1", "s2", "a1", "a2", "x", "b1", "b2", "b3", "b4", "t1", "t2", "b5"].map(String::from).to_vec();
        let id = |n: &str| names.iter().position(|x| x == n).unwrap();
        let e = [
            ("s1", "a1"), ("a1", "x"), ("x", "b1"), ("b1", "b2"), ("b2", "a2"), ("a2", "x"),
            ("s2", "a2"), ("b2", "b3"), ("b3", "t1"), ("b1", "b4"), ("b4", "t2"), ("b4", "b5"), ("b5", "t1"),
            ("s2", "x"),
        ];
        let edges: Vec<_> = e.iter().map(|(a, b)| (id(a), id(b))).collect();
        let g = Digraph::from_edges(names.clone(), &edges).unwrap();
        let a = g.set_from_names(&["s1", "s2", "a1", "a2", "x"]).unwrap();
        let b = g.set_from_names(&["x", "b1", "b2", "b3", "b4", "b5", "t1", "t2"]).unwrap();
        let sep = DirectedSeparation::new(b, a);
        assert!(sep.is_valid(&g));
        (g.clone(), vec![(g.id("s1").unwrap(), g.id("t1").unwrap()), (g.id("s2").unwrap(), g.id("t2").unwrap())], sep)
    }

    #[test]
    fn shield_splice_agrees_with_oracle() {
        let (g, pairs, sep) = shield_instance();
        let exact = exact_disjoint_paths(&g, &pairs).unwrap();
        let out = solve_across_shield(&g, &pairs, &sep, DEFAULT_BUDGET).unwrap();
        match (exact, out) {
            (None, HalfIntegralOutcome::NoIntegral) => {}
            (Some(_), HalfIntegralOutcome::Paths(p)) => verify_half_integral(&g, &pairs, &p).unwrap(),
            (e, o) => panic!("oracle {e:?} but splice {o:?}"),
        }
        // Only one of the two pairs fits through the single separator.
        assert_eq!(exact_disjoint_paths(&g, &pairs).unwrap(), None);
        let one = &pairs[..1];
        let HalfIntegralOutcome::Paths(p) = solve_across_shield(&g, one, &sep, DEFAULT_BUDGET).unwrap() else { panic!() };
        verify_half_integral(&g, one, &p).unwrap();
    }

    #[test]
    fn bridge_instance_goes_through_the_dp() {
        let c = two_clusters_bridge();
        let g = &c.graph;
        let cfg = SolverConfig { tangle_order: Some(1), ..Default::default() };
        assert_eq!(detect_tangles(g, 3).unwrap().len(), 2);
        let id = |n: &str| g.id(n).unwrap();
        let (a2, a3, b2, b3) = (id("a2"), id("a3"), id("b2"), id("b3"));
        let pairs = [(a2, b2), (b3, a3), (id("a4"), id("a5")), (id("b5"), id("b4"))];
        // Only the bridge vertex joins the clusters.
        assert_eq!(exact_disjoint_paths(g, &pairs).unwrap(), None);
        assert_eq!(half_or_no_with(g, &pairs, &cfg).unwrap(), HalfIntegralOutcome::NoIntegral);
        let pairs = [(a2, b2), (id("a4"), id("a5")), (id("b5"), id("b4"))];
        let out = half_or_no_with(g, &pairs, &cfg).unwrap();
        let HalfIntegralOutcome::Paths(p) = out else { panic!("expected paths") };
        verify_half_integral(g, &pairs, &p).unwrap();
        assert!(exact_disjoint_paths(g, &pairs).unwrap().is_some());
        let both_ways = [(a2, b2), (a3, b3)];
        assert_eq!(half_or_no_with(g, &both_ways, &cfg).unwrap(), HalfIntegralOutcome::NoIntegral);
    }
}
