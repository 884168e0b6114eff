//! Directed separations, quadrants, uncrossing and minimum separations.

use serde::{Deserialize, Serialize};

use crate::digraph::Digraph;
use crate::error::{Error, Result};
use crate::flow::VertexFlow;
use crate::set::{binomial, combinations, VertexSet};
use crate::Vertex;

/// A directed separation `(out -> in)`: the sides cover V(G) and every cross
/// edge goes from `out \ in` to `in \ out`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct DirectedSeparation {
    pub out: VertexSet,
    pub inn: VertexSet,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Dir {
    Out,
    In,
}

/// Why a pair of sets is not a directed separation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Violation {
    Uncovered(Vertex),
    CrossEdge(Vertex, Vertex),
}

impl DirectedSeparation {
    /// Trusts the caller; see [`DirectedSeparation::validate`].
    pub fn new(out: VertexSet, inn: VertexSet) -> Self {
        DirectedSeparation { out, inn }
    }

    /// The separation with sides `a`, `b` if one exists, with `out`/`in`
    /// fixed by the cross edges. Without cross edges the side whose private
    /// part holds the smallest private vertex becomes `out`.
    pub fn from_sides(g: &Digraph, a: &VertexSet, b: &VertexSet) -> Option<Self> {
        if a.union(b).len() != g.n() {
            return None;
        }
        let pa = a.difference(b);
        let pb = b.difference(a);
        let ab = crosses(g, &pa, &pb);
        let ba = crosses(g, &pb, &pa);
        match (ab, ba) {
            (true, true) => None,
            (true, false) => Some(Self::new(a.clone(), b.clone())),
            (false, true) => Some(Self::new(b.clone(), a.clone())),
            (false, false) => {
                let a_first = match (pa.first(), pb.first()) {
                    (Some(x), Some(y)) => x < y,
                    (None, Some(_)) => false,
                    _ => true,
                };
                Some(if a_first { Self::new(a.clone(), b.clone()) } else { Self::new(b.clone(), a.clone()) })
            }
        }
    }

    /// Re-derive the direction with the canonical rule.
    pub fn canonical(&self, g: &Digraph) -> Self {
        Self::from_sides(g, &self.out, &self.inn).expect("valid separation")
    }

    pub fn separator(&self) -> VertexSet {
        self.out.intersection(&self.inn)
    }

    pub fn order(&self) -> usize {
        self.out.intersection_len(&self.inn)
    }

    pub fn side(&self, d: Dir) -> &VertexSet {
        match d {
            Dir::Out => &self.out,
            Dir::In => &self.inn,
        }
    }

    /// Unordered identity of the cover: the two sides, smaller first.
    pub fn key(&self) -> (VertexSet, VertexSet) {
        if self.out <= self.inn {
            (self.out.clone(), self.inn.clone())
        } else {
            (self.inn.clone(), self.out.clone())
        }
    }

    pub fn validate(&self, g: &Digraph) -> std::result::Result<(), Violation> {
        for v in g.vertices() {
            if !self.out.contains(v) && !self.inn.contains(v) {
                return Err(Violation::Uncovered(v));
            }
        }
        let po = self.out.difference(&self.inn);
        let pi = self.inn.difference(&self.out);
        for u in pi.iter() {
            for &w in g.out_neighbours(u) {
                if po.contains(w) {
                    return Err(Violation::CrossEdge(u, w));
                }
            }
        }
        Ok(())
    }

    pub fn is_valid(&self, g: &Digraph) -> bool {
        self.validate(g).is_ok()
    }

    /// Separates `s` from `t`: `t ⊆ out`, `s ⊆ in`.
    pub fn separates(&self, s: &VertexSet, t: &VertexSet) -> bool {
        t.is_subset(&self.out) && s.is_subset(&self.inn)
    }

    pub fn to_json(&self, g: &Digraph) -> SeparationJson {
        SeparationJson { out: g.set_names(&self.out), inn: g.set_names(&self.inn) }
    }

    pub fn from_json(g: &Digraph, j: &SeparationJson) -> Result<Self> {
        let s = Self::new(g.set_from_names(&j.out)?, g.set_from_names(&j.inn)?);
        s.validate(g).map_err(|v| Error::Invalid(format!("not a directed separation: {v:?}")))?;
        Ok(s)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeparationJson {
    pub out: Vec<String>,
    #[serde(rename = "in")]
    pub inn: Vec<String>,
}

fn crosses(g: &Digraph, from: &VertexSet, to: &VertexSet) -> bool {
    from.iter().any(|u| g.out_neighbours(u).iter().any(|&w| to.contains(w)))
}

/// `∂⁺(a)`: members with an in-neighbour outside `a`; `∂⁻` symmetric.
pub fn boundary(g: &Digraph, a: &VertexSet, dir: Dir) -> VertexSet {
    let mut s = VertexSet::new(g.n());
    for v in a.iter() {
        let nb = match dir {
            Dir::Out => g.in_neighbours(v),
            Dir::In => g.out_neighbours(v),
        };
        if nb.iter().any(|&w| !a.contains(w)) {
            s.insert(v);
        }
    }
    s
}

/// `X⁺(A) = (A ∪ ∂⁺A, ∂⁺A ∪ (V∖A))`, `X⁻(A)` symmetric; the first side is
/// the one containing `A`.
pub fn induced_separation(g: &Digraph, a: &VertexSet, dir: Dir) -> DirectedSeparation {
    let b = boundary(g, a, dir);
    let first = a.clone();
    let second = b.union(&a.complement());
    match dir {
        // Edges enter A only at ∂⁺A, so A is the out-side.
        Dir::Out => DirectedSeparation::new(first, second),
        Dir::In => DirectedSeparation::new(second, first),
    }
}

/// The four parts of the pair `(x, y)` and their corners.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Quadrants {
    pub top: VertexSet,
    pub left: VertexSet,
    pub right: VertexSet,
    pub bottom: VertexSet,
    pub corner_top: VertexSet,
    pub corner_left: VertexSet,
    pub corner_right: VertexSet,
    pub corner_bottom: VertexSet,
}

pub fn quadrants(x: &DirectedSeparation, y: &DirectedSeparation) -> Quadrants {
    let top = x.out.intersection(&y.out);
    let left = x.out.intersection(&y.inn);
    let right = x.inn.intersection(&y.out);
    let bottom = x.inn.intersection(&y.inn);
    let seps = x.separator().union(&y.separator());
    Quadrants {
        corner_top: seps.intersection(&top),
        corner_left: seps.intersection(&left),
        corner_right: seps.intersection(&right),
        corner_bottom: seps.intersection(&bottom),
        top,
        left,
        right,
        bottom,
    }
}

/// The top separation `(X⁺∩Y⁺ -> X⁻∪Y⁻)` and the bottom separation
/// `(X⁺∪Y⁺ -> X⁻∩Y⁻)`.
pub fn uncross(x: &DirectedSeparation, y: &DirectedSeparation) -> (DirectedSeparation, DirectedSeparation) {
    let top = DirectedSeparation::new(x.out.intersection(&y.out), x.inn.union(&y.inn));
    let bottom = DirectedSeparation::new(x.out.union(&y.out), x.inn.intersection(&y.inn));
    (top, bottom)
}

/// `(A,B)` and `(A',B')` are uncrossed if `A' ⊆ A, B ⊆ B'` or
/// `A' ⊆ B, A ⊆ B'`, tried with both separations in first position.
pub fn are_uncrossed(x: (&VertexSet, &VertexSet), y: (&VertexSet, &VertexSet)) -> bool {
    let pat = |(a, b): (&VertexSet, &VertexSet), (a2, b2): (&VertexSet, &VertexSet)| {
        (a2.is_subset(a) && b.is_subset(b2)) || (a2.is_subset(b) && a.is_subset(b2))
    };
    pat(x, y) || pat(y, x)
}

/// Result of a Menger computation between two vertex sets.
#[derive(Clone, Debug)]
pub enum MinSep {
    /// A separation of minimum order; `order == flow`.
    Found { sep: DirectedSeparation, flow: usize, paths: Vec<Vec<Vertex>> },
    /// The flow reached the bound; no separation of order below it.
    AtLeast { flow: usize, paths: Vec<Vec<Vertex>> },
}

impl MinSep {
    pub fn separation(&self) -> Option<&DirectedSeparation> {
        match self {
            MinSep::Found { sep, .. } => Some(sep),
            MinSep::AtLeast { .. } => None,
        }
    }

    pub fn flow(&self) -> usize {
        match self {
            MinSep::Found { flow, .. } | MinSep::AtLeast { flow, .. } => *flow,
        }
    }
}

/// A minimum-order separation from `s` to `t` (`t ⊆ out`, `s ⊆ in`) via
/// unit vertex-capacity flow, or the flow value if it reaches `bound`. The
/// separator is the minimum cut closest to `t`.
pub fn min_separation(g: &Digraph, s: &VertexSet, t: &VertexSet, bound: usize) -> MinSep {
    min_separation_within(g, s, t, &g.full_set(), bound)
}

/// As [`min_separation`] but paths may only use `allowed`; vertices outside
/// `allowed` are put into the separator side that keeps the result valid
/// in `G[allowed]` terms. Used by routing, where forbidden vertices are
/// simply deleted.
pub fn min_separation_within(g: &Digraph, s: &VertexSet, t: &VertexSet, allowed: &VertexSet, bound: usize) -> MinSep {
    let f = VertexFlow::run(g, s, t, allowed, bound);
    let paths = f.paths();
    if f.value >= bound {
        return MinSep::AtLeast { flow: f.value, paths };
    }
    let (cut, t_side) = f.cut_near_sink();
    let out = t_side.union(&cut);
    let inn = t_side.complement();
    MinSep::Found { sep: DirectedSeparation::new(out, inn), flow: f.value, paths }
}

/// As [`min_separation`] but with the minimum cut closest to `s`, so the
/// in-side is as small as possible.
pub fn min_separation_near_source(g: &Digraph, s: &VertexSet, t: &VertexSet, bound: usize) -> MinSep {
    let f = VertexFlow::run(g, s, t, &g.full_set(), bound);
    let paths = f.paths();
    if f.value >= bound {
        return MinSep::AtLeast { flow: f.value, paths };
    }
    let (cut, s_side) = f.cut_near_source();
    let inn = s_side.union(&cut);
    let out = s_side.complement();
    MinSep::Found { sep: DirectedSeparation::new(out, inn), flow: f.value, paths }
}

/// Default cap on the number of separators examined by enumeration.
pub const ENUM_SEPARATOR_LIMIT: u128 = 2_000_000;
/// Default cap on the number of separations produced by enumeration.
pub const ENUM_OUTPUT_LIMIT: usize = 5_000_000;

/// All separations with separator exactly `x`, one per unordered cover.
pub fn separations_with_separator(g: &Digraph, x: &VertexSet) -> Vec<DirectedSeparation> {
    let dag = g.component_dag(x);
    let mut out = Vec::new();
    for down in dag.downward_closed_sets() {
        let d = dag.vertices_of(&down, g.n());
        let u = x.union(&d).complement();
        let inn = d.union(x);
        let outs = u.union(x);
        // The reverse orientation exists only if no edge joins U and D at
        // all; keep one copy, decided by the canonical rule.
        let cross = crosses(g, &u, &d);
        if !cross {
            let keep = match (u.first(), d.first()) {
                (Some(a), Some(b)) => a < b,
                (None, Some(_)) => false,
                _ => true,
            };
            if !keep {
                continue;
            }
        }
        out.push(DirectedSeparation::new(outs, inn));
    }
    out.sort();
    out
}

/// Every directed separation of order ≤ `max_order`, each cover once,
/// sorted by order, then separator, then sides.
pub fn enumerate_separations(g: &Digraph, max_order: usize) -> Result<Vec<DirectedSeparation>> {
    enumerate_separations_with_limits(g, max_order, ENUM_SEPARATOR_LIMIT, ENUM_OUTPUT_LIMIT)
}

pub fn enumerate_separations_with_limits(g: &Digraph, max_order: usize, sep_limit: u128, out_limit: usize) -> Result<Vec<DirectedSeparation>> {
    let n = g.n();
    let total: u128 = (0..=max_order.min(n)).map(|r| binomial(n, r)).sum();
    if total > sep_limit {
        return Err(Error::SizeGuard(format!("{total} candidate separators for n={n}, order ≤ {max_order}")));
    }
    let verts: Vec<Vertex> = g.vertices().collect();
    let mut all = Vec::new();
    for r in 0..=max_order.min(n) {
        for xs in combinations(&verts, r) {
            let x = g.set_of(xs);
            let mut seps = separations_with_separator(g, &x);
            all.append(&mut seps);
            if all.len() > out_limit {
                return Err(Error::SizeGuard(format!("more than {out_limit} separations")));
            }
        }
    }
    Ok(all)
}

/// Separations of order exactly `order`.
pub fn enumerate_separations_of_order(g: &Digraph, order: usize) -> Result<Vec<DirectedSeparation>> {
    let n = g.n();
    if order > n {
        return Ok(Vec::new());
    }
    if binomial(n, order) > ENUM_SEPARATOR_LIMIT {
        return Err(Error::SizeGuard(format!("C({n},{order}) candidate separators")));
    }
    let verts: Vec<Vertex> = g.vertices().collect();
    let mut all = Vec::new();
    for xs in combinations(&verts, order) {
        all.extend(separations_with_separator(g, &g.set_of(xs)));
        if all.len() > ENUM_OUTPUT_LIMIT {
            return Err(Error::SizeGuard(format!("more than {ENUM_OUTPUT_LIMIT} separations")));
        }
    }
    Ok(all)
}
