//! Tangles: orientations of all separations below an order.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::bramble::Bramble;
use crate::digraph::Digraph;
use crate::error::{Error, Result};
use crate::separation::{enumerate_separations, Dir, DirectedSeparation};
use crate::set::VertexSet;

/// How a tangle decides which side of a separation is big.
#[derive(Clone, Debug)]
pub enum Orientation {
    /// Big side per separation, keyed by [`DirectedSeparation::key`].
    Explicit(HashMap<(VertexSet, VertexSet), VertexSet>),
    /// The big side is the one whose private part holds more of the anchor
    /// set (a well-linked set or a minimum bramble cover).
    Anchor(VertexSet),
    /// The big side contains the component of `G - sep` hosting the
    /// bramble elements that avoid the separator.
    Bramble(Bramble),
}

#[derive(Clone, Debug)]
pub struct Tangle {
    /// Orients every separation of order `< order`.
    pub order: usize,
    pub orientation: Orientation,
}

/// A failed tangle axiom.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum AxiomWitness {
    Unoriented(DirectedSeparation),
    /// A big side that does not belong to the separation.
    Malformed(DirectedSeparation),
    /// Three small sides (with their separations) covering V(G).
    Cover([DirectedSeparation; 3]),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TangleCertificate {
    pub k: usize,
    pub cover: Vec<String>,
}

impl Tangle {
    pub fn from_anchor(order: usize, anchor: VertexSet) -> Self {
        Tangle { order, orientation: Orientation::Anchor(anchor) }
    }

    pub fn from_certificate(g: &Digraph, c: &TangleCertificate) -> Result<Self> {
        Ok(Self::from_anchor(c.k, g.set_from_names(&c.cover)?))
    }

    pub fn certificate(&self, g: &Digraph) -> Option<TangleCertificate> {
        match &self.orientation {
            Orientation::Anchor(w) => Some(TangleCertificate { k: self.order, cover: g.set_names(w) }),
            _ => None,
        }
    }

    /// The anchor vertices used to find distinguishers by flow, if any.
    pub fn anchor(&self) -> Option<&VertexSet> {
        match &self.orientation {
            Orientation::Anchor(w) => Some(w),
            _ => None,
        }
    }

    pub fn is_explicit(&self) -> bool {
        matches!(self.orientation, Orientation::Explicit(_))
    }

    /// The big side of `s`, or `None` if `s` is not oriented (order too
    /// large, or missing from an explicit map).
    pub fn big(&self, _g: &Digraph, s: &DirectedSeparation) -> Option<Dir> {
        if s.order() >= self.order {
            return None;
        }
        match &self.orientation {
            Orientation::Explicit(map) => {
                let big = map.get(&s.key())?;
                if big == &s.out {
                    Some(Dir::Out)
                } else if big == &s.inn {
                    Some(Dir::In)
                } else {
                    None
                }
            }
            Orientation::Anchor(w) => {
                let o = w.intersection_len(&s.out.difference(&s.inn));
                let i = w.intersection_len(&s.inn.difference(&s.out));
                Some(if o > i {
                    Dir::Out
                } else if i > o {
                    Dir::In
                } else {
                    // Degenerate anchors only; stay deterministic.
                    let po = s.out.difference(&s.inn).first().unwrap_or(usize::MAX);
                    let pi = s.inn.difference(&s.out).first().unwrap_or(usize::MAX);
                    if po <= pi {
                        Dir::Out
                    } else {
                        Dir::In
                    }
                })
            }
            Orientation::Bramble(b) => {
                let sep = s.separator();
                let host = b.elements.iter().find(|e| e.is_disjoint(&sep))?;
                let po = s.out.difference(&s.inn);
                Some(if host.is_subset(&po) { Dir::Out } else { Dir::In })
            }
        }
    }

    /// `(small, big)` sides of `s`.
    pub fn orient<'a>(&self, g: &Digraph, s: &'a DirectedSeparation) -> Option<(&'a VertexSet, &'a VertexSet)> {
        match self.big(g, s)? {
            Dir::Out => Some((&s.inn, &s.out)),
            Dir::In => Some((&s.out, &s.inn)),
        }
    }

    /// True if the tangle contains the oriented separation `(small, big)`.
    pub fn contains(&self, g: &Digraph, s: &DirectedSeparation, big: Dir) -> bool {
        self.big(g, s) == Some(big)
    }

    /// The explicit version of this tangle over all separations of order
    /// below its order.
    pub fn to_explicit(&self, g: &Digraph) -> Result<Tangle> {
        let mut map = HashMap::new();
        if self.order > 0 {
            for s in enumerate_separations(g, self.order - 1)? {
                if let Some(d) = self.big(g, &s) {
                    map.insert(s.key(), s.side(d).clone());
                }
            }
        }
        Ok(Tangle { order: self.order, orientation: Orientation::Explicit(map) })
    }

    /// Orientations of separations of order `< l` only.
    pub fn restrict(&self, l: usize) -> Tangle {
        let order = l.min(self.order);
        let orientation = match &self.orientation {
            Orientation::Explicit(map) => Orientation::Explicit(
                map.iter().filter(|(k, _)| k.0.intersection_len(&k.1) < order).map(|(k, v)| (k.clone(), v.clone())).collect(),
            ),
            o => o.clone(),
        };
        Tangle { order, orientation }
    }

    /// Flip the orientation of one separation (explicit tangles only).
    pub fn flipped(&self, s: &DirectedSeparation) -> Option<Tangle> {
        let Orientation::Explicit(map) = &self.orientation else { return None };
        let mut map = map.clone();
        let big = map.get_mut(&s.key())?;
        *big = if *big == s.out { s.inn.clone() } else { s.out.clone() };
        Some(Tangle { order: self.order, orientation: Orientation::Explicit(map) })
    }
}

/// Check both tangle axioms by enumerating all separations of order below
/// `t.order`.
pub fn check_tangle_axioms(g: &Digraph, t: &Tangle) -> Result<std::result::Result<(), AxiomWitness>> {
    if t.order == 0 {
        return Ok(Ok(()));
    }
    let seps = enumerate_separations(g, t.order - 1)?;
    let mut smalls: Vec<(VertexSet, usize)> = Vec::with_capacity(seps.len());
    for (i, s) in seps.iter().enumerate() {
        if let Orientation::Explicit(map) = &t.orientation {
            if let Some(b) = map.get(&s.key()) {
                if b != &s.out && b != &s.inn {
                    return Ok(Err(AxiomWitness::Malformed(s.clone())));
                }
            }
        }
        match t.orient(g, s) {
            None => return Ok(Err(AxiomWitness::Unoriented(s.clone()))),
            Some((small, _)) => smalls.push((small.clone(), i)),
        }
    }
    Ok(match covering_triple(g.n(), &smalls) {
        Some([a, b, c]) => Err(AxiomWitness::Cover([seps[a].clone(), seps[b].clone(), seps[c].clone()])),
        None => Ok(()),
    })
}

/// Indices (into the caller's separation list) of three sets covering
/// `0..n`, repetition allowed.
pub fn covering_triple(n: usize, sets: &[(VertexSet, usize)]) -> Option<[usize; 3]> {
    // Only inclusion-maximal sets matter.
    let mut order: Vec<usize> = (0..sets.len()).collect();
    order.sort_by_key(|&i| std::cmp::Reverse(sets[i].0.len()));
    let mut maximal: Vec<usize> = Vec::new();
    for &i in &order {
        if !maximal.iter().any(|&j| sets[i].0.is_subset(&sets[j].0)) {
            maximal.push(i);
        }
    }
    let m = maximal.len();
    // holders[v] = bitset over `maximal` of sets containing v.
    let words = m.div_ceil(64).max(1);
    let mut holders = vec![vec![0u64; words]; n];
    for (p, &i) in maximal.iter().enumerate() {
        for v in sets[i].0.iter() {
            holders[v][p / 64] |= 1 << (p % 64);
        }
    }
    for a in 0..m {
        for b in a..m {
            let sa = &sets[maximal[a]].0;
            let sb = &sets[maximal[b]].0;
            let mut acc = vec![u64::MAX; words];
            for v in 0..n {
                if sa.contains(v) || sb.contains(v) {
                    continue;
                }
                for (w, h) in acc.iter_mut().zip(&holders[v]) {
                    *w &= h;
                }
            }
            for (wi, &w) in acc.iter().enumerate() {
                let mut w = w;
                if wi == words - 1 && m % 64 != 0 {
                    w &= (1u64 << (m % 64)) - 1;
                }
                if w != 0 {
                    let c = wi * 64 + w.trailing_zeros() as usize;
                    return Some([sets[maximal[a]].1, sets[maximal[b]].1, sets[maximal[c]].1]);
                }
            }
        }
    }
    None
}

/// The component `C(X)` in the big side of every separation with separator
/// `x`, found by growing a maximal downward closed small set in 𝒟(G, X).
pub fn unique_big_component(g: &Digraph, t: &Tangle, x: &VertexSet) -> std::result::Result<VertexSet, AxiomWitness> {
    let dag = g.component_dag(x);
    if dag.len() == 1 {
        return Ok(dag.comps[0].clone());
    }
    let sep_for = |set: &[bool]| -> DirectedSeparation {
        let d = dag.vertices_of(set, g.n()).union(x);
        let u = d.complement().union(x);
        DirectedSeparation::from_sides(g, &d, &u).expect("down-closed sets induce separations")
    };
    let is_small_down = |set: &[bool]| -> std::result::Result<bool, AxiomWitness> {
        let s = sep_for(set);
        let d = dag.vertices_of(set, g.n()).union(x);
        match t.orient(g, &s) {
            None => Err(AxiomWitness::Unoriented(s)),
            Some((small, _)) => Ok(small == &d),
        }
    };
    let mut s = vec![false; dag.len()];
    if !is_small_down(&s)? {
        // D(∅) = X must be small.
        return Err(AxiomWitness::Cover([sep_for(&s), sep_for(&s), sep_for(&s)]));
    }
    loop {
        let mut grown = false;
        for &c in &dag.topo {
            if s[c] || !dag.succ[c].iter().all(|&d| s[d]) {
                continue;
            }
            s[c] = true;
            if is_small_down(&s)? {
                grown = true;
                break;
            }
            s[c] = false;
        }
        if !grown {
            break;
        }
    }
    let sinks: Vec<usize> = (0..dag.len()).filter(|&c| !s[c] && dag.succ[c].iter().all(|&d| s[d])).collect();
    match sinks.as_slice() {
        [c] => Ok(dag.comps[*c].clone()),
        _ => {
            let mut w = Vec::new();
            for &c in sinks.iter().take(2) {
                let mut s2 = s.clone();
                s2[c] = true;
                w.push(sep_for(&s2));
            }
            w.push(sep_for(&s));
            Err(AxiomWitness::Cover([w[0].clone(), w[1].clone(), w[2].clone()]))
        }
    }
}

/// Does `s` distinguish `t1` and `t2` (both orient it, differently)?
pub fn distinguishes(g: &Digraph, t1: &Tangle, t2: &Tangle, s: &DirectedSeparation) -> bool {
    match (t1.big(g, s), t2.big(g, s)) {
        (Some(a), Some(b)) => a != b,
        _ => false,
    }
}

/// A minimum-order distinguisher found by enumerating separations in
/// canonical order (exact).
pub fn min_distinguisher_exact(g: &Digraph, t1: &Tangle, t2: &Tangle) -> Result<Option<DirectedSeparation>> {
    let top = t1.order.min(t2.order);
    if top == 0 {
        return Ok(None);
    }
    for r in 0..top {
        for s in crate::separation::enumerate_separations_of_order(g, r)? {
            if distinguishes(g, t1, t2, &s) {
                return Ok(Some(s));
            }
        }
    }
    Ok(None)
}

/// A distinguisher between two anchored tangles via minimum cuts between
/// the anchors in both directions. Exact for clique-like anchors; within a
/// factor 3 for well-linked anchors.
pub fn min_distinguisher_flow(g: &Digraph, t1: &Tangle, t2: &Tangle) -> Option<DirectedSeparation> {
    let (w1, w2) = (t1.anchor()?, t2.anchor()?);
    let top = t1.order.min(t2.order);
    let mut best: Option<DirectedSeparation> = None;
    for (a, b) in [(w1, w2), (w2, w1)] {
        if let crate::separation::MinSep::Found { sep, .. } = crate::separation::min_separation(g, a, b, top) {
            if distinguishes(g, t1, t2, &sep) && best.as_ref().is_none_or(|x| sep.order() < x.order()) {
                best = Some(sep);
            }
        }
    }
    best
}

/// Two tangles are distinguishable iff some enumerated separation
/// distinguishes them.
pub fn distinguishable_exact(g: &Digraph, t1: &Tangle, t2: &Tangle) -> Result<bool> {
    Ok(min_distinguisher_exact(g, t1, t2)?.is_some())
}

/// `cone(T, l)`: members of `ts` agreeing with `t` on every separation of
/// order `< l`, evaluated over `seps` (all separations of order `< l`).
/// Also returns the strict cone: the distinct restrictions to order `l + 1`
/// of the cone members, as groups of indices.
pub fn cones(g: &Digraph, ts: &[Tangle], t: usize, l: usize, seps: &[DirectedSeparation]) -> (Vec<usize>, Vec<Vec<usize>>) {
    let agree = |a: usize, b: usize, below: usize| {
        seps.iter().filter(|s| s.order() < below).all(|s| ts[a].big(g, s) == ts[b].big(g, s))
    };
    let cone: Vec<usize> = (0..ts.len()).filter(|&i| ts[i].order >= l && agree(t, i, l)).collect();
    let mut groups: Vec<Vec<usize>> = Vec::new();
    for &i in &cone {
        match groups.iter_mut().find(|gr| agree(gr[0], i, l + 1)) {
            Some(gr) => gr.push(i),
            None => groups.push(vec![i]),
        }
    }
    (cone, groups)
}

pub fn tangle_error(w: AxiomWitness) -> Error {
    Error::Invalid(format!("tangle axiom violated: {w:?}"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::bidirected_clique;

    #[test]
    fn k7_anchor_tangle_is_a_tangle() {
        let g = bidirected_clique(7);
        let t = Tangle::from_anchor(3, g.full_set());
        assert_eq!(check_tangle_axioms(&g, &t).unwrap(), Ok(()));
        let e = t.to_explicit(&g).unwrap();
        assert_eq!(check_tangle_axioms(&g, &e).unwrap(), Ok(()));
    }

    #[test]
    fn flipping_gives_a_cover_witness() {
        let g = bidirected_clique(7);
        let t = Tangle::from_anchor(3, g.full_set()).to_explicit(&g).unwrap();
        let seps = enumerate_separations(&g, 2).unwrap();
        let s = seps.iter().find(|s| s.order() == 2).unwrap();
        let f = t.flipped(s).unwrap();
        match check_tangle_axioms(&g, &f).unwrap() {
            Err(AxiomWitness::Cover(tr)) => {
                let mut u = g.empty_set();
                for x in &tr {
                    u.union_with(f.orient(&g, x).unwrap().0);
                }
                assert_eq!(u, g.full_set());
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn big_component_in_clique() {
        let g = bidirected_clique(7);
        let t = Tangle::from_anchor(3, g.full_set());
        let x = g.set_of([1, 4]);
        assert_eq!(unique_big_component(&g, &t, &x).unwrap(), x.complement());
    }

    #[test]
    fn restriction_at_full_order_is_identity() {
        let g = bidirected_clique(5);
        let t = Tangle::from_anchor(2, g.full_set()).to_explicit(&g).unwrap();
        let r = t.restrict(2);
        for s in enumerate_separations(&g, 1).unwrap() {
            assert_eq!(t.big(&g, &s), r.big(&g, &s));
        }
        let z = t.restrict(0);
        assert_eq!(z.order, 0);
    }
}
