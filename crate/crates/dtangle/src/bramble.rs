//! Brambles, exact bramble orders, well-linked sets and bramble
//! distinguishers.

use serde::{Deserialize, Serialize};

use crate::digraph::Digraph;
use crate::error::{Error, Result};
use crate::flow::VertexFlow;
use crate::separation::{min_separation, DirectedSeparation, MinSep};
use crate::set::{binomial, combinations, VertexSet};
use crate::tangle::{unique_big_component, Orientation, Tangle};
use crate::Vertex;

/// Default cap on branch-and-bound nodes in [`bramble_order`].
pub const HITTING_SET_BUDGET: usize = 5_000_000;
/// Default cap on subset pairs examined by [`is_well_linked`].
pub const WELL_LINKED_LIMIT: u128 = 2_000_000;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Bramble {
    /// Deduplicated, sorted.
    pub elements: Vec<VertexSet>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BrambleJson {
    pub elements: Vec<Vec<String>>,
}

impl Bramble {
    pub fn new(mut elements: Vec<VertexSet>) -> Self {
        elements.sort();
        elements.dedup();
        Bramble { elements }
    }

    /// Checks that every element is nonempty and strongly connected and
    /// that elements pairwise intersect.
    pub fn validate(&self, g: &Digraph) -> Result<()> {
        for (i, e) in self.elements.iter().enumerate() {
            if e.is_empty() || !g.is_strongly_connected_set(e) {
                return Err(Error::Invalid(format!("bramble element {:?} is not strongly connected", g.set_names(e))));
            }
            for f in &self.elements[..i] {
                if e.is_disjoint(f) {
                    return Err(Error::Invalid(format!(
                        "bramble elements {:?} and {:?} are disjoint",
                        g.set_names(f),
                        g.set_names(e)
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn is_cover(&self, c: &VertexSet) -> bool {
        self.elements.iter().all(|e| e.intersects(c))
    }

    pub fn to_json(&self, g: &Digraph) -> BrambleJson {
        BrambleJson { elements: self.elements.iter().map(|e| g.set_names(e)).collect() }
    }

    pub fn from_json(g: &Digraph, j: &BrambleJson) -> Result<Self> {
        let els = j.elements.iter().map(|e| g.set_from_names(e)).collect::<Result<Vec<_>>>()?;
        let b = Bramble::new(els);
        b.validate(g)?;
        Ok(b)
    }
}

/// The exact order of `b` and a minimum cover.
pub fn bramble_order(g: &Digraph, b: &Bramble) -> Result<(usize, VertexSet)> {
    bramble_order_with_budget(g, b, HITTING_SET_BUDGET)
}

pub fn bramble_order_with_budget(g: &Digraph, b: &Bramble, budget: usize) -> Result<(usize, VertexSet)> {
    b.validate(g)?;
    let mut els: Vec<&VertexSet> = b.elements.iter().collect();
    els.sort_by_key(|e| e.len());
    // Elements pairwise intersect, so the smallest one is a cover.
    let mut best = els.first().map(|e| (*e).clone()).unwrap_or_else(|| g.empty_set());
    let mut nodes = 0usize;
    let mut cur = g.empty_set();
    hit(&els, &mut cur, &mut best, &mut nodes, budget)?;
    Ok((best.len(), best))
}

fn hit(els: &[&VertexSet], cur: &mut VertexSet, best: &mut VertexSet, nodes: &mut usize, budget: usize) -> Result<()> {
    *nodes += 1;
    if *nodes > budget {
        return Err(Error::SizeGuard(format!("hitting-set search exceeded {budget} nodes")));
    }
    let Some(miss) = els.iter().find(|e| e.is_disjoint(cur)) else {
        if cur.len() < best.len() || (cur.len() == best.len() && *cur < *best) {
            *best = cur.clone();
        }
        return Ok(());
    };
    if cur.len() + 1 > best.len() {
        return Ok(());
    }
    for v in miss.iter() {
        cur.insert(v);
        hit(els, cur, best, nodes, budget)?;
        cur.remove(v);
    }
    Ok(())
}

/// The canonical bramble `{C(X) : |X| < k}` of a tangle of order `k`.
pub fn bramble_from_tangle(g: &Digraph, t: &Tangle) -> Result<Bramble> {
    let n = g.n();
    let total: u128 = (0..t.order.min(n + 1)).map(|r| binomial(n, r)).sum();
    if total > crate::separation::ENUM_SEPARATOR_LIMIT {
        return Err(Error::SizeGuard(format!("{total} small vertex sets")));
    }
    let verts: Vec<Vertex> = g.vertices().collect();
    let mut els = Vec::new();
    for r in 0..t.order.min(n + 1) {
        for xs in combinations(&verts, r) {
            let x = g.set_of(xs);
            if x.len() == n {
                continue;
            }
            let c = unique_big_component(g, t, &x).map_err(crate::tangle::tangle_error)?;
            els.push(c);
        }
    }
    Ok(Bramble::new(els))
}

/// A tangle of order `⌊k/3⌋` from a bramble of order at least `k`.
pub fn tangle_from_bramble(g: &Digraph, b: &Bramble, k: usize) -> Result<Tangle> {
    let (q, _) = bramble_order(g, b)?;
    if q < k {
        return Err(Error::Precondition(format!("bramble order {q} is below {k}")));
    }
    Ok(Tangle { order: k / 3, orientation: Orientation::Bramble(b.clone()) })
}

/// Is `w` well-linked: for all `A, B ⊆ W` with `|A| = |B|` there are `|A|`
/// disjoint `A`-`B` paths in `G - (W ∖ (A ∪ B))`.
pub fn is_well_linked(g: &Digraph, w: &VertexSet) -> Result<bool> {
    Ok(well_linked_witness(g, w)?.is_none())
}

/// A failing pair `(A, B)` if `w` is not well-linked.
pub fn well_linked_witness(g: &Digraph, w: &VertexSet) -> Result<Option<(VertexSet, VertexSet)>> {
    let ws = w.to_vec();
    let pairs: u128 = (1..=ws.len()).map(|r| binomial(ws.len(), r).saturating_mul(binomial(ws.len(), r))).sum();
    if pairs > WELL_LINKED_LIMIT {
        return Err(Error::SizeGuard(format!("{pairs} subset pairs for |W|={}", ws.len())));
    }
    for r in 1..=ws.len() {
        let subsets: Vec<VertexSet> = combinations(&ws, r).map(|c| g.set_of(c)).collect();
        for a in &subsets {
            for b in &subsets {
                let allowed = w.difference(&a.union(b)).complement();
                if VertexFlow::run(g, a, b, &allowed, r).value < r {
                    return Ok(Some((a.clone(), b.clone())));
                }
            }
        }
    }
    Ok(None)
}

/// All well-linked sets of size `m`, in canonical order.
pub fn enumerate_well_linked_sets(g: &Digraph, m: usize) -> Result<Vec<VertexSet>> {
    if binomial(g.n(), m) > WELL_LINKED_LIMIT {
        return Err(Error::SizeGuard(format!("C({}, {m}) candidate sets", g.n())));
    }
    let verts: Vec<Vertex> = g.vertices().collect();
    let mut out = Vec::new();
    for c in combinations(&verts, m) {
        let w = g.set_of(c);
        if is_well_linked(g, &w)? {
            out.push(w);
        }
    }
    Ok(out)
}

/// A separation of order at most `3k - 3` between two covers, trying both
/// directions and keeping the smaller order.
pub fn distinguish_brambles(g: &Digraph, cover1: &VertexSet, cover2: &VertexSet, k: usize) -> Option<DirectedSeparation> {
    if cover1 == cover2 || k == 0 {
        return None;
    }
    let bound = 3 * k - 2;
    let mut best: Option<DirectedSeparation> = None;
    for (s, t) in [(cover1, cover2), (cover2, cover1)] {
        if let MinSep::Found { sep, .. } = min_separation(g, s, t, bound) {
            if best.as_ref().is_none_or(|b| sep.order() < b.order()) {
                best = Some(sep);
            }
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::{bidirected_clique, directed_path};

    #[test]
    fn single_element_order_one() {
        let g = bidirected_clique(3);
        let b = Bramble::new(vec![g.set_of([1])]);
        assert_eq!(bramble_order(&g, &b).unwrap(), (1, g.set_of([1])));
    }

    #[test]
    fn disjoint_elements_rejected() {
        let g = bidirected_clique(4);
        let b = Bramble::new(vec![g.set_of([0]), g.set_of([1])]);
        assert!(bramble_order(&g, &b).is_err());
    }

    #[test]
    fn k6_four_subsets_have_order_three() {
        let g = bidirected_clique(6);
        let v: Vec<_> = g.vertices().collect();
        let els = (4..=6).flat_map(|r| combinations(&v, r).collect::<Vec<_>>()).map(|c| g.set_of(c)).collect();
        let b = Bramble::new(els);
        assert_eq!(bramble_order(&g, &b).unwrap().0, 3);
        let t = tangle_from_bramble(&g, &b, 3).unwrap();
        assert_eq!(t.order, 1);
        assert!(tangle_from_bramble(&g, &b, 4).is_err());
    }

    #[test]
    fn well_linked_basics() {
        let g = bidirected_clique(6);
        assert!(is_well_linked(&g, &g.set_of([0])).unwrap());
        assert!(is_well_linked(&g, &g.set_of([0, 2, 4])).unwrap());
        let p = Digraph::with_ids(2, &[]).unwrap();
        assert!(!is_well_linked(&p, &p.full_set()).unwrap());
        let k5 = bidirected_clique(5);
        assert_eq!(enumerate_well_linked_sets(&k5, 3).unwrap().len(), 10);
    }

    #[test]
    fn path_pairs_are_never_well_linked() {
        let g = directed_path(5);
        assert!(enumerate_well_linked_sets(&g, 2).unwrap().is_empty());
        assert_eq!(enumerate_well_linked_sets(&g, 1).unwrap().len(), 5);
    }
}
