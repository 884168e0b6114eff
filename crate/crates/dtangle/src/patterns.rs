//! Pattern graphs: how an integral linkage crosses a small separation.
//!
//! A pattern graph is a disjoint union of `k` paths on vertices coloured
//! `L`, `M` or `R`. Path `i` stands for the `i`-th linkage path, so two
//! patterns are isomorphic when some colour-preserving relabelling maps
//! path `i` to path `i` for every `i`. A representative is therefore the
//! tuple of colour words read along the paths.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum PatternType {
    /// Cross edges only from `R` to `L`; no path starts in `R`.
    #[serde(rename = "R->L")]
    RToL,
    /// Cross edges only from `L` to `R`; no path starts in `L`.
    #[serde(rename = "L->R")]
    LToR,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Part {
    L,
    M,
    R,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct PatternGraph {
    pub kind: PatternType,
    pub paths: Vec<Vec<Part>>,
}

impl PatternType {
    /// The part paths may not start in.
    fn forbidden_start(self) -> Part {
        match self {
            PatternType::RToL => Part::R,
            PatternType::LToR => Part::L,
        }
    }

    /// The forbidden cross edge `(from, to)`.
    fn forbidden_edge(self) -> (Part, Part) {
        match self {
            PatternType::RToL => (Part::L, Part::R),
            PatternType::LToR => (Part::R, Part::L),
        }
    }

    /// Size bounds `(|L|, |R|)` for parameters `k`, `t`.
    pub fn bounds(self, k: usize, t: usize) -> (usize, usize) {
        match self {
            PatternType::RToL => (4 * t + 2 * k, t),
            PatternType::LToR => (t, 4 * t + 2 * k),
        }
    }
}

impl PatternGraph {
    pub fn count(&self, p: Part) -> usize {
        self.paths.iter().flatten().filter(|&&x| x == p).count()
    }

    pub fn len(&self) -> usize {
        self.paths.iter().map(Vec::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Vertex ids run along path 0, then path 1, and so on.
    pub fn parts(&self) -> Vec<Part> {
        self.paths.iter().flatten().copied().collect()
    }

    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut e = Vec::new();
        let mut base = 0;
        for p in &self.paths {
            for i in 1..p.len() {
                e.push((base + i - 1, base + i));
            }
            base += p.len();
        }
        e
    }

    /// The five defining conditions plus the size bounds.
    pub fn is_valid(&self, k: usize, t: usize) -> bool {
        if self.paths.len() != k || self.paths.iter().any(Vec::is_empty) {
            return false;
        }
        let (bl, br) = self.kind.bounds(k, t);
        if self.count(Part::M) > t || self.count(Part::L) > bl || self.count(Part::R) > br {
            return false;
        }
        self.paths.iter().all(|w| word_ok(self.kind, w))
    }
}

fn word_ok(kind: PatternType, w: &[Part]) -> bool {
    if w[0] == kind.forbidden_start() {
        return false;
    }
    let bad = kind.forbidden_edge();
    for i in 1..w.len() {
        if (w[i - 1], w[i]) == bad {
            return false;
        }
        // Runs inside L or R are single vertices or isolated edges.
        if i >= 2 && w[i] != Part::M && w[i] == w[i - 1] && w[i] == w[i - 2] {
            return false;
        }
    }
    true
}

/// Every pattern graph of type `(kind, k, t)` that satisfies the size
/// bounds, in canonical order (total size, then words).
pub fn enumerate_pattern_graphs(kind: PatternType, k: usize, t: usize) -> Vec<PatternGraph> {
    let (bl, br) = kind.bounds(k, t);
    let mut out = Vec::new();
    let mut cur: Vec<Vec<Part>> = Vec::new();
    fn words(
        kind: PatternType,
        k: usize,
        caps: [usize; 3],
        cur: &mut Vec<Vec<Part>>,
        out: &mut Vec<PatternGraph>,
    ) {
        if cur.len() == k {
            out.push(PatternGraph { kind, paths: cur.clone() });
            return;
        }
        let mut word = Vec::new();
        extend(kind, k, caps, &mut word, cur, out);
    }
    fn extend(
        kind: PatternType,
        k: usize,
        caps: [usize; 3],
        word: &mut Vec<Part>,
        cur: &mut Vec<Vec<Part>>,
        out: &mut Vec<PatternGraph>,
    ) {
        if !word.is_empty() {
            cur.push(word.clone());
            words(kind, k, caps, cur, out);
            cur.pop();
        }
        for (i, p) in [Part::L, Part::M, Part::R].into_iter().enumerate() {
            if caps[i] == 0 {
                continue;
            }
            word.push(p);
            if word_ok(kind, word) {
                let mut c = caps;
                c[i] -= 1;
                extend(kind, k, c, word, cur, out);
            }
            word.pop();
        }
    }
    words(kind, k, [bl, t, br], &mut cur, &mut out);
    out.sort_by(|a, b| (a.len(), &a.paths).cmp(&(b.len(), &b.paths)));
    out
}

/// Independent count of pattern classes for a single path (`k = 1`):
/// every Hamiltonian path on `n` part-assigned vertices is built as a
/// digraph, filtered by the defining conditions checked on the digraph,
/// and reduced to a canonical form by trying every relabelling inside the
/// parts.
pub fn naive_single_path_classes(kind: PatternType, t: usize, max_vertices: usize) -> usize {
    let (bl, br) = kind.bounds(1, t);
    let mut classes: BTreeSet<(usize, usize, usize, Vec<(usize, usize)>)> = BTreeSet::new();
    for n in 1..=max_vertices {
        for l in 0..=n.min(bl) {
            for m in 0..=(n - l).min(t) {
                let r = n - l - m;
                if r > br {
                    continue;
                }
                let part = |v: usize| if v < l { Part::L } else if v < l + m { Part::M } else { Part::R };
                for order in permutations(n) {
                    let edges: Vec<(usize, usize)> = order.windows(2).map(|w| (w[0], w[1])).collect();
                    if !naive_conditions(kind, n, &edges, &part) {
                        continue;
                    }
                    classes.insert((l, m, r, canonical(&edges, [l, m, r])));
                }
            }
        }
    }
    classes.len()
}

fn naive_conditions(kind: PatternType, n: usize, edges: &[(usize, usize)], part: &dyn Fn(usize) -> Part) -> bool {
    let mut indeg = vec![0; n];
    for &(_, b) in edges {
        indeg[b] += 1;
    }
    if (0..n).any(|v| indeg[v] == 0 && part(v) == kind.forbidden_start()) {
        return false;
    }
    if edges.iter().any(|&(a, b)| (part(a), part(b)) == kind.forbidden_edge()) {
        return false;
    }
    // Inside L and inside R, every edge is an isolated edge.
    for &(a, b) in edges {
        if part(a) == part(b) && part(a) != Part::M {
            let touching = edges.iter().filter(|&&(x, y)| part(x) == part(a) && part(y) == part(a) && [x, y].iter().any(|z| *z == a || *z == b)).count();
            if touching != 1 {
                return false;
            }
        }
    }
    true
}

fn canonical(edges: &[(usize, usize)], sizes: [usize; 3]) -> Vec<(usize, usize)> {
    let blocks: Vec<Vec<Vec<usize>>> = sizes.iter().map(|&s| permutations(s)).collect();
    let mut best: Option<Vec<(usize, usize)>> = None;
    for a in &blocks[0] {
        for b in &blocks[1] {
            for c in &blocks[2] {
                let map = |v: usize| {
                    if v < sizes[0] {
                        a[v]
                    } else if v < sizes[0] + sizes[1] {
                        sizes[0] + b[v - sizes[0]]
                    } else {
                        sizes[0] + sizes[1] + c[v - sizes[0] - sizes[1]]
                    }
                };
                let mut e: Vec<(usize, usize)> = edges.iter().map(|&(x, y)| (map(x), map(y))).collect();
                e.sort_unstable();
                if best.as_ref().is_none_or(|b| e < *b) {
                    best = Some(e);
                }
            }
        }
    }
    best.unwrap_or_default()
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur: Vec<usize> = (0..n).collect();
    fn heap(k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if k <= 1 {
            out.push(cur.clone());
            return;
        }
        for i in 0..k {
            heap(k - 1, cur, out);
            let j = if k % 2 == 0 { i } else { 0 };
            cur.swap(j, k - 1);
        }
    }
    heap(n, &mut cur, &mut out);
    out
}
