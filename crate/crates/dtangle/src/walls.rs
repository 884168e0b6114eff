//! Cylindrical grids and walls, wall certificates, routing inside a wall
//! and routing through a wall.
//!
//! Rows are numbered in their cyclic order around the cycles: row `2j` is
//! `p1[j]` (runs from the outer cycle inwards), row `2j + 1` is `p2[j]`
//! (runs outwards). Cycle and column indices are 0-based; `cycles[0]` is
//! the outer cycle.

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::digraph::Digraph;
use crate::error::{Error, Result};
use crate::flow::VertexFlow;
use crate::separation::{min_separation_near_source, DirectedSeparation, MinSep, SeparationJson};
use crate::set::VertexSet;
use crate::Vertex;

const NONE: usize = usize::MAX;

/// A wall certificate: full vertex sequences of the nested cycles and of
/// both row families.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Wall {
    pub order: usize,
    pub cycles: Vec<Vec<Vertex>>,
    pub p1: Vec<Vec<Vertex>>,
    pub p2: Vec<Vec<Vertex>>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct WallPathsJson {
    #[serde(rename = "P1")]
    pub p1: Vec<Vec<String>>,
    #[serde(rename = "P2")]
    pub p2: Vec<Vec<String>>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct WallJson {
    pub order: usize,
    pub cycles: Vec<Vec<String>>,
    pub paths: WallPathsJson,
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum WallViolation {
    #[error("malformed certificate: {0}")]
    Shape(String),
    #[error("vertex {0} is not in the host")]
    UnknownVertex(Vertex),
    #[error("certified edge {0} -> {1} is missing from the host")]
    MissingEdge(Vertex, Vertex),
    #[error("vertex {0} appears twice among the cycles or among the rows")]
    Repeated(Vertex),
    #[error("row {row} does not meet cycle {cycle} in one subpath in the expected order")]
    Crossing { row: usize, cycle: usize },
    #[error("rows do not meet cycle {cycle} in cyclic order")]
    RowOrder { cycle: usize },
    #[error("vertex {0} lies in no extended column")]
    Partition(Vertex),
}

/// Per-vertex lookup tables for a validated wall.
#[derive(Clone, Debug)]
pub struct WallIndex {
    cycle_of: Vec<usize>,
    cpos: Vec<usize>,
    row_of: Vec<usize>,
    rpos: Vec<usize>,
    column: Vec<usize>,
}

impl WallIndex {
    pub fn cycle_of(&self, v: Vertex) -> Option<usize> {
        opt(self.cycle_of[v])
    }

    /// Row number in cyclic order (`2j` for `p1[j]`, `2j + 1` for `p2[j]`).
    pub fn row_of(&self, v: Vertex) -> Option<usize> {
        opt(self.row_of[v])
    }

    /// Extended column of `v`.
    pub fn column(&self, v: Vertex) -> Option<usize> {
        opt(self.column[v])
    }
}

fn opt(x: usize) -> Option<usize> {
    (x != NONE).then_some(x)
}

impl Wall {
    pub fn row(&self, r: usize) -> &[Vertex] {
        if r % 2 == 0 {
            &self.p1[r / 2]
        } else {
            &self.p2[r / 2]
        }
    }

    pub fn rows(&self) -> usize {
        2 * self.order
    }

    pub fn vertices(&self, n: usize) -> VertexSet {
        let mut s = VertexSet::new(n);
        for seq in self.cycles.iter().chain(&self.p1).chain(&self.p2) {
            for &v in seq {
                s.insert(v);
            }
        }
        s
    }

    pub fn to_json(&self, g: &Digraph) -> WallJson {
        let names = |seqs: &[Vec<Vertex>]| -> Vec<Vec<String>> {
            seqs.iter().map(|s| s.iter().map(|&v| g.name(v).to_string()).collect()).collect()
        };
        WallJson {
            order: self.order,
            cycles: names(&self.cycles),
            paths: WallPathsJson { p1: names(&self.p1), p2: names(&self.p2) },
        }
    }

    pub fn from_json(g: &Digraph, j: &WallJson) -> Result<Self> {
        let ids = |seqs: &[Vec<String>]| -> Result<Vec<Vec<Vertex>>> {
            seqs.iter().map(|s| s.iter().map(|n| g.id_or_err(n)).collect()).collect()
        };
        Ok(Wall { order: j.order, cycles: ids(&j.cycles)?, p1: ids(&j.paths.p1)?, p2: ids(&j.paths.p2)? })
    }

    /// The certificate of the same wall in the reversed host.
    pub fn reversed(&self) -> Wall {
        let rev = |s: &Vec<Vertex>| s.iter().rev().copied().collect::<Vec<_>>();
        let m = self.order;
        Wall {
            order: m,
            cycles: self.cycles.iter().map(rev).collect(),
            p1: (0..m).map(|j| rev(&self.p2[m - 1 - j])).collect(),
            p2: (0..m).map(|j| rev(&self.p1[m - 1 - j])).collect(),
        }
    }

    /// Renames every vertex through `f`.
    pub fn map(&self, f: impl Fn(Vertex) -> Vertex) -> Wall {
        let m = |seqs: &[Vec<Vertex>]| seqs.iter().map(|s| s.iter().map(|&v| f(v)).collect()).collect();
        Wall { order: self.order, cycles: m(&self.cycles), p1: m(&self.p1), p2: m(&self.p2) }
    }

    /// The largest sub-wall built from the cycles and bidirected rows that
    /// lie entirely inside `keep`, with rows cut to the kept cycles.
    pub fn restrict(&self, keep: &VertexSet) -> Option<Wall> {
        let inside = |s: &[Vertex]| s.iter().all(|&v| keep.contains(v));
        let cycles: Vec<usize> = (0..self.order).filter(|&i| inside(&self.cycles[i])).collect();
        let rows: Vec<usize> = (0..self.order).filter(|&j| inside(&self.p1[j]) && inside(&self.p2[j])).collect();
        let o = cycles.len().min(rows.len());
        if o == 0 {
            return None;
        }
        let (first, last) = (&self.cycles[cycles[0]], &self.cycles[cycles[o - 1]]);
        let cut = |row: &[Vertex], from: &[Vertex], to: &[Vertex]| -> Option<Vec<Vertex>> {
            let a = row.iter().position(|v| from.contains(v))?;
            let b = row.iter().rposition(|v| to.contains(v))?;
            (a <= b).then(|| row[a..=b].to_vec())
        };
        Some(Wall {
            order: o,
            cycles: cycles[..o].iter().map(|&i| self.cycles[i].clone()).collect(),
            p1: rows[..o].iter().map(|&j| cut(&self.p1[j], first, last)).collect::<Option<_>>()?,
            p2: rows[..o].iter().map(|&j| cut(&self.p2[j], last, first)).collect::<Option<_>>()?,
        })
    }

    /// Validates the certificate against `g` and builds the lookup tables.
    pub fn index(&self, g: &Digraph) -> std::result::Result<WallIndex, WallViolation> {
        let n = g.n();
        let m = self.order;
        if m == 0 || self.cycles.len() != m || self.p1.len() != m || self.p2.len() != m {
            return Err(WallViolation::Shape(format!(
                "order {m} with {} cycles, {} P1 rows and {} P2 rows",
                self.cycles.len(),
                self.p1.len(),
                self.p2.len()
            )));
        }
        let mut ix = WallIndex {
            cycle_of: vec![NONE; n],
            cpos: vec![NONE; n],
            row_of: vec![NONE; n],
            rpos: vec![NONE; n],
            column: vec![NONE; n],
        };
        for (i, c) in self.cycles.iter().enumerate() {
            if c.len() < 2 {
                return Err(WallViolation::Shape(format!("cycle {i} has fewer than two vertices")));
            }
            for (p, &v) in c.iter().enumerate() {
                if v >= n {
                    return Err(WallViolation::UnknownVertex(v));
                }
                if ix.cycle_of[v] != NONE {
                    return Err(WallViolation::Repeated(v));
                }
                ix.cycle_of[v] = i;
                ix.cpos[v] = p;
                let next = c[(p + 1) % c.len()];
                if next < n && !g.has_edge(v, next) {
                    return Err(WallViolation::MissingEdge(v, next));
                }
            }
        }
        for r in 0..2 * m {
            let row = self.row(r);
            if row.is_empty() {
                return Err(WallViolation::Shape(format!("row {r} is empty")));
            }
            for (p, &v) in row.iter().enumerate() {
                if v >= n {
                    return Err(WallViolation::UnknownVertex(v));
                }
                if ix.row_of[v] != NONE {
                    return Err(WallViolation::Repeated(v));
                }
                ix.row_of[v] = r;
                ix.rpos[v] = p;
                if p + 1 < row.len() && !g.has_edge(v, row[p + 1]) {
                    return Err(WallViolation::MissingEdge(v, row[p + 1]));
                }
            }
        }
        // Each row meets the cycles in consecutive blocks in the right order;
        // the vertices between two blocks go to the lower extended column.
        let mut entry = vec![vec![0usize; m]; 2 * m];
        for r in 0..2 * m {
            let row = self.row(r);
            let expected: Vec<usize> = if r % 2 == 0 { (0..m).collect() } else { (0..m).rev().collect() };
            let mut blocks: Vec<(usize, usize, usize)> = Vec::new();
            for (p, &v) in row.iter().enumerate() {
                let c = ix.cycle_of[v];
                if c == NONE {
                    continue;
                }
                match blocks.last_mut() {
                    Some(b) if b.0 == c && b.2 + 1 == p => b.2 = p,
                    _ => blocks.push((c, p, p)),
                }
            }
            let bad = |cycle| WallViolation::Crossing { row: r, cycle };
            for (idx, &c) in expected.iter().enumerate() {
                match blocks.get(idx) {
                    Some(b) if b.0 == c => {}
                    _ => return Err(bad(c)),
                }
            }
            if blocks.len() != m {
                return Err(bad(blocks[m].0));
            }
            if blocks[0].1 != 0 || blocks[m - 1].2 != row.len() - 1 {
                return Err(bad(if blocks[0].1 != 0 { expected[0] } else { expected[m - 1] }));
            }
            for &(c, a, b) in &blocks {
                let len = self.cycles[c].len();
                for p in a..b {
                    if (ix.cpos[row[p]] + 1) % len != ix.cpos[row[p + 1]] {
                        return Err(bad(c));
                    }
                }
                entry[r][c] = ix.cpos[row[a]];
            }
            for w in blocks.windows(2) {
                let col = w[0].0.min(w[1].0);
                for &v in &row[w[0].2 + 1..w[1].1] {
                    ix.column[v] = col;
                }
            }
        }
        for i in 0..m {
            let descents = (0..2 * m).filter(|&r| entry[(r + 1) % (2 * m)][i] < entry[r][i]).count();
            if descents != 1 {
                return Err(WallViolation::RowOrder { cycle: i });
            }
            for &v in &self.cycles[i] {
                ix.column[v] = i;
            }
        }
        for r in 0..2 * m {
            if let Some(&v) = self.row(r).iter().find(|&&v| ix.column[v] == NONE) {
                return Err(WallViolation::Partition(v));
            }
        }
        Ok(ix)
    }

    /// Extended columns `EC_0 .. EC_{m-1}`.
    pub fn extended_columns(&self, g: &Digraph) -> std::result::Result<Vec<VertexSet>, WallViolation> {
        let ix = self.index(g)?;
        let mut cols = vec![VertexSet::new(g.n()); self.order];
        for v in self.vertices(g.n()).iter() {
            cols[ix.column[v]].insert(v);
        }
        Ok(cols)
    }

    /// The sub-wall on cycles `first .. first + len` and the first `rows`
    /// rows of each family, cut down to run between those cycles.
    pub fn subwall(&self, ix: &WallIndex, first: usize, len: usize, rows: usize) -> Wall {
        let last = first + len - 1;
        let cut = |row: &[Vertex], from: usize, to: usize| -> Vec<Vertex> {
            let a = row.iter().position(|&v| ix.cycle_of[v] == from).expect("row meets cycle");
            let b = row.iter().rposition(|&v| ix.cycle_of[v] == to).expect("row meets cycle");
            row[a..=b].to_vec()
        };
        Wall {
            order: len,
            cycles: self.cycles[first..=last].to_vec(),
            p1: self.p1[..rows].iter().map(|r| cut(r, first, last)).collect(),
            p2: self.p2[..rows].iter().map(|r| cut(r, last, first)).collect(),
        }
    }
}

pub fn validate_wall(g: &Digraph, w: &Wall) -> std::result::Result<(), WallViolation> {
    w.index(g).map(|_| ())
}

fn wall_index(g: &Digraph, w: &Wall) -> Result<WallIndex> {
    w.index(g).map_err(|v| Error::Invalid(format!("wall certificate: {v}")))
}

/// The cylindrical grid `G_k`: `k` nested cycles on `2k` vertices each,
/// with even columns running inwards and odd columns outwards.
pub fn cylindrical_grid(k: usize) -> Result<(Digraph, Wall)> {
    if k == 0 {
        return Err(Error::Precondition("grid order must be at least 1".into()));
    }
    let id = |i: usize, j: usize| i * 2 * k + j;
    let mut names = Vec::new();
    for i in 0..k {
        for j in 0..2 * k {
            names.push(format!("v{}_{}", i + 1, j));
        }
    }
    let mut edges = Vec::new();
    for i in 0..k {
        for j in 0..2 * k {
            edges.push((id(i, j), id(i, (j + 1) % (2 * k))));
        }
    }
    for i in 0..k.saturating_sub(1) {
        for j in 0..k {
            edges.push((id(i, 2 * j), id(i + 1, 2 * j)));
            edges.push((id(i + 1, 2 * j + 1), id(i, 2 * j + 1)));
        }
    }
    let g = Digraph::from_edges(names, &edges)?;
    let cycles = (0..k).map(|i| (0..2 * k).map(|j| id(i, j)).collect()).collect();
    let p1 = (0..k).map(|j| (0..k).map(|i| id(i, 2 * j)).collect()).collect();
    let p2 = (0..k).map(|j| (0..k).rev().map(|i| id(i, 2 * j + 1)).collect()).collect();
    Ok((g, Wall { order: k, cycles, p1, p2 }))
}

/// The elementary wall `W_k`: `G_k` with every vertex of an inner cycle
/// other than the innermost split into `a -> b`, where `a` takes the
/// in-edges and `b` the out-edges.
pub fn cylindrical_wall(k: usize) -> Result<(Digraph, Wall)> {
    if k < 3 {
        return Err(Error::Precondition(format!("wall order must be at least 3, got {k}")));
    }
    let split = |i: usize| i > 0 && i + 1 < k;
    let mut names = Vec::new();
    // (in, out) ids per grid vertex.
    let mut port = vec![vec![(0, 0); 2 * k]; k];
    for (i, row) in port.iter_mut().enumerate() {
        for (j, p) in row.iter_mut().enumerate() {
            if split(i) {
                names.push(format!("v{}_{}a", i + 1, j));
                names.push(format!("v{}_{}b", i + 1, j));
                *p = (names.len() - 2, names.len() - 1);
            } else {
                names.push(format!("v{}_{}", i + 1, j));
                *p = (names.len() - 1, names.len() - 1);
            }
        }
    }
    let seq = |i: usize, j: usize| -> Vec<Vertex> {
        let (a, b) = port[i][j];
        if a == b {
            vec![a]
        } else {
            vec![a, b]
        }
    };
    let mut edges = Vec::new();
    for i in 0..k {
        for j in 0..2 * k {
            if split(i) {
                edges.push(port[i][j]);
            }
            edges.push((port[i][j].1, port[i][(j + 1) % (2 * k)].0));
        }
    }
    for i in 0..k - 1 {
        for j in 0..k {
            edges.push((port[i][2 * j].1, port[i + 1][2 * j].0));
            edges.push((port[i + 1][2 * j + 1].1, port[i][2 * j + 1].0));
        }
    }
    let g = Digraph::from_edges(names, &edges)?;
    let cycles = (0..k).map(|i| (0..2 * k).flat_map(|j| seq(i, j)).collect()).collect();
    let p1 = (0..k).map(|j| (0..k).flat_map(|i| seq(i, 2 * j)).collect()).collect();
    let p2 = (0..k).map(|j| (0..k).rev().flat_map(|i| seq(i, 2 * j + 1)).collect()).collect();
    Ok((g, Wall { order: k, cycles, p1, p2 }))
}

/// Subdivides host edges per `plan` (edge -> number of edges of the
/// replacing path) and updates the certificate.
pub fn subdivide_wall(g: &Digraph, w: &Wall, plan: &BTreeMap<(Vertex, Vertex), usize>) -> Result<(Digraph, Wall)> {
    let h = g.subdivide(plan)?;
    // Digraph::subdivide appends new vertices in edge order.
    let mut inner: HashMap<(Vertex, Vertex), Vec<Vertex>> = HashMap::new();
    let mut next = g.n();
    for (u, v) in g.edges() {
        let len = plan.get(&(u, v)).copied().unwrap_or(1);
        if len > 1 {
            inner.insert((u, v), (next..next + len - 1).collect());
            next += len - 1;
        }
    }
    let expand = |seq: &[Vertex], cyclic: bool| -> Vec<Vertex> {
        let mut out = Vec::new();
        for (p, &v) in seq.iter().enumerate() {
            out.push(v);
            let nxt = if p + 1 < seq.len() {
                Some(seq[p + 1])
            } else if cyclic {
                Some(seq[0])
            } else {
                None
            };
            if let Some(x) = nxt.and_then(|u| inner.get(&(v, u))) {
                out.extend(x);
            }
        }
        out
    };
    let wall = Wall {
        order: w.order,
        cycles: w.cycles.iter().map(|c| expand(c, true)).collect(),
        p1: w.p1.iter().map(|r| expand(r, false)).collect(),
        p2: w.p2.iter().map(|r| expand(r, false)).collect(),
    };
    Ok((h, wall))
}

/// Largest number of paths sharing one vertex.
pub fn congestion(n: usize, paths: &[Vec<Vertex>]) -> usize {
    let mut count = vec![0usize; n];
    for p in paths {
        for &v in p {
            count[v] += 1;
        }
    }
    count.into_iter().max().unwrap_or(0)
}

/// Removes closed sub-walks so every vertex appears once.
pub fn shortcut(walk: &[Vertex]) -> Vec<Vertex> {
    let mut at: HashMap<Vertex, usize> = HashMap::new();
    let mut out: Vec<Vertex> = Vec::with_capacity(walk.len());
    for &v in walk {
        if let Some(&p) = at.get(&v) {
            for u in out.drain(p + 1..) {
                at.remove(&u);
            }
        } else {
            at.insert(v, out.len());
            out.push(v);
        }
    }
    out
}

struct Walker<'a> {
    w: &'a Wall,
    ix: &'a WallIndex,
    walk: Vec<Vertex>,
}

impl Walker<'_> {
    fn along_row(&mut self, stop: impl Fn(Vertex) -> bool) -> Result<()> {
        let from = *self.walk.last().expect("walk starts at a terminal");
        let row = self.w.row(self.ix.row_of[from]);
        for &v in &row[self.ix.rpos[from]..] {
            if v != from {
                self.walk.push(v);
            }
            if stop(v) {
                return Ok(());
            }
        }
        Err(Error::Invalid("row segment does not reach its target".into()))
    }

    fn along_cycle(&mut self, stop: impl Fn(Vertex) -> bool) -> Result<()> {
        let from = *self.walk.last().expect("walk starts at a terminal");
        let cycle = &self.w.cycles[self.ix.cycle_of[from]];
        let start = self.ix.cpos[from];
        for step in 1..=cycle.len() {
            let v = cycle[(start + step) % cycle.len()];
            self.walk.push(v);
            if stop(v) {
                return Ok(());
            }
        }
        Err(Error::Invalid("cycle segment does not reach its target".into()))
    }
}

/// Links each `s_i` (the first vertex of a row) to `t_i` (the last vertex
/// of a row) inside a wall of order at least `3k`. Every vertex is used by
/// at most two paths and terminals by exactly one.
pub fn route_in_wall(g: &Digraph, w: &Wall, pairs: &[(Vertex, Vertex)]) -> Result<Vec<Vec<Vertex>>> {
    let ix = wall_index(g, w)?;
    route_in_indexed_wall(g, w, &ix, pairs)
}

fn route_in_indexed_wall(g: &Digraph, w: &Wall, ix: &WallIndex, pairs: &[(Vertex, Vertex)]) -> Result<Vec<Vec<Vertex>>> {
    let k = pairs.len();
    let m = w.order;
    if k == 0 {
        return Ok(Vec::new());
    }
    if m < 3 * k {
        return Err(Error::Precondition(format!("wall order {m} is below 3k = {}", 3 * k)));
    }
    let mut seen = HashMap::new();
    for &(s, t) in pairs {
        for (v, first) in [(s, true), (t, false)] {
            if v >= g.n() {
                return Err(Error::NotFound(v.to_string()));
            }
            let r = ix.row_of[v];
            let row = if r == NONE { None } else { Some(w.row(r)) };
            let ok = row.is_some_and(|row| if first { row[0] == v } else { row[row.len() - 1] == v });
            if !ok {
                let what = if first { "first" } else { "last" };
                return Err(Error::Precondition(format!("{} is not the {what} vertex of a row", g.name(v))));
            }
            if seen.insert(v, ()).is_some() {
                return Err(Error::Precondition(format!("terminal {} is used twice", g.name(v))));
            }
        }
    }
    // f: terminals on the outer cycle go to cycles 1, 2, ..., those on the
    // inner cycle to m-2, m-3, ...
    let (mut outer, mut inner) = (0, 0);
    let mut f = HashMap::new();
    for &(s, t) in pairs {
        for v in [s, t] {
            if ix.cycle_of[v] == 0 {
                outer += 1;
                f.insert(v, outer);
            } else {
                inner += 1;
                f.insert(v, m - 1 - inner);
            }
        }
    }
    let used: Vec<usize> = pairs.iter().flat_map(|&(s, t)| [ix.row_of[s], ix.row_of[t]]).collect();
    let mut z1 = (0..m).map(|j| 2 * j).filter(|r| !used.contains(r));
    let mut z2 = (0..m).map(|j| 2 * j + 1).filter(|r| !used.contains(r));
    let mut paths = Vec::with_capacity(k);
    for &(s, t) in pairs {
        let (fs, ft) = (f[&s], f[&t]);
        let gr = if fs < ft { z1.next() } else { z2.next() }.expect("at least k free rows per family");
        let (rt, cyc, row) = (ix.row_of[t], &ix.cycle_of, &ix.row_of);
        let mut wk = Walker { w, ix, walk: vec![s] };
        wk.along_row(|v| cyc[v] == fs)?;
        wk.along_cycle(|v| row[v] == gr)?;
        wk.along_row(|v| cyc[v] == ft)?;
        wk.along_cycle(|v| row[v] == rt)?;
        wk.along_row(|v| v == t)?;
        paths.push(shortcut(&wk.walk));
    }
    Ok(paths)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LinkageMode {
    DistinctCycles,
    DistinctRows,
}

/// `k = |b|` vertex-disjoint paths inside the wall from `a` to
/// `b ⊆ V(p1[0])`. In distinct-cycles mode `a` has `k` vertices on
/// distinct cycles; in distinct-rows mode `2k + 1` vertices on distinct
/// bidirected rows, of which `k` get linked.
pub fn wall_linkage(g: &Digraph, w: &Wall, a: &[Vertex], b: &[Vertex], mode: LinkageMode) -> Result<Vec<Vec<Vertex>>> {
    let ix = wall_index(g, w)?;
    let k = b.len();
    let need = 2 * k * (k + 2);
    if w.order < need {
        return Err(Error::Precondition(format!("wall order {} is below 2k(k+2) = {need}", w.order)));
    }
    let distinct = |key: &dyn Fn(Vertex) -> usize, set: &[Vertex], what: &str| -> Result<()> {
        let mut keys = Vec::new();
        for &v in set {
            if v >= g.n() || key(v) == NONE {
                return Err(Error::Precondition(format!("vertex {v} is not on a {what}")));
            }
            keys.push(key(v));
        }
        let len = keys.len();
        keys.sort_unstable();
        keys.dedup();
        if keys.len() != len {
            return Err(Error::Precondition(format!("vertices are not on distinct {what}s")));
        }
        Ok(())
    };
    let on_cycle = |v: Vertex| ix.cycle_of[v];
    distinct(&on_cycle, b, "cycle")?;
    if b.iter().any(|&v| ix.row_of[v] != 0) {
        return Err(Error::Precondition("targets must lie on the first P1 row".into()));
    }
    match mode {
        LinkageMode::DistinctCycles => {
            if a.len() != k {
                return Err(Error::Precondition(format!("expected {k} sources, got {}", a.len())));
            }
            distinct(&on_cycle, a, "cycle")?;
        }
        LinkageMode::DistinctRows => {
            if a.len() != 2 * k + 1 {
                return Err(Error::Precondition(format!("expected {} sources, got {}", 2 * k + 1, a.len())));
            }
            let bidirected = |v: Vertex| if ix.row_of[v] == NONE { NONE } else { ix.row_of[v] / 2 };
            distinct(&bidirected, a, "row")?;
        }
    }
    let inside = w.vertices(g.n());
    let f = VertexFlow::run(g, &g.set_of(a.iter().copied()), &g.set_of(b.iter().copied()), &inside, k);
    if f.value < k {
        return Err(Error::Invalid(format!("only {} disjoint paths inside the wall", f.value)));
    }
    let bs = g.set_of(b.iter().copied());
    Ok(f.paths().into_iter().map(|p| truncate_at_first(p, &bs)).collect())
}

fn truncate_at_first(mut p: Vec<Vertex>, set: &VertexSet) -> Vec<Vertex> {
    if let Some(i) = p.iter().position(|&v| set.contains(v)) {
        p.truncate(i + 1);
    }
    p
}

fn suffix_from_last(p: Vec<Vertex>, set: &VertexSet) -> Vec<Vertex> {
    match p.iter().rposition(|&v| set.contains(v)) {
        Some(i) => p[i..].to_vec(),
        None => p,
    }
}

/// The wall order `k(6k² + 2k + 3)` required by [`route_through_wall`].
pub fn required_wall_order(k: usize) -> usize {
    k * (6 * k * k + 2 * k + 3)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum RoutingOutcome {
    /// `(B -> A)` of order `< k` with `S ⊆ A`; the wall lies mostly in `B`.
    SepFromS(DirectedSeparation),
    /// `(B -> A)` of order `< k` with `T ⊆ B`; the wall lies mostly in `A`.
    SepToT(DirectedSeparation),
    /// Path `i` runs from `s_i` to `t_i`; congestion at most 2.
    Linkage(Vec<Vec<Vertex>>),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "outcome", rename_all = "kebab-case")]
pub enum RoutingOutcomeJson {
    SepFromS { separation: SeparationJson },
    SepToT { separation: SeparationJson },
    Linkage { paths: Vec<Vec<String>>, congestion: usize },
}

impl RoutingOutcome {
    pub fn to_json(&self, g: &Digraph) -> RoutingOutcomeJson {
        match self {
            RoutingOutcome::SepFromS(s) => RoutingOutcomeJson::SepFromS { separation: s.to_json(g) },
            RoutingOutcome::SepToT(s) => RoutingOutcomeJson::SepToT { separation: s.to_json(g) },
            RoutingOutcome::Linkage(p) => RoutingOutcomeJson::Linkage {
                paths: p.iter().map(|p| p.iter().map(|&v| g.name(v).to_string()).collect()).collect(),
                congestion: congestion(g.n(), p),
            },
        }
    }

    pub fn from_json(g: &Digraph, j: &RoutingOutcomeJson) -> Result<Self> {
        Ok(match j {
            RoutingOutcomeJson::SepFromS { separation } => RoutingOutcome::SepFromS(DirectedSeparation::from_json(g, separation)?),
            RoutingOutcomeJson::SepToT { separation } => RoutingOutcome::SepToT(DirectedSeparation::from_json(g, separation)?),
            RoutingOutcomeJson::Linkage { paths, .. } => RoutingOutcome::Linkage(
                paths.iter().map(|p| p.iter().map(|n| g.id_or_err(n)).collect()).collect::<Result<_>>()?,
            ),
        })
    }
}

/// Number of cycles and of bidirected rows of `w` that meet `near`.
pub fn wall_parts_meeting(w: &Wall, near: &VertexSet) -> (usize, usize) {
    let cycles = w.cycles.iter().filter(|c| c.iter().any(|&v| near.contains(v))).count();
    let rows = (0..w.order)
        .filter(|&j| w.p1[j].iter().chain(&w.p2[j]).any(|&v| near.contains(v)))
        .count();
    (cycles, rows)
}

/// One round of the column-reservation claims: `k` disjoint paths from
/// `sources` to the first P1 row in `k` fresh columns, truncated so that
/// they meet no fresh column other than their endpoint columns. Returns
/// the endpoint columns, or the small separation found by Menger.
fn reserve_columns(
    g: &Digraph,
    w: &Wall,
    ix: &WallIndex,
    sources: &VertexSet,
    reserved: &mut [bool],
    k: usize,
) -> Result<std::result::Result<Vec<usize>, DirectedSeparation>> {
    let fresh: Vec<usize> = (0..w.order).filter(|&c| !reserved[c]).take(k).collect();
    if fresh.len() < k {
        return Err(Error::Invalid("wall ran out of fresh columns".into()));
    }
    let x = g.set_of(fresh.iter().map(|&c| *w.p1[0].iter().find(|&&v| ix.cycle_of[v] == c).expect("row meets cycle")));
    let paths = match min_separation_near_source(g, sources, &x, k) {
        MinSep::Found { sep, .. } => return Ok(Err(sep)),
        MinSep::AtLeast { paths, .. } => paths,
    };
    let mut paths: Vec<Vec<Vertex>> = paths.into_iter().map(|p| truncate_at_first(p, &x)).collect();
    let col = |v: Vertex| ix.column.get(v).copied().unwrap_or(NONE);
    let is_fresh = |c: usize| c != NONE && !reserved[c];
    loop {
        let mut changed = false;
        for i in 0..paths.len() {
            let ends: Vec<usize> = paths.iter().map(|p| col(*p.last().expect("nonempty"))).collect();
            let cut = paths[i]
                .iter()
                .position(|&v| is_fresh(col(v)) && (0..paths.len()).all(|j| j == i || ends[j] != col(v)));
            if let Some(p) = cut {
                if p + 1 < paths[i].len() {
                    paths[i].truncate(p + 1);
                    changed = true;
                }
            }
        }
        if !changed {
            break;
        }
    }
    let ends: Vec<usize> = paths.iter().map(|p| col(*p.last().expect("nonempty"))).collect();
    for p in &paths {
        if let Some(&v) = p.iter().find(|&&v| is_fresh(col(v)) && !ends.contains(&col(v))) {
            return Err(Error::Invalid(format!("reserved paths meet fresh column {}", col(v))));
        }
    }
    for &c in &ends {
        reserved[c] = true;
    }
    Ok(Ok(ends))
}

/// Either a separation of order `< k` between `S` (or `T`) and most of the
/// wall, or paths `s_i -> t_i` using every vertex at most twice. Needs a
/// wall of order at least [`required_wall_order`]`(k)` inside `g`.
pub fn route_through_wall(g: &Digraph, s: &[Vertex], t: &[Vertex], w: &Wall) -> Result<RoutingOutcome> {
    let k = s.len();
    if t.len() != k {
        return Err(Error::Precondition(format!("{k} sources but {} terminals", t.len())));
    }
    if k < 3 {
        return Err(Error::Precondition("routing through a wall needs k >= 3".into()));
    }
    let m = required_wall_order(k);
    if w.order < m {
        return Err(Error::Precondition(format!("wall order {} is below k(6k²+2k+3) = {m}", w.order)));
    }
    let sset = g.set_of(s.iter().copied());
    let tset = g.set_of(t.iter().copied());
    if sset.len() != k || tset.len() != k || s.iter().chain(t).any(|&v| v >= g.n()) {
        return Err(Error::Precondition("sources and terminals must be distinct vertices".into()));
    }
    let ix = wall_index(g, w)?;
    let mut from_s = vec![false; w.order];
    for _ in 0..k {
        if let Err(sep) = reserve_columns(g, w, &ix, &sset, &mut from_s, k)? {
            return Ok(RoutingOutcome::SepFromS(sep));
        }
    }
    let rev = g.reverse();
    let mut to_t = vec![false; w.order];
    for _ in 0..k {
        if let Err(sep) = reserve_columns(&rev, w, &ix, &tset, &mut to_t, k)? {
            return Ok(RoutingOutcome::SepToT(DirectedSeparation::new(sep.inn, sep.out)));
        }
    }
    let mut taken: Vec<bool> = (0..w.order).map(|c| from_s[c] || to_t[c]).collect();
    for &v in s.iter().chain(t) {
        if let Some(c) = ix.column(v) {
            taken[c] = true;
        }
    }
    let len = 3 * k;
    let first = (0..=w.order - len)
        .find(|&i| (i..i + len).all(|c| !taken[c]))
        .ok_or_else(|| Error::Invalid("no 3k consecutive free columns".into()))?;
    let sub = w.subwall(&ix, first, len, len);
    let six = wall_index(g, &sub)?;
    let h = sub.vertices(g.n());
    let xs: Vec<Vertex> = (0..k).map(|j| sub.p1[j][0]).chain((0..k).map(|j| sub.p2[j][0])).collect();
    let ys: Vec<Vertex> = (k..2 * k)
        .map(|j| *sub.p2[j].last().expect("row"))
        .chain((k..2 * k).map(|j| *sub.p1[j].last().expect("row")))
        .collect();
    let xset = g.set_of(xs.iter().copied());
    let yset = g.set_of(ys.iter().copied());
    let into = VertexFlow::run(g, &sset, &xset, &h.difference(&xset).complement(), k);
    let out_of = VertexFlow::run(g, &yset, &tset, &h.difference(&yset).complement(), k);
    if into.value < k || out_of.value < k {
        return Err(Error::Invalid("no linkage to the free sub-wall despite reserved columns".into()));
    }
    let mut head: HashMap<Vertex, Vec<Vertex>> = HashMap::new();
    for p in into.paths() {
        let p = truncate_at_first(p, &xset);
        head.insert(p[0], p);
    }
    let mut tail: HashMap<Vertex, Vec<Vertex>> = HashMap::new();
    for p in out_of.paths() {
        let p = suffix_from_last(p, &yset);
        tail.insert(*p.last().expect("nonempty"), p);
    }
    let pairs: Vec<(Vertex, Vertex)> = (0..k)
        .map(|i| (*head[&s[i]].last().expect("nonempty"), tail[&t[i]][0]))
        .collect();
    let middle = route_in_indexed_wall(g, &sub, &six, &pairs)?;
    let paths = (0..k)
        .map(|i| {
            let mut walk = head[&s[i]].clone();
            walk.extend(&middle[i][1..]);
            walk.extend(&tail[&t[i]][1..]);
            shortcut(&walk)
        })
        .collect();
    Ok(RoutingOutcome::Linkage(paths))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ends_ok(paths: &[Vec<Vertex>], pairs: &[(Vertex, Vertex)]) -> bool {
        paths.iter().zip(pairs).all(|(p, &(s, t))| p[0] == s && *p.last().unwrap() == t)
    }

    fn is_path(g: &Digraph, p: &[Vertex]) -> bool {
        p.windows(2).all(|e| g.has_edge(e[0], e[1])) && shortcut(p).len() == p.len()
    }

    #[test]
    fn grid_counts() {
        let (g, w) = cylindrical_grid(4).unwrap();
        assert_eq!((g.n(), g.m()), (32, 56));
        validate_wall(&g, &w).unwrap();
        let (g, w) = cylindrical_grid(1).unwrap();
        assert_eq!((g.n(), g.m()), (2, 2));
        validate_wall(&g, &w).unwrap();
    }

    #[test]
    fn wall_counts_and_degrees() {
        for k in 3..8 {
            let (g, w) = cylindrical_wall(k).unwrap();
            assert_eq!(g.n(), 4 * k * k - 4 * k);
            validate_wall(&g, &w).unwrap();
            for v in g.vertices() {
                let (i, o) = (g.in_neighbours(v).len(), g.out_neighbours(v).len());
                assert!(i <= 2 && o <= 2 && i + o <= 3, "{} has degrees {i}/{o}", g.name(v));
            }
        }
        assert!(cylindrical_wall(2).is_err());
    }

    #[test]
    fn extended_columns_partition_the_wall() {
        let (g, w) = cylindrical_wall(5).unwrap();
        let cols = w.extended_columns(&g).unwrap();
        let total: usize = cols.iter().map(|c| c.len()).sum();
        assert_eq!(total, g.n());
        assert_eq!(cols[4].len(), w.cycles[4].len());
    }

    #[test]
    fn broken_certificates_are_rejected() {
        let (g, w) = cylindrical_wall(4).unwrap();
        let mut bad = w.clone();
        bad.cycles[1].remove(3);
        assert!(matches!(validate_wall(&g, &bad), Err(WallViolation::MissingEdge(..))));
        let mut bad = w.clone();
        bad.p1.swap(0, 1);
        assert!(matches!(validate_wall(&g, &bad), Err(WallViolation::RowOrder { .. })));
        let mut bad = w.clone();
        bad.p2[0].pop();
        assert!(validate_wall(&g, &bad).is_err());
        let mut bad = w;
        bad.order = 3;
        assert!(matches!(validate_wall(&g, &bad), Err(WallViolation::Shape(_))));
    }

    #[test]
    fn subdivided_wall_is_valid() {
        let (g, w) = cylindrical_wall(4).unwrap();
        let plan: BTreeMap<_, _> = g.edges().enumerate().map(|(i, e)| (e, 1 + i % 3)).collect();
        let (h, hw) = subdivide_wall(&g, &w, &plan).unwrap();
        validate_wall(&h, &hw).unwrap();
        assert_eq!(hw.vertices(h.n()).len(), h.n());
    }

    #[test]
    fn reversed_and_restricted_walls_are_valid() {
        let (g, w) = cylindrical_wall(6).unwrap();
        validate_wall(&g.reverse(), &w.reversed()).unwrap();
        let mut keep = g.full_set();
        keep.remove(w.cycles[0][3]);
        keep.remove(w.p2[2][1]);
        let r = w.restrict(&keep).unwrap();
        assert!(r.order >= 4 && r.order < 6);
        validate_wall(&g, &r).unwrap();
    }

    #[test]
    fn json_roundtrip() {
        let (g, w) = cylindrical_wall(3).unwrap();
        let j = serde_json::to_string(&w.to_json(&g)).unwrap();
        assert!(j.contains("\"P1\""));
        let back = Wall::from_json(&g, &serde_json::from_str(&j).unwrap()).unwrap();
        assert_eq!(back, w);
    }

    #[test]
    fn route_in_order_nine_wall() {
        let (g, w) = cylindrical_wall(9).unwrap();
        let pairs = vec![(w.p1[0][0], *w.p2[1].last().unwrap()), (w.p2[3][0], *w.p1[4].last().unwrap()), (w.p1[2][0], *w.p1[5].last().unwrap())];
        let paths = route_in_wall(&g, &w, &pairs).unwrap();
        assert!(ends_ok(&paths, &pairs));
        assert!(paths.iter().all(|p| is_path(&g, p)));
        assert!(congestion(g.n(), &paths) <= 2);
        for &(s, t) in &pairs {
            assert_eq!(paths.iter().filter(|p| p.contains(&s)).count(), 1);
            assert_eq!(paths.iter().filter(|p| p.contains(&t)).count(), 1);
        }
    }

    #[test]
    fn route_in_wall_rejects_inner_vertices() {
        let (g, w) = cylindrical_wall(9).unwrap();
        let err = route_in_wall(&g, &w, &[(w.p1[0][1], *w.p2[0].last().unwrap())]).unwrap_err();
        assert!(matches!(err, Error::Precondition(_)));
        let s = w.p1[0][0];
        let err = route_in_wall(&g, &w, &[(s, *w.p2[0].last().unwrap()), (s, *w.p2[1].last().unwrap())]).unwrap_err();
        assert!(matches!(err, Error::Precondition(_)));
    }

    #[test]
    fn linkage_inside_wall() {
        let (g, w) = cylindrical_wall(30).unwrap();
        let a: Vec<_> = [5, 10, 15].iter().map(|&c| w.cycles[c][7]).collect();
        let b: Vec<_> = [1, 2, 3].iter().map(|&c| *w.p1[0].iter().find(|v| w.cycles[c].contains(v)).unwrap()).collect();
        let paths = wall_linkage(&g, &w, &a, &b, LinkageMode::DistinctCycles).unwrap();
        assert_eq!(paths.len(), 3);
        assert_eq!(congestion(g.n(), &paths), 1);
        let same = wall_linkage(&g, &w, &b, &b, LinkageMode::DistinctCycles).unwrap();
        assert!(same.iter().all(|p| p.len() == 1));
        let a: Vec<_> = (0..7).map(|j| w.p2[j * 3][4]).collect();
        let paths = wall_linkage(&g, &w, &a, &b, LinkageMode::DistinctRows).unwrap();
        assert_eq!(paths.len(), 3);
        assert!(wall_linkage(&g, &w, &a[..3], &b, LinkageMode::DistinctCycles).is_err());
    }

    #[test]
    fn route_through_order_189_wall() {
        let (g, w) = cylindrical_wall(required_wall_order(3)).unwrap();
        let outer = &w.cycles[0];
        let s: Vec<_> = [0, 100, 200].iter().map(|&i| outer[i]).collect();
        let t: Vec<_> = [50, 150, 250].iter().map(|&i| outer[i]).collect();
        let RoutingOutcome::Linkage(paths) = route_through_wall(&g, &s, &t, &w).unwrap() else { panic!("expected a linkage") };
        let pairs: Vec<_> = s.iter().copied().zip(t.iter().copied()).collect();
        assert!(ends_ok(&paths, &pairs));
        assert!(paths.iter().all(|p| is_path(&g, p)));
        assert!(congestion(g.n(), &paths) <= 2);
        let small = cylindrical_wall(20).unwrap();
        assert!(matches!(route_through_wall(&small.0, &s[..3], &t[..3], &small.1), Err(Error::Precondition(_))));
    }

    #[test]
    fn shielded_sources_give_a_small_separation() {
        let (g, w) = cylindrical_wall(required_wall_order(3)).unwrap();
        let n = g.n();
        let mut names = g.names().to_vec();
        names.extend(["s1", "s2", "s3", "c1", "c2"].map(String::from));
        let mut edges: Vec<_> = g.edges().collect();
        for s in n..n + 3 {
            edges.push((s, n + 3));
            edges.push((s, n + 4));
        }
        edges.push((n + 3, w.cycles[0][0]));
        edges.push((n + 4, w.cycles[0][10]));
        edges.push((w.cycles[0][20], n));
        let h = Digraph::from_edges(names, &edges).unwrap();
        let t: Vec<_> = [50, 150, 250].iter().map(|&i| w.cycles[0][i]).collect();
        let RoutingOutcome::SepFromS(sep) = route_through_wall(&h, &[n, n + 1, n + 2], &t, &w).unwrap() else {
            panic!("expected a separation")
        };
        assert!(sep.is_valid(&h));
        assert!(sep.order() < 3);
        assert!((n..n + 3).all(|v| sep.inn.contains(v)));
        let (cycles, rows) = wall_parts_meeting(&w, &sep.inn.difference(&sep.out));
        assert!(cycles < 3 && rows <= 6);
    }

    #[test]
    fn shortcut_removes_loops() {
        assert_eq!(shortcut(&[1, 2, 3, 2, 4, 1, 5]), vec![1, 5]);
        assert_eq!(shortcut(&[1, 2, 3]), vec![1, 2, 3]);
    }
}
