//! Acceptance suite: one PASS/FAIL line per criterion.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use dtangle::bramble::{bramble_from_tangle, bramble_order, tangle_from_bramble, Bramble};
use dtangle::decomposition::{decomposition_from_labelling, verify_distinguishing};
use dtangle::exact::exact_disjoint_paths;
use dtangle::generators::{bidirected_clique, five_clusters, gen_clusters, random_digraph, remark_digraph, safe_clique_order, seeded_rng, two_clusters_bridge, ClusterSpec};
use dtangle::labelling::{build_labelling, build_uniform_labelling, ranks, verify_labelling, Context, Mode};
use dtangle::patterns::{enumerate_pattern_graphs, naive_single_path_classes, Part, PatternType};
use dtangle::separation::{enumerate_separations, induced_separation, quadrants, uncross};
use dtangle::solver::{detect_tangles, half_or_no, half_or_no_with, verify_half_integral, HalfIntegralOutcome, SolverConfig};
use dtangle::tangle::{check_tangle_axioms, AxiomWitness};
use dtangle::walls::{congestion, cylindrical_grid, cylindrical_wall, required_wall_order, route_in_wall, route_through_wall, RoutingOutcome};
use dtangle::{Digraph, Dir, DirectedSeparation, Tangle, Vertex, VertexSet};

type Check = fn() -> Result<String, String>;

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn random_set(n: usize, rng: &mut ChaCha8Rng) -> VertexSet {
    VertexSet::from_iter(n, (0..n).filter(|_| rng.gen_bool(0.5)))
}

fn submodularity() -> Result<String, String> {
    let mut rng = seeded_rng(1);
    let mut pairs = 0;
    while pairs < 1000 {
        let n = rng.gen_range(2..=12);
        let g = random_digraph(n, rng.gen_range(0.1..0.5), &mut rng);
        let dirs = [Dir::Out, Dir::In];
        let x = induced_separation(&g, &random_set(n, &mut rng), dirs[rng.gen_range(0..2)]);
        let y = induced_separation(&g, &random_set(n, &mut rng), dirs[rng.gen_range(0..2)]);
        ensure(x.is_valid(&g) && y.is_valid(&g), || "generated separation is invalid".into())?;
        let q = quadrants(&x, &y);
        ensure(q.corner_top.len() + q.corner_bottom.len() == x.order() + y.order(), || format!("corner sum differs for {x:?}, {y:?}"))?;
        let (top, bottom) = uncross(&x, &y);
        ensure(top.is_valid(&g) && bottom.is_valid(&g), || format!("uncrossed separation invalid for {x:?}, {y:?}"))?;
        ensure(top.order() == q.corner_top.len() && bottom.order() == q.corner_bottom.len(), || "uncrossed orders differ from corners".into())?;
        pairs += 1;
    }
    Ok(format!("{pairs} pairs"))
}

fn tangle_axioms() -> Result<String, String> {
    let g = bidirected_clique(7);
    let t = Tangle::from_anchor(3, g.full_set()).to_explicit(&g).map_err(|e| e.to_string())?;
    ensure(check_tangle_axioms(&g, &t).map_err(|e| e.to_string())?.is_ok(), || "K7 tangle fails the axioms".into())?;
    let seps = enumerate_separations(&g, 2).map_err(|e| e.to_string())?;
    let mut flips = 0;
    for s in &seps {
        let Some(f) = t.flipped(s) else { continue };
        if f.orient(&g, s) == t.orient(&g, s) {
            continue;
        }
        flips += 1;
        match check_tangle_axioms(&g, &f).map_err(|e| e.to_string())? {
            Ok(()) => return Err(format!("flip of {s:?} still passes")),
            Err(AxiomWitness::Cover(tr)) => {
                let mut u = g.empty_set();
                for x in &tr {
                    u.union_with(f.orient(&g, x).ok_or("witness separation unoriented")?.0);
                }
                ensure(u == g.full_set(), || "cover witness does not cover".into())?;
            }
            Err(w) => ensure(matches!(w, AxiomWitness::Unoriented(_) | AxiomWitness::Malformed(_)), || format!("{w:?}"))?,
        }
    }
    ensure(flips > 0, || "no mutation was tried".into())?;
    Ok(format!("{flips} mutations rejected"))
}

/// Bidirected cliques carry the brambles of all majority subsets.
fn majority_bramble(n: usize) -> (Digraph, Bramble) {
    let g = bidirected_clique(n);
    let size = n / 2 + 1;
    let verts: Vec<Vertex> = g.vertices().collect();
    let els = dtangle::set::combinations(&verts, size).map(|c| g.set_of(c)).collect();
    (g, Bramble::new(els))
}

fn conversions() -> Result<String, String> {
    let err = |e: dtangle::Error| e.to_string();
    let mut brambles = 0;
    let mut tangles = 0;
    let mut from_tangles = Vec::new();
    for n in 3..=12 {
        let g = bidirected_clique(n);
        for q in 1..=safe_clique_order(n) {
            let t = Tangle::from_anchor(q, g.full_set());
            ensure(check_tangle_axioms(&g, &t).map_err(err)?.is_ok(), || format!("K{n} order {q} is not a tangle"))?;
            let b = bramble_from_tangle(&g, &t).map_err(err)?;
            b.validate(&g).map_err(err)?;
            let (order, _) = bramble_order(&g, &b).map_err(err)?;
            ensure(order >= q, || format!("K{n}: bramble of order {order} from a tangle of order {q}"))?;
            tangles += 1;
            from_tangles.push((g.clone(), b));
        }
    }
    let mut rng = seeded_rng(3);
    for _ in 0..20 {
        let g = random_digraph(10, 0.45, &mut rng);
        for t in detect_tangles(&g, 2).map_err(err)? {
            let b = bramble_from_tangle(&g, &t).map_err(err)?;
            let (order, _) = bramble_order(&g, &b).map_err(err)?;
            ensure(order >= t.order, || format!("random: bramble of order {order} from a tangle of order {}", t.order))?;
            tangles += 1;
            from_tangles.push((g.clone(), b));
        }
    }
    let mut suite: Vec<(Digraph, Bramble)> = (5..=12).map(majority_bramble).collect();
    suite.extend(from_tangles);
    for (g, b) in &suite {
        let (q, _) = bramble_order(g, b).map_err(err)?;
        let t = tangle_from_bramble(g, b, q).map_err(err)?;
        ensure(t.order == q / 3, || "tangle order is not q/3".into())?;
        ensure(check_tangle_axioms(g, &t).map_err(err)?.is_ok(), || format!("bramble of order {q} gives a failing tangle"))?;
        brambles += 1;
    }
    Ok(format!("{brambles} brambles, {tangles} tangles"))
}

fn five_cluster_ranks() -> Result<String, String> {
    let c = five_clusters();
    let ts = c.tangles();
    let ctx = Context::new(&c.graph, &ts, Mode::Explicit);
    let ra = ranks(&ctx, &[0, 1, 2, 3, 4], 2).map_err(|e| e.to_string())?;
    ensure(ra.levels == vec![vec![0, 3, 4], vec![1, 2]], || format!("levels {:?}", ra.levels))?;
    ensure(!ra.sigma[&0].is_outgoing(), || "sigma(T_A) is outgoing".into())?;
    for t in 1..5 {
        if t == ra.root {
            continue;
        }
        ensure(ra.sigma[&t].is_outgoing(), || format!("sigma of tangle {t} is incoming"))?;
    }
    Ok("rank 1 = {A, D, E}, rank 2 = {B, C}".into())
}

/// Graphs with their tangle families, at most five tangles each.
fn instances() -> Vec<(String, Digraph, Vec<Tangle>)> {
    let mut out = Vec::new();
    let k7 = bidirected_clique(7);
    out.push(("K7".to_string(), k7.clone(), vec![Tangle::from_anchor(3, k7.full_set())]));
    let b = two_clusters_bridge();
    out.push(("bridge".to_string(), b.graph.clone(), b.tangles()));
    let f = five_clusters();
    out.push(("five clusters".to_string(), f.graph.clone(), f.tangles()));
    for seed in 0..4 {
        let spec = ClusterSpec { sizes: vec![7, 7, 7], random_edges: 3 + seed as usize, order: Some(3), ..Default::default() };
        let c = gen_clusters(&spec, &mut seeded_rng(seed)).expect("clusters");
        let ts = c.tangles();
        let g = c.graph;
        let ctx = Context::new(&g, &ts, Mode::Explicit);
        let distinct = (0..ts.len()).all(|i| (i + 1..ts.len()).all(|j| ctx.distance(i, j).ok().flatten().is_some()));
        if distinct {
            out.push((format!("three clusters seed {seed}"), g, ts));
        }
    }
    out
}

fn labellings() -> Result<String, String> {
    let mut checked = 0;
    for (name, g, ts) in instances() {
        let ctx = Context::new(&g, &ts, Mode::Explicit);
        let all: Vec<usize> = (0..ts.len()).collect();
        let lab = build_labelling(&ctx).map_err(|e| format!("{name}: {e}"))?;
        verify_labelling(&ctx, &lab, &all).map_err(|e| e.to_string())?.map_err(|v| format!("{name}: {v:?}"))?;
        checked += 1;
        let mut dist = Vec::new();
        for i in 0..ts.len() {
            for j in i + 1..ts.len() {
                dist.push(ctx.distance(i, j).map_err(|e| e.to_string())?.expect("distinguishable"));
            }
        }
        dist.sort_unstable();
        dist.dedup();
        if dist.len() == 1 {
            let uni = build_uniform_labelling(&ctx, &all, dist[0]).map_err(|e| format!("{name}: {e}"))?;
            verify_labelling(&ctx, &uni, &all).map_err(|e| e.to_string())?.map_err(|v| format!("{name} uniform: {v:?}"))?;
            checked += 1;
        }
    }
    Ok(format!("{checked} labellings verified"))
}

fn decompositions() -> Result<String, String> {
    let mut checked = 0;
    for (name, g, ts) in instances() {
        let k = ts.iter().map(|t| t.order).max().unwrap_or(0);
        if k > 3 {
            continue;
        }
        let ctx = Context::new(&g, &ts, Mode::Explicit);
        let lab = build_labelling(&ctx).map_err(|e| format!("{name}: {e}"))?;
        let d = decomposition_from_labelling(&ctx, &lab, k).map_err(|e| format!("{name}: {e}"))?;
        ensure(d.strict, || format!("{name}: decomposition is not strict"))?;
        ensure(d.edge_width() <= k * k + 2 * k, || format!("{name}: edge-width {}", d.edge_width()))?;
        verify_distinguishing(&ctx, &d).map_err(|e| e.to_string())?.map_err(|v| format!("{name}: {v:?}"))?;
        checked += 1;
    }
    Ok(format!("{checked} decompositions verified"))
}

fn check_linkage(g: &Digraph, pairs: &[(Vertex, Vertex)], paths: &[Vec<Vertex>]) -> Result<(), String> {
    verify_half_integral(g, pairs, paths).map_err(|v| v.to_string())?;
    ensure(congestion(g.n(), paths) <= 2, || "congestion above 2".into())
}

fn wall_routing() -> Result<String, String> {
    let mut rng = seeded_rng(7);
    let (g, w) = cylindrical_wall(9).map_err(|e| e.to_string())?;
    let rows: Vec<usize> = (0..w.rows()).collect();
    let mut placed = 0;
    while placed < 50 {
        let starts: Vec<usize> = rows.choose_multiple(&mut rng, 3).copied().collect();
        let ends: Vec<usize> = rows.choose_multiple(&mut rng, 3).copied().collect();
        let pairs: Vec<(Vertex, Vertex)> = starts.iter().zip(&ends).map(|(&a, &b)| (w.row(a)[0], *w.row(b).last().unwrap())).collect();
        let mut all: Vec<Vertex> = pairs.iter().flat_map(|&(s, t)| [s, t]).collect();
        all.sort_unstable();
        all.dedup();
        if all.len() < 6 {
            continue;
        }
        let paths = route_in_wall(&g, &w, &pairs).map_err(|e| format!("{pairs:?}: {e}"))?;
        check_linkage(&g, &pairs, &paths)?;
        placed += 1;
    }
    let (g, w) = cylindrical_wall(required_wall_order(3)).map_err(|e| e.to_string())?;
    let verts: Vec<Vertex> = g.vertices().collect();
    for _ in 0..50 {
        let picked: Vec<Vertex> = verts.choose_multiple(&mut rng, 6).copied().collect();
        let (s, t) = picked.split_at(3);
        let pairs: Vec<(Vertex, Vertex)> = s.iter().copied().zip(t.iter().copied()).collect();
        match route_through_wall(&g, s, t, &w).map_err(|e| e.to_string())? {
            RoutingOutcome::Linkage(paths) => check_linkage(&g, &pairs, &paths)?,
            other => return Err(format!("no linkage for {pairs:?}: {:?}", std::mem::discriminant(&other))),
        }
    }
    Ok(format!("{placed} placements in the order-9 wall, 50 in the order-{} wall", w.order))
}

/// Solver verdicts agree with the exact oracle.
fn agree(g: &Digraph, pairs: &[(Vertex, Vertex)], cfg: &SolverConfig) -> Result<(), String> {
    let exact = exact_disjoint_paths(g, pairs).map_err(|e| e.to_string())?;
    let out = if cfg.tangle_order.is_none() { half_or_no(g, pairs) } else { half_or_no_with(g, pairs, cfg) };
    match (exact, out.map_err(|e| e.to_string())?) {
        (None, HalfIntegralOutcome::NoIntegral) => Ok(()),
        (Some(_), HalfIntegralOutcome::Paths(p)) => check_linkage(g, pairs, &p).map_err(|e| format!("{pairs:?} on {:?}: {e}", g.edges().collect::<Vec<_>>())),
        (e, o) => Err(format!("oracle {} but solver {o:?} for {pairs:?} on {:?}", if e.is_some() { "linked" } else { "unlinked" }, g.edges().collect::<Vec<_>>())),
    }
}

fn two_pair_assignments(n: usize) -> Vec<[(Vertex, Vertex); 2]> {
    let mut out = Vec::new();
    for a in 0..n {
        for b in 0..n {
            for c in 0..n {
                for d in 0..n {
                    let v = [a, b, c, d];
                    if (0..4).all(|i| (i + 1..4).all(|j| v[i] != v[j])) {
                        out.push([(a, b), (c, d)]);
                    }
                }
            }
        }
    }
    out
}

fn solver_agreement() -> Result<String, String> {
    let default = SolverConfig::default();
    let dp = SolverConfig { tangle_order: Some(1), ..Default::default() };
    let mut count = 0;
    // Every digraph on four vertices with every two-pair assignment.
    let slots: Vec<(Vertex, Vertex)> = (0..4).flat_map(|u| (0..4).filter(move |&v| v != u).map(move |v| (u, v))).collect();
    let assignments = two_pair_assignments(4);
    for mask in 0u32..1 << slots.len() {
        let edges: Vec<_> = slots.iter().enumerate().filter(|(i, _)| mask >> i & 1 == 1).map(|(_, &e)| e).collect();
        let g = Digraph::with_ids(4, &edges).map_err(|e| e.to_string())?;
        for pairs in &assignments {
            agree(&g, pairs, &default)?;
            count += 1;
        }
    }
    // Every edge subset of the order-2 cylindrical grid (8 vertices).
    let (grid, _) = cylindrical_grid(2).map_err(|e| e.to_string())?;
    let grid_edges: Vec<_> = grid.edges().collect();
    let eight = two_pair_assignments(8);
    let mut rng = seeded_rng(8);
    for mask in 0u32..1 << grid_edges.len() {
        let edges: Vec<_> = grid_edges.iter().enumerate().filter(|(i, _)| mask >> i & 1 == 1).map(|(_, &e)| e).collect();
        let g = Digraph::with_ids(8, &edges).map_err(|e| e.to_string())?;
        for pairs in eight.choose_multiple(&mut rng, 8) {
            agree(&g, pairs, &default)?;
            count += 1;
        }
    }
    // Random ten-vertex instances, through the full pipeline and through
    // the decomposition with small tangles.
    for i in 0..200 {
        let g = random_digraph(10, rng.gen_range(0.15..0.6), &mut rng);
        let k = 1 + i % 3;
        let mut v: Vec<Vertex> = g.vertices().collect();
        v.shuffle(&mut rng);
        let pairs: Vec<(Vertex, Vertex)> = (0..k).map(|j| (v[2 * j], v[2 * j + 1])).collect();
        agree(&g, &pairs, &default)?;
        agree(&g, &pairs, &dp)?;
        count += 2;
    }
    // Cluster graphs where the decomposition has several tangle nodes.
    let mut decomposed = 0;
    for seed in 0..30u64 {
        let spec = ClusterSpec { sizes: vec![7, 7, 7], random_edges: 2 + seed as usize % 6, ..Default::default() };
        let c = gen_clusters(&spec, &mut seeded_rng(100 + seed)).map_err(|e| e.to_string())?;
        decomposed += (detect_tangles(&c.graph, 3).map_err(|e| e.to_string())?.len() >= 2) as usize;
        let mut v: Vec<Vertex> = c.graph.vertices().collect();
        v.shuffle(&mut rng);
        let k = 1 + seed as usize % 3;
        let pairs: Vec<(Vertex, Vertex)> = (0..k).map(|j| (v[2 * j], v[2 * j + 1])).collect();
        agree(&c.graph, &pairs, &dp)?;
        count += 1;
    }
    Ok(format!("{count} instances agree, {decomposed} solved over a decomposition"))
}

fn pattern_bounds() -> Result<String, String> {
    let mut total = 0;
    for k in 1..=3 {
        for t in 0..=2 {
            for p in enumerate_pattern_graphs(PatternType::RToL, k, t) {
                ensure(p.count(Part::L) <= 4 * t + 2 * k && p.count(Part::R) <= t && p.count(Part::M) <= t, || format!("{p:?} exceeds the bounds"))?;
                ensure(p.is_valid(k, t), || format!("{p:?} is not a pattern graph"))?;
                total += 1;
            }
        }
    }
    let fast = enumerate_pattern_graphs(PatternType::RToL, 1, 1).len();
    let (bl, br) = PatternType::RToL.bounds(1, 1);
    let naive = naive_single_path_classes(PatternType::RToL, 1, bl + br + 1);
    ensure(fast == naive, || format!("enumeration gives {fast}, naive oracle {naive}"))?;
    Ok(format!("{total} patterns within bounds; (1, 1) count {fast} matches"))
}

fn remark_witness() -> Result<String, String> {
    let g = remark_digraph();
    let set = |names: &[&str]| g.set_from_names(names).map_err(|e| e.to_string());
    let sides = [
        (&["7", "8", "5", "6", "4"][..], &["6", "4", "1", "2", "3", "9"][..]),
        (&["7", "8", "1", "6", "2"][..], &["6", "2", "5", "4", "3", "9"][..]),
        (&["7", "8", "6", "3"][..], &["6", "3", "5", "4", "1", "2", "9"][..]),
    ];
    let nine = set(&["9"])?;
    let mut elements = Vec::new();
    for (a, b) in sides {
        let sep = DirectedSeparation::from_sides(&g, &set(a)?, &set(b)?).ok_or("not a directed separation")?;
        ensure(sep.order() == 2, || "separation order is not 2".into())?;
        let big = if nine.is_subset(&sep.out) { &sep.out } else { &sep.inn };
        let x = sep.separator();
        let comp = g
            .strong_components_within(&x.complement())
            .into_iter()
            .filter(|c| c.is_subset(big) && c.len() > 1)
            .max_by_key(|c| c.len())
            .ok_or("no nontrivial component on the big side")?;
        elements.push(comp);
    }
    let expect = [set(&["1", "2", "3"])?, set(&["3", "4", "5"])?, set(&["4", "5", "1", "2"])?];
    ensure(elements == expect, || format!("components {:?}", elements.iter().map(|e| g.set_names(e)).collect::<Vec<_>>()))?;
    for i in 0..3 {
        ensure(g.is_strongly_connected_set(&elements[i]), || "element not strongly connected".into())?;
        for j in i + 1..3 {
            ensure(elements[i].intersects(&elements[j]), || "elements do not touch".into())?;
        }
    }
    let common = elements[0].intersection(&elements[1]).intersection(&elements[2]);
    ensure(common.is_empty(), || "the three elements share a vertex".into())?;
    Ok("{1,2,3}, {3,4,5}, {1,2,4,5}: pairwise touching, no common vertex".into())
}

fn main() -> ExitCode {
    let criteria: [(&str, Check, u64); 10] = [
        ("submodularity equality", submodularity, 10),
        ("tangle axiom suite", tangle_axioms, 30),
        ("bramble and tangle conversion bounds", conversions, 120),
        ("five-cluster ranks", five_cluster_ranks, 60),
        ("labelling validity", labellings, 120),
        ("decomposition contract", decompositions, 120),
        ("wall routing congestion", wall_routing, 300),
        ("solver soundness and completeness", solver_agreement, 600),
        ("pattern bounds", pattern_bounds, 60),
        ("non-canonical bramble witness", remark_witness, 1),
    ];
    let mut failed = 0;
    for (i, (name, check, limit)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let result = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|p| {
            Err(p.downcast_ref::<String>().cloned().or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string())).unwrap_or_else(|| "panic".into()))
        });
        let took = start.elapsed();
        let result = result.and_then(|m| if took <= Duration::from_secs(*limit) { Ok(m) } else { Err(format!("{m}, but exceeded {limit} s")) });
        match result {
            Ok(m) => println!("PASS {:>2} {name}: {m} ({:.2?})", i + 1, took),
            Err(m) => {
                failed += 1;
                println!("FAIL {:>2} {name}: {m} ({:.2?})", i + 1, took);
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
