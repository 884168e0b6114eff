//! Instance generators: cliques, paths, random digraphs and cluster graphs.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::digraph::Digraph;
use crate::error::{Error, Result};
use crate::tangle::{Tangle, TangleCertificate};
use crate::Vertex;

/// The generator behind every seeded command.
pub fn seeded_rng(seed: u64) -> rand_chacha::ChaCha8Rng {
    rand::SeedableRng::seed_from_u64(seed)
}

pub fn bidirected_clique(n: usize) -> Digraph {
    let mut e = Vec::new();
    for u in 0..n {
        for v in 0..n {
            if u != v {
                e.push((u, v));
            }
        }
    }
    Digraph::with_ids(n, &e).expect("clique")
}

pub fn directed_path(n: usize) -> Digraph {
    let e: Vec<_> = (1..n).map(|i| (i - 1, i)).collect();
    Digraph::with_ids(n, &e).expect("path")
}

/// Each ordered pair is an edge with probability `p`.
pub fn random_digraph<R: Rng>(n: usize, p: f64, rng: &mut R) -> Digraph {
    let mut e = Vec::new();
    for u in 0..n {
        for v in 0..n {
            if u != v && rng.gen_bool(p) {
                e.push((u, v));
            }
        }
    }
    Digraph::with_ids(n, &e).expect("random digraph")
}

/// Bidirected clusters plus extra edges.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClusterSpec {
    pub sizes: Vec<usize>,
    /// Extra edges by vertex name (`a1`, `b3`, ...).
    #[serde(default)]
    pub edges: Vec<(String, String)>,
    /// Number of random edges between distinct clusters, drawn from the seed.
    #[serde(default)]
    pub random_edges: usize,
    /// Tangle order for every certificate; defaults to the largest order
    /// that is safe for an isolated clique of the smallest size.
    #[serde(default)]
    pub order: Option<usize>,
    /// Order in which clusters receive vertex ids; defaults to listing
    /// order. Ids drive every lexicographic tie-break.
    #[serde(default)]
    pub id_order: Option<Vec<usize>>,
}

pub struct Clusters {
    pub graph: Digraph,
    /// Vertex ids of each cluster.
    pub clusters: Vec<Vec<Vertex>>,
    pub certificates: Vec<TangleCertificate>,
}

impl Clusters {
    pub fn tangles(&self) -> Vec<Tangle> {
        self.certificates.iter().map(|c| Tangle::from_certificate(&self.graph, c).expect("own certificate")).collect()
    }
}

fn cluster_name(i: usize, j: usize, count: usize) -> String {
    if count <= 26 {
        format!("{}{}", (b'a' + i as u8) as char, j + 1)
    } else {
        format!("k{}_{}", i + 1, j + 1)
    }
}

/// Largest `k` with `3(k - 1) < s`: no three small sides can then cover
/// a bidirected `s`-clique.
pub fn safe_clique_order(s: usize) -> usize {
    if s == 0 {
        0
    } else {
        (s - 1) / 3 + 1
    }
}

pub fn gen_clusters<R: Rng>(spec: &ClusterSpec, rng: &mut R) -> Result<Clusters> {
    if spec.sizes.contains(&0) {
        return Err(Error::Invalid("cluster of size 0".into()));
    }
    let count = spec.sizes.len();
    let id_order: Vec<usize> = spec.id_order.clone().unwrap_or_else(|| (0..count).collect());
    let mut check = id_order.clone();
    check.sort_unstable();
    if check != (0..count).collect::<Vec<_>>() {
        return Err(Error::Invalid("id_order must be a permutation of the clusters".into()));
    }
    let mut names = Vec::new();
    let mut clusters = vec![Vec::new(); count];
    for &i in &id_order {
        let start = names.len();
        for j in 0..spec.sizes[i] {
            names.push(cluster_name(i, j, count));
        }
        clusters[i] = (start..start + spec.sizes[i]).collect::<Vec<_>>();
    }
    let mut edges = Vec::new();
    for c in &clusters {
        for &u in c {
            for &v in c {
                if u != v {
                    edges.push((u, v));
                }
            }
        }
    }
    let lookup = |n: &str| names.iter().position(|x| x == n).ok_or_else(|| Error::DanglingEndpoint(n.to_string()));
    for (a, b) in &spec.edges {
        let (u, v) = (lookup(a)?, lookup(b)?);
        if u == v {
            return Err(Error::SelfLoop(a.clone()));
        }
        edges.push((u, v));
    }
    if spec.random_edges > 0 {
        if count < 2 {
            return Err(Error::Invalid("random inter-cluster edges need two clusters".into()));
        }
        for _ in 0..spec.random_edges {
            let i = rng.gen_range(0..count);
            let mut j = rng.gen_range(0..count - 1);
            if j >= i {
                j += 1;
            }
            let u = clusters[i][rng.gen_range(0..clusters[i].len())];
            let v = clusters[j][rng.gen_range(0..clusters[j].len())];
            edges.push((u, v));
        }
    }
    let graph = Digraph::from_edges(names, &edges)?;
    let k = spec.order.unwrap_or_else(|| spec.sizes.iter().map(|&s| safe_clique_order(s)).min().unwrap_or(0));
    let certificates = clusters
        .iter()
        .map(|c| TangleCertificate { k, cover: c.iter().map(|&v| graph.name(v).to_string()).collect() })
        .collect();
    Ok(Clusters { graph, clusters, certificates })
}

fn pairs(list: &[(&str, &str)]) -> Vec<(String, String)> {
    list.iter().map(|(a, b)| (a.to_string(), b.to_string())).collect()
}

/// Five bidirected 7-cliques `A..E` wired so that the order-2 separations
/// splitting off single tangles give ranks `{A, D, E}` then `{B, C}`.
/// Vertex ids run `E, D, C, B, A`.
pub fn five_clusters_spec() -> ClusterSpec {
    ClusterSpec {
        sizes: vec![7; 5],
        edges: pairs(&[
            ("a4", "b3"),
            ("a5", "c2"),
            ("b4", "a1"),
            ("b1", "a2"),
            ("c3", "a3"),
            ("b5", "d3"),
            ("b6", "d3"),
            ("d4", "b1"),
            ("d5", "b2"),
            ("c1", "d2"),
            ("c4", "d2"),
            ("d6", "c3"),
            ("d1", "c4"),
            ("c5", "e1"),
            ("e1", "c5"),
            ("c6", "e2"),
            ("e2", "c6"),
            ("e3", "c1"),
            ("c7", "a6"),
            ("a5", "b3"),
        ]),
        random_edges: 0,
        order: Some(3),
        id_order: Some(vec![4, 3, 2, 1, 0]),
    }
}

pub fn five_clusters() -> Clusters {
    gen_clusters(&five_clusters_spec(), &mut rand::rngs::mock::StepRng::new(0, 1)).expect("five clusters")
}

/// Two bidirected 7-cliques joined through one bridge vertex `x` with
/// `a1 <-> x <-> b1`.
pub fn two_clusters_bridge() -> Clusters {
    let mut spec = ClusterSpec { sizes: vec![7, 7], order: Some(3), ..Default::default() };
    spec.edges = pairs(&[]);
    let base = gen_clusters(&spec, &mut rand::rngs::mock::StepRng::new(0, 1)).expect("clusters");
    let mut names = base.graph.names().to_vec();
    names.push("x".into());
    let x = names.len() - 1;
    let mut edges: Vec<_> = base.graph.edges().collect();
    let (a1, b1) = (base.graph.id("a1").unwrap(), base.graph.id("b1").unwrap());
    edges.extend([(a1, x), (x, a1), (x, b1), (b1, x)]);
    let graph = Digraph::from_edges(names, &edges).expect("bridge");
    Clusters { graph, clusters: base.clusters, certificates: base.certificates }
}

/// The 9-vertex digraph with a tangle whose bramble has three elements
/// without a common vertex.
pub fn remark_digraph() -> Digraph {
    let e = [
        (5, 3),
        (1, 3),
        (7, 3),
        (8, 3),
        (3, 4),
        (4, 5),
        (3, 2),
        (2, 1),
        (1, 4),
        (5, 2),
        (1, 6),
        (3, 6),
        (6, 7),
        (6, 8),
        (7, 8),
        (8, 7),
        (5, 6),
        (3, 9),
        (1, 9),
    ];
    let names = (1..=9).map(|i| i.to_string()).collect();
    let edges: Vec<_> = e.iter().map(|&(a, b)| (a - 1, b - 1)).collect();
    Digraph::from_edges(names, &edges).expect("remark digraph")
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    #[test]
    fn clusters_are_deterministic() {
        let spec = ClusterSpec { sizes: vec![4, 5, 3], random_edges: 6, ..Default::default() };
        let a = gen_clusters(&spec, &mut rand_chacha::ChaCha8Rng::seed_from_u64(7)).unwrap();
        let b = gen_clusters(&spec, &mut rand_chacha::ChaCha8Rng::seed_from_u64(7)).unwrap();
        assert_eq!(a.graph, b.graph);
        assert_eq!(a.certificates.len(), 3);
        assert_eq!(a.certificates[0].k, 1);
    }

    #[test]
    fn bridge_instance_has_fifteen_vertices() {
        assert_eq!(two_clusters_bridge().graph.n(), 15);
        assert_eq!(remark_digraph().n(), 9);
        assert_eq!(five_clusters().graph.n(), 35);
    }
}
