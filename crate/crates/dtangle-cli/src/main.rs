use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use dtangle::decomposition::{decomposition_from_labelling, verify_dtd, verify_distinguishing, DecompositionForTangles, DecompositionJson, GuardCheck};
use dtangle::generators::{five_clusters_spec, gen_clusters, seeded_rng, two_clusters_bridge, ClusterSpec, Clusters};
use dtangle::labelling::{build_labelling, verify_labelling, Context, LabellingJson, Mode, TreeLabelling};
use dtangle::separation::{min_separation, MinSep, SeparationJson};
use dtangle::solver::{detect_tangles, half_or_no_with, verify_half_integral, HalfIntegralJson, HalfIntegralOutcome, SolverConfig, DEFAULT_BUDGET};
use dtangle::tangle::{check_tangle_axioms, TangleCertificate};
use dtangle::walls::{congestion, cylindrical_grid, cylindrical_wall, required_wall_order, route_in_wall, route_through_wall, validate_wall, Wall, WallJson};
use dtangle::{Digraph, DirectedSeparation, Error, Tangle, Vertex};

#[derive(Parser)]
#[command(name = "dtangle", version, about = "Directed separations, tangles, tree-decompositions, walls and half-integral disjoint paths")]
struct Cli {
    /// Cap on worker threads.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Seed for every random choice.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Cylindrical grid of order k and its wall certificate.
    GenGrid {
        #[arg(long)]
        k: usize,
        #[arg(short, long)]
        out: Option<PathBuf>,
        /// Where to write the certificate.
        #[arg(long)]
        cert: Option<PathBuf>,
    },
    /// Cylindrical wall of order k: writes the certificate to -o and the
    /// graph to --graph-out (default: `-o` with extension `graph.json`).
    GenWall {
        #[arg(long)]
        k: usize,
        #[arg(short, long)]
        out: Option<PathBuf>,
        #[arg(long)]
        graph_out: Option<PathBuf>,
    },
    /// Bidirected clusters with tangle certificates.
    GenClusters {
        #[arg(long, conflicts_with = "preset")]
        spec: Option<PathBuf>,
        #[arg(long, value_enum)]
        preset: Option<Preset>,
        #[arg(short, long)]
        out: Option<PathBuf>,
        #[arg(long)]
        certs: Option<PathBuf>,
    },
    /// Minimum separation from one vertex set to another.
    MinSep {
        #[arg(long)]
        graph: PathBuf,
        /// Comma-separated vertex names.
        #[arg(long)]
        from: String,
        #[arg(long)]
        to: String,
        #[arg(long, default_value_t = usize::MAX)]
        bound: usize,
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Checks tangle certificates, or finds tangles of the given order.
    Tangles {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long)]
        certs: Option<PathBuf>,
        #[arg(long)]
        order: Option<usize>,
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Tree-labelling of a tangle family.
    Label {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long)]
        certs: PathBuf,
        #[arg(long, value_enum)]
        mode: Option<ModeArg>,
        #[arg(short, long)]
        out: Option<PathBuf>,
        #[arg(long)]
        dot: Option<PathBuf>,
    },
    /// Directed tree-decomposition distinguishing a tangle family.
    Decompose {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long)]
        certs: PathBuf,
        #[arg(long)]
        k: usize,
        #[arg(long, value_enum)]
        mode: Option<ModeArg>,
        #[arg(short, long)]
        out: Option<PathBuf>,
        #[arg(long)]
        dot: Option<PathBuf>,
    },
    /// Routes terminal pairs in or through a wall.
    Route {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long)]
        wall: PathBuf,
        #[arg(long)]
        pairs: PathBuf,
        /// `in` routes pairs on the outer and inner cycles inside the wall;
        /// `through` links arbitrary terminals or returns a separation.
        /// Defaults to `through` when the wall is large enough.
        #[arg(long, value_enum)]
        mode: Option<RouteMode>,
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Half-integral disjoint paths.
    Hndp {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long)]
        pairs: PathBuf,
        #[arg(long)]
        wall: Option<PathBuf>,
        #[arg(long)]
        tangle_order: Option<usize>,
        #[arg(long, default_value_t = DEFAULT_BUDGET)]
        budget: usize,
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Checks an artifact against a graph.
    Verify {
        #[arg(long, value_enum)]
        what: What,
        #[arg(long)]
        graph: PathBuf,
        #[arg(long)]
        cert: PathBuf,
        /// Tangle certificates (labelling and decomposition checks).
        #[arg(long)]
        certs: Option<PathBuf>,
        /// Pairs for a solver verdict.
        #[arg(long)]
        pairs: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Preset {
    Five,
    Bridge,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Explicit,
    Oracle,
}

#[derive(Clone, Copy, ValueEnum)]
enum RouteMode {
    In,
    Through,
}

#[derive(Clone, Copy, ValueEnum)]
enum What {
    Graph,
    Wall,
    Separation,
    Labelling,
    Decomposition,
    Paths,
}

/// A failure and the exit code it maps to.
struct Failure {
    code: u8,
    kind: &'static str,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let kind = match &e {
            Error::SizeGuard(_) => "size-guard",
            Error::Budget(_) => "budget",
            Error::NeedsCertificate(_) => "needs-certificate",
            Error::Parse(_) | Error::DuplicateEdge(..) | Error::DanglingEndpoint(_) | Error::SelfLoop(_) => "parse",
            Error::NotFound(_) | Error::UnknownEdge(..) => "not-found",
            _ => "invalid",
        };
        Failure { code: if e.is_abort() { 3 } else { 2 }, kind, message: e.to_string() }
    }
}

fn input(message: impl Into<String>) -> Failure {
    Failure { code: 2, kind: "invalid", message: message.into() }
}

type Out<T> = std::result::Result<T, Failure>;

fn read(path: &Path) -> Out<String> {
    fs::read_to_string(path).map_err(|e| Failure { code: 2, kind: "io", message: format!("{}: {e}", path.display()) })
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Out<T> {
    serde_json::from_str(&read(path)?).map_err(|e| Failure { code: 2, kind: "parse", message: format!("{}: {e}", path.display()) })
}

fn write(path: &Path, text: &str) -> Out<()> {
    fs::write(path, text).map_err(|e| Failure { code: 2, kind: "io", message: format!("{}: {e}", path.display()) })
}

fn load_graph(path: &Path) -> Out<Digraph> {
    Ok(Digraph::parse(&read(path)?)?)
}

fn load_pairs(g: &Digraph, path: &Path) -> Out<Vec<(Vertex, Vertex)>> {
    let raw: Vec<(String, String)> = read_json(path)?;
    raw.iter().map(|(s, t)| Ok((g.id_or_err(s)?, g.id_or_err(t)?))).collect()
}

fn load_tangles(g: &Digraph, path: &Path) -> Out<Vec<Tangle>> {
    let certs: Vec<TangleCertificate> = read_json(path)?;
    certs.iter().map(|c| Ok(Tangle::from_certificate(g, c)?)).collect()
}

fn names(g: &Digraph, list: &str) -> Out<dtangle::VertexSet> {
    let parts: Vec<String> = list.split(',').map(str::trim).filter(|s| !s.is_empty()).map(String::from).collect();
    Ok(g.set_from_names(&parts)?)
}

fn pretty(v: &impl serde::Serialize) -> String {
    serde_json::to_string_pretty(v).expect("serializable") + "\n"
}

/// Writes the artifact to `out`, or to stdout; the summary goes to stdout
/// after a file and to stderr otherwise.
fn emit(out: Option<&Path>, body: &str, summary: &str) -> Out<()> {
    match out {
        Some(p) => {
            write(p, body)?;
            println!("{summary}");
        }
        None => {
            print!("{body}");
            eprintln!("{summary}");
        }
    }
    Ok(())
}

fn mode_of(m: Option<ModeArg>, g: &Digraph, ts: &[Tangle]) -> Mode {
    match m {
        Some(ModeArg::Explicit) => Mode::Explicit,
        Some(ModeArg::Oracle) => Mode::Oracle,
        None => Context::auto(g, ts).mode,
    }
}

fn clusters_output(c: &Clusters, out: Option<&Path>, certs: Option<&Path>) -> Out<()> {
    let certs_json = pretty(&c.certificates);
    if let Some(p) = certs {
        write(p, &certs_json)?;
    }
    let summary = format!("{} clusters, {} vertices, {} edges", c.clusters.len(), c.graph.n(), c.graph.m());
    emit(out, &(c.graph.to_json() + "\n"), &summary)
}

fn paths_json(g: &Digraph, paths: &[Vec<Vertex>]) -> Value {
    json!(paths.iter().map(|p| p.iter().map(|&v| g.name(v)).collect::<Vec<_>>()).collect::<Vec<_>>())
}

fn run(cli: Cli) -> Out<()> {
    match cli.cmd {
        Cmd::GenGrid { k, out, cert } => {
            let (g, w) = cylindrical_grid(k)?;
            if let Some(p) = &cert {
                write(p, &pretty(&w.to_json(&g)))?;
            }
            emit(out.as_deref(), &(g.to_json() + "\n"), &format!("cylindrical grid of order {k}: {} vertices, {} edges", g.n(), g.m()))
        }
        Cmd::GenWall { k, out, graph_out } => {
            let (g, w) = cylindrical_wall(k)?;
            let graph_path = graph_out.or_else(|| out.as_ref().map(|p| p.with_extension("graph.json")));
            match &graph_path {
                Some(p) => write(p, &(g.to_json() + "\n"))?,
                None => eprintln!("{}", g.to_json()),
            }
            emit(out.as_deref(), &pretty(&w.to_json(&g)), &format!("cylindrical wall of order {k}: {} vertices, {} edges", g.n(), g.m()))
        }
        Cmd::GenClusters { spec, preset, out, certs } => {
            let c = match (spec, preset) {
                (Some(p), _) => {
                    let spec: ClusterSpec = read_json(&p)?;
                    gen_clusters(&spec, &mut seeded_rng(cli.seed))?
                }
                (None, Some(Preset::Five)) => gen_clusters(&five_clusters_spec(), &mut seeded_rng(cli.seed))?,
                (None, Some(Preset::Bridge)) => two_clusters_bridge(),
                (None, None) => return Err(input("one of --spec or --preset is required")),
            };
            clusters_output(&c, out.as_deref(), certs.as_deref())
        }
        Cmd::MinSep { graph, from, to, bound, out } => {
            let g = load_graph(&graph)?;
            let (s, t) = (names(&g, &from)?, names(&g, &to)?);
            let r = min_separation(&g, &s, &t, bound);
            let flow_paths = |p: &[Vec<Vertex>]| paths_json(&g, p);
            let (body, summary) = match &r {
                MinSep::Found { sep, flow, paths } => (
                    json!({"separation": sep.to_json(&g), "order": sep.order(), "flow": flow, "paths": flow_paths(paths)}),
                    format!("minimum separation of order {}", sep.order()),
                ),
                MinSep::AtLeast { flow, paths } => (
                    json!({"separation": null, "flow": flow, "paths": flow_paths(paths)}),
                    format!("no separation of order below {bound}; flow {flow}"),
                ),
            };
            emit(out.as_deref(), &pretty(&body), &summary)
        }
        Cmd::Tangles { graph, certs, order, out } => {
            let g = load_graph(&graph)?;
            let ts = match (certs, order) {
                (Some(p), _) => load_tangles(&g, &p)?,
                (None, Some(q)) => detect_tangles(&g, q)?,
                (None, None) => return Err(input("one of --certs or --order is required")),
            };
            let mut report = Vec::new();
            let mut ok = 0;
            for (i, t) in ts.iter().enumerate() {
                let verdict = check_tangle_axioms(&g, t)?;
                ok += verdict.is_ok() as usize;
                report.push(json!({
                    "id": i,
                    "k": t.order,
                    "cover": t.anchor().map(|a| g.set_names(a)),
                    "axioms": match &verdict { Ok(()) => "ok".to_string(), Err(w) => format!("{w:?}") },
                }));
            }
            emit(out.as_deref(), &pretty(&report), &format!("{} tangles, {ok} pass the axioms", ts.len()))
        }
        Cmd::Label { graph, certs, mode, out, dot } => {
            let g = load_graph(&graph)?;
            let ts = load_tangles(&g, &certs)?;
            let ctx = Context::new(&g, &ts, mode_of(mode, &g, &ts));
            let lab = build_labelling(&ctx)?;
            if let Some(p) = &dot {
                write(p, &lab.to_dot(&g))?;
            }
            emit(out.as_deref(), &pretty(&lab.to_json(&g)), &format!("labelling of {} tangles with order {}", lab.nodes.len(), lab.order()))
        }
        Cmd::Decompose { graph, certs, k, mode, out, dot } => {
            let g = load_graph(&graph)?;
            let ts = load_tangles(&g, &certs)?;
            let ctx = Context::new(&g, &ts, mode_of(mode, &g, &ts));
            let lab = build_labelling(&ctx)?;
            let d = decomposition_from_labelling(&ctx, &lab, k)?;
            if let Some(p) = &dot {
                write(p, &d.to_dot(&g))?;
            }
            let summary = format!("{} nodes, edge-width {}, {}", d.dtd.len(), d.edge_width(), if d.strict { "strict" } else { "relaxed" });
            emit(out.as_deref(), &pretty(&d.to_json(&ctx)), &summary)
        }
        Cmd::Route { graph, wall, pairs, mode, out } => {
            let g = load_graph(&graph)?;
            let w = Wall::from_json(&g, &read_json::<WallJson>(&wall)?)?;
            let pairs = load_pairs(&g, &pairs)?;
            let k = pairs.len();
            let mode = mode.unwrap_or(if k >= 3 && w.order >= required_wall_order(k) { RouteMode::Through } else { RouteMode::In });
            match mode {
                RouteMode::In => {
                    let p = route_in_wall(&g, &w, &pairs)?;
                    let c = congestion(g.n(), &p);
                    emit(out.as_deref(), &pretty(&json!({"outcome": "linkage", "paths": paths_json(&g, &p), "congestion": c})), &format!("routed {k} pairs with congestion {c}"))
                }
                RouteMode::Through => {
                    let s: Vec<Vertex> = pairs.iter().map(|p| p.0).collect();
                    let t: Vec<Vertex> = pairs.iter().map(|p| p.1).collect();
                    let r = route_through_wall(&g, &s, &t, &w)?;
                    let j = r.to_json(&g);
                    let summary = format!("outcome {}", serde_json::to_value(&j).expect("json")["outcome"].as_str().unwrap_or("?"));
                    emit(out.as_deref(), &pretty(&j), &summary)
                }
            }
        }
        Cmd::Hndp { graph, pairs, wall, tangle_order, budget, out } => {
            let g = load_graph(&graph)?;
            let pairs = load_pairs(&g, &pairs)?;
            let wall = match wall {
                Some(p) => Some(Wall::from_json(&g, &read_json::<WallJson>(&p)?)?),
                None => None,
            };
            let cfg = SolverConfig { tangle_order, budget, wall };
            match half_or_no_with(&g, &pairs, &cfg) {
                Ok(o) => {
                    let j = o.to_json(&g);
                    let summary = match &o {
                        HalfIntegralOutcome::NoIntegral => "no integral linkage".to_string(),
                        HalfIntegralOutcome::Paths(_) => format!("half-integral linkage with congestion {}", j.congestion.unwrap_or(1)),
                    };
                    emit(out.as_deref(), &pretty(&j), &summary)
                }
                Err(e) if e.is_abort() => {
                    let j = HalfIntegralJson { verdict: "aborted".into(), paths: vec![], congestion: None };
                    emit(out.as_deref(), &pretty(&j), "aborted")?;
                    Err(e.into())
                }
                Err(e) => Err(e.into()),
            }
        }
        Cmd::Verify { what, graph, cert, certs, pairs } => {
            let g = load_graph(&graph)?;
            let verdict: std::result::Result<(), String> = match what {
                What::Graph => {
                    let h = load_graph(&cert)?;
                    if h.names() == g.names() && h.edges().eq(g.edges()) { Ok(()) } else { Err("graphs differ".into()) }
                }
                What::Wall => {
                    let w = Wall::from_json(&g, &read_json::<WallJson>(&cert)?)?;
                    validate_wall(&g, &w).map_err(|v| v.to_string())
                }
                What::Separation => {
                    let j: SeparationJson = read_json(&cert)?;
                    let s = DirectedSeparation::new(g.set_from_names(&j.out)?, g.set_from_names(&j.inn)?);
                    s.validate(&g).map_err(|v| format!("{v:?}"))
                }
                What::Labelling => {
                    let ts = load_tangles(&g, certs.as_deref().ok_or_else(|| input("--certs is required"))?)?;
                    let lab = TreeLabelling::from_json(&g, &read_json::<LabellingJson>(&cert)?)?;
                    let ctx = Context::new(&g, &ts, lab.mode);
                    let all: Vec<usize> = (0..ts.len()).collect();
                    verify_labelling(&ctx, &lab, &all)?.map_err(|v| format!("{v:?}"))
                }
                What::Decomposition => {
                    let d = DecompositionForTangles::from_json(&g, &read_json::<DecompositionJson>(&cert)?)?;
                    let strict = verify_dtd(&g, &d.dtd, GuardCheck::Strict).map_err(|v| format!("{v:?}"));
                    match (strict, &certs) {
                        (Err(v), _) => Err(v),
                        (Ok(()), Some(p)) => {
                            let ts = load_tangles(&g, p)?;
                            let ctx = Context::auto(&g, &ts);
                            verify_distinguishing(&ctx, &d)?.map_err(|v| format!("{v:?}"))
                        }
                        (Ok(()), None) => Ok(()),
                    }
                }
                What::Paths => {
                    let pairs = load_pairs(&g, pairs.as_deref().ok_or_else(|| input("--pairs is required"))?)?;
                    let j: HalfIntegralJson = read_json(&cert)?;
                    match HalfIntegralOutcome::from_json(&g, &j)? {
                        HalfIntegralOutcome::NoIntegral => Ok(()),
                        HalfIntegralOutcome::Paths(p) => verify_half_integral(&g, &pairs, &p).map_err(|v| v.to_string()),
                    }
                }
            };
            match verdict {
                Ok(()) => {
                    println!("{}", json!({"ok": true}));
                    Ok(())
                }
                Err(v) => {
                    println!("{}", json!({"ok": false, "violation": v}));
                    Err(Failure { code: 1, kind: "violation", message: v })
                }
            }
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build_global() {
            eprintln!("{}", json!({"error": "threads", "message": e.to_string()}));
            return ExitCode::from(2);
        }
    }
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("{}", json!({"error": f.kind, "message": f.message}));
            ExitCode::from(f.code)
        }
    }
}
