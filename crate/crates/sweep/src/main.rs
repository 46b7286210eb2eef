use std::fs::File;
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};
use contagion_core::bifurcation::{bifurcation_curves, q_max, CdfMode};
use contagion_core::contagion::{activation_matrix, cluster_seed, run_contagion};
use contagion_core::dimension::embedding_dimension;
use contagion_core::geometry::geometry_score;
use contagion_core::map::{build_map, PointCloud};
use contagion_core::network::{build_network, geometric_neighbor_offsets};
use contagion_core::tda::{reference_torus_barcode, topology_score};
use contagion_core::{ContagionConfig, MapVariant, Network, NodeId, Radius};
use contagion_sweep::config::{parse_f64_list, parse_usize_list, GroundMetric, TdaConfig, PAPER_SCALE_N};
use contagion_sweep::manifest::Manifest;
use contagion_sweep::render::{render_heatmap, HeatMeasure, OverlaySpec};
use contagion_sweep::{render_study, run_gamma_study, run_sweep, write_outputs, Measure, SweepConfig, SweepResult};
use serde_json::json;

/// Contagion maps on noisy geometric networks.
#[derive(Parser)]
#[command(name = "cmap", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build a network and write its edge list.
    Net {
        #[command(flatten)]
        net: NetArgs,
        /// Output file (stdout if omitted).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Activation times of one cluster-seeded realization.
    Contagion {
        #[command(flatten)]
        source: NetSource,
        #[arg(long)]
        threshold: f64,
        /// Seed node as `x,y`.
        #[arg(long, default_value = "0,0")]
        node: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Contagion map point cloud as CSV.
    Map {
        #[command(flatten)]
        source: NetSource,
        #[arg(long)]
        threshold: f64,
        #[arg(long, default_value = "symmetric")]
        variant: MapVariant,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// One measure of a point cloud written by `map`.
    Score {
        #[arg(long)]
        cloud: PathBuf,
        /// geometry | dimensionality | topology
        #[arg(long)]
        measure: Measure,
        #[arg(long, default_value = "linf")]
        ground: GroundMetric,
        #[arg(long, default_value_t = 2.0)]
        order: f64,
    },
    /// `(dNG, T)` grid study.
    Sweep(StudyArgs),
    /// Decay-exponent study at fixed `dNG`.
    Gamma(StudyArgs),
    /// Analytic bifurcation curves as CSV.
    Bifurcation {
        #[arg(long, default_value_t = 8)]
        dg: usize,
        /// Number of nodes.
        #[arg(long, default_value_t = 2500)]
        nodes: usize,
        /// Active-node count: a number, `qmax`, or `q0` (the seed cluster,
        /// `1 + dG + dNG`).
        #[arg(long, default_value = "qmax")]
        q_t: String,
        #[arg(long, default_value_t = 0)]
        width: usize,
        #[arg(long, default_value = "1:25")]
        dng: String,
        /// binomial | exact
        #[arg(long, default_value = "binomial")]
        mode: CdfMode,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Heatmap and CSV matrix of one measure from a results file.
    Render {
        #[arg(long)]
        results: PathBuf,
        /// rho | dimension | wasserstein
        #[arg(long)]
        measure: HeatMeasure,
        #[arg(long)]
        gamma: Option<f64>,
        /// Draw the wavefront and new-cluster curves.
        #[arg(long)]
        overlay: bool,
        /// Active fraction for the new-cluster curve.
        #[arg(long, default_value_t = 0.6)]
        delta: f64,
        #[arg(long, default_value_t = 0)]
        width: usize,
        #[arg(long, default_value = "binomial")]
        mode: CdfMode,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Args, Clone)]
struct NetArgs {
    #[arg(long, default_value_t = 20)]
    n: usize,
    /// Squared geometric radius.
    #[arg(long, default_value_t = 2)]
    p2: u32,
    #[arg(long, default_value_t = 0)]
    q: usize,
    #[arg(long, default_value_t = 0.0)]
    gamma: f64,
    #[arg(long, default_value_t = 1)]
    seed: u64,
}

#[derive(Args)]
struct NetSource {
    /// Edge-list file from `net`; otherwise the network is built from the flags.
    #[arg(long)]
    net: Option<PathBuf>,
    #[command(flatten)]
    build: NetArgs,
}

impl NetSource {
    fn load(&self) -> anyhow::Result<Network> {
        Ok(match &self.net {
            Some(path) => {
                let f = File::open(path).with_context(|| format!("opening {}", path.display()))?;
                Network::read_from(BufReader::new(f))?
            }
            None => {
                let a = &self.build;
                build_network(a.n, Radius::from_squared(a.p2)?, a.q, a.gamma, a.seed)?
            }
        })
    }
}

#[derive(Args)]
struct StudyArgs {
    /// JSON config; flags below override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    n: Option<usize>,
    /// Run at n = 50 (the large lattice); topology there is slow.
    #[arg(long)]
    paper_scale: bool,
    #[arg(long)]
    p2: Option<u32>,
    /// `a,b,c` or `start:stop[:step]`.
    #[arg(long)]
    dng: Option<String>,
    /// `a,b,c` or `start:stop:step`.
    #[arg(long)]
    thresholds: Option<String>,
    #[arg(long)]
    gammas: Option<String>,
    #[arg(long)]
    variant: Option<MapVariant>,
    #[arg(long)]
    seed: Option<u64>,
    /// Comma-separated subset of geometry, dimensionality, topology.
    #[arg(long)]
    measures: Option<String>,
    #[arg(long)]
    ground: Option<GroundMetric>,
    #[arg(long)]
    order: Option<f64>,
    #[arg(long)]
    delta: Option<f64>,
    #[arg(long)]
    threads: Option<usize>,
    #[arg(long)]
    no_cache: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

impl StudyArgs {
    fn config(&self, base: SweepConfig) -> anyhow::Result<SweepConfig> {
        let mut cfg = match &self.config {
            Some(path) => SweepConfig::from_json_file(path, &base)?,
            None => base,
        };
        if self.paper_scale {
            cfg.paper_scale = true;
            cfg.n = PAPER_SCALE_N;
        }
        if let Some(n) = self.n {
            cfg.n = n;
        }
        if let Some(p2) = self.p2 {
            cfg.p_squared = p2;
        }
        if let Some(s) = &self.dng {
            cfg.dng = parse_usize_list(s)?;
        }
        if let Some(s) = &self.thresholds {
            cfg.thresholds = parse_f64_list(s)?;
        }
        if let Some(s) = &self.gammas {
            cfg.gammas = parse_f64_list(s)?;
        }
        if let Some(v) = self.variant {
            cfg.variant = v;
        }
        if let Some(seed) = self.seed {
            cfg.seed = seed;
        }
        if let Some(s) = &self.measures {
            cfg.measures = s.split(',').map(|m| m.trim().parse()).collect::<Result<_, _>>()?;
        }
        let TdaConfig { ground, order } = cfg.tda;
        cfg.tda = TdaConfig { ground: self.ground.unwrap_or(ground), order: self.order.unwrap_or(order) };
        if let Some(d) = self.delta {
            cfg.delta = d;
        }
        if self.threads.is_some() {
            cfg.threads = self.threads;
        }
        if self.no_cache {
            cfg.cache = false;
        }
        if let Some(out) = &self.out {
            cfg.output_dir = out.clone();
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

fn output(path: Option<&Path>) -> anyhow::Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => {
            let f = File::create(p).with_context(|| format!("creating {}", p.display()))?;
            Box::new(BufWriter::new(f))
        }
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn parse_node(s: &str, n: usize) -> anyhow::Result<NodeId> {
    let Some((x, y)) = s.split_once(',') else {
        bail!("node must be `x,y`, got `{s}`");
    };
    let (x, y): (u32, u32) = (x.trim().parse()?, y.trim().parse()?);
    if x as usize >= n || y as usize >= n {
        bail!("node ({x}, {y}) is outside the {n} x {n} lattice");
    }
    Ok(NodeId::new(x, y))
}

fn run_study(args: &StudyArgs, base: SweepConfig, command: &str) -> anyhow::Result<()> {
    let cfg = args.config(base)?;
    log::info!("config hash {}", cfg.hash());
    let result = if command == "gamma" { run_gamma_study(&cfg)? } else { run_sweep(&cfg)? };
    let out = write_outputs(&result, &cfg, command, &cfg.output_dir)?;
    if command == "sweep" {
        render_study(&result, &cfg, &cfg.output_dir)?;
    }
    println!("{}", out.results.display());
    Ok(())
}

fn main() -> anyhow::Result<()> {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match cli.command {
        Command::Net { net, out } => {
            let a = &net;
            let network = build_network(a.n, Radius::from_squared(a.p2)?, a.q, a.gamma, a.seed)?;
            let mut w = output(out.as_deref())?;
            network.write_to(&mut w)?;
            w.flush()?;
        }
        Command::Contagion { source, threshold, node, out } => {
            let net = source.load()?;
            let cfg = ContagionConfig::for_network(threshold, &net)?;
            let j = parse_node(&node, net.n())?;
            let times = run_contagion(&net, &cluster_seed(&net, j), &cfg);
            let mut w = output(out.as_deref())?;
            writeln!(w, "node,x,y,time")?;
            for (i, t) in times.iter().enumerate() {
                let id = NodeId::from_index(i, net.n());
                writeln!(w, "{i},{},{},{t}", id.x, id.y)?;
            }
            w.flush()?;
        }
        Command::Map { source, threshold, variant, out } => {
            let net = source.load()?;
            let cfg = ContagionConfig::for_network(threshold, &net)?;
            let cloud: PointCloud<f64> = build_map(&activation_matrix(&net, &cfg), variant);
            let mut w = output(out.as_deref())?;
            cloud.write_csv(&mut w, net.n())?;
            w.flush()?;
        }
        Command::Score { cloud, measure, ground, order } => {
            let f = File::open(&cloud).with_context(|| format!("opening {}", cloud.display()))?;
            let (points, n): (PointCloud<f64>, usize) = PointCloud::read_csv(BufReader::new(f))?;
            match measure {
                Measure::Geometry => println!("rho,{}", geometry_score(&points, n)?),
                Measure::Dimensionality => {
                    let r = embedding_dimension(&points)?;
                    println!("dimension,{}", r.dimension);
                    println!("residuals,\"{}\"", serde_json::to_string(&r.residuals)?);
                }
                Measure::Topology => {
                    let reference = reference_torus_barcode(n)?;
                    let params = TdaConfig { ground, order }.params();
                    println!("wasserstein,{}", topology_score(&points, &reference, &params)?);
                }
            }
        }
        Command::Sweep(args) => run_study(&args, SweepConfig::default(), "sweep")?,
        Command::Gamma(args) => run_study(&args, SweepConfig::gamma_study(), "gamma")?,
        Command::Bifurcation { dg, nodes, q_t, width, dng, mode, out } => {
            let dngs = parse_usize_list(&dng)?;
            let mut w = output(out.as_deref())?;
            writeln!(w, "# dg={dg}")?;
            writeln!(w, "# nodes={nodes}")?;
            writeln!(w, "# q_t={q_t}")?;
            writeln!(w, "# width={width}")?;
            writeln!(w, "# mode={}", mode.name())?;
            // q(0) panels are labelled pathological in the source figure; flagged, not altered
            writeln!(w, "# pathological={}", q_t == "q0")?;
            writeln!(w, "dNG,t_wfp,anc_horizon,anc_lower_bound,t_anc")?;
            for d in dngs {
                let q = match q_t.as_str() {
                    "q0" => 1 + dg + d,
                    "qmax" => q_max(nodes, dg)?,
                    v => v.parse().with_context(|| format!("bad q_t `{v}`"))?,
                };
                for row in bifurcation_curves(dg, nodes, q, width, [d], mode)? {
                    writeln!(
                        w,
                        "{},{},{},{},{}",
                        row.dng, row.t_wfp, row.horizon, row.lower_bound, row.t_anc.value
                    )?;
                }
            }
            w.flush()?;
        }
        Command::Render { results, measure, gamma, overlay, delta, width, mode, out } => {
            let f = File::open(&results).with_context(|| format!("opening {}", results.display()))?;
            let result = SweepResult::read_csv(BufReader::new(f))?;
            let nodes = result.n * result.n;
            let spec = if overlay {
                if !(delta > 0.0 && delta <= 1.0) {
                    bail!("delta = {delta} must lie in (0, 1]");
                }
                Some(OverlaySpec {
                    dg: geometric_neighbor_offsets(Radius::from_squared(result.p_squared)?).len(),
                    nodes,
                    q_t: (delta * (nodes - 1) as f64).round() as usize,
                    width,
                    mode,
                })
            } else {
                None
            };
            let stem = match gamma {
                Some(g) => format!("{}_gamma{g}", measure.name()),
                None => measure.name().to_string(),
            };
            let rendered = render_heatmap(&result, measure, gamma, spec.as_ref(), &out, &stem)?;
            let config = json!({
                "results": results,
                "results_config_hash": result.config_hash,
                "measure": measure.name(),
                "gamma": gamma,
                "overlay": overlay,
                "delta": delta,
                "width": width,
                "mode": mode.name(),
            });
            Manifest::new("render", config)?.write(&out)?;
            println!("{}", rendered.png.display());
        }
    }
    Ok(())
}

