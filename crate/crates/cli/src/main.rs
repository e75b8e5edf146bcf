use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use kcs_core::datagen::{self, GenConfig, Manifest, WeightDist};
use kcs_core::graph::{io as gio, QueryParams, VISIT_FILE};
use kcs_core::index::{IndexConfig, IndexTree};
use kcs_core::metrics::{verify_community, Networks, Thresholds};
use kcs_core::precompute::{LemmaSet, OfflineBounds, PivotConfig};
use kcs_core::query::{answer_query, brute_force_oracle, QueryConfig, QueryTrace};
use kcs_core::snapshot::{self, BOUNDS_FILE, INDEX_FILE};
use kcs_core::sweep::{self, BenchPlan, Defaults, SweepParam};
use kcs_core::temporal::{insertion_batches, BatchOp, TemporalState, TemporalVisitLog, UpdateBatch};
use kcs_core::{Dataset, Error};

#[derive(Parser)]
#[command(name = "kcs", version, about = "Keyword-aware community search over spatial-social networks")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Generate a synthetic dataset directory.
    Gen(GenArgs),
    /// Select pivots and compute per-user bounds.
    Precompute(PrecomputeArgs),
    /// Build the index tree over precomputed bounds.
    BuildIndex(BuildIndexArgs),
    /// Answer one query with the index.
    Query(QueryArgs),
    /// Answer one query by exhaustive search (small instances only).
    Oracle(QueryArgs),
    /// Replay a visit log in batches and time maintenance.
    Stream(StreamArgs),
    /// Parameter sweep and pruning-power staging.
    Bench(BenchArgs),
}

#[derive(Copy, Clone, ValueEnum)]
enum Weights {
    Uniform,
    Gaussian,
    Skew,
}

#[derive(Args)]
struct GenArgs {
    #[arg(long)]
    out: PathBuf,
    /// JSON generator config; flags given explicitly override it.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    users: Option<usize>,
    #[arg(long)]
    road_vertices: Option<usize>,
    #[arg(long)]
    pois: Option<usize>,
    #[arg(long)]
    keywords: Option<usize>,
    #[arg(long, value_enum)]
    weights: Option<Weights>,
    #[arg(long)]
    zipf: Option<f64>,
    /// Also write timestamped visits over `[0, horizon)`.
    #[arg(long)]
    horizon: Option<i64>,
    #[arg(long)]
    tau: Option<i64>,
    /// Edge list to use as the social graph instead of generating one.
    #[arg(long)]
    import: Option<PathBuf>,
}

#[derive(Args)]
struct PrecomputeArgs {
    #[arg(long)]
    data: PathBuf,
    /// Output file; defaults to bounds.json inside the data directory.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, default_value_t = 8)]
    social_pivots: usize,
    #[arg(long, default_value_t = 8)]
    road_pivots: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
}

#[derive(Args)]
struct BuildIndexArgs {
    #[arg(long)]
    data: PathBuf,
    #[arg(long)]
    bounds: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, default_value_t = 8)]
    fanout: usize,
    #[arg(long, default_value_t = 64)]
    leaf_capacity: usize,
    #[arg(long, default_value_t = 50)]
    iters: usize,
    #[arg(long, default_value_t = 7)]
    seed: u64,
}

#[derive(Args, Clone)]
struct QueryArgs {
    #[arg(long)]
    data: PathBuf,
    #[arg(long)]
    bounds: Option<PathBuf>,
    #[arg(long)]
    index: Option<PathBuf>,
    /// JSON parameter file; flags given explicitly override it.
    #[arg(long)]
    params: Option<PathBuf>,
    #[arg(long)]
    q: Option<String>,
    /// Comma-separated keyword names.
    #[arg(long, value_delimiter = ',')]
    keywords: Option<Vec<String>>,
    #[arg(long)]
    k: Option<u32>,
    #[arg(long)]
    d: Option<u32>,
    #[arg(long)]
    omega: Option<f64>,
    #[arg(long)]
    pi: Option<f64>,
    #[arg(long)]
    theta: Option<f64>,
    #[arg(long)]
    sigma: Option<f64>,
    /// Disable the pi lemma, whose bound is not provably sound.
    #[arg(long)]
    sound_only: bool,
    /// Write the JSON here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct StreamArgs {
    #[arg(long)]
    data: PathBuf,
    /// Visit log; defaults to visits.txt in the data directory.
    #[arg(long)]
    visits: Option<PathBuf>,
    #[arg(long, default_value_t = 30)]
    tau: i64,
    #[arg(long, default_value_t = 25)]
    batch_size: usize,
    /// Events up to this time form the initial state; defaults to `tau`.
    #[arg(long)]
    start: Option<i64>,
    /// An expiration batch follows every this many insertion batches; 0 never.
    #[arg(long, default_value_t = 1)]
    expire_every: usize,
    /// Default-parameter queries registered for maintenance.
    #[arg(long, default_value_t = 5)]
    register: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Also time the batch as singleton updates (the comm_1_ms column).
    #[arg(long)]
    time_singletons: bool,
    #[arg(long, default_value_t = 0.05)]
    delta: f64,
    #[arg(long, default_value_t = 4)]
    social_pivots: usize,
    #[arg(long, default_value_t = 4)]
    road_pivots: usize,
    #[arg(long, default_value_t = 32)]
    leaf_capacity: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct BenchArgs {
    #[arg(long)]
    data: PathBuf,
    #[arg(long)]
    bounds: Option<PathBuf>,
    #[arg(long)]
    index: Option<PathBuf>,
    #[arg(long)]
    sweep: SweepParam,
    #[arg(long, value_delimiter = ',', required = true)]
    values: Vec<f64>,
    #[arg(long, default_value_t = 10)]
    reps: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long)]
    sound_only: bool,
    #[arg(long)]
    k: Option<u32>,
    #[arg(long)]
    d: Option<u32>,
    #[arg(long)]
    keywords: Option<usize>,
    #[arg(long)]
    omega: Option<f64>,
    #[arg(long)]
    pi: Option<f64>,
    #[arg(long)]
    theta: Option<f64>,
    #[arg(long)]
    sigma: Option<f64>,
    /// Sweep CSV; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Pruning-power staging CSV at the defaults.
    #[arg(long)]
    staging: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.cmd) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            let epoch = e
                .chain()
                .any(|c| matches!(c.downcast_ref::<Error>(), Some(Error::EpochMismatch { .. })));
            ExitCode::from(if epoch { 3 } else { 2 })
        }
    }
}

fn run(cmd: Cmd) -> anyhow::Result<()> {
    match cmd {
        Cmd::Gen(a) => gen(a),
        Cmd::Precompute(a) => precompute(a),
        Cmd::BuildIndex(a) => build_index(a),
        Cmd::Query(a) => query(a, false),
        Cmd::Oracle(a) => query(a, true),
        Cmd::Stream(a) => stream(a),
        Cmd::Bench(a) => bench(a),
    }
}

fn load_dataset(dir: &Path) -> anyhow::Result<Dataset> {
    Dataset::load_dir(dir).with_context(|| format!("loading dataset from {}", dir.display()))
}

fn gen(a: GenArgs) -> anyhow::Result<()> {
    let mut cfg: GenConfig = match &a.config {
        Some(p) => serde_json::from_str(&fs::read_to_string(p)?).context("generator config")?,
        None => GenConfig::default(),
    };
    if let Some(v) = a.seed {
        cfg.seed = v;
    }
    if let Some(v) = a.users {
        cfg.users = v;
    }
    if let Some(v) = a.road_vertices {
        cfg.road_vertices = v;
    }
    if let Some(v) = a.pois {
        cfg.pois = v;
    }
    if let Some(v) = a.keywords {
        cfg.keywords = v;
    }
    if let Some(w) = a.weights {
        cfg.weights = match w {
            Weights::Uniform => WeightDist::Uniform,
            Weights::Gaussian => WeightDist::Gaussian { mean: 0.5, sd: 0.15 },
            Weights::Skew => WeightDist::Skew {
                zipf_s: a.zipf.unwrap_or(0.8),
            },
        };
    }
    if a.horizon.is_some() {
        cfg.horizon = a.horizon;
    }
    if a.tau.is_some() {
        cfg.tau = a.tau;
    }
    cfg.validate()?;
    let ds = match &a.import {
        Some(p) => {
            let social = datagen::import_edge_list(&fs::read_to_string(p)?, &cfg)?;
            cfg.users = social.user_count();
            datagen::augment(social, &cfg)?
        }
        None => datagen::generate(&cfg)?,
    };
    ds.write_dir(&a.out)?;
    let visits = match cfg.horizon {
        Some(h) => {
            let ev = datagen::gen_temporal(&cfg, &ds.checkins, h);
            gio::write_visits(&ds.social, &ds.pois, &ev, BufWriter::new(File::create(a.out.join(VISIT_FILE))?))?;
            Some(ev.len())
        }
        None => None,
    };
    let m = Manifest::new(&cfg, &ds, visits);
    fs::write(a.out.join("manifest.json"), serde_json::to_string_pretty(&m)? + "\n")?;
    eprintln!(
        "wrote {} users, {} pois, {} check-ins to {}",
        m.users,
        m.pois,
        m.checkins,
        a.out.display()
    );
    Ok(())
}

fn precompute(a: PrecomputeArgs) -> anyhow::Result<()> {
    let net = Networks::new(load_dataset(&a.data)?);
    let cfg = PivotConfig {
        social: a.social_pivots,
        road: a.road_pivots,
        seed: a.seed,
        ..Default::default()
    };
    let t = Instant::now();
    let bounds = OfflineBounds::compute(&net, &cfg);
    let out = a.out.unwrap_or_else(|| a.data.join(BOUNDS_FILE));
    snapshot::save_bounds(&out, &bounds)?;
    eprintln!("bounds for {} users in {:.1}s", net.user_count(), t.elapsed().as_secs_f64());
    Ok(())
}

fn build_index(a: BuildIndexArgs) -> anyhow::Result<()> {
    let net = Networks::new(load_dataset(&a.data)?);
    let epoch = net.data.fingerprint();
    let bounds = snapshot::load_bounds(&a.bounds.unwrap_or_else(|| a.data.join(BOUNDS_FILE)), Some(&epoch))?;
    let cfg = IndexConfig {
        fanout: a.fanout,
        leaf_capacity: a.leaf_capacity,
        iters: a.iters,
        seed: a.seed,
        ..Default::default()
    };
    if cfg.fanout < 2 || cfg.leaf_capacity == 0 {
        bail!(Error::InvalidParams("fanout must be at least 2 and leaf capacity positive".into()));
    }
    let t = Instant::now();
    let tree = IndexTree::build(&net, &bounds, &cfg);
    snapshot::save_tree(&a.out.unwrap_or_else(|| a.data.join(INDEX_FILE)), &tree)?;
    eprintln!("index with {} nodes in {:.1}s", tree.nodes.len(), t.elapsed().as_secs_f64());
    Ok(())
}

/// Query parameters by name, as read from a `--params` file.
#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct ParamFile {
    q: Option<String>,
    keywords: Option<Vec<String>>,
    k: Option<u32>,
    d: Option<u32>,
    omega: Option<f64>,
    pi: Option<f64>,
    theta: Option<f64>,
    sigma: Option<f64>,
}

fn resolve_params(a: &QueryArgs, ds: &Dataset) -> anyhow::Result<QueryParams> {
    let file: ParamFile = match &a.params {
        Some(p) => serde_json::from_str(&fs::read_to_string(p)?).context("parameter file")?,
        None => ParamFile::default(),
    };
    let d = Defaults::default();
    let missing = |what: &str| Error::InvalidParams(format!("missing --{what}"));
    let q = a.q.clone().or(file.q).ok_or_else(|| missing("q"))?;
    let q = ds.social.user_id(&q).ok_or(Error::UnknownUser(q))?;
    let names = a.keywords.clone().or(file.keywords).ok_or_else(|| missing("keywords"))?;
    let p = QueryParams {
        q,
        keywords: QueryParams::keywords_from_names(ds, &names)?,
        k: a.k.or(file.k).unwrap_or(d.k),
        d: a.d.or(file.d).unwrap_or(d.d),
        omega: a.omega.or(file.omega).unwrap_or(d.omega),
        pi: a.pi.or(file.pi).unwrap_or(d.pi),
        theta: a.theta.or(file.theta).unwrap_or(d.theta),
        sigma: a.sigma.or(file.sigma).unwrap_or(d.sigma),
    };
    p.validate()?;
    Ok(p)
}

#[derive(Serialize)]
struct QueryDoc<'a> {
    engine: &'static str,
    q: &'a str,
    keywords: Vec<&'a str>,
    k: u32,
    d: u32,
    omega: f64,
    pi: f64,
    theta: f64,
    sigma: f64,
    users: Vec<&'a str>,
    pois: Vec<&'a str>,
    report: kcs_core::metrics::VerificationReport,
    trace: Option<QueryTrace>,
    total_ms: f64,
}

fn query(a: QueryArgs, oracle: bool) -> anyhow::Result<()> {
    let ds = load_dataset(&a.data)?;
    let p = resolve_params(&a, &ds)?;
    let net = Networks::new(ds);
    let t = Instant::now();
    let (answer, report, trace) = if oracle {
        let ans = brute_force_oracle(&net, &p)?;
        let th = Thresholds::resolve(&net.data.checkins, &p)?;
        let rep = verify_community(&net, &ans, &th);
        (ans, rep, None)
    } else {
        let epoch = net.data.fingerprint();
        let bounds = snapshot::load_bounds(&a.bounds.clone().unwrap_or_else(|| a.data.join(BOUNDS_FILE)), Some(&epoch))?;
        let tree = snapshot::load_tree(&a.index.clone().unwrap_or_else(|| a.data.join(INDEX_FILE)), Some(&epoch))?;
        let cfg = if a.sound_only {
            QueryConfig::sound_only()
        } else {
            QueryConfig::default()
        };
        let out = answer_query(&tree, &bounds, &net, &p, &cfg)?;
        (out.answer, out.report, Some(out.trace))
    };
    let total_ms = t.elapsed().as_secs_f64() * 1e3;
    let ds = &net.data;
    let doc = QueryDoc {
        engine: if oracle { "oracle" } else { "index" },
        q: ds.social.user_name(p.q),
        keywords: p.keywords.iter().map(|&k| ds.pois.keyword_name(k)).collect(),
        k: p.k,
        d: p.d,
        omega: p.omega,
        pi: p.pi,
        theta: p.theta,
        sigma: p.sigma,
        users: answer.users.iter().map(|&u| ds.social.user_name(u)).collect(),
        pois: answer.pois.iter().map(|&x| ds.pois.poi_name(x)).collect(),
        report,
        trace,
        total_ms,
    };
    let text = serde_json::to_string_pretty(&doc)? + "\n";
    match &a.out {
        Some(p) => fs::write(p, text)?,
        None => std::io::stdout().write_all(text.as_bytes())?,
    }
    Ok(())
}

#[derive(Serialize)]
struct StreamRow {
    batch: u64,
    op: &'static str,
    now: i64,
    events: usize,
    affected: usize,
    data_ms: f64,
    comm_1_ms: Option<f64>,
    comm_b_ms: f64,
    tree_ms: f64,
    migrated: usize,
    remapped: usize,
    communities: usize,
    valid: usize,
}

fn stream(a: StreamArgs) -> anyhow::Result<()> {
    let ds = load_dataset(&a.data)?;
    let vpath = a.visits.clone().unwrap_or_else(|| a.data.join(VISIT_FILE));
    let mut events = gio::load_visits(&vpath, &ds.social, &ds.pois)?;
    events.sort_by_key(|e| e.2);
    if a.batch_size == 0 {
        bail!(Error::InvalidParams("batch size must be positive".into()));
    }
    let start = a.start.unwrap_or(a.tau);
    let split = events.partition_point(|e| e.2 <= start);
    let log = TemporalVisitLog::from_events(ds.user_count(), &events[..split]);
    let pivots = PivotConfig {
        social: a.social_pivots,
        road: a.road_pivots,
        seed: a.seed,
        ..Default::default()
    };
    let index = IndexConfig {
        leaf_capacity: a.leaf_capacity,
        seed: a.seed,
        ..Default::default()
    };
    let mut st = TemporalState::new(ds, log, start, a.tau, &pivots, &index)?;
    st.delta = a.delta;
    for p in sweep::default_queries(&st.net, &Defaults::default(), a.register, a.seed) {
        st.register(p)?;
    }

    let sink: Box<dyn Write> = match &a.out {
        Some(p) => Box::new(File::create(p)?),
        None => Box::new(std::io::stdout()),
    };
    let mut w = csv::Writer::from_writer(sink);
    for (i, ins) in insertion_batches(&events[split..], a.batch_size).into_iter().enumerate() {
        let now = ins.now;
        let mut todo = vec![ins];
        if a.expire_every > 0 && (i + 1) % a.expire_every == 0 {
            todo.push(UpdateBatch {
                op: BatchOp::Deletion,
                events: Vec::new(),
                now,
            });
        }
        for b in todo {
            // expired events are only known once the insertion before them is applied
            let b = match b.op {
                BatchOp::Deletion => st.expiration(now),
                BatchOp::Insertion => b,
            };
            let r = st.apply_batch(&b, a.time_singletons)?;
            let live: Vec<_> = st.registry.iter().filter(|r| !r.answer.is_empty()).collect();
            let valid = live
                .iter()
                .filter(|reg| {
                    Thresholds::resolve(&st.net.data.checkins, &reg.params)
                        .is_ok_and(|th| verify_community(&st.net, &reg.answer, &th).passes())
                })
                .count();
            w.serialize(StreamRow {
                batch: st.batches(),
                op: match b.op {
                    BatchOp::Insertion => "insert",
                    BatchOp::Deletion => "expire",
                },
                now,
                events: r.events,
                affected: r.affected_users,
                data_ms: r.data_ms,
                comm_1_ms: r.comm_single_ms,
                comm_b_ms: r.comm_batch_ms,
                tree_ms: r.tree_ms,
                migrated: r.index.migrated_users,
                remapped: r.index.remapped_nodes,
                communities: live.len(),
                valid,
            })?;
        }
    }
    w.flush()?;
    Ok(())
}

fn bench(a: BenchArgs) -> anyhow::Result<()> {
    let net = Networks::new(load_dataset(&a.data)?);
    let epoch = net.data.fingerprint();
    let bounds = snapshot::load_bounds(&a.bounds.clone().unwrap_or_else(|| a.data.join(BOUNDS_FILE)), Some(&epoch))?;
    let tree = snapshot::load_tree(&a.index.clone().unwrap_or_else(|| a.data.join(INDEX_FILE)), Some(&epoch))?;
    let mut defaults = Defaults::default();
    if let Some(v) = a.k {
        defaults.k = v;
    }
    if let Some(v) = a.d {
        defaults.d = v;
    }
    if let Some(v) = a.keywords {
        defaults.keywords = v;
    }
    if let Some(v) = a.omega {
        defaults.omega = v;
    }
    if let Some(v) = a.pi {
        defaults.pi = v;
    }
    if let Some(v) = a.theta {
        defaults.theta = v;
    }
    if let Some(v) = a.sigma {
        defaults.sigma = v;
    }
    let plan = BenchPlan {
        param: a.sweep,
        values: a.values.clone(),
        defaults,
        repetitions: a.reps,
        seed: a.seed,
        lemmas: if a.sound_only { LemmaSet::sound_only() } else { LemmaSet::all() },
    };
    let rows = sweep::run_sweep(&tree, &bounds, &net, &plan)?;
    let sink: Box<dyn Write> = match &a.out {
        Some(p) => Box::new(File::create(p)?),
        None => Box::new(std::io::stdout()),
    };
    let mut w = csv::Writer::from_writer(sink);
    for r in &rows {
        w.serialize(r)?;
    }
    w.flush()?;
    if let Some(p) = &a.staging {
        let qs = sweep::default_queries(&net, &defaults, a.reps, a.seed);
        let mut w = csv::Writer::from_path(p)?;
        for r in sweep::staging(&tree, &bounds, &net, &qs)? {
            w.serialize(r)?;
        }
        w.flush()?;
    }
    Ok(())
}
