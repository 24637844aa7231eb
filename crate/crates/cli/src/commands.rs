use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;
use spine::cellprob::Method;
use spine::eval::{self, Preset, StudyConfig};
use spine::extract::{edge_pvalues, backbone_from_pvalues, Correction, Model, Tails};
use spine::fdsm::FdsmOptions;
use spine::rng;
use spine::synth::{self, DegreeShape, PlantedPartition};

use crate::error::CliError;
use crate::io::{self, Format, LabeledGraph};

#[derive(Debug, Parser)]
#[command(name = "spine", version, about = "Backbones of bipartite projections")]
pub struct Cli {
    /// Worker threads (default: all cores).
    #[arg(long, global = true, env = "SPINE_THREADS")]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Extract the backbone of a bipartite graph's agent projection.
    Backbone(BackboneArgs),
    /// Generate a synthetic bipartite graph.
    Synth(SynthArgs),
    /// Run one of the replication studies.
    Study(StudyArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum ModelArg {
    Ffm,
    Frm,
    Fcm,
    Sdsm,
    Fdsm,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum CorrectionArg {
    None,
    Bonferroni,
    Holm,
    Fdr,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum MethodArg {
    Rcf,
    Lpm,
    Logit,
    #[value(name = "logit_i")]
    LogitI,
    Bicm,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum FormatArg {
    Edges,
    Dense,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum ShapeArg {
    Right,
    Left,
    Uniform,
    Constant,
    Normal,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum PresetArg {
    Paper,
    Desk,
}

#[derive(Debug, Args)]
pub struct BackboneArgs {
    /// Input graph (edge list, or dense matrix for `.csv`).
    pub input: PathBuf,
    #[arg(long, value_enum)]
    pub model: ModelArg,
    #[arg(long, default_value_t = 0.05)]
    pub alpha: f64,
    #[arg(long, default_value_t = 2, value_parser = clap::value_parser!(u8).range(1..=2))]
    pub tails: u8,
    #[arg(long, value_enum, default_value = "none")]
    pub correction: CorrectionArg,
    #[arg(long, value_enum, default_value = "bicm")]
    pub sdsm_method: MethodArg,
    /// Monte-Carlo trials for FDSM.
    #[arg(long, default_value_t = spine::fdsm::DEFAULT_TRIALS)]
    pub trials: usize,
    /// Independent curveball chains for FDSM.
    #[arg(long, default_value_t = 1)]
    pub chains: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Output prefix; writes `<prefix>.backbone.csv`, `<prefix>.pvalues.csv`
    /// and `<prefix>.summary.json`.
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// Input format, overriding detection by extension.
    #[arg(long, value_enum)]
    pub format: Option<FormatArg>,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    #[arg(long)]
    pub agents: usize,
    #[arg(long)]
    pub artifacts: usize,
    #[arg(long)]
    pub density: f64,
    #[arg(long, value_enum, default_value = "right")]
    pub agent_shape: ShapeArg,
    #[arg(long, value_enum, default_value = "right")]
    pub artifact_shape: ShapeArg,
    /// Plant two groups until this fraction of edges is within-group.
    #[arg(long)]
    pub planted_w: Option<f64>,
    /// Assign groups by fair coin instead of a balanced split.
    #[arg(long)]
    pub random_groups: bool,
    /// Realize exact apportioned degree sequences instead of Bernoulli cells.
    #[arg(long)]
    pub exact_degrees: bool,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Output graph path; a manifest is written to `<output>.manifest.json`.
    #[arg(long)]
    pub output: PathBuf,
    #[arg(long, value_enum)]
    pub format: Option<FormatArg>,
}

#[derive(Debug, Args)]
pub struct StudyArgs {
    #[arg(long, value_parser = clap::value_parser!(u8).range(1..=4))]
    pub id: u8,
    #[arg(long, value_enum, default_value = "desk")]
    pub preset: PresetArg,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value = ".")]
    pub output_dir: PathBuf,
    /// Override the preset's replicate count.
    #[arg(long)]
    pub replicates: Option<usize>,
    /// Override the FDSM trial count.
    #[arg(long)]
    pub trials: Option<usize>,
}

impl From<FormatArg> for Format {
    fn from(f: FormatArg) -> Self {
        match f {
            FormatArg::Edges => Format::EdgeList,
            FormatArg::Dense => Format::Dense,
        }
    }
}

impl From<ShapeArg> for DegreeShape {
    fn from(s: ShapeArg) -> Self {
        match s {
            ShapeArg::Right => DegreeShape::RIGHT,
            ShapeArg::Left => DegreeShape::LEFT,
            ShapeArg::Uniform => DegreeShape::UNIFORM,
            ShapeArg::Constant => DegreeShape::CONSTANT,
            ShapeArg::Normal => DegreeShape::NORMAL,
        }
    }
}

impl From<MethodArg> for Method {
    fn from(m: MethodArg) -> Self {
        match m {
            MethodArg::Rcf => Method::Rcf,
            MethodArg::Lpm => Method::Lpm,
            MethodArg::Logit => Method::Logit,
            MethodArg::LogitI => Method::LogitI,
            MethodArg::Bicm => Method::Bicm,
        }
    }
}

impl From<CorrectionArg> for Correction {
    fn from(c: CorrectionArg) -> Self {
        match c {
            CorrectionArg::None => Correction::None,
            CorrectionArg::Bonferroni => Correction::Bonferroni,
            CorrectionArg::Holm => Correction::Holm,
            CorrectionArg::Fdr => Correction::Fdr,
        }
    }
}

pub fn execute(cli: &Cli) -> Result<(), CliError> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(t) = cli.threads {
        if t == 0 {
            return Err(CliError::Usage("--threads must be positive".into()));
        }
        builder = builder.num_threads(t);
    }
    let pool = builder
        .build()
        .map_err(|e| CliError::Usage(format!("cannot start worker pool: {e}")))?;
    pool.install(|| match &cli.command {
        Command::Backbone(args) => backbone(args),
        Command::Synth(args) => synth_cmd(args),
        Command::Study(args) => study(args),
    })
}

fn with_suffix(prefix: &Path, suffix: &str) -> PathBuf {
    let mut s = prefix.as_os_str().to_owned();
    s.push(suffix);
    PathBuf::from(s)
}

fn backbone(args: &BackboneArgs) -> Result<(), CliError> {
    let input = io::read_graph(&args.input, args.format.map(Format::from))?;
    let model = match args.model {
        ModelArg::Ffm => Model::Ffm,
        ModelArg::Frm => Model::Frm,
        ModelArg::Fcm => Model::Fcm,
        ModelArg::Sdsm => Model::Sdsm(args.sdsm_method.into()),
        ModelArg::Fdsm => Model::Fdsm(FdsmOptions::new(args.trials, args.seed).with_chains(args.chains)),
    };
    let tails = if args.tails == 1 { Tails::One } else { Tails::Two };
    // Validates alpha and the trial count before any work is done.
    let cfg = spine::extract::TestConfig::new(args.alpha, tails, args.correction.into(), model)?;
    let pv = edge_pvalues(&input.graph, &cfg.model)?;
    let mut b = backbone_from_pvalues(&pv, cfg.alpha, cfg.tails, cfg.correction);
    b.warnings.splice(0..0, input.warnings.iter().cloned());

    let prefix = args.output.clone().unwrap_or_else(|| args.input.with_extension(""));
    let ids = &input.agents;
    let mut edges = csv::Writer::from_writer(Vec::new());
    let mut pvalues = csv::Writer::from_writer(Vec::new());
    let csv_err = |e: csv::Error| CliError::Output {
        path: prefix.display().to_string(),
        source: e.into(),
    };
    edges.write_record(["agent_a", "agent_b"]).map_err(csv_err)?;
    pvalues
        .write_record(["agent_a", "agent_b", "weight", "p_upper", "p_lower", "retained"])
        .map_err(csv_err)?;
    let proj = pv.projection();
    for i in 0..b.m() {
        for j in i + 1..b.m() {
            let kept = b.has_edge(i, j);
            if kept {
                edges.write_record([&ids[i], &ids[j]]).map_err(csv_err)?;
            }
            pvalues
                .write_record([
                    ids[i].clone(),
                    ids[j].clone(),
                    proj.weight(i, j).to_string(),
                    io::sig10(b.p_upper(i, j)),
                    io::sig10(b.p_lower(i, j)),
                    (kept as u8).to_string(),
                ])
                .map_err(csv_err)?;
        }
    }
    let text = |w: csv::Writer<Vec<u8>>| String::from_utf8(w.into_inner().expect("writing to memory")).expect("utf-8");
    io::write(&with_suffix(&prefix, ".backbone.csv"), &text(edges))?;
    io::write(&with_suffix(&prefix, ".pvalues.csv"), &text(pvalues))?;
    let summary = json!({
        "input": args.input.display().to_string(),
        "agents": input.graph.m(),
        "artifacts": input.graph.n(),
        "tag": b.tag,
        "edges": b.edge_count(),
        "backbone_density": b.density(),
        "seed": args.seed,
        "warnings": b.warnings,
    });
    io::write(
        &with_suffix(&prefix, ".summary.json"),
        &serde_json::to_string_pretty(&summary).expect("summary serializes"),
    )?;
    println!(
        "model={} alpha={} tails={} correction={} tests={} alpha_star={} edges={} density={:.6}",
        b.tag.model,
        b.tag.alpha,
        b.tag.tails,
        b.tag.correction,
        b.tag.tests,
        io::sig10(b.tag.alpha_star),
        b.edge_count(),
        b.density()
    );
    for w in &b.warnings {
        eprintln!("warning: {w}");
    }
    Ok(())
}

fn synth_cmd(args: &SynthArgs) -> Result<(), CliError> {
    let (agent, artifact): (DegreeShape, DegreeShape) = (args.agent_shape.into(), args.artifact_shape.into());
    let graph_seed = rng::derive_seed(args.seed, &[rng::label("synth-graph")]);
    let generator = if args.exact_degrees {
        synth::generate_exact
    } else {
        synth::generate
    };
    let g = generator(args.agents, args.artifacts, args.density, agent, artifact, graph_seed)
        .map_err(CliError::Generation)?;
    let mut manifest = json!({
        "agents": args.agents,
        "artifacts": args.artifacts,
        "target_density": args.density,
        "agent_shape": agent,
        "artifact_shape": artifact,
        "generator": if args.exact_degrees { "exact-degrees" } else { "bernoulli" },
        "seed": args.seed,
        "graph_seed": graph_seed,
        "realized_density": g.density(),
    });
    let graph = match args.planted_w {
        None => g,
        Some(w) => {
            let part_seed = rng::derive_seed(args.seed, &[rng::label("synth-partition")]);
            let swap_seed = rng::derive_seed(args.seed, &[rng::label("synth-plant")]);
            let part = if args.random_groups {
                PlantedPartition::random(g.m(), g.n(), w, part_seed)
            } else {
                PlantedPartition::balanced(g.m(), g.n(), w, part_seed)
            }
            .map_err(CliError::Generation)?;
            let planted = synth::plant_blocks(&g, &part, swap_seed).map_err(CliError::Generation)?;
            if !planted.reached {
                log::warn!("target W = {w} not reached; realized {}", planted.within);
            }
            let label = |v: &[bool]| v.iter().map(|&b| if b { "B" } else { "A" }).collect::<Vec<_>>();
            let extra = json!({
                "planted_w": w,
                "realized_w": planted.within,
                "w_reached": planted.reached,
                "swaps": planted.swaps,
                "random_groups": args.random_groups,
                "partition_seed": part_seed,
                "swap_seed": swap_seed,
                "agent_groups": label(&part.agent_groups),
                "artifact_groups": label(&part.artifact_groups),
            });
            for (k, v) in extra.as_object().expect("object") {
                manifest[k] = v.clone();
            }
            planted.graph
        }
    };
    let labeled = LabeledGraph::indexed(graph);
    io::write_graph(&args.output, &labeled, args.format.map(Format::from))?;
    io::write(
        &with_suffix(&args.output, ".manifest.json"),
        &serde_json::to_string_pretty(&manifest).expect("manifest serializes"),
    )?;
    println!(
        "wrote {} ({}x{}, density {:.6})",
        args.output.display(),
        labeled.graph.m(),
        labeled.graph.n(),
        labeled.graph.density()
    );
    Ok(())
}

fn study(args: &StudyArgs) -> Result<(), CliError> {
    let preset = match args.preset {
        PresetArg::Paper => Preset::Paper,
        PresetArg::Desk => Preset::Desk,
    };
    let mut config = StudyConfig::preset(args.id, preset, args.seed).map_err(|e| CliError::Usage(e.to_string()))?;
    if let Some(r) = args.replicates {
        config.replicates = r;
    }
    if let Some(t) = args.trials {
        config.fdsm_trials = t;
    }
    let start = Instant::now();
    let result = match args.id {
        1 => eval::run_study1(&config),
        2 => eval::run_study2(&config),
        3 => eval::run_study3(&config),
        _ => eval::run_study4(&config),
    };
    let elapsed = start.elapsed().as_secs_f64();
    let mut files = Vec::new();
    let (mut rows, mut failed) = (0, 0);
    for table in &result.tables {
        rows += table.rows.len();
        failed += table.failures();
        for (suffix, body) in [("", table.to_csv()), ("_summary", table.summary_csv())] {
            let path = args.output_dir.join(format!("study{}_{}{}.csv", args.id, table.name, suffix));
            io::write(&path, &body)?;
            files.push(path.display().to_string());
        }
    }
    let manifest = json!({
        "study": args.id,
        "preset": format!("{:?}", args.preset).to_lowercase(),
        "config": result.config,
        "rows": rows,
        "failed_rows": failed,
        "elapsed_seconds": elapsed,
        "files": files,
    });
    io::write(
        &args.output_dir.join(format!("study{}_manifest.json", args.id)),
        &serde_json::to_string_pretty(&manifest).expect("manifest serializes"),
    )?;
    println!("study {}: {rows} rows ({failed} failed) in {elapsed:.1}s", args.id);
    if failed > 0 {
        log::warn!("{failed} condition rows failed; see the status column");
    }
    if rows > 0 && failed == rows {
        return Err(CliError::Model(spine::Error::InvalidParameter("every condition failed".into())));
    }
    Ok(())
}
