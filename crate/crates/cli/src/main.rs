use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Map, Value};

use lptransport::besov::{norm, BesovParams, Flavor};
use lptransport::experiments::{emit, run, ExperimentConfig, ExperimentKind, OutputFormat};
use lptransport::fields::InitialCondition;
use lptransport::solver::{parse_diagnostics, solve, ObserverSet, SolverConfig, VelocityModel};
use lptransport::spectral::{forward_transform, inverse_transform, snapshot};
use lptransport::transport::{kr_distance, KrOptions, Method};
use lptransport::{LPFamily, PhysicalField, TorusGrid};

#[derive(Parser)]
#[command(name = "lpt", version, about = "Littlewood-Paley analysis and passive-scalar transport on the torus")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Littlewood-Paley tools.
    Lp {
        #[command(subcommand)]
        command: LpCommand,
    },
    /// Logarithmic Besov norms of a field snapshot.
    Norms(NormsArgs),
    /// Integrates the advection(-diffusion) equation and writes diagnostics.
    Solve(SolveArgs),
    /// Kantorovich-Rubinstein distance with logarithmic cost between two fields.
    Otdist(OtArgs),
    /// Inviscid Besov regularity experiment.
    Regularity(ExperimentArgs),
    /// Diffusive Besov regularity experiment.
    Diffusive(ExperimentArgs),
    /// Vanishing-diffusivity rate sweep.
    Zerodiff(ExperimentArgs),
    /// Mixing-rate experiment.
    Mixing(ExperimentArgs),
}

#[derive(Subcommand)]
enum LpCommand {
    /// Writes every dyadic block as a snapshot plus a JSON manifest of block energies.
    Decompose {
        #[arg(long)]
        input: PathBuf,
        /// Exponent of the weighted energies `k^{2a}‖θ_k‖²` in the manifest.
        #[arg(long, default_value_t = 1.0)]
        a: f64,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Args)]
struct NormsArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    a: f64,
    #[arg(long, value_delimiter = ',', default_value = "block,highpass,logsum")]
    flavors: Vec<Flavor>,
    /// Writes the report here instead of stdout.
    #[arg(long)]
    json: Option<PathBuf>,
}

#[derive(Args)]
struct SolveArgs {
    /// Velocity model, e.g. `alternating_shear:period=2`.
    #[arg(long)]
    model: VelocityModel,
    #[arg(long, default_value_t = 0.0)]
    kappa: f64,
    /// Grid size; taken from the snapshot when `--ic` is a file.
    #[arg(long)]
    n: Option<usize>,
    #[arg(long, default_value_t = 2)]
    dim: usize,
    #[arg(long)]
    dt: f64,
    #[arg(long)]
    tend: f64,
    /// A snapshot file or a preset such as `harmonic:4` or `random:7,kmax=12`.
    #[arg(long)]
    ic: String,
    #[arg(long, default_value = "l2,linf")]
    observe: String,
    /// Number of sampling intervals in `[0, tend]`.
    #[arg(long, default_value_t = 50)]
    samples: usize,
    /// Writes the time series here instead of stdout.
    #[arg(long)]
    csv: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum OtMethodArg {
    Exact,
    Entropic,
}

#[derive(Args)]
struct OtArgs {
    #[arg(long)]
    a: PathBuf,
    #[arg(long)]
    b: PathBuf,
    #[arg(long)]
    delta: f64,
    #[arg(long, value_enum, default_value = "exact")]
    method: OtMethodArg,
    /// Entropic regularisation.
    #[arg(long, default_value_t = 0.05)]
    epsilon: f64,
    /// Coarsen supports above this size; 0 disables coarsening.
    #[arg(long, default_value_t = 2048)]
    max_support: usize,
    #[arg(long)]
    json: Option<PathBuf>,
}

#[derive(Args)]
struct ExperimentArgs {
    /// TOML file holding every field of the experiment configuration.
    #[arg(long)]
    config: PathBuf,
    /// Overrides `output.csv` of the config.
    #[arg(long)]
    csv: Option<PathBuf>,
    /// Overrides `output.json` of the config.
    #[arg(long)]
    json: Option<PathBuf>,
}

fn main() -> Result<()> {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match Cli::parse().command {
        Command::Lp { command: LpCommand::Decompose { input, a, out } } => decompose(&input, a, &out),
        Command::Norms(args) => norms(args),
        Command::Solve(args) => solve_cmd(args),
        Command::Otdist(args) => otdist(args),
        Command::Regularity(args) => experiment(ExperimentKind::Regularity, args),
        Command::Diffusive(args) => experiment(ExperimentKind::Diffusive, args),
        Command::Zerodiff(args) => experiment(ExperimentKind::Zerodiff, args),
        Command::Mixing(args) => experiment(ExperimentKind::Mixing, args),
    }
}

fn read_field(path: &Path) -> Result<PhysicalField> {
    snapshot::read(path).with_context(|| format!("reading snapshot {}", path.display()))
}

fn write_json(value: &Value, path: Option<&Path>) -> Result<()> {
    let text = serde_json::to_string_pretty(value)?;
    match path {
        Some(p) => fs::write(p, text + "\n").with_context(|| format!("writing {}", p.display())),
        None => {
            println!("{text}");
            Ok(())
        }
    }
}

fn decompose(input: &Path, a: f64, out: &Path) -> Result<()> {
    let field = read_field(input)?;
    let fam = LPFamily::standard(field.grid());
    let blocks = fam.decompose(&forward_transform(&field))?;
    fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
    let mut entries = Vec::new();
    for (i, block) in blocks.blocks().iter().enumerate() {
        let k = i + 1;
        let file = format!("block_{k:02}.lptf");
        // Roundoff-level blocks are not Hermitian to relative precision.
        snapshot::write(out.join(&file), &inverse_transform(&block.hermitian_part())?)?;
        let energy = block.l2_norm_squared();
        entries.push(json!({ "k": k, "file": file, "energy": energy, "weighted_energy": (k as f64).powf(2.0 * a) * energy }));
    }
    let grid = field.grid();
    let manifest = json!({
        "input": input.display().to_string(),
        "dim": grid.dim(),
        "n": grid.n(),
        "k_max": fam.k_max(),
        "a": a,
        "generator": fam.generator().name(),
        "blocks": entries,
    });
    write_json(&manifest, Some(&out.join("manifest.json")))
}

fn norms(args: NormsArgs) -> Result<()> {
    let field = read_field(&args.input)?;
    let fam = LPFamily::standard(field.grid());
    let spec = forward_transform(&field);
    let mut out = Map::new();
    for flavor in args.flavors {
        let r = norm(&fam, &spec, BesovParams::new(args.a, flavor)?)?;
        out.insert(flavor.name().into(), json!({ "value": r.value, "tail": r.tail, "per_k": r.per_k }));
    }
    let report = json!({ "input": args.input.display().to_string(), "a": args.a, "norms": out });
    write_json(&report, args.json.as_deref())
}

fn solve_cmd(args: SolveArgs) -> Result<()> {
    let path = Path::new(&args.ic);
    let theta0 = if path.is_file() {
        let f = read_field(path)?;
        if let Some(n) = args.n {
            if n != f.grid().n() {
                bail!("--n {n} disagrees with the snapshot grid n = {}", f.grid().n());
            }
        }
        f
    } else {
        let ic: InitialCondition = args.ic.parse()?;
        ic.sample(TorusGrid::new(args.dim, args.n.unwrap_or(128))?)?
    };
    let config = SolverConfig::new(theta0.grid(), args.kappa, args.dt)?;
    let observers = ObserverSet::uniform(args.tend, args.samples, parse_diagnostics(&args.observe)?)?;
    let series = solve(&config, &args.model, &theta0, args.tend, &observers)?;
    let csv = series.to_csv()?;
    match &args.csv {
        Some(p) => fs::write(p, csv).with_context(|| format!("writing {}", p.display()))?,
        None => print!("{csv}"),
    }
    let c = &series.conservation;
    log::info!(
        "mean {:e}, L2 drift {:e}, Linf growth {:e}, energy balance {:e}",
        c.mean_max,
        c.l2_drift,
        c.linf_growth,
        c.energy_balance
    );
    Ok(())
}

fn otdist(args: OtArgs) -> Result<()> {
    let (a, b) = (read_field(&args.a)?, read_field(&args.b)?);
    let method = match args.method {
        OtMethodArg::Exact => Method::Exact,
        OtMethodArg::Entropic => Method::Entropic { epsilon: args.epsilon },
    };
    let opts = KrOptions { method, max_support: (args.max_support > 0).then_some(args.max_support) };
    let r = kr_distance(&a, &b, args.delta, opts)?;
    write_json(&serde_json::to_value(&r)?, args.json.as_deref())
}

fn experiment(kind: ExperimentKind, args: ExperimentArgs) -> Result<()> {
    let config = ExperimentConfig::load(&args.config)?;
    if config.kind != kind {
        bail!("{} holds a `{}` experiment, not `{}`", args.config.display(), config.kind.name(), kind.name());
    }
    let report = run(&config)?;
    let csv = args.csv.or_else(|| config.output.csv.clone());
    let json_path = args.json.or_else(|| config.output.json.clone());
    if let Some(p) = &csv {
        emit(&report, OutputFormat::Csv, p)?;
    }
    if let Some(p) = &json_path {
        emit(&report, OutputFormat::Json, p)?;
    }
    let summary = json!({
        "kind": kind.name(),
        "summary": report.summary,
        "flags": report.flags,
        "rows": report.records.len(),
    });
    write_json(&summary, None)
}
