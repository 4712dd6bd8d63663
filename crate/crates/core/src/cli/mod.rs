//! Command-line front end.
//!
//! Every subcommand builds a [`Report`] that is rendered as JSON (the
//! default) or CSV. Exit codes: 0 success, 2 usage error, 3 data or model
//! infeasibility, 4 I/O error.

pub mod report;

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{ArgGroup, Args, Parser, Subcommand, ValueEnum};

use crate::bounds::{self, BoundResult, MeasurementWindow};
use crate::error::Error;
use crate::ingest::{self, derive, SystemSnapshot};
use crate::model::{self, AlphaEstimate, Looping};
use crate::precision::{self, DualPrecisionMeasurement, SummingModel};
use crate::predict::{self, Order};
use crate::simulator::{self, SimConfig};

pub use report::{Cell, Report, Table};

const EXTRAPOLATION_CAVEAT: &str =
    "extrapolation: predicted from a single snapshot; treat values as optimistic upper estimates";

#[derive(Parser, Debug)]
#[command(
    name = "amdahl-lens",
    version,
    about = "Amdahl-law analysis of parallelized sequential systems"
)]
pub struct Cli {
    /// Output format; inferred from the --out extension when omitted, else json.
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,

    /// Output file (default: standard output).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Effective parallelism from a measured efficiency or speedup.
    Alpha(AlphaArgs),
    /// Limiting-factor lower bounds on the sequential fraction.
    Bounds(BoundsArgs),
    /// Split mixed-precision times into housekeeping and operand parts.
    Decompose(DecomposeArgs),
    /// Run the fork/join timeline simulator.
    Simulate(SimulateArgs),
    /// Efficiency surface, prediction curves, gain ratios, successor validation.
    Predict(PredictArgs),
    /// Read a benchmark snapshot CSV and derive per-record efficiencies.
    Ingest(IngestArgs),
}

#[derive(Args, Debug)]
pub struct AlphaArgs {
    #[arg(long)]
    pub efficiency: Option<f64>,
    #[arg(long)]
    pub rmax: Option<f64>,
    #[arg(long)]
    pub rpeak: Option<f64>,
    #[arg(long)]
    pub speedup: Option<f64>,
    #[arg(long)]
    pub cores: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BoundKindArg {
    All,
    Clock,
    Propagation,
    Addressing,
    Os,
}

#[derive(Args, Debug)]
pub struct BoundsArgs {
    #[arg(long, value_enum, default_value = "all")]
    pub kind: BoundKindArg,
    /// Measurement window length, seconds.
    #[arg(long, default_value_t = 13_298.0)]
    pub duration: f64,
    #[arg(long, default_value_t = 1e9)]
    pub clock_hz: f64,
    /// Cable length for the propagation bound, meters.
    #[arg(long, default_value_t = 100.0)]
    pub distance: f64,
    #[arg(long, default_value_t = 10_000_000)]
    pub cores: u64,
    #[arg(long, default_value_t = 1.0)]
    pub cluster_factor: f64,
    #[arg(long, default_value_t = bounds::CONTEXT_SWITCH_CYCLES)]
    pub context_switch_cycles: u64,
    /// Scale every bound for slower instruction access (1..100).
    #[arg(long)]
    pub access_factor: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModelArg {
    Serial,
    Timeaware,
}

impl From<ModelArg> for SummingModel {
    fn from(m: ModelArg) -> Self {
        match m {
            ModelArg::Serial => SummingModel::Serial,
            ModelArg::Timeaware => SummingModel::TimeAware,
        }
    }
}

#[derive(Args, Debug)]
pub struct DecomposeArgs {
    #[arg(long, value_enum)]
    pub model: ModelArg,
    #[arg(long)]
    pub time16: Option<f64>,
    #[arg(long)]
    pub time64: Option<f64>,
    #[arg(long)]
    pub eff64: Option<f64>,
    #[arg(long)]
    pub eff16: Option<f64>,
    #[arg(long)]
    pub cores: Option<u64>,
    #[arg(long)]
    pub perf_ratio: Option<f64>,
    /// Snapshot CSV; HPL and HPL-AI rows of the same machine and epoch are paired.
    #[arg(long = "in")]
    pub input: Option<PathBuf>,
    #[arg(long, default_value_t = precision::DEFAULT_LENGTH_RATIO)]
    pub length_ratio: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PresetArg {
    Hpl,
    Hpcg,
    Brain,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum LoopingArg {
    Constant,
    Linear,
    Log,
}

fn looping_of(form: LoopingArg, lambda: f64) -> Looping {
    match form {
        LoopingArg::Constant => Looping::Constant,
        LoopingArg::Linear => Looping::LinearInN(lambda),
        LoopingArg::Log => Looping::LogInN(lambda),
    }
}

#[derive(Args, Debug)]
pub struct SimulateArgs {
    /// JSON simulation config; flags override its fields.
    #[arg(long, conflicts_with = "preset")]
    pub config: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub preset: Option<PresetArg>,
    #[arg(long)]
    pub units: Option<u64>,
    #[arg(long)]
    pub dispatch: Option<u64>,
    #[arg(long)]
    pub join: Option<u64>,
    #[arg(long)]
    pub payload: Option<u64>,
    #[arg(long)]
    pub iterations: Option<u64>,
    /// Coordinator cycles between iterations.
    #[arg(long)]
    pub seq: Option<u64>,
    #[arg(long)]
    pub period_floor: Option<u64>,
    #[arg(long, value_enum)]
    pub looping: Option<LoopingArg>,
    #[arg(long)]
    pub lambda: Option<f64>,
    /// Unit counts: a list `2,4,8` or a log grid `LO:HI:POINTS`.
    #[arg(long)]
    pub sweep: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OrderArg {
    First,
    Second,
}

#[derive(Args, Debug)]
#[command(group(
    ArgGroup::new("mode")
        .required(true)
        .args(["surface", "curve", "validate", "gain_ratio"])
))]
pub struct PredictArgs {
    #[arg(long)]
    pub surface: bool,
    #[arg(long)]
    pub curve: bool,
    #[arg(long)]
    pub validate: bool,
    #[arg(long)]
    pub gain_ratio: bool,

    /// Snapshot CSV (curves per record, or stage history for --validate).
    #[arg(long = "in")]
    pub input: Option<PathBuf>,
    #[arg(long)]
    pub one_minus_alpha: Option<f64>,
    #[arg(long)]
    pub efficiency: Option<f64>,
    #[arg(long)]
    pub cores: Option<u64>,
    /// Peak performance of one unit, flop/s.
    #[arg(long)]
    pub p_single: Option<f64>,
    /// Unit counts `LO:HI:POINTS`, log-spaced.
    #[arg(long, default_value = "1:1e9:64")]
    pub n_range: String,
    #[arg(long, value_enum, default_value = "first")]
    pub order: OrderArg,
    #[arg(long, value_enum, default_value = "linear")]
    pub looping: LoopingArg,
    #[arg(long, default_value_t = 0.0)]
    pub lambda: f64,
    /// Add a reference curve limited only by signal propagation over this cable length, meters.
    #[arg(long)]
    pub science_distance: Option<f64>,
    #[arg(long, default_value_t = 13_298.0)]
    pub duration: f64,
    #[arg(long, default_value_t = 1e9)]
    pub clock_hz: f64,

    #[arg(long, default_value = "1:1e9:10")]
    pub n_axis: String,
    #[arg(long, default_value = "1e-10:1e-2:9")]
    pub oma_axis: String,

    #[arg(long)]
    pub hpl_one_minus_alpha: Option<f64>,
    #[arg(long)]
    pub hpcg_one_minus_alpha: Option<f64>,
}

#[derive(Args, Debug)]
pub struct IngestArgs {
    #[arg(long = "in")]
    pub input: PathBuf,
}

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Model(Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::Model(Error::InvalidParameter(_)) => 2,
            CliError::Model(Error::Io(_)) => 4,
            CliError::Model(_) => 3,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage error: {m}"),
            CliError::Model(e) => write!(f, "{e}"),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Model(e)
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

fn read_input(path: &Path) -> CliResult<Vec<u8>> {
    fs::read(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())).into())
}

fn load_snapshots(path: &Path) -> CliResult<(Vec<u8>, Vec<SystemSnapshot>)> {
    let bytes = read_input(path)?;
    let snaps = ingest::parse_snapshots(bytes.as_slice())?;
    Ok((bytes, snaps))
}

fn digest_of(args: &impl std::fmt::Debug, files: &[&[u8]]) -> String {
    let flags = format!("{args:?}");
    let mut parts: Vec<&[u8]> = vec![flags.as_bytes()];
    parts.extend_from_slice(files);
    report::digest(&parts)
}

/// Parses `LO:HI:POINTS`.
fn parse_range(spec: &str) -> CliResult<(f64, f64, usize)> {
    let bad = || usage(format!("range '{spec}' is not LO:HI:POINTS"));
    let parts: Vec<&str> = spec.split(':').collect();
    if parts.len() != 3 {
        return Err(bad());
    }
    let lo: f64 = parts[0].trim().parse().map_err(|_| bad())?;
    let hi: f64 = parts[1].trim().parse().map_err(|_| bad())?;
    let points: usize = parts[2].trim().parse().map_err(|_| bad())?;
    Ok((lo, hi, points))
}

fn parse_count_grid(spec: &str) -> CliResult<Vec<u64>> {
    if spec.contains(':') {
        let (lo, hi, points) = parse_range(spec)?;
        if lo < 1.0 || lo.fract() != 0.0 || hi.fract() != 0.0 {
            return Err(usage(format!(
                "grid bounds in '{spec}' must be whole counts >= 1"
            )));
        }
        Ok(predict::log_grid(lo as u64, hi as u64, points)?)
    } else {
        spec.split(',')
            .map(|s| {
                s.trim()
                    .parse::<u64>()
                    .map_err(|_| usage(format!("'{s}' is not a unit count")))
            })
            .collect()
    }
}

pub fn run(cli: &Cli) -> CliResult<Report> {
    match &cli.command {
        Command::Alpha(a) => cmd_alpha(a),
        Command::Bounds(a) => cmd_bounds(a),
        Command::Decompose(a) => cmd_decompose(a),
        Command::Simulate(a) => cmd_simulate(a),
        Command::Predict(a) => cmd_predict(a),
        Command::Ingest(a) => cmd_ingest(a),
    }
}

pub fn cmd_alpha(args: &AlphaArgs) -> CliResult<Report> {
    let alpha = match (args.efficiency, args.rmax, args.rpeak, args.speedup) {
        (Some(e), None, None, None) => model::alpha_from_efficiency(e, args.cores)?,
        (None, Some(rmax), Some(rpeak), None) => {
            if rpeak.is_nan() || rpeak <= 0.0 {
                return Err(usage("--rpeak must be > 0"));
            }
            model::alpha_from_efficiency(rmax / rpeak, args.cores)?
        }
        (None, None, None, Some(s)) => model::alpha_from_speedup(s, args.cores)?,
        _ => {
            return Err(usage(
                "give exactly one of --efficiency, --rmax with --rpeak, or --speedup",
            ))
        }
    };
    let mut t = Table::new(&[
        "cores",
        "efficiency",
        "speedup",
        "alpha",
        "one_minus_alpha",
        "max_gain",
        "source",
    ]);
    t.push(vec![
        args.cores.into(),
        model::efficiency(&alpha, args.cores).into(),
        model::speedup(&alpha, args.cores).into(),
        alpha.alpha().into(),
        alpha.one_minus_alpha().into(),
        alpha.max_gain().into(),
        format!("{:?}", alpha.source()).into(),
    ]);
    Ok(Report {
        command: "alpha".into(),
        inputs_digest: digest_of(args, &[]),
        results: t,
        warnings: vec![],
    })
}

fn bound_row(label: &str, b: &BoundResult) -> Vec<Cell> {
    vec![
        label.into(),
        b.sequential_cycles.into(),
        b.window.total_cycles().into(),
        b.one_minus_alpha_bound.into(),
        b.max_gain.into(),
    ]
}

pub fn cmd_bounds(args: &BoundsArgs) -> CliResult<Report> {
    let w = MeasurementWindow::new(args.duration, args.clock_hz)?;
    let mut list = Vec::new();
    let want = |k: BoundKindArg| args.kind == BoundKindArg::All || args.kind == k;
    if want(BoundKindArg::Clock) {
        list.push(bounds::clock_quantum_bound(&w));
    }
    if want(BoundKindArg::Propagation) {
        list.push(bounds::propagation_bound(args.distance, &w)?);
    }
    if want(BoundKindArg::Addressing) {
        list.push(bounds::addressing_bound(
            args.cores,
            args.cluster_factor,
            &w,
        )?);
    }
    if want(BoundKindArg::Os) {
        list.push(bounds::os_bound(args.context_switch_cycles, &w));
    }

    let mut t = Table::new(&[
        "kind",
        "sequential_cycles",
        "total_cycles",
        "one_minus_alpha_bound",
        "max_gain",
    ]);
    let mut scaled = Vec::new();
    for original in &list {
        let b = match args.access_factor {
            Some(f) => bounds::access_scaling(original, f)?,
            None => *original,
        };
        // Scaling relabels the kind; keep the original name in the row.
        let label = list_label(original, args.access_factor.is_some());
        t.push(bound_row(&label, &b));
        scaled.push(b);
    }
    let mut warnings = Vec::new();
    if args.kind == BoundKindArg::All && args.access_factor.is_none() {
        let set = bounds::contributions_from_bounds(&scaled)?;
        let cycles: u64 = scaled.iter().map(|b| b.sequential_cycles).sum();
        let total = set.total_one_minus_alpha();
        t.push(vec![
            "combined".into(),
            cycles.into(),
            w.total_cycles().into(),
            total.into(),
            (1.0 / total).into(),
        ]);
        warnings.push(
            "combined row adds all bounds as if they acted together; each bound alone assumes it dominates"
                .into(),
        );
    }
    Ok(Report {
        command: "bounds".into(),
        inputs_digest: digest_of(args, &[]),
        results: t,
        warnings,
    })
}

fn list_label(b: &BoundResult, scaled: bool) -> String {
    if scaled {
        format!("{}_scaled", b.kind.as_str())
    } else {
        b.kind.as_str().to_string()
    }
}

const DECOMPOSE_COLUMNS: [&str; 14] = [
    "name",
    "epoch",
    "model",
    "cores",
    "eff64",
    "eff16",
    "perf_ratio",
    "one_minus_alpha64",
    "one_minus_alpha16",
    "time64",
    "time16",
    "f16",
    "f0",
    "implied_time_ratio",
];

fn decompose_row(
    name: Option<String>,
    epoch: Option<String>,
    m: Option<&DualPrecisionMeasurement>,
    oma: (Option<f64>, Option<f64>),
    d: &precision::DecompositionResult,
) -> Vec<Cell> {
    vec![
        name.into(),
        epoch.into(),
        d.model.as_str().into(),
        m.map(|m| m.n).into(),
        m.map(|m| m.eff64).into(),
        m.map(|m| m.eff16).into(),
        m.map(|m| m.perf_ratio).into(),
        oma.0.into(),
        oma.1.into(),
        d.time64.into(),
        d.time16.into(),
        d.f16.into(),
        d.f0.into(),
        precision::expected_perf_ratio(d).into(),
    ]
}

pub fn cmd_decompose(args: &DecomposeArgs) -> CliResult<Report> {
    let model: SummingModel = args.model.into();
    let k = args.length_ratio;
    let mut t = Table::new(&DECOMPOSE_COLUMNS);
    let mut warnings = Vec::new();
    let mut files = Vec::new();

    let times_given = args.time16.is_some() || args.time64.is_some();
    let effs_given = args.eff64.is_some()
        || args.eff16.is_some()
        || args.cores.is_some()
        || args.perf_ratio.is_some();
    match (times_given, effs_given, &args.input) {
        (true, false, None) => {
            let (Some(t16), Some(t64)) = (args.time16, args.time64) else {
                return Err(usage("--time16 and --time64 go together"));
            };
            let d = precision::decompose(model, t16, t64, k)?;
            t.push(decompose_row(None, None, None, (None, None), &d));
        }
        (false, true, None) => {
            let (Some(e64), Some(e16), Some(n), Some(r)) =
                (args.eff64, args.eff16, args.cores, args.perf_ratio)
            else {
                return Err(usage(
                    "--eff64, --eff16, --cores and --perf-ratio go together",
                ));
            };
            let m = DualPrecisionMeasurement::with_length_ratio(e64, e16, n, r, k)?;
            let times = precision::times_from_measurement(&m)?;
            let d = precision::decompose(model, times.time16, times.time64, k)?;
            t.push(decompose_row(
                None,
                None,
                Some(&m),
                (Some(times.one_minus_alpha64), Some(times.one_minus_alpha16)),
                &d,
            ));
        }
        (false, false, Some(path)) => {
            let (bytes, snaps) = load_snapshots(path)?;
            files.push(bytes);
            let pairing = ingest::pair_workloads(&snaps);
            warnings.extend(pairing.unmatched.iter().cloned());
            for p in &pairing.pairs {
                let res = precision::times_from_measurement(&p.measurement).and_then(|times| {
                    precision::decompose(model, times.time16, times.time64, k).map(|d| (times, d))
                });
                match res {
                    Ok((times, d)) => t.push(decompose_row(
                        Some(p.name.clone()),
                        Some(p.epoch.to_string()),
                        Some(&p.measurement),
                        (Some(times.one_minus_alpha64), Some(times.one_minus_alpha16)),
                        &d,
                    )),
                    Err(e) => warnings.push(format!("{} {}: {e}", p.name, p.epoch)),
                }
            }
        }
        _ => {
            return Err(usage(
                "give one input: --time16/--time64, --eff64/--eff16/--cores/--perf-ratio, or --in",
            ))
        }
    }
    let file_refs: Vec<&[u8]> = files.iter().map(Vec::as_slice).collect();
    Ok(Report {
        command: "decompose".into(),
        inputs_digest: digest_of(args, &file_refs),
        results: t,
        warnings,
    })
}

fn sim_config(args: &SimulateArgs) -> CliResult<(SimConfig, Vec<u8>)> {
    let (mut cfg, bytes) = if let Some(path) = &args.config {
        let bytes = read_input(path)?;
        let cfg: SimConfig = serde_json::from_slice(&bytes).map_err(|e| Error::Parse {
            line: e.line() as u64,
            column: e.column().to_string(),
            message: e.to_string(),
        })?;
        (cfg, bytes)
    } else if let Some(p) = args.preset {
        let cfg = match p {
            PresetArg::Hpl => simulator::hpl_preset(),
            PresetArg::Hpcg => simulator::hpcg_preset(),
            PresetArg::Brain => simulator::brain_preset(),
        };
        (cfg, Vec::new())
    } else {
        let payload = args
            .payload
            .ok_or_else(|| usage("--payload is required without --config or --preset"))?;
        (SimConfig::fork_join(1, 0, 0, payload), Vec::new())
    };
    if let Some(v) = args.units {
        cfg.n = v;
    }
    if let Some(v) = args.dispatch {
        cfg.dispatch_cycles = v;
    }
    if let Some(v) = args.join {
        cfg.join_cycles = v;
    }
    if let Some(v) = args.payload {
        cfg.payload_cycles = v;
    }
    if let Some(v) = args.iterations {
        cfg.iterations = v;
    }
    if let Some(v) = args.seq {
        cfg.per_iteration_seq_cycles = v;
    }
    if let Some(v) = args.period_floor {
        cfg.period_floor_cycles = (v > 0).then_some(v);
    }
    match (args.looping, args.lambda) {
        (Some(form), lambda) => cfg.looping = looping_of(form, lambda.unwrap_or(0.0)),
        (None, Some(_)) => return Err(usage("--lambda needs --looping")),
        (None, None) => {}
    }
    Ok((cfg, bytes))
}

pub fn cmd_simulate(args: &SimulateArgs) -> CliResult<Report> {
    let (cfg, bytes) = sim_config(args)?;
    let runs = match &args.sweep {
        Some(spec) => simulator::sweep_n(&cfg, &parse_count_grid(spec)?)?,
        None => vec![(cfg.n, simulator::simulate(&cfg)?)],
    };
    let mut t = Table::new(&[
        "n",
        "total_cycles",
        "speedup",
        "alpha_eff",
        "one_minus_alpha_eff",
        "payload_rate",
        "payload_fraction",
        "overhead_fraction",
        "idle_fraction",
    ]);
    let mut warnings = Vec::new();
    for (n, o) in &runs {
        if o.alpha_eff.is_none() {
            warnings.push(format!("n={n}: alpha_eff undefined (degenerate run)"));
        }
        t.push(vec![
            (*n).into(),
            o.total_cycles.into(),
            o.speedup.into(),
            o.alpha_eff.map(|a| a.alpha()).into(),
            o.one_minus_alpha_eff().into(),
            o.payload_rate().into(),
            o.payload_fraction.into(),
            o.overhead_fraction.into(),
            o.idle_fraction.into(),
        ]);
    }
    Ok(Report {
        command: "simulate".into(),
        inputs_digest: digest_of(args, &[&bytes]),
        results: t,
        warnings,
    })
}

pub fn cmd_predict(args: &PredictArgs) -> CliResult<Report> {
    if args.surface {
        predict_surface(args)
    } else if args.curve {
        predict_curve(args)
    } else if args.validate {
        predict_validate(args)
    } else {
        predict_gain_ratio(args)
    }
}

fn predict_surface(args: &PredictArgs) -> CliResult<Report> {
    let n_axis = parse_count_grid(&args.n_axis)?;
    let (lo, hi, points) = parse_range(&args.oma_axis)?;
    let oma_axis = predict::log_space(lo, hi, points)?;
    let grid = predict::surface(&n_axis, &oma_axis)?;
    let mut t = Table::new(&["n", "one_minus_alpha", "efficiency"]);
    for (i, oma) in grid.one_minus_alpha_axis.iter().enumerate() {
        for (j, n) in grid.n_axis.iter().enumerate() {
            t.push(vec![(*n).into(), (*oma).into(), grid.values[i][j].into()]);
        }
    }
    Ok(Report {
        command: "predict".into(),
        inputs_digest: digest_of(args, &[]),
        results: t,
        warnings: vec![],
    })
}

fn predict_curve(args: &PredictArgs) -> CliResult<Report> {
    let n_values = parse_count_grid(&args.n_range)?;
    let order = match args.order {
        OrderArg::First => Order::FirstOrder,
        OrderArg::Second => Order::SecondOrder(looping_of(args.looping, args.lambda)),
    };

    // (label, alpha, p_single)
    let mut bases: Vec<(String, AlphaEstimate, f64)> = Vec::new();
    let mut warnings = vec![EXTRAPOLATION_CAVEAT.to_string()];
    let mut files = Vec::new();

    if let Some(path) = &args.input {
        let (bytes, snaps) = load_snapshots(path)?;
        files.push(bytes);
        for s in &snaps {
            let d = derive(s);
            let label = format!("{} {} {}", s.name, s.epoch, s.workload);
            match d.alpha {
                Some(a) => bases.push((label, a, s.p_single())),
                None => warnings.push(format!(
                    "{label}: skipped, {}",
                    d.note.unwrap_or_else(|| "no alpha".into())
                )),
            }
        }
    }
    let direct = match (args.one_minus_alpha, args.efficiency, args.cores) {
        (Some(x), None, None) => Some(AlphaEstimate::assumed(x)?),
        (None, Some(e), Some(n)) => Some(model::alpha_from_efficiency(e, n)?),
        (None, None, None) => None,
        _ => {
            return Err(usage(
                "give --one-minus-alpha, or --efficiency with --cores, not both",
            ))
        }
    };
    if let Some(a) = direct {
        let p = args
            .p_single
            .ok_or_else(|| usage("--p-single is required with a direct alpha"))?;
        bases.push(("input".into(), a, p));
    }
    if let Some(distance) = args.science_distance {
        let p = args
            .p_single
            .ok_or_else(|| usage("--p-single is required with --science-distance"))?;
        let w = MeasurementWindow::new(args.duration, args.clock_hz)?;
        let b = bounds::propagation_bound(distance, &w)?;
        bases.push(("science".into(), b.as_alpha()?, p));
    }
    if bases.is_empty() {
        return Err(usage(
            "--curve needs --in, --one-minus-alpha, --efficiency/--cores or --science-distance",
        ));
    }

    let mut t = Table::new(&[
        "label",
        "n",
        "nominal",
        "payload",
        "efficiency",
        "saturation",
    ]);
    for (label, alpha, p) in &bases {
        let c = predict::curve(alpha, *p, &n_values, order)?;
        let sat = c.saturation();
        for pt in &c.points {
            t.push(vec![
                label.clone().into(),
                pt.n.into(),
                pt.nominal.into(),
                pt.payload.into(),
                pt.efficiency.into(),
                sat.into(),
            ]);
        }
        if let Order::SecondOrder(_) = order {
            if let Some(k) = c.peak_index() {
                let pk = &c.points[k];
                warnings.push(format!(
                    "{label}: payload peaks at n={} ({} flop/s)",
                    pk.n,
                    report::format_number(pk.payload)
                ));
            }
        }
    }
    let file_refs: Vec<&[u8]> = files.iter().map(Vec::as_slice).collect();
    Ok(Report {
        command: "predict".into(),
        inputs_digest: digest_of(args, &file_refs),
        results: t,
        warnings,
    })
}

fn predict_validate(args: &PredictArgs) -> CliResult<Report> {
    let path = args
        .input
        .as_ref()
        .ok_or_else(|| usage("--validate needs --in with a stage history"))?;
    let (bytes, snaps) = load_snapshots(path)?;

    let mut lineages: BTreeMap<(String, String), Vec<&SystemSnapshot>> = BTreeMap::new();
    for s in &snaps {
        lineages
            .entry((s.name.clone(), s.workload.to_string()))
            .or_default()
            .push(s);
    }
    let mut t = Table::new(&[
        "name",
        "workload",
        "prior_epoch",
        "later_epoch",
        "later_cores",
        "predicted_rmax",
        "measured_rmax",
        "relative_error",
        "predicted_efficiency",
        "measured_efficiency",
    ]);
    let mut warnings = vec![EXTRAPOLATION_CAVEAT.to_string()];
    for ((name, workload), mut stages) in lineages {
        stages.sort_by_key(|s| s.epoch);
        for pair in stages.windows(2) {
            let (prior, later) = (pair[0], pair[1]);
            match predict::validate_successor(&derive(prior), later) {
                Ok(r) => {
                    for w in &r.warnings {
                        warnings.push(format!("{name} {workload} {}: {w}", later.epoch));
                    }
                    t.push(vec![
                        name.clone().into(),
                        workload.clone().into(),
                        prior.epoch.to_string().into(),
                        later.epoch.to_string().into(),
                        later.cores_used.into(),
                        r.predicted_payload.into(),
                        r.measured_payload.into(),
                        r.relative_error.into(),
                        r.predicted_efficiency.into(),
                        r.measured_efficiency.into(),
                    ]);
                }
                Err(e) => warnings.push(format!("{name} {workload} {}: {e}", later.epoch)),
            }
        }
    }
    Ok(Report {
        command: "predict".into(),
        inputs_digest: digest_of(args, &[&bytes]),
        results: t,
        warnings,
    })
}

fn predict_gain_ratio(args: &PredictArgs) -> CliResult<Report> {
    let (Some(hpl), Some(hpcg), Some(n)) = (
        args.hpl_one_minus_alpha,
        args.hpcg_one_minus_alpha,
        args.cores,
    ) else {
        return Err(usage(
            "--gain-ratio needs --hpl-one-minus-alpha, --hpcg-one-minus-alpha and --cores",
        ));
    };
    let a_hpl = AlphaEstimate::assumed(hpl)?;
    let a_hpcg = AlphaEstimate::assumed(hpcg)?;
    let ratio = predict::gain_ratio(&a_hpl, &a_hpcg, n);
    let mut t = Table::new(&[
        "cores",
        "efficiency_hpl",
        "efficiency_hpcg",
        "ratio",
        "within_published_band",
    ]);
    t.push(vec![
        n.into(),
        model::efficiency(&a_hpl, n).into(),
        model::efficiency(&a_hpcg, n).into(),
        ratio.into(),
        predict::within_published_band(ratio).into(),
    ]);
    Ok(Report {
        command: "predict".into(),
        inputs_digest: digest_of(args, &[]),
        results: t,
        warnings: vec![],
    })
}

pub fn cmd_ingest(args: &IngestArgs) -> CliResult<Report> {
    let (bytes, snaps) = load_snapshots(&args.input)?;
    let mut t = Table::new(&[
        "name",
        "epoch",
        "workload",
        "cores_total",
        "cores_used",
        "rpeak_flops",
        "rmax_flops",
        "clock_hz",
        "perf_ratio",
        "efficiency",
        "one_minus_alpha",
        "corrected_efficiency",
    ]);
    let mut warnings = Vec::new();
    for s in &snaps {
        let d = derive(s);
        if let Some(note) = &d.note {
            warnings.push(format!("{} {} {}: {note}", s.name, s.epoch, s.workload));
        }
        t.push(vec![
            s.name.clone().into(),
            s.epoch.to_string().into(),
            s.workload.to_string().into(),
            s.cores_total.into(),
            s.cores_used.into(),
            s.r_peak.into(),
            s.r_max.into(),
            s.clock_hz.into(),
            s.perf_ratio.into(),
            d.efficiency.into(),
            d.alpha.map(|a| a.one_minus_alpha()).into(),
            d.corrected_efficiency.into(),
        ]);
    }
    Ok(Report {
        command: "ingest".into(),
        inputs_digest: digest_of(args, &[&bytes]),
        results: t,
        warnings,
    })
}

fn output_format(cli: &Cli) -> Format {
    cli.format.unwrap_or_else(|| match &cli.out {
        Some(p) if p.extension().is_some_and(|e| e.eq_ignore_ascii_case("csv")) => Format::Csv,
        _ => Format::Json,
    })
}

/// Parses `args`, runs the command and writes the rendered report.
/// Returns the process exit code.
pub fn main_with_args<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = e.exit_code();
            let text = e.render().to_string();
            let _ = if e.use_stderr() {
                stderr.write_all(text.as_bytes())
            } else {
                stdout.write_all(text.as_bytes())
            };
            return code;
        }
    };
    let report = match run(&cli) {
        Ok(r) => r,
        Err(e) => {
            let _ = writeln!(stderr, "amdahl-lens: {e}");
            return e.exit_code();
        }
    };
    let format = output_format(&cli);
    let text = match format {
        Format::Json => report.to_json(),
        Format::Csv => {
            for w in &report.warnings {
                let _ = writeln!(stderr, "warning: {w}");
            }
            report.to_csv()
        }
    };
    let written = match &cli.out {
        Some(path) => {
            fs::write(path, text.as_bytes()).map_err(|e| format!("{}: {e}", path.display()))
        }
        None => stdout.write_all(text.as_bytes()).map_err(|e| e.to_string()),
    };
    match written {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(stderr, "amdahl-lens: i/o error: {e}");
            4
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_args(args: &[&str]) -> (i32, String, String) {
        let mut out = Vec::new();
        let mut err = Vec::new();
        let code = main_with_args(
            std::iter::once("amdahl-lens").chain(args.iter().copied()),
            &mut out,
            &mut err,
        );
        (
            code,
            String::from_utf8(out).unwrap(),
            String::from_utf8(err).unwrap(),
        )
    }

    #[test]
    fn alpha_flag_combinations() {
        let (code, out, _) = run_args(&["alpha", "--efficiency", "1", "--cores", "100"]);
        assert_eq!(code, 0);
        let v: serde_json::Value = serde_json::from_str(&out).unwrap();
        assert_eq!(v["results"][0]["alpha"], 1.0);

        let (code, _, _) = run_args(&[
            "alpha",
            "--efficiency",
            "0.5",
            "--rmax",
            "1",
            "--cores",
            "100",
        ]);
        assert_eq!(code, 2);
        let (code, _, _) = run_args(&["alpha", "--cores", "100"]);
        assert_eq!(code, 2);
        let (code, _, _) = run_args(&["alpha", "--efficiency", "0.001", "--cores", "100"]);
        assert_eq!(code, 3);
        let (code, _, _) = run_args(&["alpha", "--efficiency", "0.5"]);
        assert_eq!(code, 2);
    }

    #[test]
    fn missing_file_is_io_error() {
        let (code, _, err) = run_args(&["ingest", "--in", "/nonexistent/x.csv"]);
        assert_eq!(code, 4, "{err}");
    }

    #[test]
    fn predict_needs_a_mode() {
        let (code, _, _) = run_args(&["predict"]);
        assert_eq!(code, 2);
        let (code, _, _) = run_args(&["predict", "--surface", "--curve"]);
        assert_eq!(code, 2);
    }

    #[test]
    fn csv_format_from_flag() {
        let (code, out, _) = run_args(&[
            "--format",
            "csv",
            "bounds",
            "--kind",
            "clock",
            "--duration",
            "1",
        ]);
        assert_eq!(code, 0);
        assert_eq!(
            out,
            "kind,sequential_cycles,total_cycles,one_minus_alpha_bound,max_gain\nclock_quantum,2,1e9,2e-9,5e8\n"
        );
    }

    #[test]
    fn ranges() {
        assert_eq!(parse_count_grid("2,4, 8").unwrap(), vec![2, 4, 8]);
        assert_eq!(
            parse_count_grid("1:1000:4").unwrap(),
            vec![1, 10, 100, 1000]
        );
        assert!(parse_count_grid("1:x:4").is_err());
        assert!(parse_count_grid("0.5:10:4").is_err());
        assert!(parse_range("1:2").is_err());
    }
}
