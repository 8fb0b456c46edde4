//! The `gfq` command line: classify, approx, estimate, constants, simulate, study.
//!
//! Every key of the JSON config (`--config`) has a flag; flags override the file.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};
use gfq_core::asympt::Target;
use gfq_core::constants::{limiting_process, ConstantKind, ConstantQuery, LimitProcessSpec};
use gfq_core::regimes::{horizon_value, HorizonFamily};
use gfq_core::{classify, QueueSpec};
use serde::{Deserialize, Serialize};

use crate::config::{parse_horizon, queue_spec, ModelConfig, QueueConfig};
use crate::constants::{estimate_query, ConstantCache, McSettings, PickandsMode, DEFAULT_BUDGET};
use crate::error::{Error, Result};
use crate::estimate::{estimate_pair, McRun};
use crate::export::{na, render, Format, Row};
use crate::harness::{
    asymptotic_with_cache, convergence_study, lemma_limit_sweep, stationarity_study, ConstantsConfig,
    McConfig, OutputConfig, StudyConfig,
};
use crate::rng::with_threads;
use crate::simulate::{generate_fgn, workload_path, SamplePath};

#[derive(Parser, Debug)]
#[command(name = "gfq", version, about = "Transient Gaussian fluid-queue overload asymptotics")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Regime classification of (model, queue, horizon family).
    Classify(Flags),
    /// Asymptotic approximations at the given levels.
    Approx(Flags),
    /// Monte Carlo estimates of the overload probabilities.
    Estimate(Flags),
    /// Monte Carlo estimate of a Pickands or Piterbarg constant.
    Constants(Flags),
    /// One sample path with its workload.
    Simulate(Flags),
    /// Convergence, stationarity or geometry study.
    Study(Flags),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
enum KindName {
    Pickands,
    Piterbarg,
    PiterbargA,
    PiterbargTilde,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
enum StudyKind {
    #[default]
    Convergence,
    Stationarity,
    Lemma,
}

#[derive(clap::Args, Debug, Default)]
struct Flags {
    /// JSON config file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Input model, e.g. fbm:0.75 or fbm:0.5,2.
    #[arg(long)]
    model: Option<String>,
    /// Service rate.
    #[arg(long)]
    c: Option<f64>,
    /// Initial backlog.
    #[arg(long)]
    x: Option<f64>,
    /// Horizon family: fixed:T, power:kappa,rho, offset:delta,beta, exp:C[,exponent].
    #[arg(long)]
    horizon: Option<String>,
    /// Level(s), comma separated.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    u: Option<Vec<f64>>,
    /// Explicit horizon; overrides the family for estimate/simulate.
    #[arg(long = "T")]
    t: Option<f64>,
    /// point, sup (comma separated).
    #[arg(long, value_delimiter = ',', value_parser = parse_target)]
    target: Option<Vec<Target>>,
    /// Monte Carlo replications (accepts 1e6).
    #[arg(long, value_parser = parse_count)]
    reps: Option<u64>,
    /// Grid steps on [0, T].
    #[arg(long, value_parser = parse_count)]
    grid: Option<u64>,
    #[arg(long)]
    seed: Option<u64>,
    /// Path-point budget.
    #[arg(long, value_parser = parse_count)]
    budget: Option<u64>,
    /// Constant to estimate.
    #[arg(long, value_enum)]
    kind: Option<KindName>,
    /// Base process of the constant, e.g. fbm:0.5; defaults to the queue's limiting process.
    #[arg(long)]
    base: Option<String>,
    /// Linear drift of a Piterbarg functional.
    #[arg(long)]
    d: Option<f64>,
    /// Floor of a Piterbarg functional.
    #[arg(long, allow_negative_numbers = true)]
    a: Option<f64>,
    /// Horizon S of a constant.
    #[arg(long = "S")]
    s: Option<f64>,
    /// Grid step of a constant.
    #[arg(long)]
    step: Option<f64>,
    /// Replications for constants needed by approx/study (accepts 1e5).
    #[arg(long, value_parser = parse_count)]
    const_reps: Option<u64>,
    #[arg(long)]
    const_seed: Option<u64>,
    #[arg(long, value_enum)]
    mode: Option<ModeName>,
    #[arg(long, value_enum)]
    study: Option<StudyKind>,
    /// Stationarity study with the numeric (Brownian) reference.
    #[arg(long)]
    numeric: Option<bool>,
    /// Worker threads (also GFQ_THREADS).
    #[arg(long)]
    threads: Option<usize>,
    #[arg(long, value_parser = parse_format)]
    format: Option<Format>,
    /// Shorthand for --format json.
    #[arg(long)]
    json: bool,
    /// Write to this file instead of stdout.
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
enum ModeName {
    ShiftAverage,
    Direct,
}

fn parse_count(s: &str) -> std::result::Result<u64, String> {
    let v: f64 = s.parse().map_err(|_| format!("not a number: {s}"))?;
    if v >= 0.0 && v.fract() == 0.0 && v < 1.8e19 {
        Ok(v as u64)
    } else {
        Err(format!("expected a nonnegative integer, got {s}"))
    }
}

fn parse_target(s: &str) -> std::result::Result<Target, String> {
    match s {
        "point" => Ok(Target::Point),
        "sup" => Ok(Target::Sup),
        _ => Err(format!("target must be point or sup, got {s}")),
    }
}

fn parse_format(s: &str) -> std::result::Result<Format, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct McBlock {
    reps: Option<f64>,
    grid: Option<f64>,
    seed: Option<u64>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConstantsBlock {
    kind: Option<KindName>,
    base: Option<ModelConfig>,
    d: Option<f64>,
    a: Option<f64>,
    #[serde(rename = "S")]
    horizon: Option<f64>,
    step: Option<f64>,
    reps: Option<f64>,
    seed: Option<u64>,
    mode: Option<PickandsMode>,
}

/// Schema of `--config` files.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct CliConfig {
    model: Option<ModelConfig>,
    queue: Option<QueueConfig>,
    horizon: Option<HorizonFamily>,
    u: Option<f64>,
    u_grid: Option<Vec<f64>>,
    #[serde(rename = "T")]
    t: Option<f64>,
    targets: Option<Vec<Target>>,
    mc: Option<McBlock>,
    constants: Option<ConstantsBlock>,
    seed: Option<u64>,
    budget: Option<f64>,
    study: Option<StudyKind>,
    numeric: Option<bool>,
    threads: Option<usize>,
    output: Option<OutputConfig>,
}

fn count(v: Option<f64>, what: &str) -> Result<Option<u64>> {
    v.map(|x| parse_count(&x.to_string()).map_err(|e| Error::Config(format!("{what}: {e}"))))
        .transpose()
}

/// Flags merged over the config file.
struct Settings {
    model: Option<ModelConfig>,
    queue: QueueConfig,
    horizon: Option<HorizonFamily>,
    levels: Option<Vec<f64>>,
    t: Option<f64>,
    targets: Vec<Target>,
    reps: Option<u64>,
    grid: Option<u64>,
    seed: Option<u64>,
    budget: Option<u64>,
    kind: Option<KindName>,
    base: Option<ModelConfig>,
    d: Option<f64>,
    a: Option<f64>,
    s: Option<f64>,
    step: Option<f64>,
    const_reps: Option<u64>,
    const_seed: Option<u64>,
    mode: PickandsMode,
    study: StudyKind,
    numeric: bool,
    threads: Option<usize>,
    format: Format,
    output: Option<PathBuf>,
}

impl Settings {
    fn merge(f: Flags) -> Result<Self> {
        let cfg: CliConfig = match &f.config {
            Some(p) => serde_json::from_str(&std::fs::read_to_string(p)?)
                .map_err(|e| Error::Config(format!("{}: {e}", p.display())))?,
            None => CliConfig::default(),
        };
        let mc = cfg.mc.clone().unwrap_or_default();
        let cb = cfg.constants.clone().unwrap_or_default();
        let model = match &f.model {
            Some(m) => Some(ModelConfig::parse_flag(m)?),
            None => cfg.model.clone(),
        };
        let queue = QueueConfig {
            c: f.c.or(cfg.queue.map(|q| q.c)).unwrap_or(f64::NAN),
            x: f.x.or(cfg.queue.map(|q| q.x)).unwrap_or(0.0),
        };
        let horizon = match &f.horizon {
            Some(h) => Some(parse_horizon(h)?),
            None => cfg.horizon,
        };
        let levels = f.u.clone().or(cfg.u_grid.clone()).or(cfg.u.map(|u| vec![u]));
        let base = match &f.base {
            Some(b) => Some(ModelConfig::parse_flag(b)?),
            None => cb.base.clone(),
        };
        let mode = match f.mode {
            Some(ModeName::ShiftAverage) => PickandsMode::ShiftAverage,
            Some(ModeName::Direct) => PickandsMode::Direct,
            None => cb.mode.unwrap_or_default(),
        };
        let format = if f.json {
            Format::Json
        } else {
            f.format.or(cfg.output.as_ref().map(|o| o.format)).unwrap_or_default()
        };
        let output = f
            .output
            .clone()
            .or(cfg.output.as_ref().and_then(|o| o.path.as_ref().map(PathBuf::from)));
        let threads = match f.threads.or(cfg.threads) {
            Some(n) => Some(n),
            None => match std::env::var("GFQ_THREADS") {
                Ok(v) => Some(v.parse().map_err(|_| Error::Config(format!("GFQ_THREADS must be a count, got '{v}'")))?),
                Err(_) => None,
            },
        };
        Ok(Self {
            model,
            queue,
            horizon,
            levels,
            t: f.t.or(cfg.t),
            targets: f.target.clone().or(cfg.targets.clone()).unwrap_or_else(|| vec![Target::Point]),
            reps: f.reps.or(count(mc.reps, "mc.reps")?),
            grid: f.grid.or(count(mc.grid, "mc.grid")?),
            seed: f.seed.or(mc.seed).or(cfg.seed),
            budget: f.budget.or(count(cfg.budget, "budget")?),
            kind: f.kind.or(cb.kind),
            base,
            d: f.d.or(cb.d),
            a: f.a.or(cb.a),
            s: f.s.or(cb.horizon),
            step: f.step.or(cb.step),
            const_reps: f.const_reps.or(count(cb.reps, "constants.reps")?),
            const_seed: f.const_seed.or(cb.seed).or(cfg.seed),
            mode,
            study: f.study.or(cfg.study).unwrap_or_default(),
            numeric: f.numeric.or(cfg.numeric).unwrap_or(true),
            threads,
            format,
            output,
        })
    }

    fn spec(&self) -> Result<QueueSpec> {
        let model = self.model.as_ref().ok_or_else(|| Error::Config("missing model (--model)".into()))?;
        if self.queue.c.is_nan() {
            return Err(Error::Config("missing service rate (--c)".into()));
        }
        queue_spec(model, &self.queue)
    }

    fn family(&self) -> Result<HorizonFamily> {
        match (self.horizon, self.t) {
            (Some(h), _) => Ok(h),
            (None, Some(t)) => Ok(HorizonFamily::Fixed { t }),
            (None, None) => Err(Error::Config("missing horizon (--horizon or --T)".into())),
        }
    }

    fn levels(&self) -> Result<Vec<f64>> {
        match &self.levels {
            Some(u) if !u.is_empty() => Ok(u.clone()),
            _ => Err(Error::Config("missing level (--u)".into())),
        }
    }

    fn seed(&self, what: &str) -> Result<u64> {
        self.seed
            .ok_or_else(|| Error::Config(format!("{what} needs an explicit --seed")))
    }

    fn constants_config(&self) -> Option<ConstantsConfig> {
        Some(ConstantsConfig {
            horizon: self.s,
            step: self.step,
            reps: self.const_reps?,
            seed: self.const_seed.or(self.seed)?,
            mode: self.mode,
        })
    }
}

/// Run the tool on `argv` (including the program name) and return the exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match execute(cli) {
        Ok(()) => 0,
        Err(e) => {
            let code = e.exit_code() as i32;
            let record = serde_json::json!({"error": e.kind(), "message": e.to_string(), "exit": code});
            eprintln!("{record}");
            code
        }
    }
}

fn execute(cli: Cli) -> Result<()> {
    let (cmd, flags) = match cli.command {
        Command::Classify(f) => ("classify", f),
        Command::Approx(f) => ("approx", f),
        Command::Estimate(f) => ("estimate", f),
        Command::Constants(f) => ("constants", f),
        Command::Simulate(f) => ("simulate", f),
        Command::Study(f) => ("study", f),
    };
    let s = Settings::merge(flags)?;
    let threads = s.threads;
    let text = with_threads(threads, || -> Result<String> {
        match cmd {
            "classify" => cmd_classify(&s),
            "approx" => cmd_approx(&s),
            "estimate" => cmd_estimate(&s),
            "constants" => cmd_constants(&s),
            "simulate" => cmd_simulate(&s),
            _ => cmd_study(&s),
        }
    })?;
    match &s.output {
        Some(p) => std::fs::write(p, text)?,
        None => std::io::stdout().write_all(text.as_bytes())?,
    }
    Ok(())
}

fn json_record<T: Serialize>(v: &T) -> Result<String> {
    let mut s = serde_json::to_string(v)?;
    s.push('\n');
    Ok(s)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct ClassifyRow {
    scenario: String,
    gamma: f64,
    phi: f64,
    #[serde(with = "na")]
    omega_inf: Option<f64>,
    #[serde(with = "na")]
    omega: Option<f64>,
    #[serde(with = "na")]
    vartheta: Option<f64>,
    x_branch: String,
    t3_satisfied: bool,
}

impl Row for ClassifyRow {
    const COLUMNS: &'static [&'static str] =
        &["scenario", "gamma", "phi", "omega_inf", "omega", "vartheta", "x_branch", "t3_satisfied"];
}

fn cmd_classify(s: &Settings) -> Result<String> {
    let spec = s.spec()?;
    let class = classify(&spec, &s.family()?)?;
    match s.format {
        Format::Json => json_record(&class),
        Format::Csv => {
            let row = ClassifyRow {
                scenario: format!("{:?}", class.scenario),
                gamma: class.gamma,
                phi: class.phi,
                omega_inf: class.omega_inf,
                omega: class.omega,
                vartheta: class.vartheta,
                x_branch: serde_json::to_string(&class.x_branch)?.trim_matches('"').to_string(),
                t3_satisfied: class.t3_satisfied,
            };
            render(&[row], Format::Csv)
        }
    }
}

#[derive(Serialize)]
struct ApproxRecord<'a> {
    u: f64,
    target: Target,
    value: f64,
    #[serde(flatten)]
    estimate: &'a gfq_core::asympt::AsymptoticEstimate,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct ApproxRow {
    u: f64,
    target: Target,
    log_value: f64,
    value: f64,
    formula_id: String,
    regime: String,
}

impl Row for ApproxRow {
    const COLUMNS: &'static [&'static str] = &["u", "target", "log_value", "value", "formula_id", "regime"];
}

fn cmd_approx(s: &Settings) -> Result<String> {
    let spec = s.spec()?;
    let family = s.family()?;
    let cc = s.constants_config();
    let mut cache = ConstantCache::new();
    let mut records = Vec::new();
    let mut rows = Vec::new();
    for u in s.levels()? {
        for &target in &s.targets {
            let Some(e) = asymptotic_with_cache(&spec, &family, u, target, &mut cache, cc.as_ref())? else {
                return Err(gfq_core::Error::DelegateToMonteCarlo(format!(
                    "no asymptotic for the {target:?} target in this regime; use estimate"
                ))
                .into());
            };
            rows.push(ApproxRow {
                u,
                target,
                log_value: e.log_value,
                value: e.value(),
                formula_id: e.formula_id.to_string(),
                regime: format!("{:?}", e.regime.scenario),
            });
            records.push(json_record(&ApproxRecord {
                u,
                target,
                value: e.value(),
                estimate: &e,
            })?);
        }
    }
    match s.format {
        Format::Json => Ok(records.concat()),
        Format::Csv => render(&rows, Format::Csv),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct EstimateRow {
    u: f64,
    #[serde(rename = "T")]
    horizon: f64,
    target: Target,
    p_hat: f64,
    se: f64,
    ci_low: f64,
    ci_high: f64,
    hits: u64,
    reps: u64,
    grid: usize,
    seed: u64,
}

impl Row for EstimateRow {
    const COLUMNS: &'static [&'static str] =
        &["u", "T", "target", "p_hat", "se", "ci_low", "ci_high", "hits", "reps", "grid", "seed"];
}

fn cmd_estimate(s: &Settings) -> Result<String> {
    let spec = s.spec()?;
    let levels = s.levels()?;
    let run = McRun {
        reps: s.reps.ok_or_else(|| Error::Config("estimate needs --reps".into()))?,
        grid_points: s.grid.ok_or_else(|| Error::Config("estimate needs --grid".into()))? as usize,
        seed: s.seed("estimate")?,
        budget: s.budget.unwrap_or(DEFAULT_BUDGET),
    };
    let mut pairs = Vec::new();
    match s.t {
        Some(t) => {
            let mut sorted = levels.clone();
            sorted.sort_by(f64::total_cmp);
            for p in estimate_pair(&spec, t, &sorted, &run)? {
                pairs.push((t, p));
            }
        }
        None => {
            let family = s.family()?;
            for u in levels {
                let t = horizon_value(&family, &spec, u)?;
                pairs.push((t, estimate_pair(&spec, t, &[u], &run)?[0]));
            }
        }
    }
    let mut rows = Vec::new();
    for (t, p) in pairs {
        for &target in &s.targets {
            let e = match target {
                Target::Point => p.point,
                Target::Sup => p.sup,
            };
            rows.push(EstimateRow {
                u: p.u,
                horizon: t,
                target,
                p_hat: e.p_hat,
                se: e.std_error,
                ci_low: e.ci_low,
                ci_high: e.ci_high,
                hits: e.hits,
                reps: e.replications,
                grid: e.grid_points,
                seed: e.seed,
            });
        }
    }
    render(&rows, s.format)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct ConstantRow {
    kind: String,
    value: f64,
    se: f64,
    #[serde(rename = "S")]
    horizon: f64,
    step: f64,
    reps: u64,
    seed: u64,
    process: String,
}

impl Row for ConstantRow {
    const COLUMNS: &'static [&'static str] = &["kind", "value", "se", "S", "step", "reps", "seed", "process"];
}

#[derive(Serialize)]
struct ConstantRecord<'a> {
    value: f64,
    se: f64,
    #[serde(rename = "S")]
    horizon: f64,
    step: f64,
    reps: u64,
    seed: u64,
    kind: ConstantKind,
    process: &'a LimitProcessSpec,
    #[serde(skip_serializing_if = "Option::is_none")]
    mode: Option<PickandsMode>,
}

fn base_process(s: &Settings) -> Result<LimitProcessSpec> {
    match &s.base {
        Some(ModelConfig::Fbm { hurst, scale }) if *scale == 1.0 => Ok(LimitProcessSpec::fbm(*hurst)?),
        Some(m) => Ok(LimitProcessSpec::scaled_input(m.build()?, 1.0, 1.0)?),
        None => {
            let spec = s.spec()?;
            let class = classify(&spec, &s.family()?)?;
            Ok(limiting_process(&spec, &class)?)
        }
    }
}

fn cmd_constants(s: &Settings) -> Result<String> {
    let process = base_process(s)?;
    let need_d = || s.d.ok_or_else(|| Error::Config("Piterbarg constants need --d".into()));
    let need_a = || s.a.ok_or_else(|| Error::Config("this constant needs --a".into()));
    let kind = match s.kind.ok_or_else(|| Error::Config("constants needs --kind".into()))? {
        KindName::Pickands => ConstantKind::Pickands,
        KindName::Piterbarg => ConstantKind::Piterbarg { d: need_d()? },
        KindName::PiterbargA => ConstantKind::PiterbargA { d: need_d()?, a: need_a()? },
        KindName::PiterbargTilde => ConstantKind::PiterbargTilde { d: need_d()?, a: need_a()? },
    };
    let reps = s
        .reps
        .or(s.const_reps)
        .ok_or_else(|| Error::Config("constants needs --reps".into()))?;
    let seed = s.seed.or(s.const_seed).ok_or_else(|| Error::Config("constants needs an explicit --seed".into()))?;
    let mut cfg = McSettings::default_for(&process, reps, seed);
    if let Some(v) = s.s {
        cfg.horizon = v;
    }
    if let Some(v) = s.step {
        cfg.step = v;
    }
    if let Some(b) = s.budget {
        cfg.budget = b;
    }
    let query = ConstantQuery { kind, process };
    let e = estimate_query(&query, &cfg, s.mode)?;
    let row = ConstantRow {
        kind: serde_json::to_value(kind)?["kind"].as_str().unwrap_or("").to_string(),
        value: e.value,
        se: e.std_error,
        horizon: e.horizon,
        step: e.grid_step,
        reps: e.replications,
        seed: e.seed,
        process: query.process.to_string(),
    };
    match s.format {
        Format::Json => json_record(&ConstantRecord {
            value: e.value,
            se: e.std_error,
            horizon: e.horizon,
            step: e.grid_step,
            reps: e.replications,
            seed: e.seed,
            kind,
            process: &query.process,
            mode: matches!(kind, ConstantKind::Pickands).then_some(s.mode),
        }),
        Format::Csv => render(&[row], Format::Csv),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct PathRow {
    t: f64,
    #[serde(rename = "X")]
    x: f64,
    #[serde(rename = "Q")]
    q: f64,
}

impl Row for PathRow {
    const COLUMNS: &'static [&'static str] = &["t", "X", "Q"];
}

#[derive(Serialize)]
struct PathRecord<'a> {
    step: f64,
    seed: u64,
    running_sup: f64,
    #[serde(rename = "X")]
    x: &'a [f64],
    #[serde(rename = "Q")]
    q: &'a [f64],
}

fn cmd_simulate(s: &Settings) -> Result<String> {
    let spec = s.spec()?;
    let fbm = spec
        .model()
        .as_fbm()
        .ok_or_else(|| Error::Unsupported("only fBm inputs can be simulated".into()))?;
    let t = match (s.t, s.levels.as_deref()) {
        (Some(t), _) => t,
        (None, Some([u, ..])) => horizon_value(&s.family()?, &spec, *u)?,
        _ => return Err(Error::Config("simulate needs --T or a horizon family with --u".into())),
    };
    let n = s.grid.ok_or_else(|| Error::Config("simulate needs --grid".into()))? as usize;
    let seed = s.seed("simulate")?;
    let raw = generate_fgn(fbm.hurst(), n, t / n as f64, seed)?;
    let path = SamplePath {
        step: raw.step,
        values: raw.values.iter().map(|v| v * fbm.scale().sqrt()).collect(),
    };
    let w = workload_path(&path, spec.c(), spec.x());
    let rows: Vec<PathRow> = path
        .values
        .iter()
        .zip(&w.q_values)
        .enumerate()
        .map(|(k, (x, q))| PathRow {
            t: k as f64 * path.step,
            x: *x,
            q: *q,
        })
        .collect();
    match s.format {
        Format::Json => json_record(&PathRecord {
            step: path.step,
            seed,
            running_sup: w.running_sup,
            x: &path.values,
            q: &w.q_values,
        }),
        Format::Csv => render(&rows, Format::Csv),
    }
}

fn cmd_study(s: &Settings) -> Result<String> {
    match s.study {
        StudyKind::Convergence => {
            let cfg = StudyConfig {
                model: s.model.clone().ok_or_else(|| Error::Config("missing model".into()))?,
                queue: s.queue,
                horizon: s.family()?,
                u_grid: s.levels()?,
                mc: McConfig {
                    reps: s.reps.ok_or_else(|| Error::Config("study needs mc.reps".into()))?,
                    grid_points: s.grid.ok_or_else(|| Error::Config("study needs mc.grid".into()))? as usize,
                    seed: s.seed("study")?,
                },
                targets: s.targets.clone(),
                constants: s.constants_config(),
                budget: s.budget,
                output: None,
            };
            render(&convergence_study(&cfg)?, s.format)
        }
        StudyKind::Stationarity => {
            let spec = s.spec()?;
            let rows = stationarity_study(
                &spec,
                &s.family()?,
                &s.levels()?,
                s.numeric,
                &gfq_core::constants::ClosedFormsOnly,
            )?;
            render(&rows, s.format)
        }
        StudyKind::Lemma => render(&lemma_limit_sweep(&s.spec()?, &s.family()?)?, s.format),
    }
}
