use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use expu_core::harness::{
    write_run, CodeKind, Experiment, ExperimentConfig, MotherSize, RateConvention,
};
use expu_core::{
    census, codeword_exponent, nearest_composition, optimize_rho, random_coding_exponent,
    sample_codebook, Channel, CodewordEval, EnsembleKind, EnsembleSpec, EvalMethod, GammaKind,
    InputDistribution, RateGrid, TrialCensus,
};

#[derive(Parser)]
#[command(
    name = "expu",
    version,
    about = "Expurgated error exponents and random-code experiments"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Tabulate E_r and E_ex over a rate grid (CSV on stdout).
    Exponents(ExponentsArgs),
    /// Sample one mother code (JSON on stdout).
    Sample(SampleArgs),
    /// Sample, evaluate and census one mother code (JSON on stdout).
    Trial(TrialArgs),
    /// Compare the union-Bhattacharyya bound with exact ML on sampled codes.
    ExactCheck(ExactCheckArgs),
    /// Run a full experiment and write a run directory.
    Experiment(ExperimentArgs),
}

#[derive(Args)]
struct ChannelArgs {
    /// Channel JSON file.
    #[arg(long)]
    channel: PathBuf,
    /// Input distribution, comma separated; uniform when omitted.
    #[arg(long)]
    q: Option<InputDistribution>,
}

impl ChannelArgs {
    fn load(&self) -> Result<(Channel, InputDistribution)> {
        let ch = read_channel(&self.channel)?;
        let q = self
            .q
            .clone()
            .unwrap_or_else(|| InputDistribution::uniform(ch.inputs()));
        if q.len() != ch.inputs() {
            bail!(
                "--q has {} entries, channel has {} inputs",
                q.len(),
                ch.inputs()
            );
        }
        Ok((ch, q))
    }
}

#[derive(Args)]
struct ExponentsArgs {
    #[command(flatten)]
    channel: ChannelArgs,
    /// A single rate or start:stop:step.
    #[arg(long, default_value = "0.01:0.5:0.01")]
    rates: RateGrid,
    #[arg(long, default_value_t = 64.0)]
    rho_max: f64,
    /// Threshold schedule; validated, not used by the table.
    #[allow(dead_code)]
    #[arg(long, default_value = "sqrt-exp")]
    gamma: GammaKind,
}

#[derive(Clone, Copy, ValueEnum)]
enum KindArg {
    Iid,
    Cc,
}

impl From<KindArg> for CodeKind {
    fn from(k: KindArg) -> Self {
        match k {
            KindArg::Iid => CodeKind::Iid,
            KindArg::Cc => CodeKind::Cc,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum ConventionArg {
    Nominal,
    Mother,
}

impl From<ConventionArg> for RateConvention {
    fn from(c: ConventionArg) -> Self {
        match c {
            ConventionArg::Nominal => RateConvention::Nominal,
            ConventionArg::Mother => RateConvention::Mother,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum MotherArg {
    Eps,
    Double,
}

impl From<MotherArg> for MotherSize {
    fn from(m: MotherArg) -> Self {
        match m {
            MotherArg::Eps => MotherSize::Eps,
            MotherArg::Double => MotherSize::Double,
        }
    }
}

#[derive(Args)]
struct SampleArgs {
    #[command(flatten)]
    channel: ChannelArgs,
    #[arg(long)]
    rate: f64,
    #[arg(long)]
    n: usize,
    #[arg(long, default_value_t = 0.1)]
    eps: f64,
    #[arg(long, value_enum, default_value = "iid")]
    kind: KindArg,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 0)]
    trial: u64,
}

#[derive(Args)]
struct CodeArgs {
    #[command(flatten)]
    channel: ChannelArgs,
    #[arg(long)]
    rate: f64,
    #[arg(long)]
    n: usize,
    #[arg(long, default_value_t = 0.1)]
    eps: f64,
    #[arg(long, default_value_t = 0.05)]
    eps1: f64,
    #[arg(long, default_value = "sqrt-exp")]
    gamma: GammaKind,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value = "iid")]
    kind: KindArg,
    #[arg(long, value_enum, default_value = "mother")]
    rate_convention: ConventionArg,
    #[arg(long, value_enum, default_value = "eps")]
    mother_size: MotherArg,
    #[arg(long, default_value_t = 64.0)]
    rho_max: f64,
}

impl CodeArgs {
    fn experiment(&self, method: EvalMethod, trials: u64) -> Result<Experiment> {
        let (ch, q) = self.channel.load()?;
        let cfg = ExperimentConfig {
            channel_path: self.channel.channel.clone(),
            q,
            rate: self.rate,
            eps: self.eps,
            eps1: self.eps1,
            gamma_kind: self.gamma,
            n_grid: vec![self.n],
            trials,
            master_seed: self.seed,
            method,
            rho_max: self.rho_max,
            rate_convention: self.rate_convention.into(),
            kind: self.kind.into(),
            mother_size: self.mother_size.into(),
        };
        Ok(Experiment::new(cfg, ch)?)
    }
}

#[derive(Args)]
struct TrialArgs {
    #[command(flatten)]
    code: CodeArgs,
    #[arg(long, default_value_t = 0)]
    trial: u64,
    #[arg(long, default_value = "ub")]
    method: EvalMethod,
}

#[derive(Args)]
struct ExactCheckArgs {
    #[command(flatten)]
    code: CodeArgs,
    /// First trial id.
    #[arg(long, default_value_t = 0)]
    trial: u64,
    /// Number of consecutive trials to check.
    #[arg(long, default_value_t = 1)]
    trials: u64,
}

#[derive(Args)]
struct ExperimentArgs {
    /// JSON configuration; individual flags override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    channel: Option<PathBuf>,
    #[arg(long)]
    q: Option<InputDistribution>,
    #[arg(long)]
    rate: Option<f64>,
    #[arg(long)]
    eps: Option<f64>,
    #[arg(long)]
    eps1: Option<f64>,
    #[arg(long)]
    gamma: Option<GammaKind>,
    /// Comma-separated block lengths.
    #[arg(long, value_delimiter = ',')]
    n_grid: Option<Vec<usize>>,
    #[arg(long)]
    trials: Option<u64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    method: Option<EvalMethod>,
    #[arg(long)]
    rho_max: Option<f64>,
    #[arg(long, value_enum)]
    rate_convention: Option<ConventionArg>,
    #[arg(long, value_enum)]
    kind: Option<KindArg>,
    #[arg(long, value_enum)]
    mother_size: Option<MotherArg>,
    /// Parent directory of the run directory.
    #[arg(long, default_value = "runs")]
    out: PathBuf,
}

fn read_channel(path: &Path) -> Result<Channel> {
    let text =
        std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    Channel::from_json_str(&text).with_context(|| format!("parsing {}", path.display()))
}

fn print_json<T: Serialize>(value: &T) -> Result<()> {
    let mut out = io::stdout().lock();
    writeln!(out, "{}", serde_json::to_string_pretty(value)?)?;
    Ok(())
}

fn exponents(args: ExponentsArgs) -> Result<()> {
    let (ch, q) = args.channel.load()?;
    let bm = ch.bhattacharyya_matrix();
    let mut out = io::stdout().lock();
    writeln!(out, "rate,rho_star_rc,e_r,rho_hat,e_ex,capped")?;
    for rate in args.rates.points() {
        let rc = random_coding_exponent(rate, &q, &ch)?;
        let ex = optimize_rho(rate, &q, &bm, args.rho_max)?;
        writeln!(
            out,
            "{rate},{},{},{},{},{}",
            rc.rho_star, rc.e_r, ex.rho_hat, ex.e_ex, ex.capped
        )?;
    }
    Ok(())
}

fn sample(args: SampleArgs) -> Result<()> {
    let (_, q) = args.channel.load()?;
    let kind = match args.kind {
        KindArg::Iid => EnsembleKind::Iid(q),
        KindArg::Cc => EnsembleKind::ConstantComposition(nearest_composition(&q, args.n)),
    };
    let spec = EnsembleSpec::new(kind, args.n, args.rate, args.eps)?;
    print_json(&sample_codebook(&spec, args.seed, args.trial))
}

#[derive(Serialize)]
struct TrialReport {
    n: usize,
    trial_id: u64,
    m_n: u64,
    m_prime: u64,
    threshold_rate: f64,
    rho_hat: f64,
    e_ex: f64,
    delta: f64,
    census: TrialCensus,
    codewords: Vec<CodewordEval>,
}

fn trial(args: TrialArgs) -> Result<()> {
    let exp = args.code.experiment(args.method, 1)?;
    let plan = exp.plan(args.code.n)?;
    let out = exp.trial(&plan, args.trial)?;
    print_json(&TrialReport {
        n: plan.n,
        trial_id: args.trial,
        m_n: plan.spec.m_n(),
        m_prime: plan.spec.m_prime(),
        threshold_rate: plan.threshold_rate,
        rho_hat: plan.solution.rho_hat,
        e_ex: plan.solution.e_ex,
        delta: plan.schedule.delta,
        census: out.census,
        codewords: out.evals,
    })
}

#[derive(Serialize)]
struct ExactCheckTrial {
    trial_id: u64,
    max_ratio: Option<f64>,
    phi_ub: u64,
    phi_exact: u64,
    pass_ub: bool,
    pass_exact: bool,
}

#[derive(Serialize)]
struct ExactCheckReport {
    n: usize,
    m_prime: u64,
    threshold: f64,
    /// Largest `P_e / bound` over all codewords with a positive bound.
    max_ratio: Option<f64>,
    trials: Vec<ExactCheckTrial>,
}

fn exact_check(args: ExactCheckArgs) -> Result<()> {
    if args.trials == 0 {
        bail!("--trials must be at least 1");
    }
    let exp = args.code.experiment(EvalMethod::Exact, args.trials)?;
    let plan = exp.plan(args.code.n)?;
    let mut trials = Vec::new();
    for t in args.trial..args.trial + args.trials {
        let out = exp.trial(&plan, t)?;
        let max_ratio = out
            .evals
            .iter()
            .filter(|e| e.pe_bound > 0.0)
            .map(|e| e.pe_exact.unwrap_or(e.pe_bound) / e.pe_bound)
            .fold(None, |acc: Option<f64>, r| {
                Some(acc.map_or(r, |a| a.max(r)))
            });
        let ub_evals: Vec<CodewordEval> = out
            .evals
            .iter()
            .map(|e| CodewordEval {
                pe_exact: None,
                exponent: codeword_exponent(e.pe_bound, plan.n),
                infinite: e.pe_bound == 0.0,
                ..*e
            })
            .collect();
        let ub = census(&ub_evals, plan.threshold, plan.spec.m_n(), args.code.eps1);
        trials.push(ExactCheckTrial {
            trial_id: t,
            max_ratio,
            phi_ub: ub.big_phi,
            phi_exact: out.census.big_phi,
            pass_ub: ub.pass,
            pass_exact: out.census.pass,
        });
    }
    let max_ratio = trials
        .iter()
        .filter_map(|t| t.max_ratio)
        .fold(None, |acc: Option<f64>, r| {
            Some(acc.map_or(r, |a| a.max(r)))
        });
    print_json(&ExactCheckReport {
        n: plan.n,
        m_prime: plan.spec.m_prime(),
        threshold: plan.threshold,
        max_ratio,
        trials,
    })
}

fn experiment_config(args: &ExperimentArgs) -> Result<ExperimentConfig> {
    let mut cfg = match &args.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .with_context(|| format!("reading {}", path.display()))?;
            let mut cfg: ExperimentConfig = serde_json::from_str(&text)
                .with_context(|| format!("parsing {}", path.display()))?;
            if cfg.channel_path.is_relative() {
                if let Some(dir) = path.parent() {
                    cfg.channel_path = dir.join(&cfg.channel_path);
                }
            }
            cfg
        }
        None => {
            let missing = |name: &str| anyhow::anyhow!("--{name} is required without --config");
            ExperimentConfig {
                channel_path: args.channel.clone().ok_or_else(|| missing("channel"))?,
                q: InputDistribution::uniform(2),
                rate: args.rate.ok_or_else(|| missing("rate"))?,
                eps: 0.1,
                eps1: 0.05,
                gamma_kind: GammaKind::default(),
                n_grid: args.n_grid.clone().ok_or_else(|| missing("n-grid"))?,
                trials: 200,
                master_seed: 0,
                method: EvalMethod::default(),
                rho_max: 64.0,
                rate_convention: RateConvention::default(),
                kind: CodeKind::default(),
                mother_size: MotherSize::default(),
            }
        }
    };
    if let Some(v) = &args.channel {
        cfg.channel_path = v.clone();
    }
    if let Some(v) = args.rate {
        cfg.rate = v;
    }
    if let Some(v) = args.eps {
        cfg.eps = v;
    }
    if let Some(v) = args.eps1 {
        cfg.eps1 = v;
    }
    if let Some(v) = args.gamma {
        cfg.gamma_kind = v;
    }
    if let Some(v) = &args.n_grid {
        cfg.n_grid = v.clone();
    }
    if let Some(v) = args.trials {
        cfg.trials = v;
    }
    if let Some(v) = args.seed {
        cfg.master_seed = v;
    }
    if let Some(v) = args.method {
        cfg.method = v;
    }
    if let Some(v) = args.rho_max {
        cfg.rho_max = v;
    }
    if let Some(v) = args.rate_convention {
        cfg.rate_convention = v.into();
    }
    if let Some(v) = args.kind {
        cfg.kind = v.into();
    }
    if let Some(v) = args.mother_size {
        cfg.mother_size = v.into();
    }
    let channel_inputs = read_channel(&cfg.channel_path)?.inputs();
    match &args.q {
        Some(q) => cfg.q = q.clone(),
        None if args.config.is_none() => cfg.q = InputDistribution::uniform(channel_inputs),
        None => {}
    }
    cfg.validate()?;
    Ok(cfg)
}

fn experiment(args: ExperimentArgs) -> Result<bool> {
    let cfg = experiment_config(&args)?;
    let exp = Experiment::load(cfg)?;
    let result = exp.run()?;
    let dir = write_run(&result, &args.out)?;
    for c in &result.checks {
        eprintln!(
            "{} {}{}: observed {:.6}, bound {:.6}, slack {:.6}",
            if c.pass { "ok  " } else { "FAIL" },
            c.name,
            c.n.map(|n| format!(" n={n}")).unwrap_or_default(),
            c.observed,
            c.bound,
            c.slack
        );
    }
    writeln!(io::stdout().lock(), "{}", dir.display())?;
    Ok(result.all_pass)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Exponents(a) => exponents(a).map(|_| true),
        Command::Sample(a) => sample(a).map(|_| true),
        Command::Trial(a) => trial(a).map(|_| true),
        Command::ExactCheck(a) => exact_check(a).map(|_| true),
        Command::Experiment(a) => experiment(a),
    };
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e)
            if e.downcast_ref::<io::Error>()
                .is_some_and(|io| io.kind() == io::ErrorKind::BrokenPipe) =>
        {
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
