use std::fs;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use aibt::bench::{emit_csv, run_experiment, write_csv, ExperimentConfig, Method, WaveletPolicy};
use aibt::cftp::{CftpConfig, Problem, TierThresholds};
use aibt::estimator::{denoise, posterior_draws, DenoiseConfig};
use aibt::lattice::LatticeIndex;
use aibt::model::estimate_sigma_mad;
use aibt::wavelet::{add_noise, forward_dwt, make_test_signal, FilterKind, Signal, TestSignal, WaveletFilter};
use aibt::{Error, ModelParams, Result};
use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(name = "aibt", version, about = "Wavelet denoising with an area-interaction prior, sampled exactly by dominated CFTP")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Denoise a signal file or a noisy copy of a named test signal.
    Denoise(DenoiseArgs),
    /// Run the simulation study and write one CSV row per cell and method.
    Bench(BenchArgs),
    /// Write raw posterior draws of the lattice counts.
    Sample(SampleArgs),
}

#[derive(Args)]
struct InputArgs {
    /// One-column text file, or a test signal name (blocks, bumps, doppler, heavisine).
    #[arg(long = "in", value_name = "FILE|SIGNAL")]
    input: String,
    /// Length of a generated test signal.
    #[arg(long, default_value_t = 256)]
    n: usize,
    /// Root signal-to-noise ratio for generated input; noise sd is 1/rsnr.
    #[arg(long, default_value_t = 10.0)]
    rsnr: f64,
    /// haar or la10. Defaults to haar for blocks and la10 otherwise.
    #[arg(long)]
    wavelet: Option<String>,
    #[arg(long, default_value_t = 0.05)]
    lambda: f64,
    #[arg(long, default_value_t = 3.0)]
    gamma: f64,
    #[arg(long, default_value_t = 1.0)]
    tau: f64,
    #[arg(long, default_value_t = 1.0)]
    z: f64,
    /// Noise standard deviation. Defaults to 1/rsnr for generated input.
    #[arg(long, conflicts_with = "estimate_sigma")]
    sigma: Option<f64>,
    /// Estimate the noise level from the finest detail level.
    #[arg(long)]
    estimate_sigma: bool,
    #[arg(long, default_value_t = 25)]
    draws: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Lower tier cut-off on the dominating rate. Defaults to lambda * e^4.
    #[arg(long)]
    t1: Option<f64>,
    /// Upper tier cut-off on the dominating rate.
    #[arg(long, default_value_t = 20f64.exp())]
    t2: f64,
    #[arg(long, default_value_t = CftpConfig::default().max_doublings)]
    max_doublings: u32,
}

#[derive(Args)]
#[command(allow_negative_numbers = true)]
struct DenoiseArgs {
    #[command(flatten)]
    input: InputArgs,
    /// Output file, one value per line. Standard output if omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
#[command(allow_negative_numbers = true)]
struct SampleArgs {
    #[command(flatten)]
    input: InputArgs,
    /// CSV with columns draw,j,k,xi. Standard output if omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
#[command(allow_negative_numbers = true)]
struct BenchArgs {
    /// JSON file with ExperimentConfig fields; flags below override it.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Start from the full-scale study (25 replicates, 25 draws).
    #[arg(long)]
    full: bool,
    #[arg(long, value_delimiter = ',')]
    signals: Option<Vec<String>>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long, value_delimiter = ',')]
    rsnr: Option<Vec<f64>>,
    #[arg(long)]
    reps: Option<usize>,
    #[arg(long = "draws")]
    n_draws: Option<usize>,
    #[arg(long)]
    lambda: Option<f64>,
    #[arg(long)]
    gamma: Option<f64>,
    #[arg(long)]
    tau: Option<f64>,
    #[arg(long)]
    z: Option<f64>,
    /// standard, haar or la10.
    #[arg(long)]
    wavelet_policy: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    t1: Option<f64>,
    #[arg(long)]
    t2: Option<f64>,
    /// Comma-separated labels: AIBT, SS, UNIV, BT, FDR.
    #[arg(long, value_delimiter = ',')]
    methods: Option<Vec<String>>,
    #[arg(long)]
    fdr_q: Option<f64>,
    #[arg(long)]
    max_doublings: Option<u32>,
    /// Record wall-clock seconds per cell (makes output non-reproducible).
    #[arg(long)]
    timing: bool,
    /// Output CSV. Standard output if omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Observed signal with its noise level and the filter to analyse it with.
struct Prepared {
    signal: Signal<f64>,
    sigma: f64,
    filter: WaveletFilter<f64>,
    params: ModelParams,
    thresholds: TierThresholds,
    cftp: CftpConfig,
}

fn read_signal(path: &Path) -> Result<Signal<f64>> {
    let text = fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    let mut values = Vec::new();
    for (line_no, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let v: f64 = line
            .parse()
            .map_err(|_| Error::Config(format!("{}:{}: not a number: {line:?}", path.display(), line_no + 1)))?;
        values.push(v);
    }
    Signal::new(values)
}

fn parse_policy(s: &str) -> Result<WaveletPolicy> {
    match s.to_ascii_lowercase().as_str() {
        "standard" => Ok(WaveletPolicy::Standard),
        "haar" => Ok(WaveletPolicy::Haar),
        "la10" | "daubla10" => Ok(WaveletPolicy::La10),
        _ => Err(Error::UnknownName {
            kind: "wavelet policy",
            name: s.to_string(),
        }),
    }
}

fn prepare(args: &InputArgs) -> Result<Prepared> {
    let named = args.input.parse::<TestSignal>().ok().filter(|_| !Path::new(&args.input).exists());
    let (signal, default_sigma) = match named {
        Some(which) => {
            if !(args.rsnr > 0.0 && args.rsnr.is_finite()) {
                return Err(Error::InvalidParams(format!("rsnr must be positive, got {}", args.rsnr)));
            }
            let sigma = 1.0 / args.rsnr;
            let truth = make_test_signal::<f64>(which, args.n)?;
            (add_noise(&truth, sigma, args.seed)?, Some(sigma))
        }
        None => (read_signal(Path::new(&args.input))?, None),
    };
    let kind = match &args.wavelet {
        Some(name) => name.parse::<FilterKind>()?,
        None => WaveletPolicy::Standard.filter_for(named.unwrap_or(TestSignal::Heavisine)),
    };
    let filter = WaveletFilter::new(kind);
    let sigma = if args.estimate_sigma {
        estimate_sigma_mad(&forward_dwt(&signal, &filter))?
    } else {
        match args.sigma.or(default_sigma) {
            Some(s) => s,
            None => {
                return Err(Error::Config(
                    "file input needs --sigma or --estimate-sigma".into(),
                ))
            }
        }
    };
    let params = ModelParams::with_z(args.lambda, args.gamma, args.tau, sigma, args.z)?;
    let thresholds = match args.t1 {
        Some(t1) => TierThresholds::new(t1, args.t2)?,
        None => TierThresholds::new(TierThresholds::for_params(&params).t1, args.t2)?,
    };
    if args.draws == 0 {
        return Err(Error::InvalidParams("need at least one posterior draw".into()));
    }
    let cftp = CftpConfig {
        max_doublings: args.max_doublings,
        ..CftpConfig::default()
    };
    Ok(Prepared {
        signal,
        sigma,
        filter,
        params,
        thresholds,
        cftp,
    })
}

fn open_output(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(fs::File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn run_denoise(args: &DenoiseArgs) -> Result<()> {
    let prep = prepare(&args.input)?;
    log::info!("denoise n={} sigma={} filter={}", prep.signal.len(), prep.sigma, prep.filter.kind());
    let cfg = DenoiseConfig {
        params: prep.params,
        n_draws: args.input.draws,
        seed: args.input.seed,
        thresholds: prep.thresholds,
        cftp: prep.cftp,
    };
    let estimate = denoise(&prep.signal, &prep.filter, &cfg)?;
    let mut out = open_output(args.out.as_deref())?;
    for v in estimate.samples() {
        writeln!(out, "{v}")?;
    }
    out.flush()?;
    Ok(())
}

fn run_sample(args: &SampleArgs) -> Result<()> {
    let prep = prepare(&args.input)?;
    let dec = forward_dwt(&prep.signal, &prep.filter);
    let problem = Problem::from_details(&dec.detail_flat(), prep.params, prep.thresholds)?;
    log::info!("sample census {:?}", problem.census());
    let draws = posterior_draws(&problem, args.input.draws, args.input.seed, &prep.cftp)?;
    let mut out = open_output(args.out.as_deref())?;
    writeln!(out, "draw,j,k,xi")?;
    for (i, draw) in draws.iter().enumerate() {
        for (flat, xi) in draw.xi.iter().enumerate() {
            let site = LatticeIndex::from_flat(flat);
            writeln!(out, "{i},{},{},{xi}", site.j, site.k)?;
        }
    }
    out.flush()?;
    Ok(())
}

fn bench_config(args: &BenchArgs) -> Result<ExperimentConfig> {
    let mut cfg = match &args.config {
        Some(path) => {
            let text = fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
            ExperimentConfig::from_json(&text)?
        }
        None if args.full => ExperimentConfig::full_scale(),
        None => ExperimentConfig::default(),
    };
    if args.full && args.config.is_some() {
        let full = ExperimentConfig::full_scale();
        cfg.reps = full.reps;
        cfg.n_draws = full.n_draws;
    }
    if let Some(names) = &args.signals {
        cfg.signals = names.iter().map(|s| s.parse()).collect::<Result<_>>()?;
    }
    if let Some(names) = &args.methods {
        cfg.methods = names.iter().map(|s| s.parse::<Method>()).collect::<Result<_>>()?;
    }
    if let Some(p) = &args.wavelet_policy {
        cfg.wavelet_policy = parse_policy(p)?;
    }
    macro_rules! set {
        ($($field:ident).+ = $value:expr) => {
            if let Some(v) = $value {
                cfg.$($field).+ = v;
            }
        };
    }
    set!(n = args.n);
    set!(rsnr = args.rsnr.clone());
    set!(reps = args.reps);
    set!(n_draws = args.n_draws);
    set!(params.lambda = args.lambda);
    set!(params.gamma = args.gamma);
    set!(params.tau = args.tau);
    set!(params.z = args.z);
    set!(seed = args.seed);
    set!(t2 = args.t2);
    set!(fdr_q = args.fdr_q);
    set!(max_doublings = args.max_doublings);
    if args.t1.is_some() {
        cfg.t1 = args.t1;
    }
    cfg.timing |= args.timing;
    cfg.validate()?;
    Ok(cfg)
}

fn run_bench(args: &BenchArgs) -> Result<()> {
    let cfg = bench_config(args)?;
    log::info!(
        "bench signals={} rsnr={:?} reps={} draws={}",
        cfg.signals.len(),
        cfg.rsnr,
        cfg.reps,
        cfg.n_draws
    );
    let rows = run_experiment(&cfg)?;
    for r in rows.iter().filter(|r| r.failures > 0) {
        log::warn!("{} rsnr={} {}: {} replicate(s) failed to coalesce", r.signal, r.rsnr, r.method, r.failures);
    }
    match &args.out {
        Some(path) => emit_csv(&rows, path),
        None => {
            let mut out = BufWriter::new(io::stdout().lock());
            write_csv(&rows, &mut out)?;
            out.flush()?;
            Ok(())
        }
    }
}

fn error_line(kind: &str, message: &str) {
    eprintln!("{}", serde_json::json!({ "error": kind, "message": message }));
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            error_line("usage", e.to_string().trim());
            return ExitCode::from(2);
        }
    };
    let result = match &cli.command {
        Command::Denoise(args) => run_denoise(args),
        Command::Bench(args) => run_bench(args),
        Command::Sample(args) => run_sample(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            error_line(e.kind(), &e.to_string());
            ExitCode::FAILURE
        }
    }
}
