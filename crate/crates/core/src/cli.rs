//! Command-line front end. `run` parses arguments, executes one subcommand
//! and maps the outcome to an exit code: 0 success, 1 runtime failure,
//! 2 usage error.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{ArgAction, Args, Parser, Subcommand, ValueEnum};
use log::info;

use crate::classic::{denoise_classic, ClassicConfig, LambdaChoice, RankChoice, DEFAULT_LAMBDA_FACTOR};
use crate::error::{Result, SmdsError};
use crate::io::{list_hsi_files, make_phantom, read_hsi, read_sidecar, write_hsi, write_sidecar, HsiSidecar, PhantomSpec};
use crate::metrics::evaluate;
use crate::net::{denoise_net, init_params, load_params, save_params, NetConfig, TILE_SIZE, TILE_STRIDE};
use crate::train::{
    load_adam, save_adam, synth_noise_seeded, train_loop_from, write_loss_csv, AdamState, HsiDataset, HsiSample,
    TrainConfig,
};

#[derive(Debug, Parser)]
#[command(name = "smds", version, about = "Hyperspectral denoising by subspace projection and multidimensional sparse coding")]
struct Cli {
    /// Worker threads (default: logical cores). `--threads 1` is bit-reproducible.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// More log output (repeatable).
    #[arg(short, long, action = ArgAction::Count, global = true)]
    verbose: u8,
    /// Only print errors.
    #[arg(short, long, global = true, conflicts_with = "verbose")]
    quiet: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Write a synthetic exactly low-rank image.
    Synth(SynthArgs),
    /// Add band-wise Gaussian noise with deviations drawn from U[0, sigma-max].
    Noise(NoiseArgs),
    /// Denoise an image with the iterative solver or a trained network.
    #[command(after_help = "The classic sparsity weight defaults to factor * MAD(coefficients) / 0.6745. \
With automatic rank the subspace dimension is capped at bands - 1, and a cube deeper than the rank is shrunk.")]
    Denoise(DenoiseArgs),
    /// Train a network on a directory of clean images.
    #[command(after_help = "Augmentation uses random flips and crops only (no resizing). \
Noise deviations are redrawn for every sample in every epoch. \
Adam constants: beta1 0.9, beta2 0.999, eps 1e-8. Thresholds start at 0.01 and are clamped at zero after each step.")]
    Train(TrainArgs),
    /// Compare a test image against a reference (MPSNR, SSIM, SAM).
    Eval(EvalArgs),
}

#[derive(Debug, Args)]
struct SynthArgs {
    #[arg(long)]
    out: PathBuf,
    /// Height,width,bands.
    #[arg(long, value_parser = parse_triple, default_value = "64,64,31")]
    dims: [usize; 3],
    #[arg(long, default_value_t = 5)]
    rank: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Debug, Args)]
struct NoiseArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    output: PathBuf,
    /// Largest per-band deviation, on the [0, 1] data scale.
    #[arg(long, default_value_t = 25.0 / 255.0)]
    sigma_max: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Mode {
    Classic,
    Net,
}

#[derive(Debug, Args)]
struct DenoiseArgs {
    #[arg(long, value_enum, default_value_t = Mode::Classic)]
    mode: Mode,
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    output: PathBuf,
    /// Subspace dimension: `auto` (noise-whitened estimate) or an integer.
    #[arg(long, value_parser = parse_rank, default_value = "auto")]
    rank: RankChoice,
    /// Fixed sparsity weight (classic). Default: MAD-scaled estimate.
    #[arg(long)]
    lambda: Option<f64>,
    /// Multiplier of the MAD-scaled sparsity weight (classic).
    #[arg(long, default_value_t = DEFAULT_LAMBDA_FACTOR, conflicts_with = "lambda")]
    lambda_factor: f64,
    /// Cube size (classic; the network reads it from the model).
    #[arg(long, value_parser = parse_triple, default_value = "9,9,9")]
    cube: [usize; 3],
    /// Dictionary atoms per mode (classic). Default: equal to the cube.
    #[arg(long, value_parser = parse_triple)]
    atoms: Option<[usize; 3]>,
    /// Cube strides. Default: half the spatial cube size, full depth.
    #[arg(long, value_parser = parse_triple)]
    stride: Option<[usize; 3]>,
    /// TISTA iteration cap (classic).
    #[arg(long, default_value_t = 200)]
    max_iters: usize,
    /// TISTA relative objective tolerance (classic).
    #[arg(long, default_value_t = 1e-6)]
    tol: f64,
    /// Trained model file; required with `--mode net`.
    #[arg(long, required_if_eq("mode", "net"))]
    model: Option<PathBuf>,
    /// Spatial tile size for the network.
    #[arg(long, default_value_t = TILE_SIZE)]
    tile: usize,
    /// Spatial tile stride for the network.
    #[arg(long, default_value_t = TILE_STRIDE)]
    tile_stride: usize,
}

#[derive(Debug, Args)]
struct TrainArgs {
    /// Directory of clean `.hsc` images.
    #[arg(long)]
    data_dir: PathBuf,
    /// Optional directory of fixed noisy counterparts with matching file names.
    #[arg(long)]
    noisy_dir: Option<PathBuf>,
    #[arg(long, default_value_t = 300)]
    epochs: usize,
    /// Stop after this many optimizer steps.
    #[arg(long)]
    max_steps: Option<usize>,
    #[arg(long, default_value_t = 2)]
    batch: usize,
    #[arg(long, default_value_t = 56)]
    patch: usize,
    /// Initial learning rate.
    #[arg(long, default_value_t = 5e-3)]
    lr: f64,
    /// Learning-rate multiplier applied every `--decay-every` epochs.
    #[arg(long, default_value_t = 0.35)]
    lr_decay: f64,
    #[arg(long, default_value_t = 80)]
    decay_every: usize,
    /// Largest per-band noise deviation, on the [0, 1] data scale.
    #[arg(long, default_value_t = 95.0 / 255.0)]
    sigma_max: f64,
    /// Unfolded layers.
    #[arg(long, default_value_t = 6)]
    k: usize,
    #[arg(long, value_parser = parse_triple, default_value = "9,9,9")]
    cube: [usize; 3],
    #[arg(long, value_parser = parse_triple, default_value = "9,9,9")]
    atoms: [usize; 3],
    /// Cube strides inside the network. Default: half the cube, full depth.
    #[arg(long, value_parser = parse_triple)]
    stride: Option<[usize; 3]>,
    #[arg(long, value_parser = parse_rank, default_value = "auto")]
    rank: RankChoice,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
    /// Loss history CSV. Default: `<out>.loss.csv`.
    #[arg(long)]
    loss_csv: Option<PathBuf>,
    /// Write a checkpoint every N epochs (0 disables).
    #[arg(long, default_value_t = 0)]
    checkpoint_every: usize,
    /// Continue from a saved model (and its `.adam` state when present).
    #[arg(long)]
    resume: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct EvalArgs {
    #[arg(long = "ref")]
    reference: PathBuf,
    #[arg(long)]
    test: PathBuf,
    /// Peak signal value for PSNR and SSIM.
    #[arg(long, default_value_t = 1.0)]
    peak: f64,
    /// Also print one PSNR line per band.
    #[arg(long)]
    per_band: bool,
    /// Human-readable output instead of CSV.
    #[arg(long)]
    pretty: bool,
}

fn parse_triple(s: &str) -> std::result::Result<[usize; 3], String> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    if parts.len() != 3 {
        return Err(format!("expected three comma-separated integers, got `{}`", s));
    }
    let mut out = [0usize; 3];
    for (o, p) in out.iter_mut().zip(parts) {
        *o = p.parse().map_err(|_| format!("`{}` is not a positive integer", p))?;
        if *o == 0 {
            return Err("sizes must be positive".into());
        }
    }
    Ok(out)
}

fn parse_rank(s: &str) -> std::result::Result<RankChoice, String> {
    if s.eq_ignore_ascii_case("auto") {
        return Ok(RankChoice::Auto);
    }
    match s.parse::<usize>() {
        Ok(r) if r > 0 => Ok(RankChoice::Fixed(r)),
        _ => Err(format!("rank must be `auto` or a positive integer, got `{}`", s)),
    }
}

/// Runs the tool on `args` (including the program name) and returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{}", e);
                return 0;
            }
            let text = e.render().to_string();
            let body = text.split("\nUsage:").next().unwrap_or("");
            let line: Vec<&str> = body.split_whitespace().collect();
            eprintln!("error[usage]: {}", line.join(" ").trim_start_matches("error: "));
            return 2;
        }
    };
    let level = match (cli.quiet, cli.verbose) {
        (true, _) => "error",
        (_, 0) => "warn",
        (_, 1) => "info",
        _ => "debug",
    };
    let _ = env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).try_init();

    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(n) = cli.threads {
        if n == 0 {
            eprintln!("error[usage]: --threads must be at least 1");
            return 2;
        }
        pool = pool.num_threads(n);
    }
    let pool = match pool.build() {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error[io]: cannot start thread pool: {}", e);
            return 1;
        }
    };
    match pool.install(|| dispatch(cli.command)) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error[{}]: {}", e.category(), e);
            if matches!(e, SmdsError::Config(_)) {
                2
            } else {
                1
            }
        }
    }
}

fn dispatch(cmd: Command) -> Result<()> {
    match cmd {
        Command::Synth(a) => synth(a),
        Command::Noise(a) => noise(a),
        Command::Denoise(a) => denoise(a),
        Command::Train(a) => train(a),
        Command::Eval(a) => eval(a),
    }
}

fn synth(a: SynthArgs) -> Result<()> {
    let spec = PhantomSpec::new(a.dims, a.rank, a.seed);
    let x = make_phantom(&spec)?;
    write_hsi(&a.out, &x)?;
    write_sidecar(
        &a.out,
        &HsiSidecar {
            provenance: Some(format!("phantom dims={:?} rank={} seed={}", a.dims, a.rank, a.seed)),
            ..Default::default()
        },
    )?;
    info!("wrote {:?} phantom of rank {} to {}", a.dims, a.rank, a.out.display());
    Ok(())
}

fn noise(a: NoiseArgs) -> Result<()> {
    let x = read_hsi(&a.input)?;
    let (y, sigmas) = synth_noise_seeded(&x, a.sigma_max, a.seed)?;
    write_hsi(&a.output, &y)?;
    let mut meta = read_sidecar(&a.input)?.unwrap_or_default();
    meta.provenance = Some(format!(
        "{} + gaussian noise sigma_max={} seed={}",
        a.input.display(),
        a.sigma_max,
        a.seed
    ));
    meta.sigmas = Some(sigmas);
    write_sidecar(&a.output, &meta)
}

fn denoise(a: DenoiseArgs) -> Result<()> {
    let y = read_hsi(&a.input)?;
    let x = match a.mode {
        Mode::Classic => {
            let cfg = ClassicConfig {
                rank: a.rank,
                cube: a.cube,
                strides: a.stride,
                atoms: a.atoms,
                lambda: match a.lambda {
                    Some(l) => LambdaChoice::Fixed(l),
                    None => LambdaChoice::Auto { factor: a.lambda_factor },
                },
                max_iters: a.max_iters,
                tol: a.tol,
            };
            let (x, report) = denoise_classic(&y, &cfg)?;
            info!(
                "rank {} cube {:?} cubes {} lambda {:.4e} mean iterations {:.1}",
                report.rank, report.cube, report.cubes, report.lambda, report.mean_iterations
            );
            x
        }
        Mode::Net => {
            let model = a
                .model
                .as_ref()
                .ok_or_else(|| SmdsError::Config("--mode net requires --model".into()))?;
            let (params, mut cfg) = load_params(model)?;
            if a.stride.is_some() {
                cfg.strides = a.stride;
            }
            denoise_net(&y, &params, &cfg, a.rank, a.tile, a.tile_stride)?
        }
    };
    write_hsi(&a.output, &x)
}

fn load_dataset(dir: &Path, noisy_dir: Option<&Path>) -> Result<HsiDataset> {
    let files = list_hsi_files(dir)?;
    if files.is_empty() {
        return Err(SmdsError::InvalidArgument(format!("no .hsc files in {}", dir.display())));
    }
    let mut samples = Vec::with_capacity(files.len());
    for f in files {
        let clean = read_hsi(&f)?;
        let noisy = match noisy_dir {
            Some(nd) => {
                let p = nd.join(f.file_name().expect("listed files have names"));
                let n = read_hsi(&p)?;
                clean.require_same_dims(&n)?;
                Some(n)
            }
            None => None,
        };
        samples.push(HsiSample { clean, noisy });
    }
    Ok(HsiDataset { samples })
}

fn with_suffix(path: &Path, suffix: &str) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(suffix);
    PathBuf::from(s)
}

fn train(a: TrainArgs) -> Result<()> {
    let dataset = load_dataset(&a.data_dir, a.noisy_dir.as_deref())?;
    let (params, mut net_cfg) = match &a.resume {
        Some(p) => load_params(p)?,
        None => {
            let mut cfg = NetConfig::new(a.cube, a.atoms, a.k)?;
            cfg.strides = a.stride;
            (init_params(&cfg)?, cfg)
        }
    };
    if a.resume.is_some() && a.stride.is_some() {
        net_cfg.strides = a.stride;
    }
    let adam = match &a.resume {
        Some(p) if with_suffix(p, ".adam").exists() => load_adam(with_suffix(p, ".adam"))?,
        _ => AdamState::for_params(&params),
    };
    let cfg = TrainConfig {
        epochs: a.epochs,
        batch_size: a.batch,
        patch: a.patch,
        lr0: a.lr,
        lr_decay: a.lr_decay,
        decay_every: a.decay_every,
        sigma_max: a.sigma_max,
        seed: a.seed,
        rank: a.rank,
        max_steps: a.max_steps,
        checkpoint_every: a.checkpoint_every,
        ..TrainConfig::default()
    };
    let out = a.out.clone();
    let ckpt_cfg = net_cfg;
    let mut hook = |epoch: usize, p: &crate::net::NetParams, s: &AdamState| -> Result<()> {
        let path = with_suffix(&out, &format!(".epoch{}", epoch));
        save_params(p, &ckpt_cfg, &path)?;
        save_adam(s, with_suffix(&path, ".adam"))?;
        info!("checkpoint {}", path.display());
        Ok(())
    };
    let outcome = train_loop_from(&dataset, &net_cfg, &cfg, params, adam, Some(&mut hook))?;
    save_params(&outcome.params, &net_cfg, &a.out)?;
    save_adam(&outcome.adam, with_suffix(&a.out, ".adam"))?;
    let csv = a.loss_csv.unwrap_or_else(|| with_suffix(&a.out, ".loss.csv"));
    write_loss_csv(&csv, &outcome.history)?;
    if let (Some(first), Some(last)) = (outcome.history.first(), outcome.history.last()) {
        info!("{} steps, loss {:.6} -> {:.6}", outcome.history.len(), first.loss, last.loss);
    }
    Ok(())
}

fn eval(a: EvalArgs) -> Result<()> {
    let reference = read_hsi(&a.reference)?;
    let test = read_hsi(&a.test)?;
    let r = evaluate(&reference, &test, a.peak)?;
    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    if a.pretty {
        writeln!(out, "psnr={:.2} ssim={:.4} sam={:.4}", r.psnr, r.ssim, r.sam)?;
        if a.per_band {
            for (b, p) in r.per_band_psnr.iter().enumerate() {
                writeln!(out, "band {} psnr={:.2}", b, p)?;
            }
        }
    } else {
        writeln!(out, "psnr_db,ssim,sam_rad")?;
        writeln!(out, "{},{},{}", r.psnr, r.ssim, r.sam)?;
        if a.per_band {
            writeln!(out, "band,psnr_db")?;
            for (b, p) in r.per_band_psnr.iter().enumerate() {
                writeln!(out, "{},{}", b, p)?;
            }
        }
    }
    Ok(())
}
