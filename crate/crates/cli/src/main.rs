//! `movsrc` command-line front end.
//!
//! Exit codes: 0 success, 1 runtime failure, 2 usage or invalid input,
//! 3 I/O error, 4 oracle budget refusal.

use clap::{Args, Parser, Subcommand, ValueEnum};
use movsrc::engine::{self, Mode};
use movsrc::farrow::{self, DesignGrid};
use movsrc::io::{self, Audio};
use movsrc::metrics::{self, CompareOptions};
use movsrc::{room, synth, trajectory, EngineConfig};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Debug, thiserror::Error)]
enum CliError {
    #[error(transparent)]
    Core(#[from] movsrc::Error),
    #[error("{0}")]
    Usage(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        use movsrc::Error as E;
        match self {
            CliError::Usage(_) => 2,
            CliError::Core(e) => match e {
                E::Io(_) | E::Wav(_) => 3,
                E::BudgetExceeded { .. } => 4,
                E::InvalidArgument(_)
                | E::InvalidRoom(_)
                | E::Domain(_)
                | E::Parse { .. }
                | E::InfeasibleTrajectory(_)
                | E::SingularDesign(_) => 2,
                _ => 1,
            },
        }
    }
}

type Result<T> = std::result::Result<T, CliError>;

#[derive(Parser)]
#[command(name = "movsrc", version, about = "Moving-source room reverberation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Design a Farrow filter and write its coefficient matrix.
    Design(DesignArgs),
    /// Generate a source trajectory table.
    Trajectory(TrajectoryArgs),
    /// Render a moving source.
    Simulate(SimulateArgs),
    /// Compare two renders (the second is the reference).
    Compare(CompareArgs),
    /// Distance-evaluation counts, naive vs hierarchical.
    Cost(CostArgs),
}

#[derive(Args)]
struct DesignArgs {
    /// Polynomial order (1 to 4).
    #[arg(long = "M", default_value_t = farrow::DEFAULT_POLY_ORDER)]
    poly_order: usize,
    /// Taps per branch.
    #[arg(long = "L", default_value_t = farrow::DEFAULT_BRANCH_LEN)]
    branch_len: usize,
    /// Passband edge as a fraction of Nyquist.
    #[arg(long, default_value_t = farrow::DEFAULT_PASSBAND)]
    alpha: f64,
    #[arg(long, short)]
    out: PathBuf,
}

/// Config file plus `key=value` overrides.
#[derive(Args, Clone)]
struct ConfigArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    /// Override any config key, e.g. `--set synth.N=1600`.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    #[arg(long)]
    seed: Option<u64>,
}

impl ConfigArgs {
    fn load(&self) -> Result<EngineConfig> {
        let mut cfg = match &self.config {
            Some(p) => EngineConfig::load(p)?,
            None => EngineConfig::default(),
        };
        for o in &self.overrides {
            let (k, v) = o
                .split_once('=')
                .ok_or_else(|| CliError::Usage(format!("--set expects KEY=VALUE, got `{o}`")))?;
            cfg.set(k.trim(), v.trim())?;
        }
        if let Some(s) = self.seed {
            cfg.seed = s;
        }
        Ok(cfg)
    }
}

#[derive(Args)]
struct TrajectoryArgs {
    #[command(flatten)]
    config: ConfigArgs,
    /// static, line, circle, sine, waypoints or noise.
    #[arg(long)]
    kind: Option<String>,
    #[arg(long)]
    duration: Option<f64>,
    #[arg(long)]
    speed: Option<f64>,
    #[arg(long)]
    bandwidth: Option<f64>,
    #[arg(long)]
    frequency: Option<f64>,
    #[arg(long, short)]
    out: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Hierarchical,
    Oracle,
    Splice,
    Static,
}

#[derive(Args)]
struct SimulateArgs {
    #[command(flatten)]
    config: ConfigArgs,
    #[arg(long, value_enum, default_value = "hierarchical")]
    mode: ModeArg,
    /// Dry input, mono WAV at the audio rate.
    #[arg(long, conflicts_with = "tone")]
    input: Option<PathBuf>,
    /// Use a sine of this frequency (Hz) as input, as long as the trajectory.
    #[arg(long)]
    tone: Option<f64>,
    #[arg(long, short)]
    out: Option<PathBuf>,
    /// Trajectory decimation factor for high-order images.
    #[arg(long = "N")]
    decimation: Option<usize>,
    /// Highest order computed at the full rate.
    #[arg(long = "K")]
    order_split: Option<u32>,
    #[arg(long)]
    max_order: Option<u32>,
    /// Splice mode RIR update rate.
    #[arg(long, default_value_t = 25.0)]
    hop_hz: f64,
    /// Splice mode crossfade, samples.
    #[arg(long, default_value_t = 0)]
    crossfade: usize,
    #[arg(long)]
    workers: Option<usize>,
    /// Write `n,d_i,tau_i,A_i` for this image index.
    #[arg(long)]
    dump_image: Option<usize>,
    /// CSV path for --dump-image (default: output path with .csv).
    #[arg(long, requires = "dump_image")]
    dump_csv: Option<PathBuf>,
}

#[derive(Args)]
struct CompareArgs {
    a: PathBuf,
    /// Reference.
    b: PathBuf,
    #[arg(long, default_value_t = 0.8)]
    passband: f64,
    /// Samples excluded at each end.
    #[arg(long, default_value_t = 1024)]
    margin: usize,
    #[arg(long)]
    report: Option<PathBuf>,
    #[arg(long)]
    csv: Option<PathBuf>,
}

#[derive(Args)]
struct CostArgs {
    #[command(flatten)]
    config: ConfigArgs,
    #[arg(long, default_value_t = 1.0)]
    duration: f64,
    #[arg(long = "N")]
    decimation: Option<usize>,
    #[arg(long = "K")]
    order_split: Option<u32>,
    #[arg(long)]
    max_order: Option<u32>,
    /// Size the image set from the reverberation time instead of the order.
    #[arg(long)]
    t60: Option<f64>,
    /// Explicit total image count (overrides --t60 and --max-order).
    #[arg(long)]
    images: Option<u64>,
    /// Explicit full-rate image count, with --images.
    #[arg(long, requires = "images")]
    low_images: Option<u64>,
}

fn cmd_design(a: &DesignArgs) -> Result<()> {
    let f = farrow::design(a.poly_order, a.branch_len, a.alpha, DesignGrid::default())?;
    std::fs::write(&a.out, f.to_matrix()).map_err(movsrc::Error::from)?;
    let q = f.quality(a.alpha, 101, 801);
    println!("poly_order={}", f.poly_order());
    println!("branch_len={}", f.branch_len());
    println!("nominal_delay={}", f.nominal_delay());
    println!("max_group_delay_error={:e}", q.max_group_delay_error);
    println!("max_phase_delay_error={:e}", q.max_phase_delay_error);
    println!("max_ripple_db={:e}", q.max_ripple_db);
    println!("max_complex_error={:e}", q.max_complex_error);
    Ok(())
}

fn cmd_trajectory(a: &TrajectoryArgs) -> Result<()> {
    let mut cfg = a.config.load()?;
    if let Some(k) = &a.kind {
        cfg.source.kind = k.clone();
    }
    if let Some(v) = a.duration {
        cfg.source.duration = v;
    }
    if let Some(v) = a.speed {
        cfg.source.speed = v;
    }
    if let Some(v) = a.bandwidth {
        cfg.source.bandwidth = v;
    }
    if let Some(v) = a.frequency {
        cfg.source.frequency = v;
    }
    cfg.source.file = None;
    let scene = cfg.scene()?;
    let traj = engine::build_trajectory(&cfg, &scene)?;
    std::fs::write(&a.out, traj.to_table()).map_err(movsrc::Error::from)?;
    println!("samples={}", traj.len());
    println!(
        "bandwidth_hz={}",
        trajectory::bandwidth_estimate(&traj, trajectory::DEFAULT_ENERGY_FRACTION)?
    );
    println!("max_speed={}", trajectory::max_speed(&traj));
    Ok(())
}

fn audio_rate(rate: f64) -> Result<u32> {
    if rate.fract() != 0.0 || rate <= 0.0 || rate > u32::MAX as f64 {
        return Err(CliError::Usage(format!("audio rate {rate} is not a positive integer")));
    }
    Ok(rate as u32)
}

fn with_extension(p: &Path, ext: &str) -> PathBuf {
    p.with_extension(ext)
}

fn cmd_simulate(a: &SimulateArgs) -> Result<()> {
    let mut cfg = a.config.load()?;
    if let Some(v) = a.decimation {
        cfg.synth.decimation = v;
    }
    if let Some(v) = a.order_split {
        cfg.synth.order_split = v;
    }
    if let Some(v) = a.max_order {
        cfg.synth.max_order = v;
    }
    if let Some(v) = a.workers {
        cfg.synth.workers = v;
    }
    cfg.synth.validate()?;
    let rate = audio_rate(cfg.synth.audio_rate)?;
    let out = a
        .out
        .clone()
        .or_else(|| cfg.output.clone())
        .ok_or_else(|| CliError::Usage("no output path (use --out or `output =`)".into()))?;

    let scene = cfg.scene()?;
    let traj = engine::build_trajectory(&cfg, &scene)?;
    let input = match (&a.input, a.tone, &cfg.input) {
        (_, Some(f), _) => (0..traj.len())
            .map(|n| (2.0 * std::f64::consts::PI * f * n as f64 / cfg.synth.audio_rate).sin())
            .collect(),
        (Some(p), None, _) | (None, None, Some(p)) => {
            let audio = io::read_wav(p)?;
            if audio.rate != rate {
                return Err(CliError::Usage(format!(
                    "{}: sample rate {} differs from audio rate {rate}",
                    p.display(),
                    audio.rate
                )));
            }
            audio.samples
        }
        (None, None, None) => {
            return Err(CliError::Usage("no input (use --input, --tone or `input =`)".into()))
        }
    };

    let mode = match a.mode {
        ModeArg::Hierarchical => Mode::Hierarchical,
        ModeArg::Oracle => Mode::Oracle,
        ModeArg::Static => Mode::Static,
        ModeArg::Splice => {
            if !a.hop_hz.is_finite() || a.hop_hz <= 0.0 {
                return Err(CliError::Usage("--hop-hz must be positive".into()));
            }
            let hop = (cfg.synth.audio_rate / a.hop_hz).round().max(1.0) as usize;
            Mode::Splice {
                hop,
                crossfade: a.crossfade,
            }
        }
    };
    let filter = engine::build_filter(&cfg.farrow)?;
    let rendered = engine::render(mode, &input, &traj, &scene, &filter, &cfg.synth)?;
    io::write_wav(
        &out,
        &Audio {
            rate,
            samples: rendered.audio.clone(),
        },
    )?;

    if let Some(index) = a.dump_image {
        let streams = rendered.streams.as_ref().ok_or_else(|| {
            CliError::Usage(format!("--dump-image needs a moving mode, not {}", mode.name()))
        })?;
        let path = a.dump_csv.clone().unwrap_or_else(|| with_extension(&out, "csv"));
        std::fs::write(&path, io::debug_csv(streams, index)?).map_err(movsrc::Error::from)?;
    }

    println!("mode={}", mode.name());
    println!("samples={}", rendered.audio.len());
    if let Some(c) = rendered.cost {
        println!("images={}", c.low_images + c.high_images);
        print_cost(&c);
    }
    Ok(())
}

fn cmd_compare(a: &CompareArgs) -> Result<()> {
    let x = io::read_wav(&a.a)?;
    let y = io::read_wav(&a.b)?;
    if x.rate != y.rate {
        return Err(CliError::Usage(format!("sample rates differ: {} vs {}", x.rate, y.rate)));
    }
    let opts = CompareOptions {
        rate: f64::from(x.rate),
        passband: a.passband,
        margin: a.margin,
        ..Default::default()
    };
    let mut r = metrics::compare(&x.samples, &y.samples, &opts)?;
    r.counts.insert("samples_a".into(), x.samples.len() as u64);
    r.counts.insert("samples_b".into(), y.samples.len() as u64);
    let record = r.to_record();
    print!("{record}");
    if let Some(p) = &a.report {
        std::fs::write(p, &record).map_err(movsrc::Error::from)?;
    }
    if let Some(p) = &a.csv {
        std::fs::write(p, r.to_csv()).map_err(movsrc::Error::from)?;
    }
    Ok(())
}

fn print_cost(c: &synth::CostReport) {
    println!("low_images={}", c.low_images);
    println!("high_images={}", c.high_images);
    println!("naive={}", c.naive);
    println!("hierarchical={}", c.hierarchical);
    println!("ratio={}", c.ratio);
    println!("high_order_ratio={}", c.high_order_ratio);
}

fn cmd_cost(a: &CostArgs) -> Result<()> {
    let mut cfg = a.config.load()?;
    if let Some(v) = a.decimation {
        cfg.synth.decimation = v;
    }
    if let Some(v) = a.order_split {
        cfg.synth.order_split = v;
    }
    if let Some(v) = a.max_order {
        cfg.synth.max_order = v;
    }
    cfg.synth.validate()?;
    let r = cfg.room()?;
    let report = if let Some(total) = a.images {
        let low = a.low_images.unwrap_or(0).min(total);
        synth::cost_report_counts(&cfg.synth, low, total - low, a.duration)
    } else if let Some(t60) = a.t60 {
        let total = room::estimate_image_count(&r, t60, cfg.synth.sound_speed)?;
        let low = room::enumerate_images(&r, cfg.synth.order_split).len() as u64;
        synth::cost_report_counts(&cfg.synth, low.min(total), total - low.min(total), a.duration)
    } else {
        let images = room::enumerate_images(&r, cfg.synth.max_order);
        synth::cost_report(&cfg.synth, &images, a.duration)
    };
    print_cost(&report);
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Design(a) => cmd_design(&a),
        Command::Trajectory(a) => cmd_trajectory(&a),
        Command::Simulate(a) => cmd_simulate(&a),
        Command::Compare(a) => cmd_compare(&a),
        Command::Cost(a) => cmd_cost(&a),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            if matches!(e, CliError::Core(movsrc::Error::BudgetExceeded { .. })) {
                eprintln!("the full-rate oracle was refused; raise synth.oracle_budget or shorten the job");
            }
            ExitCode::from(e.exit_code())
        }
    }
}
