//! `dfrt`: offline WAV enhancement, RTF benchmarking and the live control service.
//!
//! Exit codes: 0 success, 1 I/O failure, 2 invalid invocation.

mod wav;

use std::fs::File;
use std::io::{BufWriter, Write};
use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::Parser;
use dfrt_control::{LoopSource, Service};
use dfrt_core::engine::{Engine, EngineConfig, MeterFrame, RtfReport};
use dfrt_core::estimators::EstimatorKind;
use dfrt_core::stage_control::{AttenLimit, GateThresholds};

pub const METERS_HEADER: &str = "frame_index,xi_db,decision,mean_gain,df_delta_db,in_rms_db,out_rms_db";

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Io(String),
    #[error("{0}")]
    Usage(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Io(_) => 1,
            CliError::Usage(_) => 2,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "dfrt", version, about = "Real-time two-stage speech enhancement (48 kHz mono WAV)")]
struct Args {
    /// Noisy input WAV (mono, 48 kHz, PCM16 or float32).
    #[arg(long)]
    input: Option<PathBuf>,
    /// Enhanced output WAV; same length and sample format as the input.
    #[arg(long)]
    output: Option<PathBuf>,
    /// Clean reference WAV aligned with the input (required by the oracle estimator).
    #[arg(long)]
    clean: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Estimator::Blind)]
    estimator: Estimator,
    /// Maximum attenuation in dB; 0 disables suppression.
    #[arg(long, default_value_t = AttenLimit::default().max_atten_db)]
    atten_db: f32,
    /// Frames with local SNR below this are replaced by the silent spectrum.
    #[arg(long, default_value_t = GateThresholds::default().silence_below_db, allow_negative_numbers = true)]
    silence_below_db: f32,
    /// Frames with local SNR above this skip the deep filter.
    #[arg(long, default_value_t = GateThresholds::default().df_off_above_db, allow_negative_numbers = true)]
    df_off_above_db: f32,
    /// Disable the ERB gain stage.
    #[arg(long)]
    no_erb: bool,
    /// Disable the deep filter stage.
    #[arg(long)]
    no_df: bool,
    /// Print a one-line real-time-factor report to stdout.
    #[arg(long)]
    rtf: bool,
    /// Write per-hop meters as CSV.
    #[arg(long, value_name = "PATH")]
    meters: Option<PathBuf>,
    /// Run the live control service on ADDR instead of processing a file.
    #[arg(long, value_name = "ADDR")]
    serve: Option<SocketAddr>,
    /// WAV file looped as the live source in serve mode.
    #[arg(long, value_name = "PATH")]
    loop_file: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
enum Estimator {
    Passthrough,
    Blind,
    Oracle,
}

impl From<Estimator> for EstimatorKind {
    fn from(e: Estimator) -> Self {
        match e {
            Estimator::Passthrough => EstimatorKind::Passthrough,
            Estimator::Blind => EstimatorKind::Blind,
            Estimator::Oracle => EstimatorKind::Oracle,
        }
    }
}

fn engine_config(args: &Args) -> Result<EngineConfig, CliError> {
    let usage = |e: dfrt_core::error::DspError| CliError::Usage(e.to_string());
    let mut cfg = EngineConfig::default().with_estimator(args.estimator.into());
    cfg.atten = AttenLimit::new(args.atten_db).map_err(usage)?;
    cfg.thresholds = GateThresholds::new(args.silence_below_db, args.df_off_above_db).map_err(usage)?;
    cfg.stages.erb_enabled = !args.no_erb;
    cfg.stages.df_enabled = !args.no_df;
    Ok(cfg)
}

fn required<'a>(p: &'a Option<PathBuf>, flag: &str) -> Result<&'a Path, CliError> {
    p.as_deref().ok_or_else(|| CliError::Usage(format!("{flag} is required")))
}

fn write_meters(path: &Path, meters: &[MeterFrame]) -> Result<(), CliError> {
    let io = |e: std::io::Error| CliError::Io(format!("cannot write {}: {e}", path.display()));
    let mut w = BufWriter::new(File::create(path).map_err(io)?);
    writeln!(w, "{METERS_HEADER}").map_err(io)?;
    for m in meters {
        writeln!(
            w,
            "{},{},{},{},{},{},{}",
            m.frame_index,
            m.xi_db,
            m.decision.as_str(),
            m.mean_gain,
            m.df_delta_db,
            m.in_rms_db,
            m.out_rms_db
        )
        .map_err(io)?;
    }
    w.flush().map_err(io)
}

fn run_offline(args: &Args, cfg: EngineConfig) -> Result<(), CliError> {
    let input = required(&args.input, "--input")?;
    let output = required(&args.output, "--output")?;
    if cfg.estimator_kind == EstimatorKind::Oracle && args.clean.is_none() {
        return Err(CliError::Usage("--estimator oracle requires --clean PATH".into()));
    }
    let noisy = wav::read_wav(input)?;
    let clean = match &args.clean {
        Some(p) => {
            let c = wav::read_wav(p)?;
            if c.samples.len() != noisy.samples.len() {
                return Err(CliError::Usage(format!(
                    "clean reference has {} samples, input has {}",
                    c.samples.len(),
                    noisy.samples.len()
                )));
            }
            Some(c.samples)
        }
        None => None,
    };
    let mut engine = if clean.is_some() { Engine::with_reference(cfg) } else { Engine::new(cfg) }
        .map_err(|e| CliError::Usage(e.to_string()))?;
    engine.set_timing(args.rtf);

    let started = Instant::now();
    let result = engine
        .process_buffer(&noisy.samples, clean.as_deref(), args.meters.is_some())
        .map_err(|e| CliError::Usage(e.to_string()))?;
    let wall = started.elapsed().as_secs_f64();
    if result.non_finite_hops > 0 {
        log::warn!("{} hops contained non-finite samples and were processed as silence", result.non_finite_hops);
    }

    wav::write_wav(output, &result.samples, noisy.format)?;
    if let Some(p) = &args.meters {
        write_meters(p, &result.meters)?;
    }
    if args.rtf {
        let audio = noisy.samples.len() as f64 / wav::REQUIRED_RATE as f64;
        let report = RtfReport {
            processed_audio_s: audio,
            wall_time_s: wall,
            rtf: if audio > 0.0 { wall / audio } else { 0.0 },
            stages: engine.stage_times().unwrap_or_default(),
        };
        println!("{report}");
    }
    Ok(())
}

fn run_serve(args: &Args, addr: SocketAddr, cfg: EngineConfig) -> Result<(), CliError> {
    if cfg.estimator_kind == EstimatorKind::Oracle {
        return Err(CliError::Usage("the oracle estimator needs a clean reference and cannot run live".into()));
    }
    let path = args
        .loop_file
        .as_deref()
        .or(args.input.as_deref())
        .ok_or_else(|| CliError::Usage("--serve needs --loop-file PATH".into()))?;
    let audio = wav::read_wav(path)?;
    let source = LoopSource::new(audio.samples, path.display().to_string())
        .ok_or_else(|| CliError::Usage(format!("{}: file has no samples", path.display())))?;
    let engine = Engine::new(cfg).map_err(|e| CliError::Usage(e.to_string()))?;
    let rt = tokio::runtime::Runtime::new().map_err(|e| CliError::Io(format!("runtime: {e}")))?;
    rt.block_on(async move {
        let svc = Service::start(engine, Box::new(source), addr).await.map_err(|e| CliError::Io(e.to_string()))?;
        eprintln!("listening on ws://{}/control (Ctrl-C to stop)", svc.local_addr());
        let _ = tokio::signal::ctrl_c().await;
        svc.shutdown().await;
        Ok(())
    })
}

fn run(args: &Args) -> Result<(), CliError> {
    let cfg = engine_config(args)?;
    match args.serve {
        Some(addr) => run_serve(args, addr, cfg),
        None => run_offline(args, cfg),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let args = Args::parse();
    match run(&args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("dfrt: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
