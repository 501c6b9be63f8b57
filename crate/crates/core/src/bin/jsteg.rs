use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use jsteg::commands::{
    cmd_compress, cmd_embed, cmd_estimate_si, cmd_evaluate, cmd_sweep, EmbedConfig, EmbedInputs, EmbedMode,
    EstimatorSpec, SweepGrid,
};
use jsteg::costs::{EsiParams, DEFAULT_SMOOTH_RADIUS, DEFAULT_SMOOTH_SIGMA};
use jsteg::experiment::{CostSource, Smoothing};

/// JPEG steganography lab: compression, cost-based embedding, side-information, detection.
#[derive(Parser)]
#[command(name = "jsteg", version)]
struct Cli {
    /// Overwrite existing outputs.
    #[arg(long, global = true)]
    force: bool,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Sym,
    Si,
    Esi,
}

#[derive(Clone, Copy, ValueEnum)]
enum Source {
    Flat,
    Energy,
}

#[derive(Subcommand)]
enum Cmd {
    /// PGM → rounded (`.C.grid`) and non-rounded (`.U.grid`) DCT planes.
    Compress {
        input: PathBuf,
        #[arg(long, default_value_t = 75)]
        qf: u32,
        /// Output prefix; defaults to the input path without extension.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Embeds a simulated payload into a rounded plane.
    Embed {
        cover: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 0.4)]
        payload: f64,
        #[arg(long, value_enum, default_value_t = Mode::Sym)]
        mode: Mode,
        #[arg(long, default_value_t = EsiParams::default().delta)]
        delta: f64,
        #[arg(long, default_value_t = EsiParams::default().eta)]
        eta: f64,
        #[arg(long, default_value_t = DEFAULT_SMOOTH_SIGMA)]
        smooth_sigma: f64,
        #[arg(long, default_value_t = DEFAULT_SMOOTH_RADIUS)]
        smooth_radius: usize,
        #[arg(long)]
        no_smooth: bool,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// float32 map of total change probabilities.
        #[arg(long, conflicts_with = "costs")]
        probs: Option<PathBuf>,
        /// float32 map of symmetric costs.
        #[arg(long)]
        costs: Option<PathBuf>,
        /// Built-in cost model used without --probs/--costs.
        #[arg(long, value_enum, default_value_t = Source::Energy)]
        cost_source: Source,
        /// Precover (PGM, spatial grid or non-rounded plane) for si/esi.
        #[arg(long)]
        precover: Option<PathBuf>,
        /// Precomputed side-information map.
        #[arg(long)]
        side_info: Option<PathBuf>,
        /// Report path; defaults to `<out>.json`.
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Estimates side-information from a rounded plane.
    EstimateSi {
        cover: PathBuf,
        #[arg(long, default_value = "baseline:0.8")]
        estimator: String,
        #[arg(long)]
        out: PathBuf,
        /// True precover or non-rounded plane, for polarity agreement.
        #[arg(long)]
        precover: Option<PathBuf>,
    },
    /// Trains and scores the detector on paired cover/stego directories.
    Evaluate {
        cover_dir: PathBuf,
        stego_dir: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Runs a TOML parameter grid; resumable.
    Sweep { grid: PathBuf, out_dir: PathBuf },
}

fn run(cli: Cli) -> jsteg::Result<()> {
    let force = cli.force;
    match cli.cmd {
        Cmd::Compress { input, qf, out } => {
            let prefix = out.unwrap_or_else(|| input.with_extension(""));
            let r = cmd_compress(&input, qf, &prefix, force)?;
            println!("{}", serde_json::to_string_pretty(&r)?);
        }
        Cmd::Embed {
            cover,
            out,
            payload,
            mode,
            delta,
            eta,
            smooth_sigma,
            smooth_radius,
            no_smooth,
            seed,
            probs,
            costs,
            cost_source,
            precover,
            side_info,
            report,
        } => {
            let cfg = EmbedConfig {
                payload,
                mode: match mode {
                    Mode::Sym => EmbedMode::Sym,
                    Mode::Si => EmbedMode::Si,
                    Mode::Esi => EmbedMode::Esi,
                },
                esi: EsiParams::new(delta, eta)?,
                cost_source: match cost_source {
                    Source::Flat => CostSource::Flat,
                    Source::Energy => CostSource::Energy,
                },
                smoothing: (!no_smooth).then_some(Smoothing {
                    sigma: smooth_sigma,
                    radius: smooth_radius,
                }),
                seed,
            };
            let inputs = EmbedInputs {
                cover,
                precover,
                side_info,
                probs,
                costs,
                out,
                report,
            };
            let r = cmd_embed(&cfg, &inputs, force)?;
            println!("{}", serde_json::to_string_pretty(&r)?);
        }
        Cmd::EstimateSi {
            cover,
            estimator,
            out,
            precover,
        } => {
            let spec: EstimatorSpec = estimator.parse()?;
            let r = cmd_estimate_si(&cover, &spec, precover.as_deref(), &out, force)?;
            println!("{}", serde_json::to_string_pretty(&r)?);
        }
        Cmd::Evaluate {
            cover_dir,
            stego_dir,
            seed,
            out,
        } => {
            let r = cmd_evaluate(&cover_dir, &stego_dir, seed, &out, force)?;
            println!("{}", serde_json::to_string_pretty(&r.detection)?);
        }
        Cmd::Sweep { grid, out_dir } => {
            let grid = SweepGrid::from_toml(&std::fs::read_to_string(&grid)?)?;
            let s = cmd_sweep(&grid, &out_dir, force)?;
            print!("{}", std::fs::read_to_string(&s.table)?);
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
