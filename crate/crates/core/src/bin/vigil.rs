use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use log::info;

use vigil::fuzzy::FcmParams;
use vigil::pipeline::{emit_plot_data, emit_report, run_pipeline, PipelineConfig, ReportFormat};
use vigil::spectral::EpochMode;

#[derive(Parser)]
#[command(
    name = "vigil",
    version,
    about = "EEG drowsiness scoring for EDF recordings"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Copy, Clone, Debug, ValueEnum)]
enum Mode {
    Start,
    Middle,
    End,
    All,
}

#[derive(Copy, Clone, Debug, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// Score every epoch of an EDF recording.
    Analyze {
        input: PathBuf,
        /// `ROLE = LABEL` file; defaults to the sleep-EDF montage.
        #[arg(long)]
        channel_map: Option<PathBuf>,
        /// Rule-base override, one `A=S & V=S & D=S -> DS=S` rule per line.
        #[arg(long)]
        rules: Option<PathBuf>,
        #[arg(long, default_value_t = 20.0)]
        epoch_seconds: f64,
        #[arg(long, value_enum, default_value_t = Mode::All)]
        epoch_mode: Mode,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
        /// Also write time-series plot data under `<out>/plots`.
        #[arg(long)]
        plots: bool,
        #[arg(long, default_value = ".")]
        out: PathBuf,
        #[arg(long, default_value_t = 1e-6)]
        fcm_tol: f64,
        #[arg(long, default_value_t = 300)]
        fcm_max_iter: usize,
    },
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("VIGIL_LOG", "warn"))
        .target(env_logger::Target::Stderr)
        .init();

    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };

    let Command::Analyze {
        input,
        channel_map,
        rules,
        epoch_seconds,
        epoch_mode,
        format,
        plots,
        out,
        fcm_tol,
        fcm_max_iter,
    } = cli.command;

    let config = PipelineConfig {
        input,
        channel_map,
        rules,
        epoch_seconds,
        epoch_mode: match epoch_mode {
            Mode::Start => EpochMode::Start,
            Mode::Middle => EpochMode::Middle,
            Mode::End => EpochMode::End,
            Mode::All => EpochMode::All,
        },
        out_dir: out,
        format: match format {
            Format::Csv => ReportFormat::Csv,
            Format::Json => ReportFormat::Json,
        },
        plots,
        fcm: FcmParams {
            tol: fcm_tol,
            max_iter: fcm_max_iter,
            ..FcmParams::default()
        },
    };

    let result = run_pipeline(&config).and_then(|(recording, report)| {
        let path = emit_report(&report, config.format, &config.out_dir)?;
        info!("wrote {}", path.display());
        if config.plots {
            let files = emit_plot_data(&report, &recording, &config.out_dir)?;
            info!("wrote {} plot files", files.len());
        }
        Ok(())
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
