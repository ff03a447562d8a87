use battleflow::cli::{run, validate_only, DumpStage, PipelineConfig};
use clap::{Parser, Subcommand};
use std::path::PathBuf;
use std::process::ExitCode;

/// Battle-map generation from match telemetry.
#[derive(Parser)]
#[command(name = "battleflow", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Render a battle map from a telemetry JSON file.
    Render {
        /// Input match log (schema 1 JSON).
        input: PathBuf,
        /// Output SVG path.
        #[arg(short, long, default_value = "map.svg")]
        out: PathBuf,
        /// Territory seed clustering radius in world units
        /// (default: 5% of the map diagonal).
        #[arg(long)]
        cell_radius: Option<f64>,
        /// Heading change that counts as a turn, degrees.
        #[arg(long, default_value_t = 30.0)]
        turn_angle: f64,
        /// Speed below which a unit counts as stopped, units/s.
        #[arg(long, default_value_t = 0.5)]
        stop_speed: f64,
        /// Minimum duration of a stop episode, seconds.
        #[arg(long, default_value_t = 5.0)]
        stop_duration: f64,
        /// Dwell that splits a trajectory into episodes, seconds.
        #[arg(long, default_value_t = 60.0)]
        idle_gap: f64,
        /// Route similarity threshold in [0, 1] for grouping.
        #[arg(long, default_value_t = 0.5)]
        tau: f64,
        /// Only merge movements into one flow graph when their time spans
        /// overlap within this window, seconds (default: merge all).
        #[arg(long)]
        time_window: Option<f64>,
        /// Combat clustering radius in world units
        /// (default: 4% of the map diagonal).
        #[arg(long)]
        combat_eps: Option<f64>,
        /// Minimum events per combat site.
        #[arg(long, default_value_t = 3)]
        min_pts: usize,
        /// Distance beyond which an attack renders as a long-range arrow
        /// (default: 25% of the map diagonal).
        #[arg(long)]
        range_threshold: Option<f64>,
        /// Band width of the maximum troop size, world units.
        #[arg(long, default_value_t = 12.0)]
        band_max_width: f64,
        /// Draw one width-growing arrow per representative trajectory
        /// instead of merged flow bands.
        #[arg(long)]
        legacy_arrows: bool,
        /// Write an intermediate artifact next to the SVG (repeatable).
        #[arg(long, value_enum)]
        dump: Vec<DumpStage>,
    },
    /// Parse and validate a telemetry file without rendering.
    Validate {
        /// Input match log (schema 1 JSON).
        input: PathBuf,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Render {
            input,
            out,
            cell_radius,
            turn_angle,
            stop_speed,
            stop_duration,
            idle_gap,
            tau,
            time_window,
            combat_eps,
            min_pts,
            range_threshold,
            band_max_width,
            legacy_arrows,
            dump,
        } => {
            let mut config = PipelineConfig::new(input, out);
            config.cell_radius = cell_radius;
            config.turn_angle = turn_angle;
            config.stop_speed = stop_speed;
            config.stop_duration = stop_duration;
            config.idle_gap = idle_gap;
            config.tau = tau;
            config.time_window = time_window;
            config.combat_eps = combat_eps;
            config.min_pts = min_pts;
            config.range_threshold = range_threshold;
            config.band_max_width = band_max_width;
            config.legacy_arrows = legacy_arrows;
            config.dumps = dump.into_iter().collect();
            match run(&config) {
                Ok(_) => ExitCode::SUCCESS,
                Err(e) => {
                    eprintln!("error: {e}");
                    ExitCode::from(e.exit_code() as u8)
                }
            }
        }
        Command::Validate { input } => match validate_only(&input) {
            Ok(log) => {
                println!(
                    "ok: {} ({} teams, {} units, {} events)",
                    log.map_name,
                    log.teams.len(),
                    log.units.len(),
                    log.combat_events.len()
                );
                ExitCode::SUCCESS
            }
            Err(e) => {
                eprintln!("error: {e}");
                ExitCode::from(e.exit_code() as u8)
            }
        },
    }
}
