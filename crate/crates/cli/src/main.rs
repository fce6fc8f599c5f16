mod commands;
mod error;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use error::{CliError, EXIT_USAGE};

#[derive(Parser)]
#[command(name = "leeway", version, about = "Force mapping, drift-compensated waypoint navigation and coverage planning")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Fit a force map from a sensor log and write it with a rasterized grid.
    FitField(FitFieldArgs),
    /// Fit a displacement model from PID-only trajectories.
    TrainModel(TrainModelArgs),
    /// Generate a coverage plan as a mission file.
    Plan(PlanArgs),
    /// Fly a mission in simulation and write the trajectory log.
    Simulate(SimulateArgs),
    /// Print path metrics of a trajectory log as JSON.
    Metrics(MetricsArgs),
    /// Compare a baseline and an augmented run of the same mission.
    Compare(CompareArgs),
    /// Run a built-in A/B scenario.
    Scenario(ScenarioArgs),
}

#[derive(Clone, Copy, ValueEnum)]
pub enum SourceArg {
    Wind,
    Current,
}

#[derive(Args)]
pub struct FitFieldArgs {
    /// Sensor log CSV.
    #[arg(long)]
    pub log: PathBuf,
    #[arg(long, value_enum)]
    pub source: SourceArg,
    /// Output map file.
    #[arg(long)]
    pub out: PathBuf,
    /// Grid CSV path [default: the map path with a `.grid.csv` extension].
    #[arg(long)]
    pub grid: Option<PathBuf>,
    /// Grid spacing in meters.
    #[arg(long, default_value_t = 10.0)]
    pub grid_step: f64,
    /// Frame origin as `lat,lon` [default: first usable fix].
    #[arg(long)]
    pub origin: Option<String>,
    /// Keep every n-th sensor row.
    #[arg(long, default_value_t = 1)]
    pub stride: usize,
}

#[derive(Clone, Copy, ValueEnum)]
pub enum SchemaArg {
    Combined,
    Separate,
}

#[derive(Args)]
pub struct TrainModelArgs {
    /// Trajectory CSV; repeat for several runs.
    #[arg(long, required = true)]
    pub trajectory: Vec<PathBuf>,
    /// Mission file for each trajectory, or one shared by all.
    #[arg(long, required = true)]
    pub mission: Vec<PathBuf>,
    /// Mission index within each mission file.
    #[arg(long, default_value_t = 0)]
    pub robot: usize,
    /// Output model file.
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, value_enum, default_value_t = SchemaArg::Combined)]
    pub schema: SchemaArg,
    /// Training window in seconds.
    #[arg(long, default_value_t = leeway::displacement::DEFAULT_WINDOW_S)]
    pub window: f64,
    /// Also write the training set as CSV.
    #[arg(long)]
    pub samples_out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
pub enum PatternArg {
    Boustrophedon,
    L,
    T,
    Z,
    Star,
}

#[derive(Clone, Copy, ValueEnum)]
pub enum CoordsArg {
    Local,
    Geo,
}

#[derive(Args)]
pub struct PlanArgs {
    #[arg(long, value_enum)]
    pub pattern: PatternArg,
    /// Region file (lake polygon, river corridor or star center).
    #[arg(long)]
    pub region: PathBuf,
    /// Lane spacing in meters; along-river spacing for `z`.
    #[arg(long)]
    pub spacing: Option<f64>,
    #[arg(long, default_value_t = 1)]
    pub robots: usize,
    /// Survey speed in m/s.
    #[arg(long, default_value_t = 2.0)]
    pub speed: f64,
    /// Output mission file.
    #[arg(long)]
    pub out: PathBuf,
    /// Waypoint coordinates in the output file.
    #[arg(long, value_enum, default_value_t = CoordsArg::Local)]
    pub coords: CoordsArg,
}

#[derive(Args)]
pub struct SimulateArgs {
    #[arg(long)]
    pub mission: PathBuf,
    #[arg(long, default_value_t = 0)]
    pub robot: usize,
    /// Run configuration (TOML).
    #[arg(long)]
    pub config: PathBuf,
    /// Fly with augmented waypoints.
    #[arg(long)]
    pub augment: bool,
    /// Trajectory CSV [default: `output.trajectory` from the config].
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// GeoJSON plot output [default: `output.geojson` from the config].
    #[arg(long)]
    pub geojson: Option<PathBuf>,
}

#[derive(Args)]
pub struct MetricsArgs {
    #[arg(long)]
    pub log: PathBuf,
    #[arg(long)]
    pub mission: PathBuf,
    #[arg(long, default_value_t = 0)]
    pub robot: usize,
    /// Cross-track threshold in meters.
    #[arg(long, default_value_t = leeway::metrics::DEFAULT_THRESHOLD_M)]
    pub threshold: f64,
}

#[derive(Args)]
pub struct CompareArgs {
    #[arg(long)]
    pub baseline: PathBuf,
    #[arg(long)]
    pub augmented: PathBuf,
    #[arg(long)]
    pub mission: PathBuf,
    #[arg(long, default_value_t = 0)]
    pub robot: usize,
    #[arg(long, default_value_t = leeway::metrics::DEFAULT_THRESHOLD_M)]
    pub threshold: f64,
    /// Print the report as JSON.
    #[arg(long)]
    pub json: bool,
}

#[derive(Clone, Copy, ValueEnum)]
pub enum ScenarioKind {
    /// Eight headings at 45° under a uniform current.
    Star,
    /// Back-and-forth legs across a strong perpendicular current.
    Overshoot,
}

#[derive(Args)]
pub struct ScenarioArgs {
    #[arg(value_enum)]
    pub kind: ScenarioKind,
    /// Directory for missions, model, maps and trajectory logs.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::FitField(a) => commands::fit_field(a),
        Command::TrainModel(a) => commands::train_model(a),
        Command::Plan(a) => commands::plan(a),
        Command::Simulate(a) => commands::simulate(a),
        Command::Metrics(a) => commands::metrics(a),
        Command::Compare(a) => commands::compare(a),
        Command::Scenario(a) => commands::scenario(a),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("LEEWAY_LOG_LEVEL", "warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let text = e.render().to_string();
            eprintln!("error[usage]: {}", text.trim_start_matches("error: ").trim_end());
            return ExitCode::from(EXIT_USAGE);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(e.exit_code())
        }
    }
}
