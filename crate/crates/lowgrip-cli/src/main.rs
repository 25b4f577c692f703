//! Batch harness for the maneuver-selection pipeline: dataset
//! generation, trace simulation and replay, predictor training, decision
//! maps and oracle-backed evaluation.

mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use lowgrip::dataset::{read_dataset_file, write_dataset_file};
use lowgrip::decision_map::{decision_map, linspace, MapGrid};
use lowgrip::error::Error;
use lowgrip::estimators::{build_estimator, replay};
use lowgrip::experiment::{
    evaluate_model, generate_dataset, train_model, ExperimentGrid, CONTROL_DT_S,
};
use lowgrip::maneuver::ControllerConfig;
use lowgrip::observer::{filter_trace, write_estimates, ObserverConfig};
use lowgrip::plant::PlantConfig;
use lowgrip::predictor::{read_model_file, write_model_file, GroundMode, Objective};
use lowgrip::rollout::{rollout_maneuver, rollout_traction, RolloutRecord};
use lowgrip::sensors::{read_trace_file, synthesize_sensors, write_trace_file, NoiseConfig};
use lowgrip::types::{GroundModel, ManeuverId, Scenario, VehicleParams};

#[derive(Parser)]
#[command(
    name = "lowgrip",
    about = "Ground-aware emergency maneuver selection toolkit",
    version,
    disable_help_subcommand = true
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Roll out the full scenario grid and write the outcome dataset CSV.
    Generate(GenerateArgs),
    /// Run one rollout and dump its synthesized sensor trace CSV.
    Simulate(SimulateArgs),
    /// Replay a sensor trace through the observer and a ground estimator.
    Estimate(EstimateArgs),
    /// Fit the per-maneuver distance regressions from a dataset.
    Train(TrainArgs),
    /// Emit a decision map (CSV + SVG) from a trained model.
    Map(MapArgs),
    /// Compare model selections against brute-force rollouts on a grid.
    Evaluate(EvaluateArgs),
}

#[derive(Args)]
struct GenerateArgs {
    /// Output dataset CSV path.
    #[arg(long)]
    out: PathBuf,
    /// Grid configuration file (key = value).
    #[arg(long)]
    grid_file: Option<PathBuf>,
    /// Seed recorded with the grid (rollouts themselves are noise-free).
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args)]
struct SimulateArgs {
    /// Output trace CSV path.
    #[arg(long)]
    out: PathBuf,
    /// Maneuver name or ordinal 1..5, or "traction" for a drive-up run.
    #[arg(long)]
    maneuver: String,
    /// Initial speed (maneuvers) or target speed (traction run), m/s.
    #[arg(long)]
    v0: f64,
    /// Hard-surface friction coefficient.
    #[arg(long)]
    mu: Option<f64>,
    /// Soil cohesion, kPa.
    #[arg(long)]
    c_kpa: Option<f64>,
    /// Soil internal shear angle, degrees.
    #[arg(long)]
    phi_deg: Option<f64>,
    /// Sinkage depth, m (deformable ground).
    #[arg(long)]
    z: Option<f64>,
    /// Sensor noise seed.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args)]
struct EstimateArgs {
    /// Input sensor trace CSV.
    #[arg(long)]
    trace: PathBuf,
    /// Estimator mode: hard | deformable.
    #[arg(long)]
    mode: String,
    /// Known sinkage, m (required in deformable mode).
    #[arg(long)]
    z: Option<f64>,
    /// Output estimate CSV path.
    #[arg(long)]
    out: PathBuf,
    /// Optional observer output CSV (t, v, omega, a).
    #[arg(long)]
    observer_out: Option<PathBuf>,
}

#[derive(Args)]
struct TrainArgs {
    /// Input dataset CSV.
    #[arg(long)]
    dataset: PathBuf,
    /// Output model file path.
    #[arg(long)]
    out: PathBuf,
    /// Selection objective: max (default) | min.
    #[arg(long, default_value = "max")]
    objective: String,
}

#[derive(Args)]
struct MapArgs {
    /// Trained model file.
    #[arg(long)]
    model: PathBuf,
    /// Map mode: hard | deformable.
    #[arg(long)]
    mode: String,
    /// Fixed sinkage for deformable maps, m.
    #[arg(long, default_value_t = 0.03)]
    z: f64,
    /// Output CSV path; the SVG is written next to it.
    #[arg(long)]
    out: PathBuf,
    /// Speed axis cells.
    #[arg(long, default_value_t = 9)]
    nv: usize,
    /// Second axis cells (mu, or cohesion).
    #[arg(long, default_value_t = 9)]
    ny: usize,
    /// Shear-angle axis cells (deformable maps).
    #[arg(long, default_value_t = 3)]
    nphi: usize,
}

#[derive(Args)]
struct EvaluateArgs {
    /// Trained model file.
    #[arg(long)]
    model: PathBuf,
    /// Grid configuration file; defaults to a held-out midpoint grid.
    #[arg(long)]
    grid_file: Option<PathBuf>,
    /// Seed recorded with the grid.
    #[arg(long)]
    seed: Option<u64>,
    /// Optional per-cell report CSV.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn exit_code_for(err: &Error) -> u8 {
    match err {
        Error::InvalidParam(_) | Error::UnknownManeuver(_) => 1,
        Error::Io(_)
        | Error::Csv { .. }
        | Error::EmptyTrace
        | Error::EmptyTrajectory
        | Error::NonMonotoneTime(_) => 2,
        Error::InsufficientData(_)
        | Error::DegenerateRegressor(_)
        | Error::Untrained { .. }
        | Error::RunawayRollout
        | Error::WheelBuried
        | Error::UnstableObserver(_) => 3,
    }
}

fn env_seed() -> Option<u64> {
    std::env::var("LOWGRIP_SEED").ok()?.parse().ok()
}

fn build_ground(
    mu: Option<f64>,
    c_kpa: Option<f64>,
    phi_deg: Option<f64>,
    z: Option<f64>,
) -> Result<GroundModel, Error> {
    match (mu, c_kpa, phi_deg, z) {
        (Some(mu), None, None, None) => Ok(GroundModel::hard(mu)),
        (None, Some(c), Some(phi), Some(z)) => {
            Ok(GroundModel::deformable(z, c * 1e3, phi.to_radians()))
        }
        _ => Err(Error::InvalidParam(
            "specify either --mu, or all of --c-kpa --phi-deg --z".into(),
        )),
    }
}

fn run(cli: Cli) -> Result<(), Error> {
    let params = VehicleParams::default();
    let plant = PlantConfig::default();
    let ctrl = ControllerConfig::default();

    match cli.command {
        Command::Generate(args) => {
            let mut grid = ExperimentGrid::default();
            if let Some(path) = &args.grid_file {
                config::apply_grid_file(path, &mut grid)?;
            }
            if let Some(seed) = args.seed.or_else(env_seed) {
                grid.seed = seed;
            }
            let ds = generate_dataset(&grid, &params, &plant, &ctrl);
            write_dataset_file(&args.out, &ds)?;
            let failed = ds.rows.iter().filter(|r| r.status != "ok").count();
            println!(
                "wrote {} rows to {} ({failed} failed)",
                ds.len(),
                args.out.display()
            );
        }
        Command::Simulate(args) => {
            let seed = args.seed.or_else(env_seed).unwrap_or(42);
            let noise = NoiseConfig {
                rng_seed: seed,
                ..NoiseConfig::default()
            };
            let ground = build_ground(args.mu, args.c_kpa, args.phi_deg, args.z)?;
            let record: RolloutRecord = if args.maneuver == "traction" {
                rollout_traction(0.3, args.v0, &ground, &params, &plant, CONTROL_DT_S)?
            } else {
                let maneuver = ManeuverId::from_name(&args.maneuver)?;
                let scn = Scenario::new(args.v0, ground);
                let rec = rollout_maneuver(&scn, maneuver, &params, &plant, &ctrl, CONTROL_DT_S)?;
                let traj = rec.trajectory();
                let d = lowgrip::geometry::min_obstacle_distance(
                    &traj,
                    (scn.obstacle_distance_m, 0.0),
                )?;
                println!("min_distance_m = {d}");
                rec
            };
            let frames = synthesize_sensors(&record, &noise)?;
            write_trace_file(&args.out, &frames)?;
            println!("wrote {} frames to {}", frames.len(), args.out.display());
        }
        Command::Estimate(args) => {
            let frames = read_trace_file(&args.trace)?;
            let obs_cfg = ObserverConfig::default();
            let estimates = filter_trace(&obs_cfg, &params, &frames)?;
            if let Some(path) = &args.observer_out {
                let f = std::fs::File::create(path)?;
                write_estimates(std::io::BufWriter::new(f), &estimates)?;
            }
            let mut estimator = build_estimator(&args.mode, &params, args.z)?;
            let torques: Vec<f64> = frames.iter().map(|f| f.torque_est_nm).collect();
            let rows = replay(estimator.as_mut(), &estimates, &torques);
            let mut out = String::new();
            out.push_str(estimator.csv_header());
            out.push('\n');
            for (t, values) in &rows {
                out.push_str(&t.to_string());
                for v in values {
                    out.push(',');
                    out.push_str(&v.to_string());
                }
                out.push('\n');
            }
            std::fs::write(&args.out, out)?;
            println!(
                "wrote {} estimate rows to {}",
                rows.len(),
                args.out.display()
            );
        }
        Command::Train(args) => {
            let ds = read_dataset_file(&args.dataset)?;
            let objective = Objective::from_name(&args.objective)?;
            let (model, warnings) = train_model(&ds, objective);
            for w in &warnings {
                eprintln!("warning: {w}");
            }
            if model.trained_count() == 0 {
                return Err(Error::InsufficientData("no trainable regressions".into()));
            }
            write_model_file(&args.out, &model)?;
            println!(
                "trained {} regressions from {} rows -> {}",
                model.trained_count(),
                ds.len(),
                args.out.display()
            );
        }
        Command::Map(args) => {
            let model = read_model_file(&args.model)?;
            let mode = GroundMode::from_name(&args.mode)?;
            let grid = match mode {
                GroundMode::Hard => MapGrid::Hard {
                    v_axis: linspace(1.0, 3.0, args.nv),
                    mu_axis: linspace(0.25, 0.9, args.ny),
                },
                GroundMode::Deformable => MapGrid::Deformable {
                    v_axis: linspace(1.0, 3.0, args.nv),
                    c_kpa_axis: linspace(0.0, 83.0, args.ny),
                    phi_deg_axis: linspace(25.0, 35.0, args.nphi),
                    z_m: args.z,
                },
            };
            let map = decision_map(&model, &grid)?;
            map.write_csv_file(&args.out)?;
            let svg_path = args.out.with_extension("svg");
            map.write_svg_file(&svg_path)?;
            println!(
                "wrote {} cells to {} and {}",
                map.cells.len(),
                args.out.display(),
                svg_path.display()
            );
        }
        Command::Evaluate(args) => {
            let model = read_model_file(&args.model)?;
            let mut grid = ExperimentGrid::held_out_eval();
            if let Some(path) = &args.grid_file {
                config::apply_grid_file(path, &mut grid)?;
            }
            if let Some(seed) = args.seed.or_else(env_seed) {
                grid.seed = seed;
            }
            let report = evaluate_model(&model, &grid, &params, &plant, &ctrl)?;
            if let Some(path) = &args.out {
                let f = std::fs::File::create(path)?;
                report.write_csv(std::io::BufWriter::new(f))?;
            }
            println!("{}", report.summary());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    // usage problems exit 1; help/version print normally and exit 0
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if e.use_stderr() => {
            eprint!("{e}");
            return ExitCode::from(1);
        }
        Err(e) => {
            print!("{e}");
            return ExitCode::SUCCESS;
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(exit_code_for(&err))
        }
    }
}
