//! `vortexlab`: point-vortex simulations on the sphere, plane, hyperbolic
//! plane, and flat torus.

mod checks;
mod gallery;
mod outputs;
mod render;
mod run;
mod scenario;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use vortexlab::analysis::convergence_order;
use vortexlab::geometry::GeometryTag;
use vortexlab::integrators::Method;

use scenario::{build_initial_state, parse_scenario, CliError, ScenarioSpec};

#[derive(Parser)]
#[command(
    name = "vortexlab",
    version,
    about = "Point-vortex dynamics on four constant-curvature geometries"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum GeometryArg {
    Sphere,
    Plane,
    Hyperbolic,
    Torus,
}

impl From<GeometryArg> for GeometryTag {
    fn from(g: GeometryArg) -> Self {
        match g {
            GeometryArg::Sphere => GeometryTag::Sphere,
            GeometryArg::Plane => GeometryTag::Plane,
            GeometryArg::Hyperbolic => GeometryTag::Hyperbolic,
            GeometryArg::Torus => GeometryTag::Torus,
        }
    }
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum MethodArg {
    ImplicitMidpoint,
    SphericalMidpoint,
    HyperbolicMidpoint,
}

impl From<MethodArg> for Method {
    fn from(m: MethodArg) -> Self {
        match m {
            MethodArg::ImplicitMidpoint => Method::ImplicitMidpoint,
            MethodArg::SphericalMidpoint => Method::SphericalMidpoint,
            MethodArg::HyperbolicMidpoint => Method::HyperbolicMidpoint,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Run one scenario file and write its requested outputs.
    Run {
        /// Scenario file (TOML, `schema = 1`).
        scenario: PathBuf,
        /// Directory for the generated files.
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
    /// Render the gallery of regime panels (one SVG per panel).
    Gallery {
        /// Directory for the figures.
        #[arg(long)]
        out: PathBuf,
        /// Base seed; panel k uses seed + k.
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Integration horizon per panel.
        #[arg(long, default_value_t = 200.0)]
        t_final: f64,
    },
    /// Measure the observed convergence order of a method.
    Order {
        #[arg(long)]
        method: MethodArg,
        #[arg(long)]
        geometry: GeometryArg,
        #[arg(long, default_value_t = 7)]
        seed: u64,
    },
    /// Quick invariant smoke suite.
    Check,
}

fn cmd_run(scenario_path: &PathBuf, out: &PathBuf) -> Result<i32, CliError> {
    let text = std::fs::read_to_string(scenario_path)
        .map_err(|e| CliError::Config(format!("{}: {e}", scenario_path.display())))?;
    let default_name = scenario_path
        .file_stem()
        .and_then(|s| s.to_str())
        .unwrap_or("scenario");
    let spec = parse_scenario(&text, default_name)?;
    std::fs::create_dir_all(out)?;
    let report = run::execute(&spec, out)?;
    println!("{}", report.summary_line());
    Ok(report.exit_code())
}

fn cmd_order(method: Method, geometry: GeometryTag, seed: u64) -> Result<i32, CliError> {
    if !method.compatible_with(geometry) {
        return Err(CliError::Config(format!(
            "{method} cannot integrate {geometry} states"
        )));
    }
    let spec = ScenarioSpec::random("order-study", geometry, 3, seed);
    let state = build_initial_state(&spec)?;
    let ladder = [1e-2, 5e-3, 2.5e-3, 1.25e-3];
    let order = convergence_order(&state, &spec.integrator, Some(&spec.kernel), &ladder, 2.0)
        .map_err(scenario::from_core)?;
    println!(
        "{method} on {geometry} (seed {seed}): observed order {order:.3} over dt in {ladder:?}"
    );
    Ok(0)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome: Result<i32, CliError> = match &cli.command {
        Command::Run { scenario, out } => cmd_run(scenario, out),
        Command::Gallery { out, seed, t_final } => {
            gallery::run_gallery(out, *seed, *t_final).map(|_| 0)
        }
        Command::Order {
            method,
            geometry,
            seed,
        } => cmd_order((*method).into(), (*geometry).into(), *seed),
        Command::Check => Ok(if checks::run_checks() == 0 { 0 } else { 1 }),
    };
    match outcome {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("vortexlab: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
