use std::error::Error as StdError;
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};

use handover_core::config::{parse_config, Cell, ConfigError, ExperimentMatrix, ModelRef};
use handover_core::engine::{EngineError, ReplicationWorld};
use handover_core::mobility::{generate_fixed_path, read_path_file, MobilityError, MobilitySpec};
use handover_core::report::{explain, reproduce_worked_example};
use handover_core::sweep::{run_matrix_in, Execution, Manifest, SweepError};
use handover_core::topology::{Deployment, TopologyError};

/// Only the output directory may come from the environment.
const OUTPUT_DIR_ENV: &str = "HANDOVER_OUTPUT_DIR";

const EXIT_FAILURE: u8 = 1;
const EXIT_VALIDATION: u8 = 2;
const EXIT_REPRODUCTION: u8 = 3;

#[derive(Parser, Debug)]
#[command(name = "handover", version, about = "Seeded cellular handover simulator")]
struct Args {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run every cell of an experiment config, or re-run a manifest.json and
    /// check that it reproduces its summary byte for byte.
    Run {
        config: PathBuf,
        /// Run replications on the current thread.
        #[arg(long)]
        sequential: bool,
    },
    /// Print the reference selection walk-through and check every value.
    Example,
    /// Trajectory files: one "x y" pair per line, meters.
    Paths {
        #[command(subcommand)]
        action: PathsAction,
    },
    /// Print the score tables of one handover decision.
    Explain {
        config: PathBuf,
        /// First decision taken at or after this step.
        #[arg(long)]
        step: usize,
        /// Cell key as written in the manifest; defaults to the first cell.
        #[arg(long)]
        cell: Option<String>,
        #[arg(long, default_value_t = 0)]
        replication: usize,
    },
}

#[derive(Subcommand, Debug)]
enum PathsAction {
    /// Write the trajectory a model produces for one replication.
    Export {
        file: PathBuf,
        #[arg(long)]
        config: PathBuf,
        /// Mobility model or named path of the config.
        #[arg(long)]
        model: String,
        #[arg(long, default_value_t = 0)]
        replication: usize,
    },
    /// Check a path file and print it as a `[[paths]]` config entry.
    Import {
        file: PathBuf,
        /// Entry name; defaults to the file stem.
        #[arg(long)]
        name: Option<String>,
        /// Also check that every waypoint lies inside this config's field.
        #[arg(long)]
        config: Option<PathBuf>,
    },
}

#[derive(Debug)]
struct Usage(String);

impl fmt::Display for Usage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl StdError for Usage {}

#[derive(Debug)]
struct ReproductionFailed(Vec<String>);

impl fmt::Display for ReproductionFailed {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "output differs from the manifest run: {}", self.0.join(", "))
    }
}

impl StdError for ReproductionFailed {}

fn engine_invalid(e: &EngineError) -> bool {
    !matches!(e, EngineError::Mobility(MobilityError::Io(_)))
}

fn exit_code(err: &anyhow::Error) -> u8 {
    for cause in err.chain() {
        if cause.is::<ReproductionFailed>() {
            return EXIT_REPRODUCTION;
        }
        let invalid = if cause.is::<Usage>() || cause.is::<TopologyError>() {
            true
        } else if let Some(e) = cause.downcast_ref::<ConfigError>() {
            !matches!(e, ConfigError::Io { .. })
        } else if let Some(e) = cause.downcast_ref::<SweepError>() {
            match e {
                SweepError::Config(c) => !matches!(c, ConfigError::Io { .. }),
                SweepError::Manifest { .. } => true,
                SweepError::Engine { source, .. } => engine_invalid(source),
                _ => false,
            }
        } else if let Some(e) = cause.downcast_ref::<EngineError>() {
            engine_invalid(e)
        } else if let Some(e) = cause.downcast_ref::<MobilityError>() {
            !matches!(e, MobilityError::Io(_))
        } else {
            false
        };
        if invalid {
            return EXIT_VALIDATION;
        }
    }
    EXIT_FAILURE
}

fn output_dir(m: &ExperimentMatrix) -> PathBuf {
    match std::env::var_os(OUTPUT_DIR_ENV) {
        Some(dir) if !dir.is_empty() => PathBuf::from(dir),
        _ => m.output_dir.clone(),
    }
}

fn is_manifest(path: &Path) -> bool {
    path.extension().is_some_and(|e| e.eq_ignore_ascii_case("json"))
}

/// Loads a config file or the config embedded in a manifest.
fn load_matrix(path: &Path) -> Result<ExperimentMatrix> {
    if is_manifest(path) {
        Ok(Manifest::read(path)?.matrix()?)
    } else {
        Ok(parse_config(path)?)
    }
}

fn cmd_run(path: &Path, sequential: bool) -> Result<()> {
    // files the manifest points at, read before they can be overwritten
    let mut expected: Vec<(String, Vec<u8>)> = Vec::new();
    let m = if is_manifest(path) {
        let manifest = Manifest::read(path)?;
        let dir = path.parent().unwrap_or(Path::new("."));
        let names =
            std::iter::once(manifest.summary.clone()).chain(manifest.cells.iter().filter_map(|c| c.records.clone()));
        for name in names {
            let file = dir.join(&name);
            let bytes = fs::read(&file).with_context(|| format!("reading {}", file.display()))?;
            expected.push((name, bytes));
        }
        manifest.matrix()?
    } else {
        parse_config(path)?
    };

    let out_dir = output_dir(&m);
    let exec = if sequential {
        Execution::Sequential
    } else {
        Execution::Parallel
    };
    let out = run_matrix_in(&m, &out_dir, exec)?;

    println!(
        "{:<28} {:<9} {:>5} {:>6} {:>3} {:>5} {:>7} {:>8} {:>18} {:>9}",
        "model", "policy", "cl", "jitter", "k", "reps", "HOs", "correct%", "95% CI", "fallback"
    );
    for r in &out.rows {
        println!(
            "{:<28} {:<9} {:>5} {:>6} {:>3} {:>5} {:>7} {:>8.2} {:>18} {:>9.4}",
            r.model,
            r.policy,
            r.cl_limit,
            r.jitter_fraction,
            r.k_used,
            r.replications,
            r.handovers_total,
            r.percent_correct_mean,
            format!("[{:.2}, {:.2}]", r.ci95_low, r.ci95_high),
            r.fallback_rate
        );
    }
    println!("summary  {}", out.summary.display());
    println!("manifest {}", out.manifest.display());

    if !expected.is_empty() {
        let mut differing = Vec::new();
        for (name, bytes) in &expected {
            let file = out_dir.join(name);
            if fs::read(&file).ok().as_deref() != Some(bytes.as_slice()) {
                differing.push(name.clone());
            }
        }
        if !differing.is_empty() {
            return Err(ReproductionFailed(differing).into());
        }
        println!("reproduced {} file(s) byte for byte", expected.len());
    }
    Ok(())
}

fn cmd_example() -> Result<()> {
    let ex = reproduce_worked_example();
    print!("{}", ex.text);
    if ex.passed() {
        println!("all checks passed");
        Ok(())
    } else {
        let bad: Vec<String> = ex
            .checks
            .iter()
            .filter(|c| !c.passed())
            .map(|c| c.name.clone())
            .collect();
        Err(ReproductionFailed(bad).into())
    }
}

fn find_cell(m: &ExperimentMatrix, key: Option<&str>) -> Result<Cell> {
    let cells = m.cells();
    match key {
        None => Ok(cells.into_iter().next().expect("a valid matrix has cells")),
        Some(key) => cells.into_iter().find(|c| c.slug() == key).ok_or_else(|| {
            let known: Vec<String> = m.cells().iter().map(Cell::slug).collect();
            Usage(format!("no cell `{key}`; cells are: {}", known.join(", "))).into()
        }),
    }
}

fn cmd_explain(path: &Path, step: usize, cell: Option<&str>, replication: usize) -> Result<()> {
    let m = load_matrix(path)?;
    let cell = find_cell(&m, cell)?;
    println!("{}", explain(&m, &cell, replication, step)?);
    Ok(())
}

fn cmd_export(file: &Path, config: &Path, model: &str, replication: usize) -> Result<()> {
    let m = load_matrix(config)?;
    let cell = m.cells().into_iter().find(|c| c.model.name() == model).ok_or_else(|| {
        let known: Vec<&str> = m.models.iter().map(ModelRef::name).collect();
        Usage(format!(
            "no model `{model}` in the matrix; models are: {}",
            known.join(", ")
        ))
    })?;
    let world = ReplicationWorld::build(&m.cell_config(&cell), replication)?;
    world
        .trajectory
        .write_path_file(file)
        .with_context(|| format!("writing {}", file.display()))?;
    println!(
        "{} points ({} steps of {} m) written to {}",
        world.trajectory.len(),
        world.trajectory.steps(),
        world.trajectory.step_resolution,
        file.display()
    );
    Ok(())
}

fn cmd_import(file: &Path, name: Option<&str>, config: Option<&Path>) -> Result<()> {
    let points = read_path_file(file).with_context(|| format!("reading {}", file.display()))?;
    if points.len() < 2 {
        return Err(MobilityError::EmptyWaypoints(points.len())).with_context(|| file.display().to_string());
    }
    if let Some(config) = config {
        let m = load_matrix(config)?;
        let dep = Deployment::new(m.base.deployment)?;
        generate_fixed_path(&MobilitySpec::fixed_path(dep.field(), points.clone()))
            .with_context(|| file.display().to_string())?;
    }
    let length: f64 = points.windows(2).map(|w| w[0].distance(w[1])).sum();
    let name = match name {
        Some(n) => n.to_owned(),
        None => file
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| "path".to_owned()),
    };
    eprintln!("{}: {} waypoints, {:.0} m", file.display(), points.len(), length);
    println!("[[paths]]");
    println!("name = {name:?}");
    let pairs: Vec<String> = points.iter().map(|p| format!("[{:?}, {:?}]", p.x, p.y)).collect();
    println!("waypoints = [{}]", pairs.join(", "));
    Ok(())
}

fn main() -> ExitCode {
    let args = Args::parse();
    let result = match &args.command {
        Command::Run { config, sequential } => cmd_run(config, *sequential),
        Command::Example => cmd_example(),
        Command::Paths { action } => match action {
            PathsAction::Export {
                file,
                config,
                model,
                replication,
            } => cmd_export(file, config, model, *replication),
            PathsAction::Import { file, name, config } => cmd_import(file, name.as_deref(), config.as_deref()),
        },
        Command::Explain {
            config,
            step,
            cell,
            replication,
        } => cmd_explain(config, *step, cell.as_deref(), *replication),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
