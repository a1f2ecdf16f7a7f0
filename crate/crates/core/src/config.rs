//! Experiment configuration files.
//!
//! A config is a TOML document. Every section is optional except
//! `[matrix]`, and unknown keys are rejected:
//!
//! ```toml
//! output_dir = "results/venbl"   # relative to the working directory
//! seed = 1                       # master seed
//! replications = 30
//! steps = 10000                  # movement steps per replication (random models)
//! write_records = false          # per-handover CSVs next to the summary
//!
//! [deployment]
//! rows = 20
//! cols = 20
//! inter_enb_distance = 1000.0
//!
//! [radio]
//! zone_fractions = { f3 = 0.5, f2 = 0.7, f1 = 0.9 }
//! # thresholds_dbm = { p1 = -95.0, p2 = -90.0, p3 = -85.0 }
//! shadowing_sigma_db = 0.0
//!
//! [radio.path_loss]
//! frequency_mhz = 2000.0
//!
//! [selection]
//! weights = { om = 0.5, cl = 0.25, rss = 0.25 }
//! rad_limit = 120.0
//! rad_ref = 125.0
//! venbl_capacity = 8
//! rss_epsilon_db = 0.01
//!
//! [load]
//! model = "uniform"              # or "fixed" with `cl = 0.3`
//! capacity = 500
//!
//! [mobility]
//! step_resolution = 10.0
//! waypoint_resolution = 1000.0
//!
//! [[paths]]                      # fixed paths, usable as models by name
//! name = "path1"
//! file = "paths/path1_straight.txt"   # relative to this file
//! # waypoints = [[0.0, 0.0], [5000.0, 0.0]]
//!
//! [matrix]
//! models = ["manhattan", "random_waypoint", "random_direction", "path1"]
//! policies = ["proposed", "rss_only"]
//! cl_limits = [0.7]
//! jitter_fractions = [0.0]
//! k_used = [3]
//! ```

use std::collections::BTreeSet;
use std::fmt;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::engine::{LoadModel, MobilityConfig, Policy, RadioConfig, SimulationConfig};
use crate::mobility::{read_path_file, MobilityKind, DEFAULT_STEP_RESOLUTION, DEFAULT_WAYPOINT_RESOLUTION};
use crate::selection::{
    SelectionParams, Weights, DEFAULT_RAD_LIMIT, DEFAULT_RAD_REF, DEFAULT_RSS_EPSILON_DB, DEFAULT_VENBL_CAPACITY,
};
use crate::topology::{Deployment, DeploymentSpec, Point};

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("{path}: {message}")]
    Parse { path: String, message: String },
    #[error("invalid `{key}`: {message}")]
    Invalid { key: String, message: String },
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

fn invalid(key: impl Into<String>, message: impl fmt::Display) -> ConfigError {
    ConfigError::Invalid {
        key: key.into(),
        message: message.to_string(),
    }
}

/// What a matrix cell moves the UE with.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum ModelRef {
    Random(MobilityKind),
    Path(String),
}

impl ModelRef {
    pub fn name(&self) -> &str {
        match self {
            ModelRef::Random(kind) => kind.as_str(),
            ModelRef::Path(name) => name,
        }
    }

    fn builtin(name: &str) -> Option<MobilityKind> {
        [
            MobilityKind::Manhattan,
            MobilityKind::RandomWaypoint,
            MobilityKind::RandomDirection,
        ]
        .into_iter()
        .find(|k| k.as_str() == name)
    }
}

impl fmt::Display for ModelRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NamedPath {
    pub name: String,
    pub waypoints: Vec<Point>,
}

/// One combination of the swept parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct Cell {
    pub model: ModelRef,
    pub policy: Policy,
    pub cl_limit: f64,
    pub jitter_fraction: f64,
    pub k_used: usize,
}

impl Cell {
    /// File-name friendly key.
    pub fn slug(&self) -> String {
        format!(
            "{}_{}_cl{}_j{}_k{}",
            self.model,
            self.policy.as_str(),
            self.cl_limit,
            self.jitter_fraction,
            self.k_used
        )
    }
}

/// A validated experiment: shared settings plus the swept value lists.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentMatrix {
    pub output_dir: PathBuf,
    pub write_records: bool,
    /// Shared settings; the swept fields are overwritten per cell.
    pub base: SimulationConfig,
    pub paths: Vec<NamedPath>,
    pub models: Vec<ModelRef>,
    pub policies: Vec<Policy>,
    pub cl_limits: Vec<f64>,
    pub jitter_fractions: Vec<f64>,
    pub k_used: Vec<usize>,
}

impl ExperimentMatrix {
    /// Cartesian product in model, policy, cut-off, jitter, k order.
    pub fn cells(&self) -> Vec<Cell> {
        let mut out = Vec::new();
        for model in &self.models {
            for &policy in &self.policies {
                for &cl_limit in &self.cl_limits {
                    for &jitter_fraction in &self.jitter_fractions {
                        for &k_used in &self.k_used {
                            out.push(Cell {
                                model: model.clone(),
                                policy,
                                cl_limit,
                                jitter_fraction,
                                k_used,
                            });
                        }
                    }
                }
            }
        }
        out
    }

    pub fn cell_config(&self, cell: &Cell) -> SimulationConfig {
        let base = &self.base;
        let mobility = match &cell.model {
            ModelRef::Random(kind) => MobilityConfig {
                kind: *kind,
                waypoints: Vec::new(),
                ..base.mobility.clone()
            },
            ModelRef::Path(name) => MobilityConfig {
                kind: MobilityKind::FixedPath,
                waypoints: self
                    .paths
                    .iter()
                    .find(|p| &p.name == name)
                    .map(|p| p.waypoints.clone())
                    .unwrap_or_default(),
                ..base.mobility.clone()
            },
        };
        SimulationConfig {
            deployment: DeploymentSpec {
                jitter_fraction: cell.jitter_fraction,
                ..base.deployment
            },
            mobility,
            policy: cell.policy,
            selection: SelectionParams {
                cl_limit: cell.cl_limit,
                ..base.selection
            },
            k_used: cell.k_used,
            ..base.clone()
        }
    }

    /// The effective configuration as TOML, paths inlined. Parsing it back
    /// yields an equal matrix.
    pub fn to_toml(&self) -> String {
        let b = &self.base;
        let raw = RawConfig {
            output_dir: self.output_dir.clone(),
            seed: b.master_seed,
            replications: b.replications,
            steps: b.mobility.steps,
            write_records: self.write_records,
            deployment: RawDeployment {
                rows: b.deployment.rows,
                cols: b.deployment.cols,
                inter_enb_distance: b.deployment.inter_enb_distance,
            },
            radio: b.radio,
            selection: RawSelection {
                weights: b.selection.weights,
                rad_limit: b.selection.rad_limit,
                rad_ref: b.selection.rad_ref,
                venbl_capacity: b.venbl_capacity,
                rss_epsilon_db: b.selection.rss_epsilon_db,
            },
            load: b.load,
            mobility: RawMobility {
                step_resolution: b.mobility.step_resolution,
                waypoint_resolution: b.mobility.waypoint_resolution,
            },
            paths: self
                .paths
                .iter()
                .map(|p| RawPath {
                    name: p.name.clone(),
                    file: None,
                    waypoints: Some(p.waypoints.iter().map(|w| [w.x, w.y]).collect()),
                })
                .collect(),
            matrix: RawMatrix {
                models: self.models.iter().map(|m| m.name().to_owned()).collect(),
                policies: self.policies.clone(),
                cl_limits: self.cl_limits.clone(),
                jitter_fractions: self.jitter_fractions.clone(),
                k_used: self.k_used.clone(),
            },
        };
        toml::to_string(&raw).expect("config structs always serialize")
    }
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    #[serde(default = "defaults::output_dir")]
    output_dir: PathBuf,
    #[serde(default = "defaults::seed")]
    seed: u64,
    #[serde(default = "defaults::replications")]
    replications: usize,
    #[serde(default = "defaults::steps")]
    steps: usize,
    #[serde(default)]
    write_records: bool,
    #[serde(default)]
    deployment: RawDeployment,
    #[serde(default)]
    radio: RadioConfig,
    #[serde(default)]
    selection: RawSelection,
    #[serde(default)]
    load: LoadModel,
    #[serde(default)]
    mobility: RawMobility,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    paths: Vec<RawPath>,
    matrix: RawMatrix,
}

mod defaults {
    use std::path::PathBuf;

    pub fn output_dir() -> PathBuf {
        PathBuf::from("results")
    }
    pub fn seed() -> u64 {
        1
    }
    pub fn replications() -> usize {
        30
    }
    pub fn steps() -> usize {
        10_000
    }
    pub fn cl_limits() -> Vec<f64> {
        vec![0.7]
    }
    pub fn jitter_fractions() -> Vec<f64> {
        vec![0.0]
    }
    pub fn k_used() -> Vec<usize> {
        vec![3]
    }
    pub fn policies() -> Vec<crate::engine::Policy> {
        vec![crate::engine::Policy::Proposed]
    }
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct RawDeployment {
    rows: u32,
    cols: u32,
    inter_enb_distance: f64,
}

impl Default for RawDeployment {
    fn default() -> Self {
        Self {
            rows: 20,
            cols: 20,
            inter_enb_distance: 1000.0,
        }
    }
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct RawSelection {
    weights: Weights,
    rad_limit: f64,
    rad_ref: f64,
    venbl_capacity: usize,
    rss_epsilon_db: f64,
}

impl Default for RawSelection {
    fn default() -> Self {
        Self {
            weights: Weights::default(),
            rad_limit: DEFAULT_RAD_LIMIT,
            rad_ref: DEFAULT_RAD_REF,
            venbl_capacity: DEFAULT_VENBL_CAPACITY,
            rss_epsilon_db: DEFAULT_RSS_EPSILON_DB,
        }
    }
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct RawMobility {
    step_resolution: f64,
    waypoint_resolution: f64,
}

impl Default for RawMobility {
    fn default() -> Self {
        Self {
            step_resolution: DEFAULT_STEP_RESOLUTION,
            waypoint_resolution: DEFAULT_WAYPOINT_RESOLUTION,
        }
    }
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawPath {
    name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    file: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    waypoints: Option<Vec<[f64; 2]>>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawMatrix {
    models: Vec<String>,
    #[serde(default = "defaults::policies")]
    policies: Vec<Policy>,
    #[serde(default = "defaults::cl_limits")]
    cl_limits: Vec<f64>,
    #[serde(default = "defaults::jitter_fractions")]
    jitter_fractions: Vec<f64>,
    #[serde(default = "defaults::k_used")]
    k_used: Vec<usize>,
}

/// Reads and validates a config file. Relative path files resolve against
/// the config's directory.
pub fn parse_config(path: &Path) -> Result<ExperimentMatrix, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_config_str(
        &text,
        path.parent().unwrap_or(Path::new("")),
        &path.display().to_string(),
    )
}

/// Parses config text. `base_dir` anchors relative path files and `origin`
/// names the source in error messages.
pub fn parse_config_str(text: &str, base_dir: &Path, origin: &str) -> Result<ExperimentMatrix, ConfigError> {
    let raw: RawConfig = toml::from_str(text).map_err(|e| ConfigError::Parse {
        path: origin.to_owned(),
        message: e.to_string().trim_end().to_owned(),
    })?;
    build(raw, base_dir)
}

fn no_duplicates<T: PartialEq + fmt::Debug>(key: &str, values: &[T]) -> Result<(), ConfigError> {
    if values.is_empty() {
        return Err(invalid(key, "must list at least one value"));
    }
    for (i, v) in values.iter().enumerate() {
        if values[..i].contains(v) {
            return Err(invalid(key, format!("duplicate value {v:?}")));
        }
    }
    Ok(())
}

fn build(raw: RawConfig, base_dir: &Path) -> Result<ExperimentMatrix, ConfigError> {
    if raw.replications == 0 {
        return Err(invalid("replications", "must be at least 1"));
    }
    if raw.steps == 0 {
        return Err(invalid("steps", "must be at least 1"));
    }
    if i64::try_from(raw.seed).is_err() {
        return Err(invalid("seed", "must fit in a signed 64-bit integer"));
    }
    let deployment = DeploymentSpec {
        rows: raw.deployment.rows,
        cols: raw.deployment.cols,
        inter_enb_distance: raw.deployment.inter_enb_distance,
        jitter_fraction: 0.0,
        seed: 0,
    };
    let dep = Deployment::new(deployment).map_err(|e| invalid("deployment", e))?;
    raw.radio
        .environment(dep.coverage_radius(), 0)
        .map_err(|e| invalid("radio", e))?;
    raw.load.validate().map_err(|e| invalid("load", e))?;
    let s = &raw.selection;
    s.weights.validate().map_err(|e| invalid("selection.weights", e))?;
    if s.venbl_capacity == 0 {
        return Err(invalid("selection.venbl_capacity", "must be at least 1"));
    }
    let selection = SelectionParams {
        weights: s.weights,
        rad_limit: s.rad_limit,
        rad_ref: s.rad_ref,
        rss_epsilon_db: s.rss_epsilon_db,
        ..SelectionParams::default()
    };
    selection.validate().map_err(|e| invalid("selection", e))?;

    let m = &raw.matrix;
    no_duplicates("matrix.models", &m.models)?;
    no_duplicates("matrix.policies", &m.policies)?;
    no_duplicates("matrix.cl_limits", &m.cl_limits)?;
    no_duplicates("matrix.jitter_fractions", &m.jitter_fractions)?;
    no_duplicates("matrix.k_used", &m.k_used)?;
    for &cl in &m.cl_limits {
        SelectionParams {
            cl_limit: cl,
            ..selection
        }
        .validate()
        .map_err(|e| invalid("matrix.cl_limits", e))?;
    }
    for &j in &m.jitter_fractions {
        Deployment::new(DeploymentSpec {
            jitter_fraction: j,
            ..deployment
        })
        .map_err(|e| invalid("matrix.jitter_fractions", e))?;
    }
    if let Some(k) = m.k_used.iter().find(|&&k| k == 0 || k > s.venbl_capacity) {
        return Err(invalid(
            "matrix.k_used",
            format!("{k} is outside 1..={}", s.venbl_capacity),
        ));
    }

    let mobility = MobilityConfig {
        step_resolution: raw.mobility.step_resolution,
        waypoint_resolution: raw.mobility.waypoint_resolution,
        ..MobilityConfig::model(MobilityKind::Manhattan, raw.steps)
    };
    let mut paths = Vec::new();
    let mut names = BTreeSet::new();
    for p in &raw.paths {
        let key = format!("paths.{}", p.name);
        if ModelRef::builtin(&p.name).is_some() || !names.insert(p.name.clone()) {
            return Err(invalid(
                &key,
                "path names must be unique and differ from the built-in models",
            ));
        }
        let waypoints = match (&p.file, &p.waypoints) {
            (Some(file), None) => read_path_file(&base_dir.join(file)).map_err(|e| invalid(&key, e))?,
            (None, Some(w)) => w.iter().map(|&[x, y]| Point::new(x, y)).collect(),
            _ => return Err(invalid(&key, "give exactly one of `file` or `waypoints`")),
        };
        let check = MobilityConfig {
            kind: MobilityKind::FixedPath,
            waypoints: waypoints.clone(),
            ..mobility.clone()
        };
        crate::mobility::generate(&check.spec(dep.field(), 0)).map_err(|e| invalid(&key, e))?;
        paths.push(NamedPath {
            name: p.name.clone(),
            waypoints,
        });
    }
    let models = m
        .models
        .iter()
        .map(|name| match ModelRef::builtin(name) {
            Some(kind) => Ok(ModelRef::Random(kind)),
            None if names.contains(name) => Ok(ModelRef::Path(name.clone())),
            None => Err(invalid(
                "matrix.models",
                format!("unknown model `{name}`; expected manhattan, random_waypoint, random_direction or a path name"),
            )),
        })
        .collect::<Result<Vec<_>, _>>()?;

    let base = SimulationConfig {
        deployment,
        mobility,
        radio: raw.radio,
        policy: m.policies[0],
        selection: SelectionParams {
            cl_limit: m.cl_limits[0],
            ..selection
        },
        venbl_capacity: s.venbl_capacity,
        k_used: m.k_used[0],
        load: raw.load,
        replications: raw.replications,
        master_seed: raw.seed,
    };
    let matrix = ExperimentMatrix {
        output_dir: raw.output_dir,
        write_records: raw.write_records,
        base,
        paths,
        models,
        policies: m.policies.clone(),
        cl_limits: m.cl_limits.clone(),
        jitter_fractions: m.jitter_fractions.clone(),
        k_used: m.k_used.clone(),
    };
    for cell in matrix.cells() {
        matrix
            .cell_config(&cell)
            .validate()
            .map_err(|e| invalid(format!("matrix cell {}", cell.slug()), e))?;
    }
    Ok(matrix)
}
