//! Replication driver: walks a UE along its trajectory, tracks the serving
//! zone, runs target selection and executes handovers, and scores each
//! handover against the cell the UE actually moves into.
//!
//! Within one serving cell, a decision is taken when the serving signal
//! worsens into the concern zone and executed when it worsens into the
//! emergency zone; both may happen at the same step when a zone is skipped.
//! A pending decision is dropped if the UE falls back into the normalcy
//! zone. Leaving the serving coverage circle without a handover is a link
//! failure: the UE re-attaches to the strongest covering eNB and no
//! handover record is produced.

mod ground_truth;
mod loads;
mod stats;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::mobility::{self, MobilityError, MobilityKind, MobilitySpec, Trajectory};
use crate::radio::{
    derive_thresholds, splitmix, PathLossParams, RadioEnvironment, RadioError, RssDbm, Shadowing, Zone, ZoneFractions,
    ZoneThresholds,
};
use crate::selection::{
    average_angle_of_motion, baseline_select, evaluate, rss_quality, AngleDeg, CandidateScore, Evaluation,
    SelectionError, SelectionParams, Venbl, DEFAULT_VENBL_CAPACITY,
};
use crate::topology::{build_pct, Deployment, DeploymentSpec, EnbId, Point, Rect, TopologyError};

pub use ground_truth::ground_truth_next_cell;
pub use loads::{sample_loads, LoadModel, LoadState, DEFAULT_CAPACITY};
pub use stats::mean_ci95;

#[derive(Debug, Error)]
pub enum EngineError {
    #[error("invalid simulation config: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Topology(#[from] TopologyError),
    #[error(transparent)]
    Mobility(#[from] MobilityError),
    #[error(transparent)]
    Radio(#[from] RadioError),
    #[error(transparent)]
    Selection(#[from] SelectionError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Policy {
    /// Orientation, load and signal scoring.
    Proposed,
    /// Strongest neighbor at emergency-zone entry.
    RssOnly,
}

impl Policy {
    pub fn as_str(self) -> &'static str {
        match self {
            Policy::Proposed => "proposed",
            Policy::RssOnly => "rss_only",
        }
    }
}

/// Trajectory source for every replication. Only `FixedPath` uses `waypoints`.
#[derive(Debug, Clone, PartialEq)]
pub struct MobilityConfig {
    pub kind: MobilityKind,
    pub waypoints: Vec<Point>,
    pub steps: usize,
    pub step_resolution: f64,
    pub waypoint_resolution: f64,
}

impl MobilityConfig {
    pub fn model(kind: MobilityKind, steps: usize) -> Self {
        Self {
            kind,
            waypoints: Vec::new(),
            steps,
            step_resolution: mobility::DEFAULT_STEP_RESOLUTION,
            waypoint_resolution: mobility::DEFAULT_WAYPOINT_RESOLUTION,
        }
    }

    pub fn path(waypoints: Vec<Point>) -> Self {
        Self {
            waypoints,
            ..Self::model(MobilityKind::FixedPath, 1)
        }
    }

    pub fn spec(&self, field: Rect, seed: u64) -> MobilitySpec {
        MobilitySpec {
            kind: self.kind,
            field,
            steps: self.steps,
            step_resolution: self.step_resolution,
            waypoint_resolution: self.waypoint_resolution,
            waypoints: self.waypoints.clone(),
            seed,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RadioConfig {
    pub path_loss: PathLossParams,
    pub zone_fractions: ZoneFractions,
    /// Explicit zone thresholds; derived from `zone_fractions` when absent.
    pub thresholds_dbm: Option<ZoneThresholds>,
    pub shadowing_sigma_db: f64,
    pub shadowing_decorrelation_m: f64,
}

impl Default for RadioConfig {
    fn default() -> Self {
        Self {
            path_loss: PathLossParams::default(),
            zone_fractions: ZoneFractions::default(),
            thresholds_dbm: None,
            shadowing_sigma_db: 0.0,
            shadowing_decorrelation_m: Shadowing::off().decorrelation_m,
        }
    }
}

impl RadioConfig {
    pub fn environment(&self, coverage_radius: f64, shadowing_seed: u64) -> Result<RadioEnvironment, RadioError> {
        self.path_loss.validate()?;
        let thresholds = match self.thresholds_dbm {
            Some(t) => ZoneThresholds::new(t.p1, t.p2, t.p3)?,
            None => derive_thresholds(&self.path_loss, coverage_radius, self.zone_fractions)?,
        };
        if !(self.shadowing_sigma_db >= 0.0 && self.shadowing_decorrelation_m > 0.0) {
            return Err(RadioError::ParameterOutOfRange(
                "shadowing sigma must be non-negative and decorrelation distance positive".into(),
            ));
        }
        let shadowing = Shadowing {
            sigma_db: self.shadowing_sigma_db,
            seed: shadowing_seed,
            decorrelation_m: self.shadowing_decorrelation_m,
        };
        RadioEnvironment::new(self.path_loss, thresholds, shadowing)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimulationConfig {
    /// Grid layout. The seed is replaced per replication.
    pub deployment: DeploymentSpec,
    pub mobility: MobilityConfig,
    pub radio: RadioConfig,
    pub policy: Policy,
    pub selection: SelectionParams,
    pub venbl_capacity: usize,
    /// Newest visited cells fed into the angle of motion.
    pub k_used: usize,
    pub load: LoadModel,
    pub replications: usize,
    pub master_seed: u64,
}

impl Default for SimulationConfig {
    fn default() -> Self {
        Self {
            deployment: DeploymentSpec {
                rows: 20,
                cols: 20,
                inter_enb_distance: 1000.0,
                jitter_fraction: 0.0,
                seed: 0,
            },
            mobility: MobilityConfig::model(MobilityKind::Manhattan, 10_000),
            radio: RadioConfig::default(),
            policy: Policy::Proposed,
            selection: SelectionParams::default(),
            venbl_capacity: DEFAULT_VENBL_CAPACITY,
            k_used: 3,
            load: LoadModel::default(),
            replications: 30,
            master_seed: 1,
        }
    }
}

impl SimulationConfig {
    pub fn validate(&self) -> Result<(), EngineError> {
        let bad = |msg: String| Err(EngineError::InvalidConfig(msg));
        if self.venbl_capacity == 0 {
            return bad("venbl_capacity must be at least 1".into());
        }
        if !(1..=self.venbl_capacity).contains(&self.k_used) {
            return bad(format!(
                "k_used must lie in 1..={}, got {}",
                self.venbl_capacity, self.k_used
            ));
        }
        if self.replications == 0 {
            return bad("replications must be at least 1".into());
        }
        self.load.validate().map_err(EngineError::InvalidConfig)?;
        self.selection.validate()?;
        let dep = Deployment::new(self.deployment)?;
        self.radio.environment(dep.coverage_radius(), 0)?;
        if self.mobility.kind == MobilityKind::FixedPath {
            mobility::generate(&self.mobility.spec(dep.field(), 0))?;
        } else if self.mobility.steps == 0 {
            return bad("steps must be at least 1".into());
        }
        Ok(())
    }
}

/// Seed of replication `rep`. Replications draw from disjoint, fixed
/// streams so results do not depend on thread scheduling.
pub fn replication_seed(master: u64, rep: usize) -> u64 {
    splitmix(master ^ splitmix(rep as u64))
}

/// Independent sub-seeds of one replication. They depend only on the
/// replication seed, so every cell of a sweep sees the same trajectories,
/// placements and load draws for the same replication index.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Streams {
    pub mobility: u64,
    pub placement: u64,
    pub loads: u64,
    pub shadowing: u64,
}

impl Streams {
    pub fn new(rep_seed: u64) -> Self {
        let sub = |tag: u64| splitmix(rep_seed ^ splitmix(tag.wrapping_mul(0xA076_1D64_78BD_642F)));
        Self {
            mobility: sub(1),
            placement: sub(2),
            loads: sub(3),
            shadowing: sub(4),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Fallback {
    /// No visited-cell history yet; decided on load and signal alone.
    OmSkipped,
    /// Every neighbor was disqualified; strongest neighbor taken instead.
    EmptyShortlist,
}

impl Fallback {
    pub fn as_str(self) -> &'static str {
        match self {
            Fallback::OmSkipped => "om_skipped",
            Fallback::EmptyShortlist => "empty_shortlist",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HandoverRecord {
    /// Step at which the handover executed.
    pub step: usize,
    pub decision_step: usize,
    pub decision_position: Point,
    pub serving: EnbId,
    pub shortlist: Vec<EnbId>,
    pub selected: EnbId,
    pub ground_truth: EnbId,
    pub correct: bool,
    pub fallback: Option<Fallback>,
    /// Score tables, absent under the signal-only policy.
    pub evaluation: Option<Evaluation>,
}

impl HandoverRecord {
    pub fn fallback_used(&self) -> bool {
        self.fallback.is_some()
    }

    /// Scores of the selected candidate.
    pub fn winner(&self) -> Option<&CandidateScore> {
        self.evaluation.as_ref()?.breakdown.get(self.selected)
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ReplicationOutcome {
    pub index: usize,
    pub seed: u64,
    pub steps: usize,
    pub handovers: usize,
    pub correct: usize,
    pub fallbacks: usize,
    pub link_failures: usize,
    pub coverage_gaps: usize,
    pub records: Vec<HandoverRecord>,
}

impl ReplicationOutcome {
    /// Percentage of correct handovers, `None` without any handover.
    pub fn percent_correct(&self) -> Option<f64> {
        (self.handovers > 0).then(|| 100.0 * self.correct as f64 / self.handovers as f64)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub replications: usize,
    pub handovers_total: usize,
    pub correct_total: usize,
    pub fallback_total: usize,
    pub link_failures_total: usize,
    /// Per-replication percentages; replications without handovers are left out.
    pub per_replication: Vec<f64>,
    pub percent_correct_mean: f64,
    pub ci95_low: f64,
    pub ci95_high: f64,
    pub fallback_rate: f64,
}

impl RunSummary {
    pub fn from_outcomes(outcomes: &[ReplicationOutcome]) -> Self {
        let total = |f: fn(&ReplicationOutcome) -> usize| outcomes.iter().map(f).sum::<usize>();
        let handovers_total = total(|o| o.handovers);
        let fallback_total = total(|o| o.fallbacks);
        let per_replication: Vec<f64> = outcomes.iter().filter_map(|o| o.percent_correct()).collect();
        let (mean, lo, hi) = mean_ci95(&per_replication).unwrap_or((0.0, 0.0, 0.0));
        Self {
            replications: outcomes.len(),
            handovers_total,
            correct_total: total(|o| o.correct),
            fallback_total,
            link_failures_total: total(|o| o.link_failures),
            per_replication,
            percent_correct_mean: mean,
            ci95_low: lo,
            ci95_high: hi,
            fallback_rate: if handovers_total == 0 {
                0.0
            } else {
                fallback_total as f64 / handovers_total as f64
            },
        }
    }
}

/// Builds the world of replication `rep` and runs it.
/// Everything random about one replication, fixed before the UE moves.
#[derive(Debug, Clone)]
pub struct ReplicationWorld {
    pub seed: u64,
    pub streams: Streams,
    pub deployment: Deployment,
    pub radio: RadioEnvironment,
    pub trajectory: Trajectory,
}

impl ReplicationWorld {
    pub fn build(config: &SimulationConfig, rep: usize) -> Result<Self, EngineError> {
        let seed = replication_seed(config.master_seed, rep);
        let streams = Streams::new(seed);
        let deployment = Deployment::new(DeploymentSpec {
            seed: streams.placement,
            ..config.deployment
        })?;
        let trajectory = mobility::generate(&config.mobility.spec(deployment.field(), streams.mobility))?;
        let radio = config
            .radio
            .environment(deployment.coverage_radius(), streams.shadowing)?;
        Ok(Self {
            seed,
            streams,
            deployment,
            radio,
            trajectory,
        })
    }
}

pub fn run_replication(config: &SimulationConfig, rep: usize) -> Result<ReplicationOutcome, EngineError> {
    let w = ReplicationWorld::build(config, rep)?;
    let mut outcome = simulate(config, &w.deployment, &w.radio, &w.trajectory, w.streams.loads)?;
    outcome.index = rep;
    outcome.seed = w.seed;
    Ok(outcome)
}

/// Runs the handover state machine over a given world.
pub fn simulate(
    config: &SimulationConfig,
    deployment: &Deployment,
    radio: &RadioEnvironment,
    trajectory: &Trajectory,
    load_seed: u64,
) -> Result<ReplicationOutcome, EngineError> {
    let mut run = Run {
        config,
        deployment,
        radio,
        trajectory,
        load_seed,
        epoch: 0,
        venbl: Venbl::new(config.venbl_capacity),
        serving: None,
        prev_zone: Zone::ZN,
        pending: None,
        out: ReplicationOutcome {
            steps: trajectory.steps(),
            ..ReplicationOutcome::default()
        },
    };
    for (i, &p) in trajectory.points.iter().enumerate() {
        run.step(i, p)?;
    }
    Ok(run.out)
}

/// All replications, in index order.
pub fn run_replications(config: &SimulationConfig) -> Result<Vec<ReplicationOutcome>, EngineError> {
    config.validate()?;
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        (0..config.replications)
            .into_par_iter()
            .map(|rep| run_replication(config, rep))
            .collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        run_replications_sequential(config)
    }
}

/// Single-threaded [`run_replications`]; yields identical results.
pub fn run_replications_sequential(config: &SimulationConfig) -> Result<Vec<ReplicationOutcome>, EngineError> {
    config.validate()?;
    (0..config.replications)
        .map(|rep| run_replication(config, rep))
        .collect()
}

pub fn run_experiment(config: &SimulationConfig) -> Result<RunSummary, EngineError> {
    run_replications(config).map(|o| RunSummary::from_outcomes(&o))
}

pub fn run_experiment_sequential(config: &SimulationConfig) -> Result<RunSummary, EngineError> {
    run_replications_sequential(config).map(|o| RunSummary::from_outcomes(&o))
}

struct Decision {
    step: usize,
    position: Point,
    shortlist: Vec<EnbId>,
    selected: EnbId,
    fallback: Option<Fallback>,
    evaluation: Option<Evaluation>,
}

struct Run<'a> {
    config: &'a SimulationConfig,
    deployment: &'a Deployment,
    radio: &'a RadioEnvironment,
    trajectory: &'a Trajectory,
    load_seed: u64,
    epoch: u64,
    venbl: Venbl,
    serving: Option<EnbId>,
    /// Serving zone at the previous step.
    prev_zone: Zone,
    pending: Option<Decision>,
    out: ReplicationOutcome,
}

impl Run<'_> {
    fn step(&mut self, i: usize, p: Point) -> Result<(), EngineError> {
        let Some(serving) = self.serving else {
            if let Some(id) = self.strongest_covering(p) {
                self.attach(id, p);
            }
            return Ok(());
        };
        let enb = &self.deployment.enbs()[serving.index()];
        if p.distance(enb.center) > enb.coverage_radius {
            self.out.link_failures += 1;
            self.pending = None;
            match self.strongest_covering(p) {
                Some(id) => self.attach(id, p),
                None => {
                    self.serving = None;
                    self.out.coverage_gaps += 1;
                }
            }
            return Ok(());
        }

        let zone = self.radio.zone(self.radio.rss(self.deployment, serving, p));
        let worsened = zone > self.prev_zone;
        self.prev_zone = zone;
        if zone == Zone::ZN {
            self.pending = None;
        }
        if !worsened {
            return Ok(());
        }
        match self.config.policy {
            Policy::Proposed => {
                if zone >= Zone::ZC && self.pending.is_none() {
                    self.pending = self.decide(i, p, serving)?;
                }
                if zone >= Zone::ZE {
                    if let Some(d) = self.pending.take() {
                        self.execute(i, serving, d);
                    }
                }
            }
            Policy::RssOnly => {
                if zone >= Zone::ZE {
                    if let Some(d) = self.decide_baseline(i, p, serving)? {
                        self.execute(i, serving, d);
                    }
                }
            }
        }
        Ok(())
    }

    fn strongest_covering(&self, p: Point) -> Option<EnbId> {
        self.radio
            .strongest_of(self.deployment, self.deployment.covering_enbs(p), p)
    }

    fn attach(&mut self, id: EnbId, p: Point) {
        self.serving = Some(id);
        self.venbl.push(id);
        self.prev_zone = self.radio.zone(self.radio.rss(self.deployment, id, p));
        self.pending = None;
    }

    fn neighbor_rss(&self, neighbors: &[EnbId], p: Point) -> BTreeMap<EnbId, RssDbm> {
        neighbors
            .iter()
            .map(|&id| (id, self.radio.rss(self.deployment, id, p)))
            .collect()
    }

    fn decide(&mut self, i: usize, p: Point, serving: EnbId) -> Result<Option<Decision>, EngineError> {
        let neighbors = self.deployment.neighbors_of(serving)?;
        if neighbors.is_empty() {
            return Ok(None);
        }
        self.epoch += 1;
        let loads = sample_loads(&self.config.load, self.deployment.len(), self.load_seed, self.epoch);
        let pct = build_pct(self.deployment, serving)?;
        let history = self.venbl.history(self.config.k_used, serving);
        let aam = if history.is_empty() {
            None
        } else {
            Some(average_angle_of_motion(&pct, &history)?)
        };
        let candidates: Vec<(EnbId, AngleDeg)> = neighbors
            .iter()
            .map(|&id| {
                let pc = pct.get(id).ok_or(SelectionError::UnknownId(id))?;
                Ok((id, AngleDeg(pc.theta)))
            })
            .collect::<Result<_, SelectionError>>()?;
        let load_map: BTreeMap<EnbId, f64> = neighbors.iter().map(|&id| (id, loads.cl(id))).collect();
        let p1 = self.radio.thresholds().p1;
        let eps = self.config.selection.rss_epsilon_db;
        let (radio, deployment) = (self.radio, self.deployment);
        let evaluation = evaluate(&self.config.selection, aam, &candidates, &load_map, |id| {
            rss_quality(radio.rss(deployment, id, p), p1, eps)
        })?;
        let (selected, fallback) = match evaluation.selected {
            Some(id) => (id, aam.is_none().then_some(Fallback::OmSkipped)),
            None => {
                let id = baseline_select(&self.neighbor_rss(&neighbors, p)).expect("neighbors are non-empty");
                (id, Some(Fallback::EmptyShortlist))
            }
        };
        Ok(Some(Decision {
            step: i,
            position: p,
            shortlist: evaluation.breakdown.shortlist(),
            selected,
            fallback,
            evaluation: Some(evaluation),
        }))
    }

    fn decide_baseline(&self, i: usize, p: Point, serving: EnbId) -> Result<Option<Decision>, EngineError> {
        let neighbors = self.deployment.neighbors_of(serving)?;
        Ok(
            baseline_select(&self.neighbor_rss(&neighbors, p)).map(|selected| Decision {
                step: i,
                position: p,
                shortlist: neighbors,
                selected,
                fallback: None,
                evaluation: None,
            }),
        )
    }

    fn execute(&mut self, i: usize, serving: EnbId, d: Decision) {
        let ground_truth = ground_truth_next_cell(self.deployment, self.radio, self.trajectory, i, serving)
            .expect("a neighbor exists, so another eNB exists");
        let correct = d.selected == ground_truth;
        self.out.handovers += 1;
        self.out.correct += usize::from(correct);
        self.out.fallbacks += usize::from(d.fallback.is_some());
        self.out.records.push(HandoverRecord {
            step: i,
            decision_step: d.step,
            decision_position: d.position,
            serving,
            shortlist: d.shortlist,
            selected: d.selected,
            ground_truth,
            correct,
            fallback: d.fallback,
            evaluation: d.evaluation,
        });
        self.attach(d.selected, self.trajectory.points[i]);
    }
}
