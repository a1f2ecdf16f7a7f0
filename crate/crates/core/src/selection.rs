//! Target eNB selection: visited-cell history, orientation matching,
//! current-load and signal-strength scoring, and the weighted-average pick.
//!
//! Each criterion assigns relative scores that sum to one over the
//! candidates it qualifies. A candidate rejected by orientation (RAD above
//! the limit) or by load (current load at or above the cut-off) is dropped
//! from every later stage; the survivors form the shortlist whose RSS is
//! measured, and the shortlisted candidate with the highest weighted average
//! score becomes the target.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::radio::RssDbm;
use crate::topology::{normalize_degrees, EnbId, Pct};

pub const DEFAULT_VENBL_CAPACITY: usize = 8;
pub const DEFAULT_RAD_LIMIT: f64 = 120.0;
pub const DEFAULT_RAD_REF: f64 = 125.0;
/// Gap between the load cut-off and the load reference value.
pub const CL_REF_GAP: f64 = 0.01;
pub const DEFAULT_RSS_EPSILON_DB: f64 = 0.01;

const WEIGHT_SUM_TOLERANCE: f64 = 1e-12;
// complements at or below this are treated as zero
const COMPLEMENT_FLOOR: f64 = 1e-12;

#[derive(Debug, Error, PartialEq)]
pub enum SelectionError {
    #[error("visited eNB list is empty")]
    EmptyVenbl,
    #[error("eNB {0} has no entry in the polar coordinate table")]
    UnknownId(EnbId),
    #[error("weights must lie in [0, 1] and sum to 1, got ({0}, {1}, {2})")]
    InvalidWeights(f64, f64, f64),
    #[error("invalid selection parameter: {0}")]
    InvalidParameter(String),
    #[error("qualified candidate {id} has no {criterion} score")]
    MissingScore { id: EnbId, criterion: Criterion },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Criterion {
    Orientation,
    Load,
    Signal,
}

impl fmt::Display for Criterion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Criterion::Orientation => "OM",
            Criterion::Load => "CL",
            Criterion::Signal => "RSS",
        })
    }
}

/// Bounded chronological list of visited eNBs, oldest first.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Venbl {
    capacity: usize,
    ids: VecDeque<EnbId>,
}

impl Default for Venbl {
    fn default() -> Self {
        Self::new(DEFAULT_VENBL_CAPACITY)
    }
}

impl Venbl {
    /// # Panics
    /// If `capacity` is zero.
    pub fn new(capacity: usize) -> Self {
        assert!(capacity > 0, "VeNBL capacity must be positive");
        Self {
            capacity,
            ids: VecDeque::with_capacity(capacity),
        }
    }

    pub fn from_ids(capacity: usize, ids: impl IntoIterator<Item = EnbId>) -> Self {
        let mut v = Self::new(capacity);
        for id in ids {
            v.push(id);
        }
        v
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn ids(&self) -> impl DoubleEndedIterator<Item = EnbId> + ExactSizeIterator + '_ {
        self.ids.iter().copied()
    }

    pub fn newest(&self) -> Option<EnbId> {
        self.ids.back().copied()
    }

    /// Appends `id` unless it already is the newest entry, evicting the
    /// oldest entry when full.
    pub fn push(&mut self, id: EnbId) {
        if self.newest() == Some(id) {
            return;
        }
        if self.ids.len() == self.capacity {
            self.ids.pop_front();
        }
        self.ids.push_back(id);
    }

    /// The newest `k` entries other than `serving`, oldest first.
    pub fn history(&self, k: usize, serving: EnbId) -> Vec<EnbId> {
        let mut out: Vec<EnbId> = self.ids().rev().filter(|&id| id != serving).take(k).collect();
        out.reverse();
        out
    }
}

pub fn update_venbl(v: &Venbl, new_id: EnbId) -> Venbl {
    let mut next = v.clone();
    next.push(new_id);
    next
}

/// Angle in degrees.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(transparent)]
pub struct AngleDeg(pub f64);

impl AngleDeg {
    pub fn value(self) -> f64 {
        self.0
    }
}

impl fmt::Display for AngleDeg {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:.2}°", self.0)
    }
}

/// Radius-weighted mean of `(r, theta)` samples, newest last.
///
/// Angles are first moved into the half-open branch
/// `(theta_newest - 180, theta_newest + 180]` so that samples straddling
/// 0°/360° average to a nearby angle instead of the opposite one.
pub fn weighted_angle_average(samples: &[(f64, f64)]) -> Option<AngleDeg> {
    let &(_, newest) = samples.last()?;
    let (lo, hi) = (newest - 180.0, newest + 180.0);
    let mut num = 0.0;
    let mut den = 0.0;
    for &(r, theta) in samples {
        let mut t = theta;
        while t <= lo {
            t += 360.0;
        }
        while t > hi {
            t -= 360.0;
        }
        num += r * t;
        den += r;
    }
    (den > 0.0).then(|| AngleDeg(normalize_degrees(num / den)))
}

/// Average angle of motion of the UE as seen from the PCT's origin, from the
/// visited eNBs in `history` (oldest first).
pub fn average_angle_of_motion(pct: &Pct, history: &[EnbId]) -> Result<AngleDeg, SelectionError> {
    if history.is_empty() {
        return Err(SelectionError::EmptyVenbl);
    }
    let samples = history
        .iter()
        .map(|&id| {
            pct.get(id)
                .map(|pc| (pc.r, pc.theta))
                .ok_or(SelectionError::UnknownId(id))
        })
        .collect::<Result<Vec<_>, _>>()?;
    weighted_angle_average(&samples).ok_or(SelectionError::EmptyVenbl)
}

pub fn expected_angle_of_exit(aam: AngleDeg) -> AngleDeg {
    AngleDeg(normalize_degrees(aam.0 + 180.0))
}

/// Angular gap between the expected exit angle and a neighbor's bearing, in `[0, 180]`.
pub fn relative_angular_distance(eae: AngleDeg, gaonb: AngleDeg) -> AngleDeg {
    let a = normalize_degrees((eae.0 - gaonb.0).abs());
    AngleDeg(if a > 180.0 { 360.0 - a } else { a })
}

/// Scores of one criterion. `scores` sums to one unless empty.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct CriterionScores {
    pub scores: BTreeMap<EnbId, f64>,
    pub disqualified: BTreeSet<EnbId>,
}

impl CriterionScores {
    pub fn all_disqualified(&self) -> bool {
        self.scores.is_empty()
    }

    fn normalized(complements: BTreeMap<EnbId, f64>, disqualified: BTreeSet<EnbId>) -> Self {
        let total: f64 = complements.values().sum();
        let scores = complements.into_iter().map(|(id, c)| (id, c / total)).collect();
        Self { scores, disqualified }
    }
}

/// Orientation matching scores. Candidates with RAD above `rad_limit` are
/// disqualified; the rest share one in proportion to `rad_ref - RAD`.
pub fn om_scores(rads: &BTreeMap<EnbId, f64>, rad_limit: f64, rad_ref: f64) -> Result<CriterionScores, SelectionError> {
    if !(rad_ref > rad_limit && rad_limit >= 0.0) {
        return Err(SelectionError::InvalidParameter(format!(
            "need 0 <= rad_limit < rad_ref, got limit {rad_limit}, ref {rad_ref}"
        )));
    }
    let mut complements = BTreeMap::new();
    let mut disqualified = BTreeSet::new();
    for (&id, &rad) in rads {
        if rad > rad_limit {
            disqualified.insert(id);
        } else {
            complements.insert(id, rad_ref - rad);
        }
    }
    Ok(CriterionScores::normalized(complements, disqualified))
}

/// Current-load scores.
///
/// Candidates in `already_disqualified` are skipped entirely. A candidate
/// whose load reaches `cl_limit` is disqualified, and so is one whose
/// complement `cl_ref - load` is not positive, where
/// `cl_ref = cl_limit - CL_REF_GAP`.
pub fn cl_scores(
    loads: &BTreeMap<EnbId, f64>,
    cl_limit: f64,
    already_disqualified: &BTreeSet<EnbId>,
) -> CriterionScores {
    let cl_ref = cl_limit - CL_REF_GAP;
    let mut complements = BTreeMap::new();
    let mut disqualified = BTreeSet::new();
    for (&id, &cl) in loads {
        if already_disqualified.contains(&id) {
            continue;
        }
        let complement = cl_ref - cl;
        if cl >= cl_limit || complement <= COMPLEMENT_FLOOR {
            disqualified.insert(id);
        } else {
            complements.insert(id, complement);
        }
    }
    CriterionScores::normalized(complements, disqualified)
}

/// Signal-strength scores, proportional to a non-negative quality.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RssScores {
    pub scores: BTreeMap<EnbId, f64>,
    /// Every quality was zero, so scores were split evenly.
    pub uniform_fallback: bool,
}

pub fn rss_scores(qualities: &BTreeMap<EnbId, f64>) -> RssScores {
    let total: f64 = qualities.values().map(|q| q.max(0.0)).sum();
    if total > 0.0 {
        RssScores {
            scores: qualities.iter().map(|(&id, &q)| (id, q.max(0.0) / total)).collect(),
            uniform_fallback: false,
        }
    } else {
        let n = qualities.len() as f64;
        RssScores {
            scores: qualities.keys().map(|&id| (id, 1.0 / n)).collect(),
            uniform_fallback: !qualities.is_empty(),
        }
    }
}

/// Signal quality fed into the RSS score: margin above the doom threshold,
/// floored at `epsilon_db`.
pub fn rss_quality(rss: RssDbm, p1: f64, epsilon_db: f64) -> f64 {
    (rss.0 - p1).max(epsilon_db)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Weights {
    pub om: f64,
    pub cl: f64,
    pub rss: f64,
}

impl Default for Weights {
    fn default() -> Self {
        Self {
            om: 0.5,
            cl: 0.25,
            rss: 0.25,
        }
    }
}

impl Weights {
    pub fn new(om: f64, cl: f64, rss: f64) -> Result<Self, SelectionError> {
        let w = Self { om, cl, rss };
        w.validate()?;
        Ok(w)
    }

    pub fn validate(&self) -> Result<(), SelectionError> {
        let parts = [self.om, self.cl, self.rss];
        let in_range = parts.iter().all(|w| (0.0..=1.0).contains(w));
        if in_range && (parts.iter().sum::<f64>() - 1.0).abs() <= WEIGHT_SUM_TOLERANCE {
            Ok(())
        } else {
            Err(SelectionError::InvalidWeights(self.om, self.cl, self.rss))
        }
    }

    /// Load and signal weights rescaled to sum to one, for decisions made
    /// without any visited-cell history. `None` if both are zero.
    pub fn without_om(&self) -> Option<Self> {
        let rest = self.cl + self.rss;
        (rest > 0.0).then(|| Self {
            om: 0.0,
            cl: self.cl / rest,
            rss: self.rss / rest,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Disqualification {
    Orientation,
    Load,
}

/// Per-candidate inputs and scores of one decision.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CandidateScore {
    pub id: EnbId,
    pub gaonb: Option<f64>,
    pub rad: Option<f64>,
    pub load: Option<f64>,
    pub rss_quality: Option<f64>,
    pub s_om: Option<f64>,
    pub s_cl: Option<f64>,
    pub s_rss: Option<f64>,
    pub s_was: Option<f64>,
    pub disqualified: Option<Disqualification>,
}

impl CandidateScore {
    pub fn new(id: EnbId) -> Self {
        Self {
            id,
            gaonb: None,
            rad: None,
            load: None,
            rss_quality: None,
            s_om: None,
            s_cl: None,
            s_rss: None,
            s_was: None,
            disqualified: None,
        }
    }

    pub fn is_qualified(&self) -> bool {
        self.disqualified.is_none()
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ScoreBreakdown {
    pub candidates: Vec<CandidateScore>,
}

impl ScoreBreakdown {
    pub fn get(&self, id: EnbId) -> Option<&CandidateScore> {
        self.candidates.iter().find(|c| c.id == id)
    }

    pub fn qualified(&self) -> impl Iterator<Item = &CandidateScore> {
        self.candidates.iter().filter(|c| c.is_qualified())
    }

    pub fn shortlist(&self) -> Vec<EnbId> {
        self.qualified().map(|c| c.id).collect()
    }
}

/// Weighted average score of every qualified candidate. A criterion with
/// zero weight may be missing from the breakdown.
pub fn weighted_average_scores(b: &ScoreBreakdown, w: &Weights) -> Result<BTreeMap<EnbId, f64>, SelectionError> {
    w.validate()?;
    b.qualified()
        .map(|c| {
            let term = |score: Option<f64>, weight: f64, criterion| match score {
                Some(s) => Ok(s * weight),
                None if weight == 0.0 => Ok(0.0),
                None => Err(SelectionError::MissingScore { id: c.id, criterion }),
            };
            let total = term(c.s_om, w.om, Criterion::Orientation)?
                + term(c.s_cl, w.cl, Criterion::Load)?
                + term(c.s_rss, w.rss, Criterion::Signal)?;
            Ok((c.id, total))
        })
        .collect()
}

fn argmax_lowest_id<V: PartialOrd + Copy>(items: impl IntoIterator<Item = (EnbId, V)>) -> Option<EnbId> {
    let mut best: Option<(EnbId, V)> = None;
    for (id, v) in items {
        let wins = match best {
            None => true,
            Some((bid, bv)) => v > bv || (v == bv && id < bid),
        };
        if wins {
            best = Some((id, v));
        }
    }
    best.map(|(id, _)| id)
}

/// Highest score wins, ties go to the lowest id.
pub fn select_target(was: &BTreeMap<EnbId, f64>) -> Option<EnbId> {
    argmax_lowest_id(was.iter().map(|(&id, &s)| (id, s)))
}

/// Strongest-signal policy over every measured neighbor.
pub fn baseline_select(rss: &BTreeMap<EnbId, RssDbm>) -> Option<EnbId> {
    argmax_lowest_id(rss.iter().map(|(&id, &r)| (id, r.0)))
}

/// Tunables of the proposed policy.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SelectionParams {
    pub weights: Weights,
    pub rad_limit: f64,
    pub rad_ref: f64,
    pub cl_limit: f64,
    pub rss_epsilon_db: f64,
}

impl Default for SelectionParams {
    fn default() -> Self {
        Self {
            weights: Weights::default(),
            rad_limit: DEFAULT_RAD_LIMIT,
            rad_ref: DEFAULT_RAD_REF,
            cl_limit: 0.9,
            rss_epsilon_db: DEFAULT_RSS_EPSILON_DB,
        }
    }
}

impl SelectionParams {
    pub fn validate(&self) -> Result<(), SelectionError> {
        self.weights.validate()?;
        if !(self.rad_ref > self.rad_limit && (0.0..=180.0).contains(&self.rad_limit)) {
            return Err(SelectionError::InvalidParameter(format!(
                "need 0 <= rad_limit <= 180 and rad_ref > rad_limit, got {} / {}",
                self.rad_limit, self.rad_ref
            )));
        }
        if !(self.cl_limit > CL_REF_GAP && self.cl_limit <= 1.0) {
            return Err(SelectionError::InvalidParameter(format!(
                "cl_limit must lie in ({CL_REF_GAP}, 1], got {}",
                self.cl_limit
            )));
        }
        if self.rss_epsilon_db.is_nan() || self.rss_epsilon_db <= 0.0 {
            return Err(SelectionError::InvalidParameter(
                "rss_epsilon_db must be positive".into(),
            ));
        }
        Ok(())
    }
}

/// Outcome of one run of the scoring pipeline.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Evaluation {
    pub aam: Option<AngleDeg>,
    pub eae: Option<AngleDeg>,
    pub breakdown: ScoreBreakdown,
    pub weights_used: Weights,
    /// `None` when the shortlist came out empty.
    pub selected: Option<EnbId>,
}

/// Runs orientation, load and signal scoring over `candidates`
/// (neighbor id and its bearing from the serving eNB).
///
/// Without an `aam` the orientation stage is skipped and the remaining
/// weights are rescaled. `measure` is only called for shortlisted
/// candidates and returns their non-negative signal quality.
pub fn evaluate(
    params: &SelectionParams,
    aam: Option<AngleDeg>,
    candidates: &[(EnbId, AngleDeg)],
    loads: &BTreeMap<EnbId, f64>,
    mut measure: impl FnMut(EnbId) -> f64,
) -> Result<Evaluation, SelectionError> {
    params.validate()?;
    let mut rows: BTreeMap<EnbId, CandidateScore> = candidates
        .iter()
        .map(|&(id, g)| {
            let mut row = CandidateScore::new(id);
            row.gaonb = Some(g.0);
            row.load = loads.get(&id).copied();
            (id, row)
        })
        .collect();

    let eae = aam.map(expected_angle_of_exit);
    let mut om_disqualified = BTreeSet::new();
    if let Some(eae) = eae {
        let rads: BTreeMap<EnbId, f64> = candidates
            .iter()
            .map(|&(id, g)| (id, relative_angular_distance(eae, g).0))
            .collect();
        let om = om_scores(&rads, params.rad_limit, params.rad_ref)?;
        for (id, rad) in &rads {
            let row = rows.get_mut(id).expect("row exists for every candidate");
            row.rad = Some(*rad);
            row.s_om = om.scores.get(id).copied();
            if om.disqualified.contains(id) {
                row.disqualified = Some(Disqualification::Orientation);
            }
        }
        om_disqualified = om.disqualified;
    }

    let candidate_loads: BTreeMap<EnbId, f64> = candidates
        .iter()
        .map(|&(id, _)| {
            loads
                .get(&id)
                .copied()
                .map(|cl| (id, cl))
                .ok_or_else(|| SelectionError::InvalidParameter(format!("no load for candidate {id}")))
        })
        .collect::<Result<_, _>>()?;
    let cl = cl_scores(&candidate_loads, params.cl_limit, &om_disqualified);
    for id in &cl.disqualified {
        rows.get_mut(id).expect("row exists").disqualified = Some(Disqualification::Load);
    }
    for (id, s) in &cl.scores {
        rows.get_mut(id).expect("row exists").s_cl = Some(*s);
    }

    let qualities: BTreeMap<EnbId, f64> = cl.scores.keys().map(|&id| (id, measure(id))).collect();
    let rss = rss_scores(&qualities);
    for (id, q) in &qualities {
        let row = rows.get_mut(id).expect("row exists");
        row.rss_quality = Some(*q);
        row.s_rss = rss.scores.get(id).copied();
    }

    let weights_used = match eae {
        Some(_) => params.weights,
        None => params.weights.without_om().unwrap_or(Weights {
            om: 0.0,
            cl: 0.0,
            rss: 1.0,
        }),
    };
    let breakdown = ScoreBreakdown {
        candidates: rows.into_values().collect(),
    };
    let was = weighted_average_scores(&breakdown, &weights_used)?;
    let selected = select_target(&was);
    let mut breakdown = breakdown;
    for row in &mut breakdown.candidates {
        row.s_was = was.get(&row.id).copied();
    }
    Ok(Evaluation {
        aam,
        eae,
        breakdown,
        weights_used,
        selected,
    })
}


#[cfg(test)]
mod properties {
    use super::*;
    use proptest::prelude::*;

    const CASES: u32 = 10_000;

    fn id_map(values: Vec<f64>) -> BTreeMap<EnbId, f64> {
        values
            .into_iter()
            .enumerate()
            .map(|(i, v)| (EnbId(i as u32), v))
            .collect()
    }

    fn assert_normalized(scores: &BTreeMap<EnbId, f64>) -> Result<(), TestCaseError> {
        if !scores.is_empty() {
            let sum: f64 = scores.values().sum();
            prop_assert!((sum - 1.0).abs() < 1e-9, "sum {sum}");
        }
        for &s in scores.values() {
            prop_assert!((0.0..=1.0 + 1e-12).contains(&s));
        }
        Ok(())
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(CASES))]

        #[test]
        fn scores_are_normalized(
            rads in prop::collection::vec(0.0..=180.0f64, 1..9),
            loads in prop::collection::vec(0.0..=1.0f64, 1..9),
            qualities in prop::collection::vec(0.0..100.0f64, 1..9),
            cl_limit in 0.05..=1.0f64,
        ) {
            let om = om_scores(&id_map(rads.clone()), 120.0, 125.0).unwrap();
            assert_normalized(&om.scores)?;
            prop_assert_eq!(om.scores.len() + om.disqualified.len(), rads.len());
            let cl = cl_scores(&id_map(loads.clone()), cl_limit, &BTreeSet::new());
            assert_normalized(&cl.scores)?;
            prop_assert_eq!(cl.scores.len() + cl.disqualified.len(), loads.len());
            assert_normalized(&rss_scores(&id_map(qualities)).scores)?;
        }

        #[test]
        fn better_inputs_never_score_lower(
            rads in prop::collection::vec(0.0..=120.0f64, 2..9),
            loads in prop::collection::vec(0.0..0.85f64, 2..9),
            qualities in prop::collection::vec(0.01..100.0f64, 2..9),
        ) {
            let check = |inputs: &[f64], scores: &BTreeMap<EnbId, f64>, lower_is_better: bool| {
                for i in 0..inputs.len() {
                    for j in 0..inputs.len() {
                        let better = if lower_is_better { inputs[i] < inputs[j] } else { inputs[i] > inputs[j] };
                        if better && scores[&EnbId(i as u32)] < scores[&EnbId(j as u32)] {
                            return false;
                        }
                    }
                }
                true
            };
            let om = om_scores(&id_map(rads.clone()), 120.0, 125.0).unwrap();
            prop_assert!(check(&rads, &om.scores, true));
            let cl = cl_scores(&id_map(loads.clone()), 0.9, &BTreeSet::new());
            prop_assert!(check(&loads, &cl.scores, true));
            let rss = rss_scores(&id_map(qualities.clone()));
            prop_assert!(check(&qualities, &rss.scores, false));
        }

        #[test]
        fn disqualified_candidates_are_never_selected(
            cands in prop::collection::vec((0.0..360.0f64, 0.0..=1.0f64, 0.0..50.0f64), 1..9),
            aam in prop::option::of(0.0..360.0f64),
            cl_limit in 0.05..=1.0f64,
            w_om in 0.0..=1.0f64,
            split in 0.0..=1.0f64,
        ) {
            let rest = 1.0 - w_om;
            let weights = Weights { om: w_om, cl: rest * split, rss: 1.0 - w_om - rest * split };
            prop_assume!(weights.validate().is_ok());
            let params = SelectionParams { weights, cl_limit, ..SelectionParams::default() };
            let list: Vec<(EnbId, AngleDeg)> =
                cands.iter().enumerate().map(|(i, c)| (EnbId(i as u32), AngleDeg(c.0))).collect();
            let loads: BTreeMap<EnbId, f64> =
                cands.iter().enumerate().map(|(i, c)| (EnbId(i as u32), c.1)).collect();
            let eval = evaluate(&params, aam.map(AngleDeg), &list, &loads, |id| cands[id.index()].2).unwrap();
            for row in &eval.breakdown.candidates {
                if row.disqualified.is_some() {
                    prop_assert!(row.s_was.is_none());
                    prop_assert!(row.s_rss.is_none());
                    prop_assert_ne!(eval.selected, Some(row.id));
                } else {
                    prop_assert!(row.s_was.is_some());
                }
                if row.disqualified == Some(Disqualification::Orientation) {
                    prop_assert!(row.rad.unwrap() > params.rad_limit);
                }
                if row.disqualified == Some(Disqualification::Load) {
                    prop_assert!(row.load.unwrap() > cl_limit - CL_REF_GAP - 1e-9);
                }
            }
            prop_assert_eq!(eval.selected.is_none(), eval.breakdown.shortlist().is_empty());
        }

        #[test]
        fn target_is_invariant_under_positive_affine_maps(
            scores in prop::collection::vec(0.0..1.0f64, 1..12),
            scale in 0.1..10.0f64,
            shift in -5.0..5.0f64,
        ) {
            let was = id_map(scores.clone());
            let mapped = id_map(scores.iter().map(|s| s * scale + shift).collect());
            let target = select_target(&was);
            prop_assert_eq!(target, select_target(&mapped));
            let best = target.unwrap();
            for (&id, &s) in &was {
                prop_assert!(s < was[&best] || (s == was[&best] && id >= best));
            }
        }

        #[test]
        fn angle_average_reduces_to_plain_means(
            base in 0.0..180.0f64,
            offsets in prop::collection::vec(0.0..90.0f64, 1..9),
            r in 1.0..20_000.0f64,
            radii in prop::collection::vec(1.0..20_000.0f64, 3),
        ) {
            // samples within a half-turn of each other need no unwrapping
            let equal: Vec<(f64, f64)> = offsets.iter().map(|o| (r, base + o)).collect();
            let mean = equal.iter().map(|s| s.1).sum::<f64>() / equal.len() as f64;
            let got = weighted_angle_average(&equal).unwrap().0;
            prop_assert!((got - mean).abs() < 1e-9, "{got} vs {mean}");

            let three: Vec<(f64, f64)> =
                radii.iter().zip(offsets.iter().cycle()).map(|(&r, o)| (r, base + o)).collect();
            let want = three.iter().map(|(r, t)| r * t).sum::<f64>() / three.iter().map(|s| s.0).sum::<f64>();
            let got = weighted_angle_average(&three).unwrap().0;
            prop_assert!((got - want).abs() < 1e-9, "{got} vs {want}");
        }

        #[test]
        fn angle_average_is_rotation_equivariant(
            samples in prop::collection::vec((1.0..1000.0f64, 0.0..360.0f64), 1..9),
            rot in 0.0..360.0f64,
        ) {
            let a = weighted_angle_average(&samples).unwrap().0;
            let rotated: Vec<(f64, f64)> =
                samples.iter().map(|&(r, t)| (r, normalize_degrees(t + rot))).collect();
            let b = weighted_angle_average(&rotated).unwrap().0;
            let diff = normalize_degrees(b - a - rot);
            prop_assert!(!(1e-6..=360.0 - 1e-6).contains(&diff), "{a} {b} {rot}");
        }

        #[test]
        fn rad_is_symmetric_and_bounded(a in 0.0..360.0f64, b in 0.0..360.0f64) {
            let ab = relative_angular_distance(AngleDeg(a), AngleDeg(b)).0;
            let ba = relative_angular_distance(AngleDeg(b), AngleDeg(a)).0;
            prop_assert!((0.0..=180.0).contains(&ab));
            prop_assert!((ab - ba).abs() < 1e-9);
        }

        #[test]
        fn venbl_has_no_adjacent_duplicates(
            pushes in prop::collection::vec(0u32..5, 0..60),
            cap in 1usize..10,
        ) {
            let v = Venbl::from_ids(cap, pushes.iter().map(|&i| EnbId(i)));
            prop_assert!(v.len() <= cap);
            let ids: Vec<EnbId> = v.ids().collect();
            prop_assert!(ids.windows(2).all(|w| w[0] != w[1]));
            if let Some(&last) = pushes.last() {
                prop_assert_eq!(v.newest(), Some(EnbId(last)));
            }
        }
    }
}
