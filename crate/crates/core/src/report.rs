//! Human-readable reports: the reference selection walk-through and
//! per-decision score tables for a simulated run.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use crate::config::{Cell, ExperimentMatrix};
use crate::engine::{run_replication, EngineError, HandoverRecord};
use crate::selection::{
    evaluate, weighted_angle_average, AngleDeg, CandidateScore, Disqualification, Evaluation, SelectionParams,
    CL_REF_GAP,
};
use crate::topology::EnbId;

/// One value compared against its reference.
#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub got: f64,
    pub want: f64,
    pub tolerance: f64,
}

impl Check {
    fn new(name: impl Into<String>, got: f64, want: f64, tolerance: f64) -> Self {
        Self {
            name: name.into(),
            got,
            want,
            tolerance,
        }
    }

    pub fn passed(&self) -> bool {
        (self.got - self.want).abs() <= self.tolerance
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct WorkedExample {
    pub evaluation: Evaluation,
    pub checks: Vec<Check>,
    pub text: String,
}

impl WorkedExample {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(Check::passed) && self.evaluation.selected == Some(EnbId(4))
    }
}

/// Visited-cell polar coordinates `(r in km, theta)`, oldest first.
pub const EXAMPLE_HISTORY: [(f64, f64); 4] = [(6.0, 110.0), (5.0, 90.0), (4.0, 80.0), (3.0, 100.0)];
/// Bearings of neighbors 1 to 6.
pub const EXAMPLE_GAONB: [f64; 6] = [30.0, 90.0, 160.0, 230.0, 290.0, 350.0];
/// Current loads of neighbors 1 to 6. Taken as stated rather than derived
/// from connection counts out of 500: the count quoted for neighbor 5 (350)
/// would give 0.70, not the 0.66 its score is computed from.
pub const EXAMPLE_LOADS: [f64; 6] = [0.6, 0.5, 0.904, 0.4, 0.66, 0.3];
/// Measured signal of the shortlisted neighbors.
pub const EXAMPLE_RSS: [(u32, f64); 4] = [(1, 50.0), (4, 90.0), (5, 60.0), (6, 30.0)];

/// Runs the selection pipeline on the reference inputs and checks every
/// intermediate value.
pub fn reproduce_worked_example() -> WorkedExample {
    let params = SelectionParams::default();
    let aam = weighted_angle_average(&EXAMPLE_HISTORY).expect("history is non-empty");
    let candidates: Vec<(EnbId, AngleDeg)> = EXAMPLE_GAONB
        .iter()
        .enumerate()
        .map(|(i, &g)| (EnbId(i as u32 + 1), AngleDeg(g)))
        .collect();
    let loads: BTreeMap<EnbId, f64> = EXAMPLE_LOADS
        .iter()
        .enumerate()
        .map(|(i, &cl)| (EnbId(i as u32 + 1), cl))
        .collect();
    let rss: BTreeMap<EnbId, f64> = EXAMPLE_RSS.iter().map(|&(id, r)| (EnbId(id), r)).collect();
    let evaluation =
        evaluate(&params, Some(aam), &candidates, &loads, |id| rss[&id]).expect("reference inputs are valid");

    let b = &evaluation.breakdown;
    let score = |id: u32, f: fn(&CandidateScore) -> Option<f64>| b.get(EnbId(id)).and_then(f).unwrap_or(f64::NAN);
    let mut checks = vec![
        Check::new("AAM", aam.0, 96.11, 0.01),
        Check::new("EAE", evaluation.eae.map_or(f64::NAN, |a| a.0), 276.11, 0.01),
    ];
    for (id, want) in [
        (1, 113.89),
        (2, 173.89),
        (3, 116.11),
        (4, 46.11),
        (5, 13.89),
        (6, 73.89),
    ] {
        checks.push(Check::new(format!("RAD {id}"), score(id, |c| c.rad), want, 0.01));
    }
    for (id, want) in [(1, 0.043), (3, 0.034), (4, 0.302), (5, 0.426), (6, 0.196)] {
        checks.push(Check::new(format!("S_OM {id}"), score(id, |c| c.s_om), want, 0.001));
    }
    let om_sum: f64 = b.candidates.iter().filter_map(|c| c.s_om).sum();
    checks.push(Check::new("S_OM sum", om_sum, 1.0, 1e-9));
    for (id, want) in [(1, 0.181), (4, 0.306), (5, 0.144), (6, 0.368)] {
        checks.push(Check::new(format!("S_CL {id}"), score(id, |c| c.s_cl), want, 0.002));
    }
    let compl_sum: f64 = b
        .qualified()
        .map(|c| params.cl_limit - CL_REF_GAP - c.load.unwrap_or(f64::NAN))
        .sum();
    checks.push(Check::new("CL_COMPL sum", compl_sum, 1.60, 1e-9));
    for (id, want) in [(1, 0.22), (4, 0.39), (5, 0.26), (6, 0.13)] {
        checks.push(Check::new(format!("S_RSS {id}"), score(id, |c| c.s_rss), want, 0.005));
    }
    for (id, want) in [(1, 0.122), (4, 0.325), (5, 0.314), (6, 0.223)] {
        checks.push(Check::new(format!("S_WAS {id}"), score(id, |c| c.s_was), want, 0.002));
    }
    let disq = |id: u32| b.get(EnbId(id)).and_then(|c| c.disqualified);
    let expected_status = disq(2) == Some(Disqualification::Orientation) && disq(3) == Some(Disqualification::Load);

    let mut text = String::new();
    let _ = writeln!(text, "Visited cells (r km, theta deg): {EXAMPLE_HISTORY:?}");
    let _ = writeln!(text, "{}", format_evaluation(&evaluation));
    let _ = writeln!(text, "Checks:");
    for c in &checks {
        let _ = writeln!(
            text,
            "  {:<12} {:>10.4}  want {:>8.3} +/- {:<6}  {}",
            c.name,
            c.got,
            c.want,
            c.tolerance,
            if c.passed() { "ok" } else { "MISMATCH" }
        );
    }
    let _ = writeln!(
        text,
        "  disqualified: 2 by orientation, 3 by load  {}",
        if expected_status { "ok" } else { "MISMATCH" }
    );
    if !expected_status {
        checks.push(Check::new("disqualification pattern", 0.0, 1.0, 0.0));
    }
    WorkedExample {
        evaluation,
        checks,
        text,
    }
}

fn opt(v: Option<f64>, prec: usize) -> String {
    v.map_or_else(|| "-".to_owned(), |x| format!("{x:.prec$}"))
}

/// Score table of one decision.
pub fn format_evaluation(e: &Evaluation) -> String {
    let mut s = String::new();
    let angle = |a: Option<AngleDeg>| a.map_or_else(|| "n/a (no history)".to_owned(), |a| format!("{:.2}", a.0));
    let _ = writeln!(s, "AAM {}  EAE {}", angle(e.aam), angle(e.eae));
    let w = e.weights_used;
    let _ = writeln!(s, "weights OM {:.3}  CL {:.3}  RSS {:.3}", w.om, w.cl, w.rss);
    let _ = writeln!(
        s,
        "{:>6} {:>8} {:>8} {:>6} {:>8} {:>7} {:>7} {:>7} {:>7}  status",
        "eNB", "GAONB", "RAD", "CL", "quality", "S_OM", "S_CL", "S_RSS", "S_WAS"
    );
    for c in &e.breakdown.candidates {
        let status = match c.disqualified {
            Some(Disqualification::Orientation) => "out (OM)",
            Some(Disqualification::Load) => "out (CL)",
            None if Some(c.id) == e.selected => "SELECTED",
            None => "",
        };
        let _ = writeln!(
            s,
            "{:>6} {:>8} {:>8} {:>6} {:>8} {:>7} {:>7} {:>7} {:>7}  {status}",
            c.id.0,
            opt(c.gaonb, 2),
            opt(c.rad, 2),
            opt(c.load, 3),
            opt(c.rss_quality, 2),
            opt(c.s_om, 3),
            opt(c.s_cl, 3),
            opt(c.s_rss, 3),
            opt(c.s_was, 3),
        );
    }
    let _ = write!(
        s,
        "target: {}",
        e.selected
            .map_or_else(|| "none (empty shortlist)".to_owned(), |id| id.0.to_string())
    );
    s
}

/// Runs one replication of `cell` and describes the first handover whose
/// decision was taken at or after `step`.
pub fn explain(m: &ExperimentMatrix, cell: &Cell, replication: usize, step: usize) -> Result<String, EngineError> {
    let config = m.cell_config(cell);
    let outcome = run_replication(&config, replication)?;
    let mut s = String::new();
    let _ = writeln!(
        s,
        "cell {}  replication {replication} (seed {})  {} handovers",
        cell.slug(),
        outcome.seed,
        outcome.handovers
    );
    match outcome.records.iter().find(|r| r.decision_step >= step) {
        None => {
            let _ = write!(s, "no handover decided at or after step {step}");
        }
        Some(r) => s.push_str(&format_record(r)),
    }
    Ok(s)
}

pub fn format_record(r: &HandoverRecord) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        "decided at step {} at ({:.0}, {:.0}), executed at step {}",
        r.decision_step, r.decision_position.x, r.decision_position.y, r.step
    );
    let shortlist: Vec<String> = r.shortlist.iter().map(|id| id.0.to_string()).collect();
    let _ = writeln!(s, "serving {}  shortlist [{}]", r.serving.0, shortlist.join(", "));
    if let Some(f) = r.fallback {
        let _ = writeln!(s, "fallback: {}", f.as_str());
    }
    if let Some(e) = &r.evaluation {
        let _ = writeln!(s, "{}", format_evaluation(e));
    }
    let _ = write!(
        s,
        "selected {}  ground truth {}  {}",
        r.selected.0,
        r.ground_truth.0,
        if r.correct { "correct" } else { "incorrect" }
    );
    s
}
