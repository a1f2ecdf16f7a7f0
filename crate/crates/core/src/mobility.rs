//! UE trajectory generators on a fixed-resolution grid.
//!
//! Every generator works in integer grid cells of `step_resolution` meters
//! anchored at the field's minimum corner, so a step changes each axis by
//! 0 or ±1 cell and points are exact multiples of the resolution.

use std::fmt::Write as _;
use std::io;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::topology::{Point, Rect};

pub const DEFAULT_STEP_RESOLUTION: f64 = 10.0;
pub const DEFAULT_WAYPOINT_RESOLUTION: f64 = 1000.0;

#[derive(Debug, Error)]
pub enum MobilityError {
    #[error("a fixed path needs at least two waypoints, got {0}")]
    EmptyWaypoints(usize),
    #[error("waypoint ({}, {}) lies outside the field", .0.x, .0.y)]
    OutOfField(Point),
    #[error("invalid mobility spec: {0}")]
    InvalidSpec(String),
    #[error("path file line {line}: {msg}")]
    PathFile { line: usize, msg: String },
    #[error(transparent)]
    Io(#[from] io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MobilityKind {
    FixedPath,
    RandomWaypoint,
    RandomDirection,
    Manhattan,
}

impl MobilityKind {
    pub fn as_str(self) -> &'static str {
        match self {
            MobilityKind::FixedPath => "fixed_path",
            MobilityKind::RandomWaypoint => "random_waypoint",
            MobilityKind::RandomDirection => "random_direction",
            MobilityKind::Manhattan => "manhattan",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MobilitySpec {
    pub kind: MobilityKind,
    pub field: Rect,
    /// Number of movement steps. Ignored by fixed paths, whose length follows
    /// from the waypoints.
    pub steps: usize,
    pub step_resolution: f64,
    pub waypoint_resolution: f64,
    pub waypoints: Vec<Point>,
    pub seed: u64,
}

impl MobilitySpec {
    pub fn new(kind: MobilityKind, field: Rect, steps: usize, seed: u64) -> Self {
        Self {
            kind,
            field,
            steps,
            step_resolution: DEFAULT_STEP_RESOLUTION,
            waypoint_resolution: DEFAULT_WAYPOINT_RESOLUTION,
            waypoints: Vec::new(),
            seed,
        }
    }

    pub fn fixed_path(field: Rect, waypoints: Vec<Point>) -> Self {
        Self {
            waypoints,
            ..Self::new(MobilityKind::FixedPath, field, 1, 0)
        }
    }

    fn grid(&self) -> Result<Grid, MobilityError> {
        let res = self.step_resolution;
        if !(res.is_finite() && res > 0.0) {
            return Err(MobilityError::InvalidSpec(format!(
                "step_resolution must be positive, got {res}"
            )));
        }
        let cells = |len: f64, axis: &str| -> Result<i64, MobilityError> {
            let n = (len / res).round();
            if len < 0.0 || !len.is_finite() || (n * res - len).abs() > 1e-6 * res.max(1.0) {
                return Err(MobilityError::InvalidSpec(format!(
                    "field {axis} {len} m is not a non-negative multiple of the {res} m step"
                )));
            }
            Ok(n as i64)
        };
        Ok(Grid {
            origin: self.field.min,
            res,
            nx: cells(self.field.width(), "width")?,
            ny: cells(self.field.height(), "height")?,
        })
    }

    fn check_steps(&self) -> Result<(), MobilityError> {
        if self.steps == 0 {
            return Err(MobilityError::InvalidSpec("steps must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub points: Vec<Point>,
    pub step_resolution: f64,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Number of movement steps (points minus one).
    pub fn steps(&self) -> usize {
        self.points.len().saturating_sub(1)
    }

    /// One `x y` pair per line, meters.
    pub fn to_path_file(&self) -> String {
        let mut out = String::with_capacity(self.points.len() * 12);
        for p in &self.points {
            let _ = writeln!(out, "{} {}", p.x, p.y);
        }
        out
    }

    pub fn write_path_file(&self, path: &Path) -> Result<(), MobilityError> {
        std::fs::write(path, self.to_path_file())?;
        Ok(())
    }
}

/// Parses a path file: one `x y` pair per line; blank lines and `#` comments
/// are skipped.
pub fn parse_path_file(text: &str) -> Result<Vec<Point>, MobilityError> {
    let mut points = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let err = |msg: String| MobilityError::PathFile { line: i + 1, msg };
        let mut fields = line.split_whitespace();
        let (Some(x), Some(y), None) = (fields.next(), fields.next(), fields.next()) else {
            return Err(err(format!("expected two numbers, got {line:?}")));
        };
        let parse = |s: &str| {
            s.parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| err(format!("not a finite number: {s:?}")))
        };
        points.push(Point::new(parse(x)?, parse(y)?));
    }
    Ok(points)
}

pub fn read_path_file(path: &Path) -> Result<Vec<Point>, MobilityError> {
    parse_path_file(&std::fs::read_to_string(path)?)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct Cell {
    x: i64,
    y: i64,
}

#[derive(Debug, Clone, Copy)]
struct Grid {
    origin: Point,
    res: f64,
    nx: i64,
    ny: i64,
}

impl Grid {
    fn contains(&self, c: Cell) -> bool {
        (0..=self.nx).contains(&c.x) && (0..=self.ny).contains(&c.y)
    }

    fn point(&self, c: Cell) -> Point {
        Point::new(
            self.origin.x + c.x as f64 * self.res,
            self.origin.y + c.y as f64 * self.res,
        )
    }

    fn snap(&self, p: Point) -> Cell {
        Cell {
            x: ((p.x - self.origin.x) / self.res).round() as i64,
            y: ((p.y - self.origin.y) / self.res).round() as i64,
        }
    }

    fn random_cell(&self, rng: &mut impl Rng) -> Cell {
        Cell {
            x: rng.gen_range(0..=self.nx),
            y: rng.gen_range(0..=self.ny),
        }
    }
}

/// round(num / den) for den > 0, halves rounded up.
fn div_round(num: i64, den: i64) -> i64 {
    (2 * num + den).div_euclid(2 * den)
}

/// Cells visited walking from `from` (exclusive) to `to` (inclusive) along
/// the rasterized straight segment; each step moves 0 or 1 cell per axis.
fn segment(from: Cell, to: Cell) -> impl Iterator<Item = Cell> {
    let (dx, dy) = (to.x - from.x, to.y - from.y);
    let n = dx.abs().max(dy.abs());
    (1..=n).map(move |i| Cell {
        x: from.x + div_round(i * dx, n),
        y: from.y + div_round(i * dy, n),
    })
}

struct Walk {
    grid: Grid,
    cells: Vec<Cell>,
    target_steps: usize,
}

impl Walk {
    fn new(grid: Grid, start: Cell, steps: usize) -> Self {
        let mut cells = Vec::with_capacity(steps + 1);
        cells.push(start);
        Self {
            grid,
            cells,
            target_steps: steps,
        }
    }

    fn done(&self) -> bool {
        self.cells.len() > self.target_steps
    }

    fn current(&self) -> Cell {
        *self.cells.last().expect("walk always has a start cell")
    }

    /// Appends cells until the budget runs out; returns whether every cell was taken.
    fn extend(&mut self, cells: impl IntoIterator<Item = Cell>) -> bool {
        for c in cells {
            if self.done() {
                return false;
            }
            debug_assert!(self.grid.contains(c));
            self.cells.push(c);
        }
        true
    }

    fn finish(self) -> Trajectory {
        Trajectory {
            points: self.cells.iter().map(|&c| self.grid.point(c)).collect(),
            step_resolution: self.grid.res,
        }
    }
}

/// Discretizes the polyline through `spec.waypoints`.
pub fn generate_fixed_path(spec: &MobilitySpec) -> Result<Trajectory, MobilityError> {
    if spec.waypoints.len() < 2 {
        return Err(MobilityError::EmptyWaypoints(spec.waypoints.len()));
    }
    if let Some(p) = spec.waypoints.iter().find(|p| !spec.field.contains(**p)) {
        return Err(MobilityError::OutOfField(*p));
    }
    let grid = spec.grid()?;
    let snapped: Vec<Cell> = spec
        .waypoints
        .iter()
        .map(|&p| {
            let c = grid.snap(p);
            // rounding may push a waypoint on the border one cell out
            Cell {
                x: c.x.clamp(0, grid.nx),
                y: c.y.clamp(0, grid.ny),
            }
        })
        .collect();
    let mut cells = vec![snapped[0]];
    for pair in snapped.windows(2) {
        cells.extend(segment(pair[0], pair[1]));
    }
    Ok(Trajectory {
        points: cells.iter().map(|&c| grid.point(c)).collect(),
        step_resolution: grid.res,
    })
}

/// Manhattan model: waypoints on the coarse waypoint grid, reached by moving
/// along x first and then along y.
pub fn generate_manhattan(spec: &MobilitySpec) -> Result<Trajectory, MobilityError> {
    Ok(trace_manhattan(spec)?.0)
}

/// Like [`generate_manhattan`], also returning the drawn waypoints in order.
pub fn trace_manhattan(spec: &MobilitySpec) -> Result<(Trajectory, Vec<Point>), MobilityError> {
    spec.check_steps()?;
    let grid = spec.grid()?;
    let ratio = spec.waypoint_resolution / grid.res;
    let stride = ratio.round() as i64;
    if stride < 1 || (ratio - stride as f64).abs() > 1e-9 {
        return Err(MobilityError::InvalidSpec(format!(
            "waypoint_resolution {} must be a positive multiple of the {} m step",
            spec.waypoint_resolution, grid.res
        )));
    }
    if grid.nx % stride != 0 || grid.ny % stride != 0 {
        return Err(MobilityError::InvalidSpec(format!(
            "waypoint_resolution {} does not divide the field",
            spec.waypoint_resolution
        )));
    }
    let (wx, wy) = (grid.nx / stride, grid.ny / stride);
    if wx == 0 && wy == 0 {
        return Err(MobilityError::InvalidSpec(
            "field holds a single waypoint; the UE cannot move".into(),
        ));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let draw = |rng: &mut ChaCha8Rng| Cell {
        x: rng.gen_range(0..=wx) * stride,
        y: rng.gen_range(0..=wy) * stride,
    };
    let mut walk = Walk::new(grid, draw(&mut rng), spec.steps);
    let mut waypoints = vec![grid.point(walk.current())];
    while !walk.done() {
        let from = walk.current();
        let to = loop {
            let c = draw(&mut rng);
            if c != from {
                break c;
            }
        };
        waypoints.push(grid.point(to));
        let corner = Cell { x: to.x, y: from.y };
        let legs = segment(from, corner).chain(segment(corner, to));
        walk.extend(legs);
    }
    Ok((walk.finish(), waypoints))
}

/// Random Waypoint without pauses: waypoints uniform on the step grid,
/// approached along the rasterized straight line.
pub fn generate_random_waypoint(spec: &MobilitySpec) -> Result<Trajectory, MobilityError> {
    Ok(trace_random_waypoint(spec)?.0)
}

/// Like [`generate_random_waypoint`], also returning every drawn waypoint
/// (including the start point).
pub fn trace_random_waypoint(spec: &MobilitySpec) -> Result<(Trajectory, Vec<Point>), MobilityError> {
    spec.check_steps()?;
    let grid = spec.grid()?;
    if grid.nx == 0 && grid.ny == 0 {
        return Err(MobilityError::InvalidSpec("field is a single point".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut walk = Walk::new(grid, grid.random_cell(&mut rng), spec.steps);
    let mut waypoints = vec![grid.point(walk.current())];
    while !walk.done() {
        let from = walk.current();
        let to = loop {
            let c = grid.random_cell(&mut rng);
            if c != from {
                break c;
            }
        };
        waypoints.push(grid.point(to));
        walk.extend(segment(from, to));
    }
    Ok((walk.finish(), waypoints))
}

/// Random Direction: a uniform heading is kept until the next step would
/// leave the field, then a new inward heading is drawn.
pub fn generate_random_direction(spec: &MobilitySpec) -> Result<Trajectory, MobilityError> {
    Ok(trace_random_direction(spec)?.0)
}

/// Like [`generate_random_direction`], also returning the point indices at
/// which the heading changed.
pub fn trace_random_direction(spec: &MobilitySpec) -> Result<(Trajectory, Vec<usize>), MobilityError> {
    spec.check_steps()?;
    let grid = spec.grid()?;
    if grid.nx == 0 && grid.ny == 0 {
        return Err(MobilityError::InvalidSpec("field is a single point".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut walk = Walk::new(grid, grid.random_cell(&mut rng), spec.steps);

    // unit step along the heading, scaled so the dominant axis moves one cell
    let heading = |rng: &mut ChaCha8Rng| {
        let theta = rng.gen_range(0.0..360.0f64).to_radians();
        let (s, c) = theta.sin_cos();
        let m = s.abs().max(c.abs());
        (c / m, s / m)
    };
    let ray = |start: Cell, (ux, uy): (f64, f64), i: i64| Cell {
        x: start.x + (i as f64 * ux).round() as i64,
        y: start.y + (i as f64 * uy).round() as i64,
    };

    let mut turns = Vec::new();
    let mut dir = heading(&mut rng);
    let mut start = walk.current();
    let mut i = 0i64;
    while !walk.done() {
        let next = ray(start, dir, i + 1);
        if grid.contains(next) {
            i += 1;
            walk.extend([next]);
            continue;
        }
        turns.push(walk.cells.len() - 1);
        start = walk.current();
        i = 0;
        dir = loop {
            let d = heading(&mut rng);
            if grid.contains(ray(start, d, 1)) {
                break d;
            }
        };
    }
    Ok((walk.finish(), turns))
}

/// Dispatches on `spec.kind`.
pub fn generate(spec: &MobilitySpec) -> Result<Trajectory, MobilityError> {
    match spec.kind {
        MobilityKind::FixedPath => generate_fixed_path(spec),
        MobilityKind::RandomWaypoint => generate_random_waypoint(spec),
        MobilityKind::RandomDirection => generate_random_direction(spec),
        MobilityKind::Manhattan => generate_manhattan(spec),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn field() -> Rect {
        Rect::new(Point::new(0.0, 0.0), Point::new(19_000.0, 19_000.0))
    }

    fn pts(t: &Trajectory) -> Vec<(f64, f64)> {
        t.points.iter().map(|p| (p.x, p.y)).collect()
    }

    /// Per-axis displacement of every step is 0 or ±res.
    fn step_law(t: &Trajectory) -> bool {
        t.points.windows(2).all(|w| {
            let dx = (w[1].x - w[0].x).abs();
            let dy = (w[1].y - w[0].y).abs();
            [dx, dy].iter().all(|&d| d == 0.0 || d == t.step_resolution)
        })
    }

    #[test]
    fn straight_fixed_path() {
        let spec = MobilitySpec::fixed_path(field(), vec![Point::new(0.0, 0.0), Point::new(100.0, 0.0)]);
        let t = generate_fixed_path(&spec).unwrap();
        let want: Vec<(f64, f64)> = (0..=10).map(|i| (i as f64 * 10.0, 0.0)).collect();
        assert_eq!(pts(&t), want);
    }

    #[test]
    fn l_shaped_fixed_path() {
        let spec = MobilitySpec::fixed_path(
            field(),
            vec![Point::new(0.0, 0.0), Point::new(0.0, 50.0), Point::new(50.0, 50.0)],
        );
        let t = generate_fixed_path(&spec).unwrap();
        assert_eq!(t.len(), 11);
        assert_eq!(t.points[5], Point::new(0.0, 50.0));
        assert_eq!(*t.points.last().unwrap(), Point::new(50.0, 50.0));
        assert!(step_law(&t));
    }

    #[test]
    fn diagonal_fixed_path_is_a_staircase() {
        for end in [Point::new(100.0, 100.0), Point::new(100.0, 37.0), Point::new(3.0, 96.0)] {
            let spec = MobilitySpec::fixed_path(field(), vec![Point::new(0.0, 0.0), end]);
            let t = generate_fixed_path(&spec).unwrap();
            assert!(step_law(&t));
            assert!(t.points.last().unwrap().distance(end) <= 10.0);
        }
    }

    #[test]
    fn fixed_path_errors() {
        let spec = MobilitySpec::fixed_path(field(), vec![Point::new(0.0, 0.0)]);
        assert!(matches!(
            generate_fixed_path(&spec),
            Err(MobilityError::EmptyWaypoints(1))
        ));
        let spec = MobilitySpec::fixed_path(field(), vec![Point::new(0.0, 0.0), Point::new(-5.0, 0.0)]);
        assert!(matches!(generate_fixed_path(&spec), Err(MobilityError::OutOfField(_))));
    }

    #[test]
    fn manhattan_step_audit() {
        let spec = MobilitySpec::new(MobilityKind::Manhattan, field(), 10_000, 42);
        let (t, waypoints) = trace_manhattan(&spec).unwrap();
        assert_eq!(t.len(), 10_001);
        for w in t.points.windows(2) {
            let d = (w[1].x - w[0].x, w[1].y - w[0].y);
            assert!(
                [(10.0, 0.0), (-10.0, 0.0), (0.0, 10.0), (0.0, -10.0), (0.0, 0.0)].contains(&d),
                "bad step {d:?}"
            );
        }
        for w in &waypoints {
            assert_eq!(w.x % 1000.0, 0.0);
            assert_eq!(w.y % 1000.0, 0.0);
        }
        // every completed waypoint is visited
        let visited: std::collections::HashSet<(i64, i64)> =
            t.points.iter().map(|p| (p.x as i64, p.y as i64)).collect();
        for w in &waypoints[..waypoints.len() - 1] {
            assert!(visited.contains(&(w.x as i64, w.y as i64)));
        }
        assert_eq!(generate_manhattan(&spec).unwrap(), t);
    }

    #[test]
    fn manhattan_moves_x_before_y() {
        let spec = MobilitySpec::new(MobilityKind::Manhattan, field(), 5_000, 3);
        let (t, waypoints) = trace_manhattan(&spec).unwrap();
        let mut idx = 0;
        for pair in waypoints.windows(2) {
            let (from, to) = (pair[0], pair[1]);
            let mut seen_y = false;
            while idx + 1 < t.len() && t.points[idx] != to {
                let (a, b) = (t.points[idx], t.points[idx + 1]);
                if a.y != b.y {
                    seen_y = true;
                    assert_eq!(a.x, to.x);
                } else {
                    assert!(!seen_y, "x move after y move between {from:?} and {to:?}");
                }
                idx += 1;
            }
        }
    }

    #[test]
    fn manhattan_rejects_misaligned_resolution() {
        let mut spec = MobilitySpec::new(MobilityKind::Manhattan, field(), 10, 0);
        spec.waypoint_resolution = 3000.0;
        assert!(generate_manhattan(&spec).is_err());
        spec.waypoint_resolution = 1000.0;
        spec.steps = 0;
        assert!(generate_manhattan(&spec).is_err());
    }

    #[test]
    fn random_direction_turns_only_at_edges() {
        let spec = MobilitySpec::new(MobilityKind::RandomDirection, field(), 10_000, 7);
        let (t, turns) = trace_random_direction(&spec).unwrap();
        assert_eq!(t.len(), 10_001);
        assert!(step_law(&t));
        assert!(t.points.iter().all(|p| field().contains(*p)));
        assert!(!turns.is_empty());

        let f = field();
        let on_edge = |p: Point| p.x == f.min.x || p.x == f.max.x || p.y == f.min.y || p.y == f.max.y;
        for &k in &turns {
            assert!(on_edge(t.points[k]), "turn away from the edge at {:?}", t.points[k]);
        }
        // between turns the walk is a straight rasterized ray: every point lies
        // within one cell of the chord from the segment start to its end
        let mut bounds = vec![0];
        bounds.extend(&turns);
        bounds.push(t.len() - 1);
        let mut edge_contacts = 0;
        for w in bounds.windows(2) {
            let (a, b) = (t.points[w[0]], t.points[w[1]]);
            let (dx, dy) = (b.x - a.x, b.y - a.y);
            let len = dx.hypot(dy);
            if len == 0.0 {
                continue;
            }
            for p in &t.points[w[0]..=w[1]] {
                let off = ((p.x - a.x) * dy - (p.y - a.y) * dx).abs() / len;
                assert!(off <= 10.0, "segment deviates by {off} m");
            }
            if w[1] != t.len() - 1 && on_edge(b) {
                edge_contacts += 1;
            }
        }
        assert_eq!(edge_contacts, turns.len());
    }

    #[test]
    fn random_waypoint_audit() {
        let spec = MobilitySpec::new(MobilityKind::RandomWaypoint, field(), 10_000, 11);
        let (t, waypoints) = trace_random_waypoint(&spec).unwrap();
        assert_eq!(t.len(), 10_001);
        assert!(step_law(&t));
        assert!(t.points.iter().all(|p| field().contains(*p)));
        for w in &waypoints {
            assert_eq!(w.x % 10.0, 0.0);
            assert_eq!(w.y % 10.0, 0.0);
        }
    }

    fn pearson(a: &[f64], b: &[f64]) -> f64 {
        let n = a.len() as f64;
        let (ma, mb) = (a.iter().sum::<f64>() / n, b.iter().sum::<f64>() / n);
        let cov: f64 = a.iter().zip(b).map(|(x, y)| (x - ma) * (y - mb)).sum();
        let va: f64 = a.iter().map(|x| (x - ma).powi(2)).sum();
        let vb: f64 = b.iter().map(|y| (y - mb).powi(2)).sum();
        cov / (va * vb).sqrt()
    }

    #[test]
    fn random_waypoints_are_independent() {
        // enough steps for >10^4 waypoints in a small field
        let small = Rect::new(Point::new(0.0, 0.0), Point::new(500.0, 500.0));
        let spec = MobilitySpec::new(MobilityKind::RandomWaypoint, small, 300_000, 5);
        let (_, w) = trace_random_waypoint(&spec).unwrap();
        assert!(w.len() > 10_000, "only {} waypoints", w.len());
        let xs: Vec<f64> = w.iter().map(|p| p.x).collect();
        let ys: Vec<f64> = w.iter().map(|p| p.y).collect();
        assert!(pearson(&xs[..xs.len() - 1], &xs[1..]).abs() < 0.1);
        assert!(pearson(&ys[..ys.len() - 1], &ys[1..]).abs() < 0.1);
        // legs sharing a waypoint are anti-correlated by construction; legs
        // two apart share nothing
        let headings: Vec<f64> = w
            .windows(2)
            .map(|p| (p[1].y - p[0].y).atan2(p[1].x - p[0].x).to_degrees().rem_euclid(360.0))
            .collect();
        let n = headings.len();
        assert!(pearson(&headings[..n - 2], &headings[2..]).abs() < 0.1);
    }

    #[test]
    fn generators_are_deterministic() {
        for kind in [
            MobilityKind::Manhattan,
            MobilityKind::RandomWaypoint,
            MobilityKind::RandomDirection,
        ] {
            let spec = MobilitySpec::new(kind, field(), 2_000, 99);
            assert_eq!(generate(&spec).unwrap(), generate(&spec).unwrap());
            let other = MobilitySpec {
                seed: 100,
                ..spec.clone()
            };
            assert_ne!(generate(&spec).unwrap(), generate(&other).unwrap());
        }
    }

    #[test]
    fn path_file_round_trip() {
        let spec = MobilitySpec::new(MobilityKind::RandomWaypoint, field(), 500, 1);
        let t = generate(&spec).unwrap();
        assert_eq!(parse_path_file(&t.to_path_file()).unwrap(), t.points);
        let parsed = parse_path_file("# header\n0 0\n\n  10.5 20 # trailing\n").unwrap();
        assert_eq!(parsed, vec![Point::new(0.0, 0.0), Point::new(10.5, 20.0)]);
        assert!(matches!(
            parse_path_file("1 2 3"),
            Err(MobilityError::PathFile { line: 1, .. })
        ));
        assert!(matches!(
            parse_path_file("1\n2 x"),
            Err(MobilityError::PathFile { line: 1, .. })
        ));
        assert!(matches!(
            parse_path_file("1 2\n2 nan"),
            Err(MobilityError::PathFile { line: 2, .. })
        ));
    }

    #[test]
    fn div_round_rounds_half_up() {
        assert_eq!(div_round(5, 10), 1);
        assert_eq!(div_round(4, 10), 0);
        assert_eq!(div_round(-5, 10), 0);
        assert_eq!(div_round(-6, 10), -1);
    }
}
