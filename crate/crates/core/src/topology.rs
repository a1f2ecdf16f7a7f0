//! eNB grid deployment, polar coordinate tables and neighbor sets.

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Coverage radius as a fraction of the inter-eNB distance.
pub const COVERAGE_FRACTION: f64 = 0.75;

#[derive(Debug, Error, PartialEq)]
pub enum TopologyError {
    #[error("invalid deployment parameter: {0}")]
    InvalidParameter(String),
    #[error("origin and target coincide at ({x}, {y})")]
    CoincidentPoints { x: f64, y: f64 },
    #[error("unknown eNB id {0}")]
    UnknownId(EnbId),
}

/// Dense row-major eNB identifier.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct EnbId(pub u32);

impl EnbId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for EnbId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn distance(self, other: Point) -> f64 {
        (other.x - self.x).hypot(other.y - self.y)
    }
}

/// Distance in meters and angle in degrees, counterclockwise from +x, in `[0, 360)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PolarCoord {
    pub r: f64,
    pub theta: f64,
}

/// Maps any finite angle in degrees onto `[0, 360)`.
pub fn normalize_degrees(deg: f64) -> f64 {
    let a = deg.rem_euclid(360.0);
    // rem_euclid can round up to exactly 360 for tiny negative inputs
    if a >= 360.0 {
        0.0
    } else {
        a
    }
}

/// Polar coordinate of `target` relative to `origin`.
pub fn polar_coordinate(origin: Point, target: Point) -> Result<PolarCoord, TopologyError> {
    let dx = target.x - origin.x;
    let dy = target.y - origin.y;
    if dx == 0.0 && dy == 0.0 {
        return Err(TopologyError::CoincidentPoints {
            x: origin.x,
            y: origin.y,
        });
    }
    Ok(PolarCoord {
        r: dx.hypot(dy),
        theta: normalize_degrees(dy.atan2(dx).to_degrees()),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Enb {
    pub id: EnbId,
    pub center: Point,
    pub coverage_radius: f64,
}

/// Axis-aligned rectangle in meters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rect {
    pub min: Point,
    pub max: Point,
}

impl Rect {
    pub fn new(min: Point, max: Point) -> Self {
        Self { min, max }
    }

    pub fn width(&self) -> f64 {
        self.max.x - self.min.x
    }

    pub fn height(&self) -> f64 {
        self.max.y - self.min.y
    }

    pub fn contains(&self, p: Point) -> bool {
        p.x >= self.min.x && p.x <= self.max.x && p.y >= self.min.y && p.y <= self.max.y
    }
}

/// Parameters that fully determine a [`Deployment`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DeploymentSpec {
    pub rows: u32,
    pub cols: u32,
    pub inter_enb_distance: f64,
    pub jitter_fraction: f64,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Deployment {
    spec: DeploymentSpec,
    enbs: Vec<Enb>,
}

/// Lays out `rows x cols` eNBs on a square grid, row-major, with optional
/// uniform per-axis placement jitter of up to `jitter_fraction * inter_enb_distance`.
pub fn build_deployment(
    rows: u32,
    cols: u32,
    inter_enb_distance: f64,
    jitter_fraction: f64,
    seed: u64,
) -> Result<Deployment, TopologyError> {
    Deployment::new(DeploymentSpec {
        rows,
        cols,
        inter_enb_distance,
        jitter_fraction,
        seed,
    })
}

impl Deployment {
    pub fn new(spec: DeploymentSpec) -> Result<Self, TopologyError> {
        let DeploymentSpec {
            rows,
            cols,
            inter_enb_distance: d,
            jitter_fraction: f,
            seed,
        } = spec;
        if rows == 0 || cols == 0 {
            return Err(TopologyError::InvalidParameter(format!(
                "grid must be at least 1x1, got {rows}x{cols}"
            )));
        }
        if !(d.is_finite() && d > 0.0) {
            return Err(TopologyError::InvalidParameter(format!(
                "inter_enb_distance must be positive, got {d}"
            )));
        }
        if !(0.0..0.5).contains(&f) {
            return Err(TopologyError::InvalidParameter(format!(
                "jitter_fraction must lie in [0, 0.5), got {f}"
            )));
        }

        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let max_offset = f * d;
        let radius = COVERAGE_FRACTION * d;
        let mut enbs = Vec::with_capacity((rows * cols) as usize);
        for row in 0..rows {
            for col in 0..cols {
                let mut center = Point::new(col as f64 * d, row as f64 * d);
                if max_offset > 0.0 {
                    center.x += rng.gen_range(-max_offset..=max_offset);
                    center.y += rng.gen_range(-max_offset..=max_offset);
                }
                enbs.push(Enb {
                    id: EnbId(row * cols + col),
                    center,
                    coverage_radius: radius,
                });
            }
        }
        Ok(Self { spec, enbs })
    }

    pub fn spec(&self) -> &DeploymentSpec {
        &self.spec
    }

    pub fn rows(&self) -> u32 {
        self.spec.rows
    }

    pub fn cols(&self) -> u32 {
        self.spec.cols
    }

    pub fn inter_enb_distance(&self) -> f64 {
        self.spec.inter_enb_distance
    }

    pub fn coverage_radius(&self) -> f64 {
        COVERAGE_FRACTION * self.spec.inter_enb_distance
    }

    pub fn enbs(&self) -> &[Enb] {
        &self.enbs
    }

    pub fn len(&self) -> usize {
        self.enbs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.enbs.is_empty()
    }

    pub fn enb(&self, id: EnbId) -> Result<&Enb, TopologyError> {
        self.enbs.get(id.index()).ok_or(TopologyError::UnknownId(id))
    }

    /// Unjittered grid position of `id`.
    pub fn grid_point(&self, id: EnbId) -> Result<Point, TopologyError> {
        let (row, col) = self.row_col(id)?;
        let d = self.spec.inter_enb_distance;
        Ok(Point::new(col as f64 * d, row as f64 * d))
    }

    fn row_col(&self, id: EnbId) -> Result<(u32, u32), TopologyError> {
        if id.index() >= self.enbs.len() {
            return Err(TopologyError::UnknownId(id));
        }
        Ok((id.0 / self.spec.cols, id.0 % self.spec.cols))
    }

    /// The rectangle spanned by the unjittered grid points. Mobility models
    /// keep the UE inside it.
    pub fn field(&self) -> Rect {
        let d = self.spec.inter_enb_distance;
        Rect::new(
            Point::new(0.0, 0.0),
            Point::new((self.spec.cols - 1) as f64 * d, (self.spec.rows - 1) as f64 * d),
        )
    }

    /// Polar coordinate of `target`'s center relative to `origin`'s center.
    pub fn polar(&self, origin: EnbId, target: EnbId) -> Result<PolarCoord, TopologyError> {
        polar_coordinate(self.enb(origin)?.center, self.enb(target)?.center)
    }

    /// Grid-adjacent (8-connected) eNBs of `id`, ascending.
    pub fn neighbors_of(&self, id: EnbId) -> Result<Vec<EnbId>, TopologyError> {
        let (row, col) = self.row_col(id)?;
        let (rows, cols) = (self.spec.rows as i64, self.spec.cols as i64);
        let mut out = Vec::with_capacity(8);
        for dr in -1i64..=1 {
            for dc in -1i64..=1 {
                if dr == 0 && dc == 0 {
                    continue;
                }
                let (r, c) = (row as i64 + dr, col as i64 + dc);
                if (0..rows).contains(&r) && (0..cols).contains(&c) {
                    out.push(EnbId((r * cols + c) as u32));
                }
            }
        }
        Ok(out)
    }

    /// All eNBs whose coverage circle contains `p`, ascending.
    ///
    /// Only grid cells that can possibly reach `p` are inspected.
    pub fn covering_enbs(&self, p: Point) -> Vec<EnbId> {
        let d = self.spec.inter_enb_distance;
        let reach = self.coverage_radius() + self.spec.jitter_fraction * d;
        let span = |lo: f64, hi: f64, n: u32| -> Option<(u32, u32)> {
            let first = (lo / d).ceil().max(0.0);
            let last = (hi / d).floor().min((n - 1) as f64);
            (first <= last).then_some((first as u32, last as u32))
        };
        let (Some((c0, c1)), Some((r0, r1))) = (
            span(p.x - reach, p.x + reach, self.spec.cols),
            span(p.y - reach, p.y + reach, self.spec.rows),
        ) else {
            return Vec::new();
        };
        let mut out = Vec::new();
        for row in r0..=r1 {
            for col in c0..=c1 {
                let enb = &self.enbs[(row * self.spec.cols + col) as usize];
                if enb.center.distance(p) <= enb.coverage_radius {
                    out.push(enb.id);
                }
            }
        }
        out
    }
}

/// Polar coordinate table of one eNB: every other eNB's position relative
/// to the origin's center.
#[derive(Debug, Clone, PartialEq)]
pub struct Pct {
    origin: EnbId,
    // indexed by id, skipping the origin
    entries: Vec<PolarCoord>,
}

impl Pct {
    pub fn origin(&self) -> EnbId {
        self.origin
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, id: EnbId) -> Option<PolarCoord> {
        use std::cmp::Ordering::*;
        match id.cmp(&self.origin) {
            Less => self.entries.get(id.index()).copied(),
            Equal => None,
            Greater => self.entries.get(id.index() - 1).copied(),
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = (EnbId, PolarCoord)> + '_ {
        let origin = self.origin.0;
        self.entries.iter().enumerate().map(move |(i, &pc)| {
            let i = i as u32;
            (EnbId(if i < origin { i } else { i + 1 }), pc)
        })
    }
}

pub fn build_pct(deployment: &Deployment, origin: EnbId) -> Result<Pct, TopologyError> {
    let center = deployment.enb(origin)?.center;
    let entries = deployment
        .enbs()
        .iter()
        .filter(|e| e.id != origin)
        .map(|e| polar_coordinate(center, e.center))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(Pct { origin, entries })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn full_grid_has_expected_size_and_radius() {
        let dep = build_deployment(20, 20, 1000.0, 0.0, 1).unwrap();
        assert_eq!(dep.len(), 400);
        assert!(dep.enbs().iter().all(|e| e.coverage_radius == 750.0));
        assert_eq!(dep.enb(EnbId(21)).unwrap().center, Point::new(1000.0, 1000.0));
    }

    #[test]
    fn single_cell_grid() {
        let dep = build_deployment(1, 1, 1000.0, 0.0, 9).unwrap();
        assert_eq!(dep.len(), 1);
        assert_eq!(dep.enbs()[0].center, Point::new(0.0, 0.0));
        assert!(dep.neighbors_of(EnbId(0)).unwrap().is_empty());
        assert!(build_pct(&dep, EnbId(0)).unwrap().is_empty());
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(build_deployment(0, 3, 1000.0, 0.0, 0).is_err());
        assert!(build_deployment(3, 3, 0.0, 0.0, 0).is_err());
        assert!(build_deployment(3, 3, 1000.0, 0.5, 0).is_err());
        assert!(build_deployment(3, 3, 1000.0, -0.1, 0).is_err());
    }

    #[test]
    fn jitter_stays_within_bound() {
        for seed in 0..100 {
            let dep = build_deployment(20, 20, 1000.0, 0.05, seed).unwrap();
            for e in dep.enbs() {
                let g = dep.grid_point(e.id).unwrap();
                assert!((e.center.x - g.x).abs() <= 50.0);
                assert!((e.center.y - g.y).abs() <= 50.0);
            }
        }
        let a = build_deployment(20, 20, 1000.0, 0.05, 3).unwrap();
        let b = build_deployment(20, 20, 1000.0, 0.05, 3).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn polar_examples() {
        let pc = polar_coordinate(Point::new(0.0, 0.0), Point::new(0.0, 5.0)).unwrap();
        assert_eq!((pc.r, pc.theta), (5.0, 90.0));
        let pc = polar_coordinate(Point::new(0.0, 0.0), Point::new(3.0, 4.0)).unwrap();
        assert_abs_diff_eq!(pc.r, 5.0, epsilon = 1e-12);
        // atan2(4, 3) in degrees
        assert_abs_diff_eq!(pc.theta, 53.130_102_354_155_98, epsilon = 1e-9);
        let pc = polar_coordinate(Point::new(1.0, 1.0), Point::new(0.0, 1.0)).unwrap();
        assert_eq!((pc.r, pc.theta), (1.0, 180.0));
        assert!(matches!(
            polar_coordinate(Point::new(2.0, 2.0), Point::new(2.0, 2.0)),
            Err(TopologyError::CoincidentPoints { .. })
        ));
    }

    #[test]
    fn angle_normalization_edges() {
        assert_eq!(normalize_degrees(-1e-20), 0.0);
        assert_eq!(normalize_degrees(360.0), 0.0);
        assert_eq!(normalize_degrees(-90.0), 270.0);
        let pc = polar_coordinate(Point::new(0.0, 0.0), Point::new(1.0, -1e-300)).unwrap();
        assert!(pc.theta < 360.0);
    }

    #[test]
    fn pct_entries() {
        let dep = build_deployment(20, 20, 1000.0, 0.0, 0).unwrap();
        assert_eq!(build_pct(&dep, EnbId(137)).unwrap().len(), 399);

        let dep = build_deployment(1, 2, 800.0, 0.0, 0).unwrap();
        let pct = build_pct(&dep, EnbId(0)).unwrap();
        assert_eq!(
            pct.iter().collect::<Vec<_>>(),
            vec![(EnbId(1), PolarCoord { r: 800.0, theta: 0.0 })]
        );
        assert!(matches!(build_pct(&dep, EnbId(5)), Err(TopologyError::UnknownId(_))));
    }

    #[test]
    fn jittered_pct_matches_recomputation() {
        let dep = build_deployment(6, 7, 1000.0, 0.05, 11).unwrap();
        for origin in dep.enbs() {
            let pct = build_pct(&dep, origin.id).unwrap();
            assert_eq!(pct.get(origin.id), None);
            for other in dep.enbs().iter().filter(|e| e.id != origin.id) {
                let want = polar_coordinate(origin.center, other.center).unwrap();
                assert_eq!(pct.get(other.id), Some(want));
            }
            for (id, pc) in pct.iter() {
                assert_eq!(Some(pc), pct.get(id));
            }
        }
    }

    #[test]
    fn neighbor_counts() {
        let dep = build_deployment(20, 20, 1000.0, 0.0, 0).unwrap();
        assert_eq!(dep.neighbors_of(EnbId(21)).unwrap().len(), 8);
        assert_eq!(
            dep.neighbors_of(EnbId(0)).unwrap(),
            vec![EnbId(1), EnbId(20), EnbId(21)]
        );
        assert_eq!(dep.neighbors_of(EnbId(5)).unwrap().len(), 5);
        assert_eq!(dep.neighbors_of(EnbId(399)).unwrap().len(), 3);
        let dep = build_deployment(3, 3, 1000.0, 0.0, 0).unwrap();
        let ids: Vec<u32> = dep.neighbors_of(EnbId(4)).unwrap().iter().map(|i| i.0).collect();
        assert_eq!(ids, vec![0, 1, 2, 3, 5, 6, 7, 8]);
        assert!(dep.neighbors_of(EnbId(9)).is_err());
    }

    #[test]
    fn covering_examples() {
        let dep = build_deployment(20, 20, 1000.0, 0.0, 0).unwrap();
        for e in dep.enbs() {
            assert!(dep.covering_enbs(e.center).contains(&e.id));
        }
        let mid = Point::new(500.0, 0.0);
        assert_eq!(dep.covering_enbs(mid), vec![EnbId(0), EnbId(1)]);
        assert!(dep.covering_enbs(Point::new(-5000.0, -5000.0)).is_empty());
    }

    fn brute_force_cover(dep: &Deployment, p: Point) -> Vec<EnbId> {
        dep.enbs()
            .iter()
            .filter(|e| (e.center.x - p.x).powi(2) + (e.center.y - p.y).powi(2) <= e.coverage_radius.powi(2))
            .map(|e| e.id)
            .collect()
    }

    #[test]
    fn covering_matches_brute_force() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for jitter in [0.0, 0.05, 0.2] {
            let dep = build_deployment(20, 20, 1000.0, jitter, 17).unwrap();
            for _ in 0..2000 {
                let p = Point::new(rng.gen_range(-900.0..19900.0), rng.gen_range(-900.0..19900.0));
                assert_eq!(dep.covering_enbs(p), brute_force_cover(&dep, p), "at {p:?}");
            }
        }
    }
}
