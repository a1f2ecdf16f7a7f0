//! Path loss, received signal strength and the four RSS zones.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::topology::{Deployment, EnbId, Point};

/// Distances below this are evaluated at this distance.
pub const MIN_DISTANCE_M: f64 = 20.0;

#[derive(Debug, Error, PartialEq)]
pub enum RadioError {
    #[error("path loss parameter out of range: {0}")]
    ParameterOutOfRange(String),
    #[error("zone fractions must satisfy 0 < f3 < f2 < f1 <= 1, got ({0}, {1}, {2})")]
    InvalidFractions(f64, f64, f64),
    #[error("zone thresholds must satisfy p1 < p2 < p3, got ({0}, {1}, {2})")]
    InvalidThresholds(f64, f64, f64),
}

/// COST-231 Walfisch-Ikegami inputs (non line of sight).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PathLossParams {
    pub frequency_mhz: f64,
    pub tx_power_dbm: f64,
    pub base_height: f64,
    pub mobile_height: f64,
    pub building_height: f64,
    pub building_spacing: f64,
    pub street_width: f64,
    /// Angle between street and direct path, degrees.
    pub street_orientation: f64,
    /// Metropolitan center rather than medium city / suburban.
    pub metropolitan: bool,
}

impl Default for PathLossParams {
    fn default() -> Self {
        Self {
            frequency_mhz: 2000.0,
            tx_power_dbm: 43.0,
            base_height: 30.0,
            mobile_height: 1.5,
            building_height: 15.0,
            building_spacing: 50.0,
            street_width: 25.0,
            street_orientation: 30.0,
            metropolitan: false,
        }
    }
}

impl PathLossParams {
    pub fn validate(&self) -> Result<(), RadioError> {
        let bad = |msg: String| Err(RadioError::ParameterOutOfRange(msg));
        if !(800.0..=2000.0).contains(&self.frequency_mhz) {
            return bad(format!("frequency {} MHz outside 800-2000 MHz", self.frequency_mhz));
        }
        for (name, v) in [
            ("base_height", self.base_height),
            ("mobile_height", self.mobile_height),
            ("building_height", self.building_height),
            ("building_spacing", self.building_spacing),
            ("street_width", self.street_width),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return bad(format!("{name} must be positive, got {v}"));
            }
        }
        if !self.tx_power_dbm.is_finite() {
            return bad("tx_power_dbm must be finite".into());
        }
        if self.building_height <= self.mobile_height {
            return bad(format!(
                "building_height {} must exceed mobile_height {}",
                self.building_height, self.mobile_height
            ));
        }
        if !(0.0..=90.0).contains(&self.street_orientation) {
            return bad(format!(
                "street_orientation {} outside 0-90 degrees",
                self.street_orientation
            ));
        }
        Ok(())
    }

    fn orientation_loss(&self) -> f64 {
        let phi = self.street_orientation;
        if phi < 35.0 {
            -10.0 + 0.354 * phi
        } else if phi < 55.0 {
            2.5 + 0.075 * (phi - 35.0)
        } else {
            4.0 - 0.114 * (phi - 55.0)
        }
    }
}

/// NLOS loss in dB at `distance` meters, clamped below [`MIN_DISTANCE_M`].
pub fn path_loss_db(params: &PathLossParams, distance: f64) -> Result<f64, RadioError> {
    params.validate()?;
    if distance.is_nan() {
        return Err(RadioError::ParameterOutOfRange("distance is NaN".into()));
    }
    Ok(loss_unchecked(params, distance))
}

fn loss_unchecked(p: &PathLossParams, distance: f64) -> f64 {
    let d_km = distance.max(MIN_DISTANCE_M) / 1000.0;
    let f = p.frequency_mhz;
    let free_space = 32.45 + 20.0 * d_km.log10() + 20.0 * f.log10();

    let roof_to_street = -16.9 - 10.0 * p.street_width.log10()
        + 10.0 * f.log10()
        + 20.0 * (p.building_height - p.mobile_height).log10()
        + p.orientation_loss();

    let dhb = p.base_height - p.building_height;
    let above_roof = dhb > 0.0;
    let shadowing = if above_roof { -18.0 * (1.0 + dhb).log10() } else { 0.0 };
    let ka = if above_roof {
        54.0
    } else if d_km >= 0.5 {
        54.0 - 0.8 * dhb
    } else {
        54.0 - 0.8 * dhb * d_km / 0.5
    };
    let kd = if above_roof {
        18.0
    } else {
        18.0 - 15.0 * dhb / p.building_height
    };
    let kf = if p.metropolitan {
        -4.0 + 1.5 * (f / 925.0 - 1.0)
    } else {
        -4.0 + 0.7 * (f / 925.0 - 1.0)
    };
    let multi_screen = shadowing + ka + kd * d_km.log10() + kf * f.log10() - 9.0 * p.building_spacing.log10();

    if roof_to_street + multi_screen > 0.0 {
        free_space + roof_to_street + multi_screen
    } else {
        free_space
    }
}

/// Received signal strength in dBm.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(transparent)]
pub struct RssDbm(pub f64);

impl fmt::Display for RssDbm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:.2} dBm", self.0)
    }
}

pub fn rss_dbm(params: &PathLossParams, distance: f64) -> Result<RssDbm, RadioError> {
    Ok(RssDbm(params.tx_power_dbm - path_loss_db(params, distance)?))
}

/// Validated link budget; evaluates RSS without re-checking parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkBudget {
    params: PathLossParams,
}

impl LinkBudget {
    pub fn new(params: PathLossParams) -> Result<Self, RadioError> {
        params.validate()?;
        Ok(Self { params })
    }

    pub fn params(&self) -> &PathLossParams {
        &self.params
    }

    pub fn rss(&self, distance: f64) -> RssDbm {
        RssDbm(self.params.tx_power_dbm - loss_unchecked(&self.params, distance))
    }
}

/// Zone boundaries in dBm, `p1 < p2 < p3`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ZoneThresholds {
    pub p1: f64,
    pub p2: f64,
    pub p3: f64,
}

impl ZoneThresholds {
    pub fn new(p1: f64, p2: f64, p3: f64) -> Result<Self, RadioError> {
        if p1 < p2 && p2 < p3 && p1.is_finite() && p3.is_finite() {
            Ok(Self { p1, p2, p3 })
        } else {
            Err(RadioError::InvalidThresholds(p1, p2, p3))
        }
    }
}

/// Fractions of the coverage radius at which the serving RSS crosses
/// `p3`, `p2` and `p1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ZoneFractions {
    pub f3: f64,
    pub f2: f64,
    pub f1: f64,
}

impl Default for ZoneFractions {
    fn default() -> Self {
        Self {
            f3: 0.50,
            f2: 0.70,
            f1: 0.90,
        }
    }
}

pub fn derive_thresholds(
    params: &PathLossParams,
    coverage_radius: f64,
    fractions: ZoneFractions,
) -> Result<ZoneThresholds, RadioError> {
    let ZoneFractions { f3, f2, f1 } = fractions;
    if !(0.0 < f3 && f3 < f2 && f2 < f1 && f1 <= 1.0) {
        return Err(RadioError::InvalidFractions(f3, f2, f1));
    }
    if !(coverage_radius.is_finite() && coverage_radius > 0.0) {
        return Err(RadioError::ParameterOutOfRange(format!(
            "coverage radius must be positive, got {coverage_radius}"
        )));
    }
    let at = |f: f64| rss_dbm(params, f * coverage_radius).map(|r| r.0);
    ZoneThresholds::new(at(f1)?, at(f2)?, at(f3)?)
}

/// RSS zones ordered from best to worst.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Zone {
    /// Normalcy
    ZN,
    /// Concern
    ZC,
    /// Emergency
    ZE,
    /// Doom
    ZD,
}

impl fmt::Display for Zone {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Zone::ZN => "ZN",
            Zone::ZC => "ZC",
            Zone::ZE => "ZE",
            Zone::ZD => "ZD",
        })
    }
}

/// Upper boundaries belong to the lower zone: `P == p3` is ZC.
pub fn classify_zone(rss: RssDbm, t: &ZoneThresholds) -> Zone {
    let p = rss.0;
    if p > t.p3 {
        Zone::ZN
    } else if p > t.p2 {
        Zone::ZC
    } else if p > t.p1 {
        Zone::ZE
    } else {
        Zone::ZD
    }
}

/// Spatially fixed log-normal shadowing. With `sigma_db == 0` (the default)
/// it contributes nothing.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Shadowing {
    pub sigma_db: f64,
    pub seed: u64,
    /// Side of the square patches over which the offset is constant.
    pub decorrelation_m: f64,
}

impl Shadowing {
    pub fn off() -> Self {
        Self {
            sigma_db: 0.0,
            seed: 0,
            decorrelation_m: 50.0,
        }
    }

    pub fn offset_db(&self, enb: EnbId, p: Point) -> f64 {
        if self.sigma_db == 0.0 {
            return 0.0;
        }
        let cx = (p.x / self.decorrelation_m).floor() as i64 as u64;
        let cy = (p.y / self.decorrelation_m).floor() as i64 as u64;
        let h = splitmix(self.seed ^ splitmix(enb.0 as u64 ^ splitmix(cx ^ splitmix(cy))));
        let u1 = ((h >> 11) as f64 + 0.5) / (1u64 << 53) as f64;
        let u2 = ((splitmix(h) >> 11) as f64) / (1u64 << 53) as f64;
        let z = (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos();
        self.sigma_db * z
    }
}

pub(crate) fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Signal from every eNB of a deployment, with zone thresholds for the
/// serving link.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadioEnvironment {
    budget: LinkBudget,
    thresholds: ZoneThresholds,
    shadowing: Shadowing,
}

impl RadioEnvironment {
    pub fn new(params: PathLossParams, thresholds: ZoneThresholds, shadowing: Shadowing) -> Result<Self, RadioError> {
        Ok(Self {
            budget: LinkBudget::new(params)?,
            thresholds,
            shadowing,
        })
    }

    pub fn thresholds(&self) -> &ZoneThresholds {
        &self.thresholds
    }

    pub fn rss(&self, deployment: &Deployment, id: EnbId, p: Point) -> RssDbm {
        let center = deployment.enbs()[id.index()].center;
        let RssDbm(base) = self.budget.rss(center.distance(p));
        RssDbm(base + self.shadowing.offset_db(id, p))
    }

    pub fn zone(&self, rss: RssDbm) -> Zone {
        classify_zone(rss, &self.thresholds)
    }

    /// Strongest of `ids` at `p`, ties to the lowest id.
    pub fn strongest_of(
        &self,
        deployment: &Deployment,
        ids: impl IntoIterator<Item = EnbId>,
        p: Point,
    ) -> Option<EnbId> {
        let mut best: Option<(EnbId, f64)> = None;
        for id in ids {
            let r = self.rss(deployment, id, p).0;
            match best {
                Some((bid, br)) if r < br || (r == br && id > bid) => {}
                _ => best = Some((id, r)),
            }
        }
        best.map(|(id, _)| id)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    // Hand evaluation of the published COST-231 Walfisch-Ikegami NLOS formula
    // at the default parameters, d = 1 km:
    //   L0   = 32.45 + 20 log 1 + 20 log 2000                        =  98.4706
    //   Lrts = -16.9 - 10 log 25 + 10 log 2000 + 20 log 13.5 + 0.62  =  25.3576
    //   Lmsd = -18 log 16 + 54 + 0 - 3.18649 log 2000 - 9 log 50     =   6.5165
    const GOLDEN_LOSS_1KM: f64 = 130.344_597_953_598_54;

    #[test]
    fn golden_loss_at_one_km() {
        let loss = path_loss_db(&PathLossParams::default(), 1000.0).unwrap();
        assert_abs_diff_eq!(loss, GOLDEN_LOSS_1KM, epsilon = 1e-9);
    }

    #[test]
    fn loss_is_monotone_and_clamped() {
        let p = PathLossParams::default();
        let mut prev = path_loss_db(&p, MIN_DISTANCE_M).unwrap();
        let mut d = MIN_DISTANCE_M + 1.0;
        while d <= 3.0 * 750.0 {
            let l = path_loss_db(&p, d).unwrap();
            assert!(l > prev, "not increasing at {d}");
            prev = l;
            d += 1.0;
        }
        assert!(path_loss_db(&p, 2000.0).unwrap() > path_loss_db(&p, 1000.0).unwrap());
        assert_eq!(
            path_loss_db(&p, 5.0).unwrap(),
            path_loss_db(&p, MIN_DISTANCE_M).unwrap()
        );
        assert_eq!(
            path_loss_db(&p, 0.0).unwrap(),
            path_loss_db(&p, MIN_DISTANCE_M).unwrap()
        );
    }

    #[test]
    fn low_base_station_branch_is_monotone() {
        let p = PathLossParams {
            base_height: 10.0,
            ..PathLossParams::default()
        };
        let mut prev = f64::NEG_INFINITY;
        for d in (20..3000).step_by(7) {
            let l = path_loss_db(&p, d as f64).unwrap();
            assert!(l > prev);
            prev = l;
        }
    }

    #[test]
    fn rejects_out_of_band_parameters() {
        let p = PathLossParams {
            frequency_mhz: 2400.0,
            ..Default::default()
        };
        assert!(matches!(
            path_loss_db(&p, 100.0),
            Err(RadioError::ParameterOutOfRange(_))
        ));
        let p = PathLossParams {
            street_width: 0.0,
            ..Default::default()
        };
        assert!(path_loss_db(&p, 100.0).is_err());
    }

    #[test]
    fn rss_is_tx_minus_loss() {
        let p = PathLossParams::default();
        let r = rss_dbm(&p, 1000.0).unwrap();
        assert_abs_diff_eq!(r.0, 43.0 - GOLDEN_LOSS_1KM, epsilon = 1e-9);
        assert!(rss_dbm(&p, 400.0).unwrap() > rss_dbm(&p, 401.0).unwrap());
        let budget = LinkBudget::new(p).unwrap();
        assert_eq!(budget.rss(1000.0), r);
    }

    #[test]
    fn derived_thresholds_sit_at_radius_fractions() {
        let p = PathLossParams::default();
        let t = derive_thresholds(&p, 750.0, ZoneFractions::default()).unwrap();
        assert_eq!(t.p3, rss_dbm(&p, 375.0).unwrap().0);
        assert_eq!(t.p2, rss_dbm(&p, 525.0).unwrap().0);
        assert_eq!(t.p1, rss_dbm(&p, 675.0).unwrap().0);
        assert!(t.p1 < t.p2 && t.p2 < t.p3);

        let same = ZoneFractions {
            f3: 0.7,
            f2: 0.7,
            f1: 0.9,
        };
        assert!(matches!(
            derive_thresholds(&p, 750.0, same),
            Err(RadioError::InvalidFractions(..))
        ));
        let over = ZoneFractions {
            f3: 0.5,
            f2: 0.7,
            f1: 1.2,
        };
        assert!(derive_thresholds(&p, 750.0, over).is_err());
    }

    #[test]
    fn zone_boundaries() {
        let t = ZoneThresholds::new(-90.0, -80.0, -70.0).unwrap();
        assert_eq!(classify_zone(RssDbm(-70.0), &t), Zone::ZC);
        assert_eq!(classify_zone(RssDbm(-70.0 + 1e-9), &t), Zone::ZN);
        assert_eq!(classify_zone(RssDbm(-80.0), &t), Zone::ZE);
        assert_eq!(classify_zone(RssDbm(-90.0), &t), Zone::ZD);
        assert_eq!(classify_zone(RssDbm(-200.0), &t), Zone::ZD);
        assert!(ZoneThresholds::new(-80.0, -80.0, -70.0).is_err());
    }

    #[test]
    fn zones_follow_distance() {
        let p = PathLossParams::default();
        let t = derive_thresholds(&p, 750.0, ZoneFractions::default()).unwrap();
        let zone_at = |d: f64| classify_zone(rss_dbm(&p, d).unwrap(), &t);
        assert_eq!(zone_at(375.0 + 1e-6), Zone::ZC);
        assert_eq!(zone_at(675.0 + 1e-6), Zone::ZD);
        let mut prev = Zone::ZN;
        for d in 0..2250 {
            let z = zone_at(d as f64);
            assert!(z >= prev, "zone improved moving away at {d} m");
            prev = z;
        }
    }

    #[test]
    fn shadowing_is_off_by_default_and_deterministic() {
        let off = Shadowing::off();
        assert_eq!(off.offset_db(EnbId(3), Point::new(12.0, 40.0)), 0.0);
        let on = Shadowing {
            sigma_db: 8.0,
            seed: 4,
            decorrelation_m: 50.0,
        };
        let a = on.offset_db(EnbId(3), Point::new(12.0, 40.0));
        assert_eq!(a, on.offset_db(EnbId(3), Point::new(30.0, 20.0)));
        assert_ne!(a, on.offset_db(EnbId(4), Point::new(12.0, 40.0)));
        let samples: Vec<f64> = (0..20_000)
            .map(|i| on.offset_db(EnbId(i % 97), Point::new((i * 50) as f64, 0.0)))
            .collect();
        let mean = samples.iter().sum::<f64>() / samples.len() as f64;
        let sd = (samples.iter().map(|s| (s - mean).powi(2)).sum::<f64>() / samples.len() as f64).sqrt();
        assert!(mean.abs() < 0.2, "mean {mean}");
        assert!((sd - 8.0).abs() < 0.2, "sd {sd}");
    }
}
