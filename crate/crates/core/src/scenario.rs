//! Network topologies: PPP-distributed MBSs and UEs, disaster destruction of
//! MBSs, and hexagonal UABS placement.
//!
//! Horizontal coordinates are kept in kilometres and altitudes in metres.
//! Distance helpers on [`Point3`] convert explicitly.

use rand::Rng;
use rand_distr::{Distribution, Poisson};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result, SimError};
use crate::seed::{rng_from_seed, SimRng};

/// Maximum number of placement attempts per UE before the density is
/// declared infeasible.
pub const MAX_UE_PLACEMENT_ATTEMPTS: usize = 1000;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Point3 {
    pub x_km: f64,
    pub y_km: f64,
    pub z_m: f64,
}

impl Point3 {
    pub const fn new(x_km: f64, y_km: f64, z_m: f64) -> Self {
        Self { x_km, y_km, z_m }
    }

    /// Squared horizontal distance in km².
    #[inline]
    pub fn horizontal_sq_km(&self, other: &Point3) -> f64 {
        let dx = self.x_km - other.x_km;
        let dy = self.y_km - other.y_km;
        dx * dx + dy * dy
    }

    #[inline]
    pub fn horizontal_km(&self, other: &Point3) -> f64 {
        self.horizontal_sq_km(other).sqrt()
    }

    #[inline]
    pub fn horizontal_m(&self, other: &Point3) -> f64 {
        self.horizontal_km(other) * 1000.0
    }

    /// Squared 3-D distance in m².
    #[inline]
    pub fn distance_sq_m(&self, other: &Point3) -> f64 {
        let dz = self.z_m - other.z_m;
        self.horizontal_sq_km(other) * 1.0e6 + dz * dz
    }

    #[inline]
    pub fn distance_m(&self, other: &Point3) -> f64 {
        self.distance_sq_m(other).sqrt()
    }
}

/// Rectangular simulation area with its origin at a corner.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimRegion {
    pub width_km: f64,
    pub height_km: f64,
}

impl SimRegion {
    pub fn new(width_km: f64, height_km: f64) -> Result<Self> {
        let region = Self { width_km, height_km };
        region.validate()?;
        Ok(region)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.width_km > 0.0 && self.width_km.is_finite()) {
            return Err(invalid(
                "region.width_km",
                format!("must be > 0, got {}", self.width_km),
            ));
        }
        if !(self.height_km > 0.0 && self.height_km.is_finite()) {
            return Err(invalid(
                "region.height_km",
                format!("must be > 0, got {}", self.height_km),
            ));
        }
        Ok(())
    }

    pub fn area_km2(&self) -> f64 {
        self.width_km * self.height_km
    }

    pub fn center(&self) -> (f64, f64) {
        (self.width_km / 2.0, self.height_km / 2.0)
    }

    pub fn contains(&self, x_km: f64, y_km: f64) -> bool {
        (0.0..=self.width_km).contains(&x_km) && (0.0..=self.height_km).contains(&y_km)
    }

    fn sample_xy(&self, rng: &mut SimRng) -> (f64, f64) {
        (
            rng.random::<f64>() * self.width_km,
            rng.random::<f64>() * self.height_km,
        )
    }
}

/// Node altitudes above ground, in metres.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Altitudes {
    pub mbs_m: f64,
    pub uabs_m: f64,
    pub ue_m: f64,
}

impl Default for Altitudes {
    fn default() -> Self {
        Self {
            mbs_m: 30.0,
            uabs_m: 100.0,
            ue_m: 3.0,
        }
    }
}

/// Transmit powers and antenna attenuation factors. Effective power is
/// `K · P`, i.e. `P_dbm + 10·log10(K)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TxPowers {
    pub mbs_dbm: f64,
    pub uabs_dbm: f64,
    pub k_mbs: f64,
    pub k_uabs: f64,
}

impl Default for TxPowers {
    fn default() -> Self {
        Self {
            mbs_dbm: 46.0,
            uabs_dbm: 30.0,
            k_mbs: 1.0,
            k_uabs: 1.0,
        }
    }
}

impl TxPowers {
    pub fn mbs_eff_dbm(&self) -> f64 {
        self.mbs_dbm + 10.0 * self.k_mbs.log10()
    }

    pub fn uabs_eff_dbm(&self) -> f64 {
        self.uabs_dbm + 10.0 * self.k_uabs.log10()
    }

    fn validate(&self) -> Result<()> {
        if !(self.k_mbs > 0.0) || !(self.k_uabs > 0.0) {
            return Err(invalid("powers.k", "attenuation factors must be > 0"));
        }
        if !self.mbs_dbm.is_finite() || !self.uabs_dbm.is_finite() {
            return Err(invalid("powers", "transmit powers must be finite"));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    /// MBS intensity, nodes per km².
    pub lambda_mbs: f64,
    /// UE intensity, nodes per km².
    pub lambda_ue: f64,
    pub n_uabs: usize,
    pub destroy_fraction: f64,
    pub region: SimRegion,
    pub altitudes: Altitudes,
    /// Minimum horizontal UE–MBS distance, metres.
    pub min_dist_mbs_m: f64,
    /// Minimum horizontal UE–UABS distance, metres.
    pub min_dist_uabs_m: f64,
    pub powers: TxPowers,
    pub rng_seed: u64,
}

impl Default for ScenarioConfig {
    /// Full-scale parameters (10 × 10 km²).
    fn default() -> Self {
        Self {
            lambda_mbs: 4.0,
            lambda_ue: 100.0,
            n_uabs: 16,
            destroy_fraction: 0.5,
            region: SimRegion {
                width_km: 10.0,
                height_km: 10.0,
            },
            altitudes: Altitudes::default(),
            min_dist_mbs_m: 30.0,
            min_dist_uabs_m: 10.0,
            powers: TxPowers::default(),
            rng_seed: 0,
        }
    }
}

impl ScenarioConfig {
    pub fn validate(&self) -> Result<()> {
        self.region.validate()?;
        if !(self.lambda_mbs > 0.0 && self.lambda_mbs.is_finite()) {
            return Err(invalid("lambda_mbs", format!("must be > 0, got {}", self.lambda_mbs)));
        }
        if !(self.lambda_ue > 0.0 && self.lambda_ue.is_finite()) {
            return Err(invalid("lambda_ue", format!("must be > 0, got {}", self.lambda_ue)));
        }
        check_fraction(self.destroy_fraction)?;
        if self.min_dist_mbs_m < 0.0 || self.min_dist_uabs_m < 0.0 {
            return Err(invalid("min_dist", "minimum distances must be >= 0"));
        }
        let a = &self.altitudes;
        if !(a.mbs_m > 0.0 && a.uabs_m > 0.0 && a.ue_m > 0.0) {
            return Err(invalid("altitudes", "all altitudes must be > 0"));
        }
        self.powers.validate()
    }
}

fn check_fraction(f: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&f) {
        return Err(invalid("destroy_fraction", format!("must lie in [0, 1], got {f}")));
    }
    Ok(())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NodeType {
    Mbs,
    Uabs,
    Ue,
}

impl NodeType {
    pub fn as_str(&self) -> &'static str {
        match self {
            NodeType::Mbs => "mbs",
            NodeType::Uabs => "uabs",
            NodeType::Ue => "ue",
        }
    }
}

/// One realization of MBS, UABS and UE positions plus effective powers.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NetworkLayout {
    pub mbs: Vec<Point3>,
    pub uabs: Vec<Point3>,
    pub ue: Vec<Point3>,
    pub mbs_eff_power_dbm: f64,
    pub uabs_eff_power_dbm: f64,
}

impl NetworkLayout {
    pub fn n_mbs(&self) -> usize {
        self.mbs.len()
    }

    pub fn n_uabs(&self) -> usize {
        self.uabs.len()
    }

    pub fn n_ue(&self) -> usize {
        self.ue.len()
    }

    /// Returns a copy with the UABSs replaced.
    pub fn with_uabs(&self, uabs: Vec<Point3>) -> Self {
        Self { uabs, ..self.clone() }
    }

    /// Index of the first UE closer than the configured minimum distances to
    /// any station, if any.
    pub fn min_distance_violation(&self, min_mbs_m: f64, min_uabs_m: f64) -> Option<usize> {
        self.ue
            .iter()
            .position(|u| violates(u, &self.mbs, min_mbs_m) || violates(u, &self.uabs, min_uabs_m))
    }
}

fn violates(ue: &Point3, stations: &[Point3], min_m: f64) -> bool {
    let min_km_sq = (min_m / 1000.0).powi(2);
    stations.iter().any(|s| ue.horizontal_sq_km(s) < min_km_sq)
}

fn poisson_count(rng: &mut SimRng, mean: f64) -> Result<usize> {
    let dist = Poisson::new(mean).map_err(|e| invalid("intensity", e.to_string()))?;
    Ok(dist.sample(rng) as usize)
}

/// Draws MBS and UE positions from homogeneous PPPs over the region and
/// places `cfg.n_uabs` UABSs on the hexagonal grid.
///
/// UEs closer than the minimum distances to any station are resampled, up
/// to [`MAX_UE_PLACEMENT_ATTEMPTS`] times each.
pub fn generate_ppp_layout(cfg: &ScenarioConfig) -> Result<NetworkLayout> {
    cfg.validate()?;
    let mut rng = rng_from_seed(cfg.rng_seed);
    let area = cfg.region.area_km2();
    let alt = cfg.altitudes;

    let n_mbs = poisson_count(&mut rng, cfg.lambda_mbs * area)?;
    let mbs: Vec<Point3> = (0..n_mbs)
        .map(|_| {
            let (x, y) = cfg.region.sample_xy(&mut rng);
            Point3::new(x, y, alt.mbs_m)
        })
        .collect();

    let uabs = if cfg.n_uabs > 0 {
        hex_grid_positions(cfg.n_uabs, &cfg.region, alt.uabs_m)?
    } else {
        Vec::new()
    };

    let n_ue = poisson_count(&mut rng, cfg.lambda_ue * area)?;
    let mut ue = Vec::with_capacity(n_ue);
    for idx in 0..n_ue {
        let mut placed = None;
        for _ in 0..MAX_UE_PLACEMENT_ATTEMPTS {
            let (x, y) = cfg.region.sample_xy(&mut rng);
            let p = Point3::new(x, y, alt.ue_m);
            if !violates(&p, &mbs, cfg.min_dist_mbs_m) && !violates(&p, &uabs, cfg.min_dist_uabs_m) {
                placed = Some(p);
                break;
            }
        }
        match placed {
            Some(p) => ue.push(p),
            None => {
                return Err(SimError::Infeasible {
                    ue: idx,
                    attempts: MAX_UE_PLACEMENT_ATTEMPTS,
                })
            }
        }
    }

    Ok(NetworkLayout {
        mbs,
        uabs,
        ue,
        mbs_eff_power_dbm: cfg.powers.mbs_eff_dbm(),
        uabs_eff_power_dbm: cfg.powers.uabs_eff_dbm(),
    })
}

/// Number of MBSs removed for a destruction fraction: `⌊fraction · n⌋`.
pub fn destroyed_count(n: usize, fraction: f64) -> usize {
    // 1e-9 absorbs representation error such as 0.975 * 400 = 389.99999...
    let k = (fraction * n as f64 + 1e-9).floor() as usize;
    k.min(n)
}

/// Removes `⌊fraction · N_mbs⌋` uniformly chosen MBSs. Survivors keep their
/// relative order; UEs and UABSs are untouched.
pub fn destroy_mbs(layout: &NetworkLayout, fraction: f64, seed: u64) -> Result<NetworkLayout> {
    check_fraction(fraction)?;
    let n = layout.n_mbs();
    let k = destroyed_count(n, fraction);
    if k == 0 {
        return Ok(layout.clone());
    }
    let mut rng = rng_from_seed(seed);
    let mut removed = vec![false; n];
    for i in rand::seq::index::sample(&mut rng, n, k) {
        removed[i] = true;
    }
    let mbs = layout
        .mbs
        .iter()
        .zip(&removed)
        .filter_map(|(p, &gone)| (!gone).then_some(*p))
        .collect();
    Ok(NetworkLayout { mbs, ..layout.clone() })
}

/// Places `n_uabs` points on a row-offset hexagonal lattice centred in the
/// region.
///
/// Horizontal pitch is `sqrt(area / n_uabs)`, rows are `pitch·√3/2` apart
/// and odd rows are shifted right by half a pitch. Rows are filled
/// left-to-right, bottom-to-top; the last row may be partial.
pub fn hex_grid_positions(n_uabs: usize, region: &SimRegion, altitude_m: f64) -> Result<Vec<Point3>> {
    region.validate()?;
    if n_uabs == 0 {
        return Err(invalid("n_uabs", "hexagonal grid needs at least one UABS"));
    }
    let pitch = (region.area_km2() / n_uabs as f64).sqrt();
    let row_step = pitch * 3f64.sqrt() / 2.0;
    let per_row = ((region.width_km / pitch).round() as usize).clamp(1, n_uabs);

    let raw: Vec<(f64, f64)> = (0..n_uabs)
        .map(|i| {
            let row = i / per_row;
            let col = i % per_row;
            let shift = if row % 2 == 1 { pitch / 2.0 } else { 0.0 };
            (col as f64 * pitch + shift, row as f64 * row_step)
        })
        .collect();

    let (min_x, max_x, min_y, max_y) = raw.iter().fold(
        (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY),
        |(a, b, c, d), &(x, y)| (a.min(x), b.max(x), c.min(y), d.max(y)),
    );
    let (cx, cy) = region.center();
    let off_x = cx - (min_x + max_x) / 2.0;
    let off_y = cy - (min_y + max_y) / 2.0;

    let points: Vec<Point3> = raw
        .into_iter()
        .map(|(x, y)| Point3::new(x + off_x, y + off_y, altitude_m))
        .collect();
    if let Some(p) = points.iter().find(|p| !region.contains(p.x_km, p.y_km)) {
        return Err(invalid(
            "n_uabs",
            format!(
                "{n_uabs} UABSs do not fit on the hexagonal lattice inside {}x{} km (point at {:.3}, {:.3})",
                region.width_km, region.height_km, p.x_km, p.y_km
            ),
        ));
    }
    Ok(points)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_cfg(seed: u64) -> ScenarioConfig {
        ScenarioConfig {
            region: SimRegion::new(2.0, 2.0).unwrap(),
            n_uabs: 4,
            rng_seed: seed,
            ..ScenarioConfig::default()
        }
    }

    #[test]
    fn rejects_zero_area_region() {
        assert!(SimRegion::new(0.0, 10.0).is_err());
        let mut cfg = small_cfg(1);
        cfg.region.height_km = 0.0;
        assert!(generate_ppp_layout(&cfg).is_err());
    }

    #[test]
    fn rejects_invalid_intensity_and_fraction() {
        let mut cfg = small_cfg(1);
        cfg.lambda_mbs = -1.0;
        assert!(generate_ppp_layout(&cfg).is_err());
        let mut cfg = small_cfg(1);
        cfg.destroy_fraction = 1.5;
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn same_seed_same_layout() {
        let a = generate_ppp_layout(&small_cfg(42)).unwrap();
        let b = generate_ppp_layout(&small_cfg(42)).unwrap();
        assert_eq!(a, b);
        let c = generate_ppp_layout(&small_cfg(43)).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn generated_layout_respects_invariants() {
        let cfg = small_cfg(7);
        let l = generate_ppp_layout(&cfg).unwrap();
        assert!(l
            .min_distance_violation(cfg.min_dist_mbs_m, cfg.min_dist_uabs_m)
            .is_none());
        for p in l.mbs.iter().chain(&l.uabs).chain(&l.ue) {
            assert!(cfg.region.contains(p.x_km, p.y_km));
        }
        assert!(l.mbs.iter().all(|p| p.z_m == 30.0));
        assert!(l.uabs.iter().all(|p| p.z_m == 100.0));
        assert!(l.ue.iter().all(|p| p.z_m == 3.0));
        assert_eq!(l.n_uabs(), 4);
    }

    #[test]
    fn infeasible_density_is_reported() {
        // One UABS whose exclusion disc covers the whole region.
        let cfg = ScenarioConfig {
            region: SimRegion::new(0.01, 0.01).unwrap(),
            lambda_mbs: 1e-9,
            lambda_ue: 1e5,
            n_uabs: 1,
            min_dist_uabs_m: 100.0,
            ..ScenarioConfig::default()
        };
        assert!(matches!(generate_ppp_layout(&cfg), Err(SimError::Infeasible { .. })));
    }

    fn layout_with_mbs(n: usize) -> NetworkLayout {
        NetworkLayout {
            mbs: (0..n).map(|i| Point3::new(i as f64 * 0.01, 0.0, 30.0)).collect(),
            uabs: vec![],
            ue: vec![Point3::new(1.0, 1.0, 3.0)],
            mbs_eff_power_dbm: 46.0,
            uabs_eff_power_dbm: 30.0,
        }
    }

    #[test]
    fn destroy_counts() {
        let l = layout_with_mbs(400);
        assert_eq!(destroy_mbs(&l, 0.0, 1).unwrap(), l);
        assert_eq!(destroy_mbs(&l, 0.5, 1).unwrap().n_mbs(), 200);
        // floor(0.975 * 400) = 390 removed
        assert_eq!(destroyed_count(400, 0.975), 390);
        assert_eq!(destroy_mbs(&l, 0.975, 1).unwrap().n_mbs(), 10);
        assert_eq!(destroy_mbs(&l, 1.0, 1).unwrap().n_mbs(), 0);
        assert!(destroy_mbs(&l, -0.1, 1).is_err());
    }

    #[test]
    fn destroy_keeps_survivor_order_and_ues() {
        let l = layout_with_mbs(50);
        let d = destroy_mbs(&l, 0.3, 9).unwrap();
        assert_eq!(d.ue, l.ue);
        assert!(d.mbs.windows(2).all(|w| w[0].x_km < w[1].x_km));
    }

    #[test]
    fn hex_single_point_is_centered() {
        let r = SimRegion::new(10.0, 10.0).unwrap();
        let p = hex_grid_positions(1, &r, 100.0).unwrap();
        assert_eq!(p, vec![Point3::new(5.0, 5.0, 100.0)]);
    }

    #[test]
    fn hex_four_points_two_offset_rows() {
        let r = SimRegion::new(10.0, 10.0).unwrap();
        let p = hex_grid_positions(4, &r, 100.0).unwrap();
        // Lattice by construction: pitch 5, row step 5·√3/2, odd row shifted 2.5,
        // bounding box [0, 7.5] x [0, 4.330] centred on (5, 5).
        let v = 5.0 * 3f64.sqrt() / 2.0;
        let expected = [
            (1.25, 5.0 - v / 2.0),
            (6.25, 5.0 - v / 2.0),
            (3.75, 5.0 + v / 2.0),
            (8.75, 5.0 + v / 2.0),
        ];
        for (got, (x, y)) in p.iter().zip(expected) {
            assert!((got.x_km - x).abs() < 1e-12 && (got.y_km - y).abs() < 1e-12, "{got:?}");
        }
        assert_eq!(p, hex_grid_positions(4, &r, 100.0).unwrap());
    }

    #[test]
    fn hex_rejects_zero_and_unplaceable() {
        let r = SimRegion::new(10.0, 10.0).unwrap();
        assert!(hex_grid_positions(0, &r, 100.0).is_err());
        // A narrow vertical strip cannot absorb the half-pitch row offset.
        let strip = SimRegion::new(0.01, 100.0).unwrap();
        assert!(hex_grid_positions(2, &strip, 100.0).is_err());
    }
}
