//! Path loss (simplified exponent law and suburban Okumura-Hata), Rayleigh
//! fading draws, RSRP, and the maximum-allowable path-loss cutoff.
//!
//! Distance conventions: the exponent law uses the 3-D Euclidean distance in
//! metres; Okumura-Hata uses the horizontal distance in kilometres because
//! antenna heights already enter through its `A` and `B` factors.

use rand::Rng;
use rand_distr::{Distribution, Exp1};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result, SimError};
use crate::scenario::{NetworkLayout, Point3};

/// Default cap for the exponent-law model, dB.
pub const SPLM_MAX_PL_DB: f64 = 160.0;
/// Default cap for the Okumura-Hata model, dB.
pub const OHPLM_MAX_PL_DB: f64 = 225.0;
/// Band-14 downlink centre frequency, MHz.
pub const BAND14_DL_MHZ: f64 = 763.0;

/// Distances are clamped to this many metres before taking logarithms, so a
/// station directly above a UE (horizontal distance 0) stays finite.
pub const MIN_LINK_DISTANCE_M: f64 = 1.0;

/// Form of the UE antenna-height correction `a(h_ue)`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HataCorrection {
    /// `1.1·log f − 0.7·h − 1.56·log f − 0.8`; only the `0.7` term scales
    /// with the UE height.
    #[default]
    AsPrinted,
    /// Textbook small/medium-city form `(1.1·log f − 0.7)·h − (1.56·log f − 0.8)`.
    Standard,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "variant", rename_all = "lowercase", deny_unknown_fields)]
pub enum PathLossKind {
    Splm {
        delta: f64,
    },
    Ohplm {
        fc_mhz: f64,
        #[serde(default)]
        correction: HataCorrection,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PathLossModel {
    pub kind: PathLossKind,
    pub max_pl_db: f64,
}

impl PathLossModel {
    pub fn splm(delta: f64) -> Self {
        Self {
            kind: PathLossKind::Splm { delta },
            max_pl_db: SPLM_MAX_PL_DB,
        }
    }

    pub fn ohplm(fc_mhz: f64) -> Self {
        Self {
            kind: PathLossKind::Ohplm {
                fc_mhz,
                correction: HataCorrection::AsPrinted,
            },
            max_pl_db: OHPLM_MAX_PL_DB,
        }
    }

    pub fn name(&self) -> &'static str {
        match self.kind {
            PathLossKind::Splm { .. } => "splm",
            PathLossKind::Ohplm { .. } => "ohplm",
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.max_pl_db > 0.0) {
            return Err(invalid("max_pl_db", format!("must be > 0, got {}", self.max_pl_db)));
        }
        match self.kind {
            PathLossKind::Splm { delta } if !(delta > 0.0 && delta.is_finite()) => {
                Err(invalid("delta", format!("path-loss exponent must be > 0, got {delta}")))
            }
            PathLossKind::Ohplm { fc_mhz, .. } if !(150.0..=1500.0).contains(&fc_mhz) => Err(invalid(
                "fc_mhz",
                format!("Okumura-Hata is defined for 150..=1500 MHz, got {fc_mhz}"),
            )),
            _ => Ok(()),
        }
    }

    /// Specializes the model to one station tier (all stations of a tier
    /// share an antenna height).
    pub fn for_tier(&self, h_bs_m: f64, h_ue_m: f64) -> Result<TierPathLoss> {
        self.validate()?;
        let law = match self.kind {
            PathLossKind::Splm { delta } => TierLaw::Splm {
                half_delta: delta / 2.0,
                delta,
            },
            PathLossKind::Ohplm { fc_mhz, correction } => {
                TierLaw::Ohplm(ohplm_factors_with(fc_mhz, h_bs_m, h_ue_m, correction)?)
            }
        };
        Ok(TierPathLoss {
            law,
            max_pl_db: self.max_pl_db,
            max_attenuation: 10f64.powf(self.max_pl_db / 10.0),
        })
    }

    /// True when the model measures distance in 3-D.
    pub fn uses_3d_distance(&self) -> bool {
        matches!(self.kind, PathLossKind::Splm { .. })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct OhplmFactors {
    pub a_factor: f64,
    pub b_factor: f64,
    pub c_factor: f64,
    pub a_hue: f64,
}

/// Exponent-law loss `10·log10(d^δ)` for a distance in metres.
pub fn splm_path_loss(d_m: f64, delta: f64) -> Result<f64> {
    if !(d_m > 0.0) {
        return Err(invalid("d_m", format!("distance must be > 0, got {d_m}")));
    }
    Ok(10.0 * delta * d_m.log10())
}

/// Suburban Okumura-Hata factors with the correction term as printed.
pub fn ohplm_factors(fc_mhz: f64, h_bs_m: f64, h_ue_m: f64) -> Result<OhplmFactors> {
    ohplm_factors_with(fc_mhz, h_bs_m, h_ue_m, HataCorrection::AsPrinted)
}

pub fn ohplm_factors_with(fc_mhz: f64, h_bs_m: f64, h_ue_m: f64, correction: HataCorrection) -> Result<OhplmFactors> {
    for (name, v) in [("fc_mhz", fc_mhz), ("h_bs_m", h_bs_m), ("h_ue_m", h_ue_m)] {
        if !(v > 0.0 && v.is_finite()) {
            return Err(invalid(name, format!("must be > 0, got {v}")));
        }
    }
    let log_f = fc_mhz.log10();
    let log_hb = h_bs_m.log10();
    let a_hue = match correction {
        HataCorrection::AsPrinted => 1.1 * log_f - 0.7 * h_ue_m - 1.56 * log_f - 0.8,
        HataCorrection::Standard => (1.1 * log_f - 0.7) * h_ue_m - (1.56 * log_f - 0.8),
    };
    let a_factor = 69.55 + 26.16 * log_f - 13.82 * log_hb - a_hue;
    let b_factor = 44.9 - 6.55 * log_hb;
    let c_factor = -2.0 * (fc_mhz / 28.0).log10().powi(2) - 5.4;
    Ok(OhplmFactors {
        a_factor,
        b_factor,
        c_factor,
        a_hue,
    })
}

/// Okumura-Hata loss `A + B·log10(d) + C` for a distance in kilometres.
pub fn ohplm_path_loss(d_km: f64, factors: &OhplmFactors) -> Result<f64> {
    if !(d_km > 0.0) {
        return Err(invalid("d_km", format!("distance must be > 0, got {d_km}")));
    }
    Ok(ohplm_raw(d_km, factors))
}

#[inline]
fn ohplm_raw(d_km: f64, f: &OhplmFactors) -> f64 {
    f.a_factor + f.b_factor * d_km.log10() + f.c_factor
}

/// Unit-mean exponential fading power gain.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FadingDraw {
    pub h: f64,
}

impl FadingDraw {
    pub fn new(h: f64) -> Result<Self> {
        if !(h > 0.0 && h.is_finite()) {
            return Err(invalid("h", format!("fading gain must be > 0, got {h}")));
        }
        Ok(Self { h })
    }
}

pub fn draw_fading<R: Rng + ?Sized>(rng: &mut R) -> FadingDraw {
    loop {
        let h: f64 = Exp1.sample(rng);
        if h > 0.0 {
            return FadingDraw { h };
        }
    }
}

/// Received power in mW: `10^(P/10) · h / 10^(PL/10)`, or 0 beyond the cap.
pub fn rsrp_linear(eff_power_dbm: f64, pl_db: f64, fading: FadingDraw, max_pl_db: f64) -> f64 {
    if pl_db > max_pl_db {
        return 0.0;
    }
    10f64.powf(eff_power_dbm / 10.0) * fading.h / 10f64.powf(pl_db / 10.0)
}

#[derive(Clone, Copy, Debug, PartialEq)]
enum TierLaw {
    Splm { delta: f64, half_delta: f64 },
    Ohplm(OhplmFactors),
}

/// A path-loss model bound to one tier's antenna height. This is the hot
/// path used by every link computation in the simulator.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TierPathLoss {
    law: TierLaw,
    max_pl_db: f64,
    max_attenuation: f64,
}

impl TierPathLoss {
    pub fn max_pl_db(&self) -> f64 {
        self.max_pl_db
    }

    /// Squared distance used for nearest-station ranking, in the model's
    /// native convention (3-D m² or horizontal km²).
    #[inline]
    pub fn ranking_distance(&self, station: &Point3, ue: &Point3) -> f64 {
        match self.law {
            TierLaw::Splm { .. } => station.distance_sq_m(ue),
            TierLaw::Ohplm(_) => station.horizontal_sq_km(ue),
        }
    }

    /// Path loss in dB between a station and a UE.
    pub fn loss_db(&self, station: &Point3, ue: &Point3) -> f64 {
        match self.law {
            TierLaw::Splm { delta, .. } => {
                let d = station.distance_m(ue).max(MIN_LINK_DISTANCE_M);
                10.0 * delta * d.log10()
            }
            TierLaw::Ohplm(f) => {
                let d = station.horizontal_km(ue).max(MIN_LINK_DISTANCE_M / 1000.0);
                ohplm_raw(d, &f).max(0.0)
            }
        }
    }

    /// Received power in mW for a transmitter of `tx_mw` (linear) and fading
    /// gain `h`; zero when the loss exceeds the cap.
    #[inline]
    pub fn rsrp_mw(&self, tx_mw: f64, station: &Point3, ue: &Point3, h: f64) -> f64 {
        match self.law {
            TierLaw::Splm { half_delta, .. } => {
                let d2 = station.distance_sq_m(ue).max(MIN_LINK_DISTANCE_M * MIN_LINK_DISTANCE_M);
                let attenuation = if half_delta == 2.0 {
                    d2 * d2
                } else {
                    d2.powf(half_delta)
                };
                // attenuation = 10^(PL/10)
                if attenuation > self.max_attenuation {
                    return 0.0;
                }
                tx_mw * h / attenuation
            }
            TierLaw::Ohplm(_) => {
                let pl = self.loss_db(station, ue);
                if pl > self.max_pl_db {
                    return 0.0;
                }
                tx_mw * h / 10f64.powf(pl / 10.0)
            }
        }
    }
}

pub fn dbm_to_mw(dbm: f64) -> f64 {
    10f64.powf(dbm / 10.0)
}

/// Path-loss models bound to the MBS and UABS tiers of a layout.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TierModels {
    pub mbs: TierPathLoss,
    pub uabs: TierPathLoss,
}

impl TierModels {
    pub fn new(model: &PathLossModel, mbs_height_m: f64, uabs_height_m: f64, ue_height_m: f64) -> Result<Self> {
        Ok(Self {
            mbs: model.for_tier(mbs_height_m, ue_height_m)?,
            uabs: model.for_tier(uabs_height_m, ue_height_m)?,
        })
    }

    /// Binds the model using the heights found in a layout. Empty tiers fall
    /// back to the default altitudes; a UE height is required.
    pub fn for_layout(model: &PathLossModel, layout: &NetworkLayout) -> Result<Self> {
        let defaults = crate::scenario::Altitudes::default();
        let ue_h = layout.ue.first().ok_or(SimError::Empty("UE set"))?.z_m;
        let mbs_h = layout.mbs.first().map_or(defaults.mbs_m, |p| p.z_m);
        let uabs_h = layout.uabs.first().map_or(defaults.uabs_m, |p| p.z_m);
        Self::new(model, mbs_h, uabs_h, ue_h)
    }
}

/// Empirical CDF of path losses.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EmpiricalCdf {
    sorted: Vec<f64>,
}

impl EmpiricalCdf {
    pub fn from_samples(mut samples: Vec<f64>) -> Result<Self> {
        if samples.is_empty() {
            return Err(SimError::Empty("sample set"));
        }
        samples.sort_by(f64::total_cmp);
        Ok(Self { sorted: samples })
    }

    pub fn len(&self) -> usize {
        self.sorted.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sorted.is_empty()
    }

    pub fn sorted(&self) -> &[f64] {
        &self.sorted
    }

    /// Smallest sample `x` with `F(x) ≥ p`.
    pub fn quantile(&self, p: f64) -> f64 {
        let n = self.sorted.len();
        let k = (p.clamp(0.0, 1.0) * n as f64).ceil() as usize;
        self.sorted[k.clamp(1, n) - 1]
    }

    /// Fraction of samples `≤ x`.
    pub fn cdf(&self, x: f64) -> f64 {
        self.sorted.partition_point(|&v| v <= x) as f64 / self.sorted.len() as f64
    }

    /// `(loss_db, cum_prob)` pairs, one per sample.
    pub fn points(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        let n = self.sorted.len() as f64;
        self.sorted
            .iter()
            .enumerate()
            .map(move |(i, &v)| (v, (i + 1) as f64 / n))
    }
}

/// CDF of the path loss over every UE–station pair, both tiers combined.
pub fn path_loss_cdf(layout: &NetworkLayout, model: &PathLossModel) -> Result<EmpiricalCdf> {
    if layout.ue.is_empty() {
        return Err(SimError::Empty("UE set"));
    }
    if layout.mbs.is_empty() && layout.uabs.is_empty() {
        return Err(SimError::NoStations);
    }
    let tiers = TierModels::for_layout(model, layout)?;
    let mut losses = Vec::with_capacity(layout.n_ue() * (layout.n_mbs() + layout.n_uabs()));
    for ue in &layout.ue {
        losses.extend(layout.mbs.iter().map(|s| tiers.mbs.loss_db(s, ue)));
        losses.extend(layout.uabs.iter().map(|s| tiers.uabs.loss_db(s, ue)));
    }
    EmpiricalCdf::from_samples(losses)
}
