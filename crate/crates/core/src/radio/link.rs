use rand::Rng;

use crate::error::{Result, SimError};
use crate::propagation::{dbm_to_mw, draw_fading, PathLossModel, TierModels, TierPathLoss};
use crate::scenario::{NetworkLayout, Point3};

/// Rayleigh fading gains for every (UE, station) link of one drop.
///
/// The MBS block is drawn first (UE-major), then the UABS block, so the
/// realization only depends on the seed and the three counts.
#[derive(Clone, Debug, PartialEq)]
pub struct FadingField {
    n_ue: usize,
    n_mbs: usize,
    n_uabs: usize,
    mbs: Vec<f64>,
    uabs: Vec<f64>,
}

impl FadingField {
    pub fn draw<R: Rng + ?Sized>(rng: &mut R, n_ue: usize, n_mbs: usize, n_uabs: usize) -> Self {
        let mbs = (0..n_ue * n_mbs).map(|_| draw_fading(rng).h).collect();
        let uabs = (0..n_ue * n_uabs).map(|_| draw_fading(rng).h).collect();
        Self {
            n_ue,
            n_mbs,
            n_uabs,
            mbs,
            uabs,
        }
    }

    pub fn for_layout<R: Rng + ?Sized>(rng: &mut R, layout: &NetworkLayout) -> Self {
        Self::draw(rng, layout.n_ue(), layout.n_mbs(), layout.n_uabs())
    }

    /// All gains equal to one (no fading).
    pub fn unit(n_ue: usize, n_mbs: usize, n_uabs: usize) -> Self {
        Self {
            n_ue,
            n_mbs,
            n_uabs,
            mbs: vec![1.0; n_ue * n_mbs],
            uabs: vec![1.0; n_ue * n_uabs],
        }
    }

    pub fn from_parts(n_ue: usize, mbs: Vec<f64>, uabs: Vec<f64>) -> Result<Self> {
        if n_ue == 0 || !mbs.len().is_multiple_of(n_ue) || !uabs.len().is_multiple_of(n_ue) {
            return Err(SimError::Parse("fading matrices do not match the UE count".into()));
        }
        if mbs.iter().chain(&uabs).any(|&h| !(h > 0.0)) {
            return Err(SimError::Parse("fading gains must be > 0".into()));
        }
        Ok(Self {
            n_ue,
            n_mbs: mbs.len() / n_ue,
            n_uabs: uabs.len() / n_ue,
            mbs,
            uabs,
        })
    }

    pub fn dims(&self) -> (usize, usize, usize) {
        (self.n_ue, self.n_mbs, self.n_uabs)
    }

    pub fn mbs_row(&self, ue: usize) -> &[f64] {
        &self.mbs[ue * self.n_mbs..(ue + 1) * self.n_mbs]
    }

    pub fn uabs_row(&self, ue: usize) -> &[f64] {
        &self.uabs[ue * self.n_uabs..(ue + 1) * self.n_uabs]
    }

    fn check(&self, layout: &NetworkLayout) -> Result<()> {
        if self.dims() != (layout.n_ue(), layout.n_mbs(), layout.n_uabs()) {
            return Err(SimError::Parse(format!(
                "fading field {:?} does not cover layout ({}, {}, {})",
                self.dims(),
                layout.n_ue(),
                layout.n_mbs(),
                layout.n_uabs()
            )));
        }
        Ok(())
    }
}

/// One tier's contribution at a UE: the nearest station, its received power,
/// and the summed power of every other station of the tier.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TierTerms {
    pub nearest: Option<usize>,
    pub serving_mw: f64,
    pub others_mw: f64,
}

pub fn tier_terms(ue: &Point3, stations: &[Point3], tx_mw: f64, tier: &TierPathLoss, fading: &[f64]) -> TierTerms {
    let mut nearest = None;
    let mut best = f64::INFINITY;
    for (i, s) in stations.iter().enumerate() {
        let d = tier.ranking_distance(s, ue);
        if d < best {
            best = d;
            nearest = Some(i);
        }
    }
    let Some(moi) = nearest else {
        return TierTerms {
            nearest: None,
            serving_mw: 0.0,
            others_mw: 0.0,
        };
    };
    let mut serving_mw = 0.0;
    let mut others_mw = 0.0;
    for (i, (s, &h)) in stations.iter().zip(fading).enumerate() {
        let p = tier.rsrp_mw(tx_mw, s, ue, h);
        if i == moi {
            serving_mw = p;
        } else {
            others_mw += p;
        }
    }
    TierTerms {
        nearest,
        serving_mw,
        others_mw,
    }
}

/// Received powers at one UE. Interference excludes the MOI and the UOI and
/// is kept split by tier so the CSF aggregate can be formed for any α.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LinkBudget {
    pub ue_index: usize,
    pub moi_index: Option<usize>,
    pub uoi_index: Option<usize>,
    pub s_mbs_mw: f64,
    pub s_uabs_mw: f64,
    /// Sum over every MBS except the MOI, full power.
    pub z_mbs_mw: f64,
    /// Sum over every UABS except the UOI.
    pub z_uabs_mw: f64,
}

impl LinkBudget {
    pub fn from_terms(ue_index: usize, mbs: TierTerms, uabs: TierTerms) -> Self {
        Self {
            ue_index,
            moi_index: mbs.nearest,
            uoi_index: uabs.nearest,
            s_mbs_mw: mbs.serving_mw,
            s_uabs_mw: uabs.serving_mw,
            z_mbs_mw: mbs.others_mw,
            z_uabs_mw: uabs.others_mw,
        }
    }

    /// Aggregate interference during uncoordinated subframes.
    pub fn z_usf_mw(&self) -> f64 {
        self.z_mbs_mw + self.z_uabs_mw
    }

    /// Aggregate interference during coordinated subframes: all MBSs share
    /// one pattern, so every interfering MBS is scaled by α.
    pub fn z_csf_mw(&self, alpha: f64) -> f64 {
        alpha * self.z_mbs_mw + self.z_uabs_mw
    }
}

pub fn compute_link_budget(
    ue_index: usize,
    layout: &NetworkLayout,
    tiers: &TierModels,
    fading: &FadingField,
) -> Result<LinkBudget> {
    if layout.mbs.is_empty() && layout.uabs.is_empty() {
        return Err(SimError::NoStations);
    }
    fading.check(layout)?;
    let ue = layout
        .ue
        .get(ue_index)
        .ok_or_else(|| crate::error::invalid("ue_index", format!("{ue_index} out of range")))?;
    Ok(link_for(ue_index, ue, layout, tiers, fading))
}

fn link_for(
    ue_index: usize,
    ue: &Point3,
    layout: &NetworkLayout,
    tiers: &TierModels,
    fading: &FadingField,
) -> LinkBudget {
    let mbs = tier_terms(
        ue,
        &layout.mbs,
        dbm_to_mw(layout.mbs_eff_power_dbm),
        &tiers.mbs,
        fading.mbs_row(ue_index),
    );
    let uabs = tier_terms(
        ue,
        &layout.uabs,
        dbm_to_mw(layout.uabs_eff_power_dbm),
        &tiers.uabs,
        fading.uabs_row(ue_index),
    );
    LinkBudget::from_terms(ue_index, mbs, uabs)
}

/// Link budgets for every UE of a layout.
pub fn build_links(layout: &NetworkLayout, model: &PathLossModel, fading: &FadingField) -> Result<Vec<LinkBudget>> {
    if layout.ue.is_empty() {
        return Err(SimError::Empty("UE set"));
    }
    if layout.mbs.is_empty() && layout.uabs.is_empty() {
        return Err(SimError::NoStations);
    }
    fading.check(layout)?;
    let tiers = TierModels::for_layout(model, layout)?;
    Ok(layout
        .ue
        .iter()
        .enumerate()
        .map(|(i, ue)| link_for(i, ue, layout, &tiers, fading))
        .collect())
}
