use rand::Rng;
use serde::{Deserialize, Serialize};

use super::schedule::{allocate, Thresholds};
use super::{build_links, FadingField, IcicParams, LinkBudget, Station, UeAllocation, UeClass};
use crate::error::{invalid, Result, SimError};
use crate::propagation::PathLossModel;
use crate::scenario::NetworkLayout;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RadioSettings {
    /// Upper bound on `log2(1 + SIR)`, bps/Hz. Keeps infinite SIRs finite.
    pub se_ceiling_bpshz: f64,
}

impl Default for RadioSettings {
    fn default() -> Self {
        Self { se_ceiling_bpshz: 10.0 }
    }
}

impl RadioSettings {
    #[inline]
    fn rate(&self, sir: f64) -> f64 {
        (1.0 + sir).log2().min(self.se_ceiling_bpshz)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.se_ceiling_bpshz > 0.0 && self.se_ceiling_bpshz.is_finite()) {
            return Err(invalid("se_ceiling_bpshz", "must be a positive finite number"));
        }
        Ok(())
    }
}

/// UEs scheduled in each subframe type of one cell.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CellLoad {
    pub usf: u32,
    pub csf: u32,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CellLoads {
    pub mbs: Vec<CellLoad>,
    pub uabs: Vec<CellLoad>,
}

impl CellLoads {
    pub fn new(n_mbs: usize, n_uabs: usize) -> Self {
        Self {
            mbs: vec![CellLoad::default(); n_mbs],
            uabs: vec![CellLoad::default(); n_uabs],
        }
    }

    pub fn from_allocations(n_mbs: usize, n_uabs: usize, allocs: &[UeAllocation]) -> Self {
        let mut loads = Self::new(n_mbs, n_uabs);
        for a in allocs {
            let cell = loads.cell_mut(a.serving);
            if a.class.is_usf() {
                cell.usf += 1;
            } else {
                cell.csf += 1;
            }
        }
        loads
    }

    fn cell_mut(&mut self, s: Station) -> &mut CellLoad {
        match s {
            Station::Mbs(i) => &mut self.mbs[i],
            Station::Uabs(i) => &mut self.uabs[i],
        }
    }

    pub fn cell(&self, s: Station) -> Option<&CellLoad> {
        match s {
            Station::Mbs(i) => self.mbs.get(i),
            Station::Uabs(i) => self.uabs.get(i),
        }
    }

    /// The counter that `class` at `station` shares with its cell-mates.
    pub fn count(&self, s: Station, class: UeClass) -> u32 {
        self.cell(s)
            .map(|c| if class.is_usf() { c.usf } else { c.csf })
            .unwrap_or(0)
    }

    /// Sum of all counters of all cells.
    pub fn total(&self) -> u64 {
        self.mbs
            .iter()
            .chain(&self.uabs)
            .map(|c| u64::from(c.usf) + u64::from(c.csf))
            .sum()
    }

    /// (USF-MUE, CSF-MUE, USF-UUE, CSF-UUE) totals across cells.
    pub fn class_totals(&self) -> [u64; 4] {
        let sum =
            |v: &[CellLoad], usf: bool| -> u64 { v.iter().map(|c| u64::from(if usf { c.usf } else { c.csf })).sum() };
        [
            sum(&self.mbs, true),
            sum(&self.mbs, false),
            sum(&self.uabs, true),
            sum(&self.uabs, false),
        ]
    }
}

/// Round-robin share of one UE in its (cell, subframe) pool.
pub fn per_ue_se(
    alloc: &UeAllocation,
    params: &IcicParams,
    loads: &CellLoads,
    settings: &RadioSettings,
) -> Result<f64> {
    let n = loads.count(alloc.serving, alloc.class);
    if n == 0 {
        return Err(SimError::ZeroLoad(format!(
            "{} / {}",
            alloc.serving,
            alloc.class.as_str()
        )));
    }
    let share = if alloc.class.is_usf() {
        params.beta
    } else {
        1.0 - params.beta
    };
    Ok(share * settings.rate(alloc.effective_sir()) / f64::from(n))
}

/// 1-based rank of the 5th-percentile order statistic: `⌈N / 20⌉`.
pub fn fifth_percentile_index(n: usize) -> usize {
    n.div_ceil(20).max(1)
}

/// The `⌈0.05·N⌉`-th smallest value.
pub fn fifth_percentile_se(values: &[f64]) -> Result<f64> {
    if values.is_empty() {
        return Err(SimError::Empty("spectral-efficiency list"));
    }
    let k = fifth_percentile_index(values.len());
    let mut v = values.to_vec();
    let (_, kth, _) = v.select_nth_unstable_by(k - 1, f64::total_cmp);
    Ok(*kth)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeReport {
    pub per_ue_se: Vec<f64>,
    pub fifth_percentile_se: f64,
    pub cell_loads: CellLoads,
    pub params_used: IcicParams,
    pub allocations: Vec<UeAllocation>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub elapsed_s: Option<f64>,
}

impl SeReport {
    pub fn n_ue(&self) -> usize {
        self.per_ue_se.len()
    }

    /// Number of UEs served by UABSs.
    pub fn uue_count(&self) -> usize {
        self.allocations.iter().filter(|a| !a.class.is_mue()).count()
    }
}

/// Scores one parameter set against precomputed link budgets.
pub fn evaluate_links(
    links: &[LinkBudget],
    n_mbs: usize,
    n_uabs: usize,
    params: &IcicParams,
    settings: &RadioSettings,
) -> Result<SeReport> {
    params.validate()?;
    if links.is_empty() {
        return Err(SimError::Empty("UE set"));
    }
    let thresholds = Thresholds::from(params);
    let allocations: Vec<UeAllocation> = links.iter().map(|l| allocate(l, params.alpha, &thresholds)).collect();
    let cell_loads = CellLoads::from_allocations(n_mbs, n_uabs, &allocations);
    let per_ue_se = allocations
        .iter()
        .map(|a| per_ue_se(a, params, &cell_loads, settings))
        .collect::<Result<Vec<f64>>>()?;
    let fifth_percentile_se = fifth_percentile_se(&per_ue_se)?;
    Ok(SeReport {
        per_ue_se,
        fifth_percentile_se,
        cell_loads,
        params_used: *params,
        allocations,
        elapsed_s: None,
    })
}

/// Full pipeline: fading draws, link budgets, SIRs, association, loads,
/// per-UE SE and the 5th percentile.
pub fn evaluate_5pse<R: Rng + ?Sized>(
    layout: &NetworkLayout,
    model: &PathLossModel,
    params: &IcicParams,
    settings: &RadioSettings,
    rng: &mut R,
) -> Result<SeReport> {
    let fading = FadingField::for_layout(rng, layout);
    let links = build_links(layout, model, &fading)?;
    evaluate_links(&links, layout.n_mbs(), layout.n_uabs(), params, settings)
}
