//! Monte-Carlo experiment orchestration.
//!
//! Every random stream of a drop is derived from the master seed and the
//! drop's coordinates, so each cell of the experiment matrix can be
//! recomputed in isolation and in any order.

use std::collections::HashMap;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result, SimError};
use crate::gaopt::{GaBounds, GaConfig, GaProblem, GenerationStats};
use crate::hexopt::{grid_search_links, IcicGrid};
use crate::propagation::PathLossModel;
use crate::radio::{build_links, FadingField, IcicMode, IcicParams, RadioSettings, DEFAULT_BETA};
use crate::scenario::{destroy_mbs, generate_ppp_layout, NetworkLayout, ScenarioConfig, SimRegion};
use crate::seed::{derive_seed, purpose, rng_from_seed};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Deployment {
    Hex,
    Ga,
}

impl Deployment {
    pub fn as_str(&self) -> &'static str {
        match self {
            Deployment::Hex => "hex",
            Deployment::Ga => "ga",
        }
    }
}

impl std::str::FromStr for Deployment {
    type Err = SimError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "hex" => Ok(Deployment::Hex),
            "ga" => Ok(Deployment::Ga),
            other => Err(invalid("deployment", format!("unknown deployment {other:?}"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSpec {
    pub scenario: ScenarioConfig,
    pub model: PathLossModel,
    pub deployment: Deployment,
    pub icic_mode: IcicMode,
    pub n_uabs_list: Vec<usize>,
    pub destroy_fractions: Vec<f64>,
    pub n_drops: usize,
    pub grid: IcicGrid,
    pub ga: GaConfig,
    pub beta: f64,
    pub settings: RadioSettings,
    pub master_seed: u64,
}

impl ExperimentSpec {
    /// 5 × 5 km², 20 drops, 4 and 16 UABSs, 50 % destroyed, SPLM with δ = 4.
    pub fn desk() -> Self {
        Self {
            scenario: ScenarioConfig {
                region: SimRegion {
                    width_km: 5.0,
                    height_km: 5.0,
                },
                ..ScenarioConfig::default()
            },
            model: PathLossModel::splm(4.0),
            deployment: Deployment::Hex,
            icic_mode: IcicMode::Feicic,
            n_uabs_list: vec![4, 16],
            destroy_fractions: vec![0.5],
            n_drops: 20,
            grid: IcicGrid::default(),
            ga: GaConfig::table(),
            beta: DEFAULT_BETA,
            settings: RadioSettings::default(),
            master_seed: 1,
        }
    }

    /// 10 × 10 km², 100 drops, up to 60 UABSs, both destruction levels.
    pub fn full() -> Self {
        Self {
            scenario: ScenarioConfig::default(),
            n_uabs_list: vec![0, 10, 20, 30, 40, 50, 60],
            destroy_fractions: vec![0.5, 0.975],
            n_drops: 100,
            ..Self::desk()
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.scenario.validate()?;
        self.model.validate()?;
        self.settings.validate()?;
        if self.n_drops == 0 {
            return Err(invalid("n_drops", "must be at least 1"));
        }
        if self.n_uabs_list.is_empty() {
            return Err(invalid("n_uabs_list", "must not be empty"));
        }
        if self.destroy_fractions.is_empty() {
            return Err(invalid("destroy_fractions", "must not be empty"));
        }
        if self.destroy_fractions.iter().any(|f| !(0.0..=1.0).contains(f)) {
            return Err(invalid("destroy_fractions", "fractions must lie in [0, 1]"));
        }
        if !(self.beta > 0.0 && self.beta < 1.0) {
            return Err(invalid("beta", "must lie in (0, 1)"));
        }
        match self.deployment {
            Deployment::Hex => self.grid.validate(),
            Deployment::Ga => {
                self.ga.validate()?;
                self.bounds().validate()
            }
        }
    }

    pub fn bounds(&self) -> GaBounds {
        GaBounds::new(&self.scenario.region, self.icic_mode)
    }

    /// Every (n_uabs, destroy_fraction, drop) coordinate in matrix order.
    pub fn cells(&self) -> Vec<DropKey> {
        let mut out = Vec::new();
        for &n_uabs in &self.n_uabs_list {
            for &destroy_fraction in &self.destroy_fractions {
                for drop in 0..self.n_drops {
                    out.push(DropKey {
                        n_uabs,
                        destroy_fraction,
                        drop,
                    });
                }
            }
        }
        out
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DropKey {
    pub n_uabs: usize,
    pub destroy_fraction: f64,
    pub drop: usize,
}

impl DropKey {
    fn seed(&self, master: u64, tag: u64) -> u64 {
        derive_seed(
            master,
            &[
                self.drop as u64,
                self.n_uabs as u64,
                self.destroy_fraction.to_bits(),
                tag,
            ],
        )
    }

    pub fn layout_seed(&self, master: u64) -> u64 {
        derive_seed(master, &[self.drop as u64, purpose::LAYOUT])
    }

    pub fn destroy_seed(&self, master: u64) -> u64 {
        derive_seed(master, &[self.drop as u64, purpose::DESTROY])
    }

    pub fn fading_seed(&self, master: u64) -> u64 {
        self.seed(master, purpose::FADING)
    }

    pub fn optimizer_seed(&self, master: u64) -> u64 {
        self.seed(master, purpose::OPTIMIZER)
    }
}

/// The layout and fading realization of one drop. The MBS and UE point
/// processes and the destroyed set depend only on the drop index.
#[derive(Clone, Debug, PartialEq)]
pub struct DropRealization {
    pub layout: NetworkLayout,
    pub fading: FadingField,
}

/// Scenario of one drop before destruction.
pub fn drop_scenario(spec: &ExperimentSpec, key: &DropKey) -> ScenarioConfig {
    ScenarioConfig {
        n_uabs: key.n_uabs,
        destroy_fraction: key.destroy_fraction,
        rng_seed: key.layout_seed(spec.master_seed),
        ..spec.scenario.clone()
    }
}

pub fn realize_drop(spec: &ExperimentSpec, key: &DropKey) -> Result<DropRealization> {
    let full = generate_ppp_layout(&drop_scenario(spec, key))?;
    let layout = destroy_mbs(&full, key.destroy_fraction, key.destroy_seed(spec.master_seed))?;
    let fading = FadingField::for_layout(&mut rng_from_seed(key.fading_seed(spec.master_seed)), &layout);
    Ok(DropRealization { layout, fading })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DropRecord {
    pub drop_id: usize,
    pub n_uabs: usize,
    pub destroy_fraction: f64,
    pub mode: IcicMode,
    pub tau_db: f64,
    pub alpha: f64,
    #[serde(with = "crate::serde_f64")]
    pub rho_db: f64,
    #[serde(with = "crate::serde_f64")]
    pub rho_prime_db: f64,
    pub fifth_pse: f64,
    pub elapsed_s: f64,
}

impl DropRecord {
    pub fn params(&self, beta: f64) -> IcicParams {
        IcicParams {
            tau_db: self.tau_db,
            alpha: self.alpha,
            rho_db: self.rho_db,
            rho_prime_db: self.rho_prime_db,
            beta,
        }
    }
}

/// Optimizer output for one drop, before it is flattened into a record.
#[derive(Clone, Debug, PartialEq)]
pub struct DropOutcome {
    pub params: IcicParams,
    pub fifth_pse: f64,
    pub elapsed_s: f64,
    /// Final UABS positions (hex positions for the grid search).
    pub layout: NetworkLayout,
    /// GA fitness history; empty for the grid search.
    pub history: Vec<GenerationStats>,
}

/// Runs the configured optimizer on one drop. The clock covers the
/// optimizer only.
pub fn optimize_drop(spec: &ExperimentSpec, key: &DropKey, real: &DropRealization) -> Result<DropOutcome> {
    match spec.deployment {
        Deployment::Hex => {
            let grid = spec.grid.for_mode(spec.icic_mode);
            let start = Instant::now();
            let links = build_links(&real.layout, &spec.model, &real.fading)?;
            let r = grid_search_links(
                &links,
                real.layout.n_mbs(),
                real.layout.n_uabs(),
                &grid,
                spec.beta,
                &spec.settings,
            )?;
            let elapsed_s = start.elapsed().as_secs_f64();
            Ok(DropOutcome {
                params: r.best_params,
                fifth_pse: r.best_report.fifth_percentile_se,
                elapsed_s,
                layout: real.layout.clone(),
                history: Vec::new(),
            })
        }
        Deployment::Ga => {
            let bounds = spec.bounds();
            let cfg = spec.ga.with_seed(key.optimizer_seed(spec.master_seed));
            let start = Instant::now();
            let problem = GaProblem::new(&real.layout, &spec.model, real.fading.clone(), spec.beta, spec.settings)?;
            let out = problem.optimize(&cfg, &bounds, &[])?;
            let elapsed_s = start.elapsed().as_secs_f64();
            let (layout, params) = crate::gaopt::decode(&out.best, &real.layout, &bounds, spec.beta)?;
            Ok(DropOutcome {
                params,
                fifth_pse: out.best_fitness,
                elapsed_s,
                layout,
                history: out.history,
            })
        }
    }
}

fn run_drop(spec: &ExperimentSpec, key: &DropKey) -> Result<DropRecord> {
    let real = realize_drop(spec, key)?;
    let out = optimize_drop(spec, key, &real)?;
    Ok(DropRecord {
        drop_id: key.drop,
        n_uabs: key.n_uabs,
        destroy_fraction: key.destroy_fraction,
        mode: spec.icic_mode,
        tau_db: out.params.tau_db,
        alpha: out.params.alpha,
        rho_db: out.params.rho_db,
        rho_prime_db: out.params.rho_prime_db,
        fifth_pse: out.fifth_pse,
        elapsed_s: out.elapsed_s,
    })
}

fn wrap(key: &DropKey) -> impl Fn(SimError) -> SimError + '_ {
    move |e| SimError::Drop {
        drop: key.drop,
        source: Box::new(e),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CellAggregate {
    pub n_uabs: usize,
    pub destroy_fraction: f64,
    pub mode: IcicMode,
    pub n_drops: usize,
    pub mean_fifth_pse: f64,
    pub std_fifth_pse: f64,
    /// Most frequent optimal parameter set; ties go to the earliest drop.
    pub best_params_mode: IcicParams,
    pub mean_elapsed_s: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AggregateResult {
    pub deployment: Deployment,
    pub cells: Vec<CellAggregate>,
    pub drops: Vec<DropRecord>,
}

impl AggregateResult {
    pub fn cell(&self, n_uabs: usize, destroy_fraction: f64) -> Option<&CellAggregate> {
        self.cells
            .iter()
            .find(|c| c.n_uabs == n_uabs && c.destroy_fraction == destroy_fraction)
    }

    /// Copy with every timing field zeroed, for reproducibility checks.
    pub fn without_timing(&self) -> Self {
        let mut out = self.clone();
        out.cells.iter_mut().for_each(|c| c.mean_elapsed_s = 0.0);
        out.drops.iter_mut().for_each(|d| d.elapsed_s = 0.0);
        out
    }
}

/// Mean and sample standard deviation (zero for a single value).
pub fn mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

/// Groups per-drop records into cells, keeping first-appearance order.
pub fn aggregate(deployment: Deployment, drops: Vec<DropRecord>, beta: f64) -> Result<AggregateResult> {
    if drops.is_empty() {
        return Err(SimError::Empty("drop records"));
    }
    let mut order: Vec<(usize, u64, IcicMode)> = Vec::new();
    let mut groups: HashMap<(usize, u64, IcicMode), Vec<&DropRecord>> = HashMap::new();
    for d in &drops {
        let k = (d.n_uabs, d.destroy_fraction.to_bits(), d.mode);
        groups
            .entry(k)
            .or_insert_with(|| {
                order.push(k);
                Vec::new()
            })
            .push(d);
    }
    let cells = order
        .iter()
        .map(|k| {
            let g = &groups[k];
            let se: Vec<f64> = g.iter().map(|d| d.fifth_pse).collect();
            let (mean_fifth_pse, std_fifth_pse) = mean_std(&se);
            let elapsed: Vec<f64> = g.iter().map(|d| d.elapsed_s).collect();
            CellAggregate {
                n_uabs: k.0,
                destroy_fraction: f64::from_bits(k.1),
                mode: k.2,
                n_drops: g.len(),
                mean_fifth_pse,
                std_fifth_pse,
                best_params_mode: modal_params(g, beta),
                mean_elapsed_s: mean_std(&elapsed).0,
            }
        })
        .collect();
    Ok(AggregateResult {
        deployment,
        cells,
        drops,
    })
}

fn modal_params(records: &[&DropRecord], beta: f64) -> IcicParams {
    let key = |d: &DropRecord| {
        [
            d.tau_db.to_bits(),
            d.alpha.to_bits(),
            d.rho_db.to_bits(),
            d.rho_prime_db.to_bits(),
        ]
    };
    let mut counts: HashMap<[u64; 4], usize> = HashMap::new();
    for d in records {
        *counts.entry(key(d)).or_default() += 1;
    }
    let mut best = records[0];
    for d in records {
        if counts[&key(d)] > counts[&key(best)] {
            best = d;
        }
    }
    best.params(beta)
}

/// Runs every (n_uabs, destroy_fraction, drop) of the spec. Drops run in
/// parallel; results are collected in matrix order.
pub fn run_experiment(spec: &ExperimentSpec) -> Result<AggregateResult> {
    spec.validate()?;
    let drops = spec
        .cells()
        .par_iter()
        .map(|key| run_drop(spec, key).map_err(wrap(key)))
        .collect::<Result<Vec<_>>>()?;
    aggregate(spec.deployment, drops, spec.beta)
}

/// Mean-5pSE-versus-τ curve of one matrix cell.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CreCurve {
    pub mode: IcicMode,
    pub n_uabs: usize,
    pub destroy_fraction: f64,
    pub tau_db: Vec<f64>,
    pub mean_fifth_pse: Vec<f64>,
    pub std_fifth_pse: Vec<f64>,
    /// Per-drop values, `per_drop[drop][tau]`.
    pub per_drop: Vec<Vec<f64>>,
}

impl CreCurve {
    /// τ of the highest mean; ties go to the smallest index.
    pub fn peak_tau_db(&self) -> f64 {
        let i = crate::hexopt::first_argmax(self.mean_fifth_pse.iter().copied()).expect("curve is non-empty");
        self.tau_db[i]
    }
}

/// For each τ, optimizes (α, ρ, ρ′) over the spec's grid restricted to the
/// spec's mode, then averages the per-drop optima across drops. Uses the hex
/// deployment regardless of `spec.deployment`.
pub fn sweep_cre(spec: &ExperimentSpec, tau_values_db: &[f64]) -> Result<Vec<CreCurve>> {
    sweep_cre_modes(spec, tau_values_db, &[spec.icic_mode])
}

/// [`sweep_cre`] for several modes sharing the same drops.
pub fn sweep_cre_modes(spec: &ExperimentSpec, tau_values_db: &[f64], modes: &[IcicMode]) -> Result<Vec<CreCurve>> {
    if tau_values_db.is_empty() {
        return Err(invalid("tau_values_db", "must not be empty"));
    }
    if modes.is_empty() {
        return Err(invalid("modes", "must not be empty"));
    }
    let hex = ExperimentSpec {
        deployment: Deployment::Hex,
        ..spec.clone()
    };
    hex.validate()?;
    let grid = spec.grid.with_tau(tau_values_db.to_vec());
    grid.validate()?;

    // per_key[key][mode][tau]
    let per_key = hex
        .cells()
        .par_iter()
        .map(|key| {
            let real = realize_drop(&hex, key)?;
            let links = build_links(&real.layout, &hex.model, &real.fading)?;
            modes
                .iter()
                .map(|&mode| {
                    let g = grid.for_mode(mode);
                    let points = crate::hexopt::score_grid(
                        &links,
                        real.layout.n_mbs(),
                        real.layout.n_uabs(),
                        &g,
                        hex.beta,
                        &hex.settings,
                    )?;
                    let per_tau = g.len() / g.tau_values_db.len();
                    Ok(points
                        .chunks(per_tau)
                        .map(|c| c.iter().map(|p| p.fifth_pse).fold(f64::NEG_INFINITY, f64::max))
                        .collect::<Vec<f64>>())
                })
                .collect::<Result<Vec<_>>>()
                .map_err(wrap(key))
        })
        .collect::<Result<Vec<_>>>()?;

    let keys = hex.cells();
    let mut curves = Vec::new();
    for (m, &mode) in modes.iter().enumerate() {
        for &n_uabs in &hex.n_uabs_list {
            for &destroy_fraction in &hex.destroy_fractions {
                let per_drop: Vec<Vec<f64>> = keys
                    .iter()
                    .zip(&per_key)
                    .filter(|(k, _)| k.n_uabs == n_uabs && k.destroy_fraction == destroy_fraction)
                    .map(|(_, v)| v[m].clone())
                    .collect();
                let (mean_fifth_pse, std_fifth_pse) = (0..tau_values_db.len())
                    .map(|t| mean_std(&per_drop.iter().map(|d| d[t]).collect::<Vec<_>>()))
                    .unzip();
                curves.push(CreCurve {
                    mode,
                    n_uabs,
                    destroy_fraction,
                    tau_db: tau_values_db.to_vec(),
                    mean_fifth_pse,
                    std_fifth_pse,
                    per_drop,
                });
            }
        }
    }
    Ok(curves)
}
