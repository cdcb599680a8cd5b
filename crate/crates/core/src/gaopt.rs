//! Real-coded genetic algorithm over UABS positions and the shared ICIC
//! parameters.
//!
//! A chromosome is `[x_0, y_0, …, x_{n-1}, y_{n-1}, τ, α, ρ, ρ′]`. Fitness is
//! the 5pSE of the decoded layout under one fading realization fixed for the
//! whole run, so it is a deterministic function of the genes.

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result, SimError};
use crate::propagation::{dbm_to_mw, PathLossModel, TierModels};
use crate::radio::{
    evaluate_links, tier_terms, FadingField, IcicMode, IcicParams, LinkBudget, RadioSettings, SeReport, TierTerms,
};
use crate::scenario::{NetworkLayout, Point3, SimRegion};
use crate::seed::{derive_seed, purpose, rng_from_seed};

const ROULETTE_EPS: f64 = 1e-9;

/// Closed interval `[lo, hi]`. `lo == hi` freezes the gene.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    #[serde(with = "crate::serde_f64")]
    pub lo: f64,
    #[serde(with = "crate::serde_f64")]
    pub hi: f64,
}

impl Interval {
    pub const fn new(lo: f64, hi: f64) -> Self {
        Self { lo, hi }
    }

    pub const fn pinned(v: f64) -> Self {
        Self { lo: v, hi: v }
    }

    pub fn is_frozen(&self) -> bool {
        self.lo == self.hi
    }

    pub fn contains(&self, v: f64) -> bool {
        v == self.lo || (self.lo..=self.hi).contains(&v)
    }

    fn clamp(&self, v: f64) -> f64 {
        if self.is_frozen() {
            self.lo
        } else {
            v.clamp(self.lo, self.hi)
        }
    }

    fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        if self.is_frozen() {
            self.lo
        } else {
            rng.random_range(self.lo..=self.hi)
        }
    }

    fn validate(&self, name: &'static str) -> Result<()> {
        if self.lo.is_nan() || self.hi.is_nan() || self.lo > self.hi {
            return Err(invalid(name, format!("invalid interval [{}, {}]", self.lo, self.hi)));
        }
        if !self.is_frozen() && !(self.lo.is_finite() && self.hi.is_finite()) {
            return Err(invalid(name, "only frozen genes may be infinite"));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GaBounds {
    pub x_km: Interval,
    pub y_km: Interval,
    pub tau_db: Interval,
    pub alpha: Interval,
    pub rho_db: Interval,
    pub rho_prime_db: Interval,
}

impl GaBounds {
    /// Whole region, τ ∈ [0, 15] dB, α ∈ [0, 1], ρ ∈ [20, 40] dB,
    /// ρ′ ∈ [−20, −5] dB, restricted to `mode`.
    pub fn new(region: &SimRegion, mode: IcicMode) -> Self {
        let full = Self {
            x_km: Interval::new(0.0, region.width_km),
            y_km: Interval::new(0.0, region.height_km),
            tau_db: Interval::new(0.0, 15.0),
            alpha: Interval::new(0.0, 1.0),
            rho_db: Interval::new(20.0, 40.0),
            rho_prime_db: Interval::new(-20.0, -5.0),
        };
        full.for_mode(mode)
    }

    pub fn for_mode(self, mode: IcicMode) -> Self {
        match mode {
            IcicMode::Feicic => self,
            IcicMode::Eicic => Self {
                alpha: Interval::pinned(0.0),
                ..self
            },
            IcicMode::None => Self {
                alpha: Interval::pinned(1.0),
                rho_db: Interval::pinned(f64::INFINITY),
                rho_prime_db: Interval::pinned(f64::NEG_INFINITY),
                ..self
            },
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.x_km.validate("x_km")?;
        self.y_km.validate("y_km")?;
        self.tau_db.validate("tau_db")?;
        self.alpha.validate("alpha")?;
        self.rho_db.validate("rho_db")?;
        self.rho_prime_db.validate("rho_prime_db")?;
        if !self.tau_db.lo.is_finite() || !self.tau_db.hi.is_finite() {
            return Err(invalid("tau_db", "bounds must be finite"));
        }
        if self.alpha.lo < 0.0 || self.alpha.hi > 1.0 {
            return Err(invalid("alpha", "bounds must lie in [0, 1]"));
        }
        Ok(())
    }

    /// Bounds of gene `i` in a chromosome of `n_uabs` UABSs.
    pub fn gene(&self, i: usize, n_uabs: usize) -> Interval {
        let p = 2 * n_uabs;
        if i < p {
            if i.is_multiple_of(2) {
                self.x_km
            } else {
                self.y_km
            }
        } else {
            match i - p {
                0 => self.tau_db,
                1 => self.alpha,
                2 => self.rho_db,
                _ => self.rho_prime_db,
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Chromosome {
    /// Interleaved `x, y` pairs in km.
    pub uabs_xy: Vec<f64>,
    pub tau_db: f64,
    pub alpha: f64,
    #[serde(with = "crate::serde_f64")]
    pub rho_db: f64,
    #[serde(with = "crate::serde_f64")]
    pub rho_prime_db: f64,
}

impl Chromosome {
    pub fn n_uabs(&self) -> usize {
        self.uabs_xy.len() / 2
    }

    pub fn len(&self) -> usize {
        self.uabs_xy.len() + 4
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn genes(&self) -> Vec<f64> {
        let mut g = self.uabs_xy.clone();
        g.extend([self.tau_db, self.alpha, self.rho_db, self.rho_prime_db]);
        g
    }

    pub fn from_genes(genes: &[f64]) -> Result<Self> {
        if genes.len() < 4 || !genes.len().is_multiple_of(2) {
            return Err(invalid("chromosome", format!("length {} is not 2n + 4", genes.len())));
        }
        let p = genes.len() - 4;
        Ok(Self {
            uabs_xy: genes[..p].to_vec(),
            tau_db: genes[p],
            alpha: genes[p + 1],
            rho_db: genes[p + 2],
            rho_prime_db: genes[p + 3],
        })
    }

    pub fn params(&self, beta: f64) -> IcicParams {
        IcicParams {
            tau_db: self.tau_db,
            alpha: self.alpha,
            rho_db: self.rho_db,
            rho_prime_db: self.rho_prime_db,
            beta,
        }
    }

    pub fn within(&self, bounds: &GaBounds) -> bool {
        let n = self.n_uabs();
        self.genes()
            .iter()
            .enumerate()
            .all(|(i, &g)| bounds.gene(i, n).contains(g))
    }

    fn random<R: Rng + ?Sized>(n_uabs: usize, bounds: &GaBounds, rng: &mut R) -> Self {
        let genes: Vec<f64> = (0..2 * n_uabs + 4)
            .map(|i| bounds.gene(i, n_uabs).sample(rng))
            .collect();
        Self::from_genes(&genes).expect("length is 2n + 4")
    }
}

/// Builds the chromosome describing a layout's UABS positions and `params`.
pub fn encode(layout: &NetworkLayout, params: &IcicParams) -> Chromosome {
    Chromosome {
        uabs_xy: layout.uabs.iter().flat_map(|p| [p.x_km, p.y_km]).collect(),
        tau_db: params.tau_db,
        alpha: params.alpha,
        rho_db: params.rho_db,
        rho_prime_db: params.rho_prime_db,
    }
}

/// Replaces the UABS positions of `layout_base` by the chromosome's, keeping
/// each UABS altitude, and assembles the ICIC parameters with fixed `beta`.
pub fn decode(
    chromosome: &Chromosome,
    layout_base: &NetworkLayout,
    bounds: &GaBounds,
    beta: f64,
) -> Result<(NetworkLayout, IcicParams)> {
    if chromosome.uabs_xy.len() != 2 * layout_base.n_uabs() {
        return Err(invalid(
            "chromosome",
            format!(
                "{} position genes for {} UABSs",
                chromosome.uabs_xy.len(),
                layout_base.n_uabs()
            ),
        ));
    }
    if !chromosome.within(bounds) {
        return Err(invalid("chromosome", "gene outside its bounds"));
    }
    let params = chromosome.params(beta);
    params.validate()?;
    Ok((layout_base.with_uabs(placed_uabs(chromosome, layout_base)), params))
}

fn placed_uabs(chromosome: &Chromosome, base: &NetworkLayout) -> Vec<Point3> {
    chromosome
        .uabs_xy
        .chunks_exact(2)
        .zip(&base.uabs)
        .map(|(xy, old)| Point3::new(xy[0], xy[1], old.z_m))
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GaConfig {
    pub population_size: usize,
    pub generations: usize,
    pub crossover_prob: f64,
    pub mutation_prob: f64,
    pub elitism_count: usize,
    pub rng_seed: u64,
}

impl Default for GaConfig {
    fn default() -> Self {
        Self::table()
    }
}

impl GaConfig {
    /// Population 60, 100 generations, crossover 0.7, mutation 0.1.
    pub fn table() -> Self {
        Self {
            population_size: 60,
            generations: 100,
            crossover_prob: 0.7,
            mutation_prob: 0.1,
            elitism_count: 1,
            rng_seed: 0,
        }
    }

    /// Same operators with a 6-generation stop condition.
    pub fn listing() -> Self {
        Self {
            generations: 6,
            ..Self::table()
        }
    }

    pub fn with_seed(self, rng_seed: u64) -> Self {
        Self { rng_seed, ..self }
    }

    pub fn validate(&self) -> Result<()> {
        if self.population_size < 2 {
            return Err(invalid("population_size", "must be at least 2"));
        }
        if self.generations < 1 {
            return Err(invalid("generations", "must be at least 1"));
        }
        if !(0.0..=1.0).contains(&self.crossover_prob) {
            return Err(invalid("crossover_prob", "must lie in [0, 1]"));
        }
        if !(0.0..=1.0).contains(&self.mutation_prob) {
            return Err(invalid("mutation_prob", "must lie in [0, 1]"));
        }
        if self.elitism_count >= self.population_size {
            return Err(invalid("elitism_count", "must be smaller than the population"));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GenerationStats {
    /// 1-based; generation 1 is the initial population.
    pub generation: usize,
    /// Best fitness seen so far.
    pub best: f64,
    /// Mean fitness of this generation's population.
    pub mean: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct GaOutcome {
    pub best: Chromosome,
    pub best_fitness: f64,
    pub best_report: SeReport,
    pub history: Vec<GenerationStats>,
    pub evaluations: usize,
}

/// Fitness oracle for one GA run.
///
/// MBS-side terms depend only on the UE and MBS realizations, so they are
/// computed once; UABS-side terms are recomputed per chromosome.
pub struct GaProblem {
    base: NetworkLayout,
    tiers: TierModels,
    fading: FadingField,
    mbs_terms: Vec<TierTerms>,
    uabs_tx_mw: f64,
    beta: f64,
    settings: RadioSettings,
}

impl GaProblem {
    /// `layout_base` fixes the MBSs, the UEs, the UABS count and altitudes.
    pub fn new(
        layout_base: &NetworkLayout,
        model: &PathLossModel,
        fading: FadingField,
        beta: f64,
        settings: RadioSettings,
    ) -> Result<Self> {
        if layout_base.ue.is_empty() {
            return Err(SimError::Empty("UE set"));
        }
        if layout_base.mbs.is_empty() && layout_base.uabs.is_empty() {
            return Err(SimError::NoStations);
        }
        if fading.dims() != (layout_base.n_ue(), layout_base.n_mbs(), layout_base.n_uabs()) {
            return Err(invalid("fading", "fading field does not match the base layout"));
        }
        settings.validate()?;
        let tiers = TierModels::for_layout(model, layout_base)?;
        let mbs_tx = dbm_to_mw(layout_base.mbs_eff_power_dbm);
        let mbs_terms = layout_base
            .ue
            .iter()
            .enumerate()
            .map(|(i, ue)| tier_terms(ue, &layout_base.mbs, mbs_tx, &tiers.mbs, fading.mbs_row(i)))
            .collect();
        Ok(Self {
            base: layout_base.clone(),
            tiers,
            fading,
            mbs_terms,
            uabs_tx_mw: dbm_to_mw(layout_base.uabs_eff_power_dbm),
            beta,
            settings,
        })
    }

    pub fn n_uabs(&self) -> usize {
        self.base.n_uabs()
    }

    pub fn base(&self) -> &NetworkLayout {
        &self.base
    }

    pub fn fading(&self) -> &FadingField {
        &self.fading
    }

    /// Link budgets of the decoded layout; identical to
    /// [`crate::radio::build_links`] on it.
    pub fn links(&self, chromosome: &Chromosome) -> Vec<LinkBudget> {
        let uabs = placed_uabs(chromosome, &self.base);
        self.base
            .ue
            .iter()
            .enumerate()
            .map(|(i, ue)| {
                let u = tier_terms(ue, &uabs, self.uabs_tx_mw, &self.tiers.uabs, self.fading.uabs_row(i));
                LinkBudget::from_terms(i, self.mbs_terms[i], u)
            })
            .collect()
    }

    pub fn report(&self, chromosome: &Chromosome) -> Result<SeReport> {
        if chromosome.n_uabs() != self.n_uabs() || !chromosome.uabs_xy.len().is_multiple_of(2) {
            return Err(invalid("chromosome", "UABS gene count does not match the base layout"));
        }
        let links = self.links(chromosome);
        evaluate_links(
            &links,
            self.base.n_mbs(),
            self.base.n_uabs(),
            &chromosome.params(self.beta),
            &self.settings,
        )
    }

    pub fn fitness(&self, chromosome: &Chromosome) -> Result<f64> {
        Ok(self.report(chromosome)?.fifth_percentile_se)
    }

    pub fn optimize(&self, cfg: &GaConfig, bounds: &GaBounds, initial: &[Chromosome]) -> Result<GaOutcome> {
        self.optimize_observed(cfg, bounds, initial, |_, _| {})
    }

    /// Runs the GA, calling `observe(generation, population)` once per
    /// generation. `initial` chromosomes (clamped to bounds) seed the first
    /// population; the rest is drawn uniformly.
    pub fn optimize_observed<F>(
        &self,
        cfg: &GaConfig,
        bounds: &GaBounds,
        initial: &[Chromosome],
        mut observe: F,
    ) -> Result<GaOutcome>
    where
        F: FnMut(usize, &[Chromosome]),
    {
        cfg.validate()?;
        bounds.validate()?;
        let n_uabs = self.n_uabs();
        let n_genes = 2 * n_uabs + 4;
        let mut rng = rng_from_seed(derive_seed(cfg.rng_seed, &[purpose::OPTIMIZER]));

        let mut population: Vec<Vec<f64>> = Vec::with_capacity(cfg.population_size);
        for c in initial.iter().take(cfg.population_size) {
            if c.len() != n_genes {
                return Err(invalid("initial", "seed chromosome has the wrong length"));
            }
            population.push(clamp_genes(&c.genes(), bounds, n_uabs));
        }
        while population.len() < cfg.population_size {
            population.push(Chromosome::random(n_uabs, bounds, &mut rng).genes());
        }

        let mut fitness = self.evaluate_all(&population)?;
        let mut evaluations = population.len();
        let mut best_idx = argmax(&fitness);
        let mut best = (population[best_idx].clone(), fitness[best_idx]);
        let mut history = vec![stats(1, best.1, &fitness)];
        observe(1, &decode_all(&population));

        for generation in 2..=cfg.generations {
            let mut order: Vec<usize> = (0..population.len()).collect();
            order.sort_by(|&a, &b| fitness[b].total_cmp(&fitness[a]).then(a.cmp(&b)));
            let mut next: Vec<Vec<f64>> = Vec::with_capacity(cfg.population_size);
            let mut next_fitness: Vec<Option<f64>> = Vec::with_capacity(cfg.population_size);
            for &e in order.iter().take(cfg.elitism_count) {
                next.push(population[e].clone());
                next_fitness.push(Some(fitness[e]));
            }

            let wheel = Roulette::new(&fitness);
            while next.len() < cfg.population_size {
                let p1 = &population[wheel.pick(&mut rng)];
                let p2 = &population[wheel.pick(&mut rng)];
                let (mut c1, mut c2) = if rng.random_bool(cfg.crossover_prob) {
                    arithmetic_crossover(p1, p2, bounds, n_uabs, &mut rng)
                } else {
                    (p1.clone(), p2.clone())
                };
                mutate(&mut c1, bounds, n_uabs, cfg.mutation_prob, &mut rng);
                mutate(&mut c2, bounds, n_uabs, cfg.mutation_prob, &mut rng);
                for child in [c1, c2] {
                    if next.len() < cfg.population_size {
                        next.push(child);
                        next_fitness.push(None);
                    }
                }
            }

            let fresh: Vec<usize> = (0..next.len()).filter(|&i| next_fitness[i].is_none()).collect();
            let scored: Vec<f64> = fresh
                .par_iter()
                .map(|&i| self.fitness(&Chromosome::from_genes(&next[i])?))
                .collect::<Result<_>>()?;
            evaluations += fresh.len();
            for (&i, f) in fresh.iter().zip(scored) {
                next_fitness[i] = Some(f);
            }
            population = next;
            fitness = next_fitness
                .into_iter()
                .map(|f| f.expect("every individual scored"))
                .collect();

            best_idx = argmax(&fitness);
            if fitness[best_idx] > best.1 {
                best = (population[best_idx].clone(), fitness[best_idx]);
            }
            history.push(stats(generation, best.1, &fitness));
            observe(generation, &decode_all(&population));
        }

        let best_chromosome = Chromosome::from_genes(&best.0)?;
        let best_report = self.report(&best_chromosome)?;
        Ok(GaOutcome {
            best: best_chromosome,
            best_fitness: best.1,
            best_report,
            history,
            evaluations,
        })
    }

    fn evaluate_all(&self, population: &[Vec<f64>]) -> Result<Vec<f64>> {
        population
            .par_iter()
            .map(|g| self.fitness(&Chromosome::from_genes(g)?))
            .collect()
    }
}

/// Convenience wrapper: draws the run's fading realization from the config
/// seed and optimizes from a random initial population.
pub fn ga_optimize(
    layout_base: &NetworkLayout,
    model: &PathLossModel,
    cfg: &GaConfig,
    bounds: &GaBounds,
    beta: f64,
    settings: &RadioSettings,
) -> Result<GaOutcome> {
    let mut rng = rng_from_seed(derive_seed(cfg.rng_seed, &[purpose::FADING]));
    let fading = FadingField::for_layout(&mut rng, layout_base);
    GaProblem::new(layout_base, model, fading, beta, *settings)?.optimize(cfg, bounds, &[])
}

fn decode_all(population: &[Vec<f64>]) -> Vec<Chromosome> {
    population
        .iter()
        .map(|g| Chromosome::from_genes(g).expect("population genes have valid length"))
        .collect()
}

fn argmax(values: &[f64]) -> usize {
    crate::hexopt::first_argmax(values.iter().copied()).expect("population is non-empty")
}

fn stats(generation: usize, best: f64, fitness: &[f64]) -> GenerationStats {
    GenerationStats {
        generation,
        best,
        mean: fitness.iter().sum::<f64>() / fitness.len() as f64,
    }
}

fn clamp_genes(genes: &[f64], bounds: &GaBounds, n_uabs: usize) -> Vec<f64> {
    genes
        .iter()
        .enumerate()
        .map(|(i, &g)| bounds.gene(i, n_uabs).clamp(g))
        .collect()
}

/// Fitness-proportional selection on `f − min + ε`.
struct Roulette {
    index: Option<WeightedIndex<f64>>,
    n: usize,
}

impl Roulette {
    fn new(fitness: &[f64]) -> Self {
        let min = fitness.iter().copied().fold(f64::INFINITY, f64::min);
        let weights = fitness.iter().map(|f| f - min + ROULETTE_EPS);
        Self {
            index: WeightedIndex::new(weights).ok(),
            n: fitness.len(),
        }
    }

    fn pick<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        match &self.index {
            Some(w) => w.sample(rng),
            None => rng.random_range(0..self.n),
        }
    }
}

fn arithmetic_crossover<R: Rng + ?Sized>(
    p1: &[f64],
    p2: &[f64],
    bounds: &GaBounds,
    n_uabs: usize,
    rng: &mut R,
) -> (Vec<f64>, Vec<f64>) {
    let mut c1 = Vec::with_capacity(p1.len());
    let mut c2 = Vec::with_capacity(p1.len());
    for (i, (&a, &b)) in p1.iter().zip(p2).enumerate() {
        let lambda: f64 = rng.random();
        if a == b {
            c1.push(a);
            c2.push(b);
            continue;
        }
        let iv = bounds.gene(i, n_uabs);
        c1.push(iv.clamp(lambda * a + (1.0 - lambda) * b));
        c2.push(iv.clamp((1.0 - lambda) * a + lambda * b));
    }
    (c1, c2)
}

fn mutate<R: Rng + ?Sized>(genes: &mut [f64], bounds: &GaBounds, n_uabs: usize, pm: f64, rng: &mut R) {
    for (i, g) in genes.iter_mut().enumerate() {
        if rng.random_bool(pm) {
            *g = bounds.gene(i, n_uabs).sample(rng);
        }
    }
}
