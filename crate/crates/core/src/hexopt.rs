//! Exhaustive ICIC parameter search for a fixed (hexagonal) UABS deployment.
//!
//! Every grid point is scored against the same fading realization, so the
//! points of one drop differ only by their parameters.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result, SimError};
use crate::propagation::PathLossModel;
use crate::radio::{
    build_links, evaluate_links, FadingField, IcicMode, IcicParams, LinkBudget, RadioSettings, SeReport,
};
use crate::scenario::NetworkLayout;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IcicGrid {
    pub tau_values_db: Vec<f64>,
    pub alpha_values: Vec<f64>,
    #[serde(with = "inf_vec")]
    pub rho_values_db: Vec<f64>,
    #[serde(with = "inf_vec")]
    pub rho_prime_values_db: Vec<f64>,
}

impl Default for IcicGrid {
    /// 6 × 5 × 5 × 4 = 600 points spanning the usual parameter ranges.
    fn default() -> Self {
        Self {
            tau_values_db: vec![0.0, 3.0, 6.0, 9.0, 12.0, 15.0],
            alpha_values: vec![0.0, 0.25, 0.5, 0.75, 1.0],
            rho_values_db: vec![20.0, 25.0, 30.0, 35.0, 40.0],
            rho_prime_values_db: vec![-20.0, -15.0, -10.0, -5.0],
        }
    }
}

impl IcicGrid {
    /// Restricts the grid to a mode: eICIC pins α = 0; no-ICIC pins α = 1
    /// and collapses both thresholds so every UE is scheduled in USF.
    pub fn for_mode(&self, mode: IcicMode) -> Self {
        match mode {
            IcicMode::Feicic => self.clone(),
            IcicMode::Eicic => Self {
                alpha_values: vec![0.0],
                ..self.clone()
            },
            IcicMode::None => Self {
                tau_values_db: self.tau_values_db.clone(),
                alpha_values: vec![1.0],
                rho_values_db: vec![f64::INFINITY],
                rho_prime_values_db: vec![f64::NEG_INFINITY],
            },
        }
    }

    pub fn with_tau(&self, tau_values_db: Vec<f64>) -> Self {
        Self {
            tau_values_db,
            ..self.clone()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let lists = [
            ("tau_values_db", &self.tau_values_db),
            ("alpha_values", &self.alpha_values),
            ("rho_values_db", &self.rho_values_db),
            ("rho_prime_values_db", &self.rho_prime_values_db),
        ];
        for (name, values) in lists {
            if values.is_empty() {
                return Err(invalid(name, "grid axis is empty"));
            }
            if values.iter().any(|v| v.is_nan()) {
                return Err(invalid(name, "grid axis contains NaN"));
            }
        }
        if self.tau_values_db.iter().any(|t| !t.is_finite()) {
            return Err(invalid("tau_values_db", "CRE bias must be finite"));
        }
        if self.alpha_values.iter().any(|a| !(0.0..=1.0).contains(a)) {
            return Err(invalid("alpha_values", "alpha must lie in [0, 1]"));
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.tau_values_db.len() * self.alpha_values.len() * self.rho_values_db.len() * self.rho_prime_values_db.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Points in lexicographic (τ, α, ρ, ρ′) order.
    pub fn points(&self, beta: f64) -> Vec<IcicParams> {
        let mut out = Vec::with_capacity(self.len());
        for &tau_db in &self.tau_values_db {
            for &alpha in &self.alpha_values {
                for &rho_db in &self.rho_values_db {
                    for &rho_prime_db in &self.rho_prime_values_db {
                        out.push(IcicParams {
                            tau_db,
                            alpha,
                            rho_db,
                            rho_prime_db,
                            beta,
                        });
                    }
                }
            }
        }
        out
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridPoint {
    pub params: IcicParams,
    pub fifth_pse: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct GridSearchResult {
    pub best_params: IcicParams,
    pub best_report: SeReport,
    /// Every evaluated point, in grid order.
    pub points: Vec<GridPoint>,
}

/// Index of the first maximum.
pub(crate) fn first_argmax(values: impl IntoIterator<Item = f64>) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for (i, v) in values.into_iter().enumerate() {
        if best.is_none_or(|(_, b)| v > b) {
            best = Some((i, v));
        }
    }
    best.map(|(i, _)| i)
}

/// Scores every grid point against fixed link budgets.
pub fn score_grid(
    links: &[LinkBudget],
    n_mbs: usize,
    n_uabs: usize,
    grid: &IcicGrid,
    beta: f64,
    settings: &RadioSettings,
) -> Result<Vec<GridPoint>> {
    grid.validate()?;
    grid.points(beta)
        .into_par_iter()
        .map(|params| {
            let report = evaluate_links(links, n_mbs, n_uabs, &params, settings)?;
            Ok(GridPoint {
                params,
                fifth_pse: report.fifth_percentile_se,
            })
        })
        .collect()
}

/// Grid search over precomputed link budgets.
pub fn grid_search_links(
    links: &[LinkBudget],
    n_mbs: usize,
    n_uabs: usize,
    grid: &IcicGrid,
    beta: f64,
    settings: &RadioSettings,
) -> Result<GridSearchResult> {
    let points = score_grid(links, n_mbs, n_uabs, grid, beta, settings)?;
    let best = first_argmax(points.iter().map(|p| p.fifth_pse)).ok_or(SimError::Empty("ICIC grid"))?;
    let best_params = points[best].params;
    let best_report = evaluate_links(links, n_mbs, n_uabs, &best_params, settings)?;
    Ok(GridSearchResult {
        best_params,
        best_report,
        points,
    })
}

/// Grid search with an explicit fading realization.
pub fn grid_search_with_fading(
    layout: &NetworkLayout,
    model: &PathLossModel,
    grid: &IcicGrid,
    beta: f64,
    settings: &RadioSettings,
    fading: &FadingField,
) -> Result<GridSearchResult> {
    let links = build_links(layout, model, fading)?;
    grid_search_links(&links, layout.n_mbs(), layout.n_uabs(), grid, beta, settings)
}

/// Draws one fading realization from `rng` and returns the best grid point.
/// Ties are broken by grid order.
pub fn grid_search_icic<R: Rng + ?Sized>(
    layout: &NetworkLayout,
    model: &PathLossModel,
    grid: &IcicGrid,
    beta: f64,
    settings: &RadioSettings,
    rng: &mut R,
) -> Result<GridSearchResult> {
    grid.validate()?;
    let fading = FadingField::for_layout(rng, layout);
    grid_search_with_fading(layout, model, grid, beta, settings, &fading)
}

mod inf_vec {
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    #[derive(Serialize, Deserialize)]
    struct F(#[serde(with = "crate::serde_f64")] f64);

    pub fn serialize<S: Serializer>(v: &[f64], s: S) -> Result<S::Ok, S::Error> {
        v.iter().map(|&x| F(x)).collect::<Vec<_>>().serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<f64>, D::Error> {
        Ok(Vec::<F>::deserialize(d)?.into_iter().map(|f| f.0).collect())
    }
}
