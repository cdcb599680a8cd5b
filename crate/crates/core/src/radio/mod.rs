//! Downlink radio model: link budgets, USF/CSF SIRs, CRE-biased cell
//! selection with threshold scheduling, per-UE spectral efficiency and the
//! 5th-percentile objective.

mod capacity;
mod link;
mod schedule;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

pub use capacity::{
    evaluate_5pse, evaluate_links, fifth_percentile_index, fifth_percentile_se, per_ue_se, CellLoad, CellLoads,
    RadioSettings, SeReport,
};
pub use link::{build_links, compute_link_budget, tier_terms, FadingField, LinkBudget, TierTerms};
pub use schedule::{allocate, associate_and_schedule, sir_set, Thresholds};

/// USF duty cycle used throughout.
pub const DEFAULT_BETA: f64 = 0.5;

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

pub fn linear_to_db(lin: f64) -> f64 {
    10.0 * lin.log10()
}

/// Network-wide ICIC settings shared by every MBS and every UABS.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IcicParams {
    /// Cell range expansion bias, dB.
    pub tau_db: f64,
    /// MBS power-reduction factor in coordinated subframes.
    pub alpha: f64,
    /// MUE scheduling threshold, dB.
    #[serde(with = "crate::serde_f64")]
    pub rho_db: f64,
    /// UUE scheduling threshold, dB.
    #[serde(with = "crate::serde_f64")]
    pub rho_prime_db: f64,
    /// USF duty cycle.
    pub beta: f64,
}

impl IcicParams {
    pub fn new(tau_db: f64, alpha: f64, rho_db: f64, rho_prime_db: f64, beta: f64) -> Result<Self> {
        let p = Self {
            tau_db,
            alpha,
            rho_db,
            rho_prime_db,
            beta,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !self.tau_db.is_finite() {
            return Err(invalid("tau_db", format!("must be finite, got {}", self.tau_db)));
        }
        if !(0.0..=1.0).contains(&self.alpha) {
            return Err(invalid("alpha", format!("must lie in [0, 1], got {}", self.alpha)));
        }
        if !(self.beta > 0.0 && self.beta < 1.0) {
            return Err(invalid("beta", format!("must lie in (0, 1), got {}", self.beta)));
        }
        if self.rho_db.is_nan() || self.rho_prime_db.is_nan() {
            return Err(invalid("rho", "scheduling thresholds must not be NaN"));
        }
        Ok(())
    }
}

/// Interference-coordination flavour. `None` and `Eicic` are restrictions
/// of the general reduced-power scheme, so all three share one code path.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum IcicMode {
    /// Every station always at full power; every UE scheduled in USF.
    None,
    /// Almost-blank subframes: α pinned to 0.
    Eicic,
    /// Reduced-power subframes: α free in [0, 1].
    Feicic,
}

impl IcicMode {
    pub const ALL: [IcicMode; 3] = [IcicMode::None, IcicMode::Eicic, IcicMode::Feicic];

    pub fn as_str(&self) -> &'static str {
        match self {
            IcicMode::None => "none",
            IcicMode::Eicic => "eicic",
            IcicMode::Feicic => "feicic",
        }
    }

    /// Projects arbitrary parameters onto this mode.
    pub fn constrain(&self, p: IcicParams) -> IcicParams {
        match self {
            IcicMode::None => IcicParams {
                alpha: 1.0,
                rho_db: f64::INFINITY,
                rho_prime_db: f64::NEG_INFINITY,
                ..p
            },
            IcicMode::Eicic => IcicParams { alpha: 0.0, ..p },
            IcicMode::Feicic => p,
        }
    }
}

impl std::str::FromStr for IcicMode {
    type Err = crate::SimError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "none" | "nim" | "no-icic" => Ok(IcicMode::None),
            "eicic" => Ok(IcicMode::Eicic),
            "feicic" => Ok(IcicMode::Feicic),
            other => Err(invalid("icic_mode", format!("unknown mode {other:?}"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum UeClass {
    #[serde(rename = "usf-mue")]
    UsfMue,
    #[serde(rename = "csf-mue")]
    CsfMue,
    #[serde(rename = "usf-uue")]
    UsfUue,
    #[serde(rename = "csf-uue")]
    CsfUue,
}

impl UeClass {
    pub fn as_str(&self) -> &'static str {
        match self {
            UeClass::UsfMue => "usf-mue",
            UeClass::CsfMue => "csf-mue",
            UeClass::UsfUue => "usf-uue",
            UeClass::CsfUue => "csf-uue",
        }
    }

    pub fn is_mue(&self) -> bool {
        matches!(self, UeClass::UsfMue | UeClass::CsfMue)
    }

    pub fn is_usf(&self) -> bool {
        matches!(self, UeClass::UsfMue | UeClass::UsfUue)
    }
}

/// Linear SIRs seen by one UE from its MOI and UOI in both subframe types.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SirSet {
    #[serde(with = "crate::serde_f64")]
    pub gamma: f64,
    #[serde(with = "crate::serde_f64")]
    pub gamma_csf: f64,
    #[serde(with = "crate::serde_f64")]
    pub gamma_prime: f64,
    #[serde(with = "crate::serde_f64")]
    pub gamma_prime_csf: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "tier", content = "index", rename_all = "lowercase")]
pub enum Station {
    Mbs(usize),
    Uabs(usize),
}

impl std::fmt::Display for Station {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Station::Mbs(i) => write!(f, "mbs:{i}"),
            Station::Uabs(i) => write!(f, "uabs:{i}"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct UeAllocation {
    pub ue_index: usize,
    pub class: UeClass,
    pub serving: Station,
    pub sirs: SirSet,
}

impl UeAllocation {
    /// The SIR that determines this UE's rate.
    pub fn effective_sir(&self) -> f64 {
        match self.class {
            UeClass::UsfMue => self.sirs.gamma,
            UeClass::CsfMue => self.sirs.gamma_csf,
            UeClass::UsfUue => self.sirs.gamma_prime,
            UeClass::CsfUue => self.sirs.gamma_prime_csf,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn params_validation() {
        assert!(IcicParams::new(6.0, 0.5, 30.0, -10.0, 0.5).is_ok());
        assert!(IcicParams::new(6.0, 1.5, 30.0, -10.0, 0.5).is_err());
        assert!(IcicParams::new(6.0, 0.5, 30.0, -10.0, 1.0).is_err());
        assert!(IcicParams::new(f64::NAN, 0.5, 30.0, -10.0, 0.5).is_err());
    }

    #[test]
    fn mode_projection() {
        let p = IcicParams::new(6.0, 0.4, 30.0, -10.0, 0.5).unwrap();
        assert_eq!(IcicMode::Feicic.constrain(p), p);
        assert_eq!(IcicMode::Eicic.constrain(p).alpha, 0.0);
        let none = IcicMode::None.constrain(p);
        assert_eq!((none.alpha, none.tau_db), (1.0, 6.0));
        assert_eq!(none.rho_db, f64::INFINITY);
        assert!("FeICIC".parse::<IcicMode>().is_ok());
        assert!("x".parse::<IcicMode>().is_err());
    }

    #[test]
    fn params_json_round_trip_with_infinite_thresholds() {
        let p = IcicMode::None.constrain(IcicParams::new(3.0, 0.0, 20.0, -5.0, 0.5).unwrap());
        let s = serde_json::to_string(&p).unwrap();
        assert_eq!(serde_json::from_str::<IcicParams>(&s).unwrap(), p);
    }
}
