use super::{db_to_linear, IcicParams, LinkBudget, SirSet, Station, UeAllocation, UeClass};

/// `num / den` with the conventions `0 / x = 0` and `x / 0 = +∞` for `x > 0`.
#[inline]
fn ratio(num: f64, den: f64) -> f64 {
    if num == 0.0 {
        0.0
    } else if den == 0.0 {
        f64::INFINITY
    } else {
        num / den
    }
}

pub fn sir_set(link: &LinkBudget, alpha: f64) -> SirSet {
    let s_m = link.s_mbs_mw;
    let s_u = link.s_uabs_mw;
    let z_usf = link.z_usf_mw();
    let z_csf = link.z_csf_mw(alpha);
    SirSet {
        gamma: ratio(s_m, s_u + z_usf),
        gamma_csf: ratio(alpha * s_m, s_u + z_csf),
        gamma_prime: ratio(s_u, s_m + z_usf),
        gamma_prime_csf: ratio(s_u, alpha * s_m + z_csf),
    }
}

/// τ, ρ and ρ′ converted to linear scale once per parameter set.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Thresholds {
    pub tau: f64,
    pub rho: f64,
    pub rho_prime: f64,
}

impl From<&IcicParams> for Thresholds {
    fn from(p: &IcicParams) -> Self {
        Self {
            tau: db_to_linear(p.tau_db),
            rho: db_to_linear(p.rho_db),
            rho_prime: db_to_linear(p.rho_prime_db),
        }
    }
}

impl Thresholds {
    /// Cell selection then subframe scheduling. The tie `Γ = τΓ′` goes to
    /// the UOI.
    #[inline]
    pub fn classify(&self, s: &SirSet) -> UeClass {
        if s.gamma > self.tau * s.gamma_prime {
            self.schedule_mue(s)
        } else {
            self.schedule_uue(s)
        }
    }

    #[inline]
    fn schedule_mue(&self, s: &SirSet) -> UeClass {
        if s.gamma <= self.rho {
            UeClass::UsfMue
        } else {
            UeClass::CsfMue
        }
    }

    #[inline]
    fn schedule_uue(&self, s: &SirSet) -> UeClass {
        if s.gamma_prime > self.rho_prime {
            UeClass::UsfUue
        } else {
            UeClass::CsfUue
        }
    }
}

pub fn associate_and_schedule(sirs: &SirSet, params: &IcicParams) -> UeClass {
    Thresholds::from(params).classify(sirs)
}

/// Full allocation of one UE. When the selected tier has no station at all
/// (every MBS destroyed, or no UABS deployed) the UE falls back to the
/// other tier and is scheduled by that tier's threshold.
pub fn allocate(link: &LinkBudget, alpha: f64, thresholds: &Thresholds) -> UeAllocation {
    let sirs = sir_set(link, alpha);
    let mut class = thresholds.classify(&sirs);
    let serving = match (class.is_mue(), link.moi_index, link.uoi_index) {
        (true, Some(m), _) => Station::Mbs(m),
        (false, _, Some(u)) => Station::Uabs(u),
        (true, None, Some(u)) => {
            class = thresholds.schedule_uue(&sirs);
            Station::Uabs(u)
        }
        (false, Some(m), None) => {
            class = thresholds.schedule_mue(&sirs);
            Station::Mbs(m)
        }
        (_, None, None) => unreachable!("link budgets are only built for layouts with stations"),
    };
    UeAllocation {
        ue_index: link.ue_index,
        class,
        serving,
        sirs,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::radio::DEFAULT_BETA;

    fn sirs_db(g: f64, gp: f64) -> SirSet {
        SirSet {
            gamma: db_to_linear(g),
            gamma_csf: 0.0,
            gamma_prime: db_to_linear(gp),
            gamma_prime_csf: 0.0,
        }
    }

    fn params(tau: f64, rho: f64, rho_p: f64) -> IcicParams {
        IcicParams::new(tau, 0.5, rho, rho_p, DEFAULT_BETA).unwrap()
    }

    fn link(s_m: f64, s_u: f64, z_m: f64, z_u: f64) -> LinkBudget {
        LinkBudget {
            ue_index: 0,
            moi_index: Some(0),
            uoi_index: Some(0),
            s_mbs_mw: s_m,
            s_uabs_mw: s_u,
            z_mbs_mw: z_m,
            z_uabs_mw: z_u,
        }
    }

    #[test]
    fn classification_examples() {
        assert_eq!(
            associate_and_schedule(&sirs_db(10.0, 0.0), &params(6.0, 20.0, -10.0)),
            UeClass::UsfMue
        );
        assert_eq!(
            associate_and_schedule(&sirs_db(30.0, 0.0), &params(6.0, 20.0, -10.0)),
            UeClass::CsfMue
        );
        assert_eq!(
            associate_and_schedule(&sirs_db(0.0, 0.0), &params(3.0, 20.0, -5.0)),
            UeClass::UsfUue
        );
        assert_eq!(
            associate_and_schedule(&sirs_db(0.0, -10.0), &params(12.0, 20.0, -5.0)),
            UeClass::CsfUue
        );
    }

    #[test]
    fn tie_goes_to_uoi() {
        let s = SirSet {
            gamma: 2.0,
            gamma_csf: 0.0,
            gamma_prime: 2.0,
            gamma_prime_csf: 0.0,
        };
        assert!(!associate_and_schedule(&s, &params(0.0, 20.0, -10.0)).is_mue());
    }

    #[test]
    fn symmetric_powers_give_unit_sir() {
        let s = sir_set(&link(1e-9, 1e-9, 0.0, 0.0), 0.5);
        assert_eq!(s.gamma, 1.0);
        assert_eq!(s.gamma_prime, 1.0);
    }

    #[test]
    fn alpha_zero_and_one() {
        let lb = link(4e-9, 1e-9, 2e-9, 0.5e-9);
        let s0 = sir_set(&lb, 0.0);
        assert_eq!(s0.gamma_csf, 0.0);
        assert_eq!(s0.gamma_prime_csf, lb.s_uabs_mw / lb.z_csf_mw(0.0));
        let s1 = sir_set(&lb, 1.0);
        assert_eq!(s1.gamma_csf, s1.gamma);
        assert_eq!(s1.gamma_prime_csf, s1.gamma_prime);
    }

    #[test]
    fn zero_denominators() {
        let s = sir_set(&link(1e-9, 0.0, 0.0, 0.0), 1.0);
        assert_eq!(s.gamma, f64::INFINITY);
        assert_eq!(s.gamma_prime, 0.0);
        let s = sir_set(&link(0.0, 0.0, 0.0, 0.0), 1.0);
        assert_eq!(
            (s.gamma, s.gamma_csf, s.gamma_prime, s.gamma_prime_csf),
            (0.0, 0.0, 0.0, 0.0)
        );
    }

    #[test]
    fn fallback_to_the_only_tier() {
        let thr = Thresholds::from(&params(0.0, 20.0, -10.0));
        // No UABS: a UE with no MBS signal would select the UOI side.
        let lb = LinkBudget {
            uoi_index: None,
            ..link(0.0, 0.0, 1e-9, 0.0)
        };
        let a = allocate(&lb, 0.5, &thr);
        assert_eq!(a.serving, Station::Mbs(0));
        assert!(a.class.is_mue());
        // No MBS.
        let lb = LinkBudget {
            moi_index: None,
            ..link(0.0, 1e-9, 0.0, 0.0)
        };
        let a = allocate(&lb, 0.5, &thr);
        assert_eq!(a.serving, Station::Uabs(0));
        assert_eq!(a.class, UeClass::UsfUue);
    }
}
