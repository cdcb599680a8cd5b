use proptest::prelude::*;
use uabs_hetnet::propagation::PathLossModel;
use uabs_hetnet::radio::{
    associate_and_schedule, build_links, evaluate_5pse, evaluate_links, fifth_percentile_se, FadingField, IcicParams,
    RadioSettings, SirSet, UeClass, DEFAULT_BETA,
};
use uabs_hetnet::scenario::{destroy_mbs, destroyed_count, hex_grid_positions, NetworkLayout, Point3, SimRegion};
use uabs_hetnet::seed::rng_from_seed;

fn sir() -> impl Strategy<Value = f64> {
    prop_oneof![
        Just(0.0),
        Just(f64::INFINITY),
        (-60.0..60.0f64).prop_map(|db| 10f64.powf(db / 10.0))
    ]
}

fn params() -> impl Strategy<Value = IcicParams> {
    (0.0..15.0f64, 0.0..=1.0f64, 20.0..40.0f64, -20.0..-5.0f64)
        .prop_map(|(t, a, r, rp)| IcicParams::new(t, a, r, rp, DEFAULT_BETA).unwrap())
}

fn layout() -> impl Strategy<Value = NetworkLayout> {
    let pt = |z: f64| (0.0..2.0f64, 0.0..2.0f64).prop_map(move |(x, y)| Point3::new(x, y, z));
    (
        prop::collection::vec(pt(30.0), 0..5),
        prop::collection::vec(pt(100.0), 0..4),
        prop::collection::vec(pt(3.0), 1..40),
    )
        .prop_filter("needs a station", |(m, u, _)| !m.is_empty() || !u.is_empty())
        .prop_map(|(mbs, uabs, ue)| NetworkLayout {
            mbs,
            uabs,
            ue,
            mbs_eff_power_dbm: 46.0,
            uabs_eff_power_dbm: 30.0,
        })
}

proptest! {
    #[test]
    fn classification_matches_predicates(g in sir(), gc in sir(), gp in sir(), gpc in sir(), p in params()) {
        let s = SirSet { gamma: g, gamma_csf: gc, gamma_prime: gp, gamma_prime_csf: gpc };
        let class = associate_and_schedule(&s, &p);
        let tau = 10f64.powf(p.tau_db / 10.0);
        let mue = g > tau * gp;
        prop_assert_eq!(class.is_mue(), mue);
        let usf = if mue { g <= 10f64.powf(p.rho_db / 10.0) } else { gp > 10f64.powf(p.rho_prime_db / 10.0) };
        prop_assert_eq!(class.is_usf(), usf);
    }

    #[test]
    fn loads_sum_to_ue_count(l in layout(), p in params(), seed in any::<u64>()) {
        let r = evaluate_5pse(&l, &PathLossModel::splm(4.0), &p, &RadioSettings::default(), &mut rng_from_seed(seed)).unwrap();
        prop_assert_eq!(r.cell_loads.total(), l.n_ue() as u64);
        prop_assert_eq!(r.per_ue_se.len(), l.n_ue());
        prop_assert!(r.per_ue_se.iter().all(|v| v.is_finite() && *v >= 0.0));
    }

    #[test]
    fn evaluation_is_pure(l in layout(), p in params(), seed in any::<u64>()) {
        let m = PathLossModel::ohplm(763.0);
        let s = RadioSettings::default();
        let a = evaluate_5pse(&l, &m, &p, &s, &mut rng_from_seed(seed)).unwrap();
        let b = evaluate_5pse(&l, &m, &p, &s, &mut rng_from_seed(seed)).unwrap();
        prop_assert_eq!(a, b);
    }

    #[test]
    fn uue_count_monotone_in_tau(l in layout(), p in params(), dt in 0.0..10.0f64, seed in any::<u64>()) {
        let m = PathLossModel::splm(4.0);
        let fading = FadingField::for_layout(&mut rng_from_seed(seed), &l);
        let links = build_links(&l, &m, &fading).unwrap();
        let s = RadioSettings::default();
        let q = IcicParams { tau_db: p.tau_db + dt, ..p };
        let lo = evaluate_links(&links, l.n_mbs(), l.n_uabs(), &p, &s).unwrap();
        let hi = evaluate_links(&links, l.n_mbs(), l.n_uabs(), &q, &s).unwrap();
        prop_assert!(hi.uue_count() >= lo.uue_count());
    }

    #[test]
    fn fifth_percentile_is_order_statistic(v in prop::collection::vec(-1e3..1e3f64, 1..=8)) {
        let got = fifth_percentile_se(&v).unwrap();
        // For N <= 20 the rank is 1, so the value is the minimum.
        let min = v.iter().copied().fold(f64::INFINITY, f64::min);
        prop_assert_eq!(got, min);
        let mut rev = v.clone();
        rev.reverse();
        prop_assert_eq!(fifth_percentile_se(&rev).unwrap(), got);
    }

    #[test]
    fn fifth_percentile_rank_for_any_length(v in prop::collection::vec(0.0..1.0f64, 1..300)) {
        let mut sorted = v.clone();
        sorted.sort_by(f64::total_cmp);
        let k = (v.len() * 5).div_ceil(100);
        prop_assert_eq!(fifth_percentile_se(&v).unwrap(), sorted[k.max(1) - 1]);
    }

    #[test]
    fn destruction_composes(n in 0usize..200, f1 in 0.0..=1.0f64, f2 in 0.0..=1.0f64, s1 in any::<u64>(), s2 in any::<u64>()) {
        let l = NetworkLayout {
            mbs: (0..n).map(|i| Point3::new(i as f64, 0.0, 30.0)).collect(),
            uabs: vec![],
            ue: vec![Point3::new(0.5, 0.5, 3.0)],
            mbs_eff_power_dbm: 46.0,
            uabs_eff_power_dbm: 30.0,
        };
        let once = destroy_mbs(&l, f1, s1).unwrap();
        prop_assert_eq!(once.n_mbs(), n - destroyed_count(n, f1));
        let twice = destroy_mbs(&once, f2, s2).unwrap();
        let left = once.n_mbs();
        prop_assert_eq!(twice.n_mbs(), left - destroyed_count(left, f2));
        prop_assert!(twice.mbs.iter().all(|p| l.mbs.contains(p)));
        prop_assert_eq!(&twice.ue, &l.ue);
    }

    #[test]
    fn hex_grid_is_centred_and_inside(n in 1usize..40, w in 1.0..20.0f64, h in 1.0..20.0f64) {
        let region = SimRegion::new(w, h).unwrap();
        let Ok(a) = hex_grid_positions(n, &region, 100.0) else { return Ok(()); };
        prop_assert_eq!(a.len(), n);
        prop_assert!(a.iter().all(|p| region.contains(p.x_km, p.y_km) && p.z_m == 100.0));
        // Spacing depends only on the region size, never on its offset.
        for pair in a.windows(2).filter(|p| p[0].y_km == p[1].y_km) {
            let pitch = (w * h / n as f64).sqrt();
            prop_assert!((pair[1].x_km - pair[0].x_km - pitch).abs() < 1e-9);
        }
        let (x0, x1) = a.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), p| (lo.min(p.x_km), hi.max(p.x_km)));
        let (y0, y1) = a.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), p| (lo.min(p.y_km), hi.max(p.y_km)));
        prop_assert!(((x0 + x1) / 2.0 - w / 2.0).abs() < 1e-9);
        prop_assert!(((y0 + y1) / 2.0 - h / 2.0).abs() < 1e-9);
    }
}

#[test]
fn association_is_total_on_many_random_sirs() {
    use rand::Rng;
    let mut rng = rng_from_seed(77);
    let mut counts = [0usize; 4];
    for _ in 0..100_000 {
        let mut draw = || 10f64.powf(rng.random_range(-40.0..40.0) / 10.0);
        let s = SirSet {
            gamma: draw(),
            gamma_csf: draw(),
            gamma_prime: draw(),
            gamma_prime_csf: draw(),
        };
        let p = IcicParams::new(6.0, 0.5, 30.0, -10.0, DEFAULT_BETA).unwrap();
        let c = associate_and_schedule(&s, &p);
        counts[match c {
            UeClass::UsfMue => 0,
            UeClass::CsfMue => 1,
            UeClass::UsfUue => 2,
            UeClass::CsfUue => 3,
        }] += 1;
    }
    assert_eq!(counts.iter().sum::<usize>(), 100_000);
    assert!(counts.iter().all(|&c| c > 0));
}

#[test]
fn fading_sample_mean_is_one() {
    let f = FadingField::draw(&mut rng_from_seed(8), 1000, 1000, 0);
    let mean = (0..1000).flat_map(|i| f.mbs_row(i).to_vec()).sum::<f64>() / 1e6;
    assert!((0.99..=1.01).contains(&mean), "mean {mean}");
}

#[test]
fn poisson_counts_have_the_right_mean() {
    use uabs_hetnet::scenario::{generate_ppp_layout, ScenarioConfig};
    let n = 200;
    let (mut m, mut u) = (0usize, 0usize);
    for seed in 0..n {
        let cfg = ScenarioConfig {
            region: SimRegion::new(2.0, 2.0).unwrap(),
            n_uabs: 0,
            rng_seed: seed,
            ..ScenarioConfig::default()
        };
        let l = generate_ppp_layout(&cfg).unwrap();
        m += l.n_mbs();
        u += l.n_ue();
    }
    // Means 16 and 400; 5 standard errors of the sample mean.
    let mm = m as f64 / n as f64;
    let mu = u as f64 / n as f64;
    assert!((mm - 16.0).abs() < 5.0 * (16.0f64 / n as f64).sqrt(), "{mm}");
    assert!((mu - 400.0).abs() < 5.0 * (400.0f64 / n as f64).sqrt(), "{mu}");
}
