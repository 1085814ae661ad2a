use linkcalc::channel::{
    fisher_f_normalized, los_probability, sr_path_loss, FisherFParams, LinkBudget, QosSpec,
    ShadowedRicianParams,
};
use linkcalc::fitting::{fit_model, synthesize_envelope, FitModel, FitOptions, FitParams};
use linkcalc::mcsim::{sample_end_to_end, sample_fisher_f_power, SimConfig};
use linkcalc::metrics::{
    effective_capacity, eps_outage_capacity, ergodic_capacity, rescale_gbar, EPS_RESIDUAL_TOL,
};
use linkcalc::quad::{integrate_half_line, HalfLine, QuadConfig};
use linkcalc::snr::{LinkKind, SnrDistribution};
use linkcalc::specfun::{
    gamma, kummer_1f1_finite, ln_gamma, meijer_g, reg_lower_inc_gamma, reg_upper_inc_gamma,
    EvalPolicy, MeijerGSpec,
};
use proptest::prelude::*;

fn cheap() -> ProptestConfig {
    ProptestConfig {
        cases: 24,
        ..ProptestConfig::default()
    }
}

fn relay(kind: LinkKind, gbar: f64, lambda: f64, m: f64, m_s: f64) -> SnrDistribution {
    let sr = ShadowedRicianParams::from_physical(0.25, 2, 0.5).unwrap();
    let ru = FisherFParams::normalized(m, m_s).unwrap();
    SnrDistribution::new(kind, sr, ru, gbar, lambda * gbar, 1.0).unwrap()
}

fn kummer_series(g: u32, z: f64) -> f64 {
    // 1F1(g; 1; z)
    let (mut term, mut sum) = (1.0f64, 1.0f64);
    for k in 0..400u32 {
        let k = k as f64;
        term *= (g as f64 + k) * z / ((k + 1.0) * (k + 1.0));
        sum += term;
        if term.abs() < 1e-18 * sum.abs() {
            break;
        }
    }
    sum
}

proptest! {
    #[test]
    fn gamma_recurrence(x in 0.1f64..50.0) {
        let lhs = ln_gamma(x + 1.0).unwrap();
        let rhs = ln_gamma(x).unwrap() + x.ln();
        prop_assert!((lhs - rhs).abs() <= 1e-12 * lhs.abs().max(1.0));
    }

    #[test]
    fn incomplete_gamma_partition(a in 0.2f64..10.0, x in 0.0f64..20.0) {
        let p = reg_lower_inc_gamma(a, x).unwrap();
        let q = reg_upper_inc_gamma(a, x).unwrap();
        prop_assert!((p + q - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn meijer_g1111_closed_form(beta in 0.1f64..6.0, x in 0.01f64..50.0) {
        let spec = MeijerGSpec::new(1, 1, &[1.0 - beta], &[0.0]).unwrap();
        let g = meijer_g(&spec, x, &EvalPolicy::default()).unwrap();
        let want = gamma(beta).unwrap() * (1.0 + x).powf(-beta);
        prop_assert!((g - want).abs() <= 1e-9 * want.abs(), "{g} vs {want}");
    }

    #[test]
    fn kummer_finite_matches_series(g in prop::sample::select(vec![1u32, 2, 3, 5]), z in -5.0f64..5.0) {
        let got = kummer_1f1_finite(g, z).unwrap();
        let want = kummer_series(g, z);
        prop_assert!((got - want).abs() <= 1e-10 * want.abs().max(1.0), "{got} vs {want}");
    }

    #[test]
    fn normalized_fisher_f_has_unit_power(m in 0.1f64..20.0, m_s in 1.01f64..50.0) {
        let p = fisher_f_normalized(m, m_s).unwrap();
        prop_assert!((p.omega_m() * p.omega_s() - 1.0).abs() <= 1e-12);
        prop_assert!((p.mean_power() - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn los_probability_increases_with_elevation(t in 1.0f64..89.0, dt in 0.01f64..1.0) {
        let lo = los_probability(t, 4.88, 0.43).unwrap();
        let hi = los_probability(t + dt, 4.88, 0.43).unwrap();
        prop_assert!(hi >= lo);
        prop_assert!((0.0..=1.0).contains(&lo));
    }

    #[test]
    fn sr_path_loss_scales_with_distance(d in 1e3f64..2e6, alpha in 1.5f64..4.0) {
        let base = LinkBudget { alpha_p: alpha, ..LinkBudget::default() };
        let k = sr_path_loss(&LinkBudget { d_sr: 1.0, ..base.clone() }).unwrap();
        let pl = sr_path_loss(&LinkBudget { d_sr: d, ..base }).unwrap();
        prop_assert!((pl * d.powf(alpha) / k - 1.0).abs() <= 1e-12);
    }
}

#[test]
fn sr_pdf_integrates_to_one() {
    for g in [1u32, 2, 5] {
        let sr = ShadowedRicianParams::from_physical(0.25, g, 0.5).unwrap();
        let dist = SnrDistribution::sr(sr, 10.0).unwrap();
        let layout = HalfLine::new(&dist.scales());
        let cfg = QuadConfig::default().with_rel_tol(1e-11);
        let r = integrate_half_line(|x| dist.pdf_sr(x).unwrap(), &layout, &cfg).unwrap();
        assert!((r.value - 1.0).abs() < 1e-9, "Γs={g}: {}", r.value);
    }
}

proptest! {
    #![proptest_config(cheap())]

    #[test]
    fn cdf_is_monotone_and_bounded(
        kind in prop::sample::select(LinkKind::ALL.to_vec()),
        gbar_db in 0.0f64..40.0,
        x1 in 0.01f64..100.0,
        x2 in 0.01f64..100.0,
    ) {
        let dist = relay(kind, 10f64.powf(gbar_db / 10.0), 1.0, 1.1, 2.1);
        let (lo, hi) = if x1 < x2 { (x1, x2) } else { (x2, x1) };
        let f_lo = dist.cdf(lo).unwrap();
        let f_hi = dist.cdf(hi).unwrap();
        prop_assert!((0.0..=1.0).contains(&f_lo) && (0.0..=1.0).contains(&f_hi));
        prop_assert!(f_hi >= f_lo - 1e-12, "{kind}: F({lo})={f_lo} > F({hi})={f_hi}");
    }

    #[test]
    fn pdf_matches_numerical_derivative(
        kind in prop::sample::select(vec![LinkKind::Sr, LinkKind::Ru, LinkKind::Df]),
        gbar_db in 0.0f64..30.0,
        x in 0.05f64..50.0,
    ) {
        let dist = relay(kind, 10f64.powf(gbar_db / 10.0), 1.0, 1.1, 2.1);
        let h = 1e-5 * x;
        let num = (dist.cdf(x + h).unwrap() - dist.cdf(x - h).unwrap()) / (2.0 * h);
        let pdf = dist.pdf(x).unwrap();
        prop_assert!((num - pdf).abs() <= 1e-5 * pdf.abs() + 1e-12, "{kind}: {pdf} vs {num}");
    }

    #[test]
    fn relays_bounded_by_hops(
        gbar_db in 0.0f64..40.0,
        lambda in prop::sample::select(vec![0.1, 0.5, 1.0, 2.0]),
        x in 0.1f64..50.0,
    ) {
        let g = 10f64.powf(gbar_db / 10.0);
        let df = relay(LinkKind::Df, g, lambda, 1.1, 2.1);
        let f_sr = df.with_kind(LinkKind::Sr).cdf(x).unwrap();
        let f_ru = df.with_kind(LinkKind::Ru).cdf(x).unwrap();
        let f_df = df.cdf(x).unwrap();
        prop_assert!(f_df >= f_sr.max(f_ru) - 1e-12);
        prop_assert!(f_df <= f_sr + f_ru + 1e-12);
        // fixed gain: γ1γ2/(γ2+C) ≤ γ1 but can exceed γ2
        let af = df.with_kind(LinkKind::Af);
        let f_af = af.cdf(x).unwrap();
        prop_assert!(f_af >= f_sr - 1e-12, "AF {f_af} below S-R hop {f_sr}");
        let f_af_c = af.with_c_param(4.0).unwrap().cdf(x).unwrap();
        prop_assert!(f_af_c >= f_af - 1e-9, "larger C lowered outage: {f_af_c} < {f_af}");
    }

    #[test]
    fn ec_monotone_in_theta_and_below_ergodic(
        kind in prop::sample::select(LinkKind::ALL.to_vec()),
        gbar_db in 0.0f64..30.0,
        lt1 in -6.0f64..1.0,
        lt2 in -6.0f64..1.0,
    ) {
        let dist = relay(kind, 10f64.powf(gbar_db / 10.0), 1.0, 1.1, 2.1);
        let (a, b) = if lt1 < lt2 { (lt1, lt2) } else { (lt2, lt1) };
        let ec_a = effective_capacity(&dist, &QosSpec::with_theta(10f64.powf(a)).unwrap()).unwrap();
        let ec_b = effective_capacity(&dist, &QosSpec::with_theta(10f64.powf(b)).unwrap()).unwrap();
        prop_assert!(ec_b.value_bits <= ec_a.value_bits * (1.0 + 1e-9));
        let q = QosSpec::with_theta(1e-3).unwrap();
        let erg = ergodic_capacity(&dist, &q).unwrap();
        prop_assert!(ec_a.value_bits <= erg * (1.0 + 1e-9), "{} > {erg}", ec_a.value_bits);
    }

    #[test]
    fn eps_capacity_solves_the_outage_equation(
        kind in prop::sample::select(LinkKind::ALL.to_vec()),
        gbar_db in 0.0f64..30.0,
        le in -4.0f64..-0.5,
    ) {
        let dist = relay(kind, 10f64.powf(gbar_db / 10.0), 1.0, 1.1, 2.1);
        let eps = 10f64.powf(le);
        let r = eps_outage_capacity(&dist, eps).unwrap();
        let g = (r.c_eps * std::f64::consts::LN_2).exp_m1();
        prop_assert!((dist.cdf(g).unwrap() - eps).abs() <= EPS_RESIDUAL_TOL * 10.0);
    }
}

#[test]
fn asymptotic_error_shrinks_with_snr() {
    for kind in LinkKind::ALL {
        let base = relay(kind, 100.0, 1.0, 1.1, 2.1);
        let mut last = f64::INFINITY;
        for db in [20.0, 30.0, 40.0, 50.0] {
            let d = rescale_gbar(&base, 10f64.powf(db / 10.0)).unwrap();
            let exact = d.cdf(10.0).unwrap();
            let err = ((d.cdf_asy(10.0).unwrap() - exact) / exact).abs();
            assert!(
                err <= last * (1.0 + 1e-6),
                "{kind} at {db} dB: {err} after {last}"
            );
            last = err;
        }
    }
}

#[test]
fn monte_carlo_independent_of_workers() {
    let dist = relay(LinkKind::Af, 100.0, 1.0, 1.1, 2.1);
    let one = sample_end_to_end(&dist, &SimConfig::new(200_000, 5).with_workers(1)).unwrap();
    for w in [2, 3, 8] {
        let many = sample_end_to_end(&dist, &SimConfig::new(200_000, 5).with_workers(w)).unwrap();
        assert_eq!(one, many, "workers={w}");
    }
}

#[test]
fn fisher_f_draws_positive_for_small_shape() {
    let p = FisherFParams::normalized(0.1721, 1.5).unwrap();
    let xs = sample_fisher_f_power(&p, &SimConfig::new(300_000, 3)).unwrap();
    assert!(xs.iter().all(|&x| x > 0.0 && x.is_finite()));
}

#[test]
fn fit_is_deterministic() {
    let params = FitParams::FisherF {
        m: 1.5,
        m_s: 3.0,
        omega_m: 1.0,
        omega_s: 1.0,
    };
    let env = synthesize_envelope(&params, 2000, 11).unwrap();
    let opts = FitOptions {
        starts: 6,
        seed: 4,
        ..FitOptions::default()
    };
    let a = fit_model(&env, FitModel::FisherF, &opts).unwrap();
    let b = fit_model(&env, FitModel::FisherF, &opts).unwrap();
    assert_eq!(a.params, b.params);
    assert_eq!(a.mse.to_bits(), b.mse.to_bits());
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 6, ..ProptestConfig::default() })]

    #[test]
    fn nakagami_fit_scales_with_envelope(k in 0.05f64..20.0, seed in 0u64..1000) {
        let params = FitParams::Nakagami { m: 2.0, omega: 1.0 };
        let env = synthesize_envelope(&params, 1500, seed).unwrap();
        let scaled: Vec<f64> = env.iter().map(|r| r * k).collect();
        let opts = FitOptions { starts: 4, ..FitOptions::default() };
        let FitParams::Nakagami { m: m1, omega: o1 } = fit_model(&env, FitModel::Nakagami, &opts).unwrap().params else {
            unreachable!()
        };
        let FitParams::Nakagami { m: m2, omega: o2 } = fit_model(&scaled, FitModel::Nakagami, &opts).unwrap().params else {
            unreachable!()
        };
        prop_assert!((m1 - m2).abs() <= 1e-3 * m1, "m {m1} vs {m2}");
        prop_assert!((o2 / (k * k) - o1).abs() <= 1e-3 * o1, "Ω {o1} vs {}", o2 / (k * k));
    }
}
