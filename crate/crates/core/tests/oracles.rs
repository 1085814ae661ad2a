//! Special functions against independent oracles: brute-force series,
//! Simpson quadrature of the defining integrals, and a numerically
//! integrated Mellin-Barnes contour for the Meijer G-function.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use linkcalc::channel::FisherFParams;
use linkcalc::snr::SnrDistribution;
use linkcalc::specfun::{
    gauss_2f1, kummer_1f1_finite, ln_gamma, lower_inc_gamma, meijer_g, pochhammer, reg_inc_beta,
    EvalPolicy, MeijerGSpec,
};

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

fn simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, n: usize) -> f64 {
    let n = n + n % 2;
    let h = (b - a) / n as f64;
    let mut s = f(a) + f(b);
    for i in 1..n {
        s += f(a + i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    s * h / 3.0
}

/// ln Γ(x) by upward recurrence to x + 50 and the Stirling series there.
fn ln_gamma_oracle(x: f64) -> f64 {
    let n = 50;
    let z = x + n as f64;
    let stirling =
        (z - 0.5) * z.ln() - z + 0.5 * (2.0 * std::f64::consts::PI).ln() + 1.0 / (12.0 * z)
            - 1.0 / (360.0 * z.powi(3))
            + 1.0 / (1260.0 * z.powi(5))
            - 1.0 / (1680.0 * z.powi(7));
    let prod: f64 = (0..n).map(|k| (x + k as f64).ln()).sum();
    stirling - prod
}

#[test]
fn ln_gamma_values() {
    assert_eq!(ln_gamma(1.0).unwrap(), 0.0);
    assert!((ln_gamma(0.5).unwrap() - 0.5723649429247001).abs() < 1e-13);
    let x = 7.3;
    assert!(rel(ln_gamma(x).unwrap(), ln_gamma_oracle(x)) < 1e-12);
    for x in [1e-3, 0.1, 0.77, 2.5, 13.1, 140.0, 999.0] {
        assert!(
            rel(ln_gamma(x).unwrap(), ln_gamma_oracle(x)) < 1e-13,
            "x = {x}"
        );
    }
}

#[test]
fn pochhammer_values() {
    assert_eq!(pochhammer(5.0, 0), 1.0);
    assert_eq!(pochhammer(3.0, 2), 12.0);
    assert_eq!(pochhammer(-1.0, 3), 0.0);
}

#[test]
fn lower_incomplete_gamma_matches_quadrature() {
    assert!((lower_inc_gamma(1.0, 1.0).unwrap() - (1.0 - (-1f64).exp())).abs() < 1e-15);
    assert_eq!(lower_inc_gamma(2.2, 0.0).unwrap(), 0.0);
    // t = u² removes the t^{a-1} kink at the origin.
    let (a, x): (f64, f64) = (2.5, 3.7);
    let oracle = simpson(
        |u| 2.0 * u.powf(2.0 * a - 1.0) * (-u * u).exp(),
        0.0,
        x.sqrt(),
        20_000,
    );
    assert!(rel(lower_inc_gamma(a, x).unwrap(), oracle) < 1e-10);
}

#[test]
fn regularized_beta_matches_quadrature() {
    assert_eq!(reg_inc_beta(0.0, 1.3, 2.0).unwrap(), 0.0);
    assert!((reg_inc_beta(0.5, 1.0, 1.0).unwrap() - 0.5).abs() < 1e-15);
    // t = u^{1/a} turns t^{a-1} dt into du/a.
    let (x, a, b): (f64, f64, f64) = (0.3, 1.07, 2.02);
    let ln_b = ln_gamma_oracle(a) + ln_gamma_oracle(b) - ln_gamma_oracle(a + b);
    let integral = simpson(
        |u| (1.0 - u.powf(1.0 / a)).powf(b - 1.0),
        0.0,
        x.powf(a),
        20_000,
    ) / a;
    let oracle = integral / ln_b.exp();
    assert!(rel(reg_inc_beta(x, a, b).unwrap(), oracle) < 1e-10);
}

fn series_1f1(a: f64, b: f64, z: f64) -> f64 {
    let (mut term, mut sum) = (1.0, 1.0);
    for k in 0..400 {
        let k = k as f64;
        term *= (a + k) / (b + k) * z / (k + 1.0);
        sum += term;
    }
    sum
}

#[test]
fn kummer_matches_power_series() {
    assert!(rel(kummer_1f1_finite(1, 0.8).unwrap(), 0.8f64.exp()) < 1e-15);
    assert_eq!(kummer_1f1_finite(2, 0.0).unwrap(), 1.0);
    assert!(
        rel(
            kummer_1f1_finite(2, 0.5).unwrap(),
            series_1f1(2.0, 1.0, 0.5)
        ) < 1e-10
    );
    assert!(kummer_1f1_finite(0, 1.0).is_err());
}

fn series_2f1(a: f64, b: f64, c: f64, z: f64, terms: usize) -> f64 {
    let (mut term, mut sum) = (1.0, 1.0);
    for k in 0..terms {
        let k = k as f64;
        term *= (a + k) * (b + k) / ((c + k) * (k + 1.0)) * z;
        sum += term;
    }
    sum
}

#[test]
fn gauss_2f1_matches_brute_force() {
    assert_eq!(gauss_2f1(1.3, 0.4, 2.2, 0.0).unwrap(), 1.0);
    assert!((gauss_2f1(1.0, 1.0, 2.0, -1.0).unwrap() - std::f64::consts::LN_2).abs() < 1e-12);
    // Pfaff transform, then 10⁴ plain terms.
    let (a, b, c, z): (f64, f64, f64, f64) = (3.09, 1.07, 2.07, -0.4);
    let w = z / (z - 1.0);
    let oracle = (1.0 - z).powf(-b) * series_2f1(b, c - a, c, w, 10_000);
    assert!(rel(gauss_2f1(a, b, c, z).unwrap(), oracle) < 1e-9);
    // Large c near z = 1, as produced by effective-capacity forms at large θ.
    let c = 3.2 + 4e4 / std::f64::consts::LN_2;
    assert!(
        rel(
            gauss_2f1(3.2, 1.1, c, 0.98).unwrap(),
            series_2f1(3.2, 1.1, c, 0.98, 10_000)
        ) < 1e-12
    );
    assert!(gauss_2f1(1.0, 1.0, -2.0, 0.5).is_err());
}

// ---- Meijer G ------------------------------------------------------------

/// ln Γ(z) for complex z: Lanczos (g = 7, 9 terms) with reflection.
fn c_ln_gamma(z: Complex64) -> Complex64 {
    const G: f64 = 7.0;
    const COEF: [f64; 9] = [
        0.999_999_999_999_809_9,
        676.520_368_121_885_1,
        -1_259.139_216_722_402_8,
        771.323_428_777_653_1,
        -176.615_029_162_140_6,
        12.507_343_278_686_905,
        -0.138_571_095_265_720_12,
        9.984_369_578_019_572e-6,
        1.505_632_735_149_311_6e-7,
    ];
    let pi = std::f64::consts::PI;
    if z.re < 0.5 {
        let s = (Complex64::new(pi, 0.0) * z).sin();
        return Complex64::new(pi.ln(), 0.0) - s.ln() - c_ln_gamma(Complex64::new(1.0, 0.0) - z);
    }
    let z = z - 1.0;
    let mut x = Complex64::new(COEF[0], 0.0);
    for (i, &c) in COEF.iter().enumerate().skip(1) {
        x += c / (z + i as f64);
    }
    let t = z + G + 0.5;
    Complex64::new(0.5 * (2.0 * pi).ln(), 0.0) + (z + 0.5) * t.ln() - t + x.ln()
}

/// G^{m,n}_{p,q}(x) = (1/2π) ∫ Re[Φ(c+it) x^{c+it}] dt on a vertical line
/// Re s = c that separates the two pole families.
fn meijer_contour(m: usize, n: usize, a: &[f64], b: &[f64], x: f64, c: f64) -> f64 {
    let one = Complex64::new(1.0, 0.0);
    let phi = |s: Complex64| {
        let mut l = s * x.ln();
        for (j, &bj) in b.iter().enumerate() {
            l += if j < m {
                c_ln_gamma(bj - s)
            } else {
                -c_ln_gamma(one - bj + s)
            };
        }
        for (j, &aj) in a.iter().enumerate() {
            l += if j < n {
                c_ln_gamma(one - aj + s)
            } else {
                -c_ln_gamma(aj - s)
            };
        }
        l.exp().re
    };
    // Trapezoid on an analytic, exponentially decaying integrand.
    let (h, t_max) = (0.01, 80.0);
    let steps = (t_max / h) as i64;
    let mut sum = 0.0;
    for i in -steps..=steps {
        sum += phi(Complex64::new(c, i as f64 * h));
    }
    sum * h / (2.0 * std::f64::consts::PI)
}

const CLASSES: [(usize, usize, usize, usize); 10] = [
    (1, 0, 0, 1),
    (1, 1, 1, 1),
    (2, 0, 1, 2),
    (2, 1, 1, 2),
    (2, 1, 2, 2),
    (1, 2, 2, 2),
    (2, 2, 2, 2),
    (3, 1, 2, 3),
    (2, 2, 3, 2),
    (2, 2, 2, 3),
];

#[test]
fn meijer_matches_mellin_barnes_contour() {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let policy = EvalPolicy::default();
    let c = 0.1;
    for (m, n, p, q) in CLASSES {
        for draw in 0..10 {
            // b_j (j < m) right of the contour, a_j (j < n) with a_j − 1 left of it.
            let b: Vec<f64> = (0..q)
                .map(|j| {
                    if j < m {
                        rng.random_range(0.3..2.2)
                    } else {
                        rng.random_range(-1.0..2.0)
                    }
                })
                .collect();
            let a: Vec<f64> = (0..p)
                .map(|j| {
                    if j < n {
                        rng.random_range(-0.8..1.0)
                    } else {
                        rng.random_range(-1.0..2.0)
                    }
                })
                .collect();
            let x = rng.random_range(0.2..3.0);
            let spec = MeijerGSpec::new(m, n, &a, &b).unwrap();
            let series = meijer_g(&spec, x, &policy).unwrap();
            let oracle = meijer_contour(m, n, &a, &b, x, c);
            let err = (series - oracle).abs() / oracle.abs().max(1e-6);
            assert!(
                err < 1e-6,
                "G^{{{m},{n}}}_{{{p},{q}}} draw {draw}: a={a:?} b={b:?} x={x}: series {series} contour {oracle}"
            );
        }
    }
}

#[test]
fn meijer_reference_values() {
    let p = EvalPolicy::default();
    let g = meijer_g(&MeijerGSpec::new(1, 0, &[], &[0.0]).unwrap(), 0.7, &p).unwrap();
    assert!((g - 0.4965853037914095).abs() < 1e-12);
    let g = meijer_g(&MeijerGSpec::new(1, 1, &[0.0], &[0.0]).unwrap(), 1.0, &p).unwrap();
    assert!((g - 0.5).abs() < 1e-12);
    // G^{2,1}_{2,2}(x | 1−m, 1; m_s, 0) = Γ(m)Γ(m_s) F_RU with y = 1/x.
    let (m, ms, x): (f64, f64, f64) = (1.07, 2.02, 2.0);
    let g = meijer_g(
        &MeijerGSpec::new(2, 1, &[1.0 - m, 1.0], &[ms, 0.0]).unwrap(),
        x,
        &p,
    )
    .unwrap();
    let y = 1.0 / x;
    let ln_b = ln_gamma_oracle(m) + ln_gamma_oracle(ms) - ln_gamma_oracle(m + ms);
    let w = y / (1.0 + y);
    let f = (1.0 + y).powf(-m) * series_2f1(m, 1.0 - ms, m + 1.0, w, 10_000);
    let cdf = y.powf(m) / (m * ln_b.exp()) * f;
    let oracle = (ln_gamma_oracle(m) + ln_gamma_oracle(ms)).exp() * cdf;
    assert!(rel(g, oracle) < 1e-9, "{g} vs {oracle}");
}

#[test]
fn fisher_f_cdf_forms_agree() {
    for (m, ms) in [(1.07, 2.02), (0.17, 1.12), (1.1, 2.1)] {
        let d = SnrDistribution::ru(FisherFParams::normalized(m, ms).unwrap(), 10.0).unwrap();
        for i in 0..50 {
            let g = 10f64.powf(-3.0 + 6.0 * i as f64 / 49.0);
            let a = d.cdf_ru(g).unwrap();
            let h = d.cdf_ru_hypergeometric(g).unwrap();
            let mg = d.cdf_ru_meijer(g).unwrap();
            assert!(
                rel(h, a) < 1e-8 && rel(mg, a) < 1e-8,
                "({m},{ms}) γ={g}: {a} {h} {mg}"
            );
        }
    }
}
