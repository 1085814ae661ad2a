//! QoS-aware link metrics: effective capacity, outage, diversity order and
//! ε-outage capacity.
//!
//! Rates are R = BT·log₂(1+γ) bits per block, so the effective capacity is
//! EC(θ) = −(1/θ) ln E[(1+γ)^{−β}] bits per block with β = BTθ/ln 2.

use std::cell::RefCell;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channel::QosSpec;
use crate::error::{Error, Result};
use crate::quad::{integrate_half_line, HalfLine, QuadConfig};
use crate::roots::solve_bracketed;
use crate::snr::{LinkKind, SnrDistribution};
use crate::specfun::{
    factorial, gauss_2f1_with, ln_beta, ln_gamma, meijer_g_scaled, reg_upper_inc_gamma,
    MeijerGSpec, SpecFunError,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EcMethod {
    Quadrature,
    /// Closed form, possibly with quadrature for parts that have no
    /// univariate closed form (AF M₂, DF N₁ and the G-term of N₂).
    ClosedForm,
    Asymptotic,
    MonteCarlo,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EcResult {
    pub value_bits: f64,
    pub method: EcMethod,
    pub qos: QosSpec,
}

impl EcResult {
    /// Bits per second.
    pub fn per_second(&self) -> f64 {
        self.value_bits / self.qos.duration_s()
    }
}

/// E[(1+γ)^{−β}] carried together with its complement, each computed from
/// whichever form avoids cancellation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Discount {
    pub e: f64,
    pub d: f64,
}

impl Discount {
    fn from_e(e: f64) -> Self {
        Self { e, d: 1.0 - e }
    }
    fn from_d(d: f64) -> Self {
        Self { e: 1.0 - d, d }
    }

    /// −(1/θ) ln E.
    pub fn effective_capacity(&self, theta: f64) -> f64 {
        if self.d.abs() < 0.5 {
            -(-self.d).ln_1p() / theta
        } else {
            -self.e.ln() / theta
        }
    }
}

/// Runs `f` under half-line quadrature, surfacing the first evaluation error.
pub(crate) fn integrate_fallible<F>(f: F, layout: &HalfLine, cfg: &QuadConfig) -> Result<f64>
where
    F: Fn(f64) -> Result<f64>,
{
    let err = RefCell::new(None);
    let r = integrate_half_line(
        |x| match f(x) {
            Ok(v) => v,
            Err(e) => {
                err.borrow_mut().get_or_insert(e);
                0.0
            }
        },
        layout,
        cfg,
    );
    if let Some(e) = err.into_inner() {
        return Err(e);
    }
    Ok(r?.value)
}

fn tight(cfg: &QuadConfig, rel_tol: f64) -> QuadConfig {
    QuadConfig {
        rel_tol: cfg.rel_tol.min(rel_tol),
        max_evals: cfg.max_evals.max(200_000),
        ..*cfg
    }
}

fn ec_scales(dist: &SnrDistribution, beta: f64) -> Vec<f64> {
    let mut s = dist.scales();
    s.extend([0.1 / beta, 1.0 / beta, 10.0 / beta, 1.0]);
    s
}

/// (1+γ)^{−p}
fn discount(g: f64, p: f64) -> f64 {
    (-p * g.ln_1p()).exp()
}

/// E[(1+γ)^{−β}] by quadrature. S-R and R-U use the density; AF and DF use
/// the CDF after integration by parts.
pub fn discount_quadrature(dist: &SnrDistribution, beta: f64) -> Result<Discount> {
    if !(beta > 0.0 && beta.is_finite()) {
        return Err(Error::domain(format!("β must be positive, got {beta}")));
    }
    let cfg = tight(dist.quad_config(), 1e-11);
    let scales = ec_scales(dist, beta);
    match dist.kind() {
        LinkKind::Sr | LinkKind::Ru => {
            let p = dist.pdf_origin_power();
            if beta < 0.01 {
                let layout = HalfLine::new(&scales).origin_power(p + 1.0);
                let d = integrate_fallible(
                    |g| Ok(dist.pdf(g)? * -(-beta * g.ln_1p()).exp_m1()),
                    &layout,
                    &cfg,
                )?;
                Ok(Discount::from_d(d))
            } else {
                let layout = HalfLine::new(&scales).origin_power(p);
                let e =
                    integrate_fallible(|g| Ok(dist.pdf(g)? * discount(g, beta)), &layout, &cfg)?;
                Ok(Discount::from_e(e))
            }
        }
        LinkKind::Af | LinkKind::Df => {
            if beta <= 1.0 {
                let layout = HalfLine::new(&scales);
                let d = integrate_fallible(
                    |g| Ok(dist.ccdf(g)? * discount(g, beta + 1.0)),
                    &layout,
                    &cfg,
                )?;
                Ok(Discount::from_d(beta * d))
            } else {
                let layout = HalfLine::new(&scales).origin_power(dist.cdf_origin_power());
                let e = integrate_fallible(
                    |g| Ok(dist.cdf(g)? * discount(g, beta + 1.0)),
                    &layout,
                    &cfg,
                )?;
                Ok(Discount::from_e(beta * e))
            }
        }
    }
}

/// Effective capacity by direct quadrature of the defining expectation.
pub fn effective_capacity(dist: &SnrDistribution, qos: &QosSpec) -> Result<EcResult> {
    let d = discount_quadrature(dist, qos.beta_norm())?;
    Ok(EcResult {
        value_bits: d.effective_capacity(qos.theta()),
        method: EcMethod::Quadrature,
        qos: *qos,
    })
}

/// Ergodic capacity BT·E[log₂(1+γ)] in bits per block, from
/// E[ln(1+γ)] = ∫ (1−F(γ))/(1+γ) dγ.
pub fn ergodic_capacity(dist: &SnrDistribution, qos: &QosSpec) -> Result<f64> {
    let cfg = tight(dist.quad_config(), 1e-10);
    let layout = HalfLine::new(&dist.scales());
    let v = integrate_fallible(|g| Ok(dist.ccdf(g)? / (1.0 + g)), &layout, &cfg)?;
    Ok(qos.bt() * v / std::f64::consts::LN_2)
}

// ---- closed forms -------------------------------------------------------

/// E_SR = (α/Γ(β)) Σ_k c_k/γ̄^{k+1} G^{2,1}_{1,2}((β_SR−δ_SR)/γ̄ | −k; β−k−1, 0).
pub fn discount_sr_closed(dist: &SnrDistribution, beta: f64) -> Result<f64> {
    let sr = dist.sr_params();
    let gbar = dist.gbar_sr();
    let a = sr.decay() / gbar;
    let ln_pref = sr.alpha().ln() - ln_gamma(beta)?;
    let mut e = 0.0;
    for (k, &ck) in sr.series_coefficients().iter().enumerate() {
        if ck == 0.0 {
            continue;
        }
        let kf = k as f64;
        let spec = MeijerGSpec::new(2, 1, &[-kf], &[beta - kf - 1.0, 0.0])?;
        let ln_scale = ln_pref + ck.ln() - (kf + 1.0) * gbar.ln();
        e += meijer_g_scaled(&spec, a, dist.policy(), ln_scale)?;
    }
    Ok(e)
}

/// E_RU = G^{2,2}_{2,2}(y₀ | 1, 1−m_s; β, m) / (Γ(m)Γ(m_s)Γ(β)), y₀ = mΩ_s/(m_sΩ_mγ̄).
pub fn discount_ru_closed(dist: &SnrDistribution, beta: f64) -> Result<f64> {
    let ru = dist.ru_params();
    let (m, ms) = (ru.m(), ru.m_s());
    let y0 = ru.ratio_scale() / dist.gbar_ru();
    let spec = MeijerGSpec::new(2, 2, &[1.0, 1.0 - ms], &[beta, m])?;
    let ln_scale = -(ln_gamma(m)? + ln_gamma(ms)? + ln_gamma(beta)?);
    match meijer_g_scaled(&spec, y0, dist.policy(), ln_scale) {
        Ok(v) => Ok(v),
        // Near |y₀| = 1 neither residue series of G^{2,2}_{2,2} converges fast.
        Err(_) => discount_ru_hypergeometric(dist, beta),
    }
}

/// E_RU = y₀^m B(m, m_s+β)/B(m, m_s) ₂F₁(m+m_s, m; m+m_s+β; 1−y₀).
pub fn discount_ru_hypergeometric(dist: &SnrDistribution, beta: f64) -> Result<f64> {
    let ru = dist.ru_params();
    let (m, ms) = (ru.m(), ru.m_s());
    let y0 = ru.ratio_scale() / dist.gbar_ru();
    let f = gauss_2f1_with(m + ms, m, m + ms + beta, 1.0 - y0, dist.policy())?;
    let ln_common = m * y0.ln() - ln_beta(m, ms)? + ln_beta(m, ms + beta)?;
    Ok(ln_common.exp() * f)
}

fn closed_result(e: f64, qos: &QosSpec, method: EcMethod) -> Result<EcResult> {
    if !(e > 0.0 && e.is_finite()) {
        return Err(Error::Consistency(format!(
            "E[(1+γ)^-β] evaluated to {e}, outside (0, ∞)"
        )));
    }
    Ok(EcResult {
        value_bits: Discount::from_e(e).effective_capacity(qos.theta()),
        method,
        qos: *qos,
    })
}

/// Closed-form EC of the S-R hop of `dist`.
pub fn ec_sr_closed(dist: &SnrDistribution, qos: &QosSpec) -> Result<EcResult> {
    let e = discount_sr_closed(dist, qos.beta_norm())?;
    closed_result(e, qos, EcMethod::ClosedForm)
}

/// Closed-form EC of the R-U hop of `dist`.
pub fn ec_ru_closed(dist: &SnrDistribution, qos: &QosSpec) -> Result<EcResult> {
    let e = discount_ru_closed(dist, qos.beta_norm())?;
    closed_result(e, qos, EcMethod::ClosedForm)
}

// ---- AF -------------------------------------------------------------

/// M₁ = ∫ F_SR(γ)(1+γ)^{−β−1} dγ
///    = Σ_k w̃_k [k!/β − G^{3,1}_{2,3}(a | 0, 1; β, 0, k+1)/Γ(β+1)].
///
/// Every bracket is a difference of two nearly equal numbers once β·a is
/// small; when the estimated error of that difference exceeds 1e−7 the
/// identity β·M₁ = E_SR is used instead.
pub fn af_m1(dist: &SnrDistribution, beta: f64) -> Result<f64> {
    match af_m1_series(dist, beta) {
        Ok(v) => Ok(v),
        Err(Error::SpecFun(SpecFunError::PrecisionLoss { .. })) => {
            Ok(discount_sr_closed(dist, beta)? / beta)
        }
        Err(e) => Err(e),
    }
}

fn af_m1_series(dist: &SnrDistribution, beta: f64) -> Result<f64> {
    let sr = dist.sr_params();
    let bd = sr.decay();
    let a = bd / dist.gbar_sr();
    let ln_g1 = ln_gamma(beta + 1.0)?;
    let tol = dist.policy().rel_tol;
    let mut m1 = 0.0;
    for (k, &ck) in sr.series_coefficients().iter().enumerate() {
        if ck == 0.0 {
            continue;
        }
        let kf = k as f64;
        let fact = factorial(k as u32);
        let spec = MeijerGSpec::new(3, 1, &[0.0, 1.0], &[beta, 0.0, kf + 1.0])?;
        let g = meijer_g_scaled(&spec, a, dist.policy(), -ln_g1)?;
        let bracket = fact / beta - g;
        let rel = (bracket / (fact / beta)).abs();
        if tol / rel.max(f64::MIN_POSITIVE) > 1e-7 {
            return Err(Error::SpecFun(SpecFunError::PrecisionLoss {
                func: "af_m1",
                digits: -(rel.log10()),
            }));
        }
        m1 += sr.alpha() * ck / bd.powi(k as i32 + 1) * bracket;
    }
    Ok(m1)
}

/// M₂ = ∫ L(γ)(1+γ)^{−β−1} dγ by quadrature, with L itself by quadrature.
pub fn af_m2(dist: &SnrDistribution, beta: f64) -> Result<f64> {
    let af = dist.with_kind(LinkKind::Af);
    let cfg = tight(dist.quad_config(), 1e-9);
    let layout = HalfLine::new(&ec_scales(&af, beta)).origin_power(af.cdf_origin_power());
    integrate_fallible(
        |g| Ok(af.af_integral(g)? * discount(g, beta + 1.0)),
        &layout,
        &cfg,
    )
}

/// AF effective capacity from E_AF = β(M₁ + M₂).
pub fn ec_af(dist: &SnrDistribution, qos: &QosSpec) -> Result<EcResult> {
    let beta = qos.beta_norm();
    let e = beta * (af_m1(dist, beta)? + af_m2(dist, beta)?);
    closed_result(e, qos, EcMethod::ClosedForm)
}

fn check_asymptotic_beta(dist: &SnrDistribution, beta: f64) -> Result<()> {
    let gs = dist.sr_params().gamma_s() as f64;
    if beta <= gs {
        return Err(Error::domain(format!(
            "asymptotic EC needs β > Γ_s = {gs}, got β = {beta}"
        )));
    }
    Ok(())
}

/// High-SNR AF effective capacity, −(1/θ) ln(β Σ_k e_k B(k+2, β−k−1)).
pub fn ec_af_asy(dist: &SnrDistribution, qos: &QosSpec) -> Result<EcResult> {
    let beta = qos.beta_norm();
    check_asymptotic_beta(dist, beta)?;
    let sr = dist.sr_params();
    let ru = dist.ru_params();
    let (m, ms) = (ru.m(), ru.m_s());
    let r = ru.ratio_scale() * dist.c_param() / dist.gbar_ru();
    let mut sum = 0.0;
    for (k, &ck) in sr.series_coefficients().iter().enumerate() {
        if ck == 0.0 {
            continue;
        }
        let kf = k as f64;
        let corr = crate::specfun::gamma(m - kf - 1.0)? * crate::specfun::gamma(ms + kf + 1.0)?
            / (crate::specfun::gamma(ms)? * crate::specfun::gamma(m)?);
        let ek = sr.alpha() * ck / ((kf + 1.0) * dist.gbar_sr().powi(k as i32 + 1))
            * (1.0 + corr * r.powi(k as i32 + 1));
        sum += ek * ln_beta(kf + 2.0, beta - kf - 1.0)?.exp();
    }
    closed_result(beta * sum, qos, EcMethod::Asymptotic)
}

// ---- DF -------------------------------------------------------------

/// N₁ = ∫ f_SR(γ) F_RU(γ) (1+γ)^{−β} dγ.
pub fn df_n1(dist: &SnrDistribution, beta: f64) -> Result<f64> {
    let cfg = tight(dist.quad_config(), 1e-11);
    let df = dist.with_kind(LinkKind::Df);
    let layout = HalfLine::new(&ec_scales(&df, beta)).origin_power(dist.ru_params().m());
    integrate_fallible(
        |g| Ok(df.pdf_sr(g)? * df.cdf_ru(g)? * discount(g, beta)),
        &layout,
        &cfg,
    )
}

/// Closed part of N₂: Σ_k g_k Γ(k+1) B(m, m_s+β) ₂F₁(m+m_s, m; m+m_s+β; 1−y₀)
/// with g_k = α c_k y₀^m / (B(m, m_s)(β_SR−δ_SR)^{k+1}).
pub fn df_n2_hypergeometric(dist: &SnrDistribution, beta: f64) -> Result<f64> {
    let sr = dist.sr_params();
    let bd = sr.decay();
    let mut total = 0.0;
    for (k, &ck) in sr.series_coefficients().iter().enumerate() {
        total += sr.alpha() * ck * factorial(k as u32) / bd.powi(k as i32 + 1);
    }
    Ok(total * discount_ru_closed(dist, beta)?)
}

/// G-term of N₂: ∫ f_RU(γ) Σ_k w_k Q(k+1, aγ) (1+γ)^{−β} dγ.
pub fn df_n2_quadrature(dist: &SnrDistribution, beta: f64) -> Result<f64> {
    let cfg = tight(dist.quad_config(), 1e-11);
    let df = dist.with_kind(LinkKind::Df);
    let sr = dist.sr_params();
    let bd = sr.decay();
    let a = bd / dist.gbar_sr();
    let weights: Vec<f64> = sr
        .series_coefficients()
        .iter()
        .enumerate()
        .map(|(k, &ck)| sr.alpha() * ck * factorial(k as u32) / bd.powi(k as i32 + 1))
        .collect();
    let layout = HalfLine::new(&ec_scales(&df, beta)).origin_power(dist.ru_params().m() - 1.0);
    integrate_fallible(
        |g| {
            let mut q = 0.0;
            for (k, &w) in weights.iter().enumerate() {
                q += w * reg_upper_inc_gamma(k as f64 + 1.0, a * g)?;
            }
            Ok(df.pdf_ru(g)? * q * discount(g, beta))
        },
        &layout,
        &cfg,
    )
}

/// DF effective capacity from E_DF = N − N₁ − N₂, N = E_SR + E_RU.
pub fn ec_df(dist: &SnrDistribution, qos: &QosSpec) -> Result<EcResult> {
    let beta = qos.beta_norm();
    let n = discount_sr_closed(dist, beta)? + discount_ru_closed(dist, beta)?;
    let n1 = df_n1(dist, beta)?;
    let n2 = df_n2_hypergeometric(dist, beta)? - df_n2_quadrature(dist, beta)?;
    closed_result(n - n1 - n2, qos, EcMethod::ClosedForm)
}

/// High-SNR DF effective capacity,
/// −(1/θ) ln β[Σ_k α c_k B(k+2, β−k−1)/((k+1)γ̄^{k+1}) + Γ(β−m)Γ(m+m_s) y₀^m/(Γ(β+1)Γ(m_s))].
pub fn ec_df_asy(dist: &SnrDistribution, qos: &QosSpec) -> Result<EcResult> {
    let beta = qos.beta_norm();
    check_asymptotic_beta(dist, beta)?;
    let sr = dist.sr_params();
    let ru = dist.ru_params();
    let (m, ms) = (ru.m(), ru.m_s());
    if beta <= m {
        return Err(Error::domain(format!(
            "asymptotic DF EC needs β > m = {m}, got β = {beta}"
        )));
    }
    let mut sum = 0.0;
    for (k, &ck) in sr.series_coefficients().iter().enumerate() {
        if ck == 0.0 {
            continue;
        }
        let kf = k as f64;
        sum += sr.alpha() * ck / ((kf + 1.0) * dist.gbar_sr().powi(k as i32 + 1))
            * ln_beta(kf + 2.0, beta - kf - 1.0)?.exp();
    }
    let y0 = ru.ratio_scale() / dist.gbar_ru();
    let ln_ru = ln_gamma(beta - m)? + ln_gamma(m + ms)? - ln_gamma(beta + 1.0)? - ln_gamma(ms)?
        + m * y0.ln();
    sum += ln_ru.exp();
    closed_result(beta * sum, qos, EcMethod::Asymptotic)
}

/// Closed-form (or semi-closed) EC for any link kind.
pub fn ec_closed(dist: &SnrDistribution, qos: &QosSpec) -> Result<EcResult> {
    match dist.kind() {
        LinkKind::Sr => ec_sr_closed(dist, qos),
        LinkKind::Ru => ec_ru_closed(dist, qos),
        LinkKind::Af => ec_af(dist, qos),
        LinkKind::Df => ec_df(dist, qos),
    }
}

/// High-SNR EC for any link kind; the single-hop links use the relay
/// formulas' own hop terms.
pub fn ec_asymptotic(dist: &SnrDistribution, qos: &QosSpec) -> Result<EcResult> {
    match dist.kind() {
        LinkKind::Af => ec_af_asy(dist, qos),
        LinkKind::Df => ec_df_asy(dist, qos),
        k => Err(Error::domain(format!(
            "no asymptotic EC form for the {k} link"
        ))),
    }
}

// ---- outage ---------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OutageReport {
    pub p_out: f64,
    pub p_out_asy: f64,
    pub gamma_th: f64,
    pub diversity_order: f64,
}

/// Lower and upper average SNRs (linear) of the diversity-slope window.
pub const DIVERSITY_WINDOW: (f64, f64) = (1e4, 1e5);

/// Copy of `dist` with its reference average SNR set to `gbar`. For the
/// relay links the R-U to S-R ratio is held fixed.
pub fn rescale_gbar(dist: &SnrDistribution, gbar: f64) -> Result<SnrDistribution> {
    match dist.kind() {
        LinkKind::Ru => dist.with_gbar(dist.gbar_sr(), gbar),
        _ => {
            let lambda = dist.gbar_ru() / dist.gbar_sr();
            dist.with_gbar(gbar, lambda * gbar)
        }
    }
}

/// The average SNR that [`rescale_gbar`] acts on.
pub fn reference_gbar(dist: &SnrDistribution) -> f64 {
    match dist.kind() {
        LinkKind::Ru => dist.gbar_ru(),
        _ => dist.gbar_sr(),
    }
}

/// Negative two-point slope of log P^asy against log γ̄ over
/// [`DIVERSITY_WINDOW`].
pub fn diversity_order(dist: &SnrDistribution, gamma_th: f64) -> Result<f64> {
    let (lo, hi) = DIVERSITY_WINDOW;
    let p_lo = rescale_gbar(dist, lo)?.cdf_asy(gamma_th)?;
    let p_hi = rescale_gbar(dist, hi)?.cdf_asy(gamma_th)?;
    if !(p_lo > 0.0 && p_hi > 0.0) {
        return Err(Error::Consistency(format!(
            "asymptotic outage not positive in the slope window ({p_lo}, {p_hi})"
        )));
    }
    Ok(-(p_hi.log10() - p_lo.log10()) / (hi.log10() - lo.log10()))
}

pub fn outage(dist: &SnrDistribution, gamma_th: f64) -> Result<OutageReport> {
    if !(gamma_th > 0.0 && gamma_th.is_finite()) {
        return Err(Error::domain(format!(
            "γ_th must be positive, got {gamma_th}"
        )));
    }
    Ok(OutageReport {
        p_out: dist.cdf(gamma_th)?,
        p_out_asy: dist.cdf_asy(gamma_th)?,
        gamma_th,
        diversity_order: diversity_order(dist, gamma_th)?,
    })
}

// ---- ε-outage capacity ------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpsCapacityResult {
    /// Bits per channel use.
    pub c_eps: f64,
    pub epsilon: f64,
    pub iterations: usize,
}

pub const EPS_RESIDUAL_TOL: f64 = 1e-10;

/// Solves F(2^C − 1) = ε for C.
pub fn eps_outage_capacity(dist: &SnrDistribution, epsilon: f64) -> Result<EpsCapacityResult> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::domain(format!(
            "ε must lie in (0, 1), got {epsilon}"
        )));
    }
    let dist = dist.clone().with_quad(tight(dist.quad_config(), 1e-12));
    let gbar = match dist.kind() {
        LinkKind::Sr => dist.gbar_sr(),
        LinkKind::Ru => dist.gbar_ru(),
        _ => dist.gbar_sr().max(dist.gbar_ru()),
    };
    let residual = |c: f64| -> Result<f64> {
        let g = (c * std::f64::consts::LN_2).exp_m1();
        Ok(dist.cdf(g)? - epsilon)
    };
    let mut hi = (1.0 + gbar * 1e3).log2();
    let mut expansions = 0;
    while residual(hi)? < 0.0 {
        hi *= 2.0;
        expansions += 1;
        if expansions > 10 {
            return Err(Error::Root(format!(
                "could not bracket F(2^C − 1) = {epsilon}: F stays below target up to C = {hi}"
            )));
        }
    }
    let root = solve_bracketed(residual, 0.0, hi, EPS_RESIDUAL_TOL, 500)?;
    Ok(EpsCapacityResult {
        c_eps: root.x.max(0.0),
        epsilon,
        iterations: root.iterations,
    })
}

/// Evaluates `f` over `inputs` on the current rayon pool; results keep the
/// input order.
pub fn par_sweep<X, T, F>(inputs: &[X], f: F) -> Vec<Result<T>>
where
    X: Sync,
    T: Send,
    F: Fn(&X) -> Result<T> + Sync + Send,
{
    inputs.par_iter().map(f).collect()
}
