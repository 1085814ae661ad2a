//! Exact and asymptotic statistics of the instantaneous SNR for the single
//! hops (S-R, R-U) and the two relayed links (fixed-gain AF, DF).

use serde::{Deserialize, Serialize};

use crate::channel::{FisherFParams, ShadowedRicianParams};
use crate::error::{Error, Result};
use crate::quad::{integrate_half_line, HalfLine, QuadConfig};
use crate::specfun::{
    beta, binomial, factorial, gamma, gauss_2f1, is_nonpositive_integer, ln_beta, ln_gamma,
    meijer_g_scaled, reg_inc_beta, reg_inc_beta_complement, reg_lower_inc_gamma,
    reg_upper_inc_gamma, EvalPolicy, MeijerGSpec, SpecFunError,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, PartialOrd, Ord)]
#[serde(rename_all = "lowercase")]
pub enum LinkKind {
    Sr,
    Ru,
    Af,
    Df,
}

impl LinkKind {
    pub const ALL: [LinkKind; 4] = [LinkKind::Sr, LinkKind::Ru, LinkKind::Af, LinkKind::Df];

    pub fn name(self) -> &'static str {
        match self {
            LinkKind::Sr => "sr",
            LinkKind::Ru => "ru",
            LinkKind::Af => "af",
            LinkKind::Df => "df",
        }
    }
}

impl std::str::FromStr for LinkKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "sr" => Ok(LinkKind::Sr),
            "ru" => Ok(LinkKind::Ru),
            "af" => Ok(LinkKind::Af),
            "df" => Ok(LinkKind::Df),
            other => Err(Error::domain(format!(
                "unknown link kind '{other}' (sr, ru, af, df)"
            ))),
        }
    }
}

impl std::fmt::Display for LinkKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Both L evaluations from [`SnrDistribution::af_integral_both`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AfIntegral {
    pub quadrature: f64,
    /// `None` when the closed form lost too much precision to be trusted.
    pub closed: Option<f64>,
}

/// SNR statistics of one of the four links.
#[derive(Debug, Clone, PartialEq)]
pub struct SnrDistribution {
    kind: LinkKind,
    sr: ShadowedRicianParams,
    ru: FisherFParams,
    gbar_sr: f64,
    gbar_ru: f64,
    c_param: f64,
    self_check: bool,
    quad: QuadConfig,
    policy: EvalPolicy,
}

fn check_gamma(g: f64) -> Result<()> {
    if g.is_nan() || g < 0.0 {
        Err(Error::domain(format!("SNR argument must be >= 0, got {g}")))
    } else {
        Ok(())
    }
}

impl SnrDistribution {
    /// `c_param` is only used by [`LinkKind::Af`].
    pub fn new(
        kind: LinkKind,
        sr: ShadowedRicianParams,
        ru: FisherFParams,
        gbar_sr: f64,
        gbar_ru: f64,
        c_param: f64,
    ) -> Result<Self> {
        let uses_sr = kind != LinkKind::Ru;
        let uses_ru = kind != LinkKind::Sr;
        if uses_sr && !(gbar_sr > 0.0 && gbar_sr.is_finite()) {
            return Err(Error::domain(format!(
                "gbar_sr must be positive, got {gbar_sr}"
            )));
        }
        if uses_ru && !(gbar_ru > 0.0 && gbar_ru.is_finite()) {
            return Err(Error::domain(format!(
                "gbar_ru must be positive, got {gbar_ru}"
            )));
        }
        if kind == LinkKind::Af && !(c_param >= 0.0 && c_param.is_finite()) {
            return Err(Error::domain(format!(
                "C must be non-negative, got {c_param}"
            )));
        }
        Ok(Self {
            kind,
            sr,
            ru,
            gbar_sr,
            gbar_ru,
            c_param,
            self_check: false,
            quad: QuadConfig::default(),
            policy: EvalPolicy::default(),
        })
    }

    pub fn sr(sr: ShadowedRicianParams, gbar: f64) -> Result<Self> {
        let ru = FisherFParams::normalized(1.0, 2.0)?;
        Self::new(LinkKind::Sr, sr, ru, gbar, 1.0, 0.0)
    }

    pub fn ru(ru: FisherFParams, gbar: f64) -> Result<Self> {
        let sr = ShadowedRicianParams::from_physical(0.5, 1, 0.0)?;
        Self::new(LinkKind::Ru, sr, ru, 1.0, gbar, 0.0)
    }

    /// Same hops and SNRs, different link kind.
    pub fn with_kind(&self, kind: LinkKind) -> Self {
        Self {
            kind,
            ..self.clone()
        }
    }

    pub fn with_gbar(&self, gbar_sr: f64, gbar_ru: f64) -> Result<Self> {
        let mut d = Self::new(
            self.kind,
            self.sr.clone(),
            self.ru.clone(),
            gbar_sr,
            gbar_ru,
            self.c_param,
        )?;
        d.self_check = self.self_check;
        d.quad = self.quad;
        d.policy = self.policy;
        Ok(d)
    }

    /// Fixes C.
    pub fn with_c_param(mut self, c: f64) -> Result<Self> {
        if !(c >= 0.0 && c.is_finite()) {
            return Err(Error::domain(format!("C must be non-negative, got {c}")));
        }
        self.c_param = c;
        Ok(self)
    }

    /// In self-check mode every AF CDF evaluation also evaluates the closed
    /// form of L and fails if the two disagree by more than 1e−6.
    pub fn with_self_check(mut self, on: bool) -> Self {
        self.self_check = on;
        self
    }

    pub fn with_quad(mut self, quad: QuadConfig) -> Self {
        self.quad = quad;
        self
    }

    pub fn kind(&self) -> LinkKind {
        self.kind
    }
    pub fn sr_params(&self) -> &ShadowedRicianParams {
        &self.sr
    }
    pub fn ru_params(&self) -> &FisherFParams {
        &self.ru
    }
    pub fn gbar_sr(&self) -> f64 {
        self.gbar_sr
    }
    pub fn gbar_ru(&self) -> f64 {
        self.gbar_ru
    }
    pub fn c_param(&self) -> f64 {
        self.c_param
    }
    pub fn quad_config(&self) -> &QuadConfig {
        &self.quad
    }
    pub fn policy(&self) -> &EvalPolicy {
        &self.policy
    }

    /// Leading exponent p of the CDF near zero, F(γ) ~ γ^p.
    pub fn cdf_origin_power(&self) -> f64 {
        match self.kind {
            LinkKind::Sr => 1.0,
            LinkKind::Ru => self.ru.m(),
            LinkKind::Af | LinkKind::Df => self.ru.m().min(1.0),
        }
    }

    /// Characteristic SNR scales of the link, used as quadrature breakpoints.
    pub fn scales(&self) -> Vec<f64> {
        let sr = self.gbar_sr / self.sr.decay();
        let ru = self.gbar_ru / self.ru.ratio_scale();
        match self.kind {
            LinkKind::Sr => vec![sr, 10.0 * sr],
            LinkKind::Ru => vec![ru],
            LinkKind::Af | LinkKind::Df => vec![sr.min(ru), sr, ru, 10.0 * sr],
        }
    }

    // ---- S-R hop ------------------------------------------------------

    pub fn pdf_sr(&self, g: f64) -> Result<f64> {
        check_gamma(g)?;
        Ok(self.sr.power_pdf(g / self.gbar_sr) / self.gbar_sr)
    }

    /// Weights w_k = α c_k k! / (β−δ)^{k+1}; they sum to 1.
    fn sr_cdf_weights(&self) -> Vec<f64> {
        let bd = self.sr.decay();
        self.sr
            .series_coefficients()
            .iter()
            .enumerate()
            .map(|(k, &ck)| self.sr.alpha() * ck * factorial(k as u32) / bd.powi(k as i32 + 1))
            .collect()
    }

    pub fn cdf_sr(&self, g: f64) -> Result<f64> {
        check_gamma(g)?;
        if g == 0.0 {
            return Ok(0.0);
        }
        if g.is_infinite() {
            return Ok(1.0);
        }
        let t = self.sr.decay() * g / self.gbar_sr;
        let mut f = 0.0;
        for (k, w) in self.sr_cdf_weights().into_iter().enumerate() {
            f += w * reg_lower_inc_gamma(k as f64 + 1.0, t)?;
        }
        Ok(f.clamp(0.0, 1.0))
    }

    /// 1 − F_SR(γ) without cancellation in the tail.
    pub fn ccdf_sr(&self, g: f64) -> Result<f64> {
        check_gamma(g)?;
        if g.is_infinite() {
            return Ok(0.0);
        }
        let t = self.sr.decay() * g / self.gbar_sr;
        let mut f = 0.0;
        for (k, w) in self.sr_cdf_weights().into_iter().enumerate() {
            f += w * reg_upper_inc_gamma(k as f64 + 1.0, t)?;
        }
        Ok(f.clamp(0.0, 1.0))
    }

    pub fn cdf_sr_asy(&self, g: f64) -> Result<f64> {
        check_gamma(g)?;
        let x = g / self.gbar_sr;
        let mut f = 0.0;
        for (k, &ck) in self.sr.series_coefficients().iter().enumerate() {
            f += ck / (k as f64 + 1.0) * x.powi(k as i32 + 1);
        }
        Ok(self.sr.alpha() * f)
    }

    // ---- R-U hop ------------------------------------------------------

    fn ru_y(&self, g: f64) -> f64 {
        self.ru.ratio_scale() * g / self.gbar_ru
    }

    pub fn pdf_ru(&self, g: f64) -> Result<f64> {
        check_gamma(g)?;
        let (m, ms) = (self.ru.m(), self.ru.m_s());
        if g == 0.0 {
            return if m > 1.0 {
                Ok(0.0)
            } else if m == 1.0 {
                Ok(self.ru.ratio_scale() / self.gbar_ru / beta(m, ms)?)
            } else {
                Err(Error::domain("R-U density is unbounded at 0 for m < 1"))
            };
        }
        if g.is_infinite() {
            return Ok(0.0);
        }
        let s = self.ru.ratio_scale() / self.gbar_ru;
        let y = s * g;
        let ln = m * s.ln() + (m - 1.0) * g.ln() - (m + ms) * y.ln_1p() - ln_beta(m, ms)?;
        Ok(ln.exp())
    }

    /// F_RU(γ) = I_{y/(1+y)}(m, m_s).
    pub fn cdf_ru(&self, g: f64) -> Result<f64> {
        check_gamma(g)?;
        if g == 0.0 {
            return Ok(0.0);
        }
        if g.is_infinite() {
            return Ok(1.0);
        }
        let y = self.ru_y(g);
        Ok(reg_inc_beta(y / (1.0 + y), self.ru.m(), self.ru.m_s())?)
    }

    pub fn ccdf_ru(&self, g: f64) -> Result<f64> {
        check_gamma(g)?;
        if g.is_infinite() {
            return Ok(0.0);
        }
        let y = self.ru_y(g);
        Ok(reg_inc_beta_complement(
            y / (1.0 + y),
            self.ru.m(),
            self.ru.m_s(),
        )?)
    }

    /// F_RU via y^m ₂F₁(m+m_s, m; m+1; −y) / (m B(m, m_s)).
    pub fn cdf_ru_hypergeometric(&self, g: f64) -> Result<f64> {
        check_gamma(g)?;
        if g == 0.0 {
            return Ok(0.0);
        }
        let (m, ms) = (self.ru.m(), self.ru.m_s());
        let y = self.ru_y(g);
        let f = gauss_2f1(m + ms, m, m + 1.0, -y)?;
        Ok((m * y.ln() - ln_beta(m, ms)?).exp() / m * f)
    }

    /// F_RU via G^{2,1}_{2,2}(1/y | 1−m, 1; m_s, 0) / (Γ(m) Γ(m_s)).
    pub fn cdf_ru_meijer(&self, g: f64) -> Result<f64> {
        check_gamma(g)?;
        if g == 0.0 {
            return Ok(0.0);
        }
        let (m, ms) = (self.ru.m(), self.ru.m_s());
        let y = self.ru_y(g);
        let spec = MeijerGSpec::new(2, 1, &[1.0 - m, 1.0], &[ms, 0.0])?;
        let ln_scale = -(ln_gamma(m)? + ln_gamma(ms)?);
        Ok(meijer_g_scaled(&spec, 1.0 / y, &self.policy, ln_scale)?)
    }

    pub fn cdf_ru_asy(&self, g: f64) -> Result<f64> {
        check_gamma(g)?;
        let (m, ms) = (self.ru.m(), self.ru.m_s());
        let y = self.ru_y(g);
        Ok(y.powf(m) / (m * beta(m, ms)?))
    }

    // ---- fixed-gain AF ------------------------------------------------

    /// L(γ) = ∫₀^∞ F_RU(Cγ/x) f_SR(x+γ) dx by adaptive quadrature.
    pub fn af_integral(&self, g: f64) -> Result<f64> {
        check_gamma(g)?;
        if g == 0.0 || self.c_param == 0.0 || g.is_infinite() {
            return Ok(0.0);
        }
        let cg = self.c_param * g;
        let s = self.ru.ratio_scale() / self.gbar_ru;
        let (m, ms) = (self.ru.m(), self.ru.m_s());
        let sr_scale = self.gbar_sr / self.sr.decay();
        let transition = s * cg;
        let layout = HalfLine::new(&[transition, 0.1 * sr_scale, sr_scale, 10.0 * sr_scale]);
        let integrand = |x: f64| -> f64 {
            let f_sr = self.sr.power_pdf((x + g) / self.gbar_sr) / self.gbar_sr;
            if f_sr == 0.0 {
                return 0.0;
            }
            let y = s * cg / x;
            let f_ru = if y.is_infinite() {
                1.0
            } else {
                reg_inc_beta(y / (1.0 + y), m, ms).unwrap_or(f64::NAN)
            };
            f_ru * f_sr
        };
        Ok(integrate_half_line(integrand, &layout, &self.quad)?.value)
    }

    /// L(γ) from its Meijer-G expansion,
    /// Λ Σ_k c_k/γ̄^{k+1} Σ_i C(k,i) a^{−(i+1)} γ^{k−i} G^{2,2}_{3,2}(Y | −i, 1−m, 1; m_s, 0).
    pub fn af_integral_closed(&self, g: f64) -> Result<f64> {
        check_gamma(g)?;
        if g == 0.0 || self.c_param == 0.0 {
            return Ok(0.0);
        }
        let (m, ms) = (self.ru.m(), self.ru.m_s());
        let bd = self.sr.decay();
        let a = bd / self.gbar_sr;
        let y_arg = self.gbar_sr / (bd * self.ru.ratio_scale() / self.gbar_ru * self.c_param * g);
        let ln_lambda = self.sr.alpha().ln() - a * g - ln_gamma(m)? - ln_gamma(ms)?;
        let mut total = 0.0;
        for (k, &ck) in self.sr.series_coefficients().iter().enumerate() {
            for i in 0..=k {
                let spec = MeijerGSpec::new(2, 2, &[-(i as f64), 1.0 - m, 1.0], &[ms, 0.0])?;
                let ln_pref =
                    ln_lambda - (k as f64 + 1.0) * self.gbar_sr.ln() - (i as f64 + 1.0) * a.ln()
                        + (k - i) as f64 * g.ln();
                let gv = meijer_g_scaled(&spec, y_arg, &self.policy, ln_pref)?;
                total += ck * binomial(k as u32, i as u32) * gv;
            }
        }
        Ok(total)
    }

    /// Both evaluations of L; the closed form is `None` when not evaluable.
    pub fn af_integral_both(&self, g: f64) -> Result<AfIntegral> {
        let quadrature = self.af_integral(g)?;
        let closed = match self.af_integral_closed(g) {
            Ok(v) => Some(v),
            Err(Error::SpecFun(SpecFunError::PrecisionLoss { .. }))
            | Err(Error::SpecFun(SpecFunError::Convergence { .. })) => None,
            Err(e) => return Err(e),
        };
        Ok(AfIntegral { quadrature, closed })
    }

    pub fn cdf_af(&self, g: f64) -> Result<f64> {
        check_gamma(g)?;
        let f_sr = self.cdf_sr(g)?;
        let l = if self.self_check {
            let both = self.af_integral_both(g)?;
            if let Some(c) = both.closed {
                let scale = both.quadrature.abs().max(1e-300);
                if (c - both.quadrature).abs() > 1e-6 * scale {
                    return Err(Error::Consistency(format!(
                        "AF integral at γ = {g}: quadrature {} vs closed form {c}",
                        both.quadrature
                    )));
                }
            }
            both.quadrature
        } else {
            self.af_integral(g)?
        };
        Ok((f_sr + l).clamp(0.0, 1.0))
    }

    pub fn cdf_af_asy(&self, g: f64) -> Result<f64> {
        check_gamma(g)?;
        let (m, ms) = (self.ru.m(), self.ru.m_s());
        let x = g / self.gbar_sr;
        let r = self.ru.ratio_scale() * self.c_param / self.gbar_ru;
        let mut f = 0.0;
        for (k, &ck) in self.sr.series_coefficients().iter().enumerate() {
            let kf = k as f64;
            if is_nonpositive_integer(m - kf - 1.0) {
                return Err(Error::SpecFun(SpecFunError::Pole {
                    func: "cdf_af_asy",
                    at: m - kf - 1.0,
                }));
            }
            let corr = gamma(m - kf - 1.0)? * gamma(ms + kf + 1.0)? / (gamma(ms)? * gamma(m)?);
            f += ck / (kf + 1.0) * x.powi(k as i32 + 1) * (1.0 + corr * r.powi(k as i32 + 1));
        }
        Ok(self.sr.alpha() * f)
    }

    // ---- DF -----------------------------------------------------------

    pub fn cdf_df(&self, g: f64) -> Result<f64> {
        let a = self.cdf_sr(g)?;
        let b = self.cdf_ru(g)?;
        Ok((a + b - a * b).clamp(0.0, 1.0))
    }

    pub fn pdf_df(&self, g: f64) -> Result<f64> {
        Ok(self.pdf_sr(g)? * self.ccdf_ru(g)? + self.pdf_ru(g)? * self.ccdf_sr(g)?)
    }

    pub fn cdf_df_asy(&self, g: f64) -> Result<f64> {
        Ok(self.cdf_sr_asy(g)? + self.cdf_ru_asy(g)?)
    }

    // ---- uniform interface -------------------------------------------

    pub fn cdf(&self, g: f64) -> Result<f64> {
        match self.kind {
            LinkKind::Sr => self.cdf_sr(g),
            LinkKind::Ru => self.cdf_ru(g),
            LinkKind::Af => self.cdf_af(g),
            LinkKind::Df => self.cdf_df(g),
        }
    }

    pub fn cdf_asy(&self, g: f64) -> Result<f64> {
        match self.kind {
            LinkKind::Sr => self.cdf_sr_asy(g),
            LinkKind::Ru => self.cdf_ru_asy(g),
            LinkKind::Af => self.cdf_af_asy(g),
            LinkKind::Df => self.cdf_df_asy(g),
        }
    }

    /// 1 − F(γ), evaluated without forming 1 − F where possible.
    pub fn ccdf(&self, g: f64) -> Result<f64> {
        match self.kind {
            LinkKind::Sr => self.ccdf_sr(g),
            LinkKind::Ru => self.ccdf_ru(g),
            LinkKind::Af => Ok((self.ccdf_sr(g)? - self.af_integral(g)?).max(0.0)),
            LinkKind::Df => Ok(self.ccdf_sr(g)? * self.ccdf_ru(g)?),
        }
    }

    /// Leading exponent of the density near zero, f(γ) ~ γ^p.
    pub fn pdf_origin_power(&self) -> f64 {
        match self.kind {
            LinkKind::Sr => 0.0,
            LinkKind::Ru => self.ru.m() - 1.0,
            LinkKind::Af | LinkKind::Df => (self.ru.m() - 1.0).min(0.0),
        }
    }

    /// Density; not available in closed form for AF.
    pub fn pdf(&self, g: f64) -> Result<f64> {
        match self.kind {
            LinkKind::Sr => self.pdf_sr(g),
            LinkKind::Ru => self.pdf_ru(g),
            LinkKind::Df => self.pdf_df(g),
            LinkKind::Af => Err(Error::domain("the AF link has no closed-form density")),
        }
    }

    pub fn has_pdf(&self) -> bool {
        self.kind != LinkKind::Af
    }
}
