//! Fading models of both hops and the link budget that turns geometry and
//! powers into average SNRs.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::specfun::{factorial, pochhammer};

/// Shadowed-Rician fading of the satellite → relay hop.
///
/// The power density is `α e^{−(β−δ)x} Σ_k c_k x^k` with a finite sum over
/// `k < Γ_s`, which is why Γ_s is restricted to integers.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ShadowedRicianParams {
    b_s: f64,
    gamma_s: u32,
    omega_sr: f64,
    alpha: f64,
    beta: f64,
    delta: f64,
}

impl ShadowedRicianParams {
    /// Derives (α, β, δ) from half the multipath power `b_s`, the Nakagami
    /// shadowing order Γ_s and the LoS power Ω_sr.
    pub fn from_physical(b_s: f64, gamma_s: u32, omega_sr: f64) -> Result<Self> {
        if !(b_s > 0.0 && b_s.is_finite()) {
            return Err(Error::domain(format!(
                "b_s must be positive and finite, got {b_s}"
            )));
        }
        if gamma_s == 0 {
            return Err(Error::domain("gamma_s must be a positive integer"));
        }
        if !(omega_sr >= 0.0 && omega_sr.is_finite()) {
            return Err(Error::domain(format!(
                "omega_sr must be >= 0, got {omega_sr}"
            )));
        }
        let two_b = 2.0 * b_s;
        let g = f64::from(gamma_s);
        let denom = two_b * g + omega_sr;
        let alpha = (two_b * g / denom).powi(gamma_s as i32) / two_b;
        let beta = 1.0 / two_b;
        let delta = omega_sr / (two_b * denom);
        if !(beta > delta) {
            return Err(Error::domain(format!(
                "beta ({beta}) must exceed delta ({delta})"
            )));
        }
        Ok(Self {
            b_s,
            gamma_s,
            omega_sr,
            alpha,
            beta,
            delta,
        })
    }

    pub fn b_s(&self) -> f64 {
        self.b_s
    }
    pub fn gamma_s(&self) -> u32 {
        self.gamma_s
    }
    pub fn omega_sr(&self) -> f64 {
        self.omega_sr
    }
    pub fn alpha(&self) -> f64 {
        self.alpha
    }
    pub fn beta(&self) -> f64 {
        self.beta
    }
    pub fn delta(&self) -> f64 {
        self.delta
    }
    /// β − δ, the exponential decay rate of the power density.
    pub fn decay(&self) -> f64 {
        self.beta - self.delta
    }

    /// Mean power E|h|² = Ω_sr + 2b_s.
    pub fn mean_power(&self) -> f64 {
        self.omega_sr + 2.0 * self.b_s
    }

    /// c_k = (−1)^k (1−Γ_s)_k δ^k / (k!)² for k = 0..Γ_s−1.
    pub fn series_coefficients(&self) -> Vec<f64> {
        let a = 1.0 - f64::from(self.gamma_s);
        (0..self.gamma_s)
            .map(|k| {
                let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
                let f = factorial(k);
                sign * pochhammer(a, k) * self.delta.powi(k as i32) / (f * f)
            })
            .collect()
    }

    /// Density of the unit-scale power |h|² at x ≥ 0.
    pub fn power_pdf(&self, x: f64) -> f64 {
        if x < 0.0 {
            return 0.0;
        }
        let c = self.series_coefficients();
        let mut poly = 0.0;
        for &ck in c.iter().rev() {
            poly = poly * x + ck;
        }
        self.alpha * (-self.decay() * x).exp() * poly
    }
}

/// Free-function form of [`ShadowedRicianParams::from_physical`].
pub fn shadowed_rician_from_physical(
    b_s: f64,
    gamma_s: u32,
    omega_sr: f64,
) -> Result<ShadowedRicianParams> {
    ShadowedRicianParams::from_physical(b_s, gamma_s, omega_sr)
}

/// Fisher–Snedecor F composite fading of the relay → ground hop.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FisherFParams {
    m: f64,
    m_s: f64,
    omega_s: f64,
    omega_m: f64,
}

impl FisherFParams {
    /// General parameterization with explicit Ω_m and Ω_s.
    pub fn new(m: f64, m_s: f64, omega_m: f64, omega_s: f64) -> Result<Self> {
        if !(m > 0.0 && m.is_finite()) {
            return Err(Error::domain(format!("m must be positive, got {m}")));
        }
        if !(m_s > 1.0 && m_s.is_finite()) {
            return Err(Error::domain(format!("m_s must exceed 1, got {m_s}")));
        }
        if !(omega_m > 0.0 && omega_m.is_finite() && omega_s > 0.0 && omega_s.is_finite()) {
            return Err(Error::domain(format!(
                "omega_m and omega_s must be positive, got {omega_m}, {omega_s}"
            )));
        }
        Ok(Self {
            m,
            m_s,
            omega_s,
            omega_m,
        })
    }

    /// Unit-mean parameterization: Ω_s = √(m_s/(m_s−1)), Ω_m = 1/Ω_s.
    pub fn normalized(m: f64, m_s: f64) -> Result<Self> {
        if !(m_s > 1.0 && m_s.is_finite()) {
            return Err(Error::domain(format!("m_s must exceed 1, got {m_s}")));
        }
        let omega_s = (m_s / (m_s - 1.0)).sqrt();
        Self::new(m, m_s, 1.0 / omega_s, omega_s)
    }

    pub fn m(&self) -> f64 {
        self.m
    }
    pub fn m_s(&self) -> f64 {
        self.m_s
    }
    pub fn omega_s(&self) -> f64 {
        self.omega_s
    }
    pub fn omega_m(&self) -> f64 {
        self.omega_m
    }
    /// Ω = Ω_m Ω_s.
    pub fn omega(&self) -> f64 {
        self.omega_m * self.omega_s
    }

    /// Mean power E|h|² = Ω_m m_s / (Ω_s (m_s − 1)); equals Ω under normalization.
    pub fn mean_power(&self) -> f64 {
        self.omega_m / self.omega_s * self.m_s / (self.m_s - 1.0)
    }

    /// Scale that maps a power γ/γ̄ to the F-ratio variable,
    /// y = m Ω_s γ / (m_s Ω_m γ̄).
    pub fn ratio_scale(&self) -> f64 {
        self.m * self.omega_s / (self.m_s * self.omega_m)
    }
}

/// Free-function form of [`FisherFParams::normalized`].
pub fn fisher_f_normalized(m: f64, m_s: f64) -> Result<FisherFParams> {
    FisherFParams::normalized(m, m_s)
}

/// Powers, noise, geometry and propagation constants of both hops.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LinkBudget {
    /// Satellite transmit power, dBm.
    pub p_s: f64,
    /// Relay transmit power, dBm.
    pub p_r: f64,
    /// Noise variance of the S-R hop, dBm.
    pub sigma2_sr: f64,
    /// Noise variance of the R-U hop, dBm.
    pub sigma2_ru: f64,
    pub d_sr: f64,
    pub altitude_uav: f64,
    pub d_u: f64,
    pub wavelength: f64,
    pub alpha_p: f64,
    pub elevation_deg: f64,
    pub s_curve_a: f64,
    pub s_curve_b: f64,
    pub eta_los_db: f64,
    pub eta_nlos_db: f64,
}

impl Default for LinkBudget {
    fn default() -> Self {
        Self {
            p_s: 30.0,
            p_r: 30.0,
            sigma2_sr: -94.0,
            sigma2_ru: -94.0,
            d_sr: 765e3,
            altitude_uav: 150.0,
            d_u: 150.0,
            wavelength: 0.2,
            alpha_p: 2.0,
            elevation_deg: 45.0,
            s_curve_a: 4.88,
            s_curve_b: 0.43,
            eta_los_db: 0.1,
            eta_nlos_db: 20.0,
        }
    }
}

impl LinkBudget {
    pub fn validate(&self) -> Result<()> {
        let finite = [
            ("p_s", self.p_s),
            ("p_r", self.p_r),
            ("sigma2_sr", self.sigma2_sr),
            ("sigma2_ru", self.sigma2_ru),
            ("eta_los_db", self.eta_los_db),
            ("eta_nlos_db", self.eta_nlos_db),
        ];
        for (name, v) in finite {
            if !v.is_finite() {
                return Err(Error::domain(format!("{name} must be finite")));
            }
        }
        let positive = [
            ("d_sr", self.d_sr),
            ("altitude_uav", self.altitude_uav),
            ("d_u", self.d_u),
            ("wavelength", self.wavelength),
            ("s_curve_a", self.s_curve_a),
            ("s_curve_b", self.s_curve_b),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::domain(format!("{name} must be positive, got {v}")));
            }
        }
        if !(2.0..=4.0).contains(&self.alpha_p) {
            return Err(Error::domain(format!(
                "alpha_p must lie in [2, 4], got {}",
                self.alpha_p
            )));
        }
        if !(self.elevation_deg > 0.0 && self.elevation_deg <= 90.0) {
            return Err(Error::domain(format!(
                "elevation_deg must lie in (0, 90], got {}",
                self.elevation_deg
            )));
        }
        Ok(())
    }

    /// Average SNR of the S-R hop from the link budget, P_s/(σ² PL_SR).
    /// PL_SR here is the λ/(4πd^{α_p}) ratio, far below one at orbital range,
    /// so the quotient is very large; scenarios usually fix γ̄_SR through
    /// `snr_override` instead.
    pub fn gbar_sr(&self) -> Result<f64> {
        Ok(average_snr(self.p_s, self.sigma2_sr, sr_path_loss(self)?))
    }

    /// Average SNR of the R-U hop from the link budget.
    pub fn gbar_ru(&self) -> Result<f64> {
        let pl = db_to_linear(ru_path_loss_db(self)?);
        Ok(average_snr(self.p_r, self.sigma2_ru, pl))
    }
}

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

pub fn linear_to_db(x: f64) -> f64 {
    10.0 * x.log10()
}

/// S-R path loss λ / (4π d^{α_p}) as a linear ratio.
pub fn sr_path_loss(lb: &LinkBudget) -> Result<f64> {
    if !(lb.d_sr > 0.0 && lb.wavelength > 0.0) {
        return Err(Error::domain("d_sr and wavelength must be positive"));
    }
    Ok(lb.wavelength / (4.0 * std::f64::consts::PI * lb.d_sr.powf(lb.alpha_p)))
}

/// S-curve line-of-sight probability 1 / (1 + a e^{−bθ + ab}).
pub fn los_probability(theta_deg: f64, a: f64, b: f64) -> Result<f64> {
    if !(theta_deg > 0.0 && theta_deg <= 90.0) {
        return Err(Error::domain(format!(
            "elevation must lie in (0, 90] degrees, got {theta_deg}"
        )));
    }
    if !(a > 0.0 && b > 0.0 && a.is_finite() && b.is_finite()) {
        return Err(Error::domain(format!(
            "S-curve constants must be positive, got a={a}, b={b}"
        )));
    }
    Ok(1.0 / (1.0 + a * (-b * theta_deg + a * b).exp()))
}

/// R-U path loss in dB: free-space loss plus LoS/NLoS-weighted excess loss.
pub fn ru_path_loss_db(lb: &LinkBudget) -> Result<f64> {
    if !(lb.d_u > 0.0 && lb.wavelength > 0.0) {
        return Err(Error::domain("d_u and wavelength must be positive"));
    }
    let fspl = 20.0 * (4.0 * std::f64::consts::PI * lb.d_u / lb.wavelength).log10();
    let p_los = los_probability(lb.elevation_deg, lb.s_curve_a, lb.s_curve_b)?;
    Ok(fspl + lb.eta_los_db * p_los + lb.eta_nlos_db * (1.0 - p_los))
}

/// γ̄ = P / (σ² PL) with P and σ² in dBm and PL a linear ratio.
pub fn average_snr(p_dbm: f64, sigma2_dbm: f64, pl: f64) -> f64 {
    db_to_linear(p_dbm - sigma2_dbm) / pl
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RelayScheme {
    #[serde(rename = "af")]
    FixedGainAf,
    #[serde(rename = "df")]
    Df,
}

/// Which of G or C the user set; the other is derived.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum GainSource {
    Gain,
    Constant,
}

/// Relay protocol plus the fixed-gain pair (G, C) tied by C = P_r / (G² σ²_SR).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RelayConfig {
    pub scheme: RelayScheme,
    pub gain_g: f64,
    pub c_param: f64,
    pub source: GainSource,
}

impl RelayConfig {
    /// C given directly. G is derived from P_r and σ²_SR (dBm).
    pub fn from_c(scheme: RelayScheme, c: f64, p_r_dbm: f64, sigma2_sr_dbm: f64) -> Result<Self> {
        if !(c >= 0.0 && c.is_finite()) {
            return Err(Error::domain(format!("C must be non-negative, got {c}")));
        }
        let ratio = db_to_linear(p_r_dbm - sigma2_sr_dbm);
        let gain_g = if c > 0.0 {
            (ratio / c).sqrt()
        } else {
            f64::INFINITY
        };
        Ok(Self {
            scheme,
            gain_g,
            c_param: c,
            source: GainSource::Constant,
        })
    }

    /// G given directly. C = P_r / (G² σ²_SR).
    pub fn from_gain(
        scheme: RelayScheme,
        g: f64,
        p_r_dbm: f64,
        sigma2_sr_dbm: f64,
    ) -> Result<Self> {
        if !(g > 0.0 && g.is_finite()) {
            return Err(Error::domain(format!("G must be positive, got {g}")));
        }
        let c = db_to_linear(p_r_dbm - sigma2_sr_dbm) / (g * g);
        Ok(Self {
            scheme,
            gain_g: g,
            c_param: c,
            source: GainSource::Gain,
        })
    }
}

/// Statistical delay-QoS requirement.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QosSpec {
    theta: f64,
    bandwidth_hz: f64,
    duration_s: f64,
}

impl QosSpec {
    pub fn new(theta: f64, bandwidth_hz: f64, duration_s: f64) -> Result<Self> {
        if !(theta > 0.0 && theta.is_finite()) {
            return Err(Error::domain(format!(
                "theta must be positive, got {theta}"
            )));
        }
        if !(bandwidth_hz > 0.0
            && duration_s > 0.0
            && bandwidth_hz.is_finite()
            && duration_s.is_finite())
        {
            return Err(Error::domain("bandwidth and duration must be positive"));
        }
        Ok(Self {
            theta,
            bandwidth_hz,
            duration_s,
        })
    }

    /// 20 MHz bandwidth and 2 ms blocks.
    pub fn with_theta(theta: f64) -> Result<Self> {
        Self::new(theta, 20e6, 2e-3)
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }
    pub fn bandwidth_hz(&self) -> f64 {
        self.bandwidth_hz
    }
    pub fn duration_s(&self) -> f64 {
        self.duration_s
    }
    /// Symbols per block, BT.
    pub fn bt(&self) -> f64 {
        self.bandwidth_hz * self.duration_s
    }
    /// β = BTθ / ln 2.
    pub fn beta_norm(&self) -> f64 {
        self.bt() * self.theta / std::f64::consts::LN_2
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shadowed_rician_section_five() {
        let p = shadowed_rician_from_physical(0.25, 2, 0.5).unwrap();
        assert!((p.alpha() - 8.0 / 9.0).abs() < 1e-15);
        assert!((p.beta() - 2.0).abs() < 1e-15);
        assert!((p.delta() - 2.0 / 3.0).abs() < 1e-15);
        assert!((p.mean_power() - 1.0).abs() < 1e-15);
        let c = p.series_coefficients();
        assert_eq!(c.len(), 2);
        assert!((c[0] - 1.0).abs() < 1e-15);
        assert!((c[1] - 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn shadowed_rician_without_los() {
        let p = shadowed_rician_from_physical(0.25, 2, 0.0).unwrap();
        assert_eq!(p.delta(), 0.0);
        assert!((p.alpha() - 2.0).abs() < 1e-15);
        assert!(shadowed_rician_from_physical(0.0, 2, 0.5).is_err());
        assert!(shadowed_rician_from_physical(0.25, 0, 0.5).is_err());
        assert!(shadowed_rician_from_physical(0.25, 1, -0.1).is_err());
    }

    #[test]
    fn fisher_normalization_table_values() {
        let f = fisher_f_normalized(1.0721, 2.0211).unwrap();
        assert!((f.omega_s() - 1.4069).abs() < 5e-5);
        assert!((f.omega_m() - 0.7107).abs() < 1e-4);
        assert!((f.omega() - 1.0).abs() < 1e-15);
        assert!((f.mean_power() - 1.0).abs() < 1e-14);
        let f = fisher_f_normalized(1.0, 1e6).unwrap();
        assert!((f.omega_s() - 1.0).abs() < 1e-6);
        assert!(fisher_f_normalized(1.0, 1.0).is_err());
        assert!(fisher_f_normalized(0.0, 2.0).is_err());
    }

    #[test]
    fn path_loss_scaling() {
        let mut lb = LinkBudget::default();
        lb.d_sr = 1000.0;
        let a = sr_path_loss(&lb).unwrap();
        lb.d_sr = 2000.0;
        let b = sr_path_loss(&lb).unwrap();
        assert!((b / a - 0.25).abs() < 1e-15);
        lb.d_sr = 1000.0;
        lb.alpha_p = 4.0;
        let c = sr_path_loss(&lb).unwrap();
        assert!((c / a - 1e-6).abs() < 1e-18);
        let lb = LinkBudget::default();
        let pl = sr_path_loss(&lb).unwrap();
        assert!((pl - 0.2 / (4.0 * std::f64::consts::PI * 7.65e5f64.powi(2))).abs() < 1e-28);
        assert!((pl - 2.72e-14).abs() < 5e-17);
    }

    #[test]
    fn los_probability_examples() {
        let (a, b) = (4.88, 0.43);
        assert!((los_probability(a, a, b).unwrap() - 1.0 / (1.0 + a)).abs() < 1e-15);
        // 1 / (1 + 4.88 e^{−17.2516})
        let p45 = los_probability(45.0, a, b).unwrap();
        assert!((p45 - 0.999_999_842_911).abs() < 1e-11, "{p45}");
        assert!(los_probability(90.0, a, b).unwrap() > 0.999_999);
        assert!(los_probability(0.0, a, b).is_err());
        assert!(los_probability(91.0, a, b).is_err());
    }

    #[test]
    fn ru_path_loss_example() {
        // Elevation at which P_LoS = 0.9985: θ = a + ln(a P / (1 − P)) / b.
        let mut lb = LinkBudget::default();
        let (a, b, p) = (lb.s_curve_a, lb.s_curve_b, 0.9985);
        lb.elevation_deg = a + (a * p / (1.0 - p)).ln() / b;
        assert!((los_probability(lb.elevation_deg, a, b).unwrap() - p).abs() < 1e-12);
        let pl = ru_path_loss_db(&lb).unwrap();
        assert!((pl - 79.615).abs() < 0.001, "{pl}");
        let mut flat = lb.clone();
        flat.eta_nlos_db = flat.eta_los_db;
        let fspl = 20.0 * (4.0 * std::f64::consts::PI * 150.0 / 0.2f64).log10();
        assert!((ru_path_loss_db(&flat).unwrap() - fspl - 0.1).abs() < 1e-12);
    }

    #[test]
    fn average_snr_units() {
        assert!((average_snr(-94.0, -94.0, 1.0) - 1.0).abs() < 1e-15);
        let r = average_snr(10.0, 0.0, 1.0) / average_snr(0.0, 0.0, 1.0);
        assert!((r - 10.0).abs() < 1e-12);
    }

    #[test]
    fn relay_gain_constant_roundtrip() {
        let r = RelayConfig::from_gain(RelayScheme::FixedGainAf, 2.0, 10.0, 0.0).unwrap();
        assert!((r.c_param - 2.5).abs() < 1e-12);
        let back = RelayConfig::from_c(RelayScheme::FixedGainAf, r.c_param, 10.0, 0.0).unwrap();
        assert!((back.gain_g - 2.0).abs() < 1e-12);
    }

    #[test]
    fn qos_exponent() {
        let q = QosSpec::with_theta(1e-2).unwrap();
        assert!((q.beta_norm() - 40000.0 * 1e-2 / std::f64::consts::LN_2).abs() < 1e-9);
        assert!(QosSpec::with_theta(0.0).is_err());
    }
}
