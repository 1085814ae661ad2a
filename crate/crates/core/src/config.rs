//! Scenario files: one TOML document per scenario, unknown keys rejected.

use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::channel::{
    db_to_linear, FisherFParams, LinkBudget, QosSpec, RelayConfig, RelayScheme,
    ShadowedRicianParams,
};
use crate::error::{Error, Result};
use crate::snr::{LinkKind, SnrDistribution};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SatelliteSection {
    /// Half the average multipath power.
    pub b_s: f64,
    /// Nakagami shape of the LoS amplitude.
    pub gamma_s: u32,
    pub omega_sr: f64,
    pub p_s_dbm: f64,
    /// Slant range to the UAV, meters.
    pub d_sr_m: f64,
    pub alpha_p: f64,
    pub wavelength_m: f64,
}

impl Default for SatelliteSection {
    fn default() -> Self {
        let lb = LinkBudget::default();
        Self {
            b_s: 0.25,
            gamma_s: 2,
            omega_sr: 0.5,
            p_s_dbm: lb.p_s,
            d_sr_m: lb.d_sr,
            alpha_p: lb.alpha_p,
            wavelength_m: lb.wavelength,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct UavSection {
    pub altitude_m: f64,
    pub p_r_dbm: f64,
    /// Receiver noise at the relay.
    pub sigma2_dbm: f64,
}

impl Default for UavSection {
    fn default() -> Self {
        let lb = LinkBudget::default();
        Self {
            altitude_m: lb.altitude_uav,
            p_r_dbm: lb.p_r,
            sigma2_dbm: lb.sigma2_sr,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GroundSection {
    pub m: f64,
    pub m_s: f64,
    /// When absent, Ω_m and Ω_s follow the unit-mean normalization.
    pub omega_m: Option<f64>,
    pub omega_s: Option<f64>,
    pub d_u_m: f64,
    pub elevation_deg: f64,
    pub s_curve_a: f64,
    pub s_curve_b: f64,
    pub eta_los_db: f64,
    pub eta_nlos_db: f64,
    pub sigma2_dbm: f64,
}

impl Default for GroundSection {
    fn default() -> Self {
        let lb = LinkBudget::default();
        Self {
            m: 1.1,
            m_s: 2.1,
            omega_m: None,
            omega_s: None,
            d_u_m: lb.d_u,
            elevation_deg: lb.elevation_deg,
            s_curve_a: lb.s_curve_a,
            s_curve_b: lb.s_curve_b,
            eta_los_db: lb.eta_los_db,
            eta_nlos_db: lb.eta_nlos_db,
            sigma2_dbm: lb.sigma2_ru,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RelaySection {
    pub scheme: RelayScheme,
    /// Fixed-gain constant C. Mutually exclusive with `gain_g`.
    pub c_param: Option<f64>,
    pub gain_g: Option<f64>,
}

impl Default for RelaySection {
    fn default() -> Self {
        Self {
            scheme: RelayScheme::FixedGainAf,
            c_param: None,
            gain_g: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct QosSection {
    pub theta: f64,
    pub bandwidth_hz: f64,
    pub duration_s: f64,
    pub gamma_th_db: f64,
    pub epsilon: f64,
}

impl Default for QosSection {
    fn default() -> Self {
        Self {
            theta: 1e-2,
            bandwidth_hz: 20e6,
            duration_s: 2e-3,
            gamma_th_db: 10.0,
            epsilon: 1e-2,
        }
    }
}

/// Direct average SNRs, bypassing the link budget. `lambda` sets
/// γ̄_RU = λ γ̄_SR when `gbar_ru_db` is absent. With `enabled = false` both
/// SNRs come from the link budget.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SnrOverrideSection {
    pub enabled: bool,
    pub gbar_sr_db: Option<f64>,
    pub gbar_ru_db: Option<f64>,
    pub lambda: Option<f64>,
}

impl Default for SnrOverrideSection {
    fn default() -> Self {
        Self {
            enabled: true,
            gbar_sr_db: Some(20.0),
            gbar_ru_db: None,
            lambda: Some(1.0),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(default, deny_unknown_fields)]
pub struct Scenario {
    pub satellite: SatelliteSection,
    pub uav: UavSection,
    pub ground: GroundSection,
    pub relay: RelaySection,
    pub qos: QosSection,
    pub snr_override: SnrOverrideSection,
}

impl Scenario {
    pub fn from_toml(text: &str) -> Result<Self> {
        let s: Scenario = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        s.validate()?;
        Ok(s)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_toml(&text).map_err(|e| match e {
            Error::Config(msg) => Error::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("scenario serializes")
    }

    /// SHA-256 of the canonical serialization.
    pub fn hash_hex(&self) -> String {
        let digest = Sha256::digest(self.to_toml().as_bytes());
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }

    pub fn validate(&self) -> Result<()> {
        let field = |name: &str, e: Error| Error::Config(format!("{name}: {e}"));
        self.link_budget()
            .validate()
            .map_err(|e| field("link budget", e))?;
        self.sr_params().map_err(|e| field("satellite", e))?;
        self.ru_params().map_err(|e| field("ground", e))?;
        self.relay_config().map_err(|e| field("relay", e))?;
        self.qos_spec().map_err(|e| field("qos", e))?;
        let q = &self.qos;
        if !q.gamma_th_db.is_finite() {
            return Err(Error::Config("qos.gamma_th_db must be finite".into()));
        }
        if !(q.epsilon > 0.0 && q.epsilon < 1.0) {
            return Err(Error::Config(format!(
                "qos.epsilon must lie in (0, 1), got {}",
                q.epsilon
            )));
        }
        let o = &self.snr_override;
        if let Some(l) = o.lambda {
            if !(l > 0.0 && l.is_finite()) {
                return Err(Error::Config(format!(
                    "snr_override.lambda must be positive, got {l}"
                )));
            }
        }
        for (name, v) in [("gbar_sr_db", o.gbar_sr_db), ("gbar_ru_db", o.gbar_ru_db)] {
            if let Some(v) = v {
                if !v.is_finite() {
                    return Err(Error::Config(format!("snr_override.{name} must be finite")));
                }
            }
        }
        Ok(())
    }

    pub fn link_budget(&self) -> LinkBudget {
        LinkBudget {
            p_s: self.satellite.p_s_dbm,
            p_r: self.uav.p_r_dbm,
            sigma2_sr: self.uav.sigma2_dbm,
            sigma2_ru: self.ground.sigma2_dbm,
            d_sr: self.satellite.d_sr_m,
            altitude_uav: self.uav.altitude_m,
            d_u: self.ground.d_u_m,
            wavelength: self.satellite.wavelength_m,
            alpha_p: self.satellite.alpha_p,
            elevation_deg: self.ground.elevation_deg,
            s_curve_a: self.ground.s_curve_a,
            s_curve_b: self.ground.s_curve_b,
            eta_los_db: self.ground.eta_los_db,
            eta_nlos_db: self.ground.eta_nlos_db,
        }
    }

    pub fn sr_params(&self) -> Result<ShadowedRicianParams> {
        let s = &self.satellite;
        ShadowedRicianParams::from_physical(s.b_s, s.gamma_s, s.omega_sr)
    }

    pub fn ru_params(&self) -> Result<FisherFParams> {
        let g = &self.ground;
        match (g.omega_m, g.omega_s) {
            (None, None) => FisherFParams::normalized(g.m, g.m_s),
            (Some(om), Some(os)) => FisherFParams::new(g.m, g.m_s, om, os),
            _ => Err(Error::domain("set both omega_m and omega_s, or neither")),
        }
    }

    pub fn relay_config(&self) -> Result<RelayConfig> {
        let r = &self.relay;
        match (r.c_param, r.gain_g) {
            (Some(_), Some(_)) => Err(Error::domain("set c_param or gain_g, not both")),
            (None, Some(g)) => {
                RelayConfig::from_gain(r.scheme, g, self.uav.p_r_dbm, self.uav.sigma2_dbm)
            }
            (c, None) => RelayConfig::from_c(
                r.scheme,
                c.unwrap_or(1.0),
                self.uav.p_r_dbm,
                self.uav.sigma2_dbm,
            ),
        }
    }

    pub fn qos_spec(&self) -> Result<QosSpec> {
        QosSpec::new(self.qos.theta, self.qos.bandwidth_hz, self.qos.duration_s)
    }

    pub fn gamma_th(&self) -> f64 {
        db_to_linear(self.qos.gamma_th_db)
    }

    /// (γ̄_SR, γ̄_RU), linear.
    pub fn gbars(&self) -> Result<(f64, f64)> {
        let o = &self.snr_override;
        let lb = self.link_budget();
        if !o.enabled {
            return Ok((lb.gbar_sr()?, lb.gbar_ru()?));
        }
        let sr = match o.gbar_sr_db {
            Some(db) => db_to_linear(db),
            None => lb.gbar_sr()?,
        };
        let ru = match (o.gbar_ru_db, o.lambda) {
            (Some(db), _) => db_to_linear(db),
            (None, Some(l)) => l * sr,
            (None, None) => lb.gbar_ru()?,
        };
        Ok((sr, ru))
    }

    pub fn distribution(&self, kind: LinkKind) -> Result<SnrDistribution> {
        let (sr, ru) = self.gbars()?;
        SnrDistribution::new(
            kind,
            self.sr_params()?,
            self.ru_params()?,
            sr,
            ru,
            self.relay_config()?.c_param,
        )
    }

    /// Same scenario at γ̄_SR = `gbar_db`, γ̄_RU following λ (default 1).
    pub fn with_gbar_db(&self, gbar_db: f64) -> Self {
        let mut s = self.clone();
        s.snr_override.enabled = true;
        s.snr_override.gbar_sr_db = Some(gbar_db);
        if s.snr_override.gbar_ru_db.is_some() {
            s.snr_override.gbar_ru_db = None;
        }
        s.snr_override.lambda.get_or_insert(1.0);
        s
    }

    pub fn with_ru_shapes(&self, m: f64, m_s: f64) -> Self {
        let mut s = self.clone();
        s.ground.m = m;
        s.ground.m_s = m_s;
        s.ground.omega_m = None;
        s.ground.omega_s = None;
        s
    }

    pub fn with_lambda(&self, lambda: f64) -> Self {
        let mut s = self.clone();
        s.snr_override.enabled = true;
        s.snr_override.lambda = Some(lambda);
        s.snr_override.gbar_ru_db = None;
        s
    }
}
