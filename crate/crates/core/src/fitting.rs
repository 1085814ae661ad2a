//! Measurement workflow: ingest received-power logs, remove log-distance path
//! loss, and fit Rayleigh, Nakagami-m and Fisher-Snedecor F envelope models
//! by least squares on the empirical CDF.

use std::io::Read;
use std::path::Path;

use argmin::core::{CostFunction, Executor, State};
use argmin::solver::neldermead::NelderMead;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channel::FisherFParams;
use crate::error::{Error, Result};
use crate::mcsim::{sample_fisher_f_power, EmpiricalCdf, SimConfig};
use crate::specfun::{reg_inc_beta, reg_lower_inc_gamma};

pub const DEFAULT_ALPHA: f64 = 2.7;
pub const MIN_FIT_SAMPLES: usize = 50;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum MeasurementData {
    /// (distance in meters, received power in dBm) pairs.
    Power(Vec<(f64, f64)>),
    /// Envelope samples that are already path-loss free.
    Envelope(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeasurementSet {
    pub label: String,
    pub data: MeasurementData,
}

impl MeasurementSet {
    pub fn len(&self) -> usize {
        match &self.data {
            MeasurementData::Power(v) => v.len(),
            MeasurementData::Envelope(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

fn ingest(line: u64, detail: impl Into<String>) -> Error {
    Error::Ingest {
        line: line as usize,
        detail: detail.into(),
    }
}

/// Parses a delimited log with a header row. Columns are either
/// `distance_m, rx_power_dbm` or `envelope`; lines starting with '#' are
/// comments. Errors carry the 1-based line number of the offending row.
pub fn read_measurements<R: Read>(reader: R, label: &str) -> Result<MeasurementSet> {
    let mut rdr = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .flexible(false)
        .from_reader(reader);
    let headers = rdr.headers().map_err(|e| ingest(1, e.to_string()))?.clone();
    let col = |name: &str| headers.iter().position(|h| h == name);
    let power_cols = col("distance_m").zip(col("rx_power_dbm"));
    let env_col = col("envelope");
    if power_cols.is_none() && env_col.is_none() {
        return Err(ingest(
            1,
            format!(
                "header must name distance_m and rx_power_dbm, or envelope; found \"{}\"",
                headers.iter().collect::<Vec<_>>().join(",")
            ),
        ));
    }
    let mut power = Vec::new();
    let mut env = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| {
            let line = e.position().map(|p| p.line()).unwrap_or(0);
            ingest(line, e.to_string())
        })?;
        let line = rec.position().map(|p| p.line()).unwrap_or(0);
        let num = |i: usize, what: &str| -> Result<f64> {
            let field = rec.get(i).unwrap_or("");
            let v: f64 = field
                .parse()
                .map_err(|_| ingest(line, format!("{what}: cannot parse {field:?} as a number")))?;
            if !v.is_finite() {
                return Err(ingest(line, format!("{what}: non-finite value {field:?}")));
            }
            Ok(v)
        };
        if let Some((d, p)) = power_cols {
            let dist = num(d, "distance_m")?;
            if dist <= 0.0 {
                return Err(ingest(
                    line,
                    format!("distance_m must be positive, got {dist}"),
                ));
            }
            power.push((dist, num(p, "rx_power_dbm")?));
        } else if let Some(e) = env_col {
            let v = num(e, "envelope")?;
            if v <= 0.0 {
                return Err(ingest(line, format!("envelope must be positive, got {v}")));
            }
            env.push(v);
        }
    }
    let data = if power_cols.is_some() {
        MeasurementData::Power(power)
    } else {
        MeasurementData::Envelope(env)
    };
    Ok(MeasurementSet {
        label: label.to_string(),
        data,
    })
}

pub fn read_measurements_file(path: &Path) -> Result<MeasurementSet> {
    let f = std::fs::File::open(path)?;
    let label = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    read_measurements(f, &label)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Compensated {
    /// Envelope samples with unit RMS.
    pub envelope: Vec<f64>,
    /// Records closer than d₀, where the log-distance model extrapolates.
    pub below_d0: usize,
}

/// Removes the log-distance loss 10α log₁₀(d/d₀) (i.e. adds it back to the
/// received power), converts to linear envelope and normalizes to unit RMS.
pub fn compensate_path_loss(ms: &MeasurementSet, alpha: f64, d0: f64) -> Result<Compensated> {
    if !(alpha > 0.0 && alpha.is_finite()) {
        return Err(Error::domain(format!(
            "path-loss exponent must be positive, got {alpha}"
        )));
    }
    if !(d0 > 0.0 && d0.is_finite()) {
        return Err(Error::domain(format!(
            "reference distance must be positive, got {d0}"
        )));
    }
    let (mut env, below_d0) = match &ms.data {
        MeasurementData::Envelope(v) => (v.clone(), 0),
        MeasurementData::Power(recs) => {
            let below = recs.iter().filter(|(d, _)| *d < d0).count();
            let env = recs
                .iter()
                .map(|&(d, p)| {
                    let db = p + 10.0 * alpha * (d / d0).log10();
                    10f64.powf(db / 20.0)
                })
                .collect();
            (env, below)
        }
    };
    if env.is_empty() {
        return Err(Error::domain("no measurement records"));
    }
    let rms = (env.iter().map(|v| v * v).sum::<f64>() / env.len() as f64).sqrt();
    env.iter_mut().for_each(|v| *v /= rms);
    Ok(Compensated {
        envelope: env,
        below_d0,
    })
}

// ---- models -------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FitModel {
    Rayleigh,
    Nakagami,
    FisherF,
}

impl FitModel {
    pub const ALL: [FitModel; 3] = [FitModel::Rayleigh, FitModel::Nakagami, FitModel::FisherF];

    pub fn name(self) -> &'static str {
        match self {
            FitModel::Rayleigh => "rayleigh",
            FitModel::Nakagami => "nakagami",
            FitModel::FisherF => "fisher_f",
        }
    }
}

impl std::str::FromStr for FitModel {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "rayleigh" => Ok(FitModel::Rayleigh),
            "nakagami" => Ok(FitModel::Nakagami),
            "fisher_f" | "fisherf" | "fisher-f" | "f" => Ok(FitModel::FisherF),
            _ => Err(Error::Config(format!("unknown fading model {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "snake_case")]
pub enum FitParams {
    Rayleigh {
        s: f64,
    },
    Nakagami {
        m: f64,
        omega: f64,
    },
    FisherF {
        m: f64,
        m_s: f64,
        omega_m: f64,
        omega_s: f64,
    },
}

impl FitParams {
    pub fn model(&self) -> FitModel {
        match self {
            FitParams::Rayleigh { .. } => FitModel::Rayleigh,
            FitParams::Nakagami { .. } => FitModel::Nakagami,
            FitParams::FisherF { .. } => FitModel::FisherF,
        }
    }

    fn as_vec(&self) -> Vec<f64> {
        match *self {
            FitParams::Rayleigh { s } => vec![s],
            FitParams::Nakagami { m, omega } => vec![m, omega],
            FitParams::FisherF {
                m,
                m_s,
                omega_m,
                omega_s,
            } => vec![m, m_s, omega_m, omega_s],
        }
    }

    /// Envelope CDF F(r) of the model.
    pub fn envelope_cdf(&self, r: f64) -> Result<f64> {
        if r <= 0.0 {
            return Ok(0.0);
        }
        let x = r * r;
        match *self {
            FitParams::Rayleigh { s } => Ok(-(-x / (2.0 * s * s)).exp_m1()),
            FitParams::Nakagami { m, omega } => Ok(reg_lower_inc_gamma(m, m * x / omega)?),
            FitParams::FisherF {
                m,
                m_s,
                omega_m,
                omega_s,
            } => {
                let y = m * omega_s / (m_s * omega_m) * x;
                Ok(reg_inc_beta(y / (1.0 + y), m, m_s)?)
            }
        }
    }
}

/// How the two F-model power parameters are handled. They enter the CDF
/// only through Ω_s/Ω_m, so the free mode fits the mean power Ω = Ω_mΩ_s and
/// reports Ω_s = √(m_s/(m_s−1)), Ω_m = Ω/Ω_s.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum OmegaMode {
    #[default]
    Free,
    /// Ω = 1.
    Normalized,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitOptions {
    pub n_grid: usize,
    pub starts: usize,
    pub seed: u64,
    pub max_iters: u64,
    pub omega_mode: OmegaMode,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self {
            n_grid: 200,
            starts: 16,
            seed: 0,
            max_iters: 600,
            omega_mode: OmegaMode::Free,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FitReport {
    pub model: FitModel,
    pub params: FitParams,
    pub mse: f64,
    pub n_grid: usize,
}

/// One bounded coordinate; `log` boxes are searched in log space.
#[derive(Debug, Clone, Copy)]
struct Bound {
    lo: f64,
    hi: f64,
    log: bool,
}

impl Bound {
    fn at_unit(&self, t: f64) -> f64 {
        if self.log {
            (self.lo.ln() + t * (self.hi.ln() - self.lo.ln())).exp()
        } else {
            self.lo + t * (self.hi - self.lo)
        }
    }

    /// Maps an unconstrained coordinate into the box.
    fn at_free(&self, u: f64) -> f64 {
        self.at_unit(1.0 / (1.0 + (-u).exp()))
    }

    fn unit_to_free(t: f64) -> f64 {
        let t = t.clamp(1e-6, 1.0 - 1e-6);
        (t / (1.0 - t)).ln()
    }
}

#[derive(Clone)]
struct Objective<'a> {
    model: FitModel,
    bounds: Vec<Bound>,
    omega_mode: OmegaMode,
    grid: &'a [(f64, f64)],
}

impl Objective<'_> {
    fn params(&self, u: &[f64]) -> FitParams {
        let v: Vec<f64> = u
            .iter()
            .zip(&self.bounds)
            .map(|(&u, b)| b.at_free(u))
            .collect();
        self.params_from(&v)
    }

    fn params_from(&self, v: &[f64]) -> FitParams {
        match self.model {
            FitModel::Rayleigh => FitParams::Rayleigh { s: v[0] },
            FitModel::Nakagami => FitParams::Nakagami {
                m: v[0],
                omega: v[1],
            },
            FitModel::FisherF => {
                let (m, m_s) = (v[0], v[1]);
                let omega = match self.omega_mode {
                    OmegaMode::Free => v[2],
                    OmegaMode::Normalized => 1.0,
                };
                let omega_s = (m_s / (m_s - 1.0)).sqrt();
                FitParams::FisherF {
                    m,
                    m_s,
                    omega_m: omega / omega_s,
                    omega_s,
                }
            }
        }
    }

    fn mse(&self, p: &FitParams) -> f64 {
        let mut s = 0.0;
        for &(x, fhat) in self.grid {
            match p.envelope_cdf(x) {
                Ok(f) => s += (fhat - f).powi(2),
                Err(_) => return f64::INFINITY,
            }
        }
        s / self.grid.len() as f64
    }
}

impl CostFunction for Objective<'_> {
    type Param = Vec<f64>;
    type Output = f64;

    fn cost(&self, u: &Self::Param) -> std::result::Result<f64, argmin::core::Error> {
        Ok(self.mse(&self.params(u)))
    }
}

fn bounds_for(model: FitModel, mode: OmegaMode, mean_sq: f64) -> Vec<Bound> {
    let shape = Bound {
        lo: 0.05,
        hi: 20.0,
        log: true,
    };
    let power = Bound {
        lo: 0.01 * mean_sq,
        hi: 100.0 * mean_sq,
        log: true,
    };
    match model {
        FitModel::Rayleigh => vec![Bound {
            lo: 0.01 * mean_sq.sqrt(),
            hi: 10.0 * mean_sq.sqrt(),
            log: true,
        }],
        FitModel::Nakagami => vec![shape, power],
        FitModel::FisherF => {
            let ms = Bound {
                lo: 1.0001,
                hi: 50.0,
                log: true,
            };
            match mode {
                OmegaMode::Free => vec![shape, ms, power],
                OmegaMode::Normalized => vec![shape, ms],
            }
        }
    }
}

/// Latin-hypercube points in the unit cube.
fn latin_hypercube(n: usize, dim: usize, rng: &mut ChaCha8Rng) -> Vec<Vec<f64>> {
    let mut pts = vec![vec![0.0; dim]; n];
    for d in 0..dim {
        let mut strata: Vec<usize> = (0..n).collect();
        strata.shuffle(rng);
        for (i, s) in strata.into_iter().enumerate() {
            pts[i][d] = (s as f64 + rng.random::<f64>()) / n as f64;
        }
    }
    pts
}

fn nelder_mead(
    obj: &Objective<'_>,
    start: Vec<f64>,
    step: f64,
    iters: u64,
) -> Option<(Vec<f64>, f64)> {
    let mut simplex = vec![start.clone()];
    for j in 0..start.len() {
        let mut p = start.clone();
        p[j] += step;
        simplex.push(p);
    }
    let solver = NelderMead::new(simplex).with_sd_tolerance(1e-15).ok()?;
    let res = Executor::new(obj.clone(), solver)
        .configure(|s| s.max_iters(iters))
        .run()
        .ok()?;
    let st = res.state();
    let best = st.get_best_param()?.clone();
    let cost = st.get_best_cost();
    cost.is_finite().then_some((best, cost))
}

/// Least-squares fit of `model` to envelope `samples`: minimizes the mean
/// squared CDF gap over `n_grid` quantile-spaced points, from `starts`
/// Latin-hypercube starting points. The best start wins, ties broken by
/// lexicographic parameter order.
pub fn fit_model(samples: &[f64], model: FitModel, opts: &FitOptions) -> Result<FitReport> {
    if samples.len() < MIN_FIT_SAMPLES {
        return Err(Error::domain(format!(
            "fitting needs at least {MIN_FIT_SAMPLES} samples, got {}",
            samples.len()
        )));
    }
    if samples.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
        return Err(Error::domain(
            "envelope samples must be positive and finite",
        ));
    }
    if opts.n_grid < 2 || opts.starts == 0 {
        return Err(Error::domain("fit needs n_grid ≥ 2 and at least one start"));
    }
    let ecdf = EmpiricalCdf::new(samples.to_vec())?;
    let grid: Vec<(f64, f64)> = (0..opts.n_grid)
        .map(|i| {
            let x = ecdf.quantile((i as f64 + 0.5) / opts.n_grid as f64);
            (x, ecdf.eval(x))
        })
        .collect();
    let mean_sq = samples.iter().map(|v| v * v).sum::<f64>() / samples.len() as f64;
    let obj = Objective {
        model,
        bounds: bounds_for(model, opts.omega_mode, mean_sq),
        omega_mode: opts.omega_mode,
        grid: &grid,
    };
    let dim = obj.bounds.len();
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let starts = latin_hypercube(opts.starts, dim, &mut rng);
    let runs: Vec<Option<(Vec<f64>, f64)>> = starts
        .par_iter()
        .map(|t| {
            let u0: Vec<f64> = t.iter().map(|&t| Bound::unit_to_free(t)).collect();
            let (u1, _) = nelder_mead(&obj, u0, 0.5, opts.max_iters)?;
            // A restart from the first optimum escapes premature collapse.
            nelder_mead(&obj, u1, 0.05, opts.max_iters)
        })
        .collect();
    let mut best: Option<(FitParams, f64)> = None;
    for (u, cost) in runs.into_iter().flatten() {
        let p = obj.params(&u);
        let better = match &best {
            None => true,
            Some((bp, bc)) => {
                cost < *bc
                    || (cost == *bc
                        && p.as_vec().partial_cmp(&bp.as_vec()) == Some(std::cmp::Ordering::Less))
            }
        };
        if better {
            best = Some((p, cost));
        }
    }
    let (params, mse) = best.ok_or_else(|| {
        Error::Fit(format!(
            "all {} starts failed for {}",
            opts.starts,
            model.name()
        ))
    })?;
    Ok(FitReport {
        model,
        params,
        mse,
        n_grid: opts.n_grid,
    })
}

/// Fits every model family and returns the reports in [`FitModel::ALL`] order.
pub fn fit_all(samples: &[f64], opts: &FitOptions) -> Result<Vec<FitReport>> {
    FitModel::ALL
        .iter()
        .map(|&m| fit_model(samples, m, opts))
        .collect()
}

/// Aligned text table in the layout of a parameter-estimate summary.
pub fn format_table(label: &str, reports: &[FitReport]) -> String {
    let mut out = format!(
        "{:<20} {:>8} {:>8} {:>8} {:>8} {:>10} | {:>8} {:>8} {:>10} | {:>8} {:>10}\n",
        "location",
        "m",
        "m_s",
        "Omega_m",
        "Omega_s",
        "MSE_F",
        "m_nak",
        "Omega",
        "MSE_nak",
        "s",
        "MSE_ray"
    );
    let find = |m: FitModel| reports.iter().find(|r| r.model == m);
    let fmt_f = match find(FitModel::FisherF) {
        Some(FitReport {
            params:
                FitParams::FisherF {
                    m,
                    m_s,
                    omega_m,
                    omega_s,
                },
            mse,
            ..
        }) => format!("{m:>8.4} {m_s:>8.4} {omega_m:>8.4} {omega_s:>8.4} {mse:>10.3e}"),
        _ => format!("{:>8} {:>8} {:>8} {:>8} {:>10}", "-", "-", "-", "-", "-"),
    };
    let fmt_n = match find(FitModel::Nakagami) {
        Some(FitReport {
            params: FitParams::Nakagami { m, omega },
            mse,
            ..
        }) => format!("{m:>8.4} {omega:>8.4} {mse:>10.3e}"),
        _ => format!("{:>8} {:>8} {:>10}", "-", "-", "-"),
    };
    let fmt_r = match find(FitModel::Rayleigh) {
        Some(FitReport {
            params: FitParams::Rayleigh { s },
            mse,
            ..
        }) => format!("{s:>8.4} {mse:>10.3e}"),
        _ => format!("{:>8} {:>10}", "-", "-"),
    };
    out += &format!("{label:<20} {fmt_f} | {fmt_n} | {fmt_r}\n");
    out
}

// ---- synthetic data -------------------------------------------------------

/// Envelope samples drawn from `params`.
pub fn synthesize_envelope(params: &FitParams, n: usize, seed: u64) -> Result<Vec<f64>> {
    let cfg = SimConfig::new(n, seed);
    let power = match *params {
        FitParams::FisherF {
            m,
            m_s,
            omega_m,
            omega_s,
        } => sample_fisher_f_power(&FisherFParams::new(m, m_s, omega_m, omega_s)?, &cfg)?,
        FitParams::Nakagami { m, omega } => gamma_power(m, omega / m, n, seed)?,
        FitParams::Rayleigh { s } => gamma_power(1.0, 2.0 * s * s, n, seed)?,
    };
    Ok(power.into_iter().map(f64::sqrt).collect())
}

fn gamma_power(shape: f64, scale: f64, n: usize, seed: u64) -> Result<Vec<f64>> {
    use rand_distr::{Distribution, Gamma};
    let g = Gamma::new(shape, scale)
        .map_err(|e| Error::domain(format!("gamma({shape}, {scale}): {e}")))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok((0..n).map(|_| g.sample(&mut rng)).collect())
}

/// A received-power log: distances uniform on [d₀, 10d₀], power
/// p₀ − 10α log₁₀(d/d₀) dBm plus fading drawn from `params`.
pub fn synthesize_power_log(
    params: &FitParams,
    n: usize,
    alpha: f64,
    d0: f64,
    p0_dbm: f64,
    seed: u64,
    label: &str,
) -> Result<MeasurementSet> {
    let env = synthesize_envelope(params, n, seed)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed_d157);
    let recs = env
        .into_iter()
        .map(|r| {
            let d = d0 * (1.0 + 9.0 * rng.random::<f64>());
            (
                d,
                p0_dbm - 10.0 * alpha * (d / d0).log10() + 20.0 * r.log10(),
            )
        })
        .collect();
    Ok(MeasurementSet {
        label: label.to_string(),
        data: MeasurementData::Power(recs),
    })
}

/// Writes a power log in the format read by [`read_measurements`].
pub fn write_power_log<W: std::io::Write>(ms: &MeasurementSet, w: W) -> Result<()> {
    let MeasurementData::Power(recs) = &ms.data else {
        return Err(Error::domain("only power logs can be written"));
    };
    let mut wtr = csv::Writer::from_writer(w);
    let to_err = |e: csv::Error| Error::Io(std::io::Error::other(e));
    wtr.write_record(["distance_m", "rx_power_dbm"])
        .map_err(to_err)?;
    for (d, p) in recs {
        wtr.write_record([format!("{d:.3}"), format!("{p:.4}")])
            .map_err(to_err)?;
    }
    wtr.flush()?;
    Ok(())
}
