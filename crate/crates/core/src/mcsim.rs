//! Monte Carlo oracle: exact samplers for both hops and the relay links, and
//! empirical estimators for the analytic quantities.
//!
//! Samples are produced in fixed blocks of [`BLOCK`] draws. Block `b` of a
//! stream draws from its own ChaCha8 stream selected by `b`, so the output
//! depends on (seed, n_samples) only and never on the worker count.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma, StandardNormal};
use rayon::prelude::*;
use serde::Serialize;

use crate::channel::{FisherFParams, QosSpec, ShadowedRicianParams};
use crate::error::{Error, Result};
use crate::snr::{LinkKind, SnrDistribution};

pub const BLOCK: usize = 1 << 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct SimConfig {
    pub n_samples: usize,
    pub seed: u64,
    pub n_workers: usize,
    /// Pairs every S-R draw with its phase-reversed twin (LoS term negated).
    pub antithetic: bool,
}

impl SimConfig {
    pub fn new(n_samples: usize, seed: u64) -> Self {
        Self {
            n_samples,
            seed,
            n_workers: rayon::current_num_threads().max(1),
            antithetic: false,
        }
    }

    pub fn with_workers(mut self, n: usize) -> Self {
        self.n_workers = n;
        self
    }

    pub fn with_antithetic(mut self, on: bool) -> Self {
        self.antithetic = on;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_samples == 0 {
            return Err(Error::domain("n_samples must be at least 1"));
        }
        if self.n_workers == 0 {
            return Err(Error::domain("n_workers must be at least 1"));
        }
        Ok(())
    }
}

// Stream tags keep the two hops apart.
const TAG_SR: u64 = 1;
const TAG_RU: u64 = 2;

fn block_rng(seed: u64, tag: u64, block: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream((tag << 48) | block as u64);
    rng
}

fn pool(cfg: &SimConfig) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.n_workers)
        .build()
        .map_err(|e| Error::Consistency(format!("thread pool: {e}")))
}

/// Fills `cfg.n_samples` values block by block; `fill` writes one block.
fn generate<F>(cfg: &SimConfig, fill: F) -> Result<Vec<f64>>
where
    F: Fn(usize, &mut [f64]) + Sync,
{
    cfg.validate()?;
    let mut out = vec![0.0; cfg.n_samples];
    pool(cfg)?.install(|| {
        out.par_chunks_mut(BLOCK)
            .enumerate()
            .for_each(|(b, chunk)| fill(b, chunk));
    });
    Ok(out)
}

struct SrSampler {
    los: Gamma<f64>,
    sigma: f64,
}

impl SrSampler {
    fn new(p: &ShadowedRicianParams) -> Result<Self> {
        let gs = p.gamma_s() as f64;
        // With Ω_sr = 0 the LoS term vanishes; any valid shape/scale works.
        let scale = if p.omega_sr() > 0.0 {
            p.omega_sr() / gs
        } else {
            1.0
        };
        let los = Gamma::new(gs, scale).map_err(|e| Error::domain(format!("Nakagami LoS: {e}")))?;
        Ok(Self {
            los,
            sigma: p.b_s().sqrt(),
        })
    }

    /// Fills `out` with |A e^{jφ} + Z|²; in antithetic mode consecutive
    /// pairs share (A, φ, Z) with the LoS term negated in the second.
    fn fill<R: Rng>(
        &self,
        p: &ShadowedRicianParams,
        rng: &mut R,
        out: &mut [f64],
        antithetic: bool,
    ) {
        let has_los = p.omega_sr() > 0.0;
        let mut i = 0;
        while i < out.len() {
            let a = if has_los {
                self.los.sample(rng).sqrt()
            } else {
                0.0
            };
            let phi = rng.random::<f64>() * std::f64::consts::TAU;
            let x: f64 = self.sigma * rng.sample::<f64, _>(StandardNormal);
            let y: f64 = self.sigma * rng.sample::<f64, _>(StandardNormal);
            let (c, s) = (a * phi.cos(), a * phi.sin());
            out[i] = (c + x).powi(2) + (s + y).powi(2);
            i += 1;
            if antithetic && i < out.len() {
                out[i] = (x - c).powi(2) + (y - s).powi(2);
                i += 1;
            }
        }
    }
}

struct RuSampler {
    g1: Gamma<f64>,
    g2: Gamma<f64>,
    scale: f64,
}

impl RuSampler {
    fn new(p: &FisherFParams) -> Result<Self> {
        let g1 = Gamma::new(p.m(), 1.0).map_err(|e| Error::domain(format!("gamma(m): {e}")))?;
        let g2 = Gamma::new(p.m_s(), 1.0).map_err(|e| Error::domain(format!("gamma(m_s): {e}")))?;
        Ok(Self {
            g1,
            g2,
            scale: 1.0 / p.ratio_scale(),
        })
    }

    /// (Ω_m/Ω_s)(G₁/m)/(G₂/m_s).
    fn draw<R: Rng>(&self, rng: &mut R) -> f64 {
        loop {
            let v = self.scale * self.g1.sample(rng) / self.g2.sample(rng);
            // G₁ underflows to 0 with tiny probability for very small m.
            if v > 0.0 && v.is_finite() {
                return v;
            }
        }
    }
}

/// Draws of |h_SR|².
pub fn sample_shadowed_rician_power(
    params: &ShadowedRicianParams,
    cfg: &SimConfig,
) -> Result<Vec<f64>> {
    let s = SrSampler::new(params)?;
    generate(cfg, |b, out| {
        let mut rng = block_rng(cfg.seed, TAG_SR, b);
        s.fill(params, &mut rng, out, cfg.antithetic);
    })
}

/// Draws of |h_RU|².
pub fn sample_fisher_f_power(params: &FisherFParams, cfg: &SimConfig) -> Result<Vec<f64>> {
    let s = RuSampler::new(params)?;
    generate(cfg, |b, out| {
        let mut rng = block_rng(cfg.seed, TAG_RU, b);
        for v in out.iter_mut() {
            *v = s.draw(&mut rng);
        }
    })
}

/// Instantaneous SNR draws of the link described by `dist`. Hop draws use
/// the same streams as the hop samplers, so the S-R draws of an AF run are
/// exactly the S-R link's draws.
pub fn sample_end_to_end(dist: &SnrDistribution, cfg: &SimConfig) -> Result<Vec<f64>> {
    let kind = dist.kind();
    let sr = match kind {
        LinkKind::Ru => None,
        _ => Some(sample_shadowed_rician_power(dist.sr_params(), cfg)?),
    };
    let ru = match kind {
        LinkKind::Sr => None,
        _ => Some(sample_fisher_f_power(dist.ru_params(), cfg)?),
    };
    let (gs, gr, c) = (dist.gbar_sr(), dist.gbar_ru(), dist.c_param());
    Ok(match (sr, ru) {
        (Some(mut s), None) => {
            s.iter_mut().for_each(|v| *v *= gs);
            s
        }
        (None, Some(mut r)) => {
            r.iter_mut().for_each(|v| *v *= gr);
            r
        }
        (Some(mut s), Some(r)) => {
            for (a, &b) in s.iter_mut().zip(&r) {
                let (x, y) = (*a * gs, b * gr);
                *a = match kind {
                    LinkKind::Af if c == 0.0 => x,
                    LinkKind::Af => x * y / (y + c),
                    _ => x.min(y),
                };
            }
            s
        }
        (None, None) => unreachable!("every link uses at least one hop"),
    })
}

// ---- empirical distribution ---------------------------------------------

#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalCdf {
    sorted: Vec<f64>,
}

/// Sup-distance between an empirical and an analytic CDF. When the analytic
/// CDF was only evaluated on a grid, `lower ≤ D ≤ upper`; with all sample
/// points evaluated the two coincide.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KsDistance {
    pub lower: f64,
    pub upper: f64,
    pub n: usize,
}

impl EmpiricalCdf {
    pub fn new(mut samples: Vec<f64>) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::domain("empirical CDF needs at least one sample"));
        }
        if samples.iter().any(|v| v.is_nan()) {
            return Err(Error::domain("NaN sample"));
        }
        samples.par_sort_unstable_by(f64::total_cmp);
        Ok(Self { sorted: samples })
    }

    pub fn len(&self) -> usize {
        self.sorted.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sorted.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.sorted
    }

    /// F̂(x) = #{samples ≤ x}/n.
    pub fn eval(&self, x: f64) -> f64 {
        self.sorted.partition_point(|&v| v <= x) as f64 / self.len() as f64
    }

    /// F̂(x⁻) = #{samples < x}/n.
    pub fn eval_left(&self, x: f64) -> f64 {
        self.sorted.partition_point(|&v| v < x) as f64 / self.len() as f64
    }

    /// Order statistic at probability p ∈ [0, 1].
    pub fn quantile(&self, p: f64) -> f64 {
        let n = self.len();
        let i = ((p.clamp(0.0, 1.0) * n as f64).ceil() as usize).clamp(1, n);
        self.sorted[i - 1]
    }

    /// Exact KS distance, evaluating `cdf` at every sample.
    pub fn ks_exact<F>(&self, cdf: F) -> Result<KsDistance>
    where
        F: Fn(f64) -> Result<f64> + Sync,
    {
        let n = self.len() as f64;
        let d = self
            .sorted
            .par_iter()
            .enumerate()
            .map(|(i, &x)| {
                let f = cdf(x)?;
                Ok::<f64, Error>((((i + 1) as f64 / n) - f).max(f - i as f64 / n))
            })
            .try_reduce(|| 0.0, |a: f64, b: f64| Ok::<f64, Error>(a.max(b)))?;
        Ok(KsDistance {
            lower: d,
            upper: d,
            n: self.len(),
        })
    }

    /// KS bounds from `cdf` evaluated at `grid_points` order statistics.
    /// Between two grid points both CDFs are monotone, which bounds the gap.
    pub fn ks_bounded<F>(&self, cdf: F, grid_points: usize) -> Result<KsDistance>
    where
        F: Fn(f64) -> Result<f64> + Sync,
    {
        let n = self.len();
        let k = grid_points.clamp(2, n.max(2));
        let mut idx: Vec<usize> = (0..k).map(|j| (j * (n - 1)) / (k - 1)).collect();
        idx.dedup();
        let xs: Vec<f64> = idx.iter().map(|&i| self.sorted[i]).collect();
        let fs: Vec<f64> = xs.par_iter().map(|&x| cdf(x)).collect::<Result<_>>()?;
        let mut lower: f64 = 0.0;
        let mut upper: f64 = 0.0;
        // Below the smallest sample F̂ = 0, above the largest F̂ = 1.
        upper = upper.max(fs[0]).max(1.0 - fs[fs.len() - 1]);
        for j in 0..xs.len() {
            let (hi, lo) = (self.eval(xs[j]), self.eval_left(xs[j]));
            let gap = (hi - fs[j]).max(fs[j] - lo);
            lower = lower.max(gap);
            upper = upper.max(gap);
            if j + 1 < xs.len() {
                // On (x_j, x_{j+1}): F̂ ∈ [F̂(x_j), F̂(x_{j+1}⁻)], F ∈ [F(x_j), F(x_{j+1})].
                let fhat_hi = self.eval_left(xs[j + 1]);
                upper = upper.max(fhat_hi - fs[j]).max(fs[j + 1] - hi);
            }
        }
        Ok(KsDistance { lower, upper, n })
    }
}

pub fn empirical_cdf(samples: Vec<f64>) -> Result<EmpiricalCdf> {
    EmpiricalCdf::new(samples)
}

// ---- estimators ---------------------------------------------------------

/// Monte Carlo estimates with one-sigma standard errors.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct McMetrics {
    pub ec_hat: f64,
    /// Delta-method standard error of `ec_hat`.
    pub ec_se: f64,
    pub p_out_hat: f64,
    pub p_out_se: f64,
    pub ergodic_hat: f64,
    pub ergodic_se: f64,
    pub n: usize,
}

/// Σ over fixed-size chunks summed in index order; the result does not
/// depend on the thread count.
fn ordered_sum<F: Fn(f64) -> f64 + Sync>(xs: &[f64], f: F) -> f64 {
    let partial: Vec<f64> = xs
        .par_chunks(BLOCK)
        .map(|c| c.iter().map(|&x| f(x)).sum())
        .collect();
    partial.iter().sum()
}

/// Estimators from given SNR draws.
pub fn mc_metrics_from_samples(samples: &[f64], qos: &QosSpec, gamma_th: f64) -> Result<McMetrics> {
    let n = samples.len();
    if n == 0 {
        return Err(Error::domain("no samples"));
    }
    let nf = n as f64;
    let beta = qos.beta_norm();
    // ln w = −β ln(1+γ), shifted by its maximum before exponentiation.
    let shift = samples
        .par_iter()
        .map(|&g| -beta * g.ln_1p())
        .reduce(|| f64::NEG_INFINITY, f64::max);
    let s1 = ordered_sum(samples, |g| (-beta * g.ln_1p() - shift).exp());
    let s2 = ordered_sum(samples, |g| (2.0 * (-beta * g.ln_1p() - shift)).exp());
    let mean = s1 / nf;
    let var = (s2 / nf - mean * mean).max(0.0) * nf / (nf - 1.0).max(1.0);
    let theta = qos.theta();
    let ec_hat = -(mean.ln() + shift) / theta;
    let ec_se = (var / nf).sqrt() / mean / theta;

    let below = samples.par_iter().filter(|&&g| g < gamma_th).count() as f64;
    let p = below / nf;

    let r1 = ordered_sum(samples, |g| g.ln_1p());
    let r2 = ordered_sum(samples, |g| g.ln_1p().powi(2));
    let lm = r1 / nf;
    let lvar = (r2 / nf - lm * lm).max(0.0) * nf / (nf - 1.0).max(1.0);
    let k = qos.bt() / std::f64::consts::LN_2;
    Ok(McMetrics {
        ec_hat,
        ec_se,
        p_out_hat: p,
        p_out_se: (p * (1.0 - p) / nf).sqrt(),
        ergodic_hat: k * lm,
        ergodic_se: k * (lvar / nf).sqrt(),
        n,
    })
}

pub fn mc_metrics(
    dist: &SnrDistribution,
    qos: &QosSpec,
    gamma_th: f64,
    cfg: &SimConfig,
) -> Result<McMetrics> {
    let samples = sample_end_to_end(dist, cfg)?;
    mc_metrics_from_samples(&samples, qos, gamma_th)
}
