//! Globally adaptive Gauss–Kronrod (7/15) quadrature on finite intervals and
//! on the half line.
//!
//! Half-line integrals are split at caller-supplied scale points into panels:
//! an origin panel `[0, x₁]` with the substitution `x = x₁ w^{1/(p+1)}` that
//! flattens an `x^p` endpoint behaviour, log-variable panels between widely
//! separated breakpoints, and a tail panel `x = x_N / (1 − t)`. All panels
//! share one priority queue, so effort goes wherever the error is largest.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use thiserror::Error;

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadConfig {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_evals: usize,
}

impl Default for QuadConfig {
    fn default() -> Self {
        Self {
            rel_tol: 1e-8,
            abs_tol: 0.0,
            max_evals: 100_000,
        }
    }
}

impl QuadConfig {
    pub fn with_rel_tol(mut self, rel_tol: f64) -> Self {
        self.rel_tol = rel_tol;
        self
    }

    pub fn with_abs_tol(mut self, abs_tol: f64) -> Self {
        self.abs_tol = abs_tol;
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadResult {
    pub value: f64,
    pub abs_err: f64,
    pub evals: usize,
}

#[derive(Debug, Clone, Error, PartialEq)]
pub enum QuadError {
    #[error("quadrature did not reach tolerance after {evals} evaluations (estimate {value:e} ± {abs_err:e})")]
    MaxEvaluations {
        value: f64,
        abs_err: f64,
        evals: usize,
    },
    #[error("integrand returned non-finite value {value} at x = {at}")]
    NonFinite { at: f64, value: f64 },
    #[error("invalid integration setup: {0}")]
    Invalid(String),
}

#[derive(Debug, Clone, Copy)]
enum Panel {
    Linear,
    Log,
    Origin { x1: f64, kappa: f64 },
    Tail { x0: f64 },
}

impl Panel {
    /// Maps the panel variable to (x, dx/dt).
    #[inline]
    fn map(self, t: f64) -> (f64, f64) {
        match self {
            Panel::Linear => (t, 1.0),
            Panel::Log => {
                let x = t.exp();
                (x, x)
            }
            Panel::Origin { x1, kappa } => {
                let x = x1 * t.powf(kappa);
                if x == 0.0 {
                    (0.0, 0.0)
                } else {
                    (x, kappa * x / t)
                }
            }
            Panel::Tail { x0 } => {
                let s = 1.0 - t;
                (x0 / s, x0 / (s * s))
            }
        }
    }
}

struct Segment {
    lo: f64,
    hi: f64,
    value: f64,
    err: f64,
    panel: usize,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.err == other.err
    }
}
impl Eq for Segment {}
impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Segment {
    fn cmp(&self, other: &Self) -> Ordering {
        self.err.total_cmp(&other.err)
    }
}

fn gk15<F: Fn(f64) -> f64>(f: &F, panel: Panel, lo: f64, hi: f64) -> Result<(f64, f64), QuadError> {
    let centr = 0.5 * (lo + hi);
    let half = 0.5 * (hi - lo);
    let eval = |t: f64| -> Result<f64, QuadError> {
        let (x, jac) = panel.map(t);
        if jac == 0.0 || !x.is_finite() {
            // Underflow at the origin or overflow in the tail map.
            return Ok(0.0);
        }
        let fx = f(x);
        if !fx.is_finite() {
            return Err(QuadError::NonFinite { at: x, value: fx });
        }
        let v = fx * jac;
        // 0·∞ at an extreme of the mapping: the integrand has decayed.
        Ok(if v.is_finite() { v } else { 0.0 })
    };
    let mut fv1 = [0.0; 7];
    let mut fv2 = [0.0; 7];
    let fc = eval(centr)?;
    let mut resg = fc * WG[3];
    let mut resk = fc * WGK[7];
    let mut resabs = resk.abs();
    for j in 0..7 {
        let dx = half * XGK[j];
        let f1 = eval(centr - dx)?;
        let f2 = eval(centr + dx)?;
        fv1[j] = f1;
        fv2[j] = f2;
        resk += WGK[j] * (f1 + f2);
        resabs += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            resg += WG[j / 2] * (f1 + f2);
        }
    }
    let reskh = 0.5 * resk;
    let mut resasc = WGK[7] * (fc - reskh).abs();
    for j in 0..7 {
        resasc += WGK[j] * ((fv1[j] - reskh).abs() + (fv2[j] - reskh).abs());
    }
    let result = resk * half;
    let resabs = resabs * half.abs();
    let resasc = resasc * half.abs();
    let mut err = ((resk - resg) * half).abs();
    if resasc != 0.0 && err != 0.0 {
        err = resasc * (200.0 * err / resasc).powf(1.5).min(1.0);
    }
    if resabs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        err = err.max(50.0 * f64::EPSILON * resabs);
    }
    Ok((result, err))
}

fn adaptive<F: Fn(f64) -> f64>(
    f: &F,
    panels: &[(Panel, f64, f64)],
    cfg: &QuadConfig,
) -> Result<QuadResult, QuadError> {
    let mut heap = BinaryHeap::new();
    let mut settled_value = 0.0;
    let mut settled_err = 0.0;
    let mut evals = 0usize;
    for (i, &(panel, lo, hi)) in panels.iter().enumerate() {
        let (value, err) = gk15(f, panel, lo, hi)?;
        evals += 15;
        heap.push(Segment {
            lo,
            hi,
            value,
            err,
            panel: i,
        });
    }
    loop {
        let (mut total, mut total_err) = (settled_value, settled_err);
        for s in heap.iter() {
            total += s.value;
            total_err += s.err;
        }
        let tol = cfg.abs_tol.max(cfg.rel_tol * total.abs());
        if total_err <= tol || heap.is_empty() {
            return Ok(QuadResult {
                value: total,
                abs_err: total_err,
                evals,
            });
        }
        if evals >= cfg.max_evals {
            return Err(QuadError::MaxEvaluations {
                value: total,
                abs_err: total_err,
                evals,
            });
        }
        // Bisect the worst segments in one batch before re-summing.
        let batch = heap.len().clamp(1, 8);
        for _ in 0..batch {
            let Some(seg) = heap.pop() else { break };
            if seg.err <= tol / (4.0 * heap.len().max(1) as f64) {
                heap.push(seg);
                break;
            }
            let mid = 0.5 * (seg.lo + seg.hi);
            let width = seg.hi - seg.lo;
            if width <= 1e-13 * seg.lo.abs().max(seg.hi.abs()).max(1e-300)
                || mid <= seg.lo
                || mid >= seg.hi
            {
                settled_value += seg.value;
                settled_err += seg.err;
                continue;
            }
            let panel = panels[seg.panel].0;
            let (v1, e1) = gk15(f, panel, seg.lo, mid)?;
            let (v2, e2) = gk15(f, panel, mid, seg.hi)?;
            evals += 30;
            heap.push(Segment {
                lo: seg.lo,
                hi: mid,
                value: v1,
                err: e1,
                panel: seg.panel,
            });
            heap.push(Segment {
                lo: mid,
                hi: seg.hi,
                value: v2,
                err: e2,
                panel: seg.panel,
            });
        }
    }
}

/// ∫_a^b f(x) dx on a finite interval.
pub fn integrate<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    cfg: &QuadConfig,
) -> Result<QuadResult, QuadError> {
    if !(a.is_finite() && b.is_finite()) {
        return Err(QuadError::Invalid(format!(
            "interval [{a}, {b}] is not finite"
        )));
    }
    if a == b {
        return Ok(QuadResult {
            value: 0.0,
            abs_err: 0.0,
            evals: 0,
        });
    }
    if a > b {
        let r = integrate(f, b, a, cfg)?;
        return Ok(QuadResult {
            value: -r.value,
            ..r
        });
    }
    adaptive(&f, &[(Panel::Linear, a, b)], cfg)
}

/// Panel layout for [`integrate_half_line`].
#[derive(Debug, Clone, PartialEq)]
pub struct HalfLine {
    breakpoints: Vec<f64>,
    origin_power: f64,
}

impl HalfLine {
    /// `scales` are points where the integrand changes character (decay
    /// lengths, transition points). Non-positive or non-finite entries are
    /// dropped.
    pub fn new(scales: &[f64]) -> Self {
        let mut pts: Vec<f64> = scales
            .iter()
            .copied()
            .filter(|v| v.is_finite() && *v > 0.0)
            .collect();
        pts.sort_by(f64::total_cmp);
        pts.dedup_by(|b, a| *b <= *a * (1.0 + 1e-9));
        if pts.is_empty() {
            pts.push(1.0);
        }
        Self {
            breakpoints: pts,
            origin_power: 0.0,
        }
    }

    /// Leading power p of the integrand at the origin, f(x) ~ x^p, p > −1.
    pub fn origin_power(mut self, p: f64) -> Self {
        self.origin_power = p;
        self
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }
}

/// ∫_0^∞ f(x) dx.
pub fn integrate_half_line<F: Fn(f64) -> f64>(
    f: F,
    layout: &HalfLine,
    cfg: &QuadConfig,
) -> Result<QuadResult, QuadError> {
    let p = layout.origin_power;
    if !(p > -1.0) || !p.is_finite() {
        return Err(QuadError::Invalid(format!(
            "origin power {p} gives a non-integrable endpoint"
        )));
    }
    let bp = &layout.breakpoints;
    let mut panels = Vec::with_capacity(bp.len() + 1);
    panels.push((
        Panel::Origin {
            x1: bp[0],
            kappa: 1.0 / (p + 1.0),
        },
        0.0,
        1.0,
    ));
    for w in bp.windows(2) {
        if w[1] / w[0] > 4.0 {
            panels.push((Panel::Log, w[0].ln(), w[1].ln()));
        } else {
            panels.push((Panel::Linear, w[0], w[1]));
        }
    }
    panels.push((
        Panel::Tail {
            x0: *bp.last().unwrap(),
        },
        0.0,
        1.0,
    ));
    adaptive(&f, &panels, cfg)
}
