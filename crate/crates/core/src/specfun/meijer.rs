//! Univariate Meijer G-function by Slater's residue expansion.
//!
//! G^{m,n}_{p,q}(x | a; b) = Σ_{h<m} C_h x^{b_h} pF_{q−1}(1+b_h−a; 1+b_h−b_{≠h}; (−1)^{p−m−n} x)
//!
//! with C_h = ∏_{j<m, j≠h} Γ(b_j−b_h) ∏_{j<n} Γ(1+b_h−a_j) / (∏_{j≥m} Γ(1+b_h−b_j) ∏_{j≥n} Γ(a_j−b_h)).
//! Classes with p > q, or p = q and x > 1, go through G(x | a; b) = G(1/x | 1−b; 1−a).

use super::gamma::is_nonpositive_integer;
use super::hypergeometric::{gauss_2f1_with, ln_gamma_ratio, pfq_series};
use super::{EvalPolicy, SpecFunError};

/// (m, n, p, q) classes the evaluator accepts.
pub const SUPPORTED_CLASSES: [(usize, usize, usize, usize); 10] = [
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

/// Orders and parameters of G^{m,n}_{p,q}(· | a; b).
#[derive(Debug, Clone, PartialEq)]
pub struct MeijerGSpec {
    pub m: usize,
    pub n: usize,
    pub p: usize,
    pub q: usize,
    pub a: Vec<f64>,
    pub b: Vec<f64>,
}

impl MeijerGSpec {
    /// Builds a spec; p and q are taken from the parameter list lengths.
    pub fn new(m: usize, n: usize, a: &[f64], b: &[f64]) -> Result<Self, SpecFunError> {
        let spec = Self {
            m,
            n,
            p: a.len(),
            q: b.len(),
            a: a.to_vec(),
            b: b.to_vec(),
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<(), SpecFunError> {
        let bad = |detail: String| SpecFunError::Domain {
            func: "meijer_g",
            detail,
        };
        if self.a.len() != self.p || self.b.len() != self.q {
            return Err(bad(format!(
                "parameter lengths ({}, {}) do not match (p, q) = ({}, {})",
                self.a.len(),
                self.b.len(),
                self.p,
                self.q
            )));
        }
        if self.m > self.q || self.n > self.p {
            return Err(bad(format!(
                "need m <= q and n <= p, got m={} n={} p={} q={}",
                self.m, self.n, self.p, self.q
            )));
        }
        if self.a.iter().chain(&self.b).any(|v| !v.is_finite()) {
            return Err(bad("parameters must be finite".into()));
        }
        Ok(())
    }

    pub fn class(&self) -> (usize, usize, usize, usize) {
        (self.m, self.n, self.p, self.q)
    }

    pub fn is_supported(&self) -> bool {
        SUPPORTED_CLASSES.contains(&self.class())
    }

    fn reciprocal(&self) -> Self {
        Self {
            m: self.n,
            n: self.m,
            p: self.q,
            q: self.p,
            a: self.b.iter().map(|v| 1.0 - v).collect(),
            b: self.a.iter().map(|v| 1.0 - v).collect(),
        }
    }
}

/// G^{m,n}_{p,q}(x | a; b) for x > 0.
pub fn meijer_g(spec: &MeijerGSpec, x: f64, policy: &EvalPolicy) -> Result<f64, SpecFunError> {
    meijer_g_scaled(spec, x, policy, 0.0)
}

/// e^{ln_scale} · G^{m,n}_{p,q}(x | a; b). The scale is folded into every
/// residue before exponentiation, so results whose gamma prefactors alone
/// would overflow stay representable.
pub fn meijer_g_scaled(
    spec: &MeijerGSpec,
    x: f64,
    policy: &EvalPolicy,
    ln_scale: f64,
) -> Result<f64, SpecFunError> {
    spec.validate()?;
    policy.validate()?;
    if !spec.is_supported() {
        return Err(SpecFunError::UnsupportedClass {
            m: spec.m,
            n: spec.n,
            p: spec.p,
            q: spec.q,
        });
    }
    if !(x > 0.0 && x.is_finite()) {
        return Err(SpecFunError::Domain {
            func: "meijer_g",
            detail: format!("argument must be positive and finite, got {x}"),
        });
    }
    let flip = spec.p > spec.q || (spec.p == spec.q && spec.p > 1 && x > 1.0);
    let (s, x) = if flip {
        (spec.reciprocal(), 1.0 / x)
    } else {
        (spec.clone(), x)
    };
    if s.class() == (1, 1, 1, 1) {
        // G^{1,1}_{1,1}(x | a; b) = Γ(1+b−a) x^b (1+x)^{a−b−1}
        let (a, b) = (s.a[0], s.b[0]);
        if is_nonpositive_integer(1.0 + b - a) {
            return Err(SpecFunError::Pole {
                func: "meijer_g",
                at: 1.0 + b - a,
            });
        }
        let (lg, sign) = ln_gamma_ratio(&[1.0 + b - a], &[])?;
        return Ok(sign * (lg + b * x.ln() + (a - b - 1.0) * x.ln_1p() + ln_scale).exp());
    }
    if s.class() == (1, 0, 0, 1) {
        return Ok((s.b[0] * x.ln() - x + ln_scale).exp());
    }
    check_separation(&s)?;
    match perturbation_offsets(&s) {
        None => residue_sum(&s.a, &s.b, s.m, s.n, x, ln_scale, policy),
        Some(offsets) => {
            let eps = policy.pole_perturbation;
            let shifted = |sign: f64| -> Vec<f64> {
                s.b.iter()
                    .zip(&offsets)
                    .map(|(b, o)| b + sign * eps * o)
                    .collect()
            };
            let up = residue_sum(&s.a, &shifted(1.0), s.m, s.n, x, ln_scale, policy)?;
            let down = residue_sum(&s.a, &shifted(-1.0), s.m, s.n, x, ln_scale, policy)?;
            Ok(0.5 * (up + down))
        }
    }
}

fn near_integer(d: f64) -> bool {
    (d - d.round()).abs() <= 1e-7 * d.abs().max(1.0)
}

/// Errors when a pole of Γ(b_h − s) (h < m) collides with one of
/// Γ(1 − a_j + s) (j < n): no contour separates them.
fn check_separation(s: &MeijerGSpec) -> Result<(), SpecFunError> {
    for h in 0..s.m {
        for j in 0..s.n {
            let d = s.a[j] - s.b[h];
            if d > 0.5 && near_integer(d) {
                return Err(SpecFunError::Domain {
                    func: "meijer_g",
                    detail: format!(
                        "a_{} - b_{} = {d} is a positive integer; poles are not separable",
                        j + 1,
                        h + 1
                    ),
                });
            }
        }
    }
    Ok(())
}

/// Perturbation multipliers for the b parameters, or None when no pair of
/// b's produces coincident poles or a pole in the series' lower parameters.
fn perturbation_offsets(s: &MeijerGSpec) -> Option<Vec<f64>> {
    let q = s.q;
    let mut parent: Vec<usize> = (0..q).collect();
    fn find(parent: &mut [usize], i: usize) -> usize {
        let mut r = i;
        while parent[r] != r {
            r = parent[r];
        }
        parent[i] = r;
        r
    }
    let mut any = false;
    for h in 0..s.m {
        for j in 0..q {
            if j == h {
                continue;
            }
            let d = s.b[j] - s.b[h];
            if !near_integer(d) {
                continue;
            }
            // Both inside m: a double pole. Outside m: 1 + b_h − b_j is a
            // non-positive integer in the series denominator.
            if j < s.m || d > 0.5 {
                any = true;
                let (ri, rj) = (find(&mut parent, h), find(&mut parent, j));
                if ri != rj {
                    parent[rj.max(ri)] = ri.min(rj);
                }
            }
        }
    }
    if !any {
        return None;
    }
    let mut offsets = vec![0.0; q];
    let mut seen = vec![0usize; q];
    for j in 0..q {
        let r = find(&mut parent, j);
        offsets[j] = seen[r] as f64;
        seen[r] += 1;
    }
    Some(offsets)
}

fn residue_sum(
    a: &[f64],
    b: &[f64],
    m: usize,
    n: usize,
    x: f64,
    ln_scale: f64,
    policy: &EvalPolicy,
) -> Result<f64, SpecFunError> {
    let p = a.len();
    let q = b.len();
    let sigma = if (p + m + n).is_multiple_of(2) {
        1.0
    } else {
        -1.0
    };
    let z = sigma * x;
    let lnx = x.ln();
    let mut total = 0.0;
    let mut bound = 0.0;
    for h in 0..m {
        let bh = b[h];
        let mut num = Vec::with_capacity(m - 1 + n);
        let mut den = Vec::with_capacity(q - m + p - n);
        for (j, &bj) in b.iter().enumerate().take(m) {
            if j != h {
                num.push(bj - bh);
            }
        }
        for &aj in &a[..n] {
            num.push(1.0 + bh - aj);
        }
        for &bj in &b[m..] {
            den.push(1.0 + bh - bj);
        }
        for &aj in &a[n..] {
            den.push(aj - bh);
        }
        let (lg, sign) = ln_gamma_ratio(&num, &den)?;
        if sign == 0.0 {
            continue;
        }
        let upper: Vec<f64> = a.iter().map(|aj| 1.0 + bh - aj).collect();
        let lower: Vec<f64> = b
            .iter()
            .enumerate()
            .filter(|&(j, _)| j != h)
            .map(|(_, bj)| 1.0 + bh - bj)
            .collect();
        let (series, max_term) = if p == q {
            // p = q = 2 here; the series is ₂F₁ and may sit near |z| = 1.
            let v = gauss_2f1_with(upper[0], upper[1], lower[0], z, policy)?;
            (v, v.abs())
        } else {
            pfq_series(&upper, &lower, z, policy)?
        };
        let ln_pref = lg + bh * lnx + ln_scale;
        let pref = sign * ln_pref.exp();
        total += pref * series;
        bound += pref.abs() * max_term.abs().max(series.abs());
    }
    if !total.is_finite() {
        return Err(SpecFunError::Convergence {
            func: "meijer_g",
            terms: policy.max_terms,
        });
    }
    if bound > 0.0 {
        let est = 8.0 * f64::EPSILON * bound / total.abs();
        if !(est <= policy.rel_tol * 1e3) {
            return Err(SpecFunError::PrecisionLoss {
                func: "meijer_g",
                digits: (bound / total.abs()).log10(),
            });
        }
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::specfun::{gamma, reg_inc_beta, upper_inc_gamma};

    fn p() -> EvalPolicy {
        EvalPolicy::default()
    }

    #[test]
    fn exponential_class() {
        let s = MeijerGSpec::new(1, 0, &[], &[0.0]).unwrap();
        let v = meijer_g(&s, 0.7, &p()).unwrap();
        assert!((v - 0.496_585_303_791_409_5).abs() < 1e-15);
    }

    #[test]
    fn binomial_class() {
        let s = MeijerGSpec::new(1, 1, &[0.0], &[0.0]).unwrap();
        assert!((meijer_g(&s, 1.0, &p()).unwrap() - 0.5).abs() < 1e-15);
        let beta = 2.5;
        let s = MeijerGSpec::new(1, 1, &[1.0 - beta], &[0.0]).unwrap();
        let x = 3.3;
        let want = gamma(beta).unwrap() * (1.0f64 + x).powf(-beta);
        assert!(((meijer_g(&s, x, &p()).unwrap() - want) / want).abs() < 1e-13);
    }

    #[test]
    fn incomplete_gamma_class() {
        // Γ(k+1, x) = G^{2,0}_{1,2}(x | 1; 0, k+1); b's differ by an integer.
        for &(k, x) in &[(0.0, 0.4), (1.0, 1.3), (2.0, 2.0)] {
            let s = MeijerGSpec::new(2, 0, &[1.0], &[0.0, k + 1.0]).unwrap();
            let v = meijer_g(&s, x, &p()).unwrap();
            let want = upper_inc_gamma(k + 1.0, x).unwrap();
            assert!(
                ((v - want) / want).abs() < 1e-9,
                "k={k} x={x}: {v} vs {want}"
            );
        }
    }

    #[test]
    fn fisher_f_cdf_class() {
        // G^{2,1}_{2,2}(x | 1−m, 1; m_s, 0) = Γ(m)Γ(m_s) I_{1/(1+x)}(m, m_s)
        let (m, ms, x) = (1.07, 2.02, 2.0);
        let s = MeijerGSpec::new(2, 1, &[1.0 - m, 1.0], &[ms, 0.0]).unwrap();
        let v = meijer_g(&s, x, &p()).unwrap();
        let want =
            gamma(m).unwrap() * gamma(ms).unwrap() * reg_inc_beta(1.0 / (1.0 + x), m, ms).unwrap();
        assert!(((v - want) / want).abs() < 1e-10, "{v} vs {want}");
    }

    #[test]
    fn rejects_unsupported_and_bad_input() {
        let s = MeijerGSpec::new(1, 0, &[0.5], &[0.0]).unwrap();
        assert!(matches!(
            meijer_g(&s, 1.0, &p()),
            Err(SpecFunError::UnsupportedClass { .. })
        ));
        let s = MeijerGSpec::new(1, 0, &[], &[0.0]).unwrap();
        assert!(meijer_g(&s, 0.0, &p()).is_err());
        assert!(meijer_g(&s, f64::NAN, &p()).is_err());
        assert!(MeijerGSpec::new(2, 0, &[], &[0.0]).is_err());
        assert!(MeijerGSpec::new(1, 0, &[], &[f64::NAN]).is_err());
    }

    #[test]
    fn scaled_matches_unscaled() {
        let s = MeijerGSpec::new(2, 1, &[0.2], &[1.5, 0.0]).unwrap();
        let v = meijer_g(&s, 0.3, &p()).unwrap();
        let w = meijer_g_scaled(&s, 0.3, &p(), 2.0f64.ln()).unwrap();
        assert!((w / v - 2.0).abs() < 1e-14);
    }
}
