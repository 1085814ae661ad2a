//! Hypergeometric series: finite Kummer ₁F₁, Gauss ₂F₁ and a plain pFq.

use super::gamma::{is_nonpositive_integer, ln_gamma_abs, pochhammer};
use super::{EvalPolicy, SpecFunError};

/// ₁F₁(Γ_s; 1; z) for integer Γ_s ≥ 1, via Kummer's transformation into the
/// terminating series e^z Σ_{k<Γ_s} (−1)^k (1−Γ_s)_k z^k / (k!)².
pub fn kummer_1f1_finite(gamma_s: u32, z: f64) -> Result<f64, SpecFunError> {
    if gamma_s == 0 {
        return Err(SpecFunError::Domain {
            func: "kummer_1f1_finite",
            detail: "gamma_s must be a positive integer".into(),
        });
    }
    if !z.is_finite() {
        return Err(SpecFunError::Domain {
            func: "kummer_1f1_finite",
            detail: format!("non-finite argument {z}"),
        });
    }
    let a = 1.0 - f64::from(gamma_s);
    let mut sum = 0.0;
    let mut kfact = 1.0;
    for k in 0..gamma_s {
        if k > 0 {
            kfact *= f64::from(k);
        }
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        sum += sign * pochhammer(a, k) * z.powi(k as i32) / (kfact * kfact);
    }
    Ok(z.exp() * sum)
}

/// Partial sums of Σ ∏(a)_k / ∏(b)_k z^k / k!. Returns the sum and the
/// largest term magnitude seen (for cancellation diagnostics).
pub(crate) fn pfq_series(
    a: &[f64],
    b: &[f64],
    z: f64,
    policy: &EvalPolicy,
) -> Result<(f64, f64), SpecFunError> {
    let mut term = 1.0;
    let mut sum = 1.0;
    let mut max_abs: f64 = 1.0;
    let mut small_run = 0;
    for k in 0..policy.max_terms {
        let kf = k as f64;
        let mut ratio = z / (kf + 1.0);
        for &ai in a {
            ratio *= ai + kf;
        }
        for &bi in b {
            let d = bi + kf;
            if d == 0.0 {
                return Err(SpecFunError::Pole {
                    func: "hyp_pfq",
                    at: bi,
                });
            }
            ratio /= d;
        }
        term *= ratio;
        if term == 0.0 {
            return Ok((sum, max_abs));
        }
        sum += term;
        max_abs = max_abs.max(term.abs());
        if !sum.is_finite() {
            return Err(SpecFunError::Convergence {
                func: "hyp_pfq",
                terms: k,
            });
        }
        // Require a few consecutive negligible terms: early terms can dip
        // before the series turns around when parameters are large.
        if term.abs() <= f64::EPSILON * 0.25 * sum.abs() {
            small_run += 1;
            if small_run >= 3 && ratio.abs() < 1.0 {
                return Ok((sum, max_abs));
            }
        } else {
            small_run = 0;
        }
    }
    Err(SpecFunError::Convergence {
        func: "hyp_pfq",
        terms: policy.max_terms,
    })
}

/// Generalized hypergeometric series pFq(a; b; z) summed directly. Intended
/// for p ≤ q, or p = q + 1 with |z| < 1.
pub fn hyp_pfq(a: &[f64], b: &[f64], z: f64, policy: &EvalPolicy) -> Result<f64, SpecFunError> {
    policy.validate()?;
    if a.len() > b.len() + 1 || (a.len() == b.len() + 1 && z.abs() >= 1.0) {
        return Err(SpecFunError::Domain {
            func: "hyp_pfq",
            detail: format!(
                "divergent series for p = {}, q = {}, z = {z}",
                a.len(),
                b.len()
            ),
        });
    }
    if let Some(bi) = b.iter().copied().find(|&bi| is_nonpositive_integer(bi)) {
        return Err(SpecFunError::Pole {
            func: "hyp_pfq",
            at: bi,
        });
    }
    Ok(pfq_series(a, b, z, policy)?.0)
}

/// Gauss hypergeometric function ₂F₁(a, b; c; z) for real z ≤ 1.
pub fn gauss_2f1(a: f64, b: f64, c: f64, z: f64) -> Result<f64, SpecFunError> {
    gauss_2f1_with(a, b, c, z, &EvalPolicy::default())
}

/// [`gauss_2f1`] with an explicit policy.
pub fn gauss_2f1_with(
    a: f64,
    b: f64,
    c: f64,
    z: f64,
    policy: &EvalPolicy,
) -> Result<f64, SpecFunError> {
    policy.validate()?;
    if !(a.is_finite() && b.is_finite() && c.is_finite()) || z.is_nan() {
        return Err(SpecFunError::Domain {
            func: "gauss_2f1",
            detail: format!("non-finite input a={a} b={b} c={c} z={z}"),
        });
    }
    // Terminating polynomials are fine even when c is a non-positive integer
    // of smaller magnitude, but that case never arises here.
    if is_nonpositive_integer(c) {
        return Err(SpecFunError::Domain {
            func: "gauss_2f1",
            detail: format!("c = {c} is a non-positive integer"),
        });
    }
    if z == 0.0 {
        return Ok(1.0);
    }
    if z > 1.0 {
        return Err(SpecFunError::Domain {
            func: "gauss_2f1",
            detail: format!("z = {z} > 1 is on the branch cut"),
        });
    }
    if is_nonpositive_integer(a) || is_nonpositive_integer(b) {
        return Ok(pfq_series(&[a, b], &[c], z, policy)?.0);
    }
    if z < 0.0 {
        if z.is_infinite() {
            return Err(SpecFunError::Domain {
                func: "gauss_2f1",
                detail: "infinite argument".into(),
            });
        }
        // Pfaff: ₂F₁(a,b;c;z) = (1−z)^{−a} ₂F₁(a, c−b; c; z/(z−1)), using
        // whichever of a, b is smaller as the prefactor exponent.
        let w = z / (z - 1.0);
        let ln1mz = (-z).ln_1p();
        let (p, q) = if a >= b { (b, c - a) } else { (a, c - b) };
        return Ok((-p * ln1mz).exp() * unit_interval(p, q, c, w, policy)?);
    }
    unit_interval(a, b, c, z, policy)
}

/// ₂F₁ on 0 < w ≤ 1.
fn unit_interval(a: f64, b: f64, c: f64, w: f64, policy: &EvalPolicy) -> Result<f64, SpecFunError> {
    if is_nonpositive_integer(a) || is_nonpositive_integer(b) {
        return Ok(pfq_series(&[a, b], &[c], w, policy)?.0);
    }
    if w == 1.0 {
        let d = c - a - b;
        if d <= 0.0 {
            return Err(SpecFunError::Domain {
                func: "gauss_2f1",
                detail: format!("series diverges at z = 1 with c-a-b = {d}"),
            });
        }
        return gamma_ratio(&[c, d], &[c - a, c - b]);
    }
    if w <= 0.9 {
        // Euler: ₂F₁(a,b;c;w) = (1−w)^{c−a−b} ₂F₁(c−a, c−b; c; w), preferred
        // when it shrinks the upper parameters (large-c cases from the
        // effective-capacity closed forms).
        let (ea, eb) = (c - a, c - b);
        if (ea * eb).abs() < (a * b).abs() {
            let pref = ((c - a - b) * (-w).ln_1p()).exp();
            return Ok(pref * pfq_series(&[ea, eb], &[c], w, policy)?.0);
        }
        return Ok(pfq_series(&[a, b], &[c], w, policy)?.0);
    }
    // With c large against the upper parameters the direct series decays
    // from its first terms even close to w = 1.
    if c > 0.0 && c * (1.0 - w) > 10.0 * (a.abs() + 1.0) * (b.abs() + 1.0) {
        if let Ok((v, _)) = pfq_series(&[a, b], &[c], w, policy) {
            return Ok(v);
        }
    }
    let d = c - a - b;
    let dist = (d - d.round()).abs();
    if dist > 1e-6 {
        return connection(a, b, c, w, policy);
    }
    // c − a − b (nearly) an integer: the two connection terms have poles that
    // cancel. Shift c symmetrically and Richardson-combine to O(h⁴).
    let h = 1e-5;
    let s = |h: f64| -> Result<f64, SpecFunError> {
        Ok(0.5 * (connection(a, b, c + h, w, policy)? + connection(a, b, c - h, w, policy)?))
    };
    let s1 = s(h)?;
    let s2 = s(2.0 * h)?;
    Ok((4.0 * s1 - s2) / 3.0)
}

/// Connection formula around z = 1.
fn connection(a: f64, b: f64, c: f64, w: f64, policy: &EvalPolicy) -> Result<f64, SpecFunError> {
    let d = c - a - b;
    let v = 1.0 - w;
    let first = {
        let coef = gamma_ratio(&[c, d], &[c - a, c - b])?;
        if coef == 0.0 {
            0.0
        } else {
            coef * pfq_series(&[a, b], &[1.0 - d], v, policy)?.0
        }
    };
    let second = {
        let (lg, sign) = ln_gamma_ratio(&[c, -d], &[a, b])?;
        if sign == 0.0 {
            0.0
        } else {
            let ln = lg + d * v.ln();
            sign * ln.exp() * pfq_series(&[c - a, c - b], &[1.0 + d], v, policy)?.0
        }
    };
    Ok(first + second)
}

/// ∏Γ(num) / ∏Γ(den), zero if any denominator argument is a pole.
pub(crate) fn gamma_ratio(num: &[f64], den: &[f64]) -> Result<f64, SpecFunError> {
    let (lg, sign) = ln_gamma_ratio(num, den)?;
    if sign == 0.0 {
        Ok(0.0)
    } else {
        Ok(sign * lg.exp())
    }
}

/// Log-magnitude and sign of ∏Γ(num) / ∏Γ(den); sign 0 flags a zero.
pub(crate) fn ln_gamma_ratio(num: &[f64], den: &[f64]) -> Result<(f64, f64), SpecFunError> {
    let mut lg = 0.0;
    let mut sign = 1.0;
    for &x in den {
        if is_nonpositive_integer(x) {
            return Ok((f64::NEG_INFINITY, 0.0));
        }
        let (l, s) = ln_gamma_abs(x)?;
        lg -= l;
        sign *= s;
    }
    for &x in num {
        let (l, s) = ln_gamma_abs(x)?;
        lg += l;
        sign *= s;
    }
    Ok((lg, sign))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kummer_reduces_to_exponential() {
        for &z in &[-3.0, -0.5, 0.0, 1.2, 4.0] {
            let v = kummer_1f1_finite(1, z).unwrap();
            assert!((v - f64::exp(z)).abs() <= 1e-15 * f64::exp(z).max(1.0));
        }
        assert_eq!(kummer_1f1_finite(2, 0.0).unwrap(), 1.0);
        assert!(kummer_1f1_finite(0, 1.0).is_err());
    }

    #[test]
    fn two_f_one_log_identity() {
        let v = gauss_2f1(1.0, 1.0, 2.0, -1.0).unwrap();
        assert!((v - std::f64::consts::LN_2).abs() < 1e-14);
        let z: f64 = 0.95;
        let v = gauss_2f1(1.0, 1.0, 2.0, z).unwrap();
        let want = -(1.0 - z).ln() / z;
        assert!(((v - want) / want).abs() < 1e-10, "{v} vs {want}");
    }

    #[test]
    fn two_f_one_zero_argument_and_domain() {
        assert_eq!(gauss_2f1(2.3, -0.7, 1.9, 0.0).unwrap(), 1.0);
        assert!(gauss_2f1(1.0, 1.0, -2.0, 0.3).is_err());
        assert!(gauss_2f1(1.0, 1.0, 2.0, 1.5).is_err());
    }

    #[test]
    fn two_f_one_at_one_is_gauss_sum() {
        // ₂F₁(a,b;c;1) = Γ(c)Γ(c−a−b)/(Γ(c−a)Γ(c−b))
        let v = gauss_2f1(0.5, 0.25, 2.0, 1.0).unwrap();
        let want = gamma_ratio(&[2.0, 1.25], &[1.5, 1.75]).unwrap();
        assert!(((v - want) / want).abs() < 1e-13);
        let near = gauss_2f1(0.5, 0.25, 2.0, 1.0 - 1e-12).unwrap();
        assert!(((near - want) / want).abs() < 1e-8);
    }

    #[test]
    fn two_f_one_integer_gap_near_one() {
        // (1−z)^{−a} = ₂F₁(a, b; b; z), here with c−a−b = −a.
        for &(a, z) in &[(2.0, 0.97), (1.0, 0.999), (3.0, 0.93)] {
            let v = gauss_2f1(a, 1.5, 1.5, z).unwrap();
            let want = (1.0f64 - z).powf(-a);
            assert!(
                ((v - want) / want).abs() < 1e-9,
                "a={a} z={z}: {v} vs {want}"
            );
        }
        // ₂F₁(1, 1; 3; z) has c − a − b = 1.
        let z: f64 = 0.98;
        let want = 2.0 * ((1.0 - z) * (1.0 - z).ln() + z) / (z * z);
        let v = gauss_2f1(1.0, 1.0, 3.0, z).unwrap();
        assert!(((v - want) / want).abs() < 1e-9, "{v} vs {want}");
    }

    #[test]
    fn polynomial_case() {
        // ₂F₁(−2, b; c; z) = 1 − 2bz/c + b(b+1)z²/(c(c+1))
        let (b, c, z) = (1.5, 2.5, -3.0);
        let want = 1.0 - 2.0 * b * z / c + b * (b + 1.0) * z * z / (c * (c + 1.0));
        let v = gauss_2f1(-2.0, b, c, z).unwrap();
        assert!((v - want).abs() < 1e-13 * want.abs());
    }

    #[test]
    fn pfq_rejects_divergent() {
        let p = EvalPolicy::default();
        assert!(hyp_pfq(&[1.0, 1.0, 1.0], &[2.0], 0.1, &p).is_err());
        assert!(hyp_pfq(&[1.0, 1.0], &[2.0], 1.0, &p).is_err());
        let e = hyp_pfq(&[], &[], 0.7, &p).unwrap();
        assert!((e - 0.7f64.exp()).abs() < 1e-15);
    }
}
