//! Bracketed scalar root finding: Illinois-modified secant steps guarded by
//! bisection.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Root {
    pub x: f64,
    pub residual: f64,
    pub iterations: usize,
}

/// Finds x in [lo, hi] with |f(x)| ≤ f_tol. Requires f(lo) and f(hi) of
/// opposite sign (or one of them already within tolerance).
pub fn solve_bracketed<F>(mut f: F, lo: f64, hi: f64, f_tol: f64, max_iter: usize) -> Result<Root>
where
    F: FnMut(f64) -> Result<f64>,
{
    if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
        return Err(Error::Root(format!("invalid bracket [{lo}, {hi}]")));
    }
    let (mut a, mut b) = (lo, hi);
    let (mut fa, mut fb) = (f(a)?, f(b)?);
    if fa.abs() <= f_tol {
        return Ok(Root {
            x: a,
            residual: fa,
            iterations: 0,
        });
    }
    if fb.abs() <= f_tol {
        return Ok(Root {
            x: b,
            residual: fb,
            iterations: 0,
        });
    }
    if fa.signum() == fb.signum() {
        return Err(Error::Root(format!(
            "no sign change on [{lo}, {hi}]: f = {fa:e}, {fb:e}"
        )));
    }
    let mut side = 0i8;
    for it in 1..=max_iter {
        let width = b - a;
        // Regula falsi point; the Illinois halving of the stale endpoint's
        // value keeps it from stalling on one side.
        let mut x = (a * fb - b * fa) / (fb - fa);
        if !(x > a && x < b) || !x.is_finite() {
            x = 0.5 * (a + b);
        }
        let fx = f(x)?;
        if fx.abs() <= f_tol {
            return Ok(Root {
                x,
                residual: fx,
                iterations: it,
            });
        }
        if fx.signum() == fa.signum() {
            a = x;
            fa = fx;
            if side == -1 {
                fb *= 0.5;
            }
            side = -1;
        } else {
            b = x;
            fb = fx;
            if side == 1 {
                fa *= 0.5;
            }
            side = 1;
        }
        // Fall back to a bisection when the bracket is not shrinking fast.
        if b - a > 0.5 * width {
            let mid = 0.5 * (a + b);
            let fm = f(mid)?;
            if fm.abs() <= f_tol {
                return Ok(Root {
                    x: mid,
                    residual: fm,
                    iterations: it,
                });
            }
            if fm.signum() == fa.signum() {
                a = mid;
                fa = fm;
            } else {
                b = mid;
                fb = fm;
            }
            side = 0;
        }
        if b - a <= 4.0 * f64::EPSILON * a.abs().max(b.abs()) {
            let (x, r) = if fa.abs() < fb.abs() {
                (a, fa)
            } else {
                (b, fb)
            };
            return Err(Error::Root(format!(
                "bracket collapsed at x = {x} with residual {r:e} above tolerance {f_tol:e}"
            )));
        }
    }
    Err(Error::Root(format!(
        "no convergence within {max_iter} iterations"
    )))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn finds_cube_root() {
        let r = solve_bracketed(|x| Ok(x * x * x - 2.0), 0.0, 2.0, 1e-14, 200).unwrap();
        assert!((r.x - 2f64.cbrt()).abs() < 1e-14);
        assert!(r.iterations < 40);
    }

    #[test]
    fn rejects_bad_brackets() {
        assert!(solve_bracketed(|x| Ok(x * x + 1.0), -1.0, 1.0, 1e-12, 50).is_err());
        assert!(solve_bracketed(|x| Ok(x), 1.0, 0.0, 1e-12, 50).is_err());
    }

    #[test]
    fn handles_flat_then_steep() {
        // Regula falsi alone stalls on this shape.
        let r = solve_bracketed(|x: f64| Ok(x.powi(9) - 1e-3), 0.0, 4.0, 1e-15, 500).unwrap();
        assert!((r.x - 1e-3f64.powf(1.0 / 9.0)).abs() < 1e-12);
    }
}
