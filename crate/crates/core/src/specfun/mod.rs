//! Special-function kernel: gamma and beta families, hypergeometric
//! functions and a univariate Meijer G evaluator.
//!
//! Every function here is a pure function of its arguments and the
//! [`EvalPolicy`]; nothing touches global state.

mod gamma;
mod hypergeometric;
mod meijer;

pub use gamma::{
    beta, binomial, factorial, gamma, is_nonpositive_integer, ln_beta, ln_gamma, ln_gamma_abs,
    lower_inc_gamma, pochhammer, reg_inc_beta, reg_inc_beta_complement, reg_lower_inc_gamma,
    reg_upper_inc_gamma, rgamma, upper_inc_gamma,
};
pub use hypergeometric::{gauss_2f1, gauss_2f1_with, hyp_pfq, kummer_1f1_finite};
pub use meijer::{meijer_g, meijer_g_scaled, MeijerGSpec};

use thiserror::Error;

/// Tolerances and limits shared by the series evaluators.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvalPolicy {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_terms: usize,
    /// Offset used to split coincident poles.
    pub pole_perturbation: f64,
}

impl Default for EvalPolicy {
    fn default() -> Self {
        Self {
            rel_tol: 1e-10,
            abs_tol: 1e-14,
            max_terms: 5000,
            pole_perturbation: 1e-6,
        }
    }
}

impl EvalPolicy {
    pub fn validate(&self) -> Result<(), SpecFunError> {
        let ok = self.rel_tol > 0.0
            && self.abs_tol > 0.0
            && self.pole_perturbation > 0.0
            && self.max_terms >= 1;
        if ok {
            Ok(())
        } else {
            Err(SpecFunError::Domain {
                func: "EvalPolicy",
                detail: format!("tolerances must be positive and max_terms >= 1: {self:?}"),
            })
        }
    }
}

#[derive(Debug, Clone, Error, PartialEq)]
pub enum SpecFunError {
    #[error("{func}: domain error: {detail}")]
    Domain { func: &'static str, detail: String },
    #[error("{func}: pole at {at}")]
    Pole { func: &'static str, at: f64 },
    #[error("{func}: no convergence within {terms} terms")]
    Convergence { func: &'static str, terms: usize },
    #[error("Meijer G class (m,n,p,q) = ({m},{n},{p},{q}) is not supported")]
    UnsupportedClass {
        m: usize,
        n: usize,
        p: usize,
        q: usize,
    },
    #[error("{func}: catastrophic cancellation (lost {digits:.1} digits)")]
    PrecisionLoss { func: &'static str, digits: f64 },
}
