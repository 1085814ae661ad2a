//! Meijer G evaluations with known elementary reductions.

use linkcalc::specfun::{gamma, meijer_g, EvalPolicy, MeijerGSpec, SpecFunError};

fn main() -> Result<(), SpecFunError> {
    let policy = EvalPolicy::default();
    // G^{1,0}_{0,1}(x | -; 0) = e^{-x}
    let exp = MeijerGSpec::new(1, 0, &[], &[0.0])?;
    // G^{1,1}_{1,1}(x | 1-β; 0) = Γ(β)(1+x)^{-β}
    let beta = 2.5;
    let pow = MeijerGSpec::new(1, 1, &[1.0 - beta], &[0.0])?;
    println!("x,G10_01,exp(-x),G11_11,Γ(β)(1+x)^-β");
    for x in [0.1f64, 0.5, 1.0, 2.0, 5.0] {
        println!(
            "{x},{:.15},{:.15},{:.15},{:.15}",
            meijer_g(&exp, x, &policy)?,
            (-x).exp(),
            meijer_g(&pow, x, &policy)?,
            gamma(beta)? * (1.0 + x).powf(-beta)
        );
    }
    Ok(())
}
