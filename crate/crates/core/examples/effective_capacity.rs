//! Effective capacity against the QoS exponent θ, closed form next to the
//! asymptotic expression and the ergodic limit.

use linkcalc::channel::QosSpec;
use linkcalc::config::Scenario;
use linkcalc::metrics::{ec_asymptotic, effective_capacity, ergodic_capacity};
use linkcalc::snr::LinkKind;

fn main() -> linkcalc::Result<()> {
    let sc = Scenario::default().with_gbar_db(20.0);
    let dist = sc.distribution(LinkKind::Df)?;
    let erg = ergodic_capacity(&dist, &QosSpec::with_theta(1e-3)?)?;
    println!("ergodic: {erg:.2} bits/block");
    println!("theta,ec_bits,ec_asy_bits,ec_bps");
    for k in -6..=1 {
        let qos = QosSpec::with_theta(10f64.powi(k))?;
        let ec = effective_capacity(&dist, &qos)?;
        // the high-SNR form needs β > Γ_s
        let asy = ec_asymptotic(&dist, &qos).map_or(f64::NAN, |r| r.value_bits);
        println!(
            "1e{k},{:.4},{asy:.4},{:.4e}",
            ec.value_bits,
            ec.per_second()
        );
    }
    Ok(())
}
