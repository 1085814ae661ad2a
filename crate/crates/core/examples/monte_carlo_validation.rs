//! Monte Carlo estimates against the analytic outage and effective capacity.
//! Results do not depend on the number of worker threads.

use linkcalc::config::Scenario;
use linkcalc::mcsim::{mc_metrics, SimConfig};
use linkcalc::metrics::effective_capacity;
use linkcalc::snr::LinkKind;

fn main() -> linkcalc::Result<()> {
    let sc = Scenario::default().with_gbar_db(15.0);
    let qos = sc.qos_spec()?;
    let gamma_th = sc.gamma_th();
    let cfg = SimConfig::new(1_000_000, 7);
    println!("kind,p_out,p_out_mc,se,ec,ec_mc,se");
    for kind in LinkKind::ALL {
        let dist = sc.distribution(kind)?;
        let mc = mc_metrics(&dist, &qos, gamma_th, &cfg)?;
        let p = dist.cdf(gamma_th)?;
        let ec = effective_capacity(&dist, &qos)?.value_bits;
        println!(
            "{kind},{p:.5e},{:.5e},{:.1e},{ec:.3},{:.3},{:.2}",
            mc.p_out_hat, mc.p_out_se, mc.ec_hat, mc.ec_se
        );
    }
    Ok(())
}
