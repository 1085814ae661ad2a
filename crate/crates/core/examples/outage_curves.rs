//! Outage probability of the four links against average SNR, with the
//! high-SNR approximation and the diversity order alongside.

use linkcalc::config::Scenario;
use linkcalc::metrics::outage;
use linkcalc::snr::LinkKind;

fn main() -> linkcalc::Result<()> {
    let base = Scenario::default();
    let gamma_th = base.gamma_th();
    println!("gbar_db,kind,p_out,p_out_asy,diversity");
    for db in (0..=40).step_by(5) {
        let sc = base.with_gbar_db(db as f64);
        for kind in LinkKind::ALL {
            let r = outage(&sc.distribution(kind)?, gamma_th)?;
            println!(
                "{db},{kind},{:.4e},{:.4e},{:.3}",
                r.p_out, r.p_out_asy, r.diversity_order
            );
        }
    }
    Ok(())
}
