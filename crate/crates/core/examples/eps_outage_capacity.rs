//! ε-outage capacity: the largest rate whose outage probability stays at ε.

use linkcalc::config::Scenario;
use linkcalc::metrics::eps_outage_capacity;
use linkcalc::snr::LinkKind;

fn main() -> linkcalc::Result<()> {
    let sc = Scenario::default().with_gbar_db(25.0);
    println!("epsilon,kind,c_eps,iterations");
    for eps in [1e-4, 1e-3, 1e-2, 1e-1] {
        for kind in LinkKind::ALL {
            let r = eps_outage_capacity(&sc.distribution(kind)?, eps)?;
            println!("{eps:e},{kind},{:.6},{}", r.c_eps, r.iterations);
        }
    }
    Ok(())
}
