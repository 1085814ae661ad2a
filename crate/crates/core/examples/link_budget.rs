//! Average SNRs of both hops from the physical link budget.

use linkcalc::channel::{linear_to_db, los_probability, ru_path_loss_db, sr_path_loss, LinkBudget};

fn main() -> linkcalc::Result<()> {
    let lb = LinkBudget::default();
    println!("S-R path loss: {:.2} dB", -linear_to_db(sr_path_loss(&lb)?));
    // P_s/(σ² PL_SR) with the λ/(4πd^α) ratio; see `LinkBudget::gbar_sr`
    println!("gbar_sr: {:.2} dB", linear_to_db(lb.gbar_sr()?));
    println!("elevation_deg,p_los,ru_path_loss_db,gbar_ru_db");
    for el in [10.0, 20.0, 30.0, 45.0, 60.0, 90.0] {
        let lb = LinkBudget {
            elevation_deg: el,
            ..lb.clone()
        };
        println!(
            "{el},{:.4},{:.2},{:.2}",
            los_probability(el, lb.s_curve_a, lb.s_curve_b)?,
            ru_path_loss_db(&lb)?,
            linear_to_db(lb.gbar_ru()?)
        );
    }
    Ok(())
}
