//! Fits Rayleigh, Nakagami-m and Fisher-Snedecor F models to the bundled
//! received-power log after path-loss compensation.

use std::path::Path;

use linkcalc::fitting::{
    compensate_path_loss, fit_all, format_table, read_measurements_file, FitOptions, DEFAULT_ALPHA,
};

fn main() -> linkcalc::Result<()> {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("data/location1_synthetic.csv");
    let ms = read_measurements_file(&path)?;
    let comp = compensate_path_loss(&ms, DEFAULT_ALPHA, 1.0)?;
    println!("{} records, {} below d0", ms.len(), comp.below_d0);
    let reports = fit_all(&comp.envelope, &FitOptions::default())?;
    print!("{}", format_table(&ms.label, &reports));
    Ok(())
}
