//! Selective detection: a subensemble with its initial center of mass
//! around 3 sigma0, kept only when detected on opposite sides. Prints the
//! detection-free band next to its predicted length and a zero-offset control.
//!
//!     cargo run --release --example selective_case -- 20000

use two_slit_bohm::scenario::{run_selective_case, run_selective_control, ScenarioConfig};

fn main() -> two_slit_bohm::Result<()> {
    let n = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(20_000);
    let cfg = ScenarioConfig::selective_default(n, 2);
    let r = run_selective_case(&cfg)?;
    let band = &r.empty_band;
    println!("pairs kept            {}", r.n_completed);
    println!("empty band            [{:.4}, {:.4}]", band.lower, band.upper);
    println!("measured length       {:.4}", band.length_measured);
    println!("predicted (mean y0)   {:.4}  with <y0> = {:.4}", band.l_predicted, band.mean_initial_com);
    println!("predicted (target)    {:.4}", band.l_predicted_target.unwrap_or(f64::NAN));
    if let Some(sqm) = &r.sqm_selective {
        println!("|psi|^2, opposite sides: P(a detection inside the band) = {:.6}", sqm.restricted_band_probability);
    }
    let control = run_selective_control(&cfg)?;
    println!("control band length   {:.3e}", control.empty_band.length_measured);
    for note in &r.notes {
        println!("note: {note}");
    }
    Ok(())
}
