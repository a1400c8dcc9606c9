//! The symmetric-detection experiment with nearly coincident slits.
//!
//!     cargo run --release --example symmetric_case -- 20000

use two_slit_bohm::scenario::{run_symmetric_case, ScenarioConfig};

fn main() -> two_slit_bohm::Result<()> {
    let n = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(20_000);
    let cfg = ScenarioConfig::symmetric_default(n, 1);
    let r = run_symmetric_case(&cfg)?;
    println!("pairs completed       {}", r.n_completed);
    println!("fringe spacing        {:.4}", r.fringe_spacing.unwrap_or(f64::NAN));
    println!("symmetry metric       {:.6}", r.symmetry_metric.unwrap_or(f64::NAN));
    println!("non-mirror cells SQM  {:.6}", r.sqm_asymmetric_probability);
    println!("non-mirror cells BQM  {:.6}", r.bqm_asymmetric_fraction);
    println!("axis crossings        {}", r.axis_crossings);
    for c in &r.constraint_checks {
        println!("  {:<34} {:>10.4e} {}", c.name, c.margin, if c.satisfied { "ok" } else { "VIOLATED" });
    }
    Ok(())
}
