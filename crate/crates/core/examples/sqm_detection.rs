//! Standard detection statistics from |psi(T)|^2: marginal bins, fringe
//! spacing and the probability of non-mirror detector cells.
//!
//!     cargo run --release --example sqm_detection

use two_slit_bohm::model::PhysicalParams;
use two_slit_bohm::scenario::distance_for_spreading;
use two_slit_bohm::sqm::{fringe_spacing, marginal_bin_masses, mirror_asymmetric_probability, ScreenConfig};

fn main() -> two_slit_bohm::Result<()> {
    let params = PhysicalParams::natural(1.0, 0.1, 10.0);
    let d = distance_for_spreading(&params, 1.0);
    let screen = ScreenConfig::centered(&params, d, 0.5, 20);
    let t = screen.screen_time(&params);

    let spacing = fringe_spacing(&params, &screen)?;
    println!("T = {t}, fringe spacing {:.4} (dynamic {:.4})", spacing.geometric, spacing.dynamic);

    let edges = screen.edges();
    let masses = marginal_bin_masses(&params, t, &edges);
    for (w, p) in edges.windows(2).zip(&masses) {
        println!("[{:7.3}, {:7.3})  {:.6}", w[0], w[1], p);
    }
    println!("sum {:.8}", masses.iter().sum::<f64>());
    println!(
        "P(non-mirror detector cells, size {}) = {:.6}",
        screen.bin_delta,
        mirror_asymmetric_probability(&params, &screen)
    );
    Ok(())
}
