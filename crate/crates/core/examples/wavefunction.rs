//! Evaluate the slit packets and the two-particle wave function, and check
//! its norm by quadrature.
//!
//!     cargo run --example wavefunction

use two_slit_bohm::model::{normalization_n, psi_slit, psi_total, sigma_t, PhysicalParams, Slit};
use two_slit_bohm::sqm::total_probability;

fn main() {
    let params = PhysicalParams::natural(1.0, 0.1, 10.0);
    let t = 1.0;
    println!("N = {:.12}", normalization_n(&params));
    println!("sigma_t(t = {t}) = {}", sigma_t(&params, t).value());
    for y in [-1.0, 0.0, 0.3, 1.0] {
        let a = psi_slit(&params, Slit::A, 0.0, y, t);
        let b = psi_slit(&params, Slit::B, 0.0, y, t);
        println!("y = {y:5.2}  psi_A = {a:.6}  psi_B = {b:.6}");
    }
    let pair = psi_total(&params, 0.0, 0.4, 0.0, -0.7, t);
    println!("psi(0.4, -0.7) = {pair:.6}");
    for t in [0.0, 1.0, 2.0] {
        println!("norm at t = {t}: {:.10}", total_probability(&params, t));
    }
}
