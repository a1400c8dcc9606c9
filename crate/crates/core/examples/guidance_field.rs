//! Bohmian velocities on a grid, and the center-of-mass split into its
//! spreading and residual parts.
//!
//!     cargo run --example guidance_field

use two_slit_bohm::guidance::{com_closed_form, velocity, velocity_com_terms, PairState};
use two_slit_bohm::model::PhysicalParams;

fn main() -> two_slit_bohm::Result<()> {
    let params = PhysicalParams::natural(1.0, 0.1, 10.0);
    let t = 1.5;
    println!("{:>6} {:>6} {:>12} {:>12}", "y1", "y2", "v1", "v2");
    for y1 in [-2.0, -0.5, 0.0, 0.5, 2.0] {
        for y2 in [-1.0, 1.0] {
            let v = velocity(&params, &PairState::new(y1, y2, t))?;
            println!("{y1:6.2} {y2:6.2} {:12.6} {:12.6}", v.v1, v.v2);
        }
    }
    let state = PairState::new(1.2, 0.4, t);
    let terms = velocity_com_terms(&params, &state)?;
    println!(
        "com velocity at {:?}: spreading {:.6e} + residual {:.6e}",
        (state.y1, state.y2),
        terms.spreading,
        terms.residual
    );
    println!("closed-form com for y0 = 0.8 at t = {t}: {:.6}", com_closed_form(&params, 0.8, t));
    Ok(())
}
