//! Sample pairs from |psi(0)|^2, integrate them to the screen and compare the
//! terminal histogram of y1 with the |psi(T)|^2 marginal.
//!
//!     cargo run --release --example equivariance -- 20000

use two_slit_bohm::ensemble::{run_ensemble, Conditioning, SamplerConfig};
use two_slit_bohm::integrate::IntegratorConfig;
use two_slit_bohm::model::PhysicalParams;
use two_slit_bohm::scenario::{distance_for_spreading, Histogram};
use two_slit_bohm::sqm::{marginal_bin_masses, ScreenConfig};

fn main() -> two_slit_bohm::Result<()> {
    let n: usize = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(20_000);
    let params = PhysicalParams::natural(1.0, 0.1, 10.0);
    let screen = ScreenConfig::centered(&params, distance_for_spreading(&params, 1.0), 0.5, 24);
    let t = screen.screen_time(&params);
    let sampler = SamplerConfig {
        n_pairs: n,
        seed: 11,
        conditioning: Conditioning::None,
    };
    let run = run_ensemble(&params, &sampler, &IntegratorConfig::default(), t, None)?;

    let edges = screen.edges();
    let mut hist = Histogram::new(edges.clone());
    run.completed().for_each(|tr| hist.fill(tr.terminal.y1));
    let expected = marginal_bin_masses(&params, t, &edges);
    let done = run.counts.completed as f64;

    let mut chi2 = 0.0;
    println!("{:>8} {:>10} {:>10}", "bin", "observed", "expected");
    for (i, (&c, &p)) in hist.counts.iter().zip(&expected).enumerate() {
        let e = p * done;
        if e > 5.0 {
            chi2 += (c as f64 - e).powi(2) / e;
        }
        println!("{i:8} {c:10} {e:10.1}");
    }
    println!("chi2 over populated bins: {chi2:.2}");
    println!("rejected: {:?}, axis crossings: {}", run.counts, run.axis_crossings());
    Ok(())
}
