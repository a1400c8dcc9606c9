//! Standard-QM observables on the detection screen: the joint density
//! `|psi|^2`, detector-bin joint detection probabilities, marginals and the
//! fringe spacing.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{sigma_t, PacketsAt, PhysicalParams};
use crate::quadrature::{adaptive_simpson, adaptive_simpson_2d, adaptive_simpson_2d_region, composite_simpson_2d};

/// Absolute tolerance per detector bin.
pub const BIN_TOLERANCE: f64 = 1e-8;

/// Default half-extent of the screen in units of `|sigma_T|`.
pub const DEFAULT_EXTENT_SIGMAS: f64 = 8.0;

/// Half-width, in units of `|sigma_t|`, of the window outside which the
/// density is treated as zero.
const TAIL_SIGMAS: f64 = 12.0;

/// Detector geometry.
///
/// `bin_delta` is the detector size used for joint detection probabilities;
/// `n_bins` is the number of histogram bins spanning `[y_min, y_max]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScreenConfig {
    pub distance_d: f64,
    pub bin_delta: f64,
    pub y_min: f64,
    pub y_max: f64,
    pub n_bins: usize,
}

impl ScreenConfig {
    /// Screen at distance `distance_d` spanning `±8 |sigma_T|`.
    pub fn centered(params: &PhysicalParams, distance_d: f64, bin_delta: f64, n_bins: usize) -> Self {
        let t = distance_d / params.ux();
        let half = DEFAULT_EXTENT_SIGMAS * sigma_t(params, t).modulus() + params.slit_offset + params.uy().abs() * t;
        Self {
            distance_d,
            bin_delta,
            y_min: -half,
            y_max: half,
            n_bins,
        }
    }

    pub fn validate(&self, params: &PhysicalParams) -> Result<()> {
        let invalid = |field: &'static str, reason: &str| {
            Err(Error::InvalidParams {
                field,
                reason: reason.into(),
            })
        };
        if !(self.bin_delta.is_finite() && self.bin_delta > 0.0) {
            return invalid("bin_delta", "must be > 0");
        }
        if !(self.y_min.is_finite() && self.y_max.is_finite() && self.y_min < self.y_max) {
            return invalid("y_min", "must be < y_max");
        }
        if self.n_bins == 0 {
            return invalid("n_bins", "must be >= 1");
        }
        let t = self.distance_d / params.ux();
        if !(t.is_finite() && t > 0.0) {
            return invalid("distance_d", "screen time D / u_x must be > 0");
        }
        Ok(())
    }

    /// Arrival time `D / u_x`.
    pub fn screen_time(&self, params: &PhysicalParams) -> f64 {
        self.distance_d / params.ux()
    }

    /// Histogram bin edges.
    pub fn edges(&self) -> Vec<f64> {
        let w = (self.y_max - self.y_min) / self.n_bins as f64;
        (0..=self.n_bins)
            .map(|i| if i == self.n_bins { self.y_max } else { self.y_min + w * i as f64 })
            .collect()
    }

    /// Detector cells `[j Δ, (j + 1) Δ)`, mirror-symmetric about the axis and
    /// covering `[y_min, y_max]`; returns the range of `j`.
    pub fn detector_indices(&self) -> std::ops::Range<i64> {
        let m = (self.y_min.abs().max(self.y_max.abs()) / self.bin_delta).ceil() as i64;
        -m..m
    }
}

/// Half-width of the region holding all but a negligible part of `|psi(t)|^2`.
pub fn density_support(params: &PhysicalParams, t: f64) -> f64 {
    params.slit_offset + params.uy().abs() * t + TAIL_SIGMAS * sigma_t(params, t).modulus()
}

/// `|psi_total|^2` at transverse positions `(y1, y2)`.
pub fn joint_density(params: &PhysicalParams, y1: f64, y2: f64, t: f64) -> f64 {
    PacketsAt::new(params, t).total(0.0, y1, 0.0, y2).norm_sqr()
}

fn density_fn(params: &PhysicalParams, t: f64) -> impl Fn(f64, f64) -> f64 + Sync {
    let packets = PacketsAt::new(params, t);
    move |y1, y2| packets.total(0.0, y1, 0.0, y2).norm_sqr()
}

/// Probability of a simultaneous detection with particle 1 in
/// `[q1, q1 + Δ]` and particle 2 in `[q2, q2 + Δ]` at the screen time.
pub fn joint_detection_probability(params: &PhysicalParams, screen: &ScreenConfig, q1: f64, q2: f64) -> f64 {
    let t = screen.screen_time(params);
    let d = screen.bin_delta;
    probability_in_rectangle(params, t, (q1, q1 + d), (q2, q2 + d), BIN_TOLERANCE)
}

/// `∫∫ |psi|^2` over a rectangle.
pub fn probability_in_rectangle(params: &PhysicalParams, t: f64, y1: (f64, f64), y2: (f64, f64), tol: f64) -> f64 {
    adaptive_simpson_2d(density_fn(params, t), y1, y2, tol).clamp(0.0, 1.0)
}

/// The same rectangle integral with a fixed tensor Simpson rule of `panels`
/// panels per side.
pub fn probability_in_rectangle_fixed(params: &PhysicalParams, t: f64, y1: (f64, f64), y2: (f64, f64), panels: usize) -> f64 {
    composite_simpson_2d(density_fn(params, t), y1, y2, panels)
}

/// Total probability over the plane.
pub fn total_probability(params: &PhysicalParams, t: f64) -> f64 {
    let r = density_support(params, t);
    adaptive_simpson_2d(density_fn(params, t), (-r, r), (-r, r), 1e-7)
}

/// Probability mass per bin of the one-particle marginal, obtained by
/// integrating the joint density over the other coordinate.
pub fn marginal_bin_masses(params: &PhysicalParams, t: f64, edges: &[f64]) -> Vec<f64> {
    let r = density_support(params, t);
    let f = density_fn(params, t);
    edges
        .par_windows(2)
        .map(|w| adaptive_simpson_2d(&f, (w[0], w[1]), (-r, r), BIN_TOLERANCE))
        .collect()
}

/// Marginal density of one particle at `y`.
pub fn marginal_density(params: &PhysicalParams, y: f64, t: f64) -> f64 {
    let r = density_support(params, t);
    let f = density_fn(params, t);
    adaptive_simpson(|other| f(y, other), -r, r, 1e-12)
}

/// Joint detection probabilities on the histogram grid of a screen.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct JointDensityGrid {
    pub edges: Vec<f64>,
    /// `values[i][j]`: particle 1 in bin `i`, particle 2 in bin `j`.
    pub values: Vec<Vec<f64>>,
}

impl JointDensityGrid {
    pub fn compute(params: &PhysicalParams, screen: &ScreenConfig, t: f64) -> Self {
        let edges = screen.edges();
        let values = edges
            .par_windows(2)
            .map(|a| {
                edges
                    .windows(2)
                    .map(|b| probability_in_rectangle(params, t, (a[0], a[1]), (b[0], b[1]), BIN_TOLERANCE))
                    .collect()
            })
            .collect();
        Self { edges, values }
    }

    pub fn total_mass(&self) -> f64 {
        self.values.iter().flatten().sum()
    }
}

/// Spacing between neighbouring interference maxima on the screen.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FringeSpacing {
    /// `lambda D / 2Y`.
    pub geometric: f64,
    /// `pi hbar T / (Y m)` with `T = D / u_x`.
    pub dynamic: f64,
}

pub fn fringe_spacing(params: &PhysicalParams, screen: &ScreenConfig) -> Result<FringeSpacing> {
    if params.slit_offset <= 0.0 {
        return Err(Error::DegenerateGeometry("fringe spacing is undefined for Y = 0".into()));
    }
    if params.kx <= 0.0 {
        return Err(Error::DegenerateGeometry("fringe spacing requires k_x > 0".into()));
    }
    let y = params.slit_offset;
    let t = screen.screen_time(params);
    Ok(FringeSpacing {
        geometric: params.wavelength() * screen.distance_d / (2.0 * y),
        dynamic: PI * params.hbar * t / (y * params.mass),
    })
}

/// Probability that the two particles are *not* registered in mirror-image
/// detector cells, i.e. `1 - Σ_j P12(jΔ, -(j+1)Δ)` over the screen's cells.
pub fn mirror_asymmetric_probability(params: &PhysicalParams, screen: &ScreenConfig) -> f64 {
    let d = screen.bin_delta;
    let symmetric: f64 = screen
        .detector_indices()
        .collect::<Vec<_>>()
        .par_iter()
        .map(|&j| {
            let q = j as f64 * d;
            joint_detection_probability(params, screen, q, -q - d)
        })
        .collect::<Vec<_>>()
        .iter()
        .sum();
    (1.0 - symmetric).clamp(0.0, 1.0)
}

/// Probability that `|y1 + y2| > bound` at time `t`: the mass lying off a
/// band around the mirror line `y1 = -y2`.
pub fn off_band_probability(params: &PhysicalParams, t: f64, bound: f64) -> f64 {
    let r = density_support(params, t);
    let inside = adaptive_simpson_2d_region(
        density_fn(params, t),
        (-r, r),
        |y1| ((-bound - y1).max(-r), (bound - y1).min(r)),
        1e-10,
    );
    let total = total_probability(params, t);
    (total - inside).max(0.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    fn params() -> PhysicalParams {
        PhysicalParams::natural(1.0, 0.1, 10.0)
    }

    fn screen() -> ScreenConfig {
        ScreenConfig::centered(&params(), 20.0, 0.5, 50)
    }

    #[test]
    fn density_symmetries() {
        let p = params();
        for &(a, b, t) in &[(0.3, -1.2, 0.0), (2.0, 0.7, 1.5), (-0.4, -3.0, 4.0)] {
            let d = joint_density(&p, a, b, t);
            assert!(d >= 0.0);
            assert!((d - joint_density(&p, b, a, t)).abs() <= 1e-15 * d);
            assert!((d - joint_density(&p, -a, -b, t)).abs() <= 1e-13 * d);
        }
    }

    #[test]
    fn unit_mass_at_formation() {
        let mut p = params();
        for y in [0.0, 0.1, 0.8, 2.5] {
            p.slit_offset = y;
            let m = total_probability(&p, 0.0);
            assert!((m - 1.0).abs() <= 1e-6, "Y = {y}: {m}");
        }
    }

    #[test]
    fn whole_screen_detector_has_unit_probability() {
        let p = params();
        let t = screen().screen_time(&p);
        let r = density_support(&p, t);
        let whole = ScreenConfig {
            distance_d: 20.0,
            bin_delta: 2.0 * r,
            y_min: -r,
            y_max: r,
            n_bins: 1,
        };
        let prob = joint_detection_probability(&p, &whole, -r, -r);
        assert!((prob - 1.0).abs() < 1e-6);
    }

    #[test]
    fn detection_probability_symmetries() {
        let p = params();
        let s = screen();
        let d = s.bin_delta;
        let a = joint_detection_probability(&p, &s, 1.0, -1.0);
        let b = joint_detection_probability(&p, &s, -1.0, 1.0);
        let c = joint_detection_probability(&p, &s, -1.0 - d, 1.0 - d);
        assert!((a - b).abs() < 1e-9 && (a - c).abs() < 1e-9);
        assert!(a > 0.0 && a < 1.0);
    }

    #[test]
    fn quadrature_step_halving() {
        let p = params();
        let t = screen().screen_time(&p);
        let coarse = probability_in_rectangle_fixed(&p, t, (1.0, 1.5), (-1.0, -0.5), 16);
        let fine = probability_in_rectangle_fixed(&p, t, (1.0, 1.5), (-1.0, -0.5), 32);
        assert!((coarse - fine).abs() <= 1e-7 * fine);
        let adaptive = probability_in_rectangle(&p, t, (1.0, 1.5), (-1.0, -0.5), BIN_TOLERANCE);
        assert!((adaptive - fine).abs() <= 1e-7 * fine);
    }

    #[test]
    fn detection_probability_matches_monte_carlo() {
        let p = params();
        let s = screen();
        let quad = joint_detection_probability(&p, &s, 1.0, -1.0);
        let t = s.screen_time(&p);
        let packets = PacketsAt::new(&p, t);
        let d = s.bin_delta;
        let n = 10_000_000usize;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        let (mut sum, mut sum_sq) = (0.0, 0.0);
        for _ in 0..n {
            let y1 = 1.0 + d * rng.gen::<f64>();
            let y2 = -1.0 + d * rng.gen::<f64>();
            let f = packets.total(0.0, y1, 0.0, y2).norm_sqr() * d * d;
            sum += f;
            sum_sq += f * f;
        }
        let mean = sum / n as f64;
        let se = ((sum_sq / n as f64 - mean * mean) / n as f64).sqrt();
        assert!((quad - mean).abs() <= 3.0 * se, "quad {quad}, mc {mean} ± {se}");
    }

    #[test]
    fn marginal_is_symmetric_and_normalized() {
        let p = params();
        let t = 2.0;
        let r = density_support(&p, t);
        let edges: Vec<f64> = (0..=40).map(|i| -r + 2.0 * r * i as f64 / 40.0).collect();
        let m = marginal_bin_masses(&p, t, &edges);
        assert!((m.iter().sum::<f64>() - 1.0).abs() < 1e-6);
        for i in 0..20 {
            assert!((m[i] - m[39 - i]).abs() < 1e-9);
        }
    }

    #[test]
    fn marginal_equals_single_particle_density() {
        // By factorization the marginal is N |psi_A + psi_B|^2.
        let p = PhysicalParams::natural(1.0, 1.2, 10.0);
        let t = 1.3;
        let packets = PacketsAt::new(&p, t);
        for &y in &[-2.0, -0.5, 0.0, 0.9, 3.0] {
            let direct = marginal_density(&p, y, t);
            let single = packets.normalization() * packets.superposition(0.0, y).norm_sqr();
            assert!((direct - single).abs() < 1e-9, "{direct} vs {single}");
        }
    }

    #[test]
    fn far_field_peaks_follow_fringe_spacing() {
        // Wide slit separation so several fringes fit under the envelope.
        let p = PhysicalParams::natural(0.1, 2.0, 10.0);
        let d = 40.0;
        let s = ScreenConfig::centered(&p, d, 0.1, 10);
        let t = s.screen_time(&p);
        let spacing = fringe_spacing(&p, &s).unwrap().geometric;
        let packets = PacketsAt::new(&p, t);
        let f = |y: f64| packets.superposition(0.0, y).norm_sqr();
        let h = spacing / 400.0;
        let mut peaks = Vec::new();
        let mut y = -3.0 * spacing;
        while y < 3.0 * spacing {
            if f(y) > f(y - h) && f(y) >= f(y + h) {
                peaks.push(y);
            }
            y += h;
        }
        assert!(peaks.len() >= 3, "{peaks:?}");
        for w in peaks.windows(2) {
            let gap = w[1] - w[0];
            assert!((gap - spacing).abs() < 0.05 * spacing, "gap {gap} vs {spacing}");
        }
    }

    #[test]
    fn fringe_spacing_examples() {
        let mut p = PhysicalParams::natural(1.0, 5.0, 2.0 * PI);
        p.kx = 2.0 * PI; // lambda = 1
        let s = ScreenConfig::centered(&p, 100.0, 0.5, 10);
        let f = fringe_spacing(&p, &s).unwrap();
        assert!((f.geometric - 10.0).abs() < 1e-12);
        assert!((f.geometric - f.dynamic).abs() < 1e-12 * f.geometric);
        p.slit_offset = 10.0;
        assert!((fringe_spacing(&p, &s).unwrap().geometric - 5.0).abs() < 1e-12);
        p.slit_offset = 0.0;
        assert!(matches!(fringe_spacing(&p, &s), Err(Error::DegenerateGeometry(_))));
    }

    #[test]
    fn joint_grid_mass() {
        let p = params();
        let s = ScreenConfig { n_bins: 12, ..screen() };
        let g = JointDensityGrid::compute(&p, &s, s.screen_time(&p));
        assert!(g.values.iter().flatten().all(|&v| v >= 0.0));
        let m = g.total_mass();
        assert!(m <= 1.0 + 1e-6 && m > 0.999, "{m}");
    }

    #[test]
    fn asymmetric_detection_is_likely_at_detector_resolution() {
        let p = params();
        let s = screen();
        let asym = mirror_asymmetric_probability(&p, &s);
        assert!(asym > 0.05 && asym < 1.0, "{asym}");
        let spacing = fringe_spacing(&p, &s).unwrap().geometric;
        let beyond = off_band_probability(&p, s.screen_time(&p), 0.5 * spacing);
        assert!(beyond < 1e-6);
        assert!(off_band_probability(&p, s.screen_time(&p), 1.0) > 0.1);
    }
}
