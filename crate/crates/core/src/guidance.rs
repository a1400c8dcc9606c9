//! Bohmian guidance velocities for the two particles.
//!
//! Velocities are `(hbar / m) Im(d_yi psi / psi)` evaluated with the analytic
//! derivative of each slit packet, term by term over the four-term pair
//! amplitude. The x motion is uniform (`x = u_x t`) and only enters as a
//! common phase.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{PacketsAt, PhysicalParams, Slit};

/// Relative threshold on `|psi|` below which the velocity is not evaluated.
pub const NODE_EPSILON: f64 = 1e-12;

/// Transverse configuration of the pair at time `t`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PairState {
    pub y1: f64,
    pub y2: f64,
    pub t: f64,
}

impl PairState {
    pub fn new(y1: f64, y2: f64, t: f64) -> Self {
        Self { y1, y2, t }
    }

    pub fn com(&self) -> f64 {
        0.5 * (self.y1 + self.y2)
    }

    /// Particles on opposite sides of the symmetry axis.
    pub fn is_opposite(&self) -> bool {
        self.y1 * self.y2 < 0.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VelocityPair {
    pub v1: f64,
    pub v2: f64,
}

/// The center-of-mass velocity split into the free-spreading term and the
/// slit-asymmetry residual.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComVelocityTerms {
    /// `s^2 t y / (1 + s^2 t^2)` with `y` the center of mass.
    pub spreading: f64,
    /// Term proportional to `psi_A1 psi_A2 - psi_B1 psi_B2`.
    pub residual: f64,
}

impl ComVelocityTerms {
    pub fn total(&self) -> f64 {
        self.spreading + self.residual
    }
}

/// The four slit amplitudes at a configuration plus the pair amplitude
/// (without the constant `N`, which cancels in every ratio).
struct Terms {
    a1: Complex64,
    b1: Complex64,
    a2: Complex64,
    b2: Complex64,
    sum: Complex64,
}

fn terms(params: &PhysicalParams, packets: &PacketsAt, state: &PairState) -> Result<Terms> {
    let x = params.ux() * state.t;
    let a1 = packets.amplitude(Slit::A, x, state.y1);
    let b1 = packets.amplitude(Slit::B, x, state.y1);
    let a2 = packets.amplitude(Slit::A, x, state.y2);
    let b2 = packets.amplitude(Slit::B, x, state.y2);
    let sum = a1 * b2 + a2 * b1 + a1 * a2 + b1 * b2;
    let modulus = packets.normalization() * sum.norm();
    let threshold = NODE_EPSILON * packets.amplitude_scale();
    if !(modulus > threshold) {
        return Err(Error::NodeProximity {
            y1: state.y1,
            y2: state.y2,
            t: state.t,
            modulus,
            threshold,
        });
    }
    Ok(Terms { a1, b1, a2, b2, sum })
}

/// Velocities of both particles along y.
pub fn velocity(params: &PhysicalParams, state: &PairState) -> Result<VelocityPair> {
    velocity_with(params, &PacketsAt::new(params, state.t), state)
}

/// As [`velocity`], reusing precomputed packet constants for `state.t`.
pub fn velocity_with(params: &PhysicalParams, packets: &PacketsAt, state: &PairState) -> Result<VelocityPair> {
    let Terms { a1, b1, a2, b2, sum } = terms(params, packets, state)?;
    let da1 = packets.log_derivative(Slit::A, state.y1);
    let db1 = packets.log_derivative(Slit::B, state.y1);
    let da2 = packets.log_derivative(Slit::A, state.y2);
    let db2 = packets.log_derivative(Slit::B, state.y2);

    let d1 = da1 * a1 * b2 + db1 * a2 * b1 + da1 * a1 * a2 + db1 * b1 * b2;
    let d2 = db2 * a1 * b2 + da2 * a2 * b1 + da2 * a1 * a2 + db2 * b1 * b2;

    let scale = params.hbar / params.mass;
    Ok(VelocityPair {
        v1: scale * (d1 / sum).im,
        v2: scale * (d2 / sum).im,
    })
}

/// Vertical velocity of the center of mass `(y1 + y2) / 2`.
pub fn velocity_com(params: &PhysicalParams, state: &PairState) -> Result<f64> {
    let v = velocity(params, state)?;
    Ok(0.5 * (v.v1 + v.v2))
}

/// Center-of-mass velocity written as free spreading plus the residual that
/// vanishes when the two slits coincide.
pub fn velocity_com_terms(params: &PhysicalParams, state: &PairState) -> Result<ComVelocityTerms> {
    let packets = PacketsAt::new(params, state.t);
    let Terms { a1, b1, a2, b2, sum } = terms(params, &packets, state)?;
    let s = params.spreading_rate();
    let st = s * state.t;
    let spreading = s * st * state.com() / (1.0 + st * st);

    let sigma_prod = params.sigma0 * packets.sigma_t().value();
    let coefficient = Complex64::new(params.slit_offset + params.uy() * state.t, 0.0) / sigma_prod
        + Complex64::new(0.0, 2.0 * params.ky);
    let residual = params.hbar / (2.0 * params.mass) * (coefficient * (a1 * a2 - b1 * b2) / sum).im;
    Ok(ComVelocityTerms { spreading, residual })
}

/// Center-of-mass path `y0 sqrt(1 + s^2 t^2)` in the coincident-slit limit.
pub fn com_closed_form(params: &PhysicalParams, y0: f64, t: f64) -> f64 {
    let st = params.spreading_rate() * t;
    y0 * (1.0 + st * st).sqrt()
}
