//! Physical parameters and the slit wave packets.
//!
//! Each slit emits a freely spreading Gaussian packet of complex width
//! `sigma_t = sigma0 * (1 + i s t)`, where `s = hbar / (2 m sigma0^2)` is the
//! spreading rate. The pair wave function is the symmetrized sum over the four
//! slit assignments, which factorizes into `N (psi_A + psi_B)(1) (psi_A + psi_B)(2)`.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Value of a wave function at one point.
pub type ComplexAmplitude = Complex64;

/// Physical constants and source/slit geometry.
///
/// Slit centers sit at `y = +slit_offset` (slit A) and `y = -slit_offset`
/// (slit B); both slits have half-width `sigma0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhysicalParams {
    pub hbar: f64,
    pub mass: f64,
    pub sigma0: f64,
    pub slit_offset: f64,
    pub kx: f64,
    pub ky: f64,
    pub amplitude: Complex64,
}

impl Default for PhysicalParams {
    fn default() -> Self {
        Self {
            hbar: 1.0,
            mass: 1.0,
            sigma0: 1.0,
            slit_offset: 0.1,
            kx: 10.0,
            ky: 0.0,
            amplitude: Complex64::new(1.0, 0.0),
        }
    }
}

impl PhysicalParams {
    /// Natural units (`hbar = m = a = 1`) with the given geometry.
    pub fn natural(sigma0: f64, slit_offset: f64, kx: f64) -> Self {
        Self {
            sigma0,
            slit_offset,
            kx,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        fn check(ok: bool, field: &'static str, reason: &str) -> Result<()> {
            if ok {
                Ok(())
            } else {
                Err(Error::InvalidParams {
                    field,
                    reason: reason.to_string(),
                })
            }
        }
        check(self.hbar.is_finite() && self.hbar > 0.0, "hbar", "must be finite and > 0")?;
        check(self.mass.is_finite() && self.mass > 0.0, "mass", "must be finite and > 0")?;
        check(
            self.sigma0.is_finite() && self.sigma0 > 0.0,
            "sigma0",
            "must be finite and > 0",
        )?;
        check(
            self.slit_offset.is_finite() && self.slit_offset >= 0.0,
            "slit_offset",
            "must be finite and >= 0",
        )?;
        check(self.kx.is_finite(), "kx", "must be finite")?;
        check(self.ky.is_finite(), "ky", "must be finite")?;
        check(
            self.amplitude.re.is_finite()
                && self.amplitude.im.is_finite()
                && self.amplitude.norm() > 0.0,
            "amplitude",
            "must be finite and non-zero",
        )?;
        Ok(())
    }

    /// Group velocity along x.
    pub fn ux(&self) -> f64 {
        self.hbar * self.kx / self.mass
    }

    /// Group velocity along y.
    pub fn uy(&self) -> f64 {
        self.hbar * self.ky / self.mass
    }

    /// Kinetic energy of the x motion of one particle.
    pub fn energy_x(&self) -> f64 {
        0.5 * self.mass * self.ux() * self.ux()
    }

    /// de Broglie wavelength along x.
    pub fn wavelength(&self) -> f64 {
        2.0 * PI / self.kx
    }

    /// Packet spreading rate `hbar / (2 m sigma0^2)`.
    pub fn spreading_rate(&self) -> f64 {
        self.hbar / (2.0 * self.mass * self.sigma0 * self.sigma0)
    }
}

/// Complex packet width at time `t`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SigmaT(pub Complex64);

impl SigmaT {
    pub fn value(&self) -> Complex64 {
        self.0
    }

    /// Real width of the probability density, `|sigma_t|`.
    pub fn modulus(&self) -> f64 {
        self.0.norm()
    }
}

pub fn sigma_t(params: &PhysicalParams, t: f64) -> SigmaT {
    SigmaT(params.sigma0 * Complex64::new(1.0, params.spreading_rate() * t))
}

/// Normalization constant `1 / [2 (1 + exp(-Y^2 / 2 sigma0^2))]`.
pub fn normalization_n(params: &PhysicalParams) -> f64 {
    let ratio = params.slit_offset / params.sigma0;
    1.0 / (2.0 * (1.0 + (-0.5 * ratio * ratio).exp()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Slit {
    A,
    B,
}

impl Slit {
    /// `+1` for the upper slit A, `-1` for B.
    pub fn sign(self) -> f64 {
        match self {
            Slit::A => 1.0,
            Slit::B => -1.0,
        }
    }
}

/// Time-dependent constants of both slit packets, precomputed for repeated
/// evaluation at a fixed `t`.
#[derive(Debug, Clone, Copy)]
pub struct PacketsAt {
    t: f64,
    slit_offset: f64,
    uy: f64,
    kx: f64,
    ky: f64,
    // a (2 pi sigma_t^2)^(-1/4), principal branch.
    prefactor: Complex64,
    // 1 / (4 sigma0 sigma_t)
    inv_width: Complex64,
    // E_x t / hbar
    energy_phase: f64,
    sigma_t: SigmaT,
    n: f64,
}

impl PacketsAt {
    pub fn new(params: &PhysicalParams, t: f64) -> Self {
        let st = sigma_t(params, t);
        let prefactor =
            params.amplitude * (2.0 * PI * st.0 * st.0).powf(-0.25);
        Self {
            t,
            slit_offset: params.slit_offset,
            uy: params.uy(),
            kx: params.kx,
            ky: params.ky,
            prefactor,
            inv_width: (4.0 * params.sigma0 * st.0).inv(),
            energy_phase: params.energy_x() * t / params.hbar,
            sigma_t: st,
            n: normalization_n(params),
        }
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn sigma_t(&self) -> SigmaT {
        self.sigma_t
    }

    pub fn normalization(&self) -> f64 {
        self.n
    }

    /// Packet center `±(Y + u_y t)`.
    pub fn center(&self, slit: Slit) -> f64 {
        slit.sign() * (self.slit_offset + self.uy * self.t)
    }

    /// Single-slit amplitude.
    pub fn amplitude(&self, slit: Slit, x: f64, y: f64) -> Complex64 {
        let sign = slit.sign();
        let dy = y - self.center(slit);
        let travel = y - sign * (self.slit_offset + 0.5 * self.uy * self.t);
        let phase = self.kx * x + sign * self.ky * travel - self.energy_phase;
        self.prefactor * (-dy * dy * self.inv_width + Complex64::new(0.0, phase)).exp()
    }

    /// `d/dy ln psi_slit`, i.e. `-2 (y - center) / (4 sigma0 sigma_t) ± i k_y`.
    pub fn log_derivative(&self, slit: Slit, y: f64) -> Complex64 {
        let dy = y - self.center(slit);
        -2.0 * dy * self.inv_width + Complex64::new(0.0, slit.sign() * self.ky)
    }

    /// One-particle superposition `psi_A + psi_B`.
    pub fn superposition(&self, x: f64, y: f64) -> Complex64 {
        self.amplitude(Slit::A, x, y) + self.amplitude(Slit::B, x, y)
    }

    /// Four-term symmetrized pair amplitude.
    pub fn total(&self, x1: f64, y1: f64, x2: f64, y2: f64) -> Complex64 {
        let a1 = self.amplitude(Slit::A, x1, y1);
        let b1 = self.amplitude(Slit::B, x1, y1);
        let a2 = self.amplitude(Slit::A, x2, y2);
        let b2 = self.amplitude(Slit::B, x2, y2);
        self.n * (a1 * b2 + a2 * b1 + a1 * a2 + b1 * b2)
    }

    /// `|a|^2 (2 pi |sigma_t|^2)^(-1/2)`, the peak scale of `|psi_total|`
    /// up to order-one factors.
    pub fn amplitude_scale(&self) -> f64 {
        self.prefactor.norm_sqr()
    }
}

/// Single-slit packet at time `t`.
pub fn psi_slit(params: &PhysicalParams, which: Slit, x: f64, y: f64, t: f64) -> ComplexAmplitude {
    PacketsAt::new(params, t).amplitude(which, x, y)
}

/// Symmetrized two-particle wave function.
pub fn psi_total(
    params: &PhysicalParams,
    x1: f64,
    y1: f64,
    x2: f64,
    y2: f64,
    t: f64,
) -> ComplexAmplitude {
    PacketsAt::new(params, t).total(x1, y1, x2, y2)
}

/// The same wave function in product form `N (psi_A + psi_B)(1) (psi_A + psi_B)(2)`.
pub fn psi_total_factorized(
    params: &PhysicalParams,
    x1: f64,
    y1: f64,
    x2: f64,
    y2: f64,
    t: f64,
) -> ComplexAmplitude {
    let packets = PacketsAt::new(params, t);
    packets.normalization() * packets.superposition(x1, y1) * packets.superposition(x2, y2)
}
