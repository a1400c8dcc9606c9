//! Two identical particles emitted by one source through a double slit,
//! treated both with standard quantum mechanics (joint detection
//! probabilities from `|psi|^2`) and with Bohmian trajectories guided by the
//! same wave function.
//!
//! Module map:
//!
//! - [`model`]: parameters, slit packets and the symmetrized pair amplitude
//! - [`guidance`]: guidance velocities and center-of-mass forms
//! - [`sqm`]: screen observables from `|psi|^2`
//! - [`ensemble`]: equilibrium sampling and trajectory integration
//! - [`scenario`]: the symmetric-detection and selective-detection experiments
//! - [`runner`]: configuration files and result serialization

pub mod ensemble;
pub mod error;
pub mod guidance;
pub mod integrate;
pub mod model;
pub mod quadrature;
pub mod runner;
pub mod sampling;
pub mod scenario;
pub mod sqm;

pub use error::{Error, Result};
pub use guidance::{PairState, VelocityPair};
pub use model::{PhysicalParams, Slit};
pub use sqm::ScreenConfig;
