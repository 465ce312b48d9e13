//! Random-walk local times on planar lattice domains with a fused boundary
//! vertex, together with the Gaussian free fields, Green functions and
//! exceptional-point measures that describe them.
//!
//! ```
//! use walklab::lattice::{build_lattice, DomainSpec};
//! use walklab::green::compute_green;
//!
//! let d = build_lattice(&DomainSpec::unit_square(), 4).unwrap();
//! assert_eq!(d.len(), 1);
//! assert_eq!(compute_green(&d).unwrap().get(0, 0), 0.25);
//! ```

pub mod continuum;
pub mod error;
pub mod experiment;
pub mod fields;
pub mod green;
pub mod io;
pub mod lattice;
pub mod levels;
pub mod linalg;
pub mod potential;
pub mod quad;
pub mod rng;
pub mod stats;
pub mod verify;
pub mod walk;

pub use error::{Error, Result};

/// `g = 1/(2π)`.
pub const G: f64 = 1.0 / (2.0 * std::f64::consts::PI);
/// `α = 2/√g`, so `α² = 8π`.
pub const ALPHA: f64 = 5.013_256_549_262_000_5;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
