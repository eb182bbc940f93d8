//! Phaseless reconstruction of signals from unsigned space-time samples
//! `|<A^t f, phi_i>|`: injectivity certificates through the complement
//! property and iteration regularity, and nonconvex recovery.

pub mod circulant;
pub mod error;
pub mod harness;
pub mod injectivity;
pub mod krylov;
pub mod linalg;
pub mod measurements;
pub mod poly;
pub mod rng;
pub mod solver;
pub mod spectral;
pub mod tolerance;

pub use error::{Error, Result};
pub use poly::Polynomial;
pub use spectral::OperatorSpec;
pub use tolerance::Tolerance;
