//! Real-space Hopfield diagonalization for planar polar-dielectric interfaces.

pub mod dispersion;
pub mod dissipative;
pub mod error;
pub mod media;
pub mod modes;
pub mod nonlinear;
pub mod profile;
pub mod quad;
pub mod realspace;
pub mod table;
pub mod verify;

pub use dispersion::{ModeClass, ModeIndex};
pub use error::{HopfieldError, Result};
pub use media::{Layer, LayeredGeometry, MediumParams};
