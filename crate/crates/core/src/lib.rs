//! Moduli spaces of flat connections on colored surfaces over matrix Lie
//! groups, their symplectic forms computed from holonomies, and the exact
//! abelian torus specialization.

pub mod error;
pub mod exact;
pub mod lie;
pub mod linalg;
pub mod moduli;
pub mod report;
pub mod surface;
pub mod symplectic;
pub mod torus_morita;

pub use error::{Error, Result};
