//! Minimum-uncertainty states of quantum optics: squeezed and coherent
//! states, even and odd superpositions, pair-coherent states, squeezed
//! atomic states, and the interferometric signatures that go with them.
//!
//! Everything works in truncated dense matrix representations over
//! `Complex64`, with hbar = m = omega = 1 throughout.

pub mod boson;
pub mod cli;
pub mod dynamics;
pub mod error;
pub mod gaussian;
pub mod hilbert;
pub(crate) mod linalg;
pub mod serialize;
pub mod spin;
pub mod uncertainty;

pub use error::{Error, Result};

/// Scalar type used for every amplitude and matrix entry.
pub type C64 = num_complex::Complex64;
