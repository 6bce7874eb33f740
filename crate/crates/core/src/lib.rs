//! Global quantum discord (GQD) of consecutive `n`-site blocks in infinite
//! one-dimensional spin-1/2 chains.
//!
//! The crate is organised bottom-up:
//!
//! * [`mps`]: uniform matrix product states, transfer matrices and their
//!   dominant fixed points.
//! * [`rdm`]: reduced density matrices of consecutive blocks.
//! * [`discord`]: measured diagonals, block entropies and the minimisation
//!   of the discord objective over local measurement bases.
//! * [`itebd`]: imaginary-time evolution of two-site unit cells.
//! * [`models`]: the three-body MPS model, XXZ and XY chains, and the exact
//!   free-fermion construction of XY block states.
//! * [`oracle`]: dense reference implementations and two-qubit measures.
//!
//! Basis convention used everywhere: local state `0` is spin-down, `1` is
//! spin-up, and in an `n`-site basis index the leftmost site is the most
//! significant bit.

pub mod discord;
pub mod error;
pub mod itebd;
pub mod linalg;
pub mod models;
pub mod mps;
pub mod oracle;
pub mod pauli;
pub mod rdm;

pub use error::{GqdError, Result};

/// Complex scalar used throughout.
pub type C64 = nalgebra::Complex<f64>;
/// Dense complex matrix.
pub type CMat = nalgebra::DMatrix<C64>;
/// Dense complex vector.
pub type CVec = nalgebra::DVector<C64>;

/// Version of this crate, recorded in run manifests.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
