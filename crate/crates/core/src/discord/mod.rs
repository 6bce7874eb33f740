//! Global quantum discord of a block, minimised over local projective
//! measurements.
//!
//! For an `n`-site state `ρ` measured site by site in the basis given by the
//! columns of a rotation `R`, the discord is
//!
//! ```text
//! G = H(ρ̃) − Σ_j H(ρ̃_j) + Σ_j S(ρ_j) − S(ρ)
//! ```
//!
//! where `ρ̃` and `ρ̃_j` are the measured (diagonal) distributions, `H` the
//! Shannon entropy and `S` the von Neumann entropy, all in bits. Only the
//! first two terms depend on the measurement.

pub mod channels;
pub mod entropy;
pub mod measured;
pub mod objective;
pub mod optimize;
pub mod rotation;

pub use channels::{channel_matrices, ChannelMatrices};
pub use entropy::{truncated_block_entropy, von_neumann_entropy, TruncatedEntropy, TruncationOptions};
pub use measured::{measured_block_diagonals, measured_site_diagonal};
pub use objective::{campbell_objective, DenseDiscordState, DiscordState, EntropyMethod, GqdTerms, MpsDiscordState};
pub use optimize::{minimize_gqd, minimize_gqd_dense, minimize_state, GqdConfig, GqdResult, PerSiteResult};
pub use rotation::{rotation_matrix, RotationAngles};
