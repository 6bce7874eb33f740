//! Concrete chains: the three-body model with an exact `D = 2` MPS ground
//! state, the XXZ and XY two-site Hamiltonian terms, and the exact
//! free-fermion construction of XY block states.

pub mod pfaffian;
pub mod quadrature;
pub mod spin_chains;
pub mod three_body;
pub mod xy_exact;

pub use pfaffian::pfaffian;
pub use spin_chains::{xxz_term, xy_term, XxzParams, XyParams};
pub use three_body::{three_body_mps, three_body_tensors, ThreeBodyParams};
pub use xy_exact::{xy_block_rdm, xy_majorana_correlations, MajoranaCorrelations, XY_SITE_CAP};
