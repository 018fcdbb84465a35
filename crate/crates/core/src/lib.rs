//! Free scalar quantum fields smeared along timelike worldlines in Minkowski
//! space: jet-coefficient test distributions, their one-particle vectors on
//! the mass shell, pulled-back two-point kernels with detector diagnostics,
//! and Gaussian completely positive translation channels over finite-rank
//! CCR data.

pub mod ccr;
pub mod geometry;
pub mod jet;
pub mod kernel;
pub mod modes;
pub mod pauli_jordan;
pub mod profile;
pub mod quad;
pub mod recursion;
pub mod special;
pub mod wavefront;
pub mod worldline;

pub use geometry::FourVector;
pub use jet::{GeneralJet, JetDistribution, MultiIndex};
pub use modes::{ModeGrid, OneParticleVector};
pub use worldline::{TransportRule, Worldline};
