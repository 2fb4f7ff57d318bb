//! Multilayered restricted radial basis function networks (M-rRBF).
//!
//! Each hidden layer is a 2-D topographic map whose nodes respond with a
//! Gaussian of their distance to the input, gated by a neighborhood around
//! the best matching unit. Training combines the Kohonen-style map update
//! with error fed back from a sigmoid output layer: the sign of each node's
//! delta decides whether its reference vector is pulled toward the input or
//! pushed away, so maps organize by class context rather than by feature
//! similarity alone.

pub mod datasets;
pub mod error;
pub mod evaluation;
pub mod gradcheck;
pub mod learning;
pub mod mapexport;
pub mod model;
pub mod network;
pub mod preprocess;
pub mod topo;

pub use error::{Error, Result};
pub use network::{network_forward, predict, Network, NetworkConfig};
pub use topo::{GridCoord, GridShape};
