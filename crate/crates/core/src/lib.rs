//! Rotation representations for SO(3) and SO(2), distance metrics between
//! them, Procrustes projections onto SO(3), and a small differentiable
//! learning stack for comparing representations as network outputs.

pub mod cli;
pub mod error;
pub mod experiments;
pub mod learn;
pub mod metrics;
pub mod plot;
pub mod projections;
pub mod repr;
pub mod so3;

pub use error::{Error, Result};
pub use so3::RotationMatrix;
