//! Monte Carlo estimation of the equilibrium energy of soft-core particles
//! confined to a rigid container, and searches over container shapes.

pub mod geometry;
pub mod interaction;
pub mod sampler;
pub mod stats;
pub mod search;
pub mod cli;
