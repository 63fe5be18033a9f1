//! Monte Carlo toolkit for the cluster index of regularly varying Markov chains:
//! tail-process samplers, cluster-index estimators, stable and large-deviation limit
//! checks, and regenerative block harvesting.

pub mod cli;
pub mod cluster;
pub mod error;
pub mod limits;
pub mod models;
pub mod parallel;
pub mod randkit;
pub mod regen;
pub mod special;
pub mod tailstats;

pub use error::{Error, Result};
