//! Statistics of products of κ-μ shadowed fading channels with integer
//! shape parameters.

pub mod asym;
pub mod cli;
pub mod error;
pub mod fit;
pub mod gammagamma;
pub mod mixture;
pub mod pdist;
pub mod quad;
pub mod specfun;
pub mod sysmodels;

pub use error::{Error, Result};
