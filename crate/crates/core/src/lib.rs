//! Exact-arithmetic experiments on badly approximable vectors and subspaces.

pub mod badness;
pub mod cli;
pub mod config;
pub mod error;
pub mod exactnum;
pub mod experiment;
pub mod geometry;
pub mod lattice;
pub mod rates;
pub mod series;

pub use error::{Error, Result};
