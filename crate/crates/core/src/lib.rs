extern crate openblas_src;

pub mod central;
pub mod cli;
pub mod conic;
pub mod cvar;
pub mod error;
pub mod model;
pub mod sadmm;
pub mod scenario;

pub use error::{Error, Result};
