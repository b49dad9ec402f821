pub mod analysis;
pub mod error;
pub mod gallery;
pub mod geometry;
pub mod lifting;
pub mod operator_core;
pub mod shift_calculus;
pub mod structure;

pub use error::{Error, Result};
