pub mod corpus;
pub mod dynamics;
pub mod error;
pub mod generator;
pub mod json;
pub mod linop;
pub mod perturbation;
pub mod spectral;
pub mod structure;

pub use error::{Error, Result};
