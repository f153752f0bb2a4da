pub mod bayes_factor;
pub mod cli;
pub mod error;
pub mod evaluation;
pub mod linear;
pub mod parallel;
pub mod quadrature;
pub mod selection;
pub mod special;

pub use error::{Error, Result};
