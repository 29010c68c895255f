pub mod autodiff;
pub mod cli;
pub mod config;
pub mod data;
pub mod dynamics;
pub mod error;
pub mod eval;
pub mod nn;
pub mod training;

pub use error::{Error, Result};
