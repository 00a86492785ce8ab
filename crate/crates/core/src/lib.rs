pub mod clip;
pub mod config;
pub mod error;
pub mod export;
pub mod features;
pub mod harmonic;
pub mod run;
pub mod sanitize;
pub mod sweep;
pub mod transforms;

pub use error::{Error, Result};
