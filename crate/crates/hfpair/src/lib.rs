pub mod bounds;
pub mod coulomb;
pub mod fibering;
pub mod functional;
pub mod error;
mod fft;
pub mod grid;

pub use error::{HfError, Result};
