pub mod error;
pub mod fourier;
pub mod lattices;
pub mod lct;
pub mod phase_retrieval;
pub mod signal;
pub mod stlct;
pub mod windows;

pub use error::{Error, Result};
