pub mod cli;
pub mod error;
pub mod grassmann;
pub mod harness;
pub mod linalg;
pub(crate) mod lp;
pub mod matrix;
pub mod metrics;
pub mod noncompact;
pub mod norms;
pub mod weyl;

pub use error::{Error, Result};
pub use matrix::{Field, Matrix, C64};
