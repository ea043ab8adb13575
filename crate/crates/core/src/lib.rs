pub mod diagnostics;
pub mod error;
pub mod estimator;
pub mod harness;
pub mod linalg;
pub mod oracle;
pub mod panel;
pub mod seed;

pub use error::{Error, Result};
