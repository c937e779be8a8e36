pub mod arith;
pub mod bailey;
pub mod error;
pub mod harness;
pub mod hypergeometric;
pub mod qobjects;
pub mod report;

pub use error::{Error, Result};
