pub mod canonical;
pub mod circular;
mod error;
pub mod states;
pub mod su2;
pub mod trajectory;

pub use error::{Error, Result};
