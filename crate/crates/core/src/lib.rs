pub mod action;
pub mod characteristic;
pub mod corpus;
pub mod driver;
pub mod error;
pub mod group;
pub mod input;
pub mod linalg;
pub mod monitor;
pub mod replacement;

pub use error::{Error, Result};
