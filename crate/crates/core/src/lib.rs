pub mod asymptotics;
pub mod boxes;
pub mod disk;
pub mod error;
pub mod lame;
pub mod special;
pub mod spectrum;
pub mod weyl;

pub use error::{Error, Result};
