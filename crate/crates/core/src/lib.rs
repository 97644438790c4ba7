pub mod error;
pub mod exec;
pub mod dilation;
pub mod operator;
pub mod qfi;
pub mod sweep;
pub mod verify;
pub mod zeno;

pub use error::{Result, ZenoError};
