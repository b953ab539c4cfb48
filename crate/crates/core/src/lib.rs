pub mod error;
pub mod matrices;
pub mod parallel;
pub mod poly;
pub mod scalar;
pub mod sdp;
pub mod sos;
pub mod zeros;

pub use error::{Error, Result};
