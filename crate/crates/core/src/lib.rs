pub mod ctd;
pub mod dist;
pub mod error;
pub mod per;
pub mod presets;
pub mod quad;
pub mod renewal;
pub mod simcore;
pub mod specfun;
pub mod validate;

pub use error::{Error, Result};
