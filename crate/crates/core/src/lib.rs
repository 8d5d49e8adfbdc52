pub mod cyclotomic;
pub mod error;
pub mod expsum;
pub mod gf;
pub mod laurent;
pub mod lfun;
pub mod linalg;
pub mod polytope;
pub mod verify;

pub use error::{Error, Result};
