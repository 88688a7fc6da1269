//! Resource theory of measurement sharpness for finite-dimensional POVMs.

pub mod channel;
pub mod error;
pub mod monotones;
pub mod operator;
pub mod povm;
pub mod preorder;
pub mod random;
pub mod sdp;
pub mod tolerances;
pub mod verify;

pub use error::{Error, Result};
pub use tolerances::Tolerances;
