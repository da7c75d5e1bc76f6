pub mod dist;
pub mod error;
pub mod jet;
pub mod oracle;
pub mod ode;
pub mod painleve;
pub mod quadrature;
pub mod rmt;
pub mod specfun;

pub use error::{Error, Result};
