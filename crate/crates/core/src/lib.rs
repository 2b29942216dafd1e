//! Numerical Finsler-spacetime geometry and the Cartan geometry of observer
//! space.
//!
//! Every geometric quantity is computed from one closed-form fundamental
//! geometry function `L(x, y)` by truncated Taylor (jet) arithmetic, so all
//! derivatives up to fourth order are exact to rounding.

pub mod algebra;
pub mod cartan;
pub mod causal;
pub mod connection;
pub mod curvature;
pub mod error;
pub mod fd;
pub mod finsler;
pub mod frame;
pub mod geodesic;
pub mod geometry;
pub mod jet;
pub mod model;
pub mod observer;
pub mod ode;
pub mod oracle;
pub mod transport;

pub use error::{Error, ErrorClass, Result};
pub use model::{build_model, evaluate_jet, FundamentalModel, TangentPoint};

/// Library version embedded in every output file.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
