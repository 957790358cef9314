pub mod cauchy;
pub mod combinatorics;
pub mod error;
pub mod identities;
pub mod kernel;
pub mod linalg;
pub mod scaled;
pub mod series;

pub use error::{Error, Result};
pub use kernel::{theta1, Gauge, KernelSpec, KernelVariant};
pub use scaled::ScaledComplex;
