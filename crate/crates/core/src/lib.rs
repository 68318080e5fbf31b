//! Quantum Fisher information for complex parameters.

pub mod bounds;
pub mod complex_map;
pub mod error;
pub mod homodyne;
pub mod linalg;
pub mod models;
pub mod param;
pub mod policy;
pub mod qfim;
pub mod testing;

pub use error::{Error, Result};
pub use linalg::{CMatrix, Ket, C64};
pub use param::{FdPolicy, ParamPoint};
pub use policy::NumericPolicy;
