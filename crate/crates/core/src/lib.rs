//! Weighted conditional expectation type operators `T = M_w E M_u` on finite
//! atomic measure spaces.

pub mod campaign;
pub mod criteria;
pub mod error;
pub mod io;
pub mod matrix;
pub mod measure;
pub mod operator;
pub mod oracles;
pub mod recognizer;
pub mod spectral;

pub use criteria::{OperatorClass, Status, Verdict};
pub use error::{Error, Result};
pub use matrix::OpMatrix;
pub use measure::{AtomSet, CondData, Func, MeasureSpace, Partition};
pub use num_complex::Complex64;
pub use operator::{Polar, WctOp};
