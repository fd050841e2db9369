//! Exact computer algebra for the Hodge potentials of a point and the associated
//! integrable hierarchy.

pub mod checks;
pub mod error;
pub mod jetring;
pub mod free_energy;
pub mod hierarchy;
pub mod hodge_recursion;
pub mod lambda_extract;
pub mod linalg;
pub mod normal_form;
pub mod point_frobenius;
pub mod rational;
pub mod specializations;

pub use error::{HodgeError, Result};
pub use jetring::{DiffPoly, EpsExpansion, JetMonomial, ParamMono, ParamPoly, RingContext, Symbol, TruncatedTSeries};
pub use rational::Q;
