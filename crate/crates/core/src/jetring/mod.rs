//! The jet ring: parameters, jet monomials, differential polynomials, ε-expansions and
//! truncated t-series.

mod diffpoly;
mod eps;
mod latex;
mod monomial;
mod param;
mod text;
mod tseries;

pub use diffpoly::{DiffPoly, RingContext, TermKey, DEGBAR_ZERO};
pub use eps::EpsExpansion;
pub use monomial::{JetIndex, JetMonomial};
pub use param::{ParamMono, ParamPoly, Symbol};
pub use text::{JsonDiffPoly, JsonTerm};
pub use tseries::{eval_on_tseries, topological_jets, TExp, TruncatedTSeries};
