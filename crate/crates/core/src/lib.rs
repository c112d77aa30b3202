//! Exact trivialization of semi-linear representations of multiplicative
//! semigroups acting on Laurent series by t -> t^p, together with a
//! rational-function engine for degree-one cocycles of projective and
//! Cremona transformations.

pub mod error;
pub mod scalar;
pub mod series;
pub mod matrix;
pub mod cocycle;
pub mod localsolve;
pub mod corpus;
pub mod ratfunc;
pub mod pgl;

pub use error::{Error, Result};
