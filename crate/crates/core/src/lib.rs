//! Density reconstruction from moments with orthogonal-polynomial (K-series)
//! expansions, plus a Monte Carlo front end for probabilistic loops.

pub mod cli;
pub mod distributions;
pub mod error;
pub mod estimator;
pub mod gof;
pub mod loopsim;
pub mod moment_sources;
pub mod orthobasis;
pub mod polynomials;
pub mod quadrature;

pub use error::{Error, ParseError, Result};
