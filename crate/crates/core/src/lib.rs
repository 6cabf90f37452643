//! Local densities, Gross-Keating multiplicities and the arithmetic of
//! special cycles on quaternionic Shimura varieties, computed exactly over Q.

pub mod clifford;
pub mod counting;
pub mod cycles;
pub mod densities;
pub mod error;
pub mod gkmult;
pub mod padic;
pub mod poly;
pub mod quadform;
pub mod rational;
pub mod suites;
pub mod whittaker;

pub use error::{Error, Result};
pub use padic::{OddPrime, Place, UnitClass};
pub use poly::{DensityPolynomial, Polynomial};
pub use quadform::{QuadSpace, SymMat};
pub use rational::Rational;
