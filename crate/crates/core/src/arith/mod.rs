//! Exact arithmetic substrate: rationals, prime fields, finite fields,
//! univariate and multivariate polynomials, factorization and valuations.

pub mod extint;
pub mod fp;
pub mod fppoly;
pub mod fq;
pub mod mpoly;
pub mod primes;
pub mod qpoly;
pub mod rat;
pub mod ratfunc;
pub mod valuation;

pub use extint::ExtInt;
pub use fp::FpElem;
pub use fppoly::FpPoly;
pub use mpoly::MPoly;
pub use qpoly::QPoly;
pub use rat::Rat;
pub use ratfunc::RatFunc;
