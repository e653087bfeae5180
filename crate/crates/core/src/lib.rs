//! Exact computational number theory around Kochen operators over Q.
//!
//! The crate is organised by role:
//!
//! * [`arith`]: rationals, prime and finite fields, polynomials, factorization.
//! * [`kochen`]: the Kochen operator, its valuation table, and the auxiliary
//!   rational functions used to separate primes by type.
//! * [`pyth`]: Kochen-generated rings over Q, membership verdicts, exclusion
//!   primes and lower-bound certificates.
//! * [`dioph`]: diophantine families, their combinators, Weil restriction and
//!   the compilers for the ring and holomorphy families.
//! * [`brauer`]: quaternion algebras over Q and their local invariants.
//! * [`numberfield`]: monogenic number fields, primes above p and valuations.
//! * [`verify`]: sampled lemma-check suites shared by tests and the CLI.
//!
//! All computation is exact. Heavy enumerations go through [`exec::Exec`],
//! which runs on rayon when the `parallel` feature is enabled.

pub mod arith;
pub mod brauer;
pub mod error;
pub mod dioph;
pub mod exec;
pub mod kochen;
pub mod numberfield;
pub mod pyth;
pub mod verify;

pub use error::{Error, Result};
