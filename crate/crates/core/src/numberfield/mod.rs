//! Monogenic number fields over Q: primes above `p` with their relative
//! types, valuations and residues, the sets `S_p^τ`, weak approximation,
//! and the correspondence check between basic sets and factor fields.

pub mod approx;
pub mod field;
pub mod kill;
pub mod primes;

pub use field::{NfElem, NumberField};
pub use primes::{
    holomorphy_member, primes_above, residue_at_prime, s_p_tau, s_p_tau_basic, val_at_prime,
    NumberFieldPrime, PrimeSummary, Tau,
};
