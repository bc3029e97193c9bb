//! (t, n) threshold directed signatures over a prime-order subgroup of
//! `Z_p*`: a dealer splits a group secret among `n` members, any `t` of
//! them jointly sign a message that only the designated receiver can
//! verify, and the receiver can later convince a third party in
//! zero knowledge.

pub mod dirsig;
pub mod error;
pub mod format;
pub mod harness;
pub mod modmath;
pub mod params;
pub mod random;
pub mod shamir;
pub mod sweep;
pub mod threshold;
pub mod vectors;
pub mod zkproof;

pub use error::{Error, Result};
