//! Two-round threshold signing toward a designated receiver.
//!
//! Round 1: each active member draws `(k1, k2)` and publishes
//! `w_i = g^(k2 - k1)` openly and `z_i = y_B^k2` to the other active members.
//! Round 2: with `R = h(Z, W, m)` each member sends `s_i = k1 - MS_i * R` to
//! the combiner, which sums them into `S`. The receiver recomputes
//! `mu = g^S y_G^R W = g^(sum k2_i)` and checks `R = h(mu^x_B, W, m)`.
//!
//! The combiner cannot check individual partials: the only check available
//! needs `x_B`. A bad partial surfaces as a rejected group signature.

use std::collections::HashSet;
use std::fmt;

use num_bigint::BigUint;
use num_traits::{One, Zero};

use crate::dirsig::{directed_verify, DirectedSignature, Verification};
use crate::error::{Error, Result};
use crate::modmath::sub_mod;
use crate::params::{KeyPair, SystemParams};
use crate::random::Randomness;
use crate::shamir::ModifiedShare;

/// Group signatures have the same `{S, W, R, m}` shape as single-signer ones.
pub type GroupSignature = DirectedSignature;

/// A member's round-one secrets. Consumed by [`round2_partial_sign`].
pub struct SignerNonces {
    ceremony: u64,
    k1: BigUint,
    k2: BigUint,
}

impl fmt::Debug for SignerNonces {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SignerNonces")
            .field("ceremony", &self.ceremony)
            .finish_non_exhaustive()
    }
}

impl SignerNonces {
    pub fn ceremony(&self) -> u64 {
        self.ceremony
    }

    /// Test and audit access to the raw nonces.
    pub fn k1(&self) -> &BigUint {
        &self.k1
    }

    pub fn k2(&self) -> &BigUint {
        &self.k2
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Commitment {
    pub member_id: String,
    pub w: BigUint,
    pub z: BigUint,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PartialSignature {
    pub member_id: String,
    pub s: BigUint,
}

/// What every active member computes after round one.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CeremonyAggregate {
    pub w: BigUint,
    pub z: BigUint,
    pub r: BigUint,
}

/// Remembers which ceremonies a signer already spent nonces on.
#[derive(Clone, Debug, Default)]
pub struct NonceLedger {
    used: HashSet<u64>,
}

impl NonceLedger {
    pub fn claim(&mut self, ceremony: u64) -> Result<()> {
        if self.used.insert(ceremony) {
            Ok(())
        } else {
            Err(Error::NonceReuse(ceremony))
        }
    }
}

pub fn round1_commit<R: Randomness + ?Sized>(
    params: &SystemParams,
    member_id: &str,
    ceremony: u64,
    y_receiver: &BigUint,
    rng: &mut R,
) -> Result<(SignerNonces, Commitment)> {
    let k1 = rng.draw(&BigUint::one(), &params.q)?;
    let k2 = rng.draw(&BigUint::one(), &params.q)?;
    Ok(round1_commit_with(params, member_id, ceremony, y_receiver, k1, k2))
}

/// Round one with caller-chosen nonces.
pub fn round1_commit_with(
    params: &SystemParams,
    member_id: &str,
    ceremony: u64,
    y_receiver: &BigUint,
    k1: BigUint,
    k2: BigUint,
) -> (SignerNonces, Commitment) {
    let w = params.g_pow(&sub_mod(&k2, &k1, &params.q));
    let z = params.pow(y_receiver, &k2);
    (
        SignerNonces { ceremony, k1, k2 },
        Commitment {
            member_id: member_id.to_string(),
            w,
            z,
        },
    )
}

fn ensure_distinct<'a>(ids: impl Iterator<Item = &'a str>) -> Result<()> {
    let mut seen = HashSet::new();
    for id in ids {
        if !seen.insert(id) {
            return Err(Error::DuplicateMember(id.to_string()));
        }
    }
    Ok(())
}

/// `W = prod w_i mod p`.
pub fn aggregate_w<'a>(params: &SystemParams, ws: impl IntoIterator<Item = &'a BigUint>) -> BigUint {
    ws.into_iter().fold(BigUint::one(), |acc, w| params.mul_p(&acc, w))
}

/// `W = prod w_i`, `Z = prod z_i` (both mod p), `R = h(Z, W, m) mod q`.
pub fn aggregate(params: &SystemParams, commitments: &[Commitment], m: &[u8]) -> Result<CeremonyAggregate> {
    if commitments.is_empty() {
        return Err(Error::CountMismatch { expected: 1, got: 0 });
    }
    ensure_distinct(commitments.iter().map(|c| c.member_id.as_str()))?;
    let w = aggregate_w(params, commitments.iter().map(|c| &c.w));
    let z = commitments
        .iter()
        .fold(BigUint::one(), |acc, c| params.mul_p(&acc, &c.z));
    let r = params.hash_to_zq(&z, &w, m)?;
    Ok(CeremonyAggregate { w, z, r })
}

/// `s_i = k1 - MS_i * R mod q`. Takes the nonces by value so they cannot be
/// used for a second partial.
pub fn round2_partial_sign(nonces: SignerNonces, ms: &ModifiedShare, r: &BigUint, q: &BigUint) -> PartialSignature {
    PartialSignature {
        member_id: ms.member_id.clone(),
        s: sub_mod(&nonces.k1, &((&ms.ms % q) * (r % q)), q),
    }
}

/// `S = sum s_i mod q`, packaged with the `W` and `R` the combiner received.
pub fn combine(
    partials: &[PartialSignature],
    w: &BigUint,
    r: &BigUint,
    m: &[u8],
    q: &BigUint,
    expected: usize,
) -> Result<GroupSignature> {
    ensure_distinct(partials.iter().map(|p| p.member_id.as_str()))?;
    if partials.len() != expected {
        return Err(Error::CountMismatch {
            expected,
            got: partials.len(),
        });
    }
    let s = partials.iter().fold(BigUint::zero(), |acc, p| (acc + &p.s) % q);
    Ok(GroupSignature {
        s,
        w: w.clone(),
        r: r.clone(),
        message: m.to_vec(),
    })
}

/// Receiver verification under the group key `y_G`.
pub fn threshold_verify(
    params: &SystemParams,
    y_group: &BigUint,
    receiver: &KeyPair,
    sig: &GroupSignature,
) -> Verification {
    directed_verify(params, y_group, receiver, sig)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::{HashOracle, HashQuery};
    use crate::random::{rng_from_seed, Tape};

    fn toy() -> SystemParams {
        SystemParams::new(23u32, 11u32, 18u32).with_hash(HashOracle::scripted([(
            HashQuery::new(vec![16u32.into(), 12u32.into()], b"m"),
            5u32.into(),
        )]))
    }

    fn n(v: u32) -> BigUint {
        BigUint::from(v)
    }

    #[test]
    fn round1_examples() {
        let params = toy();
        let (_, a) = round1_commit_with(&params, "A", 1, &n(8), n(2), n(7));
        assert_eq!((a.w, a.z), (n(3), n(12)));
        let (_, f) = round1_commit_with(&params, "F", 1, &n(8), n(5), n(9));
        assert_eq!((f.w, f.z), (n(4), n(9)));
        let (_, same) = round1_commit_with(&params, "X", 1, &n(8), n(4), n(4));
        assert_eq!(same.w, n(1));
    }

    #[test]
    fn round1_draws_from_source() {
        let params = toy();
        let mut tape = Tape::new([2u32, 7]);
        let (nonces, c) = round1_commit(&params, "A", 9, &n(8), &mut tape).unwrap();
        assert_eq!((nonces.k1(), nonces.k2(), nonces.ceremony()), (&n(2), &n(7), 9));
        assert_eq!(c.w, n(3));
        assert!(round1_commit(&params, "A", 9, &n(8), &mut tape).is_err());
        let mut rng = rng_from_seed(4);
        let (nonces, _) = round1_commit(&params, "A", 9, &n(8), &mut rng).unwrap();
        assert!(!nonces.k1().is_zero() && nonces.k1() < &params.q);
    }

    #[test]
    fn aggregate_examples() {
        let params = toy();
        let a = Commitment {
            member_id: "A".into(),
            w: n(3),
            z: n(12),
        };
        let f = Commitment {
            member_id: "F".into(),
            w: n(4),
            z: n(9),
        };
        let agg = aggregate(&params, &[a.clone(), f.clone()], b"m").unwrap();
        assert_eq!(
            agg,
            CeremonyAggregate {
                w: n(12),
                z: n(16),
                r: n(5)
            }
        );
        assert_eq!(aggregate(&params, &[f.clone(), a.clone()], b"m").unwrap(), agg);
        assert_eq!(
            aggregate(&params, &[a.clone(), a.clone()], b"m"),
            Err(Error::DuplicateMember("A".into()))
        );
        let std_params = SystemParams::new(23u32, 11u32, 18u32);
        let single = aggregate(&std_params, std::slice::from_ref(&a), b"m").unwrap();
        assert_eq!((single.w, single.z), (n(3), n(12)));
    }

    #[test]
    fn partial_sign_examples() {
        let q = n(11);
        let (nonces, _) = round1_commit_with(&toy(), "A", 1, &n(8), n(2), n(7));
        let ms = ModifiedShare {
            member_id: "A".into(),
            ms: n(6),
        };
        assert_eq!(round2_partial_sign(nonces, &ms, &n(5), &q).s, n(5));
        let (nonces, _) = round1_commit_with(&toy(), "F", 1, &n(8), n(5), n(9));
        let ms = ModifiedShare {
            member_id: "F".into(),
            ms: n(8),
        };
        assert_eq!(round2_partial_sign(nonces, &ms, &n(5), &q).s, n(9));
        let (nonces, _) = round1_commit_with(&toy(), "F", 1, &n(8), n(5), n(9));
        assert_eq!(round2_partial_sign(nonces, &ms, &n(0), &q).s, n(5));
    }

    #[test]
    fn combine_examples() {
        let q = n(11);
        let parts = vec![
            PartialSignature {
                member_id: "A".into(),
                s: n(5),
            },
            PartialSignature {
                member_id: "F".into(),
                s: n(9),
            },
        ];
        let sig = combine(&parts, &n(12), &n(5), b"m", &q, 2).unwrap();
        assert_eq!(sig.to_text(), "S=3\nW=12\nR=5\nm=6d\n");
        let rev: Vec<_> = parts.iter().rev().cloned().collect();
        assert_eq!(combine(&rev, &n(12), &n(5), b"m", &q, 2).unwrap(), sig);
        assert_eq!(combine(&parts[..1], &n(12), &n(5), b"m", &q, 1).unwrap().s, n(5));
        assert_eq!(
            combine(&parts[..1], &n(12), &n(5), b"m", &q, 2),
            Err(Error::CountMismatch { expected: 2, got: 1 })
        );
        let dup = vec![parts[0].clone(), parts[0].clone()];
        assert_eq!(
            combine(&dup, &n(12), &n(5), b"m", &q, 2),
            Err(Error::DuplicateMember("A".into()))
        );
    }

    #[test]
    fn verify_examples() {
        let params = toy();
        let receiver = KeyPair::from_secret(&params, 6u32).unwrap();
        let sig = GroupSignature {
            s: n(3),
            w: n(12),
            r: n(5),
            message: b"m".to_vec(),
        };
        let v = threshold_verify(&params, &n(13), &receiver, &sig);
        assert_eq!(
            v,
            Verification {
                accepted: true,
                mu: n(3),
                z: n(16)
            }
        );
        let forged = GroupSignature { s: n(7), ..sig.clone() };
        assert!(!threshold_verify(&params, &n(13), &receiver, &forged).accepted);
    }

    #[test]
    fn nonce_ledger_rejects_reuse() {
        let mut ledger = NonceLedger::default();
        ledger.claim(1).unwrap();
        ledger.claim(2).unwrap();
        assert_eq!(ledger.claim(1), Err(Error::NonceReuse(1)));
    }
}
