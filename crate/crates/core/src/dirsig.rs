//! Single-signer directed signatures and the baseline Schnorr scheme.
//!
//! A directed signature `{S, W, R, m}` can only be checked by the receiver:
//! every verification entry point takes the receiver's [`KeyPair`]. There is
//! deliberately no function that verifies from public values alone.

use std::fmt;

use num_bigint::BigUint;
use num_traits::{One, Zero};

use crate::error::Result;
use crate::format::Document;
use crate::modmath::sub_mod;
use crate::params::{KeyPair, SystemParams};
use crate::random::Randomness;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SchnorrSignature {
    pub r: BigUint,
    pub s: BigUint,
}

/// `{S, W, R, m}`. The threshold scheme produces values of the same shape.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DirectedSignature {
    pub s: BigUint,
    pub w: BigUint,
    pub r: BigUint,
    pub message: Vec<u8>,
}

impl DirectedSignature {
    pub fn is_well_formed(&self, params: &SystemParams) -> bool {
        params.is_scalar(&self.s) && params.is_group_element(&self.w) && params.is_scalar(&self.r)
    }

    pub fn to_text(&self) -> String {
        format!(
            "S={}\nW={}\nR={}\nm={}\n",
            self.s,
            self.w,
            self.r,
            hex::encode(&self.message)
        )
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let doc = Document::parse(text);
        Ok(DirectedSignature {
            s: doc.uint("S")?,
            w: doc.uint("W")?,
            r: doc.uint("R")?,
            message: doc.hex("m")?,
        })
    }
}

impl fmt::Display for DirectedSignature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{{S={}, W={}, R={}, m={}}}",
            self.s,
            self.w,
            self.r,
            hex::encode(&self.message)
        )
    }
}

/// Receiver-side verification result. `mu` and `z` feed the confirmation
/// protocol; both are zero when the signature was malformed.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Verification {
    pub accepted: bool,
    pub mu: BigUint,
    pub z: BigUint,
}

impl Verification {
    fn malformed() -> Self {
        Verification {
            accepted: false,
            mu: BigUint::zero(),
            z: BigUint::zero(),
        }
    }
}

pub fn schnorr_sign<R: Randomness + ?Sized>(
    params: &SystemParams,
    signer: &KeyPair,
    m: &[u8],
    rng: &mut R,
) -> Result<SchnorrSignature> {
    let k = rng.draw(&BigUint::one(), &params.q)?;
    schnorr_sign_with_nonce(params, signer, m, &k)
}

/// `r = h(g^k, m)`, `s = k - x*r mod q`.
pub fn schnorr_sign_with_nonce(
    params: &SystemParams,
    signer: &KeyPair,
    m: &[u8],
    k: &BigUint,
) -> Result<SchnorrSignature> {
    let r = params.hash_point(&params.g_pow(k), m)?;
    let s = sub_mod(k, &(&signer.x * &r), &params.q);
    Ok(SchnorrSignature { r, s })
}

/// Checks `r = h(g^s y^r, m)`.
pub fn schnorr_verify(params: &SystemParams, y_signer: &BigUint, m: &[u8], sig: &SchnorrSignature) -> bool {
    if !params.is_scalar(&sig.r) || !params.is_scalar(&sig.s) || !params.is_group_element(y_signer) {
        return false;
    }
    let x = params.mul_p(&params.g_pow(&sig.s), &params.pow(y_signer, &sig.r));
    matches!(params.hash_point(&x, m), Ok(r) if r == sig.r)
}

pub fn directed_sign<R: Randomness + ?Sized>(
    params: &SystemParams,
    signer: &KeyPair,
    y_receiver: &BigUint,
    m: &[u8],
    rng: &mut R,
) -> Result<DirectedSignature> {
    let k1 = rng.draw(&BigUint::one(), &params.q)?;
    let k2 = rng.draw(&BigUint::one(), &params.q)?;
    directed_sign_with_nonces(params, signer, y_receiver, m, &k1, &k2)
}

/// `W = g^(k1 - k2)`, `Z = y_B^k1`, `R = h(Z, W, m)`, `S = k2 - x*R mod q`.
pub fn directed_sign_with_nonces(
    params: &SystemParams,
    signer: &KeyPair,
    y_receiver: &BigUint,
    m: &[u8],
    k1: &BigUint,
    k2: &BigUint,
) -> Result<DirectedSignature> {
    let w = params.g_pow(&sub_mod(k1, k2, &params.q));
    let z = params.pow(y_receiver, k1);
    let r = params.hash_to_zq(&z, &w, m)?;
    let s = sub_mod(k2, &(&signer.x * &r), &params.q);
    Ok(DirectedSignature {
        s,
        w,
        r,
        message: m.to_vec(),
    })
}

/// `mu = g^S y^R W mod p`, `Z = mu^x_B mod p`, accept iff `R = h(Z, W, m)`.
pub fn directed_verify(
    params: &SystemParams,
    y_signer: &BigUint,
    receiver: &KeyPair,
    sig: &DirectedSignature,
) -> Verification {
    if !sig.is_well_formed(params) || !params.is_group_element(y_signer) {
        return Verification::malformed();
    }
    let mu = signature_mu(params, y_signer, sig);
    let z = params.pow(&mu, &receiver.x);
    let accepted = matches!(params.hash_to_zq(&z, &sig.w, &sig.message), Ok(r) if r == sig.r);
    Verification { accepted, mu, z }
}

/// `g^S y^R W mod p`; public, but useless without `x_B` to raise it.
pub fn signature_mu(params: &SystemParams, y_signer: &BigUint, sig: &DirectedSignature) -> BigUint {
    let gy = params.mul_p(&params.g_pow(&sig.s), &params.pow(y_signer, &sig.r));
    params.mul_p(&gy, &sig.w)
}
