//! Public group context `(p, q, g)`, user key pairs and the hash oracle.
//!
//! Exponent arithmetic is always reduced mod `q`. Some textbook statements of
//! the Schnorr signature write the response as `k - x*r (mod p)`; that is a
//! typo carried over from older write-ups, since exponents of an order-`q`
//! element only make sense mod `q`. [`validate_params`] checks the group, not
//! that convention.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::{One, Zero};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::format::{parse_hex, parse_uint, Document};
use crate::modmath::{is_probable_prime, pow_mod};
use crate::random::Randomness;

/// Which bit-length policy a parameter set is checked against.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Scale {
    /// `2^511 < p < 2^512` and `2^159 < q < 2^160`.
    Production,
    /// Bit-length bounds waived (`--allow-toy`).
    Toy,
}

/// One hash query: group elements in argument order, then the message.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct HashQuery {
    pub elements: Vec<BigUint>,
    pub message: Vec<u8>,
}

impl HashQuery {
    pub fn new(elements: Vec<BigUint>, message: &[u8]) -> Self {
        HashQuery {
            elements,
            message: message.to_vec(),
        }
    }
}

/// The hash `h` mapping protocol values into `Z_q`.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub enum HashOracle {
    /// SHA-256 over a length-prefixed, fixed-width encoding, reduced mod `q`.
    #[default]
    Standard,
    /// Exact lookup table; queries outside it fail with
    /// [`Error::UnscriptedQuery`].
    Scripted(BTreeMap<HashQuery, BigUint>),
}

impl HashOracle {
    pub fn scripted<I>(rows: I) -> Self
    where
        I: IntoIterator<Item = (HashQuery, BigUint)>,
    {
        HashOracle::Scripted(rows.into_iter().collect())
    }

    pub fn kind(&self) -> &'static str {
        match self {
            HashOracle::Standard => "standard",
            HashOracle::Scripted(_) => "scripted",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SystemParams {
    pub p: BigUint,
    pub q: BigUint,
    pub g: BigUint,
    pub hash: HashOracle,
}

impl SystemParams {
    pub fn new(p: impl Into<BigUint>, q: impl Into<BigUint>, g: impl Into<BigUint>) -> Self {
        SystemParams {
            p: p.into(),
            q: q.into(),
            g: g.into(),
            hash: HashOracle::Standard,
        }
    }

    pub fn with_hash(mut self, hash: HashOracle) -> Self {
        self.hash = hash;
        self
    }

    /// `g^e mod p`.
    pub fn g_pow(&self, e: &BigUint) -> BigUint {
        pow_mod(&self.g, e, &self.p)
    }

    pub fn pow(&self, base: &BigUint, e: &BigUint) -> BigUint {
        pow_mod(base, e, &self.p)
    }

    pub fn mul_p(&self, a: &BigUint, b: &BigUint) -> BigUint {
        (a * b) % &self.p
    }

    /// True for `0 < x < p`.
    pub fn is_group_element(&self, x: &BigUint) -> bool {
        !x.is_zero() && *x < self.p
    }

    pub fn is_scalar(&self, x: &BigUint) -> bool {
        *x < self.q
    }

    /// `h(Z, W, m) mod q`.
    pub fn hash_to_zq(&self, z: &BigUint, w: &BigUint, m: &[u8]) -> Result<BigUint> {
        hash_to_zq(&self.hash, z, w, m, &self.p, &self.q)
    }

    /// `h(X, m) mod q`, the Schnorr challenge.
    pub fn hash_point(&self, x: &BigUint, m: &[u8]) -> Result<BigUint> {
        hash_query(&self.hash, &HashQuery::new(vec![x.clone()], m), &self.p, &self.q)
    }

    pub fn validate(&self, scale: Scale) -> ValidationReport {
        validate_params(self, scale)
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("p={}\nq={}\ng={}\nhash={}\n", self.p, self.q, self.g, self.hash.kind());
        if let HashOracle::Scripted(table) = &self.hash {
            for (query, value) in table {
                for e in &query.elements {
                    out.push_str(&format!("{e},"));
                }
                out.push_str(&format!("{}->{}\n", hex::encode(&query.message), value));
            }
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        Self::from_document(&Document::parse(text))
    }

    pub(crate) fn from_document(doc: &Document) -> Result<Self> {
        let mut params = SystemParams::new(doc.uint("p")?, doc.uint("q")?, doc.uint("g")?);
        let kind = doc.get("hash").map(|e| e.value.as_str()).unwrap_or("standard");
        params.hash = match kind {
            "standard" => HashOracle::Standard,
            "scripted" => {
                let mut table = BTreeMap::new();
                for (line, raw) in &doc.bare {
                    let (query, value) = parse_script_row(*line, raw)?;
                    table.insert(query, value);
                }
                HashOracle::Scripted(table)
            }
            other => {
                return Err(Error::Parse {
                    line: doc.get("hash").map_or(0, |e| e.line),
                    msg: format!("unknown hash kind `{other}`"),
                })
            }
        };
        Ok(params)
    }
}

/// Parses `e1,e2,...,hex(m)->R` (the arrow may also be written `→`).
fn parse_script_row(line: usize, raw: &str) -> Result<(HashQuery, BigUint)> {
    let (lhs, rhs) = raw
        .split_once("->")
        .or_else(|| raw.split_once('→'))
        .ok_or_else(|| Error::Parse {
            line,
            msg: format!("expected `Z,W,hex(m)->R`, got `{raw}`"),
        })?;
    let mut fields: Vec<&str> = lhs.split(',').map(str::trim).collect();
    let msg = fields.pop().unwrap_or("");
    if fields.is_empty() {
        return Err(Error::Parse {
            line,
            msg: "scripted row needs at least one group element".into(),
        });
    }
    let elements = fields.iter().map(|f| parse_uint(line, f)).collect::<Result<Vec<_>>>()?;
    Ok((
        HashQuery {
            elements,
            message: parse_hex(line, msg)?,
        },
        parse_uint(line, rhs)?,
    ))
}

/// `h(Z, W, m) mod q` under the given oracle.
pub fn hash_to_zq(
    oracle: &HashOracle,
    z: &BigUint,
    w: &BigUint,
    m: &[u8],
    p: &BigUint,
    q: &BigUint,
) -> Result<BigUint> {
    hash_query(oracle, &HashQuery::new(vec![z.clone(), w.clone()], m), p, q)
}

pub fn hash_query(oracle: &HashOracle, query: &HashQuery, p: &BigUint, q: &BigUint) -> Result<BigUint> {
    match oracle {
        HashOracle::Standard => {
            let digest = Sha256::digest(encode_query(query, p));
            Ok(BigUint::from_bytes_be(&digest) % q)
        }
        HashOracle::Scripted(table) => table.get(query).map(|v| v % q).ok_or(Error::UnscriptedQuery),
    }
}

/// Each element is written big-endian at the byte width of `p`, the message
/// as-is; every field carries a 4-byte big-endian length prefix.
pub fn encode_query(query: &HashQuery, p: &BigUint) -> Vec<u8> {
    let width = p.to_bytes_be().len();
    let mut buf = Vec::with_capacity((width + 4) * query.elements.len() + query.message.len() + 4);
    for e in &query.elements {
        let raw = e.to_bytes_be();
        let raw: &[u8] = if e.is_zero() { &[] } else { &raw };
        let padded_len = width.max(raw.len());
        buf.extend_from_slice(&(padded_len as u32).to_be_bytes());
        buf.extend(std::iter::repeat_n(0u8, padded_len - raw.len()));
        buf.extend_from_slice(raw);
    }
    buf.extend_from_slice(&(query.message.len() as u32).to_be_bytes());
    buf.extend_from_slice(&query.message);
    buf
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Violation {
    PNotPrime,
    QNotPrime,
    QDoesNotDivide,
    GeneratorTooSmall,
    GeneratorTooLarge,
    GeneratorWrongOrder,
    PBitLength(u64),
    QBitLength(u64),
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::PNotPrime => write!(f, "p is not prime"),
            Violation::QNotPrime => write!(f, "q is not prime"),
            Violation::QDoesNotDivide => write!(f, "q does not divide p - 1"),
            Violation::GeneratorTooSmall => write!(f, "g must exceed 1"),
            Violation::GeneratorTooLarge => write!(f, "g must be below p"),
            Violation::GeneratorWrongOrder => write!(f, "g^q mod p is not 1"),
            Violation::PBitLength(bits) => write!(f, "p has {bits} bits, expected 512"),
            Violation::QBitLength(bits) => write!(f, "q has {bits} bits, expected 160"),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_valid() {
            return write!(f, "VALID");
        }
        write!(f, "INVALID")?;
        for v in &self.violations {
            write!(f, "\n  {v}")?;
        }
        Ok(())
    }
}

/// Reports every violated parameter invariant, not just the first.
pub fn validate_params(params: &SystemParams, scale: Scale) -> ValidationReport {
    let SystemParams { p, q, g, .. } = params;
    let mut violations = Vec::new();
    let p_prime = is_probable_prime(p);
    if !p_prime {
        violations.push(Violation::PNotPrime);
    }
    if !is_probable_prime(q) {
        violations.push(Violation::QNotPrime);
    }
    if p.is_zero() || q.is_zero() || !((p - 1u8) % q).is_zero() {
        violations.push(Violation::QDoesNotDivide);
    }
    if *g <= BigUint::one() {
        violations.push(Violation::GeneratorTooSmall);
    }
    if g >= p {
        violations.push(Violation::GeneratorTooLarge);
    }
    if *g > BigUint::one() && g < p && !pow_mod(g, q, p).is_one() {
        violations.push(Violation::GeneratorWrongOrder);
    }
    if scale == Scale::Production {
        // 2^511 < p < 2^512 means exactly 512 bits (2^511 itself is even).
        if p.bits() != 512 {
            violations.push(Violation::PBitLength(p.bits()));
        }
        if q.bits() != 160 {
            violations.push(Violation::QBitLength(q.bits()));
        }
    }
    ValidationReport { violations }
}

/// Attempt budget used by [`generate_params`] when none is given.
pub const DEFAULT_ATTEMPTS: usize = 100_000;

/// Random `(p, q, g)` with `q` of `q_bits` bits dividing `p - 1`, `p` of
/// `p_bits` bits, and `g = k^((p-1)/q) mod p` for random `k`.
pub fn generate_params<R: Randomness + ?Sized>(
    p_bits: u64,
    q_bits: u64,
    rng: &mut R,
    max_attempts: usize,
) -> Result<SystemParams> {
    if q_bits < 4 || p_bits < 4 || q_bits >= p_bits {
        return Err(Error::InvalidRequest(format!(
            "need 4 <= q_bits < p_bits, got q_bits={q_bits}, p_bits={p_bits}"
        )));
    }
    let mut attempts = 0usize;
    let q_lo = BigUint::one() << (q_bits - 1);
    let q_hi = BigUint::one() << q_bits;
    let p_lo = BigUint::one() << (p_bits - 1);
    let p_hi = BigUint::one() << p_bits;
    loop {
        let q = loop {
            attempts += 1;
            if attempts > max_attempts {
                return Err(Error::GenerationTimeout(max_attempts));
            }
            let cand = rng.draw(&q_lo, &q_hi)? | BigUint::one();
            if cand < q_hi && is_probable_prime(&cand) {
                break cand;
            }
        };
        // p = k*q + 1 with k even; bounds on k keep p inside [2^(p_bits-1), 2^p_bits).
        let k_lo = (&p_lo - 1u8).div_ceil(&q);
        let k_hi = (&p_hi - 1u8) / &q;
        if k_lo >= k_hi {
            continue;
        }
        for _ in 0..(4 * p_bits as usize).max(64) {
            attempts += 1;
            if attempts > max_attempts {
                return Err(Error::GenerationTimeout(max_attempts));
            }
            let mut k = rng.draw(&k_lo, &k_hi)?;
            if k.is_odd() {
                k += 1u8;
            }
            let p = &k * &q + 1u8;
            if p < p_lo || p >= p_hi || !is_probable_prime(&p) {
                continue;
            }
            let g = find_generator(&p, &q, rng)?;
            return Ok(SystemParams::new(p, q, g));
        }
    }
}

/// Toy parameters around a given prime `q`: `p` is the smallest prime of the
/// form `k*q + 1` with `k >= 2`.
pub fn params_for_subgroup<R: Randomness + ?Sized>(q: &BigUint, rng: &mut R) -> Result<SystemParams> {
    if !is_probable_prime(q) {
        return Err(Error::CompositeModulus(q.to_string()));
    }
    let mut k = BigUint::from(2u8);
    loop {
        let p = &k * q + 1u8;
        if is_probable_prime(&p) {
            let g = find_generator(&p, q, rng)?;
            return Ok(SystemParams::new(p, q.clone(), g));
        }
        k += 1u8;
    }
}

fn find_generator<R: Randomness + ?Sized>(p: &BigUint, q: &BigUint, rng: &mut R) -> Result<BigUint> {
    let cofactor = (p - 1u8) / q;
    let two = BigUint::from(2u8);
    let upper = p - 1u8;
    loop {
        let k = if upper > two {
            rng.draw(&two, &upper)?
        } else {
            two.clone()
        };
        let g = pow_mod(&k, &cofactor, p);
        if g > BigUint::one() {
            return Ok(g);
        }
    }
}

/// A user's secret exponent `x` and public element `y = g^x mod p`.
#[derive(Clone, PartialEq, Eq)]
pub struct KeyPair {
    pub x: BigUint,
    pub y: BigUint,
}

impl fmt::Debug for KeyPair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("KeyPair").field("y", &self.y).finish_non_exhaustive()
    }
}

impl KeyPair {
    pub fn from_secret(params: &SystemParams, x: impl Into<BigUint>) -> Result<Self> {
        let x = x.into();
        if x.is_zero() || x >= params.q {
            return Err(Error::SecretOutOfRange);
        }
        let y = params.g_pow(&x);
        Ok(KeyPair { x, y })
    }

    pub fn to_text(&self) -> String {
        format!("x={}\ny={}\n", self.x, self.y)
    }

    pub fn from_text(params: &SystemParams, text: &str) -> Result<Self> {
        let doc = Document::parse(text);
        let pair = KeyPair::from_secret(params, doc.uint("x")?)?;
        if let Some(y) = doc.opt_uint("y")? {
            if y != pair.y {
                return Err(Error::Parse {
                    line: doc.get("y").map_or(0, |e| e.line),
                    msg: "y does not match g^x mod p".into(),
                });
            }
        }
        Ok(pair)
    }
}

/// Draws `x` uniformly from `[1, q)`.
pub fn keygen<R: Randomness + ?Sized>(params: &SystemParams, rng: &mut R) -> Result<KeyPair> {
    let x = rng.draw(&BigUint::one(), &params.q)?;
    KeyPair::from_secret(params, x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::rng_from_seed;

    fn toy() -> SystemParams {
        SystemParams::new(23u32, 11u32, 18u32)
    }

    #[test]
    fn reference_params_validate() {
        assert!(validate_params(&toy(), Scale::Toy).is_valid());
        let prod = validate_params(&toy(), Scale::Production);
        assert_eq!(
            prod.violations,
            vec![Violation::PBitLength(5), Violation::QBitLength(4)]
        );
    }

    #[test]
    fn divisibility_violation() {
        let report = validate_params(&SystemParams::new(23u32, 7u32, 18u32), Scale::Toy);
        assert!(report.violations.contains(&Violation::QDoesNotDivide));
    }

    #[test]
    fn degenerate_generator() {
        let report = validate_params(&SystemParams::new(23u32, 11u32, 1u32), Scale::Toy);
        assert_eq!(report.violations, vec![Violation::GeneratorTooSmall]);
    }

    #[test]
    fn generator_of_wrong_order() {
        // 5^11 mod 23 = 22 by repeated squaring, so 5 generates the full group.
        assert_eq!(pow_mod(&5u32.into(), &11u32.into(), &23u32.into()), 22u32.into());
        let report = validate_params(&SystemParams::new(23u32, 11u32, 5u32), Scale::Toy);
        assert_eq!(report.violations, vec![Violation::GeneratorWrongOrder]);
    }

    #[test]
    fn every_violation_is_reported() {
        let report = validate_params(&SystemParams::new(24u32, 9u32, 30u32), Scale::Toy);
        assert!(report.violations.contains(&Violation::PNotPrime));
        assert!(report.violations.contains(&Violation::QNotPrime));
        assert!(report.violations.contains(&Violation::QDoesNotDivide));
        assert!(report.violations.contains(&Violation::GeneratorTooLarge));
    }

    #[test]
    fn keypair_examples() {
        let params = toy();
        assert_eq!(KeyPair::from_secret(&params, 6u32).unwrap().y, 8u32.into());
        assert_eq!(KeyPair::from_secret(&params, 3u32).unwrap().y, 13u32.into());
        assert_eq!(KeyPair::from_secret(&params, 0u32), Err(Error::SecretOutOfRange));
        assert_eq!(KeyPair::from_secret(&params, 11u32), Err(Error::SecretOutOfRange));
    }

    #[test]
    fn keygen_never_emits_zero() {
        let params = toy();
        let mut rng = rng_from_seed(1);
        for _ in 0..500 {
            let kp = keygen(&params, &mut rng).unwrap();
            assert!(!kp.x.is_zero() && kp.x < params.q);
            assert_eq!(kp.y, params.g_pow(&kp.x));
        }
    }

    #[test]
    fn generated_params_validate() {
        let mut rng = rng_from_seed(99);
        for _ in 0..100 {
            let params = generate_params(32, 16, &mut rng, DEFAULT_ATTEMPTS).unwrap();
            assert_eq!(params.p.bits(), 32);
            assert_eq!(params.q.bits(), 16);
            assert!(validate_params(&params, Scale::Toy).is_valid());
        }
    }

    #[test]
    fn generation_budget() {
        let mut rng = rng_from_seed(3);
        assert_eq!(generate_params(64, 32, &mut rng, 1), Err(Error::GenerationTimeout(1)));
        assert!(matches!(
            generate_params(16, 16, &mut rng, 10),
            Err(Error::InvalidRequest(_))
        ));
    }

    #[test]
    fn subgroup_params_pick_smallest_p() {
        let mut rng = rng_from_seed(5);
        let params = params_for_subgroup(&11u32.into(), &mut rng).unwrap();
        assert_eq!(params.p, 23u32.into());
        assert!(validate_params(&params, Scale::Toy).is_valid());
        assert!(params_for_subgroup(&15u32.into(), &mut rng).is_err());
    }

    #[test]
    fn scripted_hash() {
        let oracle = HashOracle::scripted([(HashQuery::new(vec![16u32.into(), 12u32.into()], b"m"), 5u32.into())]);
        let params = toy().with_hash(oracle);
        assert_eq!(params.hash_to_zq(&16u32.into(), &12u32.into(), b"m"), Ok(5u32.into()));
        assert_eq!(
            params.hash_to_zq(&15u32.into(), &12u32.into(), b"m"),
            Err(Error::UnscriptedQuery)
        );
    }

    #[test]
    fn standard_hash_is_deterministic_and_reduced() {
        let params = toy();
        let a = params.hash_to_zq(&16u32.into(), &12u32.into(), b"m").unwrap();
        let b = params.hash_to_zq(&16u32.into(), &12u32.into(), b"m").unwrap();
        assert_eq!(a, b);
        for z in 1u32..23 {
            for w in 1u32..23 {
                assert!(params.hash_to_zq(&z.into(), &w.into(), b"msg").unwrap() < params.q);
            }
        }
    }

    #[test]
    fn encoding_is_length_prefixed_fixed_width() {
        let p = BigUint::from(70_000u32); // three bytes
        let enc = encode_query(&HashQuery::new(vec![1u32.into(), 258u32.into()], b"ab"), &p);
        assert_eq!(
            enc,
            vec![0, 0, 0, 3, 0, 0, 1, 0, 0, 0, 3, 0, 1, 2, 0, 0, 0, 2, b'a', b'b']
        );
    }

    #[test]
    fn params_text_round_trip() {
        let oracle = HashOracle::scripted([
            (HashQuery::new(vec![16u32.into(), 12u32.into()], b"m"), 5u32.into()),
            (HashQuery::new(vec![9u32.into()], b""), 2u32.into()),
        ]);
        let params = toy().with_hash(oracle);
        let text = params.to_text();
        assert!(text.contains("16,12,6d->5"));
        assert_eq!(SystemParams::from_text(&text).unwrap(), params);
        let arrow = "p=23\nq=11\ng=18\nhash=scripted\n16,12,6d→5\n";
        assert_eq!(
            SystemParams::from_text(arrow)
                .unwrap()
                .hash_to_zq(&16u32.into(), &12u32.into(), b"m"),
            Ok(5u32.into())
        );
    }

    #[test]
    fn keypair_debug_hides_secret() {
        let kp = KeyPair::from_secret(&toy(), 6u32).unwrap();
        assert!(!format!("{kp:?}").contains("x:"));
    }
}
