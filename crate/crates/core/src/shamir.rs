//! Dealer-side Shamir sharing of the group secret, reconstruction, and the
//! per-ceremony modified shares.
//!
//! Evaluation points are accepted as arbitrary integers and reduced mod `q`;
//! distinctness and nonzeroness are enforced on the reduced values.

use std::fmt;

use num_bigint::{BigInt, BigUint};
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::format::{parse_uint, Document};
use crate::modmath::{check_points, is_probable_prime, lagrange_coeff_at_zero, mod_inv, reduce, sub_mod};
use crate::params::SystemParams;
use crate::random::Randomness;

/// `f(x) = a_0 + a_1 x + ... + a_{t-1} x^{t-1} mod q`, with `a_0` the group secret.
#[derive(Clone, PartialEq, Eq)]
pub struct DealerPolynomial {
    coefficients: Vec<BigUint>,
    q: BigUint,
}

impl fmt::Debug for DealerPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("DealerPolynomial")
            .field("threshold", &self.threshold())
            .finish_non_exhaustive()
    }
}

impl DealerPolynomial {
    pub fn from_coefficients<I, T>(coefficients: I, q: &BigUint) -> Result<Self>
    where
        I: IntoIterator<Item = T>,
        T: Into<BigUint>,
    {
        let coefficients: Vec<BigUint> = coefficients.into_iter().map(|c| c.into() % q).collect();
        if coefficients.is_empty() {
            return Err(Error::ThresholdExceedsGroup { t: 0, n: 0 });
        }
        Ok(DealerPolynomial {
            coefficients,
            q: q.clone(),
        })
    }

    /// Random polynomial of degree `t - 1`; the secret is drawn from `[1, q)`
    /// when not given.
    pub fn random<R: Randomness + ?Sized>(secret: Option<BigUint>, t: usize, q: &BigUint, rng: &mut R) -> Result<Self> {
        if t == 0 {
            return Err(Error::ThresholdExceedsGroup { t, n: 0 });
        }
        let secret = match secret {
            Some(s) if s.is_zero() || s >= *q => return Err(Error::SecretOutOfRange),
            Some(s) => s,
            None => rng.draw(&BigUint::one(), q)?,
        };
        let mut coefficients = vec![secret];
        for _ in 1..t {
            coefficients.push(rng.draw(&BigUint::zero(), q)?);
        }
        Ok(DealerPolynomial {
            coefficients,
            q: q.clone(),
        })
    }

    pub fn threshold(&self) -> usize {
        self.coefficients.len()
    }

    pub fn coefficients(&self) -> &[BigUint] {
        &self.coefficients
    }

    pub fn secret(&self) -> &BigUint {
        &self.coefficients[0]
    }

    pub fn evaluate(&self, x: &BigUint) -> BigUint {
        let x = x % &self.q;
        self.coefficients
            .iter()
            .rev()
            .fold(BigUint::zero(), |acc, c| (acc * &x + c) % &self.q)
    }
}

/// A roster entry: opaque label plus public evaluation point.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Member {
    pub id: String,
    pub u: BigUint,
}

impl Member {
    pub fn new(id: impl Into<String>, u: impl Into<BigUint>) -> Self {
        Member {
            id: id.into(),
            u: u.into(),
        }
    }
}

#[derive(Clone, PartialEq, Eq)]
pub struct Share {
    pub member_id: String,
    /// Public point as issued; reduced mod `q` wherever it is used.
    pub u: BigUint,
    pub v: BigUint,
}

impl fmt::Debug for Share {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Share")
            .field("member_id", &self.member_id)
            .field("u", &self.u)
            .finish_non_exhaustive()
    }
}

impl Share {
    pub fn new(member_id: impl Into<String>, u: impl Into<BigUint>, v: impl Into<BigUint>) -> Self {
        Share {
            member_id: member_id.into(),
            u: u.into(),
            v: v.into(),
        }
    }

    pub fn to_text(&self) -> String {
        format!("id={}\nu={}\nv={}\n", self.member_id, self.u, self.v)
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let doc = Document::parse(text);
        Ok(Share {
            member_id: doc.require("id")?.value.clone(),
            u: doc.uint("u")?,
            v: doc.uint("v")?,
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ModifiedShare {
    pub member_id: String,
    pub ms: BigUint,
}

/// Public outcome of dealing: what the dealer publishes about the group.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GroupRecord {
    pub group_key: BigUint,
    pub threshold: usize,
    pub members: Vec<Member>,
}

impl GroupRecord {
    pub fn to_text(&self) -> String {
        let mut out = format!(
            "y_G={}\nt={}\nn={}\n",
            self.group_key,
            self.threshold,
            self.members.len()
        );
        for m in &self.members {
            out.push_str(&format!("member={},{}\n", m.id, m.u));
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let doc = Document::parse(text);
        let mut members = Vec::new();
        for e in doc.all("member") {
            let (id, u) = e.value.split_once(',').ok_or_else(|| Error::Parse {
                line: e.line,
                msg: "expected member=id,u".into(),
            })?;
            members.push(Member::new(id.trim(), parse_uint(e.line, u)?));
        }
        let n: usize = doc.number("n")?;
        if n != members.len() {
            return Err(Error::Parse {
                line: doc.get("n").map_or(0, |e| e.line),
                msg: format!("n={n} but {} members listed", members.len()),
            });
        }
        Ok(GroupRecord {
            group_key: doc.uint("y_G")?,
            threshold: doc.number("t")?,
            members,
        })
    }
}

#[derive(Clone, Debug)]
pub struct Dealing {
    pub shares: Vec<Share>,
    pub record: GroupRecord,
    #[cfg(feature = "retain-polynomial")]
    polynomial: DealerPolynomial,
}

impl Dealing {
    pub fn group_key(&self) -> &BigUint {
        &self.record.group_key
    }

    pub fn share(&self, member_id: &str) -> Option<&Share> {
        self.shares.iter().find(|s| s.member_id == member_id)
    }

    /// The dealer polynomial, kept only in builds with `retain-polynomial`.
    #[cfg(feature = "retain-polynomial")]
    pub fn polynomial(&self) -> &DealerPolynomial {
        &self.polynomial
    }
}

fn check_roster(params: &SystemParams, t: usize, members: &[Member]) -> Result<()> {
    if !is_probable_prime(&params.q) {
        return Err(Error::CompositeModulus(params.q.to_string()));
    }
    if t == 0 || t > members.len() {
        return Err(Error::ThresholdExceedsGroup { t, n: members.len() });
    }
    for (i, m) in members.iter().enumerate() {
        if members[..i].iter().any(|o| o.id == m.id) {
            return Err(Error::DuplicateMember(m.id.clone()));
        }
    }
    let points: Vec<BigUint> = members.iter().map(|m| m.u.clone()).collect();
    check_points(&points, &params.q)?;
    Ok(())
}

/// Deals a fresh random polynomial (secret optional) and discards it.
pub fn deal<R: Randomness + ?Sized>(
    params: &SystemParams,
    secret: Option<BigUint>,
    t: usize,
    members: &[Member],
    rng: &mut R,
) -> Result<Dealing> {
    check_roster(params, t, members)?;
    let poly = DealerPolynomial::random(secret, t, &params.q, rng)?;
    deal_polynomial(params, &poly, members)
}

/// Deals shares of a caller-supplied polynomial.
pub fn deal_polynomial(params: &SystemParams, poly: &DealerPolynomial, members: &[Member]) -> Result<Dealing> {
    let t = poly.threshold();
    check_roster(params, t, members)?;
    if poly.q != params.q {
        return Err(Error::Config("polynomial modulus differs from q".into()));
    }
    let shares = members
        .iter()
        .map(|m| Share::new(m.id.clone(), m.u.clone(), poly.evaluate(&m.u)))
        .collect();
    Ok(Dealing {
        shares,
        record: GroupRecord {
            group_key: params.g_pow(poly.secret()),
            threshold: t,
            members: members.to_vec(),
        },
        #[cfg(feature = "retain-polynomial")]
        polynomial: poly.clone(),
    })
}

fn points_of(shares: &[Share]) -> Vec<BigUint> {
    shares.iter().map(|s| s.u.clone()).collect()
}

/// `f(0) = sum_i v_i * lambda_i(0) mod q` over all given shares.
pub fn reconstruct_secret(shares: &[Share], params: &SystemParams) -> Result<BigUint> {
    if shares.is_empty() {
        return Err(Error::NotEnoughShares { needed: 1, got: 0 });
    }
    let points = points_of(shares);
    let q = &params.q;
    let mut acc = BigUint::zero();
    for (i, share) in shares.iter().enumerate() {
        let coeff = lagrange_coeff_at_zero(i, &points, q)?;
        acc = (acc + (&share.v % q) * coeff.value()) % q;
    }
    Ok(acc)
}

/// Full interpolation `f(x) = sum_i v_i prod_{j != i} (x - u_j)/(u_i - u_j)`
/// from the first `t` shares; any further shares must lie on the result.
pub fn reconstruct_polynomial(shares: &[Share], t: usize, params: &SystemParams) -> Result<DealerPolynomial> {
    if t == 0 || shares.len() < t {
        return Err(Error::NotEnoughShares {
            needed: t,
            got: shares.len(),
        });
    }
    let q = &params.q;
    check_points(&points_of(shares), q)?;
    let basis: Vec<BigUint> = shares[..t].iter().map(|s| &s.u % q).collect();
    let mut coeffs = vec![BigUint::zero(); t];
    for (i, share) in shares[..t].iter().enumerate() {
        // numerator polynomial prod_{j != i} (x - u_j), low degree first
        let mut numer = vec![BigUint::one()];
        let mut denom = BigInt::one();
        for (j, uj) in basis.iter().enumerate() {
            if j == i {
                continue;
            }
            let neg_uj = sub_mod(&BigUint::zero(), uj, q);
            let mut next = vec![BigUint::zero(); numer.len() + 1];
            for (k, c) in numer.iter().enumerate() {
                next[k] = (&next[k] + c * &neg_uj) % q;
                next[k + 1] = (&next[k + 1] + c) % q;
            }
            numer = next;
            denom *= BigInt::from(basis[i].clone()) - BigInt::from(uj.clone());
        }
        let scale = (&share.v % q) * mod_inv(&denom, q)?.into_value() % q;
        for (k, c) in numer.iter().enumerate() {
            coeffs[k] = (&coeffs[k] + c * &scale) % q;
        }
    }
    let poly = DealerPolynomial {
        coefficients: coeffs,
        q: q.clone(),
    };
    if shares[t..].iter().any(|s| poly.evaluate(&s.u) != &s.v % q) {
        return Err(Error::InconsistentShares(t));
    }
    Ok(poly)
}

/// `MS_i = v_i * prod_{j != i} (-u_j)/(u_i - u_j) mod q` over the active set.
pub fn modified_share(share: &Share, active_points: &[BigUint], params: &SystemParams) -> Result<ModifiedShare> {
    let q = &params.q;
    let own = &share.u % q;
    let index = active_points
        .iter()
        .position(|u| u % q == own)
        .ok_or_else(|| Error::Config(format!("member {} is not in the active set", share.member_id)))?;
    let coeff = lagrange_coeff_at_zero(index, active_points, q)?;
    Ok(ModifiedShare {
        member_id: share.member_id.clone(),
        ms: reduce(&BigInt::from(&share.v * coeff.value()), q),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::rng_from_seed;

    fn toy() -> SystemParams {
        SystemParams::new(23u32, 11u32, 18u32)
    }

    fn roster() -> Vec<Member> {
        vec![
            Member::new("A", 9u32),
            Member::new("C", 12u32),
            Member::new("E", 14u32),
            Member::new("F", 16u32),
        ]
    }

    #[test]
    fn worked_dealing() {
        let params = toy();
        let poly = DealerPolynomial::from_coefficients([3u32, 5], &params.q).unwrap();
        let dealing = deal_polynomial(&params, &poly, &roster()).unwrap();
        let values: Vec<u32> = dealing.shares.iter().map(|s| s.v.clone().try_into().unwrap()).collect();
        assert_eq!(values, vec![4, 8, 7, 6]);
        assert_eq!(dealing.group_key(), &BigUint::from(13u32));
    }

    #[test]
    fn constant_polynomial_gives_equal_shares() {
        let params = toy();
        let mut rng = rng_from_seed(1);
        let dealing = deal(&params, Some(7u32.into()), 1, &roster(), &mut rng).unwrap();
        assert!(dealing.shares.iter().all(|s| s.v == 7u32.into()));
        assert_eq!(reconstruct_secret(&dealing.shares[2..3], &params).unwrap(), 7u32.into());
    }

    #[test]
    fn dealing_errors() {
        let params = toy();
        let mut rng = rng_from_seed(2);
        let dup = vec![Member::new("A", 1u32), Member::new("B", 12u32)];
        assert!(matches!(
            deal(&params, None, 1, &dup, &mut rng),
            Err(Error::DuplicatePoint(_))
        ));
        let zero = vec![Member::new("A", 1u32), Member::new("B", 22u32)];
        assert!(matches!(
            deal(&params, None, 1, &zero, &mut rng),
            Err(Error::ZeroPoint(_))
        ));
        assert_eq!(
            deal(&params, None, 5, &roster(), &mut rng).unwrap_err(),
            Error::ThresholdExceedsGroup { t: 5, n: 4 }
        );
        assert_eq!(
            deal(&params, None, 0, &roster(), &mut rng).unwrap_err(),
            Error::ThresholdExceedsGroup { t: 0, n: 4 }
        );
        let composite = SystemParams::new(23u32, 10u32, 18u32);
        assert!(matches!(
            deal(&composite, None, 2, &roster(), &mut rng),
            Err(Error::CompositeModulus(_))
        ));
        assert_eq!(
            deal(&params, Some(11u32.into()), 2, &roster(), &mut rng).unwrap_err(),
            Error::SecretOutOfRange
        );
    }

    #[test]
    fn reconstruct_pairs() {
        let params = toy();
        let af = [Share::new("A", 9u32, 4u32), Share::new("F", 16u32, 6u32)];
        assert_eq!(reconstruct_secret(&af, &params).unwrap(), 3u32.into());
        let ce = [Share::new("C", 12u32, 8u32), Share::new("E", 14u32, 7u32)];
        assert_eq!(reconstruct_secret(&ce, &params).unwrap(), 3u32.into());
        let dup = [Share::new("C", 12u32, 8u32), Share::new("X", 1u32, 8u32)];
        assert!(matches!(
            reconstruct_secret(&dup, &params),
            Err(Error::DuplicatePoint(_))
        ));
    }

    #[test]
    fn reconstruct_polynomial_examples() {
        let params = toy();
        let af = [Share::new("A", 9u32, 4u32), Share::new("F", 16u32, 6u32)];
        let poly = reconstruct_polynomial(&af, 2, &params).unwrap();
        assert_eq!(poly.coefficients(), &[BigUint::from(3u32), BigUint::from(5u32)]);

        let all = [
            Share::new("A", 9u32, 4u32),
            Share::new("F", 16u32, 6u32),
            Share::new("C", 12u32, 8u32),
            Share::new("E", 14u32, 7u32),
        ];
        assert_eq!(reconstruct_polynomial(&all, 2, &params).unwrap(), poly);

        let corrupted = [
            Share::new("A", 9u32, 4u32),
            Share::new("F", 16u32, 7u32),
            Share::new("C", 12u32, 8u32),
        ];
        assert_eq!(
            reconstruct_polynomial(&corrupted, 2, &params),
            Err(Error::InconsistentShares(2))
        );
    }

    #[test]
    fn modified_share_examples() {
        let params = toy();
        let h = [BigUint::from(9u32), BigUint::from(16u32)];
        let a = modified_share(&Share::new("A", 9u32, 4u32), &h, &params).unwrap();
        let f = modified_share(&Share::new("F", 16u32, 6u32), &h, &params).unwrap();
        assert_eq!(a.ms, 6u32.into());
        assert_eq!(f.ms, 8u32.into());
        let single = modified_share(&Share::new("C", 12u32, 8u32), &[12u32.into()], &params).unwrap();
        assert_eq!(single.ms, 8u32.into());
    }

    #[test]
    fn modified_shares_sum_to_secret_over_every_subset() {
        let params = SystemParams::new(47u32, 23u32, 2u32);
        let mut rng = rng_from_seed(11);
        let members: Vec<Member> = (1..=8u32).map(|i| Member::new(format!("m{i}"), i * 3)).collect();
        for t in 1..=members.len() {
            let poly = DealerPolynomial::random(None, t, &params.q, &mut rng).unwrap();
            let dealing = deal_polynomial(&params, &poly, &members).unwrap();
            for mask in 0u32..(1 << members.len()) {
                if mask.count_ones() as usize != t {
                    continue;
                }
                let subset: Vec<&Share> = dealing
                    .shares
                    .iter()
                    .enumerate()
                    .filter(|(i, _)| mask & (1 << i) != 0)
                    .map(|(_, s)| s)
                    .collect();
                let points: Vec<BigUint> = subset.iter().map(|s| s.u.clone()).collect();
                let total = subset.iter().fold(BigUint::zero(), |acc, s| {
                    (acc + modified_share(s, &points, &params).unwrap().ms) % &params.q
                });
                assert_eq!(&total, poly.secret());
            }
        }
    }

    #[test]
    fn text_formats() {
        let share = Share::new("A", 9u32, 4u32);
        assert_eq!(share.to_text(), "id=A\nu=9\nv=4\n");
        assert_eq!(Share::from_text(&share.to_text()).unwrap(), share);
        let record = GroupRecord {
            group_key: 13u32.into(),
            threshold: 2,
            members: roster(),
        };
        assert_eq!(GroupRecord::from_text(&record.to_text()).unwrap(), record);
        assert!(GroupRecord::from_text("y_G=13\nt=2\nn=3\nmember=A,9\n").is_err());
    }

    #[test]
    fn debug_output_hides_share_value() {
        let s = format!("{:?}", Share::new("A", 9u32, 4u32));
        assert!(!s.contains("v:"));
    }
}
