//! Party state machines. Each party reacts to envelopes and emits new ones;
//! none of them shares state with another.

use std::collections::BTreeMap;

use num_bigint::{BigInt, BigUint};

use super::message::{Envelope, PartyId, Payload};
use crate::dirsig::Verification;
use crate::error::{Error, Result};
use crate::modmath::reduce;
use crate::params::{KeyPair, SystemParams};
use crate::random::Source;
use crate::shamir::{deal, deal_polynomial, modified_share, DealerPolynomial, Member, ModifiedShare, Share};
use crate::threshold::{
    aggregate, aggregate_w, combine, round1_commit, round2_partial_sign, threshold_verify, CeremonyAggregate,
    Commitment, GroupSignature, NonceLedger, PartialSignature, SignerNonces,
};

/// Deviations a signer can be configured with.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub enum SignerBehavior {
    #[default]
    Honest,
    /// Adds `delta` to the partial signature before sending it.
    CorruptPartial(BigInt),
    /// An outsider standing in for the member: fresh commitments, but no
    /// share, so its partial is computed as if `v = 0`.
    Impersonator,
}

pub struct Sdc {
    pub id: PartyId,
    params: SystemParams,
    roster: Vec<Member>,
    threshold: usize,
    polynomial: Option<Vec<BigUint>>,
    source: Source,
}

impl Sdc {
    pub fn new(
        params: SystemParams,
        roster: Vec<Member>,
        threshold: usize,
        polynomial: Option<Vec<BigUint>>,
        source: Source,
    ) -> Self {
        Sdc {
            id: PartyId::sdc(),
            params,
            roster,
            threshold,
            polynomial,
            source,
        }
    }

    fn start(&mut self) -> Result<Vec<Envelope>> {
        let dealing = match self.polynomial.take() {
            Some(coeffs) => {
                let poly = DealerPolynomial::from_coefficients(coeffs, &self.params.q)?;
                deal_polynomial(&self.params, &poly, &self.roster)?
            }
            None => deal(&self.params, None, self.threshold, &self.roster, &mut self.source)?,
        };
        let mut out = vec![Envelope::broadcast(
            self.id.clone(),
            Payload::GroupKey {
                y_group: dealing.group_key().clone(),
            },
        )];
        for share in &dealing.shares {
            out.push(Envelope::direct(
                self.id.clone(),
                PartyId::signer(&share.member_id),
                Payload::Share {
                    u: share.u.clone(),
                    v: share.v.clone(),
                },
            ));
        }
        Ok(out)
    }
}

pub struct Signer {
    pub id: PartyId,
    params: SystemParams,
    member: Member,
    share: Option<Share>,
    active: Vec<Member>,
    y_receiver: BigUint,
    message: Vec<u8>,
    ceremony: u64,
    source: Source,
    ledger: NonceLedger,
    nonces: Option<SignerNonces>,
    own: Option<Commitment>,
    ws: BTreeMap<String, BigUint>,
    zs: BTreeMap<String, BigUint>,
    behavior: SignerBehavior,
    sent_partial: bool,
    /// Retained for inspection once round two has run.
    pub aggregate: Option<CeremonyAggregate>,
    pub modified: Option<ModifiedShare>,
    pub partial: Option<PartialSignature>,
    pub own_commitment: Option<Commitment>,
}

impl Signer {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        params: SystemParams,
        member: Member,
        share: Option<Share>,
        active: Vec<Member>,
        y_receiver: BigUint,
        message: Vec<u8>,
        ceremony: u64,
        source: Source,
        behavior: SignerBehavior,
    ) -> Self {
        Signer {
            id: PartyId::signer(&member.id),
            params,
            member,
            share,
            active,
            y_receiver,
            message,
            ceremony,
            source,
            ledger: NonceLedger::default(),
            nonces: None,
            own: None,
            ws: BTreeMap::new(),
            zs: BTreeMap::new(),
            behavior,
            sent_partial: false,
            aggregate: None,
            modified: None,
            partial: None,
            own_commitment: None,
        }
    }

    fn is_active(&self) -> bool {
        self.active.iter().any(|m| m.id == self.member.id)
    }

    fn start(&mut self) -> Result<Vec<Envelope>> {
        if self.share.is_some() && self.is_active() {
            self.round1()
        } else {
            Ok(Vec::new())
        }
    }

    /// Draws nonces for the current ceremony; a second call for the same
    /// ceremony is refused.
    pub fn round1(&mut self) -> Result<Vec<Envelope>> {
        self.ledger.claim(self.ceremony)?;
        let (nonces, commitment) = round1_commit(
            &self.params,
            &self.member.id,
            self.ceremony,
            &self.y_receiver,
            &mut self.source,
        )?;
        let mut out = vec![Envelope::broadcast(
            self.id.clone(),
            Payload::Commitment {
                w: commitment.w.clone(),
            },
        )];
        for other in self.active.iter().filter(|m| m.id != self.member.id) {
            out.push(Envelope::direct(
                self.id.clone(),
                PartyId::signer(&other.id),
                Payload::PrivateCommitment {
                    z: commitment.z.clone(),
                },
            ));
        }
        self.nonces = Some(nonces);
        self.own_commitment = Some(commitment.clone());
        self.own = Some(commitment);
        self.sent_partial = false;
        Ok(out)
    }

    fn handle(&mut self, env: &Envelope) -> Result<Vec<Envelope>> {
        let sender = env.from.label.clone();
        match &env.payload {
            Payload::Share { u, v } => {
                self.share = Some(Share::new(self.member.id.clone(), u.clone(), v.clone()));
                let mut out = Vec::new();
                if self.is_active() && self.own.is_none() {
                    out = self.round1()?;
                }
                out.extend(self.try_finish()?);
                Ok(out)
            }
            Payload::Commitment { w } => {
                if self.is_active() && self.active.iter().any(|m| m.id == sender) {
                    self.ws.insert(sender, w.clone());
                }
                self.try_finish()
            }
            Payload::PrivateCommitment { z } => {
                if self.is_active() && self.active.iter().any(|m| m.id == sender) {
                    self.zs.insert(sender, z.clone());
                }
                self.try_finish()
            }
            _ => Ok(Vec::new()),
        }
    }

    fn try_finish(&mut self) -> Result<Vec<Envelope>> {
        if self.sent_partial || !self.is_active() || self.share.is_none() || self.nonces.is_none() {
            return Ok(Vec::new());
        }
        let others: Vec<&Member> = self.active.iter().filter(|m| m.id != self.member.id).collect();
        if others
            .iter()
            .any(|m| !self.ws.contains_key(&m.id) || !self.zs.contains_key(&m.id))
        {
            return Ok(Vec::new());
        }
        let own = self.own.as_ref().expect("round one ran");
        let commitments: Vec<Commitment> = self
            .active
            .iter()
            .map(|m| {
                if m.id == self.member.id {
                    own.clone()
                } else {
                    Commitment {
                        member_id: m.id.clone(),
                        w: self.ws[&m.id].clone(),
                        z: self.zs[&m.id].clone(),
                    }
                }
            })
            .collect();
        let agg = aggregate(&self.params, &commitments, &self.message)?;
        let share = self.share.as_ref().expect("checked above");
        let share = match self.behavior {
            SignerBehavior::Impersonator => Share::new(share.member_id.clone(), share.u.clone(), 0u8),
            _ => share.clone(),
        };
        let points: Vec<BigUint> = self.active.iter().map(|m| m.u.clone()).collect();
        let ms = modified_share(&share, &points, &self.params)?;
        let nonces = self.nonces.take().expect("checked above");
        let mut partial = round2_partial_sign(nonces, &ms, &agg.r, &self.params.q);
        if let SignerBehavior::CorruptPartial(delta) = &self.behavior {
            partial.s = reduce(&(BigInt::from(partial.s.clone()) + delta), &self.params.q);
        }
        self.sent_partial = true;
        let out = vec![Envelope::direct(
            self.id.clone(),
            PartyId::combiner(),
            Payload::Partial {
                s: partial.s.clone(),
                r: agg.r.clone(),
            },
        )];
        self.aggregate = Some(agg);
        self.modified = Some(ms);
        self.partial = Some(partial);
        Ok(out)
    }
}

pub struct Combiner {
    pub id: PartyId,
    params: SystemParams,
    threshold: usize,
    message: Vec<u8>,
    ws: BTreeMap<String, BigUint>,
    partials: Vec<PartialSignature>,
    r: Option<BigUint>,
    substitute_s: Option<BigUint>,
    pub delivered: Option<GroupSignature>,
}

impl Combiner {
    pub fn new(params: SystemParams, threshold: usize, message: Vec<u8>, substitute_s: Option<BigUint>) -> Self {
        Combiner {
            id: PartyId::combiner(),
            params,
            threshold,
            message,
            ws: BTreeMap::new(),
            partials: Vec::new(),
            r: None,
            substitute_s,
            delivered: None,
        }
    }

    fn handle(&mut self, env: &Envelope) -> Result<Vec<Envelope>> {
        match &env.payload {
            Payload::Commitment { w } => {
                self.ws.insert(env.from.label.clone(), w.clone());
            }
            Payload::Partial { s, r } => {
                match &self.r {
                    Some(existing) if existing != r => return Err(Error::InconsistentAggregate),
                    _ => self.r = Some(r.clone()),
                }
                self.partials.push(PartialSignature {
                    member_id: env.from.label.clone(),
                    s: s.clone(),
                });
            }
            _ => return Ok(Vec::new()),
        }
        if self.delivered.is_some() || self.partials.len() < self.threshold || self.ws.len() < self.threshold {
            return Ok(Vec::new());
        }
        let w = aggregate_w(&self.params, self.ws.values());
        let r = self.r.clone().expect("set with the first partial");
        let mut sig = combine(&self.partials, &w, &r, &self.message, &self.params.q, self.threshold)?;
        if let Some(s) = &self.substitute_s {
            sig.s = s.clone();
        }
        self.delivered = Some(sig.clone());
        Ok(vec![Envelope::direct(
            self.id.clone(),
            PartyId::receiver(),
            Payload::Signature {
                s: sig.s,
                w: sig.w,
                r: sig.r,
                message: sig.message,
            },
        )])
    }
}

pub struct Receiver {
    pub id: PartyId,
    params: SystemParams,
    pub key: KeyPair,
    pub group_key: Option<BigUint>,
    pub signature: Option<GroupSignature>,
    pub verification: Option<Verification>,
}

impl Receiver {
    pub fn new(params: SystemParams, key: KeyPair, group_key: Option<BigUint>) -> Self {
        Receiver {
            id: PartyId::receiver(),
            params,
            key,
            group_key,
            signature: None,
            verification: None,
        }
    }

    fn handle(&mut self, env: &Envelope) -> Result<Vec<Envelope>> {
        match &env.payload {
            Payload::GroupKey { y_group } => self.group_key = Some(y_group.clone()),
            Payload::Signature { s, w, r, message } => {
                let sig = GroupSignature {
                    s: s.clone(),
                    w: w.clone(),
                    r: r.clone(),
                    message: message.clone(),
                };
                let y_group = self
                    .group_key
                    .as_ref()
                    .ok_or_else(|| Error::Config("group key not published before delivery".into()))?;
                self.verification = Some(threshold_verify(&self.params, y_group, &self.key, &sig));
                self.signature = Some(sig);
            }
            _ => {}
        }
        Ok(Vec::new())
    }
}

pub enum Node {
    Sdc(Sdc),
    Signer(Box<Signer>),
    Combiner(Combiner),
    Receiver(Box<Receiver>),
}

impl Node {
    pub fn id(&self) -> &PartyId {
        match self {
            Node::Sdc(p) => &p.id,
            Node::Signer(p) => &p.id,
            Node::Combiner(p) => &p.id,
            Node::Receiver(p) => &p.id,
        }
    }

    pub fn start(&mut self) -> Result<Vec<Envelope>> {
        match self {
            Node::Sdc(p) => p.start(),
            Node::Signer(p) => p.start(),
            _ => Ok(Vec::new()),
        }
    }

    pub fn handle(&mut self, env: &Envelope) -> Result<Vec<Envelope>> {
        match self {
            Node::Sdc(_) => Ok(Vec::new()),
            Node::Signer(p) => p.handle(env),
            Node::Combiner(p) => p.handle(env),
            Node::Receiver(p) => p.handle(env),
        }
    }
}
