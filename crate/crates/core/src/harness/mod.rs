//! Ceremony simulator: dealer, signers, combiner, receiver and third party
//! exchanging envelopes over an in-process bus.
//!
//! `w_i` goes out on the broadcast channel (every roster member plus the
//! combiner), `z_i` only on direct channels between active members. The
//! combiner therefore learns `W` but never `Z`.

mod bus;
mod config;
mod message;
mod parties;
mod transcript;

use std::fmt;
use std::str::FromStr;

use num_bigint::{BigInt, BigUint};

pub use config::{CeremonyConfig, DealerSetup, RandomnessMode, Schedule};
pub use message::{Destination, Envelope, PartyId, Payload, Phase, Role};
pub use parties::SignerBehavior;
pub use transcript::{recompute_z_from_view, LintViolation, Record, Transcript, SECRET_FIELDS};

use crate::dirsig::Verification;
use crate::error::{Error, Result};
use crate::params::{keygen, KeyPair};
use crate::random::Source;
use crate::shamir::ModifiedShare;
use crate::threshold::{threshold_verify, CeremonyAggregate, Commitment, GroupSignature, PartialSignature};
use crate::zkproof::{run_confirmation_intercepted, ConfirmationContext, ConfirmationTranscript, Move};
use parties::{Combiner, Node, Receiver, Sdc, Signer};

/// What one active signer computed, kept for inspection.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SignerRecord {
    pub member_id: String,
    pub commitment: Commitment,
    pub aggregate: CeremonyAggregate,
    pub modified_share: ModifiedShare,
    pub partial: PartialSignature,
}

#[derive(Debug)]
pub struct CeremonyOutput {
    pub signature: GroupSignature,
    pub verification: Verification,
    pub group_key: BigUint,
    pub receiver: KeyPair,
    pub signers: Vec<SignerRecord>,
    pub transcript: Transcript,
    receiver_source: Source,
}

/// Everything a run produced, complete or not.
struct Execution {
    signature: Option<GroupSignature>,
    verification: Option<Verification>,
    group_key: Option<BigUint>,
    receiver: KeyPair,
    receiver_source: Source,
    signers: Vec<SignerRecord>,
    transcript: Transcript,
    dropped: Vec<Envelope>,
    error: Option<Error>,
}

#[derive(Default)]
struct FaultPlan {
    behaviors: Vec<(String, SignerBehavior)>,
    substitute_s: Option<BigUint>,
    drop_phase: Option<Phase>,
}

fn receiver_key(config: &CeremonyConfig) -> Result<(KeyPair, Source)> {
    let mut source = config.source_for(&PartyId::receiver());
    let key = match &config.receiver_secret {
        Some(x) => KeyPair::from_secret(&config.params, x.clone())?,
        None => keygen(&config.params, &mut source)?,
    };
    Ok((key, source))
}

fn execute(config: &CeremonyConfig, plan: &FaultPlan) -> Result<Execution> {
    config.validate()?;
    let params = &config.params;
    let (receiver, receiver_source) = receiver_key(config).map_err(|e| Error::Party {
        party: PartyId::receiver(),
        phase: Phase::Publish,
        source: Box::new(e),
    })?;
    let active = config.active_members();

    let mut nodes = Vec::new();
    let (prior_shares, prior_key) = match &config.dealer {
        DealerSetup::Deal { polynomial } => {
            nodes.push(Node::Sdc(Sdc::new(
                params.clone(),
                config.roster.clone(),
                config.threshold,
                polynomial.clone(),
                config.source_for(&PartyId::sdc()),
            )));
            (Vec::new(), None)
        }
        DealerSetup::Prior { shares, group_key } => (shares.clone(), Some(group_key.clone())),
    };
    for member in &config.roster {
        let id = PartyId::signer(&member.id);
        let behavior = plan
            .behaviors
            .iter()
            .find(|(m, _)| *m == member.id)
            .map(|(_, b)| b.clone())
            .unwrap_or_default();
        nodes.push(Node::Signer(Box::new(Signer::new(
            params.clone(),
            member.clone(),
            prior_shares.iter().find(|s| s.member_id == member.id).cloned(),
            active.clone(),
            receiver.y.clone(),
            config.message.clone(),
            config.ceremony_id,
            config.source_for(&id),
            behavior,
        ))));
    }
    nodes.push(Node::Combiner(Combiner::new(
        params.clone(),
        config.threshold,
        config.message.clone(),
        plan.substitute_s.clone(),
    )));
    nodes.push(Node::Receiver(Box::new(Receiver::new(
        params.clone(),
        receiver.clone(),
        prior_key,
    ))));

    let run = bus::run(nodes, config.schedule, plan.drop_phase);
    let mut signers = Vec::new();
    let mut signature = None;
    let mut verification = None;
    let mut group_key = None;
    for id in &config.active {
        if let Some(Node::Signer(s)) = run.node(&PartyId::signer(id)) {
            if let (Some(c), Some(a), Some(ms), Some(p)) = (&s.own_commitment, &s.aggregate, &s.modified, &s.partial) {
                signers.push(SignerRecord {
                    member_id: id.clone(),
                    commitment: c.clone(),
                    aggregate: a.clone(),
                    modified_share: ms.clone(),
                    partial: p.clone(),
                });
            }
        }
    }
    if let Some(Node::Receiver(r)) = run.node(&PartyId::receiver()) {
        signature = r.signature.clone();
        verification = r.verification.clone();
        group_key = r.group_key.clone();
    }
    Ok(Execution {
        signature,
        verification,
        group_key,
        receiver,
        receiver_source,
        signers,
        transcript: run.transcript,
        dropped: run.dropped,
        error: run.error,
    })
}

/// Dealing (unless shares are supplied), both signing rounds, combination
/// and delivery. The receiver's verdict is in the output; a rejected
/// signature is not an error here.
pub fn run_ceremony(config: &CeremonyConfig) -> Result<CeremonyOutput> {
    let exec = execute(config, &FaultPlan::default())?;
    if let Some(e) = exec.error {
        return Err(e);
    }
    match (exec.signature, exec.verification, exec.group_key) {
        (Some(signature), Some(verification), Some(group_key)) => Ok(CeremonyOutput {
            signature,
            verification,
            group_key,
            receiver: exec.receiver,
            signers: exec.signers,
            transcript: exec.transcript,
            receiver_source: exec.receiver_source,
        }),
        _ => Err(Error::Stalled("receiver never got a signature".into())),
    }
}

#[derive(Debug)]
pub struct ConfirmationSession {
    pub result: ConfirmationTranscript,
    pub transcript: Transcript,
}

/// Receiver B presents `signature` to third party C and the two run the
/// confirmation protocol; every move is recorded as a direct envelope.
pub fn run_confirmation_session(
    config: &CeremonyConfig,
    output: &CeremonyOutput,
    signature: &GroupSignature,
) -> Result<ConfirmationSession> {
    run_confirmation_session_with(config, output, signature, |_| {})
}

/// As [`run_confirmation_session`], letting `tamper` rewrite moves in flight.
pub fn run_confirmation_session_with<F>(
    config: &CeremonyConfig,
    output: &CeremonyOutput,
    signature: &GroupSignature,
    mut tamper: F,
) -> Result<ConfirmationSession>
where
    F: FnMut(&mut Move),
{
    let params = &config.params;
    let verification = threshold_verify(params, &output.group_key, &output.receiver, signature);
    let ctx = ConfirmationContext {
        mu: verification.mu.clone(),
        z: verification.z.clone(),
        y_receiver: output.receiver.y.clone(),
        y_signer: output.group_key.clone(),
        sig: signature.clone(),
    };
    let (b, c) = (PartyId::receiver(), PartyId::third_party());
    let mut transcript = Transcript::default();
    transcript.push(&Envelope::direct(
        b.clone(),
        c.clone(),
        Payload::Presentation {
            s: signature.s.clone(),
            w: signature.w.clone(),
            r: signature.r.clone(),
            message: signature.message.clone(),
            mu: ctx.mu.clone(),
            z: ctx.z.clone(),
        },
    ));
    let mut prover_source = output.receiver_source.clone();
    let mut verifier_source = config.source_for(&c);
    let result = run_confirmation_intercepted(
        params,
        &ctx,
        &output.receiver,
        &mut prover_source,
        &mut verifier_source,
        |mv| {
            tamper(mv);
            let env = match mv.clone() {
                Move::Commitment { w } => Envelope::direct(c.clone(), b.clone(), Payload::ConfirmCommit { w }),
                Move::Response { beta, gamma } => {
                    Envelope::direct(b.clone(), c.clone(), Payload::ConfirmResponse { beta, gamma })
                }
                Move::Opening { u, v } => Envelope::direct(c.clone(), b.clone(), Payload::ConfirmOpen { u, v }),
                Move::Reveal { alpha } => Envelope::direct(b.clone(), c.clone(), Payload::ConfirmReveal { alpha }),
            };
            transcript.push(&env);
        },
    )
    .map_err(|e| Error::Party {
        party: c.clone(),
        phase: Phase::ConfirmPresent,
        source: Box::new(e),
    })?;
    Ok(ConfirmationSession { result, transcript })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Fault {
    CorruptPartial { member: String, delta: BigInt },
    SubstituteS(BigUint),
    Impersonate(String),
    DropMessage(Phase),
}

impl fmt::Display for Fault {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Fault::CorruptPartial { member, delta } => write!(f, "corrupt_partial({member},{delta})"),
            Fault::SubstituteS(s) => write!(f, "substitute_S({s})"),
            Fault::Impersonate(m) => write!(f, "impersonate({m})"),
            Fault::DropMessage(p) => write!(f, "drop_message({p})"),
        }
    }
}

impl FromStr for Fault {
    type Err = Error;

    /// `corrupt_partial(A,1)`, `substitute_S(7)`, `impersonate(A)`, `drop_message(round2)`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Config(format!("unrecognised fault `{s}`"));
        let s = s.trim();
        let (name, rest) = s.split_once('(').ok_or_else(bad)?;
        let args: Vec<&str> = rest
            .strip_suffix(')')
            .ok_or_else(bad)?
            .split(',')
            .map(str::trim)
            .collect();
        match (name, args.as_slice()) {
            ("corrupt_partial", [member, delta]) => Ok(Fault::CorruptPartial {
                member: member.to_string(),
                delta: delta.parse().map_err(|_| bad())?,
            }),
            ("substitute_S", [v]) => Ok(Fault::SubstituteS(v.parse().map_err(|_| bad())?)),
            ("impersonate", [m]) => Ok(Fault::Impersonate(m.to_string())),
            ("drop_message", [p]) => Ok(Fault::DropMessage(p.parse().map_err(|_| bad())?)),
            _ => Err(bad()),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Detection {
    /// Receiver verification rejected the delivered signature.
    ReceiverRejected,
    /// A message never arrived, so the ceremony could not finish.
    Stalled(Phase),
    /// A party refused to continue.
    PartyError(String),
    /// The fault went unnoticed: the receiver accepted.
    Undetected,
}

impl fmt::Display for Detection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Detection::ReceiverRejected => write!(f, "rejected at receiver verification"),
            Detection::Stalled(p) => write!(f, "stalled: {p} message lost"),
            Detection::PartyError(e) => write!(f, "party error: {e}"),
            Detection::Undetected => write!(f, "undetected"),
        }
    }
}

#[derive(Debug)]
pub struct FaultReport {
    pub fault: Fault,
    pub detection: Detection,
    pub signature: Option<GroupSignature>,
    pub verification: Option<Verification>,
    pub transcript: Transcript,
}

/// Runs the ceremony with one fault applied and reports where it surfaced.
pub fn inject_fault(config: &CeremonyConfig, fault: &Fault) -> Result<FaultReport> {
    let mut plan = FaultPlan::default();
    match fault {
        Fault::CorruptPartial { member, delta } => {
            require_active(config, member)?;
            plan.behaviors
                .push((member.clone(), SignerBehavior::CorruptPartial(delta.clone())));
        }
        Fault::SubstituteS(s) => plan.substitute_s = Some(s.clone()),
        Fault::Impersonate(member) => {
            require_active(config, member)?;
            plan.behaviors.push((member.clone(), SignerBehavior::Impersonator));
        }
        Fault::DropMessage(phase) => {
            let ceremony_phases = [
                Phase::Publish,
                Phase::Dealing,
                Phase::Round1Broadcast,
                Phase::Round1Direct,
                Phase::Round2,
                Phase::Deliver,
            ];
            if !ceremony_phases.contains(phase) {
                return Err(Error::Config(format!("{phase} is not a ceremony phase")));
            }
            if *phase == Phase::Dealing || *phase == Phase::Publish {
                if let DealerSetup::Prior { .. } = config.dealer {
                    return Err(Error::Config(format!("no {phase} phase when shares are supplied")));
                }
            }
            plan.drop_phase = Some(*phase);
        }
    }
    let exec = execute(config, &plan)?;
    let detection = match (&exec.error, &exec.verification) {
        (Some(e), _) => Detection::PartyError(e.to_string()),
        (None, Some(v)) if v.accepted => Detection::Undetected,
        (None, Some(_)) => Detection::ReceiverRejected,
        (None, None) => Detection::Stalled(exec.dropped.first().map_or(Phase::Deliver, |e| e.phase)),
    };
    Ok(FaultReport {
        fault: fault.clone(),
        detection,
        signature: exec.signature,
        verification: exec.verification,
        transcript: exec.transcript,
    })
}

fn require_active(config: &CeremonyConfig, member: &str) -> Result<()> {
    if config.active.iter().any(|m| m == member) {
        Ok(())
    } else {
        Err(Error::Config(format!("{member} is not an active signer")))
    }
}

/// Re-runs `config` and compares against a stored transcript byte for byte.
pub fn replay_matches(config: &CeremonyConfig, stored: &str) -> Result<bool> {
    let out = run_ceremony(config)?;
    Ok(out.transcript.to_text() == stored)
}
