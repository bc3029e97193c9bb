//! Interactive confirmation: the receiver B convinces a third party C that
//! `log_mu Z = log_g y_B` without handing over anything C could replay.
//!
//! Moves, in order:
//!
//! 1. C picks `u, v`, sends `w = mu^u g^v`.
//! 2. B picks `alpha`, sends `beta = w g^alpha` and `gamma = beta^x_B`.
//! 3. C opens `u, v`; B checks `w = mu^u g^v` and aborts if it fails.
//! 4. B reveals `alpha`; C checks `beta = mu^u g^(v+alpha)` and
//!    `gamma = Z^u y_B^(v+alpha)`.
//!
//! `alpha` is only ever released from the `Opened` state, which is reachable
//! solely through a successful opening check.

use std::fmt;

use num_bigint::BigUint;
use num_traits::{One, Zero};

use crate::dirsig::{signature_mu, DirectedSignature};
use crate::error::{Error, Result};
use crate::params::{KeyPair, SystemParams};
use crate::random::Randomness;

/// What B hands C before the interactive part starts.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConfirmationContext {
    pub mu: BigUint,
    pub z: BigUint,
    pub y_receiver: BigUint,
    /// Public key the signature claims to be under (`y_G` for groups).
    pub y_signer: BigUint,
    pub sig: DirectedSignature,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GateFailure {
    Malformed,
    ChallengeMismatch,
    MuMismatch,
}

impl fmt::Display for GateFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            GateFailure::Malformed => "malformed signature or context",
            GateFailure::ChallengeMismatch => "R does not match h(Z, W, m)",
            GateFailure::MuMismatch => "mu does not match g^S y^R W",
        })
    }
}

impl ConfirmationContext {
    /// C's checks before any move: `R = h(Z, W, m)` and `mu = g^S y^R W`.
    pub fn gate(&self, params: &SystemParams) -> std::result::Result<(), GateFailure> {
        let elements = [&self.mu, &self.z, &self.y_receiver, &self.y_signer];
        if !self.sig.is_well_formed(params) || elements.iter().any(|e| !params.is_group_element(e)) {
            return Err(GateFailure::Malformed);
        }
        match params.hash_to_zq(&self.z, &self.sig.w, &self.sig.message) {
            Ok(r) if r == self.sig.r => {}
            _ => return Err(GateFailure::ChallengeMismatch),
        }
        if signature_mu(params, &self.y_signer, &self.sig) != self.mu {
            return Err(GateFailure::MuMismatch);
        }
        Ok(())
    }
}

/// C's secret opening and the commitment it produced.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VerifierState {
    pub u: BigUint,
    pub v: BigUint,
    pub w: BigUint,
}

/// B's blinding exponent and its two responses.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ProverState {
    pub alpha: BigUint,
    pub beta: BigUint,
    pub gamma: BigUint,
}

/// Fresh runs draw `u` from `[1, q)` so the vacuous `u = 0` challenge never
/// occurs; `v` comes from `[0, q)`. Scripted sources may return anything.
pub fn verifier_commit<R: Randomness + ?Sized>(
    params: &SystemParams,
    mu: &BigUint,
    rng: &mut R,
) -> Result<VerifierState> {
    let u = rng.draw(&BigUint::one(), &params.q)?;
    let v = rng.draw(&BigUint::zero(), &params.q)?;
    Ok(verifier_commit_with(params, mu, u, v))
}

pub fn verifier_commit_with(params: &SystemParams, mu: &BigUint, u: BigUint, v: BigUint) -> VerifierState {
    let w = commitment_value(params, mu, &u, &v);
    VerifierState { u, v, w }
}

fn commitment_value(params: &SystemParams, mu: &BigUint, u: &BigUint, v: &BigUint) -> BigUint {
    params.mul_p(&params.pow(mu, u), &params.g_pow(v))
}

pub fn prover_respond<R: Randomness + ?Sized>(
    params: &SystemParams,
    x_receiver: &BigUint,
    w: &BigUint,
    rng: &mut R,
) -> Result<ProverState> {
    let alpha = rng.draw(&BigUint::zero(), &params.q)?;
    Ok(prover_respond_with(params, x_receiver, w, alpha))
}

pub fn prover_respond_with(params: &SystemParams, x_receiver: &BigUint, w: &BigUint, alpha: BigUint) -> ProverState {
    let beta = params.mul_p(w, &params.g_pow(&alpha));
    let gamma = params.pow(&beta, x_receiver);
    ProverState { alpha, beta, gamma }
}

/// B's check of C's opening: `w = mu^u g^v mod p`.
pub fn prover_check_opening(params: &SystemParams, w: &BigUint, u: &BigUint, v: &BigUint, mu: &BigUint) -> bool {
    commitment_value(params, mu, u, v) == *w
}

/// C's final check: `beta = mu^u g^(v+alpha)` and `gamma = Z^u y_B^(v+alpha)`.
#[allow(clippy::too_many_arguments)]
pub fn verifier_final_check(
    params: &SystemParams,
    beta: &BigUint,
    gamma: &BigUint,
    mu: &BigUint,
    z: &BigUint,
    y_receiver: &BigUint,
    u: &BigUint,
    v: &BigUint,
    alpha: &BigUint,
) -> bool {
    let e = v + alpha;
    let beta_ok = params.mul_p(&params.pow(mu, u), &params.g_pow(&e)) == *beta;
    let gamma_ok = params.mul_p(&params.pow(z, u), &params.pow(y_receiver, &e)) == *gamma;
    beta_ok && gamma_ok
}

/// Where one side of the protocol currently stands.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Step {
    Init,
    Committed,
    Responded,
    Opened,
    Done,
    Aborted,
}

/// B's side.
pub struct Prover<'a> {
    params: &'a SystemParams,
    key: &'a KeyPair,
    mu: BigUint,
    step: Step,
    w: Option<BigUint>,
    state: Option<ProverState>,
}

impl<'a> Prover<'a> {
    pub fn new(params: &'a SystemParams, key: &'a KeyPair, mu: BigUint) -> Self {
        Prover {
            params,
            key,
            mu,
            step: Step::Init,
            w: None,
            state: None,
        }
    }

    pub fn step(&self) -> Step {
        self.step
    }

    /// Move 1 arrives.
    pub fn receive_commitment(&mut self, w: BigUint) -> Result<()> {
        if self.step != Step::Init {
            return Err(Error::ProtocolOrderViolation("commitment must be the first move"));
        }
        self.w = Some(w);
        self.step = Step::Committed;
        Ok(())
    }

    /// Move 2: `(beta, gamma)`.
    pub fn respond<R: Randomness + ?Sized>(&mut self, rng: &mut R) -> Result<(BigUint, BigUint)> {
        if self.step != Step::Committed {
            return Err(Error::ProtocolOrderViolation("response requires a commitment"));
        }
        let w = self.w.as_ref().expect("commitment stored");
        if !self.params.is_group_element(w) {
            self.step = Step::Aborted;
            return Err(Error::ProtocolOrderViolation("commitment is not a group element"));
        }
        let state = prover_respond(self.params, &self.key.x, w, rng)?;
        let out = (state.beta.clone(), state.gamma.clone());
        self.state = Some(state);
        self.step = Step::Responded;
        Ok(out)
    }

    /// Move 3 arrives. Returns whether the opening matched; on mismatch the
    /// prover aborts for good.
    pub fn receive_opening(&mut self, u: &BigUint, v: &BigUint) -> Result<bool> {
        if self.step != Step::Responded {
            return Err(Error::ProtocolOrderViolation("opening before response"));
        }
        let w = self.w.as_ref().expect("commitment stored");
        if prover_check_opening(self.params, w, u, v, &self.mu) {
            self.step = Step::Opened;
            Ok(true)
        } else {
            self.step = Step::Aborted;
            Ok(false)
        }
    }

    /// Move 4: `alpha`, only after a verified opening.
    pub fn reveal(&mut self) -> Result<BigUint> {
        if self.step != Step::Opened {
            return Err(Error::ProtocolOrderViolation(
                "alpha is released only after a valid opening",
            ));
        }
        self.step = Step::Done;
        Ok(self.state.as_ref().expect("response stored").alpha.clone())
    }
}

/// C's side.
pub struct Verifier<'a> {
    params: &'a SystemParams,
    ctx: &'a ConfirmationContext,
    step: Step,
    state: Option<VerifierState>,
    response: Option<(BigUint, BigUint)>,
}

impl<'a> Verifier<'a> {
    pub fn new(params: &'a SystemParams, ctx: &'a ConfirmationContext) -> Self {
        Verifier {
            params,
            ctx,
            step: Step::Init,
            state: None,
            response: None,
        }
    }

    pub fn step(&self) -> Step {
        self.step
    }

    /// Move 1: `w`.
    pub fn commit<R: Randomness + ?Sized>(&mut self, rng: &mut R) -> Result<BigUint> {
        if self.step != Step::Init {
            return Err(Error::ProtocolOrderViolation("verifier already committed"));
        }
        let state = verifier_commit(self.params, &self.ctx.mu, rng)?;
        let w = state.w.clone();
        self.state = Some(state);
        self.step = Step::Committed;
        Ok(w)
    }

    /// Move 2 arrives.
    pub fn receive_response(&mut self, beta: BigUint, gamma: BigUint) -> Result<()> {
        if self.step != Step::Committed {
            return Err(Error::ProtocolOrderViolation("response before commitment"));
        }
        self.response = Some((beta, gamma));
        self.step = Step::Responded;
        Ok(())
    }

    /// Move 3: `(u, v)`.
    pub fn open(&mut self) -> Result<(BigUint, BigUint)> {
        if self.step != Step::Responded {
            return Err(Error::ProtocolOrderViolation("opening before response"));
        }
        self.step = Step::Opened;
        let s = self.state.as_ref().expect("commitment stored");
        Ok((s.u.clone(), s.v.clone()))
    }

    /// Move 4 arrives; returns the verdict.
    pub fn receive_reveal(&mut self, alpha: &BigUint) -> Result<bool> {
        if self.step != Step::Opened {
            return Err(Error::ProtocolOrderViolation("alpha before opening"));
        }
        self.step = Step::Done;
        let s = self.state.as_ref().expect("commitment stored");
        let (beta, gamma) = self.response.as_ref().expect("response stored");
        Ok(verifier_final_check(
            self.params,
            beta,
            gamma,
            &self.ctx.mu,
            &self.ctx.z,
            &self.ctx.y_receiver,
            &s.u,
            &s.v,
            alpha,
        ))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Outcome {
    Accepted,
    /// C's final check failed.
    Rejected,
    /// B's opening check failed; `alpha` was withheld.
    Aborted,
    /// C's pre-check on the presented signature failed; no moves were made.
    Stopped(GateFailure),
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Outcome::Accepted => write!(f, "accepted"),
            Outcome::Rejected => write!(f, "rejected"),
            Outcome::Aborted => write!(f, "aborted"),
            Outcome::Stopped(_) => write!(f, "stopped"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConfirmationTranscript {
    pub w: Option<BigUint>,
    pub beta: Option<BigUint>,
    pub gamma: Option<BigUint>,
    pub u: Option<BigUint>,
    pub v: Option<BigUint>,
    pub alpha: Option<BigUint>,
    pub outcome: Outcome,
}

impl ConfirmationTranscript {
    fn empty(outcome: Outcome) -> Self {
        ConfirmationTranscript {
            w: None,
            beta: None,
            gamma: None,
            u: None,
            v: None,
            alpha: None,
            outcome,
        }
    }
}

/// One message on the wire, as seen by an interceptor.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Move {
    Commitment { w: BigUint },
    Response { beta: BigUint, gamma: BigUint },
    Opening { u: BigUint, v: BigUint },
    Reveal { alpha: BigUint },
}

pub fn run_confirmation<P, V>(
    params: &SystemParams,
    ctx: &ConfirmationContext,
    prover_key: &KeyPair,
    rng_prover: &mut P,
    rng_verifier: &mut V,
) -> Result<ConfirmationTranscript>
where
    P: Randomness + ?Sized,
    V: Randomness + ?Sized,
{
    run_confirmation_intercepted(params, ctx, prover_key, rng_prover, rng_verifier, |_| {})
}

/// Runs all four moves in order, passing each message through `intercept`
/// on its way across. The interceptor may record or tamper with it.
pub fn run_confirmation_intercepted<P, V, F>(
    params: &SystemParams,
    ctx: &ConfirmationContext,
    prover_key: &KeyPair,
    rng_prover: &mut P,
    rng_verifier: &mut V,
    mut intercept: F,
) -> Result<ConfirmationTranscript>
where
    P: Randomness + ?Sized,
    V: Randomness + ?Sized,
    F: FnMut(&mut Move),
{
    if let Err(failure) = ctx.gate(params) {
        return Ok(ConfirmationTranscript::empty(Outcome::Stopped(failure)));
    }
    let mut verifier = Verifier::new(params, ctx);
    let mut prover = Prover::new(params, prover_key, ctx.mu.clone());
    let mut transcript = ConfirmationTranscript::empty(Outcome::Rejected);

    let mut mv = Move::Commitment {
        w: verifier.commit(rng_verifier)?,
    };
    intercept(&mut mv);
    let Move::Commitment { w } = mv else {
        return Err(Error::ProtocolOrderViolation("expected commitment"));
    };
    transcript.w = Some(w.clone());
    prover.receive_commitment(w)?;

    let (beta, gamma) = match prover.respond(rng_prover) {
        Ok(resp) => resp,
        Err(Error::ProtocolOrderViolation(_)) if prover.step() == Step::Aborted => {
            transcript.outcome = Outcome::Aborted;
            return Ok(transcript);
        }
        Err(e) => return Err(e),
    };
    let mut mv = Move::Response { beta, gamma };
    intercept(&mut mv);
    let Move::Response { beta, gamma } = mv else {
        return Err(Error::ProtocolOrderViolation("expected response"));
    };
    transcript.beta = Some(beta.clone());
    transcript.gamma = Some(gamma.clone());
    verifier.receive_response(beta, gamma)?;

    let (u, v) = verifier.open()?;
    let mut mv = Move::Opening { u, v };
    intercept(&mut mv);
    let Move::Opening { u, v } = mv else {
        return Err(Error::ProtocolOrderViolation("expected opening"));
    };
    transcript.u = Some(u.clone());
    transcript.v = Some(v.clone());
    if !prover.receive_opening(&u, &v)? {
        transcript.outcome = Outcome::Aborted;
        return Ok(transcript);
    }

    let mut mv = Move::Reveal {
        alpha: prover.reveal()?,
    };
    intercept(&mut mv);
    let Move::Reveal { alpha } = mv else {
        return Err(Error::ProtocolOrderViolation("expected reveal"));
    };
    transcript.alpha = Some(alpha.clone());
    transcript.outcome = if verifier.receive_reveal(&alpha)? {
        Outcome::Accepted
    } else {
        Outcome::Rejected
    };
    Ok(transcript)
}

/// Counts challenges `(u, v) in Z_q x Z_q` for which an honest-behaving prover
/// holding `x_B` passes C's final check against the claim `z_claimed`.
/// For a false claim only `u = 0` passes, so the count is `q`.
pub fn count_accepting_challenges(
    params: &SystemParams,
    mu: &BigUint,
    z_claimed: &BigUint,
    prover_key: &KeyPair,
    alpha: &BigUint,
) -> (u64, u64) {
    let q: u64 = (&params.q).try_into().expect("enumeration needs a small q");
    let mut accepted = 0u64;
    for u in 0..q {
        for v in 0..q {
            let (u, v) = (BigUint::from(u), BigUint::from(v));
            let vs = verifier_commit_with(params, mu, u, v);
            let ps = prover_respond_with(params, &prover_key.x, &vs.w, alpha.clone());
            if verifier_final_check(
                params,
                &ps.beta,
                &ps.gamma,
                mu,
                z_claimed,
                &prover_key.y,
                &vs.u,
                &vs.v,
                &ps.alpha,
            ) {
                accepted += 1;
            }
        }
    }
    (accepted, q * q)
}
