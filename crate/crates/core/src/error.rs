use thiserror::Error;

use crate::harness::{PartyId, Phase};

/// Errors raised by the arithmetic, dealing, signing and confirmation layers.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("modulus must be at least 2")]
    InvalidModulus,
    #[error("negative exponent requires an invertible base")]
    NegativeExponentNonInvertible,
    #[error("{0} is not invertible modulo {1}")]
    NotInvertible(String, String),
    #[error("evaluation points collide modulo q: {0}")]
    DuplicatePoint(String),
    #[error("evaluation point {0} is zero modulo q")]
    ZeroPoint(String),
    #[error("threshold {t} is outside 1..={n}")]
    ThresholdExceedsGroup { t: usize, n: usize },
    #[error("shares do not lie on a single polynomial of degree < {0}")]
    InconsistentShares(usize),
    #[error("not enough shares: need {needed}, got {got}")]
    NotEnoughShares { needed: usize, got: usize },
    #[error("modulus q = {0} is not prime")]
    CompositeModulus(String),
    #[error("secret must lie in [1, q)")]
    SecretOutOfRange,
    #[error("no valid (p, q) pair found within {0} attempts")]
    GenerationTimeout(usize),
    #[error("invalid parameter request: {0}")]
    InvalidRequest(String),
    #[error("scripted hash oracle has no entry for this query")]
    UnscriptedQuery,
    #[error("scripted randomness tape exhausted")]
    TapeExhausted,
    #[error("member {0} appears more than once")]
    DuplicateMember(String),
    #[error("expected {expected} partial signatures, got {got}")]
    CountMismatch { expected: usize, got: usize },
    #[error("active signers disagree on the aggregate challenge")]
    InconsistentAggregate,
    #[error("nonces for ceremony {0} were already used")]
    NonceReuse(u64),
    #[error("protocol move out of order: {0}")]
    ProtocolOrderViolation(&'static str),
    #[error("{party} failed during {phase}: {source}")]
    Party {
        party: PartyId,
        phase: Phase,
        #[source]
        source: Box<Error>,
    },
    #[error("ceremony stalled before completion: {0}")]
    Stalled(String),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

pub type Result<T> = std::result::Result<T, Error>;
