//! Reference toy data over the order-11 subgroup of `Z_23*`.
//!
//! Four members, threshold two, members A and F signing the one-byte
//! message `m` for receiver B, then B confirming to third party C. Every
//! random draw comes from a fixed tape, so the whole run is reproducible.

use std::collections::BTreeMap;

use num_bigint::BigUint;

use crate::error::Result;
use crate::harness::{
    run_ceremony, run_confirmation_session, CeremonyConfig, CeremonyOutput, ConfirmationSession, DealerSetup,
    RandomnessMode, Schedule, Transcript,
};
use crate::params::{HashOracle, HashQuery, SystemParams};
use crate::random::Tape;
use crate::shamir::Member;

pub const MESSAGE: &[u8] = b"m";

/// `p = 23`, `q = 11`, `g = 18`, with the single hash value the ceremony needs.
pub fn toy_params() -> SystemParams {
    let row = (
        HashQuery::new(vec![16u32.into(), 12u32.into()], MESSAGE),
        BigUint::from(5u32),
    );
    SystemParams::new(23u32, 11u32, 18u32).with_hash(HashOracle::scripted([row]))
}

pub fn toy_roster() -> Vec<Member> {
    [("A", 9u32), ("C", 12), ("E", 14), ("F", 16)]
        .into_iter()
        .map(|(id, u)| Member::new(id, u))
        .collect()
}

fn tapes() -> BTreeMap<String, Tape> {
    [
        ("signer:A", vec![2u32, 7]),
        ("signer:F", vec![5, 9]),
        ("receiver:B", vec![17]),
        ("third-party:C", vec![11, 13]),
    ]
    .into_iter()
    .map(|(party, values)| (party.to_string(), Tape::new(values)))
    .collect()
}

/// The full reference ceremony: dealer polynomial `3 + 5x`, receiver secret 6.
pub fn reference_config() -> CeremonyConfig {
    CeremonyConfig {
        params: toy_params(),
        roster: toy_roster(),
        threshold: 2,
        active: vec!["A".into(), "F".into()],
        message: MESSAGE.to_vec(),
        randomness: RandomnessMode::Scripted { tapes: tapes() },
        dealer: DealerSetup::Deal {
            polynomial: Some(vec![3u32.into(), 5u32.into()]),
        },
        receiver_secret: Some(6u32.into()),
        ceremony_id: 1,
        schedule: Schedule::Sequential,
    }
}

/// The reference ceremony followed by the confirmation session, with both
/// transcripts joined.
pub struct ReferenceRun {
    pub ceremony: CeremonyOutput,
    pub confirmation: ConfirmationSession,
    pub transcript: Transcript,
}

pub fn run_reference() -> Result<ReferenceRun> {
    let config = reference_config();
    let ceremony = run_ceremony(&config)?;
    let confirmation = run_confirmation_session(&config, &ceremony, &ceremony.signature)?;
    let mut transcript = ceremony.transcript.clone();
    transcript.extend_from(&confirmation.transcript);
    Ok(ReferenceRun {
        ceremony,
        confirmation,
        transcript,
    })
}
