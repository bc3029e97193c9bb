//! Ceremony configuration and its `key=value` file format.
//!
//! ```text
//! p=23
//! q=11
//! g=18
//! hash=scripted
//! 16,12,6d->5
//! t=2
//! member=A,9
//! member=F,16
//! active=A,F
//! m=6d
//! polynomial=3,5
//! receiver_secret=6
//! mode=scripted
//! tape.signer:A=2,7
//! tape.signer:F=5,9
//! tape.receiver:B=17
//! tape.third-party:C=11,13
//! ```
//!
//! Draw order per party: the dealer draws the secret then the remaining
//! coefficients (unless `polynomial=` pins them); each signer draws `k1`
//! then `k2`; the receiver draws `x_B` (unless `receiver_secret=` pins it)
//! then `alpha`; the third party draws `u` then `v`.

use std::collections::BTreeMap;

use num_bigint::BigUint;

use super::message::{PartyId, Role};
use crate::error::{Error, Result};
use crate::format::{parse_uint, parse_uint_list, Document};
use crate::params::SystemParams;
use crate::random::{derive_seed, Source, Tape};
use crate::shamir::{Member, Share};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum RandomnessMode {
    Live {
        seed: u64,
    },
    /// One tape per party, keyed by the party's display name
    /// (`signer:A`, `sdc`, `receiver:B`, `third-party:C`).
    Scripted {
        tapes: BTreeMap<String, Tape>,
    },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum DealerSetup {
    /// Run the dealer. `polynomial` pins the coefficients, low degree first.
    Deal { polynomial: Option<Vec<BigUint>> },
    /// Shares already exist; no dealing phase.
    Prior { shares: Vec<Share>, group_key: BigUint },
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Schedule {
    /// Single-threaded FIFO event loop; transcripts are deterministic.
    #[default]
    Sequential,
    /// Each party on its own thread, talking only through the bus.
    Threaded,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CeremonyConfig {
    pub params: SystemParams,
    pub roster: Vec<Member>,
    pub threshold: usize,
    pub active: Vec<String>,
    pub message: Vec<u8>,
    pub randomness: RandomnessMode,
    pub dealer: DealerSetup,
    pub receiver_secret: Option<BigUint>,
    pub ceremony_id: u64,
    pub schedule: Schedule,
}

impl CeremonyConfig {
    pub fn member(&self, id: &str) -> Option<&Member> {
        self.roster.iter().find(|m| m.id == id)
    }

    pub fn active_members(&self) -> Vec<Member> {
        self.active.iter().filter_map(|id| self.member(id).cloned()).collect()
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        if self.threshold == 0 || self.threshold > self.roster.len() {
            return Err(Error::ThresholdExceedsGroup {
                t: self.threshold,
                n: self.roster.len(),
            });
        }
        if self.active.len() != self.threshold {
            return bad(format!(
                "active set has {} members, threshold is {}",
                self.active.len(),
                self.threshold
            ));
        }
        for (i, id) in self.active.iter().enumerate() {
            if self.member(id).is_none() {
                return bad(format!("active member {id} is not on the roster"));
            }
            if self.active[..i].contains(id) {
                return Err(Error::DuplicateMember(id.clone()));
            }
        }
        for (i, m) in self.roster.iter().enumerate() {
            if self.roster[..i].iter().any(|o| o.id == m.id) {
                return Err(Error::DuplicateMember(m.id.clone()));
            }
        }
        if let DealerSetup::Deal { polynomial: Some(c) } = &self.dealer {
            if c.len() != self.threshold {
                return bad(format!(
                    "polynomial has {} coefficients, threshold is {}",
                    c.len(),
                    self.threshold
                ));
            }
        }
        if let DealerSetup::Prior { shares, .. } = &self.dealer {
            for id in &self.active {
                if !shares.iter().any(|s| &s.member_id == id) {
                    return bad(format!("no share supplied for active member {id}"));
                }
            }
        }
        if let RandomnessMode::Scripted { tapes } = &self.randomness {
            let need = |party: PartyId, count: usize| -> Result<()> {
                let have = tapes.get(&party.to_string()).map_or(0, Tape::remaining);
                if have < count {
                    return Err(Error::Config(format!(
                        "scripted mode: tape for {party} needs {count} values, has {have}"
                    )));
                }
                Ok(())
            };
            for id in &self.active {
                need(PartyId::signer(id), 2)?;
            }
            if matches!(self.dealer, DealerSetup::Deal { polynomial: None }) {
                need(PartyId::sdc(), self.threshold)?;
            }
            if self.receiver_secret.is_none() {
                need(PartyId::receiver(), 1)?;
            }
        }
        Ok(())
    }

    /// The randomness source a party draws from.
    pub fn source_for(&self, party: &PartyId) -> Source {
        match &self.randomness {
            RandomnessMode::Live { seed } => Source::seeded(derive_seed(*seed, label_hash(party))),
            RandomnessMode::Scripted { tapes } => {
                Source::Scripted(tapes.get(&party.to_string()).cloned().unwrap_or_default())
            }
        }
    }

    pub fn to_text(&self) -> String {
        let mut out = self.params.to_text();
        out.push_str(&format!("t={}\n", self.threshold));
        for m in &self.roster {
            out.push_str(&format!("member={},{}\n", m.id, m.u));
        }
        out.push_str(&format!("active={}\n", self.active.join(",")));
        out.push_str(&format!("m={}\n", hex::encode(&self.message)));
        out.push_str(&format!("ceremony={}\n", self.ceremony_id));
        if self.schedule == Schedule::Threaded {
            out.push_str("schedule=threaded\n");
        }
        match &self.dealer {
            DealerSetup::Deal { polynomial: Some(c) } => out.push_str(&format!("polynomial={}\n", join(c))),
            DealerSetup::Deal { polynomial: None } => {}
            DealerSetup::Prior { shares, group_key } => {
                out.push_str(&format!("y_G={group_key}\n"));
                for s in shares {
                    out.push_str(&format!("share={},{},{}\n", s.member_id, s.u, s.v));
                }
            }
        }
        if let Some(x) = &self.receiver_secret {
            out.push_str(&format!("receiver_secret={x}\n"));
        }
        match &self.randomness {
            RandomnessMode::Live { seed } => out.push_str(&format!("mode=live\nseed={seed}\n")),
            RandomnessMode::Scripted { tapes } => {
                out.push_str("mode=scripted\n");
                for (party, tape) in tapes {
                    let values: Vec<BigUint> = tape.values().cloned().collect();
                    out.push_str(&format!("tape.{party}={}\n", join(&values)));
                }
            }
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let doc = Document::parse(text);
        let params = SystemParams::from_document(&doc)?;
        let mut roster = Vec::new();
        for e in doc.all("member") {
            let (id, u) = e.value.split_once(',').ok_or_else(|| Error::Parse {
                line: e.line,
                msg: "expected member=id,u".into(),
            })?;
            roster.push(Member::new(id.trim(), parse_uint(e.line, u)?));
        }
        let active = doc
            .require("active")?
            .value
            .split(',')
            .map(|s| s.trim().to_string())
            .filter(|s| !s.is_empty())
            .collect();
        let mut shares = Vec::new();
        for e in doc.all("share") {
            let parts: Vec<&str> = e.value.split(',').collect();
            if parts.len() != 3 {
                return Err(Error::Parse {
                    line: e.line,
                    msg: "expected share=id,u,v".into(),
                });
            }
            shares.push(Share::new(
                parts[0].trim(),
                parse_uint(e.line, parts[1])?,
                parse_uint(e.line, parts[2])?,
            ));
        }
        let dealer = if shares.is_empty() {
            DealerSetup::Deal {
                polynomial: doc
                    .get("polynomial")
                    .map(|e| parse_uint_list(e.line, &e.value))
                    .transpose()?,
            }
        } else {
            DealerSetup::Prior {
                shares,
                group_key: doc.uint("y_G")?,
            }
        };
        let mode = doc.get("mode").map(|e| e.value.as_str()).unwrap_or("live");
        let randomness = match mode {
            "live" => RandomnessMode::Live {
                seed: if doc.get("seed").is_some() {
                    doc.number("seed")?
                } else {
                    0
                },
            },
            "scripted" => {
                let mut tapes = BTreeMap::new();
                for e in doc.entries.iter().filter(|e| e.key.starts_with("tape.")) {
                    let party = &e.key["tape.".len()..];
                    party
                        .parse::<PartyId>()
                        .map_err(|msg| Error::Parse { line: e.line, msg })?;
                    tapes.insert(party.to_string(), Tape::new(parse_uint_list(e.line, &e.value)?));
                }
                RandomnessMode::Scripted { tapes }
            }
            other => {
                return Err(Error::Parse {
                    line: doc.get("mode").map_or(0, |e| e.line),
                    msg: format!("unknown mode `{other}`"),
                })
            }
        };
        let schedule = match doc.get("schedule").map(|e| e.value.as_str()) {
            None | Some("sequential") => Schedule::Sequential,
            Some("threaded") => Schedule::Threaded,
            Some(other) => return Err(Error::Config(format!("unknown schedule `{other}`"))),
        };
        let config = CeremonyConfig {
            params,
            roster,
            threshold: doc.number("t")?,
            active,
            message: doc.hex("m")?,
            randomness,
            dealer,
            receiver_secret: doc.opt_uint("receiver_secret")?,
            ceremony_id: if doc.get("ceremony").is_some() {
                doc.number("ceremony")?
            } else {
                1
            },
            schedule,
        };
        config.validate()?;
        Ok(config)
    }
}

fn join(values: &[BigUint]) -> String {
    values.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(",")
}

/// FNV-1a over the party's display name; stable across runs and platforms.
fn label_hash(party: &PartyId) -> u64 {
    let role_salt = match party.role {
        Role::Sdc => 1u64,
        Role::Signer => 2,
        Role::Combiner => 3,
        Role::Receiver => 4,
        Role::ThirdParty => 5,
    };
    party
        .to_string()
        .bytes()
        .fold(0xcbf2_9ce4_8422_2325u64 ^ role_salt, |h, b| {
            (h ^ b as u64).wrapping_mul(0x0100_0000_01b3)
        })
}
