//! Ordered envelope records and the secrecy linter.
//!
//! Text form, one record per line:
//!
//! ```text
//! 0004 round1-broadcast signer:A * w=3
//! ```

use std::fmt;

use num_bigint::BigUint;

use super::message::{Destination, Envelope, PartyId, Phase, Role};
use crate::error::{Error, Result};
use crate::format::parse_uint;

pub const HEADER: &str = "# tdsig transcript v1";

/// Field names that must never leave a party on the broadcast channel.
pub const SECRET_FIELDS: &[&str] = &["v", "k1", "k2", "x", "x_B", "z"];

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Record {
    pub seq: usize,
    pub phase: Phase,
    pub from: PartyId,
    pub to: Destination,
    pub fields: Vec<(String, String)>,
}

impl Record {
    pub fn field(&self, name: &str) -> Option<&str> {
        self.fields.iter().find(|(k, _)| k == name).map(|(_, v)| v.as_str())
    }

    pub fn is_broadcast(&self) -> bool {
        self.to == Destination::Broadcast
    }
}

impl fmt::Display for Record {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:04} {} {} {}", self.seq, self.phase, self.from, self.to)?;
        for (k, v) in &self.fields {
            write!(f, " {k}={v}")?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Transcript {
    pub records: Vec<Record>,
}

impl Transcript {
    pub fn push(&mut self, env: &Envelope) {
        let fields = env
            .phase
            .fields()
            .iter()
            .map(|k| k.to_string())
            .zip(env.payload.values())
            .collect();
        self.records.push(Record {
            seq: self.records.len() + 1,
            phase: env.phase,
            from: env.from.clone(),
            to: env.to.clone(),
            fields,
        });
    }

    pub fn extend_from(&mut self, other: &Transcript) {
        for r in &other.records {
            let mut r = r.clone();
            r.seq = self.records.len() + 1;
            self.records.push(r);
        }
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn phase(&self, phase: Phase) -> impl Iterator<Item = &Record> {
        self.records.iter().filter(move |r| r.phase == phase)
    }

    /// Records a party could observe: its own sends, its direct messages and
    /// every broadcast it was fanned.
    pub fn view_of<'a>(&'a self, party: &'a PartyId) -> impl Iterator<Item = &'a Record> + 'a {
        self.records.iter().filter(move |r| {
            r.from == *party || r.to == Destination::Party(party.clone()) || (r.is_broadcast() && fans_to(r, party))
        })
    }

    pub fn to_text(&self) -> String {
        let mut out = String::from(HEADER);
        out.push('\n');
        for r in &self.records {
            out.push_str(&r.to_string());
            out.push('\n');
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut records = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let err = |msg: String| Error::Parse { line: idx + 1, msg };
            let mut parts = line.split_whitespace();
            let seq = parts
                .next()
                .and_then(|s| s.parse().ok())
                .ok_or_else(|| err("missing sequence number".into()))?;
            let phase: Phase = parts
                .next()
                .ok_or_else(|| err("missing phase".into()))?
                .parse()
                .map_err(err)?;
            let from: PartyId = parts
                .next()
                .ok_or_else(|| err("missing sender".into()))?
                .parse()
                .map_err(err)?;
            let to = match parts.next().ok_or_else(|| err("missing receiver".into()))? {
                "*" => Destination::Broadcast,
                other => Destination::Party(other.parse().map_err(err)?),
            };
            let fields = parts
                .map(|kv| {
                    kv.split_once('=')
                        .map(|(k, v)| (k.to_string(), v.to_string()))
                        .ok_or_else(|| err(format!("bad field `{kv}`")))
                })
                .collect::<Result<Vec<_>>>()?;
            records.push(Record {
                seq,
                phase,
                from,
                to,
                fields,
            });
        }
        Ok(Transcript { records })
    }

    /// Every secrecy or shape rule the transcript breaks.
    pub fn lint(&self) -> Vec<LintViolation> {
        let mut out = Vec::new();
        for r in &self.records {
            let names: Vec<&str> = r.fields.iter().map(|(k, _)| k.as_str()).collect();
            if names != r.phase.fields() {
                out.push(LintViolation {
                    seq: r.seq,
                    rule: "payload fields do not match phase",
                });
            }
            if r.is_broadcast() {
                if names.iter().any(|n| SECRET_FIELDS.contains(n)) {
                    out.push(LintViolation {
                        seq: r.seq,
                        rule: "secret field on broadcast channel",
                    });
                }
                if !matches!(r.phase, Phase::Publish | Phase::Round1Broadcast) {
                    out.push(LintViolation {
                        seq: r.seq,
                        rule: "phase may not be broadcast",
                    });
                }
            }
            if names.contains(&"z") {
                let signer_to_signer =
                    r.from.role == Role::Signer && matches!(&r.to, Destination::Party(p) if p.role == Role::Signer);
                if !signer_to_signer {
                    out.push(LintViolation {
                        seq: r.seq,
                        rule: "z_i outside a signer-to-signer channel",
                    });
                }
            }
            if r.phase == Phase::Dealing && (r.from.role != Role::Sdc || r.is_broadcast()) {
                out.push(LintViolation {
                    seq: r.seq,
                    rule: "share not sent directly by the dealer",
                });
            }
        }
        out
    }
}

/// Broadcasts reach everyone except the sender; round-one broadcasts only
/// reach signers and the combiner.
fn fans_to(r: &Record, party: &PartyId) -> bool {
    if r.from == *party {
        return false;
    }
    match r.phase {
        Phase::Round1Broadcast => matches!(party.role, Role::Signer | Role::Combiner),
        _ => true,
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LintViolation {
    pub seq: usize,
    pub rule: &'static str,
}

/// Tries to rebuild `Z = prod z_i` from one party's view. Needs every active
/// member's `z_i`; a party that saw fewer than `t` of them gets `None`.
pub fn recompute_z_from_view<'a>(view: impl IntoIterator<Item = &'a Record>, t: usize, p: &BigUint) -> Option<BigUint> {
    let mut zs: Vec<(PartyId, BigUint)> = Vec::new();
    for r in view {
        if let Some(z) = r.field("z") {
            if !zs.iter().any(|(from, _)| *from == r.from) {
                zs.push((r.from.clone(), parse_uint(0, z).ok()?));
            }
        }
    }
    (zs.len() == t).then(|| zs.iter().fold(BigUint::from(1u8), |acc, (_, z)| (acc * z) % p))
}
