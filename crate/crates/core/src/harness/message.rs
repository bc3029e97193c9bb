use std::fmt;
use std::str::FromStr;

use num_bigint::BigUint;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Role {
    Sdc,
    Signer,
    Combiner,
    Receiver,
    ThirdParty,
}

impl Role {
    fn tag(self) -> &'static str {
        match self {
            Role::Sdc => "sdc",
            Role::Signer => "signer",
            Role::Combiner => "dc",
            Role::Receiver => "receiver",
            Role::ThirdParty => "third-party",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PartyId {
    pub role: Role,
    pub label: String,
}

impl PartyId {
    pub fn new(role: Role, label: impl Into<String>) -> Self {
        PartyId {
            role,
            label: label.into(),
        }
    }

    pub fn sdc() -> Self {
        PartyId::new(Role::Sdc, "")
    }

    pub fn combiner() -> Self {
        PartyId::new(Role::Combiner, "")
    }

    pub fn signer(label: &str) -> Self {
        PartyId::new(Role::Signer, label)
    }

    pub fn receiver() -> Self {
        PartyId::new(Role::Receiver, "B")
    }

    pub fn third_party() -> Self {
        PartyId::new(Role::ThirdParty, "C")
    }
}

impl fmt::Display for PartyId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.label.is_empty() {
            write!(f, "{}", self.role.tag())
        } else {
            write!(f, "{}:{}", self.role.tag(), self.label)
        }
    }
}

impl FromStr for PartyId {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (tag, label) = s.split_once(':').unwrap_or((s, ""));
        let role = [
            Role::Sdc,
            Role::Signer,
            Role::Combiner,
            Role::Receiver,
            Role::ThirdParty,
        ]
        .into_iter()
        .find(|r| r.tag() == tag)
        .ok_or_else(|| format!("unknown party `{s}`"))?;
        Ok(PartyId::new(role, label))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Phase {
    Publish,
    Dealing,
    Round1Broadcast,
    Round1Direct,
    Round2,
    Deliver,
    ConfirmPresent,
    ConfirmMove1,
    ConfirmMove2,
    ConfirmMove3,
    ConfirmMove4,
}

impl Phase {
    pub const ALL: [Phase; 11] = [
        Phase::Publish,
        Phase::Dealing,
        Phase::Round1Broadcast,
        Phase::Round1Direct,
        Phase::Round2,
        Phase::Deliver,
        Phase::ConfirmPresent,
        Phase::ConfirmMove1,
        Phase::ConfirmMove2,
        Phase::ConfirmMove3,
        Phase::ConfirmMove4,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Phase::Publish => "publish",
            Phase::Dealing => "dealing",
            Phase::Round1Broadcast => "round1-broadcast",
            Phase::Round1Direct => "round1-direct",
            Phase::Round2 => "round2",
            Phase::Deliver => "deliver",
            Phase::ConfirmPresent => "confirm-present",
            Phase::ConfirmMove1 => "confirm-move-1",
            Phase::ConfirmMove2 => "confirm-move-2",
            Phase::ConfirmMove3 => "confirm-move-3",
            Phase::ConfirmMove4 => "confirm-move-4",
        }
    }

    /// Field names a record of this phase carries, in order.
    pub fn fields(self) -> &'static [&'static str] {
        match self {
            Phase::Publish => &["y_G"],
            Phase::Dealing => &["u", "v"],
            Phase::Round1Broadcast => &["w"],
            Phase::Round1Direct => &["z"],
            Phase::Round2 => &["s", "R"],
            Phase::Deliver => &["S", "W", "R", "m"],
            Phase::ConfirmPresent => &["S", "W", "R", "m", "mu", "Z"],
            Phase::ConfirmMove1 => &["w"],
            Phase::ConfirmMove2 => &["beta", "gamma"],
            Phase::ConfirmMove3 => &["u", "v"],
            Phase::ConfirmMove4 => &["alpha"],
        }
    }
}

impl fmt::Display for Phase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Phase {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Phase::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| format!("unknown phase `{s}`"))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Destination {
    Party(PartyId),
    Broadcast,
}

impl fmt::Display for Destination {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Destination::Party(p) => write!(f, "{p}"),
            Destination::Broadcast => f.write_str("*"),
        }
    }
}

/// Typed protocol messages. Each variant belongs to exactly one phase.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Payload {
    GroupKey {
        y_group: BigUint,
    },
    Share {
        u: BigUint,
        v: BigUint,
    },
    Commitment {
        w: BigUint,
    },
    PrivateCommitment {
        z: BigUint,
    },
    Partial {
        s: BigUint,
        r: BigUint,
    },
    Signature {
        s: BigUint,
        w: BigUint,
        r: BigUint,
        message: Vec<u8>,
    },
    Presentation {
        s: BigUint,
        w: BigUint,
        r: BigUint,
        message: Vec<u8>,
        mu: BigUint,
        z: BigUint,
    },
    ConfirmCommit {
        w: BigUint,
    },
    ConfirmResponse {
        beta: BigUint,
        gamma: BigUint,
    },
    ConfirmOpen {
        u: BigUint,
        v: BigUint,
    },
    ConfirmReveal {
        alpha: BigUint,
    },
}

impl Payload {
    pub fn phase(&self) -> Phase {
        match self {
            Payload::GroupKey { .. } => Phase::Publish,
            Payload::Share { .. } => Phase::Dealing,
            Payload::Commitment { .. } => Phase::Round1Broadcast,
            Payload::PrivateCommitment { .. } => Phase::Round1Direct,
            Payload::Partial { .. } => Phase::Round2,
            Payload::Signature { .. } => Phase::Deliver,
            Payload::Presentation { .. } => Phase::ConfirmPresent,
            Payload::ConfirmCommit { .. } => Phase::ConfirmMove1,
            Payload::ConfirmResponse { .. } => Phase::ConfirmMove2,
            Payload::ConfirmOpen { .. } => Phase::ConfirmMove3,
            Payload::ConfirmReveal { .. } => Phase::ConfirmMove4,
        }
    }

    /// Values in the order of [`Phase::fields`]: decimal, messages in hex.
    pub fn values(&self) -> Vec<String> {
        let d = |x: &BigUint| x.to_string();
        match self {
            Payload::GroupKey { y_group } => vec![d(y_group)],
            Payload::Share { u, v } => vec![d(u), d(v)],
            Payload::Commitment { w } => vec![d(w)],
            Payload::PrivateCommitment { z } => vec![d(z)],
            Payload::Partial { s, r } => vec![d(s), d(r)],
            Payload::Signature { s, w, r, message } => vec![d(s), d(w), d(r), hex::encode(message)],
            Payload::Presentation {
                s,
                w,
                r,
                message,
                mu,
                z,
            } => {
                vec![d(s), d(w), d(r), hex::encode(message), d(mu), d(z)]
            }
            Payload::ConfirmCommit { w } => vec![d(w)],
            Payload::ConfirmResponse { beta, gamma } => vec![d(beta), d(gamma)],
            Payload::ConfirmOpen { u, v } => vec![d(u), d(v)],
            Payload::ConfirmReveal { alpha } => vec![d(alpha)],
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Envelope {
    pub from: PartyId,
    pub to: Destination,
    pub phase: Phase,
    pub payload: Payload,
}

impl Envelope {
    pub fn direct(from: PartyId, to: PartyId, payload: Payload) -> Self {
        Envelope {
            from,
            to: Destination::Party(to),
            phase: payload.phase(),
            payload,
        }
    }

    pub fn broadcast(from: PartyId, payload: Payload) -> Self {
        Envelope {
            from,
            to: Destination::Broadcast,
            phase: payload.phase(),
            payload,
        }
    }
}
