use std::collections::BTreeMap;
use std::fmt::{self, Write as _};

use crate::sigcode::{DecodeKind, DecodeOutcome, SymbolWord, UserId};

/// Position of a group in the splitting tree: the sequence of sides
/// (1 or 2) taken from the root.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct GroupPath(Vec<u8>);

impl GroupPath {
    pub fn root() -> Self {
        GroupPath(Vec::new())
    }

    pub fn child(&self, side: u8) -> Self {
        debug_assert!(side == 1 || side == 2);
        let mut v = self.0.clone();
        v.push(side);
        GroupPath(v)
    }

    pub fn depth(&self) -> usize {
        self.0.len()
    }

    pub fn sides(&self) -> &[u8] {
        &self.0
    }
}

impl fmt::Display for GroupPath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return f.write_str("root");
        }
        for (i, s) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_char('.')?;
            }
            write!(f, "{s}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SlotKind {
    /// A group transmits jointly.
    Transmission,
    /// A single identified user transmits alone.
    Poll,
    /// Group sum obtained by subtraction instead of a slot.
    SicDerived,
    /// Subtraction revealed a collision; the group splits without a slot.
    SkippedSplit,
}

impl SlotKind {
    pub fn costs_slot(self) -> bool {
        matches!(self, SlotKind::Transmission | SlotKind::Poll)
    }

    pub fn label(self) -> &'static str {
        match self {
            SlotKind::Transmission => "tx",
            SlotKind::Poll => "poll",
            SlotKind::SicDerived => "sic",
            SlotKind::SkippedSplit => "skip",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FeedbackKind {
    Idle,
    /// Group identified. Carries the user that transmits next, if any is
    /// still to be polled.
    ResolvedAck(Option<UserId>),
    Split,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FeedbackMsg {
    pub kind: FeedbackKind,
    pub scope: GroupPath,
}

/// What the receiver knows about one step: everything except `group`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReceiverEvent {
    pub kind: SlotKind,
    pub observed: SymbolWord,
    pub outcome: DecodeOutcome,
    pub feedback: FeedbackMsg,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SlotRecord {
    pub kind: SlotKind,
    /// Ground-truth members of the addressed group, kept for audit only.
    pub group: Vec<UserId>,
    pub observed: SymbolWord,
    pub outcome: DecodeOutcome,
    pub feedback: FeedbackMsg,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ContentionTranscript {
    pub slots: Vec<SlotRecord>,
    /// Recovered payload per user.
    pub resolved: BTreeMap<UserId, SymbolWord>,
    pub slots_used: u64,
    pub sic_derivations: u64,
    pub initial_l: u32,
}

impl ContentionTranscript {
    /// One line per record: `index kind L outcome [ids...]`, where the ids
    /// are those the receiver decoded from the observed word.
    pub fn export(&self) -> String {
        let mut out = String::new();
        for (i, rec) in self.slots.iter().enumerate() {
            let _ = write!(out, "{i} {} {} {}", rec.kind.label(), rec.outcome.multiplicity, rec.outcome.label());
            if let DecodeKind::Resolved(users) = &rec.outcome.kind {
                for u in users {
                    let _ = write!(out, " {u}");
                }
            }
            out.push('\n');
        }
        out
    }
}
