use std::collections::BTreeMap;

use rand::Rng;

use super::transcript::{FeedbackKind, FeedbackMsg, GroupPath};
use crate::channel::{adder_channel, Message};
use crate::error::{Result, ScraError};
use crate::sigcode::{SignatureCodebook, SymbolWord, UserId};

struct ActiveUser {
    message: Message,
    payload: SymbolWord,
    path: Vec<u8>,
}

/// The transmitter side of a contention period: every active user's
/// message and position in the splitting tree. Only the run driver talks
/// to it; the receiver never does.
pub struct Population<'a> {
    codebook: &'a SignatureCodebook,
    users: BTreeMap<UserId, ActiveUser>,
    word_len: usize,
}

impl<'a> Population<'a> {
    /// Draws uniform payloads for `active` in ascending id order.
    pub fn new<R: Rng + ?Sized>(
        codebook: &'a SignatureCodebook,
        active: &[UserId],
        payload_len: usize,
        rng: &mut R,
    ) -> Result<Self> {
        let mut ids = active.to_vec();
        ids.sort_unstable();
        if ids.windows(2).any(|w| w[0] == w[1]) {
            return Err(ScraError::argument("active set lists a user twice"));
        }
        let q = codebook.q();
        let mut users = BTreeMap::new();
        for id in ids {
            let payload = SymbolWord::new(q, (0..payload_len).map(|_| rng.random_range(0..q)).collect())?;
            let message = Message::new(codebook, id, &payload)?;
            users.insert(id, ActiveUser { message, payload, path: Vec::new() });
        }
        Ok(Population { codebook, users, word_len: codebook.signature_len() + payload_len })
    }

    pub fn len(&self) -> usize {
        self.users.len()
    }

    pub fn is_empty(&self) -> bool {
        self.users.is_empty()
    }

    pub fn payloads(&self) -> impl Iterator<Item = (UserId, &SymbolWord)> {
        self.users.iter().map(|(&id, u)| (id, &u.payload))
    }

    /// Members of the group at `scope`, ascending.
    pub fn members(&self, scope: &GroupPath) -> Vec<UserId> {
        self.users.iter().filter(|(_, u)| u.path.starts_with(scope.sides())).map(|(&id, _)| id).collect()
    }

    fn channel(&self, ids: &[UserId]) -> Result<SymbolWord> {
        let msgs: Vec<_> = ids.iter().map(|id| &self.users[id].message).collect();
        adder_channel(self.codebook.q(), self.word_len, &msgs)
    }

    /// Everyone in `scope` transmits.
    pub fn transmit(&self, scope: &GroupPath) -> Result<SymbolWord> {
        self.channel(&self.members(scope))
    }

    /// A single user transmits alone.
    pub fn poll(&self, user: UserId) -> Result<SymbolWord> {
        if !self.users.contains_key(&user) {
            // An inactive user has nothing to send.
            return Ok(SymbolWord::zeros(self.codebook.q(), self.word_len));
        }
        self.channel(&[user])
    }

    /// Reacts to broadcast feedback. On a split each member of the scope
    /// flips a fair coin, in ascending id order.
    pub fn apply_feedback<R: Rng + ?Sized>(&mut self, feedback: &FeedbackMsg, rng: &mut R) {
        if feedback.kind != FeedbackKind::Split {
            return;
        }
        let depth = feedback.scope.depth();
        for u in self.users.values_mut() {
            if u.path.len() == depth && u.path.as_slice() == feedback.scope.sides() {
                u.path.push(if rng.random::<bool>() { 1 } else { 2 });
            }
        }
    }
}

/// Splits `group` into two sides with one fair coin per member, drawn in
/// the given order.
pub fn split_group<R: Rng + ?Sized>(group: &[UserId], rng: &mut R) -> (Vec<UserId>, Vec<UserId>) {
    let mut first = Vec::new();
    let mut second = Vec::new();
    for &u in group {
        if rng.random::<bool>() {
            first.push(u);
        } else {
            second.push(u);
        }
    }
    (first, second)
}
