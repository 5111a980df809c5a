use std::collections::{BTreeMap, HashMap};

use super::transcript::{FeedbackKind, FeedbackMsg, GroupPath, ReceiverEvent, SlotKind};
use crate::error::{Result, ScraError};
use crate::sigcode::{DecodeKind, SignatureCodebook, SymbolWord, UserId};

/// What the receiver asks the population to do next.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Instruction {
    /// Every user in the group transmits.
    Transmit(GroupPath),
    /// One identified user transmits alone.
    Poll(UserId),
    Finished,
}

enum Frame {
    Node {
        scope: GroupPath,
        known: Option<SymbolWord>,
    },
    /// Derive the second child of `scope` once the first one is done.
    Second {
        scope: GroupPath,
        parent: SymbolWord,
    },
}

enum Awaiting {
    Node(GroupPath),
    Poll(UserId),
}

struct Polling {
    scope: GroupPath,
    users: Vec<UserId>,
    next: usize,
    residual: SymbolWord,
}

/// Receiver-side state machine. It sees nothing but the words coming out
/// of the adder channel, decides what happens next and reconstructs the
/// payloads.
pub struct Receiver<'a> {
    codebook: &'a SignatureCodebook,
    sic: bool,
    stack: Vec<Frame>,
    awaiting: Option<Awaiting>,
    polling: Option<Polling>,
    first_child_sums: HashMap<GroupPath, SymbolWord>,
    events: Vec<ReceiverEvent>,
    resolved: BTreeMap<UserId, SymbolWord>,
    slots_used: u64,
    sic_derivations: u64,
}

impl<'a> Receiver<'a> {
    pub fn new(codebook: &'a SignatureCodebook, sic: bool) -> Self {
        Receiver {
            codebook,
            sic,
            stack: vec![Frame::Node { scope: GroupPath::root(), known: None }],
            awaiting: None,
            polling: None,
            first_child_sums: HashMap::new(),
            events: Vec::new(),
            resolved: BTreeMap::new(),
            slots_used: 0,
            sic_derivations: 0,
        }
    }

    pub fn slots_used(&self) -> u64 {
        self.slots_used
    }

    pub fn sic_derivations(&self) -> u64 {
        self.sic_derivations
    }

    pub fn resolved(&self) -> &BTreeMap<UserId, SymbolWord> {
        &self.resolved
    }

    pub fn into_resolved(self) -> BTreeMap<UserId, SymbolWord> {
        self.resolved
    }

    /// Events recorded since the last call, in order.
    pub fn drain_events(&mut self) -> Vec<ReceiverEvent> {
        std::mem::take(&mut self.events)
    }

    pub fn next_instruction(&mut self) -> Result<Instruction> {
        if self.awaiting.is_some() {
            return Err(ScraError::integrity("receiver asked to move on before its slot was observed"));
        }
        loop {
            if let Some(user) = self.pending_poll()? {
                self.awaiting = Some(Awaiting::Poll(user));
                return Ok(Instruction::Poll(user));
            }
            match self.stack.pop() {
                None => return Ok(Instruction::Finished),
                Some(Frame::Node { scope, known: None }) => {
                    self.awaiting = Some(Awaiting::Node(scope.clone()));
                    return Ok(Instruction::Transmit(scope));
                }
                Some(Frame::Node { scope, known: Some(word) }) => self.handle_group(scope, word, true)?,
                Some(Frame::Second { scope, parent }) => {
                    let first = self
                        .first_child_sums
                        .remove(&scope.child(1))
                        .ok_or_else(|| ScraError::integrity(format!("no stored sum for group {scope}.1")))?;
                    self.stack.push(Frame::Node { scope: scope.child(2), known: Some(parent.minus(&first)?) });
                }
            }
        }
    }

    /// Feeds the channel output for the slot requested last.
    pub fn observe(&mut self, word: SymbolWord) -> Result<()> {
        match self.awaiting.take() {
            None => Err(ScraError::integrity("observation without a pending slot")),
            Some(Awaiting::Node(scope)) => {
                self.slots_used += 1;
                self.handle_group(scope, word, false)
            }
            Some(Awaiting::Poll(user)) => {
                self.slots_used += 1;
                self.handle_poll(user, word)
            }
        }
    }

    fn decode(&self, word: &SymbolWord) -> Result<crate::sigcode::DecodeOutcome> {
        let (signature, _) = word.split_at(self.codebook.signature_len());
        self.codebook.decode_sum(&signature)
    }

    fn handle_group(&mut self, scope: GroupPath, word: SymbolWord, derived: bool) -> Result<()> {
        let outcome = self.decode(&word)?;
        let kind = match (derived, outcome.is_collision()) {
            (false, _) => SlotKind::Transmission,
            (true, false) => SlotKind::SicDerived,
            (true, true) => SlotKind::SkippedSplit,
        };
        if derived {
            self.sic_derivations += 1;
        }
        if self.sic && scope.sides().last() == Some(&1) {
            self.first_child_sums.insert(scope.clone(), word.clone());
        }
        let feedback = match &outcome.kind {
            DecodeKind::Empty => {
                if !word.is_zero() {
                    return Err(ScraError::integrity(format!("idle group {scope} carries a nonzero payload")));
                }
                FeedbackKind::Idle
            }
            DecodeKind::Resolved(users) => {
                let next = (users.len() > 1).then(|| users[0]);
                self.polling =
                    Some(Polling { scope: scope.clone(), users: users.clone(), next: 0, residual: word.clone() });
                FeedbackKind::ResolvedAck(next)
            }
            DecodeKind::Collision => {
                if self.sic {
                    self.stack.push(Frame::Second { scope: scope.clone(), parent: word.clone() });
                } else {
                    self.stack.push(Frame::Node { scope: scope.child(2), known: None });
                }
                self.stack.push(Frame::Node { scope: scope.child(1), known: None });
                FeedbackKind::Split
            }
        };
        self.events.push(ReceiverEvent {
            kind,
            observed: word,
            outcome,
            feedback: FeedbackMsg { kind: feedback, scope },
        });
        Ok(())
    }

    /// The next user to poll, or `None` once the current group is done. The
    /// last user of a group never transmits alone; its message is what is
    /// left of the group sum.
    fn pending_poll(&mut self) -> Result<Option<UserId>> {
        let Some(p) = &self.polling else {
            return Ok(None);
        };
        if p.next + 1 < p.users.len() {
            return Ok(Some(p.users[p.next]));
        }
        let p = self.polling.take().expect("checked above");
        let last = *p.users.last().expect("resolved groups are nonempty");
        let (signature, payload) = p.residual.split_at(self.codebook.signature_len());
        if &signature != self.codebook.encode_signature(last)? {
            return Err(ScraError::integrity(format!("residual of group {} is not user {last}'s signature", p.scope)));
        }
        self.resolved.insert(last, payload);
        Ok(None)
    }

    fn handle_poll(&mut self, user: UserId, word: SymbolWord) -> Result<()> {
        let outcome = self.decode(&word)?;
        if outcome.kind != DecodeKind::Resolved(vec![user]) {
            return Err(ScraError::integrity(format!("polled user {user} did not answer alone")));
        }
        let p = self.polling.as_mut().ok_or_else(|| ScraError::integrity("poll outside a resolved group"))?;
        p.residual.sub_assign(&word)?;
        p.next += 1;
        let next = (p.next + 1 < p.users.len()).then(|| p.users[p.next]);
        let scope = p.scope.clone();
        let (_, payload) = word.split_at(self.codebook.signature_len());
        self.resolved.insert(user, payload);
        self.events.push(ReceiverEvent {
            kind: SlotKind::Poll,
            observed: word,
            outcome,
            feedback: FeedbackMsg { kind: FeedbackKind::ResolvedAck(next), scope },
        });
        Ok(())
    }
}
