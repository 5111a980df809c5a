//! Slot-level channel: messages, the noiseless F_q adder channel that
//! reliable compute-and-forward provides, and conversion of bits to
//! channel uses.

use std::collections::BTreeSet;

use crate::error::{Result, ScraError};
use crate::sigcode::{sum_words, SignatureCodebook, SymbolWord, UserId};

/// A user's transmission: signature followed by payload.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Message {
    user: UserId,
    word: SymbolWord,
    payload_len: usize,
}

impl Message {
    pub fn new(codebook: &SignatureCodebook, user: UserId, payload: &SymbolWord) -> Result<Self> {
        let word = codebook.encode_signature(user)?.concat(payload)?;
        Ok(Message { user, word, payload_len: payload.len() })
    }

    pub fn user(&self) -> UserId {
        self.user
    }

    pub fn word(&self) -> &SymbolWord {
        &self.word
    }

    pub fn payload_len(&self) -> usize {
        self.payload_len
    }

    pub fn signature_len(&self) -> usize {
        self.word.len() - self.payload_len
    }
}

/// Componentwise F_q sum of all words sent in a slot. An idle slot yields
/// the zero word of `word_len` symbols.
pub fn adder_channel(q: u32, word_len: usize, messages: &[&Message]) -> Result<SymbolWord> {
    let mut seen = BTreeSet::new();
    for m in messages {
        if !seen.insert(m.user) {
            return Err(ScraError::argument(format!("user {} transmits twice in one slot", m.user)));
        }
    }
    sum_words(q, word_len, messages.iter().map(|m| &m.word))
}

/// `½ log2⁺(P)`, the computation rate of the lattice scheme.
pub fn plnc_rate(power: f64) -> Result<f64> {
    if !(power > 0.0) || !power.is_finite() {
        return Err(ScraError::argument(format!("power must be positive and finite, got {power}")));
    }
    Ok(if power >= 1.0 { 0.5 * power.log2() } else { 0.0 })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateModel {
    /// Linear transmit power.
    pub power: f64,
    /// Payload bits per message.
    pub payload_bits: f64,
    /// Signature bits per message.
    pub signature_bits: f64,
}

impl RateModel {
    pub fn new(power: f64, payload_bits: f64, signature_bits: f64) -> Result<Self> {
        plnc_rate(power)?;
        if !(payload_bits >= 0.0) || !(signature_bits >= 0.0) {
            return Err(ScraError::argument("bit counts must be nonnegative"));
        }
        Ok(RateModel { power, payload_bits, signature_bits })
    }

    pub fn rate(&self) -> f64 {
        plnc_rate(self.power).unwrap_or(0.0)
    }

    /// Channel uses per slot, `ceil((N_w + D) / R)`.
    pub fn slot_channel_uses(&self) -> Result<u64> {
        let rate = self.rate();
        if rate <= 0.0 {
            return Err(ScraError::capability(format!("power too low for positive rate: P={}", self.power)));
        }
        let n = ((self.signature_bits + self.payload_bits) / rate).ceil();
        Ok((n as u64).max(1))
    }
}
