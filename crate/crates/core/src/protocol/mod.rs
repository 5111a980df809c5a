//! Contention resolution: K-tree splitting with polling, and the variant
//! that reuses stored collision sums (successive interference
//! cancellation).
//!
//! The [`Receiver`] only ever sees channel outputs. The [`Population`]
//! holds the ground truth and is driven by [`run_scheme`], which shuttles
//! instructions, channel words and feedback between the two.

mod population;
mod receiver;
mod sim;
mod transcript;

pub use population::{split_group, Population};
pub use receiver::{Instruction, Receiver};
pub use sim::{draw_active, simulate, trial_rng, RunningStats, SimulationSummary, TrialOutcome, Workload};
pub use transcript::{ContentionTranscript, FeedbackKind, FeedbackMsg, GroupPath, ReceiverEvent, SlotKind, SlotRecord};

use rand::Rng;

use crate::error::{Result, ScraError};
use crate::sigcode::{SignatureCodebook, UserId};

#[derive(Debug, Clone, Copy)]
pub struct ProtocolConfig<'a> {
    pub codebook: &'a SignatureCodebook,
    pub sic: bool,
    /// Payload symbols per message.
    pub payload_len: usize,
    pub seed: u64,
}

impl<'a> ProtocolConfig<'a> {
    pub fn new(codebook: &'a SignatureCodebook, sic: bool, payload_len: usize, seed: u64) -> Self {
        ProtocolConfig { codebook, sic, payload_len, seed }
    }

    pub fn k(&self) -> u32 {
        self.codebook.k()
    }
}

/// Whether transcripts carry the ground-truth membership of each group.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Audit {
    Record,
    /// Every `group` field is left empty.
    Sentinel,
}

/// Basic scheme: every group in the tree gets its own slot.
pub fn run_contention<R: Rng + ?Sized>(
    config: &ProtocolConfig<'_>,
    active: &[UserId],
    rng: &mut R,
) -> Result<ContentionTranscript> {
    run_audited(config, false, active, rng, Audit::Record)
}

/// SIC scheme: the second half of every split is obtained by subtraction.
pub fn run_contention_sic<R: Rng + ?Sized>(
    config: &ProtocolConfig<'_>,
    active: &[UserId],
    rng: &mut R,
) -> Result<ContentionTranscript> {
    run_audited(config, true, active, rng, Audit::Record)
}

/// Runs the scheme selected by `config.sic`.
pub fn run_scheme<R: Rng + ?Sized>(
    config: &ProtocolConfig<'_>,
    active: &[UserId],
    rng: &mut R,
) -> Result<ContentionTranscript> {
    run_audited(config, config.sic, active, rng, Audit::Record)
}

pub fn run_audited<R: Rng + ?Sized>(
    config: &ProtocolConfig<'_>,
    sic: bool,
    active: &[UserId],
    rng: &mut R,
    audit: Audit,
) -> Result<ContentionTranscript> {
    let codebook = config.codebook;
    if let Some(u) = active.iter().find(|u| u.0 == 0 || u.0 > codebook.population()) {
        return Err(ScraError::argument(format!("active user {u} outside 1..={}", codebook.population())));
    }
    let mut population = Population::new(codebook, active, config.payload_len, rng)?;
    let mut receiver = Receiver::new(codebook, sic);
    let mut slots = Vec::new();
    let mut polled = None;
    loop {
        let instruction = receiver.next_instruction()?;
        record_events(&mut receiver, &mut population, &mut slots, rng, audit, None);
        match instruction {
            Instruction::Transmit(scope) => receiver.observe(population.transmit(&scope)?)?,
            Instruction::Poll(user) => {
                polled = Some(user);
                receiver.observe(population.poll(user)?)?
            }
            Instruction::Finished => break,
        }
        record_events(&mut receiver, &mut population, &mut slots, rng, audit, polled.take());
    }

    let slots_used = receiver.slots_used();
    let sic_derivations = receiver.sic_derivations();
    let resolved = receiver.into_resolved();
    let expected = population.payloads();
    if resolved.len() != population.len() || !expected.zip(&resolved).all(|((u, p), (v, q))| u == *v && p == q) {
        return Err(ScraError::integrity("recovered payloads differ from the transmitted ones"));
    }
    Ok(ContentionTranscript { slots, resolved, slots_used, sic_derivations, initial_l: population.len() as u32 })
}

fn record_events<R: Rng + ?Sized>(
    receiver: &mut Receiver<'_>,
    population: &mut Population<'_>,
    slots: &mut Vec<SlotRecord>,
    rng: &mut R,
    audit: Audit,
    polled: Option<UserId>,
) {
    for ev in receiver.drain_events() {
        let group = match (audit, ev.kind, polled) {
            (Audit::Sentinel, _, _) => Vec::new(),
            (Audit::Record, SlotKind::Poll, Some(u)) => vec![u],
            (Audit::Record, _, _) => population.members(&ev.feedback.scope),
        };
        population.apply_feedback(&ev.feedback, rng);
        slots.push(SlotRecord {
            kind: ev.kind,
            group,
            observed: ev.observed,
            outcome: ev.outcome,
            feedback: ev.feedback,
        });
    }
}
