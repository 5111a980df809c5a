//! Sign-compute-resolve random access.
//!
//! Users attach a K-out-of-M signature to their payload and transmit over a
//! channel that hands the receiver the exact sum of all words in F_q. The
//! receiver counts transmitters from the leading signature symbol, identifies
//! them when at most `K` collide, and otherwise orders a binary split. An
//! optional SIC mode stores collision sums and derives the second subgroup's
//! sum by subtraction instead of spending a slot.
//!
//! * [`numtheory`]: primes, Sidon sets, extension-field arithmetic, binomial
//!   and incomplete beta helpers.
//! * [`sigcode`]: signature codebooks and the sum decoder.
//! * [`channel`]: messages, the F_q adder channel and rate accounting.
//! * [`protocol`]: the contention-resolution state machine and transcripts.
//! * [`analysis`]: exact recursions, bounds, throughputs and net rates.
//! * [`cli`]: experiment runners behind the `scra` binary.

// `!(x > 0.0)` is used on purpose so NaN inputs are rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod channel;
pub mod cli;
pub mod error;
pub mod numtheory;
pub mod protocol;
pub mod sigcode;

pub use error::{Result, ScraError};
