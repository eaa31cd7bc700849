//! Event-driven limit order book simulator and market-making research toolkit.
//!
//! The crate reconstructs a five-level order book from an event stream,
//! simulates an agent's limit orders through execution queues, and trains
//! and evaluates temporal-difference market makers against benchmark
//! strategies.
//!
//! Module map:
//!
//! - [`lob`] — aggregated book, top-of-book queries, market-order matching.
//! - [`feed`] — event files, synthetic stream generation, replay.
//! - [`exchange`] — agent order management and queue-position inference.
//! - [`strategy`] — action space, quote derivation, inventory constraints.
//! - [`reward`] — incremental PnL and its dampened variants.
//! - [`features`] — state construction, tile coding, value functions.
//! - [`learn`] — TD control algorithms with eligibility traces.
//! - [`bench`] — fixed, random and online-learning benchmark policies.
//! - [`harness`] — experiment configs, episode loop, metrics, output.

pub mod bench;
pub mod exchange;
pub mod features;
pub mod feed;
pub mod harness;
pub mod learn;
pub mod lob;
pub mod reward;
pub mod strategy;
pub mod types;

pub use types::{Aggressor, HalfTicks, Instrument, Side, Ticks, TimestampMs, Units};
