//! Simulated exchange wrapping the book: agent limit orders, queue-position
//! tracking, cancellation inference and fills from public trades.
//!
//! The public book is driven by depth snapshots only; simulated agent orders
//! never mutate it, so a replay with no agent orders is observationally
//! identical to a bare book replay. Between snapshots, public trades deplete
//! the agent's tracked queue position and accumulate per-level so that the
//! next snapshot can separate executed volume from cancellations. Unexplained
//! depth loss at the agent's level is treated as cancellation, removed from
//! the volume ahead and behind of the agent in proportion to their sizes
//! (the expected outcome when cancellations strike uniformly through the
//! queue); a seeded sampling mode realises the same model stochastically.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::feed::{EventKind, MarketEvent};
use crate::lob::{Fill, LobError, OrderBook, PriceLevel};
use crate::types::{Aggressor, Side, Ticks, TimestampMs, Units};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ExchangeError {
    #[error("a live order already exists on the {0} side")]
    DuplicateSide(Side),
    #[error("unknown order id {0}")]
    UnknownOrder(u64),
    #[error("order volume {volume} is not a positive multiple of lot {lot}")]
    InvalidVolume { volume: Units, lot: Units },
    #[error(transparent)]
    Book(#[from] LobError),
}

/// How inferred cancellations are attributed through the queue.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QueueMode {
    /// Deterministic expected-value depletion (default; reproducible).
    Expected,
    /// Seeded per-unit sampling of the same uniform model.
    Sampled { seed: u64 },
}

impl Default for QueueMode {
    fn default() -> Self {
        QueueMode::Expected
    }
}

/// Estimated position of an agent order within its price level's queue.
///
/// `ahead` and `behind` are fractional in expected-value mode because the
/// uniform-cancellation model removes proportional shares from each.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QueuePosition {
    pub ahead: f64,
    pub behind: f64,
}

impl QueuePosition {
    pub fn new(ahead: Units) -> Self {
        QueuePosition { ahead: ahead as f64, behind: 0.0 }
    }

    /// Public volume the queue currently tracks at this level.
    pub fn tracked_public(&self) -> f64 {
        self.ahead + self.behind
    }

    /// Apply a public trade of `volume` at this level.
    ///
    /// Depletes `ahead` first, then fills the agent up to `agent_remaining`
    /// whole units, then lets the remaining historical flow pass through
    /// `behind`. Returns the agent's integer fill volume.
    pub fn apply_trade(&mut self, volume: Units, agent_remaining: Units) -> Units {
        let v = volume as f64;
        let from_ahead = self.ahead.min(v);
        self.ahead -= from_ahead;
        let reach = v - from_ahead;
        let fill = ((reach + 1e-9).floor() as Units).clamp(0, agent_remaining);
        let after_agent = reach - fill as f64;
        self.behind -= self.behind.min(after_agent.max(0.0));
        fill
    }

    /// Remove `cancelled` units of unexplained depth loss, splitting it
    /// between ahead and behind in proportion to their volumes:
    /// `ahead -= c * (ahead / total)` and `behind -= c * (behind / total)`.
    pub fn apply_cancellation(&mut self, cancelled: f64) {
        let total = self.ahead + self.behind;
        if total <= 0.0 || cancelled <= 0.0 {
            return;
        }
        let c = cancelled.min(total);
        self.ahead -= c * (self.ahead / total);
        self.behind -= c * (self.behind / total);
        self.ahead = self.ahead.max(0.0);
        self.behind = self.behind.max(0.0);
    }

    /// Sampled counterpart of [`Self::apply_cancellation`]: each cancelled
    /// unit lands ahead of the agent with probability `ahead / total`.
    pub fn apply_cancellation_sampled(&mut self, cancelled: Units, rng: &mut impl Rng) {
        for _ in 0..cancelled {
            let total = self.ahead + self.behind;
            if total <= 0.0 {
                return;
            }
            if rng.gen::<f64>() * total < self.ahead {
                self.ahead = (self.ahead - 1.0).max(0.0);
            } else {
                self.behind = (self.behind - 1.0).max(0.0);
            }
        }
    }

    /// New volume joins the back of the queue.
    pub fn join_back(&mut self, volume: f64) {
        self.behind += volume.max(0.0);
    }
}

/// A live simulated limit order.
#[derive(Debug, Clone, PartialEq)]
pub struct AgentOrder {
    pub id: u64,
    pub side: Side,
    pub price: Ticks,
    pub volume_remaining: Units,
    pub queue: QueuePosition,
}

/// Simulated exchange state: public book plus the agent's orders.
#[derive(Debug)]
pub struct ExchangeState {
    book: OrderBook,
    orders: [Option<AgentOrder>; 2], // [bid, ask]
    next_id: u64,
    pending_fills: Vec<Fill>,
    lot: Units,
    mode: QueueMode,
    rng: Option<ChaCha8Rng>,
    clock: TimestampMs,
}

fn slot(side: Side) -> usize {
    match side {
        Side::Bid => 0,
        Side::Ask => 1,
    }
}

impl ExchangeState {
    pub fn new(lot: Units, mode: QueueMode) -> Self {
        let rng = match mode {
            QueueMode::Expected => None,
            QueueMode::Sampled { seed } => Some(ChaCha8Rng::seed_from_u64(seed)),
        };
        ExchangeState {
            book: OrderBook::default(),
            orders: [None, None],
            next_id: 1,
            pending_fills: Vec::new(),
            lot,
            mode,
            rng,
            clock: 0,
        }
    }

    pub fn book(&self) -> &OrderBook {
        &self.book
    }

    pub fn order(&self, side: Side) -> Option<&AgentOrder> {
        self.orders[slot(side)].as_ref()
    }

    pub fn live_order_count(&self) -> usize {
        self.orders.iter().filter(|o| o.is_some()).count()
    }

    /// Agent fills accumulated since the last drain.
    pub fn drain_fills(&mut self) -> Vec<Fill> {
        std::mem::take(&mut self.pending_fills)
    }

    /// Feed one public market event through the exchange.
    pub fn apply_event(&mut self, event: &MarketEvent) -> Result<(), ExchangeError> {
        self.clock = event.timestamp;
        match &event.kind {
            EventKind::Trade { aggressor, price, volume } => {
                self.on_public_trade(*aggressor, *price, *volume);
                Ok(())
            }
            EventKind::DepthUpdate { side, levels } => self.on_depth_snapshot(*side, levels),
        }
    }

    /// Place a limit order. Joins the back of the public queue at its price;
    /// a price crossing the opposite touch executes immediately against the
    /// displayed depth and the remainder rests.
    pub fn place_limit(
        &mut self,
        side: Side,
        price: Ticks,
        volume: Units,
    ) -> Result<u64, ExchangeError> {
        if self.orders[slot(side)].is_some() {
            return Err(ExchangeError::DuplicateSide(side));
        }
        if volume <= 0 || volume % self.lot != 0 {
            return Err(ExchangeError::InvalidVolume { volume, lot: self.lot });
        }
        let id = self.next_id;
        self.next_id += 1;

        // Marketable portion executes against the opposite displayed depth
        // without consuming it (simulated orders cannot impact the market).
        let mut remaining = volume;
        let crossing = match side {
            Side::Bid => self.book.best_ask().map_or(false, |a| price >= a.price),
            Side::Ask => self.book.best_bid().map_or(false, |b| price <= b.price),
        };
        if crossing {
            let aggressor = match side {
                Side::Bid => Aggressor::Buy,
                Side::Ask => Aggressor::Sell,
            };
            for fill in self.book.preview_market_order(aggressor, remaining, self.clock) {
                let beyond_limit = match side {
                    Side::Bid => fill.price > price,
                    Side::Ask => fill.price < price,
                };
                if beyond_limit {
                    break;
                }
                self.pending_fills.push(Fill { side, ..fill });
                remaining -= fill.volume;
            }
        }
        if remaining > 0 {
            let ahead = self.book.volume_at(side, price);
            self.orders[slot(side)] = Some(AgentOrder {
                id,
                side,
                price,
                volume_remaining: remaining,
                queue: QueuePosition::new(ahead),
            });
        }
        Ok(id)
    }

    pub fn cancel(&mut self, id: u64) -> Result<(), ExchangeError> {
        for order in self.orders.iter_mut() {
            if order.as_ref().map_or(false, |o| o.id == id) {
                *order = None;
                return Ok(());
            }
        }
        Err(ExchangeError::UnknownOrder(id))
    }

    /// Execute an agent market order against the displayed depth.
    ///
    /// `signed_volume` is positive for a buy, negative for a sell. Returns
    /// the fills, which are also queued for the next drain.
    pub fn execute_market_order(&mut self, signed_volume: Units) -> Vec<Fill> {
        if signed_volume == 0 {
            return Vec::new();
        }
        let (aggressor, side, volume) = if signed_volume > 0 {
            (Aggressor::Buy, Side::Bid, signed_volume)
        } else {
            (Aggressor::Sell, Side::Ask, -signed_volume)
        };
        let fills: Vec<Fill> = self
            .book
            .preview_market_order(aggressor, volume, self.clock)
            .into_iter()
            .map(|f| Fill { side, ..f })
            .collect();
        self.pending_fills.extend(fills.iter().copied());
        fills
    }

    /// Public trade: depletes the agent queue at that level FIFO and emits
    /// agent fills; volume is recorded for cancellation classification.
    fn on_public_trade(&mut self, aggressor: Aggressor, price: Ticks, volume: Units) {
        let book_side = aggressor.consumes();

        let clock = self.clock;
        let mut filled: Option<(Units, Ticks, Side)> = None;
        if let Some(order) = self.orders[slot(book_side)].as_mut() {
            if order.price == price {
                let fill = order.queue.apply_trade(volume, order.volume_remaining);
                if fill > 0 {
                    order.volume_remaining -= fill;
                    filled = Some((fill, order.price, order.side));
                }
            }
        }
        if let Some((fill, fill_price, side)) = filled {
            self.pending_fills.push(Fill {
                price: fill_price,
                volume: fill,
                side,
                timestamp: clock,
            });
            if self.orders[slot(book_side)].as_ref().map_or(false, |o| o.volume_remaining == 0) {
                self.orders[slot(book_side)] = None;
            }
        }
    }

    /// Depth snapshot: update the public book, then reconcile the agent's
    /// queue against the new depth at its level.
    ///
    /// Trades are applied to the queue when they arrive (trades precede the
    /// snapshot that reflects them in the stream), so by the time a snapshot
    /// lands, any remaining loss of tracked volume at the agent's level is
    /// unexplained by executions and attributed to cancellation; growth
    /// joins the queue behind the agent.
    fn on_depth_snapshot(&mut self, side: Side, levels: &[PriceLevel]) -> Result<(), ExchangeError> {
        self.book.apply_depth_snapshot(side, levels)?;

        if let Some(order) = self.orders[slot(side)].as_mut() {
            // A level deeper than the published window is out of view; keep
            // the current estimate rather than treating it as emptied.
            let visible = match side {
                Side::Bid => levels.last().map_or(true, |deepest| order.price >= deepest.price),
                Side::Ask => levels.last().map_or(true, |deepest| order.price <= deepest.price),
            };
            if visible {
                let new_depth = levels
                    .iter()
                    .find(|l| l.price == order.price)
                    .map_or(0, |l| l.volume) as f64;
                let tracked = order.queue.tracked_public();
                if tracked > new_depth {
                    let loss = tracked - new_depth;
                    match (&self.mode, self.rng.as_mut()) {
                        (QueueMode::Expected, _) | (_, None) => {
                            order.queue.apply_cancellation(loss)
                        }
                        (QueueMode::Sampled { .. }, Some(rng)) => {
                            let whole = loss.floor() as Units;
                            order.queue.apply_cancellation_sampled(whole, rng);
                            // Remove any fractional residue deterministically.
                            let residue = order.queue.tracked_public() - new_depth;
                            if residue > 0.0 {
                                order.queue.apply_cancellation(residue);
                            }
                        }
                    }
                } else if new_depth > tracked {
                    order.queue.join_back(new_depth - tracked);
                }
            }
        }
        Ok(())
    }
}
