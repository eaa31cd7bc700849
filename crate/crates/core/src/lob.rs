//! Aggregated limit order book: per-side depth, top-of-book queries and
//! market-order matching across price levels.
//!
//! The book stores at most `depth_limit` levels per side (the feed publishes
//! top-of-book snapshots only). Depth arrives as full per-side snapshots;
//! per-price volume deltas are computed on application so that downstream
//! queue inference can classify cancellations.

use thiserror::Error;

use crate::types::{Aggressor, HalfTicks, Side, Ticks, TimestampMs, Units};

/// Number of price levels tracked per side.
pub const DEFAULT_DEPTH_LIMIT: usize = 5;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum LobError {
    #[error("{0} side is empty")]
    EmptySide(Side),
    #[error("malformed depth levels: {0}")]
    MalformedLevels(String),
    #[error("snapshot crosses the opposite side: bid {bid:?} >= ask {ask:?}")]
    CrossedBook { bid: Ticks, ask: Ticks },
}

/// One aggregated price level.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PriceLevel {
    pub price: Ticks,
    pub volume: Units,
}

impl PriceLevel {
    pub fn new(price: Ticks, volume: Units) -> Self {
        PriceLevel { price, volume }
    }
}

/// An execution against resting volume.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Fill {
    pub price: Ticks,
    pub volume: Units,
    /// Side of the resting order that was hit (bid fills mean someone sold).
    pub side: Side,
    pub timestamp: TimestampMs,
}

/// Per-price volume change produced by applying a depth snapshot.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct DepthDelta {
    /// `(price, new_volume - old_volume)`, ascending price, zero deltas omitted.
    pub changes: Vec<(Ticks, Units)>,
}

/// Five-level aggregated order book.
///
/// Bids are held in descending price order, asks ascending, so index 0 is
/// always the touch.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OrderBook {
    bids: Vec<PriceLevel>,
    asks: Vec<PriceLevel>,
    depth_limit: usize,
}

impl Default for OrderBook {
    fn default() -> Self {
        OrderBook::new(DEFAULT_DEPTH_LIMIT)
    }
}

impl OrderBook {
    pub fn new(depth_limit: usize) -> Self {
        OrderBook { bids: Vec::new(), asks: Vec::new(), depth_limit }
    }

    pub fn depth_limit(&self) -> usize {
        self.depth_limit
    }

    pub fn levels(&self, side: Side) -> &[PriceLevel] {
        match side {
            Side::Bid => &self.bids,
            Side::Ask => &self.asks,
        }
    }

    pub fn best_bid(&self) -> Option<PriceLevel> {
        self.bids.first().copied()
    }

    pub fn best_ask(&self) -> Option<PriceLevel> {
        self.asks.first().copied()
    }

    pub fn has_both_sides(&self) -> bool {
        !self.bids.is_empty() && !self.asks.is_empty()
    }

    /// Mid-price at half-tick resolution (exact arithmetic mean of the touch).
    pub fn mid_price(&self) -> Result<HalfTicks, LobError> {
        let bid = self.best_bid().ok_or(LobError::EmptySide(Side::Bid))?;
        let ask = self.best_ask().ok_or(LobError::EmptySide(Side::Ask))?;
        Ok(HalfTicks::midpoint(bid.price, ask.price))
    }

    /// Best ask minus best bid, in ticks.
    pub fn market_spread(&self) -> Result<i64, LobError> {
        let bid = self.best_bid().ok_or(LobError::EmptySide(Side::Bid))?;
        let ask = self.best_ask().ok_or(LobError::EmptySide(Side::Ask))?;
        Ok(ask.price - bid.price)
    }

    /// Public volume resting at `price` on `side`, zero if the level is absent.
    pub fn volume_at(&self, side: Side, price: Ticks) -> Units {
        self.levels(side)
            .iter()
            .find(|l| l.price == price)
            .map(|l| l.volume)
            .unwrap_or(0)
    }

    pub fn total_volume(&self, side: Side) -> Units {
        self.levels(side).iter().map(|l| l.volume).sum()
    }

    /// Walk the book with a market order, consuming depth best-price-first.
    ///
    /// Returns the fills in price order; any volume beyond the tracked depth
    /// is left unmatched (no synthetic liquidity is invented). The returned
    /// fills carry the side of the *resting* orders that were consumed.
    pub fn match_market_order(
        &mut self,
        aggressor: Aggressor,
        volume: Units,
        timestamp: TimestampMs,
    ) -> Vec<Fill> {
        let fills = self.preview_market_order(aggressor, volume, timestamp);
        let side = aggressor.consumes();
        for fill in &fills {
            let levels = match side {
                Side::Bid => &mut self.bids,
                Side::Ask => &mut self.asks,
            };
            if let Some(level) = levels.iter_mut().find(|l| l.price == fill.price) {
                level.volume -= fill.volume;
            }
        }
        self.prune_empty(side);
        fills
    }

    /// Compute the fills a market order would produce without mutating depth.
    ///
    /// Used when simulating agent orders that must not impact the public book.
    pub fn preview_market_order(
        &self,
        aggressor: Aggressor,
        volume: Units,
        timestamp: TimestampMs,
    ) -> Vec<Fill> {
        debug_assert!(volume > 0, "market order volume must be positive");
        let side = aggressor.consumes();
        let mut remaining = volume;
        let mut fills = Vec::new();
        for level in self.levels(side) {
            if remaining == 0 {
                break;
            }
            let take = remaining.min(level.volume);
            if take > 0 {
                fills.push(Fill { price: level.price, volume: take, side, timestamp });
                remaining -= take;
            }
        }
        fills
    }

    /// Replace one side with a full snapshot, returning per-price deltas.
    ///
    /// `levels` must be strictly sorted from the touch outwards (descending
    /// bids, ascending asks), with positive volumes and at most
    /// `depth_limit` entries.
    pub fn apply_depth_snapshot(
        &mut self,
        side: Side,
        levels: &[PriceLevel],
    ) -> Result<DepthDelta, LobError> {
        if levels.len() > self.depth_limit {
            return Err(LobError::MalformedLevels(format!(
                "{} levels exceed depth limit {}",
                levels.len(),
                self.depth_limit
            )));
        }
        for level in levels {
            if level.volume <= 0 {
                return Err(LobError::MalformedLevels(format!(
                    "non-positive volume {} at {:?}",
                    level.volume, level.price
                )));
            }
        }
        let sorted = levels.windows(2).all(|w| match side {
            Side::Bid => w[0].price > w[1].price,
            Side::Ask => w[0].price < w[1].price,
        });
        if !sorted {
            return Err(LobError::MalformedLevels("levels not strictly sorted".into()));
        }
        if let Some(touch) = levels.first() {
            match side {
                Side::Bid => {
                    if let Some(ask) = self.best_ask() {
                        if touch.price >= ask.price {
                            return Err(LobError::CrossedBook { bid: touch.price, ask: ask.price });
                        }
                    }
                }
                Side::Ask => {
                    if let Some(bid) = self.best_bid() {
                        if bid.price >= touch.price {
                            return Err(LobError::CrossedBook { bid: bid.price, ask: touch.price });
                        }
                    }
                }
            }
        }

        let old = match side {
            Side::Bid => std::mem::replace(&mut self.bids, levels.to_vec()),
            Side::Ask => std::mem::replace(&mut self.asks, levels.to_vec()),
        };

        let mut changes: Vec<(Ticks, Units)> = Vec::new();
        for level in levels {
            let before = old.iter().find(|l| l.price == level.price).map_or(0, |l| l.volume);
            if level.volume != before {
                changes.push((level.price, level.volume - before));
            }
        }
        for level in &old {
            if !levels.iter().any(|l| l.price == level.price) {
                changes.push((level.price, -level.volume));
            }
        }
        changes.sort_by_key(|(p, _)| *p);
        Ok(DepthDelta { changes })
    }

    fn prune_empty(&mut self, side: Side) {
        match side {
            Side::Bid => self.bids.retain(|l| l.volume > 0),
            Side::Ask => self.asks.retain(|l| l.volume > 0),
        }
    }
}


#[cfg(test)]
mod tests {
    use super::test_book::example_book;
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn best_bid_cases() {
        let book = example_book();
        assert_eq!(book.best_bid(), Some(PriceLevel::new(Ticks(400), 35)));
        assert_eq!(book.best_ask(), Some(PriceLevel::new(Ticks(402), 13)));

        let empty = OrderBook::default();
        assert_eq!(empty.best_bid(), None);

        let mut single = OrderBook::default();
        single.apply_depth_snapshot(Side::Bid, &[PriceLevel::new(Ticks(398), 11)]).unwrap();
        assert_eq!(single.best_bid(), Some(PriceLevel::new(Ticks(398), 11)));
    }

    #[test]
    fn mid_price_cases() {
        let book = example_book();
        // 100.25 at tick 0.25 == 802 half-ticks.
        assert_eq!(book.mid_price().unwrap(), HalfTicks(802));

        let mut degenerate = OrderBook::default();
        degenerate.apply_depth_snapshot(Side::Bid, &[PriceLevel::new(Ticks(400), 5)]).unwrap();
        assert!(degenerate.mid_price().is_err());
        degenerate.apply_depth_snapshot(Side::Ask, &[PriceLevel::new(Ticks(401), 5)]).unwrap();
        assert_eq!(degenerate.mid_price().unwrap(), HalfTicks(801));

        let mut wide = OrderBook::default();
        wide.apply_depth_snapshot(Side::Bid, &[PriceLevel::new(Ticks(398), 1)]).unwrap();
        wide.apply_depth_snapshot(Side::Ask, &[PriceLevel::new(Ticks(404), 1)]).unwrap();
        // (99.50 + 101.00) / 2 = 100.25
        assert_eq!(wide.mid_price().unwrap(), HalfTicks(802));
    }

    #[test]
    fn market_spread_cases() {
        let book = example_book();
        assert_eq!(book.market_spread().unwrap(), 2); // 0.5 at tick 0.25

        let mut wide = OrderBook::default();
        wide.apply_depth_snapshot(Side::Bid, &[PriceLevel::new(Ticks(398), 1)]).unwrap();
        wide.apply_depth_snapshot(Side::Ask, &[PriceLevel::new(Ticks(404), 1)]).unwrap();
        assert_eq!(wide.market_spread().unwrap(), 6); // 1.50

        let mut tight = OrderBook::default();
        tight.apply_depth_snapshot(Side::Bid, &[PriceLevel::new(Ticks(400), 1)]).unwrap();
        tight.apply_depth_snapshot(Side::Ask, &[PriceLevel::new(Ticks(401), 1)]).unwrap();
        assert_eq!(tight.market_spread().unwrap(), 1); // 0.25, one tick

        assert_eq!(OrderBook::default().market_spread(), Err(LobError::EmptySide(Side::Bid)));
    }

    #[test]
    fn match_consumes_best_ask_exactly() {
        let mut book = example_book();
        let fills = book.match_market_order(Aggressor::Buy, 13, 0);
        assert_eq!(fills, vec![Fill { price: Ticks(402), volume: 13, side: Side::Ask, timestamp: 0 }]);
        assert_eq!(book.best_ask(), Some(PriceLevel::new(Ticks(404), 12)));
    }

    #[test]
    fn match_spills_to_second_level() {
        // Expected fills derived by walking the example depth by hand:
        // 13 available at 100.50, remainder 7 from 101.00.
        let mut book = example_book();
        let fills = book.match_market_order(Aggressor::Buy, 20, 0);
        assert_eq!(
            fills,
            vec![
                Fill { price: Ticks(402), volume: 13, side: Side::Ask, timestamp: 0 },
                Fill { price: Ticks(404), volume: 7, side: Side::Ask, timestamp: 0 },
            ]
        );
    }

    #[test]
    fn match_partial_beyond_depth() {
        // Level walk over the bid side: 35 + 3 + 11 = 49 available, 11 unfilled.
        let mut book = example_book();
        let fills = book.match_market_order(Aggressor::Sell, 60, 0);
        assert_eq!(
            fills,
            vec![
                Fill { price: Ticks(400), volume: 35, side: Side::Bid, timestamp: 0 },
                Fill { price: Ticks(399), volume: 3, side: Side::Bid, timestamp: 0 },
                Fill { price: Ticks(398), volume: 11, side: Side::Bid, timestamp: 0 },
            ]
        );
        let filled: Units = fills.iter().map(|f| f.volume).sum();
        assert_eq!(60 - filled, 11);
        assert!(book.best_bid().is_none());
    }

    #[test]
    fn snapshot_deltas() {
        let mut book = example_book();
        // Identical snapshot: no deltas.
        let levels: Vec<_> = book.levels(Side::Bid).to_vec();
        let delta = book.apply_depth_snapshot(Side::Bid, &levels).unwrap();
        assert!(delta.changes.is_empty());

        // 100.00 volume 35 -> 30.
        let mut levels = levels.clone();
        levels[0].volume = 30;
        let delta = book.apply_depth_snapshot(Side::Bid, &levels).unwrap();
        assert_eq!(delta.changes, vec![(Ticks(400), -5)]);

        // New ask level appears at 100.25 volume 8.
        let delta = book
            .apply_depth_snapshot(
                Side::Ask,
                &[
                    PriceLevel::new(Ticks(401), 8),
                    PriceLevel::new(Ticks(402), 13),
                    PriceLevel::new(Ticks(404), 12),
                ],
            )
            .unwrap();
        assert_eq!(delta.changes, vec![(Ticks(401), 8)]);
    }

    #[test]
    fn snapshot_validation() {
        let mut book = example_book();
        let unsorted = [PriceLevel::new(Ticks(399), 1), PriceLevel::new(Ticks(400), 1)];
        assert!(matches!(
            book.apply_depth_snapshot(Side::Bid, &unsorted),
            Err(LobError::MalformedLevels(_))
        ));
        let negative = [PriceLevel::new(Ticks(400), -4)];
        assert!(matches!(
            book.apply_depth_snapshot(Side::Bid, &negative),
            Err(LobError::MalformedLevels(_))
        ));
        let crossing = [PriceLevel::new(Ticks(402), 5)];
        assert!(matches!(
            book.apply_depth_snapshot(Side::Bid, &crossing),
            Err(LobError::CrossedBook { .. })
        ));
    }

    #[test]
    fn mid_spread_touch_identity() {
        let book = example_book();
        let bid = book.best_bid().unwrap().price.as_half_ticks();
        let ask = book.best_ask().unwrap().price.as_half_ticks();
        let mid = book.mid_price().unwrap();
        let spread_ht = book.market_spread().unwrap() * 2;
        assert_eq!(bid.0 + spread_ht / 2, mid.0);
        assert_eq!(ask.0 - spread_ht / 2, mid.0);
    }

    fn arb_levels(side: Side) -> impl Strategy<Value = Vec<PriceLevel>> {
        (1usize..=5, 300i64..500, prop::collection::vec(1i64..200, 5))
            .prop_map(move |(n, base, vols)| {
                (0..n)
                    .map(|i| {
                        let offset = i as i64 + 1;
                        let price = match side {
                            Side::Bid => Ticks(base - offset),
                            Side::Ask => Ticks(base + offset),
                        };
                        PriceLevel::new(price, vols[i])
                    })
                    .collect()
            })
    }

    proptest! {
        #[test]
        fn book_stays_sorted_and_uncrossed(
            bids in arb_levels(Side::Bid),
            asks in arb_levels(Side::Ask),
            buy_vol in 1i64..500,
            sell_vol in 1i64..500,
        ) {
            let mut book = OrderBook::default();
            // Bid bases < 500 - 1 and ask bases > 300 + 1 can cross; skip those cases.
            prop_assume!(bids[0].price < asks[0].price);
            book.apply_depth_snapshot(Side::Bid, &bids).unwrap();
            book.apply_depth_snapshot(Side::Ask, &asks).unwrap();

            let before = book.total_volume(Side::Ask);
            let fills = book.match_market_order(Aggressor::Buy, buy_vol, 0);
            let filled: Units = fills.iter().map(|f| f.volume).sum();
            prop_assert_eq!(before - book.total_volume(Side::Ask), filled);
            prop_assert!(filled <= buy_vol);
            // Fills are price-ordered best first.
            for w in fills.windows(2) {
                prop_assert!(w[0].price < w[1].price);
            }

            let before = book.total_volume(Side::Bid);
            let fills = book.match_market_order(Aggressor::Sell, sell_vol, 0);
            let filled: Units = fills.iter().map(|f| f.volume).sum();
            prop_assert_eq!(before - book.total_volume(Side::Bid), filled);
            for w in fills.windows(2) {
                prop_assert!(w[0].price > w[1].price);
            }

            // Sorted invariants hold after arbitrary operations.
            for w in book.levels(Side::Bid).windows(2) {
                prop_assert!(w[0].price > w[1].price);
            }
            for w in book.levels(Side::Ask).windows(2) {
                prop_assert!(w[0].price < w[1].price);
            }
            if let (Some(b), Some(a)) = (book.best_bid(), book.best_ask()) {
                prop_assert!(b.price < a.price);
            }
        }
    }
}
