//! Seeded zero-intelligence event-stream generator.
//!
//! Stands in for recorded data: Poisson-style flow of limit orders,
//! cancellations and market orders around a drifting reference price.
//! The generator maintains an internal book deeper than the published
//! five levels so that the visible touch can recede realistically, and it
//! emits a depth snapshot after every flow event that changes the book.
//! Output is a pure function of `(seed, params)`.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::feed::{EventKind, FeedError, MarketEvent, TradingDay};
use crate::lob::PriceLevel;
use crate::types::{Aggressor, Decimal, Instrument, Side, Ticks, TimestampMs, Units};

/// Levels kept internally per side; only the top five are published.
const INTERNAL_DEPTH: usize = 8;
/// Published depth.
const PUBLISHED_DEPTH: usize = 5;

/// Relative flow intensities and market geometry for one synthetic day.
#[derive(Debug, Clone, PartialEq)]
pub struct FlowParams {
    /// Number of flow events to generate (the emitted event count is larger
    /// because trades are followed by a depth snapshot).
    pub events: usize,
    /// Relative intensity of limit order arrivals.
    pub limit_rate: f64,
    /// Relative intensity of market orders.
    pub market_rate: f64,
    /// Relative intensity of cancellations.
    pub cancel_rate: f64,
    /// Directional bias in [-1, 1]: positive values skew market orders to
    /// the buy side, pushing the mid upwards over the day.
    pub drift: f64,
    /// Probability that a market order also consumes liquidity that
    /// refilled the touch between snapshots, printing more volume at the
    /// price than the previous snapshot displayed.
    pub hidden_refill: f64,
    /// Strength of the order-flow pull towards fair value, in [0, 0.45]:
    /// larger values revert the mid faster after displacements.
    pub reversion: f64,
    /// Amplitude in ticks of a sinusoidal fair-value swing (0 disables it).
    pub wave_amplitude: f64,
    /// Period of the fair-value swing, in events.
    pub wave_period: f64,
    /// Probability per event of a fair-value jump (news ticks; 0 disables).
    pub jump_rate: f64,
    /// Maximum jump magnitude in ticks; sizes draw uniformly from 2..=max.
    pub jump_ticks: i64,
    /// Per-event probability of flipping which side absorbs hidden flow.
    /// Zero keeps refill prints symmetric; positive values create stretches
    /// where one side's level keeps refilling and printing (an iceberg
    /// being worked) without the price moving.
    pub absorption_flip: f64,
    /// Starting reference price in ticks.
    pub start_price: Ticks,
    /// Typical resting volume per level, in units (lot multiples).
    pub level_volume: Units,
    /// Mean inter-event gap in milliseconds.
    pub mean_dt_ms: f64,
    /// Instrument tick size as a decimal string, e.g. "0.25".
    pub tick: Decimal,
    /// Instrument lot size.
    pub lot: Units,
    pub symbol: String,
}

impl Default for FlowParams {
    fn default() -> Self {
        FlowParams {
            events: 10_000,
            limit_rate: 1.0,
            market_rate: 0.4,
            cancel_rate: 0.5,
            drift: 0.0,
            hidden_refill: 0.35,
            reversion: 0.35,
            wave_amplitude: 0.0,
            wave_period: 1_000.0,
            jump_rate: 0.0,
            jump_ticks: 6,
            absorption_flip: 0.0,
            start_price: Ticks(400),
            level_volume: 800,
            mean_dt_ms: 40.0,
            tick: Decimal { mantissa: 25, dp: 2 },
            lot: 100,
            symbol: "SYN".to_string(),
        }
    }
}

impl FlowParams {
    fn validate(&self) -> Result<(), FeedError> {
        let bad = |msg: &str| Err(FeedError::InvalidParams(msg.to_string()));
        if self.events == 0 {
            return bad("events must be positive");
        }
        if self.limit_rate < 0.0 || self.market_rate < 0.0 || self.cancel_rate < 0.0 {
            return bad("intensities must be non-negative");
        }
        if self.limit_rate + self.market_rate + self.cancel_rate <= 0.0 {
            return bad("at least one intensity must be positive");
        }
        if !(-1.0..=1.0).contains(&self.drift) {
            return bad("drift must lie in [-1, 1]");
        }
        if !(0.0..=1.0).contains(&self.hidden_refill) {
            return bad("hidden_refill must lie in [0, 1]");
        }
        if !(0.0..=0.45).contains(&self.reversion) {
            return bad("reversion must lie in [0, 0.45]");
        }
        if self.wave_amplitude < 0.0 || self.wave_period <= 0.0 {
            return bad("wave_amplitude must be non-negative and wave_period positive");
        }
        if !(0.0..=0.2).contains(&self.jump_rate) || self.jump_ticks < 2 {
            return bad("jump_rate must lie in [0, 0.2] with jump_ticks at least 2");
        }
        if !(0.0..=1.0).contains(&self.absorption_flip) {
            return bad("absorption_flip must lie in [0, 1]");
        }
        if self.level_volume <= 0 || self.lot <= 0 || self.level_volume < self.lot {
            return bad("level_volume and lot must be positive with level_volume >= lot");
        }
        if self.start_price.0 <= INTERNAL_DEPTH as i64 * 2 {
            return bad("start_price too small for the book depth");
        }
        if self.mean_dt_ms < 0.0 || !self.mean_dt_ms.is_finite() {
            return bad("mean_dt_ms must be finite and non-negative");
        }
        if !self.tick.is_positive() {
            return bad("tick must be positive");
        }
        Ok(())
    }
}

struct SideBook {
    side: Side,
    /// Touch-first levels, strictly ordered away from the mid.
    levels: Vec<PriceLevel>,
}

impl SideBook {
    fn touch(&self) -> Ticks {
        self.levels[0].price
    }

    fn published(&self) -> Vec<PriceLevel> {
        self.levels.iter().take(PUBLISHED_DEPTH).copied().collect()
    }

    fn next_outward_price(&self) -> Ticks {
        let last = self.levels.last().unwrap().price;
        match self.side {
            Side::Bid => Ticks(last.0 - 1),
            Side::Ask => Ticks(last.0 + 1),
        }
    }
}

/// Generate one synthetic trading day; deterministic in `(seed, params)`.
pub fn generate_synthetic_day(seed: u64, params: &FlowParams) -> Result<TradingDay, FeedError> {
    params.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let instrument = Instrument::new(params.symbol.clone(), params.tick, params.lot)
        .map_err(|e| FeedError::InvalidParams(e.to_string()))?;

    let unit = params.lot;
    let mut level_vol = |rng: &mut ChaCha8Rng| -> Units {
        let lots = (params.level_volume / unit).max(1);
        let scale = rng.gen_range(0.5..1.5);
        ((lots as f64 * scale).round() as Units).max(1) * unit
    };

    let mut bids = SideBook { side: Side::Bid, levels: Vec::new() };
    let mut asks = SideBook { side: Side::Ask, levels: Vec::new() };
    for i in 0..INTERNAL_DEPTH as i64 {
        bids.levels.push(PriceLevel::new(Ticks(params.start_price.0 - 1 - i), level_vol(&mut rng)));
        asks.levels.push(PriceLevel::new(Ticks(params.start_price.0 + 1 + i), level_vol(&mut rng)));
    }

    let mut events: Vec<MarketEvent> = Vec::new();
    let mut clock: TimestampMs = 0;
    events.push(snapshot_event(clock, &bids));
    events.push(snapshot_event(clock, &asks));

    let total_rate = params.limit_rate + params.market_rate + params.cancel_rate;
    let p_limit = params.limit_rate / total_rate;
    let p_market = params.market_rate / total_rate;

    // Order flow leans towards a fair value that drifts through the day;
    // the gap between fair value and mid mean-reverts the price locally
    // while the drift trends it.
    let mut fair_anchor = params.start_price.0 as f64;
    // Which book side currently absorbs hidden flow (prints richly).
    let mut absorbed: Side = if rng.gen::<bool>() { Side::Bid } else { Side::Ask };

    for step in 0..params.events {
        if params.absorption_flip > 0.0 && rng.gen::<f64>() < params.absorption_flip {
            absorbed = absorbed.opposite();
        }
        fair_anchor += params.drift * 0.02;
        if params.jump_rate > 0.0 && rng.gen::<f64>() < params.jump_rate {
            let size = rng.gen_range(2..=params.jump_ticks) as f64;
            fair_anchor += if rng.gen::<bool>() { size } else { -size };
        }
        let wave = params.wave_amplitude
            * (step as f64 * std::f64::consts::TAU / params.wave_period).sin();
        let fair_value = fair_anchor + wave;
        let mid_ticks = (bids.touch().0 + asks.touch().0) as f64 / 2.0;
        let flow_pressure = ((fair_value - mid_ticks) / 2.0).tanh();
        // Exponential inter-arrival, rounded down so that simultaneous
        // events occur and exercise same-timestamp handling downstream.
        let gap = -params.mean_dt_ms * (1.0 - rng.gen::<f64>()).ln();
        clock += gap.floor() as TimestampMs;

        // Replenish a side that has emptied out before sampling flow.
        if bids.levels.len() < 2 {
            refill(&mut bids, &asks, &mut rng, &mut level_vol);
            events.push(snapshot_event(clock, &bids));
            continue;
        }
        if asks.levels.len() < 2 {
            refill(&mut asks, &bids, &mut rng, &mut level_vol);
            events.push(snapshot_event(clock, &asks));
            continue;
        }

        let roll: f64 = rng.gen();
        if roll < p_market {
            let p_buy =
                (0.5 + 0.1 * params.drift + params.reversion * flow_pressure).clamp(0.05, 0.95);
            let aggressor = if rng.gen::<f64>() < p_buy { Aggressor::Buy } else { Aggressor::Sell };
            let (consumed, opposite) = match aggressor {
                Aggressor::Buy => (&mut asks, &bids),
                Aggressor::Sell => (&mut bids, &asks),
            };
            let _ = opposite;
            let mean_lots = ((params.level_volume / unit) as f64 * 0.6).max(1.0);
            let lots = sample_geometric_lots(&mut rng, mean_lots);
            let mut remaining = lots * unit;
            let mut any = false;
            while remaining > 0 && consumed.levels.len() > 1 {
                let touch = &mut consumed.levels[0];
                let take = remaining.min(touch.volume);
                remaining -= take;
                // Liquidity that refilled the level between snapshots can
                // print on the tape beyond the displayed depth.
                let mut printed = take;
                let refill_prob = if params.absorption_flip > 0.0 {
                    if aggressor.consumes() == absorbed {
                        params.hidden_refill
                    } else {
                        params.hidden_refill * 0.1
                    }
                } else {
                    params.hidden_refill
                };
                if rng.gen::<f64>() < refill_prob {
                    let mean_lots = ((params.level_volume / unit) as f64 * 0.8).max(2.0);
                    let hidden = (sample_geometric_lots(&mut rng, mean_lots) * unit).min(remaining);
                    printed += hidden;
                    remaining -= hidden;
                }
                if printed == 0 {
                    break;
                }
                events.push(MarketEvent {
                    timestamp: clock,
                    kind: EventKind::Trade { aggressor, price: touch.price, volume: printed },
                });
                any = true;
                touch.volume -= take;
                if touch.volume == 0 {
                    consumed.levels.remove(0);
                    let price = consumed.next_outward_price();
                    consumed.levels.push(PriceLevel::new(price, level_vol(&mut rng)));
                }
            }
            if any {
                let snap = snapshot_event(clock, consumed);
                events.push(snap);
            }
        } else if roll < p_market + p_limit {
            let p_ask = (0.5 - 0.2 * flow_pressure).clamp(0.05, 0.95);
            let side = if rng.gen::<f64>() < p_ask { Side::Ask } else { Side::Bid };
            let (book, other) = match side {
                Side::Bid => (&mut bids, &asks),
                Side::Ask => (&mut asks, &bids),
            };
            let spread = (other.touch() - book.touch()).abs();
            let improve = spread >= 2 && rng.gen::<f64>() < 0.15;
            let vol = (sample_geometric_lots(&mut rng, 4.0)) * unit;
            if improve {
                let price = match side {
                    Side::Bid => Ticks(book.touch().0 + 1),
                    Side::Ask => Ticks(book.touch().0 - 1),
                };
                book.levels.insert(0, PriceLevel::new(price, vol));
                if book.levels.len() > INTERNAL_DEPTH {
                    book.levels.pop();
                }
            } else {
                let slot = sample_geometric_index(&mut rng, book.levels.len());
                book.levels[slot].volume += vol;
            }
            events.push(snapshot_event(clock, book));
        } else {
            let side = if rng.gen::<bool>() { Side::Bid } else { Side::Ask };
            let other_touch = match side {
                Side::Bid => asks.touch(),
                Side::Ask => bids.touch(),
            };
            let book = match side {
                Side::Bid => &mut bids,
                Side::Ask => &mut asks,
            };
            let slot = sample_geometric_index(&mut rng, book.levels.len());
            let level = &mut book.levels[slot];
            let max_lots = level.volume / unit;
            let cancel = (sample_geometric_lots(&mut rng, 2.0)).min(max_lots) * unit;
            level.volume -= cancel;
            if level.volume == 0 {
                book.levels.remove(slot);
                if book.levels.is_empty() {
                    let price = match side {
                        Side::Bid => Ticks(other_touch.0 - 1),
                        Side::Ask => Ticks(other_touch.0 + 1),
                    };
                    book.levels.push(PriceLevel::new(price, level_vol(&mut rng)));
                } else if slot == book.levels.len() {
                    let price = book.next_outward_price();
                    book.levels.push(PriceLevel::new(price, level_vol(&mut rng)));
                }
            }
            events.push(snapshot_event(clock, book));
        }
    }

    Ok(TradingDay { date: format!("synthetic-{seed}"), instrument, events })
}

fn refill(
    book: &mut SideBook,
    other: &SideBook,
    rng: &mut ChaCha8Rng,
    level_vol: &mut impl FnMut(&mut ChaCha8Rng) -> Units,
) {
    let anchor = match book.side {
        Side::Bid => Ticks(other.touch().0 - 1),
        Side::Ask => Ticks(other.touch().0 + 1),
    };
    book.levels.clear();
    for i in 0..INTERNAL_DEPTH as i64 {
        let price = match book.side {
            Side::Bid => Ticks(anchor.0 - i),
            Side::Ask => Ticks(anchor.0 + i),
        };
        book.levels.push(PriceLevel::new(price, level_vol(rng)));
    }
}

fn snapshot_event(timestamp: TimestampMs, book: &SideBook) -> MarketEvent {
    MarketEvent {
        timestamp,
        kind: EventKind::DepthUpdate { side: book.side, levels: book.published() },
    }
}

/// Geometric number of lots with the given mean, at least one.
fn sample_geometric_lots(rng: &mut ChaCha8Rng, mean: f64) -> Units {
    let p = 1.0 / mean.max(1.0);
    let u: f64 = rng.gen();
    let lots = (u.ln() / (1.0 - p).ln()).floor() as Units + 1;
    lots.clamp(1, 10_000)
}

/// Index biased towards the touch (slot 0).
fn sample_geometric_index(rng: &mut ChaCha8Rng, len: usize) -> usize {
    let mut i = 0;
    while i + 1 < len && rng.gen::<f64>() < 0.55 {
        i += 1;
    }
    i
}
