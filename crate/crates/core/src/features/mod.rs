//! State construction and value-function approximation.
//!
//! The state splits into agent variables (inventory and the active quoting
//! distances in spread-scale units) and six market variables (spread,
//! mid-price move, book imbalance, signed volume, volatility and RSI). The
//! value function approximates over one tile coding (agent-only or full
//! state) or over three independent codings blended with fixed influences
//! that sum to one; every coding is updated with the same TD error.

pub mod tiles;

use std::collections::VecDeque;
use std::io::{self, Read, Write};

use crate::lob::OrderBook;
use crate::strategy::ACTION_COUNT;
use crate::types::Units;

pub use tiles::{DimSpec, TileCoding};

/// Number of agent-state variables.
pub const AGENT_DIMS: usize = 3;
/// Number of market-state variables.
pub const MARKET_DIMS: usize = 6;
/// Full state dimensionality.
pub const FULL_DIMS: usize = AGENT_DIMS + MARKET_DIMS;

/// Agent-state and market-state feature values at one decision point.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct StateVector {
    /// Inventory normalised by the inventory bound, in [-1, 1].
    pub inventory: f64,
    /// Active ask quoting distance in spread-scale units (0 when absent).
    pub eff_theta_ask: f64,
    /// Active bid quoting distance in spread-scale units (0 when absent).
    pub eff_theta_bid: f64,
    /// Market spread in ticks.
    pub spread: f64,
    /// Mid-price move since the previous decision, in ticks.
    pub mid_move: f64,
    /// Depth imbalance over the configured levels, in [-1, 1].
    pub book_imbalance: f64,
    /// Buyer-initiated minus seller-initiated volume over the event window.
    pub signed_volume: f64,
    /// Standard deviation of mid-price changes over the window, in ticks.
    pub volatility: f64,
    /// Wilder relative strength index of the mid, in [0, 100].
    pub rsi: f64,
}

impl StateVector {
    pub fn agent_dims(&self) -> [f64; AGENT_DIMS] {
        [self.inventory, self.eff_theta_ask, self.eff_theta_bid]
    }

    pub fn market_dims(&self) -> [f64; MARKET_DIMS] {
        [
            self.spread,
            self.mid_move,
            self.book_imbalance,
            self.signed_volume,
            self.volatility,
            self.rsi,
        ]
    }

    pub fn full_dims(&self) -> [f64; FULL_DIMS] {
        [
            self.inventory,
            self.eff_theta_ask,
            self.eff_theta_bid,
            self.spread,
            self.mid_move,
            self.book_imbalance,
            self.signed_volume,
            self.volatility,
            self.rsi,
        ]
    }

    pub fn is_finite(&self) -> bool {
        self.full_dims().iter().all(|v| v.is_finite())
    }
}

/// Lookback windows for the derived market variables.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TrackerConfig {
    /// Rolling event window for signed volume and volatility.
    pub window: usize,
    /// Wilder RSI period, in decision steps.
    pub rsi_period: usize,
    /// Book levels included in the imbalance (1..=5).
    pub imbalance_levels: usize,
}

impl Default for TrackerConfig {
    fn default() -> Self {
        TrackerConfig { window: 100, rsi_period: 14, imbalance_levels: 1 }
    }
}

/// Rolling indicator state over the event stream.
///
/// Indicator outputs are zero until their lookback windows have filled.
#[derive(Debug, Clone)]
pub struct MarketTracker {
    cfg: TrackerConfig,
    signed_volume: VecDeque<i64>,
    signed_volume_sum: i64,
    mid_changes: VecDeque<f64>,
    last_mid_ht: Option<i64>,
    rsi_avg_gain: f64,
    rsi_avg_loss: f64,
    rsi_warmup: Vec<f64>,
    rsi_ready: bool,
}

impl MarketTracker {
    pub fn new(cfg: TrackerConfig) -> Self {
        assert!(cfg.window > 0 && cfg.rsi_period > 0);
        assert!((1..=5).contains(&cfg.imbalance_levels));
        MarketTracker {
            cfg,
            signed_volume: VecDeque::new(),
            signed_volume_sum: 0,
            mid_changes: VecDeque::new(),
            last_mid_ht: None,
            rsi_avg_gain: 0.0,
            rsi_avg_loss: 0.0,
            rsi_warmup: Vec::new(),
            rsi_ready: false,
        }
    }

    /// Record one market event's signed traded volume (zero for depth
    /// updates, positive for buyer-initiated trades).
    pub fn on_event_volume(&mut self, signed: i64) {
        self.signed_volume.push_back(signed);
        self.signed_volume_sum += signed;
        if self.signed_volume.len() > self.cfg.window {
            self.signed_volume_sum -= self.signed_volume.pop_front().unwrap();
        }
    }

    /// Record the mid at a decision point; derives the mid-move series.
    pub fn on_mid(&mut self, mid_ht: i64) {
        if let Some(prev) = self.last_mid_ht {
            let change_ticks = (mid_ht - prev) as f64 / 2.0;
            self.mid_changes.push_back(change_ticks);
            if self.mid_changes.len() > self.cfg.window {
                self.mid_changes.pop_front();
            }
            self.update_rsi(change_ticks);
        }
        self.last_mid_ht = Some(mid_ht);
    }

    fn update_rsi(&mut self, change: f64) {
        let period = self.cfg.rsi_period as f64;
        if !self.rsi_ready {
            self.rsi_warmup.push(change);
            if self.rsi_warmup.len() == self.cfg.rsi_period {
                self.rsi_avg_gain =
                    self.rsi_warmup.iter().map(|c| c.max(0.0)).sum::<f64>() / period;
                self.rsi_avg_loss =
                    self.rsi_warmup.iter().map(|c| (-c).max(0.0)).sum::<f64>() / period;
                self.rsi_ready = true;
                self.rsi_warmup.clear();
            }
            return;
        }
        self.rsi_avg_gain = (self.rsi_avg_gain * (period - 1.0) + change.max(0.0)) / period;
        self.rsi_avg_loss = (self.rsi_avg_loss * (period - 1.0) + (-change).max(0.0)) / period;
    }

    /// Mid move since the previous decision, in ticks; zero before the
    /// second decision.
    pub fn last_mid_move(&self) -> f64 {
        self.mid_changes.back().copied().unwrap_or(0.0)
    }

    pub fn signed_volume(&self) -> f64 {
        self.signed_volume_sum as f64
    }

    /// Population standard deviation of mid changes; zero during warm-up.
    pub fn volatility(&self) -> f64 {
        if self.mid_changes.len() < self.cfg.window {
            return 0.0;
        }
        let n = self.mid_changes.len() as f64;
        let mean = self.mid_changes.iter().sum::<f64>() / n;
        let var = self.mid_changes.iter().map(|c| (c - mean) * (c - mean)).sum::<f64>() / n;
        var.sqrt()
    }

    /// Wilder RSI; zero during warm-up, 50 in a flat market.
    pub fn rsi(&self) -> f64 {
        if !self.rsi_ready {
            return 0.0;
        }
        if self.rsi_avg_loss <= 0.0 {
            return if self.rsi_avg_gain <= 0.0 { 50.0 } else { 100.0 };
        }
        100.0 - 100.0 / (1.0 + self.rsi_avg_gain / self.rsi_avg_loss)
    }
}

/// Depth imbalance over the top `levels` of each side:
/// `(sum bid vol - sum ask vol) / (sum bid vol + sum ask vol)`.
pub fn book_imbalance(book: &OrderBook, levels: usize) -> f64 {
    let bid: Units = book.levels(crate::types::Side::Bid).iter().take(levels).map(|l| l.volume).sum();
    let ask: Units = book.levels(crate::types::Side::Ask).iter().take(levels).map(|l| l.volume).sum();
    if bid + ask == 0 {
        return 0.0;
    }
    (bid - ask) as f64 / (bid + ask) as f64
}

/// The agent-side observation needed to finish a state vector.
#[derive(Debug, Clone, Copy, Default)]
pub struct AgentObservation {
    pub inventory: Units,
    pub max_inventory: Units,
    /// `ask price - mid`, in half-ticks, when an ask order is live.
    pub ask_distance_ht: Option<i64>,
    /// `mid - bid price`, in half-ticks, when a bid order is live.
    pub bid_distance_ht: Option<i64>,
    /// Current spread-scale factor in ticks.
    pub spread_scale_ticks: i64,
}

/// Assemble the full state vector at a decision point.
pub fn compute_state(
    tracker: &MarketTracker,
    book: &OrderBook,
    agent: &AgentObservation,
    cfg: &TrackerConfig,
) -> StateVector {
    let theta_ht = (2 * agent.spread_scale_ticks.max(1)) as f64;
    StateVector {
        inventory: agent.inventory as f64 / agent.max_inventory.max(1) as f64,
        eff_theta_ask: agent.ask_distance_ht.map_or(0.0, |d| d as f64 / theta_ht),
        eff_theta_bid: agent.bid_distance_ht.map_or(0.0, |d| d as f64 / theta_ht),
        spread: book.market_spread().map_or(0.0, |s| s as f64),
        mid_move: tracker.last_mid_move(),
        book_imbalance: book_imbalance(book, cfg.imbalance_levels),
        signed_volume: tracker.signed_volume(),
        volatility: tracker.volatility(),
        rsi: tracker.rsi(),
    }
}

/// Which slice of the state a coding sees.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StateSlice {
    Agent,
    Market,
    Full,
}

impl StateSlice {
    fn tag(self) -> u8 {
        match self {
            StateSlice::Agent => 0,
            StateSlice::Market => 1,
            StateSlice::Full => 2,
        }
    }

    fn from_tag(tag: u8) -> io::Result<StateSlice> {
        match tag {
            0 => Ok(StateSlice::Agent),
            1 => Ok(StateSlice::Market),
            2 => Ok(StateSlice::Full),
            other => Err(io::Error::new(
                io::ErrorKind::InvalidData,
                format!("bad state slice tag {other}"),
            )),
        }
    }

    pub fn extract(self, s: &StateVector) -> Vec<f64> {
        match self {
            StateSlice::Agent => s.agent_dims().to_vec(),
            StateSlice::Market => s.market_dims().to_vec(),
            StateSlice::Full => s.full_dims().to_vec(),
        }
    }
}

/// State representation choice for an experiment.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StateMode {
    AgentState,
    FullState,
    Lctc,
}

/// Tiling boundaries per state variable.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StateRanges {
    pub inventory: (f64, f64),
    pub quote_distance: (f64, f64),
    pub spread: (f64, f64),
    pub mid_move: (f64, f64),
    pub book_imbalance: (f64, f64),
    pub signed_volume: (f64, f64),
    pub volatility: (f64, f64),
    pub rsi: (f64, f64),
}

impl Default for StateRanges {
    fn default() -> Self {
        StateRanges {
            inventory: (-1.0, 1.0),
            quote_distance: (-2.0, 8.0),
            spread: (0.0, 20.0),
            mid_move: (-10.0, 10.0),
            book_imbalance: (-1.0, 1.0),
            signed_volume: (-20_000.0, 20_000.0),
            volatility: (0.0, 5.0),
            rsi: (0.0, 100.0),
        }
    }
}

impl StateRanges {
    fn dims_for(&self, slice: StateSlice, tiles: u32) -> Vec<DimSpec> {
        let d = |r: (f64, f64)| DimSpec::new(r.0, r.1, tiles);
        let agent = vec![d(self.inventory), d(self.quote_distance), d(self.quote_distance)];
        let market = vec![
            d(self.spread),
            d(self.mid_move),
            d(self.book_imbalance),
            d(self.signed_volume),
            d(self.volatility),
            d(self.rsi),
        ];
        match slice {
            StateSlice::Agent => agent,
            StateSlice::Market => market,
            StateSlice::Full => agent.into_iter().chain(market).collect(),
        }
    }
}

/// Function-approximation configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureConfig {
    pub num_tilings: u32,
    pub table_size: u32,
    pub tiles_per_dim: u32,
    pub hash_seed: u64,
    /// Influences of the agent, market and full codings; must sum to one.
    pub lctc_weights: [f64; 3],
    pub ranges: StateRanges,
}

impl Default for FeatureConfig {
    fn default() -> Self {
        FeatureConfig {
            num_tilings: 32,
            table_size: 10_000_000,
            tiles_per_dim: 8,
            hash_seed: 0x5eed,
            lctc_weights: [0.6, 0.1, 0.3],
            ranges: StateRanges::default(),
        }
    }
}

/// Active tile indices per coding for one state.
pub type StateTiles = Vec<Vec<u32>>;

/// A value function over one or more tile codings blended linearly.
#[derive(Debug, Clone)]
pub struct ValueFn {
    codings: Vec<(TileCoding, f64, StateSlice)>,
}

impl ValueFn {
    /// Build the value function for a state mode. LCTC uses three codings
    /// over the agent, market and full slices; the other modes use one.
    pub fn new(mode: StateMode, cfg: &FeatureConfig) -> ValueFn {
        let coding = |slice: StateSlice, lambda: f64, seed_offset: u64| {
            (
                TileCoding::new(
                    cfg.ranges.dims_for(slice, cfg.tiles_per_dim),
                    cfg.num_tilings,
                    cfg.table_size,
                    cfg.hash_seed.wrapping_add(seed_offset),
                    ACTION_COUNT,
                ),
                lambda,
                slice,
            )
        };
        let codings = match mode {
            StateMode::AgentState => vec![coding(StateSlice::Agent, 1.0, 0)],
            StateMode::FullState => vec![coding(StateSlice::Full, 1.0, 0)],
            StateMode::Lctc => {
                let sum: f64 = cfg.lctc_weights.iter().sum();
                assert!(
                    (sum - 1.0).abs() < 1e-9,
                    "LCTC influences must sum to one, got {sum}"
                );
                vec![
                    coding(StateSlice::Agent, cfg.lctc_weights[0], 0),
                    coding(StateSlice::Market, cfg.lctc_weights[1], 1),
                    coding(StateSlice::Full, cfg.lctc_weights[2], 2),
                ]
            }
        };
        ValueFn { codings }
    }

    pub fn codings(&self) -> &[(TileCoding, f64, StateSlice)] {
        &self.codings
    }

    /// Sum of coding influences (one by construction).
    pub fn influence_sum(&self) -> f64 {
        self.codings.iter().map(|(_, l, _)| l).sum()
    }

    /// Active tiles per coding for a state.
    pub fn code(&self, state: &StateVector) -> StateTiles {
        self.codings
            .iter()
            .map(|(tc, _, slice)| tc.active_tiles(&slice.extract(state)))
            .collect()
    }

    /// Influence-weighted value of `(state, action)`.
    pub fn value(&self, tiles: &StateTiles, action: usize) -> f64 {
        self.codings
            .iter()
            .zip(tiles)
            .map(|((tc, lambda, _), active)| lambda * tc.value(active, action))
            .sum()
    }

    /// Values for all actions at one state.
    pub fn action_values(&self, tiles: &StateTiles) -> [f64; ACTION_COUNT] {
        let mut out = [0.0; ACTION_COUNT];
        for (action, slot) in out.iter_mut().enumerate() {
            *slot = self.value(tiles, action);
        }
        out
    }

    /// Apply one TD step to every coding with the shared error `delta`.
    pub fn update(
        &mut self,
        tiles: &StateTiles,
        action: usize,
        delta: f64,
        alpha: f64,
        decay: f64,
        cut_after: bool,
    ) {
        for ((tc, _, _), active) in self.codings.iter_mut().zip(tiles) {
            tc.update(active, action, delta, alpha, decay, cut_after);
        }
    }

    pub fn reset_traces(&mut self) {
        for (tc, _, _) in &mut self.codings {
            tc.reset_traces();
        }
    }

    /// Initialise every weight table so that `value(s, a) == biases[a]` for
    /// all states: a tiny monotone bias breaks the all-zero tie symmetry at
    /// the start of training and is swamped by the first real rewards.
    /// Allocates the dense tables, so intended for desk-scale table sizes.
    pub fn init_action_bias(&mut self, biases: &[f64]) {
        let influence: f64 = self.influence_sum();
        for (tc, _, _) in &mut self.codings {
            let m = tc.num_tilings() as f64;
            for (action, bias) in biases.iter().enumerate() {
                let w = bias / (m * influence);
                let table = vec![w; tc.table_size() as usize].into_boxed_slice();
                tc.set_raw_table(action, Some(table));
            }
        }
    }

    /// FNV-1a digest over the serialized weights; used to verify that
    /// evaluation never mutates a value function.
    pub fn checksum(&self) -> u64 {
        let mut bytes = Vec::new();
        self.write_to(&mut bytes).expect("in-memory serialization cannot fail");
        let mut h: u64 = 0xcbf2_9ce4_8422_2325;
        for b in bytes {
            h ^= b as u64;
            h = h.wrapping_mul(0x0000_0100_0000_01b3);
        }
        h
    }

    /// Serialize to the flat binary checkpoint layout: a header with the
    /// hash seed, tiling count, dimensions and table size per coding,
    /// followed by the dense per-action weight tables.
    pub fn write_to(&self, w: &mut impl Write) -> io::Result<()> {
        w.write_all(b"MSVF")?;
        w.write_all(&1u32.to_le_bytes())?;
        w.write_all(&(self.codings.len() as u32).to_le_bytes())?;
        for (tc, lambda, slice) in &self.codings {
            w.write_all(&[slice.tag()])?;
            w.write_all(&lambda.to_le_bytes())?;
            w.write_all(&tc.hash_seed().to_le_bytes())?;
            w.write_all(&tc.num_tilings().to_le_bytes())?;
            w.write_all(&tc.table_size().to_le_bytes())?;
            w.write_all(&(tc.dims().len() as u32).to_le_bytes())?;
            for d in tc.dims() {
                w.write_all(&d.low.to_le_bytes())?;
                w.write_all(&d.high.to_le_bytes())?;
                w.write_all(&d.tiles.to_le_bytes())?;
            }
            w.write_all(&(tc.num_actions() as u32).to_le_bytes())?;
            for action in 0..tc.num_actions() {
                match tc.raw_table(action) {
                    Some(table) => {
                        w.write_all(&[1])?;
                        for v in table {
                            w.write_all(&v.to_le_bytes())?;
                        }
                    }
                    None => w.write_all(&[0])?,
                }
            }
        }
        Ok(())
    }

    pub fn read_from(r: &mut impl Read) -> io::Result<ValueFn> {
        let mut magic = [0u8; 4];
        r.read_exact(&mut magic)?;
        if &magic != b"MSVF" {
            return Err(io::Error::new(io::ErrorKind::InvalidData, "bad checkpoint magic"));
        }
        let version = read_u32(r)?;
        if version != 1 {
            return Err(io::Error::new(
                io::ErrorKind::InvalidData,
                format!("unsupported checkpoint version {version}"),
            ));
        }
        let n_codings = read_u32(r)? as usize;
        let mut codings = Vec::with_capacity(n_codings);
        for _ in 0..n_codings {
            let slice = StateSlice::from_tag(read_u8(r)?)?;
            let lambda = read_f64(r)?;
            let hash_seed = read_u64(r)?;
            let num_tilings = read_u32(r)?;
            let table_size = read_u32(r)?;
            let n_dims = read_u32(r)? as usize;
            let mut dims = Vec::with_capacity(n_dims);
            for _ in 0..n_dims {
                let low = read_f64(r)?;
                let high = read_f64(r)?;
                let tiles = read_u32(r)?;
                dims.push(DimSpec::new(low, high, tiles));
            }
            let n_actions = read_u32(r)? as usize;
            let mut tc = TileCoding::new(dims, num_tilings, table_size, hash_seed, n_actions);
            for action in 0..n_actions {
                if read_u8(r)? == 1 {
                    let mut table = vec![0.0f64; table_size as usize].into_boxed_slice();
                    for v in table.iter_mut() {
                        *v = read_f64(r)?;
                    }
                    tc.set_raw_table(action, Some(table));
                }
            }
            codings.push((tc, lambda, slice));
        }
        Ok(ValueFn { codings })
    }
}

fn read_u8(r: &mut impl Read) -> io::Result<u8> {
    let mut b = [0u8; 1];
    r.read_exact(&mut b)?;
    Ok(b[0])
}

fn read_u32(r: &mut impl Read) -> io::Result<u32> {
    let mut b = [0u8; 4];
    r.read_exact(&mut b)?;
    Ok(u32::from_le_bytes(b))
}

fn read_u64(r: &mut impl Read) -> io::Result<u64> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b)?;
    Ok(u64::from_le_bytes(b))
}

fn read_f64(r: &mut impl Read) -> io::Result<f64> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b)?;
    Ok(f64::from_le_bytes(b))
}
