//! Per-step reward computation: execution PnL relative to the mid,
//! inventory mark-to-market, and the dampened variants.
//!
//! All accounting is integer, in `unit * half-tick` values, and converted
//! to a float only where the reward feeds the learner. The symmetric
//! variant is computed as `psi + (1 - eta) * y_dm` so that `eta = 1`
//! reduces to the pure execution term bit-exactly and `eta = 0` reduces to
//! plain PnL bit-exactly.

use crate::types::{HalfTicks, Side, Ticks, Units};

/// Reward flavour selection.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RewardVariant {
    /// Plain incremental PnL.
    Pnl,
    /// Inventory term scaled down by `1 - eta` in both directions.
    SymmetricDamped,
    /// Speculative gains damped, losses kept intact.
    AsymmetricDamped,
}

/// Reward function specification.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RewardSpec {
    pub variant: RewardVariant,
    /// Damping factor; ignored by the plain PnL variant.
    pub eta: f64,
}

impl Default for RewardSpec {
    fn default() -> Self {
        RewardSpec { variant: RewardVariant::AsymmetricDamped, eta: 0.6 }
    }
}

/// Volume matched against the agent's orders within one step, with exact
/// notionals so multi-price executions (market orders walking the book)
/// stay integer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct StepFills {
    /// Units sold (executions of the agent's ask-side volume).
    pub matched_ask: Units,
    /// Sum of `volume * price` over sells, in unit * half-ticks.
    pub notional_ask_ht: i64,
    /// Units bought.
    pub matched_bid: Units,
    /// Sum of `volume * price` over buys, in unit * half-ticks.
    pub notional_bid_ht: i64,
}

impl StepFills {
    /// Record one execution: `side` is the agent's order side, so a bid
    /// fill means the agent bought.
    pub fn record(&mut self, side: Side, price: Ticks, volume: Units) {
        let notional = volume * price.as_half_ticks().0;
        match side {
            Side::Ask => {
                self.matched_ask += volume;
                self.notional_ask_ht += notional;
            }
            Side::Bid => {
                self.matched_bid += volume;
                self.notional_bid_ht += notional;
            }
        }
    }

    /// Single-price convenience constructor for the common quoting case.
    pub fn at_prices(
        matched_ask: Units,
        ask_price: Ticks,
        matched_bid: Units,
        bid_price: Ticks,
    ) -> StepFills {
        let mut fills = StepFills::default();
        if matched_ask > 0 {
            fills.record(Side::Ask, ask_price, matched_ask);
        }
        if matched_bid > 0 {
            fills.record(Side::Bid, bid_price, matched_bid);
        }
        fills
    }

    pub fn is_empty(&self) -> bool {
        self.matched_ask == 0 && self.matched_bid == 0
    }

    /// Volume-weighted average sell price in half-ticks (reporting only).
    pub fn vwap_ask_ht(&self) -> Option<f64> {
        (self.matched_ask > 0).then(|| self.notional_ask_ht as f64 / self.matched_ask as f64)
    }

    pub fn vwap_bid_ht(&self) -> Option<f64> {
        (self.matched_bid > 0).then(|| self.notional_bid_ht as f64 / self.matched_bid as f64)
    }
}

/// Money gained through executions relative to the mid, per side, in
/// unit * half-ticks: `psi_ask = matched_ask * (p_ask - m)` and
/// `psi_bid = matched_bid * (m - p_bid)`, generalised to multi-price fills
/// through the exact notionals.
pub fn psi(fills: &StepFills, mid: HalfTicks) -> (i64, i64) {
    let psi_ask = fills.notional_ask_ht - fills.matched_ask * mid.0;
    let psi_bid = fills.matched_bid * mid.0 - fills.notional_bid_ht;
    (psi_ask, psi_bid)
}

/// Incremental PnL: execution gains plus the inventory mark-to-market term
/// `inventory * mid_move`, all in unit * half-ticks.
pub fn incremental_pnl(psi_ask: i64, psi_bid: i64, inventory: Units, mid_move_ht: i64) -> i64 {
    psi_ask + psi_bid + inventory * mid_move_ht
}

/// Reward for one step given the execution term and the inventory term
/// (both in the same units; callers may pass unit * half-ticks or currency).
pub fn reward(spec: &RewardSpec, psi_total: f64, inventory_pnl: f64) -> f64 {
    match spec.variant {
        RewardVariant::Pnl => psi_total + inventory_pnl,
        RewardVariant::SymmetricDamped => psi_total + (1.0 - spec.eta) * inventory_pnl,
        RewardVariant::AsymmetricDamped => {
            (psi_total + inventory_pnl) - (spec.eta * inventory_pnl).max(0.0)
        }
    }
}
