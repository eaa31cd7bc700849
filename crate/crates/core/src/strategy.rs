//! Market-making action space, quote derivation, order sizing and
//! inventory constraints.
//!
//! Ten actions: ids 0-8 quote a (bid, ask) pair at offsets of
//! `theta * spread_scale` from the reference price; id 9 clears inventory
//! with a market order sized `-alpha * inventory`.

use thiserror::Error;

use crate::types::{HalfTicks, Ticks, Units};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum StrategyError {
    #[error("action id {0} out of range 0..=9")]
    BadActionId(u8),
    #[error("inventory is zero; nothing to clear")]
    ZeroInventory,
}

/// `(theta_ask, theta_bid)` pairs for action ids 0 through 8.
pub const QUOTE_ACTIONS: [(u8, u8); 9] =
    [(1, 1), (2, 2), (3, 3), (4, 4), (5, 5), (1, 3), (3, 1), (2, 5), (5, 2)];

/// Total number of actions.
pub const ACTION_COUNT: usize = 10;

/// Id of the inventory-clearing market-order action.
pub const CLEAR_ACTION: Action = Action(9);

/// One of the ten strategy actions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Action(u8);

impl Action {
    pub fn new(id: u8) -> Result<Action, StrategyError> {
        if (id as usize) < ACTION_COUNT {
            Ok(Action(id))
        } else {
            Err(StrategyError::BadActionId(id))
        }
    }

    pub fn id(self) -> u8 {
        self.0
    }

    pub fn index(self) -> usize {
        self.0 as usize
    }

    /// Iterate over all ten actions in id order.
    pub fn all() -> impl Iterator<Item = Action> {
        (0..ACTION_COUNT as u8).map(Action)
    }

    pub fn is_clear(self) -> bool {
        self.0 == 9
    }

    /// Quote distance multipliers, `None` for the clearing action.
    pub fn thetas(self) -> Option<(u8, u8)> {
        QUOTE_ACTIONS.get(self.0 as usize).copied()
    }
}

/// Bounds and sizes governing the agent's position.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InventoryPolicy {
    pub min_inventory: Units,
    pub max_inventory: Units,
    /// Resting order size per side.
    pub order_size: Units,
    /// Fraction of inventory cleared by the market-order action, in (0, 1].
    pub clear_fraction: f64,
    pub lot: Units,
}

impl Default for InventoryPolicy {
    fn default() -> Self {
        InventoryPolicy {
            min_inventory: -10_000,
            max_inventory: 10_000,
            order_size: 1_000,
            clear_fraction: 1.0,
            lot: 100,
        }
    }
}

/// The orders one action resolves to once constraints are applied.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct OrderPlan {
    pub ask: Option<(Ticks, Units)>,
    pub bid: Option<(Ticks, Units)>,
    /// Market order volume, positive to buy, negative to sell.
    pub market: Option<Units>,
}

/// Quote prices for a quoting action.
///
/// The ask offset rounds up to the grid and the bid offset rounds down, so
/// rounding never tightens the quoted spread; both offsets are at least one
/// spread-scale unit away from the reference price.
pub fn quote_prices(action: Action, reference: HalfTicks, spread_scale: Ticks) -> (Ticks, Ticks) {
    let (theta_ask, theta_bid) = action
        .thetas()
        .expect("quote_prices requires a quoting action");
    debug_assert!(spread_scale.0 >= 1, "spread scale must be at least one tick");
    let ask = HalfTicks(reference.0 + 2 * theta_ask as i64 * spread_scale.0).ceil_ticks();
    let bid = HalfTicks(reference.0 - 2 * theta_bid as i64 * spread_scale.0).floor_ticks();
    (ask, bid)
}

/// Rolling moving average of the market half-spread, rounded to the nearest
/// tick and floored at one tick.
///
/// Half-spreads are measured in half-ticks, so an integer market spread in
/// ticks is pushed unchanged.
#[derive(Debug, Clone)]
pub struct SpreadScale {
    window: usize,
    history: std::collections::VecDeque<f64>,
    sum: f64,
}

impl SpreadScale {
    pub fn new(window: usize) -> Self {
        assert!(window > 0, "window must be positive");
        SpreadScale { window, history: std::collections::VecDeque::new(), sum: 0.0 }
    }

    /// Record the current market spread (in ticks; equals the half-spread in
    /// half-ticks).
    pub fn push_spread_ticks(&mut self, spread: i64) {
        self.push_half_spread(spread as f64);
    }

    pub fn push_half_spread(&mut self, half_spread_ht: f64) {
        self.history.push_back(half_spread_ht);
        self.sum += half_spread_ht;
        if self.history.len() > self.window {
            self.sum -= self.history.pop_front().unwrap();
        }
    }

    pub fn is_empty(&self) -> bool {
        self.history.is_empty()
    }

    /// Current scale factor in ticks.
    pub fn theta(&self) -> Ticks {
        spread_scale(self.history.iter().copied(), self.history.len())
    }
}

/// Moving average of half-spreads (half-tick units) over the window,
/// rounded to the nearest positive tick multiple.
pub fn spread_scale(half_spreads_ht: impl IntoIterator<Item = f64>, window: usize) -> Ticks {
    let mut sum = 0.0;
    let mut n = 0usize;
    for h in half_spreads_ht {
        sum += h;
        n += 1;
    }
    let n = n.min(window.max(1));
    if n == 0 {
        return Ticks(1);
    }
    let mean_ht = sum / n as f64;
    Ticks(((mean_ht / 2.0).round() as i64).max(1))
}

/// Market order size that moves inventory towards neutral:
/// `-clear_fraction * inventory`, rounded away from zero to a non-zero lot
/// multiple. Positive result means buy.
pub fn clear_order_size(
    inventory: Units,
    clear_fraction: f64,
    lot: Units,
) -> Result<Units, StrategyError> {
    if inventory == 0 {
        return Err(StrategyError::ZeroInventory);
    }
    debug_assert!(clear_fraction > 0.0 && clear_fraction <= 1.0);
    debug_assert!(lot > 0);
    let raw = -clear_fraction * inventory as f64;
    let lots = (raw.abs() / lot as f64).ceil().max(1.0) as Units;
    Ok(lots * lot * raw.signum() as Units)
}

/// Apply inventory constraints to an action, yielding the effective orders.
///
/// At or beyond the upper bound the bid is suppressed; at or beyond the
/// lower bound the ask is suppressed. The clearing action always reduces
/// `|inventory|` and degenerates to a no-op at zero inventory.
pub fn constrain(
    action: Action,
    reference: HalfTicks,
    spread_scale: Ticks,
    inventory: Units,
    policy: &InventoryPolicy,
) -> OrderPlan {
    let mut plan = OrderPlan::default();
    if action.is_clear() {
        if let Ok(size) = clear_order_size(inventory, policy.clear_fraction, policy.lot) {
            plan.market = Some(size);
        }
        return plan;
    }
    let (ask, bid) = quote_prices(action, reference, spread_scale);
    if inventory > policy.min_inventory {
        plan.ask = Some((ask, policy.order_size));
    }
    if inventory < policy.max_inventory {
        plan.bid = Some((bid, policy.order_size));
    }
    plan
}
