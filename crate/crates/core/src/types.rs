//! Shared domain primitives: sides, tick-grid prices and exact decimal handling.
//!
//! All price arithmetic in this crate is integer. Quoted prices live on the
//! instrument tick grid ([`Ticks`]); mid-prices and price differences are kept
//! at half-tick resolution ([`HalfTicks`]) so that the arithmetic mean of two
//! grid prices is always exact. PnL is accounted in `unit * half-tick`
//! integers and only converted to currency at the reporting edge.

use std::fmt;

use thiserror::Error;

/// Book side of a resting order or depth level.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Side {
    Bid,
    Ask,
}

impl Side {
    pub fn opposite(self) -> Side {
        match self {
            Side::Bid => Side::Ask,
            Side::Ask => Side::Bid,
        }
    }
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Side::Bid => write!(f, "bid"),
            Side::Ask => write!(f, "ask"),
        }
    }
}

/// Direction of the aggressing party in a trade or market order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Aggressor {
    Buy,
    Sell,
}

impl Aggressor {
    /// The book side this aggressor consumes.
    pub fn consumes(self) -> Side {
        match self {
            Aggressor::Buy => Side::Ask,
            Aggressor::Sell => Side::Bid,
        }
    }
}

impl fmt::Display for Aggressor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Aggressor::Buy => write!(f, "buy"),
            Aggressor::Sell => write!(f, "sell"),
        }
    }
}

/// A price expressed as an integer number of ticks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Ticks(pub i64);

impl Ticks {
    /// Exact conversion to half-tick resolution.
    pub fn as_half_ticks(self) -> HalfTicks {
        HalfTicks(self.0 * 2)
    }
}

impl std::ops::Add<i64> for Ticks {
    type Output = Ticks;
    fn add(self, rhs: i64) -> Ticks {
        Ticks(self.0 + rhs)
    }
}

impl std::ops::Sub for Ticks {
    type Output = i64;
    fn sub(self, rhs: Ticks) -> i64 {
        self.0 - rhs.0
    }
}

/// A price or price difference at half-tick resolution.
///
/// The arithmetic mean of two tick-grid prices is always representable here
/// exactly, which keeps mid-price and mark-to-market accounting free of
/// floating point drift.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct HalfTicks(pub i64);

impl HalfTicks {
    /// Midpoint of two grid prices; exact.
    pub fn midpoint(a: Ticks, b: Ticks) -> HalfTicks {
        HalfTicks(a.0 + b.0)
    }

    /// Round up to the next tick-grid price.
    pub fn ceil_ticks(self) -> Ticks {
        Ticks(self.0.div_euclid(2) + (self.0.rem_euclid(2)))
    }

    /// Round down to the previous tick-grid price.
    pub fn floor_ticks(self) -> Ticks {
        Ticks(self.0.div_euclid(2))
    }
}

impl std::ops::Add for HalfTicks {
    type Output = HalfTicks;
    fn add(self, rhs: HalfTicks) -> HalfTicks {
        HalfTicks(self.0 + rhs.0)
    }
}

impl std::ops::Sub for HalfTicks {
    type Output = HalfTicks;
    fn sub(self, rhs: HalfTicks) -> HalfTicks {
        HalfTicks(self.0 - rhs.0)
    }
}

/// Volume in instrument units. Signed so that deltas and inventories share
/// one representation; individual order volumes are kept strictly positive.
pub type Units = i64;

/// Event time in integer milliseconds since the start of the day's session.
pub type TimestampMs = i64;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum DecimalError {
    #[error("invalid decimal literal: {0:?}")]
    Invalid(String),
    #[error("value {value:?} is not a multiple of the tick size {tick:?}")]
    OffGrid { value: String, tick: String },
    #[error("tick size must be positive")]
    NonPositiveTick,
}

/// A positive decimal number held exactly as `mantissa * 10^-dp`.
///
/// Used for tick sizes and for converting feed-file prices onto the tick
/// grid without any floating point rounding.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Decimal {
    pub mantissa: i64,
    pub dp: u32,
}

impl Decimal {
    pub fn parse(s: &str) -> Result<Decimal, DecimalError> {
        let s = s.trim();
        let invalid = || DecimalError::Invalid(s.to_string());
        let (sign, body) = match s.strip_prefix('-') {
            Some(rest) => (-1i64, rest),
            None => (1i64, s.strip_prefix('+').unwrap_or(s)),
        };
        if body.is_empty() {
            return Err(invalid());
        }
        let (int_part, frac_part) = match body.split_once('.') {
            Some((i, f)) => (i, f),
            None => (body, ""),
        };
        if int_part.is_empty() && frac_part.is_empty() {
            return Err(invalid());
        }
        if !int_part.chars().all(|c| c.is_ascii_digit())
            || !frac_part.chars().all(|c| c.is_ascii_digit())
        {
            return Err(invalid());
        }
        let mut mantissa: i64 = 0;
        for c in int_part.chars().chain(frac_part.chars()) {
            mantissa = mantissa
                .checked_mul(10)
                .and_then(|m| m.checked_add((c as u8 - b'0') as i64))
                .ok_or_else(invalid)?;
        }
        Ok(Decimal {
            mantissa: sign * mantissa,
            dp: frac_part.len() as u32,
        })
    }

    pub fn is_positive(&self) -> bool {
        self.mantissa > 0
    }

    pub fn to_f64(&self) -> f64 {
        self.mantissa as f64 / 10f64.powi(self.dp as i32)
    }
}

impl fmt::Display for Decimal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.dp == 0 {
            return write!(f, "{}", self.mantissa);
        }
        let sign = if self.mantissa < 0 { "-" } else { "" };
        let abs = self.mantissa.unsigned_abs();
        let scale = 10u64.pow(self.dp);
        write!(f, "{}{}.{:0width$}", sign, abs / scale, abs % scale, width = self.dp as usize)
    }
}

/// Instrument metadata: symbol, tick size and minimum lot size.
#[derive(Debug, Clone, PartialEq)]
pub struct Instrument {
    pub symbol: String,
    pub tick: Decimal,
    pub lot: Units,
}

impl Instrument {
    pub fn new(symbol: impl Into<String>, tick: Decimal, lot: Units) -> Result<Self, DecimalError> {
        if !tick.is_positive() {
            return Err(DecimalError::NonPositiveTick);
        }
        Ok(Instrument { symbol: symbol.into(), tick, lot })
    }

    /// Convert a decimal price to ticks; errors unless it sits exactly on
    /// the tick grid.
    pub fn ticks_from_decimal(&self, value: Decimal) -> Result<Ticks, DecimalError> {
        // Rescale both to a common power of ten, then divide exactly.
        let dp = value.dp.max(self.tick.dp);
        let v = value
            .mantissa
            .checked_mul(10i64.pow(dp - value.dp))
            .ok_or_else(|| DecimalError::Invalid(value.to_string()))?;
        let t = self.tick.mantissa * 10i64.pow(dp - self.tick.dp);
        if t == 0 || v % t != 0 {
            return Err(DecimalError::OffGrid {
                value: value.to_string(),
                tick: self.tick.to_string(),
            });
        }
        Ok(Ticks(v / t))
    }

    pub fn ticks_from_str(&self, s: &str) -> Result<Ticks, DecimalError> {
        self.ticks_from_decimal(Decimal::parse(s)?)
    }

    /// Exact decimal rendering of a grid price, e.g. for feed files.
    pub fn decimal_from_ticks(&self, price: Ticks) -> Decimal {
        Decimal { mantissa: price.0 * self.tick.mantissa, dp: self.tick.dp }
    }

    /// Tick size as a float, for reporting only.
    pub fn tick_value(&self) -> f64 {
        self.tick.to_f64()
    }

    /// Convert a `unit * half-tick` PnL integer to currency, for reporting.
    pub fn pnl_to_currency(&self, pnl_ht: i64) -> f64 {
        pnl_ht as f64 * (self.tick_value() / 2.0)
    }

    /// Price in currency units, for reporting only.
    pub fn price_value(&self, price: Ticks) -> f64 {
        price.0 as f64 * self.tick_value()
    }
}
