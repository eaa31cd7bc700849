//! Market event ingestion, synthetic event-stream generation and replay.
//!
//! # Event file format
//!
//! One event per line, comma separated. Header lines carry instrument
//! metadata:
//!
//! ```text
//! #tick=0.25
//! #lot=100
//! #symbol=SYN
//! 0,D,B,100.00,35,99.75,3,99.50,11
//! 0,D,A,100.50,13,101.00,12
//! 17,T,S,100.00,5
//! ```
//!
//! Depth lines (`D`) are full per-side snapshots of up to five
//! `price,volume` pairs from the touch outwards; side is `B` (bid) or `A`
//! (ask). Trade lines (`T`) carry the aggressor side (`B` buy / `S` sell),
//! price and volume. Timestamps are integer milliseconds and must be
//! non-decreasing. A day must open with depth snapshots for both sides
//! before any trade.

pub mod synth;

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use thiserror::Error;

use crate::lob::{LobError, OrderBook, PriceLevel, DEFAULT_DEPTH_LIMIT};
use crate::types::{Aggressor, Decimal, Instrument, Side, Ticks, TimestampMs, Units};

#[derive(Debug, Error)]
pub enum FeedError {
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("timestamps decrease at line {line}: {prev} -> {next}")]
    Ordering { line: usize, prev: TimestampMs, next: TimestampMs },
    #[error("io error reading {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("invalid synthetic flow parameters: {0}")]
    InvalidParams(String),
}

impl FeedError {
    fn parse(line: usize, msg: impl Into<String>) -> FeedError {
        FeedError::Parse { line, msg: msg.into() }
    }
}

/// Payload of a single market event.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum EventKind {
    /// Full snapshot of one book side, touch first.
    DepthUpdate { side: Side, levels: Vec<PriceLevel> },
    /// A public transaction.
    Trade { aggressor: Aggressor, price: Ticks, volume: Units },
}

/// A timestamped depth update or public trade.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MarketEvent {
    pub timestamp: TimestampMs,
    pub kind: EventKind,
}

/// One session of events for one instrument; the episode unit.
#[derive(Debug, Clone, PartialEq)]
pub struct TradingDay {
    pub date: String,
    pub instrument: Instrument,
    pub events: Vec<MarketEvent>,
}

impl TradingDay {
    /// Deliver every event in timestamp order, exactly once.
    pub fn replay<E>(
        &self,
        mut observer: impl FnMut(&MarketEvent) -> Result<(), E>,
    ) -> Result<(), E> {
        for event in &self.events {
            observer(event)?;
        }
        Ok(())
    }
}

/// Parse a trading day from the documented CSV format.
pub fn load_day(path: impl AsRef<Path>) -> Result<TradingDay, FeedError> {
    let path = path.as_ref();
    let text = fs::read_to_string(path)
        .map_err(|source| FeedError::Io { path: path.display().to_string(), source })?;
    let date = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "unknown".to_string());
    parse_day(&text, date)
}

/// Parse the event CSV text; `date` labels the resulting day.
pub fn parse_day(text: &str, date: String) -> Result<TradingDay, FeedError> {
    let mut tick: Option<Decimal> = None;
    let mut lot: Option<Units> = None;
    let mut symbol: Option<String> = None;
    let mut events: Vec<MarketEvent> = Vec::new();
    let mut instrument: Option<Instrument> = None;
    let mut last_ts: Option<TimestampMs> = None;
    let mut sides_seen = (false, false);

    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix('#') {
            for token in rest.split_whitespace() {
                let (key, value) = token
                    .split_once('=')
                    .ok_or_else(|| FeedError::parse(line_no, format!("bad header token {token:?}")))?;
                match key {
                    "tick" => {
                        tick = Some(Decimal::parse(value).map_err(|e| {
                            FeedError::parse(line_no, format!("bad tick: {e}"))
                        })?);
                    }
                    "lot" => {
                        lot = Some(value.parse::<Units>().map_err(|_| {
                            FeedError::parse(line_no, format!("bad lot {value:?}"))
                        })?);
                    }
                    "symbol" => symbol = Some(value.to_string()),
                    _ => return Err(FeedError::parse(line_no, format!("unknown header key {key:?}"))),
                }
            }
            continue;
        }

        let inst = match &instrument {
            Some(i) => i,
            None => {
                let tick = tick.ok_or_else(|| FeedError::parse(line_no, "missing #tick header"))?;
                let lot = lot.ok_or_else(|| FeedError::parse(line_no, "missing #lot header"))?;
                let symbol = symbol
                    .clone()
                    .ok_or_else(|| FeedError::parse(line_no, "missing #symbol header"))?;
                if lot <= 0 {
                    return Err(FeedError::parse(line_no, "lot must be positive"));
                }
                instrument = Some(Instrument::new(symbol, tick, lot).map_err(|e| {
                    FeedError::parse(line_no, format!("bad instrument: {e}"))
                })?);
                instrument.as_ref().unwrap()
            }
        };

        let mut fields = line.split(',');
        let ts: TimestampMs = fields
            .next()
            .and_then(|s| s.trim().parse().ok())
            .ok_or_else(|| FeedError::parse(line_no, "bad timestamp"))?;
        if let Some(prev) = last_ts {
            if ts < prev {
                return Err(FeedError::Ordering { line: line_no, prev, next: ts });
            }
        }
        last_ts = Some(ts);

        let kind_tag = fields.next().map(str::trim).unwrap_or("");
        let kind = match kind_tag {
            "D" => {
                let side = parse_book_side(fields.next(), line_no)?;
                let rest: Vec<&str> = fields.map(str::trim).collect();
                if rest.is_empty() || rest.len() % 2 != 0 {
                    return Err(FeedError::parse(line_no, "depth line needs price,volume pairs"));
                }
                if rest.len() / 2 > DEFAULT_DEPTH_LIMIT {
                    return Err(FeedError::parse(line_no, "more than 5 depth levels"));
                }
                let mut levels = Vec::with_capacity(rest.len() / 2);
                for pair in rest.chunks(2) {
                    let price = parse_price(inst, pair[0], line_no)?;
                    let volume: Units = pair[1].parse().map_err(|_| {
                        FeedError::parse(line_no, format!("bad volume {:?}", pair[1]))
                    })?;
                    if volume <= 0 {
                        return Err(FeedError::parse(line_no, "depth volume must be positive"));
                    }
                    levels.push(PriceLevel::new(price, volume));
                }
                match side {
                    Side::Bid => sides_seen.0 = true,
                    Side::Ask => sides_seen.1 = true,
                }
                EventKind::DepthUpdate { side, levels }
            }
            "T" => {
                if !(sides_seen.0 && sides_seen.1) {
                    return Err(FeedError::parse(
                        line_no,
                        "trade before the initial depth snapshot of both sides",
                    ));
                }
                let aggressor = parse_aggressor(fields.next(), line_no)?;
                let price = parse_price(
                    inst,
                    fields.next().ok_or_else(|| FeedError::parse(line_no, "missing price"))?,
                    line_no,
                )?;
                let volume: Units = fields
                    .next()
                    .and_then(|s| s.trim().parse().ok())
                    .ok_or_else(|| FeedError::parse(line_no, "bad trade volume"))?;
                if volume <= 0 {
                    return Err(FeedError::parse(line_no, "trade volume must be positive"));
                }
                EventKind::Trade { aggressor, price, volume }
            }
            other => return Err(FeedError::parse(line_no, format!("unknown event kind {other:?}"))),
        };
        events.push(MarketEvent { timestamp: ts, kind });
    }

    let instrument = instrument
        .ok_or_else(|| FeedError::parse(0, "empty file (missing header and initial snapshot)"))?;
    if events.is_empty() {
        return Err(FeedError::parse(0, "no events (missing initial snapshot)"));
    }
    if !(sides_seen.0 && sides_seen.1) {
        return Err(FeedError::parse(0, "missing initial snapshot for one side"));
    }
    Ok(TradingDay { date, instrument, events })
}

fn parse_price(inst: &Instrument, s: &str, line: usize) -> Result<Ticks, FeedError> {
    inst.ticks_from_str(s.trim()).map_err(|e| FeedError::parse(line, format!("bad price: {e}")))
}

fn parse_book_side(field: Option<&str>, line: usize) -> Result<Side, FeedError> {
    match field.map(str::trim) {
        Some("B") => Ok(Side::Bid),
        Some("A") => Ok(Side::Ask),
        other => Err(FeedError::parse(line, format!("bad depth side {other:?}"))),
    }
}

fn parse_aggressor(field: Option<&str>, line: usize) -> Result<Aggressor, FeedError> {
    match field.map(str::trim) {
        Some("B") => Ok(Aggressor::Buy),
        Some("S") => Ok(Aggressor::Sell),
        other => Err(FeedError::parse(line, format!("bad trade side {other:?}"))),
    }
}

/// Render a day back to the CSV format, byte-stable for identical inputs.
pub fn day_to_csv(day: &TradingDay) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "#tick={}", day.instrument.tick);
    let _ = writeln!(out, "#lot={}", day.instrument.lot);
    let _ = writeln!(out, "#symbol={}", day.instrument.symbol);
    for event in &day.events {
        match &event.kind {
            EventKind::DepthUpdate { side, levels } => {
                let tag = match side {
                    Side::Bid => 'B',
                    Side::Ask => 'A',
                };
                let _ = write!(out, "{},D,{}", event.timestamp, tag);
                for level in levels {
                    let _ = write!(
                        out,
                        ",{},{}",
                        day.instrument.decimal_from_ticks(level.price),
                        level.volume
                    );
                }
                out.push('\n');
            }
            EventKind::Trade { aggressor, price, volume } => {
                let tag = match aggressor {
                    Aggressor::Buy => 'B',
                    Aggressor::Sell => 'S',
                };
                let _ = writeln!(
                    out,
                    "{},T,{},{},{}",
                    event.timestamp,
                    tag,
                    day.instrument.decimal_from_ticks(*price),
                    volume
                );
            }
        }
    }
    out
}

/// Write a day to disk in the CSV format.
pub fn save_day(day: &TradingDay, path: impl AsRef<Path>) -> Result<(), FeedError> {
    let path = path.as_ref();
    fs::write(path, day_to_csv(day))
        .map_err(|source| FeedError::Io { path: path.display().to_string(), source })
}

/// Replay a day through a fresh book, verifying it never crosses.
///
/// Returns the final book state. Trades are not applied to depth: the
/// snapshots are authoritative and already reflect executed volume.
pub fn replay_into_book(day: &TradingDay) -> Result<OrderBook, LobError> {
    let mut book = OrderBook::default();
    day.replay(|event| {
        if let EventKind::DepthUpdate { side, levels } = &event.kind {
            book.apply_depth_snapshot(*side, levels)?;
        }
        Ok(())
    })?;
    Ok(book)
}

#[cfg(test)]
mod tests {
    use super::*;

    const SAMPLE: &str = "\
#tick=0.25
#lot=100
#symbol=SYN
0,D,B,100.00,35,99.75,3,99.50,11
0,D,A,100.50,13,101.00,12
17,T,S,100.00,5
";

    #[test]
    fn parses_well_formed_day() {
        let day = parse_day(SAMPLE, "day0".into()).unwrap();
        assert_eq!(day.events.len(), 3);
        assert_eq!(day.instrument.symbol, "SYN");
        assert_eq!(day.instrument.lot, 100);
        assert_eq!(
            day.events[2].kind,
            EventKind::Trade { aggressor: Aggressor::Sell, price: Ticks(400), volume: 5 }
        );
    }

    #[test]
    fn rejects_decreasing_timestamps() {
        let text = SAMPLE.replace("17,T,S", "17,T,S").to_string()
            + "5,T,B,100.50,1\n";
        let err = parse_day(&text, "d".into()).unwrap_err();
        assert!(matches!(err, FeedError::Ordering { prev: 17, next: 5, .. }));
    }

    #[test]
    fn rejects_empty_and_snapshotless_files() {
        assert!(matches!(parse_day("", "d".into()), Err(FeedError::Parse { .. })));
        let headers_only = "#tick=0.25\n#lot=100\n#symbol=SYN\n";
        assert!(matches!(parse_day(headers_only, "d".into()), Err(FeedError::Parse { .. })));
        // A trade cannot precede the two-sided snapshot.
        let trade_first = "#tick=0.25\n#lot=100\n#symbol=SYN\n0,T,B,100.00,5\n";
        assert!(matches!(parse_day(trade_first, "d".into()), Err(FeedError::Parse { .. })));
    }

    #[test]
    fn replay_delivers_in_order() {
        let day = parse_day(SAMPLE, "d".into()).unwrap();
        let mut seen = Vec::new();
        day.replay(|e| {
            seen.push(e.timestamp);
            Ok::<(), std::convert::Infallible>(())
        })
        .unwrap();
        assert_eq!(seen, vec![0, 0, 17]);

        let mut second = Vec::new();
        day.replay(|e| {
            second.push(e.timestamp);
            Ok::<(), std::convert::Infallible>(())
        })
        .unwrap();
        assert_eq!(seen, second);
    }

    #[test]
    fn replay_minimal_day() {
        let text = "#tick=0.25\n#lot=100\n#symbol=SYN\n0,D,B,100.00,1\n0,D,A,100.25,1\n";
        let day = parse_day(text, "d".into()).unwrap();
        let mut count = 0;
        day.replay(|_| {
            count += 1;
            Ok::<(), std::convert::Infallible>(())
        })
        .unwrap();
        assert_eq!(count, 2);
    }

    #[test]
    fn csv_roundtrip_is_stable() {
        let day = parse_day(SAMPLE, "day0".into()).unwrap();
        let rendered = day_to_csv(&day);
        let reparsed = parse_day(&rendered, "day0".into()).unwrap();
        assert_eq!(day, reparsed);
        assert_eq!(rendered, day_to_csv(&reparsed));
    }

    #[test]
    fn load_day_reports_io_error() {
        assert!(matches!(load_day("/nonexistent/nope.csv"), Err(FeedError::Io { .. })));
    }
}
