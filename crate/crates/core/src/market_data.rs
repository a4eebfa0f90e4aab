//! Swap-event logs and CEX minute bars: loading, validation, canonical
//! serialization and per-minute alignment.
//!
//! Swap CSV columns, in order:
//!
//! ```text
//! timestamp,block_number,tx_index,log_index,amount_x_in,amount_x_out,
//! amount_y_in,amount_y_out,reserve_x_before,reserve_y_before,gas_fee
//! ```
//!
//! optionally followed by `l1_fee,l2_fee`. CEX bars use
//! `open_time,open,high,low,close,volume`. The JSONL variants carry one object
//! per line with the same field names.

use std::fs::File;
use std::io::{self, BufRead, BufReader, Read, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::amm::{AmmError, PoolState, Side};

pub const SWAP_COLUMNS: [&str; 11] = [
    "timestamp",
    "block_number",
    "tx_index",
    "log_index",
    "amount_x_in",
    "amount_x_out",
    "amount_y_in",
    "amount_y_out",
    "reserve_x_before",
    "reserve_y_before",
    "gas_fee",
];

pub const SPLIT_FEE_COLUMNS: [&str; 2] = ["l1_fee", "l2_fee"];

pub const BAR_COLUMNS: [&str; 6] = ["open_time", "open", "high", "low", "close", "volume"];

#[derive(Debug, Error)]
pub enum DataError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    #[error("header mismatch: expected `{expected}`, found `{found}`")]
    Header { expected: String, found: String },
    #[error("row {row}: {message}")]
    Parse { row: usize, message: String },
    #[error("row {row}: {message}")]
    Schema { row: usize, message: String },
    #[error("row {row}: duplicate event at block {block}, tx {tx}, log {log}")]
    DuplicateEvent {
        row: usize,
        block: u64,
        tx: u32,
        log: u32,
    },
    #[error("row {row}: duplicate bar at open_time {open_time}")]
    DuplicateBar { row: usize, open_time: i64 },
    #[error("row {row}: open_time {open_time} is not aligned to a minute")]
    UnalignedBar { row: usize, open_time: i64 },
    #[error("no {0} supplied")]
    Empty(&'static str),
    #[error("swap minutes [{swaps_from}, {swaps_to}] and bar minutes [{bars_from}, {bars_to}] do not overlap")]
    EmptyOverlap {
        swaps_from: i64,
        swaps_to: i64,
        bars_from: i64,
        bars_to: i64,
    },
    #[error(transparent)]
    Amm(#[from] AmmError),
}

impl DataError {
    fn io(path: &Path, source: io::Error) -> Self {
        DataError::Io {
            path: path.to_path_buf(),
            source,
        }
    }
}

/// Input file layout.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Jsonl,
}

impl Format {
    /// `.jsonl` / `.ndjson` select JSONL, anything else CSV.
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some("jsonl") | Some("ndjson") => Format::Jsonl,
            _ => Format::Csv,
        }
    }
}

/// Which file-side token is the quote (price numéraire).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum QuoteToken {
    #[default]
    X,
    Y,
}

/// One swap with the pool balances it executed against.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SwapEvent {
    pub timestamp: i64,
    pub block_number: u64,
    pub tx_index: u32,
    pub log_index: u32,
    pub amount_x_in: f64,
    pub amount_x_out: f64,
    pub amount_y_in: f64,
    pub amount_y_out: f64,
    pub reserve_x_before: f64,
    pub reserve_y_before: f64,
    /// Observed gas charge in quote-token units.
    pub gas_fee: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub l1_fee: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub l2_fee: Option<f64>,
}

impl SwapEvent {
    /// Ordering key inside the chain.
    pub fn key(&self) -> (u64, u32, u32) {
        (self.block_number, self.tx_index, self.log_index)
    }

    pub fn minute(&self) -> i64 {
        floor_minute(self.timestamp)
    }

    pub fn side(&self) -> Side {
        if self.amount_y_in > 0.0 {
            Side::SellY
        } else {
            Side::SellX
        }
    }

    pub fn amount_in(&self) -> f64 {
        match self.side() {
            Side::SellY => self.amount_y_in,
            Side::SellX => self.amount_x_in,
        }
    }

    pub fn amount_out(&self) -> f64 {
        match self.side() {
            Side::SellY => self.amount_x_out,
            Side::SellX => self.amount_y_out,
        }
    }

    /// Quote-token value traded: the X leg of the swap.
    pub fn quote_volume(&self) -> f64 {
        self.amount_x_in + self.amount_x_out
    }

    pub fn reserves_after(&self) -> (f64, f64) {
        (
            self.reserve_x_before + self.amount_x_in - self.amount_x_out,
            self.reserve_y_before + self.amount_y_in - self.amount_y_out,
        )
    }

    pub fn pool_before(&self, fee_bps: f64) -> Result<PoolState<f64>, AmmError> {
        PoolState::new(self.reserve_x_before, self.reserve_y_before, fee_bps)
    }

    /// Exchanges the X and Y columns, for files whose quote token is Y.
    pub fn flipped(&self) -> Self {
        Self {
            amount_x_in: self.amount_y_in,
            amount_x_out: self.amount_y_out,
            amount_y_in: self.amount_x_in,
            amount_y_out: self.amount_x_out,
            reserve_x_before: self.reserve_y_before,
            reserve_y_before: self.reserve_x_before,
            ..self.clone()
        }
    }

    fn validate(&self, row: usize) -> Result<(), DataError> {
        let schema = |message: String| DataError::Schema { row, message };
        let amounts = [
            ("amount_x_in", self.amount_x_in),
            ("amount_x_out", self.amount_x_out),
            ("amount_y_in", self.amount_y_in),
            ("amount_y_out", self.amount_y_out),
            ("gas_fee", self.gas_fee),
        ];
        for (name, v) in amounts {
            if !(v.is_finite() && v >= 0.0) {
                return Err(schema(format!(
                    "{name} must be a non-negative number, got {v}"
                )));
            }
        }
        for (name, v) in [("l1_fee", self.l1_fee), ("l2_fee", self.l2_fee)] {
            if let Some(v) = v {
                if !(v.is_finite() && v >= 0.0) {
                    return Err(schema(format!(
                        "{name} must be a non-negative number, got {v}"
                    )));
                }
            }
        }
        match (self.amount_x_in > 0.0, self.amount_y_in > 0.0) {
            (true, true) => {
                return Err(schema(
                    "both amount_x_in and amount_y_in are positive".into(),
                ))
            }
            (false, false) => {
                return Err(schema(
                    "neither amount_x_in nor amount_y_in is positive".into(),
                ))
            }
            _ => {}
        }
        if !(self.reserve_x_before > 0.0 && self.reserve_y_before > 0.0)
            || !self.reserve_x_before.is_finite()
            || !self.reserve_y_before.is_finite()
        {
            return Err(schema(format!(
                "reserves must be positive, got ({}, {})",
                self.reserve_x_before, self.reserve_y_before
            )));
        }
        let (x, y) = self.reserves_after();
        if !(x > 0.0 && y > 0.0) {
            return Err(schema(format!(
                "swap drains the pool: reserves after ({x}, {y})"
            )));
        }
        Ok(())
    }
}

/// Start of the minute containing `ts`.
pub fn floor_minute(ts: i64) -> i64 {
    ts - ts.rem_euclid(60)
}

/// Events in canonical order plus how many rows arrived out of order.
#[derive(Debug, Clone, PartialEq)]
pub struct LoadedSwaps {
    pub events: Vec<SwapEvent>,
    pub reordered: usize,
}

pub fn load_swaps(path: &Path, format: Format) -> Result<LoadedSwaps, DataError> {
    let file = File::open(path).map_err(|e| DataError::io(path, e))?;
    match format {
        Format::Csv => read_swaps_csv(file),
        Format::Jsonl => read_swaps_jsonl(BufReader::new(file)),
    }
}

fn check_header(
    found: &csv::StringRecord,
    required: &[&str],
    optional: &[&str],
) -> Result<bool, DataError> {
    let found_cols: Vec<&str> = found.iter().collect();
    let mismatch = || DataError::Header {
        expected: required.join(","),
        found: found_cols.join(","),
    };
    if found_cols.len() < required.len() || found_cols[..required.len()] != *required {
        return Err(mismatch());
    }
    let extra = &found_cols[required.len()..];
    if extra.is_empty() {
        Ok(false)
    } else if extra == optional {
        Ok(true)
    } else {
        Err(DataError::Header {
            expected: format!("{},{}", required.join(","), optional.join(",")),
            found: found_cols.join(","),
        })
    }
}

fn parse_err(row: usize, e: impl std::fmt::Display) -> DataError {
    DataError::Parse {
        row,
        message: e.to_string(),
    }
}

pub fn read_swaps_csv<R: Read>(reader: R) -> Result<LoadedSwaps, DataError> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(reader);
    let header = rdr.headers().map_err(|e| parse_err(0, e))?.clone();
    check_header(&header, &SWAP_COLUMNS, &SPLIT_FEE_COLUMNS)?;
    let mut rows = Vec::new();
    for (i, record) in rdr.deserialize::<SwapEvent>().enumerate() {
        let row = i + 1;
        let event = record.map_err(|e| parse_err(row, e))?;
        rows.push((row, event));
    }
    canonicalize_swaps(rows)
}

pub fn read_swaps_jsonl<R: BufRead>(reader: R) -> Result<LoadedSwaps, DataError> {
    let mut rows = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let row = i + 1;
        let line = line.map_err(|e| parse_err(row, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let event: SwapEvent = serde_json::from_str(&line).map_err(|e| parse_err(row, e))?;
        rows.push((row, event));
    }
    canonicalize_swaps(rows)
}

fn canonicalize_swaps(mut rows: Vec<(usize, SwapEvent)>) -> Result<LoadedSwaps, DataError> {
    for (row, event) in &rows {
        event.validate(*row)?;
    }
    let reordered = rows
        .windows(2)
        .filter(|w| w[1].1.key() < w[0].1.key())
        .count();
    rows.sort_by_key(|(_, e)| e.key());
    if let Some(w) = rows.windows(2).find(|w| w[0].1.key() == w[1].1.key()) {
        let (block, tx, log) = w[1].1.key();
        return Err(DataError::DuplicateEvent {
            row: w[1].0.max(w[0].0),
            block,
            tx,
            log,
        });
    }
    Ok(LoadedSwaps {
        events: rows.into_iter().map(|(_, e)| e).collect(),
        reordered,
    })
}

/// Re-expresses events so that X is the quote token.
pub fn orient_swaps(events: Vec<SwapEvent>, quote: QuoteToken) -> Vec<SwapEvent> {
    match quote {
        QuoteToken::X => events,
        QuoteToken::Y => events.iter().map(SwapEvent::flipped).collect(),
    }
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(|v| v.to_string()).unwrap_or_default()
}

/// Canonical CSV: fixed column order, shortest round-trip float formatting.
/// The split-fee columns are written only when some event carries them.
pub fn write_swaps_csv<W: Write>(events: &[SwapEvent], writer: W) -> Result<(), DataError> {
    let split = events
        .iter()
        .any(|e| e.l1_fee.is_some() || e.l2_fee.is_some());
    let mut w = csv::Writer::from_writer(writer);
    let write_err = |e: csv::Error| parse_err(0, e);
    let mut header: Vec<&str> = SWAP_COLUMNS.to_vec();
    if split {
        header.extend(SPLIT_FEE_COLUMNS);
    }
    w.write_record(&header).map_err(write_err)?;
    for e in events {
        let mut rec = vec![
            e.timestamp.to_string(),
            e.block_number.to_string(),
            e.tx_index.to_string(),
            e.log_index.to_string(),
            e.amount_x_in.to_string(),
            e.amount_x_out.to_string(),
            e.amount_y_in.to_string(),
            e.amount_y_out.to_string(),
            e.reserve_x_before.to_string(),
            e.reserve_y_before.to_string(),
            e.gas_fee.to_string(),
        ];
        if split {
            rec.push(fmt_opt(e.l1_fee));
            rec.push(fmt_opt(e.l2_fee));
        }
        w.write_record(&rec).map_err(write_err)?;
    }
    w.flush().map_err(|e| parse_err(0, e))?;
    Ok(())
}

/// One-minute CEX kline.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CexBar {
    pub open_time: i64,
    pub open: f64,
    pub high: f64,
    pub low: f64,
    pub close: f64,
    pub volume: f64,
}

impl CexBar {
    fn validate(&self, row: usize) -> Result<(), DataError> {
        if self.open_time.rem_euclid(60) != 0 {
            return Err(DataError::UnalignedBar {
                row,
                open_time: self.open_time,
            });
        }
        let prices = [self.open, self.high, self.low, self.close];
        if prices.iter().any(|p| !(p.is_finite() && *p > 0.0)) {
            return Err(DataError::Schema {
                row,
                message: "prices must be positive".into(),
            });
        }
        if !(self.volume.is_finite() && self.volume >= 0.0) {
            return Err(DataError::Schema {
                row,
                message: format!("volume {} is negative", self.volume),
            });
        }
        if self.low > self.open.min(self.close) || self.high < self.open.max(self.close) {
            return Err(DataError::Schema {
                row,
                message: format!(
                    "bar range [{}, {}] does not contain open {} and close {}",
                    self.low, self.high, self.open, self.close
                ),
            });
        }
        Ok(())
    }
}

/// Loads bars from CSV (or JSONL by extension), sorted by `open_time`.
/// Gaps are kept as gaps.
pub fn load_cex_bars(path: &Path) -> Result<Vec<CexBar>, DataError> {
    let file = File::open(path).map_err(|e| DataError::io(path, e))?;
    match Format::from_path(path) {
        Format::Csv => read_cex_bars_csv(file),
        Format::Jsonl => read_cex_bars_jsonl(BufReader::new(file)),
    }
}

pub fn read_cex_bars_csv<R: Read>(reader: R) -> Result<Vec<CexBar>, DataError> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(reader);
    let header = rdr.headers().map_err(|e| parse_err(0, e))?.clone();
    check_header(&header, &BAR_COLUMNS, &[])?;
    let mut rows = Vec::new();
    for (i, record) in rdr.deserialize::<CexBar>().enumerate() {
        let row = i + 1;
        rows.push((row, record.map_err(|e| parse_err(row, e))?));
    }
    canonicalize_bars(rows)
}

pub fn read_cex_bars_jsonl<R: BufRead>(reader: R) -> Result<Vec<CexBar>, DataError> {
    let mut rows = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let row = i + 1;
        let line = line.map_err(|e| parse_err(row, e))?;
        if line.trim().is_empty() {
            continue;
        }
        rows.push((
            row,
            serde_json::from_str(&line).map_err(|e| parse_err(row, e))?,
        ));
    }
    canonicalize_bars(rows)
}

fn canonicalize_bars(mut rows: Vec<(usize, CexBar)>) -> Result<Vec<CexBar>, DataError> {
    for (row, bar) in &rows {
        bar.validate(*row)?;
    }
    rows.sort_by_key(|(_, b)| b.open_time);
    if let Some(w) = rows
        .windows(2)
        .find(|w| w[0].1.open_time == w[1].1.open_time)
    {
        return Err(DataError::DuplicateBar {
            row: w[1].0.max(w[0].0),
            open_time: w[1].1.open_time,
        });
    }
    Ok(rows.into_iter().map(|(_, b)| b).collect())
}

pub fn write_cex_bars_csv<W: Write>(bars: &[CexBar], writer: W) -> Result<(), DataError> {
    let mut w = csv::Writer::from_writer(writer);
    let err = |e: csv::Error| parse_err(0, e);
    w.write_record(BAR_COLUMNS).map_err(err)?;
    for b in bars {
        w.write_record([
            b.open_time.to_string(),
            b.open.to_string(),
            b.high.to_string(),
            b.low.to_string(),
            b.close.to_string(),
            b.volume.to_string(),
        ])
        .map_err(err)?;
    }
    w.flush().map_err(|e| parse_err(0, e))?;
    Ok(())
}

/// CEX close joined with the AMM state at the end of the same minute.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AlignedMinute {
    /// Minute start, unix seconds.
    pub minute: i64,
    pub cex_close: f64,
    /// No bar for this minute; `cex_close` carried from the previous one.
    pub cex_stale: bool,
    pub amm_spot: f64,
    pub reserve_x: f64,
    pub reserve_y: f64,
    /// Quote-token value traded on the AMM during the minute.
    pub amm_volume: f64,
    pub avg_gas: f64,
    pub swap_count: u32,
    /// False when no swap happened and the AMM state is carried forward.
    pub traded: bool,
}

impl AlignedMinute {
    pub fn delta(&self) -> f64 {
        self.amm_spot - self.cex_close
    }

    pub fn pool(&self) -> Result<PoolState<f64>, AmmError> {
        PoolState::fee_free(self.reserve_x, self.reserve_y)
    }
}

/// Joins swaps and bars minute by minute over the intersection of their
/// time ranges. The AMM side uses the reserves after the last swap of each
/// minute; quiet minutes carry the previous state with `traded = false`.
pub fn align_minutes(
    swaps: &[SwapEvent],
    bars: &[CexBar],
) -> Result<Vec<AlignedMinute>, DataError> {
    if swaps.is_empty() {
        return Err(DataError::Empty("swap events"));
    }
    if bars.is_empty() {
        return Err(DataError::Empty("CEX bars"));
    }
    let mut ordered: Vec<&SwapEvent> = swaps.iter().collect();
    ordered.sort_by_key(|e| (e.timestamp, e.key()));
    let swaps_from = ordered[0].minute();
    let swaps_to = ordered[ordered.len() - 1].minute();
    let bars_from = bars[0].open_time;
    let bars_to = bars[bars.len() - 1].open_time;
    let start = swaps_from.max(bars_from);
    let end = swaps_to.min(bars_to);
    if start > end {
        return Err(DataError::EmptyOverlap {
            swaps_from,
            swaps_to,
            bars_from,
            bars_to,
        });
    }

    let mut next_swap = ordered.partition_point(|e| e.minute() < start);
    let mut reserves = if next_swap > 0 {
        ordered[next_swap - 1].reserves_after()
    } else {
        (ordered[0].reserve_x_before, ordered[0].reserve_y_before)
    };
    let mut next_bar = bars.partition_point(|b| b.open_time < start);
    let mut close = if next_bar < bars.len() && bars[next_bar].open_time == start {
        bars[next_bar].close
    } else {
        bars[next_bar - 1].close
    };

    let mut out = Vec::with_capacity(((end - start) / 60 + 1) as usize);
    let mut minute = start;
    while minute <= end {
        let mut cex_stale = true;
        if next_bar < bars.len() && bars[next_bar].open_time == minute {
            close = bars[next_bar].close;
            cex_stale = false;
            next_bar += 1;
        }
        let (mut volume, mut gas, mut count) = (0.0, 0.0, 0u32);
        while next_swap < ordered.len() && ordered[next_swap].minute() == minute {
            let e = ordered[next_swap];
            volume += e.quote_volume();
            gas += e.gas_fee;
            count += 1;
            reserves = e.reserves_after();
            next_swap += 1;
        }
        out.push(AlignedMinute {
            minute,
            cex_close: close,
            cex_stale,
            amm_spot: reserves.0 / reserves.1,
            reserve_x: reserves.0,
            reserve_y: reserves.1,
            amm_volume: volume,
            avg_gas: if count > 0 {
                gas / f64::from(count)
            } else {
                0.0
            },
            swap_count: count,
            traded: count > 0,
        });
        minute += 60;
    }
    Ok(out)
}

/// Splits chain-ordered events into per-block groups, keeping intra-block order.
pub fn block_groups(swaps: &[SwapEvent]) -> Vec<&[SwapEvent]> {
    swaps
        .chunk_by(|a, b| a.block_number == b.block_number)
        .collect()
}

pub fn write_aligned_csv<W: Write>(minutes: &[AlignedMinute], writer: W) -> Result<(), DataError> {
    let mut w = csv::Writer::from_writer(writer);
    for m in minutes {
        w.serialize(m).map_err(|e| parse_err(0, e))?;
    }
    w.flush().map_err(|e| parse_err(0, e))?;
    Ok(())
}
