//! CSV readers and writers for the input files, IPO sample exclusions, and
//! the noise-ticker filter.
//!
//! Dialect: comma-separated UTF-8, `.` decimal point, ISO-8601 dates, and a
//! fixed header on the first line. Loaders never drop a row silently: every
//! data record is either accepted or counted against a [`RejectReason`].

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::fmt;
use std::io::{BufRead, Read, Write};

use thiserror::Error;

use crate::datamodel::{
    parse_date, AttentionRow, Dash5Bucket, Dash5Record, IpoNewsDay, IpoOutcome, IpoRecord,
    KeywordKind, SecurityType, SviObservation, Ticker, WeekStamp, WeeklyMarketRow, YearMonth,
};

pub const SVI_HEADER: &[&str] = &["ticker", "week_start", "svi"];
pub const MARKET_HEADER: &[&str] = &[
    "ticker",
    "week_start",
    "ret",
    "turnover",
    "market_cap",
    "news_count",
    "benchmark_ret",
];
pub const DASH5_HEADER: &[&str] = &[
    "ticker",
    "month",
    "bucket",
    "orders",
    "shares",
    "total_shares",
];
pub const IPO_HEADER: &[&str] = &[
    "name",
    "ticker",
    "filing_date",
    "listing_date",
    "offer_price",
    "range_low",
    "range_high",
    "offering_size",
    "asset_size",
    "industry_return",
    "security_type",
    "first_trade_day_offset",
];
pub const IPO_OUTCOME_HEADER: &[&str] = &["name", "day1_ret", "ret_w5_52"];
pub const IPO_NEWS_HEADER: &[&str] = &["name", "date", "count"];

/// Lowest offer price kept in the IPO sample.
pub const IPO_MIN_PRICE: f64 = 5.0;
/// Latest first exchange trade, in trading days after the offer.
pub const IPO_MAX_TRADE_OFFSET: i32 = 5;

const MAX_ISSUES: usize = 50;

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error("input is empty; expected header `{0}`")]
    Empty(String),
    #[error("bad header: expected `{expected}`, found `{found}`")]
    BadHeader { expected: String, found: String },
    #[error("noise ticker list line {line}: invalid symbol `{symbol}`")]
    BadNoiseSymbol { line: usize, symbol: String },
}

/// Why a data row was rejected.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum RejectReason {
    MalformedRow,
    RangeViolation,
    DuplicateKey,
    NotMonday,
    UnknownBucket,
    NegativeCount,
}

impl fmt::Display for RejectReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            RejectReason::MalformedRow => "MalformedRow",
            RejectReason::RangeViolation => "RangeViolation",
            RejectReason::DuplicateKey => "DuplicateKey",
            RejectReason::NotMonday => "NotMonday",
            RejectReason::UnknownBucket => "UnknownBucket",
            RejectReason::NegativeCount => "NegativeCount",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RowIssue {
    /// 1-based line of the record in the source (the header is line 1).
    pub line: u64,
    pub reason: RejectReason,
    pub detail: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct IngestReport {
    pub rows_read: usize,
    pub rows_accepted: usize,
    pub rows_rejected: usize,
    pub rejection_reasons: BTreeMap<RejectReason, usize>,
    /// First few rejections with detail, for diagnostics.
    pub issues: Vec<RowIssue>,
}

impl IngestReport {
    pub fn count(&self, reason: RejectReason) -> usize {
        self.rejection_reasons.get(&reason).copied().unwrap_or(0)
    }

    fn reject(&mut self, line: u64, reason: RejectReason, detail: String) {
        self.rows_rejected += 1;
        *self.rejection_reasons.entry(reason).or_default() += 1;
        if self.issues.len() < MAX_ISSUES {
            self.issues.push(RowIssue {
                line,
                reason,
                detail,
            });
        }
    }

    pub fn summary(&self) -> String {
        let mut s = format!(
            "read {} accepted {} rejected {}",
            self.rows_read, self.rows_accepted, self.rows_rejected
        );
        for (r, n) in &self.rejection_reasons {
            s.push_str(&format!(" {r}={n}"));
        }
        s
    }
}

type RowResult<T> = Result<T, (RejectReason, String)>;

fn malformed<T>(msg: impl Into<String>) -> RowResult<T> {
    Err((RejectReason::MalformedRow, msg.into()))
}

fn load_rows<R: Read, T>(
    source: R,
    header: &[&str],
    mut parse: impl FnMut(&[&str]) -> RowResult<T>,
) -> Result<(Vec<T>, IngestReport), IngestError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .from_reader(source);
    let mut records = reader.byte_records();
    let expected = header.join(",");
    let first = match records.next() {
        Some(rec) => rec?,
        None => return Err(IngestError::Empty(expected)),
    };
    let found: Vec<String> = first
        .iter()
        .map(|f| String::from_utf8_lossy(f).into_owned())
        .collect();
    if found.len() != header.len() || found.iter().zip(header).any(|(a, b)| a != b) {
        return Err(IngestError::BadHeader {
            expected,
            found: found.join(","),
        });
    }

    let mut report = IngestReport::default();
    let mut out = Vec::new();
    for rec in records {
        let rec = rec?;
        report.rows_read += 1;
        let line = rec.position().map(|p| p.line()).unwrap_or(0);
        let fields: Result<Vec<&str>, _> = rec.iter().map(std::str::from_utf8).collect();
        let outcome = match fields {
            Err(_) => malformed("invalid UTF-8"),
            Ok(f) if f.len() != header.len() => malformed(format!(
                "expected {} fields, found {}",
                header.len(),
                f.len()
            )),
            Ok(f) => parse(&f),
        };
        match outcome {
            Ok(v) => {
                report.rows_accepted += 1;
                out.push(v);
            }
            Err((reason, detail)) => report.reject(line, reason, detail),
        }
    }
    Ok((out, report))
}

fn field_ticker(s: &str) -> RowResult<Ticker> {
    Ticker::new(s).or_else(|_| malformed(format!("bad ticker `{s}`")))
}

fn field_week(s: &str) -> RowResult<WeekStamp> {
    let date = parse_date(s).or_else(|_| malformed(format!("bad date `{s}`")))?;
    WeekStamp::from_monday(date).map_err(|_| {
        (
            RejectReason::NotMonday,
            format!("week_start {s} is not a Monday"),
        )
    })
}

fn field_f64(name: &str, s: &str) -> RowResult<f64> {
    match s.parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(v),
        _ => malformed(format!("{name}: `{s}` is not a finite number")),
    }
}

fn field_int(name: &str, s: &str) -> RowResult<i64> {
    s.parse::<i64>()
        .or_else(|_| malformed(format!("{name}: `{s}` is not an integer")))
}

fn field_count(name: &str, s: &str) -> RowResult<u64> {
    let v = field_int(name, s)?;
    if v < 0 {
        return Err((RejectReason::NegativeCount, format!("{name} = {v}")));
    }
    Ok(v as u64)
}

fn range(cond: bool, msg: impl FnOnce() -> String) -> RowResult<()> {
    if cond {
        Ok(())
    } else {
        Err((RejectReason::RangeViolation, msg()))
    }
}

/// Reads `ticker,week_start,svi`. Zero readings are kept.
pub fn load_svi<R: Read>(
    source: R,
    kind: KeywordKind,
) -> Result<(Vec<SviObservation>, IngestReport), IngestError> {
    let mut seen = HashSet::new();
    load_rows(source, SVI_HEADER, |f| {
        let ticker = field_ticker(f[0])?;
        let week = field_week(f[1])?;
        let svi = field_int("svi", f[2])?;
        range((0..=100).contains(&svi), || {
            format!("svi {svi} outside 0-100")
        })?;
        if !seen.insert((ticker.clone(), week)) {
            return Err((
                RejectReason::DuplicateKey,
                format!("{ticker} {week} repeated"),
            ));
        }
        Ok(SviObservation {
            ticker,
            kind,
            week,
            svi: svi as u32,
        })
    })
}

pub fn load_market<R: Read>(
    source: R,
) -> Result<(Vec<WeeklyMarketRow>, IngestReport), IngestError> {
    let mut seen = HashSet::new();
    load_rows(source, MARKET_HEADER, |f| {
        let ticker = field_ticker(f[0])?;
        let week = field_week(f[1])?;
        let ret = field_f64("ret", f[2])?;
        let turnover = field_f64("turnover", f[3])?;
        let market_cap = field_f64("market_cap", f[4])?;
        let news = field_int("news_count", f[5])?;
        let benchmark_ret = field_f64("benchmark_ret", f[6])?;
        range(ret > -1.0, || format!("ret {ret} <= -1"))?;
        range(turnover >= 0.0, || format!("turnover {turnover} < 0"))?;
        range(market_cap > 0.0, || format!("market_cap {market_cap} <= 0"))?;
        range((0..=u32::MAX as i64).contains(&news), || {
            format!("news_count {news} out of range")
        })?;
        if !seen.insert((ticker.clone(), week)) {
            return Err((
                RejectReason::DuplicateKey,
                format!("{ticker} {week} repeated"),
            ));
        }
        Ok(WeeklyMarketRow {
            ticker,
            week,
            ret,
            turnover,
            market_cap,
            news_count: news as u32,
            benchmark_ret,
        })
    })
}

/// Reads `ticker,month,bucket,orders,shares,total_shares`. `total_shares`
/// must agree across the bucket rows of one (ticker, month).
pub fn load_dash5<R: Read>(source: R) -> Result<(Vec<Dash5Record>, IngestReport), IngestError> {
    let mut seen = HashSet::new();
    let mut totals: HashMap<(Ticker, YearMonth), u64> = HashMap::new();
    load_rows(source, DASH5_HEADER, |f| {
        let ticker = field_ticker(f[0])?;
        let month: YearMonth = f[1]
            .parse()
            .or_else(|_| malformed(format!("bad month `{}`", f[1])))?;
        let bucket: Dash5Bucket = f[2]
            .parse()
            .map_err(|_| (RejectReason::UnknownBucket, format!("bucket `{}`", f[2])))?;
        let orders = field_count("orders", f[3])?;
        let shares = field_count("shares", f[4])?;
        let total_shares = field_count("total_shares", f[5])?;
        if let Some(&t) = totals.get(&(ticker.clone(), month)) {
            if t != total_shares {
                return malformed(format!(
                    "{ticker} {month}: total_shares {total_shares} disagrees with {t}"
                ));
            }
        }
        if !seen.insert((ticker.clone(), month, bucket)) {
            return Err((
                RejectReason::DuplicateKey,
                format!("{ticker} {month} {} repeated", bucket.tag()),
            ));
        }
        totals.insert((ticker.clone(), month), total_shares);
        Ok(Dash5Record {
            ticker,
            month,
            bucket,
            orders,
            shares,
            total_shares,
        })
    })
}

pub fn load_ipos<R: Read>(source: R) -> Result<(Vec<IpoRecord>, IngestReport), IngestError> {
    let mut seen = HashSet::new();
    load_rows(source, IPO_HEADER, |f| {
        let name = f[0].trim();
        if name.is_empty() {
            return malformed("empty name");
        }
        let ticker = if f[1].is_empty() {
            None
        } else {
            Some(field_ticker(f[1])?)
        };
        let date = |s: &str| parse_date(s).or_else(|_| malformed(format!("bad date `{s}`")));
        let security_type: SecurityType = f[10]
            .parse()
            .or_else(|_| malformed(format!("unknown security type `{}`", f[10])))?;
        let offset = field_int("first_trade_day_offset", f[11])?;
        let rec = IpoRecord {
            name: name.to_string(),
            ticker,
            filing_date: date(f[2])?,
            listing_date: date(f[3])?,
            offer_price: field_f64("offer_price", f[4])?,
            range_low: field_f64("range_low", f[5])?,
            range_high: field_f64("range_high", f[6])?,
            offering_size: field_f64("offering_size", f[7])?,
            asset_size: field_f64("asset_size", f[8])?,
            industry_return: field_f64("industry_return", f[9])?,
            security_type,
            first_trade_day_offset: i32::try_from(offset)
                .or_else(|_| malformed("offset out of range"))?,
        };
        rec.validate()
            .map_err(|e| (RejectReason::RangeViolation, e.to_string()))?;
        range(rec.offering_size > 0.0 && rec.asset_size > 0.0, || {
            format!(
                "{}: offering_size and asset_size must be positive",
                rec.name
            )
        })?;
        if !seen.insert(rec.name.clone()) {
            return Err((
                RejectReason::DuplicateKey,
                format!("IPO `{}` repeated", rec.name),
            ));
        }
        Ok(rec)
    })
}

pub fn load_ipo_outcomes<R: Read>(
    source: R,
) -> Result<(Vec<IpoOutcome>, IngestReport), IngestError> {
    let mut seen = HashSet::new();
    load_rows(source, IPO_OUTCOME_HEADER, |f| {
        let name = f[0].trim().to_string();
        let day1_ret = field_f64("day1_ret", f[1])?;
        let ret_w5_52 = field_f64("ret_w5_52", f[2])?;
        range(day1_ret > -1.0 && ret_w5_52 > -1.0, || {
            format!("{name}: return <= -1")
        })?;
        if !seen.insert(name.clone()) {
            return Err((RejectReason::DuplicateKey, format!("IPO `{name}` repeated")));
        }
        Ok(IpoOutcome {
            name,
            day1_ret,
            ret_w5_52,
        })
    })
}

pub fn load_ipo_news<R: Read>(source: R) -> Result<(Vec<IpoNewsDay>, IngestReport), IngestError> {
    let mut seen = HashSet::new();
    load_rows(source, IPO_NEWS_HEADER, |f| {
        let name = f[0].trim().to_string();
        let date = parse_date(f[1]).or_else(|_| malformed(format!("bad date `{}`", f[1])))?;
        let count = field_count("count", f[2])?;
        range(count <= u32::MAX as u64, || {
            format!("count {count} too large")
        })?;
        if !seen.insert((name.clone(), date)) {
            return Err((
                RejectReason::DuplicateKey,
                format!("{name} {date} repeated"),
            ));
        }
        Ok(IpoNewsDay {
            name,
            date,
            count: count as u32,
        })
    })
}

/// Tickers whose symbol doubles as an ordinary word, contaminating search counts.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct NoiseTickerList {
    symbols: BTreeSet<Ticker>,
}

impl NoiseTickerList {
    pub fn new(symbols: impl IntoIterator<Item = Ticker>) -> Self {
        NoiseTickerList {
            symbols: symbols.into_iter().collect(),
        }
    }

    pub fn contains(&self, t: &Ticker) -> bool {
        self.symbols.contains(t)
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &Ticker> {
        self.symbols.iter()
    }
}

/// One symbol per line; blank lines and `#` comments are ignored.
pub fn load_noise_list<R: BufRead>(source: R) -> Result<NoiseTickerList, IngestError> {
    let mut symbols = BTreeSet::new();
    for (i, line) in source.lines().enumerate() {
        let line = line?;
        let s = line.trim();
        if s.is_empty() || s.starts_with('#') {
            continue;
        }
        let t = Ticker::new(s).map_err(|_| IngestError::BadNoiseSymbol {
            line: i + 1,
            symbol: s.to_string(),
        })?;
        symbols.insert(t);
    }
    Ok(NoiseTickerList { symbols })
}

pub trait HasTicker {
    fn ticker(&self) -> &Ticker;
}

macro_rules! has_ticker {
    ($($t:ty),*) => {
        $(impl HasTicker for $t {
            fn ticker(&self) -> &Ticker {
                &self.ticker
            }
        })*
    };
}
has_ticker!(SviObservation, WeeklyMarketRow, Dash5Record, AttentionRow);

/// Drops every row whose ticker is on the list. Returns the kept rows and the
/// share of distinct tickers removed.
pub fn filter_noise_tickers<T: HasTicker>(rows: Vec<T>, list: &NoiseTickerList) -> (Vec<T>, f64) {
    let all: HashSet<&Ticker> = rows.iter().map(|r| r.ticker()).collect();
    let total = all.len();
    let removed = all.iter().filter(|t| list.contains(t)).count();
    let fraction = if total == 0 {
        0.0
    } else {
        removed as f64 / total as f64
    };
    let kept = rows
        .into_iter()
        .filter(|r| !list.contains(r.ticker()))
        .collect();
    (kept, fraction)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ExclusionReason {
    SecurityType(SecurityType),
    PriceFloor,
    ExchangeWindow,
}

impl fmt::Display for ExclusionReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExclusionReason::SecurityType(t) => write!(f, "security type {}", t.tag()),
            ExclusionReason::PriceFloor => write!(f, "offer price below {IPO_MIN_PRICE}"),
            ExclusionReason::ExchangeWindow => {
                write!(
                    f,
                    "first trade more than {IPO_MAX_TRADE_OFFSET} trading days after offer"
                )
            }
        }
    }
}

/// First matching exclusion, checked in the order type, price, exchange window.
pub fn ipo_exclusion(rec: &IpoRecord) -> Option<ExclusionReason> {
    if rec.security_type != SecurityType::Common {
        Some(ExclusionReason::SecurityType(rec.security_type))
    } else if rec.offer_price < IPO_MIN_PRICE {
        Some(ExclusionReason::PriceFloor)
    } else if rec.first_trade_day_offset > IPO_MAX_TRADE_OFFSET {
        Some(ExclusionReason::ExchangeWindow)
    } else {
        None
    }
}

pub fn apply_ipo_exclusions(
    records: Vec<IpoRecord>,
) -> (Vec<IpoRecord>, Vec<(IpoRecord, ExclusionReason)>) {
    let mut kept = Vec::new();
    let mut excluded = Vec::new();
    for r in records {
        match ipo_exclusion(&r) {
            None => kept.push(r),
            Some(why) => excluded.push((r, why)),
        }
    }
    (kept, excluded)
}

fn write_rows<W: Write>(
    sink: W,
    header: &[&str],
    rows: impl Iterator<Item = Vec<String>>,
) -> Result<(), IngestError> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(sink);
    w.write_record(header)?;
    for r in rows {
        w.write_record(&r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_svi<W: Write>(sink: W, rows: &[SviObservation]) -> Result<(), IngestError> {
    write_rows(
        sink,
        SVI_HEADER,
        rows.iter()
            .map(|r| vec![r.ticker.to_string(), r.week.to_string(), r.svi.to_string()]),
    )
}

pub fn write_market<W: Write>(sink: W, rows: &[WeeklyMarketRow]) -> Result<(), IngestError> {
    write_rows(
        sink,
        MARKET_HEADER,
        rows.iter().map(|r| {
            vec![
                r.ticker.to_string(),
                r.week.to_string(),
                r.ret.to_string(),
                r.turnover.to_string(),
                r.market_cap.to_string(),
                r.news_count.to_string(),
                r.benchmark_ret.to_string(),
            ]
        }),
    )
}

pub fn write_dash5<W: Write>(sink: W, rows: &[Dash5Record]) -> Result<(), IngestError> {
    write_rows(
        sink,
        DASH5_HEADER,
        rows.iter().map(|r| {
            vec![
                r.ticker.to_string(),
                r.month.to_string(),
                r.bucket.tag().to_string(),
                r.orders.to_string(),
                r.shares.to_string(),
                r.total_shares.to_string(),
            ]
        }),
    )
}

pub fn write_ipos<W: Write>(sink: W, rows: &[IpoRecord]) -> Result<(), IngestError> {
    write_rows(
        sink,
        IPO_HEADER,
        rows.iter().map(|r| {
            vec![
                r.name.clone(),
                r.ticker.as_ref().map(|t| t.to_string()).unwrap_or_default(),
                r.filing_date.format("%Y-%m-%d").to_string(),
                r.listing_date.format("%Y-%m-%d").to_string(),
                r.offer_price.to_string(),
                r.range_low.to_string(),
                r.range_high.to_string(),
                r.offering_size.to_string(),
                r.asset_size.to_string(),
                r.industry_return.to_string(),
                r.security_type.tag().to_string(),
                r.first_trade_day_offset.to_string(),
            ]
        }),
    )
}

pub fn write_ipo_outcomes<W: Write>(sink: W, rows: &[IpoOutcome]) -> Result<(), IngestError> {
    write_rows(
        sink,
        IPO_OUTCOME_HEADER,
        rows.iter().map(|r| {
            vec![
                r.name.clone(),
                r.day1_ret.to_string(),
                r.ret_w5_52.to_string(),
            ]
        }),
    )
}

pub fn write_ipo_news<W: Write>(sink: W, rows: &[IpoNewsDay]) -> Result<(), IngestError> {
    write_rows(
        sink,
        IPO_NEWS_HEADER,
        rows.iter().map(|r| {
            vec![
                r.name.clone(),
                r.date.format("%Y-%m-%d").to_string(),
                r.count.to_string(),
            ]
        }),
    )
}

pub fn write_noise_list<W: Write>(mut sink: W, list: &NoiseTickerList) -> Result<(), IngestError> {
    for t in list.iter() {
        writeln!(sink, "{t}")?;
    }
    Ok(())
}
