//! Domain types shared by every study: calendar keys, tickers, the raw input
//! rows, the derived attention row, and the estimation outputs.

mod calendar;
mod results;

use std::fmt;
use std::str::FromStr;

use chrono::NaiveDate;
use thiserror::Error;

pub use calendar::{parse_date, week_of, WeekStamp, YearMonth};
pub use results::{FmbResult, RegressionResult, SeMethod, VarFit, VarResult};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DataError {
    #[error("date {0} is not a Monday")]
    NotMonday(NaiveDate),
    #[error("invalid date `{0}` (expected YYYY-MM-DD)")]
    BadDate(String),
    #[error("invalid month `{0}` (expected YYYY-MM)")]
    BadMonth(String),
    #[error("invalid ticker `{0}`")]
    BadTicker(String),
    #[error("unknown keyword kind `{0}`")]
    BadKeywordKind(String),
    #[error("unknown Dash-5 bucket `{0}`")]
    UnknownBucket(String),
    #[error("unknown security type `{0}`")]
    BadSecurityType(String),
    #[error("unknown horizon `{0}`")]
    BadHorizon(String),
    #[error("{0}")]
    Invariant(String),
}

/// Exchange symbol: 1-6 characters from `A-Z`, `.` and `-`, stored uppercase.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Ticker(String);

impl Ticker {
    pub fn new(symbol: &str) -> Result<Self, DataError> {
        let canon = symbol.trim().to_ascii_uppercase();
        let ok = (1..=6).contains(&canon.len())
            && canon
                .bytes()
                .all(|b| b.is_ascii_uppercase() || b == b'.' || b == b'-');
        if ok {
            Ok(Ticker(canon))
        } else {
            Err(DataError::BadTicker(symbol.to_string()))
        }
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for Ticker {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl FromStr for Ticker {
    type Err = DataError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ticker::new(s)
    }
}

/// Which search keyword produced an SVI reading.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum KeywordKind {
    Ticker,
    Name,
    Product,
}

impl KeywordKind {
    pub fn tag(&self) -> &'static str {
        match self {
            KeywordKind::Ticker => "TICKER",
            KeywordKind::Name => "NAME",
            KeywordKind::Product => "PRODUCT",
        }
    }
}

impl FromStr for KeywordKind {
    type Err = DataError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "TICKER" => Ok(KeywordKind::Ticker),
            "NAME" => Ok(KeywordKind::Name),
            "PRODUCT" => Ok(KeywordKind::Product),
            other => Err(DataError::BadKeywordKind(other.to_string())),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SviObservation {
    pub ticker: Ticker,
    pub kind: KeywordKind,
    pub week: WeekStamp,
    /// Provider scale, 0-100.
    pub svi: u32,
}

#[derive(Debug, Clone, PartialEq)]
pub struct WeeklyMarketRow {
    pub ticker: Ticker,
    pub week: WeekStamp,
    pub ret: f64,
    pub turnover: f64,
    pub market_cap: f64,
    pub news_count: u32,
    pub benchmark_ret: f64,
}

/// Per (ticker, week) attention and control variables. Fields that need
/// history or optional inputs are `None` when they cannot be formed.
#[derive(Debug, Clone, PartialEq)]
pub struct AttentionRow {
    pub ticker: Ticker,
    pub week: WeekStamp,
    pub asvi: Option<f64>,
    pub apsvi: Option<f64>,
    pub abn_ret: f64,
    pub abn_turnover: Option<f64>,
    pub news_dummy: u8,
    pub log_mkt_cap: f64,
    pub dash5_pct: Option<f64>,
}

/// Dash-5 covered-order size buckets, in shares per order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Dash5Bucket {
    /// 100-499
    B1,
    /// 500-1,999
    B2,
    /// 2,000-4,999
    B3,
    /// 5,000-9,999
    B4,
}

impl Dash5Bucket {
    pub const ALL: [Dash5Bucket; 4] = [
        Dash5Bucket::B1,
        Dash5Bucket::B2,
        Dash5Bucket::B3,
        Dash5Bucket::B4,
    ];

    /// Inclusive share range of an order in this bucket.
    pub fn share_range(&self) -> (u32, u32) {
        match self {
            Dash5Bucket::B1 => (100, 499),
            Dash5Bucket::B2 => (500, 1999),
            Dash5Bucket::B3 => (2000, 4999),
            Dash5Bucket::B4 => (5000, 9999),
        }
    }

    pub fn index(&self) -> usize {
        *self as usize
    }

    pub fn tag(&self) -> &'static str {
        match self {
            Dash5Bucket::B1 => "B1",
            Dash5Bucket::B2 => "B2",
            Dash5Bucket::B3 => "B3",
            Dash5Bucket::B4 => "B4",
        }
    }
}

impl FromStr for Dash5Bucket {
    type Err = DataError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "B1" => Ok(Dash5Bucket::B1),
            "B2" => Ok(Dash5Bucket::B2),
            "B3" => Ok(Dash5Bucket::B3),
            "B4" => Ok(Dash5Bucket::B4),
            other => Err(DataError::UnknownBucket(other.to_string())),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Dash5Record {
    pub ticker: Ticker,
    pub month: YearMonth,
    pub bucket: Dash5Bucket,
    pub orders: u64,
    pub shares: u64,
    /// Total monthly share volume of the stock, all order types.
    pub total_shares: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SecurityType {
    Common,
    ClosedFund,
    Reit,
    Adr,
    Lp,
}

impl SecurityType {
    pub fn tag(&self) -> &'static str {
        match self {
            SecurityType::Common => "COMMON",
            SecurityType::ClosedFund => "CLOSED_FUND",
            SecurityType::Reit => "REIT",
            SecurityType::Adr => "ADR",
            SecurityType::Lp => "LP",
        }
    }
}

impl FromStr for SecurityType {
    type Err = DataError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "COMMON" => Ok(SecurityType::Common),
            "CLOSED_FUND" => Ok(SecurityType::ClosedFund),
            "REIT" => Ok(SecurityType::Reit),
            "ADR" => Ok(SecurityType::Adr),
            "LP" => Ok(SecurityType::Lp),
            other => Err(DataError::BadSecurityType(other.to_string())),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct IpoRecord {
    pub name: String,
    /// Listing symbol; pre-IPO search history is keyed by it.
    pub ticker: Option<Ticker>,
    pub filing_date: NaiveDate,
    pub listing_date: NaiveDate,
    pub offer_price: f64,
    pub range_low: f64,
    pub range_high: f64,
    pub offering_size: f64,
    pub asset_size: f64,
    pub industry_return: f64,
    pub security_type: SecurityType,
    /// Trading days between the offer and the first exchange trade.
    pub first_trade_day_offset: i32,
}

impl IpoRecord {
    pub fn validate(&self) -> Result<(), DataError> {
        if self.filing_date >= self.listing_date {
            return Err(DataError::Invariant(format!(
                "{}: filing_date {} not before listing_date {}",
                self.name, self.filing_date, self.listing_date
            )));
        }
        if !(self.range_low > 0.0 && self.range_low <= self.range_high) {
            return Err(DataError::Invariant(format!(
                "{}: filing range [{}, {}] invalid",
                self.name, self.range_low, self.range_high
            )));
        }
        if !(self.offer_price > 0.0) {
            return Err(DataError::Invariant(format!(
                "{}: offer_price must be positive",
                self.name
            )));
        }
        Ok(())
    }

    pub fn listing_week(&self) -> WeekStamp {
        week_of(self.listing_date)
    }
}

/// Realized post-listing returns for one IPO, as fractions.
#[derive(Debug, Clone, PartialEq)]
pub struct IpoOutcome {
    pub name: String,
    /// (first close - offer price) / offer price
    pub day1_ret: f64,
    /// Compounded return over event weeks 5 through 52.
    pub ret_w5_52: f64,
}

/// Daily article count mentioning a pre-IPO company.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IpoNewsDay {
    pub name: String,
    pub date: NaiveDate,
    pub count: u32,
}

/// Forward-return horizons of the price-pressure regressions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Horizon {
    W1,
    W2,
    W3,
    W4,
    /// Event weeks 5 through 52 inclusive, compounded.
    W5To52,
}

impl Horizon {
    pub const ALL: [Horizon; 5] = [
        Horizon::W1,
        Horizon::W2,
        Horizon::W3,
        Horizon::W4,
        Horizon::W5To52,
    ];

    /// Inclusive range of event weeks covered.
    pub fn weeks(&self) -> (i64, i64) {
        match self {
            Horizon::W1 => (1, 1),
            Horizon::W2 => (2, 2),
            Horizon::W3 => (3, 3),
            Horizon::W4 => (4, 4),
            Horizon::W5To52 => (5, 52),
        }
    }

    pub fn tag(&self) -> &'static str {
        match self {
            Horizon::W1 => "W1",
            Horizon::W2 => "W2",
            Horizon::W3 => "W3",
            Horizon::W4 => "W4",
            Horizon::W5To52 => "W5_52",
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            Horizon::W1 => "Week1",
            Horizon::W2 => "Week2",
            Horizon::W3 => "Week3",
            Horizon::W4 => "Week4",
            Horizon::W5To52 => "Week 5-52",
        }
    }
}

impl FromStr for Horizon {
    type Err = DataError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Horizon::ALL
            .into_iter()
            .find(|h| h.tag() == s)
            .ok_or_else(|| DataError::BadHorizon(s.to_string()))
    }
}
