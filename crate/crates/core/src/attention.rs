//! Attention and control variables: abnormal search volume, abnormal return
//! and turnover, news dummy, monthly aggregates, deltas, cross-sectional
//! z-scores and forward returns. Also assembles the weekly [`AttentionRow`]
//! panel consumed by the price-pressure study.

use std::collections::{BTreeMap, HashMap};

use rayon::prelude::*;
use thiserror::Error;

use crate::datamodel::{
    AttentionRow, Dash5Record, Horizon, SviObservation, Ticker, WeekStamp, WeeklyMarketRow,
    YearMonth,
};

/// Weeks in the trailing median window of abnormal SVI.
pub const ASVI_WINDOW: usize = 8;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AttentionError {
    #[error("insufficient history: need {needed}, found {found}")]
    InsufficientHistory { needed: usize, found: usize },
    #[error("zero SVI in a value that must be logged")]
    ZeroSvi,
    #[error("no observation for week {0}")]
    MissingObservation(WeekStamp),
    #[error("trailing dispersion is zero")]
    ZeroDispersion,
    #[error("month has no weeks")]
    EmptyMonth,
    #[error("log difference of a non-positive value")]
    NonPositiveInput,
    #[error("degenerate cross-section ({0})")]
    DegenerateCrossSection(String),
    #[error("missing future week {0}")]
    MissingFutureWeeks(WeekStamp),
}

/// Median; for an even count, the mean of the two middle order statistics.
/// Returns `None` on empty input.
pub fn median(values: &[f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    let mut v = values.to_vec();
    v.sort_by(|a, b| a.total_cmp(b));
    let n = v.len();
    Some(if n % 2 == 1 {
        v[n / 2]
    } else {
        (v[n / 2 - 1] + v[n / 2]) / 2.0
    })
}

/// `ln(current) - ln(median(prior))` on raw numbers. `prior` must hold the
/// full trailing window.
pub fn abnormal_log_level(current: f64, prior: &[f64]) -> Result<f64, AttentionError> {
    if prior.len() < ASVI_WINDOW {
        return Err(AttentionError::InsufficientHistory {
            needed: ASVI_WINDOW,
            found: prior.len(),
        });
    }
    if current <= 0.0 || prior.iter().any(|&v| v <= 0.0) {
        return Err(AttentionError::ZeroSvi);
    }
    let med = median(prior).expect("non-empty window");
    Ok(current.ln() - med.ln())
}

/// Abnormal SVI at week `t`: log SVI minus the log median of the eight
/// immediately preceding weeks, all of which must be present and positive.
pub fn compute_asvi(
    series: &BTreeMap<WeekStamp, u32>,
    t: WeekStamp,
) -> Result<f64, AttentionError> {
    let current = *series
        .get(&t)
        .ok_or(AttentionError::MissingObservation(t))?;
    let mut prior = Vec::with_capacity(ASVI_WINDOW);
    for lag in 1..=ASVI_WINDOW as i64 {
        match series.get(&t.offset(-lag)) {
            Some(&v) => prior.push(v as f64),
            None => {
                return Err(AttentionError::InsufficientHistory {
                    needed: ASVI_WINDOW,
                    found: prior.len(),
                })
            }
        }
    }
    abnormal_log_level(current as f64, &prior)
}

/// Same construction as [`compute_asvi`], applied to product-keyword SVI.
pub fn compute_apsvi(
    series: &BTreeMap<WeekStamp, u32>,
    t: WeekStamp,
) -> Result<f64, AttentionError> {
    compute_asvi(series, t)
}

pub fn abnormal_return(ret: f64, benchmark_ret: f64) -> f64 {
    ret - benchmark_ret
}

pub fn abnormal_returns(rows: &[WeeklyMarketRow]) -> Vec<f64> {
    rows.iter()
        .map(|r| abnormal_return(r.ret, r.benchmark_ret))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TurnoverConfig {
    /// Trailing calendar weeks, excluding the current one.
    pub window: usize,
    pub min_obs: usize,
    /// Guard added before taking logs of turnover.
    pub eps: f64,
}

impl Default for TurnoverConfig {
    fn default() -> Self {
        TurnoverConfig {
            window: 26,
            min_obs: 10,
            eps: 1e-8,
        }
    }
}

/// Log turnover at `t` standardized by the mean and sample standard
/// deviation of log turnover over the trailing window.
pub fn abnormal_turnover(
    series: &BTreeMap<WeekStamp, f64>,
    t: WeekStamp,
    cfg: &TurnoverConfig,
) -> Result<f64, AttentionError> {
    let current = *series
        .get(&t)
        .ok_or(AttentionError::MissingObservation(t))?;
    let start = t.offset(-(cfg.window as i64));
    let logs: Vec<f64> = series
        .range(start..t)
        .map(|(_, v)| (v + cfg.eps).ln())
        .collect();
    if logs.len() < cfg.min_obs.max(2) {
        return Err(AttentionError::InsufficientHistory {
            needed: cfg.min_obs.max(2),
            found: logs.len(),
        });
    }
    let n = logs.len() as f64;
    let mean = logs.iter().sum::<f64>() / n;
    let var = logs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    let sd = var.sqrt();
    if !(sd > 1e-12 * mean.abs().max(1.0)) {
        return Err(AttentionError::ZeroDispersion);
    }
    Ok(((current + cfg.eps).ln() - mean) / sd)
}

pub fn news_dummy(news_count: u32) -> u8 {
    u8::from(news_count > 0)
}

/// Sum of the weekly SVIs belonging to one month.
pub fn monthly_svi(weekly: &[u32]) -> Result<u64, AttentionError> {
    if weekly.is_empty() {
        return Err(AttentionError::EmptyMonth);
    }
    Ok(weekly.iter().map(|&v| v as u64).sum())
}

/// Monthly SVI sums for one series; a week belongs to the month of its Monday.
pub fn monthly_svi_series(series: &BTreeMap<WeekStamp, u32>) -> BTreeMap<YearMonth, u64> {
    let mut grouped: BTreeMap<YearMonth, Vec<u32>> = BTreeMap::new();
    for (w, &v) in series {
        grouped.entry(w.month()).or_default().push(v);
    }
    grouped
        .into_iter()
        .map(|(m, v)| (m, monthly_svi(&v).expect("grouped weeks are non-empty")))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DeltaKind {
    #[default]
    Log,
    Arith,
}

impl std::str::FromStr for DeltaKind {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "log" => Ok(DeltaKind::Log),
            "arith" => Ok(DeltaKind::Arith),
            other => Err(format!("unknown delta kind `{other}` (log|arith)")),
        }
    }
}

pub fn log_delta(x_t: f64, x_prev: f64) -> Result<f64, AttentionError> {
    if x_t > 0.0 && x_prev > 0.0 {
        Ok(x_t.ln() - x_prev.ln())
    } else {
        Err(AttentionError::NonPositiveInput)
    }
}

pub fn delta(kind: DeltaKind, x_t: f64, x_prev: f64) -> Result<f64, AttentionError> {
    match kind {
        DeltaKind::Log => log_delta(x_t, x_prev),
        DeltaKind::Arith => Ok(x_t - x_prev),
    }
}

/// Z-scores with the sample standard deviation; missing entries stay missing.
pub fn cross_sectional_standardize(
    values: &[Option<f64>],
) -> Result<Vec<Option<f64>>, AttentionError> {
    let present: Vec<f64> = values.iter().flatten().copied().collect();
    let n = present.len();
    if n < 3 {
        return Err(AttentionError::DegenerateCrossSection(format!(
            "{n} values"
        )));
    }
    let mean = present.iter().sum::<f64>() / n as f64;
    let var = present.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    let sd = var.sqrt();
    let scale = present.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if !(sd > 1e-12 * scale) {
        return Err(AttentionError::DegenerateCrossSection(
            "zero dispersion".into(),
        ));
    }
    Ok(values.iter().map(|v| v.map(|x| (x - mean) / sd)).collect())
}

/// Forward abnormal return after event week `t`, in basis points. Single
/// weeks for W1-W4; weeks 5-52 compounded.
pub fn forward_return_bps(
    abn_ret: &BTreeMap<WeekStamp, f64>,
    t: WeekStamp,
    h: Horizon,
) -> Result<f64, AttentionError> {
    let (first, last) = h.weeks();
    let mut growth = 1.0;
    for k in first..=last {
        let w = t.offset(k);
        let r = abn_ret
            .get(&w)
            .ok_or(AttentionError::MissingFutureWeeks(w))?;
        if first == last {
            return Ok(r * 1e4);
        }
        growth *= 1.0 + r;
    }
    Ok((growth - 1.0) * 1e4)
}

/// Share of a stock's monthly volume executed through Dash-5 covered orders,
/// keyed by (ticker, month). Months whose bucket volume exceeds the total, or
/// whose total is zero, are left out.
pub fn dash5_pct_by_month(records: &[Dash5Record]) -> HashMap<(Ticker, YearMonth), f64> {
    let mut acc: HashMap<(Ticker, YearMonth), (u64, u64)> = HashMap::new();
    for r in records {
        let e = acc
            .entry((r.ticker.clone(), r.month))
            .or_insert((0, r.total_shares));
        e.0 += r.shares;
    }
    acc.into_iter()
        .filter(|(_, (s, tot))| *tot > 0 && s <= tot)
        .map(|(k, (s, tot))| (k, s as f64 / tot as f64))
        .collect()
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct PanelConfig {
    pub turnover: TurnoverConfig,
}

pub(crate) fn svi_by_ticker(rows: &[SviObservation]) -> BTreeMap<Ticker, BTreeMap<WeekStamp, u32>> {
    let mut out: BTreeMap<Ticker, BTreeMap<WeekStamp, u32>> = BTreeMap::new();
    for r in rows {
        out.entry(r.ticker.clone())
            .or_default()
            .insert(r.week, r.svi);
    }
    out
}

pub(crate) fn market_by_ticker(
    rows: &[WeeklyMarketRow],
) -> BTreeMap<Ticker, BTreeMap<WeekStamp, &WeeklyMarketRow>> {
    let mut out: BTreeMap<Ticker, BTreeMap<WeekStamp, &WeeklyMarketRow>> = BTreeMap::new();
    for r in rows {
        out.entry(r.ticker.clone()).or_default().insert(r.week, r);
    }
    out
}

/// One [`AttentionRow`] per market row, ordered by (ticker, week).
pub fn build_attention_panel(
    svi: &[SviObservation],
    product_svi: &[SviObservation],
    market: &[WeeklyMarketRow],
    dash5: &[Dash5Record],
    cfg: &PanelConfig,
) -> Vec<AttentionRow> {
    let svi = svi_by_ticker(svi);
    let psvi = svi_by_ticker(product_svi);
    let market = market_by_ticker(market);
    let d5 = dash5_pct_by_month(dash5);
    let empty = BTreeMap::new();

    let tickers: Vec<(&Ticker, &BTreeMap<WeekStamp, &WeeklyMarketRow>)> = market.iter().collect();
    let per_ticker: Vec<Vec<AttentionRow>> = tickers
        .par_iter()
        .map(|(ticker, weeks)| {
            let s = svi.get(*ticker).unwrap_or(&empty);
            let p = psvi.get(*ticker).unwrap_or(&empty);
            let turnover: BTreeMap<WeekStamp, f64> =
                weeks.iter().map(|(w, r)| (*w, r.turnover)).collect();
            weeks
                .iter()
                .map(|(&week, row)| AttentionRow {
                    ticker: (*ticker).clone(),
                    week,
                    asvi: compute_asvi(s, week).ok(),
                    apsvi: compute_apsvi(p, week).ok(),
                    abn_ret: abnormal_return(row.ret, row.benchmark_ret),
                    abn_turnover: abnormal_turnover(&turnover, week, &cfg.turnover).ok(),
                    news_dummy: news_dummy(row.news_count),
                    log_mkt_cap: row.market_cap.ln(),
                    dash5_pct: d5.get(&((*ticker).clone(), week.month())).copied(),
                })
                .collect()
        })
        .collect();
    per_ticker.into_iter().flatten().collect()
}
