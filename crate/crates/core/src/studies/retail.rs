use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::str::FromStr;

use super::{Cell, PeriodSpec, StudyError, StudyInputs, StudyOutput, StudyTable};
use crate::attention::{delta, log_delta, monthly_svi_series, svi_by_ticker, DeltaKind};
use crate::datamodel::{Dash5Bucket, RegressionResult, SeMethod, Ticker, YearMonth};
use crate::econ::ols_named;

/// Which Dash-5 order-size buckets are summed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SizeGroup {
    /// 100-1,999 shares: buckets 1 and 2.
    Small,
    /// 100-9,999 shares: all four buckets.
    All,
}

impl SizeGroup {
    pub fn buckets(&self) -> &'static [Dash5Bucket] {
        match self {
            SizeGroup::Small => &[Dash5Bucket::B1, Dash5Bucket::B2],
            SizeGroup::All => &Dash5Bucket::ALL,
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            SizeGroup::Small => "100-1999",
            SizeGroup::All => "100-9999",
        }
    }
}

impl fmt::Display for SizeGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for SizeGroup {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "100-1999" | "small" => Ok(SizeGroup::Small),
            "100-9999" | "all" => Ok(SizeGroup::All),
            _ => Err(format!(
                "unknown size group `{s}`; use 100-1999 or 100-9999"
            )),
        }
    }
}

pub const RETAIL_REGRESSORS: [&str; 4] = ["ΔSVI(t-1,t)", "Ret(t)", "|Abn Ret|(t)", "NewsDummy(t)"];

/// Pooled ticker-month design of the retail regressions.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RetailDesign {
    pub keys: Vec<(Ticker, YearMonth)>,
    pub d_order: Vec<f64>,
    pub d_turnover: Vec<f64>,
    /// Regressor columns in [`RETAIL_REGRESSORS`] order.
    pub x: Vec<Vec<f64>>,
}

#[derive(Debug, Default, Clone, Copy)]
struct MonthMarket {
    gross: f64,
    bench: f64,
    news: bool,
    weeks: usize,
}

/// Builds the monthly design: changes of summed bucket orders and shares
/// (log or arithmetic, per `kind`) against the log change of monthly SVI,
/// the compounded monthly return, its absolute excess over the benchmark,
/// and a news dummy.
pub fn retail_design(
    inputs: &StudyInputs,
    period: &PeriodSpec,
    group: SizeGroup,
    kind: DeltaKind,
) -> RetailDesign {
    let buckets = group.buckets();
    let mut flows: HashMap<(Ticker, YearMonth), (u64, u64, usize)> = HashMap::new();
    for r in inputs.dash5.iter().filter(|r| buckets.contains(&r.bucket)) {
        let e = flows.entry((r.ticker.clone(), r.month)).or_default();
        e.0 += r.orders;
        e.1 += r.shares;
        e.2 += 1;
    }
    let flows: HashMap<(Ticker, YearMonth), (f64, f64)> = flows
        .into_iter()
        .filter(|(_, (_, _, n))| *n == buckets.len())
        .map(|(k, (o, s, _))| (k, (o as f64, s as f64)))
        .collect();

    let mut months: BTreeMap<(Ticker, YearMonth), MonthMarket> = BTreeMap::new();
    for r in &inputs.market {
        let e = months
            .entry((r.ticker.clone(), r.week.month()))
            .or_insert(MonthMarket {
                gross: 1.0,
                bench: 1.0,
                ..Default::default()
            });
        e.gross *= 1.0 + r.ret;
        e.bench *= 1.0 + r.benchmark_ret;
        e.news |= r.news_count > 0;
        e.weeks += 1;
    }
    let svi: HashMap<Ticker, BTreeMap<YearMonth, u64>> = svi_by_ticker(&inputs.svi)
        .into_iter()
        .map(|(t, s)| (t, monthly_svi_series(&s)))
        .collect();

    let mut d = RetailDesign {
        x: vec![Vec::new(); RETAIL_REGRESSORS.len()],
        ..Default::default()
    };
    for ((ticker, m), mk) in &months {
        if !period.contains_month(*m) {
            continue;
        }
        let prev = m.pred();
        let (Some(&(o1, s1)), Some(&(o0, s0))) = (
            flows.get(&(ticker.clone(), *m)),
            flows.get(&(ticker.clone(), prev)),
        ) else {
            continue;
        };
        let Some(series) = svi.get(ticker) else {
            continue;
        };
        let (Some(&v1), Some(&v0)) = (series.get(m), series.get(&prev)) else {
            continue;
        };
        let (Ok(dord), Ok(dturn), Ok(dsvi)) = (
            delta(kind, o1, o0),
            delta(kind, s1, s0),
            log_delta(v1 as f64, v0 as f64),
        ) else {
            continue;
        };
        d.keys.push((ticker.clone(), *m));
        d.d_order.push(dord);
        d.d_turnover.push(dturn);
        d.x[0].push(dsvi);
        d.x[1].push(mk.gross - 1.0);
        d.x[2].push((mk.gross - mk.bench).abs());
        d.x[3].push(f64::from(u8::from(mk.news)));
    }
    d
}

/// Pooled OLS of ΔOrder and ΔTurnover on the monthly attention design.
pub fn run_retail_study(
    inputs: &StudyInputs,
    period: &PeriodSpec,
    group: SizeGroup,
    se: SeMethod,
    kind: DeltaKind,
) -> Result<StudyOutput<(RegressionResult, RegressionResult)>, StudyError> {
    let d = retail_design(inputs, period, group, kind);
    if d.keys.is_empty() {
        return Err(StudyError::EmptyInput(format!(
            "no ticker-months with Dash-5 and SVI data in {}",
            period.label
        )));
    }
    let names: Vec<String> = RETAIL_REGRESSORS.iter().map(|s| s.to_string()).collect();
    let orders = ols_named(&d.d_order, &d.x, &names, true)?.with_se(se);
    let turnover = ols_named(&d.d_turnover, &d.x, &names, true)?.with_se(se);

    let mut rows = orders.names.clone();
    rows.extend(["R2".to_string(), "N".to_string()]);
    let mut table = StudyTable::new(
        format!(
            "Attention and retail order flow, orders of {} shares, {}",
            group.label(),
            period.label
        ),
        rows,
        vec!["ΔOrder".into(), "ΔTurnover".into()],
    );
    for (c, r) in [&orders, &turnover].into_iter().enumerate() {
        for i in 0..r.coef.len() {
            table.set(i, c, Cell::with(r.coef[i], r.se[i], r.p[i]));
        }
        table.set(r.coef.len(), c, Cell::value(r.r2));
        table.set(r.coef.len() + 1, c, Cell::value(r.n as f64));
    }
    table.note(format!(
        "pooled OLS; parentheses: {} standard errors",
        se.label()
    ));
    let form = match kind {
        DeltaKind::Log => "log change",
        DeltaKind::Arith => "arithmetic change",
    };
    table.note(format!(
        "ΔOrder and ΔTurnover are the {form} of summed bucket orders and share volume"
    ));
    Ok(StudyOutput {
        result: (orders, turnover),
        table,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::datamodel::{Dash5Record, KeywordKind, SviObservation, WeekStamp, WeeklyMarketRow};
    use crate::econ::EconError;

    /// Two tickers over eight months; orders in bucket b of month m are
    /// `(b + 1) * (m + 10)` plus a ticker offset, SVI follows `svi(m)`.
    fn fixture(svi: impl Fn(usize, usize) -> u32) -> StudyInputs {
        let mut inp = StudyInputs::default();
        let start: WeekStamp = "2010-01-04".parse().unwrap();
        let mut week = start;
        let last = YearMonth::new(2010, 8).unwrap();
        while week.month() <= last {
            for (i, t) in ["AAA", "BBB"].into_iter().enumerate() {
                let m = week.month().month() as usize;
                let ticker = Ticker::new(t).unwrap();
                inp.svi.push(SviObservation { ticker: ticker.clone(), kind: KeywordKind::Ticker, week, svi: svi(i, m) });
                let r = 0.001 * ((m * 7 + i * 3) % 11) as f64 - 0.004;
                inp.market.push(WeeklyMarketRow {
                    ticker,
                    week,
                    ret: r,
                    turnover: 0.01,
                    market_cap: 1e9,
                    news_count: ((m + i) % 3) as u32,
                    benchmark_ret: 0.0005,
                });
            }
            week = week.succ();
        }
        for (i, t) in ["AAA", "BBB"].into_iter().enumerate() {
            for m in 1..=8 {
                for (b, bucket) in Dash5Bucket::ALL.into_iter().enumerate() {
                    let orders = ((b + 1) * (m + 10) + 5 * i + (m * m * (b + 2)) % 7) as u64;
                    inp.dash5.push(Dash5Record {
                        ticker: Ticker::new(t).unwrap(),
                        month: YearMonth::new(2010, m as u32).unwrap(),
                        bucket,
                        orders,
                        shares: orders * 200 + (m * b) as u64,
                        total_shares: 1_000_000,
                    });
                }
            }
        }
        inp
    }

    fn varied(i: usize, m: usize) -> u32 {
        (30 + 7 * m + 11 * i + (m * m) % 5) as u32
    }

    #[test]
    fn small_group_sums_first_two_buckets() {
        let inp = fixture(varied);
        let d = retail_design(&inp, &PeriodSpec::all(), SizeGroup::Small, DeltaKind::Log);
        let orders = |t: &str, m: u32| -> f64 {
            inp.dash5
                .iter()
                .filter(|r| r.ticker.as_str() == t && r.month == YearMonth::new(2010, m).unwrap())
                .filter(|r| matches!(r.bucket, Dash5Bucket::B1 | Dash5Bucket::B2))
                .map(|r| r.orders as f64)
                .sum()
        };
        let (t, m) = (&d.keys[0].0, d.keys[0].1);
        assert_eq!((t.as_str(), m), ("AAA", YearMonth::new(2010, 2).unwrap()));
        assert!((d.d_order[0] - (orders("AAA", 2) / orders("AAA", 1)).ln()).abs() < 1e-12);
        // Seven month pairs per ticker.
        assert_eq!(d.keys.len(), 14);

        let arith = retail_design(&inp, &PeriodSpec::all(), SizeGroup::Small, DeltaKind::Arith);
        assert_eq!(arith.d_order[0], orders("AAA", 2) - orders("AAA", 1));
        assert_eq!(arith.x, d.x);
    }

    #[test]
    fn constant_search_volume_is_rank_deficient() {
        // Monthly SVI sums weekly values, so hold the monthly sum at 200.
        let mondays = |m: usize| {
            let mut w: WeekStamp = "2010-01-04".parse().unwrap();
            let mut n = 0;
            while w.month() <= YearMonth::new(2010, 8).unwrap() {
                n += usize::from(w.month().month() as usize == m);
                w = w.succ();
            }
            n as u32
        };
        let inp = fixture(|_, m| 200 / mondays(m));
        let d = retail_design(&inp, &PeriodSpec::all(), SizeGroup::All, DeltaKind::Log);
        assert!(d.x[0].iter().all(|v| *v == 0.0));
        let err = run_retail_study(&inp, &PeriodSpec::all(), SizeGroup::All, SeMethod::Hc1, DeltaKind::Log).unwrap_err();
        assert!(matches!(err, StudyError::Econ(EconError::RankDeficient)), "{err:?}");
    }

    #[test]
    fn size_group_parsing() {
        assert_eq!("100-1999".parse::<SizeGroup>().unwrap(), SizeGroup::Small);
        assert_eq!("100-9999".parse::<SizeGroup>().unwrap(), SizeGroup::All);
        assert!("100-500".parse::<SizeGroup>().is_err());
        assert_eq!(SizeGroup::Small.buckets().len(), 2);
    }
}
