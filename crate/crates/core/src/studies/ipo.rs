use std::collections::{BTreeMap, HashMap};

use chrono::NaiveDate;

use super::{Cell, PeriodSpec, StudyError, StudyInputs, StudyOutput, StudyTable};
use crate::attention::{compute_asvi, median, svi_by_ticker};
use crate::datamodel::{IpoNewsDay, RegressionResult, SeMethod, Ticker, WeekStamp};
use crate::econ::{ols_named, welch_t_test, WelchResult};
use crate::ingest::apply_ipo_exclusions;

/// Event weeks of the attention profile, inclusive.
pub const EVENT_WEEKS: (i64, i64) = (-8, 8);
pub const MIN_IPOS_PER_GROUP: usize = 10;

/// Final offer price over the midpoint of the filing range.
pub fn compute_price_revision(
    offer_price: f64,
    range_low: f64,
    range_high: f64,
) -> Result<f64, StudyError> {
    if !(range_low > 0.0 && range_low <= range_high && offer_price > 0.0) {
        return Err(StudyError::InvalidRange {
            offer: offer_price,
            low: range_low,
            high: range_high,
        });
    }
    Ok(offer_price / ((range_low + range_high) / 2.0))
}

/// `ln(1 + articles)` from the filing date through the day before listing.
/// `news` may hold days outside the window; they are ignored.
pub fn compute_media(
    news: &[IpoNewsDay],
    filing: NaiveDate,
    listing: NaiveDate,
) -> Result<f64, StudyError> {
    if filing >= listing {
        return Err(StudyError::EmptyWindow {
            filing: filing.to_string(),
            listing: listing.to_string(),
        });
    }
    let total: u64 = news
        .iter()
        .filter(|d| d.date >= filing && d.date < listing)
        .map(|d| d.count as u64)
        .sum();
    Ok((total as f64).ln_1p())
}

/// Weekly SVI around a listing week: `(event week, calendar week, svi)` for
/// event weeks `from..=to`, with week 0 the listing week.
pub fn event_window(
    series: &BTreeMap<WeekStamp, u32>,
    listing: WeekStamp,
    from: i64,
    to: i64,
) -> Vec<(i64, WeekStamp, Option<u32>)> {
    (from..=to)
        .map(|k| {
            let w = listing.offset(k);
            (k, w, series.get(&w).copied())
        })
        .collect()
}

/// Per-IPO variables of the event and cross-section studies.
#[derive(Debug, Clone, PartialEq)]
pub struct IpoMetrics {
    pub name: String,
    pub ticker: Option<Ticker>,
    pub listing_week: WeekStamp,
    /// ASVI of the week before the listing week.
    pub asvi_pre: Option<f64>,
    pub media: Option<f64>,
    pub price_revision: f64,
    pub log_offering_size: f64,
    pub log_asset_size: f64,
    pub industry_return: f64,
    pub day1_ret: Option<f64>,
    pub ret_w5_52: Option<f64>,
}

/// Metrics for IPOs that survive the exclusions and list inside the period.
/// The notes count what was dropped and why.
pub fn ipo_metrics(
    inputs: &StudyInputs,
    period: &PeriodSpec,
) -> Result<(Vec<IpoMetrics>, Vec<String>), StudyError> {
    let (kept, excluded) = apply_ipo_exclusions(inputs.ipos.clone());
    let svi = svi_by_ticker(&inputs.ipo_svi);
    let outcomes: HashMap<&str, (f64, f64)> = inputs
        .ipo_outcomes
        .iter()
        .map(|o| (o.name.as_str(), (o.day1_ret, o.ret_w5_52)))
        .collect();
    let mut news: HashMap<&str, Vec<IpoNewsDay>> = HashMap::new();
    for d in &inputs.ipo_news {
        news.entry(d.name.as_str()).or_default().push(d.clone());
    }
    let empty_news = Vec::new();
    let mut out = Vec::new();
    for r in kept.iter().filter(|r| period.contains(r.listing_week())) {
        let w = r.listing_week();
        let asvi_pre = r
            .ticker
            .as_ref()
            .and_then(|t| svi.get(t))
            .and_then(|s| compute_asvi(s, w.pred()).ok());
        let media = compute_media(
            news.get(r.name.as_str()).unwrap_or(&empty_news),
            r.filing_date,
            r.listing_date,
        )
        .ok();
        let outcome = outcomes.get(r.name.as_str());
        out.push(IpoMetrics {
            name: r.name.clone(),
            ticker: r.ticker.clone(),
            listing_week: w,
            asvi_pre,
            media,
            price_revision: compute_price_revision(r.offer_price, r.range_low, r.range_high)?,
            log_offering_size: r.offering_size.ln(),
            log_asset_size: r.asset_size.ln(),
            industry_return: r.industry_return,
            day1_ret: outcome.map(|o| o.0),
            ret_w5_52: outcome.map(|o| o.1),
        });
    }
    let mut notes = Vec::new();
    let mut reasons: BTreeMap<String, usize> = BTreeMap::new();
    for (_, why) in &excluded {
        *reasons.entry(why.to_string()).or_default() += 1;
    }
    for (why, n) in reasons {
        notes.push(format!("excluded {n}: {why}"));
    }
    let no_ticker = out.iter().filter(|m| m.ticker.is_none()).count();
    if no_ticker > 0 {
        notes.push(format!(
            "{no_ticker} IPOs without a listing symbol have no search history"
        ));
    }
    Ok((out, notes))
}

/// Mean and median attention by event week.
#[derive(Debug, Clone, PartialEq)]
pub struct EventProfile {
    pub weeks: Vec<i64>,
    pub mean_log_svi: Vec<f64>,
    pub median_log_svi: Vec<f64>,
    pub mean_asvi: Vec<f64>,
    pub median_asvi: Vec<f64>,
    /// IPOs contributing an ASVI value per event week.
    pub n_asvi: Vec<usize>,
}

impl EventProfile {
    /// Event week with the largest mean ASVI.
    pub fn peak_week(&self) -> Option<i64> {
        self.mean_asvi
            .iter()
            .enumerate()
            .filter(|(_, v)| v.is_finite())
            .max_by(|a, b| a.1.total_cmp(b.1))
            .map(|(i, _)| self.weeks[i])
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GroupStats {
    pub n: usize,
    pub day1_mean: f64,
    pub day1_median: f64,
    pub w5_52_mean: f64,
    pub w5_52_median: f64,
}

fn group_stats(rows: &[&IpoMetrics]) -> GroupStats {
    let d1: Vec<f64> = rows.iter().filter_map(|m| m.day1_ret).collect();
    let lr: Vec<f64> = rows.iter().filter_map(|m| m.ret_w5_52).collect();
    let mean = |v: &[f64]| {
        if v.is_empty() {
            f64::NAN
        } else {
            v.iter().sum::<f64>() / v.len() as f64
        }
    };
    GroupStats {
        n: d1.len(),
        day1_mean: mean(&d1),
        day1_median: median(&d1).unwrap_or(f64::NAN),
        w5_52_mean: mean(&lr),
        w5_52_median: median(&lr).unwrap_or(f64::NAN),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct IpoEventResult {
    pub profile: EventProfile,
    /// Median pre-IPO ASVI; High is strictly above it.
    pub split: f64,
    pub low: GroupStats,
    pub high: GroupStats,
    /// Welch test of High minus Low day-1 returns.
    pub welch: WelchResult,
}

/// Attention profile around listing, and day-1 and weeks 5-52 returns of
/// IPOs split at the median pre-listing ASVI.
pub fn run_ipo_event_study(
    inputs: &StudyInputs,
    period: &PeriodSpec,
) -> Result<StudyOutput<IpoEventResult>, StudyError> {
    let (metrics, notes) = ipo_metrics(inputs, period)?;
    if metrics.is_empty() {
        return Err(StudyError::EmptyInput(format!(
            "no IPOs in {}",
            period.label
        )));
    }
    let svi = svi_by_ticker(&inputs.ipo_svi);

    let (from, to) = EVENT_WEEKS;
    let span = (to - from + 1) as usize;
    let mut logs: Vec<Vec<f64>> = vec![Vec::new(); span];
    let mut asvis: Vec<Vec<f64>> = vec![Vec::new(); span];
    for m in &metrics {
        let Some(series) = m.ticker.as_ref().and_then(|t| svi.get(t)) else {
            continue;
        };
        for (i, (_, w, v)) in event_window(series, m.listing_week, from, to)
            .into_iter()
            .enumerate()
        {
            if let Some(v) = v.filter(|v| *v > 0) {
                logs[i].push((v as f64).ln());
            }
            if let Ok(a) = compute_asvi(series, w) {
                asvis[i].push(a);
            }
        }
    }
    let mean = |v: &Vec<f64>| {
        if v.is_empty() {
            f64::NAN
        } else {
            v.iter().sum::<f64>() / v.len() as f64
        }
    };
    let med = |v: &Vec<f64>| median(v).unwrap_or(f64::NAN);
    let profile = EventProfile {
        weeks: (from..=to).collect(),
        mean_log_svi: logs.iter().map(mean).collect(),
        median_log_svi: logs.iter().map(med).collect(),
        mean_asvi: asvis.iter().map(mean).collect(),
        median_asvi: asvis.iter().map(med).collect(),
        n_asvi: asvis.iter().map(|v| v.len()).collect(),
    };

    let usable: Vec<&IpoMetrics> = metrics
        .iter()
        .filter(|m| m.asvi_pre.is_some() && m.day1_ret.is_some())
        .collect();
    let pre: Vec<f64> = usable.iter().filter_map(|m| m.asvi_pre).collect();
    let split = median(&pre).unwrap_or(f64::NAN);
    let (high, low): (Vec<&IpoMetrics>, Vec<&IpoMetrics>) = usable
        .iter()
        .partition(|m| m.asvi_pre.expect("filtered") > split);
    if low.len() < MIN_IPOS_PER_GROUP || high.len() < MIN_IPOS_PER_GROUP {
        return Err(StudyError::TooFewIpos {
            low: low.len(),
            high: high.len(),
            needed: MIN_IPOS_PER_GROUP,
        });
    }
    let d1 = |g: &[&IpoMetrics]| g.iter().filter_map(|m| m.day1_ret).collect::<Vec<f64>>();
    let welch = welch_t_test(&d1(&high), &d1(&low))?;
    let result = IpoEventResult {
        profile,
        split,
        low: group_stats(&low),
        high: group_stats(&high),
        welch,
    };

    let mut table = StudyTable::new(
        format!(
            "First-day and weeks 5-52 returns by pre-IPO ASVI, {}",
            period.label
        ),
        vec!["Low ASVI".into(), "High ASVI".into(), "High-Low".into()],
        vec![
            "N".into(),
            "Day1 mean %".into(),
            "Day1 median %".into(),
            "W5-52 mean %".into(),
            "W5-52 median %".into(),
        ],
    );
    for (r, g) in [result.low, result.high].iter().enumerate() {
        table.set(r, 0, Cell::value(g.n as f64));
        table.set(r, 1, Cell::value(100.0 * g.day1_mean));
        table.set(r, 2, Cell::value(100.0 * g.day1_median));
        table.set(r, 3, Cell::value(100.0 * g.w5_52_mean));
        table.set(r, 4, Cell::value(100.0 * g.w5_52_median));
    }
    table.set(2, 1, Cell::with(100.0 * welch.mean_diff, welch.t, welch.p));
    table.note(format!(
        "split at median pre-IPO ASVI {}; High is strictly above",
        super::format_number(split)
    ));
    table.note("High-Low parentheses: Welch t statistic; medians are not tested");
    for n in notes {
        table.note(n);
    }
    Ok(StudyOutput { result, table })
}

pub const IPO_MAIN_VARS: [&str; 3] = ["ASVI", "Media", "PriceRevision"];
pub const IPO_CONTROLS: [&str; 3] = ["LogOfferingSize", "LogAssetSize", "IndustryReturn"];

/// One column of the day-1 cross-section: a set of named regressors.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IpoModel {
    pub label: String,
    pub vars: Vec<String>,
}

impl IpoModel {
    /// Each main variable alone, each with controls, then everything.
    pub fn standard() -> Vec<IpoModel> {
        let controls: Vec<String> = IPO_CONTROLS.iter().map(|s| s.to_string()).collect();
        let mut out = Vec::new();
        for v in IPO_MAIN_VARS {
            out.push(vec![v.to_string()]);
        }
        for v in IPO_MAIN_VARS {
            let mut vars = vec![v.to_string()];
            vars.extend(controls.iter().cloned());
            out.push(vars);
        }
        let mut all: Vec<String> = IPO_MAIN_VARS.iter().map(|s| s.to_string()).collect();
        all.extend(controls);
        out.push(all);
        out.into_iter()
            .enumerate()
            .map(|(i, vars)| IpoModel {
                label: format!("({})", i + 1),
                vars,
            })
            .collect()
    }
}

fn metric(m: &IpoMetrics, var: &str) -> Result<Option<f64>, StudyError> {
    Ok(match var {
        "ASVI" => m.asvi_pre,
        "Media" => m.media,
        "PriceRevision" => Some(m.price_revision),
        "LogOfferingSize" => Some(m.log_offering_size),
        "LogAssetSize" => Some(m.log_asset_size),
        "IndustryReturn" => Some(m.industry_return),
        other => return Err(StudyError::Input(format!("unknown IPO variable `{other}`"))),
    })
}

/// Day-1 return regressions with HC1 errors, one per model, each on its own
/// complete cases.
pub fn run_ipo_cross_section(
    inputs: &StudyInputs,
    period: &PeriodSpec,
    models: &[IpoModel],
) -> Result<StudyOutput<Vec<RegressionResult>>, StudyError> {
    if models.is_empty() || models.iter().any(|m| m.vars.is_empty()) {
        return Err(StudyError::NoRegressors);
    }
    let (metrics, notes) = ipo_metrics(inputs, period)?;
    let mut results = Vec::new();
    for model in models {
        let mut y = Vec::new();
        let mut cols: Vec<Vec<f64>> = vec![Vec::new(); model.vars.len()];
        'ipo: for m in &metrics {
            let Some(d1) = m.day1_ret else { continue };
            let mut row = Vec::with_capacity(model.vars.len());
            for v in &model.vars {
                match metric(m, v)? {
                    Some(x) => row.push(x),
                    None => continue 'ipo,
                }
            }
            y.push(d1);
            for (c, x) in cols.iter_mut().zip(row) {
                c.push(x);
            }
        }
        results.push(ols_named(&y, &cols, &model.vars, true)?.with_se(SeMethod::Hc1));
    }

    let mut rows: Vec<String> = vec![crate::econ::INTERCEPT.to_string()];
    for m in models {
        for v in &m.vars {
            if !rows.contains(v) {
                rows.push(v.clone());
            }
        }
    }
    let nvars = rows.len();
    rows.extend(["R2".to_string(), "N".to_string()]);
    let mut table = StudyTable::new(
        format!(
            "First-day IPO return on pre-IPO attention, {}",
            period.label
        ),
        rows.clone(),
        models.iter().map(|m| m.label.clone()).collect(),
    );
    for (c, r) in results.iter().enumerate() {
        for (i, name) in r.names.iter().enumerate() {
            let row = rows
                .iter()
                .position(|x| x == name)
                .expect("row per variable");
            table.set(row, c, Cell::with(r.coef[i], r.se[i], r.p[i]));
        }
        table.set(nvars, c, Cell::value(r.r2));
        table.set(nvars + 1, c, Cell::value(r.n as f64));
    }
    table.note("dependent: first-day return; parentheses: HC1 standard errors");
    for n in notes {
        table.note(n);
    }
    Ok(StudyOutput {
        result: results,
        table,
    })
}
