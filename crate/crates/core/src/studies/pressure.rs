use std::collections::{BTreeMap, HashMap};

use rayon::prelude::*;

use super::{Cell, PeriodSpec, StudyError, StudyInputs, StudyOutput, StudyTable};
use crate::attention::{build_attention_panel, forward_return_bps, PanelConfig};
use crate::datamodel::{FmbResult, Horizon, Ticker, WeekStamp};
use crate::econ::{fama_macbeth, CrossSection, FmbOptions, Term};

/// Regressor names and how each is built from the base columns
/// `[ASVI, LogMktCap, Dash5Pct, APSVI, |AbnRet|, NewsDummy, AbnTurnover]`.
pub const PRESSURE_TERMS: [(&str, Term); 9] = [
    ("ASVI", Term::Var(0)),
    ("LogMktCap×ASVI", Term::Product(1, 0)),
    ("LogMktCap", Term::Var(1)),
    ("Dash5Pct×ASVI", Term::Product(2, 0)),
    ("Dash5Pct", Term::Var(2)),
    ("APSVI", Term::Var(3)),
    ("|AbnRet|", Term::Var(4)),
    ("NewsDummy", Term::Var(5)),
    ("AbnTurnover", Term::Var(6)),
];

#[derive(Debug, Clone, PartialEq)]
pub struct PressureResult {
    /// One result per horizon, in [`Horizon::ALL`] order.
    pub fmb: Vec<FmbResult>,
    /// Share of distinct tickers removed by the noise filter, when applied.
    pub noise_fraction: Option<f64>,
}

impl PressureResult {
    pub fn horizon(&self, h: Horizon) -> &FmbResult {
        self.fmb
            .iter()
            .find(|r| r.horizon == h)
            .expect("every horizon is estimated")
    }
}

/// Weekly complete-case cross-sections for each horizon, for event weeks
/// inside the period. Derived variables use the full history.
pub fn pressure_sections(
    inputs: &StudyInputs,
    period: &PeriodSpec,
) -> Vec<(Horizon, Vec<CrossSection>)> {
    let panel = build_attention_panel(
        &inputs.svi,
        &inputs.product_svi,
        &inputs.market,
        &inputs.dash5,
        &PanelConfig::default(),
    );
    let mut abn: HashMap<Ticker, BTreeMap<WeekStamp, f64>> = HashMap::new();
    for r in &panel {
        abn.entry(r.ticker.clone())
            .or_default()
            .insert(r.week, r.abn_ret);
    }
    // Rows are ordered by (ticker, week), so each week lists tickers in order.
    let mut by_week: BTreeMap<WeekStamp, Vec<(&Ticker, [f64; 7])>> = BTreeMap::new();
    for r in panel.iter().filter(|r| period.contains(r.week)) {
        let (Some(asvi), Some(apsvi), Some(at), Some(d5)) =
            (r.asvi, r.apsvi, r.abn_turnover, r.dash5_pct)
        else {
            continue;
        };
        let x = [
            asvi,
            r.log_mkt_cap,
            d5,
            apsvi,
            r.abn_ret.abs(),
            f64::from(r.news_dummy),
            at,
        ];
        by_week.entry(r.week).or_default().push((&r.ticker, x));
    }

    Horizon::ALL
        .par_iter()
        .map(|&h| {
            let sections = by_week
                .iter()
                .filter_map(|(&week, rows)| {
                    let mut y = Vec::with_capacity(rows.len());
                    let mut x: Vec<Vec<f64>> = vec![Vec::with_capacity(rows.len()); 7];
                    for (t, vals) in rows {
                        let Ok(fr) = forward_return_bps(&abn[*t], week, h) else {
                            continue;
                        };
                        y.push(fr);
                        for (col, v) in x.iter_mut().zip(vals) {
                            col.push(*v);
                        }
                    }
                    (!y.is_empty()).then_some(CrossSection { week, y, x })
                })
                .collect();
            (h, sections)
        })
        .collect()
}

/// Fama-MacBeth regressions of forward abnormal returns (bps) on
/// standardized attention variables, one per horizon.
pub fn run_price_pressure_study(
    inputs: &StudyInputs,
    period: &PeriodSpec,
    drop_noise: bool,
    nw_lags: usize,
) -> Result<StudyOutput<PressureResult>, StudyError> {
    let (filtered, noise_fraction) = if drop_noise {
        let (f, frac) = inputs.drop_noise();
        (Some(f), Some(frac))
    } else {
        (None, None)
    };
    let inputs = filtered.as_ref().unwrap_or(inputs);
    let terms: Vec<Term> = PRESSURE_TERMS.iter().map(|(_, t)| *t).collect();
    let names: Vec<String> = PRESSURE_TERMS.iter().map(|(n, _)| n.to_string()).collect();

    let mut fmb = Vec::new();
    for (h, sections) in pressure_sections(inputs, period) {
        let opts = FmbOptions {
            horizon: h,
            nw_lags,
            ..Default::default()
        };
        fmb.push(fama_macbeth(&sections, &terms, &names, &opts)?);
    }
    let result = PressureResult {
        fmb,
        noise_fraction,
    };

    let mut rows = names.clone();
    rows.extend(["R2".to_string(), "Weeks".to_string()]);
    let cols = Horizon::ALL.iter().map(|h| h.label().to_string()).collect();
    let title = if drop_noise {
        format!(
            "ASVI and forward returns, Fama-MacBeth, noise tickers removed, {}",
            period.label
        )
    } else {
        format!("ASVI and forward returns, Fama-MacBeth, {}", period.label)
    };
    let mut table = StudyTable::new(title, rows, cols);
    for (c, r) in result.fmb.iter().enumerate() {
        for i in 0..names.len() {
            table.set(i, c, Cell::with(r.mean_coef[i], r.nw_se[i], r.p[i]));
        }
        table.set(names.len(), c, Cell::value(r.r2));
        table.set(names.len() + 1, c, Cell::value(r.weeks.len() as f64));
    }
    table.note(format!("dependent: forward abnormal return in bps; parentheses: Newey-West standard errors, {nw_lags} lags"));
    table.note("regressors standardized each week; interactions are products of standardized variables, standardized again");
    let skipped: Vec<String> = result
        .fmb
        .iter()
        .map(|r| format!("{} {}", r.horizon.tag(), r.skipped.len()))
        .collect();
    table.note(format!("degenerate weeks skipped: {}", skipped.join(", ")));
    if let Some(f) = noise_fraction {
        table.note(format!("noise tickers removed: fraction {}", f));
    }
    Ok(StudyOutput { result, table })
}
