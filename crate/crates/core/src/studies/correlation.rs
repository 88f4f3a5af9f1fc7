use std::collections::BTreeMap;

use super::{PeriodSpec, StudyError, StudyInputs, StudyOutput, StudyTable};
use crate::attention::{
    abnormal_return, abnormal_turnover, market_by_ticker, svi_by_ticker, TurnoverConfig,
};
use crate::econ::{corr_matrix, CorrMatrix};
use crate::studies::Cell;

pub const CORR_VARS: [&str; 5] = ["SVI", "NAME_SVI", "|Abn Ret|", "Abn Turnover", "News"];

/// Pooled weekly Pearson matrix across all ticker-weeks in the period.
/// Zero SVI readings count as missing.
pub fn run_correlation_study(
    inputs: &StudyInputs,
    period: &PeriodSpec,
) -> Result<StudyOutput<CorrMatrix>, StudyError> {
    let svi = svi_by_ticker(&inputs.svi);
    let name = svi_by_ticker(&inputs.name_svi);
    let market = market_by_ticker(&inputs.market);
    let cfg = TurnoverConfig::default();
    let empty = BTreeMap::new();

    let mut cols: Vec<Vec<Option<f64>>> = vec![Vec::new(); CORR_VARS.len()];
    for (ticker, weeks) in &market {
        let s = svi.get(ticker).unwrap_or(&empty);
        let n = name.get(ticker).unwrap_or(&empty);
        let turnover: BTreeMap<_, f64> = weeks.iter().map(|(w, r)| (*w, r.turnover)).collect();
        for (&w, row) in weeks.iter().filter(|(w, _)| period.contains(**w)) {
            let level = |m: &BTreeMap<_, u32>| m.get(&w).filter(|v| **v > 0).map(|&v| v as f64);
            cols[0].push(level(s));
            cols[1].push(level(n));
            cols[2].push(Some(abnormal_return(row.ret, row.benchmark_ret).abs()));
            cols[3].push(abnormal_turnover(&turnover, w, &cfg).ok());
            cols[4].push(Some(row.news_count as f64));
        }
    }
    if cols[0].is_empty() {
        return Err(StudyError::EmptyInput(format!(
            "no market rows in {}",
            period.label
        )));
    }
    let series: Vec<(String, Vec<Option<f64>>)> =
        CORR_VARS.iter().map(|s| s.to_string()).zip(cols).collect();
    let m = corr_matrix(&series)?;

    let labels: Vec<String> = CORR_VARS.iter().map(|s| s.to_string()).collect();
    let mut table = StudyTable::new(
        format!(
            "Correlation of SVI with existing attention measures, {}",
            period.label
        ),
        labels.clone(),
        labels,
    );
    for i in 0..CORR_VARS.len() {
        for j in 0..=i {
            table.set(i, j, Cell::value(m.values[i][j]));
        }
    }
    table.note(format!(
        "pooled weekly observations; pairwise-complete n = {} (SVI, NAME_SVI)",
        m.n[1][0]
    ));
    table.note(format!("ticker-weeks in period: {}", series[0].1.len()));
    Ok(StudyOutput { result: m, table })
}
