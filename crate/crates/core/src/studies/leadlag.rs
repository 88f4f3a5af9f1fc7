use std::collections::BTreeMap;

use rayon::prelude::*;

use super::{Cell, PeriodSpec, StudyError, StudyInputs, StudyOutput, StudyTable};
use crate::attention::{
    abnormal_return, abnormal_turnover, market_by_ticker, svi_by_ticker, TurnoverConfig,
};
use crate::datamodel::{Ticker, VarResult, WeekStamp};
use crate::econ::{
    block_bootstrap_pvalue, var1_pairs, var_aggregate, BootstrapConfig, LagSample, VAR_MIN_WEEKS,
};

pub const LEADLAG_VARS: [&str; 4] = ["SVI (log)", "Abn Turnover", "|Abn Ret|", "log(1+News)"];

/// Per-ticker VAR samples over complete weeks in the period, and tickers
/// left out with the reason.
pub fn leadlag_samples(
    inputs: &StudyInputs,
    period: &PeriodSpec,
) -> (Vec<(Ticker, LagSample)>, Vec<(Ticker, String)>) {
    let svi = svi_by_ticker(&inputs.svi);
    let market = market_by_ticker(&inputs.market);
    let cfg = TurnoverConfig::default();
    let mut kept = Vec::new();
    let mut excluded = Vec::new();
    for (ticker, weeks) in &market {
        let Some(s) = svi.get(ticker) else {
            excluded.push((ticker.clone(), "no SVI series".to_string()));
            continue;
        };
        let turnover: BTreeMap<WeekStamp, f64> =
            weeks.iter().map(|(w, r)| (*w, r.turnover)).collect();
        let mut rows = BTreeMap::new();
        for (&w, r) in weeks.iter().filter(|(w, _)| period.contains(**w)) {
            let (Some(&v), Ok(at)) = (s.get(&w), abnormal_turnover(&turnover, w, &cfg)) else {
                continue;
            };
            if v == 0 {
                continue;
            }
            let ar = abnormal_return(r.ret, r.benchmark_ret).abs();
            rows.insert(
                w,
                vec![(v as f64).ln(), at, ar, (r.news_count as f64).ln_1p()],
            );
        }
        if rows.len() < VAR_MIN_WEEKS {
            excluded.push((
                ticker.clone(),
                format!("{} complete weeks, need {VAR_MIN_WEEKS}", rows.len()),
            ));
            continue;
        }
        kept.push((ticker.clone(), LagSample::from_weekly(&rows)));
    }
    (kept, excluded)
}

/// Per-ticker VAR(1) of the four attention proxies, averaged across tickers,
/// with moving-block bootstrap p-values for every coefficient.
pub fn run_var_leadlag_study(
    inputs: &StudyInputs,
    period: &PeriodSpec,
    cfg: &BootstrapConfig,
) -> Result<StudyOutput<VarResult>, StudyError> {
    cfg.validate()?;
    let (samples, mut excluded) = leadlag_samples(inputs, period);
    let fits: Vec<_> = samples
        .par_iter()
        .map(|(t, s)| (t.clone(), var1_pairs(s, VAR_MIN_WEEKS)))
        .collect();
    let mut per_ticker = Vec::new();
    let mut panel = Vec::new();
    for ((t, fit), (_, s)) in fits.into_iter().zip(&samples) {
        match fit {
            Ok(f) => {
                per_ticker.push((t, f));
                panel.push(s.clone());
            }
            Err(e) => excluded.push((t, e.to_string())),
        }
    }
    if per_ticker.is_empty() {
        return Err(StudyError::EmptyInput(format!(
            "no ticker has {VAR_MIN_WEEKS} complete weeks in {}",
            period.label
        )));
    }
    let names: Vec<String> = LEADLAG_VARS.iter().map(|s| s.to_string()).collect();
    let mut result = var_aggregate(&names, per_ticker, excluded)?;
    let k = names.len();
    let cells: Vec<(usize, usize)> = (0..k).flat_map(|i| (0..k).map(move |j| (i, j))).collect();
    let p = block_bootstrap_pvalue(&panel, &cells, cfg)?;
    result.boot_p = Some(p.chunks(k).map(|c| c.to_vec()).collect());

    let mut cols: Vec<String> = names.iter().map(|n| format!("{n}(t-1)")).collect();
    cols.push("R2".into());
    let mut table = StudyTable::new(
        format!("VAR lead-lag of attention proxies, {}", period.label),
        names.clone(),
        cols,
    );
    let boot = result.boot_p.as_ref().expect("just set");
    for i in 0..k {
        for j in 0..k {
            table.set(
                i,
                j,
                Cell::with(result.avg_coef[i][j], boot[i][j], boot[i][j]),
            );
        }
        table.set(i, k, Cell::value(result.avg_r2[i]));
    }
    table.note("rows are equations; cells are cross-ticker mean lag-1 coefficients");
    table.note(format!(
        "parentheses: moving-block bootstrap p-values (block {} weeks, {} replicates, seed {})",
        cfg.block_len, cfg.reps, cfg.seed
    ));
    table.note(format!(
        "tickers: {} included, {} excluded",
        result.n_tickers(),
        result.excluded.len()
    ));
    Ok(StudyOutput { result, table })
}
