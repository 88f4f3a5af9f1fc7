use super::ols::t_stat;
use super::{mean, newey_west_se_of_mean, ols_named, t_two_sided_p_or_normal, EconError};
use crate::attention::cross_sectional_standardize;
use crate::datamodel::{FmbResult, Horizon, WeekStamp};

/// One week's complete-case cross-section. `x` holds one column per base
/// variable, each the same length as `y`.
#[derive(Debug, Clone, PartialEq)]
pub struct CrossSection {
    pub week: WeekStamp,
    pub y: Vec<f64>,
    pub x: Vec<Vec<f64>>,
}

/// A regressor built from the base columns of a [`CrossSection`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Term {
    Var(usize),
    /// Product of two base variables. Under standardization the bases are
    /// z-scored first and the product is z-scored again.
    Product(usize, usize),
}

#[derive(Debug, Clone, PartialEq)]
pub struct FmbOptions {
    pub horizon: Horizon,
    pub nw_lags: usize,
    pub min_weeks: usize,
    pub standardize: bool,
}

impl Default for FmbOptions {
    fn default() -> Self {
        FmbOptions {
            horizon: Horizon::W1,
            nw_lags: 4,
            min_weeks: 10,
            standardize: true,
        }
    }
}

fn zscore(col: &[f64]) -> Result<Vec<f64>, String> {
    let wrapped: Vec<Option<f64>> = col.iter().map(|&v| Some(v)).collect();
    cross_sectional_standardize(&wrapped)
        .map(|z| {
            z.into_iter()
                .map(|v| v.expect("no missing values"))
                .collect()
        })
        .map_err(|e| e.to_string())
}

fn build_regressors(
    cs: &CrossSection,
    terms: &[Term],
    standardize: bool,
) -> Result<Vec<Vec<f64>>, String> {
    let mut base: Vec<Option<Vec<f64>>> = vec![None; cs.x.len()];
    let mut get = |i: usize| -> Result<Vec<f64>, String> {
        if i >= cs.x.len() {
            return Err(format!("term references column {i} of {}", cs.x.len()));
        }
        if base[i].is_none() {
            base[i] = Some(if standardize {
                zscore(&cs.x[i])?
            } else {
                cs.x[i].clone()
            });
        }
        Ok(base[i].clone().expect("just filled"))
    };
    let mut out = Vec::with_capacity(terms.len());
    for t in terms {
        match *t {
            Term::Var(i) => out.push(get(i)?),
            Term::Product(i, j) => {
                let a = get(i)?;
                let b = get(j)?;
                let prod: Vec<f64> = a.iter().zip(&b).map(|(u, v)| u * v).collect();
                out.push(if standardize { zscore(&prod)? } else { prod });
            }
        }
    }
    Ok(out)
}

/// Weekly cross-sectional OLS (with intercept) of `y` on the terms, then
/// time-series means of the slopes with Newey-West standard errors. Weeks
/// whose cross-section is degenerate are skipped and recorded.
pub fn fama_macbeth(
    sections: &[CrossSection],
    terms: &[Term],
    names: &[String],
    opts: &FmbOptions,
) -> Result<FmbResult, EconError> {
    if names.len() != terms.len() {
        return Err(EconError::DimensionMismatch(format!(
            "{} names for {} terms",
            names.len(),
            terms.len()
        )));
    }
    if terms.is_empty() {
        return Err(EconError::DimensionMismatch("no regressors".into()));
    }
    let mut weeks = Vec::new();
    let mut weekly_coefs = Vec::new();
    let mut weekly_r2 = Vec::new();
    let mut skipped = Vec::new();

    for cs in sections {
        let fit = build_regressors(cs, terms, opts.standardize)
            .and_then(|cols| ols_named(&cs.y, &cols, names, true).map_err(|e| e.to_string()));
        match fit {
            Ok(r) => {
                weeks.push(cs.week);
                weekly_coefs.push(r.coef[1..].to_vec());
                weekly_r2.push(r.r2);
            }
            Err(why) => skipped.push((cs.week, why)),
        }
    }

    let t_used = weeks.len();
    if t_used == 0 {
        return Err(EconError::AllWeeksDegenerate);
    }
    if t_used < opts.min_weeks {
        return Err(EconError::TooFewWeeks {
            needed: opts.min_weeks,
            found: t_used,
        });
    }

    let k = terms.len();
    let mut mean_coef = Vec::with_capacity(k);
    let mut nw_se = Vec::with_capacity(k);
    for j in 0..k {
        let series: Vec<f64> = weekly_coefs.iter().map(|c| c[j]).collect();
        mean_coef.push(mean(&series));
        nw_se.push(newey_west_se_of_mean(&series, opts.nw_lags)?);
    }
    let t: Vec<f64> = mean_coef
        .iter()
        .zip(&nw_se)
        .map(|(&c, &s)| t_stat(c, s))
        .collect();
    let df = (t_used - 1) as f64;
    let p = t.iter().map(|&v| t_two_sided_p_or_normal(v, df)).collect();

    Ok(FmbResult {
        horizon: opts.horizon,
        names: names.to_vec(),
        weeks,
        r2: mean(&weekly_r2),
        weekly_coefs,
        weekly_r2,
        mean_coef,
        nw_se,
        t,
        p,
        nw_lags: opts.nw_lags,
        skipped,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::datamodel::parse_date;
    use crate::econ::ols;

    fn week(i: i64) -> WeekStamp {
        WeekStamp::of(parse_date("2012-01-02").unwrap()).offset(i)
    }

    fn base_x(n: usize, shift: usize) -> Vec<f64> {
        (0..n)
            .map(|i| (((i + shift) * 7919) % 101) as f64 / 10.0)
            .collect()
    }

    #[test]
    fn zero_noise_week_varying_beta_averages_exactly() {
        let betas = [0.5, 1.5, -0.25, 2.0, 0.75, 1.0, 0.0, 3.0, -1.0, 0.5, 1.25];
        let sections: Vec<CrossSection> = betas
            .iter()
            .enumerate()
            .map(|(w, b)| {
                let x = base_x(40, w);
                let z = zscore(&x).unwrap();
                CrossSection {
                    week: week(w as i64),
                    y: z.iter().map(|v| b * v + 1.0).collect(),
                    x: vec![x],
                }
            })
            .collect();
        let r = fama_macbeth(
            &sections,
            &[Term::Var(0)],
            &["x".into()],
            &FmbOptions::default(),
        )
        .unwrap();
        let want = betas.iter().sum::<f64>() / betas.len() as f64;
        assert!((r.mean_coef[0] - want).abs() < 1e-12);
        assert!(r.skipped.is_empty());
    }

    #[test]
    fn constant_regressor_week_is_skipped() {
        let mut sections: Vec<CrossSection> = (0..12)
            .map(|w| {
                let x = base_x(30, w);
                CrossSection {
                    week: week(w as i64),
                    y: x.iter()
                        .map(|v| 0.3 * v + ((w as f64) * 0.1).sin())
                        .collect(),
                    x: vec![x],
                }
            })
            .collect();
        sections[4].x[0] = vec![2.0; 30];
        let r = fama_macbeth(
            &sections,
            &[Term::Var(0)],
            &["x".into()],
            &FmbOptions::default(),
        )
        .unwrap();
        assert_eq!(r.weeks.len(), 11);
        assert_eq!(r.skipped.len(), 1);
        assert_eq!(r.skipped[0].0, week(4));
        assert!(r.skipped[0].1.contains("degenerate"));
    }

    #[test]
    fn single_week_reduces_to_ols() {
        let x1 = base_x(25, 3);
        let x2 = base_x(25, 11);
        let y: Vec<f64> = (0..25)
            .map(|i| x1[i] - 0.5 * x2[i] + ((i * 3 % 7) as f64))
            .collect();
        let cs = CrossSection {
            week: week(0),
            y: y.clone(),
            x: vec![x1.clone(), x2.clone()],
        };
        let opts = FmbOptions {
            min_weeks: 1,
            nw_lags: 0,
            standardize: false,
            ..Default::default()
        };
        let r = fama_macbeth(
            &[cs],
            &[Term::Var(0), Term::Var(1)],
            &["a".into(), "b".into()],
            &opts,
        )
        .unwrap();
        let direct = ols(&y, &[x1, x2], true).unwrap();
        assert_eq!(r.mean_coef, direct.coef[1..].to_vec());
    }

    #[test]
    fn standardization_rescales_coef_but_not_t() {
        // Each week permutes the same base values, so the cross-sectional
        // standard deviation is constant over time.
        let base: Vec<f64> = (0..30).map(|i| i as f64 * 0.7 + 2.0).collect();
        let sections: Vec<CrossSection> = (0..20)
            .map(|w| {
                let x: Vec<f64> = (0..30).map(|i| base[(i * 7 + w * 3) % 30]).collect();
                let y = x
                    .iter()
                    .enumerate()
                    .map(|(i, v)| 0.4 * v + (((i + w) * 13 % 17) as f64 - 8.0) * 0.9)
                    .collect();
                CrossSection {
                    week: week(w as i64),
                    y,
                    x: vec![x],
                }
            })
            .collect();
        let names = vec!["x".to_string()];
        let raw = fama_macbeth(
            &sections,
            &[Term::Var(0)],
            &names,
            &FmbOptions {
                standardize: false,
                ..Default::default()
            },
        )
        .unwrap();
        let std = fama_macbeth(&sections, &[Term::Var(0)], &names, &FmbOptions::default()).unwrap();
        let mean_b: f64 = base.iter().sum::<f64>() / 30.0;
        let sd = (base.iter().map(|v| (v - mean_b).powi(2)).sum::<f64>() / 29.0).sqrt();
        assert!((std.mean_coef[0] - raw.mean_coef[0] * sd).abs() < 1e-10);
        assert!((std.t[0] - raw.t[0]).abs() < 1e-9 * raw.t[0].abs());
    }

    #[test]
    fn errors() {
        let names = vec!["x".to_string()];
        assert_eq!(
            fama_macbeth(&[], &[Term::Var(0)], &names, &FmbOptions::default()).unwrap_err(),
            EconError::AllWeeksDegenerate
        );
        let few: Vec<CrossSection> = (0..3)
            .map(|w| {
                let x = base_x(20, w);
                CrossSection {
                    week: week(w as i64),
                    y: x.iter().map(|v| v * 2.0 + (w as f64)).collect(),
                    x: vec![x],
                }
            })
            .collect();
        assert!(matches!(
            fama_macbeth(&few, &[Term::Var(0)], &names, &FmbOptions::default()).unwrap_err(),
            EconError::TooFewWeeks {
                needed: 10,
                found: 3
            }
        ));
    }
}
