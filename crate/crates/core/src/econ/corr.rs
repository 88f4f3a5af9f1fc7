use super::EconError;

/// Minimum pairwise-complete overlap for a correlation.
pub const MIN_OVERLAP: usize = 8;

#[derive(Debug, Clone, PartialEq)]
pub struct CorrMatrix {
    pub names: Vec<String>,
    pub values: Vec<Vec<f64>>,
    /// Pairwise-complete observation counts.
    pub n: Vec<Vec<usize>>,
}

impl CorrMatrix {
    pub fn get(&self, a: &str, b: &str) -> Option<f64> {
        let i = self.names.iter().position(|n| n == a)?;
        let j = self.names.iter().position(|n| n == b)?;
        Some(self.values[i][j])
    }

    /// Rows of the lower triangle, diagonal included.
    pub fn lower_triangle(&self) -> Vec<Vec<f64>> {
        self.values
            .iter()
            .enumerate()
            .map(|(i, r)| r[..=i].to_vec())
            .collect()
    }
}

/// Pearson correlation of two complete, equal-length samples.
pub fn pearson(x: &[f64], y: &[f64]) -> Result<f64, EconError> {
    if x.len() != y.len() {
        return Err(EconError::DimensionMismatch(format!(
            "{} vs {}",
            x.len(),
            y.len()
        )));
    }
    if x.len() < 2 {
        return Err(EconError::TooFewObservations {
            needed: 2,
            found: x.len(),
        });
    }
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        let (dx, dy) = (a - mx, b - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx <= 0.0 || syy <= 0.0 {
        return Err(EconError::ZeroVariance(
            "constant series in correlation".into(),
        ));
    }
    Ok((sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0))
}

/// Pearson matrix over aligned series using pairwise-complete observations.
pub fn corr_matrix(series: &[(String, Vec<Option<f64>>)]) -> Result<CorrMatrix, EconError> {
    if series.is_empty() {
        return Err(EconError::EmptyInput);
    }
    let len = series[0].1.len();
    if let Some((name, _)) = series.iter().find(|(_, s)| s.len() != len) {
        return Err(EconError::DimensionMismatch(format!(
            "series `{name}` is not aligned"
        )));
    }
    let k = series.len();
    let mut values = vec![vec![1.0; k]; k];
    let mut counts = vec![vec![0usize; k]; k];
    for i in 0..k {
        counts[i][i] = series[i].1.iter().filter(|v| v.is_some()).count();
        for j in 0..i {
            let (x, y): (Vec<f64>, Vec<f64>) = series[i]
                .1
                .iter()
                .zip(&series[j].1)
                .filter_map(|(a, b)| Some(((*a)?, (*b)?)))
                .unzip();
            if x.len() < MIN_OVERLAP {
                return Err(EconError::InsufficientOverlap {
                    a: series[i].0.clone(),
                    b: series[j].0.clone(),
                    n: x.len(),
                    needed: MIN_OVERLAP,
                });
            }
            let r = pearson(&x, &y).map_err(|_| {
                EconError::ZeroVariance(format!(
                    "`{}` or `{}` is constant on the overlap",
                    series[i].0, series[j].0
                ))
            })?;
            values[i][j] = r;
            values[j][i] = r;
            counts[i][j] = x.len();
            counts[j][i] = x.len();
        }
    }
    Ok(CorrMatrix {
        names: series.iter().map(|(n, _)| n.clone()).collect(),
        values,
        n: counts,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn fixture30() -> (Vec<f64>, Vec<f64>) {
        let x: Vec<f64> = (0..30)
            .map(|i| ((i * 37 % 29) as f64).sqrt() + i as f64 * 0.1)
            .collect();
        let y: Vec<f64> = (0..30)
            .map(|i| ((i * 11 % 13) as f64) - 0.3 * x[i])
            .collect();
        (x, y)
    }

    #[test]
    fn self_and_negation() {
        let (x, _) = fixture30();
        let neg: Vec<f64> = x.iter().map(|v| -v).collect();
        assert_eq!(pearson(&x, &x).unwrap(), 1.0);
        assert_eq!(pearson(&x, &neg).unwrap(), -1.0);
    }

    #[test]
    fn matches_covariance_formula() {
        // cov / (sd sd) using the one-pass raw-moment formulas with n-1.
        let (x, y) = fixture30();
        let n = 30.0;
        let sx: f64 = x.iter().sum();
        let sy: f64 = y.iter().sum();
        let sxy: f64 = x.iter().zip(&y).map(|(a, b)| a * b).sum();
        let sxx: f64 = x.iter().map(|a| a * a).sum();
        let syy: f64 = y.iter().map(|a| a * a).sum();
        let cov = (sxy - sx * sy / n) / (n - 1.0);
        let vx = (sxx - sx * sx / n) / (n - 1.0);
        let vy = (syy - sy * sy / n) / (n - 1.0);
        let want = cov / (vx * vy).sqrt();
        assert!((pearson(&x, &y).unwrap() - want).abs() < 1e-12);
    }

    #[test]
    fn pairwise_complete_and_overlap() {
        let (x, y) = fixture30();
        let xs: Vec<Option<f64>> = x
            .iter()
            .enumerate()
            .map(|(i, v)| (i % 5 != 0).then_some(*v))
            .collect();
        let ys: Vec<Option<f64>> = y
            .iter()
            .enumerate()
            .map(|(i, v)| (i % 7 != 0).then_some(*v))
            .collect();
        let m = corr_matrix(&[("x".into(), xs.clone()), ("y".into(), ys.clone())]).unwrap();
        let keep: Vec<usize> = (0..30).filter(|i| i % 5 != 0 && i % 7 != 0).collect();
        let want = pearson(
            &keep.iter().map(|&i| x[i]).collect::<Vec<_>>(),
            &keep.iter().map(|&i| y[i]).collect::<Vec<_>>(),
        )
        .unwrap();
        assert_eq!(m.values[1][0], want);
        assert_eq!(m.n[0][1], keep.len());
        assert_eq!(m.get("y", "x"), Some(want));
        assert_eq!(m.lower_triangle()[1].len(), 2);

        let sparse: Vec<Option<f64>> = (0..30).map(|i| (i < 7).then_some(i as f64)).collect();
        assert!(matches!(
            corr_matrix(&[("x".into(), xs), ("s".into(), sparse)]),
            Err(EconError::InsufficientOverlap { n: 5, .. })
        ));
    }

    proptest! {
        #[test]
        fn matrix_is_symmetric_unit_diag(data in prop::collection::vec(prop::collection::vec(-50.0f64..50.0, 3), 10..40)) {
            let series: Vec<(String, Vec<Option<f64>>)> = (0..3)
                .map(|j| (format!("s{j}"), data.iter().map(|r| Some(r[j])).collect()))
                .collect();
            if let Ok(m) = corr_matrix(&series) {
                for i in 0..3 {
                    prop_assert_eq!(m.values[i][i], 1.0);
                    for j in 0..3 {
                        prop_assert_eq!(m.values[i][j], m.values[j][i]);
                        prop_assert!((-1.0..=1.0).contains(&m.values[i][j]));
                    }
                }
            }
        }
    }
}
