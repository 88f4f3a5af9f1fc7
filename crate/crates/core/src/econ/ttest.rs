use super::{t_two_sided_p, EconError};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WelchResult {
    pub t: f64,
    pub df: f64,
    pub p: f64,
    /// mean(a) - mean(b)
    pub mean_diff: f64,
}

fn mean_var(v: &[f64]) -> (f64, f64) {
    let n = v.len() as f64;
    let m = v.iter().sum::<f64>() / n;
    let ss = v.iter().map(|x| (x - m).powi(2)).sum::<f64>();
    (m, ss / (n - 1.0))
}

/// Welch's unequal-variance t-test with Welch-Satterthwaite df.
pub fn welch_t_test(a: &[f64], b: &[f64]) -> Result<WelchResult, EconError> {
    for s in [a, b] {
        if s.len() < 2 {
            return Err(EconError::TooFewObservations {
                needed: 2,
                found: s.len(),
            });
        }
    }
    let (ma, va) = mean_var(a);
    let (mb, vb) = mean_var(b);
    let (qa, qb) = (va / a.len() as f64, vb / b.len() as f64);
    let se2 = qa + qb;
    if se2 <= 0.0 {
        return Err(EconError::ZeroVariance("both samples are constant".into()));
    }
    let df = se2 * se2 / (qa * qa / (a.len() as f64 - 1.0) + qb * qb / (b.len() as f64 - 1.0));
    let mean_diff = ma - mb;
    let t = mean_diff / se2.sqrt();
    Ok(WelchResult {
        t,
        df,
        p: t_two_sided_p(t, df),
        mean_diff,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identical_samples() {
        let a = [1.0, 2.0, 4.0, 7.0];
        let r = welch_t_test(&a, &a).unwrap();
        assert_eq!(r.t, 0.0);
        assert!((r.p - 1.0).abs() < 1e-12);
    }

    #[test]
    fn separated_samples() {
        let a: Vec<f64> = (0..20).map(|i| 10.0 + 1e-3 * i as f64).collect();
        let b: Vec<f64> = a.iter().map(|v| v - 1.0).collect();
        let r = welch_t_test(&a, &b).unwrap();
        assert!(r.p < 0.001);
        assert!((r.mean_diff - 1.0).abs() < 1e-12);
    }

    #[test]
    fn textbook_df() {
        // Hand-computed: means 20 and 22, variances 2.5 and 10, n = 5 each.
        let a = [18.0, 19.0, 20.0, 21.0, 22.0];
        let b = [18.0, 20.0, 22.0, 24.0, 26.0];
        let r = welch_t_test(&a, &b).unwrap();
        assert!((r.t - (-2.0 / (0.5f64 + 2.0).sqrt())).abs() < 1e-12);
        assert!((r.df - 2.5f64.powi(2) / (0.25 / 4.0 + 4.0 / 4.0)).abs() < 1e-12);
    }

    #[test]
    fn errors() {
        assert!(matches!(
            welch_t_test(&[1.0], &[1.0, 2.0]),
            Err(EconError::TooFewObservations { .. })
        ));
        assert!(matches!(
            welch_t_test(&[1.0, 1.0], &[2.0, 2.0]),
            Err(EconError::ZeroVariance(_))
        ));
    }
}
