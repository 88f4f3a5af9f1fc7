use nalgebra::{DMatrix, DVector};

use super::{t_two_sided_p, EconError};
use crate::datamodel::{RegressionResult, SeMethod};

pub const INTERCEPT: &str = "Intercept";

/// Relative pivot size below which a scaled column counts as collinear.
const RANK_TOL: f64 = 1e-10;

/// Least squares of `y` on the regressor `columns`, named `x1, x2, ...`.
pub fn ols(
    y: &[f64],
    columns: &[Vec<f64>],
    intercept: bool,
) -> Result<RegressionResult, EconError> {
    let names: Vec<String> = (1..=columns.len()).map(|i| format!("x{i}")).collect();
    ols_named(y, columns, &names, intercept)
}

/// Least squares with both conventional and HC1 standard errors. The result
/// reports conventional errors in `se`; use [`RegressionResult::with_se`] to
/// switch.
pub fn ols_named(
    y: &[f64],
    columns: &[Vec<f64>],
    names: &[String],
    intercept: bool,
) -> Result<RegressionResult, EconError> {
    let n = y.len();
    if names.len() != columns.len() {
        return Err(EconError::DimensionMismatch(format!(
            "{} names for {} columns",
            names.len(),
            columns.len()
        )));
    }
    if let Some(c) = columns.iter().find(|c| c.len() != n) {
        return Err(EconError::DimensionMismatch(format!(
            "column of length {} vs y of {n}",
            c.len()
        )));
    }
    let p = columns.len() + usize::from(intercept);
    if p == 0 {
        return Err(EconError::DimensionMismatch("no regressors".into()));
    }
    if n <= p {
        return Err(EconError::TooFewObservations {
            needed: p,
            found: n,
        });
    }

    let mut all_names = Vec::with_capacity(p);
    if intercept {
        all_names.push(INTERCEPT.to_string());
    }
    all_names.extend(names.iter().cloned());

    let x = DMatrix::from_fn(n, p, |i, j| {
        if intercept {
            if j == 0 {
                1.0
            } else {
                columns[j - 1][i]
            }
        } else {
            columns[j][i]
        }
    });

    // Unit-norm columns keep the rank test scale free.
    let norms: Vec<f64> = (0..p).map(|j| x.column(j).norm()).collect();
    if norms.iter().any(|&s| !(s > 0.0) || !s.is_finite()) {
        return Err(EconError::RankDeficient);
    }
    let mut xs = x.clone();
    for (j, s) in norms.iter().enumerate() {
        xs.column_mut(j).scale_mut(1.0 / s);
    }
    let qr = xs.qr();
    let r = qr.r();
    let max_diag = (0..p).map(|j| r[(j, j)].abs()).fold(0.0, f64::max);
    if (0..p).any(|j| r[(j, j)].abs() <= RANK_TOL * max_diag) {
        return Err(EconError::RankDeficient);
    }
    let yv = DVector::from_column_slice(y);
    let qty = qr.q().transpose() * &yv;
    let beta_s = r
        .solve_upper_triangular(&qty)
        .ok_or(EconError::RankDeficient)?;
    let r_inv = r
        .solve_upper_triangular(&DMatrix::identity(p, p))
        .ok_or(EconError::RankDeficient)?;
    // (X'X)^-1 in the original scale: D^-1 R^-1 R^-T D^-1
    let mut xtx_inv = &r_inv * r_inv.transpose();
    for i in 0..p {
        for j in 0..p {
            xtx_inv[(i, j)] /= norms[i] * norms[j];
        }
    }
    let beta: Vec<f64> = (0..p).map(|j| beta_s[j] / norms[j]).collect();
    let fitted = &x * DVector::from_column_slice(&beta);
    let resid: Vec<f64> = y.iter().zip(fitted.iter()).map(|(a, b)| a - b).collect();
    let ssr: f64 = resid.iter().map(|e| e * e).sum();
    let df = (n - p) as f64;

    let s2 = ssr / df;
    let se_conventional: Vec<f64> = (0..p)
        .map(|j| (s2 * xtx_inv[(j, j)]).max(0.0).sqrt())
        .collect();

    let mut meat = DMatrix::<f64>::zeros(p, p);
    for (i, e) in resid.iter().enumerate() {
        let e2 = e * e;
        for a in 0..p {
            let xa = x[(i, a)] * e2;
            for b in 0..=a {
                meat[(a, b)] += xa * x[(i, b)];
            }
        }
    }
    for a in 0..p {
        for b in 0..a {
            meat[(b, a)] = meat[(a, b)];
        }
    }
    let hc1 = &xtx_inv * meat * &xtx_inv * (n as f64 / df);
    let se_hc1: Vec<f64> = (0..p).map(|j| hc1[(j, j)].max(0.0).sqrt()).collect();

    let r2 = if intercept {
        let ybar = y.iter().sum::<f64>() / n as f64;
        let sst: f64 = y.iter().map(|v| (v - ybar).powi(2)).sum();
        if sst > 0.0 {
            1.0 - ssr / sst
        } else {
            0.0
        }
    } else {
        let sst: f64 = y.iter().map(|v| v * v).sum();
        if sst > 0.0 {
            1.0 - ssr / sst
        } else {
            0.0
        }
    };

    let mut out = RegressionResult {
        names: all_names,
        coef: beta,
        se: Vec::new(),
        t: Vec::new(),
        p: Vec::new(),
        se_conventional,
        se_hc1,
        r2: r2.clamp(0.0, 1.0),
        n,
        method: SeMethod::Conventional,
    };
    out.select_se(SeMethod::Conventional);
    Ok(out)
}

impl RegressionResult {
    /// Same fit with `se`, `t` and `p` taken from the chosen estimator.
    pub fn with_se(mut self, method: SeMethod) -> Self {
        self.select_se(method);
        self
    }

    fn select_se(&mut self, method: SeMethod) {
        self.method = method;
        self.se = match method {
            SeMethod::Conventional => self.se_conventional.clone(),
            SeMethod::Hc1 => self.se_hc1.clone(),
        };
        let df = (self.n - self.coef.len()) as f64;
        self.t = self
            .coef
            .iter()
            .zip(&self.se)
            .map(|(&c, &s)| t_stat(c, s))
            .collect();
        self.p = self.t.iter().map(|&t| t_two_sided_p(t, df)).collect();
    }
}

/// `coef / se`, with exact fits mapped to 0 or +-inf.
pub(crate) fn t_stat(coef: f64, se: f64) -> f64 {
    if se > 0.0 {
        coef / se
    } else if coef == 0.0 {
        0.0
    } else {
        f64::INFINITY.copysign(coef)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn exact_line() {
        let x = vec![vec![1.0, 2.0, 3.0, 4.0, 5.0]];
        let y: Vec<f64> = x[0].iter().map(|v| 2.0 * v).collect();
        let r = ols(&y, &x, true).unwrap();
        assert!((r.coef[1] - 2.0).abs() < 1e-12);
        assert!(r.coef[0].abs() < 1e-12);
        assert!((r.r2 - 1.0).abs() < 1e-12);
        assert!(r.p[1] < 1e-30);
    }

    #[test]
    fn constant_y() {
        let x = vec![vec![1.0, 2.0, 3.0, 4.0, 5.0]];
        let r = ols(&[3.0; 5], &x, true).unwrap();
        assert!(r.coef[1].abs() < 1e-12);
        assert_eq!(r.r2, 0.0);
    }

    /// Normal equations solved by hand with Gaussian elimination.
    fn normal_equations(y: &[f64], cols: &[Vec<f64>]) -> Vec<f64> {
        let n = y.len();
        let mut xs: Vec<Vec<f64>> = vec![vec![1.0; n]];
        xs.extend(cols.iter().cloned());
        let p = xs.len();
        let mut a = vec![vec![0.0; p + 1]; p];
        for i in 0..p {
            for j in 0..p {
                a[i][j] = (0..n).map(|t| xs[i][t] * xs[j][t]).sum();
            }
            a[i][p] = (0..n).map(|t| xs[i][t] * y[t]).sum();
        }
        for c in 0..p {
            let piv = (c..p)
                .max_by(|&i, &j| a[i][c].abs().total_cmp(&a[j][c].abs()))
                .unwrap();
            a.swap(c, piv);
            for r in 0..p {
                if r != c {
                    let f = a[r][c] / a[c][c];
                    for k in c..=p {
                        a[r][k] -= f * a[c][k];
                    }
                }
            }
        }
        (0..p).map(|i| a[i][p] / a[i][i]).collect()
    }

    #[test]
    fn six_point_fixture_matches_normal_equations() {
        let x1 = vec![1.0, 2.0, 4.0, 3.0, 7.0, 5.5];
        let x2 = vec![0.5, -1.0, 2.0, 0.0, 1.5, -0.5];
        let y = vec![3.1, 2.2, 9.8, 5.1, 14.9, 8.0];
        let want = normal_equations(&y, &[x1.clone(), x2.clone()]);
        let got = ols(&y, &[x1, x2], true).unwrap();
        for (g, w) in got.coef.iter().zip(&want) {
            assert!((g - w).abs() < 1e-10, "{g} vs {w}");
        }
    }

    #[test]
    fn rank_deficiency_detected() {
        let x1 = vec![1.0, 2.0, 3.0, 4.0];
        let x2: Vec<f64> = x1.iter().map(|v| 3.0 * v).collect();
        assert_eq!(
            ols(&[1.0, 2.0, 2.5, 4.0], &[x1, x2], true).unwrap_err(),
            EconError::RankDeficient
        );
        assert_eq!(
            ols(&[1.0, 2.0, 2.5, 4.0], &[vec![0.0; 4]], true).unwrap_err(),
            EconError::RankDeficient
        );
        assert_eq!(
            ols(&[1.0, 2.0, 2.5, 4.0], &[vec![5.0; 4]], true).unwrap_err(),
            EconError::RankDeficient
        );
        assert!(matches!(
            ols(&[1.0, 2.0], &[vec![1.0, 2.0]], true).unwrap_err(),
            EconError::TooFewObservations { .. }
        ));
    }

    #[test]
    fn hc1_matches_sandwich_by_hand_for_slope_only_model() {
        // No intercept, one regressor: Var = n/(n-1) * sum x^2 e^2 / (sum x^2)^2
        let x = vec![1.0, 2.0, -1.0, 3.0, 0.5];
        let y = vec![1.2, 1.9, -0.7, 3.4, 0.3];
        let r = ols(&y, &[x.clone()], false).unwrap().with_se(SeMethod::Hc1);
        let sxx: f64 = x.iter().map(|v| v * v).sum();
        let b: f64 = x.iter().zip(&y).map(|(a, b)| a * b).sum::<f64>() / sxx;
        let meat: f64 = x
            .iter()
            .zip(&y)
            .map(|(a, c)| a * a * (c - b * a).powi(2))
            .sum();
        let want = (5.0 / 4.0 * meat / (sxx * sxx)).sqrt();
        assert!((r.se[0] - want).abs() < 1e-12);
        assert_eq!(r.method, SeMethod::Hc1);
    }

    proptest! {
        #[test]
        fn residuals_orthogonal_to_regressors(
            rows in prop::collection::vec((-10.0f64..10.0, -10.0f64..10.0, -50.0f64..50.0), 8..40)
        ) {
            let x1: Vec<f64> = rows.iter().map(|r| r.0).collect();
            let x2: Vec<f64> = rows.iter().map(|r| r.1 * r.0.abs().sqrt() + r.1).collect();
            let y: Vec<f64> = rows.iter().map(|r| r.2).collect();
            if let Ok(fit) = ols(&y, &[x1.clone(), x2.clone()], true) {
                let e: Vec<f64> = (0..y.len())
                    .map(|i| y[i] - fit.coef[0] - fit.coef[1] * x1[i] - fit.coef[2] * x2[i])
                    .collect();
                let scale = y.iter().map(|v| v.abs()).fold(1.0, f64::max) * 100.0;
                for col in [vec![1.0; y.len()], x1, x2] {
                    let dot: f64 = col.iter().zip(&e).map(|(a, b)| a * b).sum();
                    prop_assert!(dot.abs() < 1e-8 * scale * y.len() as f64);
                }
                prop_assert!((0.0..=1.0).contains(&fit.r2));
                prop_assert!(fit.p.iter().all(|p| (0.0..=1.0).contains(p)));
            }
        }
    }
}
