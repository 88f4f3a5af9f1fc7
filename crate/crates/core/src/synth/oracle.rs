//! Deliberately plain reference estimators: explicit normal equations,
//! Gauss-Jordan inversion, textbook moment formulas and numerical
//! integration. They share no numerical code with the main path.

use crate::econ::{CrossSection, Term};

/// Inverse by Gauss-Jordan with partial pivoting; `None` when a pivot is
/// negligible relative to the largest diagonal entry.
pub fn invert(a: &[Vec<f64>]) -> Option<Vec<Vec<f64>>> {
    let n = a.len();
    let scale = (0..n).map(|i| a[i][i].abs()).fold(0.0, f64::max);
    let mut m: Vec<Vec<f64>> = a
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let mut r = row.clone();
            r.extend((0..n).map(|j| if i == j { 1.0 } else { 0.0 }));
            r
        })
        .collect();
    for col in 0..n {
        let mut best = col;
        for r in col + 1..n {
            if m[r][col].abs() > m[best][col].abs() {
                best = r;
            }
        }
        if m[best][col].abs() <= 1e-13 * scale {
            return None;
        }
        m.swap(col, best);
        let piv = m[col][col];
        for v in m[col].iter_mut() {
            *v /= piv;
        }
        for r in 0..n {
            if r != col {
                let f = m[r][col];
                if f != 0.0 {
                    for c in 0..2 * n {
                        m[r][c] -= f * m[col][c];
                    }
                }
            }
        }
    }
    Some(m.into_iter().map(|r| r[n..].to_vec()).collect())
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleOls {
    pub coef: Vec<f64>,
    pub se_conventional: Vec<f64>,
    pub se_hc1: Vec<f64>,
    pub r2: f64,
}

/// OLS via (X'X)^{-1} X'y with the intercept first when requested.
pub fn oracle_ols(y: &[f64], columns: &[Vec<f64>], intercept: bool) -> Option<OracleOls> {
    let n = y.len();
    let mut x: Vec<Vec<f64>> = Vec::with_capacity(n);
    for i in 0..n {
        let mut row = Vec::new();
        if intercept {
            row.push(1.0);
        }
        for c in columns {
            row.push(c[i]);
        }
        x.push(row);
    }
    let p = x.first()?.len();
    if n <= p {
        return None;
    }
    let mut xtx = vec![vec![0.0; p]; p];
    let mut xty = vec![0.0; p];
    for i in 0..n {
        for a in 0..p {
            xty[a] += x[i][a] * y[i];
            for b in 0..p {
                xtx[a][b] += x[i][a] * x[i][b];
            }
        }
    }
    let inv = invert(&xtx)?;
    let mut coef = vec![0.0; p];
    for a in 0..p {
        for b in 0..p {
            coef[a] += inv[a][b] * xty[b];
        }
    }
    let mut resid = vec![0.0; n];
    let mut ssr = 0.0;
    for i in 0..n {
        let mut fit = 0.0;
        for a in 0..p {
            fit += x[i][a] * coef[a];
        }
        resid[i] = y[i] - fit;
        ssr += resid[i] * resid[i];
    }
    let s2 = ssr / (n - p) as f64;
    let se_conventional = (0..p).map(|a| (s2 * inv[a][a]).sqrt()).collect();

    // Meat: sum of e_i^2 x_i x_i'.
    let mut meat = vec![vec![0.0; p]; p];
    for i in 0..n {
        for a in 0..p {
            for b in 0..p {
                meat[a][b] += resid[i] * resid[i] * x[i][a] * x[i][b];
            }
        }
    }
    let mut se_hc1 = Vec::with_capacity(p);
    for a in 0..p {
        let mut v = 0.0;
        for b in 0..p {
            for c in 0..p {
                v += inv[a][b] * meat[b][c] * inv[c][a];
            }
        }
        se_hc1.push((v * n as f64 / (n - p) as f64).sqrt());
    }

    let ybar = y.iter().sum::<f64>() / n as f64;
    let sst: f64 = if intercept {
        y.iter().map(|v| (v - ybar).powi(2)).sum()
    } else {
        y.iter().map(|v| v * v).sum()
    };
    let r2 = if sst > 0.0 {
        (1.0 - ssr / sst).clamp(0.0, 1.0)
    } else {
        0.0
    };
    Some(OracleOls {
        coef,
        se_conventional,
        se_hc1,
        r2,
    })
}

/// Bartlett-kernel long-run variance of the mean, divided by T, square-rooted.
pub fn oracle_nw_se(series: &[f64], lags: usize) -> f64 {
    let t = series.len();
    let mut mean = 0.0;
    for v in series {
        mean += v;
    }
    mean /= t as f64;
    let mut gamma = vec![0.0; lags + 1];
    for (l, g) in gamma.iter_mut().enumerate() {
        for i in l..t {
            *g += (series[i] - mean) * (series[i - l] - mean);
        }
        *g /= t as f64;
    }
    let mut lrv = gamma[0];
    for l in 1..=lags {
        lrv += 2.0 * (1.0 - l as f64 / (lags as f64 + 1.0)) * gamma[l];
    }
    (lrv / t as f64).sqrt()
}

/// Sample covariance over the product of sample standard deviations.
pub fn oracle_corr(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let (mut sx, mut sy) = (0.0, 0.0);
    for i in 0..x.len() {
        sx += x[i];
        sy += y[i];
    }
    let (mx, my) = (sx / n, sy / n);
    let (mut cxy, mut cxx, mut cyy) = (0.0, 0.0, 0.0);
    for i in 0..x.len() {
        cxy += (x[i] - mx) * (y[i] - my);
        cxx += (x[i] - mx) * (x[i] - mx);
        cyy += (y[i] - my) * (y[i] - my);
    }
    let cov = cxy / (n - 1.0);
    cov / ((cxx / (n - 1.0)).sqrt() * (cyy / (n - 1.0)).sqrt())
}

/// Lanczos approximation (g = 7, nine coefficients).
pub fn ln_gamma(x: f64) -> f64 {
    const G: f64 = 7.0;
    const C: [f64; 9] = [
        0.999_999_999_999_809_9,
        676.520_368_121_885_1,
        -1_259.139_216_722_402_8,
        771.323_428_777_653_1,
        -176.615_029_162_140_6,
        12.507_343_278_686_905,
        -0.138_571_095_265_720_12,
        9.984_369_578_019_572e-6,
        1.505_632_735_149_311_6e-7,
    ];
    if x < 0.5 {
        let pi = std::f64::consts::PI;
        return (pi / (pi * x).sin()).ln() - ln_gamma(1.0 - x);
    }
    let x = x - 1.0;
    let mut a = C[0];
    let t = x + G + 0.5;
    for (i, c) in C.iter().enumerate().skip(1) {
        a += c / (x + i as f64);
    }
    0.5 * (2.0 * std::f64::consts::PI).ln() + (x + 0.5) * t.ln() - t + a.ln()
}

fn t_density(x: f64, df: f64) -> f64 {
    let c =
        ln_gamma((df + 1.0) / 2.0) - ln_gamma(df / 2.0) - 0.5 * (df * std::f64::consts::PI).ln();
    (c - (df + 1.0) / 2.0 * (1.0 + x * x / df).ln()).exp()
}

/// Two-sided Student-t p-value by composite Simpson integration of the
/// density over `[0, |t|]`.
pub fn oracle_t_pvalue(t: f64, df: f64) -> f64 {
    let a = t.abs();
    if a == 0.0 {
        return 1.0;
    }
    let steps = 20_000;
    let h = a / steps as f64;
    let mut s = t_density(0.0, df) + t_density(a, df);
    for i in 1..steps {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        s += w * t_density(i as f64 * h, df);
    }
    (1.0 - 2.0 * s * h / 3.0).max(0.0)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleWelch {
    pub t: f64,
    pub df: f64,
    pub p: f64,
}

pub fn oracle_welch(a: &[f64], b: &[f64]) -> OracleWelch {
    let stats = |v: &[f64]| {
        let n = v.len() as f64;
        let m = v.iter().sum::<f64>() / n;
        let s2 = v.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (n - 1.0);
        (n, m, s2)
    };
    let (na, ma, va) = stats(a);
    let (nb, mb, vb) = stats(b);
    let se2 = va / na + vb / nb;
    let t = (ma - mb) / se2.sqrt();
    let df = se2 * se2 / ((va / na).powi(2) / (na - 1.0) + (vb / nb).powi(2) / (nb - 1.0));
    OracleWelch {
        t,
        df,
        p: oracle_t_pvalue(t, df),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleFmb {
    pub mean_coef: Vec<f64>,
    pub nw_se: Vec<f64>,
    pub t: Vec<f64>,
    pub used_weeks: usize,
    pub skipped_weeks: usize,
}

fn zscore(v: &[f64]) -> Option<Vec<f64>> {
    let n = v.len();
    if n < 3 {
        return None;
    }
    let mut m = 0.0;
    for x in v {
        m += x;
    }
    m /= n as f64;
    let mut ss = 0.0;
    let mut big = 0.0f64;
    for x in v {
        ss += (x - m) * (x - m);
        big = big.max(x.abs());
    }
    let sd = (ss / (n as f64 - 1.0)).sqrt();
    if !(sd > 1e-12 * big) {
        return None;
    }
    Some(v.iter().map(|x| (x - m) / sd).collect())
}

/// Week-by-week normal equations, then plain means and Bartlett errors.
pub fn oracle_fmb(
    sections: &[CrossSection],
    terms: &[Term],
    standardize: bool,
    nw_lags: usize,
) -> Option<OracleFmb> {
    let k = terms.len();
    let mut coefs: Vec<Vec<f64>> = Vec::new();
    let mut skipped = 0;
    'week: for cs in sections {
        let mut cols = Vec::with_capacity(k);
        for t in terms {
            let base = |i: usize| {
                if standardize {
                    zscore(&cs.x[i])
                } else {
                    Some(cs.x[i].clone())
                }
            };
            let col = match *t {
                Term::Var(i) => base(i),
                Term::Product(i, j) => match (base(i), base(j)) {
                    (Some(a), Some(b)) => {
                        let prod: Vec<f64> = a.iter().zip(&b).map(|(u, v)| u * v).collect();
                        if standardize {
                            zscore(&prod)
                        } else {
                            Some(prod)
                        }
                    }
                    _ => None,
                },
            };
            match col {
                Some(c) => cols.push(c),
                None => {
                    skipped += 1;
                    continue 'week;
                }
            }
        }
        match oracle_ols(&cs.y, &cols, true) {
            Some(r) => coefs.push(r.coef[1..].to_vec()),
            None => skipped += 1,
        }
    }
    if coefs.is_empty() {
        return None;
    }
    let t_used = coefs.len() as f64;
    let mut mean_coef = vec![0.0; k];
    let mut nw_se = vec![0.0; k];
    let mut tstat = vec![0.0; k];
    for j in 0..k {
        let series: Vec<f64> = coefs.iter().map(|c| c[j]).collect();
        mean_coef[j] = series.iter().sum::<f64>() / t_used;
        nw_se[j] = oracle_nw_se(&series, nw_lags);
        tstat[j] = mean_coef[j] / nw_se[j];
    }
    Some(OracleFmb {
        mean_coef,
        nw_se,
        t: tstat,
        used_weeks: coefs.len(),
        skipped_weeks: skipped,
    })
}
