use std::collections::BTreeMap;

use super::EconError;
use crate::datamodel::{Ticker, VarFit, VarResult, WeekStamp};

/// Two years of weekly data.
pub const VAR_MIN_WEEKS: usize = 104;

/// Regression rows of a VAR(1), stored flat and row-major: row `i` of
/// `current` is the k-vector at some week and row `i` of `lagged` the
/// k-vector one week earlier.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct LagSample {
    k: usize,
    current: Vec<f64>,
    lagged: Vec<f64>,
    /// Complete weeks the sample was built from.
    pub complete_weeks: usize,
}

impl LagSample {
    /// From contiguous, complete weekly rows.
    pub fn from_rows(rows: &[Vec<f64>]) -> Self {
        let mut s = LagSample {
            k: rows.first().map_or(0, |r| r.len()),
            complete_weeks: rows.len(),
            ..Default::default()
        };
        for pair in rows.windows(2) {
            s.push(&pair[1], &pair[0]);
        }
        s
    }

    /// From complete rows keyed by week; only consecutive weeks form pairs.
    pub fn from_weekly(rows: &BTreeMap<WeekStamp, Vec<f64>>) -> Self {
        let mut s = LagSample {
            k: rows.values().next().map_or(0, |r| r.len()),
            complete_weeks: rows.len(),
            ..Default::default()
        };
        for (w, row) in rows {
            if let Some(prev) = rows.get(&w.pred()) {
                s.push(row, prev);
            }
        }
        s
    }

    fn push(&mut self, current: &[f64], lagged: &[f64]) {
        assert!(
            current.len() == self.k && lagged.len() == self.k,
            "rows must share one width"
        );
        self.current.extend_from_slice(current);
        self.lagged.extend_from_slice(lagged);
    }

    pub fn len(&self) -> usize {
        if self.k == 0 {
            0
        } else {
            self.current.len() / self.k
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn current(&self, i: usize) -> &[f64] {
        &self.current[i * self.k..(i + 1) * self.k]
    }

    pub fn lagged(&self, i: usize) -> &[f64] {
        &self.lagged[i * self.k..(i + 1) * self.k]
    }
}

/// In-place Cholesky of a k x k row-major matrix (lower triangle). Fails
/// when a pivot drops below `tol`.
fn cholesky(a: &mut [f64], k: usize, tol: f64) -> bool {
    for j in 0..k {
        let mut d = a[j * k + j];
        for p in 0..j {
            d -= a[j * k + p] * a[j * k + p];
        }
        if !(d > tol) {
            return false;
        }
        let d = d.sqrt();
        a[j * k + j] = d;
        for i in j + 1..k {
            let mut v = a[i * k + j];
            for p in 0..j {
                v -= a[i * k + p] * a[j * k + p];
            }
            a[i * k + j] = v / d;
        }
    }
    true
}

fn cholesky_solve(l: &[f64], k: usize, b: &mut [f64]) {
    for i in 0..k {
        let mut v = b[i];
        for p in 0..i {
            v -= l[i * k + p] * b[p];
        }
        b[i] = v / l[i * k + i];
    }
    for i in (0..k).rev() {
        let mut v = b[i];
        for p in i + 1..k {
            v -= l[p * k + i] * b[p];
        }
        b[i] = v / l[i * k + i];
    }
}

/// Centered cross-product sums of a lag sample. `sxx` holds the lower
/// triangle of a row-major k x k matrix, `sxy[b * k + eq]` pairs lagged
/// variable `b` with equation `eq`.
struct Moments {
    n: usize,
    xbar: Vec<f64>,
    ybar: Vec<f64>,
    sxx: Vec<f64>,
    sxy: Vec<f64>,
    syy: Vec<f64>,
}

/// Fits all k equations on the rows named by `idx`. Regressors are centered
/// and scaled so the normal equations are solved on a correlation matrix.
pub(crate) fn fit_rows(sample: &LagSample, idx: &[usize]) -> Result<VarFit, EconError> {
    let k = sample.k();
    let n = idx.len();
    check_size(k, n)?;
    let nf = n as f64;
    let mut xbar = vec![0.0; k];
    let mut ybar = vec![0.0; k];
    for &i in idx {
        let (x, y) = (sample.lagged(i), sample.current(i));
        for j in 0..k {
            xbar[j] += x[j];
            ybar[j] += y[j];
        }
    }
    xbar.iter_mut().for_each(|v| *v /= nf);
    ybar.iter_mut().for_each(|v| *v /= nf);

    let mut m = Moments {
        n,
        sxx: vec![0.0; k * k],
        sxy: vec![0.0; k * k],
        syy: vec![0.0; k],
        xbar,
        ybar,
    };
    let mut dx = vec![0.0; k];
    let mut dy = vec![0.0; k];
    for &i in idx {
        let (x, y) = (sample.lagged(i), sample.current(i));
        for j in 0..k {
            dx[j] = x[j] - m.xbar[j];
            dy[j] = y[j] - m.ybar[j];
            m.syy[j] += dy[j] * dy[j];
        }
        for a in 0..k {
            for b in 0..=a {
                m.sxx[a * k + b] += dx[a] * dx[b];
            }
            for eq in 0..k {
                m.sxy[a * k + eq] += dx[a] * dy[eq];
            }
        }
    }
    solve(k, &m)
}

fn check_size(k: usize, n: usize) -> Result<(), EconError> {
    if k == 0 {
        return Err(EconError::EmptyInput);
    }
    if n <= k + 1 {
        return Err(EconError::TooFewObservations {
            needed: k + 2,
            found: n,
        });
    }
    Ok(())
}

fn solve(k: usize, m: &Moments) -> Result<VarFit, EconError> {
    let scale: Vec<f64> = (0..k).map(|j| m.sxx[j * k + j].sqrt()).collect();
    if scale.iter().any(|s| !(*s > 0.0) || !s.is_finite()) {
        return Err(EconError::RankDeficient);
    }
    let mut l = vec![0.0; k * k];
    for a in 0..k {
        for b in 0..=a {
            l[a * k + b] = m.sxx[a * k + b] / (scale[a] * scale[b]);
        }
    }
    if !cholesky(&mut l, k, 1e-10) {
        return Err(EconError::RankDeficient);
    }

    let mut coef = vec![vec![0.0; k]; k];
    let mut intercept = vec![0.0; k];
    let mut r2 = vec![0.0; k];
    let mut rhs = vec![0.0; k];
    for eq in 0..k {
        for b in 0..k {
            rhs[b] = m.sxy[b * k + eq] / scale[b];
        }
        cholesky_solve(&l, k, &mut rhs);
        let mut explained = 0.0;
        for b in 0..k {
            let beta = rhs[b] / scale[b];
            coef[eq][b] = beta;
            explained += beta * m.sxy[b * k + eq];
        }
        intercept[eq] = m.ybar[eq] - (0..k).map(|b| coef[eq][b] * m.xbar[b]).sum::<f64>();
        r2[eq] = if m.syy[eq] > 0.0 {
            (explained / m.syy[eq]).clamp(0.0, 1.0)
        } else {
            0.0
        };
    }
    Ok(VarFit {
        coef,
        intercept,
        r2,
        n: m.n,
    })
}

/// Prefix sums of per-row moments, taken after shifting the sample by its
/// full-sample means. Any union of contiguous row ranges then yields its
/// moments in O(k^2) per range instead of per row, which is what makes
/// block resampling cheap.
pub(crate) struct MomentPrefix {
    k: usize,
    rows: usize,
    shift_x: Vec<f64>,
    shift_y: Vec<f64>,
    prefix: Vec<f64>,
}

impl MomentPrefix {
    // Per-row layout: x (k), y (k), x x' (k*k), x y' (k*k), y^2 (k).
    fn width(k: usize) -> usize {
        3 * k + 2 * k * k
    }

    pub(crate) fn new(sample: &LagSample) -> Self {
        let (k, rows) = (sample.k(), sample.len());
        let denom = rows.max(1) as f64;
        let shift_x: Vec<f64> = (0..k)
            .map(|j| (0..rows).map(|i| sample.lagged(i)[j]).sum::<f64>() / denom)
            .collect();
        let shift_y: Vec<f64> = (0..k)
            .map(|j| (0..rows).map(|i| sample.current(i)[j]).sum::<f64>() / denom)
            .collect();
        let w = Self::width(k);
        let mut prefix = vec![0.0; (rows + 1) * w];
        let mut dx = vec![0.0; k];
        let mut dy = vec![0.0; k];
        for i in 0..rows {
            let (x, y) = (sample.lagged(i), sample.current(i));
            for j in 0..k {
                dx[j] = x[j] - shift_x[j];
                dy[j] = y[j] - shift_y[j];
            }
            let (done, rest) = prefix.split_at_mut((i + 1) * w);
            let prev = &done[i * w..];
            let cur = &mut rest[..w];
            let mut c = 0;
            let mut put = |v: f64, c: &mut usize| {
                cur[*c] = prev[*c] + v;
                *c += 1;
            };
            dx.iter().for_each(|&v| put(v, &mut c));
            dy.iter().for_each(|&v| put(v, &mut c));
            for a in 0..k {
                for b in 0..k {
                    put(dx[a] * dx[b], &mut c);
                }
            }
            for a in 0..k {
                for b in 0..k {
                    put(dx[a] * dy[b], &mut c);
                }
            }
            dy.iter().for_each(|&v| put(v * v, &mut c));
        }
        MomentPrefix {
            k,
            rows,
            shift_x,
            shift_y,
            prefix,
        }
    }

    pub(crate) fn len(&self) -> usize {
        self.rows
    }

    /// Fit on the concatenation of half-open row ranges.
    pub(crate) fn fit_ranges(&self, ranges: &[(usize, usize)]) -> Result<VarFit, EconError> {
        let k = self.k;
        let w = Self::width(k);
        let n: usize = ranges.iter().map(|(a, b)| b - a).sum();
        check_size(k, n)?;
        let mut s = vec![0.0; w];
        for &(a, b) in ranges {
            let (lo, hi) = (
                &self.prefix[a * w..(a + 1) * w],
                &self.prefix[b * w..(b + 1) * w],
            );
            for c in 0..w {
                s[c] += hi[c] - lo[c];
            }
        }
        let nf = n as f64;
        let mx: Vec<f64> = s[..k].iter().map(|v| v / nf).collect();
        let my: Vec<f64> = s[k..2 * k].iter().map(|v| v / nf).collect();
        let (xx, xy, yy) = (2 * k, 2 * k + k * k, 2 * k + 2 * k * k);
        let mut m = Moments {
            n,
            xbar: (0..k).map(|j| self.shift_x[j] + mx[j]).collect(),
            ybar: (0..k).map(|j| self.shift_y[j] + my[j]).collect(),
            sxx: vec![0.0; k * k],
            sxy: vec![0.0; k * k],
            syy: (0..k).map(|j| s[yy + j] - nf * my[j] * my[j]).collect(),
        };
        for a in 0..k {
            // Removing the resample mean cancels almost everything when a
            // regressor is constant within the resample.
            let raw = s[xx + a * k + a];
            let centered = raw - nf * mx[a] * mx[a];
            if !(centered > 1e-10 * raw) {
                return Err(EconError::RankDeficient);
            }
            for b in 0..=a {
                m.sxx[a * k + b] = s[xx + a * k + b] - nf * mx[a] * mx[b];
            }
            for eq in 0..k {
                m.sxy[a * k + eq] = s[xy + a * k + eq] - nf * mx[a] * my[eq];
            }
        }
        solve(k, &m)
    }
}

/// VAR(1) with intercept on contiguous complete weekly rows (T x k).
pub fn var1(series: &[Vec<f64>]) -> Result<VarFit, EconError> {
    if let Some(r) = series.iter().find(|r| r.len() != series[0].len()) {
        return Err(EconError::DimensionMismatch(format!(
            "row of width {}",
            r.len()
        )));
    }
    var1_pairs(&LagSample::from_rows(series), VAR_MIN_WEEKS)
}

/// VAR(1) on prepared lag pairs, enforcing a floor on complete weeks.
pub fn var1_pairs(sample: &LagSample, min_weeks: usize) -> Result<VarFit, EconError> {
    if sample.complete_weeks < min_weeks {
        return Err(EconError::TooFewObservations {
            needed: min_weeks,
            found: sample.complete_weeks,
        });
    }
    let idx: Vec<usize> = (0..sample.len()).collect();
    fit_rows(sample, &idx)
}

/// Cell-wise mean of the per-ticker coefficient matrices and R².
pub fn var_aggregate(
    names: &[String],
    per_ticker: Vec<(Ticker, VarFit)>,
    excluded: Vec<(Ticker, String)>,
) -> Result<VarResult, EconError> {
    let Some((_, first)) = per_ticker.first() else {
        return Err(EconError::EmptyInput);
    };
    let k = first.coef.len();
    if names.len() != k || per_ticker.iter().any(|(_, f)| f.coef.len() != k) {
        return Err(EconError::DimensionMismatch(
            "inconsistent VAR dimensions".into(),
        ));
    }
    let m = per_ticker.len() as f64;
    let mut avg_coef = vec![vec![0.0; k]; k];
    let mut avg_r2 = vec![0.0; k];
    for (_, f) in &per_ticker {
        for i in 0..k {
            avg_r2[i] += f.r2[i];
            for j in 0..k {
                avg_coef[i][j] += f.coef[i][j];
            }
        }
    }
    avg_coef.iter_mut().flatten().for_each(|v| *v /= m);
    avg_r2.iter_mut().for_each(|v| *v /= m);
    Ok(VarResult {
        names: names.to_vec(),
        per_ticker,
        avg_coef,
        avg_r2,
        boot_p: None,
        excluded,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::econ::ols;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use rand_distr::StandardNormal;

    fn noise(rng: &mut ChaCha8Rng) -> f64 {
        rng.sample(StandardNormal)
    }

    #[test]
    fn exact_recursion_recovers_half() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut rows = Vec::new();
        let mut x = 1e6;
        for _ in 0..120 {
            rows.push(vec![x, noise(&mut rng), noise(&mut rng)]);
            x *= 0.5;
        }
        let fit = var1(&rows).unwrap();
        assert!((fit.coef[0][0] - 0.5).abs() < 1e-10, "{}", fit.coef[0][0]);
        assert!(fit.coef[0][1].abs() < 1e-10 && fit.coef[0][2].abs() < 1e-10);
        assert!((fit.r2[0] - 1.0).abs() < 1e-9);
    }

    #[test]
    fn matches_equation_by_equation_ols() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let mut rows = vec![vec![0.0, 0.0, 0.0]];
        for t in 1..150 {
            let p = rows[t - 1].clone();
            rows.push(vec![
                0.4 * p[0] + 0.1 * p[2] + noise(&mut rng),
                0.3 * p[0] - 0.2 * p[1] + noise(&mut rng),
                0.5 * p[2] + noise(&mut rng),
            ]);
        }
        let fit = var1(&rows).unwrap();
        let lag_cols: Vec<Vec<f64>> = (0..3)
            .map(|j| rows[..149].iter().map(|r| r[j]).collect())
            .collect();
        for eq in 0..3 {
            let y: Vec<f64> = rows[1..].iter().map(|r| r[eq]).collect();
            let o = ols(&y, &lag_cols, true).unwrap();
            assert!((o.coef[0] - fit.intercept[eq]).abs() < 1e-10);
            for j in 0..3 {
                assert!((o.coef[j + 1] - fit.coef[eq][j]).abs() < 1e-10);
            }
            assert!((o.r2 - fit.r2[eq]).abs() < 1e-10);
        }
    }

    #[test]
    fn iid_noise_has_small_coefficients() {
        for seed in 0..20 {
            let mut rng = ChaCha8Rng::seed_from_u64(100 + seed);
            let rows: Vec<Vec<f64>> = (0..500)
                .map(|_| (0..4).map(|_| noise(&mut rng)).collect())
                .collect();
            let fit = var1(&rows).unwrap();
            assert!(
                fit.coef.iter().flatten().all(|c| c.abs() < 0.2),
                "seed {seed}"
            );
        }
    }

    #[test]
    fn planted_cross_lag_recovered() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let mut rows = vec![vec![0.0, 0.0]];
        for t in 1..400 {
            let p = rows[t - 1].clone();
            rows.push(vec![
                0.5 * p[0] + noise(&mut rng),
                0.3 * p[0] + 0.2 * p[1] + noise(&mut rng),
            ]);
        }
        let fit = var1(&rows).unwrap();
        assert!((fit.coef[1][0] - 0.3).abs() < 0.1, "{}", fit.coef[1][0]);
    }

    #[test]
    fn floor_and_rank_errors() {
        let rows: Vec<Vec<f64>> = (0..50).map(|i| vec![i as f64, (i * i) as f64]).collect();
        assert!(matches!(
            var1(&rows),
            Err(EconError::TooFewObservations { .. })
        ));
        let rows: Vec<Vec<f64>> = (0..120).map(|i| vec![(i as f64).sin(), 1.0]).collect();
        assert_eq!(var1(&rows).unwrap_err(), EconError::RankDeficient);
    }

    #[test]
    fn weekly_pairs_skip_gaps() {
        let w0 = WeekStamp::of(crate::datamodel::parse_date("2015-01-05").unwrap());
        let mut m = BTreeMap::new();
        for i in [0, 1, 2, 4, 5] {
            m.insert(w0.offset(i), vec![i as f64]);
        }
        let s = LagSample::from_weekly(&m);
        assert_eq!(s.len(), 3);
        assert_eq!(s.complete_weeks, 5);
        assert_eq!(
            [s.lagged(0), s.lagged(1), s.lagged(2)],
            [[0.0], [1.0], [4.0]]
        );
    }

    fn fit_with(c: f64) -> VarFit {
        VarFit {
            coef: vec![vec![c, 2.0 * c], vec![-c, 0.0]],
            intercept: vec![0.0; 2],
            r2: vec![c, c],
            n: 10,
        }
    }

    #[test]
    fn aggregate_means() {
        let names = vec!["a".to_string(), "b".to_string()];
        let t = |s: &str| Ticker::new(s).unwrap();
        let one = var_aggregate(&names, vec![(t("AA"), fit_with(0.3))], vec![]).unwrap();
        assert_eq!(one.avg_coef, fit_with(0.3).coef);
        let two = var_aggregate(
            &names,
            vec![(t("AA"), fit_with(0.2)), (t("BB"), fit_with(0.4))],
            vec![],
        )
        .unwrap();
        assert!((two.avg_coef[0][1] - 0.6).abs() < 1e-15);
        assert!((two.avg_r2[0] - 0.3).abs() < 1e-15);
        assert_eq!(
            var_aggregate(&names, vec![], vec![]).unwrap_err(),
            EconError::EmptyInput
        );

        // Brute-force loop over 50 tickers.
        let fits: Vec<(Ticker, VarFit)> = (0..50)
            .map(|i| {
                let sym = format!(
                    "T{}{}",
                    (b'A' + (i / 26) as u8) as char,
                    (b'A' + (i % 26) as u8) as char
                );
                (t(&sym), fit_with(i as f64 / 7.0))
            })
            .collect();
        let agg = var_aggregate(&names, fits.clone(), vec![]).unwrap();
        for a in 0..2 {
            for b in 0..2 {
                let mut s = 0.0;
                for (_, f) in &fits {
                    s += f.coef[a][b];
                }
                assert!((agg.avg_coef[a][b] - s / 50.0).abs() < 1e-12);
            }
        }
    }
}
