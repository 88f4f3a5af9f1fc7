use super::{mean, EconError};

/// Newey-West (Bartlett kernel) standard error of the sample mean.
///
/// `S = g0 + 2 * sum_{j=1..lags} (1 - j/(lags+1)) * g_j`, where `g_j` is the
/// lag-j autocovariance of the demeaned series with divisor T; the result is
/// `sqrt(S / T)`.
pub fn newey_west_se_of_mean(series: &[f64], lags: usize) -> Result<f64, EconError> {
    let t = series.len();
    if t == 0 || t <= lags {
        return Err(EconError::TooFewObservations {
            needed: lags,
            found: t,
        });
    }
    let m = mean(series);
    let d: Vec<f64> = series.iter().map(|x| x - m).collect();
    let autocov = |j: usize| {
        d[j..]
            .iter()
            .zip(&d[..t - j])
            .map(|(a, b)| a * b)
            .sum::<f64>()
            / t as f64
    };
    let mut s = autocov(0);
    for j in 1..=lags {
        let w = 1.0 - j as f64 / (lags as f64 + 1.0);
        s += 2.0 * w * autocov(j);
    }
    Ok((s.max(0.0) / t as f64).sqrt())
}
