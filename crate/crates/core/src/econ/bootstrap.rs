use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::var::{fit_rows, LagSample, MomentPrefix, VAR_MIN_WEEKS};
use super::EconError;
use crate::datamodel::VarFit;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BootstrapConfig {
    pub block_len: usize,
    pub reps: usize,
    pub seed: u64,
}

impl Default for BootstrapConfig {
    fn default() -> Self {
        BootstrapConfig {
            block_len: 23,
            reps: 1000,
            seed: 20_110_901,
        }
    }
}

impl BootstrapConfig {
    pub fn validate(&self) -> Result<(), EconError> {
        if self.block_len == 0 {
            return Err(EconError::InvalidBlockLen);
        }
        if self.reps < 100 {
            return Err(EconError::RepsTooSmall(self.reps));
        }
        Ok(())
    }
}

/// Indices of a moving-block resample of length `n`: overlapping blocks of
/// `block_len` with uniform start points, concatenated and truncated to `n`.
/// A block longer than the series is clipped to the series.
pub fn moving_block_indices<R: Rng + ?Sized>(
    n: usize,
    block_len: usize,
    rng: &mut R,
) -> Vec<usize> {
    moving_block_ranges(n, block_len, rng)
        .into_iter()
        .flat_map(|(a, b)| a..b)
        .collect()
}

/// The same resample as half-open row ranges, one per block.
fn moving_block_ranges<R: Rng + ?Sized>(
    n: usize,
    block_len: usize,
    rng: &mut R,
) -> Vec<(usize, usize)> {
    let mut out = Vec::with_capacity(n / block_len.max(1) + 1);
    if n == 0 {
        return out;
    }
    let b = block_len.clamp(1, n);
    let mut filled = 0;
    while filled < n {
        let start = rng.random_range(0..=n - b);
        let take = b.min(n - filled);
        out.push((start, start + take));
        filled += take;
    }
    out
}

/// Cross-ticker mean of the requested VAR cells, skipping tickers whose fit
/// fails. `None` if no ticker fits.
fn averaged_stat(
    fits: impl Iterator<Item = Result<VarFit, EconError>>,
    cells: &[(usize, usize)],
) -> Option<Vec<f64>> {
    let mut sum = vec![0.0; cells.len()];
    let mut used = 0usize;
    for fit in fits.flatten() {
        for (s, &(eq, var)) in sum.iter_mut().zip(cells) {
            *s += fit.coef[eq][var];
        }
        used += 1;
    }
    (used > 0).then(|| sum.into_iter().map(|s| s / used as f64).collect())
}

/// Bootstrap p-values for cells `(equation, lagged variable)` of the
/// cross-ticker mean VAR(1) coefficient matrix.
///
/// Each replicate resamples every ticker's lag-pair rows in moving blocks,
/// with blocks drawn independently per ticker, and refits. The replicate
/// distribution is centered on the full-sample statistic, so
/// `p = #{|stat* - stat| >= |stat|} / valid replicates`.
/// Replicate `r` draws from a generator seeded with `seed ^ r`, which makes
/// the result independent of the thread count.
pub fn block_bootstrap_pvalue(
    panel: &[LagSample],
    cells: &[(usize, usize)],
    cfg: &BootstrapConfig,
) -> Result<Vec<f64>, EconError> {
    cfg.validate()?;
    if panel.is_empty() || cells.is_empty() {
        return Err(EconError::EmptyInput);
    }
    let k = panel[0].k();
    if let Some(&(eq, var)) = cells.iter().find(|&&(e, v)| e >= k || v >= k) {
        return Err(EconError::DimensionMismatch(format!(
            "cell ({eq}, {var}) outside {k}x{k}"
        )));
    }
    for s in panel {
        if s.k() != k {
            return Err(EconError::DimensionMismatch(
                "tickers differ in series count".into(),
            ));
        }
        if s.complete_weeks < VAR_MIN_WEEKS {
            return Err(EconError::TooFewObservations {
                needed: VAR_MIN_WEEKS,
                found: s.complete_weeks,
            });
        }
    }

    let stat = averaged_stat(
        panel
            .iter()
            .map(|s| fit_rows(s, &(0..s.len()).collect::<Vec<_>>())),
        cells,
    )
    .ok_or(EconError::RankDeficient)?;
    let prefixes: Vec<MomentPrefix> = panel.iter().map(MomentPrefix::new).collect();

    let reps: Vec<Option<Vec<f64>>> = (0..cfg.reps as u64)
        .into_par_iter()
        .map(|r| {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ r);
            let fits = prefixes.iter().map(|p| {
                let ranges = moving_block_ranges(p.len(), cfg.block_len, &mut rng);
                p.fit_ranges(&ranges)
            });
            averaged_stat(fits, cells)
        })
        .collect();

    let valid: Vec<&Vec<f64>> = reps.iter().flatten().collect();
    if valid.is_empty() {
        return Err(EconError::RankDeficient);
    }
    Ok((0..cells.len())
        .map(|c| {
            let hits = valid
                .iter()
                .filter(|v| (v[c] - stat[c]).abs() >= stat[c].abs())
                .count();
            hits as f64 / valid.len() as f64
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand_distr::StandardNormal;

    fn panel(n_tickers: usize, weeks: usize, cross: f64, seed: u64) -> Vec<LagSample> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n_tickers)
            .map(|_| {
                let mut rows = vec![vec![0.0, 0.0]];
                for t in 1..weeks {
                    let p = rows[t - 1].clone();
                    let e0: f64 = rng.sample(StandardNormal);
                    let e1: f64 = rng.sample(StandardNormal);
                    rows.push(vec![0.5 * p[0] + e0, cross * p[0] + 0.2 * p[1] + e1]);
                }
                LagSample::from_rows(&rows)
            })
            .collect()
    }

    #[test]
    fn block_indices_shape() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for (n, b) in [(250, 23), (10, 23), (23, 23), (100, 1), (47, 23)] {
            let idx = moving_block_indices(n, b, &mut rng);
            assert_eq!(idx.len(), n);
            assert!(idx.iter().all(|&i| i < n));
            // Within a block, indices advance by one.
            let eff = b.min(n);
            for chunk in idx.chunks(eff) {
                assert!(chunk.windows(2).all(|w| w[1] == w[0] + 1));
            }
        }
        assert!(moving_block_indices(0, 5, &mut rng).is_empty());
    }

    #[test]
    fn config_validation() {
        assert!(BootstrapConfig::default().validate().is_ok());
        let bad = BootstrapConfig {
            reps: 99,
            ..Default::default()
        };
        assert_eq!(bad.validate().unwrap_err(), EconError::RepsTooSmall(99));
        let bad = BootstrapConfig {
            block_len: 0,
            ..Default::default()
        };
        assert_eq!(bad.validate().unwrap_err(), EconError::InvalidBlockLen);
        let p = panel(2, 150, 0.3, 1);
        assert_eq!(
            block_bootstrap_pvalue(&p, &[(1, 0)], &bad).unwrap_err(),
            EconError::InvalidBlockLen
        );
    }

    #[test]
    fn deterministic_and_thread_independent() {
        let p = panel(4, 200, 0.1, 11);
        let cfg = BootstrapConfig {
            reps: 200,
            seed: 42,
            ..Default::default()
        };
        let cells = [(1, 0), (0, 1)];
        let a = block_bootstrap_pvalue(&p, &cells, &cfg).unwrap();
        let b = block_bootstrap_pvalue(&p, &cells, &cfg).unwrap();
        assert_eq!(a, b);
        let one = rayon::ThreadPoolBuilder::new()
            .num_threads(1)
            .build()
            .unwrap();
        let c = one.install(|| block_bootstrap_pvalue(&p, &cells, &cfg).unwrap());
        assert_eq!(a, c);
    }

    #[test]
    fn planted_effect_is_significant() {
        let p = panel(5, 250, 0.3, 5);
        let cfg = BootstrapConfig {
            reps: 200,
            seed: 9,
            ..Default::default()
        };
        let pv = block_bootstrap_pvalue(&p, &[(1, 0)], &cfg).unwrap();
        assert!(pv[0] < 0.01, "{pv:?}");
    }

    #[test]
    fn short_ticker_rejected() {
        let p = panel(2, 80, 0.3, 5);
        assert!(matches!(
            block_bootstrap_pvalue(&p, &[(1, 0)], &BootstrapConfig::default()),
            Err(EconError::TooFewObservations { .. })
        ));
    }

    #[test]
    fn block_ranges_match_direct_refit() {
        // Offset levels stress the shifted moment sums.
        let mut p = panel(3, 180, 0.3, 21);
        let rows: Vec<Vec<f64>> = (0..180)
            .map(|t| {
                vec![
                    1e3 + (t as f64 * 0.37).sin(),
                    50.0 + (t as f64 * 0.11).cos(),
                    (t % 7) as f64,
                ]
            })
            .collect();
        p.push(LagSample::from_rows(&rows));
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for s in &p {
            let pre = MomentPrefix::new(s);
            for b in [1, 5, 23, 400] {
                let mut r1 = rng.clone();
                let idx = moving_block_indices(s.len(), b, &mut r1);
                let ranges = moving_block_ranges(s.len(), b, &mut rng);
                let direct = fit_rows(s, &idx).unwrap();
                let fast = pre.fit_ranges(&ranges).unwrap();
                for eq in 0..s.k() {
                    for v in 0..s.k() {
                        let (d, f) = (direct.coef[eq][v], fast.coef[eq][v]);
                        assert!((d - f).abs() < 1e-9 * (1.0 + d.abs()), "{d} vs {f}");
                    }
                    assert!(
                        (direct.intercept[eq] - fast.intercept[eq]).abs()
                            < 1e-7 * (1.0 + direct.intercept[eq].abs())
                    );
                    assert!((direct.r2[eq] - fast.r2[eq]).abs() < 1e-9);
                }
            }
        }
    }

    #[test]
    fn constant_resample_is_rank_deficient() {
        let rows: Vec<Vec<f64>> = (0..150)
            .map(|t| vec![(t as f64).sin(), if t < 60 { 3.0 } else { t as f64 }])
            .collect();
        let pre = MomentPrefix::new(&LagSample::from_rows(&rows));
        assert_eq!(
            pre.fit_ranges(&[(0, 40), (10, 50)]).unwrap_err(),
            EconError::RankDeficient
        );
    }
}
