//! Synthetic panels with planted effects, written in exactly the input file
//! formats, plus naive reference implementations of the estimators.

pub mod oracle;

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use chrono::Duration;
use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson, StandardNormal};
use thiserror::Error;

use crate::attention::{compute_asvi, cross_sectional_standardize, TurnoverConfig};
use crate::datamodel::{
    Dash5Bucket, Dash5Record, IpoNewsDay, IpoOutcome, IpoRecord, KeywordKind, SecurityType,
    SviObservation, Ticker, WeekStamp, WeeklyMarketRow, YearMonth,
};
use crate::ingest::{
    ipo_exclusion, write_dash5, write_ipo_news, write_ipo_outcomes, write_ipos, write_market,
    write_noise_list, write_svi, IngestError, NoiseTickerList,
};
use crate::studies::{self, StudyInputs};

#[derive(Debug, Error)]
pub enum SynthError {
    #[error("invalid config: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Ingest(#[from] IngestError),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, PartialEq)]
pub struct DgpConfig {
    pub seed: u64,
    pub n_tickers: usize,
    pub n_weeks: usize,
    pub start: WeekStamp,
    /// Share of tickers flagged as noise tickers; they carry no attention effects.
    pub noise_share: f64,

    /// AR(1) coefficient of log SVI around each ticker's mean.
    pub svi_ar: f64,
    pub svi_shock: f64,

    /// Next-week abnormal return per standardized ASVI unit, in bps.
    pub pressure_bps: f64,
    /// Total return over weeks 5-52 per standardized ASVI unit, in bps.
    pub reversal_bps: f64,
    /// Pressure removed per unit of standardized size, in bps; positive
    /// values concentrate pressure in small caps.
    pub size_tilt_bps: f64,
    /// Weekly idiosyncratic return volatility.
    pub ret_noise: f64,
    /// Loading of log volatility on lagged log SVI deviation.
    pub vol_svi_loading: f64,

    /// Abnormal turnover on lagged log SVI deviation.
    pub turnover_svi_loading: f64,
    pub turnover_ar: f64,
    pub turnover_noise: f64,

    /// Log news intensity on lagged log SVI deviation.
    pub news_svi_loading: f64,

    /// Pooled correlation between ticker and company-name SVI levels.
    pub name_svi_corr: f64,

    /// Elasticity of monthly retail orders to monthly SVI.
    pub retail_svi_elasticity: f64,
    pub retail_noise: f64,

    pub n_ipos: usize,
    /// Log-SVI jump in the listing week.
    pub ipo_event_spike: f64,
    /// Day-1 return step for IPOs above the median pre-listing ASVI.
    pub ipo_day1_high_effect: f64,
    /// Day-1 return per unit of pre-listing ASVI.
    pub ipo_asvi_loading: f64,
    /// Day-1 return per unit of (price revision - 1).
    pub ipo_revision_loading: f64,
    pub ipo_media_loading: f64,
    pub ipo_day1_noise: f64,
}

impl Default for DgpConfig {
    fn default() -> Self {
        DgpConfig {
            seed: 1,
            n_tickers: 300,
            n_weeks: 260,
            start: "2009-01-05".parse().expect("a Monday"),
            noise_share: 0.074,
            svi_ar: 0.5,
            svi_shock: 0.25,
            pressure_bps: 20.0,
            reversal_bps: -30.0,
            size_tilt_bps: 0.0,
            ret_noise: 0.005,
            vol_svi_loading: 0.3,
            turnover_svi_loading: 0.3,
            turnover_ar: 0.3,
            turnover_noise: 0.9,
            news_svi_loading: 0.5,
            name_svi_corr: 0.10,
            retail_svi_elasticity: 0.10,
            retail_noise: 0.1,
            n_ipos: 600,
            ipo_event_spike: 0.28,
            ipo_day1_high_effect: 0.06,
            ipo_asvi_loading: 0.0,
            ipo_revision_loading: 1.0,
            ipo_media_loading: 0.01,
            ipo_day1_noise: 0.08,
        }
    }
}

impl DgpConfig {
    pub fn validate(&self) -> Result<(), SynthError> {
        let bad = |m: String| Err(SynthError::InvalidConfig(m));
        if self.n_tickers < 20 {
            return bad(format!("n_tickers {} < 20", self.n_tickers));
        }
        if self.n_weeks < 120 {
            return bad(format!("n_weeks {} < 120", self.n_weeks));
        }
        if self.n_tickers > 26usize.pow(4) {
            return bad("n_tickers exceeds the four-letter symbol space".into());
        }
        if !(0.0..0.5).contains(&self.noise_share) {
            return bad(format!("noise_share {} outside [0, 0.5)", self.noise_share));
        }
        if !(self.svi_ar.abs() < 1.0) {
            return bad(format!("svi_ar {} is not stationary", self.svi_ar));
        }
        if !(self.turnover_ar.abs() < 1.0) {
            return bad(format!(
                "turnover_ar {} is not stationary",
                self.turnover_ar
            ));
        }
        if !(0.0..1.0).contains(&self.name_svi_corr) {
            return bad(format!(
                "name_svi_corr {} outside [0, 1)",
                self.name_svi_corr
            ));
        }
        for (k, v) in [
            ("svi_shock", self.svi_shock),
            ("ret_noise", self.ret_noise),
            ("turnover_noise", self.turnover_noise),
            ("retail_noise", self.retail_noise),
            ("ipo_day1_noise", self.ipo_day1_noise),
        ] {
            if !(v >= 0.0 && v.is_finite()) {
                return bad(format!("{k} must be a finite non-negative scale, got {v}"));
            }
        }
        Ok(())
    }
}

/// Generates the key-value view of the config and its parser from one field
/// list, so truth files and config files agree on names.
macro_rules! dgp_keys {
    ($($field:ident),* $(,)?) => {
        impl DgpConfig {
            /// Every configurable key, in truth-file order.
            pub const KEYS: &'static [&'static str] = &[$(stringify!($field)),*];

            /// Sets one field from its text form.
            pub fn set(&mut self, key: &str, value: &str) -> Result<(), SynthError> {
                match key {
                    $(stringify!($field) => {
                        self.$field = value.trim().parse().map_err(|_| {
                            SynthError::InvalidConfig(format!("{key}: cannot parse `{value}`"))
                        })?;
                    })*
                    _ => return Err(SynthError::InvalidConfig(format!("unknown key `{key}`"))),
                }
                Ok(())
            }

            /// Every key with its current value, in `KEYS` order.
            pub fn pairs(&self) -> Vec<(String, String)> {
                vec![$((stringify!($field).to_string(), self.$field.to_string())),*]
            }
        }
    };
}

dgp_keys!(
    seed,
    n_tickers,
    n_weeks,
    start,
    noise_share,
    svi_ar,
    svi_shock,
    pressure_bps,
    reversal_bps,
    size_tilt_bps,
    ret_noise,
    vol_svi_loading,
    turnover_svi_loading,
    turnover_ar,
    turnover_noise,
    news_svi_loading,
    name_svi_corr,
    retail_svi_elasticity,
    retail_noise,
    n_ipos,
    ipo_event_spike,
    ipo_day1_high_effect,
    ipo_asvi_loading,
    ipo_revision_loading,
    ipo_media_loading,
    ipo_day1_noise,
);

/// Constant parts of the retail order process.
pub const RETAIL_INTERCEPT: f64 = 0.02;
pub const RETAIL_RET_LOADING: f64 = 0.1;
pub const RETAIL_ABN_RET_LOADING: f64 = 1.0;
pub const RETAIL_NEWS_LOADING: f64 = 0.05;
const BUCKET_WEIGHTS: [f64; 4] = [0.45, 0.30, 0.15, 0.10];
const BUCKET_SIZES: [f64; 4] = [300.0, 1000.0, 3000.0, 7000.0];

/// Weeks of IPO name-search history around the listing week.
pub const IPO_SVI_WEEKS: (i64, i64) = (-20, 12);

/// A generated panel and its ground truth.
#[derive(Debug, Clone)]
pub struct SynthData {
    pub config: DgpConfig,
    pub tickers: Vec<Ticker>,
    pub noise: NoiseTickerList,
    pub svi: Vec<SviObservation>,
    pub name_svi: Vec<SviObservation>,
    pub product_svi: Vec<SviObservation>,
    pub market: Vec<WeeklyMarketRow>,
    pub dash5: Vec<Dash5Record>,
    pub ipos: Vec<IpoRecord>,
    pub ipo_svi: Vec<SviObservation>,
    pub ipo_outcomes: Vec<IpoOutcome>,
    pub ipo_news: Vec<IpoNewsDay>,
    /// Planted parameters and generation statistics, as key/value pairs.
    pub truth: Vec<(String, String)>,
}

fn symbol(mut i: usize, len: usize) -> Ticker {
    let mut s = vec![b'A'; len];
    for c in s.iter_mut().rev() {
        *c = b'A' + (i % 26) as u8;
        i /= 26;
    }
    Ticker::new(std::str::from_utf8(&s).expect("ascii")).expect("letters only")
}

fn normal(rng: &mut ChaCha8Rng) -> f64 {
    rng.sample(StandardNormal)
}

fn poisson(rng: &mut ChaCha8Rng, lambda: f64) -> u32 {
    if lambda <= 0.0 {
        return 0;
    }
    Poisson::new(lambda).expect("positive rate").sample(rng) as u32
}

/// Rounds to the provider's integer scale; reports whether clipping bound.
fn to_svi(log_level: f64) -> (u32, bool) {
    let v = log_level.exp().round();
    if v < 1.0 {
        (1, true)
    } else if v > 100.0 {
        (100, true)
    } else {
        (v as u32, false)
    }
}

fn round_cents(x: f64) -> f64 {
    (x * 100.0).round() / 100.0
}

/// Generates a complete input set. The same config always yields the same
/// data.
pub fn generate(cfg: &DgpConfig) -> Result<SynthData, SynthError> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let n = cfg.n_tickers;
    let t_len = cfg.n_weeks;
    let weeks: Vec<WeekStamp> = (0..t_len).map(|i| cfg.start.offset(i as i64)).collect();

    let tickers: Vec<Ticker> = (0..n).map(|i| symbol(i, 4)).collect();
    let n_noise = (cfg.noise_share * n as f64).round() as usize;
    let mut is_noise = vec![false; n];
    for i in sample(&mut rng, n, n_noise) {
        is_noise[i] = true;
    }
    let noise = NoiseTickerList::new(
        tickers
            .iter()
            .zip(&is_noise)
            .filter(|(_, &b)| b)
            .map(|(t, _)| t.clone()),
    );
    let load: Vec<f64> = is_noise
        .iter()
        .map(|&b| if b { 0.0 } else { 1.0 })
        .collect();

    // Per-ticker constants.
    let mu: Vec<f64> = (0..n)
        .map(|_| rng.random_range(20.0f64..60.0).ln())
        .collect();
    let mu_product: Vec<f64> = (0..n)
        .map(|_| rng.random_range(10.0f64..50.0).ln())
        .collect();
    let news_rate: Vec<f64> = (0..n).map(|_| rng.random_range(0.2..1.5)).collect();
    let base_turnover: Vec<f64> = (0..n)
        .map(|_| 0.01f64.ln() + 0.5 * normal(&mut rng))
        .collect();
    let mut cap: Vec<f64> = (0..n)
        .map(|_| (20.0 + 1.5 * normal(&mut rng)).exp())
        .collect();

    // Attention series on the provider scale.
    let stationary_sd = cfg.svi_shock / (1.0 - cfg.svi_ar * cfg.svi_ar).sqrt();
    let mut clipped = 0usize;
    let ar_path = |rng: &mut ChaCha8Rng, m: f64, clipped: &mut usize| -> Vec<u32> {
        let mut x = m + stationary_sd * normal(rng);
        (0..t_len)
            .map(|t| {
                if t > 0 {
                    x = m + cfg.svi_ar * (x - m) + cfg.svi_shock * normal(rng);
                }
                let (v, c) = to_svi(x);
                *clipped += usize::from(c);
                v
            })
            .collect()
    };
    let svi: Vec<Vec<u32>> = (0..n)
        .map(|i| ar_path(&mut rng, mu[i], &mut clipped))
        .collect();
    let product: Vec<Vec<u32>> = (0..n)
        .map(|i| ar_path(&mut rng, mu_product[i], &mut clipped))
        .collect();
    // Deviation of emitted log SVI from the ticker mean drives the other series.
    let dev: Vec<Vec<f64>> = (0..n)
        .map(|i| svi[i].iter().map(|&v| (v as f64).ln() - mu[i]).collect())
        .collect();

    // Standardized ASVI per week, exactly as the studies compute it.
    let maps: Vec<BTreeMap<WeekStamp, u32>> = svi
        .iter()
        .map(|s| weeks.iter().copied().zip(s.iter().copied()).collect())
        .collect();
    let z: Vec<Vec<f64>> = (0..t_len)
        .map(|t| {
            let raw: Vec<Option<f64>> = maps
                .iter()
                .map(|m| compute_asvi(m, weeks[t]).ok())
                .collect();
            match cross_sectional_standardize(&raw) {
                Ok(zs) => zs.into_iter().map(|v| v.unwrap_or(0.0)).collect(),
                Err(_) => vec![0.0; n],
            }
        })
        .collect();

    // Returns, caps and news, week by week. `cap` holds the previous week's
    // closing value when week `s` is drawn.
    let mut ret = vec![vec![0.0; t_len]; n];
    let mut bench = vec![0.0; t_len];
    let mut news = vec![vec![0u32; t_len]; n];
    let mut caps = vec![vec![0.0; t_len]; n];
    let rev_per_week = cfg.reversal_bps / 48.0;
    for s in 0..t_len {
        bench[s] = 0.001 + 0.02 * normal(&mut rng);
        let log_caps: Vec<Option<f64>> = cap.iter().map(|c| Some(c.ln())).collect();
        let zcap: Vec<f64> = cross_sectional_standardize(&log_caps)
            .map(|v| v.into_iter().map(|x| x.unwrap_or(0.0)).collect())
            .unwrap_or_else(|_| vec![0.0; n]);
        for i in 0..n {
            let mut bps = 0.0;
            if s >= 1 {
                bps += cfg.pressure_bps * z[s - 1][i] - cfg.size_tilt_bps * z[s - 1][i] * zcap[i];
            }
            for l in 5..=52usize {
                if s >= l {
                    bps += rev_per_week * z[s - l][i];
                }
            }
            let lag_dev = if s >= 1 { dev[i][s - 1] } else { 0.0 };
            let sigma = cfg.ret_noise * (load[i] * cfg.vol_svi_loading * lag_dev).exp();
            let abn = 1e-4 * load[i] * bps + sigma * normal(&mut rng);
            ret[i][s] = abn + bench[s];
            cap[i] *= 1.0 + ret[i][s];
            caps[i][s] = cap[i];
            let lambda = news_rate[i] * (load[i] * cfg.news_svi_loading * lag_dev).exp();
            news[i][s] = poisson(&mut rng, lambda);
        }
    }

    // Turnover built so that its trailing standardization equals the
    // planted abnormal-turnover process.
    let tcfg = TurnoverConfig::default();
    let mut turnover = vec![vec![0.0; t_len]; n];
    for i in 0..n {
        let mut a = 0.0;
        let mut logs: Vec<f64> = Vec::with_capacity(t_len);
        for s in 0..t_len {
            let lag_dev = if s >= 1 { dev[i][s - 1] } else { 0.0 };
            a = load[i] * cfg.turnover_svi_loading * lag_dev
                + cfg.turnover_ar * a
                + cfg.turnover_noise * normal(&mut rng);
            let lo = s.saturating_sub(tcfg.window);
            let window = &logs[lo..s];
            let v = if window.len() < tcfg.min_obs {
                (base_turnover[i] + 0.3 * normal(&mut rng)).exp()
            } else {
                let k = window.len() as f64;
                let m = window.iter().sum::<f64>() / k;
                let sd = (window.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (k - 1.0)).sqrt();
                (m + a * sd).exp() - tcfg.eps
            };
            turnover[i][s] = v;
            logs.push((v + tcfg.eps).ln());
        }
    }

    // Company-name SVI: level-linear in ticker SVI with a planted pooled correlation.
    let all_levels: Vec<f64> = svi.iter().flatten().map(|&v| v as f64).collect();
    let pooled_mean = all_levels.iter().sum::<f64>() / all_levels.len() as f64;
    let pooled_sd = (all_levels
        .iter()
        .map(|v| (v - pooled_mean).powi(2))
        .sum::<f64>()
        / (all_levels.len() as f64 - 1.0))
        .sqrt();
    let name_noise = 10.0;
    let rho = cfg.name_svi_corr;
    let kappa = if pooled_sd > 0.0 {
        rho * name_noise / (pooled_sd * (1.0 - rho * rho).sqrt())
    } else {
        0.0
    };
    let name: Vec<Vec<u32>> = (0..n)
        .map(|i| {
            svi[i]
                .iter()
                .map(|&v| {
                    let level =
                        50.0 + kappa * (v as f64 - pooled_mean) + name_noise * normal(&mut rng);
                    level.round().clamp(1.0, 100.0) as u32
                })
                .collect()
        })
        .collect();

    // Dash-5 monthly order flow.
    let mut dash5 = Vec::new();
    for i in 0..n {
        let mut months: BTreeMap<YearMonth, (u64, f64, f64, bool)> = BTreeMap::new();
        for s in 0..t_len {
            let e = months
                .entry(weeks[s].month())
                .or_insert((0, 1.0, 1.0, false));
            e.0 += svi[i][s] as u64;
            e.1 *= 1.0 + ret[i][s];
            e.2 *= 1.0 + bench[s];
            e.3 |= news[i][s] > 0;
        }
        let mut level = rng.random_range(5000.0f64..50000.0).ln();
        let mut prev_svi: Option<u64> = None;
        for (m, (v, gross, gb, any_news)) in months {
            if let Some(p) = prev_svi {
                let dsvi = (v as f64 / p as f64).ln();
                level += RETAIL_INTERCEPT
                    + cfg.retail_svi_elasticity * dsvi
                    + RETAIL_RET_LOADING * (gross - 1.0)
                    + RETAIL_ABN_RET_LOADING * (gross - gb).abs()
                    + RETAIL_NEWS_LOADING * f64::from(u8::from(any_news))
                    + cfg.retail_noise * normal(&mut rng);
            }
            prev_svi = Some(v);
            let total_orders = level.exp();
            let mut recs = Vec::with_capacity(4);
            let mut shares_sum = 0u64;
            for (b, bucket) in Dash5Bucket::ALL.iter().enumerate() {
                let orders = (BUCKET_WEIGHTS[b] * total_orders).round().max(1.0) as u64;
                let shares = (orders as f64 * BUCKET_SIZES[b] * (0.05 * normal(&mut rng)).exp())
                    .round() as u64;
                shares_sum += shares;
                recs.push((*bucket, orders, shares));
            }
            let pct = rng.random_range(0.2..0.6);
            let total_shares = (shares_sum as f64 / pct).round() as u64;
            for (bucket, orders, shares) in recs {
                dash5.push(Dash5Record {
                    ticker: tickers[i].clone(),
                    month: m,
                    bucket,
                    orders,
                    shares,
                    total_shares,
                });
            }
        }
    }

    let (ipos, ipo_svi, ipo_outcomes, ipo_news, ipo_stats) = generate_ipos(cfg, &weeks, &mut rng);

    let obs = |series: &[Vec<u32>], kind: KeywordKind| -> Vec<SviObservation> {
        let mut out = Vec::with_capacity(n * t_len);
        for i in 0..n {
            for s in 0..t_len {
                out.push(SviObservation {
                    ticker: tickers[i].clone(),
                    kind,
                    week: weeks[s],
                    svi: series[i][s],
                });
            }
        }
        out
    };
    let mut market = Vec::with_capacity(n * t_len);
    for i in 0..n {
        for s in 0..t_len {
            market.push(WeeklyMarketRow {
                ticker: tickers[i].clone(),
                week: weeks[s],
                ret: ret[i][s],
                turnover: turnover[i][s],
                market_cap: caps[i][s],
                news_count: news[i][s],
                benchmark_ret: bench[s],
            });
        }
    }

    let mut truth = cfg.pairs();
    truth.push(("n_noise_tickers".into(), n_noise.to_string()));
    truth.push((
        "svi_clip_rate".into(),
        (clipped as f64 / (2 * n * t_len) as f64).to_string(),
    ));
    truth.push(("name_svi_kappa".into(), kappa.to_string()));
    truth.push(("retail_intercept".into(), RETAIL_INTERCEPT.to_string()));
    truth.push(("retail_ret_loading".into(), RETAIL_RET_LOADING.to_string()));
    truth.push((
        "retail_abn_ret_loading".into(),
        RETAIL_ABN_RET_LOADING.to_string(),
    ));
    truth.push((
        "retail_news_loading".into(),
        RETAIL_NEWS_LOADING.to_string(),
    ));
    truth.extend(ipo_stats);

    Ok(SynthData {
        config: cfg.clone(),
        svi: obs(&svi, KeywordKind::Ticker),
        name_svi: obs(&name, KeywordKind::Name),
        product_svi: obs(&product, KeywordKind::Product),
        tickers,
        noise,
        market,
        dash5,
        ipos,
        ipo_svi,
        ipo_outcomes,
        ipo_news,
        truth,
    })
}

type IpoParts = (
    Vec<IpoRecord>,
    Vec<SviObservation>,
    Vec<IpoOutcome>,
    Vec<IpoNewsDay>,
    Vec<(String, String)>,
);

fn generate_ipos(cfg: &DgpConfig, weeks: &[WeekStamp], rng: &mut ChaCha8Rng) -> IpoParts {
    struct Draft {
        rec: IpoRecord,
        asvi_pre: Option<f64>,
        media: f64,
        revision: f64,
    }
    let mut drafts = Vec::with_capacity(cfg.n_ipos);
    let mut ipo_svi = Vec::new();
    let mut ipo_news = Vec::new();
    let (first, last) = IPO_SVI_WEEKS;
    let t_len = weeks.len();
    for j in 0..cfg.n_ipos {
        let name = format!("IPO Company {j:04}");
        let has_ticker = rng.random::<f64>() >= 0.02;
        let ticker = has_ticker.then(|| symbol(j, 5));
        let listing_week = weeks[rng.random_range(20..t_len)];
        let listing_date = listing_week.start() + Duration::days(rng.random_range(0..5));
        let filing_date = listing_date - Duration::days(rng.random_range(40..120));

        let kind_draw = rng.random::<f64>();
        let security_type = if kind_draw < 0.05 {
            [
                SecurityType::ClosedFund,
                SecurityType::Reit,
                SecurityType::Adr,
                SecurityType::Lp,
            ][rng.random_range(0..4)]
        } else {
            SecurityType::Common
        };
        let cheap = rng.random::<f64>() < 0.02;
        let late = rng.random::<f64>() < 0.01;
        let mid = if cheap {
            3.0
        } else {
            (rng.random_range(8.0f64..25.0) * 2.0).round() / 2.0
        };
        let offer_price = round_cents(mid * (0.1 * normal(rng)).exp());
        let rec = IpoRecord {
            name: name.clone(),
            ticker: ticker.clone(),
            filing_date,
            listing_date,
            offer_price,
            range_low: mid - 1.0,
            range_high: mid + 1.0,
            offering_size: round_cents((18.5 + normal(rng)).exp()),
            asset_size: round_cents((19.0 + 1.5 * normal(rng)).exp()),
            industry_return: 0.01 + 0.05 * normal(rng),
            security_type,
            first_trade_day_offset: if late {
                rng.random_range(6..12)
            } else {
                rng.random_range(0..3)
            },
        };

        // Daily news between filing and listing.
        let mut articles = 0u64;
        let mut d = filing_date;
        while d < listing_date {
            let c = poisson(rng, 0.3);
            if c > 0 {
                ipo_news.push(IpoNewsDay {
                    name: name.clone(),
                    date: d,
                    count: c,
                });
                articles += c as u64;
            }
            d += Duration::days(1);
        }

        // Name search history around listing, with the planted event profile.
        let m = rng.random_range(15.0f64..40.0).ln();
        let pre_shock = 0.3 * normal(rng);
        let stationary_sd = cfg.svi_shock / (1.0 - cfg.svi_ar * cfg.svi_ar).sqrt();
        let mut x = stationary_sd * normal(rng);
        let mut series = BTreeMap::new();
        for k in first..=last {
            if k > first {
                x = cfg.svi_ar * x + cfg.svi_shock * normal(rng);
            }
            let bump = match k {
                0 => cfg.ipo_event_spike,
                -1 => 0.12 + pre_shock,
                1 => 0.12,
                -2 | 2 => 0.05,
                _ => 0.0,
            };
            let (v, _) = to_svi(m + x + bump);
            series.insert(listing_week.offset(k), v);
        }
        let asvi_pre = compute_asvi(&series, listing_week.pred()).ok();
        if let Some(t) = &ticker {
            for (w, v) in &series {
                ipo_svi.push(SviObservation {
                    ticker: t.clone(),
                    kind: KeywordKind::Name,
                    week: *w,
                    svi: *v,
                });
            }
        }
        let revision = offer_price / mid;
        drafts.push(Draft {
            rec,
            asvi_pre: asvi_pre.filter(|_| has_ticker),
            media: (articles as f64).ln_1p(),
            revision,
        });
    }

    // The split median is taken over IPOs the studies keep.
    let kept: Vec<f64> = drafts
        .iter()
        .filter(|d| ipo_exclusion(&d.rec).is_none())
        .filter_map(|d| d.asvi_pre)
        .collect();
    let split = crate::attention::median(&kept).unwrap_or(f64::INFINITY);
    let mut outcomes = Vec::with_capacity(drafts.len());
    let mut high = 0usize;
    for d in &drafts {
        let is_high = d.asvi_pre.is_some_and(|a| a > split);
        high += usize::from(is_high && ipo_exclusion(&d.rec).is_none());
        let step = if is_high {
            cfg.ipo_day1_high_effect
        } else {
            0.0
        };
        let day1 = 0.10
            + step
            + cfg.ipo_asvi_loading * d.asvi_pre.unwrap_or(0.0)
            + cfg.ipo_revision_loading * (d.revision - 1.0)
            + cfg.ipo_media_loading * d.media
            + cfg.ipo_day1_noise * normal(rng);
        // Returns must stay above -1 to pass ingest; the floor only binds
        // under extreme noise settings.
        let day1 = day1.max(-0.99);
        let long = (-0.02 - 0.5 * step + 0.3 * normal(rng)).exp() - 1.0;
        outcomes.push(IpoOutcome {
            name: d.rec.name.clone(),
            day1_ret: day1,
            ret_w5_52: long,
        });
    }
    let stats = vec![
        ("ipo_asvi_split".to_string(), split.to_string()),
        ("ipo_high_count".to_string(), high.to_string()),
        ("ipo_kept_with_asvi".to_string(), kept.len().to_string()),
    ];
    let records = drafts.into_iter().map(|d| d.rec).collect();
    (records, ipo_svi, outcomes, ipo_news, stats)
}

impl SynthData {
    pub fn inputs(&self) -> StudyInputs {
        StudyInputs {
            svi: self.svi.clone(),
            name_svi: self.name_svi.clone(),
            product_svi: self.product_svi.clone(),
            market: self.market.clone(),
            dash5: self.dash5.clone(),
            ipos: self.ipos.clone(),
            ipo_svi: self.ipo_svi.clone(),
            ipo_outcomes: self.ipo_outcomes.clone(),
            ipo_news: self.ipo_news.clone(),
            noise: self.noise.clone(),
            reports: Vec::new(),
        }
    }

    pub fn truth_text(&self) -> String {
        let mut s = String::new();
        for (k, v) in &self.truth {
            let _ = writeln!(s, "{k} = {v}");
        }
        s
    }

    pub fn truth_value(&self, key: &str) -> Option<&str> {
        self.truth
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
    }

    /// Every output file as (name, bytes), in a fixed order.
    pub fn files(&self) -> Result<Vec<(String, Vec<u8>)>, SynthError> {
        let mut out = Vec::new();
        macro_rules! file {
            ($name:expr, $write:expr, $rows:expr) => {{
                let mut buf = Vec::new();
                $write(&mut buf, $rows)?;
                out.push(($name.to_string(), buf));
            }};
        }
        file!(studies::SVI_FILE, write_svi, &self.svi);
        file!(studies::NAME_SVI_FILE, write_svi, &self.name_svi);
        file!(studies::PRODUCT_SVI_FILE, write_svi, &self.product_svi);
        file!(studies::MARKET_FILE, write_market, &self.market);
        file!(studies::DASH5_FILE, write_dash5, &self.dash5);
        file!(studies::IPO_FILE, write_ipos, &self.ipos);
        file!(studies::IPO_SVI_FILE, write_svi, &self.ipo_svi);
        file!(
            studies::IPO_OUTCOME_FILE,
            write_ipo_outcomes,
            &self.ipo_outcomes
        );
        file!(studies::IPO_NEWS_FILE, write_ipo_news, &self.ipo_news);
        file!(studies::NOISE_FILE, write_noise_list, &self.noise);
        out.push(("truth.txt".to_string(), self.truth_text().into_bytes()));
        Ok(out)
    }

    pub fn write_dir(&self, dir: &Path) -> Result<(), SynthError> {
        std::fs::create_dir_all(dir)?;
        for (name, bytes) in self.files()? {
            std::fs::write(dir.join(name), bytes)?;
        }
        Ok(())
    }
}
