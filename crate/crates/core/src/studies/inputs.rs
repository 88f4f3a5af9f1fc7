use std::fs::File;
use std::io::BufReader;
use std::path::Path;

use super::StudyError;
use crate::datamodel::{
    Dash5Record, IpoNewsDay, IpoOutcome, IpoRecord, KeywordKind, SviObservation, WeeklyMarketRow,
};
use crate::ingest::{
    filter_noise_tickers, load_dash5, load_ipo_news, load_ipo_outcomes, load_ipos, load_market,
    load_noise_list, load_svi, IngestReport, NoiseTickerList,
};

pub const SVI_FILE: &str = "svi.csv";
pub const NAME_SVI_FILE: &str = "svi_name.csv";
pub const PRODUCT_SVI_FILE: &str = "svi_product.csv";
pub const MARKET_FILE: &str = "market.csv";
pub const DASH5_FILE: &str = "dash5.csv";
pub const IPO_FILE: &str = "ipo.csv";
pub const IPO_SVI_FILE: &str = "ipo_svi.csv";
pub const IPO_OUTCOME_FILE: &str = "ipo_outcomes.csv";
pub const IPO_NEWS_FILE: &str = "ipo_news.csv";
pub const NOISE_FILE: &str = "noise_tickers.txt";

/// Everything the studies read, already parsed.
#[derive(Debug, Clone, Default)]
pub struct StudyInputs {
    /// TICKER-kind weekly SVI.
    pub svi: Vec<SviObservation>,
    pub name_svi: Vec<SviObservation>,
    pub product_svi: Vec<SviObservation>,
    pub market: Vec<WeeklyMarketRow>,
    pub dash5: Vec<Dash5Record>,
    pub ipos: Vec<IpoRecord>,
    /// NAME-kind SVI of IPO firms, keyed by the ticker they list under.
    pub ipo_svi: Vec<SviObservation>,
    pub ipo_outcomes: Vec<IpoOutcome>,
    pub ipo_news: Vec<IpoNewsDay>,
    pub noise: NoiseTickerList,
    /// (file name, ingest report) for every file read.
    pub reports: Vec<(String, IngestReport)>,
}

fn open(dir: &Path, name: &str) -> Result<Option<BufReader<File>>, StudyError> {
    let p = dir.join(name);
    if !p.exists() {
        return Ok(None);
    }
    let f = File::open(&p).map_err(|e| StudyError::Input(format!("{}: {e}", p.display())))?;
    Ok(Some(BufReader::new(f)))
}

macro_rules! read_into {
    ($inputs:ident, $dir:expr, $file:expr, $field:ident, $load:expr) => {
        if let Some(r) = open($dir, $file)? {
            let (rows, report) =
                $load(r).map_err(|e| StudyError::Input(format!("{}: {e}", $file)))?;
            $inputs.$field = rows;
            $inputs.reports.push(($file.to_string(), report));
        }
    };
}

impl StudyInputs {
    /// Reads the standard file names from `dir`. `svi.csv` and `market.csv`
    /// are required; the rest default to empty.
    pub fn load_dir(dir: &Path) -> Result<Self, StudyError> {
        for required in [SVI_FILE, MARKET_FILE] {
            if !dir.join(required).exists() {
                return Err(StudyError::Input(format!(
                    "missing {}",
                    dir.join(required).display()
                )));
            }
        }
        let mut s = StudyInputs::default();
        read_into!(s, dir, SVI_FILE, svi, |r| load_svi(r, KeywordKind::Ticker));
        read_into!(s, dir, NAME_SVI_FILE, name_svi, |r| load_svi(
            r,
            KeywordKind::Name
        ));
        read_into!(s, dir, PRODUCT_SVI_FILE, product_svi, |r| load_svi(
            r,
            KeywordKind::Product
        ));
        read_into!(s, dir, MARKET_FILE, market, load_market);
        read_into!(s, dir, DASH5_FILE, dash5, load_dash5);
        read_into!(s, dir, IPO_FILE, ipos, load_ipos);
        read_into!(s, dir, IPO_SVI_FILE, ipo_svi, |r| load_svi(
            r,
            KeywordKind::Name
        ));
        read_into!(s, dir, IPO_OUTCOME_FILE, ipo_outcomes, load_ipo_outcomes);
        read_into!(s, dir, IPO_NEWS_FILE, ipo_news, load_ipo_news);
        if let Some(r) = open(dir, NOISE_FILE)? {
            s.noise =
                load_noise_list(r).map_err(|e| StudyError::Input(format!("{NOISE_FILE}: {e}")))?;
        }
        Ok(s)
    }

    /// Removes noise-list tickers from every per-ticker input. Returns the
    /// share of distinct market tickers removed.
    pub fn drop_noise(&self) -> (StudyInputs, f64) {
        let list = &self.noise;
        let (market, fraction) = filter_noise_tickers(self.market.clone(), list);
        let out = StudyInputs {
            svi: filter_noise_tickers(self.svi.clone(), list).0,
            name_svi: filter_noise_tickers(self.name_svi.clone(), list).0,
            product_svi: filter_noise_tickers(self.product_svi.clone(), list).0,
            market,
            dash5: filter_noise_tickers(self.dash5.clone(), list).0,
            ..self.clone()
        };
        (out, fraction)
    }
}
