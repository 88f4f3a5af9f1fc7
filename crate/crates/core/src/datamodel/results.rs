use super::{Horizon, Ticker, WeekStamp};

/// Which standard errors populate `RegressionResult::se`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SeMethod {
    Conventional,
    Hc1,
}

impl SeMethod {
    pub fn label(&self) -> &'static str {
        match self {
            SeMethod::Conventional => "OLS",
            SeMethod::Hc1 => "OLS-HC1",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RegressionResult {
    pub names: Vec<String>,
    pub coef: Vec<f64>,
    /// Standard errors of the selected `method`.
    pub se: Vec<f64>,
    pub t: Vec<f64>,
    /// Two-sided, Student t with n - k degrees of freedom.
    pub p: Vec<f64>,
    pub se_conventional: Vec<f64>,
    pub se_hc1: Vec<f64>,
    pub r2: f64,
    pub n: usize,
    pub method: SeMethod,
}

impl RegressionResult {
    pub fn df_resid(&self) -> usize {
        self.n - self.coef.len()
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    pub fn coef_of(&self, name: &str) -> Option<f64> {
        self.index_of(name).map(|i| self.coef[i])
    }
}

/// Fama-MacBeth output for one forward-return horizon.
#[derive(Debug, Clone, PartialEq)]
pub struct FmbResult {
    pub horizon: Horizon,
    pub names: Vec<String>,
    /// Weeks whose cross-section produced coefficients, in order.
    pub weeks: Vec<WeekStamp>,
    /// One slope vector per entry of `weeks`; intercepts are not reported.
    pub weekly_coefs: Vec<Vec<f64>>,
    pub weekly_r2: Vec<f64>,
    pub mean_coef: Vec<f64>,
    pub nw_se: Vec<f64>,
    pub t: Vec<f64>,
    pub p: Vec<f64>,
    /// Mean cross-sectional R².
    pub r2: f64,
    pub nw_lags: usize,
    /// Weeks dropped because the cross-section was unusable, with the reason.
    pub skipped: Vec<(WeekStamp, String)>,
}

impl FmbResult {
    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }
}

/// One ticker's VAR(1) fit. `coef[i][j]` is the loading of equation `i`
/// (dependent series i) on lag-1 of series `j`.
#[derive(Debug, Clone, PartialEq)]
pub struct VarFit {
    pub coef: Vec<Vec<f64>>,
    pub intercept: Vec<f64>,
    pub r2: Vec<f64>,
    pub n: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct VarResult {
    pub names: Vec<String>,
    pub per_ticker: Vec<(Ticker, VarFit)>,
    pub avg_coef: Vec<Vec<f64>>,
    pub avg_r2: Vec<f64>,
    /// Block-bootstrap p-value per coefficient cell, when computed.
    pub boot_p: Option<Vec<Vec<f64>>>,
    /// Tickers that failed the length floor or the fit.
    pub excluded: Vec<(Ticker, String)>,
}

impl VarResult {
    pub fn n_tickers(&self) -> usize {
        self.per_ticker.len()
    }
}
