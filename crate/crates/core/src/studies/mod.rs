//! The empirical battery: correlation matrix, VAR lead-lag, retail-order
//! regressions, Fama-MacBeth price pressure, and the IPO event and
//! cross-section studies. Each study returns its numbers together with a
//! rendered-ready [`StudyTable`].

mod correlation;
mod inputs;
mod ipo;
mod leadlag;
mod period;
mod pressure;
mod retail;
mod table;

use thiserror::Error;

use crate::attention::AttentionError;
use crate::econ::EconError;

pub use correlation::{run_correlation_study, CORR_VARS};
pub use inputs::*;
pub use ipo::{
    compute_media, compute_price_revision, event_window, ipo_metrics, run_ipo_cross_section,
    run_ipo_event_study, EventProfile, GroupStats, IpoEventResult, IpoMetrics, IpoModel,
    EVENT_WEEKS, IPO_CONTROLS, IPO_MAIN_VARS, MIN_IPOS_PER_GROUP,
};
pub use leadlag::{leadlag_samples, run_var_leadlag_study, LEADLAG_VARS};
pub use period::PeriodSpec;
pub use pressure::{pressure_sections, run_price_pressure_study, PressureResult, PRESSURE_TERMS};
pub use retail::{retail_design, run_retail_study, RetailDesign, SizeGroup, RETAIL_REGRESSORS};
pub use table::{format_number, parse_cell, Cell, ParsedCell, StudyTable};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum StudyError {
    #[error("input error: {0}")]
    Input(String),
    #[error(transparent)]
    Econ(#[from] EconError),
    #[error(transparent)]
    Attention(#[from] AttentionError),
    #[error("no usable data: {0}")]
    EmptyInput(String),
    #[error("too few IPOs per group: low {low}, high {high}, need {needed}")]
    TooFewIpos {
        low: usize,
        high: usize,
        needed: usize,
    },
    #[error("invalid price range: offer {offer}, range [{low}, {high}]")]
    InvalidRange { offer: f64, low: f64, high: f64 },
    #[error("news window is empty: filing {filing} is not before listing {listing}")]
    EmptyWindow { filing: String, listing: String },
    #[error("model has no regressors")]
    NoRegressors,
}

/// Numbers for programmatic checks plus the table for display.
#[derive(Debug, Clone)]
pub struct StudyOutput<T> {
    pub result: T,
    pub table: StudyTable,
}
