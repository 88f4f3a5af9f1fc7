use std::fmt;
use std::str::FromStr;

use crate::datamodel::{parse_date, WeekStamp, YearMonth};

/// Half-open range of weeks `[start, end)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PeriodSpec {
    pub start: WeekStamp,
    pub end: WeekStamp,
    pub label: String,
}

fn monday(s: &str) -> WeekStamp {
    s.parse().expect("built-in period bounds are Mondays")
}

impl PeriodSpec {
    pub fn new(start: WeekStamp, end: WeekStamp, label: impl Into<String>) -> Result<Self, String> {
        if start >= end {
            return Err(format!("period start {start} is not before end {end}"));
        }
        Ok(PeriodSpec {
            start,
            end,
            label: label.into(),
        })
    }

    /// 2004-01-05 up to the first week of 2009.
    pub fn early() -> Self {
        PeriodSpec {
            start: monday("2004-01-05"),
            end: monday("2009-01-05"),
            label: "2004-2008".into(),
        }
    }

    /// 2009-01-05 up to the first week of 2020.
    pub fn late() -> Self {
        PeriodSpec {
            start: monday("2009-01-05"),
            end: monday("2020-01-06"),
            label: "2009-2019".into(),
        }
    }

    /// Every week representable in practice.
    pub fn all() -> Self {
        PeriodSpec {
            start: monday("1900-01-01"),
            end: monday("2199-12-30"),
            label: "all".into(),
        }
    }

    pub fn builtins() -> [PeriodSpec; 2] {
        [Self::early(), Self::late()]
    }

    pub fn contains(&self, w: WeekStamp) -> bool {
        self.start <= w && w < self.end
    }

    /// A month belongs to the period holding its first Monday.
    pub fn contains_month(&self, m: YearMonth) -> bool {
        self.contains(m.first_week())
    }
}

impl fmt::Display for PeriodSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} [{}, {})", self.label, self.start, self.end)
    }
}

/// `2004-2008`, `2009-2019`, `all`, or `START..END` with dates of any
/// weekday, each mapped to its week.
impl FromStr for PeriodSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s.trim() {
            "2004-2008" => Ok(Self::early()),
            "2009-2019" => Ok(Self::late()),
            "all" => Ok(Self::all()),
            other => {
                let (a, b) = other.split_once("..").ok_or_else(|| {
                    format!("unknown period `{other}`; use 2004-2008, 2009-2019, all or START..END")
                })?;
                let start = WeekStamp::of(parse_date(a.trim()).map_err(|e| e.to_string())?);
                let end = WeekStamp::of(parse_date(b.trim()).map_err(|e| e.to_string())?);
                PeriodSpec::new(start, end, other)
            }
        }
    }
}
