use std::fmt;
use std::str::FromStr;

use chrono::{Datelike, Duration, NaiveDate, Weekday};

use super::DataError;

/// A calendar week keyed by its Monday.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct WeekStamp(NaiveDate);

impl WeekStamp {
    /// Monday of the ISO week containing `date`.
    pub fn of(date: NaiveDate) -> Self {
        let back = date.weekday().num_days_from_monday() as i64;
        WeekStamp(date - Duration::days(back))
    }

    /// Wraps a date that must already be a Monday.
    pub fn from_monday(date: NaiveDate) -> Result<Self, DataError> {
        if date.weekday() == Weekday::Mon {
            Ok(WeekStamp(date))
        } else {
            Err(DataError::NotMonday(date))
        }
    }

    pub fn start(&self) -> NaiveDate {
        self.0
    }

    pub fn succ(&self) -> Self {
        self.offset(1)
    }

    pub fn pred(&self) -> Self {
        self.offset(-1)
    }

    pub fn offset(&self, weeks: i64) -> Self {
        WeekStamp(self.0 + Duration::days(7 * weeks))
    }

    /// Signed number of weeks from `earlier` to `self`.
    pub fn weeks_since(&self, earlier: WeekStamp) -> i64 {
        (self.0 - earlier.0).num_days() / 7
    }

    /// Month that contains the week's Monday.
    pub fn month(&self) -> YearMonth {
        YearMonth::of(self.0)
    }
}

/// Monday of the ISO week containing `date`.
pub fn week_of(date: NaiveDate) -> WeekStamp {
    WeekStamp::of(date)
}

impl fmt::Display for WeekStamp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0.format("%Y-%m-%d"))
    }
}

impl FromStr for WeekStamp {
    type Err = DataError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        WeekStamp::from_monday(parse_date(s)?)
    }
}

/// Strict ISO-8601 `YYYY-MM-DD`.
pub fn parse_date(s: &str) -> Result<NaiveDate, DataError> {
    NaiveDate::parse_from_str(s, "%Y-%m-%d").map_err(|_| DataError::BadDate(s.to_string()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct YearMonth {
    year: i32,
    month: u32,
}

impl YearMonth {
    pub fn new(year: i32, month: u32) -> Result<Self, DataError> {
        if (1..=12).contains(&month) {
            Ok(YearMonth { year, month })
        } else {
            Err(DataError::BadMonth(format!("{year}-{month}")))
        }
    }

    pub fn of(date: NaiveDate) -> Self {
        YearMonth {
            year: date.year(),
            month: date.month(),
        }
    }

    pub fn year(&self) -> i32 {
        self.year
    }

    pub fn month(&self) -> u32 {
        self.month
    }

    pub fn first_day(&self) -> NaiveDate {
        NaiveDate::from_ymd_opt(self.year, self.month, 1).expect("validated month")
    }

    pub fn succ(&self) -> Self {
        if self.month == 12 {
            YearMonth {
                year: self.year + 1,
                month: 1,
            }
        } else {
            YearMonth {
                year: self.year,
                month: self.month + 1,
            }
        }
    }

    pub fn pred(&self) -> Self {
        if self.month == 1 {
            YearMonth {
                year: self.year - 1,
                month: 12,
            }
        } else {
            YearMonth {
                year: self.year,
                month: self.month - 1,
            }
        }
    }

    /// First Monday whose date falls inside this month.
    pub fn first_week(&self) -> WeekStamp {
        let first = self.first_day();
        let w = WeekStamp::of(first);
        if w.start() < first {
            w.succ()
        } else {
            w
        }
    }
}

impl fmt::Display for YearMonth {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:04}-{:02}", self.year, self.month)
    }
}

impl FromStr for YearMonth {
    type Err = DataError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || DataError::BadMonth(s.to_string());
        let (y, m) = s.split_once('-').ok_or_else(bad)?;
        if y.len() != 4 || m.len() != 2 {
            return Err(bad());
        }
        let year: i32 = y.parse().map_err(|_| bad())?;
        let month: u32 = m.parse().map_err(|_| bad())?;
        YearMonth::new(year, month).map_err(|_| bad())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn d(s: &str) -> NaiveDate {
        parse_date(s).unwrap()
    }

    #[test]
    fn week_of_examples() {
        assert_eq!(week_of(d("2019-07-10")).start(), d("2019-07-08"));
        assert_eq!(week_of(d("2019-07-08")).start(), d("2019-07-08"));
        assert_eq!(week_of(d("2019-07-14")).start(), d("2019-07-08"));
    }

    #[test]
    fn sunday_matches_iso_week_table() {
        // Independent route: chrono's ISO week numbering, then Monday of that ISO week.
        let mut date = d("2018-12-20");
        for _ in 0..800 {
            let iso = date.iso_week();
            let monday = NaiveDate::from_isoywd_opt(iso.year(), iso.week(), Weekday::Mon).unwrap();
            assert_eq!(week_of(date).start(), monday, "{date}");
            date = date.succ_opt().unwrap();
        }
    }

    #[test]
    fn non_monday_rejected() {
        assert!(matches!(
            "2019-07-09".parse::<WeekStamp>(),
            Err(DataError::NotMonday(_))
        ));
        assert!("2019-07-08".parse::<WeekStamp>().is_ok());
    }

    #[test]
    fn year_month_roundtrip_and_neighbors() {
        let m: YearMonth = "2019-12".parse().unwrap();
        assert_eq!(m.succ().to_string(), "2020-01");
        assert_eq!(m.succ().pred(), m);
        assert!("2019-13".parse::<YearMonth>().is_err());
        assert!("19-01".parse::<YearMonth>().is_err());
        // 2019-12-01 is a Sunday; December's first Monday is the 2nd.
        assert_eq!(m.first_week().start(), d("2019-12-02"));
    }

    #[test]
    fn week_arithmetic() {
        let w = week_of(d("2019-07-10"));
        assert_eq!(w.offset(3).weeks_since(w), 3);
        assert_eq!(w.offset(-5).weeks_since(w), -5);
        assert_eq!(w.succ().pred(), w);
    }
}
