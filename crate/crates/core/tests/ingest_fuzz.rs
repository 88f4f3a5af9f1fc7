//! Loaders on large corrupted corpora: every row is either accepted or
//! rejected with the reason that was planted in it.

use std::collections::BTreeMap;

use attention_core::datamodel::KeywordKind;
use attention_core::ingest::{
    load_dash5, load_ipo_news, load_ipo_outcomes, load_ipos, load_market, load_svi, IngestError,
    IngestReport, RejectReason, DASH5_HEADER, IPO_HEADER, IPO_NEWS_HEADER, IPO_OUTCOME_HEADER,
    MARKET_HEADER, SVI_HEADER,
};
use chrono::{Days, NaiveDate};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const ROWS: usize = 10_000;

fn monday(i: usize) -> NaiveDate {
    NaiveDate::from_ymd_opt(2004, 1, 5).unwrap() + Days::new(7 * i as u64)
}

fn symbol(i: usize) -> String {
    let a = b'A' + (i / 26 / 26 % 26) as u8;
    let b = b'A' + (i / 26 % 26) as u8;
    let c = b'A' + (i % 26) as u8;
    String::from_utf8(vec![a, b, c]).unwrap()
}

fn assert_identity(r: &IngestReport) {
    assert_eq!(
        r.rows_read,
        r.rows_accepted + r.rows_rejected,
        "{}",
        r.summary()
    );
    assert_eq!(r.rejection_reasons.values().sum::<usize>(), r.rows_rejected);
}

#[test]
fn svi_planted_rejections_are_counted_exactly() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut text = SVI_HEADER.join(",") + "\n";
    let mut expected: BTreeMap<RejectReason, usize> = BTreeMap::new();
    let mut accepted = 0;
    let mut valid_keys: Vec<String> = Vec::new();
    for i in 0..ROWS {
        let key = format!("{},{}", symbol(i / 400), monday(i % 400));
        let line = match rng.random_range(0..10) {
            0 => {
                *expected.entry(RejectReason::RangeViolation).or_default() += 1;
                format!("{key},{}", rng.random_range(101..1000))
            }
            1 => {
                *expected.entry(RejectReason::NotMonday).or_default() += 1;
                let d = monday(i % 400) + Days::new(rng.random_range(1..7));
                format!("{},{d},50", symbol(i / 400))
            }
            2 => {
                *expected.entry(RejectReason::MalformedRow).or_default() += 1;
                match rng.random_range(0..4) {
                    0 => key.clone(),
                    1 => format!("{key},50,extra"),
                    2 => format!("{key},fifty"),
                    _ => format!("{},2004-13-45,50", symbol(i / 400)),
                }
            }
            3 if !valid_keys.is_empty() => {
                *expected.entry(RejectReason::DuplicateKey).or_default() += 1;
                let k = &valid_keys[rng.random_range(0..valid_keys.len())];
                format!("{k},{}", rng.random_range(0..=100))
            }
            _ => {
                accepted += 1;
                valid_keys.push(key.clone());
                format!("{key},{}", rng.random_range(0..=100))
            }
        };
        text.push_str(&line);
        text.push('\n');
    }
    let (rows, report) = load_svi(text.as_bytes(), KeywordKind::Ticker).unwrap();
    assert_identity(&report);
    assert_eq!(report.rows_read, ROWS);
    assert_eq!(report.rows_accepted, accepted);
    assert_eq!(rows.len(), accepted);
    assert_eq!(report.rejection_reasons, expected);

    // Same bytes, same answer.
    let (rows2, report2) = load_svi(text.as_bytes(), KeywordKind::Ticker).unwrap();
    assert_eq!(rows, rows2);
    assert_eq!(report, report2);
}

#[test]
fn market_planted_rejections_are_counted_exactly() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut text = MARKET_HEADER.join(",") + "\n";
    let mut expected: BTreeMap<RejectReason, usize> = BTreeMap::new();
    let mut accepted = 0;
    for i in 0..ROWS {
        let key = format!("{},{}", symbol(i / 300), monday(i % 300));
        let (ret, turnover, cap) = match rng.random_range(0..8) {
            0 => (-1.0 - rng.random::<f64>(), 0.01, 1e9),
            1 => (0.01, -rng.random::<f64>() - 1e-6, 1e9),
            2 => (0.01, 0.01, -rng.random::<f64>() * 1e9),
            3 => {
                *expected.entry(RejectReason::MalformedRow).or_default() += 1;
                text.push_str(&format!("{key},0.01,NaN,1e9,0,0.0\n"));
                continue;
            }
            _ => (
                rng.random_range(-0.5..0.5),
                rng.random_range(0.0..0.1),
                rng.random_range(1e6..1e11),
            ),
        };
        let ok = ret > -1.0 && turnover >= 0.0 && cap > 0.0;
        if ok {
            accepted += 1;
        } else {
            *expected.entry(RejectReason::RangeViolation).or_default() += 1;
        }
        text.push_str(&format!(
            "{key},{ret},{turnover},{cap},{},0.001\n",
            rng.random_range(0..5)
        ));
    }
    let (rows, report) = load_market(text.as_bytes()).unwrap();
    assert_identity(&report);
    assert_eq!(report.rows_read, ROWS);
    assert_eq!(rows.len(), accepted);
    assert_eq!(report.rejection_reasons, expected);
}

#[test]
fn dash5_planted_rejections_are_counted_exactly() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut text = DASH5_HEADER.join(",") + "\n";
    let mut expected: BTreeMap<RejectReason, usize> = BTreeMap::new();
    let mut accepted = 0;
    for i in 0..ROWS {
        // One row per (ticker, month, bucket), so no duplicates arise by accident.
        let ticker = symbol(i / 480);
        let month = format!(
            "{}-{:02}",
            2005 + (i / 4 % 120) / 12,
            (i / 4 % 120) % 12 + 1
        );
        let bucket = format!("B{}", i % 4 + 1);
        let line = match rng.random_range(0..6) {
            0 => {
                *expected.entry(RejectReason::UnknownBucket).or_default() += 1;
                format!("{ticker},{month},B{},10,100,1000", rng.random_range(5..10))
            }
            1 => {
                *expected.entry(RejectReason::NegativeCount).or_default() += 1;
                format!(
                    "{ticker},{month},{bucket},-{},100,1000",
                    rng.random_range(1..50)
                )
            }
            2 => {
                *expected.entry(RejectReason::MalformedRow).or_default() += 1;
                format!("{ticker},{month}-01,{bucket},10,100,1000")
            }
            _ => {
                accepted += 1;
                format!(
                    "{ticker},{month},{bucket},{},{},1000000",
                    rng.random_range(0..500),
                    rng.random_range(0..5000)
                )
            }
        };
        text.push_str(&line);
        text.push('\n');
    }
    let (rows, report) = load_dash5(text.as_bytes()).unwrap();
    assert_identity(&report);
    assert_eq!(report.rows_read, ROWS);
    assert_eq!(rows.len(), accepted);
    assert_eq!(report.rejection_reasons, expected);
}

/// Random printable noise, including commas and stray field content.
fn garbage(rng: &mut ChaCha8Rng) -> String {
    const ALPHABET: &[u8] = b"ABCXYZ0123456789-.,,,,e ";
    let len = rng.random_range(0..60);
    (0..len)
        .map(|_| ALPHABET[rng.random_range(0..ALPHABET.len())] as char)
        .collect()
}

#[test]
fn accounting_identity_holds_on_random_noise() {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    type Loader = fn(&[u8]) -> IngestReport;
    let loaders: [(&[&str], Loader); 6] = [
        (SVI_HEADER, |b| load_svi(b, KeywordKind::Ticker).unwrap().1),
        (MARKET_HEADER, |b| load_market(b).unwrap().1),
        (DASH5_HEADER, |b| load_dash5(b).unwrap().1),
        (IPO_HEADER, |b| load_ipos(b).unwrap().1),
        (IPO_OUTCOME_HEADER, |b| load_ipo_outcomes(b).unwrap().1),
        (IPO_NEWS_HEADER, |b| load_ipo_news(b).unwrap().1),
    ];
    for (header, load) in loaders {
        let mut text = header.join(",") + "\n";
        for _ in 0..ROWS {
            text.push_str(&garbage(&mut rng));
            text.push('\n');
        }
        let report = load(text.as_bytes());
        assert_identity(&report);
        assert!(report.rows_read > 0);
    }
}

#[test]
fn header_problems_are_errors_not_rejections() {
    assert!(matches!(
        load_svi(&b""[..], KeywordKind::Ticker),
        Err(IngestError::Empty(_))
    ));
    assert!(matches!(
        load_svi(
            &b"ticker,week,svi\nAAPL,2019-07-08,50\n"[..],
            KeywordKind::Ticker
        ),
        Err(IngestError::BadHeader { .. })
    ));
    assert!(matches!(
        load_market(&b"ticker,week_start\n"[..]),
        Err(IngestError::BadHeader { .. })
    ));
}
