use std::collections::BTreeMap;
use std::path::Path;
use std::process::{Command, Output};

const BIN: &str = env!("CARGO_BIN_EXE_svi-attention");

fn run(args: &[&str]) -> Output {
    Command::new(BIN).args(args).output().expect("binary runs")
}

fn tree(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    std::fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (e.file_name().to_string_lossy().into_owned(), std::fs::read(e.path()).unwrap())
        })
        .collect()
}

/// A small synthetic input tree.
fn small_panel(dir: &Path) -> String {
    let data = dir.join("data");
    let d = data.to_str().unwrap();
    let o = run(&["synth", "--seed", "3", "--tickers", "60", "--weeks", "150", "--out", d]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    d.to_string()
}

#[test]
fn unknown_subcommand_is_usage_error() {
    let o = run(&["frobnicate"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("Usage"));
    assert_eq!(run(&[]).status.code(), Some(2));
    assert_eq!(run(&["retail", "--reps", "many"]).status.code(), Some(2));
    assert_eq!(run(&["retail", "--format", "xml"]).status.code(), Some(2));
}

#[test]
fn synth_is_byte_deterministic() {
    let tmp = tempfile::tempdir().unwrap();
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    for dir in [&a, &b] {
        let o = run(&["synth", "--seed", "7", "--tickers", "40", "--weeks", "130", "--out", dir.to_str().unwrap()]);
        assert_eq!(o.status.code(), Some(0));
    }
    let (ta, tb) = (tree(&a), tree(&b));
    assert_eq!(ta, tb);
    assert!(ta.contains_key("svi.csv") && ta.contains_key("truth.txt"));
    let truth = String::from_utf8(ta["truth.txt"].clone()).unwrap();
    assert!(truth.starts_with("# config: command=synth"));
    assert!(truth.contains("\nseed = 7\n"));
    // Data files keep the exact input format, header first.
    assert!(ta["svi.csv"].starts_with(b"ticker,week_start,svi\n"));
}

#[test]
fn price_pressure_with_noise_filter() {
    let tmp = tempfile::tempdir().unwrap();
    let data = small_panel(tmp.path());
    let out = tmp.path().join("out");
    let o = run(&["price-pressure", "--input", &data, "--period", "2009-2019", "--drop-noise", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let text = std::fs::read_to_string(out.join("table_6.csv")).unwrap();
    let mut lines = text.lines();
    let first = lines.next().unwrap();
    assert!(first.starts_with("# config: command=price-pressure"));
    assert!(first.contains("drop_noise=true") && first.contains("seed=20110901"));
    assert_eq!(lines.next().unwrap(), ",Week1,Week2,Week3,Week4,Week 5-52");
    assert!(text.contains("noise tickers removed: fraction"));
    assert!(!out.join("table_5.csv").exists());
}

#[test]
fn data_errors_exit_one_with_reason() {
    let tmp = tempfile::tempdir().unwrap();
    let missing = tmp.path().join("nothing");
    let o = run(&["correlate", "--input", missing.to_str().unwrap(), "--out", tmp.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).starts_with("error: "));

    // A period with no data is an estimation error, not a usage error.
    let data = small_panel(tmp.path());
    let o = run(&["ipo-event", "--input", &data, "--period", "2004-2008", "--out", tmp.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn config_file_and_flag_precedence() {
    let tmp = tempfile::tempdir().unwrap();
    let data = small_panel(tmp.path());
    let conf = tmp.path().join("run.conf");
    std::fs::write(&conf, format!("input = {data}\nreps = 150\nseed = 11\nformat = text\n")).unwrap();
    let out = tmp.path().join("out");
    let o = run(&["var-leadlag", "--config", conf.to_str().unwrap(), "--seed", "12", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let text = std::fs::read_to_string(out.join("table_3.txt")).unwrap();
    let first = text.lines().next().unwrap();
    assert!(first.contains("reps=150") && first.contains("seed=12") && first.contains("format=text"), "{first}");

    std::fs::write(&conf, "replicates = 150\n").unwrap();
    let o = run(&["var-leadlag", "--config", conf.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn outputs_do_not_depend_on_thread_count() {
    let tmp = tempfile::tempdir().unwrap();
    let data = small_panel(tmp.path());
    let mut trees = Vec::new();
    for threads in ["1", "3"] {
        let out = tmp.path().join(format!("out{threads}"));
        for cmd in ["var-leadlag", "price-pressure"] {
            let o = run(&[cmd, "--input", &data, "--reps", "120", "--threads", threads, "--out", out.to_str().unwrap()]);
            assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
        }
        trees.push(tree(&out));
    }
    assert_eq!(trees[0], trees[1]);
}

#[test]
fn ipo_event_writes_figure_series() {
    let tmp = tempfile::tempdir().unwrap();
    let data = small_panel(tmp.path());
    let out = tmp.path().join("out");
    let o = run(&["ipo-event", "--input", &data, "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let fig4 = std::fs::read_to_string(out.join("fig4_series.csv")).unwrap();
    let rows: Vec<&str> = fig4.lines().skip(2).collect();
    assert_eq!(rows.len(), 17);
    assert!(rows[0].starts_with("-8,") && rows[16].starts_with("8,"));
    for f in ["fig4_median_series.csv", "fig5_series.csv", "fig5_median_series.csv", "fig6_series.csv", "table_7.csv"] {
        let text = std::fs::read_to_string(out.join(f)).unwrap();
        assert!(text.starts_with("# config: command=ipo-event"), "{f}");
    }
}
