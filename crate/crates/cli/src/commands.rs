use std::fs;

use anyhow::{bail, Context, Result};
use attention_core::attention::{build_attention_panel, PanelConfig};
use attention_core::studies::{
    ipo_metrics, run_correlation_study, run_ipo_cross_section, run_ipo_event_study, run_price_pressure_study,
    run_retail_study, run_var_leadlag_study, IpoModel, StudyInputs, StudyTable,
};
use attention_core::synth::generate;

use crate::config::{OutputFormat, RunConfig};

/// Writes files under the output directory, each led by the config line.
/// Data-file formats without comment support are written verbatim.
struct Sink<'a> {
    cfg: &'a RunConfig,
    header: String,
}

impl<'a> Sink<'a> {
    fn new(cfg: &'a RunConfig, command: &str) -> Result<Self> {
        fs::create_dir_all(&cfg.out).with_context(|| format!("cannot create {}", cfg.out.display()))?;
        Ok(Sink { cfg, header: cfg.echo(command) })
    }

    fn raw(&self, name: &str, bytes: &[u8]) -> Result<()> {
        let path = self.cfg.out.join(name);
        fs::write(&path, bytes).with_context(|| format!("cannot write {}", path.display()))
    }

    fn file(&self, name: &str, body: &str) -> Result<()> {
        self.raw(name, format!("{}\n{body}", self.header).as_bytes())
    }

    fn table(&self, stem: &str, table: &StudyTable) -> Result<()> {
        match self.cfg.format {
            OutputFormat::Csv => self.file(&format!("{stem}.csv"), &table.to_csv()),
            OutputFormat::Text => self.file(&format!("{stem}.txt"), &table.to_text()),
        }
    }
}

fn load_inputs(cfg: &RunConfig) -> Result<StudyInputs> {
    let Some(dir) = &cfg.input else {
        bail!("no input directory; pass --input DIR or set `input` in the config file");
    };
    if !dir.is_dir() {
        bail!("input directory {} does not exist", dir.display());
    }
    let inputs = StudyInputs::load_dir(dir)?;
    for (file, report) in &inputs.reports {
        if report.rows_rejected > 0 {
            eprintln!("warning: {file}: {}", report.summary());
        }
    }
    Ok(inputs)
}

/// Empty for missing or non-finite values.
fn num(v: Option<f64>) -> String {
    match v {
        Some(x) if x.is_finite() => x.to_string(),
        _ => String::new(),
    }
}

fn series(header: &str, rows: impl IntoIterator<Item = (String, Option<f64>)>) -> String {
    let mut s = format!("{header}\n");
    for (k, v) in rows {
        s.push_str(&format!("{k},{}\n", num(v)));
    }
    s
}

pub fn correlate(cfg: &RunConfig) -> Result<()> {
    let inputs = load_inputs(cfg)?;
    let out = run_correlation_study(&inputs, &cfg.period)?;
    Sink::new(cfg, "correlate")?.table("table_2", &out.table)
}

pub fn var_leadlag(cfg: &RunConfig) -> Result<()> {
    let inputs = load_inputs(cfg)?;
    let out = run_var_leadlag_study(&inputs, &cfg.period, &cfg.bootstrap())?;
    Sink::new(cfg, "var-leadlag")?.table("table_3", &out.table)
}

pub fn retail(cfg: &RunConfig) -> Result<()> {
    let inputs = load_inputs(cfg)?;
    let out = run_retail_study(&inputs, &cfg.period, cfg.size_group, cfg.se, cfg.delta)?;
    Sink::new(cfg, "retail")?.table("table_4", &out.table)
}

pub fn price_pressure(cfg: &RunConfig) -> Result<()> {
    let inputs = load_inputs(cfg)?;
    if cfg.drop_noise && inputs.noise.is_empty() {
        bail!("--drop-noise needs a non-empty noise ticker list");
    }
    let out = run_price_pressure_study(&inputs, &cfg.period, cfg.drop_noise, cfg.nw_lags)?;
    let stem = if cfg.drop_noise { "table_6" } else { "table_5" };
    Sink::new(cfg, "price-pressure")?.table(stem, &out.table)
}

pub fn ipo_event(cfg: &RunConfig) -> Result<()> {
    let inputs = load_inputs(cfg)?;
    let out = run_ipo_event_study(&inputs, &cfg.period)?;
    let sink = Sink::new(cfg, "ipo-event")?;
    sink.table("table_7", &out.table)?;

    let p = &out.result.profile;
    let by_week = |values: &[f64]| -> Vec<(String, Option<f64>)> {
        p.weeks.iter().zip(values).map(|(w, v)| (w.to_string(), Some(*v))).collect()
    };
    sink.file("fig4_series.csv", &series("event_week,mean_log_svi", by_week(&p.mean_log_svi)))?;
    sink.file("fig4_median_series.csv", &series("event_week,median_log_svi", by_week(&p.median_log_svi)))?;
    sink.file("fig5_series.csv", &series("event_week,mean_asvi", by_week(&p.mean_asvi)))?;
    sink.file("fig5_median_series.csv", &series("event_week,median_asvi", by_week(&p.median_asvi)))?;
    let groups = [
        ("Low".to_string(), Some(out.result.low.day1_mean)),
        ("High".to_string(), Some(out.result.high.day1_mean)),
    ];
    sink.file("fig6_series.csv", &series("asvi_group,mean_day1_return", groups))
}

pub fn ipo_cross(cfg: &RunConfig) -> Result<()> {
    let inputs = load_inputs(cfg)?;
    let out = run_ipo_cross_section(&inputs, &cfg.period, &IpoModel::standard())?;
    Sink::new(cfg, "ipo-cross")?.table("table_8", &out.table)
}

/// The per-ticker-week attention panel and per-IPO metrics.
pub fn metrics(cfg: &RunConfig) -> Result<()> {
    let inputs = load_inputs(cfg)?;
    let sink = Sink::new(cfg, "metrics")?;

    let panel = build_attention_panel(
        &inputs.svi,
        &inputs.product_svi,
        &inputs.market,
        &inputs.dash5,
        &PanelConfig::default(),
    );
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record([
        "ticker", "week_start", "asvi", "apsvi", "abn_ret", "abn_turnover", "news_dummy", "log_mkt_cap", "dash5_pct",
    ])?;
    for r in panel.iter().filter(|r| cfg.period.contains(r.week)) {
        w.write_record([
            r.ticker.to_string(),
            r.week.to_string(),
            num(r.asvi),
            num(r.apsvi),
            num(Some(r.abn_ret)),
            num(r.abn_turnover),
            r.news_dummy.to_string(),
            num(Some(r.log_mkt_cap)),
            num(r.dash5_pct),
        ])?;
    }
    sink.file("attention_panel.csv", &String::from_utf8(w.into_inner()?)?)?;

    let (ipos, notes) = ipo_metrics(&inputs, &cfg.period)?;
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record([
        "name",
        "ticker",
        "listing_week",
        "asvi_pre",
        "media",
        "price_revision",
        "log_offering_size",
        "log_asset_size",
        "industry_return",
        "day1_ret",
        "ret_w5_52",
    ])?;
    for m in &ipos {
        w.write_record([
            m.name.clone(),
            m.ticker.as_ref().map(|t| t.to_string()).unwrap_or_default(),
            m.listing_week.to_string(),
            num(m.asvi_pre),
            num(m.media),
            num(Some(m.price_revision)),
            num(Some(m.log_offering_size)),
            num(Some(m.log_asset_size)),
            num(Some(m.industry_return)),
            num(m.day1_ret),
            num(m.ret_w5_52),
        ])?;
    }
    let mut body = String::from_utf8(w.into_inner()?)?;
    for n in notes {
        body.push_str(&format!("# {n}\n"));
    }
    sink.file("ipo_metrics.csv", &body)
}

/// Generates a synthetic input tree. Data files keep the exact input
/// formats; the config line goes into `truth.txt`.
pub fn synth(cfg: &RunConfig) -> Result<()> {
    let data = generate(&cfg.dgp)?;
    let sink = Sink::new(cfg, "synth")?;
    for (name, bytes) in data.files()? {
        if name == "truth.txt" {
            sink.file(&name, std::str::from_utf8(&bytes)?)?;
        } else {
            sink.raw(&name, &bytes)?;
        }
    }
    Ok(())
}
