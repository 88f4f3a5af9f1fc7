use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use attention_core::attention::DeltaKind;
use attention_core::datamodel::SeMethod;
use attention_core::econ::BootstrapConfig;
use attention_core::studies::{PeriodSpec, SizeGroup};
use attention_core::synth::DgpConfig;

/// A problem with the command line or config file; exits with status 2.
#[derive(Debug)]
pub struct UsageError(pub String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputFormat {
    Csv,
    Text,
}

impl FromStr for OutputFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "csv" => Ok(OutputFormat::Csv),
            "text" => Ok(OutputFormat::Text),
            _ => Err(format!("unknown format `{s}`; use csv or text")),
        }
    }
}

impl OutputFormat {
    pub fn name(&self) -> &'static str {
        match self {
            OutputFormat::Csv => "csv",
            OutputFormat::Text => "text",
        }
    }
}

fn parse_se(s: &str) -> Result<SeMethod, String> {
    match s {
        "hc1" => Ok(SeMethod::Hc1),
        "ols" | "conventional" => Ok(SeMethod::Conventional),
        _ => Err(format!("unknown standard errors `{s}`; use hc1 or ols")),
    }
}

fn se_name(se: SeMethod) -> &'static str {
    match se {
        SeMethod::Hc1 => "hc1",
        SeMethod::Conventional => "ols",
    }
}

fn delta_name(d: DeltaKind) -> &'static str {
    match d {
        DeltaKind::Log => "log",
        DeltaKind::Arith => "arith",
    }
}

/// Values given on the command line; `None` means "not given".
#[derive(Debug, Default, Clone)]
pub struct Overrides {
    pub input: Option<PathBuf>,
    pub period: Option<String>,
    pub drop_noise: bool,
    pub nw_lags: Option<usize>,
    pub block_len: Option<usize>,
    pub reps: Option<usize>,
    pub seed: Option<u64>,
    pub threads: Option<usize>,
    pub out: Option<PathBuf>,
    pub format: Option<String>,
    pub size_group: Option<String>,
    pub se: Option<String>,
    pub delta: Option<String>,
    pub tickers: Option<usize>,
    pub weeks: Option<usize>,
}

/// Fully resolved settings of one run.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub input: Option<PathBuf>,
    pub period: PeriodSpec,
    pub drop_noise: bool,
    pub nw_lags: usize,
    pub block_len: usize,
    pub reps: usize,
    pub seed: u64,
    /// 0 lets the thread pool pick.
    pub threads: usize,
    pub out: PathBuf,
    pub format: OutputFormat,
    pub size_group: SizeGroup,
    pub se: SeMethod,
    pub delta: DeltaKind,
    /// Generator settings; only `synth` reads them.
    pub dgp: DgpConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        let boot = BootstrapConfig::default();
        RunConfig {
            input: None,
            period: PeriodSpec::all(),
            drop_noise: false,
            nw_lags: 4,
            block_len: boot.block_len,
            reps: boot.reps,
            seed: boot.seed,
            threads: 0,
            out: PathBuf::from("out"),
            format: OutputFormat::Csv,
            size_group: SizeGroup::Small,
            se: SeMethod::Hc1,
            delta: DeltaKind::Log,
            dgp: DgpConfig::default(),
        }
    }
}

fn parse<T: FromStr>(key: &str, value: &str) -> Result<T, UsageError> {
    value.trim().parse().map_err(|_| UsageError(format!("{key}: cannot parse `{value}`")))
}

fn parse_with<T>(key: &str, value: &str, f: impl Fn(&str) -> Result<T, String>) -> Result<T, UsageError> {
    f(value.trim()).map_err(|e| UsageError(format!("{key}: {e}")))
}

fn parse_bool(key: &str, value: &str) -> Result<bool, UsageError> {
    match value.trim() {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        _ => Err(UsageError(format!("{key}: expected true or false, got `{value}`"))),
    }
}

impl RunConfig {
    pub fn bootstrap(&self) -> BootstrapConfig {
        BootstrapConfig { block_len: self.block_len, reps: self.reps, seed: self.seed }
    }

    /// Applies one `key = value` setting.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), UsageError> {
        match key {
            "input" => self.input = Some(PathBuf::from(value.trim())),
            "period" => self.period = parse_with(key, value, PeriodSpec::from_str)?,
            "drop_noise" => self.drop_noise = parse_bool(key, value)?,
            "nw_lags" => self.nw_lags = parse(key, value)?,
            "block_len" => self.block_len = parse(key, value)?,
            "reps" => self.reps = parse(key, value)?,
            "seed" => self.seed = parse(key, value)?,
            "threads" => self.threads = parse(key, value)?,
            "out" => self.out = PathBuf::from(value.trim()),
            "format" => self.format = parse_with(key, value, OutputFormat::from_str)?,
            "size_group" => self.size_group = parse_with(key, value, SizeGroup::from_str)?,
            "se" => self.se = parse_with(key, value, parse_se)?,
            "delta" => self.delta = parse_with(key, value, DeltaKind::from_str)?,
            _ if DgpConfig::KEYS.contains(&key) => {
                self.dgp.set(key, value).map_err(|e| UsageError(e.to_string()))?
            }
            _ => return Err(UsageError(format!("unknown config key `{key}`"))),
        }
        Ok(())
    }

    /// Reads a flat `key = value` file; `#` starts a comment.
    pub fn apply_file(&mut self, path: &Path) -> Result<(), UsageError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| UsageError(format!("cannot read config {}: {e}", path.display())))?;
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| UsageError(format!("{}:{}: expected `key = value`", path.display(), i + 1)))?;
            self.set(k.trim(), v)
                .map_err(|e| UsageError(format!("{}:{}: {e}", path.display(), i + 1)))?;
        }
        Ok(())
    }

    /// Flags win over the config file, which wins over defaults.
    pub fn resolve(file: Option<&Path>, flags: &Overrides) -> Result<RunConfig, UsageError> {
        let mut cfg = RunConfig::default();
        if let Some(f) = file {
            cfg.apply_file(f)?;
        }
        if let Some(v) = &flags.input {
            cfg.input = Some(v.clone());
        }
        if let Some(v) = &flags.period {
            cfg.set("period", v)?;
        }
        if flags.drop_noise {
            cfg.drop_noise = true;
        }
        if let Some(v) = flags.nw_lags {
            cfg.nw_lags = v;
        }
        if let Some(v) = flags.block_len {
            cfg.block_len = v;
        }
        if let Some(v) = flags.reps {
            cfg.reps = v;
        }
        if let Some(v) = flags.seed {
            cfg.seed = v;
        }
        if let Some(v) = flags.threads {
            cfg.threads = v;
        }
        if let Some(v) = &flags.out {
            cfg.out = v.clone();
        }
        if let Some(v) = &flags.format {
            cfg.set("format", v)?;
        }
        if let Some(v) = &flags.size_group {
            cfg.set("size_group", v)?;
        }
        if let Some(v) = &flags.se {
            cfg.set("se", v)?;
        }
        if let Some(v) = &flags.delta {
            cfg.set("delta", v)?;
        }
        if let Some(v) = flags.tickers {
            cfg.dgp.n_tickers = v;
        }
        if let Some(v) = flags.weeks {
            cfg.dgp.n_weeks = v;
        }
        cfg.dgp.seed = cfg.seed;
        Ok(cfg)
    }

    /// One-line record of every setting that can change an output. The
    /// output directory and thread count are left out: neither affects
    /// the bytes written.
    pub fn echo(&self, command: &str) -> String {
        let mut s = format!("# config: command={command}");
        let input = self.input.as_ref().map(|p| p.display().to_string()).unwrap_or_default();
        let _ = write!(
            s,
            " input={input} period={} period_start={} period_end={} drop_noise={} nw_lags={} block_len={} reps={} seed={} format={} size_group={} se={} delta={}",
            self.period.label,
            self.period.start,
            self.period.end,
            self.drop_noise,
            self.nw_lags,
            self.block_len,
            self.reps,
            self.seed,
            self.format.name(),
            self.size_group.label(),
            se_name(self.se),
            delta_name(self.delta),
        );
        if command == "synth" {
            let mut dgp = self.dgp.clone();
            dgp.seed = self.seed;
            for k in DgpConfig::KEYS.iter().filter(|k| **k != "seed") {
                let _ = write!(s, " {k}={}", dgp_value(&dgp, k));
            }
        }
        s
    }
}

fn dgp_value(cfg: &DgpConfig, key: &str) -> String {
    // The truth listing already renders every key.
    cfg.pairs().into_iter().find(|(k, _)| k == key).map(|(_, v)| v).unwrap_or_default()
}
