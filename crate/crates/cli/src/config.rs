//! Run settings resolved from flags, an optional TOML file and built-in
//! defaults, in that order of precedence.
//!
//! Relative paths inside the TOML file are taken relative to the file's
//! own directory.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use bayescrisis::analytics::ForecastKind;
use bayescrisis::ingest::{CrisisWindow, ReturnKind};
use bayescrisis::models::Likelihood;
use bayescrisis::{ChainConfig, Kernel, PriorSpec};
use chrono::NaiveDate;
use serde::Deserialize;

use crate::args::{FitCovidArgs, FitCrisisArgs, Format, SharedArgs};
use crate::error::CliError;

pub const DEFAULT_HORIZON_DAYS: u32 = 30;
pub const DEFAULT_TOP_K: usize = 5;

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    seed: Option<u64>,
    chains: Option<usize>,
    warmup: Option<usize>,
    draws: Option<usize>,
    kernel: Option<Kernel>,
    out: Option<PathBuf>,
    format: Option<Vec<Format>>,
    #[serde(default)]
    priors: PriorSpec,
    #[serde(default)]
    covid: CovidFile,
    #[serde(default)]
    crisis: CrisisFile,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct CovidFile {
    cases: Option<PathBuf>,
    region: Option<String>,
    horizon_days: Option<u32>,
    band: Option<ForecastKind>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct CrisisFile {
    prices: Option<Vec<PathBuf>>,
    windows: Option<PathBuf>,
    /// Inline windows, used when no windows file is given.
    window: Option<Vec<WindowEntry>>,
    likelihood: Option<Likelihood>,
    returns: Option<ReturnKind>,
    top_k: Option<usize>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct WindowEntry {
    name: String,
    start: NaiveDate,
    end: NaiveDate,
}

struct Loaded {
    file: FileConfig,
    base: PathBuf,
}

fn load(path: Option<&Path>) -> Result<Loaded, CliError> {
    let Some(path) = path else {
        return Ok(Loaded {
            file: FileConfig::default(),
            base: PathBuf::new(),
        });
    };
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let file: FileConfig = toml::from_str(&text)
        .map_err(|e| CliError::Config(format!("{}: {}", path.display(), e.to_string().replace('\n', " "))))?;
    Ok(Loaded {
        file,
        base: path.parent().map(Path::to_path_buf).unwrap_or_default(),
    })
}

impl Loaded {
    fn path(&self, p: &Path) -> PathBuf {
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.base.join(p)
        }
    }
}

/// Settings common to both fit commands.
#[derive(Debug, Clone)]
pub struct Common {
    pub chain: ChainConfig,
    pub out: PathBuf,
    pub formats: BTreeSet<Format>,
    pub priors: PriorSpec,
}

impl Common {
    pub fn wants(&self, f: Format) -> bool {
        self.formats.contains(&f)
    }
}

fn common(flags: &SharedArgs, cfg: &Loaded) -> Result<Common, CliError> {
    let f = &cfg.file;
    let seed = flags
        .seed
        .or(f.seed)
        .ok_or_else(|| CliError::Usage("--seed is required (on the command line or in the config file)".into()))?;
    let mut chain = ChainConfig::new(seed);
    chain.n_chains = flags.chains.or(f.chains).unwrap_or(chain.n_chains);
    chain.n_warmup = flags.warmup.or(f.warmup).unwrap_or(chain.n_warmup);
    chain.n_draws = flags.draws.or(f.draws).unwrap_or(chain.n_draws);
    chain.kernel = flags.kernel.or(f.kernel).unwrap_or(chain.kernel);
    let out = match (&flags.out, &f.out) {
        (Some(o), _) => o.clone(),
        (None, Some(o)) => cfg.path(o),
        (None, None) => PathBuf::from("out"),
    };
    let formats: BTreeSet<Format> = flags
        .format
        .clone()
        .or_else(|| f.format.clone())
        .unwrap_or_else(|| vec![Format::Json, Format::Csv, Format::Svg])
        .into_iter()
        .collect();
    if formats.is_empty() {
        return Err(CliError::Usage("--format needs at least one of json,csv,svg".into()));
    }
    Ok(Common {
        chain,
        out,
        formats,
        priors: f.priors.clone(),
    })
}

#[derive(Debug, Clone)]
pub struct CovidConfig {
    pub common: Common,
    pub cases: PathBuf,
    pub region: String,
    pub horizon_days: u32,
    pub band: ForecastKind,
}

pub fn covid(args: &FitCovidArgs) -> Result<CovidConfig, CliError> {
    let cfg = load(args.shared.config.as_deref())?;
    let common = common(&args.shared, &cfg)?;
    let c = &cfg.file.covid;
    let cases = match (&args.cases, &c.cases) {
        (Some(p), _) => p.clone(),
        (None, Some(p)) => cfg.path(p),
        (None, None) => return Err(CliError::Usage("--cases is required".into())),
    };
    let region = args
        .region
        .clone()
        .or_else(|| c.region.clone())
        .ok_or_else(|| CliError::Usage("--region is required".into()))?;
    Ok(CovidConfig {
        common,
        cases,
        region,
        horizon_days: args.horizon_days.or(c.horizon_days).unwrap_or(DEFAULT_HORIZON_DAYS),
        band: args.band.or(c.band).unwrap_or_default(),
    })
}

#[derive(Debug, Clone)]
pub enum WindowSource {
    File(PathBuf),
    Inline(Vec<CrisisWindow>),
    Default,
}

#[derive(Debug, Clone)]
pub struct CrisisConfig {
    pub common: Common,
    pub prices: Vec<PathBuf>,
    pub windows: WindowSource,
    pub likelihood: Likelihood,
    pub returns: ReturnKind,
    pub top_k: usize,
}

pub fn crisis(args: &FitCrisisArgs) -> Result<CrisisConfig, CliError> {
    let cfg = load(args.shared.config.as_deref())?;
    let common = common(&args.shared, &cfg)?;
    let c = &cfg.file.crisis;
    let prices = if !args.prices.is_empty() {
        args.prices.clone()
    } else {
        c.prices
            .as_ref()
            .map(|ps| ps.iter().map(|p| cfg.path(p)).collect())
            .unwrap_or_default()
    };
    if prices.is_empty() {
        return Err(CliError::Usage("--prices needs at least one price CSV".into()));
    }
    let windows = match (&args.windows, &c.windows, &c.window) {
        (Some(p), _, _) => WindowSource::File(p.clone()),
        (None, Some(p), _) => WindowSource::File(cfg.path(p)),
        (None, None, Some(entries)) => WindowSource::Inline(
            entries
                .iter()
                .map(|w| CrisisWindow::new(&w.name, w.start, w.end))
                .collect::<Result<_, _>>()?,
        ),
        (None, None, None) => WindowSource::Default,
    };
    let top_k = args.top_k.or(c.top_k).unwrap_or(DEFAULT_TOP_K);
    if top_k == 0 {
        return Err(CliError::Usage("--top-k must be at least 1".into()));
    }
    Ok(CrisisConfig {
        common,
        prices,
        windows,
        likelihood: args.likelihood.or(c.likelihood).unwrap_or_default(),
        returns: args.returns.or(c.returns).unwrap_or_default(),
        top_k,
    })
}
