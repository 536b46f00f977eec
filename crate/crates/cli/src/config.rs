//! Run configuration: command-line flags layered over an optional
//! `key=value` file.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use beatty_kfree::approx::IrrationalSpec;
use beatty_kfree::arith::Precision;
use beatty_kfree::beatty::BeattyParams;
use beatty_kfree::kfree::SieveConfig;
use clap::Args;

use crate::CliError;

/// Flags shared by every subcommand. All are optional so that a config
/// file can supply them; see [`Config::resolve`].
#[derive(Args, Clone, Debug, Default)]
pub struct CommonArgs {
    /// `key=value` file; flags given on the command line take precedence
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// α as `quad:p,d,q`, `cf:a0,a1,...` or `dec:digits:bits`
    #[arg(long)]
    pub alpha: Option<String>,
    /// β as a fraction `a/b` or a decimal
    #[arg(long, allow_hyphen_values = true)]
    pub beta: Option<String>,
    #[arg(long)]
    pub k: Option<u32>,
    /// Geometric grid `start:stop:ratio`
    #[arg(long)]
    pub grid: Option<String>,
    #[arg(long)]
    pub eps: Option<f64>,
    /// Multiplier on the default smoothing width `x^{-(k-1)/(2k-1)}`
    #[arg(long)]
    pub delta_multiplier: Option<f64>,
    #[arg(long)]
    pub threads: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Cap on working precision for floor decisions
    #[arg(long)]
    pub precision_bits: Option<u32>,
    /// Memory budget in bytes for sieve tables
    #[arg(long)]
    pub memory_budget: Option<u64>,
    /// Output file (stdout when absent)
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Fill the wall-time column (makes output non-reproducible)
    #[arg(long)]
    pub timing: bool,
}

/// A geometric grid `start, start·r, start·r², … <= stop`, each point
/// rounded to the nearest integer and deduplicated.
#[derive(Clone, Debug, PartialEq)]
pub struct Grid {
    pub start: u64,
    pub stop: u64,
    pub ratio: f64,
}

impl Grid {
    pub fn parse(text: &str) -> Result<Grid, CliError> {
        let parts: Vec<&str> = text.split(':').collect();
        let bad = || CliError::Usage(format!("grid `{text}` must be start:stop:ratio"));
        if parts.len() != 3 {
            return Err(bad());
        }
        let start = parse_count(parts[0]).ok_or_else(bad)?;
        let stop = parse_count(parts[1]).ok_or_else(bad)?;
        let ratio: f64 = parts[2].trim().parse().map_err(|_| bad())?;
        if start == 0 {
            return Err(CliError::Usage("grid start must be at least 1".into()));
        }
        if !(ratio > 1.0) {
            return Err(CliError::Usage(format!("grid ratio {ratio} must exceed 1")));
        }
        Ok(Grid { start, stop, ratio })
    }

    /// The points; empty when `start > stop`.
    pub fn points(&self) -> Vec<u64> {
        let mut out: Vec<u64> = Vec::new();
        let mut i = 0;
        loop {
            let v = (self.start as f64 * self.ratio.powi(i)).round();
            // Tolerate rounding at the top end, e.g. 10^3·(10^0.5)^8.
            if v > self.stop as f64 * (1.0 + 1e-12) {
                break;
            }
            let v = (v as u64).min(self.stop);
            if out.last() != Some(&v) {
                out.push(v);
            }
            i += 1;
        }
        out
    }
}

/// Integers written plainly or as `1e6`.
fn parse_count(text: &str) -> Option<u64> {
    let t = text.trim();
    t.parse::<u64>().ok().or_else(|| {
        let v: f64 = t.parse().ok()?;
        (v >= 0.0 && v.fract() == 0.0 && v < 1.8e19).then_some(v as u64)
    })
}

/// Fully resolved settings.
#[derive(Clone, Debug)]
pub struct Config {
    pub alpha: String,
    pub beta: String,
    pub k: u32,
    pub grid: Option<Grid>,
    pub eps: f64,
    pub delta_multiplier: f64,
    pub threads: usize,
    pub seed: u64,
    pub precision_bits: u32,
    pub memory_budget: u64,
    pub out: Option<PathBuf>,
    pub timing: bool,
}

pub const DEFAULT_SEED: u64 = 20_240_229;

fn read_file(path: &Path) -> Result<BTreeMap<String, String>, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
    let mut map = BTreeMap::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| CliError::Usage(format!("{}:{}: expected key=value", path.display(), i + 1)))?;
        let key = key.trim().replace('_', "-");
        if !KNOWN_KEYS.contains(&key.as_str()) {
            return Err(CliError::Usage(format!("{}:{}: unknown key `{key}`", path.display(), i + 1)));
        }
        map.insert(key, value.trim().to_string());
    }
    Ok(map)
}

const KNOWN_KEYS: &[&str] = &[
    "alpha",
    "beta",
    "k",
    "grid",
    "eps",
    "delta-multiplier",
    "threads",
    "seed",
    "precision-bits",
    "memory-budget",
    "out",
    "timing",
];

fn pick<T: std::str::FromStr>(
    flag: Option<T>,
    file: &BTreeMap<String, String>,
    key: &str,
    default: T,
) -> Result<T, CliError> {
    if let Some(v) = flag {
        return Ok(v);
    }
    match file.get(key) {
        Some(text) => text
            .parse()
            .map_err(|_| CliError::Usage(format!("config value `{text}` for `{key}` is invalid"))),
        None => Ok(default),
    }
}

impl Config {
    /// Flags override the file, which overrides the built-in defaults.
    pub fn resolve(args: &CommonArgs, default_grid: &str) -> Result<Config, CliError> {
        let file = match &args.config {
            Some(p) => read_file(p)?,
            None => BTreeMap::new(),
        };
        let grid_text = pick(args.grid.clone(), &file, "grid", default_grid.to_string())?;
        let grid = if grid_text.is_empty() { None } else { Some(Grid::parse(&grid_text)?) };
        let cfg = Config {
            alpha: pick(args.alpha.clone(), &file, "alpha", "quad:0,2,1".to_string())?,
            beta: pick(args.beta.clone(), &file, "beta", "0".to_string())?,
            k: pick(args.k, &file, "k", 2)?,
            grid,
            eps: pick(args.eps, &file, "eps", beatty_kfree::expsum::DEFAULT_EPS)?,
            delta_multiplier: pick(args.delta_multiplier, &file, "delta-multiplier", 1.0)?,
            threads: pick(args.threads, &file, "threads", 0)?,
            seed: pick(args.seed, &file, "seed", DEFAULT_SEED)?,
            precision_bits: pick(args.precision_bits, &file, "precision-bits", Precision::default().cap_bits)?,
            memory_budget: pick(args.memory_budget, &file, "memory-budget", SieveConfig::default().memory_budget)?,
            out: args.out.clone().or_else(|| file.get("out").map(PathBuf::from)),
            timing: args.timing || pick(None, &file, "timing", false)?,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> Result<(), CliError> {
        if self.k < 2 {
            return Err(CliError::Usage(format!("k = {}; k-freeness needs k >= 2", self.k)));
        }
        if !(self.eps > 0.0) {
            return Err(CliError::Usage(format!("eps = {} must be positive", self.eps)));
        }
        if !(self.delta_multiplier > 0.0) {
            return Err(CliError::Usage("delta-multiplier must be positive".into()));
        }
        if self.precision_bits < 64 {
            return Err(CliError::Usage("precision-bits must be at least 64".into()));
        }
        Ok(())
    }

    pub fn grid_points(&self) -> Vec<u64> {
        self.grid.as_ref().map(Grid::points).unwrap_or_default()
    }

    pub fn precision(&self) -> Precision {
        let cap = self.precision_bits;
        Precision::new(Precision::default().initial_bits.min(cap), cap)
    }

    pub fn sieve(&self) -> SieveConfig {
        SieveConfig {
            memory_budget: self.memory_budget,
            ..SieveConfig::default()
        }
    }

    pub fn alpha_spec(&self) -> Result<IrrationalSpec, CliError> {
        self.alpha.parse().map_err(CliError::from_core)
    }

    pub fn params(&self) -> Result<BeattyParams, CliError> {
        let beta = beatty_kfree::approx::parse_rational(&self.beta).map_err(CliError::from_core)?;
        BeattyParams::with_options(self.alpha_spec()?, beta, self.precision(), true).map_err(CliError::from_core)
    }
}
