//! Experiment configuration: defaults, a flat `key = value` file format and
//! command-line overrides, validated before any suite runs.

use std::collections::BTreeSet;
use std::fmt;
use std::path::PathBuf;

use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Suite {
    Kernels,
    Gowers,
    Forms,
    Oscillatory,
    Counterexamples,
    Search,
    VerifyAll,
}

impl Suite {
    pub const ALL: [Suite; 7] = [
        Suite::Kernels,
        Suite::Gowers,
        Suite::Forms,
        Suite::Oscillatory,
        Suite::Counterexamples,
        Suite::Search,
        Suite::VerifyAll,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Kernels => "kernels",
            Suite::Gowers => "gowers",
            Suite::Forms => "forms",
            Suite::Oscillatory => "oscillatory",
            Suite::Counterexamples => "counterexamples",
            Suite::Search => "search",
            Suite::VerifyAll => "verify-all",
        }
    }

    pub fn describe(self) -> &'static str {
        match self {
            Suite::Kernels => "norms, sphere measures, smoothed shell kernels and their cancellation",
            Suite::Gowers => "U2 and U3 norms: oracle equivalence, spectral identity, tensorization",
            Suite::Forms => "counting forms, their mollified decomposition, pigeonhole and main terms",
            Suite::Oscillatory => "decay of the two-parameter oscillatory integral and multiplier estimates",
            Suite::Counterexamples => "shell and lattice sets, the parallelogram obstruction and its lp escape",
            Suite::Search => "randomized progression search on dense random sets with lacunary gaps",
            Suite::VerifyAll => "every suite above in sequence",
        }
    }

    pub fn parse(s: &str) -> Option<Suite> {
        Suite::ALL.into_iter().find(|x| x.name() == s)
    }

    /// Suites whose checks need a non-degenerate exponent.
    pub fn needs_nondegenerate_p(self) -> bool {
        matches!(self, Suite::Search | Suite::VerifyAll)
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

impl Format {
    pub fn parse(s: &str) -> Option<Format> {
        match s {
            "json" => Some(Format::Json),
            "csv" => Some(Format::Csv),
            _ => None,
        }
    }
}

/// Sample and node counts used by the suites.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Budgets {
    /// Sampled progressions for gap spectra and Monte Carlo estimates.
    pub samples: u64,
    /// Nodes of the deterministic sphere rules.
    pub nodes: usize,
    /// Proposals per progression search.
    pub search_budget: u64,
    /// Random sets in the lacunary search experiment.
    pub seeds: usize,
    /// Upper end of the t range of the decay fit.
    pub t_max: f64,
}

impl Default for Budgets {
    fn default() -> Self {
        Self {
            samples: 20_000,
            nodes: 128,
            search_budget: 200_000,
            seeds: 25,
            t_max: 1000.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentConfig {
    pub suite: Suite,
    pub p: f64,
    pub d: usize,
    #[serde(rename = "N")]
    pub n: f64,
    pub epsilon: f64,
    pub seed: u64,
    pub budgets: Budgets,
    pub out_dir: PathBuf,
    pub format: Format,
}

/// Values given on the command line; `None` falls through to the file and
/// then to the defaults.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub suite: Option<String>,
    pub p: Option<f64>,
    pub d: Option<usize>,
    pub n: Option<f64>,
    pub epsilon: Option<f64>,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub format: Option<String>,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ConfigError {
    #[error("line {line}: expected `key = value`, got `{text}`")]
    Syntax { line: usize, text: String },
    #[error("unknown config key `{0}`")]
    UnknownKey(String),
    #[error("config key `{0}` given twice")]
    DuplicateKey(String),
    #[error("bad value for `{key}`: {reason}")]
    BadValue { key: String, reason: String },
    #[error("missing --suite")]
    MissingSuite,
}

const KEYS: [&str; 13] = [
    "suite",
    "p",
    "d",
    "N",
    "epsilon",
    "seed",
    "out",
    "format",
    "samples",
    "nodes",
    "search_budget",
    "seeds",
    "t_max",
];

fn bad(key: &str, reason: impl Into<String>) -> ConfigError {
    ConfigError::BadValue {
        key: key.to_string(),
        reason: reason.into(),
    }
}

fn num<T: std::str::FromStr>(key: &str, v: &str) -> Result<T, ConfigError> {
    v.parse().map_err(|_| bad(key, format!("cannot parse `{v}`")))
}

/// Parses `key = value` lines; `#` starts a comment.
pub fn parse_file(text: &str) -> Result<Vec<(String, String)>, ConfigError> {
    let mut out = Vec::new();
    let mut seen = BTreeSet::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((k, v)) = line.split_once('=') else {
            return Err(ConfigError::Syntax {
                line: i + 1,
                text: raw.to_string(),
            });
        };
        let (k, v) = (k.trim(), v.trim());
        if !KEYS.contains(&k) {
            return Err(ConfigError::UnknownKey(k.to_string()));
        }
        if !seen.insert(k.to_string()) {
            return Err(ConfigError::DuplicateKey(k.to_string()));
        }
        out.push((k.to_string(), v.to_string()));
    }
    Ok(out)
}

/// Builds the configuration: flags override file values, which override
/// defaults. The result is validated.
pub fn parse_config(flags: &Overrides, file: Option<&str>) -> Result<ExperimentConfig, ConfigError> {
    let mut suite: Option<String> = None;
    let mut cfg = ExperimentConfig {
        suite: Suite::VerifyAll,
        p: 1.5,
        d: 2,
        n: 64.0,
        epsilon: 0.01,
        seed: 7,
        budgets: Budgets::default(),
        out_dir: PathBuf::from("lproth-out"),
        format: Format::Json,
    };
    let mut format: Option<String> = None;
    for (k, v) in parse_file(file.unwrap_or(""))? {
        match k.as_str() {
            "suite" => suite = Some(v),
            "p" => cfg.p = num(&k, &v)?,
            "d" => cfg.d = num(&k, &v)?,
            "N" => cfg.n = num(&k, &v)?,
            "epsilon" => cfg.epsilon = num(&k, &v)?,
            "seed" => cfg.seed = num(&k, &v)?,
            "out" => cfg.out_dir = PathBuf::from(v),
            "format" => format = Some(v),
            "samples" => cfg.budgets.samples = num(&k, &v)?,
            "nodes" => cfg.budgets.nodes = num(&k, &v)?,
            "search_budget" => cfg.budgets.search_budget = num(&k, &v)?,
            "seeds" => cfg.budgets.seeds = num(&k, &v)?,
            "t_max" => cfg.budgets.t_max = num(&k, &v)?,
            _ => unreachable!("keys are checked while parsing"),
        }
    }
    if let Some(s) = &flags.suite {
        suite = Some(s.clone());
    }
    if let Some(f) = &flags.format {
        format = Some(f.clone());
    }
    cfg.p = flags.p.unwrap_or(cfg.p);
    cfg.d = flags.d.unwrap_or(cfg.d);
    cfg.n = flags.n.unwrap_or(cfg.n);
    cfg.epsilon = flags.epsilon.unwrap_or(cfg.epsilon);
    cfg.seed = flags.seed.unwrap_or(cfg.seed);
    if let Some(o) = &flags.out {
        cfg.out_dir = o.clone();
    }
    let suite = suite.ok_or(ConfigError::MissingSuite)?;
    cfg.suite = Suite::parse(&suite).ok_or_else(|| bad("suite", format!("unknown suite `{suite}`")))?;
    if let Some(f) = format {
        cfg.format = Format::parse(&f).ok_or_else(|| bad("format", format!("expected json or csv, got `{f}`")))?;
    }
    validate(&cfg)?;
    Ok(cfg)
}

pub fn validate(cfg: &ExperimentConfig) -> Result<(), ConfigError> {
    if !(cfg.p.is_finite() && cfg.p >= 1.0) {
        return Err(bad("p", "need a finite p >= 1"));
    }
    if cfg.suite.needs_nondegenerate_p() && (cfg.p == 1.0 || cfg.p == 2.0) {
        return Err(bad("p", format!("p = {} is degenerate; suite {} needs p outside {{1, 2}}", cfg.p, cfg.suite)));
    }
    if !(1..=3).contains(&cfg.d) {
        return Err(bad("d", "need 1 <= d <= 3"));
    }
    if !(cfg.n.fract() == 0.0 && (32.0..=512.0).contains(&cfg.n)) {
        return Err(bad("N", "need an integer box size 32 <= N <= 512"));
    }
    if !(cfg.epsilon > 0.0 && cfg.epsilon <= 0.1) {
        return Err(bad("epsilon", "need 0 < epsilon <= 0.1"));
    }
    let b = &cfg.budgets;
    if !(1_000..=10_000_000).contains(&b.samples) {
        return Err(bad("samples", "need 1000 <= samples <= 10^7"));
    }
    if !(16..=4096).contains(&b.nodes) {
        return Err(bad("nodes", "need 16 <= nodes <= 4096"));
    }
    if !(1..=10_000_000).contains(&b.search_budget) {
        return Err(bad("search_budget", "need 1 <= search_budget <= 10^7"));
    }
    if !(1..=1000).contains(&b.seeds) {
        return Err(bad("seeds", "need 1 <= seeds <= 1000"));
    }
    if !(b.t_max >= 1000.0 && b.t_max <= 1e5) {
        return Err(bad("t_max", "need 1000 <= t_max <= 1e5"));
    }
    Ok(())
}
