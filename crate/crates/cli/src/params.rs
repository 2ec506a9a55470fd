//! Flag and config-file handling.
//!
//! Every parameter is resolved from, in increasing priority, the built-in
//! default for the subcommand, the config file and the command-line flag.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::CliError;

#[derive(Debug, Parser)]
#[command(name = "qkdnoise", version, about = "Key-rate bounds and noise thresholds for DV and CV QKD")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Largest tolerable mean noise photon number mu_max(T).
    Threshold(CommonArgs),
    /// Ratio of CV to DV mu_max over T.
    Ratio(CommonArgs),
    /// Key rate over T for one or more mu.
    Keyrate(CommonArgs),
    /// Minimal single-photon probability of the DV source.
    Minp(CommonArgs),
    /// Least squeezing needed with independent modulation.
    Minsqueeze(CommonArgs),
    /// Minimal source probability over a (T, mu) grid, marking CV-secure cells.
    Region(CommonArgs),
    /// Smallest T where DV tolerates more noise than CV, versus d/eta.
    Darkcount(CommonArgs),
    /// Monte Carlo estimate of p_exp and QBER next to the closed forms.
    Simulate(CommonArgs),
    /// Small-T asymptotic agreement checks.
    Validate(CommonArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Threshold(_) => "threshold",
            Command::Ratio(_) => "ratio",
            Command::Keyrate(_) => "keyrate",
            Command::Minp(_) => "minp",
            Command::Minsqueeze(_) => "minsqueeze",
            Command::Region(_) => "region",
            Command::Darkcount(_) => "darkcount",
            Command::Simulate(_) => "simulate",
            Command::Validate(_) => "validate",
        }
    }

    pub fn args(&self) -> &CommonArgs {
        match self {
            Command::Threshold(a)
            | Command::Ratio(a)
            | Command::Keyrate(a)
            | Command::Minp(a)
            | Command::Minsqueeze(a)
            | Command::Region(a)
            | Command::Darkcount(a)
            | Command::Simulate(a)
            | Command::Validate(a) => a,
        }
    }
}

#[derive(Debug, Args, Default)]
pub struct CommonArgs {
    /// bb84 | sixstate | squeezed | gg02
    #[arg(long)]
    pub protocol: Option<String>,
    /// CV protocol compared by `ratio`: squeezed | gg02
    #[arg(long = "cv-protocol")]
    pub cv_protocol: Option<String>,
    /// Transmittance: a value, a comma list, or start:stop:points (log spaced)
    #[arg(long = "t", allow_hyphen_values = true)]
    pub t: Option<String>,
    /// Mean noise photon number: a value, a comma list, or start:stop:points
    #[arg(long, allow_hyphen_values = true)]
    pub mu: Option<String>,
    /// Enable DV preprocessing
    #[arg(long)]
    pub preprocess: bool,
    /// binary | pnr
    #[arg(long)]
    pub detector: Option<String>,
    /// thermal | poisson
    #[arg(long)]
    pub noise: Option<String>,
    #[arg(long = "source-p")]
    pub source_p: Option<String>,
    /// Dark-count probability per window (`darkcount` sweeps it)
    #[arg(long = "dark-d")]
    pub dark_d: Option<String>,
    #[arg(long)]
    pub eta: Option<String>,
    /// Signal quadrature variance V_s
    #[arg(long)]
    pub vs: Option<String>,
    /// Modulation variance V_m
    #[arg(long)]
    pub vm: Option<String>,
    /// 0 | opt | a fixed variance
    #[arg(long = "trusted-noise")]
    pub trusted_noise: Option<String>,
    /// Output path (default: standard output)
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Flat `key = value` file with long flag names as keys
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<String>,
    /// Monte Carlo trials for `simulate`
    #[arg(long)]
    pub trials: Option<String>,
}

/// Keys accepted in config files, in echo order.
pub const PARAMETER_KEYS: [&str; 16] = [
    "protocol",
    "cv-protocol",
    "t",
    "mu",
    "preprocess",
    "detector",
    "noise",
    "source-p",
    "dark-d",
    "eta",
    "vs",
    "vm",
    "trusted-noise",
    "seed",
    "trials",
    "out",
];

fn defaults(command: &str) -> BTreeMap<&'static str, String> {
    let mut m: BTreeMap<&'static str, String> = [
        ("protocol", "sixstate"),
        ("cv-protocol", "squeezed"),
        ("preprocess", "false"),
        ("detector", "binary"),
        ("noise", "thermal"),
        ("source-p", "1"),
        ("dark-d", "0"),
        ("eta", "1"),
        ("vs", "auto"),
        ("vm", "auto"),
        ("trusted-noise", "0"),
        ("seed", "0"),
        ("trials", "1000000"),
    ]
    .into_iter()
    .map(|(k, v)| (k, v.to_string()))
    .collect();
    let (t, mu) = match command {
        "threshold" => ("1e-5:0.99:61", "0"),
        "ratio" => ("1e-4:0.99:61", "0"),
        "keyrate" => ("1e-6:1:61", "0.5,0.1,0.01,0.001,0.0001,0.00001"),
        "minp" => ("1e-5:0.1:41", "1e-4"),
        "minsqueeze" => ("1e-4:1:41", "1e-3"),
        "region" => ("1e-5:1:31", "1e-6:0.5:31"),
        "simulate" => ("0.5", "0.2"),
        "validate" => ("1e-3,1e-4,1e-5", "0"),
        _ => ("1", "0"),
    };
    m.insert("t", t.to_string());
    m.insert("mu", mu.to_string());
    match command {
        "minsqueeze" => {
            m.insert("vm", "1000".to_string());
        }
        "darkcount" => {
            m.insert("dark-d", "1e-7,1e-6,1e-5,1e-4".to_string());
        }
        _ => {}
    }
    m
}

/// Parses a flat `key = value` config file. Blank lines and lines starting
/// with `#` are skipped.
pub fn parse_config(text: &str, origin: &Path) -> Result<BTreeMap<String, String>, CliError> {
    let mut map = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let at = || format!("{}:{}", origin.display(), i + 1);
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| CliError::Config(format!("{}: expected `key = value`", at())))?;
        let key = key.trim();
        if !PARAMETER_KEYS.contains(&key) {
            return Err(CliError::Config(format!("{}: unknown key `{key}`", at())));
        }
        if map.insert(key.to_string(), value.trim().to_string()).is_some() {
            return Err(CliError::Config(format!("{}: duplicate key `{key}`", at())));
        }
    }
    Ok(map)
}

/// Fully resolved parameters of one invocation, as strings.
#[derive(Debug, Clone)]
pub struct Params {
    pub command: &'static str,
    values: BTreeMap<&'static str, String>,
    pub out: Option<PathBuf>,
}

impl Params {
    pub fn resolve(command: &Command) -> Result<Self, CliError> {
        let name = command.name();
        let args = command.args();
        let mut values = defaults(name);
        let mut out = None;

        if let Some(path) = &args.config {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
            for (k, v) in parse_config(&text, path)? {
                if k == "out" {
                    out = Some(PathBuf::from(v));
                    continue;
                }
                let key = PARAMETER_KEYS.iter().find(|&&p| p == k).expect("key validated");
                values.insert(key, v);
            }
        }

        let flags: [(&'static str, &Option<String>); 14] = [
            ("protocol", &args.protocol),
            ("cv-protocol", &args.cv_protocol),
            ("t", &args.t),
            ("mu", &args.mu),
            ("detector", &args.detector),
            ("noise", &args.noise),
            ("source-p", &args.source_p),
            ("dark-d", &args.dark_d),
            ("eta", &args.eta),
            ("vs", &args.vs),
            ("vm", &args.vm),
            ("trusted-noise", &args.trusted_noise),
            ("seed", &args.seed),
            ("trials", &args.trials),
        ];
        for (key, value) in flags {
            if let Some(v) = value {
                values.insert(key, v.clone());
            }
        }
        if args.preprocess {
            values.insert("preprocess", "true".to_string());
        }
        if args.out.is_some() {
            out = args.out.clone();
        }
        Ok(Self {
            command: name,
            values,
            out,
        })
    }

    pub fn raw(&self, key: &str) -> &str {
        self.values.get(key).map(String::as_str).unwrap_or("")
    }

    /// `key = value` pairs in a fixed order.
    pub fn echo(&self) -> Vec<(&'static str, &str)> {
        PARAMETER_KEYS
            .iter()
            .filter_map(|&k| self.values.get(k).map(|v| (k, v.as_str())))
            .collect()
    }

    pub fn f64(&self, key: &str) -> Result<f64, CliError> {
        parse_f64(key, self.raw(key))
    }

    pub fn u64(&self, key: &str) -> Result<u64, CliError> {
        self.raw(key)
            .parse()
            .map_err(|_| CliError::Usage(format!("--{key}: expected a non-negative integer, got `{}`", self.raw(key))))
    }

    pub fn bool(&self, key: &str) -> Result<bool, CliError> {
        match self.raw(key) {
            "true" | "1" | "yes" => Ok(true),
            "false" | "0" | "no" => Ok(false),
            other => Err(CliError::Usage(format!("--{key}: expected true or false, got `{other}`"))),
        }
    }

    /// `None` for the `auto` token.
    pub fn optional_f64(&self, key: &str) -> Result<Option<f64>, CliError> {
        match self.raw(key) {
            "auto" => Ok(None),
            v => parse_f64(key, v).map(Some),
        }
    }

    pub fn grid(&self, key: &str) -> Result<Vec<f64>, CliError> {
        parse_grid(key, self.raw(key))
    }

    pub fn choice<'a>(&'a self, key: &str, allowed: &[&str]) -> Result<&'a str, CliError> {
        let v = self.raw(key);
        if allowed.contains(&v) {
            Ok(v)
        } else {
            Err(CliError::Usage(format!("--{key}: expected one of {}, got `{v}`", allowed.join(" | "))))
        }
    }
}

fn parse_f64(key: &str, text: &str) -> Result<f64, CliError> {
    text.trim()
        .parse::<f64>()
        .ok()
        .filter(|v| v.is_finite())
        .ok_or_else(|| CliError::Usage(format!("--{key}: expected a number, got `{text}`")))
}

/// A single value, a comma-separated list, or `start:stop:points` with
/// `points` logarithmically spaced values from `start` to `stop`.
pub fn parse_grid(key: &str, text: &str) -> Result<Vec<f64>, CliError> {
    let parts: Vec<&str> = text.split(':').collect();
    match parts.as_slice() {
        [start, stop, points] => {
            let start = parse_f64(key, start)?;
            let stop = parse_f64(key, stop)?;
            let points: usize = points
                .trim()
                .parse()
                .map_err(|_| CliError::Usage(format!("--{key}: bad point count in `{text}`")))?;
            if points == 1 && start == stop {
                return Ok(vec![start]);
            }
            qkdnoise::numerics::log_space(start, stop, points)
                .map_err(|_| CliError::Usage(format!("--{key}: log grid needs 0 < start < stop and at least 2 points, got `{text}`")))
        }
        [_] => text.split(',').map(|v| parse_f64(key, v)).collect(),
        _ => Err(CliError::Usage(format!("--{key}: expected value, list or start:stop:points, got `{text}`"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grids() {
        assert_eq!(parse_grid("t", "1e-3").unwrap(), vec![1e-3]);
        assert_eq!(parse_grid("t", "0.1,0.2, 0.3").unwrap(), vec![0.1, 0.2, 0.3]);
        let g = parse_grid("t", "1e-4:1:5").unwrap();
        assert_eq!(g.len(), 5);
        assert!((g[2] - 1e-2).abs() < 1e-15);
        assert_eq!(g[4], 1.0);
        assert!(parse_grid("t", "0:1:5").is_err());
        assert!(parse_grid("t", "1:2").is_err());
        assert!(parse_grid("t", "abc").is_err());
        assert!(parse_grid("t", "nan").is_err());
    }

    #[test]
    fn config_parsing() {
        let p = Path::new("c.conf");
        let m = parse_config("# comment\nprotocol = bb84\n\n t=1e-3 \n", p).unwrap();
        assert_eq!(m["protocol"], "bb84");
        assert_eq!(m["t"], "1e-3");
        assert!(matches!(parse_config("protocl = bb84", p), Err(CliError::Config(_))));
        assert!(matches!(parse_config("protocol bb84", p), Err(CliError::Config(_))));
        assert!(matches!(parse_config("t = 1\nt = 2", p), Err(CliError::Config(_))));
    }
}
