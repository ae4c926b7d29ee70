//! Run configuration: documented defaults per subcommand, overlay from a
//! config file (flat key=value or a previous JSON output), the SEED
//! environment variable, and command-line flags, in that order.

use crate::AppError;
use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::PathBuf;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Spectrum,
    Filter,
    Attenuation,
    ErrorScan,
    OptimalTime,
    CriticalScan,
    Strategy,
    Crb,
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Spectrum => "spectrum",
            Command::Filter => "filter",
            Command::Attenuation => "attenuation",
            Command::ErrorScan => "error-scan",
            Command::OptimalTime => "optimal-time",
            Command::CriticalScan => "critical-scan",
            Command::Strategy => "strategy",
            Command::Crb => "crb",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputFormat {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FilterChoice {
    Free,
    Hahn,
    Cpmg,
    Narrowband,
}

impl FilterChoice {
    fn parse(s: &str) -> Result<Self, AppError> {
        match s {
            "free" => Ok(FilterChoice::Free),
            "hahn" => Ok(FilterChoice::Hahn),
            "cpmg" => Ok(FilterChoice::Cpmg),
            "narrowband" => Ok(FilterChoice::Narrowband),
            other => Err(AppError::validation(format!(
                "unknown filter kind '{other}' (expected free|hahn|cpmg|narrowband)"
            ))),
        }
    }
    pub fn name(&self) -> &'static str {
        match self {
            FilterChoice::Free => "free",
            FilterChoice::Hahn => "hahn",
            FilterChoice::Cpmg => "cpmg",
            FilterChoice::Narrowband => "narrowband",
        }
    }
}

/// Fully resolved run parameters. Every value is echoed into the output
/// metadata, so a run is reproducible from its own artifact.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub command: Command,
    pub format: OutputFormat,
    pub output: Option<PathBuf>,
    pub jobs: usize,
    pub seed: u64,
    pub tol: f64,

    pub beta: f64,
    pub tau_c: f64,
    /// Coupling; if absent it is derived from `x` as `x / (sqrt(2N) tau_c)`.
    pub g: Option<f64>,
    /// Dimensionless `sqrt(2N) g tau_c` used when `g` is not given.
    pub x: f64,

    pub filter: FilterChoice,
    pub n_pulses: u32,
    pub harmonics: u32,
    /// Probing duration for single-point commands; `None` means "auto"
    /// (crb resolves it to the optimal time).
    pub t: Option<f64>,

    pub omega_min: f64,
    pub omega_max: f64,
    pub omega_points: usize,
    pub t_min: f64,
    pub t_max: f64,
    pub t_points: usize,
    pub x_min: f64,
    pub x_max: f64,
    pub x_points: usize,
    pub gtc_min: f64,
    pub gtc_max: f64,
    pub gtc_points: usize,
    pub n_max: u32,
    pub shots: u64,
    pub n_trials: usize,
}

impl RunConfig {
    /// Documented defaults for each subcommand.
    pub fn defaults_for(command: Command) -> Self {
        let mut cfg = RunConfig {
            command,
            format: OutputFormat::Csv,
            output: None,
            jobs: 0,
            seed: 20240811,
            tol: 1e-7,
            beta: 2.0,
            tau_c: 1.0,
            g: None,
            x: 1.0,
            filter: FilterChoice::Narrowband,
            n_pulses: 20,
            harmonics: 1,
            t: None,
            omega_min: 0.0,
            omega_max: 5.0,
            omega_points: 200,
            t_min: 1e-2,
            t_max: 1e6,
            t_points: 400,
            x_min: 0.1,
            x_max: 10.0,
            x_points: 64,
            gtc_min: 0.02,
            gtc_max: 2.0,
            gtc_points: 32,
            n_max: 100,
            shots: 10_000,
            n_trials: 400,
        };
        match command {
            Command::Spectrum => {
                cfg.g = Some(1.0);
            }
            Command::Filter => {
                cfg.filter = FilterChoice::Cpmg;
                cfg.t = Some(1.0);
                cfg.omega_max = 250.0;
                cfg.omega_points = 1000;
            }
            Command::Attenuation => {
                cfg.g = Some(1.0);
                cfg.filter = FilterChoice::Free;
                cfg.tol = 1e-9;
                cfg.t_min = 1e-2;
                cfg.t_max = 100.0;
                cfg.t_points = 100;
            }
            Command::ErrorScan => {
                cfg.t_min = 1.0;
                cfg.t_max = 4000.0;
                cfg.t_points = 400;
            }
            Command::OptimalTime | Command::CriticalScan | Command::Strategy => {}
            Command::Crb => {
                cfg.x = 3.0;
            }
        }
        cfg
    }

    /// Applies one `key = value` override.
    pub fn apply(&mut self, key: &str, value: &str) -> Result<(), AppError> {
        let bad = |k: &str, v: &str| AppError::validation(format!("invalid value '{v}' for {k}"));
        match key {
            "command" => {
                if value != self.command.name() {
                    return Err(AppError::validation(format!(
                        "config file was produced by '{value}' but the invoked subcommand is '{}'",
                        self.command.name()
                    )));
                }
            }
            "format" => {
                self.format = match value {
                    "csv" => OutputFormat::Csv,
                    "json" => OutputFormat::Json,
                    _ => return Err(bad(key, value)),
                }
            }
            "output" => {
                self.output = if value.is_empty() || value == "-" {
                    None
                } else {
                    Some(PathBuf::from(value))
                }
            }
            "jobs" => self.jobs = value.parse().map_err(|_| bad(key, value))?,
            "seed" => self.seed = value.parse().map_err(|_| bad(key, value))?,
            "tol" => self.tol = value.parse().map_err(|_| bad(key, value))?,
            "beta" => self.beta = value.parse().map_err(|_| bad(key, value))?,
            "tau_c" => self.tau_c = value.parse().map_err(|_| bad(key, value))?,
            "g" => {
                self.g = if value == "auto" {
                    None
                } else {
                    Some(value.parse().map_err(|_| bad(key, value))?)
                }
            }
            "x" => self.x = value.parse().map_err(|_| bad(key, value))?,
            "filter" => self.filter = FilterChoice::parse(value)?,
            "n_pulses" => self.n_pulses = value.parse().map_err(|_| bad(key, value))?,
            "harmonics" => self.harmonics = value.parse().map_err(|_| bad(key, value))?,
            "t" => {
                self.t = if value == "auto" {
                    None
                } else {
                    Some(value.parse().map_err(|_| bad(key, value))?)
                }
            }
            "omega_min" => self.omega_min = value.parse().map_err(|_| bad(key, value))?,
            "omega_max" => self.omega_max = value.parse().map_err(|_| bad(key, value))?,
            "omega_points" => self.omega_points = value.parse().map_err(|_| bad(key, value))?,
            "t_min" => self.t_min = value.parse().map_err(|_| bad(key, value))?,
            "t_max" => self.t_max = value.parse().map_err(|_| bad(key, value))?,
            "t_points" => self.t_points = value.parse().map_err(|_| bad(key, value))?,
            "x_min" => self.x_min = value.parse().map_err(|_| bad(key, value))?,
            "x_max" => self.x_max = value.parse().map_err(|_| bad(key, value))?,
            "x_points" => self.x_points = value.parse().map_err(|_| bad(key, value))?,
            "gtc_min" => self.gtc_min = value.parse().map_err(|_| bad(key, value))?,
            "gtc_max" => self.gtc_max = value.parse().map_err(|_| bad(key, value))?,
            "gtc_points" => self.gtc_points = value.parse().map_err(|_| bad(key, value))?,
            "n_max" => self.n_max = value.parse().map_err(|_| bad(key, value))?,
            "shots" => self.shots = value.parse().map_err(|_| bad(key, value))?,
            "n_trials" => self.n_trials = value.parse().map_err(|_| bad(key, value))?,
            other => {
                return Err(AppError::validation(format!(
                    "unknown config key '{other}'"
                )));
            }
        }
        Ok(())
    }

    /// Effective coupling strength.
    pub fn effective_g(&self) -> f64 {
        match self.g {
            Some(g) => g,
            None => self.x / ((2.0 * self.n_pulses as f64).sqrt() * self.tau_c),
        }
    }

    /// Every resolved key as `(key, value)` pairs, in stable order.
    /// Floats use shortest-roundtrip formatting so that re-feeding the
    /// pairs reproduces bit-identical parameters.
    pub fn to_pairs(&self) -> Vec<(String, String)> {
        let f = |v: f64| format!("{v:e}");
        let mut pairs: Vec<(String, String)> = vec![
            ("command".into(), self.command.name().into()),
            (
                "format".into(),
                match self.format {
                    OutputFormat::Csv => "csv".into(),
                    OutputFormat::Json => "json".into(),
                },
            ),
            (
                "output".into(),
                self.output
                    .as_ref()
                    .map(|p| p.display().to_string())
                    .unwrap_or_else(|| "-".into()),
            ),
            ("jobs".into(), self.jobs.to_string()),
            ("seed".into(), self.seed.to_string()),
            ("tol".into(), f(self.tol)),
            ("beta".into(), f(self.beta)),
            ("tau_c".into(), f(self.tau_c)),
            ("g".into(), f(self.effective_g())),
            ("x".into(), f(self.x)),
            ("filter".into(), self.filter.name().into()),
            ("n_pulses".into(), self.n_pulses.to_string()),
            ("harmonics".into(), self.harmonics.to_string()),
            ("t".into(), self.t.map(f).unwrap_or_else(|| "auto".into())),
            ("omega_min".into(), f(self.omega_min)),
            ("omega_max".into(), f(self.omega_max)),
            ("omega_points".into(), self.omega_points.to_string()),
            ("t_min".into(), f(self.t_min)),
            ("t_max".into(), f(self.t_max)),
            ("t_points".into(), self.t_points.to_string()),
            ("x_min".into(), f(self.x_min)),
            ("x_max".into(), f(self.x_max)),
            ("x_points".into(), self.x_points.to_string()),
            ("gtc_min".into(), f(self.gtc_min)),
            ("gtc_max".into(), f(self.gtc_max)),
            ("gtc_points".into(), self.gtc_points.to_string()),
            ("n_max".into(), self.n_max.to_string()),
            ("shots".into(), self.shots.to_string()),
            ("n_trials".into(), self.n_trials.to_string()),
        ];
        pairs.sort();
        pairs
    }

    pub fn print_config(&self) -> String {
        let mut s = String::new();
        for (k, v) in self.to_pairs() {
            let _ = writeln!(s, "{k} = {v}");
        }
        s
    }
}

/// Parses a config file: either the flat `key = value` format or a JSON
/// artifact from a previous run (its `metadata.config` object is used).
pub fn parse_config_file(contents: &str) -> Result<BTreeMap<String, String>, AppError> {
    let trimmed = contents.trim_start();
    if trimmed.starts_with('{') {
        let v: serde_json::Value = serde_json::from_str(contents)
            .map_err(|e| AppError::validation(format!("config file is not valid JSON: {e}")))?;
        let cfg = v
            .get("metadata")
            .and_then(|m| m.get("config"))
            .and_then(|c| c.as_object())
            .ok_or_else(|| {
                AppError::validation("JSON config must contain metadata.config".into())
            })?;
        let mut map = BTreeMap::new();
        for (k, val) in cfg {
            let s = val
                .as_str()
                .map(str::to_string)
                .unwrap_or_else(|| val.to_string());
            map.insert(k.clone(), s);
        }
        return Ok(map);
    }
    let mut map = BTreeMap::new();
    for (lineno, line) in contents.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let Some((k, v)) = line.split_once('=') else {
            return Err(AppError::validation(format!(
                "config line {} is not 'key = value': '{line}'",
                lineno + 1
            )));
        };
        map.insert(k.trim().to_string(), v.trim().to_string());
    }
    Ok(map)
}
