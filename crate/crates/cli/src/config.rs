//! Run parameters from flags and an optional flat `key = value` file.
//! Flags override the file; the file overrides built-in defaults.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use laserkit::{LaserParams, C64};

use crate::error::CliError;

pub const DEFAULT_KAPPA: f64 = 1.0;
pub const DEFAULT_Z_RE: f64 = 4.0;
pub const DEFAULT_T_MAX: f64 = 10.0;
pub const DEFAULT_T_STEPS: usize = 100;

/// Flags shared by `simulate` and `sweep`. Every field is optional so that
/// unset flags fall through to the config file.
#[derive(Debug, Clone, Default, Args)]
pub struct RunArgs {
    /// Gain rate; a comma-separated list for `sweep`
    #[arg(long)]
    pub g: Option<String>,
    /// Loss rate
    #[arg(long, allow_negative_numbers = true)]
    pub kappa: Option<f64>,
    /// Real part of the coherent amplitude
    #[arg(long = "z-re", allow_negative_numbers = true)]
    pub z_re: Option<f64>,
    /// Imaginary part of the coherent amplitude
    #[arg(long = "z-im", allow_negative_numbers = true)]
    pub z_im: Option<f64>,
    /// Final time of the uniform grid
    #[arg(long = "t-max", allow_negative_numbers = true)]
    pub t_max: Option<f64>,
    /// Number of intervals; the grid has t-steps + 1 points including t = 0
    #[arg(long = "t-steps")]
    pub t_steps: Option<usize>,
    /// Fock truncation for matrix methods (automatic if absent)
    #[arg(long)]
    pub dim: Option<usize>,
    /// Comma-separated subset of closed,kraus,lindblad (or "all")
    #[arg(long)]
    pub methods: Option<String>,
    /// Output CSV path (stdout if absent)
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Flat key = value file with the same keys as the flags
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum)]
pub enum Profile {
    #[default]
    Default,
    /// Every tolerance ten times tighter
    Strict,
}

impl Profile {
    pub fn scale(self) -> f64 {
        match self {
            Profile::Default => 1.0,
            Profile::Strict => 0.1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Methods {
    pub closed: bool,
    pub kraus: bool,
    pub lindblad: bool,
}

impl Methods {
    pub const CLOSED: Methods = Methods {
        closed: true,
        kraus: false,
        lindblad: false,
    };
    pub const ALL: Methods = Methods {
        closed: true,
        kraus: true,
        lindblad: true,
    };

    pub fn parse(s: &str) -> Result<Self, CliError> {
        let mut m = Methods::default();
        for item in s.split(',').map(str::trim).filter(|s| !s.is_empty()) {
            match item {
                "closed" => m.closed = true,
                "kraus" => m.kraus = true,
                "lindblad" => m.lindblad = true,
                "all" => m = Methods::ALL,
                other => return Err(CliError::Config(format!("unknown method {other:?}"))),
            }
        }
        if m == Methods::default() {
            return Err(CliError::Config("no methods selected".into()));
        }
        Ok(m)
    }

    pub fn needs_matrices(&self) -> bool {
        self.kraus || self.lindblad
    }
}

/// Parameters of one time-series run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub g: f64,
    pub kappa: f64,
    pub z_re: f64,
    pub z_im: f64,
    pub t_max: f64,
    pub t_steps: usize,
    pub dim: Option<usize>,
    pub methods: Methods,
}

impl RunConfig {
    pub fn validate(&self) -> Result<(), CliError> {
        self.params()?;
        check_grid(self.t_max, self.t_steps)?;
        if !self.z_re.is_finite() || !self.z_im.is_finite() {
            return Err(CliError::Config("coherent amplitude must be finite".into()));
        }
        if let Some(d) = self.dim {
            if d < 2 {
                return Err(CliError::Config(format!("dim = {d}; need at least 2")));
            }
        }
        Ok(())
    }

    pub fn params(&self) -> Result<LaserParams, CliError> {
        LaserParams::new(self.g, self.kappa).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn z(&self) -> C64 {
        C64::new(self.z_re, self.z_im)
    }

    pub fn times(&self) -> Vec<f64> {
        time_grid(self.t_max, self.t_steps)
    }
}

/// Parameters of a multi-series closed-form sweep over `g`.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    pub g_list: Vec<f64>,
    pub kappa: f64,
    pub z_re: f64,
    pub z_im: f64,
    pub t_max: f64,
    pub t_steps: usize,
}

impl SweepConfig {
    pub fn validate(&self) -> Result<(), CliError> {
        if self.g_list.is_empty() {
            return Err(CliError::Config("sweep needs at least one gain value".into()));
        }
        for &g in &self.g_list {
            LaserParams::new(g, self.kappa).map_err(|e| CliError::Config(e.to_string()))?;
        }
        check_grid(self.t_max, self.t_steps)?;
        if !self.z_re.is_finite() || !self.z_im.is_finite() {
            return Err(CliError::Config("coherent amplitude must be finite".into()));
        }
        Ok(())
    }

    pub fn z(&self) -> C64 {
        C64::new(self.z_re, self.z_im)
    }

    pub fn times(&self) -> Vec<f64> {
        time_grid(self.t_max, self.t_steps)
    }
}

fn check_grid(t_max: f64, t_steps: usize) -> Result<(), CliError> {
    if !(t_max >= 0.0) || !t_max.is_finite() {
        return Err(CliError::Config(format!("t-max = {t_max}; need a finite value >= 0")));
    }
    if t_steps == 0 {
        return Err(CliError::Config("t-steps must be at least 1".into()));
    }
    Ok(())
}

/// `t_k = t_max·k/t_steps` for `k = 0..=t_steps`.
pub fn time_grid(t_max: f64, t_steps: usize) -> Vec<f64> {
    (0..=t_steps).map(|k| t_max * k as f64 / t_steps as f64).collect()
}

/// Reads a flat `key = value` file. `#` starts a comment; keys may use
/// `-` or `_`.
pub fn read_config_file(path: &Path) -> Result<BTreeMap<String, String>, CliError> {
    let text =
        std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
    parse_config_text(&text)
}

pub fn parse_config_text(text: &str) -> Result<BTreeMap<String, String>, CliError> {
    let mut map = BTreeMap::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| CliError::Config(format!("line {}: expected key = value", lineno + 1)))?;
        let key = key.trim().replace('-', "_");
        if !KNOWN_KEYS.contains(&key.as_str()) {
            return Err(CliError::Config(format!("line {}: unknown key {key:?}", lineno + 1)));
        }
        map.insert(key, value.trim().to_string());
    }
    Ok(map)
}

const KNOWN_KEYS: &[&str] = &[
    "g", "kappa", "z_re", "z_im", "t_max", "t_steps", "dim", "methods", "out",
];

/// Flag values merged over the config file.
#[derive(Debug, Clone, Default)]
pub struct Merged {
    pub g: Option<String>,
    pub kappa: Option<f64>,
    pub z_re: Option<f64>,
    pub z_im: Option<f64>,
    pub t_max: Option<f64>,
    pub t_steps: Option<usize>,
    pub dim: Option<usize>,
    pub methods: Option<String>,
    pub out: Option<PathBuf>,
}

fn parse_value<T: std::str::FromStr>(map: &BTreeMap<String, String>, key: &str) -> Result<Option<T>, CliError> {
    map.get(key)
        .map(|v| {
            v.parse::<T>()
                .map_err(|_| CliError::Config(format!("bad value {v:?} for {key}")))
        })
        .transpose()
}

impl RunArgs {
    pub fn merge(&self) -> Result<Merged, CliError> {
        let file = match &self.config {
            Some(path) => read_config_file(path)?,
            None => BTreeMap::new(),
        };
        Ok(Merged {
            g: self.g.clone().or_else(|| file.get("g").cloned()),
            kappa: self.kappa.or(parse_value(&file, "kappa")?),
            z_re: self.z_re.or(parse_value(&file, "z_re")?),
            z_im: self.z_im.or(parse_value(&file, "z_im")?),
            t_max: self.t_max.or(parse_value(&file, "t_max")?),
            t_steps: self.t_steps.or(parse_value(&file, "t_steps")?),
            dim: self.dim.or(parse_value(&file, "dim")?),
            methods: self.methods.clone().or_else(|| file.get("methods").cloned()),
            out: self.out.clone().or_else(|| file.get("out").map(PathBuf::from)),
        })
    }
}

pub fn parse_g_list(s: &str) -> Result<Vec<f64>, CliError> {
    s.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|v| {
            v.parse::<f64>()
                .map_err(|_| CliError::Config(format!("bad gain value {v:?}")))
        })
        .collect()
}

impl Merged {
    pub fn run_config(&self) -> Result<RunConfig, CliError> {
        let g_text = self
            .g
            .as_deref()
            .ok_or_else(|| CliError::Config("--g is required".into()))?;
        let g = match parse_g_list(g_text)?.as_slice() {
            [g] => *g,
            other => {
                return Err(CliError::Config(format!(
                    "simulate takes one gain value, got {}",
                    other.len()
                )));
            }
        };
        let cfg = RunConfig {
            g,
            kappa: self.kappa.unwrap_or(DEFAULT_KAPPA),
            z_re: self.z_re.unwrap_or(DEFAULT_Z_RE),
            z_im: self.z_im.unwrap_or(0.0),
            t_max: self.t_max.unwrap_or(DEFAULT_T_MAX),
            t_steps: self.t_steps.unwrap_or(DEFAULT_T_STEPS),
            dim: self.dim,
            methods: match &self.methods {
                Some(m) => Methods::parse(m)?,
                None => Methods::CLOSED,
            },
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn sweep_config(&self) -> Result<SweepConfig, CliError> {
        let g_list = match &self.g {
            Some(s) => parse_g_list(s)?,
            None => Vec::new(),
        };
        let cfg = SweepConfig {
            g_list,
            kappa: self.kappa.unwrap_or(DEFAULT_KAPPA),
            z_re: self.z_re.unwrap_or(DEFAULT_Z_RE),
            z_im: self.z_im.unwrap_or(0.0),
            t_max: self.t_max.unwrap_or(DEFAULT_T_MAX),
            t_steps: self.t_steps.unwrap_or(DEFAULT_T_STEPS),
        };
        cfg.validate()?;
        Ok(cfg)
    }
}
