//! Run configuration: TOML file, command-line flags and their merge.

use std::path::PathBuf;
use std::str::FromStr;

use clap::Args;
use serde::Deserialize;

use crate::limiters::{Cadence, FluxLimiter, LimiterConfig, SlopeLimiter};
use crate::mesh::StencilMode;
use crate::problems::{self, TestCase};
use crate::timestep::Space;
use crate::{Error, Result};

/// Pseudo-time step of steady runs as a fraction of the P0 CFL bound.
pub const STEADY_CFL: f64 = 0.5;
/// Safety factor of `--dt auto` for transient runs.
pub const TRANSIENT_CFL: f64 = 0.9;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum DtChoice {
    Fixed(f64),
    /// Fraction of the CFL bound of the initial data.
    Auto(f64),
}

impl FromStr for DtChoice {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s == "auto" {
            return Ok(Self::Auto(TRANSIENT_CFL));
        }
        match s.parse::<f64>() {
            Ok(v) if v > 0.0 && v.is_finite() => Ok(Self::Fixed(v)),
            _ => Err(Error::Config(format!("--dt expects a positive number or 'auto', got '{s}'"))),
        }
    }
}

pub fn parse_on_off(s: &str) -> Result<bool> {
    match s {
        "on" | "true" | "yes" | "1" => Ok(true),
        "off" | "false" | "no" | "0" => Ok(false),
        other => Err(Error::Config(format!("expected on|off, got '{other}'"))),
    }
}

/// Comma-separated list of cell counts, e.g. `32,64,128`.
pub fn parse_meshes(s: &str) -> Result<Vec<usize>> {
    s.split(',')
        .map(|t| {
            let t = t.trim();
            t.parse::<usize>()
                .ok()
                .filter(|&n| n >= 2)
                .ok_or_else(|| Error::Config(format!("invalid mesh size '{t}' in --meshes")))
        })
        .collect()
}

pub fn parse_test(s: &str) -> Result<TestCase> {
    problems::by_name(s).ok_or_else(|| {
        let names: Vec<&str> = problems::catalog().iter().map(|t| t.name).collect();
        Error::Config(format!("unknown test '{s}' (expected one of {})", names.join(", ")))
    })
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum NumberOrText {
    Number(f64),
    Text(String),
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum BoolOrText {
    Bool(bool),
    Text(String),
}

/// Contents of a `--config` file. Every key is optional.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    test: Option<String>,
    nx: Option<usize>,
    flux: Option<String>,
    slope: Option<String>,
    stencil: Option<String>,
    cadence: Option<String>,
    dt: Option<NumberOrText>,
    cfl: Option<f64>,
    t_final: Option<f64>,
    entropy: Option<BoolOrText>,
    gamma: Option<f64>,
    out: Option<PathBuf>,
    meshes: Option<Vec<usize>>,
    space: Option<String>,
    tol: Option<f64>,
    max_steps: Option<usize>,
}

/// Parses TOML run settings.
pub fn parse_config_file(text: &str) -> Result<FileConfig> {
    toml::from_str(text).map_err(|e| Error::Config(format!("config file: {e}")))
}

/// Flags shared by `run` and `convergence`. Flags override the file.
#[derive(Args, Debug, Default, Clone)]
pub struct RunArgs {
    /// Test case name or alias (anis, sbr, circ, circ-smooth, kpp).
    #[arg(long)]
    pub test: Option<String>,
    /// Cells along x; y follows the domain aspect ratio.
    #[arg(long)]
    pub nx: Option<usize>,
    /// none | fct | mcl
    #[arg(long)]
    pub flux: Option<String>,
    /// none | fc-l | fc-n | sc | dc | dc-m
    #[arg(long)]
    pub slope: Option<String>,
    /// isotropic | layered | layered-horizontal | layered-vertical
    #[arg(long)]
    pub stencil: Option<String>,
    /// stage | step
    #[arg(long)]
    pub cadence: Option<String>,
    /// Time step, or `auto`.
    #[arg(long)]
    pub dt: Option<String>,
    /// Fraction of the CFL bound used by `--dt auto` and steady runs.
    #[arg(long)]
    pub cfl: Option<f64>,
    #[arg(long = "t-final")]
    pub t_final: Option<f64>,
    /// on | off
    #[arg(long)]
    pub entropy: Option<String>,
    /// DC-M penalty rate.
    #[arg(long)]
    pub gamma: Option<f64>,
    /// Output directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Comma-separated cell counts for convergence studies.
    #[arg(long)]
    pub meshes: Option<String>,
    /// TOML file with any of the settings above.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// p0 | p1
    #[arg(long)]
    pub space: Option<String>,
    /// Steady residual tolerance.
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(long = "max-steps")]
    pub max_steps: Option<usize>,
    /// Print progress every this many steps (0 = silent).
    #[arg(long, default_value_t = 500)]
    pub progress: usize,
}

/// Fully resolved settings of one solve.
#[derive(Clone, Debug)]
pub struct RunConfig {
    pub test: TestCase,
    pub nx: usize,
    pub limiters: LimiterConfig,
    pub dt: DtChoice,
    pub t_final: Option<f64>,
    pub entropy: bool,
    pub space: Space,
    pub out: Option<PathBuf>,
    pub meshes: Vec<usize>,
    pub tol: f64,
    pub max_steps: usize,
    pub progress: usize,
}

impl RunConfig {
    pub fn new(test: TestCase, nx: usize, limiters: LimiterConfig) -> Self {
        let steady = test.is_steady();
        let entropy = test.law.entropy.is_some();
        let dt = if steady {
            DtChoice::Auto(STEADY_CFL)
        } else {
            DtChoice::Fixed(test.dt)
        };
        Self {
            test,
            nx,
            limiters,
            dt,
            t_final: None,
            entropy,
            space: Space::P1,
            out: None,
            meshes: Vec::new(),
            tol: 1e-10,
            max_steps: 100_000,
            progress: 0,
        }
    }

    /// Default output directory `out/<test>-<slope>-<flux>-<nx>`.
    pub fn output_dir(&self) -> PathBuf {
        self.out.clone().unwrap_or_else(|| {
            let mut label = format!("{}-{}", self.test.name, self.limiters.label());
            if self.space == Space::P0 {
                label.push_str("-p0");
            }
            PathBuf::from("out").join(format!("{label}-{}", self.nx))
        })
    }

    /// Merges the optional file named by `--config` with the flags.
    pub fn from_args(args: &RunArgs) -> Result<Self> {
        let file = match &args.config {
            Some(path) => {
                let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
                    path: path.clone(),
                    source,
                })?;
                parse_config_file(&text)?
            }
            None => FileConfig::default(),
        };
        Self::merge(file, args)
    }

    pub fn merge(file: FileConfig, args: &RunArgs) -> Result<Self> {
        let test_name = args
            .test
            .clone()
            .or(file.test)
            .ok_or_else(|| Error::Config("missing --test".into()))?;
        let test = parse_test(&test_name)?;
        let nx = args.nx.or(file.nx).unwrap_or(128);
        if nx < 2 {
            return Err(Error::Config(format!("--nx must be at least 2, got {nx}")));
        }
        let flux: FluxLimiter = args.flux.clone().or(file.flux).as_deref().unwrap_or("none").parse()?;
        let slope: SlopeLimiter = args.slope.clone().or(file.slope).as_deref().unwrap_or("none").parse()?;
        let mut limiters = LimiterConfig::new(flux, slope);
        // The recommended stencil of a test targets the derivative limiters.
        limiters.stencil = match args.stencil.clone().or(file.stencil) {
            Some(s) => s.parse()?,
            None if matches!(slope, SlopeLimiter::Dc | SlopeLimiter::DcM) => test.stencil,
            None => StencilMode::Isotropic,
        };
        if limiters.stencil == StencilMode::Custom {
            return Err(Error::Config("custom stencils are only available through the library".into()));
        }
        if let Some(c) = args.cadence.clone().or(file.cadence) {
            limiters.cadence = c.parse::<Cadence>()?;
        }
        if let Some(g) = args.gamma.or(file.gamma) {
            limiters.gamma = g;
        }
        limiters.validate(&test.law)?;

        let mut cfg = RunConfig::new(test, nx, limiters);
        let cfl = args.cfl.or(file.cfl);
        if let Some(c) = cfl {
            if !(c > 0.0 && c <= 1.0) {
                return Err(Error::Config(format!("--cfl must lie in (0, 1], got {c}")));
            }
        }
        let dt = match (&args.dt, file.dt) {
            (Some(s), _) => Some(s.parse::<DtChoice>()?),
            (None, Some(NumberOrText::Number(v))) => Some(v.to_string().parse::<DtChoice>()?),
            (None, Some(NumberOrText::Text(s))) => Some(s.parse::<DtChoice>()?),
            (None, None) => None,
        };
        if let Some(dt) = dt {
            cfg.dt = dt;
        }
        if let (DtChoice::Auto(_), Some(c)) = (cfg.dt, cfl) {
            cfg.dt = DtChoice::Auto(c);
        }
        cfg.t_final = args.t_final.or(file.t_final);
        if let Some(t) = cfg.t_final {
            if !(t > 0.0 && t.is_finite()) {
                return Err(Error::Config(format!("--t-final must be positive, got {t}")));
            }
        }
        cfg.entropy = match (&args.entropy, file.entropy) {
            (Some(s), _) => parse_on_off(s)?,
            (None, Some(BoolOrText::Bool(b))) => b,
            (None, Some(BoolOrText::Text(s))) => parse_on_off(&s)?,
            (None, None) => cfg.entropy,
        };
        if let Some(s) = args.space.clone().or(file.space) {
            cfg.space = s.parse()?;
        }
        cfg.out = args.out.clone().or(file.out);
        cfg.meshes = match (&args.meshes, file.meshes) {
            (Some(s), _) => parse_meshes(s)?,
            (None, Some(m)) => {
                if let Some(bad) = m.iter().find(|&&n| n < 2) {
                    return Err(Error::Config(format!("invalid mesh size {bad} in meshes")));
                }
                m
            }
            (None, None) => Vec::new(),
        };
        if let Some(t) = args.tol.or(file.tol) {
            if !(t > 0.0) {
                return Err(Error::Config(format!("--tol must be positive, got {t}")));
            }
            cfg.tol = t;
        }
        if let Some(m) = args.max_steps.or(file.max_steps) {
            cfg.max_steps = m;
        }
        cfg.progress = args.progress;
        Ok(cfg)
    }
}
