use std::collections::HashMap;
use std::f64::consts::PI;
use std::fmt::{self, Write as _};
use std::path::PathBuf;
use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::crystal::{Background, BackgroundKind, PhysicsParams};
use crate::error::{Error, Result};
use crate::evolution::{EvolveConfig, Scheme, DEFAULT_PICARD_MAX_ITER, DEFAULT_PICARD_TOL};
use crate::spectral::{random_bandlimited, RealField, SobolevIndex, SpectralGrid};

/// Initial-data preset.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum InitSpec {
    /// `amplitude * sin(2 pi k xi / L)`.
    SingleMode { k: usize, amplitude: f64 },
    /// `amplitude * exp(-((xi - center) / width)^2)`.
    GaussianBump { amplitude: f64, width: f64, center: f64 },
    /// Seeded random modes `1..=kmax`, scaled to `max|u0| = amplitude`.
    RandomBandlimited { kmax: usize, amplitude: f64 },
}

impl InitSpec {
    pub fn build(&self, grid: &Arc<SpectralGrid>, seed: u64) -> Result<RealField> {
        match *self {
            Self::SingleMode { k, amplitude } => {
                if k >= grid.n() / 2 {
                    return Err(Error::InvalidParameter(format!("mode {k} not resolved by n = {}", grid.n())));
                }
                let w = 2.0 * PI * k as f64 / grid.length();
                Ok(RealField::from_fn(grid, |x| amplitude * (w * x).sin()))
            }
            Self::GaussianBump {
                amplitude,
                width,
                center,
            } => Ok(RealField::from_fn(grid, |x| amplitude * (-((x - center) / width).powi(2)).exp())),
            Self::RandomBandlimited { kmax, amplitude } => {
                random_bandlimited(grid, kmax, amplitude, &mut ChaCha8Rng::seed_from_u64(seed))
            }
        }
    }
}

impl fmt::Display for InitSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Self::SingleMode { k, amplitude } => write!(f, "single_mode {k} {amplitude:?}"),
            Self::GaussianBump {
                amplitude,
                width,
                center,
            } => write!(f, "gaussian_bump {amplitude:?} {width:?} {center:?}"),
            Self::RandomBandlimited { kmax, amplitude } => write!(f, "random_bandlimited {kmax} {amplitude:?}"),
        }
    }
}

impl std::str::FromStr for InitSpec {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let words: Vec<&str> = s.split_whitespace().collect();
        let num = |w: &str| -> std::result::Result<f64, String> {
            match w.parse::<f64>() {
                Ok(v) if v.is_finite() => Ok(v),
                _ => Err(format!("'{w}' is not a finite number")),
            }
        };
        let count = |w: &str| -> std::result::Result<usize, String> {
            match w.parse::<usize>() {
                Ok(v) if v >= 1 => Ok(v),
                _ => Err(format!("'{w}' is not a positive integer")),
            }
        };
        match words.as_slice() {
            ["single_mode", k, a] => Ok(Self::SingleMode {
                k: count(k)?,
                amplitude: num(a)?,
            }),
            ["gaussian_bump", a, w, c] => {
                let width = num(w)?;
                if width <= 0.0 {
                    return Err(format!("bump width {width} must be positive"));
                }
                Ok(Self::GaussianBump {
                    amplitude: num(a)?,
                    width,
                    center: num(c)?,
                })
            }
            ["random_bandlimited", k, a] => Ok(Self::RandomBandlimited {
                kmax: count(k)?,
                amplitude: num(a)?,
            }),
            _ => Err(format!(
                "bad init '{s}' (expected single_mode k amplitude | gaussian_bump amplitude width center | \
                 random_bandlimited kmax amplitude)"
            )),
        }
    }
}

/// Everything a run needs, as read from a config file.
#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub n: usize,
    pub length: f64,
    pub tau: f64,
    pub gamma: f64,
    pub epsilon: f64,
    pub dt: f64,
    pub t_final: f64,
    pub s: f64,
    pub scheme: Scheme,
    pub background: BackgroundKind,
    pub window_inner_fraction: f64,
    pub picard_tol: f64,
    pub picard_max_iter: usize,
    pub output_stride: usize,
    pub out_dir: Option<PathBuf>,
    pub seed: u64,
    pub init: InitSpec,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            n: 256,
            length: 40.0,
            tau: 1.0,
            gamma: 0.0,
            epsilon: 0.0,
            dt: 1e-4,
            t_final: 0.1,
            s: 5.0,
            scheme: Scheme::Imex,
            background: BackgroundKind::Flat,
            window_inner_fraction: crate::crystal::DEFAULT_INNER_FRACTION,
            picard_tol: DEFAULT_PICARD_TOL,
            picard_max_iter: DEFAULT_PICARD_MAX_ITER,
            output_stride: 10,
            out_dir: None,
            seed: 42,
            init: InitSpec::SingleMode { k: 3, amplitude: 1e-3 },
        }
    }
}

pub const CONFIG_KEYS: [&str; 17] = [
    "n",
    "length",
    "tau",
    "gamma",
    "epsilon",
    "dt",
    "t_final",
    "s",
    "scheme",
    "background",
    "window_inner_fraction",
    "picard_tol",
    "picard_max_iter",
    "output_stride",
    "out_dir",
    "seed",
    "init",
];

fn positive(v: f64) -> std::result::Result<f64, String> {
    if v > 0.0 {
        Ok(v)
    } else {
        Err(format!("{v} must be positive"))
    }
}

impl RunConfig {
    fn set(&mut self, key: &str, value: &str) -> std::result::Result<(), String> {
        let float = || -> std::result::Result<f64, String> {
            match value.parse::<f64>() {
                Ok(v) if v.is_finite() => Ok(v),
                _ => Err(format!("'{value}' is not a finite number")),
            }
        };
        let int = || value.parse::<usize>().map_err(|_| format!("'{value}' is not a nonnegative integer"));
        match key {
            "n" => {
                let n = int()?;
                SpectralGrid::new(n, 1.0).map_err(|e| e.to_string())?;
                self.n = n;
            }
            "length" => self.length = positive(float()?)?,
            "tau" => self.tau = positive(float()?)?,
            "gamma" => {
                let g = float()?;
                if !(0.0..1.0).contains(&g) {
                    return Err(format!("gamma = {g} must lie in [0, 1) so that beta = tau (1 - gamma) > 0"));
                }
                self.gamma = g;
            }
            "epsilon" => {
                let e = float()?;
                if e < 0.0 {
                    return Err(format!("epsilon = {e} must be nonnegative"));
                }
                self.epsilon = e;
            }
            "dt" => self.dt = positive(float()?)?,
            "t_final" => self.t_final = positive(float()?)?,
            "s" => {
                let s = float()?;
                SobolevIndex::new(s).map_err(|e| e.to_string())?;
                self.s = s;
            }
            "scheme" => self.scheme = value.parse()?,
            "background" => self.background = value.parse()?,
            "window_inner_fraction" => {
                let a = float()?;
                if !(a > 0.0 && a <= 0.8) {
                    return Err(format!("window_inner_fraction = {a} must lie in (0, 0.8]"));
                }
                self.window_inner_fraction = a;
            }
            "picard_tol" => self.picard_tol = positive(float()?)?,
            "picard_max_iter" => {
                self.picard_max_iter = int()?;
                if self.picard_max_iter == 0 {
                    return Err("picard_max_iter must be at least 1".into());
                }
            }
            "output_stride" => {
                self.output_stride = int()?;
                if self.output_stride == 0 {
                    return Err("output_stride must be at least 1".into());
                }
            }
            "out_dir" => {
                if value.is_empty() {
                    return Err("out_dir is empty".into());
                }
                self.out_dir = Some(PathBuf::from(value));
            }
            "seed" => self.seed = value.parse().map_err(|_| format!("'{value}' is not a valid seed"))?,
            "init" => self.init = value.parse()?,
            other => return Err(format!("unknown key '{other}'")),
        }
        Ok(())
    }

    pub fn grid(&self) -> Result<Arc<SpectralGrid>> {
        SpectralGrid::new(self.n, self.length)
    }

    pub fn params(&self) -> Result<PhysicsParams> {
        PhysicsParams::new(self.tau, self.gamma, self.epsilon)
    }

    pub fn background(&self, grid: &Arc<SpectralGrid>) -> Result<Background> {
        Background::from_kind(grid, self.background, self.window_inner_fraction)
    }

    /// Evolution settings on `grid` (normally [`RunConfig::grid`]).
    pub fn evolve_config(&self, grid: &Arc<SpectralGrid>) -> Result<EvolveConfig> {
        let mut c = EvolveConfig::new(
            self.params()?,
            self.background(grid)?,
            SobolevIndex::new(self.s)?,
            self.dt,
            self.t_final,
        )
        .with_scheme(self.scheme)
        .with_output_stride(self.output_stride);
        c.picard_tol = self.picard_tol;
        c.picard_max_iter = self.picard_max_iter;
        c.validate()?;
        Ok(c)
    }

    pub fn initial_data(&self, grid: &Arc<SpectralGrid>) -> Result<RealField> {
        self.init.build(grid, self.seed)
    }
}

/// Parse `key = value` lines; `#` starts a comment. Omitted keys take their
/// defaults. Every error names the offending line.
pub fn parse_config(text: &str) -> Result<RunConfig> {
    let mut cfg = RunConfig::default();
    let mut seen: HashMap<String, usize> = HashMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let body = raw.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        let err = |message: String| Error::Config { line, message };
        let (key, value) = body
            .split_once('=')
            .ok_or_else(|| err(format!("expected 'key = value', found '{body}'")))?;
        let (key, value) = (key.trim(), value.trim());
        if let Some(first) = seen.insert(key.to_string(), line) {
            return Err(err(format!("duplicate key '{key}' (first set on line {first})")));
        }
        cfg.set(key, value).map_err(|m| err(format!("{key}: {m}")))?;
    }

    let line_of = |keys: &[&str]| keys.iter().filter_map(|k| seen.get(*k)).copied().max().unwrap_or(0);
    if cfg.t_final < cfg.dt {
        return Err(Error::Config {
            line: line_of(&["dt", "t_final"]),
            message: format!("t_final = {} is shorter than dt = {}", cfg.t_final, cfg.dt),
        });
    }
    let grid = cfg.grid().map_err(|e| Error::Config {
        line: line_of(&["n", "length"]),
        message: e.to_string(),
    })?;
    cfg.initial_data(&grid).map_err(|e| Error::Config {
        line: line_of(&["init", "n"]),
        message: e.to_string(),
    })?;
    Ok(cfg)
}

/// Inverse of [`parse_config`]: every key, floats in round-trip form.
pub fn emit_config(cfg: &RunConfig) -> String {
    let mut out = String::new();
    let mut put = |k: &str, v: String| {
        let _ = writeln!(out, "{k} = {v}");
    };
    put("n", cfg.n.to_string());
    put("length", format!("{:?}", cfg.length));
    put("tau", format!("{:?}", cfg.tau));
    put("gamma", format!("{:?}", cfg.gamma));
    put("epsilon", format!("{:?}", cfg.epsilon));
    put("dt", format!("{:?}", cfg.dt));
    put("t_final", format!("{:?}", cfg.t_final));
    put("s", format!("{:?}", cfg.s));
    put("scheme", cfg.scheme.to_string());
    put("background", cfg.background.to_string());
    put("window_inner_fraction", format!("{:?}", cfg.window_inner_fraction));
    put("picard_tol", format!("{:?}", cfg.picard_tol));
    put("picard_max_iter", cfg.picard_max_iter.to_string());
    put("output_stride", cfg.output_stride.to_string());
    if let Some(dir) = &cfg.out_dir {
        put("out_dir", dir.display().to_string());
    }
    put("seed", cfg.seed.to_string());
    put("init", cfg.init.to_string());
    out
}
