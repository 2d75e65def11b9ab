//! Experiment configuration: flat key=value files, flag overrides, grids.

use std::fmt::Write as _;
use std::path::PathBuf;

use anyhow::{anyhow, bail, Context, Result};

/// Which experiment to run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    SweepL,
    SweepLambda,
    Gamma,
    Design,
    Estimate,
}

impl Mode {
    pub fn name(self) -> &'static str {
        match self {
            Mode::SweepL => "sweep-l",
            Mode::SweepLambda => "sweep-lambda",
            Mode::Gamma => "gamma",
            Mode::Design => "design",
            Mode::Estimate => "estimate",
        }
    }

    fn parse(s: &str) -> Result<Self> {
        Ok(match s.to_ascii_lowercase().as_str() {
            "sweep-l" => Mode::SweepL,
            "sweep-lambda" => Mode::SweepLambda,
            "gamma" => Mode::Gamma,
            "design" => Mode::Design,
            "estimate" => Mode::Estimate,
            other => bail!("unknown mode '{other}'"),
        })
    }
}

/// Command-line overrides applied on top of a config file.
#[derive(Debug, Default, Clone)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub workers: Option<usize>,
    pub reps: Option<u64>,
    pub kv: Option<u32>,
    pub out: Option<PathBuf>,
}

/// Fully resolved experiment parameters. Lengths are normalized so the disc
/// radius is 1; intensities are specified through the mean counts λ₀πR² and λπR².
#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub mode: Mode,
    /// Mean obstacle count λ₀πR².
    pub lambda0_pi_r2: f64,
    /// Normalized obstacle length grid L/R (single value where the mode needs one).
    pub l_over_r: Vec<f64>,
    /// Mean anchor count grid λπR² (single value where the mode needs one).
    pub lambda_pi_r2: Vec<f64>,
    /// Visibility quota: blind means fewer than this many visible anchors.
    pub kv: u32,
    /// Blind-spot budgets for design mode.
    pub mu: Vec<f64>,
    /// Mean obstacle counts for gamma mode.
    pub counts: Vec<f64>,
    /// Monte-Carlo replications per point.
    pub reps: u64,
    pub seed: u64,
    /// Worker threads (0 or absent = all cores). Never echoed into the CSV body.
    pub workers: Option<usize>,
    /// Output path; stdout when absent.
    pub out: Option<PathBuf>,
    /// Tolerance on the achieved blind probability in design mode.
    pub design_tol: f64,
}

/// Raw key=value pairs from a config file, before mode defaults are known.
#[derive(Debug, Default)]
struct RawConfig {
    mode: Option<Mode>,
    lambda0_pi_r2: Option<f64>,
    l_over_r: Option<Vec<f64>>,
    lambda_pi_r2: Option<Vec<f64>>,
    kv: Option<u32>,
    mu: Option<Vec<f64>>,
    counts: Option<Vec<f64>>,
    reps: Option<u64>,
    seed: Option<u64>,
    workers: Option<usize>,
    out: Option<PathBuf>,
    design_tol: Option<f64>,
}

/// Parses a scalar, comma list, or `lo:hi:step` range into an ascending grid.
/// Range values are snapped to 12 decimals so decimal steps stay readable.
pub fn parse_grid(value: &str) -> Result<Vec<f64>> {
    let parse_one = |s: &str| -> Result<f64> {
        s.trim().parse::<f64>().map_err(|_| anyhow!("expected a number, got '{s}'"))
    };
    let snap = |v: f64| (v * 1e12).round() / 1e12;
    let grid = if value.contains(':') {
        let parts: Vec<&str> = value.split(':').collect();
        if parts.len() != 3 {
            bail!("range must be lo:hi:step, got '{value}'");
        }
        let (lo, hi, step) = (parse_one(parts[0])?, parse_one(parts[1])?, parse_one(parts[2])?);
        if !(step > 0.0) || hi < lo {
            bail!("range '{value}' must have positive step and hi >= lo");
        }
        let n = ((hi - lo) / step + 1e-9).floor() as usize;
        (0..=n).map(|i| snap(lo + i as f64 * step)).collect()
    } else {
        value.split(',').map(parse_one).collect::<Result<Vec<f64>>>()?
    };
    if grid.is_empty() {
        bail!("empty grid '{value}'");
    }
    if !grid.iter().all(|v| v.is_finite()) {
        bail!("grid '{value}' contains a non-finite value");
    }
    if grid.windows(2).any(|w| w[1] <= w[0]) {
        bail!("grid '{value}' must be strictly ascending");
    }
    Ok(grid)
}

fn parse_file(text: &str) -> Result<RawConfig> {
    let mut raw = RawConfig::default();
    for (idx, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| anyhow!("line {}: expected key=value, got '{line}'", idx + 1))?;
        let (key, value) = (key.trim(), value.trim());
        let ctx = || format!("line {} (key '{key}')", idx + 1);
        match key {
            "mode" => raw.mode = Some(Mode::parse(value).with_context(ctx)?),
            "lambda0_pi_r2" => raw.lambda0_pi_r2 = Some(value.parse().with_context(ctx)?),
            "l_over_r" => raw.l_over_r = Some(parse_grid(value).with_context(ctx)?),
            "lambda_pi_r2" => raw.lambda_pi_r2 = Some(parse_grid(value).with_context(ctx)?),
            "kv" => raw.kv = Some(value.parse().with_context(ctx)?),
            "mu" => raw.mu = Some(parse_grid(value).with_context(ctx)?),
            "counts" => raw.counts = Some(parse_grid(value).with_context(ctx)?),
            "reps" => raw.reps = Some(value.parse().with_context(ctx)?),
            "seed" => raw.seed = Some(value.parse().with_context(ctx)?),
            "workers" => raw.workers = Some(value.parse().with_context(ctx)?),
            "out" => raw.out = Some(PathBuf::from(value)),
            "design_tol" => raw.design_tol = Some(value.parse().with_context(ctx)?),
            other => bail!("line {}: unknown key '{other}'", idx + 1),
        }
    }
    Ok(raw)
}

/// Builds the final configuration: mode defaults, then config file, then flags,
/// with the worker count also overridable via `BLINDSPOT_WORKERS`.
pub fn resolve(
    mode: Mode,
    config_path: Option<&PathBuf>,
    over: &Overrides,
    env_workers: Option<usize>,
) -> Result<ExperimentConfig> {
    let raw = match config_path {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .with_context(|| format!("reading config {}", path.display()))?;
            let raw = parse_file(&text).with_context(|| format!("in {}", path.display()))?;
            if let Some(file_mode) = raw.mode {
                if file_mode != mode {
                    bail!(
                        "config sets mode={} but the {} subcommand was invoked",
                        file_mode.name(),
                        mode.name()
                    );
                }
            }
            raw
        }
        None => RawConfig::default(),
    };

    let l_default = match mode {
        Mode::SweepL | Mode::Gamma => parse_grid("0.1:1.0:0.1").unwrap(),
        Mode::SweepLambda => vec![0.1, 0.5, 1.0],
        Mode::Design | Mode::Estimate => vec![0.5],
    };
    let lambda_default = match mode {
        Mode::SweepLambda => parse_grid("4:24:2").unwrap(),
        _ => vec![15.0],
    };
    let reps_default = match mode {
        Mode::Gamma => 100_000,
        _ => 50_000,
    };

    let cfg = ExperimentConfig {
        mode,
        lambda0_pi_r2: raw.lambda0_pi_r2.unwrap_or(8.0),
        l_over_r: raw.l_over_r.unwrap_or(l_default),
        lambda_pi_r2: raw.lambda_pi_r2.unwrap_or(lambda_default),
        kv: over.kv.or(raw.kv).unwrap_or(3),
        mu: raw.mu.unwrap_or_else(|| vec![0.1]),
        counts: raw.counts.unwrap_or_else(|| vec![2.0, 4.0, 8.0]),
        reps: over.reps.or(raw.reps).unwrap_or(reps_default),
        seed: over.seed.or(raw.seed).unwrap_or(1),
        workers: over.workers.or(env_workers).or(raw.workers),
        out: over.out.clone().or(raw.out),
        design_tol: raw.design_tol.unwrap_or(1e-3),
    };
    validate(&cfg)?;
    Ok(cfg)
}

fn validate(cfg: &ExperimentConfig) -> Result<()> {
    if !(cfg.lambda0_pi_r2 >= 0.0) || !cfg.lambda0_pi_r2.is_finite() {
        bail!("lambda0_pi_r2 must be finite and >= 0, got {}", cfg.lambda0_pi_r2);
    }
    if cfg.l_over_r.iter().any(|&v| v < 0.0) {
        bail!("l_over_r values must be >= 0");
    }
    if cfg.lambda_pi_r2.iter().any(|&v| v < 0.0) {
        bail!("lambda_pi_r2 values must be >= 0");
    }
    if cfg.kv == 0 {
        bail!("kv must be at least 1");
    }
    if cfg.mu.iter().any(|&v| !(v > 0.0) || v >= 1.0) {
        bail!("mu values must lie in (0, 1)");
    }
    if cfg.counts.iter().any(|&v| !(v > 0.0)) {
        bail!("counts must be positive");
    }
    if cfg.reps == 0 {
        bail!("reps must be at least 1");
    }
    if !(cfg.design_tol > 0.0) || !cfg.design_tol.is_finite() {
        bail!("design_tol must be finite and positive");
    }
    let single_l = matches!(cfg.mode, Mode::Design | Mode::Estimate);
    if single_l && cfg.l_over_r.len() != 1 {
        bail!("{} mode takes a single l_over_r value", cfg.mode.name());
    }
    let single_lambda = matches!(cfg.mode, Mode::SweepL | Mode::Estimate);
    if single_lambda && cfg.lambda_pi_r2.len() != 1 {
        bail!("{} mode takes a single lambda_pi_r2 value", cfg.mode.name());
    }
    Ok(())
}

fn join(values: &[f64]) -> String {
    let mut s = String::new();
    for (i, v) in values.iter().enumerate() {
        if i > 0 {
            s.push(',');
        }
        let _ = write!(s, "{v}");
    }
    s
}

impl ExperimentConfig {
    /// Comment lines echoing every parameter that shapes the CSV body.
    /// Worker count and output path are deliberately absent: the body must be
    /// byte-identical across worker counts and destinations.
    pub fn echo_lines(&self) -> Vec<String> {
        let mut lines = vec![
            format!("# mode={}", self.mode.name()),
            format!("# lambda0_pi_r2={}", self.lambda0_pi_r2),
            format!("# l_over_r={}", join(&self.l_over_r)),
        ];
        match self.mode {
            Mode::Gamma => lines.push(format!("# counts={}", join(&self.counts))),
            Mode::Design => {
                lines.push(format!("# mu={}", join(&self.mu)));
                lines.push(format!("# design_tol={}", self.design_tol));
            }
            _ => lines.push(format!("# lambda_pi_r2={}", join(&self.lambda_pi_r2))),
        }
        if self.mode != Mode::Gamma {
            lines.push(format!("# kv={}", self.kv));
        }
        lines.push(format!("# reps={}", self.reps));
        lines.push(format!("# seed={}", self.seed));
        lines
    }
}
