//! Run configuration: file, defaults and command-line overrides.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::Args;
use nlsdelta::SolitonParams;
use nlsdelta::Regime;
use serde::{Deserialize, Serialize};

use crate::commands::Command;

/// Everything a run depends on.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub command: Option<Command>,
    pub physics: Physics,
    pub numerics: Numerics,
    pub output: Output,
    /// Seed for randomized test data.
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Physics {
    pub q: f64,
    pub p: f64,
    pub sigma: f64,
    pub omega: f64,
}

impl Default for Physics {
    fn default() -> Self {
        Self { q: -1.0, p: 5.0, sigma: -1.0, omega: 1.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Numerics {
    /// Mesh width.
    pub h: f64,
    /// Half-width `X` of the computational box `[−X, X]`.
    #[serde(rename = "X")]
    pub x_half: f64,
    pub dt: f64,
    /// Right end of the shooting interval.
    pub x0: f64,
    /// Residual tolerance of the modulation Newton solve.
    pub newton_tol: f64,
    /// Log-grid density of resonance scans.
    pub per_decade: usize,
}

impl Default for Numerics {
    fn default() -> Self {
        Self { h: 0.01, x_half: 40.0, dt: 0.01, x0: 50.0, newton_tol: 1e-12, per_decade: 200 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields, default)]
pub struct Output {
    /// Output path; standard output when absent.
    pub out: Option<PathBuf>,
    pub threads: Option<usize>,
    pub verbose: bool,
}

/// Flags that override fields of the configuration.
#[derive(Debug, Clone, Default, Args)]
pub struct Overrides {
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub q: Option<f64>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub p: Option<f64>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub sigma: Option<f64>,
    #[arg(long, global = true, alias = "omega0")]
    pub omega: Option<f64>,
    #[arg(long, global = true)]
    pub h: Option<f64>,
    #[arg(long = "X", global = true)]
    pub x_half: Option<f64>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub dt: Option<f64>,
    #[arg(long, global = true)]
    pub x0: Option<f64>,
    #[arg(long, global = true)]
    pub newton_tol: Option<f64>,
    #[arg(long, global = true)]
    pub per_decade: Option<usize>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).context("invalid configuration")
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        Self::from_toml(&text).with_context(|| format!("in {}", path.display()))
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).context("serializing configuration")
    }

    pub fn apply(&mut self, o: &Overrides) {
        let set = |dst: &mut f64, src: Option<f64>| {
            if let Some(v) = src {
                *dst = v;
            }
        };
        set(&mut self.physics.q, o.q);
        set(&mut self.physics.p, o.p);
        set(&mut self.physics.sigma, o.sigma);
        set(&mut self.physics.omega, o.omega);
        set(&mut self.numerics.h, o.h);
        set(&mut self.numerics.x_half, o.x_half);
        set(&mut self.numerics.dt, o.dt);
        set(&mut self.numerics.x0, o.x0);
        set(&mut self.numerics.newton_tol, o.newton_tol);
        if let Some(n) = o.per_decade {
            self.numerics.per_decade = n;
        }
        if let Some(s) = o.seed {
            self.seed = s;
        }
    }

    /// Rejects parameters outside the model's regime.
    pub fn validate(&self) -> Result<()> {
        let ph = &self.physics;
        if !(ph.q < 0.0) {
            bail!("q = {} rejected: q must be negative (attractive delta)", ph.q);
        }
        if !(ph.p > 0.0) || !ph.p.is_finite() {
            bail!("p = {} rejected: p must be positive", ph.p);
        }
        Regime::from_sigma(ph.sigma)?;
        self.params().context("out-of-regime frequency")?;
        let nu = &self.numerics;
        for (name, v) in [("h", nu.h), ("X", nu.x_half), ("x0", nu.x0), ("newton_tol", nu.newton_tol)] {
            if !(v > 0.0) || !v.is_finite() {
                bail!("{name} = {v} rejected: must be positive");
            }
        }
        if nu.dt == 0.0 || !nu.dt.is_finite() {
            bail!("dt = {} rejected: must be finite and nonzero", nu.dt);
        }
        if nu.per_decade < 2 {
            bail!("per_decade = {} rejected: need at least 2", nu.per_decade);
        }
        Ok(())
    }

    pub fn regime(&self) -> Regime {
        Regime::from_sigma(self.physics.sigma).unwrap_or(Regime::Focusing)
    }

    /// Parameters at the configured frequency.
    pub fn params(&self) -> Result<SolitonParams> {
        self.params_at(self.physics.omega)
    }

    pub fn params_at(&self, omega: f64) -> Result<SolitonParams> {
        let ph = &self.physics;
        Ok(SolitonParams::new(ph.q, self.regime(), ph.p, omega)?)
    }
}

/// `lo:hi` or `lo:hi:step`.
pub fn parse_range(s: &str) -> Result<Vec<f64>> {
    let parts: Vec<f64> = s
        .split(':')
        .map(|t| t.trim().parse::<f64>().with_context(|| format!("bad number {t:?} in range {s:?}")))
        .collect::<Result<_>>()?;
    match parts.len() {
        2 | 3 if parts[0] <= parts[1] => Ok(parts),
        2 | 3 => bail!("range {s:?} is empty"),
        _ => bail!("range {s:?} must be lo:hi or lo:hi:step"),
    }
}

/// Points `lo, lo+step, …` up to `hi` inclusive.
pub fn stepped(lo: f64, hi: f64, step: f64) -> Result<Vec<f64>> {
    if !(step > 0.0) {
        bail!("step must be positive, got {step}");
    }
    let n = ((hi - lo) / step + 1e-9).floor() as usize;
    Ok((0..=n).map(|i| lo + step * i as f64).collect())
}
