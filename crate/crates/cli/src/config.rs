//! Run configuration read from TOML, with command-line overrides.
//!
//! Every key has a default, so an empty file (or no file) is a valid
//! configuration. Unknown keys are rejected. The resolved configuration is
//! echoed in full into the run manifest.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub seed: u64,
    /// Monte Carlo trials; each command reads it as its main sample count.
    pub trials: usize,
    /// Worker threads; 0 means all available cores.
    pub threads: usize,
    pub out: String,
    pub sample_hive: SampleHiveConfig,
    pub tension: TensionConfig,
    pub solve: SolveConfig,
    pub czd: CzdConfig,
    pub check: CheckConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            trials: 50,
            threads: 0,
            out: "out".into(),
            sample_hive: SampleHiveConfig::default(),
            tension: TensionConfig::default(),
            solve: SolveConfig::default(),
            czd: CzdConfig::default(),
            check: CheckConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SampleHiveConfig {
    pub n: usize,
    pub sigma_lambda: f64,
    pub sigma_mu: f64,
    /// Vertex grid step; vertices `(i, j)` with `i, j` multiples of `stride`
    /// strictly inside the square.
    pub stride: usize,
}

impl Default for SampleHiveConfig {
    fn default() -> Self {
        Self { n: 50, sigma_lambda: 1.0, sigma_mu: 1.0, stride: 1 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TensionConfig {
    pub n: usize,
    pub sigma: f64,
    /// `"up"` or `"lo"`.
    pub side: String,
    /// `(index fraction, level fraction)`, moved to the nearest position
    /// where the largest window fits.
    pub position: [f64; 2],
    /// Tilts as coordinates in the lattice basis.
    pub tilts: Vec<[f64; 2]>,
    pub m_schedule: Vec<usize>,
    pub inset: f64,
}

impl Default for TensionConfig {
    fn default() -> Self {
        Self {
            n: 60,
            sigma: 1.0,
            side: "lo".into(),
            position: [0.5, 0.7],
            tilts: vec![[1.0, -1.0], [0.0, 1.0], [-1.0, 0.0], [0.5, 0.0], [0.0, 0.0]],
            m_schedule: vec![3, 5, 8],
            inset: 0.05,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolveConfig {
    pub n: usize,
    pub sigma_lambda: f64,
    pub sigma_mu: f64,
    pub vertex: [i64; 2],
    /// Mesh resolution of the maximization.
    pub mesh: i64,
    pub m: usize,
    /// Corridor radius over `m`; absent means `psi(m)`.
    pub eps: Option<f64>,
    pub table_trials: usize,
    pub quantiles: Vec<f64>,
    pub level_fracs: Vec<f64>,
    pub iterations: usize,
}

impl Default for SolveConfig {
    fn default() -> Self {
        Self {
            n: 100,
            sigma_lambda: 1.0,
            sigma_mu: 1.0,
            vertex: [25, 50],
            mesh: 12,
            m: 6,
            eps: Some(2.0 / 6.0),
            table_trials: 20,
            quantiles: vec![0.02, 0.15, 0.5, 0.85, 0.98],
            level_fracs: vec![0.3, 0.6, 0.9, 1.0],
            iterations: 300,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CzdConfig {
    /// `"sample"` for the bundled function, `"random"` for a random
    /// 1-Lipschitz field drawn from the seed.
    pub field: String,
    pub eps: f64,
    pub eta: f64,
    pub k: u32,
    pub c_sharp: f64,
}

impl Default for CzdConfig {
    fn default() -> Self {
        Self { field: "sample".into(), eps: 0.9, eta: 0.5, k: 6, c_sharp: hivelab::qdiff::C_SHARP }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CheckConfig {
    /// Largest `n` for the exhaustive checks.
    pub small_n: i64,
    /// Largest `n` for the rounding check.
    pub round_n: i64,
}

impl Default for CheckConfig {
    fn default() -> Self {
        Self { small_n: 4, round_n: 20 }
    }
}

/// Flags that override the file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub out: Option<String>,
    pub threads: Option<usize>,
    pub trials: Option<usize>,
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn load(path: Option<&Path>, ov: &Overrides) -> Result<Self, CliError> {
        let mut cfg = match path {
            Some(p) => {
                let text = std::fs::read_to_string(p)
                    .map_err(|e| CliError::Config(format!("cannot read {}: {e}", p.display())))?;
                Self::from_toml(&text)?
            }
            None => Self::default(),
        };
        if let Some(s) = ov.seed {
            cfg.seed = s;
        }
        if let Some(o) = &ov.out {
            cfg.out = o.clone();
        }
        if let Some(t) = ov.threads {
            cfg.threads = t;
        }
        if let Some(t) = ov.trials {
            cfg.trials = t;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let bad = |msg: String| Err(CliError::Config(msg));
        if self.trials < 2 {
            return bad(format!("trials must be at least 2, got {}", self.trials));
        }
        let s = &self.sample_hive;
        if s.n < 2 || s.stride == 0 || s.stride >= s.n {
            return bad(format!("sample_hive needs n >= 2 and 0 < stride < n, got n = {}, stride = {}", s.n, s.stride));
        }
        if !(s.sigma_lambda > 0.0 && s.sigma_mu > 0.0) {
            return bad("sample_hive variances must be positive".into());
        }
        let t = &self.tension;
        if t.side != "up" && t.side != "lo" {
            return bad(format!("tension.side must be \"up\" or \"lo\", got {:?}", t.side));
        }
        if t.m_schedule.is_empty() || t.tilts.is_empty() {
            return bad("tension needs a nonempty m_schedule and tilt list".into());
        }
        if !(0.0..1.0).contains(&t.inset) {
            return bad(format!("tension.inset must lie in [0, 1), got {}", t.inset));
        }
        let v = &self.solve;
        if v.mesh < 2 || v.iterations == 0 {
            return bad("solve needs mesh >= 2 and at least one iteration".into());
        }
        if v.vertex[0] <= 0 || v.vertex[1] <= 0 || v.vertex[0] >= v.n as i64 || v.vertex[1] >= v.n as i64 {
            return bad(format!("solve.vertex {:?} is not interior to size {}", v.vertex, v.n));
        }
        let c = &self.czd;
        if c.field != "sample" && c.field != "random" {
            return bad(format!("czd.field must be \"sample\" or \"random\", got {:?}", c.field));
        }
        if self.check.small_n < 2 || self.check.small_n > 5 || self.check.round_n < 2 {
            return bad("check needs 2 <= small_n <= 5 and round_n >= 2".into());
        }
        Ok(())
    }
}
