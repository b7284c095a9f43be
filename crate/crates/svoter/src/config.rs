//! Experiment configuration: suite selection, parameters, validation.
//!
//! A config file provides any subset of the fields; `resolved()` fills
//! the rest with the suite's defaults (the desk-scale acceptance
//! parameters), and `validate()` reports every problem at once.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use svoter_core::env::{TailFamily, TailLaw};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("invalid configuration:\n{}", .0.join("\n"))]
    Invalid(Vec<String>),
    #[error("unknown suite '{0}'")]
    UnknownSuite(String),
    #[error("cannot read config {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("cannot parse config {path}: {source}")]
    Parse {
        path: PathBuf,
        source: serde_json::Error,
    },
}

/// The experiment suites exposed by the CLI.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Suite {
    Duality,
    Consensus,
    Martingale,
    Stationary,
    Excursion,
    Entrance,
    Coupling,
    CoalescenceScaling,
    ComingDown,
    Extremes,
    LineageConvergence,
}

impl Suite {
    pub const ALL: [Suite; 11] = [
        Suite::Duality,
        Suite::Consensus,
        Suite::Martingale,
        Suite::Stationary,
        Suite::Excursion,
        Suite::Entrance,
        Suite::Coupling,
        Suite::CoalescenceScaling,
        Suite::ComingDown,
        Suite::Extremes,
        Suite::LineageConvergence,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Suite::Duality => "duality",
            Suite::Consensus => "consensus",
            Suite::Martingale => "martingale",
            Suite::Stationary => "stationary",
            Suite::Excursion => "excursion",
            Suite::Entrance => "entrance",
            Suite::Coupling => "coupling",
            Suite::CoalescenceScaling => "coalescence-scaling",
            Suite::ComingDown => "coming-down",
            Suite::Extremes => "extremes",
            Suite::LineageConvergence => "lineage-convergence",
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = ConfigError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Suite::ALL
            .iter()
            .find(|suite| suite.name() == s)
            .copied()
            .ok_or_else(|| ConfigError::UnknownSuite(s.to_string()))
    }
}

fn default_master_seed() -> u64 {
    0x5EED
}

/// One experiment's parameters. Optional fields default per suite.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    #[serde(default = "default_suite")]
    pub suite: Suite,
    #[serde(default)]
    pub alpha: Option<f64>,
    /// "pareto_exact" or "pareto_log_perturbed".
    #[serde(default)]
    pub family: Option<String>,
    #[serde(default)]
    pub beta: Option<f64>,
    /// Finite model size (sites).
    #[serde(default)]
    pub n: Option<usize>,
    /// Truncation depth of the limit environment.
    #[serde(default)]
    pub depth: Option<usize>,
    /// Suite-specific list: coalescence M values, the consensus-time or
    /// lineage N ladder, excursion N values.
    #[serde(default)]
    pub m_list: Option<Vec<usize>>,
    /// Suite-specific time grid.
    #[serde(default)]
    pub t_grid: Option<Vec<f64>>,
    #[serde(default)]
    pub replicas: Option<u64>,
    #[serde(default = "default_master_seed")]
    pub master_seed: u64,
    #[serde(default)]
    pub out_dir: Option<PathBuf>,
    #[serde(default)]
    pub threads: Option<usize>,
}

fn default_suite() -> Suite {
    Suite::Duality
}

impl ExperimentConfig {
    pub fn new(suite: Suite) -> Self {
        ExperimentConfig {
            suite,
            alpha: None,
            family: None,
            beta: None,
            n: None,
            depth: None,
            m_list: None,
            t_grid: None,
            replicas: None,
            master_seed: default_master_seed(),
            out_dir: None,
            threads: None,
        }
    }

    pub fn load(path: &PathBuf, suite: Suite) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.clone(),
            source,
        })?;
        let mut cfg: ExperimentConfig =
            serde_json::from_str(&text).map_err(|source| ConfigError::Parse {
                path: path.clone(),
                source,
            })?;
        cfg.suite = suite;
        Ok(cfg)
    }

    /// Fill unset fields with the suite's desk-scale defaults.
    pub fn resolved(mut self) -> Self {
        let d = SuiteDefaults::for_suite(self.suite);
        self.alpha.get_or_insert(d.alpha);
        self.family.get_or_insert_with(|| d.family.to_string());
        if self.family.as_deref() == Some("pareto_log_perturbed") {
            self.beta.get_or_insert(d.beta);
        }
        if let Some(n) = d.n {
            self.n.get_or_insert(n);
        }
        if let Some(depth) = d.depth {
            self.depth.get_or_insert(depth);
        }
        if let Some(list) = d.m_list {
            self.m_list.get_or_insert_with(|| list.to_vec());
        }
        if let Some(grid) = d.t_grid {
            self.t_grid.get_or_insert_with(|| grid.to_vec());
        }
        self.replicas.get_or_insert(d.replicas);
        self
    }

    /// Check every requirement, reporting all violations together.
    pub fn validate(&self) -> Result<(), ConfigError> {
        let mut errors = Vec::new();
        match self.alpha {
            Some(a) if a > 0.0 && a < 1.0 => {}
            Some(a) => errors.push(format!("alpha must lie in (0,1), got {a}")),
            None => errors.push("alpha is required".into()),
        }
        match self.family.as_deref() {
            Some("pareto_exact") => {}
            Some("pareto_log_perturbed") => {
                match (self.beta, self.alpha) {
                    (None, _) => errors.push("beta is required for pareto_log_perturbed".into()),
                    (Some(b), Some(a)) if b > 3.0 * a => errors.push(format!(
                        "beta = {b} too large for alpha = {a} (survival not monotone)"
                    )),
                    _ => {}
                }
            }
            Some(other) => errors.push(format!(
                "unknown family '{other}' (expected pareto_exact or pareto_log_perturbed)"
            )),
            None => errors.push("family is required".into()),
        }
        if self.replicas == Some(0) {
            errors.push("replicas must be positive".into());
        }
        if self.replicas.is_none() {
            errors.push("replicas is required".into());
        }
        if let Some(n) = self.n {
            if n == 0 {
                errors.push("n must be positive".into());
            }
        }
        if let Some(depth) = self.depth {
            if depth == 0 {
                errors.push("depth must be positive".into());
            }
        }
        if let Some(list) = &self.m_list {
            if list.is_empty() {
                errors.push("m_list must be non-empty".into());
            }
            if list.contains(&0) {
                errors.push("m_list entries must be positive".into());
            }
            if list.windows(2).any(|w| w[0] >= w[1]) {
                errors.push("m_list must be strictly increasing".into());
            }
        }
        if let Some(grid) = &self.t_grid {
            if grid.is_empty() {
                errors.push("t_grid must be non-empty".into());
            }
            if grid.iter().any(|t| !(*t > 0.0)) {
                errors.push("t_grid entries must be positive".into());
            }
        }
        // suite-specific presence (after resolution these are filled)
        let need = |field: &Option<bool>| field.is_none();
        let _ = need;
        match self.suite {
            Suite::Duality | Suite::Consensus | Suite::Martingale => {
                if self.n.is_none() {
                    errors.push(format!("suite {} requires n", self.suite));
                }
            }
            Suite::Stationary
            | Suite::Excursion
            | Suite::Entrance
            | Suite::Coupling
            | Suite::CoalescenceScaling
            | Suite::ComingDown => {
                if self.depth.is_none() {
                    errors.push(format!("suite {} requires depth", self.suite));
                }
            }
            Suite::Extremes => {
                if self.n.is_none() {
                    errors.push("suite extremes requires n (sample size per replica)".into());
                }
            }
            Suite::LineageConvergence => {
                if self.m_list.is_none() {
                    errors.push("suite lineage-convergence requires m_list (the N ladder)".into());
                }
                if self.depth.is_none() {
                    errors.push("suite lineage-convergence requires depth".into());
                }
            }
        }
        if errors.is_empty() {
            Ok(())
        } else {
            Err(ConfigError::Invalid(errors))
        }
    }

    /// The tail law described by (alpha, family, beta).
    pub fn tail_law(&self) -> TailLaw {
        let alpha = self.alpha.expect("config resolved");
        match self.family.as_deref() {
            Some("pareto_log_perturbed") => {
                TailLaw::pareto_log_perturbed(alpha, self.beta.expect("config resolved"))
                    .expect("validated law")
            }
            _ => TailLaw::pareto(alpha).expect("validated law"),
        }
    }

    pub fn family_enum(&self) -> TailFamily {
        self.tail_law().family()
    }
}

struct SuiteDefaults {
    alpha: f64,
    family: &'static str,
    beta: f64,
    n: Option<usize>,
    depth: Option<usize>,
    m_list: Option<&'static [usize]>,
    t_grid: Option<&'static [f64]>,
    replicas: u64,
}

impl SuiteDefaults {
    fn for_suite(suite: Suite) -> Self {
        let base = SuiteDefaults {
            alpha: 0.5,
            family: "pareto_exact",
            beta: 1.0,
            n: None,
            depth: None,
            m_list: None,
            t_grid: None,
            replicas: 10_000,
        };
        match suite {
            Suite::Duality => SuiteDefaults {
                n: Some(16),
                replicas: 1_000,
                ..base
            },
            // the consensus-time ladder (m_list) is opt-in; the default
            // run checks the probability formula only
            Suite::Consensus => SuiteDefaults {
                n: Some(32),
                replicas: 100_000,
                ..base
            },
            Suite::Martingale => SuiteDefaults {
                n: Some(32),
                replicas: 100_000,
                ..base
            },
            Suite::Stationary => SuiteDefaults {
                n: Some(16),
                depth: Some(64),
                replicas: 64,
                ..base
            },
            Suite::Excursion => SuiteDefaults {
                n: Some(64),
                depth: Some(512),
                m_list: Some(&[8, 16, 32, 64]),
                replicas: 10_000,
                ..base
            },
            Suite::Entrance => SuiteDefaults {
                depth: Some(512),
                t_grid: Some(&[0.5, 1.0]),
                replicas: 100_000,
                ..base
            },
            Suite::Coupling => SuiteDefaults {
                n: Some(12),
                depth: Some(64),
                replicas: 100_000,
                ..base
            },
            Suite::CoalescenceScaling => SuiteDefaults {
                depth: Some(512),
                m_list: Some(&[4, 8, 16, 32, 64]),
                replicas: 10_000,
                ..base
            },
            Suite::ComingDown => SuiteDefaults {
                depth: Some(512),
                n: Some(16),
                replicas: 10_000,
                ..base
            },
            Suite::Extremes => SuiteDefaults {
                // sample size per replica; the perturbed family uses a
                // mild beta so N = 1e5 sits inside the asymptotic regime
                n: Some(100_000),
                beta: 0.25,
                replicas: 10_000,
                ..base
            },
            Suite::LineageConvergence => SuiteDefaults {
                m_list: Some(&[100, 1_000, 10_000]),
                depth: Some(512),
                t_grid: Some(&[0.5]),
                n: Some(8),
                replicas: 20_000,
                ..base
            },
        }
    }
}
