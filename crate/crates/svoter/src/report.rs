//! Run reports: every metric carries either a standard error or an
//! exactness flag, plus the target and tolerance its pass/fail verdict
//! was computed from, so reports are auditable and re-runnable.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::config::ExperimentConfig;

/// How `value` was compared against `target`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Comparison {
    /// |value - target| <= tolerance
    AbsDiffWithin,
    /// value >= target
    AtLeast,
    /// value <= target (+ tolerance when present)
    AtMost,
    /// value == target exactly
    Exact,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metric {
    pub name: String,
    pub value: f64,
    /// Standard error when the value is a Monte Carlo estimate.
    pub stderr: Option<f64>,
    /// Set when the value is exact (no sampling error).
    pub exact: bool,
    pub target: Option<f64>,
    pub tolerance: Option<f64>,
    pub comparison: Comparison,
    /// Diagnostics are reported but do not gate the run.
    pub diagnostic: bool,
    pub pass: bool,
}

impl Metric {
    /// |value - target| <= tolerance, with a Monte Carlo stderr attached.
    pub fn within(
        name: impl Into<String>,
        value: f64,
        stderr: f64,
        target: f64,
        tolerance: f64,
    ) -> Self {
        Metric {
            name: name.into(),
            value,
            stderr: Some(stderr),
            exact: false,
            target: Some(target),
            tolerance: Some(tolerance),
            comparison: Comparison::AbsDiffWithin,
            diagnostic: false,
            pass: (value - target).abs() <= tolerance,
        }
    }

    /// value >= target, exact computation.
    pub fn at_least(name: impl Into<String>, value: f64, target: f64) -> Self {
        Metric {
            name: name.into(),
            value,
            stderr: None,
            exact: true,
            target: Some(target),
            tolerance: None,
            comparison: Comparison::AtLeast,
            diagnostic: false,
            pass: value >= target,
        }
    }

    /// value <= target + tolerance.
    pub fn at_most(name: impl Into<String>, value: f64, target: f64, tolerance: f64) -> Self {
        Metric {
            name: name.into(),
            value,
            stderr: None,
            exact: true,
            target: Some(target),
            tolerance: Some(tolerance),
            comparison: Comparison::AtMost,
            diagnostic: false,
            pass: value <= target + tolerance,
        }
    }

    /// value == target exactly (counters, mismatch counts).
    pub fn exactly(name: impl Into<String>, value: f64, target: f64) -> Self {
        Metric {
            name: name.into(),
            value,
            stderr: None,
            exact: true,
            target: Some(target),
            tolerance: Some(0.0),
            comparison: Comparison::Exact,
            diagnostic: false,
            pass: value == target,
        }
    }

    /// Attach a Monte Carlo stderr to a comparison metric.
    pub fn with_stderr(mut self, stderr: f64) -> Self {
        self.stderr = Some(stderr);
        self.exact = false;
        self
    }

    /// Downgrade to a non-gating diagnostic.
    pub fn as_diagnostic(mut self) -> Self {
        self.diagnostic = true;
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub suite: String,
    pub config: ExperimentConfig,
    pub metrics: Vec<Metric>,
    pub pass: bool,
    pub wall_clock_secs: f64,
    pub version: String,
}

impl Report {
    pub fn new(config: &ExperimentConfig) -> ReportBuilder {
        ReportBuilder {
            config: config.clone(),
            metrics: Vec::new(),
            started: std::time::Instant::now(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn write_json(&self, path: &Path) -> std::io::Result<()> {
        std::fs::write(path, self.to_json())
    }

    /// One human-readable line per metric.
    pub fn summary_lines(&self) -> Vec<String> {
        self.metrics
            .iter()
            .map(|m| {
                let verdict = if m.pass { "pass" } else { "FAIL" };
                let kind = if m.diagnostic { " (diagnostic)" } else { "" };
                let err = match m.stderr {
                    Some(se) => format!(" +- {se:.3e}"),
                    None => " (exact)".to_string(),
                };
                format!("[{verdict}]{kind} {}: {:.6e}{err}", m.name, m.value)
            })
            .collect()
    }
}

pub struct ReportBuilder {
    config: ExperimentConfig,
    metrics: Vec<Metric>,
    started: std::time::Instant,
}

impl ReportBuilder {
    pub fn push(&mut self, metric: Metric) {
        self.metrics.push(metric);
    }

    pub fn finish(self) -> Report {
        let pass = self.metrics.iter().all(|m| m.pass || m.diagnostic);
        Report {
            suite: self.config.suite.name().to_string(),
            pass,
            config: self.config,
            metrics: self.metrics,
            wall_clock_secs: self.started.elapsed().as_secs_f64(),
            version: env!("CARGO_PKG_VERSION").to_string(),
        }
    }
}

/// 17-significant-digit decimal for CSV doubles.
pub fn fmt_f64(v: f64) -> String {
    format!("{:.16e}", v)
}

/// RFC 4180-style CSV: LF line endings, UTF-8, no quoting needed for the
/// numeric payloads written here.
pub struct Csv {
    buf: String,
}

impl Csv {
    pub fn new(header: &[&str]) -> Self {
        let mut buf = String::new();
        buf.push_str(&header.join(","));
        buf.push('\n');
        Csv { buf }
    }

    pub fn row(&mut self, fields: &[String]) {
        self.buf.push_str(&fields.join(","));
        self.buf.push('\n');
    }

    pub fn into_string(self) -> String {
        self.buf
    }
}

/// Write a suite artifact under the configured output directory; no-op
/// when the config has no out_dir.
pub fn write_artifact(
    config: &ExperimentConfig,
    filename: &str,
    content: &str,
) -> std::io::Result<()> {
    if let Some(dir) = &config.out_dir {
        std::fs::create_dir_all(dir)?;
        std::fs::write(dir.join(filename), content)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::{ExperimentConfig, Suite};

    #[test]
    fn metric_pass_is_consistent_with_comparison() {
        let m = Metric::within("x", 1.05, 0.02, 1.0, 0.08);
        assert!(m.pass);
        let m = Metric::within("x", 1.2, 0.02, 1.0, 0.08);
        assert!(!m.pass);
        let m = Metric::at_least("gap", 2.0, 1.0);
        assert!(m.pass && m.exact);
        let m = Metric::at_most("tv", 0.5, 0.4, 0.01);
        assert!(!m.pass);
        let m = Metric::exactly("mismatches", 0.0, 0.0);
        assert!(m.pass);
    }

    #[test]
    fn report_round_trips_through_json() {
        let cfg = ExperimentConfig::new(Suite::Duality).resolved();
        let mut builder = Report::new(&cfg);
        builder.push(Metric::exactly("mismatches", 0.0, 0.0));
        builder.push(Metric::within("p", 0.5, 0.01, 0.5, 0.04).as_diagnostic());
        let report = builder.finish();
        assert!(report.pass);
        let back: Report = serde_json::from_str(&report.to_json()).unwrap();
        assert_eq!(report.metrics, back.metrics);
    }

    #[test]
    fn csv_uses_lf_and_17_digits() {
        let mut csv = Csv::new(&["a", "b"]);
        csv.row(&[fmt_f64(1.0 / 3.0), "2".to_string()]);
        let text = csv.into_string();
        assert_eq!(text, "a,b\n3.3333333333333331e-1,2\n");
    }
}
