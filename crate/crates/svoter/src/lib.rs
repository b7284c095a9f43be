//! Experiment harness for the stubborn voter model toolkit: configuration,
//! deterministic seed derivation, parallel replica execution, statistical
//! post-processing and machine-readable reports.

pub mod config;
pub mod report;
pub mod runner;
pub mod seed;
pub mod suites;

pub use config::{ConfigError, ExperimentConfig, Suite};
pub use report::{Metric, Report};
pub use seed::SeedDerivation;

/// Run the suite named by the config and produce its report.
pub fn run_suite(config: &ExperimentConfig) -> Result<Report, config::ConfigError> {
    let cfg = config.clone().resolved();
    cfg.validate()?;
    Ok(match cfg.suite {
        Suite::Duality => suites::duality::run(&cfg),
        Suite::Consensus => suites::consensus::run(&cfg),
        Suite::Martingale => suites::martingale::run(&cfg),
        Suite::Stationary => suites::stationary::run(&cfg),
        Suite::Excursion => suites::excursion::run(&cfg),
        Suite::Entrance => suites::entrance::run(&cfg),
        Suite::Coupling => suites::coupling::run(&cfg),
        Suite::CoalescenceScaling => suites::coalescence::run(&cfg),
        Suite::ComingDown => suites::comingdown::run(&cfg),
        Suite::Extremes => suites::extremes::run(&cfg),
        Suite::LineageConvergence => suites::lineage::run(&cfg),
    })
}
