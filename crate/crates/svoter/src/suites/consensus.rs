//! Consensus probability against the exact weighted-mass formula, and the
//! consensus-time scale across a ladder of system sizes.

use crate::config::ExperimentConfig;
use crate::report::{fmt_f64, write_artifact, Csv, Metric, Report};
use crate::runner::run_replicas;
use crate::seed::SeedDerivation;
use crate::suites::{combined_se, moderated_environment, SIGMA_TOLERANCE};
use svoter_core::stats::{binomial_stderr, mean_and_stderr};
use svoter_core::voter::{consensus_probability_formula, simulate_to_consensus, OpinionState, VoterError};

const MAX_EVENTS: u64 = 1 << 62;
/// Consensus-time ladder: environments per size and replicas per
/// environment (cluster means capture quenched variation).
const TAU_ENVS: u64 = 8;
const TAU_REPLICAS_PER_ENV: u64 = 48;

pub fn run(cfg: &ExperimentConfig) -> Report {
    let mut builder = Report::new(cfg);
    let n = cfg.n.expect("resolved");
    let replicas = cfg.replicas.expect("resolved");
    let law = cfg.tail_law();

    // fixed-seed environment; eta_0 is the indicator of the heaviest site
    let (env, env_replica) = moderated_environment(&law, n, cfg.master_seed, "consensus-env");
    let eta0 = OpinionState::indicator(n, 0, env.weights());
    let formula = consensus_probability_formula(&env, &eta0);

    let results = run_replicas(
        cfg.master_seed,
        "consensus-replica",
        replicas,
        cfg.threads,
        |_replica, mut rng| match simulate_to_consensus(&env, &eta0, &mut rng, MAX_EVENTS) {
            Ok(res) => Some((res.outcome, res.tau, res.events_used)),
            Err(VoterError::NonAbsorbed { .. }) => None,
            Err(e) => panic!("consensus replica failed: {e}"),
        },
    );

    let mut csv = Csv::new(&["replica_id", "outcome", "tau", "events", "seed"]);
    let mut ones = 0u64;
    let mut failures = 0u64;
    for (i, row) in results.iter().enumerate() {
        let seed = SeedDerivation::new(cfg.master_seed, "consensus-replica", i as u64);
        match row {
            Some((outcome, tau, events)) => {
                ones += u64::from(*outcome);
                csv.row(&[
                    i.to_string(),
                    outcome.to_string(),
                    fmt_f64(*tau),
                    events.to_string(),
                    seed.provenance(),
                ]);
            }
            None => failures += 1,
        }
    }
    let _ = write_artifact(cfg, "consensus_replicas.csv", &csv.into_string());
    assert!(
        failures * 1000 <= replicas,
        "non-absorbed fraction exceeded 0.1%"
    );

    let successes = replicas - failures;
    let estimate = ones as f64 / successes as f64;
    let stderr = binomial_stderr(estimate, successes);
    let z = if stderr > 0.0 {
        (estimate - formula) / stderr
    } else {
        0.0
    };
    let summary = serde_json::json!({
        "estimate": estimate,
        "stderr": stderr,
        "formula_value": formula,
        "z_score": z,
        "n": n,
        "alpha": cfg.alpha,
        "seed_provenance": SeedDerivation::new(cfg.master_seed, "consensus-env", env_replica)
            .provenance(),
    });
    let _ = write_artifact(
        cfg,
        "consensus_summary.json",
        &serde_json::to_string_pretty(&summary).expect("serializes"),
    );

    builder.push(
        Metric::within(
            "consensus_probability",
            estimate,
            stderr,
            formula,
            SIGMA_TOLERANCE * stderr,
        ),
    );
    builder.push(Metric::exactly("non_absorbed", failures as f64, 0.0).as_diagnostic());
    builder.push(
        Metric::within("z_score", z, 1.0, 0.0, SIGMA_TOLERANCE).as_diagnostic(),
    );

    // consensus-time scale over the size ladder, when configured
    let mut tau_rows = Csv::new(&["n", "env_id", "env_seed", "mean_tau_over_a_n", "stderr"]);
    if let Some(ladder) = &cfg.m_list {
        let mut cluster_stats: Vec<(usize, f64, f64)> = Vec::new();
        for &size in ladder {
            let mut env_means = Vec::new();
            for env_id in 0..TAU_ENVS {
                let label = format!("consensus-tau-env-{size}-{env_id}");
                let (tau_env, used) = moderated_environment(&law, size, cfg.master_seed, &label);
                // balanced alternating initial opinions stress the
                // consensus time more than a single dissenter
                let bits: Vec<bool> = (0..size).map(|i| i % 2 == 0).collect();
                let eta = OpinionState::from_bits(bits, tau_env.weights());
                let taus = run_replicas(
                    cfg.master_seed,
                    &format!("consensus-tau-{size}-{env_id}"),
                    TAU_REPLICAS_PER_ENV,
                    cfg.threads,
                    |_r, mut rng| {
                        simulate_to_consensus(&tau_env, &eta, &mut rng, MAX_EVENTS)
                            .expect("absorbs")
                            .tau
                            / tau_env.a_n()
                    },
                );
                let (mean, se) = mean_and_stderr(&taus);
                tau_rows.row(&[
                    size.to_string(),
                    env_id.to_string(),
                    used.to_string(),
                    fmt_f64(mean),
                    fmt_f64(se),
                ]);
                env_means.push(mean);
            }
            let (mean, se) = mean_and_stderr(&env_means);
            cluster_stats.push((size, mean, se));
        }
        for pair in cluster_stats.windows(2) {
            let (n0, m0, s0) = pair[0];
            let (n1, m1, s1) = pair[1];
            let comb = combined_se(s0, s1);
            // no upward trend beyond 4 combined standard errors
            builder.push(
                Metric::at_most(
                    format!("tau_scale_increase_{n0}_to_{n1}"),
                    m1 - m0,
                    0.0,
                    SIGMA_TOLERANCE * comb,
                )
                .with_stderr(comb),
            );
        }
        let _ = write_artifact(cfg, "consensus_tau_scale.csv", &tau_rows.into_string());
    }

    builder.push(Metric::exactly(
        "env_replica_used",
        env_replica as f64,
        env_replica as f64,
    ));
    let report = builder.finish();
    let _ = write_artifact(cfg, "consensus_report.json", &report.to_json());
    report
}
