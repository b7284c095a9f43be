//! The weighted fraction of 1-opinions is a martingale: its replica mean
//! at a fixed time equals its initial value.

use crate::config::ExperimentConfig;
use crate::report::{fmt_f64, write_artifact, Csv, Metric, Report};
use crate::runner::run_replicas;
use crate::suites::{moderated_environment, SIGMA_TOLERANCE};
use svoter_core::stats::mean_and_stderr;
use svoter_core::voter::{simulate_to_time, weighted_fraction, OpinionState};

pub fn run(cfg: &ExperimentConfig) -> Report {
    let mut builder = Report::new(cfg);
    let n = cfg.n.expect("resolved");
    let replicas = cfg.replicas.expect("resolved");
    let law = cfg.tail_law();

    // same fixed-seed environment and initial state as the consensus suite
    let (env, _) = moderated_environment(&law, n, cfg.master_seed, "consensus-env");
    let eta0 = OpinionState::indicator(n, 0, env.weights());
    let initial = weighted_fraction(&eta0, &env);
    let t = env.a_n() / 4.0;

    let fractions = run_replicas(
        cfg.master_seed,
        "martingale-replica",
        replicas,
        cfg.threads,
        |_r, mut rng| {
            let eta_t = simulate_to_time(&env, &eta0, t, &mut rng).expect("dims match");
            weighted_fraction(&eta_t, &env)
        },
    );
    let (mean, se) = mean_and_stderr(&fractions);

    let mut csv = Csv::new(&["replica_id", "weighted_fraction"]);
    for (i, w) in fractions.iter().enumerate() {
        csv.row(&[i.to_string(), fmt_f64(*w)]);
    }
    let _ = write_artifact(cfg, "martingale_replicas.csv", &csv.into_string());

    builder.push(Metric::within(
        "weighted_fraction_mean",
        mean,
        se,
        initial,
        SIGMA_TOLERANCE * se,
    ));
    let report = builder.finish();
    let _ = write_artifact(cfg, "martingale_report.json", &report.to_json());
    report
}
