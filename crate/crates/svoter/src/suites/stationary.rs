//! Ergodic occupation fractions of the limit walk against the ranked
//! stationary law xi_x / xi([n]).

use crate::config::ExperimentConfig;
use crate::report::{fmt_f64, write_artifact, Csv, Metric, Report};
use crate::runner::run_replicas;
use crate::suites::{fixed_xi, SIGMA_TOLERANCE};
use svoter_core::limitwalk::{simulate_walk, stationary_distribution};
use svoter_core::stats::mean_and_stderr;

pub fn run(cfg: &ExperimentConfig) -> Report {
    let mut builder = Report::new(cfg);
    let depth = cfg.depth.expect("resolved");
    let n = cfg.n.expect("resolved").min(depth);
    let batches = cfg.replicas.expect("resolved");
    let xi = fixed_xi(cfg.alpha.expect("resolved"), depth, cfg.master_seed, "stationary-xi");
    let mu = stationary_distribution(&xi, n).expect("n within depth");

    // batch-means: independent paths, each long relative to the slowest
    // holding time
    let horizon = 2_000.0 * xi.xi_at(0) / n as f64;
    let occupancy_by_batch = run_replicas(
        cfg.master_seed,
        "stationary-batch",
        batches,
        cfg.threads,
        |_r, mut rng| {
            let path = simulate_walk(&xi, n, 0, horizon, &mut rng).expect("within caps");
            let mut inside = vec![0.0f64; n];
            let mut prev_t = 0.0;
            let mut prev_p = path.start();
            for (t, p) in path.jump_times().iter().zip(path.positions()) {
                inside[prev_p] += t - prev_t;
                prev_t = *t;
                prev_p = *p;
            }
            inside[prev_p] += path.horizon() - prev_t;
            inside.iter_mut().for_each(|x| *x /= path.horizon());
            inside
        },
    );

    let mut csv = Csv::new(&["site", "occupancy", "mu", "stderr"]);
    let probe_sites = [0, n / 4, n - 1];
    for site in 0..n {
        let fracs: Vec<f64> = occupancy_by_batch.iter().map(|b| b[site]).collect();
        let (mean, se) = mean_and_stderr(&fracs);
        csv.row(&[site.to_string(), fmt_f64(mean), fmt_f64(mu[site]), fmt_f64(se)]);
        if probe_sites.contains(&site) {
            builder.push(Metric::within(
                format!("occupancy_site_{site}"),
                mean,
                se,
                mu[site],
                SIGMA_TOLERANCE * se,
            ));
        }
    }
    let _ = write_artifact(cfg, "stationary_occupancy.csv", &csv.into_string());

    let report = builder.finish();
    let _ = write_artifact(cfg, "stationary_report.json", &report.to_json());
    report
}
