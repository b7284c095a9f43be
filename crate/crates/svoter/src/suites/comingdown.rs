//! Coming down from infinity: saturation of the full-occupancy absorption
//! time across truncations, plus the lower-bound jump-count walk: its
//! stochastic domination of the true jump count and the explicit
//! Chernoff-style tail bound.

use std::collections::BTreeSet;

use crate::config::ExperimentConfig;
use crate::report::{fmt_f64, write_artifact, Csv, Metric, Report};
use crate::runner::run_replicas;
use crate::suites::{combined_se, fixed_xi, SIGMA_TOLERANCE};
use svoter_core::dual::{
    chernoff_jump_bound, coalescence_time_sample, jump_count_threshold, jumps_if_no_coalescence,
    lower_bound_jump_process, tau_infinity_to_one, XiPrefix,
};
use svoter_core::stats::{binomial_stderr, ecdf_at, mean_and_stderr};

const TRUNCATIONS: [usize; 2] = [256, 512];
const CHERNOFF_GRID: usize = 20;
const CDF_GRID: usize = 20;

pub fn run(cfg: &ExperimentConfig) -> Report {
    let mut builder = Report::new(cfg);
    let alpha = cfg.alpha.expect("resolved");
    let depth = cfg.depth.expect("resolved");
    let replicas = cfg.replicas.expect("resolved");
    let m = cfg.n.expect("resolved");
    let xi = fixed_xi(alpha, depth, cfg.master_seed, "comingdown-xi");

    // saturation: tau_{full -> 1} means at successive truncations agree
    let mut means = Vec::new();
    let mut csv = Csv::new(&["replica_id", "n_trunc", "tau_full_to_one"]);
    for &n_trunc in &TRUNCATIONS {
        let taus = run_replicas(
            cfg.master_seed,
            &format!("comingdown-tau-{n_trunc}"),
            replicas,
            cfg.threads,
            |_r, mut rng| tau_infinity_to_one(&xi, n_trunc, &mut rng).expect("valid truncation"),
        );
        for (i, tau) in taus.iter().enumerate() {
            csv.row(&[i.to_string(), n_trunc.to_string(), fmt_f64(*tau)]);
        }
        means.push(mean_and_stderr(&taus));
    }
    let _ = write_artifact(cfg, "comingdown_tau.csv", &csv.into_string());
    let (mean_a, se_a) = means[0];
    let (mean_b, se_b) = means[1];
    builder.push(Metric::within(
        "tau_full_saturation",
        mean_b,
        se_b,
        mean_a,
        SIGMA_TOLERANCE * combined_se(se_a, se_b),
    ));

    lower_bound_walk(cfg, &mut builder, &xi, m, replicas);

    let report = builder.finish();
    let _ = write_artifact(cfg, "comingdown_report.json", &report.to_json());
    report
}

fn lower_bound_walk(
    cfg: &ExperimentConfig,
    builder: &mut crate::report::ReportBuilder,
    xi: &svoter_core::env::LimitEnvironment,
    m: usize,
    replicas: u64,
) {
    let n_trunc = 8 * m;
    // conditioning time from a pilot estimate of E tau_{M+1 -> M}
    let pilot = run_replicas(
        cfg.master_seed,
        "comingdown-pilot",
        2000,
        cfg.threads,
        |_r, mut rng| {
            coalescence_time_sample(xi, n_trunc, m, &mut rng)
                .expect("valid truncation")
                .tau
        },
    );
    let (t_star, _) = mean_and_stderr(&pilot);

    // Chernoff grid sized so the bound spans [e^{-4}, e^{-0.2}]
    let xi_m1 = xi.xi_at(m);
    let chernoff_ts: Vec<f64> = (1..=CHERNOFF_GRID).map(|j| 0.8 * xi_m1 * j as f64).collect();
    let horizon = t_star.max(chernoff_ts[CHERNOFF_GRID - 1]);

    // the lower-bound walk J'
    let jprime_paths = run_replicas(
        cfg.master_seed,
        "comingdown-jprime",
        replicas,
        cfg.threads,
        |_r, mut rng| lower_bound_jump_process(xi, n_trunc, m, horizon, &mut rng).expect("valid"),
    );
    // the true system jump count, rejecting runs that coalesce before t*
    let init: BTreeSet<usize> = (0..=m).collect();
    let land = XiPrefix::new(xi, n_trunc);
    let accepted: Vec<u64> = run_replicas(
        cfg.master_seed,
        "comingdown-system",
        replicas,
        cfg.threads,
        |_r, mut rng| jumps_if_no_coalescence(&land, &init, t_star, &mut rng).expect("valid"),
    )
    .into_iter()
    .flatten()
    .collect();
    assert!(
        accepted.len() as u64 > replicas / 10,
        "rejection rate too high: {} of {replicas} accepted",
        accepted.len()
    );

    let jprime_at_tstar: Vec<f64> = jprime_paths
        .iter()
        .map(|p| p.count_at(t_star) as f64)
        .collect();
    let mut j_sorted: Vec<f64> = accepted.iter().map(|j| *j as f64).collect();
    j_sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mut jp_sorted = jprime_at_tstar.clone();
    jp_sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());

    // CDF domination: F_{J'} >= F_J at a quantile grid of the pooled data
    let mut worst_margin = f64::INFINITY;
    let mut csv = Csv::new(&["k", "cdf_jprime", "cdf_j", "slack"]);
    for q in 1..=CDF_GRID {
        let idx = (q * (j_sorted.len() - 1)) / (CDF_GRID + 1);
        let k = j_sorted[idx];
        let f_jp = ecdf_at(&jp_sorted, k);
        let f_j = ecdf_at(&j_sorted, k);
        let se = combined_se(
            binomial_stderr(f_jp.clamp(1e-9, 1.0 - 1e-9), jp_sorted.len() as u64),
            binomial_stderr(f_j.clamp(1e-9, 1.0 - 1e-9), j_sorted.len() as u64),
        );
        let margin = f_jp - f_j + SIGMA_TOLERANCE * se;
        worst_margin = worst_margin.min(margin);
        csv.row(&[fmt_f64(k), fmt_f64(f_jp), fmt_f64(f_j), fmt_f64(margin)]);
    }
    let _ = write_artifact(cfg, "comingdown_domination.csv", &csv.into_string());
    builder.push(Metric::at_least(
        "jprime_cdf_domination_worst_margin",
        worst_margin,
        0.0,
    ));

    // explicit tail bound on P(J'_t < threshold(t))
    let mut worst = f64::NEG_INFINITY;
    let mut csv = Csv::new(&["t", "threshold", "empirical", "bound"]);
    for &t in &chernoff_ts {
        let threshold = jump_count_threshold(xi, n_trunc, m, t);
        let bound = chernoff_jump_bound(xi, n_trunc, m, t);
        let hits = jprime_paths
            .iter()
            .filter(|p| (p.count_at(t) as f64) < threshold)
            .count();
        let p_hat = hits as f64 / replicas as f64;
        let se = binomial_stderr(p_hat.clamp(1e-9, 1.0 - 1e-9), replicas);
        worst = worst.max(p_hat - bound - SIGMA_TOLERANCE * se);
        csv.row(&[fmt_f64(t), fmt_f64(threshold), fmt_f64(p_hat), fmt_f64(bound)]);
    }
    let _ = write_artifact(cfg, "comingdown_chernoff.csv", &csv.into_string());
    builder.push(Metric::at_most(
        "chernoff_bound_worst_excess",
        worst,
        0.0,
        0.0,
    ));
}
