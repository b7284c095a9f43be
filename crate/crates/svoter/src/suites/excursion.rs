//! Excursion machinery of the walk among slow sites: closed-form incursion
//! laws against simulation, the N^{-1/alpha} excursion decay, and trace
//! consistency of the projected walk.

use std::collections::BTreeSet;

use crate::config::ExperimentConfig;
use crate::report::{fmt_f64, write_artifact, Csv, Metric, Report};
use crate::runner::run_replicas;
use crate::suites::{fixed_xi, GOF_SIGNIFICANCE, SIGMA_TOLERANCE};
use svoter_core::env::LimitEnvironment;
use svoter_core::limitwalk::{
    excursion_stats, incursion_laplace, incursion_mean_formula, simulate_walk, trace,
};
use svoter_core::stats::{chi_square_gof, ks_test, linear_fit, mean_and_stderr};

const LAPLACE_GRID: [f64; 3] = [0.5, 1.0, 2.0];
const INNER: usize = 8;
const DECAY_ENVS: u64 = 4;

pub fn run(cfg: &ExperimentConfig) -> Report {
    let mut builder = Report::new(cfg);
    let alpha = cfg.alpha.expect("resolved");
    let depth = cfg.depth.expect("resolved");
    let m = cfg.n.expect("resolved");
    let target = cfg.replicas.expect("resolved");
    let xi = fixed_xi(alpha, depth, cfg.master_seed, "excursion-xi");

    incursion_laws(cfg, &mut builder, &xi, m, target);
    excursion_decay(cfg, &mut builder, alpha, depth, target);
    trace_consistency(cfg, &mut builder, &xi, m, target);

    let report = builder.finish();
    let _ = write_artifact(cfg, "excursion_report.json", &report.to_json());
    report
}

/// Empirical incursion mean and Laplace transform against the closed
/// forms.
fn incursion_laws(
    cfg: &ExperimentConfig,
    builder: &mut crate::report::ReportBuilder,
    xi: &LimitEnvironment,
    m: usize,
    target: u64,
) {
    let a: BTreeSet<usize> = (0..INNER).collect();
    let mean_formula = incursion_mean_formula(xi, &a, m).expect("valid set");
    // excursions from A are incursions into the complement
    let comp_mass = xi.mass_of(m) - xi.mass_of(INNER);
    let excursion_mean = (m as f64 / INNER as f64) * comp_mass / (m as f64 - INNER as f64);
    let cycle = mean_formula + excursion_mean;
    let paths = 32u64;
    let horizon = 1.3 * cycle * target as f64 / paths as f64;

    let collected = run_replicas(
        cfg.master_seed,
        "incursion-path",
        paths,
        cfg.threads,
        |_r, mut rng| {
            let path = simulate_walk(xi, m, 0, horizon, &mut rng).expect("within caps");
            excursion_stats(&path, &a).completed_incursions().to_vec()
        },
    );
    let incursions: Vec<f64> = collected.into_iter().flatten().collect();
    assert!(
        incursions.len() as u64 >= target,
        "only {} incursions collected",
        incursions.len()
    );
    let mut csv = Csv::new(&["kind", "length"]);
    for i in &incursions {
        csv.row(&["I".to_string(), fmt_f64(*i)]);
    }
    let _ = write_artifact(cfg, "incursions.csv", &csv.into_string());
    // full decomposition of one representative path
    let mut rng = crate::seed::SeedDerivation::new(cfg.master_seed, "incursion-stats-path", 0).stream();
    let path = simulate_walk(xi, m, 0, horizon, &mut rng).expect("within caps");
    let _ = write_artifact(
        cfg,
        "excursion_path_stats.csv",
        &excursion_stats(&path, &a).to_csv(),
    );

    let (mean, se) = mean_and_stderr(&incursions);
    builder.push(Metric::within(
        "incursion_mean",
        mean,
        se,
        mean_formula,
        SIGMA_TOLERANCE * se,
    ));
    for lambda in LAPLACE_GRID {
        let formula = incursion_laplace(xi, &a, m, lambda).expect("valid lambda");
        let transformed: Vec<f64> = incursions.iter().map(|i| (-lambda * i).exp()).collect();
        let (emp, se) = mean_and_stderr(&transformed);
        builder.push(Metric::within(
            format!("incursion_laplace_lambda_{lambda}"),
            emp,
            se,
            formula,
            SIGMA_TOLERANCE * se,
        ));
    }
}

/// Fitted slope of log mean-excursion against log N.
fn excursion_decay(
    cfg: &ExperimentConfig,
    builder: &mut crate::report::ReportBuilder,
    alpha: f64,
    depth: usize,
    target: u64,
) {
    let sizes = cfg.m_list.clone().expect("resolved");
    let per_env = (target / DECAY_ENVS).max(500);
    let mut csv = Csv::new(&["n", "env", "mean_excursion", "stderr", "count"]);
    let mut log_n = Vec::new();
    let mut log_mean = Vec::new();
    for &size in &sizes {
        let mut env_means = Vec::new();
        for env_id in 0..DECAY_ENVS {
            let xi = fixed_xi(
                alpha,
                depth,
                cfg.master_seed,
                &format!("excursion-decay-xi-{env_id}"),
            );
            let a: BTreeSet<usize> = (0..size).collect();
            let inner_mass = xi.mass_of(size);
            let outer_mass = xi.mass_of(depth) - inner_mass;
            let mean_in =
                (depth as f64 / (depth as f64 - size as f64)) * inner_mass / size as f64;
            let mean_out = (depth as f64 / size as f64) * outer_mass / (depth as f64 - size as f64);
            let paths = 8u64;
            let horizon = 1.3 * (mean_in + mean_out) * per_env as f64 / paths as f64;
            let collected = run_replicas(
                cfg.master_seed,
                &format!("excursion-decay-{size}-{env_id}"),
                paths,
                cfg.threads,
                |_r, mut rng| {
                    let path = simulate_walk(&xi, depth, 0, horizon, &mut rng).expect("caps");
                    excursion_stats(&path, &a).completed_excursions().to_vec()
                },
            );
            let excursions: Vec<f64> = collected.into_iter().flatten().collect();
            assert!(excursions.len() as u64 > per_env / 2);
            let (mean, se) = mean_and_stderr(&excursions);
            csv.row(&[
                size.to_string(),
                env_id.to_string(),
                fmt_f64(mean),
                fmt_f64(se),
                excursions.len().to_string(),
            ]);
            env_means.push(mean);
        }
        let pooled = env_means.iter().sum::<f64>() / env_means.len() as f64;
        log_n.push((size as f64).ln());
        log_mean.push(pooled.ln());
    }
    let _ = write_artifact(cfg, "excursion_decay.csv", &csv.into_string());
    let (slope, _, slope_se) = linear_fit(&log_n, &log_mean);
    builder.push(
        Metric::within("excursion_decay_slope", slope, slope_se, -1.0 / alpha, 0.3),
    );
}

/// Trace of the [m]-walk on the 8 slowest sites: uniform jump chain and
/// exponential holdings at the stated significance.
fn trace_consistency(
    cfg: &ExperimentConfig,
    builder: &mut crate::report::ReportBuilder,
    xi: &LimitEnvironment,
    m: usize,
    target: u64,
) {
    let inner: BTreeSet<usize> = (0..INNER).collect();
    // traced jumps per unit time ~ INNER / xi([m]); size the horizon for
    // the target count across a fixed number of paths
    let rate = INNER as f64 / xi.mass_of(m);
    let paths = 32u64;
    let horizon = 1.3 * target as f64 / (rate * paths as f64);
    let collected = run_replicas(
        cfg.master_seed,
        "trace-path",
        paths,
        cfg.threads,
        |_r, mut rng| {
            let path = simulate_walk(xi, m, 0, horizon, &mut rng).expect("caps");
            let traced = trace(&path, &inner).expect("starts inside");
            let targets: Vec<usize> = traced.positions().to_vec();
            let holdings = traced.holdings();
            (targets, holdings)
        },
    );
    let mut counts = vec![0u64; INNER];
    let mut pit = Vec::new();
    let mut jumps = 0u64;
    for (targets, holdings) in collected {
        for t in targets {
            counts[t] += 1;
            jumps += 1;
        }
        for (site, d) in holdings {
            pit.push(1.0 - (-d / xi.xi_at(site)).exp());
        }
    }
    assert!(jumps >= target, "only {jumps} traced jumps");
    let gof = chi_square_gof(&counts, &[1.0 / INNER as f64; INNER]);
    builder.push(Metric::at_least(
        "trace_jump_chain_chi2_p",
        gof.p_value,
        GOF_SIGNIFICANCE,
    ));
    let ks = ks_test(&pit, |x| x.clamp(0.0, 1.0));
    builder.push(Metric::at_least(
        "trace_holding_ks_p",
        ks.p_value,
        GOF_SIGNIFICANCE,
    ));
}
