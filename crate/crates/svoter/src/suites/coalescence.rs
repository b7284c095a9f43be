//! First-coalescence time scaling: E[tau_{M+1 -> M}] ~ M^{-1/alpha},
//! checked by a log-log slope over the particle ladder and by ratio
//! stability across truncation sizes.

use crate::config::ExperimentConfig;
use crate::report::{fmt_f64, write_artifact, Csv, Metric, Report};
use crate::runner::run_replicas;
use crate::seed::SeedDerivation;
use crate::suites::{combined_se, fixed_xi, SIGMA_TOLERANCE};
use svoter_core::dual::coalescence_time_sample;
use svoter_core::stats::{linear_fit, mean_and_stderr};

const TRUNCATIONS: [usize; 2] = [256, 512];

pub fn run(cfg: &ExperimentConfig) -> Report {
    let mut builder = Report::new(cfg);
    let alpha = cfg.alpha.expect("resolved");
    let depth = cfg.depth.expect("resolved");
    assert!(depth >= TRUNCATIONS[1]);
    let replicas = cfg.replicas.expect("resolved");
    let m_list = cfg.m_list.clone().expect("resolved");
    let xi = fixed_xi(alpha, depth, cfg.master_seed, "coalescence-xi");

    let mut csv = Csv::new(&["replica_id", "m_from", "tau", "n_trunc", "seed"]);
    // per (n_trunc, M): mean and stderr of tau
    let mut stats = vec![Vec::new(); TRUNCATIONS.len()];
    for (ti, &n_trunc) in TRUNCATIONS.iter().enumerate() {
        for &m in &m_list {
            let label = format!("coalescence-{n_trunc}-{m}");
            let taus = run_replicas(cfg.master_seed, &label, replicas, cfg.threads, |_r, mut rng| {
                coalescence_time_sample(&xi, n_trunc, m, &mut rng)
                    .expect("valid truncation")
                    .tau
            });
            for (i, tau) in taus.iter().enumerate() {
                assert!(*tau > 0.0);
                csv.row(&[
                    i.to_string(),
                    (m + 1).to_string(),
                    fmt_f64(*tau),
                    n_trunc.to_string(),
                    SeedDerivation::new(cfg.master_seed, &label, i as u64).provenance(),
                ]);
            }
            let (mean, se) = mean_and_stderr(&taus);
            stats[ti].push((m, mean, se));
        }
    }
    let _ = write_artifact(cfg, "coalescence_replicas.csv", &csv.into_string());

    // slope at the deep truncation
    let deep = &stats[1];
    let log_m: Vec<f64> = deep.iter().map(|(m, _, _)| (*m as f64).ln()).collect();
    let log_tau: Vec<f64> = deep.iter().map(|(_, mean, _)| mean.ln()).collect();
    let (slope, _, slope_se) = linear_fit(&log_m, &log_tau);
    builder.push(Metric::within(
        "coalescence_slope",
        slope,
        slope_se,
        -1.0 / alpha,
        0.3,
    ));

    // the rescaled ratio is bounded across M: no upward trend beyond 4
    // combined standard errors (the substance of the uniform bound)
    let mut worst_upward = f64::NEG_INFINITY;
    for pair in deep.windows(2) {
        let (m0, mean0, se0) = pair[0];
        let (m1, mean1, se1) = pair[1];
        let r0 = mean0 * (m0 as f64).powf(1.0 / alpha);
        let r1 = mean1 * (m1 as f64).powf(1.0 / alpha);
        let se = combined_se(
            se0 * (m0 as f64).powf(1.0 / alpha),
            se1 * (m1 as f64).powf(1.0 / alpha),
        );
        worst_upward = worst_upward.max(r1 - r0 - SIGMA_TOLERANCE * se);
    }
    builder.push(Metric::at_most(
        "ratio_no_upward_trend_worst",
        worst_upward,
        0.0,
        0.0,
    ));

    // the rescaled mean tau * M^{1/alpha} is stable across truncations
    for (idx, &m) in m_list.iter().enumerate() {
        let scale = (m as f64).powf(1.0 / alpha);
        let (_, mean_a, se_a) = stats[0][idx];
        let (_, mean_b, se_b) = stats[1][idx];
        builder.push(Metric::within(
            format!("tau_ratio_stability_m_{m}"),
            mean_b * scale,
            se_b * scale,
            mean_a * scale,
            SIGMA_TOLERANCE * combined_se(se_a * scale, se_b * scale),
        ));
    }

    // scaling summary artifact
    let summary = serde_json::json!({
        "alpha": alpha,
        "M_list": m_list,
        "mean_tau": deep.iter().map(|(_, m, _)| *m).collect::<Vec<_>>(),
        "stderr": deep.iter().map(|(_, _, s)| *s).collect::<Vec<_>>(),
        "fitted_slope": slope,
        "slope_ci": [slope - 2.0 * slope_se, slope + 2.0 * slope_se],
    });
    let _ = write_artifact(
        cfg,
        "coalescence_scaling.json",
        &serde_json::to_string_pretty(&summary).expect("serializes"),
    );

    let report = builder.finish();
    let _ = write_artifact(cfg, "coalescence_report.json", &report.to_json());
    report
}
