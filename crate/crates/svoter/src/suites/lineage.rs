//! Lineage convergence to the limit walk: single-walker marginals and
//! small coalescing systems in finite environments, rescaled by a_N,
//! against the truncated limit dynamics.
//!
//! Finite environments are built from the same exponential stream as the
//! limit environment through the order-statistics representation
//! `w_x^{(N)} = (Gamma_x / Gamma_{N+1})^{-1/alpha}`: each rung is a
//! genuine i.i.d.-Pareto order-statistic vector, quenched-coupled to the
//! xi it converges to.

use std::collections::BTreeSet;

use crate::config::ExperimentConfig;
use crate::report::{fmt_f64, write_artifact, Csv, Metric, Report};
use crate::runner::run_replicas;
use svoter_core::dual::{evolve_coalescing, XiPrefix};
use svoter_core::env::{limit_environment_from_chis, Environment, LimitEnvironment};
use svoter_core::limitwalk::{semigroup_matrix, walk_position_at, WalkStart};
use svoter_core::stream::{derive_stream, sample_exp};

const ORACLE_DEPTH: usize = 64;
const FINAL_DISTANCE_CAP: f64 = 0.05;

pub fn run(cfg: &ExperimentConfig) -> Report {
    let mut builder = Report::new(cfg);
    let alpha = cfg.alpha.expect("resolved");
    let depth = cfg.depth.expect("resolved");
    let ladder = cfg.m_list.clone().expect("resolved");
    let k_sites = cfg.n.expect("resolved");
    let t = cfg.t_grid.clone().expect("resolved")[0];
    let replicas = cfg.replicas.expect("resolved");
    let n_max = *ladder.last().expect("non-empty ladder");

    // one exponential stream drives every rung and the limit environment
    let mut chi_rng = derive_stream(cfg.master_seed, "lineage-chi", 0);
    let chis: Vec<f64> = (0..=n_max).map(|_| sample_exp(&mut chi_rng, 1.0)).collect();
    let xi = limit_environment_from_chis(alpha, &chis[..depth]).expect("positive stream");
    let gammas: Vec<f64> = chis
        .iter()
        .scan(0.0, |acc, chi| {
            *acc += chi;
            Some(*acc)
        })
        .collect();

    let mut csv = Csv::new(&["k", "n", "distance"]);

    // single lineage: marginal over the slowest sites vs the oracle
    let oracle = semigroup_matrix(&xi, ORACLE_DEPTH, t).expect("within cap");
    let limit_marginal: Vec<f64> = restrict(oracle.row(0), k_sites);
    let mut k1_distances = Vec::new();
    for &n in &ladder {
        let env = rung_environment(alpha, &gammas, n);
        let horizon = env.a_n() * t;
        let weights = env.weights().to_vec();
        let positions = run_replicas(
            cfg.master_seed,
            &format!("lineage-walk-{n}"),
            replicas,
            cfg.threads,
            |_r, mut rng| walk_position_at(&weights, WalkStart::Site(0), horizon, &mut rng),
        );
        let mut counts = vec![0u64; k_sites + 1];
        for p in positions {
            counts[p.min(k_sites)] += 1;
        }
        let empirical: Vec<f64> = counts
            .iter()
            .map(|c| *c as f64 / replicas as f64)
            .collect();
        let distance: f64 = empirical
            .iter()
            .zip(&limit_marginal)
            .map(|(a, b)| (a - b).abs())
            .sum();
        csv.row(&["1".into(), n.to_string(), fmt_f64(distance)]);
        k1_distances.push(distance);
    }
    push_trend_metric(&mut builder, 1, &k1_distances);

    // two and three lineages: coalescence-by-time frequencies
    for k in [2usize, 3] {
        let init: BTreeSet<usize> = (0..k).collect();
        let p_limit = coalescence_frequency_limit(cfg, &xi, depth, &init, t, replicas);
        let mut distances = Vec::new();
        for &n in &ladder {
            let env = rung_environment(alpha, &gammas, n);
            let horizon = env.a_n() * t;
            let coalesced = run_replicas(
                cfg.master_seed,
                &format!("lineage-coal-{k}-{n}"),
                replicas,
                cfg.threads,
                |_r, mut rng| {
                    let sys = evolve_coalescing(&env, &init, horizon, &mut rng).expect("caps");
                    u64::from(sys.count() < k)
                },
            );
            let p_hat = coalesced.iter().sum::<u64>() as f64 / replicas as f64;
            let distance = (p_hat - p_limit).abs();
            csv.row(&[k.to_string(), n.to_string(), fmt_f64(distance)]);
            distances.push(distance);
        }
        push_trend_metric(&mut builder, k, &distances);
    }
    let _ = write_artifact(cfg, "lineage_distances.csv", &csv.into_string());

    let report = builder.finish();
    let _ = write_artifact(cfg, "lineage_report.json", &report.to_json());
    report
}

/// Order-statistics environment for one rung, coupled to the shared
/// exponential stream.
fn rung_environment(alpha: f64, gammas: &[f64], n: usize) -> Environment {
    let gamma_np1 = gammas[n]; // Gamma_{N+1} with 1-based indexing
    let weights: Vec<f64> = (0..n)
        .map(|x| (gammas[x] / gamma_np1).powf(-1.0 / alpha))
        .collect();
    let a_n = (n as f64).powf(1.0 / alpha);
    Environment::from_weights(weights, a_n).expect("positive weights")
}

/// Row restricted to the first k entries plus a lumped remainder.
fn restrict(row: &[f64], k: usize) -> Vec<f64> {
    let mut out: Vec<f64> = row[..k].to_vec();
    out.push(1.0 - out.iter().sum::<f64>());
    out
}

fn coalescence_frequency_limit(
    cfg: &ExperimentConfig,
    xi: &LimitEnvironment,
    depth: usize,
    init: &BTreeSet<usize>,
    t: f64,
    replicas: u64,
) -> f64 {
    let land = XiPrefix::new(xi, depth);
    let k = init.len();
    let coalesced = run_replicas(
        cfg.master_seed,
        &format!("lineage-coal-limit-{k}"),
        replicas,
        cfg.threads,
        |_r, mut rng| {
            let sys = evolve_coalescing(&land, init, t, &mut rng).expect("caps");
            u64::from(sys.count() < k)
        },
    );
    coalesced.iter().sum::<u64>() as f64 / replicas as f64
}

/// Pass when distances strictly decrease along the ladder, or the final
/// rung is already inside the absolute cap.
fn push_trend_metric(builder: &mut crate::report::ReportBuilder, k: usize, distances: &[f64]) {
    let decreasing = distances.windows(2).all(|w| w[1] < w[0]);
    let final_distance = *distances.last().expect("non-empty");
    for (i, d) in distances.iter().enumerate() {
        builder.push(
            Metric::at_most(format!("lineage_k{k}_distance_rung{i}"), *d, 1.0, 0.0)
                .as_diagnostic(),
        );
    }
    let value = if decreasing { 0.0 } else { final_distance };
    builder.push(Metric::at_most(
        format!("lineage_k{k}_trend_or_final"),
        value,
        FINAL_DISTANCE_CAP,
        0.0,
    ));
}
