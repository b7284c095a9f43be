//! The dense matrix oracle against Monte Carlo marginals, reversibility,
//! the Markovian-coupling TV bound, and the spectral gap diagnostic.

use rand::Rng;

use crate::config::ExperimentConfig;
use crate::report::{write_artifact, Metric, Report};
use crate::runner::run_replicas;
use crate::suites::{fixed_xi, SIGMA_TOLERANCE};
use svoter_core::limitwalk::{
    coupled_pair_tv, meeting_probability_bound, self_adjointness_check, semigroup_matrix,
    spectral_gap, stationary_distribution, tv_distance, two_walks_meet_in, walk_position_at,
    WalkStart, MEETING_BOUND_C,
};
use svoter_core::stream::derive_stream;

const TV_GRID: usize = 20;
const SELF_ADJOINT_TRIALS: usize = 100;

pub fn run(cfg: &ExperimentConfig) -> Report {
    let mut builder = Report::new(cfg);
    let depth = cfg.depth.expect("resolved");
    let n = cfg.n.expect("resolved");
    let replicas = cfg.replicas.expect("resolved");
    let xi = fixed_xi(cfg.alpha.expect("resolved"), depth, cfg.master_seed, "coupling-xi");
    let holdings = xi.xi()[..n].to_vec();
    let xi1 = xi.xi_at(0);

    // Monte Carlo marginals from a fixed start against uniformization
    for (ti, t) in [0.4 * xi1, 0.8 * xi1, 1.6 * xi1].into_iter().enumerate() {
        let p = semigroup_matrix(&xi, n, t).expect("within cap");
        let positions = run_replicas(
            cfg.master_seed,
            &format!("coupling-marginal-{ti}"),
            replicas,
            cfg.threads,
            |_r, mut rng| walk_position_at(&holdings, WalkStart::Site(0), t, &mut rng),
        );
        let mut counts = vec![0u64; n];
        for pos in positions {
            counts[pos] += 1;
        }
        let mut worst_z = 0.0f64;
        for y in 0..n {
            let p_hat = counts[y] as f64 / replicas as f64;
            let target = p.entry(0, y);
            let se = (target.max(1e-12) * (1.0 - target).max(1e-12) / replicas as f64).sqrt();
            worst_z = worst_z.max((p_hat - target).abs() / se);
        }
        builder.push(Metric::at_most(
            format!("marginal_worst_z_t{ti}"),
            worst_z,
            SIGMA_TOLERANCE,
            0.0,
        ));
        if ti == 1 {
            let _ = write_artifact(cfg, "coupling_p_t.csv", &p.to_csv());
        }
    }

    // reversibility of the oracle on random observables
    let mut rng = derive_stream(cfg.master_seed, "coupling-selfadjoint", 0);
    let t = 0.8 * xi1;
    let mut worst = 0.0f64;
    for _ in 0..SELF_ADJOINT_TRIALS {
        let f: Vec<f64> = (0..n).map(|_| 2.0 * rng.gen::<f64>() - 1.0).collect();
        let g: Vec<f64> = (0..n).map(|_| 2.0 * rng.gen::<f64>() - 1.0).collect();
        worst = worst.max(self_adjointness_check(&xi, n, t, &f, &g).expect("within cap"));
    }
    builder.push(Metric::at_most("self_adjointness_worst", worst, 1e-10, 0.0));

    // coupling TV bound on the grid, from distinct starts and from uniform
    let mu = stationary_distribution(&xi, n).expect("within cap");
    let uniform = vec![1.0 / n as f64; n];
    let mut worst_violation = f64::NEG_INFINITY;
    for k in 1..=TV_GRID {
        let t = 0.35 * k as f64 * xi1;
        let (tv, bound) = coupled_pair_tv(&xi, n, 0, n / 2, t).expect("within cap");
        worst_violation = worst_violation.max(tv - bound);
        let p = semigroup_matrix(&xi, n, t).expect("within cap");
        let row = p.matrix().vecmul_left(&uniform);
        worst_violation = worst_violation.max(tv_distance(&row, &mu) - bound);
    }
    builder.push(Metric::at_most(
        "tv_bound_worst_violation",
        worst_violation,
        0.0,
        1e-12,
    ));

    // spectral gap against 1/xi_1: reported, not gating (the paper states
    // the bound for the limit semigroup, not the finite truncation)
    let gap = spectral_gap(&xi, n).expect("within cap");
    builder.push(Metric::at_least("spectral_gap", gap, 1.0 / xi1 - 1e-10).as_diagnostic());

    // pair-meeting probability inside the fast half against the explicit
    // bound with the frozen calibrated constant
    let pair_n = depth.min(64);
    let fast_half: std::collections::BTreeSet<usize> = (pair_n / 2..pair_n).collect();
    let pair_holdings = xi.xi()[..pair_n].to_vec();
    let t_meet = xi.xi_at(0);
    let meets = run_replicas(
        cfg.master_seed,
        "coupling-meeting",
        replicas,
        cfg.threads,
        |_r, mut rng| {
            u64::from(two_walks_meet_in(
                &pair_holdings,
                0,
                1,
                &fast_half,
                t_meet,
                &mut rng,
            ))
        },
    );
    let p_meet = meets.iter().sum::<u64>() as f64 / replicas as f64;
    let meet_se = (p_meet * (1.0 - p_meet) / replicas as f64).sqrt();
    let bound = meeting_probability_bound(&xi, 0, 1, &fast_half, t_meet, MEETING_BOUND_C);
    builder.push(
        Metric::at_most(
            "meeting_probability_in_fast_half",
            p_meet,
            bound,
            SIGMA_TOLERANCE * meet_se,
        )
        .with_stderr(meet_se),
    );

    let report = builder.finish();
    let _ = write_artifact(cfg, "coupling_report.json", &report.to_json());
    report
}
