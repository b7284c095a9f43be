//! The entrance law from uniform starts: truncation stability, the
//! semigroup identity Q_t P_s = Q_{t+s}, and the tail bound on mass
//! beyond the slow sites.

use crate::config::ExperimentConfig;
use crate::report::{fmt_f64, write_artifact, Csv, Metric, Report};
use crate::runner::run_replicas;
use crate::suites::{fixed_xi, l1_and_noise, SIGMA_TOLERANCE};
use svoter_core::alias::AliasTable;
use svoter_core::limitwalk::{
    entrance_law_counts, normalize_counts, walk_position_at, WalkStart, ENTRANCE_TAIL_C,
};

const TRUNCATIONS: [usize; 2] = [256, 512];
const TAIL_SIZES: [usize; 3] = [16, 32, 64];

pub fn run(cfg: &ExperimentConfig) -> Report {
    let mut builder = Report::new(cfg);
    let alpha = cfg.alpha.expect("resolved");
    let depth = cfg.depth.expect("resolved");
    assert!(depth >= TRUNCATIONS[1]);
    let replicas = cfg.replicas.expect("resolved");
    let t_grid = cfg.t_grid.clone().expect("resolved");
    let xi = fixed_xi(alpha, depth, cfg.master_seed, "entrance-xi");

    // stability of Q-hat across truncations, plus the tail-bound grid
    let mut csv = Csv::new(&["t", "site", "p_256", "p_512"]);
    for (ti, &t) in t_grid.iter().enumerate() {
        let mut estimates = Vec::new();
        for (mi, &m) in TRUNCATIONS.iter().enumerate() {
            let label = format!("entrance-qt-{ti}-{mi}");
            let counts = parallel_entrance_counts(cfg, &xi, m, t, replicas, &label);
            estimates.push(normalize_counts(&counts, replicas));
        }
        for site in 0..TRUNCATIONS[1] {
            csv.row(&[
                fmt_f64(t),
                site.to_string(),
                fmt_f64(estimates[0].get(site).copied().unwrap_or(0.0)),
                fmt_f64(estimates[1][site]),
            ]);
        }
        let (dist, noise) = l1_and_noise(
            &estimates[0],
            &estimates[1],
            replicas as f64,
            replicas as f64,
        );
        let tail_allowance = ENTRANCE_TAIL_C
            * t
            * (TRUNCATIONS[0] as f64).powf(1.0 - 1.0 / alpha);
        builder.push(
            Metric::at_most(
                format!("qt_stability_l1_t_{t}"),
                dist,
                SIGMA_TOLERANCE * noise + tail_allowance,
                0.0,
            )
            .with_stderr(noise),
        );
        // tail mass of the deep estimate beyond [N]
        for &size in &TAIL_SIZES {
            let tail: f64 = estimates[1][size..].iter().sum();
            let tail_se = (tail * (1.0 - tail) / replicas as f64).sqrt();
            let bound = ENTRANCE_TAIL_C * t * (size as f64).powf(1.0 - 1.0 / alpha);
            builder.push(
                Metric::at_most(
                    format!("qt_tail_mass_t_{t}_beyond_{size}"),
                    tail,
                    bound,
                    SIGMA_TOLERANCE * tail_se,
                )
                .with_stderr(tail_se),
            );
        }
    }
    let _ = write_artifact(cfg, "entrance_qt.csv", &csv.into_string());

    // entrance-law semigroup identity on the deep truncation:
    // Q-hat_t evolved s more equals Q-hat_{t+s} within combined error
    let m = TRUNCATIONS[1];
    let holdings = xi.xi()[..m].to_vec();
    for (pi, (t, s)) in [(0.5, 0.5), (1.0, 1.0)].into_iter().enumerate() {
        let qt_counts = parallel_entrance_counts(cfg, &xi, m, t, replicas, &format!("entrance-two-stage-qt-{pi}"));
        let direct_counts =
            parallel_entrance_counts(cfg, &xi, m, t + s, replicas, &format!("entrance-direct-{pi}"));
        let direct = normalize_counts(&direct_counts, replicas);
        // bootstrap starts from Q-hat_t, then evolve an independent time s
        let start_table = AliasTable::new(&qt_counts.iter().map(|c| *c as f64).collect::<Vec<_>>());
        let evolved_positions = run_replicas(
            cfg.master_seed,
            &format!("entrance-two-stage-evolve-{pi}"),
            replicas,
            cfg.threads,
            |_r, mut rng| {
                let start = start_table.sample(&mut rng);
                walk_position_at(&holdings, WalkStart::Site(start), s, &mut rng)
            },
        );
        let mut evolved_counts = vec![0u64; m];
        for p in evolved_positions {
            evolved_counts[p] += 1;
        }
        let evolved = normalize_counts(&evolved_counts, replicas);
        // two-stage variance: bootstrap resampling plus the base estimate
        let r_eff = replicas as f64 / 2.0;
        let (dist, noise) = l1_and_noise(&evolved, &direct, r_eff, replicas as f64);
        builder.push(
            Metric::at_most(
                format!("entrance_semigroup_l1_t_{t}_s_{s}"),
                dist,
                SIGMA_TOLERANCE * noise,
                0.0,
            )
            .with_stderr(noise),
        );
    }

    let report = builder.finish();
    let _ = write_artifact(cfg, "entrance_report.json", &report.to_json());
    report
}

/// Entrance-law counts split across parallel workers, merged in worker
/// order.
fn parallel_entrance_counts(
    cfg: &ExperimentConfig,
    xi: &svoter_core::env::LimitEnvironment,
    m: usize,
    t: f64,
    replicas: u64,
    label: &str,
) -> Vec<u64> {
    let workers = 64u64;
    let base = replicas / workers;
    let extra = replicas % workers;
    let partials = run_replicas(cfg.master_seed, label, workers, cfg.threads, |w, mut rng| {
        let quota = base + u64::from(w < extra);
        entrance_law_counts(xi, m, t, quota, &mut rng).expect("valid truncation")
    });
    let mut counts = vec![0u64; m];
    for partial in partials {
        for (acc, c) in counts.iter_mut().zip(partial) {
            *acc += c;
        }
    }
    counts
}
