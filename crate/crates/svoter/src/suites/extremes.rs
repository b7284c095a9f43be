//! Extreme-value convergence: the rescaled maximum weight against the
//! Frechet law, for the exact Pareto family and a log-perturbed one.

use rand::Rng;

use crate::config::ExperimentConfig;
use crate::report::{fmt_f64, write_artifact, Csv, Metric, Report};
use crate::runner::run_replicas;
use crate::suites::GOF_SIGNIFICANCE;
use svoter_core::env::{scale_constant, TailLaw};
use svoter_core::stats::ks_test;

pub fn run(cfg: &ExperimentConfig) -> Report {
    let mut builder = Report::new(cfg);
    let alpha = cfg.alpha.expect("resolved");
    let n = cfg.n.expect("resolved");
    let replicas = cfg.replicas.expect("resolved");
    let beta = cfg.beta.unwrap_or(0.25);

    let frechet = |x: f64| {
        if x <= 0.0 {
            0.0
        } else {
            (-x.powf(-alpha)).exp()
        }
    };

    // exact Pareto: draw all n weights per replica and track the maximum
    let law = TailLaw::pareto(alpha).expect("alpha in range");
    let a_n = scale_constant(&law, n).expect("n positive");
    let maxima = run_replicas(
        cfg.master_seed,
        "extremes-pareto",
        replicas,
        cfg.threads,
        |_r, mut rng| {
            let mut max = 0.0f64;
            for _ in 0..n {
                max = max.max(law.sample(&mut rng));
            }
            max / a_n
        },
    );
    let ks = ks_test(&maxima, frechet);
    builder.push(Metric::at_least(
        "frechet_ks_p_pareto_exact",
        ks.p_value,
        GOF_SIGNIFICANCE,
    ));

    // log-perturbed family: the maximum of n i.i.d. draws sampled through
    // its exact law, max = S^{-1}(1 - V^{1/n}) for V uniform
    let perturbed = TailLaw::pareto_log_perturbed(alpha, beta).expect("beta in range");
    let a_n_perturbed = scale_constant(&perturbed, n).expect("solver brackets");
    let maxima_perturbed = run_replicas(
        cfg.master_seed,
        "extremes-perturbed",
        replicas,
        cfg.threads,
        |_r, mut rng| {
            let v: f64 = rng.gen::<f64>().max(1e-300); // uniform in (0,1)
            let u = -f64::exp_m1(v.ln() / n as f64);
            perturbed.quantile_from_survival(u) / a_n_perturbed
        },
    );
    let ks_perturbed = ks_test(&maxima_perturbed, frechet);
    builder.push(Metric::at_least(
        "frechet_ks_p_log_perturbed",
        ks_perturbed.p_value,
        GOF_SIGNIFICANCE,
    ));

    let mut csv = Csv::new(&["replica_id", "family", "rescaled_max"]);
    for (i, m) in maxima.iter().enumerate() {
        csv.row(&[i.to_string(), "pareto_exact".into(), fmt_f64(*m)]);
    }
    for (i, m) in maxima_perturbed.iter().enumerate() {
        csv.row(&[i.to_string(), "pareto_log_perturbed".into(), fmt_f64(*m)]);
    }
    let _ = write_artifact(cfg, "extremes_maxima.csv", &csv.into_string());

    let report = builder.finish();
    let _ = write_artifact(cfg, "extremes_report.json", &report.to_json());
    report
}
