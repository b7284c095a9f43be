//! Pathwise duality: forward and backward reads of shared event logs must
//! produce equal indicator bits on every probe, exactly.

use std::collections::BTreeSet;

use rand::Rng;

use crate::config::ExperimentConfig;
use crate::report::{write_artifact, Csv, Metric, Report};
use crate::runner::run_replicas;
use svoter_core::env::sample_weights;
use svoter_core::graphical::{duality_indicator_pair, generate_log};
use svoter_core::voter::OpinionState;

const PROBES_PER_LOG: usize = 10;

pub fn run(cfg: &ExperimentConfig) -> Report {
    let mut builder = Report::new(cfg);
    let n = cfg.n.expect("resolved");
    let logs = cfg.replicas.expect("resolved");
    let law = cfg.tail_law();

    let results = run_replicas(
        cfg.master_seed,
        "duality-log",
        logs,
        cfg.threads,
        |_replica, mut rng| {
            let env = sample_weights(&law, n, &mut rng).expect("law");
            // horizon on the slow-site scale so probes see real dynamics
            let horizon = env.a_n() / n as f64;
            let log = generate_log(&env, horizon, &mut rng).expect("log in cap");
            let mut probes = 0u64;
            let mut mismatches = 0u64;
            while probes < PROBES_PER_LOG as u64 {
                let bits: Vec<bool> = (0..n).map(|_| rng.gen()).collect();
                let eta0 = OpinionState::from_bits(bits, env.weights());
                let a: BTreeSet<usize> = (0..n).filter(|_| rng.gen::<f64>() < 0.4).collect();
                if a.is_empty() {
                    continue;
                }
                let t = rng.gen::<f64>() * horizon;
                let (fwd, bwd) = duality_indicator_pair(&log, &eta0, &a, t).expect("valid probe");
                probes += 1;
                if fwd != bwd {
                    mismatches += 1;
                }
            }
            (probes, mismatches)
        },
    );

    let mut csv = Csv::new(&["log_id", "probes", "mismatches"]);
    let mut total_probes = 0u64;
    let mut total_mismatches = 0u64;
    for (i, (probes, mismatches)) in results.iter().enumerate() {
        csv.row(&[i.to_string(), probes.to_string(), mismatches.to_string()]);
        total_probes += probes;
        total_mismatches += mismatches;
    }
    let _ = write_artifact(cfg, "duality_logs.csv", &csv.into_string());

    builder.push(Metric::exactly(
        "duality_probes",
        total_probes as f64,
        (logs * PROBES_PER_LOG as u64) as f64,
    ));
    builder.push(Metric::exactly(
        "duality_mismatches",
        total_mismatches as f64,
        0.0,
    ));
    let report = builder.finish();
    let _ = write_artifact(cfg, "duality_report.json", &report.to_json());
    report
}
