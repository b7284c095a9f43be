//! Harness-level contracts: byte-identical reruns, exhaustive config
//! validation with no partial output, CLI exit codes, and the degenerate
//! lineage rung.

use std::collections::BTreeSet;
use std::process::Command;

use svoter::config::{ConfigError, ExperimentConfig, Suite};
use svoter::run_suite;
use svoter_core::env::{sample_limit_environment, Environment};
use svoter_core::limitwalk::{semigroup_matrix, walk_position_at, WalkStart};
use svoter_core::stream::derive_stream;

#[test]
fn identical_config_and_seed_give_byte_identical_output() {
    let run = |dir: &std::path::Path| {
        let mut cfg = ExperimentConfig::new(Suite::Duality);
        cfg.replicas = Some(50);
        cfg.master_seed = 99;
        cfg.out_dir = Some(dir.to_path_buf());
        run_suite(&cfg).expect("runs");
        std::fs::read(dir.join("duality_logs.csv")).expect("csv written")
    };
    let tmp = std::env::temp_dir().join("svoter-determinism-test");
    let dir_a = tmp.join("a");
    let dir_b = tmp.join("b");
    let bytes_a = run(&dir_a);
    let bytes_b = run(&dir_b);
    assert_eq!(bytes_a, bytes_b);
    let _ = std::fs::remove_dir_all(&tmp);
}

#[test]
fn thread_count_does_not_change_results() {
    let run = |threads: usize| {
        let mut cfg = ExperimentConfig::new(Suite::Stationary);
        cfg.replicas = Some(16);
        cfg.threads = Some(threads);
        run_suite(&cfg).expect("runs").metrics
    };
    let one = run(1);
    let four = run(4);
    for (a, b) in one.iter().zip(&four) {
        assert_eq!(a.value, b.value, "metric {} differs across thread counts", a.name);
    }
}

#[test]
fn invalid_config_reports_all_errors_and_writes_nothing() {
    let dir = std::env::temp_dir().join("svoter-invalid-config-test");
    let _ = std::fs::remove_dir_all(&dir);
    let mut cfg = ExperimentConfig::new(Suite::Duality).resolved();
    cfg.replicas = Some(0);
    cfg.alpha = Some(-1.0);
    cfg.out_dir = Some(dir.clone());
    match run_suite(&cfg) {
        Err(ConfigError::Invalid(errors)) => {
            assert!(errors.len() >= 2, "expected both errors listed: {errors:?}");
        }
        other => panic!("expected validation failure, got {other:?}"),
    }
    assert!(!dir.exists(), "no output may be written on config errors");
}

#[test]
fn forced_environment_rung_matches_oracle_within_monte_carlo_error() {
    // weights forced to a_n * xi on exactly the oracle's site range: the
    // rescaled finite walk and the truncated limit walk have the same law
    let n = 64usize;
    let mut rng = derive_stream(7, "forced-hook-xi", 0);
    let xi = sample_limit_environment(0.5, n, &mut rng).unwrap();
    let a_n = (n as f64).powf(2.0);
    let weights: Vec<f64> = xi.xi().iter().map(|x| x * a_n).collect();
    let env = Environment::from_weights(weights, a_n).unwrap();
    let t = 0.5;
    let oracle = semigroup_matrix(&xi, n, t).unwrap();
    let replicas = 40_000u64;
    let mut counts = [0u64; 9];
    let env_weights = env.weights().to_vec();
    let mut wrng = derive_stream(7, "forced-hook-walk", 0);
    for _ in 0..replicas {
        let p = walk_position_at(&env_weights, WalkStart::Site(0), env.a_n() * t, &mut wrng);
        counts[p.min(8)] += 1;
    }
    let mut distance = 0.0;
    let mut noise = 0.0;
    let row = oracle.row(0);
    let rest: f64 = 1.0 - row[..8].iter().sum::<f64>();
    for (j, c) in counts.iter().enumerate() {
        let p_hat = *c as f64 / replicas as f64;
        let target = if j < 8 { row[j] } else { rest };
        distance += (p_hat - target).abs();
        noise += (target.max(1e-12) * (1.0 - target).max(1e-12) / replicas as f64).sqrt();
    }
    assert!(
        distance <= 4.0 * noise,
        "distance {distance} exceeds pure Monte Carlo error {noise}"
    );
}

#[test]
fn short_time_rung_concentrates_on_the_start_site() {
    let mut rng = derive_stream(7, "short-rung-xi", 0);
    let xi = sample_limit_environment(0.5, 64, &mut rng).unwrap();
    let holdings = xi.xi().to_vec();
    let t = 1e-4 * xi.xi_at(0);
    let mut stays = 0u64;
    let replicas = 20_000;
    for _ in 0..replicas {
        if walk_position_at(&holdings, WalkStart::Site(0), t, &mut rng) == 0 {
            stays += 1;
        }
    }
    assert!(stays as f64 / replicas as f64 > 0.999);
}

#[test]
fn evolving_a_merged_pair_is_a_no_op() {
    // degenerate lineage hook: already-coalesced initial set
    use svoter_core::dual::{evolve_until_count, ConstantLandscape};
    let land = ConstantLandscape {
        n: 8,
        mean_holding: 1.0,
    };
    let init: BTreeSet<usize> = [3].into_iter().collect();
    let mut rng = derive_stream(7, "merged-pair", 0);
    assert_eq!(evolve_until_count(&land, &init, 1, 1 << 20, &mut rng).unwrap(), 0.0);
}

#[test]
fn cli_exit_codes() {
    let bin = env!("CARGO_BIN_EXE_svoter");
    // 0: passing suite
    let ok = Command::new(bin)
        .args(["duality", "--replicas", "20", "--seed", "7"])
        .output()
        .expect("spawns");
    assert_eq!(ok.status.code(), Some(0), "stdout: {:?}", ok.stdout);
    // 2: configuration errors
    let bad_suite = Command::new(bin).arg("nonsense").output().expect("spawns");
    assert_eq!(bad_suite.status.code(), Some(2));
    let bad_replicas = Command::new(bin)
        .args(["duality", "--replicas", "0"])
        .output()
        .expect("spawns");
    assert_eq!(bad_replicas.status.code(), Some(2));
}
