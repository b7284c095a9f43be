//! Event-driven forward simulation of the finite stubborn voter model.
//!
//! Site `x` rings at rate `1/w_x` and copies the opinion of a uniformly
//! chosen site (itself allowed; a self-copy is a no-op). The chain is run
//! without materializing an event log, stopping at the absorbing all-0 or
//! all-1 states.

use rand::distributions::Uniform;
use rand::Rng;
use thiserror::Error;

use crate::alias::AliasTable;
use crate::env::Environment;
use crate::stats::{binomial_stderr, pairwise_sum};
use crate::stream::{sample_gamma, sample_poisson};

/// Events between full recomputations of the weighted-mass statistic.
const RECOMPUTE_PERIOD: u64 = 1 << 20;

#[derive(Debug, Error, PartialEq)]
pub enum VoterError {
    #[error("chain not absorbed after {events} events (t = {time})")]
    NonAbsorbed { events: u64, time: f64 },
    #[error("opinion state has {got} sites, environment has {expected}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("{failures} of {replicas} replicas failed to absorb")]
    TooManyFailures { failures: u64, replicas: u64 },
    #[error("need at least {0} replicas")]
    TooFewReplicas(u64),
}

/// A {0,1} opinion configuration with maintained weighted mass.
#[derive(Debug, Clone, PartialEq)]
pub struct OpinionState {
    bits: Vec<bool>,
    ones: usize,
    weighted_ones: f64,
}

impl OpinionState {
    /// Build from raw bits, computing the weighted mass against `weights`.
    pub fn from_bits(bits: Vec<bool>, weights: &[f64]) -> Self {
        assert_eq!(bits.len(), weights.len());
        let mut state = OpinionState {
            bits,
            ones: 0,
            weighted_ones: 0.0,
        };
        state.recompute(weights);
        state
    }

    /// All sites set to `bit`.
    pub fn constant(n: usize, bit: bool, weights: &[f64]) -> Self {
        Self::from_bits(vec![bit; n], weights)
    }

    /// Indicator of a single site holding opinion 1.
    pub fn indicator(n: usize, site: usize, weights: &[f64]) -> Self {
        let mut bits = vec![false; n];
        bits[site] = true;
        Self::from_bits(bits, weights)
    }

    pub fn n(&self) -> usize {
        self.bits.len()
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn bit(&self, x: usize) -> bool {
        self.bits[x]
    }

    pub fn ones(&self) -> usize {
        self.ones
    }

    pub fn weighted_ones(&self) -> f64 {
        self.weighted_ones
    }

    pub fn is_consensus(&self) -> bool {
        self.ones == 0 || self.ones == self.bits.len()
    }

    /// True when every site of `set` holds opinion 1.
    pub fn all_ones_on<'a>(&self, set: impl IntoIterator<Item = &'a usize>) -> bool {
        set.into_iter().all(|x| self.bits[*x])
    }

    /// Flip the complete configuration.
    pub fn flipped(&self, weights: &[f64]) -> Self {
        Self::from_bits(self.bits.iter().map(|b| !b).collect(), weights)
    }

    /// Set `site` to `bit`, maintaining the counters incrementally.
    #[inline]
    pub fn assign(&mut self, site: usize, bit: bool, weight: f64) {
        if self.bits[site] != bit {
            self.bits[site] = bit;
            if bit {
                self.ones += 1;
                self.weighted_ones += weight;
            } else {
                self.ones -= 1;
                self.weighted_ones -= weight;
            }
        }
    }

    /// Refresh the counters from the bits, clearing accumulated float
    /// drift in the weighted mass.
    pub fn recompute(&mut self, weights: &[f64]) {
        assert_eq!(self.bits.len(), weights.len());
        self.ones = self.bits.iter().filter(|b| **b).count();
        let terms: Vec<f64> = self
            .bits
            .iter()
            .zip(weights)
            .map(|(b, w)| if *b { *w } else { 0.0 })
            .collect();
        self.weighted_ones = pairwise_sum(&terms);
    }
}

/// Outcome of one absorbed run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConsensusResult {
    /// 0 or 1, the absorbed opinion.
    pub outcome: u8,
    /// Absorption time.
    pub tau: f64,
    /// Events processed until absorption.
    pub events_used: u64,
}

struct VoterKernel {
    alias: AliasTable,
    target: Uniform<u32>,
    total_rate: f64,
}

impl VoterKernel {
    fn new(env: &Environment) -> Self {
        let rates: Vec<f64> = env.weights().iter().map(|w| 1.0 / w).collect();
        let total_rate = pairwise_sum(&rates);
        VoterKernel {
            alias: AliasTable::new(&rates),
            target: Uniform::from(0..env.n() as u32),
            total_rate,
        }
    }
}

fn check_dims(env: &Environment, eta0: &OpinionState) -> Result<(), VoterError> {
    if eta0.n() != env.n() {
        return Err(VoterError::DimensionMismatch {
            expected: env.n(),
            got: eta0.n(),
        });
    }
    Ok(())
}

/// Run the chain until consensus; the environment's alias table makes each
/// event O(1).
///
/// Interarrival times are independent of the site/target skeleton, so the
/// kernel runs the skeleton alone and draws the absorption time in one
/// step as Gamma(events)/R, which is the exact law of the sum of `events`
/// exponentials at total rate R.
pub fn simulate_to_consensus<R: Rng + ?Sized>(
    env: &Environment,
    eta0: &OpinionState,
    rng: &mut R,
    max_events: u64,
) -> Result<ConsensusResult, VoterError> {
    assert!(max_events >= 1);
    check_dims(env, eta0)?;
    let mut state = eta0.clone();
    if state.is_consensus() {
        return Ok(ConsensusResult {
            outcome: u8::from(state.ones() > 0),
            tau: 0.0,
            events_used: 0,
        });
    }
    let kernel = VoterKernel::new(env);
    let mut events = 0u64;
    while events < max_events {
        events += 1;
        let site = kernel.alias.sample(rng);
        let target = rng.sample(kernel.target) as usize;
        let bit = state.bit(target);
        if state.bit(site) != bit {
            state.assign(site, bit, env.weight(site));
            if state.is_consensus() {
                let tau = sample_gamma(rng, events as f64) / kernel.total_rate;
                return Ok(ConsensusResult {
                    outcome: u8::from(bit),
                    tau,
                    events_used: events,
                });
            }
        }
        if events.is_multiple_of(RECOMPUTE_PERIOD) {
            state.recompute(env.weights());
        }
    }
    Err(VoterError::NonAbsorbed {
        events,
        time: sample_gamma(rng, events as f64) / kernel.total_rate,
    })
}

/// Run the chain up to a fixed time and return the configuration there.
///
/// The number of clock rings on `[0, t]` is Poisson(R t) independently of
/// the skeleton, so the kernel draws the count once and replays that many
/// skeleton events; consensus freezes the state, so the loop exits early
/// there.
pub fn simulate_to_time<R: Rng + ?Sized>(
    env: &Environment,
    eta0: &OpinionState,
    t: f64,
    rng: &mut R,
) -> Result<OpinionState, VoterError> {
    check_dims(env, eta0)?;
    let mut state = eta0.clone();
    if state.is_consensus() || t <= 0.0 {
        return Ok(state);
    }
    let kernel = VoterKernel::new(env);
    let count = sample_poisson(rng, kernel.total_rate * t);
    for events in 1..=count {
        let site = kernel.alias.sample(rng);
        let target = rng.sample(kernel.target) as usize;
        let bit = state.bit(target);
        state.assign(site, bit, env.weight(site));
        if state.is_consensus() {
            return Ok(state);
        }
        if events % RECOMPUTE_PERIOD == 0 {
            state.recompute(env.weights());
        }
    }
    Ok(state)
}

/// The exact consensus probability `sum eta0(x) w_x / sum w_x`.
pub fn consensus_probability_formula(env: &Environment, eta0: &OpinionState) -> f64 {
    let terms: Vec<f64> = eta0
        .bits()
        .iter()
        .zip(env.weights())
        .map(|(b, w)| if *b { *w } else { 0.0 })
        .collect();
    pairwise_sum(&terms) / env.total()
}

/// Weighted fraction of 1-opinions, the martingale observable.
pub fn weighted_fraction(state: &OpinionState, env: &Environment) -> f64 {
    state.weighted_ones() / env.total()
}

/// Monte Carlo estimate of the consensus probability over sequential
/// replicas from one stream. Returns `(estimate, stderr)`.
///
/// Non-absorbed replicas are counted as failures; more than 0.1% of them
/// aborts the estimate.
pub fn estimate_consensus_probability<R: Rng + ?Sized>(
    env: &Environment,
    eta0: &OpinionState,
    replicas: u64,
    rng: &mut R,
    max_events: u64,
) -> Result<(f64, f64), VoterError> {
    if replicas < 2 {
        return Err(VoterError::TooFewReplicas(2));
    }
    let mut ones = 0u64;
    let mut failures = 0u64;
    for _ in 0..replicas {
        match simulate_to_consensus(env, eta0, rng, max_events) {
            Ok(res) => ones += u64::from(res.outcome),
            Err(VoterError::NonAbsorbed { .. }) => failures += 1,
            Err(e) => return Err(e),
        }
    }
    if failures * 1000 > replicas {
        return Err(VoterError::TooManyFailures { failures, replicas });
    }
    let successes = replicas - failures;
    let p = ones as f64 / successes as f64;
    Ok((p, binomial_stderr(p, successes)))
}
