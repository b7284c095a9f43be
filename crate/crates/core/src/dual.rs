//! Coalescing random-walk systems in finite and truncated-limit
//! environments.
//!
//! On the complete graph the occupied-site set is a full description of
//! the system: coincident particles are already merged, so each occupied
//! site fires at its own clock rate and a firing moves one lineage to a
//! uniform target, merging on contact. The engine keeps the exponential
//! race in a binary indexed tree over rates, which makes a merge an
//! O(log n) update.

use std::collections::BTreeSet;

use rand::distributions::Uniform;
use rand::Rng;
use thiserror::Error;

use crate::env::{Environment, LimitEnvironment};
use crate::fenwick::RateTree;
use crate::stream::sample_exp;

/// Event budget before an evolve call refuses to continue.
pub const DEFAULT_MAX_EVENTS: u64 = 2_000_000_000;

const REBUILD_PERIOD: u64 = 1 << 20;

#[derive(Debug, Error, PartialEq)]
pub enum DualError {
    #[error("initial occupied set is empty")]
    EmptyInit,
    #[error("site {0} is outside the landscape")]
    SiteOutOfRange(usize),
    #[error("horizon must be positive, got {0}")]
    BadHorizon(f64),
    #[error("event budget of {0} exhausted")]
    SizeCap(u64),
    #[error("need m + 1 <= n_trunc <= depth, got m = {m}, n_trunc = {n_trunc}, depth = {depth}")]
    BadTruncation {
        m: usize,
        n_trunc: usize,
        depth: usize,
    },
}

/// Anything that assigns a mean waiting time to every site of `[n]`.
pub trait RateLandscape {
    fn sites(&self) -> usize;
    /// Mean holding time at `x`; the clock rate is its reciprocal.
    fn mean_holding(&self, x: usize) -> f64;
}

impl RateLandscape for Environment {
    fn sites(&self) -> usize {
        self.n()
    }

    fn mean_holding(&self, x: usize) -> f64 {
        self.weight(x)
    }
}

/// The first `n` sites of a truncated limit environment.
#[derive(Debug, Clone, Copy)]
pub struct XiPrefix<'a> {
    xi: &'a LimitEnvironment,
    n: usize,
}

impl<'a> XiPrefix<'a> {
    pub fn new(xi: &'a LimitEnvironment, n: usize) -> Self {
        assert!(n >= 1 && n <= xi.depth());
        XiPrefix { xi, n }
    }
}

impl RateLandscape for XiPrefix<'_> {
    fn sites(&self) -> usize {
        self.n
    }

    fn mean_holding(&self, x: usize) -> f64 {
        self.xi.xi_at(x)
    }
}

/// Flat landscape, used by exchangeability and reduction tests.
#[derive(Debug, Clone, Copy)]
pub struct ConstantLandscape {
    pub n: usize,
    pub mean_holding: f64,
}

impl RateLandscape for ConstantLandscape {
    fn sites(&self) -> usize {
        self.n
    }

    fn mean_holding(&self, _x: usize) -> f64 {
        self.mean_holding
    }
}

/// One recorded merge.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoalescenceEvent {
    pub time: f64,
    /// Site where the two lineages met.
    pub site: usize,
    pub count_after: usize,
}

/// Final state of an evolve call.
#[derive(Debug, Clone, PartialEq)]
pub struct ParticleSystem {
    occupied: Vec<usize>,
    count: usize,
    clock: f64,
    coalescence_log: Vec<CoalescenceEvent>,
    jumps: u64,
}

impl ParticleSystem {
    /// Occupied sites in increasing order.
    pub fn occupied(&self) -> &[usize] {
        &self.occupied
    }

    pub fn count(&self) -> usize {
        self.count
    }

    pub fn clock(&self) -> f64 {
        self.clock
    }

    pub fn coalescence_log(&self) -> &[CoalescenceEvent] {
        &self.coalescence_log
    }

    /// Total firing events, self-targets included.
    pub fn jumps(&self) -> u64 {
        self.jumps
    }
}

/// First coalescence step timing.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoalescenceTiming {
    pub m_from: usize,
    pub m_to: usize,
    pub tau: f64,
}

/// Jump counting path of the lower-bound walk: `counts[k] = k` at
/// `times[k]`, starting from `(0, 0)`.
#[derive(Debug, Clone, PartialEq)]
pub struct JumpCountPath {
    pub times: Vec<f64>,
    pub counts: Vec<u64>,
}

impl JumpCountPath {
    /// `J'_t`: jumps completed by time `t`.
    pub fn count_at(&self, t: f64) -> u64 {
        let idx = self.times.partition_point(|s| *s <= t);
        self.counts[idx - 1]
    }
}

struct Engine {
    tree: RateTree,
    occupied: Vec<bool>,
    count: usize,
    clock: f64,
    jumps: u64,
    log: Vec<CoalescenceEvent>,
    target: Uniform<u32>,
}

enum Step {
    Moved,
    Merged,
    PastHorizon,
}

impl Engine {
    fn new<L: RateLandscape>(land: &L, init: &BTreeSet<usize>) -> Result<Self, DualError> {
        if init.is_empty() {
            return Err(DualError::EmptyInit);
        }
        let n = land.sites();
        let mut tree = RateTree::new(n);
        let mut occupied = vec![false; n];
        for x in init {
            if *x >= n {
                return Err(DualError::SiteOutOfRange(*x));
            }
            occupied[*x] = true;
            tree.set(*x, 1.0 / land.mean_holding(*x));
        }
        Ok(Engine {
            tree,
            occupied,
            count: init.len(),
            clock: 0.0,
            jumps: 0,
            log: Vec::new(),
            target: Uniform::from(0..n as u32),
        })
    }

    fn step<L: RateLandscape, R: Rng + ?Sized>(
        &mut self,
        land: &L,
        horizon: f64,
        rng: &mut R,
    ) -> Step {
        let total = self.tree.total();
        let dt = sample_exp(rng, 1.0 / total);
        if self.clock + dt > horizon {
            self.clock = horizon;
            return Step::PastHorizon;
        }
        self.clock += dt;
        self.jumps += 1;
        if self.jumps.is_multiple_of(REBUILD_PERIOD) {
            self.tree.rebuild();
        }
        let site = self.tree.find(rng.gen::<f64>() * total);
        let target = rng.sample(self.target) as usize;
        if target == site {
            return Step::Moved;
        }
        if self.occupied[target] {
            // merge: the moving lineage disappears into the one at target
            self.occupied[site] = false;
            self.tree.set(site, 0.0);
            self.count -= 1;
            self.log.push(CoalescenceEvent {
                time: self.clock,
                site: target,
                count_after: self.count,
            });
            Step::Merged
        } else {
            self.occupied[site] = false;
            self.tree.set(site, 0.0);
            self.occupied[target] = true;
            self.tree.set(target, 1.0 / land.mean_holding(target));
            Step::Moved
        }
    }

    fn finish(self) -> ParticleSystem {
        let occupied: Vec<usize> = self
            .occupied
            .iter()
            .enumerate()
            .filter_map(|(i, o)| o.then_some(i))
            .collect();
        ParticleSystem {
            occupied,
            count: self.count,
            clock: self.clock,
            coalescence_log: self.log,
            jumps: self.jumps,
        }
    }
}

/// Evolve the coalescing system to a fixed horizon.
pub fn evolve_coalescing<L: RateLandscape, R: Rng + ?Sized>(
    land: &L,
    init: &BTreeSet<usize>,
    horizon: f64,
    rng: &mut R,
) -> Result<ParticleSystem, DualError> {
    evolve_coalescing_capped(land, init, horizon, DEFAULT_MAX_EVENTS, rng)
}

pub fn evolve_coalescing_capped<L: RateLandscape, R: Rng + ?Sized>(
    land: &L,
    init: &BTreeSet<usize>,
    horizon: f64,
    max_events: u64,
    rng: &mut R,
) -> Result<ParticleSystem, DualError> {
    if !(horizon > 0.0) {
        return Err(DualError::BadHorizon(horizon));
    }
    let mut engine = Engine::new(land, init)?;
    loop {
        if engine.jumps >= max_events {
            return Err(DualError::SizeCap(max_events));
        }
        if let Step::PastHorizon = engine.step(land, horizon, rng) {
            return Ok(engine.finish());
        }
    }
}

/// Evolve until the particle count drops to `target_count`; returns the
/// hitting time. An initial count at or below the target returns 0.
pub fn evolve_until_count<L: RateLandscape, R: Rng + ?Sized>(
    land: &L,
    init: &BTreeSet<usize>,
    target_count: usize,
    max_events: u64,
    rng: &mut R,
) -> Result<f64, DualError> {
    let mut engine = Engine::new(land, init)?;
    if engine.count <= target_count {
        return Ok(0.0);
    }
    loop {
        if engine.jumps >= max_events {
            return Err(DualError::SizeCap(max_events));
        }
        if let Step::Merged = engine.step(land, f64::INFINITY, rng) {
            if engine.count <= target_count {
                return Ok(engine.clock);
            }
        }
    }
}

/// Total jumps accumulated up to `horizon`, or `None` when a coalescence
/// happens first (the rejection branch of the domination test).
pub fn jumps_if_no_coalescence<L: RateLandscape, R: Rng + ?Sized>(
    land: &L,
    init: &BTreeSet<usize>,
    horizon: f64,
    rng: &mut R,
) -> Result<Option<u64>, DualError> {
    if !(horizon > 0.0) {
        return Err(DualError::BadHorizon(horizon));
    }
    let mut engine = Engine::new(land, init)?;
    loop {
        if engine.jumps >= DEFAULT_MAX_EVENTS {
            return Err(DualError::SizeCap(DEFAULT_MAX_EVENTS));
        }
        match engine.step(land, horizon, rng) {
            Step::PastHorizon => return Ok(Some(engine.jumps)),
            Step::Merged => return Ok(None),
            Step::Moved => {}
        }
    }
}

fn check_truncation(xi: &LimitEnvironment, n_trunc: usize, m: usize) -> Result<(), DualError> {
    if m + 1 > n_trunc || n_trunc > xi.depth() {
        return Err(DualError::BadTruncation {
            m,
            n_trunc,
            depth: xi.depth(),
        });
    }
    Ok(())
}

/// One sample of the first coalescence time `tau_{M+1 -> M}`, starting
/// `m + 1` particles on the `m + 1` slowest sites of the truncation.
pub fn coalescence_time_sample<R: Rng + ?Sized>(
    xi: &LimitEnvironment,
    n_trunc: usize,
    m: usize,
    rng: &mut R,
) -> Result<CoalescenceTiming, DualError> {
    check_truncation(xi, n_trunc, m)?;
    let land = XiPrefix::new(xi, n_trunc);
    let init: BTreeSet<usize> = (0..=m).collect();
    let tau = evolve_until_count(&land, &init, m, DEFAULT_MAX_EVENTS, rng)?;
    Ok(CoalescenceTiming {
        m_from: m + 1,
        m_to: m,
        tau,
    })
}

/// Absorption time of the fully occupied truncation into one particle.
pub fn tau_infinity_to_one<R: Rng + ?Sized>(
    xi: &LimitEnvironment,
    n_trunc: usize,
    rng: &mut R,
) -> Result<f64, DualError> {
    if n_trunc == 0 || n_trunc > xi.depth() {
        return Err(DualError::BadTruncation {
            m: 0,
            n_trunc,
            depth: xi.depth(),
        });
    }
    let land = XiPrefix::new(xi, n_trunc);
    let init: BTreeSet<usize> = (0..n_trunc).collect();
    evolve_until_count(&land, &init, 1, DEFAULT_MAX_EVENTS, rng)
}

/// Simulate the lower-bound walk `X'` on the fast sites and return its
/// jump-count path on `[0, horizon]`.
///
/// `X'` starts at rank `m` (the (M+1)-st slowest site), holds with mean
/// `xi_x`, then jumps to rank `m` with probability `(m+1)/n` and to each
/// faster site with probability `1/n`.
pub fn lower_bound_jump_process<R: Rng + ?Sized>(
    xi: &LimitEnvironment,
    n_trunc: usize,
    m: usize,
    horizon: f64,
    rng: &mut R,
) -> Result<JumpCountPath, DualError> {
    if n_trunc > xi.depth() {
        return Err(DualError::BadTruncation {
            m,
            n_trunc,
            depth: xi.depth(),
        });
    }
    lower_bound_jump_process_on(&xi.xi()[..n_trunc], m, horizon, rng)
}

/// Same walk on explicit mean holdings (test hook for flat landscapes).
pub fn lower_bound_jump_process_on<R: Rng + ?Sized>(
    holdings: &[f64],
    m: usize,
    horizon: f64,
    rng: &mut R,
) -> Result<JumpCountPath, DualError> {
    let n_trunc = holdings.len();
    if m + 1 >= n_trunc {
        return Err(DualError::BadTruncation {
            m,
            n_trunc,
            depth: n_trunc,
        });
    }
    let target_dist = Uniform::from(0..n_trunc as u32);
    let mut times = vec![0.0];
    let mut counts = vec![0u64];
    let mut pos = m;
    let mut clock = 0.0;
    let mut jumps = 0u64;
    loop {
        clock += sample_exp(rng, holdings[pos]);
        if clock > horizon {
            break;
        }
        jumps += 1;
        times.push(clock);
        counts.push(jumps);
        let target = rng.sample(target_dist) as usize;
        pos = target.max(m);
        if jumps >= DEFAULT_MAX_EVENTS {
            return Err(DualError::SizeCap(DEFAULT_MAX_EVENTS));
        }
    }
    Ok(JumpCountPath { times, counts })
}

/// Threshold `n M^{1/alpha - 1} t / (4 (1 + C))` in the jump-count bound,
/// with `C` the realized `sup_i xi_i i^{1/alpha}` over the truncation.
pub fn jump_count_threshold(xi: &LimitEnvironment, n_trunc: usize, m: usize, t: f64) -> f64 {
    let alpha = xi.alpha();
    let c = realized_sup_prefix(xi, n_trunc);
    (n_trunc as f64) * (m as f64).powf(1.0 / alpha - 1.0) * t / (4.0 * (1.0 + c))
}

/// The explicit bound `exp(-t / (4 xi_{M+1}))` on the probability that
/// `J'_t` falls below the threshold above.
pub fn chernoff_jump_bound(xi: &LimitEnvironment, _n_trunc: usize, m: usize, t: f64) -> f64 {
    assert!(t >= 0.0);
    (-0.25 * t / xi.xi_at(m)).exp()
}

fn realized_sup_prefix(xi: &LimitEnvironment, n: usize) -> f64 {
    xi.xi()[..n]
        .iter()
        .enumerate()
        .map(|(i, x)| x * ((i + 1) as f64).powf(1.0 / xi.alpha()))
        .fold(0.0, f64::max)
}
